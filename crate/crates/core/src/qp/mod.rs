//! Dense convex quadratic programs.
//!
//! Problems take the form
//!
//! ```text
//!     minimize     x' Q x + c' x
//!     subject to   A_eq x  = b_eq
//!                  A x    <= b
//!                  lower <= x <= upper
//! ```
//!
//! Note the objective carries **no 1/2 factor** in front of the quadratic
//! term; the gradient is `2 Q x + c`. Cross-checks against solvers that use
//! the `1/2 x' Q x` convention must double `Q` first.
//!
//! Solvers are interchangeable strategies behind the [`QpSolver`] trait and
//! are selected by name through [`SolverRegistry`]; the default is the dense
//! primal active-set method.

mod active_set;
mod admm;
mod registry;

pub use active_set::ActiveSetSolver;
pub use admm::{AdmmSettings, AdmmSolver};
pub use registry::{QpSolver, SolverRegistry, DEFAULT_SOLVER};

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Symmetry tolerance for the cost matrix, relative to its largest entry.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// Eigenvalues of the cost matrix down to `-PSD_RTOL * ||Q||_2` are accepted
/// and repaired with a diagonal shift of the same size.
pub const PSD_RTOL: f64 = 1e-9;

/// A dense QP instance. See the module docs for the objective convention.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Symmetric n-by-n cost curvature.
    pub quadratic: DMatrix<f64>,
    /// Length-n linear cost.
    pub linear: DVector<f64>,
    /// Equality constraint coefficients, m_eq-by-n.
    pub a_eq: DMatrix<f64>,
    /// Equality right-hand sides, length m_eq.
    pub b_eq: DVector<f64>,
    /// Inequality coefficients (rows are `a.x <= b`), m_in-by-n.
    pub a_ineq: DMatrix<f64>,
    /// Inequality right-hand sides, length m_in.
    pub b_ineq: DVector<f64>,
    /// Per-variable lower bounds; `-inf` allowed.
    pub lower: DVector<f64>,
    /// Per-variable upper bounds; `+inf` allowed.
    pub upper: DVector<f64>,
}

impl QpProblem {
    /// Builds a problem and validates dimensions, symmetry and bound order.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        quadratic: DMatrix<f64>,
        linear: DVector<f64>,
        a_eq: DMatrix<f64>,
        b_eq: DVector<f64>,
        a_ineq: DMatrix<f64>,
        b_ineq: DVector<f64>,
        lower: DVector<f64>,
        upper: DVector<f64>,
    ) -> Result<Self> {
        let p = Self { quadratic, linear, a_eq, b_eq, a_ineq, b_ineq, lower, upper };
        p.validate()?;
        Ok(p)
    }

    /// An unconstrained problem: no equalities, no inequalities, open box.
    pub fn unconstrained(quadratic: DMatrix<f64>, linear: DVector<f64>) -> Result<Self> {
        let n = linear.len();
        Self::new(
            quadratic,
            linear,
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DMatrix::zeros(0, n),
            DVector::zeros(0),
            DVector::from_element(n, f64::NEG_INFINITY),
            DVector::from_element(n, f64::INFINITY),
        )
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn num_eq(&self) -> usize {
        self.b_eq.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.b_ineq.len()
    }

    /// Checks every structural invariant; solvers call this before working.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if self.quadratic.nrows() != n || self.quadratic.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "cost matrix is {}x{}, expected {n}x{n}",
                self.quadratic.nrows(),
                self.quadratic.ncols()
            )));
        }
        if self.a_eq.ncols() != n && self.a_eq.nrows() > 0 {
            return Err(Error::DimensionMismatch(format!(
                "equality matrix has {} columns, expected {n}",
                self.a_eq.ncols()
            )));
        }
        if self.a_eq.nrows() != self.b_eq.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} equality rows vs {} right-hand sides",
                self.a_eq.nrows(),
                self.b_eq.len()
            )));
        }
        if self.a_ineq.ncols() != n && self.a_ineq.nrows() > 0 {
            return Err(Error::DimensionMismatch(format!(
                "inequality matrix has {} columns, expected {n}",
                self.a_ineq.ncols()
            )));
        }
        if self.a_ineq.nrows() != self.b_ineq.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} inequality rows vs {} right-hand sides",
                self.a_ineq.nrows(),
                self.b_ineq.len()
            )));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "bound vectors have lengths {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        let scale = self.quadratic.amax().max(1.0);
        let mut max_asym: f64 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((self.quadratic[(i, j)] - self.quadratic[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_RTOL * scale {
            return Err(Error::NotSymmetric { max_asymmetry: max_asym / scale });
        }
        for i in 0..n {
            if self.lower[i] > self.upper[i] {
                return Err(Error::InvalidBounds { index: i });
            }
            if self.lower[i].is_nan() || self.upper[i].is_nan() {
                return Err(Error::NonFinite(format!("bounds at index {i}")));
            }
        }
        for v in self.quadratic.iter().chain(self.linear.iter()) {
            if !v.is_finite() {
                return Err(Error::NonFinite("cost data".into()));
            }
        }
        for v in self
            .a_eq
            .iter()
            .chain(self.b_eq.iter())
            .chain(self.a_ineq.iter())
            .chain(self.b_ineq.iter())
        {
            if !v.is_finite() {
                return Err(Error::NonFinite("constraint data".into()));
            }
        }
        Ok(())
    }

    /// Objective value `x' Q x + c' x`.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        (x.transpose() * &self.quadratic * x)[(0, 0)] + self.linear.dot(x)
    }

    /// Objective gradient `2 Q x + c`.
    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.quadratic * x * 2.0 + &self.linear
    }

    /// Plain-text dump for offline cross-checking. Layout:
    ///
    /// ```text
    /// qp <n> <m_eq> <m_in>
    /// Q      (n rows, row-major, space separated)
    /// c      (one row)
    /// A_eq   (m_eq rows)
    /// b_eq   (one row)
    /// A      (m_in rows)
    /// b      (one row)
    /// lower  (one row)
    /// upper  (one row)
    /// ```
    ///
    /// Numbers use `%.17e` so the dump round-trips exactly. Empty blocks are
    /// omitted when their dimension is zero.
    pub fn dump_text(&self) -> String {
        fn push_row<'a>(out: &mut String, vals: impl Iterator<Item = &'a f64>) {
            let mut first = true;
            for v in vals {
                if !first {
                    out.push(' ');
                }
                out.push_str(&format!("{v:.17e}"));
                first = false;
            }
            out.push('\n');
        }
        let (n, me, mi) = (self.num_vars(), self.num_eq(), self.num_ineq());
        let mut out = format!("qp {n} {me} {mi}\n");
        for i in 0..n {
            push_row(&mut out, self.quadratic.row(i).iter());
        }
        push_row(&mut out, self.linear.iter());
        for i in 0..me {
            push_row(&mut out, self.a_eq.row(i).iter());
        }
        if me > 0 {
            push_row(&mut out, self.b_eq.iter());
        }
        for i in 0..mi {
            push_row(&mut out, self.a_ineq.row(i).iter());
        }
        if mi > 0 {
            push_row(&mut out, self.b_ineq.iter());
        }
        push_row(&mut out, self.lower.iter());
        push_row(&mut out, self.upper.iter());
        out
    }
}

/// Termination state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

/// Solver tolerances and limits.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Primal feasibility tolerance on row-normalized constraints.
    pub feas_tol: f64,
    /// Stationarity tolerance, relative to the gradient scale.
    pub stat_tol: f64,
    /// Complementary slackness tolerance.
    pub comp_tol: f64,
    /// Iteration cap; `None` picks `40 * (n + m) + 200`.
    pub max_iterations: Option<usize>,
    /// Optional starting point. It is clamped into the box; if it violates
    /// other constraints a feasibility phase runs from it.
    pub warm_start: Option<DVector<f64>>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            stat_tol: 1e-6,
            comp_tol: 1e-6,
            max_iterations: None,
            warm_start: None,
        }
    }
}

/// Solver output.
///
/// `ineq_multipliers` has length `m_in + 2n`, laid out as the general
/// inequality rows, then the `n` lower-bound rows (`-x <= -lower`), then the
/// `n` upper-bound rows (`x <= upper`). Multipliers for infinite bounds are
/// zero.
#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    pub objective: f64,
    pub status: SolveStatus,
    pub eq_multipliers: DVector<f64>,
    pub ineq_multipliers: DVector<f64>,
    pub iterations: usize,
    /// Max-norm over the three KKT residual blocks at the returned point.
    pub kkt_residual: f64,
    /// For `Infeasible` returns: the smallest max-norm constraint violation
    /// found by the feasibility phase, i.e. the certificate magnitude.
    pub infeasibility: Option<f64>,
}

/// Max-norm residuals of the three KKT blocks at `(x, multipliers)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResidual {
    /// `|| 2 Q x + c + A_eq' nu + A' mu - mu_lo + mu_hi ||_inf`
    pub stationarity: f64,
    /// Largest constraint violation (equalities, inequalities, box).
    pub primal_infeasibility: f64,
    /// Largest `|mu_i * slack_i|` over the inequality and bound rows.
    pub complementarity: f64,
}

impl KktResidual {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_infeasibility)
            .max(self.complementarity)
    }
}

/// Evaluates the KKT residuals of a candidate solution against `problem`.
pub fn kkt_residual(problem: &QpProblem, solution: &QpSolution) -> Result<KktResidual> {
    problem.validate()?;
    let n = problem.num_vars();
    let (me, mi) = (problem.num_eq(), problem.num_ineq());
    if solution.x.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "solution has {} variables, problem has {n}",
            solution.x.len()
        )));
    }
    if solution.eq_multipliers.len() != me {
        return Err(Error::DimensionMismatch(format!(
            "{} equality multipliers, expected {me}",
            solution.eq_multipliers.len()
        )));
    }
    if solution.ineq_multipliers.len() != mi + 2 * n {
        return Err(Error::DimensionMismatch(format!(
            "{} inequality multipliers, expected {}",
            solution.ineq_multipliers.len(),
            mi + 2 * n
        )));
    }
    let x = &solution.x;
    let mut grad = problem.gradient(x);
    if me > 0 {
        grad += problem.a_eq.transpose() * &solution.eq_multipliers;
    }
    let mu = &solution.ineq_multipliers;
    if mi > 0 {
        let mu_rows = DVector::from_fn(mi, |i, _| mu[i]);
        grad += problem.a_ineq.transpose() * mu_rows;
    }
    for i in 0..n {
        grad[i] += -mu[mi + i] + mu[mi + n + i];
    }
    let stationarity = grad.amax();

    let report = feasibility_report(problem, x);
    let mut comp: f64 = 0.0;
    for i in 0..mi {
        let slack = problem.b_ineq[i] - problem.a_ineq.row(i).transpose().dot(x);
        comp = comp.max((mu[i] * slack).abs());
    }
    for i in 0..n {
        if problem.lower[i].is_finite() {
            comp = comp.max((mu[mi + i] * (x[i] - problem.lower[i])).abs());
        }
        if problem.upper[i].is_finite() {
            comp = comp.max((mu[mi + n + i] * (problem.upper[i] - x[i])).abs());
        }
    }
    Ok(KktResidual {
        stationarity,
        primal_infeasibility: report.worst_violation,
        complementarity: comp,
    })
}

/// Worst constraint violation of `x`, with the offending row identified.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst_violation: f64,
    /// Human-readable name of the worst row, e.g. `eq[0]`, `ineq[3]`,
    /// `lower[1]`, `upper[0]`; `None` when there are no constraints.
    pub worst_constraint: Option<String>,
}

fn feasibility_report(problem: &QpProblem, x: &DVector<f64>) -> FeasibilityReport {
    let mut worst = f64::NEG_INFINITY;
    let mut worst_name: Option<String> = None;
    let mut note = |v: f64, name: String| {
        if v > worst {
            worst = v;
            worst_name = Some(name);
        }
    };
    for i in 0..problem.num_eq() {
        let v = (problem.a_eq.row(i).transpose().dot(x) - problem.b_eq[i]).abs();
        note(v, format!("eq[{i}]"));
    }
    for i in 0..problem.num_ineq() {
        let v = problem.a_ineq.row(i).transpose().dot(x) - problem.b_ineq[i];
        note(v.max(0.0), format!("ineq[{i}]"));
    }
    for i in 0..problem.num_vars() {
        note((problem.lower[i] - x[i]).max(0.0), format!("lower[{i}]"));
        note((x[i] - problem.upper[i]).max(0.0), format!("upper[{i}]"));
    }
    FeasibilityReport {
        feasible: true, // caller applies its tolerance
        worst_violation: worst.max(0.0),
        worst_constraint: worst_name,
    }
}

/// True iff `x` satisfies every constraint within `tol` (boundary inclusive).
/// The report carries the worst violation found, whether or not it passes.
pub fn check_feasible(problem: &QpProblem, x: &DVector<f64>, tol: f64) -> (bool, FeasibilityReport) {
    let mut report = feasibility_report(problem, x);
    report.feasible = report.worst_violation <= tol;
    (report.feasible, report)
}

/// Solves with the default strategy (the active-set method).
pub fn solve_qp(problem: &QpProblem, options: &SolveOptions) -> Result<QpSolution> {
    ActiveSetSolver::default().solve(problem, options)
}

#[cfg(test)]
mod tests;
