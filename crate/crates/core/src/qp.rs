//! Ridge-regularized Gram factorizations and the box-constrained concave
//! QP solved for each twin dual:
//!
//! ```text
//! maximize   1ᵀα − ½ αᵀQα
//! subject to 0 ≤ α ≤ u
//! ```
//!
//! The solver is cyclic coordinate ascent with exact clipped coordinate
//! steps, certified by the projected-gradient KKT residual.

use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{invalid, Error, Result};

/// Cholesky factorization of `AᵀA + δI`.
#[derive(Clone, Debug)]
pub struct RidgeGram {
    chol: Cholesky<f64, Dyn>,
    delta: f64,
}

/// Factorizes `AᵀA + δI` for a `r x c` matrix `a`.
pub fn ridge_factorize(a: &DMatrix<f64>, delta: f64) -> Result<RidgeGram> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", alloc::format!("must be finite and > 0, got {delta}")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { context: "ridge_factorize input" });
    }
    let mut gram = a.tr_mul(a);
    for i in 0..gram.nrows() {
        gram[(i, i)] += delta;
    }
    let largest = gram.diagonal().max();
    Cholesky::new(gram)
        .map(|chol| RidgeGram { chol, delta })
        .ok_or(Error::Factorization { condition_estimate: largest / delta })
}

impl RidgeGram {
    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Lower-triangular `L` with `L Lᵀ = AᵀA + δI`.
    pub fn factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    /// Rebuilds `AᵀA + δI` from the factor.
    pub fn gram(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose()
    }

    fn check_rows(&self, rows: usize) -> Result<()> {
        if rows != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rows, context: "ridge solve right-hand side" });
        }
        Ok(())
    }

    /// `(AᵀA + δI)⁻¹ rhs`.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(rhs.nrows())?;
        Ok(self.chol.solve(rhs))
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_rows(rhs.len())?;
        Ok(self.chol.solve(rhs))
    }

    /// `E L⁻ᵀ`: row `i` becomes `L⁻¹ eᵢ`, so that
    /// `E (AᵀA + δI)⁻¹ Eᵀ = (E L⁻ᵀ)(E L⁻ᵀ)ᵀ`.
    pub fn whiten_rows(&self, e: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_rows(e.ncols())?;
        let l = self.chol.l_dirty();
        let solved = l.solve_lower_triangular(&e.transpose()).ok_or(Error::Factorization {
            condition_estimate: f64::INFINITY,
        })?;
        Ok(solved.transpose())
    }

    /// `L⁻ᵀ v`.
    pub fn unwhiten(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_rows(v.len())?;
        self.chol
            .l_dirty()
            .tr_solve_lower_triangular(v)
            .ok_or(Error::Factorization { condition_estimate: f64::INFINITY })
    }
}

/// Hessian of the dual, stored either explicitly or as `Q = P Pᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub enum Hessian {
    Dense(DMatrix<f64>),
    /// Columns are the rows of `P` (`r x p`), so `Q_ij = colᵢ · colⱼ`.
    Factored(DMatrix<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxQp {
    hessian: Hessian,
    upper: f64,
}

const SYMMETRY_TOL: f64 = 1e-10;
const NEG_DIAGONAL_TOL: f64 = -1e-10;

fn check_upper(upper: f64) -> Result<()> {
    if upper > 0.0 && upper.is_finite() {
        Ok(())
    } else {
        Err(invalid("upper", alloc::format!("box bound must be finite and > 0, got {upper}")))
    }
}

impl BoxQp {
    /// Explicit `Q`. Asymmetry above `1e-10` (relative to the largest
    /// entry) is rejected; the accepted matrix is symmetrized.
    pub fn dense(q: DMatrix<f64>, upper: f64) -> Result<Self> {
        check_upper(upper)?;
        if !q.is_square() {
            return Err(Error::InvalidHessian(alloc::format!("{}x{} is not square", q.nrows(), q.ncols())));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "QP Hessian" });
        }
        let scale = q.amax().max(1.0);
        let asym = (&q - q.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidHessian(alloc::format!("asymmetry {asym:.3e} exceeds tolerance")));
        }
        let q = (&q + q.transpose()) * 0.5;
        if let Some(i) = q.diagonal().iter().position(|&d| d < NEG_DIAGONAL_TOL * scale) {
            return Err(Error::InvalidHessian(alloc::format!("negative diagonal entry at {i}")));
        }
        Ok(BoxQp { hessian: Hessian::Dense(q), upper })
    }

    /// Implicit `Q = P Pᵀ` for a `p x r` factor `p_rows`.
    pub fn factored(p_rows: &DMatrix<f64>, upper: f64) -> Result<Self> {
        check_upper(upper)?;
        if p_rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "QP Hessian factor" });
        }
        Ok(BoxQp { hessian: Hessian::Factored(p_rows.transpose()), upper })
    }

    pub fn dim(&self) -> usize {
        match &self.hessian {
            Hessian::Dense(q) => q.nrows(),
            Hessian::Factored(pt) => pt.ncols(),
        }
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn hessian(&self) -> &Hessian {
        &self.hessian
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.hessian {
            Hessian::Dense(q) => q.clone(),
            Hessian::Factored(pt) => pt.tr_mul(pt),
        }
    }

    /// `1 − Qα`.
    pub fn gradient(&self, alpha: &[f64]) -> DVector<f64> {
        let a = DVector::from_column_slice(alpha);
        let qa = match &self.hessian {
            Hessian::Dense(q) => q * &a,
            Hessian::Factored(pt) => pt.tr_mul(&(pt * &a)),
        };
        qa.map(|v| 1.0 - v)
    }

    /// `1ᵀα − ½ αᵀQα`.
    pub fn objective(&self, alpha: &[f64]) -> f64 {
        let g = self.gradient(alpha);
        objective_from_gradient(alpha, &g)
    }
}

fn objective_from_gradient(alpha: &[f64], g: &DVector<f64>) -> f64 {
    // αᵀQα = Σ αᵢ (1 − gᵢ)
    alpha.iter().zip(g.iter()).map(|(a, gi)| a - 0.5 * a * (1.0 - gi)).sum()
}

fn residual_from_gradient(alpha: &[f64], g: &DVector<f64>, upper: f64) -> f64 {
    alpha
        .iter()
        .zip(g.iter())
        .map(|(&a, &gi)| {
            if a <= 0.0 {
                gi.max(0.0)
            } else if a >= upper {
                (-gi).max(0.0)
            } else {
                gi.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Largest projected-gradient violation at `alpha` (clamped into the box
/// first): `|g|` for interior coordinates, `max(0, g)` at the lower bound and
/// `max(0, −g)` at the upper bound, with `g = 1 − Qα`.
pub fn kkt_residual(q: &BoxQp, alpha: &[f64]) -> f64 {
    let clamped: Vec<f64> = alpha.iter().map(|a| a.clamp(0.0, q.upper)).collect();
    let g = q.gradient(&clamped);
    residual_from_gradient(&clamped, &g, q.upper)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    /// Maximum number of full coordinate sweeps.
    pub max_iter: usize,
    #[serde(skip)]
    pub record_trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 10_000, record_trace: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Completed sweeps.
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each sweep when [`SolverOptions::record_trace`] is set.
    pub trace: Vec<f64>,
}

/// Exact coordinate maximizer of the dual along coordinate `i`, given
/// `g_rest = 1 − Σ_{j≠i} Q_ij α_j` and the curvature `q_ii`.
fn coordinate_step(g_rest: f64, q_ii: f64, upper: f64) -> f64 {
    if q_ii > 0.0 {
        (g_rest / q_ii).clamp(0.0, upper)
    } else if g_rest > 0.0 {
        upper
    } else {
        0.0
    }
}

/// Cyclic clipped coordinate ascent from `α = 0`.
///
/// Each sweep visits coordinates `0..p` in order. After every sweep the
/// gradient is recomputed from scratch and the solve stops once the KKT
/// residual is at most `opts.tol`. Hitting `opts.max_iter` is not an error;
/// the returned solution reports `converged = false` and its residual.
pub fn solve_box_qp(q: &BoxQp, opts: &SolverOptions) -> Result<QpSolution> {
    if !(opts.tol > 0.0) {
        return Err(invalid("tol", alloc::format!("must be > 0, got {}", opts.tol)));
    }
    let p = q.dim();
    let u = q.upper;
    let mut alpha = alloc::vec![0.0; p];
    let mut trace = Vec::new();

    let mut g = q.gradient(&alpha);
    let mut residual = residual_from_gradient(&alpha, &g, u);
    let mut iterations = 0;

    match &q.hessian {
        Hessian::Dense(qm) => {
            let diag: Vec<f64> = qm.diagonal().iter().copied().collect();
            while residual > opts.tol && iterations < opts.max_iter {
                for i in 0..p {
                    let col = qm.column(i);
                    let qa: f64 = col.iter().zip(&alpha).map(|(a, b)| a * b).sum();
                    let g_rest = 1.0 - qa + diag[i] * alpha[i];
                    alpha[i] = coordinate_step(g_rest, diag[i], u);
                }
                iterations += 1;
                g = q.gradient(&alpha);
                residual = residual_from_gradient(&alpha, &g, u);
                if opts.record_trace {
                    trace.push(objective_from_gradient(&alpha, &g));
                }
            }
        }
        Hessian::Factored(pt) => {
            let diag: Vec<f64> = pt.column_iter().map(|c| c.norm_squared()).collect();
            let mut w = DVector::<f64>::zeros(pt.nrows());
            while residual > opts.tol && iterations < opts.max_iter {
                for i in 0..p {
                    let col = pt.column(i);
                    let g_rest = 1.0 - col.dot(&w) + diag[i] * alpha[i];
                    let next = coordinate_step(g_rest, diag[i], u);
                    let delta = next - alpha[i];
                    if delta != 0.0 {
                        w.axpy(delta, &col, 1.0);
                        alpha[i] = next;
                    }
                }
                iterations += 1;
                let a = DVector::from_column_slice(&alpha);
                w = pt * &a;
                g = pt.tr_mul(&w).map(|v| 1.0 - v);
                residual = residual_from_gradient(&alpha, &g, u);
                if opts.record_trace {
                    trace.push(objective_from_gradient(&alpha, &g));
                }
            }
        }
    }

    Ok(QpSolution {
        objective: objective_from_gradient(&alpha, &g),
        alpha,
        kkt_residual: residual,
        iterations,
        converged: residual <= opts.tol,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn solve(q: &[f64], p: usize, u: f64) -> QpSolution {
        let qp = BoxQp::dense(DMatrix::from_row_slice(p, p, q), u).unwrap();
        solve_box_qp(&qp, &SolverOptions::default()).unwrap()
    }

    #[test]
    fn scalar_interior_optimum() {
        let s = solve(&[2.0], 1, 10.0);
        assert!((s.alpha[0] - 0.5).abs() < 1e-15);
        assert!((s.objective - 0.25).abs() < 1e-15);
        assert!(s.converged);
    }

    #[test]
    fn scalar_clipped_optimum() {
        let s = solve(&[0.05], 1, 10.0);
        assert_eq!(s.alpha, vec![10.0]);
        assert_eq!(s.kkt_residual, 0.0);
    }

    #[test]
    fn two_by_two_interior() {
        let s = solve(&[2.0, 1.0, 1.0, 2.0], 2, 10.0);
        assert!(s.alpha.iter().all(|a| (a - 1.0 / 3.0).abs() < 1e-8));
        assert!(s.kkt_residual <= 1e-8);
    }

    #[test]
    fn zero_curvature_goes_to_bound() {
        let s = solve(&[0.0, 0.0, 0.0, 1.0], 2, 3.0);
        assert_eq!(s.alpha[0], 3.0);
        assert!((s.alpha[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_examples() {
        let qp = BoxQp::dense(DMatrix::from_element(1, 1, 2.0), 10.0).unwrap();
        assert_eq!(kkt_residual(&qp, &[0.0]), 1.0);
        let clipped = BoxQp::dense(DMatrix::from_element(1, 1, 0.05), 10.0).unwrap();
        assert_eq!(kkt_residual(&clipped, &[10.0]), 0.0);
        let two = BoxQp::dense(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), 10.0).unwrap();
        assert!(kkt_residual(&two, &[1.0 / 3.0, 1.0 / 3.0]) <= 1e-9);
    }

    #[test]
    fn rejects_bad_hessians() {
        assert!(matches!(
            BoxQp::dense(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]), 1.0),
            Err(Error::InvalidHessian(_))
        ));
        assert!(BoxQp::dense(DMatrix::from_row_slice(1, 1, &[-1.0]), 1.0).is_err());
        assert!(BoxQp::dense(DMatrix::zeros(2, 3), 1.0).is_err());
        assert!(BoxQp::dense(DMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn factored_matches_dense() {
        let p = DMatrix::from_row_slice(3, 2, &[1.0, 0.5, -0.3, 2.0, 0.7, 0.1]);
        let f = BoxQp::factored(&p, 2.0).unwrap();
        let d = BoxQp::dense(&p * p.transpose(), 2.0).unwrap();
        let (sf, sd) = (solve_box_qp(&f, &SolverOptions::default()).unwrap(), solve_box_qp(&d, &SolverOptions::default()).unwrap());
        assert!((sf.objective - sd.objective).abs() < 1e-10);
        assert!(sf.kkt_residual <= 1e-8 && sd.kkt_residual <= 1e-8);
    }

    #[test]
    fn ridge_examples() {
        let g = ridge_factorize(&DMatrix::identity(2, 2), 1.0).unwrap();
        assert!((g.gram() - DMatrix::identity(2, 2) * 2.0).amax() < 1e-15);
        let z = ridge_factorize(&DMatrix::zeros(3, 2), 0.5).unwrap();
        assert!((z.gram() - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        assert!(ridge_factorize(&DMatrix::identity(2, 2), 0.0).is_err());
        assert!(ridge_factorize(&DMatrix::from_element(1, 1, f64::NAN), 1.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let g = ridge_factorize(&DMatrix::identity(2, 2), 1.0).unwrap();
        let x = g.solve_vec(&DVector::from_vec(vec![4.0, 6.0])).unwrap();
        assert!((x - DVector::from_vec(vec![2.0, 3.0])).amax() < 1e-15);
        assert_eq!(g.solve_vec(&DVector::zeros(2)).unwrap(), DVector::zeros(2));
        assert!(g.solve_vec(&DVector::zeros(3)).is_err());
    }
}
