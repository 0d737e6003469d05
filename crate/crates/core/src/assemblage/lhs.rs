use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat};

use super::{label, validate_assemblage, Assemblage};

#[derive(Debug, Clone, PartialEq)]
pub struct LhsOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub infeasibility_threshold: f64,
    pub window: usize,
    pub stall_ratio: f64,
}

impl Default for LhsOptions {
    fn default() -> Self {
        LhsOptions {
            tol: 1e-10,
            max_iter: 50_000,
            infeasibility_threshold: 1e-4,
            window: 1000,
            stall_ratio: 1e-3,
        }
    }
}

/// `Σ = Σ_i q_i L_i ⊗ ρ_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LhsDecomposition {
    pub weights: Vec<f64>,
    /// Deterministic responses `[a_0, a_1, b_0, b_1]`.
    pub boxes: Vec<[usize; 4]>,
    pub states: Vec<CMat>,
    pub residual: f64,
    pub iterations: usize,
}

impl LhsDecomposition {
    pub fn reconstruct(&self, dim_c: usize) -> Result<Assemblage> {
        let mut entries = vec![CMat::zeros(dim_c, dim_c); 16];
        for ((w, r), rho) in self.weights.iter().zip(&self.boxes).zip(&self.states) {
            for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                entries[label(r[x], r[2 + y], x, y)] += rho * real(*w);
            }
        }
        Assemblage::new(dim_c, entries)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LhsResult {
    Lhs(LhsDecomposition),
    NotLhs { residual: f64, iterations: usize },
}

/// Incidence `L_i(ab|xy)` of the sixteen deterministic responses.
fn incidence() -> DMatrix<f64> {
    let mut m = DMatrix::zeros(16, 16);
    for i in 0..16 {
        let r = [(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1];
        for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            m[(label(r[x], r[2 + y], x, y), i)] = 1.0;
        }
    }
    m
}

/// Searches for PSD blocks `τ_i` with `Σ_i L_i(ab|xy) τ_i = σ_{ab|xy}` by
/// Dykstra-corrected alternating projections; the affine projection acts on
/// each matrix element independently through the pseudo-inverse of the
/// incidence matrix.
pub fn lhs_membership(s: &Assemblage, opts: &LhsOptions) -> Result<LhsResult> {
    let report = validate_assemblage(s);
    if !report.is_valid() {
        return Err(Error::InvalidAssemblage(report.violations.len()));
    }
    let d = s.dim_c();
    let m = incidence();
    let m_pinv = m.clone().pseudo_inverse(1e-12).map_err(|e| Error::Diverged(e.to_string()))?;
    let sigma = s.entries();

    let affine = |tau: &[CMat]| -> Vec<CMat> {
        // Residual r_k = Σ_i M_ki τ_i − σ_k, then τ_i −= Σ_k M⁺_ik r_k.
        let resid: Vec<CMat> = (0..16)
            .map(|k| {
                let mut acc = -sigma[k].clone();
                for (i, t) in tau.iter().enumerate() {
                    if m[(k, i)] != 0.0 {
                        acc += t;
                    }
                }
                acc
            })
            .collect();
        (0..16)
            .map(|i| {
                let mut t = tau[i].clone();
                for (k, r) in resid.iter().enumerate() {
                    let w = m_pinv[(i, k)];
                    if w != 0.0 {
                        t -= r * real(w);
                    }
                }
                t
            })
            .collect()
    };
    let psd = |z: &CMat| -> CMat {
        let eig = linalg::hermitian_eigen(z);
        let mut scaled = eig.eigenvectors.clone();
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            scaled.column_mut(j).scale_mut(l.max(0.0));
        }
        scaled * eig.eigenvectors.adjoint()
    };

    let mut y = vec![CMat::zeros(d, d); 16];
    let mut inc = vec![CMat::zeros(d, d); 16];
    let mut history: Vec<f64> = Vec::new();
    for it in 0..opts.max_iter {
        let x = affine(&y);
        let mut residual_sq = 0.0;
        for i in 0..16 {
            let z = &x[i] + &inc[i];
            y[i] = psd(&z);
            inc[i] = z - &y[i];
            residual_sq += (&x[i] - &y[i]).norm_squared();
        }
        let r = residual_sq.sqrt();
        if !r.is_finite() {
            return Err(Error::Diverged("non-finite residual".into()));
        }
        history.push(r);
        if r < opts.tol {
            let mut weights = Vec::new();
            let mut boxes = Vec::new();
            let mut states = Vec::new();
            for (i, t) in y.iter().enumerate() {
                let w = t.trace().re;
                if w > 1e-12 {
                    weights.push(w);
                    boxes.push([(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1]);
                    states.push(t / real(w));
                }
            }
            return Ok(LhsResult::Lhs(LhsDecomposition {
                weights,
                boxes,
                states,
                residual: r,
                iterations: it + 1,
            }));
        }
        if it >= opts.window {
            let start = history[it - opts.window];
            let above = history[it - opts.window..].iter().all(|&h| h > opts.infeasibility_threshold);
            if above && r > (1.0 - opts.stall_ratio) * start {
                return Ok(LhsResult::NotLhs {
                    residual: r,
                    iterations: it + 1,
                });
            }
        }
    }
    Err(Error::SolverUndecided)
}
