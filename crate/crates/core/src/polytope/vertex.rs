use nalgebra::DMatrix;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

use super::{BoxVector, ConstraintSystem, Entries, RowKind, FLOAT_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub row: usize,
    pub kind: RowKind,
    /// Amount by which the row fails: `A_i·P − b_i` for inequalities,
    /// `|A_i·P − b_i|` for equalities.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VertexReport {
    pub is_vertex: bool,
    pub tight_row_count: usize,
    pub rank: usize,
    pub n_seq: usize,
    /// Smallest eigenvalue of `Ã_Pᵀ Ã_P`; zero exactly when the box is not a
    /// vertex. Only computed for `n_seq ≤ 1024`.
    pub min_eigenvalue: Option<f64>,
}

const EIGEN_DIAGNOSTIC_LIMIT: usize = 1024;

/// Residual of row `i`, signed so that positive means violated; `None` for
/// rows that hold (exactly, or within tolerance in float mode).
fn row_status(cs: &ConstraintSystem, p: &BoxVector) -> Vec<(f64, bool)> {
    match p.entries() {
        Entries::Rational(v) => cs
            .rows
            .iter()
            .map(|row| {
                let slack = row.eval_rational(v) - exact::int(row.rhs);
                let tight = slack.is_zero();
                let violated = if row.is_equality() { !tight } else { slack.is_positive() };
                let residual = if row.is_equality() { exact::to_f64(&slack.abs()) } else { exact::to_f64(&slack) };
                (if violated { residual } else { 0.0 }, tight)
            })
            .collect(),
        Entries::Float(v) => cs
            .rows
            .iter()
            .map(|row| {
                let slack = row.eval_f64(v) - row.rhs as f64;
                let tight = slack.abs() <= FLOAT_TOL;
                let violated = if row.is_equality() { !tight } else { slack > FLOAT_TOL };
                let residual = if row.is_equality() { slack.abs() } else { slack };
                (if violated { residual } else { 0.0 }, tight)
            })
            .collect(),
    }
}

pub fn validate_box(cs: &ConstraintSystem, p: &BoxVector) -> Result<ValidationReport> {
    if cs.scenario != *p.scenario() {
        return Err(Error::ScenarioMismatch);
    }
    let violations = row_status(cs, p)
        .into_iter()
        .enumerate()
        .filter(|(_, (residual, _))| *residual > 0.0)
        .map(|(row, (residual, _))| Violation {
            row,
            kind: cs.rows[row].kind,
            residual,
        })
        .collect();
    Ok(ValidationReport { violations })
}

/// Indices of the rows of `A` that hold with equality at `p`.
pub fn tight_rows(cs: &ConstraintSystem, p: &BoxVector) -> Result<Vec<usize>> {
    let report = validate_box(cs, p)?;
    if !report.is_valid() {
        return Err(Error::InvalidBox(report.violations.len()));
    }
    Ok(row_status(cs, p)
        .into_iter()
        .enumerate()
        .filter(|(_, (_, tight))| *tight)
        .map(|(i, _)| i)
        .collect())
}

/// Tight-row rank test: `p` is a vertex iff the tight rows have full
/// column rank. The rank is exact; the rows have integer coefficients
/// regardless of the box mode.
pub fn is_vertex(cs: &ConstraintSystem, p: &BoxVector) -> Result<VertexReport> {
    let tight = tight_rows(cs, p)?;
    let n = cs.n_seq();
    let dense: Vec<Vec<Rational>> = tight.iter().map(|&i| cs.rows[i].dense(n)).collect();
    let rank = exact::rank(&dense);
    let min_eigenvalue = (n <= EIGEN_DIAGNOSTIC_LIMIT).then(|| {
        let mut a = DMatrix::<f64>::zeros(tight.len(), n);
        for (r, &i) in tight.iter().enumerate() {
            for &(c, v) in &cs.rows[i].coeffs {
                a[(r, c)] = v as f64;
            }
        }
        let gram = a.transpose() * a;
        gram.symmetric_eigenvalues().min().max(0.0)
    });
    Ok(VertexReport {
        is_vertex: rank == n,
        tight_row_count: tight.len(),
        rank,
        n_seq: n,
        min_eigenvalue,
    })
}
