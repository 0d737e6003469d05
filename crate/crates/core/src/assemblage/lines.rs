use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CMat, CVec};

use super::{label, Assemblage};

/// Eigenvalues below this count as zero when splitting entries.
const RANK_TOL: f64 = 1e-9;
/// `|⟨ψ|φ⟩|² ≥ 1 − SAME_STATE_TOL` means the same pure state.
const SAME_STATE_TOL: f64 = 1e-9;
/// Weights of the same projection in a type-II line must agree this closely.
const WEIGHT_TOL: f64 = 1e-9;
/// Relative singular-value cutoff for the similarity kernels.
const KERNEL_TOL: f64 = 1e-9;

/// A rank-one (or zero) entry `p |ψ⟩⟨ψ|`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureEntry {
    pub weight: f64,
    pub state: Option<CVec>,
}

impl PureEntry {
    pub fn new(weight: f64, state: CVec) -> Self {
        let norm = state.norm();
        PureEntry {
            weight,
            state: Some(state / real(norm)),
        }
    }

    pub fn zero() -> Self {
        PureEntry { weight: 0.0, state: None }
    }

    pub fn is_zero(&self) -> bool {
        self.state.is_none()
    }

    fn projector(&self, d: usize) -> CMat {
        match &self.state {
            Some(v) => linalg::projector(v),
            None => CMat::zeros(d, d),
        }
    }

    fn same_state(&self, other: &PureEntry) -> bool {
        match (&self.state, &other.state) {
            (Some(a), Some(b)) => linalg::fidelity(a, b) >= 1.0 - SAME_STATE_TOL,
            _ => false,
        }
    }
}

/// Splits every entry as `p |ψ⟩⟨ψ|`.
pub fn pure_entries(s: &Assemblage) -> Result<Vec<PureEntry>> {
    s.entries()
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let eig = linalg::hermitian_eigen(m);
            let n = eig.eigenvalues.len();
            if n >= 2 && eig.eigenvalues[n - 2] > RANK_TOL {
                return Err(Error::RankTooHigh(super::label_text(k)));
            }
            let top = eig.eigenvalues[n - 1];
            if top <= RANK_TOL {
                Ok(PureEntry::zero())
            } else {
                Ok(PureEntry::new(top, eig.eigenvectors.column(n - 1).into_owned()))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineType {
    TypeI,
    TypeII,
    TypeIII,
}

impl LineType {
    pub fn name(self) -> &'static str {
        match self {
            LineType::TypeI => "TypeI",
            LineType::TypeII => "TypeII",
            LineType::TypeIII => "TypeIII",
        }
    }
}

/// Labels of row `r = (a|x)` (index `2x + a`), in column order.
pub fn row_labels(r: usize) -> [usize; 4] {
    let (a, x) = (r & 1, r >> 1);
    [0, 1, 2, 3].map(|c| label(a, c & 1, x, c >> 1))
}

/// Labels of column `c = (b|y)` (index `2y + b`), in row order.
pub fn column_labels(c: usize) -> [usize; 4] {
    let (b, y) = (c & 1, c >> 1);
    [0, 1, 2, 3].map(|r| label(r & 1, b, r >> 1, y))
}

/// Classifies a line `[e1, e2 | e3, e4]` whose halves obey
/// `e1 + e2 = e3 + e4`.
pub fn classify_line(line: &[PureEntry; 4]) -> Result<LineType> {
    let nonzero: Vec<&PureEntry> = line.iter().filter(|e| !e.is_zero()).collect();
    let mut distinct: Vec<&PureEntry> = Vec::new();
    for e in &nonzero {
        if !distinct.iter().any(|d| d.same_state(e)) {
            distinct.push(e);
        }
    }
    if distinct.len() <= 1 {
        return Ok(LineType::TypeI);
    }
    if nonzero.len() < 4 {
        return Err(Error::Unclassifiable);
    }
    match distinct.len() {
        4 => Ok(LineType::TypeIII),
        2 => {
            let [e1, e2, e3, e4] = line;
            if e1.same_state(e2) {
                return Err(Error::Unclassifiable);
            }
            let close = |a: &PureEntry, b: &PureEntry| a.same_state(b) && (a.weight - b.weight).abs() <= WEIGHT_TOL;
            if (close(e1, e3) && close(e2, e4)) || (close(e1, e4) && close(e2, e3)) {
                Ok(LineType::TypeII)
            } else {
                Err(Error::Unclassifiable)
            }
        }
        _ => Err(Error::Unclassifiable),
    }
}

fn line_of(entries: &[PureEntry], labels: [usize; 4]) -> [PureEntry; 4] {
    labels.map(|k| entries[k].clone())
}

/// Sufficient condition for inflexibility: some column is type III, and
/// both rows of the upper pair or both rows of the lower pair are type III.
pub fn inflexible_structural(s: &Assemblage) -> Result<bool> {
    let entries = pure_entries(s)?;
    let is_type3 = |labels| matches!(classify_line(&line_of(&entries, labels)), Ok(LineType::TypeIII));
    let column = (0..4).any(|c| is_type3(column_labels(c)));
    let rows = (is_type3(row_labels(0)) && is_type3(row_labels(1))) || (is_type3(row_labels(2)) && is_type3(row_labels(3)));
    Ok(column && rows)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Inflexibility {
    Unique,
    /// Basis of weight directions `δq` (16 entries, zero off the support)
    /// along which `q = p + t·δq` stays a similar no-signaling assemblage
    /// for small `t`.
    Flexible(Vec<Vec<f64>>),
}

/// Appends the real and imaginary parts of the matrix equation
/// `Σ_k coeff_k q_k Ψ_k = 0` as rows over the unknowns `cols`.
fn push_matrix_equation(
    rows: &mut Vec<Vec<f64>>,
    terms: &[(usize, f64)],
    projectors: &[CMat],
    cols: &[usize],
    d: usize,
) {
    for i in 0..d {
        for j in i..d {
            let mut re = vec![0.0; cols.len()];
            let mut im = vec![0.0; cols.len()];
            for &(k, sign) in terms {
                if let Some(pos) = cols.iter().position(|&c| c == k) {
                    re[pos] += sign * projectors[k][(i, j)].re;
                    im[pos] += sign * projectors[k][(i, j)].im;
                }
            }
            rows.push(re);
            if i != j {
                rows.push(im);
            }
        }
    }
}

/// Orthonormal kernel basis of a dense real system.
fn real_kernel(rows: &[Vec<f64>], ncols: usize) -> Vec<Vec<f64>> {
    if ncols == 0 {
        return Vec::new();
    }
    let nrows = rows.len().max(ncols);
    let a = DMatrix::<f64>::from_fn(nrows, ncols, |r, c| rows.get(r).map_or(0.0, |row| row[c]));
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return (0..ncols)
            .map(|c| (0..ncols).map(|j| if j == c { 1.0 } else { 0.0 }).collect())
            .collect();
    }
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= KERNEL_TOL * smax)
        .map(|(k, _)| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Decides whether the weights are forced: with the pure states fixed, the
/// no-signaling and normalization conditions are linear in the weights, so
/// uniqueness is triviality of the homogeneous kernel on the support.
pub fn inflexible_oracle(s: &Assemblage) -> Result<Inflexibility> {
    let entries = pure_entries(s)?;
    let d = s.dim_c();
    let projectors: Vec<CMat> = entries.iter().map(|e| e.projector(d)).collect();
    let support: Vec<usize> = (0..16).filter(|&k| !entries[k].is_zero()).collect();

    let mut rows = Vec::new();
    for b in 0..2 {
        for y in 0..2 {
            let terms: Vec<(usize, f64)> = (0..2)
                .flat_map(|a| [(label(a, b, 0, y), 1.0), (label(a, b, 1, y), -1.0)])
                .collect();
            push_matrix_equation(&mut rows, &terms, &projectors, &support, d);
        }
    }
    for a in 0..2 {
        for x in 0..2 {
            let terms: Vec<(usize, f64)> = (0..2)
                .flat_map(|b| [(label(a, b, x, 0), 1.0), (label(a, b, x, 1), -1.0)])
                .collect();
            push_matrix_equation(&mut rows, &terms, &projectors, &support, d);
        }
    }
    for x in 0..2 {
        for y in 0..2 {
            rows.push(
                support
                    .iter()
                    .map(|&k| {
                        let (_, _, kx, ky) = super::unlabel(k);
                        if kx == x && ky == y {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            );
        }
    }

    let kernel = real_kernel(&rows, support.len());
    if kernel.is_empty() {
        return Ok(Inflexibility::Unique);
    }
    Ok(Inflexibility::Flexible(
        kernel
            .into_iter()
            .map(|v| {
                let mut full = vec![0.0; 16];
                for (&k, x) in support.iter().zip(v) {
                    full[k] = x;
                }
                full
            })
            .collect(),
    ))
}

/// Kernel of the single-line system `q1 Ψ1 + q2 Ψ2 = q3 Ψ3 + q4 Ψ4` over the
/// nonzero entries; vectors are indexed by line position.
pub fn line_kernel(line: &[PureEntry; 4], d: usize) -> Vec<Vec<f64>> {
    let projectors: Vec<CMat> = line.iter().map(|e| e.projector(d)).collect();
    let support: Vec<usize> = (0..4).filter(|&k| !line[k].is_zero()).collect();
    let mut rows = Vec::new();
    push_matrix_equation(&mut rows, &[(0, 1.0), (1, 1.0), (2, -1.0), (3, -1.0)], &projectors, &support, d);
    real_kernel(&rows, support.len())
        .into_iter()
        .map(|v| {
            let mut full = vec![0.0; 4];
            for (&k, x) in support.iter().zip(v) {
                full[k] = x;
            }
            full
        })
        .collect()
}

/// The assemblage with the same pure states and weights `q`.
pub fn similar_assemblage(s: &Assemblage, q: &[f64]) -> Result<Assemblage> {
    if q.len() != 16 {
        return Err(Error::DimensionMismatch(format!("expected 16 weights, found {}", q.len())));
    }
    let entries = pure_entries(s)?;
    let d = s.dim_c();
    Assemblage::new(d, entries.iter().zip(q).map(|(e, &w)| e.projector(d) * real(w)).collect())
}
