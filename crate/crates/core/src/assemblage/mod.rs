//! Two-setting, two-outcome steering assemblages `σ_{ab|xy}` on a trusted
//! system of dimension `d_C`.
//!
//! The sixteen entries are laid out as a 4×4 grid with rows `(a|x)` and
//! columns `(b|y)`, both ordered `(0|0), (1|0), (0|1), (1|1)`.

mod functional;
mod lhs;
mod lines;

pub use functional::{
    build_functional, evaluate_functional, evaluate_functional_exact, lhs_bound, LhsBound, SteeringFunctional, Surd,
};
pub use lhs::{lhs_membership, LhsDecomposition, LhsOptions, LhsResult};
pub use lines::{
    classify_line, column_labels, inflexible_oracle, inflexible_structural, line_kernel, pure_entries, row_labels,
    similar_assemblage, Inflexibility, LineType, PureEntry,
};

use crate::entangle::TripartiteState;
use crate::error::{Error, Result};
use crate::exact::{int, ratio};
use crate::linalg::{self, qreal, CMat, QMatrix};

/// Tolerance for [`validate_assemblage`].
pub const VALIDATION_TOL: f64 = 1e-9;

/// Index of `σ_{ab|xy}` in the entry list.
pub fn label(a: usize, b: usize, x: usize, y: usize) -> usize {
    ((a * 2 + b) * 2 + x) * 2 + y
}

/// Inverse of [`label`]: `(a, b, x, y)`.
pub fn unlabel(k: usize) -> (usize, usize, usize, usize) {
    ((k >> 3) & 1, (k >> 2) & 1, (k >> 1) & 1, k & 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assemblage {
    dim_c: usize,
    entries: Vec<CMat>,
    exact: Option<Vec<QMatrix>>,
}

impl Assemblage {
    pub fn new(dim_c: usize, entries: Vec<CMat>) -> Result<Self> {
        if dim_c == 0 {
            return Err(Error::ZeroParameter("dim_c"));
        }
        if entries.len() != 16 {
            return Err(Error::DimensionMismatch(format!("expected 16 entries, found {}", entries.len())));
        }
        if let Some(m) = entries.iter().find(|m| m.nrows() != dim_c || m.ncols() != dim_c) {
            return Err(Error::DimensionMismatch(format!(
                "entry is {}x{}, expected {dim_c}x{dim_c}",
                m.nrows(),
                m.ncols()
            )));
        }
        if entries.iter().any(|m| m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())) {
            return Err(Error::schema("entries", "non-finite matrix element"));
        }
        Ok(Assemblage {
            dim_c,
            entries,
            exact: None,
        })
    }

    /// Exact assemblage over the Gaussian rationals; the float view is derived.
    pub fn exact(dim_c: usize, entries: Vec<QMatrix>) -> Result<Self> {
        let floats = entries.iter().map(QMatrix::to_f64).collect();
        let mut asm = Self::new(dim_c, floats)?;
        if entries.iter().any(|m| m.dim() != dim_c) {
            return Err(Error::DimensionMismatch("exact entry dimension".into()));
        }
        asm.exact = Some(entries);
        Ok(asm)
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn entries(&self) -> &[CMat] {
        &self.entries
    }

    pub fn exact_entries(&self) -> Option<&[QMatrix]> {
        self.exact.as_deref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn get(&self, a: usize, b: usize, x: usize, y: usize) -> &CMat {
        &self.entries[label(a, b, x, y)]
    }

    /// Drops the exact representation.
    pub fn to_float(&self) -> Assemblage {
        Assemblage {
            dim_c: self.dim_c,
            entries: self.entries.clone(),
            exact: None,
        }
    }

    /// `L ⊗ ρ` for the deterministic response `a = a_x`, `b = b_y`.
    pub fn deterministic(responses: [usize; 4], rho: &CMat) -> Result<Self> {
        let [a0, a1, b0, b1] = responses;
        let d = rho.nrows();
        let entries = (0..16)
            .map(|k| {
                let (a, b, x, y) = unlabel(k);
                if a == [a0, a1][x] && b == [b0, b1][y] {
                    rho.clone()
                } else {
                    CMat::zeros(d, d)
                }
            })
            .collect();
        Self::new(d, entries)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Hermiticity { label: usize },
    Positivity { label: usize },
    /// `Σ_a σ_{ab|xy}` depends on `x`.
    RowNoSignaling { b: usize, y: usize },
    /// `Σ_b σ_{ab|xy}` depends on `y`.
    ColumnNoSignaling { a: usize, x: usize },
    Normalization { x: usize, y: usize },
}

impl Condition {
    pub fn describe(&self) -> String {
        match *self {
            Condition::Hermiticity { label } => format!("hermiticity of entry {}", label_text(label)),
            Condition::Positivity { label } => format!("positivity of entry {}", label_text(label)),
            Condition::RowNoSignaling { b, y } => format!("row no-signaling for b={b}, y={y}"),
            Condition::ColumnNoSignaling { a, x } => format!("column no-signaling for a={a}, x={x}"),
            Condition::Normalization { x, y } => format!("normalization for x={x}, y={y}"),
        }
    }
}

pub fn label_text(k: usize) -> String {
    let (a, b, x, y) = unlabel(k);
    format!("{a},{b},{x},{y}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblageViolation {
    pub condition: Condition,
    /// Operator-norm residual (or the negative eigenvalue's magnitude).
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssemblageReport {
    pub violations: Vec<AssemblageViolation>,
}

impl AssemblageReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_assemblage(s: &Assemblage) -> AssemblageReport {
    validate_assemblage_with_tol(s, VALIDATION_TOL)
}

pub fn validate_assemblage_with_tol(s: &Assemblage, tol: f64) -> AssemblageReport {
    let mut violations = Vec::new();
    let mut push = |condition, residual: f64| {
        if residual > tol {
            violations.push(AssemblageViolation { condition, residual });
        }
    };
    for (k, m) in s.entries.iter().enumerate() {
        let asym = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        push(Condition::Hermiticity { label: k }, asym);
        push(Condition::Positivity { label: k }, -linalg::hermitian_eigen(m).eigenvalues.min());
    }
    let d = s.dim_c;
    for b in 0..2 {
        for y in 0..2 {
            let side = |x| -> CMat { (0..2).map(|a| s.get(a, b, x, y)).fold(CMat::zeros(d, d), |acc, m| acc + m) };
            push(Condition::RowNoSignaling { b, y }, linalg::hermitian_norm(&(side(0) - side(1))));
        }
    }
    for a in 0..2 {
        for x in 0..2 {
            let side = |y| -> CMat { (0..2).map(|b| s.get(a, b, x, y)).fold(CMat::zeros(d, d), |acc, m| acc + m) };
            push(Condition::ColumnNoSignaling { a, x }, linalg::hermitian_norm(&(side(0) - side(1))));
        }
    }
    for x in 0..2 {
        for y in 0..2 {
            let tr: f64 = (0..4).map(|ab| s.get(ab >> 1, ab & 1, x, y).trace().re).sum();
            push(Condition::Normalization { x, y }, (tr - 1.0).abs());
        }
    }
    AssemblageReport { violations }
}

/// Projective measurements indexed `[x][a]`.
pub type Pvms = [[CMat; 2]; 2];
pub type ExactPvms = [[QMatrix; 2]; 2];

const PVM_TOL: f64 = 1e-10;

pub fn check_pvms(pvms: &Pvms, dim: usize, party: &str) -> Result<()> {
    for (x, setting) in pvms.iter().enumerate() {
        for (a, p) in setting.iter().enumerate() {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "{party} effect ({a}|{x}) is {}x{}, expected {dim}x{dim}",
                    p.nrows(),
                    p.ncols()
                )));
            }
            if !linalg::is_projection(p, PVM_TOL) {
                return Err(Error::NotAProjection(format!("{party} effect ({a}|{x})")));
            }
        }
        let sum = &setting[0] + &setting[1];
        if linalg::distance(&sum, &CMat::identity(dim, dim)) > PVM_TOL {
            return Err(Error::IncompletePvm(format!("{party} setting {x}")));
        }
    }
    Ok(())
}

/// `σ_{ab|xy} = Tr_AB((P_{a|x} ⊗ Q_{b|y} ⊗ I) |ψ⟩⟨ψ|)`.
pub fn quantum_realize(state: &TripartiteState, pvms_a: &Pvms, pvms_b: &Pvms) -> Result<Assemblage> {
    let [da, db, dc] = state.dims();
    check_pvms(pvms_a, da, "A")?;
    check_pvms(pvms_b, db, "B")?;
    let psi = state.amplitudes();
    let entries = (0..16)
        .map(|k| {
            let (a, b, x, y) = unlabel(k);
            let op = linalg::kron(&pvms_a[x][a], &pvms_b[y][b]);
            // φ = (P ⊗ Q ⊗ I) ψ, then σ = Tr_AB |φ⟩⟨φ|.
            let mut sigma = CMat::zeros(dc, dc);
            for r in 0..da * db {
                let mut phi = vec![linalg::real(0.0); dc];
                for s in 0..da * db {
                    let w = op[(r, s)];
                    if w.norm_sqr() == 0.0 {
                        continue;
                    }
                    for (c, slot) in phi.iter_mut().enumerate() {
                        *slot += w * psi[s * dc + c];
                    }
                }
                for i in 0..dc {
                    for j in 0..dc {
                        sigma[(i, j)] += phi[i] * phi[j].conj();
                    }
                }
            }
            sigma
        })
        .collect();
    Assemblage::new(dc, entries)
}

/// Density-matrix entry point: `σ_{ab|xy} = Tr_AB((P ⊗ Q ⊗ I) ρ)`.
pub fn quantum_realize_density(rho: &CMat, dims: [usize; 3], pvms_a: &Pvms, pvms_b: &Pvms) -> Result<Assemblage> {
    let [da, db, dc] = dims;
    let n = da * db * dc;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::DimensionMismatch(format!("density matrix is {}x{}, expected {n}x{n}", rho.nrows(), rho.ncols())));
    }
    check_pvms(pvms_a, da, "A")?;
    check_pvms(pvms_b, db, "B")?;
    let id = CMat::identity(dc, dc);
    let entries = (0..16)
        .map(|k| {
            let (a, b, x, y) = unlabel(k);
            let op = linalg::kron(&linalg::kron(&pvms_a[x][a], &pvms_b[y][b]), &id);
            linalg::trace_out_first(&(op * rho), da * db)
        })
        .collect();
    Assemblage::new(dc, entries)
}

/// Exact variant of [`quantum_realize_density`].
pub fn quantum_realize_exact(rho: &QMatrix, dims: [usize; 3], pvms_a: &ExactPvms, pvms_b: &ExactPvms) -> Result<Assemblage> {
    let [da, db, dc] = dims;
    if rho.dim() != da * db * dc {
        return Err(Error::DimensionMismatch("exact density matrix dimension".into()));
    }
    let to_float = |p: &ExactPvms| -> Pvms { [[p[0][0].to_f64(), p[0][1].to_f64()], [p[1][0].to_f64(), p[1][1].to_f64()]] };
    check_pvms(&to_float(pvms_a), da, "A")?;
    check_pvms(&to_float(pvms_b), db, "B")?;
    let id = QMatrix::identity(dc);
    let entries = (0..16)
        .map(|k| {
            let (a, b, x, y) = unlabel(k);
            let op = pvms_a[x][a].kron(&pvms_b[y][b]).kron(&id);
            op.mul(rho).trace_out_first(da * db)
        })
        .collect();
    Assemblage::exact(dc, entries)
}

/// The qubit PVMs `{|+⟩⟨+|, |−⟩⟨−|}` (setting 0) and `{|0⟩⟨0|, |1⟩⟨1|}`
/// (setting 1), exactly.
pub fn ghz_pvms_exact() -> ExactPvms {
    let h = ratio(1, 2);
    let plus = QMatrix::from_fn(2, |_, _| qreal(h.clone()));
    let minus = QMatrix::from_fn(2, |i, j| qreal(if i == j { h.clone() } else { -h.clone() }));
    let mut zero = QMatrix::zeros(2);
    zero.set(0, 0, qreal(int(1)));
    let mut one = QMatrix::zeros(2);
    one.set(1, 1, qreal(int(1)));
    [[plus, minus], [zero, one]]
}

pub fn ghz_pvms() -> Pvms {
    let e = ghz_pvms_exact();
    [[e[0][0].to_f64(), e[0][1].to_f64()], [e[1][0].to_f64(), e[1][1].to_f64()]]
}

/// `|GHZ⟩⟨GHZ|` on three qubits, exactly.
pub fn ghz_density_exact() -> QMatrix {
    let h = ratio(1, 2);
    QMatrix::from_fn(8, |i, j| {
        if (i == 0 || i == 7) && (j == 0 || j == 7) {
            qreal(h.clone())
        } else {
            qreal(int(0))
        }
    })
}

/// The GHZ assemblage, computed exactly.
pub fn ghz_assemblage() -> Assemblage {
    let p = ghz_pvms_exact();
    quantum_realize_exact(&ghz_density_exact(), [2, 2, 2], &p, &p).expect("reference construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, real};

    fn ket(v: &[f64]) -> linalg::CVec {
        linalg::CVec::from_iterator(v.len(), v.iter().map(|&x| real(x)))
    }

    #[test]
    fn labels_roundtrip() {
        for k in 0..16 {
            let (a, b, x, y) = unlabel(k);
            assert_eq!(label(a, b, x, y), k);
        }
    }

    #[test]
    fn ghz_is_valid_and_matches_float_path() {
        let g = ghz_assemblage();
        assert!(validate_assemblage(&g).is_valid());
        let float = quantum_realize(&TripartiteState::ghz(), &ghz_pvms(), &ghz_pvms()).unwrap();
        for (a, b) in g.entries().iter().zip(float.entries()) {
            assert!(linalg::distance(a, b) < 1e-12);
        }
        let s = 0.5f64.sqrt();
        let plus = linalg::projector(&ket(&[s, s]));
        assert!(linalg::distance(g.get(0, 0, 0, 0), &(plus * real(0.25))) < 1e-15);
        assert!(linalg::distance(g.get(0, 0, 1, 1), &(linalg::projector(&ket(&[1.0, 0.0])) * real(0.5))) < 1e-15);
        assert!(g.get(0, 1, 1, 1).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn doubled_entry_breaks_conditions() {
        let g = ghz_assemblage();
        let mut entries = g.entries().to_vec();
        entries[label(0, 0, 0, 0)] *= real(2.0);
        let report = validate_assemblage(&Assemblage::new(2, entries).unwrap());
        assert!(report.violations.iter().any(|v| matches!(v.condition, Condition::RowNoSignaling { .. })));
        assert!(report.violations.iter().any(|v| matches!(v.condition, Condition::Normalization { .. })));
    }

    #[test]
    fn negative_eigenvalue_reported() {
        let g = ghz_assemblage();
        let mut entries = g.entries().to_vec();
        entries[label(0, 1, 1, 1)] = CMat::from_row_slice(2, 2, &[real(-0.01), c(0.0, 0.0), c(0.0, 0.0), real(0.0)]);
        let report = validate_assemblage(&Assemblage::new(2, entries).unwrap());
        assert!(report
            .violations
            .iter()
            .any(|v| v.condition == Condition::Positivity { label: label(0, 1, 1, 1) }));
    }

    #[test]
    fn product_state_factorizes() {
        let amps: Vec<f64> = (0..8).map(|i| if i == 0b101 { 1.0 } else { 0.0 }).collect();
        let state = TripartiteState::new([2, 2, 2], linalg::CVec::from_iterator(8, amps.iter().map(|&x| real(x)))).unwrap();
        let asm = quantum_realize(&state, &ghz_pvms(), &ghz_pvms()).unwrap();
        let one = linalg::projector(&ket(&[0.0, 1.0]));
        // |a⟩ = |1⟩, |b⟩ = |0⟩: p(a|0) = 1/2, p(a|1) = δ_{a,1}; q(b|0) = 1/2, q(b|1) = δ_{b,0}.
        for k in 0..16 {
            let (a, b, x, y) = unlabel(k);
            let pa = if x == 0 { 0.5 } else if a == 1 { 1.0 } else { 0.0 };
            let qb = if y == 0 { 0.5 } else if b == 0 { 1.0 } else { 0.0 };
            assert!(linalg::distance(&asm.entries()[k], &(&one * real(pa * qb))) < 1e-12);
        }
    }

    #[test]
    fn density_entry_point_is_linear() {
        let ghz = TripartiteState::ghz();
        let w = TripartiteState::w();
        let rho = linalg::projector(ghz.amplitudes()) * real(0.3) + linalg::projector(w.amplitudes()) * real(0.7);
        let mixed = quantum_realize_density(&rho, [2, 2, 2], &ghz_pvms(), &ghz_pvms()).unwrap();
        let a = quantum_realize(&ghz, &ghz_pvms(), &ghz_pvms()).unwrap();
        let b = quantum_realize(&w, &ghz_pvms(), &ghz_pvms()).unwrap();
        for k in 0..16 {
            let expected = &a.entries()[k] * real(0.3) + &b.entries()[k] * real(0.7);
            assert!(linalg::distance(&mixed.entries()[k], &expected) < 1e-12);
        }
    }

    #[test]
    fn invalid_pvms_rejected() {
        let mut p = ghz_pvms();
        p[0][0] *= real(2.0);
        assert!(matches!(
            quantum_realize(&TripartiteState::ghz(), &p, &ghz_pvms()),
            Err(Error::NotAProjection(_))
        ));
        let mut q = ghz_pvms();
        q[1][1] = CMat::zeros(2, 2);
        assert!(matches!(
            quantum_realize(&TripartiteState::ghz(), &ghz_pvms(), &q),
            Err(Error::IncompletePvm(_))
        ));
    }
}
