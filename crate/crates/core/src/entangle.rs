//! Tripartite pure states and the state-side constructions: genuine
//! entanglement, conditioning bases, inflexible assemblages from
//! measurements, Jordan forms of projection pairs, and self-testing checks.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::assemblage::{
    build_functional, evaluate_functional, inflexible_oracle, inflexible_structural, quantum_realize, Assemblage,
    Inflexibility, Pvms, SteeringFunctional,
};
use crate::error::{Error, Result};
use crate::linalg::{self, c, real, CMat, CVec};

const NORM_TOL: f64 = 1e-12;
/// Eigenvalues of reduced states above this count toward the rank.
const RANK_TOL: f64 = 1e-9;
/// Second Schmidt coefficient above this counts as entangled.
const SCHMIDT_TOL: f64 = 1e-8;
const PROJECTION_TOL: f64 = 1e-10;

pub const BASIS_BUDGET: usize = 64;
pub const BUILD_BUDGET: usize = 64;
pub const SELF_TEST_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteState {
    dims: [usize; 3],
    amplitudes: CVec,
}

impl TripartiteState {
    pub fn new(dims: [usize; 3], amplitudes: CVec) -> Result<Self> {
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::ZeroParameter(["d_A", "d_B", "d_C"][k]));
        }
        let n = dims.iter().product::<usize>();
        if amplitudes.len() != n {
            return Err(Error::DimensionMismatch(format!("expected {n} amplitudes, found {}", amplitudes.len())));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(TripartiteState { dims, amplitudes })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(dims: [usize; 3], amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(dims, amplitudes / real(norm))
    }

    pub fn ghz() -> Self {
        let mut v = CVec::zeros(8);
        v[0] = real(FRAC_1_SQRT_2);
        v[7] = real(FRAC_1_SQRT_2);
        TripartiteState { dims: [2, 2, 2], amplitudes: v }
    }

    pub fn w() -> Self {
        let mut v = CVec::zeros(8);
        let a = 1.0 / 3f64.sqrt();
        for i in [1, 2, 4] {
            v[i] = real(a);
        }
        TripartiteState { dims: [2, 2, 2], amplitudes: v }
    }

    /// `|a⟩ ⊗ |bc⟩`.
    pub fn product_a(a: &CVec, bc: &CVec, dims: [usize; 3]) -> Result<Self> {
        Self::normalized(dims, a.kronecker(bc))
    }

    /// Complex Gaussian amplitudes, normalized.
    pub fn random(dims: [usize; 3], rng: &mut impl Rng) -> Self {
        let n = dims.iter().product();
        let v = CVec::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        Self::normalized(dims, v).expect("nonzero with probability one")
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Reduced density matrix of party 0, 1, or 2.
    pub fn reduced(&self, party: usize) -> CMat {
        let [da, db, dc] = self.dims;
        let d = self.dims[party];
        let mut rho = CMat::zeros(d, d);
        let psi = &self.amplitudes;
        let index = |a: usize, b: usize, cc: usize| (a * db + b) * dc + cc;
        for a in 0..da {
            for b in 0..db {
                for cc in 0..dc {
                    let amp = psi[index(a, b, cc)];
                    for k in 0..d {
                        let (a2, b2, c2) = match party {
                            0 => (k, b, cc),
                            1 => (a, k, cc),
                            _ => (a, b, k),
                        };
                        let own = [a, b, cc][party];
                        rho[(own, k)] += amp * psi[index(a2, b2, c2)].conj();
                    }
                }
            }
        }
        rho
    }

    /// `(U_A ⊗ U_B ⊗ I) |ψ⟩`.
    pub fn apply_local(&self, ua: &CMat, ub: &CMat) -> Result<Self> {
        let [_, _, dc] = self.dims;
        let op = ua.kronecker(ub).kronecker(&CMat::identity(dc, dc));
        if op.ncols() != self.amplitudes.len() {
            return Err(Error::DimensionMismatch("local operator dimensions".into()));
        }
        let dims = [ua.nrows(), ub.nrows(), dc];
        Self::normalized(dims, op * &self.amplitudes)
    }
}

/// Every single-party reduction has rank at least two. For a pure state
/// this is entanglement across each of the three bipartitions.
pub fn genuine_entangled(s: &TripartiteState) -> bool {
    (0..3).all(|p| linalg::numeric_rank(&s.reduced(p), RANK_TOL) >= 2)
}

/// Haar-distributed unitary from the QR decomposition of a complex Gaussian
/// matrix.
pub fn random_unitary(d: usize, rng: &mut impl Rng) -> CMat {
    let g = CMat::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let phase = r[(j, j)] / real(r[(j, j)].norm());
        for v in q.column_mut(j).iter_mut() {
            *v *= phase;
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditioningBasis {
    pub phi: [CVec; 2],
    /// `⟨φ_i|ψ⟩` on the BC system.
    pub conditioned: [CVec; 2],
    pub attempts: usize,
    pub complex_fallback: bool,
}

fn conditioned(s: &TripartiteState, phi: &CVec) -> CVec {
    let [da, db, dc] = s.dims;
    let rest = db * dc;
    CVec::from_fn(rest, |j, _| (0..da).map(|a| phi[a].conj() * s.amplitudes[a * rest + j]).sum())
}

fn entangled_vector(v: &CVec, d1: usize, d2: usize) -> bool {
    let norm = v.norm();
    if norm <= SCHMIDT_TOL {
        return false;
    }
    let sc = linalg::schmidt_coefficients(&(v / real(norm)), d1, d2);
    sc.len() >= 2 && sc[1] > SCHMIDT_TOL
}

/// Checks that both conditioned vectors are entangled and independent.
pub fn verify_basis(s: &TripartiteState, phi: &[CVec; 2]) -> bool {
    let [_, db, dc] = s.dims;
    let v = [conditioned(s, &phi[0]), conditioned(s, &phi[1])];
    if !v.iter().all(|x| entangled_vector(x, db, dc)) {
        return false;
    }
    let m = CMat::from_columns(&[&v[0] / real(v[0].norm()), &v[1] / real(v[1].norm())]);
    m.singular_values().min() > SCHMIDT_TOL
}

fn basis_from(x: f64, y: f64, phase: f64) -> [CVec; 2] {
    let e = unit(phase);
    [
        CVec::from_vec(vec![real(x), e * real(y)]),
        CVec::from_vec(vec![real(y), -e * real(x)]),
    ]
}

fn unit(phase: f64) -> linalg::C64 {
    c(phase.cos(), phase.sin())
}

/// Orthonormal basis `{φ_1, φ_2}` of the first qubit such that both
/// conditioned vectors `⟨φ_i|ψ⟩` are entangled and linearly independent.
pub fn find_basis(s: &TripartiteState, seed: u64) -> Result<ConditioningBasis> {
    let da = s.dims[0];
    if da != 2 {
        return Err(Error::DimensionMismatch(format!("first party has dimension {da}, expected 2")));
    }
    if linalg::numeric_rank(&s.reduced(0), RANK_TOL) < 2 {
        return Err(Error::HypothesisFailed("state is a product across A|BC".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let finish = |phi: [CVec; 2], attempts, complex_fallback| ConditioningBasis {
        conditioned: [conditioned(s, &phi[0]), conditioned(s, &phi[1])],
        phi,
        attempts,
        complex_fallback,
    };
    let mut attempts = 0;
    for k in 0..=BASIS_BUDGET {
        let theta = if k == 0 { FRAC_PI_4 } else { rng.random_range(0.0..2.0 * PI) };
        attempts += 1;
        let phi = basis_from(theta.cos(), theta.sin(), 0.0);
        if verify_basis(s, &phi) {
            return Ok(finish(phi, attempts, false));
        }
    }
    log::info!("no real conditioning basis within {BASIS_BUDGET} samples; trying complex phases");
    for _ in 0..BASIS_BUDGET {
        attempts += 1;
        let theta = rng.random_range(0.0..2.0 * PI);
        let phase = rng.random_range(0.0..2.0 * PI);
        let phi = basis_from(theta.cos(), theta.sin(), phase);
        if verify_basis(s, &phi) {
            return Ok(finish(phi, attempts, true));
        }
    }
    Err(Error::HypothesisFailed(format!(
        "no entangled conditioning direction found in {attempts} samples"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflexibleConstruction {
    pub pvms_a: Pvms,
    pub pvms_b: Pvms,
    pub assemblage: Assemblage,
    pub attempts: usize,
}

fn pvm_from_vector(v: &CVec) -> [CMat; 2] {
    let p = linalg::projector(v);
    let d = v.len();
    [p.clone(), CMat::identity(d, d) - p]
}

/// Measurements on a genuinely entangled `2 ⊗ 2 ⊗ d` state whose assemblage
/// has a type-III column and type-III upper rows, and is therefore
/// inflexible.
pub fn build_inflexible_assemblage(s: &TripartiteState, seed: u64) -> Result<InflexibleConstruction> {
    let [da, db, _] = s.dims;
    if da != 2 || db != 2 {
        return Err(Error::DimensionMismatch(format!("expected a 2x2xd state, found {da}x{db}")));
    }
    if !genuine_entangled(s) {
        return Err(Error::NotGenuine);
    }
    let basis = find_basis(s, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_1e55);
    let [phi0, phi1] = &basis.phi;
    let a0 = [linalg::projector(phi0), linalg::projector(phi1)];
    for attempt in 1..=BUILD_BUDGET {
        let phase = rng.random_range(0.0..2.0 * PI);
        let tilted = phi0 * real(FRAC_PI_4.cos()) + phi1 * (unit(phase) * FRAC_PI_4.sin());
        let pvms_a: Pvms = [a0.clone(), pvm_from_vector(&tilted)];
        let u0 = random_unitary(2, &mut rng);
        let u1 = random_unitary(2, &mut rng);
        let pvms_b: Pvms = [
            pvm_from_vector(&u0.column(0).into_owned()),
            pvm_from_vector(&u1.column(0).into_owned()),
        ];
        let assemblage = quantum_realize(s, &pvms_a, &pvms_b)?;
        if inflexible_structural(&assemblage)? && inflexible_oracle(&assemblage)? == Inflexibility::Unique {
            return Ok(InflexibleConstruction {
                pvms_a,
                pvms_b,
                assemblage,
                attempts: attempt,
            });
        }
    }
    Err(Error::SearchExhausted(BUILD_BUDGET))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JordanBlock {
    /// One-dimensional block with the eigenvalues of `P` and `Q`.
    One { p: u8, q: u8 },
    /// Two-dimensional block where `P = diag(1, 0)` and `Q` projects onto
    /// `(cos θ, sin θ)`.
    Two { theta: f64 },
}

impl JordanBlock {
    pub fn dim(&self) -> usize {
        match self {
            JordanBlock::One { .. } => 1,
            JordanBlock::Two { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanDecomposition {
    /// Unitary whose consecutive columns span the blocks.
    pub basis_change: CMat,
    pub blocks: Vec<JordanBlock>,
}

impl JordanDecomposition {
    /// Rebuilds `(P, Q)` from the blocks.
    pub fn reconstruct(&self) -> (CMat, CMat) {
        let n = self.basis_change.nrows();
        let mut p = CMat::zeros(n, n);
        let mut q = CMat::zeros(n, n);
        let mut col = 0;
        for b in &self.blocks {
            match *b {
                JordanBlock::One { p: pv, q: qv } => {
                    p[(col, col)] = real(pv as f64);
                    q[(col, col)] = real(qv as f64);
                }
                JordanBlock::Two { theta } => {
                    let (cs, sn) = (theta.cos(), theta.sin());
                    p[(col, col)] = real(1.0);
                    q[(col, col)] = real(cs * cs);
                    q[(col, col + 1)] = real(cs * sn);
                    q[(col + 1, col)] = real(cs * sn);
                    q[(col + 1, col + 1)] = real(sn * sn);
                }
            }
            col += b.dim();
        }
        let u = &self.basis_change;
        (u * p * u.adjoint(), u * q * u.adjoint())
    }
}

/// Orthonormal eigenvectors of a Hermitian matrix with eigenvalue above 1/2.
fn range_basis(m: &CMat) -> Vec<CVec> {
    let eig = linalg::hermitian_eigen(m);
    (0..eig.eigenvalues.len())
        .rev()
        .filter(|&j| eig.eigenvalues[j] > 0.5)
        .map(|j| eig.eigenvectors.column(j).into_owned())
        .collect()
}

/// Simultaneous block diagonalization of two projections.
pub fn jordan_decompose(p: &CMat, q: &CMat) -> Result<JordanDecomposition> {
    if !p.is_square() || p.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", p.shape(), q.shape())));
    }
    if !linalg::is_projection(p, PROJECTION_TOL) {
        return Err(Error::NotAProjection("P".into()));
    }
    if !linalg::is_projection(q, PROJECTION_TOL) {
        return Err(Error::NotAProjection("Q".into()));
    }
    let n = p.nrows();
    let id = CMat::identity(n, n);
    let range = range_basis(p);
    let mut columns: Vec<CVec> = Vec::with_capacity(n);
    let mut blocks = Vec::new();
    let mut ones = Vec::new();
    let mut partners: Vec<CVec> = Vec::new();

    if !range.is_empty() {
        let v = CMat::from_columns(&range);
        let compressed = v.adjoint() * q * &v;
        let eig = linalg::hermitian_eigen(&compressed);
        for j in 0..eig.eigenvalues.len() {
            let cval = eig.eigenvalues[j].clamp(0.0, 1.0);
            let u = &v * eig.eigenvectors.column(j);
            if cval > 1.0 - 1e-9 {
                ones.push((u, JordanBlock::One { p: 1, q: 1 }));
            } else if cval < 1e-9 {
                ones.push((u, JordanBlock::One { p: 1, q: 0 }));
            } else {
                let w = (&id - p) * q * &u;
                let w = &w / real(w.norm());
                columns.push(u);
                columns.push(w.clone());
                partners.push(w);
                blocks.push(JordanBlock::Two { theta: cval.sqrt().acos() });
            }
        }
    }
    // Kernel of P minus the partner vectors of the two-dimensional blocks.
    let mut rest = &id - p;
    for w in &partners {
        rest -= linalg::projector(w);
    }
    let rest_basis = range_basis(&rest);
    if !rest_basis.is_empty() {
        let v = CMat::from_columns(&rest_basis);
        let eig = linalg::hermitian_eigen(&(v.adjoint() * q * &v));
        for j in 0..eig.eigenvalues.len() {
            let qv = u8::from(eig.eigenvalues[j] > 0.5);
            ones.push((&v * eig.eigenvectors.column(j), JordanBlock::One { p: 0, q: qv }));
        }
    }
    for (u, b) in ones {
        columns.push(u);
        blocks.push(b);
    }
    if columns.len() != n {
        return Err(Error::Diverged(format!("Jordan blocks span {} of {n} dimensions", columns.len())));
    }
    Ok(JordanDecomposition {
        basis_change: CMat::from_columns(&columns),
        blocks,
    })
}

/// A state together with the measurements of both untrusted parties.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub state: TripartiteState,
    pub pvms_a: Pvms,
    pub pvms_b: Pvms,
}

impl Realization {
    pub fn ghz() -> Self {
        let p = crate::assemblage::ghz_pvms();
        Realization {
            state: TripartiteState::ghz(),
            pvms_a: p.clone(),
            pvms_b: p,
        }
    }

    pub fn assemblage(&self) -> Result<Assemblage> {
        quantum_realize(&self.state, &self.pvms_a, &self.pvms_b)
    }

    /// Applies local unitaries or isometries `U_A`, `U_B`. Effects become
    /// `U P U†`; for a proper isometry the orthogonal complement is added to
    /// outcome 0 so the measurements stay complete.
    pub fn transform(&self, ua: &CMat, ub: &CMat) -> Result<Self> {
        let lift = |pvms: &Pvms, u: &CMat| -> Pvms {
            let d = u.nrows();
            let comp = CMat::identity(d, d) - u * u.adjoint();
            std::array::from_fn(|x| {
                std::array::from_fn(|a| {
                    let m = u * &pvms[x][a] * u.adjoint();
                    if a == 0 {
                        m + &comp
                    } else {
                        m
                    }
                })
            })
        };
        Ok(Realization {
            state: self.state.apply_local(ua, ub)?,
            pvms_a: lift(&self.pvms_a, ua),
            pvms_b: lift(&self.pvms_b, ub),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfTestReport {
    pub f_value: f64,
    pub equivalent: bool,
    /// Isometries `V_A`, `V_B` into `junk ⊗ C²`, when equivalent.
    pub local_maps: Option<(CMat, CMat)>,
    /// `‖(I ⊗ ⟨ψ_ref|) (V_A ⊗ V_B ⊗ I) |ψ⟩‖²`.
    pub fidelity: Option<f64>,
    /// Largest `‖V M − (I ⊗ M_ref) V‖` over all effects.
    pub operator_error: Option<f64>,
}

/// Local map sending every Jordan block whose angle matches the reference
/// block onto `|block index⟩ ⊗ C²`, aligned with the reference basis.
fn party_map(pvms: &Pvms, reference: &Pvms, tol: f64) -> Result<Option<CMat>> {
    let ref_j = jordan_decompose(&reference[0][0], &reference[1][0])?;
    let (ref_theta, ref_cols) = match ref_j.blocks.as_slice() {
        [JordanBlock::Two { theta }] => (*theta, ref_j.basis_change.clone()),
        _ => return Err(Error::HypothesisFailed("reference measurements must be non-commuting qubit PVMs".into())),
    };
    let cand = jordan_decompose(&pvms[0][0], &pvms[1][0])?;
    let d = pvms[0][0].nrows();
    let mut matched = Vec::new();
    let mut col = 0;
    for b in &cand.blocks {
        if let JordanBlock::Two { theta } = *b {
            if (theta - ref_theta).abs() <= tol {
                matched.push(col);
            }
        }
        col += b.dim();
    }
    if matched.is_empty() {
        return Ok(None);
    }
    let junk = matched.len();
    let mut v = CMat::zeros(junk * 2, d);
    for (j, &col) in matched.iter().enumerate() {
        // V ⊇ |j⟩ ⊗ (u_ref ⟨u| + w_ref ⟨w|).
        for k in 0..2 {
            let target = ref_cols.column(k);
            let source = cand.basis_change.column(col + k);
            for r in 0..2 {
                for s in 0..d {
                    v[(j * 2 + r, s)] += target[r] * source[s].conj();
                }
            }
        }
    }
    Ok(Some(v))
}

fn operator_error(v: &CMat, pvms: &Pvms, reference: &Pvms) -> f64 {
    let junk = v.nrows() / 2;
    let mut worst: f64 = 0.0;
    for x in 0..2 {
        for a in 0..2 {
            let lifted = CMat::identity(junk, junk).kronecker(&reference[x][a]);
            worst = worst.max((v * &pvms[x][a] - lifted * v).norm());
        }
    }
    worst
}

/// Evaluates `F` on the candidate realization and, when the value is
/// maximal, tries to map it onto the reference realization with local
/// isometries built from Jordan blocks.
pub fn self_test_check(
    f: &SteeringFunctional,
    reference: &Realization,
    candidate: &Realization,
    eps: f64,
) -> Result<SelfTestReport> {
    let ref_dims = reference.state.dims();
    let dims = candidate.state.dims();
    if ref_dims[0] != 2 || ref_dims[1] != 2 {
        return Err(Error::DimensionMismatch("reference parties must be qubits".into()));
    }
    if dims[2] != ref_dims[2] || f.dim_c != dims[2] {
        return Err(Error::DimensionMismatch(format!(
            "trusted dimension {} differs from reference {}",
            dims[2], ref_dims[2]
        )));
    }
    let f_value = evaluate_functional(f, &candidate.assemblage()?)?;
    let negative = SelfTestReport {
        f_value,
        equivalent: false,
        local_maps: None,
        fidelity: None,
        operator_error: None,
    };
    if f_value < 4.0 - eps {
        return Ok(negative);
    }
    let tol = SELF_TEST_EPS;
    let (Some(va), Some(vb)) = (
        party_map(&candidate.pvms_a, &reference.pvms_a, tol)?,
        party_map(&candidate.pvms_b, &reference.pvms_b, tol)?,
    ) else {
        return Ok(negative);
    };
    let (ja, jb, dc) = (va.nrows() / 2, vb.nrows() / 2, dims[2]);
    let mapped = va.kronecker(&vb).kronecker(&CMat::identity(dc, dc)) * candidate.state.amplitudes();
    // Indices of `mapped`: (junk_a, qubit_a, junk_b, qubit_b, c).
    let psi_ref = reference.state.amplitudes();
    let mut junk = CVec::zeros(ja * jb);
    for j1 in 0..ja {
        for j2 in 0..jb {
            let mut acc = real(0.0);
            for qa in 0..2 {
                for qb in 0..2 {
                    for cc in 0..dc {
                        let idx = (((j1 * 2 + qa) * jb + j2) * 2 + qb) * dc + cc;
                        acc += psi_ref[(qa * 2 + qb) * dc + cc].conj() * mapped[idx];
                    }
                }
            }
            junk[j1 * jb + j2] = acc;
        }
    }
    let fidelity = junk.norm_squared();
    let op_err = operator_error(&va, &candidate.pvms_a, &reference.pvms_a)
        .max(operator_error(&vb, &candidate.pvms_b, &reference.pvms_b));
    let equivalent = fidelity >= 1.0 - tol && op_err <= tol;
    Ok(SelfTestReport {
        f_value,
        equivalent,
        local_maps: equivalent.then_some((va, vb)),
        fidelity: Some(fidelity),
        operator_error: Some(op_err),
    })
}

/// Functional of the reference GHZ realization.
pub fn ghz_functional() -> SteeringFunctional {
    build_functional(&crate::assemblage::ghz_assemblage()).expect("reference assemblage is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket(v: &[f64]) -> CVec {
        CVec::from_iterator(v.len(), v.iter().map(|&x| real(x)))
    }

    fn bell_times_zero() -> TripartiteState {
        let bell = ket(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        TripartiteState::product_a(&ket(&[1.0, 0.0]), &bell, [2, 2, 2]).unwrap()
    }

    #[test]
    fn genuine_examples() {
        assert!(genuine_entangled(&TripartiteState::ghz()));
        assert!(genuine_entangled(&TripartiteState::w()));
        assert!(!genuine_entangled(&bell_times_zero()));
    }

    #[test]
    fn ghz_basis_is_plus_minus() {
        let b = find_basis(&TripartiteState::ghz(), 1).unwrap();
        assert_eq!(b.attempts, 1);
        let s = FRAC_1_SQRT_2;
        assert!((&b.phi[0] - ket(&[s, s])).norm() < 1e-12);
        assert!((&b.phi[1] - ket(&[s, -s])).norm() < 1e-12);
        for v in &b.conditioned {
            let sc = linalg::schmidt_coefficients(v, 2, 2);
            assert!((sc[0] - 0.5).abs() < 1e-12 && (sc[1] - 0.5).abs() < 1e-12);
        }
        assert!(verify_basis(&TripartiteState::ghz(), &b.phi));
    }

    #[test]
    fn basis_hypothesis_failure() {
        assert!(matches!(find_basis(&bell_times_zero(), 0), Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn w_state_basis() {
        let w = TripartiteState::w();
        let b = find_basis(&w, 3).unwrap();
        assert!(verify_basis(&w, &b.phi));
    }

    #[test]
    fn ghz_construction_is_inflexible() {
        let built = build_inflexible_assemblage(&TripartiteState::ghz(), 11).unwrap();
        assert!(inflexible_structural(&built.assemblage).unwrap());
        let f = build_functional(&built.assemblage).unwrap();
        assert!((evaluate_functional(&f, &built.assemblage).unwrap() - 4.0).abs() < 1e-9);
        assert!(f.lhs_bound < 4.0 - 1e-6);
        assert!(matches!(
            build_inflexible_assemblage(&bell_times_zero(), 0),
            Err(Error::NotGenuine)
        ));
    }

    #[test]
    fn jordan_examples() {
        let zero = linalg::projector(&ket(&[1.0, 0.0]));
        let j = jordan_decompose(&zero, &zero).unwrap();
        assert_eq!(j.blocks, vec![JordanBlock::One { p: 1, q: 1 }, JordanBlock::One { p: 0, q: 0 }]);
        let s = FRAC_1_SQRT_2;
        let plus = linalg::projector(&ket(&[s, s]));
        let j = jordan_decompose(&zero, &plus).unwrap();
        let [JordanBlock::Two { theta }] = j.blocks.as_slice() else {
            panic!("expected one 2D block, got {:?}", j.blocks);
        };
        assert!((theta - FRAC_PI_4).abs() < 1e-12);
        let (p, q) = j.reconstruct();
        assert!(linalg::distance(&p, &zero) < 1e-12 && linalg::distance(&q, &plus) < 1e-12);
        assert!(matches!(jordan_decompose(&(zero.clone() * real(2.0)), &plus), Err(Error::NotAProjection(_))));
    }

    #[test]
    fn random_jordan_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let u = random_unitary(8, &mut rng);
            let w = random_unitary(8, &mut rng);
            let proj = |m: &CMat| {
                let cols: Vec<CVec> = (0..3).map(|j| m.column(j).into_owned()).collect();
                let b = CMat::from_columns(&cols);
                &b * b.adjoint()
            };
            let (p, q) = (proj(&u), proj(&w));
            let j = jordan_decompose(&p, &q).unwrap();
            let (pr, qr) = j.reconstruct();
            assert!(linalg::distance(&pr, &p) < 1e-10);
            assert!(linalg::distance(&qr, &q) < 1e-10);
            let bc = &j.basis_change;
            assert!(linalg::distance(&(bc.adjoint() * bc), &CMat::identity(8, 8)) < 1e-12);
        }
    }

    #[test]
    fn ghz_self_test() {
        let f = ghz_functional();
        let reference = Realization::ghz();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cand = reference
            .transform(&random_unitary(2, &mut rng), &random_unitary(2, &mut rng))
            .unwrap();
        let report = self_test_check(&f, &reference, &cand, SELF_TEST_EPS).unwrap();
        assert!((report.f_value - 4.0).abs() < 1e-10);
        assert!(report.equivalent, "{report:?}");

        let product = Realization {
            state: TripartiteState::product_a(
                &ket(&[1.0, 0.0]),
                &ket(&[1.0, 0.0, 0.0, 0.0]),
                [2, 2, 2],
            )
            .unwrap(),
            ..reference.clone()
        };
        let report = self_test_check(&f, &reference, &product, SELF_TEST_EPS).unwrap();
        assert!(report.f_value < 4.0 - 1e-3);
        assert!(!report.equivalent);
    }
}
