use std::f64::consts::FRAC_1_SQRT_2;

use nscert::assemblage::{
    build_functional, evaluate_functional, evaluate_functional_exact, ghz_assemblage, ghz_pvms, inflexible_oracle,
    inflexible_structural, label, lhs_bound, lhs_membership, quantum_realize, quantum_realize_density,
    similar_assemblage, validate_assemblage, Assemblage, Inflexibility, LhsOptions, LhsResult, Pvms,
};
use nscert::entangle::{random_unitary, TripartiteState};
use nscert::exact::int;
use nscert::linalg::{self, c, real, CMat, CVec};
use nscert::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn ket(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| real(x)))
}

fn proj(v: &[f64]) -> CMat {
    let k = ket(v);
    &k * k.adjoint()
}

/// The GHZ grid as printed: rows (a|x), columns (b|y), common factor 1/4.
fn printed_grid() -> Vec<CMat> {
    let s = FRAC_1_SQRT_2;
    let plus = proj(&[s, s]);
    let minus = proj(&[s, -s]);
    let zero = proj(&[1.0, 0.0]);
    let one = proj(&[0.0, 1.0]);
    let nil = CMat::zeros(2, 2);
    let grid = [
        [plus.clone(), minus.clone(), zero.clone(), one.clone()],
        [minus, plus, zero.clone(), one.clone()],
        [zero.clone(), zero.clone(), &zero * real(2.0), nil.clone()],
        [one.clone(), one.clone(), nil, &one * real(2.0)],
    ];
    let mut entries = vec![CMat::zeros(2, 2); 16];
    for (r, row) in grid.iter().enumerate() {
        for (col, m) in row.iter().enumerate() {
            let (x, a) = (r / 2, r % 2);
            let (y, b) = (col / 2, col % 2);
            entries[label(a, b, x, y)] = m * real(0.25);
        }
    }
    entries
}

#[test]
fn ghz_matches_printed_grid() {
    let expected = printed_grid();
    let float = quantum_realize(&TripartiteState::ghz(), &ghz_pvms(), &ghz_pvms()).unwrap();
    let exact = ghz_assemblage();
    for (k, e) in expected.iter().enumerate() {
        assert!(linalg::distance(&float.entries()[k], e) < 1e-12, "entry {k}");
        assert!(linalg::distance(&exact.entries()[k], e) < 1e-15, "entry {k}");
    }
    let rho = &TripartiteState::ghz().amplitudes().clone() * TripartiteState::ghz().amplitudes().adjoint();
    let dens = quantum_realize_density(&rho, [2, 2, 2], &ghz_pvms(), &ghz_pvms()).unwrap();
    for (d, e) in dens.entries().iter().zip(&expected) {
        assert!(linalg::distance(d, e) < 1e-12);
    }
}

/// Largest eigenvalue of a 2x2 Hermitian matrix in closed form.
fn eig2(m: &CMat) -> f64 {
    let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
    let b = m[(0, 1)].norm();
    (a + d) / 2.0 + (((a - d) / 2.0).powi(2) + b * b).sqrt()
}

#[test]
fn ghz_bound_and_gap() {
    let g = ghz_assemblage();
    let f = build_functional(&g).unwrap();
    assert_eq!(evaluate_functional_exact(&f, &g).unwrap(), Some(int(4)));
    let b = lhs_bound(&f);
    assert!((b.value - (4.0 + 10f64.sqrt()) / 2.0).abs() < 1e-9);
    let s = FRAC_1_SQRT_2;
    let op = proj(&[1.0, 0.0]) * real(3.0) + proj(&[s, s]);
    assert!(linalg::distance(&b.operator, &op) < 1e-12);
    assert!(b.value < 4.0);

    // Brute force over responses with the closed-form eigenvalue.
    let mut best: f64 = 0.0;
    for r in 0..16usize {
        let resp = [(r >> 3) & 1, (r >> 2) & 1, (r >> 1) & 1, r & 1];
        let mut m = CMat::zeros(2, 2);
        for x in 0..2 {
            for y in 0..2 {
                m += &f.rho[label(resp[x], resp[2 + y], x, y)];
            }
        }
        best = best.max(eig2(&m));
    }
    assert!((best - b.value).abs() < 1e-12);
}

#[test]
fn ghz_is_inflexible_and_not_lhs() {
    let g = ghz_assemblage();
    assert!(inflexible_structural(&g).unwrap());
    assert_eq!(inflexible_oracle(&g).unwrap(), Inflexibility::Unique);
    assert!(matches!(
        lhs_membership(&g, &LhsOptions::default()).unwrap(),
        LhsResult::NotLhs { .. }
    ));
}

/// Equal mixture of the all-zero and all-one responses with two states.
fn two_branch_mixture(rho0: &CMat, rho1: &CMat) -> Assemblage {
    let mut entries = vec![CMat::zeros(2, 2); 16];
    for x in 0..2 {
        for y in 0..2 {
            entries[label(0, 0, x, y)] = rho0 * real(0.5);
            entries[label(1, 1, x, y)] = rho1 * real(0.5);
        }
    }
    Assemblage::new(2, entries).unwrap()
}

#[test]
fn flexible_mixture() {
    let s = two_branch_mixture(&proj(&[1.0, 0.0]), &proj(&[0.6, 0.8]));
    assert!(validate_assemblage(&s).is_valid());
    assert!(!inflexible_structural(&s).unwrap());
    let Inflexibility::Flexible(kernel) = inflexible_oracle(&s).unwrap() else {
        panic!("weights can shift between the branches");
    };
    let dir = &kernel[0];
    let base: Vec<f64> = s.entries().iter().map(|m| m.trace().re).collect();
    let q: Vec<f64> = base.iter().zip(dir).map(|(b, d)| b + 0.1 * d / dir.iter().map(|x| x.abs()).fold(0.0, f64::max)).collect();
    let moved = similar_assemblage(&s, &q).unwrap();
    assert!(validate_assemblage(&moved).is_valid());
    assert!(s.entries().iter().zip(moved.entries()).any(|(a, b)| linalg::distance(a, b) > 1e-3));
    let LhsResult::Lhs(dec) = lhs_membership(&s, &LhsOptions::default()).unwrap() else {
        panic!("mixture of deterministic responses is LHS");
    };
    let back = dec.reconstruct(2).unwrap();
    for (a, b) in back.entries().iter().zip(s.entries()) {
        assert!(linalg::distance(a, b) < 1e-8);
    }
}

#[test]
fn invalid_inputs() {
    let mut entries = ghz_assemblage().entries().to_vec();
    entries[0][(0, 0)] += real(0.1);
    let bad = Assemblage::new(2, entries).unwrap();
    assert!(!validate_assemblage(&bad).is_valid());
    assert!(matches!(build_functional(&bad), Err(Error::InvalidAssemblage(_))));
    assert!(matches!(Assemblage::new(2, vec![CMat::zeros(2, 2); 3]), Err(Error::DimensionMismatch(_))));
    let mut pvms = ghz_pvms();
    pvms[0][0] = &pvms[0][0] * real(0.5);
    assert!(matches!(
        quantum_realize(&TripartiteState::ghz(), &pvms, &ghz_pvms()),
        Err(Error::NotAProjection(_))
    ));
}

fn random_qubit_pvms(rng: &mut ChaCha8Rng) -> Pvms {
    std::array::from_fn(|_| {
        let u = random_unitary(2, rng);
        let v = u.column(0).into_owned();
        let p = &v * v.adjoint();
        [p.clone(), CMat::identity(2, 2) - p]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn quantum_assemblages_are_valid_with_functional_value_four(seed in any::<u64>(), d in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = TripartiteState::random([2, 2, d], &mut rng);
        let (pa, pb) = (random_qubit_pvms(&mut rng), random_qubit_pvms(&mut rng));
        let s = quantum_realize(&state, &pa, &pb).unwrap();
        prop_assert!(validate_assemblage(&s).is_valid());
        let total: f64 = s.entries().iter().map(|m| m.trace().re).sum();
        prop_assert!((total - 4.0).abs() < 1e-10);
        let f = build_functional(&s).unwrap();
        // Only rank-one entries contribute their full trace.
        if s.entries().iter().all(|m| linalg::numeric_rank(m, 1e-9) <= 1) {
            prop_assert!((evaluate_functional(&f, &s).unwrap() - 4.0).abs() < 1e-9);
        }
        prop_assert!(f.lhs_bound <= 4.0 + 1e-9);

        // The value is unchanged by local unitaries on the trusted-free parties
        // applied together with the matching measurements.
        let (ua, ub) = (random_unitary(2, &mut rng), random_unitary(2, &mut rng));
        let conj = |p: &Pvms, u: &CMat| -> Pvms {
            std::array::from_fn(|x| std::array::from_fn(|a| u * &p[x][a] * u.adjoint()))
        };
        let moved = quantum_realize(&state.apply_local(&ua, &ub).unwrap(), &conj(&pa, &ua), &conj(&pb, &ub)).unwrap();
        prop_assert!((evaluate_functional(&f, &moved).unwrap() - evaluate_functional(&f, &s).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn lhs_assemblages_respect_the_bound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let reference = ghz_assemblage();
        let f = build_functional(&reference).unwrap();
        let mut entries = vec![CMat::zeros(2, 2); 16];
        let mut left = 1.0;
        for k in 0..3 {
            let w = if k == 2 { left } else { left * rand::Rng::random_range(&mut rng, 0.1..0.9) };
            left -= w;
            let r: [usize; 4] = std::array::from_fn(|_| rand::Rng::random_range(&mut rng, 0..2));
            let v = random_unitary(2, &mut rng).column(0).into_owned();
            let rho = &v * v.adjoint();
            for x in 0..2 {
                for y in 0..2 {
                    entries[label(r[x], r[2 + y], x, y)] += &rho * real(w);
                }
            }
        }
        let s = Assemblage::new(2, entries).unwrap();
        prop_assert!(validate_assemblage(&s).is_valid());
        prop_assert!(evaluate_functional(&f, &s).unwrap() <= f.lhs_bound + 1e-9);
    }

    #[test]
    fn lhs_bound_dominates_sampled_states(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = build_functional(&ghz_assemblage()).unwrap();
        let b = lhs_bound(&f);
        let v = random_unitary(2, &mut rng).column(0).into_owned();
        let value = (v.adjoint() * &b.operator * &v)[(0, 0)].re;
        prop_assert!(value <= b.value + 1e-12);
        let _ = c(0.0, 0.0);
    }
}
