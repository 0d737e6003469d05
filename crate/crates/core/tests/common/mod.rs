#![allow(dead_code)]

use std::collections::HashMap;

use nscert::exact::Rational;
use nscert::polytope::{enumerate_deterministic, BoxVector};
use nscert::scenario::SequentialScenario;
use num_bigint::BigInt;
use rand::Rng;

/// Event decoded straight from the index arithmetic: `(x_A, x_B, a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    pub xa: Vec<usize>,
    pub xb: Vec<usize>,
    pub oa: Vec<usize>,
    pub ob: Vec<usize>,
}

fn digits(mut code: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = code % radix;
        code /= radix;
    }
    out
}

pub fn decode(s: &SequentialScenario, idx: usize) -> Decoded {
    let (na, nb, m, d) = (s.runs_a, s.runs_b, s.inputs, s.outputs);
    let ob_space = d.pow(nb as u32);
    let oa_space = d.pow(na as u32);
    let ib_space = m.pow(nb as u32);
    let ob = idx % ob_space;
    let rest = idx / ob_space;
    let oa = rest % oa_space;
    let rest = rest / oa_space;
    let ib = rest % ib_space;
    let ia = rest / ib_space;
    Decoded {
        xa: digits(ia, m, na),
        xb: digits(ib, m, nb),
        oa: digits(oa, d, na),
        ob: digits(ob, d, nb),
    }
}

/// Locally exclusive on one side: the first differing outcome run has the
/// same settings up to and including it.
fn exclusive(x1: &[usize], o1: &[usize], x2: &[usize], o2: &[usize]) -> bool {
    for k in 0..o1.len() {
        if x1[k] != x2[k] {
            return false;
        }
        if o1[k] != o2[k] {
            return true;
        }
    }
    false
}

pub fn orthogonal(s: &SequentialScenario, u: usize, v: usize) -> bool {
    let (e, f) = (decode(s, u), decode(s, v));
    exclusive(&e.xa, &e.oa, &f.xa, &f.oa) || exclusive(&e.xb, &e.ob, &f.xb, &f.ob)
}

/// (settings before k, outcomes before k, other settings, other outcomes,
/// settings from k on).
type MarginalKey = (Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>);

/// Time-ordered no-signaling by marginals: for each party and level `k`,
/// summing that party's outcomes past run `k` leaves a quantity that does
/// not depend on its settings past run `k`, for every record of the other
/// party.
pub fn tons_holds(s: &SequentialScenario, p: &[f64], tol: f64) -> bool {
    for party in 0..2 {
        let runs = if party == 0 { s.runs_a } else { s.runs_b };
        for k in 0..runs {
            let mut sums: HashMap<MarginalKey, f64> = HashMap::new();
            for (idx, &v) in p.iter().enumerate() {
                let e = decode(s, idx);
                let (x, o, ox, oo) = if party == 0 { (&e.xa, &e.oa, &e.xb, &e.ob) } else { (&e.xb, &e.ob, &e.xa, &e.oa) };
                let key = (x[..k].to_vec(), o[..k].to_vec(), ox.clone(), oo.clone(), x[k..].to_vec());
                *sums.entry(key).or_default() += v;
            }
            let mut by_prefix: HashMap<_, Vec<f64>> = HashMap::new();
            for ((xp, op, ox, oo, _), v) in sums {
                by_prefix.entry((xp, op, ox, oo)).or_default().push(v);
            }
            for vals in by_prefix.values() {
                let (lo, hi) = vals.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
                if hi - lo > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Nonnegative and normalized in every input context.
pub fn normalized(s: &SequentialScenario, p: &[f64], tol: f64) -> bool {
    let mut ctx: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
    for (idx, &v) in p.iter().enumerate() {
        if v < -tol {
            return false;
        }
        let e = decode(s, idx);
        *ctx.entry((e.xa, e.xb)).or_default() += v;
    }
    ctx.values().all(|v| (v - 1.0).abs() <= tol)
}

pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Convex combination of randomly chosen deterministic boxes with random
/// rational weights.
pub fn random_local_box(s: &SequentialScenario, terms: usize, rng: &mut impl Rng) -> BoxVector {
    let ldbs = enumerate_deterministic(s).unwrap();
    let raw: Vec<i64> = (0..terms).map(|_| rng.random_range(1..=9)).collect();
    let total: i64 = raw.iter().sum();
    let mut acc = vec![q(0, 1); s.n_seq()];
    for w in raw {
        let l = &ldbs[rng.random_range(0..ldbs.len())];
        for (a, v) in acc.iter_mut().zip(l.as_rational().unwrap()) {
            *a += v * q(w, total);
        }
    }
    BoxVector::rational(*s, acc).unwrap()
}

/// The scenario matrix used by the structural tests.
pub fn scenario_matrix() -> Vec<SequentialScenario> {
    let mut out = Vec::new();
    for (na, nb, m, d) in [
        (1, 1, 2, 2),
        (1, 1, 2, 3),
        (1, 1, 3, 2),
        (1, 1, 3, 3),
        (2, 1, 2, 2),
        (1, 2, 2, 2),
        (2, 2, 2, 2),
        (2, 2, 2, 3),
        (3, 1, 2, 2),
        (2, 1, 3, 2),
    ] {
        let s = SequentialScenario::asymmetric(na, nb, m, d).unwrap();
        if s.n_seq() <= 4096 {
            out.push(s);
        }
    }
    out
}
