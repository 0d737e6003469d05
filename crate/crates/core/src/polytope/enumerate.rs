//! Vertex enumeration by the double-description method.
//!
//! The polytope `{P ≥ 0, E·P = 1}` is homogenized to the pointed cone
//! `{(t, P) ≥ 0 : E·P = t}` and parametrized by a basis of that subspace,
//! which leaves a cone given purely by inequalities. Its extreme rays with
//! `t > 0` are the vertices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};

use super::{is_vertex, BoxVector, ConstraintSystem, DEFAULT_ENUMERATION_CAP};

#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedVertex {
    pub vertex: BoxVector,
    /// Some entry is neither 0 nor 1.
    pub nonlocal: bool,
}

pub fn enumerate_vertices(cs: &ConstraintSystem) -> Result<Vec<EnumeratedVertex>> {
    enumerate_vertices_with_cap(cs, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_vertices_with_cap(cs: &ConstraintSystem, cap: usize) -> Result<Vec<EnumeratedVertex>> {
    let n = cs.n_seq();
    if n > cap {
        return Err(Error::DimensionCap {
            what: "n_seq",
            actual: n,
            cap,
        });
    }
    // Column 0 is the homogenizing coordinate t.
    let eq: Vec<Vec<Rational>> = cs
        .equality_rows()
        .map(|r| {
            let mut row = vec![exact::int(-r.rhs)];
            row.extend(r.dense(n));
            row
        })
        .collect();
    let basis = exact::nullspace(&eq, n + 1);
    let k = basis.len();
    // Constraint i reads (B·λ)_i ≥ 0.
    let constraints: Vec<Vec<Rational>> = (0..=n)
        .map(|i| basis.iter().map(|b| b[i].clone()).collect())
        .collect();

    let rays = double_description(&constraints, k);
    let mut vertices = Vec::with_capacity(rays.len());
    for ray in rays {
        let point: Vec<Rational> = (0..=n).map(|i| exact::dot(&constraints[i], &ray)).collect();
        let t = &point[0];
        if !t.is_positive() {
            return Err(Error::Diverged("unbounded direction in a bounded polytope".into()));
        }
        let entries: Vec<Rational> = point[1..].iter().map(|v| v / t).collect();
        let nonlocal = entries.iter().any(|v| !(v.is_zero() || v.is_one()));
        let vertex = BoxVector::rational(cs.scenario, entries)?;
        if !is_vertex(cs, &vertex)?.is_vertex {
            return Err(Error::Diverged("enumerated point failed the vertex test".into()));
        }
        vertices.push(EnumeratedVertex { vertex, nonlocal });
    }
    vertices.sort_by(|a, b| a.vertex.as_rational().cmp(&b.vertex.as_rational()));
    Ok(vertices)
}

#[derive(Clone)]
struct Ray {
    coords: Vec<Rational>,
    /// Bitset of processed constraints that are tight on this ray.
    zeros: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1 << (i % 64);
}

fn intersect(a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn popcount(a: &[u64]) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

fn contains(sup: &[u64], sub: &[u64]) -> bool {
    sup.iter().zip(sub).all(|(x, y)| x & y == *y)
}

/// Scales a rational vector to the primitive integer vector in its direction.
fn primitive(v: Vec<Rational>) -> Vec<Rational> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| (q * Rational::from_integer(lcm.clone())).to_integer()).collect();
    let gcd = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if gcd.is_zero() {
        return v;
    }
    ints.into_iter().map(|x| Rational::from_integer(x / &gcd)).collect()
}

/// Extreme rays of the pointed cone `{λ ∈ Q^k : a_i·λ ≥ 0}`.
fn double_description(constraints: &[Vec<Rational>], k: usize) -> Vec<Vec<Rational>> {
    let words = constraints.len().div_ceil(64);

    // Initial simplicial cone from k independent constraints.
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut echelon: Vec<Vec<Rational>> = Vec::new();
    for (i, a) in constraints.iter().enumerate() {
        let mut trial = echelon.clone();
        trial.push(a.clone());
        if exact::rank(&trial) > echelon.len() {
            echelon = trial;
            chosen.push(i);
            if chosen.len() == k {
                break;
            }
        }
    }
    assert_eq!(chosen.len(), k, "cone is pointed");
    let mut rays: Vec<Ray> = (0..k)
        .map(|j| {
            let mut e = vec![Rational::zero(); k];
            e[j] = Rational::one();
            let coords = primitive(exact::solve(&echelon, &e).expect("independent rows"));
            let mut zeros = vec![0u64; words];
            for (slot, &c) in chosen.iter().enumerate() {
                if slot != j {
                    set_bit(&mut zeros, c);
                }
            }
            Ray { coords, zeros }
        })
        .collect();

    for (i, a) in constraints.iter().enumerate() {
        if chosen.contains(&i) {
            continue;
        }
        let values: Vec<Rational> = rays.iter().map(|r| exact::dot(a, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&r| values[r].is_negative()).collect();
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len());
        for (r, ray) in rays.iter().enumerate() {
            if !values[r].is_negative() {
                let mut ray = ray.clone();
                if values[r].is_zero() {
                    set_bit(&mut ray.zeros, i);
                }
                next.push(ray);
            }
        }
        for &p in &pos {
            for &q in &neg {
                let common = intersect(&rays[p].zeros, &rays[q].zeros);
                if popcount(&common) + 2 < k {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(r, ray)| r == p || r == q || !contains(&ray.zeros, &common));
                if !adjacent {
                    continue;
                }
                let coords: Vec<Rational> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(xq, xp)| &values[p] * xq - &values[q] * xp)
                    .collect();
                let mut zeros = common;
                set_bit(&mut zeros, i);
                next.push(Ray {
                    coords: primitive(coords),
                    zeros,
                });
            }
        }
        rays = next;
    }
    rays.into_iter().map(|r| r.coords).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::{build_constraints, enumerate_deterministic};
    use crate::scenario::SequentialScenario;

    #[test]
    fn chsh_vertices() {
        let s = SequentialScenario::chsh();
        let cs = build_constraints(&s).unwrap();
        let v = enumerate_vertices(&cs).unwrap();
        assert_eq!(v.len(), 24);
        assert_eq!(v.iter().filter(|x| !x.nonlocal).count(), 16);
        assert_eq!(v.iter().filter(|x| x.nonlocal).count(), 8);
        let pr = BoxVector::pr_box();
        assert!(v.iter().any(|x| x.vertex == pr));
        let ldbs = enumerate_deterministic(&s).unwrap();
        for l in &ldbs {
            assert!(v.iter().any(|x| x.vertex == *l));
        }
        for w in v.windows(2) {
            assert!(w[0].vertex.as_rational() < w[1].vertex.as_rational());
        }
    }

    #[test]
    fn single_setting_has_only_deterministic_vertices() {
        let s = SequentialScenario::new(1, 1, 2).unwrap();
        let cs = build_constraints(&s).unwrap();
        let v = enumerate_vertices(&cs).unwrap();
        assert_eq!(v.len(), 4);
        assert!(v.iter().all(|x| !x.nonlocal));
    }

    #[test]
    fn cap() {
        let s = SequentialScenario::new(2, 2, 2).unwrap();
        let cs = build_constraints(&s).unwrap();
        assert!(matches!(enumerate_vertices(&cs), Err(Error::DimensionCap { actual: 256, .. })));
    }
}
