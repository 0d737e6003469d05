use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, int, Rational};
use crate::linalg::{self, real, CMat, QMatrix};

use super::{label, validate_assemblage, Assemblage};

/// Entries with trace at most this are treated as zero.
const ZERO_TRACE: f64 = 1e-12;

/// `F(Σ̃) = Σ Tr(ρ_{ab|xy} σ̃_{ab|xy})` with `ρ` the normalized entries of a
/// reference assemblage.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringFunctional {
    pub dim_c: usize,
    pub rho: Vec<CMat>,
    pub exact: Option<Vec<QMatrix>>,
    pub lhs_bound: f64,
}

/// `a + b·√d` with rational parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Surd {
    pub a: Rational,
    pub b: Rational,
    pub d: Rational,
}

impl Surd {
    pub fn rational(a: Rational) -> Self {
        Surd {
            a,
            b: Rational::zero(),
            d: Rational::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        exact::to_f64(&self.a) + exact::to_f64(&self.b) * exact::to_f64(&self.d).sqrt()
    }

    /// Exact comparison with a rational.
    pub fn cmp_rational(&self, q: &Rational) -> Ordering {
        // Compare b·√d with q − a.
        let rhs = q - &self.a;
        let lhs_sign = if self.b.is_zero() || self.d.is_zero() {
            0
        } else if self.b.is_positive() {
            1
        } else {
            -1
        };
        let rhs_sign = if rhs.is_zero() {
            0
        } else if rhs.is_positive() {
            1
        } else {
            -1
        };
        if lhs_sign != rhs_sign || lhs_sign == 0 {
            return lhs_sign.cmp(&rhs_sign);
        }
        let lhs_sq = &self.b * &self.b * &self.d;
        let rhs_sq = &rhs * &rhs;
        if lhs_sign > 0 {
            lhs_sq.cmp(&rhs_sq)
        } else {
            rhs_sq.cmp(&lhs_sq)
        }
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() || self.d.is_zero() {
            return write!(f, "{}", exact::format_rational(&self.a));
        }
        write!(
            f,
            "{} + {}*sqrt({})",
            exact::format_rational(&self.a),
            exact::format_rational(&self.b),
            exact::format_rational(&self.d)
        )
    }
}

pub fn build_functional(s: &Assemblage) -> Result<SteeringFunctional> {
    let report = validate_assemblage(s);
    if !report.is_valid() {
        return Err(Error::InvalidAssemblage(report.violations.len()));
    }
    let d = s.dim_c();
    let rho = s
        .entries()
        .iter()
        .map(|m| {
            let tr = m.trace().re;
            if tr <= ZERO_TRACE {
                CMat::zeros(d, d)
            } else {
                m / real(tr)
            }
        })
        .collect();
    let exact = s.exact_entries().map(|entries| {
        entries
            .iter()
            .map(|m| {
                let tr = m.trace().re;
                if tr.is_zero() {
                    QMatrix::zeros(d)
                } else {
                    m.scale(&tr.recip())
                }
            })
            .collect()
    });
    let mut f = SteeringFunctional {
        dim_c: d,
        rho,
        exact,
        lhs_bound: 0.0,
    };
    f.lhs_bound = lhs_bound(&f).value;
    Ok(f)
}

pub fn evaluate_functional(f: &SteeringFunctional, s: &Assemblage) -> Result<f64> {
    if f.dim_c != s.dim_c() {
        return Err(Error::DimensionMismatch(format!("functional acts on d_C={}, assemblage has d_C={}", f.dim_c, s.dim_c())));
    }
    Ok(f.rho.iter().zip(s.entries()).map(|(r, m)| (r * m).trace().re).sum())
}

/// Exact value when both the functional and the assemblage are exact.
pub fn evaluate_functional_exact(f: &SteeringFunctional, s: &Assemblage) -> Result<Option<Rational>> {
    if f.dim_c != s.dim_c() {
        return Err(Error::DimensionMismatch(format!("functional acts on d_C={}, assemblage has d_C={}", f.dim_c, s.dim_c())));
    }
    Ok(match (&f.exact, s.exact_entries()) {
        (Some(rho), Some(entries)) => Some(
            rho.iter()
                .zip(entries)
                .fold(Rational::zero(), |acc, (r, m)| acc + r.trace_product(m)),
        ),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhsBound {
    pub value: f64,
    /// Exact eigenvalue, available for exact functionals with `d_C ≤ 2`.
    pub exact: Option<Surd>,
    /// Maximizing deterministic response `[a_0, a_1, b_0, b_1]`.
    pub responses: [usize; 4],
    /// `Σ_{(ab|xy) ∈ I(L)} ρ_{ab|xy}` at the maximizer.
    pub operator: CMat,
}

fn responses(i: usize) -> [usize; 4] {
    [(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1]
}

fn compatible(r: [usize; 4]) -> [usize; 4] {
    let [a0, a1, b0, b1] = r;
    let mut labels = [0; 4];
    for x in 0..2 {
        for y in 0..2 {
            labels[2 * x + y] = label([a0, a1][x], [b0, b1][y], x, y);
        }
    }
    labels
}

fn exact_max_eigenvalue(m: &QMatrix) -> Option<Surd> {
    match m.dim() {
        1 => Some(Surd::rational(m.get(0, 0).re.clone())),
        2 => {
            let (p, s) = (m.get(0, 0).re.clone(), m.get(1, 1).re.clone());
            let z = m.get(0, 1);
            let diff = &p - &s;
            let disc = &diff * &diff + int(4) * (&z.re * &z.re + &z.im * &z.im);
            let half = exact::ratio(1, 2);
            Some(Surd {
                a: (p + s) * &half,
                b: if disc.is_zero() { Rational::zero() } else { half },
                d: disc,
            })
        }
        _ => None,
    }
}

/// `max_L λ_max(Σ_{I(L)} ρ)` over the sixteen deterministic responses. The
/// first maximizer in response order wins ties.
pub fn lhs_bound(f: &SteeringFunctional) -> LhsBound {
    let d = f.dim_c;
    let mut best: Option<LhsBound> = None;
    for i in 0..16 {
        let r = responses(i);
        let labels = compatible(r);
        let operator = labels.iter().fold(CMat::zeros(d, d), |acc, &k| acc + &f.rho[k]);
        let value = linalg::max_eigenvalue(&operator);
        if best.as_ref().is_none_or(|b| value > b.value + 1e-12) {
            let exact = f.exact.as_ref().and_then(|rho| {
                let op = labels.iter().fold(QMatrix::zeros(d), |acc, &k| acc.add(&rho[k]));
                exact_max_eigenvalue(&op)
            });
            best = Some(LhsBound {
                value,
                exact,
                responses: r,
                operator,
            });
        }
    }
    best.expect("sixteen candidates")
}
