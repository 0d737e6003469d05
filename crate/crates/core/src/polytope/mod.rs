//! The (time-ordered) no-signaling polytope of a sequential scenario.
//!
//! Boxes are checked against an explicit constraint system `A·P ≤ b`:
//! non-negativity rows, one normalization row per input context, and the
//! time-ordered no-signaling rows. The latter are stored in clique form: each
//! row is a 0/1 indicator of a set of pairwise-exclusive events whose
//! probabilities must sum to one. Together with normalization, these rows
//! carve out exactly the same affine subspace as the marginal-independence
//! statements, so tight-row ranks are unaffected.

mod constraints;
mod deterministic;
mod enumerate;
pub mod lp;
mod vertex;

pub use constraints::{build_constraints, build_constraints_with_cap, ConstraintRow, ConstraintSystem, RowKind};
pub use deterministic::{enumerate_deterministic, enumerate_deterministic_with_cap, Strategy};
pub use enumerate::{enumerate_vertices, enumerate_vertices_with_cap, EnumeratedVertex};
pub use vertex::{is_vertex, tight_rows, validate_box, ValidationReport, VertexReport, Violation};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::scenario::SequentialScenario;

/// Tolerance used for every float-mode comparison in this module.
pub const FLOAT_TOL: f64 = 1e-10;

pub const DEFAULT_DIMENSION_CAP: usize = 1 << 16;
pub const DEFAULT_ENUMERATION_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Entries {
    Rational(Vec<Rational>),
    Float(Vec<f64>),
}

impl Entries {
    pub fn len(&self) -> usize {
        match self {
            Entries::Rational(v) => v.len(),
            Entries::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A behavior: one probability per event, in canonical event order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxVector {
    scenario: SequentialScenario,
    entries: Entries,
}

impl BoxVector {
    pub fn new(scenario: SequentialScenario, entries: Entries) -> Result<Self> {
        if entries.len() != scenario.n_seq() {
            return Err(Error::schema(
                "entries",
                format!("expected {} entries, found {}", scenario.n_seq(), entries.len()),
            ));
        }
        if let Entries::Float(v) = &entries {
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::schema("entries", "non-finite float entry"));
            }
        }
        Ok(BoxVector { scenario, entries })
    }

    pub fn rational(scenario: SequentialScenario, entries: Vec<Rational>) -> Result<Self> {
        Self::new(scenario, Entries::Rational(entries))
    }

    pub fn float(scenario: SequentialScenario, entries: Vec<f64>) -> Result<Self> {
        Self::new(scenario, Entries::Float(entries))
    }

    /// Builds a rational box by evaluating `f` on every event.
    pub fn from_fn(
        scenario: SequentialScenario,
        mut f: impl FnMut(&crate::scenario::Event) -> Rational,
    ) -> Self {
        let entries = scenario.events().iter().map(&mut f).collect();
        BoxVector {
            scenario,
            entries: Entries::Rational(entries),
        }
    }

    /// The uniform box, `1 / (d^(N_A+N_B))` on every event.
    pub fn uniform(scenario: SequentialScenario) -> Self {
        let per_context = scenario.n_seq() / scenario.contexts();
        let v = exact::ratio(1, per_context as i64);
        Self::from_fn(scenario, |_| v.clone())
    }

    /// The single-run PR box: `1/2` when `o_A ⊕ o_B = i_A · i_B`.
    pub fn pr_box() -> Self {
        let half = exact::ratio(1, 2);
        Self::from_fn(SequentialScenario::chsh(), |e| {
            if (e.outputs_a[0] ^ e.outputs_b[0]) == (e.inputs_a[0] & e.inputs_b[0]) {
                half.clone()
            } else {
                Rational::zero()
            }
        })
    }

    pub fn scenario(&self) -> &SequentialScenario {
        &self.scenario
    }

    pub fn entries(&self) -> &Entries {
        &self.entries
    }

    pub fn is_rational(&self) -> bool {
        matches!(self.entries, Entries::Rational(_))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_rational(&self) -> Option<&[Rational]> {
        match &self.entries {
            Entries::Rational(v) => Some(v),
            Entries::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.entries {
            Entries::Rational(v) => v.iter().map(exact::to_f64).collect(),
            Entries::Float(v) => v.clone(),
        }
    }

    /// True when every entry is exactly (or within tolerance of) 0 or 1.
    pub fn is_integral(&self) -> bool {
        match &self.entries {
            Entries::Rational(v) => v.iter().all(|q| q.is_zero() || q.is_one()),
            Entries::Float(v) => v
                .iter()
                .all(|x| x.abs() <= FLOAT_TOL || (x - 1.0).abs() <= FLOAT_TOL),
        }
    }

    /// Convex combination `λ·self + (1-λ)·other`, exact when both are rational.
    pub fn mix(&self, other: &BoxVector, lambda: &Rational) -> Result<BoxVector> {
        if self.scenario != other.scenario {
            return Err(Error::ScenarioMismatch);
        }
        let entries = match (&self.entries, &other.entries) {
            (Entries::Rational(a), Entries::Rational(b)) => {
                let mu = Rational::one() - lambda;
                Entries::Rational(a.iter().zip(b).map(|(x, y)| lambda * x + &mu * y).collect())
            }
            _ => {
                let l = exact::to_f64(lambda);
                Entries::Float(
                    self.to_f64()
                        .iter()
                        .zip(other.to_f64())
                        .map(|(x, y)| l * x + (1.0 - l) * y)
                        .collect(),
                )
            }
        };
        BoxVector::new(self.scenario, entries)
    }
}

/// The single-run CHSH functional in probability form:
/// `Σ_{x,y} Σ_{a⊕b = x·y} P(ab|xy)`. Local maximum 3, quantum `2+√2`,
/// no-signaling 4.
pub fn chsh_functional() -> Vec<Rational> {
    SequentialScenario::chsh()
        .events()
        .iter()
        .map(|e| {
            if (e.outputs_a[0] ^ e.outputs_b[0]) == (e.inputs_a[0] & e.inputs_b[0]) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

/// Result of a local-polytope membership query.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    /// Convex weights over the generator list reproducing the box exactly.
    InHull(Vec<Rational>),
    /// A linear functional with `f·L ≤ classical_bound` for every generator
    /// and `f·P = value > classical_bound`.
    Separated {
        functional: Vec<Rational>,
        classical_bound: Rational,
        value: Rational,
    },
}

fn check_generators(p: &BoxVector, ldbs: &[BoxVector]) -> Result<()> {
    if ldbs.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    if ldbs.iter().any(|l| l.scenario != p.scenario) {
        return Err(Error::ScenarioMismatch);
    }
    if !p.is_rational() || ldbs.iter().any(|l| !l.is_rational()) {
        return Err(Error::schema("mode", "local membership requires rational boxes"));
    }
    Ok(())
}

/// Decides whether `p` lies in the convex hull of `ldbs` with an exact
/// simplex; returns either the weights or a separating functional taken from
/// the Farkas certificate of the infeasible phase-one problem.
pub fn local_membership(p: &BoxVector, ldbs: &[BoxVector]) -> Result<Membership> {
    check_generators(p, ldbs)?;
    let n = p.len();
    let target = p.as_rational().expect("checked");
    // Rows: one per box entry, plus the weight normalization.
    let mut a = vec![vec![Rational::zero(); ldbs.len()]; n + 1];
    for (j, l) in ldbs.iter().enumerate() {
        for (i, v) in l.as_rational().expect("checked").iter().enumerate() {
            a[i][j] = v.clone();
        }
        a[n][j] = Rational::one();
    }
    let mut b = target.to_vec();
    b.push(Rational::one());
    match lp::feasibility(&a, &b) {
        lp::Feasibility::Feasible(x) => Ok(Membership::InHull(x)),
        lp::Feasibility::Infeasible(y) => {
            let functional = y[..n].to_vec();
            let classical_bound = classical_bound(&functional, ldbs);
            let value = exact::dot(&functional, target);
            debug_assert!(value > classical_bound);
            Ok(Membership::Separated {
                functional,
                classical_bound,
                value,
            })
        }
    }
}

/// Maximum of `f·L` over the generators.
pub fn classical_bound(f: &[Rational], ldbs: &[BoxVector]) -> Rational {
    ldbs.iter()
        .filter_map(|l| l.as_rational())
        .map(|l| exact::dot(f, l))
        .max()
        .unwrap_or_else(Rational::zero)
}

/// Checks a user-supplied functional against the generators: `Separated`
/// when it is violated by `p`, otherwise `None`.
pub fn separate_with(f: &[Rational], p: &BoxVector, ldbs: &[BoxVector]) -> Result<Option<Membership>> {
    check_generators(p, ldbs)?;
    if f.len() != p.len() {
        return Err(Error::DimensionMismatch(format!(
            "functional has {} entries, box has {}",
            f.len(),
            p.len()
        )));
    }
    let classical_bound = classical_bound(f, ldbs);
    let value = exact::dot(f, p.as_rational().expect("checked"));
    Ok((value > classical_bound).then(|| Membership::Separated {
        functional: f.to_vec(),
        classical_bound,
        value,
    }))
}
