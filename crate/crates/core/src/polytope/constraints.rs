use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::scenario::{sequences, Event, Party, SequentialScenario};

use super::DEFAULT_DIMENSION_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    NonNeg,
    Norm,
    Tons,
}

impl RowKind {
    pub fn name(self) -> &'static str {
        match self {
            RowKind::NonNeg => "NonNeg",
            RowKind::Norm => "Norm",
            RowKind::Tons => "TONS",
        }
    }
}

/// One row of `A·P ≤ b` (or `A·P = b` for equality kinds), stored sparsely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintRow {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, i64)>,
    pub rhs: i64,
}

impl ConstraintRow {
    pub fn is_equality(&self) -> bool {
        self.kind != RowKind::NonNeg
    }

    /// Indices with a nonzero coefficient, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.coeffs.iter().map(|&(i, _)| i).collect()
    }

    pub fn dense(&self, n: usize) -> Vec<Rational> {
        let mut row = vec![exact::int(0); n];
        for &(i, c) in &self.coeffs {
            row[i] = exact::int(c);
        }
        row
    }

    pub fn eval_rational(&self, p: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .fold(exact::int(0), |acc, &(i, c)| acc + &p[i] * exact::int(c))
    }

    pub fn eval_f64(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| p[i] * c as f64).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub scenario: SequentialScenario,
    pub rows: Vec<ConstraintRow>,
}

impl ConstraintSystem {
    pub fn n_seq(&self) -> usize {
        self.scenario.n_seq()
    }

    pub fn count(&self, kind: RowKind) -> usize {
        self.rows.iter().filter(|r| r.kind == kind).count()
    }

    pub fn equality_rows(&self) -> impl Iterator<Item = &ConstraintRow> {
        self.rows.iter().filter(|r| r.is_equality())
    }

    /// Dimension of the affine hull cut out by the equality rows.
    pub fn affine_dimension(&self) -> usize {
        let n = self.n_seq();
        let rows: Vec<_> = self.equality_rows().map(|r| r.dense(n)).collect();
        n - exact::rank(&rows)
    }
}

pub fn build_constraints(s: &SequentialScenario) -> Result<ConstraintSystem> {
    build_constraints_with_cap(s, DEFAULT_DIMENSION_CAP)
}

pub fn build_constraints_with_cap(s: &SequentialScenario, cap: usize) -> Result<ConstraintSystem> {
    let n = s.n_seq();
    if n > cap {
        return Err(Error::DimensionCap {
            what: "n_seq",
            actual: n,
            cap,
        });
    }
    let mut rows: Vec<ConstraintRow> = (0..n)
        .map(|i| ConstraintRow {
            kind: RowKind::NonNeg,
            coeffs: vec![(i, -1)],
            rhs: 0,
        })
        .collect();

    let per_context = s.output_sequences(Party::A) * s.output_sequences(Party::B);
    for ctx in 0..s.contexts() {
        rows.push(ConstraintRow {
            kind: RowKind::Norm,
            coeffs: (ctx * per_context..(ctx + 1) * per_context).map(|i| (i, 1)).collect(),
            rhs: 1,
        });
    }

    for party in [Party::A, Party::B] {
        push_tons_rows(s, party, &mut rows);
    }
    Ok(ConstraintSystem { scenario: *s, rows })
}

fn event(s: &SequentialScenario, party: Party, own: (&[usize], &[usize]), other: (&[usize], &[usize])) -> usize {
    let (own_in, own_out) = own;
    let (other_in, other_out) = other;
    let e = match party {
        Party::A => Event {
            inputs_a: own_in.to_vec(),
            inputs_b: other_in.to_vec(),
            outputs_a: own_out.to_vec(),
            outputs_b: other_out.to_vec(),
        },
        Party::B => Event {
            inputs_a: other_in.to_vec(),
            inputs_b: own_in.to_vec(),
            outputs_a: other_out.to_vec(),
            outputs_b: own_out.to_vec(),
        },
    };
    s.event_index(&e).expect("labels generated in range")
}

/// Emits one row per statement "the marginal of `party`'s first `k-1`
/// outcomes, jointly with the other party's full record, does not depend on
/// `party`'s settings from run `k` onward".
///
/// For a reference setting suffix `r = 0…0` and a test suffix `s`, the
/// statement `Σ P(prefix·s, o prefix) = Σ P(prefix·r, o prefix)` is rewritten
/// with the normalization of context `(prefix·r, other)` into the clique
/// equality
///
/// ```text
/// Σ_{outcomes extending o}       P(prefix·s ...)
/// + Σ_{outcome prefixes ≠ o}     P(prefix·r ...)
/// + Σ_{other outcomes ≠ other_o} P(prefix·r, other_i ...) = 1.
/// ```
fn push_tons_rows(s: &SequentialScenario, party: Party, rows: &mut Vec<ConstraintRow>) {
    let (m, d) = (s.inputs, s.outputs);
    let own_runs = s.runs(party);
    let other_runs = s.runs(party.other());
    let own_outputs = sequences(d, own_runs);
    let other_outputs = sequences(d, other_runs);

    for k in 1..=own_runs {
        let tail = own_runs - k + 1;
        let suffixes: Vec<Vec<usize>> = sequences(m, tail).into_iter().skip(1).collect();
        for in_prefix in sequences(m, k - 1) {
            let reference: Vec<usize> = in_prefix.iter().copied().chain(std::iter::repeat_n(0, tail)).collect();
            for out_prefix in sequences(d, k - 1) {
                for other_in in sequences(m, other_runs) {
                    for other_out in &other_outputs {
                        for suffix in &suffixes {
                            let test: Vec<usize> = in_prefix.iter().chain(suffix).copied().collect();
                            let mut support = Vec::new();
                            for own_out in &own_outputs {
                                if own_out[..k - 1] == out_prefix[..] {
                                    support.push(event(s, party, (&test, own_out), (&other_in, other_out)));
                                } else {
                                    support.push(event(s, party, (&reference, own_out), (&other_in, other_out)));
                                }
                                for alt in other_outputs.iter().filter(|o| *o != other_out) {
                                    support.push(event(s, party, (&reference, own_out), (&other_in, alt)));
                                }
                            }
                            support.sort_unstable();
                            rows.push(ConstraintRow {
                                kind: RowKind::Tons,
                                coeffs: support.into_iter().map(|i| (i, 1)).collect(),
                                rhs: 1,
                            });
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chsh_counts_and_dimension() {
        let cs = build_constraints(&SequentialScenario::chsh()).unwrap();
        assert_eq!(cs.count(RowKind::NonNeg), 16);
        assert_eq!(cs.count(RowKind::Norm), 4);
        assert_eq!(cs.count(RowKind::Tons), 8);
        assert_eq!(cs.affine_dimension(), 8);
    }

    /// The clique rows must span the same space as the plain
    /// marginal-difference rows together with normalization.
    #[test]
    fn clique_rows_match_difference_rows() {
        for s in [
            SequentialScenario::chsh(),
            SequentialScenario::asymmetric(1, 2, 2, 2).unwrap(),
            SequentialScenario::asymmetric(2, 1, 2, 2).unwrap(),
        ] {
            let cs = build_constraints(&s).unwrap();
            let n = s.n_seq();
            let events = s.events();
            let mut diff_rows: Vec<Vec<Rational>> = cs
                .rows
                .iter()
                .filter(|r| r.kind == RowKind::Norm)
                .map(|r| {
                    let mut v = r.dense(n);
                    v.push(exact::int(1));
                    v
                })
                .collect();
            for party in [Party::A, Party::B] {
                let runs = s.runs(party);
                for k in 1..=runs {
                    for (u, eu) in events.iter().enumerate() {
                        for (v, ev) in events.iter().enumerate() {
                            if u >= v {
                                continue;
                            }
                            let same_prefix = eu.inputs(party)[..k - 1] == ev.inputs(party)[..k - 1]
                                && eu.outputs(party)[..k - 1] == ev.outputs(party)[..k - 1];
                            let other = party.other();
                            let same_other = eu.inputs(other) == ev.inputs(other)
                                && eu.outputs(other) == ev.outputs(other);
                            if !(same_prefix && same_other) {
                                continue;
                            }
                            // Marginal over own outcomes from run k on, at the settings of u vs v.
                            let mut row = vec![exact::int(0); n + 1];
                            for (w, ew) in events.iter().enumerate() {
                                let matches = |e: &Event| {
                                    ew.inputs(party) == e.inputs(party)
                                        && ew.outputs(party)[..k - 1] == e.outputs(party)[..k - 1]
                                        && ew.inputs(other) == e.inputs(other)
                                        && ew.outputs(other) == e.outputs(other)
                                };
                                if matches(eu) {
                                    row[w] += exact::int(1);
                                }
                                if matches(ev) {
                                    row[w] -= exact::int(1);
                                }
                            }
                            diff_rows.push(row);
                        }
                    }
                }
            }
            let clique_rows: Vec<Vec<Rational>> = cs
                .equality_rows()
                .map(|r| {
                    let mut v = r.dense(n);
                    v.push(exact::int(r.rhs));
                    v
                })
                .collect();
            let r_diff = exact::rank(&diff_rows);
            let r_clique = exact::rank(&clique_rows);
            let mut both = diff_rows.clone();
            both.extend(clique_rows);
            assert_eq!(r_diff, r_clique);
            assert_eq!(exact::rank(&both), r_diff);
        }
    }

    #[test]
    fn cap_enforced() {
        let s = SequentialScenario::new(2, 2, 2).unwrap();
        assert!(matches!(
            build_constraints_with_cap(&s, 100),
            Err(Error::DimensionCap { actual: 256, .. })
        ));
    }
}
