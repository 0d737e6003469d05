//! Sequential two-party Bell scenarios and the canonical vectorization of
//! their measurement events.
//!
//! Each party performs `runs` measurements in sequence, choosing one of
//! `inputs` settings per run and receiving one of `outputs` outcomes. An
//! [`Event`] fixes every input and output of both parties; a box assigns a
//! probability to each event. Events are indexed lexicographically by the
//! tuple `(inputs_a, inputs_b, outputs_a, outputs_b)` with the first run of
//! `inputs_a` as the most significant digit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of a sequential Bell scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct SequentialScenario {
    pub runs_a: usize,
    pub runs_b: usize,
    pub inputs: usize,
    pub outputs: usize,
}

#[derive(Deserialize)]
struct RawScenario {
    runs_a: usize,
    runs_b: usize,
    inputs: usize,
    outputs: usize,
}

impl TryFrom<RawScenario> for SequentialScenario {
    type Error = Error;

    fn try_from(raw: RawScenario) -> Result<Self> {
        SequentialScenario::asymmetric(raw.runs_a, raw.runs_b, raw.inputs, raw.outputs)
    }
}

/// Party selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Party {
    A,
    B,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::A => Party::B,
            Party::B => Party::A,
        }
    }
}

/// One joint measurement event. All labels are 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pub inputs_a: Vec<usize>,
    pub inputs_b: Vec<usize>,
    pub outputs_a: Vec<usize>,
    pub outputs_b: Vec<usize>,
}

impl Event {
    pub fn inputs(&self, party: Party) -> &[usize] {
        match party {
            Party::A => &self.inputs_a,
            Party::B => &self.inputs_b,
        }
    }

    pub fn outputs(&self, party: Party) -> &[usize] {
        match party {
            Party::A => &self.outputs_a,
            Party::B => &self.outputs_b,
        }
    }

    /// True when the two events are locally exclusive for `party`: for some
    /// run `k` the settings agree on runs `0..=k` while the outcomes differ
    /// somewhere in `0..=k`.
    pub fn conflicts_on(&self, other: &Event, party: Party) -> bool {
        let (ia, ib) = (self.inputs(party), other.inputs(party));
        let (oa, ob) = (self.outputs(party), other.outputs(party));
        match oa.iter().zip(ob).position(|(x, y)| x != y) {
            Some(first) => ia[..=first] == ib[..=first],
            None => false,
        }
    }

    /// Orthogonality of the product measurement operators of two events.
    pub fn orthogonal_to(&self, other: &Event) -> bool {
        self.conflicts_on(other, Party::A) || self.conflicts_on(other, Party::B)
    }
}

impl SequentialScenario {
    /// Symmetric scenario with `runs` measurement runs per party.
    pub fn new(runs: usize, inputs: usize, outputs: usize) -> Result<Self> {
        Self::asymmetric(runs, runs, inputs, outputs)
    }

    pub fn asymmetric(runs_a: usize, runs_b: usize, inputs: usize, outputs: usize) -> Result<Self> {
        for (name, value) in [
            ("runs_a", runs_a),
            ("runs_b", runs_b),
            ("inputs", inputs),
            ("outputs", outputs),
        ] {
            if value == 0 {
                return Err(Error::ZeroParameter(name));
            }
        }
        let s = SequentialScenario {
            runs_a,
            runs_b,
            inputs,
            outputs,
        };
        if s.checked_event_count().is_none() {
            return Err(Error::DimensionCap {
                what: "n_seq",
                actual: usize::MAX,
                cap: usize::MAX,
            });
        }
        Ok(s)
    }

    /// The single-run scenario with two settings and two outcomes.
    pub fn chsh() -> Self {
        SequentialScenario {
            runs_a: 1,
            runs_b: 1,
            inputs: 2,
            outputs: 2,
        }
    }

    fn checked_event_count(&self) -> Option<usize> {
        let per_run = self.inputs.checked_mul(self.outputs)?;
        per_run.checked_pow(u32::try_from(self.runs_a + self.runs_b).ok()?)
    }

    /// Length of the box vector, `(m d)^(N_A + N_B)`.
    pub fn n_seq(&self) -> usize {
        self.checked_event_count().expect("validated at construction")
    }

    pub fn runs(&self, party: Party) -> usize {
        match party {
            Party::A => self.runs_a,
            Party::B => self.runs_b,
        }
    }

    /// Number of distinct input sequences of one party.
    pub fn input_sequences(&self, party: Party) -> usize {
        self.inputs.pow(self.runs(party) as u32)
    }

    /// Number of distinct output sequences of one party.
    pub fn output_sequences(&self, party: Party) -> usize {
        self.outputs.pow(self.runs(party) as u32)
    }

    /// Number of input contexts `(inputs_a, inputs_b)`.
    pub fn contexts(&self) -> usize {
        self.input_sequences(Party::A) * self.input_sequences(Party::B)
    }

    fn digit_radices(&self) -> Vec<usize> {
        let mut radices = Vec::with_capacity(2 * (self.runs_a + self.runs_b));
        radices.extend(std::iter::repeat_n(self.inputs, self.runs_a));
        radices.extend(std::iter::repeat_n(self.inputs, self.runs_b));
        radices.extend(std::iter::repeat_n(self.outputs, self.runs_a));
        radices.extend(std::iter::repeat_n(self.outputs, self.runs_b));
        radices
    }

    /// Canonical index of an event.
    pub fn event_index(&self, e: &Event) -> Result<usize> {
        let parts: [(&[usize], usize, &str); 4] = [
            (&e.inputs_a, self.runs_a, "inputs_a"),
            (&e.inputs_b, self.runs_b, "inputs_b"),
            (&e.outputs_a, self.runs_a, "outputs_a"),
            (&e.outputs_b, self.runs_b, "outputs_b"),
        ];
        let mut index = 0usize;
        for (k, (labels, len, name)) in parts.iter().enumerate() {
            if labels.len() != *len {
                return Err(Error::LabelOutOfRange(format!(
                    "{name} has {} runs, expected {len}",
                    labels.len()
                )));
            }
            let radix = if k < 2 { self.inputs } else { self.outputs };
            for &label in labels.iter() {
                if label >= radix {
                    return Err(Error::LabelOutOfRange(format!(
                        "{name} label {label} not below {radix}"
                    )));
                }
                index = index * radix + label;
            }
        }
        Ok(index)
    }

    /// Inverse of [`event_index`](Self::event_index).
    pub fn event_at(&self, index: usize) -> Result<Event> {
        let n = self.n_seq();
        if index >= n {
            return Err(Error::LabelOutOfRange(format!("index {index} not below {n}")));
        }
        let radices = self.digit_radices();
        let mut digits = vec![0usize; radices.len()];
        let mut rest = index;
        for (slot, &radix) in digits.iter_mut().zip(&radices).rev() {
            *slot = rest % radix;
            rest /= radix;
        }
        let (na, nb) = (self.runs_a, self.runs_b);
        Ok(Event {
            inputs_a: digits[..na].to_vec(),
            inputs_b: digits[na..na + nb].to_vec(),
            outputs_a: digits[na + nb..2 * na + nb].to_vec(),
            outputs_b: digits[2 * na + nb..].to_vec(),
        })
    }

    /// All events in canonical order.
    pub fn events(&self) -> Vec<Event> {
        (0..self.n_seq())
            .map(|i| self.event_at(i).expect("index in range"))
            .collect()
    }
}

/// Enumerates every sequence of `len` labels drawn from `0..radix`, in
/// lexicographic order.
pub fn sequences(radix: usize, len: usize) -> Vec<Vec<usize>> {
    let count = radix.pow(len as u32);
    (0..count)
        .map(|mut code| {
            let mut seq = vec![0; len];
            for slot in seq.iter_mut().rev() {
                *slot = code % radix;
                code /= radix;
            }
            seq
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn n_seq_values() {
        assert_eq!(SequentialScenario::new(1, 2, 2).unwrap().n_seq(), 16);
        assert_eq!(SequentialScenario::new(2, 2, 2).unwrap().n_seq(), 256);
        assert_eq!(SequentialScenario::asymmetric(1, 2, 2, 2).unwrap().n_seq(), 64);
    }

    #[test]
    fn zero_parameter_rejected() {
        assert!(matches!(
            SequentialScenario::new(1, 0, 2),
            Err(Error::ZeroParameter("inputs"))
        ));
        assert!(matches!(
            SequentialScenario::new(0, 2, 2),
            Err(Error::ZeroParameter("runs_a"))
        ));
    }

    #[test]
    fn chsh_extreme_indices() {
        let s = SequentialScenario::chsh();
        let zero = Event {
            inputs_a: vec![0],
            inputs_b: vec![0],
            outputs_a: vec![0],
            outputs_b: vec![0],
        };
        let max = Event {
            inputs_a: vec![1],
            inputs_b: vec![1],
            outputs_a: vec![1],
            outputs_b: vec![1],
        };
        assert_eq!(s.event_index(&zero).unwrap(), 0);
        assert_eq!(s.event_index(&max).unwrap(), 15);
    }

    #[test]
    fn out_of_range_label() {
        let s = SequentialScenario::chsh();
        let e = Event {
            inputs_a: vec![2],
            inputs_b: vec![0],
            outputs_a: vec![0],
            outputs_b: vec![0],
        };
        assert!(matches!(s.event_index(&e), Err(Error::LabelOutOfRange(_))));
        assert!(s.event_at(16).is_err());
    }

    #[test]
    fn exhaustive_roundtrip() {
        for (na, nb, m, d) in [(1, 1, 2, 2), (2, 2, 2, 2), (1, 2, 3, 2), (2, 1, 2, 3), (1, 1, 1, 1)] {
            let s = SequentialScenario::asymmetric(na, nb, m, d).unwrap();
            let mut seen = HashSet::new();
            for i in 0..s.n_seq() {
                let e = s.event_at(i).unwrap();
                assert_eq!(s.event_index(&e).unwrap(), i);
                assert!(seen.insert(e));
            }
            assert_eq!(seen.len(), s.n_seq());
        }
    }

    #[test]
    fn ordering_is_lexicographic() {
        let s = SequentialScenario::new(2, 2, 2).unwrap();
        let events = s.events();
        for w in events.windows(2) {
            let key = |e: &Event| {
                (
                    e.inputs_a.clone(),
                    e.inputs_b.clone(),
                    e.outputs_a.clone(),
                    e.outputs_b.clone(),
                )
            };
            assert!(key(&w[0]) < key(&w[1]));
        }
    }

    #[test]
    fn json_shape() {
        let s: SequentialScenario =
            serde_json::from_str(r#"{"runs_a":1,"runs_b":1,"inputs":2,"outputs":2}"#).unwrap();
        assert_eq!(s, SequentialScenario::chsh());
        assert!(serde_json::from_str::<SequentialScenario>(
            r#"{"runs_a":1,"runs_b":1,"inputs":0,"outputs":2}"#
        )
        .is_err());
    }
}
