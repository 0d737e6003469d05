use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::scenario::{Party, SequentialScenario};

use super::{BoxVector, DEFAULT_DIMENSION_CAP};

/// A time-ordered deterministic response function for one party: the output
/// of run `j` is a function of the settings of runs `0..=j`. Outputs of
/// earlier runs are themselves functions of those settings, so this covers
/// every strategy that may also read past outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    inputs: usize,
    /// `table[j][code]` is the output at run `j` for the settings prefix with
    /// mixed-radix code `code` (length `j + 1`).
    table: Vec<Vec<usize>>,
}

impl Strategy {
    pub fn respond(&self, settings: &[usize]) -> Vec<usize> {
        let mut code = 0;
        settings
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                code = code * self.inputs + x;
                self.table[j][code]
            })
            .collect()
    }

    /// Every strategy for `runs` runs, in mixed-radix order of the table.
    pub fn all(runs: usize, inputs: usize, outputs: usize) -> Vec<Strategy> {
        let slots: Vec<usize> = (1..=runs).map(|j| inputs.pow(j as u32)).collect();
        let total_slots: usize = slots.iter().sum();
        let count = outputs.pow(total_slots as u32);
        (0..count)
            .map(|mut code| {
                let mut flat = vec![0; total_slots];
                for slot in flat.iter_mut().rev() {
                    *slot = code % outputs;
                    code /= outputs;
                }
                let mut table = Vec::with_capacity(runs);
                let mut offset = 0;
                for &len in &slots {
                    table.push(flat[offset..offset + len].to_vec());
                    offset += len;
                }
                Strategy { inputs, table }
            })
            .collect()
    }

    /// `Π_j d^(m^j)`, or `None` on overflow.
    pub fn count(runs: usize, inputs: usize, outputs: usize) -> Option<usize> {
        (1..=runs).try_fold(1usize, |acc, j| {
            let slots = inputs.checked_pow(j as u32)?;
            acc.checked_mul(outputs.checked_pow(u32::try_from(slots).ok()?)?)
        })
    }
}

pub fn enumerate_deterministic(s: &SequentialScenario) -> Result<Vec<BoxVector>> {
    enumerate_deterministic_with_cap(s, DEFAULT_DIMENSION_CAP)
}

/// One box per pair of strategies; `cap` bounds the number of boxes.
pub fn enumerate_deterministic_with_cap(s: &SequentialScenario, cap: usize) -> Result<Vec<BoxVector>> {
    let count_a = Strategy::count(s.runs_a, s.inputs, s.outputs);
    let count_b = Strategy::count(s.runs_b, s.inputs, s.outputs);
    let total = count_a.zip(count_b).and_then(|(a, b)| a.checked_mul(b));
    match total {
        Some(t) if t <= cap => {}
        other => {
            return Err(Error::DimensionCap {
                what: "deterministic boxes",
                actual: other.unwrap_or(usize::MAX),
                cap,
            })
        }
    }
    let strategies_a = Strategy::all(s.runs_a, s.inputs, s.outputs);
    let strategies_b = Strategy::all(s.runs_b, s.inputs, s.outputs);
    let events = s.events();
    let mut boxes = Vec::with_capacity(strategies_a.len() * strategies_b.len());
    for sa in &strategies_a {
        for sb in &strategies_b {
            let entries = events
                .iter()
                .map(|e| {
                    if sa.respond(e.inputs(Party::A)) == e.outputs_a && sb.respond(e.inputs(Party::B)) == e.outputs_b {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            boxes.push(BoxVector::rational(*s, entries)?);
        }
    }
    Ok(boxes)
}
