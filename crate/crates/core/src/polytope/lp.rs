//! Exact phase-one simplex for `A x = b, x ≥ 0` with Bland's rule.

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    /// Farkas certificate `y` with `yᵀA ≤ 0` and `yᵀb > 0`.
    Infeasible(Vec<Rational>),
}

/// Solves the phase-one problem `min Σ a_i` over `A x + a = b` with
/// `x, a ≥ 0`. Rows with negative `b_i` are negated first; the certificate
/// is mapped back to the original rows.
pub fn feasibility(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let width = n + m + 1;
    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();

    let mut tab: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = vec![Rational::zero(); width];
            for j in 0..n {
                row[j] = if signs[i] { -a[i][j].clone() } else { a[i][j].clone() };
            }
            row[n + i] = Rational::one();
            row[width - 1] = b[i].abs();
            row
        })
        .collect();
    // Reduced costs of the phase-one objective; the last entry is −w.
    let mut obj = vec![Rational::zero(); width];
    for row in &tab {
        for j in 0..n {
            obj[j] -= &row[j];
        }
        obj[width - 1] -= &row[width - 1];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    while let Some(enter) = (0..n + m).find(|&j| obj[j].is_negative()) {
        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if !tab[i][enter].is_positive() {
                continue;
            }
            let ratio = &tab[i][width - 1] / &tab[i][enter];
            let better = match &leave {
                None => true,
                Some((k, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*k]),
            };
            if better {
                leave = Some((i, ratio));
            }
        }
        let (r, _) = leave.expect("phase-one objective is bounded below");
        pivot(&mut tab, &mut obj, r, enter);
        basis[r] = enter;
    }

    if obj[width - 1].is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = tab[i][width - 1].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        // Artificial column i has cost 1, so its reduced cost is 1 − y_i.
        let y = (0..m)
            .map(|i| {
                let yi = Rational::one() - &obj[n + i];
                if signs[i] {
                    -yi
                } else {
                    yi
                }
            })
            .collect();
        Feasibility::Infeasible(y)
    }
}

fn pivot(tab: &mut [Vec<Rational>], obj: &mut [Rational], r: usize, c: usize) {
    let inv = tab[r][c].recip();
    for v in tab[r].iter_mut() {
        if !v.is_zero() {
            *v *= &inv;
        }
    }
    let pivot_row = tab[r].clone();
    let eliminate = |row: &mut [Rational]| {
        if row[c].is_zero() {
            return;
        }
        let factor = row[c].clone();
        for (v, p) in row.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &factor * p;
            }
        }
    };
    for (i, row) in tab.iter_mut().enumerate() {
        if i != r {
            eliminate(row);
        }
    }
    eliminate(obj);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dot, int};

    fn check(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
        let result = feasibility(a, b);
        match &result {
            Feasibility::Feasible(x) => {
                assert!(x.iter().all(|v| !v.is_negative()));
                for (row, rhs) in a.iter().zip(b) {
                    assert_eq!(dot(row, x), *rhs);
                }
            }
            Feasibility::Infeasible(y) => {
                for j in 0..a[0].len() {
                    let col: Vec<Rational> = a.iter().map(|r| r[j].clone()).collect();
                    assert!(dot(y, &col) <= Rational::zero());
                }
                assert!(dot(y, b).is_positive());
            }
        }
        result
    }

    #[test]
    fn feasible_system() {
        let a = vec![vec![int(1), int(1), int(0)], vec![int(0), int(1), int(1)]];
        assert!(matches!(check(&a, &[int(2), int(3)]), Feasibility::Feasible(_)));
    }

    #[test]
    fn infeasible_system() {
        let a = vec![vec![int(1), int(1)], vec![int(1), int(1)]];
        assert!(matches!(check(&a, &[int(1), int(2)]), Feasibility::Infeasible(_)));
        let b = vec![vec![int(1), int(-1)]];
        assert!(matches!(check(&b, &[int(-1)]), Feasibility::Feasible(_)));
        let c = vec![vec![int(1), int(2)]];
        assert!(matches!(check(&c, &[int(-1)]), Feasibility::Infeasible(_)));
    }

    #[test]
    fn degenerate_system_terminates() {
        let a = vec![
            vec![int(1), int(1), int(1), int(0)],
            vec![int(1), int(-1), int(0), int(1)],
            vec![int(2), int(0), int(1), int(1)],
        ];
        assert!(matches!(check(&a, &[int(0), int(0), int(0)]), Feasibility::Feasible(_)));
    }
}
