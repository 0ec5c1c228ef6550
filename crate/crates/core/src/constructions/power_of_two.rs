//! Odd × 2^α rectangles over `Z_p × Δ` with Δ a non-cyclic 2-group, and the
//! sets built from them.

use super::lifting::{glue, lift_rectangle};
use super::{checked_mr, MagicRectangle, MagicRectangleSet};
use crate::error::{Error, Result};
use crate::group::{factorize, gcd, is_prime, AbelianGroup, GroupElement};
use crate::kotzig::{build_kotzig, Grid};

/// `(x, d)` with `x ∈ Z_p` and `d ∈ Δ` as an element of `Δ × Z_p`, whose
/// canonical coordinates list the 2-factors first.
fn pair(x: u64, d: &GroupElement) -> GroupElement {
    let mut coords = d.0.clone();
    coords.push(x);
    GroupElement(coords)
}

/// `MR_Γ(p, 2^α)` for `Γ ≅ Z_p × Δ`, `|Δ| = 2^α`, Δ with at least two factors.
///
/// When `gcd(2^α − 1, p) = 1` the first column carries `f(x) = −(2^α − 1)x` on
/// the `Z_p` side and both sums are zero. Otherwise a three-row table absorbs
/// the `Z_p` imbalance and the remaining residues come in `±x` row pairs.
pub fn mr_p_power_of_two(gamma: &AbelianGroup) -> Result<MagicRectangle> {
    let odd = gamma.odd_part();
    let delta = gamma.two_part();
    let p = odd.order();
    if odd.rank() != 1 || !is_prime(p) {
        return Err(Error::Precondition(format!(
            "{gamma}: odd part must be Z_p for a prime p"
        )));
    }
    if delta.rank() < 2 {
        return Err(Error::Precondition(format!(
            "{gamma}: 2-part {delta} is cyclic, so the group has at most one involution"
        )));
    }
    let width = delta.order();
    let rows = p as usize;
    let grid = if gcd(width - 1, p) == 1 {
        let ka = build_kotzig(rows, &delta)?;
        let f = |x: u64| ((p - (width - 1) % p) % p * x) % p;
        (0..rows)
            .map(|i| {
                (0..width as usize)
                    .map(|j| {
                        let x = if j == 0 { f(i as u64) } else { i as u64 };
                        pair(x, ka.get(i, j))
                    })
                    .collect()
            })
            .collect::<Grid>()
    } else {
        three_row_table(p, &delta)?
    };
    let omega = gamma.zero();
    let delta_sum = column_sum(gamma, &grid);
    checked_mr(MagicRectangle {
        group: gamma.clone(),
        a: rows,
        b: width as usize,
        grid,
        omega,
        delta: delta_sum,
    })
}

fn column_sum(gamma: &AbelianGroup, grid: &Grid) -> GroupElement {
    gamma.sum(grid.iter().map(|row| &row[0]))
}

/// The `p | 2^α − 1` case.
fn three_row_table(p: u64, delta: &AbelianGroup) -> Result<Grid> {
    let width = delta.order() as usize;
    let ka = build_kotzig(3, delta)?;
    // Reorder columns so that k[0][2] == k[2][1]; the row sums of the table
    // depend on it. Column 0 stays the zero column.
    let c1 = (1..width)
        .find(|&c| ka.get(0, c) != ka.get(2, c))
        .ok_or_else(|| Error::Precondition("Kotzig rows 1 and 3 coincide".into()))?;
    let c2 = (1..width)
        .find(|&c| ka.get(0, c) == ka.get(2, c1))
        .expect("row 0 is a permutation");
    let mut order = vec![0, c1, c2];
    order.extend((1..width).filter(|&c| c != c1 && c != c2));
    let k = |i: usize, j: usize| ka.get(i, order[j]).clone();
    let shift = delta.sub(&k(0, 2), &k(0, 1));
    let top: Vec<GroupElement> = (0..width).map(|j| delta.add(&k(0, j), &shift)).collect();
    let mid: Vec<GroupElement> = (0..width).map(|j| k(1, j)).collect();
    let bot: Vec<GroupElement> = (0..width).map(|j| k(2, j)).collect();

    let mut grid: Grid = Vec::with_capacity(p as usize);
    grid.push(
        (0..width)
            .map(|j| match j {
                1 => pair(0, &bot[1]),
                _ => pair(1, &top[j]),
            })
            .collect(),
    );
    grid.push(
        (0..width)
            .map(|j| match j {
                0 => pair(0, &bot[0]),
                _ => pair(p - 1, &mid[j]),
            })
            .collect(),
    );
    grid.push(
        (0..width)
            .map(|j| match j {
                0 => pair(p - 1, &mid[0]),
                1 => pair(1, &top[1]),
                _ => pair(0, &bot[j]),
            })
            .collect(),
    );

    // Remaining residues in ±x pairs. Row B is the pointwise negation of row
    // A; the set of Δ-values paired with +x must be closed under negation for
    // every element to be used once. Alternating signs give that for free
    // when Δ is elementary; otherwise pick such a half explicitly.
    let positive: Vec<bool> = if delta.is_elementary() {
        (0..width).map(|j| j % 2 == 0).collect()
    } else {
        let half = symmetric_half(delta);
        top.iter().map(|v| half[delta.index_of(v)]).collect()
    };
    let full = AbelianGroup::from_canonical(&[delta.moduli(), &[p]].concat())?;
    for x in 2..=(p - 1) / 2 {
        let row_a: Vec<GroupElement> = (0..width)
            .map(|j| pair(if positive[j] { x } else { p - x }, &top[j]))
            .collect();
        let row_b = row_a.iter().map(|e| full.neg(e)).collect();
        grid.push(row_a);
        grid.push(row_b);
    }
    Ok(grid)
}

/// Indicator of a negation-closed subset holding half of Δ. Exists because Δ
/// is a non-cyclic 2-group of order at least 4, so `{0} ∪ involutions` has
/// even size at least 4.
fn symmetric_half(delta: &AbelianGroup) -> Vec<bool> {
    let n = delta.order() as usize;
    let mut inside = vec![false; n];
    let mut size = 0;
    let mut singles = Vec::new();
    for i in 0..n {
        let x = delta.element_at(i);
        let j = delta.index_of(&delta.neg(&x));
        if j == i {
            singles.push(i);
        } else if i < j && size + 2 <= n / 2 {
            inside[i] = true;
            inside[j] = true;
            size += 2;
        }
    }
    for i in singles {
        if size == n / 2 {
            break;
        }
        inside[i] = true;
        size += 1;
    }
    debug_assert_eq!(size, n / 2);
    inside
}

/// `MRS_Γ(a, 2^α; c)` for odd `a`, `2^α > 2`, when one of these holds for the
/// 2-part `Z_{2^α₁} × … × Z_{2^α_k}` (`k > 1`, exponents ascending):
/// `α₁ > 1`, `α₃ > 1`, `k > 3`, or `c` odd.
///
/// The first three go through `Γ₀ ≅ Z_p × Z_2 × Z_2` and `p × 4` tiles; odd `c`
/// uses `Γ₀ ≅ Z_p × Δ` with the full 2-part and `p × 2^α` tiles.
pub fn mrs_odd_power_of_two(
    a: usize,
    alpha: u32,
    c: usize,
    gamma: &AbelianGroup,
) -> Result<MagicRectangleSet> {
    let b = 1usize << alpha;
    if a % 2 == 0 || a < 3 || alpha < 2 {
        return Err(Error::Precondition(format!(
            "need odd a >= 3 and 2^alpha > 2, got {a}x{b}"
        )));
    }
    if (a * b * c) as u64 != gamma.order() {
        return Err(Error::OrderMismatch {
            product: (a * b * c) as u64,
            order: gamma.order(),
        });
    }
    let exps = gamma.two_exponents();
    let k = exps.len();
    if k < 2 {
        return Err(Error::Precondition(format!("{gamma} has a cyclic 2-part")));
    }
    let p = factorize(a as u64)
        .into_iter()
        .map(|(p, _)| p)
        .find(|&p| p > 2)
        .expect("odd a >= 3");
    let via_klein = exps[0] > 1 || (k >= 3 && exps[2] > 1) || k > 3;
    let shape = if via_klein {
        AbelianGroup::from_canonical(&[2, 2, p])?
    } else if c % 2 == 1 {
        AbelianGroup::from_canonical(&[gamma.two_part().moduli(), &[p]].concat())?
    } else {
        return Err(Error::Precondition(format!(
            "{a}x{b}x{c} over {gamma} is an open case"
        )));
    };
    // A subgroup sitting in the small factors is more often a direct factor,
    // which the lift handles without search.
    let low = gamma.subgroup_with_shape_low(&shape)?;
    let high = gamma.subgroup_with_shape(&shape)?;
    let mr0 = mr_p_power_of_two(low.abstract_form())?;
    let tiles = lift_rectangle(&mr0, gamma, &gamma.quotient(&low)?)
        .or_else(|_| lift_rectangle(&mr0, gamma, &gamma.quotient(&high)?))?;
    glue(&tiles, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::verify_mrs;

    fn g(spec: &str) -> AbelianGroup {
        AbelianGroup::parse(spec).unwrap()
    }

    #[test]
    fn case_one_sums_vanish() {
        let grp = g("Z5xZ2xZ2");
        let m = mr_p_power_of_two(&grp).unwrap();
        assert_eq!((m.a, m.b), (5, 4));
        assert_eq!(m.omega, grp.zero());
        assert_eq!(m.delta, grp.zero());
    }

    #[test]
    fn case_two_verifies() {
        for spec in ["Z3xZ2xZ2", "Z3xZ2xZ8", "Z3xZ4xZ4", "Z7xZ2xZ2xZ2", "Z7xZ2xZ4", "Z5xZ4xZ4"] {
            let grp = g(spec);
            let m = mr_p_power_of_two(&grp).unwrap();
            assert!(verify_mrs(&m.clone().into_set()).is_valid(), "{spec}");
            assert_eq!(m.omega, grp.zero());
        }
    }

    #[test]
    fn cyclic_two_part_rejected() {
        assert!(mr_p_power_of_two(&g("Z3xZ8")).is_err());
        assert!(mr_p_power_of_two(&g("Z9xZ2xZ2")).is_err());
    }

    #[test]
    fn symmetric_half_is_closed() {
        for spec in ["Z2xZ4", "Z4xZ4", "Z2xZ2xZ8", "Z2xZ2"] {
            let d = g(spec);
            let half = symmetric_half(&d);
            assert_eq!(half.iter().filter(|&&b| b).count() as u64, d.order() / 2);
            for x in d.elements() {
                assert_eq!(half[d.index_of(&x)], half[d.index_of(&d.neg(&x))]);
            }
        }
    }

    #[test]
    fn odd_power_of_two_conditions() {
        let m = mrs_odd_power_of_two(3, 2, 1, &g("Z3xZ2xZ2")).unwrap();
        assert_eq!(m.c, 1);
        let m = mrs_odd_power_of_two(5, 2, 4, &g("Z5xZ4xZ4")).unwrap();
        assert!(verify_mrs(&m).is_valid());
        let m = mrs_odd_power_of_two(3, 2, 4, &g("Z3xZ2xZ2xZ2xZ2")).unwrap();
        assert!(verify_mrs(&m).is_valid());
        let m = mrs_odd_power_of_two(9, 3, 3, &g("Z27xZ2xZ4")).unwrap();
        assert!(verify_mrs(&m).is_valid());
        // α₁ = 1, k = 2, c even
        assert!(mrs_odd_power_of_two(3, 2, 2, &g("Z3xZ2xZ4")).is_err());
        assert!(mrs_odd_power_of_two(3, 1, 1, &g("Z3xZ2")).is_err());
    }
}
