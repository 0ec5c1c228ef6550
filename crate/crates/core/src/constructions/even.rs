use super::lifting::glue;
use super::{checked, MagicRectangleSet};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};

/// Picks `ω ∉ 2Γ` and an involution `ι` with `ω + ι ∉ 2Γ`, first in element order.
fn block_constants(gamma: &AbelianGroup) -> Option<(GroupElement, GroupElement)> {
    let involutions = gamma.involutions();
    gamma
        .elements()
        .filter(|w| !gamma.is_double(w))
        .find_map(|w| {
            involutions
                .iter()
                .find(|i| !gamma.is_double(&gamma.add(&w, i)))
                .map(|i| (w.clone(), i.clone()))
        })
}

/// `MRS_Γ(a, b; c)` for even `a` and `b`.
///
/// Γ splits into orbits `{x, x+ι, ω−x, ω−x+ι}`, each filling a 2×2 block with
/// rows `(x, ω−x)` and `(ω−x+ι, x+ι)`: row sum ω, column sum ω+ι. The blocks
/// are then glued into `a × b` rectangles.
pub fn mrs_even_even(a: usize, b: usize, c: usize, gamma: &AbelianGroup) -> Result<MagicRectangleSet> {
    if a % 2 == 1 || b % 2 == 1 || a == 0 || b == 0 {
        return Err(Error::Precondition(format!("{a}x{b}: both sides must be even")));
    }
    if (a * b * c) as u64 != gamma.order() {
        return Err(Error::OrderMismatch {
            product: (a * b * c) as u64,
            order: gamma.order(),
        });
    }
    let (omega, iota) = block_constants(gamma).ok_or_else(|| {
        Error::SearchExhausted(format!("no admissible block constants in {gamma}"))
    })?;
    let n = gamma.order() as usize;
    let mut used = vec![false; n];
    let mut blocks = Vec::with_capacity(n / 4);
    for idx in 0..n {
        if used[idx] {
            continue;
        }
        let x = gamma.element_at(idx);
        let y = gamma.sub(&omega, &x);
        let block = vec![
            vec![x.clone(), y.clone()],
            vec![gamma.add(&y, &iota), gamma.add(&x, &iota)],
        ];
        for e in block.iter().flatten() {
            used[gamma.index_of(e)] = true;
        }
        blocks.push(block);
    }
    let tiles = checked(MagicRectangleSet {
        group: gamma.clone(),
        a: 2,
        b: 2,
        c: n / 4,
        rectangles: blocks,
        delta: gamma.add(&omega, &iota),
        omega,
    })?;
    glue(&tiles, a, b)
}
