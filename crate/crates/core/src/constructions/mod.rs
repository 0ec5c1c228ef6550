//! Magic rectangle (set) constructions and the dispatcher over them.

mod classical;
mod even;
mod lifting;
mod power_of_two;
mod residual_search;
mod verify;

use crate::decider::{decide, Route, Status};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};
use crate::kotzig::Grid;

pub use classical::{classical_mr, mr_odd_primes, mr_zp_zp, IntegerRectangle};
pub use even::mrs_even_even;
pub use lifting::{glue, lift_rectangle, mrs_both_odd_factor, residual_rectangles};
pub use power_of_two::{mr_p_power_of_two, mrs_odd_power_of_two};
pub use verify::{verify_mrs, MrsFailure, MrsReport};

/// A single Γ-magic rectangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagicRectangle {
    pub group: AbelianGroup,
    pub a: usize,
    pub b: usize,
    pub grid: Grid,
    pub omega: GroupElement,
    pub delta: GroupElement,
}

impl MagicRectangle {
    pub fn into_set(self) -> MagicRectangleSet {
        MagicRectangleSet {
            group: self.group,
            a: self.a,
            b: self.b,
            c: 1,
            rectangles: vec![self.grid],
            omega: self.omega,
            delta: self.delta,
        }
    }

    pub fn transpose(&self) -> MagicRectangle {
        MagicRectangle {
            group: self.group.clone(),
            a: self.b,
            b: self.a,
            grid: transpose_grid(&self.grid),
            omega: self.delta.clone(),
            delta: self.omega.clone(),
        }
    }
}

/// `c` rectangles of shape `a × b` that partition Γ and share `(ω, δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagicRectangleSet {
    pub group: AbelianGroup,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub rectangles: Vec<Grid>,
    pub omega: GroupElement,
    pub delta: GroupElement,
}

impl MagicRectangleSet {
    /// Transposes every rectangle, swapping the roles of ω and δ.
    pub fn transpose(&self) -> MagicRectangleSet {
        MagicRectangleSet {
            group: self.group.clone(),
            a: self.b,
            b: self.a,
            c: self.c,
            rectangles: self.rectangles.iter().map(transpose_grid).collect(),
            omega: self.delta.clone(),
            delta: self.omega.clone(),
        }
    }

    pub fn rectangle(&self, s: usize) -> MagicRectangle {
        MagicRectangle {
            group: self.group.clone(),
            a: self.a,
            b: self.b,
            grid: self.rectangles[s].clone(),
            omega: self.omega.clone(),
            delta: self.delta.clone(),
        }
    }
}

pub(crate) fn transpose_grid(grid: &Grid) -> Grid {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| (0..rows).map(|i| grid[i][j].clone()).collect())
        .collect()
}

/// Returns `mrs` if it verifies, otherwise an [`Error::Unverified`].
pub(crate) fn checked(mrs: MagicRectangleSet) -> Result<MagicRectangleSet> {
    let report = verify_mrs(&mrs);
    if report.is_valid() {
        Ok(mrs)
    } else {
        Err(Error::Unverified(report.to_string()))
    }
}

pub(crate) fn checked_mr(mr: MagicRectangle) -> Result<MagicRectangle> {
    checked(mr.clone().into_set())?;
    Ok(mr)
}

/// Builds an `MRS_Γ(a, b; c)` along the route chosen by [`decide`].
pub fn construct(a: usize, b: usize, c: usize, gamma: &AbelianGroup) -> Result<MagicRectangleSet> {
    let verdict = decide(a, b, c, gamma)?;
    if verdict.status != Status::Exists {
        return Err(Error::NotConstructible(verdict));
    }
    match verdict.route.expect("Exists verdicts carry a route") {
        Route::Trivial => checked(MagicRectangleSet {
            group: gamma.clone(),
            a,
            b,
            c,
            rectangles: vec![vec![vec![gamma.zero()]]],
            omega: gamma.zero(),
            delta: gamma.zero(),
        }),
        Route::EvenEven => mrs_even_even(a, b, c, gamma),
        Route::BothOddFactor => mrs_both_odd_factor(a, b, c, gamma),
        Route::OddPowerOfTwo => {
            if a % 2 == 1 {
                mrs_odd_power_of_two(a, b.trailing_zeros(), c, gamma)
            } else {
                Ok(mrs_odd_power_of_two(b, a.trailing_zeros(), c, gamma)?.transpose())
            }
        }
    }
}
