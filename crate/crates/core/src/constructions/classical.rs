use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use super::{checked_mr, MagicRectangle};
use crate::error::{Error, Result};
use crate::group::{is_prime, AbelianGroup, GroupElement};

/// Node budget for the classical search. Every odd shape up to 7×7 finishes
/// far below this.
const CLASSICAL_BUDGET: u64 = 200_000_000;

/// A magic rectangle on the integers `1..=ab`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerRectangle {
    pub a: usize,
    pub b: usize,
    pub grid: Vec<Vec<u64>>,
    pub row_sum: u64,
    pub col_sum: u64,
}

impl IntegerRectangle {
    pub fn transpose(&self) -> IntegerRectangle {
        IntegerRectangle {
            a: self.b,
            b: self.a,
            grid: (0..self.b)
                .map(|j| (0..self.a).map(|i| self.grid[i][j]).collect())
                .collect(),
            row_sum: self.col_sum,
            col_sum: self.row_sum,
        }
    }
}

/// `MR_Γ(p, p)` over `Z_p × Z_p` with entry `(i, j)` in row `i`, column `j`.
pub fn mr_zp_zp(p: u64) -> Result<MagicRectangle> {
    if p < 3 || !is_prime(p) {
        return Err(Error::Precondition(format!("{p} is not an odd prime")));
    }
    let group = AbelianGroup::from_canonical(&[p, p])?;
    let grid = (0..p)
        .map(|i| (0..p).map(|j| GroupElement(vec![i, j])).collect())
        .collect();
    checked_mr(MagicRectangle {
        a: p as usize,
        b: p as usize,
        grid,
        omega: group.zero(),
        delta: group.zero(),
        group,
    })
}

fn classical_cache() -> &'static RwLock<HashMap<(usize, usize), IntegerRectangle>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), IntegerRectangle>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// An odd × odd magic rectangle on `1..=ab`, found by backtracking and cached.
pub fn classical_mr(a: usize, b: usize) -> Result<IntegerRectangle> {
    if a % 2 == 0 || b % 2 == 0 || a < 3 || b < 3 {
        return Err(Error::Precondition(format!(
            "classical rectangles are built for odd sides >= 3, got {a}x{b}"
        )));
    }
    if a > b {
        return Ok(classical_mr(b, a)?.transpose());
    }
    if let Some(hit) = classical_cache().read().expect("cache poisoned").get(&(a, b)) {
        return Ok(hit.clone());
    }
    let grid = if a == b {
        siamese_square(a)
    } else {
        search_classical(a, b, CLASSICAL_BUDGET).ok_or(Error::SearchBudget { a, b })?
    };
    let n = (a * b) as u64;
    let rect = IntegerRectangle {
        a,
        b,
        grid,
        row_sum: b as u64 * (n + 1) / 2,
        col_sum: a as u64 * (n + 1) / 2,
    };
    classical_cache()
        .write()
        .expect("cache poisoned")
        .insert((a, b), rect.clone());
    Ok(rect)
}

/// The odd-order magic square built by stepping up and right, dropping down
/// one row when the target cell is taken.
fn siamese_square(n: usize) -> Vec<Vec<u64>> {
    let mut grid = vec![vec![0u64; n]; n];
    let (mut r, mut c) = (0, n / 2);
    for v in 1..=(n * n) as u64 {
        grid[r][c] = v;
        let (up, right) = ((r + n - 1) % n, (c + 1) % n);
        if grid[up][right] == 0 {
            (r, c) = (up, right);
        } else {
            r = (r + 1) % n;
        }
    }
    grid
}

struct Classical {
    a: usize,
    b: usize,
    n: u64,
    row_target: u64,
    col_target: u64,
    grid: Vec<Vec<u64>>,
    used: Vec<bool>,
    row_part: Vec<u64>,
    col_part: Vec<u64>,
    nodes: u64,
    budget: u64,
}

impl Classical {
    /// Smallest and largest sums of `k` distinct unused values.
    fn bounds(&self, k: usize) -> (u64, u64) {
        let mut lo = 0;
        let mut taken = 0;
        for v in 1..=self.n {
            if taken == k {
                break;
            }
            if !self.used[v as usize] {
                lo += v;
                taken += 1;
            }
        }
        let mut hi = 0;
        taken = 0;
        for v in (1..=self.n).rev() {
            if taken == k {
                break;
            }
            if !self.used[v as usize] {
                hi += v;
                taken += 1;
            }
        }
        (lo, hi)
    }

    fn feasible(&self, partial: u64, target: u64, remaining: usize) -> bool {
        if partial > target {
            return false;
        }
        if remaining == 0 {
            return partial == target;
        }
        let (lo, hi) = self.bounds(remaining);
        let need = target - partial;
        lo <= need && need <= hi
    }

    fn candidates(&self, i: usize, j: usize) -> Vec<u64> {
        let (a, b) = (self.a, self.b);
        let forced = if i == a - 1 {
            Some(self.col_target.checked_sub(self.col_part[j]))
        } else if j == b - 1 {
            Some(self.row_target.checked_sub(self.row_part[i]))
        } else {
            None
        };
        let mut lower = 1;
        // symmetry: 1 at the corner, first column and first row increasing
        if i == 0 && j == 0 {
            return vec![1];
        }
        if j == 0 {
            lower = self.grid[i - 1][0] + 1;
        }
        if i == 0 {
            lower = lower.max(self.grid[0][j - 1] + 1);
        }
        match forced {
            Some(Some(v)) if v >= lower && v <= self.n => vec![v],
            Some(_) => Vec::new(),
            None => (lower..=self.n).collect(),
        }
    }

    fn go(&mut self, cell: usize) -> bool {
        if cell == self.a * self.b {
            return true;
        }
        let (i, j) = (cell % self.a, cell / self.a);
        for v in self.candidates(i, j) {
            if self.used[v as usize] {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            self.used[v as usize] = true;
            self.row_part[i] += v;
            self.col_part[j] += v;
            self.grid[i][j] = v;
            let ok = self.feasible(self.row_part[i], self.row_target, self.b - 1 - j)
                && self.feasible(self.col_part[j], self.col_target, self.a - 1 - i);
            if ok && self.go(cell + 1) {
                return true;
            }
            self.used[v as usize] = false;
            self.row_part[i] -= v;
            self.col_part[j] -= v;
            self.grid[i][j] = 0;
        }
        false
    }
}

/// Column-major backtracking with forced last cells, sum bounds, and the
/// row/column permutation symmetry broken by sorting the first row and column.
fn search_classical(a: usize, b: usize, budget: u64) -> Option<Vec<Vec<u64>>> {
    let n = (a * b) as u64;
    let mut s = Classical {
        a,
        b,
        n,
        row_target: b as u64 * (n + 1) / 2,
        col_target: a as u64 * (n + 1) / 2,
        grid: vec![vec![0; b]; a],
        used: vec![false; n as usize + 1],
        row_part: vec![0; a],
        col_part: vec![0; b],
        nodes: 0,
        budget,
    };
    if s.go(0) {
        Some(s.grid)
    } else {
        None
    }
}

/// Units of `Z_p`, `len` of them, summing to zero: `1, 1, −2` then `±1` pairs.
fn zero_sum_units(p: u64, len: usize) -> Vec<u64> {
    let mut m = vec![1, 1, p - 2];
    while m.len() < len {
        m.extend([1, p - 1]);
    }
    m
}

/// `MR(p, q)` over `Z_p × Z_q`, `p ≠ q` odd primes, entries as `(u, v)`.
///
/// Entry `(i, j)` is `(m_j·i, n_i·j)` with unit multipliers, `Σ m_j = 0` and
/// `Σ n_i = 0`, so every row and column sums to zero. Taking `n_i = 1` for
/// `i ≥ 1` makes the entries distinct; that needs `n_0 = 1 − p` to be a unit
/// mod `q`. Otherwise `q ≢ 1 (mod p)` and the roles of rows and columns swap.
fn multiplier_grid(p: u64, q: u64) -> Vec<Vec<(u64, u64)>> {
    let (pu, qu) = (p as usize, q as usize);
    let (m, n): (Vec<u64>, Vec<u64>) = if p % q != 1 {
        let mut n = vec![1; pu];
        n[0] = (q - (p - 1) % q) % q;
        (zero_sum_units(p, qu), n)
    } else {
        let mut m = vec![1; qu];
        m[0] = (p - (q - 1) % p) % p;
        (m, zero_sum_units(q, pu))
    };
    (0..p)
        .map(|i| {
            (0..q)
                .map(|j| (m[j as usize] * i % p, n[i as usize] * j % q))
                .collect()
        })
        .collect()
}

/// `MR_Γ(p1, p2)` for odd primes `p1, p2` with `|Γ| = p1·p2`.
///
/// `Z_p × Z_p` gets the coordinate grid. A cyclic group of order `p²` gets
/// the odd magic square reduced modulo `p²`. For `p1 ≠ p2` the multiplier grid
/// is translated by `(p1·p2 + 1)/2`, which gives the same sums as an integer
/// magic rectangle on `1..=p1·p2` reduced modulo `p1·p2`.
pub fn mr_odd_primes(group: &AbelianGroup, p1: u64, p2: u64) -> Result<MagicRectangle> {
    let odd_prime = |p: u64| p >= 3 && is_prime(p);
    if !odd_prime(p1) || !odd_prime(p2) || group.order() != p1 * p2 {
        return Err(Error::Precondition(format!(
            "{group} is not of order p1*p2 for odd primes {p1}, {p2}"
        )));
    }
    if !group.is_cyclic() {
        return mr_zp_zp(p1);
    }
    let n = p1 * p2;
    let (grid, omega, delta): (Vec<Vec<GroupElement>>, _, _) = if p1 == p2 {
        let rect = classical_mr(p1 as usize, p2 as usize)?;
        let to_group = |v: u64| group.from_integer(v as i64);
        let grid = rect
            .grid
            .iter()
            .map(|row| row.iter().map(|&v| to_group(v)).collect())
            .collect();
        (grid, to_group(rect.row_sum), to_group(rect.col_sum))
    } else {
        let shift = group.from_integer(((n + 1) / 2) as i64);
        // canonical coordinates of Z_{p1 p2} are ordered by prime
        let element = |(u, v): (u64, u64)| {
            let coords = if p1 < p2 { vec![u, v] } else { vec![v, u] };
            group.add(&GroupElement(coords), &shift)
        };
        let grid = multiplier_grid(p1, p2)
            .into_iter()
            .map(|row| row.into_iter().map(element).collect())
            .collect();
        (grid, group.scale(p2 as i64, &shift), group.scale(p1 as i64, &shift))
    };
    checked_mr(MagicRectangle {
        group: group.clone(),
        a: p1 as usize,
        b: p2 as usize,
        grid,
        omega,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_integer(r: &IntegerRectangle) {
        let n = (r.a * r.b) as u64;
        let mut all: Vec<u64> = r.grid.iter().flatten().copied().collect();
        all.sort();
        assert_eq!(all, (1..=n).collect::<Vec<_>>());
        for row in &r.grid {
            assert_eq!(row.iter().sum::<u64>(), r.row_sum);
        }
        for j in 0..r.b {
            assert_eq!(r.grid.iter().map(|row| row[j]).sum::<u64>(), r.col_sum);
        }
    }

    #[test]
    fn classical_constants() {
        for (a, b, rs, cs) in [(3, 5, 40, 24), (3, 3, 15, 15), (3, 7, 77, 33)] {
            let r = classical_mr(a, b).unwrap();
            assert_eq!((r.row_sum, r.col_sum), (rs, cs));
            check_integer(&r);
        }
    }

    #[test]
    fn classical_transposes_wide_requests() {
        let r = classical_mr(5, 3).unwrap();
        assert_eq!((r.a, r.b, r.row_sum, r.col_sum), (5, 3, 24, 40));
        check_integer(&r);
    }

    #[test]
    fn classical_rejects_even_sides() {
        assert!(classical_mr(2, 3).is_err());
        assert!(classical_mr(1, 3).is_err());
    }

    #[test]
    fn zp_zp_grid() {
        for p in [3, 5, 7] {
            let m = mr_zp_zp(p).unwrap();
            assert_eq!(m.omega, m.group.zero());
            assert_eq!(m.delta, m.group.zero());
        }
        let m = mr_zp_zp(3).unwrap();
        assert_eq!(
            m.grid[1],
            vec![GroupElement(vec![1, 0]), GroupElement(vec![1, 1]), GroupElement(vec![1, 2])]
        );
        assert!(mr_zp_zp(2).is_err());
        assert!(mr_zp_zp(9).is_err());
    }

    #[test]
    fn odd_primes_cyclic_constants() {
        let z15 = AbelianGroup::parse("Z15").unwrap();
        let m = mr_odd_primes(&z15, 3, 5).unwrap();
        assert_eq!(m.omega, z15.from_integer(10));
        assert_eq!(m.delta, z15.from_integer(9));

        let z9 = AbelianGroup::parse("Z9").unwrap();
        let m = mr_odd_primes(&z9, 3, 3).unwrap();
        assert_eq!(m.omega, z9.from_integer(6));
        assert_eq!(m.delta, z9.from_integer(6));

        let z33 = AbelianGroup::parse("Z3xZ3").unwrap();
        let m = mr_odd_primes(&z33, 3, 3).unwrap();
        assert_eq!(m.omega, z33.zero());

        assert!(mr_odd_primes(&AbelianGroup::parse("Z6").unwrap(), 2, 3).is_err());
    }

    #[test]
    fn siamese_squares() {
        for n in [3, 5, 7, 9] {
            let r = classical_mr(n, n).unwrap();
            check_integer(&r);
        }
    }

    #[test]
    fn multiplier_grids_cover_the_group() {
        // includes pairs with p ≡ 1 (mod q) in either order
        for (p, q) in [(3, 5), (5, 3), (3, 7), (7, 3), (5, 7), (11, 5), (13, 3), (7, 29)] {
            let grp = AbelianGroup::from_cyclic_factors(&[p * q]).unwrap();
            let m = mr_odd_primes(&grp, p, q).unwrap();
            assert_eq!((m.a as u64, m.b as u64), (p, q));
            assert_eq!(m.omega, grp.from_integer((q * (p * q + 1) / 2) as i64));
        }
    }
}
