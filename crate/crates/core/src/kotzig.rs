//! Γ-Kotzig arrays: `j × |Γ|` grids whose rows are permutations of Γ and whose
//! columns all sum to zero, with an all-zero first column.
//!
//! Even `j` uses negation row pairs. Odd `j` starts from a three-row base
//! `(x, σ(x), −x−σ(x))` where `σ` is a complete mapping (the identity for odd
//! order groups, giving `(x, x, −2x)`) and appends negation pairs.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement, QuotientView};

pub type Grid = Vec<Vec<GroupElement>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KotzigArray {
    group: AbelianGroup,
    grid: Grid,
}

impl KotzigArray {
    /// Wraps a grid without checking it; see [`verify_kotzig`].
    pub fn from_grid(group: AbelianGroup, grid: Grid) -> Self {
        KotzigArray { group, grid }
    }

    pub fn group(&self) -> &AbelianGroup {
        &self.group
    }

    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> &GroupElement {
        &self.grid[row][col]
    }

    #[cfg(test)]
    pub(crate) fn grid_mut(&mut self) -> &mut Grid {
        &mut self.grid
    }
}

/// A quotient Kotzig array lifted to coset representatives in the parent
/// group, with every column summing to the parent's zero.
#[derive(Clone, Debug)]
pub struct LiftedKotzig {
    quotient: QuotientView,
    grid: Grid,
}

impl LiftedKotzig {
    pub fn from_grid(quotient: QuotientView, grid: Grid) -> Self {
        LiftedKotzig { quotient, grid }
    }

    pub fn quotient(&self) -> &QuotientView {
        &self.quotient
    }

    pub fn rows(&self) -> usize {
        self.grid.len()
    }

    pub fn columns(&self) -> usize {
        self.quotient.coset_count()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, row: usize, col: usize) -> &GroupElement {
        &self.grid[row][col]
    }
}

pub fn kotzig_exists(j: usize, group: &AbelianGroup) -> bool {
    j > 1 && (j % 2 == 0 || group.is_in_class_g())
}

pub fn build_kotzig(j: usize, group: &AbelianGroup) -> Result<KotzigArray> {
    if !kotzig_exists(j, group) {
        return Err(Error::KotzigMissing {
            rows: j,
            group: group.to_string(),
        });
    }
    let elems: Vec<GroupElement> = group.elements().collect();
    let negated: Vec<GroupElement> = elems.iter().map(|x| group.neg(x)).collect();
    let mut grid: Grid = Vec::with_capacity(j);
    let mut pairs = j / 2;
    if j % 2 == 1 {
        let sigma = orthomorphic_mapping(group).ok_or_else(|| Error::KotzigMissing {
            rows: j,
            group: group.to_string(),
        })?;
        let second: Vec<GroupElement> = sigma.iter().map(|&i| elems[i].clone()).collect();
        let third = elems
            .iter()
            .zip(&second)
            .map(|(x, s)| group.neg(&group.add(x, s)))
            .collect();
        grid.push(elems.clone());
        grid.push(second);
        grid.push(third);
        pairs -= 1;
    }
    for _ in 0..pairs {
        grid.push(elems.clone());
        grid.push(negated.clone());
    }
    // Shift each row so the first column is zero. Column sums move by the
    // same constant, and column 0 now sums to zero, so every column does.
    for row in &mut grid {
        let first = row[0].clone();
        for x in row.iter_mut() {
            *x = group.sub(x, &first);
        }
    }
    Ok(KotzigArray {
        group: group.clone(),
        grid,
    })
}

/// A permutation by element index.
pub type Permutation = Vec<usize>;

fn cache() -> &'static RwLock<HashMap<Vec<u64>, Option<Permutation>>> {
    static CACHE: OnceLock<RwLock<HashMap<Vec<u64>, Option<Permutation>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Searches the whole group for a complete mapping `σ` (both `σ` and
/// `x ↦ x + σ(x)` are bijections) with `σ(0) = 0`.
///
/// The search is exhaustive: `None` means no complete mapping exists.
/// Fixing `σ(0) = 0` loses nothing, since `σ − σ(0)` is complete whenever `σ` is.
/// Results are memoised per canonical group.
pub fn complete_mapping(group: &AbelianGroup) -> Option<Permutation> {
    let key = group.moduli().to_vec();
    if let Some(hit) = cache().read().expect("cache poisoned").get(&key) {
        return hit.clone();
    }
    let found = search_complete_mapping(group).0;
    cache()
        .write()
        .expect("cache poisoned")
        .entry(key)
        .or_insert(found)
        .clone()
}

/// Backtracking search; returns the mapping and the number of nodes visited.
pub fn search_complete_mapping(group: &AbelianGroup) -> (Option<Permutation>, u64) {
    let n = group.order() as usize;
    let elems: Vec<GroupElement> = group.elements().collect();
    let add: Vec<Vec<usize>> = elems
        .iter()
        .map(|x| elems.iter().map(|y| group.index_of(&group.add(x, y))).collect())
        .collect();
    let mut sigma = vec![usize::MAX; n];
    let mut image_used = vec![false; n];
    let mut sum_used = vec![false; n];
    sigma[0] = 0;
    image_used[0] = true;
    sum_used[0] = true;
    let mut nodes = 0u64;

    fn go(
        x: usize,
        add: &[Vec<usize>],
        sigma: &mut [usize],
        image_used: &mut [bool],
        sum_used: &mut [bool],
        nodes: &mut u64,
    ) -> bool {
        let n = sigma.len();
        if x == n {
            return true;
        }
        for y in 0..n {
            if image_used[y] {
                continue;
            }
            let s = add[x][y];
            if sum_used[s] {
                continue;
            }
            *nodes += 1;
            sigma[x] = y;
            image_used[y] = true;
            sum_used[s] = true;
            if go(x + 1, add, sigma, image_used, sum_used, nodes) {
                return true;
            }
            image_used[y] = false;
            sum_used[s] = false;
        }
        sigma[x] = usize::MAX;
        false
    }

    if go(1, &add, &mut sigma, &mut image_used, &mut sum_used, &mut nodes) {
        (Some(sigma), nodes)
    } else {
        (None, nodes)
    }
}

/// `Z_2 × Z_n`, `n` even, with `m = n/2`:
/// `(0, k) ↦ ([k ≥ m], k)` and `(1, k) ↦ (1 − [k+1 ≥ m], k+1)`.
/// Sums land on `(·, 2k)` and `(·, 2k+1)`; `k` and `k+m` share a second
/// coordinate and are told apart by the first.
fn z2_by_even_mapping(group: &AbelianGroup) -> Permutation {
    let n = group.moduli()[1];
    let m = n / 2;
    group
        .elements()
        .map(|x| {
            let (e, k) = (x.0[0], x.0[1]);
            let image = if e == 0 {
                vec![u64::from(k >= m), k]
            } else {
                let k1 = (k + 1) % n;
                vec![1 - u64::from(k1 >= m), k1]
            };
            group.index_of(&GroupElement(image))
        })
        .collect()
}

/// Combines complete mappings of a subgroup `N` and of `Γ/N`:
/// `t_q + n ↦ t_{ψ(q)} + φ(n)` over the quotient's transversal. Both the map
/// and `x ↦ x + θ(x)` permute cosets through `ψ` and act bijectively inside
/// each coset through `φ`.
fn extend_mapping(
    q: &crate::group::QuotientView,
    on_sub: &Permutation,
    on_quotient: &Permutation,
) -> Permutation {
    let group = q.parent();
    let sub = q.subgroup();
    let quotient = q.abstract_form();
    group
        .elements()
        .map(|x| {
            let qi = q.project(&x);
            let rep = q.lift(&quotient.element_at(qi));
            let n = sub.pull_back(&group.sub(&x, &rep)).expect("x − rep lies in N");
            let n_image = sub.abstract_form().element_at(on_sub[sub.abstract_form().index_of(&n)]);
            let q_image = q.lift(&quotient.element_at(on_quotient[qi]));
            group.index_of(&group.add(&q_image, &sub.embed(&n_image)))
        })
        .collect()
}

/// A complete mapping of a non-cyclic 2-group of rank 2 or 3, built without
/// search except for `(Z_2)^3`. `Z_2 × Z_n` is explicit; otherwise the Klein
/// subgroup in the two largest factors is split off and the quotient, again of
/// rank at least 2, is handled recursively.
fn two_group_mapping(group: &AbelianGroup) -> Option<Permutation> {
    let exps: Vec<u32> = group.two_exponents();
    if group.order() == 1 {
        return Some(vec![0]);
    }
    if exps.len() < 2 || group.odd_part().order() != 1 {
        return None;
    }
    if exps.len() == 2 && exps[0] == 1 {
        return Some(z2_by_even_mapping(group));
    }
    if exps.iter().all(|&e| e == 1) && exps.len() == 3 {
        return complete_mapping(group);
    }
    if exps.len() > 3 {
        return complete_mapping(group);
    }
    let klein = AbelianGroup::from_canonical(&[2, 2]).expect("Z2xZ2");
    let sub = group.subgroup_with_shape(&klein).ok()?;
    let q = group.quotient(&sub).ok()?;
    let on_sub = z2_by_even_mapping(sub.abstract_form());
    let on_quotient = two_group_mapping(q.abstract_form())?;
    Some(extend_mapping(&q, &on_sub, &on_quotient))
}

/// A complete mapping assembled factor-wise: the identity on the odd part and
/// a constructed complete mapping on each block of two (or a final three)
/// cyclic 2-factors. Returns `None` only when the group has a unique
/// involution.
pub fn orthomorphic_mapping(group: &AbelianGroup) -> Option<Permutation> {
    let two: Vec<usize> = (0..group.rank()).filter(|&t| group.prime_of(t) == 2).collect();
    if two.len() == 1 {
        return None;
    }
    let mut blocks: Vec<Vec<usize>> = two.chunks(2).map(|c| c.to_vec()).collect();
    if blocks.last().is_some_and(|b| b.len() == 1) {
        let tail = blocks.pop().expect("non-empty");
        blocks.last_mut().expect("at least two factors").extend(tail);
    }
    let mut block_maps = Vec::with_capacity(blocks.len());
    for b in &blocks {
        let moduli: Vec<u64> = b.iter().map(|&t| group.moduli()[t]).collect();
        let sub = AbelianGroup::from_canonical(&moduli).expect("sorted 2-factors");
        let sigma = two_group_mapping(&sub)?;
        block_maps.push((sub, sigma));
    }
    let map = group
        .elements()
        .map(|x| {
            let mut y = x.clone();
            for (b, (sub, sigma)) in blocks.iter().zip(&block_maps) {
                let local = GroupElement(b.iter().map(|&t| x.0[t]).collect());
                let image = sub.element_at(sigma[sub.index_of(&local)]);
                for (k, &t) in b.iter().enumerate() {
                    y.0[t] = image.0[k];
                }
            }
            group.index_of(&y)
        })
        .collect();
    Some(map)
}

/// Lifts a Kotzig array over `Γ/Γ₀` to representatives in `Γ`, then repairs
/// each column to sum to exactly zero by moving the last row's entry within
/// its coset.
pub fn lift_kotzig_zero_sum(q: &QuotientView, ka: &KotzigArray) -> Result<LiftedKotzig> {
    if ka.group() != q.abstract_form() {
        return Err(Error::Precondition(format!(
            "Kotzig array is over {}, quotient is {}",
            ka.group(),
            q.abstract_form()
        )));
    }
    let parent = q.parent();
    let mut grid: Grid = ka
        .grid()
        .iter()
        .map(|row| row.iter().map(|y| q.lift(y)).collect())
        .collect();
    if let Some(last) = grid.len().checked_sub(1) {
        for col in 0..q.coset_count() {
            let s = parent.sum(grid.iter().map(|row| &row[col]));
            debug_assert!(q.subgroup().contains(&s));
            grid[last][col] = parent.sub(&grid[last][col], &s);
        }
    }
    Ok(LiftedKotzig {
        quotient: q.clone(),
        grid,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KotzigViolation {
    pub kind: &'static str,
    pub row: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KotzigReport {
    pub violation: Option<KotzigViolation>,
}

impl KotzigReport {
    pub fn is_valid(&self) -> bool {
        self.violation.is_none()
    }

    fn fail(kind: &'static str, row: usize, column: usize) -> Self {
        KotzigReport {
            violation: Some(KotzigViolation { kind, row, column }),
        }
    }
}

pub trait VerifyKotzig {
    fn verify(&self) -> KotzigReport;
}

pub fn verify_kotzig<K: VerifyKotzig>(k: &K) -> KotzigReport {
    k.verify()
}

/// Shared checks; `class_of` maps an entry to the symbol whose row-wise
/// distinctness is required, `symbols` is how many there are.
fn check_grid(
    group: &AbelianGroup,
    grid: &Grid,
    symbols: usize,
    class_of: impl Fn(&GroupElement) -> usize,
) -> KotzigReport {
    for (i, row) in grid.iter().enumerate() {
        if row.len() != symbols {
            return KotzigReport::fail("shape", i, row.len().min(symbols));
        }
        for (j, x) in row.iter().enumerate() {
            if !group.contains(x) {
                return KotzigReport::fail("entry not in group", i, j);
            }
        }
    }
    for (i, row) in grid.iter().enumerate() {
        let mut seen = vec![false; symbols];
        for (j, x) in row.iter().enumerate() {
            let c = class_of(x);
            if seen[c] {
                return KotzigReport::fail("row not a permutation", i, j);
            }
            seen[c] = true;
        }
    }
    for (i, row) in grid.iter().enumerate() {
        if let Some(x) = row.first() {
            if *x != group.zero() {
                return KotzigReport::fail("first column", i, 0);
            }
        }
    }
    for j in 0..symbols {
        if group.sum(grid.iter().map(|row| &row[j])) != group.zero() {
            return KotzigReport::fail("column sum", grid.len().saturating_sub(1), j);
        }
    }
    KotzigReport { violation: None }
}

impl VerifyKotzig for KotzigArray {
    fn verify(&self) -> KotzigReport {
        let g = &self.group;
        check_grid(g, &self.grid, g.order() as usize, |x| g.index_of(x))
    }
}

impl VerifyKotzig for LiftedKotzig {
    fn verify(&self) -> KotzigReport {
        let q = &self.quotient;
        check_grid(q.parent(), &self.grid, q.coset_count(), |x| q.project(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_complete(group: &AbelianGroup, sigma: &Permutation) -> bool {
        let n = group.order() as usize;
        let mut image = vec![false; n];
        let mut sums = vec![false; n];
        for (i, x) in group.elements().enumerate() {
            let y = group.element_at(sigma[i]);
            image[sigma[i]] = true;
            sums[group.index_of(&group.add(&x, &y))] = true;
        }
        image.iter().all(|&b| b) && sums.iter().all(|&b| b)
    }

    #[test]
    fn constructed_two_group_mappings() {
        for spec in [
            "Z2xZ2", "Z2xZ16", "Z2xZ64", "Z4xZ4", "Z4xZ32", "Z8xZ8", "Z2xZ2xZ2", "Z2xZ2xZ8",
            "Z2xZ4xZ4", "Z4xZ8xZ16",
        ] {
            let grp = AbelianGroup::parse(spec).unwrap();
            let sigma = two_group_mapping(&grp).unwrap();
            assert!(is_complete(&grp, &sigma), "{spec}");
        }
        assert!(two_group_mapping(&AbelianGroup::parse("Z8").unwrap()).is_none());
    }

    fn g(spec: &str) -> AbelianGroup {
        AbelianGroup::parse(spec).unwrap()
    }

    #[test]
    fn existence_predicate() {
        assert!(kotzig_exists(2, &g("Z6")));
        assert!(!kotzig_exists(3, &g("Z6")));
        assert!(!kotzig_exists(1, &g("Z5")));
        assert!(kotzig_exists(3, &g("Z2xZ2")));
    }

    #[test]
    fn two_rows_negate() {
        let grp = g("Z2xZ4");
        let ka = build_kotzig(2, &grp).unwrap();
        assert!(verify_kotzig(&ka).is_valid());
        for c in 0..8 {
            assert_eq!(grp.add(ka.get(0, c), ka.get(1, c)), grp.zero());
        }
    }

    #[test]
    fn three_rows_odd_order() {
        let grp = g("Z5");
        let ka = build_kotzig(3, &grp).unwrap();
        assert!(verify_kotzig(&ka).is_valid());
        for c in 0..5 {
            let x = ka.get(0, c);
            assert_eq!(ka.get(1, c), x);
            assert_eq!(*ka.get(2, c), grp.scale(-2, x));
        }
    }

    #[test]
    fn three_rows_klein() {
        let ka = build_kotzig(3, &g("Z2xZ2")).unwrap();
        assert!(verify_kotzig(&ka).is_valid());
    }

    #[test]
    fn missing_kotzig_is_an_error() {
        assert!(matches!(
            build_kotzig(3, &g("Z6")),
            Err(Error::KotzigMissing { rows: 3, .. })
        ));
        assert!(build_kotzig(1, &g("Z3")).is_err());
    }

    #[test]
    fn complete_mapping_examples() {
        let k = g("Z2xZ2");
        let sigma = complete_mapping(&k).unwrap();
        let mut sums: Vec<usize> = (0..4)
            .map(|x| k.index_of(&k.add(&k.element_at(x), &k.element_at(sigma[x]))))
            .collect();
        sums.sort();
        assert_eq!(sums, vec![0, 1, 2, 3]);
        assert!(complete_mapping(&g("Z4")).is_none());
        assert!(complete_mapping(&g("Z5")).is_some());
    }

    #[test]
    fn orthomorphic_mapping_splits_blocks() {
        for spec in ["Z2xZ2xZ2", "Z2xZ4xZ3", "Z2xZ2xZ2xZ2xZ2", "Z4xZ4", "Z9"] {
            let grp = g(spec);
            let sigma = orthomorphic_mapping(&grp).unwrap();
            let n = grp.order() as usize;
            let mut img = vec![false; n];
            let mut sum = vec![false; n];
            for (x, &y) in sigma.iter().enumerate() {
                img[y] = true;
                sum[grp.index_of(&grp.add(&grp.element_at(x), &grp.element_at(y)))] = true;
            }
            assert!(img.iter().all(|&b| b) && sum.iter().all(|&b| b), "{spec}");
        }
        assert!(orthomorphic_mapping(&g("Z8xZ3")).is_none());
    }

    #[test]
    fn lift_sums_to_exact_zero() {
        let grp = g("Z4xZ2");
        let h = grp.subgroup_of_order(2).unwrap();
        let q = grp.quotient(&h).unwrap();
        let ka = build_kotzig(2, q.abstract_form()).unwrap();
        let lk = lift_kotzig_zero_sum(&q, &ka).unwrap();
        assert!(verify_kotzig(&lk).is_valid());
        for c in 0..q.coset_count() {
            assert_eq!(grp.add(lk.get(0, c), lk.get(1, c)), grp.zero());
        }
        assert!(lk.grid().iter().all(|row| row[0] == grp.zero()));
    }

    #[test]
    fn lift_over_trivial_quotient() {
        let grp = g("Z3xZ3");
        let q = grp.quotient(&grp.subgroup_of_order(9).unwrap()).unwrap();
        let ka = build_kotzig(3, q.abstract_form()).unwrap();
        let lk = lift_kotzig_zero_sum(&q, &ka).unwrap();
        assert!(lk.grid().iter().flatten().all(|x| *x == grp.zero()));
    }

    #[test]
    fn lift_rejects_wrong_group() {
        let grp = g("Z4xZ2");
        let q = grp.quotient(&grp.subgroup_of_order(2).unwrap()).unwrap();
        let ka = build_kotzig(2, &g("Z4")).unwrap();
        assert!(lift_kotzig_zero_sum(&q, &ka).is_err());
    }

    #[test]
    fn verifier_catches_mutations() {
        let grp = g("Z3xZ3");
        let mut ka = build_kotzig(3, &grp).unwrap();
        let dup = ka.get(0, 1).clone();
        ka.grid_mut()[0][2] = dup;
        let r = verify_kotzig(&ka);
        assert_eq!(r.violation.unwrap().kind, "row not a permutation");

        // moving one lifted entry within its coset keeps every row a
        // permutation of the quotient but breaks the exact zero sum
        let parent = g("Z4xZ2");
        let q = parent.quotient(&parent.subgroup_of_order(2).unwrap()).unwrap();
        let ka = build_kotzig(2, q.abstract_form()).unwrap();
        let lk = lift_kotzig_zero_sum(&q, &ka).unwrap();
        let shift = q.subgroup().embed(&q.subgroup().abstract_form().element_at(1));
        let mut grid = lk.grid().clone();
        grid[1][2] = parent.add(&grid[1][2], &shift);
        let bad = LiftedKotzig::from_grid(q.clone(), grid);
        let v = verify_kotzig(&bad).violation.unwrap();
        assert_eq!((v.kind, v.column), ("column sum", 2));

        // shifting by a non-subgroup element changes the coset instead
        let mut grid = lk.grid().clone();
        grid[0][1] = parent.add(&grid[0][1], &q.coset_reps()[1]);
        let bad = LiftedKotzig::from_grid(q, grid);
        assert!(!verify_kotzig(&bad).is_valid());
    }
}
