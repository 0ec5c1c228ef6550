//! Lifting a magic rectangle over a subgroup `Γ₀` to a magic rectangle set over
//! Γ via residual rectangles built from a `Γ/Γ₀` Kotzig array, and gluing
//! small rectangles into larger ones.

use super::residual_search::searched_residuals;
use super::{checked, mr_odd_primes, MagicRectangle, MagicRectangleSet};
use crate::error::{Error, Result};
use std::collections::HashMap;

use crate::group::{factorize, AbelianGroup, GroupElement, QuotientView};
use crate::kotzig::{build_kotzig, kotzig_exists, Grid, LiftedKotzig};

/// One `a × b` residual rectangle per column of the lifted Kotzig array.
///
/// Column 0 of rectangle `s` is column `s` of `lk`. For odd `b` (which needs
/// `a` odd and `a ≤ b`) columns `1..a` are the circulant shifts
/// `r[i][j] = r[(i + j) mod a][0]` and the remaining columns alternate copy and
/// complement of column 0. For even `b` the columns simply alternate.
///
/// The complement of an entry is the entry of the same row lying in the
/// negated coset, so every position of the residuals draws from the row's
/// own representatives. When a row is closed under negation this is `−x`.
pub fn residual_rectangles(lk: &LiftedKotzig, a: usize, b: usize) -> Result<Vec<Grid>> {
    if lk.rows() != a {
        return Err(Error::Precondition(format!(
            "Kotzig array has {} rows, rectangle needs {a}",
            lk.rows()
        )));
    }
    if b % 2 == 1 && (a % 2 == 0 || a > b) {
        return Err(Error::Precondition(format!(
            "odd width {b} needs an odd height no larger than it, got {a}"
        )));
    }
    let q = lk.quotient();
    let group = q.parent();
    let complement: Vec<Vec<GroupElement>> = lk
        .grid()
        .iter()
        .map(|row| {
            let mut by_coset = vec![None; q.coset_count()];
            for x in row {
                by_coset[q.project(x)] = Some(x);
            }
            row.iter()
                .map(|x| {
                    by_coset[q.project(&group.neg(x))]
                        .cloned()
                        .unwrap_or_else(|| group.neg(x))
                })
                .collect()
        })
        .collect();
    let circulant = if b % 2 == 1 { a } else { 1 };
    let rects = (0..lk.columns())
        .map(|s| {
            (0..a)
                .map(|i| {
                    (0..b)
                        .map(|j| {
                            if j < circulant {
                                lk.get((i + j) % a, s).clone()
                            } else if (j - circulant) % 2 != b % 2 {
                                lk.get(i, s).clone()
                            } else {
                                complement[i][s].clone()
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(rects)
}

/// Representatives of Γ/Γ₀, one per coset, with `−t` chosen for the coset
/// of `−C` when that coset differs from `C`. A self-inverse coset gets an
/// element of order at most 2 when it has one.
#[derive(Clone)]
struct Transversal {
    reps: Vec<GroupElement>,
    partner: Vec<usize>,
}

impl Transversal {
    fn new(q: &QuotientView) -> Transversal {
        let group = q.parent();
        let sub = q.subgroup();
        let c = q.coset_count();
        let mut reps: Vec<Option<GroupElement>> = vec![None; c];
        let mut partner = vec![0; c];
        for idx in 0..c {
            if reps[idx].is_some() {
                continue;
            }
            let base = q.coset_reps()[idx].clone();
            let neg = q.project(&group.neg(&base));
            partner[idx] = neg;
            partner[neg] = idx;
            if neg == idx {
                let best = sub
                    .abstract_form()
                    .elements()
                    .map(|y| group.add(&base, &sub.embed(&y)))
                    .find(|x| group.add(x, x) == group.zero())
                    .unwrap_or(base);
                reps[idx] = Some(best);
            } else {
                reps[neg] = Some(group.neg(&base));
                reps[idx] = Some(base);
            }
        }
        Transversal {
            reps: reps.into_iter().map(|r| r.expect("every coset visited")).collect(),
            partner,
        }
    }

    /// This transversal, then single-coset variants moving the representative
    /// of a self-inverse coset within its coset. The variants change the
    /// total of the transversal, which decides which common column sums are
    /// possible.
    fn variants(&self, q: &QuotientView) -> Vec<Transversal> {
        let group = q.parent();
        let sub = q.subgroup();
        let shifts: Vec<GroupElement> = sub
            .abstract_form()
            .elements()
            .skip(1)
            .map(|y| sub.embed(&y))
            .collect();
        let mut out = vec![self.clone()];
        for i in 0..self.reps.len() {
            let r = &self.reps[i];
            if self.partner[i] != i || group.add(r, r) == group.zero() {
                continue;
            }
            for v in &shifts {
                let mut t = self.clone();
                t.reps[i] = group.add(r, v);
                out.push(t);
            }
        }
        out
    }

    /// Column sums of `rows`, and of their complements, all equal.
    fn balanced(&self, group: &AbelianGroup, rows: &[Vec<usize>]) -> bool {
        let c = self.reps.len();
        let sums: Vec<GroupElement> = (0..c)
            .flat_map(|s| {
                [
                    group.sum(rows.iter().map(|r| &self.reps[r[s]])),
                    group.sum(rows.iter().map(|r| &self.reps[self.partner[r[s]]])),
                ]
            })
            .collect();
        sums.iter().all(|x| *x == sums[0])
    }
}

/// Node budget for the balanced-rows search, per target sum. Kept small:
/// the residual search takes over when it runs out.
const BALANCE_BUDGET: u64 = 20_000;

/// A transversal and `a` rows of coset indices, each a permutation, for
/// which the parent-group column sums of the representatives and of their
/// complements share one value.
///
/// A quotient Kotzig array read through the transversal is tried first; it is
/// balanced whenever the transversal is a subgroup. Otherwise, for odd `a`,
/// the rows are a searched base of three rows and, when `a ≥ 5`, one searched
/// pair `(p, complement p)`, followed by identity pairs `(t, complement t)`.
fn balanced_rows(q: &QuotientView, a: usize) -> Result<(Transversal, Vec<Vec<usize>>)> {
    let group = q.parent();
    let first = Transversal::new(q);
    let ka = build_kotzig(a, q.abstract_form())?;
    let direct: Vec<Vec<usize>> = ka
        .grid()
        .iter()
        .map(|row| row.iter().map(|y| q.abstract_form().index_of(y)).collect())
        .collect();
    if first.balanced(group, &direct) {
        return Ok((first, direct));
    }
    let failure = || {
        Error::SearchExhausted(format!(
            "no balanced {a}-row lift for {} over {}",
            q.abstract_form(),
            q.subgroup().abstract_form()
        ))
    };
    if a % 2 == 0 || a < 3 {
        return Err(failure());
    }
    let c = first.reps.len();
    let with_pair = a >= 5;
    let fixed_pairs = (a - 3) / 2 - usize::from(with_pair);
    let variants = first.variants(q);
    for t in &variants {
        let eps: Vec<GroupElement> = (0..c)
            .map(|s| group.add(&t.reps[s], &t.reps[t.partner[s]]))
            .collect();
        let total = group.scale(a as i64, &group.sum(t.reps.iter()));
        for k in group.elements().filter(|k| group.scale(c as i64, k) == total) {
            let targets: Vec<GroupElement> = eps
                .iter()
                .map(|e| group.sub(&k, &group.scale(fixed_pairs as i64, e)))
                .collect();
            if let Some(mut rows) = base_rows(group, t, &targets, with_pair, BALANCE_BUDGET) {
                let identity: Vec<usize> = (0..c).collect();
                for _ in 0..fixed_pairs {
                    rows.push(identity.clone());
                    rows.push(t.partner.clone());
                }
                debug_assert!(t.balanced(group, &rows));
                return Ok((t.clone(), rows));
            }
        }
    }
    Err(failure())
}

/// Rows `r1`, `r2` (and, with `with_pair`, a row `p` whose complement row
/// follows it) such that, with row 0 the identity, each column's sum of
/// representatives and sum of complements both equal `targets[s]`. A pair
/// `(p, complement p)` adds `t + complement t` to both sums.
fn base_rows(
    group: &AbelianGroup,
    t: &Transversal,
    targets: &[GroupElement],
    with_pair: bool,
    budget: u64,
) -> Option<Vec<Vec<usize>>> {
    struct Search<'a> {
        group: &'a AbelianGroup,
        t: &'a Transversal,
        targets: &'a [GroupElement],
        index: HashMap<GroupElement, usize>,
        pair_values: Vec<usize>,
        rows: [Vec<usize>; 3],
        used: [Vec<bool>; 3],
        nodes: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn eps(&self, i: usize) -> GroupElement {
            self.group.add(&self.t.reps[i], &self.t.reps[self.t.partner[i]])
        }

        fn options(&self, s: usize) -> Vec<[usize; 3]> {
            let (g, t) = (self.group, self.t);
            let mut out = Vec::new();
            for &w in &self.pair_values {
                if w != usize::MAX && self.used[2][w] {
                    continue;
                }
                let extra = if w == usize::MAX { g.zero() } else { self.eps(w) };
                let goal = g.sub(&self.targets[s], &extra);
                let rest = g.sub(&goal, &t.reps[s]);
                let rest_bar = g.sub(&goal, &t.reps[t.partner[s]]);
                for u in (0..t.reps.len()).filter(|&u| !self.used[0][u]) {
                    let Some(&v) = self.index.get(&g.sub(&rest, &t.reps[u])) else {
                        continue;
                    };
                    let bar = g.add(&t.reps[t.partner[u]], &t.reps[t.partner[v]]);
                    if !self.used[1][v] && bar == rest_bar {
                        out.push([u, v, w]);
                    }
                }
            }
            out
        }

        fn go(&mut self, left: usize) -> bool {
            if left == 0 {
                return true;
            }
            // most constrained open column first
            let mut best: Option<(usize, Vec<[usize; 3]>)> = None;
            for s in 0..self.rows[0].len() {
                if self.rows[0][s] != usize::MAX {
                    continue;
                }
                let opts = self.options(s);
                if best.as_ref().map_or(true, |(_, o)| opts.len() < o.len()) {
                    let empty = opts.is_empty();
                    best = Some((s, opts));
                    if empty {
                        break;
                    }
                }
            }
            let (s, opts) = best.expect("an open column remains");
            for choice in opts {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return false;
                }
                for r in 0..3 {
                    self.rows[r][s] = choice[r];
                    if choice[r] != usize::MAX {
                        self.used[r][choice[r]] = true;
                    }
                }
                if self.go(left - 1) {
                    return true;
                }
                for r in 0..3 {
                    if choice[r] != usize::MAX {
                        self.used[r][choice[r]] = false;
                    }
                }
                self.rows[0][s] = usize::MAX;
            }
            false
        }
    }

    let c = t.reps.len();
    let mut search = Search {
        group,
        t,
        targets,
        index: t.reps.iter().cloned().zip(0..).collect(),
        pair_values: if with_pair { (0..c).collect() } else { vec![usize::MAX] },
        rows: [vec![usize::MAX; c], vec![usize::MAX; c], vec![usize::MAX; c]],
        used: [vec![false; c], vec![false; c], vec![false; c]],
        nodes: 0,
        budget,
    };
    if !search.go(c) {
        return None;
    }
    let [r1, r2, p] = search.rows;
    let mut rows = vec![(0..c).collect(), r1, r2];
    if with_pair {
        rows.push(p.iter().map(|&i| t.partner[i]).collect());
        rows.push(p);
    }
    Some(rows)
}

/// A lifted Kotzig array over one fixed transversal of Γ/Γ₀ whose residual
/// rectangles have constant column sums.
pub fn balanced_lift(q: &QuotientView, rows: usize) -> Result<LiftedKotzig> {
    if !kotzig_exists(rows, q.abstract_form()) {
        return Err(Error::KotzigMissing {
            rows,
            group: q.abstract_form().to_string(),
        });
    }
    let (t, index_rows) = balanced_rows(q, rows)?;
    let grid = index_rows
        .iter()
        .map(|row| row.iter().map(|&i| t.reps[i].clone()).collect())
        .collect();
    Ok(LiftedKotzig::from_grid(q.clone(), grid))
}

/// `MRS_Γ(a, b; |Γ/Γ₀|)` from `MR_{Γ₀}(a, b)` by adding residual rectangles.
///
/// Orientation is normalised internally: if `b` is odd and `a` is even or
/// larger than `b`, the rectangle is transposed, lifted, and transposed back.
pub fn lift_rectangle(
    mr0: &MagicRectangle,
    gamma: &AbelianGroup,
    q: &QuotientView,
) -> Result<MagicRectangleSet> {
    if q.parent() != gamma {
        return Err(Error::ForeignSubgroup);
    }
    let sub = q.subgroup();
    if mr0.group != *sub.abstract_form() {
        return Err(Error::Precondition(format!(
            "rectangle is over {}, subgroup is {}",
            mr0.group,
            sub.abstract_form()
        )));
    }
    let (a, b) = (mr0.a, mr0.b);
    if b % 2 == 1 && (a % 2 == 0 || a > b) {
        return Ok(lift_rectangle(&mr0.transpose(), gamma, q)?.transpose());
    }
    let residuals = match balanced_lift(q, a) {
        Ok(lk) => residual_rectangles(&lk, a, b)?,
        Err(e @ Error::KotzigMissing { .. }) => return Err(e),
        Err(_) => searched_residuals(q, a, b)?,
    };
    let base: Grid = mr0
        .grid
        .iter()
        .map(|row| row.iter().map(|x| sub.embed(x)).collect())
        .collect();
    let rectangles: Vec<Grid> = residuals
        .iter()
        .map(|r| {
            base.iter()
                .zip(r)
                .map(|(xrow, rrow)| xrow.iter().zip(rrow).map(|(x, y)| gamma.add(x, y)).collect())
                .collect()
        })
        .collect();
    let omega = gamma.sum(rectangles[0][0].iter());
    let delta = gamma.sum(rectangles[0].iter().map(|row| &row[0]));
    checked(MagicRectangleSet {
        group: gamma.clone(),
        a,
        b,
        c: q.coset_count(),
        rectangles,
        omega,
        delta,
    })
}

/// Tiles `p × q` rectangles into `a × b` ones, `(a/p)·(b/q)` tiles each,
/// consuming the input rectangles in order.
pub fn glue(tiles: &MagicRectangleSet, a: usize, b: usize) -> Result<MagicRectangleSet> {
    let (p, q) = (tiles.a, tiles.b);
    if a % p != 0 || b % q != 0 {
        return Err(Error::Precondition(format!("{p}x{q} tiles do not divide {a}x{b}")));
    }
    let (down, across) = (a / p, b / q);
    let per = down * across;
    if tiles.c % per != 0 {
        return Err(Error::Precondition(format!(
            "{} tiles cannot be grouped {per} at a time",
            tiles.c
        )));
    }
    let group = &tiles.group;
    let rectangles = tiles
        .rectangles
        .chunks(per)
        .map(|chunk| {
            (0..a)
                .map(|i| {
                    (0..b)
                        .map(|j| chunk[(i / p) * across + j / q][i % p][j % q].clone())
                        .collect()
                })
                .collect()
        })
        .collect();
    checked(MagicRectangleSet {
        group: group.clone(),
        a,
        b,
        c: tiles.c / per,
        rectangles,
        omega: group.scale(across as i64, &tiles.omega),
        delta: group.scale(down as i64, &tiles.delta),
    })
}

fn smallest_odd_prime(n: usize) -> Option<u64> {
    factorize(n as u64).into_iter().map(|(p, _)| p).find(|&p| p > 2)
}

/// `MRS_Γ(a, b; c)` when odd primes divide both `a` and `b` and Γ is in 𝒢.
///
/// Pipeline: `Γ₀` of order `p1·p2` → `MR_{Γ₀}(p1, p2)` → lift → glue.
pub fn mrs_both_odd_factor(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
) -> Result<MagicRectangleSet> {
    if (a * b * c) as u64 != gamma.order() {
        return Err(Error::OrderMismatch {
            product: (a * b * c) as u64,
            order: gamma.order(),
        });
    }
    let (p1, p2) = match (smallest_odd_prime(a), smallest_odd_prime(b)) {
        (Some(p1), Some(p2)) => (p1, p2),
        _ => {
            return Err(Error::Precondition(format!(
                "{a}x{b}: both sides need an odd prime factor"
            )))
        }
    };
    if !gamma.is_in_class_g() {
        return Err(Error::Precondition(format!("{gamma} is not in class G")));
    }
    let sub = if p1 == p2 {
        let square = AbelianGroup::from_canonical(&[p1, p1])?;
        gamma
            .subgroup_with_shape(&square)
            .or_else(|_| gamma.subgroup_of_order(p1 * p1))?
    } else {
        gamma.subgroup_of_order(p1 * p2)?
    };
    let q = gamma.quotient(&sub)?;
    let mr0 = mr_odd_primes(sub.abstract_form(), p1, p2)?;
    let tiles = lift_rectangle(&mr0, gamma, &q)?;
    glue(&tiles, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{mr_zp_zp, verify_mrs};

    fn g(spec: &str) -> AbelianGroup {
        AbelianGroup::parse(spec).unwrap()
    }

    fn zero_sums(group: &AbelianGroup, r: &Grid) -> bool {
        let rows = r.iter().all(|row| group.sum(row.iter()) == group.zero());
        let cols = (0..r[0].len()).all(|j| group.sum(r.iter().map(|row| &row[j])) == group.zero());
        rows && cols
    }

    fn lifted(spec: &str, sub_order: u64, rows: usize) -> LiftedKotzig {
        let grp = g(spec);
        let q = grp.quotient(&grp.subgroup_of_order(sub_order).unwrap()).unwrap();
        balanced_lift(&q, rows).unwrap()
    }

    #[test]
    fn residuals_even_width_alternate() {
        let lk = lifted("Z3xZ3xZ2xZ2", 9, 3);
        let grp = lk.quotient().parent().clone();
        for r in residual_rectangles(&lk, 3, 4).unwrap() {
            for row in &r {
                assert_eq!(row[1], grp.neg(&row[0]));
                assert_eq!(row[2], row[0]);
            }
            assert!(zero_sums(&grp, &r));
        }
    }

    #[test]
    fn residuals_square_circulant() {
        let lk = lifted("Z3xZ3xZ3", 9, 3);
        let grp = lk.quotient().parent().clone();
        for r in residual_rectangles(&lk, 3, 3).unwrap() {
            let mut first: Vec<_> = r.iter().map(|row| row[0].clone()).collect();
            first.sort();
            for j in 0..3 {
                let mut col: Vec<_> = r.iter().map(|row| row[j].clone()).collect();
                col.sort();
                assert_eq!(col, first);
            }
            assert!(zero_sums(&grp, &r));
        }
    }

    #[test]
    fn residuals_three_by_five_over_klein_quotient() {
        // Γ = Z3xZ5xZ2xZ2, Γ₀ of order 15, quotient Z2xZ2
        let lk = lifted("Z3xZ5xZ2xZ2", 15, 3);
        let q = lk.quotient().clone();
        let grp = q.parent().clone();
        let rects = residual_rectangles(&lk, 3, 5).unwrap();
        assert_eq!(rects.len(), 4);
        for r in &rects {
            assert!(zero_sums(&grp, r));
        }
        for i in 0..3 {
            for j in 0..5 {
                let mut cosets: Vec<usize> = rects.iter().map(|r| q.project(&r[i][j])).collect();
                cosets.sort();
                cosets.dedup();
                assert_eq!(cosets.len(), 4);
            }
        }
    }

    #[test]
    fn residual_preconditions() {
        let lk = lifted("Z3xZ3xZ3", 9, 3);
        assert!(residual_rectangles(&lk, 2, 3).is_err());
        assert!(residual_rectangles(&lk, 3, 4).is_ok());
        let lk5 = lifted("Z5xZ5xZ3", 25, 5);
        assert!(residual_rectangles(&lk5, 5, 3).is_err());
    }

    #[test]
    fn lift_with_trivial_quotient_is_identity() {
        let mr0 = mr_zp_zp(3).unwrap();
        let grp = g("Z3xZ3");
        let q = grp.quotient(&grp.subgroup_of_order(9).unwrap()).unwrap();
        let out = lift_rectangle(&mr0, &grp, &q).unwrap();
        assert_eq!(out.rectangles, vec![mr0.grid.clone()]);
    }

    #[test]
    fn lift_zp_zp_into_cube() {
        let grp = g("Z3xZ3xZ3");
        let sub = grp.subgroup_with_shape(&g("Z3xZ3")).unwrap();
        let q = grp.quotient(&sub).unwrap();
        let out = lift_rectangle(&mr_zp_zp(3).unwrap(), &grp, &q).unwrap();
        assert_eq!(out.c, 3);
        assert!(verify_mrs(&out).is_valid());
    }

    #[test]
    fn lift_three_by_five_into_z105() {
        let grp = g("Z3xZ5xZ7");
        let sub = grp.subgroup_of_order(15).unwrap();
        let q = grp.quotient(&sub).unwrap();
        let mr0 = mr_odd_primes(sub.abstract_form(), 3, 5).unwrap();
        let out = lift_rectangle(&mr0, &grp, &q).unwrap();
        assert_eq!((out.a, out.b, out.c), (3, 5, 7));
        assert_eq!(out.omega, sub.embed(&mr0.omega));
        assert!(verify_mrs(&out).is_valid());
        // wide-side-first orientation goes through the transpose path
        let out = lift_rectangle(&mr0.transpose(), &grp, &q).unwrap();
        assert_eq!((out.a, out.b, out.c), (5, 3, 7));
        assert!(verify_mrs(&out).is_valid());
    }

    #[test]
    fn lift_needs_kotzig() {
        // quotient Z2 has one involution: no 3-row Kotzig array
        let grp = g("Z3xZ3xZ2");
        let sub = grp.subgroup_with_shape(&g("Z3xZ3")).unwrap();
        let q = grp.quotient(&sub).unwrap();
        assert!(matches!(
            lift_rectangle(&mr_zp_zp(3).unwrap(), &grp, &q),
            Err(Error::KotzigMissing { .. })
        ));
    }

    #[test]
    fn glue_sum_law() {
        let grp = g("Z3xZ5xZ2xZ2");
        let sub = grp.subgroup_of_order(15).unwrap();
        let q = grp.quotient(&sub).unwrap();
        let tiles = lift_rectangle(&mr_odd_primes(sub.abstract_form(), 3, 5).unwrap(), &grp, &q).unwrap();
        let wide = glue(&tiles, 3, 10).unwrap();
        assert_eq!(wide.c, 2);
        assert_eq!(wide.omega, grp.scale(2, &tiles.omega));
        assert_eq!(wide.delta, tiles.delta);
        let same = glue(&tiles, 3, 5).unwrap();
        assert_eq!(same, tiles);
        let square = glue(&tiles, 6, 10).unwrap();
        assert_eq!(square.c, 1);
        assert_eq!(square.delta, grp.scale(2, &tiles.delta));
        assert!(glue(&tiles, 4, 5).is_err());
        assert!(glue(&tiles, 9, 5).is_err());
    }

    #[test]
    fn nine_tiles() {
        let grp = g("Z3xZ3xZ3xZ3");
        let sub = grp.subgroup_with_shape(&g("Z3xZ3")).unwrap();
        let q = grp.quotient(&sub).unwrap();
        let tiles = lift_rectangle(&mr_zp_zp(3).unwrap(), &grp, &q).unwrap();
        let big = glue(&tiles, 9, 9).unwrap();
        assert_eq!(big.omega, grp.scale(3, &tiles.omega));
        assert_eq!(big.delta, grp.scale(3, &tiles.delta));
    }

    #[test]
    fn both_odd_factor_examples() {
        let m = mrs_both_odd_factor(3, 3, 3, &g("Z3xZ3xZ3")).unwrap();
        assert!(verify_mrs(&m).is_valid());
        let z15 = g("Z15");
        let m = mrs_both_odd_factor(3, 5, 1, &z15).unwrap();
        assert_eq!((m.omega.clone(), m.delta.clone()), (z15.from_integer(10), z15.from_integer(9)));
        assert!(mrs_both_odd_factor(3, 6, 1, &g("Z2xZ9")).is_err());
        assert!(mrs_both_odd_factor(3, 4, 1, &g("Z3xZ2xZ2")).is_err());
    }
}
