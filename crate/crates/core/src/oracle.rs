//! Exhaustive backtracking search for magic rectangle sets at small orders.
//!
//! Cells are filled row-major, rectangle after rectangle, with values tried in
//! canonical element order. For each candidate pair `(ω, δ)` the last cell of
//! every row is forced by `ω` and the whole last row is forced by `δ`.
//!
//! Symmetry rules, each of which maps any solution to one the search visits:
//! - rows and columns of a rectangle may be permuted freely, so the smallest
//!   entry of each rectangle sits at `(0, 0)`, columns `1..b` are sorted by
//!   their first-row entry and rows `1..a` by their first-column entry;
//! - rectangles may be reordered, so they appear by increasing smallest
//!   entry, which makes each `(0, 0)` the smallest element not yet used.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::constructions::{construct, verify_mrs, MagicRectangleSet};
use crate::decider::{existence_table, Status};
use crate::error::{Error, Result};
use crate::group::{AbelianGroup, GroupElement};

/// Default node budget when none is given.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Found(MagicRectangleSet),
    NoneExists,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    pub result: SearchResult,
    pub nodes_expanded: u64,
    pub budget: u64,
}

impl SearchOutcome {
    pub fn label(&self) -> &'static str {
        match self.result {
            SearchResult::Found(_) => "Found",
            SearchResult::NoneExists => "NoneExists",
            SearchResult::Unknown => "Unknown",
        }
    }

    pub fn witness(&self) -> Option<&MagicRectangleSet> {
        match &self.result {
            SearchResult::Found(m) => Some(m),
            _ => None,
        }
    }
}

/// Candidate `(ω, δ)` pairs: `a·ω = b·δ`, and `c·a·ω` is the sum of all
/// elements, in canonical order of `ω` then `δ`.
pub fn candidate_sums(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
) -> Vec<(GroupElement, GroupElement)> {
    let total = gamma.sum_of_all_elements();
    let mut out = Vec::new();
    for omega in gamma.elements() {
        let row_total = gamma.scale(a as i64, &omega);
        if gamma.scale(c as i64, &row_total) != total {
            continue;
        }
        for delta in gamma.elements() {
            if gamma.scale(b as i64, &delta) == row_total {
                out.push((omega.clone(), delta));
            }
        }
    }
    out
}

struct Search<'a> {
    a: usize,
    b: usize,
    c: usize,
    n: usize,
    add: Vec<usize>,
    neg: Vec<usize>,
    omega: usize,
    delta: usize,
    cells: Vec<usize>,
    used: Vec<bool>,
    nodes: &'a mut u64,
    budget: u64,
}

enum Step {
    Solved,
    Exhausted,
    OutOfBudget,
}

impl Search<'_> {
    fn sum(&self, x: usize, y: usize) -> usize {
        self.add[x * self.n + y]
    }

    fn diff(&self, x: usize, y: usize) -> usize {
        self.sum(x, self.neg[y])
    }

    fn at(&self, s: usize, i: usize, j: usize) -> usize {
        (s * self.a + i) * self.b + j
    }

    fn row_sum(&self, s: usize, i: usize, upto: usize) -> usize {
        (0..upto).fold(0, |acc, j| self.sum(acc, self.cells[self.at(s, i, j)]))
    }

    fn col_sum(&self, s: usize, j: usize, upto: usize) -> usize {
        (0..upto).fold(0, |acc, i| self.sum(acc, self.cells[self.at(s, i, j)]))
    }

    /// Ordering constraints from the symmetry rules.
    fn admissible(&self, s: usize, i: usize, j: usize, v: usize) -> bool {
        if self.used[v] {
            return false;
        }
        if (i, j) == (0, 0) {
            return true;
        }
        let corner = self.cells[self.at(s, 0, 0)];
        if v <= corner {
            return false;
        }
        if i == 0 && j >= 2 && v <= self.cells[self.at(s, 0, j - 1)] {
            return false;
        }
        if j == 0 && i >= 2 && v <= self.cells[self.at(s, i - 1, 0)] {
            return false;
        }
        true
    }

    fn place(&mut self, pos: usize) -> Step {
        let total = self.a * self.b * self.c;
        if pos == total {
            return Step::Solved;
        }
        let s = pos / (self.a * self.b);
        let i = (pos / self.b) % self.a;
        let j = pos % self.b;
        let candidates: Vec<usize> = if (i, j) == (0, 0) {
            vec![(0..self.n).find(|&v| !self.used[v]).expect("an unused element remains")]
        } else if i == self.a - 1 {
            let v = self.diff(self.delta, self.col_sum(s, j, i));
            if j == self.b - 1 && self.sum(self.row_sum(s, i, j), v) != self.omega {
                return Step::Exhausted;
            }
            vec![v]
        } else if j == self.b - 1 {
            vec![self.diff(self.omega, self.row_sum(s, i, j))]
        } else {
            (0..self.n).collect()
        };
        for v in candidates {
            if !self.admissible(s, i, j, v) {
                continue;
            }
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Step::OutOfBudget;
            }
            self.cells[pos] = v;
            self.used[v] = true;
            match self.place(pos + 1) {
                Step::Exhausted => {}
                other => return other,
            }
            self.used[v] = false;
        }
        Step::Exhausted
    }
}

fn tables(gamma: &AbelianGroup) -> (Vec<usize>, Vec<usize>) {
    let n = gamma.order() as usize;
    let elems: Vec<GroupElement> = gamma.elements().collect();
    let mut add = vec![0; n * n];
    for (x, ex) in elems.iter().enumerate() {
        for (y, ey) in elems.iter().enumerate() {
            add[x * n + y] = gamma.index_of(&gamma.add(ex, ey));
        }
    }
    let neg = elems.iter().map(|e| gamma.index_of(&gamma.neg(e))).collect();
    (add, neg)
}

fn check_shape(a: usize, b: usize, c: usize, gamma: &AbelianGroup) -> Result<()> {
    if a == 0 || b == 0 || c == 0 {
        return Err(Error::MalformedShape(format!("{a}x{b}x{c}")));
    }
    let product = (a * b * c) as u64;
    if product != gamma.order() {
        return Err(Error::OrderMismatch {
            product,
            order: gamma.order(),
        });
    }
    Ok(())
}

/// Searches for an `MRS_Γ(a, b; c)` with the given row and column sums.
/// `nodes` accumulates across calls; the search stops once it passes `budget`.
fn search_pair(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
    sums: (&GroupElement, &GroupElement),
    nodes: &mut u64,
    budget: u64,
) -> SearchResult {
    let n = gamma.order() as usize;
    let (add, neg) = tables(gamma);
    let mut search = Search {
        a,
        b,
        c,
        n,
        add,
        neg,
        omega: gamma.index_of(sums.0),
        delta: gamma.index_of(sums.1),
        cells: vec![0; n],
        used: vec![false; n],
        nodes,
        budget,
    };
    match search.place(0) {
        Step::Solved => {
            let cells = search.cells;
            let rectangles = (0..c)
                .map(|s| {
                    (0..a)
                        .map(|i| (0..b).map(|j| gamma.element_at(cells[(s * a + i) * b + j])).collect())
                        .collect()
                })
                .collect();
            SearchResult::Found(MagicRectangleSet {
                group: gamma.clone(),
                a,
                b,
                c,
                rectangles,
                omega: sums.0.clone(),
                delta: sums.1.clone(),
            })
        }
        Step::Exhausted => SearchResult::NoneExists,
        Step::OutOfBudget => SearchResult::Unknown,
    }
}

/// Searches all candidate sum pairs in order and returns the first witness.
pub fn search_mrs(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
    budget: u64,
) -> Result<SearchOutcome> {
    check_shape(a, b, c, gamma)?;
    let mut nodes = 0;
    for (omega, delta) in candidate_sums(a, b, c, gamma) {
        match search_pair(a, b, c, gamma, (&omega, &delta), &mut nodes, budget) {
            SearchResult::NoneExists => {}
            result => {
                return Ok(SearchOutcome {
                    result,
                    nodes_expanded: nodes,
                    budget,
                })
            }
        }
    }
    Ok(SearchOutcome {
        result: SearchResult::NoneExists,
        nodes_expanded: nodes,
        budget,
    })
}

/// Searches for an MRS with the given `(ω, δ)` only.
pub fn search_mrs_with_sums(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
    omega: &GroupElement,
    delta: &GroupElement,
    budget: u64,
) -> Result<SearchOutcome> {
    check_shape(a, b, c, gamma)?;
    gamma.check(omega)?;
    gamma.check(delta)?;
    let mut nodes = 0;
    let result = search_pair(a, b, c, gamma, (omega, delta), &mut nodes, budget);
    Ok(SearchOutcome {
        result,
        nodes_expanded: nodes,
        budget,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumPairs {
    pub pairs: BTreeSet<(GroupElement, GroupElement)>,
    /// False when some candidate pair ran out of budget.
    pub complete: bool,
}

/// Every `(ω, δ)` admitting an MRS, each candidate searched with its own
/// budget.
pub fn enumerate_sum_pairs(
    a: usize,
    b: usize,
    c: usize,
    gamma: &AbelianGroup,
    budget: u64,
) -> Result<SumPairs> {
    check_shape(a, b, c, gamma)?;
    let mut pairs = BTreeSet::new();
    let mut complete = true;
    for (omega, delta) in candidate_sums(a, b, c, gamma) {
        let mut nodes = 0;
        match search_pair(a, b, c, gamma, (&omega, &delta), &mut nodes, budget) {
            SearchResult::Found(_) => {
                pairs.insert((omega, delta));
            }
            SearchResult::NoneExists => {}
            SearchResult::Unknown => complete = false,
        }
    }
    Ok(SumPairs { pairs, complete })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub group: String,
    pub shape: String,
    pub verdict: Status,
    pub oracle: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpenStatus {
    pub group: String,
    pub shape: String,
    pub case: u8,
    pub oracle: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub max_order: u64,
    pub budget: u64,
    pub instances: usize,
    pub oracle_unknown: usize,
    pub disagreements: Vec<Disagreement>,
    pub open: Vec<OpenStatus>,
}

/// Compares verdicts, constructions and the oracle on every instance up to
/// `max_order`. A disagreement is a construction failure on an `Exists`
/// instance, a witness for `NotExists`, or an exhausted search for `Exists`.
pub fn cross_validate(max_order: u64, budget: u64) -> ValidationReport {
    let mut report = ValidationReport {
        max_order,
        budget,
        instances: 0,
        oracle_unknown: 0,
        disagreements: Vec::new(),
        open: Vec::new(),
    };
    for inst in existence_table(max_order) {
        report.instances += 1;
        let (a, b, c) = (inst.a, inst.b, inst.c);
        let group = inst.group.display_spec();
        let shape = format!("{a}x{b}x{c}");
        let outcome = search_mrs(a, b, c, &inst.group, budget).expect("shape matches order");
        if outcome.result == SearchResult::Unknown {
            report.oracle_unknown += 1;
        }
        if let Some(w) = outcome.witness() {
            if !verify_mrs(w).is_valid() {
                report.disagreements.push(Disagreement {
                    group: group.clone(),
                    shape: shape.clone(),
                    verdict: inst.verdict.status,
                    oracle: outcome.label().into(),
                    detail: "oracle witness fails verification".into(),
                });
            }
        }
        let mut disagree = |detail: String| {
            report.disagreements.push(Disagreement {
                group: group.clone(),
                shape: shape.clone(),
                verdict: inst.verdict.status,
                oracle: outcome.label().into(),
                detail,
            })
        };
        match inst.verdict.status {
            Status::Exists => {
                if outcome.result == SearchResult::NoneExists {
                    disagree("exhaustive search found no witness".into());
                }
                match construct(a, b, c, &inst.group) {
                    Ok(m) => {
                        let r = verify_mrs(&m);
                        if !r.is_valid() {
                            disagree(format!("construction invalid: {r}"));
                        }
                    }
                    Err(e) => disagree(format!("construction failed: {e}")),
                }
            }
            Status::NotExists => {
                if outcome.witness().is_some() {
                    disagree("search found a witness".into());
                }
            }
            Status::Open => report.open.push(OpenStatus {
                group,
                shape,
                case: inst.verdict.open_case().expect("open verdicts carry a case"),
                oracle: outcome.label().into(),
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: &str) -> AbelianGroup {
        AbelianGroup::parse(spec).unwrap()
    }

    #[test]
    fn klein_by_three_has_no_set() {
        let out = search_mrs(3, 2, 2, &g("Z3xZ2xZ2"), DEFAULT_BUDGET).unwrap();
        assert_eq!(out.result, SearchResult::NoneExists);
    }

    #[test]
    fn cyclic_six_has_no_rectangle() {
        let out = search_mrs(3, 2, 1, &g("Z6"), DEFAULT_BUDGET).unwrap();
        assert_eq!(out.result, SearchResult::NoneExists);
        // 3ω is odd but 2δ is even, so no sum pair survives
        assert!(candidate_sums(3, 2, 1, &g("Z6")).is_empty());
    }

    #[test]
    fn cyclic_four_square() {
        let z4 = g("Z4");
        let out = search_mrs(2, 2, 1, &z4, DEFAULT_BUDGET).unwrap();
        let w = out.witness().expect("a 2x2 square over Z4");
        assert!(verify_mrs(w).is_valid());
        assert!(w.omega == z4.from_integer(1) || w.omega == z4.from_integer(3));
    }

    #[test]
    fn sum_pairs_of_cyclic_four() {
        let z4 = g("Z4");
        let found = enumerate_sum_pairs(2, 2, 1, &z4, DEFAULT_BUDGET).unwrap();
        assert!(found.complete);
        let expected: BTreeSet<_> = [(1, 3), (3, 1)]
            .into_iter()
            .map(|(w, d)| (z4.from_integer(w), z4.from_integer(d)))
            .collect();
        assert_eq!(found.pairs, expected);
    }

    #[test]
    fn budget_cutoff_is_unknown_and_deterministic() {
        let grp = g("Z3xZ2xZ2");
        let first = search_mrs(3, 2, 2, &grp, 5).unwrap();
        assert_eq!(first.result, SearchResult::Unknown);
        assert_eq!(first, search_mrs(3, 2, 2, &grp, 5).unwrap());
        let full = search_mrs(2, 3, 2, &grp, DEFAULT_BUDGET).unwrap();
        assert_eq!(full, search_mrs(2, 3, 2, &grp, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn forced_sums_filter_candidates() {
        let grp = g("Z3xZ3");
        for (w, d) in candidate_sums(3, 3, 1, &grp) {
            assert_eq!(grp.scale(3, &w), grp.scale(3, &d));
        }
        assert!(search_mrs(3, 2, 1, &g("Z3"), 10).is_err());
    }

    #[test]
    fn small_orders_agree() {
        let report = cross_validate(8, DEFAULT_BUDGET);
        assert!(report.disagreements.is_empty(), "{:?}", report.disagreements);
        assert_eq!(report.oracle_unknown, 0);
    }
}
