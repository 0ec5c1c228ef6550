//! Residual rectangles found by a SAT search, for subgroups whose copy and
//! complement pattern cannot be balanced exactly.
//!
//! Every tile is an `a × b` array of coset indices. Each position holds every
//! coset once across the tiles, and the representatives sum to one value `R`
//! along every tile row and one value `K` down every tile column.
//!
//! Solvability depends on the transversal, so a deterministic sequence of
//! random candidates is tried, cycling through the patterns of [`Pattern`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use cadical::Solver;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::group::{AbelianGroup, QuotientView};
use crate::kotzig::Grid;

const CANDIDATES: usize = 400;
/// Per-candidate conflict limit; a hard transversal is abandoned, not proved
/// infeasible.
const CONFLICTS: i32 = 20_000;
/// Solver runs allowed per primary component, so that hopeless instances
/// fail in bounded time.
const SOLVER_RUNS: usize = 24;
const SEED: u64 = 0x5eed;

type Lit = i32;

struct Cnf {
    solver: Solver,
    vars: i32,
}

impl Cnf {
    fn new() -> Self {
        let mut solver = Solver::new();
        solver.set_limit("conflicts", CONFLICTS).expect("known limit");
        Cnf { solver, vars: 0 }
    }

    fn new_lit(&mut self) -> Lit {
        self.vars += 1;
        self.vars
    }

    fn clause(&mut self, lits: &[Lit]) {
        self.solver.add_clause(lits.iter().copied());
    }

    fn exactly_one(&mut self, lits: &[Lit]) {
        self.clause(lits);
        for (i, &x) in lits.iter().enumerate() {
            for &y in &lits[i + 1..] {
                self.clause(&[-x, -y]);
            }
        }
    }
}

/// Dense addition table over element indices.
struct Table {
    n: usize,
    add: Vec<usize>,
}

impl Table {
    fn new(group: &AbelianGroup) -> Self {
        let n = group.order() as usize;
        let elems: Vec<_> = group.elements().collect();
        let mut add = vec![0; n * n];
        for (x, ex) in elems.iter().enumerate() {
            for (y, ey) in elems.iter().enumerate() {
                add[x * n + y] = group.index_of(&group.add(ex, ey));
            }
        }
        Table { n, add }
    }

    fn sum(&self, x: usize, y: usize) -> usize {
        self.add[x * self.n + y]
    }

    fn times(&self, k: usize, x: usize) -> usize {
        (0..k).fold(0, |acc, _| self.sum(acc, x))
    }
}

/// Forbids every assignment of `line` whose representative sum misses
/// `target`. Partial sums get one literal each, implied by the cells so far.
fn constrain_line(
    cnf: &mut Cnf,
    table: &Table,
    line: &[&[Lit]],
    reps: &[usize],
    target: &BTreeMap<usize, Lit>,
) {
    let mut partial: BTreeMap<usize, Vec<Lit>> = BTreeMap::new();
    for (coset, &x) in line[0].iter().enumerate() {
        partial.entry(reps[coset]).or_default().push(x);
    }
    let (last, middle) = line[1..].split_last().expect("lines have two or more cells");
    for cell in middle {
        let mut next: BTreeMap<usize, Lit> = BTreeMap::new();
        for (&g, lits) in &partial {
            for (coset, &x) in cell.iter().enumerate() {
                let v = table.sum(g, reps[coset]);
                let nv = *next.entry(v).or_insert_with(|| cnf.new_lit());
                for &p in lits {
                    cnf.clause(&[-p, -x, nv]);
                }
            }
        }
        partial = next.into_iter().map(|(g, l)| (g, vec![l])).collect();
    }
    for (&g, lits) in &partial {
        for (coset, &x) in last.iter().enumerate() {
            let v = table.sum(g, reps[coset]);
            for &p in lits {
                match target.get(&v) {
                    Some(&t) => cnf.clause(&[-p, -x, t]),
                    None => cnf.clause(&[-p, -x]),
                }
            }
        }
    }
}

/// Tiles for one fixed transversal (`reps[coset]` is an element index), or
/// `None` when there are none or the conflict limit is reached.
fn solve_tiles(
    table: &Table,
    c: usize,
    a: usize,
    b: usize,
    reps: &[usize],
    row_sum: Option<usize>,
    runs_left: &mut usize,
) -> Option<Vec<Vec<Vec<usize>>>> {
    let total = reps.iter().fold(0, |acc, &r| table.sum(acc, r));
    // c·K = a·Σ and c·R = b·Σ follow from summing all tiles; a·R = b·K from
    // summing one tile.
    let cols: Vec<usize> = (0..table.n)
        .filter(|&k| table.times(c, k) == table.times(a, total))
        .collect();
    let rows: Vec<usize> = (0..table.n)
        .filter(|&r| table.times(c, r) == table.times(b, total))
        .filter(|&r| row_sum.map_or(true, |want| want == r))
        .collect();
    let compatible = |r: usize, k: usize| table.times(a, r) == table.times(b, k);
    if *runs_left == 0 || !rows.iter().any(|&r| cols.iter().any(|&k| compatible(r, k))) {
        return None;
    }
    *runs_left -= 1;

    let mut cnf = Cnf::new();
    let cells: Vec<Vec<Lit>> = (0..c * a * b)
        .map(|_| (0..c).map(|_| cnf.new_lit()).collect())
        .collect();
    let at = |s: usize, i: usize, j: usize| (s * a + i) * b + j;
    for cell in &cells {
        cnf.exactly_one(cell);
    }
    for i in 0..a {
        for j in 0..b {
            for coset in 0..c {
                let lits: Vec<Lit> = (0..c).map(|s| cells[at(s, i, j)][coset]).collect();
                cnf.exactly_one(&lits);
            }
        }
    }
    let row_target: BTreeMap<usize, Lit> = rows.iter().map(|&r| (r, cnf.new_lit())).collect();
    let col_target: BTreeMap<usize, Lit> = cols.iter().map(|&k| (k, cnf.new_lit())).collect();
    cnf.exactly_one(&row_target.values().copied().collect::<Vec<_>>());
    cnf.exactly_one(&col_target.values().copied().collect::<Vec<_>>());
    for (&r, &rl) in &row_target {
        for (&k, &kl) in &col_target {
            if !compatible(r, k) {
                cnf.clause(&[-rl, -kl]);
            }
        }
    }
    for s in 0..c {
        // tiles are interchangeable
        cnf.clause(&[cells[at(s, 0, 0)][s]]);
        for i in 0..a {
            let line: Vec<&[Lit]> = (0..b).map(|j| cells[at(s, i, j)].as_slice()).collect();
            constrain_line(&mut cnf, table, &line, reps, &row_target);
        }
        for j in 0..b {
            let line: Vec<&[Lit]> = (0..a).map(|i| cells[at(s, i, j)].as_slice()).collect();
            constrain_line(&mut cnf, table, &line, reps, &col_target);
        }
    }
    if cnf.solver.solve() != Some(true) {
        return None;
    }
    let solver = &cnf.solver;
    let pick = |lits: &[Lit]| {
        lits.iter()
            .position(|&l| solver.value(l) == Some(true))
            .expect("one-hot")
    };
    Some(
        (0..c)
            .map(|s| {
                (0..a)
                    .map(|i| (0..b).map(|j| reps[pick(&cells[at(s, i, j)])]).collect())
                    .collect()
            })
            .collect(),
    )
}

/// Tall tiles are stacked from a three-row (or two-row) block and two-row
/// blocks sharing one row sum; the two-row block is solved first. Each block keeps every coset once per position
/// and has constant column sums, so the stack does too.
fn solve_stacked(
    table: &Table,
    c: usize,
    a: usize,
    b: usize,
    reps: &[usize],
    runs_left: &mut usize,
) -> Option<Vec<Vec<Vec<usize>>>> {
    if a <= 3 {
        return solve_tiles(table, c, a, b, reps, None, runs_left);
    }
    let head_rows = if a % 2 == 1 { 3 } else { 2 };
    let pair = solve_tiles(table, c, 2, b, reps, None, runs_left)?;
    let row_sum = pair[0][0].iter().fold(0, |acc, &x| table.sum(acc, x));
    let mut tiles = solve_tiles(table, c, head_rows, b, reps, Some(row_sum), runs_left)?;
    for (tile, extra) in tiles.iter_mut().zip(&pair) {
        for _ in 0..(a - head_rows) / 2 {
            tile.extend(extra.iter().cloned());
        }
    }
    Some(tiles)
}

#[derive(Clone, Copy)]
enum Pattern {
    /// Any representative per coset.
    Free,
    /// `t(−C) = −t(C)`, with the last self-inverse coset used to make the
    /// total zero when it can.
    Paired,
    /// `t(C) + t(C̄ − C) = z` where `C̄` is the coset of `z`, so two-row
    /// blocks can pair every entry with its partner.
    Centered(usize),
}

/// A random transversal following `pattern`, or `None` when a coset fixed
/// by the pattern has no suitable representative.
fn random_transversal(
    q: &QuotientView,
    table: &Table,
    neg: &[usize],
    pattern: Pattern,
    rng: &mut StdRng,
) -> Option<Vec<usize>> {
    let group = q.parent();
    let quotient = q.abstract_form();
    let sub = q.subgroup();
    let members: Vec<usize> = sub
        .abstract_form()
        .elements()
        .map(|y| group.index_of(&sub.embed(&y)))
        .collect();
    let c = q.coset_count();
    let center = match pattern {
        Pattern::Centered(z) => Some(z),
        Pattern::Paired => Some(0),
        Pattern::Free => None,
    };
    let center_coset = center.map(|z| quotient.element_at(q.project(&group.element_at(z))));
    let mut reps: Vec<Option<usize>> = vec![None; c];
    let mut last_fixed = None;
    for coset in 0..c {
        if reps[coset].is_some() {
            continue;
        }
        let base = group.index_of(&q.coset_reps()[coset]);
        let options: Vec<usize> = members.iter().map(|&m| table.sum(base, m)).collect();
        let (Some(z), Some(zbar)) = (center, &center_coset) else {
            reps[coset] = Some(options[rng.gen_range(0..options.len())]);
            continue;
        };
        let partner = quotient.index_of(&quotient.sub(zbar, &quotient.element_at(coset)));
        if partner != coset {
            let r = options[rng.gen_range(0..options.len())];
            reps[coset] = Some(r);
            reps[partner] = Some(table.sum(z, neg[r]));
            continue;
        }
        last_fixed = Some(coset);
        let r = match pattern {
            Pattern::Centered(_) => {
                let fit: Vec<usize> = options.into_iter().filter(|&r| table.sum(r, r) == z).collect();
                if fit.is_empty() {
                    return None;
                }
                fit[rng.gen_range(0..fit.len())]
            }
            _ => options[rng.gen_range(0..options.len())],
        };
        reps[coset] = Some(r);
    }
    let mut reps: Vec<usize> = reps.into_iter().map(|r| r.expect("every coset")).collect();
    if let (Pattern::Paired, Some(k)) = (pattern, last_fixed) {
        let rest = (0..c).filter(|&s| s != k).fold(0, |acc, s| table.sum(acc, reps[s]));
        let closing = neg[rest];
        if q.project(&group.element_at(closing)) == k {
            reps[k] = closing;
        }
    }
    Some(reps)
}

fn search_component(q: &QuotientView, a: usize, b: usize) -> Result<Vec<Grid>> {
    let group = q.parent();
    let table = Table::new(group);
    let neg: Vec<usize> = group
        .elements()
        .map(|x| group.index_of(&group.neg(&x)))
        .collect();
    let mut rng = StdRng::seed_from_u64(SEED);
    let c = q.coset_count();
    let mut runs_left = SOLVER_RUNS;
    for attempt in 0..CANDIDATES {
        if runs_left == 0 {
            break;
        }
        let pattern = match attempt % 3 {
            0 => Pattern::Paired,
            1 => Pattern::Centered(rng.gen_range(0..table.n)),
            _ => Pattern::Free,
        };
        let Some(reps) = random_transversal(q, &table, &neg, pattern, &mut rng) else {
            continue;
        };
        if let Some(tiles) = solve_stacked(&table, c, a, b, &reps, &mut runs_left) {
            return Ok(tiles
                .into_iter()
                .map(|t| {
                    t.into_iter()
                        .map(|row| row.into_iter().map(|x| group.element_at(x)).collect())
                        .collect()
                })
                .collect());
        }
    }
    Err(Error::SearchExhausted(format!(
        "no {a}x{b} residual rectangles for {} over {} within the search limits",
        q.abstract_form(),
        q.subgroup().abstract_form()
    )))
}

/// `|Γ/Γ₀|` residual rectangles of size `a × b`, found by search. Entries are
/// representatives of one transversal; each position holds every coset once
/// across the rectangles.
///
/// Each primary part is searched on its own: if the tiles `X_s` solve the
/// problem for one prime and `Y_u` for the others, the tiles `X_s + Y_u`
/// solve it for the product.
pub fn searched_residuals(q: &QuotientView, a: usize, b: usize) -> Result<Vec<Grid>> {
    type Key = (Vec<u64>, Vec<u64>, usize, usize);
    // failures are cached too: they are deterministic and expensive
    static CACHE: OnceLock<Mutex<HashMap<Key, Result<Vec<Grid>>>>> = OnceLock::new();
    let key = (q.parent().moduli().to_vec(), q.subgroup().divisors().to_vec(), a, b);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache poisoned").get(&key) {
        return hit.clone();
    }
    let tiles = combine_components(q, a, b);
    cache.lock().expect("cache poisoned").insert(key, tiles.clone());
    tiles
}

fn combine_components(q: &QuotientView, a: usize, b: usize) -> Result<Vec<Grid>> {
    let group = q.parent();
    let mut tiles: Vec<Grid> = vec![vec![vec![group.zero(); b]; a]];
    for (factors, part) in q.primary_components() {
        let found = search_component(&part, a, b)?;
        tiles = tiles
            .iter()
            .flat_map(|t| {
                found.iter().map(|u| {
                    let mut t = t.clone();
                    for (row, urow) in t.iter_mut().zip(u) {
                        for (x, y) in row.iter_mut().zip(urow) {
                            for (k, &f) in factors.iter().enumerate() {
                                x.0[f] = y.0[k];
                            }
                        }
                    }
                    t
                })
            })
            .collect();
    }
    Ok(tiles)
}
