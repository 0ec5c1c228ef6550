use std::sync::OnceLock;

use proptest::prelude::*;

use magic_rect::decider::{decide, existence_table, Instance, Status};
use magic_rect::group::groups_up_to;
use magic_rect::kotzig::{build_kotzig, complete_mapping, verify_kotzig};
use magic_rect::oracle::{search_mrs, SearchResult};
use magic_rect::{construct, verify_mrs, AbelianGroup, GroupElement};

fn constructible(max_order: u64) -> Vec<Instance> {
    existence_table(max_order)
        .into_iter()
        .filter(|i| i.verdict.status == Status::Exists)
        .collect()
}

fn cached(cell: &'static OnceLock<Vec<Instance>>, make: impl FnOnce() -> Vec<Instance>) -> &'static [Instance] {
    cell.get_or_init(make)
}

static UP_TO_36: OnceLock<Vec<Instance>> = OnceLock::new();
static UP_TO_48: OnceLock<Vec<Instance>> = OnceLock::new();
static MULTI_24: OnceLock<Vec<Instance>> = OnceLock::new();

fn group_and_element() -> impl Strategy<Value = (AbelianGroup, GroupElement, GroupElement, GroupElement)> {
    let groups = groups_up_to(64);
    (0..groups.len(), any::<u64>(), any::<u64>(), any::<u64>()).prop_map(move |(i, x, y, z)| {
        let g = groups[i].clone();
        let n = g.order();
        let pick = |v: u64| g.element_at((v % n) as usize);
        let (x, y, z) = (pick(x), pick(y), pick(z));
        (g, x, y, z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_laws((g, x, y, z) in group_and_element()) {
        prop_assert_eq!(g.add(&x, &y), g.add(&y, &x));
        prop_assert_eq!(g.add(&g.add(&x, &y), &z), g.add(&x, &g.add(&y, &z)));
        prop_assert_eq!(g.add(&x, &g.neg(&x)), g.zero());
        prop_assert_eq!(g.sub(&g.add(&x, &y), &y), x.clone());
        prop_assert_eq!(g.element_at(g.index_of(&x)), x);
    }

    #[test]
    fn constructed_sets_satisfy_forced_identity(idx in 0usize..10_000) {
        let all = cached(&UP_TO_36, || constructible(36));
        let inst = &all[idx % all.len()];
        let m = construct(inst.a, inst.b, inst.c, &inst.group).unwrap();
        prop_assert!(verify_mrs(&m).is_valid());
        let g = &m.group;
        prop_assert_eq!(g.scale(m.a as i64, &m.omega), g.scale(m.b as i64, &m.delta));
        let total = g.scale((m.a * m.c) as i64, &m.omega);
        prop_assert_eq!(total, g.sum_of_all_elements());
        let t = m.transpose();
        prop_assert!(verify_mrs(&t).is_valid());
    }

    #[test]
    fn verdict_ignores_orientation(idx in 0usize..10_000) {
        let all = cached(&UP_TO_48, || existence_table(48));
        let inst = &all[idx % all.len()];
        let flipped = decide(inst.b, inst.a, inst.c, &inst.group).unwrap();
        prop_assert_eq!(flipped.status, inst.verdict.status);
    }

    #[test]
    fn kotzig_arrays_verify(gi in 0usize..1000, j in 2usize..7) {
        let groups = groups_up_to(32);
        let g = &groups[gi % groups.len()];
        if let Ok(k) = build_kotzig(j, g) {
            prop_assert!(verify_kotzig(&k).is_valid());
        }
    }

    #[test]
    fn swapping_across_rectangles_is_caught(idx in 0usize..10_000, cell in 0usize..10_000) {
        let all = cached(&MULTI_24, || constructible(24).into_iter().filter(|i| i.c > 1).collect());
        let inst = &all[idx % all.len()];
        let good = construct(inst.a, inst.b, inst.c, &inst.group).unwrap();
        let (i, j) = ((cell / inst.b) % inst.a, cell % inst.b);
        let mut bad = good.clone();
        bad.rectangles[0][i][j] = bad.rectangles[1][i][j].clone();
        prop_assert!(!verify_mrs(&bad).is_valid());
    }
}

#[test]
fn oracle_witnesses_satisfy_forced_identity() {
    for inst in existence_table(12) {
        let out = search_mrs(inst.a, inst.b, inst.c, &inst.group, 5_000_000).unwrap();
        if let SearchResult::Found(m) = out.result {
            assert!(verify_mrs(&m).is_valid());
            let g = &m.group;
            assert_eq!(g.scale(m.a as i64, &m.omega), g.scale(m.b as i64, &m.delta));
        }
    }
}

#[test]
fn complete_mappings_missing_exactly_for_one_involution() {
    for g in groups_up_to(16) {
        let even_factors = g.moduli().iter().filter(|m| *m % 2 == 0).count();
        if even_factors != 1 {
            assert!(complete_mapping(&g).is_some(), "{g}");
        } else if g.order() <= 12 {
            // exhaustive proofs of absence get slow past this order
            assert!(complete_mapping(&g).is_none(), "{g}");
        }
    }
}
