use std::collections::{BTreeMap, BTreeSet};

use essence_core::metamodel::{Alpha, AlphaState, Area, ChecklistKey, ElementId, Method, Ref};
use essence_core::progress::{assess_alpha, enact, next_phase, practice_progress, EnactmentState, Position};
use essence_core::togaf::corpus::load_corpus;
use essence_core::validator::resolve;
use proptest::prelude::*;

fn alpha(states: usize, items: usize) -> Alpha {
    let states = (0..states)
        .map(|s| AlphaState {
            name: format!("state {s}"),
            checklist: (0..items).map(|i| format!("check {s}.{i}")).collect(),
        })
        .collect();
    Alpha::new("A", Area::Solution, states)
}

fn answers(bits: u32, states: usize, items: usize) -> BTreeMap<ChecklistKey, bool> {
    let mut out = BTreeMap::new();
    for s in 0..states {
        for i in 0..items {
            out.insert(ChecklistKey::new(s, i), bits & (1 << (s * items + i)) != 0);
        }
    }
    out
}

/// Brute-force reading of the prefix rule: state k is achieved iff every
/// item of states 0..=k is true; the answer is the largest such k.
fn oracle(bits: u32, states: usize, items: usize) -> Option<usize> {
    (0..states)
        .filter(|&k| (0..=k).all(|s| (0..items).all(|i| bits & (1 << (s * items + i)) != 0)))
        .max()
}

#[test]
fn assessment_matches_oracle_on_all_vectors() {
    let a = alpha(3, 2);
    for bits in 0..64u32 {
        let got = assess_alpha(&a, &answers(bits, 3, 2)).unwrap();
        let want = oracle(bits, 3, 2).map(|k| a.states[k].name.as_str());
        assert_eq!(got, want, "vector {bits:06b}");
    }
}

#[test]
fn assessment_is_monotone_under_single_flips() {
    let a = alpha(3, 2);
    let rank = |bits: u32| assess_alpha(&a, &answers(bits, 3, 2)).unwrap().map(|n| a.state_index(n).unwrap());
    for bits in 0..64u32 {
        for flip in 0..6 {
            if bits & (1 << flip) == 0 {
                assert!(rank(bits | (1 << flip)) >= rank(bits), "{bits:06b} + bit {flip}");
            }
        }
    }
}

#[test]
fn missing_answers_count_as_false() {
    let a = alpha(2, 2);
    let partial: BTreeMap<_, _> = [(ChecklistKey::new(0, 0), true)].into_iter().collect();
    assert_eq!(assess_alpha(&a, &partial).unwrap(), None);
}

fn cyclic(n: usize) -> Method {
    Method {
        id: ElementId::new("method.m"),
        name: "m".into(),
        preamble: None,
        cycle: (0..n)
            .map(|i| Ref::resolved(format!("P{i}"), ElementId::new(format!("practice.p{i}"))))
            .collect(),
        concurrent: Vec::new(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cycle_returns_with_next_iteration(n in 1usize..12, laps in 1u64..4) {
        let start = EnactmentState::start(&cyclic(n)).unwrap();
        let mut s = start.clone();
        for lap in 1..=laps {
            for _ in 0..n {
                let before = s.trace().to_vec();
                s = next_phase(&s);
                prop_assert_eq!(&s.trace()[..before.len()], &before[..]);
            }
            prop_assert_eq!(s.current, Position::Cycle(0));
            prop_assert_eq!(s.iteration, lap);
        }
    }

    #[test]
    fn progress_is_monotone(mask in any::<u16>(), extra in any::<u16>()) {
        let doc = load_corpus().unwrap();
        let p = doc.practice_named("Phase A").unwrap();
        let pick = |m: u16| -> BTreeSet<ElementId> {
            p.activities.iter().enumerate().filter(|(i, _)| m & (1 << (i % 16)) != 0).map(|(_, a)| a.id.clone()).collect()
        };
        let small = pick(mask);
        let large = pick(mask | extra);
        prop_assert!(practice_progress(p, &small).unwrap() <= practice_progress(p, &large).unwrap());
    }
}

#[test]
fn adm_visitation_matches_closed_form() {
    let model = resolve(&load_corpus().unwrap()).unwrap();
    let adm = model.methods().next().unwrap();
    let trace = enact(adm, 20).unwrap();
    let cycle = ["Phase A", "Phase B", "Phase C", "Phase D", "Phase E", "Phase F", "Phase G", "Phase H"];
    for (k, entry) in trace.iter().enumerate() {
        let (name, iteration) = if k == 0 {
            ("Preliminary Phase", 0)
        } else {
            (cycle[(k - 1) % 8], ((k - 1) / 8) as u64)
        };
        assert_eq!(model.lookup(entry.practice.as_str()).unwrap().name(), name, "step {k}");
        assert_eq!(entry.iteration, iteration, "step {k}");
    }
}
