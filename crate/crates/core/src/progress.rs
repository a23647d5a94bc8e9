//! Alpha-state assessment and enactment of cyclic methods.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::metamodel::{Alpha, ChecklistKey, ElementId, Method, Practice, Ref};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgressError {
    #[error("alpha `{alpha}` has no checklist item {key}")]
    UnknownItem { alpha: String, key: ChecklistKey },
    #[error("method `{0}` has an empty cycle")]
    EmptyCycle(String),
    #[error("method `{method}` refers to unresolved practice `{practice}`")]
    Unresolved { method: String, practice: String },
    #[error("activity `{activity}` does not belong to practice `{practice}`")]
    ForeignActivity { practice: String, activity: String },
}

/// Returns the last state of the longest prefix of `alpha`'s states whose
/// checklist items are all answered true. Missing answers count as false.
pub fn assess_alpha<'a>(
    alpha: &'a Alpha,
    answers: &BTreeMap<ChecklistKey, bool>,
) -> Result<Option<&'a str>, ProgressError> {
    if let Some(key) = answers.keys().find(|k| alpha.item(**k).is_none()) {
        return Err(ProgressError::UnknownItem {
            alpha: alpha.name.clone(),
            key: *key,
        });
    }
    let mut achieved = None;
    for (s, state) in alpha.states.iter().enumerate() {
        let complete = (0..state.checklist.len())
            .all(|i| answers.get(&ChecklistKey::new(s, i)).copied().unwrap_or(false));
        if !complete {
            break;
        }
        achieved = Some(state.name.as_str());
    }
    Ok(achieved)
}

/// A recorded assessment of one alpha.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assessment {
    pub alpha: ElementId,
    pub answers: BTreeMap<ChecklistKey, bool>,
    pub achieved: Option<String>,
}

impl Assessment {
    pub fn new(alpha: &Alpha, answers: BTreeMap<ChecklistKey, bool>) -> Result<Self, ProgressError> {
        let achieved = assess_alpha(alpha, &answers)?.map(str::to_string);
        Ok(Self {
            alpha: alpha.id.clone(),
            answers,
            achieved,
        })
    }
}

/// Where an enactment currently stands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Position {
    Preamble,
    Cycle(usize),
}

/// One completed practice visit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub iteration: u64,
    pub practice: ElementId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnactmentState {
    pub method: ElementId,
    preamble: Option<ElementId>,
    cycle: Vec<ElementId>,
    concurrent: Vec<ElementId>,
    pub iteration: u64,
    pub current: Position,
    trace: Vec<TraceEntry>,
}

fn target(method: &Method, r: &Ref) -> Result<ElementId, ProgressError> {
    r.target.clone().ok_or_else(|| ProgressError::Unresolved {
        method: method.name.clone(),
        practice: r.name.clone(),
    })
}

impl EnactmentState {
    /// Starts an enactment of a resolved method, at its preamble if it has
    /// one and otherwise at the first cycle practice.
    pub fn start(method: &Method) -> Result<Self, ProgressError> {
        if method.cycle.is_empty() {
            return Err(ProgressError::EmptyCycle(method.name.clone()));
        }
        let preamble = method.preamble.as_ref().map(|r| target(method, r)).transpose()?;
        let cycle = method
            .cycle
            .iter()
            .map(|r| target(method, r))
            .collect::<Result<Vec<_>, _>>()?;
        let concurrent = method
            .concurrent
            .iter()
            .map(|r| target(method, r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            method: method.id.clone(),
            current: if preamble.is_some() {
                Position::Preamble
            } else {
                Position::Cycle(0)
            },
            preamble,
            cycle,
            concurrent,
            iteration: 0,
            trace: Vec::new(),
        })
    }

    pub fn current_practice(&self) -> &ElementId {
        match self.current {
            Position::Preamble => self.preamble.as_ref().expect("preamble position implies a preamble"),
            Position::Cycle(k) => &self.cycle[k],
        }
    }

    pub fn trace(&self) -> &[TraceEntry] {
        &self.trace
    }

    /// Completes the current practice and moves to the next one. The
    /// preamble runs once; after the last cycle practice the cycle restarts
    /// with the iteration counter incremented.
    pub fn advance(&mut self) {
        self.trace.push(TraceEntry {
            iteration: self.iteration,
            practice: self.current_practice().clone(),
        });
        self.current = match self.current {
            Position::Preamble => Position::Cycle(0),
            Position::Cycle(k) if k + 1 < self.cycle.len() => Position::Cycle(k + 1),
            Position::Cycle(_) => {
                self.iteration += 1;
                Position::Cycle(0)
            }
        };
    }

    /// The current practice plus every concurrent practice of the method.
    pub fn active_practices(&self) -> BTreeSet<ElementId> {
        let mut active: BTreeSet<ElementId> = self.concurrent.iter().cloned().collect();
        active.insert(self.current_practice().clone());
        active
    }
}

/// Returns the state after completing the current practice.
pub fn next_phase(state: &EnactmentState) -> EnactmentState {
    let mut next = state.clone();
    next.advance();
    next
}

pub fn active_practices(state: &EnactmentState) -> BTreeSet<ElementId> {
    state.active_practices()
}

/// Runs `steps` completions of `method` from its start and returns the trace.
pub fn enact(method: &Method, steps: usize) -> Result<Vec<TraceEntry>, ProgressError> {
    let mut state = EnactmentState::start(method)?;
    for _ in 0..steps {
        state.advance();
    }
    Ok(state.trace)
}

/// Fraction of the practice's activities found in `done`; a practice with
/// no activities counts as complete.
pub fn practice_progress(practice: &Practice, done: &BTreeSet<ElementId>) -> Result<f64, ProgressError> {
    if let Some(foreign) = done.iter().find(|d| !practice.activities.iter().any(|a| &a.id == *d)) {
        return Err(ProgressError::ForeignActivity {
            practice: practice.name.clone(),
            activity: foreign.to_string(),
        });
    }
    if practice.activities.is_empty() {
        return Ok(1.0);
    }
    Ok(done.len() as f64 / practice.activities.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metamodel::{Activity, Area, AlphaState};

    fn alpha(items: &[usize]) -> Alpha {
        let states = items
            .iter()
            .enumerate()
            .map(|(s, n)| AlphaState {
                name: format!("S{}", s + 1),
                checklist: (0..*n).map(|i| format!("item {i}")).collect(),
            })
            .collect();
        Alpha::new("Subject", Area::Customer, states)
    }

    fn answers(pairs: &[((usize, usize), bool)]) -> BTreeMap<ChecklistKey, bool> {
        pairs.iter().map(|((s, i), v)| (ChecklistKey::new(*s, *i), *v)).collect()
    }

    #[test]
    fn saturation_and_empty() {
        let a = alpha(&[2, 2, 2]);
        let all: Vec<_> = a.items().map(|i| ((i.key.state, i.key.item), true)).collect();
        assert_eq!(assess_alpha(&a, &answers(&all)).unwrap(), Some("S3"));
        assert_eq!(assess_alpha(&a, &BTreeMap::new()).unwrap(), None);
    }

    #[test]
    fn gap_stops_the_prefix() {
        let a = alpha(&[2, 2, 2]);
        let ans = answers(&[
            ((0, 0), true),
            ((0, 1), true),
            ((1, 0), true),
            ((2, 0), true),
            ((2, 1), true),
        ]);
        assert_eq!(assess_alpha(&a, &ans).unwrap(), Some("S1"));
    }

    #[test]
    fn unknown_key_is_named() {
        let a = alpha(&[1]);
        let err = assess_alpha(&a, &answers(&[((0, 3), true)])).unwrap_err();
        assert_eq!(err.to_string(), "alpha `Subject` has no checklist item 1.4");
    }

    fn method(preamble: bool, cycle: &[&str], concurrent: &[&str]) -> Method {
        let r = |n: &str| Ref::resolved(n, ElementId::new(format!("practice.{}", n.to_lowercase())));
        Method {
            id: ElementId::new("method.m"),
            name: "m".into(),
            preamble: preamble.then(|| r("P")),
            cycle: cycle.iter().map(|n| r(n)).collect(),
            concurrent: concurrent.iter().map(|n| r(n)).collect(),
        }
    }

    #[test]
    fn wraps_and_counts_iterations() {
        let trace = enact(&method(true, &["A", "B"], &["RM"]), 6).unwrap();
        let got: Vec<_> = trace
            .iter()
            .map(|e| (e.iteration, e.practice.as_str().to_string()))
            .collect();
        let want: Vec<_> = [(0, "p"), (0, "a"), (0, "b"), (1, "a"), (1, "b"), (2, "a")]
            .iter()
            .map(|(i, p)| (*i as u64, format!("practice.{p}")))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn concurrent_practices_stay_active() {
        let mut s = EnactmentState::start(&method(true, &["A"], &["RM"])).unwrap();
        let expect = |cur: &str| -> BTreeSet<ElementId> {
            [ElementId::new(cur), ElementId::new("practice.rm")].into_iter().collect()
        };
        assert_eq!(active_practices(&s), expect("practice.p"));
        s.advance();
        assert_eq!(active_practices(&s), expect("practice.a"));
        let solo = EnactmentState::start(&method(false, &["A"], &[])).unwrap();
        assert_eq!(solo.active_practices().len(), 1);
    }

    #[test]
    fn next_phase_leaves_input_untouched() {
        let s = EnactmentState::start(&method(false, &["A", "B"], &[])).unwrap();
        let n = next_phase(&s);
        assert!(s.trace().is_empty());
        assert_eq!(n.trace().len(), 1);
        assert_eq!(n.current, Position::Cycle(1));
    }

    #[test]
    fn empty_cycle_rejected() {
        let err = EnactmentState::start(&method(true, &[], &[])).unwrap_err();
        assert_eq!(err, ProgressError::EmptyCycle("m".into()));
    }

    #[test]
    fn progress_ratio() {
        let mut p = Practice::new("P", Area::Endeavor);
        let space = p.add_space(None, "S", Area::Endeavor, None);
        for n in ["a", "b", "c", "d"] {
            p.activities.push(Activity::new(&space, n));
        }
        let ids: Vec<_> = p.activities.iter().map(|a| a.id.clone()).collect();
        let done = |n: usize| ids[..n].iter().cloned().collect::<BTreeSet<_>>();
        assert_eq!(practice_progress(&p, &done(0)).unwrap(), 0.0);
        assert_eq!(practice_progress(&p, &done(3)).unwrap(), 0.75);
        assert_eq!(practice_progress(&p, &done(4)).unwrap(), 1.0);
        let foreign = [ElementId::new("activity.x")].into_iter().collect();
        assert!(practice_progress(&p, &foreign).is_err());
        assert_eq!(practice_progress(&Practice::new("E", Area::Customer), &BTreeSet::new()).unwrap(), 1.0);
    }
}
