//! Independent oracles for the mapping rules and validator invariants.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use essence_core::metamodel::{ElementId, ElementKind, Practice};
use essence_core::togaf::{ActivitySpec, TogafPhaseSpec};

/// Competencies an activity with these tags must require, written out
/// independently of the library's tag table.
pub fn expected_competencies(tags: &[String]) -> BTreeSet<&'static str> {
    let mut out = BTreeSet::new();
    for t in tags {
        out.insert(match t.as_str() {
            "acquires_information" | "understands_stakeholders" | "processes_requirements" => {
                "Stakeholder Representation"
            }
            "endorses_requirements" => "Analysis",
            "builds" => "Development",
            "verifies" => "Testing",
            "leads" => "Leadership",
            "coordinates" => "Management",
            "governs" => "Governance",
            other => panic!("generator produced tag {other}"),
        });
    }
    if tags.iter().any(|t| t == "endorses_requirements") {
        out.remove("Stakeholder Representation");
    }
    out
}

fn leaves(specs: &[ActivitySpec], out: &mut Vec<ActivitySpec>) {
    for s in specs {
        if s.sub_activities.is_empty() {
            out.push(s.clone());
        } else {
            leaves(&s.sub_activities, out);
        }
    }
}

fn decomposed(specs: &[ActivitySpec]) -> usize {
    specs
        .iter()
        .map(|s| usize::from(!s.sub_activities.is_empty()) + decomposed(&s.sub_activities))
        .sum()
}

pub fn check_mapping_rules(spec: &TogafPhaseSpec, p: &Practice) -> Result<(), String> {
    // R1
    if p.name != spec.phase.practice_name() || p.goals != vec![spec.objective.clone()] {
        return Err("practice name or goal does not follow the phase".into());
    }
    // R2
    let top: Vec<_> = p.top_level_spaces().collect();
    if top.len() != spec.steps.len() {
        return Err(format!("{} top-level spaces for {} steps", top.len(), spec.steps.len()));
    }
    for (space, step) in top.iter().zip(&spec.steps) {
        if space.name != step.name || space.goal != step.goal {
            return Err(format!("space {} does not mirror step {}", space.name, step.name));
        }
    }
    // R3 / R4
    let mut all_leaves = Vec::new();
    let decomposed_count: usize = spec.steps.iter().map(|s| decomposed(&s.activities)).sum();
    for step in &spec.steps {
        leaves(&step.activities, &mut all_leaves);
    }
    if p.activities.len() != all_leaves.len() {
        return Err("activity count differs from leaf count".into());
    }
    if p.spaces.len() != spec.steps.len() + decomposed_count {
        return Err("nested space count differs from decomposed activity count".into());
    }
    for s in &p.spaces {
        let children = p.child_spaces(&s.id).count();
        let direct = p.activities_in(&s.id).count();
        if s.parent.is_some() && children + direct == 0 {
            return Err(format!("nested space {} is empty", s.name));
        }
    }
    // R5
    let outputs: Vec<_> = p.outputs.iter().map(|o| o.name.as_str()).collect();
    let declared: Vec<_> = spec.outputs.iter().map(|o| o.name.as_str()).collect();
    if outputs != declared {
        return Err("outputs differ from declared outputs".into());
    }
    let mut feeders: BTreeMap<&str, usize> = BTreeMap::new();
    for l in &all_leaves {
        for f in &l.feeds {
            *feeders.entry(f.output.as_str()).or_default() += 1;
        }
    }
    let feeds: usize = feeders.values().sum();
    let contributions: usize = p.activities.iter().map(|a| a.produces.len()).sum();
    if feeds != contributions {
        return Err(format!("{feeds} feeds but {contributions} contributions"));
    }
    // R5 colon convention and R6, matched by name (names are unique).
    for a in &p.activities {
        let leaf = all_leaves.iter().find(|l| l.name == a.name).ok_or("unknown activity")?;
        for (c, f) in a.produces.iter().zip(&leaf.feeds) {
            let shared = feeders[f.output.as_str()] >= 2;
            let want = format!("{}: {}", f.output, f.part.as_deref().unwrap_or(""));
            if shared && c.rendered_name() != want {
                return Err(format!("contribution {} should read {want}", c.rendered_name()));
            }
        }
        let got: BTreeSet<&str> = a.required_competencies.iter().map(|r| r.competency.name.as_str()).collect();
        if got != expected_competencies(&leaf.tags) {
            return Err(format!("activity {} requires {got:?}", a.name));
        }
        if a.required_competencies.iter().any(|r| r.level != 3) {
            return Err("default level must be 3".into());
        }
        let endorses = leaf.tags.iter().any(|t| t == "endorses_requirements");
        if got.contains("Analysis") != endorses {
            return Err("Analysis must appear exactly on endorsing activities".into());
        }
    }
    Ok(())
}

/// Adds a renamed copy of every space (with its activities) to a practice.
pub fn duplicate_contents(p: &Practice) -> Practice {
    let mut out = p.clone();
    let mut new_id: HashMap<ElementId, ElementId> = HashMap::new();
    for s in &p.spaces {
        let parent = s
            .parent
            .as_ref()
            .and_then(|r| r.target.as_ref())
            .map(|t| new_id[t].clone());
        let name = if parent.is_none() { format!("{} copy", s.name) } else { s.name.clone() };
        let id = out.add_space(parent.as_ref(), name, s.area, s.goal.clone());
        new_id.insert(s.id.clone(), id);
    }
    for a in &p.activities {
        let mut dup = a.clone();
        let space = new_id[a.space.as_ref().unwrap()].clone();
        dup.id = space.child(ElementKind::Activity, &a.name);
        dup.space = Some(space);
        out.activities.push(dup);
    }
    out
}

/// A practice whose single activity sits `depth` spaces deep.
pub fn nested(depth: usize) -> String {
    let mut body = String::from(r#"activity "Leaf" requires Analysis @ 2"#);
    for d in (1..=depth).rev() {
        body = format!("space \"Level {d}\" goal \"g\" {{ {body} }}");
    }
    format!("{}practice \"Deep\" area Solution {{ goal \"g\" {body} }}", super::KERNEL)
}
