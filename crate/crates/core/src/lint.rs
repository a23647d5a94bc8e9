//! Quality rules for method descriptions. Every lint is a warning: a model
//! with lint findings still resolves, exports and enacts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::diagnostic::{Diagnostic, RuleId, Severity};
use crate::metamodel::ElementId;
use crate::validator::ResolvedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LintRule {
    pub id: RuleId,
    pub name: &'static str,
    pub severity: Severity,
    pub description: &'static str,
}

pub const CATALOG: [LintRule; 4] = [
    LintRule {
        id: RuleId::L001,
        name: "unfed-deliverable",
        severity: Severity::Warning,
        description: "practice output that no activity produces; the method does not say which activity feeds the deliverable",
    },
    LintRule {
        id: RuleId::L002,
        name: "multiply-defined-deliverable",
        severity: Severity::Warning,
        description: "work product declared in several practices with a different category or description",
    },
    LintRule {
        id: RuleId::L003,
        name: "unassigned-role",
        severity: Severity::Warning,
        description: "role that no activity names as responsible",
    },
    LintRule {
        id: RuleId::L004,
        name: "opaque-step",
        severity: Severity::Warning,
        description: "activity space with neither a goal nor any activities",
    },
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LintError {
    #[error("unknown lint rule `{0}` (valid rules: L001, L002, L003, L004)")]
    UnknownRule(String),
}

pub fn rule(id: RuleId) -> Option<&'static LintRule> {
    CATALOG.iter().find(|r| r.id == id)
}

pub fn all_rules() -> BTreeSet<RuleId> {
    CATALOG.iter().map(|r| r.id).collect()
}

/// Parses rule ids such as `L001`.
pub fn rule_set<S: AsRef<str>>(ids: impl IntoIterator<Item = S>) -> Result<BTreeSet<RuleId>, LintError> {
    ids.into_iter()
        .map(|s| {
            let s = s.as_ref().trim();
            RuleId::parse(s)
                .filter(|r| r.is_lint())
                .ok_or_else(|| LintError::UnknownRule(s.to_string()))
        })
        .collect()
}

fn normalize(text: Option<&str>) -> String {
    text.unwrap_or("").split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Runs the enabled rules. Diagnostics are ordered by the declaration order
/// of the offending element, then by rule id.
pub fn run_lints(model: &ResolvedModel, enabled: &BTreeSet<RuleId>) -> Result<Vec<Diagnostic>, LintError> {
    if let Some(bad) = enabled.iter().find(|r| !r.is_lint()) {
        return Err(LintError::UnknownRule(bad.to_string()));
    }
    let mut out = Vec::new();
    let warn = |rule: RuleId, id: &ElementId, message: String| {
        Diagnostic::warning(rule, id.as_str(), message).with_span(model.span(id.as_str()).cloned())
    };
    let activities = || model.practices().flat_map(|p| &p.activities);

    if enabled.contains(&RuleId::L001) {
        let produced: BTreeSet<&ElementId> = activities()
            .flat_map(|a| &a.produces)
            .filter_map(|c| c.work_product.target.as_ref())
            .collect();
        for p in model.practices() {
            for o in &p.outputs {
                let Some(target) = &o.target else { continue };
                if !produced.contains(target) {
                    out.push(warn(
                        RuleId::L001,
                        target,
                        format!("output \"{}\" of practice \"{}\" is produced by no activity", o.name, p.name),
                    ));
                }
            }
        }
    }

    if enabled.contains(&RuleId::L002) {
        let mut by_name: BTreeMap<&str, Vec<(&str, &crate::metamodel::WorkProduct)>> = BTreeMap::new();
        for p in model.practices() {
            for w in &p.work_products {
                by_name.entry(w.name.as_str()).or_default().push((p.name.as_str(), w));
            }
        }
        for group in by_name.values() {
            let practices: BTreeSet<&str> = group.iter().map(|(p, _)| *p).collect();
            let variants: BTreeSet<(&str, String)> = group
                .iter()
                .map(|(_, w)| (w.category.as_str(), normalize(w.description.as_deref())))
                .collect();
            if practices.len() < 2 || variants.len() < 2 {
                continue;
            }
            let listed: Vec<_> = practices.iter().map(|p| format!("\"{p}\"")).collect();
            for (_, w) in group {
                out.push(warn(
                    RuleId::L002,
                    &w.id,
                    format!(
                        "work product \"{}\" is defined differently in practices {}",
                        w.name,
                        listed.join(", ")
                    ),
                ));
            }
        }
    }

    if enabled.contains(&RuleId::L003) {
        let assigned: BTreeSet<&ElementId> = activities()
            .filter_map(|a| a.responsible_role.as_ref())
            .filter_map(|r| r.target.as_ref())
            .collect();
        for r in model.roles() {
            if !assigned.contains(&r.id) {
                out.push(warn(
                    RuleId::L003,
                    &r.id,
                    format!("role \"{}\" is responsible for no activity", r.name),
                ));
            }
        }
    }

    if enabled.contains(&RuleId::L004) {
        for p in model.practices() {
            for s in &p.spaces {
                let prefix = format!("{}/", s.id);
                let has_goal = s.goal.as_deref().is_some_and(|g| !g.trim().is_empty());
                let has_work = p.activities.iter().any(|a| {
                    a.space
                        .as_ref()
                        .is_some_and(|sp| *sp == s.id || sp.as_str().starts_with(&prefix))
                });
                if !has_goal && !has_work {
                    out.push(warn(
                        RuleId::L004,
                        &s.id,
                        format!("activity space \"{}\" states neither a goal nor any activities", s.name),
                    ));
                }
            }
        }
    }

    out.sort_by_key(|d| (model.position(&d.path), d.rule));
    Ok(out)
}
