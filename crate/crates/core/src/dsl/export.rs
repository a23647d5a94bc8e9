//! Machine-readable export (JSON tree) and containment graph (Graphviz DOT).

use std::fmt::Write;

use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::Diagnostic;
use crate::metamodel::{ElementId, ModelDocument, Ref};
use crate::progress::Assessment;
use crate::validator::{resolve, ResolvedModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error("cannot export a model with unresolved references: {}", list(.0))]
    Unresolved(Vec<Diagnostic>),
}

fn list(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| format!("{} ({})", d.path, d.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Resolves `model` and exports it as compact JSON with the top-level keys
/// `areas`, `alphas`, `competencies`, `spaces`, `work_products`, `roles`,
/// `practices` and `methods`, each an array in declaration order.
pub fn export_json(model: &ModelDocument) -> Result<String, ExportError> {
    let resolved = resolve(model).map_err(ExportError::Unresolved)?;
    Ok(Export::new(&resolved).to_json())
}

/// Export of a resolved model, optionally with diagnostics and assessments
/// attached under `diagnostics` and `assessments`.
#[derive(Debug, Clone, Copy)]
pub struct Export<'a> {
    model: &'a ResolvedModel,
    diagnostics: Option<&'a [Diagnostic]>,
    assessments: Option<&'a [Assessment]>,
}

impl<'a> Export<'a> {
    pub fn new(model: &'a ResolvedModel) -> Self {
        Self {
            model,
            diagnostics: None,
            assessments: None,
        }
    }

    pub fn with_diagnostics(mut self, diagnostics: &'a [Diagnostic]) -> Self {
        self.diagnostics = Some(diagnostics);
        self
    }

    pub fn with_assessments(mut self, assessments: &'a [Assessment]) -> Self {
        self.assessments = Some(assessments);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.tree()).expect("export tree serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.tree()).expect("export tree serializes")
    }

    fn tree(&self) -> Tree<'a> {
        let m = self.model;
        Tree {
            areas: m
                .kernels()
                .flat_map(|k| &k.areas)
                .map(|a| AreaOut {
                    id: &a.id,
                    name: a.name(),
                    kind: "area",
                    color: a.color().as_str(),
                })
                .collect(),
            alphas: m
                .alphas()
                .map(|a| AlphaOut {
                    id: &a.id,
                    name: &a.name,
                    kind: "alpha",
                    area: a.area.id(),
                    states: a
                        .states
                        .iter()
                        .enumerate()
                        .map(|(s, state)| StateOut {
                            name: &state.name,
                            checklist: state
                                .checklist
                                .iter()
                                .enumerate()
                                .map(|(i, text)| ItemOut {
                                    key: crate::metamodel::ChecklistKey::new(s, i).to_string(),
                                    text,
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            competencies: m
                .competencies()
                .map(|c| CompetencyOut {
                    id: &c.id,
                    name: &c.name,
                    kind: "competency",
                    area: c.area.id(),
                    max_level: c.max_level,
                    builtin: c.is_builtin(),
                })
                .collect(),
            spaces: m
                .spaces()
                .map(|s| SpaceOut {
                    id: &s.id,
                    name: &s.name,
                    kind: "space",
                    area: s.area.id(),
                    parent: s.parent.as_ref().and_then(target),
                    goal: s.goal.as_deref(),
                    practice: m.owning_practice(s.id.as_str()).map(|p| &p.id),
                })
                .collect(),
            work_products: m
                .work_products()
                .map(|w| WorkProductOut {
                    id: &w.id,
                    name: &w.name,
                    kind: "work_product",
                    category: w.category.as_str(),
                    description: w.description.as_deref(),
                    practice: m.owning_practice(w.id.as_str()).map(|p| &p.id),
                })
                .collect(),
            roles: m
                .roles()
                .map(|r| RoleOut {
                    id: &r.id,
                    name: &r.name,
                    kind: "role",
                    competencies: r
                        .competencies
                        .iter()
                        .map(|c| LevelOut {
                            competency: target(&c.competency),
                            level: c.level,
                        })
                        .collect(),
                })
                .collect(),
            practices: m
                .practices()
                .map(|p| PracticeOut {
                    id: &p.id,
                    name: &p.name,
                    kind: "practice",
                    area: p.area.id(),
                    goals: &p.goals,
                    inputs: &p.inputs,
                    outputs: p.outputs.iter().filter_map(target).collect(),
                    spaces: p.spaces.iter().map(|s| &s.id).collect(),
                    activities: p
                        .activities
                        .iter()
                        .map(|a| ActivityOut {
                            id: &a.id,
                            name: &a.name,
                            kind: "activity",
                            space: a.space.as_ref(),
                            requires: a
                                .required_competencies
                                .iter()
                                .map(|c| LevelOut {
                                    competency: target(&c.competency),
                                    level: c.level,
                                })
                                .collect(),
                            produces: a
                                .produces
                                .iter()
                                .map(|c| ContributionOut {
                                    work_product: target(&c.work_product),
                                    part: c.part.as_deref(),
                                    rendered: c.rendered_name(),
                                })
                                .collect(),
                            role: a.responsible_role.as_ref().and_then(target),
                            tags: &a.tags,
                        })
                        .collect(),
                })
                .collect(),
            methods: m
                .methods()
                .map(|me| MethodOut {
                    id: &me.id,
                    name: &me.name,
                    kind: "method",
                    preamble: me.preamble.as_ref().and_then(target),
                    cycle: me.cycle.iter().filter_map(target).collect(),
                    concurrent: me.concurrent.iter().filter_map(target).collect(),
                })
                .collect(),
            diagnostics: self.diagnostics,
            assessments: self.assessments,
        }
    }
}

fn target(r: &Ref) -> Option<&ElementId> {
    r.target.as_ref()
}

#[derive(Serialize)]
struct Tree<'a> {
    areas: Vec<AreaOut<'a>>,
    alphas: Vec<AlphaOut<'a>>,
    competencies: Vec<CompetencyOut<'a>>,
    spaces: Vec<SpaceOut<'a>>,
    work_products: Vec<WorkProductOut<'a>>,
    roles: Vec<RoleOut<'a>>,
    practices: Vec<PracticeOut<'a>>,
    methods: Vec<MethodOut<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<&'a [Diagnostic]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assessments: Option<&'a [Assessment]>,
}

#[derive(Serialize)]
struct AreaOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    color: &'static str,
}

#[derive(Serialize)]
struct AlphaOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    area: ElementId,
    states: Vec<StateOut<'a>>,
}

#[derive(Serialize)]
struct StateOut<'a> {
    name: &'a str,
    checklist: Vec<ItemOut<'a>>,
}

#[derive(Serialize)]
struct ItemOut<'a> {
    key: String,
    text: &'a str,
}

#[derive(Serialize)]
struct CompetencyOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    area: ElementId,
    max_level: u32,
    builtin: bool,
}

#[derive(Serialize)]
struct SpaceOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    area: ElementId,
    parent: Option<&'a ElementId>,
    goal: Option<&'a str>,
    practice: Option<&'a ElementId>,
}

#[derive(Serialize)]
struct WorkProductOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    category: &'static str,
    description: Option<&'a str>,
    practice: Option<&'a ElementId>,
}

#[derive(Serialize)]
struct LevelOut<'a> {
    competency: Option<&'a ElementId>,
    level: u32,
}

#[derive(Serialize)]
struct RoleOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    competencies: Vec<LevelOut<'a>>,
}

#[derive(Serialize)]
struct ContributionOut<'a> {
    work_product: Option<&'a ElementId>,
    part: Option<&'a str>,
    rendered: String,
}

#[derive(Serialize)]
struct ActivityOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    space: Option<&'a ElementId>,
    requires: Vec<LevelOut<'a>>,
    produces: Vec<ContributionOut<'a>>,
    role: Option<&'a ElementId>,
    tags: &'a [String],
}

#[derive(Serialize)]
struct PracticeOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    area: ElementId,
    goals: &'a [String],
    inputs: &'a [String],
    outputs: Vec<&'a ElementId>,
    spaces: Vec<&'a ElementId>,
    activities: Vec<ActivityOut<'a>>,
}

#[derive(Serialize)]
struct MethodOut<'a> {
    id: &'a ElementId,
    name: &'a str,
    kind: &'static str,
    preamble: Option<&'a ElementId>,
    cycle: Vec<&'a ElementId>,
    concurrent: Vec<&'a ElementId>,
}

fn dot_str(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Containment graph: practice → space → nested space → activity, plus
/// dashed activity → work product edges labelled with the contributed part.
pub fn export_dot(model: &ResolvedModel) -> String {
    let mut out = String::from("digraph essence {\n  rankdir=LR;\n  node [shape=box];\n");
    for p in model.practices() {
        let _ = writeln!(
            out,
            "  {} [label={}, shape=folder, color={}];",
            dot_str(p.id.as_str()),
            dot_str(&p.name),
            p.area.color()
        );
        for w in &p.work_products {
            let _ = writeln!(
                out,
                "  {} [label={}, shape=note];",
                dot_str(w.id.as_str()),
                dot_str(&format!("{} ({})", w.name, w.category))
            );
        }
        for s in &p.spaces {
            let _ = writeln!(
                out,
                "  {} [label={}, style=rounded, color={}];",
                dot_str(s.id.as_str()),
                dot_str(&s.name),
                s.area.color()
            );
            let from = s
                .parent
                .as_ref()
                .and_then(|r| r.target.as_ref())
                .unwrap_or(&p.id);
            let _ = writeln!(out, "  {} -> {};", dot_str(from.as_str()), dot_str(s.id.as_str()));
        }
        for a in &p.activities {
            let _ = writeln!(
                out,
                "  {} [label={}, shape=ellipse];",
                dot_str(a.id.as_str()),
                dot_str(&a.name)
            );
            if let Some(space) = &a.space {
                let _ = writeln!(out, "  {} -> {};", dot_str(space.as_str()), dot_str(a.id.as_str()));
            }
            for c in &a.produces {
                if let Some(t) = &c.work_product.target {
                    let label = c.part.as_deref().unwrap_or("");
                    let _ = writeln!(
                        out,
                        "  {} -> {} [style=dashed, label={}];",
                        dot_str(a.id.as_str()),
                        dot_str(t.as_str()),
                        dot_str(label)
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
