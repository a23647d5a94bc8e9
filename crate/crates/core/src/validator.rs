//! Reference resolution and well-formedness rules.
//!
//! | rule | severity | meaning |
//! |------|----------|---------|
//! | V001 | error    | dangling reference |
//! | V002 | error    | duplicate name within a kind (or duplicate id) |
//! | V010 | error    | practice without goal |
//! | V011 | error    | activity-space nesting deeper than the configured maximum |
//! | V012 | error    | activity-space nesting cycle |
//! | V013 | error    | competency level outside 1..5 (or above the competency's maximum) |
//! | V014 | error    | shared work product contribution without a distinct part |
//! | V015 | warning  | declared practice area outside the plurality of its area profile |
//! | V016 | error    | activity attached to no space of its practice |

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::Deref;

use crate::diagnostic::{Diagnostic, RuleId};
use crate::metamodel::{
    ActivitySpace, Area, CompetencyRequirement, Declaration, ElementId, ModelDocument, Practice, Ref,
    DEFAULT_MAX_DEPTH, MAX_LEVEL, MIN_LEVEL,
};

/// A document whose references all carry a target id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedModel {
    doc: ModelDocument,
}

impl ResolvedModel {
    pub fn document(&self) -> &ModelDocument {
        &self.doc
    }

    pub fn into_document(self) -> ModelDocument {
        self.doc
    }
}

impl Deref for ResolvedModel {
    type Target = ModelDocument;

    fn deref(&self) -> &ModelDocument {
        &self.doc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationConfig {
    pub max_nesting_depth: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            max_nesting_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

/// Element counts per area of concern for one practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AreaProfile {
    counts: [usize; 3],
}

impl AreaProfile {
    pub fn from_counts(counts: [usize; 3]) -> Self {
        Self { counts }
    }

    pub fn count(&self, area: Area) -> usize {
        self.counts[area.index()]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Areas with the maximal count; empty when nothing was counted.
    pub fn plurality(&self) -> Vec<Area> {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        if max == 0 {
            return Vec::new();
        }
        Area::ALL
            .into_iter()
            .filter(|a| self.count(*a) == max)
            .collect()
    }

    /// The plurality area, ties broken toward Endeavor, then Solution.
    /// An empty profile yields Endeavor.
    pub fn preferred_area(&self) -> Area {
        self.plurality().last().copied().unwrap_or(Area::Endeavor)
    }
}

/// Counts top-level spaces by their area plus every competency requirement
/// of every activity by the required competency's area.
pub fn compute_area_profile(practice: &Practice, model: &ModelDocument) -> AreaProfile {
    let mut counts = [0usize; 3];
    for s in practice.top_level_spaces() {
        counts[s.area.index()] += 1;
    }
    for a in &practice.activities {
        for req in &a.required_competencies {
            let competency = match &req.competency.target {
                Some(id) => model.competencies().find(|c| &c.id == id),
                None => model.competency_named(&req.competency.name),
            };
            if let Some(c) = competency {
                counts[c.area.index()] += 1;
            }
        }
    }
    AreaProfile { counts }
}

/// Resolves every by-name reference. Resolution is case-sensitive and
/// document-wide, except that work products are looked up in the owning
/// practice before the kernels.
pub fn resolve(model: &ModelDocument) -> Result<ResolvedModel, Vec<Diagnostic>> {
    let mut r = Resolver::new(model);
    let (mut decls, spans) = model.clone().into_parts();
    for decl in &mut decls {
        r.resolve_decl(decl);
    }
    if !r.errors.is_empty() {
        r.errors.sort_by_key(|d| (model.position(&d.path), d.rule));
        return Err(r.errors);
    }
    let doc = ModelDocument::new(decls, spans)?;
    Ok(ResolvedModel { doc })
}

struct Resolver<'m> {
    model: &'m ModelDocument,
    areas: HashSet<Area>,
    competencies: HashMap<&'m str, ElementId>,
    roles: HashMap<&'m str, ElementId>,
    practices: HashMap<&'m str, ElementId>,
    kernel_spaces: HashMap<&'m str, ElementId>,
    kernel_work_products: HashMap<&'m str, ElementId>,
    errors: Vec<Diagnostic>,
}

impl<'m> Resolver<'m> {
    fn new(model: &'m ModelDocument) -> Self {
        let mut errors = Vec::new();
        let mut table = |kind: &str, items: Vec<(&'m str, &'m ElementId)>| {
            let mut map: HashMap<&'m str, ElementId> = HashMap::new();
            for (name, id) in items {
                if let Some(first) = map.get(name) {
                    errors.push(
                        Diagnostic::error(
                            RuleId::V002,
                            id.as_str(),
                            format!("duplicate {kind} name `{name}` (also `{first}`)"),
                        )
                        .with_span(model.span(id.as_str()).cloned()),
                    );
                } else {
                    map.insert(name, id.clone());
                }
            }
            map
        };
        let competencies = table(
            "competency",
            model.competencies().map(|c| (c.name.as_str(), &c.id)).collect(),
        );
        let roles = table("role", model.roles().map(|c| (c.name.as_str(), &c.id)).collect());
        let practices = table(
            "practice",
            model.practices().map(|c| (c.name.as_str(), &c.id)).collect(),
        );
        let kernel_spaces = table(
            "space",
            model
                .kernels()
                .flat_map(|k| k.spaces.iter())
                .map(|c| (c.name.as_str(), &c.id))
                .collect(),
        );
        let kernel_work_products = table(
            "work product",
            model
                .kernels()
                .flat_map(|k| k.work_products.iter())
                .map(|c| (c.name.as_str(), &c.id))
                .collect(),
        );
        table("method", model.methods().map(|c| (c.name.as_str(), &c.id)).collect());
        table(
            "alpha",
            model.alphas().map(|c| (c.name.as_str(), &c.id)).collect(),
        );
        for p in model.practices() {
            table(
                "work product",
                p.work_products.iter().map(|w| (w.name.as_str(), &w.id)).collect(),
            );
        }
        let areas = model
            .kernels()
            .flat_map(|k| k.areas.iter().map(|a| a.area))
            .collect();
        Self {
            model,
            areas,
            competencies,
            roles,
            practices,
            kernel_spaces,
            kernel_work_products,
            errors,
        }
    }

    fn dangling(&mut self, owner: &ElementId, what: &str, name: &str) {
        self.errors.push(
            Diagnostic::error(
                RuleId::V001,
                owner.as_str(),
                format!("reference to undeclared {what} `{name}`"),
            )
            .with_span(self.model.span(owner.as_str()).cloned()),
        );
    }

    fn area(&mut self, owner: &ElementId, area: Area) {
        if !self.areas.contains(&area) {
            self.dangling(owner, "area", area.name());
        }
    }

    fn bind(&mut self, owner: &ElementId, what: &str, r: &mut Ref, target: Option<ElementId>) {
        match target {
            Some(id) => r.target = Some(id),
            None => self.dangling(owner, what, &r.name.clone()),
        }
    }

    fn competency(&mut self, owner: &ElementId, req: &mut CompetencyRequirement) {
        let target = self.competencies.get(req.competency.name.as_str()).cloned();
        self.bind(owner, "competency", &mut req.competency, target);
    }

    fn resolve_decl(&mut self, decl: &mut Declaration) {
        match decl {
            Declaration::Kernel(k) => {
                for a in &k.alphas {
                    self.area(&a.id, a.area);
                }
                for c in &k.competencies {
                    self.area(&c.id, c.area);
                }
                for s in &mut k.spaces {
                    self.area(&s.id, s.area);
                    if let Some(parent) = &mut s.parent {
                        let target = self.kernel_spaces.get(parent.name.as_str()).cloned();
                        self.bind(&s.id, "space", parent, target);
                    }
                }
            }
            Declaration::Role(role) => {
                for req in &mut role.competencies {
                    self.competency(&role.id, req);
                }
            }
            Declaration::Practice(p) => self.resolve_practice(p),
            Declaration::Method(m) => {
                let refs = m
                    .preamble
                    .iter_mut()
                    .chain(m.cycle.iter_mut())
                    .chain(m.concurrent.iter_mut());
                for r in refs {
                    let target = self.practices.get(r.name.as_str()).cloned();
                    if target.is_none() {
                        self.dangling(&m.id, "practice", &r.name);
                    }
                    r.target = target;
                }
            }
            Declaration::Phase(ph) => {
                let id = ph.id.clone();
                let outputs: HashSet<&str> = ph.outputs.iter().map(|o| o.name.as_str()).collect();
                let mut missing = Vec::new();
                for a in ph.all_activities() {
                    if let Some(role) = &a.role {
                        if !self.roles.contains_key(role.as_str()) {
                            missing.push(("role", role.clone()));
                        }
                    }
                    for f in &a.feeds {
                        if !outputs.contains(f.output.as_str()) {
                            missing.push(("output", f.output.clone()));
                        }
                    }
                }
                for (what, name) in missing {
                    self.dangling(&id, what, &name);
                }
            }
        }
    }

    fn resolve_practice(&mut self, p: &mut Practice) {
        self.area(&p.id, p.area);
        let local: HashMap<String, ElementId> = p
            .work_products
            .iter()
            .map(|w| (w.name.clone(), w.id.clone()))
            .collect();
        let space_ids: HashSet<ElementId> = p.spaces.iter().map(|s| s.id.clone()).collect();
        let wp_target = |this: &Self, name: &str| {
            local
                .get(name)
                .or_else(|| this.kernel_work_products.get(name))
                .cloned()
        };
        for out in &mut p.outputs {
            let target = wp_target(self, &out.name);
            self.bind(&p.id, "work product", out, target);
        }
        for s in &mut p.spaces {
            self.area(&s.id, s.area);
            if let Some(parent) = &mut s.parent {
                let ok = parent.target.as_ref().is_some_and(|t| space_ids.contains(t));
                if !ok {
                    let name = parent.name.clone();
                    self.dangling(&s.id, "space", &name);
                }
            }
        }
        for a in &mut p.activities {
            for req in &mut a.required_competencies {
                self.competency(&a.id, req);
            }
            for c in &mut a.produces {
                let target = wp_target(self, &c.work_product.name);
                self.bind(&a.id, "work product", &mut c.work_product, target);
            }
            if let Some(role) = &mut a.responsible_role {
                let target = self.roles.get(role.name.as_str()).cloned();
                self.bind(&a.id, "role", role, target);
            }
        }
    }
}

/// Runs every well-formedness rule and returns all violations, ordered by
/// element declaration order then rule id.
pub fn check_wellformedness(model: &ResolvedModel, config: &ValidationConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let span = |id: &ElementId| model.span(id.as_str()).cloned();

    for p in model.practices() {
        if p.goals.iter().all(|g| g.trim().is_empty()) {
            out.push(
                Diagnostic::error(RuleId::V010, p.id.as_str(), "practice has no goal").with_span(span(&p.id)),
            );
        }
    }

    check_nesting(model, config, &mut out);
    check_levels(model, &mut out);
    check_contributions(model, &mut out);

    for p in model.practices() {
        let profile = compute_area_profile(p, model);
        let plurality = profile.plurality();
        if !plurality.is_empty() && !plurality.contains(&p.area) {
            let names: Vec<_> = plurality.iter().map(|a| a.name()).collect();
            out.push(
                Diagnostic::warning(
                    RuleId::V015,
                    p.id.as_str(),
                    format!(
                        "declared area {} is not in the plurality {{{}}} of its elements (Customer {}, Solution {}, Endeavor {})",
                        p.area,
                        names.join(", "),
                        profile.count(Area::Customer),
                        profile.count(Area::Solution),
                        profile.count(Area::Endeavor),
                    ),
                )
                .with_span(span(&p.id)),
            );
        }
        for a in &p.activities {
            let attached = a
                .space
                .as_ref()
                .is_some_and(|s| p.spaces.iter().any(|sp| &sp.id == s));
            if !attached {
                out.push(
                    Diagnostic::error(RuleId::V016, a.id.as_str(), "activity is attached to no space of its practice")
                        .with_span(span(&a.id)),
                );
            }
        }
    }

    out.sort_by_key(|d| (model.position(&d.path), d.rule));
    out
}

fn parent_id(space: &ActivitySpace) -> Option<&ElementId> {
    space.parent.as_ref().and_then(|p| p.target.as_ref())
}

fn check_nesting(model: &ResolvedModel, config: &ValidationConfig, out: &mut Vec<Diagnostic>) {
    let spaces: Vec<&ActivitySpace> = model.spaces().collect();
    let parents: HashMap<&ElementId, Option<&ElementId>> =
        spaces.iter().map(|s| (&s.id, parent_id(s))).collect();
    for s in &spaces {
        let mut depth = 1;
        let mut seen = HashSet::from([&s.id]);
        let mut cursor = parents.get(&s.id).copied().flatten();
        let mut cyclic = false;
        let mut enters_cycle = false;
        while let Some(p) = cursor {
            if p == &s.id {
                cyclic = true;
                break;
            }
            if !seen.insert(p) {
                enters_cycle = true;
                break;
            }
            depth += 1;
            cursor = parents.get(p).copied().flatten();
        }
        let span = model.span(s.id.as_str()).cloned();
        if cyclic {
            out.push(
                Diagnostic::error(RuleId::V012, s.id.as_str(), "activity space is nested inside itself")
                    .with_span(span),
            );
        } else if !enters_cycle && depth > config.max_nesting_depth {
            out.push(
                Diagnostic::error(
                    RuleId::V011,
                    s.id.as_str(),
                    format!(
                        "activity space is nested at depth {depth}, maximum is {}",
                        config.max_nesting_depth
                    ),
                )
                .with_span(span),
            );
        }
    }
}

fn check_levels(model: &ResolvedModel, out: &mut Vec<Diagnostic>) {
    let max_of: HashMap<&ElementId, (u32, &str)> = model
        .competencies()
        .map(|c| (&c.id, (c.max_level, c.name.as_str())))
        .collect();
    for c in model.competencies() {
        if !(MIN_LEVEL..=MAX_LEVEL).contains(&c.max_level) {
            out.push(
                Diagnostic::error(
                    RuleId::V013,
                    c.id.as_str(),
                    format!("competency declares {} levels, allowed range is {MIN_LEVEL}..{MAX_LEVEL}", c.max_level),
                )
                .with_span(model.span(c.id.as_str()).cloned()),
            );
        }
    }
    let mut check = |owner: &ElementId, req: &CompetencyRequirement| {
        let max = req
            .competency
            .target
            .as_ref()
            .and_then(|t| max_of.get(t))
            .map(|(m, _)| (*m).min(MAX_LEVEL))
            .unwrap_or(MAX_LEVEL);
        if req.level < MIN_LEVEL || req.level > max {
            out.push(
                Diagnostic::error(
                    RuleId::V013,
                    owner.as_str(),
                    format!(
                        "level {} for competency `{}` is outside {MIN_LEVEL}..{max}",
                        req.level, req.competency.name
                    ),
                )
                .with_span(model.span(owner.as_str()).cloned()),
            );
        }
    };
    for role in model.roles() {
        for req in &role.competencies {
            check(&role.id, req);
        }
    }
    for p in model.practices() {
        for a in &p.activities {
            for req in &a.required_competencies {
                check(&a.id, req);
            }
        }
    }
}

/// Producing activity, part and rendered contribution name.
type Contribution<'a> = (&'a ElementId, Option<&'a str>, String);

fn check_contributions(model: &ResolvedModel, out: &mut Vec<Diagnostic>) {
    // work product id -> (activity id, contribution) in declaration order
    let mut groups: BTreeMap<&ElementId, Vec<Contribution>> = BTreeMap::new();
    for p in model.practices() {
        for a in &p.activities {
            for c in &a.produces {
                if let Some(t) = &c.work_product.target {
                    groups.entry(t).or_default().push((
                        &a.id,
                        c.part.as_deref().filter(|s| !s.trim().is_empty()),
                        c.rendered_name(),
                    ));
                }
            }
        }
    }
    for (wp, contributions) in groups {
        if contributions.len() < 2 {
            continue;
        }
        let mut rendered = HashSet::new();
        for (activity, part, name) in &contributions {
            let msg = if part.is_none() {
                Some(format!(
                    "`{wp}` has {} contributions; this one must name its part as `<work product>: <part>`",
                    contributions.len()
                ))
            } else if !rendered.insert(name.as_str()) {
                Some(format!("contribution `{name}` is not distinct from another contribution"))
            } else {
                None
            };
            if let Some(msg) = msg {
                out.push(
                    Diagnostic::error(RuleId::V014, activity.as_str(), msg)
                        .with_span(model.span(activity.as_str()).cloned()),
                );
            }
        }
    }
}
