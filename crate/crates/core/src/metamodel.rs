//! Essence element types and the document that owns them.
//!
//! A [`ModelDocument`] is a list of top-level declarations (kernels,
//! practices, methods, roles and TOGAF phase specs) plus an id index built
//! once at construction. Documents are immutable after construction.
//!
//! Element ids are lowercase dotted identifiers derived from the element
//! kind and a slug of its name. Elements owned by a practice carry the
//! practice id as a path prefix, and activities and nested spaces carry the
//! id of the space that contains them:
//!
//! ```text
//! competency.governance
//! practice.phase_a
//! practice.phase_a/workproduct.architecture_vision
//! practice.phase_a/space.define_scope
//! practice.phase_a/space.define_scope/activity.confirm_boundaries
//! ```

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::diagnostic::{Diagnostic, RuleId, SourceSpan};
use crate::togaf::TogafPhaseSpec;

/// Lowest competency level.
pub const MIN_LEVEL: u32 = 1;
/// Highest competency level.
pub const MAX_LEVEL: u32 = 5;

/// Default maximum nesting depth for activity spaces; a root space has depth 1.
pub const DEFAULT_MAX_DEPTH: usize = 3;

/// The six competencies every Essence kernel ships with.
pub const BUILTIN_COMPETENCIES: [&str; 6] = [
    "Stakeholder Representation",
    "Analysis",
    "Development",
    "Testing",
    "Leadership",
    "Management",
];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    /// Top-level id: `<kind>.<slug>`.
    pub fn derive(kind: ElementKind, name: &str) -> Self {
        Self(format!("{}.{}", kind.id_prefix(), slug(name)))
    }

    /// Id of an element owned by `self`: `<self>/<kind>.<slug>`.
    pub fn child(&self, kind: ElementKind, name: &str) -> Self {
        Self(format!("{}/{}.{}", self.0, kind.id_prefix(), slug(name)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Borrow<str> for ElementId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ElementId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Lowercases `name` and collapses every run of non-alphanumeric characters
/// into a single underscore.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut pending_sep = false;
    for c in name.chars() {
        if c.is_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('_');
            }
            pending_sep = false;
            out.extend(c.to_lowercase());
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        out.push('_');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ElementKind {
    Kernel,
    Area,
    Alpha,
    Competency,
    Space,
    Activity,
    WorkProduct,
    Role,
    Practice,
    Method,
    Phase,
}

impl ElementKind {
    pub const ALL: [ElementKind; 11] = [
        ElementKind::Kernel,
        ElementKind::Area,
        ElementKind::Alpha,
        ElementKind::Competency,
        ElementKind::Space,
        ElementKind::Activity,
        ElementKind::WorkProduct,
        ElementKind::Role,
        ElementKind::Practice,
        ElementKind::Method,
        ElementKind::Phase,
    ];

    /// Name used in machine export (`kind` field).
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Kernel => "kernel",
            ElementKind::Area => "area",
            ElementKind::Alpha => "alpha",
            ElementKind::Competency => "competency",
            ElementKind::Space => "space",
            ElementKind::Activity => "activity",
            ElementKind::WorkProduct => "work_product",
            ElementKind::Role => "role",
            ElementKind::Practice => "practice",
            ElementKind::Method => "method",
            ElementKind::Phase => "phase",
        }
    }

    fn id_prefix(self) -> &'static str {
        match self {
            ElementKind::WorkProduct => "workproduct",
            other => other.as_str(),
        }
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s || k.id_prefix() == s)
            .ok_or_else(|| format!("unknown element kind `{s}`"))
    }
}

/// The three Essence areas of concern. The colour of each is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Area {
    Customer,
    Solution,
    Endeavor,
}

impl Area {
    pub const ALL: [Area; 3] = [Area::Customer, Area::Solution, Area::Endeavor];

    pub fn name(self) -> &'static str {
        match self {
            Area::Customer => "Customer",
            Area::Solution => "Solution",
            Area::Endeavor => "Endeavor",
        }
    }

    pub fn color(self) -> Color {
        match self {
            Area::Customer => Color::Green,
            Area::Solution => Color::Yellow,
            Area::Endeavor => Color::Blue,
        }
    }

    pub fn from_name(name: &str) -> Option<Area> {
        Area::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn id(self) -> ElementId {
        ElementId::derive(ElementKind::Area, self.name())
    }

    pub(crate) fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Green,
    Yellow,
    Blue,
}

impl Color {
    pub fn as_str(self) -> &'static str {
        match self {
            Color::Green => "green",
            Color::Yellow => "yellow",
            Color::Blue => "blue",
        }
    }

    pub fn from_name(name: &str) -> Option<Color> {
        [Color::Green, Color::Yellow, Color::Blue]
            .into_iter()
            .find(|c| c.as_str() == name)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A by-name reference. `target` is filled in by resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ref {
    pub name: String,
    pub target: Option<ElementId>,
}

impl Ref {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            target: None,
        }
    }

    pub fn resolved(name: impl Into<String>, target: ElementId) -> Self {
        Self {
            name: name.into(),
            target: Some(target),
        }
    }
}

/// Declaration of an area of concern inside a kernel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AreaDecl {
    pub id: ElementId,
    pub area: Area,
}

impl AreaDecl {
    pub fn new(area: Area) -> Self {
        Self { id: area.id(), area }
    }

    pub fn name(&self) -> &'static str {
        self.area.name()
    }

    pub fn color(&self) -> Color {
        self.area.color()
    }
}

/// Position of a checklist item inside its alpha: (state index, item index),
/// both 0-based. Printed 1-based as `state.item`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChecklistKey {
    pub state: usize,
    pub item: usize,
}

impl ChecklistKey {
    pub fn new(state: usize, item: usize) -> Self {
        Self { state, item }
    }
}

impl fmt::Display for ChecklistKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.state + 1, self.item + 1)
    }
}

impl FromStr for ChecklistKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid checklist key `{s}` (expected `<state>.<item>`)");
        let (state, item) = s.split_once('.').ok_or_else(bad)?;
        let state: usize = state.parse().map_err(|_| bad())?;
        let item: usize = item.parse().map_err(|_| bad())?;
        if state == 0 || item == 0 {
            return Err(bad());
        }
        Ok(Self::new(state - 1, item - 1))
    }
}

impl Serialize for ChecklistKey {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChecklistItem<'a> {
    pub key: ChecklistKey,
    pub text: &'a str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaState {
    pub name: String,
    pub checklist: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alpha {
    pub id: ElementId,
    pub name: String,
    pub area: Area,
    pub states: Vec<AlphaState>,
}

impl Alpha {
    pub fn new(name: impl Into<String>, area: Area, states: Vec<AlphaState>) -> Self {
        let name = name.into();
        Self {
            id: ElementId::derive(ElementKind::Alpha, &name),
            name,
            area,
            states,
        }
    }

    /// All checklist items, state by state.
    pub fn items(&self) -> impl Iterator<Item = ChecklistItem<'_>> {
        self.states.iter().enumerate().flat_map(|(s, state)| {
            state
                .checklist
                .iter()
                .enumerate()
                .map(move |(i, text)| ChecklistItem {
                    key: ChecklistKey::new(s, i),
                    text,
                })
        })
    }

    pub fn item(&self, key: ChecklistKey) -> Option<&str> {
        self.states
            .get(key.state)
            .and_then(|s| s.checklist.get(key.item))
            .map(String::as_str)
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Competency {
    pub id: ElementId,
    pub name: String,
    pub area: Area,
    pub max_level: u32,
}

impl Competency {
    pub fn new(name: impl Into<String>, area: Area) -> Self {
        let name = name.into();
        Self {
            id: ElementId::derive(ElementKind::Competency, &name),
            name,
            area,
            max_level: MAX_LEVEL,
        }
    }

    /// True for the six competencies of the standard kernel; extensions such
    /// as Governance report false.
    pub fn is_builtin(&self) -> bool {
        BUILTIN_COMPETENCIES.contains(&self.name.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivitySpace {
    pub id: ElementId,
    pub name: String,
    pub area: Area,
    pub parent: Option<Ref>,
    pub goal: Option<String>,
}

/// A competency at a level, either required by an activity or held by a role.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompetencyRequirement {
    pub competency: Ref,
    pub level: u32,
}

impl CompetencyRequirement {
    pub fn new(competency: impl Into<String>, level: u32) -> Self {
        Self {
            competency: Ref::named(competency),
            level,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorkProductContribution {
    pub work_product: Ref,
    pub part: Option<String>,
}

impl WorkProductContribution {
    /// Splits `"<work product>: <part>"` at the first `": "`.
    pub fn from_text(text: &str) -> Self {
        match text.split_once(": ") {
            Some((name, part)) => Self {
                work_product: Ref::named(name),
                part: Some(part.to_string()),
            },
            None => Self {
                work_product: Ref::named(text),
                part: None,
            },
        }
    }

    pub fn rendered_name(&self) -> String {
        match &self.part {
            Some(part) => format!("{}: {}", self.work_product.name, part),
            None => self.work_product.name.clone(),
        }
    }
}

/// An atomic piece of work filling an activity space. Activities never own
/// child activities; decomposition is expressed with nested spaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Activity {
    pub id: ElementId,
    pub name: String,
    pub space: Option<ElementId>,
    pub required_competencies: Vec<CompetencyRequirement>,
    pub produces: Vec<WorkProductContribution>,
    pub responsible_role: Option<Ref>,
    pub tags: Vec<String>,
}

impl Activity {
    pub fn new(space: &ElementId, name: impl Into<String>) -> Self {
        let name = name.into();
        Self {
            id: space.child(ElementKind::Activity, &name),
            name,
            space: Some(space.clone()),
            required_competencies: Vec::new(),
            produces: Vec::new(),
            responsible_role: None,
            tags: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkProductCategory {
    Catalog,
    Matrix,
    Diagram,
    Other,
}

impl WorkProductCategory {
    pub const ALL: [WorkProductCategory; 4] = [
        WorkProductCategory::Catalog,
        WorkProductCategory::Matrix,
        WorkProductCategory::Diagram,
        WorkProductCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            WorkProductCategory::Catalog => "catalog",
            WorkProductCategory::Matrix => "matrix",
            WorkProductCategory::Diagram => "diagram",
            WorkProductCategory::Other => "other",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for WorkProductCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkProduct {
    pub id: ElementId,
    pub name: String,
    pub category: WorkProductCategory,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Role {
    pub id: ElementId,
    pub name: String,
    pub competencies: Vec<CompetencyRequirement>,
}

impl Role {
    pub fn new(name: impl Into<String>, competencies: Vec<CompetencyRequirement>) -> Self {
        let name = name.into();
        Self {
            id: ElementId::derive(ElementKind::Role, &name),
            name,
            competencies,
        }
    }
}

/// A goal-bearing, repeatable way of working. Owns its work products,
/// activity spaces (pre-order, parents before children) and activities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Practice {
    pub id: ElementId,
    pub name: String,
    pub area: Area,
    pub goals: Vec<String>,
    pub inputs: Vec<String>,
    pub work_products: Vec<WorkProduct>,
    pub outputs: Vec<Ref>,
    pub spaces: Vec<ActivitySpace>,
    pub activities: Vec<Activity>,
}

impl Practice {
    pub fn new(name: impl Into<String>, area: Area) -> Self {
        let name = name.into();
        Self {
            id: ElementId::derive(ElementKind::Practice, &name),
            name,
            area,
            goals: Vec::new(),
            inputs: Vec::new(),
            work_products: Vec::new(),
            outputs: Vec::new(),
            spaces: Vec::new(),
            activities: Vec::new(),
        }
    }

    /// Adds a work product owned by this practice and returns its id.
    pub fn add_work_product(
        &mut self,
        name: impl Into<String>,
        category: WorkProductCategory,
        description: Option<String>,
    ) -> ElementId {
        let name = name.into();
        let id = self.id.child(ElementKind::WorkProduct, &name);
        self.work_products.push(WorkProduct {
            id: id.clone(),
            name,
            category,
            description,
        });
        id
    }

    /// Adds a space under `parent` (or at top level) and returns its id.
    /// Spaces must be added parents-first.
    pub fn add_space(
        &mut self,
        parent: Option<&ElementId>,
        name: impl Into<String>,
        area: Area,
        goal: Option<String>,
    ) -> ElementId {
        let name = name.into();
        let (id, parent) = match parent {
            Some(p) => {
                let parent_name = self
                    .space(p.as_str())
                    .map(|s| s.name.clone())
                    .unwrap_or_default();
                (
                    p.child(ElementKind::Space, &name),
                    Some(Ref::resolved(parent_name, p.clone())),
                )
            }
            None => (self.id.child(ElementKind::Space, &name), None),
        };
        self.spaces.push(ActivitySpace {
            id: id.clone(),
            name,
            area,
            parent,
            goal,
        });
        id
    }

    pub fn space(&self, id: &str) -> Option<&ActivitySpace> {
        self.spaces.iter().find(|s| s.id.as_str() == id)
    }

    pub fn work_product(&self, name: &str) -> Option<&WorkProduct> {
        self.work_products.iter().find(|w| w.name == name)
    }

    /// Spaces with no parent space.
    pub fn top_level_spaces(&self) -> impl Iterator<Item = &ActivitySpace> {
        self.spaces.iter().filter(|s| s.parent.is_none())
    }

    /// Direct child spaces of `id`.
    pub fn child_spaces<'a>(&'a self, id: &'a ElementId) -> impl Iterator<Item = &'a ActivitySpace> {
        self.spaces.iter().filter(move |s| {
            s.parent
                .as_ref()
                .and_then(|p| p.target.as_ref())
                .is_some_and(|t| t == id)
        })
    }

    /// Activities placed directly in space `id`.
    pub fn activities_in<'a>(&'a self, id: &'a ElementId) -> impl Iterator<Item = &'a Activity> {
        self.activities
            .iter()
            .filter(move |a| a.space.as_ref() == Some(id))
    }
}

/// A set of practices with a dynamic shape: an optional once-only preamble,
/// a repeating cycle and practices that are always active.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Method {
    pub id: ElementId,
    pub name: String,
    pub preamble: Option<Ref>,
    pub cycle: Vec<Ref>,
    pub concurrent: Vec<Ref>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Kernel {
    pub id: ElementId,
    pub name: String,
    pub areas: Vec<AreaDecl>,
    pub competencies: Vec<Competency>,
    pub alphas: Vec<Alpha>,
    pub spaces: Vec<ActivitySpace>,
    pub work_products: Vec<WorkProduct>,
}

impl Kernel {
    pub fn new(name: impl Into<String>) -> Self {
        let name = name.into();
        Self {
            id: ElementId::derive(ElementKind::Kernel, &name),
            name,
            areas: Vec::new(),
            competencies: Vec::new(),
            alphas: Vec::new(),
            spaces: Vec::new(),
            work_products: Vec::new(),
        }
    }
}

/// A top-level declaration, in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Kernel(Kernel),
    Practice(Practice),
    Method(Method),
    Role(Role),
    Phase(TogafPhaseSpec),
}

/// Borrowed view of any element in a document.
#[derive(Debug, Clone, Copy)]
pub enum Element<'a> {
    Kernel(&'a Kernel),
    Area(&'a AreaDecl),
    Alpha(&'a Alpha),
    Competency(&'a Competency),
    Space(&'a ActivitySpace),
    Activity(&'a Activity),
    WorkProduct(&'a WorkProduct),
    Role(&'a Role),
    Practice(&'a Practice),
    Method(&'a Method),
    Phase(&'a TogafPhaseSpec),
}

impl<'a> Element<'a> {
    pub fn id(&self) -> &'a ElementId {
        match *self {
            Element::Kernel(e) => &e.id,
            Element::Area(e) => &e.id,
            Element::Alpha(e) => &e.id,
            Element::Competency(e) => &e.id,
            Element::Space(e) => &e.id,
            Element::Activity(e) => &e.id,
            Element::WorkProduct(e) => &e.id,
            Element::Role(e) => &e.id,
            Element::Practice(e) => &e.id,
            Element::Method(e) => &e.id,
            Element::Phase(e) => &e.id,
        }
    }

    pub fn name(&self) -> &'a str {
        match *self {
            Element::Kernel(e) => &e.name,
            Element::Area(e) => e.name(),
            Element::Alpha(e) => &e.name,
            Element::Competency(e) => &e.name,
            Element::Space(e) => &e.name,
            Element::Activity(e) => &e.name,
            Element::WorkProduct(e) => &e.name,
            Element::Role(e) => &e.name,
            Element::Practice(e) => &e.name,
            Element::Method(e) => &e.name,
            Element::Phase(e) => &e.name,
        }
    }

    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Kernel(_) => ElementKind::Kernel,
            Element::Area(_) => ElementKind::Area,
            Element::Alpha(_) => ElementKind::Alpha,
            Element::Competency(_) => ElementKind::Competency,
            Element::Space(_) => ElementKind::Space,
            Element::Activity(_) => ElementKind::Activity,
            Element::WorkProduct(_) => ElementKind::WorkProduct,
            Element::Role(_) => ElementKind::Role,
            Element::Practice(_) => ElementKind::Practice,
            Element::Method(_) => ElementKind::Method,
            Element::Phase(_) => ElementKind::Phase,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Loc {
    Kernel(usize),
    Area(usize, usize),
    Alpha(usize, usize),
    Competency(usize, usize),
    KernelSpace(usize, usize),
    KernelWorkProduct(usize, usize),
    Practice(usize),
    PracticeWorkProduct(usize, usize),
    PracticeSpace(usize, usize),
    Activity(usize, usize),
    Role(usize),
    Method(usize),
    Phase(usize),
}

/// Parsed collection of declarations with an id index.
///
/// Equality is structural: it compares declarations and ignores source spans.
#[derive(Debug, Clone, Default)]
pub struct ModelDocument {
    decls: Vec<Declaration>,
    spans: HashMap<ElementId, SourceSpan>,
    index: IndexMap<ElementId, Loc>,
}

impl PartialEq for ModelDocument {
    fn eq(&self, other: &Self) -> bool {
        self.decls == other.decls
    }
}

impl Eq for ModelDocument {}

impl ModelDocument {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the id index. Duplicate ids are rejected with one V002
    /// diagnostic per clash, naming both source spans when known.
    pub fn new(
        decls: Vec<Declaration>,
        spans: HashMap<ElementId, SourceSpan>,
    ) -> Result<Self, Vec<Diagnostic>> {
        let mut index = IndexMap::new();
        let mut errors = Vec::new();
        {
            let mut insert = |id: &ElementId, loc: Loc| {
                if index.contains_key(id) {
                    let first = spans.get(id);
                    let msg = match first {
                        Some(first) => format!("duplicate id `{id}`, first declared at {first}"),
                        None => format!("duplicate id `{id}`"),
                    };
                    // Spans are keyed by id, so the clashing declaration's span
                    // is only known to the caller; report the first one here.
                    errors.push(Diagnostic::error(RuleId::V002, id.as_str(), msg).with_span(first.cloned()));
                } else {
                    index.insert(id.clone(), loc);
                }
            };
            for (d, decl) in decls.iter().enumerate() {
                match decl {
                    Declaration::Kernel(k) => {
                        insert(&k.id, Loc::Kernel(d));
                        for (i, e) in k.areas.iter().enumerate() {
                            insert(&e.id, Loc::Area(d, i));
                        }
                        for (i, e) in k.competencies.iter().enumerate() {
                            insert(&e.id, Loc::Competency(d, i));
                        }
                        for (i, e) in k.alphas.iter().enumerate() {
                            insert(&e.id, Loc::Alpha(d, i));
                        }
                        for (i, e) in k.spaces.iter().enumerate() {
                            insert(&e.id, Loc::KernelSpace(d, i));
                        }
                        for (i, e) in k.work_products.iter().enumerate() {
                            insert(&e.id, Loc::KernelWorkProduct(d, i));
                        }
                    }
                    Declaration::Practice(p) => {
                        insert(&p.id, Loc::Practice(d));
                        for (i, e) in p.work_products.iter().enumerate() {
                            insert(&e.id, Loc::PracticeWorkProduct(d, i));
                        }
                        let mut placed = vec![false; p.activities.len()];
                        for (i, s) in p.spaces.iter().enumerate() {
                            insert(&s.id, Loc::PracticeSpace(d, i));
                            for (j, a) in p.activities.iter().enumerate() {
                                if !placed[j] && a.space.as_ref() == Some(&s.id) {
                                    placed[j] = true;
                                    insert(&a.id, Loc::Activity(d, j));
                                }
                            }
                        }
                        for (j, a) in p.activities.iter().enumerate() {
                            if !placed[j] {
                                insert(&a.id, Loc::Activity(d, j));
                            }
                        }
                    }
                    Declaration::Method(m) => insert(&m.id, Loc::Method(d)),
                    Declaration::Role(r) => insert(&r.id, Loc::Role(d)),
                    Declaration::Phase(ph) => insert(&ph.id, Loc::Phase(d)),
                }
            }
        }
        if errors.is_empty() {
            Ok(Self {
                decls,
                spans,
                index,
            })
        } else {
            Err(errors)
        }
    }

    /// Concatenates documents (e.g. one per source file), re-checking id
    /// uniqueness across them. Clashes name both spans.
    pub fn merge(docs: impl IntoIterator<Item = ModelDocument>) -> Result<Self, Vec<Diagnostic>> {
        let mut decls = Vec::new();
        let mut spans = HashMap::new();
        let mut errors = Vec::new();
        for doc in docs {
            for (id, span) in doc.spans {
                if let Some(first) = spans.get(&id) {
                    errors.push(
                        Diagnostic::error(
                            RuleId::V002,
                            id.as_str(),
                            format!("duplicate id `{id}`, first declared at {first}"),
                        )
                        .with_span(Some(span)),
                    );
                } else {
                    spans.insert(id, span);
                }
            }
            decls.extend(doc.decls);
        }
        if !errors.is_empty() {
            errors.sort_by(|a, b| a.span.cmp(&b.span));
            return Err(errors);
        }
        Self::new(decls, spans)
    }

    pub fn declarations(&self) -> &[Declaration] {
        &self.decls
    }

    pub fn into_parts(self) -> (Vec<Declaration>, HashMap<ElementId, SourceSpan>) {
        (self.decls, self.spans)
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn span(&self, id: &str) -> Option<&SourceSpan> {
        self.spans.get(id)
    }

    /// Position of `id` in declaration order.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get_index_of(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn lookup(&self, id: &str) -> Option<Element<'_>> {
        self.index.get(id).map(|loc| self.element_at(*loc))
    }

    /// All elements in declaration order.
    pub fn elements(&self) -> impl Iterator<Item = Element<'_>> {
        self.index.values().map(|loc| self.element_at(*loc))
    }

    pub fn iter_elements(&self, kind: ElementKind) -> impl Iterator<Item = Element<'_>> {
        self.elements().filter(move |e| e.kind() == kind)
    }

    fn element_at(&self, loc: Loc) -> Element<'_> {
        let kernel = |d: usize| match &self.decls[d] {
            Declaration::Kernel(k) => k,
            _ => unreachable!("index points at a kernel"),
        };
        let practice = |d: usize| match &self.decls[d] {
            Declaration::Practice(p) => p,
            _ => unreachable!("index points at a practice"),
        };
        match loc {
            Loc::Kernel(d) => Element::Kernel(kernel(d)),
            Loc::Area(d, i) => Element::Area(&kernel(d).areas[i]),
            Loc::Alpha(d, i) => Element::Alpha(&kernel(d).alphas[i]),
            Loc::Competency(d, i) => Element::Competency(&kernel(d).competencies[i]),
            Loc::KernelSpace(d, i) => Element::Space(&kernel(d).spaces[i]),
            Loc::KernelWorkProduct(d, i) => Element::WorkProduct(&kernel(d).work_products[i]),
            Loc::Practice(d) => Element::Practice(practice(d)),
            Loc::PracticeWorkProduct(d, i) => Element::WorkProduct(&practice(d).work_products[i]),
            Loc::PracticeSpace(d, i) => Element::Space(&practice(d).spaces[i]),
            Loc::Activity(d, i) => Element::Activity(&practice(d).activities[i]),
            Loc::Role(d) => match &self.decls[d] {
                Declaration::Role(r) => Element::Role(r),
                _ => unreachable!(),
            },
            Loc::Method(d) => match &self.decls[d] {
                Declaration::Method(m) => Element::Method(m),
                _ => unreachable!(),
            },
            Loc::Phase(d) => match &self.decls[d] {
                Declaration::Phase(p) => Element::Phase(p),
                _ => unreachable!(),
            },
        }
    }

    pub fn kernels(&self) -> impl Iterator<Item = &Kernel> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Kernel(k) => Some(k),
            _ => None,
        })
    }

    pub fn practices(&self) -> impl Iterator<Item = &Practice> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Practice(p) => Some(p),
            _ => None,
        })
    }

    pub fn methods(&self) -> impl Iterator<Item = &Method> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Method(m) => Some(m),
            _ => None,
        })
    }

    pub fn roles(&self) -> impl Iterator<Item = &Role> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Role(r) => Some(r),
            _ => None,
        })
    }

    pub fn phases(&self) -> impl Iterator<Item = &TogafPhaseSpec> {
        self.decls.iter().filter_map(|d| match d {
            Declaration::Phase(p) => Some(p),
            _ => None,
        })
    }

    pub fn competencies(&self) -> impl Iterator<Item = &Competency> {
        self.kernels().flat_map(|k| k.competencies.iter())
    }

    pub fn alphas(&self) -> impl Iterator<Item = &Alpha> {
        self.kernels().flat_map(|k| k.alphas.iter())
    }

    pub fn competency_named(&self, name: &str) -> Option<&Competency> {
        self.competencies().find(|c| c.name == name)
    }

    pub fn role_named(&self, name: &str) -> Option<&Role> {
        self.roles().find(|r| r.name == name)
    }

    pub fn practice_named(&self, name: &str) -> Option<&Practice> {
        self.practices().find(|p| p.name == name)
    }

    /// The practice that owns element `id`, if any.
    pub fn owning_practice(&self, id: &str) -> Option<&Practice> {
        match self.index.get(id)? {
            Loc::Practice(d)
            | Loc::PracticeWorkProduct(d, _)
            | Loc::PracticeSpace(d, _)
            | Loc::Activity(d, _) => match &self.decls[*d] {
                Declaration::Practice(p) => Some(p),
                _ => None,
            },
            _ => None,
        }
    }

    /// Every activity space in the document: kernel spaces, then practice
    /// spaces, in declaration order.
    pub fn spaces(&self) -> impl Iterator<Item = &ActivitySpace> {
        self.iter_elements(ElementKind::Space).map(|e| match e {
            Element::Space(s) => s,
            _ => unreachable!(),
        })
    }

    pub fn work_products(&self) -> impl Iterator<Item = &WorkProduct> {
        self.iter_elements(ElementKind::WorkProduct).map(|e| match e {
            Element::WorkProduct(w) => w,
            _ => unreachable!(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel_doc() -> ModelDocument {
        let mut k = Kernel::new("Essence");
        k.areas = Area::ALL.into_iter().map(AreaDecl::new).collect();
        k.competencies.push(Competency::new("Stakeholder Representation", Area::Customer));
        k.competencies.push(Competency::new("Governance", Area::Endeavor));
        let mut p = Practice::new("Phase A", Area::Endeavor);
        p.goals.push("Agree the vision".into());
        let s = p.add_space(None, "Define Scope", Area::Customer, None);
        p.activities.push(Activity::new(&s, "Confirm boundaries"));
        let _wp = p.add_work_product("Architecture Vision", WorkProductCategory::Other, None);
        ModelDocument::new(
            vec![Declaration::Kernel(k), Declaration::Practice(p)],
            HashMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn slugs_are_lowercase_and_underscore_joined() {
        assert_eq!(slug("Stakeholder Representation"), "stakeholder_representation");
        assert_eq!(slug("  Phase A. Architecture Vision "), "phase_a_architecture_vision");
        assert_eq!(slug("Develop Statement of Architecture Work; Secure Approval"),
            "develop_statement_of_architecture_work_secure_approval");
        assert_eq!(slug("!!"), "_");
    }

    #[test]
    fn lookup_finds_nested_ids() {
        let doc = kernel_doc();
        let gov = doc.lookup("competency.governance").unwrap();
        assert_eq!(gov.name(), "Governance");
        assert_eq!(gov.kind(), ElementKind::Competency);
        let act = doc
            .lookup("practice.phase_a/space.define_scope/activity.confirm_boundaries")
            .unwrap();
        assert_eq!(act.kind(), ElementKind::Activity);
        assert!(doc.lookup("practice.phase_b").is_none());
    }

    #[test]
    fn empty_document_has_nothing() {
        let doc = ModelDocument::empty();
        assert!(doc.lookup("competency.governance").is_none());
        for kind in ElementKind::ALL {
            assert_eq!(doc.iter_elements(kind).count(), 0);
        }
    }

    #[test]
    fn areas_iterate_in_fixed_order() {
        let doc = kernel_doc();
        let names: Vec<_> = doc.iter_elements(ElementKind::Area).map(|e| e.name()).collect();
        assert_eq!(names, ["Customer", "Solution", "Endeavor"]);
        let colors: Vec<_> = Area::ALL.iter().map(|a| a.color().as_str()).collect();
        assert_eq!(colors, ["green", "yellow", "blue"]);
    }

    #[test]
    fn declaration_order_puts_activities_after_their_space() {
        let doc = kernel_doc();
        let order: Vec<_> = doc.elements().map(|e| e.id().as_str().to_string()).collect();
        let space = order.iter().position(|i| i == "practice.phase_a/space.define_scope").unwrap();
        let act = order
            .iter()
            .position(|i| i.ends_with("activity.confirm_boundaries"))
            .unwrap();
        let wp = order.iter().position(|i| i.ends_with("workproduct.architecture_vision")).unwrap();
        assert!(wp < space && space < act);
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let mut k = Kernel::new("K");
        k.competencies.push(Competency::new("Analysis", Area::Solution));
        k.competencies.push(Competency::new("analysis", Area::Solution));
        let mut spans = HashMap::new();
        spans.insert(
            ElementId::new("competency.analysis"),
            SourceSpan::new("k.ess", (2, 3), (2, 30)),
        );
        let err = ModelDocument::new(vec![Declaration::Kernel(k)], spans).unwrap_err();
        assert_eq!(err.len(), 1);
        assert_eq!(err[0].rule, RuleId::V002);
        assert!(err[0].message.contains("k.ess:2:3"));
    }

    #[test]
    fn merge_reports_both_spans() {
        let mk = |file: &str| {
            let r = Role::new("Architect", vec![]);
            let mut spans = HashMap::new();
            spans.insert(r.id.clone(), SourceSpan::new(file, (1, 1), (1, 20)));
            ModelDocument::new(vec![Declaration::Role(r)], spans).unwrap()
        };
        let err = ModelDocument::merge([mk("a.ess"), mk("b.ess")]).unwrap_err();
        assert_eq!(err.len(), 1);
        assert!(err[0].message.contains("a.ess:1:1"));
        assert_eq!(err[0].span.as_ref().unwrap().file, "b.ess");
    }

    #[test]
    fn colon_convention_splits_at_first_colon() {
        let c = WorkProductContribution::from_text("Statement of Architecture Work: scope: phase 1");
        assert_eq!(c.work_product.name, "Statement of Architecture Work");
        assert_eq!(c.part.as_deref(), Some("scope: phase 1"));
        assert_eq!(c.rendered_name(), "Statement of Architecture Work: scope: phase 1");
        let plain = WorkProductContribution::from_text("Architecture Vision");
        assert_eq!(plain.part, None);
    }

    #[test]
    fn checklist_keys_print_one_based() {
        let k = ChecklistKey::new(0, 1);
        assert_eq!(k.to_string(), "1.2");
        assert_eq!("1.2".parse::<ChecklistKey>().unwrap(), k);
        assert!("0.1".parse::<ChecklistKey>().is_err());
        assert!("x".parse::<ChecklistKey>().is_err());
    }

    #[test]
    fn governance_is_not_builtin() {
        assert!(Competency::new("Management", Area::Endeavor).is_builtin());
        assert!(!Competency::new("Governance", Area::Endeavor).is_builtin());
    }
}
