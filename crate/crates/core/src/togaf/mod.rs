//! TOGAF ADM phase specifications and their mapping onto Essence practices.
//!
//! Mapping rules, applied by [`map_phase`]:
//!
//! * a phase becomes a practice whose goal is the phase objective;
//! * every step becomes a top-level activity space;
//! * every leaf activity becomes an activity in its step's space;
//! * an activity broken down into sub-activities becomes a nested space
//!   holding those sub-activities;
//! * every phase output becomes a work product; when two or more activities
//!   feed the same output each contribution must name the part it adds;
//! * competencies follow the activity's tags (see [`ActivityTag::competency`]).

pub mod corpus;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::metamodel::{
    Activity, Area, CompetencyRequirement, ElementId, ElementKind, Practice, Ref, WorkProductCategory,
    WorkProductContribution, DEFAULT_MAX_DEPTH,
};
use crate::validator::{compute_area_profile, AreaProfile, ResolvedModel};

/// Competency level used when no role overrides it.
pub const DEFAULT_LEVEL: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PhaseId {
    P,
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    RM,
}

impl PhaseId {
    pub const ALL: [PhaseId; 10] = [
        PhaseId::P,
        PhaseId::A,
        PhaseId::B,
        PhaseId::C,
        PhaseId::D,
        PhaseId::E,
        PhaseId::F,
        PhaseId::G,
        PhaseId::H,
        PhaseId::RM,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PhaseId::P => "P",
            PhaseId::A => "A",
            PhaseId::B => "B",
            PhaseId::C => "C",
            PhaseId::D => "D",
            PhaseId::E => "E",
            PhaseId::F => "F",
            PhaseId::G => "G",
            PhaseId::H => "H",
            PhaseId::RM => "RM",
        }
    }

    /// Name of the practice a phase maps to.
    pub fn practice_name(self) -> String {
        match self {
            PhaseId::P => "Preliminary Phase".to_string(),
            PhaseId::RM => "Requirements Management".to_string(),
            other => format!("Phase {}", other.as_str()),
        }
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PhaseId::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown TOGAF phase `{s}` (expected one of P, A..H, RM)"))
    }
}

/// Semantic tags on TOGAF activities. They make the competency choice explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActivityTag {
    AcquiresInformation,
    UnderstandsStakeholders,
    ProcessesRequirements,
    EndorsesRequirements,
    Builds,
    Verifies,
    Leads,
    Coordinates,
    Governs,
}

impl ActivityTag {
    pub const ALL: [ActivityTag; 9] = [
        ActivityTag::AcquiresInformation,
        ActivityTag::UnderstandsStakeholders,
        ActivityTag::ProcessesRequirements,
        ActivityTag::EndorsesRequirements,
        ActivityTag::Builds,
        ActivityTag::Verifies,
        ActivityTag::Leads,
        ActivityTag::Coordinates,
        ActivityTag::Governs,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityTag::AcquiresInformation => "acquires_information",
            ActivityTag::UnderstandsStakeholders => "understands_stakeholders",
            ActivityTag::ProcessesRequirements => "processes_requirements",
            ActivityTag::EndorsesRequirements => "endorses_requirements",
            ActivityTag::Builds => "builds",
            ActivityTag::Verifies => "verifies",
            ActivityTag::Leads => "leads",
            ActivityTag::Coordinates => "coordinates",
            ActivityTag::Governs => "governs",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == s)
    }

    pub fn competency(self) -> KernelCompetency {
        match self {
            ActivityTag::AcquiresInformation
            | ActivityTag::UnderstandsStakeholders
            | ActivityTag::ProcessesRequirements => KernelCompetency::StakeholderRepresentation,
            ActivityTag::EndorsesRequirements => KernelCompetency::Analysis,
            ActivityTag::Builds => KernelCompetency::Development,
            ActivityTag::Verifies => KernelCompetency::Testing,
            ActivityTag::Leads => KernelCompetency::Leadership,
            ActivityTag::Coordinates => KernelCompetency::Management,
            ActivityTag::Governs => KernelCompetency::Governance,
        }
    }
}

/// The seven competencies the mapper can assign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelCompetency {
    StakeholderRepresentation,
    Analysis,
    Development,
    Testing,
    Leadership,
    Management,
    Governance,
}

impl KernelCompetency {
    pub fn name(self) -> &'static str {
        match self {
            KernelCompetency::StakeholderRepresentation => "Stakeholder Representation",
            KernelCompetency::Analysis => "Analysis",
            KernelCompetency::Development => "Development",
            KernelCompetency::Testing => "Testing",
            KernelCompetency::Leadership => "Leadership",
            KernelCompetency::Management => "Management",
            KernelCompetency::Governance => "Governance",
        }
    }
}

/// Competencies required by an activity with the given tags. An endorsing
/// activity needs Analysis and never Stakeholder Representation.
pub fn competencies_for_tags(tags: &[ActivityTag]) -> BTreeSet<KernelCompetency> {
    let endorses = tags.contains(&ActivityTag::EndorsesRequirements);
    tags.iter()
        .map(|t| t.competency())
        .filter(|c| !(endorses && *c == KernelCompetency::StakeholderRepresentation))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TogafPhaseSpec {
    pub id: ElementId,
    pub phase: PhaseId,
    pub name: String,
    pub objective: String,
    pub steps: Vec<StepSpec>,
    pub outputs: Vec<OutputSpec>,
}

impl TogafPhaseSpec {
    pub fn new(phase: PhaseId, name: impl Into<String>, objective: impl Into<String>) -> Self {
        Self {
            id: ElementId::derive(ElementKind::Phase, phase.as_str()),
            phase,
            name: name.into(),
            objective: objective.into(),
            steps: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Every activity spec in the phase, depth first.
    pub fn all_activities(&self) -> Vec<&ActivitySpec> {
        fn walk<'a>(specs: &'a [ActivitySpec], out: &mut Vec<&'a ActivitySpec>) {
            for s in specs {
                out.push(s);
                walk(&s.sub_activities, out);
            }
        }
        let mut out = Vec::new();
        for step in &self.steps {
            walk(&step.activities, &mut out);
        }
        out
    }

    pub fn is_stub(&self) -> bool {
        self.steps.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepSpec {
    pub name: String,
    pub goal: Option<String>,
    pub activities: Vec<ActivitySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActivitySpec {
    pub name: String,
    pub tags: Vec<String>,
    pub sub_activities: Vec<ActivitySpec>,
    pub feeds: Vec<Feed>,
    pub role: Option<String>,
}

impl ActivitySpec {
    pub fn leaf(name: impl Into<String>, tags: &[ActivityTag]) -> Self {
        Self {
            name: name.into(),
            tags: tags.iter().map(|t| t.as_str().to_string()).collect(),
            ..Self::default()
        }
    }
}

/// An activity feeding (part of) a phase output.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feed {
    pub output: String,
    pub part: Option<String>,
}

impl Feed {
    pub fn from_text(text: &str) -> Self {
        let c = WorkProductContribution::from_text(text);
        Self {
            output: c.work_product.name,
            part: c.part,
        }
    }

    pub fn text(&self) -> String {
        match &self.part {
            Some(p) => format!("{}: {}", self.output, p),
            None => self.output.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputSpec {
    pub name: String,
    pub category: WorkProductCategory,
    pub description: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MapConfig {
    pub max_depth: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            max_depth: DEFAULT_MAX_DEPTH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("activity chain `{}` exceeds the maximum nesting depth of {max_depth}", chain.join(" > "))]
    NestingTooDeep { chain: Vec<String>, max_depth: usize },
    #[error("activity `{activity}` feeds undeclared output `{output}`")]
    UndeclaredOutput { activity: String, output: String },
    #[error("activity `{activity}` has unknown tag `{tag}`")]
    UnknownTag { activity: String, tag: String },
    #[error("activity `{activity}` has neither tags nor sub-activities")]
    UntaggedActivity { activity: String },
    #[error("activity `{activity}` is broken down into sub-activities and cannot feed outputs itself")]
    DecomposedFeeds { activity: String },
    #[error("activity `{activity}` names unknown role `{role}`")]
    UnknownRole { activity: String, role: String },
    #[error("output `{output}` has several feeders but activity `{activity}` does not name its part")]
    MissingPart { activity: String, output: String },
    #[error("kernel has no competency named `{0}`")]
    MissingCompetency(String),
    #[error("duplicate {kind} `{name}` in phase {phase}")]
    Duplicate {
        phase: PhaseId,
        kind: &'static str,
        name: String,
    },
}

/// Maps a TOGAF phase onto an Essence practice.
///
/// `kernel` supplies competencies (all seven must be present) and roles.
/// The result is deterministic and uses by-name references, so it renders
/// and re-parses to an equal practice.
pub fn map_phase(
    spec: &TogafPhaseSpec,
    kernel: &ResolvedModel,
    config: &MapConfig,
) -> Result<Practice, MapError> {
    let mut competency_area = BTreeMap::new();
    for c in [
        KernelCompetency::StakeholderRepresentation,
        KernelCompetency::Analysis,
        KernelCompetency::Development,
        KernelCompetency::Testing,
        KernelCompetency::Leadership,
        KernelCompetency::Management,
        KernelCompetency::Governance,
    ] {
        let found = kernel
            .competency_named(c.name())
            .ok_or_else(|| MapError::MissingCompetency(c.name().to_string()))?;
        competency_area.insert(c, found.area);
    }

    let mut seen = HashSet::new();
    for o in &spec.outputs {
        if !seen.insert(o.name.as_str()) {
            return Err(MapError::Duplicate {
                phase: spec.phase,
                kind: "output",
                name: o.name.clone(),
            });
        }
    }
    let mut seen = HashSet::new();
    for s in &spec.steps {
        if !seen.insert(s.name.as_str()) {
            return Err(MapError::Duplicate {
                phase: spec.phase,
                kind: "step",
                name: s.name.clone(),
            });
        }
    }

    let mut feeders: BTreeMap<&str, usize> = BTreeMap::new();
    for a in spec.all_activities() {
        for f in &a.feeds {
            if !spec.outputs.iter().any(|o| o.name == f.output) {
                return Err(MapError::UndeclaredOutput {
                    activity: a.name.clone(),
                    output: f.output.clone(),
                });
            }
            *feeders.entry(f.output.as_str()).or_default() += 1;
        }
    }

    let mut mapper = Mapper {
        kernel,
        config,
        feeders,
        practice: Practice::new(spec.phase.practice_name(), Area::Endeavor),
        competency_area,
    };
    mapper.practice.goals.push(spec.objective.clone());
    for o in &spec.outputs {
        mapper
            .practice
            .add_work_product(o.name.clone(), o.category, o.description.clone());
        mapper.practice.outputs.push(Ref::named(o.name.clone()));
    }
    for step in &spec.steps {
        let space = mapper
            .practice
            .add_space(None, step.name.clone(), Area::Endeavor, step.goal.clone());
        let chain = vec![step.name.clone()];
        for a in &step.activities {
            mapper.map_activity(a, &space, 1, &chain, None)?;
        }
    }
    let Mapper {
        mut practice,
        competency_area,
        ..
    } = mapper;

    let mut ids = HashSet::new();
    for id in practice
        .spaces
        .iter()
        .map(|s| &s.id)
        .chain(practice.activities.iter().map(|a| &a.id))
    {
        if !ids.insert(id.clone()) {
            return Err(MapError::Duplicate {
                phase: spec.phase,
                kind: "element",
                name: id.to_string(),
            });
        }
    }

    // Canonical activity order: grouped by space, spaces in pre-order.
    let space_index: BTreeMap<&ElementId, usize> =
        practice.spaces.iter().enumerate().map(|(i, s)| (&s.id, i)).collect();
    let mut keyed: Vec<(usize, Activity)> = practice
        .activities
        .drain(..)
        .map(|a| (a.space.as_ref().and_then(|s| space_index.get(s)).copied().unwrap_or(usize::MAX), a))
        .collect();
    keyed.sort_by_key(|(i, _)| *i);
    practice.activities = keyed.into_iter().map(|(_, a)| a).collect();

    // Space areas: plurality over the competencies required anywhere below.
    let area_of = |req: &CompetencyRequirement| {
        competency_area
            .iter()
            .find(|(c, _)| c.name() == req.competency.name)
            .map(|(_, a)| *a)
    };
    let mut space_areas = Vec::with_capacity(practice.spaces.len());
    for space in &practice.spaces {
        let prefix = format!("{}/", space.id);
        let mut counts = [0usize; 3];
        for a in &practice.activities {
            let inside = a
                .space
                .as_ref()
                .is_some_and(|s| *s == space.id || s.as_str().starts_with(&prefix));
            if inside {
                for req in &a.required_competencies {
                    if let Some(area) = area_of(req) {
                        counts[area.index()] += 1;
                    }
                }
            }
        }
        space_areas.push(AreaProfile::from_counts(counts).preferred_area());
    }
    for (space, area) in practice.spaces.iter_mut().zip(space_areas) {
        space.area = area;
    }

    practice.area = compute_area_profile(&practice, kernel).preferred_area();
    Ok(practice)
}

struct Mapper<'k> {
    kernel: &'k ResolvedModel,
    config: &'k MapConfig,
    feeders: BTreeMap<&'k str, usize>,
    practice: Practice,
    competency_area: BTreeMap<KernelCompetency, Area>,
}

impl Mapper<'_> {
    fn map_activity(
        &mut self,
        spec: &ActivitySpec,
        space: &ElementId,
        depth: usize,
        chain: &[String],
        inherited_role: Option<&str>,
    ) -> Result<(), MapError> {
        let mut chain = chain.to_vec();
        chain.push(spec.name.clone());
        let role = spec.role.as_deref().or(inherited_role);

        if !spec.sub_activities.is_empty() {
            if depth + 1 > self.config.max_depth {
                return Err(MapError::NestingTooDeep {
                    chain,
                    max_depth: self.config.max_depth,
                });
            }
            if !spec.feeds.is_empty() {
                return Err(MapError::DecomposedFeeds {
                    activity: spec.name.clone(),
                });
            }
            let child = self
                .practice
                .add_space(Some(space), spec.name.clone(), Area::Endeavor, None);
            for sub in &spec.sub_activities {
                self.map_activity(sub, &child, depth + 1, &chain, role)?;
            }
            return Ok(());
        }

        if spec.tags.is_empty() {
            return Err(MapError::UntaggedActivity {
                activity: spec.name.clone(),
            });
        }
        let mut tags = Vec::with_capacity(spec.tags.len());
        for t in &spec.tags {
            let tag = ActivityTag::from_name(t).ok_or_else(|| MapError::UnknownTag {
                activity: spec.name.clone(),
                tag: t.clone(),
            })?;
            if !tags.contains(&tag) {
                tags.push(tag);
            }
        }

        let role_decl = match role {
            Some(r) => Some(self.kernel.role_named(r).ok_or_else(|| MapError::UnknownRole {
                activity: spec.name.clone(),
                role: r.to_string(),
            })?),
            None => None,
        };

        let mut activity = Activity::new(space, spec.name.clone());
        for competency in competencies_for_tags(&tags) {
            debug_assert!(self.competency_area.contains_key(&competency));
            let level = role_decl
                .and_then(|r| {
                    r.competencies
                        .iter()
                        .find(|c| c.competency.name == competency.name())
                        .map(|c| c.level)
                })
                .unwrap_or(DEFAULT_LEVEL);
            activity
                .required_competencies
                .push(CompetencyRequirement::new(competency.name(), level));
        }
        for feed in &spec.feeds {
            let shared = self.feeders.get(feed.output.as_str()).copied().unwrap_or(0) >= 2;
            let part = feed.part.as_ref().filter(|p| !p.trim().is_empty());
            if shared && part.is_none() {
                return Err(MapError::MissingPart {
                    activity: spec.name.clone(),
                    output: feed.output.clone(),
                });
            }
            activity.produces.push(WorkProductContribution {
                work_product: Ref::named(feed.output.clone()),
                part: part.cloned(),
            });
        }
        activity.responsible_role = role.map(Ref::named);
        activity.tags = tags.iter().map(|t| t.as_str().to_string()).collect();
        self.practice.activities.push(activity);
        Ok(())
    }
}
