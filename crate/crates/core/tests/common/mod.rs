//! Seeded random generators shared by the integration tests.
#![allow(dead_code)]

pub mod oracles;

use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use essence_core::metamodel::WorkProductCategory;
use essence_core::togaf::{ActivitySpec, ActivityTag, Feed, OutputSpec, PhaseId, StepSpec, TogafPhaseSpec};

pub const KERNEL: &str = r#"kernel "Essence" {
  area Customer color green
  area Solution color yellow
  area Endeavor color blue
  competency "Stakeholder Representation" area Customer
  competency Analysis area Solution
  competency Development area Solution
  competency Testing area Solution
  competency Leadership area Endeavor
  competency Management area Endeavor
  competency Governance area Endeavor
}
"#;

pub fn kernel() -> essence_core::validator::ResolvedModel {
    let doc = essence_core::dsl::parse(KERNEL, "kernel.ess").unwrap().document;
    essence_core::validator::resolve(&doc).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "Vision", "Scope", "Stakeholder", "Plan", "Review", "Model", "Gap", "Target", "Baseline", "Risk",
    "Principle", "Budget", "Team", "Roadmap", "Value",
];

const AREAS: [&str; 3] = ["Customer", "Solution", "Endeavor"];
const CATEGORIES: [&str; 4] = ["catalog", "matrix", "diagram", "other"];
const COLORS: [&str; 3] = ["green", "yellow", "blue"];

/// Emits `.ess` source text for a random, syntactically valid document.
/// Names carry a counter so derived element ids never collide.
pub struct DocGen {
    rng: ChaCha8Rng,
    counter: usize,
    out: String,
    competencies: Vec<String>,
    roles: Vec<String>,
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\\\""))
}

impl DocGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: rng(seed),
            counter: 0,
            out: String::new(),
            competencies: Vec::new(),
            roles: Vec::new(),
        }
    }

    fn text(&mut self) -> String {
        let n = self.rng.gen_range(1..=4);
        let mut words: Vec<String> = (0..n)
            .map(|_| WORDS.choose(&mut self.rng).unwrap().to_string())
            .collect();
        match self.rng.gen_range(0..8) {
            0 => words.push("\"quoted\"".into()),
            1 => words.push("# not a comment".into()),
            2 => words.push("caf\u{e9}".into()),
            3 => words.push(":".into()),
            _ => {}
        }
        words.join(" ")
    }

    fn name(&mut self) -> String {
        self.counter += 1;
        let base = WORDS.choose(&mut self.rng).unwrap();
        if self.rng.gen_bool(0.5) {
            format!("{base}{}", self.counter)
        } else {
            format!("{} {base} {}", self.text().replace(':', "x"), self.counter)
        }
    }

    /// A NAME token: bare when the name is an identifier.
    fn name_token(name: &str) -> String {
        let bare = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if bare {
            name.to_string()
        } else {
            quote(name)
        }
    }

    fn sep(&mut self) -> &'static str {
        if self.rng.gen_bool(0.5) {
            " "
        } else {
            "\n    "
        }
    }

    pub fn document(mut self) -> String {
        self.kernel(true);
        if self.rng.gen_bool(0.3) {
            self.kernel(false);
        }
        for _ in 0..self.rng.gen_range(0..3) {
            self.role();
        }
        let mut practices = Vec::new();
        for _ in 0..self.rng.gen_range(0..4) {
            practices.push(self.practice());
        }
        if !practices.is_empty() && self.rng.gen_bool(0.5) {
            self.method(&practices);
        }
        let mut phases = PhaseId::ALL.to_vec();
        phases.shuffle(&mut self.rng);
        for phase in phases.into_iter().take(self.rng.gen_range(0..3)) {
            self.phase(phase);
        }
        if self.rng.gen_bool(0.2) {
            self.out = self.out.replace('\n', "\r\n");
        }
        self.out
    }

    fn kernel(&mut self, with_areas: bool) {
        let name = self.name();
        let _ = writeln!(self.out, "kernel {} {{", quote(&name));
        if with_areas {
            let mut areas = AREAS.to_vec();
            areas.shuffle(&mut self.rng);
            for a in areas.into_iter().take(self.rng.gen_range(1..=3)) {
                let color = COLORS[AREAS.iter().position(|x| *x == a).unwrap()];
                let _ = writeln!(self.out, "  area {a} color {color}");
            }
        }
        for _ in 0..self.rng.gen_range(0..4) {
            let c = self.name();
            let area = AREAS.choose(&mut self.rng).unwrap();
            let _ = write!(self.out, "  competency {} area {area}", Self::name_token(&c));
            if self.rng.gen_bool(0.3) {
                let _ = write!(self.out, " levels {}", self.rng.gen_range(1..=5));
            }
            self.out.push('\n');
            self.competencies.push(c);
        }
        for _ in 0..self.rng.gen_range(0..3) {
            let a = self.name();
            let area = AREAS.choose(&mut self.rng).unwrap();
            let _ = writeln!(self.out, "  alpha {} area {area} {{", Self::name_token(&a));
            for _ in 0..self.rng.gen_range(1..4) {
                let s = self.name();
                let _ = write!(self.out, "    state {} {{", Self::name_token(&s));
                for k in 0..self.rng.gen_range(1..4) {
                    let t = format!("{} {k}", self.text());
                    let _ = write!(self.out, " check {}", quote(&t));
                }
                self.out.push_str(" }\n");
            }
            self.out.push_str("  }\n");
        }
        let mut spaces: Vec<String> = Vec::new();
        for _ in 0..self.rng.gen_range(0..3) {
            let s = self.name();
            let area = AREAS.choose(&mut self.rng).unwrap();
            let _ = write!(self.out, "  space {} area {area}", quote(&s));
            if !spaces.is_empty() && self.rng.gen_bool(0.5) {
                let parent = spaces.choose(&mut self.rng).unwrap().clone();
                let _ = write!(self.out, " in {}", quote(&parent));
            }
            if self.rng.gen_bool(0.5) {
                let g = self.text();
                let _ = write!(self.out, " goal {}", quote(&g));
            }
            self.out.push('\n');
            spaces.push(s);
        }
        for _ in 0..self.rng.gen_range(0..2) {
            self.work_product("  ");
        }
        self.out.push_str("}\n");
    }

    fn work_product(&mut self, indent: &str) -> String {
        let w = self.name();
        let cat = CATEGORIES.choose(&mut self.rng).unwrap();
        let _ = write!(self.out, "{indent}workproduct {} category {cat}", quote(&w));
        if self.rng.gen_bool(0.4) {
            let d = self.text();
            let _ = write!(self.out, " description {}", quote(&d));
        }
        self.out.push('\n');
        w
    }

    fn competency_name(&mut self) -> String {
        if self.competencies.is_empty() || self.rng.gen_bool(0.1) {
            "Analysis".to_string()
        } else {
            self.competencies.choose(&mut self.rng).unwrap().clone()
        }
    }

    fn role(&mut self) {
        let r = self.name();
        let _ = writeln!(self.out, "role {} {{", quote(&r));
        for _ in 0..self.rng.gen_range(1..3) {
            let c = self.competency_name();
            let level = self.rng.gen_range(1..=5);
            let _ = writeln!(self.out, "  competency {} @ {level}", Self::name_token(&c));
        }
        self.out.push_str("}\n");
        self.roles.push(r);
    }

    fn practice(&mut self) -> String {
        let p = self.name();
        let area = AREAS.choose(&mut self.rng).unwrap();
        let _ = writeln!(self.out, "practice {} area {area} {{", quote(&p));
        let g = self.text();
        let _ = writeln!(self.out, "  goal {}", quote(&g));
        let mut wps = Vec::new();
        let items = self.rng.gen_range(0..6);
        for _ in 0..items {
            match self.rng.gen_range(0..5) {
                0 => {
                    let g = self.text();
                    let _ = writeln!(self.out, "  goal {}", quote(&g));
                }
                1 => {
                    let i = self.text();
                    let _ = writeln!(self.out, "  input {}", quote(&i));
                }
                2 => wps.push(self.work_product("  ")),
                3 if !wps.is_empty() => {
                    let o = wps.choose(&mut self.rng).unwrap().clone();
                    let _ = writeln!(self.out, "  output {}", quote(&o));
                }
                _ => self.space(1, &wps),
            }
        }
        self.out.push_str("}\n");
        p
    }

    fn space(&mut self, depth: usize, wps: &[String]) {
        let indent = "  ".repeat(depth);
        let s = self.name();
        let _ = write!(self.out, "{indent}space {}", quote(&s));
        if self.rng.gen_bool(0.3) {
            let _ = write!(self.out, " area {}", AREAS.choose(&mut self.rng).unwrap());
        }
        if self.rng.gen_bool(0.6) {
            let g = self.text();
            let _ = write!(self.out, " goal {}", quote(&g));
        }
        self.out.push_str(" {\n");
        for _ in 0..self.rng.gen_range(0..4) {
            if depth < 4 && self.rng.gen_bool(0.3) {
                self.space(depth + 1, wps);
            } else {
                self.activity(depth + 1, wps);
            }
        }
        let _ = writeln!(self.out, "{indent}}}");
    }

    fn activity(&mut self, depth: usize, wps: &[String]) {
        let indent = "  ".repeat(depth);
        let a = self.name();
        let _ = write!(self.out, "{indent}activity {}", quote(&a));
        let mut has_role = false;
        for _ in 0..self.rng.gen_range(0..5) {
            let sep = self.sep();
            match self.rng.gen_range(0..4) {
                0 => {
                    let c = self.competency_name();
                    let level = self.rng.gen_range(1..=5);
                    let _ = write!(self.out, "{sep}requires {} @ {level}", Self::name_token(&c));
                }
                1 if !wps.is_empty() => {
                    let w = wps.choose(&mut self.rng).unwrap().clone();
                    let text = if self.rng.gen_bool(0.5) {
                        let part = self.text();
                        format!("{w}: {part}")
                    } else {
                        w
                    };
                    let _ = write!(self.out, "{sep}produces {}", quote(&text));
                }
                2 if !self.roles.is_empty() && !has_role => {
                    has_role = true;
                    let r = self.roles.choose(&mut self.rng).unwrap().clone();
                    let _ = write!(self.out, "{sep}role {}", quote(&r));
                }
                _ => {
                    let t = ActivityTag::ALL.choose(&mut self.rng).unwrap();
                    let _ = write!(self.out, "{sep}tag {}", t.as_str());
                }
            }
        }
        self.out.push('\n');
    }

    fn method(&mut self, practices: &[String]) {
        let m = self.name();
        let _ = writeln!(self.out, "method {} {{", quote(&m));
        // Preamble, cycle and concurrent practices are disjoint.
        let mut pool = practices.to_vec();
        pool.shuffle(&mut self.rng);
        if pool.len() > 1 && self.rng.gen_bool(0.5) {
            let p = pool.pop().unwrap();
            let _ = writeln!(self.out, "  preamble {}", quote(&p));
        }
        if pool.len() > 1 && self.rng.gen_bool(0.5) {
            let p = pool.pop().unwrap();
            let _ = writeln!(self.out, "  concurrent {}", quote(&p));
        }
        for p in &pool {
            let _ = writeln!(self.out, "  cycle {}", quote(p));
        }
        self.out.push_str("}\n");
    }

    fn phase(&mut self, phase: PhaseId) {
        let spec = PhaseGen::new(self.rng.gen()).spec(phase);
        let mut doc = String::new();
        let _ = writeln!(doc, "togaf_phase {} {} {{", phase, quote(&spec.name));
        let _ = writeln!(doc, "  objective {}", quote(&spec.objective));
        for step in &spec.steps {
            let _ = write!(doc, "  step {}", quote(&step.name));
            if let Some(g) = &step.goal {
                let _ = write!(doc, " goal {}", quote(g));
            }
            doc.push_str(" {\n");
            for a in &step.activities {
                activity_spec(&mut doc, 2, a);
            }
            doc.push_str("  }\n");
        }
        for o in &spec.outputs {
            let _ = write!(doc, "  output {} category {}", quote(&o.name), o.category);
            if let Some(d) = &o.description {
                let _ = write!(doc, " description {}", quote(d));
            }
            doc.push('\n');
        }
        doc.push_str("}\n");
        self.out.push_str(&doc);
    }
}

fn activity_spec(out: &mut String, depth: usize, a: &ActivitySpec) {
    let indent = "  ".repeat(depth);
    let _ = write!(out, "{indent}activity {}", quote(&a.name));
    for t in &a.tags {
        let _ = write!(out, " tag {t}");
    }
    for f in &a.feeds {
        let _ = write!(out, " feeds {}", quote(&f.text()));
    }
    if let Some(r) = &a.role {
        let _ = write!(out, " role {}", quote(r));
    }
    if a.sub_activities.is_empty() {
        out.push('\n');
        return;
    }
    out.push_str(" {\n");
    for s in &a.sub_activities {
        activity_spec(out, depth + 1, s);
    }
    let _ = writeln!(out, "{indent}}}");
}

/// Random phase specifications that satisfy the mapper's preconditions
/// under the default nesting limit.
pub struct PhaseGen {
    rng: ChaCha8Rng,
    counter: usize,
}

impl PhaseGen {
    pub fn new(seed: u64) -> Self {
        Self { rng: rng(seed), counter: 0 }
    }

    fn name(&mut self, prefix: &str) -> String {
        self.counter += 1;
        let word = WORDS.choose(&mut self.rng).unwrap();
        format!("{prefix} {word} {}", self.counter)
    }

    pub fn spec(&mut self, phase: PhaseId) -> TogafPhaseSpec {
        let mut spec = TogafPhaseSpec::new(phase, self.name("Phase"), self.name("Objective"));
        for _ in 0..self.rng.gen_range(0..4) {
            let name = self.name("Output");
            let category = *WorkProductCategory::ALL.choose(&mut self.rng).unwrap();
            spec.outputs.push(OutputSpec {
                name,
                category,
                description: None,
            });
        }
        for _ in 0..self.rng.gen_range(0..5) {
            let name = self.name("Step");
            let goal = self.rng.gen_bool(0.7).then(|| self.name("Goal"));
            let activities = (0..self.rng.gen_range(0..4)).map(|_| self.activity(1)).collect();
            spec.steps.push(StepSpec { name, goal, activities });
        }
        // Feeds: every feed names its part so shared outputs stay valid.
        let outputs: Vec<String> = spec.outputs.iter().map(|o| o.name.clone()).collect();
        if !outputs.is_empty() {
            let mut leaves = Vec::new();
            for step in &mut spec.steps {
                collect_leaves(&mut step.activities, &mut leaves);
            }
            for leaf in leaves {
                for _ in 0..self.rng.gen_range(0..3) {
                    self.counter += 1;
                    let output = outputs.choose(&mut self.rng).unwrap().clone();
                    let part = format!("part {}", self.counter);
                    leaf.feeds.push(Feed { output, part: Some(part) });
                }
            }
        }
        spec
    }

    /// Activity at nesting `depth`; the step's space is depth 1.
    fn activity(&mut self, depth: usize) -> ActivitySpec {
        if depth < 3 && self.rng.gen_bool(0.25) {
            let subs = (0..self.rng.gen_range(1..4)).map(|_| self.activity(depth + 1)).collect();
            return ActivitySpec {
                name: self.name("Group"),
                sub_activities: subs,
                ..ActivitySpec::default()
            };
        }
        let mut tags: Vec<ActivityTag> = ActivityTag::ALL.to_vec();
        tags.shuffle(&mut self.rng);
        let n = self.rng.gen_range(1..=3);
        ActivitySpec::leaf(self.name("Activity"), &tags[..n])
    }
}

fn collect_leaves<'a>(specs: &'a mut [ActivitySpec], out: &mut Vec<&'a mut ActivitySpec>) {
    for s in specs {
        if s.sub_activities.is_empty() {
            out.push(s);
        } else {
            collect_leaves(&mut s.sub_activities, out);
        }
    }
}
