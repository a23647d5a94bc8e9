//! The bundled ADM corpus: Essence kernel, alphas, TOGAF roles, phase
//! specifications, the practices mapped from them and the `adm` method.
//!
//! `practices.ess` is generated: it is the canonical rendering of
//! [`map_phases`] over the other files and is checked against it by tests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use super::{map_phase, MapConfig, MapError, PhaseId};
use crate::diagnostic::RuleId;
use crate::dsl::{parse_files, render_practice, ParseDiagnostic};
use crate::metamodel::{ModelDocument, Practice};
use crate::validator::ResolvedModel;

/// Corpus source files in load order.
pub const FILES: [(&str, &str); 8] = [
    ("kernel.ess", include_str!("../../corpus/kernel.ess")),
    ("alphas.ess", include_str!("../../corpus/alphas.ess")),
    ("roles.ess", include_str!("../../corpus/roles.ess")),
    ("phase_p.ess", include_str!("../../corpus/phase_p.ess")),
    ("phase_a.ess", include_str!("../../corpus/phase_a.ess")),
    ("phase_stubs.ess", include_str!("../../corpus/phase_stubs.ess")),
    ("practices.ess", include_str!("../../corpus/practices.ess")),
    ("method.ess", include_str!("../../corpus/method.ess")),
];

pub const MANIFEST: &str = include_str!("../../corpus/manifest");

pub const PRACTICES_FILE: &str = "practices.ess";

/// Parses every corpus file into one document.
pub fn load_corpus() -> Result<ModelDocument, Vec<ParseDiagnostic>> {
    parse_files(&FILES).map(|p| p.document)
}

/// Kernel, roles and phase specifications: the mapper input, without the
/// generated practices and the method that refers to them.
pub fn load_sources() -> Result<ModelDocument, Vec<ParseDiagnostic>> {
    let files: Vec<_> = FILES
        .iter()
        .filter(|(n, _)| *n != PRACTICES_FILE && *n != "method.ess")
        .copied()
        .collect();
    parse_files(&files).map(|p| p.document)
}

/// Writes the corpus files and manifest into `dir`, creating it if needed.
pub fn materialize(dir: &Path) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, text) in FILES.iter().copied().chain([("manifest", MANIFEST)]) {
        let path = dir.join(name);
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Maps every phase specification of `model`, in declaration order.
pub fn map_phases(model: &ResolvedModel, config: &MapConfig) -> Result<Vec<Practice>, MapError> {
    model.phases().map(|ph| map_phase(ph, model, config)).collect()
}

/// Renders practices the way `practices.ess` stores them.
pub fn render_practices(practices: &[Practice]) -> String {
    practices
        .iter()
        .map(render_practice)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseCounts {
    pub steps: usize,
    pub activities: usize,
    pub outputs: usize,
}

/// Counts frozen when the corpus was transcribed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub phases: BTreeMap<PhaseId, PhaseCounts>,
    pub totals: BTreeMap<String, usize>,
    pub lints: BTreeMap<RuleId, usize>,
}

impl Manifest {
    pub fn bundled() -> Self {
        Self::parse(MANIFEST).expect("bundled manifest is well formed")
    }

    /// Line format: `phase <id> steps <n> activities <n> outputs <n>`,
    /// `lint <rule> <n>` or `<key> <n>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut m = Manifest::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = || format!("manifest line {}: cannot read `{}`", no + 1, raw.trim());
            let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["phase", id, "steps", s, "activities", a, "outputs", o] => {
                    let id: PhaseId = id.parse().map_err(|_| bad())?;
                    let counts = PhaseCounts {
                        steps: num(s)?,
                        activities: num(a)?,
                        outputs: num(o)?,
                    };
                    m.phases.insert(id, counts);
                }
                ["lint", rule, n] => {
                    let rule = RuleId::parse(rule).filter(|r| r.is_lint()).ok_or_else(bad)?;
                    m.lints.insert(rule, num(n)?);
                }
                [key, n] => {
                    m.totals.insert(key.to_string(), num(n)?);
                }
                _ => return Err(bad()),
            }
        }
        Ok(m)
    }

    pub fn total(&self, key: &str) -> Option<usize> {
        self.totals.get(key).copied()
    }
}
