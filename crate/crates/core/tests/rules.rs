mod common;

use std::collections::BTreeSet;

use essence_core::diagnostic::{RuleId, Severity};
use essence_core::dsl::parse;
use essence_core::lint::{all_rules, run_lints};
use essence_core::metamodel::ModelDocument;
use essence_core::validator::{
    check_wellformedness, compute_area_profile, resolve, ValidationConfig,
};

fn lint_pairs(src: &str) -> BTreeSet<(RuleId, String)> {
    let doc = parse(src, "l.ess").unwrap().document;
    let model = resolve(&doc).unwrap();
    run_lints(&model, &all_rules())
        .unwrap()
        .into_iter()
        .map(|d| (d.rule, d.path))
        .collect()
}

#[test]
fn feeding_an_output_removes_exactly_its_l001() {
    let base = format!(
        r#"{}
role "Reviewer" {{ competency Testing @ 3 }}
practice "P" area Solution {{
  goal "g"
  workproduct "Vision" category other
  workproduct "Plan" category other
  output "Vision"
  output "Plan"
  space "S" goal "x" {{
    activity "Review" requires Testing @ 3 role "Reviewer"
    ACTIVITY
  }}
}}"#,
        common::KERNEL
    );
    let before = lint_pairs(&base.replace("ACTIVITY", ""));
    let after = lint_pairs(&base.replace("ACTIVITY", r#"activity "Write" requires Development @ 3 produces "Vision""#));
    let removed: Vec<_> = before.difference(&after).cloned().collect();
    let added: Vec<_> = after.difference(&before).cloned().collect();
    assert_eq!(removed, vec![(RuleId::L001, "practice.p/workproduct.vision".to_string())]);
    assert!(added.is_empty(), "{added:?}");
}

#[test]
fn lint_findings_are_warnings_only() {
    let doc = essence_core::togaf::corpus::load_corpus().unwrap();
    let model = resolve(&doc).unwrap();
    let diags = run_lints(&model, &all_rules()).unwrap();
    assert!(!diags.is_empty());
    assert!(diags.iter().all(|d| d.severity == Severity::Warning));
    assert!(run_lints(&model, &BTreeSet::new()).unwrap().is_empty());
}

#[test]
fn empty_model_has_no_diagnostics() {
    let model = resolve(&ModelDocument::empty()).unwrap();
    assert!(check_wellformedness(&model, &ValidationConfig::default()).is_empty());
    assert!(run_lints(&model, &all_rules()).unwrap().is_empty());
}

#[test]
fn nesting_limit_is_configurable() {
    let model = resolve(&parse(&common::oracles::nested(4), "d.ess").unwrap().document).unwrap();
    let default = check_wellformedness(&model, &ValidationConfig::default());
    assert_eq!(default.iter().map(|d| d.rule).collect::<Vec<_>>(), vec![RuleId::V011]);
    let four = ValidationConfig { max_nesting_depth: 4 };
    assert!(check_wellformedness(&model, &four).is_empty());
    let model = resolve(&parse(&common::oracles::nested(3), "d.ess").unwrap().document).unwrap();
    assert!(check_wellformedness(&model, &ValidationConfig::default()).is_empty());
}

#[test]
fn plurality_survives_duplication() {
    let doc = essence_core::togaf::corpus::load_corpus().unwrap();
    for p in doc.practices() {
        let before = compute_area_profile(p, &doc);
        let after = compute_area_profile(&common::oracles::duplicate_contents(p), &doc);
        assert_eq!(before.plurality(), after.plurality(), "{}", p.name);
        assert_eq!(after.total(), 2 * before.total(), "{}", p.name);
    }
}
