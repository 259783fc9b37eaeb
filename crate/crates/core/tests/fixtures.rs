mod common;

use common::{fixture, fixture_names, lenient};
use morse_extend::diagram::KleinRejection;
use morse_extend::oracle::brute_force_decide;
use morse_extend::search::{Mode, SearchError};
use morse_extend::{
    decide, decide_klein, enumerate_witnesses, validate_germ, KleinCondition, SurfaceClass,
};

fn labels(mode: Mode, name: &str) -> Vec<SurfaceClass> {
    let v = decide(&fixture(name), mode, &lenient()).unwrap();
    v.witness
        .unwrap()
        .diagram
        .edges
        .iter()
        .map(|e| e.cls)
        .collect()
}

#[test]
fn every_fixture_parses_and_is_commented() {
    let names = fixture_names();
    assert_eq!(names.len(), 17);
    for name in names {
        let text = std::fs::read_to_string(common::fixture_dir().join(&name)).unwrap();
        assert!(text.starts_with('#'), "{name} has no header comment");
        fixture(&name);
    }
}

#[test]
fn sphere() {
    let d = fixture("sphere.germ");
    assert_eq!(validate_germ(&d).euler, 2);
    assert!(decide(&d, Mode::General, &lenient()).unwrap().extendable);
    assert_eq!(
        decide_klein(&d).unwrap_err(),
        SearchError::Rejected(KleinRejection::Euler(2))
    );
}

#[test]
fn path4() {
    let d = fixture("path4.germ");
    let v = decide_klein(&d).unwrap();
    assert_eq!(v.condition(), Some(KleinCondition::Condition2));
    assert_eq!(v.witness_count, 1);
    let c = |g, o| SurfaceClass::new(g, o).unwrap();
    assert_eq!(
        labels(Mode::Klein, "path4.germ"),
        vec![c(0, 0), c(1, 1), c(0, 0)]
    );
    assert_eq!(
        brute_force_decide(&d, Mode::Klein).unwrap().witness_count,
        1
    );
}

#[test]
fn path4_flips_have_no_run_in_either_mode() {
    for flip in ["max", "mobius1", "mobius2", "min"] {
        let name = format!("path4_flip_{flip}.germ");
        let d = fixture(&name);
        for mode in [Mode::General, Mode::Klein] {
            assert_eq!(
                decide(&d, mode, &lenient()).unwrap().witness_count,
                0,
                "{name} {mode}"
            );
            assert!(
                !brute_force_decide(&d, mode).unwrap().extendable,
                "{name} {mode}"
            );
        }
    }
}

#[test]
fn path4_flips_are_single_flips() {
    let base = fixture("path4.germ");
    for (i, flip) in ["max", "mobius1", "mobius2", "min"].into_iter().enumerate() {
        assert_eq!(
            fixture(&format!("path4_flip_{flip}.germ")),
            base.with_flipped_sign(i)
        );
    }
}

#[test]
fn cycle4() {
    let d = fixture("cycle4.germ");
    let v = decide_klein(&d).unwrap();
    assert_eq!(v.condition(), Some(KleinCondition::Condition1));
    let w = v.witness.unwrap();
    assert_eq!(w.diagram.betti1(), 1);
    assert!(w.diagram.edges.iter().all(|e| e.cls == SurfaceClass::DISC));
}

#[test]
fn rigid8_and_its_flips() {
    let d = fixture("rigid8.germ");
    assert_eq!(d.vertices().len(), 8);
    let v = decide_klein(&d).unwrap();
    assert_eq!(v.condition(), Some(KleinCondition::Condition2));
    for i in 0..8 {
        let name = format!("rigid8_flip_v{i:02}.germ");
        let f = fixture(&name);
        assert_eq!(f, d.with_flipped_sign(i), "{name}");
        assert!(
            !decide(&f, Mode::Klein, &lenient()).unwrap().extendable,
            "{name}"
        );
        assert!(
            !brute_force_decide(&f, Mode::Klein).unwrap().extendable,
            "{name}"
        );
    }
}

#[test]
fn loop_to_tree() {
    let d = fixture("loop_to_tree.germ");
    let report = validate_germ(&d);
    assert_eq!(
        (report.euler, report.betti1, report.mobius_count),
        (0, 1, 0)
    );
    let v = decide_klein(&d).unwrap();
    assert_eq!(v.witness_count, 1);
    assert_eq!(v.condition(), Some(KleinCondition::Condition2));
    assert_eq!(
        brute_force_decide(&d, Mode::Klein).unwrap().witness_count,
        1
    );
    let general = enumerate_witnesses(&d, Mode::General, usize::MAX, &lenient()).unwrap();
    assert!(!general.is_empty());
    assert!(general.iter().all(|w| w.diagram.betti1() == 0));
}
