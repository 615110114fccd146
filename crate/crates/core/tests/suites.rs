//! The verification suites outside the acceptance gate, run at reduced
//! battery sizes, plus registry completeness.

use contractlab_core::verify::{
    run_suite, suite_demand_consistency, suite_envelope_shape, suite_equilibrium,
    suite_hidden_set_objective, suite_set_classes, SUITE_NAMES,
};

fn assert_passes(suite: contractlab_core::verify::Suite) {
    let failures: Vec<String> = suite
        .failures()
        .map(|c| format!("{}: {}", c.name, c.detail))
        .collect();
    assert!(
        failures.is_empty(),
        "suite {} failed:\n{}",
        suite.name,
        failures.join("\n")
    );
}

#[test]
fn set_classes_battery() {
    assert_passes(suite_set_classes(11, 100));
}

#[test]
fn demand_consistency_battery() {
    assert_passes(suite_demand_consistency(11, 30));
}

#[test]
fn equilibrium_battery() {
    assert_passes(suite_equilibrium(11, 40));
}

#[test]
fn hidden_set_objective_battery() {
    assert_passes(suite_hidden_set_objective(11));
}

#[test]
fn envelope_shape_battery() {
    assert_passes(suite_envelope_shape(11, 25));
}

#[test]
fn every_registered_suite_resolves() {
    for name in SUITE_NAMES {
        // light batteries: just confirm the registry dispatches
        if matches!(
            *name,
            "analytic-inequalities" | "action-gadget-separation" | "hidden-set-objective"
        ) {
            let suite = run_suite(name, 5, Some(50)).expect("registered");
            assert_eq!(&suite.name, name);
        }
    }
    assert!(run_suite("no-such-suite", 5, None).is_none());
}
