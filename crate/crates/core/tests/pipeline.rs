//! End-to-end runs of the verification pipeline through the public API
//! only: configure, run, serialize, tabulate. The CLI is a thin wrapper
//! around exactly these calls, so everything asserted here holds for the
//! binary as well.

use chen_core::profile::IntegrationStatus;
use chen_core::verify::{
    report_exit_code, run_build, run_ode, run_report, run_verify, to_json, RunConfig, SurfaceKind,
    VerificationReport, VerifyCase,
};

/// Shrunk window and grid for the control cases, which only need to show
/// a verdict, not survey the whole family.
fn quick(case: VerifyCase) -> RunConfig {
    RunConfig {
        case,
        t1: 0.2,
        grid: [2, 2, 2],
        ..RunConfig::default()
    }
}

#[test]
fn default_run_is_green_and_fully_sampled() {
    let report = run_verify(&RunConfig::default());
    let red: Vec<&String> = report
        .pass
        .iter()
        .filter_map(|(k, &ok)| (!ok).then_some(k))
        .collect();
    assert!(red.is_empty(), "failing checks: {red:?}");
    assert!(report.all_passed());
    assert_eq!(report_exit_code(&report), 0);
    assert_eq!(report.ode_status, Some(IntegrationStatus::Completed));
    assert_eq!(report.samples.len(), 27);

    for sample in &report.samples {
        let cubic = sample
            .cubic
            .as_ref()
            .expect("construction samples carry the full cubic block");
        assert!(cubic.structure.is_some());
        assert!(cubic.vw.is_some());
        assert!(cubic.h_match.is_some());
        assert!(cubic.slack_match.is_some());
        assert!(
            cubic.chen.classical_slack > 0.0,
            "equality family must stay strictly inside the classical bound"
        );
    }
}

#[test]
fn verdicts_restate_the_maxima_against_the_tolerances() {
    let report = run_verify(&RunConfig::default());
    assert!(!report.pass.is_empty());
    for (key, &verdict) in &report.pass {
        let worst = report.maxima[key];
        let within = worst <= report.config.tolerances.get(key);
        assert_eq!(verdict, within, "verdict for {key} contradicts its maximum");
    }
    assert_eq!(report.maxima.len(), report.pass.len());
}

#[test]
fn maxima_are_rederivable_from_the_sample_records() {
    let report = run_verify(&RunConfig::default());
    let worst = |f: &dyn Fn(&chen_core::verify::SampleRecord) -> f64| {
        report
            .samples
            .iter()
            .map(f)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert_eq!(report.maxima["unit_norm"], worst(&|s| s.unit_norm_dev));
    assert_eq!(report.maxima["horizontality"], worst(&|s| s.horizontality));
    assert_eq!(
        report.maxima["c_symmetry"],
        worst(&|s| s.cubic.as_ref().unwrap().chen.c_symmetry)
    );
    assert_eq!(
        report.maxima["equality_gap"],
        worst(&|s| s.cubic.as_ref().unwrap().chen.improved_gap.abs())
    );
    assert_eq!(
        report.maxima["h_match"],
        worst(&|s| s.cubic.as_ref().unwrap().h_match.unwrap())
    );
    assert_eq!(
        report.maxima["slack_match"],
        worst(&|s| s.cubic.as_ref().unwrap().slack_match.unwrap())
    );
}

#[test]
fn reports_serialize_bit_exactly_and_deterministically() {
    let config = RunConfig::default();
    let first = to_json(&run_verify(&config)).unwrap();

    let reparsed: VerificationReport = serde_json::from_str(&first).unwrap();
    assert_eq!(
        to_json(&reparsed).unwrap(),
        first,
        "parse + reserialize must be the identity"
    );

    let second = to_json(&run_verify(&config)).unwrap();
    let strip = |s: &str| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_str(s).unwrap();
        v["timestamp_unix"] = 0.into();
        v
    };
    assert_eq!(
        strip(&first),
        strip(&second),
        "identical configurations must produce identical reports"
    );
}

#[test]
fn controls_fail_exactly_their_intended_check() {
    let perturbed = run_verify(&quick(VerifyCase::PerturbedControl));
    assert_eq!(report_exit_code(&perturbed), 1);
    assert_eq!(perturbed.pass.get("horizontality"), Some(&false));
    assert!(perturbed.maxima["horizontality"] > perturbed.config.tolerances.get("horizontality"));

    let nonminimal = run_verify(&quick(VerifyCase::NonminimalSurface));
    assert_eq!(report_exit_code(&nonminimal), 1);
    assert_eq!(nonminimal.pass.get("surface_minimality"), Some(&false));
}

#[test]
fn ode_run_conserves_and_reverses() {
    let run = run_ode(&RunConfig::default()).unwrap();
    assert!(run.pass);
    assert_eq!(run.trajectory.status, IntegrationStatus::Completed);
    assert!(run.drift < 1e-10, "drift {}", run.drift);
    let reversal = run.reversal.expect("completed runs integrate back");
    assert!(reversal < 1e-9, "reversal {reversal}");

    let mut lines = run.csv.lines();
    assert_eq!(lines.next(), Some("t,b1,lam2,first_integral"));
    assert!(lines.count() > 100, "dense output should record every node");
}

#[test]
fn build_exports_the_sampled_lift() {
    let doc = run_build(&RunConfig::default()).unwrap();
    assert_eq!(doc.samples.len(), 27);
    assert!(doc.max_unit_norm_dev < 1e-10);
    assert!(doc.max_horizontality < 1e-6);
    assert_eq!(doc.surface.name, "clifford");

    let err = run_build(&quick(VerifyCase::PerturbedControl)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("construction"));
}

#[test]
fn geodesic_sphere_seed_builds_horizontally_too() {
    let config = RunConfig {
        surface: SurfaceKind::GeodesicSphere,
        ..RunConfig::default()
    };
    let doc = run_build(&config).unwrap();
    assert_eq!(doc.surface.name, "geodesic_sphere");
    assert!(doc.max_unit_norm_dev < 1e-10);
    assert!(doc.max_horizontality < 1e-6);
}

#[test]
fn invalid_configurations_are_usage_errors() {
    let bad = [
        RunConfig {
            lam2_0: 0.0,
            ..RunConfig::default()
        },
        RunConfig {
            lam2_0: -0.5,
            ..RunConfig::default()
        },
        RunConfig {
            b1_0: f64::NAN,
            ..RunConfig::default()
        },
        RunConfig {
            t1: 0.0,
            ..RunConfig::default()
        },
        RunConfig {
            grid: [1, 3, 3],
            ..RunConfig::default()
        },
        RunConfig {
            fd_step: 0.5,
            ..RunConfig::default()
        },
    ];
    for config in bad {
        let err = config.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }
    assert_eq!(
        run_ode(&bad_lam2()).unwrap_err().exit_code(),
        2,
        "entry points must validate before running"
    );
}

fn bad_lam2() -> RunConfig {
    RunConfig {
        lam2_0: -1.0,
        ..RunConfig::default()
    }
}

#[test]
fn report_table_sorts_rows_and_flags_failures() {
    let pass_json = to_json(&run_verify(&quick(VerifyCase::Construction))).unwrap();
    let fail_json = to_json(&run_verify(&quick(VerifyCase::PerturbedControl))).unwrap();
    let inputs = vec![
        ("z-control.json".to_string(), fail_json),
        ("a-construction.json".to_string(), pass_json),
    ];

    let table = run_report(&inputs).unwrap();
    assert_eq!(table.rows.len(), 2);
    assert_eq!(table.rows[0].name, "a-construction.json");
    assert!(table.rows[0].passed);
    assert!(table.rows[0].lam2_range.is_some());
    assert!(table.rows[0].gap_max.unwrap() < 1e-4);
    assert!(table.rows[0].slack_dev_max.is_some());
    assert_eq!(table.rows[1].name, "z-control.json");
    assert!(!table.rows[1].passed);

    assert!(table.csv.starts_with("report,case,samples,"));
    assert_eq!(table.csv.lines().count(), 3);
    assert!(table.text.contains(" ok"));
    assert!(table.text.contains("FAIL"));
}

#[test]
fn report_rejects_unparseable_input_by_name() {
    let err = run_report(&[("junk.json".to_string(), "{not json".to_string())]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("junk.json"));

    let err = run_report(&[("empty.json".to_string(), String::new())]).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("empty.json"));
}
