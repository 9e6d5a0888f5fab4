//! Acceptance gate: nine go/no-go criteria for the equality-family
//! construction, each one a test whose pass/fail line is the verdict.
//!
//! Criteria 3 through 6 interrogate a single shared verification run of
//! the default construction (Clifford base, (b₁, λ₂)(0) = (0, 0.5),
//! 3×3×3 interior grid). The others exercise the profile integrator, the
//! closed-form tensor identity, the totally geodesic reference, and the
//! negative controls. Tolerances are pinned here, independent of the
//! library defaults, so a library-side loosening cannot silently pass.

use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use chen_core::invariants::{curvature_tensor, scalar_tau, sectional_curvature, CubicTensor};
use chen_core::profile::{frame_rates, integrate, rhs, IntegrationStatus, OdeConfig, ProfileState};
use chen_core::verify::{run_verify, RunConfig, VerificationReport, VerifyCase};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DRIFT_TOL: f64 = 1e-10;
const CHAIN_RULE_TOL: f64 = 1e-13;
const UNIT_NORM_TOL: f64 = 1e-12;
const HORIZONTALITY_TOL: f64 = 1e-6;
const C_SYMMETRY_TOL: f64 = 1e-5;
const LAMBDA_RATIO_TOL: f64 = 1e-4;
const CONDITIONS_TOL: f64 = 1e-4;
const STRUCTURE_TOL: f64 = 1e-4;
const EQUALITY_GAP_TOL: f64 = 1e-4;
const H_MATCH_TOL: f64 = 1e-4;
const SLACK_MATCH_TOL: f64 = 1e-4;
const MIN_PLANE_TOL: f64 = 1e-4;
const VW_TOL: f64 = 1e-4;
const W_ROUNDTRIP_TOL: f64 = 1e-5;
const W_HORIZONTALITY_TOL: f64 = 1e-6;
const SURFACE_MINIMALITY_TOL: f64 = 1e-5;
const C_ZERO_TOL: f64 = 1e-6;
const MINIMAL_INVARIANTS_TOL: f64 = 1e-5;
const H_SQ_ZERO_TOL: f64 = 1e-10;
const IDENTITY_TOL: f64 = 1e-10;

struct SharedRun {
    report: VerificationReport,
    elapsed: Duration,
}

static CONSTRUCTION: OnceLock<SharedRun> = OnceLock::new();

fn construction() -> &'static SharedRun {
    CONSTRUCTION.get_or_init(|| {
        let config = RunConfig::default();
        let start = Instant::now();
        let report = run_verify(&config);
        let elapsed = start.elapsed();
        assert!(
            report.failure.is_none(),
            "construction run must complete: {:?}",
            report.failure
        );
        SharedRun { report, elapsed }
    })
}

fn maximum(report: &VerificationReport, key: &str) -> f64 {
    *report
        .maxima
        .get(key)
        .unwrap_or_else(|| panic!("report must carry the '{key}' check"))
}

#[test]
fn criterion_1_first_integral_conserved_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0C1);
    let config = OdeConfig {
        step: 1e-3,
        ..OdeConfig::default()
    };
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for k in 0..10 {
        let b1 = rng.gen_range(-2.0..2.0);
        let lam2 = rng.gen_range(0.1..2.0);
        let trajectory = integrate(ProfileState::new(b1, lam2), 0.0, 2.0, &config)
            .unwrap_or_else(|e| panic!("state {k} (b1={b1}, lam2={lam2}): {e}"));
        assert!(
            matches!(
                trajectory.status,
                IntegrationStatus::Completed | IntegrationStatus::HitSingularLocus
            ),
            "state {k}: unexpected status {:?}",
            trajectory.status
        );
        assert!(
            trajectory.max_drift < DRIFT_TOL,
            "state {k} (b1={b1}, lam2={lam2}): relative drift {:.3e} over [0, {}]",
            trajectory.max_drift,
            trajectory.t_reached
        );
        worst = worst.max(trajectory.max_drift);
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "batch took {elapsed:?}");
    println!(
        "criterion 1 PASS: 10 trajectories, worst relative drift {worst:.3e} < {DRIFT_TOL:.0e}, batch {elapsed:?}"
    );
}

#[test]
fn criterion_2_ode_matches_frame_rates_via_chain_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0C2);
    let mut worst = 0.0_f64;
    for k in 0..100 {
        let b1 = rng.gen_range(-2.0..2.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let lam2 = sign * rng.gen_range(0.05..2.0);
        let state = ProfileState::new(b1, lam2);
        let (db1_dt, dlam2_dt) = rhs(&state).unwrap();
        let (e1_b1, e1_lam2, e1_t) = frame_rates(&state);
        // E₁ f = (df/dt) · E₁(t) for f ∈ {b₁, λ₂}.
        let rb = (db1_dt * e1_t - e1_b1).abs() / e1_b1.abs().max(1.0);
        let rl = (dlam2_dt * e1_t - e1_lam2).abs() / e1_lam2.abs().max(1.0);
        assert!(
            rb <= CHAIN_RULE_TOL && rl <= CHAIN_RULE_TOL,
            "state {k} (b1={b1}, lam2={lam2}): residuals {rb:.3e}, {rl:.3e}"
        );
        worst = worst.max(rb).max(rl);
    }
    println!(
        "criterion 2 PASS: 100 states, worst chain-rule residual {worst:.3e} <= {CHAIN_RULE_TOL:.0e}"
    );
}

#[test]
fn criterion_3_constructed_lift_satisfies_equality_structure() {
    let shared = construction();
    let report = &shared.report;
    assert_eq!(report.ode_status, Some(IntegrationStatus::Completed));
    let checks = [
        ("unit_norm", UNIT_NORM_TOL),
        ("horizontality", HORIZONTALITY_TOL),
        ("c_symmetry", C_SYMMETRY_TOL),
        ("lambda_ratio", LAMBDA_RATIO_TOL),
        ("conditions", CONDITIONS_TOL),
        ("structure", STRUCTURE_TOL),
    ];
    for (key, tol) in checks {
        let value = maximum(report, key);
        assert!(value <= tol, "{key}: {value:.3e} > {tol:.0e}");
    }
    assert!(
        shared.elapsed < Duration::from_secs(30),
        "run took {:?}",
        shared.elapsed
    );
    println!(
        "criterion 3 PASS: {} grid samples; unit {:.1e}, horizontality {:.1e}, \
         C-symmetry {:.1e}, lambda ratio {:.1e}, conditions {:.1e}, structure {:.1e}; run {:?}",
        report.samples.len(),
        maximum(report, "unit_norm"),
        maximum(report, "horizontality"),
        maximum(report, "c_symmetry"),
        maximum(report, "lambda_ratio"),
        maximum(report, "conditions"),
        maximum(report, "structure"),
        shared.elapsed
    );
}

#[test]
fn criterion_4_improved_bound_attained_with_profile_match() {
    let report = &construction().report;
    let gap = maximum(report, "equality_gap");
    let h = maximum(report, "h_match");
    let slack = maximum(report, "slack_match");
    assert!(gap < EQUALITY_GAP_TOL, "equality gap {gap:.3e}");
    assert!(h < H_MATCH_TOL, "|H| vs 2*lam2 deviation {h:.3e}");
    assert!(
        slack < SLACK_MATCH_TOL,
        "classical slack vs 3*lam2^2 deviation {slack:.3e}"
    );
    // The classical bound must stay strictly away from equality.
    let mut min_slack = f64::INFINITY;
    for sample in &report.samples {
        let chen = &sample
            .cubic
            .as_ref()
            .expect("cubic data at every sample")
            .chen;
        assert!(
            chen.classical_slack > 0.0,
            "classical slack not strict at t={} ({:.3e})",
            sample.t,
            chen.classical_slack
        );
        min_slack = min_slack.min(chen.classical_slack);
    }
    println!(
        "criterion 4 PASS: |delta - 2 - 1.5|H|^2| <= {gap:.3e}, profile deviations {h:.3e}/{slack:.3e}, \
         classical slack >= {min_slack:.3e}"
    );
}

#[test]
fn criterion_5_minimal_plane_is_transverse_to_e1() {
    let report = &construction().report;
    let residual = maximum(report, "min_plane_alignment");
    assert!(
        residual < MIN_PLANE_TOL,
        "worst |<u, e1>| is {:.6} (residual {residual:.3e})",
        1.0 - residual
    );
    println!(
        "criterion 5 PASS: inf-K plane normal aligns with e1 to 1 - {residual:.3e} at all samples"
    );
}

#[test]
fn criterion_6_frame_fields_and_surface_recovery() {
    let report = &construction().report;
    let vw = maximum(report, "vw");
    let roundtrip = maximum(report, "w_roundtrip");
    let horiz = maximum(report, "surface_horizontality");
    let minimality = maximum(report, "surface_minimality");
    assert!(vw < VW_TOL, "V/W derivative residual {vw:.3e}");
    assert!(roundtrip < W_ROUNDTRIP_TOL, "W roundtrip {roundtrip:.3e}");
    assert!(horiz < W_HORIZONTALITY_TOL, "W horizontality {horiz:.3e}");
    assert!(
        minimality < SURFACE_MINIMALITY_TOL,
        "surface mean curvature {minimality:.3e}"
    );
    for key in ["v_unit", "v_gauge", "w_orthogonality"] {
        assert_eq!(report.pass.get(key), Some(&true), "{key} must pass");
    }
    println!(
        "criterion 6 PASS: V/W residuals {vw:.3e}, W roundtrip {roundtrip:.3e}, \
         W horizontality {horiz:.3e}, surface minimality {minimality:.3e}"
    );
}

#[test]
fn criterion_7_totally_geodesic_reference_pins_constant() {
    let config = RunConfig {
        case: VerifyCase::RealForm,
        ..RunConfig::default()
    };
    let report = run_verify(&config);
    assert!(report.failure.is_none(), "{:?}", report.failure);
    let c_zero = maximum(&report, "c_zero");
    let invariants = maximum(&report, "minimal_invariants");
    let h_sq = maximum(&report, "h_sq_zero");
    let gap = maximum(&report, "equality_gap");
    assert!(c_zero < C_ZERO_TOL, "max |C| = {c_zero:.3e}");
    assert!(
        invariants <= MINIMAL_INVARIANTS_TOL,
        "worst of |tau-3|, |infK-1|, |delta-2| is {invariants:.3e}"
    );
    assert!(h_sq < H_SQ_ZERO_TOL, "|H|^2 = {h_sq:.3e}");
    assert!(
        gap < EQUALITY_GAP_TOL,
        "equality gap with H = 0 is {gap:.3e}"
    );
    println!(
        "criterion 7 PASS: |C| <= {c_zero:.3e}, invariant deviations <= {invariants:.3e}, \
         |H|^2 <= {h_sq:.3e}, bound met with equality"
    );
}

#[test]
fn criterion_8_closed_form_identity_cancels_transverse_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0C8);
    let mut worst = 0.0_f64;
    for k in 0..1000 {
        let lam2 = rng.gen_range(0.05..2.0);
        let a = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(-2.0..2.0);
        let c = CubicTensor::equality_structured(lam2, a, b);
        let r = curvature_tensor(&c);
        let tau = scalar_tau(&r);
        let k23 = sectional_curvature(&r, [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]).unwrap();
        // tau - K(e2 ^ e3) - (3/2)|H|^2 with |H|^2 = 4 lam2^2: the a and b
        // contributions cancel, leaving the ambient constant 2.
        let residual = (tau - k23 - 6.0 * lam2 * lam2 - 2.0).abs();
        assert!(
            residual <= IDENTITY_TOL,
            "draw {k} (lam2={lam2}, a={a}, b={b}): residual {residual:.3e}"
        );
        worst = worst.max(residual);
    }
    println!("criterion 8 PASS: 1000 synthetic tensors, |tau - K23 - 6*lam2^2 - 2| <= {worst:.3e}");
}

#[test]
fn criterion_9_negative_controls_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    for case in ["perturbed-control", "nonminimal-surface"] {
        let out = dir.path().join(format!("{case}.json"));
        let output = Command::new(env!("CARGO_BIN_EXE_chen-verify"))
            .args([
                "verify", "--case", case, "--t1", "0.2", "--grid", "2x2x2", "--out",
            ])
            .arg(&out)
            .output()
            .expect("binary runs");
        assert_eq!(
            output.status.code(),
            Some(1),
            "{case}: expected exit 1, stderr:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
        let report: VerificationReport =
            serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        let failed: Vec<&str> = report
            .pass
            .iter()
            .filter(|(_, ok)| !**ok)
            .map(|(k, _)| k.as_str())
            .collect();
        assert!(!failed.is_empty(), "{case}: report shows no failing check");
        println!("criterion 9 PASS ({case}): exit 1, failing checks {failed:?}");
    }
}
