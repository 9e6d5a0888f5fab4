//! End-to-end verification runs and machine-readable reports.
//!
//! A run is described by a [`RunConfig`]: which case to check, the profile
//! initial data, the integration window and the sampling grid. Four cases
//! exist:
//!
//! * `construction` - the positive case: seed surface checks, profile ODE
//!   conservation, then a full grid sweep measuring unit norm,
//!   horizontality, the cubic form shape, structure equations, the V/W
//!   splitting and the Chen equality residuals,
//! * `real-form` - the totally geodesic reference with C ≡ 0, τ = 3,
//!   inf K = 1, δ = 2,
//! * `perturbed-control` - the construction with a t-dependent unitary
//!   phase twist on the first slot; horizontality must fail,
//! * `nonminimal-surface` - the anisotropic torus seed; the surface
//!   pre-check must fail before any sweep.
//!
//! Reports carry every sampled residual plus a `pass` verdict per check.
//! The process exit code is a pure function of the report: 0 when all
//! checks pass, 1 when any check fails, 2 for unusable configuration and
//! 3 when the pipeline itself broke (reported in the `failure` block).
//! All floats in reports are printed with 17 significant digits, so
//! parsing a report back reproduces the exact binary values.

use std::collections::BTreeMap;
use std::io;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::assembly::{
    interior_grid_3d, real_form_lift, sample_immersion, tangent_frame, vw_residuals,
    ConstructedImmersion, ImmersionSample, PhaseTwist,
};
use crate::error::{Error, Result};
use crate::invariants::{
    chen_report, cubic_form, structure_equation_residuals, AdaptationSummary, ChenReport,
    StructureResiduals,
};
use crate::jets::{jet_at, JetConfig, ParametricMap};
use crate::profile::{integrate, IntegrationStatus, OdeConfig, ProfileState, Trajectory};
use crate::surfaces::{
    anisotropic_torus_control_surface, clifford_surface, geodesic_sphere_surface,
    horizontality_residual_from_jet, surface_checks, unit_norm_deviation, HorizontalSurface,
    SurfaceCheckSummary,
};

/// Phase rate of the perturbed control; large enough that the
/// horizontality residual (~rate·|E₀⁽⁰⁾|²) clears every tolerance by
/// orders of magnitude.
pub const PERTURBATION_RATE: f64 = 0.05;

/// Report schema version, bumped on breaking changes to the JSON layout.
pub const REPORT_SCHEMA: u32 = 1;

const TOLERANCE_DEFAULTS: &[(&str, f64)] = &[
    ("ode_drift", 1e-10),
    ("unit_norm", 1e-12),
    ("horizontality", 1e-6),
    ("c_symmetry", 1e-5),
    ("lambda_ratio", 1e-4),
    ("conditions", 1e-4),
    ("structure", 1e-4),
    ("t_rate", 1e-5),
    ("v_unit", 1e-8),
    ("v_gauge", 1e-6),
    ("vw", 1e-5),
    ("w_orthogonality", 1e-6),
    ("w_roundtrip", 1e-5),
    ("equality_gap", 1e-4),
    ("h_match", 1e-4),
    ("slack_match", 1e-4),
    ("min_plane_alignment", 1e-4),
    ("surface_horizontality", 1e-6),
    ("surface_minimality", 1e-5),
    ("c_zero", 1e-6),
    ("minimal_invariants", 1e-5),
    ("h_sq_zero", 1e-10),
];

/// Named tolerance for every check a run can perform. Keys are fixed; a
/// typo in an override is a configuration error, never a silently ignored
/// setting.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        Self(
            TOLERANCE_DEFAULTS
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        )
    }
}

impl Tolerances {
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !self.0.contains_key(key) {
            let known: Vec<&str> = TOLERANCE_DEFAULTS.iter().map(|(k, _)| *k).collect();
            return Err(Error::Config(format!(
                "unknown tolerance key '{key}'; known keys: {}",
                known.join(", ")
            )));
        }
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance '{key}' must be a positive finite number, got {value}"
            )));
        }
        self.0.insert(key.to_string(), value);
        Ok(())
    }

    /// Panics on unknown keys: every internal lookup uses a key from
    /// `TOLERANCE_DEFAULTS`, so a miss is a bug, not bad input.
    pub fn get(&self, key: &str) -> f64 {
        *self
            .0
            .get(key)
            .unwrap_or_else(|| panic!("tolerance key '{key}' missing"))
    }
}

/// Which verification scenario to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifyCase {
    Construction,
    RealForm,
    PerturbedControl,
    NonminimalSurface,
}

impl VerifyCase {
    pub fn label(&self) -> &'static str {
        match self {
            VerifyCase::Construction => "construction",
            VerifyCase::RealForm => "real-form",
            VerifyCase::PerturbedControl => "perturbed-control",
            VerifyCase::NonminimalSurface => "nonminimal-surface",
        }
    }
}

/// Which catalog surface seeds the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceKind {
    Clifford,
    GeodesicSphere,
}

impl SurfaceKind {
    pub fn build(&self) -> HorizontalSurface {
        match self {
            SurfaceKind::Clifford => clifford_surface(),
            SurfaceKind::GeodesicSphere => geodesic_sphere_surface(),
        }
    }
}

/// Full description of a verification run. Serialized into every report
/// so results stay reproducible from the report alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub case: VerifyCase,
    pub surface: SurfaceKind,
    pub b1_0: f64,
    pub lam2_0: f64,
    pub t0: f64,
    pub t1: f64,
    pub ode_step: f64,
    pub grid: [usize; 3],
    pub fd_step: f64,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: VerifyCase::Construction,
            surface: SurfaceKind::Clifford,
            b1_0: 0.0,
            lam2_0: 0.5,
            t0: 0.0,
            t1: 0.5,
            ode_step: 1e-3,
            grid: [3, 3, 3],
            fd_step: 1e-3,
            tolerances: Tolerances::default(),
        }
    }
}

impl RunConfig {
    /// Rejects configurations that cannot produce a meaningful run. λ₂ may
    /// be chosen positive without loss of generality (the profile system
    /// is symmetric under λ₂ → -λ₂ together with reflecting t), so the
    /// canonical sign is required rather than silently normalized.
    pub fn validate(&self) -> Result<()> {
        if !(self.lam2_0 > 0.0 && self.lam2_0.is_finite()) {
            return Err(Error::Config(format!(
                "lam2_0 must be positive (canonical sign), got {}",
                self.lam2_0
            )));
        }
        if !self.b1_0.is_finite() {
            return Err(Error::Config(format!(
                "b1_0 must be finite, got {}",
                self.b1_0
            )));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 != self.t0) {
            return Err(Error::Config(format!(
                "time window [{}, {}] must be finite with t1 != t0",
                self.t0, self.t1
            )));
        }
        if !(self.ode_step > 0.0 && self.ode_step.is_finite()) {
            return Err(Error::Config(format!(
                "ode_step must be positive, got {}",
                self.ode_step
            )));
        }
        if self.grid.iter().any(|&n| n < 2) {
            return Err(Error::Config(format!(
                "grid counts must all be at least 2, got {:?}",
                self.grid
            )));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.1) {
            return Err(Error::Config(format!(
                "fd_step must lie in (0, 0.1), got {}",
                self.fd_step
            )));
        }
        Ok(())
    }

    fn jet_config(&self) -> JetConfig {
        JetConfig::with_first_step(self.fd_step)
    }

    fn ode_config(&self) -> OdeConfig {
        OdeConfig {
            step: self.ode_step,
            ..OdeConfig::default()
        }
    }
}

/// Per-point measurements of one sweep sample. The cubic block is absent
/// when the point failed horizontality: the cubic form is not defined
/// there, and faking it would hide the defect the control cases exist to
/// expose.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lam2_profile: Option<f64>,
    pub unit_norm_dev: f64,
    pub horizontality: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cubic: Option<CubicSample>,
}

/// Invariants derived from the cubic form at one sample, plus the
/// construction-only comparisons against the profile closed forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CubicSample {
    pub chen: ChenReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureResiduals>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vw: Option<crate::assembly::VwResiduals>,
    /// | ‖H‖ - 2λ₂(t) | against the dense profile output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_match: Option<f64>,
    /// | (classical rhs - δ) - 3λ₂(t)² |.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slack_match: Option<f64>,
}

/// What broke, when a run could not finish its planned stages.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureNote {
    pub stage: String,
    pub message: String,
    pub exit_code: i32,
}

/// The complete machine-readable result of a verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub version: String,
    pub timestamp_unix: u64,
    pub config: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<SurfaceCheckSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_status: Option<IntegrationStatus>,
    pub samples: Vec<SampleRecord>,
    /// Worst residual seen per check, keyed like `tolerances`.
    pub maxima: BTreeMap<String, f64>,
    /// Per-check verdict: `maxima[k] <= tolerances[k]`.
    pub pass: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<FailureNote>,
}

impl VerificationReport {
    fn skeleton(config: &RunConfig) -> Self {
        Self {
            schema: REPORT_SCHEMA,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config: config.clone(),
            surface: None,
            ode_status: None,
            samples: Vec::new(),
            maxima: BTreeMap::new(),
            pass: BTreeMap::new(),
            failure: None,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failure.is_none() && !self.pass.is_empty() && self.pass.values().all(|&b| b)
    }
}

/// Exit code as a pure function of the report: 0 all green, 1 any check
/// red, and the failure block's own code (2 or 3) when the run broke.
pub fn report_exit_code(report: &VerificationReport) -> i32 {
    if let Some(f) = &report.failure {
        return f.exit_code;
    }
    if report.all_passed() {
        0
    } else {
        1
    }
}

fn bump(maxima: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    let slot = maxima.entry(key.to_string()).or_insert(f64::NEG_INFINITY);
    if value > *slot {
        *slot = value;
    }
}

/// Ratio residual |λ₁/λ₂ - 4|, clamped so a degenerate λ₂ yields a large
/// finite number instead of poisoning the report with non-JSON floats.
fn lambda_ratio_residual(lambda1: f64, lambda2: f64) -> f64 {
    let r = (lambda1 / lambda2 - 4.0).abs();
    if r.is_finite() {
        r.min(1e300)
    } else {
        1e300
    }
}

fn sample_point(
    map: &dyn ParametricMap,
    immersion: Option<&ConstructedImmersion>,
    p: [f64; 3],
    jet_cfg: &JetConfig,
    horizontality_tol: f64,
) -> Result<SampleRecord> {
    let jet = jet_at(map, &p, jet_cfg)?;
    let mut record = SampleRecord {
        t: p[0],
        u: p[1],
        v: p[2],
        lam2_profile: None,
        unit_norm_dev: unit_norm_deviation(&jet),
        horizontality: horizontality_residual_from_jet(&jet),
        cubic: None,
    };
    if let Some(imm) = immersion {
        record.lam2_profile = Some(imm.profile_at(p[0])?.lam2);
    }
    if record.horizontality > horizontality_tol {
        return Ok(record);
    }

    let frame = tangent_frame(&jet)?;
    let c = cubic_form(&jet, &frame, horizontality_tol)?;
    let mut cubic = CubicSample {
        chen: chen_report(&c),
        structure: None,
        vw: None,
        h_match: None,
        slack_match: None,
    };
    if let Some(imm) = immersion {
        let state = imm.profile_at(p[0])?;
        cubic.structure = Some(structure_equation_residuals(&jet, &frame, &state)?);
        cubic.vw = Some(vw_residuals(imm, &jet, &frame)?);
        cubic.h_match = Some((cubic.chen.h_norm_sq.sqrt() - 2.0 * state.lam2.abs()).abs());
        cubic.slack_match =
            Some((cubic.chen.classical_slack - 3.0 * state.lam2 * state.lam2).abs());
    }
    record.cubic = Some(cubic);
    Ok(record)
}

fn sweep(
    map: &dyn ParametricMap,
    immersion: Option<&ConstructedImmersion>,
    grid: &[[f64; 3]],
    jet_cfg: &JetConfig,
    horizontality_tol: f64,
) -> Result<Vec<SampleRecord>> {
    grid.par_iter()
        .map(|p| sample_point(map, immersion, *p, jet_cfg, horizontality_tol))
        .collect()
}

fn aggregate(samples: &[SampleRecord], real_form: bool, maxima: &mut BTreeMap<String, f64>) {
    for s in samples {
        bump(maxima, "unit_norm", s.unit_norm_dev);
        bump(maxima, "horizontality", s.horizontality);
        let Some(cubic) = &s.cubic else { continue };
        let chen = &cubic.chen;
        bump(maxima, "c_symmetry", chen.c_symmetry);
        bump(maxima, "equality_gap", chen.improved_gap.abs());
        if real_form {
            bump(maxima, "c_zero", chen.c_max_abs);
            bump(maxima, "h_sq_zero", chen.h_norm_sq);
            let inv = (chen.tau - 3.0)
                .abs()
                .max((chen.inf_k - 1.0).abs())
                .max((chen.delta - 2.0).abs());
            bump(maxima, "minimal_invariants", inv);
        } else {
            bump(maxima, "conditions", chen.conditions.max());
            if let AdaptationSummary::Adapted {
                lambda1,
                lambda2,
                min_plane_alignment,
                ..
            } = &chen.adaptation
            {
                bump(
                    maxima,
                    "lambda_ratio",
                    lambda_ratio_residual(*lambda1, *lambda2),
                );
                bump(maxima, "min_plane_alignment", 1.0 - min_plane_alignment);
            }
            if let Some(st) = &cubic.structure {
                bump(maxima, "structure", st.max());
            }
            if let Some(vw) = &cubic.vw {
                bump(maxima, "v_unit", vw.v_unit);
                bump(maxima, "v_gauge", vw.v_gauge);
                bump(maxima, "vw", vw.max_derivative_residual());
                bump(maxima, "w_orthogonality", vw.w_orthogonality);
                bump(maxima, "w_roundtrip", vw.w_roundtrip);
                bump(maxima, "t_rate", vw.t_rate);
            }
            if let Some(h) = cubic.h_match {
                bump(maxima, "h_match", h);
            }
            if let Some(sl) = cubic.slack_match {
                bump(maxima, "slack_match", sl);
            }
        }
    }
}

fn run_verify_inner(config: &RunConfig, report: &mut VerificationReport) -> Result<()> {
    config.validate()?;
    let jet_cfg = config.jet_config();
    let horiz_tol = config.tolerances.get("horizontality");

    match config.case {
        VerifyCase::RealForm => {
            let lift = real_form_lift();
            let grid = interior_grid_3d(&lift.domain_box(), config.grid, jet_cfg.relative_margin());
            let samples = sweep(&lift, None, &grid, &jet_cfg, horiz_tol)?;
            aggregate(&samples, true, &mut report.maxima);
            report.samples = samples;
        }
        VerifyCase::NonminimalSurface => {
            let surface = anisotropic_torus_control_surface();
            let checks = surface_checks(&surface, 5, 5, &jet_cfg)?;
            bump(
                &mut report.maxima,
                "surface_horizontality",
                checks.max_horizontality,
            );
            bump(
                &mut report.maxima,
                "surface_minimality",
                checks.max_mean_curvature,
            );
            report.surface = Some(checks);
            // A failed seed never reaches the sweep; the red pass entry is
            // the whole point of this case.
        }
        VerifyCase::Construction | VerifyCase::PerturbedControl => {
            let surface = config.surface.build();
            let checks = surface_checks(&surface, 5, 5, &jet_cfg)?;
            bump(
                &mut report.maxima,
                "surface_horizontality",
                checks.max_horizontality,
            );
            bump(
                &mut report.maxima,
                "surface_minimality",
                checks.max_mean_curvature,
            );
            let seed_ok = checks.max_horizontality
                <= config.tolerances.get("surface_horizontality")
                && checks.max_mean_curvature <= config.tolerances.get("surface_minimality");
            report.surface = Some(checks);
            if !seed_ok {
                return Ok(());
            }

            let trajectory = integrate(
                ProfileState::new(config.b1_0, config.lam2_0),
                config.t0,
                config.t1,
                &config.ode_config(),
            )?;
            bump(&mut report.maxima, "ode_drift", trajectory.max_drift);
            report.ode_status = Some(trajectory.status);

            let immersion = ConstructedImmersion::new_unchecked(surface, trajectory);
            let grid = interior_grid_3d(
                &immersion.domain_box(),
                config.grid,
                jet_cfg.relative_margin(),
            );
            let samples = if config.case == VerifyCase::PerturbedControl {
                let twisted = PhaseTwist {
                    inner: immersion,
                    rate: PERTURBATION_RATE,
                };
                sweep(&twisted, None, &grid, &jet_cfg, horiz_tol)?
            } else {
                sweep(&immersion, Some(&immersion), &grid, &jet_cfg, horiz_tol)?
            };
            aggregate(&samples, false, &mut report.maxima);
            report.samples = samples;
        }
    }

    for (key, value) in &report.maxima {
        report
            .pass
            .insert(key.clone(), *value <= config.tolerances.get(key));
    }
    Ok(())
}

/// Runs a verification case to completion. Infallible by design: anything
/// the pipeline cannot measure lands in the `failure` block with the exit
/// code the error class dictates, so callers always get a report.
pub fn run_verify(config: &RunConfig) -> VerificationReport {
    let mut report = VerificationReport::skeleton(config);
    if let Err(e) = run_verify_inner(config, &mut report) {
        report.failure = Some(FailureNote {
            stage: "verify".to_string(),
            message: e.to_string(),
            exit_code: e.exit_code(),
        });
    }
    report
}

/// Result of a profile-ODE run: the trajectory, its conservation drift,
/// a forward/backward round-trip error, and the CSV dump of the nodes.
#[derive(Debug)]
pub struct OdeRun {
    pub trajectory: Trajectory,
    pub drift: f64,
    /// max(|Δb₁|, |Δλ₂|) after integrating back to t₀; `None` when the
    /// backward leg could not complete (for example after hitting the
    /// singular locus, where the return path is not integrable).
    pub reversal: Option<f64>,
    pub csv: String,
    pub pass: bool,
}

pub fn run_ode(config: &RunConfig) -> Result<OdeRun> {
    config.validate()?;
    let ode = config.ode_config();
    let trajectory = integrate(
        ProfileState::new(config.b1_0, config.lam2_0),
        config.t0,
        config.t1,
        &ode,
    )?;
    let reversal = integrate(
        trajectory.final_state(),
        trajectory.t_reached,
        config.t0,
        &ode,
    )
    .ok()
    .filter(|back| matches!(back.status, IntegrationStatus::Completed))
    .map(|back| {
        let s = back.final_state();
        (s.b1 - config.b1_0)
            .abs()
            .max((s.lam2 - config.lam2_0).abs())
    });
    let mut csv = Vec::new();
    trajectory.write_csv(&mut csv)?;
    let finished = matches!(
        trajectory.status,
        IntegrationStatus::Completed | IntegrationStatus::HitSingularLocus
    );
    let pass = finished && trajectory.max_drift <= config.tolerances.get("ode_drift");
    Ok(OdeRun {
        drift: trajectory.max_drift,
        reversal,
        csv: String::from_utf8(csv).expect("csv output is ascii"),
        pass,
        trajectory,
    })
}

/// The sampled-immersion export: enough to rebuild or plot E₀ without
/// rerunning the pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildDocument {
    pub schema: u32,
    pub version: String,
    pub timestamp_unix: u64,
    pub config: RunConfig,
    pub surface: SurfaceCheckSummary,
    pub ode_status: IntegrationStatus,
    pub t_reached: f64,
    pub max_unit_norm_dev: f64,
    pub max_horizontality: f64,
    pub samples: Vec<ImmersionSample>,
}

/// Builds the immersion for the configured construction and samples E₀
/// over the grid. Only the genuine construction is buildable; the controls
/// exist to fail verification, not to be exported.
pub fn run_build(config: &RunConfig) -> Result<BuildDocument> {
    config.validate()?;
    if config.case != VerifyCase::Construction {
        return Err(Error::Config(format!(
            "build supports only the construction case, got '{}'",
            config.case.label()
        )));
    }
    let jet_cfg = config.jet_config();
    let surface = config.surface.build();
    let surface_summary = surface_checks(&surface, 5, 5, &jet_cfg)?;
    let trajectory = integrate(
        ProfileState::new(config.b1_0, config.lam2_0),
        config.t0,
        config.t1,
        &config.ode_config(),
    )?;
    let ode_status = trajectory.status;
    let t_reached = trajectory.t_reached;
    let immersion = ConstructedImmersion::new(surface, trajectory)?;
    let grid = interior_grid_3d(
        &immersion.domain_box(),
        config.grid,
        jet_cfg.relative_margin(),
    );
    let samples = sample_immersion(&immersion, &grid)?;

    let mut max_unit = 0.0_f64;
    let mut max_horiz = 0.0_f64;
    for p in &grid {
        let jet = jet_at(&immersion, p, &jet_cfg)?;
        max_unit = max_unit.max(unit_norm_deviation(&jet));
        max_horiz = max_horiz.max(horizontality_residual_from_jet(&jet));
    }

    Ok(BuildDocument {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        config: config.clone(),
        surface: surface_summary,
        ode_status,
        t_reached,
        max_unit_norm_dev: max_unit,
        max_horizontality: max_horiz,
        samples,
    })
}

/// One tabulated report in the summary view.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub name: String,
    pub case: String,
    pub samples: usize,
    pub lam2_range: Option<(f64, f64)>,
    pub h_sq_range: Option<(f64, f64)>,
    pub delta_range: Option<(f64, f64)>,
    /// Worst |δ - improved rhs| across samples: how far the run sits from
    /// equality in the improved bound.
    pub gap_max: Option<f64>,
    /// Worst | (classical rhs - δ) - 3λ₂² | across samples, when the run
    /// carries profile values to compare against.
    pub slack_dev_max: Option<f64>,
    pub passed: bool,
}

/// Cross-report summary: rows sorted by report name, rendered as a fixed
/// width text table and as CSV.
#[derive(Debug, Clone)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    pub text: String,
    pub csv: String,
}

fn range_over<I: Iterator<Item = f64>>(values: I) -> Option<(f64, f64)> {
    let mut out: Option<(f64, f64)> = None;
    for v in values {
        out = Some(match out {
            None => (v, v),
            Some((lo, hi)) => (lo.min(v), hi.max(v)),
        });
    }
    out
}

fn fmt_range(r: &Option<(f64, f64)>) -> String {
    match r {
        Some((lo, hi)) => format!("[{lo:.6}, {hi:.6}]"),
        None => "-".to_string(),
    }
}

fn fmt_opt(v: &Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3e}"),
        None => "-".to_string(),
    }
}

/// Parses verification reports given as (name, JSON contents) pairs and
/// tabulates the geometric ranges they certify. Any unparseable input,
/// including an empty file, is a parse error naming the offender.
pub fn run_report(inputs: &[(String, String)]) -> Result<ReportTable> {
    let mut rows = Vec::with_capacity(inputs.len());
    for (name, contents) in inputs {
        let report: VerificationReport =
            serde_json::from_str(contents).map_err(|e| Error::Parse {
                path: name.clone(),
                what: e.to_string(),
            })?;
        let lam2_range = range_over(report.samples.iter().filter_map(|s| s.lam2_profile));
        let h_sq_range = range_over(
            report
                .samples
                .iter()
                .filter_map(|s| s.cubic.as_ref().map(|c| c.chen.h_norm_sq)),
        );
        let delta_range = range_over(
            report
                .samples
                .iter()
                .filter_map(|s| s.cubic.as_ref().map(|c| c.chen.delta)),
        );
        let max_over = |values: &mut dyn Iterator<Item = f64>| {
            values.fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
        };
        let gap_max = max_over(
            &mut report
                .samples
                .iter()
                .filter_map(|s| s.cubic.as_ref().map(|c| c.chen.improved_gap.abs())),
        );
        let slack_dev_max = max_over(
            &mut report
                .samples
                .iter()
                .filter_map(|s| s.cubic.as_ref().and_then(|c| c.slack_match)),
        );
        rows.push(ReportRow {
            name: name.clone(),
            case: report.config.case.label().to_string(),
            samples: report.samples.len(),
            lam2_range,
            h_sq_range,
            delta_range,
            gap_max,
            slack_dev_max,
            passed: report_exit_code(&report) == 0,
        });
    }
    rows.sort_by(|a, b| a.name.cmp(&b.name));

    let mut text = String::new();
    text.push_str(&format!(
        "{:<28} {:<20} {:>7}  {:<22} {:<22} {:<22} {:>14} {:>14}  {:<4}\n",
        "report",
        "case",
        "samples",
        "lam2 range",
        "|H|^2 range",
        "delta range",
        "improved gap",
        "slack dev",
        "pass"
    ));
    let mut csv = String::from(
        "report,case,samples,lam2_min,lam2_max,h_sq_min,h_sq_max,delta_min,delta_max,gap_max,slack_dev_max,pass\n",
    );
    for row in &rows {
        text.push_str(&format!(
            "{:<28} {:<20} {:>7}  {:<22} {:<22} {:<22} {:>14} {:>14}  {:<4}\n",
            row.name,
            row.case,
            row.samples,
            fmt_range(&row.lam2_range),
            fmt_range(&row.h_sq_range),
            fmt_range(&row.delta_range),
            fmt_opt(&row.gap_max),
            fmt_opt(&row.slack_dev_max),
            if row.passed { "ok" } else { "FAIL" }
        ));
        let cell = |o: Option<f64>| o.map_or(String::new(), |v| format!("{v:.16e}"));
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.name,
            row.case,
            row.samples,
            cell(row.lam2_range.map(|r| r.0)),
            cell(row.lam2_range.map(|r| r.1)),
            cell(row.h_sq_range.map(|r| r.0)),
            cell(row.h_sq_range.map(|r| r.1)),
            cell(row.delta_range.map(|r| r.0)),
            cell(row.delta_range.map(|r| r.1)),
            cell(row.gap_max),
            cell(row.slack_dev_max),
            if row.passed { "ok" } else { "FAIL" }
        ));
    }

    Ok(ReportTable { rows, text, csv })
}

/// Pretty JSON with every f64 printed as 17 significant digits in
/// scientific notation, so reports round-trip bit exactly.
struct SciPretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SciPretty<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        self.inner.end_object_value(writer)
    }
}

/// Serializes any report type to JSON with exact float round-tripping.
pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut out = Vec::new();
    let formatter = SciPretty {
        inner: PrettyFormatter::new(),
    };
    let mut ser = serde_json::Serializer::with_formatter(&mut out, formatter);
    value.serialize(&mut ser).map_err(|e| Error::Parse {
        path: "<serialization>".to_string(),
        what: e.to_string(),
    })?;
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_config() -> RunConfig {
        RunConfig {
            t1: 0.2,
            grid: [2, 2, 2],
            ..RunConfig::default()
        }
    }

    #[test]
    fn default_config_validates() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn bad_configs_are_usage_errors() {
        let cases: [fn(&mut RunConfig); 9] = [
            |c| c.lam2_0 = 0.0,
            |c| c.lam2_0 = -0.5,
            |c| c.lam2_0 = f64::NAN,
            |c| c.b1_0 = f64::INFINITY,
            |c| c.t1 = c.t0,
            |c| c.ode_step = 0.0,
            |c| c.grid = [1, 3, 3],
            |c| c.fd_step = 0.0,
            |c| c.fd_step = 0.5,
        ];
        for mutate in cases {
            let mut config = RunConfig::default();
            mutate(&mut config);
            let err = config.validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "wrong class for {config:?}");
        }
    }

    #[test]
    fn tolerance_overrides_are_checked() {
        let mut t = Tolerances::default();
        t.set("ode_drift", 1e-9).unwrap();
        assert_eq!(t.get("ode_drift"), 1e-9);
        assert!(t.set("no_such_key", 1.0).is_err());
        assert!(t.set("ode_drift", 0.0).is_err());
        assert!(t.set("ode_drift", f64::NAN).is_err());
    }

    #[test]
    fn construction_run_passes_and_round_trips() {
        let report = run_verify(&quick_config());
        assert!(report.failure.is_none(), "failure: {:?}", report.failure);
        assert!(
            report.all_passed(),
            "maxima {:?} pass {:?}",
            report.maxima,
            report.pass
        );
        assert_eq!(report_exit_code(&report), 0);
        assert_eq!(report.samples.len(), 8);
        assert!(matches!(
            report.ode_status,
            Some(IntegrationStatus::Completed)
        ));

        let json = to_json(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.samples.len(), report.samples.len());
        // 17 significant digits round-trip bit-exactly.
        assert_eq!(back.maxima, report.maxima);
        let a = report.samples[3].cubic.as_ref().unwrap().chen.tau;
        let b = back.samples[3].cubic.as_ref().unwrap().chen.tau;
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn real_form_run_passes() {
        let config = RunConfig {
            case: VerifyCase::RealForm,
            grid: [2, 2, 2],
            ..RunConfig::default()
        };
        let report = run_verify(&config);
        assert!(report.all_passed(), "maxima {:?}", report.maxima);
        assert!(report.maxima.contains_key("c_zero"));
        assert!(report.maxima.contains_key("h_sq_zero"));
        assert!(report.maxima.contains_key("minimal_invariants"));
        assert!(!report.maxima.contains_key("ode_drift"));
    }

    #[test]
    fn perturbed_control_fails_horizontality() {
        let config = RunConfig {
            case: VerifyCase::PerturbedControl,
            ..quick_config()
        };
        let report = run_verify(&config);
        assert!(report.failure.is_none());
        assert_eq!(report.pass.get("horizontality"), Some(&false));
        assert_eq!(report_exit_code(&report), 1);
        // Horizontality failed, so no sample may carry a cubic block.
        assert!(report.samples.iter().all(|s| s.cubic.is_none()));
        assert!(report.samples.iter().all(|s| s.unit_norm_dev <= 1e-10));
    }

    #[test]
    fn nonminimal_surface_fails_before_sweep() {
        let config = RunConfig {
            case: VerifyCase::NonminimalSurface,
            ..quick_config()
        };
        let report = run_verify(&config);
        assert!(report.failure.is_none());
        assert_eq!(report.pass.get("surface_minimality"), Some(&false));
        assert_eq!(report.pass.get("surface_horizontality"), Some(&true));
        assert!(report.samples.is_empty());
        assert_eq!(report_exit_code(&report), 1);
    }

    #[test]
    fn invalid_config_lands_in_failure_block() {
        let mut config = quick_config();
        config.lam2_0 = -1.0;
        let report = run_verify(&config);
        assert_eq!(report_exit_code(&report), 2);
        let failure = report.failure.expect("must fail");
        assert_eq!(failure.exit_code, 2);
    }

    #[test]
    fn ode_run_conserves_and_reverses() {
        let run = run_ode(&quick_config()).unwrap();
        assert!(run.pass, "drift {:.3e}", run.drift);
        assert!(run.drift <= 1e-10);
        assert!(run.csv.starts_with("t,b1,lam2,first_integral\n"));
        assert_eq!(run.csv.lines().count(), run.trajectory.samples.len() + 1);
        let reversal = run.reversal.expect("backward leg completes");
        assert!(reversal <= 1e-9, "reversal {reversal:.3e}");
    }

    #[test]
    fn ode_run_through_singularity_still_passes() {
        let config = RunConfig {
            t1: 2.0,
            ..RunConfig::default()
        };
        let run = run_ode(&config).unwrap();
        assert!(matches!(
            run.trajectory.status,
            IntegrationStatus::HitSingularLocus
        ));
        assert!(run.trajectory.t_reached < 1.0);
        assert!(run.pass, "drift {:.3e}", run.drift);
    }

    #[test]
    fn build_exports_grid_samples() {
        let doc = run_build(&quick_config()).unwrap();
        assert_eq!(doc.samples.len(), 8);
        assert!(doc.max_unit_norm_dev <= 1e-12);
        assert!(doc.max_horizontality <= 1e-6);
        let json = to_json(&doc).unwrap();
        assert!(json.contains("\"E0\""));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["samples"][0]["E0"].as_array().unwrap().len(), 8);
    }

    #[test]
    fn build_rejects_control_cases() {
        let config = RunConfig {
            case: VerifyCase::PerturbedControl,
            ..quick_config()
        };
        let err = run_build(&config).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn report_table_sorts_and_summarizes() {
        let good = to_json(&run_verify(&quick_config())).unwrap();
        let real = to_json(&run_verify(&RunConfig {
            case: VerifyCase::RealForm,
            grid: [2, 2, 2],
            ..RunConfig::default()
        }))
        .unwrap();
        let table = run_report(&[
            ("z_construction.json".to_string(), good),
            ("a_real_form.json".to_string(), real),
        ])
        .unwrap();
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].name, "a_real_form.json");
        assert_eq!(table.rows[1].name, "z_construction.json");
        assert!(table.rows.iter().all(|r| r.passed));
        let construction = &table.rows[1];
        let (lo, hi) = construction.lam2_range.unwrap();
        assert!(lo > 0.0 && hi <= 0.5 && lo <= hi);
        assert!(construction.gap_max.unwrap() <= 1e-4);
        assert!(construction.slack_dev_max.unwrap() <= 1e-4);
        assert!(table.text.lines().count() == 3);
        assert!(table.csv.starts_with("report,case,"));
    }

    #[test]
    fn report_rejects_unparseable_input() {
        let err = run_report(&[("empty.json".to_string(), String::new())]).unwrap_err();
        match &err {
            Error::Parse { path, .. } => assert_eq!(path, "empty.json"),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn json_floats_use_full_precision() {
        #[derive(Serialize)]
        struct One {
            x: f64,
        }
        let third = 1.0 / 3.0;
        let json = to_json(&One { x: third }).unwrap();
        assert!(json.contains("3.333333333333333"), "json: {json}");
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["x"].as_f64().unwrap().to_bits(), third.to_bits());
    }
}
