//! The profile system governing how the cubic-form data evolves along the
//! distinguished direction.
//!
//! The equality class is controlled by two scalar functions b₁(t), λ₂(t)
//! subject to
//!
//! ```text
//! db₁/dt = -(1 + 3λ₂² + b₁²) / (3λ₂),      dλ₂/dt = (2/3) b₁,
//! ```
//!
//! with the conserved quantity I = λ₂ (1 + λ₂² + b₁²). Conservation of I is
//! an exact identity of the system, which makes it the natural integration
//! diagnostic: any drift in I is pure numerical error.
//!
//! Every nontrivial solution reaches λ₂ = 0 in finite time (I > 0 forces
//! b₁² = I/λ₂ - 1 - λ₂² → ∞ as λ₂ → 0, and λ₂ decreases at rate (2/3)b₁
//! once b₁ has turned negative). The integrator therefore treats the locus
//! λ₂ = 0 as a terminal boundary rather than an error: it shrinks steps as
//! the solution approaches it and reports how far it got.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the profile system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileState {
    pub b1: f64,
    pub lam2: f64,
}

impl ProfileState {
    pub fn new(b1: f64, lam2: f64) -> Self {
        Self { b1, lam2 }
    }
}

/// Right-hand side (db₁/dt, dλ₂/dt). Fails on the singular locus λ₂ = 0.
pub fn rhs(state: &ProfileState) -> Result<(f64, f64)> {
    if state.lam2 == 0.0 || !state.lam2.is_finite() || !state.b1.is_finite() {
        return Err(Error::SingularProfile {
            t: f64::NAN,
            lam2_abs: state.lam2.abs(),
            threshold: 0.0,
        });
    }
    let db1 = -(1.0 + 3.0 * state.lam2 * state.lam2 + state.b1 * state.b1) / (3.0 * state.lam2);
    let dlam2 = 2.0 / 3.0 * state.b1;
    Ok((db1, dlam2))
}

/// The conserved quantity I = λ₂ (1 + λ₂² + b₁²).
pub fn first_integral(state: &ProfileState) -> f64 {
    state.lam2 * (1.0 + state.lam2 * state.lam2 + state.b1 * state.b1)
}

/// The flow expressed through the unit frame direction instead of the
/// t-chart: returns (E₁(b₁), E₁(λ₂), E₁(t)) = (-(1+b₁²+3λ₂²), 2λ₂b₁, 3λ₂).
/// Dividing the first two components by the third recovers `rhs` by the
/// chain rule; keeping both forms makes that derivation testable.
pub fn frame_rates(state: &ProfileState) -> (f64, f64, f64) {
    (
        -(1.0 + state.b1 * state.b1 + 3.0 * state.lam2 * state.lam2),
        2.0 * state.lam2 * state.b1,
        3.0 * state.lam2,
    )
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationStatus {
    /// Reached the requested endpoint.
    Completed,
    /// λ₂ ran into its floor, or every resolvable step was rejected while
    /// λ₂ sat in the floor's proximity band still shrinking; the solution
    /// leaves the chart here.
    HitSingularLocus,
    /// b₁ exceeded the configured ceiling.
    Blowup,
    /// The step size underflowed while trying to hold the conservation
    /// budget, away from the singular locus.
    StepUnderflow,
}

impl std::fmt::Display for IntegrationStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            IntegrationStatus::Completed => "completed",
            IntegrationStatus::HitSingularLocus => "hit_singular_locus",
            IntegrationStatus::Blowup => "blowup",
            IntegrationStatus::StepUnderflow => "step_underflow",
        };
        f.write_str(s)
    }
}

/// Fixed-step RK4 parameters with the safety rails around the singular
/// locus.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OdeConfig {
    /// Base step size (magnitude; sign follows the integration direction).
    pub step: f64,
    /// Terminal floor for |λ₂|.
    pub lam2_floor: f64,
    /// Terminal ceiling for |b₁|.
    pub b1_ceiling: f64,
    /// Smallest step the emergency halving may produce.
    pub min_step: f64,
    /// Allowed drift of the conserved quantity per unit time, relative to
    /// |I₀|. Steps violating the budget are halved and retried.
    pub integral_rate: f64,
    /// Hard cap on accepted steps, so a misconfigured run cannot spin.
    pub max_steps: usize,
}

impl Default for OdeConfig {
    fn default() -> Self {
        Self {
            step: 1e-3,
            lam2_floor: 1e-6,
            b1_ceiling: 1e6,
            min_step: 1e-12,
            integral_rate: 1e-11,
            max_steps: 2_000_000,
        }
    }
}

/// One accepted integration node, with the derivative stored for dense
/// output.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub b1: f64,
    pub lam2: f64,
    pub db1: f64,
    pub dlam2: f64,
}

impl TrajectorySample {
    pub fn state(&self) -> ProfileState {
        ProfileState::new(self.b1, self.lam2)
    }
}

/// The result of an integration run: accepted nodes in time order plus
/// bookkeeping on how the run ended and how well I was conserved.
/// `max_drift` is relative: max over nodes of |I - I₀| / |I₀|.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t0: f64,
    pub t1_requested: f64,
    pub t_reached: f64,
    pub status: IntegrationStatus,
    pub samples: Vec<TrajectorySample>,
    pub initial_integral: f64,
    pub max_drift: f64,
}

impl Trajectory {
    /// Span actually covered, regardless of direction.
    pub fn span(&self) -> f64 {
        (self.t_reached - self.t0).abs()
    }

    pub fn final_state(&self) -> ProfileState {
        self.samples
            .last()
            .expect("trajectory is never empty")
            .state()
    }

    /// Cubic Hermite interpolation between the bracketing nodes. The
    /// interpolant is C¹ and matches the stored derivatives, so profile
    /// values fed to the immersion vary smoothly in t.
    pub fn eval(&self, t: f64) -> Result<ProfileState> {
        let dir = if self.t_reached >= self.t0 { 1.0 } else { -1.0 };
        let (lo, hi) = if dir > 0.0 {
            (self.t0, self.t_reached)
        } else {
            (self.t_reached, self.t0)
        };
        if !(t >= lo && t <= hi) {
            return Err(Error::OutsideTrajectory { t, lo, hi });
        }
        // Nodes are monotone in dir * t; binary-search the bracket.
        let key = dir * t;
        let mut a = 0;
        let mut b = self.samples.len() - 1;
        if b == 0 {
            return Ok(self.samples[0].state());
        }
        while b - a > 1 {
            let mid = (a + b) / 2;
            if dir * self.samples[mid].t <= key {
                a = mid;
            } else {
                b = mid;
            }
        }
        let s0 = &self.samples[a];
        let s1 = &self.samples[b];
        let h = s1.t - s0.t;
        if h == 0.0 {
            return Ok(s0.state());
        }
        let x = (t - s0.t) / h;
        let x2 = x * x;
        let x3 = x2 * x;
        let h00 = 2.0 * x3 - 3.0 * x2 + 1.0;
        let h10 = x3 - 2.0 * x2 + x;
        let h01 = -2.0 * x3 + 3.0 * x2;
        let h11 = x3 - x2;
        Ok(ProfileState {
            b1: h00 * s0.b1 + h10 * h * s0.db1 + h01 * s1.b1 + h11 * h * s1.db1,
            lam2: h00 * s0.lam2 + h10 * h * s0.dlam2 + h01 * s1.lam2 + h11 * h * s1.dlam2,
        })
    }

    /// Writes `t,b1,lam2,first_integral` rows, full double precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,b1,lam2,first_integral")?;
        for s in &self.samples {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                s.t,
                s.b1,
                s.lam2,
                first_integral(&s.state())
            )?;
        }
        Ok(())
    }
}

fn rk4_step(y: ProfileState, h: f64) -> Result<ProfileState> {
    let k1 = rhs(&y)?;
    let k2 = rhs(&ProfileState::new(
        y.b1 + 0.5 * h * k1.0,
        y.lam2 + 0.5 * h * k1.1,
    ))?;
    let k3 = rhs(&ProfileState::new(
        y.b1 + 0.5 * h * k2.0,
        y.lam2 + 0.5 * h * k2.1,
    ))?;
    let k4 = rhs(&ProfileState::new(y.b1 + h * k3.0, y.lam2 + h * k3.1))?;
    Ok(ProfileState::new(
        y.b1 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        y.lam2 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    ))
}

enum StepOutcome {
    Accept(ProfileState),
    RejectSingular,
    RejectBudget,
}

/// Whether the state sits just above the λ₂ floor and is still moving
/// toward it. The conserved quantity forces |b₁| ~ λ₂^(-1/2) there, so the
/// drift budget can reject every resolvable step before λ₂ itself crosses
/// the floor; that stall is the singular locus stopping the run, not a
/// generic step failure, and is classified accordingly.
fn approaching_locus(y: &ProfileState, config: &OdeConfig) -> bool {
    y.lam2.abs() < 100.0 * config.lam2_floor && y.lam2 * y.b1 < 0.0
}

fn attempt_step(
    y: ProfileState,
    h: f64,
    config: &OdeConfig,
    budget_floor: f64,
    scale: f64,
) -> StepOutcome {
    let c = match rk4_step(y, h) {
        Ok(c) => c,
        Err(_) => return StepOutcome::RejectSingular,
    };
    if !c.b1.is_finite() || !c.lam2.is_finite() || c.lam2.abs() < config.lam2_floor {
        return StepOutcome::RejectSingular;
    }
    let drift = (first_integral(&c) - first_integral(&y)).abs();
    if drift > (config.integral_rate * scale * h.abs()).max(budget_floor) {
        return StepOutcome::RejectBudget;
    }
    StepOutcome::Accept(c)
}

/// Integrates the profile system from `initial` at `t0` toward `t1`
/// (either direction). Fixed-step RK4 with emergency halving: a step is
/// accepted only if the conserved quantity moves within budget and the
/// state stays inside the chart. Errors only on unusable input; running
/// into the singular locus is reported through the status instead.
pub fn integrate(
    initial: ProfileState,
    t0: f64,
    t1: f64,
    config: &OdeConfig,
) -> Result<Trajectory> {
    if !(config.step > 0.0 && config.min_step > 0.0 && config.min_step <= config.step) {
        return Err(Error::Config(format!(
            "ode step sizes invalid: step {}, min_step {}",
            config.step, config.min_step
        )));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::Config(format!(
            "time window [{t0}, {t1}] not finite"
        )));
    }
    if initial.lam2.abs() < config.lam2_floor {
        return Err(Error::SingularProfile {
            t: t0,
            lam2_abs: initial.lam2.abs(),
            threshold: config.lam2_floor,
        });
    }
    if !initial.b1.is_finite() || !initial.lam2.is_finite() {
        return Err(Error::Config("initial profile state not finite".into()));
    }

    let i0 = first_integral(&initial);
    let scale = i0.abs();
    let budget_floor = 64.0 * f64::EPSILON * scale.max(1.0);
    let (db1, dlam2) = rhs(&initial)?;

    let mut samples = vec![TrajectorySample {
        t: t0,
        b1: initial.b1,
        lam2: initial.lam2,
        db1,
        dlam2,
    }];
    let traj = |t_reached: f64, status, samples: Vec<TrajectorySample>, max_drift| Trajectory {
        t0,
        t1_requested: t1,
        t_reached,
        status,
        samples,
        initial_integral: i0,
        max_drift,
    };

    if t1 == t0 {
        return Ok(traj(t0, IntegrationStatus::Completed, samples, 0.0));
    }

    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = initial;
    let mut max_drift = 0.0_f64;

    for _ in 0..config.max_steps {
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            return Ok(traj(t, IntegrationStatus::Completed, samples, max_drift));
        }
        let mut h = dir * config.step.min(remaining);

        loop {
            match attempt_step(y, h, config, budget_floor, scale) {
                StepOutcome::Accept(c) => {
                    y = c;
                    t += h;
                    let (db1, dlam2) = rhs(&y)?;
                    samples.push(TrajectorySample {
                        t,
                        b1: y.b1,
                        lam2: y.lam2,
                        db1,
                        dlam2,
                    });
                    max_drift = max_drift.max((first_integral(&y) - i0).abs() / scale);
                    if y.b1.abs() > config.b1_ceiling {
                        return Ok(traj(t, IntegrationStatus::Blowup, samples, max_drift));
                    }
                    break;
                }
                outcome => {
                    h *= 0.5;
                    if h.abs() < config.min_step {
                        let status = match outcome {
                            StepOutcome::RejectBudget if !approaching_locus(&y, config) => {
                                IntegrationStatus::StepUnderflow
                            }
                            _ => IntegrationStatus::HitSingularLocus,
                        };
                        return Ok(traj(t, status, samples, max_drift));
                    }
                }
            }
        }
    }
    Ok(traj(
        t,
        IntegrationStatus::StepUnderflow,
        samples,
        max_drift,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rhs_matches_hand_values() {
        let (db1, dlam2) = rhs(&ProfileState::new(0.0, 1.0)).unwrap();
        assert!((db1 - (-4.0 / 3.0)).abs() <= 1e-15);
        assert_eq!(dlam2, 0.0);

        let (db1, dlam2) = rhs(&ProfileState::new(3.0, 1.0)).unwrap();
        assert!((db1 - (-13.0 / 3.0)).abs() <= 1e-15);
        assert!((dlam2 - 2.0).abs() <= 1e-15);
    }

    #[test]
    fn rhs_rejects_singular_locus() {
        assert!(matches!(
            rhs(&ProfileState::new(1.0, 0.0)),
            Err(Error::SingularProfile { .. })
        ));
    }

    #[test]
    fn first_integral_hand_values() {
        assert_eq!(first_integral(&ProfileState::new(0.0, 1.0)), 2.0);
        assert_eq!(first_integral(&ProfileState::new(1.0, 0.5)), 1.125);
    }

    #[test]
    fn integral_conserved_along_flow() {
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 0.5, &OdeConfig::default()).unwrap();
        assert_eq!(traj.status, IntegrationStatus::Completed);
        assert!((traj.t_reached - 0.5).abs() <= 1e-12);
        assert!(traj.max_drift <= 1e-12, "drift {:.3e}", traj.max_drift);
        for s in &traj.samples {
            let d = (first_integral(&s.state()) - traj.initial_integral).abs();
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let endpoint = |step: f64| {
            let cfg = OdeConfig {
                step,
                integral_rate: 1.0, // disable budget halving; measure raw RK4
                ..OdeConfig::default()
            };
            integrate(ProfileState::new(0.0, 0.5), 0.0, 0.5, &cfg)
                .unwrap()
                .final_state()
        };
        let reference = endpoint(1e-4);
        let err = |s: ProfileState| {
            (s.b1 - reference.b1)
                .abs()
                .max((s.lam2 - reference.lam2).abs())
        };
        let coarse = err(endpoint(0.02));
        let fine = err(endpoint(0.01));
        assert!(fine > 0.0);
        let ratio = coarse / fine;
        assert!(ratio >= 12.0, "halving gained only {ratio:.1}x (want ~16x)");
    }

    #[test]
    fn finite_time_singularity_is_terminal_not_fatal() {
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 2.0, &OdeConfig::default()).unwrap();
        assert_eq!(traj.status, IntegrationStatus::HitSingularLocus);
        // The solution from (0, 0.5) leaves the chart near t ≈ 0.936.
        assert!(
            traj.t_reached > 0.92 && traj.t_reached < 0.95,
            "t_reached = {}",
            traj.t_reached
        );
        assert!(traj.final_state().lam2.abs() < 1e-5);
        assert!(traj.max_drift <= 1e-10, "drift {:.3e}", traj.max_drift);
    }

    #[test]
    fn budget_stall_at_the_locus_is_classified_as_singular() {
        // Large conserved integral: |b₁| ~ sqrt(I₀/λ₂) ≈ 3500 near the
        // floor, where the drift budget rejects every resolvable step
        // while λ₂ is still above the floor. The stop must read as the
        // singular locus, not as a step underflow.
        let traj = integrate(
            ProfileState::new(-2.0, 2.0),
            0.0,
            2.0,
            &OdeConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.status, IntegrationStatus::HitSingularLocus);
        let end = traj.final_state();
        assert!(end.lam2 < 1e-4, "stopped at lam2 = {:.3e}", end.lam2);
        assert!(end.b1 < 0.0);
        assert!(traj.max_drift <= 1e-10, "drift {:.3e}", traj.max_drift);
    }

    #[test]
    fn coarse_step_still_holds_conservation_budget() {
        let cfg = OdeConfig {
            step: 0.05,
            ..OdeConfig::default()
        };
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 2.0, &cfg).unwrap();
        assert_eq!(traj.status, IntegrationStatus::HitSingularLocus);
        assert!(traj.max_drift <= 1e-10, "drift {:.3e}", traj.max_drift);
    }

    #[test]
    fn backward_integration_recovers_initial_state() {
        let fwd = integrate(ProfileState::new(0.0, 0.5), 0.0, 0.3, &OdeConfig::default()).unwrap();
        assert_eq!(fwd.status, IntegrationStatus::Completed);
        let back = integrate(fwd.final_state(), 0.3, 0.0, &OdeConfig::default()).unwrap();
        assert_eq!(back.status, IntegrationStatus::Completed);
        let end = back.final_state();
        assert!((end.b1 - 0.0).abs() <= 1e-10, "b1 = {}", end.b1);
        assert!((end.lam2 - 0.5).abs() <= 1e-10, "lam2 = {}", end.lam2);
    }

    #[test]
    fn dense_eval_matches_nodes_and_midpoints() {
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 0.4, &OdeConfig::default()).unwrap();
        let s = &traj.samples[17];
        let at_node = traj.eval(s.t).unwrap();
        assert!((at_node.b1 - s.b1).abs() <= 1e-14);
        assert!((at_node.lam2 - s.lam2).abs() <= 1e-14);

        // Between nodes, compare against a much finer integration.
        let fine_cfg = OdeConfig {
            step: 1e-5,
            ..OdeConfig::default()
        };
        for &t in &[0.05 + 0.5e-3, 0.2 + 0.3e-3, 0.35 + 0.7e-3] {
            let fine = integrate(ProfileState::new(0.0, 0.5), 0.0, t, &fine_cfg)
                .unwrap()
                .final_state();
            let interp = traj.eval(t).unwrap();
            assert!((interp.b1 - fine.b1).abs() <= 1e-10);
            assert!((interp.lam2 - fine.lam2).abs() <= 1e-10);
        }
    }

    #[test]
    fn eval_outside_covered_span_errors() {
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 0.2, &OdeConfig::default()).unwrap();
        assert!(matches!(
            traj.eval(0.25),
            Err(Error::OutsideTrajectory { .. })
        ));
        assert!(matches!(
            traj.eval(-0.01),
            Err(Error::OutsideTrajectory { .. })
        ));
    }

    #[test]
    fn zero_span_yields_single_node() {
        let traj = integrate(ProfileState::new(0.3, 0.7), 1.0, 1.0, &OdeConfig::default()).unwrap();
        assert_eq!(traj.status, IntegrationStatus::Completed);
        assert_eq!(traj.samples.len(), 1);
        let s = traj.eval(1.0).unwrap();
        assert_eq!(s.b1, 0.3);
    }

    #[test]
    fn singular_initial_state_is_an_error() {
        let err = integrate(
            ProfileState::new(0.0, 1e-9),
            0.0,
            1.0,
            &OdeConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularProfile { .. }));
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let traj = integrate(
            ProfileState::new(0.0, 0.5),
            0.0,
            0.01,
            &OdeConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,b1,lam2,first_integral");
        assert_eq!(lines.len(), traj.samples.len() + 1);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[0].parse::<f64>().unwrap(), 0.0);
        let i: f64 = fields[3].parse().unwrap();
        assert!((i - 0.625).abs() <= 1e-15);
    }

    #[test]
    fn chain_rule_matches_frame_rates() {
        // The t-chart system is E₁(·)/E₁(t); both forms must agree to
        // machine precision on random admissible states.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let b1 = rng.gen_range(-2.0..2.0);
            let lam2 = rng.gen_range(0.1..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let s = ProfileState::new(b1, lam2);
            let (eb1, elam2, et) = frame_rates(&s);
            let (db1, dlam2) = rhs(&s).unwrap();
            assert!((db1 - eb1 / et).abs() <= 1e-13 * db1.abs().max(1.0));
            assert!((dlam2 - elam2 / et).abs() <= 1e-13 * dlam2.abs().max(1.0));
        }
    }

    #[test]
    fn lam2_keeps_its_sign_and_b1_decreases() {
        let traj = integrate(ProfileState::new(0.3, 0.8), 0.0, 5.0, &OdeConfig::default()).unwrap();
        for s in &traj.samples {
            assert!(s.lam2 > 0.0, "λ₂ changed sign at t = {}", s.t);
            // RHS numerator 1 + 3λ₂² + b₁² > 0, so b₁ falls while λ₂ > 0.
            assert!(s.db1 < 0.0, "db₁/dt = {} at t = {}", s.db1, s.t);
        }
    }

    #[test]
    fn interpolated_states_conserve_integral() {
        let traj = integrate(ProfileState::new(0.0, 0.5), 0.0, 0.5, &OdeConfig::default()).unwrap();
        let i0 = traj.initial_integral;
        for k in 0..100 {
            // Strides chosen to land between the 10⁻³-spaced knots.
            let t = 0.00037 + k as f64 * 0.0049;
            let s = traj.eval(t).unwrap();
            let drift = (first_integral(&s) - i0).abs() / i0.abs();
            assert!(drift <= 1e-8, "interpolation drift {drift:.3e} at t = {t}");
        }
    }

    #[test]
    fn status_serializes_snake_case() {
        let s = serde_json::to_string(&IntegrationStatus::HitSingularLocus).unwrap();
        assert_eq!(s, "\"hit_singular_locus\"");
        assert_eq!(IntegrationStatus::Completed.to_string(), "completed");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(100))]

            // Away from the singular locus, short runs complete and hold
            // the conserved quantity to near machine precision.
            #[test]
            fn short_runs_conserve_first_integral(
                b1 in -1.0_f64..1.0,
                lam2 in 0.5_f64..2.0,
            ) {
                let traj = integrate(
                    ProfileState::new(b1, lam2),
                    0.0,
                    0.05,
                    &OdeConfig::default(),
                )
                .unwrap();
                prop_assert_eq!(traj.status, IntegrationStatus::Completed);
                prop_assert!(traj.max_drift <= 1e-11);
            }

            // Time symmetry: integrating forward then backward returns to
            // the start.
            #[test]
            fn round_trip_is_identity(
                b1 in -0.5_f64..0.5,
                lam2 in 0.6_f64..1.5,
            ) {
                let fwd = integrate(
                    ProfileState::new(b1, lam2),
                    0.0,
                    0.1,
                    &OdeConfig::default(),
                )
                .unwrap();
                prop_assert_eq!(fwd.status, IntegrationStatus::Completed);
                let back = integrate(fwd.final_state(), 0.1, 0.0, &OdeConfig::default()).unwrap();
                let end = back.final_state();
                prop_assert!((end.b1 - b1).abs() <= 1e-9);
                prop_assert!((end.lam2 - lam2).abs() <= 1e-9);
            }
        }
    }
}
