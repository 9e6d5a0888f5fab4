//! Assembles the Lagrangian immersion from a seed surface and a profile
//! trajectory, and inverts the construction for verification.
//!
//! With W: D → S⁵ horizontal minimal and (b₁, λ₂)(t) a profile solution,
//! the lift into S⁷ ⊂ C⁴ = C ⊕ C³ is
//!
//! ```text
//! E₀(t,u,v) = e^{it/3} (0, W(u,v)) / N  +  (-b₁ + iλ₂) (e^{it}, 0,0,0) / N,
//! N = √(1 + b₁² + λ₂²).
//! ```
//!
//! The same data can be read back out of E₀: the circle factor
//! V = (-(b₁+iλ₂)E₀ + E₁)/N collapses to e^{it}(1,0,0,0) in this gauge,
//! and W = e^{-it/3}(E₀ - (-b₁+iλ₂)E₁)/N recovers the seed surface. The
//! residual functions here quantify how well a numerically sampled E₀
//! honors those identities.

use num_complex::Complex64;

use crate::ambient::{real_inner, AmbientVector, PIVOT_DEGENERACY_RELATIVE};
use crate::error::{Error, Result};
use crate::jets::{JetConfig, JetPoint, ParametricMap};
use crate::profile::{rhs, ProfileState, Trajectory};
use crate::surfaces::{surface_checks, HorizontalSurface};

/// Residual ceilings a seed surface must clear before it is accepted into
/// the construction. One notch tighter than the report tolerances so a
/// seed that builds also verifies.
const SEED_UNIT_TOL: f64 = 1e-9;
const SEED_HORIZONTALITY_TOL: f64 = 1e-6;
const SEED_MINIMALITY_TOL: f64 = 1e-5;
const SEED_SPAN_TOL: f64 = 1e-6;

/// The immersion E₀ built from a seed surface and a profile trajectory.
/// Coordinates are (t, u, v); the t-range is whatever the trajectory
/// actually covered.
#[derive(Debug, Clone)]
pub struct ConstructedImmersion {
    pub surface: HorizontalSurface,
    pub trajectory: Trajectory,
}

impl ConstructedImmersion {
    /// Builds the immersion after checking the seed surface on a 5×5 grid:
    /// unit norm, horizontality, minimality, and a nondegenerate totally
    /// real span. A seed failing horizontality cannot produce a Lagrangian
    /// submanifold; a seed failing minimality is a usage error.
    pub fn new(surface: HorizontalSurface, trajectory: Trajectory) -> Result<Self> {
        let checks = surface_checks(&surface, 5, 5, &JetConfig::default())?;
        if checks.max_unit_norm_dev > SEED_UNIT_TOL {
            return Err(Error::Config(format!(
                "seed surface '{}' leaves S⁵: | |W|²-1 | = {:.3e}",
                surface.name, checks.max_unit_norm_dev
            )));
        }
        if checks.max_horizontality > SEED_HORIZONTALITY_TOL {
            return Err(Error::NotLagrangian {
                residual: checks.max_horizontality,
                tolerance: SEED_HORIZONTALITY_TOL,
            });
        }
        if checks.max_mean_curvature > SEED_MINIMALITY_TOL {
            return Err(Error::Config(format!(
                "seed surface '{}' is not minimal: |trace II| = {:.3e} exceeds {:.0e}",
                surface.name, checks.max_mean_curvature, SEED_MINIMALITY_TOL
            )));
        }
        if checks.min_span_gram_det <= SEED_SPAN_TOL {
            return Err(Error::Config(format!(
                "seed surface '{}' is not totally real: span Gram det {:.3e}",
                surface.name, checks.min_span_gram_det
            )));
        }
        Ok(Self {
            surface,
            trajectory,
        })
    }

    /// Skips the seed checks. Used by the negative-control pipelines,
    /// which exist to demonstrate that downstream verification catches
    /// exactly these defects.
    pub fn new_unchecked(surface: HorizontalSurface, trajectory: Trajectory) -> Self {
        Self {
            surface,
            trajectory,
        }
    }

    /// Profile values (b₁, λ₂) at parameter t via dense trajectory output.
    pub fn profile_at(&self, t: f64) -> Result<ProfileState> {
        self.trajectory.eval(t)
    }

    fn t_range(&self) -> (f64, f64) {
        let (a, b) = (self.trajectory.t0, self.trajectory.t_reached);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }
}

impl ParametricMap for ConstructedImmersion {
    fn domain_dim(&self) -> usize {
        3
    }

    fn codomain_dim(&self) -> usize {
        4
    }

    fn domain_box(&self) -> Vec<(f64, f64)> {
        let (lo, hi) = self.t_range();
        vec![(lo, hi), self.surface.domain[0], self.surface.domain[1]]
    }

    fn eval(&self, x: &[f64]) -> Result<AmbientVector> {
        let (t, u, v) = (x[0], x[1], x[2]);
        let state = self.trajectory.eval(t)?;
        let w = self.surface.eval(&[u, v])?;
        let n = (1.0 + state.b1 * state.b1 + state.lam2 * state.lam2).sqrt();
        let zeta = Complex64::new(-state.b1, state.lam2);
        let head = zeta * Complex64::from_polar(1.0, t) / n;
        let body = w.scale_c(Complex64::from_polar(1.0 / n, t / 3.0));
        Ok(AmbientVector::prepend(head, &body))
    }
}

/// Horizontal lift of the totally geodesic real form: the real unit
/// sphere S³ ⊂ R⁴ ⊂ C⁴ in polar coordinates, restricted to a chart where
/// the coordinate frame stays nondegenerate. Serves as the reference case
/// with vanishing cubic form and constant curvature 1.
#[derive(Debug, Clone, Copy)]
pub struct RealFormLift;

pub fn real_form_lift() -> RealFormLift {
    RealFormLift
}

impl ParametricMap for RealFormLift {
    fn domain_dim(&self) -> usize {
        3
    }

    fn codomain_dim(&self) -> usize {
        4
    }

    fn domain_box(&self) -> Vec<(f64, f64)> {
        vec![(0.35, 1.2), (0.35, 1.2), (0.0, std::f64::consts::TAU)]
    }

    fn eval(&self, x: &[f64]) -> Result<AmbientVector> {
        let (t, u, v) = (x[0], x[1], x[2]);
        Ok(AmbientVector::new(vec![
            Complex64::new(t.cos(), 0.0),
            Complex64::new(t.sin() * u.cos(), 0.0),
            Complex64::new(t.sin() * u.sin() * v.cos(), 0.0),
            Complex64::new(t.sin() * u.sin() * v.sin(), 0.0),
        ]))
    }
}

/// Negative control: multiplies the first complex slot by e^{i·rate·t}.
/// A constant unitary phase would change nothing, so the twist is made
/// t-dependent; it destroys horizontality at order rate·|E₀⁽⁰⁾|² while
/// keeping |E₀| = 1.
#[derive(Debug, Clone)]
pub struct PhaseTwist<M> {
    pub inner: M,
    pub rate: f64,
}

impl<M: ParametricMap> ParametricMap for PhaseTwist<M> {
    fn domain_dim(&self) -> usize {
        self.inner.domain_dim()
    }

    fn codomain_dim(&self) -> usize {
        self.inner.codomain_dim()
    }

    fn domain_box(&self) -> Vec<(f64, f64)> {
        self.inner.domain_box()
    }

    fn eval(&self, x: &[f64]) -> Result<AmbientVector> {
        let e = self.inner.eval(x)?;
        let mut comps = e.comps().to_vec();
        comps[0] *= Complex64::from_polar(1.0, self.rate * x[0]);
        Ok(AmbientVector::new(comps))
    }
}

/// Orthonormal tangent frame at a jet point, as coefficient rows over the
/// coordinate directions: E_i = Σ_a coeffs[i][a] ∂_a E₀. Row 0 is the
/// normalized t-direction (a positive multiple of ∂_t E₀).
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub coeffs: [[f64; 3]; 3],
    pub vectors: Vec<AmbientVector>,
    pub metric: [[f64; 3]; 3],
}

/// Gram–Schmidt on the coordinate directions with respect to the pulled
/// back metric g_ab = Re⟨∂_a E₀, ∂_b E₀⟩. Keeping the coefficients (not
/// just the ambient vectors) is what lets second derivatives be pushed
/// into the frame later.
pub fn tangent_frame(jet: &JetPoint) -> Result<TangentFrame> {
    if jet.first.len() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: jet.first.len(),
        });
    }
    let mut g = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            g[a][b] = real_inner(&jet.first[a], &jet.first[b])?;
        }
    }
    let quad = |x: &[f64; 3], y: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += x[a] * g[a][b] * y[b];
            }
        }
        s
    };

    let mut coeffs = [[0.0; 3]; 3];
    let mut rows: Vec<[f64; 3]> = Vec::with_capacity(3);
    for i in 0..3 {
        let mut c = [0.0; 3];
        c[i] = 1.0;
        let scale = g[i][i].max(0.0).sqrt();
        for _pass in 0..2 {
            for r in &rows {
                let p = quad(&c, r);
                for a in 0..3 {
                    c[a] -= p * r[a];
                }
            }
        }
        let norm = quad(&c, &c).max(0.0).sqrt();
        if norm <= PIVOT_DEGENERACY_RELATIVE * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::ImmersionRank {
                t: jet.point[0],
                u: jet.point[1],
                v: jet.point[2],
                what: format!("coordinate direction {i} degenerate in the pulled-back metric"),
            });
        }
        for a in 0..3 {
            c[a] /= norm;
        }
        rows.push(c);
        coeffs[i] = c;
    }

    let mut vectors = Vec::with_capacity(3);
    for row in &coeffs {
        let mut v = AmbientVector::zero(jet.value.dim());
        for a in 0..3 {
            v = v.add(&jet.first[a].scale(row[a]));
        }
        vectors.push(v);
    }
    Ok(TangentFrame {
        coeffs,
        vectors,
        metric: g,
    })
}

/// First derivatives of the unit tangent field E₁ = ∂_t E₀ / |∂_t E₀|,
/// one per coordinate direction, assembled by the product rule from the
/// second jet. `speed` is |∂_t E₀| and `rate` its reciprocal, which for
/// constructed immersions equals 3λ₂ (the arclength rate of t along E₁).
#[derive(Debug, Clone)]
pub struct UnitTangentJet {
    pub e1: AmbientVector,
    pub speed: f64,
    pub rate: f64,
    pub d_e1: Vec<AmbientVector>,
}

pub fn unit_tangent_jet(jet: &JetPoint) -> Result<UnitTangentJet> {
    let ft = &jet.first[0];
    let speed = ft.norm();
    if speed < 1e-10 {
        return Err(Error::Frame(format!(
            "t-direction speed {speed:.3e} too small to normalize at {:?}",
            jet.point
        )));
    }
    let f = 1.0 / speed;
    let e1 = ft.scale(f);
    let mut d_e1 = Vec::with_capacity(jet.first.len());
    for a in 0..jet.first.len() {
        let fat = &jet.second[a][0];
        let df = -real_inner(fat, ft)? * f * f * f;
        d_e1.push(ft.scale(df).add(&fat.scale(f)));
    }
    Ok(UnitTangentJet {
        e1,
        speed,
        rate: f,
        d_e1,
    })
}

/// V = (-(b₁+iλ₂) E₀ + E₁) / N. Unit by construction; in the fixed gauge
/// it is e^{it}(1,0,0,0) for constructed immersions.
pub fn compute_v(jet: &JetPoint, state: &ProfileState) -> Result<AmbientVector> {
    let ut = unit_tangent_jet(jet)?;
    let n = (1.0 + state.b1 * state.b1 + state.lam2 * state.lam2).sqrt();
    let mu = Complex64::new(state.b1, state.lam2);
    Ok(jet.value.scale_c(-mu).add(&ut.e1).scale(1.0 / n))
}

/// W = e^{-it/3} (E₀ - (-b₁+iλ₂) E₁) / N. For constructed immersions this
/// reproduces (0, W(u,v)) exactly, independent of t.
pub fn compute_w_from_immersion(jet: &JetPoint, state: &ProfileState) -> Result<AmbientVector> {
    let ut = unit_tangent_jet(jet)?;
    let t = jet.point[0];
    let n = (1.0 + state.b1 * state.b1 + state.lam2 * state.lam2).sqrt();
    let zeta = Complex64::new(-state.b1, state.lam2);
    let phase = Complex64::from_polar(1.0 / n, -t / 3.0);
    Ok(jet.value.sub(&ut.e1.scale_c(zeta)).scale_c(phase))
}

/// Residuals of the circle/surface splitting at one sample point. All are
/// norms; zero in exact arithmetic for a genuine constructed immersion.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct VwResiduals {
    /// | |V| - 1 |.
    pub v_unit: f64,
    /// Norm of V outside the first complex slot (the SU(4) gauge).
    pub v_gauge: f64,
    /// |D_{E₁}V - 3λ₂ iV|.
    pub dv_e1: f64,
    /// max_j |D_{E_j}V|, j = 2,3.
    pub dv_e23: f64,
    /// |D_{E₁}W|.
    pub dw_e1: f64,
    /// max_j |D_{E_j}W - N e^{-it/3} E_j|, j = 2,3.
    pub dw_e23: f64,
    /// max(|⟨W,V⟩_R|, |⟨W,iV⟩_R|).
    pub w_orthogonality: f64,
    /// |W_rec - (0, W_seed(u,v))|.
    pub w_roundtrip: f64,
    /// |1/|∂_t E₀| - 3λ₂|: the t-rate identity E₁(t) = 3λ₂.
    pub t_rate: f64,
}

impl VwResiduals {
    /// The derivative-identity residuals as one number (unit-norm, gauge,
    /// orthogonality, and round-trip are reported separately).
    pub fn max_derivative_residual(&self) -> f64 {
        self.dv_e1.max(self.dv_e23).max(self.dw_e1).max(self.dw_e23)
    }
}

/// Differentiates V and W through the jet: the t-dependence of (b₁, λ₂)
/// enters via the profile right-hand side, everything else via the stored
/// second partials.
pub fn vw_residuals(
    immersion: &ConstructedImmersion,
    jet: &JetPoint,
    frame: &TangentFrame,
) -> Result<VwResiduals> {
    let t = jet.point[0];
    let state = immersion.profile_at(t)?;
    let (db1, dlam2) = rhs(&state)?;
    let ut = unit_tangent_jet(jet)?;

    let n = (1.0 + state.b1 * state.b1 + state.lam2 * state.lam2).sqrt();
    let dn = (state.b1 * db1 + state.lam2 * dlam2) / n;
    let mu = Complex64::new(state.b1, state.lam2);
    let dmu = Complex64::new(db1, dlam2);
    let zeta = Complex64::new(-state.b1, state.lam2);
    let dzeta = Complex64::new(-db1, dlam2);
    let i = Complex64::new(0.0, 1.0);

    let e0 = &jet.value;
    let v = e0.scale_c(-mu).add(&ut.e1).scale(1.0 / n);
    let phase = Complex64::from_polar(1.0, -t / 3.0);
    let w_core = e0.sub(&ut.e1.scale_c(zeta));
    let w = w_core.scale_c(phase / n);

    // Coordinate derivatives of V: only the t-direction sees (b₁, λ₂, N)
    // move.
    let mut dv = Vec::with_capacity(3);
    let mut dw = Vec::with_capacity(3);
    for a in 0..3 {
        let fa = &jet.first[a];
        let core_v = fa.scale_c(-mu).add(&ut.d_e1[a]);
        let core_w = fa.sub(&ut.d_e1[a].scale_c(zeta));
        if a == 0 {
            let dv_t = core_v
                .add(&e0.scale_c(-dmu))
                .scale(1.0 / n)
                .sub(&e0.scale_c(-mu).add(&ut.e1).scale(dn / (n * n)));
            dv.push(dv_t);
            let dw_t = w_core
                .scale_c(-i / 3.0)
                .add(&core_w)
                .add(&ut.e1.scale_c(-dzeta))
                .scale_c(phase / n)
                .sub(&w_core.scale_c(phase * dn / (n * n)));
            dw.push(dw_t);
        } else {
            dv.push(core_v.scale(1.0 / n));
            dw.push(core_w.scale_c(phase / n));
        }
    }

    let directional = |derivs: &[AmbientVector], row: &[f64; 3]| {
        let mut out = AmbientVector::zero(jet.value.dim());
        for a in 0..3 {
            out = out.add(&derivs[a].scale(row[a]));
        }
        out
    };

    let dv_e1 = directional(&dv, &frame.coeffs[0])
        .sub(&v.j().scale(3.0 * state.lam2))
        .norm();
    let dv_e23 = directional(&dv, &frame.coeffs[1])
        .norm()
        .max(directional(&dv, &frame.coeffs[2]).norm());
    let dw_e1 = directional(&dw, &frame.coeffs[0]).norm();
    let mut dw_e23 = 0.0_f64;
    for j in 1..3 {
        let expected = frame.vectors[j].scale_c(phase * n);
        dw_e23 = dw_e23.max(directional(&dw, &frame.coeffs[j]).sub(&expected).norm());
    }

    let seed = self_seed_value(immersion, jet.point[1], jet.point[2])?;
    let w_roundtrip = w.sub(&seed).norm();

    Ok(VwResiduals {
        v_unit: (v.norm() - 1.0).abs(),
        v_gauge: v.tail().norm(),
        dv_e1,
        dv_e23,
        dw_e1,
        dw_e23,
        w_orthogonality: real_inner(&w, &v)?.abs().max(real_inner(&w, &v.j())?.abs()),
        w_roundtrip,
        t_rate: (ut.rate - 3.0 * state.lam2).abs(),
    })
}

fn self_seed_value(immersion: &ConstructedImmersion, u: f64, v: f64) -> Result<AmbientVector> {
    let w = immersion.surface.eval(&[u, v])?;
    Ok(AmbientVector::prepend(Complex64::new(0.0, 0.0), &w))
}

/// One record of the sampled-immersion export: coordinates plus E₀ as
/// eight interleaved reals (re, im per slot).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ImmersionSample {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    #[serde(rename = "E0")]
    pub e0: Vec<f64>,
}

/// Evenly spaced points strictly inside a 3-box. The inset is half again
/// the requested margin so stencil boundary checks clear with rounding
/// to spare.
pub fn interior_grid_3d(
    domain: &[(f64, f64)],
    counts: [usize; 3],
    relative_margin: f64,
) -> Vec<[f64; 3]> {
    let axis = |&(lo, hi): &(f64, f64), n: usize| -> Vec<f64> {
        let m = 1.5 * relative_margin * (hi - lo);
        let (a, b) = (lo + m, hi - m);
        if n == 1 {
            return vec![0.5 * (a + b)];
        }
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let ts = axis(&domain[0], counts[0]);
    let us = axis(&domain[1], counts[1]);
    let vs = axis(&domain[2], counts[2]);
    let mut out = Vec::with_capacity(counts[0] * counts[1] * counts[2]);
    for &t in &ts {
        for &u in &us {
            for &v in &vs {
                out.push([t, u, v]);
            }
        }
    }
    out
}

/// Evaluates a 3-parameter map on a grid for export.
pub fn sample_immersion(
    map: &dyn ParametricMap,
    grid: &[[f64; 3]],
) -> Result<Vec<ImmersionSample>> {
    let mut out = Vec::with_capacity(grid.len());
    for p in grid {
        let e0 = map.eval(p)?;
        out.push(ImmersionSample {
            t: p[0],
            u: p[1],
            v: p[2],
            e0: e0.to_reals(),
        });
    }
    Ok(out)
}

/// Transverse profile derivative: |E_j(λ₂)| for j = 2,3. The profile is a
/// function of t alone, so this measures how far the frame completion
/// leaks into the t-direction. Near zero for the construction, where the
/// coordinates are metrically orthogonal.
pub fn lam2_transverse_derivative(frame: &TangentFrame, state: &ProfileState) -> Result<f64> {
    let (_, dlam2) = rhs(state)?;
    Ok((frame.coeffs[1][0] * dlam2)
        .abs()
        .max((frame.coeffs[2][0] * dlam2).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::jet_at;
    use crate::profile::{integrate, OdeConfig};
    use crate::surfaces::{
        anisotropic_torus_control_surface, clifford_surface, horizontality_residual_from_jet,
        lagrangian_span_det, tilted_control_surface, unit_norm_deviation,
    };

    fn demo_trajectory() -> Trajectory {
        integrate(ProfileState::new(0.0, 0.5), 0.0, 0.2, &OdeConfig::default()).unwrap()
    }

    fn demo_immersion() -> ConstructedImmersion {
        ConstructedImmersion::new(clifford_surface(), demo_trajectory()).unwrap()
    }

    fn cfg() -> JetConfig {
        JetConfig::default()
    }

    #[test]
    fn hand_value_at_origin() {
        let imm = demo_immersion();
        let e0 = imm.eval(&[0.0, 0.0, 0.0]).unwrap();
        let n = 1.25_f64.sqrt();
        let s = 1.0 / 3.0_f64.sqrt();
        let expected = [
            Complex64::new(0.0, 0.5 / n),
            Complex64::new(s / n, 0.0),
            Complex64::new(s / n, 0.0),
            Complex64::new(s / n, 0.0),
        ];
        for (k, want) in expected.iter().enumerate() {
            assert!(
                (e0.comp(k) - want).norm() <= 1e-12,
                "slot {k}: {:?} vs {:?}",
                e0.comp(k),
                want
            );
        }
    }

    #[test]
    fn unit_norm_everywhere() {
        let imm = demo_immersion();
        let grid = interior_grid_3d(&imm.domain_box(), [4, 4, 4], 0.01);
        for p in &grid {
            let e0 = imm.eval(p).unwrap();
            assert!((e0.norm_sq() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn horizontality_and_span_on_grid() {
        let imm = demo_immersion();
        let grid = interior_grid_3d(&imm.domain_box(), [3, 3, 3], cfg().relative_margin());
        for p in &grid {
            let jet = jet_at(&imm, p, &cfg()).unwrap();
            let h = horizontality_residual_from_jet(&jet);
            assert!(h <= 1e-6, "horizontality {h:.3e} at {p:?}");
            assert!(unit_norm_deviation(&jet) <= 1e-12);
            // 3 complex tangents + position + their J-images: rank 8.
            let det = lagrangian_span_det(&jet).unwrap();
            assert!(det > 1e-6, "span det {det:.3e} at {p:?}");
        }
    }

    #[test]
    fn tangent_frame_is_orthonormal_and_oriented() {
        let imm = demo_immersion();
        let jet = jet_at(&imm, &[0.1, 1.0, 2.0], &cfg()).unwrap();
        let frame = tangent_frame(&jet).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                let got = real_inner(&frame.vectors[i], &frame.vectors[j]).unwrap();
                assert!((got - want).abs() <= 1e-10, "({i},{j}): {got}");
            }
        }
        // Row 0 is a positive multiple of ∂_t alone.
        assert!(frame.coeffs[0][0] > 0.0);
        assert_eq!(frame.coeffs[0][1], 0.0);
        assert_eq!(frame.coeffs[0][2], 0.0);
        // The construction's coordinates are metrically orthogonal, so the
        // completion rows stay out of the t-direction.
        assert!(frame.coeffs[1][0].abs() <= 1e-8);
        assert!(frame.coeffs[2][0].abs() <= 1e-8);
    }

    #[test]
    fn transverse_profile_derivative_vanishes() {
        let imm = demo_immersion();
        let jet = jet_at(&imm, &[0.1, 1.0, 2.0], &cfg()).unwrap();
        let frame = tangent_frame(&jet).unwrap();
        let state = imm.profile_at(0.1).unwrap();
        let r = lam2_transverse_derivative(&frame, &state).unwrap();
        assert!(r <= 1e-8, "E_j(λ₂) = {r:.3e}");
    }

    #[test]
    fn v_lands_in_first_slot_with_unit_phase() {
        let imm = demo_immersion();
        let t = 0.1;
        let jet = jet_at(&imm, &[t, 0.7, 1.3], &cfg()).unwrap();
        let state = imm.profile_at(t).unwrap();
        let v = compute_v(&jet, &state).unwrap();
        assert!((v.norm() - 1.0).abs() <= 1e-8);
        assert!(v.tail().norm() <= 1e-6);
        let want = Complex64::from_polar(1.0, t);
        assert!((v.comp(0) - want).norm() <= 1e-6, "V₀ = {:?}", v.comp(0));
    }

    #[test]
    fn w_round_trips_to_the_seed_surface() {
        let imm = demo_immersion();
        for p in [[0.05, 0.5, 0.5], [0.12, 2.0, 4.0]] {
            let jet = jet_at(&imm, &p, &cfg()).unwrap();
            let state = imm.profile_at(p[0]).unwrap();
            let w = compute_w_from_immersion(&jet, &state).unwrap();
            let seed = self_seed_value(&imm, p[1], p[2]).unwrap();
            assert!(w.sub(&seed).norm() <= 1e-6, "round trip off at {p:?}");
        }
    }

    #[test]
    fn vw_residuals_are_small_on_the_construction() {
        let imm = demo_immersion();
        let grid = interior_grid_3d(&imm.domain_box(), [3, 3, 3], cfg().relative_margin());
        for p in &grid {
            let jet = jet_at(&imm, p, &cfg()).unwrap();
            let frame = tangent_frame(&jet).unwrap();
            let r = vw_residuals(&imm, &jet, &frame).unwrap();
            assert!(r.v_unit <= 1e-8, "v_unit {:.3e} at {p:?}", r.v_unit);
            assert!(r.v_gauge <= 1e-6);
            assert!(r.max_derivative_residual() <= 1e-5, "{r:?} at {p:?}");
            assert!(r.w_orthogonality <= 1e-6);
            assert!(r.w_roundtrip <= 1e-6);
            assert!(r.t_rate <= 1e-6, "t_rate {:.3e}", r.t_rate);
        }
    }

    #[test]
    fn phase_twist_breaks_horizontality() {
        let imm = demo_immersion();
        let p = [0.1, 1.0, 2.0];
        let clean = jet_at(&imm, &p, &cfg()).unwrap();
        assert!(horizontality_residual_from_jet(&clean) <= 1e-6);

        let twisted = PhaseTwist {
            inner: demo_immersion(),
            rate: 0.05,
        };
        let jet = jet_at(&twisted, &p, &cfg()).unwrap();
        let h = horizontality_residual_from_jet(&jet);
        assert!(h > 1e-3, "twist residual {h:.3e} unexpectedly small");
        // The twist is unitary per slot, so the lift stays on S⁷.
        assert!(unit_norm_deviation(&jet) <= 1e-12);
    }

    #[test]
    fn real_form_lift_is_horizontal_and_framed() {
        let lift = real_form_lift();
        let grid = interior_grid_3d(&lift.domain_box(), [3, 3, 3], cfg().relative_margin());
        for p in &grid {
            let jet = jet_at(&lift, p, &cfg()).unwrap();
            assert!(unit_norm_deviation(&jet) <= 1e-12);
            assert!(horizontality_residual_from_jet(&jet) <= 1e-12);
            let frame = tangent_frame(&jet).unwrap();
            let g = frame.metric;
            // Polar chart: metric diag(1, sin²t, sin²t sin²u).
            assert!((g[0][0] - 1.0).abs() <= 1e-8);
            assert!((g[1][1] - p[0].sin().powi(2)).abs() <= 1e-8);
            assert!(g[0][1].abs() <= 1e-8 && g[0][2].abs() <= 1e-8 && g[1][2].abs() <= 1e-8);
        }
    }

    #[test]
    fn seed_checks_reject_the_controls() {
        let traj = demo_trajectory();
        let err = ConstructedImmersion::new(tilted_control_surface(), traj.clone()).unwrap_err();
        assert!(matches!(err, Error::NotLagrangian { .. }));

        let err = ConstructedImmersion::new(anisotropic_torus_control_surface(), traj).unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("minimal"), "message: {msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn evaluation_outside_trajectory_span_errors() {
        let imm = demo_immersion();
        let err = imm.eval(&[0.5, 1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::OutsideTrajectory { .. }));
        let (lo, hi) = imm.t_range();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.2).abs() <= 1e-12);
    }

    #[test]
    fn grid_counts_multiply() {
        let imm = demo_immersion();
        let grid = interior_grid_3d(&imm.domain_box(), [2, 2, 2], 0.01);
        assert_eq!(grid.len(), 8);
        let samples = sample_immersion(&imm, &grid).unwrap();
        assert_eq!(samples.len(), 8);
        assert_eq!(samples[0].e0.len(), 8);
    }
}
