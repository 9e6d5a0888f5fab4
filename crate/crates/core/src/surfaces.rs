//! Horizontal minimal surfaces in S⁵ that seed the construction.
//!
//! A surface W: D → S⁵ ⊂ C³ is horizontal when Re⟨∂_a W, iW⟩ = 0 for both
//! parameters; combined with |W| = 1 this forces the full Hermitian
//! product ⟨∂_a W, W⟩ to vanish, so W projects to a Lagrangian surface in
//! CP². The construction additionally needs W minimal in S⁵ (vanishing
//! trace of the second fundamental form).
//!
//! The catalog carries two genuine seeds and two negative controls:
//!
//! * `clifford_surface` - W(u,v) = (e^{iu}, e^{iv}, e^{-i(u+v)})/√3, the
//!   Clifford torus, flat and minimal,
//! * `geodesic_sphere_surface` - W(u,v) = (cos u cos v, cos u sin v, sin u),
//!   a totally geodesic real 2-sphere,
//! * `tilted_control_surface` - the geodesic sphere scaled by e^{iu},
//!   deliberately not horizontal; it must trip the horizontality check,
//! * `anisotropic_torus_control_surface` - the torus
//!   (e^{2iu}, √2·e^{iv}, √2·e^{-i(u+v)})/√5, still exactly horizontal and
//!   unit but with mean curvature norm exactly 1; it must trip the
//!   minimality check and nothing else.

use num_complex::Complex64;

use crate::ambient::{gram_schmidt, project_orthogonal, real_inner, AmbientVector};
use crate::error::{Error, Result};
use crate::jets::{jet_at, JetConfig, JetPoint, ParametricMap};
use crate::linalg;

/// Relative determinant floor under which the pulled-back surface metric
/// counts as degenerate (immersion lost).
const METRIC_DET_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Body {
    Clifford,
    GeodesicSphere,
    TiltedControl,
    AnisotropicTorusControl,
}

/// A named parametrized surface in S⁵ with its domain box.
#[derive(Debug, Clone)]
pub struct HorizontalSurface {
    pub name: &'static str,
    pub domain: [(f64, f64); 2],
    body: Body,
}

const TAU: f64 = std::f64::consts::TAU;
const FRAC_PI_3: f64 = std::f64::consts::FRAC_PI_3;

/// The Clifford torus (e^{iu}, e^{iv}, e^{-i(u+v)})/√3 on [0, 2π]².
pub fn clifford_surface() -> HorizontalSurface {
    HorizontalSurface {
        name: "clifford",
        domain: [(0.0, TAU), (0.0, TAU)],
        body: Body::Clifford,
    }
}

/// Totally geodesic real 2-sphere (cos u cos v, cos u sin v, sin u),
/// u ∈ [-π/3, π/3] to stay clear of the polar coordinate degeneracy.
pub fn geodesic_sphere_surface() -> HorizontalSurface {
    HorizontalSurface {
        name: "geodesic_sphere",
        domain: [(-FRAC_PI_3, FRAC_PI_3), (0.0, TAU)],
        body: Body::GeodesicSphere,
    }
}

/// Negative control: geodesic sphere with a u-dependent phase tilt. Unit
/// norm survives, horizontality does not (residual is exactly 1 in the u
/// direction).
pub fn tilted_control_surface() -> HorizontalSurface {
    HorizontalSurface {
        name: "tilted_control",
        domain: [(-FRAC_PI_3, FRAC_PI_3), (0.0, TAU)],
        body: Body::TiltedControl,
    }
}

/// Negative control: the anisotropic torus
/// (e^{2iu}, √2·e^{iv}, √2·e^{-i(u+v)})/√5. The phase/radius balance keeps
/// it exactly unit and exactly horizontal, but it is not minimal: the
/// trace of its second fundamental form has norm exactly 1.
pub fn anisotropic_torus_control_surface() -> HorizontalSurface {
    HorizontalSurface {
        name: "anisotropic_torus_control",
        domain: [(0.0, TAU), (0.0, TAU)],
        body: Body::AnisotropicTorusControl,
    }
}

impl ParametricMap for HorizontalSurface {
    fn domain_dim(&self) -> usize {
        2
    }

    fn codomain_dim(&self) -> usize {
        3
    }

    fn domain_box(&self) -> Vec<(f64, f64)> {
        self.domain.to_vec()
    }

    fn eval(&self, x: &[f64]) -> Result<AmbientVector> {
        let (u, v) = (x[0], x[1]);
        let w = match self.body {
            Body::Clifford => {
                let s = 1.0 / 3.0_f64.sqrt();
                vec![
                    Complex64::from_polar(s, u),
                    Complex64::from_polar(s, v),
                    Complex64::from_polar(s, -(u + v)),
                ]
            }
            Body::GeodesicSphere => vec![
                Complex64::new(u.cos() * v.cos(), 0.0),
                Complex64::new(u.cos() * v.sin(), 0.0),
                Complex64::new(u.sin(), 0.0),
            ],
            Body::TiltedControl => {
                let phase = Complex64::from_polar(1.0, u);
                vec![
                    phase * u.cos() * v.cos(),
                    phase * u.cos() * v.sin(),
                    phase * u.sin(),
                ]
            }
            Body::AnisotropicTorusControl => {
                let r1 = (1.0 / 5.0_f64).sqrt();
                let r23 = (2.0 / 5.0_f64).sqrt();
                vec![
                    Complex64::from_polar(r1, 2.0 * u),
                    Complex64::from_polar(r23, v),
                    Complex64::from_polar(r23, -(u + v)),
                ]
            }
        };
        Ok(AmbientVector::new(w))
    }
}

/// max over axes of |Re⟨∂_a E, iE⟩| read off a jet. Applies to surfaces
/// (C³) and lifts (C⁴) alike.
pub fn horizontality_residual_from_jet(jet: &JetPoint) -> f64 {
    let je = jet.value.j();
    jet.first
        .iter()
        .map(|d| real_inner(d, &je).expect("jet dims agree").abs())
        .fold(0.0, f64::max)
}

/// Deviation of |E|² from 1 at the jet base point.
pub fn unit_norm_deviation(jet: &JetPoint) -> f64 {
    (jet.value.norm_sq() - 1.0).abs()
}

/// Horizontality residual of any sphere-valued map at an interior point.
pub fn horizontality_residual(
    map: &dyn ParametricMap,
    point: &[f64],
    config: &JetConfig,
) -> Result<f64> {
    Ok(horizontality_residual_from_jet(&jet_at(
        map, point, config,
    )?))
}

/// Norm of the trace of the second fundamental form of a surface in S⁵,
/// |g^{ab} II_ab|, where II is the component of ∂_a∂_b W orthogonal to the
/// real span of {W, ∂_u W, ∂_v W}. Zero exactly for minimal surfaces.
pub fn surface_mean_curvature_norm(
    map: &dyn ParametricMap,
    point: &[f64],
    config: &JetConfig,
) -> Result<f64> {
    if map.domain_dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: map.domain_dim(),
        });
    }
    let jet = jet_at(map, point, config)?;
    mean_curvature_from_jet(&jet)
}

pub(crate) fn mean_curvature_from_jet(jet: &JetPoint) -> Result<f64> {
    let fu = &jet.first[0];
    let fv = &jet.first[1];
    let g = [
        [real_inner(fu, fu)?, real_inner(fu, fv)?],
        [real_inner(fv, fu)?, real_inner(fv, fv)?],
    ];
    let scale = g[0][0].max(g[1][1]);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if det.is_nan() || det <= METRIC_DET_FLOOR * scale * scale {
        return Err(Error::ImmersionRank {
            t: f64::NAN,
            u: jet.point[0],
            v: jet.point[1],
            what: format!("surface metric determinant {det:.3e} degenerate"),
        });
    }
    let ginv = linalg::invert2(g).expect("determinant checked above");

    let mut trace = AmbientVector::zero(jet.value.dim());
    for a in 0..2 {
        for b in 0..2 {
            trace = trace.add(&jet.second[a][b].scale(ginv[a][b]));
        }
    }
    // Tangent-and-position span; II is what survives the projection.
    let basis = gram_schmidt(&[jet.value.clone(), fu.clone(), fv.clone()])
        .map_err(|e| Error::Frame(format!("surface span degenerate: {e}")))?;
    let ii_trace = project_orthogonal(&trace, &basis.vectors)?;
    Ok(ii_trace.norm())
}

/// Gram determinant of the normalized real 6-span
/// {W, ∂_u W, ∂_v W, iW, i∂_u W, i∂_v W}; bounded away from zero exactly
/// when the surface is fully totally real at the point.
pub fn lagrangian_span_det(jet: &JetPoint) -> Result<f64> {
    let mut vectors: Vec<AmbientVector> = vec![
        jet.value.clone(),
        jet.first[0].clone(),
        jet.first[1].clone(),
    ];
    let imag: Vec<AmbientVector> = vectors.iter().map(AmbientVector::j).collect();
    vectors.extend(imag);
    for v in &mut vectors {
        let n = v.norm();
        if n == 0.0 {
            return Ok(0.0);
        }
        *v = v.scale(1.0 / n);
    }
    let n = vectors.len();
    let mut gram = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            gram[i][j] = real_inner(&vectors[i], &vectors[j])?;
        }
    }
    Ok(linalg::det(gram))
}

/// Aggregate residuals of a surface over an n_u × n_v interior grid.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SurfaceCheckSummary {
    pub name: String,
    pub max_unit_norm_dev: f64,
    pub max_horizontality: f64,
    pub max_mean_curvature: f64,
    pub min_span_gram_det: f64,
    pub points: usize,
}

/// Runs the catalog invariants (unit norm, horizontality, minimality,
/// 6-dimensional totally real span) over an interior grid.
pub fn surface_checks(
    surface: &HorizontalSurface,
    n_u: usize,
    n_v: usize,
    config: &JetConfig,
) -> Result<SurfaceCheckSummary> {
    let grid = interior_grid_2d(&surface.domain, n_u, n_v, config.relative_margin());
    let mut summary = SurfaceCheckSummary {
        name: surface.name.to_string(),
        max_unit_norm_dev: 0.0,
        max_horizontality: 0.0,
        max_mean_curvature: 0.0,
        min_span_gram_det: f64::INFINITY,
        points: grid.len(),
    };
    for p in &grid {
        let jet = jet_at(surface, p, config)?;
        summary.max_unit_norm_dev = summary.max_unit_norm_dev.max(unit_norm_deviation(&jet));
        summary.max_horizontality = summary
            .max_horizontality
            .max(horizontality_residual_from_jet(&jet));
        summary.max_mean_curvature = summary
            .max_mean_curvature
            .max(mean_curvature_from_jet(&jet)?);
        summary.min_span_gram_det = summary.min_span_gram_det.min(lagrangian_span_det(&jet)?);
    }
    Ok(summary)
}

/// Evenly spaced points strictly inside a 2-box. The inset is half again
/// the requested margin so stencil boundary checks clear with rounding
/// to spare.
pub fn interior_grid_2d(
    domain: &[(f64, f64); 2],
    n_u: usize,
    n_v: usize,
    relative_margin: f64,
) -> Vec<[f64; 2]> {
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        let m = 1.5 * relative_margin * (hi - lo);
        let (a, b) = (lo + m, hi - m);
        if n == 1 {
            return vec![0.5 * (a + b)];
        }
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    };
    let us = axis(domain[0].0, domain[0].1, n_u);
    let vs = axis(domain[1].0, domain[1].1, n_v);
    let mut out = Vec::with_capacity(n_u * n_v);
    for &u in &us {
        for &v in &vs {
            out.push([u, v]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> JetConfig {
        JetConfig::default()
    }

    #[test]
    fn clifford_value_at_origin() {
        let w = clifford_surface().eval(&[0.0, 0.0]).unwrap();
        let s = 1.0 / 3.0_f64.sqrt();
        for k in 0..3 {
            assert!((w.comp(k) - Complex64::new(s, 0.0)).norm() <= 1e-15);
        }
        assert!((w.norm_sq() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn clifford_is_horizontal_on_grid() {
        let surf = clifford_surface();
        for p in interior_grid_2d(&surf.domain, 5, 5, cfg().relative_margin()) {
            let r = horizontality_residual(&surf, &p, &cfg()).unwrap();
            assert!(r <= 1e-8, "horizontality residual {r:.3e} at {p:?}");
        }
    }

    #[test]
    fn clifford_is_minimal_on_grid() {
        let surf = clifford_surface();
        for p in interior_grid_2d(&surf.domain, 5, 5, cfg().relative_margin()) {
            let h = surface_mean_curvature_norm(&surf, &p, &cfg()).unwrap();
            assert!(h <= 1e-5, "mean curvature {h:.3e} at {p:?}");
        }
    }

    #[test]
    fn geodesic_sphere_value_and_flatness() {
        let surf = geodesic_sphere_surface();
        let w = surf.eval(&[0.0, 0.0]).unwrap();
        assert!((w.comp(0) - Complex64::new(1.0, 0.0)).norm() <= 1e-15);
        assert!(w.comp(1).norm() <= 1e-15 && w.comp(2).norm() <= 1e-15);

        for p in interior_grid_2d(&surf.domain, 5, 5, cfg().relative_margin()) {
            // Totally geodesic: second fundamental form vanishes entirely.
            let h = surface_mean_curvature_norm(&surf, &p, &cfg()).unwrap();
            assert!(h <= 1e-6, "II trace {h:.3e} at {p:?}");
            // Real-valued map: the horizontality products cancel exactly.
            let r = horizontality_residual(&surf, &p, &cfg()).unwrap();
            assert!(r <= 1e-10);
        }
    }

    #[test]
    fn tilted_control_fails_horizontality() {
        let surf = tilted_control_surface();
        let p = [0.1, 1.0];
        let r = horizontality_residual(&surf, &p, &cfg()).unwrap();
        assert!(
            r > 1e-2,
            "tilted control residual {r:.3e} unexpectedly small"
        );
    }

    #[test]
    fn anisotropic_torus_control_fails_only_minimality() {
        let surf = anisotropic_torus_control_surface();
        let p = [0.7, 2.0];
        // Horizontal and unit like the genuine seeds...
        let r = horizontality_residual(&surf, &p, &cfg()).unwrap();
        assert!(
            r <= 1e-8,
            "control should stay horizontal, residual {r:.3e}"
        );
        // ...but with |g^{ab} II_ab| = 1 (hand value for these radii).
        let h = surface_mean_curvature_norm(&surf, &p, &cfg()).unwrap();
        assert!((h - 1.0).abs() <= 1e-4, "expected trace norm 1, got {h}");
    }

    #[test]
    fn degenerate_metric_is_reported() {
        // Constant in u: the pulled-back metric loses rank.
        let map = crate::jets::FnMap {
            domain: vec![(-1.0, 1.0), (-1.0, 1.0)],
            codim: 3,
            f: |x: &[f64]| {
                Ok(AmbientVector::new(vec![
                    Complex64::from_polar(1.0, x[1]),
                    Complex64::new(0.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ]))
            },
        };
        let err = surface_mean_curvature_norm(&map, &[0.0, 0.0], &cfg()).unwrap_err();
        assert!(matches!(err, Error::ImmersionRank { .. }));
    }

    #[test]
    fn catalog_surfaces_pass_grid_checks() {
        for surf in [clifford_surface(), geodesic_sphere_surface()] {
            let s = surface_checks(&surf, 10, 10, &cfg()).unwrap();
            assert!(
                s.max_unit_norm_dev <= 1e-12,
                "{}: {:.3e}",
                s.name,
                s.max_unit_norm_dev
            );
            assert!(
                s.max_horizontality <= 1e-6,
                "{}: {:.3e}",
                s.name,
                s.max_horizontality
            );
            assert!(
                s.max_mean_curvature <= 1e-5,
                "{}: {:.3e}",
                s.name,
                s.max_mean_curvature
            );
            assert!(
                s.min_span_gram_det > 1e-6,
                "{}: {:.3e}",
                s.name,
                s.min_span_gram_det
            );
            assert_eq!(s.points, 100);
        }
    }

    #[test]
    fn controls_fail_grid_checks() {
        let tilted = surface_checks(&tilted_control_surface(), 6, 6, &cfg()).unwrap();
        assert!(tilted.max_horizontality > 1e-2);
        let torus = surface_checks(&anisotropic_torus_control_surface(), 6, 6, &cfg()).unwrap();
        assert!(torus.max_horizontality <= 1e-6);
        assert!(torus.max_mean_curvature > 1e-1);
    }
}
