//! Finite-difference jets of maps from parameter boxes into C^m.
//!
//! Every derivative downstream (tangent frames, second fundamental form,
//! structure equation residuals) is taken numerically from sampled map
//! values; no symbolic shortcuts. First partials use the five-point
//! central stencil, O(h⁴). Second partials use the symmetric three-point
//! (diagonal) and four-point cross (mixed) stencils, O(h²) raw; with
//! Richardson extrapolation over step halving, enabled by default, they
//! are O(h⁴) as well.
//!
//! Steps are specified relative to the domain box width per axis. The
//! defaults are 10⁻³ for first partials and 10⁻³ raised to the power 5/6
//! (that is 10^-2.5) for second partials, balancing truncation against
//! roundoff for maps with O(1) derivatives. Points closer to the box
//! boundary than three steps are rejected rather than silently one-sided.

use crate::ambient::AmbientVector;
use crate::error::{Error, Result};

/// A map from a rectangular parameter box into C^m.
///
/// Implementations must be pure: two evaluations at the same point return
/// the same value. Everything in this module and downstream relies on it.
pub trait ParametricMap: Sync {
    fn domain_dim(&self) -> usize;
    fn codomain_dim(&self) -> usize;
    /// Per-axis (lo, hi) bounds of the parameter box.
    fn domain_box(&self) -> Vec<(f64, f64)>;
    fn eval(&self, x: &[f64]) -> Result<AmbientVector>;
}

/// Closure-backed [`ParametricMap`], used by tests, controls and derived
/// fields (V and W as maps on the parameter box).
pub struct FnMap<F> {
    pub domain: Vec<(f64, f64)>,
    pub codim: usize,
    pub f: F,
}

impl<F> ParametricMap for FnMap<F>
where
    F: Fn(&[f64]) -> Result<AmbientVector> + Sync,
{
    fn domain_dim(&self) -> usize {
        self.domain.len()
    }

    fn codomain_dim(&self) -> usize {
        self.codim
    }

    fn domain_box(&self) -> Vec<(f64, f64)> {
        self.domain.clone()
    }

    fn eval(&self, x: &[f64]) -> Result<AmbientVector> {
        (self.f)(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct JetConfig {
    /// First-partial step relative to the box width of each axis.
    pub step_first: f64,
    /// Second-partial step relative to the box width of each axis.
    pub step_second: f64,
    /// Richardson-extrapolate second partials (halved-step combination).
    pub richardson: bool,
}

impl Default for JetConfig {
    fn default() -> Self {
        Self::with_first_step(1e-3)
    }
}

impl JetConfig {
    /// Derives the second-partial step from the first by the 5/6 power
    /// law, which maps the default 10⁻³ to 10^-2.5.
    pub fn with_first_step(step_first: f64) -> Self {
        Self {
            step_first,
            step_second: step_first.powf(5.0 / 6.0),
            richardson: true,
        }
    }

    /// Safe interior margin per axis, in relative units: stay three steps
    /// away from the box boundary.
    pub fn relative_margin(&self) -> f64 {
        3.0 * self.step_first.max(self.step_second)
    }
}

/// Value, gradient and Hessian of a map at one interior point.
#[derive(Debug, Clone)]
pub struct JetPoint {
    pub point: Vec<f64>,
    pub value: AmbientVector,
    /// Partial derivative along each domain axis.
    pub first: Vec<AmbientVector>,
    /// Symmetric matrix of second partials, `second[a][b]` with a, b axis
    /// indices. Filled for a <= b and mirrored, so symmetry is exact.
    pub second: Vec<Vec<AmbientVector>>,
}

fn eval_checked(map: &dyn ParametricMap, x: &[f64]) -> Result<AmbientVector> {
    let v = map.eval(x)?;
    if v.dim() != map.codomain_dim() {
        return Err(Error::DimensionMismatch {
            expected: map.codomain_dim(),
            got: v.dim(),
        });
    }
    if !v.norm_sq().is_finite() {
        return Err(Error::Divergence {
            t: x[0],
            what: format!("map returned non-finite value at {x:?}"),
        });
    }
    Ok(v)
}

fn shifted(x: &[f64], axis: usize, delta: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[axis] += delta;
    y
}

fn shifted2(x: &[f64], a: usize, da: f64, b: usize, db: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[a] += da;
    y[b] += db;
    y
}

/// Five-point central first derivative along `axis`.
fn first_partial(map: &dyn ParametricMap, x: &[f64], axis: usize, h: f64) -> Result<AmbientVector> {
    let fm2 = eval_checked(map, &shifted(x, axis, -2.0 * h))?;
    let fm1 = eval_checked(map, &shifted(x, axis, -h))?;
    let fp1 = eval_checked(map, &shifted(x, axis, h))?;
    let fp2 = eval_checked(map, &shifted(x, axis, 2.0 * h))?;
    // (f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h
    Ok(fm2
        .sub(&fm1.scale(8.0))
        .add(&fp1.scale(8.0))
        .sub(&fp2)
        .scale(1.0 / (12.0 * h)))
}

/// Three-point second derivative along `axis` at step `h`.
fn second_diag_raw(
    map: &dyn ParametricMap,
    x: &[f64],
    center: &AmbientVector,
    axis: usize,
    h: f64,
) -> Result<AmbientVector> {
    let fm = eval_checked(map, &shifted(x, axis, -h))?;
    let fp = eval_checked(map, &shifted(x, axis, h))?;
    Ok(fm.add(&fp).sub(&center.scale(2.0)).scale(1.0 / (h * h)))
}

/// Four-point cross stencil for the mixed partial, symmetric in (a, b).
fn second_mixed_raw(
    map: &dyn ParametricMap,
    x: &[f64],
    a: usize,
    b: usize,
    ha: f64,
    hb: f64,
) -> Result<AmbientVector> {
    let fpp = eval_checked(map, &shifted2(x, a, ha, b, hb))?;
    let fpm = eval_checked(map, &shifted2(x, a, ha, b, -hb))?;
    let fmp = eval_checked(map, &shifted2(x, a, -ha, b, hb))?;
    let fmm = eval_checked(map, &shifted2(x, a, -ha, b, -hb))?;
    Ok(fpp
        .sub(&fpm)
        .sub(&fmp)
        .add(&fmm)
        .scale(1.0 / (4.0 * ha * hb)))
}

/// Richardson combination eliminating the O(h²) error of a second-order
/// stencil evaluated at h and h/2.
fn richardson(coarse: &AmbientVector, fine: &AmbientVector) -> AmbientVector {
    fine.scale(4.0 / 3.0).sub(&coarse.scale(1.0 / 3.0))
}

/// Computes the full second-order jet of `map` at `x`.
///
/// `x` must be an interior point: at least three steps (in absolute units,
/// after scaling by the box width) away from every box face. Violations
/// are an error carrying the required margin, not a silent one-sided
/// stencil.
pub fn jet_at(map: &dyn ParametricMap, x: &[f64], config: &JetConfig) -> Result<JetPoint> {
    let dim = map.domain_dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    let boxes = map.domain_box();

    let mut h1 = vec![0.0; dim];
    let mut h2 = vec![0.0; dim];
    for (a, &(lo, hi)) in boxes.iter().enumerate() {
        let width = hi - lo;
        if width.is_nan() || width <= 0.0 {
            return Err(Error::Config(format!("empty domain box on axis {a}")));
        }
        h1[a] = config.step_first * width;
        h2[a] = config.step_second * width;
        let margin = 3.0 * h1[a].max(h2[a]);
        if x[a] - lo < margin || hi - x[a] < margin {
            return Err(Error::BoundaryMargin {
                axis: a,
                value: x[a],
                lo,
                hi,
                margin,
            });
        }
    }

    let value = eval_checked(map, x)?;

    let mut first = Vec::with_capacity(dim);
    for a in 0..dim {
        first.push(first_partial(map, x, a, h1[a])?);
    }

    let mut second = vec![vec![AmbientVector::zero(map.codomain_dim()); dim]; dim];
    for a in 0..dim {
        for b in a..dim {
            let d = if a == b {
                let coarse = second_diag_raw(map, x, &value, a, h2[a])?;
                if config.richardson {
                    let fine = second_diag_raw(map, x, &value, a, h2[a] / 2.0)?;
                    richardson(&coarse, &fine)
                } else {
                    coarse
                }
            } else {
                let coarse = second_mixed_raw(map, x, a, b, h2[a], h2[b])?;
                if config.richardson {
                    let fine = second_mixed_raw(map, x, a, b, h2[a] / 2.0, h2[b] / 2.0)?;
                    richardson(&coarse, &fine)
                } else {
                    coarse
                }
            };
            second[a][b] = d.clone();
            second[b][a] = d;
        }
    }

    Ok(JetPoint {
        point: x.to_vec(),
        value,
        first,
        second,
    })
}

/// Pushforward of a coordinate direction: dE(X) = Σ_a X_a ∂_a E.
pub fn pushforward(jet: &JetPoint, direction: &[f64]) -> Result<AmbientVector> {
    if direction.len() != jet.first.len() {
        return Err(Error::DimensionMismatch {
            expected: jet.first.len(),
            got: direction.len(),
        });
    }
    let mut out = AmbientVector::zero(jet.value.dim());
    for (a, da) in direction.iter().enumerate() {
        out = out.add(&jet.first[a].scale(*da));
    }
    Ok(out)
}

/// Second directional derivative Σ_{a,b} X_a Y_b ∂_a∂_b E, exactly
/// symmetric in (X, Y) because the stored tensor is.
pub fn second_directional(jet: &JetPoint, x_dir: &[f64], y_dir: &[f64]) -> Result<AmbientVector> {
    let dim = jet.first.len();
    if x_dir.len() != dim || y_dir.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: x_dir.len().max(y_dir.len()),
        });
    }
    let mut out = AmbientVector::zero(jet.value.dim());
    for a in 0..dim {
        for b in 0..dim {
            let w = x_dir[a] * y_dir[b];
            if w != 0.0 {
                out = out.add(&jet.second[a][b].scale(w));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::real_inner;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// (u, v) -> (e^{iu}, e^{iv}, 0)/sqrt(2) on [-1, 1]^2.
    fn phase_pair_map() -> FnMap<impl Fn(&[f64]) -> Result<AmbientVector> + Sync> {
        FnMap {
            domain: vec![(-1.0, 1.0), (-1.0, 1.0)],
            codim: 3,
            f: |x: &[f64]| {
                let s = 1.0 / 2.0_f64.sqrt();
                Ok(AmbientVector::new(vec![
                    Complex64::from_polar(s, x[0]),
                    Complex64::from_polar(s, x[1]),
                    c(0.0, 0.0),
                ]))
            },
        }
    }

    /// Clifford-type sphere-valued map, self-contained for this module.
    fn sphere_map() -> FnMap<impl Fn(&[f64]) -> Result<AmbientVector> + Sync> {
        FnMap {
            domain: vec![(0.0, std::f64::consts::TAU), (0.0, std::f64::consts::TAU)],
            codim: 3,
            f: |x: &[f64]| {
                let s = 1.0 / 3.0_f64.sqrt();
                Ok(AmbientVector::new(vec![
                    Complex64::from_polar(s, x[0]),
                    Complex64::from_polar(s, x[1]),
                    Complex64::from_polar(s, -(x[0] + x[1])),
                ]))
            },
        }
    }

    #[test]
    fn first_partial_matches_analytic_value() {
        let map = phase_pair_map();
        let jet = jet_at(&map, &[0.0, 0.0], &JetConfig::default()).unwrap();
        let expected =
            AmbientVector::new(vec![c(0.0, 1.0 / 2.0_f64.sqrt()), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(jet.first[0].sub(&expected).norm() <= 1e-10);
    }

    #[test]
    fn constant_map_has_zero_derivatives() {
        let map = FnMap {
            domain: vec![(-1.0, 1.0), (-1.0, 1.0)],
            codim: 4,
            f: |_: &[f64]| {
                Ok(AmbientVector::new(vec![
                    c(0.3, -0.2),
                    c(1.0, 0.0),
                    c(0.0, 2.0),
                    c(-1.0, 1.0),
                ]))
            },
        };
        let jet = jet_at(&map, &[0.2, -0.1], &JetConfig::default()).unwrap();
        for a in 0..2 {
            assert!(jet.first[a].norm() <= 1e-12);
            for b in 0..2 {
                assert!(jet.second[a][b].norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn quadratic_second_derivative() {
        let map = FnMap {
            domain: vec![(-1.0, 1.0)],
            codim: 4,
            f: |x: &[f64]| {
                Ok(AmbientVector::new(vec![
                    c(x[0] * x[0], 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                    c(0.0, 0.0),
                ]))
            },
        };
        let jet = jet_at(&map, &[0.25], &JetConfig::default()).unwrap();
        let expected = AmbientVector::new(vec![c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert!(jet.second[0][0].sub(&expected).norm() <= 1e-8);
    }

    #[test]
    fn mixed_partials_are_exactly_symmetric() {
        let map = sphere_map();
        let jet = jet_at(&map, &[1.0, 2.0], &JetConfig::default()).unwrap();
        for k in 0..3 {
            assert_eq!(jet.second[0][1].comp(k), jet.second[1][0].comp(k));
        }
    }

    #[test]
    fn pushforward_reproduces_axes_and_sums() {
        let map = phase_pair_map();
        let jet = jet_at(&map, &[0.0, 0.0], &JetConfig::default()).unwrap();
        let du = pushforward(&jet, &[1.0, 0.0]).unwrap();
        assert!(du.sub(&jet.first[0]).norm() == 0.0);
        let sum = pushforward(&jet, &[1.0, 1.0]).unwrap();
        assert!(sum.sub(&jet.first[0].add(&jet.first[1])).norm() <= 1e-15);
    }

    #[test]
    fn second_directional_diagonal_and_symmetry() {
        let map = sphere_map();
        let jet = jet_at(&map, &[2.0, 3.0], &JetConfig::default()).unwrap();
        let dxx = second_directional(&jet, &[1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(dxx.sub(&jet.second[0][0]).norm() == 0.0);
        let x = [0.3, -0.8];
        let y = [1.1, 0.4];
        let dxy = second_directional(&jet, &x, &y).unwrap();
        let dyx = second_directional(&jet, &y, &x).unwrap();
        assert!(dxy.sub(&dyx).norm() <= 1e-13);
    }

    #[test]
    fn sphere_valued_second_derivative_identity() {
        // Differentiating |E|^2 = 1 twice: Re<d2E, E> = -|dE|^2.
        let map = sphere_map();
        let jet = jet_at(&map, &[1.3, 4.1], &JetConfig::default()).unwrap();
        for a in 0..2 {
            let lhs = real_inner(&jet.second[a][a], &jet.value).unwrap();
            let rhs = -jet.first[a].norm_sq();
            assert!(
                (lhs - rhs).abs() <= 1e-6,
                "second-derivative sphere identity violated by {}",
                (lhs - rhs).abs()
            );
        }
    }

    #[test]
    fn boundary_violation_reports_margin() {
        let map = phase_pair_map();
        let err = jet_at(&map, &[0.9999, 0.0], &JetConfig::default()).unwrap_err();
        match err {
            Error::BoundaryMargin { axis, margin, .. } => {
                assert_eq!(axis, 0);
                assert!(margin > 0.0);
            }
            other => panic!("expected boundary error, got {other}"),
        }
    }

    #[test]
    fn first_partial_order_at_least_halving_by_twelve() {
        // e^{iu} has unit fifth derivative, so the 5-point stencil error
        // h^4/30 dominates roundoff at these steps.
        let map = phase_pair_map();
        let exact =
            AmbientVector::new(vec![c(0.0, 1.0 / 2.0_f64.sqrt()), c(0.0, 0.0), c(0.0, 0.0)]);
        let err_at = |step: f64| -> f64 {
            let cfg = JetConfig {
                step_first: step,
                ..JetConfig::default()
            };
            let jet = jet_at(&map, &[0.0, 0.0], &cfg).unwrap();
            jet.first[0].sub(&exact).norm()
        };
        let coarse = err_at(5e-3); // h = 1e-2 on the width-2 box
        let fine = err_at(2.5e-3);
        assert!(
            coarse / fine >= 12.0,
            "first-partial convergence ratio {} below 12",
            coarse / fine
        );
    }

    #[test]
    fn richardson_beats_raw_second_partial() {
        let map = sphere_map();
        let x = [2.0, 2.5];
        let exact = {
            // d2/du2 of e^{iu}/sqrt(3) is -e^{iu}/sqrt(3); third slot gets
            // (-i)^2 = -1 times its value.
            let v = map.eval(&x).unwrap();
            AmbientVector::new(vec![-v.comp(0), c(0.0, 0.0), -v.comp(2)])
        };
        let raw = JetConfig {
            richardson: false,
            ..JetConfig::default()
        };
        let rich = JetConfig::default();
        let e_raw = jet_at(&map, &x, &raw).unwrap().second[0][0]
            .sub(&exact)
            .norm();
        let e_rich = jet_at(&map, &x, &rich).unwrap().second[0][0]
            .sub(&exact)
            .norm();
        assert!(
            e_rich * 10.0 <= e_raw,
            "richardson {e_rich:.3e} not at least 10x better than raw {e_raw:.3e}"
        );
    }

    #[test]
    fn jets_are_deterministic() {
        let map = sphere_map();
        let a = jet_at(&map, &[1.0, 1.5], &JetConfig::default()).unwrap();
        let b = jet_at(&map, &[1.0, 1.5], &JetConfig::default()).unwrap();
        for k in 0..3 {
            assert_eq!(a.value.comp(k), b.value.comp(k));
            for ax in 0..2 {
                assert_eq!(a.first[ax].comp(k), b.first[ax].comp(k));
                for bx in 0..2 {
                    assert_eq!(a.second[ax][bx].comp(k), b.second[ax][bx].comp(k));
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_sphere_tangency(u in 0.5..5.5f64, v in 0.5..5.5f64) {
            let map = sphere_map();
            let jet = jet_at(&map, &[u, v], &JetConfig::default()).unwrap();
            for a in 0..2 {
                let r = real_inner(&jet.first[a], &jet.value).unwrap();
                prop_assert!(r.abs() <= 1e-8);
            }
        }

        #[test]
        fn prop_pushforward_linear(u in 0.5..5.5f64, v in 0.5..5.5f64,
                                   x0 in -2.0..2.0f64, x1 in -2.0..2.0f64, s in -3.0..3.0f64) {
            let map = sphere_map();
            let jet = jet_at(&map, &[u, v], &JetConfig::default()).unwrap();
            let d1 = pushforward(&jet, &[x0 * s, x1 * s]).unwrap();
            let d2 = pushforward(&jet, &[x0, x1]).unwrap().scale(s);
            prop_assert!(d1.sub(&d2).norm() <= 1e-12 * (1.0 + d2.norm()));
        }
    }
}
