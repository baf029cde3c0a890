//! Formal Christoffel symbols and lightlike geodesic integration.
//!
//! The geodesic equation `ÿᵏ + γᵏᵢⱼ(ẏ) ẏⁱ ẏʲ = 0` is integrated with classical
//! RK4 at a fixed step. After every step the velocity is projected back onto
//! the cone along the time vector of the cone triple, which keeps `|L(ẏ)|` at
//! round-off level without disturbing the fourth-order convergence.

use serde::{Deserialize, Serialize};

use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::finsler::Metric;
use crate::linalg::{Matrix, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState {
    pub x: Vector,
    pub y: Vector,
    pub s: f64,
}

impl GeodesicState {
    pub fn new(x: Vector, y: Vector, s: f64) -> Self {
        GeodesicState { x, y, s }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    InterfaceHit,
    BoundsExit,
    MaxSteps,
    ReceiverHit,
    /// `s` reached `IntegratorOptions::s_max`.
    ParameterLimit,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Segment {
    pub samples: Vec<GeodesicState>,
    /// Region label 1 or 2.
    pub medium: u8,
    pub stop_reason: StopReason,
}

impl Segment {
    pub fn first(&self) -> &GeodesicState {
        &self.samples[0]
    }

    pub fn last(&self) -> &GeodesicState {
        self.samples.last().expect("segments are never empty")
    }
}

#[derive(Clone, Debug)]
pub struct IntegratorOptions {
    pub step: f64,
    pub max_steps: usize,
    /// Land exactly on this parameter value and stop.
    pub s_max: Option<f64>,
    /// Stop once the position leaves this box.
    pub bounds: Option<ChartBox>,
    /// Rescale the initial velocity to `ω(y) = 1`.
    pub normalize: bool,
    /// Restore `L = 0` after every step.
    pub project: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            step: 1e-2,
            max_steps: 100_000,
            s_max: None,
            bounds: None,
            normalize: true,
            project: true,
        }
    }
}

/// `γᵏᵢⱼ(v)` at `x`, stored as `out[k][(i, j)]`.
pub fn formal_christoffel(m: &Metric, x: &Vector, v: &Vector) -> Result<Vec<Matrix>> {
    let d = m.dim();
    let g = m.fundamental_tensor(x, v)?;
    let ginv = g
        .try_inverse()
        .ok_or_else(|| Error::DegenerateTensor("g_v is singular".into()))?;
    let dg = m.tensor_x_derivatives(x, v)?;
    // Γ_{r,ij} = ½ (∂_i g_rj + ∂_j g_ri − ∂_r g_ij)
    let lower: Vec<Matrix> = (0..d)
        .map(|r| Matrix::from_fn(d, d, |i, j| 0.5 * (dg[i][(r, j)] + dg[j][(r, i)] - dg[r][(i, j)])))
        .collect();
    Ok((0..d)
        .map(|k| {
            let mut out = Matrix::zeros(d, d);
            for (r, lr) in lower.iter().enumerate() {
                out += lr * ginv[(k, r)];
            }
            out
        })
        .collect())
}

/// `−γᵏᵢⱼ(y) yⁱ yʲ`, computed without forming the full symbol array.
pub fn geodesic_acceleration(m: &Metric, x: &Vector, y: &Vector) -> Result<Vector> {
    let d = m.dim();
    let g = m.fundamental_tensor(x, y)?;
    let dg = m.tensor_x_derivatives(x, y)?;
    let mut rhs = Vector::zeros(d);
    for (i, dgi) in dg.iter().enumerate() {
        if y[i] != 0.0 {
            rhs.axpy(y[i], &(dgi * y), 1.0);
        }
    }
    for (r, dgr) in dg.iter().enumerate() {
        rhs[r] -= 0.5 * y.dot(&(dgr * y));
    }
    let sol = g
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::DegenerateTensor("g_v is singular".into()))?;
    Ok(-sol)
}

/// One classical RK4 step of size `h` for `(x, y)`.
pub fn rk4_step(m: &Metric, st: &GeodesicState, h: f64) -> Result<GeodesicState> {
    let f = |x: &Vector, y: &Vector| -> Result<(Vector, Vector)> {
        Ok((y.clone(), geodesic_acceleration(m, x, y)?))
    };
    let (k1x, k1y) = f(&st.x, &st.y)?;
    let (k2x, k2y) = f(&(&st.x + &k1x * (0.5 * h)), &(&st.y + &k1y * (0.5 * h)))?;
    let (k3x, k3y) = f(&(&st.x + &k2x * (0.5 * h)), &(&st.y + &k2y * (0.5 * h)))?;
    let (k4x, k4y) = f(&(&st.x + &k3x * h), &(&st.y + &k3y * h))?;
    Ok(GeodesicState {
        x: &st.x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0),
        y: &st.y + (k1y + k2y * 2.0 + k3y * 2.0 + k4y) * (h / 6.0),
        s: st.s + h,
    })
}

/// Restores `L(v) = 0` keeping the spatial part `π(v)`.
pub fn project_to_cone(m: &Metric, x: &Vector, v: &Vector) -> Result<Vector> {
    m.project_to_cone(x, v)
}

/// Prepares a start state: checks it is future lightlike, normalises and
/// projects it onto the cone.
pub fn prepare_start(m: &Metric, start: &GeodesicState, opts: &IntegratorOptions) -> Result<GeodesicState> {
    let om = m.time_form(&start.x)?;
    let a = om.dot(&start.y);
    if !(a > 0.0) {
        return Err(Error::InvalidInput("start velocity is not future directed".into()));
    }
    let l = m.l(&start.x, &start.y)?;
    if l.abs() > 1e-6 * m.l_scale(&start.x, &start.y) {
        return Err(Error::InvalidInput(format!("start velocity is not lightlike (L = {l:e})")));
    }
    let y = if opts.normalize { &start.y / a } else { start.y.clone() };
    let y = if opts.project { m.project_to_cone(&start.x, &y)? } else { y };
    Ok(GeodesicState::new(start.x.clone(), y, start.s))
}

/// Integrates from `start` until `stop(prev, cur)` fires, the box is left,
/// `s_max` is reached or the step budget runs out.
pub fn integrate_geodesic(
    m: &Metric,
    start: &GeodesicState,
    stop: &dyn Fn(&GeodesicState, &GeodesicState) -> Option<StopReason>,
    opts: &IntegratorOptions,
    medium: u8,
) -> Result<Segment> {
    if !(opts.step > 0.0) {
        return Err(Error::InvalidInput("integrator step must be positive".into()));
    }
    let mut cur = prepare_start(m, start, opts)?;
    let mut samples = vec![cur.clone()];
    let fail = |reason: String, samples: &Vec<GeodesicState>| Error::IntegrationFailure {
        reason,
        partial: Box::new(Segment {
            samples: samples.clone(),
            medium,
            stop_reason: StopReason::MaxSteps,
        }),
    };
    for _ in 0..opts.max_steps {
        let mut h = opts.step;
        let mut last = false;
        if let Some(sm) = opts.s_max {
            if cur.s + h >= sm - 1e-6 * h {
                h = sm - cur.s;
                last = true;
            }
            if h <= 0.0 {
                break;
            }
        }
        let mut next = match rk4_step(m, &cur, h) {
            Ok(n) => n,
            Err(e) => return Err(fail(e.to_string(), &samples)),
        };
        if last {
            next.s = opts.s_max.unwrap();
        }
        if !next.x.iter().chain(next.y.iter()).all(|c| c.is_finite()) {
            return Err(fail("non-finite state".into(), &samples));
        }
        if opts.project {
            next.y = m
                .project_to_cone(&next.x, &next.y)
                .map_err(|e| Error::ConeExit(format!("at s = {}: {e}", next.s)))?;
        }
        if let Some(r) = stop(&cur, &next) {
            samples.push(next);
            return Ok(Segment { samples, medium, stop_reason: r });
        }
        if let Some(b) = &opts.bounds {
            if !b.contains(&next.x) {
                samples.push(next);
                return Ok(Segment {
                    samples,
                    medium,
                    stop_reason: StopReason::BoundsExit,
                });
            }
        }
        samples.push(next.clone());
        cur = next;
        if last {
            return Ok(Segment {
                samples,
                medium,
                stop_reason: StopReason::ParameterLimit,
            });
        }
    }
    Ok(Segment {
        samples,
        medium,
        stop_reason: StopReason::MaxSteps,
    })
}

/// Largest Euclidean component of `D_γ̇ γ̇` orthogonal to `γ̇` over interior
/// samples, with `γ̈` from the three-point non-uniform difference of the
/// sampled velocities. Zero for pregeodesics in any parametrisation.
pub fn pregeodesic_residual(m: &Metric, seg: &Segment) -> Result<f64> {
    let s = &seg.samples;
    if s.len() < 3 {
        return Err(Error::InvalidInput("pregeodesic residual needs at least 3 samples".into()));
    }
    let mut worst = 0.0f64;
    for i in 1..s.len() - 1 {
        let h1 = s[i].s - s[i - 1].s;
        let h2 = s[i + 1].s - s[i].s;
        if !(h1 > 0.0 && h2 > 0.0) {
            return Err(Error::InvalidInput("samples are not increasing in s".into()));
        }
        let ydot = &s[i - 1].y * (-h2 / (h1 * (h1 + h2)))
            + &s[i].y * ((h2 - h1) / (h1 * h2))
            + &s[i + 1].y * (h1 / (h2 * (h1 + h2)));
        let a = ydot - geodesic_acceleration(m, &s[i].x, &s[i].y)?;
        let y = &s[i].y;
        let perp = &a - y * (a.dot(y) / y.norm_squared());
        worst = worst.max(perp.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarExpr;

    fn v(a: &[f64]) -> Vector {
        Vector::from_row_slice(a)
    }

    fn never(_: &GeodesicState, _: &GeodesicState) -> Option<StopReason> {
        None
    }

    fn conformal() -> Metric {
        Metric::conformal(
            Matrix::from_diagonal(&v(&[1.0, -1.0, -1.0])),
            ScalarExpr::exp(1.0, vec![0.0, 2.0, 0.0], 0.0),
            v(&[1.0, 0.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn minkowski_symbols_vanish_and_line_is_straight() {
        let m = Metric::minkowski(3);
        let g = formal_christoffel(&m, &v(&[0.3, 0.1, 0.2]), &v(&[1.0, 1.0, 0.0])).unwrap();
        assert!(g.iter().all(|c| c.norm() == 0.0));
        let opts = IntegratorOptions {
            step: 0.1,
            s_max: Some(1.0),
            ..Default::default()
        };
        let seg = integrate_geodesic(&m, &GeodesicState::new(Vector::zeros(3), v(&[1.0, 1.0, 0.0]), 0.0), &never, &opts, 1).unwrap();
        assert_eq!(seg.stop_reason, StopReason::ParameterLimit);
        assert!((seg.last().x.clone() - v(&[1.0, 1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn conformal_symbols_match_levi_civita() {
        // G = e^{2x¹} η: Γᵏᵢⱼ = δᵏᵢ ∂ⱼφ + δᵏⱼ ∂ᵢφ − ηᵢⱼ ηᵏˡ ∂ₗφ with φ = x¹.
        let m = conformal();
        let x = v(&[0.2, 0.3, -0.1]);
        let g = formal_christoffel(&m, &x, &v(&[1.0, 0.6, 0.8])).unwrap();
        let eta = [1.0, -1.0, -1.0];
        let dphi = [0.0, 1.0, 0.0];
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let want = d(k, i) * dphi[j] + d(k, j) * dphi[i] - d(i, j) * eta[i] * eta[k] * dphi[k];
                    assert!((g[k][(i, j)] - want).abs() < 1e-12, "{k}{i}{j}");
                }
            }
        }
    }

    #[test]
    fn randers_symbols_are_symmetric() {
        let m = Metric::product(
            3,
            crate::finsler::SpatialNorm::Randers {
                h: None,
                wind: vec![ScalarExpr::linear(0.1, vec![0.0, 0.0, 0.2]), ScalarExpr::linear(0.0, vec![0.05, 0.1, 0.0])],
            },
        )
        .unwrap();
        let x = v(&[0.1, 0.4, 0.3]);
        let y = m.lift(&x, &v(&[0.0, 0.7, -0.4])).unwrap();
        let g = formal_christoffel(&m, &x, &y).unwrap();
        let asym = g.iter().map(|c| (c - c.transpose()).amax()).fold(0.0, f64::max);
        assert!(asym <= 1e-7);
    }

    #[test]
    fn conformal_matches_refined_reference() {
        let m = conformal();
        let start = GeodesicState::new(v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.6, 0.8]), 0.0);
        let run = |h: f64| {
            let opts = IntegratorOptions { step: h, s_max: Some(1.0), ..Default::default() };
            integrate_geodesic(&m, &start, &never, &opts, 1).unwrap().last().x.clone()
        };
        let coarse = run(1e-2);
        let fine = run(1e-2 / 16.0);
        assert!((coarse - fine).norm() < 1e-7);
    }

    #[test]
    fn drift_stays_at_round_off() {
        let m = conformal();
        // Heading to smaller x¹ the affine parameter blows up near s = 0.83.
        let start = GeodesicState::new(v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.6, -0.8]), 0.0);
        let opts = IntegratorOptions { step: 0.05, s_max: Some(2.0), ..Default::default() };
        let seg = integrate_geodesic(&m, &start, &never, &opts, 1);
        let seg = seg.unwrap_or_else(|e| panic!("{e}"));
        for st in &seg.samples {
            assert!(m.l(&st.x, &st.y).unwrap().abs() <= 1e-8 * m.l_scale(&st.x, &st.y));
        }
    }

    #[test]
    fn residual_of_geodesic_and_reparametrisation() {
        let m = conformal();
        let start = GeodesicState::new(v(&[0.0, 0.0, 0.0]), v(&[1.0, 0.6, 0.8]), 1.0);
        let opts = IntegratorOptions { step: 1e-3, s_max: Some(2.0), ..Default::default() };
        let seg = integrate_geodesic(&m, &start, &never, &opts, 1).unwrap();
        let scale = seg.samples.iter().map(|s| s.y.norm_squared()).fold(0.0, f64::max);
        let r = pregeodesic_residual(&m, &seg).unwrap();
        assert!(r <= 1e-6 * scale, "{r} {scale}");
        // σ = s^{1/3}: positions unchanged, velocities scaled by ds/dσ = 3σ².
        let re = Segment {
            samples: seg
                .samples
                .iter()
                .map(|st| {
                    let sig = st.s.cbrt();
                    GeodesicState::new(st.x.clone(), &st.y * (3.0 * sig * sig), sig)
                })
                .collect(),
            ..seg.clone()
        };
        let scale = re.samples.iter().map(|s| s.y.norm_squared()).fold(0.0, f64::max);
        assert!(pregeodesic_residual(&m, &re).unwrap() <= 1e-5 * scale);
    }

    #[test]
    fn circle_is_not_pregeodesic() {
        let m = Metric::minkowski(3);
        let r = 2.0;
        let samples = (0..50)
            .map(|i| {
                let s = i as f64 * 0.02;
                GeodesicState::new(
                    v(&[s, r * (s / r).cos(), r * (s / r).sin()]),
                    v(&[1.0, -(s / r).sin(), (s / r).cos()]),
                    s,
                )
            })
            .collect();
        let seg = Segment { samples, medium: 1, stop_reason: StopReason::MaxSteps };
        assert!(pregeodesic_residual(&m, &seg).unwrap() >= 1e-2);
    }

    #[test]
    fn isotropic_time_independent_unit_speed() {
        let m = Metric::isotropic(3, ScalarExpr::linear(1.2, vec![0.0, 0.3, 0.1])).unwrap();
        let start = GeodesicState::new(v(&[0.0, 0.0, 0.0]), m.lift(&Vector::zeros(3), &v(&[0.0, 0.8, 0.6])).unwrap(), 0.0);
        let opts = IntegratorOptions { step: 1e-2, s_max: Some(1.5), ..Default::default() };
        let seg = integrate_geodesic(&m, &start, &never, &opts, 1).unwrap();
        let f = m.spatial_norm_field().unwrap();
        for st in &seg.samples {
            let sp = st.y.rows(1, 2).into_owned() / st.y[0];
            assert!((f.norm(&st.x, &sp).unwrap() - 1.0).abs() <= 1e-7);
            assert!((st.y[0] - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_non_lightlike_start() {
        let m = Metric::minkowski(3);
        let e = integrate_geodesic(&m, &GeodesicState::new(Vector::zeros(3), v(&[1.0, 0.5, 0.0]), 0.0), &never, &IntegratorOptions::default(), 1);
        assert!(matches!(e, Err(Error::InvalidInput(_))));
    }
}
