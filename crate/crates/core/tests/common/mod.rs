#![allow(dead_code)]

use std::sync::Arc;

use conesnell::chart::ChartBox;
use conesnell::expr::ScalarExpr;
use conesnell::finsler::{LorentzFinslerField, Metric, SpatialNorm};
use conesnell::geodesic::{integrate_geodesic, GeodesicState, IntegratorOptions, Segment};
use conesnell::interface::Interface;
use conesnell::linalg::{angle_between, Matrix, Vector};
use conesnell::snell::{incident_data, solve_reflection, solve_refraction, CaseLabel, Media};
use conesnell::tracer::{discretize, trace, trace_discretized, GridScene, Scene};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_row_slice(xs)
}

pub fn minkowski_matrix(d: usize) -> Matrix {
    let mut g = -Matrix::identity(d, d);
    g[(0, 0)] = 1.0;
    g
}

/// `G = Aᵀ η A` with `A` a random perturbation of the identity; `T = A⁻¹ e₀`.
pub fn random_quadratic(rng: &mut ChaCha8Rng, d: usize, spread: f64) -> Metric {
    let a = Matrix::from_fn(d, d, |i, j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-spread..spread));
    let g = a.transpose() * minkowski_matrix(d) * &a;
    let mut e0 = Vector::zeros(d);
    e0[0] = 1.0;
    let t = a.lu().solve(&e0).expect("invertible");
    Metric::quadratic(g, t).expect("Lorentzian")
}

/// Randers medium with a random constant wind of Euclidean norm below `max`.
pub fn random_randers(rng: &mut ChaCha8Rng, d: usize, max: f64) -> Metric {
    let mut w: Vec<f64> = (0..d - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = w.iter().map(|c| c * c).sum::<f64>().sqrt();
    let r = rng.random_range(0.0..max);
    w.iter_mut().for_each(|c| *c *= r / n);
    Metric::randers_constant_wind(&w).unwrap()
}

/// `L = (v⁰)² − (√(ṽᵀHṽ) + b·ṽ)²` supplied only through values, so every
/// derivative comes from finite differences.
pub struct CustomRanders {
    pub h: Matrix,
    pub b: Vector,
}

impl LorentzFinslerField for CustomRanders {
    fn dim(&self) -> usize {
        self.b.len() + 1
    }

    fn l(&self, x: &Vector, v: &Vector) -> f64 {
        let _ = x;
        let w = v.rows(1, v.len() - 1).into_owned();
        let f = (w.transpose() * &self.h * &w)[(0, 0)].sqrt() + self.b.dot(&w);
        v[0] * v[0] - f * f
    }

    fn time_form(&self, _x: &Vector) -> Vector {
        let mut e = Vector::zeros(self.dim());
        e[0] = 1.0;
        e
    }

    fn time_vector(&self, x: &Vector) -> Vector {
        self.time_form(x)
    }
}

pub fn custom_randers(d: usize) -> Metric {
    let mut h = Matrix::identity(d - 1, d - 1);
    h[(0, 0)] = 1.3;
    let mut b = Vector::zeros(d - 1);
    b[0] = 0.25;
    Metric::custom(Arc::new(CustomRanders { h, b })).unwrap()
}

/// One representative per metric family, in dimension 3.
pub fn families() -> Vec<(&'static str, Metric)> {
    let mut rng = rand::SeedableRng::seed_from_u64(11);
    vec![
        ("quadratic", random_quadratic(&mut rng, 3, 0.3)),
        (
            "conformal",
            Metric::conformal(minkowski_matrix(3), ScalarExpr::exp(1.0, vec![0.0, 0.6, 0.0], 0.0), v(&[1.0, 0.0, 0.0]))
                .unwrap(),
        ),
        (
            "isotropic",
            Metric::isotropic(3, ScalarExpr::linear(1.2, vec![0.0, 0.2, 0.1])).unwrap(),
        ),
        (
            "randers",
            Metric::product(
                3,
                SpatialNorm::Randers {
                    h: None,
                    wind: vec![ScalarExpr::linear(0.3, vec![0.0, 0.0, 0.1]), ScalarExpr::Number(-0.2)],
                },
            )
            .unwrap(),
        ),
        ("custom", custom_randers(3)),
    ]
}

/// Future causal vector `(1 + s) F(w) T + w` at `x`.
pub fn causal(m: &Metric, x: &Vector, w_raw: &Vector, s: f64) -> Vector {
    let om = m.time_form(x).unwrap();
    let t = m.time_vector(x).unwrap();
    let w = w_raw - &t * om.dot(w_raw);
    let f = m.triple_norm(x, &w).unwrap();
    t * ((1.0 + s) * f) + w
}

/// Checks the pointwise invariants of `L` at the future causal vector built
/// from `w` and `s`. Returns the first violated identity.
pub fn check_invariants(m: &Metric, x: &Vector, w: &Vector, z: &Vector, s: f64) -> Result<(), String> {
    let vv = causal(m, x, w, s);
    let l = m.l(x, &vv).unwrap();
    for lam in [0.5, 2.0, 10.0] {
        let lv = m.l(x, &(&vv * lam)).unwrap();
        if (lv - lam * lam * l).abs() > 1e-9 * (lam * lam * l).abs().max(1.0) {
            return Err(format!("2-homogeneity at λ = {lam}: {lv} vs {}", lam * lam * l));
        }
    }
    let g = m.fundamental_tensor(x, &vv).unwrap();
    // Quadratic scale of g_v, the size of the terms being compared.
    let scale = (g.norm() * vv.norm_squared()).max(1.0);
    let gvv = (vv.transpose() * &g * &vv)[(0, 0)];
    if (gvv - l).abs() > 1e-8 * scale {
        return Err(format!("g_v(v,v) = {gvv} vs L = {l}"));
    }
    let g2 = m.fundamental_tensor(x, &(&vv * 2.0)).unwrap();
    if (&g2 - &g).norm() > 1e-8 * g.norm() {
        return Err(format!("0-homogeneity of g: {:e}", (&g2 - &g).norm() / g.norm()));
    }
    let dl = m.dl(x, &vv).unwrap();
    let lhs = dl.dot(z);
    let rhs = 2.0 * (vv.transpose() * &g * z)[(0, 0)];
    if (lhs - rhs).abs() > 1e-8 * (g.norm() * vv.norm() * z.norm()).max(1.0) {
        return Err(format!("dL(v)(w) = {lhs} vs 2 g_v(v,w) = {rhs}"));
    }
    let null = causal(m, x, w, 0.0);
    let dn = m.dl(x, &null).unwrap();
    let euler = dn.dot(&null);
    if euler.abs() > 1e-10 * dn.norm() * null.norm() {
        return Err(format!("radiality: dL(v)(v) = {euler:e}"));
    }
    Ok(())
}

/// A random constant medium: quadratic, isotropic or Randers.
pub fn random_medium(rng: &mut ChaCha8Rng, d: usize) -> Metric {
    match rng.random_range(0..3) {
        0 => random_quadratic(rng, d, 0.4),
        1 => Metric::isotropic(d, rng.random_range(0.7..1.6)).unwrap(),
        _ => random_randers(rng, d, 0.6),
    }
}

/// Random media through the origin with a plane interface `φ·x = 0` whose
/// time component is drawn wide enough to produce every causal character,
/// and a future lightlike incident direction with `φ(u) > 0`.
pub fn random_scene(rng: &mut ChaCha8Rng, d: usize) -> Option<(Media, Vector)> {
    random_scene_with(rng, d, random_medium)
}

/// As [`random_scene`] with both media drawn by `medium`.
pub fn random_scene_with(
    rng: &mut ChaCha8Rng,
    d: usize,
    medium: impl Fn(&mut ChaCha8Rng, usize) -> Metric,
) -> Option<(Media, Vector)> {
    let m1 = medium(rng, d);
    let m2 = medium(rng, d);
    let mut phi = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    phi[0] = rng.random_range(-2.0..2.0);
    if phi.rows(1, d - 1).norm() < 0.1 {
        return None;
    }
    let iface = Interface::plane(phi.as_slice(), 0.0).unwrap();
    let x = Vector::zeros(d);
    for _ in 0..50 {
        let mut w = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        w[0] = 0.0;
        let u = causal(&m1, &x, &w, 0.0);
        if phi.dot(&u) > 0.05 * phi.norm() * u.norm() {
            return Some((Media::new(m1, m2, iface), u));
        }
    }
    None
}

/// Constant media split by a slightly tilted plane, a source in `Q₁` and an
/// observer at rest in `Q₂`. Returns the scene, the start and an aiming
/// guess.
pub fn random_fermat_scene(rng: &mut ChaCha8Rng) -> (Scene, Vector, Vector) {
    use conesnell::tracer::Receiver;
    let e0 = v(&[1.0, 0.0, 0.0]);
    let medium = |rng: &mut ChaCha8Rng| loop {
        let m = match rng.random_range(0..3) {
            0 => random_quadratic(rng, 3, 0.25),
            1 => Metric::isotropic(3, rng.random_range(0.7..1.6)).unwrap(),
            _ => random_randers(rng, 3, 0.5),
        };
        // The observer must be timelike in the second medium.
        if m.l(&Vector::zeros(3), &e0).unwrap() > 0.2 {
            return m;
        }
    };
    let m1 = medium(rng);
    let m2 = medium(rng);
    let normal = [rng.random_range(-0.2..0.2), 1.0, rng.random_range(-0.3..0.3)];
    let iface = Interface::plane(&normal, 0.0).unwrap();
    let start = v(&[0.0, -1.0, rng.random_range(-0.5..0.5)]);
    let target = [rng.random_range(0.6..1.4), rng.random_range(-0.8..0.8)];
    let mut scene = Scene::new(Media::new(m1, m2, iface), ChartBox::new(vec![-1.0, -3.0, -3.0], vec![15.0, 3.0, 3.0]))
        .with_receiver(Receiver::observer(&target));
    scene.options.step = Some(0.05);
    let guess = v(&[0.0, target[0] - start[1], target[1] - start[2]]);
    (scene, start, guess)
}

/// Aims at the receiver and compares crossing point and arrival time with
/// the brute-force Fermat minimiser. `Ok(None)` when the oracle finds no
/// connecting path. Errors are relative to the source-receiver distance.
pub fn fermat_agreement(scene: &Scene, start: &Vector, guess: &Vector) -> Result<Option<(f64, f64)>, String> {
    use conesnell::tracer::{aim_at_receiver, fermat_oracle, LocalModel, Termination};
    let model = LocalModel::from_scene(scene, start, false).map_err(|e| e.to_string())?;
    let Ok(oracle) = fermat_oracle(&model) else {
        return Ok(None);
    };
    let t = aim_at_receiver(scene, start, guess, 2).map_err(|e| e.to_string())?;
    if t.termination != Termination::ReceiverHit || t.events.len() != 1 {
        return Err(format!("aimed ray ended with {:?} after {} events", t.termination, t.events.len()));
    }
    let arrival = t.arrival.ok_or("no arrival")?;
    let scale = scene.receiver.as_ref().unwrap().distance(start);
    let dx = (&t.events[0].crossing.point - &oracle.crossing).norm() / scale;
    let dt = (arrival - oracle.time).abs() / scale;
    Ok(Some((dx, dt)))
}

/// Orthonormal basis of `Ker φ`, built without the interface module.
fn kernel_basis(phi: &Vector) -> [Vector; 2] {
    let k = (0..3).min_by(|&a, &b| phi[a].abs().total_cmp(&phi[b].abs())).unwrap();
    let mut e = Vector::zeros(3);
    e[k] = 1.0;
    let t1 = (&e - phi * (phi[k] / phi.norm_squared())).normalize();
    let t2 = phi.cross(&t1).normalize();
    [t1, t2]
}

/// Dense sweep over the spatial indicatrix for directions whose `dL`
/// restricted to `Ker φ` is proportional to that of the incident ray. Sign
/// changes of the 2×2 determinant are refined by bisection.
fn sweep_oracle(m1: &Metric, m: &Metric, phi: &Vector, u: &Vector, reflect: bool) -> Vec<Vector> {
    let x = Vector::zeros(3);
    let [t1, t2] = kernel_basis(phi);
    let a = m1.dl(&x, u).unwrap();
    let (a1, a2) = (a.dot(&t1), a.dot(&t2));
    let dir = |th: f64| {
        let v = causal(m, &x, &Vector::from_vec(vec![0.0, th.cos(), th.sin()]), 0.0);
        let om = m.time_form(&x).unwrap().dot(&v);
        v / om
    };
    let det = |th: f64| {
        let b = m.dl(&x, &dir(th)).unwrap();
        a1 * b.dot(&t2) - a2 * b.dot(&t1)
    };
    const N: usize = 2048;
    let step = std::f64::consts::TAU / N as f64;
    let mut out: Vec<Vector> = Vec::new();
    let mut prev = det(0.0);
    for i in 1..=N {
        let (mut lo, mut hi) = ((i - 1) as f64 * step, i as f64 * step);
        let cur = det(hi);
        if (prev < 0.0) != (cur < 0.0) {
            let mut flo = prev;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = det(mid);
                if (fm < 0.0) == (flo < 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            let v = dir(0.5 * (lo + hi));
            let b = m.dl(&x, &v).unwrap();
            let restricted = (b.dot(&t1).powi(2) + b.dot(&t2).powi(2)).sqrt();
            let side = phi.dot(&v) / (phi.norm() * v.norm());
            let side_ok = if reflect { side <= 1e-9 } else { side >= -1e-9 };
            let proper = restricted > 1e-6 * b.norm();
            let not_u = !reflect || angle_between(&v, u) > 1e-6;
            if side_ok && proper && not_u && out.iter().all(|w| (w - &v).norm() > 1e-6) {
                out.push(v);
            }
        }
        prev = cur;
    }
    out
}

fn pairing_distance(a: &[Vector], b: &[Vector]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut worst = 0.0f64;
    for x in a {
        let d = b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    Some(worst)
}

/// Compares the sweep oracle with the solver on one scene and checks the
/// table prediction against the oracle count.
pub fn oracle_agreement(media: &Media, u: &Vector) -> Result<(), String> {
    let x = Vector::zeros(3);
    let inc = incident_data(media, &x, u).map_err(|e| e.to_string())?;
    let phi = inc.phi.clone();
    for reflect in [false, true] {
        let out = if reflect { solve_reflection(media, &inc) } else { solve_refraction(media, &inc) }
            .map_err(|e| e.to_string())?;
        let m = media.metric(if reflect { 1 } else { 2 });
        let oracle = sweep_oracle(&media.metric1, m, &phi, u, reflect);
        let solved: Vec<Vector> = out
            .proper()
            .filter(|d| !reflect || angle_between(&d.v, &inc.u) > 1e-6)
            .map(|d| d.v.clone())
            .collect();
        let Some(dist) = pairing_distance(&oracle, &solved) else {
            return Err(format!(
                "{:?}: oracle found {} direction(s), solver {} (case {})",
                out.kind,
                oracle.len(),
                solved.len(),
                out.case_label.name()
            ));
        };
        if dist > 1e-7 {
            return Err(format!("{:?}: pairing distance {dist:e}", out.kind));
        }
        if !out.borderline {
            let unbroken = usize::from(out.case_label == CaseLabel::AstarIiUnbroken);
            let exceptional = out.directions.iter().filter(|d| d.exceptional).count();
            if oracle.len() + unbroken + exceptional != out.case_label.expected_count() {
                return Err(format!("table predicts {} but oracle found {}", out.case_label.name(), oracle.len()));
            }
        }
    }
    Ok(())
}

/// A quadratic metric whose cone tilts and narrows across the chart.
pub fn bent_quadratic() -> Metric {
    Metric::quadratic_field(
        3,
        |x: &Vector| {
            let a = 1.0 + 0.3 * x[1].sin();
            let b = 0.2 * x[2];
            Matrix::from_row_slice(3, 3, &[1.0, b, 0.0, b, -a, 0.1 * x[1], 0.0, 0.1 * x[1], -1.0 - 0.2 * x[2] * x[2]])
        },
        v(&[1.0, 0.0, 0.0]),
    )
    .unwrap()
}

/// Integrates from `(x, y)` up to parameter `s_max` with no stop predicate.
pub fn run(m: &Metric, x: &Vector, y: &Vector, step: f64, s_max: f64, normalize: bool, project: bool) -> Segment {
    let opts = IntegratorOptions {
        step,
        s_max: Some(s_max),
        normalize,
        project,
        ..Default::default()
    };
    integrate_geodesic(m, &GeodesicState::new(x.clone(), y.clone(), 0.0), &|_, _| None, &opts, 1).unwrap()
}

/// Least-squares slope of log(error) against log(h).
fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

pub fn rk4_order(m: &Metric) -> f64 {
    let x = Vector::zeros(3);
    let y = causal(m, &x, &v(&[0.0, 0.8, 0.6]), 0.0);
    let hs = [0.2, 0.1, 0.05];
    let end = |h: f64| run(m, &x, &y, h, 2.0, true, true).last().x.clone();
    let reference = end(hs[2] / 16.0);
    let errs: Vec<f64> = hs.iter().map(|&h| (end(h) - &reference).norm()).collect();
    slope(&hs, &errs)
}

/// A quadratic field equal to one isotropic medium for `x¹ < 0` and another
/// beyond, so that the cell faces at `x¹ = 0` tile the interface exactly.
fn tiled(n1: f64, n2: f64) -> Metric {
    Metric::quadratic_field(
        3,
        move |x: &Vector| {
            let n = if x[1] < 0.0 { n1 } else { n2 };
            Matrix::from_diagonal(&v(&[1.0, -n * n, -n * n]))
        },
        v(&[1.0, 0.0, 0.0]),
    )
    .unwrap()
}

/// Refraction angle, case label and the continuous counterpart for one
/// incidence through an exactly tiled grid.
pub fn tiled_refraction(n1: f64, n2: f64, theta: f64) -> (f64, f64, CaseLabel, CaseLabel) {
    let bounds = ChartBox::new(vec![0.0, -1.0, -1.0], vec![4.0, 1.0, 1.0]);
    let cc = discretize(&GridScene::uniform(tiled(n1, n2), bounds.clone(), 4, 9)).unwrap();
    let start = v(&[0.0, -0.9, -0.6]);
    let m1 = Metric::isotropic(3, n1).unwrap();
    let dir = m1.lift(&start, &v(&[0.0, theta.cos(), theta.sin()])).unwrap();
    let grid = trace_discretized(&cc, &start, &dir, 100).unwrap();
    let face = grid
        .events
        .iter()
        .find(|e| e.crossing.point[1].abs() < 1e-12)
        .expect("crossing of the tiled face");
    let out = &face.chosen.as_ref().unwrap().direction;
    let media = Media::new(m1, Metric::isotropic(3, n2).unwrap(), Interface::coordinate_plane(3, 1, 0.0));
    let cont = trace(&Scene::new(media, bounds), &start, &dir, 1).unwrap();
    let ev = &cont.events[0];
    let cout = &ev.chosen.as_ref().unwrap().direction;
    (
        out[2].atan2(out[1]),
        cout[2].atan2(cout[1]),
        face.refraction.case_label,
        ev.refraction.case_label,
    )
}

