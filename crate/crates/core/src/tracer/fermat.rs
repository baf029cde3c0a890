//! Fermat-type checks in a locally constant model: brute-force minimisation
//! of the arrival time over broken lightlike paths, criticality of a traced
//! path, and a search for timelike connectors that beat a broken path.

use serde::{Deserialize, Serialize};

use super::{trace, Receiver, Scene, Trajectory};
use crate::error::{Error, Result};
use crate::finsler::{sphere_points, Metric};
use crate::linalg::{orthonormal_complement, orthonormalize, signature, Matrix, Vector};
use crate::numeric::{central_gradient, central_hessian, illinois};
use crate::snell::{incident_data, EventKind, Media};

/// Constant metrics on both sides of the hyperplane `φ·x = c`, a source point
/// in `{φ·x < c}` and a receiver line `α(s) = o + s a`.
#[derive(Clone, Debug)]
pub struct LocalModel {
    pub metric1: Metric,
    /// Metric of the second leg: medium 2, or medium 1 for reflection.
    pub metric_out: Metric,
    pub phi: Vector,
    pub offset: f64,
    pub source: Vector,
    pub origin: Vector,
    pub velocity: Vector,
    pub reflect: bool,
    /// Euclidean-orthonormal basis of `Ker ω₁`.
    spatial: Vec<Vector>,
}

/// Outcome of one broken path.
#[derive(Clone, Debug)]
struct Leg {
    crossing: Vector,
    direction: Vector,
    time: f64,
}

impl LocalModel {
    pub fn new(
        metric1: Metric,
        metric_out: Metric,
        phi: Vector,
        offset: f64,
        source: Vector,
        receiver: &Receiver,
        reflect: bool,
    ) -> Result<LocalModel> {
        let Receiver::Line { origin, velocity } = receiver else {
            return Err(Error::InvalidInput("Fermat checks need a curve receiver".into()));
        };
        if phi.dot(&source) >= offset {
            return Err(Error::InvalidInput("source must lie in Q1".into()));
        }
        let om = metric1.time_form(&source)?;
        let spatial = orthonormal_complement(&om);
        Ok(LocalModel {
            metric1,
            metric_out,
            phi,
            offset,
            source,
            origin: Vector::from_row_slice(origin),
            velocity: Vector::from_row_slice(velocity),
            reflect,
            spatial,
        })
    }

    /// Constant media with a planar interface, read from the scene.
    pub fn from_scene(scene: &Scene, source: &Vector, reflect: bool) -> Result<LocalModel> {
        let rx = scene
            .receiver
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("scene has no receiver".into()))?;
        let iface = &scene.media.interface;
        let phi = iface.gradient(source)?;
        let offset = phi.dot(source) - iface.value(source);
        let out = if reflect { &scene.media.metric1 } else { &scene.media.metric2 };
        LocalModel::new(
            scene.media.metric1.frozen_at(source),
            out.frozen_at(source),
            phi,
            offset,
            source.clone(),
            rx,
            reflect,
        )
    }

    /// Number of free direction parameters, `n − 1`.
    pub fn params(&self) -> usize {
        self.spatial.len() - 1
    }

    fn lift(&self, s: &Vector) -> Result<Vector> {
        let mut w = Vector::zeros(self.source.len());
        for (si, e) in s.iter().zip(&self.spatial) {
            w.axpy(*si, e, 1.0);
        }
        self.metric1.lift(&self.source, &w)
    }

    /// Unit spatial coordinates of the direction from the source to `q`.
    fn coords_towards(&self, q: &Vector) -> Result<Vector> {
        let (_, w) = self.metric1.split(&self.source, &(q - &self.source))?;
        let s = Vector::from_iterator(self.spatial.len(), self.spatial.iter().map(|e| e.dot(&w)));
        if s.norm() == 0.0 {
            return Err(Error::InvalidInput("crossing point has no spatial offset".into()));
        }
        Ok(s.normalize())
    }

    /// Earliest receiver parameter reached by a lightlike leg from `q`.
    fn second_leg(&self, q: &Vector) -> Option<f64> {
        let m = &self.metric_out;
        let g = |s: f64| -> f64 {
            let w = &self.origin + &self.velocity * s - q;
            match m.split(q, &w).and_then(|(a, sp)| Ok(a - m.triple_norm(q, &sp)?)) {
                Ok(v) => v,
                Err(_) => f64::NAN,
            }
        };
        let s0 = (q - &self.origin).dot(&self.velocity) / self.velocity.norm_squared();
        let scale = (q - &self.origin).norm().max(1.0) / self.velocity.norm();
        let (mut lo, mut hi) = (s0 - scale, s0 + scale);
        let (mut glo, mut ghi) = (g(lo), g(hi));
        for _ in 0..60 {
            if glo < 0.0 && ghi > 0.0 {
                break;
            }
            if !(glo < 0.0) {
                lo -= hi - lo;
                glo = g(lo);
            }
            if !(ghi > 0.0) {
                hi += hi - lo;
                ghi = g(hi);
            }
        }
        if !(glo < 0.0 && ghi > 0.0) {
            return None;
        }
        let s = illinois(g, lo, hi, glo, ghi, 1e-15 * (hi - lo).abs().max(1.0), 0.0, 300)?;
        let end = &self.origin + &self.velocity * s;
        let side = self.phi.dot(&end) - self.offset;
        let into = self.phi.dot(&(&end - q));
        let ok = if self.reflect { side < 0.0 && into < 0.0 } else { side > 0.0 && into > 0.0 };
        ok.then_some(s)
    }

    fn leg_from_coords(&self, s: &Vector) -> Option<Leg> {
        let u = self.lift(s).ok()?;
        let rate = self.phi.dot(&u);
        if !(rate > 0.0) {
            return None;
        }
        let tau = (self.offset - self.phi.dot(&self.source)) / rate;
        let q = &self.source + &u * tau;
        let time = self.second_leg(&q)?;
        Some(Leg {
            crossing: q,
            direction: u,
            time,
        })
    }

    /// Arrival parameter of the broken path whose first leg leaves along the
    /// spatial unit direction `s`, or `+∞` if it does not reach the receiver.
    pub fn time_along(&self, s: &Vector) -> f64 {
        self.leg_from_coords(s).map(|l| l.time).unwrap_or(f64::INFINITY)
    }
}

/// Unit vector from hyperspherical angles.
fn from_angles(theta: &[f64], n: usize) -> Vector {
    let mut s = Vector::zeros(n);
    let mut sin_prod = 1.0;
    for (i, t) in theta.iter().enumerate() {
        s[i] = sin_prod * t.cos();
        sin_prod *= t.sin();
    }
    s[n - 1] = sin_prod;
    s
}

/// Gnomonic chart around a unit vector.
struct Chart {
    centre: Vector,
    axes: Vec<Vector>,
}

impl Chart {
    fn new(centre: &Vector) -> Chart {
        Chart {
            centre: centre.clone(),
            axes: orthonormal_complement(centre),
        }
    }

    fn point(&self, c: &Vector) -> Vector {
        let mut s = self.centre.clone();
        for (ci, a) in c.iter().zip(&self.axes) {
            s.axpy(*ci, a, 1.0);
        }
        s.normalize()
    }
}

/// Visits every point of a `per_axis^dim` grid on `[-half, half]^dim`.
fn grid_points(dim: usize, per_axis: usize, half: f64, mut f: impl FnMut(&Vector)) {
    let mut idx = vec![0usize; dim];
    let coord = |i: usize| -half + 2.0 * half * (i as f64 + 0.5) / per_axis as f64;
    loop {
        let c = Vector::from_iterator(dim, idx.iter().map(|&i| coord(i)));
        f(&c);
        let mut k = 0;
        loop {
            if k == dim {
                return;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Compass search minimising `f` from `x`.
fn compass_min(f: impl Fn(&Vector) -> f64, mut x: Vector, mut step: f64, min_step: f64) -> (Vector, f64) {
    let mut fx = f(&x);
    let mut iters = 0;
    while step > min_step && iters < 10_000 {
        iters += 1;
        let mut improved = false;
        for k in 0..x.len() {
            for sgn in [1.0, -1.0] {
                let mut y = x.clone();
                y[k] += sgn * step;
                let fy = f(&y);
                if fy < fx {
                    x = y;
                    fx = fy;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (x, fx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleResult {
    pub crossing: Vector,
    pub direction: Vector,
    pub time: f64,
    pub evaluations: usize,
}

/// Brute-force minimum of the arrival time over broken lightlike paths:
/// a 64-per-angle grid over first-leg directions, three rounds each shrinking
/// the spacing 16×, then a compass polish.
pub fn fermat_oracle(model: &LocalModel) -> Result<OracleResult> {
    const PER_AXIS: usize = 64;
    let n = model.spatial.len();
    let k = n - 1;
    let count = std::cell::Cell::new(0usize);
    let time = |s: &Vector| {
        count.set(count.get() + 1);
        model.time_along(s)
    };

    let mut best = (f64::INFINITY, Vector::zeros(n));
    if k == 0 {
        for s in [Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)] {
            let t = time(&s);
            if t < best.0 {
                best = (t, s);
            }
        }
    } else {
        let mut idx = vec![0usize; k];
        loop {
            let theta: Vec<f64> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    let span = if i + 1 == k { 2.0 * std::f64::consts::PI } else { std::f64::consts::PI };
                    span * (j as f64 + 0.5) / PER_AXIS as f64
                })
                .collect();
            let s = from_angles(&theta, n);
            let t = time(&s);
            if t < best.0 {
                best = (t, s);
            }
            let mut j = 0;
            while j < k {
                idx[j] += 1;
                if idx[j] < PER_AXIS {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == k {
                break;
            }
        }
    }
    if !best.0.is_finite() {
        return Err(Error::NoArrival("no broken lightlike path reaches the receiver".into()));
    }

    let mut centre = best.1.clone();
    if k > 0 {
        let mut spacing = 2.0 * std::f64::consts::PI / PER_AXIS as f64;
        for _ in 0..2 {
            let chart = Chart::new(&centre);
            let mut round = (f64::INFINITY, centre.clone());
            grid_points(k, PER_AXIS, 2.0 * spacing, |c| {
                let s = chart.point(c);
                let t = time(&s);
                if t < round.0 {
                    round = (t, s);
                }
            });
            centre = round.1;
            spacing /= 16.0;
        }
        let chart = Chart::new(&centre);
        let (c, _) = compass_min(|c| time(&chart.point(c)), Vector::zeros(k), spacing, 1e-14);
        centre = chart.point(&c);
    }
    let leg = model
        .leg_from_coords(&centre)
        .ok_or_else(|| Error::InternalConsistency("oracle minimiser lost its path".into()))?;
    Ok(OracleResult {
        crossing: leg.crossing,
        direction: leg.direction,
        time: leg.time,
        evaluations: count.get(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HessianSignature {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Critical,
    NotCritical,
    /// Critical among broken lightlike paths, but a timelike connector
    /// through some event arrives earlier.
    NotMinimizing,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalityReport {
    pub gradient_norm: f64,
    pub tolerance: f64,
    pub hessian: HessianSignature,
    pub time: f64,
    /// Per event: whether a timelike connector was found.
    pub connectors: Vec<bool>,
    /// Metrics were frozen at the crossing point and the interface replaced
    /// by its tangent hyperplane.
    pub constant_approximation: bool,
    pub verdict: Verdict,
}

fn metrics_agree(m: &Metric, a: &Vector, b: &Vector) -> bool {
    let probe = |x: &Vector| -> Option<Vec<f64>> {
        let t = m.time_vector(x).ok()?;
        let mut out = Vec::new();
        for k in 0..x.len() {
            let mut v = t.clone();
            v[k] += 0.5;
            out.push(m.l(x, &v).ok()?);
        }
        Some(out)
    };
    match (probe(a), probe(b)) {
        (Some(p), Some(q)) => p.iter().zip(&q).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs())),
        _ => false,
    }
}

/// Checks that the first event of `traj` makes the arrival time stationary
/// under perturbations of the crossing over the interface, classifies the
/// second variation, and searches every event for a faster timelike
/// connector.
pub fn fermat_criticality_check(scene: &Scene, traj: &Trajectory) -> Result<CriticalityReport> {
    let ev = traj
        .events
        .first()
        .ok_or_else(|| Error::InvalidInput("trajectory has no interface event".into()))?;
    let chosen = ev
        .chosen
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("first event has no outgoing branch".into()))?;
    let rx = scene
        .receiver
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scene has no receiver".into()))?;
    let reflect = chosen.kind == EventKind::Reflection;
    let p = &ev.crossing.point;
    let local = scene.local_media(ev.from_medium);
    let out_medium = if reflect { 1 } else { 2 };
    let start = traj.start().x.clone();
    let end = traj.end().x.clone();
    let exact = local.interface.shape().is_some_and(|s| matches!(s, crate::interface::Shape::Plane { .. }))
        && metrics_agree(&local.metric1, &start, p)
        && metrics_agree(local.metric(out_medium), p, &end);

    let phi = local.interface.gradient(p)?;
    let offset = phi.dot(p);
    let (source, receiver) = if exact {
        (start, rx.clone())
    } else {
        // Shorten both legs to a patch around the crossing.
        let patch = 1e-2 * scene.scale();
        let before = traj
            .samples()
            .map(|(_, st)| st)
            .filter(|st| st.s < ev.crossing.tau && (&st.x - p).norm() >= patch)
            .last()
            .map(|st| st.x.clone())
            .unwrap_or_else(|| traj.start().x.clone());
        let after = traj
            .samples()
            .map(|(_, st)| st)
            .find(|st| st.s > ev.crossing.tau && (&st.x - p).norm() >= patch)
            .map(|st| st.x.clone())
            .unwrap_or(end);
        let t2 = local.metric(out_medium).time_vector(p)?;
        (
            before,
            Receiver::Line {
                origin: after.as_slice().to_vec(),
                velocity: t2.as_slice().to_vec(),
            },
        )
    };
    let model = LocalModel::new(
        local.metric1.frozen_at(p),
        local.metric(out_medium).frozen_at(p),
        phi,
        offset,
        source,
        &receiver,
        reflect,
    )?;
    let centre = model.coords_towards(p)?;
    let k = model.params();
    let chart = Chart::new(&centre);
    let f = |c: &Vector| model.time_along(&chart.point(c));
    let c0 = Vector::zeros(k);
    let time = f(&c0);
    if !time.is_finite() {
        return Err(Error::NoArrival("the traced crossing does not connect to the receiver".into()));
    }
    let grad = central_gradient(f, &c0, 1e-5);
    let hess: Matrix = central_hessian(f, &c0, 1e-3);
    let hessian = match signature(&hess, 1e-6) {
        Some((pos, 0)) if pos == k => HessianSignature::Minimum,
        Some((0, neg)) if neg == k => HessianSignature::Maximum,
        Some(_) => HessianSignature::Saddle,
        None => HessianSignature::Degenerate,
    };
    let mut connectors = Vec::new();
    for e in &traj.events {
        let Some(b) = &e.chosen else { continue };
        let media = scene.local_media(e.from_medium);
        let found = timelike_connector_search(&media, &e.crossing.point, &e.crossing.incoming, &b.direction, b.kind.medium())?;
        connectors.push(found.found);
    }
    let tolerance = 1e-4 * scene.scale();
    let gradient_norm = grad.norm();
    let verdict = if gradient_norm > tolerance {
        Verdict::NotCritical
    } else if connectors.iter().any(|&c| c) {
        Verdict::NotMinimizing
    } else {
        Verdict::Critical
    };
    Ok(CriticalityReport {
        gradient_norm,
        tolerance,
        hessian,
        time,
        connectors,
        constant_approximation: !exact,
        verdict,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConnectorResult {
    pub found: bool,
    /// Best normalised margin `min(L(leg)/|leg|²)` over both legs.
    pub margin: f64,
    /// Break point of the best connector.
    pub point: Vector,
    /// Endpoint scaling along the outgoing direction that achieved it.
    pub scaling: f64,
}

/// Margin above which a connector counts as timelike.
pub const CONNECTOR_THRESHOLD: f64 = 1e-10;

/// Searches for a two-leg timelike path from `p − u` to `p + k r` in the
/// model with both metrics frozen at `p` and the interface replaced by its
/// tangent hyperplane. For refraction the break point ranges over the
/// interface; for reflection over the closed incident side. The model is
/// scale invariant, so unit distances are used.
pub fn timelike_connector_search(media: &Media, p: &Vector, u: &Vector, r: &Vector, medium: u8) -> Result<ConnectorResult> {
    let frozen = media.frozen_at(p);
    let inc = incident_data(&frozen, p, u)?;
    let m1 = &frozen.metric1;
    let mr = frozen.metric(medium);
    let u = &inc.u;
    let r = r / mr.time_form(p)?.dot(r);
    let om1 = m1.time_form(p)?;
    let omr = mr.time_form(p)?;
    let reflect = medium == 1;

    // Coordinates: z' and Π span Tη; reflection also moves along −ν.
    let mut dirs = vec![inc.z_prime.clone()];
    dirs.extend(inc.pi_basis.iter().cloned());
    if reflect {
        dirs.push(inc.nu.clone());
    }
    let dirs = orthonormalize(&dirs, 1e-12).ok_or_else(|| Error::InternalConsistency("degenerate connector frame".into()))?;
    let nu_axis = dirs.len() - 1;
    let qb = p - u;
    let margin = |qa: &Vector, c: &Vector| -> f64 {
        if reflect && inc.phi.dot(&dirs[nu_axis]) * c[nu_axis] > 0.0 {
            return -1.0;
        }
        let mut z = p.clone();
        for (ci, d) in c.iter().zip(&dirs) {
            z.axpy(*ci, d, 1.0);
        }
        let a = &z - &qb;
        let b = qa - &z;
        if !(om1.dot(&a) > 0.0 && omr.dot(&b) > 0.0) {
            return -1.0;
        }
        match (m1.l(p, &a), mr.l(p, &b)) {
            (Ok(la), Ok(lb)) => {
                let va = if a.norm() > 0.0 { la / a.norm_squared() } else { 0.0 };
                let vb = if b.norm() > 0.0 { lb / b.norm_squared() } else { 0.0 };
                va.min(vb)
            }
            _ => -1.0,
        }
    };

    let mut best = ConnectorResult {
        found: false,
        margin: f64::NEG_INFINITY,
        point: p.clone(),
        scaling: 1.0,
    };
    for k in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let qa = p + &r * k;
        let half = 3.0 * k.max(1.0);
        let mut local = (f64::NEG_INFINITY, Vector::zeros(dirs.len()));
        const N: usize = 200;
        for i in 0..N {
            for j in 0..N {
                let mut c = Vector::zeros(dirs.len());
                c[0] = -half + 2.0 * half * (i as f64 + 0.5) / N as f64;
                let second = if reflect { nu_axis } else { 1.min(dirs.len() - 1) };
                if second != 0 {
                    c[second] = if reflect {
                        -half * (j as f64 + 0.5) / N as f64 * inc.phi.dot(&dirs[nu_axis]).signum()
                    } else {
                        -half + 2.0 * half * (j as f64 + 0.5) / N as f64
                    };
                }
                let v = margin(&qa, &c);
                if v > local.0 {
                    local = (v, c);
                }
            }
        }
        let (c, v) = compass_min(|c| -margin(&qa, c), local.1, half / N as f64, 1e-12);
        let v = -v;
        if v > best.margin {
            let mut z = p.clone();
            for (ci, d) in c.iter().zip(&dirs) {
                z.axpy(*ci, d, 1.0);
            }
            best = ConnectorResult {
                found: v > CONNECTOR_THRESHOLD,
                margin: v,
                point: z,
                scaling: k,
            };
        }
    }
    Ok(best)
}

/// Shoots from `start` so that the trajectory meets the scene's line
/// receiver. Newton iteration on the miss between the final straight leg and
/// the receiver line, so it is exact for constant media in the final region.
/// Starts from the spatial direction `guess`; if that stalls, restarts from
/// the best few directions of a coarse sweep.
pub fn aim_at_receiver(scene: &Scene, start: &Vector, guess: &Vector, max_events: usize) -> Result<Trajectory> {
    let rx = scene
        .receiver
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scene has no receiver".into()))?;
    let Receiver::Line { origin, velocity } = rx else {
        return Err(Error::InvalidInput("aiming needs a curve receiver".into()));
    };
    let aimer = Aimer {
        scene,
        start,
        max_events,
        origin: Vector::from_row_slice(origin),
        velocity: Vector::from_row_slice(velocity),
        blind: Scene {
            receiver: None,
            ..scene.clone()
        },
    };
    let medium = scene
        .media
        .interface
        .side(start)
        .medium()
        .ok_or_else(|| Error::InvalidInput("start point lies on the interface".into()))?;
    let m = scene.media.metric(medium);
    let spatial = orthonormal_complement(&m.time_form(start)?);
    let s0 = Vector::from_iterator(spatial.len(), spatial.iter().map(|e| e.dot(guess)));
    if s0.norm() == 0.0 {
        return Err(Error::InvalidInput("guess has no spatial part".into()));
    }
    let lift = |s: &Vector| -> Result<Vector> {
        let mut w = Vector::zeros(start.len());
        for (si, e) in s.iter().zip(&spatial) {
            w.axpy(*si, e, 1.0);
        }
        m.lift(start, &w)
    };
    let accept = 1e-3 * scene.options.tube * scene.scale();
    let mut best: Option<(f64, Vector)> = None;
    let consider = |best: &mut Option<(f64, Vector)>, res: Result<(f64, Vector)>| {
        if let Ok((miss, dir)) = res {
            if best.as_ref().is_none_or(|b| miss < b.0) {
                *best = Some((miss, dir));
            }
        }
    };
    consider(&mut best, aimer.newton(&s0.normalize(), &lift));
    if best.as_ref().is_none_or(|b| b.0 > accept) {
        let mut seeds: Vec<(f64, Vector)> = sphere_points(spatial.len(), 64 * (spatial.len() - 1))
            .into_iter()
            .filter_map(|p| {
                let s = Vector::from_vec(p);
                let d = aimer.displacement(&lift(&s).ok()?).ok()?;
                Some((d.0.norm(), s))
            })
            .collect();
        seeds.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (_, s) in seeds.into_iter().take(4) {
            consider(&mut best, aimer.newton(&s, &lift));
            if best.as_ref().is_some_and(|b| b.0 <= accept) {
                break;
            }
        }
    }
    match best {
        Some((miss, dir)) if miss <= accept => trace(scene, start, &dir, max_events),
        Some((miss, _)) => Err(Error::NoArrival(format!("aiming stalled with miss {miss:e}"))),
        None => Err(Error::NoArrival("no aimed ray reaches the receiver".into())),
    }
}

struct Aimer<'a> {
    scene: &'a Scene,
    start: &'a Vector,
    max_events: usize,
    origin: Vector,
    velocity: Vector,
    blind: Scene,
}

impl Aimer<'_> {
    /// Displacement from the receiver line to the closest point of the
    /// tangent line at the final sample nearest to it, with that tangent.
    fn displacement(&self, dir: &Vector) -> Result<(Vector, Vector)> {
        let rx = self.scene.receiver.as_ref().expect("receiver");
        let (o, a) = (&self.origin, &self.velocity);
        let t = trace(&self.blind, self.start, dir, self.max_events)?;
        let last = t.segments.last().expect("segment");
        let st = last
            .samples
            .iter()
            .min_by(|p, q| rx.distance(&p.x).total_cmp(&rx.distance(&q.x)))
            .expect("sample");
        let y = &st.y;
        let w0 = &st.x - o;
        let g = Matrix::from_row_slice(2, 2, &[y.dot(y), -y.dot(a), -y.dot(a), a.dot(a)]);
        let rhs = Vector::from_row_slice(&[-w0.dot(y), w0.dot(a)]);
        let sol = g
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SolverFailure("final leg is parallel to the receiver".into()))?;
        if sol[0] < -2.0 * self.scene.step() {
            return Err(Error::NoArrival("receiver lies behind the final leg".into()));
        }
        Ok((&w0 + y * sol[0] - a * sol[1], y.clone()))
    }

    /// Damped Newton from the unit spatial direction `s0`. Returns the final
    /// miss and the initial direction reaching it.
    fn newton(&self, s0: &Vector, lift: &dyn Fn(&Vector) -> Result<Vector>) -> Result<(f64, Vector)> {
        let chart = Chart::new(s0);
        let k = chart.axes.len();
        let direction = |c: &Vector| lift(&chart.point(c));
        let (_, y0) = self.displacement(&direction(&Vector::zeros(k))?)?;
        // Directions transverse to the final leg and the receiver.
        let frame = {
            let d = self.start.len();
            let mut out: Vec<Vector> = Vec::new();
            let axes = (0..d).map(|i| {
                let mut e = Vector::zeros(d);
                e[i] = 1.0;
                e
            });
            for mut w in [y0.clone(), self.velocity.clone()].into_iter().chain(axes) {
                for _ in 0..2 {
                    for q in &out {
                        let c = q.dot(&w);
                        w.axpy(-c, q, 1.0);
                    }
                }
                if w.norm() > 1e-8 {
                    out.push(w.normalize());
                }
            }
            out.split_off(2)
        };
        let miss = |c: &Vector| -> Result<Vector> {
            let (d, _) = self.displacement(&direction(c)?)?;
            Ok(Vector::from_iterator(frame.len(), frame.iter().map(|e| e.dot(&d))))
        };
        let tol = 1e-10 * self.scene.scale();
        let mut c = Vector::zeros(k);
        let mut r = miss(&c)?;
        for _ in 0..40 {
            if r.norm() <= tol {
                break;
            }
            let h = 1e-7;
            let mut jac = Matrix::zeros(frame.len(), k);
            for j in 0..k {
                let mut cp = c.clone();
                cp[j] += h;
                let mut cm = c.clone();
                cm[j] -= h;
                let col = (miss(&cp)? - miss(&cm)?) / (2.0 * h);
                jac.set_column(j, &col);
            }
            let step = jac
                .svd(true, true)
                .solve(&(-&r), 1e-14)
                .map_err(|e| Error::SolverFailure(e.into()))?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cn = &c + &step * t;
                if let Ok(rn) = miss(&cn) {
                    if rn.norm() < r.norm() {
                        c = cn;
                        r = rn;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Ok((r.norm(), direction(&c)?))
    }
}
