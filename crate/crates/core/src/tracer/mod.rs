//! Piecewise lightlike trajectories through two media: geodesic segments
//! glued at interface events by the refraction or reflection law.

mod fermat;
mod grid;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use fermat::{
    aim_at_receiver, fermat_criticality_check, fermat_oracle, timelike_connector_search, ConnectorResult, CONNECTOR_THRESHOLD,
    CriticalityReport, HessianSignature, LocalModel, OracleResult, Verdict,
};
pub use grid::{convergence_study, discretize, trace_discretized, CellComplex, ConvergenceRow, ConvergenceTable, GridScene};

use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::geodesic::{integrate_geodesic, rk4_step, GeodesicState, IntegratorOptions, Segment, StopReason};
use crate::interface::{CrossingEvent, Interface, Side};
use crate::linalg::{orthonormalize, Vector};
use crate::numeric::golden_min;
use crate::snell::{
    incident_data, receiver_checks, solve_reflection, solve_refraction, total_reflection_check, EventKind, Media,
    ReceiverReport, ReceiverTangent, SnellOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchPolicy {
    /// Straight-oriented refraction; reflected branch on total reflection.
    SnellConeGeodesicOnly,
    /// Every proper branch (only through `trace_all_branches`).
    AllBranches,
    ReflectOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    Point { point: Vec<f64> },
    /// Submanifold through `point` with tangent `basis`.
    Submanifold { point: Vec<f64>, basis: Vec<Vec<f64>> },
}

impl Source {
    pub fn point(&self) -> Vector {
        match self {
            Source::Point { point } | Source::Submanifold { point, .. } => Vector::from_row_slice(point),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Receiver {
    /// Curve `α(s) = origin + s · velocity`.
    Line { origin: Vec<f64>, velocity: Vec<f64> },
    /// Affine submanifold through `point` spanned by `basis`, with temporal
    /// function `t_B(x) = temporal · x`.
    Affine {
        point: Vec<f64>,
        basis: Vec<Vec<f64>>,
        temporal: Vec<f64>,
    },
}

impl Receiver {
    /// Observer at rest at spatial position `x0`: `α(t) = (t, x0)`.
    pub fn observer(x0: &[f64]) -> Receiver {
        let mut origin = vec![0.0];
        origin.extend_from_slice(x0);
        let mut velocity = vec![0.0; origin.len()];
        velocity[0] = 1.0;
        Receiver::Line { origin, velocity }
    }

    fn dim(&self) -> usize {
        match self {
            Receiver::Line { origin, .. } => origin.len(),
            Receiver::Affine { point, .. } => point.len(),
        }
    }

    fn affine_basis(&self) -> Option<(Vector, Vec<Vector>)> {
        match self {
            Receiver::Affine { point, basis, .. } => {
                let b: Vec<Vector> = basis.iter().map(|v| Vector::from_row_slice(v)).collect();
                Some((Vector::from_row_slice(point), orthonormalize(&b, 1e-12)?))
            }
            _ => None,
        }
    }

    /// Euclidean distance from `x` to the receiver.
    pub fn distance(&self, x: &Vector) -> f64 {
        match self {
            Receiver::Line { origin, velocity } => {
                let o = Vector::from_row_slice(origin);
                let a = Vector::from_row_slice(velocity);
                let r = x - &o;
                (&r - &a * (r.dot(&a) / a.norm_squared())).norm()
            }
            Receiver::Affine { .. } => {
                let Some((p, b)) = self.affine_basis() else {
                    return f64::INFINITY;
                };
                let mut r = x - p;
                for bi in &b {
                    let c = r.dot(bi);
                    r.axpy(-c, bi, 1.0);
                }
                r.norm()
            }
        }
    }

    /// Receiver parameter of the point of the receiver nearest to `x`.
    pub fn parameter(&self, x: &Vector) -> f64 {
        match self {
            Receiver::Line { origin, velocity } => {
                let o = Vector::from_row_slice(origin);
                let a = Vector::from_row_slice(velocity);
                (x - o).dot(&a) / a.norm_squared()
            }
            Receiver::Affine { temporal, .. } => Vector::from_row_slice(temporal).dot(x),
        }
    }

    /// Hypersurface receivers are detected by a sign change instead of a tube.
    fn as_hypersurface(&self) -> Option<Interface> {
        let (p, b) = self.affine_basis()?;
        if b.len() + 1 != p.len() {
            return None;
        }
        let d = p.len();
        let n = (0..d)
            .map(|i| {
                let mut e = Vector::zeros(d);
                e[i] = 1.0;
                for bi in &b {
                    let c = e.dot(bi);
                    e.axpy(-c, bi, 1.0);
                }
                e
            })
            .max_by(|a, c| a.norm().total_cmp(&c.norm()))?;
        let n = n.normalize();
        Interface::plane(n.as_slice(), n.dot(&p)).ok()
    }

    pub fn tangent(&self) -> Result<ReceiverTangent> {
        match self {
            Receiver::Line { velocity, .. } => Ok(ReceiverTangent::Curve(Vector::from_row_slice(velocity))),
            Receiver::Affine { temporal, .. } => {
                let (_, b) = self
                    .affine_basis()
                    .ok_or_else(|| Error::InvalidInput("receiver basis is rank deficient".into()))?;
                let t = Vector::from_row_slice(temporal);
                let c = Vector::from_iterator(b.len(), b.iter().map(|bi| t.dot(bi)));
                if c.norm() == 0.0 {
                    return Err(Error::InvalidInput("temporal function is constant on the receiver".into()));
                }
                let kernel = crate::linalg::orthonormal_complement(&c)
                    .into_iter()
                    .map(|k| {
                        let mut w = Vector::zeros(t.len());
                        for (ki, bi) in k.iter().zip(&b) {
                            w.axpy(*ki, bi, 1.0);
                        }
                        w
                    })
                    .collect();
                Ok(ReceiverTangent::Submanifold {
                    dim: b.len(),
                    kernel_basis: kernel,
                })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceOptions {
    /// RK4 step; `None` means `1e-3` of the chart diameter.
    pub step: Option<f64>,
    pub max_steps: usize,
    /// Receiver tube radius relative to the chart diameter.
    pub tube: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            step: None,
            max_steps: 200_000,
            tube: 1e-6,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub media: Media,
    pub bounds: ChartBox,
    pub source: Option<Source>,
    pub receiver: Option<Receiver>,
    pub options: TraceOptions,
    pub branch_policy: BranchPolicy,
}

impl Scene {
    pub fn new(media: Media, bounds: ChartBox) -> Scene {
        Scene {
            media,
            bounds,
            source: None,
            receiver: None,
            options: TraceOptions::default(),
            branch_policy: BranchPolicy::SnellConeGeodesicOnly,
        }
    }

    pub fn with_receiver(mut self, r: Receiver) -> Scene {
        self.receiver = Some(r);
        self
    }

    pub fn with_source(mut self, s: Source) -> Scene {
        self.source = Some(s);
        self
    }

    pub fn with_policy(mut self, p: BranchPolicy) -> Scene {
        self.branch_policy = p;
        self
    }

    pub fn scale(&self) -> f64 {
        self.bounds.diameter()
    }

    pub fn step(&self) -> f64 {
        self.options.step.unwrap_or(1e-3 * self.scale())
    }

    /// Media oriented so that `medium` is `Q₁`.
    pub fn local_media(&self, medium: u8) -> Media {
        if medium == 1 {
            self.media.clone()
        } else {
            self.media.reversed()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Annotation {
    /// No refraction but a unique reflection.
    TotalReflection,
    /// Refraction exists but none is straight oriented; reflected instead.
    ReflectedFallback,
    /// Neither a usable refracted nor reflected direction.
    Unresolvable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Branch {
    pub kind: EventKind,
    /// Index into the outcome's direction list.
    pub index: usize,
    pub direction: Vector,
    pub straight_oriented: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceEvent {
    pub index: usize,
    /// Crossing data in the orientation where `from_medium` is `Q₁`.
    pub crossing: CrossingEvent,
    pub from_medium: u8,
    pub to_medium: Option<u8>,
    pub refraction: SnellOutcome,
    pub reflection: SnellOutcome,
    pub chosen: Option<Branch>,
    pub annotation: Option<Annotation>,
}

impl TraceEvent {
    pub fn outcome(&self, kind: EventKind) -> &SnellOutcome {
        match kind {
            EventKind::Refraction => &self.refraction,
            EventKind::Reflection => &self.reflection,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    ReceiverHit,
    BoundsExit,
    MaxEvents,
    MaxSteps,
    Unresolvable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub segments: Vec<Segment>,
    pub events: Vec<TraceEvent>,
    pub arrival: Option<f64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn start(&self) -> &GeodesicState {
        self.segments[0].first()
    }

    pub fn end(&self) -> &GeodesicState {
        self.segments.last().expect("trajectories have a segment").last()
    }

    pub fn samples(&self) -> impl Iterator<Item = (usize, &GeodesicState)> {
        self.segments
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.samples.iter().map(move |st| (i, st)))
    }

    /// One row per sample: `segment, s, x…, y…`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let d = self.start().x.len();
        let mut header = vec!["segment".to_string(), "s".to_string()];
        header.extend((0..d).map(|i| format!("x{i}")));
        header.extend((0..d).map(|i| format!("y{i}")));
        writeln!(w, "{}", header.join(","))?;
        for (i, st) in self.samples() {
            let mut row = vec![i.to_string(), format!("{:.17e}", st.s)];
            row.extend(st.x.iter().map(|c| format!("{c:.17e}")));
            row.extend(st.y.iter().map(|c| format!("{c:.17e}")));
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Position on the cubic Hermite interpolant between two samples.
fn hermite(a: &GeodesicState, b: &GeodesicState, t: f64) -> Vector {
    let h = b.s - a.s;
    let (t2, t3) = (t * t, t * t * t);
    &a.x * (2.0 * t3 - 3.0 * t2 + 1.0)
        + &a.y * ((t3 - 2.0 * t2 + t) * h)
        + &b.x * (-2.0 * t3 + 3.0 * t2)
        + &b.y * ((t3 - t2) * h)
}

/// Fraction of the step where the interpolated distance to the receiver is
/// smallest, if that distance is inside the tube.
fn receiver_touch(rx: &Receiver, a: &GeodesicState, b: &GeodesicState, tube: f64) -> Option<f64> {
    let chord = (&b.x - &a.x).norm();
    let (da, db) = (rx.distance(&a.x), rx.distance(&b.x));
    if da.min(db) > chord + tube {
        return None;
    }
    let (t, d) = golden_min(|t| rx.distance(&hermite(a, b, t)), 0.0, 1.0, 1e-12);
    let (t, d) = [(0.0, da), (1.0, db), (t, d)]
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    (d <= tube && t > 0.0).then_some(t)
}

struct Cursor {
    segments: Vec<Segment>,
    events: Vec<TraceEvent>,
    state: GeodesicState,
    medium: u8,
}

enum Leg {
    Done(Trajectory),
    /// Interface event with outcomes resolved, awaiting a branch choice.
    Event(Cursor, Box<TraceEvent>),
}

fn run_leg(scene: &Scene, mut cur: Cursor, max_events: usize) -> Result<Leg> {
    let m = scene.media.metric(cur.medium).clone();
    let iface = &scene.media.interface;
    let other = if cur.medium == 1 { Side::Q2 } else { Side::Q1 };
    let tube = scene.options.tube * scene.scale();
    let rx = scene.receiver.clone();
    let rx_surface = rx.as_ref().and_then(|r| r.as_hypersurface());
    let stop = |prev: &GeodesicState, next: &GeodesicState| -> Option<StopReason> {
        if iface.side(&next.x) == other {
            return Some(StopReason::InterfaceHit);
        }
        if let Some(r) = &rx {
            let hit = match &rx_surface {
                Some(h) => h.value(&prev.x) * h.value(&next.x) <= 0.0 && h.value(&prev.x) != 0.0,
                None => receiver_touch(r, prev, next, tube).is_some(),
            };
            if hit {
                return Some(StopReason::ReceiverHit);
            }
        }
        None
    };
    let opts = IntegratorOptions {
        step: scene.step(),
        max_steps: scene.options.max_steps,
        s_max: None,
        bounds: Some(scene.bounds.clone()),
        normalize: true,
        project: true,
    };
    let index = cur.events.len();
    let mut seg = integrate_geodesic(&m, &cur.state, &stop, &opts, cur.medium).map_err(|e| e.at_event(index))?;
    let finish = |cur: Cursor, seg: Segment, termination: Termination, arrival: Option<f64>| {
        let mut segments = cur.segments;
        segments.push(seg);
        Trajectory {
            segments,
            events: cur.events,
            arrival,
            termination,
        }
    };
    match seg.stop_reason {
        StopReason::BoundsExit => Ok(Leg::Done(finish(cur, seg, Termination::BoundsExit, None))),
        StopReason::MaxSteps | StopReason::ParameterLimit => Ok(Leg::Done(finish(cur, seg, Termination::MaxSteps, None))),
        StopReason::ReceiverHit => {
            let r = rx.as_ref().expect("receiver hit needs a receiver");
            let n = seg.samples.len();
            let (a, b) = (seg.samples[n - 2].clone(), seg.samples[n - 1].clone());
            let end = match &rx_surface {
                Some(h) => {
                    let tmp = Segment {
                        samples: vec![a.clone(), b.clone()],
                        medium: seg.medium,
                        stop_reason: StopReason::ReceiverHit,
                    };
                    let ev = h.locate_crossing(&m, &tmp).map_err(|e| e.at_event(index))?;
                    GeodesicState::new(ev.point, ev.incoming, ev.tau)
                }
                None => {
                    let t = receiver_touch(r, &a, &b, tube).unwrap_or(1.0);
                    let h = b.s - a.s;
                    let (t, _) = golden_min(
                        |tt| {
                            rk4_step(&m, &a, tt * h)
                                .map(|st| r.distance(&st.x))
                                .unwrap_or(f64::INFINITY)
                        },
                        (t - 0.05).max(0.0),
                        (t + 0.05).min(1.0),
                        1e-14,
                    );
                    let mut st = rk4_step(&m, &a, t * h).map_err(|e| e.at_event(index))?;
                    st.y = m.project_to_cone(&st.x, &st.y).map_err(|e| e.at_event(index))?;
                    st
                }
            };
            seg.samples.pop();
            if end.s > a.s {
                seg.samples.push(end.clone());
            }
            let arrival = Some(r.parameter(&end.x));
            Ok(Leg::Done(finish(cur, seg, Termination::ReceiverHit, arrival)))
        }
        StopReason::InterfaceHit => {
            let local = scene.local_media(cur.medium);
            let ev = local.interface.locate_crossing(&m, &seg).map_err(|e| e.at_event(index))?;
            seg.samples.truncate(ev.sample_index + 1);
            let hit = GeodesicState::new(ev.point.clone(), ev.incoming.clone(), ev.tau);
            if ev.tau > seg.last().s {
                seg.samples.push(hit.clone());
            }
            cur.segments.push(seg);
            cur.state = hit;
            if index >= max_events {
                return Ok(Leg::Done(Trajectory {
                    segments: cur.segments,
                    events: cur.events,
                    arrival: None,
                    termination: Termination::MaxEvents,
                }));
            }
            let inc = incident_data(&local, &ev.point, &ev.incoming).map_err(|e| e.at_event(index))?;
            let refraction = solve_refraction(&local, &inc).map_err(|e| e.at_event(index))?;
            let reflection = solve_reflection(&local, &inc).map_err(|e| e.at_event(index))?;
            let total = total_reflection_check(&inc);
            let event = TraceEvent {
                index,
                crossing: ev,
                from_medium: cur.medium,
                to_medium: None,
                refraction,
                reflection,
                chosen: None,
                annotation: total.then_some(Annotation::TotalReflection),
            };
            Ok(Leg::Event(cur, Box::new(event)))
        }
    }
}

fn branch_of(ev: &TraceEvent, kind: EventKind, index: usize) -> Branch {
    let d = &ev.outcome(kind).directions[index];
    Branch {
        kind,
        index,
        direction: d.v.clone(),
        straight_oriented: d.straight_oriented,
    }
}

/// Branch selected by `policy`, with its annotation.
fn choose(ev: &TraceEvent, policy: BranchPolicy) -> (Option<Branch>, Option<Annotation>) {
    let first_proper = |kind: EventKind| {
        ev.outcome(kind)
            .directions
            .iter()
            .position(|d| !d.exceptional)
            .map(|i| branch_of(ev, kind, i))
    };
    match policy {
        BranchPolicy::ReflectOnly => match first_proper(EventKind::Reflection) {
            Some(b) => (Some(b), ev.annotation),
            None => (None, Some(Annotation::Unresolvable)),
        },
        BranchPolicy::SnellConeGeodesicOnly | BranchPolicy::AllBranches => {
            let straight = ev
                .refraction
                .directions
                .iter()
                .position(|d| d.straight_oriented && !d.exceptional)
                .map(|i| branch_of(ev, EventKind::Refraction, i));
            if let Some(b) = straight {
                return (Some(b), None);
            }
            match first_proper(EventKind::Reflection) {
                Some(b) => {
                    let note = if ev.annotation == Some(Annotation::TotalReflection) {
                        Annotation::TotalReflection
                    } else {
                        Annotation::ReflectedFallback
                    };
                    (Some(b), Some(note))
                }
                None => (None, Some(Annotation::Unresolvable)),
            }
        }
    }
}

fn apply(mut cur: Cursor, mut ev: TraceEvent, branch: Option<Branch>, note: Option<Annotation>) -> std::result::Result<Cursor, Trajectory> {
    ev.annotation = note;
    match branch {
        None => {
            cur.events.push(ev);
            Err(Trajectory {
                segments: cur.segments,
                events: cur.events,
                arrival: None,
                termination: Termination::Unresolvable,
            })
        }
        Some(b) => {
            let next = match b.kind {
                EventKind::Refraction => 3 - cur.medium,
                EventKind::Reflection => cur.medium,
            };
            cur.state = GeodesicState::new(cur.state.x.clone(), b.direction.clone(), cur.state.s);
            ev.to_medium = Some(next);
            ev.chosen = Some(b);
            cur.events.push(ev);
            cur.medium = next;
            Ok(cur)
        }
    }
}

fn start_cursor(scene: &Scene, start: &Vector, dir: &Vector) -> Result<Cursor> {
    if start.len() != scene.media.metric1.dim() || dir.len() != start.len() {
        return Err(Error::InvalidInput("start point or direction has the wrong dimension".into()));
    }
    if !scene.bounds.contains(start) {
        return Err(Error::Domain {
            point: start.as_slice().to_vec(),
        });
    }
    let medium = scene
        .media
        .interface
        .side(start)
        .medium()
        .ok_or_else(|| Error::InvalidInput("start point lies on the interface".into()))?;
    Ok(Cursor {
        segments: Vec::new(),
        events: Vec::new(),
        state: GeodesicState::new(start.clone(), dir.clone(), 0.0),
        medium,
    })
}

/// Traces from `start` along the lightlike `dir`, resolving at most
/// `max_events` interface events with the scene's branch policy.
pub fn trace(scene: &Scene, start: &Vector, dir: &Vector, max_events: usize) -> Result<Trajectory> {
    let mut cur = start_cursor(scene, start, dir)?;
    loop {
        match run_leg(scene, cur, max_events)? {
            Leg::Done(t) => return Ok(t),
            Leg::Event(c, ev) => {
                let (b, note) = choose(&ev, scene.branch_policy);
                match apply(c, *ev, b, note) {
                    Ok(next) => cur = next,
                    Err(t) => return Ok(t),
                }
            }
        }
    }
}

/// Follows every proper refracted and reflected branch at each event, up to
/// 64 trajectories.
pub fn trace_all_branches(scene: &Scene, start: &Vector, dir: &Vector, max_events: usize) -> Result<Vec<Trajectory>> {
    const CAP: usize = 64;
    let mut done = Vec::new();
    let mut stack = vec![start_cursor(scene, start, dir)?];
    while let Some(cur) = stack.pop() {
        if done.len() + stack.len() >= CAP {
            break;
        }
        match run_leg(scene, cur, max_events)? {
            Leg::Done(t) => done.push(t),
            Leg::Event(c, ev) => {
                let mut branches = Vec::new();
                for kind in [EventKind::Refraction, EventKind::Reflection] {
                    for (i, d) in ev.outcome(kind).directions.iter().enumerate() {
                        if !d.exceptional {
                            branches.push(branch_of(&ev, kind, i));
                        }
                    }
                }
                if branches.is_empty() {
                    if let Err(t) = apply(c, *ev, None, Some(Annotation::Unresolvable)) {
                        done.push(t);
                    }
                    continue;
                }
                for b in branches.into_iter().rev() {
                    let cc = Cursor {
                        segments: c.segments.clone(),
                        events: c.events.clone(),
                        state: c.state.clone(),
                        medium: c.medium,
                    };
                    let note = if b.kind == EventKind::Reflection { ev.annotation } else { None };
                    if let Ok(next) = apply(cc, (*ev).clone(), Some(b), note) {
                        stack.push(next);
                    }
                }
            }
        }
    }
    Ok(done)
}

/// Traces many rays concurrently.
pub fn trace_bundle(scene: &Scene, rays: &[(Vector, Vector)], max_events: usize) -> Vec<Result<Trajectory>> {
    rays.par_iter().map(|(x, v)| trace(scene, x, v, max_events)).collect()
}

/// Receiver parameter at which `traj` arrives.
pub fn arrival_time(traj: &Trajectory, receiver: &Receiver, tol: f64) -> Result<f64> {
    let end = &traj.end().x;
    if end.len() != receiver.dim() {
        return Err(Error::InvalidInput("receiver dimension differs from the trajectory".into()));
    }
    let d = receiver.distance(end);
    if d > tol {
        return Err(Error::NoArrival(format!("terminal point is {d:e} from the receiver")));
    }
    Ok(receiver.parameter(end))
}

/// Normalised `max |dL₁(γ̇(a))(w)|` over the source tangent basis.
pub fn source_orthogonality_check(scene: &Scene, traj: &Trajectory) -> Result<f64> {
    let Some(Source::Submanifold { basis, .. }) = &scene.source else {
        return Ok(0.0);
    };
    let st = traj.start();
    let medium = scene.media.interface.side(&st.x).medium().unwrap_or(1);
    let d = scene.media.metric(medium).dl(&st.x, &st.y)?;
    let mut worst = 0.0f64;
    for w in basis {
        let w = Vector::from_row_slice(w);
        worst = worst.max(d.dot(&w).abs() / (d.norm() * w.norm()));
    }
    Ok(worst)
}

/// Fermat hypotheses at the receiver for a trajectory that arrived.
pub fn receiver_report(scene: &Scene, traj: &Trajectory) -> Result<ReceiverReport> {
    let rx = scene
        .receiver
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("scene has no receiver".into()))?;
    let end = traj.end();
    let medium = traj.segments.last().map(|s| s.medium).unwrap_or(1);
    receiver_checks(scene.media.metric(medium), &end.x, &end.y, &rx.tangent()?)
}
