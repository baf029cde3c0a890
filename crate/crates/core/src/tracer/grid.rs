//! Piecewise-constant approximation of a smooth metric on a box grid. Rays
//! run straight inside cells and refract at every face with a jump.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Annotation, Branch, TraceEvent, Termination, Trajectory};
use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::finsler::Metric;
use crate::geodesic::{integrate_geodesic, rk4_step, GeodesicState, IntegratorOptions, Segment, StopReason};
use crate::interface::{CrossingEvent, Interface};
use crate::linalg::Vector;
use crate::numeric::illinois;
use crate::snell::{incident_data, solve_reflection, solve_refraction, total_reflection_check, EventKind, Media};

#[derive(Clone, Debug)]
pub struct GridScene {
    pub reference: Metric,
    pub bounds: ChartBox,
    /// Cells per axis.
    pub resolution: Vec<usize>,
    /// Seed for the jitter that removes degenerate faces.
    pub seed: u64,
}

impl GridScene {
    pub fn uniform(reference: Metric, bounds: ChartBox, per_axis: usize, seed: u64) -> GridScene {
        let d = bounds.dim();
        GridScene {
            reference,
            bounds,
            resolution: vec![per_axis; d],
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CellComplex {
    pub reference: Metric,
    pub bounds: ChartBox,
    /// Cell boundaries per axis, increasing, including the box faces.
    pub edges: Vec<Vec<f64>>,
    /// Number of jitter rounds applied.
    pub jitter_rounds: u32,
}

impl CellComplex {
    pub fn dim(&self) -> usize {
        self.edges.len()
    }

    pub fn locate(&self, x: &Vector) -> Option<Vec<usize>> {
        self.edges
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let i = e.partition_point(|&b| b <= x[k]);
                (i >= 1 && i < e.len()).then(|| i - 1)
            })
            .collect()
    }

    pub fn center(&self, idx: &[usize]) -> Vector {
        Vector::from_iterator(idx.len(), idx.iter().enumerate().map(|(k, &i)| 0.5 * (self.edges[k][i] + self.edges[k][i + 1])))
    }

    /// Metric of a cell: the reference frozen at the cell centre.
    pub fn metric(&self, idx: &[usize]) -> Metric {
        self.reference.frozen_at(&self.center(idx))
    }

    fn cells(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let sizes: Vec<usize> = self.edges.iter().map(|e| e.len() - 1).collect();
        let total: usize = sizes.iter().product();
        (0..total).map(move |mut n| {
            sizes
                .iter()
                .map(|&s| {
                    let i = n % s;
                    n /= s;
                    i
                })
                .collect()
        })
    }

    /// First cell with a coordinate face of lightlike or borderline character.
    fn degenerate_face(&self) -> Result<Option<Vec<usize>>> {
        if self.reference.is_product() {
            // Faces are `Ker dt` or contain `∂t`; never lightlike.
            return Ok(None);
        }
        let d = self.dim();
        let axes: Vec<Vector> = (0..d)
            .map(|i| {
                let mut e = Vector::zeros(d);
                e[i] = 1.0;
                e
            })
            .collect();
        for idx in self.cells() {
            let c = self.center(&idx);
            for k in 0..d {
                let basis: Vec<Vector> = (0..d).filter(|&i| i != k).map(|i| axes[i].clone()).collect();
                let cls = self.reference.classify_subspace(&c, &basis)?;
                if cls.is_borderline() {
                    return Ok(Some(idx));
                }
            }
        }
        Ok(None)
    }
}

/// Builds the cell complex, jittering interior edges by up to `1e-3` of the
/// cell size when some face has degenerate causal character.
pub fn discretize(grid: &GridScene) -> Result<CellComplex> {
    let d = grid.bounds.dim();
    if grid.resolution.len() != d || grid.resolution.iter().any(|&r| r == 0) {
        return Err(Error::InvalidInput("resolution needs one positive entry per axis".into()));
    }
    let uniform: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let (a, b) = (grid.bounds.min[k], grid.bounds.max[k]);
            let r = grid.resolution[k];
            (0..=r).map(|i| a + (b - a) * i as f64 / r as f64).collect()
        })
        .collect();
    let mut cc = CellComplex {
        reference: grid.reference.clone(),
        bounds: grid.bounds.clone(),
        edges: uniform.clone(),
        jitter_rounds: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    while let Some(idx) = cc.degenerate_face()? {
        if cc.jitter_rounds == 8 {
            return Err(Error::InvalidInput(format!("faces of cell {idx:?} stay degenerate after jitter")));
        }
        cc.jitter_rounds += 1;
        for (k, e) in cc.edges.iter_mut().enumerate() {
            let h = (grid.bounds.max[k] - grid.bounds.min[k]) / grid.resolution[k] as f64;
            let last = e.len() - 1;
            for (i, b) in e.iter_mut().enumerate() {
                if i != 0 && i != last {
                    *b = uniform[k][i] + 1e-3 * h * rng.random_range(-1.0..1.0);
                }
            }
        }
    }
    Ok(cc)
}

fn same_constant_metric(a: &Metric, b: &Metric, x: &Vector) -> bool {
    match (a.quadratic_matrix(x), b.quadratic_matrix(x)) {
        (Some(ga), Some(gb)) => {
            ga == gb && matches!((a.time_vector(x), b.time_vector(x)), (Ok(ta), Ok(tb)) if ta == tb)
        }
        _ => false,
    }
}

/// Straight-line trace through the cell complex, refracting at faces with
/// the straight-oriented branch and reflecting under total reflection.
/// A face admitting neither is reported as `Trapped`.
pub fn trace_discretized(cc: &CellComplex, start: &Vector, dir: &Vector, max_events: usize) -> Result<Trajectory> {
    let d = cc.dim();
    let mut idx = cc.locate(start).ok_or_else(|| Error::Domain {
        point: start.as_slice().to_vec(),
    })?;
    let mut m = cc.metric(&idx);
    let mut x = start.clone();
    let mut v = m.project_to_cone(&x, dir)?;
    v /= m.time_form(&x)?.dot(&v);
    let mut s = 0.0;
    let mut segments = Vec::new();
    let mut events = Vec::new();
    let mut faces = 0usize;
    loop {
        let mut exit = (f64::INFINITY, 0usize, 0i8);
        for k in 0..d {
            if v[k] == 0.0 {
                continue;
            }
            let (edge, dirn) = if v[k] > 0.0 { (cc.edges[k][idx[k] + 1], 1) } else { (cc.edges[k][idx[k]], -1) };
            let t = ((edge - x[k]) / v[k]).max(0.0);
            if t < exit.0 {
                exit = (t, k, dirn);
            }
        }
        let (t, k, dirn) = exit;
        if !t.is_finite() {
            return Err(Error::Trapped("direction has no component".into()));
        }
        let mut y = &x + &v * t;
        let edge = if dirn > 0 { cc.edges[k][idx[k] + 1] } else { cc.edges[k][idx[k]] };
        y[k] = edge;
        segments.push(Segment {
            samples: vec![GeodesicState::new(x.clone(), v.clone(), s), GeodesicState::new(y.clone(), v.clone(), s + t)],
            medium: 1,
            stop_reason: StopReason::InterfaceHit,
        });
        s += t;
        x = y;
        let next = idx[k] as i64 + dirn as i64;
        if next < 0 || next as usize >= cc.edges[k].len() - 1 {
            segments.last_mut().expect("segment").stop_reason = StopReason::BoundsExit;
            return Ok(Trajectory {
                segments,
                events,
                arrival: None,
                termination: Termination::BoundsExit,
            });
        }
        if faces >= max_events {
            return Ok(Trajectory {
                segments,
                events,
                arrival: None,
                termination: Termination::MaxEvents,
            });
        }
        faces += 1;
        let mut nidx = idx.clone();
        nidx[k] = next as usize;
        let mn = cc.metric(&nidx);
        if same_constant_metric(&m, &mn, &x) {
            idx = nidx;
            m = mn;
            continue;
        }
        let mut normal = vec![0.0; d];
        normal[k] = dirn as f64;
        let media = Media::new(m.clone(), mn.clone(), Interface::plane(&normal, dirn as f64 * edge)?);
        let index = events.len();
        let inc = incident_data(&media, &x, &v).map_err(|e| e.at_event(index))?;
        let refraction = solve_refraction(&media, &inc).map_err(|e| e.at_event(index))?;
        let reflection = solve_reflection(&media, &inc).map_err(|e| e.at_event(index))?;
        let crossing = CrossingEvent {
            tau: s,
            point: x.clone(),
            incoming: v.clone(),
            tangent_basis: inc.tangent_basis.clone(),
            transverse: inc.nu.clone(),
            sample_index: 0,
        };
        let pick = |o: &crate::snell::SnellOutcome, kind: EventKind, straight_only: bool| {
            o.directions
                .iter()
                .position(|dd| !dd.exceptional && (dd.straight_oriented || !straight_only))
                .map(|i| Branch {
                    kind,
                    index: i,
                    direction: o.directions[i].v.clone(),
                    straight_oriented: o.directions[i].straight_oriented,
                })
        };
        let (branch, note) = match pick(&refraction, EventKind::Refraction, true) {
            Some(b) => (b, None),
            None => match pick(&reflection, EventKind::Reflection, false) {
                Some(b) => {
                    let note = if total_reflection_check(&inc) {
                        Annotation::TotalReflection
                    } else {
                        Annotation::ReflectedFallback
                    };
                    (b, Some(note))
                }
                None => {
                    return Err(Error::Trapped(format!("no outgoing direction at face {k} of cell {idx:?}")).at_event(index));
                }
            },
        };
        v = branch.direction.clone();
        let to = if branch.kind == EventKind::Refraction {
            idx = nidx;
            m = mn;
            2
        } else {
            1
        };
        events.push(TraceEvent {
            index,
            crossing,
            from_medium: 1,
            to_medium: Some(to),
            refraction,
            reflection,
            chosen: Some(branch),
            annotation: note,
        });
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub endpoint: Vector,
    pub error: f64,
    pub events: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub reference_endpoint: Vector,
    pub rows: Vec<ConvergenceRow>,
    /// Empirical orders between consecutive rows.
    pub orders: Vec<f64>,
    pub monotone: bool,
}

/// Exit point of the smooth geodesic from the grid's box.
pub fn smooth_exit(reference: &Metric, bounds: &ChartBox, start: &Vector, dir: &Vector, step: f64) -> Result<Vector> {
    let opts = IntegratorOptions {
        step,
        max_steps: 10_000_000,
        bounds: Some(bounds.clone()),
        ..IntegratorOptions::default()
    };
    let dir = reference.project_to_cone(start, dir)?;
    let seg = integrate_geodesic(reference, &GeodesicState::new(start.clone(), dir, 0.0), &|_, _| None, &opts, 1)?;
    if seg.stop_reason != StopReason::BoundsExit {
        return Err(Error::NoArrival("reference geodesic did not leave the box".into()));
    }
    let n = seg.samples.len();
    let prev = &seg.samples[n - 2];
    let h = seg.samples[n - 1].s - prev.s;
    let outside = |x: &Vector| -> f64 {
        (0..x.len())
            .map(|k| (bounds.min[k] - x[k]).max(x[k] - bounds.max[k]))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let g = |t: f64| rk4_step(reference, prev, t * h).map(|st| outside(&st.x)).unwrap_or(f64::NAN);
    let (ga, gb) = (g(0.0), g(1.0));
    let t = illinois(g, 0.0, 1.0, ga, gb, 1e-15, 0.0, 200)
        .ok_or_else(|| Error::SolverFailure("box exit refinement failed".into()))?;
    Ok(rk4_step(reference, prev, t * h)?.x)
}

/// Endpoint errors of discretised traces against the smooth geodesic as the
/// per-axis resolution grows.
pub fn convergence_study(grid: &GridScene, start: &Vector, dir: &Vector, resolutions: &[usize]) -> Result<ConvergenceTable> {
    let reference_endpoint = smooth_exit(&grid.reference, &grid.bounds, start, dir, 2e-4 * grid.bounds.diameter())?;
    let mut rows = Vec::new();
    for &r in resolutions {
        let g = GridScene {
            resolution: vec![r; grid.bounds.dim()],
            ..grid.clone()
        };
        let cc = discretize(&g)?;
        let t = trace_discretized(&cc, start, dir, usize::MAX)?;
        let endpoint = t.end().x.clone();
        rows.push(ConvergenceRow {
            resolution: r,
            error: (&endpoint - &reference_endpoint).norm(),
            endpoint,
            events: t.events.len(),
        });
    }
    let orders = rows
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[1].resolution as f64 / w[0].resolution as f64).ln())
        .collect();
    let monotone = rows.windows(2).all(|w| w[1].error < w[0].error);
    Ok(ConvergenceTable {
        reference_endpoint,
        rows,
        orders,
        monotone,
    })
}
