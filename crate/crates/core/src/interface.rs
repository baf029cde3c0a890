//! Interfaces as level sets `η = {f = 0}` with `Q₁ = {f < 0}` and
//! `Q₂ = {f > 0}`: side tests, crossing refinement and adapted bases.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::finsler::{Metric, SubspaceClass};
use crate::geodesic::{rk4_step, GeodesicState, Segment};
use crate::linalg::{orthonormal_complement, Vector};
use crate::numeric::{central_gradient, illinois};

/// Relative half-width of the band around `f = 0` treated as on the interface.
pub const ON_INTERFACE_BAND: f64 = 1e-10;

/// Smallest admissible `‖∇f‖` at a queried point.
pub const MIN_GRADIENT: f64 = 1e-8;

/// A user level-set function. Only `value` is required.
pub trait LevelSetField: Send + Sync {
    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector {
        central_gradient(|z| self.value(z), x, 1e-5 * (1.0 + x.norm()))
    }
}

/// Builtin interface shapes available from scene files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `f = normal · x − offset`.
    Plane { normal: Vec<f64>, offset: f64 },
    /// `f = ‖x_axes − center‖ − radius`; the inside is `Q₁`.
    Cylinder { axes: Vec<usize>, center: Vec<f64>, radius: f64 },
    /// `f = x_coordinate − height(x)`; `height` must not depend on `x_coordinate`.
    Graph { coordinate: usize, height: ScalarExpr },
    /// `f = expr(x)`.
    Level { expr: ScalarExpr },
}

#[derive(Clone)]
enum Source {
    Builtin(Shape),
    Custom(Arc<dyn LevelSetField>),
}

#[derive(Clone)]
pub struct Interface {
    dim: usize,
    source: Source,
    /// Multiplies `f` by −1, swapping the two sides.
    flipped: bool,
}

impl fmt::Debug for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Interface");
        d.field("dim", &self.dim);
        match &self.source {
            Source::Builtin(s) => d.field("shape", s),
            Source::Custom(_) => d.field("shape", &"custom"),
        };
        d.field("flipped", &self.flipped).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Q1,
    Q2,
    OnInterface,
}

impl Side {
    /// Region label 1 or 2; `None` on the interface.
    pub fn medium(self) -> Option<u8> {
        match self {
            Side::Q1 => Some(1),
            Side::Q2 => Some(2),
            Side::OnInterface => None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub tau: f64,
    pub point: Vector,
    pub incoming: Vector,
    /// Euclidean-orthonormal basis of `T_pη`.
    pub tangent_basis: Vec<Vector>,
    /// `ν` with `∇f(ν) = 1`, pointing into `Q₂`.
    pub transverse: Vector,
    /// Index of the last sample strictly before the crossing.
    pub sample_index: usize,
}

impl Interface {
    pub fn new(dim: usize, shape: Shape) -> Result<Interface> {
        match &shape {
            Shape::Plane { normal, .. } => {
                if normal.len() != dim {
                    return Err(Error::InvalidInput(format!("plane normal has {} entries, expected {dim}", normal.len())));
                }
                if normal.iter().map(|c| c * c).sum::<f64>().sqrt() < MIN_GRADIENT {
                    return Err(Error::InvalidInput("plane normal vanishes".into()));
                }
            }
            Shape::Cylinder { axes, center, radius } => {
                if axes.is_empty() || axes.iter().any(|&a| a >= dim) || center.len() != axes.len() {
                    return Err(Error::InvalidInput("cylinder axes/center mismatch".into()));
                }
                if !(*radius > 0.0) {
                    return Err(Error::InvalidInput("cylinder radius must be positive".into()));
                }
            }
            Shape::Graph { coordinate, height } => {
                if *coordinate >= dim || height.arity() > dim {
                    return Err(Error::InvalidInput("graph coordinate or height arity out of range".into()));
                }
            }
            Shape::Level { expr } => {
                if expr.arity() > dim {
                    return Err(Error::InvalidInput("level expression arity exceeds dimension".into()));
                }
            }
        }
        Ok(Interface {
            dim,
            source: Source::Builtin(shape),
            flipped: false,
        })
    }

    /// `f = x^axis − offset`.
    pub fn coordinate_plane(dim: usize, axis: usize, offset: f64) -> Interface {
        let mut normal = vec![0.0; dim];
        normal[axis] = 1.0;
        Interface::new(dim, Shape::Plane { normal, offset }).expect("valid coordinate plane")
    }

    pub fn plane(normal: &[f64], offset: f64) -> Result<Interface> {
        Interface::new(
            normal.len(),
            Shape::Plane {
                normal: normal.to_vec(),
                offset,
            },
        )
    }

    pub fn custom(dim: usize, field: Arc<dyn LevelSetField>) -> Interface {
        Interface {
            dim,
            source: Source::Custom(field),
            flipped: false,
        }
    }

    pub fn shape(&self) -> Option<&Shape> {
        match &self.source {
            Source::Builtin(s) => Some(s),
            Source::Custom(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_flipped(&self) -> bool {
        self.flipped
    }

    /// The same hypersurface with `Q₁` and `Q₂` exchanged.
    pub fn flipped(&self) -> Interface {
        Interface {
            flipped: !self.flipped,
            ..self.clone()
        }
    }

    fn sign(&self) -> f64 {
        if self.flipped {
            -1.0
        } else {
            1.0
        }
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let xs = x.as_slice();
        let f = match &self.source {
            Source::Builtin(Shape::Plane { normal, offset }) => {
                normal.iter().zip(xs).map(|(a, b)| a * b).sum::<f64>() - offset
            }
            Source::Builtin(Shape::Cylinder { axes, center, radius }) => {
                axes.iter()
                    .zip(center)
                    .map(|(&a, c)| (xs[a] - c).powi(2))
                    .sum::<f64>()
                    .sqrt()
                    - radius
            }
            Source::Builtin(Shape::Graph { coordinate, height }) => xs[*coordinate] - height.eval(xs),
            Source::Builtin(Shape::Level { expr }) => expr.eval(xs),
            Source::Custom(c) => c.value(x),
        };
        self.sign() * f
    }

    /// `∇f` as a covector, without the magnitude check.
    fn raw_gradient(&self, x: &Vector) -> Vector {
        let xs = x.as_slice();
        let g = match &self.source {
            Source::Builtin(Shape::Plane { normal, .. }) => Vector::from_row_slice(normal),
            Source::Builtin(Shape::Cylinder { axes, center, .. }) => {
                let mut g = Vector::zeros(self.dim);
                let r = axes
                    .iter()
                    .zip(center)
                    .map(|(&a, c)| (xs[a] - c).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if r > 0.0 {
                    for (&a, c) in axes.iter().zip(center) {
                        g[a] = (xs[a] - c) / r;
                    }
                }
                g
            }
            Source::Builtin(Shape::Graph { coordinate, height }) => {
                let mut g = -pad(height.grad(xs), self.dim);
                g[*coordinate] += 1.0;
                g
            }
            Source::Builtin(Shape::Level { expr }) => pad(expr.grad(xs), self.dim),
            Source::Custom(c) => c.gradient(x),
        };
        g * self.sign()
    }

    /// `∇f(x)`; errors where it is too small to define a hypersurface.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let g = self.raw_gradient(x);
        if !(g.norm() >= MIN_GRADIENT) {
            return Err(Error::InvalidInput(format!(
                "interface gradient {:e} below {MIN_GRADIENT:e} at {:?}",
                g.norm(),
                x.as_slice()
            )));
        }
        Ok(g)
    }

    /// Tolerance for `|f(x)|` to count as on the interface.
    pub fn band(&self, x: &Vector) -> f64 {
        ON_INTERFACE_BAND * (self.raw_gradient(x).norm() * (1.0 + x.norm())).max(1.0)
    }

    pub fn side(&self, x: &Vector) -> Side {
        let f = self.value(x);
        if f.abs() <= self.band(x) {
            Side::OnInterface
        } else if f < 0.0 {
            Side::Q1
        } else {
            Side::Q2
        }
    }

    /// Euclidean-orthonormal basis of `T_pη = ker ∇f`.
    pub fn tangent_basis(&self, x: &Vector) -> Result<Vec<Vector>> {
        Ok(orthonormal_complement(&self.gradient(x)?))
    }

    /// `ν = ∇f / ‖∇f‖²`, so `∇f(ν) = 1`.
    pub fn transverse(&self, x: &Vector) -> Result<Vector> {
        let g = self.gradient(x)?;
        Ok(&g / g.norm_squared())
    }

    fn check_on(&self, x: &Vector) -> Result<()> {
        let f = self.value(x);
        if f.abs() > 10.0 * self.band(x) {
            return Err(Error::InvalidInput(format!(
                "point {:?} is off the interface (f = {f:e})",
                x.as_slice()
            )));
        }
        Ok(())
    }

    /// Causal character of `T_pη` for the cone of `m`.
    pub fn classify(&self, m: &Metric, x: &Vector) -> Result<SubspaceClass> {
        self.check_on(x)?;
        m.classify_subspace(x, &self.tangent_basis(x)?)
    }

    /// Refines the first sign change of `f` along `seg` by re-integrating
    /// from the sample before it with a variable final step.
    pub fn locate_crossing(&self, m: &Metric, seg: &Segment) -> Result<CrossingEvent> {
        let s = &seg.samples;
        let vals: Vec<f64> = s.iter().map(|st| self.value(&st.x)).collect();
        let start_sign = vals.iter().find(|v| v.abs() > self.band(&s[0].x)).map(|v| v.signum());
        let Some(sg) = start_sign else {
            return Err(Error::NoCrossing("segment lies on the interface".into()));
        };
        let mut idx = None;
        for i in 1..s.len() {
            if vals[i - 1] * sg > 0.0 && (vals[i] * sg <= 0.0 || vals[i].abs() <= self.band(&s[i].x)) {
                idx = Some(i - 1);
                break;
            }
        }
        let Some(i) = idx else {
            return Err(Error::NoCrossing("no sign change of the level function".into()));
        };
        let a = &s[i];
        let h = s[i + 1].s - a.s;
        let state_at = |dh: f64| -> Result<GeodesicState> {
            if dh == 0.0 {
                return Ok(a.clone());
            }
            let mut st = rk4_step(m, a, dh)?;
            st.y = m.project_to_cone(&st.x, &st.y)?;
            Ok(st)
        };
        let end = state_at(h)?;
        let f0 = vals[i];
        let f1 = self.value(&end.x);
        let band = self.band(&end.x);
        let dh = if f1.abs() <= band {
            h
        } else if f0 * f1 > 0.0 {
            // Touched the band at the sample but the re-integrated endpoint
            // stays on the near side: treat the sample as the crossing.
            return self.crossing_at(&s[i + 1], i);
        } else {
            let g = |t: f64| state_at(t).map(|st| self.value(&st.x)).unwrap_or(f64::NAN);
            illinois(g, 0.0, h, f0, f1, 1e-15 * h.abs(), band, 200)
                .ok_or_else(|| Error::NoCrossing("crossing refinement did not converge".into()))?
        };
        let st = state_at(dh)?;
        self.crossing_at(&st, i)
    }

    fn crossing_at(&self, st: &GeodesicState, i: usize) -> Result<CrossingEvent> {
        let grad = self.gradient(&st.x)?;
        let dn = grad.dot(&st.y).abs() / (grad.norm() * st.y.norm());
        if dn < 1e-8 {
            return Err(Error::GrazingContact { s: st.s });
        }
        Ok(CrossingEvent {
            tau: st.s,
            point: st.x.clone(),
            incoming: st.y.clone(),
            tangent_basis: orthonormal_complement(&grad),
            transverse: &grad / grad.norm_squared(),
            sample_index: i,
        })
    }
}

fn pad(v: Vector, n: usize) -> Vector {
    if v.len() == n {
        v
    } else {
        let mut out = Vector::zeros(n);
        for (i, c) in v.iter().enumerate().take(n) {
            out[i] = *c;
        }
        out
    }
}
