use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::linalg::{Matrix, Vector};
use crate::numeric::{central_gradient, central_hessian, homogeneous_step};

/// Smallest admissible gap `1 - |W|_h` for Randers wind.
pub const WIND_MARGIN: f64 = 1e-6;

/// A Minkowski norm field on the spatial slices, supplied through the library
/// API. Only `norm` is required; derivatives default to central differences.
pub trait MinkowskiNormField: Send + Sync {
    fn spatial_dim(&self) -> usize;

    fn norm(&self, p: &Vector, w: &Vector) -> f64;

    fn gradient(&self, p: &Vector, w: &Vector) -> Vector {
        central_gradient(|z| self.norm(p, z), w, homogeneous_step(1e-4, w))
    }

    /// `½ Hess(F²)` at `w`.
    fn fundamental_tensor(&self, p: &Vector, w: &Vector) -> Matrix {
        central_hessian(|z| self.norm(p, z).powi(2), w, homogeneous_step(1e-3, w)) * 0.5
    }
}

#[derive(Clone)]
pub enum SpatialNorm {
    /// `F = n(p) ‖w‖`.
    Isotropic { index: ScalarExpr },
    /// Zermelo navigation data: unit ball is the `h`-ball shifted by `W`.
    /// `h = None` means the Euclidean metric.
    Randers {
        h: Option<Vec<Vec<ScalarExpr>>>,
        wind: Vec<ScalarExpr>,
    },
    Custom(Arc<dyn MinkowskiNormField>),
}

impl fmt::Debug for SpatialNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpatialNorm::Isotropic { index } => f.debug_struct("Isotropic").field("index", index).finish(),
            SpatialNorm::Randers { h, wind } => f
                .debug_struct("Randers")
                .field("h", h)
                .field("wind", wind)
                .finish(),
            SpatialNorm::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

struct RandersData {
    h: Matrix,
    wind: Vector,
    lambda: f64,
}

impl SpatialNorm {
    fn randers_data(&self, p: &Vector, n: usize) -> Result<RandersData> {
        let SpatialNorm::Randers { h, wind } = self else {
            unreachable!()
        };
        let x = p.as_slice();
        let hm = match h {
            None => Matrix::identity(n, n),
            Some(rows) => Matrix::from_fn(n, n, |i, j| rows[i][j].eval(x)),
        };
        let w = Vector::from_iterator(n, wind.iter().map(|e| e.eval(x)));
        let w2 = (w.transpose() * &hm * &w)[(0, 0)];
        if !(w2.sqrt() < 1.0 - WIND_MARGIN) {
            return Err(Error::InvalidMetric(format!(
                "Randers wind has h-norm {:.9} >= 1 - {WIND_MARGIN:e}",
                w2.sqrt()
            )));
        }
        Ok(RandersData {
            h: hm,
            wind: w,
            lambda: 1.0 - w2,
        })
    }

    fn index(&self, p: &Vector) -> Result<f64> {
        let SpatialNorm::Isotropic { index } = self else {
            unreachable!()
        };
        let n = index.eval(p.as_slice());
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidMetric(format!("refractive index {n} is not positive")));
        }
        Ok(n)
    }

    /// `F_p(w)`.
    pub fn norm(&self, p: &Vector, w: &Vector) -> Result<f64> {
        match self {
            SpatialNorm::Isotropic { .. } => Ok(self.index(p)? * w.norm()),
            SpatialNorm::Randers { .. } => {
                let r = self.randers_data(p, w.len())?;
                let a = &r.h * w;
                let beta = r.wind.dot(&a);
                let q = r.lambda * w.dot(&a) + beta * beta;
                Ok((q.max(0.0).sqrt() - beta) / r.lambda)
            }
            SpatialNorm::Custom(c) => Ok(c.norm(p, w)),
        }
    }

    /// Gradient of `F_p` at `w`; zero at the origin for the builtin families.
    pub fn gradient(&self, p: &Vector, w: &Vector) -> Result<Vector> {
        match self {
            SpatialNorm::Isotropic { .. } => {
                let n = self.index(p)?;
                let nw = w.norm();
                if nw == 0.0 {
                    return Ok(Vector::zeros(w.len()));
                }
                Ok(w * (n / nw))
            }
            SpatialNorm::Randers { .. } => {
                let r = self.randers_data(p, w.len())?;
                let a = &r.h * w;
                let b = &r.h * &r.wind;
                let beta = r.wind.dot(&a);
                let s = (r.lambda * w.dot(&a) + beta * beta).max(0.0).sqrt();
                if s == 0.0 {
                    return Ok(Vector::zeros(w.len()));
                }
                Ok(((a * r.lambda + &b * beta) / s - b) / r.lambda)
            }
            SpatialNorm::Custom(c) => Ok(c.gradient(p, w)),
        }
    }

    /// `g^F_w = ½ Hess(F²)` at `w`.
    pub fn fundamental_tensor(&self, p: &Vector, w: &Vector) -> Result<Matrix> {
        let n = w.len();
        match self {
            SpatialNorm::Isotropic { .. } => {
                let idx = self.index(p)?;
                Ok(Matrix::identity(n, n) * (idx * idx))
            }
            SpatialNorm::Randers { .. } => {
                let r = self.randers_data(p, n)?;
                let a = &r.h * w;
                let b = &r.h * &r.wind;
                let beta = r.wind.dot(&a);
                let s = (r.lambda * w.dot(&a) + beta * beta).max(0.0).sqrt();
                if s == 0.0 {
                    return Err(Error::DegenerateTensor(
                        "Randers norm is not twice differentiable at the zero vector".into(),
                    ));
                }
                let f = (s - beta) / r.lambda;
                let c = &a * r.lambda + &b * beta;
                let grad = (&c / s - &b) / r.lambda;
                let hess = ((&r.h * r.lambda + &b * b.transpose()) / s
                    - &c * c.transpose() / (s * s * s))
                    / r.lambda;
                Ok(&grad * grad.transpose() + hess * f)
            }
            SpatialNorm::Custom(c) => Ok(c.fundamental_tensor(p, w)),
        }
    }

    /// Finsler angle `arccos(g_base(u, w) / (F(u) F(w)))`.
    pub fn angle(&self, p: &Vector, base: &Vector, u: &Vector, w: &Vector) -> Result<f64> {
        let g = self.fundamental_tensor(p, base)?;
        let c = (u.transpose() * g * w)[(0, 0)] / (self.norm(p, u)? * self.norm(p, w)?);
        Ok(c.clamp(-1.0, 1.0).acos())
    }

    /// Spatial derivatives of the isotropic fundamental tensor `n² I`:
    /// `∂_i (n²) = 2 n ∂_i n`.
    pub(crate) fn isotropic_index_and_grad(&self, p: &Vector) -> Option<(f64, Vector)> {
        match self {
            SpatialNorm::Isotropic { index } => {
                Some((index.eval(p.as_slice()), index.grad(p.as_slice())))
            }
            _ => None,
        }
    }
}
