use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::norm::SpatialNorm;
use super::{CausalChar, SubspaceClass, VectorClass, LIGHTLIKE_BAND};
use crate::chart::ChartBox;
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::linalg::{orthonormal_complement, orthonormalize, signature, sym_max_eigen, Matrix, Vector};
use crate::numeric::{central_gradient, central_hessian, golden_max, homogeneous_step, illinois};

/// A Lorentz-Finsler metric supplied through the library API. Only `l` and
/// the time orientation are required; derivatives default to central
/// differences.
pub trait LorentzFinslerField: Send + Sync {
    fn dim(&self) -> usize;

    fn l(&self, x: &Vector, v: &Vector) -> f64;

    fn dl(&self, x: &Vector, v: &Vector) -> Vector {
        central_gradient(|w| self.l(x, w), v, homogeneous_step(1e-4, v))
    }

    fn fundamental_tensor(&self, x: &Vector, v: &Vector) -> Matrix {
        central_hessian(|w| self.l(x, w), v, homogeneous_step(1e-3, v)) * 0.5
    }

    /// Timelike one-form `ω` of the cone triple.
    fn time_form(&self, x: &Vector) -> Vector;

    /// Timelike vector `T` with `ω(T) = 1`.
    fn time_vector(&self, x: &Vector) -> Vector;
}

pub type MatrixFieldFn = dyn Fn(&Vector) -> Matrix + Send + Sync;

#[derive(Clone)]
pub enum QuadraticCoeffs {
    Constant(Matrix),
    Entries(Vec<Vec<ScalarExpr>>),
    /// `G(x) = factor(x) · base`
    Conformal { base: Matrix, factor: ScalarExpr },
    Field(Arc<MatrixFieldFn>),
}

#[derive(Clone)]
pub struct QuadraticField {
    pub coeffs: QuadraticCoeffs,
    pub time_vector: Vec<ScalarExpr>,
}

#[derive(Clone)]
pub enum Family {
    Quadratic(QuadraticField),
    Product(SpatialNorm),
    Custom(Arc<dyn LorentzFinslerField>),
}

/// Cheaply clonable handle on a metric family, optionally frozen at a point
/// (constant coefficients) and restricted to a chart box.
#[derive(Clone)]
pub struct Metric {
    dim: usize,
    family: Arc<Family>,
    frozen: Option<Arc<Vector>>,
    bounds: Option<Arc<ChartBox>>,
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metric")
            .field("family", &self.family_name())
            .field("dim", &self.dim)
            .field("frozen", &self.frozen.as_deref().map(|v| v.as_slice().to_vec()))
            .finish()
    }
}

fn diag(d: &[f64]) -> Matrix {
    Matrix::from_diagonal(&Vector::from_row_slice(d))
}

fn consts(v: &[f64]) -> Vec<ScalarExpr> {
    v.iter().map(|&c| ScalarExpr::constant(c)).collect()
}

impl Metric {
    fn from_family(dim: usize, family: Family) -> Result<Metric> {
        if dim < 3 {
            return Err(Error::InvalidMetric(format!("dimension {dim} < 3")));
        }
        Ok(Metric {
            dim,
            family: Arc::new(family),
            frozen: None,
            bounds: None,
        })
    }

    /// `diag(1, -1, …, -1)` with `T = ∂_0`.
    pub fn minkowski(dim: usize) -> Metric {
        let mut d = vec![-1.0; dim];
        d[0] = 1.0;
        let mut t = vec![0.0; dim];
        t[0] = 1.0;
        Metric::quadratic(diag(&d), Vector::from_vec(t)).expect("Minkowski is Lorentzian")
    }

    /// Constant quadratic metric `vᵀ G v` with time orientation `t`.
    pub fn quadratic(g: Matrix, t: Vector) -> Result<Metric> {
        let dim = g.nrows();
        if g.ncols() != dim || t.len() != dim {
            return Err(Error::InvalidMetric("matrix/time-vector dimensions disagree".into()));
        }
        if (&g - g.transpose()).norm() > 1e-12 * g.norm() {
            return Err(Error::InvalidMetric("coefficient matrix is not symmetric".into()));
        }
        if signature(&g, 1e-12) != Some((1, dim - 1)) {
            return Err(Error::InvalidMetric("coefficient matrix is not Lorentzian (+,-,…,-)".into()));
        }
        if (t.transpose() * &g * &t)[(0, 0)] <= 0.0 {
            return Err(Error::InvalidMetric("time orientation vector is not timelike".into()));
        }
        Metric::from_family(
            dim,
            Family::Quadratic(QuadraticField {
                coeffs: QuadraticCoeffs::Constant(g),
                time_vector: consts(t.as_slice()),
            }),
        )
    }

    /// `G(x) = factor(x) · base`.
    pub fn conformal(base: Matrix, factor: ScalarExpr, t: Vector) -> Result<Metric> {
        let m = Metric::quadratic(base.clone(), t.clone())?;
        let dim = m.dim;
        Metric::from_family(
            dim,
            Family::Quadratic(QuadraticField {
                coeffs: QuadraticCoeffs::Conformal { base, factor },
                time_vector: consts(t.as_slice()),
            }),
        )
    }

    /// Quadratic metric with entry-wise expression coefficients.
    pub fn quadratic_entries(entries: Vec<Vec<ScalarExpr>>, t: Vec<ScalarExpr>) -> Result<Metric> {
        let dim = entries.len();
        if entries.iter().any(|r| r.len() != dim) || t.len() != dim {
            return Err(Error::InvalidMetric("coefficient field is not square".into()));
        }
        for i in 0..dim {
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::InvalidMetric(format!(
                        "coefficient field is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Metric::from_family(
            dim,
            Family::Quadratic(QuadraticField {
                coeffs: QuadraticCoeffs::Entries(entries),
                time_vector: t,
            }),
        )
    }

    pub fn quadratic_field(
        dim: usize,
        field: impl Fn(&Vector) -> Matrix + Send + Sync + 'static,
        t: Vector,
    ) -> Result<Metric> {
        Metric::from_family(
            dim,
            Family::Quadratic(QuadraticField {
                coeffs: QuadraticCoeffs::Field(Arc::new(field)),
                time_vector: consts(t.as_slice()),
            }),
        )
    }

    /// `L = (v⁰)² − F(ṽ)²` with `F` a spatial norm field.
    pub fn product(dim: usize, norm: SpatialNorm) -> Result<Metric> {
        if let SpatialNorm::Randers { h, wind } = &norm {
            if wind.len() != dim - 1 || h.as_ref().is_some_and(|h| h.len() != dim - 1 || h.iter().any(|r| r.len() != dim - 1)) {
                return Err(Error::InvalidMetric("Randers data dimension mismatch".into()));
            }
        }
        if let SpatialNorm::Custom(c) = &norm {
            if c.spatial_dim() != dim - 1 {
                return Err(Error::InvalidMetric("custom norm dimension mismatch".into()));
            }
        }
        Metric::from_family(dim, Family::Product(norm))
    }

    pub fn isotropic(dim: usize, index: impl Into<ScalarExpr>) -> Result<Metric> {
        Metric::product(dim, SpatialNorm::Isotropic { index: index.into() })
    }

    /// Zermelo navigation with Euclidean background and constant wind.
    pub fn randers_constant_wind(wind: &[f64]) -> Result<Metric> {
        Metric::product(
            wind.len() + 1,
            SpatialNorm::Randers {
                h: None,
                wind: consts(wind),
            },
        )
    }

    pub fn custom(field: Arc<dyn LorentzFinslerField>) -> Result<Metric> {
        Metric::from_family(field.dim(), Family::Custom(field))
    }

    pub fn with_bounds(mut self, bounds: ChartBox) -> Metric {
        self.bounds = Some(Arc::new(bounds));
        self
    }

    /// Constant-coefficient copy evaluated at `x` everywhere.
    pub fn frozen_at(&self, x: &Vector) -> Metric {
        let mut m = self.clone();
        m.frozen = Some(Arc::new(self.pt(x).clone()));
        m
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen.is_some()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match &*self.family {
            Family::Quadratic(_) => "quadratic",
            Family::Product(SpatialNorm::Isotropic { .. }) => "product-isotropic",
            Family::Product(SpatialNorm::Randers { .. }) => "product-randers",
            Family::Product(SpatialNorm::Custom(_)) => "product-custom",
            Family::Custom(_) => "custom",
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(&*self.family, Family::Product(_))
    }

    /// Spatial norm of a product metric.
    pub fn spatial_norm_field(&self) -> Option<&SpatialNorm> {
        match &*self.family {
            Family::Product(n) => Some(n),
            _ => None,
        }
    }

    /// Coefficient matrix when the metric is quadratic.
    pub fn quadratic_matrix(&self, x: &Vector) -> Option<Matrix> {
        match &*self.family {
            Family::Quadratic(q) => Some(self.coeffs(q, x)),
            Family::Product(SpatialNorm::Isotropic { index }) => {
                let n = index.eval(self.pt(x).as_slice());
                let mut d = vec![-n * n; self.dim];
                d[0] = 1.0;
                Some(diag(&d))
            }
            _ => None,
        }
    }

    fn pt<'a>(&'a self, x: &'a Vector) -> &'a Vector {
        self.frozen.as_deref().unwrap_or(x)
    }

    fn check(&self, x: &Vector, v: Option<&Vector>) -> Result<()> {
        if x.len() != self.dim || v.is_some_and(|v| v.len() != self.dim) {
            return Err(Error::InvalidInput(format!(
                "expected vectors of length {}, got point {} / vector {:?}",
                self.dim,
                x.len(),
                v.map(|v| v.len())
            )));
        }
        if let Some(b) = &self.bounds {
            if !b.contains(x) {
                return Err(Error::Domain {
                    point: x.as_slice().to_vec(),
                });
            }
        }
        Ok(())
    }

    fn coeffs(&self, q: &QuadraticField, x: &Vector) -> Matrix {
        let p = self.pt(x);
        let d = self.dim;
        match &q.coeffs {
            QuadraticCoeffs::Constant(g) => g.clone(),
            QuadraticCoeffs::Entries(e) => Matrix::from_fn(d, d, |i, j| e[i][j].eval(p.as_slice())),
            QuadraticCoeffs::Conformal { base, factor } => base * factor.eval(p.as_slice()),
            QuadraticCoeffs::Field(f) => f(p),
        }
    }

    fn spatial(v: &Vector) -> Vector {
        v.rows(1, v.len() - 1).into_owned()
    }

    /// `L(v)` at `x`.
    pub fn l(&self, x: &Vector, v: &Vector) -> Result<f64> {
        self.check(x, Some(v))?;
        let p = self.pt(x);
        match &*self.family {
            Family::Quadratic(q) => Ok((v.transpose() * self.coeffs(q, x) * v)[(0, 0)]),
            Family::Product(n) => {
                let f = n.norm(p, &Self::spatial(v))?;
                Ok(v[0] * v[0] - f * f)
            }
            Family::Custom(c) => Ok(c.l(p, v)),
        }
    }

    /// `dL(v) = ∂L/∂y(v)`, equal to `2 g_v(v, ·)`.
    pub fn dl(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        self.check(x, Some(v))?;
        let p = self.pt(x);
        match &*self.family {
            Family::Quadratic(q) => Ok(self.coeffs(q, x) * v * 2.0),
            Family::Product(n) => {
                let w = Self::spatial(v);
                let f = n.norm(p, &w)?;
                let g = n.gradient(p, &w)?;
                let mut out = Vector::zeros(self.dim);
                out[0] = 2.0 * v[0];
                out.rows_mut(1, self.dim - 1).copy_from(&(g * (-2.0 * f)));
                Ok(out)
            }
            Family::Custom(c) => Ok(c.dl(p, v)),
        }
    }

    fn tensor_raw(&self, p: &Vector, v: &Vector) -> Result<Matrix> {
        match &*self.family {
            Family::Quadratic(q) => {
                let d = self.dim;
                Ok(match &q.coeffs {
                    QuadraticCoeffs::Constant(g) => g.clone(),
                    QuadraticCoeffs::Entries(e) => Matrix::from_fn(d, d, |i, j| e[i][j].eval(p.as_slice())),
                    QuadraticCoeffs::Conformal { base, factor } => base * factor.eval(p.as_slice()),
                    QuadraticCoeffs::Field(f) => f(p),
                })
            }
            Family::Product(n) => {
                let gf = n.fundamental_tensor(p, &Self::spatial(v))?;
                let mut g = Matrix::zeros(self.dim, self.dim);
                g[(0, 0)] = 1.0;
                g.view_mut((1, 1), (self.dim - 1, self.dim - 1)).copy_from(&(-gf));
                Ok(g)
            }
            Family::Custom(c) => Ok(c.fundamental_tensor(p, v)),
        }
    }

    /// Fundamental tensor `g_v = ½ Hess L(v)`, required to be Lorentzian.
    pub fn fundamental_tensor(&self, x: &Vector, v: &Vector) -> Result<Matrix> {
        self.check(x, Some(v))?;
        if v.norm() == 0.0 {
            return Err(Error::InvalidInput("fundamental tensor at the zero vector".into()));
        }
        let g = self.tensor_raw(self.pt(x), v)?;
        if signature(&g, 1e-10) != Some((1, self.dim - 1)) {
            return Err(Error::DegenerateTensor(format!(
                "g_v is not Lorentzian at v = {:?}",
                v.as_slice()
            )));
        }
        Ok(g)
    }

    /// `∂g_v/∂x^k` at fixed `v`, one matrix per coordinate.
    pub fn tensor_x_derivatives(&self, x: &Vector, v: &Vector) -> Result<Vec<Matrix>> {
        self.check(x, Some(v))?;
        let d = self.dim;
        let zero = || vec![Matrix::zeros(d, d); d];
        if self.frozen.is_some() {
            return Ok(zero());
        }
        match &*self.family {
            Family::Quadratic(q) => match &q.coeffs {
                QuadraticCoeffs::Constant(_) => return Ok(zero()),
                QuadraticCoeffs::Entries(e) => {
                    let grads: Vec<Vec<Vector>> = e
                        .iter()
                        .map(|r| r.iter().map(|c| c.grad(x.as_slice())).collect())
                        .collect();
                    return Ok((0..d)
                        .map(|k| Matrix::from_fn(d, d, |i, j| grads[i][j][k]))
                        .collect());
                }
                QuadraticCoeffs::Conformal { base, factor } => {
                    let g = factor.grad(x.as_slice());
                    return Ok((0..d).map(|k| base * g[k]).collect());
                }
                QuadraticCoeffs::Field(_) => {}
            },
            Family::Product(n) => {
                if let Some((idx, grad)) = n.isotropic_index_and_grad(x) {
                    return Ok((0..d)
                        .map(|k| {
                            let mut m = Matrix::zeros(d, d);
                            for i in 1..d {
                                m[(i, i)] = -2.0 * idx * grad[k];
                            }
                            m
                        })
                        .collect());
                }
            }
            Family::Custom(_) => {}
        }
        let h = 1e-5 * (1.0 + x.norm());
        let mut out = Vec::with_capacity(d);
        let mut xp = x.clone();
        for k in 0..d {
            xp[k] = x[k] + h;
            let a = self.tensor_raw(&xp, v)?;
            xp[k] = x[k] - h;
            let b = self.tensor_raw(&xp, v)?;
            xp[k] = x[k];
            out.push((a - b) / (2.0 * h));
        }
        Ok(out)
    }

    /// Timelike one-form `ω` of the cone triple.
    pub fn time_form(&self, x: &Vector) -> Result<Vector> {
        self.check(x, None)?;
        match &*self.family {
            Family::Quadratic(q) => {
                let t = self.time_vector(x)?;
                let g = self.coeffs(q, x);
                let gt = &g * &t;
                Ok(&gt / gt.dot(&t))
            }
            Family::Product(_) => {
                let mut e = Vector::zeros(self.dim);
                e[0] = 1.0;
                Ok(e)
            }
            Family::Custom(c) => Ok(c.time_form(self.pt(x))),
        }
    }

    /// Timelike vector `T` of the cone triple, `ω(T) = 1`.
    pub fn time_vector(&self, x: &Vector) -> Result<Vector> {
        self.check(x, None)?;
        let p = self.pt(x);
        match &*self.family {
            Family::Quadratic(q) => {
                let t = Vector::from_iterator(self.dim, q.time_vector.iter().map(|e| e.eval(p.as_slice())));
                let g = self.coeffs(q, x);
                if (t.transpose() * &g * &t)[(0, 0)] <= 0.0 {
                    return Err(Error::InvalidMetric(format!(
                        "time orientation vector is not timelike at {:?}",
                        p.as_slice()
                    )));
                }
                Ok(t)
            }
            Family::Product(_) => {
                let mut e = Vector::zeros(self.dim);
                e[0] = 1.0;
                Ok(e)
            }
            Family::Custom(c) => Ok(c.time_vector(p)),
        }
    }

    /// Decomposition `v = ω(v) T + π(v)`.
    pub fn split(&self, x: &Vector, v: &Vector) -> Result<(f64, Vector)> {
        let om = self.time_form(x)?;
        let t = self.time_vector(x)?;
        let a = om.dot(v);
        Ok((a, v - t * a))
    }

    /// Spatial norm `F` of the cone triple on `Ker ω`.
    pub fn triple_norm(&self, x: &Vector, w: &Vector) -> Result<f64> {
        self.check(x, Some(w))?;
        let p = self.pt(x);
        match &*self.family {
            Family::Product(n) => n.norm(p, &Self::spatial(w)),
            Family::Quadratic(q) => {
                let g = self.coeffs(q, x);
                let t = self.time_vector(x)?;
                let gtt = (t.transpose() * &g * &t)[(0, 0)];
                let gww = (w.transpose() * &g * w)[(0, 0)];
                Ok((-gww / gtt).max(0.0).sqrt())
            }
            Family::Custom(c) => {
                let t = c.time_vector(p);
                let f = |s: f64| c.l(p, &(&t * s + w));
                let l0 = f(0.0);
                if l0 >= 0.0 {
                    return if w.norm() == 0.0 {
                        Ok(0.0)
                    } else {
                        Err(Error::ProjectionFailure("spatial vector is not spacelike".into()))
                    };
                }
                let mut hi = w.norm().max(1e-300);
                let mut fhi = f(hi);
                let mut k = 0;
                while fhi <= 0.0 {
                    hi *= 2.0;
                    fhi = f(hi);
                    k += 1;
                    if k > 200 {
                        return Err(Error::ProjectionFailure("no cone point along T".into()));
                    }
                }
                illinois(f, 0.0, hi, l0, fhi, 1e-16 * hi, 0.0, 200)
                    .ok_or_else(|| Error::ProjectionFailure("lift root solve failed".into()))
            }
        }
    }

    /// `F(π) T + π` for `π ∈ Ker ω`.
    pub fn lift(&self, x: &Vector, w: &Vector) -> Result<Vector> {
        let om = self.time_form(x)?;
        let wn = w.norm();
        if wn == 0.0 {
            return Err(Error::InvalidInput("zero spatial vector".into()));
        }
        if om.dot(w).abs() > 1e-8 * om.norm() * wn {
            return Err(Error::InvalidInput("vector is not in Ker ω".into()));
        }
        let f = self.triple_norm(x, w)?;
        Ok(self.time_vector(x)? * f + w)
    }

    /// Restores `L = 0` keeping `π(v)` and re-solving the `T` component.
    pub fn project_to_cone(&self, x: &Vector, v: &Vector) -> Result<Vector> {
        let (a, w) = self.split(x, v)?;
        if !(a > 0.0) {
            return Err(Error::ProjectionFailure("vector is not future directed".into()));
        }
        if w.norm() <= 1e-14 * v.norm() {
            return Err(Error::ProjectionFailure("vector has no spatial part".into()));
        }
        let f = self.triple_norm(x, &w)?;
        Ok(self.time_vector(x)? * f + w)
    }

    /// Scale used by the lightlike band at `v`.
    pub fn l_scale(&self, x: &Vector, v: &Vector) -> f64 {
        match self.dl(x, v) {
            Ok(d) => (0.5 * d.norm() * v.norm()).max(1.0),
            Err(_) => v.norm_squared().max(1.0),
        }
    }

    pub fn classify_vector(&self, x: &Vector, v: &Vector) -> Result<VectorClass> {
        let a = self.time_form(x)?.dot(v);
        if a == 0.0 {
            return Ok(VectorClass {
                char: CausalChar::Spacelike,
                future: false,
                l: self.l(x, v)?,
            });
        }
        let rep = if a > 0.0 { v.clone() } else { -v };
        let l = self.l(x, &rep)?;
        let tol = LIGHTLIKE_BAND * self.l_scale(x, &rep);
        let char = CausalChar::from_value(l, tol);
        Ok(VectorClass {
            char,
            future: a > 0.0 && char != CausalChar::Spacelike,
            l,
        })
    }

    /// `L` evaluated on the future representative of `±v`.
    fn l_future(&self, x: &Vector, om: &Vector, v: &Vector) -> Result<f64> {
        if om.dot(v) >= 0.0 {
            self.l(x, v)
        } else {
            self.l(x, &(-v))
        }
    }

    /// Causal character of `span(basis)` from the maximum of `L` over the
    /// future half of its unit sphere.
    pub fn classify_subspace(&self, x: &Vector, basis: &[Vector]) -> Result<SubspaceClass> {
        if basis.is_empty() || basis.len() > self.dim - 1 {
            return Err(Error::InvalidInput(format!(
                "subspace dimension {} outside 1..={}",
                basis.len(),
                self.dim - 1
            )));
        }
        let b = orthonormalize(basis, 1e-10)
            .ok_or_else(|| Error::InvalidInput("rank-deficient subspace basis".into()))?;
        let om = self.time_form(x)?;
        let k = b.len();
        let combine = |c: &[f64]| -> Vector {
            let mut v = Vector::zeros(self.dim);
            for (ci, bi) in c.iter().zip(&b) {
                v.axpy(*ci, bi, 1.0);
            }
            v
        };
        let (mut best, mut arg) = if let Some(g) = self.quadratic_matrix(x) {
            let bm = crate::linalg::columns(&b);
            let (lam, c) = sym_max_eigen(&(bm.transpose() * g * bm));
            (lam, combine(c.as_slice()))
        } else if k == 1 {
            let v = b[0].clone();
            (self.l_future(x, &om, &v)?, v)
        } else if k == 2 {
            let f = |th: f64| {
                let v = &b[0] * th.cos() + &b[1] * th.sin();
                self.l_future(x, &om, &v).unwrap_or(f64::NEG_INFINITY)
            };
            let m = 256;
            let step = std::f64::consts::PI / m as f64;
            let mut bi = 0;
            let mut bv = f64::NEG_INFINITY;
            for i in 0..m {
                let val = f(i as f64 * step);
                if val > bv {
                    bv = val;
                    bi = i;
                }
            }
            let c = bi as f64 * step;
            let (th, val) = golden_max(f, c - step, c + step, 1e-12);
            let (th, val) = if val >= bv { (th, val) } else { (c, bv) };
            (val, &b[0] * th.cos() + &b[1] * th.sin())
        } else {
            self.ascend_sphere(x, &om, &b)?
        };
        if om.dot(&arg) < 0.0 {
            arg = -arg;
        }
        if !best.is_finite() {
            best = f64::NEG_INFINITY;
        }
        let tol = LIGHTLIKE_BAND * self.l_scale(x, &arg);
        Ok(SubspaceClass {
            char: CausalChar::from_value(best, tol),
            max_l: best,
            maximizer: arg,
            tol,
        })
    }

    /// Projected-gradient ascent of `L` on the unit sphere of `span(b)` with
    /// 32 deterministic restarts.
    fn ascend_sphere(&self, x: &Vector, om: &Vector, b: &[Vector]) -> Result<(f64, Vector)> {
        let k = b.len();
        let bm = crate::linalg::columns(b);
        let eval = |c: &Vector| -> (f64, Vector) {
            let v = &bm * c;
            let sig = if om.dot(&v) >= 0.0 { 1.0 } else { -1.0 };
            let rep = &v * sig;
            match (self.l(x, &rep), self.dl(x, &rep)) {
                (Ok(l), Ok(d)) => (l, bm.transpose() * d * sig),
                _ => (f64::NEG_INFINITY, Vector::zeros(k)),
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
        let mut starts: Vec<Vector> = Vec::new();
        for i in 0..k {
            let mut e = Vector::zeros(k);
            e[i] = 1.0;
            starts.push(e);
        }
        // Direction of the time vector projected onto the subspace.
        let t = self.time_vector(x)?;
        let tc = bm.transpose() * &t;
        if tc.norm() > 0.0 {
            starts.push(&tc / tc.norm());
        }
        while starts.len() < 32 {
            let c = Vector::from_fn(k, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            if c.norm() > 1e-3 {
                starts.push(&c / c.norm());
            }
        }
        let mut best = (f64::NEG_INFINITY, starts[0].clone());
        for s in starts {
            let mut c = s;
            let (mut f, mut g) = eval(&c);
            let mut step = 0.5;
            for _ in 0..400 {
                let gt = &g - &c * g.dot(&c);
                let gn = gt.norm();
                if gn < 1e-13 * (1.0 + f.abs()) {
                    break;
                }
                let mut accepted = false;
                let mut s_try = step;
                for _ in 0..40 {
                    let cand = &c + &gt * (s_try / gn);
                    let cand = &cand / cand.norm();
                    let (fc, gc) = eval(&cand);
                    if fc > f {
                        c = cand;
                        f = fc;
                        g = gc;
                        accepted = true;
                        step = (s_try * 2.0).min(1.0);
                        break;
                    }
                    s_try *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            if f > best.0 {
                best = (f, c);
            }
        }
        Ok((best.0, &bm * &best.1))
    }

    /// Orthonormal basis of `ker dL(v)`; for lightlike `v` this is `v^⊥`.
    pub fn orthogonal_hyperplane(&self, x: &Vector, v: &Vector) -> Result<Vec<Vector>> {
        let d = self.dl(x, v)?;
        if d.norm() <= 1e-14 * v.norm() {
            return Err(Error::DegenerateTensor("dL(v) vanishes".into()));
        }
        Ok(orthonormal_complement(&d))
    }

    /// `count` future lightlike directions with `ω(v) = 1`, spread over the
    /// spatial sphere of `Ker ω`.
    pub fn indicatrix_sample(&self, x: &Vector, count: usize) -> Result<Vec<Vector>> {
        let om = self.time_form(x)?;
        let ker = orthonormal_complement(&om);
        let dirs = sphere_points(ker.len(), count);
        dirs.iter()
            .map(|d| {
                let mut w = Vector::zeros(self.dim);
                for (di, ki) in d.iter().zip(&ker) {
                    w.axpy(*di, ki, 1.0);
                }
                let v = self.lift(x, &w)?;
                let a = om.dot(&v);
                Ok(v / a)
            })
            .collect()
    }

    /// Probabilistic sanity checks at `x`: Lorentzian quadratic coefficients,
    /// positive 1-homogeneous spatial norms with definite fundamental tensor.
    pub fn validate_at(&self, x: &Vector) -> Result<()> {
        self.check(x, None)?;
        let om = self.time_form(x)?;
        let t = self.time_vector(x)?;
        if (om.dot(&t) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidMetric("ω(T) ≠ 1".into()));
        }
        if let Family::Quadratic(q) = &*self.family {
            let g = self.coeffs(q, x);
            if (&g - g.transpose()).norm() > 1e-12 * g.norm() || signature(&g, 1e-12) != Some((1, self.dim - 1)) {
                return Err(Error::InvalidMetric(format!(
                    "coefficients are not Lorentzian at {:?}",
                    x.as_slice()
                )));
            }
        }
        if !matches!(self.classify_vector(x, &t)?.char, CausalChar::Timelike) {
            return Err(Error::InvalidMetric("T is not timelike".into()));
        }
        if let Family::Product(n) = &*self.family {
            let p = self.pt(x);
            for d in sphere_points(self.dim - 1, 16) {
                let w = Vector::from_vec(d);
                let f = n.norm(p, &w)?;
                let f2 = n.norm(p, &(&w * 2.0))?;
                if !(f > 0.0) || (f2 - 2.0 * f).abs() > 1e-9 * f {
                    return Err(Error::InvalidMetric("spatial norm is not positive 1-homogeneous".into()));
                }
                let gf = n.fundamental_tensor(p, &w)?;
                if signature(&gf, 1e-10) != Some((self.dim - 1, 0)) {
                    return Err(Error::InvalidMetric("spatial fundamental tensor is not positive definite".into()));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic, roughly uniform points on the unit sphere of `R^k`.
pub fn sphere_points(k: usize, count: usize) -> Vec<Vec<f64>> {
    match k {
        1 => (0..count).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * i as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x51de);
            (0..count)
                .map(|_| loop {
                    let v: Vec<f64> = (0..k).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if n > 1e-3 && n <= 1.0 {
                        break v.iter().map(|a| a / n).collect();
                    }
                })
                .collect()
        }
    }
}
