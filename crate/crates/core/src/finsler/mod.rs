//! Lorentz-Finsler metrics: evaluation of `L`, `dL` and the fundamental
//! tensor, cone triples, causal classification and cone sampling.
//!
//! Three families are available. Quadratic metrics `vᵀG(x)v`, product metrics
//! `(v⁰)² − F(ṽ)²` over a spatial norm (isotropic index, Zermelo/Randers wind,
//! or a user norm), and arbitrary user `L`. Analytic derivatives are used when
//! a closed form exists, central differences otherwise.

mod metric;
mod norm;

use serde::{Deserialize, Serialize};

pub use metric::{
    sphere_points, Family, LorentzFinslerField, MatrixFieldFn, Metric, QuadraticCoeffs,
    QuadraticField,
};
pub use norm::{MinkowskiNormField, SpatialNorm, WIND_MARGIN};

use crate::linalg::Vector;

/// Relative half-width of the band around `L = 0` classified as lightlike.
pub const LIGHTLIKE_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CausalChar {
    Timelike,
    Lightlike,
    Spacelike,
}

impl CausalChar {
    pub(crate) fn from_value(l: f64, tol: f64) -> CausalChar {
        if l > tol {
            CausalChar::Timelike
        } else if l >= -tol {
            CausalChar::Lightlike
        } else {
            CausalChar::Spacelike
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VectorClass {
    pub char: CausalChar,
    /// Causal and future pointing.
    pub future: bool,
    /// `L` of the future representative of `±v`.
    pub l: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceClass {
    pub char: CausalChar,
    /// Maximum of `L` over the future unit half-sphere of the subspace.
    pub max_l: f64,
    /// Future-pointing unit maximiser.
    pub maximizer: Vector,
    pub tol: f64,
}

impl SubspaceClass {
    /// Extremal value within a few bands of zero.
    pub fn is_borderline(&self) -> bool {
        self.max_l.abs() <= 10.0 * self.tol
    }
}

/// Finsler angle between spatial vectors `u` and `w` measured with the
/// fundamental tensor of `F` at `base`.
pub fn finsler_angle(
    norm: &SpatialNorm,
    p: &Vector,
    base: &Vector,
    u: &Vector,
    w: &Vector,
) -> crate::Result<f64> {
    norm.angle(p, base, u, w)
}
