//! Straight or reverse orientation of the broken orthogonal hyperplane.
//!
//! Both half-hyperplanes contain `Π`, so everything happens in the
//! two-dimensional quotient `T_pM / Π` with coordinates `(a, b) = (ψ(z), φ(z))`,
//! where `φ = ∇f` and `ψ` vanishes on `Π ⊕ span ν`. Each half-hyperplane is a
//! ray `d̄` there, and its cone orientation is the side on which the descended
//! covector `ᾱ = dL(r)` is positive. Straight orientation means both cone
//! sides fall in the same sector cut out by the two rays.

use super::{IncidentData, Media};
use crate::error::{Error, Result};
use crate::linalg::Vector;

/// Quotient coordinates adapted to `Π` and the interface.
#[derive(Clone, Debug)]
pub struct QuotientFrame {
    pub phi: Vector,
    pub nu: Vector,
    pub z_prime: Vector,
}

impl QuotientFrame {
    pub fn from_incident(inc: &IncidentData) -> QuotientFrame {
        QuotientFrame {
            phi: inc.phi.clone(),
            nu: inc.nu.clone(),
            z_prime: inc.z_prime.clone(),
        }
    }

    /// `ᾱ` in `(a, b)` coordinates: its values on `z'` and `ν`.
    pub fn descend(&self, covector: &Vector) -> [f64; 2] {
        [covector.dot(&self.z_prime), covector.dot(&self.nu)]
    }

    /// Ray of the half-hyperplane `ker ᾱ` with `b` of sign `side`.
    fn ray(&self, a: [f64; 2], side: f64) -> Result<[f64; 2]> {
        let d = [-a[1], a[0]];
        let n = (d[0] * d[0] + d[1] * d[1]).sqrt();
        if !(n > 0.0) || d[1].abs() <= 1e-12 * n {
            return Err(Error::NonTransverseIncident);
        }
        let k = if d[1] * side > 0.0 { 1.0 } else { -1.0 };
        Ok([k * d[0] / n, k * d[1] / n])
    }
}

fn perp_ccw(d: [f64; 2]) -> [f64; 2] {
    [-d[1], d[0]]
}

fn eval(a: [f64; 2], z: [f64; 2]) -> f64 {
    a[0] * z[0] + a[1] * z[1]
}

/// Sector test on descended covectors. `alpha_u` belongs to the incident
/// direction, `alpha_r` to the outgoing one, whose half-hyperplane lies on
/// the `b > 0` side for refraction and `b < 0` for reflection.
pub(crate) fn straight_from_covectors(frame: &QuotientFrame, alpha_u: &Vector, alpha_r: &Vector, medium: u8) -> Result<bool> {
    let au = frame.descend(alpha_u);
    let ar = frame.descend(alpha_r);
    let du = frame.ray(au, -1.0)?;
    let dr = frame.ray(ar, if medium == 2 { 1.0 } else { -1.0 })?;
    let su = eval(au, perp_ccw(du)).signum();
    let sr = eval(ar, perp_ccw(dr)).signum();
    let cross = du[0] * dr[1] - du[1] * dr[0];
    let dot = du[0] * dr[0] + du[1] * dr[1];
    if cross.abs() <= 1e-9 && dot > 0.0 {
        // Coincident rays: straight iff both cones lie on the same side.
        return Ok(su == sr);
    }
    Ok(su * sr < 0.0)
}

/// Straight-orientation test for an outgoing direction `r` in `medium`
/// (2 for refraction, 1 for reflection) against the incident `u` at `p`.
pub fn orientation_is_straight(media: &Media, p: &Vector, u: &Vector, r: &Vector, medium: u8) -> Result<bool> {
    let inc = super::incident_data(media, p, u)?;
    let m = media.metric(medium);
    let om = m.time_form(p)?;
    let r = r / om.dot(r);
    if medium == 1 && crate::linalg::angle_between(&inc.u, &r) <= 1e-8 {
        return Ok(true);
    }
    let frame = QuotientFrame::from_incident(&inc);
    straight_from_covectors(&frame, &inc.alpha, &m.dl(p, &r)?, medium)
}
