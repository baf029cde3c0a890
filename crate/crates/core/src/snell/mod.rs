//! Refraction and reflection at an interface point.
//!
//! A refracted direction `v` is a lightlike vector of the second cone whose
//! orthogonal hyperplane has the same trace on `T_pη` as that of the incident
//! direction `u`. Equivalently `dL₂(v)` vanishes on `Π¹_u = u^⊥ ∩ T_pη`. The
//! existence count is fixed by the causal characters of `T_pη` and `Π¹_u`;
//! the solver finds the roots and checks them against that prediction.

mod orientation;
mod solve;

use serde::{Deserialize, Serialize};

pub use orientation::{orientation_is_straight, QuotientFrame};
pub use solve::{solve_reflection, solve_refraction};

use crate::error::{Error, Result};
use crate::finsler::{CausalChar, Metric, SubspaceClass};
use crate::interface::Interface;
use crate::linalg::{orthonormal_complement, Vector};

/// The two media on either side of an interface.
#[derive(Clone, Debug)]
pub struct Media {
    pub metric1: Metric,
    pub metric2: Metric,
    pub interface: Interface,
}

impl Media {
    pub fn new(metric1: Metric, metric2: Metric, interface: Interface) -> Media {
        Media {
            metric1,
            metric2,
            interface,
        }
    }

    pub fn metric(&self, medium: u8) -> &Metric {
        if medium == 1 {
            &self.metric1
        } else {
            &self.metric2
        }
    }

    /// Media seen by a ray travelling from `Q₂` to `Q₁`.
    pub fn reversed(&self) -> Media {
        Media {
            metric1: self.metric2.clone(),
            metric2: self.metric1.clone(),
            interface: self.interface.flipped(),
        }
    }

    /// Both metrics frozen at `p`.
    pub fn frozen_at(&self, p: &Vector) -> Media {
        Media {
            metric1: self.metric1.frozen_at(p),
            metric2: self.metric2.frozen_at(p),
            interface: self.interface.clone(),
        }
    }
}

/// Relative tolerance under which the restricted covector `dL₁(u)|_{T_pη}`
/// counts as zero.
pub const TRANSVERSALITY_TOL: f64 = 1e-8;

/// Relative tolerance for the side filter `∇f(v) ≥ −tol`.
pub const SIDE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncidentData {
    pub p: Vector,
    /// Incident direction normalised to `ω₁(u) = 1`.
    pub u: Vector,
    /// `∇f(p)`.
    pub phi: Vector,
    /// `ν` with `φ(ν) = 1`.
    pub nu: Vector,
    pub tangent_basis: Vec<Vector>,
    /// `dL₁(u)`.
    pub alpha: Vector,
    /// Orthonormal basis of `Π¹_u` (`n − 1` vectors).
    pub pi_basis: Vec<Vector>,
    /// Unit vector of `T_pη` orthogonal to `Π¹_u` with `α(z') > 0`.
    pub z_prime: Vector,
    pub eta_class_1: SubspaceClass,
    pub eta_class_2: SubspaceClass,
    pub pi_class_1: SubspaceClass,
    pub pi_class_2: SubspaceClass,
    pub transversal_ok: bool,
    /// `C²_p ∩ Q²_p ≠ ∅`.
    pub cone2_meets_q2: bool,
    /// `C¹_p ∩ Q¹_p ≠ ∅`.
    pub cone1_meets_q1: bool,
}

impl IncidentData {
    pub fn eta_char(&self, medium: u8) -> CausalChar {
        if medium == 1 {
            self.eta_class_1.char
        } else {
            self.eta_class_2.char
        }
    }

    pub fn pi_char(&self, medium: u8) -> CausalChar {
        if medium == 1 {
            self.pi_class_1.char
        } else {
            self.pi_class_2.char
        }
    }

    /// Any of the classifications used by the tables lies near zero.
    pub fn borderline(&self, medium: u8) -> bool {
        if medium == 1 {
            self.eta_class_1.is_borderline() || self.pi_class_1.is_borderline()
        } else {
            self.eta_class_2.is_borderline() || self.pi_class_2.is_borderline()
        }
    }
}

/// Whether `T_pη`'s trace misses the cone interior, decided from the side of
/// the time vector.
fn cone_meets_side(m: &Metric, p: &Vector, phi: &Vector, eta: &SubspaceClass, want_positive: bool) -> Result<bool> {
    if eta.char == CausalChar::Timelike {
        return Ok(true);
    }
    // A non-timelike tangent space leaves the open cone on one side.
    let s = phi.dot(&m.time_vector(p)?);
    Ok(if want_positive { s > 0.0 } else { s < 0.0 })
}

/// Builds `Π¹_u` and the causal data driving the case tables.
pub fn incident_data(media: &Media, p: &Vector, u: &Vector) -> Result<IncidentData> {
    let m1 = &media.metric1;
    let iface = &media.interface;
    let band = iface.band(p);
    if iface.value(p).abs() > 10.0 * band {
        return Err(Error::InvalidInput(format!("point {:?} is off the interface", p.as_slice())));
    }
    let om = m1.time_form(p)?;
    let a = om.dot(u);
    if !(a > 0.0) {
        return Err(Error::InvalidInput("incident direction is not future directed".into()));
    }
    let l = m1.l(p, u)?;
    if l.abs() > 1e-6 * m1.l_scale(p, u) {
        return Err(Error::InvalidInput(format!("incident direction is not lightlike (L = {l:e})")));
    }
    let u = m1.project_to_cone(p, &(u / a))?;
    let u = &u / om.dot(&u);
    let phi = iface.gradient(p)?;
    if phi.dot(&u) < -SIDE_TOL * phi.norm() * u.norm() {
        return Err(Error::InvalidInput("incident direction points back into Q₁".into()));
    }
    let nu = &phi / phi.norm_squared();
    let tangent_basis = orthonormal_complement(&phi);
    let alpha = m1.dl(p, &u)?;
    let c = Vector::from_iterator(tangent_basis.len(), tangent_basis.iter().map(|z| alpha.dot(z)));
    if c.norm() <= TRANSVERSALITY_TOL * alpha.norm() {
        return Err(Error::NonTransverseIncident);
    }
    let c_hat = &c / c.norm();
    let mut z_prime = Vector::zeros(p.len());
    for (ci, z) in c_hat.iter().zip(&tangent_basis) {
        z_prime.axpy(*ci, z, 1.0);
    }
    let pi_basis: Vec<Vector> = orthonormal_complement(&c_hat)
        .into_iter()
        .map(|k| {
            let mut w = Vector::zeros(p.len());
            for (ki, z) in k.iter().zip(&tangent_basis) {
                w.axpy(*ki, z, 1.0);
            }
            w
        })
        .collect();
    let eta_class_1 = m1.classify_subspace(p, &tangent_basis)?;
    let eta_class_2 = media.metric2.classify_subspace(p, &tangent_basis)?;
    let pi_class_1 = m1.classify_subspace(p, &pi_basis)?;
    let pi_class_2 = media.metric2.classify_subspace(p, &pi_basis)?;
    let cone2_meets_q2 = cone_meets_side(&media.metric2, p, &phi, &eta_class_2, true)?;
    let cone1_meets_q1 = cone_meets_side(m1, p, &phi, &eta_class_1, false)?;
    Ok(IncidentData {
        p: p.clone(),
        u,
        phi,
        nu,
        tangent_basis,
        alpha,
        pi_basis,
        z_prime,
        eta_class_1,
        eta_class_2,
        pi_class_1,
        pi_class_2,
        transversal_ok: true,
        cone2_meets_q2,
        cone1_meets_q1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    #[serde(rename = "A_i")]
    AI,
    #[serde(rename = "A_ii")]
    AIi,
    #[serde(rename = "A_iii_NoCriticalPoints")]
    AIiiNoCriticalPoints,
    #[serde(rename = "B_i")]
    BI,
    #[serde(rename = "B_ii_Exceptional")]
    BIiExceptional,
    #[serde(rename = "C_Two")]
    CTwo,
    NoCrossing,
    ExceptionalOnly,
    NotPossible,
    #[serde(rename = "Astar_i")]
    AstarI,
    #[serde(rename = "Astar_ii_Unbroken")]
    AstarIiUnbroken,
    #[serde(rename = "Bstar_Exceptional")]
    BstarExceptional,
    NoReturning,
}

impl CaseLabel {
    /// Number of directions (proper plus exceptional) the tables predict.
    pub fn expected_count(self) -> usize {
        use CaseLabel::*;
        match self {
            AI | AIi | BI | BIiExceptional | ExceptionalOnly | AstarI | AstarIiUnbroken | BstarExceptional => 1,
            CTwo => 2,
            AIiiNoCriticalPoints | NoCrossing | NotPossible | NoReturning => 0,
        }
    }

    /// Predicted directions are exceptional.
    pub fn is_exceptional(self) -> bool {
        matches!(
            self,
            CaseLabel::BIiExceptional | CaseLabel::ExceptionalOnly | CaseLabel::BstarExceptional
        )
    }

    /// Predicted directions are tangent to `η`.
    pub fn is_tangent(self) -> bool {
        self.is_exceptional() || matches!(self, CaseLabel::AIi | CaseLabel::AstarIiUnbroken)
    }

    pub fn name(self) -> &'static str {
        use CaseLabel::*;
        match self {
            AI => "A_i",
            AIi => "A_ii",
            AIiiNoCriticalPoints => "A_iii_NoCriticalPoints",
            BI => "B_i",
            BIiExceptional => "B_ii_Exceptional",
            CTwo => "C_Two",
            NoCrossing => "NoCrossing",
            ExceptionalOnly => "ExceptionalOnly",
            NotPossible => "NotPossible",
            AstarI => "Astar_i",
            AstarIiUnbroken => "Astar_ii_Unbroken",
            BstarExceptional => "Bstar_Exceptional",
            NoReturning => "NoReturning",
        }
    }
}

/// Row of the refraction table for the given characters of `T_pη` and `Π¹_u`
/// with respect to the second cone.
pub fn refraction_case(eta2: CausalChar, pi2: CausalChar, cone2_meets_q2: bool) -> CaseLabel {
    use CausalChar::*;
    match (eta2, pi2) {
        (Timelike, Spacelike) => CaseLabel::AI,
        (Timelike, Lightlike) => CaseLabel::AIi,
        (Timelike, Timelike) => CaseLabel::AIiiNoCriticalPoints,
        (Lightlike, Spacelike) if cone2_meets_q2 => CaseLabel::BI,
        (Lightlike, Spacelike) => CaseLabel::ExceptionalOnly,
        (Lightlike, Lightlike) => CaseLabel::BIiExceptional,
        (Spacelike, Spacelike) if cone2_meets_q2 => CaseLabel::CTwo,
        (Spacelike, Spacelike) => CaseLabel::NoCrossing,
        _ => CaseLabel::NotPossible,
    }
}

/// Row of the reflection table for the characters with respect to the
/// first cone.
pub fn reflection_case(eta1: CausalChar, pi1: CausalChar) -> CaseLabel {
    use CausalChar::*;
    match (eta1, pi1) {
        (Timelike, Spacelike) => CaseLabel::AstarI,
        (Timelike, Lightlike) => CaseLabel::AstarIiUnbroken,
        (Lightlike, Spacelike | Lightlike) => CaseLabel::BstarExceptional,
        (Spacelike, Spacelike) => CaseLabel::NoReturning,
        _ => CaseLabel::NotPossible,
    }
}

pub fn predict_refraction(inc: &IncidentData) -> CaseLabel {
    refraction_case(inc.eta_class_2.char, inc.pi_class_2.char, inc.cone2_meets_q2)
}

pub fn predict_reflection(inc: &IncidentData) -> CaseLabel {
    reflection_case(inc.eta_class_1.char, inc.pi_class_1.char)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Refraction,
    Reflection,
}

impl EventKind {
    pub fn medium(self) -> u8 {
        match self {
            EventKind::Refraction => 2,
            EventKind::Reflection => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnellDirection {
    /// Lightlike direction normalised to `ω(v) = 1`.
    pub v: Vector,
    pub tangent_to_eta: bool,
    pub straight_oriented: bool,
    pub exceptional: bool,
    /// Proportionality factor `dL_μ(v) = λ dL₁(u)` on `T_pη`.
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SnellOutcome {
    pub kind: EventKind,
    pub case_label: CaseLabel,
    pub directions: Vec<SnellDirection>,
    pub eta_char: CausalChar,
    pub pi_char: CausalChar,
    pub borderline: bool,
    pub warnings: Vec<String>,
}

impl SnellOutcome {
    /// The unique straight-oriented proper direction, if any.
    pub fn straight(&self) -> Option<&SnellDirection> {
        self.directions.iter().find(|d| d.straight_oriented && !d.exceptional)
    }

    pub fn proper(&self) -> impl Iterator<Item = &SnellDirection> {
        self.directions.iter().filter(|d| !d.exceptional)
    }
}

/// Coefficients of `c` on the tangent basis.
fn restrict(c: &Vector, basis: &[Vector]) -> Vector {
    Vector::from_iterator(basis.len(), basis.iter().map(|z| c.dot(z)))
}

/// Sine of the angle between `dL₁(u)|_{T_pη}` and `dL_μ(r)|_{T_pη}`; this is
/// the relative least-squares misfit of `dL_μ(r) = λ dL₁(u)` on `T_pη`.
pub fn snell_residual(media: &Media, p: &Vector, u: &Vector, r: &Vector, medium: u8) -> Result<f64> {
    let basis = media.interface.tangent_basis(p)?;
    let a = restrict(&media.metric1.dl(p, u)?, &basis);
    let b = restrict(&media.metric(medium).dl(p, r)?, &basis);
    Ok(covector_misfit(&a, &b))
}

pub(crate) fn covector_misfit(a: &Vector, b: &Vector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let (ua, ub) = (a / na, b / nb);
    (&ub - &ua * ua.dot(&ub)).norm().min(1.0)
}

/// Critical angle `arcsin(n₂/n₁)` for isotropic media, if `n₂ ≤ n₁`.
pub fn critical_angle(n1: f64, n2: f64) -> Option<f64> {
    if n1 > 0.0 && n2 > 0.0 && n2 <= n1 {
        Some((n2 / n1).asin())
    } else {
        None
    }
}

/// No refraction (`Π¹_u` is timelike for the second cone) while reflection
/// exists (`T_pη` timelike for the first cone).
pub fn total_reflection_check(inc: &IncidentData) -> bool {
    inc.eta_class_1.char == CausalChar::Timelike
        && inc.eta_class_2.char == CausalChar::Timelike
        && inc.pi_class_2.char == CausalChar::Timelike
}

/// Receiver tangent data at the terminal point.
#[derive(Clone, Debug)]
pub enum ReceiverTangent {
    /// Velocity `α̇` of a receiver curve.
    Curve(Vector),
    /// Basis of `Ker dt_B` for a submanifold receiver of dimension `dim`.
    Submanifold { dim: usize, kernel_basis: Vec<Vector> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReceiverReport {
    /// Curve: `|dL(γ̇)(α̇)|` normalised. Submanifold: worst normalised
    /// `|dL(γ̇)(w)|` over the kernel basis.
    pub value: f64,
    /// Curve receivers: `dL(γ̇)(α̇) ≠ 0`. Submanifold receivers: the kernel
    /// of `dt_B` lies in `γ̇^⊥`.
    pub passes: bool,
}

/// Fermat hypotheses at the receiver end.
pub fn receiver_checks(m: &Metric, x: &Vector, y: &Vector, rx: &ReceiverTangent) -> Result<ReceiverReport> {
    let d = m.dl(x, y)?;
    let dn = d.norm();
    let tol = 1e-8;
    match rx {
        ReceiverTangent::Curve(a) => {
            if a.len() != x.len() || a.norm() == 0.0 {
                return Err(Error::InvalidInput("receiver velocity has the wrong size or vanishes".into()));
            }
            let value = d.dot(a).abs() / (dn * a.norm());
            Ok(ReceiverReport {
                value,
                passes: value > tol,
            })
        }
        ReceiverTangent::Submanifold { dim, kernel_basis } => {
            if *dim == 0 || *dim > x.len() || kernel_basis.len() + 1 != *dim {
                return Err(Error::InvalidInput(format!(
                    "receiver of dimension {dim} needs {} kernel vectors, got {}",
                    dim.saturating_sub(1),
                    kernel_basis.len()
                )));
            }
            let mut worst = 0.0f64;
            for w in kernel_basis {
                if w.len() != x.len() || w.norm() == 0.0 {
                    return Err(Error::InvalidInput("kernel basis vector has the wrong size or vanishes".into()));
                }
                worst = worst.max(d.dot(w).abs() / (dn * w.norm()));
            }
            Ok(ReceiverReport {
                value: worst,
                passes: worst <= tol,
            })
        }
    }
}
