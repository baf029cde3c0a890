use super::orientation::{straight_from_covectors, QuotientFrame};
use super::{
    covector_misfit, predict_reflection, predict_refraction, restrict, CaseLabel, EventKind, IncidentData, Media,
    SnellDirection, SnellOutcome, SIDE_TOL,
};
use crate::error::{Error, Result};
use crate::finsler::Metric;
use crate::linalg::{angle_between, Matrix, Vector};

const NEWTON_TOL: f64 = 1e-11;
const NEWTON_ITERS: usize = 50;
const DEDUP_ANGLE: f64 = 1e-6;
/// Relative size of `dL(v)|_{T_pη}` below which `v^⊥ = T_pη`.
const HYPERPLANE_TOL: f64 = 1e-7;
const TANGENT_TOL: f64 = 1e-7;

struct System<'a> {
    m: &'a Metric,
    inc: &'a IncidentData,
    omega: Vector,
    alpha_z: f64,
}

impl System<'_> {
    /// Residuals `L(v)`, `dL(v)(π_k)`, `dL(v)(z') − λ α(z')`, `ω(v) − 1`.
    fn residual(&self, v: &Vector, lambda: f64) -> Result<Vector> {
        let p = &self.inc.p;
        let k = self.inc.pi_basis.len();
        let dl = self.m.dl(p, v)?;
        let mut r = Vector::zeros(k + 3);
        r[0] = self.m.l(p, v)?;
        for (j, z) in self.inc.pi_basis.iter().enumerate() {
            r[1 + j] = dl.dot(z);
        }
        r[k + 1] = dl.dot(&self.inc.z_prime) - lambda * self.alpha_z;
        r[k + 2] = self.omega.dot(v) - 1.0;
        Ok(r)
    }

    fn jacobian(&self, v: &Vector) -> Result<Matrix> {
        let p = &self.inc.p;
        let d = v.len();
        let k = self.inc.pi_basis.len();
        let dl = self.m.dl(p, v)?;
        let g2 = self.m.fundamental_tensor(p, v)? * 2.0;
        let mut j = Matrix::zeros(k + 3, d + 1);
        for c in 0..d {
            j[(0, c)] = dl[c];
            j[(k + 2, c)] = self.omega[c];
        }
        for (row, z) in self.inc.pi_basis.iter().enumerate() {
            let gz = &g2 * z;
            for c in 0..d {
                j[(1 + row, c)] = gz[c];
            }
        }
        let gz = &g2 * &self.inc.z_prime;
        for c in 0..d {
            j[(k + 1, c)] = gz[c];
        }
        j[(k + 1, d)] = -self.alpha_z;
        Ok(j)
    }

    fn lambda_of(&self, v: &Vector) -> Result<f64> {
        Ok(self.m.dl(&self.inc.p, v)?.dot(&self.inc.z_prime) / self.alpha_z)
    }

    /// Damped Newton from `seed`; returns the converged direction with `ω = 1`.
    fn newton(&self, seed: &Vector) -> Option<Vector> {
        let d = seed.len();
        let a = self.omega.dot(seed);
        if !(a > 0.0) {
            return None;
        }
        let mut v = seed / a;
        let mut lam = self.lambda_of(&v).ok()?;
        let mut r = self.residual(&v, lam).ok()?;
        let scale = |v: &Vector| (self.m.dl(&self.inc.p, v).map(|d| d.norm()).unwrap_or(1.0) * v.norm()).max(1.0);
        for _ in 0..NEWTON_ITERS {
            if r.norm() <= NEWTON_TOL * scale(&v) {
                return Some(v);
            }
            let j = self.jacobian(&v).ok()?;
            let step = j.lu().solve(&(-&r))?;
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = &v + step.rows(0, d) * t;
                let cl = lam + step[d] * t;
                if let Ok(rc) = self.residual(&cand, cl) {
                    if rc.norm() < r.norm() * (1.0 - 1e-4 * t) || rc.norm() <= NEWTON_TOL * scale(&cand) {
                        v = cand;
                        lam = cl;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (r.norm() <= NEWTON_TOL * scale(&v)).then_some(v)
    }
}

/// Closed-form candidates for quadratic cones: `G v = a φ + b dL₁(u)` with
/// `L(v) = 0`.
fn quadratic_seeds(m: &Metric, inc: &IncidentData) -> Vec<Vector> {
    let Some(g) = m.quadratic_matrix(&inc.p) else {
        return Vec::new();
    };
    let Some(gi) = g.try_inverse() else {
        return Vec::new();
    };
    let (phi, al) = (&inc.phi / inc.phi.norm(), &inc.alpha / inc.alpha.norm());
    let gp = &gi * &phi;
    let ga = &gi * &al;
    let (p, r, s) = (phi.dot(&gp), phi.dot(&ga), al.dot(&ga));
    let disc = (r * r - p * s).max(0.0).sqrt();
    let pairs: Vec<(f64, f64)> = if p.abs() >= s.abs() {
        vec![(-r + disc, p), (-r - disc, p)]
    } else {
        vec![(s, -r + disc), (s, -r - disc)]
    };
    let om = m.time_form(&inc.p).unwrap_or_else(|_| Vector::zeros(inc.p.len()));
    pairs
        .into_iter()
        .filter_map(|(a, b)| {
            let v = &gp * a + &ga * b;
            let w = om.dot(&v);
            (w.abs() > 1e-14 * v.norm()).then(|| v / w)
        })
        .collect()
}

/// Roots of the Snell system in `m`, deduplicated, future, with `ω = 1`.
fn find_roots(m: &Metric, inc: &IncidentData, wanted: usize) -> Result<Vec<Vector>> {
    let sys = System {
        m,
        inc,
        omega: m.time_form(&inc.p)?,
        alpha_z: inc.alpha.dot(&inc.z_prime),
    };
    let mut roots: Vec<Vector> = Vec::new();
    let push = |v: Vector, roots: &mut Vec<Vector>| {
        if roots.iter().all(|r| angle_between(r, &v) > DEDUP_ANGLE) {
            roots.push(v);
        }
    };
    let mut seeds = quadratic_seeds(m, inc);
    if let Ok(v) = m.project_to_cone(&inc.p, &inc.u) {
        seeds.push(v);
    }
    seeds.extend(m.indicatrix_sample(&inc.p, 16)?);
    for s in &seeds {
        if let Some(v) = sys.newton(s) {
            push(v, &mut roots);
        }
    }
    if roots.len() < wanted {
        for s in m.indicatrix_sample(&inc.p, 256)? {
            if let Some(v) = sys.newton(&s) {
                push(v, &mut roots);
            }
        }
    }
    Ok(roots
        .into_iter()
        .filter_map(|v| m.project_to_cone(&inc.p, &v).ok())
        .map(|v| {
            let w = sys.omega.dot(&v);
            v / w
        })
        .collect())
}

/// `v^⊥ = T_pη`: `dL(v)` vanishes on the interface tangent space.
fn hyperplane_is_tangent(m: &Metric, inc: &IncidentData, v: &Vector) -> Result<bool> {
    let d = m.dl(&inc.p, v)?;
    Ok(restrict(&d, &inc.tangent_basis).norm() <= HYPERPLANE_TOL * d.norm())
}

fn is_tangent(inc: &IncidentData, v: &Vector) -> bool {
    inc.phi.dot(v).abs() <= TANGENT_TOL * inc.phi.norm() * v.norm()
}

/// Future lightlike direction on the maximiser of `L` over `basis`, which is
/// the tangency direction when the subspace is lightlike.
fn tangency_direction(m: &Metric, p: &Vector, basis: &[Vector]) -> Result<Vector> {
    let c = m.classify_subspace(p, basis)?;
    let v = m.project_to_cone(p, &c.maximizer)?;
    let w = m.time_form(p)?.dot(&v);
    Ok(v / w)
}

fn direction(
    media: &Media,
    inc: &IncidentData,
    frame: &QuotientFrame,
    v: Vector,
    medium: u8,
    exceptional: bool,
) -> Result<SnellDirection> {
    let m = media.metric(medium);
    let d = m.dl(&inc.p, &v)?;
    let a = restrict(&inc.alpha, &inc.tangent_basis);
    let b = restrict(&d, &inc.tangent_basis);
    let residual = covector_misfit(&a, &b);
    let lambda = d.dot(&inc.z_prime) / inc.alpha.dot(&inc.z_prime);
    let unbroken = medium == 1 && angle_between(&v, &inc.u) <= 1e-8;
    let straight = if exceptional {
        false
    } else if unbroken {
        true
    } else {
        straight_from_covectors(frame, &inc.alpha, &d, medium)?
    };
    Ok(SnellDirection {
        tangent_to_eta: is_tangent(inc, &v),
        v,
        straight_oriented: straight,
        exceptional,
        lambda,
        residual,
    })
}

fn relabel_by_count(kind: EventKind, n: usize) -> CaseLabel {
    match (kind, n) {
        (EventKind::Refraction, 0) => CaseLabel::AIiiNoCriticalPoints,
        (EventKind::Refraction, 1) => CaseLabel::AI,
        (EventKind::Refraction, _) => CaseLabel::CTwo,
        (EventKind::Reflection, 0) => CaseLabel::NoReturning,
        (EventKind::Reflection, _) => CaseLabel::AstarI,
    }
}

fn finish(
    media: &Media,
    inc: &IncidentData,
    kind: EventKind,
    label: CaseLabel,
    found: Vec<Vector>,
    constructed: Option<(Vector, bool)>,
) -> Result<SnellOutcome> {
    let medium = kind.medium();
    let frame = QuotientFrame::from_incident(inc);
    let borderline = inc.borderline(medium);
    let mut warnings = Vec::new();
    if borderline {
        warnings.push(format!(
            "borderline classification: interface or Π extremal L within ten bands of zero (case {})",
            label.name()
        ));
    }
    let mut label = label;
    let expected = label.expected_count();
    let mut directions = Vec::new();
    if let Some((v, exceptional)) = constructed {
        directions.push(direction(media, inc, &frame, v, medium, exceptional)?);
    } else {
        if found.len() != expected {
            let detail = format!(
                "case {} predicts {expected} direction(s), solver found {}",
                label.name(),
                found.len()
            );
            if borderline {
                label = relabel_by_count(kind, found.len());
                warnings.push(format!("{detail}; relabelled as {}", label.name()));
            } else if found.len() < expected {
                return Err(Error::SolverFailure(detail));
            } else {
                return Err(Error::InternalConsistency(detail));
            }
        }
        for v in found {
            directions.push(direction(media, inc, &frame, v, medium, false)?);
        }
    }
    if directions.iter().any(|d| d.exceptional) {
        warnings.push("exceptional direction: arrival-time criticality is not guaranteed".into());
    }
    let (eta, pi) = if medium == 1 {
        (inc.eta_class_1.char, inc.pi_class_1.char)
    } else {
        (inc.eta_class_2.char, inc.pi_class_2.char)
    };
    Ok(SnellOutcome {
        kind,
        case_label: label,
        directions,
        eta_char: eta,
        pi_char: pi,
        borderline,
        warnings,
    })
}

/// Refracted directions of `inc` into the second medium.
pub fn solve_refraction(media: &Media, inc: &IncidentData) -> Result<SnellOutcome> {
    let m = &media.metric2;
    let label = predict_refraction(inc);
    let side_ok = |v: &Vector| inc.phi.dot(v) >= -SIDE_TOL * inc.phi.norm() * v.norm();
    let (found, constructed) = match label {
        CaseLabel::AIi => (Vec::new(), Some((tangency_direction(m, &inc.p, &inc.pi_basis)?, false))),
        CaseLabel::BIiExceptional | CaseLabel::ExceptionalOnly => {
            (Vec::new(), Some((tangency_direction(m, &inc.p, &inc.tangent_basis)?, true)))
        }
        CaseLabel::NoCrossing | CaseLabel::NotPossible => (Vec::new(), None),
        _ => {
            let mut out = Vec::new();
            for v in find_roots(m, inc, label.expected_count())? {
                if side_ok(&v) && !hyperplane_is_tangent(m, inc, &v)? {
                    out.push(v);
                }
            }
            (out, None)
        }
    };
    finish(media, inc, EventKind::Refraction, label, found, constructed)
}

/// Reflected directions of `inc` back into the first medium.
pub fn solve_reflection(media: &Media, inc: &IncidentData) -> Result<SnellOutcome> {
    let m = &media.metric1;
    let label = predict_reflection(inc);
    let side_ok = |v: &Vector| inc.phi.dot(v) <= SIDE_TOL * inc.phi.norm() * v.norm();
    let (found, constructed) = match label {
        CaseLabel::AstarIiUnbroken => (Vec::new(), Some((inc.u.clone(), false))),
        CaseLabel::BstarExceptional => (Vec::new(), Some((tangency_direction(m, &inc.p, &inc.tangent_basis)?, true))),
        CaseLabel::NoReturning | CaseLabel::NotPossible => (Vec::new(), None),
        _ => {
            let mut out = Vec::new();
            for v in find_roots(m, inc, 2)? {
                if side_ok(&v) && angle_between(&v, &inc.u) > DEDUP_ANGLE && !hyperplane_is_tangent(m, inc, &v)? {
                    out.push(v);
                }
            }
            (out, None)
        }
    };
    finish(media, inc, EventKind::Reflection, label, found, constructed)
}
