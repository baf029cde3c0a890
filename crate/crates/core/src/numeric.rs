//! Scalar root finding, 1-D maximisation and central finite differences.

use crate::linalg::{Matrix, Vector};

/// Difference step for a homogeneous function at `v`: relative to `‖v‖` so
/// the truncation error is the same at every scale.
pub fn homogeneous_step(rel: f64, v: &Vector) -> f64 {
    let n = v.norm();
    if n > 0.0 {
        rel * n
    } else {
        rel
    }
}

/// Central-difference gradient with uniform step `h`.
pub fn central_gradient(f: impl Fn(&Vector) -> f64, v: &Vector, h: f64) -> Vector {
    (plain_gradient(&f, v, h) * 4.0 - plain_gradient(&f, v, 2.0 * h)) / 3.0
}

fn plain_gradient(f: &impl Fn(&Vector) -> f64, v: &Vector, h: f64) -> Vector {
    let mut g = Vector::zeros(v.len());
    let mut w = v.clone();
    for i in 0..v.len() {
        w[i] = v[i] + h;
        let a = f(&w);
        w[i] = v[i] - h;
        let b = f(&w);
        w[i] = v[i];
        g[i] = (a - b) / (2.0 * h);
    }
    g
}

/// Central-difference Hessian with uniform step `h`.
pub fn central_hessian(f: impl Fn(&Vector) -> f64, v: &Vector, h: f64) -> Matrix {
    // One Richardson step on (h, 2h) cancels the h² truncation term.
    (plain_hessian(&f, v, h) * 4.0 - plain_hessian(&f, v, 2.0 * h)) / 3.0
}

fn plain_hessian(f: &impl Fn(&Vector) -> f64, v: &Vector, h: f64) -> Matrix {
    let d = v.len();
    let f0 = f(v);
    let mut m = Matrix::zeros(d, d);
    let mut w = v.clone();
    for i in 0..d {
        w[i] = v[i] + h;
        let a = f(&w);
        w[i] = v[i] - h;
        let b = f(&w);
        w[i] = v[i];
        m[(i, i)] = (a - 2.0 * f0 + b) / (h * h);
        for j in (i + 1)..d {
            let mut acc = 0.0;
            for (si, sj, sg) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
                w[i] = v[i] + si * h;
                w[j] = v[j] + sj * h;
                acc += sg * f(&w);
            }
            w[i] = v[i];
            w[j] = v[j];
            let hij = acc / (4.0 * h * h);
            m[(i, j)] = hij;
            m[(j, i)] = hij;
        }
    }
    m
}

/// Illinois variant of regula falsi on a sign-changing bracket `[a, b]`.
/// Stops when `|f| <= ftol` or the bracket is narrower than `xtol`.
pub fn illinois(
    mut f: impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
    ftol: f64,
    max_iter: usize,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut side = 0i8;
    let mut best = if fa.abs() < fb.abs() { a } else { b };
    for _ in 0..max_iter {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if !fc.is_finite() {
            return None;
        }
        best = c;
        if fc.abs() <= ftol || (b - a).abs() <= xtol {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Some(best)
}

/// Golden-section maximisation of a unimodal function on `[a, b]`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let mut best = (x, fx);
    for (p, q) in [(c, fc), (d, fd)] {
        if q > best.1 {
            best = (p, q);
        }
    }
    best
}

/// Golden-section minimisation.
pub fn golden_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, fx) = golden_max(|t| -f(t), a, b, tol);
    (x, -fx)
}
