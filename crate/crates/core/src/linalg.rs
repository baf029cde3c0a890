//! Small dense helpers shared by the geometry modules.

use nalgebra::{DMatrix, DVector};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Gram-Schmidt with re-orthogonalisation. Returns `None` when the family is
/// rank deficient relative to `rel_tol`.
pub fn orthonormalize(vectors: &[Vector], rel_tol: f64) -> Option<Vec<Vector>> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let nw = w.norm();
        if nw <= rel_tol * scale {
            return None;
        }
        out.push(w / nw);
    }
    Some(out)
}

/// Orthonormal basis of the Euclidean orthogonal complement of `normal`
/// (equivalently the kernel of `normal` read as a covector). The coordinate
/// axis most aligned with the normal is dropped and the rest are
/// orthogonalised in axis order, so a coordinate normal yields the remaining
/// axes unchanged.
pub fn orthonormal_complement(normal: &Vector) -> Vec<Vector> {
    let d = normal.len();
    let nn = normal.norm();
    let u = normal / nn;
    let mut drop = 0;
    for i in 1..d {
        if u[i].abs() > u[drop].abs() {
            drop = i;
        }
    }
    let mut out: Vec<Vector> = Vec::with_capacity(d - 1);
    for i in (0..d).filter(|&i| i != drop) {
        let mut w = Vector::zeros(d);
        w[i] = 1.0;
        for _ in 0..2 {
            let c = u.dot(&w);
            w.axpy(-c, &u, 1.0);
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let nw = w.norm();
        out.push(w / nw);
    }
    out
}

/// Angle between two nonzero vectors, robust near 0 and π.
pub fn angle_between(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    let ua = a / na;
    let ub = b / nb;
    let s = (&ua - &ub).norm();
    let t = (&ua + &ub).norm();
    2.0 * s.atan2(t)
}

/// Matrix whose columns are the given vectors.
pub fn columns(vs: &[Vector]) -> Matrix {
    let rows = vs.first().map(|v| v.len()).unwrap_or(0);
    Matrix::from_fn(rows, vs.len(), |i, j| vs[j][i])
}

/// Largest eigenvalue and its unit eigenvector of a symmetric matrix.
pub fn sym_max_eigen(m: &Matrix) -> (f64, Vector) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut k = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[k] {
            k = i;
        }
    }
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Counts of (positive, negative) eigenvalues beyond `rel_tol` of the largest
/// magnitude; `None` if any eigenvalue sits inside the band.
pub fn signature(m: &Matrix, rel_tol: f64) -> Option<(usize, usize)> {
    let sym = (m + m.transpose()) * 0.5;
    let ev = sym.symmetric_eigenvalues();
    let big = ev.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if big == 0.0 || !big.is_finite() {
        return None;
    }
    let mut pos = 0;
    let mut neg = 0;
    for &e in ev.iter() {
        if e > rel_tol * big {
            pos += 1;
        } else if e < -rel_tol * big {
            neg += 1;
        } else {
            return None;
        }
    }
    Some((pos, neg))
}

pub fn unit(v: &Vector) -> Vector {
    v / v.norm()
}
