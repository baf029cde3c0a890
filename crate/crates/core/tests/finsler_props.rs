mod common;

use common::*;
use conesnell::finsler::{sphere_points, CausalChar};
use conesnell::linalg::{orthonormalize, Vector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pointwise_invariants_hold_for_every_family(
        x in coords(3),
        w in coords(3),
        z in coords(3),
        s in 0.0f64..2.0,
    ) {
        let x = Vector::from_vec(x.iter().map(|c| 0.5 * c).collect());
        let w = Vector::from_vec(w);
        prop_assume!(w.rows(1, 2).norm() > 1e-3);
        let z = Vector::from_vec(z);
        for (name, m) in families() {
            if let Err(e) = check_invariants(&m, &x, &w, &z, s) {
                prop_assert!(false, "{name}: {e}");
            }
        }
    }

    #[test]
    fn lifted_vectors_are_lightlike_and_future(w in coords(3)) {
        let w = Vector::from_vec(w);
        prop_assume!(w.rows(1, 2).norm() > 1e-3);
        let x = Vector::zeros(3);
        for (name, m) in families() {
            let v = causal(&m, &x, &w, 0.0);
            let c = m.classify_vector(&x, &v).unwrap();
            prop_assert_eq!(c.char, CausalChar::Lightlike, "{}", name);
            prop_assert!(c.future, "{}", name);
        }
    }
}

/// Dense sampling oracle for the causal character of a subspace.
fn sampled_char(m: &conesnell::finsler::Metric, x: &Vector, basis: &[Vector]) -> (CausalChar, f64) {
    let b = orthonormalize(basis, 1e-10).unwrap();
    let k = b.len();
    let pts = sphere_points(k, 10_000);
    let mut best = f64::NEG_INFINITY;
    for p in &pts {
        let mut v = Vector::zeros(x.len());
        for (c, bi) in p.iter().zip(&b) {
            v.axpy(*c, bi, 1.0);
        }
        best = best.max(m.l(x, &v).unwrap()).max(m.l(x, &(-&v)).unwrap());
    }
    // Worst-case sampling deficit near the maximiser.
    let spacing = if k == 1 { 0.0 } else { (4.0 * std::f64::consts::PI / pts.len() as f64).powf(1.0 / (k - 1) as f64) };
    let g = m.quadratic_matrix(x).unwrap();
    let slack = 4.0 * g.norm() * spacing * spacing + 1e-9;
    let c = if best > 1e-9 {
        CausalChar::Timelike
    } else if best >= -slack {
        CausalChar::Lightlike
    } else {
        CausalChar::Spacelike
    };
    (c, best)
}

#[test]
fn subspace_classifier_matches_dense_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = Vector::zeros(4);
    let mut lightlike = 0;
    for i in 0..100 {
        let m = random_quadratic(&mut rng, 4, 0.3);
        let k = 1 + i % 3;
        let basis: Vec<Vector> = if i % 5 == 0 {
            // Tangent to the cone along a lightlike direction.
            let w = Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
            let u = causal(&m, &x, &w, 0.0);
            let mut b = vec![u.clone()];
            b.extend(m.orthogonal_hyperplane(&x, &u).unwrap().into_iter().filter(|h| (h - &u).norm() > 1e-6).take(k - 1));
            b.truncate(k);
            b
        } else {
            (0..k).map(|_| Vector::from_fn(4, |_, _| rng.random_range(-1.0..1.0))).collect()
        };
        let got = m.classify_subspace(&x, &basis).unwrap();
        let (want, best) = sampled_char(&m, &x, &basis);
        if want == CausalChar::Lightlike {
            lightlike += 1;
        }
        assert_eq!(got.char, want, "case {i}: classifier max {} vs sampled {best}", got.max_l);
    }
    assert!(lightlike >= 10);
}
