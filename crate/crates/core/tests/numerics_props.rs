use ncopt::numerics::{dot, norm2, soc_project_in_place, svd, sym_eig, DenseMatrix};
use proptest::prelude::*;

fn matrix(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(m, n)| {
        prop::collection::vec(-10.0..10.0f64, m * n).prop_map(move |d| DenseMatrix::new(m, n, d).unwrap())
    })
}

fn symmetric(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-10.0..10.0f64, n * n).prop_map(move |d| {
            let a = DenseMatrix::new(n, n, d).unwrap();
            let t = a.transpose();
            let mut s = DenseMatrix::zeros(n, n);
            for (o, (x, y)) in s.as_mut_slice().iter_mut().zip(a.as_slice().iter().zip(t.as_slice())) {
                *o = 0.5 * (x + y);
            }
            s
        })
    })
}

fn max_dev_from_identity(q: &DenseMatrix) -> f64 {
    let g = q.transpose().matmul(q);
    g.sub(&DenseMatrix::identity(g.rows())).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn eig_reconstructs(a in symmetric(7)) {
        let e = sym_eig(&a).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!(e.reconstruct().sub(&a).max_abs() <= 1e-9 * scale);
        prop_assert!(max_dev_from_identity(&e.eigenvectors) <= 1e-10);
        prop_assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn svd_reconstructs(z in matrix(7)) {
        let d = svd(&z).unwrap();
        let scale = z.max_abs().max(1.0);
        prop_assert!(d.reconstruct().sub(&z).max_abs() <= 1e-9 * scale);
        prop_assert!(max_dev_from_identity(&d.u) <= 1e-9);
        prop_assert!(max_dev_from_identity(&d.v) <= 1e-9);
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(d.singular_values.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn soc_projection_properties(
        a in prop::collection::vec(-5.0..5.0f64, 1..6),
        shift in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let mut p = a.clone();
        soc_project_in_place(&mut p);
        prop_assert!(norm2(&p[1..]) <= p[0] + 1e-12);
        let mut again = p.clone();
        soc_project_in_place(&mut again);
        for (x, y) in again.iter().zip(&p) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        // nonexpansive
        let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| x + s).collect();
        let mut pb = b.clone();
        soc_project_in_place(&mut pb);
        let d_in: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let d_out: f64 = p.iter().zip(&pb).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d_out <= d_in + 1e-12);
        // Moreau: a = P(a) - P(-a), with the two parts orthogonal
        let mut neg: Vec<f64> = a.iter().map(|x| -x).collect();
        soc_project_in_place(&mut neg);
        for ((x, y), z) in a.iter().zip(&p).zip(&neg) {
            prop_assert!((x - (y - z)).abs() <= 1e-9);
        }
        prop_assert!(dot(&p, &neg).abs() <= 1e-9 * (1.0 + dot(&a, &a)));
    }
}
