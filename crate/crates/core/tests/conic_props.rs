use ncopt::conic::{solve_cone_qp, ConeBlock, ConeKind, ConeProgram, SolveStatus};
use ncopt::numerics::CsrMatrix;
use proptest::prelude::*;

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            let (top, bottom) = a.split_at_mut(r);
            for (x, y) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *x -= f * y;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

fn dense_triplets(m: &[Vec<f64>]) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::new();
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            t.push((i, j, v));
        }
    }
    t
}

fn gram(c: &[Vec<f64>], n: usize) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; n]; n];
    for row in c {
        for i in 0..n {
            for j in 0..n {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    g
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0..2.0f64, cols), rows)
}

/// n, then (A, b) for the objective and (E, f) for the equalities.
type LsCase = (usize, Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>, Vec<f64>);

fn ls_case() -> impl Strategy<Value = LsCase> {
    (1usize..=10, 0usize..=4).prop_flat_map(|(n, p)| {
        let p = p.min(n - 1);
        (
            Just(n),
            matrix(n + 2, n),
            prop::collection::vec(-3.0..3.0f64, n + 2),
            matrix(p, n),
            prop::collection::vec(-3.0..3.0f64, p),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn equality_constrained_least_squares((n, c, d, e, f) in ls_case()) {
        let g = gram(&c, n);
        let p_dense: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|v| 2.0 * v).collect()).collect();
        let q: Vec<f64> = (0..n).map(|j| -2.0 * c.iter().zip(&d).map(|(r, di)| r[j] * di).sum::<f64>()).collect();
        let m = e.len();
        let cp = ConeProgram::new(
            CsrMatrix::from_triplets(n, n, &dense_triplets(&p_dense)),
            q.clone(),
            CsrMatrix::from_triplets(m, n, &dense_triplets(&e)),
            f.clone(),
            if m > 0 { vec![ConeBlock::new(ConeKind::Zero, m)] } else { vec![] },
        ).unwrap();

        let mut kkt = vec![vec![0.0; n + m]; n + m];
        let mut rhs = vec![0.0; n + m];
        for i in 0..n {
            for j in 0..n {
                kkt[i][j] = p_dense[i][j];
            }
            rhs[i] = -q[i];
        }
        for (r, row) in e.iter().enumerate() {
            for j in 0..n {
                kkt[n + r][j] = row[j];
                kkt[j][n + r] = row[j];
            }
            rhs[n + r] = f[r];
        }
        let exact = gauss_solve(kkt, rhs);
        prop_assume!(exact.iter().all(|v| v.is_finite() && v.abs() < 1e6));

        let sol = solve_cone_qp(&cp, None).unwrap();
        prop_assert_eq!(sol.status, SolveStatus::Optimal);
        let scale = exact[..n].iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            prop_assert!((sol.v[j] - exact[j]).abs() <= 1e-5 * scale, "{:?} vs {:?}", sol.v, &exact[..n]);
        }
    }
}

fn box_case() -> impl Strategy<Value = (usize, Vec<Vec<f64>>, Vec<f64>, u64)> {
    (1usize..=6).prop_flat_map(|n| (Just(n), matrix(n, n), prop::collection::vec(-3.0..3.0f64, n), any::<u64>()))
}

fn objective(p: &[Vec<f64>], q: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut v = 0.0;
    for i in 0..n {
        for j in 0..n {
            v += 0.5 * x[i] * p[i][j] * x[j];
        }
        v += q[i] * x[i];
    }
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Optimal objective is no worse than 1 000 feasible samples, for a box
    /// and for a Euclidean ball.
    #[test]
    fn beats_random_feasible_points((n, m, q, seed) in box_case()) {
        use rand::{Rng, SeedableRng};
        let p = gram(&m, n);
        let ptrip = dense_triplets(&p);
        let mut a_box = Vec::new();
        let mut b_box = Vec::new();
        for j in 0..n {
            a_box.push((2 * j, j, -1.0));
            b_box.push(0.0);
            a_box.push((2 * j + 1, j, 1.0));
            b_box.push(1.0);
        }
        let boxed = ConeProgram::new(
            CsrMatrix::from_triplets(n, n, &ptrip), q.clone(),
            CsrMatrix::from_triplets(2 * n, n, &a_box), b_box,
            vec![ConeBlock::new(ConeKind::NonNeg, 2 * n)],
        ).unwrap();
        let ball_a: Vec<_> = (0..n).map(|j| (j + 1, j, -1.0)).collect();
        let mut ball_b = vec![0.0; n + 1];
        ball_b[0] = 1.0;
        let ball = ConeProgram::new(
            CsrMatrix::from_triplets(n, n, &ptrip), q.clone(),
            CsrMatrix::from_triplets(n + 1, n, &ball_a), ball_b,
            vec![ConeBlock::new(ConeKind::Soc, n + 1)],
        ).unwrap();

        let sb = solve_cone_qp(&boxed, None).unwrap();
        let sl = solve_cone_qp(&ball, None).unwrap();
        prop_assert_eq!(sb.status, SolveStatus::Optimal);
        prop_assert_eq!(sl.status, SolveStatus::Optimal);
        let fb = objective(&p, &q, &sb.v);
        let fl = objective(&p, &q, &sl.v);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let in_box: Vec<f64> = raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
            let nr = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
            let in_ball: Vec<f64> = raw.iter().map(|v| if nr > 1.0 { v / nr } else { *v }).collect();
            prop_assert!(fb <= objective(&p, &q, &in_box) + 1e-6 * fb.abs().max(1.0));
            prop_assert!(fl <= objective(&p, &q, &in_ball) + 1e-6 * fl.abs().max(1.0));
        }
    }
}
