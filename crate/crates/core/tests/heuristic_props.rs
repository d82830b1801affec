use ncopt::heuristics::{nc_admm_solve, relax_round_polish, HeuristicConfig};
use ncopt::model::{ConicConstraint, NonconvexAtom, Problem, QuadraticForm, DEFAULT_LAMBDA};
use ncopt::oracle::oracle_solve;
use ncopt::sets::{SetDescriptor, SetInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random instance: one discrete atom, two free variables, a PSD coupling
/// and a linear inequality.
fn instance(seed: u64) -> Problem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let desc = match seed % 4 {
        0 => SetDescriptor::Boolean { n: 5 },
        1 => SetDescriptor::Choose { n: 6, k: 2 },
        2 => SetDescriptor::Permute { n: 3 },
        _ => SetDescriptor::Cycle { n: 5 },
    };
    let set = SetInstance::new(desc).unwrap();
    let d = set.dim();
    let n = d + 2;
    let g: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut trip = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v: f64 = (0..n).map(|k| g[k * n + i] * g[k * n + j]).sum();
            trip.push((i, j, v));
        }
    }
    let q: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let row: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.random_range(0.0..1.0))).collect();
    let cons = vec![ConicConstraint::le(&row, 0.5 * d as f64)];
    Problem::new(n, QuadraticForm::new(n, &trip, q, 0.0), cons, vec![NonconvexAtom::new(set, (0..d).collect())])
        .unwrap()
}

#[test]
fn oracle_dominates_and_candidates_are_members() {
    for seed in 0..12 {
        let p = instance(seed);
        let oracle = oracle_solve(&p, DEFAULT_LAMBDA).unwrap();
        let cfg = HeuristicConfig { seed, iterations: 10, restarts: 2, ..Default::default() };
        let (admm, rep) = nc_admm_solve(&p, &cfg).unwrap();
        let (rrp, rep2) = relax_round_polish(&p, &cfg).unwrap();
        for (c, bound) in [(&admm, rep.lower_bound), (&rrp, rep2.lower_bound)] {
            assert!(oracle.candidate.merit <= c.merit + 1e-6, "seed {seed}");
            let z = p.gather_atoms(&c.v);
            assert_eq!(p.project_atoms(&z).unwrap(), z);
            if c.is_feasible() {
                assert!(bound <= c.merit + 1e-5 * c.merit.abs().max(1.0));
            }
        }
    }
}

#[test]
fn reruns_are_identical() {
    let p = instance(3);
    let cfg = HeuristicConfig { seed: 9, iterations: 8, ..Default::default() };
    assert_eq!(nc_admm_solve(&p, &cfg).unwrap(), nc_admm_solve(&p, &cfg).unwrap());
    let cfg = HeuristicConfig { round_samples: 4, ..cfg };
    assert_eq!(relax_round_polish(&p, &cfg).unwrap(), relax_round_polish(&p, &cfg).unwrap());
}

#[test]
fn more_restarts_never_hurt() {
    let p = instance(0);
    let mut last = f64::INFINITY;
    for restarts in 1..=4 {
        let cfg = HeuristicConfig { restarts, iterations: 5, ..Default::default() };
        let (c, _) = nc_admm_solve(&p, &cfg).unwrap();
        assert!(c.merit <= last);
        last = c.merit;
    }
}
