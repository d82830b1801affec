use super::*;
use crate::model::{ConicConstraint, NonconvexAtom};
use crate::sets::{SetDescriptor, SetInstance};

fn atom(d: SetDescriptor, idx: Vec<usize>) -> NonconvexAtom {
    NonconvexAtom::new(SetInstance::new(d).unwrap(), idx)
}

/// `||v - t||^2` as a quadratic form.
fn dist_to(t: &[f64]) -> QuadraticForm {
    let n = t.len();
    let diag: Vec<_> = (0..n).map(|i| (i, i, 2.0)).collect();
    QuadraticForm::new(n, &diag, t.iter().map(|x| -2.0 * x).collect(), t.iter().map(|x| x * x).sum())
}

fn boolean_target(t: &[f64]) -> Problem {
    let n = t.len();
    Problem::new(n, dist_to(t), vec![], vec![atom(SetDescriptor::Boolean { n }, (0..n).collect())]).unwrap()
}

#[test]
fn polish_fixes_boolean_and_solves_rest() {
    // min (x - 2)^2 + (x - z)^2 with z fixed at 1 -> x = 1.5
    let f = QuadraticForm::new(2, &[(0, 0, 4.0), (0, 1, -2.0), (1, 0, -2.0), (1, 1, 2.0)], vec![-4.0, 0.0], 4.0);
    let p = Problem::new(2, f, vec![], vec![atom(SetDescriptor::Boolean { n: 1 }, vec![1])]).unwrap();
    let c = polish(&p, &[1.0], DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(c.v[1], 1.0);
    assert!((c.v[0] - 1.5).abs() < 1e-6);
    let mut s = Session::new(&p, DEFAULT_LAMBDA);
    s.polish(&[0.0]).unwrap();
    assert_eq!(s.subproblems(), 1);
    assert!((c.merit - 0.5).abs() < 1e-6);
}

#[test]
fn polish_without_atoms_is_a_convex_solve() {
    let p = Problem::new(1, dist_to(&[3.0]), vec![ConicConstraint::le(&[(0, 1.0)], 1.0)], vec![]).unwrap();
    let c = polish(&p, &[], DEFAULT_LAMBDA).unwrap().unwrap();
    assert!((c.v[0] - 1.0).abs() < 1e-6);
    assert!(c.is_feasible());
}

#[test]
fn polish_regressor_pattern() {
    // ||diag(a) x - b||^2, card(x) <= 2, |x| <= 1, support {1, 3}.
    let a = [1.0, 2.0, 4.0, 0.5];
    let b = [3.0, 1.0, 2.0, 2.0];
    let diag: Vec<_> = (0..4).map(|i| (i, i, 2.0 * a[i] * a[i])).collect();
    let q: Vec<f64> = (0..4).map(|i| -2.0 * a[i] * b[i]).collect();
    let f = QuadraticForm::new(4, &diag, q, b.iter().map(|x| x * x).sum());
    let p = Problem::new(4, f, vec![], vec![atom(SetDescriptor::Card { n: 4, k: 2, bound: 1.0 }, (0..4).collect())])
        .unwrap();
    let c = polish(&p, &[0.0, 0.3, 0.0, 0.2], DEFAULT_LAMBDA).unwrap().unwrap();
    // orthogonal columns: least squares then clip
    let expect = [0.0, (b[1] / a[1]).clamp(-1.0, 1.0), 0.0, (b[3] / a[3]).clamp(-1.0, 1.0)];
    for (x, e) in c.v.iter().zip(expect) {
        assert!((x - e).abs() < 1e-5, "{:?}", c.v);
    }
}

#[test]
fn iterated_polish_discrete_takes_one_round() {
    let p = boolean_target(&[0.2, 0.9]);
    let mut s = Session::new(&p, DEFAULT_LAMBDA);
    let c = s.iterated_polish(&[0.0, 1.0], 50).unwrap().unwrap();
    assert_eq!(s.subproblems(), 0);
    assert_eq!(c.v, vec![0.0, 1.0]);
}

#[test]
fn iterated_polish_rotates_on_annulus() {
    // min ||x - (3, 0)||^2 over 1 <= ||x|| <= 2; optimum (2, 0), value 1.
    let p = Problem::new(
        2,
        dist_to(&[3.0, 0.0]),
        vec![],
        vec![atom(SetDescriptor::Annulus { n: 2, r: 1.0, outer: 2.0 }, vec![0, 1])],
    )
    .unwrap();
    let anchor = [-0.2, 1.5];
    let first = polish(&p, &anchor, DEFAULT_LAMBDA).unwrap().unwrap();
    let c = iterated_polish(&p, &anchor, DEFAULT_LAMBDA).unwrap().unwrap();
    assert!(c.merit <= first.merit);
    // polar sweep oracle
    let best = (0..=36000)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 36000.0;
            (2.0 * t.cos() - 3.0).powi(2) + (2.0 * t.sin()).powi(2)
        })
        .fold(f64::INFINITY, f64::min);
    assert!((c.merit - best).abs() < 1e-3, "{} vs {best}", c.merit);
    let r = (c.v[0].powi(2) + c.v[1].powi(2)).sqrt();
    assert!((1.0 - 1e-6..=2.0 + 1e-6).contains(&r));
}

#[test]
fn iterated_polish_fixed_point() {
    let p = boolean_target(&[1.0]);
    let mut s = Session::new(&p, DEFAULT_LAMBDA);
    let c = s.iterated_polish(&[1.0], 50).unwrap().unwrap();
    assert_eq!(s.subproblems(), 0);
    assert_eq!(c.merit, 0.0);
}

#[test]
fn basic_search_single_boolean() {
    let p = boolean_target(&[0.4]);
    let c = basic_neighbor_search(&p, &[1.0], DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(c.v, vec![0.0]);
    assert!((c.merit - 0.16).abs() < 1e-12);
}

#[test]
fn basic_search_without_neighbors_equals_polish() {
    let p = Problem::new(
        2,
        dist_to(&[3.0, 1.0]),
        vec![],
        vec![atom(SetDescriptor::Annulus { n: 2, r: 1.0, outer: 2.0 }, vec![0, 1])],
    )
    .unwrap();
    let z = [0.0, 1.5];
    let a = basic_neighbor_search(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap();
    let b = polish(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(a, b);
}

fn qap3() -> Problem {
    // tr(C'Z) with a fixed cost matrix
    let cost = [4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0];
    Problem::new(
        9,
        QuadraticForm::linear(cost.to_vec()),
        vec![],
        vec![atom(SetDescriptor::Permute { n: 3 }, (0..9).collect())],
    )
    .unwrap()
}

#[test]
fn basic_search_permutation_matches_enumeration_of_examined() {
    let p = qap3();
    let id = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let s = Session::new(&p, DEFAULT_LAMBDA);
    let mut examined = vec![id.to_vec()];
    examined.extend(s.neighbors(&id, 100).unwrap());
    assert!(examined.len() <= 4);
    let best = examined.iter().map(|z| p.objective(z)).fold(f64::INFINITY, f64::min);
    let c = basic_neighbor_search(&p, &id, DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(c.merit, best);
}

#[test]
fn iterative_search_follows_improving_path() {
    let p = boolean_target(&[1.0, 1.0, 0.0]);
    let r = iterative_neighbor_search(&p, &[0.0, 0.0, 0.0], DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(r.candidate.v, vec![1.0, 1.0, 0.0]);
    assert!(!r.truncated);
    // global check over all 8 points
    let best = crate::sets::SetInstance::new(SetDescriptor::Boolean { n: 3 })
        .unwrap()
        .pieces(8)
        .unwrap()
        .unwrap()
        .iter()
        .map(|r| {
            let z: Vec<f64> = r.fixed.iter().map(|x| x.1).collect();
            p.objective(&z)
        })
        .fold(f64::INFINITY, f64::min);
    assert_eq!(r.candidate.merit, best);
}

#[test]
fn iterative_search_at_local_optimum_returns_polish() {
    let p = boolean_target(&[1.0, 0.0, 1.0]);
    let z = [1.0, 0.0, 1.0];
    let r = iterative_neighbor_search(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap();
    assert_eq!(r.candidate, polish(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap());
}

#[test]
fn iterative_search_cap_truncates() {
    let p = boolean_target(&[1.0, 1.0, 1.0, 1.0]);
    let mut s = Session::new(&p, DEFAULT_LAMBDA);
    let r = s.iterative_neighbor_search(&[0.0; 4], 100, 2).unwrap().unwrap();
    assert!(r.truncated);
    assert_eq!(s.subproblems(), 0);
    assert_eq!(r.candidate.merit, 3.0);
}

#[test]
fn iterative_never_worse_than_basic() {
    let p = qap3();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let z: Vec<f64> = gaussian(&mut rng, 1.0, 9);
        let a = basic_neighbor_search(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap();
        let b = iterative_neighbor_search(&p, &z, DEFAULT_LAMBDA).unwrap().unwrap();
        assert!(b.candidate.merit <= a.merit);
    }
}

#[test]
fn neighbor_sampling_is_capped_and_deterministic() {
    let p = boolean_target(&[0.0; 12]);
    let s = Session::new(&p, DEFAULT_LAMBDA).with_seed(3);
    let z = vec![0.0; 12];
    let a = s.neighbors(&z, 5).unwrap();
    assert_eq!(a.len(), 5);
    assert_eq!(a, s.neighbors(&z, 5).unwrap());
    assert_eq!(s.neighbors(&z, 100).unwrap().len(), 12);
}

#[test]
fn relax_round_polish_integral_relaxation() {
    let p = boolean_target(&[1.0, 0.0]);
    let (c, rep) = relax_round_polish(&p, &HeuristicConfig::default()).unwrap();
    assert_eq!(c.v, vec![1.0, 0.0]);
    assert!((rep.lower_bound - c.merit).abs() < 1e-6);
    assert_eq!(rep.subproblems, 1);
}

#[test]
fn relaxation_bound_below_rounded_merit() {
    // max z1 + z2 s.t. z1 + z2 <= 1.5 over Booleans: relaxed -1.5, best integer -1.
    let p = Problem::new(
        2,
        QuadraticForm::linear(vec![-1.0, -1.0]),
        vec![ConicConstraint::le(&[(0, 1.0), (1, 1.0)], 1.5)],
        vec![atom(SetDescriptor::Boolean { n: 2 }, vec![0, 1])],
    )
    .unwrap();
    let (bound, _) = solve_relaxation(&p).unwrap();
    assert!((bound + 1.5).abs() < 1e-5);
    let (c, _) = nc_admm_solve(&p, &HeuristicConfig::default()).unwrap();
    assert!((c.merit + 1.0).abs() < 1e-9);
    assert!(bound < c.merit);
}

#[test]
fn infeasible_convex_part_is_reported() {
    let p = Problem::new(
        1,
        QuadraticForm::zero(1),
        vec![ConicConstraint::ge(&[(0, 1.0)], 2.0)],
        vec![atom(SetDescriptor::Boolean { n: 1 }, vec![0])],
    )
    .unwrap();
    assert_eq!(solve_relaxation(&p), Err(Error::Infeasible));
    assert_eq!(nc_admm_solve(&p, &HeuristicConfig::default()).unwrap_err(), Error::Infeasible);
    assert_eq!(relax_round_polish(&p, &HeuristicConfig::default()).unwrap_err(), Error::Infeasible);
}

#[test]
fn box_atoms_match_relaxation() {
    // min ||x - t||^2 + x0 x1 coupling, x in [-1, 1]^3 held as a box atom.
    let f = QuadraticForm::new(
        3,
        &[(0, 0, 2.0), (1, 1, 2.0), (2, 2, 2.0), (0, 1, 0.5), (1, 0, 0.5)],
        vec![-4.0, 1.0, -0.5],
        0.0,
    );
    let p = Problem::new(
        3,
        f,
        vec![ConicConstraint::le(&[(0, 1.0), (2, 1.0)], 1.2)],
        vec![atom(SetDescriptor::Box { lower: vec![-1.0; 3], upper: vec![1.0; 3] }, vec![0, 1, 2])],
    )
    .unwrap();
    let (bound, _) = solve_relaxation(&p).unwrap();
    for variant in [AdmmVariant::Paper, AdmmVariant::Standard] {
        let cfg = HeuristicConfig { variant, iterations: 10, ..Default::default() };
        let (c, _) = nc_admm_solve(&p, &cfg).unwrap();
        assert!((c.merit - bound).abs() <= 1e-4 * bound.abs().max(1.0), "{} vs {bound}", c.merit);
        let (r, _) = relax_round_polish(&p, &cfg).unwrap();
        assert!((r.merit - bound).abs() <= 1e-4 * bound.abs().max(1.0));
    }
}

#[test]
fn nc_admm_is_deterministic_and_schedule_free() {
    let p = qap3();
    let cfg = HeuristicConfig { iterations: 5, seed: 11, ..Default::default() };
    let a = nc_admm_solve(&p, &cfg).unwrap();
    let b = nc_admm_solve(&p, &cfg).unwrap();
    let c = nc_admm_solve(&p, &HeuristicConfig { parallel: false, ..cfg.clone() }).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    assert_eq!(a.1.rhos.len(), 5);
    assert!(a.1.rhos.iter().all(|r| (0.0..1.0).contains(r)));
}

#[test]
fn nc_admm_solves_small_qap() {
    let p = qap3();
    let (c, rep) = nc_admm_solve(&p, &HeuristicConfig { iterations: 10, ..Default::default() }).unwrap();
    // enumeration of the six permutations
    let best = SetInstance::new(SetDescriptor::Permute { n: 3 })
        .unwrap()
        .pieces(10)
        .unwrap()
        .unwrap()
        .iter()
        .map(|r| p.objective(&r.fixed.iter().map(|x| x.1).collect::<Vec<_>>()))
        .fold(f64::INFINITY, f64::min);
    assert_eq!(c.merit, best);
    assert!(rep.lower_bound <= c.merit + 1e-6, "{} {}", rep.lower_bound, c.merit);
    assert!(rep.subproblems > 1);
}

#[test]
fn admm_state_targets() {
    let mut s = AdmmState::new(vec![1.0, 2.0]);
    s.w = vec![3.0, 3.0];
    s.u = vec![0.5, -0.5];
    assert_eq!(s.target(AdmmVariant::Paper), vec![2.5, 0.5]);
    assert_eq!(s.target(AdmmVariant::Standard), vec![3.5, 2.5]);
}

#[test]
fn config_validation() {
    assert!(HeuristicConfig::default().validate().is_ok());
    let bad = [
        HeuristicConfig { restarts: 0, ..Default::default() },
        HeuristicConfig { sigma: 0.0, ..Default::default() },
        HeuristicConfig { rho: RhoChoice::Fixed(-1.0), ..Default::default() },
        HeuristicConfig { rho: RhoChoice::Uniform { lo: 1.0, hi: 1.0 }, ..Default::default() },
        HeuristicConfig { lambda: f64::NAN, ..Default::default() },
    ];
    for c in bad {
        assert!(c.validate().is_err());
    }
}

#[test]
fn wrong_atom_length_is_rejected() {
    let p = boolean_target(&[1.0, 0.0]);
    assert!(polish(&p, &[1.0], DEFAULT_LAMBDA).is_err());
}
