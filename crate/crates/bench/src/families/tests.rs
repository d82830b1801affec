use super::*;
use ncopt::model::residual_eval;

fn gen(family: Family, seed: u64) -> Instance {
    InstanceSpec::new(family, seed).generate().unwrap()
}

#[test]
fn sat3_shape_and_coefficients() {
    let inst = gen(Family::Sat3 { vars: 20, ratio: 3.0 }, 1);
    let cons = inst.problem.constraints();
    assert_eq!(cons.len(), 60);
    for c in cons {
        // stored as b - a'z >= 0, so the coefficients are the negated a_ij
        assert_eq!(c.a.len(), 3);
        assert!(c.a.iter().all(|t| t.2 == 1.0 || t.2 == -1.0));
    }
}

#[test]
fn sat3_offsets_count_negated_literals() {
    let inst = gen(Family::Sat3 { vars: 30, ratio: 4.25 }, 4);
    let FamilyData::Sat3 { clauses, .. } = &inst.data else { panic!() };
    assert_eq!(clauses.len(), 128);
    for (c, con) in clauses.iter().zip(inst.problem.constraints()) {
        let negated = c.iter().filter(|&&l| l < 0).count() as f64;
        assert_eq!(con.b, vec![negated - 1.0]);
        for &(_, j, coef) in &con.a {
            let lit = c.iter().find(|l| l.unsigned_abs() as usize == j + 1).unwrap();
            // a_ij = -1 for a plain literal, +1 for a negated one
            assert_eq!(-coef, if *lit > 0 { -1.0 } else { 1.0 });
        }
    }
}

#[test]
fn sat3_constraints_hold_exactly_on_satisfying_assignments() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let clauses = sat::random_formula(&mut rng, 6, 20);
        let p = sat3_problem(6, &clauses).unwrap();
        for mask in 0..64u32 {
            let z: Vec<f64> = (0..6).map(|j| f64::from((mask >> j) & 1)).collect();
            assert_eq!(residual_eval(&p, &z) == 0.0, sat::satisfies(&clauses, &z));
        }
    }
}

#[test]
fn tsp_distances_are_a_metric_matrix() {
    let inst = gen(Family::Tsp { n: 6 }, 7);
    let q = &inst.problem.objective_form().q;
    for i in 0..6 {
        assert_eq!(q[i * 6 + i], 0.0);
        for j in 0..6 {
            assert_eq!(q[i * 6 + j], q[j * 6 + i]);
        }
    }
    // objective of a tour matrix is the tour length
    let FamilyData::Tsp { points } = &inst.data else { panic!() };
    let tour = [0, 3, 1, 5, 2, 4];
    let mut z = vec![0.0; 36];
    for w in 0..6 {
        let (a, b) = (tour[w], tour[(w + 1) % 6]);
        z[a * 6 + b] = 1.0;
        z[b * 6 + a] = 1.0;
    }
    assert!((inst.problem.objective(&z) - tour_length(points, &tour)).abs() < 1e-12);
}

#[test]
fn regressor_dimensions_and_sparsity() {
    let inst = gen(Family::Regressor { m: 30 }, 3);
    assert_eq!(inst.problem.num_vars(), 60);
    let x = inst.planted().unwrap();
    assert!(x.iter().filter(|&&v| v != 0.0).count() <= 6);
    assert!(x.iter().all(|v| v.abs() <= 1.0));
    assert!(inst.problem.atoms()[0].set.contains(&x, 0.0));
}

#[test]
fn least_squares_matches_direct_evaluation() {
    let rows =
        vec![(vec![(0, 2.0), (2, -1.0)], 1.5), (vec![(1, 0.5)], -2.0), (vec![(0, 1.0), (1, 1.0), (2, 1.0)], 0.0)];
    let f = least_squares(3, &rows);
    let v = [0.3, -1.2, 2.5];
    let direct: f64 = rows.iter().map(|(t, b)| (t.iter().map(|&(j, a)| a * v[j]).sum::<f64>() - b).powi(2)).sum();
    assert!((f.eval(&v) - direct).abs() < 1e-12);
}

#[test]
fn planted_points_are_feasible() {
    for family in [
        Family::Sat3 { vars: 25, ratio: 4.0 },
        Family::Jobs { n: 40 },
        Family::Graphiso { graph: NamedGraph::Petersen },
        Family::Graphiso { graph: NamedGraph::Icosahedral },
        Family::Graphiso { graph: NamedGraph::Dodecahedral },
    ] {
        for seed in 0..3 {
            let inst = gen(family.clone(), seed);
            let v = inst.planted().unwrap();
            assert_eq!(residual_eval(&inst.problem, &v), 0.0, "{}", inst.spec.id());
            let z = inst.problem.gather_atoms(&v);
            assert_eq!(inst.problem.project_atoms(&z).unwrap(), z);
        }
    }
}

#[test]
fn graphiso_planted_permutation_has_zero_disagreement() {
    for graph in [NamedGraph::Petersen, NamedGraph::Icosahedral, NamedGraph::Dodecahedral] {
        let inst = gen(Family::Graphiso { graph }, 5);
        assert!(inst.problem.objective(&inst.planted().unwrap()).abs() < 1e-12);
        // identity is almost never an isomorphism here
        let n = graph.vertices();
        let eye: Vec<f64> = (0..n * n).map(|i| f64::from(u8::from(i % (n + 1) == 0))).collect();
        assert!(inst.problem.objective(&eye) > 0.0);
    }
}

#[test]
fn circles_grid_layout_is_feasible() {
    let inst = gen(Family::Circles { n: 4, radii: Radii::Equal(0.5) }, 0);
    let centers = [[0.5, 0.5], [1.5, 0.5], [0.5, 1.5], [1.5, 1.5]];
    let mut v = vec![0.0; inst.problem.num_vars()];
    for (i, c) in centers.iter().enumerate() {
        v[2 * i] = c[0];
        v[2 * i + 1] = c[1];
    }
    v[8] = 2.0;
    let mut p = 0;
    for i in 0..4 {
        for j in i + 1..4 {
            v[9 + 2 * p] = centers[i][0] - centers[j][0];
            v[10 + 2 * p] = centers[i][1] - centers[j][1];
            p += 1;
        }
    }
    assert_eq!(residual_eval(&inst.problem, &v), 0.0);
    let z = inst.problem.gather_atoms(&v);
    assert!(inst.problem.atoms().iter().enumerate().all(|(k, a)| a.set.contains(&z[2 * k..2 * k + 2], 1e-12)));
    assert!(inst.circle_violation(&v).unwrap().abs() < 1e-12);
    assert!((inst.circle_coverage(&v).unwrap() - std::f64::consts::PI / 4.0).abs() < 1e-12);
}

#[test]
fn coverage_sizes() {
    let inst = gen(Family::Coverage { n: 20, p: 0.1 }, 2);
    let FamilyData::Coverage { sets, k } = &inst.data else { panic!() };
    assert_eq!((sets.len(), *k), (30, 3));
    assert_eq!(inst.problem.num_vars(), 50);
}

#[test]
fn factor_objective_vanishes_at_the_target() {
    let inst = gen(Family::Factor { n: 4 }, 1);
    let f = inst.problem.objective_form();
    // minimizer of the unconstrained least squares with d = 0 is L = target = -q/2
    let mut v: Vec<f64> = f.q[..16].iter().map(|x| -0.5 * x).collect();
    v.extend([0.0; 4]);
    assert!(inst.problem.objective(&v).abs() < 1e-9);
}

#[test]
fn generation_is_deterministic_per_seed() {
    for family in [
        Family::Regressor { m: 10 },
        Family::Sat3 { vars: 12, ratio: 3.0 },
        Family::Circles { n: 4, radii: Radii::Uniform { lo: 0.2, hi: 0.5 } },
        Family::Tsp { n: 7 },
        Family::Factor { n: 4 },
        Family::Jobs { n: 20 },
        Family::Coverage { n: 10, p: 0.2 },
        Family::Graphiso { graph: NamedGraph::Petersen },
    ] {
        let a = gen(family.clone(), 9);
        let b = gen(family.clone(), 9);
        let c = gen(family, 10);
        assert_eq!(a.problem.to_json(), b.problem.to_json());
        assert_eq!(a.data, b.data);
        assert_ne!(a.problem.to_json(), c.problem.to_json());
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    for family in [
        Family::Sat3 { vars: 20, ratio: 0.0 },
        Family::Circles { n: 3, radii: Radii::Equal(0.0) },
        Family::Regressor { m: 2 },
        Family::Jobs { n: 5 },
        Family::Tsp { n: 2 },
    ] {
        assert!(matches!(InstanceSpec::new(family, 0).generate(), Err(Error::InvalidInput(_))));
    }
}

#[test]
fn ids_are_readable() {
    assert_eq!(InstanceSpec::new(Family::Tsp { n: 8 }, 3).id(), "tsp-n8-s3");
    assert_eq!(InstanceSpec::new(Family::Graphiso { graph: NamedGraph::Petersen }, 1).id(), "graphiso-petersen-s1");
}
