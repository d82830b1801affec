//! Random 3-CNF formulas and a small DPLL solver used to keep only
//! satisfiable ones.

use rand::seq::index::sample;
use rand::Rng;

/// A literal is `+(j+1)` for `x_j` and `-(j+1)` for its negation.
pub type Clause = [i32; 3];

/// Draws `clauses` clauses over `vars` variables: three distinct variables
/// per clause, each negated with probability one half.
pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, vars: usize, clauses: usize) -> Vec<Clause> {
    (0..clauses)
        .map(|_| {
            let picked = sample(rng, vars, 3);
            let mut c = [0; 3];
            for (slot, j) in c.iter_mut().zip(picked) {
                let lit = j as i32 + 1;
                *slot = if rng.random_bool(0.5) { -lit } else { lit };
            }
            c
        })
        .collect()
}

fn lit_value(assign: &[Option<bool>], lit: i32) -> Option<bool> {
    let v = assign[lit.unsigned_abs() as usize - 1]?;
    Some(if lit > 0 { v } else { !v })
}

fn set_lit(assign: &mut [Option<bool>], trail: &mut Vec<usize>, lit: i32) {
    let j = lit.unsigned_abs() as usize - 1;
    assign[j] = Some(lit > 0);
    trail.push(j);
}

/// Unit propagation to a fixed point; `false` on a conflict.
fn propagate(clauses: &[Clause], assign: &mut [Option<bool>], trail: &mut Vec<usize>) -> bool {
    loop {
        let mut changed = false;
        for c in clauses {
            let mut open = None;
            let mut n_open = 0;
            let mut sat = false;
            for &lit in c {
                match lit_value(assign, lit) {
                    Some(true) => {
                        sat = true;
                        break;
                    }
                    Some(false) => {}
                    None => {
                        n_open += 1;
                        open = Some(lit);
                    }
                }
            }
            if sat {
                continue;
            }
            match (n_open, open) {
                (0, _) => return false,
                (1, Some(lit)) => {
                    set_lit(assign, trail, lit);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return true;
        }
    }
}

fn search(clauses: &[Clause], assign: &mut Vec<Option<bool>>) -> bool {
    let mut trail = Vec::new();
    if !propagate(clauses, assign, &mut trail) {
        trail.iter().for_each(|&j| assign[j] = None);
        return false;
    }
    // branch on the first variable of the first open clause
    let branch = clauses.iter().find_map(|c| {
        if c.iter().any(|&l| lit_value(assign, l) == Some(true)) {
            return None;
        }
        c.iter().copied().find(|&l| lit_value(assign, l).is_none())
    });
    let Some(lit) = branch else {
        return true;
    };
    for choice in [lit, -lit] {
        let j = choice.unsigned_abs() as usize - 1;
        assign[j] = Some(choice > 0);
        if search(clauses, assign) {
            return true;
        }
        assign[j] = None;
    }
    trail.iter().for_each(|&j| assign[j] = None);
    false
}

/// Returns a satisfying 0/1 assignment if one exists. Variables left free
/// by the search are set to 0.
pub fn solve(vars: usize, clauses: &[Clause]) -> Option<Vec<f64>> {
    let mut assign = vec![None; vars];
    search(clauses, &mut assign).then(|| assign.iter().map(|a| f64::from(u8::from(a.unwrap_or(false)))).collect())
}

pub fn satisfies(clauses: &[Clause], z: &[f64]) -> bool {
    clauses.iter().all(|c| {
        c.iter().any(|&l| {
            let v = z[l.unsigned_abs() as usize - 1] > 0.5;
            if l > 0 {
                v
            } else {
                !v
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute_force(vars: usize, clauses: &[Clause]) -> bool {
        (0..1u32 << vars).any(|mask| {
            let z: Vec<f64> = (0..vars).map(|j| f64::from((mask >> j) & 1)).collect();
            satisfies(clauses, &z)
        })
    }

    #[test]
    fn dpll_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..300 {
            let vars = 4 + trial % 6;
            let m = rng.random_range(1..=6 * vars);
            let f = random_formula(&mut rng, vars, m);
            let got = solve(vars, &f);
            assert_eq!(got.is_some(), brute_force(vars, &f), "{f:?}");
            if let Some(z) = got {
                assert!(satisfies(&f, &z));
            }
        }
    }

    #[test]
    fn contradiction_is_unsat() {
        // all eight sign patterns over three variables
        let f: Vec<Clause> = (0..8)
            .map(|m| {
                let s = |b: i32, l: i32| if (m >> b) & 1 == 1 { -l } else { l };
                [s(0, 1), s(1, 2), s(2, 3)]
            })
            .collect();
        assert!(solve(3, &f).is_none());
        assert!(solve(3, &f[..7]).is_some());
    }

    #[test]
    fn clauses_use_distinct_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for c in random_formula(&mut rng, 5, 200) {
            let mut v: Vec<u32> = c.iter().map(|l| l.unsigned_abs()).collect();
            v.sort_unstable();
            v.dedup();
            assert_eq!(v.len(), 3);
            assert!(v.iter().all(|&x| (1..=5).contains(&x)));
        }
    }
}
