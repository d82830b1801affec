//! Generators for the benchmark problem families. Every generator is a pure
//! function of its parameters and seed.

pub mod graphs;
pub mod sat;

use ncopt::model::{ConicConstraint, NonconvexAtom, Problem, QuadraticForm};
use ncopt::numerics::Triplet;
use ncopt::sets::{SetDescriptor, SetInstance};
use ncopt::{Error, Result};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

pub use graphs::NamedGraph;

/// Circle radii for the packing family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Radii {
    Equal(f64),
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Regressor { m: usize },
    Sat3 { vars: usize, ratio: f64 },
    Circles { n: usize, radii: Radii },
    Tsp { n: usize },
    Factor { n: usize },
    Jobs { n: usize },
    Coverage { n: usize, p: f64 },
    Graphiso { graph: NamedGraph },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Regressor { .. } => "regressor",
            Family::Sat3 { .. } => "sat3",
            Family::Circles { .. } => "circles",
            Family::Tsp { .. } => "tsp",
            Family::Factor { .. } => "factor",
            Family::Jobs { .. } => "jobs",
            Family::Coverage { .. } => "coverage",
            Family::Graphiso { .. } => "graphiso",
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Family::Regressor { m } => (5..=200).contains(&m),
            Family::Sat3 { vars, ratio } => (3..=200).contains(&vars) && ratio > 0.0 && ratio <= 10.0,
            Family::Circles { n, radii } => {
                (2..=50).contains(&n)
                    && match radii {
                        Radii::Equal(r) => r > 0.0 && r.is_finite(),
                        Radii::Uniform { lo, hi } => lo > 0.0 && hi >= lo && hi.is_finite(),
                    }
            }
            Family::Tsp { n } => (3..=100).contains(&n),
            Family::Factor { n } => (2..=30).contains(&n),
            Family::Jobs { n } => (10..=500).contains(&n),
            Family::Coverage { n, p } => (1..=1000).contains(&n) && p > 0.0 && p <= 1.0 && 3.0 / p <= 1000.0,
            Family::Graphiso { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("parameters out of range: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, seed }
    }

    /// Short stable identifier, e.g. `tsp-n8-s3`.
    pub fn id(&self) -> String {
        let size = match &self.family {
            Family::Regressor { m } => format!("m{m}"),
            Family::Sat3 { vars, ratio } => format!("v{vars}-r{ratio}"),
            Family::Circles { n, radii: Radii::Equal(_) } => format!("n{n}-eq"),
            Family::Circles { n, .. } => format!("n{n}-rand"),
            Family::Tsp { n } | Family::Factor { n } | Family::Jobs { n } => format!("n{n}"),
            Family::Coverage { n, p } => format!("n{n}-p{p}"),
            Family::Graphiso { graph } => graph.name().to_string(),
        };
        format!("{}-{size}-s{}", self.family.name(), self.seed)
    }

    pub fn generate(&self) -> Result<Instance> {
        self.family.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let (problem, data) = match self.family {
            Family::Regressor { m } => regressor(&mut rng, m),
            Family::Sat3 { vars, ratio } => sat3(&mut rng, vars, ratio),
            Family::Circles { n, radii } => circles(&mut rng, n, radii),
            Family::Tsp { n } => tsp(&mut rng, n),
            Family::Factor { n } => factor(&mut rng, n),
            Family::Jobs { n } => jobs(&mut rng, n),
            Family::Coverage { n, p } => coverage(&mut rng, n, p),
            Family::Graphiso { graph } => graphiso(&mut rng, graph),
        }?;
        Ok(Instance { spec: self.clone(), problem, data })
    }
}

/// Family-specific data kept alongside the problem for interpreting results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyData {
    Regressor { x_hat: Vec<f64>, k: usize },
    Sat3 { clauses: Vec<sat::Clause>, witness: Vec<f64>, attempts: usize },
    Circles { radii: Vec<f64> },
    Tsp { points: Vec<[f64; 2]> },
    Factor { k: usize },
    Jobs { z_hat: Vec<f64> },
    Coverage { sets: Vec<Vec<usize>>, k: usize },
    Graphiso { perm: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub problem: Problem,
    pub data: FamilyData,
}

impl Instance {
    /// A feasible point known from the construction, when there is one.
    pub fn planted(&self) -> Option<Vec<f64>> {
        let n = self.problem.num_vars();
        match &self.data {
            FamilyData::Regressor { x_hat, .. } => Some(x_hat.clone()),
            FamilyData::Sat3 { witness, .. } => Some(witness.clone()),
            FamilyData::Jobs { z_hat } => Some(z_hat.clone()),
            FamilyData::Graphiso { perm } => {
                let k = perm.len();
                let mut z = vec![0.0; n];
                for (i, &p) in perm.iter().enumerate() {
                    z[p * k + i] = 1.0;
                }
                Some(z)
            }
            _ => None,
        }
    }

    /// Fraction of the bounding square covered by the circles at `v`.
    pub fn circle_coverage(&self, v: &[f64]) -> Option<f64> {
        let FamilyData::Circles { radii } = &self.data else {
            return None;
        };
        let side = v[2 * radii.len()];
        let area: f64 = radii.iter().map(|r| std::f64::consts::PI * r * r).sum();
        Some(area / (side * side))
    }

    /// Largest violation of the wall and non-overlap conditions at `v`.
    pub fn circle_violation(&self, v: &[f64]) -> Option<f64> {
        let FamilyData::Circles { radii } = &self.data else {
            return None;
        };
        let n = radii.len();
        let side = v[2 * n];
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for c in 0..2 {
                let x = v[2 * i + c];
                worst = worst.max(radii[i] - x).max(x - (side - radii[i]));
            }
            for j in i + 1..n {
                let d = ((v[2 * i] - v[2 * j]).powi(2) + (v[2 * i + 1] - v[2 * j + 1]).powi(2)).sqrt();
                worst = worst.max(radii[i] + radii[j] - d);
            }
        }
        Some(worst)
    }
}

/// `||L v - t||^2` for sparse rows `(terms, t)`.
fn least_squares(n: usize, rows: &[(Vec<(usize, f64)>, f64)]) -> QuadraticForm {
    let mut p: Vec<Triplet> = Vec::new();
    let mut q = vec![0.0; n];
    let mut r0 = 0.0;
    for (terms, t) in rows {
        for &(i, a) in terms {
            for &(j, b) in terms {
                p.push((i, j, 2.0 * a * b));
            }
            q[i] -= 2.0 * a * t;
        }
        r0 += t * t;
    }
    QuadraticForm::new(n, &p, q, r0)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn atom(desc: SetDescriptor, indices: Vec<usize>) -> Result<NonconvexAtom> {
    Ok(NonconvexAtom::new(SetInstance::new(desc)?, indices))
}

type Generated = Result<(Problem, FamilyData)>;

fn regressor(rng: &mut ChaCha8Rng, m: usize) -> Generated {
    let n = 2 * m;
    let k = m / 5;
    let a: Vec<f64> = (0..m * n).map(|_| normal(rng)).collect();
    let mut x_hat = vec![0.0; n];
    for j in sample(rng, n, k) {
        x_hat[j] = rng.random_range(-1.0..=1.0);
    }
    let ax: Vec<f64> = (0..m).map(|i| (0..n).map(|j| a[i * n + j] * x_hat[j]).sum()).collect();
    let sigma = (ax.iter().map(|x| x * x).sum::<f64>() / (400.0 * m as f64)).sqrt();
    let rows: Vec<_> = (0..m)
        .map(|i| {
            let terms = (0..n).map(|j| (j, a[i * n + j])).collect();
            (terms, ax[i] + sigma * normal(rng))
        })
        .collect();
    let f = least_squares(n, &rows);
    let card = atom(SetDescriptor::Card { n, k, bound: 1.0 }, (0..n).collect())?;
    Ok((Problem::new(n, f, vec![], vec![card])?, FamilyData::Regressor { x_hat, k }))
}

/// Satisfiable formulas only: draws until the DPLL check succeeds.
fn sat3(rng: &mut ChaCha8Rng, vars: usize, ratio: f64) -> Generated {
    let m = (ratio * vars as f64).round().max(1.0) as usize;
    for attempt in 1..=10_000 {
        let clauses = sat::random_formula(rng, vars, m);
        if let Some(witness) = sat::solve(vars, &clauses) {
            let problem = sat3_problem(vars, &clauses)?;
            return Ok((problem, FamilyData::Sat3 { clauses, witness, attempts: attempt }));
        }
    }
    Err(Error::InvalidInput(format!("no satisfiable formula with {vars} variables and {m} clauses")))
}

/// `A z <= b` with `a_ij = -1` for `x_j`, `+1` for its negation and
/// `b_i` the number of negated literals minus one.
pub fn sat3_problem(vars: usize, clauses: &[sat::Clause]) -> Result<Problem> {
    let cons = clauses
        .iter()
        .map(|c| {
            let terms: Vec<(usize, f64)> =
                c.iter().map(|&l| (l.unsigned_abs() as usize - 1, if l > 0 { -1.0 } else { 1.0 })).collect();
            let negated = c.iter().filter(|&&l| l < 0).count() as f64;
            ConicConstraint::le(&terms, negated - 1.0)
        })
        .collect();
    let b = atom(SetDescriptor::Boolean { n: vars }, (0..vars).collect())?;
    Problem::new(vars, QuadraticForm::zero(vars), cons, vec![b])
}

/// Variables: centers `x_i` (2n), side `l`, then pairwise offsets `z_ij`.
fn circles(rng: &mut ChaCha8Rng, n: usize, radii: Radii) -> Generated {
    let r: Vec<f64> = match radii {
        Radii::Equal(r) => vec![r; n],
        Radii::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(lo..=hi)).collect(),
    };
    let side = 2 * n;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let nv = side + 1 + 2 * pairs.len();
    let total: f64 = r.iter().sum();
    let mut cons = Vec::new();
    for i in 0..n {
        for c in 0..2 {
            let x = 2 * i + c;
            cons.push(ConicConstraint::ge(&[(x, 1.0)], r[i]));
            cons.push(ConicConstraint::ge(&[(side, 1.0), (x, -1.0)], r[i]));
        }
    }
    let mut atoms = Vec::with_capacity(pairs.len());
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let z = side + 1 + 2 * p;
        for c in 0..2 {
            cons.push(ConicConstraint::eq(&[(2 * i + c, 1.0), (2 * j + c, -1.0), (z + c, -1.0)], 0.0));
        }
        atoms.push(atom(SetDescriptor::Annulus { n: 2, r: r[i] + r[j], outer: 2.0 * total }, vec![z, z + 1])?);
    }
    let mut q = vec![0.0; nv];
    q[side] = 1.0;
    Ok((Problem::new(nv, QuadraticForm::linear(q), cons, atoms)?, FamilyData::Circles { radii: r }))
}

pub fn tour_length(points: &[[f64; 2]], tour: &[usize]) -> f64 {
    let n = tour.len();
    (0..n).map(|i| dist(points[tour[i]], points[tour[(i + 1) % n]])).sum()
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Objective `(1/2) Tr(D Z)` over the row-major cycle matrix `Z`.
fn tsp(rng: &mut ChaCha8Rng, n: usize) -> Generated {
    let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)]).collect();
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            q[i * n + j] = 0.5 * dist(points[i], points[j]);
        }
    }
    let cyc = atom(SetDescriptor::Cycle { n }, (0..n * n).collect())?;
    Ok((Problem::new(n * n, QuadraticForm::linear(q), vec![], vec![cyc])?, FamilyData::Tsp { points }))
}

/// Variables: low-rank part `L` (n*n, row-major), then the diagonal `d`.
fn factor(rng: &mut ChaCha8Rng, n: usize) -> Generated {
    let k = n / 2;
    let f: Vec<f64> = (0..n * k).map(|_| normal(rng)).collect();
    let mut signal = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            signal[i * n + j] = (0..k).map(|c| f[i * k + c] * f[j * k + c]).sum();
        }
        let e: f64 = Exp1.sample(rng);
        signal[i * n + i] += e;
    }
    let power: f64 = signal.iter().map(|x| x * x).sum();
    let sigma = (power / (400.0 * (n * n) as f64)).sqrt();
    let noise: Vec<f64> = (0..n * n).map(|_| sigma * normal(rng)).collect();
    // symmetrized so that the target is a symmetric matrix
    let mut target = signal.clone();
    for i in 0..n {
        for j in 0..n {
            target[i * n + j] += 0.5 * (noise[i * n + j] + noise[j * n + i]);
        }
    }
    let nv = n * n + n;
    let rows: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut terms = vec![(i * n + j, 1.0)];
            if i == j {
                terms.push((n * n + i, 1.0));
            }
            (terms, target[i * n + j])
        })
        .collect();
    let obj = least_squares(nv, &rows);
    let cons = (0..n).map(|i| ConicConstraint::ge(&[(n * n + i, 1.0)], 0.0)).collect();
    let bound = target.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lr = atom(SetDescriptor::SymLowRankPsd { n, k, bound }, (0..n * n).collect())?;
    Ok((Problem::new(nv, obj, cons, vec![lr])?, FamilyData::Factor { k }))
}

/// Maximize profit: objective `-c'z` with `A z <= b`, `0 <= z <= d`, `z` integral.
fn jobs(rng: &mut ChaCha8Rng, n: usize) -> Generated {
    let m = n / 10;
    let nnz = m * n / 10;
    let mut a = vec![0.0; m * n];
    for idx in sample(rng, m * n, nnz) {
        a[idx] = rng.random_range(0.0..=5.0);
    }
    let c: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let d: Vec<usize> = (0..n).map(|_| rng.random_range(1..=5)).collect();
    let z_hat: Vec<f64> = d.iter().map(|&di| rng.random_range(0..=di) as f64).collect();
    let mut cons = Vec::with_capacity(m + 2 * n);
    for i in 0..m {
        let terms: Vec<(usize, f64)> = (0..n).filter(|&j| a[i * n + j] != 0.0).map(|j| (j, a[i * n + j])).collect();
        let b: f64 = terms.iter().map(|&(j, v)| v * z_hat[j]).sum();
        cons.push(ConicConstraint::le(&terms, b));
    }
    for j in 0..n {
        cons.push(ConicConstraint::ge(&[(j, 1.0)], 0.0));
        cons.push(ConicConstraint::le(&[(j, 1.0)], d[j] as f64));
    }
    let int = atom(SetDescriptor::Integer { n, bound: 5.0 }, (0..n).collect())?;
    let obj = QuadraticForm::linear(c.iter().map(|x| -x).collect());
    Ok((Problem::new(n, obj, cons, vec![int])?, FamilyData::Jobs { z_hat }))
}

/// Variables: element indicators `x` (n), then set indicators `y` (m).
fn coverage(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Generated {
    let m = (3.0 / p).round() as usize;
    let k = ((1.0 / (3.0 * p)).floor() as usize).clamp(1, m);
    let sets: Vec<Vec<usize>> = (0..m).map(|_| (0..n).filter(|_| rng.random_bool(p)).collect()).collect();
    let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let mut cons = Vec::with_capacity(n);
    for i in 0..n {
        let mut terms: Vec<(usize, f64)> =
            sets.iter().enumerate().filter(|(_, s)| s.contains(&i)).map(|(j, _)| (n + j, 1.0)).collect();
        terms.push((i, -1.0));
        cons.push(ConicConstraint::ge(&terms, 0.0));
    }
    let atoms = vec![
        atom(SetDescriptor::Boolean { n }, (0..n).collect())?,
        atom(SetDescriptor::Choose { n: m, k }, (n..n + m).collect())?,
    ];
    let obj = QuadraticForm::linear(w.iter().map(|x| -x).chain(std::iter::repeat_n(0.0, m)).collect());
    Ok((Problem::new(n + m, obj, cons, atoms)?, FamilyData::Coverage { sets, k }))
}

/// `||Z A - B Z||_F^2` with `B` a random relabeling of `A`.
fn graphiso(rng: &mut ChaCha8Rng, graph: NamedGraph) -> Generated {
    let n = graph.vertices();
    let a = graph.adjacency();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    // vertex i of A becomes vertex perm[i] of B
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[perm[i] * n + perm[j]] = a[i * n + j];
        }
    }
    let rows: Vec<_> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut terms: Vec<(usize, f64)> = Vec::new();
            for k in 0..n {
                if a[k * n + j] != 0.0 {
                    terms.push((i * n + k, a[k * n + j]));
                }
                if b[i * n + k] != 0.0 {
                    terms.push((k * n + j, -b[i * n + k]));
                }
            }
            (terms, 0.0)
        })
        .collect();
    let obj = least_squares(n * n, &rows);
    let pa = atom(SetDescriptor::Permute { n }, (0..n * n).collect())?;
    Ok((Problem::new(n * n, obj, vec![], vec![pa])?, FamilyData::Graphiso { perm }))
}

#[cfg(test)]
mod tests;
