use serde::{Deserialize, Serialize};

use super::{ConicConstraint, NonconvexAtom, Problem, QuadraticForm};
use crate::error::Result;
use crate::numerics::Triplet;
use crate::sets::{SetDescriptor, SetInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomJson {
    pub set: SetDescriptor,
    pub indices: Vec<usize>,
}

/// Interchange form of a [`Problem`]. Constraint rows mean `A v + b in K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemJson {
    pub n: usize,
    #[serde(rename = "P", default)]
    pub p: Vec<Triplet>,
    pub q: Vec<f64>,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub cones: Vec<ConicConstraint>,
    #[serde(default)]
    pub atoms: Vec<AtomJson>,
}

fn sorted(mut t: Vec<Triplet>) -> Vec<Triplet> {
    t.sort_by_key(|a| (a.0, a.1));
    t
}

impl ProblemJson {
    pub fn from_problem(p: &Problem) -> Self {
        let f = &p.objective;
        Self {
            n: p.num_vars,
            p: sorted(f.p.triplets()),
            q: f.q.clone(),
            r0: f.r0,
            cones: p
                .constraints
                .iter()
                .map(|c| ConicConstraint { kind: c.kind, a: sorted(c.a.clone()), b: c.b.clone() })
                .collect(),
            atoms: p
                .atoms
                .iter()
                .map(|a| AtomJson { set: a.set.descriptor().clone(), indices: a.indices.clone() })
                .collect(),
        }
    }

    pub fn into_problem(self) -> Result<Problem> {
        if self.q.len() != self.n || self.p.iter().any(|&(i, j, _)| i >= self.n || j >= self.n) {
            return crate::error::invalid("objective data does not match n");
        }
        let atoms = self
            .atoms
            .into_iter()
            .map(|a| Ok(NonconvexAtom::new(SetInstance::new(a.set)?, a.indices)))
            .collect::<Result<Vec<_>>>()?;
        Problem::new(self.n, QuadraticForm::new(self.n, &self.p, self.q, self.r0), self.cones, atoms)
    }
}

impl Problem {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ProblemJson::from_problem(self)).expect("problem serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let pj: ProblemJson =
            serde_json::from_str(s).map_err(|e| crate::Error::InvalidInput(format!("problem JSON: {e}")))?;
        pj.into_problem()
    }
}
