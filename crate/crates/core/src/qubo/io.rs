use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AncillaPlan, Convention, QuadraticBinaryProblem};
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Topology {
    pub chimera: usize,
}

/// On-disk problem payload, also the hand-off format for external samplers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub convention: Convention,
    pub num_vars: usize,
    pub linear: Vec<(usize, f64)>,
    pub quadratic: Vec<(usize, usize, f64)>,
    pub offset: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ancilla_plan: Option<AncillaPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<Topology>,
}

impl ProblemFile {
    pub fn from_problem(problem: &QuadraticBinaryProblem) -> Self {
        ProblemFile {
            convention: problem.convention(),
            num_vars: problem.num_vars(),
            linear: problem
                .linear()
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(i, &h)| (i, h))
                .collect(),
            quadratic: problem.quadratic().iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
            offset: problem.offset(),
            ancilla_plan: None,
            topology: None,
        }
    }

    pub fn with_plan(mut self, plan: AncillaPlan) -> Self {
        self.ancilla_plan = Some(plan);
        self
    }

    pub fn with_topology(mut self, chimera: usize) -> Self {
        self.topology = Some(Topology { chimera });
        self
    }

    /// Rebuild the problem, rejecting duplicate entries and bad ids.
    pub fn to_problem(&self) -> Result<QuadraticBinaryProblem> {
        let mut p = QuadraticBinaryProblem::new(self.num_vars, self.convention);
        let mut seen = BTreeSet::new();
        for &(i, h) in &self.linear {
            if !seen.insert(i) {
                return Err(invalid(format!("duplicate linear entry for variable {i}")));
            }
            p.add_linear(i, h)?;
        }
        let mut pairs = BTreeSet::new();
        for &(i, j, c) in &self.quadratic {
            let key = (i.min(j), i.max(j));
            if !pairs.insert(key) {
                return Err(invalid(format!("duplicate coupler ({i}, {j})")));
            }
            p.add_quadratic(i, j, c)?;
        }
        p.add_offset(self.offset)?;
        if let Some(plan) = &self.ancilla_plan {
            if plan.num_vars() != self.num_vars {
                return Err(invalid("ancilla plan does not match num_vars"));
            }
        }
        Ok(p)
    }
}

pub fn save_problem(file: &ProblemFile, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, file)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile> {
    let file: ProblemFile = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    file.to_problem()?;
    Ok(file)
}
