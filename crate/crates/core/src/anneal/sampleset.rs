use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{save_problem, Convention, ProblemFile, QuadraticBinaryProblem};

/// Energy agreement required when revalidating records.
const ENERGY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub assignment: Vec<i8>,
    pub energy: f64,
    pub occurrences: usize,
}

/// Reads aggregated by identical assignment, ordered by energy and then
/// lexicographically by assignment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSet {
    pub convention: Convention,
    pub num_vars: usize,
    pub records: Vec<SampleRecord>,
}

impl SampleSet {
    /// Aggregate raw reads, computing each energy from `problem`.
    pub fn from_reads(problem: &QuadraticBinaryProblem, reads: Vec<Vec<i8>>) -> Result<Self> {
        let mut counts: BTreeMap<Vec<i8>, usize> = BTreeMap::new();
        for r in reads {
            problem.validate_assignment(&r)?;
            *counts.entry(r).or_insert(0) += 1;
        }
        let records = counts
            .into_iter()
            .map(|(assignment, occurrences)| SampleRecord {
                energy: problem.energy_unchecked(&assignment),
                assignment,
                occurrences,
            })
            .collect();
        Ok(Self::sorted(problem.convention(), problem.num_vars(), records))
    }

    fn sorted(convention: Convention, num_vars: usize, mut records: Vec<SampleRecord>) -> Self {
        records.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.assignment.cmp(&b.assignment)));
        SampleSet {
            convention,
            num_vars,
            records,
        }
    }

    pub fn num_reads(&self) -> usize {
        self.records.iter().map(|r| r.occurrences).sum()
    }

    pub fn lowest(&self) -> Option<&SampleRecord> {
        self.records.first()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// One entry per read.
    pub fn expand(&self) -> Vec<&[i8]> {
        self.records
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.assignment.as_slice(), r.occurrences))
            .collect()
    }

    /// Records and energies consistent with `problem`.
    pub fn validate(&self, problem: &QuadraticBinaryProblem) -> Result<()> {
        if self.convention != problem.convention() || self.num_vars != problem.num_vars() {
            return Err(Error::SampleSet("sample set does not match the problem".into()));
        }
        for (i, r) in self.records.iter().enumerate() {
            problem
                .validate_assignment(&r.assignment)
                .map_err(|e| Error::SampleSet(format!("record {i}: {e}")))?;
            if r.occurrences == 0 {
                return Err(Error::SampleSet(format!("record {i} has zero occurrences")));
            }
            let e = problem.energy_unchecked(&r.assignment);
            if (e - r.energy).abs() > ENERGY_TOL * e.abs().max(1.0) {
                return Err(Error::SampleSet(format!(
                    "record {i} claims energy {} but the problem gives {e}",
                    r.energy
                )));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()?;
        Ok(())
    }
}

/// Write `problem` in the shared problem format for an outside sampler.
pub fn export_for_external_sampler(problem: &QuadraticBinaryProblem, path: impl AsRef<Path>) -> Result<()> {
    save_problem(&ProblemFile::from_problem(problem), path)
}

/// Read a sample set and check every record against `problem`.
pub fn import_sampleset(path: impl AsRef<Path>, problem: &QuadraticBinaryProblem) -> Result<SampleSet> {
    let set: SampleSet = serde_json::from_reader(BufReader::new(File::open(path)?))?;
    set.validate(problem)?;
    let SampleSet {
        convention,
        num_vars,
        records,
    } = set;
    Ok(SampleSet::sorted(convention, num_vars, records))
}
