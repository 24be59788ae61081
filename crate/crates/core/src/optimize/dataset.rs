use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector::StateVector;

/// Which samples an evaluation covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    /// Samples with `t ≤ train_end`.
    Train,
    /// Samples with `t ≤ test_end`.
    Test,
}

/// Observed states of one trajectory at increasing sample times.
///
/// The first sample is the initial condition. The train split ends at one year and the test split
/// at two by default.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryDataset {
    times: Vec<f64>,
    states: Vec<StateVector>,
    pub train_end: f64,
    pub test_end: f64,
}

impl TrajectoryDataset {
    pub fn new(times: Vec<f64>, states: Vec<StateVector>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::DimensionMismatch {
                what: "dataset samples",
                expected: times.len(),
                found: states.len(),
            });
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "dataset times must be finite and strictly increasing".into(),
            ));
        }
        let dim = states[0].dim();
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                what: "dataset state",
                expected: dim,
                found: s.dim(),
            });
        }
        Ok(Self {
            times,
            states,
            train_end: 1.0,
            test_end: 2.0,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn initial_state(&self) -> &StateVector {
        &self.states[0]
    }

    /// Membership of every sample in `split`.
    pub fn mask(&self, split: Split) -> Vec<bool> {
        let end = match split {
            Split::Train => self.train_end,
            Split::Test => self.test_end,
        };
        self.times.iter().map(|&t| t <= end).collect()
    }

    /// The samples of `split`, which always include the initial condition.
    pub fn split(&self, split: Split) -> TrajectoryDataset {
        let n = self.mask(split).iter().filter(|&&m| m).count().max(1);
        Self {
            times: self.times[..n].to_vec(),
            states: self.states[..n].to_vec(),
            train_end: self.train_end,
            test_end: self.test_end,
        }
    }

    /// Reads a table with a header line and columns `t, s0, s1, …`.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut times = Vec::new();
        let mut states = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let values = record
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::InvalidConfig(format!("bad number '{f}': {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            let (t, state) = values
                .split_first()
                .ok_or_else(|| Error::InvalidConfig("empty dataset row".into()))?;
            times.push(*t);
            states.push(StateVector::new(state.to_vec())?);
        }
        Self::new(times, states)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes the header and one row per sample at full round-trip precision.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header = vec!["t".to_string()];
        header.extend(column_names(self.state_dim()));
        wtr.write_record(&header)?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let mut row = vec![format!("{t:?}")];
            row.extend(s.iter().map(|v| format!("{v:?}")));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Three-body states get positional/velocity names, anything else `s0, s1, …`.
fn column_names(dim: usize) -> Vec<String> {
    if dim == 18 {
        let mut names = Vec::with_capacity(18);
        for prefix in ["", "v"] {
            for body in 1..=3 {
                for axis in ["x", "y", "z"] {
                    names.push(format!("{prefix}{axis}{body}"));
                }
            }
        }
        names
    } else {
        (0..dim).map(|i| format!("s{i}")).collect()
    }
}
