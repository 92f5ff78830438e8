use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sweep::{sweep_theta, DatasetRow, SweepConfig, SweepPoint};
use crate::error::{Error, Result};
use crate::problems::{ProblemKind, ProblemSpec};

/// Role of a dataset in the train / retrain / held-out protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolTag {
    Training,
    Retrain1,
    Retrain2,
    Test,
}

impl ProtocolTag {
    pub const ALL: [ProtocolTag; 4] = [Self::Training, Self::Retrain1, Self::Retrain2, Self::Test];

    pub fn name(self) -> &'static str {
        match self {
            Self::Training => "training",
            Self::Retrain1 => "retrain1",
            Self::Retrain2 => "retrain2",
            Self::Test => "test",
        }
    }
}

impl fmt::Display for ProtocolTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Parse(format!("unknown protocol tag `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaDataset {
    pub rows: Vec<DatasetRow>,
    pub tag: ProtocolTag,
}

impl ThetaDataset {
    pub fn new(tag: ProtocolTag) -> Self {
        Self { rows: Vec::new(), tag }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Grid sizes as regression inputs.
    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.n as f64).collect()
    }

    /// Optimal thresholds as regression targets.
    pub fn ys(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.theta_opt).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for r in &self.rows {
            if !seen.insert(r.n) {
                return Err(Error::InvalidParameter(format!("duplicate row for n = {}", r.n)));
            }
            if !(r.theta_opt > 0.0 && r.theta_opt <= 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "theta_opt = {} at n = {} is outside (0, 1]",
                    r.theta_opt, r.n
                )));
            }
        }
        Ok(())
    }

    /// CSV with header `n,theta_opt,iter,residual`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(["n", "theta_opt", "iter", "residual"])?;
        }
        wr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn read_csv<R: Read>(r: R, tag: ProtocolTag) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["n", "theta_opt", "iter", "residual"] {
            return Err(Error::Parse(format!(
                "expected header n,theta_opt,iter,residual, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let rows = rd.deserialize().collect::<std::result::Result<Vec<DatasetRow>, _>>()?;
        let ds = Self { rows, tag };
        ds.validate()?;
        Ok(ds)
    }

    pub fn load(path: impl AsRef<Path>, tag: ProtocolTag) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f, tag)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Traversal curve as CSV with header `theta,iter`, rows in grid order.
pub fn curve_csv(curve: &[SweepPoint]) -> String {
    let mut s = String::from("theta,iter\n");
    for p in curve {
        s.push_str(&format!("{},{}\n", p.theta, p.iterations));
    }
    s
}

/// Full traversal for one dataset row.
#[derive(Debug, Clone, PartialEq)]
pub struct Traversal {
    pub n: usize,
    /// Problem actually swept, including any drawn block count and seed.
    pub problem: ProblemSpec,
    pub curve: Vec<SweepPoint>,
}

/// A dataset together with the side information gathered while sweeping.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBuild {
    pub dataset: ThetaDataset,
    pub curves: Vec<Traversal>,
    /// Grid sizes where no grid point converged; their rows are still kept.
    pub unconverged: Vec<usize>,
    /// Grid sizes whose problem could not be assembled, with the error text.
    pub failures: Vec<(usize, String)>,
}

/// Sweeps each `n` in order. Block diffusion draws the blocks-per-axis
/// count from {11, ..., 19} with a stream seeded by `seed` and uses the
/// matrix index as the coefficient seed.
pub fn build_dataset(base: &SweepConfig, ns: &[usize], tag: ProtocolTag, seed: u64) -> Result<DatasetBuild> {
    if ns.is_empty() {
        return Err(Error::InvalidParameter("dataset needs at least one grid size".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = DatasetBuild {
        dataset: ThetaDataset::new(tag),
        curves: Vec::with_capacity(ns.len()),
        unconverged: Vec::new(),
        failures: Vec::new(),
    };
    for (idx, &n) in ns.iter().enumerate() {
        let mut problem = base.problem.with_n(n);
        if problem.kind == ProblemKind::BlockDiffusion {
            problem.blocks = rng.random_range(11..=19);
            problem.seed = idx as u64;
        }
        match sweep_theta(&base.with_problem(problem.clone())) {
            Ok(res) => {
                if !res.converged {
                    out.unconverged.push(n);
                }
                out.dataset.rows.push(res.row);
                out.curves.push(Traversal {
                    n,
                    problem,
                    curve: res.curve,
                });
            }
            Err(e) => out.failures.push((n, e.to_string())),
        }
    }
    Ok(out)
}

/// `lo, lo + step, ..., <= hi`.
pub fn stepped_range(lo: usize, hi: usize, step: usize) -> Vec<usize> {
    (lo..=hi).step_by(step.max(1)).collect()
}
