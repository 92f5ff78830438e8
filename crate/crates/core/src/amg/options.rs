use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coarsening {
    /// Classical Ruge-Stuben first pass.
    #[serde(rename = "rs")]
    RugeStuben,
    Pmis,
}

impl std::str::FromStr for Coarsening {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rs" | "ruge-stuben" => Ok(Coarsening::RugeStuben),
            "pmis" => Ok(Coarsening::Pmis),
            other => Err(Error::InvalidParameter(format!(
                "unknown coarsening `{other}` (expected rs or pmis)"
            ))),
        }
    }
}

impl std::fmt::Display for Coarsening {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Coarsening::RugeStuben => "rs",
            Coarsening::Pmis => "pmis",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Direct,
    /// Extended+i (distance-two) interpolation.
    #[serde(rename = "ext+i")]
    ExtendedI,
}

impl std::str::FromStr for Interpolation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Interpolation::Direct),
            "ext+i" | "exti" | "extended" => Ok(Interpolation::ExtendedI),
            other => Err(Error::InvalidParameter(format!(
                "unknown interpolation `{other}` (expected direct or ext+i)"
            ))),
        }
    }
}

impl std::fmt::Display for Interpolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Interpolation::Direct => "direct",
            Interpolation::ExtendedI => "ext+i",
        })
    }
}

/// Setup and solve parameters for the AMG V-cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Strong threshold, in `(0, 1]`.
    pub theta: f64,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
    pub coarsening: Coarsening,
    pub interpolation: Interpolation,
    /// Stop coarsening once a level has at most this many unknowns.
    pub coarse_cutoff: usize,
    pub max_levels: usize,
    /// Relative residual target.
    pub tol: f64,
    pub max_iter: usize,
    pub pmis_seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            theta: 0.25,
            pre_sweeps: 1,
            post_sweeps: 1,
            coarsening: Coarsening::RugeStuben,
            interpolation: Interpolation::ExtendedI,
            coarse_cutoff: 400,
            max_levels: 25,
            tol: 1e-8,
            max_iter: 200,
            pmis_seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn with_theta(&self, theta: f64) -> Self {
        Self {
            theta,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.pre_sweeps + self.post_sweeps == 0 {
            return Err(Error::InvalidParameter(
                "at least one pre- or post-smoothing sweep is required".into(),
            ));
        }
        if self.max_levels == 0 {
            return Err(Error::InvalidParameter("max_levels must be >= 1".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "strong threshold must lie in (0, 1], got {theta}"
        )))
    }
}
