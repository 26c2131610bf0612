use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzKind, DEFAULT_REPS};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    QiteIhvaRescaled,
    QiteIhva,
    Ihva,
    MaQaoa,
    Hea,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    VarQite,
    Vqe,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::QiteIhvaRescaled,
        Method::QiteIhva,
        Method::Ihva,
        Method::MaQaoa,
        Method::Hea,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::QiteIhvaRescaled => "qite-ihva-rescaled",
            Method::QiteIhva => "qite-ihva",
            Method::Ihva => "ihva",
            Method::MaQaoa => "ma-qaoa",
            Method::Hea => "hea",
        }
    }

    pub fn engine(self) -> Engine {
        match self {
            Method::QiteIhvaRescaled | Method::QiteIhva => Engine::VarQite,
            _ => Engine::Vqe,
        }
    }

    pub fn ansatz(self) -> AnsatzKind {
        match self {
            Method::QiteIhvaRescaled | Method::QiteIhva | Method::Ihva => AnsatzKind::IHva,
            Method::MaQaoa => AnsatzKind::MaQaoa,
            Method::Hea => AnsatzKind::Hea,
        }
    }

    /// iHVA methods solve the Max-Cut reduction; the others the QUBO directly.
    pub fn uses_maxcut(self) -> bool {
        self.ansatz() == AnsatzKind::IHva
    }

    pub fn is_qite(self) -> bool {
        self.engine() == Engine::VarQite
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Parses a comma-separated method list; `all` expands to every method.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    if list.trim() == "all" {
        return Ok(Method::ALL.to_vec());
    }
    let methods = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(Error::Empty("method list"));
    }
    Ok(methods)
}

/// Hamiltonian scale used by a VarQITE method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scale {
    SpectralNorm,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub method: Method,
    pub d: Scale,
    pub trials: usize,
    pub reps: usize,
}

pub const DEFAULT_TRIALS: usize = 5;

impl MethodSpec {
    pub fn new(method: Method) -> Self {
        let d = match method {
            Method::QiteIhvaRescaled => Scale::SpectralNorm,
            _ => Scale::Fixed(1.0),
        };
        Self {
            method,
            d,
            trials: DEFAULT_TRIALS,
            reps: DEFAULT_REPS,
        }
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.reps == 0 {
            return Err(Error::InvalidArgument(format!(
                "{}: trials and reps must be at least 1",
                self.method
            )));
        }
        if let Scale::Fixed(d) = self.d {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidArgument(format!("{}: d must be positive", self.method)));
            }
        }
        Ok(())
    }
}
