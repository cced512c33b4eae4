//! Text forms of kernels and measures, as accepted on the command line.
//!
//! Kernels: `normal:h2=<v>`, `poisson:rho=<v>[,lo=<a>,hi=<b>]`, `cvm`,
//! `pearson`, `identity`.
//! Measures: `uniform01`, `uniform:lo=<a>,hi=<b>`, `circle`,
//! `normal:mu=<m>,sigma2=<v>`, `exponential:rate=<v>`, `pmf:<path>`,
//! `sample:<path>`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::{BaselineMeasure, KernelSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelChoice {
    Normal { h2: f64 },
    Poisson { rho: f64, interval: Option<(f64, f64)> },
    Cvm,
    Pearson,
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureChoice {
    Uniform01,
    Uniform { lo: f64, hi: f64 },
    Circle,
    Normal { mean: f64, var: f64 },
    Exponential { rate: f64 },
    Pmf(PathBuf),
    Sample(PathBuf),
}

fn split(spec: &str) -> (&str, &str) {
    match spec.split_once(':') {
        Some((head, rest)) => (head.trim(), rest.trim()),
        None => (spec.trim(), ""),
    }
}

fn params(body: &str, allowed: &[&str]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::param(format!("expected key=value, got `{part}`")))?;
        let key = key.trim();
        if !allowed.contains(&key) {
            return Err(Error::param(format!("unknown parameter `{key}` (expected one of {allowed:?})")));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::param(format!("parameter `{key}` is not a number: `{value}`")))?;
        if out.insert(key.to_string(), v).is_some() {
            return Err(Error::param(format!("parameter `{key}` given twice")));
        }
    }
    Ok(out)
}

fn required(p: &BTreeMap<String, f64>, key: &str, spec: &str) -> Result<f64> {
    p.get(key).copied().ok_or_else(|| Error::param(format!("`{spec}` is missing `{key}=`")))
}

fn no_params(body: &str, name: &str) -> Result<()> {
    if body.is_empty() {
        Ok(())
    } else {
        Err(Error::param(format!("`{name}` takes no parameters")))
    }
}

impl FromStr for KernelChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, body) = split(s);
        match head {
            "normal" => {
                let p = params(body, &["h2"])?;
                Ok(Self::Normal { h2: required(&p, "h2", s)? })
            }
            "poisson" => {
                let p = params(body, &["rho", "lo", "hi"])?;
                let rho = required(&p, "rho", s)?;
                let interval = match (p.get("lo"), p.get("hi")) {
                    (Some(&lo), Some(&hi)) => Some((lo, hi)),
                    (None, None) => None,
                    _ => return Err(Error::param("poisson interval needs both lo= and hi=")),
                };
                Ok(Self::Poisson { rho, interval })
            }
            "cvm" => no_params(body, head).map(|_| Self::Cvm),
            "pearson" => no_params(body, head).map(|_| Self::Pearson),
            "identity" => no_params(body, head).map(|_| Self::Identity),
            other => Err(Error::param(format!("unknown kernel family `{other}`"))),
        }
    }
}

impl fmt::Display for KernelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal { h2 } => write!(f, "normal:h2={h2}"),
            Self::Poisson { rho, interval: None } => write!(f, "poisson:rho={rho}"),
            Self::Poisson { rho, interval: Some((lo, hi)) } => write!(f, "poisson:rho={rho},lo={lo},hi={hi}"),
            Self::Cvm => f.write_str("cvm"),
            Self::Pearson => f.write_str("pearson"),
            Self::Identity => f.write_str("identity"),
        }
    }
}

impl KernelChoice {
    /// Builds the kernel. The Pearson kernel takes its pmf from a discrete
    /// baseline and is rejected for any other measure.
    pub fn resolve(&self, baseline: Option<&BaselineMeasure>) -> Result<KernelSpec> {
        match self {
            Self::Normal { h2 } => KernelSpec::normal(*h2),
            Self::Poisson { rho, interval: None } => KernelSpec::poisson(*rho),
            Self::Poisson { rho, interval: Some((lo, hi)) } => KernelSpec::poisson_on(*rho, *lo, *hi),
            Self::Cvm => Ok(KernelSpec::Cvm),
            Self::Identity => Ok(KernelSpec::Identity),
            Self::Pearson => match baseline {
                Some(BaselineMeasure::Discrete(pmf)) => Ok(KernelSpec::pearson(pmf.clone())),
                _ => Err(Error::Unsupported(
                    "the pearson kernel needs a discrete baseline and cannot be used on a continuum".into(),
                )),
            },
        }
    }
}

impl FromStr for MeasureChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, body) = split(s);
        match head {
            "uniform01" => no_params(body, head).map(|_| Self::Uniform01),
            "circle" => no_params(body, head).map(|_| Self::Circle),
            "uniform" => {
                let p = params(body, &["lo", "hi"])?;
                Ok(Self::Uniform { lo: required(&p, "lo", s)?, hi: required(&p, "hi", s)? })
            }
            "normal" => {
                let p = params(body, &["mu", "sigma2"])?;
                Ok(Self::Normal { mean: required(&p, "mu", s)?, var: required(&p, "sigma2", s)? })
            }
            "exponential" => {
                let p = params(body, &["rate"])?;
                Ok(Self::Exponential { rate: required(&p, "rate", s)? })
            }
            "pmf" | "sample" if body.is_empty() => Err(Error::param(format!("`{head}:` needs a file path"))),
            "pmf" => Ok(Self::Pmf(PathBuf::from(body))),
            "sample" => Ok(Self::Sample(PathBuf::from(body))),
            other => Err(Error::param(format!("unknown measure `{other}`"))),
        }
    }
}

impl fmt::Display for MeasureChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform01 => f.write_str("uniform01"),
            Self::Uniform { lo, hi } => write!(f, "uniform:lo={lo},hi={hi}"),
            Self::Circle => f.write_str("circle"),
            Self::Normal { mean, var } => write!(f, "normal:mu={mean},sigma2={var}"),
            Self::Exponential { rate } => write!(f, "exponential:rate={rate}"),
            Self::Pmf(p) => write!(f, "pmf:{}", p.display()),
            Self::Sample(p) => write!(f, "sample:{}", p.display()),
        }
    }
}

impl MeasureChoice {
    /// The file a measure is read from, if any.
    pub fn path(&self) -> Option<&std::path::Path> {
        match self {
            Self::Pmf(p) | Self::Sample(p) => Some(p),
            _ => None,
        }
    }

    /// Builds a measure that needs no external data.
    pub fn resolve(&self) -> Result<BaselineMeasure> {
        match self {
            Self::Uniform01 => Ok(BaselineMeasure::uniform01()),
            Self::Uniform { lo, hi } => BaselineMeasure::uniform(*lo, *hi),
            Self::Circle => Ok(BaselineMeasure::UniformCircle),
            Self::Normal { mean, var } => BaselineMeasure::normal(*mean, *var),
            Self::Exponential { rate } => BaselineMeasure::exponential(*rate),
            Self::Pmf(_) | Self::Sample(_) => Err(Error::param(format!("`{self}` must be loaded from its file"))),
        }
    }
}
