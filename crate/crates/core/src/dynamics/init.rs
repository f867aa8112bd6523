use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

/// How the initial opinion vector is produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialOpinionSpec {
    Explicit(Vec<f64>),
    /// iid uniform on `[0, 1]`.
    Uniform,
    /// iid Bernoulli(p).
    Bernoulli { p: f64 },
    /// iid standard normal.
    Normal,
    /// iid uniform on `{-1, +1}`.
    Sign,
    /// Second eigenvector of the additive reversibilization, affinely
    /// rescaled onto `[0, 1]`.
    SecondEigenvector,
    /// `1` on vertices `>= from`, `0` below; `from` defaults to `n / 2`.
    Step { from: Option<usize> },
    /// `1` on the listed vertices, `0` elsewhere.
    Indicator { vertices: Vec<usize> },
}

impl InitialOpinionSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, Self::Uniform | Self::Bernoulli { .. } | Self::Normal | Self::Sign)
    }

    /// Common mean of an iid law.
    pub fn iid_mean(&self) -> Option<f64> {
        match self {
            Self::Uniform => Some(0.5),
            Self::Bernoulli { p } => Some(*p),
            Self::Normal | Self::Sign => Some(0.0),
            _ => None,
        }
    }

    /// Common variance of an iid law.
    pub fn iid_variance(&self) -> Option<f64> {
        match self {
            Self::Uniform => Some(1.0 / 12.0),
            Self::Bernoulli { p } => Some(p * (1.0 - p)),
            Self::Normal | Self::Sign => Some(1.0),
            _ => None,
        }
    }

    /// Whether every realization lies in an interval of length at most one.
    pub fn osc_at_most_one(&self) -> Option<bool> {
        match self {
            Self::Uniform | Self::Bernoulli { .. } | Self::SecondEigenvector => Some(true),
            Self::Step { .. } | Self::Indicator { .. } => Some(true),
            Self::Sign | Self::Normal => Some(false),
            Self::Explicit(f) => Some(crate::spectral::osc(f) <= 1.0),
        }
    }
}

/// An initial-opinion law bound to a chain; deterministic vectors are
/// computed once.
#[derive(Debug, Clone)]
pub struct InitialOpinions {
    spec: InitialOpinionSpec,
    n: usize,
    fixed: Option<Vec<f64>>,
}

impl InitialOpinions {
    pub fn new(spec: &InitialOpinionSpec, chain: &Chain) -> Result<Self> {
        let n = chain.n();
        let fixed = match spec {
            InitialOpinionSpec::Explicit(f) => {
                if f.len() != n {
                    return invalid(format!("explicit opinions have length {}, graph has {n} vertices", f.len()));
                }
                if f.iter().any(|x| !x.is_finite()) {
                    return invalid("explicit opinions must be finite");
                }
                Some(f.clone())
            }
            InitialOpinionSpec::Bernoulli { p } if !(0.0..=1.0).contains(p) => {
                return invalid(format!("bernoulli parameter must lie in [0, 1], got {p}"));
            }
            InitialOpinionSpec::SecondEigenvector => {
                let g = chain.spectral()?.second_eigenvector;
                let lo = g.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = g.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if hi - lo <= 0.0 {
                    return invalid("second eigenvector is constant");
                }
                Some(g.iter().map(|x| (x - lo) / (hi - lo)).collect())
            }
            InitialOpinionSpec::Step { from } => {
                let k = from.unwrap_or(n / 2);
                if k > n {
                    return invalid(format!("step start {k} exceeds n = {n}"));
                }
                Some((0..n).map(|v| if v >= k { 1.0 } else { 0.0 }).collect())
            }
            InitialOpinionSpec::Indicator { vertices } => {
                let mut f = vec![0.0; n];
                for &v in vertices {
                    if v >= n {
                        return invalid(format!("indicator vertex {v} out of range for n = {n}"));
                    }
                    f[v] = 1.0;
                }
                Some(f)
            }
            _ => None,
        };
        Ok(Self { spec: spec.clone(), n, fixed })
    }

    pub fn spec(&self) -> &InitialOpinionSpec {
        &self.spec
    }

    /// One realization; `seed` is only consumed by random laws.
    pub fn draw(&self, seed: u64) -> Vec<f64> {
        if let Some(f) = &self.fixed {
            return f.clone();
        }
        let mut rng = rng_from_seed(seed);
        let n = self.n;
        match self.spec {
            InitialOpinionSpec::Uniform => (0..n).map(|_| rng.random::<f64>()).collect(),
            InitialOpinionSpec::Bernoulli { p } => {
                (0..n).map(|_| if rng.random::<f64>() < p { 1.0 } else { 0.0 }).collect()
            }
            InitialOpinionSpec::Normal => (0..n).map(|_| StandardNormal.sample(&mut rng)).collect(),
            InitialOpinionSpec::Sign => (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect(),
            _ => unreachable!("deterministic laws are precomputed"),
        }
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::InvalidParameter(format!("bad {what} entry `{x}`"))))
        .collect()
}

impl FromStr for InitialOpinionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let spec = match (kind, arg) {
            ("explicit", Some(a)) if a.ends_with(".json") => {
                Self::Explicit(serde_json::from_str(&std::fs::read_to_string(a)?)?)
            }
            ("explicit", Some(a)) => Self::Explicit(parse_list(a, "opinion")?),
            ("uniform", None) => Self::Uniform,
            ("bernoulli", Some(a)) => Self::Bernoulli {
                p: a.parse().map_err(|_| Error::InvalidParameter(format!("bad bernoulli parameter `{a}`")))?,
            },
            ("normal", None) => Self::Normal,
            ("sign", None) => Self::Sign,
            ("eigenvector", None) => Self::SecondEigenvector,
            ("step", None) => Self::Step { from: None },
            ("step", Some(a)) => Self::Step {
                from: Some(a.parse().map_err(|_| Error::InvalidParameter(format!("bad step start `{a}`")))?),
            },
            ("indicator", Some(a)) => Self::Indicator { vertices: parse_list(a, "vertex")? },
            _ => return invalid(format!("unknown initial opinion spec `{s}`")),
        };
        Ok(spec)
    }
}

impl fmt::Display for InitialOpinionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: Vec<String>| xs.join(",");
        match self {
            Self::Explicit(v) => write!(f, "explicit:{}", join(v.iter().map(|x| x.to_string()).collect())),
            Self::Uniform => write!(f, "uniform"),
            Self::Bernoulli { p } => write!(f, "bernoulli:{p}"),
            Self::Normal => write!(f, "normal"),
            Self::Sign => write!(f, "sign"),
            Self::SecondEigenvector => write!(f, "eigenvector"),
            Self::Step { from: None } => write!(f, "step"),
            Self::Step { from: Some(k) } => write!(f, "step:{k}"),
            Self::Indicator { vertices } => {
                write!(f, "indicator:{}", join(vertices.iter().map(|x| x.to_string()).collect()))
            }
        }
    }
}

impl TryFrom<String> for InitialOpinionSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialOpinionSpec> for String {
    fn from(s: InitialOpinionSpec) -> String {
        s.to_string()
    }
}
