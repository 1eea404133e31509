//! Subcommand inputs: the same fields come from a JSON config or from flags,
//! and flags win. Distributions may be inline objects, bare weight lists on
//! the alphabet implied by `λ`, or paths to JSON files.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::parse_rational;
use crate::finite_measures::{Alphabet, DistJson, JointJson, WeightValue};
use crate::harness::ScenarioFile;
use crate::rate::SetDescriptor;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JointSource {
    Inline(JointJson),
    Path(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DistSource {
    Inline(DistJson),
    Weights(Vec<WeightValue>),
    Path(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SetSource {
    Inline(SetDescriptor),
    Path(String),
}

fn read_json<T: DeserializeOwned>(path: &str, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {what} file {path:?}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{what} file {path:?}: {e}")))
}

impl JointSource {
    fn resolve(self, what: &str) -> Result<JointJson> {
        match self {
            JointSource::Inline(j) => Ok(j),
            JointSource::Path(p) => read_json(&p, what),
        }
    }
}

impl DistSource {
    fn parse_flag(text: &str) -> Self {
        let tokens: Vec<&str> = text.split(',').map(str::trim).collect();
        if tokens.iter().all(|t| parse_rational(t).is_ok()) {
            DistSource::Weights(tokens.into_iter().map(|t| WeightValue::Text(t.to_string())).collect())
        } else {
            DistSource::Path(text.to_string())
        }
    }

    /// Bare weights are attached to `alphabet`.
    fn resolve(self, alphabet: Option<&Alphabet>, what: &str) -> Result<DistJson> {
        match self {
            DistSource::Inline(d) => Ok(d),
            DistSource::Path(p) => read_json(&p, what),
            DistSource::Weights(weights) => {
                let alphabet = match alphabet {
                    Some(a) => a.labels().to_vec(),
                    None => Alphabet::numbered("a", weights.len()).labels().to_vec(),
                };
                if alphabet.len() != weights.len() {
                    return Err(Error::arg(format!(
                        "{what} has {} weights for an alphabet of size {}",
                        weights.len(),
                        alphabet.len()
                    )));
                }
                Ok(DistJson { alphabet, weights })
            }
        }
    }
}

impl SetSource {
    fn resolve(self) -> Result<SetDescriptor> {
        match self {
            SetSource::Inline(s) => Ok(s),
            SetSource::Path(p) => read_json(&p, "set"),
        }
    }
}

fn parse_counts(text: &str) -> Result<Vec<u32>> {
    text.split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("bad count {t:?}: {e}"))))
        .collect()
}

/// Config fields overlaid with every non-null flag field.
pub(super) fn merge<T: Serialize + DeserializeOwned>(config: Option<&str>, flags: T) -> Result<T> {
    let Some(text) = config else {
        return Ok(flags);
    };
    let mut base: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))?;
    let over = serde_json::to_value(&flags)?;
    let (Some(b), serde_json::Value::Object(o)) = (base.as_object_mut(), over) else {
        return Err(Error::Parse("config must be a JSON object".into()));
    };
    for (k, v) in o {
        if !v.is_null() {
            b.insert(k, v);
        }
    }
    serde_json::from_value(base).map_err(|e| Error::Parse(format!("config: {e}")))
}

fn missing(field: &str) -> Error {
    Error::arg(format!("missing input `{field}` (flag or config key)"))
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateInputs {
    pub n: Option<u32>,
    pub k: Option<usize>,
    pub alphabet: Option<Vec<String>>,
    pub rho: Option<DistSource>,
    pub lambda: Option<JointSource>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedEnumerate {
    pub n: u32,
    pub k: Option<usize>,
    pub alphabet: Option<Vec<String>>,
    pub rho: Option<DistJson>,
    pub lambda: Option<JointJson>,
}

impl EnumerateInputs {
    pub fn from_flags(n: Option<u32>, k: Option<usize>, alphabet: Option<&str>, rho: Option<&str>, lambda: Option<&str>) -> Result<Self> {
        Ok(Self {
            n,
            k,
            alphabet: alphabet.map(|a| a.split(',').map(|t| t.trim().to_string()).collect()),
            rho: rho.map(DistSource::parse_flag),
            lambda: lambda.map(|p| JointSource::Path(p.into())),
        })
    }

    pub fn resolve(self) -> Result<ResolvedEnumerate> {
        Ok(ResolvedEnumerate {
            n: self.n.ok_or_else(|| missing("n"))?,
            k: self.k,
            alphabet: self.alphabet,
            rho: self.rho.map(|d| d.resolve(None, "rho")).transpose()?,
            lambda: self.lambda.map(|j| j.resolve("lambda")).transpose()?,
        })
    }
}

impl ResolvedEnumerate {
    pub fn alphabet(&self) -> Result<Alphabet> {
        match (&self.alphabet, self.k) {
            (Some(labels), _) => Alphabet::new(labels.clone()),
            (None, Some(k)) if k > 0 => Ok(Alphabet::numbered("a", k)),
            _ => Err(Error::arg("enumerate needs one of lambda, rho, alphabet or k ≥ 1")),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelInputs {
    pub n: Option<u32>,
    pub zeta: Option<Vec<u32>>,
    pub lambda: Option<JointSource>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedKernel {
    pub n: u32,
    pub zeta: Vec<u32>,
    pub lambda: JointJson,
}

impl KernelInputs {
    pub fn from_flags(n: Option<u32>, zeta: Option<&str>, lambda: Option<&str>) -> Result<Self> {
        Ok(Self { n, zeta: zeta.map(parse_counts).transpose()?, lambda: lambda.map(|p| JointSource::Path(p.into())) })
    }

    pub fn resolve(self) -> Result<ResolvedKernel> {
        let zeta = self.zeta.ok_or_else(|| missing("zeta"))?;
        let n = match self.n {
            Some(n) => n,
            None => zeta.iter().sum(),
        };
        Ok(ResolvedKernel { n, zeta, lambda: self.lambda.ok_or_else(|| missing("lambda"))?.resolve("lambda")? })
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateInputs {
    pub lambda: Option<JointSource>,
    pub psi: Option<DistSource>,
    pub phi: Option<DistSource>,
    pub rho: Option<DistSource>,
    pub sigma: Option<DistSource>,
    pub set: Option<SetSource>,
    pub resolution: Option<f64>,
    pub require_feasible: Option<bool>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedRate {
    pub lambda: JointJson,
    pub psi: Option<DistJson>,
    pub phi: Option<DistJson>,
    pub rho: Option<DistJson>,
    pub sigma: Option<DistJson>,
    pub set: Option<SetDescriptor>,
    pub resolution: Option<f64>,
    pub require_feasible: bool,
}

impl RateInputs {
    #[allow(clippy::too_many_arguments)]
    pub fn from_flags(
        lambda: Option<&str>,
        psi: Option<&str>,
        phi: Option<&str>,
        rho: Option<&str>,
        sigma: Option<&str>,
        set: Option<&str>,
        resolution: Option<f64>,
        require_feasible: bool,
    ) -> Result<Self> {
        Ok(Self {
            lambda: lambda.map(|p| JointSource::Path(p.into())),
            psi: psi.map(DistSource::parse_flag),
            phi: phi.map(DistSource::parse_flag),
            rho: rho.map(DistSource::parse_flag),
            sigma: sigma.map(DistSource::parse_flag),
            set: set.map(|p| SetSource::Path(p.into())),
            resolution,
            require_feasible: require_feasible.then_some(true),
        })
    }

    pub fn resolve(self) -> Result<ResolvedRate> {
        let lambda = self.lambda.ok_or_else(|| missing("lambda"))?.resolve("lambda")?;
        let rows = Alphabet::new(lambda.rows.clone())?;
        let cols = Alphabet::new(lambda.cols.clone())?;
        let set = self.set.map(SetSource::resolve).transpose()?;
        if let Some(s) = &set {
            s.validate(rows.size())?;
        }
        Ok(ResolvedRate {
            psi: self.psi.map(|d| d.resolve(Some(&cols), "psi")).transpose()?,
            phi: self.phi.map(|d| d.resolve(Some(&rows), "phi")).transpose()?,
            rho: self.rho.map(|d| d.resolve(Some(&rows), "rho")).transpose()?,
            sigma: self.sigma.map(|d| d.resolve(Some(&cols), "sigma")).transpose()?,
            set,
            resolution: self.resolution,
            require_feasible: self.require_feasible.unwrap_or(false),
            lambda,
        })
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundInputs {
    pub xi: Option<JointSource>,
    pub zeta: Option<Vec<u32>>,
    pub lambda: Option<JointSource>,
}

#[derive(Debug, Serialize)]
pub struct ResolvedRound {
    pub xi: JointJson,
    pub zeta: Vec<u32>,
    pub lambda: JointJson,
}

impl RoundInputs {
    pub fn from_flags(xi: Option<&str>, zeta: Option<&str>, lambda: Option<&str>) -> Result<Self> {
        Ok(Self {
            xi: xi.map(|p| JointSource::Path(p.into())),
            zeta: zeta.map(parse_counts).transpose()?,
            lambda: lambda.map(|p| JointSource::Path(p.into())),
        })
    }

    pub fn resolve(self) -> Result<ResolvedRound> {
        Ok(ResolvedRound {
            xi: self.xi.ok_or_else(|| missing("xi"))?.resolve("xi")?,
            zeta: self.zeta.ok_or_else(|| missing("zeta"))?,
            lambda: self.lambda.ok_or_else(|| missing("lambda"))?.resolve("lambda")?,
        })
    }
}

/// A scenario plus an optional separate event for the upper-bound scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanFile {
    #[serde(flatten)]
    pub scenario: ScenarioFile,
    #[serde(default)]
    pub upper_event: Option<SetDescriptor>,
}
