//! JSON wire formats.
//!
//! ```json
//! {"alphabet": ["a", "b"], "weights": [0.25, "0.75"]}
//! {"rows": ["r1", "r2"], "cols": ["s1", "s2"], "matrix": [[0.4, 0.1], [0.1, 0.4]]}
//! ```
//!
//! Weights may be JSON numbers or decimal/fraction strings; strings are what
//! exact mode parses without going through binary floating point.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Alphabet, Dist, FiniteMeasure, JointDist};
use crate::error::{Error, Result};
use crate::exact::parse_rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightValue {
    Number(f64),
    Text(String),
}

impl WeightValue {
    pub fn to_f64(&self) -> Result<f64> {
        match self {
            WeightValue::Number(x) => Ok(*x),
            WeightValue::Text(s) => {
                let q = parse_rational(s)?;
                Ok(crate::exact::rational_to_f64(&q))
            }
        }
    }

    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            WeightValue::Number(x) => BigRational::from_float(*x)
                .ok_or_else(|| Error::Parse(format!("weight {x} is not finite"))),
            WeightValue::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistJson {
    pub alphabet: Vec<String>,
    pub weights: Vec<WeightValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointJson {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub matrix: Vec<Vec<WeightValue>>,
}

impl DistJson {
    pub fn to_dist(&self) -> Result<Dist> {
        let w = self.weights.iter().map(WeightValue::to_f64).collect::<Result<_>>()?;
        Dist::new(Alphabet::new(self.alphabet.clone())?, w)
    }
}

impl From<&Dist> for DistJson {
    fn from(d: &Dist) -> Self {
        Self {
            alphabet: d.alphabet().labels().to_vec(),
            weights: d.weights().iter().map(|&w| WeightValue::Number(w)).collect(),
        }
    }
}

impl JointJson {
    pub fn to_joint(&self) -> Result<JointDist> {
        let matrix = self
            .matrix
            .iter()
            .map(|row| row.iter().map(WeightValue::to_f64).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        JointDist::from_matrix(Alphabet::new(self.rows.clone())?, Alphabet::new(self.cols.clone())?, &matrix)
    }
}

impl From<&JointDist> for JointJson {
    fn from(j: &JointDist) -> Self {
        Self {
            rows: j.rows().labels().to_vec(),
            cols: j.cols().labels().to_vec(),
            matrix: j
                .matrix()
                .into_iter()
                .map(|row| row.into_iter().map(WeightValue::Number).collect())
                .collect(),
        }
    }
}

impl Serialize for Dist {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DistJson::from(self).serialize(serializer)
    }
}

impl Serialize for JointDist {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        JointJson::from(self).serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_joint_with_strings() {
        let j: JointJson = serde_json::from_str(
            r#"{"rows":["a","b"],"cols":["x","y"],"matrix":[["0.4",0.1],[0.1,"2/5"]]}"#,
        )
        .unwrap();
        let joint = j.to_joint().unwrap();
        assert_eq!(joint.get(1, 1), 0.4);
        let back: JointJson = (&joint).into();
        assert_eq!(back.to_joint().unwrap(), joint);
    }

    #[test]
    fn parse_dist() {
        let d: DistJson = serde_json::from_str(r#"{"alphabet":["u","v"],"weights":[0.25,"0.75"]}"#).unwrap();
        assert_eq!(d.to_dist().unwrap().get(1), 0.75);
    }
}
