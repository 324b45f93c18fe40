//! JSON descriptors for bodies, Orlicz functions and additions.
//!
//! Parsing is strict: unknown keys are errors. Conversions into the
//! numeric types go through the same validating constructors as the
//! library API.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::addition::{lp_width_sum, orlicz_linear_combination, orlicz_width_sum};
use crate::error::{Error, Result};
use crate::geometry::SupportBody;
use crate::orlicz::{Family, OrliczFunction, OrliczFunctionM};
use crate::profile::WidthProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Ellipsoid {
        matrix: Vec<Vec<f64>>,
        center: Vec<f64>,
    },
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    LinearImage {
        matrix: Vec<Vec<f64>>,
        body: Box<BodySpec>,
    },
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::input(format!("matrix must be square and nonempty, got {rows:?}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

impl BodySpec {
    pub fn build(&self) -> Result<SupportBody> {
        match self {
            BodySpec::Ball { center, radius } => SupportBody::ball(center.clone(), *radius),
            BodySpec::Ellipsoid { matrix, center } => {
                SupportBody::ellipsoid(matrix_from_rows(matrix)?, center.clone())
            }
            BodySpec::Polytope { vertices } => SupportBody::polytope(vertices.clone()),
            BodySpec::LinearImage { matrix, body } => {
                crate::geometry::linear_image(&body.build()?, matrix_from_rows(matrix)?)
            }
        }
    }
}

impl From<&SupportBody> for BodySpec {
    fn from(body: &SupportBody) -> Self {
        match body {
            SupportBody::Ball { center, radius } => BodySpec::Ball {
                center: center.clone(),
                radius: *radius,
            },
            SupportBody::Ellipsoid { shape, center } => BodySpec::Ellipsoid {
                matrix: matrix_to_rows(shape),
                center: center.clone(),
            },
            SupportBody::Polytope { vertices } => BodySpec::Polytope {
                vertices: vertices.clone(),
            },
            SupportBody::LinearImage { matrix, inner } => BodySpec::LinearImage {
                matrix: matrix_to_rows(matrix),
                body: Box::new(BodySpec::from(inner.as_ref())),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    Power {
        p: f64,
    },
    Mixture {
        weights: Vec<f64>,
        exponents: Vec<f64>,
    },
    /// `Σ cⱼ φⱼ(xⱼ)`; coefficients default to 1.
    Sum {
        parts: Vec<PhiSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coefficients: Option<Vec<f64>>,
    },
}

impl PhiSpec {
    pub fn univariate(&self) -> Result<OrliczFunction> {
        match self {
            PhiSpec::Power { p } => OrliczFunction::power(*p),
            PhiSpec::Mixture { weights, exponents } => {
                OrliczFunction::mixture(weights.clone(), exponents.clone())
            }
            PhiSpec::Sum { .. } => Err(Error::input(
                "expected a univariate φ (power or mixture), got a sum",
            )),
        }
    }

    pub fn multivariate(&self) -> Result<OrliczFunctionM> {
        match self {
            PhiSpec::Sum {
                parts,
                coefficients,
            } => {
                let parts = parts
                    .iter()
                    .map(PhiSpec::univariate)
                    .collect::<Result<Vec<_>>>()?;
                match coefficients {
                    Some(c) => OrliczFunctionM::weighted(parts, c.clone()),
                    None => OrliczFunctionM::sum_of(parts),
                }
            }
            _ => Err(Error::input("expected an m-variate φ of type \"sum\"")),
        }
    }
}

impl From<&OrliczFunction> for PhiSpec {
    fn from(f: &OrliczFunction) -> Self {
        match f.family() {
            Family::Power { p } => PhiSpec::Power { p: *p },
            Family::Mixture { weights, exponents } => PhiSpec::Mixture {
                weights: weights.clone(),
                exponents: exponents.clone(),
            },
        }
    }
}

impl From<&OrliczFunctionM> for PhiSpec {
    fn from(f: &OrliczFunctionM) -> Self {
        PhiSpec::Sum {
            parts: f.parts().iter().map(PhiSpec::from).collect(),
            coefficients: (!f.is_unit_sum()).then(|| f.coefficients().to_vec()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdditionSpec {
    OrliczSum {
        phi: PhiSpec,
        bodies: Vec<BodySpec>,
    },
    Combination {
        phi1: PhiSpec,
        phi2: PhiSpec,
        #[serde(rename = "K")]
        k: BodySpec,
        #[serde(rename = "L")]
        l: BodySpec,
        alpha: f64,
        beta: f64,
    },
    LpSum {
        p: f64,
        #[serde(rename = "K")]
        k: BodySpec,
        #[serde(rename = "L")]
        l: BodySpec,
    },
}

impl AdditionSpec {
    pub fn build(&self) -> Result<WidthProfile> {
        let profile = |b: &BodySpec| b.build().map(WidthProfile::from_body);
        match self {
            AdditionSpec::OrliczSum { phi, bodies } => {
                let operands = bodies.iter().map(profile).collect::<Result<Vec<_>>>()?;
                orlicz_width_sum(&phi.multivariate()?, &operands)
            }
            AdditionSpec::Combination {
                phi1,
                phi2,
                k,
                l,
                alpha,
                beta,
            } => orlicz_linear_combination(
                &phi1.univariate()?,
                &phi2.univariate()?,
                &profile(k)?,
                &profile(l)?,
                *alpha,
                *beta,
            ),
            AdditionSpec::LpSum { p, k, l } => lp_width_sum(*p, &profile(k)?, &profile(l)?),
        }
    }

    pub fn dim(&self) -> Result<usize> {
        let first = match self {
            AdditionSpec::OrliczSum { bodies, .. } => bodies
                .first()
                .ok_or_else(|| Error::input("orlicz_sum needs bodies"))?,
            AdditionSpec::Combination { k, .. } | AdditionSpec::LpSum { k, .. } => k,
        };
        Ok(first.build()?.dim())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_body_variant() {
        let json = r#"{"type":"linear_image","matrix":[[2,0],[0,1]],
            "body":{"type":"polytope","vertices":[[1,1],[-1,1],[1,-1],[-1,-1]]}}"#;
        let spec: BodySpec = serde_json::from_str(json).unwrap();
        let body = spec.build().unwrap();
        assert_eq!(body.support(&[1.0, 0.0]).unwrap(), 2.0);
        assert_eq!(BodySpec::from(&body), spec);

        let e: BodySpec =
            serde_json::from_str(r#"{"type":"ellipsoid","matrix":[[1,0],[0,3]],"center":[0,1]}"#)
                .unwrap();
        assert_eq!(e.build().unwrap().support(&[0.0, 1.0]).unwrap(), 4.0);
        let b: BodySpec =
            serde_json::from_str(r#"{"type":"ball","center":[0,0,0],"radius":2.5}"#).unwrap();
        assert_eq!(b.build().unwrap().dim(), 3);
    }

    #[test]
    fn rejects_unknown_keys() {
        let err = serde_json::from_str::<BodySpec>(r#"{"type":"ball","center":[0,0],"radius":1,"r":2}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<PhiSpec>(r#"{"type":"power","p":2,"q":1}"#);
        assert!(err.is_err());
        let err = serde_json::from_str::<AdditionSpec>(
            r#"{"op":"lp_sum","p":2,"K":{"type":"ball","center":[0,0],"radius":1},
                "L":{"type":"ball","center":[0,0],"radius":1},"extra":0}"#,
        );
        assert!(err.is_err());
    }

    #[test]
    fn phi_specs() {
        let s: PhiSpec = serde_json::from_str(
            r#"{"type":"sum","parts":[{"type":"power","p":1},{"type":"mixture","weights":[0.5,0.5],"exponents":[1,3]}]}"#,
        )
        .unwrap();
        let m = s.multivariate().unwrap();
        assert!(m.is_unit_sum());
        assert_eq!(PhiSpec::from(&m), s);
        assert!(s.univariate().is_err());
        let p: PhiSpec = serde_json::from_str(r#"{"type":"power","p":0.5}"#).unwrap();
        assert!(p.univariate().unwrap_err().is_validation());
    }

    #[test]
    fn addition_specs_build() {
        let json = r#"{"op":"combination","phi1":{"type":"power","p":2},"phi2":{"type":"power","p":2},
            "K":{"type":"ball","center":[0,0],"radius":1},"L":{"type":"ball","center":[0,0],"radius":1},
            "alpha":1.0,"beta":0.25}"#;
        let spec: AdditionSpec = serde_json::from_str(json).unwrap();
        let prof = spec.build().unwrap();
        let v = prof.eval(&crate::geometry::Direction::planar(0.3)).unwrap();
        assert!((v - 1.25f64.powf(-0.5)).abs() < 1e-11);
        assert_eq!(spec.dim().unwrap(), 2);
    }
}
