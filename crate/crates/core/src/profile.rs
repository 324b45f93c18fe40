//! Width profiles: evaluable positive even functions on the sphere.
//!
//! Every addition returns a [`WidthProfile`]; bodies enter through
//! [`WidthProfile::from_body`]. Profiles are cheap to clone (shared
//! pointer) and memoize their values on each quadrature rule they are
//! sampled on, keyed by the rule descriptor.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::Serialize;

use crate::addition::{solve_lambda, Term};
use crate::error::{Error, Result};
use crate::geometry::{Direction, SupportBody, MIN_HALF_WIDTH};
use crate::orlicz::OrliczFunction;
use crate::sphere_quad::{QuadratureRule, RuleDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    BodyDerived,
    OrliczSum,
    LpSum,
    LinearCombination,
    Custom,
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

pub(crate) enum Source {
    Body(SupportBody),
    /// Root of `Σ cⱼ φⱼ(bⱼ/λ) = 1`.
    Orlicz(Vec<(OrliczFunction, f64, WidthProfile)>),
    /// `(b_K^{-p} + b_L^{-p})^{-1/p}`.
    Lp {
        p: f64,
        k: WidthProfile,
        l: WidthProfile,
    },
    Custom(Evaluator),
}

struct Inner {
    dim: usize,
    provenance: Provenance,
    source: Source,
    cache: Mutex<HashMap<RuleDescriptor, Arc<[f64]>>>,
}

#[derive(Clone)]
pub struct WidthProfile {
    inner: Arc<Inner>,
}

impl fmt::Debug for WidthProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("WidthProfile");
        d.field("dim", &self.inner.dim)
            .field("provenance", &self.inner.provenance);
        if let Source::Body(b) = &self.inner.source {
            d.field("body", b);
        }
        d.finish()
    }
}

impl WidthProfile {
    pub(crate) fn new(dim: usize, provenance: Provenance, source: Source) -> Self {
        WidthProfile {
            inner: Arc::new(Inner {
                dim,
                provenance,
                source,
                cache: Mutex::new(HashMap::new()),
            }),
        }
    }

    /// `u ↦ b(K, u)`.
    pub fn from_body(body: SupportBody) -> Self {
        let dim = body.dim();
        Self::new(dim, Provenance::BodyDerived, Source::Body(body))
    }

    /// Wraps an arbitrary evaluator. The caller is responsible for evenness
    /// and positivity; positivity is still checked at evaluation time.
    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self::new(dim, Provenance::Custom, Source::Custom(Arc::new(f)))
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn provenance(&self) -> Provenance {
        self.inner.provenance
    }

    pub fn body(&self) -> Option<&SupportBody> {
        match &self.inner.source {
            Source::Body(b) => Some(b),
            _ => None,
        }
    }

    /// True when both handles point at the same profile.
    pub fn same_as(&self, other: &WidthProfile) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }

    /// `b(u)` at a single direction.
    pub fn eval(&self, u: &Direction) -> Result<f64> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        let b = match &self.inner.source {
            Source::Body(body) => return body.half_width(u),
            Source::Orlicz(terms) => {
                let widths = terms
                    .iter()
                    .map(|(_, _, p)| p.eval(u))
                    .collect::<Result<Vec<_>>>()?;
                let t: Vec<Term<'_>> = terms
                    .iter()
                    .zip(&widths)
                    .map(|((phi, c, _), b)| Term::new(phi, *c, *b))
                    .collect();
                solve_lambda(&t)?
            }
            Source::Lp { p, k, l } => lp_combine(*p, k.eval(u)?, l.eval(u)?),
            Source::Custom(f) => f(u.coords()),
        };
        check_width(b, u.coords())
    }

    /// Values at every node of `rule`, memoized per rule descriptor.
    pub fn sample(&self, rule: &QuadratureRule) -> Result<Arc<[f64]>> {
        if rule.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rule.dim(),
            });
        }
        let key = *rule.descriptor();
        if let Some(v) = self.inner.cache.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let values: Arc<[f64]> = self.compute_samples(rule)?.into();
        self.inner
            .cache
            .lock()
            .unwrap()
            .insert(key, values.clone());
        Ok(values)
    }

    fn compute_samples(&self, rule: &QuadratureRule) -> Result<Vec<f64>> {
        let nodes = rule.nodes();
        let values: Vec<f64> = match &self.inner.source {
            Source::Body(body) => nodes
                .par_iter()
                .map(|u| body.half_width_raw(u.coords()))
                .collect(),
            Source::Custom(f) => nodes.par_iter().map(|u| f(u.coords())).collect(),
            Source::Lp { p, k, l } => {
                let (bk, bl) = (k.sample(rule)?, l.sample(rule)?);
                bk.iter()
                    .zip(bl.iter())
                    .map(|(a, b)| lp_combine(*p, *a, *b))
                    .collect()
            }
            Source::Orlicz(terms) => {
                let operands = terms
                    .iter()
                    .map(|(_, _, p)| p.sample(rule))
                    .collect::<Result<Vec<_>>>()?;
                (0..nodes.len())
                    .into_par_iter()
                    .map(|k| {
                        let t: Vec<Term<'_>> = terms
                            .iter()
                            .zip(&operands)
                            .map(|((phi, c, _), b)| Term::new(phi, *c, b[k]))
                            .collect();
                        solve_lambda(&t).map_err(|e| match e {
                            Error::Solver { message, terms } => Error::Solver {
                                message: format!(
                                    "{message} at node {k} (direction {:?})",
                                    nodes[k].coords()
                                ),
                                terms,
                            },
                            other => other,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        for (k, b) in values.iter().enumerate() {
            check_width(*b, nodes[k].coords())?;
        }
        Ok(values)
    }

    /// `|Σ cⱼ φⱼ(bⱼ(u)/λ(u)) − 1|` at every node, for solver-backed profiles.
    pub fn residuals(&self, rule: &QuadratureRule) -> Result<Option<Vec<f64>>> {
        let Source::Orlicz(terms) = &self.inner.source else {
            return Ok(None);
        };
        let lambda = self.sample(rule)?;
        let operands = terms
            .iter()
            .map(|(_, _, p)| p.sample(rule))
            .collect::<Result<Vec<_>>>()?;
        Ok(Some(
            (0..lambda.len())
                .map(|k| {
                    let s: f64 = terms
                        .iter()
                        .zip(&operands)
                        .map(|((phi, c, _), b)| c * phi.eval_raw(b[k] / lambda[k]))
                        .sum();
                    (s - 1.0).abs()
                })
                .collect(),
        ))
    }
}

pub(crate) fn lp_combine(p: f64, a: f64, b: f64) -> f64 {
    (a.powf(-p) + b.powf(-p)).powf(-1.0 / p)
}

fn check_width(b: f64, u: &[f64]) -> Result<f64> {
    if b >= MIN_HALF_WIDTH && b.is_finite() {
        Ok(b)
    } else {
        Err(Error::Degenerate {
            value: b,
            direction: u.to_vec(),
        })
    }
}

/// Evenness defect `max |b(u) − b(−u)| / b(u)` over the nodes of `rule`.
pub fn evenness_defect(profile: &WidthProfile, rule: &QuadratureRule) -> Result<f64> {
    let mut worst = 0.0f64;
    for u in rule.nodes() {
        let a = profile.eval(u)?;
        let b = profile.eval(&u.neg())?;
        worst = worst.max((a - b).abs() / a);
    }
    Ok(worst)
}
