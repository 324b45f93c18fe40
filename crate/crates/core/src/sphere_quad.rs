//! Quadrature against surface measure `dS` on `S^{n-1}`.
//!
//! * `n = 2`: trapezoid rule on equally spaced angles.
//! * `n = 3`: Gauss–Legendre in `cos θ` times a uniform azimuthal grid.
//! * `n ≥ 4`: seeded Monte Carlo on normalized Gaussian samples.
//!
//! The two deterministic rules are built so that the node set is exactly
//! closed under `u ↦ -u` (the second half of the nodes is the negation of
//! the first half, bit for bit).

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Direction;

pub const DEFAULT_RESOLUTION_2D: usize = 65_536;
pub const DEFAULT_RESOLUTION_3D: usize = 64;
pub const DEFAULT_MC_SAMPLES: usize = 200_000;
pub const DEFAULT_MC_SEED: u64 = 0;
pub const MIN_RESOLUTION: usize = 16;

pub fn default_resolution(dim: usize) -> usize {
    match dim {
        2 => DEFAULT_RESOLUTION_2D,
        3 => DEFAULT_RESOLUTION_3D,
        _ => DEFAULT_MC_SAMPLES,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    #[serde(rename = "circle-trapezoid")]
    CircleTrapezoid,
    #[serde(rename = "sphere-product-gauss")]
    SphereProductGauss,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

impl RuleKind {
    pub fn is_deterministic(self) -> bool {
        !matches!(self, RuleKind::MonteCarlo)
    }
}

/// Identity of a rule: equal descriptors always produce identical nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RuleDescriptor {
    pub dim: usize,
    pub kind: RuleKind,
    pub resolution: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    descriptor: RuleDescriptor,
    nodes: Vec<Direction>,
    weights: Vec<f64>,
}

/// Surface area of `S^{n-1}`, `2π^{n/2} / Γ(n/2)`.
pub fn sphere_area(dim: usize) -> f64 {
    // |S^{n+1}| = 2π/n · |S^{n-1}|
    match dim {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        n => 2.0 * PI / (n - 2) as f64 * sphere_area(n - 2),
    }
}

/// Volume of the unit ball in `R^n`.
pub fn ball_volume(dim: usize) -> f64 {
    sphere_area(dim) / dim as f64
}

pub fn build_rule(dim: usize, resolution: usize, seed: Option<u64>) -> Result<QuadratureRule> {
    if dim < 2 {
        return Err(Error::input(format!("sphere dimension must be ≥ 2, got {dim}")));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::input(format!(
            "resolution must be ≥ {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    match dim {
        2 => circle_trapezoid(resolution),
        3 => sphere_product_gauss(resolution),
        _ => Ok(monte_carlo(dim, resolution, seed.unwrap_or(DEFAULT_MC_SEED))),
    }
}

/// Builds the rule a descriptor names.
pub fn build_from_descriptor(d: &RuleDescriptor) -> Result<QuadratureRule> {
    let rule = build_rule(d.dim, d.resolution, d.seed)?;
    if rule.descriptor != *d {
        return Err(Error::input(format!(
            "inconsistent rule descriptor {d:?} (builds {:?})",
            rule.descriptor
        )));
    }
    Ok(rule)
}

fn circle_trapezoid(resolution: usize) -> Result<QuadratureRule> {
    if !resolution.is_multiple_of(4) {
        return Err(Error::input(format!(
            "circle resolution must be divisible by 4, got {resolution}"
        )));
    }
    let half = resolution / 2;
    let step = 2.0 * PI / resolution as f64;
    let first: Vec<Direction> = (0..half)
        .map(|k| Direction::planar(step * k as f64))
        .collect();
    let mut nodes = first.clone();
    nodes.extend(first.iter().map(Direction::neg));
    Ok(QuadratureRule {
        descriptor: RuleDescriptor {
            dim: 2,
            kind: RuleKind::CircleTrapezoid,
            resolution,
            seed: None,
        },
        nodes,
        weights: vec![step; resolution],
    })
}

fn sphere_product_gauss(resolution: usize) -> Result<QuadratureRule> {
    let (z, wz) = gauss_legendre(resolution);
    let azimuths = 2 * resolution;
    let dphi = 2.0 * PI / azimuths as f64;
    // Node (j, k) for k < resolution; node (j, k + resolution) is the
    // negation of (resolution-1-j, k), which sits at azimuth φ_k + π.
    let mut nodes = Vec::with_capacity(resolution * azimuths);
    let mut weights = Vec::with_capacity(resolution * azimuths);
    for j in 0..resolution {
        let s = (1.0 - z[j] * z[j]).max(0.0).sqrt();
        for k in 0..resolution {
            let (sp, cp) = (dphi * k as f64).sin_cos();
            nodes.push(Direction::from_unit(vec![s * cp, s * sp, z[j]]));
            weights.push(wz[j] * dphi);
        }
        let mirror = resolution - 1 - j;
        let sm = (1.0 - z[mirror] * z[mirror]).max(0.0).sqrt();
        for k in 0..resolution {
            let (sp, cp) = (dphi * k as f64).sin_cos();
            nodes.push(Direction::from_unit(vec![-(sm * cp), -(sm * sp), -z[mirror]]));
            weights.push(wz[j] * dphi);
        }
    }
    Ok(QuadratureRule {
        descriptor: RuleDescriptor {
            dim: 3,
            kind: RuleKind::SphereProductGauss,
            resolution,
            seed: None,
        },
        nodes,
        weights,
    })
}

fn monte_carlo(dim: usize, samples: usize, seed: u64) -> QuadratureRule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes = Vec::with_capacity(samples);
    while nodes.len() < samples {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        if let Ok(d) = Direction::normalize(v) {
            nodes.push(d);
        }
    }
    let w = sphere_area(dim) / samples as f64;
    QuadratureRule {
        descriptor: RuleDescriptor {
            dim,
            kind: RuleKind::MonteCarlo,
            resolution: samples,
            seed: Some(seed),
        },
        nodes,
        weights: vec![w; samples],
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending, with
/// `x[n-1-j] == -x[j]` exactly.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d.is_finite() {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        // i-th root counted from +1
        x[n - 1 - i] = t;
        x[i] = -t;
        w[n - 1 - i] = wi;
        w[i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

impl QuadratureRule {
    pub fn dim(&self) -> usize {
        self.descriptor.dim
    }

    pub fn descriptor(&self) -> &RuleDescriptor {
        &self.descriptor
    }

    pub fn nodes(&self) -> &[Direction] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `Σ wᵢ f(uᵢ)`. Node values are computed in parallel; the sum is taken
    /// in node order so the result does not depend on the thread count.
    pub fn integrate<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&Direction) -> f64 + Sync,
    {
        let values: Vec<f64> = self.nodes.par_iter().map(&f).collect();
        self.integrate_values(&values)
    }

    /// `Σ wᵢ vᵢ` for precomputed node values.
    pub fn integrate_values(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                found: values.len(),
            });
        }
        let mut acc = 0.0;
        for (k, (w, v)) in self.weights.iter().zip(values).enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    node: k,
                    value: *v,
                    direction: self.nodes[k].coords().to_vec(),
                });
            }
            acc += w * v;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_sums() {
        let r2 = build_rule(2, 64, None).unwrap();
        assert!((r2.total_weight() - 2.0 * PI).abs() < 1e-13);
        let r3 = build_rule(3, 32, None).unwrap();
        assert!((r3.total_weight() - 4.0 * PI).abs() < 1e-12);
        let r4 = build_rule(4, 20_000, Some(7)).unwrap();
        assert!((r4.total_weight() - 2.0 * PI * PI).abs() < 1e-9);
        assert_eq!(r4.descriptor().seed, Some(7));
    }

    #[test]
    fn sphere_area_closed_forms() {
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
        assert!((sphere_area(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_rule(1, 64, None).unwrap_err().is_validation());
        assert!(build_rule(2, 8, None).is_err());
        assert!(build_rule(2, 66, None).is_err());
    }

    #[test]
    fn integrates_low_degree_polynomials() {
        let r3 = build_rule(3, 32, None).unwrap();
        assert!((r3.integrate(|_| 1.0).unwrap() - 4.0 * PI).abs() < 1e-12);
        let r2 = build_rule(2, 64, None).unwrap();
        let v = r2.integrate(|u| u.coords()[0].powi(2)).unwrap();
        assert!((v - PI).abs() < 1e-12);
        let v = r3.integrate(|u| u.coords()[2].powi(2)).unwrap();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn odd_functions_vanish_and_nodes_are_antipodal() {
        for rule in [build_rule(2, 128, None).unwrap(), build_rule(3, 17, None).unwrap()] {
            for axis in 0..rule.dim() {
                let v = rule.integrate(|u| u.coords()[axis]).unwrap();
                assert!(v.abs() < 1e-12, "axis {axis}: {v}");
            }
            let half = rule.len() / 2;
            for k in 0..rule.len() {
                let u = &rule.nodes()[k];
                assert!((crate::geometry::norm(u.coords()) - 1.0).abs() < 1e-12);
                if rule.dim() == 2 {
                    let partner = &rule.nodes()[(k + half) % rule.len()];
                    assert_eq!(partner, &u.neg());
                }
            }
        }
    }

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let (x, w) = gauss_legendre(9);
        for deg in 0..18 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn monte_carlo_is_seeded() {
        let a = build_rule(4, 64, Some(3)).unwrap();
        let b = build_rule(4, 64, Some(3)).unwrap();
        let c = build_rule(4, 64, Some(4)).unwrap();
        assert_eq!(a.nodes(), b.nodes());
        assert_ne!(a.nodes(), c.nodes());
    }

    #[test]
    fn non_finite_integrand_names_node() {
        let r = build_rule(2, 16, None).unwrap();
        let err = r
            .integrate(|u| if u.coords()[1] > 0.5 { f64::NAN } else { 1.0 })
            .unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }
}
