//! Convex bodies given by their support functions, and the half widths they
//! induce.
//!
//! A body is never stored as a boundary mesh. Every variant knows how to
//! answer `h(K, x) = max { x·y : y ∈ K }` directly, and linear images are
//! lazy wrappers evaluating `h(AK, x) = h(K, Aᵀx)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphere_quad::QuadratureRule;

/// Smallest admissible half width. Bodies whose width drops below this in
/// some direction are treated as lower dimensional.
pub const MIN_HALF_WIDTH: f64 = 1e-9;

/// Inputs closer than this to unit norm are silently renormalized.
pub const DIRECTION_RENORM_TOL: f64 = 1e-8;

/// Minimum |det| for matrices that must be invertible.
pub const DET_TOL: f64 = 1e-12;

/// A point of the unit sphere `S^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Accepts vectors within [`DIRECTION_RENORM_TOL`] of unit length and
    /// renormalizes them.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::input("direction must have at least one coordinate"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::input(format!("non-finite direction {coords:?}")));
        }
        let norm = norm(&coords);
        if (norm - 1.0).abs() > DIRECTION_RENORM_TOL {
            return Err(Error::input(format!(
                "direction {coords:?} has norm {norm}, expected 1"
            )));
        }
        Ok(Direction(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalize(coords: Vec<f64>) -> Result<Self> {
        let norm = norm(&coords);
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::input(format!("cannot normalize {coords:?}")));
        }
        Ok(Direction(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Caller guarantees unit norm (quadrature nodes).
    pub(crate) fn from_unit(coords: Vec<f64>) -> Self {
        Direction(coords)
    }

    /// Unit vector along coordinate axis `axis`.
    pub fn axis(dim: usize, axis: usize) -> Self {
        let mut v = vec![0.0; dim];
        v[axis] = 1.0;
        Direction(v)
    }

    /// `(cos θ, sin θ)`.
    pub fn planar(theta: f64) -> Self {
        Direction(vec![theta.cos(), theta.sin()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Direction(self.0.iter().map(|c| -c).collect())
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// A convex body, represented by a support-function oracle.
#[derive(Debug, Clone, PartialEq)]
pub enum SupportBody {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    /// `{ shape·y + center : |y| ≤ 1 }`.
    Ellipsoid {
        shape: DMatrix<f64>,
        center: Vec<f64>,
    },
    /// Convex hull of the vertices. Interior points are allowed and harmless.
    Polytope {
        vertices: Vec<Vec<f64>>,
    },
    LinearImage {
        matrix: DMatrix<f64>,
        inner: Box<SupportBody>,
    },
}

impl SupportBody {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() {
            return Err(Error::input("ball center must be nonempty"));
        }
        check_finite("ball center", &center)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::input(format!("ball radius must be positive, got {radius}")));
        }
        Ok(SupportBody::Ball { center, radius })
    }

    /// Origin-centred unit ball `B` in `R^dim`.
    pub fn unit_ball(dim: usize) -> Self {
        SupportBody::Ball {
            center: vec![0.0; dim],
            radius: 1.0,
        }
    }

    pub fn ellipsoid(shape: DMatrix<f64>, center: Vec<f64>) -> Result<Self> {
        check_square_invertible("ellipsoid shape", &shape)?;
        if center.len() != shape.nrows() {
            return Err(Error::DimensionMismatch {
                expected: shape.nrows(),
                found: center.len(),
            });
        }
        check_finite("ellipsoid center", &center)?;
        Ok(SupportBody::Ellipsoid { shape, center })
    }

    /// Needs at least `n + 1` finite vertices of a common dimension `n`.
    /// Full dimensionality is a property of the body over the sphere and is
    /// checked by [`validate_body`].
    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::input("polytope needs vertices"))?;
        if dim == 0 {
            return Err(Error::input("polytope vertices must be nonempty vectors"));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            check_finite("polytope vertex", v)?;
        }
        if vertices.len() < dim + 1 {
            return Err(Error::input(format!(
                "polytope in R^{dim} needs at least {} vertices, got {}",
                dim + 1,
                vertices.len()
            )));
        }
        Ok(SupportBody::Polytope { vertices })
    }

    /// Axis-aligned box `[-a₁, a₁] × … × [-aₙ, aₙ]`.
    pub fn centered_box(half_sides: &[f64]) -> Result<Self> {
        let n = half_sides.len();
        let vertices = (0..1usize << n)
            .map(|mask| {
                half_sides
                    .iter()
                    .enumerate()
                    .map(|(k, a)| if mask >> k & 1 == 1 { *a } else { -a })
                    .collect()
            })
            .collect();
        SupportBody::polytope(vertices)
    }

    pub fn dim(&self) -> usize {
        match self {
            SupportBody::Ball { center, .. } => center.len(),
            SupportBody::Ellipsoid { center, .. } => center.len(),
            SupportBody::Polytope { vertices } => vertices[0].len(),
            SupportBody::LinearImage { matrix, .. } => matrix.nrows(),
        }
    }

    /// `h(K, x)`; `x` need not be a unit vector.
    pub fn support(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        check_finite("support argument", x)?;
        Ok(self.support_raw(x))
    }

    pub(crate) fn support_raw(&self, x: &[f64]) -> f64 {
        match self {
            SupportBody::Ball { center, radius } => dot(center, x) + radius * norm(x),
            SupportBody::Ellipsoid { shape, center } => {
                let n = x.len();
                let mut sq = 0.0;
                for col in 0..n {
                    let s: f64 = (0..n).map(|row| shape[(row, col)] * x[row]).sum();
                    sq += s * s;
                }
                dot(center, x) + sq.sqrt()
            }
            SupportBody::Polytope { vertices } => vertices
                .iter()
                .map(|v| dot(v, x))
                .fold(f64::NEG_INFINITY, f64::max),
            SupportBody::LinearImage { matrix, inner } => {
                let y = transpose_apply(matrix, x);
                inner.support_raw(&y)
            }
        }
    }

    /// `b(K, u) = (h(K, u) + h(K, -u)) / 2`.
    pub fn half_width(&self, u: &Direction) -> Result<f64> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.dim(),
            });
        }
        let b = self.half_width_raw(u.coords());
        if b < MIN_HALF_WIDTH {
            return Err(Error::Degenerate {
                value: b,
                direction: u.coords().to_vec(),
            });
        }
        Ok(b)
    }

    pub(crate) fn half_width_raw(&self, u: &[f64]) -> f64 {
        match self {
            // Translation cancels; skip the two support calls.
            SupportBody::Ball { radius, .. } => radius * norm(u),
            SupportBody::Ellipsoid { shape, .. } => {
                let n = u.len();
                let mut sq = 0.0;
                for col in 0..n {
                    let s: f64 = (0..n).map(|row| shape[(row, col)] * u[row]).sum();
                    sq += s * s;
                }
                sq.sqrt()
            }
            SupportBody::Polytope { vertices } => {
                let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
                for v in vertices {
                    let d = dot(v, u);
                    hi = hi.max(d);
                    lo = lo.min(d);
                }
                0.5 * (hi - lo)
            }
            SupportBody::LinearImage { matrix, inner } => {
                let y = transpose_apply(matrix, u);
                inner.half_width_raw(&y)
            }
        }
    }

    /// Affine hull check. Ellipsoids and linear images are full dimensional
    /// by construction; a polytope needs its vertex differences to span
    /// `R^n`. Catches flat bodies whose zero-width direction misses every
    /// quadrature node.
    pub fn is_full_dimensional(&self) -> bool {
        match self {
            SupportBody::Ball { .. } | SupportBody::Ellipsoid { .. } => true,
            SupportBody::LinearImage { inner, .. } => inner.is_full_dimensional(),
            SupportBody::Polytope { vertices } => {
                let n = vertices[0].len();
                let rows = vertices.len() - 1;
                let diffs = DMatrix::from_fn(rows, n, |r, c| vertices[r + 1][c] - vertices[0][c]);
                let scale = diffs.amax().max(f64::MIN_POSITIVE);
                diffs.rank(MIN_HALF_WIDTH * scale) == n
            }
        }
    }

    /// `K + t`.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        if t.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: t.len(),
            });
        }
        check_finite("translation", t)?;
        Ok(match self {
            SupportBody::Ball { center, radius } => SupportBody::Ball {
                center: add(center, t),
                radius: *radius,
            },
            SupportBody::Ellipsoid { shape, center } => SupportBody::Ellipsoid {
                shape: shape.clone(),
                center: add(center, t),
            },
            SupportBody::Polytope { vertices } => SupportBody::Polytope {
                vertices: vertices.iter().map(|v| add(v, t)).collect(),
            },
            SupportBody::LinearImage { matrix, inner } => {
                // A·K + t = A·(K + A⁻¹t)
                let inv = matrix
                    .clone()
                    .try_inverse()
                    .ok_or_else(|| Error::input("linear image matrix is singular"))?;
                let pre = inv * DVector::from_column_slice(t);
                SupportBody::LinearImage {
                    matrix: matrix.clone(),
                    inner: Box::new(inner.translated(pre.as_slice())?),
                }
            }
        })
    }
}

/// Lazy linear image `A·K`.
pub fn linear_image(body: &SupportBody, matrix: DMatrix<f64>) -> Result<SupportBody> {
    check_square_invertible("linear image matrix", &matrix)?;
    if matrix.nrows() != body.dim() {
        return Err(Error::DimensionMismatch {
            expected: body.dim(),
            found: matrix.nrows(),
        });
    }
    Ok(SupportBody::LinearImage {
        matrix,
        inner: Box::new(body.clone()),
    })
}

/// Width extrema of a body over the nodes of a quadrature rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BodyDiagnostics {
    /// `r_K`, the smallest half width seen.
    pub min_half_width: f64,
    /// `R_K`, the largest half width seen.
    pub max_half_width: f64,
    pub argmin: Vec<f64>,
    pub argmax: Vec<f64>,
    pub degenerate: bool,
}

pub fn validate_body(body: &SupportBody, rule: &QuadratureRule) -> Result<BodyDiagnostics> {
    if body.dim() != rule.dim() {
        return Err(Error::DimensionMismatch {
            expected: rule.dim(),
            found: body.dim(),
        });
    }
    let mut lo = (f64::INFINITY, 0);
    let mut hi = (f64::NEG_INFINITY, 0);
    for (k, u) in rule.nodes().iter().enumerate() {
        let b = body.half_width_raw(u.coords());
        if b < lo.0 {
            lo = (b, k);
        }
        if b > hi.0 {
            hi = (b, k);
        }
    }
    Ok(BodyDiagnostics {
        min_half_width: lo.0,
        max_half_width: hi.0,
        argmin: rule.nodes()[lo.1].coords().to_vec(),
        argmax: rule.nodes()[hi.1].coords().to_vec(),
        degenerate: lo.0.is_nan() || lo.0 < MIN_HALF_WIDTH || !body.is_full_dimensional(),
    })
}

/// Rotation of the plane by `theta`.
pub fn rotation_2d(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn transpose_apply(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = m.nrows();
    (0..m.ncols())
        .map(|col| (0..n).map(|row| m[(row, col)] * x[row]).sum())
        .collect()
}

fn check_finite(what: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::input(format!("{what} has non-finite entries: {v:?}")))
    }
}

fn check_square_invertible(what: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(Error::input(format!(
            "{what} must be square, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|c| !c.is_finite()) {
        return Err(Error::input(format!("{what} has non-finite entries")));
    }
    let det = m.determinant();
    if det.is_nan() || det.abs() <= DET_TOL {
        return Err(Error::input(format!("{what} is singular (det = {det:e})")));
    }
    Ok(())
}
