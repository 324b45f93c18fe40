//! Fixtures shared by the benchmarks in `benches/`.

use widthlab_core::{OrliczFunction, SupportBody, WidthProfile};

/// The square with vertices `(±1, ±1)`.
pub fn square() -> WidthProfile {
    WidthProfile::from_body(SupportBody::centered_box(&[1.0, 1.0]).unwrap())
}

/// A 3D polytope with a dozen vertices and no symmetry.
pub fn polytope_3d() -> WidthProfile {
    let vertices = (0..12)
        .map(|j| {
            let t = j as f64 * 2.399_963;
            let z = 1.0 - 2.0 * (j as f64 + 0.5) / 12.0;
            let r = (1.0 - z * z).sqrt();
            vec![1.3 * r * t.cos(), 0.8 * r * t.sin(), z]
        })
        .collect();
    WidthProfile::from_body(SupportBody::polytope(vertices).unwrap())
}

pub fn ball(dim: usize, r: f64) -> WidthProfile {
    WidthProfile::from_body(SupportBody::ball(vec![0.0; dim], r).unwrap())
}

pub fn mixture() -> OrliczFunction {
    OrliczFunction::mixture(vec![0.5, 0.5], vec![1.0, 3.0]).unwrap()
}
