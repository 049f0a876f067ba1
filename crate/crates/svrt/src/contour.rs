//! Random simple closed contour generation.
//!
//! A contour is built by perturbing a circle's radius with a low-order
//! random harmonic series around the generation centre and polygonizing at
//! `complexity * 8` vertices. Radial contours of positive radius are
//! star-shaped, hence simple and guaranteed to contain the generation
//! centre; draws whose radius dips too close to zero are rejected and
//! retried up to a bounded count.

use crate::geom::{polygon_is_simple, Vec2};
use crate::rng::Rng;
use thiserror::Error;

/// Nominal contour radius, in pixels, before any instance scaling.
pub const BASE_RADIUS: f64 = 16.0;

/// Lowest admissible radius relative to [`BASE_RADIUS`].
const MIN_RADIUS_FRAC: f64 = 0.22;

/// Highest admissible radius relative to [`BASE_RADIUS`]; keeps instance
/// extents predictable for placement.
const MAX_RADIUS_FRAC: f64 = 1.6;

const MAX_RETRIES: u32 = 64;

#[derive(Debug, Error)]
pub enum ContourError {
    #[error("contour generation exhausted after {0} attempts")]
    GenerationExhausted(u32),
    #[error("complexity must be >= 3, got {0}")]
    ComplexityTooLow(u32),
}

/// A random closed simple contour in its local frame, centred on the
/// generation centre (the origin).
#[derive(Clone, Debug, PartialEq)]
pub struct Contour {
    /// Identity tag, unique per freshly generated contour within an image set.
    pub identity: u32,
    /// Vertices in counter-clockwise order; closure is implicit.
    pub points: Vec<Vec2>,
}

impl Contour {
    /// Generate from an explicit seed. Identical seeds give bit-identical
    /// contours.
    pub fn generate(seed: u64, complexity: u32) -> Result<Contour, ContourError> {
        let mut rng = Rng::new(seed).derive_str("contour");
        Contour::from_rng(&mut rng, complexity, 0)
    }

    /// Generate from an existing stream, tagging the result with `identity`.
    pub fn from_rng(rng: &mut Rng, complexity: u32, identity: u32) -> Result<Contour, ContourError> {
        if complexity < 3 {
            return Err(ContourError::ComplexityTooLow(complexity));
        }
        let n_vertices = (complexity * 8) as usize;
        for _ in 0..MAX_RETRIES {
            if let Some(points) = try_radial(rng, complexity, n_vertices) {
                let c = Contour { identity, points };
                debug_assert!(polygon_is_simple(&c.points));
                return Ok(c);
            }
        }
        Err(ContourError::GenerationExhausted(MAX_RETRIES))
    }

    /// Largest vertex distance from the generation centre.
    pub fn max_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Smallest vertex distance from the generation centre.
    pub fn min_radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min)
    }
}

fn try_radial(rng: &mut Rng, complexity: u32, n_vertices: usize) -> Option<Vec<Vec2>> {
    let n_harmonics = complexity.min(7);
    // amplitude decays with harmonic order; total may overshoot, in which
    // case the draw is rejected below
    let mut amps = Vec::with_capacity(n_harmonics as usize);
    let mut phases = Vec::with_capacity(n_harmonics as usize);
    for h in 2..=(1 + n_harmonics) {
        amps.push(rng.range_f64(0.0, 0.85 / h as f64));
        phases.push(rng.range_f64(0.0, std::f64::consts::TAU));
    }

    let radius = |theta: f64| -> f64 {
        let mut r = 1.0;
        for (k, (&a, &ph)) in amps.iter().zip(phases.iter()).enumerate() {
            let h = (k + 2) as f64;
            r += a * (h * theta + ph).cos();
        }
        r * BASE_RADIUS
    };

    // reject dips toward the centre and overshoots on a grid denser than
    // the polygonization
    let check = n_vertices * 4;
    for k in 0..check {
        let theta = std::f64::consts::TAU * k as f64 / check as f64;
        let r = radius(theta);
        if !(MIN_RADIUS_FRAC * BASE_RADIUS..=MAX_RADIUS_FRAC * BASE_RADIUS).contains(&r) {
            return None;
        }
    }

    let pts: Vec<Vec2> = (0..n_vertices)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / n_vertices as f64;
            Vec2::from_angle(theta) * radius(theta)
        })
        .collect();
    if polygon_is_simple(&pts) {
        Some(pts)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::point_in_polygon;

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = Contour::generate(7, 8).unwrap();
        let b = Contour::generate(7, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let a = Contour::generate(7, 8).unwrap();
        let b = Contour::generate(8, 8).unwrap();
        assert_ne!(a.points, b.points);
    }

    #[test]
    fn generated_contours_pass_brute_force_simplicity() {
        for seed in 0..200 {
            let c = Contour::generate(seed, 6).unwrap();
            // independent O(n^2) oracle
            assert!(polygon_is_simple(&c.points), "seed {seed} self-intersects");
        }
    }

    #[test]
    fn contains_generation_centre() {
        for seed in 0..50 {
            let c = Contour::generate(seed, 5).unwrap();
            assert!(point_in_polygon(Vec2::new(0.0, 0.0), &c.points));
        }
    }

    #[test]
    fn vertex_count_follows_complexity() {
        let c = Contour::generate(3, 5).unwrap();
        assert_eq!(c.points.len(), 40);
    }

    #[test]
    fn rejects_low_complexity() {
        assert!(matches!(Contour::generate(1, 2), Err(ContourError::ComplexityTooLow(2))));
    }
}
