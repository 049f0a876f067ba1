//! Per-problem generators and category rules.
//!
//! Each problem is documented by a one-line rule statement. Numeric margins
//! are declared here once: equalities are generated exactly and verified
//! with `EQ_TOL`; inequalities are generated with at least `NEQ_MARGIN` so
//! the oracle can never flag an ambiguous layout.

use super::{Category, CatalogError};
use crate::canvas::{GroundTruth, ImageCanvas};
use crate::contour::Contour;
use crate::geom::{polygon_contains, polygons_boundary_dist, Vec2};
use crate::place::{
    mirror_deviation_best, place_and_render, square_deviation, Constraint, PlaceError, ShapeSpec,
};
use crate::rng::Rng;

/// Tolerance when the oracle verifies a generated equality (absorbs
/// rasterization rounding; positions themselves are exact).
pub const EQ_TOL: f64 = 0.5;

/// Minimum margin by which negative categories violate an equality.
pub const NEQ_MARGIN: f64 = 6.0;

/// Oracle threshold between "equal" and "violated": above EQ_TOL, below
/// NEQ_MARGIN, so neither category can be misread.
const MID_TOL: f64 = 4.0;

/// Scales for "identical" shapes compare exactly; this absorbs nothing
/// more than representation noise.
pub const SCALE_EQ_TOL: f64 = 0.02;

/// |scale| ratio at or above which two shapes count as differing in size.
pub const SIZE_RATIO_DISTINCT: f64 = 1.5;

/// Oracle threshold for "larger than" decisions, below the generated ratio.
const SIZE_RATIO_TEST: f64 = 1.3;

/// Geometric boundary gap below which two outlines count as bordering.
const BORDER_TEST: f64 = 1.3;

/// Extension problem: two shapes identical only after rotation.
pub const PROBLEM_101: u32 = 101;

const SMALL: (f64, f64) = (0.5, 0.68);
const SMALL6: (f64, f64) = (0.42, 0.55);
const MEDIUM: (f64, f64) = (0.75, 1.05);
const BIG: (f64, f64) = (1.85, 2.15);
const LARGE_MID: (f64, f64) = (1.35, 1.6);
const INNER: (f64, f64) = (0.40, 0.52);

fn contour(rng: &mut Rng, identity: u32) -> Result<Contour, CatalogError> {
    let complexity = rng.range_i64(4, 8) as u32;
    Ok(Contour::from_rng(rng, complexity, identity)?)
}

/// Container contours must stay round enough that a small shape fits well
/// inside; reject skinny draws.
fn fat_contour(rng: &mut Rng, identity: u32) -> Result<Contour, CatalogError> {
    use crate::contour::BASE_RADIUS;
    for _ in 0..256 {
        let c = contour(rng, identity)?;
        if c.min_radius() >= 0.62 * BASE_RADIUS && c.max_radius() <= 1.45 * BASE_RADIUS {
            return Ok(c);
        }
    }
    Err(CatalogError::GenerationFailed(identity))
}

fn spec(c: &Contour, scale: f64, rotation: f64) -> ShapeSpec {
    ShapeSpec { contour: c.clone(), scale, rotation }
}

fn nontrivial_rotation(rng: &mut Rng) -> f64 {
    rng.range_f64(0.6, std::f64::consts::TAU - 0.6)
}

type Build = (Vec<ShapeSpec>, Vec<Constraint>);

fn render_with_retries(
    problem: u32,
    rng: &mut Rng,
    canvas: u32,
    build: impl Fn(&mut Rng) -> Result<Build, CatalogError>,
) -> Result<ImageCanvas, CatalogError> {
    // regenerate contours when placement exhausts its own retry budget
    for attempt in 0..16u64 {
        let mut r = rng.derive(attempt);
        let (specs, constraints) = build(&mut r)?;
        match place_and_render(&specs, &constraints, &mut r, canvas, canvas) {
            Ok(c) => return Ok(c),
            Err(PlaceError::Exhausted(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(CatalogError::GenerationFailed(problem))
}

pub(super) fn generate(
    problem: u32,
    category: Category,
    rng: &mut Rng,
    canvas: u32,
) -> Result<ImageCanvas, CatalogError> {
    let positive = category == Category::Positive;
    render_with_retries(problem, rng, canvas, |r| build(problem, positive, r))
}

fn build(problem: u32, positive: bool, r: &mut Rng) -> Result<Build, CatalogError> {
    match problem {
        // #1: two shapes; identical (translated copy) vs completely different.
        1 => {
            if positive {
                let a = contour(r, 0)?;
                let s = r.range_f64(MEDIUM.0, MEDIUM.1);
                Ok((vec![spec(&a, s, 0.0), spec(&a, s, 0.0)], vec![]))
            } else {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                let (s0, s1) = (r.range_f64(MEDIUM.0, MEDIUM.1), r.range_f64(MEDIUM.0, MEDIUM.1));
                Ok((vec![spec(&a, s0, 0.0), spec(&b, s1, 0.0)], vec![]))
            }
        }
        // #2: small shape inside a big one; touching its boundary vs well inside.
        2 => {
            let outer = fat_contour(r, 0)?;
            let inner = contour(r, 1)?;
            let so = r.range_f64(BIG.0, BIG.1);
            let si = r.range_f64(INNER.0, INNER.1);
            let specs = vec![spec(&outer, so, 0.0), spec(&inner, si, 0.0)];
            let cons = if positive {
                vec![Constraint::Contains { outer: 0, inner: 1, touching: true }]
            } else {
                vec![
                    Constraint::Contains { outer: 0, inner: 1, touching: false },
                    Constraint::Separate { a: 0, b: 1, gap: NEQ_MARGIN },
                ]
            };
            Ok((specs, cons))
        }
        // #3: two shapes in contact vs clearly apart.
        3 => {
            let a = contour(r, 0)?;
            let b = contour(r, 1)?;
            let (s0, s1) = (r.range_f64(MEDIUM.0, MEDIUM.1), r.range_f64(MEDIUM.0, MEDIUM.1));
            let specs = vec![spec(&a, s0, 0.0), spec(&b, s1, 0.0)];
            let cons = if positive {
                vec![Constraint::Borders { a: 0, b: 1 }]
            } else {
                vec![Constraint::Separate { a: 0, b: 1, gap: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #4: one shape inside the other vs both outside, never touching.
        4 => {
            let a = if positive { fat_contour(r, 0)? } else { contour(r, 0)? };
            let b = contour(r, 1)?;
            if positive {
                let so = r.range_f64(BIG.0, BIG.1);
                let si = r.range_f64(INNER.0, INNER.1);
                Ok((
                    vec![spec(&a, so, 0.0), spec(&b, si, 0.0)],
                    vec![
                        Constraint::Contains { outer: 0, inner: 1, touching: false },
                        Constraint::Separate { a: 0, b: 1, gap: NEQ_MARGIN },
                    ],
                ))
            } else {
                let so = r.range_f64(BIG.0, BIG.1);
                let si = r.range_f64(INNER.0, INNER.1);
                Ok((
                    vec![spec(&a, so, 0.0), spec(&b, si, 0.0)],
                    vec![Constraint::Separate { a: 0, b: 1, gap: NEQ_MARGIN }],
                ))
            }
        }
        // #5: four shapes forming two identical pairs vs four different shapes.
        5 => {
            if positive {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                let sa = r.range_f64(SMALL.0, SMALL.1);
                let sb = r.range_f64(SMALL.0, SMALL.1);
                Ok((vec![spec(&a, sa, 0.0), spec(&a, sa, 0.0), spec(&b, sb, 0.0), spec(&b, sb, 0.0)], vec![]))
            } else {
                let mut specs = Vec::new();
                for k in 0..4 {
                    let c = contour(r, k)?;
                    specs.push(spec(&c, r.range_f64(SMALL.0, SMALL.1), 0.0));
                }
                Ok((specs, vec![]))
            }
        }
        // #6: two identical pairs; the two within-pair distances are equal
        // vs clearly different.
        6 => {
            let a = contour(r, 0)?;
            let b = contour(r, 1)?;
            let sa = r.range_f64(SMALL.0, SMALL.1);
            let sb = r.range_f64(SMALL.0, SMALL.1);
            let specs =
                vec![spec(&a, sa, 0.0), spec(&a, sa, 0.0), spec(&b, sb, 0.0), spec(&b, sb, 0.0)];
            let cons = if positive {
                vec![Constraint::PairDistance { pairs: vec![(0, 1), (2, 3)], range: (38.0, 52.0) }]
            } else {
                vec![Constraint::DistanceDiffers { a: (0, 1), b: (2, 3), margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #7: six shapes; three identical pairs vs two identical triplets.
        7 => {
            if positive {
                let mut specs = Vec::new();
                for k in 0..3 {
                    let c = contour(r, k)?;
                    let s = r.range_f64(SMALL6.0, SMALL6.1);
                    specs.push(spec(&c, s, 0.0));
                    specs.push(spec(&c, s, 0.0));
                }
                Ok((specs, vec![]))
            } else {
                let mut specs = Vec::new();
                for k in 0..2 {
                    let c = contour(r, k)?;
                    let s = r.range_f64(SMALL6.0, SMALL6.1);
                    for _ in 0..3 {
                        specs.push(spec(&c, s, 0.0));
                    }
                }
                Ok((specs, vec![]))
            }
        }
        // #8: a big shape with a small one inside and a small one outside;
        // the two small shapes are identical vs different.
        8 => {
            let outer = fat_contour(r, 0)?;
            let so = r.range_f64(BIG.0, BIG.1);
            if positive {
                let small = contour(r, 1)?;
                let s = r.range_f64(INNER.0, INNER.1);
                Ok((
                    vec![spec(&outer, so, 0.0), spec(&small, s, 0.0), spec(&small, s, 0.0)],
                    vec![Constraint::Contains { outer: 0, inner: 1, touching: false }],
                ))
            } else {
                let p = contour(r, 1)?;
                let q = contour(r, 2)?;
                Ok((
                    vec![
                        spec(&outer, so, 0.0),
                        spec(&p, r.range_f64(INNER.0, INNER.1), 0.0),
                        spec(&q, r.range_f64(INNER.0, INNER.1), 0.0),
                    ],
                    vec![Constraint::Contains { outer: 0, inner: 1, touching: false }],
                ))
            }
        }
        // #9: three shapes in an evenly spaced row; the larger one in the
        // middle vs at an end.
        9 => {
            let big = contour(r, 0)?;
            let s1 = contour(r, 1)?;
            let s2 = contour(r, 2)?;
            let sb = r.range_f64(LARGE_MID.0, LARGE_MID.1);
            let ss = r.range_f64(SMALL.0, SMALL.1);
            let specs = vec![spec(&big, sb, 0.0), spec(&s1, ss, 0.0), spec(&s2, ss, 0.0)];
            let cons = if positive {
                vec![Constraint::OnSegment { a: 1, b: 2, k: 0, t: 0.5 }]
            } else {
                vec![Constraint::OnSegment { a: 0, b: 2, k: 1, t: 0.5 }]
            };
            Ok((specs, cons))
        }
        // #10: four shapes at the corners of an axis-aligned square vs
        // scattered anywhere else.
        10 => {
            let mut specs = Vec::new();
            for k in 0..4 {
                let c = contour(r, k)?;
                specs.push(spec(&c, r.range_f64(SMALL.0, SMALL.1), 0.0));
            }
            let cons = if positive {
                vec![Constraint::SquareCorners { slots: [0, 1, 2, 3], side: (36.0, 62.0) }]
            } else {
                vec![Constraint::NoSquare { slots: [0, 1, 2, 3], margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #11: two shapes in contact; from the inside vs from the outside.
        11 => {
            let big = fat_contour(r, 0)?;
            let small = contour(r, 1)?;
            let so = r.range_f64(BIG.0, BIG.1);
            let si = r.range_f64(INNER.0, INNER.1);
            let specs = vec![spec(&big, so, 0.0), spec(&small, si, 0.0)];
            let cons = if positive {
                vec![Constraint::Contains { outer: 0, inner: 1, touching: true }]
            } else {
                vec![Constraint::Borders { a: 0, b: 1 }]
            };
            Ok((specs, cons))
        }
        // #12: one larger and two smaller shapes; the two smaller ones are
        // equidistant from the larger one vs at clearly different distances.
        12 => {
            let big = contour(r, 0)?;
            let s1 = contour(r, 1)?;
            let s2 = contour(r, 2)?;
            let sb = r.range_f64(LARGE_MID.0, LARGE_MID.1);
            let ss = r.range_f64(SMALL.0, SMALL.1);
            let specs = vec![spec(&big, sb, 0.0), spec(&s1, ss, 0.0), spec(&s2, ss, 0.0)];
            let cons = if positive {
                vec![Constraint::OnCircle { centre: 0, slots: vec![1, 2], range: (42.0, 55.0) }]
            } else {
                vec![Constraint::DistanceDiffers { a: (0, 1), b: (0, 2), margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #13: two larger/smaller pairs; the smaller shape sits at the same
        // offset from its larger partner in both pairs vs at different
        // offsets (under either pairing).
        13 => {
            let l1 = contour(r, 0)?;
            let s1 = contour(r, 1)?;
            let l2 = contour(r, 2)?;
            let s2 = contour(r, 3)?;
            let sl = r.range_f64(1.2, 1.4);
            let ss = r.range_f64(0.55, 0.68);
            let specs =
                vec![spec(&l1, sl, 0.0), spec(&s1, ss, 0.0), spec(&l2, sl, 0.0), spec(&s2, ss, 0.0)];
            let cons = if positive {
                vec![
                    Constraint::OnCircle { centre: 0, slots: vec![1], range: (32.0, 44.0) },
                    Constraint::EqualOffset { a: 0, b: 1, c: 2, d: 3 },
                ]
            } else {
                vec![
                    Constraint::OnCircle { centre: 0, slots: vec![1], range: (32.0, 44.0) },
                    Constraint::OnCircle { centre: 2, slots: vec![3], range: (32.0, 44.0) },
                    Constraint::OffsetsDiffer { a: 0, b: 1, c: 2, d: 3, margin: NEQ_MARGIN },
                    Constraint::OffsetsDiffer { a: 0, b: 3, c: 2, d: 1, margin: NEQ_MARGIN },
                ]
            };
            Ok((specs, cons))
        }
        // #14: three shapes evenly spaced along a line vs in general position.
        14 => {
            let mut specs = Vec::new();
            for k in 0..3 {
                let c = contour(r, k)?;
                specs.push(spec(&c, r.range_f64(0.55, 0.85), 0.0));
            }
            let cons = if positive {
                vec![Constraint::OnSegment { a: 0, b: 2, k: 1, t: 0.5 }]
            } else {
                vec![Constraint::NoMidpoint { slots: [0, 1, 2], margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #15: four identical shapes vs four different shapes.
        15 => {
            if positive {
                let a = contour(r, 0)?;
                let s = r.range_f64(SMALL.0, SMALL.1);
                Ok((vec![spec(&a, s, 0.0); 4], vec![]))
            } else {
                let mut specs = Vec::new();
                for k in 0..4 {
                    let c = contour(r, k)?;
                    specs.push(spec(&c, r.range_f64(SMALL.0, SMALL.1), 0.0));
                }
                Ok((specs, vec![]))
            }
        }
        // #16: six copies of one shape, exactly three of them reflected vs
        // none reflected.
        16 => {
            let a = contour(r, 0)?;
            let s = r.range_f64(SMALL6.0, SMALL6.1);
            let mut specs = Vec::new();
            for k in 0..6 {
                let scale = if positive && k >= 3 { -s } else { s };
                specs.push(spec(&a, scale, 0.0));
            }
            Ok((specs, vec![]))
        }
        // #17: three identical shapes and one different; the odd one is
        // equidistant from all three vs at spread-out distances.
        17 => {
            let a = contour(r, 0)?;
            let odd = contour(r, 1)?;
            let sa = r.range_f64(SMALL.0, SMALL.1);
            let so = r.range_f64(SMALL.0, SMALL.1);
            let specs =
                vec![spec(&a, sa, 0.0), spec(&a, sa, 0.0), spec(&a, sa, 0.0), spec(&odd, so, 0.0)];
            let cons = if positive {
                vec![Constraint::OnCircle { centre: 3, slots: vec![0, 1, 2], range: (34.0, 50.0) }]
            } else {
                vec![Constraint::DistanceSpread { centre: 3, slots: vec![0, 1, 2], margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #18: four shapes in two position pairs mirrored about one vertical
        // axis vs in general position.
        18 => {
            let mut specs = Vec::new();
            for k in 0..4 {
                let c = contour(r, k)?;
                specs.push(spec(&c, r.range_f64(SMALL.0, SMALL.1), 0.0));
            }
            let cons = if positive {
                vec![Constraint::MirrorPairs { pairs: [(0, 1), (2, 3)] }]
            } else {
                vec![Constraint::NoMirror { slots: [0, 1, 2, 3], margin: NEQ_MARGIN }]
            };
            Ok((specs, cons))
        }
        // #19: two shapes identical up to scaling vs simply different.
        19 => {
            let ratio = r.range_f64(SIZE_RATIO_DISTINCT, 1.9);
            let s = r.range_f64(0.6, 0.8);
            if positive {
                let a = contour(r, 0)?;
                Ok((vec![spec(&a, s, 0.0), spec(&a, s * ratio, 0.0)], vec![]))
            } else {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                Ok((vec![spec(&a, s, 0.0), spec(&b, s * ratio, 0.0)], vec![]))
            }
        }
        // #20: two shapes identical up to reflection vs simply different.
        20 => {
            let s = r.range_f64(0.7, 1.0);
            if positive {
                let a = contour(r, 0)?;
                Ok((vec![spec(&a, s, 0.0), spec(&a, -s, 0.0)], vec![]))
            } else {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                let s2 = r.range_f64(0.7, 1.0);
                Ok((vec![spec(&a, s, 0.0), spec(&b, s2, 0.0)], vec![]))
            }
        }
        // #21: two shapes identical up to rotation and rescaling vs simply
        // different.
        21 => {
            let ratio = r.range_f64(SIZE_RATIO_DISTINCT, 1.9);
            let s = r.range_f64(0.6, 0.8);
            let theta = nontrivial_rotation(r);
            if positive {
                let a = contour(r, 0)?;
                Ok((vec![spec(&a, s, 0.0), spec(&a, s * ratio, theta)], vec![]))
            } else {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                Ok((vec![spec(&a, s, 0.0), spec(&b, s * ratio, theta)], vec![]))
            }
        }
        // #22: three identical shapes vs three different shapes.
        22 => {
            if positive {
                let a = contour(r, 0)?;
                let s = r.range_f64(SMALL.0, SMALL.1);
                Ok((vec![spec(&a, s, 0.0); 3], vec![]))
            } else {
                let mut specs = Vec::new();
                for k in 0..3 {
                    let c = contour(r, k)?;
                    specs.push(spec(&c, r.range_f64(SMALL.0, SMALL.1), 0.0));
                }
                Ok((specs, vec![]))
            }
        }
        // #23: a big shape and two small ones; exactly one small inside the
        // big one vs none or both inside.
        23 => {
            let big = fat_contour(r, 0)?;
            let p = contour(r, 1)?;
            let q = contour(r, 2)?;
            let so = r.range_f64(2.05, 2.3);
            let (sp, sq) = (r.range_f64(0.42, 0.52), r.range_f64(0.42, 0.52));
            let specs = vec![spec(&big, so, 0.0), spec(&p, sp, 0.0), spec(&q, sq, 0.0)];
            let cons = if positive {
                vec![Constraint::Contains { outer: 0, inner: 1, touching: false }]
            } else if r.chance(0.5) {
                vec![
                    Constraint::Contains { outer: 0, inner: 1, touching: false },
                    Constraint::Contains { outer: 0, inner: 2, touching: false },
                ]
            } else {
                vec![]
            };
            Ok((specs, cons))
        }
        // #101 (extension): two shapes identical only after rotating vs
        // simply different.
        PROBLEM_101 => {
            let s = r.range_f64(0.7, 1.0);
            let theta = nontrivial_rotation(r);
            if positive {
                let a = contour(r, 0)?;
                Ok((vec![spec(&a, s, 0.0), spec(&a, s, theta)], vec![]))
            } else {
                let a = contour(r, 0)?;
                let b = contour(r, 1)?;
                Ok((vec![spec(&a, s, 0.0), spec(&b, s, theta)], vec![]))
            }
        }
        other => Err(CatalogError::UnknownProblem(other)),
    }
}

// ---------------------------------------------------------------------------
// Rule predicates over ground truth. The oracle recomputes topological
// relations geometrically rather than trusting the generator's declarations.
// ---------------------------------------------------------------------------

fn polygons(truth: &GroundTruth) -> Vec<Vec<Vec2>> {
    (0..truth.instances.len()).map(|i| truth.instance_polygon(i)).collect()
}

fn geom_contains(polys: &[Vec<Vec2>], i: usize, j: usize) -> bool {
    polygon_contains(&polys[i], &polys[j])
}

fn gap(polys: &[Vec<Vec2>], i: usize, j: usize) -> f64 {
    polygons_boundary_dist(&polys[i], &polys[j])
}

/// Identity classes in order of first appearance.
fn identity_classes(truth: &GroundTruth) -> Vec<Vec<usize>> {
    let mut classes: Vec<(u32, Vec<usize>)> = Vec::new();
    for (idx, inst) in truth.instances.iter().enumerate() {
        match classes.iter_mut().find(|(id, _)| *id == inst.identity) {
            Some((_, v)) => v.push(idx),
            None => classes.push((inst.identity, vec![idx])),
        }
    }
    classes.into_iter().map(|(_, v)| v).collect()
}

fn rot_close(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    !(1e-9..=std::f64::consts::TAU - 1e-9).contains(&d)
}

/// Translated copy: same contour, same signed scale, same rotation.
fn identical(truth: &GroundTruth, i: usize, j: usize) -> bool {
    let (a, b) = (&truth.instances[i], &truth.instances[j]);
    a.identity == b.identity && (a.scale - b.scale).abs() <= SCALE_EQ_TOL && rot_close(a.rotation, b.rotation)
}

fn all_identical(truth: &GroundTruth, idxs: &[usize]) -> bool {
    idxs.windows(2).all(|w| identical(truth, w[0], w[1]))
}

fn class_sizes(truth: &GroundTruth) -> Vec<usize> {
    let mut sizes: Vec<usize> = identity_classes(truth).iter().map(|c| c.len()).collect();
    sizes.sort_unstable();
    sizes
}

fn centre(truth: &GroundTruth, i: usize) -> Vec2 {
    truth.instances[i].centre
}

fn dist(truth: &GroundTruth, i: usize, j: usize) -> f64 {
    centre(truth, i).dist(centre(truth, j))
}

fn magnitude(truth: &GroundTruth, i: usize) -> f64 {
    truth.instances[i].scale.abs()
}

/// Index of the shape whose |scale| exceeds every other by the test ratio,
/// if one exists.
fn strictly_largest(truth: &GroundTruth) -> Option<usize> {
    let n = truth.instances.len();
    (0..n).find(|&i| {
        (0..n).all(|j| j == i || magnitude(truth, i) >= SIZE_RATIO_TEST * magnitude(truth, j))
    })
}

/// The slot that is the midpoint of the two others, if any.
fn midpoint_slot(truth: &GroundTruth, tol: f64) -> Option<usize> {
    for k in 0..3 {
        let (i, j) = match k {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mid = (centre(truth, i) + centre(truth, j)) * 0.5;
        if mid.dist(centre(truth, k)) <= tol {
            return Some(k);
        }
    }
    None
}

/// Pairing of two-shape problems: (contained, container, touching).
fn two_shape_relation(truth: &GroundTruth) -> Option<(bool, f64)> {
    if truth.instances.len() != 2 {
        return None;
    }
    let polys = polygons(truth);
    let contained = geom_contains(&polys, 0, 1) || geom_contains(&polys, 1, 0);
    Some((contained, gap(&polys, 0, 1)))
}

pub(super) fn positive_rule(problem: u32, truth: &GroundTruth) -> bool {
    let n = truth.instances.len();
    match problem {
        1 => n == 2 && identical(truth, 0, 1),
        2 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            contained && g <= BORDER_TEST
        }
        3 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            !contained && g <= BORDER_TEST
        }
        4 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            contained && g >= MID_TOL
        }
        5 => {
            n == 4
                && class_sizes(truth) == [2, 2]
                && identity_classes(truth).iter().all(|c| all_identical(truth, c))
        }
        6 => {
            if n != 4 || class_sizes(truth) != [2, 2] {
                return false;
            }
            let classes = identity_classes(truth);
            if !classes.iter().all(|c| all_identical(truth, c)) {
                return false;
            }
            let d0 = dist(truth, classes[0][0], classes[0][1]);
            let d1 = dist(truth, classes[1][0], classes[1][1]);
            (d0 - d1).abs() <= EQ_TOL
        }
        7 => n == 6 && class_sizes(truth) == [2, 2, 2] && identity_classes(truth).iter().all(|c| all_identical(truth, c)),
        8 => {
            if n != 3 {
                return false;
            }
            let polys = polygons(truth);
            let inside = (0..3).find(|&j| (0..3).any(|i| i != j && geom_contains(&polys, i, j)));
            let Some(inside) = inside else { return false };
            let Some(container) = (0..3).find(|&i| i != inside && geom_contains(&polys, i, inside)) else {
                return false;
            };
            let outsider = 3 - inside - container;
            identical(truth, inside, outsider)
        }
        9 => {
            if n != 3 {
                return false;
            }
            match (midpoint_slot(truth, EQ_TOL), strictly_largest(truth)) {
                (Some(m), Some(l)) => m == l,
                _ => false,
            }
        }
        10 => {
            n == 4 && {
                let c = [centre(truth, 0), centre(truth, 1), centre(truth, 2), centre(truth, 3)];
                square_deviation(&c) <= EQ_TOL
            }
        }
        11 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            contained && g <= BORDER_TEST
        }
        12 => {
            if n != 3 {
                return false;
            }
            let Some(l) = strictly_largest(truth) else { return false };
            let others: Vec<usize> = (0..3).filter(|&i| i != l).collect();
            (dist(truth, l, others[0]) - dist(truth, l, others[1])).abs() <= EQ_TOL
        }
        13 => {
            if n != 4 {
                return false;
            }
            let Some((larges, smalls)) = large_small_split(truth) else { return false };
            offset_pairing_matches(truth, larges, smalls, EQ_TOL)
        }
        14 => n == 3 && midpoint_slot(truth, EQ_TOL).is_some(),
        15 => n == 4 && class_sizes(truth) == [4] && all_identical(truth, &[0, 1, 2, 3]),
        16 => {
            if n != 6 || class_sizes(truth) != [6] {
                return false;
            }
            let mags: Vec<f64> = (0..6).map(|i| magnitude(truth, i)).collect();
            let equal_mag = mags.windows(2).all(|w| (w[0] - w[1]).abs() <= SCALE_EQ_TOL);
            let reflected = (0..6).filter(|&i| truth.instances[i].scale < 0.0).count();
            equal_mag && reflected == 3
        }
        17 => {
            if n != 4 {
                return false;
            }
            let classes = identity_classes(truth);
            let mut sizes: Vec<usize> = classes.iter().map(|c| c.len()).collect();
            sizes.sort_unstable();
            if sizes != [1, 3] {
                return false;
            }
            let odd = classes.iter().find(|c| c.len() == 1).unwrap()[0];
            let trio = classes.iter().find(|c| c.len() == 3).unwrap();
            if !all_identical(truth, trio) {
                return false;
            }
            let ds: Vec<f64> = trio.iter().map(|&i| dist(truth, odd, i)).collect();
            let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ds.iter().cloned().fold(0.0_f64, f64::max);
            hi - lo <= 2.0 * EQ_TOL
        }
        18 => {
            n == 4 && {
                let c = [centre(truth, 0), centre(truth, 1), centre(truth, 2), centre(truth, 3)];
                mirror_deviation_best(&c) <= EQ_TOL
            }
        }
        19 => {
            n == 2 && truth.instances[0].identity == truth.instances[1].identity && {
                let (a, b) = (truth.instances[0].scale, truth.instances[1].scale);
                a > 0.0 && b > 0.0 && size_ratio(a, b) >= SIZE_RATIO_TEST
            }
        }
        20 => {
            n == 2 && truth.instances[0].identity == truth.instances[1].identity && {
                let (a, b) = (truth.instances[0].scale, truth.instances[1].scale);
                a * b < 0.0 && (a.abs() - b.abs()).abs() <= SCALE_EQ_TOL
            }
        }
        21 => {
            n == 2 && truth.instances[0].identity == truth.instances[1].identity && {
                let (a, b) = (&truth.instances[0], &truth.instances[1]);
                a.scale > 0.0
                    && b.scale > 0.0
                    && size_ratio(a.scale, b.scale) >= SIZE_RATIO_TEST
                    && !rot_close(a.rotation, b.rotation)
            }
        }
        22 => n == 3 && class_sizes(truth) == [3] && all_identical(truth, &[0, 1, 2]),
        23 => {
            if n != 3 {
                return false;
            }
            let polys = polygons(truth);
            contained_count(&polys) == 1
        }
        PROBLEM_101 => {
            n == 2 && truth.instances[0].identity == truth.instances[1].identity && {
                let (a, b) = (&truth.instances[0], &truth.instances[1]);
                a.scale > 0.0
                    && b.scale > 0.0
                    && (a.scale - b.scale).abs() <= SCALE_EQ_TOL
                    && !rot_close(a.rotation, b.rotation)
            }
        }
        _ => false,
    }
}

pub(super) fn negative_rule(problem: u32, truth: &GroundTruth) -> bool {
    let n = truth.instances.len();
    match problem {
        1 | 19 | 20 | 21 => n == 2 && truth.instances[0].identity != truth.instances[1].identity,
        2 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            contained && g >= MID_TOL
        }
        3 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            !contained && g >= MID_TOL
        }
        4 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            !contained && g >= MID_TOL
        }
        5 => n == 4 && class_sizes(truth) == [1, 1, 1, 1],
        6 => {
            if n != 4 || class_sizes(truth) != [2, 2] {
                return false;
            }
            let classes = identity_classes(truth);
            if !classes.iter().all(|c| all_identical(truth, c)) {
                return false;
            }
            let d0 = dist(truth, classes[0][0], classes[0][1]);
            let d1 = dist(truth, classes[1][0], classes[1][1]);
            (d0 - d1).abs() >= MID_TOL
        }
        7 => n == 6 && class_sizes(truth) == [3, 3] && identity_classes(truth).iter().all(|c| all_identical(truth, c)),
        8 => {
            if n != 3 {
                return false;
            }
            let polys = polygons(truth);
            let inside = (0..3).find(|&j| (0..3).any(|i| i != j && geom_contains(&polys, i, j)));
            let Some(inside) = inside else { return false };
            let Some(container) = (0..3).find(|&i| i != inside && geom_contains(&polys, i, inside)) else {
                return false;
            };
            let outsider = 3 - inside - container;
            truth.instances[inside].identity != truth.instances[outsider].identity
        }
        9 => {
            if n != 3 {
                return false;
            }
            match (midpoint_slot(truth, EQ_TOL), strictly_largest(truth)) {
                (Some(m), Some(l)) => m != l,
                _ => false,
            }
        }
        10 => {
            n == 4 && {
                let c = [centre(truth, 0), centre(truth, 1), centre(truth, 2), centre(truth, 3)];
                square_deviation(&c) >= MID_TOL
            }
        }
        11 => {
            let Some((contained, g)) = two_shape_relation(truth) else { return false };
            !contained && g <= BORDER_TEST
        }
        12 => {
            if n != 3 {
                return false;
            }
            let Some(l) = strictly_largest(truth) else { return false };
            let others: Vec<usize> = (0..3).filter(|&i| i != l).collect();
            (dist(truth, l, others[0]) - dist(truth, l, others[1])).abs() >= MID_TOL
        }
        13 => {
            if n != 4 {
                return false;
            }
            let Some((larges, smalls)) = large_small_split(truth) else { return false };
            !offset_pairing_matches(truth, larges, smalls, MID_TOL)
        }
        14 => n == 3 && midpoint_slot(truth, MID_TOL).is_none(),
        15 => n == 4 && class_sizes(truth) == [1, 1, 1, 1],
        16 => {
            if n != 6 || class_sizes(truth) != [6] {
                return false;
            }
            let mags: Vec<f64> = (0..6).map(|i| magnitude(truth, i)).collect();
            let equal_mag = mags.windows(2).all(|w| (w[0] - w[1]).abs() <= SCALE_EQ_TOL);
            equal_mag && truth.instances.iter().all(|i| i.scale > 0.0)
        }
        17 => {
            if n != 4 {
                return false;
            }
            let classes = identity_classes(truth);
            let mut sizes: Vec<usize> = classes.iter().map(|c| c.len()).collect();
            sizes.sort_unstable();
            if sizes != [1, 3] {
                return false;
            }
            let odd = classes.iter().find(|c| c.len() == 1).unwrap()[0];
            let trio = classes.iter().find(|c| c.len() == 3).unwrap();
            let ds: Vec<f64> = trio.iter().map(|&i| dist(truth, odd, i)).collect();
            let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = ds.iter().cloned().fold(0.0_f64, f64::max);
            hi - lo >= MID_TOL
        }
        18 => {
            n == 4 && {
                let c = [centre(truth, 0), centre(truth, 1), centre(truth, 2), centre(truth, 3)];
                mirror_deviation_best(&c) >= MID_TOL
            }
        }
        22 => n == 3 && class_sizes(truth) == [1, 1, 1],
        23 => {
            if n != 3 {
                return false;
            }
            let polys = polygons(truth);
            let c = contained_count(&polys);
            c == 0 || c == 2
        }
        PROBLEM_101 => n == 2 && truth.instances[0].identity != truth.instances[1].identity,
        _ => false,
    }
}

fn size_ratio(a: f64, b: f64) -> f64 {
    let (lo, hi) = if a.abs() < b.abs() { (a.abs(), b.abs()) } else { (b.abs(), a.abs()) };
    hi / lo
}

fn contained_count(polys: &[Vec<Vec2>]) -> usize {
    let n = polys.len();
    (0..n)
        .filter(|&j| (0..n).any(|i| i != j && geom_contains(polys, i, j)))
        .count()
}

/// Split four shapes into two larger and two smaller by |scale|, requiring
/// a clear ratio between the groups.
fn large_small_split(truth: &GroundTruth) -> Option<([usize; 2], [usize; 2])> {
    let mut idx: Vec<usize> = (0..4).collect();
    idx.sort_by(|&a, &b| magnitude(truth, a).partial_cmp(&magnitude(truth, b)).unwrap());
    let smalls = [idx[0], idx[1]];
    let larges = [idx[2], idx[3]];
    let min_large = magnitude(truth, larges[0]).min(magnitude(truth, larges[1]));
    let max_small = magnitude(truth, smalls[0]).max(magnitude(truth, smalls[1]));
    if min_large >= SIZE_RATIO_TEST * max_small {
        Some((larges, smalls))
    } else {
        None
    }
}

/// Whether some large/small pairing has equal small-relative-to-large
/// offsets within `tol`.
fn offset_pairing_matches(truth: &GroundTruth, larges: [usize; 2], smalls: [usize; 2], tol: f64) -> bool {
    for (s0, s1) in [(smalls[0], smalls[1]), (smalls[1], smalls[0])] {
        let o0 = centre(truth, s0) - centre(truth, larges[0]);
        let o1 = centre(truth, s1) - centre(truth, larges[1]);
        if (o0 - o1).norm() <= tol {
            return true;
        }
    }
    false
}
