//! Constraint-driven shape placement by rejection sampling.
//!
//! The caller supplies shapes (contour + scale + rotation per slot) and a
//! declarative constraint list. Free slots are sampled uniformly, derived
//! slots (segment points, circles, squares, mirror pairs, shared offsets)
//! are constructed exactly, and the whole layout is validated geometrically
//! and at pixel level before it is accepted. Placement retries up to a
//! fixed budget and reports exhaustion so the caller can regenerate
//! contours.

use std::collections::BTreeSet;

use crate::canvas::{rasterize, GroundTruth, ImageCanvas, ShapeInstance};
use crate::contour::Contour;
use crate::geom::{
    polygon_contains, polygons_boundary_dist, polygons_cross, Similarity, Vec2,
};
use crate::rng::Rng;
use thiserror::Error;

/// Attempts before placement gives up and the caller regenerates contours.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 10_000;

/// Geometric boundary gap targeted for bordering contacts, in pixels.
pub const BORDER_GAP: (f64, f64) = (0.85, 1.25);

/// Minimum geometric boundary gap between non-bordering outlines.
pub const SEPARATION_GAP: f64 = 2.5;

/// Margin kept between any vertex and the canvas edge.
const EDGE_MARGIN: f64 = 2.0;

#[derive(Debug, Error)]
pub enum PlaceError {
    #[error("placement exhausted after {0} attempts")]
    Exhausted(u32),
    #[error("invalid placement request: {0}")]
    BadSpec(String),
}

/// Shape to place: geometry plus the instance transform parameters.
#[derive(Clone, Debug)]
pub struct ShapeSpec {
    pub contour: Contour,
    pub scale: f64,
    pub rotation: f64,
}

/// Placement constraints. Structural constraints both drive the sampler and
/// are re-validated; `No*`/`*Differs` constraints are validation-only
/// margins used by negative categories.
#[derive(Clone, Debug)]
pub enum Constraint {
    /// `inner` strictly inside `outer`; touching the boundary from inside
    /// when `touching`, otherwise clear of it.
    Contains { outer: usize, inner: usize, touching: bool },
    /// Outside contact between `a` and `b`.
    Borders { a: usize, b: usize },
    /// Extra clearance between two outlines, beyond the default separation.
    Separate { a: usize, b: usize, gap: f64 },
    /// Centre of `k` at `a + t * (b - a)`.
    OnSegment { a: usize, b: usize, k: usize, t: f64 },
    /// No slot of the triple sits at the midpoint of the other two.
    NoMidpoint { slots: [usize; 3], margin: f64 },
    /// `centre(d) - centre(c) == centre(b) - centre(a)`; `d` is derived.
    EqualOffset { a: usize, b: usize, c: usize, d: usize },
    /// `|offset(a->b) - offset(c->d)| >= margin`.
    OffsetsDiffer { a: usize, b: usize, c: usize, d: usize, margin: f64 },
    /// Every listed pair separated by one shared centre distance; the
    /// second slot of each pair is derived.
    PairDistance { pairs: Vec<(usize, usize)>, range: (f64, f64) },
    /// `| dist(a) - dist(b) | >= margin` for the two centre-distance pairs.
    DistanceDiffers { a: (usize, usize), b: (usize, usize), margin: f64 },
    /// Listed slots on a shared-radius circle around `centre`; derived.
    OnCircle { centre: usize, slots: Vec<usize>, range: (f64, f64) },
    /// Centre distances from `centre` to the slots spread by >= margin.
    DistanceSpread { centre: usize, slots: Vec<usize>, margin: f64 },
    /// Slots at the corners of an axis-aligned square, in the given order.
    SquareCorners { slots: [usize; 4], side: (f64, f64) },
    /// No labeling of the slots forms an axis-aligned square within margin.
    NoSquare { slots: [usize; 4], margin: f64 },
    /// The two pairs mirror about one shared vertical axis; the second slot
    /// of each pair is derived.
    MirrorPairs { pairs: [(usize, usize); 2] },
    /// No pairing of the slots mirrors about a shared axis within margin.
    NoMirror { slots: [usize; 4], margin: f64 },
}

/// Exact-position tolerance for derived placements, in pixels.
pub const DERIVED_TOL: f64 = 1e-6;

/// Max deviation of four centres from the best axis-aligned square over all
/// corner labelings (0 for a perfect square).
pub fn square_deviation(c: &[Vec2; 4]) -> f64 {
    let mut best = f64::INFINITY;
    // corner order: (left,bottom) (right,bottom) (left,top) (right,top)
    let perms = permutations4();
    for p in perms {
        let p00 = c[p[0]];
        let p10 = c[p[1]];
        let p01 = c[p[2]];
        let p11 = c[p[3]];
        let dev = (p00.x - p01.x)
            .abs()
            .max((p10.x - p11.x).abs())
            .max((p00.y - p10.y).abs())
            .max((p01.y - p11.y).abs())
            .max({
                let w = (p10.x + p11.x) / 2.0 - (p00.x + p01.x) / 2.0;
                let h = (p01.y + p11.y) / 2.0 - (p00.y + p10.y) / 2.0;
                (w - h).abs().max(if w <= 0.0 || h <= 0.0 { f64::INFINITY } else { 0.0 })
            });
        best = best.min(dev);
    }
    best
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    let idx = [0usize, 1, 2, 3];
    for a in 0..4 {
        for b in 0..4 {
            if b == a {
                continue;
            }
            for c in 0..4 {
                if c == a || c == b {
                    continue;
                }
                let d = 6 - a - b - c;
                out.push([idx[a], idx[b], idx[c], idx[d]]);
            }
        }
    }
    out
}

/// Deviation of one pairing from a shared-vertical-axis mirror layout.
pub fn mirror_deviation(pair1: (Vec2, Vec2), pair2: (Vec2, Vec2)) -> f64 {
    let axis1 = (pair1.0.x + pair1.1.x) / 2.0;
    let axis2 = (pair2.0.x + pair2.1.x) / 2.0;
    (pair1.0.y - pair1.1.y)
        .abs()
        .max((pair2.0.y - pair2.1.y).abs())
        .max((axis1 - axis2).abs())
}

/// Best mirror deviation over the three pairings of four centres.
pub fn mirror_deviation_best(c: &[Vec2; 4]) -> f64 {
    let pairings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
    pairings
        .iter()
        .map(|&((a, b), (x, y))| mirror_deviation((c[a], c[b]), (c[x], c[y])))
        .fold(f64::INFINITY, f64::min)
}

pub fn midpoint_deviation(a: Vec2, b: Vec2, mid: Vec2) -> f64 {
    ((a + b) * 0.5).dist(mid)
}

struct Slot {
    /// Contour points with scale/rotation applied, still centred on origin.
    local: Vec<Vec2>,
    max_radius: f64,
    derived: bool,
}

struct Layout {
    slots: Vec<Slot>,
    centres: Vec<Option<Vec2>>,
    width: f64,
    height: f64,
}

impl Layout {
    fn polygon(&self, i: usize) -> Vec<Vec2> {
        let c = self.centres[i].expect("slot not yet placed");
        self.slots[i].local.iter().map(|&p| p + c).collect()
    }

    fn sample_free(&self, i: usize, rng: &mut Rng) -> Option<Vec2> {
        let r = self.slots[i].max_radius;
        let lo_x = EDGE_MARGIN + r;
        let hi_x = self.width - 1.0 - EDGE_MARGIN - r;
        let lo_y = EDGE_MARGIN + r;
        let hi_y = self.height - 1.0 - EDGE_MARGIN - r;
        if lo_x >= hi_x || lo_y >= hi_y {
            return None;
        }
        Some(Vec2::new(rng.range_f64(lo_x, hi_x), rng.range_f64(lo_y, hi_y)))
    }

    fn in_bounds(&self, i: usize) -> bool {
        self.polygon(i).iter().all(|p| {
            p.x >= EDGE_MARGIN
                && p.y >= EDGE_MARGIN
                && p.x <= self.width - 1.0 - EDGE_MARGIN
                && p.y <= self.height - 1.0 - EDGE_MARGIN
        })
    }
}

enum SlideGoal {
    /// Moving shape approaches the fixed one from outside.
    OutsideContact,
    /// Moving shape stays inside the fixed one and approaches its boundary.
    InsideContact,
}

/// Classify the boundary gap at position `centre` for bisection.
fn gap_class(fixed: &[Vec2], local: &[Vec2], centre: Vec2, goal: &SlideGoal) -> i8 {
    let moved: Vec<Vec2> = local.iter().map(|&p| p + centre).collect();
    let crossing = polygons_cross(fixed, &moved);
    match goal {
        SlideGoal::OutsideContact => {
            if crossing || polygon_contains(fixed, &moved) {
                return -1; // too close
            }
            let g = polygons_boundary_dist(fixed, &moved);
            if g < BORDER_GAP.0 {
                -1
            } else if g > BORDER_GAP.1 {
                1
            } else {
                0
            }
        }
        SlideGoal::InsideContact => {
            if crossing || !polygon_contains(fixed, &moved) {
                return 1; // slid past the boundary
            }
            let g = polygons_boundary_dist(fixed, &moved);
            if g > BORDER_GAP.1 {
                -1 // still deep inside
            } else if g < BORDER_GAP.0 {
                1
            } else {
                0
            }
        }
    }
}

/// Bisect along `base + dir*t` for a position whose boundary gap falls in
/// [`BORDER_GAP`]. `lo` must classify "too close"/"inside", `hi` "too far".
fn slide(
    fixed: &[Vec2],
    local: &[Vec2],
    base: Vec2,
    dir: Vec2,
    mut lo: f64,
    mut hi: f64,
    goal: SlideGoal,
) -> Option<Vec2> {
    let expected_lo = match goal {
        SlideGoal::OutsideContact => -1,
        SlideGoal::InsideContact => -1,
    };
    if gap_class(fixed, local, base + dir * lo, &goal) != expected_lo
        || gap_class(fixed, local, base + dir * hi, &goal) != 1
    {
        return None;
    }
    for _ in 0..60 {
        let mid = (lo + hi) / 2.0;
        match gap_class(fixed, local, base + dir * mid, &goal) {
            0 => return Some(base + dir * mid),
            -1 => lo = mid,
            _ => hi = mid,
        }
    }
    None
}

fn validate_pairwise(
    layout: &Layout,
    declared_borders: &BTreeSet<(usize, usize)>,
    declared_contains: &BTreeSet<(usize, usize)>,
    extra_gaps: &[(usize, usize, f64)],
) -> bool {
    let n = layout.slots.len();
    for i in 0..n {
        if !layout.in_bounds(i) {
            return false;
        }
    }
    let polys: Vec<Vec<Vec2>> = (0..n).map(|i| layout.polygon(i)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let related = declared_borders.contains(&(i, j))
                || declared_contains.contains(&(i, j))
                || declared_contains.contains(&(j, i));
            // bounding-circle prune: clearly separated unrelated pairs
            let centre_gap = layout.centres[i].unwrap().dist(layout.centres[j].unwrap());
            if !related
                && centre_gap
                    > layout.slots[i].max_radius + layout.slots[j].max_radius + SEPARATION_GAP + 1.0
            {
                continue;
            }
            if polygons_cross(&polys[i], &polys[j]) {
                return false;
            }
            let i_in_j = polygon_contains(&polys[j], &polys[i]);
            let j_in_i = polygon_contains(&polys[i], &polys[j]);
            let declared_in = declared_contains.contains(&(i, j)) && j_in_i
                || declared_contains.contains(&(j, i)) && i_in_j;
            if (i_in_j || j_in_i) != (declared_contains.contains(&(i, j)) || declared_contains.contains(&(j, i)))
                || (i_in_j || j_in_i) && !declared_in
            {
                return false; // containment must match the declaration exactly
            }
            let gap = polygons_boundary_dist(&polys[i], &polys[j]);
            if declared_borders.contains(&(i, j)) {
                if gap < BORDER_GAP.0 || gap > BORDER_GAP.1 {
                    return false;
                }
            } else if gap < SEPARATION_GAP {
                return false;
            }
        }
    }
    for &(a, b, g) in extra_gaps {
        let gap = polygons_boundary_dist(&polys[a.min(b)], &polys[a.max(b)]);
        if gap < g {
            return false;
        }
    }
    true
}

fn centre_dist(layout: &Layout, a: usize, b: usize) -> f64 {
    layout.centres[a].unwrap().dist(layout.centres[b].unwrap())
}

/// Place all shapes subject to the constraints and rasterize the result.
pub fn place_and_render(
    specs: &[ShapeSpec],
    constraints: &[Constraint],
    rng: &mut Rng,
    width: u32,
    height: u32,
) -> Result<ImageCanvas, PlaceError> {
    let truth = place_nonoverlapping_inner(specs, constraints, rng, width, height, |truth| {
        rasterize(truth, width, height).ok()
    })?;
    Ok(truth)
}

/// Place all shapes subject to the constraints, returning instances only.
pub fn place_nonoverlapping(
    specs: &[ShapeSpec],
    constraints: &[Constraint],
    rng: &mut Rng,
    width: u32,
    height: u32,
) -> Result<Vec<ShapeInstance>, PlaceError> {
    let canvas = place_and_render(specs, constraints, rng, width, height)?;
    Ok(canvas.truth.instances)
}

fn place_nonoverlapping_inner(
    specs: &[ShapeSpec],
    constraints: &[Constraint],
    rng: &mut Rng,
    width: u32,
    height: u32,
    finish: impl Fn(&GroundTruth) -> Option<ImageCanvas>,
) -> Result<ImageCanvas, PlaceError> {
    let n = specs.len();
    let mut derived = vec![false; n];
    let mark = |slot: usize, derived: &mut Vec<bool>| -> Result<(), PlaceError> {
        if derived[slot] {
            return Err(PlaceError::BadSpec(format!("slot {slot} derived twice")));
        }
        derived[slot] = true;
        Ok(())
    };
    for c in constraints {
        match c {
            Constraint::Contains { inner, .. } => mark(*inner, &mut derived)?,
            Constraint::Borders { b, .. } => mark(*b, &mut derived)?,
            Constraint::OnSegment { k, .. } => mark(*k, &mut derived)?,
            Constraint::EqualOffset { d, .. } => mark(*d, &mut derived)?,
            Constraint::PairDistance { pairs, .. } => {
                for &(_, second) in pairs {
                    mark(second, &mut derived)?;
                }
            }
            Constraint::OnCircle { slots, .. } => {
                for &s in slots {
                    mark(s, &mut derived)?;
                }
            }
            Constraint::SquareCorners { slots, .. } => {
                for &s in slots {
                    mark(s, &mut derived)?;
                }
            }
            Constraint::MirrorPairs { pairs } => {
                for &(_, second) in pairs {
                    mark(second, &mut derived)?;
                }
            }
            _ => {}
        }
    }

    let slots: Vec<Slot> = specs
        .iter()
        .zip(derived.iter())
        .map(|(s, &d)| {
            let sim = Similarity { centre: Vec2::new(0.0, 0.0), scale: s.scale, rotation: s.rotation };
            let local = sim.apply_all(&s.contour.points);
            let max_radius = local.iter().map(|p| p.norm()).fold(0.0, f64::max);
            Slot { local, max_radius, derived: d }
        })
        .collect();

    let mut layout =
        Layout { slots, centres: vec![None; n], width: width as f64, height: height as f64 };

    'attempt: for attempt in 0..MAX_PLACEMENT_ATTEMPTS {
        let _ = attempt;
        for c in layout.centres.iter_mut() {
            *c = None;
        }
        // free slots first
        for i in 0..n {
            if !layout.slots[i].derived {
                match layout.sample_free(i, rng) {
                    Some(p) => layout.centres[i] = Some(p),
                    None => return Err(PlaceError::BadSpec(format!("slot {i} cannot fit the canvas"))),
                }
            }
        }

        let mut declared_borders: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut declared_contains: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut extra_gaps: Vec<(usize, usize, f64)> = Vec::new();

        // derive constrained slots in declaration order
        for c in constraints {
            match c {
                Constraint::Contains { outer, inner, touching } => {
                    let Some(outer_centre) = layout.centres[*outer] else { continue 'attempt };
                    let outer_poly = layout.polygon(*outer);
                    let centre = if *touching {
                        let dir = Vec2::from_angle(rng.range_f64(0.0, std::f64::consts::TAU));
                        let hi = layout.slots[*outer].max_radius + 2.0;
                        match slide(
                            &outer_poly,
                            &layout.slots[*inner].local,
                            outer_centre,
                            dir,
                            0.0,
                            hi,
                            SlideGoal::InsideContact,
                        ) {
                            Some(p) => p,
                            None => continue 'attempt,
                        }
                    } else {
                        // sample a clear interior position near the outer centre
                        let spread = layout.slots[*outer].max_radius * 0.5;
                        let off = Vec2::new(
                            rng.range_f64(-spread, spread),
                            rng.range_f64(-spread, spread),
                        );
                        outer_centre + off
                    };
                    layout.centres[*inner] = Some(centre);
                    let poly = layout.polygon(*inner);
                    if !polygon_contains(&outer_poly, &poly) {
                        continue 'attempt;
                    }
                    let gap = polygons_boundary_dist(&outer_poly, &poly);
                    if *touching {
                        if gap < BORDER_GAP.0 || gap > BORDER_GAP.1 {
                            continue 'attempt;
                        }
                        declared_borders.insert((*outer.min(inner), *outer.max(inner)));
                    } else if gap < SEPARATION_GAP {
                        continue 'attempt;
                    }
                    declared_contains.insert((*outer, *inner));
                }
                Constraint::Borders { a, b } => {
                    let Some(anchor) = layout.centres[*a] else { continue 'attempt };
                    let fixed = layout.polygon(*a);
                    let dir = Vec2::from_angle(rng.range_f64(0.0, std::f64::consts::TAU));
                    let hi = layout.slots[*a].max_radius + layout.slots[*b].max_radius + 8.0;
                    match slide(&fixed, &layout.slots[*b].local, anchor, dir, 0.0, hi, SlideGoal::OutsideContact) {
                        Some(p) => layout.centres[*b] = Some(p),
                        None => continue 'attempt,
                    }
                    declared_borders.insert((*a.min(b), *a.max(b)));
                }
                Constraint::Separate { a, b, gap } => extra_gaps.push((*a, *b, *gap)),
                Constraint::OnSegment { a, b, k, t } => {
                    let (pa, pb) = (layout.centres[*a].unwrap(), layout.centres[*b].unwrap());
                    layout.centres[*k] = Some(pa + (pb - pa) * *t);
                }
                Constraint::EqualOffset { a, b, c, d } => {
                    let off = layout.centres[*b].unwrap() - layout.centres[*a].unwrap();
                    layout.centres[*d] = Some(layout.centres[*c].unwrap() + off);
                }
                Constraint::PairDistance { pairs, range } => {
                    let dist = rng.range_f64(range.0, range.1);
                    for &(first, second) in pairs {
                        let theta = rng.range_f64(0.0, std::f64::consts::TAU);
                        layout.centres[second] =
                            Some(layout.centres[first].unwrap() + Vec2::from_angle(theta) * dist);
                    }
                }
                Constraint::OnCircle { centre, slots, range } => {
                    let radius = rng.range_f64(range.0, range.1);
                    let base = layout.centres[*centre].unwrap();
                    for &s in slots {
                        let theta = rng.range_f64(0.0, std::f64::consts::TAU);
                        layout.centres[s] = Some(base + Vec2::from_angle(theta) * radius);
                    }
                }
                Constraint::SquareCorners { slots, side } => {
                    let s = rng.range_f64(side.0, side.1);
                    let r0 = layout.slots[slots[0]].max_radius;
                    let lo = EDGE_MARGIN + r0;
                    let hi_x = layout.width - 1.0 - EDGE_MARGIN - r0 - s;
                    let hi_y = layout.height - 1.0 - EDGE_MARGIN - r0 - s;
                    if lo >= hi_x || lo >= hi_y {
                        continue 'attempt;
                    }
                    let x0 = rng.range_f64(lo, hi_x);
                    let y0 = rng.range_f64(lo, hi_y);
                    let corners = [
                        Vec2::new(x0, y0),
                        Vec2::new(x0 + s, y0),
                        Vec2::new(x0, y0 + s),
                        Vec2::new(x0 + s, y0 + s),
                    ];
                    for (&slot, &corner) in slots.iter().zip(corners.iter()) {
                        layout.centres[slot] = Some(corner);
                    }
                }
                Constraint::MirrorPairs { pairs } => {
                    let axis = rng.range_f64(layout.width * 0.3, layout.width * 0.7);
                    for &(first, second) in pairs {
                        let p = layout.centres[first].unwrap();
                        layout.centres[second] = Some(Vec2::new(2.0 * axis - p.x, p.y));
                    }
                }
                _ => {}
            }
        }

        if layout.centres.iter().any(|c| c.is_none()) {
            return Err(PlaceError::BadSpec("constraint graph leaves a slot unplaced".into()));
        }

        // validation-only constraints
        for c in constraints {
            let ok = match c {
                Constraint::OnSegment { a, b, k, t } => {
                    let pa = layout.centres[*a].unwrap();
                    let pb = layout.centres[*b].unwrap();
                    (pa + (pb - pa) * *t).dist(layout.centres[*k].unwrap()) <= DERIVED_TOL
                }
                Constraint::NoMidpoint { slots, margin } => {
                    let c0 = layout.centres[slots[0]].unwrap();
                    let c1 = layout.centres[slots[1]].unwrap();
                    let c2 = layout.centres[slots[2]].unwrap();
                    midpoint_deviation(c1, c2, c0) >= *margin
                        && midpoint_deviation(c0, c2, c1) >= *margin
                        && midpoint_deviation(c0, c1, c2) >= *margin
                }
                Constraint::EqualOffset { a, b, c: c2, d } => {
                    let o1 = layout.centres[*b].unwrap() - layout.centres[*a].unwrap();
                    let o2 = layout.centres[*d].unwrap() - layout.centres[*c2].unwrap();
                    (o1 - o2).norm() <= DERIVED_TOL
                }
                Constraint::OffsetsDiffer { a, b, c: c2, d, margin } => {
                    let o1 = layout.centres[*b].unwrap() - layout.centres[*a].unwrap();
                    let o2 = layout.centres[*d].unwrap() - layout.centres[*c2].unwrap();
                    (o1 - o2).norm() >= *margin
                }
                Constraint::PairDistance { pairs, .. } => {
                    let d0 = centre_dist(&layout, pairs[0].0, pairs[0].1);
                    pairs.iter().all(|&(x, y)| (centre_dist(&layout, x, y) - d0).abs() <= DERIVED_TOL)
                }
                Constraint::DistanceDiffers { a, b, margin } => {
                    (centre_dist(&layout, a.0, a.1) - centre_dist(&layout, b.0, b.1)).abs() >= *margin
                }
                Constraint::OnCircle { centre, slots, .. } => {
                    let d0 = centre_dist(&layout, *centre, slots[0]);
                    slots.iter().all(|&s| (centre_dist(&layout, *centre, s) - d0).abs() <= DERIVED_TOL)
                }
                Constraint::DistanceSpread { centre, slots, margin } => {
                    let ds: Vec<f64> = slots.iter().map(|&s| centre_dist(&layout, *centre, s)).collect();
                    let lo = ds.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = ds.iter().cloned().fold(0.0, f64::max);
                    hi - lo >= *margin
                }
                Constraint::SquareCorners { slots, .. } => {
                    let c = [
                        layout.centres[slots[0]].unwrap(),
                        layout.centres[slots[1]].unwrap(),
                        layout.centres[slots[2]].unwrap(),
                        layout.centres[slots[3]].unwrap(),
                    ];
                    square_deviation(&c) <= 1e-6
                }
                Constraint::NoSquare { slots, margin } => {
                    let c = [
                        layout.centres[slots[0]].unwrap(),
                        layout.centres[slots[1]].unwrap(),
                        layout.centres[slots[2]].unwrap(),
                        layout.centres[slots[3]].unwrap(),
                    ];
                    square_deviation(&c) >= *margin
                }
                Constraint::MirrorPairs { pairs } => {
                    mirror_deviation(
                        (layout.centres[pairs[0].0].unwrap(), layout.centres[pairs[0].1].unwrap()),
                        (layout.centres[pairs[1].0].unwrap(), layout.centres[pairs[1].1].unwrap()),
                    ) <= DERIVED_TOL
                }
                Constraint::NoMirror { slots, margin } => {
                    let c = [
                        layout.centres[slots[0]].unwrap(),
                        layout.centres[slots[1]].unwrap(),
                        layout.centres[slots[2]].unwrap(),
                        layout.centres[slots[3]].unwrap(),
                    ];
                    mirror_deviation_best(&c) >= *margin
                }
                _ => true,
            };
            if !ok {
                continue 'attempt;
            }
        }

        if !validate_pairwise(&layout, &declared_borders, &declared_contains, &extra_gaps) {
            continue 'attempt;
        }

        // assemble ground truth; contours dedup by identity
        let mut contours: Vec<Contour> = Vec::new();
        for spec in specs {
            if !contours.iter().any(|c| c.identity == spec.contour.identity) {
                contours.push(spec.contour.clone());
            }
        }
        let instances: Vec<ShapeInstance> = (0..n)
            .map(|i| ShapeInstance {
                identity: specs[i].contour.identity,
                centre: layout.centres[i].unwrap(),
                scale: specs[i].scale,
                rotation: specs[i].rotation,
            })
            .collect();
        let truth = GroundTruth {
            contours,
            instances,
            borders: declared_borders,
            contains: declared_contains,
        };
        if let Some(canvas) = finish(&truth) {
            return Ok(canvas);
        }
    }
    Err(PlaceError::Exhausted(MAX_PLACEMENT_ATTEMPTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canvas::outline_pixels;
    use crate::geom::point_in_polygon;

    fn spec(seed: u64, identity: u32, scale: f64) -> ShapeSpec {
        let mut rng = Rng::new(seed).derive_str("spec");
        let mut contour = Contour::from_rng(&mut rng, 6, identity).unwrap();
        contour.identity = identity;
        ShapeSpec { contour, scale, rotation: 0.0 }
    }

    #[test]
    fn unconstrained_placement_is_in_bounds() {
        let mut rng = Rng::new(9);
        let instances =
            place_nonoverlapping(&[spec(1, 0, 1.0)], &[], &mut rng, 128, 128).unwrap();
        assert_eq!(instances.len(), 1);
        let c = instances[0].centre;
        assert!(c.x > 0.0 && c.x < 128.0 && c.y > 0.0 && c.y < 128.0);
    }

    #[test]
    fn contains_constraint_passes_point_in_polygon_oracle() {
        let mut rng = Rng::new(11);
        let outer = spec(2, 0, 2.1);
        let inner = spec(3, 1, 0.5);
        let canvas = place_and_render(
            &[outer, inner],
            &[Constraint::Contains { outer: 0, inner: 1, touching: false }],
            &mut rng,
            128,
            128,
        )
        .unwrap();
        let outer_poly = canvas.truth.instance_polygon(0);
        let inner_poly = canvas.truth.instance_polygon(1);
        // oracle: every inner vertex strictly interior to the outer polygon
        for p in &inner_poly {
            assert!(point_in_polygon(*p, &outer_poly));
        }
        assert!(canvas.truth.contains.contains(&(0, 1)));
        assert!(canvas.truth.borders.is_empty());
    }

    #[test]
    fn borders_constraint_matches_pixel_distance_oracle() {
        let mut rng = Rng::new(13);
        let canvas = place_and_render(
            &[spec(4, 0, 1.0), spec(5, 1, 1.0)],
            &[Constraint::Borders { a: 0, b: 1 }],
            &mut rng,
            128,
            128,
        )
        .unwrap();
        // oracle: brute-force min Chebyshev distance over pixel pairs
        let a = outline_pixels(&canvas.truth.instance_polygon(0));
        let b = outline_pixels(&canvas.truth.instance_polygon(1));
        let mut best = i64::MAX;
        for &(ax, ay) in &a {
            for &(bx, by) in &b {
                best = best.min((ax - bx).abs().max((ay - by).abs()));
            }
        }
        assert_eq!(best, 1, "bordering threshold");
    }

    #[test]
    fn separation_holds_for_unrelated_pairs() {
        let mut rng = Rng::new(17);
        for round in 0..20 {
            let canvas = place_and_render(
                &[spec(round, 0, 1.0), spec(round + 100, 1, 1.0), spec(round + 200, 2, 1.0)],
                &[],
                &mut rng,
                128,
                128,
            )
            .unwrap();
            let polys: Vec<_> = (0..3).map(|i| canvas.truth.instance_polygon(i)).collect();
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let a = outline_pixels(&polys[i]);
                    let b = outline_pixels(&polys[j]);
                    let mut best = i64::MAX;
                    for &(ax, ay) in &a {
                        for &(bx, by) in &b {
                            best = best.min((ax - bx).abs().max((ay - by).abs()));
                        }
                    }
                    assert!(best >= 2, "round {round}: pair ({i},{j}) too close: {best}");
                }
            }
        }
    }

    #[test]
    fn equal_distance_pairs_are_exact() {
        let mut rng = Rng::new(23);
        let canvas = place_and_render(
            &[spec(31, 0, 0.7), spec(32, 1, 0.7), spec(33, 2, 0.7), spec(34, 3, 0.7)],
            &[Constraint::PairDistance { pairs: vec![(0, 1), (2, 3)], range: (30.0, 45.0) }],
            &mut rng,
            128,
            128,
        )
        .unwrap();
        let c = &canvas.truth.instances;
        let d1 = c[0].centre.dist(c[1].centre);
        let d2 = c[2].centre.dist(c[3].centre);
        assert!((d1 - d2).abs() < 1e-9);
    }

    #[test]
    fn derived_twice_is_a_bad_spec() {
        let mut rng = Rng::new(29);
        let err = place_nonoverlapping(
            &[spec(41, 0, 1.0), spec(42, 1, 1.0)],
            &[
                Constraint::Borders { a: 0, b: 1 },
                Constraint::Contains { outer: 0, inner: 1, touching: false },
            ],
            &mut rng,
            128,
            128,
        )
        .unwrap_err();
        assert!(matches!(err, PlaceError::BadSpec(_)));
    }
}
