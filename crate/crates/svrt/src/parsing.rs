//! Symbolic image parsings: extraction from ground truth, controlled
//! degradation emulating the legacy parser's error classes, the text
//! serialization, and vectorization for the boosting baseline.
//!
//! A parsing lists one `Shape(x, y, identity, scale)` record per shape plus
//! `borders(i, j)` / `contains(i, j)` relations, where indices follow record
//! order. Corrected parsings carry generation-centre coordinates, true
//! identities (equal iff the contours match up to a similarity transform)
//! and signed real-size scales, negative iff reflected.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::canvas::GroundTruth;
use crate::geom::polygon_centroid;
use crate::rng::Rng;
use thiserror::Error;

/// Sentinel filling absent shape slots in vectorized parsings.
pub const VECTOR_SENTINEL: f64 = -1000.0;

/// Pairwise centre distance under which shapes count as mutually close for
/// glitch injection.
pub const GLITCH_NEAR: f64 = 48.0;

#[derive(Debug, Error, PartialEq)]
pub enum ParsingError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("parsing has {len} shapes but the vector layout allows {max}")]
    TooManyShapes { len: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShapeRecord {
    pub x: f64,
    pub y: f64,
    pub identity: u32,
    pub scale: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Parsing {
    pub shapes: Vec<ShapeRecord>,
    /// Unordered bordering pairs, normalized to (lo, hi).
    pub borders: BTreeSet<(usize, usize)>,
    /// Directed containment pairs (container, containee).
    pub contains: BTreeSet<(usize, usize)>,
    /// Rotation angles, present only when extraction was asked for them.
    /// Not part of the text serialization.
    pub rotations: Option<Vec<f64>>,
}

impl Parsing {
    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Identity classes in record order of first appearance.
    pub fn identity_classes(&self) -> Vec<Vec<usize>> {
        let mut classes: Vec<(u32, Vec<usize>)> = Vec::new();
        for (idx, s) in self.shapes.iter().enumerate() {
            match classes.iter_mut().find(|(id, _)| *id == s.identity) {
                Some((_, v)) => v.push(idx),
                None => classes.push((s.identity, vec![idx])),
            }
        }
        classes.into_iter().map(|(_, v)| v).collect()
    }
}

/// Options for [`extract_parsing_opts`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ExtractOpts {
    /// Report the polygon centre of mass instead of the generation centre.
    pub centre_of_mass: bool,
    /// Attach rotation angles (excluded from default parsings).
    pub include_rotation: bool,
}

/// Corrected parsing straight from generator ground truth.
pub fn extract_parsing(truth: &GroundTruth) -> Parsing {
    extract_parsing_opts(truth, ExtractOpts::default())
}

pub fn extract_parsing_opts(truth: &GroundTruth, opts: ExtractOpts) -> Parsing {
    let shapes = truth
        .instances
        .iter()
        .enumerate()
        .map(|(idx, inst)| {
            let (x, y) = if opts.centre_of_mass {
                let c = polygon_centroid(&truth.instance_polygon(idx));
                (c.x, c.y)
            } else {
                (inst.centre.x, inst.centre.y)
            };
            ShapeRecord { x, y, identity: inst.identity, scale: inst.scale }
        })
        .collect();
    Parsing {
        shapes,
        borders: truth.borders.clone(),
        contains: truth.contains.clone(),
        rotations: opts.include_rotation.then(|| truth.instances.iter().map(|i| i.rotation).collect()),
    }
}

/// Which legacy parser error classes to emulate.
///
/// The all-off profile is the identity degradation. `centre_of_mass` acts at
/// extraction time (it needs geometry); see [`extract_parsing_opts`] and
/// [`legacy_parsing`].
#[derive(Clone, Debug, PartialEq)]
pub struct DegradationProfile {
    /// Drop scale signs and give reflected copies a fresh identity.
    pub reflection_blind: bool,
    /// Fresh identities for rotated/rescaled copies beyond the thresholds.
    pub transform_identity_split: bool,
    /// Rotation difference above which a copy splits, in degrees.
    pub rotation_split_deg: f64,
    /// Scale-ratio band inside which a rescaled copy keeps its identity.
    pub scale_split_band: (f64, f64),
    /// Divide scales by the largest magnitude within each identity class.
    pub normalize_scales: bool,
    /// Report centres of mass instead of generation centres.
    pub centre_of_mass: bool,
    /// Probability of injecting a spurious tiny shape when >= 3 shapes are
    /// mutually close.
    pub glitch_rate: f64,
}

impl DegradationProfile {
    pub fn none() -> Self {
        DegradationProfile {
            reflection_blind: false,
            transform_identity_split: false,
            rotation_split_deg: 5.0,
            scale_split_band: (0.95, 1.05),
            normalize_scales: false,
            centre_of_mass: false,
            glitch_rate: 0.0,
        }
    }

    /// Reflection blindness as the legacy parser exhibited it. The legacy
    /// parser only ever reported normalized scales, so this preset
    /// normalizes too; sign information is unrecoverable either way.
    pub fn reflection_blind() -> Self {
        DegradationProfile { reflection_blind: true, normalize_scales: true, ..Self::none() }
    }

    /// Full emulation of the legacy parser's error classes.
    pub fn sasquatch() -> Self {
        DegradationProfile {
            reflection_blind: true,
            transform_identity_split: true,
            normalize_scales: true,
            centre_of_mass: true,
            glitch_rate: 0.1,
            ..Self::none()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "none" | "corrected" => Some(Self::none()),
            "reflection_blind" => Some(Self::reflection_blind()),
            "sasquatch" | "legacy" => Some(Self::sasquatch()),
            _ => None,
        }
    }

    fn is_identity(&self) -> bool {
        !self.reflection_blind
            && !self.transform_identity_split
            && !self.normalize_scales
            && self.glitch_rate == 0.0
    }
}

/// Emulate legacy parsing errors on a corrected parsing.
pub fn degrade_parsing(p: &Parsing, profile: &DegradationProfile, rng: &mut Rng) -> Parsing {
    if profile.is_identity() {
        return p.clone();
    }
    let mut out = p.clone();
    let mut next_id = out.shapes.iter().map(|s| s.identity + 1).max().unwrap_or(0);

    if profile.reflection_blind {
        // reflected members of each class split off into one fresh class
        let classes = out.identity_classes();
        for class in classes {
            let negatives: Vec<usize> =
                class.iter().copied().filter(|&i| out.shapes[i].scale < 0.0).collect();
            if !negatives.is_empty() && negatives.len() < class.len() {
                for &i in &negatives {
                    out.shapes[i].identity = next_id;
                }
                next_id += 1;
            }
        }
        for s in out.shapes.iter_mut() {
            s.scale = s.scale.abs();
        }
    }

    if profile.transform_identity_split {
        let classes = out.identity_classes();
        let rot = out.rotations.clone();
        for class in classes {
            if class.len() < 2 {
                continue;
            }
            let anchor = class[0];
            for &i in &class[1..] {
                let ratio = out.shapes[i].scale.abs() / out.shapes[anchor].scale.abs();
                let rescaled =
                    ratio < profile.scale_split_band.0 || ratio > profile.scale_split_band.1;
                let rotated = rot.as_ref().is_some_and(|r| {
                    let d = (r[i] - r[anchor]).rem_euclid(std::f64::consts::TAU);
                    let d = d.min(std::f64::consts::TAU - d);
                    d.to_degrees() > profile.rotation_split_deg
                });
                if rescaled || rotated {
                    out.shapes[i].identity = next_id;
                    next_id += 1;
                }
            }
        }
    }

    if profile.glitch_rate > 0.0 {
        if let Some(cluster) = close_triple(&out) {
            if rng.chance(profile.glitch_rate) {
                let cx = cluster.iter().map(|&i| out.shapes[i].x).sum::<f64>() / 3.0;
                let cy = cluster.iter().map(|&i| out.shapes[i].y).sum::<f64>() / 3.0;
                let scale = rng.range_f64(0.1, 0.2);
                out.shapes.push(ShapeRecord { x: cx, y: cy, identity: next_id, scale });
                if let Some(r) = out.rotations.as_mut() {
                    r.push(0.0);
                }
            }
        }
    }

    if profile.normalize_scales {
        let classes = out.identity_classes();
        for class in classes {
            let max_mag =
                class.iter().map(|&i| out.shapes[i].scale.abs()).fold(0.0_f64, f64::max);
            if max_mag > 0.0 {
                for &i in &class {
                    out.shapes[i].scale /= max_mag;
                }
            }
        }
    }

    out
}

/// Extraction plus degradation in one step, the way the legacy pipeline ran.
pub fn legacy_parsing(truth: &GroundTruth, profile: &DegradationProfile, rng: &mut Rng) -> Parsing {
    let extracted = extract_parsing_opts(
        truth,
        ExtractOpts { centre_of_mass: profile.centre_of_mass, include_rotation: true },
    );
    let mut out = degrade_parsing(&extracted, profile, rng);
    out.rotations = None;
    out
}

/// First triple of mutually close shapes, in index order.
fn close_triple(p: &Parsing) -> Option<[usize; 3]> {
    let n = p.shapes.len();
    let d = |i: usize, j: usize| {
        let (a, b) = (&p.shapes[i], &p.shapes[j]);
        ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
    };
    for i in 0..n {
        for j in (i + 1)..n {
            if d(i, j) > GLITCH_NEAR {
                continue;
            }
            for k in (j + 1)..n {
                if d(i, k) <= GLITCH_NEAR && d(j, k) <= GLITCH_NEAR {
                    return Some([i, j, k]);
                }
            }
        }
    }
    None
}

fn fmt_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return "0.000000".into();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).clamp(0, 12) as usize;
    format!("{:.*}", decimals, x)
}

/// Render the parsing file grammar: one statement per line, LF endings.
pub fn serialize(p: &Parsing) -> String {
    let mut out = String::new();
    for s in &p.shapes {
        let _ = writeln!(
            out,
            "Shape({}, {}, {}, {})",
            fmt_sig6(s.x),
            fmt_sig6(s.y),
            s.identity,
            fmt_sig6(s.scale)
        );
    }
    for &(a, b) in &p.borders {
        let _ = writeln!(out, "borders({a}, {b})");
    }
    for &(a, b) in &p.contains {
        let _ = writeln!(out, "contains({a}, {b})");
    }
    out
}

struct LineParser<'a> {
    text: &'a str,
    line_no: usize,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ParsingError> {
        Err(ParsingError::Syntax { line: self.line_no, col: self.pos + 1, msg: msg.into() })
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(' ') || self.rest().starts_with('\t') {
            self.pos += 1;
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), ParsingError> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            self.err(format!("expected `{token}`"))
        }
    }

    fn number(&mut self) -> Result<f64, ParsingError> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        let mut end = self.pos;
        while end < bytes.len() {
            let c = bytes[end] as char;
            if c.is_ascii_digit() || matches!(c, '+' | '-' | '.' | 'e' | 'E') {
                end += 1;
            } else {
                break;
            }
        }
        if end == start {
            return self.err("expected a number");
        }
        let token = &self.text[start..end];
        match token.parse::<f64>() {
            Ok(v) => {
                self.pos = end;
                Ok(v)
            }
            Err(_) => self.err(format!("malformed number `{token}`")),
        }
    }

    fn integer(&mut self) -> Result<i64, ParsingError> {
        let v = self.number()?;
        if v.fract() != 0.0 {
            return self.err("expected an integer");
        }
        Ok(v as i64)
    }

    fn end(&mut self) -> Result<(), ParsingError> {
        self.skip_ws();
        if self.rest().is_empty() || self.rest().starts_with('#') {
            Ok(())
        } else {
            self.err("trailing characters")
        }
    }
}

/// Parse the parsing file grammar. Reports line and column on malformed
/// input, out-of-range indices, reflexive relations and containment cycles.
pub fn parse(text: &str) -> Result<Parsing, ParsingError> {
    let mut shapes = Vec::new();
    // relation lines remember their position for late index validation
    let mut borders: Vec<(usize, usize, usize)> = Vec::new();
    let mut contains: Vec<(usize, usize, usize)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let mut lp = LineParser { text: raw, line_no, pos: 0 };
        lp.skip_ws();
        if lp.rest().is_empty() || lp.rest().starts_with('#') {
            continue;
        }
        if lp.rest().starts_with("Shape") {
            lp.expect("Shape")?;
            lp.expect("(")?;
            let x = lp.number()?;
            lp.expect(",")?;
            let y = lp.number()?;
            lp.expect(",")?;
            let identity = lp.integer()?;
            lp.expect(",")?;
            let scale = lp.number()?;
            lp.expect(")")?;
            lp.end()?;
            if identity < 0 {
                return lp.err("shape identity must be non-negative");
            }
            if scale == 0.0 {
                return lp.err("scale magnitude must be positive");
            }
            shapes.push(ShapeRecord { x, y, identity: identity as u32, scale });
        } else if lp.rest().starts_with("borders") || lp.rest().starts_with("contains") {
            let is_borders = lp.rest().starts_with("borders");
            lp.expect(if is_borders { "borders" } else { "contains" })?;
            lp.expect("(")?;
            let a = lp.integer()?;
            lp.expect(",")?;
            let b = lp.integer()?;
            lp.expect(")")?;
            lp.end()?;
            if a < 0 || b < 0 {
                return lp.err("shape index must be non-negative");
            }
            let (a, b) = (a as usize, b as usize);
            if a == b {
                return lp.err("relation must connect two distinct shapes");
            }
            if is_borders {
                borders.push((a.min(b), a.max(b), line_no));
            } else {
                contains.push((a, b, line_no));
            }
        } else {
            return lp.err("expected `Shape`, `borders` or `contains`");
        }
    }

    let n = shapes.len();
    let index_err = |line: usize, i: usize| ParsingError::Syntax {
        line,
        col: 1,
        msg: format!("shape index {i} out of range (only {n} shapes)"),
    };
    let mut border_set = BTreeSet::new();
    for (a, b, line) in borders {
        if a >= n || b >= n {
            return Err(index_err(line, a.max(b)));
        }
        border_set.insert((a, b));
    }
    let mut contain_set = BTreeSet::new();
    for (a, b, line) in contains {
        if a >= n || b >= n {
            return Err(index_err(line, a.max(b)));
        }
        if contain_set.contains(&(b, a)) {
            return Err(ParsingError::Syntax {
                line,
                col: 1,
                msg: format!("contains({a}, {b}) contradicts contains({b}, {a})"),
            });
        }
        contain_set.insert((a, b));
    }
    Ok(Parsing { shapes, borders: border_set, contains: contain_set, rotations: None })
}

/// Fixed-length numeric encoding: `max_shapes` slots of (x, y, identity as
/// small integer, scale), sentinel-padded, followed by flattened borders and
/// contains incidence bits over `max_shapes^2` pairs each.
///
/// Shape order is kept as-is; permuting records permutes the vector.
pub fn vectorize(p: &Parsing, max_shapes: usize) -> Result<Vec<f64>, ParsingError> {
    if p.shapes.len() > max_shapes {
        return Err(ParsingError::TooManyShapes { len: p.shapes.len(), max: max_shapes });
    }
    let mut out = Vec::with_capacity(4 * max_shapes + 2 * max_shapes * max_shapes);
    let mut small_ids: Vec<u32> = Vec::new();
    for s in &p.shapes {
        let small = match small_ids.iter().position(|&id| id == s.identity) {
            Some(k) => k,
            None => {
                small_ids.push(s.identity);
                small_ids.len() - 1
            }
        };
        out.extend_from_slice(&[s.x, s.y, small as f64, s.scale]);
    }
    for _ in p.shapes.len()..max_shapes {
        out.extend_from_slice(&[VECTOR_SENTINEL; 4]);
    }
    for i in 0..max_shapes {
        for j in 0..max_shapes {
            out.push(if p.borders.contains(&(i, j)) { 1.0 } else { 0.0 });
        }
    }
    for i in 0..max_shapes {
        for j in 0..max_shapes {
            out.push(if p.contains.contains(&(i, j)) { 1.0 } else { 0.0 });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_example, Category};

    fn quantize(x: f64) -> f64 {
        fmt_sig6(x).parse().unwrap()
    }

    #[test]
    fn reflected_pair_keeps_identity_with_opposite_sign() {
        let mut rng = Rng::new(3).derive(20);
        let canvas = generate_example(20, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        assert_eq!(p.shapes[0].identity, p.shapes[1].identity);
        assert!(p.shapes[0].scale * p.shapes[1].scale < 0.0);
    }

    #[test]
    fn empty_truth_gives_empty_parsing() {
        let p = extract_parsing(&GroundTruth::default());
        assert!(p.is_empty() && p.borders.is_empty() && p.contains.is_empty());
    }

    #[test]
    fn containment_layout_has_contains_and_no_borders() {
        let mut rng = Rng::new(5).derive(4);
        let canvas = generate_example(4, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        assert_eq!(p.contains.iter().copied().collect::<Vec<_>>(), vec![(0, 1)]);
        assert!(p.borders.is_empty());
        // oracle: all inner vertices strictly inside the outer polygon
        let outer = canvas.truth.instance_polygon(0);
        for v in canvas.truth.instance_polygon(1) {
            assert!(crate::geom::point_in_polygon(v, &outer));
        }
    }

    #[test]
    fn all_off_profile_is_bit_exact_identity() {
        let mut rng = Rng::new(9).derive(2);
        let canvas = generate_example(2, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        let mut drng = Rng::new(1);
        assert_eq!(degrade_parsing(&p, &DegradationProfile::none(), &mut drng), p);
    }

    #[test]
    fn reflection_blind_splits_reflected_identities() {
        let mut rng = Rng::new(3).derive(20);
        let canvas = generate_example(20, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        let mut drng = Rng::new(1);
        let d = degrade_parsing(&p, &DegradationProfile::reflection_blind(), &mut drng);
        assert_ne!(d.shapes[0].identity, d.shapes[1].identity);
        assert!(d.shapes.iter().all(|s| s.scale > 0.0));
    }

    #[test]
    fn normalization_sets_class_max_to_one() {
        let mut rng = Rng::new(11).derive(19);
        let canvas = generate_example(19, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        let profile = DegradationProfile { normalize_scales: true, ..DegradationProfile::none() };
        let mut drng = Rng::new(2);
        let d = degrade_parsing(&p, &profile, &mut drng);
        for class in d.identity_classes() {
            let max = class.iter().map(|&i| d.shapes[i].scale.abs()).fold(0.0_f64, f64::max);
            assert_eq!(max, 1.0);
        }
    }

    #[test]
    fn transform_split_separates_rescaled_copies() {
        let mut rng = Rng::new(13).derive(21);
        let canvas = generate_example(21, Category::Positive, &mut rng).unwrap();
        let p = extract_parsing(&canvas.truth);
        let profile =
            DegradationProfile { transform_identity_split: true, ..DegradationProfile::none() };
        let mut drng = Rng::new(3);
        let d = degrade_parsing(&p, &profile, &mut drng);
        assert_ne!(d.shapes[0].identity, d.shapes[1].identity);
    }

    #[test]
    fn glitch_rate_one_appends_a_shape_to_a_close_cluster() {
        let p = Parsing {
            shapes: vec![
                ShapeRecord { x: 40.0, y: 40.0, identity: 0, scale: 1.0 },
                ShapeRecord { x: 60.0, y: 42.0, identity: 1, scale: 1.0 },
                ShapeRecord { x: 50.0, y: 58.0, identity: 2, scale: 1.0 },
            ],
            ..Default::default()
        };
        let profile = DegradationProfile { glitch_rate: 1.0, ..DegradationProfile::none() };
        let mut drng = Rng::new(4);
        let d = degrade_parsing(&p, &profile, &mut drng);
        assert_eq!(d.len(), 4);
        assert_eq!(d.shapes[3].identity, 3);
        assert!(d.shapes[3].scale < 0.3);
    }

    #[test]
    fn corrected_identity_implies_similarity_transform() {
        // equal identities must mean one contour maps onto the other under
        // the recoverable similarity transform, to within 1e-6 relative
        // vertex error
        for (problem, seed) in [(21u32, 3u64), (16, 5), (20, 9)] {
            let mut rng = Rng::new(seed).derive(problem as u64);
            let canvas = generate_example(problem, Category::Positive, &mut rng).unwrap();
            let t = &canvas.truth;
            for i in 0..t.instances.len() {
                for j in (i + 1)..t.instances.len() {
                    if t.instances[i].identity != t.instances[j].identity {
                        continue;
                    }
                    let poly_j = t.instance_polygon(j);
                    // map local contour points through instance j's transform
                    let base = t.contour_for(t.instances[j].identity).unwrap();
                    let mapped = t.instances[j].similarity().apply_all(&base.points);
                    let scale = t.instances[j].scale.abs() * 16.0;
                    for (a, b) in mapped.iter().zip(poly_j.iter()) {
                        assert!(a.dist(*b) / scale < 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn grammar_example_round_trips() {
        let p = parse("Shape(10.0, 20.0, 3, -1.5)\n").unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.shapes[0].identity, 3);
        assert!(p.shapes[0].scale < 0.0);
        assert_eq!(p.shapes[0].scale.abs(), 1.5);
    }

    #[test]
    fn out_of_range_relation_index_is_a_syntax_error() {
        let text = "Shape(1.0, 1.0, 0, 1.0)\nShape(9.0, 9.0, 1, 1.0)\nborders(0, 5)\n";
        match parse(text) {
            Err(ParsingError::Syntax { line: 3, .. }) => {}
            other => panic!("expected syntax error on line 3, got {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_position() {
        match parse("Shape(1.0, oops, 0, 1.0)\n") {
            Err(ParsingError::Syntax { line: 1, col, .. }) => assert!(col > 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn antisymmetric_containment_is_enforced() {
        let text = "Shape(1.0, 1.0, 0, 1.0)\nShape(9.0, 9.0, 1, 1.0)\ncontains(0, 1)\ncontains(1, 0)\n";
        assert!(matches!(parse(text), Err(ParsingError::Syntax { line: 4, .. })));
    }

    #[test]
    fn vectorize_empty_is_sentinels_plus_zero_bits() {
        let v = vectorize(&Parsing::default(), 2).unwrap();
        assert_eq!(v.len(), 16);
        assert_eq!(&v[..8], &[VECTOR_SENTINEL; 8]);
        assert!(v[8..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn vectorize_single_shape_layout() {
        let p = Parsing {
            shapes: vec![ShapeRecord { x: 10.0, y: 20.0, identity: 7, scale: 1.0 }],
            ..Default::default()
        };
        let v = vectorize(&p, 2).unwrap();
        assert_eq!(&v[..4], &[10.0, 20.0, 0.0, 1.0]);
        assert_eq!(&v[4..8], &[VECTOR_SENTINEL; 4]);
    }

    #[test]
    fn vectorize_is_order_sensitive() {
        let a = ShapeRecord { x: 10.0, y: 20.0, identity: 0, scale: 1.0 };
        let b = ShapeRecord { x: 30.0, y: 40.0, identity: 1, scale: 2.0 };
        let p1 = Parsing { shapes: vec![a, b], ..Default::default() };
        let p2 = Parsing { shapes: vec![b, a], ..Default::default() };
        assert_ne!(vectorize(&p1, 2).unwrap(), vectorize(&p2, 2).unwrap());
    }

    #[test]
    fn vectorize_rejects_overflow() {
        let p = Parsing {
            shapes: vec![ShapeRecord { x: 0.0, y: 0.0, identity: 0, scale: 1.0 }; 3],
            ..Default::default()
        };
        assert_eq!(vectorize(&p, 2), Err(ParsingError::TooManyShapes { len: 3, max: 2 }));
    }

    proptest::proptest! {
        #[test]
        fn serialization_round_trips(
            n in 0usize..5,
            coords in proptest::collection::vec(-400.0f64..400.0, 10),
            scales in proptest::collection::vec(0.05f64..4.0, 5),
            signs in proptest::collection::vec(proptest::bool::ANY, 5),
            rel in proptest::bool::ANY,
        ) {
            let shapes: Vec<ShapeRecord> = (0..n)
                .map(|i| ShapeRecord {
                    x: quantize(coords[2 * i]),
                    y: quantize(coords[2 * i + 1]),
                    identity: i as u32 % 3,
                    scale: quantize(if signs[i] { scales[i] } else { -scales[i] }),
                })
                .collect();
            let mut p = Parsing { shapes, ..Default::default() };
            if rel && n >= 2 {
                p.borders.insert((0, 1));
                if n >= 3 {
                    p.contains.insert((2, 0));
                }
            }
            let text = serialize(&p);
            let back = parse(&text).unwrap();
            proptest::prop_assert_eq!(&back, &p);
            // serializer output is a fixpoint of parse . serialize
            proptest::prop_assert_eq!(serialize(&back), text);
        }
    }
}
