//! Program synthesis: enumerate candidate sketches, rank by description
//! length, verify against every training parsing, return the cheapest
//! fitting program.
//!
//! Sketches are generated from structure the training parsings agree on:
//! the identity partition and relation sets come over verbatim, scale
//! expressions reuse one magnitude latent per identity class (with a sign
//! pattern) when the data supports it, and coordinate expressions try, per
//! component and from cheap to dear: shared constants, references to
//! another slot, midpoints, constant offsets, shared-latent offsets and
//! vertical-mirror pairs, before falling back to a fresh latent. Every
//! candidate is re-verified by the fit solver, so detectors only propose.
//! Iterative deepening walks the candidates in 4-bit cost layers.

use std::time::Instant;

use super::dsl::{IdExpr, LatentRole, LinExpr, Program, RelKind, Statement, Term};
use super::fit::{fits_all, FitConfig};
use crate::parsing::Parsing;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no program within budget fits all training parsings")]
    NoProgramFound,
    #[error(transparent)]
    Dsl(#[from] super::dsl::DslError),
}

#[derive(Clone, Debug)]
pub struct Budget {
    pub max_cost_bits: f64,
    pub per_fit_time_limit: std::time::Duration,
    pub wall_clock: std::time::Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_cost_bits: 512.0,
            per_fit_time_limit: std::time::Duration::from_secs(1),
            wall_clock: std::time::Duration::from_secs(120),
        }
    }
}

/// One enumerated sketch, for search-frontier inspection.
#[derive(Clone, Debug)]
pub struct FrontierEntry {
    pub cost_bits: f64,
    pub sexpr: String,
    pub fitted: bool,
}

/// Detection tolerances: half the fit tolerances, so proposed structure
/// always re-verifies.
fn detect_pos_tol(cfg: &FitConfig) -> f64 {
    cfg.eps_pos * 0.5
}

fn detect_scale_tol(cfg: &FitConfig) -> f64 {
    cfg.eps_scale * 0.5
}

pub fn synthesize(
    parsings: &[Parsing],
    budget: &Budget,
    cfg: &FitConfig,
) -> Result<Program, SynthError> {
    synthesize_with_log(parsings, budget, cfg).map(|(p, _)| p)
}

pub fn synthesize_with_log(
    parsings: &[Parsing],
    budget: &Budget,
    cfg: &FitConfig,
) -> Result<(Program, Vec<FrontierEntry>), SynthError> {
    let start = Instant::now();
    let mut log = Vec::new();
    let candidates = match enumerate_candidates(parsings, cfg) {
        Some(c) => c,
        None => return Err(SynthError::NoProgramFound),
    };

    let mut ranked: Vec<(f64, String, Program)> = candidates
        .into_iter()
        .map(|p| (p.cost_bits(), p.sexpr(), p))
        .filter(|(c, _, _)| *c <= budget.max_cost_bits)
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    ranked.dedup_by(|a, b| a.1 == b.1);

    let fit_cfg = FitConfig { time_limit: budget.per_fit_time_limit, ..cfg.clone() };
    // iterative deepening over 4-bit layers of the ranked frontier
    let mut layer = 0.0f64;
    let mut idx = 0usize;
    while idx < ranked.len() {
        layer += 4.0;
        while idx < ranked.len() && ranked[idx].0 <= layer {
            let (cost, sexpr, program) = &ranked[idx];
            idx += 1;
            if start.elapsed() > budget.wall_clock {
                return Err(SynthError::NoProgramFound);
            }
            let ok = fits_all(program, parsings, &fit_cfg)?.sat;
            log.push(FrontierEntry { cost_bits: *cost, sexpr: sexpr.clone(), fitted: ok });
            if ok {
                return Ok((program.clone(), log));
            }
        }
    }
    Err(SynthError::NoProgramFound)
}

// ---------------------------------------------------------------------------
// Candidate enumeration
// ---------------------------------------------------------------------------

/// Per-slot, per-component coordinate structure.
#[derive(Clone, Debug, PartialEq)]
enum CoordRule {
    Free,
    Const(f64),
    /// Equal to the same component of another slot.
    Ref(usize),
    /// Midpoint of two other slots.
    Mid(usize, usize),
    /// Another slot's component plus a cross-image constant.
    RefPlusConst(usize, f64),
    /// Another slot's component plus a shared per-image latent (group id).
    RefPlusGroup(usize, usize),
    /// Vertical mirror: `2 * axis - base`, axis is a shared latent (group).
    Mirror(usize, usize),
}

/// Scale structure for one identity class.
#[derive(Clone, Debug, PartialEq)]
enum ScaleRule {
    /// One cross-image constant magnitude with a per-slot sign pattern.
    ConstMag(f64, Vec<f64>),
    /// One per-image magnitude latent with a per-slot sign pattern.
    SharedMag(Vec<f64>),
    /// Independent per-slot values (sign fixed when consistent).
    Free(Vec<Option<f64>>),
}

struct Observation<'a> {
    parsings: &'a [Parsing],
    n: usize,
}

impl<'a> Observation<'a> {
    fn comp(&self, img: usize, slot: usize, axis: usize) -> f64 {
        let s = &self.parsings[img].shapes[slot];
        if axis == 0 {
            s.x
        } else {
            s.y
        }
    }

    fn scale(&self, img: usize, slot: usize) -> f64 {
        self.parsings[img].shapes[slot].scale
    }

    fn images(&self) -> usize {
        self.parsings.len()
    }
}

fn enumerate_candidates(parsings: &[Parsing], cfg: &FitConfig) -> Option<Vec<Program>> {
    if parsings.is_empty() {
        return None;
    }
    let n = parsings[0].shapes.len();
    if parsings.iter().any(|p| p.shapes.len() != n) {
        return None;
    }
    // identity partition must agree across images
    let partition = canonical_partition(&parsings[0]);
    if parsings.iter().any(|p| canonical_partition(p) != partition) {
        return None;
    }
    // relation sets must agree across images
    let borders = parsings[0].borders.clone();
    let contains = parsings[0].contains.clone();
    if parsings.iter().any(|p| p.borders != borders || p.contains != contains) {
        return None;
    }

    let obs = Observation { parsings, n };
    let scale_best = detect_scales(&obs, &partition, cfg, true);
    let scale_free = detect_scales(&obs, &partition, cfg, false);
    let sharing = detect_scale_sharing(&obs, cfg);
    let no_sharing: Vec<Option<usize>> = vec![None; n];
    let coords_structured = detect_coords(&obs, cfg, CoordMode::Structured);
    let coords_no_mirror = detect_coords(&obs, cfg, CoordMode::NoMirror);
    let coords_free = detect_coords(&obs, cfg, CoordMode::Verbatim);

    let mut out = Vec::new();
    for coords in [&coords_structured, &coords_no_mirror, &coords_free] {
        for (scales, share) in [(&scale_best, &sharing), (&scale_free, &no_sharing)] {
            out.push(assemble(&partition, &borders, &contains, coords, scales, share, n));
        }
    }
    Some(out)
}

/// Partition as sorted blocks of sorted indices.
fn canonical_partition(p: &Parsing) -> Vec<Vec<usize>> {
    let mut blocks = p.identity_classes();
    for b in blocks.iter_mut() {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

fn detect_scales(
    obs: &Observation,
    partition: &[Vec<usize>],
    cfg: &FitConfig,
    structured: bool,
) -> Vec<ScaleRule> {
    let tol = detect_scale_tol(cfg);
    let mut rules = Vec::new();
    for class in partition {
        let signs: Option<Vec<f64>> = consistent_signs(obs, class);
        if structured && class.len() > 1 {
            if let Some(signs) = &signs {
                // within-image equal magnitudes?
                let within_equal = (0..obs.images()).all(|img| {
                    let mags: Vec<f64> =
                        class.iter().map(|&s| obs.scale(img, s).abs()).collect();
                    mags.windows(2).all(|w| (w[0] - w[1]).abs() <= tol)
                });
                if within_equal {
                    let per_image: Vec<f64> =
                        (0..obs.images()).map(|img| obs.scale(img, class[0]).abs()).collect();
                    let spread = per_image.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                        - per_image.iter().cloned().fold(f64::INFINITY, f64::min);
                    if spread <= tol {
                        rules.push(ScaleRule::ConstMag(mean(&per_image), signs.clone()));
                        continue;
                    }
                    rules.push(ScaleRule::SharedMag(signs.clone()));
                    continue;
                }
            }
        }
        // per-slot free values; sign fixed when consistent across images
        let per_slot: Vec<Option<f64>> = class
            .iter()
            .map(|&s| {
                let all_pos = (0..obs.images()).all(|img| obs.scale(img, s) > 0.0);
                let all_neg = (0..obs.images()).all(|img| obs.scale(img, s) < 0.0);
                if all_pos {
                    Some(1.0)
                } else if all_neg {
                    Some(-1.0)
                } else {
                    None
                }
            })
            .collect();
        if structured && class.len() == 1 {
            // singleton classes: a constant beats a latent when the value
            // holds across images
            let values: Vec<f64> =
                (0..obs.images()).map(|img| obs.scale(img, class[0])).collect();
            if spread(&values) <= tol {
                rules.push(ScaleRule::ConstMag(mean(&values).abs(), vec![values[0].signum()]));
                continue;
            }
        }
        rules.push(ScaleRule::Free(per_slot));
    }
    rules
}

/// Cross-class sharing: slots whose signed scales agree across every image
/// reuse one expression. Keyed by the earliest slot of each value profile.
fn detect_scale_sharing(obs: &Observation, cfg: &FitConfig) -> Vec<Option<usize>> {
    let tol = detect_scale_tol(cfg);
    let n = obs.n;
    let mut share: Vec<Option<usize>> = vec![None; n];
    for slot in 1..n {
        for earlier in 0..slot {
            if share[earlier].is_some() {
                continue; // point at profile roots only
            }
            let same_class = obs.parsings[0].shapes[earlier].identity
                == obs.parsings[0].shapes[slot].identity;
            if same_class {
                continue; // within-class structure is handled per class
            }
            let equal = (0..obs.images())
                .all(|img| (obs.scale(img, slot) - obs.scale(img, earlier)).abs() <= tol);
            if equal {
                share[slot] = Some(earlier);
                break;
            }
        }
    }
    share
}

fn consistent_signs(obs: &Observation, class: &[usize]) -> Option<Vec<f64>> {
    let mut signs = Vec::with_capacity(class.len());
    for &slot in class {
        let first = obs.scale(0, slot) > 0.0;
        if (1..obs.images()).any(|img| (obs.scale(img, slot) > 0.0) != first) {
            return None;
        }
        signs.push(if first { 1.0 } else { -1.0 });
    }
    Some(signs)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[derive(Clone, Copy, PartialEq)]
enum CoordMode {
    Structured,
    /// Structured but without the mirror detector, which can shadow a
    /// cheaper shared-offset decomposition.
    NoMirror,
    /// Every component a fresh latent (the verbatim sketch).
    Verbatim,
}

/// Coordinate rules per (slot, axis).
fn detect_coords(obs: &Observation, cfg: &FitConfig, mode: CoordMode) -> Vec<[CoordRule; 2]> {
    let n = obs.n;
    let tol = detect_pos_tol(cfg);
    let mut rules: Vec<[CoordRule; 2]> = vec![[CoordRule::Free, CoordRule::Free]; n];
    if mode == CoordMode::Verbatim {
        return rules;
    }
    // groups of shared per-image offset values; groups may be reused by any
    // later component whose per-image values match
    let mut groups: Vec<Vec<f64>> = Vec::new();
    // slots referenced as a base stay free
    let mut locked_free: Vec<bool> = vec![false; n];
    let mut derived: Vec<bool> = vec![false; n];

    let images = obs.images();
    for slot in 0..n {
        if locked_free[slot] {
            continue;
        }
        let mut slot_derived = false;
        let mut axis = 0;
        while axis < 2 {
            let values: Vec<f64> = (0..images).map(|img| obs.comp(img, slot, axis)).collect();
            let usable =
                |other: usize, derived: &[bool]| other != slot && !derived[other];

            // 1. cross-image constant
            if spread(&values) <= tol {
                rules[slot][axis] = CoordRule::Const(mean(&values));
                slot_derived = true;
                axis += 1;
                continue;
            }
            // 2. equal to another slot's component
            if let Some(base) = (0..n).filter(|&o| usable(o, &derived)).find(|&o| {
                (0..images).all(|img| (obs.comp(img, o, axis) - values[img]).abs() <= tol)
            }) {
                rules[slot][axis] = CoordRule::Ref(base);
                locked_free[base] = true;
                slot_derived = true;
                axis += 1;
                continue;
            }
            // 3. midpoint of two other slots
            if let Some((i, j)) = find_midpoint(obs, slot, tol, &derived) {
                rules[slot][axis] = CoordRule::Mid(i, j);
                locked_free[i] = true;
                locked_free[j] = true;
                slot_derived = true;
                axis += 1;
                continue;
            }
            // 4. constant offset from another slot
            if let Some((base, delta)) = (0..n).filter(|&o| usable(o, &derived)).find_map(|o| {
                let diffs: Vec<f64> =
                    (0..images).map(|img| values[img] - obs.comp(img, o, axis)).collect();
                (spread(&diffs) <= tol).then(|| (o, mean(&diffs)))
            }) {
                rules[slot][axis] = CoordRule::RefPlusConst(base, delta);
                locked_free[base] = true;
                slot_derived = true;
                axis += 1;
                continue;
            }
            // 5. offset matching an existing shared group
            let mut matched = false;
            'outer: for base in (0..n).filter(|&o| usable(o, &derived)) {
                let diffs: Vec<f64> =
                    (0..images).map(|img| values[img] - obs.comp(img, base, axis)).collect();
                for (g, gv) in groups.iter().enumerate() {
                    if gv.iter().zip(diffs.iter()).all(|(a, b)| (a - b).abs() <= tol) {
                        rules[slot][axis] = CoordRule::RefPlusGroup(base, g);
                        locked_free[base] = true;
                        matched = true;
                        slot_derived = true;
                        break 'outer;
                    }
                }
            }
            if matched {
                axis += 1;
                continue;
            }
            // 6. vertical mirror (x axis only): shared axis latent
            if axis == 0 && mode == CoordMode::Structured {
                if let Some((base, g)) = find_mirror(obs, slot, tol, &derived, &mut groups) {
                    rules[slot][0] = CoordRule::Mirror(base, g);
                    locked_free[base] = true;
                    slot_derived = true;
                    // mirrored pairs share the y level
                    let y_match = (0..images).all(|img| {
                        (obs.comp(img, base, 1) - obs.comp(img, slot, 1)).abs() <= tol
                    });
                    if y_match {
                        rules[slot][1] = CoordRule::Ref(base);
                        break; // both axes assigned
                    }
                    axis += 1;
                    continue;
                }
            }
            // 7. seed a fresh offset group anchored at an earlier free slot
            if let Some(base) =
                (0..slot).find(|&o| usable(o, &derived) && !locked_free[o])
            {
                let diffs: Vec<f64> =
                    (0..images).map(|img| values[img] - obs.comp(img, base, axis)).collect();
                groups.push(diffs);
                rules[slot][axis] = CoordRule::RefPlusGroup(base, groups.len() - 1);
                locked_free[base] = true;
                slot_derived = true;
                axis += 1;
                continue;
            }
            // 8. fresh latent
            rules[slot][axis] = CoordRule::Free;
            axis += 1;
        }
        derived[slot] = slot_derived
            && !matches!((&rules[slot][0], &rules[slot][1]), (CoordRule::Free, CoordRule::Free));
    }
    rules
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn find_midpoint(
    obs: &Observation,
    slot: usize,
    tol: f64,
    derived: &[bool],
) -> Option<(usize, usize)> {
    let n = obs.n;
    let images = obs.images();
    for i in 0..n {
        if i == slot || derived[i] {
            continue;
        }
        for j in (i + 1)..n {
            if j == slot || derived[j] {
                continue;
            }
            // require the midpoint on both axes so the rule is geometric
            let ok = (0..images).all(|img| {
                let m0 = (obs.comp(img, i, 0) + obs.comp(img, j, 0)) / 2.0;
                let m1 = (obs.comp(img, i, 1) + obs.comp(img, j, 1)) / 2.0;
                (m0 - obs.comp(img, slot, 0)).abs() <= tol
                    && (m1 - obs.comp(img, slot, 1)).abs() <= tol
            });
            if ok {
                return Some((i, j));
            }
        }
    }
    None
}

/// Mirror partner for `slot`: prefer a base whose implied axis matches an
/// existing group, then fall back to seeding a new axis group.
fn find_mirror(
    obs: &Observation,
    slot: usize,
    tol: f64,
    derived: &[bool],
    groups: &mut Vec<Vec<f64>>,
) -> Option<(usize, usize)> {
    let images = obs.images();
    let mut seed: Option<(usize, Vec<f64>)> = None;
    for base in 0..obs.n {
        if base == slot || derived[base] {
            continue;
        }
        // mirrors share the y level
        let y_ok = (0..images)
            .all(|img| (obs.comp(img, base, 1) - obs.comp(img, slot, 1)).abs() <= 2.0 * tol);
        if !y_ok {
            continue;
        }
        let axes: Vec<f64> = (0..images)
            .map(|img| (obs.comp(img, base, 0) + obs.comp(img, slot, 0)) / 2.0)
            .collect();
        for (g, gv) in groups.iter().enumerate() {
            if gv.iter().zip(axes.iter()).all(|(a, b)| (a - b).abs() <= tol) {
                return Some((base, g));
            }
        }
        if seed.is_none() {
            seed = Some((base, axes));
        }
    }
    seed.map(|(base, axes)| {
        groups.push(axes);
        (base, groups.len() - 1)
    })
}

/// Build a complete program from the chosen structures.
fn assemble(
    partition: &[Vec<usize>],
    borders: &std::collections::BTreeSet<(usize, usize)>,
    contains: &std::collections::BTreeSet<(usize, usize)>,
    coords: &[[CoordRule; 2]],
    scales: &[ScaleRule],
    scale_share: &[Option<usize>],
    n: usize,
) -> Program {
    let mut prog = Program::new();
    prog.n_id_vars = partition.len();

    let mut id_var_of = vec![0usize; n];
    for (v, class) in partition.iter().enumerate() {
        for &s in class {
            id_var_of[s] = v;
        }
    }

    // coordinate expressions; groups map to latents on demand
    let mut group_latents: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut coord_exprs: Vec<[Option<LinExpr>; 2]> = vec![[None, None]; n];
    // resolve in dependency order: rules reference only non-derived slots,
    // which get their Free/Const exprs on first touch
    fn expr_for(
        slot: usize,
        axis: usize,
        coords: &[[CoordRule; 2]],
        coord_exprs: &mut Vec<[Option<LinExpr>; 2]>,
        prog: &mut Program,
        group_latents: &mut std::collections::BTreeMap<usize, usize>,
    ) -> LinExpr {
        if let Some(e) = &coord_exprs[slot][axis] {
            return e.clone();
        }
        let expr = match &coords[slot][axis] {
            CoordRule::Free => {
                let k = prog.latent_roles.len();
                prog.latent_roles.push(LatentRole::Coord);
                LinExpr::latent(k)
            }
            CoordRule::Const(v) => {
                let k = prog.const_values.len();
                prog.const_values.push(Some(*v));
                LinExpr::constant(k)
            }
            CoordRule::Ref(base) => expr_for(*base, axis, coords, coord_exprs, prog, group_latents),
            CoordRule::Mid(i, j) => {
                let a = expr_for(*i, axis, coords, coord_exprs, prog, group_latents);
                let b = expr_for(*j, axis, coords, coord_exprs, prog, group_latents);
                LinExpr::default().plus_scaled(&a, 0.5).plus_scaled(&b, 0.5)
            }
            CoordRule::RefPlusConst(base, delta) => {
                let b = expr_for(*base, axis, coords, coord_exprs, prog, group_latents);
                let k = prog.const_values.len();
                prog.const_values.push(Some(*delta));
                b.plus(&LinExpr::constant(k))
            }
            CoordRule::RefPlusGroup(base, g) => {
                let b = expr_for(*base, axis, coords, coord_exprs, prog, group_latents);
                let k = *group_latents.entry(*g).or_insert_with(|| {
                    let k = prog.latent_roles.len();
                    prog.latent_roles.push(LatentRole::Offset);
                    k
                });
                b.plus(&LinExpr::latent(k))
            }
            CoordRule::Mirror(base, g) => {
                let b = expr_for(*base, 0, coords, coord_exprs, prog, group_latents);
                let k = *group_latents.entry(*g).or_insert_with(|| {
                    let k = prog.latent_roles.len();
                    prog.latent_roles.push(LatentRole::Coord);
                    k
                });
                LinExpr::scaled(Term::Latent(k), 2.0).plus_scaled(&b, -1.0)
            }
        };
        coord_exprs[slot][axis] = Some(expr.clone());
        expr
    }

    // scale expressions, built in slot order so shared slots can reuse an
    // earlier expression instead of declaring an orphan latent
    let mut scale_exprs: Vec<Option<LinExpr>> = vec![None; n];
    let mut class_const: Vec<Option<usize>> = vec![None; partition.len()];
    let mut class_latent: Vec<Option<usize>> = vec![None; partition.len()];
    let is_free_rule = |slot: usize| matches!(scales[id_var_of[slot]], ScaleRule::Free(_));
    for slot in 0..n {
        let class_idx = id_var_of[slot];
        let pos_in_class = partition[class_idx].iter().position(|&s| s == slot).unwrap();
        let expr = match &scales[class_idx] {
            ScaleRule::ConstMag(v, signs) => {
                let k = match class_const[class_idx] {
                    Some(k) => k,
                    None => {
                        let k = prog.const_values.len();
                        prog.const_values.push(Some(*v));
                        class_const[class_idx] = Some(k);
                        k
                    }
                };
                LinExpr::scaled(Term::Const(k), signs[pos_in_class])
            }
            ScaleRule::SharedMag(signs) => {
                let k = match class_latent[class_idx] {
                    Some(k) => k,
                    None => {
                        let k = prog.latent_roles.len();
                        prog.latent_roles.push(LatentRole::ScaleMag);
                        class_latent[class_idx] = Some(k);
                        k
                    }
                };
                LinExpr::scaled(Term::Latent(k), signs[pos_in_class])
            }
            ScaleRule::Free(signs) => {
                match scale_share[slot].filter(|&root| is_free_rule(root)) {
                    Some(root) => scale_exprs[root].clone().expect("root precedes slot"),
                    None => {
                        let k = prog.latent_roles.len();
                        match signs[pos_in_class] {
                            Some(sign) => {
                                prog.latent_roles.push(LatentRole::ScaleMag);
                                LinExpr::scaled(Term::Latent(k), sign)
                            }
                            None => {
                                prog.latent_roles.push(LatentRole::ScaleFree);
                                LinExpr::latent(k)
                            }
                        }
                    }
                }
            }
        };
        scale_exprs[slot] = Some(expr);
    }

    for slot in 0..n {
        let x = expr_for(slot, 0, coords, &mut coord_exprs, &mut prog, &mut group_latents);
        let y = expr_for(slot, 1, coords, &mut coord_exprs, &mut prog, &mut group_latents);
        prog.statements.push(Statement::Draw {
            id: IdExpr(id_var_of[slot]),
            x,
            y,
            scale: scale_exprs[slot].clone().expect("every slot has a scale rule"),
        });
    }
    for &(a, b) in borders {
        prog.statements.push(Statement::Relate { kind: RelKind::Borders, a, b });
    }
    for &(a, b) in contains {
        prog.statements.push(Statement::Relate { kind: RelKind::Contains, a, b });
    }
    prog
}
