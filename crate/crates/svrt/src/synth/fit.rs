//! Satisfiability of a program against a parsing.
//!
//! A program fits a parsing when some assignment of per-image latents (and
//! any unresolved shared constants) makes the emitted shape records match
//! the parsing's records within positional and scale tolerances, with the
//! identity equality pattern matching exactly up to renaming and the
//! relation sets matching exactly.
//!
//! Matching enumerates slot-to-shape bijections that respect the identity
//! partitions, checks relation sets, then hands the numeric part to the
//! linear solver. Non-linear programs (latent-angle movements) go to the
//! external SMT solver when one is configured, and count as unknown,
//! treated as unsatisfiable, otherwise.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use super::dsl::{DslError, LatentRole, LinExpr, Program, RelKind, Term, Unrolled, LATENT_VALUE_BITS};
use super::smtlib;
use super::solver::{self, rat, Feasibility, LinearConstraint, SolverLimits};
use crate::parsing::Parsing;

/// Positional tolerance when matching emitted coordinates, in pixels.
pub const EPS_POS: f64 = 2.0;
/// Scale tolerance when matching emitted scales.
pub const EPS_SCALE: f64 = 0.05;

/// Cap on slot-to-shape bijections tried per image.
const MAX_BIJECTIONS: usize = 4096;

#[derive(Clone, Debug)]
pub struct FitConfig {
    pub eps_pos: f64,
    pub eps_scale: f64,
    pub time_limit: Duration,
    /// External SMT solver binary; reads SMT-LIB v2 on stdin, answers
    /// sat/unsat/unknown on stdout. Handles the non-linear fragment.
    pub external_solver: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            eps_pos: EPS_POS,
            eps_scale: EPS_SCALE,
            time_limit: Duration::from_secs(1),
            external_solver: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub satisfiable: bool,
    /// Timeout or unsupported fragment; treated as unsatisfiable.
    pub unknown: bool,
    pub latent_assignment: Option<Vec<f64>>,
    /// Encoding cost of the latents this fit had to solve (plus numeric
    /// slack, which is zero for in-tolerance fits).
    pub residual_bits: f64,
    /// Structural mismatch count under the best relaxation tried.
    pub violations: u32,
    pub solver_time: Duration,
}

impl FitResult {
    fn sat(latents: Option<Vec<f64>>, residual: f64, t: Duration) -> Self {
        FitResult {
            satisfiable: true,
            unknown: false,
            latent_assignment: latents,
            residual_bits: residual,
            violations: 0,
            solver_time: t,
        }
    }

    fn unsat(violations: u32, t: Duration) -> Self {
        FitResult {
            satisfiable: false,
            unknown: false,
            latent_assignment: None,
            residual_bits: 0.0,
            violations,
            solver_time: t,
        }
    }

    fn unknown(t: Duration) -> Self {
        FitResult {
            satisfiable: false,
            unknown: true,
            latent_assignment: None,
            residual_bits: 0.0,
            violations: 1,
            solver_time: t,
        }
    }
}

/// Check a program against one parsing.
pub fn fit(program: &Program, parsing: &Parsing, cfg: &FitConfig) -> Result<FitResult, DslError> {
    let start = Instant::now();
    if program.accept_all {
        return Ok(FitResult::sat(Some(vec![]), 0.0, start.elapsed()));
    }
    let unrolled = program.unroll()?;
    let deadline = start + cfg.time_limit;

    if unrolled.has_nonlinear() {
        return Ok(match external_verdict(program, std::slice::from_ref(parsing), cfg) {
            Some(smtlib::Verdict::Sat) => FitResult::sat(None, residual(program), start.elapsed()),
            Some(smtlib::Verdict::Unsat) => FitResult::unsat(1, start.elapsed()),
            _ => FitResult::unknown(start.elapsed()),
        });
    }

    let m = unrolled.slots.len();
    let n = parsing.shapes.len();
    if m != n {
        return Ok(FitResult::unsat(structure_violations(&unrolled, parsing), start.elapsed()));
    }

    let mut best_violations = structure_violations(&unrolled, parsing).max(1);
    let mut timed_out = false;

    for sigma in candidate_bijections(program, &unrolled, parsing, cfg) {
        if Instant::now() > deadline {
            timed_out = true;
            break;
        }
        let rel_diff = relation_mismatch(&unrolled, parsing, &sigma);
        if rel_diff > 0 {
            best_violations = best_violations.min(rel_diff);
            continue;
        }
        let (n_vars, constraints) = build_constraints(program, &unrolled, parsing, &sigma, cfg);
        let limits = SolverLimits { deadline: Some(deadline), ..SolverLimits::default() };
        match solver::feasible(n_vars, &constraints, &limits) {
            Feasibility::Sat(witness) => {
                let latents = witness[program.const_values.len()..].to_vec();
                return Ok(FitResult::sat(Some(latents), residual(program), start.elapsed()));
            }
            Feasibility::Unsat => best_violations = best_violations.min(1),
            Feasibility::Unknown => {
                timed_out = true;
                break;
            }
        }
    }

    Ok(if timed_out {
        FitResult::unknown(start.elapsed().min(cfg.time_limit))
    } else {
        FitResult::unsat(best_violations, start.elapsed())
    })
}

pub struct FitsAll {
    pub sat: bool,
    pub unknown: bool,
}

/// Whether the program fits every parsing, sharing constants across images.
pub fn fits_all(program: &Program, parsings: &[Parsing], cfg: &FitConfig) -> Result<FitsAll, DslError> {
    let unresolved = program.const_values.iter().any(|v| v.is_none());
    if !unresolved {
        let mut unknown = false;
        for p in parsings {
            let r = fit(program, p, cfg)?;
            unknown |= r.unknown;
            if !r.satisfiable {
                return Ok(FitsAll { sat: false, unknown });
            }
        }
        return Ok(FitsAll { sat: true, unknown });
    }
    joint_fit(program, parsings, cfg)
}

/// Joint feasibility with shared unresolved constants: per-image candidate
/// bijections first, then a bounded product search over combinations.
fn joint_fit(program: &Program, parsings: &[Parsing], cfg: &FitConfig) -> Result<FitsAll, DslError> {
    let unrolled = program.unroll()?;
    if unrolled.has_nonlinear() {
        return Ok(match external_verdict(program, parsings, cfg) {
            Some(smtlib::Verdict::Sat) => FitsAll { sat: true, unknown: false },
            Some(smtlib::Verdict::Unsat) => FitsAll { sat: false, unknown: false },
            _ => FitsAll { sat: false, unknown: true },
        });
    }
    let start = Instant::now();
    let deadline = start + cfg.time_limit.mul_f64(parsings.len().max(1) as f64);
    let n_consts = program.const_values.len();
    let n_latents = program.n_latents();

    let mut candidates: Vec<Vec<Vec<usize>>> = Vec::with_capacity(parsings.len());
    for p in parsings {
        if unrolled.slots.len() != p.shapes.len() {
            return Ok(FitsAll { sat: false, unknown: false });
        }
        let mut good = Vec::new();
        for sigma in candidate_bijections(program, &unrolled, p, cfg) {
            if relation_mismatch(&unrolled, p, &sigma) > 0 {
                continue;
            }
            let (n_vars, constraints) = build_constraints(program, &unrolled, p, &sigma, cfg);
            let limits = SolverLimits { deadline: Some(deadline), ..SolverLimits::default() };
            if matches!(solver::feasible(n_vars, &constraints, &limits), Feasibility::Sat(_)) {
                good.push(sigma);
                if good.len() >= 64 {
                    break;
                }
            }
        }
        if good.is_empty() {
            return Ok(FitsAll { sat: false, unknown: false });
        }
        candidates.push(good);
    }

    let mut combo = vec![0usize; parsings.len()];
    let mut tried = 0usize;
    loop {
        if Instant::now() > deadline || tried > 2000 {
            return Ok(FitsAll { sat: false, unknown: true });
        }
        tried += 1;
        let total_vars = n_consts + parsings.len() * n_latents;
        let mut constraints: Vec<LinearConstraint> = Vec::new();
        for (img, p) in parsings.iter().enumerate() {
            let sigma = &candidates[img][combo[img]];
            let (_, mut cs) = build_constraints_offset(
                program,
                &unrolled,
                p,
                sigma,
                cfg,
                n_consts + img * n_latents,
            );
            constraints.append(&mut cs);
        }
        let limits = SolverLimits { deadline: Some(deadline), ..SolverLimits::default() };
        if matches!(solver::feasible(total_vars, &constraints, &limits), Feasibility::Sat(_)) {
            return Ok(FitsAll { sat: true, unknown: false });
        }
        let mut k = 0;
        loop {
            if k == combo.len() {
                return Ok(FitsAll { sat: false, unknown: false });
            }
            combo[k] += 1;
            if combo[k] < candidates[k].len() {
                break;
            }
            combo[k] = 0;
            k += 1;
        }
    }
}

fn external_verdict(
    program: &Program,
    parsings: &[Parsing],
    cfg: &FitConfig,
) -> Option<smtlib::Verdict> {
    let path = cfg.external_solver.as_ref()?;
    let doc = smtlib::emit_constraints(program, parsings, cfg).ok()?;
    smtlib::run_external(path, &doc, cfg.time_limit).ok()
}

fn residual(program: &Program) -> f64 {
    LATENT_VALUE_BITS * (program.n_latents() + program.n_id_vars) as f64
}

/// Structural mismatch: shape-count gap, identity-partition shape gap and
/// relation count gaps. The violation count when no bijection reconciles
/// the structures.
fn structure_violations(u: &Unrolled, parsing: &Parsing) -> u32 {
    let m = u.slots.len();
    let n = parsing.shapes.len();
    let mut v = 4 * (m as i64 - n as i64).unsigned_abs() as u32;
    let mut a: Vec<usize> = u.id_partition().iter().map(|b| b.len()).collect();
    let mut b: Vec<usize> = parsing.identity_classes().iter().map(|c| c.len()).collect();
    a.sort_unstable();
    b.sort_unstable();
    for k in 0..a.len().max(b.len()) {
        let x = a.get(k).copied().unwrap_or(0) as i64;
        let y = b.get(k).copied().unwrap_or(0) as i64;
        v += (x - y).unsigned_abs() as u32;
    }
    let emitted_borders = u.relations.iter().filter(|(k, _, _)| *k == RelKind::Borders).count() as i64;
    let emitted_contains = u.relations.iter().filter(|(k, _, _)| *k == RelKind::Contains).count() as i64;
    v += (emitted_borders - parsing.borders.len() as i64).unsigned_abs() as u32;
    v += (emitted_contains - parsing.contains.len() as i64).unsigned_abs() as u32;
    v
}

pub(crate) fn relation_mismatch(u: &Unrolled, parsing: &Parsing, sigma: &[usize]) -> u32 {
    let mut borders = BTreeSet::new();
    let mut contains = BTreeSet::new();
    for &(kind, a, b) in &u.relations {
        let (x, y) = (sigma[a], sigma[b]);
        match kind {
            RelKind::Borders => {
                borders.insert((x.min(y), x.max(y)));
            }
            RelKind::Contains => {
                contains.insert((x, y));
            }
        }
    }
    (borders.symmetric_difference(&parsing.borders).count()
        + contains.symmetric_difference(&parsing.contains).count()) as u32
}

fn build_constraints(
    program: &Program,
    u: &Unrolled,
    parsing: &Parsing,
    sigma: &[usize],
    cfg: &FitConfig,
) -> (usize, Vec<LinearConstraint>) {
    build_constraints_offset(program, u, parsing, sigma, cfg, program.const_values.len())
}

/// Variable layout: constants own the low indices, latents start at
/// `latent_base`.
fn build_constraints_offset(
    program: &Program,
    u: &Unrolled,
    parsing: &Parsing,
    sigma: &[usize],
    cfg: &FitConfig,
    latent_base: usize,
) -> (usize, Vec<LinearConstraint>) {
    let var_of = |t: Term| -> usize {
        match t {
            Term::Const(k) => k,
            Term::Latent(k) => latent_base + k,
            Term::LoopIndex => unreachable!("loop indices are substituted at unroll"),
        }
    };
    let mut cs: Vec<LinearConstraint> = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();
    {
        let mut push_near = |expr: &LinExpr, target: f64, tol: f64| {
            let coeffs: Vec<(usize, f64)> = expr
                .terms
                .iter()
                .map(|&(t, c)| {
                    let v = var_of(t);
                    used.insert(v);
                    (v, c)
                })
                .collect();
            cs.extend(solver::near(&coeffs, expr.bias, target, tol));
        };
        for (i, slot) in u.slots.iter().enumerate() {
            let shape = &parsing.shapes[sigma[i]];
            push_near(&slot.x, shape.x, cfg.eps_pos);
            push_near(&slot.y, shape.y, cfg.eps_pos);
            push_near(&slot.scale, shape.scale, cfg.eps_scale);
        }
        for a in &u.asserts {
            push_near(a, 0.0, cfg.eps_pos);
        }
    }
    for k in 0..program.n_latents() {
        let v = latent_base + k;
        if used.contains(&v) {
            let (lo, hi) = program.latent_roles[k].domain();
            cs.extend(solver::bounds(v, lo, hi));
        }
    }
    for (k, val) in program.const_values.iter().enumerate() {
        if val.is_none() && used.contains(&k) {
            cs.push(LinearConstraint { coeffs: vec![(k, rat(1.0))], bound: rat(2048.0) });
            cs.push(LinearConstraint { coeffs: vec![(k, rat(-1.0))], bound: rat(2048.0) });
        }
    }
    (latent_base + program.n_latents(), cs)
}

/// Bijections respecting the identity partitions: program identity blocks
/// are matched to parsing identity classes of equal size, then members are
/// permuted within each block. The order-preserving bijection comes first,
/// and a scale-sign prune removes hopeless assignments early.
pub(crate) fn candidate_bijections(
    program: &Program,
    u: &Unrolled,
    parsing: &Parsing,
    cfg: &FitConfig,
) -> Vec<Vec<usize>> {
    let blocks = u.id_partition();
    let classes = parsing.identity_classes();
    let mut out: Vec<Vec<usize>> = Vec::new();
    if blocks.len() != classes.len() {
        return out;
    }
    let n = u.slots.len();

    let compatible = |slot: usize, shape: usize| -> bool {
        let e = &u.slots[slot].scale;
        if e.terms.is_empty() {
            return (e.bias - parsing.shapes[shape].scale).abs() <= cfg.eps_scale;
        }
        if e.bias == 0.0 && e.terms.len() == 1 {
            if let (Term::Latent(k), c) = e.terms[0] {
                if program.latent_roles.get(k) == Some(&LatentRole::ScaleMag) {
                    return (c > 0.0) == (parsing.shapes[shape].scale > 0.0);
                }
            }
        }
        true
    };

    // match blocks to classes of equal size, depth-first in declaration order
    #[allow(clippy::too_many_arguments)]
    fn match_blocks(
        depth: usize,
        blocks: &[Vec<usize>],
        classes: &[Vec<usize>],
        used: &mut Vec<bool>,
        chosen: &mut Vec<usize>,
        n: usize,
        compatible: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        if out.len() >= MAX_BIJECTIONS {
            return;
        }
        if depth == blocks.len() {
            expand_permutations(blocks, classes, chosen, n, compatible, out);
            return;
        }
        for c in 0..classes.len() {
            if !used[c] && classes[c].len() == blocks[depth].len() {
                used[c] = true;
                chosen.push(c);
                match_blocks(depth + 1, blocks, classes, used, chosen, n, compatible, out);
                chosen.pop();
                used[c] = false;
            }
        }
    }

    fn expand_permutations(
        blocks: &[Vec<usize>],
        classes: &[Vec<usize>],
        chosen: &[usize],
        n: usize,
        compatible: &dyn Fn(usize, usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        let mut per_block: Vec<Vec<Vec<usize>>> = Vec::with_capacity(blocks.len());
        for (b, &c) in chosen.iter().enumerate() {
            let mut maps = Vec::new();
            for perm in permutations(&classes[c]) {
                if blocks[b].iter().zip(perm.iter()).all(|(&s, &sh)| compatible(s, sh)) {
                    maps.push(perm);
                }
            }
            if maps.is_empty() {
                return;
            }
            per_block.push(maps);
        }
        let mut idx = vec![0usize; per_block.len()];
        loop {
            let mut sigma = vec![usize::MAX; n];
            for (b, maps) in per_block.iter().enumerate() {
                for (&slot, &shape) in blocks[b].iter().zip(maps[idx[b]].iter()) {
                    sigma[slot] = shape;
                }
            }
            out.push(sigma);
            if out.len() >= MAX_BIJECTIONS {
                return;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return;
                }
                idx[k] += 1;
                if idx[k] < per_block[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    let mut used = vec![false; classes.len()];
    let mut chosen = Vec::new();
    match_blocks(0, &blocks, &classes, &mut used, &mut chosen, n, &compatible, &mut out);
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut v: Vec<usize> = items.to_vec();
    let mut out = Vec::new();
    permute(&mut v, 0, &mut out);
    out
}

fn permute(v: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == v.len() {
        out.push(v.clone());
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, out);
        v.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::ShapeRecord;
    use crate::synth::dsl::{IdExpr, Statement};

    fn two_draw_shared_id() -> Program {
        let mut p = Program::new();
        p.n_id_vars = 1;
        p.latent_roles = vec![
            LatentRole::Coord,
            LatentRole::Coord,
            LatentRole::Coord,
            LatentRole::Coord,
            LatentRole::ScaleMag,
        ];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::latent(4),
        });
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(2),
            y: LinExpr::latent(3),
            scale: LinExpr::latent(4),
        });
        p
    }

    fn parsing_two(id0: u32, id1: u32, s0: f64, s1: f64) -> Parsing {
        Parsing {
            shapes: vec![
                ShapeRecord { x: 30.0, y: 40.0, identity: id0, scale: s0 },
                ShapeRecord { x: 80.0, y: 90.0, identity: id1, scale: s1 },
            ],
            ..Default::default()
        }
    }

    #[test]
    fn shared_identity_program_fits_identical_pair() {
        let p = two_draw_shared_id();
        let r = fit(&p, &parsing_two(5, 5, 1.0, 1.0), &FitConfig::default()).unwrap();
        assert!(r.satisfiable);
        assert_eq!(r.violations, 0);
        let latents = r.latent_assignment.unwrap();
        assert!((latents[0] - 30.0).abs() <= EPS_POS + 1e-9);
        assert!((latents[4] - 1.0).abs() <= EPS_SCALE + 1e-9);
    }

    #[test]
    fn shared_identity_program_rejects_different_pair() {
        let p = two_draw_shared_id();
        let r = fit(&p, &parsing_two(5, 6, 1.0, 1.0), &FitConfig::default()).unwrap();
        assert!(!r.satisfiable);
        assert!(!r.unknown, "identity pattern mismatch is a definite no");
        assert!(r.violations >= 1);
    }

    #[test]
    fn cardinality_mismatch_is_unsat() {
        let p = two_draw_shared_id();
        let single = Parsing {
            shapes: vec![ShapeRecord { x: 10.0, y: 10.0, identity: 0, scale: 1.0 }],
            ..Default::default()
        };
        let r = fit(&p, &single, &FitConfig::default()).unwrap();
        assert!(!r.satisfiable);
        assert!(r.violations >= 4);
    }

    #[test]
    fn shared_scale_constrains_the_match() {
        let p = two_draw_shared_id();
        // same identity but clearly different sizes: shared scale cannot fit
        let r = fit(&p, &parsing_two(5, 5, 1.0, 1.6), &FitConfig::default()).unwrap();
        assert!(!r.satisfiable);
    }

    #[test]
    fn sign_flip_expression_matches_reflected_pair() {
        let mut p = two_draw_shared_id();
        if let Statement::Draw { scale, .. } = &mut p.statements[1] {
            *scale = LinExpr::scaled(Term::Latent(4), -1.0);
        }
        let r = fit(&p, &parsing_two(5, 5, 1.2, -1.2), &FitConfig::default()).unwrap();
        assert!(r.satisfiable);
        let r2 = fit(&p, &parsing_two(5, 5, 1.2, 1.2), &FitConfig::default()).unwrap();
        assert!(!r2.satisfiable, "unreflected pair must not match the sign flip");
    }

    #[test]
    fn relations_must_match_exactly() {
        let mut p = two_draw_shared_id();
        p.n_id_vars = 2;
        if let Statement::Draw { id, .. } = &mut p.statements[1] {
            *id = IdExpr(1);
        }
        p.statements.push(Statement::Relate { kind: RelKind::Contains, a: 0, b: 1 });
        let mut with_rel = parsing_two(5, 6, 1.0, 1.0);
        with_rel.contains.insert((0, 1));
        assert!(fit(&p, &with_rel, &FitConfig::default()).unwrap().satisfiable);
        let without = parsing_two(5, 6, 1.0, 1.0);
        let r = fit(&p, &without, &FitConfig::default()).unwrap();
        assert!(!r.satisfiable);
        assert_eq!(r.violations, 1);
    }

    #[test]
    fn accept_all_fits_anything() {
        let p = Program::trivial_accept_all();
        assert!(fit(&p, &Parsing::default(), &FitConfig::default()).unwrap().satisfiable);
        assert!(fit(&p, &parsing_two(1, 2, 1.0, -0.5), &FitConfig::default()).unwrap().satisfiable);
    }

    #[test]
    fn nonlinear_without_external_solver_is_unknown() {
        use crate::synth::dsl::{AngleExpr, SlotRef};
        let mut p = Program::new();
        p.n_id_vars = 2;
        p.latent_roles = vec![
            LatentRole::Coord,
            LatentRole::Coord,
            LatentRole::Dist,
            LatentRole::Angle,
            LatentRole::ScaleMag,
        ];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::latent(4),
        });
        p.statements.push(Statement::Move {
            from: SlotRef::Prev,
            dist: LinExpr::latent(2),
            angle: AngleExpr::Latent(3),
            id: IdExpr(1),
            scale: LinExpr::latent(4),
        });
        let r = fit(&p, &parsing_two(5, 6, 1.0, 1.0), &FitConfig::default()).unwrap();
        assert!(!r.satisfiable);
        assert!(r.unknown);
    }

    #[test]
    fn timeout_discipline_is_respected() {
        // a six-shape single-identity parsing forces hundreds of bijections
        let mut p = Program::new();
        p.n_id_vars = 1;
        let mut shapes = Vec::new();
        for k in 0..6 {
            let b = p.latent_roles.len();
            p.latent_roles.extend([LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag]);
            p.statements.push(Statement::Draw {
                id: IdExpr(0),
                x: LinExpr::latent(b),
                y: LinExpr::latent(b + 1),
                scale: LinExpr::latent(b + 2),
            });
            shapes.push(ShapeRecord { x: 10.0 * k as f64, y: 5.0, identity: 9, scale: 1.0 });
        }
        let parsing = Parsing { shapes, ..Default::default() };
        let cfg = FitConfig { time_limit: Duration::from_millis(50), ..Default::default() };
        let t0 = Instant::now();
        let r = fit(&p, &parsing, &cfg).unwrap();
        // no more than 10% over the limit, plus scheduler slack
        assert!(t0.elapsed() < Duration::from_millis(55 + 10), "took {:?}", t0.elapsed());
        // a fit cut off by its deadline reports unknown, never satisfiable
        if r.unknown {
            assert!(!r.satisfiable);
        }
    }
}
