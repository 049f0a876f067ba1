//! The scene DSL: programs emit shape records and assert relations, with
//! shared constants across images and per-image latent variables.
//!
//! Cost is measured in description-length bits: statements, declared
//! constants, declared latents and free-form numeric literals all pay, so
//! shared structure (one identity latent instead of two, one scale latent
//! reused with a flipped sign) is strictly cheaper and wins the search.

use std::fmt::Write as _;
use thiserror::Error;

pub const BASE_COST: f64 = 4.0;
pub const COST_DRAW: f64 = 8.0;
pub const COST_RELATE: f64 = 4.0;
pub const COST_REPEAT: f64 = 6.0;
pub const COST_ASSERT: f64 = 4.0;
pub const COST_CONST: f64 = 10.0;
pub const COST_LATENT: f64 = 16.0;
/// Per-image encoding bits charged for each latent value in a residual.
pub const LATENT_VALUE_BITS: f64 = 10.0;
/// Cost assigned to the trivial accept-all fallback program.
pub const MAX_COST: f64 = 1.0e6;

#[derive(Debug, Error, PartialEq)]
pub enum DslError {
    #[error("statement {at}: {msg}")]
    BadReference { at: usize, msg: String },
}

/// Symbol usable inside a linear expression.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum Term {
    /// Shared constant, solved once per category.
    Const(usize),
    /// Per-image latent variable.
    Latent(usize),
    /// Innermost loop index (0-based), substituted at unroll time.
    LoopIndex,
}

/// `bias + sum coeff * term`
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LinExpr {
    pub bias: f64,
    pub terms: Vec<(Term, f64)>,
}

impl LinExpr {
    pub fn literal(v: f64) -> Self {
        LinExpr { bias: v, terms: vec![] }
    }

    pub fn latent(k: usize) -> Self {
        LinExpr { bias: 0.0, terms: vec![(Term::Latent(k), 1.0)] }
    }

    pub fn constant(k: usize) -> Self {
        LinExpr { bias: 0.0, terms: vec![(Term::Const(k), 1.0)] }
    }

    pub fn scaled(term: Term, coeff: f64) -> Self {
        LinExpr { bias: 0.0, terms: vec![(term, coeff)] }
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.bias += other.bias;
        for &(t, c) in &other.terms {
            self.add_term(t, c);
        }
        self
    }

    pub fn plus_scaled(mut self, other: &LinExpr, k: f64) -> Self {
        self.bias += k * other.bias;
        for &(t, c) in &other.terms {
            self.add_term(t, k * c);
        }
        self
    }

    pub fn add_term(&mut self, term: Term, coeff: f64) {
        match self.terms.iter_mut().find(|(t, _)| *t == term) {
            Some((_, c)) => *c += coeff,
            None => self.terms.push((term, coeff)),
        }
        self.terms.retain(|(_, c)| *c != 0.0);
    }

    /// Substitute the loop index with a concrete value.
    fn with_loop_index(&self, k: usize) -> LinExpr {
        let mut out = LinExpr { bias: self.bias, terms: vec![] };
        for &(t, c) in &self.terms {
            match t {
                Term::LoopIndex => out.bias += c * k as f64,
                other => out.add_term(other, c),
            }
        }
        out
    }

    /// Substitute resolved constants into the bias.
    pub fn resolve_consts(&self, values: &[Option<f64>]) -> LinExpr {
        let mut out = LinExpr { bias: self.bias, terms: vec![] };
        for &(t, c) in &self.terms {
            match t {
                Term::Const(k) if values.get(k).copied().flatten().is_some() => {
                    out.bias += c * values[k].unwrap();
                }
                other => out.add_term(other, c),
            }
        }
        out
    }

    fn literal_bits(&self) -> f64 {
        let mut bits = bias_bits(self.bias);
        for &(_, c) in &self.terms {
            bits += coeff_bits(c);
        }
        bits
    }

    fn sexpr(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if self.bias != 0.0 || self.terms.is_empty() {
            parts.push(format!("{}", self.bias));
        }
        let mut terms = self.terms.clone();
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        for (t, c) in terms {
            let sym = match t {
                Term::Const(k) => format!("c{k}"),
                Term::Latent(k) => format!("l{k}"),
                Term::LoopIndex => "k".into(),
            };
            if c == 1.0 {
                parts.push(sym);
            } else {
                parts.push(format!("(* {c} {sym})"));
            }
        }
        if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("(+ {})", parts.join(" "))
        }
    }
}

fn mag_bits(v: f64) -> f64 {
    (1.0 + v.abs()).log2().ceil()
}

fn bias_bits(b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        10.0 + mag_bits(b)
    }
}

/// Structural coefficients from the small grammar dictionary are cheap;
/// free-form coefficients pay like literals.
fn coeff_bits(c: f64) -> f64 {
    if c.abs() == 1.0 {
        0.0
    } else if c.abs() == 0.5 || c.abs() == 2.0 {
        2.0
    } else {
        10.0 + mag_bits(c)
    }
}

/// Identity-valued expression: identities are always per-image latents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdExpr(pub usize);

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AngleExpr {
    Literal(f64),
    /// Per-image latent angle; makes the movement non-linear.
    Latent(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum RelKind {
    Borders,
    Contains,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlotRef {
    Abs(usize),
    /// The slot emitted immediately before this statement.
    Prev,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Statement {
    Draw { id: IdExpr, x: LinExpr, y: LinExpr, scale: LinExpr },
    /// Emit a shape displaced from an earlier slot by dist at angle. The
    /// sole construct that is non-linear in general; linear when the angle
    /// is a literal.
    Move { from: SlotRef, dist: LinExpr, angle: AngleExpr, id: IdExpr, scale: LinExpr },
    Relate { kind: RelKind, a: usize, b: usize },
    Repeat { count: u8, body: Vec<Statement> },
    /// Category constraint: expression equals zero (within fit tolerance).
    AssertLinear { expr: LinExpr },
}

/// Role of a latent, fixing its admissible domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatentRole {
    Coord,
    /// Positive size multiplier; signs live in the expression.
    ScaleMag,
    /// Signed size multiplier, for slots with an inconsistent sign pattern.
    ScaleFree,
    /// Signed coordinate offset between two slots.
    Offset,
    Dist,
    Angle,
}

impl LatentRole {
    pub fn domain(self) -> (f64, f64) {
        match self {
            LatentRole::Coord => (-64.0, 320.0),
            LatentRole::ScaleMag => (0.01, 8.0),
            LatentRole::ScaleFree => (-8.0, 8.0),
            LatentRole::Offset => (-512.0, 512.0),
            LatentRole::Dist => (0.0, 512.0),
            LatentRole::Angle => (-std::f64::consts::PI, std::f64::consts::PI),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    /// Shared constants; solved values are substituted when present.
    pub const_values: Vec<Option<f64>>,
    pub latent_roles: Vec<LatentRole>,
    pub n_id_vars: usize,
    pub statements: Vec<Statement>,
    /// Trivial fallback: fits anything at maximal cost.
    pub accept_all: bool,
}

impl Program {
    pub fn new() -> Self {
        Program {
            const_values: vec![],
            latent_roles: vec![],
            n_id_vars: 0,
            statements: vec![],
            accept_all: false,
        }
    }

    pub fn trivial_accept_all() -> Self {
        Program { accept_all: true, ..Program::new() }
    }

    pub fn n_latents(&self) -> usize {
        self.latent_roles.len()
    }

    /// Description length in bits.
    pub fn cost_bits(&self) -> f64 {
        if self.accept_all {
            return MAX_COST;
        }
        let mut bits = BASE_COST
            + COST_CONST * self.const_values.len() as f64
            + COST_LATENT * (self.latent_roles.len() + self.n_id_vars) as f64;
        bits += statements_cost(&self.statements);
        bits
    }

    /// Emitted slots, relations and asserts after loop unrolling and
    /// constant resolution.
    pub fn unroll(&self) -> Result<Unrolled, DslError> {
        let mut u = Unrolled::default();
        unroll_into(&self.statements, self, &mut u, None)?;
        for (at, &(_, a, b)) in u.relations.iter().enumerate() {
            if a >= u.slots.len() || b >= u.slots.len() || a == b {
                return Err(DslError::BadReference {
                    at,
                    msg: format!("relation ({a}, {b}) out of slot range {}", u.slots.len()),
                });
            }
        }
        Ok(u)
    }

    /// Canonical S-expression rendering, used for fixtures and as the
    /// deterministic tie-breaker.
    pub fn sexpr(&self) -> String {
        if self.accept_all {
            return "(program accept-all)".into();
        }
        let mut out = String::from("(program");
        if !self.const_values.is_empty() {
            out.push_str(" (consts");
            for (k, v) in self.const_values.iter().enumerate() {
                match v {
                    Some(v) => {
                        let _ = write!(out, " (c{k} {v})");
                    }
                    None => {
                        let _ = write!(out, " c{k}");
                    }
                }
            }
            out.push(')');
        }
        if !self.latent_roles.is_empty() {
            out.push_str(" (latents");
            for (k, role) in self.latent_roles.iter().enumerate() {
                let tag = match role {
                    LatentRole::Coord => "coord",
                    LatentRole::ScaleMag => "scale",
                    LatentRole::ScaleFree => "scale~",
                    LatentRole::Offset => "offset",
                    LatentRole::Dist => "dist",
                    LatentRole::Angle => "angle",
                };
                let _ = write!(out, " (l{k} {tag})");
            }
            out.push(')');
        }
        if self.n_id_vars > 0 {
            out.push_str(" (ids");
            for k in 0..self.n_id_vars {
                let _ = write!(out, " i{k}");
            }
            out.push(')');
        }
        for s in &self.statements {
            out.push(' ');
            out.push_str(&statement_sexpr(s));
        }
        out.push(')');
        out
    }
}

impl Default for Program {
    fn default() -> Self {
        Self::new()
    }
}

fn statements_cost(statements: &[Statement]) -> f64 {
    let mut bits = 0.0;
    for s in statements {
        bits += match s {
            Statement::Draw { x, y, scale, .. } => {
                COST_DRAW + x.literal_bits() + y.literal_bits() + scale.literal_bits()
            }
            Statement::Move { dist, angle, scale, .. } => {
                let angle_bits = match angle {
                    AngleExpr::Literal(a) => bias_bits(*a),
                    AngleExpr::Latent(_) => 0.0,
                };
                COST_DRAW + dist.literal_bits() + angle_bits + scale.literal_bits()
            }
            Statement::Relate { .. } => COST_RELATE,
            Statement::Repeat { count, body } => {
                COST_REPEAT + mag_bits(*count as f64) + statements_cost(body)
            }
            Statement::AssertLinear { expr } => COST_ASSERT + expr.literal_bits(),
        };
    }
    bits
}

fn statement_sexpr(s: &Statement) -> String {
    match s {
        Statement::Draw { id, x, y, scale } => {
            format!("(draw i{} {} {} {})", id.0, x.sexpr(), y.sexpr(), scale.sexpr())
        }
        Statement::Move { from, dist, angle, id, scale } => {
            let f = match from {
                SlotRef::Abs(k) => format!("{k}"),
                SlotRef::Prev => "prev".into(),
            };
            let a = match angle {
                AngleExpr::Literal(v) => format!("{v}"),
                AngleExpr::Latent(k) => format!("l{k}"),
            };
            format!("(move {f} {} {} i{} {})", dist.sexpr(), a, id.0, scale.sexpr())
        }
        Statement::Relate { kind, a, b } => {
            let k = match kind {
                RelKind::Borders => "borders",
                RelKind::Contains => "contains",
            };
            format!("({k} {a} {b})")
        }
        Statement::Repeat { count, body } => {
            let inner: Vec<String> = body.iter().map(statement_sexpr).collect();
            format!("(repeat {count} {})", inner.join(" "))
        }
        Statement::AssertLinear { expr } => format!("(assert= {})", expr.sexpr()),
    }
}

/// One emitted shape record, with symbolic coordinate/scale expressions.
#[derive(Clone, Debug)]
pub struct EmittedSlot {
    pub id_var: usize,
    pub x: LinExpr,
    pub y: LinExpr,
    pub scale: LinExpr,
    /// Set when this slot's position depends on a latent-angle movement.
    pub nonlinear_move: Option<NonlinearMove>,
}

#[derive(Clone, Debug)]
pub struct NonlinearMove {
    pub from_slot: usize,
    pub dist: LinExpr,
    pub angle_latent: usize,
}

#[derive(Clone, Debug, Default)]
pub struct Unrolled {
    pub slots: Vec<EmittedSlot>,
    pub relations: Vec<(RelKind, usize, usize)>,
    pub asserts: Vec<LinExpr>,
}

impl Unrolled {
    pub fn has_nonlinear(&self) -> bool {
        self.slots.iter().any(|s| s.nonlinear_move.is_some())
    }

    /// Partition of slot indices by identity variable, in first-use order.
    pub fn id_partition(&self) -> Vec<Vec<usize>> {
        let mut classes: Vec<(usize, Vec<usize>)> = Vec::new();
        for (idx, s) in self.slots.iter().enumerate() {
            match classes.iter_mut().find(|(v, _)| *v == s.id_var) {
                Some((_, c)) => c.push(idx),
                None => classes.push((s.id_var, vec![idx])),
            }
        }
        classes.into_iter().map(|(_, c)| c).collect()
    }
}

fn check_expr(e: &LinExpr, prog: &Program, at: usize, in_loop: bool) -> Result<(), DslError> {
    for &(t, _) in &e.terms {
        let ok = match t {
            Term::Const(k) => k < prog.const_values.len(),
            Term::Latent(k) => k < prog.latent_roles.len(),
            Term::LoopIndex => in_loop,
        };
        if !ok {
            return Err(DslError::BadReference {
                at,
                msg: format!("expression references undeclared symbol {t:?}"),
            });
        }
    }
    Ok(())
}

fn unroll_into(
    statements: &[Statement],
    prog: &Program,
    out: &mut Unrolled,
    loop_index: Option<usize>,
) -> Result<(), DslError> {
    for (at, s) in statements.iter().enumerate() {
        let subst = |e: &LinExpr| -> LinExpr {
            let e = match loop_index {
                Some(k) => e.with_loop_index(k),
                None => e.clone(),
            };
            e.resolve_consts(&prog.const_values)
        };
        match s {
            Statement::Draw { id, x, y, scale } => {
                check_id(*id, prog, at)?;
                for e in [x, y, scale] {
                    check_expr(e, prog, at, loop_index.is_some())?;
                }
                out.slots.push(EmittedSlot {
                    id_var: id.0,
                    x: subst(x),
                    y: subst(y),
                    scale: subst(scale),
                    nonlinear_move: None,
                });
            }
            Statement::Move { from, dist, angle, id, scale } => {
                check_id(*id, prog, at)?;
                for e in [dist, scale] {
                    check_expr(e, prog, at, loop_index.is_some())?;
                }
                if let AngleExpr::Latent(k) = angle {
                    if *k >= prog.latent_roles.len() {
                        return Err(DslError::BadReference {
                            at,
                            msg: format!("angle references undeclared latent l{k}"),
                        });
                    }
                }
                let from_slot = match from {
                    SlotRef::Abs(k) => *k,
                    SlotRef::Prev => out.slots.len().checked_sub(1).ok_or_else(|| {
                        DslError::BadReference { at, msg: "move before any draw".into() }
                    })?,
                };
                if from_slot >= out.slots.len() {
                    return Err(DslError::BadReference {
                        at,
                        msg: format!("move references slot {from_slot} before it exists"),
                    });
                }
                let base = out.slots[from_slot].clone();
                let dist_e = subst(dist);
                match angle {
                    AngleExpr::Literal(theta) if base.nonlinear_move.is_none() => {
                        let (s_t, c_t) = theta.sin_cos();
                        let x = base.x.clone().plus_scaled(&dist_e, c_t);
                        let y = base.y.clone().plus_scaled(&dist_e, s_t);
                        out.slots.push(EmittedSlot {
                            id_var: id.0,
                            x,
                            y,
                            scale: subst(scale),
                            nonlinear_move: None,
                        });
                    }
                    AngleExpr::Literal(_) | AngleExpr::Latent(_) => {
                        let angle_latent = match angle {
                            AngleExpr::Latent(k) => *k,
                            AngleExpr::Literal(_) => usize::MAX,
                        };
                        out.slots.push(EmittedSlot {
                            id_var: id.0,
                            x: LinExpr::default(),
                            y: LinExpr::default(),
                            scale: subst(scale),
                            nonlinear_move: Some(NonlinearMove {
                                from_slot,
                                dist: dist_e,
                                angle_latent,
                            }),
                        });
                    }
                }
            }
            Statement::Relate { kind, a, b } => out.relations.push((*kind, *a, *b)),
            Statement::Repeat { count, body } => {
                if !(1..=8).contains(count) {
                    return Err(DslError::BadReference {
                        at,
                        msg: format!("repeat count {count} outside [1, 8]"),
                    });
                }
                for k in 0..*count {
                    unroll_into(body, prog, out, Some(k as usize))?;
                }
            }
            Statement::AssertLinear { expr } => {
                check_expr(expr, prog, at, loop_index.is_some())?;
                out.asserts.push(subst(expr));
            }
        }
    }
    Ok(())
}

fn check_id(id: IdExpr, prog: &Program, at: usize) -> Result<(), DslError> {
    if id.0 >= prog.n_id_vars {
        Err(DslError::BadReference { at, msg: format!("identity variable i{} undeclared", id.0) })
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw_free(prog: &mut Program, id: usize) -> Statement {
        let x = prog.latent_roles.len();
        prog.latent_roles.extend([LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag]);
        Statement::Draw {
            id: IdExpr(id),
            x: LinExpr::latent(x),
            y: LinExpr::latent(x + 1),
            scale: LinExpr::latent(x + 2),
        }
    }

    #[test]
    fn empty_program_has_base_cost() {
        assert_eq!(Program::new().cost_bits(), BASE_COST);
    }

    #[test]
    fn draw_with_four_fresh_constants_adds_fixed_cost() {
        let mut p = Program::new();
        p.n_id_vars = 1;
        let before = p.cost_bits();
        p.const_values = vec![Some(10.0), Some(20.0), Some(1.0), Some(0.0)];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::constant(0),
            y: LinExpr::constant(1),
            scale: LinExpr::constant(2),
        });
        // one Draw plus four declared constants; identity latents unchanged
        assert_eq!(p.cost_bits(), before + COST_DRAW + 4.0 * COST_CONST);
    }

    #[test]
    fn latent_is_dearer_than_constant() {
        let mut with_const = Program::new();
        with_const.n_id_vars = 1;
        with_const.const_values = vec![Some(12.0)];
        with_const.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::constant(0),
            y: LinExpr::literal(0.0),
            scale: LinExpr::literal(1.0),
        });
        let mut with_latent = Program::new();
        with_latent.n_id_vars = 1;
        with_latent.latent_roles = vec![LatentRole::Coord];
        with_latent.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::literal(0.0),
            scale: LinExpr::literal(1.0),
        });
        let diff = with_latent.cost_bits() - with_const.cost_bits()
            - (with_latent.statements[0].literal_cost_delta(&with_const.statements[0]));
        assert!((diff - (COST_LATENT - COST_CONST)).abs() < 1e-9);
    }

    impl Statement {
        fn literal_cost_delta(&self, other: &Statement) -> f64 {
            statements_cost(std::slice::from_ref(self))
                - statements_cost(std::slice::from_ref(other))
        }
    }

    #[test]
    fn cost_strictly_increases_under_insertion() {
        let mut p = Program::new();
        p.n_id_vars = 1;
        let mut last = p.cost_bits();
        for _ in 0..4 {
            let stmt = draw_free(&mut p, 0);
            p.statements.push(stmt);
            let now = p.cost_bits();
            assert!(now > last);
            last = now;
        }
        p.statements.push(Statement::Relate { kind: RelKind::Borders, a: 0, b: 1 });
        assert!(p.cost_bits() > last);
    }

    #[test]
    fn repeat_unrolls_with_loop_index() {
        let mut p = Program::new();
        p.n_id_vars = 1;
        p.latent_roles = vec![LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag];
        p.statements.push(Statement::Repeat {
            count: 3,
            body: vec![Statement::Draw {
                id: IdExpr(0),
                x: LinExpr { bias: 0.0, terms: vec![(Term::Latent(0), 1.0), (Term::LoopIndex, 10.0)] },
                y: LinExpr::latent(1),
                scale: LinExpr::latent(2),
            }],
        });
        let u = p.unroll().unwrap();
        assert_eq!(u.slots.len(), 3);
        assert_eq!(u.slots[0].x.bias, 0.0);
        assert_eq!(u.slots[1].x.bias, 10.0);
        assert_eq!(u.slots[2].x.bias, 20.0);
    }

    #[test]
    fn move_with_literal_angle_stays_linear() {
        let mut p = Program::new();
        p.n_id_vars = 2;
        p.latent_roles = vec![LatentRole::Coord, LatentRole::Coord, LatentRole::Dist];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::literal(1.0),
        });
        p.statements.push(Statement::Move {
            from: SlotRef::Prev,
            dist: LinExpr::latent(2),
            angle: AngleExpr::Literal(0.0),
            id: IdExpr(1),
            scale: LinExpr::literal(1.0),
        });
        let u = p.unroll().unwrap();
        assert!(!u.has_nonlinear());
        // x of slot 1 = l0 + 1.0 * l2
        assert_eq!(u.slots[1].x.terms.len(), 2);
    }

    #[test]
    fn move_with_latent_angle_is_nonlinear() {
        let mut p = Program::new();
        p.n_id_vars = 2;
        p.latent_roles =
            vec![LatentRole::Coord, LatentRole::Coord, LatentRole::Dist, LatentRole::Angle];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::literal(1.0),
        });
        p.statements.push(Statement::Move {
            from: SlotRef::Prev,
            dist: LinExpr::latent(2),
            angle: AngleExpr::Latent(3),
            id: IdExpr(1),
            scale: LinExpr::literal(1.0),
        });
        assert!(p.unroll().unwrap().has_nonlinear());
    }

    #[test]
    fn undeclared_symbols_are_rejected() {
        let mut p = Program::new();
        p.n_id_vars = 1;
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(3), // never declared
            y: LinExpr::literal(0.0),
            scale: LinExpr::literal(1.0),
        });
        assert!(matches!(p.unroll(), Err(DslError::BadReference { .. })));
        // loop indices are only meaningful inside a repeat body
        let mut q = Program::new();
        q.n_id_vars = 1;
        q.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::scaled(Term::LoopIndex, 1.0),
            y: LinExpr::literal(0.0),
            scale: LinExpr::literal(1.0),
        });
        assert!(matches!(q.unroll(), Err(DslError::BadReference { .. })));
    }

    #[test]
    fn undeclared_identity_is_rejected() {
        let mut p = Program::new();
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::literal(0.0),
            y: LinExpr::literal(0.0),
            scale: LinExpr::literal(1.0),
        });
        assert!(matches!(p.unroll(), Err(DslError::BadReference { .. })));
    }

    #[test]
    fn sexpr_is_deterministic_and_readable() {
        let mut p = Program::new();
        p.n_id_vars = 1;
        p.latent_roles = vec![LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::scaled(Term::Latent(2), -1.0),
        });
        let s = p.sexpr();
        assert!(s.starts_with("(program"));
        assert!(s.contains("(draw i0 l0 l1 (* -1 l2))"));
        assert_eq!(s, p.sexpr());
    }
}
