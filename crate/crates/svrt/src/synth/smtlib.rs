//! SMT-LIB v2 emission of fit problems, and the external-solver subprocess.
//!
//! Linear programs emit under QF_LRA. Programs with a latent-angle movement
//! emit under QF_NRA, encoding each angle as a unit (cos, sin) pair. The
//! shape-matching choice appears as a disjunction over the candidate
//! bijections. Documents are self-contained: any conforming solver reading
//! the document on stdin and answering sat/unsat/unknown works.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::dsl::{DslError, LinExpr, Program, Term};
use super::fit::FitConfig;
use crate::parsing::Parsing;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

fn smt_num(v: f64) -> String {
    if v < 0.0 {
        format!("(- {:?})", -v)
    } else {
        format!("{v:?}")
    }
}

/// Render a linear expression over image-local variable names.
fn smt_linexpr(e: &LinExpr, img: usize) -> String {
    let mut parts: Vec<String> = Vec::new();
    if e.bias != 0.0 {
        parts.push(smt_num(e.bias));
    }
    for &(t, c) in &e.terms {
        let sym = match t {
            Term::Const(k) => format!("c{k}"),
            Term::Latent(k) => format!("l{img}_{k}"),
            Term::LoopIndex => unreachable!("loop indices are substituted at unroll"),
        };
        if c == 1.0 {
            parts.push(sym);
        } else {
            parts.push(format!("(* {} {sym})", smt_num(c)));
        }
    }
    match parts.len() {
        0 => "0.0".into(),
        1 => parts.pop().unwrap(),
        _ => format!("(+ {})", parts.join(" ")),
    }
}

fn smt_near(expr: &str, target: f64, tol: f64) -> String {
    format!(
        "(and (<= (- {expr} {t}) {tol}) (<= (- {t} {expr}) {tol}))",
        t = smt_num(target),
        tol = smt_num(tol),
    )
}

/// Emit a self-contained document encoding "the program fits every parsing"
/// with shared constants and per-image latents.
pub fn emit_constraints(
    program: &Program,
    parsings: &[Parsing],
    cfg: &FitConfig,
) -> Result<String, DslError> {
    let unrolled = program.unroll()?;
    let nonlinear = unrolled.has_nonlinear();
    let mut doc = String::new();
    let logic = if nonlinear { "QF_NRA" } else { "QF_LRA" };
    let _ = writeln!(doc, "(set-logic {logic})");

    for (k, v) in program.const_values.iter().enumerate() {
        let _ = writeln!(doc, "(declare-const c{k} Real)");
        if let Some(v) = v {
            let _ = writeln!(doc, "(assert (= c{k} {}))", smt_num(*v));
        }
    }
    for img in 0..parsings.len() {
        for k in 0..program.n_latents() {
            let _ = writeln!(doc, "(declare-const l{img}_{k} Real)");
            let (lo, hi) = program.latent_roles[k].domain();
            let _ = writeln!(
                doc,
                "(assert (and (>= l{img}_{k} {}) (<= l{img}_{k} {})))",
                smt_num(lo),
                smt_num(hi)
            );
        }
        if nonlinear {
            // one unit-circle pair per angle latent used by a movement
            for slot in &unrolled.slots {
                if let Some(nl) = &slot.nonlinear_move {
                    if nl.angle_latent != usize::MAX {
                        let k = nl.angle_latent;
                        let _ = writeln!(doc, "(declare-const cs{img}_{k} Real)");
                        let _ = writeln!(doc, "(declare-const sn{img}_{k} Real)");
                        let _ = writeln!(
                            doc,
                            "(assert (= (+ (* cs{img}_{k} cs{img}_{k}) (* sn{img}_{k} sn{img}_{k})) 1.0))"
                        );
                    }
                }
            }
        }
    }

    for (img, parsing) in parsings.iter().enumerate() {
        let disjuncts = bijection_disjuncts(program, &unrolled, parsing, cfg, img);
        if disjuncts.is_empty() {
            let _ = writeln!(doc, "(assert false)");
        } else if disjuncts.len() == 1 {
            let _ = writeln!(doc, "(assert {})", disjuncts[0]);
        } else {
            let _ = writeln!(doc, "(assert (or {}))", disjuncts.join(" "));
        }
    }

    let _ = writeln!(doc, "(check-sat)");
    Ok(doc)
}

/// Position expressions per slot, following movement chains symbolically.
fn slot_position(
    unrolled: &super::dsl::Unrolled,
    slot: usize,
    img: usize,
) -> (String, String) {
    let s = &unrolled.slots[slot];
    match &s.nonlinear_move {
        None => (smt_linexpr(&s.x, img), smt_linexpr(&s.y, img)),
        Some(nl) => {
            let (fx, fy) = slot_position(unrolled, nl.from_slot, img);
            let d = smt_linexpr(&nl.dist, img);
            let k = nl.angle_latent;
            (
                format!("(+ {fx} (* {d} cs{img}_{k}))"),
                format!("(+ {fy} (* {d} sn{img}_{k}))"),
            )
        }
    }
}

fn bijection_disjuncts(
    program: &Program,
    unrolled: &super::dsl::Unrolled,
    parsing: &Parsing,
    cfg: &FitConfig,
    img: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    if unrolled.slots.len() != parsing.shapes.len() {
        return out;
    }
    for sigma in super::fit::candidate_bijections(program, unrolled, parsing, cfg).into_iter().take(720)
    {
        if super::fit::relation_mismatch(unrolled, parsing, &sigma) > 0 {
            continue;
        }
        let mut conj: Vec<String> = Vec::new();
        for (i, slot) in unrolled.slots.iter().enumerate() {
            let shape = &parsing.shapes[sigma[i]];
            let (px, py) = slot_position(unrolled, i, img);
            conj.push(smt_near(&px, shape.x, cfg.eps_pos));
            conj.push(smt_near(&py, shape.y, cfg.eps_pos));
            conj.push(smt_near(&smt_linexpr(&slot.scale, img), shape.scale, cfg.eps_scale));
        }
        for a in &unrolled.asserts {
            conj.push(smt_near(&smt_linexpr(a, img), 0.0, cfg.eps_pos));
        }
        out.push(format!("(and {})", conj.join(" ")));
    }
    out
}

/// Run an external solver on the document; the answer is the first
/// sat/unsat token on stdout. Times out to `Unknown`.
pub fn run_external(path: &Path, doc: &str, timeout: Duration) -> io::Result<Verdict> {
    let mut child = Command::new(path)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()?;
    child.stdin.take().expect("piped stdin").write_all(doc.as_bytes())?;

    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None if Instant::now() > deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(Verdict::Unknown);
            }
            None => std::thread::sleep(Duration::from_millis(5)),
        }
    }
    let mut out = String::new();
    child.stdout.take().expect("piped stdout").read_to_string(&mut out)?;
    for token in out.split_whitespace() {
        match token {
            "sat" => return Ok(Verdict::Sat),
            "unsat" => return Ok(Verdict::Unsat),
            "unknown" => return Ok(Verdict::Unknown),
            _ => {}
        }
    }
    Ok(Verdict::Unknown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::ShapeRecord;
    use crate::synth::dsl::{AngleExpr, IdExpr, LatentRole, SlotRef, Statement};

    fn linear_program() -> Program {
        let mut p = Program::new();
        p.n_id_vars = 1;
        p.latent_roles = vec![LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag];
        p.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::latent(2),
        });
        p
    }

    fn one_shape() -> Parsing {
        Parsing {
            shapes: vec![ShapeRecord { x: 10.0, y: 20.0, identity: 0, scale: 1.0 }],
            ..Default::default()
        }
    }

    #[test]
    fn linear_program_declares_qf_lra() {
        let doc =
            emit_constraints(&linear_program(), &[one_shape()], &FitConfig::default()).unwrap();
        assert!(doc.starts_with("(set-logic QF_LRA)"));
        assert!(doc.contains("(check-sat)"));
        assert!(doc.contains("(declare-const l0_0 Real)"));
    }

    #[test]
    fn variable_angle_move_declares_qf_nra() {
        let mut p = linear_program();
        p.n_id_vars = 2;
        p.latent_roles.extend([LatentRole::Dist, LatentRole::Angle, LatentRole::ScaleMag]);
        p.statements.push(Statement::Move {
            from: SlotRef::Prev,
            dist: LinExpr::latent(3),
            angle: AngleExpr::Latent(4),
            id: IdExpr(1),
            scale: LinExpr::latent(5),
        });
        let two = Parsing {
            shapes: vec![
                ShapeRecord { x: 10.0, y: 20.0, identity: 0, scale: 1.0 },
                ShapeRecord { x: 40.0, y: 20.0, identity: 1, scale: 1.0 },
            ],
            ..Default::default()
        };
        let doc = emit_constraints(&p, &[two], &FitConfig::default()).unwrap();
        assert!(doc.starts_with("(set-logic QF_NRA)"));
        assert!(doc.contains("cs0_4"), "unit-circle encoding present: {doc}");
    }

    #[test]
    fn document_parens_are_balanced() {
        let doc =
            emit_constraints(&linear_program(), &[one_shape()], &FitConfig::default()).unwrap();
        let mut depth: i64 = 0;
        for ch in doc.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                _ => {}
            }
            assert!(depth >= 0);
        }
        assert_eq!(depth, 0);
    }

    #[test]
    fn negative_numbers_use_prefix_minus() {
        assert_eq!(smt_num(-2.5), "(- 2.5)");
        assert_eq!(smt_num(3.0), "3.0");
    }
}
