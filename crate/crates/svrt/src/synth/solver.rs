//! Feasibility of conjunctions of linear inequalities over the rationals.
//!
//! Fourier–Motzkin elimination in exact arithmetic, with back-substitution
//! to recover a witness point. This covers the linear fragment the DSL
//! needs; non-linear constraints are routed to an external SMT solver or
//! reported as unknown.

use std::collections::BTreeMap;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

pub fn rat(x: f64) -> Rat {
    Rat::from_f64(x).expect("finite float")
}

/// `sum coeffs . x <= bound`
#[derive(Clone, Debug)]
pub struct LinearConstraint {
    pub coeffs: Vec<(usize, Rat)>,
    pub bound: Rat,
}

impl LinearConstraint {
    /// Drop zero coefficients and sort by variable index.
    fn normalized(mut self) -> Self {
        self.coeffs.retain(|(_, c)| !c.is_zero());
        self.coeffs.sort_by_key(|&(v, _)| v);
        self
    }

    fn key(&self) -> String {
        let mut s = String::new();
        for (v, c) in &self.coeffs {
            s.push_str(&format!("{v}:{c};"));
        }
        s.push_str(&format!("<={}", self.bound));
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Sat(Vec<f64>),
    Unsat,
    /// Resource limits hit; treated as unsatisfiable by callers.
    Unknown,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverLimits {
    /// Abort when the working constraint set exceeds this size.
    pub max_constraints: usize,
    pub deadline: Option<Instant>,
}

impl Default for SolverLimits {
    fn default() -> Self {
        SolverLimits { max_constraints: 50_000, deadline: None }
    }
}

fn dedupe(constraints: Vec<LinearConstraint>) -> Vec<LinearConstraint> {
    let mut seen: BTreeMap<String, LinearConstraint> = BTreeMap::new();
    for c in constraints {
        seen.entry(c.key()).or_insert(c);
    }
    seen.into_values().collect()
}

/// Decide feasibility of `constraints` over `n_vars` real variables.
pub fn feasible(n_vars: usize, constraints: &[LinearConstraint], limits: &SolverLimits) -> Feasibility {
    let mut current: Vec<LinearConstraint> =
        constraints.iter().cloned().map(LinearConstraint::normalized).collect();
    let mut stages: Vec<(usize, Vec<LinearConstraint>)> = Vec::new();

    let mut remaining: Vec<usize> = (0..n_vars).collect();
    while !remaining.is_empty() {
        if let Some(d) = limits.deadline {
            if Instant::now() > d {
                return Feasibility::Unknown;
            }
        }
        // check trivially false constant rows
        for c in &current {
            if c.coeffs.is_empty() && c.bound.is_negative() {
                return Feasibility::Unsat;
            }
        }
        // eliminate the variable with the smallest pos*neg product
        let (pick_idx, &var) = match remaining
            .iter()
            .enumerate()
            .min_by_key(|&(_, &v)| {
                let pos = current.iter().filter(|c| coeff_of(c, v).is_some_and(|x| x.is_positive())).count();
                let neg = current.iter().filter(|c| coeff_of(c, v).is_some_and(|x| x.is_negative())).count();
                pos * neg + pos + neg
            }) {
            Some(p) => p,
            None => break,
        };
        remaining.swap_remove(pick_idx);
        stages.push((var, current.clone()));

        let mut rest = Vec::new();
        let mut upper = Vec::new(); // c > 0:  x <= (b - rest)/c
        let mut lower = Vec::new(); // c < 0:  x >= (b - rest)/c
        for c in current.into_iter() {
            match coeff_of(&c, var) {
                None => rest.push(c),
                Some(k) if k.is_positive() => upper.push(c),
                Some(_) => lower.push(c),
            }
        }
        for u in &upper {
            let cu = coeff_of(u, var).unwrap().clone();
            for l in &lower {
                let cl = coeff_of(l, var).unwrap().clone();
                // cu > 0, cl < 0: combine to eliminate var:
                // cu * l - cl * u  (note -cl > 0)
                let mut combo: BTreeMap<usize, Rat> = BTreeMap::new();
                for (v, c) in &l.coeffs {
                    if *v != var {
                        *combo.entry(*v).or_insert_with(Rat::zero) += &cu * c;
                    }
                }
                for (v, c) in &u.coeffs {
                    if *v != var {
                        *combo.entry(*v).or_insert_with(Rat::zero) -= &cl * c;
                    }
                }
                let bound = &cu * &l.bound - &cl * &u.bound;
                let row = LinearConstraint {
                    coeffs: combo.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
                    bound,
                };
                if row.coeffs.is_empty() {
                    if row.bound.is_negative() {
                        return Feasibility::Unsat;
                    }
                } else {
                    rest.push(row);
                }
            }
        }
        current = dedupe(rest);
        if current.len() > limits.max_constraints {
            return Feasibility::Unknown;
        }
    }

    for c in &current {
        if c.coeffs.is_empty() && c.bound.is_negative() {
            return Feasibility::Unsat;
        }
    }

    // back-substitute for a witness, in reverse elimination order
    let mut assignment: Vec<Option<Rat>> = vec![None; n_vars];
    for (var, stage) in stages.iter().rev() {
        let mut lo: Option<Rat> = None;
        let mut hi: Option<Rat> = None;
        for c in stage {
            let Some(k) = coeff_of(c, *var) else { continue };
            let mut rest = c.bound.clone();
            for (v, coeff) in &c.coeffs {
                if v != var {
                    let val = assignment[*v].clone().unwrap_or_else(Rat::zero);
                    rest -= coeff * val;
                }
            }
            let limit = &rest / k;
            if k.is_positive() {
                hi = Some(match hi {
                    Some(h) if h < limit => h,
                    _ => limit,
                });
            } else {
                lo = Some(match lo {
                    Some(l) if l > limit => l,
                    _ => limit,
                });
            }
        }
        let value = match (lo, hi) {
            (Some(l), Some(h)) => (&l + &h) / rat(2.0),
            (Some(l), None) => l,
            (None, Some(h)) => h,
            (None, None) => Rat::zero(),
        };
        assignment[*var] = Some(value);
    }
    let witness: Vec<f64> =
        assignment.into_iter().map(|a| a.unwrap_or_else(Rat::zero).to_f64().unwrap_or(0.0)).collect();
    Feasibility::Sat(witness)
}

fn coeff_of(c: &LinearConstraint, var: usize) -> Option<&Rat> {
    c.coeffs.iter().find(|&&(v, _)| v == var).map(|(_, c)| c)
}

/// Convenience: `lo <= x_v <= hi`.
pub fn bounds(var: usize, lo: f64, hi: f64) -> [LinearConstraint; 2] {
    [
        LinearConstraint { coeffs: vec![(var, rat(1.0))], bound: rat(hi) },
        LinearConstraint { coeffs: vec![(var, rat(-1.0))], bound: rat(-lo) },
    ]
}

/// Convenience: `|expr - target| <= tol` for `expr = sum coeffs . x + bias`.
pub fn near(coeffs: &[(usize, f64)], bias: f64, target: f64, tol: f64) -> [LinearConstraint; 2] {
    let cs: Vec<(usize, Rat)> = coeffs.iter().map(|&(v, c)| (v, rat(c))).collect();
    let neg: Vec<(usize, Rat)> = coeffs.iter().map(|&(v, c)| (v, rat(-c))).collect();
    [
        LinearConstraint { coeffs: cs, bound: rat(target + tol - bias) },
        LinearConstraint { coeffs: neg, bound: rat(bias - (target - tol)) },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_witness(constraints: &[LinearConstraint], w: &[f64]) {
        for c in constraints {
            let lhs: f64 = c.coeffs.iter().map(|(v, k)| k.to_f64().unwrap() * w[*v]).sum();
            assert!(lhs <= c.bound.to_f64().unwrap() + 1e-9, "violated: {c:?} at {w:?}");
        }
    }

    #[test]
    fn simple_box_is_sat_with_valid_witness() {
        let mut cs = Vec::new();
        cs.extend(bounds(0, 1.0, 3.0));
        cs.extend(bounds(1, -2.0, 2.0));
        match feasible(2, &cs, &SolverLimits::default()) {
            Feasibility::Sat(w) => check_witness(&cs, &w),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn contradictory_bounds_are_unsat() {
        let cs = vec![
            LinearConstraint { coeffs: vec![(0, rat(1.0))], bound: rat(1.0) },
            LinearConstraint { coeffs: vec![(0, rat(-1.0))], bound: rat(-2.0) },
        ];
        assert_eq!(feasible(1, &cs, &SolverLimits::default()), Feasibility::Unsat);
    }

    #[test]
    fn coupled_equalities_solve() {
        // x + y ~= 10, x - y ~= 2 within 0.1
        let mut cs = Vec::new();
        cs.extend(near(&[(0, 1.0), (1, 1.0)], 0.0, 10.0, 0.1));
        cs.extend(near(&[(0, 1.0), (1, -1.0)], 0.0, 2.0, 0.1));
        match feasible(2, &cs, &SolverLimits::default()) {
            Feasibility::Sat(w) => {
                check_witness(&cs, &w);
                assert!((w[0] - 6.0).abs() < 0.2);
                assert!((w[1] - 4.0).abs() < 0.2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_triangle() {
        // x <= 0, y <= 0, x + y >= 1
        let cs = vec![
            LinearConstraint { coeffs: vec![(0, rat(1.0))], bound: rat(0.0) },
            LinearConstraint { coeffs: vec![(1, rat(1.0))], bound: rat(0.0) },
            LinearConstraint { coeffs: vec![(0, rat(-1.0)), (1, rat(-1.0))], bound: rat(-1.0) },
        ];
        assert_eq!(feasible(2, &cs, &SolverLimits::default()), Feasibility::Unsat);
    }

    #[test]
    fn unconstrained_variables_default_to_zero() {
        match feasible(3, &[], &SolverLimits::default()) {
            Feasibility::Sat(w) => assert_eq!(w, vec![0.0, 0.0, 0.0]),
            other => panic!("{other:?}"),
        }
    }

    proptest::proptest! {
        // random interval systems with a planted solution stay satisfiable,
        // and the returned witness satisfies every constraint
        #[test]
        fn planted_solutions_are_found(
            planted in proptest::collection::vec(-50.0f64..50.0, 4),
            widths in proptest::collection::vec(0.5f64..5.0, 8),
        ) {
            let mut cs = Vec::new();
            // pairwise sums constrained around the planted point
            let mut k = 0;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    if k < widths.len() {
                        let target = planted[i] + planted[j];
                        cs.extend(near(&[(i, 1.0), (j, 1.0)], 0.0, target, widths[k]));
                        k += 1;
                    }
                }
            }
            match feasible(4, &cs, &SolverLimits::default()) {
                Feasibility::Sat(w) => check_witness(&cs, &w),
                other => panic!("{other:?}"),
            }
        }
    }
}
