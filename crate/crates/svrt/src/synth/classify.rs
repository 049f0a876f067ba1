//! Two-program compatibility classification.
//!
//! Decision rule: (1) if exactly one category's program satisfies the test
//! parsing, choose it; (2) if both, choose the smaller description length
//! (cost plus residual); (3) if neither, choose the smaller violation
//! count; (4) on an exact tie, flip the seeded coin. The margin is the
//! score difference of whichever rule decided.

use super::dsl::{DslError, Program, MAX_COST};
use super::fit::{fit, FitConfig};
use crate::catalog::Category;
use crate::parsing::Parsing;
use crate::rng::Rng;

#[derive(Clone, Copy, Debug)]
pub struct Decision {
    pub category: Category,
    pub margin: f64,
}

pub fn classify(
    test: &Parsing,
    p_pos: &Program,
    p_neg: &Program,
    rng: &mut Rng,
    cfg: &FitConfig,
) -> Result<Decision, DslError> {
    let fp = fit(p_pos, test, cfg)?;
    let fneg = fit(p_neg, test, cfg)?;
    let score_pos = p_pos.cost_bits() + fp.residual_bits;
    let score_neg = p_neg.cost_bits() + fneg.residual_bits;

    let decision = match (fp.satisfiable, fneg.satisfiable) {
        (true, false) => Decision { category: Category::Positive, margin: MAX_COST - score_pos },
        (false, true) => Decision { category: Category::Negative, margin: MAX_COST - score_neg },
        (true, true) => {
            let diff = score_neg - score_pos;
            if diff.abs() < 1e-9 {
                coin(rng)
            } else if diff > 0.0 {
                Decision { category: Category::Positive, margin: diff }
            } else {
                Decision { category: Category::Negative, margin: -diff }
            }
        }
        (false, false) => {
            let diff = fneg.violations as i64 - fp.violations as i64;
            if diff == 0 {
                coin(rng)
            } else if diff > 0 {
                Decision { category: Category::Positive, margin: diff as f64 }
            } else {
                Decision { category: Category::Negative, margin: -diff as f64 }
            }
        }
    };
    Ok(decision)
}

fn coin(rng: &mut Rng) -> Decision {
    let category = if rng.chance(0.5) { Category::Positive } else { Category::Negative };
    Decision { category, margin: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parsing::ShapeRecord;
    use crate::synth::dsl::{IdExpr, LatentRole, LinExpr, Statement};

    fn one_draw(n_ids: usize, id: usize) -> Program {
        let mut p = Program::new();
        p.n_id_vars = n_ids;
        p.latent_roles = vec![LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag];
        p.statements.push(Statement::Draw {
            id: IdExpr(id),
            x: LinExpr::latent(0),
            y: LinExpr::latent(1),
            scale: LinExpr::latent(2),
        });
        p
    }

    fn single(scale: f64) -> Parsing {
        Parsing {
            shapes: vec![ShapeRecord { x: 40.0, y: 40.0, identity: 0, scale }],
            ..Default::default()
        }
    }

    #[test]
    fn rule_one_prefers_the_only_satisfying_program() {
        let fits = one_draw(1, 0);
        let mut wrong = one_draw(1, 0);
        // a second draw makes the cardinality mismatch
        wrong.latent_roles.extend([LatentRole::Coord, LatentRole::Coord, LatentRole::ScaleMag]);
        wrong.statements.push(Statement::Draw {
            id: IdExpr(0),
            x: LinExpr::latent(3),
            y: LinExpr::latent(4),
            scale: LinExpr::latent(5),
        });
        let mut rng = Rng::new(1);
        let d = classify(&single(1.0), &fits, &wrong, &mut rng, &FitConfig::default()).unwrap();
        assert_eq!(d.category, Category::Positive);
        let d = classify(&single(1.0), &wrong, &fits, &mut rng, &FitConfig::default()).unwrap();
        assert_eq!(d.category, Category::Negative);
    }

    #[test]
    fn rule_two_prefers_the_cheaper_description() {
        let cheap = one_draw(1, 0);
        let mut dear = one_draw(1, 0);
        // an extra latent the program never needs: same fit, higher cost
        dear.latent_roles.push(LatentRole::Coord);
        let mut rng = Rng::new(2);
        let d = classify(&single(1.0), &cheap, &dear, &mut rng, &FitConfig::default()).unwrap();
        assert_eq!(d.category, Category::Positive);
        // latent declaration (16) plus its residual encoding (10)
        assert!((d.margin - 26.0).abs() < 1e-9, "margin {}", d.margin);
        let d = classify(&single(1.0), &dear, &cheap, &mut rng, &FitConfig::default()).unwrap();
        assert_eq!(d.category, Category::Negative);
    }

    #[test]
    fn exact_ties_flip_a_fair_seeded_coin() {
        let a = one_draw(1, 0);
        let b = one_draw(1, 0);
        let mut positives = 0;
        for seed in 0..1000 {
            let mut rng = Rng::new(seed);
            let d = classify(&single(1.0), &a, &b, &mut rng, &FitConfig::default()).unwrap();
            assert_eq!(d.margin, 0.0);
            if d.category == Category::Positive {
                positives += 1;
            }
        }
        let freq = positives as f64 / 1000.0;
        assert!((freq - 0.5).abs() <= 0.05, "tie frequency {freq}");
    }
}
