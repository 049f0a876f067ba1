//! Classifier agents pluggable into the experiment protocol: the
//! program-synthesis classifier, the AdaBoost baseline, a coin-flipping
//! chance agent and a ground-truth oracle for harness checks.

use crate::boost::{self, StumpModel};
use crate::catalog::{self, Category};
use crate::parsing::vectorize;
use crate::rng::Rng;
use crate::stats::{Agent, StatsError, TestItem, TrainExample};
use crate::synth::classify::classify;
use crate::synth::fit::FitConfig;
use crate::synth::search::{synthesize, Budget, SynthError};
use crate::synth::Program;

/// The program-synthesis classifier: one program per category, decisions by
/// compatibility and description length.
pub struct PsAgent {
    budget: Budget,
    fit_cfg: FitConfig,
    programs: Option<(Program, Program)>,
}

impl PsAgent {
    pub fn new(budget: Budget, fit_cfg: FitConfig) -> Self {
        PsAgent { budget, fit_cfg, programs: None }
    }

    pub fn with_defaults() -> Self {
        Self::new(Budget::default(), FitConfig::default())
    }

    /// Synthesized (positive, negative) programs, after training.
    pub fn programs(&self) -> Option<&(Program, Program)> {
        self.programs.as_ref()
    }
}

impl Agent for PsAgent {
    fn name(&self) -> &'static str {
        "ps"
    }

    fn train(&mut self, examples: &[TrainExample], _rng: &mut Rng) -> Result<(), StatsError> {
        let side = |cat: Category| -> Vec<crate::parsing::Parsing> {
            examples.iter().filter(|e| e.category == cat).map(|e| e.parsing.clone()).collect()
        };
        let pos = side(Category::Positive);
        let neg = side(Category::Negative);
        if pos.is_empty() || neg.is_empty() {
            return Err(StatsError::BadArgs("training needs both categories".into()));
        }
        let synth_one = |parsings: &[crate::parsing::Parsing]| -> Result<Program, StatsError> {
            match synthesize(parsings, &self.budget, &self.fit_cfg) {
                Ok(p) => Ok(p),
                // fall back to the trivial accept-all program at maximal cost
                Err(SynthError::NoProgramFound) => Ok(Program::trivial_accept_all()),
                Err(e) => Err(StatsError::Agent(e.to_string())),
            }
        };
        self.programs = Some((synth_one(&pos)?, synth_one(&neg)?));
        Ok(())
    }

    fn classify(&self, item: &TestItem, rng: &mut Rng) -> Result<Category, StatsError> {
        let (p_pos, p_neg) =
            self.programs.as_ref().ok_or_else(|| StatsError::Agent("classify before train".into()))?;
        let d = classify(&item.parsing, p_pos, p_neg, rng, &self.fit_cfg)
            .map_err(|e| StatsError::Agent(e.to_string()))?;
        Ok(d.category)
    }
}

/// Discrete AdaBoost over vectorized parsings.
pub struct BoostAgent {
    n_stumps: usize,
    max_shapes: usize,
    model: Option<StumpModel>,
}

impl BoostAgent {
    pub fn new(n_stumps: usize) -> Self {
        BoostAgent { n_stumps, max_shapes: 0, model: None }
    }

    /// CSV dump of the trained model, if any.
    pub fn model_csv(&self) -> Option<String> {
        self.model.as_ref().map(|m| m.to_csv())
    }
}

impl Agent for BoostAgent {
    fn name(&self) -> &'static str {
        "adaboost"
    }

    fn train(&mut self, examples: &[TrainExample], _rng: &mut Rng) -> Result<(), StatsError> {
        // leave headroom for spurious glitch shapes in degraded test parsings
        self.max_shapes =
            examples.iter().map(|e| e.parsing.len()).max().unwrap_or(0) + 2;
        let mut vectors = Vec::with_capacity(examples.len());
        let mut labels = Vec::with_capacity(examples.len());
        for e in examples {
            vectors.push(
                vectorize(&e.parsing, self.max_shapes).map_err(|e| StatsError::Agent(e.to_string()))?,
            );
            labels.push(e.category.signum());
        }
        self.model = Some(
            boost::train(&vectors, &labels, self.n_stumps)
                .map_err(|e| StatsError::Agent(e.to_string()))?,
        );
        Ok(())
    }

    fn classify(&self, item: &TestItem, _rng: &mut Rng) -> Result<Category, StatsError> {
        let model =
            self.model.as_ref().ok_or_else(|| StatsError::Agent("classify before train".into()))?;
        let v = vectorize(&item.parsing, self.max_shapes)
            .map_err(|e| StatsError::Agent(e.to_string()))?;
        let (label, _) = model.predict(&v).map_err(|e| StatsError::Agent(e.to_string()))?;
        Ok(if label == 1 { Category::Positive } else { Category::Negative })
    }
}

/// Uniform random decisions; the protocol's chance reference.
#[derive(Default)]
pub struct ChanceAgent;

impl ChanceAgent {
    pub fn new() -> ChanceAgent {
        ChanceAgent
    }
}

impl Agent for ChanceAgent {
    fn name(&self) -> &'static str {
        "chance"
    }

    fn train(&mut self, _examples: &[TrainExample], _rng: &mut Rng) -> Result<(), StatsError> {
        Ok(())
    }

    fn classify(&self, _item: &TestItem, rng: &mut Rng) -> Result<Category, StatsError> {
        Ok(if rng.chance(0.5) { Category::Positive } else { Category::Negative })
    }
}

/// Classifies from ground truth via the catalog's rule oracle. A harness
/// reference, not a fair competitor.
pub struct OracleAgent {
    problem_id: u32,
}

impl OracleAgent {
    pub fn new(problem_id: u32) -> Self {
        OracleAgent { problem_id }
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn train(&mut self, _examples: &[TrainExample], _rng: &mut Rng) -> Result<(), StatsError> {
        Ok(())
    }

    fn classify(&self, item: &TestItem, _rng: &mut Rng) -> Result<Category, StatsError> {
        catalog::rule_oracle(self.problem_id, &item.truth).map_err(StatsError::Catalog)
    }
}
