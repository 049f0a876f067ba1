//! The 23 SVRT problems: paired generative procedures (positive/negative
//! category) with their (SS, LR) type labels, plus a ground-truth rule
//! oracle and dataset assembly.
//!
//! SS (shape specification) and LR (location relation) each range over four
//! complexity levels; the null type (0,0) is inadmissible, leaving 15
//! admissible types of which the 23 problems occupy 8.

mod problems;

use crate::canvas::ImageCanvas;
use crate::canvas::GroundTruth;
use crate::contour::ContourError;
use crate::place::PlaceError;
use crate::rng::Rng;
use thiserror::Error;

pub use problems::PROBLEM_101;

/// Default canvas edge, in pixels.
pub const CANVAS_SIZE: u32 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Positive,
    Negative,
}

impl Category {
    pub fn label(self) -> &'static str {
        match self {
            Category::Positive => "positive",
            Category::Negative => "negative",
        }
    }

    pub fn signum(self) -> i8 {
        match self {
            Category::Positive => 1,
            Category::Negative => -1,
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// (SS, LR) complexity levels per the problem taxonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProblemType {
    pub ss: u8,
    pub lr: u8,
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown problem #{0}")]
    UnknownProblem(u32),
    #[error("invalid dataset request: {0}")]
    BadArgs(String),
    #[error("problem #{problem}: ground truth satisfies {satisfied} category rules")]
    AmbiguousRule { problem: u32, satisfied: usize },
    #[error("problem #{0}: generation failed after contour regeneration retries")]
    GenerationFailed(u32),
    #[error(transparent)]
    Place(#[from] PlaceError),
    #[error(transparent)]
    Contour(#[from] ContourError),
}

/// (problem id, SS level, LR level) for the original 23 problems.
pub const PROBLEM_TYPES: [(u32, u8, u8); 23] = [
    (1, 2, 0),
    (2, 0, 1),
    (3, 0, 1),
    (4, 0, 1),
    (5, 2, 0),
    (6, 2, 3),
    (7, 2, 0),
    (8, 2, 1),
    (9, 1, 2),
    (10, 0, 2),
    (11, 0, 1),
    (12, 1, 3),
    (13, 1, 2),
    (14, 0, 2),
    (15, 2, 0),
    (16, 3, 0),
    (17, 2, 3),
    (18, 0, 2),
    (19, 2, 0),
    (20, 2, 0),
    (21, 2, 0),
    (22, 2, 0),
    (23, 0, 1),
];

/// Generation options. Problem #101 (identity under rotation) is an
/// extension kept off by default.
#[derive(Clone, Debug)]
pub struct GenOpts {
    pub canvas: u32,
    pub extension: bool,
}

impl Default for GenOpts {
    fn default() -> Self {
        GenOpts { canvas: CANVAS_SIZE, extension: false }
    }
}

fn known_problem(problem_id: u32, opts: &GenOpts) -> Result<(), CatalogError> {
    let known = (1..=23).contains(&problem_id) || (opts.extension && problem_id == PROBLEM_101);
    if known {
        Ok(())
    } else {
        Err(CatalogError::UnknownProblem(problem_id))
    }
}

/// The (SS, LR) type of a problem, per the published taxonomy grid.
pub fn ss_lr(problem_id: u32) -> Result<ProblemType, CatalogError> {
    if problem_id == PROBLEM_101 {
        // extension: identical only after rotating
        return Ok(ProblemType { ss: 3, lr: 0 });
    }
    PROBLEM_TYPES
        .iter()
        .find(|&&(id, _, _)| id == problem_id)
        .map(|&(_, ss, lr)| ProblemType { ss, lr })
        .ok_or(CatalogError::UnknownProblem(problem_id))
}

/// Generate one example image of the requested category.
pub fn generate_example(
    problem_id: u32,
    category: Category,
    rng: &mut Rng,
) -> Result<ImageCanvas, CatalogError> {
    generate_example_opts(problem_id, category, rng, &GenOpts::default())
}

pub fn generate_example_opts(
    problem_id: u32,
    category: Category,
    rng: &mut Rng,
    opts: &GenOpts,
) -> Result<ImageCanvas, CatalogError> {
    known_problem(problem_id, opts)?;
    problems::generate(problem_id, category, rng, opts.canvas)
}

/// Recover the generating category from ground truth. Errors with
/// `AmbiguousRule` when the truth satisfies neither or both category rules,
/// which signals a generator bug.
pub fn rule_oracle(problem_id: u32, truth: &GroundTruth) -> Result<Category, CatalogError> {
    if !(1..=23).contains(&problem_id) && problem_id != PROBLEM_101 {
        return Err(CatalogError::UnknownProblem(problem_id));
    }
    let pos = problems::positive_rule(problem_id, truth);
    let neg = problems::negative_rule(problem_id, truth);
    match (pos, neg) {
        (true, false) => Ok(Category::Positive),
        (false, true) => Ok(Category::Negative),
        (p, n) => Err(CatalogError::AmbiguousRule {
            problem: problem_id,
            satisfied: usize::from(p) + usize::from(n),
        }),
    }
}

/// One generated image together with its category and stream tag.
#[derive(Clone, Debug)]
pub struct DatasetItem {
    pub canvas: ImageCanvas,
    pub category: Category,
    pub seed_tag: u64,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub problem_id: u32,
    pub train: Vec<DatasetItem>,
    pub test: Vec<DatasetItem>,
}

/// Build disjoint train/test sets: `n_train_pairs` positive/negative pairs
/// and a balanced test set of `n_test` images (half per category).
pub fn make_dataset(
    problem_id: u32,
    n_train_pairs: usize,
    n_test: usize,
    seed: u64,
) -> Result<Dataset, CatalogError> {
    make_dataset_opts(problem_id, n_train_pairs, n_test, seed, &GenOpts::default())
}

pub fn make_dataset_opts(
    problem_id: u32,
    n_train_pairs: usize,
    n_test: usize,
    seed: u64,
    opts: &GenOpts,
) -> Result<Dataset, CatalogError> {
    known_problem(problem_id, opts)?;
    if n_train_pairs < 1 {
        return Err(CatalogError::BadArgs("need at least one training pair".into()));
    }
    if n_test < 2 || !n_test.is_multiple_of(2) {
        return Err(CatalogError::BadArgs(format!(
            "test size must be an even number >= 2, got {n_test}"
        )));
    }
    let root = Rng::new(seed).derive_str("dataset").derive(problem_id as u64);
    let train_root = root.derive(0);
    let test_root = root.derive(1);

    let mut train = Vec::with_capacity(2 * n_train_pairs);
    for k in 0..(2 * n_train_pairs) {
        let category = if k % 2 == 0 { Category::Positive } else { Category::Negative };
        let mut rng = train_root.derive(k as u64);
        let canvas = generate_example_opts(problem_id, category, &mut rng, opts)?;
        train.push(DatasetItem { canvas, category, seed_tag: k as u64 });
    }
    let mut test = Vec::with_capacity(n_test);
    for k in 0..n_test {
        let category = if k % 2 == 0 { Category::Positive } else { Category::Negative };
        let mut rng = test_root.derive(k as u64);
        let canvas = generate_example_opts(problem_id, category, &mut rng, opts)?;
        test.push(DatasetItem { canvas, category, seed_tag: k as u64 });
    }
    Ok(Dataset { problem_id, train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn taxonomy_spot_checks_match_published_grid() {
        assert_eq!(ss_lr(16).unwrap(), ProblemType { ss: 3, lr: 0 });
        assert_eq!(ss_lr(12).unwrap(), ProblemType { ss: 1, lr: 3 });
        assert_eq!(ss_lr(2).unwrap(), ProblemType { ss: 0, lr: 1 });
    }

    #[test]
    fn taxonomy_partitions_the_23_problems() {
        let ids: BTreeSet<u32> = PROBLEM_TYPES.iter().map(|&(id, _, _)| id).collect();
        assert_eq!(ids, (1..=23).collect::<BTreeSet<u32>>());
        for &(_, ss, lr) in &PROBLEM_TYPES {
            assert!(ss <= 3 && lr <= 3);
            assert!(!(ss == 0 && lr == 0), "null type is inadmissible");
        }
        // the 23 problems fall into exactly 8 distinct types
        let types: BTreeSet<(u8, u8)> = PROBLEM_TYPES.iter().map(|&(_, ss, lr)| (ss, lr)).collect();
        assert_eq!(types.len(), 8);
    }

    #[test]
    fn unknown_problem_is_rejected() {
        assert!(matches!(ss_lr(24), Err(CatalogError::UnknownProblem(24))));
        assert!(matches!(ss_lr(0), Err(CatalogError::UnknownProblem(0))));
        let mut rng = Rng::new(1);
        assert!(matches!(
            generate_example(24, Category::Positive, &mut rng),
            Err(CatalogError::UnknownProblem(24))
        ));
        // #101 requires the extension flag
        assert!(matches!(
            generate_example(PROBLEM_101, Category::Positive, &mut rng),
            Err(CatalogError::UnknownProblem(_))
        ));
        let opts = GenOpts { extension: true, ..GenOpts::default() };
        assert!(generate_example_opts(PROBLEM_101, Category::Positive, &mut rng, &opts).is_ok());
    }

    #[test]
    fn oracle_round_trips_every_problem_and_category() {
        for problem in 1..=23u32 {
            for category in [Category::Positive, Category::Negative] {
                for seed in 0..12u64 {
                    let mut rng = Rng::new(seed).derive(problem as u64).derive(match category {
                        Category::Positive => 0,
                        Category::Negative => 1,
                    });
                    let canvas = generate_example(problem, category, &mut rng)
                        .unwrap_or_else(|e| panic!("#{problem} {category} seed {seed}: {e}"));
                    let got = rule_oracle(problem, &canvas.truth)
                        .unwrap_or_else(|e| panic!("#{problem} {category} seed {seed}: {e}"));
                    assert_eq!(got, category, "#{problem} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn dataset_counts_and_balance() {
        let ds = make_dataset(1, 3, 10, 42).unwrap();
        assert_eq!(ds.train.len(), 6);
        assert_eq!(ds.test.len(), 10);
        let pos = ds.test.iter().filter(|i| i.category == Category::Positive).count();
        assert_eq!(pos, 5);
    }

    #[test]
    fn dataset_at_protocol_scale_is_balanced() {
        let ds = make_dataset(1, 3, 94, 7).unwrap();
        assert_eq!(ds.train.len(), 6);
        assert_eq!(ds.test.len(), 94);
        let pos = ds.test.iter().filter(|i| i.category == Category::Positive).count();
        assert_eq!(pos, 47);
    }

    #[test]
    fn dataset_rejects_bad_args() {
        assert!(matches!(make_dataset(1, 0, 10, 1), Err(CatalogError::BadArgs(_))));
        assert!(matches!(make_dataset(1, 1, 7, 1), Err(CatalogError::BadArgs(_))));
    }

    #[test]
    fn different_seeds_give_disjoint_images() {
        let a = make_dataset(4, 1, 4, 7).unwrap();
        let b = make_dataset(4, 1, 4, 8).unwrap();
        let hash = |c: &ImageCanvas| -> u64 {
            let mut h: u64 = 0xcbf29ce484222325;
            for &v in &c.bitmap {
                h ^= v as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
            h
        };
        let ha: BTreeSet<u64> = a.train.iter().chain(a.test.iter()).map(|i| hash(&i.canvas)).collect();
        let hb: BTreeSet<u64> = b.train.iter().chain(b.test.iter()).map(|i| hash(&i.canvas)).collect();
        assert!(ha.is_disjoint(&hb));
    }

    #[test]
    fn generation_is_deterministic() {
        let a = make_dataset(20, 2, 4, 99).unwrap();
        let b = make_dataset(20, 2, 4, 99).unwrap();
        for (x, y) in a.test.iter().zip(b.test.iter()) {
            assert_eq!(x.canvas.bitmap, y.canvas.bitmap);
        }
    }
}
