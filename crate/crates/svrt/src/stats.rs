//! Cross-protocol performance statistics.
//!
//! Machines are scored by test accuracy alpha; humans by the fraction beta
//! of subjects who produced 7 correct answers in a row within 35 trials.
//! The two are bridged by `beta_star(alpha)`: the probability that a
//! trained, non-updating classifier of accuracy alpha passes the human
//! criterion, computed from an absorbing Markov chain over current-run
//! length. The alternative reinterpretation `alpha_star(beta) = (1+beta)/2`
//! is provided for comparison.
//!
//! The module also runs the experiment protocol (fresh datasets per
//! repetition, train-then-predict agents with no test-time updates),
//! sweeps learning curves, and aggregates per-type group reports.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::canvas::GroundTruth;
use crate::catalog::{self, CatalogError, Category};
use crate::parsing::{legacy_parsing, DegradationProfile, Parsing};
use crate::rng::Rng;
use crate::tables::PUBLISHED;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("probability {0} outside [0, 1]")]
    Domain(f64),
    #[error("bad arguments: {0}")]
    BadArgs(String),
    #[error("agent failure: {0}")]
    Agent(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Success-run states tracked by the chain (7 correct in a row).
pub const DEFAULT_RUN: usize = 7;
/// Trials available in the human protocol.
pub const DEFAULT_TRIALS: usize = 35;

/// Column-stochastic transition matrix over run-length states 0..=k: a
/// correct answer advances one state, a mistake falls back to 0, and state
/// k absorbs.
pub fn transition_matrix(alpha: f64, k: usize) -> Vec<Vec<f64>> {
    let n = k + 1;
    let mut m = vec![vec![0.0; n]; n];
    for col in 0..k {
        m[0][col] = 1.0 - alpha;
        m[col + 1][col] = alpha;
    }
    m[k][k] = 1.0;
    m
}

/// State distribution after `trials` steps from the all-mass-at-zero start.
pub fn chain_distribution(alpha: f64, k: usize, trials: usize) -> Result<Vec<f64>, StatsError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(StatsError::Domain(alpha));
    }
    if k < 1 {
        return Err(StatsError::BadArgs("need at least one run state".into()));
    }
    let m = transition_matrix(alpha, k);
    let n = k + 1;
    let mut q = vec![0.0; n];
    q[0] = 1.0;
    for _ in 0..trials {
        let mut next = vec![0.0; n];
        for row in 0..n {
            for (col, qc) in q.iter().enumerate() {
                next[row] += m[row][col] * qc;
            }
        }
        q = next;
    }
    Ok(q)
}

/// Probability that an accuracy-`alpha` classifier passes the human
/// criterion: `k` correct in a row within `trials` answers.
pub fn beta_star_general(alpha: f64, k: usize, trials: usize) -> Result<f64, StatsError> {
    Ok(chain_distribution(alpha, k, trials)?[k])
}

pub fn beta_star(alpha: f64) -> Result<f64, StatsError> {
    beta_star_general(alpha, DEFAULT_RUN, DEFAULT_TRIALS)
}

/// The alternative reinterpretation of human performance.
pub fn alpha_star(beta: f64) -> Result<f64, StatsError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(StatsError::Domain(beta));
    }
    Ok((1.0 + beta) / 2.0)
}

/// Published human success fraction for one problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HumanRecord {
    pub problem_id: u32,
    pub beta: f64,
}

pub fn human_records() -> Vec<HumanRecord> {
    PUBLISHED.iter().map(|r| HumanRecord { problem_id: r.problem_id, beta: r.human }).collect()
}

// ---------------------------------------------------------------------------
// Experiment protocol
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct TrainExample {
    pub parsing: Parsing,
    pub category: Category,
}

/// A test image: agents read the parsing; only ground-truth oracles may
/// look at `truth`.
#[derive(Clone, Debug)]
pub struct TestItem {
    pub parsing: Parsing,
    pub truth: GroundTruth,
}

pub trait Agent: Send {
    fn name(&self) -> &'static str;
    /// Train once; no further updates happen at test time.
    fn train(&mut self, examples: &[TrainExample], rng: &mut Rng) -> Result<(), StatsError>;
    fn classify(&self, item: &TestItem, rng: &mut Rng) -> Result<Category, StatsError>;
}

#[derive(Clone, Debug)]
pub struct ProtocolConfig {
    pub train_pairs: usize,
    pub n_test: usize,
    pub n_reps: usize,
    /// Degradation applied to every parsing handed to the agent.
    pub profile: DegradationProfile,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            train_pairs: 3,
            n_test: 94,
            n_reps: 40,
            profile: DegradationProfile::none(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PerfRecord {
    pub problem_id: u32,
    pub agent: String,
    /// Test accuracy, averaged over repetitions.
    pub alpha: f64,
    /// Derived success probability, recomputed from `alpha`.
    pub beta_star: f64,
    pub stderr: f64,
    pub n_reps: usize,
    pub per_rep: Vec<f64>,
    pub train_pairs: usize,
}

/// Run the full protocol: per repetition, a fresh dataset, one training
/// pass, then classification of every test image. Repetitions run in
/// parallel with per-repetition streams and reduce deterministically.
pub fn run_protocol<A, F>(
    problem_id: u32,
    make_agent: F,
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<PerfRecord, StatsError>
where
    A: Agent,
    F: Fn() -> A + Sync,
{
    if cfg.n_reps == 0 {
        return Err(StatsError::BadArgs("need at least one repetition".into()));
    }
    let root = Rng::new(seed).derive_str("protocol").derive(problem_id as u64);
    let name = make_agent().name().to_string();
    let per_rep: Vec<Result<f64, StatsError>> = (0..cfg.n_reps)
        .into_par_iter()
        .map(|rep| run_one_rep(problem_id, &make_agent, cfg, &root, rep))
        .collect();
    let mut accs = Vec::with_capacity(cfg.n_reps);
    for r in per_rep {
        accs.push(r?);
    }
    let alpha = accs.iter().sum::<f64>() / accs.len() as f64;
    let stderr = if accs.len() > 1 {
        let var =
            accs.iter().map(|a| (a - alpha).powi(2)).sum::<f64>() / (accs.len() - 1) as f64;
        (var / accs.len() as f64).sqrt()
    } else {
        0.0
    };
    Ok(PerfRecord {
        problem_id,
        agent: name,
        alpha,
        beta_star: beta_star(alpha)?,
        stderr,
        n_reps: accs.len(),
        per_rep: accs,
        train_pairs: cfg.train_pairs,
    })
}

fn run_one_rep<A, F>(
    problem_id: u32,
    make_agent: &F,
    cfg: &ProtocolConfig,
    root: &Rng,
    rep: usize,
) -> Result<f64, StatsError>
where
    A: Agent,
    F: Fn() -> A + Sync,
{
    let rep_rng = root.derive(rep as u64);
    let dataset_seed = rep_rng.derive_str("dataset").next_u64();
    let dataset = catalog::make_dataset(problem_id, cfg.train_pairs, cfg.n_test, dataset_seed)?;

    let mut degrade_rng = rep_rng.derive_str("degrade");
    let train: Vec<TrainExample> = dataset
        .train
        .iter()
        .map(|item| TrainExample {
            parsing: legacy_parsing(&item.canvas.truth, &cfg.profile, &mut degrade_rng),
            category: item.category,
        })
        .collect();

    let mut agent = make_agent();
    let mut agent_rng = rep_rng.derive_str("agent");
    agent.train(&train, &mut agent_rng)?;

    let mut correct = 0usize;
    for item in &dataset.test {
        let test = TestItem {
            parsing: legacy_parsing(&item.canvas.truth, &cfg.profile, &mut degrade_rng),
            truth: item.canvas.truth.clone(),
        };
        if agent.classify(&test, &mut agent_rng)? == item.category {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.test.len() as f64)
}

impl PerfRecord {
    /// Success probabilities recomputed per repetition. The headline
    /// `beta_star` applies the chain to the overall accuracy; both views
    /// are kept.
    pub fn per_rep_beta_star(&self) -> Vec<f64> {
        self.per_rep.iter().map(|&a| beta_star(a).unwrap_or(f64::NAN)).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct CurvePoint {
    pub train_pairs: usize,
    pub alpha: f64,
    pub stderr: f64,
}

/// Accuracy as a function of the number of training pairs.
pub fn learning_curve<A, F>(
    problem_id: u32,
    make_agent: F,
    t_values: &[usize],
    cfg: &ProtocolConfig,
    seed: u64,
) -> Result<Vec<CurvePoint>, StatsError>
where
    A: Agent,
    F: Fn() -> A + Sync,
{
    if t_values.is_empty() {
        return Err(StatsError::BadArgs("need at least one training-set size".into()));
    }
    let mut out = Vec::with_capacity(t_values.len());
    for (i, &t) in t_values.iter().enumerate() {
        let point_cfg = ProtocolConfig { train_pairs: t, ..cfg.clone() };
        let rec = run_protocol(problem_id, &make_agent, &point_cfg, seed.wrapping_add(i as u64))?;
        out.push(CurvePoint { train_pairs: t, alpha: rec.alpha, stderr: rec.stderr });
    }
    Ok(out)
}

/// gnuplot-compatible data block for one learning curve. With
/// `max_stderr_only`, error bars are kept only on the point with the
/// largest standard error, mimicking the published plot style; the
/// default emits every point's stderr.
pub fn curve_data_styled(
    problem_id: u32,
    agent: &str,
    points: &[CurvePoint],
    max_stderr_only: bool,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# problem {problem_id} agent {agent}");
    let _ = writeln!(out, "# train_pairs alpha stderr");
    let keep = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.stderr.partial_cmp(&b.1.stderr).unwrap())
        .map(|(i, _)| i);
    for (i, p) in points.iter().enumerate() {
        let stderr = if max_stderr_only && Some(i) != keep { 0.0 } else { p.stderr };
        let _ = writeln!(out, "{} {:.6} {:.6}", p.train_pairs, p.alpha, stderr);
    }
    out
}

pub fn curve_data(problem_id: u32, agent: &str, points: &[CurvePoint]) -> String {
    curve_data_styled(problem_id, agent, points, false)
}

// ---------------------------------------------------------------------------
// Group reports
// ---------------------------------------------------------------------------

/// Minimal input for grouping: one success probability per problem.
#[derive(Clone, Copy, Debug)]
pub struct GroupInput {
    pub problem_id: u32,
    pub beta_star: f64,
}

impl From<&PerfRecord> for GroupInput {
    fn from(r: &PerfRecord) -> Self {
        GroupInput { problem_id: r.problem_id, beta_star: r.beta_star }
    }
}

#[derive(Clone, Debug)]
pub struct TypeRow {
    pub ss: u8,
    pub lr: u8,
    pub problem_ids: Vec<u32>,
    pub human_mean: f64,
    /// Mean over the provided records; `None` marks missing data for the
    /// type.
    pub machine_mean: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GroupReport {
    pub rows: Vec<TypeRow>,
    pub per_problem: Vec<(u32, f64, Option<f64>)>,
    pub overall_human: f64,
    pub overall_machine: Option<f64>,
}

/// Average human beta and machine beta-star per (SS, LR) type, plus the
/// per-problem comparison and overall means.
pub fn group_report(records: &[GroupInput], human: &[HumanRecord]) -> GroupReport {
    let mut types: Vec<(u8, u8, Vec<u32>)> = Vec::new();
    for &(id, ss, lr) in &catalog::PROBLEM_TYPES {
        match types.iter_mut().find(|(s, l, _)| *s == ss && *l == lr) {
            Some((_, _, v)) => v.push(id),
            None => types.push((ss, lr, vec![id])),
        }
    }
    types.sort_by_key(|&(ss, lr, _)| (lr, ss));

    let human_of = |id: u32| human.iter().find(|h| h.problem_id == id).map(|h| h.beta);
    let machine_of = |id: u32| {
        records.iter().find(|r| r.problem_id == id).map(|r| r.beta_star)
    };

    let rows: Vec<TypeRow> = types
        .into_iter()
        .map(|(ss, lr, ids)| {
            let hs: Vec<f64> = ids.iter().filter_map(|&id| human_of(id)).collect();
            let ms: Vec<f64> = ids.iter().filter_map(|&id| machine_of(id)).collect();
            TypeRow {
                ss,
                lr,
                human_mean: mean(&hs).unwrap_or(f64::NAN),
                machine_mean: if ms.len() == ids.len() { mean(&ms) } else { None },
                problem_ids: ids,
            }
        })
        .collect();

    let per_problem: Vec<(u32, f64, Option<f64>)> = (1..=23)
        .map(|id| (id, human_of(id).unwrap_or(f64::NAN), machine_of(id)))
        .collect();

    let all_h: Vec<f64> = human.iter().map(|h| h.beta).collect();
    let all_m: Vec<f64> = records.iter().map(|r| r.beta_star).collect();
    GroupReport {
        rows,
        per_problem,
        overall_human: mean(&all_h).unwrap_or(f64::NAN),
        overall_machine: mean(&all_m),
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

impl GroupReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ss,lr,problems,human_mean_beta,machine_mean_beta_star\n");
        for row in &self.rows {
            let ids: Vec<String> = row.problem_ids.iter().map(|i| i.to_string()).collect();
            let machine = match row.machine_mean {
                Some(m) => format!("{m:.4}"),
                None => "missing".into(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{:.4},{}",
                row.ss,
                row.lr,
                ids.join("+"),
                row.human_mean,
                machine
            );
        }
        let overall_machine = match self.overall_machine {
            Some(m) => format!("{m:.4}"),
            None => "missing".into(),
        };
        let _ = writeln!(out, "overall,,,{:.4},{}", self.overall_human, overall_machine);
        out
    }
}

/// CSV rows for performance records: problem, agent, alpha, beta_star,
/// stderr, ss, lr.
pub fn perf_csv(records: &[PerfRecord]) -> String {
    let mut out = String::from("problem,agent,alpha,beta_star,stderr,ss,lr\n");
    for r in records {
        let t = catalog::ss_lr(r.problem_id).ok();
        let (ss, lr) = t.map(|t| (t.ss, t.lr)).unwrap_or((255, 255));
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{},{}",
            r.problem_id, r.agent, r.alpha, r.beta_star, r.stderr, ss, lr
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{ChanceAgent, OracleAgent};

    #[test]
    fn beta_star_degenerate_cases_are_exact() {
        assert_eq!(beta_star(1.0).unwrap(), 1.0);
        assert_eq!(beta_star(0.0).unwrap(), 0.0);
    }

    #[test]
    fn beta_star_at_chance_matches_the_published_level() {
        let b = beta_star(0.5).unwrap();
        assert!((b - 0.1134).abs() <= 1e-4, "beta_star(0.5) = {b}");
    }

    #[test]
    fn beta_star_rejects_out_of_range() {
        assert!(matches!(beta_star(1.5), Err(StatsError::Domain(_))));
        assert!(matches!(beta_star(-0.1), Err(StatsError::Domain(_))));
    }

    #[test]
    fn alpha_star_formula() {
        assert_eq!(alpha_star(0.0).unwrap(), 0.5);
        assert_eq!(alpha_star(1.0).unwrap(), 1.0);
        assert_eq!(alpha_star(0.8).unwrap(), 0.9);
        assert!(matches!(alpha_star(2.0), Err(StatsError::Domain(_))));
    }

    #[test]
    fn transition_matrix_columns_sum_to_one_and_chain_stays_stochastic() {
        for i in 0..=100 {
            let alpha = i as f64 / 100.0;
            let m = transition_matrix(alpha, DEFAULT_RUN);
            for col in 0..=DEFAULT_RUN {
                let s: f64 = (0..=DEFAULT_RUN).map(|row| m[row][col]).sum();
                assert!((s - 1.0).abs() < 1e-12, "column {col} sums to {s}");
            }
            for trials in [0, 1, 7, 35] {
                let q = chain_distribution(alpha, DEFAULT_RUN, trials).unwrap();
                let s: f64 = q.iter().sum();
                assert!((s - 1.0).abs() < 1e-9);
                assert!(q.iter().all(|&p| p >= -1e-12));
            }
        }
    }

    #[test]
    fn beta_star_is_monotone_with_a_single_crossover() {
        // numerically checked: beta_star stays below alpha up to a single
        // crossover (between 0.6 and 0.75 for the 7-in-35 protocol) and
        // above it afterwards; it does NOT stay below alpha on all of
        // (0, 1)
        let mut last = 0.0;
        let mut crossed = false;
        for i in 0..=100 {
            let alpha = i as f64 / 100.0;
            let b = beta_star(alpha).unwrap();
            assert!(b >= last - 1e-12, "not monotone at {alpha}");
            if b > alpha + 1e-12 {
                crossed = true;
            } else if alpha < 1.0 {
                assert!(!crossed, "beta_star re-crossed alpha at {alpha}");
            }
            last = b;
        }
        assert!(crossed, "beta_star never rises above alpha");
        assert!(beta_star(0.6).unwrap() < 0.6);
        assert!(beta_star(0.75).unwrap() > 0.75);
    }

    #[test]
    fn alpha_star_reinterpretation_underestimates_machine_success() {
        // for every accuracy in (0.5, 1), the success probability implied
        // by inverting the alternative reinterpretation (2*alpha - 1) sits
        // strictly below beta_star: same-beta humans get assigned a higher
        // accuracy, same-alpha machines a lower success rate
        for i in 51..100 {
            let alpha = i as f64 / 100.0;
            let recovered_beta = (2.0 * alpha - 1.0).max(0.0);
            assert!(
                beta_star(alpha).unwrap() > recovered_beta,
                "ordering fails at alpha = {alpha}"
            );
        }
    }

    #[test]
    fn human_records_come_in_twentieths() {
        for h in human_records() {
            let scaled = h.beta * crate::tables::HUMAN_DENOMINATOR;
            assert!((scaled - scaled.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_agent_scores_perfectly() {
        let cfg = ProtocolConfig { n_reps: 3, n_test: 10, ..Default::default() };
        let rec = run_protocol(4, || OracleAgent::new(4), &cfg, 5).unwrap();
        assert_eq!(rec.alpha, 1.0);
        assert_eq!(rec.beta_star, 1.0);
        assert_eq!(rec.stderr, 0.0);
    }

    #[test]
    fn chance_agent_hovers_at_half() {
        let cfg = ProtocolConfig { n_reps: 10, n_test: 40, ..Default::default() };
        let rec = run_protocol(1, ChanceAgent::new, &cfg, 6).unwrap();
        assert!((rec.alpha - 0.5).abs() <= 0.08, "alpha {}", rec.alpha);
        assert!((rec.beta_star - 0.1134).abs() <= 0.12, "beta_star {}", rec.beta_star);
    }

    #[test]
    fn results_are_identical_regardless_of_job_count() {
        let cfg = ProtocolConfig { n_reps: 4, n_test: 6, ..Default::default() };
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| run_protocol(1, ChanceAgent::new, &cfg, 31).unwrap());
        let b = many.install(|| run_protocol(1, ChanceAgent::new, &cfg, 31).unwrap());
        assert_eq!(a.per_rep, b.per_rep);
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn protocol_is_reproducible() {
        let cfg = ProtocolConfig { n_reps: 4, n_test: 8, ..Default::default() };
        let a = run_protocol(2, ChanceAgent::new, &cfg, 77).unwrap();
        let b = run_protocol(2, ChanceAgent::new, &cfg, 77).unwrap();
        assert_eq!(a.per_rep, b.per_rep);
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn oracle_learning_curve_is_flat_at_one() {
        let cfg = ProtocolConfig { n_reps: 2, n_test: 6, ..Default::default() };
        let pts = learning_curve(4, || OracleAgent::new(4), &[1, 2, 3], &cfg, 9).unwrap();
        assert_eq!(pts.len(), 3);
        for p in pts {
            assert_eq!(p.alpha, 1.0);
            assert_eq!(p.stderr, 0.0);
        }
    }

    #[test]
    fn group_report_reproduces_published_means() {
        let inputs: Vec<GroupInput> = PUBLISHED
            .iter()
            .map(|r| GroupInput { problem_id: r.problem_id, beta_star: r.ps_corrected })
            .collect();
        let report = group_report(&inputs, &human_records());
        assert!((report.overall_human - 0.8630).abs() <= 1e-4, "{}", report.overall_human);
        let m = report.overall_machine.unwrap();
        assert!((m - 0.8899).abs() <= 1e-4, "{m}");
        assert_eq!(report.rows.len(), 8);
    }

    #[test]
    fn group_report_with_perfect_records_averages_to_one() {
        let inputs: Vec<GroupInput> =
            (1..=23).map(|id| GroupInput { problem_id: id, beta_star: 1.0 }).collect();
        let report = group_report(&inputs, &human_records());
        for row in &report.rows {
            assert_eq!(row.machine_mean, Some(1.0));
        }
        assert_eq!(report.overall_machine, Some(1.0));
    }

    #[test]
    fn group_report_flags_missing_rows() {
        let inputs = vec![GroupInput { problem_id: 1, beta_star: 0.9 }];
        let report = group_report(&inputs, &human_records());
        let missing = report.rows.iter().filter(|r| r.machine_mean.is_none()).count();
        assert!(missing >= 7);
        assert!(report.to_csv().contains("missing"));
    }
}
