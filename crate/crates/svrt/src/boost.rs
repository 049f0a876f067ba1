//! Discrete AdaBoost over decision stumps on vectorized parsings.
//!
//! Each round selects the stump (feature, threshold, polarity) minimizing
//! the weighted training error; thresholds come from midpoints of sorted
//! unique feature values, making training fully deterministic. Boosting
//! stops early on a zero-error or no-better-than-chance round.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoostError {
    #[error("training requires both labels, got a single class")]
    DegenerateInput,
    #[error("training requires at least 2 examples, got {0}")]
    TooFewExamples(usize),
    #[error("vector length {got} does not match the training layout {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("examples have inconsistent dimensions")]
    RaggedInput,
}

/// `predict = polarity if value > threshold else -polarity`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub weight: f64,
}

impl Stump {
    fn apply(&self, v: &[f64]) -> f64 {
        let raw = if v[self.feature] > self.threshold { 1.0 } else { -1.0 };
        raw * self.polarity as f64
    }
}

#[derive(Clone, Debug)]
pub struct StumpModel {
    pub stumps: Vec<Stump>,
    pub n_features: usize,
    pub n_rounds: usize,
}

impl StumpModel {
    /// Signed boosting score; the label is its sign, ties go to +1.
    pub fn score(&self, v: &[f64]) -> Result<f64, BoostError> {
        if v.len() != self.n_features {
            return Err(BoostError::DimensionMismatch { got: v.len(), expected: self.n_features });
        }
        Ok(self.stumps.iter().map(|s| s.weight * s.apply(v)).sum())
    }

    pub fn predict(&self, v: &[f64]) -> Result<(i8, f64), BoostError> {
        let score = self.score(v)?;
        Ok((if score < 0.0 { -1 } else { 1 }, score))
    }

    /// CSV dump: one row per round.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("round,feature,threshold,polarity,weight\n");
        for (round, s) in self.stumps.iter().enumerate() {
            out.push_str(&format!(
                "{round},{},{},{},{}\n",
                s.feature, s.threshold, s.polarity, s.weight
            ));
        }
        out
    }
}

/// Train discrete AdaBoost for up to `n_stumps` rounds.
pub fn train(vectors: &[Vec<f64>], labels: &[i8], n_stumps: usize) -> Result<StumpModel, BoostError> {
    if vectors.len() < 2 {
        return Err(BoostError::TooFewExamples(vectors.len()));
    }
    let n_features = vectors[0].len();
    if vectors.iter().any(|v| v.len() != n_features) {
        return Err(BoostError::RaggedInput);
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(BoostError::DegenerateInput);
    }
    let m = vectors.len();
    let mut weights = vec![1.0 / m as f64; m];
    let mut stumps = Vec::new();

    // per-feature sorted example order, computed once
    let mut order: Vec<Vec<usize>> = Vec::with_capacity(n_features);
    for f in 0..n_features {
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| vectors[a][f].partial_cmp(&vectors[b][f]).unwrap());
        order.push(idx);
    }

    for _round in 0..n_stumps {
        let mut best: Option<(f64, Stump)> = None;
        for f in 0..n_features {
            let idx = &order[f];
            // error of "predict +1 when value > threshold", threshold below
            // all values: all predicted +1
            let mut err_plus: f64 =
                (0..m).map(|i| if labels[i] == 1 { 0.0 } else { weights[i] }).sum();
            let mut k = 0;
            while k < m {
                // advance over a run of equal values, flipping their side
                let v = vectors[idx[k]][f];
                let mut j = k;
                while j < m && vectors[idx[j]][f] == v {
                    let i = idx[j];
                    // moving example i from the "> threshold" side to the
                    // "<= threshold" side
                    if labels[i] == 1 {
                        err_plus += weights[i];
                    } else {
                        err_plus -= weights[i];
                    }
                    j += 1;
                }
                let threshold = if j < m { (v + vectors[idx[j]][f]) / 2.0 } else { v + 1.0 };
                for (err, polarity) in [(err_plus, 1i8), (1.0 - err_plus, -1i8)] {
                    if best.as_ref().is_none_or(|(b, _)| err < *b - 1e-15) {
                        best = Some((err, Stump { feature: f, threshold, polarity, weight: 0.0 }));
                    }
                }
                k = j;
            }
        }
        let (err, mut stump) = best.expect("at least one candidate stump");
        if err >= 0.5 {
            break; // no stump beats chance on the reweighted sample
        }
        let bounded = err.max(1e-12);
        stump.weight = 0.5 * ((1.0 - bounded) / bounded).ln();
        // reweight: up-weight mistakes, down-weight hits
        let mut norm = 0.0;
        for i in 0..m {
            let pred = stump.apply(&vectors[i]);
            weights[i] *= (-stump.weight * pred * labels[i] as f64).exp();
            norm += weights[i];
        }
        for w in weights.iter_mut() {
            *w /= norm;
        }
        stumps.push(stump);
        if err <= 1e-12 {
            break; // perfect stump; further rounds are redundant
        }
    }

    let n_rounds = stumps.len();
    Ok(StumpModel { stumps, n_features, n_rounds })
}

/// Fraction of examples the model labels correctly.
pub fn accuracy(model: &StumpModel, vectors: &[Vec<f64>], labels: &[i8]) -> Result<f64, BoostError> {
    let mut hits = 0usize;
    for (v, &y) in vectors.iter().zip(labels.iter()) {
        if model.predict(v)?.0 == y {
            hits += 1;
        }
    }
    Ok(hits as f64 / vectors.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn training_error(model: &StumpModel, xs: &[Vec<f64>], ys: &[i8]) -> f64 {
        1.0 - accuracy(model, xs, ys).unwrap()
    }

    #[test]
    fn separable_1d_data_trains_to_zero_error() {
        let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let ys: Vec<i8> = (0..20).map(|i| if i < 10 { -1 } else { 1 }).collect();
        let model = train(&xs, &ys, 16).unwrap();
        assert_eq!(training_error(&model, &xs, &ys), 0.0);
        assert!(model.n_rounds <= 2, "separable data needs few rounds");
    }

    #[test]
    fn random_labels_stay_near_chance_on_fresh_data() {
        let mut rng = Rng::new(17);
        let train_xs: Vec<Vec<f64>> =
            (0..100).map(|_| vec![rng.next_f64(), rng.next_f64()]).collect();
        let train_ys: Vec<i8> = (0..100).map(|_| if rng.chance(0.5) { 1 } else { -1 }).collect();
        let model = train(&train_xs, &train_ys, 64).unwrap();
        // Monte Carlo oracle on 1000 fresh points with independent labels
        let mut hits = 0;
        for _ in 0..1000 {
            let v = vec![rng.next_f64(), rng.next_f64()];
            let y: i8 = if rng.chance(0.5) { 1 } else { -1 };
            if model.predict(&v).unwrap().0 == y {
                hits += 1;
            }
        }
        let acc = hits as f64 / 1000.0;
        assert!((acc - 0.5).abs() <= 0.05, "test accuracy {acc}");
    }

    #[test]
    fn xor_pattern_is_boosted_to_zero_training_error() {
        let mut rng = Rng::new(3);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        // the four XOR corners replicated with jitter
        for &(a, b) in &[(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)] {
            for _ in 0..10 {
                xs.push(vec![a + rng.range_f64(-0.05, 0.05), b + rng.range_f64(-0.05, 0.05)]);
                ys.push(if (a > 0.5) != (b > 0.5) { 1 } else { -1 });
            }
        }
        let model = train(&xs, &ys, 200).unwrap();
        // brute-force verification of every training point
        for (v, &y) in xs.iter().zip(ys.iter()) {
            assert_eq!(model.predict(v).unwrap().0, y);
        }
    }

    #[test]
    fn training_error_is_non_increasing_in_rounds() {
        let mut rng = Rng::new(29);
        let xs: Vec<Vec<f64>> =
            (0..60).map(|_| (0..5).map(|_| rng.next_f64()).collect()).collect();
        let ys: Vec<i8> = xs
            .iter()
            .map(|v| if v[0] + 0.3 * v[2] > 0.6 || v[4] > 0.9 { 1 } else { -1 })
            .collect();
        let mut last = 1.0;
        for rounds in [1, 2, 4, 8, 16, 32, 64] {
            let model = train(&xs, &ys, rounds).unwrap();
            let err = training_error(&model, &xs, &ys);
            assert!(err <= last + 1e-12, "error rose at {rounds} rounds: {err} > {last}");
            last = err;
        }
    }

    #[test]
    fn every_selected_stump_beats_chance_on_its_round() {
        // re-run training, recomputing each round's weighted error
        let mut rng = Rng::new(5);
        let xs: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.next_f64(), rng.next_f64()]).collect();
        let ys: Vec<i8> = xs.iter().map(|v| if v[0] > v[1] { 1 } else { -1 }).collect();
        let model = train(&xs, &ys, 32).unwrap();
        let m = xs.len();
        let mut weights = vec![1.0 / m as f64; m];
        for stump in &model.stumps {
            let err: f64 = (0..m)
                .filter(|&i| stump.apply(&xs[i]) != ys[i] as f64)
                .map(|i| weights[i])
                .sum();
            assert!(err < 0.5, "round stump error {err}");
            let mut norm = 0.0;
            for i in 0..m {
                weights[i] *= (-stump.weight * stump.apply(&xs[i]) * ys[i] as f64).exp();
                norm += weights[i];
            }
            for w in weights.iter_mut() {
                *w /= norm;
            }
        }
    }

    #[test]
    fn degenerate_and_mismatched_inputs_error() {
        let xs = vec![vec![1.0], vec![2.0]];
        assert!(matches!(train(&xs, &[1, 1], 4), Err(BoostError::DegenerateInput)));
        let model = train(&xs, &[1, -1], 4).unwrap();
        assert!(matches!(
            model.predict(&[1.0, 2.0]),
            Err(BoostError::DimensionMismatch { got: 2, expected: 1 })
        ));
    }

    #[test]
    fn empty_model_ties_to_plus_one() {
        let model = StumpModel { stumps: vec![], n_features: 1, n_rounds: 0 };
        assert_eq!(model.predict(&[5.0]).unwrap(), (1, 0.0));
    }

    #[test]
    fn single_stump_follows_its_polarity() {
        let model = StumpModel {
            stumps: vec![Stump { feature: 0, threshold: 1.0, polarity: -1, weight: 2.0 }],
            n_features: 1,
            n_rounds: 1,
        };
        assert_eq!(model.predict(&[2.0]).unwrap().0, -1);
        assert_eq!(model.predict(&[0.0]).unwrap().0, 1);
    }

    #[test]
    fn csv_dump_layout() {
        let model = StumpModel {
            stumps: vec![Stump { feature: 3, threshold: 0.5, polarity: 1, weight: 1.25 }],
            n_features: 8,
            n_rounds: 1,
        };
        assert_eq!(model.to_csv(), "round,feature,threshold,polarity,weight\n0,3,0.5,1,1.25\n");
    }
}
