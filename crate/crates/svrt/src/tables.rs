//! Published per-problem performance constants: human success fractions,
//! the program-synthesis classifier under legacy and corrected parsings
//! (as success probabilities), and CNN test accuracies. N/A cells are
//! preserved as `None`. These are ingested reference numbers, never
//! recomputed.

/// Human fractions are counts of successful subjects over this denominator.
pub const HUMAN_DENOMINATOR: f64 = 20.0;

/// One problem's published numbers. `human`, `ps_*` and `cnn_best` are
/// success probabilities; the CNN columns are raw test accuracies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PublishedRow {
    pub problem_id: u32,
    pub human: f64,
    pub ps_sasquatch: f64,
    pub ps_corrected: f64,
    pub cnn_best: f64,
    pub lenet: Option<f64>,
    pub googlenet: Option<f64>,
    pub vanilla: f64,
}

pub const PUBLISHED: [PublishedRow; 23] = [
    PublishedRow { problem_id: 1, human: 0.95, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 0.3388, lenet: Some(0.57), googlenet: Some(0.50), vanilla: 0.611 },
    PublishedRow { problem_id: 2, human: 1.00, ps_sasquatch: 1.0000, ps_corrected: 0.9251, cnn_best: 1.0000, lenet: Some(1.00), googlenet: Some(1.00), vanilla: 1.000 },
    PublishedRow { problem_id: 3, human: 1.00, ps_sasquatch: 0.9917, ps_corrected: 0.9729, cnn_best: 1.0000, lenet: None, googlenet: None, vanilla: 1.000 },
    PublishedRow { problem_id: 4, human: 1.00, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 1.0000, lenet: Some(1.00), googlenet: Some(1.00), vanilla: 1.000 },
    PublishedRow { problem_id: 5, human: 0.80, ps_sasquatch: 0.9859, ps_corrected: 0.9975, cnn_best: 0.4624, lenet: Some(0.54), googlenet: Some(0.50), vanilla: 0.653 },
    PublishedRow { problem_id: 6, human: 0.40, ps_sasquatch: 0.2057, ps_corrected: 0.1551, cnn_best: 0.9806, lenet: Some(0.76), googlenet: Some(0.86), vanilla: 0.870 },
    PublishedRow { problem_id: 7, human: 0.80, ps_sasquatch: 0.9417, ps_corrected: 0.9379, cnn_best: 0.2282, lenet: Some(0.53), googlenet: Some(0.50), vanilla: 0.566 },
    PublishedRow { problem_id: 8, human: 1.00, ps_sasquatch: 0.9998, ps_corrected: 0.9997, cnn_best: 0.9995, lenet: Some(0.94), googlenet: Some(0.91), vanilla: 0.934 },
    PublishedRow { problem_id: 9, human: 0.85, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 1.0000, lenet: Some(1.00), googlenet: Some(1.00), vanilla: 0.886 },
    PublishedRow { problem_id: 10, human: 0.95, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 1.0000, lenet: Some(0.99), googlenet: Some(1.00), vanilla: 1.000 },
    PublishedRow { problem_id: 11, human: 1.00, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 1.0000, lenet: None, googlenet: None, vanilla: 1.000 },
    PublishedRow { problem_id: 12, human: 0.90, ps_sasquatch: 0.1656, ps_corrected: 0.1251, cnn_best: 1.0000, lenet: Some(0.97), googlenet: Some(1.00), vanilla: 1.000 },
    PublishedRow { problem_id: 13, human: 0.85, ps_sasquatch: 0.8891, ps_corrected: 0.9809, cnn_best: 0.9932, lenet: None, googlenet: None, vanilla: 0.897 },
    PublishedRow { problem_id: 14, human: 0.95, ps_sasquatch: 1.0000, ps_corrected: 0.9999, cnn_best: 1.0000, lenet: Some(0.90), googlenet: Some(1.00), vanilla: 0.961 },
    PublishedRow { problem_id: 15, human: 0.90, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 0.5776, lenet: Some(0.52), googlenet: Some(0.50), vanilla: 0.689 },
    PublishedRow { problem_id: 16, human: 0.55, ps_sasquatch: 0.9996, ps_corrected: 1.0000, cnn_best: 1.0000, lenet: Some(0.98), googlenet: Some(0.50), vanilla: 0.765 },
    PublishedRow { problem_id: 17, human: 0.55, ps_sasquatch: 0.4006, ps_corrected: 0.3773, cnn_best: 0.9998, lenet: Some(0.75), googlenet: Some(0.95), vanilla: 0.884 },
    PublishedRow { problem_id: 18, human: 0.85, ps_sasquatch: 0.9999, ps_corrected: 0.9994, cnn_best: 1.0000, lenet: Some(0.99), googlenet: Some(0.99), vanilla: 1.000 },
    PublishedRow { problem_id: 19, human: 0.95, ps_sasquatch: 0.9259, ps_corrected: 1.0000, cnn_best: 0.3094, lenet: Some(0.51), googlenet: Some(0.50), vanilla: 0.600 },
    PublishedRow { problem_id: 20, human: 0.95, ps_sasquatch: 0.1134, ps_corrected: 1.0000, cnn_best: 0.2282, lenet: Some(0.55), googlenet: Some(0.50), vanilla: 0.566 },
    PublishedRow { problem_id: 21, human: 0.65, ps_sasquatch: 0.1134, ps_corrected: 1.0000, cnn_best: 0.2815, lenet: Some(0.51), googlenet: Some(0.51), vanilla: 0.589 },
    PublishedRow { problem_id: 22, human: 1.00, ps_sasquatch: 1.0000, ps_corrected: 1.0000, cnn_best: 0.3724, lenet: Some(0.59), googlenet: Some(0.50), vanilla: 0.623 },
    PublishedRow { problem_id: 23, human: 1.00, ps_sasquatch: 0.9905, ps_corrected: 0.9967, cnn_best: 1.0000, lenet: Some(0.87), googlenet: Some(1.00), vanilla: 0.932 },
];

pub fn published_row(problem_id: u32) -> Option<&'static PublishedRow> {
    PUBLISHED.iter().find(|r| r.problem_id == problem_id)
}

/// Machine columns selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PublishedColumn {
    PsSasquatch,
    PsCorrected,
    CnnBest,
}

impl PublishedColumn {
    pub fn value(self, row: &PublishedRow) -> f64 {
        match self {
            PublishedColumn::PsSasquatch => row.ps_sasquatch,
            PublishedColumn::PsCorrected => row.ps_corrected,
            PublishedColumn::CnnBest => row.cnn_best,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PublishedColumn::PsSasquatch => "ps_sasquatch",
            PublishedColumn::PsCorrected => "ps_corrected",
            PublishedColumn::CnnBest => "cnn_best",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_checks_against_the_published_table() {
        let p1 = published_row(1).unwrap();
        assert_eq!(p1.human, 0.95);
        let p6 = published_row(6).unwrap();
        assert_eq!(p6.human, 0.40);
        assert_eq!(p6.ps_corrected, 0.1551);
        let p3 = published_row(3).unwrap();
        assert_eq!(p3.lenet, None);
        let p20 = published_row(20).unwrap();
        assert_eq!(p20.ps_sasquatch, 0.1134);
        assert_eq!(p20.ps_corrected, 1.0000);
        assert_eq!(p20.human, 0.95);
    }

    #[test]
    fn human_values_are_multiples_of_one_twentieth() {
        for row in &PUBLISHED {
            let scaled = row.human * 20.0;
            assert!((scaled - scaled.round()).abs() < 1e-9, "#{}", row.problem_id);
        }
    }

    #[test]
    fn covers_exactly_the_23_problems() {
        let ids: Vec<u32> = PUBLISHED.iter().map(|r| r.problem_id).collect();
        assert_eq!(ids, (1..=23).collect::<Vec<u32>>());
    }
}
