//! Dataset container, stratified splitting, feature standardization, and
//! stratified k-fold grid search.
//!
//! Label convention: class 1 is the minority, class 0 the majority. A dataset
//! where the minority outnumbers the majority is accepted but flagged so
//! callers can warn.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, RngStream};
use crate::math;
use crate::metrics;
use crate::nn::{Activation, MlpModel};
use crate::trainer::{self, TrainConfig};

/// Feature matrix plus binary labels and cached class counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<u8>,
    n0: usize,
    n1: usize,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<u8>) -> Result<Dataset> {
        if x.rows() != y.len() {
            return Err(Error::Data(format!(
                "{} feature rows vs {} labels",
                x.rows(),
                y.len()
            )));
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(Error::Data(format!("label {bad} outside {{0, 1}}")));
        }
        let n1 = y.iter().filter(|&&v| v == 1).count();
        let n0 = y.len() - n1;
        Ok(Dataset { x, y, n0, n1 })
    }

    pub fn features(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> &[u8] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.x.cols()
    }

    /// Majority count (label 0).
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// Minority count (label 1).
    pub fn n1(&self) -> usize {
        self.n1
    }

    /// `n0 / n1`; infinite when no minority samples exist.
    pub fn imbalance_ratio(&self) -> f64 {
        self.n0 as f64 / self.n1 as f64
    }

    pub fn has_both_classes(&self) -> bool {
        self.n0 > 0 && self.n1 > 0
    }

    /// True when label 1 is not actually the minority (callers should warn,
    /// not fail).
    pub fn minority_convention_violated(&self) -> bool {
        self.n1 > self.n0
    }

    /// New dataset holding the listed rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let x = self.x.select_rows(indices)?;
        let y = indices.iter().map(|&i| self.y[i]).collect();
        Dataset::new(x, y)
    }
}

/// Disjoint, exhaustive train/test partition.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub ratio: f64,
}

/// Stratified split: per class, `round(count * ratio)` samples go to train
/// (clamped so both sides keep at least one), drawn without replacement.
pub fn stratified_split(data: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Param(format!("split ratio {ratio} outside (0, 1)")));
    }
    if data.n0() < 2 || data.n1() < 2 {
        return Err(Error::Data(format!(
            "stratified split needs at least two samples per class, got n0={}, n1={}",
            data.n0(),
            data.n1()
        )));
    }
    let mut rng = RngStream::new(seed);
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.y[i] == class).collect();
        let count = idx.len();
        let k = (math::round(count as f64 * ratio) as usize).clamp(1, count - 1);
        rng.shuffle(&mut idx);
        train_idx.extend_from_slice(&idx[..k]);
        test_idx.extend_from_slice(&idx[k..]);
    }
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok(SplitPair {
        train: data.subset(&train_idx)?,
        test: data.subset(&test_idx)?,
        ratio,
    })
}

/// Per-feature affine transform fitted on training data.
///
/// Uses population mean/std; zero-variance columns are centered but not
/// scaled.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Standardizer {
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Dataset) -> Standardizer {
        let x = train.features();
        let n = x.rows() as f64;
        let mut means = vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for (m, v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; x.cols()];
        for i in 0..x.rows() {
            for (j, v) in x.row(i).iter().enumerate() {
                let d = v - means[j];
                vars[j] += d * d;
            }
        }
        let stds = vars.iter().map(|&v| math::sqrt(v / n)).collect();
        Standardizer { means, stds }
    }

    pub fn from_parts(means: Vec<f64>, stds: Vec<f64>) -> Result<Standardizer> {
        if means.len() != stds.len() {
            return Err(Error::Shape("means/stds length mismatch".into()));
        }
        Ok(Standardizer { means, stds })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.num_features() != self.means.len() {
            return Err(Error::Shape(format!(
                "dataset has {} features, transform expects {}",
                ds.num_features(),
                self.means.len()
            )));
        }
        let x = ds.features();
        let mut data = Vec::with_capacity(x.rows() * x.cols());
        for i in 0..x.rows() {
            for (j, v) in x.row(i).iter().enumerate() {
                let centered = v - self.means[j];
                data.push(if self.stds[j] > 0.0 {
                    centered / self.stds[j]
                } else {
                    centered
                });
            }
        }
        Dataset::new(Matrix::from_vec(x.rows(), x.cols(), data)?, ds.labels().to_vec())
    }
}

/// Fits on `train`, applies the same transform to `train` and every dataset
/// in `others` (no leakage: statistics come from `train` alone).
pub fn standardize(
    train: &Dataset,
    others: &[&Dataset],
) -> Result<(Dataset, Vec<Dataset>, Standardizer)> {
    if train.is_empty() {
        return Err(Error::Data("cannot standardize an empty dataset".into()));
    }
    let tf = Standardizer::fit(train);
    let train_t = tf.transform(train)?;
    let mut others_t = Vec::with_capacity(others.len());
    for ds in others {
        others_t.push(tf.transform(ds)?);
    }
    Ok((train_t, others_t, tf))
}

/// One grid-search candidate: hidden layer widths and L2 coefficient.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCandidate {
    pub hidden: Vec<usize>,
    pub beta: f64,
}

/// Score used to rank grid candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SelectionMetric {
    GMean,
    F1,
}

impl SelectionMetric {
    fn score(&self, report: &metrics::MetricReport) -> f64 {
        match self {
            SelectionMetric::GMean => report.gmean,
            SelectionMetric::F1 => report.f1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SelectionMetric::GMean => "gmean",
            SelectionMetric::F1 => "f1",
        }
    }
}

/// Settings for [`kfold_grid_search`].
#[derive(Debug, Clone)]
pub struct GridSearchConfig {
    pub k: usize,
    pub metric: SelectionMetric,
    /// Standardize within each fold (fit on the k-1 training folds only).
    pub standardize: bool,
    pub seed: u64,
    pub activation: Activation,
}

/// Outcome of a grid search: per-candidate mean validation score and the
/// selected index.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSearchResult {
    pub candidates: Vec<GridCandidate>,
    pub mean_scores: Vec<f64>,
    pub selected: usize,
}

impl GridSearchResult {
    pub fn selected_candidate(&self) -> &GridCandidate {
        &self.candidates[self.selected]
    }
}

/// Stratified k-fold index partition: per class, shuffled indices are dealt
/// round-robin, so fold sizes differ by at most one per class.
pub fn stratified_folds(data: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Param(format!("k must be at least 2, got {k}")));
    }
    if data.n0() < k || data.n1() < k {
        return Err(Error::Data(format!(
            "each class needs at least k={k} samples, got n0={}, n1={}",
            data.n0(),
            data.n1()
        )));
    }
    let mut rng = RngStream::new(seed);
    let mut folds = vec![Vec::new(); k];
    for class in [1u8, 0u8] {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data.labels()[i] == class).collect();
        rng.shuffle(&mut idx);
        for (pos, i) in idx.into_iter().enumerate() {
            folds[pos % k].push(i);
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Cross-validated grid search.
///
/// Every candidate is scored on the same folds with the same per-fold init
/// streams, so duplicate candidates tie exactly and the tie-break (smaller
/// beta, then fewer hidden units, then listing order) decides.
pub fn kfold_grid_search(
    data: &Dataset,
    candidates: &[GridCandidate],
    base: &TrainConfig,
    cfg: &GridSearchConfig,
) -> Result<GridSearchResult> {
    if candidates.is_empty() {
        return Err(Error::Param("empty candidate grid".into()));
    }
    let folds = stratified_folds(data, cfg.k, cfg.seed)?;
    let all: Vec<usize> = (0..data.len()).collect();

    let mut mean_scores = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let mut acc = 0.0;
        for (fold_id, fold) in folds.iter().enumerate() {
            let train_idx: Vec<usize> = all
                .iter()
                .copied()
                .filter(|i| !fold.contains(i))
                .collect();
            let mut train_ds = data.subset(&train_idx)?;
            let mut val_ds = data.subset(fold)?;
            if cfg.standardize {
                let (t, mut o, _) = standardize(&train_ds, &[&val_ds])?;
                train_ds = t;
                val_ds = o.pop().unwrap();
            }

            let mut sizes = vec![train_ds.num_features()];
            sizes.extend_from_slice(&cand.hidden);
            sizes.push(1);
            let mut init_rng =
                RngStream::new(RngStream::derive_seed(cfg.seed, 1000 + fold_id as u64));
            let mut model = MlpModel::init(&sizes, cfg.activation, &mut init_rng)?;

            let mut train_cfg = base.clone();
            train_cfg.beta = cand.beta;
            trainer::train(&mut model, &train_ds, &train_cfg)?;

            let probs = trainer::predict_proba(&model, val_ds.features())?;
            let preds = trainer::classify(&probs, base.decision_threshold);
            let cm = metrics::confusion(val_ds.labels(), &preds)?;
            acc += cfg.metric.score(&metrics::metric_report(&cm));
        }
        mean_scores.push(acc / cfg.k as f64);
    }

    let mut selected = 0;
    for i in 1..candidates.len() {
        if better_candidate(
            (mean_scores[i], &candidates[i]),
            (mean_scores[selected], &candidates[selected]),
        ) {
            selected = i;
        }
    }
    Ok(GridSearchResult {
        candidates: candidates.to_vec(),
        mean_scores,
        selected,
    })
}

/// Strictly better: higher score, then smaller beta, then fewer hidden units,
/// then lexicographically smaller widths. Equal keys keep the earlier entry.
fn better_candidate(a: (f64, &GridCandidate), b: (f64, &GridCandidate)) -> bool {
    if a.0 != b.0 {
        return a.0 > b.0;
    }
    if a.1.beta != b.1.beta {
        return a.1.beta < b.1.beta;
    }
    let (ua, ub) = (
        a.1.hidden.iter().sum::<usize>(),
        b.1.hidden.iter().sum::<usize>(),
    );
    if ua != ub {
        return ua < ub;
    }
    a.1.hidden < b.1.hidden
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trainer::BatchMode;

    fn toy_dataset(n1: usize, n0: usize, seed: u64) -> Dataset {
        // Two Gaussian blobs, minority at -2, majority at +2.
        let mut rng = RngStream::new(seed);
        let mut rows = rng.sample_normal(-2.0, 1.0, n1).unwrap();
        rows.extend(rng.sample_normal(2.0, 1.0, n0).unwrap());
        let x = Matrix::from_vec(n1 + n0, 1, rows).unwrap();
        let mut y = vec![1u8; n1];
        y.extend(vec![0u8; n0]);
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn counts_and_convention() {
        let ds = toy_dataset(2, 2, 1);
        assert_eq!((ds.n0(), ds.n1()), (2, 2));
        assert!(!ds.minority_convention_violated());
        let flipped = toy_dataset(5, 2, 1);
        assert!(flipped.minority_convention_violated());
    }

    #[test]
    fn split_sizes_match_rounding() {
        let ds = toy_dataset(100, 1000, 3);
        let pair = stratified_split(&ds, 0.75, 9).unwrap();
        assert_eq!((pair.train.n1(), pair.train.n0()), (75, 750));
        assert_eq!((pair.test.n1(), pair.test.n0()), (25, 250));
    }

    #[test]
    fn split_is_deterministic_and_a_partition() {
        let ds = toy_dataset(20, 80, 4);
        let a = stratified_split(&ds, 0.6, 11).unwrap();
        let b = stratified_split(&ds, 0.6, 11).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        assert_eq!(a.train.len() + a.test.len(), ds.len());

        // Every original row appears exactly once across the two sides.
        let count_row = |needle: &[f64]| {
            let mut c = 0;
            for side in [&a.train, &a.test] {
                for i in 0..side.len() {
                    if side.features().row(i) == needle {
                        c += 1;
                    }
                }
            }
            c
        };
        for i in 0..ds.len() {
            assert_eq!(count_row(ds.features().row(i)), 1, "row {i}");
        }
    }

    #[test]
    fn split_preserves_imbalance_ratio_within_one_sample() {
        for (n1, n0, ratio) in [(30usize, 300usize, 0.75), (11, 97, 0.5), (9, 41, 0.8)] {
            let ds = toy_dataset(n1, n0, 7);
            let pair = stratified_split(&ds, ratio, 21).unwrap();
            let expect_n1 = (n1 as f64 * ratio).round();
            let expect_n0 = (n0 as f64 * ratio).round();
            assert!((pair.train.n1() as f64 - expect_n1).abs() <= 1.0);
            assert!((pair.train.n0() as f64 - expect_n0).abs() <= 1.0);
        }
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let ds = toy_dataset(1, 50, 2);
        assert!(matches!(
            stratified_split(&ds, 0.75, 1),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn standardize_centers_and_scales_train_only() {
        let ds = toy_dataset(50, 150, 5);
        let shifted = {
            // Same shape, different location: column means must not be zero
            // after applying the train transform.
            let mut rng = RngStream::new(99);
            let rows = rng.sample_normal(10.0, 1.0, 60).unwrap();
            let x = Matrix::from_vec(60, 1, rows).unwrap();
            Dataset::new(x, vec![0u8; 60]).unwrap()
        };
        let (train_t, others_t, tf) = standardize(&ds, &[&shifted]).unwrap();

        let n = train_t.len() as f64;
        let mean: f64 = (0..train_t.len())
            .map(|i| train_t.features().get(i, 0))
            .sum::<f64>()
            / n;
        let var: f64 = (0..train_t.len())
            .map(|i| {
                let d = train_t.features().get(i, 0) - mean;
                d * d
            })
            .sum::<f64>()
            / n;
        assert!(mean.abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);

        let shifted_mean: f64 = (0..60).map(|i| others_t[0].features().get(i, 0)).sum::<f64>() / 60.0;
        assert!(shifted_mean.abs() > 1.0, "leakage check: shifted test mean {shifted_mean}");

        // Stored transform reproduces the transformed train set.
        assert_eq!(tf.transform(&ds).unwrap(), train_t);
    }

    #[test]
    fn constant_column_is_centered_not_scaled() {
        let x = Matrix::from_rows(&[vec![3.0, 1.0], vec![3.0, 2.0], vec![3.0, 3.0], vec![3.0, 4.0]])
            .unwrap();
        let ds = Dataset::new(x, vec![1, 1, 0, 0]).unwrap();
        let tf = Standardizer::fit(&ds);
        assert_eq!(tf.stds()[0], 0.0);
        let t = tf.transform(&ds).unwrap();
        for i in 0..4 {
            assert_eq!(t.features().get(i, 0), 0.0);
        }
    }

    #[test]
    fn folds_partition_the_dataset() {
        let ds = toy_dataset(13, 47, 6);
        let folds = stratified_folds(&ds, 4, 17).unwrap();
        let mut seen = vec![0usize; ds.len()];
        for f in &folds {
            for &i in f {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        for f in &folds {
            let minority = f.iter().filter(|&&i| ds.labels()[i] == 1).count();
            assert!((3..=4).contains(&minority), "minority per fold: {minority}");
        }
    }

    #[test]
    fn fold_errors() {
        let ds = toy_dataset(3, 47, 6);
        assert!(matches!(stratified_folds(&ds, 4, 1), Err(Error::Data(_))));
        assert!(matches!(stratified_folds(&ds, 1, 1), Err(Error::Param(_))));
    }

    fn quick_cfg(lambda: f64) -> TrainConfig {
        TrainConfig {
            lambda,
            learning_rate: 0.5,
            max_epochs: 400,
            beta: 0.0,
            batch_mode: BatchMode::FullBatch,
            convergence_tol: 1e-5,
            seed: 0,
            decision_threshold: 0.5,
            refine_output_bias: true,
        }
    }

    #[test]
    fn single_candidate_is_selected() {
        let ds = toy_dataset(16, 64, 8);
        let cands = vec![GridCandidate {
            hidden: vec![],
            beta: 0.0,
        }];
        let cfg = GridSearchConfig {
            k: 4,
            metric: SelectionMetric::GMean,
            standardize: false,
            seed: 5,
            activation: Activation::Sigmoid,
        };
        let result = kfold_grid_search(&ds, &cands, &quick_cfg(0.8), &cfg).unwrap();
        assert_eq!(result.selected, 0);
        assert_eq!(result.mean_scores.len(), 1);
    }

    #[test]
    fn duplicate_candidates_tie_to_the_first_by_order() {
        let ds = toy_dataset(16, 64, 8);
        let cands = vec![
            GridCandidate {
                hidden: vec![4],
                beta: 0.1,
            },
            GridCandidate {
                hidden: vec![4],
                beta: 0.1,
            },
        ];
        let cfg = GridSearchConfig {
            k: 4,
            metric: SelectionMetric::GMean,
            standardize: false,
            seed: 5,
            activation: Activation::Sigmoid,
        };
        let result = kfold_grid_search(&ds, &cands, &quick_cfg(0.8), &cfg).unwrap();
        assert_eq!(result.mean_scores[0], result.mean_scores[1]);
        assert_eq!(result.selected, 0);
    }

    #[test]
    fn heavy_l2_loses_the_grid_to_the_unregularized_candidate() {
        // Overlapping 3-d Gaussian classes; beta = 10 on the summed loss of
        // a few hundred samples forces the weights toward zero and the
        // validation G-mean collapses relative to beta = 0.
        let mut rng = RngStream::new(91);
        let ds = crate::keyeq::SimProtocol::sim2()
            .draw_dataset(60, 540, &mut rng)
            .unwrap();
        let cands = vec![
            GridCandidate {
                hidden: vec![10],
                beta: 0.0,
            },
            GridCandidate {
                hidden: vec![10],
                beta: 10.0,
            },
        ];
        let mut base = TrainConfig::new(lambda_from_alpha_local(ds.n0(), ds.n1()));
        base.learning_rate = 4.0;
        base.max_epochs = 600;
        base.convergence_tol = 1e-5;
        let cfg = GridSearchConfig {
            k: 4,
            metric: SelectionMetric::GMean,
            standardize: false,
            seed: 7,
            activation: Activation::Sigmoid,
        };
        let result = kfold_grid_search(&ds, &cands, &base, &cfg).unwrap();
        assert!(
            result.mean_scores[0] > result.mean_scores[1],
            "beta=0 scored {} vs beta=10 {}",
            result.mean_scores[0],
            result.mean_scores[1]
        );
        assert_eq!(result.selected, 0);
    }

    fn lambda_from_alpha_local(n0: usize, n1: usize) -> f64 {
        crate::loss::lambda_from_alpha(1.0, n0, n1).unwrap()
    }

    #[test]
    fn empty_grid_is_rejected() {
        let ds = toy_dataset(16, 64, 8);
        let cfg = GridSearchConfig {
            k: 4,
            metric: SelectionMetric::GMean,
            standardize: false,
            seed: 5,
            activation: Activation::Sigmoid,
        };
        assert!(matches!(
            kfold_grid_search(&ds, &[], &quick_cfg(0.8), &cfg),
            Err(Error::Param(_))
        ));
    }
}
