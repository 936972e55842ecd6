//! Gradient-trained regressor objective.
//!
//! A two-hidden-layer tanh network is trained by plain mini-batch gradient
//! descent on a bundled synthetic regression set, reporting validation RMSE
//! after every epoch. The four positional dimensions of an assignment are
//! read as (batch size, first hidden width, learning rate, second hidden
//! width), so each one has a real effect on the trajectory: batch size sets
//! the update granularity, the widths set capacity, and the learning rate
//! can be pushed into divergence. Weight initialization draws from the
//! per-evaluation seed, which is what makes repeated evaluations of the same
//! assignment vary.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::eval::{Objective, RmseCurve};
use crate::seeds;
use crate::space::Assignment;
use crate::Result;

/// Bundled dataset shape: points per split, input width, label noise.
pub const BUNDLED_TRAIN: usize = 64;
pub const BUNDLED_VALID: usize = 32;
pub const BUNDLED_INPUT_DIM: usize = 3;
pub const BUNDLED_NOISE: f64 = 0.05;
pub const BUNDLED_DATASET_SEED: u64 = 213;

// Sub-stream labels under one dataset or evaluation seed.
const DATASET_STREAM: u64 = 100;
const INIT_STREAM: u64 = 101;
const SHUFFLE_STREAM: u64 = 102;

/// A fixed regression dataset with disjoint train/validation splits.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x_train: Vec<Vec<f64>>,
    pub y_train: Vec<f64>,
    pub x_valid: Vec<Vec<f64>>,
    pub y_valid: Vec<f64>,
}

impl Dataset {
    pub fn n_train(&self) -> usize {
        self.y_train.len()
    }

    pub fn input_dim(&self) -> usize {
        self.x_train.first().map_or(0, Vec::len)
    }
}

/// Draws a reproducible dataset from a quadratic-polynomial ground truth
/// `y = c₀ + Σ aⱼxⱼ + Σ bⱼxⱼ² + noise·ε`, inputs uniform on [−1, 1].
pub fn generate_regression_dataset(
    n_train: usize,
    n_valid: usize,
    input_dim: usize,
    noise: f64,
    dataset_seed: u64,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(&[DATASET_STREAM, dataset_seed]));
    let intercept: f64 = rng.random_range(-1.0..1.0);
    let linear: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let quad: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();

    let mut draw_split = |n: usize| {
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let x: Vec<f64> = (0..input_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let clean: f64 = intercept
                + x.iter()
                    .enumerate()
                    .map(|(j, &v)| linear[j] * v + quad[j] * v * v)
                    .sum::<f64>();
            let eps: f64 = StandardNormal.sample(&mut rng);
            xs.push(x);
            ys.push(clean + noise * eps);
        }
        (xs, ys)
    };
    let (x_train, y_train) = draw_split(n_train);
    let (x_valid, y_valid) = draw_split(n_valid);
    Dataset {
        x_train,
        y_train,
        x_valid,
        y_valid,
    }
}

/// Two-hidden-layer tanh regressor trained by mini-batch gradient descent.
pub struct MlpRegressionObjective {
    dataset: Dataset,
}

impl MlpRegressionObjective {
    pub fn new(dataset: Dataset) -> Result<Self> {
        if dataset.y_train.is_empty() || dataset.y_valid.is_empty() {
            return Err(Error::invalid_config(
                "dataset",
                "train and validation splits must be nonempty",
            ));
        }
        let d = dataset.input_dim();
        if d == 0
            || dataset.x_train.len() != dataset.y_train.len()
            || dataset.x_valid.len() != dataset.y_valid.len()
            || dataset.x_train.iter().any(|x| x.len() != d)
            || dataset.x_valid.iter().any(|x| x.len() != d)
        {
            return Err(Error::invalid_config(
                "dataset",
                "inconsistent point or input-dimension counts",
            ));
        }
        Ok(MlpRegressionObjective { dataset })
    }

    /// The objective over the crate's bundled dataset.
    pub fn bundled() -> Self {
        let dataset = generate_regression_dataset(
            BUNDLED_TRAIN,
            BUNDLED_VALID,
            BUNDLED_INPUT_DIM,
            BUNDLED_NOISE,
            BUNDLED_DATASET_SEED,
        );
        MlpRegressionObjective { dataset }
    }

    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    /// Reads (batch, hidden1, learning rate, hidden2) off the assignment.
    fn hyperparams(&self, a: &Assignment) -> Result<(usize, usize, f64, usize)> {
        if a.len() != 4 {
            return Err(Error::ObjectiveContract(format!(
                "expects exactly 4 dimensions (batch, hidden1, learning_rate, hidden2), got {}",
                a.len()
            )));
        }
        let batch = positive_count(a, 0, "batch size")?;
        let hidden1 = positive_count(a, 1, "first hidden width")?;
        let lr = a.value_at(2).expect("length checked");
        if !lr.is_finite() || lr <= 0.0 {
            return Err(Error::ObjectiveContract(format!(
                "learning rate {lr} must be finite and positive"
            )));
        }
        let hidden2 = positive_count(a, 3, "second hidden width")?;
        if batch > self.dataset.n_train() {
            return Err(Error::ObjectiveContract(format!(
                "batch size {batch} exceeds the {} training points",
                self.dataset.n_train()
            )));
        }
        Ok((batch, hidden1, lr, hidden2))
    }
}

fn positive_count(a: &Assignment, index: usize, what: &str) -> Result<usize> {
    let v = a.value_at(index).expect("length checked");
    let n = v.round();
    if !v.is_finite() || n < 1.0 || (v - n).abs() > 1e-9 {
        return Err(Error::ObjectiveContract(format!(
            "{what} {v} must be a positive integer"
        )));
    }
    Ok(n as usize)
}

impl Objective for MlpRegressionObjective {
    fn rmse_curve(&self, assignment: &Assignment, epochs: usize, seed: u64) -> Result<RmseCurve> {
        let (batch, hidden1, lr, hidden2) = self.hyperparams(assignment)?;
        let mut net = Net::init(self.dataset.input_dim(), hidden1, hidden2, seed);
        let n_train = self.dataset.n_train();
        let mut order: Vec<usize> = (0..n_train).collect();
        let mut values = Vec::with_capacity(epochs);
        for epoch in 1..=epochs {
            // The shuffle for epoch e depends only on (seed, e), so shorter
            // trainings replay the same batches as longer ones.
            let mut rng =
                ChaCha8Rng::seed_from_u64(seeds::derive(&[seed, SHUFFLE_STREAM, epoch as u64]));
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                if !net.train_batch(&self.dataset, chunk, lr) {
                    return Err(Error::NonFiniteLoss { epoch });
                }
            }
            let rmse = net.validation_rmse(&self.dataset);
            if !rmse.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            values.push(rmse);
        }
        RmseCurve::new(values)
    }
}

/// Weights of the 2-hidden-layer tanh network.
struct Net {
    w1: Vec<Vec<f64>>, // hidden1 × input
    b1: Vec<f64>,
    w2: Vec<Vec<f64>>, // hidden2 × hidden1
    b2: Vec<f64>,
    w3: Vec<f64>, // hidden2
    b3: f64,
}

impl Net {
    fn init(input: usize, hidden1: usize, hidden2: usize, seed: u64) -> Net {
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(&[seed, INIT_STREAM]));
        let mut matrix = |rows: usize, cols: usize| -> Vec<Vec<f64>> {
            let scale = 1.0 / (cols as f64).sqrt();
            (0..rows)
                .map(|_| {
                    (0..cols)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            z * scale
                        })
                        .collect()
                })
                .collect()
        };
        let w1 = matrix(hidden1, input);
        let w2 = matrix(hidden2, hidden1);
        let w3 = matrix(1, hidden2).remove(0);
        Net {
            w1,
            b1: vec![0.0; hidden1],
            w2,
            b2: vec![0.0; hidden2],
            w3,
            b3: 0.0,
        }
    }

    fn forward(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, f64) {
        let a1: Vec<f64> = self
            .w1
            .iter()
            .zip(&self.b1)
            .map(|(row, b)| (b + dot(row, x)).tanh())
            .collect();
        let a2: Vec<f64> = self
            .w2
            .iter()
            .zip(&self.b2)
            .map(|(row, b)| (b + dot(row, &a1)).tanh())
            .collect();
        let out = self.b3 + dot(&self.w3, &a2);
        (a1, a2, out)
    }

    /// One gradient step on the mean squared error of `chunk`.
    /// Returns false as soon as the loss stops being finite.
    fn train_batch(&mut self, data: &Dataset, chunk: &[usize], lr: f64) -> bool {
        let input = data.input_dim();
        let (h1, h2) = (self.b1.len(), self.b2.len());
        let mut g_w1 = vec![vec![0.0; input]; h1];
        let mut g_b1 = vec![0.0; h1];
        let mut g_w2 = vec![vec![0.0; h1]; h2];
        let mut g_b2 = vec![0.0; h2];
        let mut g_w3 = vec![0.0; h2];
        let mut g_b3 = 0.0;

        let scale = 1.0 / chunk.len() as f64;
        for &i in chunk {
            let x = &data.x_train[i];
            let (a1, a2, out) = self.forward(x);
            let err = out - data.y_train[i];
            // The squared error is the loss itself; it overflows first.
            if !(err * err).is_finite() {
                return false;
            }
            let d_out = 2.0 * err * scale;
            g_b3 += d_out;
            let mut d_a2 = vec![0.0; h2];
            for j in 0..h2 {
                g_w3[j] += d_out * a2[j];
                d_a2[j] = d_out * self.w3[j];
            }
            let mut d_a1 = vec![0.0; h1];
            for j in 0..h2 {
                let d_z2 = d_a2[j] * (1.0 - a2[j] * a2[j]);
                g_b2[j] += d_z2;
                for k in 0..h1 {
                    g_w2[j][k] += d_z2 * a1[k];
                    d_a1[k] += d_z2 * self.w2[j][k];
                }
            }
            for j in 0..h1 {
                let d_z1 = d_a1[j] * (1.0 - a1[j] * a1[j]);
                g_b1[j] += d_z1;
                for k in 0..input {
                    g_w1[j][k] += d_z1 * x[k];
                }
            }
        }

        for j in 0..h1 {
            self.b1[j] -= lr * g_b1[j];
            for k in 0..input {
                self.w1[j][k] -= lr * g_w1[j][k];
            }
        }
        for j in 0..h2 {
            self.b2[j] -= lr * g_b2[j];
            for k in 0..h1 {
                self.w2[j][k] -= lr * g_w2[j][k];
            }
        }
        for j in 0..h2 {
            self.w3[j] -= lr * g_w3[j];
        }
        self.b3 -= lr * g_b3;
        true
    }

    fn validation_rmse(&self, data: &Dataset) -> f64 {
        let mse: f64 = data
            .x_valid
            .iter()
            .zip(&data.y_valid)
            .map(|(x, &y)| {
                let (_, _, out) = self.forward(x);
                (out - y) * (out - y)
            })
            .sum::<f64>()
            / data.y_valid.len() as f64;
        mse.sqrt()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{full_evaluate_or_sentinel, EvalBudget, FULL_FAILURE_RMSE};
    use crate::stats::{two_sample_t_test, TrialSet};

    fn assignment(batch: f64, h1: f64, lr: f64, h2: f64) -> Assignment {
        Assignment::new(vec![
            ("batch".to_string(), batch),
            ("hidden1".to_string(), h1),
            ("learning_rate".to_string(), lr),
            ("hidden2".to_string(), h2),
        ])
    }

    #[test]
    fn dataset_generation_is_reproducible() {
        let a = generate_regression_dataset(20, 10, 3, 0.1, 5);
        let b = generate_regression_dataset(20, 10, 3, 0.1, 5);
        assert_eq!(a, b);

        let c = generate_regression_dataset(20, 10, 3, 0.1, 6);
        assert_ne!(a, c);
    }

    #[test]
    fn splits_are_disjoint() {
        let d = generate_regression_dataset(50, 25, 2, 0.0, 9);
        for xv in &d.x_valid {
            assert!(d.x_train.iter().all(|xt| xt != xv));
        }
    }

    /// With no label noise the quadratic ground truth is recovered by a
    /// linear model over the (1, x, x²) basis, trained by plain gradient
    /// descent — the dataset itself is noiselessly learnable.
    #[test]
    fn noiseless_dataset_is_learnable_by_a_linear_basis_model() {
        let d = generate_regression_dataset(40, 20, 1, 0.0, 11);
        let features = |x: f64| [1.0, x, x * x];
        let mut w = [0.0f64; 3];
        let lr = 0.5;
        for _ in 0..400 {
            let mut grad = [0.0f64; 3];
            for (x, &y) in d.x_train.iter().zip(&d.y_train) {
                let f = features(x[0]);
                let err: f64 = w.iter().zip(&f).map(|(wi, fi)| wi * fi).sum::<f64>() - y;
                for (g, fi) in grad.iter_mut().zip(&f) {
                    *g += 2.0 * err * fi / d.y_train.len() as f64;
                }
            }
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi -= lr * g;
            }
        }
        let mse: f64 = d
            .x_valid
            .iter()
            .zip(&d.y_valid)
            .map(|(x, &y)| {
                let f = features(x[0]);
                let pred: f64 = w.iter().zip(&f).map(|(wi, fi)| wi * fi).sum();
                (pred - y) * (pred - y)
            })
            .sum::<f64>()
            / d.y_valid.len() as f64;
        assert!(mse.sqrt() < 1e-3, "validation rmse {}", mse.sqrt());
    }

    #[test]
    fn curves_are_deterministic_per_seed_and_vary_across_seeds() {
        let obj = MlpRegressionObjective::bundled();
        let a = assignment(16.0, 8.0, 0.004, 16.0);
        let c1 = obj.rmse_curve(&a, 5, 3).unwrap();
        let c2 = obj.rmse_curve(&a, 5, 3).unwrap();
        assert_eq!(c1.values(), c2.values());

        let c3 = obj.rmse_curve(&a, 5, 4).unwrap();
        assert_ne!(c1.values(), c3.values());
    }

    #[test]
    fn shorter_training_is_a_prefix_of_longer_training() {
        let obj = MlpRegressionObjective::bundled();
        let a = assignment(8.0, 12.0, 0.002, 24.0);
        let short = obj.rmse_curve(&a, 3, 17).unwrap();
        let long = obj.rmse_curve(&a, 10, 17).unwrap();
        assert_eq!(short.values(), &long.values()[..3]);
    }

    #[test]
    fn vanishing_learning_rate_freezes_the_network() {
        let obj = MlpRegressionObjective::bundled();
        let a = assignment(16.0, 8.0, 1e-12, 16.0);
        let curve = obj.rmse_curve(&a, 3, 1).unwrap();
        let first = curve.values()[0];
        assert!(first.is_finite());
        for &v in curve.values() {
            assert!((v - first).abs() < 1e-9);
        }
    }

    #[test]
    fn hyperparameter_contract_is_enforced() {
        let obj = MlpRegressionObjective::bundled();
        // Too few dimensions.
        let short = Assignment::new(vec![("batch".to_string(), 8.0)]);
        assert!(obj.rmse_curve(&short, 2, 0).is_err());
        // Batch beyond the training split.
        let big = assignment(500.0, 8.0, 0.001, 8.0);
        assert!(obj.rmse_curve(&big, 2, 0).is_err());
        // Non-positive learning rate.
        let zero_lr = assignment(8.0, 8.0, 0.0, 8.0);
        assert!(obj.rmse_curve(&zero_lr, 2, 0).is_err());
        // Fractional width.
        let frac = assignment(8.0, 8.5, 0.001, 8.0);
        assert!(obj.rmse_curve(&frac, 2, 0).is_err());
    }

    /// Targets scaled beyond √f64::MAX overflow the squared error on the
    /// very first batch; the evaluation layer turns the resulting training
    /// failure into the worst score instead of propagating it.
    #[test]
    fn divergent_training_is_reported_and_absorbed() {
        let mut d = generate_regression_dataset(64, 32, 3, 0.0, 21);
        for y in d.y_train.iter_mut().chain(d.y_valid.iter_mut()) {
            *y *= 1e160;
        }
        let obj = MlpRegressionObjective::new(d).unwrap();
        let hot = assignment(8.0, 32.0, 0.016, 64.0);
        let err = obj.rmse_curve(&hot, 30, 2).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { epoch: 1 }));

        let mut budget = EvalBudget::default();
        let score = full_evaluate_or_sentinel(&obj, &hot, 30, 2, &mut budget).unwrap();
        assert_eq!(score.rmse, FULL_FAILURE_RMSE);
        assert_eq!(budget.ev_full, 1);
    }

    /// Two clearly different settings separate under the trial t-test, so
    /// the objective is informative and not noise-dominated.
    #[test]
    fn distinct_assignments_separate_over_thirty_seeds() {
        let obj = MlpRegressionObjective::bundled();
        let good = assignment(16.0, 16.0, 0.008, 16.0);
        let bad = assignment(64.0, 4.0, 0.001, 8.0);
        let finals = |a: &Assignment| -> Vec<f64> {
            (0..30)
                .map(|s| obj.rmse_curve(a, 30, s).unwrap().final_rmse())
                .collect()
        };
        let good_set = TrialSet::new("good".to_string(), finals(&good)).unwrap();
        let bad_set = TrialSet::new("bad".to_string(), finals(&bad)).unwrap();
        let test = two_sample_t_test(&good_set, &bad_set, 0.05).unwrap();
        assert_eq!(test.h, 1);
        assert!(good_set.mean() < bad_set.mean());
    }
}
