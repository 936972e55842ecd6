//! Objective contract and the two evaluation fidelities.
//!
//! An objective maps (assignment, epochs, seed) to a per-epoch validation
//! RMSE curve. Full evaluation trains to the complete epoch budget and scores
//! the final RMSE (lower is better). Fast evaluation trains only the first
//! `t = max(2, round(p_f × n_e))` epochs and scores the early improvement
//! `ΔF = F(1) − F(t)` (higher is better), making it roughly `p_f` times the
//! cost of a full evaluation. Both fidelities tally into an [`EvalBudget`].

use crate::error::Error;
use crate::space::Assignment;
use crate::Result;

/// Worst representable full score, reported when training diverges.
pub const FULL_FAILURE_RMSE: f64 = 1e12;

/// Worst representable fast score, reported when training diverges.
pub const FAST_FAILURE_DELTA: f64 = -1e12;

/// Per-epoch validation RMSE, indexed by epoch 1..=n.
#[derive(Debug, Clone, PartialEq)]
pub struct RmseCurve {
    values: Vec<f64>,
}

impl RmseCurve {
    /// Validates that the curve is nonempty with finite, nonnegative entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ObjectiveContract("curve must not be empty".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::ObjectiveContract(format!(
                    "curve entry {v} at epoch {} is not a finite nonnegative number",
                    i + 1
                )));
            }
        }
        Ok(RmseCurve { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // new() rejects empty curves
    }

    /// RMSE after the final epoch.
    pub fn final_rmse(&self) -> f64 {
        *self.values.last().expect("curve is nonempty")
    }

    /// RMSE after epoch `t` (1-indexed).
    pub fn at_epoch(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.values.len() {
            return Err(Error::EpochOutOfRange {
                t,
                len: self.values.len(),
            });
        }
        Ok(self.values[t - 1])
    }
}

/// Final-epoch validation RMSE; lower is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullScore {
    pub rmse: f64,
}

/// Early improvement ΔF(1, t) = F(1) − F(t); higher is better.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FastScore {
    pub delta: f64,
    pub t_used: usize,
}

/// Evaluation counters, tallied even when an evaluation fails.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalBudget {
    pub ev_fast: u64,
    pub ev_full: u64,
    pub epoch_units: u64,
}

impl EvalBudget {
    /// Folds another budget in; used to merge per-worker partial counters.
    pub fn merge(&mut self, other: &EvalBudget) {
        self.ev_fast += other.ev_fast;
        self.ev_full += other.ev_full;
        self.epoch_units += other.epoch_units;
    }
}

/// A training objective: deterministic given (assignment, epochs, seed), and
/// prefix-consistent — the curve for fewer epochs is a prefix of the curve
/// for more epochs under the same assignment and seed.
pub trait Objective: Sync {
    /// Train for exactly `epochs` epochs and report the per-epoch curve.
    fn rmse_curve(&self, assignment: &Assignment, epochs: usize, seed: u64) -> Result<RmseCurve>;
}

/// Number of epochs the fast fidelity trains: `max(2, round(p_f × n_e))`.
pub fn fast_epochs(p_f: f64, n_e: usize) -> usize {
    ((p_f * n_e as f64).round() as usize).max(2)
}

/// Early improvement between epoch 1 and epoch `t` of a curve.
pub fn delta_fitness(curve: &RmseCurve, t: usize) -> Result<f64> {
    if t < 2 || t > curve.len() {
        return Err(Error::EpochOutOfRange { t, len: curve.len() });
    }
    Ok(curve.values()[0] - curve.values()[t - 1])
}

/// Trains to the full epoch budget and scores the final RMSE.
///
/// The budget is charged before training starts, so a failed evaluation
/// still counts toward `ev_full` and `epoch_units`.
pub fn full_evaluate<O: Objective + ?Sized>(
    obj: &O,
    assignment: &Assignment,
    n_e: usize,
    seed: u64,
    budget: &mut EvalBudget,
) -> Result<FullScore> {
    budget.ev_full += 1;
    budget.epoch_units += n_e as u64;
    let curve = obj
        .rmse_curve(assignment, n_e, seed)
        .map_err(|e| evaluation_error(assignment, e))?;
    check_curve_len(&curve, n_e)?;
    Ok(FullScore {
        rmse: curve.final_rmse(),
    })
}

/// Trains only the first `max(2, round(p_f × n_e))` epochs and scores ΔF.
///
/// The budget is charged before training starts, so a failed evaluation
/// still counts toward `ev_fast` and `epoch_units`.
pub fn fast_evaluate<O: Objective + ?Sized>(
    obj: &O,
    assignment: &Assignment,
    n_e: usize,
    p_f: f64,
    seed: u64,
    budget: &mut EvalBudget,
) -> Result<FastScore> {
    if n_e < 2 {
        return Err(Error::FidelityUndefined { epochs: n_e });
    }
    let t = fast_epochs(p_f, n_e);
    budget.ev_fast += 1;
    budget.epoch_units += t as u64;
    let curve = obj
        .rmse_curve(assignment, t, seed)
        .map_err(|e| evaluation_error(assignment, e))?;
    check_curve_len(&curve, t)?;
    Ok(FastScore {
        delta: delta_fitness(&curve, t)?,
        t_used: t,
    })
}

/// [`full_evaluate`] that turns an evaluation failure into the worst score
/// instead of an error, so a search can keep going past divergent trainings.
pub fn full_evaluate_or_sentinel<O: Objective + ?Sized>(
    obj: &O,
    assignment: &Assignment,
    n_e: usize,
    seed: u64,
    budget: &mut EvalBudget,
) -> Result<FullScore> {
    match full_evaluate(obj, assignment, n_e, seed, budget) {
        Err(Error::Evaluation { .. }) => Ok(FullScore {
            rmse: FULL_FAILURE_RMSE,
        }),
        other => other,
    }
}

/// [`fast_evaluate`] that turns an evaluation failure into the worst score
/// instead of an error.
pub fn fast_evaluate_or_sentinel<O: Objective + ?Sized>(
    obj: &O,
    assignment: &Assignment,
    n_e: usize,
    p_f: f64,
    seed: u64,
    budget: &mut EvalBudget,
) -> Result<FastScore> {
    match fast_evaluate(obj, assignment, n_e, p_f, seed, budget) {
        Err(Error::Evaluation { .. }) => Ok(FastScore {
            delta: FAST_FAILURE_DELTA,
            t_used: fast_epochs(p_f, n_e),
        }),
        other => other,
    }
}

fn evaluation_error(assignment: &Assignment, source: Error) -> Error {
    Error::Evaluation {
        assignment: assignment.to_string(),
        reason: source.to_string(),
    }
}

fn check_curve_len(curve: &RmseCurve, expected: usize) -> Result<()> {
    if curve.len() != expected {
        return Err(Error::ObjectiveContract(format!(
            "objective produced {} epochs, expected {expected}",
            curve.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Serves a fixed curve, truncated to the requested epoch count.
    struct FixedCurve(Vec<f64>);

    impl Objective for FixedCurve {
        fn rmse_curve(&self, _a: &Assignment, epochs: usize, _seed: u64) -> Result<RmseCurve> {
            RmseCurve::new(self.0[..epochs].to_vec())
        }
    }

    /// Always fails, as a divergent training would.
    struct Diverges;

    impl Objective for Diverges {
        fn rmse_curve(&self, _a: &Assignment, _epochs: usize, _seed: u64) -> Result<RmseCurve> {
            Err(Error::NonFiniteLoss { epoch: 1 })
        }
    }

    /// Ignores the epoch request and returns one epoch too few.
    struct ShortCurve;

    impl Objective for ShortCurve {
        fn rmse_curve(&self, _a: &Assignment, epochs: usize, _seed: u64) -> Result<RmseCurve> {
            RmseCurve::new(vec![1.0; epochs - 1])
        }
    }

    fn assignment() -> Assignment {
        Assignment::new(vec![("x".to_string(), 1.0)])
    }

    #[test]
    fn curve_validation_rejects_bad_entries() {
        assert!(RmseCurve::new(vec![]).is_err());
        assert!(RmseCurve::new(vec![1.0, -0.1]).is_err());
        assert!(RmseCurve::new(vec![f64::NAN]).is_err());
        assert!(RmseCurve::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(RmseCurve::new(vec![0.0, 2.5]).is_ok());
    }

    #[test]
    fn delta_fitness_is_first_minus_t() {
        let c = RmseCurve::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert_eq!(delta_fitness(&c, 3).unwrap(), 2.0);

        let worsening = RmseCurve::new(vec![1.0, 1.5]).unwrap();
        assert_eq!(delta_fitness(&worsening, 2).unwrap(), -0.5);

        let c = RmseCurve::new(vec![5.0, 4.0, 3.5, 3.2]).unwrap();
        assert_eq!(delta_fitness(&c, 2).unwrap(), 1.0);
    }

    #[test]
    fn delta_fitness_rejects_out_of_range_epochs() {
        let c = RmseCurve::new(vec![3.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            delta_fitness(&c, 1),
            Err(Error::EpochOutOfRange { t: 1, len: 3 })
        ));
        assert!(matches!(
            delta_fitness(&c, 4),
            Err(Error::EpochOutOfRange { t: 4, len: 3 })
        ));
    }

    #[test]
    fn full_evaluate_scores_the_final_epoch() {
        let mut budget = EvalBudget::default();
        let obj = FixedCurve(vec![2.0, 1.5, 1.2]);
        let score = full_evaluate(&obj, &assignment(), 3, 0, &mut budget).unwrap();
        assert_eq!(score.rmse, 1.2);
        assert_eq!(budget.ev_full, 1);
        assert_eq!(budget.ev_fast, 0);
        assert_eq!(budget.epoch_units, 3);

        let flat = FixedCurve(vec![0.7; 10]);
        let score = full_evaluate(&flat, &assignment(), 10, 0, &mut budget).unwrap();
        assert_eq!(score.rmse, 0.7);
        assert_eq!(budget.epoch_units, 13);
    }

    #[test]
    fn fast_evaluate_uses_the_clamped_rounded_epoch() {
        let mut budget = EvalBudget::default();
        let obj = FixedCurve(vec![2.0, 1.5, 1.4, 1.3]);
        let score = fast_evaluate(&obj, &assignment(), 20, 0.1, 0, &mut budget).unwrap();
        assert_eq!(score.t_used, 2);
        assert_eq!(score.delta, 0.5);
        assert_eq!(budget.ev_fast, 1);
        assert_eq!(budget.ev_full, 0);
        assert_eq!(budget.epoch_units, 2);
    }

    #[test]
    fn fast_epochs_rounds_half_up_with_floor_two() {
        assert_eq!(fast_epochs(0.1, 100), 10);
        assert_eq!(fast_epochs(0.1, 20), 2);
        assert_eq!(fast_epochs(0.1, 5), 2); // round(0.5) = 1, floored to 2
        assert_eq!(fast_epochs(0.2, 25), 5);
        assert_eq!(fast_epochs(0.15, 10), 2);
        assert_eq!(fast_epochs(0.5, 9), 5); // round(4.5) = 5
    }

    #[test]
    fn fast_evaluate_on_a_constant_curve_is_zero() {
        let mut budget = EvalBudget::default();
        let obj = FixedCurve(vec![0.7; 10]);
        let score = fast_evaluate(&obj, &assignment(), 10, 0.3, 0, &mut budget).unwrap();
        assert_eq!(score.delta, 0.0);
        assert_eq!(score.t_used, 3);
    }

    #[test]
    fn fast_evaluate_needs_two_epochs() {
        let mut budget = EvalBudget::default();
        let obj = FixedCurve(vec![1.0]);
        let err = fast_evaluate(&obj, &assignment(), 1, 0.1, 0, &mut budget).unwrap_err();
        assert!(matches!(err, Error::FidelityUndefined { epochs: 1 }));
        assert_eq!(budget, EvalBudget::default());
    }

    #[test]
    fn failures_are_wrapped_and_still_charged() {
        let mut budget = EvalBudget::default();
        let err = full_evaluate(&Diverges, &assignment(), 5, 0, &mut budget).unwrap_err();
        match err {
            Error::Evaluation { assignment, reason } => {
                assert_eq!(assignment, "x=1");
                assert!(reason.contains("non-finite"));
            }
            other => panic!("expected Evaluation, got {other:?}"),
        }
        assert_eq!(budget.ev_full, 1);
        assert_eq!(budget.epoch_units, 5);
    }

    #[test]
    fn sentinel_wrappers_absorb_failures_only() {
        let mut budget = EvalBudget::default();
        let full = full_evaluate_or_sentinel(&Diverges, &assignment(), 5, 0, &mut budget).unwrap();
        assert_eq!(full.rmse, FULL_FAILURE_RMSE);
        let fast =
            fast_evaluate_or_sentinel(&Diverges, &assignment(), 20, 0.1, 1, &mut budget).unwrap();
        assert_eq!(fast.delta, FAST_FAILURE_DELTA);
        assert_eq!(fast.t_used, 2);
        assert_eq!(budget.ev_full, 1);
        assert_eq!(budget.ev_fast, 1);
        assert_eq!(budget.epoch_units, 7);

        // A wrong-length curve is a bug in the objective, not a failed
        // training run; it must surface, not be absorbed.
        assert!(full_evaluate_or_sentinel(&ShortCurve, &assignment(), 5, 0, &mut budget).is_err());
    }

    #[test]
    fn budget_merge_adds_counters() {
        let mut a = EvalBudget {
            ev_fast: 2,
            ev_full: 1,
            epoch_units: 14,
        };
        let b = EvalBudget {
            ev_fast: 3,
            ev_full: 4,
            epoch_units: 50,
        };
        a.merge(&b);
        assert_eq!(
            a,
            EvalBudget {
                ev_fast: 5,
                ev_full: 5,
                epoch_units: 64
            }
        );
    }

    proptest! {
        #[test]
        fn budget_arithmetic_holds(
            fulls in 0usize..8,
            fasts in 0usize..8,
            n_e in 2usize..60,
            p_f in 0.05f64..0.5,
        ) {
            let obj = FixedCurve(vec![1.0; 60]);
            let mut budget = EvalBudget::default();
            for i in 0..fulls {
                full_evaluate(&obj, &assignment(), n_e, i as u64, &mut budget).unwrap();
            }
            for i in 0..fasts {
                fast_evaluate(&obj, &assignment(), n_e, p_f, i as u64, &mut budget).unwrap();
            }
            let t = fast_epochs(p_f, n_e);
            prop_assert_eq!(budget.ev_full, fulls as u64);
            prop_assert_eq!(budget.ev_fast, fasts as u64);
            prop_assert_eq!(budget.epoch_units, (fulls * n_e + fasts * t) as u64);
        }

        #[test]
        fn fast_epochs_stays_within_bounds(p_f in 0.01f64..=0.5, n_e in 2usize..500) {
            let t = fast_epochs(p_f, n_e);
            prop_assert!(t >= 2);
            // Never more than half the budget plus rounding, per the p_f cap.
            prop_assert!(t <= (0.5 * n_e as f64).round() as usize + 1 || t == 2);
        }
    }
}
