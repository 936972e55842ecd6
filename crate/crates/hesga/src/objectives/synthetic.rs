//! Closed-form learning-curve objective.
//!
//! Each assignment maps to curve parameters (a, b, c) and the per-epoch RMSE
//! follows `F(t) = a + b·exp(−c·t) + ε_t`, with ε_t Gaussian noise derived
//! from (seed, t) alone so that shorter trainings are exact prefixes of
//! longer ones. The asymptote `a` is what full evaluation converges to, the
//! initial gap `b` is what fast evaluation sees shrinking, and `c` sets how
//! quickly the two regimes separate — which makes the family a transparent
//! testbed for when early improvement does and does not predict final rank.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::eval::{Objective, RmseCurve};
use crate::seeds;
use crate::space::Assignment;
use crate::Result;

/// One dimension's contribution to a curve parameter:
/// `linear·(v − center) + quad·(v − center)²` for the decoded value `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimTerm {
    /// Index of the dimension in declaration order.
    pub dim: usize,
    #[serde(default)]
    pub linear: f64,
    #[serde(default)]
    pub quad: f64,
    #[serde(default)]
    pub center: f64,
}

/// Affine-plus-quadratic map from a decoded assignment to one curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamMap {
    pub base: f64,
    #[serde(default)]
    pub terms: Vec<DimTerm>,
}

impl ParamMap {
    /// A map that ignores the assignment entirely.
    pub fn constant(base: f64) -> Self {
        ParamMap {
            base,
            terms: Vec::new(),
        }
    }

    /// Evaluates the map on a decoded assignment.
    pub fn eval(&self, assignment: &Assignment) -> Result<f64> {
        let mut acc = self.base;
        for term in &self.terms {
            let v = term_value(assignment, term.dim)?;
            let d = v - term.center;
            acc += term.linear * d + term.quad * d * d;
        }
        Ok(acc)
    }
}

fn term_value(assignment: &Assignment, dim: usize) -> Result<f64> {
    assignment.value_at(dim).ok_or_else(|| {
        Error::ObjectiveContract(format!(
            "curve map references dimension {dim} but the assignment has {}",
            assignment.len()
        ))
    })
}

/// How the initial gap `b` is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum GapRule {
    /// `b` comes from its own parameter map.
    Map(ParamMap),
    /// `b = (start − a)·exp(c)`, pinning `F(1) = start` for every
    /// assignment. With this rule the first-epoch RMSE carries no signal and
    /// the early improvement ΔF(1, t) orders assignments exactly as the
    /// RMSE at epoch t does.
    AlignedStart { start: f64 },
}

/// Noiseless-or-noisy exponential-decay curve family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticCurveObjective {
    /// Map for the asymptote `a` (the RMSE floor).
    pub asymptote: ParamMap,
    /// Rule for the initial gap `b`.
    pub gap: GapRule,
    /// Map for the decay rate `c`.
    pub decay: ParamMap,
    /// Standard deviation of the per-epoch Gaussian perturbation.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl SyntheticCurveObjective {
    pub fn new(asymptote: ParamMap, gap: GapRule, decay: ParamMap, noise_sigma: f64) -> Result<Self> {
        let obj = SyntheticCurveObjective {
            asymptote,
            gap,
            decay,
            noise_sigma,
        };
        obj.validate()?;
        Ok(obj)
    }

    /// Checks the parts that do not depend on any particular assignment.
    pub fn validate(&self) -> Result<()> {
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::invalid_config(
                "noise_sigma",
                "must be a nonnegative finite number",
            ));
        }
        Ok(())
    }

    /// Resolves (a, b, c) for one assignment, rejecting out-of-range values.
    pub fn curve_params(&self, assignment: &Assignment) -> Result<(f64, f64, f64)> {
        let a = self.asymptote.eval(assignment)?;
        let c = self.decay.eval(assignment)?;
        let b = match &self.gap {
            GapRule::Map(map) => map.eval(assignment)?,
            GapRule::AlignedStart { start } => (start - a) * c.exp(),
        };
        if !a.is_finite() || a < 0.0 {
            return Err(Error::ObjectiveContract(format!(
                "derived asymptote a={a} must be finite and nonnegative"
            )));
        }
        if !b.is_finite() || b < 0.0 {
            return Err(Error::ObjectiveContract(format!(
                "derived gap b={b} must be finite and nonnegative"
            )));
        }
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::ObjectiveContract(format!(
                "derived decay c={c} must be finite and positive"
            )));
        }
        Ok((a, b, c))
    }
}

impl Objective for SyntheticCurveObjective {
    fn rmse_curve(&self, assignment: &Assignment, epochs: usize, seed: u64) -> Result<RmseCurve> {
        let (a, b, c) = self.curve_params(assignment)?;
        let values = (1..=epochs)
            .map(|t| {
                let clean = a + b * (-c * t as f64).exp();
                // RMSE cannot go below zero, so the perturbed value clamps.
                (clean + self.noise(seed, t)).max(0.0)
            })
            .collect();
        RmseCurve::new(values)
    }
}

impl SyntheticCurveObjective {
    /// Per-epoch perturbation keyed on (seed, t) only, so a curve's prefix
    /// never depends on how many epochs were requested.
    fn noise(&self, seed: u64, t: usize) -> f64 {
        if self.noise_sigma == 0.0 {
            return 0.0;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(&[seed, t as u64]));
        let eps: f64 = StandardNormal.sample(&mut rng);
        eps * self.noise_sigma
    }
}
