//! Shared fixtures for unit tests.

use crate::objectives::synthetic::{DimTerm, GapRule, ParamMap, SyntheticCurveObjective};
use crate::space::{HyperparamDef, ParamKind, SearchSpace};

/// A 6-bit space (two 3-bit dimensions on step 1) paired with a noiseless
/// aligned-start objective whose 64 values are all distinct and whose unique
/// optimum sits at x=4, y=2 — genome "011001".
pub fn six_bit_aligned() -> (SearchSpace, SyntheticCurveObjective) {
    let space = SearchSpace::new(vec![
        HyperparamDef::new("x", 3, 1.0, ParamKind::Integer),
        HyperparamDef::new("y", 3, 1.0, ParamKind::Integer),
    ])
    .unwrap();
    let objective = SyntheticCurveObjective::new(
        ParamMap {
            base: 0.2,
            terms: vec![
                DimTerm {
                    dim: 0,
                    linear: 0.0131,
                    quad: 0.0113,
                    center: 4.37,
                },
                DimTerm {
                    dim: 1,
                    linear: 0.0071,
                    quad: 0.0053,
                    center: 2.63,
                },
            ],
        },
        GapRule::AlignedStart { start: 2.0 },
        ParamMap::constant(0.4),
        0.0,
    )
    .unwrap();
    (space, objective)
}

/// Genome string of [`six_bit_aligned`]'s unique optimum.
pub const SIX_BIT_OPTIMUM: &str = "011001";
