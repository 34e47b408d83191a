//! Fixtures shared by the benchmarks.

use folded_simplex::{sample, DataMatrix, FoldedNormalParams};

/// Three-part model with a visible folded branch at α = 0.5.
pub fn three_part(alpha: f64) -> FoldedNormalParams {
    let p = if alpha == 0.0 { 1.0 } else { 0.5 };
    FoldedNormalParams::from_rows(alpha, p, vec![0.561, 0.547], &[0.5, 0.25, 0.25, 0.35]).expect("valid parameters")
}

pub fn three_part_data(alpha: f64, n: usize) -> DataMatrix {
    sample(&three_part(alpha), n, 17).expect("sampling succeeds")
}
