//! Bundled example data.

use crate::data::DataMatrix;
use crate::io::read_compositions_str;

const ARCTIC_LAKE_CSV: &str = include_str!("../data/arctic_lake.csv");

/// The two influential observations of the Arctic lake data (1-based rows).
pub const ARCTIC_LAKE_FLAGGED_ROWS: [usize; 2] = [7, 14];

/// Sand, silt and clay percentages of 39 Arctic lake sediment samples,
/// closed to unit sum.
pub fn arctic_lake() -> DataMatrix {
    read_compositions_str(ARCTIC_LAKE_CSV, true).expect("bundled data parses")
}

/// Raw text of the bundled Arctic lake file (percentages, header row).
pub fn arctic_lake_csv() -> &'static str {
    ARCTIC_LAKE_CSV
}
