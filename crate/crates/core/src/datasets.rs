//! Bundled example datasets.

use crate::dataset::{parse_grouped, parse_long, ParseOptions, RatingDataset};

/// Pre-operative health ratings of 45 patients on a 4-point scale by five
/// anaesthetists; the first anaesthetist rated every patient three times.
/// Long format, 315 ratings.
pub fn anesthesia() -> RatingDataset {
    let src = include_str!("../fixtures/anesthesia.csv");
    parse_long(src.as_bytes(), "bundled:anesthesia", &ParseOptions::default())
        .expect("bundled dataset parses")
}

/// Binary caries assessments of 3689 teeth by five dentists, recorded as
/// grouped rating patterns with tallies.
pub fn caries() -> RatingDataset {
    let src = include_str!("../fixtures/caries.csv");
    parse_grouped(src.as_bytes(), "bundled:caries", &ParseOptions::default())
        .expect("bundled dataset parses")
}
