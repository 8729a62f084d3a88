//! Property tests for format conversions and serialization.

use proptest::prelude::*;
use ratings::dataset::{
    parse_grouped, parse_long, parse_wide, serialize, Format, ParseOptions, RatingDataset,
};
use ratings::model::homogenize;

/// Complete single-rating datasets as a wide matrix of 1-based ratings.
fn complete_matrix() -> impl Strategy<Value = (usize, Vec<Vec<u8>>)> {
    (1usize..=4, 1usize..=12, 2u8..=4).prop_flat_map(|(raters, items, categories)| {
        (
            Just(categories as usize),
            prop::collection::vec(
                prop::collection::vec(1..=categories, raters),
                items,
            ),
        )
    })
}

fn wide_csv(matrix: &[Vec<u8>]) -> String {
    let raters = matrix[0].len();
    let mut out = String::from("item");
    for j in 1..=raters {
        out.push_str(&format!(",rater_{j}"));
    }
    out.push('\n');
    for (i, row) in matrix.iter().enumerate() {
        out.push_str(&(i + 1).to_string());
        for cell in row {
            out.push_str(&format!(",{cell}"));
        }
        out.push('\n');
    }
    out
}

fn parse(text: &str, format: Format) -> RatingDataset {
    let options = ParseOptions::default();
    match format {
        Format::Long => parse_long(text.as_bytes(), "prop", &options).unwrap(),
        Format::Wide => parse_wide(text.as_bytes(), "prop", &options).unwrap(),
        Format::Grouped => parse_grouped(text.as_bytes(), "prop", &options).unwrap(),
    }
}

/// The multiset of per-item rating vectors (sorted), the invariant quantity
/// under grouped round trips.
fn item_vector_multiset(d: &RatingDataset) -> Vec<Vec<usize>> {
    let long = d.to_long().unwrap();
    let l = long.as_long().unwrap();
    let mut per_item = vec![vec![usize::MAX; l.raters()]; l.items()];
    for e in l.entries() {
        per_item[e.item][e.rater] = e.rating;
    }
    per_item.sort();
    per_item
}

proptest! {
    #[test]
    fn grouped_round_trip_preserves_item_vectors((categories, matrix) in complete_matrix()) {
        let wide = parse(&wide_csv(&matrix), Format::Wide);
        prop_assert_eq!(wide.categories() <= categories, true);
        let grouped = wide.to_grouped().unwrap();
        let back = grouped.to_long().unwrap();
        prop_assert_eq!(item_vector_multiset(&wide), item_vector_multiset(&back));
    }

    #[test]
    fn conversions_preserve_counts((_categories, matrix) in complete_matrix()) {
        let wide = parse(&wide_csv(&matrix), Format::Wide);
        let long = wide.to_long().unwrap();
        let grouped = wide.to_grouped().unwrap();
        let l = long.as_long().unwrap();
        let g = grouped.as_grouped().unwrap();
        prop_assert_eq!(l.raters(), g.raters());
        prop_assert_eq!(l.categories(), wide.categories());
        prop_assert_eq!(g.categories(), wide.categories());
        // total ratings: long N = sum_l n_l * J for complete grouped data
        prop_assert_eq!(l.n_ratings() as u64, g.total_items() * g.raters() as u64);
        prop_assert_eq!(l.items() as u64, g.total_items());
    }

    #[test]
    fn serialize_parse_round_trip((_categories, matrix) in complete_matrix()) {
        let wide = parse(&wide_csv(&matrix), Format::Wide);
        for converted in [
            wide.to_long().unwrap(),
            wide.to_grouped().unwrap(),
            wide.clone(),
        ] {
            let text = serialize(&converted);
            let reparsed = parse(&text, converted.format());
            prop_assert_eq!(serialize(&reparsed), text);
        }
    }

    #[test]
    fn homogenize_preserves_item_rating_pairs((_categories, matrix) in complete_matrix()) {
        let wide = parse(&wide_csv(&matrix), Format::Wide);
        let long = wide.to_long().unwrap();
        let pooled = homogenize(&long).unwrap();
        let pairs = |d: &RatingDataset| {
            let mut v: Vec<(usize, usize)> = d
                .as_long()
                .unwrap()
                .entries()
                .iter()
                .map(|e| (e.item, e.rating))
                .collect();
            v.sort();
            v
        };
        prop_assert_eq!(pairs(&long), pairs(&pooled));
        prop_assert_eq!(pooled.raters(), 1);
    }
}
