//! Rating data in long, wide, and grouped representations.
//!
//! All in-memory indices are dense and 0-based: items in `0..items()`, raters in
//! `0..raters()`, ratings in `0..categories()`. Input files use 1-based labels;
//! the mapping happens at parse/serialize time only. Original item and rater
//! labels are retained so that serialized output matches the source files.

mod csv_io;

pub use csv_io::{
    parse_grouped, parse_long, parse_wide, serialize, serialize_grouped, serialize_long,
    serialize_wide, HeaderMode, ParseOptions,
};

use crate::error::{Error, Result};

/// One observed rating: rater `rater` assigned item `item` to category `rating`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LongEntry {
    pub item: usize,
    pub rater: usize,
    pub rating: usize,
}

/// Long format: one entry per rating episode. Duplicate (item, rater) pairs are
/// allowed; they represent repeated ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRatings {
    entries: Vec<LongEntry>,
    items: usize,
    raters: usize,
    categories: usize,
    item_labels: Vec<i64>,
    rater_labels: Vec<i64>,
}

impl LongRatings {
    /// Build from dense 0-based entries, validating every index.
    pub fn new(
        entries: Vec<LongEntry>,
        categories: usize,
        item_labels: Vec<i64>,
        rater_labels: Vec<i64>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyData("long data needs at least one rating".into()));
        }
        let items = item_labels.len();
        let raters = rater_labels.len();
        if categories == 0 {
            return Err(Error::domain("category count must be positive"));
        }
        let mut seen = vec![false; items];
        for e in &entries {
            if e.item >= items || e.rater >= raters {
                return Err(Error::shape(format!(
                    "entry ({}, {}) outside {} items x {} raters",
                    e.item, e.rater, items, raters
                )));
            }
            if e.rating >= categories {
                return Err(Error::shape(format!(
                    "rating {} outside 1..={}",
                    e.rating + 1,
                    categories
                )));
            }
            seen[e.item] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::domain(format!("item {} has no ratings", item_labels[i])));
        }
        Ok(Self { entries, items, raters, categories, item_labels, rater_labels })
    }

    /// Build from 1-based (item, rater, rating) triples with arbitrary positive
    /// integer labels; labels are mapped to dense indices in sorted order.
    pub fn from_labelled(rows: &[(i64, i64, i64)], categories: Option<usize>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyData("long data needs at least one rating".into()));
        }
        for &(item, rater, rating) in rows {
            if item <= 0 || rater <= 0 {
                return Err(Error::domain(format!(
                    "item and rater labels must be positive, got ({item}, {rater})"
                )));
            }
            if rating <= 0 {
                return Err(Error::domain(format!("rating must be positive, got {rating}")));
            }
        }
        let item_labels = sorted_unique(rows.iter().map(|r| r.0));
        let rater_labels = sorted_unique(rows.iter().map(|r| r.1));
        let max_rating = rows.iter().map(|r| r.2).max().unwrap() as usize;
        let categories = resolve_categories(max_rating, categories)?;
        let entries = rows
            .iter()
            .map(|&(item, rater, rating)| LongEntry {
                item: index_of(&item_labels, item),
                rater: index_of(&rater_labels, rater),
                rating: rating as usize - 1,
            })
            .collect();
        Self::new(entries, categories, item_labels, rater_labels)
    }

    pub fn entries(&self) -> &[LongEntry] {
        &self.entries
    }

    pub fn items(&self) -> usize {
        self.items
    }

    pub fn raters(&self) -> usize {
        self.raters
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn n_ratings(&self) -> usize {
        self.entries.len()
    }

    pub fn item_labels(&self) -> &[i64] {
        &self.item_labels
    }

    pub fn rater_labels(&self) -> &[i64] {
        &self.rater_labels
    }

    /// Ratings of each item, grouped: element `i` lists the (rater, rating)
    /// pairs observed for item `i`.
    pub fn by_item(&self) -> Vec<Vec<(usize, usize)>> {
        let mut out = vec![Vec::new(); self.items];
        for e in &self.entries {
            out[e.item].push((e.rater, e.rating));
        }
        out
    }
}

/// Wide format: one row per item, one column per rater, `None` marking a
/// missing rating. Only meaningful when each rater rates an item at most once.
#[derive(Debug, Clone, PartialEq)]
pub struct WideRatings {
    rows: Vec<Vec<Option<usize>>>,
    categories: usize,
    item_labels: Vec<i64>,
    rater_names: Vec<String>,
    has_item_column: bool,
}

impl WideRatings {
    pub fn new(
        rows: Vec<Vec<Option<usize>>>,
        categories: usize,
        item_labels: Vec<i64>,
        rater_names: Vec<String>,
        has_item_column: bool,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyData("wide data needs at least one row".into()));
        }
        if item_labels.len() != rows.len() {
            return Err(Error::shape("item label count does not match row count"));
        }
        let raters = rater_names.len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != raters {
                return Err(Error::shape(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    raters
                )));
            }
            if row.iter().all(|c| c.is_none()) {
                return Err(Error::domain(format!(
                    "item {} has no non-missing ratings",
                    item_labels[i]
                )));
            }
            for cell in row.iter().flatten() {
                if *cell >= categories {
                    return Err(Error::shape(format!(
                        "rating {} outside 1..={}",
                        cell + 1,
                        categories
                    )));
                }
            }
        }
        Ok(Self { rows, categories, item_labels, rater_names, has_item_column })
    }

    pub fn rows(&self) -> &[Vec<Option<usize>>] {
        &self.rows
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }

    pub fn raters(&self) -> usize {
        self.rater_names.len()
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn n_ratings(&self) -> usize {
        self.rows.iter().map(|r| r.iter().flatten().count()).sum()
    }

    pub fn item_labels(&self) -> &[i64] {
        &self.item_labels
    }

    pub fn rater_names(&self) -> &[String] {
        &self.rater_names
    }

    pub fn has_item_column(&self) -> bool {
        self.has_item_column
    }
}

/// Grouped format: one row per distinct complete rating pattern plus a tally of
/// how many items exhibit that pattern. Missing entries are not representable.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedRatings {
    patterns: Vec<Vec<usize>>,
    tallies: Vec<u64>,
    categories: usize,
    rater_names: Vec<String>,
}

impl GroupedRatings {
    /// Build from (pattern, tally) rows. Duplicate patterns are merged with
    /// summed tallies; each merge is reported in `warnings`.
    pub fn new(
        patterns: Vec<Vec<usize>>,
        tallies: Vec<u64>,
        categories: usize,
        rater_names: Vec<String>,
        warnings: &mut Vec<String>,
    ) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::EmptyData("grouped data needs at least one pattern".into()));
        }
        if patterns.len() != tallies.len() {
            return Err(Error::shape("pattern and tally counts differ"));
        }
        let raters = rater_names.len();
        let mut merged_patterns: Vec<Vec<usize>> = Vec::new();
        let mut merged_tallies: Vec<u64> = Vec::new();
        for (row, (pattern, tally)) in patterns.into_iter().zip(tallies).enumerate() {
            if pattern.len() != raters {
                return Err(Error::shape(format!(
                    "pattern {} has {} ratings, expected {}",
                    row + 1,
                    pattern.len(),
                    raters
                )));
            }
            if tally == 0 {
                return Err(Error::domain(format!("pattern {} has a zero tally", row + 1)));
            }
            for &cell in &pattern {
                if cell >= categories {
                    return Err(Error::shape(format!(
                        "rating {} outside 1..={}",
                        cell + 1,
                        categories
                    )));
                }
            }
            if let Some(pos) = merged_patterns.iter().position(|p| *p == pattern) {
                merged_tallies[pos] += tally;
                warnings.push(format!(
                    "duplicate pattern at row {}: tallies merged (now {})",
                    row + 1,
                    merged_tallies[pos]
                ));
            } else {
                merged_patterns.push(pattern);
                merged_tallies.push(tally);
            }
        }
        Ok(Self { patterns: merged_patterns, tallies: merged_tallies, categories, rater_names })
    }

    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    pub fn tallies(&self) -> &[u64] {
        &self.tallies
    }

    pub fn n_patterns(&self) -> usize {
        self.patterns.len()
    }

    pub fn raters(&self) -> usize {
        self.rater_names.len()
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    /// Number of items represented (sum of tallies).
    pub fn total_items(&self) -> u64 {
        self.tallies.iter().sum()
    }

    pub fn rater_names(&self) -> &[String] {
        &self.rater_names
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Long,
    Wide,
    Grouped,
}

impl Format {
    pub fn as_str(&self) -> &'static str {
        match self {
            Format::Long => "long",
            Format::Wide => "wide",
            Format::Grouped => "grouped",
        }
    }
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "long" => Ok(Format::Long),
            "wide" => Ok(Format::Wide),
            "grouped" => Ok(Format::Grouped),
            other => Err(Error::domain(format!("unknown data format '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RatingData {
    Long(LongRatings),
    Wide(WideRatings),
    Grouped(GroupedRatings),
}

/// Where a dataset came from, plus any parse/merge warnings.
#[derive(Debug, Clone, Default)]
pub struct Provenance {
    pub source: String,
    pub warnings: Vec<String>,
}

/// A validated dataset in exactly one of the three formats.
#[derive(Debug, Clone)]
pub struct RatingDataset {
    data: RatingData,
    provenance: Provenance,
}

impl RatingDataset {
    pub fn new(data: RatingData, provenance: Provenance) -> Self {
        Self { data, provenance }
    }

    pub fn from_long(long: LongRatings) -> Self {
        Self::new(RatingData::Long(long), Provenance::default())
    }

    pub fn data(&self) -> &RatingData {
        &self.data
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn format(&self) -> Format {
        match &self.data {
            RatingData::Long(_) => Format::Long,
            RatingData::Wide(_) => Format::Wide,
            RatingData::Grouped(_) => Format::Grouped,
        }
    }

    pub fn as_long(&self) -> Option<&LongRatings> {
        match &self.data {
            RatingData::Long(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_wide(&self) -> Option<&WideRatings> {
        match &self.data {
            RatingData::Wide(w) => Some(w),
            _ => None,
        }
    }

    pub fn as_grouped(&self) -> Option<&GroupedRatings> {
        match &self.data {
            RatingData::Grouped(g) => Some(g),
            _ => None,
        }
    }

    pub fn categories(&self) -> usize {
        match &self.data {
            RatingData::Long(l) => l.categories(),
            RatingData::Wide(w) => w.categories(),
            RatingData::Grouped(g) => g.categories(),
        }
    }

    pub fn raters(&self) -> usize {
        match &self.data {
            RatingData::Long(l) => l.raters(),
            RatingData::Wide(w) => w.raters(),
            RatingData::Grouped(g) => g.raters(),
        }
    }

    /// Item count; for grouped data this is the sum of tallies.
    pub fn items(&self) -> usize {
        match &self.data {
            RatingData::Long(l) => l.items(),
            RatingData::Wide(w) => w.items(),
            RatingData::Grouped(g) => g.total_items() as usize,
        }
    }

    /// Convert to long format. Wide rows drop missing cells (item-major order);
    /// grouped patterns are replicated tally-many times with fresh item indices.
    pub fn to_long(&self) -> Result<RatingDataset> {
        let long = match &self.data {
            RatingData::Long(l) => l.clone(),
            RatingData::Wide(w) => {
                let mut entries = Vec::with_capacity(w.n_ratings());
                for (i, row) in w.rows().iter().enumerate() {
                    for (j, cell) in row.iter().enumerate() {
                        if let Some(rating) = cell {
                            entries.push(LongEntry { item: i, rater: j, rating: *rating });
                        }
                    }
                }
                LongRatings::new(
                    entries,
                    w.categories(),
                    w.item_labels().to_vec(),
                    (1..=w.raters() as i64).collect(),
                )?
            }
            RatingData::Grouped(g) => {
                let total = g.total_items() as usize;
                let mut entries = Vec::with_capacity(total * g.raters());
                let mut item = 0usize;
                for (pattern, &tally) in g.patterns().iter().zip(g.tallies()) {
                    for _ in 0..tally {
                        for (j, &rating) in pattern.iter().enumerate() {
                            entries.push(LongEntry { item, rater: j, rating });
                        }
                        item += 1;
                    }
                }
                LongRatings::new(
                    entries,
                    g.categories(),
                    (1..=total as i64).collect(),
                    (1..=g.raters() as i64).collect(),
                )?
            }
        };
        Ok(RatingDataset::new(RatingData::Long(long), self.provenance.clone()))
    }

    /// Convert to grouped format. Requires complete data with exactly one
    /// rating per (item, rater) pair.
    pub fn to_grouped(&self) -> Result<RatingDataset> {
        let mut provenance = self.provenance.clone();
        let grouped = match &self.data {
            RatingData::Grouped(g) => g.clone(),
            RatingData::Long(_) | RatingData::Wide(_) => {
                let (rows, rater_names, categories) = self.complete_matrix()?;
                let mut patterns: Vec<Vec<usize>> = Vec::new();
                let mut tallies: Vec<u64> = Vec::new();
                for row in rows {
                    if let Some(pos) = patterns.iter().position(|p| *p == row) {
                        tallies[pos] += 1;
                    } else {
                        patterns.push(row);
                        tallies.push(1);
                    }
                }
                GroupedRatings::new(
                    patterns,
                    tallies,
                    categories,
                    rater_names,
                    &mut provenance.warnings,
                )?
            }
        };
        Ok(RatingDataset::new(RatingData::Grouped(grouped), provenance))
    }

    /// Convert to wide format. Requires at most one rating per (item, rater).
    pub fn to_wide(&self) -> Result<RatingDataset> {
        let wide = match &self.data {
            RatingData::Wide(w) => w.clone(),
            RatingData::Long(l) => {
                let mut rows = vec![vec![None; l.raters()]; l.items()];
                for e in l.entries() {
                    if rows[e.item][e.rater].is_some() {
                        return Err(Error::unsupported(format!(
                            "item {} has repeated ratings from rater {}; wide format holds at most one",
                            l.item_labels()[e.item],
                            l.rater_labels()[e.rater]
                        )));
                    }
                    rows[e.item][e.rater] = Some(e.rating);
                }
                let rater_names =
                    l.rater_labels().iter().map(|r| format!("rater_{r}")).collect();
                WideRatings::new(
                    rows,
                    l.categories(),
                    l.item_labels().to_vec(),
                    rater_names,
                    true,
                )?
            }
            RatingData::Grouped(g) => {
                let total = g.total_items() as usize;
                let mut rows = Vec::with_capacity(total);
                for (pattern, &tally) in g.patterns().iter().zip(g.tallies()) {
                    for _ in 0..tally {
                        rows.push(pattern.iter().map(|&r| Some(r)).collect());
                    }
                }
                WideRatings::new(
                    rows,
                    g.categories(),
                    (1..=total as i64).collect(),
                    g.rater_names().to_vec(),
                    true,
                )?
            }
        };
        Ok(RatingDataset::new(RatingData::Wide(wide), self.provenance.clone()))
    }

    /// Full I x J rating matrix; errors if any cell is missing or repeated.
    fn complete_matrix(&self) -> Result<(Vec<Vec<usize>>, Vec<String>, usize)> {
        match &self.data {
            RatingData::Long(l) => {
                let mut rows = vec![vec![None; l.raters()]; l.items()];
                for e in l.entries() {
                    if rows[e.item][e.rater].is_some() {
                        return Err(Error::unsupported(format!(
                            "item {} has repeated ratings from rater {}; grouped format holds exactly one",
                            l.item_labels()[e.item],
                            l.rater_labels()[e.rater]
                        )));
                    }
                    rows[e.item][e.rater] = Some(e.rating);
                }
                let rows = complete_or_error(rows, l.item_labels())?;
                let names = l.rater_labels().iter().map(|r| format!("rater_{r}")).collect();
                Ok((rows, names, l.categories()))
            }
            RatingData::Wide(w) => {
                let rows = complete_or_error(w.rows().to_vec(), w.item_labels())?;
                Ok((rows, w.rater_names().to_vec(), w.categories()))
            }
            RatingData::Grouped(g) => {
                let mut rows = Vec::new();
                for (pattern, &tally) in g.patterns().iter().zip(g.tallies()) {
                    for _ in 0..tally {
                        rows.push(pattern.clone());
                    }
                }
                Ok((rows, g.rater_names().to_vec(), g.categories()))
            }
        }
    }
}

fn complete_or_error(
    rows: Vec<Vec<Option<usize>>>,
    item_labels: &[i64],
) -> Result<Vec<Vec<usize>>> {
    rows.into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, cell)| {
                    cell.ok_or_else(|| {
                        Error::unsupported(format!(
                            "item {} is missing a rating from rater {}; grouped format does not allow missing values",
                            item_labels[i],
                            j + 1
                        ))
                    })
                })
                .collect()
        })
        .collect()
}

fn sorted_unique(values: impl Iterator<Item = i64>) -> Vec<i64> {
    let mut v: Vec<i64> = values.collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn index_of(sorted: &[i64], value: i64) -> usize {
    sorted.binary_search(&value).expect("label missing from index map")
}

pub(crate) fn resolve_categories(max_rating: usize, requested: Option<usize>) -> Result<usize> {
    match requested {
        None => Ok(max_rating),
        Some(k) if k >= max_rating => Ok(k),
        Some(k) => Err(Error::domain(format!(
            "requested {k} categories but the data contains rating {max_rating}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_1a() -> RatingDataset {
        let rows =
            [(1, 1, 3), (1, 2, 4), (2, 1, 2), (2, 2, 2), (3, 1, 2), (3, 2, 2)];
        RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap())
    }

    #[test]
    fn labelled_long_infers_counts() {
        let d = table_1a();
        let l = d.as_long().unwrap();
        assert_eq!(l.items(), 3);
        assert_eq!(l.raters(), 2);
        assert_eq!(l.categories(), 4);
        assert_eq!(l.n_ratings(), 6);
    }

    #[test]
    fn sparse_labels_map_densely() {
        let rows = [(10, 7, 1), (30, 7, 2), (30, 9, 2)];
        let l = LongRatings::from_labelled(&rows, None).unwrap();
        assert_eq!(l.items(), 2);
        assert_eq!(l.raters(), 2);
        assert_eq!(l.item_labels(), &[10, 30]);
        assert_eq!(l.rater_labels(), &[7, 9]);
        assert_eq!(l.entries()[1], LongEntry { item: 1, rater: 0, rating: 1 });
    }

    #[test]
    fn category_override_must_cover_data() {
        let rows = [(1, 1, 3)];
        assert!(LongRatings::from_labelled(&rows, Some(2)).is_err());
        let l = LongRatings::from_labelled(&rows, Some(5)).unwrap();
        assert_eq!(l.categories(), 5);
    }

    #[test]
    fn long_to_grouped_matches_table_1c() {
        let grouped = table_1a().to_grouped().unwrap();
        let g = grouped.as_grouped().unwrap();
        assert_eq!(g.patterns(), &[vec![2, 3], vec![1, 1]]);
        assert_eq!(g.tallies(), &[1, 2]);
        assert_eq!(g.total_items(), 3);
    }

    #[test]
    fn grouped_to_long_expands_tallies() {
        let long = table_1a().to_grouped().unwrap().to_long().unwrap();
        let l = long.as_long().unwrap();
        assert_eq!(l.items(), 3);
        assert_eq!(l.n_ratings(), 6);
        // pattern (3,4) once, then (2,2) twice
        assert_eq!(l.entries()[0], LongEntry { item: 0, rater: 0, rating: 2 });
        assert_eq!(l.entries()[2], LongEntry { item: 1, rater: 0, rating: 1 });
        assert_eq!(l.entries()[4], LongEntry { item: 2, rater: 0, rating: 1 });
    }

    #[test]
    fn long_identity_conversion() {
        let d = table_1a();
        let l2 = d.to_long().unwrap();
        assert_eq!(d.as_long().unwrap(), l2.as_long().unwrap());
    }

    #[test]
    fn grouped_conversion_is_idempotent() {
        let g1 = table_1a().to_grouped().unwrap();
        let g2 = g1.to_grouped().unwrap();
        assert_eq!(g1.as_grouped().unwrap(), g2.as_grouped().unwrap());
    }

    #[test]
    fn incomplete_long_cannot_group() {
        let rows = [(1, 1, 3), (1, 2, 4), (2, 1, 2)];
        let d = RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap());
        assert!(matches!(d.to_grouped(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn repeated_ratings_cannot_group() {
        let rows = [(1, 1, 3), (1, 1, 4)];
        let d = RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap());
        assert!(matches!(d.to_grouped(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn duplicate_grouped_patterns_merge_with_warning() {
        let mut warnings = Vec::new();
        let g = GroupedRatings::new(
            vec![vec![0], vec![0], vec![1]],
            vec![2, 3, 1],
            2,
            vec!["rater_1".into()],
            &mut warnings,
        )
        .unwrap();
        assert_eq!(g.patterns(), &[vec![0], vec![1]]);
        assert_eq!(g.tallies(), &[5, 1]);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn identical_rows_collapse_to_one_pattern() {
        let rows: Vec<(i64, i64, i64)> =
            (1..=4).flat_map(|i| [(i, 1, 2), (i, 2, 2)]).collect();
        let d = RatingDataset::from_long(LongRatings::from_labelled(&rows, None).unwrap());
        let g = d.to_grouped().unwrap();
        assert_eq!(g.as_grouped().unwrap().n_patterns(), 1);
        assert_eq!(g.as_grouped().unwrap().tallies(), &[4]);
    }
}
