//! CSV parsing and serialization for the three rating-data formats.
//!
//! Files are UTF-8, comma-separated, with an optional header row. Long files
//! carry columns item,rater,rating; wide files an optional item column plus one
//! column per rater; grouped files one column per rater plus a final tally
//! column. Serialization mirrors parsing, so a parse/serialize round trip
//! reproduces the file up to the header.

use std::io::Read;

use crate::error::{Error, Result};

use super::{
    resolve_categories, GroupedRatings, LongRatings, Provenance, RatingData, RatingDataset,
    WideRatings,
};

/// Header handling: detect automatically (any non-integer cell in the first
/// row marks it as a header), or force presence/absence.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HeaderMode {
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub header: HeaderMode,
    /// Token marking a missing rating; the empty string is always treated as
    /// missing in wide format.
    pub missing: String,
    /// Category count override; must be at least the largest observed rating.
    pub categories: Option<usize>,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self { header: HeaderMode::Auto, missing: "NA".into(), categories: None }
    }
}

struct RawTable {
    header: Option<Vec<String>>,
    /// Data rows as (1-based source line, cells).
    rows: Vec<(usize, Vec<String>)>,
}

fn read_table(reader: impl Read, options: &ParseOptions) -> Result<RawTable> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut records = Vec::new();
    for (idx, record) in csv_reader.records().enumerate() {
        let record = record?;
        let cells: Vec<String> = record.iter().map(|c| c.to_string()).collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue; // skip blank lines
        }
        records.push((idx + 1, cells));
    }
    if records.is_empty() {
        return Err(Error::EmptyData("no rows found".into()));
    }
    let first_is_header = match options.header {
        HeaderMode::Present => true,
        HeaderMode::Absent => false,
        HeaderMode::Auto => records[0]
            .1
            .iter()
            .any(|c| !c.is_empty() && c != &options.missing && c.parse::<i64>().is_err()),
    };
    let header = if first_is_header {
        Some(records.remove(0).1)
    } else {
        None
    };
    if records.is_empty() {
        return Err(Error::EmptyData("no data rows after the header".into()));
    }
    let width = records[0].1.len();
    for (line, cells) in &records {
        if cells.len() != width {
            return Err(Error::Parse {
                line: *line,
                message: format!("expected {} cells, found {}", width, cells.len()),
            });
        }
    }
    Ok(RawTable { header, rows: records })
}

fn parse_int(cell: &str, line: usize, what: &str) -> Result<i64> {
    cell.parse::<i64>().map_err(|_| Error::Parse {
        line,
        message: format!("{what} '{cell}' is not an integer"),
    })
}

/// Parse long-format CSV: columns item,rater,rating (by header name when a
/// header is present, positional otherwise). Rows whose rating equals the
/// missing token are dropped.
pub fn parse_long(reader: impl Read, source: &str, options: &ParseOptions) -> Result<RatingDataset> {
    let table = read_table(reader, options)?;
    let columns: [usize; 3] = match &table.header {
        Some(names) => {
            let find = |want: &str| {
                names.iter().position(|n| n.eq_ignore_ascii_case(want))
            };
            match (find("item"), find("rater"), find("rating")) {
                (Some(i), Some(j), Some(y)) => [i, j, y],
                _ => [0, 1, 2],
            }
        }
        None => [0, 1, 2],
    };
    let width = table.rows[0].1.len();
    if width < 3 {
        return Err(Error::Parse {
            line: table.rows[0].0,
            message: format!("long format needs 3 columns, found {width}"),
        });
    }
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(table.rows.len());
    for (line, cells) in &table.rows {
        let rating_cell = &cells[columns[2]];
        if rating_cell == &options.missing || rating_cell.is_empty() {
            warnings.push(format!("line {line}: dropped row with missing rating"));
            continue;
        }
        let item = parse_int(&cells[columns[0]], *line, "item")?;
        let rater = parse_int(&cells[columns[1]], *line, "rater")?;
        let rating = parse_int(rating_cell, *line, "rating")?;
        rows.push((item, rater, rating));
    }
    if rows.is_empty() {
        return Err(Error::EmptyData("all rows had missing ratings".into()));
    }
    let long = LongRatings::from_labelled(&rows, options.categories)?;
    let provenance = Provenance { source: source.into(), warnings };
    Ok(RatingDataset::new(RatingData::Long(long), provenance))
}

/// Parse wide-format CSV: one row per item, one column per rater. An item
/// column is used when the header names one; otherwise the row index labels
/// the items.
pub fn parse_wide(reader: impl Read, source: &str, options: &ParseOptions) -> Result<RatingDataset> {
    let table = read_table(reader, options)?;
    let item_column = table
        .header
        .as_ref()
        .and_then(|names| names.iter().position(|n| n.eq_ignore_ascii_case("item")));
    let width = table.rows[0].1.len();
    let rater_columns: Vec<usize> = (0..width).filter(|c| Some(*c) != item_column).collect();
    if rater_columns.is_empty() {
        return Err(Error::EmptyData("wide data has no rater columns".into()));
    }
    let rater_names: Vec<String> = match &table.header {
        Some(names) => rater_columns.iter().map(|&c| names[c].clone()).collect(),
        None => (1..=rater_columns.len()).map(|j| format!("rater_{j}")).collect(),
    };

    let mut item_labels = Vec::with_capacity(table.rows.len());
    let mut raw_rows = Vec::with_capacity(table.rows.len());
    let mut max_rating = 0usize;
    for (row_idx, (line, cells)) in table.rows.iter().enumerate() {
        let label = match item_column {
            Some(c) => parse_int(&cells[c], *line, "item")?,
            None => (row_idx + 1) as i64,
        };
        let mut row = Vec::with_capacity(rater_columns.len());
        for &c in &rater_columns {
            let cell = &cells[c];
            if cell.is_empty() || cell == &options.missing {
                row.push(None);
            } else {
                let rating = parse_int(cell, *line, "rating")?;
                if rating <= 0 {
                    return Err(Error::domain(format!(
                        "rating must be positive, got {rating} on line {line}"
                    )));
                }
                max_rating = max_rating.max(rating as usize);
                row.push(Some(rating as usize - 1));
            }
        }
        if row.iter().all(|c| c.is_none()) {
            return Err(Error::domain(format!("item {label} (line {line}) has only missing ratings")));
        }
        item_labels.push(label);
        raw_rows.push(row);
    }
    if item_labels.len() != super::sorted_unique(item_labels.iter().copied()).len() {
        return Err(Error::domain("duplicate item labels in wide data"));
    }
    let categories = resolve_categories(max_rating, options.categories)?;
    let wide = WideRatings::new(raw_rows, categories, item_labels, rater_names, item_column.is_some())?;
    let provenance = Provenance { source: source.into(), warnings: Vec::new() };
    Ok(RatingDataset::new(RatingData::Wide(wide), provenance))
}

/// Parse grouped-format CSV: one column per rater, final column the tally.
/// Missing entries are rejected; duplicate patterns are merged with a warning.
pub fn parse_grouped(
    reader: impl Read,
    source: &str,
    options: &ParseOptions,
) -> Result<RatingDataset> {
    let table = read_table(reader, options)?;
    let width = table.rows[0].1.len();
    if width < 2 {
        return Err(Error::Parse {
            line: table.rows[0].0,
            message: "grouped format needs at least one rater column plus a tally".into(),
        });
    }
    let raters = width - 1;
    let rater_names: Vec<String> = match &table.header {
        Some(names) => names[..raters].to_vec(),
        None => (1..=raters).map(|j| format!("rater_{j}")).collect(),
    };
    let mut patterns = Vec::with_capacity(table.rows.len());
    let mut tallies = Vec::with_capacity(table.rows.len());
    let mut max_rating = 0usize;
    for (line, cells) in &table.rows {
        let mut pattern = Vec::with_capacity(raters);
        for cell in &cells[..raters] {
            if cell.is_empty() || cell == &options.missing {
                return Err(Error::unsupported(format!(
                    "missing rating on line {line}: grouped format does not allow missing values"
                )));
            }
            let rating = parse_int(cell, *line, "rating")?;
            if rating <= 0 {
                return Err(Error::domain(format!(
                    "rating must be positive, got {rating} on line {line}"
                )));
            }
            max_rating = max_rating.max(rating as usize);
            pattern.push(rating as usize - 1);
        }
        let tally = parse_int(&cells[raters], *line, "tally")?;
        if tally <= 0 {
            return Err(Error::domain(format!("tally must be positive, got {tally} on line {line}")));
        }
        patterns.push(pattern);
        tallies.push(tally as u64);
    }
    let categories = resolve_categories(max_rating, options.categories)?;
    let mut warnings = Vec::new();
    let grouped = GroupedRatings::new(patterns, tallies, categories, rater_names, &mut warnings)?;
    let provenance = Provenance { source: source.into(), warnings };
    Ok(RatingDataset::new(RatingData::Grouped(grouped), provenance))
}

/// Serialize any dataset back to its canonical CSV form.
pub fn serialize(dataset: &RatingDataset) -> String {
    match dataset.data() {
        RatingData::Long(l) => serialize_long(l),
        RatingData::Wide(w) => serialize_wide(w),
        RatingData::Grouped(g) => serialize_grouped(g),
    }
}

pub fn serialize_long(long: &LongRatings) -> String {
    let mut out = String::from("item,rater,rating\n");
    for e in long.entries() {
        out.push_str(&format!(
            "{},{},{}\n",
            long.item_labels()[e.item],
            long.rater_labels()[e.rater],
            e.rating + 1
        ));
    }
    out
}

pub fn serialize_wide(wide: &WideRatings) -> String {
    let mut out = String::new();
    if wide.has_item_column() {
        out.push_str("item,");
    }
    out.push_str(&wide.rater_names().join(","));
    out.push('\n');
    for (i, row) in wide.rows().iter().enumerate() {
        let mut cells = Vec::with_capacity(row.len() + 1);
        if wide.has_item_column() {
            cells.push(wide.item_labels()[i].to_string());
        }
        for cell in row {
            cells.push(match cell {
                Some(r) => (r + 1).to_string(),
                None => "NA".to_string(),
            });
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn serialize_grouped(grouped: &GroupedRatings) -> String {
    let mut out = String::new();
    out.push_str(&grouped.rater_names().join(","));
    out.push_str(",n\n");
    for (pattern, tally) in grouped.patterns().iter().zip(grouped.tallies()) {
        let cells: Vec<String> = pattern.iter().map(|r| (r + 1).to_string()).collect();
        out.push_str(&cells.join(","));
        out.push_str(&format!(",{tally}\n"));
    }
    out
}
