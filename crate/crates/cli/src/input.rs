use std::path::Path;

use adaptive_cf::data::{load_matrix_market, load_ratings_csv, CsvSchema, RatingsDataset};
use adaptive_cf::SparseRatings;

use crate::args::{InputArgs, InputFormat, RatingRange};
use crate::error::CliResult;
use crate::report::DatasetStats;

pub fn resolve_format(input: &InputArgs) -> InputFormat {
    input.format.unwrap_or_else(|| match extension(&input.input).as_deref() {
        Some("mtx") => InputFormat::Matrixmarket,
        _ => InputFormat::Csv,
    })
}

fn extension(path: &Path) -> Option<String> {
    path.extension().map(|e| e.to_string_lossy().to_ascii_lowercase())
}

fn schema(input: &InputArgs) -> CsvSchema {
    CsvSchema {
        delimiter: input.delimiter,
        user_col: input.columns.user,
        item_col: input.columns.item,
        rating_col: input.columns.rating,
        has_header: input.header,
        rating_range: input.rating_range.map(|RatingRange(lo, hi)| (lo, hi)),
    }
}

/// Loads the input as a ratings dataset. Matrix Market entries become
/// ratings keyed by their 1-based row and column numbers.
pub fn load_dataset(input: &InputArgs) -> CliResult<RatingsDataset> {
    Ok(match resolve_format(input) {
        InputFormat::Csv => load_ratings_csv(&input.input, &schema(input))?,
        InputFormat::Matrixmarket => {
            let a = load_matrix_market(&input.input)?;
            let range = input
                .rating_range
                .map(|RatingRange(lo, hi)| (lo, hi))
                .unwrap_or(a.rating_range());
            RatingsDataset::from_records(
                a.iter().map(|(i, j, v)| ((i + 1).to_string(), (j + 1).to_string(), v)),
                Some(range),
            )?
        }
    })
}

/// Loads the input as a sparse matrix. Matrix Market keeps its declared
/// shape, including empty rows and columns.
pub fn load_matrix(input: &InputArgs) -> CliResult<(SparseRatings, DatasetStats)> {
    match resolve_format(input) {
        InputFormat::Csv => {
            let ds = load_ratings_csv(&input.input, &schema(input))?;
            let a = ds.to_sparse()?;
            let mut stats = DatasetStats::of_matrix(input, &a);
            stats.duplicates = Some(ds.duplicates());
            Ok((a, stats))
        }
        InputFormat::Matrixmarket => {
            let a = load_matrix_market(&input.input)?;
            let stats = DatasetStats::of_matrix(input, &a);
            Ok((a, stats))
        }
    }
}
