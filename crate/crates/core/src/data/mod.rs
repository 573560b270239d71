//! Ratings ingestion, sparsity pruning and train/validation/test splitting.

mod dataset;
mod mtx;
mod prune;
mod split;

pub use dataset::{load_ratings_csv, CsvSchema, RatingsDataset};
pub use mtx::{load_matrix_market, write_matrix_market};
pub use prune::prune_min_degree;
pub use split::{split, split_manifest, write_split_manifest, Split, SplitSpec};
