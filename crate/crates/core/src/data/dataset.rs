use std::collections::HashMap;
use std::path::Path;

use crate::cf::RatingSample;
use crate::error::{Error, Result};
use crate::linalg::{observed_range, SparseRatings};

/// Column layout of a ratings file.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvSchema {
    pub delimiter: u8,
    pub user_col: usize,
    pub item_col: usize,
    pub rating_col: usize,
    pub has_header: bool,
    /// Declared rating bounds; ratings outside are rejected. When absent the
    /// observed min/max is used.
    pub rating_range: Option<(f64, f64)>,
}

impl Default for CsvSchema {
    fn default() -> Self {
        CsvSchema {
            delimiter: b',',
            user_col: 0,
            item_col: 1,
            rating_col: 2,
            has_header: false,
            rating_range: None,
        }
    }
}

impl CsvSchema {
    /// `userId,movieId,rating,timestamp` with a header line.
    pub fn movielens() -> Self {
        CsvSchema {
            has_header: true,
            ..Self::default()
        }
    }
}

/// Ratings with raw ids remapped to contiguous indices.
///
/// Indices follow first appearance in the input. Duplicate `(user, item)`
/// pairs keep the last rating and are counted in
/// [`duplicates`](Self::duplicates).
#[derive(Clone, Debug, PartialEq)]
pub struct RatingsDataset {
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    samples: Vec<RatingSample>,
    rating_min: f64,
    rating_max: f64,
    duplicates: usize,
}

impl RatingsDataset {
    /// Builds a dataset from raw `(user, item, rating)` records.
    pub fn from_records<U, I>(
        records: impl IntoIterator<Item = (U, I, f64)>,
        rating_range: Option<(f64, f64)>,
    ) -> Result<Self>
    where
        U: Into<String>,
        I: Into<String>,
    {
        let mut builder = Builder::default();
        for (u, i, r) in records {
            builder.push(u.into(), i.into(), r);
        }
        builder.finish(rating_range)
    }

    pub(crate) fn from_parts(
        user_ids: Vec<String>,
        item_ids: Vec<String>,
        samples: Vec<RatingSample>,
        rating_range: (f64, f64),
        duplicates: usize,
    ) -> Self {
        RatingsDataset {
            user_ids,
            item_ids,
            samples,
            rating_min: rating_range.0,
            rating_max: rating_range.1,
            duplicates,
        }
    }

    pub fn users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn items(&self) -> usize {
        self.item_ids.len()
    }

    /// Number of distinct ratings.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[RatingSample] {
        &self.samples
    }

    pub fn rating_range(&self) -> (f64, f64) {
        (self.rating_min, self.rating_max)
    }

    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    pub fn user_ids(&self) -> &[String] {
        &self.user_ids
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    /// All ratings as a `users × items` sparse matrix.
    pub fn to_sparse(&self) -> Result<SparseRatings> {
        to_sparse(self.users(), self.items(), &self.samples, self.rating_range())
    }
}

pub(crate) fn to_sparse(
    m: usize,
    n: usize,
    samples: &[RatingSample],
    range: (f64, f64),
) -> Result<SparseRatings> {
    let triplets: Vec<_> = samples.iter().map(|s| (s.user, s.item, s.rating)).collect();
    SparseRatings::from_triplets(m, n, &triplets, range)
}

#[derive(Default)]
struct Builder {
    user_index: HashMap<String, usize>,
    item_index: HashMap<String, usize>,
    user_ids: Vec<String>,
    item_ids: Vec<String>,
    pairs: HashMap<(usize, usize), usize>,
    samples: Vec<RatingSample>,
    duplicates: usize,
}

impl Builder {
    fn push(&mut self, user: String, item: String, rating: f64) {
        let u = intern(&mut self.user_index, &mut self.user_ids, user);
        let i = intern(&mut self.item_index, &mut self.item_ids, item);
        match self.pairs.get(&(u, i)) {
            Some(&pos) => {
                self.samples[pos].rating = rating;
                self.duplicates += 1;
            }
            None => {
                self.pairs.insert((u, i), self.samples.len());
                self.samples.push(RatingSample::new(u, i, rating));
            }
        }
    }

    fn finish(self, rating_range: Option<(f64, f64)>) -> Result<RatingsDataset> {
        if self.samples.is_empty() {
            return Err(Error::EmptyDataset("no ratings".into()));
        }
        let range = match rating_range {
            Some((lo, hi)) => {
                if let Some(s) = self.samples.iter().find(|s| s.rating < lo || s.rating > hi) {
                    return Err(Error::InvalidArgument(format!(
                        "rating {} outside declared range [{lo}, {hi}]",
                        s.rating
                    )));
                }
                (lo, hi)
            }
            None => observed_range(self.samples.iter().map(|s| s.rating)),
        };
        Ok(RatingsDataset::from_parts(
            self.user_ids,
            self.item_ids,
            self.samples,
            range,
            self.duplicates,
        ))
    }
}

fn intern(index: &mut HashMap<String, usize>, ids: &mut Vec<String>, raw: String) -> usize {
    if let Some(&i) = index.get(&raw) {
        return i;
    }
    let i = ids.len();
    ids.push(raw.clone());
    index.insert(raw, i);
    i
}

/// Reads a delimited ratings file. Extra columns (e.g. timestamps) are
/// ignored.
pub fn load_ratings_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<RatingsDataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut builder = Builder::default();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => return Err(csv_error(path, e)),
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        if std::mem::take(&mut first) && schema.has_header {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let field = |col: usize, name: &str| {
            record
                .get(col)
                .ok_or_else(|| parse_err(line, format!("missing {name} column {col}")))
        };
        let user = field(schema.user_col, "user")?;
        let item = field(schema.item_col, "item")?;
        let rating_text = field(schema.rating_col, "rating")?;
        let rating: f64 = rating_text
            .parse()
            .map_err(|_| parse_err(line, format!("rating {rating_text:?} is not a number")))?;
        if !rating.is_finite() {
            return Err(parse_err(line, format!("rating {rating_text:?} is not finite")));
        }
        if let Some((lo, hi)) = schema.rating_range {
            if rating < lo || rating > hi {
                return Err(parse_err(line, format!("rating {rating} outside [{lo}, {hi}]")));
            }
        }
        builder.push(user.to_string(), item.to_string(), rating);
    }
    if builder.samples.is_empty() {
        return Err(Error::EmptyDataset(format!("{} has no ratings", path.display())));
    }
    builder.finish(schema.rating_range)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn two_rows() {
        let f = write("1,10,4.0\n2,10,3.5");
        let ds = load_ratings_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!((ds.users(), ds.items(), ds.len()), (2, 1, 2));
        assert_eq!(ds.rating_range(), (3.5, 4.0));
    }

    #[test]
    fn header_and_timestamp_are_ignored() {
        let f = write("userId,movieId,rating,timestamp\n1,31,2.5,1260759144\n1,1029,3.0,1260759179\n");
        let ds = load_ratings_csv(f.path(), &CsvSchema::movielens()).unwrap();
        assert_eq!((ds.users(), ds.items(), ds.len()), (1, 2, 2));
        assert_eq!(ds.item_ids(), &["31".to_string(), "1029".to_string()]);
    }

    #[test]
    fn duplicates_last_wins() {
        let f = write("1,10,4.0\n2,10,3.5\n1,10,2.0\n");
        let ds = load_ratings_csv(f.path(), &CsvSchema::default()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.duplicates(), 1);
        assert_eq!(ds.samples()[0].rating, 2.0);
    }

    #[test]
    fn malformed_row_reports_line() {
        let f = write("1,10,4.0\n2,10,abc\n");
        match load_ratings_csv(f.path(), &CsvSchema::default()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let f = write("1,10,4.0\n2,10\n");
        assert!(matches!(
            load_ratings_csv(f.path(), &CsvSchema::default()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn empty_file() {
        let f = write("");
        assert!(matches!(load_ratings_csv(f.path(), &CsvSchema::default()), Err(Error::EmptyDataset(_))));
        let f = write("userId,movieId,rating\n");
        assert!(matches!(load_ratings_csv(f.path(), &CsvSchema::movielens()), Err(Error::EmptyDataset(_))));
    }

    #[test]
    fn declared_range_is_enforced() {
        let f = write("1,10,4.0\n2,10,7.0\n");
        let schema = CsvSchema {
            rating_range: Some((0.5, 5.0)),
            ..CsvSchema::default()
        };
        assert!(matches!(load_ratings_csv(f.path(), &schema), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn tab_delimited() {
        let f = write("u1\ti1\t3\nu2\ti2\t4\n");
        let schema = CsvSchema {
            delimiter: b'\t',
            ..CsvSchema::default()
        };
        let ds = load_ratings_csv(f.path(), &schema).unwrap();
        assert_eq!(ds.to_sparse().unwrap().nnz(), 2);
    }
}
