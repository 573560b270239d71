use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SparseRatings;

/// Reads a Matrix Market `coordinate real general` file (1-based indices).
/// `integer` fields are accepted as reals; symmetric, pattern, complex and
/// array files are rejected. Rating bounds are set to the observed min/max.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseRatings> {
    let path = path.as_ref();
    let reader = BufReader::new(File::open(path)?);
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (_, banner) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let banner = banner?;
    let tokens: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    match tokens.iter().map(String::as_str).collect::<Vec<_>>()[..] {
        ["%%matrixmarket", "matrix", "coordinate", "real" | "integer" | "double", "general"] => {}
        _ => return Err(err(1, format!("unsupported banner {banner:?}"))),
    }

    let mut size = None;
    let mut triplets = Vec::new();
    for (line_no, line) in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((m, n, nnz)) = size else {
            let dims: Vec<usize> = fields
                .iter()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| err(line_no, format!("bad size line {trimmed:?}")))?;
            let [m, n, nnz] = dims[..] else {
                return Err(err(line_no, format!("size line needs 3 integers: {trimmed:?}")));
            };
            size = Some((m, n, nnz));
            triplets.reserve(nnz);
            continue;
        };
        if triplets.len() == nnz {
            return Err(err(line_no, format!("more than the declared {nnz} entries")));
        }
        let [i, j, v] = fields[..] else {
            return Err(err(line_no, format!("entry needs 3 fields: {trimmed:?}")));
        };
        let i: usize = i.parse().map_err(|_| err(line_no, format!("bad row index {i:?}")))?;
        let j: usize = j.parse().map_err(|_| err(line_no, format!("bad column index {j:?}")))?;
        let v: f64 = v.parse().map_err(|_| err(line_no, format!("bad value {v:?}")))?;
        if i == 0 || j == 0 || i > m || j > n {
            return Err(err(
                line_no,
                format!("index ({i}, {j}) outside declared {m}x{n}"),
            ));
        }
        triplets.push((i - 1, j - 1, v));
    }
    let (m, n, nnz) = size.ok_or_else(|| err(1, "missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(err(0, format!("declared {nnz} entries, found {}", triplets.len())));
    }
    SparseRatings::from_triplets_observed(m, n, &triplets)
}

/// Writes `a` as `coordinate real general` with shortest round-trip values.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseRatings) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.rows(), a.cols(), a.nnz())?;
    for (i, j, v) in a.iter() {
        writeln!(w, "{} {} {v:?}", i + 1, j + 1)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn one_based_to_zero_based() {
        let f = write("%%MatrixMarket matrix coordinate real general\n% comment\n2 2 1\n1 2 3.0\n");
        let a = load_matrix_market(f.path()).unwrap();
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.get(0, 1), Some(3.0));
        assert_eq!(a.rating_range(), (3.0, 3.0));
    }

    #[test]
    fn symmetric_is_rejected() {
        let f = write("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 1 3.0\n");
        assert!(matches!(load_matrix_market(f.path()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn out_of_bounds_index() {
        let f = write("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
        assert!(matches!(load_matrix_market(f.path()), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn entry_count_mismatch() {
        let f = write("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n");
        assert!(load_matrix_market(f.path()).is_err());
    }
}
