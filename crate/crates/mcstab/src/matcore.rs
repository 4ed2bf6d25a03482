//! Shared vocabulary for partially observed matrices: sample sets, masking,
//! norms, RMSE, and the CSV exchange formats.

use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which matrix norm [`norm`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixNorm {
    /// ‖X‖_F = sqrt(Σ xᵢⱼ²).
    Frobenius,
    /// ‖X‖₂ = largest singular value (computed by a full SVD; the crate
    /// targets desk-scale matrices where that is affordable).
    Spectral,
}

/// A set of observed index pairs Ω inside an m×n grid.
///
/// Entries are unique, in range, and stored sorted row-major so that
/// identical sets compare equal and serialize identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    m: usize,
    n: usize,
    entries: Vec<(usize, usize)>,
}

impl SampleSet {
    /// Builds a sample set after validating bounds and uniqueness.
    pub fn new(m: usize, n: usize, mut entries: Vec<(usize, usize)>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "sample grid must be non-empty, got {m}x{n}"
            )));
        }
        for &(i, j) in &entries {
            if i >= m || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "sample ({i}, {j}) outside {m}x{n} grid"
                )));
            }
        }
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "duplicate entries in sample set".into(),
            ));
        }
        Ok(SampleSet { m, n, entries })
    }

    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn ncols(&self) -> usize {
        self.n
    }

    /// Number of observed entries |Ω|.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// |Ω| / (m·n).
    pub fn density(&self) -> f64 {
        self.entries.len() as f64 / (self.m as f64 * self.n as f64)
    }

    /// Observed (row, col) pairs in row-major order.
    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    /// Observed row indices of every column: `out[j]` lists the rows at which
    /// column j is observed, ascending.
    pub fn rows_by_column(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n];
        for &(i, j) in &self.entries {
            out[j].push(i);
        }
        out
    }

    /// Observed column indices of every row, ascending.
    pub fn cols_by_row(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for &(i, j) in &self.entries {
            out[i].push(j);
        }
        out
    }
}

/// Draws exactly `count` distinct index pairs uniformly without replacement
/// from the m×n grid, deterministically for a fixed seed.
///
/// Implemented as a partial Fisher-Yates shuffle of the linear indices, so it
/// costs O(m·n) memory and O(m·n + count) time.
pub fn sample_uniform(m: usize, n: usize, count: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "sample grid must be non-empty, got {m}x{n}"
        )));
    }
    let total = m
        .checked_mul(n)
        .ok_or_else(|| Error::InvalidArgument("m*n overflows".into()))?;
    if count > total {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {count} distinct samples from a {m}x{n} grid ({total} cells)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut linear: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = rng.random_range(i..total);
        linear.swap(i, j);
    }
    let entries = linear[..count].iter().map(|&l| (l / n, l % n)).collect();
    SampleSet::new(m, n, entries)
}

/// Draws exactly `count` distinct row indices from `0..m` uniformly without
/// replacement, ascending, deterministically for a fixed seed.
pub fn sample_rows(m: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    let set = sample_uniform(m, 1, count, seed)?;
    Ok(set.entries().iter().map(|&(i, _)| i).collect())
}

/// A dense value matrix together with the index set on which it is trusted,
/// plus the rating bound k (all true ratings satisfy |y| ≤ k).
///
/// Entries of `values` outside Ω are carried for convenience but ignored by
/// every consumer.
#[derive(Debug, Clone)]
pub struct ObservedMatrix {
    values: DMatrix<f64>,
    omega: SampleSet,
    k: f64,
}

impl ObservedMatrix {
    pub fn new(values: DMatrix<f64>, omega: SampleSet, k: f64) -> Result<Self> {
        if values.nrows() != omega.nrows() || values.ncols() != omega.ncols() {
            return Err(Error::ShapeMismatch {
                expected_rows: omega.nrows(),
                expected_cols: omega.ncols(),
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "rating bound k must be positive and finite, got {k}"
            )));
        }
        for &(i, j) in omega.entries() {
            if !values[(i, j)].is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "observed value at ({i}, {j}) is not finite"
                )));
            }
        }
        Ok(ObservedMatrix { values, omega, k })
    }

    /// Assembles an observed matrix from (row, col, value) triplets; cells not
    /// listed are unobserved.
    pub fn from_triplets(
        m: usize,
        n: usize,
        k: f64,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let omega = SampleSet::new(m, n, triplets.iter().map(|&(i, j, _)| (i, j)).collect())?;
        let mut values = DMatrix::zeros(m, n);
        for &(i, j, v) in triplets {
            values[(i, j)] = v;
        }
        ObservedMatrix::new(values, omega, k)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn omega(&self) -> &SampleSet {
        &self.omega
    }

    pub fn rating_bound(&self) -> f64 {
        self.k
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Dimensions of a completion problem: an m×n matrix of rank r observed at
/// rate p = |Ω|/(m·n).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemShape {
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub p: f64,
}

impl ProblemShape {
    /// Expected sample count p·m·n, rounded to the nearest integer.
    pub fn expected_samples(&self) -> usize {
        (self.p * self.m as f64 * self.n as f64).round() as usize
    }
}

/// Zero-filled masked copy: keeps X on Ω, zeroes everything else.
pub fn project_omega(x: &DMatrix<f64>, omega: &SampleSet) -> Result<DMatrix<f64>> {
    if x.nrows() != omega.nrows() || x.ncols() != omega.ncols() {
        return Err(Error::ShapeMismatch {
            expected_rows: omega.nrows(),
            expected_cols: omega.ncols(),
            rows: x.nrows(),
            cols: x.ncols(),
        });
    }
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    for &(i, j) in omega.entries() {
        out[(i, j)] = x[(i, j)];
    }
    Ok(out)
}

/// Root mean square difference over all cells: ‖A−B‖_F / sqrt(m·n).
pub fn rmse(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::ShapeMismatch {
            expected_rows: a.nrows(),
            expected_cols: a.ncols(),
            rows: b.nrows(),
            cols: b.ncols(),
        });
    }
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        sq += d * d;
    }
    Ok((sq / (a.nrows() as f64 * a.ncols() as f64)).sqrt())
}

/// Frobenius or spectral norm of a dense matrix.
pub fn norm(x: &DMatrix<f64>, kind: MatrixNorm) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InvalidArgument("norm of an empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ));
    }
    match kind {
        MatrixNorm::Frobenius => Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt()),
        MatrixNorm::Spectral => Ok(crate::linalg::singular_values(x)?[0]),
    }
}

// ─── CSV exchange formats ───
//
// Observed matrices travel as triplet CSV with a `row,col,value` header and
// 0-based indices; dense matrices travel as plain CSV, one matrix row per
// line. Both writers emit entries in a canonical order so that equal inputs
// produce byte-identical files.

/// Writes the observed entries as `row,col,value` triplets in row-major order.
pub fn write_triplets<W: Write>(mut w: W, obs: &ObservedMatrix) -> Result<()> {
    writeln!(w, "row,col,value")?;
    for &(i, j) in obs.omega().entries() {
        writeln!(w, "{},{},{}", i, j, obs.values()[(i, j)])?;
    }
    Ok(())
}

/// Reads `row,col,value` triplets written by [`write_triplets`].
///
/// The header line is required; errors carry the 1-based line number.
pub fn read_triplets<R: BufRead>(r: R) -> Result<Vec<(usize, usize, f64)>> {
    let mut out = Vec::new();
    let mut lines = r.lines().enumerate();
    match lines.next() {
        Some((_, Ok(header))) if header.trim() == "row,col,value" => {}
        Some((_, Ok(header))) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `row,col,value`, got `{}`", header.trim()),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(Error::Parse {
                line: 1,
                message: "empty file".into(),
            })
        }
    }
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split(',');
        let parse_field = |field: Option<&str>, what: &str| -> Result<String> {
            field.map(|s| s.trim().to_string()).ok_or(Error::Parse {
                line: lineno,
                message: format!("missing {what} field"),
            })
        };
        let row_s = parse_field(fields.next(), "row")?;
        let col_s = parse_field(fields.next(), "col")?;
        let val_s = parse_field(fields.next(), "value")?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "more than three fields".into(),
            });
        }
        let row = row_s.parse::<usize>().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad row index `{row_s}`: {e}"),
        })?;
        let col = col_s.parse::<usize>().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad col index `{col_s}`: {e}"),
        })?;
        let value = val_s.parse::<f64>().map_err(|e| Error::Parse {
            line: lineno,
            message: format!("bad value `{val_s}`: {e}"),
        })?;
        out.push((row, col, value));
    }
    Ok(out)
}

/// Writes a dense matrix as CSV, one matrix row per line.
pub fn write_dense<W: Write>(mut w: W, x: &DMatrix<f64>) -> Result<()> {
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if j > 0 {
                write!(w, ",")?;
            }
            write!(w, "{}", x[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// Reads a dense CSV matrix written by [`write_dense`]. All rows must have
/// the same number of fields.
pub fn read_dense<R: BufRead>(r: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in trimmed.split(',') {
            row.push(field.trim().parse::<f64>().map_err(|e| Error::Parse {
                line: lineno,
                message: format!("bad value `{}`: {e}", field.trim()),
            })?);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {} fields, got {}", first.len(), row.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty matrix".into(),
        });
    }
    let m = rows.len();
    let n = rows[0].len();
    Ok(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sample_uniform_draws_distinct_in_range_pairs() {
        let s = sample_uniform(3, 4, 5, 7).unwrap();
        assert_eq!(s.len(), 5);
        let mut seen = std::collections::HashSet::new();
        for &(i, j) in s.entries() {
            assert!(i < 3 && j < 4);
            assert!(seen.insert((i, j)));
        }
    }

    #[test]
    fn sample_uniform_exhausts_grid() {
        let s = sample_uniform(2, 2, 4, 123).unwrap();
        assert_eq!(s.entries(), &[(0, 0), (0, 1), (1, 0), (1, 1)]);
    }

    #[test]
    fn sample_uniform_rejects_oversized_count() {
        assert!(matches!(
            sample_uniform(2, 3, 7, 0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            sample_uniform(0, 3, 0, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sample_uniform_is_deterministic_and_seed_sensitive() {
        let a = sample_uniform(30, 40, 200, 42).unwrap();
        let b = sample_uniform(30, 40, 200, 42).unwrap();
        let c = sample_uniform(30, 40, 200, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_uniform_is_unbiased_over_cells() {
        // Oracle: with 4000 draws of 3 cells from a 2x3 grid, each cell is hit
        // 2000 times in expectation; a 10-sigma band is ~±440.
        let mut hits = vec![0usize; 6];
        for seed in 0..4000u64 {
            for &(i, j) in sample_uniform(2, 3, 3, seed).unwrap().entries() {
                hits[i * 3 + j] += 1;
            }
        }
        for &h in &hits {
            assert!((h as i64 - 2000).abs() < 440, "cell hit count {h}");
        }
    }

    #[test]
    fn project_omega_masks_and_is_idempotent() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let omega = SampleSet::new(2, 2, vec![(0, 0), (1, 1)]).unwrap();
        let p = project_omega(&x, &omega).unwrap();
        assert_eq!(p, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]));
        let pp = project_omega(&p, &omega).unwrap();
        assert_eq!(p, pp);
    }

    #[test]
    fn project_omega_rejects_shape_mismatch() {
        let x = DMatrix::zeros(2, 3);
        let omega = SampleSet::new(2, 2, vec![(0, 0)]).unwrap();
        assert!(matches!(
            project_omega(&x, &omega),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn rmse_matches_hand_value() {
        // ‖A‖_F² = 1+4+9+16 = 30, so rmse(A, 0) = sqrt(30/4) = sqrt(7.5).
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = DMatrix::zeros(2, 2);
        assert_relative_eq!(rmse(&a, &b).unwrap(), 7.5f64.sqrt(), max_relative = 1e-15);
        assert_eq!(rmse(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn norms_match_hand_values() {
        let x = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert_relative_eq!(norm(&x, MatrixNorm::Frobenius).unwrap(), 5.0);
        assert_relative_eq!(
            norm(&x, MatrixNorm::Spectral).unwrap(),
            4.0,
            epsilon = 1e-12
        );
        let bad = DMatrix::from_row_slice(1, 2, &[f64::NAN, 0.0]);
        assert!(matches!(
            norm(&bad, MatrixNorm::Spectral),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn observed_matrix_validates_inputs() {
        let omega = SampleSet::new(2, 2, vec![(0, 1)]).unwrap();
        let mut values = DMatrix::zeros(2, 2);
        values[(0, 1)] = f64::INFINITY;
        assert!(ObservedMatrix::new(values.clone(), omega.clone(), 1.0).is_err());
        values[(0, 1)] = 0.5;
        assert!(ObservedMatrix::new(values.clone(), omega.clone(), 0.0).is_err());
        assert!(ObservedMatrix::new(values, omega, 1.0).is_ok());
        // Off-omega junk is allowed: it is never read.
        let omega = SampleSet::new(2, 2, vec![(0, 0)]).unwrap();
        let mut values = DMatrix::zeros(2, 2);
        values[(1, 1)] = f64::NAN;
        assert!(ObservedMatrix::new(values, omega, 1.0).is_ok());
    }

    #[test]
    fn triplet_csv_round_trips() {
        let obs = ObservedMatrix::from_triplets(
            3,
            3,
            1.0,
            &[(0, 2, 0.25), (2, 0, -1.0), (1, 1, 3.5)],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_triplets(&mut buf, &obs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("row,col,value\n"));
        let triplets = read_triplets(std::io::Cursor::new(&buf)).unwrap();
        let obs2 = ObservedMatrix::from_triplets(3, 3, 1.0, &triplets).unwrap();
        assert_eq!(obs.values(), obs2.values());
        assert_eq!(obs.omega(), obs2.omega());
    }

    #[test]
    fn triplet_reader_reports_line_numbers() {
        let bad = "row,col,value\n0,0,1.0\n1,x,2.0\n";
        match read_triplets(std::io::Cursor::new(bad)) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_header = "a,b,c\n";
        assert!(matches!(
            read_triplets(std::io::Cursor::new(bad_header)),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn dense_csv_round_trips() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 0.0, 2.25, 1e-9, 7.0]);
        let mut buf = Vec::new();
        write_dense(&mut buf, &x).unwrap();
        let y = read_dense(std::io::Cursor::new(&buf)).unwrap();
        assert_eq!(x, y);
        let ragged = "1.0,2.0\n3.0\n";
        assert!(matches!(
            read_dense(std::io::Cursor::new(ragged)),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn masking_never_grows_frobenius_norm(
                rows in 1usize..6,
                cols in 1usize..6,
                seed in 0u64..1000,
                fill in proptest::collection::vec(-100.0f64..100.0, 36),
            ) {
                let x = DMatrix::from_fn(rows, cols, |i, j| fill[i * cols + j]);
                let count = (rows * cols) / 2;
                let omega = sample_uniform(rows, cols, count, seed).unwrap();
                let p = project_omega(&x, &omega).unwrap();
                let masked = norm(&p, MatrixNorm::Frobenius).unwrap();
                let full = norm(&x, MatrixNorm::Frobenius).unwrap();
                prop_assert!(masked <= full + 1e-12);
                // Idempotence is exact: masking twice changes nothing.
                prop_assert_eq!(&p, &project_omega(&p, &omega).unwrap());
            }

            #[test]
            fn norm_ordering_holds(
                rows in 1usize..6,
                cols in 1usize..6,
                fill in proptest::collection::vec(-100.0f64..100.0, 36),
            ) {
                let x = DMatrix::from_fn(rows, cols, |i, j| fill[i * cols + j]);
                let s = norm(&x, MatrixNorm::Spectral).unwrap();
                let f = norm(&x, MatrixNorm::Frobenius).unwrap();
                let rank_cap = rows.min(cols) as f64;
                prop_assert!(s <= f * (1.0 + 1e-10) + 1e-12);
                prop_assert!(f <= rank_cap.sqrt() * s * (1.0 + 1e-10) + 1e-12);
            }

            #[test]
            fn rmse_is_symmetric_and_triangular(
                fill_a in proptest::collection::vec(-50.0f64..50.0, 12),
                fill_b in proptest::collection::vec(-50.0f64..50.0, 12),
                fill_c in proptest::collection::vec(-50.0f64..50.0, 12),
            ) {
                let a = DMatrix::from_fn(3, 4, |i, j| fill_a[i * 4 + j]);
                let b = DMatrix::from_fn(3, 4, |i, j| fill_b[i * 4 + j]);
                let c = DMatrix::from_fn(3, 4, |i, j| fill_c[i * 4 + j]);
                let ab = rmse(&a, &b).unwrap();
                let ba = rmse(&b, &a).unwrap();
                prop_assert_eq!(ab, ba);
                let ac = rmse(&a, &c).unwrap();
                let cb = rmse(&c, &b).unwrap();
                prop_assert!(ab <= ac + cb + 1e-12);
            }
        }
    }
}
