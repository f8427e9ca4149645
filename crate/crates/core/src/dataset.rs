//! Labelled tabular data: ingestion, preprocessing, stratified splitting
//! and fold partitioning, plus a planted-feature synthetic generator used
//! for verification.
//!
//! Storage is column-oriented: a single feature's values are contiguous,
//! which the incremental distance engine relies on.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr_free::sample_standard_normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded_rng;

/// Where a dataset came from; enough to reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    File {
        path: String,
        /// Raw label values in the order they were mapped to 0 and 1.
        label_mapping: [String; 2],
    },
    Synthetic {
        seed: u64,
        informative: Vec<usize>,
        noise: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    labels: Vec<u8>,
    feature_names: Vec<String>,
    provenance: Provenance,
}

impl Dataset {
    /// Construct and validate. Labels must be 0/1 with both classes present,
    /// every column must match the label count, and m >= 2.
    pub fn new(
        columns: Vec<Vec<f64>>,
        labels: Vec<u8>,
        feature_names: Vec<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::InvalidDataset("no feature columns (f >= 1)".into()));
        }
        if labels.len() < 2 {
            return Err(Error::InvalidDataset("fewer than 2 rows".into()));
        }
        if feature_names.len() != columns.len() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} columns",
                feature_names.len(),
                columns.len()
            )));
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != labels.len() {
                return Err(Error::InvalidDataset(format!(
                    "column {} has {} entries, expected {}",
                    j,
                    col.len(),
                    labels.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "column {j} contains a non-finite value"
                )));
            }
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::InvalidDataset("labels must be 0 or 1".into()));
        }
        let positives = labels.iter().filter(|&&y| y == 1).count();
        if positives == 0 || positives == labels.len() {
            return Err(Error::InvalidDataset(
                "both classes must be present".into(),
            ));
        }
        Ok(Dataset {
            columns,
            labels,
            feature_names,
            provenance,
        })
    }

    pub fn num_features(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// (negatives, positives)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        (self.labels.len() - pos, pos)
    }

    /// New dataset keeping only the given columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Dataset> {
        for &j in keep {
            if j >= self.num_features() {
                return Err(Error::InvalidArgument(format!(
                    "column index {j} out of range"
                )));
            }
        }
        Dataset::new(
            keep.iter().map(|&j| self.columns[j].clone()).collect(),
            self.labels.clone(),
            keep.iter().map(|&j| self.feature_names[j].clone()).collect(),
            self.provenance.clone(),
        )
    }

    fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        Dataset::new(
            self.columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            rows.iter().map(|&r| self.labels[r]).collect(),
            self.feature_names.clone(),
            self.provenance.clone(),
        )
    }
}

/// A column-name-or-index designator for the label column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(s) => write!(f, "{s}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

impl From<&str> for LabelColumn {
    fn from(s: &str) -> Self {
        LabelColumn::Name(s.to_string())
    }
}

/// Load a dataset from a headered CSV file. The label column may hold any
/// two distinct values; they are mapped to {0,1} in lexicographic order and
/// the mapping is recorded in the provenance.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn) -> Result<Dataset> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let label_idx = match label_column {
        LabelColumn::Index(i) => {
            if *i >= headers.len() {
                return Err(Error::LabelColumnMissing(label_column.to_string()));
            }
            *i
        }
        LabelColumn::Name(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::LabelColumnMissing(name.clone()))?,
    };

    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); feature_names.len()];
    let mut raw_labels: Vec<String> = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let mut col = 0;
        for (i, cell) in record.iter().enumerate() {
            if i == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.trim().parse().unwrap_or(f64::NAN);
            if !value.is_finite() {
                return Err(Error::NonNumericFeature {
                    row,
                    column: feature_names[col].clone(),
                    value: cell.to_string(),
                });
            }
            columns[col].push(value);
            col += 1;
        }
    }
    if raw_labels.len() < 2 {
        return Err(Error::InvalidDataset("fewer than 2 rows".into()));
    }

    let mut distinct: Vec<String> = raw_labels.clone();
    distinct.sort();
    distinct.dedup();
    if distinct.len() != 2 {
        return Err(Error::NonBinaryLabels(distinct.len()));
    }
    let labels: Vec<u8> = raw_labels
        .iter()
        .map(|l| u8::from(*l == distinct[1]))
        .collect();

    Dataset::new(
        columns,
        labels,
        feature_names,
        Provenance::File {
            path: path.display().to_string(),
            label_mapping: [distinct[0].clone(), distinct[1].clone()],
        },
    )
}

/// Write a dataset back to CSV: feature columns in order, label column last
/// (named `label`, values 0/1).
pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = d.feature_names.to_vec();
    header.push("label".to_string());
    writer.write_record(&header)?;
    for r in 0..d.num_rows() {
        let mut record: Vec<String> = (0..d.num_features())
            .map(|j| d.columns[j][r].to_string())
            .collect();
        record.push(d.labels[r].to_string());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Standardize every column to mean 0 and sample (n-1) standard deviation 1.
/// Constant columns map to all-zeros.
pub fn mean_normalize(d: &Dataset) -> Dataset {
    let m = d.num_rows() as f64;
    let columns = d
        .columns
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / m;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let sd = var.sqrt();
            if sd == 0.0 {
                vec![0.0; col.len()]
            } else {
                col.iter().map(|x| (x - mean) / sd).collect()
            }
        })
        .collect();
    Dataset {
        columns,
        labels: d.labels.clone(),
        feature_names: d.feature_names.clone(),
        provenance: d.provenance.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BinningScheme {
    /// Equal-width intervals over [min, max]. Values on an interior
    /// boundary fall in the lower bin; min falls in bin 0.
    #[default]
    EqualWidth,
    /// Rank-based equal-frequency bins.
    EqualFrequency,
}

/// Replace every feature value by its bin index in [0, bins).
/// Constant columns map to bin 0.
pub fn discretize_bins(d: &Dataset, bins: usize, scheme: BinningScheme) -> Result<Dataset> {
    if bins < 2 {
        return Err(Error::InvalidArgument(format!(
            "bins must be >= 2, got {bins}"
        )));
    }
    let columns = d
        .columns
        .iter()
        .map(|col| match scheme {
            BinningScheme::EqualWidth => discretize_equal_width(col, bins),
            BinningScheme::EqualFrequency => discretize_equal_frequency(col, bins),
        })
        .collect();
    Ok(Dataset {
        columns,
        labels: d.labels.clone(),
        feature_names: d.feature_names.clone(),
        provenance: d.provenance.clone(),
    })
}

fn discretize_equal_width(col: &[f64], bins: usize) -> Vec<f64> {
    let min = col.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return vec![0.0; col.len()];
    }
    let width = (max - min) / bins as f64;
    col.iter()
        .map(|&x| {
            let steps = ((x - min) / width).ceil() as isize - 1;
            steps.clamp(0, bins as isize - 1) as f64
        })
        .collect()
}

fn discretize_equal_frequency(col: &[f64], bins: usize) -> Vec<f64> {
    let mut order: Vec<usize> = (0..col.len()).collect();
    order.sort_by(|&a, &b| col[a].partial_cmp(&col[b]).unwrap().then(a.cmp(&b)));
    let m = col.len();
    let mut out = vec![0.0; m];
    for (rank, &row) in order.iter().enumerate() {
        out[row] = ((rank * bins) / m) as f64;
    }
    out
}

/// Test-fraction and seed for a stratified train/test split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub lambda: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(lambda: f64, seed: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be in (0,1), got {lambda}"
            )));
        }
        Ok(SplitSpec { lambda, seed })
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Stratified train/test split: each class contributes round(lambda * count)
/// rows to the test set. Deterministic under the spec's seed.
pub fn train_test_split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    let (neg, pos) = d.class_counts();
    if neg < 2 || pos < 2 {
        return Err(Error::StratificationFailed(format!(
            "both classes need >= 2 members (have {neg} negative, {pos} positive)"
        )));
    }
    let mut rng = seeded_rng(spec.seed);
    let mut train_rows = Vec::new();
    let mut test_rows = Vec::new();
    for class in [0u8, 1u8] {
        let mut rows: Vec<usize> = (0..d.num_rows()).filter(|&r| d.labels[r] == class).collect();
        rows.shuffle(&mut rng);
        let n_test = round_half_up(spec.lambda * rows.len() as f64);
        if n_test == 0 || n_test >= rows.len() {
            return Err(Error::StratificationFailed(format!(
                "class {class} with {} members cannot give both partitions a row at lambda {}",
                rows.len(),
                spec.lambda
            )));
        }
        test_rows.extend_from_slice(&rows[..n_test]);
        train_rows.extend_from_slice(&rows[n_test..]);
    }
    // Keep original row order within each partition so output is stable.
    train_rows.sort_unstable();
    test_rows.sort_unstable();
    Ok((d.select_rows(&train_rows)?, d.select_rows(&test_rows)?))
}

/// Assignment of every row to one of k folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldPartition {
    assignments: Vec<usize>,
    k: usize,
}

impl FoldPartition {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.assignments[row]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&r| self.assignments[r] == fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold partition: fold sizes differ by at most one, and so do
/// per-fold positive counts. Deterministic given the seed.
pub fn make_folds(d: &Dataset, k: usize, seed: u64) -> Result<FoldPartition> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    let (neg, pos) = d.class_counts();
    if k > neg.min(pos) {
        return Err(Error::StratificationFailed(format!(
            "k = {k} exceeds the smaller class count ({})",
            neg.min(pos)
        )));
    }
    let mut rng = seeded_rng(seed);
    let mut assignments = vec![0usize; d.num_rows()];
    // Deal each class's shuffled rows cyclically, carrying the fold pointer
    // across classes so overall fold sizes stay balanced too.
    let mut next_fold = 0usize;
    for class in [0u8, 1u8] {
        let mut rows: Vec<usize> = (0..d.num_rows()).filter(|&r| d.labels[r] == class).collect();
        rows.shuffle(&mut rng);
        for row in rows {
            assignments[row] = next_fold;
            next_fold = (next_fold + 1) % k;
        }
    }
    Ok(FoldPartition { assignments, k })
}

/// Generate a planted-feature dataset: balanced 0/1 labels; each informative
/// column is centred at -1/+1 according to the label plus Gaussian noise;
/// all other columns are standard-normal noise.
pub fn make_synthetic(
    num_features: usize,
    num_rows: usize,
    informative: &[usize],
    noise: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_features == 0 {
        return Err(Error::InvalidArgument("need at least one feature".into()));
    }
    if num_rows < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 rows, got {num_rows}"
        )));
    }
    for &j in informative {
        if j >= num_features {
            return Err(Error::InvalidArgument(format!(
                "informative index {j} out of range for {num_features} features"
            )));
        }
    }
    let mut rng = seeded_rng(seed);
    let mut labels: Vec<u8> = (0..num_rows).map(|r| u8::from(r < num_rows / 2)).collect();
    labels.shuffle(&mut rng);

    let informative_set: std::collections::HashSet<usize> = informative.iter().copied().collect();
    let mut columns = Vec::with_capacity(num_features);
    for j in 0..num_features {
        let col = if informative_set.contains(&j) {
            labels
                .iter()
                .map(|&y| (2.0 * f64::from(y) - 1.0) + noise * sample_standard_normal(&mut rng))
                .collect()
        } else {
            (0..num_rows)
                .map(|_| sample_standard_normal(&mut rng))
                .collect()
        };
        columns.push(col);
    }

    let mut recorded: Vec<usize> = informative.to_vec();
    recorded.sort_unstable();
    recorded.dedup();
    Dataset::new(
        columns,
        labels,
        (0..num_features).map(|j| format!("f{j}")).collect(),
        Provenance::Synthetic {
            seed,
            informative: recorded,
            noise,
        },
    )
}

/// Sidecar ground truth written next to generated CSVs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SyntheticSidecar {
    pub seed: u64,
    pub informative: Vec<usize>,
    pub noise: f64,
    pub features: usize,
    pub rows: usize,
}

impl SyntheticSidecar {
    pub fn for_dataset(d: &Dataset) -> Option<Self> {
        match d.provenance() {
            Provenance::Synthetic {
                seed,
                informative,
                noise,
            } => Some(SyntheticSidecar {
                seed: *seed,
                informative: informative.clone(),
                noise: *noise,
                features: d.num_features(),
                rows: d.num_rows(),
            }),
            _ => None,
        }
    }
}

/// Marsaglia polar method over the crate's seeded stream; kept local so the
/// generator's output is pinned by this crate alone.
mod rand_distr_free {
    use rand::Rng;

    pub fn sample_standard_normal<R: Rng>(rng: &mut R) -> f64 {
        loop {
            let u: f64 = rng.random::<f64>() * 2.0 - 1.0;
            let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * (-2.0 * s.ln() / s).sqrt();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_csv_maps_labels_lexicographically() {
        let f = write_temp("g1,g2,class\n1.5,2.0,A\n0.5,1.0,B\n2.5,3.0,A\n");
        let d = load_csv(f.path(), &LabelColumn::Name("class".into())).unwrap();
        assert_eq!(d.num_features(), 2);
        assert_eq!(d.num_rows(), 3);
        assert_eq!(d.labels(), &[0, 1, 0]);
        match d.provenance() {
            Provenance::File { label_mapping, .. } => {
                assert_eq!(label_mapping, &["A".to_string(), "B".to_string()]);
            }
            _ => panic!("expected file provenance"),
        }
        assert_eq!(d.feature_names(), &["g1".to_string(), "g2".to_string()]);
    }

    #[test]
    fn load_csv_rejects_nan_cells() {
        let f = write_temp("g1,class\nNaN,A\n1.0,B\n");
        let err = load_csv(f.path(), &LabelColumn::Name("class".into())).unwrap_err();
        assert!(matches!(err, Error::NonNumericFeature { .. }));
        let f = write_temp("g1,class\nfoo,A\n1.0,B\n");
        assert!(load_csv(f.path(), &LabelColumn::Name("class".into())).is_err());
    }

    #[test]
    fn load_csv_rejects_missing_file_and_bad_label_column() {
        assert!(matches!(
            load_csv("/nonexistent/file.csv", &LabelColumn::Name("class".into())),
            Err(Error::MissingFile(_))
        ));
        let f = write_temp("g1,class\n1.0,A\n2.0,B\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Name("target".into())),
            Err(Error::LabelColumnMissing(_))
        ));
    }

    #[test]
    fn load_csv_rejects_non_binary_labels_and_short_files() {
        let f = write_temp("g1,class\n1.0,A\n2.0,B\n3.0,C\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Name("class".into())),
            Err(Error::NonBinaryLabels(3))
        ));
        let f = write_temp("g1,class\n1.0,A\n");
        assert!(load_csv(f.path(), &LabelColumn::Name("class".into())).is_err());
    }

    #[test]
    fn load_csv_by_column_index() {
        let f = write_temp("class,g1\nA,1.0\nB,2.0\n");
        let d = load_csv(f.path(), &LabelColumn::Index(0)).unwrap();
        assert_eq!(d.num_features(), 1);
        assert_eq!(d.column(0), &[1.0, 2.0]);
    }

    #[test]
    fn csv_round_trip_preserves_values() {
        let d = make_synthetic(4, 10, &[0, 2], 0.5, 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path, &LabelColumn::Name("label".into())).unwrap();
        assert_eq!(back.num_features(), 4);
        assert_eq!(back.labels(), d.labels());
        for j in 0..4 {
            for (a, b) in d.column(j).iter().zip(back.column(j)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dataset_rejects_non_finite_values() {
        let err = Dataset::new(
            vec![vec![1.0, f64::NAN]],
            vec![0, 1],
            vec!["f0".into()],
            Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidDataset(_)));
    }

    #[test]
    fn normalize_basic_column() {
        let d = Dataset::new(
            vec![vec![1.0, 2.0, 3.0]],
            vec![0, 1, 1],
            vec!["f0".into()],
            Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
        )
        .unwrap();
        let n = mean_normalize(&d);
        let want = [-1.0, 0.0, 1.0];
        for (a, b) in n.column(0).iter().zip(want.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_constant_column_to_zeros() {
        let d = Dataset::new(
            vec![vec![5.0, 5.0, 5.0]],
            vec![0, 1, 1],
            vec!["f0".into()],
            Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
        )
        .unwrap();
        assert_eq!(mean_normalize(&d).column(0), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_two_point_column() {
        let d = Dataset::new(
            vec![vec![0.0, 10.0]],
            vec![0, 1],
            vec!["f0".into()],
            Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
        )
        .unwrap();
        let n = mean_normalize(&d);
        let v = 1.0 / 2f64.sqrt();
        assert!((n.column(0)[0] + v).abs() < 1e-9);
        assert!((n.column(0)[1] - v).abs() < 1e-9);
    }

    #[test]
    fn normalize_statistics_hold_for_nonconstant_columns() {
        let d = make_synthetic(6, 30, &[1], 0.7, 21).unwrap();
        let n = mean_normalize(&d);
        let m = n.num_rows() as f64;
        for j in 0..n.num_features() {
            let col = n.column(j);
            let mean = col.iter().sum::<f64>() / m;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
            assert!(mean.abs() < 1e-9);
            assert!((sd - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let d = make_synthetic(5, 25, &[0], 0.5, 33).unwrap();
        let once = mean_normalize(&d);
        let twice = mean_normalize(&once);
        for j in 0..d.num_features() {
            for (a, b) in once.column(j).iter().zip(twice.column(j)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn equal_width_binning_examples() {
        let mk = |col: Vec<f64>| {
            let labels = (0..col.len()).map(|i| u8::from(i % 2 == 0)).collect();
            Dataset::new(
                vec![col],
                labels,
                vec!["f0".into()],
                Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
            )
            .unwrap()
        };
        let d = discretize_bins(&mk(vec![0.0, 0.5, 1.4, 2.9, 3.0]), 3, BinningScheme::EqualWidth)
            .unwrap();
        assert_eq!(d.column(0), &[0.0, 0.0, 1.0, 2.0, 2.0]);

        let d = discretize_bins(&mk(vec![7.0, 7.0]), 3, BinningScheme::EqualWidth).unwrap();
        assert_eq!(d.column(0), &[0.0, 0.0]);

        let d = discretize_bins(&mk(vec![-1.0, 0.0, 1.0]), 2, BinningScheme::EqualWidth).unwrap();
        assert_eq!(d.column(0), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn binning_requires_at_least_two_bins() {
        let d = make_synthetic(2, 8, &[], 0.0, 1).unwrap();
        assert!(discretize_bins(&d, 1, BinningScheme::EqualWidth).is_err());
    }

    #[test]
    fn equal_frequency_binning_balances_counts() {
        let col: Vec<f64> = (0..9).map(|i| i as f64).collect();
        let labels = (0..9).map(|i| u8::from(i % 2 == 0)).collect();
        let d = Dataset::new(
            vec![col],
            labels,
            vec!["f0".into()],
            Provenance::Synthetic { seed: 0, informative: vec![], noise: 0.0 },
        )
        .unwrap();
        let binned = discretize_bins(&d, 3, BinningScheme::EqualFrequency).unwrap();
        assert_eq!(binned.column(0), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let d = make_labelled(10, 4);
        let spec = SplitSpec::new(0.2, 7).unwrap();
        let (train, test) = train_test_split(&d, &spec).unwrap();
        assert_eq!(test.num_rows(), 2);
        assert_eq!(train.num_rows(), 8);
        let (_, test_pos) = test.class_counts();
        let (_, train_pos) = train.class_counts();
        assert_eq!(test_pos, 1);
        assert_eq!(train_pos, 3);

        let (train2, test2) = train_test_split(&d, &spec).unwrap();
        assert_eq!(train.labels(), train2.labels());
        assert_eq!(test.column(0), test2.column(0));
    }

    #[test]
    fn split_matches_colon_cancer_shape() {
        // 62 rows, 40 positive: test = round(0.2*40) + round(0.2*22) = 8 + 4
        let d = make_labelled(62, 40);
        let spec = SplitSpec::new(0.2, 3).unwrap();
        let (train, test) = train_test_split(&d, &spec).unwrap();
        assert_eq!(test.num_rows(), 12);
        assert_eq!(train.num_rows(), 50);
        let (_, pos) = test.class_counts();
        assert_eq!(pos, 8);
    }

    #[test]
    fn split_rejects_tiny_classes() {
        // one positive member: below the >= 2 precondition
        let d = make_labelled(5, 1);
        assert!(matches!(
            train_test_split(&d, &SplitSpec::new(0.2, 1).unwrap()),
            Err(Error::StratificationFailed(_))
        ));
        // two positives at lambda 0.2: round(0.4) = 0 test rows for the class
        let d = make_labelled(6, 2);
        assert!(matches!(
            train_test_split(&d, &SplitSpec::new(0.2, 1).unwrap()),
            Err(Error::StratificationFailed(_))
        ));
    }

    fn make_labelled(m: usize, positives: usize) -> Dataset {
        let mut rng = seeded_rng(99);
        use rand::Rng;
        Dataset::new(
            vec![(0..m).map(|_| rng.random::<f64>()).collect()],
            (0..m).map(|r| u8::from(r < positives)).collect(),
            vec!["f0".into()],
            Provenance::Synthetic { seed: 99, informative: vec![], noise: 0.0 },
        )
        .unwrap()
    }

    #[test]
    fn folds_are_stratified_and_balanced() {
        let d = make_labelled(10, 4);
        let folds = make_folds(&d, 2, 5).unwrap();
        assert_eq!(folds.sizes(), vec![5, 5]);
        for fold in 0..2 {
            let pos = folds
                .fold_rows(fold)
                .iter()
                .filter(|&&r| d.labels()[r] == 1)
                .count();
            assert_eq!(pos, 2);
        }
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one() {
        let d = make_labelled(10, 4);
        let folds = make_folds(&d, 3, 5).unwrap();
        let mut sizes = folds.sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);

        // prostate-shaped training side: 82 rows after a lambda=0.2 split of 102
        let d = make_labelled(82, 42);
        let folds = make_folds(&d, 10, 8).unwrap();
        let sizes = folds.sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 82);
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for fold in 0..10 {
            let pos = folds
                .fold_rows(fold)
                .iter()
                .filter(|&&r| d.labels()[r] == 1)
                .count();
            assert!((4..=5).contains(&pos));
        }
    }

    #[test]
    fn folds_partition_all_rows() {
        let d = make_labelled(23, 9);
        let folds = make_folds(&d, 4, 2).unwrap();
        let mut seen = [false; 23];
        for fold in 0..4 {
            for r in folds.fold_rows(fold) {
                assert!(!seen[r], "row {r} in two folds");
                seen[r] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn folds_reject_k_beyond_class_counts() {
        let d = make_labelled(10, 3);
        assert!(matches!(
            make_folds(&d, 4, 1),
            Err(Error::StratificationFailed(_))
        ));
        assert!(make_folds(&d, 1, 1).is_err());
    }

    #[test]
    fn folds_are_deterministic_per_seed() {
        let d = make_labelled(30, 12);
        assert_eq!(make_folds(&d, 5, 4).unwrap(), make_folds(&d, 5, 4).unwrap());
        assert_ne!(make_folds(&d, 5, 4).unwrap(), make_folds(&d, 5, 5).unwrap());
    }

    #[test]
    fn synthetic_zero_noise_informative_column_equals_signed_label() {
        let d = make_synthetic(5, 12, &[0], 0.0, 13).unwrap();
        for (x, &y) in d.column(0).iter().zip(d.labels()) {
            assert_eq!(*x, 2.0 * f64::from(y) - 1.0);
        }
        assert!((crate::filters::pearson(d.column(0), d.labels()) - 1.0).abs() < 1e-12);
        match d.provenance() {
            Provenance::Synthetic { informative, .. } => assert_eq!(informative, &vec![0]),
            _ => panic!("expected synthetic provenance"),
        }
    }

    #[test]
    fn synthetic_labels_are_balanced() {
        for m in [10, 11, 40] {
            let d = make_synthetic(3, m, &[], 1.0, 2).unwrap();
            let (neg, pos) = d.class_counts();
            assert!(neg.abs_diff(pos) <= 1, "m={m}: {neg} vs {pos}");
        }
    }

    #[test]
    fn synthetic_rejects_out_of_range_informative() {
        assert!(make_synthetic(4, 10, &[4], 0.5, 1).is_err());
        assert!(make_synthetic(4, 3, &[0], 0.5, 1).is_err());
    }

    #[test]
    fn sidecar_mirrors_provenance() {
        let d = make_synthetic(6, 10, &[1, 3], 0.25, 77).unwrap();
        let sidecar = SyntheticSidecar::for_dataset(&d).unwrap();
        assert_eq!(sidecar.seed, 77);
        assert_eq!(sidecar.informative, vec![1, 3]);
        assert_eq!(sidecar.noise, 0.25);
        assert_eq!(sidecar.features, 6);
        assert_eq!(sidecar.rows, 10);
    }

    #[test]
    fn no_signal_dataset_is_no_better_than_majority_guessing() {
        use crate::classifier::KnnModel;
        use crate::metrics::{compute_metrics, confusion};

        let mut f_scores = Vec::new();
        let mut baselines = Vec::new();
        for seed in 0..10u64 {
            let d = make_synthetic(50, 60, &[], 0.5, 500 + seed).unwrap();
            let (train, test) = train_test_split(&d, &SplitSpec::new(0.2, seed).unwrap()).unwrap();
            let subset = crate::filters::ucfs(&train, 5).unwrap();
            let preds = KnnModel::new(3)
                .unwrap()
                .predict(&train, &subset, &test)
                .unwrap();
            let f = compute_metrics(&confusion(&preds, test.labels()).unwrap())
                .unwrap()
                .f_score;
            f_scores.push(f);

            // better of the two constant guesses on this test set
            let all_ones = vec![1u8; test.num_rows()];
            let f_ones = compute_metrics(&confusion(&all_ones, test.labels()).unwrap())
                .unwrap()
                .f_score;
            baselines.push(f_ones.max(0.0));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&f_scores) <= mean(&baselines) + 0.1,
            "no-signal data scored {} vs majority-guess {}",
            mean(&f_scores),
            mean(&baselines)
        );
    }

    #[test]
    fn ucfs_recovers_planted_features_across_seeds() {
        let mut hits = 0;
        for seed in 0..10 {
            let d = make_synthetic(200, 100, &[0, 1, 2, 3, 4], 0.5, 1000 + seed).unwrap();
            let top = crate::filters::ucfs(&d, 5).unwrap();
            if top.indices() == vec![0, 1, 2, 3, 4] {
                hits += 1;
            }
        }
        assert!(hits >= 9, "planted set recovered in only {hits}/10 seeds");
    }
}
