//! Dataset model: numeric feature columns plus two categorical labelings
//! (the task target and the user identifier), feature-subset projection,
//! deterministic stratified splitting and CSV ingestion.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// A named numeric feature column.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub name: String,
    pub values: Vec<f64>,
}

impl FeatureColumn {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            values,
        }
    }
}

/// A categorical labeling of every row.
///
/// Class names are ordered numerically when all of them parse as integers and
/// lexicographically otherwise; codes index into that ordering.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Labeling {
    classes: Vec<String>,
    codes: Vec<u32>,
}

impl Labeling {
    pub fn from_strings<S: AsRef<str>>(raw: &[S]) -> Self {
        let distinct: HashSet<&str> = raw.iter().map(|s| s.as_ref()).collect();
        let mut classes: Vec<String> = distinct.into_iter().map(str::to_owned).collect();
        if classes.iter().all(|c| c.parse::<i64>().is_ok()) {
            classes.sort_by_key(|c| c.parse::<i64>().unwrap_or_default());
        } else {
            classes.sort();
        }
        let lookup: BTreeMap<&str, u32> = classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.as_str(), i as u32))
            .collect();
        let codes = raw.iter().map(|s| lookup[s.as_ref()]).collect();
        Self { classes, codes }
    }

    /// Builds a labeling from integer codes; class `k` is named `k`.
    pub fn from_codes(codes: Vec<u32>, n_classes: usize) -> Result<Self> {
        if let Some(&bad) = codes.iter().find(|&&c| c as usize >= n_classes) {
            return Err(Error::InvalidParameter(format!(
                "label code {bad} out of range for {n_classes} classes"
            )));
        }
        let classes = (0..n_classes).map(|k| k.to_string()).collect();
        Ok(Self { classes, codes })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn class_name(&self, row: usize) -> &str {
        &self.classes[self.codes[row] as usize]
    }

    /// Number of distinct classes that actually occur.
    pub fn n_present(&self) -> usize {
        let mut seen = vec![false; self.classes.len()];
        for &c in &self.codes {
            seen[c as usize] = true;
        }
        seen.into_iter().filter(|&s| s).count()
    }

    /// Rows in the given order; the class list is kept intact.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            classes: self.classes.clone(),
            codes: rows.iter().map(|&r| self.codes[r]).collect(),
        }
    }
}

/// Which labeling a model predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Task,
    User,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Task => f.write_str("task"),
            Target::User => f.write_str("user"),
        }
    }
}

/// Feature matrix (column-major) with dual labelings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<FeatureColumn>,
    task: Labeling,
    user: Labeling,
}

impl Dataset {
    pub fn new(features: Vec<FeatureColumn>, task: Labeling, user: Labeling) -> Result<Self> {
        let rows = task.len();
        if rows == 0 {
            return Err(Error::EmptyDataset);
        }
        if features.is_empty() {
            return Err(Error::InvalidDataset("dataset has no feature columns".into()));
        }
        if user.len() != rows {
            return Err(Error::LengthMismatch {
                expected: rows,
                actual: user.len(),
            });
        }
        let mut names = HashSet::new();
        for col in &features {
            if col.values.len() != rows {
                return Err(Error::InvalidDataset(format!(
                    "column `{}` has {} values, expected {rows}",
                    col.name,
                    col.values.len()
                )));
            }
            if !names.insert(col.name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate feature name `{}`",
                    col.name
                )));
            }
            if let Some(row) = col.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingValue {
                    row,
                    column: col.name.clone(),
                });
            }
        }
        Ok(Self {
            features,
            task,
            user,
        })
    }

    pub fn rows(&self) -> usize {
        self.task.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn features(&self) -> &[FeatureColumn] {
        &self.features
    }

    pub fn feature(&self, index: usize) -> &FeatureColumn {
        &self.features[index]
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn task_labels(&self) -> &Labeling {
        &self.task
    }

    pub fn user_labels(&self) -> &Labeling {
        &self.user
    }

    pub fn labels(&self, target: Target) -> &Labeling {
        match target {
            Target::Task => &self.task,
            Target::User => &self.user,
        }
    }

    #[inline]
    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.features[feature].values[row]
    }

    /// Copies one row (all features) into `buf`.
    pub fn row_into(&self, row: usize, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend(self.features.iter().map(|c| c.values[row]));
    }

    /// Returns a dataset holding the given rows in order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let features = self
            .features
            .iter()
            .map(|c| FeatureColumn {
                name: c.name.clone(),
                values: rows.iter().map(|&r| c.values[r]).collect(),
            })
            .collect();
        Self {
            features,
            task: self.task.select(rows),
            user: self.user.select(rows),
        }
    }

    /// Replaces the feature columns, keeping both labelings.
    pub fn with_features(&self, features: Vec<FeatureColumn>) -> Result<Self> {
        Self::new(features, self.task.clone(), self.user.clone())
    }

    /// 64-bit FNV-1a digest over names, value bits and labels.
    pub fn fingerprint(&self) -> String {
        let mut h = Fnv1a::new();
        for col in &self.features {
            h.update(col.name.as_bytes());
            h.update(&[0]);
            for v in &col.values {
                h.update(&v.to_bits().to_le_bytes());
            }
        }
        for labels in [&self.task, &self.user] {
            for c in &labels.classes {
                h.update(c.as_bytes());
                h.update(&[0]);
            }
            for c in &labels.codes {
                h.update(&c.to_le_bytes());
            }
        }
        format!("fnv1a64:{:016x}", h.finish())
    }
}

/// Incremental 64-bit FNV-1a.
#[derive(Clone, Copy, Debug)]
pub struct Fnv1a(u64);

impl Fnv1a {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;

    pub fn new() -> Self {
        Self(Self::OFFSET)
    }

    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(Self::PRIME);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }

    pub fn hash(bytes: &[u8]) -> u64 {
        let mut h = Self::new();
        h.update(bytes);
        h.finish()
    }
}

impl Default for Fnv1a {
    fn default() -> Self {
        Self::new()
    }
}

/// Strictly increasing, non-empty list of feature indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FeatureSubset(Vec<usize>);

impl FeatureSubset {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySubset);
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubset(format!(
                "indices must be strictly increasing: {indices:?}"
            )));
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    /// All features `0..n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new((0..n).collect())
    }

    /// Elements of `base` selected by the bits of `mask` (bit i = `base[i]`).
    pub fn from_mask(base: &FeatureSubset, mask: u64) -> Result<Self> {
        let indices = base
            .0
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &f)| f)
            .collect();
        Self::new(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        match self.0.last() {
            Some(&last) if last >= n_features => Err(Error::IndexOutOfRange {
                index: last,
                n_features,
            }),
            _ => Ok(()),
        }
    }

    pub fn names<'a>(&self, ds: &'a Dataset) -> Vec<&'a str> {
        self.0.iter().map(|&i| ds.feature(i).name.as_str()).collect()
    }
}

impl TryFrom<Vec<usize>> for FeatureSubset {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FeatureSubset> for Vec<usize> {
    fn from(s: FeatureSubset) -> Self {
        s.0
    }
}

impl fmt::Display for FeatureSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, idx) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{idx}")?;
        }
        f.write_str("}")
    }
}

/// Restricts a dataset to the features of `subset`, in subset order.
pub fn project(ds: &Dataset, subset: &FeatureSubset) -> Result<Dataset> {
    subset.validate(ds.n_features())?;
    let features = subset
        .indices()
        .iter()
        .map(|&i| ds.features[i].clone())
        .collect();
    Ok(Dataset {
        features,
        task: ds.task.clone(),
        user: ds.user.clone(),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratify {
    #[default]
    Task,
    User,
    Joint,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub test_fraction: f64,
    pub seed: u64,
    pub stratify_on: Stratify,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            test_fraction: 0.3,
            seed: 0,
            stratify_on: Stratify::Task,
        }
    }
}

/// Sorted row indices of the train and test partitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified holdout assignment. Each stratum is shuffled with a stream
/// keyed by (seed, stratum) and contributes `round(test_fraction * size)`
/// rows to the test partition.
pub fn split_indices(ds: &Dataset, spec: &SplitSpec) -> Result<SplitIndices> {
    if !(spec.test_fraction > 0.0 && spec.test_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test_fraction must lie in (0,1), got {}",
            spec.test_fraction
        )));
    }
    let n = ds.rows();
    if n < 2 {
        return Err(Error::DegenerateSplit(format!(
            "need at least 2 rows, have {n}"
        )));
    }
    let n_users = ds.user.n_classes() as u64;
    let key = |row: usize| -> u64 {
        let t = u64::from(ds.task.codes[row]);
        let u = u64::from(ds.user.codes[row]);
        match spec.stratify_on {
            Stratify::Task => t,
            Stratify::User => u,
            Stratify::Joint => t * n_users + u,
        }
    };
    let mut strata: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for row in 0..n {
        strata.entry(key(row)).or_default().push(row);
    }
    let mut train = Vec::with_capacity(n);
    let mut test = Vec::new();
    for (stratum, mut rows) in strata {
        let mut rng = seed::rng(seed::mix(spec.seed, stratum));
        rows.shuffle(&mut rng);
        let n_test = (spec.test_fraction * rows.len() as f64).round() as usize;
        test.extend_from_slice(&rows[..n_test]);
        train.extend_from_slice(&rows[n_test..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::DegenerateSplit(format!(
            "partition sizes train={} test={}",
            train.len(),
            test.len()
        )));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Train and test partitions of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct Partitions {
    pub train: Dataset,
    pub test: Dataset,
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<Partitions> {
    let idx = split_indices(ds, spec)?;
    Ok(Partitions {
        train: ds.select_rows(&idx.train),
        test: ds.select_rows(&idx.test),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NaPolicy {
    #[default]
    DropRows,
    Error,
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "NaN"
}

/// Reads a CSV file. Every column other than the two label columns must be
/// numeric; empty cells and literal `NaN` count as missing.
pub fn load_csv(
    path: impl AsRef<Path>,
    task_column: &str,
    user_column: &str,
    na_policy: NaPolicy,
) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, task_column, user_column, na_policy)
}

pub fn read_csv<R: Read>(
    reader: R,
    task_column: &str,
    user_column: &str,
    na_policy: NaPolicy,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };
    let task_idx = find(task_column)?;
    let user_idx = find(user_column)?;
    if task_idx == user_idx {
        return Err(Error::InvalidParameter(
            "task and user columns must differ".into(),
        ));
    }
    let feature_idx: Vec<usize> = (0..headers.len())
        .filter(|&i| i != task_idx && i != user_idx)
        .collect();

    let mut values: Vec<Vec<f64>> = vec![Vec::new(); feature_idx.len()];
    let mut task_raw = Vec::new();
    let mut user_raw = Vec::new();
    let mut row_buf = Vec::with_capacity(feature_idx.len());
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        row_buf.clear();
        let mut missing: Option<String> = None;
        for &ci in &feature_idx {
            let cell = record.get(ci).unwrap_or("");
            if is_missing(cell) {
                missing.get_or_insert_with(|| headers[ci].clone());
                row_buf.push(f64::NAN);
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Unparseable {
                row,
                column: headers[ci].clone(),
                value: cell.to_owned(),
            })?;
            if !v.is_finite() {
                return Err(Error::Unparseable {
                    row,
                    column: headers[ci].clone(),
                    value: cell.to_owned(),
                });
            }
            row_buf.push(v);
        }
        let task = record.get(task_idx).unwrap_or("");
        let user = record.get(user_idx).unwrap_or("");
        for (label, ci) in [(task, task_idx), (user, user_idx)] {
            if is_missing(label) {
                missing.get_or_insert_with(|| headers[ci].clone());
            }
        }
        if let Some(column) = missing {
            match na_policy {
                NaPolicy::DropRows => continue,
                NaPolicy::Error => return Err(Error::MissingValue { row, column }),
            }
        }
        for (col, &v) in values.iter_mut().zip(&row_buf) {
            col.push(v);
        }
        task_raw.push(task.to_owned());
        user_raw.push(user.to_owned());
    }
    if task_raw.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let features = feature_idx
        .iter()
        .zip(values)
        .map(|(&ci, values)| FeatureColumn::new(headers[ci].clone(), values))
        .collect();
    Dataset::new(
        features,
        Labeling::from_strings(&task_raw),
        Labeling::from_strings(&user_raw),
    )
}

/// Writes features followed by the two label columns.
pub fn write_csv<W: Write>(
    ds: &Dataset,
    writer: W,
    task_column: &str,
    user_column: &str,
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = ds.feature_names();
    header.push(task_column);
    header.push(user_column);
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for row in 0..ds.rows() {
        record.clear();
        record.extend(ds.features.iter().map(|c| c.values[row].to_string()));
        record.push(ds.task.class_name(row).to_owned());
        record.push(ds.user.class_name(row).to_owned());
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_csv(
    ds: &Dataset,
    path: impl AsRef<Path>,
    task_column: &str,
    user_column: &str,
) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_csv(ds, file, task_column, user_column)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize, d: usize) -> Dataset {
        let features = (0..d)
            .map(|j| FeatureColumn::new(format!("f{j}"), (0..n).map(|i| (i * (j + 1)) as f64).collect()))
            .collect();
        let task = Labeling::from_codes((0..n).map(|i| (i % 2) as u32).collect(), 2).unwrap();
        let user = Labeling::from_codes((0..n).map(|i| (i % 3) as u32).collect(), 3).unwrap();
        Dataset::new(features, task, user).unwrap()
    }

    const CSV10: &str = "f1,f2,task,user\n\
        1,2,a,u1\n3,4,b,u2\n5,6,a,u1\n7,8,b,u2\n9,10,a,u1\n\
        11,12,b,u2\n13,14,a,u1\n15,16,b,u2\n17,18,a,u1\n19,20,b,u2\n";

    #[test]
    fn load_counts_columns() {
        let ds = read_csv(CSV10.as_bytes(), "task", "user", NaPolicy::Error).unwrap();
        assert_eq!(ds.rows(), 10);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.feature_names(), vec!["f1", "f2"]);
        assert_eq!(ds.task_labels().classes(), &["a", "b"]);
    }

    #[test]
    fn load_drops_missing_rows() {
        let csv = CSV10
            .replacen("3,4,b", "NaN,4,b", 1)
            .replacen("9,10,a", "9,,a", 1)
            .replacen("19,20,b", "NaN,NaN,b", 1);
        let ds = read_csv(csv.as_bytes(), "task", "user", NaPolicy::DropRows).unwrap();
        assert_eq!(ds.rows(), 7);
        let err = read_csv(csv.as_bytes(), "task", "user", NaPolicy::Error).unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 1, .. }), "{err}");
    }

    #[test]
    fn load_missing_column() {
        let err = read_csv(CSV10.as_bytes(), "nope", "user", NaPolicy::DropRows).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "nope"));
    }

    #[test]
    fn load_unparseable_and_empty() {
        let csv = CSV10.replacen("5,6", "5,x", 1);
        let err = read_csv(csv.as_bytes(), "task", "user", NaPolicy::DropRows).unwrap_err();
        assert!(matches!(err, Error::Unparseable { .. }));
        let only_nan = "f1,task,user\nNaN,a,b\n";
        let err = read_csv(only_nan.as_bytes(), "task", "user", NaPolicy::DropRows).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn csv_round_trip() {
        let ds = read_csv(CSV10.as_bytes(), "task", "user", NaPolicy::Error).unwrap();
        let mut out = Vec::new();
        write_csv(&ds, &mut out, "task", "user").unwrap();
        let back = read_csv(out.as_slice(), "task", "user", NaPolicy::Error).unwrap();
        assert_eq!(ds, back);
    }

    #[test]
    fn numeric_class_order() {
        let l = Labeling::from_strings(&["10", "2", "1", "2"]);
        assert_eq!(l.classes(), &["1", "2", "10"]);
        assert_eq!(l.codes(), &[2, 1, 0, 1]);
    }

    #[test]
    fn project_cases() {
        let ds = toy(8, 5);
        assert_eq!(project(&ds, &FeatureSubset::full(5).unwrap()).unwrap(), ds);
        let one = project(&ds, &FeatureSubset::new(vec![2]).unwrap()).unwrap();
        assert_eq!(one.n_features(), 1);
        assert_eq!(one.feature(0), ds.feature(2));
        assert_eq!(one.task_labels(), ds.task_labels());
        assert_eq!(one.user_labels(), ds.user_labels());
        let err = project(&ds, &FeatureSubset::new(vec![7]).unwrap()).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 7, .. }));
    }

    #[test]
    fn subset_validation() {
        assert!(matches!(FeatureSubset::new(vec![]), Err(Error::EmptySubset)));
        assert!(FeatureSubset::new(vec![2, 1]).is_err());
        assert!(FeatureSubset::new(vec![1, 1]).is_err());
        assert_eq!(FeatureSubset::from_unsorted(vec![3, 1, 3]).unwrap().indices(), &[1, 3]);
        let base = FeatureSubset::new(vec![2, 5, 9]).unwrap();
        assert_eq!(FeatureSubset::from_mask(&base, 0b101).unwrap().indices(), &[2, 9]);
    }

    #[test]
    fn split_is_deterministic_70_30() {
        let ds = toy(100, 2);
        let spec = SplitSpec {
            test_fraction: 0.3,
            seed: 7,
            stratify_on: Stratify::Task,
        };
        let a = split_indices(&ds, &spec).unwrap();
        let b = split_indices(&ds, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 70);
        assert_eq!(a.test.len(), 30);
        let mut all: Vec<usize> = a.train.iter().chain(&a.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn split_stratifies() {
        let ds = toy(100, 1);
        let parts = split(&ds, &SplitSpec::default()).unwrap();
        for part in [&parts.train, &parts.test] {
            let ones = part.task_labels().codes().iter().filter(|&&c| c == 1).count();
            let zeros = part.rows() - ones;
            assert!(ones.abs_diff(zeros) <= 1, "{ones} vs {zeros}");
        }
    }

    #[test]
    fn split_rejects_single_row() {
        let ds = toy(1, 1);
        assert!(matches!(
            split(&ds, &SplitSpec::default()),
            Err(Error::DegenerateSplit(_))
        ));
    }

    #[test]
    fn dataset_rejects_duplicates_and_nan() {
        let t = Labeling::from_codes(vec![0, 1], 2).unwrap();
        let cols = vec![FeatureColumn::new("a", vec![1.0, 2.0]), FeatureColumn::new("a", vec![1.0, 2.0])];
        assert!(Dataset::new(cols, t.clone(), t.clone()).is_err());
        let cols = vec![FeatureColumn::new("a", vec![1.0, f64::NAN])];
        assert!(Dataset::new(cols, t.clone(), t).is_err());
    }
}
