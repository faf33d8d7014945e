//! Non-game baselines: signed feature hashing, PCA and per-feature Laplace
//! noise. Each maps a dataset to a dataset with the same rows and labels.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::tabular::{Dataset, FeatureColumn, Fnv1a};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashSpec {
    pub buckets: usize,
    pub signed: bool,
}

impl HashSpec {
    pub const HASH_NAME: &'static str = "fnv1a64";

    pub fn new(buckets: usize) -> Self {
        Self { buckets, signed: true }
    }
}

/// Bucket and sign of a feature name: bucket = FNV-1a(name) mod k, sign
/// negative when bit 63 of the splitmix-finalized hash is set. The raw top
/// bit of FNV-1a hardly moves for short names, hence the extra mixing.
pub fn hash_slot(name: &str, spec: &HashSpec) -> (usize, f64) {
    let h = Fnv1a::hash(name.as_bytes());
    let bucket = (h % spec.buckets as u64) as usize;
    let sign = if spec.signed && seed::splitmix64(h) >> 63 == 1 { -1.0 } else { 1.0 };
    (bucket, sign)
}

/// Folds all features into `buckets` columns named `h0..`.
pub fn hash_features(ds: &Dataset, spec: &HashSpec) -> Result<Dataset> {
    if spec.buckets == 0 {
        return Err(Error::InvalidParameter("buckets must be at least 1".into()));
    }
    let n = ds.rows();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; n]; spec.buckets];
    // accumulate in name order so the result is independent of column order
    let mut order: Vec<usize> = (0..ds.n_features()).collect();
    order.sort_by(|&a, &b| ds.feature(a).name.cmp(&ds.feature(b).name));
    for f in order {
        let col = ds.feature(f);
        let (bucket, sign) = hash_slot(&col.name, spec);
        for (o, v) in out[bucket].iter_mut().zip(&col.values) {
            *o += sign * v;
        }
    }
    let features = out
        .into_iter()
        .enumerate()
        .map(|(i, values)| FeatureColumn::new(format!("h{i}"), values))
        .collect();
    ds.with_features(features)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcaSpec {
    pub components: usize,
    pub standardize: bool,
}

impl PcaSpec {
    pub fn new(components: usize) -> Self {
        Self {
            components,
            standardize: true,
        }
    }
}

/// Fitted principal directions.
#[derive(Clone, Debug)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// d x k, columns are unit principal directions.
    pub components: DMatrix<f64>,
    pub explained_variance: Vec<f64>,
}

impl PcaModel {
    /// Covariance eigendecomposition; directions ordered by descending
    /// eigenvalue, each flipped so its largest-magnitude loading is positive.
    pub fn fit(ds: &Dataset, spec: &PcaSpec) -> Result<Self> {
        let n = ds.rows();
        let d = ds.n_features();
        if n < 2 {
            return Err(Error::InvalidParameter("PCA needs at least 2 rows".into()));
        }
        if spec.components == 0 || spec.components > n.min(d) {
            return Err(Error::InvalidParameter(format!(
                "components must lie in [1,{}], got {}",
                n.min(d),
                spec.components
            )));
        }
        let mean: Vec<f64> = ds
            .features()
            .iter()
            .map(|c| c.values.iter().sum::<f64>() / n as f64)
            .collect();
        let scale: Vec<f64> = ds
            .features()
            .iter()
            .zip(&mean)
            .map(|(c, m)| {
                if !spec.standardize {
                    return 1.0;
                }
                let var = c.values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let x = centered(ds, &mean, &scale);
        let cov = (x.transpose() * &x) / (n - 1) as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let k = spec.components;
        let mut components = DMatrix::zeros(d, k);
        let mut explained_variance = Vec::with_capacity(k);
        for (j, &src) in order.iter().take(k).enumerate() {
            let mut v = eig.eigenvectors.column(src).into_owned();
            let lead = (0..d)
                .max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()).then(b.cmp(&a)))
                .unwrap_or(0);
            if v[lead] < 0.0 {
                v.neg_mut();
            }
            components.set_column(j, &v);
            explained_variance.push(eig.eigenvalues[src].max(0.0));
        }
        Ok(Self {
            mean,
            scale,
            components,
            explained_variance,
        })
    }

    /// Projections of `ds` (n x k).
    pub fn scores(&self, ds: &Dataset) -> Result<DMatrix<f64>> {
        if ds.n_features() != self.mean.len() {
            return Err(Error::ColumnMismatch(format!(
                "PCA fitted on {} features, dataset has {}",
                self.mean.len(),
                ds.n_features()
            )));
        }
        Ok(centered(ds, &self.mean, &self.scale) * &self.components)
    }
}

fn centered(ds: &Dataset, mean: &[f64], scale: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(ds.rows(), ds.n_features(), |i, j| (ds.value(i, j) - mean[j]) / scale[j])
}

/// Replaces the features with their top principal component scores `pc0..`.
pub fn pca_transform(ds: &Dataset, spec: &PcaSpec) -> Result<Dataset> {
    let model = PcaModel::fit(ds, spec)?;
    let scores = model.scores(ds)?;
    let features = (0..spec.components)
        .map(|j| FeatureColumn::new(format!("pc{j}"), scores.column(j).iter().copied().collect()))
        .collect();
    ds.with_features(features)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DpSpec {
    pub epsilon: f64,
    pub seed: u64,
}

fn laplace<R: Rng>(rng: &mut R, scale: f64) -> f64 {
    // inverse CDF on u in (-1/2, 1/2)
    let u: f64 = rng.random::<f64>() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE).ln()
}

/// Adds Laplace noise with scale (range of the feature) / epsilon to every
/// value. Each feature draws from its own stream keyed by (seed, index).
pub fn dp_noise(ds: &Dataset, spec: &DpSpec) -> Result<Dataset> {
    if !spec.epsilon.is_finite() || spec.epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be positive, got {}",
            spec.epsilon
        )));
    }
    let features = ds
        .features()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let lo = col.values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let scale = (hi - lo) / spec.epsilon;
            if scale == 0.0 {
                return col.clone();
            }
            let mut rng = seed::rng(seed::mix(spec.seed, j as u64));
            let values = col.values.iter().map(|v| v + laplace(&mut rng, scale)).collect();
            FeatureColumn::new(col.name.clone(), values)
        })
        .collect();
    ds.with_features(features)
}
