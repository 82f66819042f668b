use std::io::Read;
use std::path::Path;

use rand::SeedableRng;
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::FlError;
use super::linalg::{cholesky_solve, orthonormalize_columns, scaled_gram};

/// One user's samples: a row-major `len x dim` feature matrix and its targets.
#[derive(Debug, Clone, PartialEq)]
pub struct UserData {
    features: Vec<f64>,
    targets: Vec<f64>,
    dim: usize,
}

impl UserData {
    pub fn new(features: Vec<f64>, targets: Vec<f64>, dim: usize) -> Result<Self, FlError> {
        if dim == 0 || targets.is_empty() {
            return Err(FlError::Config(
                "a user needs at least one sample and one feature".into(),
            ));
        }
        if features.len() != targets.len() * dim {
            return Err(FlError::Config(format!(
                "{} feature values do not fill {} rows of width {dim}",
                features.len(),
                targets.len()
            )));
        }
        if features.iter().chain(&targets).any(|v| !v.is_finite()) {
            return Err(FlError::Config("features and targets must be finite".into()));
        }
        Ok(Self { features, targets, dim })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.features.chunks_exact(self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    users: Vec<UserData>,
    dim: usize,
    optimum_loss: Option<f64>,
    planted: Option<Vec<f64>>,
}

impl Dataset {
    /// `optimum_loss` is the minimum of the unregularized convex squared loss
    /// when it is known in advance.
    pub fn new(users: Vec<UserData>, optimum_loss: Option<f64>) -> Result<Self, FlError> {
        let Some(first) = users.first() else {
            return Err(FlError::Config("dataset has no users".into()));
        };
        let dim = first.dim();
        if let Some(bad) = users.iter().position(|u| u.dim() != dim) {
            return Err(FlError::Config(format!(
                "user {bad} has dimension {}, user 0 has {dim}",
                users[bad].dim()
            )));
        }
        Ok(Self {
            users,
            dim,
            optimum_loss,
            planted: None,
        })
    }

    pub fn users(&self) -> &[UserData] {
        &self.users
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_samples(&self) -> usize {
        self.users.iter().map(UserData::len).sum()
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.optimum_loss
    }

    /// Weights the targets were generated from, for synthetic data.
    pub fn planted_weights(&self) -> Option<&[f64]> {
        self.planted.as_deref()
    }

    /// Minimizer and minimum of the convex squared loss with ridge `ridge`,
    /// from the normal equations. `None` when the system is singular.
    pub fn least_squares(&self, ridge: f64) -> Option<(Vec<f64>, f64)> {
        let d = self.dim;
        let total = self.total_samples() as f64;
        let mut h = vec![0.0; d * d];
        let mut rhs = vec![0.0; d];
        for u in &self.users {
            let weight = u.len() as f64 / total;
            let g = scaled_gram(u.features(), u.len(), d);
            for (hi, gi) in h.iter_mut().zip(&g) {
                *hi += weight * gi;
            }
            for (x, y) in u.rows().zip(u.targets()) {
                for (r, xi) in rhs.iter_mut().zip(x) {
                    *r += xi * y / total;
                }
            }
        }
        for i in 0..d {
            h[i * d + i] += ridge;
        }
        let w = cholesky_solve(&h, &rhs)?;
        let loss = super::global_loss(&w, self, &super::Loss::convex().with_ridge(ridge));
        Some((w, loss))
    }
}

/// Synthetic regression data with a prescribed Hessian spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub seed: u64,
    pub users: usize,
    pub dim: usize,
    pub samples: usize,
    /// Ratio of the largest to the smallest Hessian eigenvalue.
    pub condition_number: f64,
    /// Standard deviation of additive Gaussian target noise.
    pub noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            users: 5,
            dim: 10,
            samples: 50,
            condition_number: 4.0,
            noise: 0.0,
        }
    }
}

/// Every user gets `X_k = sqrt(D_k) U_k diag(sqrt(lambda)) Q^T` with `U_k`
/// orthonormal columns and a shared rotation `Q`, so each local Hessian of
/// the squared loss is exactly `Q diag(lambda) Q^T`. The spectrum runs
/// log-spaced from 1 down to `1/condition_number`, giving `L = 1` and
/// `gamma = 1/condition_number`.
pub fn synth_dataset(spec: &SynthSpec) -> Result<Dataset, FlError> {
    let SynthSpec {
        seed,
        users,
        dim: d,
        samples: n,
        condition_number: cond,
        noise,
    } = *spec;
    if users == 0 || d == 0 {
        return Err(FlError::Config(
            "synthetic data needs at least one user and one feature".into(),
        ));
    }
    if n < d {
        return Err(FlError::Config(format!(
            "samples per user ({n}) must be at least the dimension ({d}) for an exact spectrum"
        )));
    }
    if !(cond >= 1.0) || !cond.is_finite() {
        return Err(FlError::Config(format!("condition number must be >= 1, got {cond}")));
    }
    if d == 1 && cond != 1.0 {
        return Err(FlError::Config(
            "a one-dimensional problem has condition number 1".into(),
        ));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(FlError::Config(format!("noise must be >= 0, got {noise}")));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |len: usize| -> Vec<f64> { (0..len).map(|_| StandardNormal.sample(&mut rng)).collect() };

    let sqrt_lambda: Vec<f64> = (0..d)
        .map(|i| {
            let t = if d == 1 { 0.0 } else { i as f64 / (d - 1) as f64 };
            cond.powf(-t).sqrt()
        })
        .collect();
    let mut q = gauss(d * d);
    if !orthonormalize_columns(&mut q, d, d) {
        return Err(FlError::Config("rotation draw was degenerate; try another seed".into()));
    }
    // B = diag(sqrt(lambda)) Q^T, so X_k = sqrt(D) U_k B.
    let mut b = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            b[i * d + j] = sqrt_lambda[i] * q[j * d + i];
        }
    }
    let w_true = gauss(d);

    let scale = (n as f64).sqrt();
    let mut out = Vec::with_capacity(users);
    for _ in 0..users {
        let mut u = gauss(n * d);
        if !orthonormalize_columns(&mut u, n, d) {
            return Err(FlError::Config("sample draw was degenerate; try another seed".into()));
        }
        let mut x = vec![0.0; n * d];
        for r in 0..n {
            for j in 0..d {
                x[r * d + j] = scale * (0..d).map(|i| u[r * d + i] * b[i * d + j]).sum::<f64>();
            }
        }
        let eps = gauss(n);
        let y: Vec<f64> = (0..n)
            .map(|r| super::linalg::dot(&x[r * d..(r + 1) * d], &w_true) + noise * eps[r])
            .collect();
        out.push(UserData::new(x, y, d)?);
    }

    let mut ds = Dataset::new(out, None)?;
    ds.optimum_loss = if noise == 0.0 {
        Some(0.0)
    } else {
        ds.least_squares(0.0).map(|(_, f)| f)
    };
    ds.planted = Some(w_true);
    Ok(ds)
}

/// How rows of a CSV file are dealt out to users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvPartition {
    pub users: usize,
    /// Rows per user; `None` splits all rows evenly and drops the remainder.
    pub samples_per_user: Option<usize>,
    pub seed: u64,
}

/// Draw `users * per_user` distinct row indices and deal them out in draw
/// order. Each user's indices are sorted so rows keep their file order.
pub fn partition_rows(rows: usize, users: usize, per_user: usize, seed: u64) -> Result<Vec<Vec<usize>>, FlError> {
    if users == 0 || per_user == 0 {
        return Err(FlError::Config(
            "partition needs at least one user and one row per user".into(),
        ));
    }
    let needed = users
        .checked_mul(per_user)
        .ok_or_else(|| FlError::Config("partition size overflows".into()))?;
    if needed > rows {
        return Err(FlError::NotEnoughRows {
            needed,
            available: rows,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn = index::sample(&mut rng, rows, needed).into_vec();
    Ok(drawn
        .chunks(per_user)
        .map(|c| {
            let mut c = c.to_vec();
            c.sort_unstable();
            c
        })
        .collect())
}

/// Numeric-only CSV, no header, last column is the target.
pub fn load_csv(path: &Path, partition: &CsvPartition) -> Result<Dataset, FlError> {
    let file = std::fs::File::open(path).map_err(|source| FlError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_csv_from_reader(file, partition)
}

pub fn load_csv_from_reader<R: Read>(reader: R, partition: &CsvPartition) -> Result<Dataset, FlError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width = None;
    let mut values = Vec::new();
    let mut rows = 0usize;
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if expected < 2 {
            return Err(FlError::Config(
                "need at least one feature column and a target column".into(),
            ));
        }
        if record.len() != expected {
            return Err(FlError::DimensionMismatch {
                row,
                expected,
                found: record.len(),
            });
        }
        for (j, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ if rows == 0 => {
                    return Err(FlError::Header {
                        column: j + 1,
                        value: field.to_string(),
                    });
                }
                _ => {
                    return Err(FlError::Parse {
                        row,
                        column: j + 1,
                        value: field.to_string(),
                    });
                }
            }
        }
        rows += 1;
    }
    let Some(width) = width else {
        return Err(FlError::NotEnoughRows {
            needed: 1,
            available: 0,
        });
    };
    let dim = width - 1;
    let per_user = match partition.samples_per_user {
        Some(n) => n,
        None if partition.users > 0 => rows / partition.users,
        None => 0,
    };
    if partition.samples_per_user.is_none() && per_user == 0 && partition.users > 0 {
        return Err(FlError::NotEnoughRows {
            needed: partition.users,
            available: rows,
        });
    }
    let parts = partition_rows(rows, partition.users, per_user, partition.seed)?;
    let users = parts
        .iter()
        .map(|idx| {
            let mut x = Vec::with_capacity(idx.len() * dim);
            let mut y = Vec::with_capacity(idx.len());
            for &r in idx {
                let row = &values[r * width..(r + 1) * width];
                x.extend_from_slice(&row[..dim]);
                y.push(row[dim]);
            }
            UserData::new(x, y, dim)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(users, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl_sim::{Loss, global_loss};

    fn one_user(csv: &str) -> Result<Dataset, FlError> {
        load_csv_from_reader(
            csv.as_bytes(),
            &CsvPartition {
                users: 1,
                samples_per_user: None,
                seed: 0,
            },
        )
    }

    #[test]
    fn handcrafted_csv_gives_exact_matrices() {
        let ds = one_user("1,2,3\n4.5,-1,0\n0,0,7e-1\n").unwrap();
        assert_eq!(ds.dim(), 2);
        let u = &ds.users()[0];
        assert_eq!(u.features(), &[1.0, 2.0, 4.5, -1.0, 0.0, 0.0]);
        assert_eq!(u.targets(), &[3.0, 0.0, 0.7]);
    }

    #[test]
    fn header_row_is_rejected() {
        let err = one_user("x1,x2,y\n1,2,3\n").unwrap_err();
        assert!(matches!(err, FlError::Header { column: 1, .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = one_user("1,2,3\n4,abc,6\n").unwrap_err();
        assert!(matches!(err, FlError::Parse { row: 2, column: 2, .. }), "{err}");
        let err = one_user("1,2,3\n4,5\n").unwrap_err();
        assert!(
            matches!(
                err,
                FlError::DimensionMismatch {
                    row: 2,
                    expected: 3,
                    found: 2
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn partition_is_disjoint_and_matches_draw() {
        let parts = partition_rows(100, 4, 20, 9).unwrap();
        let mut all: Vec<usize> = parts.concat();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut drawn = index::sample(&mut rng, 100, 80).into_vec();
        all.sort_unstable();
        drawn.sort_unstable();
        assert_eq!(all, drawn);
        all.dedup();
        assert_eq!(all.len(), 80);
        assert!(matches!(
            partition_rows(10, 3, 4, 0),
            Err(FlError::NotEnoughRows {
                needed: 12,
                available: 10
            })
        ));
    }

    #[test]
    fn synthetic_data_is_reproducible() {
        let spec = SynthSpec::default();
        assert_eq!(synth_dataset(&spec).unwrap(), synth_dataset(&spec).unwrap());
        let other = synth_dataset(&SynthSpec { seed: 1, ..spec }).unwrap();
        assert_ne!(synth_dataset(&spec).unwrap(), other);
    }

    #[test]
    fn planted_weights_recovered_by_least_squares() {
        let ds = synth_dataset(&SynthSpec {
            condition_number: 50.0,
            ..SynthSpec::default()
        })
        .unwrap();
        let (w, f) = ds.least_squares(0.0).unwrap();
        for (a, b) in w.iter().zip(ds.planted_weights().unwrap()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        assert!(f < 1e-20);
        let planted = ds.planted_weights().unwrap();
        assert!(global_loss(planted, &ds, &Loss::convex()) < 1e-24);
        assert_eq!(ds.known_optimum(), Some(0.0));
    }

    #[test]
    fn noisy_synthetic_optimum_is_below_planted_loss() {
        let ds = synth_dataset(&SynthSpec {
            noise: 0.1,
            ..SynthSpec::default()
        })
        .unwrap();
        let opt = ds.known_optimum().unwrap();
        let planted = global_loss(ds.planted_weights().unwrap(), &ds, &Loss::convex());
        assert!(opt > 0.0 && opt < planted);
    }

    #[test]
    fn rejects_bad_specs() {
        for spec in [
            SynthSpec {
                condition_number: 0.5,
                ..SynthSpec::default()
            },
            SynthSpec {
                samples: 3,
                ..SynthSpec::default()
            },
            SynthSpec {
                users: 0,
                ..SynthSpec::default()
            },
        ] {
            assert!(synth_dataset(&spec).is_err());
        }
    }
}
