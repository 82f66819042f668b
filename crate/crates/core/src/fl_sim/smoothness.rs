use super::linalg::{scaled_gram, top_eigenvalue};
use super::{Dataset, FlError, Loss, LossKind};

const EIG_REL_TOL: f64 = 1e-14;
const EIG_MAX_ITER: usize = 200_000;

/// Curvature bounds of the local losses: `gamma I <= H_k <= L I` for every user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothness {
    pub lipschitz: f64,
    pub strong_convexity: f64,
    /// Some local Hessian is (numerically) singular, so `strong_convexity` is 0.
    pub singular: bool,
}

/// Extreme eigenvalues of the per-user Hessians `(1/D_k) X_k^T X_k + ridge I`.
/// The smallest one comes from power iteration on `lambda_max I - H_k`.
pub fn estimate_smoothness(dataset: &Dataset, loss: &Loss) -> Result<Smoothness, FlError> {
    if loss.kind != LossKind::ConvexSquared {
        return Err(FlError::Unsupported(
            "curvature bounds are only defined for the convex squared loss",
        ));
    }
    let d = dataset.dim();
    let mut lipschitz = 0.0f64;
    let mut strong = f64::INFINITY;
    for u in dataset.users() {
        let mut h = scaled_gram(u.features(), u.len(), d);
        let top = top_eigenvalue(&h, d, EIG_REL_TOL, EIG_MAX_ITER);
        for (i, v) in h.iter_mut().enumerate() {
            *v = if i % (d + 1) == 0 { top - *v } else { -*v };
        }
        let spread = top_eigenvalue(&h, d, EIG_REL_TOL, EIG_MAX_ITER);
        let bottom = (top - spread).max(0.0);
        lipschitz = lipschitz.max(top + loss.ridge);
        strong = strong.min(bottom + loss.ridge);
    }
    let singular = strong <= 1e-12 * lipschitz;
    if singular {
        log::warn!("a local Hessian is singular; strong convexity reported as 0 (consider a ridge term)");
        strong = 0.0;
    }
    Ok(Smoothness {
        lipschitz,
        strong_convexity: strong,
        singular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fl_sim::{SynthSpec, UserData, synth_dataset};
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn identity_user(d: usize) -> UserData {
        let mut x = vec![0.0; d * d];
        for i in 0..d {
            x[i * d + i] = 1.0;
        }
        UserData::new(x, vec![0.0; d], d).unwrap()
    }

    #[test]
    fn identity_features() {
        let ds = Dataset::new(vec![identity_user(4)], None).unwrap();
        let s = estimate_smoothness(&ds, &Loss::convex()).unwrap();
        assert!((s.lipschitz - 0.25).abs() < 1e-15);
        assert!((s.strong_convexity - 0.25).abs() < 1e-15);
        let r = estimate_smoothness(&ds, &Loss::convex().with_ridge(0.5)).unwrap();
        assert!((r.lipschitz - 0.75).abs() < 1e-15);
        assert!((r.strong_convexity - 0.75).abs() < 1e-15);
    }

    #[test]
    fn nonconvex_is_unsupported() {
        let ds = Dataset::new(vec![identity_user(2)], None).unwrap();
        assert!(matches!(
            estimate_smoothness(&ds, &Loss::nonconvex()),
            Err(FlError::Unsupported(_))
        ));
    }

    #[test]
    fn rank_deficient_reports_singular() {
        let x = vec![1.0, 1.0, 2.0, 2.0, -1.0, -1.0];
        let ds = Dataset::new(vec![UserData::new(x, vec![0.0; 3], 2).unwrap()], None).unwrap();
        let s = estimate_smoothness(&ds, &Loss::convex()).unwrap();
        assert!(s.singular);
        assert_eq!(s.strong_convexity, 0.0);
        let r = estimate_smoothness(&ds, &Loss::convex().with_ridge(1e-3)).unwrap();
        assert!(!r.singular && (r.strong_convexity - 1e-3).abs() < 1e-9);
    }

    #[test]
    fn matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (d, n) = (10, 1000);
        let users: Vec<UserData> = (0..3)
            .map(|_| {
                let x: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
                UserData::new(x, vec![0.0; n], d).unwrap()
            })
            .collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for u in &users {
            let h = DMatrix::from_row_slice(d, d, &scaled_gram(u.features(), n, d));
            let eig = h.symmetric_eigen().eigenvalues;
            hi = hi.max(eig.max());
            lo = lo.min(eig.min());
        }
        let ds = Dataset::new(users, None).unwrap();
        let s = estimate_smoothness(&ds, &Loss::convex()).unwrap();
        assert!((s.lipschitz - hi).abs() <= 1e-6 * hi, "{} vs {hi}", s.lipschitz);
        assert!(
            (s.strong_convexity - lo).abs() <= 1e-6 * lo,
            "{} vs {lo}",
            s.strong_convexity
        );
    }

    #[test]
    fn synthetic_spectrum_is_exact() {
        let ds = synth_dataset(&SynthSpec {
            condition_number: 8.0,
            ..SynthSpec::default()
        })
        .unwrap();
        let s = estimate_smoothness(&ds, &Loss::convex()).unwrap();
        assert!((s.lipschitz - 1.0).abs() < 1e-9);
        assert!((s.strong_convexity - 0.125).abs() < 1e-9);
    }
}
