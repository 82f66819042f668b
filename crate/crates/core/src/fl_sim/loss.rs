use super::Dataset;
use super::data::UserData;
use super::linalg::{axpy, dot};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// `1/2 (x^T w - y)^2`
    ConvexSquared,
    /// `1/2 (max(x^T w, 0) - y)^2`; the subgradient at `x^T w = 0` is taken as 0.
    NonconvexReluSquared,
}

/// Per-sample loss plus an optional ridge term `ridge/2 * |w|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loss {
    pub kind: LossKind,
    pub ridge: f64,
}

impl Loss {
    pub fn convex() -> Self {
        Self {
            kind: LossKind::ConvexSquared,
            ridge: 0.0,
        }
    }

    pub fn nonconvex() -> Self {
        Self {
            kind: LossKind::NonconvexReluSquared,
            ridge: 0.0,
        }
    }

    pub fn with_ridge(self, ridge: f64) -> Self {
        Self { ridge, ..self }
    }
}

/// `F_k(w)` and its gradient in one pass over the user's samples.
pub(crate) fn value_and_gradient(w: &[f64], data: &UserData, loss: &Loss) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; w.len()];
    let mut value = 0.0;
    for (x, &y) in data.rows().zip(data.targets()) {
        let z = dot(x, w);
        let (pred, active) = match loss.kind {
            LossKind::ConvexSquared => (z, true),
            LossKind::NonconvexReluSquared => (z.max(0.0), z > 0.0),
        };
        let r = pred - y;
        value += 0.5 * r * r;
        if active {
            axpy(r, x, &mut grad);
        }
    }
    let inv = 1.0 / data.len() as f64;
    value *= inv;
    grad.iter_mut().for_each(|g| *g *= inv);
    if loss.ridge > 0.0 {
        value += 0.5 * loss.ridge * dot(w, w);
        axpy(loss.ridge, w, &mut grad);
    }
    (value, grad)
}

pub fn local_loss(w: &[f64], data: &UserData, loss: &Loss) -> f64 {
    value_and_gradient(w, data, loss).0
}

pub fn local_gradient(w: &[f64], data: &UserData, loss: &Loss) -> Vec<f64> {
    value_and_gradient(w, data, loss).1
}

/// Sample-weighted average of the local losses, `sum_k D_k/D F_k(w)`.
pub fn global_loss(w: &[f64], dataset: &Dataset, loss: &Loss) -> f64 {
    let total = dataset.total_samples() as f64;
    dataset
        .users()
        .iter()
        .map(|u| u.len() as f64 / total * local_loss(w, u, loss))
        .sum()
}

/// Uniform average of the local gradients, as the server computes it each round.
pub fn global_gradient(w: &[f64], dataset: &Dataset, loss: &Loss) -> Vec<f64> {
    let k = dataset.users().len() as f64;
    let mut g = vec![0.0; w.len()];
    for u in dataset.users() {
        axpy(1.0, &local_gradient(w, u, loss), &mut g);
    }
    g.iter_mut().for_each(|x| *x /= k);
    g
}

/// `G_k(w, h) = F_k(w + h) - (grad F_k(w) - xi grad F(w))^T h` and its
/// gradient in `h`, `grad F_k(w + h) - grad F_k(w) + xi grad F(w)`.
pub fn surrogate_value_and_gradient(
    w_global: &[f64],
    h: &[f64],
    grad_local_at_w: &[f64],
    grad_global_at_w: &[f64],
    xi: f64,
    data: &UserData,
    loss: &Loss,
) -> (f64, Vec<f64>) {
    let shifted: Vec<f64> = w_global.iter().zip(h).map(|(w, h)| w + h).collect();
    let (f, mut grad) = value_and_gradient(&shifted, data, loss);
    let mut linear = 0.0;
    for i in 0..h.len() {
        let c = grad_local_at_w[i] - xi * grad_global_at_w[i];
        linear += c * h[i];
        grad[i] -= c;
    }
    (f - linear, grad)
}
