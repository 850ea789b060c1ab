//! Negative-sampling loss, its analytic gradient, and the in-place SGD
//! steps built from it.
//!
//! For an input vector `d`, a positive output row `p` and noise rows `n_i`:
//!
//! ```text
//! L = -ln σ(p·d) - Σ ln σ(-n_i·d)
//! ∂L/∂d   = (σ(p·d) - 1) p + Σ σ(n_i·d) n_i
//! ∂L/∂p   = (σ(p·d) - 1) d
//! ∂L/∂n_i = σ(n_i·d) d
//! ```

use num_traits::Float;

use super::Matrix;

pub fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// `ln σ(x)`, stable for large `|x|`.
pub fn log_sigmoid<T: Float>(x: T) -> T {
    let zero = T::zero();
    -((-x).max(zero) + (T::one() + (-x.abs()).exp()).ln())
}

/// `∂L/∂(row·d)` for a row with label 1 (positive) or 0 (noise).
#[inline]
fn score_gradient<T: Float>(dot: T, label: T) -> T {
    sigmoid(dot) - label
}

fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn negative_sampling_loss<T: Float>(doc: &[T], positive: &[T], negatives: &[&[T]]) -> T {
    let mut loss = -log_sigmoid(dot(doc, positive));
    for n in negatives {
        loss = loss - log_sigmoid(-dot(doc, n));
    }
    loss
}

#[derive(Debug, Clone)]
pub struct NsGradients<T> {
    pub loss: T,
    pub doc: Vec<T>,
    pub positive: Vec<T>,
    pub negatives: Vec<Vec<T>>,
}

pub fn negative_sampling_gradients<T: Float>(
    doc: &[T],
    positive: &[T],
    negatives: &[&[T]],
) -> NsGradients<T> {
    let mut grad_doc = vec![T::zero(); doc.len()];
    let g = score_gradient(dot(doc, positive), T::one());
    for (gd, &p) in grad_doc.iter_mut().zip(positive) {
        *gd = *gd + g * p;
    }
    let grad_pos = doc.iter().map(|&d| g * d).collect();

    let mut grad_negs = Vec::with_capacity(negatives.len());
    for n in negatives {
        let g = score_gradient(dot(doc, n), T::zero());
        for (gd, &x) in grad_doc.iter_mut().zip(n.iter()) {
            *gd = *gd + g * x;
        }
        grad_negs.push(doc.iter().map(|&d| g * d).collect());
    }
    NsGradients {
        loss: negative_sampling_loss(doc, positive, negatives),
        doc: grad_doc,
        positive: grad_pos,
        negatives: grad_negs,
    }
}

/// One SGD step for `input` predicting `target` against `negatives`.
///
/// Output rows are updated in place, in order. The input's step
/// (`-lr * ∂L/∂input`) is added to `input_step` rather than applied, so the
/// caller decides when the input moves. Returns the loss before the update.
pub fn sgd_step(
    input: &[f32],
    output: &mut Matrix,
    target: usize,
    negatives: &[usize],
    lr: f32,
    input_step: &mut [f32],
) -> f32 {
    let mut loss = 0.0;
    for (row, label) in std::iter::once((target, 1.0f32)).chain(negatives.iter().map(|&n| (n, 0.0)))
    {
        let out = output.row_mut(row);
        let f = dot(input, out);
        loss -= if label > 0.0 {
            log_sigmoid(f)
        } else {
            log_sigmoid(-f)
        };
        let g = -lr * score_gradient(f, label);
        for ((s, o), &x) in input_step.iter_mut().zip(out.iter_mut()).zip(input) {
            *s += g * *o;
            *o += g * x;
        }
    }
    loss
}

/// The input half of [`sgd_step`] with the output weights frozen.
pub fn accumulate_input_gradient(
    input: &[f32],
    output: &Matrix,
    target: usize,
    negatives: &[usize],
    lr: f32,
    input_step: &mut [f32],
) {
    for (row, label) in std::iter::once((target, 1.0f32)).chain(negatives.iter().map(|&n| (n, 0.0)))
    {
        let out = output.row(row);
        let g = -lr * score_gradient(dot(input, out), label);
        for (s, &o) in input_step.iter_mut().zip(out) {
            *s += g * o;
        }
    }
}

pub(crate) fn add_assign(target: &mut [f32], delta: &[f32]) {
    for (t, &d) in target.iter_mut().zip(delta) {
        *t += d;
    }
}
