use super::params::ParamStore;
use super::tensor::Scalar;
use crate::error::{Error, Result};

/// Plain SGD with optional global-norm clipping.
///
/// When the L2 norm over all gradients exceeds `clip_norm`, every gradient is
/// rescaled by `clip_norm / norm` before the update. Returns the pre-clip norm.
pub fn sgd_step<T: Scalar>(
    params: &mut ParamStore<T>,
    learning_rate: f64,
    clip_norm: Option<f64>,
) -> Result<f64> {
    if learning_rate.is_nan() || learning_rate <= 0.0 {
        return Err(Error::invalid(
            "sgd_step",
            format!("learning rate must be positive, got {learning_rate}"),
        ));
    }
    let norm = params.grad_norm();
    let factor = match clip_norm {
        Some(c) if norm > c => c / norm,
        _ => 1.0,
    };
    let step = T::lit(learning_rate * factor);
    for p in params.iter_mut() {
        for (v, &g) in p.value.data_mut().iter_mut().zip(p.grad.data()) {
            *v -= step * g;
        }
    }
    Ok(norm)
}
