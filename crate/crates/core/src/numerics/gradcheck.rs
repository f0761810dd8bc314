use crate::error::{Error, Result};
use crate::numerics::Tensor;

/// Central-difference gradient estimate of `f` at `x`.
pub fn finite_diff_grad<F>(mut f: F, x: &Tensor, eps: f64) -> Result<Tensor>
where
    F: FnMut(&Tensor) -> f64,
{
    if !(eps > 0.0) {
        return Err(Error::arg(format!("step must be positive, got {eps}")));
    }
    let mut probe = x.clone();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + eps;
        let hi = f(&probe);
        probe.data_mut()[i] = orig - eps;
        let lo = f(&probe);
        probe.data_mut()[i] = orig;
        if !hi.is_finite() || !lo.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite function value near element {i}"
            )));
        }
        grad.push((hi - lo) / (2.0 * eps));
    }
    Tensor::new(x.shape().to_vec(), grad)
}

/// Largest elementwise `|a - b| / max(|a|, |b|, floor)`.
///
/// `floor` keeps entries that are both (nearly) zero from dominating.
pub fn max_relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_has_unit_gradient() {
        let x = Tensor::new(vec![3], vec![0.3, -2.0, 7.0]).unwrap();
        let g = finite_diff_grad(|t| t.sum(), &x, 1e-5).unwrap();
        assert!(g.data().iter().all(|v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn quadratic() {
        let x = Tensor::new(vec![2], vec![1.0, 2.0]).unwrap();
        let g = finite_diff_grad(|t| 0.5 * t.data().iter().map(|v| v * v).sum::<f64>(), &x, 1e-5)
            .unwrap();
        assert!((g.data()[0] - 1.0).abs() < 1e-8);
        assert!((g.data()[1] - 2.0).abs() < 1e-8);
    }

    #[test]
    fn constant_has_zero_gradient() {
        let x = Tensor::filled(&[4], 1.5);
        let g = finite_diff_grad(|_| 3.0, &x, 1e-3).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_is_reported() {
        let x = Tensor::filled(&[1], 0.0);
        assert!(matches!(
            finite_diff_grad(|t| 1.0 / (t.data()[0] - 1e-6), &x, 1e-6),
            Err(Error::Numeric(_))
        ));
        assert!(finite_diff_grad(|t| t.sum(), &x, 0.0).is_err());
    }
}
