use crate::error::Result;
use crate::numerics::Tensor;

pub fn relu(x: &Tensor) -> Tensor {
    x.map(|v| v.max(0.0))
}

/// Passes `upstream` where `x > 0`; the subgradient at zero is taken as 0.
pub fn relu_backward(x: &Tensor, upstream: &Tensor) -> Result<Tensor> {
    x.check_same_shape(upstream, "relu_backward")?;
    let data = x
        .data()
        .iter()
        .zip(upstream.data())
        .map(|(&xi, &g)| if xi > 0.0 { g } else { 0.0 })
        .collect();
    Tensor::new(x.shape().to_vec(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_and_subgradient() {
        let x = Tensor::new(vec![3], vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(relu(&x).data(), &[0.0, 0.0, 2.0]);
        let up = Tensor::filled(&[3], 5.0);
        assert_eq!(relu_backward(&x, &up).unwrap().data(), &[0.0, 0.0, 5.0]);
        assert_eq!(relu(&relu(&x)), relu(&x));
    }
}
