use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::scalar::Scalar;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// First and second moment estimates, shaped like the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m: ModelParams<T>,
    pub v: ModelParams<T>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(params: &ModelParams<T>) -> Self {
        Self {
            m: params.zeros_like(),
            v: params.zeros_like(),
            t: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step<T: Scalar>(
    params: &mut ModelParams<T>,
    grads: &ModelParams<T>,
    state: &mut AdamState<T>,
    lr: f64,
) -> Result<()> {
    let shapes =
        |p: &ModelParams<T>| -> Vec<(usize, usize)> { p.weights().map(|w| w.shape()).collect() };
    let expected = shapes(params);
    if shapes(grads) != expected || shapes(&state.m) != expected || shapes(&state.v) != expected {
        return Err(Error::Dimension(
            "gradient or optimizer state does not match parameter shapes".into(),
        ));
    }

    state.t += 1;
    let t = state.t as i32;
    let (b1, b2) = (T::of(BETA1), T::of(BETA2));
    let (one, eps, lr) = (T::one(), T::of(EPSILON), T::of(lr));
    let bias1 = one - b1.powi(t);
    let bias2 = one - b2.powi(t);

    let moments = state.m.weights_mut().zip(state.v.weights_mut());
    for ((w, g), (m, v)) in params.weights_mut().zip(grads.weights()).zip(moments) {
        let entries = w.data_mut().iter_mut().zip(g.data());
        for ((w, &g), (m, v)) in entries.zip(m.data_mut().iter_mut().zip(v.data_mut())) {
            *m = b1 * *m + (one - b1) * g;
            *v = b2 * *v + (one - b2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *w -= lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::DenseMatrix;

    fn scalar_params(v: f64) -> ModelParams<f64> {
        ModelParams {
            scales: vec![vec![DenseMatrix::filled(1, 1, v)]],
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = ModelParams::<f64>::init(&[vec![3, 2]], 0).unwrap();
        let before = p.clone();
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &before.zeros_like(), &mut state, 0.1).unwrap();
        assert_eq!(p, before);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = scalar_params(1.0);
        let mut state = AdamState::new(&p);
        adam_step(&mut p, &scalar_params(2.0), &mut state, 0.1).unwrap();
        let expected = 1.0 - 0.1 * 2.0 / (2.0 + 1e-8);
        assert!((p.scales[0][0][(0, 0)] - expected).abs() < 1e-12);
    }

    #[test]
    fn identical_calls_are_bit_identical() {
        let base = ModelParams::<f64>::init(&[vec![4, 3, 2]], 5).unwrap();
        let grads = ModelParams::<f64>::init(&[vec![4, 3, 2]], 6).unwrap();
        let run = || {
            let mut p = base.clone();
            let mut s = AdamState::new(&p);
            adam_step(&mut p, &grads, &mut s, 0.01).unwrap();
            adam_step(&mut p, &grads, &mut s, 0.01).unwrap();
            (p, s)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = scalar_params(1.0);
        let mut state = AdamState::new(&p);
        let wrong = ModelParams::<f64>::init(&[vec![2, 2]], 0).unwrap();
        assert!(adam_step(&mut p, &wrong, &mut state, 0.1).is_err());
    }
}
