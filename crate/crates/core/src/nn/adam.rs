use super::tensor::Tensor;

/// A named trainable tensor with its gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor) -> Self {
        let (r, c) = value.shape();
        Parameter {
            name: name.into(),
            value,
            grad: Tensor::zeros(r, c),
        }
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }
}

/// Adam moments and hyper-parameters for one parameter list.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first: Vec<Tensor>,
    second: Vec<Tensor>,
}

impl AdamState {
    pub fn new(params: &[Parameter], lr: f64) -> Self {
        let zeros = || {
            params
                .iter()
                .map(|p| Tensor::zeros(p.value.rows(), p.value.cols()))
                .collect()
        };
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first: zeros(),
            second: zeros(),
        }
    }
}

/// One bias-corrected Adam update from the accumulated gradients, which are
/// zeroed afterwards.
pub fn adam_step(params: &mut [Parameter], state: &mut AdamState) {
    assert_eq!(params.len(), state.first.len(), "adam state built for other params");
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - state.beta1.powi(t);
    let c2 = 1.0 - state.beta2.powi(t);
    let (b1, b2, lr, eps) = (state.beta1, state.beta2, state.lr, state.eps);
    for ((p, m), v) in params
        .iter_mut()
        .zip(&mut state.first)
        .zip(&mut state.second)
    {
        assert_eq!(m.shape(), p.value.shape());
        let values = p.value.data_mut();
        for (i, &g) in p.grad.data().iter().enumerate() {
            let mi = &mut m.data_mut()[i];
            *mi = b1 * *mi + (1.0 - b1) * g;
            let vi = &mut v.data_mut()[i];
            *vi = b2 * *vi + (1.0 - b2) * g * g;
            let m_hat = m.data()[i] / c1;
            let v_hat = v.data()[i] / c2;
            values[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        p.zero_grad();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_param(x: f64) -> Vec<Parameter> {
        vec![Parameter::new("x", Tensor::scalar(x))]
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = scalar_param(0.5);
        let mut st = AdamState::new(&p, 0.001);
        p[0].grad = Tensor::scalar(1.0);
        adam_step(&mut p, &mut st);
        let moved = 0.5 - p[0].value.item();
        assert!((moved - 0.001).abs() < 1e-10, "{moved}");
        assert_eq!(p[0].grad.item(), 0.0);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_param() {
        let mut p = scalar_param(0.5);
        let mut st = AdamState::new(&p, 0.001);
        adam_step(&mut p, &mut st);
        assert_eq!(p[0].value.item(), 0.5);
    }

    #[test]
    fn descends_on_square() {
        let mut p = scalar_param(1.0);
        let mut st = AdamState::new(&p, 0.001);
        let mut prev = f64::INFINITY;
        for step in 0..100 {
            let x = p[0].value.item();
            if step > 0 {
                assert!(x.abs() < prev, "step {step}: {x} vs {prev}");
            }
            prev = x.abs();
            p[0].grad = Tensor::scalar(2.0 * x);
            adam_step(&mut p, &mut st);
        }
    }
}
