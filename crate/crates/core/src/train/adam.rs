use candle_core::backprop::GradStore;
use candle_core::Tensor;

use crate::error::{Error, Result};
use crate::nets::ParamStore;

pub const ADAM_EPS: f64 = 1e-8;

/// Adam with bias correction, moments kept in parameter order.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    state: AdamState,
}

/// Serializable optimizer state.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Tensor>,
    pub v: Vec<Tensor>,
}

impl Adam {
    pub fn new(params: &ParamStore, lr: f64, beta1: f64, beta2: f64) -> Result<Self> {
        let zeros = || -> Result<Vec<Tensor>> {
            params.vars().map(|v| Ok(v.as_tensor().zeros_like()?)).collect()
        };
        Ok(Adam {
            lr,
            beta1,
            beta2,
            eps: ADAM_EPS,
            state: AdamState {
                step: 0,
                m: zeros()?,
                v: zeros()?,
            },
        })
    }

    pub fn state(&self) -> &AdamState {
        &self.state
    }

    /// Replace the moments, checking they line up with `params`.
    pub fn restore(&mut self, params: &ParamStore, state: AdamState) -> Result<()> {
        if state.m.len() != params.len() || state.v.len() != params.len() {
            return Err(Error::Shape("optimizer state does not match parameter count".into()));
        }
        for ((var, m), v) in params.vars().zip(&state.m).zip(&state.v) {
            if m.dims() != var.dims() || v.dims() != var.dims() {
                return Err(Error::Shape(format!(
                    "optimizer moment shape {:?} does not match parameter {:?}",
                    m.dims(),
                    var.dims()
                )));
            }
        }
        self.state = state;
        Ok(())
    }

    /// One update of every parameter that received a gradient.
    pub fn step(&mut self, params: &ParamStore, grads: &GradStore) -> Result<()> {
        self.state.step += 1;
        let t = self.state.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let step_size = self.lr / bc1;
        for (i, var) in params.vars().enumerate() {
            let Some(g) = grads.get(var) else { continue };
            let g = g.detach();
            let m = ((&self.state.m[i] * self.beta1)? + (&g * (1.0 - self.beta1))?)?.detach();
            let v = ((&self.state.v[i] * self.beta2)? + (g.sqr()? * (1.0 - self.beta2))?)?.detach();
            let denom = (v.sqrt()? / bc2.sqrt())?.affine(1.0, self.eps)?;
            let update = ((&m / denom)? * step_size)?;
            var.set(&(var.as_tensor() - update)?)?;
            self.state.m[i] = m;
            self.state.v[i] = v;
        }
        Ok(())
    }
}
