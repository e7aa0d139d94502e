//! Loss terms for the generator and discriminator.
//!
//! Adversarial terms are least-squares against a (smoothed) real target of
//! 0.9 and a fake target of 0. Auxiliary terms are the cross-entropy of the
//! sensor-class head and are minimized by both players. Expectations are
//! batch means; patch losses average over every cell of every sample.

use candle_core::{DType, Tensor, D};

use crate::config::ConditioningMode;
use crate::error::{Error, Result};

fn check_finite(t: &Tensor, what: &str) -> Result<()> {
    let values: Vec<f64> = t.to_dtype(DType::F64)?.flatten_all()?.to_vec1()?;
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite {
            what: what.to_string(),
            step: 0,
            pair_ids: Vec::new(),
        })
    }
}

fn half_mse_to(patch: &Tensor, target: f64) -> Result<Tensor> {
    Ok((patch.affine(1.0, -target)?.sqr()?.mean_all()? * 0.5)?)
}

/// `½ · mean((D(A, B̂) − target)²)`: the generator wants fakes scored real.
pub fn adv_loss_g(patch: &Tensor, smoothed_target: f64) -> Result<Tensor> {
    if !(smoothed_target > 0.0 && smoothed_target <= 1.0) {
        return Err(Error::Validation(format!(
            "smoothed target must lie in (0, 1], got {smoothed_target}"
        )));
    }
    check_finite(patch, "patch map")?;
    half_mse_to(patch, smoothed_target)
}

/// Least-squares discriminator terms `(real → target, fake → 0)`.
pub fn adv_loss_d(patch_real: &Tensor, patch_fake: &Tensor, smoothed_target: f64) -> Result<(Tensor, Tensor)> {
    check_finite(patch_real, "real patch map")?;
    check_finite(patch_fake, "fake patch map")?;
    Ok((half_mse_to(patch_real, smoothed_target)?, half_mse_to(patch_fake, 0.0)?))
}

/// Numerically stable `log_softmax` along the last dimension.
pub fn log_softmax(logits: &Tensor) -> Result<Tensor> {
    let max = logits.max_keepdim(D::Minus1)?.detach();
    let shifted = logits.broadcast_sub(&max)?;
    let lse = shifted.exp()?.sum_keepdim(D::Minus1)?.log()?;
    Ok(shifted.broadcast_sub(&lse)?)
}

pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    Ok(log_softmax(logits)?.exp()?)
}

/// Mean negative log-probability of `targets` under `softmax(logits)`.
///
/// `logits` is `[N, n_labels]` (or `[n_labels]` for a single sample).
pub fn aux_loss(logits: &Tensor, targets: &[usize]) -> Result<Tensor> {
    let logits = if logits.rank() == 1 { logits.unsqueeze(0)? } else { logits.clone() };
    let (n, k) = logits.dims2()?;
    if targets.len() != n {
        return Err(Error::Shape(format!("{n} logit rows but {} targets", targets.len())));
    }
    if let Some(&t) = targets.iter().find(|&&t| t >= k) {
        return Err(Error::Registry(format!("target label {t} out of range for {k} classes")));
    }
    check_finite(&logits, "class logits")?;
    let mut one_hot = vec![0f64; n * k];
    for (row, &t) in targets.iter().enumerate() {
        one_hot[row * k + t] = 1.0;
    }
    let one_hot = Tensor::from_vec(one_hot, (n, k), logits.device())?.to_dtype(logits.dtype())?;
    Ok((log_softmax(&logits)? * one_hot)?.sum_all()?.affine(-1.0 / n as f64, 0.0)?)
}

/// Mean absolute difference over all elements.
pub fn l1_loss(real: &Tensor, generated: &Tensor) -> Result<Tensor> {
    if real.dims() != generated.dims() {
        return Err(Error::Shape(format!(
            "L1 operands differ: {:?} vs {:?}",
            real.dims(),
            generated.dims()
        )));
    }
    Ok((real - generated)?.abs()?.mean_all()?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorLossBreakdown {
    pub adv: f64,
    pub aux: f64,
    pub l1: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscriminatorLossBreakdown {
    pub adv_real: f64,
    pub adv_fake: f64,
    pub aux_real: f64,
    pub aux_fake: f64,
    pub total: f64,
}

/// `total = adv + aux + λ·l1`, with `aux` forced to 0 for plain pix2pix.
pub fn total_g(adv: f64, aux: f64, l1: f64, lambda: f64, mode: ConditioningMode) -> GeneratorLossBreakdown {
    let aux = if mode.uses_aux() { aux } else { 0.0 };
    GeneratorLossBreakdown {
        adv,
        aux,
        l1,
        total: adv + aux + lambda * l1,
    }
}

/// `total = ½[(adv_real + aux_real) + (adv_fake + aux_fake)]`, aux zeroed for plain pix2pix.
pub fn total_d(adv_real: f64, adv_fake: f64, aux_real: f64, aux_fake: f64, mode: ConditioningMode) -> DiscriminatorLossBreakdown {
    let (aux_real, aux_fake) = if mode.uses_aux() { (aux_real, aux_fake) } else { (0.0, 0.0) };
    DiscriminatorLossBreakdown {
        adv_real,
        adv_fake,
        aux_real,
        aux_fake,
        total: 0.5 * ((adv_real + aux_real) + (adv_fake + aux_fake)),
    }
}

/// Tensor-valued generator objective for backpropagation.
pub fn generator_objective(adv: &Tensor, aux: Option<&Tensor>, l1: &Tensor, lambda: f64) -> Result<Tensor> {
    let mut total = (adv + l1.affine(lambda, 0.0)?)?;
    if let Some(aux) = aux {
        total = (total + aux)?;
    }
    Ok(total)
}

/// Tensor-valued discriminator objective for backpropagation.
pub fn discriminator_objective(
    adv_real: &Tensor,
    adv_fake: &Tensor,
    aux: Option<(&Tensor, &Tensor)>,
) -> Result<Tensor> {
    let mut sum = (adv_real + adv_fake)?;
    if let Some((real, fake)) = aux {
        sum = ((sum + real)? + fake)?;
    }
    Ok(sum.affine(0.5, 0.0)?)
}

pub(crate) fn scalar(t: &Tensor) -> Result<f64> {
    Ok(t.to_dtype(DType::F64)?.to_scalar::<f64>()?)
}
