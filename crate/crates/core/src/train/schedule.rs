/// Learning rate for `epoch`: constant until `decay_epoch`, then a linear
/// ramp reaching zero at `epochs`.
pub fn lr_schedule(epoch: usize, base_lr: f64, epochs: usize, decay_epoch: usize) -> f64 {
    if epoch <= decay_epoch || epochs <= decay_epoch {
        return base_lr;
    }
    let span = (epochs - decay_epoch) as f64;
    let done = (epoch.min(epochs) - decay_epoch) as f64;
    base_lr * (1.0 - done / span)
}
