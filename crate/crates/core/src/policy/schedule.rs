use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Amplitude applied to the fresh noise in each reverse step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseScaleMode {
    /// `(β̃_t / 2)²`
    #[default]
    Squared,
    /// `√β̃_t`, the usual ancestral-sampling standard deviation.
    Ddpm,
}

impl NoiseScaleMode {
    pub fn name(self) -> &'static str {
        match self {
            NoiseScaleMode::Squared => "squared",
            NoiseScaleMode::Ddpm => "ddpm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "squared" => Some(NoiseScaleMode::Squared),
            "ddpm" => Some(NoiseScaleMode::Ddpm),
            _ => None,
        }
    }
}

/// Variance-preserving noise schedule with per-step tables.
///
/// Tables are indexed by step `t = 0..=T`; index 0 holds the conventions
/// `β_0 = 0`, `ᾱ_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule<S> {
    steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    beta: Vec<S>,
    alpha: Vec<S>,
    alpha_bar: Vec<S>,
    tilde_beta: Vec<S>,
}

impl<S: Scalar> DiffusionSchedule<S> {
    /// `β_t = 1 − exp(−β_min/T − (2t−1)/(2T²)·(β_max − β_min))`
    pub fn vp(steps: usize, beta_min: f64, beta_max: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::InvalidArgument("diffusion needs at least one step".into()));
        }
        if !(beta_min > 0.0 && beta_min < beta_max && beta_max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < beta_min < beta_max, got {beta_min}, {beta_max}"
            )));
        }
        let tf = steps as f64;
        let mut beta = vec![0.0f64; steps + 1];
        let mut alpha = vec![1.0f64; steps + 1];
        let mut alpha_bar = vec![1.0f64; steps + 1];
        let mut tilde_beta = vec![0.0f64; steps + 1];
        for t in 1..=steps {
            let exponent = -beta_min / tf - (2.0 * t as f64 - 1.0) / (2.0 * tf * tf) * (beta_max - beta_min);
            beta[t] = -exponent.exp_m1();
            alpha[t] = 1.0 - beta[t];
            alpha_bar[t] = alpha_bar[t - 1] * alpha[t];
            tilde_beta[t] = (1.0 - alpha_bar[t - 1]) / (1.0 - alpha_bar[t]) * beta[t];
        }
        let conv = |v: Vec<f64>| v.into_iter().map(S::of).collect();
        Ok(DiffusionSchedule {
            steps,
            beta_min,
            beta_max,
            beta: conv(beta),
            alpha: conv(alpha),
            alpha_bar: conv(alpha_bar),
            tilde_beta: conv(tilde_beta),
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn beta(&self, t: usize) -> S {
        self.beta[t]
    }

    pub fn alpha(&self, t: usize) -> S {
        self.alpha[t]
    }

    pub fn alpha_bar(&self, t: usize) -> S {
        self.alpha_bar[t]
    }

    pub fn tilde_beta(&self, t: usize) -> S {
        self.tilde_beta[t]
    }

    pub fn check_step(&self, t: usize) -> Result<()> {
        if t == 0 || t > self.steps {
            return Err(Error::InvalidArgument(format!(
                "denoising step {t} outside 1..={}",
                self.steps
            )));
        }
        Ok(())
    }

    /// Coefficient on the predicted noise inside the reverse mean,
    /// `β_t / √(1 − ᾱ_t)`.
    pub fn eps_coef(&self, t: usize) -> S {
        self.beta[t] / (S::one() - self.alpha_bar[t]).sqrt()
    }

    /// `1 / √α_t`
    pub fn mean_scale(&self, t: usize) -> S {
        S::one() / self.alpha[t].sqrt()
    }

    pub fn noise_scale(&self, t: usize, mode: NoiseScaleMode) -> S {
        let tb = self.tilde_beta[t];
        match mode {
            NoiseScaleMode::Squared => {
                let h = tb / S::of(2.0);
                h * h
            }
            NoiseScaleMode::Ddpm => tb.sqrt(),
        }
    }
}

/// Closed-form noised sample `√ᾱ_t·x0 + √(1 − ᾱ_t)·noise`.
///
/// Test-only utility for checking the reverse chain; training never runs
/// the forward process.
pub fn forward_marginal<S: Scalar>(x0: &[S], t: usize, schedule: &DiffusionSchedule<S>, noise: &[S]) -> Result<Vec<S>> {
    schedule.check_step(t)?;
    if x0.len() != noise.len() {
        return Err(Error::shape(
            "forward_marginal",
            format!("x0 has {} entries, noise {}", x0.len(), noise.len()),
        ));
    }
    let ab = schedule.alpha_bar(t);
    let (a, b) = (ab.sqrt(), (S::one() - ab).sqrt());
    Ok(x0.iter().zip(noise).map(|(&x, &e)| a * x + b * e).collect())
}
