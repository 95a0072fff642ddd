use rand::Rng;

/// Probability vector over providers produced by a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub probs: Vec<f64>,
    /// Pre-softmax reconstruction `x_0`.
    pub x0: Vec<f64>,
    /// `x_T, …, x_0` when tracing is enabled.
    pub trace: Option<Vec<Vec<f64>>>,
}

impl ActionDistribution {
    pub fn from_logits(x0: Vec<f64>) -> Self {
        ActionDistribution {
            probs: softmax(&x0),
            x0,
            trace: None,
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMode {
    /// Categorical draw (training).
    Sample,
    /// Arg-max, lowest index on ties (evaluation).
    Greedy,
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = e.iter().sum();
    e.into_iter().map(|v| v / sum).collect()
}

/// First index holding the maximum.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

pub fn select_action<R: Rng + ?Sized>(dist: &ActionDistribution, mode: SelectMode, rng: &mut R) -> usize {
    match mode {
        SelectMode::Greedy => argmax(&dist.probs),
        SelectMode::Sample => sample_categorical(&dist.probs, rng),
    }
}

pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Shannon entropy in nats, with `0·ln 0 = 0`.
pub fn entropy(dist: &ActionDistribution) -> f64 {
    entropy_of(&dist.probs)
}

pub fn entropy_of(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}
