use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sinusoidal step embedding: `dim/2` sines followed by `dim/2` cosines of
/// `t / 10000^(2k/dim)`.
pub fn sinusoidal_pos_emb<S: Scalar>(t: usize, dim: usize) -> Result<Vec<S>> {
    if dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "embedding size must be even and positive, got {dim}"
        )));
    }
    let half = dim / 2;
    let mut out = vec![S::zero(); dim];
    for k in 0..half {
        let freq = 10000f64.powf(2.0 * k as f64 / dim as f64);
        let arg = t as f64 / freq;
        out[k] = S::of(arg.sin());
        out[half + k] = S::of(arg.cos());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_zero_is_sines_then_ones() {
        let e = sinusoidal_pos_emb::<f64>(0, 16).unwrap();
        assert!(e[..8].iter().all(|&v| v == 0.0));
        assert!(e[8..].iter().all(|&v| v == 1.0));
    }

    #[test]
    fn first_component_is_sin_t() {
        let e = sinusoidal_pos_emb::<f64>(1, 16).unwrap();
        assert!((e[0] - 0.841_470_984_807_896_5).abs() < 1e-15);
        assert!((e[8] - 1.0_f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn bounded_and_deterministic() {
        let a = sinusoidal_pos_emb::<f64>(5, 16).unwrap();
        assert!(a.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(a, sinusoidal_pos_emb::<f64>(5, 16).unwrap());
    }

    #[test]
    fn odd_dim_rejected() {
        assert!(sinusoidal_pos_emb::<f64>(3, 15).is_err());
    }
}
