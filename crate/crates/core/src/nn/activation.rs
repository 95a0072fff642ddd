use crate::scalar::Scalar;

/// Element-wise activation applied after a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    None,
    Mish,
    Tanh,
}

impl Activation {
    /// Byte tag used by the checkpoint format.
    pub fn tag(self) -> u8 {
        match self {
            Activation::None => 0,
            Activation::Mish => 1,
            Activation::Tanh => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::None),
            1 => Some(Activation::Mish),
            2 => Some(Activation::Tanh),
            _ => None,
        }
    }

    #[inline]
    pub fn apply<S: Scalar>(self, x: S) -> S {
        match self {
            Activation::None => x,
            Activation::Mish => mish(x),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative given the pre-activation `x` and the activation output `y`.
    #[inline]
    pub fn derivative<S: Scalar>(self, x: S, y: S) -> S {
        match self {
            Activation::None => S::one(),
            Activation::Mish => mish_derivative(x),
            Activation::Tanh => S::one() - y * y,
        }
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus<S: Scalar>(x: S) -> S {
    let limit = S::of(20.0);
    if x > limit {
        x
    } else if x < -limit {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Mish: `x * tanh(softplus(x))`.
///
/// With `n = e^x (e^x + 2)`, `tanh(ln(1 + e^x)) = n / (n + 2)`, so one
/// exponential suffices.
#[inline]
pub fn mish<S: Scalar>(x: S) -> S {
    if x > S::of(20.0) {
        return x;
    }
    let e = x.exp();
    let n = e * (e + S::of(2.0));
    x * n / (n + S::of(2.0))
}

#[inline]
pub fn mish_derivative<S: Scalar>(x: S) -> S {
    if x > S::of(20.0) {
        return S::one();
    }
    let two = S::of(2.0);
    let e = x.exp();
    let n = e * (e + two);
    let d = n + two;
    let t = n / d;
    let sig = e / (S::one() + e);
    // 1 - t^2 = 4(n + 1) / (n + 2)^2
    t + x * sig * S::of(4.0) * (n + S::one()) / (d * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mish_reference_values() {
        assert_eq!(mish(0.0_f64), 0.0);
        // 1 * tanh(ln(1 + e)), evaluated at 50 digits with mpmath.
        assert!((mish(1.0_f64) - 0.865_098_388_267_310_3).abs() < 1e-15);
        assert!(mish(-100.0_f64).abs() < 1e-40);
        assert!((mish(40.0_f64) - 40.0).abs() < 1e-12);
    }

    #[test]
    fn mish_lower_bound_and_monotone_right_half() {
        let mut min = f64::INFINITY;
        let mut prev = mish(0.0_f64);
        for i in -200_000..=200_000 {
            let x = i as f64 * 1e-4;
            let y = mish(x);
            min = min.min(y);
            if x > 0.0 {
                assert!(y >= prev);
                prev = y;
            }
        }
        assert!(min > -0.30885 && min < -0.30883, "min = {min}");
    }

    #[test]
    fn mish_derivative_matches_central_difference() {
        for &x in &[-25.0_f64, -5.0, -1.3, -0.2, 0.0, 0.7, 3.0, 19.9, 22.0] {
            let h = 1e-6;
            let fd = (mish(x + h) - mish(x - h)) / (2.0 * h);
            let an = mish_derivative(x);
            assert!((fd - an).abs() <= 1e-6 * (1.0 + an.abs()), "x={x}: {fd} vs {an}");
        }
    }

    #[test]
    fn tag_round_trip() {
        for a in [Activation::None, Activation::Mish, Activation::Tanh] {
            assert_eq!(Activation::from_tag(a.tag()), Some(a));
        }
        assert_eq!(Activation::from_tag(9), None);
    }
}
