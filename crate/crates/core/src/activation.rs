//! Componentwise activations that are diffeomorphisms of the real line onto
//! their image. Every kind has a strictly positive derivative.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Sigmoid,
    /// `ln(1 + e^x)`.
    Softplus,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 4] = [
        Activation::Identity,
        Activation::Sigmoid,
        Activation::Softplus,
        Activation::Tanh,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Sigmoid => sigmoid(x),
            Activation::Softplus => softplus(x),
            Activation::Tanh => x.tanh(),
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            Activation::Identity => 1.0,
            Activation::Sigmoid => {
                let e = (-x.abs()).exp();
                let d = 1.0 + e;
                e / (d * d)
            }
            Activation::Softplus => sigmoid(x),
            Activation::Tanh => {
                // sech^2 written so that it stays positive where tanh saturates to +-1
                let e = (-2.0 * x.abs()).exp();
                let d = 1.0 + e;
                4.0 * e / (d * d)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Sigmoid => "sigmoid",
            Activation::Softplus => "softplus",
            Activation::Tanh => "tanh",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Activation::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown activation `{s}`"))
    }
}

/// Logistic function, evaluated through the exponential of `-|x|` so neither
/// branch overflows.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` as `max(x, 0) + ln_1p(e^{-|x|})`.
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_large_argument_is_finite() {
        let v = softplus(700.0);
        assert!(v.is_finite());
        assert!(((v - 700.0) / 700.0).abs() <= 1e-9);
        assert_eq!(softplus(0.0), std::f64::consts::LN_2);
        assert!(softplus(-700.0) > 0.0);
    }

    #[test]
    fn sigmoid_far_left_tail_does_not_underflow_to_nan() {
        let v = sigmoid(-700.0);
        assert!(!v.is_nan());
        assert!(v > 0.0 && v <= 1e-300, "{v}");
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid(800.0), 1.0);
    }

    #[test]
    fn derivatives_positive_on_grid() {
        // deterministic sweep of [-30, 30] with 1e5 points
        for a in Activation::ALL {
            for k in 0..100_000 {
                let x = -30.0 + 60.0 * (k as f64 + 0.5) / 100_000.0;
                assert!(a.derivative(x) > 0.0, "{a} at {x}");
            }
        }
    }

    #[test]
    fn derivatives_match_central_differences() {
        for a in Activation::ALL {
            for &x in &[-3.0, -0.7, 0.0, 0.4, 2.5] {
                let h = 1e-6;
                let fd = (a.apply(x + h) - a.apply(x - h)) / (2.0 * h);
                assert!((fd - a.derivative(x)).abs() < 1e-8, "{a} at {x}");
            }
        }
    }

    #[test]
    fn parse_round_trips_names() {
        for a in Activation::ALL {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
        }
        assert!("softmax".parse::<Activation>().is_err());
        assert!("relu".parse::<Activation>().is_err());
    }
}
