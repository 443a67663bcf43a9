use serde::{Deserialize, Serialize};

use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DoseMode {
    /// The whole dose is in the solid stomach compartment at t = 0.
    Instantaneous,
    /// Ingestion spread over a Gaussian window truncated to t >= 0.
    Gaussian,
}

/// How the oral glucose load enters the stomach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoseProfile<S> {
    pub mode: DoseMode,
    /// Ingested glucose, mg.
    pub amount: S,
    /// Gaussian center, min.
    pub center: S,
    /// Gaussian standard deviation, min.
    pub width: S,
}

impl<S: Scalar> DoseProfile<S> {
    pub fn instantaneous(amount: S) -> Self {
        Self {
            mode: DoseMode::Instantaneous,
            amount,
            center: S::lit(7.5),
            width: S::lit(2.5),
        }
    }

    /// Default ingestion window: a 15-minute drink, centered at 7.5 min.
    pub fn gaussian(amount: S) -> Self {
        Self {
            mode: DoseMode::Gaussian,
            ..Self::instantaneous(amount)
        }
    }

    pub fn with_window(mut self, center: S, width: S) -> Self {
        self.center = center;
        self.width = width;
        self
    }

    /// Stomach content at t = 0.
    pub fn initial_stomach(&self) -> S {
        match self.mode {
            DoseMode::Instantaneous => self.amount,
            DoseMode::Gaussian => S::zero(),
        }
    }

    /// Ingestion rate `D·δ(t)` in mg/min.
    #[inline]
    pub fn rate(&self, t: S) -> S {
        match self.mode {
            DoseMode::Instantaneous => S::zero(),
            DoseMode::Gaussian => {
                if t < S::zero() || self.amount == S::zero() {
                    return S::zero();
                }
                self.amount * self.impulse(t)
            }
        }
    }

    /// Unit-integral impulse on [0, ∞).
    fn impulse(&self, t: S) -> S {
        let (c, w) = (self.center.as_f64(), self.width.as_f64());
        // mass of the untruncated Gaussian on [0, inf)
        let kept = 0.5 * libm::erfc(-c / (w * std::f64::consts::SQRT_2));
        let z = (t.as_f64() - c) / w;
        let density = (-0.5 * z * z).exp() / (w * (2.0 * std::f64::consts::PI).sqrt());
        S::lit(density / kept)
    }

    pub fn validate(&self) -> Result<(), super::ModelError> {
        if !self.amount.is_finite() || self.amount < S::zero() {
            return Err(super::ModelError::invalid("D", self.amount, "must be finite and non-negative"));
        }
        if self.mode == DoseMode::Gaussian {
            if !self.width.is_finite() || self.width <= S::zero() {
                return Err(super::ModelError::invalid("width", self.width, "must be positive"));
            }
            if !self.center.is_finite() {
                return Err(super::ModelError::invalid("center", self.center, "must be finite"));
            }
        }
        Ok(())
    }
}
