//! Anytime confidence radii and the anytime p-values built from them.
//!
//! A schedule maps a sample count `t` and a confidence level `delta` to a
//! radius `phi(t, delta)` such that, with probability at least `1 - delta`,
//! the running empirical mean stays within `phi` of the true mean for every
//! `t` simultaneously. All logarithms are natural unless written `log2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `e^-1`, the largest level accepted by the Kaufmann-form radius.
pub const INV_E: f64 = 0.367_879_441_171_442_3;

/// Floor for anytime p-values; keeps downstream log-domain work finite.
pub const P_FLOOR: f64 = 1e-300;

/// Default cap on the `phi_inverse` search.
pub const INVERSE_CAP: u64 = 1 << 32;

const P_VALUE_REL_TOL: f64 = 1e-12;

// Below this both closed forms can be non-monotone in t, so the inverse scans linearly.
const INVERSE_SCAN_PREFIX: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConfidenceSchedule {
    /// `sqrt(c_phi * ln(log2(2t) / delta) / t)`.
    SimpleLil { c_phi: f64 },
    /// `sqrt((2 ln(1/delta) + 6 ln ln(1/delta) + 3 ln(max(1, ln(e t / 2)))) / t)`.
    #[default]
    KaufmannLil,
}

impl ConfidenceSchedule {
    pub fn simple() -> Self {
        ConfidenceSchedule::SimpleLil { c_phi: 4.0 }
    }

    /// Largest admissible confidence level. Inclusive for Kaufmann, exclusive for SimpleLil.
    pub fn max_delta(&self) -> f64 {
        match self {
            ConfidenceSchedule::SimpleLil { .. } => 1.0,
            ConfidenceSchedule::KaufmannLil => INV_E,
        }
    }

    pub fn check_delta(&self, delta: f64) -> Result<()> {
        let ok = match self {
            ConfidenceSchedule::SimpleLil { .. } => delta > 0.0 && delta < 1.0,
            ConfidenceSchedule::KaufmannLil => delta > 0.0 && delta <= INV_E,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("delta = {delta} is outside the range of {}", self.name())))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConfidenceSchedule::SimpleLil { .. } => "simple",
            ConfidenceSchedule::KaufmannLil => "kaufmann",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let ConfidenceSchedule::SimpleLil { c_phi } = self {
            if !(c_phi.is_finite() && *c_phi > 0.0) {
                return Err(Error::Domain(format!("c_phi must be positive, got {c_phi}")));
            }
        }
        Ok(())
    }

    /// Anytime confidence radius after `t >= 1` samples at level `delta`.
    pub fn phi(&self, t: u64, delta: f64) -> Result<f64> {
        if t == 0 {
            return Err(Error::Domain("phi needs at least one sample".into()));
        }
        self.check_delta(delta)?;
        Ok(self.radius(t as f64, delta))
    }

    // Unchecked closed form. Callers guarantee t >= 1 and a valid delta.
    #[inline]
    pub(crate) fn radius(&self, t: f64, delta: f64) -> f64 {
        let radicand = match *self {
            ConfidenceSchedule::SimpleLil { c_phi } => c_phi * ((2.0 * t).log2() / delta).ln() / t,
            ConfidenceSchedule::KaufmannLil => {
                let l = -delta.ln();
                let tail = (std::f64::consts::E * t / 2.0).ln().max(1.0).ln();
                (2.0 * l + 6.0 * l.ln() + 3.0 * tail) / t
            }
        };
        radicand.max(0.0).sqrt()
    }

    /// Smallest `t` with `phi(t, delta) <= eps`, searched up to [`INVERSE_CAP`].
    pub fn phi_inverse(&self, eps: f64, delta: f64) -> Result<u64> {
        self.phi_inverse_capped(eps, delta, INVERSE_CAP)
    }

    pub fn phi_inverse_capped(&self, eps: f64, delta: f64, cap: u64) -> Result<u64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Domain(format!("phi_inverse needs eps > 0, got {eps}")));
        }
        self.check_delta(delta)?;
        let cap = cap.max(1);
        let below = |t: u64| self.radius(t as f64, delta) <= eps;

        let prefix_end = INVERSE_SCAN_PREFIX.min(cap);
        if let Some(t) = (1..=prefix_end).find(|&t| below(t)) {
            return Ok(t);
        }
        if prefix_end == cap {
            return Err(Error::Saturated { eps, cap });
        }

        // Past the prefix phi is strictly decreasing in t.
        let mut lo = prefix_end;
        let mut hi = prefix_end;
        loop {
            hi = hi.saturating_mul(2).min(cap);
            if below(hi) {
                break;
            }
            if hi == cap {
                return Err(Error::Saturated { eps, cap });
            }
            lo = hi;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if below(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// `sup { alpha : mean_hat - mu0 <= phi(t, alpha) }`, clamped to `[P_FLOOR, 1]`.
    ///
    /// Returns exactly 1 when no admissible level rejects, which includes every
    /// `mean_hat <= mu0`. For the Kaufmann form the admissible levels stop at `e^-1`.
    pub fn anytime_p_value(&self, mean_hat: f64, t: u64, mu0: f64) -> Result<f64> {
        if t == 0 {
            return Err(Error::Domain("p-value needs at least one sample".into()));
        }
        let excess = mean_hat - mu0;
        if excess <= 0.0 || excess.is_nan() {
            return Ok(1.0);
        }
        let t = t as f64;
        let top = match self {
            ConfidenceSchedule::SimpleLil { .. } => 1.0,
            ConfidenceSchedule::KaufmannLil => INV_E,
        };
        if excess <= self.radius(t, top) {
            return Ok(1.0);
        }
        if excess > self.radius(t, P_FLOOR) {
            return Ok(P_FLOOR);
        }

        // Invariant: excess <= phi(lo) and excess > phi(hi).
        let (mut lo, mut hi) = (P_FLOOR, top);
        while hi - lo > P_VALUE_REL_TOL * hi {
            let mid = (lo.ln() + 0.5 * (hi.ln() - lo.ln())).exp();
            if mid <= lo || mid >= hi {
                break;
            }
            if excess <= self.radius(t, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}
