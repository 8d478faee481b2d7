use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every clamping and acceptance threshold used by the library, in one place.
///
/// Figure datasets are reproducible only if these are pinned, so the record is
/// passed explicitly to every computation and echoed in CLI output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max entrywise |M - M^dagger| accepted by density-matrix validation.
    pub hermitian: f64,
    /// Max |tr M - 1|.
    pub trace: f64,
    /// Eigenvalues down to `-psd` are accepted (and clamped to 0 when reported).
    pub psd: f64,
    /// Minimal 1 - |b|^2 of the steered party before the map is declared singular.
    pub inv_eps: f64,
    /// Radicands in [-radicand, 0) are clamped to 0.
    pub radicand: f64,
    /// F and |x| below this count as zero in the x^2/F^2 ratio convention.
    pub ratio_eps: f64,
    /// Allowed excess of |g| over 1 - |x| for an assemblage observable.
    pub positivity: f64,
    /// Joint-measurability criterion values up to this are "jointly measurable".
    pub joint_measurability: f64,
    /// Objective maxima with |value| below this are reported as exactly 0.
    pub zero_snap: f64,
    /// Hidden-state weight denominators must exceed this.
    pub weight_eps: f64,
    /// |t3| up to this certifies a zero-state.
    pub t3_zero: f64,
    /// Analytic vs numeric gap accepted as "numerically consistent".
    pub zero_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-10,
            trace: 1e-10,
            psd: 1e-10,
            inv_eps: 1e-6,
            radicand: 1e-12,
            ratio_eps: 1e-9,
            positivity: 1e-9,
            joint_measurability: 1e-12,
            zero_snap: 1e-12,
            weight_eps: 1e-12,
            t3_zero: 1e-10,
            zero_gap: 1e-4,
        }
    }
}

impl Tolerances {
    /// Override one field by name, as used by `--tol name=value`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tolerance `{name}` must be finite and non-negative"
            )));
        }
        let slot = match name {
            "hermitian" => &mut self.hermitian,
            "trace" => &mut self.trace,
            "psd" => &mut self.psd,
            "inv_eps" => &mut self.inv_eps,
            "radicand" => &mut self.radicand,
            "ratio_eps" => &mut self.ratio_eps,
            "positivity" => &mut self.positivity,
            "joint_measurability" => &mut self.joint_measurability,
            "zero_snap" => &mut self.zero_snap,
            "weight_eps" => &mut self.weight_eps,
            "t3_zero" => &mut self.t3_zero,
            "zero_gap" => &mut self.zero_gap,
            _ => return Err(Error::InvalidConfig(format!("unknown tolerance `{name}`"))),
        };
        *slot = value;
        Ok(())
    }

    /// Clamp a small negative radicand to zero; fail on a strongly negative one.
    pub fn sqrt_clamped(&self, radicand: f64) -> Result<f64> {
        if radicand >= 0.0 {
            Ok(radicand.sqrt())
        } else if radicand >= -self.radicand {
            Ok(0.0)
        } else {
            Err(Error::DomainError { radicand })
        }
    }

    /// max(value, 0) with values inside the snap band reported as exactly 0.
    pub fn clamp_steerability(&self, value: f64) -> f64 {
        if value <= self.zero_snap {
            0.0
        } else {
            value
        }
    }
}
