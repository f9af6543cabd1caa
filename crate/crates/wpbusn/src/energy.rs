//! Saturation non-linear energy harvesting.
//!
//! Incident RF power at a buried device is converted to usable DC power.
//! Two curve shapes are provided: a linear ramp clipped at the saturation
//! level, and the normalized-sigmoid family
//!
//! ```text
//! Phi(P) = (M / (1 + exp(-a*(P - b))) - M*Omega) / (1 - Omega),
//! Omega  = 1 / (1 + exp(a*b)),   M = P_sat
//! ```
//!
//! Both are zero at zero input, nondecreasing, and bounded by the
//! saturation level. Harvested energy over a slot is harvested power times
//! slot duration; phases and geometry are fixed within a slot, so the
//! incident power is constant there.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HarvesterKind {
    LinearSaturation,
    Logistic,
}

/// Energy-harvesting curve of a device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvesterModel {
    pub kind: HarvesterKind,
    /// Conversion efficiency phi (linear kind).
    pub efficiency: f64,
    /// Output saturation level P_sat in watts.
    pub saturation_w: f64,
    /// Sigmoid steepness (1/W), logistic kind only.
    pub logistic_a: f64,
    /// Sigmoid turn-on knee (W), logistic kind only.
    pub logistic_b: f64,
}

impl HarvesterModel {
    pub fn linear_saturation(efficiency: f64, saturation_w: f64) -> Result<Self> {
        let model = Self {
            kind: HarvesterKind::LinearSaturation,
            efficiency,
            saturation_w,
            logistic_a: 1.0,
            logistic_b: 1.0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn logistic(saturation_w: f64, a: f64, b: f64) -> Result<Self> {
        let model = Self {
            kind: HarvesterKind::Logistic,
            efficiency: 1.0,
            saturation_w,
            logistic_a: a,
            logistic_b: b,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.efficiency && self.efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "conversion efficiency {} outside (0, 1]",
                self.efficiency
            )));
        }
        if self.saturation_w <= 0.0 {
            return Err(Error::Domain(format!(
                "saturation level {} must be positive",
                self.saturation_w
            )));
        }
        if self.kind == HarvesterKind::Logistic && (self.logistic_a <= 0.0 || self.logistic_b <= 0.0)
        {
            return Err(Error::Domain("logistic parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Harvested DC power for a given incident RF power at the antenna.
pub fn harvest_power(model: &HarvesterModel, incident_w: f64) -> Result<f64> {
    if incident_w < 0.0 {
        return Err(Error::Domain(format!(
            "negative incident power {incident_w}"
        )));
    }
    Ok(match model.kind {
        HarvesterKind::LinearSaturation => {
            (model.efficiency * incident_w).min(model.saturation_w)
        }
        HarvesterKind::Logistic => {
            let m = model.saturation_w;
            let omega = 1.0 / (1.0 + (model.logistic_a * model.logistic_b).exp());
            let s = 1.0 / (1.0 + (-model.logistic_a * (incident_w - model.logistic_b)).exp());
            (m * s - m * omega) / (1.0 - omega)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_regime() {
        let m = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
        assert!((harvest_power(&m, 1e-3).unwrap() - 0.6e-3).abs() < 1e-15);
    }

    #[test]
    fn zero_in_zero_out() {
        let lin = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
        let log = HarvesterModel::logistic(5e-3, 150.0, 2e-5).unwrap();
        assert_eq!(harvest_power(&lin, 0.0).unwrap(), 0.0);
        assert!(harvest_power(&log, 0.0).unwrap().abs() < 1e-18);
    }

    #[test]
    fn saturation_clamp() {
        let m = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
        assert_eq!(harvest_power(&m, 100e-3).unwrap(), 5e-3);
    }

    #[test]
    fn negative_input_rejected() {
        let m = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
        assert!(harvest_power(&m, -1e-9).is_err());
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(HarvesterModel::linear_saturation(0.0, 5e-3).is_err());
        assert!(HarvesterModel::linear_saturation(1.1, 5e-3).is_err());
        assert!(HarvesterModel::linear_saturation(0.6, 0.0).is_err());
        assert!(HarvesterModel::logistic(5e-3, -1.0, 2e-5).is_err());
        assert!(HarvesterModel::logistic(5e-3, 150.0, 0.0).is_err());
    }

    #[test]
    fn logistic_matches_reference_points() {
        // frozen from an independent evaluation of the normalized sigmoid
        // with M = 5 mW, a = 150 1/W, b = 0.02 mW
        let m = HarvesterModel::logistic(5e-3, 150.0, 2e-5).unwrap();
        assert!((harvest_power(&m, 1e-3).unwrap() - 3.737790e-4).abs() < 1e-9);
        assert!((harvest_power(&m, 2e-3).unwrap() - 7.434746e-4).abs() < 1e-9);
        assert!((harvest_power(&m, 1.0).unwrap() - 5e-3).abs() < 1e-9);
    }

    #[test]
    fn nondecreasing_and_concave_on_grid() {
        // grid step 1 mW, coarser than the logistic knee at 0.02 mW
        let lin = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
        let log = HarvesterModel::logistic(5e-3, 150.0, 2e-5).unwrap();
        for model in [lin, log] {
            let grid: Vec<f64> = (0..=20)
                .map(|i| harvest_power(&model, 1e-3 * i as f64).unwrap())
                .collect();
            for w in grid.windows(2) {
                assert!(w[1] >= w[0] - 1e-18);
            }
            for w in grid.windows(3) {
                // second difference nonpositive
                assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn output_bounds(p_in in 0.0f64..1.0) {
            let lin = HarvesterModel::linear_saturation(0.6, 5e-3).unwrap();
            let out = harvest_power(&lin, p_in).unwrap();
            prop_assert!(out <= (0.6 * p_in).min(5e-3) + 1e-18);
            prop_assert!(out <= p_in + 1e-18); // no energy creation

            let log = HarvesterModel::logistic(5e-3, 150.0, 2e-5).unwrap();
            let out = harvest_power(&log, p_in).unwrap();
            prop_assert!(out <= 5e-3 + 1e-15);
            prop_assert!(out <= p_in + 1e-18); // no energy creation
            prop_assert!(out >= -1e-18);
        }
    }
}
