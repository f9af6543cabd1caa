//! RF propagation through soil and across the soil-air interface.
//!
//! Moist soil is a lossy dielectric. This module derives its complex
//! permittivity from composition and volumetric water content with the
//! Peplinski semi-empirical model (valid 0.3-1.3 GHz), turns the
//! permittivity into attenuation and phase constants, and provides the
//! two loss terms specific to buried nodes: the in-soil path loss
//!
//! ```text
//! L_soil = 6.4 + 20*log10(d * beta) + 8.69 * alpha * d   [dB]
//! ```
//!
//! and the Fresnel refraction loss at the soil-air interface
//! (polarization-averaged power transmittance, with total internal
//! reflection beyond the critical angle on the soil-to-air direction).

use crate::units::{wavenumber, EPS0};
use crate::{Error, Result};

/// Peplinski model validity range (Hz).
pub const PEPLINSKI_FREQ_MIN_HZ: f64 = 0.3e9;
pub const PEPLINSKI_FREQ_MAX_HZ: f64 = 1.3e9;

/// Soil composition and moisture state.
///
/// Mass fractions are of the dry solid phase; `vwc` is the volumetric
/// water content m_v. Densities are in g/cm^3 as customary in the soil
/// literature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoilMedium {
    pub vwc: f64,
    pub clay_fraction: f64,
    pub sand_fraction: f64,
    pub bulk_density: f64,
    pub particle_density: f64,
}

impl SoilMedium {
    pub fn new(
        vwc: f64,
        clay_fraction: f64,
        sand_fraction: f64,
        bulk_density: f64,
        particle_density: f64,
    ) -> Result<Self> {
        let soil = Self {
            vwc,
            clay_fraction,
            sand_fraction,
            bulk_density,
            particle_density,
        };
        soil.validate()?;
        Ok(soil)
    }

    /// Table-1 style default: 38% clay, reconstruction values for the
    /// remaining composition (clay-loam sand fraction and typical
    /// densities), moisture set by the caller.
    pub fn with_defaults(vwc: f64) -> Result<Self> {
        Self::new(vwc, 0.38, 0.22, 1.5, 2.66)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.vwc) {
            return Err(Error::Domain(format!(
                "volumetric water content {} outside [0, 0.5]",
                self.vwc
            )));
        }
        if self.clay_fraction < 0.0 || self.sand_fraction < 0.0 {
            return Err(Error::Domain("negative mass fraction".into()));
        }
        if self.clay_fraction + self.sand_fraction > 1.0 {
            return Err(Error::Domain(format!(
                "clay + sand fraction {} exceeds 1",
                self.clay_fraction + self.sand_fraction
            )));
        }
        if self.bulk_density < 0.0 || self.particle_density < 0.0 {
            return Err(Error::Domain("negative density".into()));
        }
        if self.bulk_density >= self.particle_density {
            return Err(Error::Domain(format!(
                "bulk density {} must be below particle density {}",
                self.bulk_density, self.particle_density
            )));
        }
        Ok(())
    }
}

/// Relative complex permittivity eps' - j*eps'' of a medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexPermittivity {
    pub real_part: f64,
    pub imag_part: f64,
}

impl ComplexPermittivity {
    pub fn new(real_part: f64, imag_part: f64) -> Result<Self> {
        if real_part < 1.0 {
            return Err(Error::Domain(format!(
                "relative permittivity {} below 1",
                real_part
            )));
        }
        if imag_part < 0.0 {
            return Err(Error::Domain(format!(
                "negative dielectric loss factor {}",
                imag_part
            )));
        }
        Ok(Self {
            real_part,
            imag_part,
        })
    }

    /// Refractive index n = sqrt(eps'). The loss factor is excluded here;
    /// absorption is carried entirely by the attenuation constant.
    pub fn refractive_index(&self) -> f64 {
        self.real_part.sqrt()
    }
}

/// Attenuation constant alpha (Np/m) and phase constant beta (rad/m) of a
/// lossy medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConstants {
    pub alpha: f64,
    pub beta: f64,
}

/// Which way a ray crosses the soil-air interface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfaceDirection {
    SoilToAir,
    AirToSoil,
}

/// Complex permittivity of moist soil via the Peplinski semi-empirical
/// model for the 0.3-1.3 GHz band.
///
/// The solid-phase permittivity, the two moisture exponents and the
/// effective conductivity are the published composition fits; free water
/// follows a single-relaxation Debye curve at room temperature. At
/// `vwc = 0` the loss factor is exactly zero (dry soil limit).
pub fn soil_permittivity(soil: &SoilMedium, freq_hz: f64) -> Result<ComplexPermittivity> {
    soil.validate()?;
    if !(PEPLINSKI_FREQ_MIN_HZ..=PEPLINSKI_FREQ_MAX_HZ).contains(&freq_hz) {
        return Err(Error::ModelValidity(format!(
            "frequency {:.3e} Hz outside the 0.3-1.3 GHz dielectric-model range",
            freq_hz
        )));
    }

    const ALPHA: f64 = 0.65;
    const EPS_W0: f64 = 80.1;
    const EPS_WINF: f64 = 4.9;
    const TWO_PI_TAU_W: f64 = 0.58e-10; // s, free-water relaxation

    let sand = soil.sand_fraction;
    let clay = soil.clay_fraction;
    let rho_b = soil.bulk_density;
    let rho_s = soil.particle_density;
    let mv = soil.vwc;

    let beta_re = 1.2748 - 0.519 * sand - 0.152 * clay;
    let beta_im = 1.33797 - 0.603 * sand - 0.166 * clay;
    let eps_solid = (1.01 + 0.44 * rho_s).powi(2) - 0.062;
    let sigma_eff = 0.0467 + 0.2204 * rho_b - 0.4111 * sand + 0.6614 * clay;

    let x = TWO_PI_TAU_W * freq_hz;
    let debye = (EPS_W0 - EPS_WINF) / (1.0 + x * x);
    let eps_fw_re = EPS_WINF + debye;

    let bracket = 1.0 + (rho_b / rho_s) * (eps_solid.powf(ALPHA) - 1.0)
        + mv.powf(beta_re) * eps_fw_re.powf(ALPHA)
        - mv;
    let eps_re = 1.15 * bracket.powf(1.0 / ALPHA) - 0.68;

    let eps_im = if mv > 0.0 {
        let eps_fw_im = x * debye
            + sigma_eff / (2.0 * std::f64::consts::PI * EPS0 * freq_hz) * (rho_s - rho_b)
                / (rho_s * mv);
        mv.powf(beta_im / ALPHA) * eps_fw_im
    } else {
        0.0
    };

    ComplexPermittivity::new(eps_re, eps_im)
}

/// Attenuation and phase constants of a lossy dielectric:
///
/// ```text
/// alpha = omega * sqrt(mu0*eps0*eps'/2 * (sqrt(1 + (eps''/eps')^2) - 1))
/// beta  = omega * sqrt(mu0*eps0*eps'/2 * (sqrt(1 + (eps''/eps')^2) + 1))
/// ```
///
/// evaluated with mu0*eps0 = 1/c^2 so the lossless case reduces exactly to
/// beta = (2*pi*f/c)*sqrt(eps').
pub fn propagation_constants(eps: &ComplexPermittivity, freq_hz: f64) -> PropagationConstants {
    let k0 = wavenumber(freq_hz);
    let tan = eps.imag_part / eps.real_part;
    let root = (1.0 + tan * tan).sqrt();
    PropagationConstants {
        alpha: k0 * (eps.real_part / 2.0 * (root - 1.0)).max(0.0).sqrt(),
        beta: k0 * (eps.real_part / 2.0 * (root + 1.0)).sqrt(),
    }
}

/// Total loss of a soil segment of length `dist_soil_m`, in dB.
///
/// Modified-Friis underground form: 6.4 dB interface constant, a spreading
/// term driven by the in-soil wavelength, and the absorption term with
/// 8.69 converting Np to dB.
pub fn soil_path_loss_db(dist_soil_m: f64, pc: &PropagationConstants) -> Result<f64> {
    if dist_soil_m <= 0.0 {
        return Err(Error::Domain(format!(
            "soil path length {} must be positive",
            dist_soil_m
        )));
    }
    Ok(6.4 + 20.0 * (dist_soil_m * pc.beta).log10() + 8.69 * pc.alpha * dist_soil_m)
}

/// Refraction loss at the soil-air interface in dB.
///
/// Fresnel power transmittance averaged over the two polarizations with
/// Snell geometry, using n = sqrt(eps'). A soil-to-air ray beyond the
/// critical angle asin(1/n) is totally reflected: the function returns
/// `f64::INFINITY` (dead link) rather than an error.
pub fn refraction_loss_db(
    eps: &ComplexPermittivity,
    incidence_angle_rad: f64,
    direction: InterfaceDirection,
) -> Result<f64> {
    if !(0.0..std::f64::consts::FRAC_PI_2).contains(&incidence_angle_rad) {
        return Err(Error::Domain(format!(
            "incidence angle {} outside [0, pi/2)",
            incidence_angle_rad
        )));
    }
    let n = eps.refractive_index();
    let (n1, n2) = match direction {
        InterfaceDirection::SoilToAir => (n, 1.0),
        InterfaceDirection::AirToSoil => (1.0, n),
    };
    let sin_t = n1 / n2 * incidence_angle_rad.sin();
    if sin_t > 1.0 {
        return Ok(f64::INFINITY);
    }
    let cos_i = incidence_angle_rad.cos();
    let cos_t = (1.0 - sin_t * sin_t).sqrt();
    let r_s = (n1 * cos_i - n2 * cos_t) / (n1 * cos_i + n2 * cos_t);
    let r_p = (n2 * cos_i - n1 * cos_t) / (n2 * cos_i + n1 * cos_t);
    let t_power = 1.0 - 0.5 * (r_s * r_s + r_p * r_p);
    Ok(-10.0 * t_power.log10())
}

/// Critical angle asin(1/n) for soil-to-air incidence, in radians.
pub fn critical_angle_rad(eps: &ComplexPermittivity) -> f64 {
    (1.0 / eps.refractive_index()).min(1.0).asin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: f64 = 433e6;

    fn default_soil(vwc: f64) -> SoilMedium {
        SoilMedium::with_defaults(vwc).unwrap()
    }

    // Expected values frozen from an independent Python evaluation of the
    // published closed forms.

    #[test]
    fn dry_soil_permittivity() {
        let eps = soil_permittivity(&default_soil(0.0), F).unwrap();
        assert!((eps.real_part - 2.600057).abs() < 0.05);
        assert_eq!(eps.imag_part, 0.0);
    }

    #[test]
    fn moist_soil_permittivity() {
        let eps = soil_permittivity(&default_soil(0.1), F).unwrap();
        assert!((eps.real_part - 6.333229).abs() < 1e-4);
        assert!((eps.imag_part - 1.736805).abs() < 1e-4);
        assert!(eps.real_part > 2.600057);
        assert!(eps.imag_part > 0.0);

        let wetter = soil_permittivity(&default_soil(0.2), F).unwrap();
        assert!((wetter.real_part - 11.767537).abs() < 1e-4);
        assert!((wetter.imag_part - 2.991505).abs() < 1e-4);
        assert!(wetter.imag_part > eps.imag_part);
    }

    #[test]
    fn permittivity_monotone_in_moisture() {
        // 11-point grid over [0, 0.5]
        let mut prev = soil_permittivity(&default_soil(0.0), F).unwrap();
        for i in 1..=10 {
            let eps = soil_permittivity(&default_soil(0.05 * i as f64), F).unwrap();
            assert!(eps.real_part >= prev.real_part);
            assert!(eps.imag_part >= prev.imag_part);
            prev = eps;
        }
    }

    #[test]
    fn frequency_validity_window() {
        assert!(matches!(
            soil_permittivity(&default_soil(0.1), 0.2e9),
            Err(Error::ModelValidity(_))
        ));
        assert!(matches!(
            soil_permittivity(&default_soil(0.1), 2.4e9),
            Err(Error::ModelValidity(_))
        ));
        assert!(soil_permittivity(&default_soil(0.1), 0.3e9).is_ok());
        assert!(soil_permittivity(&default_soil(0.1), 1.3e9).is_ok());
    }

    #[test]
    fn soil_invariants_rejected() {
        assert!(SoilMedium::new(0.7, 0.38, 0.22, 1.5, 2.66).is_err());
        assert!(SoilMedium::new(0.1, 0.6, 0.5, 1.5, 2.66).is_err());
        assert!(SoilMedium::new(0.1, 0.38, 0.22, 2.7, 2.66).is_err());
        assert!(SoilMedium::new(-0.1, 0.38, 0.22, 1.5, 2.66).is_err());
    }

    #[test]
    fn lossless_constants() {
        let eps = ComplexPermittivity::new(2.60, 0.0).unwrap();
        let pc = propagation_constants(&eps, F);
        assert_eq!(pc.alpha, 0.0);
        assert!((pc.beta - 14.633012).abs() < 1e-5);
    }

    #[test]
    fn vacuum_limit_is_exact() {
        let eps = ComplexPermittivity::new(1.0, 0.0).unwrap();
        let pc = propagation_constants(&eps, F);
        let k0 = wavenumber(F);
        assert!((pc.beta - k0).abs() / k0 < 1e-12);
        assert!((k0 - 9.075009).abs() < 1e-5);
    }

    #[test]
    fn lossy_reduction_identity() {
        // beta reduces to (2*pi*f/c)*sqrt(eps') when eps'' = 0
        for ep in [1.0, 2.6, 6.3, 11.8, 40.0] {
            let eps = ComplexPermittivity::new(ep, 0.0).unwrap();
            let pc = propagation_constants(&eps, F);
            let expected = wavenumber(F) * ep.sqrt();
            assert!((pc.beta - expected).abs() / expected < 1e-12);
            assert_eq!(pc.alpha, 0.0);
        }
    }

    #[test]
    fn alpha_iff_lossy() {
        let lossy = propagation_constants(&ComplexPermittivity::new(6.33, 1.74).unwrap(), F);
        assert!(lossy.alpha > 0.0);
        let lossless = propagation_constants(&ComplexPermittivity::new(6.33, 0.0).unwrap(), F);
        assert_eq!(lossless.alpha, 0.0);
    }

    #[test]
    fn path_loss_anchor_points() {
        let pc = PropagationConstants {
            alpha: 0.0,
            beta: 14.6,
        };
        assert!((soil_path_loss_db(1.0 / 14.6, &pc).unwrap() - 6.4).abs() < 1e-9);
        assert!((soil_path_loss_db(1.0, &pc).unwrap() - 29.687057).abs() < 1e-4);
        assert!(soil_path_loss_db(0.0, &pc).is_err());
        assert!(soil_path_loss_db(-1.0, &pc).is_err());
    }

    #[test]
    fn absorption_term_is_additive() {
        let lossy = PropagationConstants {
            alpha: 3.1,
            beta: 23.0,
        };
        let lossless = PropagationConstants {
            alpha: 0.0,
            beta: 23.0,
        };
        for d in [0.2, 0.4, 0.6, 1.5] {
            let diff =
                soil_path_loss_db(d, &lossy).unwrap() - soil_path_loss_db(d, &lossless).unwrap();
            assert!((diff - 8.69 * 3.1 * d).abs() < 1e-9);
        }
    }

    #[test]
    fn path_loss_monotone() {
        // strictly increasing in d, alpha, beta on a grid
        let base = PropagationConstants {
            alpha: 1.0,
            beta: 15.0,
        };
        let mut prev = f64::NEG_INFINITY;
        for i in 1..=20 {
            let l = soil_path_loss_db(0.1 * i as f64, &base).unwrap();
            assert!(l > prev);
            prev = l;
        }
        prev = f64::NEG_INFINITY;
        for i in 0..=20 {
            let pc = PropagationConstants {
                alpha: 0.5 * i as f64,
                beta: 15.0,
            };
            let l = soil_path_loss_db(0.4, &pc).unwrap();
            assert!(l > prev);
            prev = l;
        }
        prev = f64::NEG_INFINITY;
        for i in 1..=20 {
            let pc = PropagationConstants {
                alpha: 1.0,
                beta: 2.0 * i as f64,
            };
            let l = soil_path_loss_db(0.4, &pc).unwrap();
            assert!(l > prev);
            prev = l;
        }
    }

    #[test]
    fn refraction_no_contrast() {
        let eps = ComplexPermittivity::new(1.0, 0.0).unwrap();
        for angle in [0.0, 0.3, 0.8, 1.2] {
            for dir in [InterfaceDirection::SoilToAir, InterfaceDirection::AirToSoil] {
                assert!(refraction_loss_db(&eps, angle, dir).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn refraction_normal_incidence() {
        let eps = ComplexPermittivity::new(2.60, 0.0).unwrap();
        let down = refraction_loss_db(&eps, 0.0, InterfaceDirection::AirToSoil).unwrap();
        let up = refraction_loss_db(&eps, 0.0, InterfaceDirection::SoilToAir).unwrap();
        assert!((down - 0.245498).abs() < 1e-4);
        assert!((up - down).abs() < 1e-12);
    }

    #[test]
    fn total_internal_reflection() {
        let eps = ComplexPermittivity::new(2.60, 0.0).unwrap();
        let crit = critical_angle_rad(&eps);
        assert!((crit - 0.668964).abs() < 1e-4);
        let blocked =
            refraction_loss_db(&eps, std::f64::consts::FRAC_PI_4, InterfaceDirection::SoilToAir)
                .unwrap();
        assert!(blocked.is_infinite());
        // just below the critical angle the loss is finite
        let open = refraction_loss_db(&eps, crit - 1e-3, InterfaceDirection::SoilToAir).unwrap();
        assert!(open.is_finite());
        // air-to-soil never goes blind
        let down =
            refraction_loss_db(&eps, std::f64::consts::FRAC_PI_4, InterfaceDirection::AirToSoil)
                .unwrap();
        assert!((down - 0.297580).abs() < 1e-4);
    }

    #[test]
    fn refraction_rejects_bad_angle() {
        let eps = ComplexPermittivity::new(2.60, 0.0).unwrap();
        assert!(refraction_loss_db(&eps, -0.1, InterfaceDirection::SoilToAir).is_err());
        assert!(
            refraction_loss_db(&eps, std::f64::consts::FRAC_PI_2, InterfaceDirection::SoilToAir)
                .is_err()
        );
    }

    proptest! {
        #[test]
        fn refraction_loss_nonnegative(
            ep in 1.0f64..20.0,
            angle in 0.0f64..1.5,
            up in proptest::bool::ANY,
        ) {
            let eps = ComplexPermittivity::new(ep, 0.0).unwrap();
            let dir = if up { InterfaceDirection::SoilToAir } else { InterfaceDirection::AirToSoil };
            let loss = refraction_loss_db(&eps, angle, dir).unwrap();
            prop_assert!(loss >= -1e-12);
        }

        #[test]
        fn soil_to_air_dead_above_critical(
            ep in 1.1f64..20.0,
            frac in 0.05f64..0.95,
        ) {
            let eps = ComplexPermittivity::new(ep, 0.0).unwrap();
            let crit = critical_angle_rad(&eps);
            let below = refraction_loss_db(&eps, crit * (1.0 - frac), InterfaceDirection::SoilToAir).unwrap();
            prop_assert!(below.is_finite());
            let above = crit + frac * (std::f64::consts::FRAC_PI_2 - crit);
            if above < std::f64::consts::FRAC_PI_2 && above > crit {
                let loss = refraction_loss_db(&eps, above, InterfaceDirection::SoilToAir).unwrap();
                prop_assert!(loss.is_infinite());
            }
        }
    }
}
