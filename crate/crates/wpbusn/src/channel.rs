//! Channel coefficients for the buried-node network.
//!
//! Every link is assembled from the same budget: free-space anchoring at a
//! 1 m reference distance, a path-loss exponent acting on the air segment,
//! and (for links that terminate at a buried device) the in-soil loss and
//! the soil-air refraction loss from [`crate::soil`]. Direct PS-to-UD and
//! UD-to-AP links are blocked, so they carry the higher exponent and a
//! random NLOS phase; all RIS-cascaded hops are line-of-sight with
//! deterministic phases.
//!
//! The buried node exits the soil vertically: the in-soil segment equals
//! the burial depth and the interface is crossed at normal incidence. RIS
//! elements share the surface's center point for distance purposes
//! (far-field), keeping only their per-element phase freedom.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::soil::{
    propagation_constants, refraction_loss_db, soil_path_loss_db, soil_permittivity,
    ComplexPermittivity, InterfaceDirection, PropagationConstants, SoilMedium,
};
use crate::units::{wavenumber, C0};
use crate::{Error, Result};

/// A point in meters; the soil surface is the plane z = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

/// Antenna gains per node class, in dBi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaGains {
    pub ps_dbi: f64,
    pub ud_dbi: f64,
    pub ap_dbi: f64,
}

impl Default for AntennaGains {
    fn default() -> Self {
        Self {
            ps_dbi: 0.0,
            ud_dbi: 0.0,
            ap_dbi: 0.0,
        }
    }
}

/// Radio-layer constants of the network.
#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    pub freq_hz: f64,
    pub bandwidth_hz: f64,
    /// PS transmit power P_P in watts.
    pub tx_power_w: f64,
    pub gains: AntennaGains,
    /// Backscatter coefficient eta.
    pub backscatter_coeff: f64,
    /// Energy conversion efficiency phi.
    pub eh_efficiency: f64,
    /// Harvester input saturation cap in watts.
    pub eh_saturation_w: f64,
    /// Noise power sigma in watts.
    pub noise_power_w: f64,
    /// Demodulated SNR threshold gamma, linear.
    pub snr_threshold: f64,
    /// Path-loss exponent of the blocked direct links.
    pub pl_exp_direct: f64,
    /// Path-loss exponent of the LOS cascaded hops.
    pub pl_exp_cascaded: f64,
    /// TDMA block duration T in seconds.
    pub block_duration_s: f64,
}

impl RadioConfig {
    /// The case-study radio defaults: 433 MHz / 125 kHz LoRa-grade link,
    /// 30 dBm PS, -117 dBm noise, -20 dB demodulation threshold.
    pub fn default_table1() -> Self {
        Self {
            freq_hz: 433e6,
            bandwidth_hz: 125e3,
            tx_power_w: crate::units::dbm_to_watt(30.0),
            gains: AntennaGains::default(),
            backscatter_coeff: 0.6,
            eh_efficiency: 0.6,
            eh_saturation_w: 5e-3,
            noise_power_w: crate::units::dbm_to_watt(-117.0),
            snr_threshold: crate::units::db_to_linear(-20.0),
            pl_exp_direct: 3.2,
            pl_exp_cascaded: 2.0,
            block_duration_s: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("freq_hz", self.freq_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_power_w", self.tx_power_w),
            ("noise_power_w", self.noise_power_w),
            ("snr_threshold", self.snr_threshold),
            ("eh_saturation_w", self.eh_saturation_w),
            ("block_duration_s", self.block_duration_s),
        ] {
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(0.0 < self.backscatter_coeff && self.backscatter_coeff <= 1.0) {
            return Err(Error::Domain(format!(
                "backscatter coefficient {} outside (0, 1]",
                self.backscatter_coeff
            )));
        }
        if !(0.0 < self.eh_efficiency && self.eh_efficiency <= 1.0) {
            return Err(Error::Domain(format!(
                "energy conversion efficiency {} outside (0, 1]",
                self.eh_efficiency
            )));
        }
        if self.pl_exp_direct < 2.0 || self.pl_exp_cascaded < 2.0 {
            return Err(Error::Domain("path-loss exponents must be >= 2".into()));
        }
        Ok(())
    }

    /// Harvester realizing the configured efficiency and saturation cap.
    pub fn harvester(&self) -> crate::energy::HarvesterModel {
        crate::energy::HarvesterModel::linear_saturation(self.eh_efficiency, self.eh_saturation_w)
            .expect("validated radio config yields a valid harvester")
    }
}

/// Full deployment: node positions, soil state, and radio constants.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkScenario {
    pub ps_pos: Point3,
    pub ris_pos: Point3,
    pub ap_pos: Point3,
    /// Buried devices; z = -(burial depth) < 0.
    pub ud_positions: Vec<Point3>,
    pub deploy_radius: f64,
    pub node_height: f64,
    pub num_ris_elements: usize,
    pub soil: SoilMedium,
    pub radio: RadioConfig,
}

impl NetworkScenario {
    pub fn num_uds(&self) -> usize {
        self.ud_positions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.ud_positions.is_empty() {
            return Err(Error::Domain("at least one UD is required".into()));
        }
        for (i, p) in self.ud_positions.iter().enumerate() {
            if p.z >= 0.0 {
                return Err(Error::Domain(format!(
                    "UD {i} must be below the surface, z = {}",
                    p.z
                )));
            }
        }
        for (name, p) in [
            ("PS", self.ps_pos),
            ("RIS", self.ris_pos),
            ("AP", self.ap_pos),
        ] {
            if p.z <= 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be above the surface, z = {}",
                    p.z
                )));
            }
        }
        if self.deploy_radius <= 0.0 {
            return Err(Error::Domain("deployment radius must be positive".into()));
        }
        self.soil.validate()?;
        self.radio.validate()
    }
}

/// Per-device channel coefficients of one network realization.
///
/// `b_ru` doubles as the UD-to-RIS hop (`c_ur`): the two directions share
/// the physical path, and at the vertical-exit geometry the refraction
/// terms coincide exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// Blocked direct PS-to-UD coefficients, one per UD.
    pub h_direct_pu: Vec<Complex64>,
    /// Blocked direct UD-to-AP coefficients, one per UD.
    pub h_direct_ua: Vec<Complex64>,
    /// PS-to-RIS per-element coefficients.
    pub a_pr: Vec<Complex64>,
    /// RIS-to-UD per-element coefficients, indexed `[ud][element]`.
    pub b_ru: Vec<Vec<Complex64>>,
    /// RIS-to-AP per-element coefficients.
    pub d_ra: Vec<Complex64>,
}

impl ChannelSet {
    pub fn num_uds(&self) -> usize {
        self.h_direct_pu.len()
    }

    pub fn num_elements(&self) -> usize {
        self.a_pr.len()
    }

    /// UD-to-RIS hop of device `n` (reciprocal to RIS-to-UD).
    pub fn c_ur(&self, n: usize) -> &[Complex64] {
        &self.b_ru[n]
    }

    /// Per-element cascaded products PS -> element k -> UD n.
    pub fn cascade_ps_ud(&self, n: usize) -> Vec<Complex64> {
        self.a_pr
            .iter()
            .zip(&self.b_ru[n])
            .map(|(a, b)| a * b)
            .collect()
    }

    /// Per-element cascaded products UD n -> element k -> AP.
    pub fn cascade_ud_ap(&self, n: usize) -> Vec<Complex64> {
        self.c_ur(n)
            .iter()
            .zip(&self.d_ra)
            .map(|(c, d)| c * d)
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let all = self
            .h_direct_pu
            .iter()
            .chain(&self.h_direct_ua)
            .chain(&self.a_pr)
            .chain(self.b_ru.iter().flatten())
            .chain(&self.d_ra);
        for h in all {
            let mag = h.norm();
            if !(mag > 0.0 && mag <= 1.0) {
                return Err(Error::Domain(format!(
                    "channel coefficient magnitude {mag} outside (0, 1]"
                )));
            }
        }
        Ok(())
    }
}

/// How the carrier phase of a link is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinkPhase {
    /// Deterministic LOS phase -(beta*soil + k0*air).
    Los,
    /// NLOS-scattered link: phase drawn externally, uniform on [0, 2*pi).
    Nlos(f64),
}

/// Splits the path from a buried device to an aboveground endpoint into
/// its soil and air segments.
///
/// The in-soil segment is the vertical exit |ud.z| at normal incidence;
/// the air segment runs from the surface point directly above the UD to
/// the endpoint. Returns `(soil_m, air_m, incidence_angle_rad)`.
pub fn segment_split(endpoint_above: &Point3, ud: &Point3) -> (f64, f64, f64) {
    assert!(
        ud.z < 0.0 && endpoint_above.z >= 0.0,
        "segment_split needs a buried UD and an aboveground endpoint"
    );
    let soil = -ud.z;
    let surface = Point3::new(ud.x, ud.y, 0.0);
    let air = surface.distance(endpoint_above);
    (soil, air, 0.0)
}

/// Precomputed soil quantities shared by every link of one scenario.
#[derive(Debug, Clone, Copy)]
pub struct SoilRf {
    pub eps: ComplexPermittivity,
    pub pc: PropagationConstants,
}

impl SoilRf {
    pub fn for_scenario(scenario: &NetworkScenario) -> Result<Self> {
        let eps = soil_permittivity(&scenario.soil, scenario.radio.freq_hz)?;
        let pc = propagation_constants(&eps, scenario.radio.freq_hz);
        Ok(Self { eps, pc })
    }
}

/// Complex coefficient of a single link.
///
/// Amplitude is `10^(-L/20)` with
///
/// ```text
/// L = FSPL(1 m) + 10*n*log10(d_air) + L_soil + L_refraction - G_tx - G_rx
/// ```
///
/// so that both exponents share the same 1 m free-space anchor. A link
/// whose refraction loss is infinite (beyond the critical angle) returns
/// the zero coefficient.
#[allow(clippy::too_many_arguments)]
pub fn link_coefficient(
    soil_dist: f64,
    air_dist: f64,
    incidence_angle_rad: f64,
    direction: InterfaceDirection,
    pl_exponent: f64,
    gains_db: f64,
    soil_rf: &SoilRf,
    freq_hz: f64,
    phase: LinkPhase,
) -> Result<Complex64> {
    if air_dist < 1.0 {
        return Err(Error::Geometry(format!(
            "air distance {air_dist} m below the 1 m reference distance"
        )));
    }
    if soil_dist < 0.0 {
        return Err(Error::Geometry(format!(
            "negative soil distance {soil_dist}"
        )));
    }

    let fspl_1m = 20.0 * freq_hz.log10() + 20.0 * (4.0 * std::f64::consts::PI / C0).log10();
    let mut loss_db = fspl_1m + 10.0 * pl_exponent * air_dist.log10() - gains_db;
    if soil_dist > 0.0 {
        loss_db += soil_path_loss_db(soil_dist, &soil_rf.pc)?;
        let refr = refraction_loss_db(&soil_rf.eps, incidence_angle_rad, direction)?;
        if refr.is_infinite() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        loss_db += refr;
    }

    let amplitude = 10f64.powf(-loss_db / 20.0);
    let phase = match phase {
        LinkPhase::Los => -(soil_rf.pc.beta * soil_dist + wavenumber(freq_hz) * air_dist),
        LinkPhase::Nlos(p) => p,
    };
    Ok(Complex64::from_polar(amplitude, phase))
}

/// Builds the full channel set of a scenario.
///
/// Direct links draw their NLOS phase from a ChaCha stream seeded with
/// `rng_seed` (two draws per UD, in UD order), so the result is
/// reproducible bit for bit. Cascaded hops are fully deterministic.
pub fn build_channels(scenario: &NetworkScenario, rng_seed: u64) -> Result<ChannelSet> {
    scenario.validate()?;
    let soil_rf = SoilRf::for_scenario(scenario)?;
    let radio = &scenario.radio;
    let g = &radio.gains;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let k = scenario.num_ris_elements;

    let mut h_direct_pu = Vec::with_capacity(scenario.num_uds());
    let mut h_direct_ua = Vec::with_capacity(scenario.num_uds());
    let mut b_ru = Vec::with_capacity(scenario.num_uds());

    // PS -> RIS and RIS -> AP are aboveground LOS hops; every element sees
    // the RIS center.
    let ps_ris = scenario.ps_pos.distance(&scenario.ris_pos);
    let ris_ap = scenario.ris_pos.distance(&scenario.ap_pos);
    let a_one = link_coefficient(
        0.0,
        ps_ris,
        0.0,
        InterfaceDirection::AirToSoil,
        radio.pl_exp_cascaded,
        g.ps_dbi,
        &soil_rf,
        radio.freq_hz,
        LinkPhase::Los,
    )?;
    let d_one = link_coefficient(
        0.0,
        ris_ap,
        0.0,
        InterfaceDirection::SoilToAir,
        radio.pl_exp_cascaded,
        g.ap_dbi,
        &soil_rf,
        radio.freq_hz,
        LinkPhase::Los,
    )?;
    let a_pr = vec![a_one; k];
    let d_ra = vec![d_one; k];

    for ud in &scenario.ud_positions {
        let (soil_ps, air_ps, angle) = segment_split(&scenario.ps_pos, ud);
        let (soil_ap, air_ap, _) = segment_split(&scenario.ap_pos, ud);
        let (soil_ris, air_ris, _) = segment_split(&scenario.ris_pos, ud);

        let phase_pu = rng.gen_range(0.0..std::f64::consts::TAU);
        let phase_ua = rng.gen_range(0.0..std::f64::consts::TAU);

        h_direct_pu.push(link_coefficient(
            soil_ps,
            air_ps,
            angle,
            InterfaceDirection::AirToSoil,
            radio.pl_exp_direct,
            g.ps_dbi + g.ud_dbi,
            &soil_rf,
            radio.freq_hz,
            LinkPhase::Nlos(phase_pu),
        )?);
        h_direct_ua.push(link_coefficient(
            soil_ap,
            air_ap,
            angle,
            InterfaceDirection::SoilToAir,
            radio.pl_exp_direct,
            g.ud_dbi + g.ap_dbi,
            &soil_rf,
            radio.freq_hz,
            LinkPhase::Nlos(phase_ua),
        )?);

        let b_one = link_coefficient(
            soil_ris,
            air_ris,
            angle,
            InterfaceDirection::AirToSoil,
            radio.pl_exp_cascaded,
            g.ud_dbi,
            &soil_rf,
            radio.freq_hz,
            LinkPhase::Los,
        )?;
        b_ru.push(vec![b_one; k]);
    }

    let set = ChannelSet {
        h_direct_pu,
        h_direct_ua,
        a_pr,
        b_ru,
        d_ra,
    };
    set.validate()?;
    Ok(set)
}

/// Coherent superposition of a direct path and the RIS-reflected paths:
/// `h = h_d + sum_k g_k * exp(j*theta_k)`.
pub fn composite_gain(
    h_direct: Complex64,
    per_element_products: &[Complex64],
    phases: &[f64],
) -> Result<Complex64> {
    if per_element_products.len() != phases.len() {
        return Err(Error::Contract(format!(
            "{} cascaded products but {} phases",
            per_element_products.len(),
            phases.len()
        )));
    }
    let mut h = h_direct;
    for (g, theta) in per_element_products.iter().zip(phases) {
        h += g * Complex64::from_polar(1.0, *theta);
    }
    Ok(h)
}
