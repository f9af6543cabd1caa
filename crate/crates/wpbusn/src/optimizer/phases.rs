//! RIS phase-shift optimizers.
//!
//! Three objectives appear in the TDMA block:
//!
//! - a single composite link (WIT slots): closed-form alignment
//!   `theta_k = arg(h_d) - arg(g_k)`, the global maximum of the coherent sum
//! - the double-hop backscatter product `|h_PU(theta)|^2 * |h_UA(theta)|^2`
//!   (BC slots), where one phase vector drives both hops: coordinate ascent
//!   with a 64-point phase grid per element, refined once
//! - the total incident power `sum_n |h_PU,n(theta)|^2` (WET sub-slot):
//!   coordinate ascent with exact per-element updates
//!
//! Both ascent loops start from the best single-link alignment so the
//! result never falls below those baselines, and they never decrease the
//! objective between sweeps.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::channel::ChannelSet;

/// Default maximum number of coordinate-ascent sweeps.
pub const MAX_SWEEPS: usize = 50;

const COARSE_POINTS: usize = 64;
const REFINE_POINTS: usize = 64;

/// Result of an iterative phase optimization.
#[derive(Debug, Clone)]
pub struct PhaseSolution {
    /// One phase per RIS element, in [0, 2*pi).
    pub phases: Vec<f64>,
    /// False when the sweep budget ran out before the tolerance was met.
    pub converged: bool,
    pub sweeps: usize,
}

impl PhaseSolution {
    fn converged(phases: Vec<f64>, sweeps: usize) -> Self {
        Self {
            phases,
            converged: true,
            sweeps,
        }
    }
}

fn normalize(phases: &mut [f64]) {
    for p in phases.iter_mut() {
        *p = p.rem_euclid(TAU);
    }
}

/// Closed-form alignment of the reflected paths with the direct path.
///
/// With `theta_k = arg(h_d) - arg(g_k)` every term of
/// `h_d + sum_k g_k e^(j theta_k)` shares the direct path's phase, reaching
/// the triangle-inequality bound `|h_d| + sum_k |g_k|`. A zero direct path
/// aligns everything to phase zero instead.
pub fn optimize_phases_single_link(
    h_direct: Complex64,
    element_products: &[Complex64],
) -> Vec<f64> {
    let reference = if h_direct.norm() > 0.0 {
        h_direct.arg()
    } else {
        0.0
    };
    let mut phases: Vec<f64> = element_products
        .iter()
        .map(|g| reference - g.arg())
        .collect();
    normalize(&mut phases);
    phases
}

/// One composite hop under a shared phase vector, maintained incrementally.
struct Hop {
    direct: Complex64,
    elements: Vec<Complex64>,
    composite: Complex64,
}

impl Hop {
    fn new(direct: Complex64, elements: Vec<Complex64>, phases: &[f64]) -> Self {
        let mut hop = Self {
            direct,
            elements,
            composite: Complex64::new(0.0, 0.0),
        };
        hop.rebuild(phases);
        hop
    }

    fn rebuild(&mut self, phases: &[f64]) {
        self.composite = self.direct;
        for (g, theta) in self.elements.iter().zip(phases) {
            self.composite += g * Complex64::from_polar(1.0, *theta);
        }
    }

    fn without(&self, k: usize, theta_k: f64) -> Complex64 {
        self.composite - self.elements[k] * Complex64::from_polar(1.0, theta_k)
    }

    fn apply(&mut self, k: usize, old: f64, new: f64) {
        self.composite += self.elements[k]
            * (Complex64::from_polar(1.0, new) - Complex64::from_polar(1.0, old));
    }
}

/// The product objective of a BC slot.
fn product_objective(h1: Complex64, h2: Complex64) -> f64 {
    h1.norm_sqr() * h2.norm_sqr()
}

fn unit_phasors(count: usize, start: f64, step: f64) -> Vec<(f64, Complex64)> {
    (0..count)
        .map(|i| {
            let theta = start + step * i as f64;
            (theta, Complex64::from_polar(1.0, theta))
        })
        .collect()
}

/// Jointly optimizes one phase vector for the two hops of a backscatter
/// link (PS -> UD and UD -> AP) by coordinate ascent on the product
/// objective.
///
/// Each element solves its 1-D subproblem on a 64-point phase grid and a
/// second 64-point grid spanning the best coarse cell; the incumbent phase
/// always stays in the candidate set, so the objective is nondecreasing.
/// Starts from the better of the two single-link alignments, hence the
/// result dominates both under the product objective.
pub fn optimize_phases_bc(
    channels: &ChannelSet,
    ud_index: usize,
    tolerance: f64,
) -> PhaseSolution {
    let g1 = channels.cascade_ps_ud(ud_index);
    let g2 = channels.cascade_ud_ap(ud_index);
    let h1d = channels.h_direct_pu[ud_index];
    let h2d = channels.h_direct_ua[ud_index];
    let k = g1.len();
    if k == 0 {
        return PhaseSolution::converged(Vec::new(), 0);
    }

    // best single-link alignment as the starting point
    let candidates = [
        optimize_phases_single_link(h1d, &g1),
        optimize_phases_single_link(h2d, &g2),
    ];
    let score = |phases: &[f64]| {
        let a = Hop::new(h1d, g1.clone(), phases);
        let b = Hop::new(h2d, g2.clone(), phases);
        product_objective(a.composite, b.composite)
    };
    let mut phases = if score(&candidates[0]) >= score(&candidates[1]) {
        candidates[0].clone()
    } else {
        candidates[1].clone()
    };

    let mut hop1 = Hop::new(h1d, g1, &phases);
    let mut hop2 = Hop::new(h2d, g2, &phases);
    let coarse = unit_phasors(COARSE_POINTS, 0.0, TAU / COARSE_POINTS as f64);
    let mut objective = product_objective(hop1.composite, hop2.composite);

    for sweep in 1..=MAX_SWEEPS {
        for kk in 0..k {
            let old = phases[kk];
            let rest1 = hop1.without(kk, old);
            let rest2 = hop2.without(kk, old);
            let e1 = hop1.elements[kk];
            let e2 = hop2.elements[kk];
            let eval = |phasor: Complex64| {
                product_objective(rest1 + e1 * phasor, rest2 + e2 * phasor)
            };

            let mut best_theta = old;
            let mut best_val = eval(Complex64::from_polar(1.0, old));
            for (theta, phasor) in &coarse {
                let v = eval(*phasor);
                if v > best_val {
                    best_val = v;
                    best_theta = *theta;
                }
            }
            // refine once inside the winning coarse cell
            let cell = TAU / COARSE_POINTS as f64;
            let fine = unit_phasors(
                REFINE_POINTS,
                best_theta - cell,
                2.0 * cell / (REFINE_POINTS - 1) as f64,
            );
            for (theta, phasor) in &fine {
                let v = eval(*phasor);
                if v > best_val {
                    best_val = v;
                    best_theta = *theta;
                }
            }

            if best_theta != old {
                hop1.apply(kk, old, best_theta);
                hop2.apply(kk, old, best_theta);
                phases[kk] = best_theta;
            }
        }
        // counter drift from the incremental updates
        hop1.rebuild(&phases);
        hop2.rebuild(&phases);
        let new_objective = product_objective(hop1.composite, hop2.composite);
        let improved = new_objective - objective;
        objective = new_objective;
        if improved <= tolerance * objective.max(f64::MIN_POSITIVE) {
            normalize(&mut phases);
            return PhaseSolution::converged(phases, sweep);
        }
    }

    normalize(&mut phases);
    PhaseSolution {
        phases,
        converged: false,
        sweeps: MAX_SWEEPS,
    }
}

/// Optimizes the WET sub-slot phases for total incident power
/// `sum_n |h_PU,n(theta)|^2` across all devices.
///
/// The 1-D subproblem has the closed form
/// `theta_k = -arg(sum_n conj(R_nk) g_nk)`, so each coordinate update is
/// exact. Starts from the single-link alignment that scores best under the
/// sum objective; with one device this is already the global optimum.
pub fn optimize_phases_wet(channels: &ChannelSet, tolerance: f64) -> PhaseSolution {
    let n = channels.num_uds();
    let k = channels.num_elements();
    if k == 0 {
        return PhaseSolution::converged(Vec::new(), 0);
    }

    let links: Vec<(Complex64, Vec<Complex64>)> = (0..n)
        .map(|i| (channels.h_direct_pu[i], channels.cascade_ps_ud(i)))
        .collect();
    let sum_power = |hops: &[Hop]| hops.iter().map(|h| h.composite.norm_sqr()).sum::<f64>();

    // candidate starts: each device's own alignment
    let mut phases = Vec::new();
    let mut best_start = f64::NEG_INFINITY;
    for (hd, g) in &links {
        let cand = optimize_phases_single_link(*hd, g);
        let hops: Vec<Hop> = links
            .iter()
            .map(|(d, g)| Hop::new(*d, g.clone(), &cand))
            .collect();
        let v = sum_power(&hops);
        if v > best_start {
            best_start = v;
            phases = cand;
        }
    }

    let mut hops: Vec<Hop> = links
        .iter()
        .map(|(d, g)| Hop::new(*d, g.clone(), &phases))
        .collect();
    let mut objective = sum_power(&hops);

    for sweep in 1..=MAX_SWEEPS {
        for kk in 0..k {
            let old = phases[kk];
            let mut s = Complex64::new(0.0, 0.0);
            for hop in &hops {
                s += hop.without(kk, old).conj() * hop.elements[kk];
            }
            if s.norm() == 0.0 {
                continue;
            }
            let new = -s.arg();
            // exact update never decreases the objective
            for hop in hops.iter_mut() {
                hop.apply(kk, old, new);
            }
            phases[kk] = new;
        }
        for hop in hops.iter_mut() {
            hop.rebuild(&phases);
        }
        let new_objective = sum_power(&hops);
        let improved = new_objective - objective;
        objective = new_objective;
        if improved <= tolerance * objective.max(f64::MIN_POSITIVE) {
            normalize(&mut phases);
            return PhaseSolution::converged(phases, sweep);
        }
    }

    normalize(&mut phases);
    PhaseSolution {
        phases,
        converged: false,
        sweeps: MAX_SWEEPS,
    }
}
