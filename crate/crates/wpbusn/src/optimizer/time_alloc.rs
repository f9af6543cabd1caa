//! TDMA time allocation for a fixed set of slot phases.
//!
//! With the phases frozen, every slot type has constant harvest rates and
//! SNRs, and the block decomposes into the dedicated WET sub-slot `t`,
//! one BC slot per enabled device (`lambda_m`), and one WIT slot per
//! device (`tau_n`). The program is
//!
//! ```text
//! maximize   sum_m lambda_m * r_m
//!          + sum_n B * tau_n * log2(1 + e_n * g_n / tau_n)
//! subject to t + sum lambda + sum tau = T,     everything >= 0,
//!            tau_n <= e_n * g_n / gamma        (WIT SNR floor)
//! where      e_n = p_wet[n] * t + sum_{m != n} p_bc[n][m] * lambda_m
//! ```
//!
//! The BC terms are linear, the WIT terms are perspectives of a concave
//! log with `e_n` linear in the time variables, so the problem is concave.
//! It is solved by projected gradient ascent with diminishing normalized
//! steps; the SNR-floor coupling is restored after each simplex projection
//! by clipping `tau` to its cap and handing the surplus to the WET
//! sub-slot (which only loosens the caps). Correctness is anchored by the
//! grid-search oracle in [`crate::optimizer::oracle`].

const MAX_ITERS: usize = 10_000;
const STALL_WINDOW: usize = 200;
const REL_IMPROVEMENT: f64 = 1e-8;
/// Relative safety margin on the tau caps so the reported WIT SNR can
/// never round below gamma.
const CAP_MARGIN: f64 = 1e-12;

/// Constants of the allocation program, all phases already folded in.
#[derive(Debug, Clone)]
pub struct TimeProblem {
    /// Block duration T in seconds.
    pub total_time: f64,
    /// Bandwidth B in Hz.
    pub bandwidth: f64,
    /// Demodulated SNR threshold, linear.
    pub gamma: f64,
    /// BC rate `B * log2(1 + snr_bc)` per device, bits/s; ignored where
    /// `enabled` is false.
    pub rate_bc: Vec<f64>,
    /// Which devices passed the BC reliability gate.
    pub enabled: Vec<bool>,
    /// Harvest rate during the WET sub-slot, W per device.
    pub p_wet: Vec<f64>,
    /// `p_bc[n][m]`: harvest rate at device n during device m's BC slot.
    /// The diagonal is zero (a backscattering device does not harvest).
    pub p_bc: Vec<Vec<f64>>,
    /// WIT SNR per joule: `|h_UA|^2 / sigma`, 1/J.
    pub g_wit: Vec<f64>,
}

/// A feasible allocation and its objective value in bits per block.
#[derive(Debug, Clone)]
pub struct TimeSolution {
    pub t_wet: f64,
    pub lambda: Vec<f64>,
    pub tau: Vec<f64>,
    pub objective_bits: f64,
}

impl TimeProblem {
    pub fn num_uds(&self) -> usize {
        self.g_wit.len()
    }

    /// Harvested energy per device for a given (t, lambda).
    pub fn energies(&self, t_wet: f64, lambda: &[f64]) -> Vec<f64> {
        let n = self.num_uds();
        let mut e = vec![0.0; n];
        for (i, en) in e.iter_mut().enumerate() {
            let mut acc = self.p_wet[i] * t_wet;
            for m in 0..n {
                if m != i && self.enabled[m] {
                    acc += self.p_bc[i][m] * lambda[m];
                }
            }
            *en = acc;
        }
        e
    }

    /// Objective in bits for a feasible point.
    pub fn objective(&self, t_wet: f64, lambda: &[f64], tau: &[f64]) -> f64 {
        let e = self.energies(t_wet, lambda);
        let mut bits = 0.0;
        for m in 0..self.num_uds() {
            if self.enabled[m] {
                bits += lambda[m] * self.rate_bc[m];
            }
        }
        for n in 0..self.num_uds() {
            bits += self.wit_bits(tau[n], e[n] * self.g_wit[n]);
        }
        bits
    }

    /// `B * tau * log2(1 + eg / tau)` with the tau -> 0 limit handled.
    fn wit_bits(&self, tau: f64, eg: f64) -> f64 {
        if tau <= 0.0 || eg <= 0.0 {
            return 0.0;
        }
        self.bandwidth * tau * (eg / tau).ln_1p() / std::f64::consts::LN_2
    }

    /// Whether the allocation satisfies the WIT SNR floor for every device
    /// with a positive WIT slot.
    pub fn respects_gate(&self, t_wet: f64, lambda: &[f64], tau: &[f64]) -> bool {
        let e = self.energies(t_wet, lambda);
        tau.iter().enumerate().all(|(n, &tn)| {
            tn <= 0.0 || e[n] * self.g_wit[n] >= self.gamma * tn * (1.0 - 1e-9)
        })
    }
}

/// Euclidean projection onto the scaled simplex {x >= 0, sum x = total}.
fn project_simplex(x: &mut [f64], total: f64) {
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("no NaN in allocation"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        cumsum += v;
        let candidate = (cumsum - total) / (i + 1) as f64;
        if v - candidate > 0.0 {
            theta = candidate;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

struct Layout {
    /// Indices of the enabled devices, in device order.
    bc_slots: Vec<usize>,
    n: usize,
}

impl Layout {
    fn unpack(&self, x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let t = x[0];
        let mut lambda = vec![0.0; self.n];
        for (j, &m) in self.bc_slots.iter().enumerate() {
            lambda[m] = x[1 + j];
        }
        let tau = x[1 + self.bc_slots.len()..].to_vec();
        (t, lambda, tau)
    }
}

/// Clips tau to the SNR-floor caps implied by the current (t, lambda) and
/// moves the surplus into the WET sub-slot. Growing t only loosens the
/// caps, so one pass restores feasibility.
fn enforce_caps(problem: &TimeProblem, layout: &Layout, x: &mut [f64]) {
    let (t, lambda, tau) = layout.unpack(x);
    let e = problem.energies(t, &lambda);
    let tau_offset = 1 + layout.bc_slots.len();
    let mut surplus = 0.0;
    for n in 0..layout.n {
        let cap = e[n] * problem.g_wit[n] / problem.gamma * (1.0 - CAP_MARGIN);
        if tau[n] > cap {
            surplus += tau[n] - cap;
            x[tau_offset + n] = cap;
        }
    }
    x[0] = t + surplus;
}

fn gradient(problem: &TimeProblem, layout: &Layout, x: &[f64], grad: &mut [f64]) {
    let (t, lambda, tau) = layout.unpack(x);
    let e = problem.energies(t, &lambda);
    let n = layout.n;
    let b_ln2 = problem.bandwidth / std::f64::consts::LN_2;

    // dW_n/de_n, zero when the WIT slot is empty
    let mut de = vec![0.0; n];
    for i in 0..n {
        let eg = e[i] * problem.g_wit[i];
        if tau[i] > 0.0 {
            de[i] = b_ln2 * problem.g_wit[i] * tau[i] / (tau[i] + eg);
        }
    }

    grad[0] = (0..n).map(|i| problem.p_wet[i] * de[i]).sum();
    for (j, &m) in layout.bc_slots.iter().enumerate() {
        let mut g = problem.rate_bc[m];
        for i in 0..n {
            if i != m {
                g += problem.p_bc[i][m] * de[i];
            }
        }
        grad[1 + j] = g;
    }
    let tau_offset = 1 + layout.bc_slots.len();
    for i in 0..n {
        let eg = e[i] * problem.g_wit[i];
        grad[tau_offset + i] = if eg <= 0.0 {
            0.0
        } else {
            let u = if tau[i] > 0.0 {
                (eg / tau[i]).min(1e12)
            } else {
                1e12
            };
            b_ln2 * (u.ln_1p() - u / (1.0 + u))
        };
    }
}

/// Maximizes the block throughput over (t_wet, lambda, tau).
pub fn allocate_time_raw(problem: &TimeProblem) -> TimeSolution {
    let n = problem.num_uds();
    let t_total = problem.total_time;
    let layout = Layout {
        bc_slots: (0..n).filter(|&m| problem.enabled[m]).collect(),
        n,
    };
    let dim = 1 + layout.bc_slots.len() + n;

    let eval = |x: &[f64]| {
        let (t, lambda, tau) = layout.unpack(x);
        problem.objective(t, &lambda, &tau)
    };

    // candidate starts (all feasible after cap enforcement)
    let mut starts: Vec<Vec<f64>> = Vec::new();
    {
        // HTT vertex: caps exactly binding under pure WET
        let denom: f64 = 1.0
            + (0..n)
                .map(|i| problem.p_wet[i] * problem.g_wit[i] / problem.gamma)
                .sum::<f64>();
        let t = t_total / denom;
        let mut x = vec![0.0; dim];
        x[0] = t;
        for i in 0..n {
            x[1 + layout.bc_slots.len() + i] =
                t * problem.p_wet[i] * problem.g_wit[i] / problem.gamma;
        }
        starts.push(x);
    }
    starts.push(vec![t_total / dim as f64; dim]);
    if !layout.bc_slots.is_empty() {
        // BC-heavy corner on the best backscatter rate
        let best = layout
            .bc_slots
            .iter()
            .enumerate()
            .max_by(|a, b| {
                problem.rate_bc[*a.1]
                    .partial_cmp(&problem.rate_bc[*b.1])
                    .unwrap()
            })
            .map(|(j, _)| j)
            .unwrap();
        let mut x = vec![0.0; dim];
        x[0] = 0.25 * t_total;
        x[1 + best] = 0.5 * t_total;
        let share = 0.25 * t_total / n as f64;
        for i in 0..n {
            x[1 + layout.bc_slots.len() + i] = share;
        }
        starts.push(x);
    }

    let mut best_x = vec![0.0; dim];
    let mut best_f = f64::NEG_INFINITY;
    for mut x in starts {
        enforce_caps(problem, &layout, &mut x);
        let f = eval(&x);
        if f > best_f {
            best_f = f;
            best_x = x;
        }
    }

    let mut x = best_x.clone();
    let mut grad = vec![0.0; dim];
    let mut window_best = best_f;
    for k in 0..MAX_ITERS {
        gradient(problem, &layout, &x, &mut grad);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= f64::MIN_POSITIVE {
            break;
        }
        let base = 0.3 * t_total / ((k + 1) as f64).sqrt();
        let mut accepted = false;
        for scale in [1.0, 0.25, 4.0] {
            let mut cand = x.clone();
            let step = base * scale / gnorm;
            for (c, g) in cand.iter_mut().zip(&grad) {
                *c += step * g;
            }
            project_simplex(&mut cand, t_total);
            enforce_caps(problem, &layout, &mut cand);
            let f = eval(&cand);
            if !accepted {
                // always advance with the nominal step to keep ascending
                x = cand.clone();
                accepted = true;
            }
            if f > best_f {
                best_f = f;
                best_x = cand.clone();
                x = cand;
            }
        }
        if (k + 1) % STALL_WINDOW == 0 {
            if best_f - window_best <= REL_IMPROVEMENT * best_f.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            window_best = best_f;
        }
    }

    let (t, lambda, mut tau) = layout.unpack(&best_x);
    // tidy the corner values and keep the budget identity exact: residual
    // time goes to the WET sub-slot
    let mut lambda = lambda;
    for l in lambda.iter_mut() {
        if *l < 1e-12 {
            *l = 0.0;
        }
    }
    for t in tau.iter_mut() {
        if *t < 1e-12 {
            *t = 0.0;
        }
    }
    let used: f64 = lambda.iter().sum::<f64>() + tau.iter().sum::<f64>();
    let t_wet = (t_total - used).max(0.0).max(t * 0.0);
    let objective_bits = problem.objective(t_wet, &lambda, &tau);
    TimeSolution {
        t_wet,
        lambda,
        tau,
        objective_bits,
    }
}
