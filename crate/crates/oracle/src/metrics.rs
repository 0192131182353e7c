//! Figures of merit by direct summation over truncated Fock amplitudes.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::cascade::{CascadeAmplitudes, Modes};
use crate::fock::{binomial, loss_amplitude, pbs_amplitude};
use crate::state::{oracle_build_cascaded, TruncatedState};

/// Relative change between consecutive cutoffs that counts as converged.
pub const CONVERGENCE_TOL: f64 = 1e-9;
pub const START_CUTOFF: u32 = 2;
pub const MAX_CUTOFF: u32 = 40;

/// Source and detector description for the oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleParams {
    pub mean_photon: f64,
    /// Per-mode efficiencies, modes 1..=8.
    pub eta: [f64; 8],
    pub transmissivity: f64,
}

impl OracleParams {
    pub fn lossless(mean_photon: f64) -> Self {
        Self {
            mean_photon,
            eta: [1.0; 8],
            transmissivity: 0.5,
        }
    }

    /// Heralding modes 3..=6 get `eta_b`, receiver modes `eta_t·eta_d`.
    pub fn with_efficiencies(mean_photon: f64, eta_b: f64, eta_t: f64, eta_d: f64) -> Self {
        let r = eta_t * eta_d;
        Self {
            mean_photon,
            eta: [r, r, eta_b, eta_b, eta_b, eta_b, r, r],
            transmissivity: 0.5,
        }
    }

    fn amplitudes(&self, cutoff: u32) -> CascadeAmplitudes {
        CascadeAmplitudes::new(self.mean_photon, self.transmissivity, cutoff)
    }
}

/// Value at the first cutoff whose successor changed it by less than the
/// tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged<T> {
    pub value: T,
    pub cutoff: u32,
    pub converged: bool,
    pub norm_deficit: f64,
}

/// Bell state `(|1,0,…,0,1⟩ ± |0,1,…,1,0⟩)/√2` on the receiver modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellSign {
    Plus,
    Minus,
}

/// Raise the cutoff one step at a time until the value settles.
pub fn converge<T: Clone>(
    p: &OracleParams,
    eval: impl Fn(u32) -> T,
    change: impl Fn(&T, &T) -> f64,
) -> Converged<T> {
    let mut cutoff = START_CUTOFF;
    let mut prev = eval(cutoff);
    while cutoff < MAX_CUTOFF {
        let next = eval(cutoff + 1);
        if change(&prev, &next) < CONVERGENCE_TOL {
            return Converged {
                value: next,
                cutoff: cutoff + 1,
                converged: true,
                norm_deficit: p.amplitudes(cutoff + 1).norm_deficit(),
            };
        }
        prev = next;
        cutoff += 1;
    }
    Converged {
        value: prev,
        cutoff,
        converged: false,
        norm_deficit: p.amplitudes(cutoff).norm_deficit(),
    }
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn matrix_change(a: &[[Complex64; 4]; 4], b: &[[Complex64; 4]; 4]) -> f64 {
    let scale = a.iter().chain(b.iter()).flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let diff = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Probability that a mode holding `m` photons is detected with `n`.
fn detect(eta: f64, m: u32, n: u32) -> f64 {
    if n > m {
        return 0.0;
    }
    binomial(m, n) * eta.powi(n as i32) * (1.0 - eta).powi((m - n) as i32)
}

/// Heralding probability by contracting the detection projectors with the
/// diagonal of the lossless state.
pub fn pgen_at(p: &OracleParams, pattern: [u32; 4], cutoff: u32) -> f64 {
    let mut total = 0.0;
    p.amplitudes(cutoff).for_each(|m, a| {
        let w: f64 = (2..6).map(|j| detect(p.eta[j], m[j], pattern[j - 2])).product();
        total += a * a * w;
    });
    total
}

/// Heralding probability by materialising the state, applying Kraus loss on
/// the heralding modes and keeping the matching amplitudes.
pub fn pgen_filtered_at(p: &OracleParams, pattern: [u32; 4], cutoff: u32) -> f64 {
    let state: TruncatedState = (3..=6).fold(
        oracle_build_cascaded(p.mean_photon, p.transmissivity, cutoff),
        |s, mode| s.apply_loss(mode, p.eta[mode - 1]),
    );
    state.probability(|o| (0..4).all(|k| o[k + 2] as u32 == pattern[k]))
}

pub fn oracle_pgen(p: &OracleParams, pattern: [u32; 4]) -> Converged<f64> {
    converge(p, |c| pgen_at(p, pattern, c), |a, b| relative_change(*a, *b))
}

/// Every way of attributing a subset of the clicks in `counts` to dark
/// counts: `(number attributed, pattern with those clicks removed)`.
pub fn dark_subsets<const N: usize>(counts: [u32; N]) -> Vec<(u32, [u32; N])> {
    let clicked: Vec<usize> = (0..N).filter(|&k| counts[k] > 0).collect();
    (0u32..(1 << clicked.len()))
        .map(|subset| {
            let mut reduced = counts;
            for (bit, &k) in clicked.iter().enumerate() {
                if subset & (1 << bit) != 0 {
                    reduced[k] = 0;
                }
            }
            (subset.count_ones(), reduced)
        })
        .collect()
}

/// Dark clicks as classical noise on the ideal heralding outcomes.
pub fn oracle_pgen_dark(p: &OracleParams, pattern: [u32; 4], pd: f64) -> Converged<f64> {
    let subsets = dark_subsets(pattern);
    let n_clicked = subsets.iter().map(|(k, _)| *k).max().unwrap_or(0) as i32;
    converge(
        p,
        |c| {
            subsets
                .iter()
                .map(|(k, reduced)| {
                    let k = *k as i32;
                    pd.powi(k) * (1.0 - pd).powi(n_clicked - k) * pgen_at(p, *reduced, c)
                })
                .sum()
        },
        |a, b| relative_change(*a, *b),
    )
}

/// Dark clicks on all four heralding detectors: detectors that must stay
/// silent also need to avoid a dark click.
pub fn oracle_pgen_dark_all_detectors(p: &OracleParams, pattern: [u32; 4], pd: f64) -> Converged<f64> {
    let silent = pattern.iter().filter(|&&n| n == 0).count() as i32;
    let mut r = oracle_pgen_dark(p, pattern, pd);
    r.value *= (1.0 - pd).powi(silent);
    r
}

/// `⟨d|ρ_loss|g⟩ = Σ_k ∏_j A_{k_j}(d_j) A_{k_j}(g_j) ψ(d+k) ψ(g+k)`.
pub fn fock_element_at(p: &OracleParams, d: Modes, g: Modes, cutoff: u32) -> f64 {
    let amps = p.amplitudes(cutoff);
    let mut total = 0.0;
    amps.for_each(|m, a| {
        if (0..8).any(|j| m[j] < d[j]) {
            return;
        }
        let mut other = [0u32; 8];
        let mut w = 1.0;
        for j in 0..8 {
            let k = m[j] - d[j];
            other[j] = g[j] + k;
            w *= loss_amplitude(p.eta[j], d[j], k) * loss_amplitude(p.eta[j], g[j], k);
        }
        if w != 0.0 {
            total += w * a * amps.amplitude(&other);
        }
    });
    total
}

pub fn oracle_fock_element(p: &OracleParams, d: Modes, g: Modes) -> Converged<Complex64> {
    converge(
        p,
        |c| Complex64::new(fock_element_at(p, d, g, c), 0.0),
        |a, b| relative_change(a.re, b.re),
    )
}

fn bell_kets(pattern: [u32; 4]) -> (Modes, Modes) {
    let [h3, h4, h5, h6] = pattern;
    ([1, 0, h3, h4, h5, h6, 0, 1], [0, 1, h3, h4, h5, h6, 1, 0])
}

/// Conditional overlap of the heralded receiver state with a Bell state.
pub fn fidelity_at(p: &OracleParams, pattern: [u32; 4], sign: BellSign, cutoff: u32) -> f64 {
    let (x, y) = bell_kets(pattern);
    let s = match sign {
        BellSign::Plus => 1.0,
        BellSign::Minus => -1.0,
    };
    let xx = fock_element_at(p, x, x, cutoff);
    let yy = fock_element_at(p, y, y, cutoff);
    let xy = fock_element_at(p, x, y, cutoff);
    let yx = fock_element_at(p, y, x, cutoff);
    0.5 * (xx + yy + s * (xy + yx)) / pgen_at(p, pattern, cutoff)
}

pub fn oracle_fidelity(p: &OracleParams, pattern: [u32; 4], sign: BellSign) -> Converged<f64> {
    converge(p, |c| fidelity_at(p, pattern, sign, c), |a, b| (a - b).abs())
}

/// Two-memory state after controlled phase flips, polarising splitters and
/// detection of `click` on all eight modes. Memory basis order:
/// `|0,1⟩|0,1⟩, |0,1⟩|1,0⟩, |1,0⟩|0,1⟩, |1,0⟩|1,0⟩`, where `|0,1⟩` flips the
/// sign of each photon in mode 2 (memory A) or mode 8 (memory B).
pub fn spin_spin_at(p: &OracleParams, click: Modes, cutoff: u32) -> [[Complex64; 4]; 4] {
    let amps = p.amplitudes(cutoff);
    let (pair_a, pair_b) = (click[0] + click[1], click[6] + click[7]);
    // Ket amplitudes of the four memory branches, one set per Kraus outcome.
    let mut by_loss: HashMap<Modes, [f64; 4]> = HashMap::new();
    amps.for_each(|m, a| {
        if (2..6).any(|j| m[j] < click[j]) {
            return;
        }
        for n1 in 0..=pair_a.min(m[0]) {
            let n2 = pair_a - n1;
            if n2 > m[1] {
                continue;
            }
            let pbs_a = pbs_amplitude(n1, n2, click[0], click[1]);
            if pbs_a == 0.0 {
                continue;
            }
            for n7 in 0..=pair_b.min(m[6]) {
                let n8 = pair_b - n7;
                if n8 > m[7] {
                    continue;
                }
                let pbs_b = pbs_amplitude(n7, n8, click[6], click[7]);
                if pbs_b == 0.0 {
                    continue;
                }
                let n = [n1, n2, click[2], click[3], click[4], click[5], n7, n8];
                let mut lost = [0u32; 8];
                let mut w = 1.0;
                for j in 0..8 {
                    lost[j] = m[j] - n[j];
                    w *= loss_amplitude(p.eta[j], n[j], lost[j]);
                }
                if w == 0.0 {
                    continue;
                }
                let base = 0.5 * a * w * pbs_a * pbs_b;
                let flip_a = if n2 % 2 == 1 { -1.0 } else { 1.0 };
                let flip_b = if n8 % 2 == 1 { -1.0 } else { 1.0 };
                let entry = by_loss.entry(lost).or_insert([0.0; 4]);
                entry[0] += base * flip_a * flip_b;
                entry[1] += base * flip_a;
                entry[2] += base * flip_b;
                entry[3] += base;
            }
        }
    });
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for v in by_loss.values() {
        for (row, &vr) in rho.iter_mut().zip(v) {
            for (cell, &vc) in row.iter_mut().zip(v) {
                *cell += vr * vc;
            }
        }
    }
    rho
}

pub fn oracle_spin_spin(p: &OracleParams, click: Modes) -> Converged<[[Complex64; 4]; 4]> {
    converge(p, |c| spin_spin_at(p, click, c), matrix_change)
}

/// Dark-click mixture over all attributions of the clicks of `click`,
/// with `P_d^k (1−P_d)^{8−k}` weights.
pub fn oracle_spin_spin_dark(p: &OracleParams, click: Modes, pd: f64) -> Converged<[[Complex64; 4]; 4]> {
    let subsets = dark_subsets(click);
    converge(
        p,
        |c| {
            let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
            for (k, reduced) in &subsets {
                let w = pd.powi(*k as i32) * (1.0 - pd).powi(8 - *k as i32);
                let s = spin_spin_at(p, *reduced, c);
                for r in 0..4 {
                    for col in 0..4 {
                        rho[r][col] += s[r][col] * w;
                    }
                }
            }
            rho
        },
        matrix_change,
    )
}

/// Probability of the heralding pattern together with exactly one receiver
/// photon per memory pair, ideal detectors.
pub fn paired_herald_probability_at(p: &OracleParams, pattern: [u32; 4], cutoff: u32) -> f64 {
    let one_of = |ea: f64, eb: f64, a: u32, b: u32| {
        detect(ea, a, 1) * detect(eb, b, 0) + detect(ea, a, 0) * detect(eb, b, 1)
    };
    let mut total = 0.0;
    p.amplitudes(cutoff).for_each(|m, a| {
        let herald: f64 = (2..6).map(|j| detect(p.eta[j], m[j], pattern[j - 2])).product();
        total += a
            * a
            * herald
            * one_of(p.eta[0], p.eta[1], m[0], m[1])
            * one_of(p.eta[6], p.eta[7], m[6], m[7]);
    });
    total
}

pub fn oracle_paired_herald_probability(p: &OracleParams, pattern: [u32; 4]) -> Converged<f64> {
    converge(p, |c| paired_herald_probability_at(p, pattern, c), |a, b| relative_change(*a, *b))
}

/// Symmetrised second moments `⟨{x_r, x_s}⟩/2` of the lossless source in
/// `(q_1..q_8, p_1..p_8)` order, with `q = a + a†` and `p = i(a† − a)`.
pub fn second_moments_at(mean_photon: f64, transmissivity: f64, cutoff: u32) -> Vec<f64> {
    let amps = CascadeAmplitudes::new(mean_photon, transmissivity, cutoff);
    // pair[i][j] = ⟨a_i a_j⟩, hop[i][j] = ⟨a_i† a_j⟩.
    let mut pair = [[0.0f64; 8]; 8];
    let mut hop = [[0.0f64; 8]; 8];
    amps.for_each(|m, a| {
        for i in 0..8 {
            for j in 0..8 {
                if m[j] == 0 {
                    continue;
                }
                let mut lowered = *m;
                lowered[j] -= 1;
                let c_j = f64::from(m[j]).sqrt();
                if lowered[i] > 0 {
                    let mut both = lowered;
                    let c_i = f64::from(lowered[i]).sqrt();
                    both[i] -= 1;
                    pair[i][j] += a * c_j * c_i * amps.amplitude(&both);
                }
                let mut moved = lowered;
                moved[i] += 1;
                hop[i][j] += a * c_j * f64::from(moved[i]).sqrt() * amps.amplitude(&moved);
            }
        }
    });
    // x_r = u_r a + v_r a† on mode r % 8.
    let coeffs = |r: usize| -> (Complex64, Complex64) {
        if r < 8 {
            (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
        } else {
            (Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0))
        }
    };
    let product = |r: usize, s: usize| -> Complex64 {
        let (i, j) = (r % 8, s % 8);
        let (ur, vr) = coeffs(r);
        let (us, vs) = coeffs(s);
        let delta = if i == j { 1.0 } else { 0.0 };
        ur * us * pair[i][j]
            + ur * vs * (hop[j][i] + delta)
            + vr * us * hop[i][j]
            + vr * vs * pair[j][i]
    };
    let mut v = vec![0.0; 256];
    for r in 0..16 {
        for s in 0..16 {
            v[r * 16 + s] = 0.5 * (product(r, s) + product(s, r)).re;
        }
    }
    v
}

pub fn oracle_second_moments(mean_photon: f64, transmissivity: f64) -> Converged<Vec<f64>> {
    let p = OracleParams {
        transmissivity,
        ..OracleParams::lossless(mean_photon)
    };
    converge(
        &p,
        |c| second_moments_at(mean_photon, transmissivity, c),
        |a, b| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
    )
}
