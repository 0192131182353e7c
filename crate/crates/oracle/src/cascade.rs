//! Closed-form amplitudes of the truncated cascaded source.
//!
//! The receiver modes keep the photon numbers of the four squeezers
//! (`n_1 = N_A`, `n_2 = N_B`, `n_8 = N_C`, `n_7 = N_D`), so every output
//! occupation comes from exactly one squeezer tuple and the amplitude
//! factorises into squeezer coefficients and two splitter amplitudes.

use crate::fock::{beamsplitter_amplitude, tmsv_coefficient};

/// Photon numbers of the eight modes, 0-based slots.
pub type Modes = [u32; 8];

#[derive(Debug, Clone)]
pub struct CascadeAmplitudes {
    pub mean_photon: f64,
    pub transmissivity: f64,
    /// Largest photon number kept per squeezer.
    pub cutoff: u32,
    coeff: Vec<f64>,
    /// Splitter amplitudes indexed by `(a, b, p)`.
    splitter: Vec<f64>,
}

impl CascadeAmplitudes {
    pub fn new(mean_photon: f64, transmissivity: f64, cutoff: u32) -> Self {
        let coeff = (0..=cutoff).map(|n| tmsv_coefficient(mean_photon, n)).collect();
        let side = cutoff as usize + 1;
        let outs = 2 * cutoff as usize + 1;
        let mut splitter = vec![0.0; side * side * outs];
        for a in 0..=cutoff {
            for b in 0..=cutoff {
                for p in 0..=a + b {
                    splitter[(a as usize * side + b as usize) * outs + p as usize] =
                        beamsplitter_amplitude(transmissivity, a, b, p, a + b - p);
                }
            }
        }
        Self {
            mean_photon,
            transmissivity,
            cutoff,
            coeff,
            splitter,
        }
    }

    fn split(&self, a: u32, b: u32, p: u32) -> f64 {
        let side = self.cutoff as usize + 1;
        let outs = 2 * self.cutoff as usize + 1;
        self.splitter[(a as usize * side + b as usize) * outs + p as usize]
    }

    /// `⟨m|ψ⟩`, zero outside the truncated support.
    pub fn amplitude(&self, m: &Modes) -> f64 {
        let (na, nb, nc, nd) = (m[0], m[1], m[7], m[6]);
        if na.max(nb).max(nc).max(nd) > self.cutoff {
            return 0.0;
        }
        if m[2] + m[4] != nb + nc || m[3] + m[5] != na + nd {
            return 0.0;
        }
        self.coeff[na as usize]
            * self.coeff[nb as usize]
            * self.coeff[nc as usize]
            * self.coeff[nd as usize]
            * self.split(nb, nc, m[2])
            * self.split(na, nd, m[3])
    }

    /// Visit every occupation in the support with its amplitude.
    pub fn for_each(&self, mut f: impl FnMut(&Modes, f64)) {
        let c = self.cutoff;
        for na in 0..=c {
            for nb in 0..=c {
                for nc in 0..=c {
                    for nd in 0..=c {
                        for m3 in 0..=nb + nc {
                            for m4 in 0..=na + nd {
                                let m = [na, nb, m3, m4, nb + nc - m3, na + nd - m4, nd, nc];
                                let a = self.amplitude(&m);
                                if a != 0.0 {
                                    f(&m, a);
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    /// `1 − Σ|ψ|²`.
    pub fn norm_deficit(&self) -> f64 {
        let kept: f64 = self.coeff.iter().map(|c| c * c).sum();
        1.0 - kept.powi(4)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::oracle_build_cascaded;

    #[test]
    fn matches_materialised_state() {
        for (mu, t) in [(0.1, 0.5), (0.3, 0.2)] {
            let closed = CascadeAmplitudes::new(mu, t, 3);
            let state = oracle_build_cascaded(mu, t, 3);
            let mut count = 0;
            closed.for_each(|m, a| {
                count += 1;
                let occ: [u8; 8] = m.map(|x| x as u8);
                let b = state.branches[0].get(&occ).map_or(0.0, |z| z.re);
                assert!((a - b).abs() < 1e-14, "{m:?}");
            });
            assert_eq!(count, state.branches[0].len());
            let weight: f64 = state.total_weight();
            let gap = 1.0 - weight - closed.norm_deficit();
            assert!(gap.abs() < 1e-13, "{gap}");
        }
    }
}
