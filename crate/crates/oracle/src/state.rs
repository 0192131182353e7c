//! Sparse truncated Fock-space states, as a weighted ensemble of pure branches.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::fock::{beamsplitter_amplitude, loss_amplitude, tmsv_coefficient};

/// Largest number of modes a state may carry.
pub const MAX_MODES: usize = 8;
/// Norm deficit above which a state is reported as under-resolved.
pub const DEFICIT_WARNING: f64 = 1e-3;

/// Photon numbers of all modes (0-based slots; unused slots stay 0).
pub type Occupation = [u8; MAX_MODES];

/// One unnormalised pure branch.
pub type Branch = HashMap<Occupation, Complex64>;

/// Ensemble of unnormalised pure branches; the density matrix is
/// `Σ_b |ψ_b⟩⟨ψ_b|`.
#[derive(Debug, Clone)]
pub struct TruncatedState {
    pub n_modes: usize,
    pub cutoff: u32,
    pub branches: Vec<Branch>,
    pub norm_deficit: f64,
}

impl TruncatedState {
    pub fn vacuum(n_modes: usize, cutoff: u32) -> Self {
        assert!(n_modes <= MAX_MODES);
        let mut b = Branch::new();
        b.insert([0; MAX_MODES], Complex64::new(1.0, 0.0));
        Self {
            n_modes,
            cutoff,
            branches: vec![b],
            norm_deficit: 0.0,
        }
    }

    /// Product of two-mode squeezed vacua on the given 1-based mode pairs,
    /// each truncated at `cutoff` photons per mode.
    pub fn squeezed_pairs(n_modes: usize, pairs: &[(usize, usize)], mu: f64, cutoff: u32) -> Self {
        let mut state = Self::vacuum(n_modes, cutoff);
        for &(s, i) in pairs {
            let mut next = Branch::new();
            for (occ, amp) in &state.branches[0] {
                for n in 0..=cutoff {
                    let c = tmsv_coefficient(mu, n);
                    if c == 0.0 {
                        continue;
                    }
                    let mut o = *occ;
                    o[s - 1] += n as u8;
                    o[i - 1] += n as u8;
                    *next.entry(o).or_default() += amp * c;
                }
            }
            state.branches[0] = next;
        }
        state.norm_deficit = (1.0 - state.total_weight()).max(0.0);
        state
    }

    pub fn total_weight(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.values())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn under_resolved(&self) -> bool {
        self.norm_deficit > DEFICIT_WARNING
    }

    /// Beam splitter between 1-based modes `i` and `j`.
    pub fn apply_beamsplitter(&self, i: usize, j: usize, t: f64) -> Self {
        let branches = self
            .branches
            .iter()
            .map(|branch| {
                let mut out = Branch::new();
                for (occ, amp) in branch {
                    let (a, b) = (occ[i - 1] as u32, occ[j - 1] as u32);
                    for p in 0..=a + b {
                        let u = beamsplitter_amplitude(t, a, b, p, a + b - p);
                        if u == 0.0 {
                            continue;
                        }
                        let mut o = *occ;
                        o[i - 1] = p as u8;
                        o[j - 1] = (a + b - p) as u8;
                        *out.entry(o).or_default() += amp * u;
                    }
                }
                out.retain(|_, v| v.norm_sqr() > 0.0);
                out
            })
            .collect();
        Self {
            branches,
            ..self.clone()
        }
    }

    /// Kraus loss on 1-based `mode`: every branch splits by the number of
    /// photons lost.
    pub fn apply_loss(&self, mode: usize, eta: f64) -> Self {
        let mut branches = Vec::new();
        for branch in &self.branches {
            let mut by_lost: HashMap<u32, Branch> = HashMap::new();
            for (occ, amp) in branch {
                let m = occ[mode - 1] as u32;
                for k in 0..=m {
                    let f = loss_amplitude(eta, m - k, k);
                    if f == 0.0 {
                        continue;
                    }
                    let mut o = *occ;
                    o[mode - 1] = (m - k) as u8;
                    *by_lost.entry(k).or_default().entry(o).or_default() += amp * f;
                }
            }
            let mut ks: Vec<u32> = by_lost.keys().copied().collect();
            ks.sort_unstable();
            branches.extend(ks.into_iter().map(|k| by_lost.remove(&k).unwrap()));
        }
        Self {
            branches,
            ..self.clone()
        }
    }

    /// `Σ_b Σ_{occ: keep(occ)} |ψ_b(occ)|²`.
    pub fn probability(&self, keep: impl Fn(&Occupation) -> bool) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.iter())
            .filter(|(o, _)| keep(o))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Four squeezers with the idlers swapped inside each source, followed by
/// the two Bell-measurement splitters on modes (3,5) and (4,6).
pub fn oracle_build_cascaded(mu: f64, t: f64, cutoff: u32) -> TruncatedState {
    TruncatedState::squeezed_pairs(8, &SQUEEZER_PAIRS, mu, cutoff)
        .apply_beamsplitter(3, 5, t)
        .apply_beamsplitter(4, 6, t)
}

/// Mode pairs `(signal, idler)` of the four squeezers after the idler swaps.
pub const SQUEEZER_PAIRS: [(usize, usize); 4] = [(1, 4), (3, 2), (5, 8), (7, 6)];

pub fn oracle_apply_loss(state: &TruncatedState, mode: usize, eta: f64) -> TruncatedState {
    state.apply_loss(mode, eta)
}
