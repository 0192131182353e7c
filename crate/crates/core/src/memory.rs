//! Loading the heralded photon pair into two dual-rail memories: controlled
//! phase flips, polarising-beam-splitter interference and detection on the
//! receiver modes.

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{herald_request, SourceModel};
use crate::moments::{LinearForm, N_MODES};
use crate::source::{HeraldPattern, SourceParams};

/// Receiver mode pairs read out by memory A and memory B.
pub const MEMORY_PAIRS: [(usize, usize); 2] = [(1, 2), (7, 8)];

/// Dark-click patterns of the base pattern `(1,0,1,1,0,0,1,0)`, grouped by
/// the number of clicks attributed to dark counts (1, 2, 3, 4).
pub const BASE_DARK_PATTERNS: [[u32; 8]; 15] = [
    [0, 0, 1, 1, 0, 0, 1, 0],
    [1, 0, 0, 1, 0, 0, 1, 0],
    [1, 0, 1, 0, 0, 0, 1, 0],
    [1, 0, 1, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 1, 0],
    [0, 0, 1, 0, 0, 0, 1, 0],
    [0, 0, 1, 1, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 1, 0],
    [1, 0, 0, 1, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 0, 0, 0, 0, 0],
];

/// Photon counts on all eight modes after memory loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[u32; 8]", into = "[u32; 8]")]
pub struct ClickPattern([u32; N_MODES]);

impl ClickPattern {
    pub fn new(counts: [u32; N_MODES]) -> Result<Self> {
        for (i, j) in MEMORY_PAIRS {
            for m in [i, j] {
                if counts[m - 1] > 1 {
                    return Err(Error::domain(
                        "click_pattern",
                        format!("receiver mode {m} supports 0 or 1 clicks, got {}", counts[m - 1]),
                    ));
                }
            }
        }
        HeraldPattern::new([counts[2], counts[3], counts[4], counts[5]])
            .map_err(|_| Error::domain("click_pattern", "too many heralding clicks"))?;
        Ok(Self(counts))
    }

    pub fn counts(&self) -> [u32; N_MODES] {
        self.0
    }

    pub fn herald(&self) -> HeraldPattern {
        HeraldPattern::new([self.0[2], self.0[3], self.0[4], self.0[5]])
            .expect("validated on construction")
    }

    /// Patterns reachable by attributing a subset of this pattern's clicks
    /// to dark counts, with the size of that subset, in subset-size order.
    pub fn dark_reductions(&self) -> Vec<(usize, ClickPattern)> {
        let clicked: Vec<usize> = (0..N_MODES).filter(|&k| self.0[k] > 0).collect();
        let mut out: Vec<(usize, ClickPattern)> = (1u32..(1 << clicked.len()))
            .map(|subset| {
                let mut reduced = self.0;
                for (bit, &k) in clicked.iter().enumerate() {
                    if subset & (1 << bit) != 0 {
                        reduced[k] = 0;
                    }
                }
                (subset.count_ones() as usize, ClickPattern(reduced))
            })
            .collect();
        out.sort_by_key(|(n, _)| *n);
        out
    }
}

impl Default for ClickPattern {
    fn default() -> Self {
        Self([1, 0, 1, 1, 0, 0, 1, 0])
    }
}

impl TryFrom<[u32; 8]> for ClickPattern {
    type Error = Error;
    fn try_from(value: [u32; 8]) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ClickPattern> for [u32; 8] {
    fn from(p: ClickPattern) -> Self {
        p.0
    }
}

/// State of one dual-rail memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemoryBranch {
    /// `|0,1⟩`: the controlled phase flips the coupled receiver mode.
    ZeroOne,
    /// `|1,0⟩`: no phase flip.
    OneZero,
}

impl MemoryBranch {
    /// Branches in basis order.
    pub const ALL: [MemoryBranch; 2] = [MemoryBranch::ZeroOne, MemoryBranch::OneZero];

    fn phase(self) -> f64 {
        match self {
            MemoryBranch::ZeroOne => -1.0,
            MemoryBranch::OneZero => 1.0,
        }
    }
}

/// Receiver-side linear forms for one memory branch pair, on the ket side.
///
/// A click on the first mode of a pair picks `(a_i√η_i + s·a_j√η_j)/√2`, a click on the
/// second mode `(a_i√η_i − s·a_j√η_j)/√2`, with `s = −1` when the memory
/// flips mode `j`. `bra` selects `β*` variables instead of `α`.
pub fn branch_forms(
    branches: [MemoryBranch; 2],
    click: &ClickPattern,
    eta: &[f64; N_MODES],
    bra: bool,
) -> Vec<LinearForm> {
    let var = |mode| {
        if bra {
            LinearForm::beta_conj(mode)
        } else {
            LinearForm::alpha(mode)
        }
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut forms = Vec::new();
    for ((i, j), branch) in MEMORY_PAIRS.into_iter().zip(branches) {
        let s = branch.phase();
        let a = var(i).scaled(Complex64::new(h * eta[i - 1].sqrt(), 0.0));
        let b = var(j).scaled(Complex64::new(h * eta[j - 1].sqrt(), 0.0));
        if click.0[i - 1] == 1 {
            forms.push(a.plus(&b.scaled(Complex64::new(s, 0.0))));
        }
        if click.0[j - 1] == 1 {
            forms.push(a.plus(&b.scaled(Complex64::new(-s, 0.0))));
        }
    }
    forms
}

/// Unnormalised two-memory state over the basis
/// `(|0,1⟩|0,1⟩, |0,1⟩|1,0⟩, |1,0⟩|0,1⟩, |1,0⟩|1,0⟩)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinSpinDM {
    pub entries: Matrix4<Complex64>,
}

impl SpinSpinDM {
    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (self.entries - self.entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let herm = (self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        [ev[0], ev[1], ev[2], ev[3]]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    fn scaled_add(&mut self, w: f64, other: &SpinSpinDM) {
        self.entries += other.entries * Complex64::new(w, 0.0);
    }
}

/// Memory-loaded state for `click`, with ideal receiver detectors.
pub fn spin_spin_dm(params: &SourceParams, click: &ClickPattern) -> Result<SpinSpinDM> {
    spin_spin_dm_from(&SourceModel::new(*params)?, click)
}

pub fn spin_spin_dm_from(model: &SourceModel, click: &ClickPattern) -> Result<SpinSpinDM> {
    let eta = model.params().eta_vector();
    let herald = herald_request(click.herald(), &eta);
    let a = model.a_detected()?;
    let prefactor = model.prefactor(a) * 0.25;
    let basis: Vec<[MemoryBranch; 2]> = MemoryBranch::ALL
        .iter()
        .flat_map(|&x| MemoryBranch::ALL.iter().map(move |&y| [x, y]))
        .collect();
    let mut entries = Matrix4::<Complex64>::zeros();
    for (r, ket) in basis.iter().enumerate() {
        for (c, bra) in basis.iter().enumerate() {
            let mut req = herald.clone();
            for f in branch_forms(*ket, click, &eta, false) {
                req.push(f, 1);
            }
            for f in branch_forms(*bra, click, &eta, true) {
                req.push(f, 1);
            }
            entries[(r, c)] = prefactor * crate::moments::wick_moment(a, &req)?;
        }
    }
    Ok(SpinSpinDM { entries })
}

/// Memory-loaded state for the base pattern with dark clicks on any of the
/// eight detectors.
pub fn spin_spin_dm_dark(params: &SourceParams) -> Result<SpinSpinDM> {
    let model = SourceModel::new(*params)?;
    let pd = params.dark_click_prob;
    let mut dm = spin_spin_dm_from(&model, &ClickPattern::default())?;
    dm.entries *= Complex64::new((1.0 - pd).powi(8), 0.0);
    if pd == 0.0 {
        return Ok(dm);
    }
    const GROUP_SIZES: [usize; 4] = [4, 6, 4, 1];
    let mut it = BASE_DARK_PATTERNS.iter();
    for (k, size) in GROUP_SIZES.iter().enumerate() {
        let n_dark = k as i32 + 1;
        let w = pd.powi(n_dark) * (1.0 - pd).powi(8 - n_dark);
        for pattern in it.by_ref().take(*size) {
            let sigma = spin_spin_dm_from(&model, &ClickPattern::new(*pattern)?)?;
            dm.scaled_add(w, &sigma);
        }
    }
    Ok(dm)
}

/// Memory-loaded state for any click pattern, mixing in every way of
/// explaining a subset of its clicks by dark counts on the eight detectors.
pub fn spin_spin_dm_with_dark(params: &SourceParams, click: &ClickPattern) -> Result<SpinSpinDM> {
    spin_spin_dm_mixture(&SourceModel::new(*params)?, click)
}

pub fn spin_spin_dm_mixture(model: &SourceModel, click: &ClickPattern) -> Result<SpinSpinDM> {
    let pd = model.params().dark_click_prob;
    let mut dm = spin_spin_dm_from(model, click)?;
    dm.entries *= Complex64::new((1.0 - pd).powi(8), 0.0);
    if pd == 0.0 {
        return Ok(dm);
    }
    for (n_dark, reduced) in click.dark_reductions() {
        let n_dark = n_dark as i32;
        let w = pd.powi(n_dark) * (1.0 - pd).powi(8 - n_dark);
        dm.scaled_add(w, &spin_spin_dm_from(model, &reduced)?);
    }
    Ok(dm)
}

/// Two-memory Bell states in the logical labelling `|1,0⟩ = 0`, `|0,1⟩ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellLabel {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [
        BellLabel::PhiPlus,
        BellLabel::PhiMinus,
        BellLabel::PsiPlus,
        BellLabel::PsiMinus,
    ];

    /// Coefficients over the memory basis.
    pub fn vector(self) -> [f64; 4] {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellLabel::PhiPlus => [h, 0.0, 0.0, h],
            BellLabel::PhiMinus => [-h, 0.0, 0.0, h],
            BellLabel::PsiPlus => [0.0, h, h, 0.0],
            BellLabel::PsiMinus => [0.0, -h, h, 0.0],
        }
    }
}

/// `⟨target|ρ|target⟩ / Tr ρ`.
pub fn bell_fidelity_spin(dm: &SpinSpinDM, target: BellLabel) -> Result<f64> {
    let tr = dm.trace();
    if tr <= 0.0 {
        return Err(Error::UndefinedFidelity);
    }
    let v = target.vector();
    let mut acc = Complex64::new(0.0, 0.0);
    for r in 0..4 {
        for c in 0..4 {
            acc += dm.entries[(r, c)] * v[r] * v[c];
        }
    }
    Ok(acc.re / tr)
}

/// Probability of the receiver-side click pattern alone, summed over memory
/// branches; used to cross-check against photonic quantities.
pub fn click_probability(model: &SourceModel, click: &ClickPattern) -> Result<f64> {
    Ok(spin_spin_dm_from(model, click)?.trace())
}
