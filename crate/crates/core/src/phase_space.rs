//! Real symplectic linear algebra over quadrature vectors.
//!
//! Matrices are stored in the normalisation where the vacuum covariance is
//! the identity (`q = a + a†`). Modes are numbered from 1 in the public API.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Layout of the quadrature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadOrdering {
    /// `(q_1, …, q_N, p_1, …, p_N)`
    Qqpp,
    /// `(q_1, p_1, …, q_N, p_N)`
    Qpqp,
}

impl QuadOrdering {
    /// Zero-based row of `q_mode` (mode is zero-based here).
    #[inline]
    pub fn q_index(self, _n_modes: usize, mode: usize) -> usize {
        match self {
            QuadOrdering::Qqpp => mode,
            QuadOrdering::Qpqp => 2 * mode,
        }
    }

    /// Zero-based row of `p_mode` (mode is zero-based here).
    #[inline]
    pub fn p_index(self, n_modes: usize, mode: usize) -> usize {
        match self {
            QuadOrdering::Qqpp => n_modes + mode,
            QuadOrdering::Qpqp => 2 * mode + 1,
        }
    }

    /// Symplectic form for `n_modes` modes in this ordering.
    pub fn omega(self, n_modes: usize) -> DMatrix<f64> {
        let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for k in 0..n_modes {
            let q = self.q_index(n_modes, k);
            let p = self.p_index(n_modes, k);
            omega[(q, p)] = 1.0;
            omega[(p, q)] = -1.0;
        }
        omega
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Permutation taking `from`-ordered quadrature vectors to `to` ordering.
fn reorder_matrix(n_modes: usize, from: QuadOrdering, to: QuadOrdering) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        p[(to.q_index(n_modes, k), from.q_index(n_modes, k))] = 1.0;
        p[(to.p_index(n_modes, k), from.p_index(n_modes, k))] = 1.0;
    }
    p
}

/// Second-moment matrix `V_ij = ½⟨{Δx_i, Δx_j}⟩` of a zero-mean Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    ordering: QuadOrdering,
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(ordering: QuadOrdering, entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() || !entries.nrows().is_multiple_of(2) || entries.nrows() == 0 {
            return Err(Error::Contract(format!(
                "covariance must be a non-empty 2N×2N matrix, got {}×{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numerical("covariance has non-finite entries".into()));
        }
        Ok(Self {
            ordering,
            n_modes: entries.nrows() / 2,
            entries: symmetrize(&entries),
        })
    }

    /// Vacuum state on `n_modes` modes.
    pub fn vacuum(n_modes: usize, ordering: QuadOrdering) -> Self {
        Self {
            ordering,
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn ordering(&self) -> QuadOrdering {
        self.ordering
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Entry between two quadratures addressed by 1-based mode and kind.
    pub fn get(&self, a: Quadrature, b: Quadrature) -> f64 {
        self.entries[(a.index(self.ordering, self.n_modes), b.index(self.ordering, self.n_modes))]
    }
}

/// A single quadrature of a 1-based mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Q(usize),
    P(usize),
}

impl Quadrature {
    pub fn index(self, ordering: QuadOrdering, n_modes: usize) -> usize {
        match self {
            Quadrature::Q(m) => ordering.q_index(n_modes, m - 1),
            Quadrature::P(m) => ordering.p_index(n_modes, m - 1),
        }
    }
}

/// Real symplectic matrix acting on quadrature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    ordering: QuadOrdering,
    n_modes: usize,
    entries: DMatrix<f64>,
}

impl SymplecticOp {
    pub fn identity(n_modes: usize, ordering: QuadOrdering) -> Self {
        Self {
            ordering,
            n_modes,
            entries: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn ordering(&self) -> QuadOrdering {
        self.ordering
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `max |S Ω Sᵀ − Ω|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = self.ordering.omega(self.n_modes);
        (&self.entries * &omega * self.entries.transpose() - omega).amax()
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &SymplecticOp) -> Result<SymplecticOp> {
        if self.ordering != other.ordering || self.n_modes != other.n_modes {
            return Err(Error::Contract("cannot compose symplectics of different shape".into()));
        }
        Ok(SymplecticOp {
            ordering: self.ordering,
            n_modes: self.n_modes,
            entries: &self.entries * &other.entries,
        })
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::domain("mean_photon", format!("must be finite and ≥ 0, got {mu}")));
    }
    Ok(())
}

/// Covariance of a two-mode squeezed vacuum with `mu` photons per mode.
pub fn tmsv_cov(mu: f64, ordering: QuadOrdering) -> Result<CovarianceMatrix> {
    check_mu(mu)?;
    let diag = 1.0 + 2.0 * mu;
    let corr = 2.0 * (mu * (mu + 1.0)).sqrt();
    let mut v = DMatrix::zeros(4, 4);
    for k in 0..2 {
        let q = ordering.q_index(2, k);
        let p = ordering.p_index(2, k);
        v[(q, q)] = diag;
        v[(p, p)] = diag;
    }
    let (q1, q2) = (ordering.q_index(2, 0), ordering.q_index(2, 1));
    let (p1, p2) = (ordering.p_index(2, 0), ordering.p_index(2, 1));
    v[(q1, q2)] = corr;
    v[(q2, q1)] = corr;
    v[(p1, p2)] = -corr;
    v[(p2, p1)] = -corr;
    CovarianceMatrix::new(ordering, v)
}

/// Same state expressed in `target` ordering.
pub fn reorder(cov: &CovarianceMatrix, target: QuadOrdering) -> CovarianceMatrix {
    if cov.ordering == target {
        return cov.clone();
    }
    let p = reorder_matrix(cov.n_modes, cov.ordering, target);
    CovarianceMatrix {
        ordering: target,
        n_modes: cov.n_modes,
        entries: &p * &cov.entries * p.transpose(),
    }
}

/// Mode relabelling: input mode `i` (1-based) is sent to mode `mapping[i-1]`.
pub fn mode_permutation(
    n_modes: usize,
    mapping: &[usize],
    ordering: QuadOrdering,
) -> Result<SymplecticOp> {
    if mapping.len() != n_modes {
        return Err(Error::domain("mapping", "length must equal the number of modes"));
    }
    let mut seen = vec![false; n_modes];
    for &target in mapping {
        if target == 0 || target > n_modes || seen[target - 1] {
            return Err(Error::domain("mapping", "not a bijection on 1..=N"));
        }
        seen[target - 1] = true;
    }
    let mut s = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for (src, &dst) in mapping.iter().enumerate() {
        let dst = dst - 1;
        s[(ordering.q_index(n_modes, dst), ordering.q_index(n_modes, src))] = 1.0;
        s[(ordering.p_index(n_modes, dst), ordering.p_index(n_modes, src))] = 1.0;
    }
    Ok(SymplecticOp {
        ordering,
        n_modes,
        entries: s,
    })
}

/// Beam splitter of transmissivity `t` between 1-based modes `i` and `j`.
pub fn beamsplitter_symplectic(
    n_modes: usize,
    i: usize,
    j: usize,
    t: f64,
    ordering: QuadOrdering,
) -> Result<SymplecticOp> {
    if i == j || i == 0 || j == 0 || i > n_modes || j > n_modes {
        return Err(Error::domain("modes", format!("invalid beam-splitter modes ({i}, {j})")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain("transmissivity", format!("must lie in [0, 1], got {t}")));
    }
    let (c, s) = (t.sqrt(), (1.0 - t).sqrt());
    let mut m = DMatrix::identity(2 * n_modes, 2 * n_modes);
    let pairs = [
        (ordering.q_index(n_modes, i - 1), ordering.q_index(n_modes, j - 1)),
        (ordering.p_index(n_modes, i - 1), ordering.p_index(n_modes, j - 1)),
    ];
    for (a, b) in pairs {
        m[(a, a)] = c;
        m[(a, b)] = s;
        m[(b, a)] = -s;
        m[(b, b)] = c;
    }
    Ok(SymplecticOp {
        ordering,
        n_modes,
        entries: m,
    })
}

/// `S V Sᵀ`.
pub fn apply_symplectic(s: &SymplecticOp, cov: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if s.ordering != cov.ordering || s.n_modes != cov.n_modes {
        return Err(Error::Contract(format!(
            "symplectic ({:?}, {} modes) does not match covariance ({:?}, {} modes)",
            s.ordering, s.n_modes, cov.ordering, cov.n_modes
        )));
    }
    let v = &s.entries * &cov.entries * s.entries.transpose();
    Ok(CovarianceMatrix {
        ordering: cov.ordering,
        n_modes: cov.n_modes,
        entries: symmetrize(&v),
    })
}

/// Covariance of the product state `a ⊗ b`; modes of `b` follow those of `a`.
pub fn direct_sum(a: &CovarianceMatrix, b: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    if a.ordering != b.ordering {
        return Err(Error::Contract("direct sum of covariances with different orderings".into()));
    }
    let ordering = a.ordering;
    let n = a.n_modes + b.n_modes;
    let mut v = DMatrix::zeros(2 * n, 2 * n);
    for (part, offset) in [(a, 0usize), (b, a.n_modes)] {
        for x in 0..part.n_modes {
            for y in 0..part.n_modes {
                for (kx, ky) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    let src_r = if kx == 0 {
                        ordering.q_index(part.n_modes, x)
                    } else {
                        ordering.p_index(part.n_modes, x)
                    };
                    let src_c = if ky == 0 {
                        ordering.q_index(part.n_modes, y)
                    } else {
                        ordering.p_index(part.n_modes, y)
                    };
                    let dst_r = if kx == 0 {
                        ordering.q_index(n, x + offset)
                    } else {
                        ordering.p_index(n, x + offset)
                    };
                    let dst_c = if ky == 0 {
                        ordering.q_index(n, y + offset)
                    } else {
                        ordering.p_index(n, y + offset)
                    };
                    v[(dst_r, dst_c)] = part.entries[(src_r, src_c)];
                }
            }
        }
    }
    CovarianceMatrix::new(ordering, v)
}
