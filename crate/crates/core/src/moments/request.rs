use num_complex::Complex64;

/// Number of real integration variables: `(q_α, p_α, q_β, p_β)` × 8 modes.
pub const N_VARS: usize = 32;
/// Optical modes of the cascaded source.
pub const N_MODES: usize = 8;
/// Practical cap on the number of forms in a single moment.
pub const MAX_FORMS: usize = 16;

/// Index of `q_α` for 1-based `mode`.
pub fn q_alpha(mode: usize) -> usize {
    mode - 1
}
/// Index of `p_α` for 1-based `mode`.
pub fn p_alpha(mode: usize) -> usize {
    N_MODES + mode - 1
}
/// Index of `q_β` for 1-based `mode`.
pub fn q_beta(mode: usize) -> usize {
    2 * N_MODES + mode - 1
}
/// Index of `p_β` for 1-based `mode`.
pub fn p_beta(mode: usize) -> usize {
    3 * N_MODES + mode - 1
}

/// Complex linear combination of the 32 quadrature variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearForm {
    coeffs: [Complex64; N_VARS],
}

impl LinearForm {
    pub fn zero() -> Self {
        Self {
            coeffs: [Complex64::new(0.0, 0.0); N_VARS],
        }
    }

    pub fn unit(var: usize) -> Self {
        let mut f = Self::zero();
        f.coeffs[var] = Complex64::new(1.0, 0.0);
        f
    }

    /// `α_j = (q_αj + i p_αj)/√2`.
    pub fn alpha(mode: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut f = Self::zero();
        f.coeffs[q_alpha(mode)] = Complex64::new(h, 0.0);
        f.coeffs[p_alpha(mode)] = Complex64::new(0.0, h);
        f
    }

    /// `β_j* = (q_βj − i p_βj)/√2`.
    pub fn beta_conj(mode: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut f = Self::zero();
        f.coeffs[q_beta(mode)] = Complex64::new(h, 0.0);
        f.coeffs[p_beta(mode)] = Complex64::new(0.0, -h);
        f
    }

    pub fn coeffs(&self) -> &[Complex64; N_VARS] {
        &self.coeffs
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }

    pub fn plus(mut self, other: &LinearForm) -> Self {
        self.coeffs
            .iter_mut()
            .zip(other.coeffs.iter())
            .for_each(|(a, b)| *a += b);
        self
    }
}

/// Monomial of linear forms with a scalar prefactor, to be integrated
/// against a normalised Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentRequest {
    pub forms: Vec<LinearForm>,
    pub scalar_prefactor: Complex64,
}

impl Default for MomentRequest {
    fn default() -> Self {
        Self::new()
    }
}

impl MomentRequest {
    pub fn new() -> Self {
        Self {
            forms: Vec::new(),
            scalar_prefactor: Complex64::new(1.0, 0.0),
        }
    }

    pub fn with_prefactor(mut self, s: Complex64) -> Self {
        self.scalar_prefactor *= s;
        self
    }

    pub fn push(&mut self, form: LinearForm, times: u32) -> &mut Self {
        for _ in 0..times {
            self.forms.push(form);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }
}
