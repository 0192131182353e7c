//! Scalar Fock-space amplitudes.

pub fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * f64::from(n - i) / f64::from(i + 1))
}

/// Schmidt coefficient `√(N^n / (1+N)^{n+1})` of a two-mode squeezed vacuum
/// with mean photon number `N` per mode.
pub fn tmsv_coefficient(mean_photon: f64, n: u32) -> f64 {
    let x = mean_photon / (1.0 + mean_photon);
    (x.powi(n as i32) / (1.0 + mean_photon)).sqrt()
}

/// `⟨p,q|U|a,b⟩` for the splitter `a_i† → √t a_i† − √(1−t) a_j†`,
/// `a_j† → √(1−t) a_i† + √t a_j†`.
pub fn beamsplitter_amplitude(t: f64, a: u32, b: u32, p: u32, q: u32) -> f64 {
    if a + b != p + q {
        return 0.0;
    }
    let st = t.sqrt();
    let r = (1.0 - t).sqrt();
    let mut sum = 0.0;
    // k photons of the first input leave through output i.
    for k in 0..=a.min(p) {
        let from_b = p - k;
        if from_b > b {
            continue;
        }
        sum += binomial(a, k)
            * st.powi(k as i32)
            * (-r).powi((a - k) as i32)
            * binomial(b, from_b)
            * r.powi(from_b as i32)
            * st.powi((b - from_b) as i32);
    }
    sum * (factorial(p) * factorial(q) / (factorial(a) * factorial(b))).sqrt()
}

/// `⟨c_1,c_2|U|n_1,n_2⟩` for the polarising splitter `a† → (a†+b†)/√2`,
/// `b† → (a†−b†)/√2`.
pub fn pbs_amplitude(n1: u32, n2: u32, c1: u32, c2: u32) -> f64 {
    if n1 + n2 != c1 + c2 {
        return 0.0;
    }
    let mut sum = 0.0;
    // k photons of the first input and l of the second end up in output b.
    for k in 0..=n1.min(c2) {
        let l = c2 - k;
        if l > n2 {
            continue;
        }
        let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += binomial(n1, k) * binomial(n2, l) * sign;
    }
    sum * (factorial(c1) * factorial(c2) / (factorial(n1) * factorial(n2))).sqrt()
        / 2f64.sqrt().powi((n1 + n2) as i32)
}

/// Amplitude `⟨n|Â_k|n+k⟩` of the loss Kraus operator that removes `k`
/// photons: `√(C(n+k, k) η^n (1−η)^k)`.
pub fn loss_amplitude(eta: f64, n: u32, k: u32) -> f64 {
    (binomial(n + k, k) * eta.powi(n as i32) * (1.0 - eta).powi(k as i32)).sqrt()
}
