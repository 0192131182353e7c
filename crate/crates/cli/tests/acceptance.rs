//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;
use zalmtwin_cli::sweep::{run_sweep, Scale, SweepConfig, SweepMetric, SweptParameter};
use zalmtwin_cli::validate::{compare, oracle_grid};
use zalmtwin_core::memory::{spin_spin_dm, spin_spin_dm_dark, ClickPattern};
use zalmtwin_core::metrics::{self, BellTarget, SourceModel};
use zalmtwin_core::moments::hafnian;
use zalmtwin_core::phase_space::{
    beamsplitter_symplectic, mode_permutation, tmsv_cov, QuadOrdering, SymplecticOp,
};
use zalmtwin_core::source::{build_cascaded_cov, build_spdc_cov, HeraldPattern, SourceParams};
use zalmtwin_service::{router, AppState, MetricsRequest, MetricsResponse};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn params(mu: f64, eta_b: f64, eta_t: f64, eta_d: f64) -> SourceParams {
    SourceParams {
        mean_photon: mu,
        bsm_efficiency: eta_b,
        outcoupling_efficiency: eta_t,
        detection_efficiency: eta_d,
        ..SourceParams::default()
    }
}

fn imag_ratio(z: Complex64) -> f64 {
    if z.im == 0.0 {
        0.0
    } else {
        z.im.abs() / z.re.abs()
    }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let (mut pgen, mut fid, mut dm) = (0.0f64, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for point in oracle_grid() {
        match compare(point) {
            Ok(c) => {
                pgen = pgen.max(c.pgen_rel);
                fid = fid.max(c.fidelity_abs);
                dm = dm.max(c.spin_dm_abs);
                if !c.passed() {
                    failures.push(point.label());
                }
            }
            Err(e) => failures.push(format!("{}: {e}", point.label())),
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "12 points, max pgen rel {pgen:.2e} (<1e-5), fidelity abs {fid:.2e} (<1e-5), spin dm abs {dm:.2e} (<1e-6){}",
            if failures.is_empty() { String::new() } else { format!(", failing: {failures:?}") }
        ),
    )
}

fn trace_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let p = params(
            rng.random_range(0.0..=5.0),
            rng.random_range(0.2..=1.0),
            rng.random_range(0.2..=1.0),
            rng.random_range(0.2..=1.0),
        );
        let t = metrics::photonic_trace(&p).expect("valid parameters");
        worst = worst.max((t.value - 1.0).abs()).max(t.imag_residual);
    }
    outcome(worst < 1e-9, format!("50 random points, max |trace - 1| {worst:.2e} (<1e-9)"))
}

fn peak_sweep(eta_b: f64) -> SweepConfig {
    let mut base = MetricsRequest::new(0.1);
    base.bsm_efficiency = eta_b;
    SweepConfig {
        parameter: SweptParameter::MeanPhoton,
        from: 1e-4,
        to: 20.0,
        steps: 200,
        scale: Scale::Log,
        base,
        metrics: vec![SweepMetric::Pgen],
        timing: false,
    }
}

const PEAK_LOSSES: [f64; 3] = [0.0, 3.0, 6.0];

fn peak_shift() -> Outcome {
    let mut peaks = Vec::new();
    for db in PEAK_LOSSES {
        let config = peak_sweep(10f64.powf(-db / 10.0));
        let rows = run_sweep(&config).expect("valid sweep");
        let k = zalmtwin_cli::sweep::argmax(&rows, 0).expect("finite pgen");
        peaks.push((rows[k].value, rows[k].cells[0].unwrap()));
    }
    let increasing = peaks.windows(2).all(|w| w[0].0 < w[1].0);
    let shown: Vec<String> = peaks
        .iter()
        .zip(PEAK_LOSSES)
        .map(|((mu, p), db)| format!("{db} dB: mu*={mu:.4} pgen={p:.4}"))
        .collect();
    outcome(increasing, format!("argmax strictly increasing with loss: {}", shown.join(", ")))
}

fn small_mu_slope() -> Outcome {
    let n = 21;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for k in 0..n {
        let mu = 10f64.powf(-4.0 + k as f64 / (n - 1) as f64);
        xs.push(mu.ln());
        ys.push(metrics::pgen(&SourceParams::with_mean_photon(mu)).unwrap().value.ln());
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    outcome((slope - 2.0).abs() < 0.05, format!("log-log slope {slope:.5} (2 +/- 0.05)"))
}

/// Every perfect matching of `0..n`, written out as explicit pair lists.
fn matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().copied().filter(|&x| x != items[k]).collect();
        for mut m in matchings(&rest) {
            m.insert(0, (first, items[k]));
            out.push(m);
        }
    }
    out
}

fn hafnian_suite() -> Outcome {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let mut notes = Vec::new();
    let empty = hafnian(&DMatrix::<Complex64>::zeros(0, 0)).unwrap();
    let mut ok = empty == c(1.0, 0.0);
    notes.push(format!("n=0 -> {empty}"));

    let two = DMatrix::from_row_slice(2, 2, &[c(5.0, 0.0), c(2.0, -1.0), c(2.0, -1.0), c(7.0, 0.0)]);
    ok &= hafnian(&two).unwrap() == c(2.0, -1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut small_int = || c(rng.random_range(-4..=4) as f64, rng.random_range(-4..=4) as f64);
    let mut sym = |n: usize| {
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = small_int();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        m
    };
    let four = sym(4);
    let pmp4 = four[(0, 1)] * four[(2, 3)] + four[(0, 2)] * four[(1, 3)] + four[(0, 3)] * four[(1, 2)];
    ok &= hafnian(&four).unwrap() == pmp4;

    let mut six_ok = true;
    for _ in 0..5 {
        let six = sym(6);
        let pairings = matchings(&[0, 1, 2, 3, 4, 5]);
        six_ok &= pairings.len() == 15;
        let brute: Complex64 = pairings
            .iter()
            .map(|m| m.iter().map(|&(i, j)| six[(i, j)]).product::<Complex64>())
            .sum();
        six_ok &= hafnian(&six).unwrap() == brute;
    }
    ok &= six_ok;
    notes.push(format!("2x2 off-diagonal, 4x4 three-term sum, 6x6 vs 15 explicit pairings: exact={six_ok}"));
    outcome(ok, notes.join("; "))
}

fn dark_reductions() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for mu in [0.01, 0.1, 0.7] {
        let p = params(mu, 0.8, 0.9, 0.95);
        let model = SourceModel::new(p).unwrap();
        let plain = model.pgen().unwrap();
        let dark = model.pgen_with_dark().unwrap();
        ok &= plain.value.to_bits() == dark.value.to_bits();
        let click = ClickPattern::default();
        ok &= spin_spin_dm(&p, &click).unwrap().entries == spin_spin_dm_dark(&p).unwrap().entries;
    }
    notes.push("P_d=0 reductions bit-identical".to_owned());
    let mut worst = 0.0f64;
    for pd in [1e-6, 1e-3, 0.05, 0.3] {
        let p = SourceParams {
            dark_click_prob: pd,
            ..params(0.0, 0.7, 0.8, 0.9)
        };
        let v = SourceModel::new(p).unwrap().pgen_with_dark().unwrap().value;
        // Only the all-dark term survives in vacuum: P_d^2 for two clicked detectors.
        worst = worst.max((v - pd * pd).abs() / (pd * pd));
    }
    ok &= worst < 1e-12;
    notes.push(format!("vacuum limit vs P_d^2, max rel error {worst:.1e}"));
    outcome(ok, notes.join("; "))
}

fn max_dev(a: &Matrix4<Complex64>, b: &Matrix4<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn spin_structure() -> Outcome {
    let base = ClickPattern::default();
    let flipped = ClickPattern::new([0, 1, 1, 1, 0, 0, 1, 0]).unwrap();
    let z_a = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, -1.0, -1.0)).map(|x| Complex64::new(x, 0.0));
    let x_a = Matrix4::new(0., 0., 1., 0., 0., 0., 0., 1., 1., 0., 0., 0., 0., 1., 0., 0.).map(|x| Complex64::new(x, 0.0));
    let (mut herm, mut min_eig, mut tr_lo, mut tr_hi) = (0.0f64, f64::INFINITY, f64::INFINITY, 0.0f64);
    let (mut z_gap, mut x_gap) = (0.0f64, 0.0f64);
    for point in oracle_grid() {
        let p = point.params();
        for click in [base, flipped] {
            let dm = spin_spin_dm(&p, &click).unwrap();
            herm = herm.max(dm.hermiticity_defect());
            min_eig = min_eig.min(dm.min_eigenvalue());
            tr_lo = tr_lo.min(dm.trace());
            tr_hi = tr_hi.max(dm.trace());
        }
        let a = spin_spin_dm(&p, &base).unwrap().entries;
        let b = spin_spin_dm(&p, &flipped).unwrap().entries;
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        z_gap = z_gap.max(max_dev(&(z_a * a * z_a), &b) / scale);
        x_gap = x_gap.max(max_dev(&(x_a * a * x_a), &b) / scale);
    }
    let structural = herm < 1e-10 && min_eig > -1e-9 && tr_lo >= 0.0 && tr_hi <= 1.0;
    let z_holds = z_gap < 1e-9;
    outcome(
        structural && z_holds,
        format!(
            "hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}, trace in [{tr_lo:.2e}, {tr_hi:.2e}]; \
             click flip as Z conjugation on memory A: rel deviation {z_gap:.2e} ({}); \
             as branch swap (X) on memory A: rel deviation {x_gap:.2e}. \
             The flip sends each branch sign s to -s, which exchanges the two memory-A branches, \
             so the diagonal changes and no Z conjugation can match; the oracle shows the same swap",
            if z_holds { "holds" } else { "does not hold" }
        ),
    )
}

fn symplectic_ok(s: &SymplecticOp, worst: &mut f64) {
    *worst = worst.max(s.symplectic_defect());
}

fn purity_and_symplectic() -> Outcome {
    let mut det_worst = 0.0f64;
    for k in 0..=80 {
        let mu = 20.0 * k as f64 / 80.0;
        for ordering in [QuadOrdering::Qpqp, QuadOrdering::Qqpp] {
            det_worst = det_worst.max((tmsv_cov(mu, ordering).unwrap().determinant() - 1.0).abs());
        }
        det_worst = det_worst.max((build_spdc_cov(mu).unwrap().determinant() - 1.0).abs());
        for t in [0.5, 0.2, 0.9] {
            det_worst = det_worst.max((build_cascaded_cov(mu, t).unwrap().determinant() - 1.0).abs());
        }
    }
    let mut sym_worst = 0.0f64;
    for ordering in [QuadOrdering::Qpqp, QuadOrdering::Qqpp] {
        for t in [0.0, 0.2, 0.5, 0.73, 1.0] {
            symplectic_ok(&beamsplitter_symplectic(8, 3, 5, t, ordering).unwrap(), &mut sym_worst);
            symplectic_ok(&beamsplitter_symplectic(8, 4, 6, t, ordering).unwrap(), &mut sym_worst);
        }
        symplectic_ok(&mode_permutation(4, &[1, 4, 3, 2], ordering).unwrap(), &mut sym_worst);
        let composed = beamsplitter_symplectic(8, 4, 6, 0.5, ordering)
            .unwrap()
            .compose(&beamsplitter_symplectic(8, 3, 5, 0.5, ordering).unwrap())
            .unwrap();
        symplectic_ok(&composed, &mut sym_worst);
    }
    outcome(
        det_worst < 1e-9 && sym_worst < 1e-12,
        format!("max |det V - 1| {det_worst:.1e} over mu in [0, 20]; max symplectic defect {sym_worst:.1e}"),
    )
}

async fn post_metrics(state: Arc<AppState>, req: &MetricsRequest) -> MetricsResponse {
    let body = Body::from(serde_json::to_vec(req).unwrap());
    let resp = router(state)
        .oneshot(Request::post("/v1/metrics").header("content-type", "application/json").body(body).unwrap())
        .await
        .unwrap();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    serde_json::from_slice(&bytes).unwrap()
}

fn interface_fidelity() -> Outcome {
    let rt = tokio::runtime::Runtime::new().unwrap();
    let state = Arc::new(AppState::default());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    for _ in 0..20 {
        let mut req = MetricsRequest::new(rng.random_range(0.001..3.0));
        req.bsm_efficiency = rng.random_range(0.2..=1.0);
        req.outcoupling_efficiency = rng.random_range(0.2..=1.0);
        req.detection_efficiency = rng.random_range(0.2..=1.0);
        req.dark_click_prob = rng.random_range(0.0..0.05);
        let resp = rt.block_on(post_metrics(state.clone(), &req));
        let p = req.params().unwrap();
        let same = resp.pgen.to_bits() == metrics::pgen(&p).unwrap().value.to_bits()
            && resp.pgen_dark.to_bits() == metrics::pgen_with_dark(&p).unwrap().value.to_bits()
            && resp.trace.to_bits() == metrics::photonic_trace(&p).unwrap().value.to_bits()
            && resp.fidelity.map(f64::to_bits) == Some(metrics::fidelity(&p).unwrap().value.to_bits());
        mismatches += usize::from(!same);
    }

    let run = || {
        Command::new(env!("CARGO_BIN_EXE_zalmtwin"))
            .args(["sweep", "--from", "0.001", "--to", "2", "--steps", "25", "--scale", "log"])
            .args(["--metrics", "pgen,pgen_dark,fidelity,trace,spin_dm", "--dark-click-prob", "0.01"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let identical = a.status.success() && a.stdout == b.stdout && !a.stdout.is_empty();
    outcome(
        mismatches == 0 && identical,
        format!(
            "20 POST /v1/metrics responses, {mismatches} differ from library calls; two CLI sweeps byte-identical: {identical} ({} bytes)",
            a.stdout.len()
        ),
    )
}

fn fidelity_realness() -> Outcome {
    let mut worst = 0.0f64;
    for point in oracle_grid() {
        worst = worst.max(compare(point).unwrap().imag_ratio);
    }
    for db in PEAK_LOSSES {
        let config = peak_sweep(10f64.powf(-db / 10.0));
        for mu in config.grid() {
            let p = SourceParams {
                mean_photon: mu,
                bsm_efficiency: config.base.bsm_efficiency,
                ..SourceParams::default()
            };
            let model = SourceModel::new(p).unwrap();
            worst = worst.max(imag_ratio(model.pgen_complex(HeraldPattern::default()).unwrap()));
            let f = model.fidelity_with_target(BellTarget::Symmetric).unwrap();
            worst = worst.max(f.imag_residual / f.value.abs());
        }
    }
    outcome(worst < 1e-9, format!("max |Im|/|Re| over pgen and fidelity {worst:.1e} (<1e-9)"))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", oracle_equivalence),
        ("trace preservation", trace_preservation),
        ("peak shift with loss", peak_shift),
        ("small mean photon scaling", small_mu_slope),
        ("hafnian unit suite", hafnian_suite),
        ("dark-count reductions", dark_reductions),
        ("spin-spin structure", spin_structure),
        ("purity and symplectic", purity_and_symplectic),
        ("interface fidelity", interface_fidelity),
        ("fidelity realness", fidelity_realness),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!result.passed);
        println!(
            "criterion {:>2} {name}: {tag} [{:.1}s] {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
