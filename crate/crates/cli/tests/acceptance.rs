//! Acceptance suite: one PASS/FAIL line per criterion. Expected values come
//! from scalar closed forms, direct summation, or analytic properties of
//! the generated data, never from the code under test.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lagcoh_core::coherence::general_coherence_x_given_y;
use lagcoh_core::lagged::{general_lagged_phase_sync_from_joint, signed_lagged_coherence};
use lagcoh_core::permutation::permutation_test_samples;
use lagcoh_core::simulation::{
    generate_blurring, generate_lagged, snr_sweep, BlurringScenario, LaggedCouplingScenario, SourceSpec,
};
use lagcoh_core::zerolag::{verify_parseval_identity, ParsevalOptions};
use lagcoh_core::{
    evaluate, general_coherence, general_lagged_coherence, prepare_spectra, BinSamples, CMatrix, Centering,
    Complex64, CrossSpectrum, JointCovariance, MeasureId, MeasureSpec, NormalizationKind, RMatrix, SegmentedSeries,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const CLOSED_FORM_TOL: f64 = 1e-12;
const CLOSED_FORM_TRIALS: usize = 1000;
const CLOSED_FORM_SECONDS: f64 = 10.0;
const SYMMETRY_TOL: f64 = 1e-12;
const SYMMETRY_TRIALS: usize = 1000;
const REDUCTION_TOL: f64 = 1e-12;
const REDUCTION_TRIALS: usize = 500;
const PARSEVAL_TOL: f64 = 1e-9;
const PARSEVAL_SECONDS: f64 = 5.0;
const CONFOUND_MIN_COHERENCE: f64 = 0.99;
const CONFOUND_MAX_LAGGED: f64 = 0.02;
const CONFOUND_MAX_LAGGED_PS: f64 = 0.05;
const TRUE_LAG_MIN: f64 = 0.95;
const SNR_SEEDS: u64 = 24;
const SNR_ONE_SIDED_ALPHA: f64 = 0.01;
const SNR_TWO_SIDED_ALPHA: f64 = 0.05;
const CALIBRATION_RUNS: usize = 200;
const CALIBRATION_PERMUTATIONS: usize = 199;
const CALIBRATION_MAX_KS: f64 = 0.1;
const INVARIANCE_TOL: f64 = 1e-10;
const INVARIANCE_TRIALS: usize = 200;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gauss(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

fn cgauss(r: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(gauss(r), gauss(r))
}

/// `A A* / m` plus a small diagonal load.
fn random_hpd(r: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
    let m = n + 2;
    let a = DMatrix::from_fn(n, m, |_, _| cgauss(r));
    let mut s = &a * a.adjoint() / Complex64::new(m as f64, 0.0);
    for i in 0..n {
        s[(i, i)] += Complex64::new(0.05, 0.0);
    }
    (s.clone() + s.adjoint()) / Complex64::new(2.0, 0.0)
}

fn to_cmatrix(m: &DMatrix<Complex64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn joint(s: &DMatrix<Complex64>, q: usize) -> JointCovariance {
    JointCovariance::from_matrix(to_cmatrix(s), q, s.nrows() - q, 1, 1000).unwrap()
}

fn spectrum(s: &DMatrix<Complex64>, q: usize) -> CrossSpectrum {
    let p = s.nrows() - q;
    let s_yy = s.view((0, 0), (q, q)).into_owned();
    let s_xx = s.view((q, q), (p, p)).into_owned();
    let s_xy = s.view((q, 0), (p, q)).into_owned();
    CrossSpectrum::from_blocks(to_cmatrix(&s_xx), to_cmatrix(&s_yy), to_cmatrix(&s_xy), 1, 1000).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let (mut worst_coh, mut worst_ps) = (0.0f64, 0.0f64);
    for _ in 0..CLOSED_FORM_TRIALS {
        let s = random_hpd(&mut r, 2);
        // Layout (Y; X): s[(0,1)] is s_yx.
        let (s_yy, s_xx, s_yx) = (s[(0, 0)].re, s[(1, 1)].re, s[(0, 1)]);
        let s_xy = s_yx.conj();
        let det_form = general_lagged_coherence(&joint(&s, 1)).unwrap().value;
        let residual = 1.0 - (s_yy - (s_xy.re * s_xy.re + s_xy.im * s_xy.im) / s_xx) / (s_yy - s_xy.re * s_xy.re / s_xx);
        let closed = s_yx.im * s_yx.im / (s_yy * s_xx - s_yx.re * s_yx.re);
        let signed = signed_lagged_coherence(s_xx, s_yy, s_yx).unwrap();
        worst_coh = worst_coh
            .max((det_form - residual).abs())
            .max((det_form - closed).abs())
            .max((signed * signed - closed).abs());

        // Normalized version: unit diagonal, |s| < 1.
        let u = s_xy / (s_xx * s_yy).sqrt();
        let one = Complex64::new(1.0, 0.0);
        let n = DMatrix::from_row_slice(2, 2, &[one, u.conj(), u, one]);
        let det_ps = general_lagged_phase_sync_from_joint(&joint(&n, 1)).unwrap().value;
        let residual_ps = (1.0 - (1.0 - (u.re * u.re + u.im * u.im)) / (1.0 - u.re * u.re)).max(0.0).sqrt();
        let closed_ps = (u.im * u.im / (1.0 - u.re * u.re)).sqrt();
        worst_ps = worst_ps.max((det_ps - residual_ps).abs()).max((det_ps - closed_ps).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_coh <= CLOSED_FORM_TOL && worst_ps <= CLOSED_FORM_TOL && secs < CLOSED_FORM_SECONDS,
        format!(
            "{CLOSED_FORM_TRIALS} trials; lagged coherence forms max diff {worst_coh:.2e}, lagged PS forms max diff {worst_ps:.2e} (tol {CLOSED_FORM_TOL:e}); {secs:.2}s"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut r = rng(202);
    let mut worst = 0.0f64;
    for k in 0..SYMMETRY_TRIALS {
        let p = 1 + k % 4;
        let q = 1 + (k / 4) % 4;
        let cs = spectrum(&random_hpd(&mut r, p + q), q);
        let a = general_coherence(&cs).unwrap().value;
        let b = general_coherence_x_given_y(&cs).unwrap().value;
        worst = worst.max((a - b).abs());
    }
    outcome(
        worst <= SYMMETRY_TOL,
        format!("{SYMMETRY_TRIALS} covariances, p,q in 1..=4; max |Y|X - X|Y| {worst:.2e} (tol {SYMMETRY_TOL:e})"),
    )
}

fn criterion_3() -> Outcome {
    let mut r = rng(303);
    let mut worst = 0.0f64;
    for _ in 0..REDUCTION_TRIALS {
        let n = r.random_range(2..80);
        let x: Vec<Complex64> = (0..n).map(|_| cgauss(&mut r)).collect();
        let y: Vec<Complex64> = (0..n).map(|_| cgauss(&mut r)).collect();
        let direct = (x.iter().zip(&y).map(|(a, b)| (a / a.norm()) * (b / b.norm()).conj()).sum::<Complex64>() / n as f64).norm();
        let xs = BinSamples::new(x, n, 1).unwrap();
        let ys = BinSamples::new(y, n, 1).unwrap();
        let classical = evaluate(&xs, &ys, 0, &MeasureSpec::new(MeasureId::PsClassical)).unwrap().value;
        worst = worst.max((classical - direct).abs());
        for kind in [NormalizationKind::VectorWise, NormalizationKind::VariableWise] {
            let spec = MeasureSpec::new(MeasureId::PsGeneral).with_normalization(kind);
            let general = evaluate(&xs, &ys, 0, &spec).unwrap().value;
            worst = worst.max((general - direct).abs());
        }
    }
    outcome(
        worst <= REDUCTION_TOL,
        format!("{REDUCTION_TRIALS} univariate datasets, both normalizations; max diff {worst:.2e} (tol {REDUCTION_TOL:e})"),
    )
}

fn naive_dft(x: &[f64], w: usize) -> Complex64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(t, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * (w * t) as f64 / n))
        .sum()
}

fn random_series(r: &mut ChaCha8Rng, n_seg: usize, n: usize, ch: usize) -> SegmentedSeries {
    SegmentedSeries::new((0..n_seg * n * ch).map(|_| gauss(r)).collect(), n_seg, n, ch).unwrap()
}

/// Both sides computed by direct summation: `Re(S)` from the DFT sums and
/// `A` from the two-term synthesis `z_t = (2/N) Re(X_w exp(2 pi i w t / N))`.
fn direct_parseval_error(s: &SegmentedSeries, w: usize) -> f64 {
    let (n_seg, n, ch) = (s.n_segments(), s.n_samples(), s.n_channels());
    let coeffs: Vec<Vec<Complex64>> = (0..n_seg)
        .map(|j| (0..ch).map(|c| naive_dft(&(0..n).map(|t| s.value(j, t, c)).collect::<Vec<_>>(), w)).collect())
        .collect();
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for u in 0..ch {
        for v in 0..ch {
            let lhs = coeffs.iter().map(|x| (x[u] * x[v].conj()).re).sum::<f64>() / n_seg as f64;
            let mut a = 0.0;
            for x in &coeffs {
                for t in 0..n {
                    let ph = Complex64::from_polar(1.0, 2.0 * PI * (w * t) as f64 / n as f64);
                    let zu = 2.0 / n as f64 * (x[u] * ph).re;
                    let zv = 2.0 / n as f64 * (x[v] * ph).re;
                    a += zu * zv;
                }
            }
            let rhs = (n * n) as f64 / 2.0 * a / (n * n_seg) as f64;
            worst = worst.max((lhs - rhs).abs());
            scale = scale.max(lhs.abs());
        }
    }
    worst / scale
}

fn criterion_4() -> Outcome {
    let mut r = rng(404);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut series = Vec::new();
    for n in [16usize, 64, 256] {
        for ch in [1usize, 3] {
            let s = random_series(&mut r, 8, n, ch);
            for w in 1..n.div_ceil(2) {
                let rep = verify_parseval_identity(&s, w, ParsevalOptions::default()).unwrap();
                worst = worst.max(rep.max_abs_rel_error);
                checked += 1;
            }
            series.push(s);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    // Independent direct-summation check on a spread of bins.
    let mut worst_direct = 0.0f64;
    for s in &series {
        let n = s.n_samples();
        for w in [1, n / 4, n / 2 - 1] {
            worst_direct = worst_direct.max(direct_parseval_error(s, w));
        }
    }
    outcome(
        worst <= PARSEVAL_TOL && worst_direct <= PARSEVAL_TOL && secs < PARSEVAL_SECONDS,
        format!(
            "N in {{16,64,256}}, r in {{1,3}}, {checked} interior bins; max rel error {worst:.2e}, direct-summation check {worst_direct:.2e} (tol {PARSEVAL_TOL:e}); {secs:.2}s"
        ),
    )
}

fn at_bin(x: &SegmentedSeries, y: &SegmentedSeries, bin: usize, id: MeasureId) -> f64 {
    let xs = prepare_spectra(x, Centering::Both).unwrap().at_bin(bin).unwrap();
    let ys = prepare_spectra(y, Centering::Both).unwrap().at_bin(bin).unwrap();
    evaluate(&xs, &ys, bin, &MeasureSpec::new(id)).unwrap().value
}

fn scalar(v: f64) -> RMatrix {
    RMatrix::from_vec(1, 1, vec![v])
}

fn confound_scenario(source: SourceSpec, seed: u64) -> BlurringScenario {
    BlurringScenario {
        mixing_c: scalar(1.3),
        mixing_d: scalar(-0.6),
        source,
        noise_std_x: 0.0,
        noise_std_y: 0.0,
        n_segments: 256,
        n_samples: 64,
        seed,
    }
}

fn criterion_5() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, source) in [("sinusoid", SourceSpec::sinusoid(8, 1.0)), ("ar2", SourceSpec::ar2(8, 0.95, 1.0))] {
        let (x, y) = generate_blurring(&confound_scenario(source, 55)).unwrap();
        let coh = at_bin(&x, &y, 8, MeasureId::CoherenceGeneral);
        let lag = at_bin(&x, &y, 8, MeasureId::LaggedCoherenceGeneral);
        let lps = at_bin(&x, &y, 8, MeasureId::LaggedPsGeneral).max(at_bin(&x, &y, 8, MeasureId::LaggedPsUnivariate));
        passed &= coh >= CONFOUND_MIN_COHERENCE && lag <= CONFOUND_MAX_LAGGED && lps <= CONFOUND_MAX_LAGGED_PS;
        parts.push(format!("{name}: coherence {coh:.6}, lagged coherence {lag:.2e}, lagged PS {lps:.2e}"));
    }
    outcome(
        passed,
        format!(
            "N_R=256, N_T=64; {} (need >= {CONFOUND_MIN_COHERENCE}, <= {CONFOUND_MAX_LAGGED}, <= {CONFOUND_MAX_LAGGED_PS})",
            parts.join("; ")
        ),
    )
}

fn true_lag_scenario(n_segments: usize, seed: u64) -> LaggedCouplingScenario {
    // Bin 4 of 64 has period 16; a 4-sample delay is a quarter period.
    LaggedCouplingScenario {
        lag_samples: 4,
        coupling_gain: 1.0,
        source: SourceSpec::sinusoid(4, 1.0),
        noise_std: 0.0,
        n_segments,
        n_samples: 64,
        seed,
    }
}

fn criterion_6() -> Outcome {
    let (x, y) = generate_lagged(&true_lag_scenario(256, 66)).unwrap();
    let vals = [
        ("lagged coherence", at_bin(&x, &y, 4, MeasureId::LaggedCoherenceGeneral)),
        ("lagged PS", at_bin(&x, &y, 4, MeasureId::LaggedPsGeneral)),
        ("lagged PS (univariate)", at_bin(&x, &y, 4, MeasureId::LaggedPsUnivariate)),
        ("|imag coherency|", at_bin(&x, &y, 4, MeasureId::ImagCoherency).abs()),
        ("PLI", at_bin(&x, &y, 4, MeasureId::Pli)),
    ];
    outcome(
        vals.iter().all(|(_, v)| *v >= TRUE_LAG_MIN),
        format!(
            "N_R=256, quarter-period delay; {} (need >= {TRUE_LAG_MIN})",
            vals.iter().map(|(n, v)| format!("{n} {v:.6}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

/// `P(K >= k)` for `K ~ Binomial(n, 1/2)`.
fn binomial_upper_tail(n: u64, k: u64) -> f64 {
    let mut total = 0.0;
    let mut coeff = 1.0f64;
    for i in 0..=n {
        if i > 0 {
            coeff *= (n - i + 1) as f64 / i as f64;
        }
        if i >= k {
            total += coeff;
        }
    }
    total / 2f64.powi(n as i32)
}

fn two_sided_sign_p(up: u64, down: u64) -> f64 {
    let n = up + down;
    (2.0 * binomial_upper_tail(n, up.max(down))).min(1.0)
}

fn criterion_7() -> Outcome {
    let (mut coh_up, mut coh_down, mut lag_up, mut lag_down) = (0u64, 0u64, 0u64, 0u64);
    for seed in 0..SNR_SEEDS {
        let s = BlurringScenario {
            mixing_c: scalar(0.15),
            mixing_d: scalar(0.12),
            source: SourceSpec::sinusoid(5, 1.0),
            noise_std_x: 1.0,
            noise_std_y: 1.0,
            n_segments: 64,
            n_samples: 32,
            seed: 7000 + seed,
        };
        let rows = snr_sweep(&s, &[1.0, 10.0]).unwrap();
        let (lo, hi) = (&rows[0], &rows[1]);
        match hi.coherence.total_cmp(&lo.coherence) {
            std::cmp::Ordering::Greater => coh_up += 1,
            std::cmp::Ordering::Less => coh_down += 1,
            std::cmp::Ordering::Equal => {}
        }
        match hi.lagged_coherence.total_cmp(&lo.lagged_coherence) {
            std::cmp::Ordering::Greater => lag_up += 1,
            std::cmp::Ordering::Less => lag_down += 1,
            std::cmp::Ordering::Equal => {}
        }
    }
    let p_coh = binomial_upper_tail(coh_up + coh_down, coh_up);
    let p_lag = two_sided_sign_p(lag_up, lag_down);
    outcome(
        p_coh < SNR_ONE_SIDED_ALPHA && p_lag >= SNR_TWO_SIDED_ALPHA,
        format!(
            "{SNR_SEEDS} seeds, gain 1 -> 10; coherence up {coh_up}/down {coh_down} one-sided p {p_coh:.2e} (need < {SNR_ONE_SIDED_ALPHA}); lagged coherence up {lag_up}/down {lag_down} two-sided p {p_lag:.3} (need >= {SNR_TWO_SIDED_ALPHA})"
        ),
    )
}

fn ks_uniform(mut p: Vec<f64>) -> f64 {
    p.sort_by(f64::total_cmp);
    let n = p.len() as f64;
    p.iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

fn bin_samples(s: &SegmentedSeries, bin: usize) -> BinSamples {
    prepare_spectra(s, Centering::Both).unwrap().at_bin(bin).unwrap()
}

fn criterion_8() -> Outcome {
    let spec = MeasureSpec::new(MeasureId::CoherenceGeneral);
    let mut r = rng(808);
    let mut p_values = Vec::with_capacity(CALIBRATION_RUNS);
    for run in 0..CALIBRATION_RUNS {
        let x = random_series(&mut r, 64, 32, 1);
        let y = random_series(&mut r, 64, 32, 1);
        let rep = permutation_test_samples(&bin_samples(&x, 5), &bin_samples(&y, 5), 5, &spec, CALIBRATION_PERMUTATIONS, run as u64)
            .unwrap();
        p_values.push(rep.p_value);
    }
    let ks = ks_uniform(p_values);

    let (x, y) = generate_lagged(&true_lag_scenario(256, 66)).unwrap();
    let control = permutation_test_samples(
        &bin_samples(&x, 4),
        &bin_samples(&y, 4),
        4,
        &MeasureSpec::new(MeasureId::LaggedCoherenceGeneral),
        CALIBRATION_PERMUTATIONS,
        1,
    )
    .unwrap();
    let expected = 1.0 / (CALIBRATION_PERMUTATIONS + 1) as f64;
    outcome(
        ks < CALIBRATION_MAX_KS && control.p_value == expected,
        format!(
            "{CALIBRATION_RUNS} null runs (N_R=64, {CALIBRATION_PERMUTATIONS} permutations) KS distance {ks:.4} (need < {CALIBRATION_MAX_KS}); positive control p = {} (need {expected})",
            control.p_value
        ),
    )
}

fn transform(samples: &BinSamples, a: &DMatrix<Complex64>) -> BinSamples {
    let values = samples
        .rows()
        .flat_map(|row| {
            let v = DMatrix::from_column_slice(row.len(), 1, row);
            (a * v).iter().copied().collect::<Vec<_>>()
        })
        .collect();
    BinSamples::new(values, samples.n_segments(), a.nrows()).unwrap()
}

fn random_invertible(r: &mut ChaCha8Rng, n: usize, complex: bool) -> DMatrix<Complex64> {
    let mut a = DMatrix::from_fn(n, n, |_, _| if complex { cgauss(r) } else { Complex64::new(gauss(r), 0.0) });
    for i in 0..n {
        a[(i, i)] += Complex64::new(2.0, 0.0);
    }
    a
}

fn criterion_9() -> Outcome {
    let mut r = rng(909);
    let (mut worst_g, mut worst_gl) = (0.0f64, 0.0f64);
    for k in 0..INVARIANCE_TRIALS {
        let (p, q) = (1 + k % 3, 1 + (k / 3) % 3);
        let n = 40;
        // Correlated complex samples so both measures are far from 0 and 1.
        let mix = DMatrix::from_fn(p + q, p + q, |_, _| cgauss(&mut r));
        let z: Vec<DMatrix<Complex64>> = (0..n).map(|_| &mix * DMatrix::from_fn(p + q, 1, |_, _| cgauss(&mut r))).collect();
        let x = BinSamples::new(z.iter().flat_map(|v| v.rows(0, p).iter().copied().collect::<Vec<_>>()).collect(), n, p).unwrap();
        let y = BinSamples::new(z.iter().flat_map(|v| v.rows(p, q).iter().copied().collect::<Vec<_>>()).collect(), n, q).unwrap();
        let eval = |x: &BinSamples, y: &BinSamples, id| evaluate(x, y, 0, &MeasureSpec::new(id)).unwrap().value;

        let (ax, ay) = (random_invertible(&mut r, p, true), random_invertible(&mut r, q, true));
        let g0 = eval(&x, &y, MeasureId::CoherenceGeneral);
        let g1 = eval(&transform(&x, &ax), &transform(&y, &ay), MeasureId::CoherenceGeneral);
        worst_g = worst_g.max((g0 - g1).abs());

        let (bx, by) = (random_invertible(&mut r, p, false), random_invertible(&mut r, q, false));
        let l0 = eval(&x, &y, MeasureId::LaggedCoherenceGeneral);
        let l1 = eval(&transform(&x, &bx), &transform(&y, &by), MeasureId::LaggedCoherenceGeneral);
        worst_gl = worst_gl.max((l0 - l1).abs());
    }
    outcome(
        worst_g <= INVARIANCE_TOL && worst_gl <= INVARIANCE_TOL,
        format!(
            "{INVARIANCE_TRIALS} trials each; coherence under complex transforms max diff {worst_g:.2e}, lagged coherence under real transforms {worst_gl:.2e} (tol {INVARIANCE_TOL:e})"
        ),
    )
}

fn lagcoh(dir: &Path, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_lagcoh"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn value_at(csv: &str, bin: usize, measure: &str) -> Option<f64> {
    csv.lines().skip(1).find_map(|line| {
        let cells: Vec<&str> = line.split(',').collect();
        (cells[0] == bin.to_string() && cells[2] == measure).then(|| cells[3].parse().ok())?
    })
}

const CONFOUND_CFG: &str = "scenario = blurring\nsource = sinusoid\nsource_bin = 8\nmixing_c = 1.3\nmixing_d = -0.6\nnoise_std_x = 0\nnoise_std_y = 0\nn_segments = 256\nn_samples = 64\nseed = 55\n";
const LAG_CFG: &str = "scenario = lagged\nsource = sinusoid\nsource_bin = 4\nlag = 4\ngain = 1\nnoise_std = 0\nn_segments = 256\nn_samples = 64\nseed = 66\n";

/// simulate -> analyze in a fresh directory; returns (datasets, results).
fn cli_pipeline() -> Result<(Vec<Vec<u8>>, Vec<String>), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    std::fs::write(d.join("confound.cfg"), CONFOUND_CFG).map_err(|e| e.to_string())?;
    std::fs::write(d.join("lag.cfg"), LAG_CFG).map_err(|e| e.to_string())?;
    lagcoh(d, &["simulate", "--config", "confound.cfg", "--output", "confound.csv"])?;
    lagcoh(d, &["simulate", "--config", "lag.cfg", "--output", "lag.csv"])?;
    lagcoh(d, &["analyze", "--input", "confound.csv", "--output", "confound_results.csv"])?;
    lagcoh(d, &["analyze", "--input", "lag.csv", "--format", "csv", "--output", "lag_results.csv"])?;
    let read = |n: &str| std::fs::read(d.join(n)).map_err(|e| e.to_string());
    let data = vec![read("confound.csv")?, read("lag.csv")?];
    let results = vec![
        String::from_utf8(read("confound_results.csv")?).map_err(|e| e.to_string())?,
        String::from_utf8(read("lag_results.csv")?).map_err(|e| e.to_string())?,
    ];
    Ok((data, results))
}

fn criterion_10() -> Outcome {
    let (first, second) = match (cli_pipeline(), cli_pipeline()) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let identical = first == second;
    let confound = &first.1[0];
    let lag = &first.1[1];
    let get = |csv: &str, bin, m| value_at(csv, bin, m).unwrap_or(f64::NAN);
    let coh = get(confound, 8, "coherence_general");
    let lagc = get(confound, 8, "lagged_coherence_general");
    let lps = get(confound, 8, "lagged_ps_general").max(get(confound, 8, "lagged_ps_univariate"));
    let confound_ok = coh >= CONFOUND_MIN_COHERENCE && lagc <= CONFOUND_MAX_LAGGED && lps <= CONFOUND_MAX_LAGGED_PS;
    let lag_vals = [
        get(lag, 4, "lagged_coherence_general"),
        get(lag, 4, "lagged_ps_general"),
        get(lag, 4, "imag_coherency").abs(),
        get(lag, 4, "pli"),
    ];
    let lag_ok = lag_vals.iter().all(|v| *v >= TRUE_LAG_MIN);
    outcome(
        identical && confound_ok && lag_ok,
        format!(
            "confound: coherence {coh:.6}, lagged {lagc:.2e}, lagged PS {lps:.2e}; true lag: min {:.6}; two runs byte-identical: {identical}",
            lag_vals.iter().copied().fold(f64::INFINITY, f64::min)
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("closed-form equivalence", criterion_1),
        ("symmetry", criterion_2),
        ("univariate reduction", criterion_3),
        ("zero-lag filter identity", criterion_4),
        ("zero-lag confound", criterion_5),
        ("true lag", criterion_6),
        ("SNR inflation", criterion_7),
        ("permutation calibration", criterion_8),
        ("transform invariance", criterion_9),
        ("CLI end-to-end", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
