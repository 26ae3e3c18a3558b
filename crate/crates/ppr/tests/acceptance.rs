//! Release gate: one test per acceptance criterion.
//!
//! Each test prints a `criterion NN <name>: PASS (measured vs tolerance)`
//! line — run with `--nocapture` to see the measurements — and asserts the
//! stated tolerance, so the suite's pass/fail output doubles as the release
//! checklist.

// Frozen reference constants keep their full generated precision.
#![allow(clippy::excessive_precision)]

mod common;

use std::collections::HashSet;

use common::{adaptive_simpson, ks_two_sample, mean, mean_and_se, welch_t_p};
use ppr::bounds::{log_k_bound_refined, log_k_bound_simple};
use ppr::codec::{elias_delta_decode, elias_delta_encode, elias_delta_length};
use ppr::encoder::conditional_selection_logprobs;
use ppr::experiments::{run_timing, TimingConfig};
use ppr::mechanisms::{
    gaussian_kl, gaussian_target, laplace_proposal_variance, laplace_target, sample_laplace_noise,
    GaussianMechSpec, GaussianProposalSpec, LaplaceMechSpec, SphereProposal,
};
use ppr::privacy::{
    gaussian_sigma_for_dp, ppr_approx_dp, ppr_metric_dp, ppr_pure_dp, ppr_tight_dp, PrivacyBudget,
    TightDpKnobs,
};
use ppr::special::lower_incomplete_gamma;
use ppr::{decode, encode, encode_truncated, PprParams, Proposal, SampleStream, SharedSeed, Target};

fn report(name: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {name}: {verdict} ({detail})");
    assert!(pass, "criterion {name}: FAIL ({detail})");
}

/// Encode `runs` seed pairs and return the selected indices together with the
/// decoded samples. Seed tree: `master/(0,i)` shared, `master/(1,i)` local.
fn encode_runs(
    runs: u64,
    params: &PprParams,
    proposal: &dyn Proposal,
    target: &dyn Target,
    master: &SharedSeed,
) -> (Vec<u64>, Vec<Vec<f64>>) {
    let mut ks = Vec::with_capacity(runs as usize);
    let mut samples = Vec::with_capacity(runs as usize);
    for i in 0..runs {
        let shared = master.derive(0).derive(i);
        let mut local = SampleStream::new(&master.derive(1).derive(i));
        let res = encode(params, proposal, target, &shared, &mut local).expect("encode");
        ks.push(res.k);
        samples.push(decode(proposal, res.k, &shared));
    }
    (ks, samples)
}

#[test]
fn criterion_01_exactness() {
    let params = PprParams::new(2.0).unwrap();
    let spec = GaussianMechSpec::new(vec![0.5], 0.04).unwrap();
    let proposal = GaussianProposalSpec::new(1.04, 1).unwrap();
    let target = gaussian_target(&spec, &proposal).unwrap();
    let master = SharedSeed::from_u64(0xACC1);

    let runs = 100_000;
    let (_, samples) = encode_runs(runs, &params, &proposal, &target, &master);
    let decoded: Vec<f64> = samples.into_iter().map(|s| s[0]).collect();

    let mut direct_stream = SampleStream::new(&master.derive(2));
    let mut direct = vec![0.0; runs as usize];
    direct_stream.fill_std_normal(&mut direct);
    for v in &mut direct {
        *v = 0.5 + 0.2 * *v;
    }

    let (d, p) = ks_two_sample(&decoded, &direct);
    let m = mean(&decoded);
    let se = 0.2 / (runs as f64).sqrt();
    let pass = p > 0.001 && (m - 0.5).abs() <= 5.0 * se;
    report(
        "01 exactness",
        pass,
        &format!(
            "KS D = {d:.5}, p = {p:.4} > 0.001; mean = {m:.5}, |mean - 0.5| = {:.2e} <= 5 se = {:.2e}",
            (m - 0.5).abs(),
            5.0 * se
        ),
    );
}

#[test]
fn criterion_02_index_size_bound() {
    let bench_a = (
        GaussianMechSpec::new(vec![0.5], 0.04).unwrap(),
        GaussianProposalSpec::new(1.04, 1).unwrap(),
    );
    let bench_b = (
        GaussianMechSpec::new(vec![0.4; 5], 0.25).unwrap(),
        GaussianProposalSpec::new(0.5, 5).unwrap(),
    );
    let runs = 10_000;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut pass = true;
    for (bench_id, (spec, proposal)) in [bench_a, bench_b].iter().enumerate() {
        let target = gaussian_target(spec, proposal).unwrap();
        let kl_bits = gaussian_kl(spec, proposal) / std::f64::consts::LN_2;
        for (aid, alpha) in [1.5, 2.0, 4.0].into_iter().enumerate() {
            let params = PprParams::new(alpha).unwrap();
            let master = SharedSeed::from_u64(0xACC2 + (bench_id * 3 + aid) as u64);
            let (ks, _) = encode_runs(runs, &params, proposal, &target, &master);
            let log2_k: Vec<f64> = ks.iter().map(|&k| (k as f64).log2()).collect();
            let (m, se) = mean_and_se(&log2_k);
            let bound = kl_bits + 3.56f64.log2() / (0.5 * (alpha - 1.0)).min(1.0);
            let margin = m - (bound + 3.0 * se);
            worst_margin = worst_margin.max(margin);
            pass &= margin <= 0.0;
        }
    }
    report(
        "02 index size bound",
        pass,
        &format!("worst (mean log2 K) - (bound + 3 se) = {worst_margin:.3} bits <= 0"),
    );
}

#[test]
fn criterion_03_refined_bound_dominance() {
    let mut pass = true;
    let mut worst_gap: f64 = 0.0;
    for i in 0..50 {
        let alpha = 1.0 + 10f64.powf(-2.0 + 4.0 * i as f64 / 49.0);
        let base = log_k_bound_refined(alpha, 0.0).unwrap();
        pass &= base > 0.0;
        for kl in [0.0, 0.7, 3.0, 10.0] {
            let refined = log_k_bound_refined(alpha, kl).unwrap();
            let simple = log_k_bound_simple(alpha, kl).unwrap();
            pass &= refined <= simple + 1e-12 && refined >= kl;
            // Additive in the divergence argument.
            pass &= (refined - kl - base).abs() <= 1e-9;
            worst_gap = worst_gap.max(refined - simple);
        }
    }
    report(
        "03 refined bound dominance",
        pass,
        &format!("50-point alpha grid x 4 divergences: max refined - simple = {worst_gap:.2e} <= 0"),
    );
}

#[test]
fn criterion_04_dme_mse() {
    let (n, d) = (50usize, 20usize);
    let clip = (d as f64).sqrt();
    let budget = PrivacyBudget::new(0.5, 1e-5).unwrap();
    let sigma = gaussian_sigma_for_dp(clip, &budget).unwrap();
    let s_p = sigma * sigma / n as f64;
    let s_q = s_p + (2.0 * clip) * (2.0 * clip) / d as f64;
    let reference = sigma * sigma * d as f64 / (n * n) as f64;

    let params = PprParams::new(2.0).unwrap();
    let proposal = GaussianProposalSpec::new(s_q, d).unwrap();
    let master = SharedSeed::from_u64(0xACC4);
    let trials = 1000u64;
    let mut direct_errs = Vec::with_capacity(trials as usize);
    let mut ppr_errs = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let mut data = SampleStream::new(&master.derive(0).derive(t));
        let clients: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| if data.unif01() < 0.8 { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        let mut truth = vec![0.0; d];
        for x in &clients {
            for (s, v) in truth.iter_mut().zip(x) {
                *s += v / n as f64;
            }
        }

        let mut direct = SampleStream::new(&master.derive(1).derive(t));
        let mut est = vec![0.0; d];
        let mut noise = vec![0.0; d];
        for x in &clients {
            direct.fill_std_normal(&mut noise);
            for ((s, v), g) in est.iter_mut().zip(x).zip(&noise) {
                *s += (v + s_p.sqrt() * g) / n as f64;
            }
        }
        direct_errs.push(sq_dist(&est, &truth));

        let mut est = vec![0.0; d];
        for (c, x) in clients.iter().enumerate() {
            let spec = GaussianMechSpec::new(x.clone(), s_p).unwrap();
            let target = gaussian_target(&spec, &proposal).unwrap();
            let shared = master.derive(2).derive(t).derive(c as u64);
            let mut local = SampleStream::new(&master.derive(3).derive(t).derive(c as u64));
            let res = encode(&params, &proposal, &target, &shared, &mut local).expect("encode");
            for (s, z) in est.iter_mut().zip(decode(&proposal, res.k, &shared)) {
                *s += z / n as f64;
            }
        }
        ppr_errs.push(sq_dist(&est, &truth));
    }

    let direct_mse = mean(&direct_errs);
    let ppr_mse = mean(&ppr_errs);
    let p = welch_t_p(&direct_errs, &ppr_errs);
    let rel = (direct_mse - reference).abs() / reference;
    let pass = rel <= 0.05 && p > 0.01;
    report(
        "04 dme mse",
        pass,
        &format!(
            "uncompressed MSE = {direct_mse:.3} vs sigma^2 d/n^2 = {reference:.3} (rel {rel:.3} <= 0.05); \
             compressed MSE = {ppr_mse:.3}, Welch t-test p = {p:.3} > 0.01"
        ),
    );
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[test]
fn criterion_05_laplace_mse() {
    let (d, eps) = (5usize, 1.0);
    let reference = d as f64 * (d as f64 + 1.0) / (eps * eps); // 30

    // Direct sampling of the mechanism's noise law.
    let mut stream = SampleStream::new(&SharedSeed::from_u64(0xACC5));
    let draws = 100_000;
    let mut sq = Vec::with_capacity(draws);
    for _ in 0..draws {
        let z = sample_laplace_noise(d, eps, &mut stream);
        sq.push(z.iter().map(|v| v * v).sum::<f64>());
    }
    let direct_mse = mean(&sq);
    let direct_rel = (direct_mse - reference).abs() / reference;

    // Truncated selection against a Gaussian proposal.
    let x = [1.0, -1.0, 0.5, 0.0, 0.5];
    let ball = 5.0;
    let spec = LaplaceMechSpec::new(x.to_vec(), eps, ball).unwrap();
    let proposal =
        GaussianProposalSpec::new(laplace_proposal_variance(ball, d, eps), d).unwrap();
    let target = laplace_target(&spec, &proposal).unwrap();
    let params = PprParams::new(2.0).unwrap();
    let master = SharedSeed::from_u64(0xACC5 + 1);
    let runs = 4000u64;
    let mut errs = Vec::with_capacity(runs as usize);
    let mut bias_sum = vec![0.0; d];
    let mut bias_sumsq = vec![0.0; d];
    for i in 0..runs {
        let shared = master.derive(0).derive(i);
        let mut local = SampleStream::new(&master.derive(1).derive(i));
        let res = encode_truncated(&params, &proposal, &target, &shared, &mut local, 200_000)
            .expect("encode");
        let z = decode(&proposal, res.k, &shared);
        errs.push(sq_dist(&z, &x));
        for j in 0..d {
            let e = z[j] - x[j];
            bias_sum[j] += e;
            bias_sumsq[j] += e * e;
        }
    }
    let ppr_mse = mean(&errs);
    let ppr_rel = (ppr_mse - reference).abs() / reference;
    let mut worst_bias_sigmas: f64 = 0.0;
    for j in 0..d {
        let m = bias_sum[j] / runs as f64;
        let var = (bias_sumsq[j] - runs as f64 * m * m) / (runs as f64 - 1.0);
        worst_bias_sigmas = worst_bias_sigmas.max(m.abs() / (var / runs as f64).sqrt());
    }
    let pass = direct_rel <= 0.02 && ppr_rel <= 0.05 && worst_bias_sigmas <= 5.0;
    report(
        "05 laplace mse",
        pass,
        &format!(
            "direct MSE = {direct_mse:.3} (rel {direct_rel:.4} <= 0.02); truncated-selection MSE = \
             {ppr_mse:.3} (rel {ppr_rel:.4} <= 0.05); worst |bias|/se = {worst_bias_sigmas:.2} <= 5"
        ),
    );
}

/// Generated by tools/gen_privacy_table.py (30-digit arithmetic):
/// (kind, epsilon, delta, alpha, epsilon_out, delta_out).
const PRIVACY_TABLE: &[(&str, f64, f64, f64, f64, f64)] = &[
    ("pure", 0.1, 0.0, 1.2, 0.24, 0.0),
    ("pure", 0.5, 0.0, 2.0, 2.0, 0.0),
    ("pure", 1.0, 0.0, 2.0, 4.0, 0.0),
    ("pure", 2.0, 0.0, 4.0, 16.0, 0.0),
    ("pure", 0.25, 0.0, 10.0, 5.0, 0.0),
    ("pure", 1.5, 0.0, 1.5, 4.5, 0.0),
    ("pure", 0.75, 0.0, 3.0, 4.5, 0.0),
    ("pure", 0.01, 0.0, 2.0, 0.04, 0.0),
    ("approx", 0.5, 1e-6, 2.0, 2.0, 2e-6),
    ("approx", 1.0, 0.01, 2.0, 4.0, 0.02),
    ("approx", 0.3, 0.2, 1.5, 0.9, 0.4),
    ("approx", 2.0, 1e-3, 1.2, 4.8, 0.002),
    ("approx", 0.05, 0.4, 2.0, 0.2, 0.8),
    ("approx", 0.8, 1e-8, 6.0, 9.6, 2e-8),
    ("metric", 0.1, 0.0, 2.0, 0.4, 0.0),
    ("metric", 1.0, 0.0, 1.2, 2.4, 0.0),
    ("metric", 0.5, 0.0, 4.0, 4.0, 0.0),
    ("metric", 3.0, 0.0, 2.0, 12.0, 0.0),
    ("metric", 0.02, 0.0, 8.0, 0.32, 0.0),
    ("metric", 0.7, 0.0, 2.5, 3.5, 0.0),
];

#[test]
fn criterion_06_privacy_calculus() {
    // Closed form for these knobs: exp(-4.2)/(3 ln 3) + 1.
    let knobs = TightDpKnobs::new(1.0, 1.0 / 3.0).unwrap();
    let (alpha_max, _) = ppr_tight_dp(&PrivacyBudget::new(0.0, 0.0).unwrap(), &knobs).unwrap();
    let frozen = 1.004549854082631652180847;
    let alpha_err = (alpha_max - frozen).abs();

    let close = |got: f64, want: f64| {
        if want == 0.0 {
            got == 0.0
        } else {
            ((got - want) / want).abs() <= 1e-12
        }
    };
    let mut table_ok = true;
    for &(kind, e, dl, alpha, out_e, out_d) in PRIVACY_TABLE {
        let (got_e, got_d) = match kind {
            "pure" => {
                let b = ppr_pure_dp(&PrivacyBudget::new(e, dl).unwrap(), alpha).unwrap();
                (b.epsilon, b.delta)
            }
            "approx" => {
                let b = ppr_approx_dp(&PrivacyBudget::new(e, dl).unwrap(), alpha).unwrap();
                (b.epsilon, b.delta)
            }
            "metric" => (ppr_metric_dp(e, alpha).unwrap(), 0.0),
            _ => unreachable!(),
        };
        table_ok &= close(got_e, out_e) && close(got_d, out_d);
    }
    let pass = alpha_err < 1e-9 && table_ok;
    report(
        "06 privacy calculus",
        pass,
        &format!(
            "alpha_max = {alpha_max:.15} vs frozen (err {alpha_err:.2e} < 1e-9); \
             20-case transform table exact to 1e-12: {table_ok}"
        ),
    );
}

#[test]
fn criterion_07_selection_ratio_stability() {
    let mut stream = SampleStream::new(&SharedSeed::from_u64(0xACC7));
    let mut worst_ratio: f64 = 0.0; // max |delta logprob| / (2 alpha eps)
    for _ in 0..1000 {
        let len = 2 + (stream.unif01() * 49.0) as usize;
        let base: Vec<f64> = (0..len).map(|_| (stream.unif01() - 0.5) * 20.0).collect();
        for eps in [0.1, 1.0] {
            let perturbed: Vec<f64> = base
                .iter()
                .map(|v| v + (2.0 * stream.unif01() - 1.0) * eps)
                .collect();
            for alpha in [1.2, 2.0, 4.0] {
                let p0 = conditional_selection_logprobs(alpha, &base).unwrap();
                let p1 = conditional_selection_logprobs(alpha, &perturbed).unwrap();
                let max_delta = p0
                    .iter()
                    .zip(&p1)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                worst_ratio = worst_ratio.max(max_delta / (2.0 * alpha * eps));
            }
        }
    }
    let pass = worst_ratio <= 1.0 + 1e-9;
    report(
        "07 selection ratio stability",
        pass,
        &format!("1000 instances x eps {{0.1, 1}} x alpha {{1.2, 2, 4}}: max |delta logprob| / (2 alpha eps) = {worst_ratio:.6} <= 1"),
    );
}

#[test]
fn criterion_08_codec() {
    for k in 1..=1_000_000u64 {
        let bits = elias_delta_encode(k).unwrap();
        let n = k.ilog2();
        let expected = n + 2 * (n + 1).ilog2() + 1;
        assert_eq!(bits.len(), expected as usize, "length of code for {k}");
        assert_eq!(elias_delta_length(k).unwrap(), expected);
        let (decoded, used) = elias_delta_decode(&bits).unwrap();
        assert_eq!((decoded, used), (k, bits.len()), "round trip of {k}");
    }

    // Exhaustive prefix-freeness below 2^16: no codeword is a proper prefix
    // of another. Codewords here are at most 25 bits, so they pack into u64.
    let mut words = Vec::with_capacity(1 << 16);
    let mut set = HashSet::with_capacity(1 << 16);
    for k in 1..=(1u64 << 16) {
        let bits = elias_delta_encode(k).unwrap();
        let mut value = 0u64;
        for i in 0..bits.len() {
            value = value << 1 | bits.bit(i) as u64;
        }
        words.push((bits.len(), value));
        set.insert((bits.len(), value));
    }
    for &(len, value) in &words {
        for plen in 1..len {
            assert!(
                !set.contains(&(plen, value >> (len - plen))),
                "proper prefix collision at length {plen} of a {len}-bit codeword"
            );
        }
    }
    report(
        "08 codec",
        true,
        "round trip + closed-form lengths for k in [1, 1e6]; prefix-freeness exhaustive for k <= 2^16",
    );
}

#[test]
fn criterion_09_decoder_jump_ahead() {
    fn check(proposal: &dyn Proposal, seed: u64) {
        let shared = SharedSeed::from_u64(seed);
        let mut sequential = SampleStream::new(&shared);
        for k in 1..=10_000u64 {
            let expected = proposal.sample(&mut sequential);
            let jumped = decode(proposal, k, &shared);
            assert_eq!(jumped, expected, "index {k} must be bit-exact");
        }
    }
    check(&GaussianProposalSpec::new(2.0, 3).unwrap(), 0xACC9);
    check(&SphereProposal::new(3, 1.5).unwrap(), 0xACC9 + 1);
    report(
        "09 decoder jump-ahead",
        true,
        "decode(k) == sequential regeneration, bit-exact for k in [1, 1e4], Gaussian and sphere proposals",
    );
}

#[test]
fn criterion_10_special_functions() {
    let mut worst_rel: f64 = 0.0;
    for i in 1..=10 {
        let beta = i as f64 / 10.0;
        for j in 0..10 {
            let x = 10f64.powf(-2.0 + 4.0 * j as f64 / 9.0);
            let got = lower_incomplete_gamma(beta, x).unwrap();
            // Independent oracle: substituting u = t^beta removes the
            // endpoint singularity, leaving a smooth integrand on [0, x^beta].
            let upper = x.powf(beta);
            let f = |u: f64| (-u.powf(1.0 / beta)).exp() / beta;
            let oracle = adaptive_simpson(&f, 0.0, upper, 1e-13 * (1.0 + upper / beta));
            worst_rel = worst_rel.max(((got - oracle) / oracle).abs());
        }
    }
    let pass = worst_rel < 1e-10;
    report(
        "10 special functions",
        pass,
        &format!("100-point (beta, x) grid: max relative error vs quadrature oracle = {worst_rel:.2e} < 1e-10"),
    );
}

#[test]
fn criterion_11_timing_protocol() {
    let cfg = TimingConfig::desk_default();
    let records = run_timing(&cfg).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        println!(
            "chunk_dim {:>2}: {:.6} +- {:.6} s per chunk, {:.4} s per full vector (mean index {:.1})",
            r.chunk_dim, r.mean_seconds, r.se_seconds, r.full_vector_seconds, r.mean_index
        );
        assert_eq!(r.trials, cfg.trials);
        assert!(r.mean_seconds > 0.0 && r.se_seconds >= 0.0);
        let chunks = cfg.total_dim.div_ceil(r.chunk_dim);
        let expected = chunks as f64 * r.mean_seconds;
        assert!((r.full_vector_seconds - expected).abs() <= 1e-12 * expected);
    }
    println!("reference full-vector figure: 1.3348 s (other hardware; logged, not asserted)");
    // Certification cost grows with chunk width, so per-chunk means must
    // increase across {10, 20, 40}; the gaps are large enough that timer
    // noise cannot invert them.
    let pass = records[0].mean_seconds < records[1].mean_seconds
        && records[1].mean_seconds < records[2].mean_seconds;
    report(
        "11 timing protocol",
        pass,
        &format!(
            "per-chunk means {:.2e} < {:.2e} < {:.2e} s for chunk_dim {{10, 20, 40}}",
            records[0].mean_seconds, records[1].mean_seconds, records[2].mean_seconds
        ),
    );
}
