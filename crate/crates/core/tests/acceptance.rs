//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture` to see the
//! lines as they complete.

mod common;

use std::process::Command;
use std::time::Instant;

use num_rational::BigRational;

use convbounds::bounds::{ber_low, ber_up, curve, p_burst, BurstQuery};
use convbounds::codec::{GeneratorSpec, Trellis, Validation};
use convbounds::simulator::{run_campaign, BerBasis, CampaignParams, ChannelConfig};
use convbounds::spectrum::{
    active_distance_profile, compute_spectrum, oracle_spectrum, summarize,
};

fn check(name: &str, pass: bool) {
    println!("acceptance {name}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion failed: {name}");
}

fn code(spec: &str) -> GeneratorSpec {
    GeneratorSpec::parse(spec, Validation::Strict).unwrap()
}

/// Spectrum with the tool's default caps: J_max=40, W_max=w_min+10.
fn default_spectrum(spec: &GeneratorSpec) -> convbounds::spectrum::ActiveSpectrum {
    let trellis = Trellis::new(spec);
    let w_min = *active_distance_profile(&trellis, 40).values().min().unwrap();
    compute_spectrum(&trellis, &spec.spec_string(), 40, w_min + 10).unwrap()
}

#[test]
fn acceptance_1_spectrum_oracle_equivalence() {
    let mut pass = true;
    for name in ["(13,17)", "(13,15)"] {
        let spec = code(name);
        let trellis = Trellis::new(&spec);
        let dp = compute_spectrum(&trellis, name, 12, u32::MAX).unwrap();
        let oracle = oracle_spectrum(&trellis, name, 12).unwrap();
        pass &= dp.per_length == oracle.per_length;
    }
    check("1 (spectrum equals exhaustive oracle, J_max=12, uncapped)", pass);
}

#[test]
fn acceptance_2_free_distance_consistency() {
    let mut pass = true;
    for name in ["(13,17)", "(13,15)"] {
        let spec = code(name);
        let trellis = Trellis::new(&spec);
        let spectrum = compute_spectrum(&trellis, name, 12, u32::MAX).unwrap();
        let w_min = summarize(&spectrum).unwrap().w_min;
        let brute = common::brute_force_free_distance(&trellis, 12);
        pass &= w_min == brute;
    }
    check("2 (w_min equals brute-force free distance)", pass);
}

#[test]
fn acceptance_3_formula_fidelity() {
    let mut pass = true;
    for s in 1..=8u32 {
        for w in 1..=2 * s {
            for &p in &[0.01f64, 0.1, 0.3] {
                let got = p_burst(&BurstQuery { s, w, p, n: 2 }).unwrap();
                let exact =
                    common::rational_p_burst(s, w, 2, &BigRational::from_float(p).unwrap());
                if !common::within_rel(got, &exact, 1e-10) {
                    eprintln!("p_burst mismatch at s={s} w={w} p={p}");
                    pass = false;
                }
            }
        }
    }
    check("3 (log-domain p_burst vs exact rational, rel err <= 1e-10)", pass);
}

fn sandwich_holds(spec: &GeneratorSpec, p: f64, frames: u64) -> bool {
    let spectrum = default_spectrum(spec);
    let summary = summarize(&spectrum).unwrap();
    let low = ber_low(p, &summary, spectrum.m as u32, spectrum.n as u32).unwrap();
    let up = ber_up(p, &spectrum, None).unwrap();
    let report = run_campaign(
        spec,
        &ChannelConfig { p, seed: 7 },
        &CampaignParams {
            frames,
            frame_len_tuples: 1000,
            ber_basis: BerBasis::CodewordBits,
        },
    )
    .unwrap();
    let (ci_low, ci_high) = report.ci95;
    let ok = ci_low >= low && ci_high <= up;
    if !ok {
        eprintln!(
            "sandwich failed for {} at p={p}: [{low:e}, {up:e}] vs CI [{ci_low:e}, {ci_high:e}]",
            spec.spec_string()
        );
    }
    ok
}

#[test]
fn acceptance_4_sandwich_reproduction() {
    let mut pass = true;
    let c1317 = code("(13,17)");
    for p in [0.02, 0.05] {
        pass &= sandwich_holds(&c1317, p, 200_000);
    }
    pass &= sandwich_holds(&code("(13,15)"), 0.05, 200_000);
    check(
        "4 (Monte-Carlo CI within [ber_low, ber_up], 2e5 frames of 1000 tuples)",
        pass,
    );
}

#[test]
fn acceptance_5_truncation_convergence() {
    let spectrum = default_spectrum(&code("(13,17)"));
    let at_40 = ber_up(0.01, &spectrum, Some(40)).unwrap();
    let at_20 = ber_up(0.01, &spectrum, Some(20)).unwrap();
    let rel = (at_40 - at_20).abs() / at_40;
    let pass = rel < 0.05;
    if !pass {
        eprintln!("ber_up(J=40)={at_40:e} vs ber_up(J=20)={at_20:e}: rel diff {rel:e}");
    }
    check("5 (ber_up J_max 20 vs 40 within 5% at p=0.01)", pass);
}

#[test]
fn acceptance_6_memory_six_feasibility() {
    let spec = code("(117,155)");
    let trellis = Trellis::new(&spec);

    let start = Instant::now();
    let w_min = *active_distance_profile(&trellis, 40).values().min().unwrap();
    let spectrum = compute_spectrum(&trellis, "(117,155)", 40, w_min + 8).unwrap();
    let elapsed = start.elapsed();
    let mut pass = elapsed.as_secs() < 60;
    if !pass {
        eprintln!("spectrum took {elapsed:?}");
    }

    let grid = [0.02, 0.03, 0.05];
    let bounds = curve(&spectrum, &grid, "test", &[]).unwrap();
    pass &= bounds.ber_low.iter().zip(&bounds.ber_up).all(|(l, u)| l <= u);

    let report = run_campaign(
        &spec,
        &ChannelConfig { p: 0.03, seed: 7 },
        &CampaignParams {
            frames: 100_000,
            frame_len_tuples: 1000,
            ber_basis: BerBasis::CodewordBits,
        },
    )
    .unwrap();
    let (ci_low, ci_high) = report.ci95;
    let ok = ci_low >= bounds.ber_low[1] && ci_high <= bounds.ber_up[1];
    if !ok {
        eprintln!(
            "(117,155) p=0.03: CI [{ci_low:e}, {ci_high:e}] vs bounds [{:e}, {:e}]",
            bounds.ber_low[1], bounds.ber_up[1]
        );
    }
    pass &= ok;
    check("6 (memory-6 spectrum < 60 s; bounds; 1e5-frame CI sandwich at p=0.03)", pass);
}

#[test]
fn acceptance_7_zero_crossover_is_exactly_zero() {
    let spec = code("(13,17)");
    let spectrum = default_spectrum(&spec);
    let summary = summarize(&spectrum).unwrap();
    let low = ber_low(0.0, &summary, 3, 2).unwrap();
    let up = ber_up(0.0, &spectrum, None).unwrap();
    let report = run_campaign(
        &spec,
        &ChannelConfig { p: 0.0, seed: 7 },
        &CampaignParams {
            frames: 50,
            frame_len_tuples: 1000,
            ber_basis: BerBasis::CodewordBits,
        },
    )
    .unwrap();
    let pass = low == 0.0 && up == 0.0 && report.ber == 0.0;
    check("7 (p=0 gives ber_low = ber_up = simulated BER = 0 exactly)", pass);
}

#[test]
fn acceptance_8_simulate_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_convbounds"))
            .current_dir(dir.path())
            .env("RAYON_NUM_THREADS", threads)
            .args([
                "simulate",
                "--code",
                "(13,17)",
                "--pgrid",
                "0.05",
                "--frames",
                "500",
                "--frame-len",
                "200",
                "--seed",
                "42",
                "--out",
                out,
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let single = run("1", "single.csv");
    let multi = run("4", "multi.csv");
    check(
        "8 (cmd_simulate byte-identical across worker counts)",
        single == multi,
    );
}
