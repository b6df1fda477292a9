//! End-to-end pipeline simulation and the seeded Monte Carlo drivers
//! behind the report commands.
//!
//! Trials run on a worker pool; every trial derives its own named rng
//! streams from (master seed, trial index), and results are collected
//! in trial order before aggregation, so output bytes do not depend on
//! scheduling.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::attack1::{
    clamp_crossover, expected_wrong_selected, pattern_count, run_attack1, Attack1Outcome,
    TogglePatterns,
};
use crate::attack2::{
    compute_thresholds, estimate_p1, run_attack2, smatrix_entry, Attack2Params, Attack2Status,
};
use crate::channel::{apply_bsc, cascade, sample_noise, secrecy_capacity};
use crate::checks::CheckSystem;
use crate::config::{ExperimentConfig, Mode};
use crate::bits::BitSequence;
use crate::error::Result;
use crate::exitchart::{bin_records, gap_report, trace_to_records, ExitChart, ExitRecord, Verdict};
use crate::gf2::{generate_sequence, solve_initial_state, ConnectionPolynomial, LfsrKey};
use crate::info::{binary_entropy, closed_form_mi, empirical_mi};
use crate::rng::stream;

/// One simulated transmission: what the cipher produced and what the
/// eavesdropper works with.
#[derive(Clone)]
pub struct PipelineSample {
    pub key: LfsrKey,
    /// Noiseless generator output.
    pub a: BitSequence,
    /// Keystream: a through the correlation channel.
    pub z: BitSequence,
    /// Plaintext, uniform random.
    pub m: BitSequence,
    /// Ciphertext m XOR z.
    pub cipher: BitSequence,
    /// Keystream the eavesdropper recovers under known plaintext.
    pub y: BitSequence,
}

/// Simulates key generation, encryption and eavesdropper recovery for
/// one trial. The residual-error model is grounded per sample: the
/// same error pattern applied to the ciphertext, with the plaintext
/// stripped, must reproduce y exactly.
pub fn simulate_pipeline(
    cfg: &ExperimentConfig,
    poly: &ConnectionPolynomial,
    trial: u64,
) -> Result<PipelineSample> {
    let mut krng = stream(cfg.seed, trial, "key");
    let key = LfsrKey::random(&mut krng, poly.degree());
    let a = generate_sequence(poly, &key, cfg.n)?;
    let mut zrng = stream(cfg.seed, trial, "keystream-noise");
    let z = apply_bsc(&a, cfg.p1, &mut zrng)?;
    let mut mrng = stream(cfg.seed, trial, "plaintext");
    let m = sample_noise(&mut mrng, cfg.n, 0.5)?;
    let cipher = m.xor(&z);
    let mut wrng = stream(cfg.seed, trial, "wiretap-noise");
    let y = apply_bsc(&z, cfg.p2, &mut wrng)?;

    // replay the identical residual pattern on the ciphertext: the
    // decoder view (cipher + residual errors) XOR m must equal y
    let mut replay = stream(cfg.seed, trial, "wiretap-noise");
    let rw = apply_bsc(&cipher, cfg.p2, &mut replay)?;
    assert!(
        rw.xor(&m) == y,
        "known-plaintext identity violated in trial {trial}"
    );

    Ok(PipelineSample {
        key,
        a,
        z,
        m,
        cipher,
        y,
    })
}

fn build_checks(cfg: &ExperimentConfig, poly: &ConnectionPolynomial) -> CheckSystem {
    match cfg.max_squarings {
        Some(mx) => CheckSystem::derive(poly, cfg.n, mx),
        None => CheckSystem::derive_full(poly, cfg.n),
    }
}

fn model_parameter(cfg: &ExperimentConfig, checks: &CheckSystem, y: &BitSequence) -> Result<f64> {
    match cfg.mode {
        Mode::Reproduce => Ok(clamp_crossover(cfg.p1)),
        Mode::Realistic => estimate_p1(y, checks),
    }
}

/// First line of every output file: which run produced it.
pub fn header_comment(config_hash: u64, master_seed: u64) -> String {
    format!("# config_hash=0x{config_hash:016x} master_seed={master_seed}\n")
}

/// Midpoint median of an ascending-sorted slice.
pub(crate) fn median_sorted(sorted: &[u64]) -> f64 {
    assert!(!sorted.is_empty());
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

/// Per-trial outcome row of the iterative attack.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub status: Attack2Status,
    pub rounds: usize,
    pub initial_errors: usize,
    pub final_errors: usize,
    /// Errors removed by the first round; absent when no round ran.
    pub first_round_correction: Option<i64>,
}

/// Aggregated iterative-attack experiment.
pub struct Attack2Report {
    pub config_hash: u64,
    pub master_seed: u64,
    pub trials: u64,
    pub success_rate: f64,
    pub mean_rounds: f64,
    /// Mean over trials (with at least one round) of errors removed by
    /// round one; negative when the first round makes things worse.
    pub first_round_mean_correction: f64,
    pub verdict: Verdict,
    pub chart: ExitChart,
    pub outcomes: Vec<TrialOutcome>,
}

#[derive(Serialize)]
struct Attack2Summary<'a> {
    config_hash: String,
    master_seed: u64,
    trials: u64,
    success_rate: f64,
    mean_rounds: f64,
    first_round_mean_correction: f64,
    verdict: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossover_bin: Option<usize>,
}

impl Attack2Report {
    pub fn exit_chart_csv(&self) -> String {
        let mut out = header_comment(self.config_hash, self.master_seed);
        out.push_str(&self.chart.to_csv());
        out
    }

    pub fn trials_csv(&self) -> String {
        let mut out = header_comment(self.config_hash, self.master_seed);
        out.push_str(
            "trial,status,rounds,initial_errors,final_errors,first_round_correction\n",
        );
        for o in &self.outcomes {
            let correction = o
                .first_round_correction
                .map_or(String::new(), |c| c.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                o.trial,
                o.status.label(),
                o.rounds,
                o.initial_errors,
                o.final_errors,
                correction
            );
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let doc = Attack2Summary {
            config_hash: format!("0x{:016x}", self.config_hash),
            master_seed: self.master_seed,
            trials: self.trials,
            success_rate: self.success_rate,
            mean_rounds: self.mean_rounds,
            first_round_mean_correction: self.first_round_mean_correction,
            verdict: self.verdict.label(),
            crossover_bin: self.verdict.crossover_bin(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("summary serializes");
        text.push('\n');
        text
    }

    /// Writes exit_chart.csv, trials.csv and summary.json into dir.
    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("exit_chart.csv"), self.exit_chart_csv())?;
        std::fs::write(dir.join("trials.csv"), self.trials_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json())?;
        Ok(())
    }
}

/// Runs the configured number of seeded iterative attacks, pools their
/// round records into the transfer chart and aggregates outcomes.
pub fn run_attack2_exit(cfg: &ExperimentConfig) -> Result<Attack2Report> {
    let poly = cfg.validate()?;
    let checks = build_checks(cfg, &poly);

    let per_trial: Vec<(TrialOutcome, Vec<ExitRecord>)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| -> Result<(TrialOutcome, Vec<ExitRecord>)> {
            let sample = simulate_pipeline(cfg, &poly, trial)?;
            let p_model = model_parameter(cfg, &checks, &sample.y)?;
            let thresholds = compute_thresholds(p_model, &checks, cfg.n);
            let params = Attack2Params::new(
                cfg.alpha,
                thresholds,
                cfg.max_rounds,
                cfg.reset.reset_value(p_model),
            );
            let trace = run_attack2(&sample.y, &sample.a, &checks, &params, p_model);
            let records = trace_to_records(&trace, trial);
            let outcome = TrialOutcome {
                trial,
                status: trace.status,
                rounds: trace.num_rounds(),
                initial_errors: trace.initial_errors,
                final_errors: trace.final_errors(),
                first_round_correction: trace
                    .rounds
                    .first()
                    .map(|r| trace.initial_errors as i64 - r.errors as i64),
            };
            Ok((outcome, records))
        })
        .collect::<Result<_>>()?;

    let trials = per_trial.len() as u64;
    let successes = per_trial
        .iter()
        .filter(|(o, _)| o.status == Attack2Status::Converged)
        .count();
    let mean_rounds =
        per_trial.iter().map(|(o, _)| o.rounds as f64).sum::<f64>() / trials as f64;
    let corrections: Vec<i64> = per_trial
        .iter()
        .filter_map(|(o, _)| o.first_round_correction)
        .collect();
    let first_round_mean_correction = if corrections.is_empty() {
        0.0
    } else {
        corrections.iter().sum::<i64>() as f64 / corrections.len() as f64
    };
    let records: Vec<ExitRecord> = per_trial
        .iter()
        .flat_map(|(_, r)| r.iter().copied())
        .collect();
    let chart = bin_records(&records, cfg.d);
    let verdict = gap_report(&chart, cfg.min_occupied_bins);

    Ok(Attack2Report {
        config_hash: cfg.config_hash(),
        master_seed: cfg.seed,
        trials,
        success_rate: successes as f64 / trials as f64,
        mean_rounds,
        first_round_mean_correction,
        verdict,
        chart,
        outcomes: per_trial.into_iter().map(|(o, _)| o).collect(),
    })
}

/// Default aggregate-channel grid for the trial-count sweep.
pub const DEFAULT_P_PRIME_GRID: [f64; 8] = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40];

/// Aggregate over one grid point of the sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p_prime: f64,
    pub mi_closed_form: f64,
    pub median_trials: f64,
    pub mean_trials: f64,
    pub success_rate: f64,
    /// Analytic search-order estimate for this operating point.
    pub trial_order_estimate: f64,
}

pub struct Attack1SweepReport {
    pub config_hash: u64,
    pub master_seed: u64,
    pub trials_per_point: u64,
    pub rows: Vec<SweepRow>,
}

impl Attack1SweepReport {
    pub fn sweep_csv(&self) -> String {
        let mut out = header_comment(self.config_hash, self.master_seed);
        out.push_str(
            "p_prime,mi_closed_form,median_trials,mean_trials,success_rate,estimate_2^(H(rbar/k)k)\n",
        );
        for row in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                row.p_prime,
                row.mi_closed_form,
                row.median_trials,
                row.mean_trials,
                row.success_rate,
                row.trial_order_estimate
            );
        }
        out
    }

    pub fn write_all(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("sweep.csv"), self.sweep_csv())?;
        Ok(())
    }
}

/// Sweeps the aggregate channel parameter and measures the trials the
/// one-shot attack needs at each point, alongside the analytic order
/// estimate from the same code path the attack uses.
pub fn run_attack1_sweep(cfg: &ExperimentConfig) -> Result<Attack1SweepReport> {
    let poly = cfg.validate()?;
    let checks = build_checks(cfg, &poly);
    let grid: Vec<f64> = cfg
        .p_prime_grid
        .clone()
        .unwrap_or_else(|| DEFAULT_P_PRIME_GRID.to_vec());

    let units: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|gi| (0..cfg.trials).map(move |t| (gi, t)))
        .collect();
    let outcomes: Vec<(usize, Attack1Outcome)> = units
        .into_par_iter()
        .map(|(gi, trial)| -> Result<(usize, Attack1Outcome)> {
            let p_prime = grid[gi];
            let mut krng = stream(cfg.seed, trial, &format!("sweep{gi}:key"));
            let key = LfsrKey::random(&mut krng, poly.degree());
            let a = generate_sequence(&poly, &key, cfg.n)?;
            let mut nrng = stream(cfg.seed, trial, &format!("sweep{gi}:noise"));
            let y = apply_bsc(&a, p_prime, &mut nrng)?;
            let p_attack = match cfg.mode {
                Mode::Reproduce => p_prime,
                Mode::Realistic => estimate_p1(&y, &checks)?,
            };
            let outcome = run_attack1(&y, &checks, p_attack, &key, &poly, cfg.max_trials)?;
            Ok((gi, outcome))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(grid.len());
    for (gi, &p_prime) in grid.iter().enumerate() {
        let group: Vec<&Attack1Outcome> = outcomes
            .iter()
            .filter(|(g, _)| *g == gi)
            .map(|(_, o)| o)
            .collect();
        let mut counts: Vec<u64> = group.iter().map(|o| o.trials).collect();
        counts.sort_unstable();
        let successes = group.iter().filter(|o| o.success).count();
        let (_, _, order) =
            expected_wrong_selected(poly.degree(), checks.mean_weight(), p_prime, cfg.n, &checks);
        rows.push(SweepRow {
            p_prime,
            mi_closed_form: closed_form_mi(p_prime, poly.degree()),
            median_trials: median_sorted(&counts),
            mean_trials: counts.iter().sum::<u64>() as f64 / counts.len() as f64,
            success_rate: successes as f64 / group.len() as f64,
            trial_order_estimate: order,
        });
    }

    Ok(Attack1SweepReport {
        config_hash: cfg.config_hash(),
        master_seed: cfg.seed,
        trials_per_point: cfg.trials,
        rows,
    })
}

/// Key figures of the configured channel as key=value lines.
pub fn info_report(cfg: &ExperimentConfig) -> Result<String> {
    let poly = cfg.validate()?;
    let p_prime = cfg.p_prime();
    let mut out = header_comment(cfg.config_hash(), cfg.seed);
    let _ = writeln!(out, "p1={}", cfg.p1);
    let _ = writeln!(out, "p2={}", cfg.p2);
    let _ = writeln!(out, "p_prime={p_prime}");
    let _ = writeln!(
        out,
        "mi_closed_form={}",
        closed_form_mi(p_prime, poly.degree())
    );
    let _ = writeln!(out, "mi_bound={}", 1.0 - binary_entropy(p_prime));
    if let (Some(p_main), Some(p_wire)) = (cfg.p_main, cfg.p_wire) {
        let _ = writeln!(
            out,
            "secrecy_capacity={}",
            secrecy_capacity(p_main, p_wire)
        );
    }
    Ok(out)
}

/// Small-instance oracles runnable anywhere in seconds. Returns one
/// (name, passed) pair per oracle.
pub fn selftest() -> Vec<(&'static str, bool)> {
    let mut results: Vec<(&'static str, bool)> = Vec::new();

    results.push(("cascade-exact", cascade(0.2, 0.1) == 0.26));

    let fold_ok = (1..=64).all(|t| {
        let p1 = 0.23f64;
        let direct = (1.0 + (1.0 - 2.0 * p1).powi(t)) / 2.0;
        let via_matrix = smatrix_entry(&vec![1.0 - p1; t as usize]).unwrap();
        (direct - via_matrix).abs() < 1e-12
    });
    results.push(("fold-recursion", fold_ok));

    let soundness_ok = (|| {
        let poly = crate::gf2::vetted_poly(7)?;
        let mut rng = stream(7, 0, "selftest-key");
        let key = LfsrKey::random(&mut rng, 7);
        let a = generate_sequence(&poly, &key, 300).ok()?;
        let checks = CheckSystem::derive_full(&poly, 300);
        let eval = checks.evaluate(&a);
        Some(eval.failures == 0)
    })()
    .unwrap_or(false);
    results.push(("check-soundness", soundness_ok));

    let solver_ok = (|| {
        let poly = crate::gf2::vetted_poly(6)?;
        let mut rng = stream(6, 0, "selftest-solve");
        for _ in 0..20 {
            let key = LfsrKey::random(&mut rng, 6);
            let a = generate_sequence(&poly, &key, 80).ok()?;
            let positions = [3usize, 11, 20, 34, 55, 71];
            let values: Vec<bool> = positions.iter().map(|&p| a.get(p)).collect();
            let solved = solve_initial_state(&positions, &values, &poly).ok()?;
            if solved != key {
                return Some(false);
            }
        }
        Some(true)
    })()
    .unwrap_or(false);
    results.push(("state-solver", solver_ok));

    let toggles_ok = {
        let enumerated = TogglePatterns::new(10)
            .take_while(|pat| pat.count_ones() <= 3)
            .count() as u128;
        enumerated == pattern_count(10, 3)
    };
    results.push(("toggle-count", toggles_ok));

    let mi_ok = (|| {
        let poly = crate::gf2::vetted_poly(9)?;
        let mut krng = stream(9, 0, "selftest-mi-key");
        let key = LfsrKey::random(&mut krng, 9);
        let a = generate_sequence(&poly, &key, 20_000).ok()?;
        let mut nrng = stream(9, 0, "selftest-mi-noise");
        let y = apply_bsc(&a, 0.25, &mut nrng).ok()?;
        let empirical = empirical_mi(&a, &y).ok()?;
        let closed = closed_form_mi(0.25, 9);
        Some((empirical - closed).abs() < 0.02)
    })()
    .unwrap_or(false);
    results.push(("mi-estimator", mi_ok));

    results
}
