//! One function per CLI subcommand. Each runs its ensemble, writes its files
//! under the configured output directory and returns the in-memory report.

use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use dfs_scout_core::analytics::{
    confidence_band, failure_probability, two_peak_summary, ConfidenceBand, TwoPeakSummary,
};
use dfs_scout_core::channels::SyntheticChannel;
use dfs_scout_core::protocol::{
    discover_subspaces, evaluate_pair, identify_1d_dfs, identify_without_averaging, run_trials,
    verify_average_purity, PairOutcome, ProtocolConfig, ProtocolResult, ProtocolStatus,
    PuritySampling,
};
use dfs_scout_core::qmath::{fidelity, Ket, Subspace};
use dfs_scout_core::rng::{derive_seed, stream};
use dfs_scout_core::tomography::{Shots, TrialSettings};

use crate::config::{ChannelKind, ExperimentConfig};
use crate::output::{int, num, write_csv, write_json, Table, VERSION};
use crate::HarnessError;

/// Files written and whether the command's protocol result is a failure.
#[derive(Debug, Clone)]
pub struct Outcome<R> {
    pub report: R,
    pub files: Vec<PathBuf>,
    pub protocol_failed: bool,
}

fn prepare(cfg: &ExperimentConfig) -> Result<(PathBuf, String), HarnessError> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok((cfg.output_dir.clone(), cfg.hash()))
}

fn require_sswap(cfg: &ExperimentConfig, cmd: &str) -> Result<(), HarnessError> {
    if cfg.channel.kind == ChannelKind::Sswap {
        Ok(())
    } else {
        Err(HarnessError::Config(format!(
            "{cmd} needs channel.kind = \"sswap\""
        )))
    }
}

/// Seed of run `r` of sweep point `i`.
fn run_seed(master: u64, point: usize, r: usize) -> u64 {
    derive_seed(
        derive_seed(master, stream::RUN, point as u64),
        stream::RUN,
        r as u64,
    )
}

fn truth_fidelity(sc: &SyntheticChannel, k: Option<&Ket>) -> Option<f64> {
    let truth = sc.truth.one_dimensional()?;
    fidelity(k?, truth).ok()
}

// ---------------------------------------------------------------- identify

#[derive(Debug, Clone, Serialize)]
pub struct PairRow {
    pub outcome: PairOutcome,
    pub truth_fidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentifyReport {
    pub version: &'static str,
    pub config_hash: String,
    pub channel: String,
    pub truth_fidelity: Option<f64>,
    pub pair_fidelity_table: Option<Vec<Vec<f64>>>,
    #[serde(flatten)]
    pub result: ProtocolResult,
    /// Every pair of the `trials`-trial ensemble.
    #[serde(skip)]
    pub pairs: Vec<PairRow>,
}

pub fn identify(cfg: &ExperimentConfig) -> Result<Outcome<IdentifyReport>, HarnessError> {
    let (dir, hash) = prepare(cfg)?;
    let sc = cfg.build_channel(None)?;
    let settings = cfg.trial_settings();
    let seed = cfg.seeds.master;
    let d = sc.channel.dim();

    let result = identify_1d_dfs(&sc.channel, &settings, &cfg.protocol, seed)?;
    let trials = run_trials(&sc.channel, &settings, &cfg.protocol, seed, cfg.trials)?;
    let index_pairs: Vec<(usize, usize)> = (0..trials.len())
        .flat_map(|a| (a + 1..trials.len()).map(move |b| (a, b)))
        .collect();
    let pairs = index_pairs
        .par_iter()
        .map(|&(a, b)| {
            let outcome = evaluate_pair(&trials, a, b, &cfg.protocol)?;
            let truth_fidelity = truth_fidelity(&sc, Some(&outcome.estimate));
            Ok(PairRow {
                outcome,
                truth_fidelity,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut t = Table::new(["trial"]);
    for i in 0..d {
        t.header.push(format!("projector_re_{i}"));
        t.header.push(format!("projector_im_{i}"));
    }
    for i in 0..d {
        t.header.push(format!("eigenvalue_{i}"));
    }
    t.header.extend(
        [
            "eigenvalue_ratio",
            "degenerate",
            "settings",
            "mle_iterations",
        ]
        .map(String::from),
    );
    for (k, tr) in trials.iter().enumerate() {
        let mut row = vec![int(k)];
        for z in tr.projector.amplitudes().iter() {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.extend(tr.eigensystem.values().into_iter().map(num));
        row.push(num(tr.diagnostics.eigenvalue_ratio));
        row.push(int(dfs_scout_core::protocol::trial_is_degenerate(
            tr,
            &cfg.protocol,
        )));
        row.push(int(tr.settings()));
        row.push(tr.diagnostics.mle_iterations.map(int).unwrap_or_default());
        t.push(row);
    }

    let mut c = Table::new(["pair", "trial_a", "trial_b"]);
    for i in 0..d {
        c.header.push(format!("amp_{i}"));
    }
    for i in 1..d {
        c.header.push(format!("phase_{i}"));
    }
    c.header.extend(
        [
            "f_largest",
            "f_second",
            "margin",
            "degenerate_a",
            "degenerate_b",
            "ambiguous",
            "clean",
            "averaged",
            "truth_fidelity",
        ]
        .map(String::from),
    );
    for (k, p) in pairs.iter().enumerate() {
        let o = &p.outcome;
        let (amps, phases) = o.estimate.amplitudes_and_phases();
        let mut row = vec![int(k), int(o.matched.trial_a), int(o.matched.trial_b)];
        row.extend(amps.into_iter().map(num));
        row.extend(
            phases[1..]
                .iter()
                .map(|&ph| num(wrap_phase(ph - phases[0]))),
        );
        row.extend([
            num(o.matched.f_largest),
            num(o.matched.f_second),
            num(o.matched.margin()),
            int(o.degenerate_a),
            int(o.degenerate_b),
            int(o.ambiguous),
            int(o.is_clean()),
            int(o.averaged),
            num(p.truth_fidelity),
        ]);
        c.push(row);
    }

    let report = IdentifyReport {
        version: VERSION,
        config_hash: hash.clone(),
        channel: sc.channel.label().to_string(),
        truth_fidelity: truth_fidelity(&sc, result.dfs_1d.as_ref()),
        pair_fidelity_table: result.chosen_pair.as_ref().map(|p| p.matched.table.clone()),
        result,
        pairs,
    };
    let files = vec![
        write_json(&dir, "result.json", &report)?,
        write_csv(&dir, "trials.csv", &t, &hash)?,
        write_csv(&dir, "dfs_components.csv", &c, &hash)?,
    ];
    let protocol_failed = report.result.status == ProtocolStatus::Failed;
    Ok(Outcome {
        report,
        files,
        protocol_failed,
    })
}

fn wrap_phase(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let y = (x + std::f64::consts::PI).rem_euclid(two_pi) - std::f64::consts::PI;
    if y == -std::f64::consts::PI {
        std::f64::consts::PI
    } else {
        y
    }
}

// ------------------------------------------------------------- sweep-swap

#[derive(Debug, Clone, Serialize)]
pub struct SweepRun {
    pub p: f64,
    pub run: usize,
    pub status: ProtocolStatus,
    pub fidelity: Option<f64>,
    pub trials: usize,
    pub settings_used: u64,
    pub f_largest: Option<f64>,
    pub f_second: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepBand {
    pub p: f64,
    pub identified: usize,
    pub failed: usize,
    pub band: ConfidenceBand,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
    /// From the noiseless ensemble. Failed runs contribute the estimate of
    /// their best-margin pair.
    pub bands: Vec<SweepBand>,
}

/// The identified vector, or for a failed run the best-margin pair's estimate.
fn best_estimate(res: &ProtocolResult) -> Option<&Ket> {
    res.dfs_1d
        .as_ref()
        .or(res.chosen_pair.as_ref().map(|c| &c.estimate))
}

fn sweep_ensemble(
    cfg: &ExperimentConfig,
    settings: &TrialSettings,
) -> Result<Vec<SweepRun>, HarnessError> {
    let jobs: Vec<(usize, f64, usize)> = cfg
        .sweep
        .p_list
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| (0..cfg.sweep.runs).map(move |r| (i, p, r)))
        .collect();
    jobs.par_iter()
        .map(|&(i, p, r)| {
            let seed = run_seed(cfg.seeds.master, i, r);
            let sc = cfg.build_channel_with_p(p, Some(seed))?;
            let res = identify_1d_dfs(&sc.channel, settings, &cfg.protocol, seed)?;
            Ok(SweepRun {
                p,
                run: r,
                status: res.status,
                fidelity: truth_fidelity(&sc, best_estimate(&res)),
                trials: res.trial_records.len(),
                settings_used: res.measurement_settings_used,
                f_largest: res.chosen_pair.as_ref().map(|c| c.matched.f_largest),
                f_second: res.chosen_pair.as_ref().map(|c| c.matched.f_second),
            })
        })
        .collect()
}

pub fn sweep_swap(cfg: &ExperimentConfig) -> Result<Outcome<SweepReport>, HarnessError> {
    require_sswap(cfg, "sweep-swap")?;
    if cfg.sweep.runs < dfs_scout_core::analytics::MIN_BAND_SAMPLES {
        return Err(HarnessError::Config(format!(
            "sweep.runs = {} is below the {} runs a confidence band needs",
            cfg.sweep.runs,
            dfs_scout_core::analytics::MIN_BAND_SAMPLES
        )));
    }
    let (dir, hash) = prepare(cfg)?;
    let settings = cfg.trial_settings();
    let runs = sweep_ensemble(cfg, &settings)?;
    let noiseless = if settings.shots.is_infinite() {
        runs.clone()
    } else {
        sweep_ensemble(cfg, &TrialSettings::noiseless())?
    };

    let mut bands = Vec::new();
    for &p in &cfg.sweep.p_list {
        let here: Vec<&SweepRun> = noiseless.iter().filter(|r| r.p == p).collect();
        let fids: Vec<f64> = here.iter().filter_map(|r| r.fidelity).collect();
        let failed = here.iter().filter(|r| !r.status.is_success()).count();
        let band = confidence_band(&fids)?;
        bands.push(SweepBand {
            p,
            identified: here.len() - failed,
            failed,
            band,
        });
    }

    let mut s = Table::new([
        "p",
        "run",
        "status",
        "fidelity",
        "trials",
        "settings_used",
        "f_largest",
        "f_second",
    ]);
    for r in &runs {
        s.push(vec![
            num(r.p),
            int(r.run),
            status_name(r.status),
            num(r.fidelity),
            int(r.trials),
            int(r.settings_used),
            num(r.f_largest),
            num(r.f_second),
        ]);
    }
    let mut b = Table::new([
        "p",
        "identified",
        "failed",
        "median",
        "lo95",
        "lo63",
        "hi63",
        "hi95",
    ]);
    for x in &bands {
        b.push(vec![
            num(x.p),
            int(x.identified),
            int(x.failed),
            num(x.band.median),
            num(x.band.band95.lo),
            num(x.band.band63.lo),
            num(x.band.band63.hi),
            num(x.band.band95.hi),
        ]);
    }
    let files = vec![
        write_csv(&dir, "sweep.csv", &s, &hash)?,
        write_csv(&dir, "bands.csv", &b, &hash)?,
    ];
    Ok(Outcome {
        report: SweepReport { runs, bands },
        files,
        protocol_failed: false,
    })
}

fn status_name(s: ProtocolStatus) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

// ----------------------------------------------------------- purity-sweep

#[derive(Debug, Clone, Serialize)]
pub struct PurityRun {
    pub p: f64,
    pub run: usize,
    pub dfs_purity: f64,
    pub baseline_purity: f64,
    /// Against the true 3D block.
    pub subspace_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityPoint {
    pub p: f64,
    pub dfs_purity_mean: f64,
    pub dfs_purity_min: f64,
    pub dfs_purity_max: f64,
    pub baseline_purity_mean: f64,
    pub subspace_fidelity_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PurityReport {
    pub runs: Vec<PurityRun>,
    pub points: Vec<PurityPoint>,
}

pub fn purity_sweep(cfg: &ExperimentConfig) -> Result<Outcome<PurityReport>, HarnessError> {
    require_sswap(cfg, "purity-sweep")?;
    let (dir, hash) = prepare(cfg)?;
    let settings = cfg.trial_settings();
    let pc = &cfg.purity;
    let jobs: Vec<(usize, f64, usize)> = pc
        .p_list
        .iter()
        .enumerate()
        .flat_map(|(i, &p)| (0..pc.runs).map(move |r| (i, p, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(i, p, r)| {
            let seed = run_seed(cfg.seeds.master, i, r);
            let sc = cfg.build_channel_with_p(p, Some(seed))?;
            let est = identify_without_averaging(&sc.channel, &settings, &cfg.protocol, seed, 3)?;
            let sample_seed = derive_seed(seed, stream::SAMPLES, 0);
            let dfs_purity = verify_average_purity(
                &sc.channel,
                &est.complement,
                pc.samples,
                &settings,
                PuritySampling::Haar,
                sample_seed,
            )?;
            let full = Subspace::full(sc.channel.dim())?;
            let baseline_purity = verify_average_purity(
                &sc.channel,
                &full,
                pc.samples,
                &settings,
                PuritySampling::Separable,
                derive_seed(seed, stream::SAMPLES, 1),
            )?;
            let subspace_fidelity = est.complement.fidelity(&sc.truth.blocks[1])?;
            Ok(PurityRun {
                p,
                run: r,
                dfs_purity,
                baseline_purity,
                subspace_fidelity,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let points: Vec<PurityPoint> = pc
        .p_list
        .iter()
        .map(|&p| {
            let here: Vec<&PurityRun> = runs.iter().filter(|r| r.p == p).collect();
            let dfs: Vec<f64> = here.iter().map(|r| r.dfs_purity).collect();
            let base: Vec<f64> = here.iter().map(|r| r.baseline_purity).collect();
            let fid: Vec<f64> = here.iter().map(|r| r.subspace_fidelity).collect();
            PurityPoint {
                p,
                dfs_purity_mean: mean(&dfs),
                dfs_purity_min: dfs.iter().copied().fold(f64::INFINITY, f64::min),
                dfs_purity_max: dfs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                baseline_purity_mean: mean(&base),
                subspace_fidelity_mean: mean(&fid),
            }
        })
        .collect();

    let mut t = Table::new([
        "p",
        "runs",
        "samples",
        "dfs_purity_mean",
        "dfs_purity_min",
        "dfs_purity_max",
        "baseline_purity_mean",
        "subspace_fidelity_mean",
    ]);
    for x in &points {
        t.push(vec![
            num(x.p),
            int(pc.runs),
            int(pc.samples),
            num(x.dfs_purity_mean),
            num(x.dfs_purity_min),
            num(x.dfs_purity_max),
            num(x.baseline_purity_mean),
            num(x.subspace_fidelity_mean),
        ]);
    }
    let files = vec![write_csv(&dir, "purity.csv", &t, &hash)?];
    Ok(Outcome {
        report: PurityReport { runs, points },
        files,
        protocol_failed: false,
    })
}

// -------------------------------------------------------- failure-scaling

#[derive(Debug, Clone, Serialize)]
pub struct FailurePoint {
    pub n: u64,
    pub runs: usize,
    pub failures: usize,
    pub empirical_rate: f64,
    pub predicted_rate: f64,
    pub ratio: f64,
    pub within_factor_3: bool,
    pub syndrome_enabled_rate: f64,
    pub peaks: TwoPeakSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureReport {
    pub points: Vec<FailurePoint>,
    pub strictly_decreasing: bool,
    /// Syndrome-free fidelities per `N`, in `n_list` order.
    #[serde(skip)]
    pub fidelities: Vec<Vec<f64>>,
}

/// Runs with no estimate count as fidelity 0.
fn ensemble_fidelities(
    cfg: &ExperimentConfig,
    protocol: &ProtocolConfig,
    point: usize,
    shots: u64,
) -> Result<Vec<f64>, HarnessError> {
    let method = cfg.trial_settings().method;
    let settings = TrialSettings::new(Shots::Finite(shots), method);
    (0..cfg.failure.runs)
        .into_par_iter()
        .map(|r| {
            let seed = run_seed(cfg.seeds.master, point, r);
            let sc = cfg.build_channel_with_p(cfg.failure.p, Some(seed))?;
            let res = identify_1d_dfs(&sc.channel, &settings, protocol, seed)?;
            Ok(truth_fidelity(&sc, res.dfs_1d.as_ref()).unwrap_or(0.0))
        })
        .collect()
}

pub fn failure_scaling(cfg: &ExperimentConfig) -> Result<Outcome<FailureReport>, HarnessError> {
    require_sswap(cfg, "failure-scaling")?;
    let (dir, hash) = prepare(cfg)?;
    let disabled = ProtocolConfig {
        syndromes_enabled: false,
        ..cfg.protocol.clone()
    };
    let enabled = ProtocolConfig {
        syndromes_enabled: true,
        ..cfg.protocol.clone()
    };
    let mut points = Vec::new();
    let mut all = Vec::new();
    for (i, &n) in cfg.failure.n_list.iter().enumerate() {
        let fids = ensemble_fidelities(cfg, &disabled, i, n)?;
        let with = ensemble_fidelities(cfg, &enabled, i, n)?;
        let failures = fids.iter().filter(|&&f| f < 0.1).count();
        let runs = fids.len();
        let empirical_rate = failures as f64 / runs as f64;
        let predicted_rate = failure_probability(3, n);
        let ratio = empirical_rate / predicted_rate;
        points.push(FailurePoint {
            n,
            runs,
            failures,
            empirical_rate,
            predicted_rate,
            ratio,
            within_factor_3: (1.0 / 3.0..=3.0).contains(&ratio),
            syndrome_enabled_rate: with.iter().filter(|&&f| f < 0.1).count() as f64
                / with.len() as f64,
            peaks: two_peak_summary(&fids)?,
        });
        all.push(fids);
    }
    let strictly_decreasing = points
        .windows(2)
        .all(|w| w[1].empirical_rate < w[0].empirical_rate);

    let mut t = Table::new([
        "N",
        "runs",
        "failures",
        "empirical_rate",
        "predicted_rate",
        "ratio",
        "within_factor_3",
        "decreasing",
        "syndrome_enabled_rate",
        "mass_low",
        "mass_mid",
        "mass_high",
    ]);
    for x in &points {
        t.push(vec![
            int(x.n),
            int(x.runs),
            int(x.failures),
            num(x.empirical_rate),
            num(x.predicted_rate),
            num(x.ratio),
            int(x.within_factor_3),
            int(strictly_decreasing),
            num(x.syndrome_enabled_rate),
            num(x.peaks.mass_low),
            num(x.peaks.mass_mid),
            num(x.peaks.mass_high),
        ]);
    }
    let files = vec![write_csv(&dir, "failure.csv", &t, &hash)?];
    Ok(Outcome {
        report: FailureReport {
            points,
            strictly_decreasing,
            fidelities: all,
        },
        files,
        protocol_failed: false,
    })
}

// --------------------------------------------------------------- discover

#[derive(Debug, Clone, Serialize)]
pub struct DiscoverReport {
    pub version: &'static str,
    pub config_hash: String,
    pub channel: String,
    pub dims: Vec<usize>,
    /// Best subspace fidelity of each discovered subspace against the true blocks.
    pub truth_fidelities: Vec<f64>,
    pub full_process_tomography_settings: u64,
    #[serde(flatten)]
    pub result: ProtocolResult,
}

pub fn discover(cfg: &ExperimentConfig) -> Result<Outcome<DiscoverReport>, HarnessError> {
    let (dir, hash) = prepare(cfg)?;
    let sc = cfg.build_channel(None)?;
    let d = sc.channel.dim();
    let result = discover_subspaces(
        &sc.channel,
        &cfg.trial_settings(),
        &cfg.protocol,
        cfg.seeds.master,
    )?;
    let truth_fidelities = result
        .subspaces
        .iter()
        .map(|s| {
            sc.truth
                .blocks
                .iter()
                .map(|b| b.fidelity(s))
                .try_fold(0.0f64, |m, f| f.map(|f| m.max(f)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let full_pt = (d as u64).pow(4);
    let report = DiscoverReport {
        version: VERSION,
        config_hash: hash.clone(),
        channel: sc.channel.label().to_string(),
        dims: result.subspaces.iter().map(|s| s.dim()).collect(),
        truth_fidelities,
        full_process_tomography_settings: full_pt,
        result,
    };
    let mut t = Table::new([
        "d",
        "block_dims",
        "status",
        "trials",
        "settings_used",
        "full_pt_settings",
    ]);
    let truth_dims = sc.truth.block_dims();
    t.push(vec![
        int(d),
        truth_dims
            .iter()
            .map(|k| k.to_string())
            .collect::<Vec<_>>()
            .join(";"),
        status_name(report.result.status),
        int(report.result.trial_records.len()),
        int(report.result.measurement_settings_used),
        int(full_pt),
    ]);
    let files = vec![
        write_json(&dir, "subspaces.json", &report)?,
        write_csv(&dir, "budget.csv", &t, &hash)?,
    ];
    let protocol_failed = report.result.status == ProtocolStatus::Partial;
    Ok(Outcome {
        report,
        files,
        protocol_failed,
    })
}
