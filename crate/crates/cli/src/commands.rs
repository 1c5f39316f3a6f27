use std::collections::BTreeMap;
use std::fs;

use anyhow::{Context, Result};
use bplab::gradients::grad_variance_with_entropy;
use bplab::groundstates::{make_compressor_dataset, CompressorDataset};
use bplab::observables::x_magnetization;
use bplab::training::{
    fmt_f64, pretrain_minimize_sc, train, GradientMode, PretrainConfig, TrainConfig, TrainReport, VarianceProbe,
};
use bplab::{CircuitLayout, CostFunction, CostFunctionF64, InitScheme, ObservableSum, ParamVectorF64, Pauli, RegisterSpec};
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::Output;

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn layout(cfg: &ExperimentConfig, n: usize, n_cost: usize, layers: usize) -> bplab::Result<CircuitLayout> {
    CircuitLayout::new(RegisterSpec::new(n, cfg.cost_offset, n_cost)?, layers)
}

/// Build the cost named by `spec` for `layout`. `dataset` supplies the
/// compressor states.
fn build_cost(
    spec: &str,
    layout: &CircuitLayout,
    dataset: Option<&CompressorDataset<f64>>,
) -> bplab::Result<CostFunctionF64> {
    let register = layout.register();
    let cost = match spec.split_once(':') {
        _ if spec == "default" => CostFunction::RawExpectation(ObservableSum::product(Pauli::Z, register.cost_qubits())?),
        _ if spec == "compressor" => {
            let data = dataset.ok_or_else(|| bplab::Error::Config("compressor cost without a dataset".into()))?;
            CostFunction::CompressorL1 { observable: x_magnetization(register), dataset: data.labeled_states() }
        }
        Some(("raw", obs)) => CostFunction::RawExpectation(obs.parse()?),
        Some(("abs", obs)) => CostFunction::AbsExpectation(obs.parse()?),
        _ => return Err(bplab::Error::Config(format!("unknown cost spec `{spec}`"))),
    };
    cost.validate(layout.n())?;
    Ok(cost)
}

/// Success threshold on the loss used by the training summary.
fn default_threshold(spec: &str) -> f64 {
    if spec.starts_with("abs:") || spec == "compressor" {
        0.1
    } else {
        -0.9
    }
}

fn slug(s: &str) -> String {
    let mut out = String::new();
    for ch in s.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch);
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn parse_schemes(cfg: &ExperimentConfig) -> Result<Vec<InitScheme>> {
    cfg.schemes.iter().map(|s| s.parse::<InitScheme>().with_context(|| format!("scheme `{s}`"))).collect()
}

/// Runs `f`; configuration-type failures become warnings and `None`.
fn skip_invalid<R>(out: &mut Output, what: &str, f: impl FnOnce() -> bplab::Result<R>) -> Result<Option<R>> {
    match f() {
        Ok(r) => Ok(Some(r)),
        Err(e @ (bplab::Error::Config(_) | bplab::Error::Argument(_) | bplab::Error::Topology(_))) => {
            out.warn(format!("skipping {what}: {e}"));
            Ok(None)
        }
        Err(e) => Err(e).context(format!("running {what}")),
    }
}

pub const SWEEP_HEADER: [&str; 10] =
    ["n", "n_C", "scheme", "L", "samples", "mean_O1", "var_O1", "var_stderr", "mean_S", "seed"];

pub fn variance_sweep(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let schemes = parse_schemes(cfg)?;
    let mut rows = Vec::new();
    for &n in &cfg.n {
        for &n_cost in &cfg.n_cost {
            for scheme in &schemes {
                for l in cfg.layers.values()? {
                    let what = format!("n={n} n_C={n_cost} scheme={scheme} L={l}");
                    let result = skip_invalid(out, &what, || {
                        let lay = layout(cfg, n, n_cost, l)?;
                        let cost = build_cost(&cfg.costs[0], &lay, None)?;
                        grad_variance_with_entropy(&lay, &cost, scheme, cfg.param_index, cfg.samples, cfg.seed)
                    })?;
                    let Some(r) = result else { continue };
                    log::info!("{what}: var {:.4e}", r.gradient.variance);
                    rows.push(vec![
                        n.to_string(),
                        n_cost.to_string(),
                        scheme.to_string(),
                        l.to_string(),
                        cfg.samples.to_string(),
                        fmt_f64(r.gradient.mean),
                        fmt_f64(r.gradient.variance),
                        fmt_f64(r.gradient.variance_stderr),
                        fmt_f64(r.mean_entropy),
                        cfg.seed.to_string(),
                    ]);
                }
            }
        }
    }
    if cfg.costs.len() > 1 {
        out.warn(format!("variance-sweep uses only the first cost `{}`", cfg.costs[0]));
    }
    let extra = json!({ "cost": cfg.costs[0], "param_index": cfg.param_index, "entropy": "default partition" });
    out.write_table("variance_sweep.csv", &SWEEP_HEADER, &rows, extra)?;
    Ok(())
}

pub const ENTROPY_HEADER: [&str; 6] = ["n", "L", "var_O1", "S_mean", "S_0", "S_plateau_estimate"];

pub fn variance_vs_entropy(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let schemes = parse_schemes(cfg)?;
    let n_cost = cfg.n_cost[0];
    if cfg.n_cost.len() > 1 {
        out.warn(format!("variance-vs-entropy uses only n_C={n_cost}"));
    }
    if schemes.len() > 1 {
        out.warn(format!("variance-vs-entropy uses only scheme {}", schemes[0]));
    }
    let mut layers = cfg.layers.values()?;
    layers.sort_unstable();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        let mut series = Vec::new();
        for &l in &layers {
            let what = format!("n={n} L={l}");
            let result = skip_invalid(out, &what, || {
                let lay = layout(cfg, n, n_cost, l)?;
                let cost = build_cost(&cfg.costs[0], &lay, None)?;
                grad_variance_with_entropy(&lay, &cost, &schemes[0], cfg.param_index, cfg.samples, cfg.seed)
            })?;
            if let Some(r) = result {
                series.push((l, r.gradient.variance, r.mean_entropy));
            }
        }
        let Some(first) = series.first() else { continue };
        let s0 = first.2;
        let q = (series.len() / 4).max(1);
        let plateau = series[series.len() - q..].iter().map(|r| r.2).sum::<f64>() / q as f64;
        for (l, var, s) in series {
            rows.push(vec![n.to_string(), l.to_string(), fmt_f64(var), fmt_f64(s), fmt_f64(s0), fmt_f64(plateau)]);
        }
    }
    let extra = json!({
        "n_C": n_cost,
        "scheme": schemes[0].to_string(),
        "cost": cfg.costs[0],
        "param_index": cfg.param_index,
        "S_0": "mean S at the smallest L",
        "S_plateau_estimate": "mean S over the last quarter of the L values",
    });
    out.write_table("variance_vs_entropy.csv", &ENTROPY_HEADER, &rows, extra)?;
    Ok(())
}

fn load_or_make_dataset(cfg: &ExperimentConfig, n: usize, out: &Output) -> Result<CompressorDataset<f64>> {
    if let Some(path) = &cfg.dataset {
        let text = fs::read_to_string(path).with_context(|| format!("reading dataset {path}"))?;
        return Ok(CompressorDataset::from_json(&text)?);
    }
    let rel = format!("compressor_n{n}.json");
    let path = out.path(&rel);
    let data = make_compressor_dataset::<f64>(n, cfg.n_g, cfg.seed, cfg.scale)?;
    fs::write(&path, data.to_json()).with_context(|| format!("writing {}", path.display()))?;
    Ok(data)
}

pub const SUMMARY_HEADER: [&str; 13] = [
    "n",
    "n_C",
    "L",
    "cost",
    "scheme",
    "mode",
    "seed",
    "epochs",
    "final_loss",
    "threshold",
    "epochs_to_threshold",
    "final_S",
    "stop",
];

/// Langevin subsets are drawn from the run seed so that runs differ only in
/// the seed they were given.
fn mode_for_run(mode: &GradientMode, seed: u64) -> GradientMode {
    match mode {
        GradientMode::Langevin(c) => GradientMode::Langevin(bplab::training::LangevinConfig { seed, ..c.clone() }),
        other => other.clone(),
    }
}

pub fn train_cmd(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let schemes = parse_schemes(cfg)?;
    let mut datasets = BTreeMap::new();
    let mut rows = Vec::new();
    for &n in &cfg.n {
        if cfg.costs.iter().any(|c| c == "compressor") {
            datasets.insert(n, load_or_make_dataset(cfg, n, out)?);
        }
        for &n_cost in &cfg.n_cost {
            for l in cfg.layers.values()? {
                for spec in &cfg.costs {
                    let threshold = cfg.threshold.unwrap_or_else(|| default_threshold(spec));
                    for scheme in &schemes {
                        for mode in &cfg.modes {
                            for seed in cfg.run_seeds() {
                                let tag = format!("n={n} n_C={n_cost} L={l} cost={spec} scheme={scheme} mode={} seed={seed}", mode.name());
                                let result = skip_invalid(out, &tag, || {
                                    let lay = layout(cfg, n, n_cost, l)?;
                                    let cost = build_cost(spec, &lay, datasets.get(&n))?;
                                    let theta0: ParamVectorF64 = bplab::init_params(&lay, scheme, seed)?;
                                    let tc = TrainConfig {
                                        epochs: cfg.epochs,
                                        optimizer: cfg.optimizer,
                                        mode: mode_for_run(mode, seed),
                                        target_loss: cfg.target_loss,
                                        ..TrainConfig::new(cfg.epochs, GradientMode::Plain)
                                    };
                                    Ok(train(&lay, &theta0, &cost, &tc)?.0)
                                })?;
                                let Some(report) = result else { continue };
                                log::info!("{tag}: final loss {:.4e} in {:.1}s", report.final_loss(), report.wall_time_secs);
                                let rel = format!(
                                    "train/n{n}_nc{n_cost}_L{l}_{}_{}_{}_seed{seed}.csv",
                                    slug(spec),
                                    scheme,
                                    mode.name()
                                );
                                write_trace(out, &rel, &report)?;
                                let last = report.records.last();
                                rows.push(vec![
                                    n.to_string(),
                                    n_cost.to_string(),
                                    l.to_string(),
                                    spec.clone(),
                                    scheme.to_string(),
                                    mode.name().to_string(),
                                    seed.to_string(),
                                    report.records.len().to_string(),
                                    fmt_f64(report.final_loss()),
                                    fmt_f64(threshold),
                                    report.first_epoch_where(|x| x <= threshold).map(|e| e.to_string()).unwrap_or_default(),
                                    opt(last.map(|r| r.entropy)),
                                    serde_json::to_value(report.stop)?.as_str().unwrap_or_default().to_string(),
                                ]);
                            }
                        }
                    }
                }
            }
        }
    }
    let extra = json!({ "threshold_rule": "loss <= threshold; defaults -0.9 for raw costs, 0.1 for abs and compressor" });
    out.write_table("train_summary.csv", &SUMMARY_HEADER, &rows, extra)?;
    Ok(())
}

fn write_trace(out: &Output, rel: &str, report: &TrainReport) -> Result<()> {
    let path = out.path(rel);
    fs::create_dir_all(path.parent().expect("trace files live in a subdirectory"))?;
    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    report.write_csv(file)?;
    let mut details = serde_json::to_value(report)?;
    if let Value::Object(m) = &mut details {
        m.remove("wall_time_secs");
    }
    out.write_sidecar(&path, &TrainReport::CSV_HEADER, details)
}

pub const PRETRAIN_HEADER: [&str; 5] = ["step", "S_C", "mixing", "var_O1", "var_stderr"];

pub fn pretrain_cmd(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    let schemes = parse_schemes(cfg)?;
    for &n in &cfg.n {
        for &n_cost in &cfg.n_cost {
            for l in cfg.layers.values()? {
                for scheme in &schemes {
                    for seed in cfg.run_seeds() {
                        let tag = format!("n={n} n_C={n_cost} L={l} scheme={scheme} seed={seed}");
                        let result = skip_invalid(out, &tag, || {
                            let lay = layout(cfg, n, n_cost, l)?;
                            let probe = VarianceProbe {
                                cost: build_cost(&cfg.costs[0], &lay, None)?,
                                param_index: cfg.param_index,
                                samples: cfg.probe_samples,
                                spread: cfg.probe_spread,
                                every: cfg.probe_every,
                                seed: cfg.seed,
                            };
                            let theta0: ParamVectorF64 = bplab::init_params(&lay, scheme, seed)?;
                            let pc = PretrainConfig { steps: cfg.steps, optimizer: cfg.optimizer, fd_step: cfg.fd_step };
                            pretrain_minimize_sc(&lay, &theta0, &pc, Some(&probe))
                        })?;
                        let Some(r) = result else { continue };
                        log::info!("{tag}: S_C {:.4} -> {:.4}", r.initial_sc, r.final_sc);
                        let rows: Vec<Vec<String>> = r
                            .records
                            .iter()
                            .map(|x| {
                                vec![
                                    x.step.to_string(),
                                    fmt_f64(x.s_c),
                                    fmt_f64(x.mixing),
                                    opt(x.var_o1),
                                    opt(x.var_stderr),
                                ]
                            })
                            .collect();
                        let extra = json!({
                            "n": n, "n_C": n_cost, "L": l, "scheme": scheme.to_string(), "run_seed": seed,
                            "variance_protocol": "O_1 variance over non-entangling angles perturbed by uniform(-spread, spread), entangling angles held; same probe seed at every probed step",
                            "best_step": r.best_step,
                            "initial_S_C": r.initial_sc,
                            "final_S_C": r.final_sc,
                            "final_probe": r.final_probe,
                            "final_params": r.theta.values(),
                        });
                        out.write_table(&format!("pretrain_n{n}_nc{n_cost}_L{l}_{scheme}_seed{seed}.csv"), &PRETRAIN_HEADER, &rows, extra)?;
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn compressor_data(cfg: &ExperimentConfig, out: &mut Output) -> Result<()> {
    for &n in &cfg.n {
        let what = format!("n={n}");
        let Some(data) =
            skip_invalid(out, &what, || make_compressor_dataset::<f64>(n, cfg.n_g, cfg.seed, cfg.scale))?
        else {
            continue;
        };
        let path = out.path(&format!("compressor_n{n}.json"));
        fs::write(&path, data.to_json()).with_context(|| format!("writing {}", path.display()))?;
        log::info!("{what}: {} ground states written to {}", data.len(), path.display());
    }
    Ok(())
}
