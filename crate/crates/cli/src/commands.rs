use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::ArgMatches;
use sparsecomm::analysis::{
    bound_report, excess_kurtosis, histogram, pi_shape_check, pi_shape_rows, randk_expectation_check,
};
use sparsecomm::bench::{run_bench, BenchConfig, BenchKind, DEFAULT_MAX_BYTES};
use sparsecomm::data::{load_idx, synth_dataset_with, Dataset};
use sparsecomm::model::{Activation, Network};
use sparsecomm::report;
use sparsecomm::rng::{gaussian_vector, sample_vector, Dist};
use sparsecomm::train::{train, StepDecay, TrainConfig, TrainLog};
use sparsecomm::{vector_stats, CompressorKind, CompressorSpec, KSpec};

use crate::settings::Settings;
use crate::{CliError, CliResult};

pub fn dispatch(m: &ArgMatches) -> CliResult<()> {
    let (name, sub) = m.subcommand().expect("subcommand required");
    let s = Settings::resolve(name, sub)?;
    match name {
        "bound" => bound(&s),
        "hist" => hist(&s),
        "train" => run_train(&s),
        "bench" => bench(&s),
        "randk-check" => randk_check(&s),
        _ => unreachable!("clap rejects unknown subcommands"),
    }
}

fn out_dir(s: &Settings) -> CliResult<PathBuf> {
    let dir = PathBuf::from(s.raw("output.dir").unwrap_or("out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

fn write_file(dir: &Path, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> CliResult<PathBuf> {
    let path = dir.join(name);
    let fail = |e: io::Error| CliError::Runtime(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(&path).map_err(fail)?);
    f(&mut w).and_then(|_| w.flush()).map_err(fail)?;
    Ok(path)
}

macro_rules! say {
    ($s:expr, $($arg:tt)*) => {
        if !$s.quiet {
            println!($($arg)*);
        }
    };
}

fn bound(s: &Settings) -> CliResult<()> {
    let seed = s.seed("bound.seed")?;
    let d = s.usize("bound.d")?;
    let dist: Dist = s.parse("bound.dist", s.str("bound.dist")?)?;
    let ks = s.usize_list("bound.ks")?;
    let dir = out_dir(s)?;

    let u = sample_vector(dist, d, seed);
    let rows = bound_report(&u, &ks)?;
    let shape = pi_shape_check(&u)?;
    let pi_rows = pi_shape_rows(&u)?;
    write_file(&dir, "bound_report.csv", |w| report::write_bound_report(w, &rows))?;
    write_file(&dir, "pi_shape.csv", |w| report::write_pi_shape(w, &pi_rows))?;

    say!(s, "{:>10} {:>14} {:>14} {:>14}", "k", "exact", "(1-k/d)^2", "1-k/d");
    for r in &rows {
        say!(s, "{:>10} {:>14.8} {:>14.8} {:>14.8}", r.k, r.exact_ratio, r.tight_bound, r.loose_bound);
    }
    say!(
        s,
        "pi^2 shape: line_violations={} convex_violations={} skip_head={} stride={}",
        shape.line_violations,
        shape.convex_violations,
        shape.skip_head,
        shape.stride
    );
    Ok(())
}

fn randk_check(s: &Settings) -> CliResult<()> {
    let seed = s.seed("randk.seed")?;
    let d = s.usize("randk.d")?;
    let k = s.usize("randk.k")?;
    let trials = s.usize("randk.trials")?;
    let dir = out_dir(s)?;

    let u = gaussian_vector(d, seed);
    let r = randk_expectation_check(&u, k, trials, seed)?;
    let rel = (r.mean_ratio - r.target).abs() / r.target.max(f64::MIN_POSITIVE);
    write_file(&dir, "randk_check.csv", |w| {
        writeln!(w, "d,k,trials,mean_ratio,target,rel_err")?;
        writeln!(w, "{d},{k},{trials},{},{},{rel}", r.mean_ratio, r.target)
    })?;
    say!(s, "mean_ratio={} target={} rel_err={rel:.3e} trials={trials}", r.mean_ratio, r.target);
    Ok(())
}

fn bench(s: &Settings) -> CliResult<()> {
    let seed = s.seed("bench.seed")?;
    let kinds = s
        .str_list("bench.kinds")?
        .iter()
        .map(|k| s.parse::<BenchKind>("bench.kinds", k))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = BenchConfig {
        dims: s.usize_list("bench.dims")?,
        k_ratio: s.f64("bench.k_ratio")?,
        kinds,
        repeats: s.usize("bench.repeats")?,
        seed,
        max_bytes: s.opt_usize("bench.max_bytes").map_or(DEFAULT_MAX_BYTES, |b| b as u128),
    };
    let dir = out_dir(s)?;
    let rows = run_bench(&cfg)?;
    write_file(&dir, "bench.csv", |w| report::write_bench(w, &rows))?;
    say!(s, "{:>12} {:>9} {:>10} {:>12} {:>7} {:>9} {:>7}", "d", "k", "kind", "median_ms", "passes", "selected", "recall");
    for r in &rows {
        say!(
            s,
            "{:>12} {:>9} {:>10} {:>12.3} {:>7} {:>9} {:>7.4}",
            r.d,
            r.k,
            r.kind.to_string(),
            r.wall_ms,
            r.full_passes,
            r.selected_count,
            r.recall
        );
    }
    Ok(())
}

fn load_data(s: &Settings) -> CliResult<Dataset> {
    let data = match (s.raw("data.images"), s.raw("data.labels")) {
        (Some(img), Some(lbl)) => load_idx(Path::new(img), Path::new(lbl))?,
        (None, None) => synth_dataset_with(
            s.seed("data.synth.seed")?,
            s.usize("data.synth.n")?,
            s.usize("data.synth.m")?,
            s.usize("data.synth.c")?,
            s.f64("data.synth.separation")?,
        )?,
        _ => return Err(CliError::Usage("data.images and data.labels must be given together".into())),
    };
    Ok(match s.opt_usize("data.limit") {
        Some(n) => data.take(n),
        None => data,
    })
}

/// Training configuration from `train.*` / `compressor.*`, with
/// `default_kind` used when `compressor.kind` is unset.
fn train_config(s: &Settings, data: &Dataset, default_kind: &str) -> CliResult<TrainConfig> {
    let seed = s.seed("train.seed")?;
    let layers = if s.has("train.layers") {
        s.usize_list("train.layers")?
    } else {
        vec![data.features_dim(), 100, data.classes()]
    };
    let act: Activation = s.parse("train.activation", s.str("train.activation")?)?;
    let network = Network::new(layers, act)?;
    let mut cfg = TrainConfig::new(network, s.usize("train.workers")?, s.f64("train.lr")?, seed);
    cfg.momentum = s.f64("train.momentum")?;
    cfg.epochs = s.usize("train.epochs")?;
    cfg.batch_size = s.usize("train.batch_size")?;
    cfg.max_iters = s.opt_usize("train.max_iters");
    cfg.lr_decay = match (s.opt_usize("train.lr_decay_every"), s.opt_f64("train.lr_decay_factor")) {
        (Some(every_epochs), Some(factor)) => Some(StepDecay { every_epochs, factor }),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "train.lr_decay_every and train.lr_decay_factor must be given together".into(),
            ))
        }
    };
    let kind = s.raw("compressor.kind").unwrap_or(default_kind);
    cfg.compressor = match kind {
        "dense" | "none" => None,
        other => {
            let kind: CompressorKind = s.parse("compressor.kind", other)?;
            let k = match s.opt_usize("compressor.k") {
                Some(k) => KSpec::Count(k),
                None => KSpec::Ratio(s.f64("compressor.k_ratio")?),
            };
            let cseed = if s.has("compressor.seed") { s.seed("compressor.seed")? } else { seed };
            Some(
                CompressorSpec::new(kind, k)
                    .with_seed(cseed)
                    .with_sample_ratio(s.f64("compressor.sample_ratio")?)
                    .with_refine_iters(s.usize("compressor.refine_iters")?),
            )
        }
    };
    Ok(cfg)
}

fn run_train(s: &Settings) -> CliResult<()> {
    s.seed("train.seed")?;
    let data = load_data(s)?;
    let cfg = train_config(s, &data, "dense")?;
    let dir = out_dir(s)?;
    let log = train(&cfg, &data, None)?;
    write_file(&dir, "train_log.csv", |w| report::write_train_log(w, &log))?;
    write_file(&dir, "epoch_log.csv", |w| report::write_epoch_log(w, &log))?;
    summarize(s, &log);
    Ok(())
}

fn summarize(s: &Settings, log: &TrainLog) {
    let comm = log.iters.last().map_or(0, |r| r.comm_count_cum);
    let kept = log.k.map_or("dense".to_string(), |k| format!("k={k}"));
    say!(s, "d={} {kept} workers={} iterations={}", log.dim, log.workers, log.iters.len());
    for e in &log.epochs {
        say!(s, "epoch {:>3}  loss {:.6}  acc {:.4}", e.epoch, e.eval_loss, e.eval_acc);
    }
    say!(s, "communicated gradients: {comm}");
}

fn hist(s: &Settings) -> CliResult<()> {
    s.seed("train.seed")?;
    let mut iters = s.usize_list("hist.iters")?;
    iters.sort_unstable();
    iters.dedup();
    let bins = s.usize("hist.bins")?;
    let data = load_data(s)?;
    let mut cfg = train_config(s, &data, "topk")?;
    let last = *iters.last().expect("non-empty list");
    let per_epoch = cfg.iters_per_epoch(data.len()).max(1);
    cfg.epochs = cfg.epochs.max(last / per_epoch + 1);
    cfg.max_iters = Some(last + 1);
    cfg.snapshot_iters = iters.iter().copied().collect();
    let dir = out_dir(s)?;
    let log = train(&cfg, &data, None)?;

    say!(s, "{:>8} {:>14} {:>14} {:>12}", "iter", "mean", "std", "ex_kurtosis");
    for snap in &log.snapshots {
        let h = histogram(&snap.values, bins)?;
        write_file(&dir, &format!("hist_iter{}.csv", snap.iter), |w| report::write_histogram(w, &h))?;
        let st = vector_stats(&snap.values)?;
        let kurt = excess_kurtosis(&snap.values)?;
        say!(s, "{:>8} {:>14.6e} {:>14.6e} {:>12.4}", snap.iter, st.mean, st.std, kurt);
    }
    Ok(())
}
