//! Manifest-driven repeated runs with CSV output.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use nnfalsify_core::io::report::{aggregate, format_vector, AggregateRecord, RunRecord};
use nnfalsify_core::{Error, Network, SafetyProperty};

use crate::{load_pair, search, BatchArgs};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Pair {
    pub network: PathBuf,
    pub property: PathBuf,
}

/// Parses a manifest; relative paths resolve against `base`.
pub(crate) fn parse_manifest(text: &str, base: &Path) -> Result<Vec<Pair>, Error> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (net, prop) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: format!("expected `network_path, property_path`, got `{line}`"),
        })?;
        let (net, prop) = (net.trim(), prop.trim());
        if net.is_empty() || prop.is_empty() || prop.contains(',') {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `network_path, property_path`, got `{line}`"),
            });
        }
        pairs.push(Pair {
            network: base.join(net),
            property: base.join(prop),
        });
    }
    if pairs.is_empty() {
        return Err(Error::Config("manifest lists no pairs".into()));
    }
    Ok(pairs)
}

type LoadedPair = (String, String, Result<(Network, SafetyProperty), String>);

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

pub(crate) fn run_batch(args: &BatchArgs) -> Result<u8, Error> {
    let text = std::fs::read_to_string(&args.manifest).map_err(|source| Error::Io {
        path: args.manifest.clone(),
        source,
    })?;
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let pairs = parse_manifest(&text, base)?;
    if args.jobs == 0 {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }

    let loaded: Vec<LoadedPair> = pairs
        .iter()
        .map(|p| {
            let loaded = load_pair(&p.network, &p.property).map_err(|e| e.to_string());
            let prop_name = match &loaded {
                Ok((_, prop)) if !prop.name.is_empty() => prop.name.clone(),
                _ => stem(&p.property),
            };
            (prop_name, stem(&p.network), loaded)
        })
        .collect();

    let tasks: Vec<(usize, usize)> = (0..loaded.len())
        .flat_map(|p| (0..args.runs).map(move |r| (p, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, run)| {
                let (prop_name, net_name, loaded) = &loaded[p];
                let seed = args.seed.wrapping_add(run as u64);
                let mut rec = RunRecord {
                    property: prop_name.clone(),
                    network: net_name.clone(),
                    run,
                    verdict: "error".into(),
                    time_s: 0.0,
                    samples: 0,
                    seed,
                    detail: None,
                };
                let outcome = match loaded {
                    Ok((net, prop)) => {
                        search(net, prop, &args.search, seed).map_err(|e| e.to_string())
                    }
                    Err(msg) => Err(msg.clone()),
                };
                match outcome {
                    Ok(o) => {
                        rec.verdict = o.verdict.to_string();
                        rec.time_s = o.stats.wall_time.as_secs_f64();
                        rec.samples = o.stats.total_samples;
                        rec.detail = o.counterexample.map(|c| format_vector(&c.input));
                    }
                    Err(msg) => rec.detail = Some(msg),
                }
                rec
            })
            .collect()
    });

    let csv = render_csv(&records, &aggregate(&records), !args.no_timing)?;
    match &args.out {
        Some(path) => std::fs::write(path, csv).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?,
        None => print!("{csv}"),
    }
    Ok(0)
}

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::Config(format!("csv output: {e}"))
}

/// Per-run rows, a blank line, then the aggregate block.
pub(crate) fn render_csv(
    records: &[RunRecord],
    aggregates: &[AggregateRecord],
    timing: bool,
) -> Result<String, Error> {
    let time = |t: f64| {
        if timing {
            format!("{t:.6}")
        } else {
            String::new()
        }
    };

    let mut runs = csv::Writer::from_writer(Vec::new());
    runs.write_record([
        "property",
        "network",
        "run",
        "verdict",
        "time_s",
        "samples",
        "seed",
        "counterexample",
    ])
    .map_err(csv_err)?;
    for r in records {
        runs.write_record([
            r.property.clone(),
            r.network.clone(),
            r.run.to_string(),
            r.verdict.clone(),
            time(r.time_s),
            r.samples.to_string(),
            r.seed.to_string(),
            r.detail.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }

    let mut agg = csv::Writer::from_writer(Vec::new());
    agg.write_record([
        "property",
        "network",
        "total_runs",
        "falsified",
        "mean_time_s",
        "mean_samples",
    ])
    .map_err(csv_err)?;
    for a in aggregates {
        agg.write_record([
            a.property.clone(),
            a.network.clone(),
            a.total_runs.to_string(),
            a.falsified.to_string(),
            a.mean_time_s.map(time).unwrap_or_default(),
            a.mean_samples
                .map(|m| format!("{m:.2}"))
                .unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }

    let mut out = String::from_utf8(runs.into_inner().map_err(csv_err)?).map_err(csv_err)?;
    out.push('\n');
    out.push_str(&String::from_utf8(agg.into_inner().map_err(csv_err)?).map_err(csv_err)?);
    Ok(out)
}
