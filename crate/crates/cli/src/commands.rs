//! One function per subcommand.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use amdc::adjacency::{assemble, center, WeightVector, WeightWindow};
use amdc::baseline::{distance_matrix, hier_fit_matrix, upgma};
use amdc::cluster::{fit, ClusterModel, FitConfig};
use amdc::decomp::{contributions, decompose, ContributionMatrix};
use amdc::seqcore::{
    concat_weeks, filter_dataset, hwto_mapping, ingest_episodes, map_states, read_episodes_csv,
    read_sequences_csv, write_sequences_csv, Alphabet, DaySpan, FilterRules, SequenceSet,
};
use amdc::simbench::{
    build_scenario, dataset_rng, lift_seed, run_benchmark, AmdcMethod, BenchmarkConfig,
    ClusterMethod, HierarchicalMethod, Overlap, ScenarioKey, CATALOG_VERSION,
};
use amdc::stability::{stability, DEFAULT_REPLICATES};
use anyhow::{Context, Result};
use chrono::Weekday;
use serde_json::{json, Value};

use crate::config::{
    parse_clock, parse_grid, usage, BaselineOpts, BenchmarkOpts, ClusterOpts, Command, ContribOpts,
    IngestOpts, RenderOpts, SimulateOpts, StabilityOpts,
};
use crate::output::{csv_num, csv_opt, json_num, json_opt, OutDir};
use crate::render::{render_clusters, Palette, RenderOptions};

pub const DEFAULT_P_GRID: &str = "2:10";
pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_QUANTUM: u32 = 5;

pub fn run(command: &Command) -> Result<()> {
    match command {
        Command::Ingest(o) => ingest(o),
        Command::Cluster(o) => cluster(o),
        Command::Baseline(o) => baseline(o),
        Command::Simulate(o) => simulate(o),
        Command::Benchmark(o) => benchmark(o),
        Command::Stability(o) => stability_cmd(o),
        Command::Contrib(o) => contrib(o),
        Command::Render(o) => render(o),
    }
}

fn out_dir(path: &Option<PathBuf>) -> Result<OutDir> {
    let path = path
        .as_ref()
        .ok_or_else(|| usage("--out-dir is required"))?;
    OutDir::create(path)
}

fn existing_file(path: &Option<PathBuf>, flag: &str) -> Result<File> {
    let path = path
        .as_ref()
        .ok_or_else(|| usage(format!("{flag} is required")))?;
    if !path.is_file() {
        return Err(usage(format!("input file not found: {}", path.display())));
    }
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn parse_alphabet(spec: &Option<String>) -> Result<Option<Alphabet>> {
    spec.as_deref()
        .map(|s| Alphabet::parse(s).map_err(|e| usage(format!("--alphabet: {e}"))))
        .transpose()
}

fn read_set(input: &Option<PathBuf>, alphabet: &Option<String>) -> Result<SequenceSet> {
    let file = existing_file(input, "--input")?;
    let path = input.as_deref().unwrap_or(Path::new(""));
    read_sequences_csv(BufReader::new(file), parse_alphabet(alphabet)?)
        .with_context(|| format!("reading sequences from {}", path.display()))
}

/// `HH:MM-HH:MM=w` windows into per-transition weights.
fn weight_vector(
    specs: &[String],
    quantum: Option<u32>,
    seq_len: usize,
) -> Result<Option<WeightVector>> {
    if specs.is_empty() {
        return Ok(None);
    }
    let windows = specs
        .iter()
        .map(|spec| {
            let (window, w) = spec
                .split_once('=')
                .ok_or_else(|| usage(format!("weight `{spec}` is not HH:MM-HH:MM=w")))?;
            let w: f64 = w
                .trim()
                .parse()
                .map_err(|_| usage(format!("weight `{spec}` has a non-numeric value")))?;
            WeightWindow::parse(window, w).map_err(|e| usage(format!("--weight: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let quantum = quantum.unwrap_or(DEFAULT_QUANTUM);
    Ok(Some(WeightVector::from_windows(
        &windows, seq_len, quantum,
    )?))
}

fn fit_config(
    h_grid: &Option<String>,
    p_grid: &Option<String>,
    restarts: Option<usize>,
    seed: Option<u64>,
) -> Result<FitConfig> {
    let restarts = restarts.unwrap_or(DEFAULT_RESTARTS);
    if restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    Ok(FitConfig {
        h_grid: h_grid.as_deref().map(parse_grid).transpose()?,
        p_grid: parse_grid(p_grid.as_deref().unwrap_or(DEFAULT_P_GRID))?,
        restarts,
        seed: seed.unwrap_or(0),
    })
}

fn assignment_rows<'a>(
    set: &'a SequenceSet,
    assignments: &'a [usize],
) -> impl Iterator<Item = [String; 2]> + 'a {
    set.sequences()
        .iter()
        .zip(assignments)
        .map(|(s, k)| [s.id.clone(), k.to_string()])
}

fn write_svgs(
    out: &mut OutDir,
    set: &SequenceSet,
    assignments: &[usize],
    separator_every: Option<usize>,
) -> Result<Vec<String>> {
    let mut opts = RenderOptions::for_length(set.seq_len());
    if let Some(every) = separator_every {
        opts.separator_every = (every > 0).then_some(every);
    }
    let palette = Palette::for_symbols(set.alphabet().symbols());
    let rendered = render_clusters(set, assignments, &palette, &opts)?;
    for panel in &rendered.panels {
        out.write(&format!("cluster_{}.svg", panel.cluster), &panel.svg)?;
    }
    for w in &rendered.warnings {
        eprintln!("warning: {w}");
    }
    Ok(rendered.warnings)
}

fn matrix_json(entries: &[f64], m: usize) -> Value {
    Value::Array(
        entries
            .chunks(m)
            .map(|row| Value::Array(row.iter().map(|&x| json_num(x)).collect()))
            .collect(),
    )
}

fn ingest(o: &IngestOpts) -> Result<()> {
    let file = existing_file(&o.input, "--input")?;
    let mut out = out_dir(&o.out_dir)?;
    let episodes = read_episodes_csv(BufReader::new(file)).context("reading episodes")?;
    let quantum = o.quantum.unwrap_or(DEFAULT_QUANTUM);
    let span = DaySpan {
        start_minute: o
            .day_start
            .as_deref()
            .map(parse_clock)
            .transpose()?
            .unwrap_or(0),
        end_minute: o
            .day_end
            .as_deref()
            .map(parse_clock)
            .transpose()?
            .unwrap_or(1440),
    };
    if o.hwto == Some(true) && o.state_map.is_some() {
        return Err(usage("--hwto and --state-map are mutually exclusive"));
    }
    let raw = ingest_episodes(&episodes, None, quantum, span)?;
    let days = raw.len();
    let mapped = if o.hwto == Some(true) {
        let mapping = hwto_mapping(raw.alphabet().symbols().iter().map(String::as_str));
        map_states(&raw, &mapping, Some(&Alphabet::parse("HWTO")?))?
    } else if o.state_map.is_some() {
        let file = existing_file(&o.state_map, "--state-map")?;
        map_states(&raw, &read_state_map(file)?, None)?
    } else {
        raw
    };
    out.mark("discretise");

    let nonhome_states = match &o.nonhome_states {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => mapped
            .alphabet()
            .symbols()
            .iter()
            .filter(|s| s.as_str() != "H")
            .cloned()
            .collect(),
    };
    let rules = FilterRules {
        drop_missing: o.keep_missing != Some(true),
        max_nonhome_fraction: o.max_nonhome,
        nonhome_states,
        max_per_group: o.max_per_group,
        seed: o.seed.unwrap_or(0),
    };
    let mut omitted_groups = 0;
    let set = if o.week == Some(true) {
        let days = parse_weekdays(o.week_days.as_deref().unwrap_or("mon-fri"))?;
        let daily = filter_dataset(
            &mapped,
            &FilterRules {
                max_per_group: None,
                ..rules.clone()
            },
        )?;
        let weeks = concat_weeks(&daily, &days)?;
        omitted_groups = weeks.omitted_groups;
        filter_dataset(
            &weeks.set,
            &FilterRules {
                drop_missing: false,
                max_nonhome_fraction: None,
                ..rules.clone()
            },
        )?
    } else {
        filter_dataset(&mapped, &rules)?
    };
    out.mark("filter");

    let mut bytes = Vec::new();
    write_sequences_csv(&set, &mut bytes)?;
    out.write("sequences.csv", bytes)?;
    let run = json!({
        "days_discretised": days,
        "sequences_written": set.len(),
        "seq_len": set.seq_len(),
        "alphabet": set.alphabet().symbols(),
        "groups_without_full_week": omitted_groups,
    });
    out.finish("ingest", o, run)
}

fn read_state_map(file: File) -> Result<BTreeMap<String, String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["label", "state"] {
        return Err(usage("state map header must be `label,state`"));
    }
    let mut map = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        map.insert(record[0].to_string(), record[1].to_string());
    }
    Ok(map)
}

/// `mon-fri` or `sat,sun`.
fn parse_weekdays(spec: &str) -> Result<Vec<Weekday>> {
    let day =
        |s: &str| Weekday::from_str(s.trim()).map_err(|_| usage(format!("unknown weekday `{s}`")));
    if let Some((a, b)) = spec.split_once('-') {
        let (first, last) = (day(a)?, day(b)?);
        let mut days = vec![first];
        while *days.last().expect("nonempty") != last {
            days.push(days.last().expect("nonempty").succ());
        }
        Ok(days)
    } else {
        spec.split(',').map(day).collect()
    }
}

fn model_json(set: &SequenceSet, model: &ClusterModel) -> Value {
    let m = set.n_states();
    let mut sizes = vec![0usize; model.p];
    for &k in &model.assignments {
        sizes[k] += 1;
    }
    let centers: Vec<Value> = model
        .centers
        .chunks(model.h)
        .map(|c| Value::Array(c.iter().map(|&x| json_num(x)).collect()))
        .collect();
    let means: Vec<Value> = model
        .cluster_means
        .iter()
        .map(|a| matrix_json(a.entries(), m))
        .collect();
    let r = &model.report;
    json!({
        "h": model.h,
        "p": model.p,
        "seed": model.seed,
        "restarts": model.restarts,
        "degenerate": model.degenerate,
        "n_sequences": set.len(),
        "seq_len": set.seq_len(),
        "alphabet": set.alphabet().symbols(),
        "metric": {
            "d": json_opt(r.d),
            "d_w": json_num(r.d_w),
            "d_b": json_num(r.d_b),
            "wss": json_num(r.wss),
            "bss": json_num(r.bss),
            "d_standard": json_opt(r.d_standard),
        },
        "cluster_sizes": sizes,
        "centers": centers,
        "cluster_mean_adjacency": means,
        "grand_mean_adjacency": matrix_json(model.grand_mean.entries(), m),
        "singular_values": model.projection.s.iter().map(|&x| json_num(x)).collect::<Vec<_>>(),
    })
}

/// Grid, restarts and seed after defaults are applied.
fn resolved(config: &FitConfig, model: &ClusterModel) -> Value {
    let mut h_grid: Vec<usize> = model.grid.iter().map(|e| e.h).collect();
    h_grid.dedup();
    json!({
        "h_grid": h_grid,
        "p_grid": config.p_grid,
        "restarts": config.restarts,
        "seed": config.seed,
    })
}

fn metrics_rows(model: &ClusterModel) -> Vec<Vec<String>> {
    model
        .grid
        .iter()
        .map(|e| {
            let r = &e.report;
            vec![
                e.h.to_string(),
                e.p.to_string(),
                csv_opt(r.d),
                csv_num(r.d_w),
                csv_num(r.d_b),
                csv_num(r.wss),
                csv_num(r.bss),
                csv_opt(r.d_standard),
            ]
        })
        .collect()
}

const METRICS_HEADER: [&str; 8] = ["h", "p", "d", "d_w", "d_b", "wss", "bss", "d_standard"];

fn cluster(o: &ClusterOpts) -> Result<()> {
    let set = read_set(&o.input, &o.alphabet)?;
    let config = fit_config(&o.h_grid, &o.p_grid, o.restarts, o.seed)?;
    let weights = weight_vector(&o.weights, o.quantum, set.seq_len())?;
    let mut out = out_dir(&o.out_dir)?;
    out.mark("read");
    let model = fit(&set, weights.as_ref(), &config)?;
    out.mark("fit");
    if model.degenerate {
        eprintln!(
            "warning: no candidate separates the sequences; all between-cluster distances are zero"
        );
    }
    out.write_csv(
        "assignments.csv",
        &["id", "cluster"],
        assignment_rows(&set, &model.assignments),
    )?;
    out.write_json("model.json", &model_json(&set, &model))?;
    out.write_csv("metrics.csv", &METRICS_HEADER, metrics_rows(&model))?;
    let warnings = if o.render != Some(false) {
        write_svgs(&mut out, &set, &model.assignments, None)?
    } else {
        Vec::new()
    };
    out.mark("write");
    let run = json!({
        "h": model.h,
        "p": model.p,
        "resolved": resolved(&config, &model),
        "degenerate": model.degenerate,
        "render_warnings": warnings,
    });
    out.finish("cluster", o, run)
}

fn baseline(o: &BaselineOpts) -> Result<()> {
    let set = read_set(&o.input, &o.alphabet)?;
    let p_grid = parse_grid(o.p_grid.as_deref().unwrap_or(DEFAULT_P_GRID))?;
    let mut out = out_dir(&o.out_dir)?;
    out.mark("read");
    let dm = distance_matrix(&set)?;
    out.mark("distances");
    let fit = hier_fit_matrix(&dm, &p_grid)?;
    out.mark("fit");
    out.write_csv(
        "assignments.csv",
        &["id", "cluster"],
        assignment_rows(&set, &fit.assignments),
    )?;
    out.write_csv(
        "dunn.csv",
        &["p", "dunn"],
        fit.dunn.iter().map(|(p, d)| [p.to_string(), csv_num(*d)]),
    )?;
    let merges: Vec<Value> = upgma(&dm)
        .merges()
        .iter()
        .map(|mg| json!([mg.left, mg.right, json_num(mg.height), mg.size]))
        .collect();
    let model = json!({
        "p": fit.p,
        "degenerate": fit.degenerate,
        "n_sequences": set.len(),
        "seq_len": set.seq_len(),
        "dunn": fit.dunn.iter().map(|(p, d)| json!({"p": p, "dunn": json_num(*d)})).collect::<Vec<_>>(),
        "merges": merges,
    });
    out.write_json("model.json", &model)?;
    if o.emit_distance_matrix == Some(true) {
        let mut header = vec!["id"];
        header.extend(set.sequences().iter().map(|s| s.id.as_str()));
        let rows = (0..dm.len()).map(|i| {
            let mut row = vec![set.sequences()[i].id.clone()];
            row.extend(dm.row(i).iter().map(|&x| csv_num(x)));
            row
        });
        out.write_csv("distance_matrix.csv", &header, rows)?;
    }
    let warnings = if o.render != Some(false) {
        write_svgs(&mut out, &set, &fit.assignments, None)?
    } else {
        Vec::new()
    };
    out.mark("write");
    let run = json!({"p": fit.p, "p_grid": p_grid, "degenerate": fit.degenerate, "render_warnings": warnings});
    out.finish("baseline", o, run)
}

/// Accepts `state-low`, `dur2-medium`, `state:low` and `duration:low:2`.
pub fn parse_scenario(s: &str) -> Result<ScenarioKey> {
    let bad = || {
        usage(format!(
            "unknown scenario `{s}`; use e.g. state-low, dur2-medium or duration:low:2"
        ))
    };
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    match parts.as_slice() {
        [single] => ScenarioKey::from_str(single).map_err(|_| bad()),
        ["state", overlap] => Ok(ScenarioKey::state(
            Overlap::from_str(overlap).map_err(|_| bad())?,
        )),
        ["duration", overlap, v] => {
            let overlap = Overlap::from_str(overlap).map_err(|_| bad())?;
            match v.parse::<usize>() {
                Ok(v @ 1..=3) => Ok(ScenarioKey::duration(overlap, v)),
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

fn simulate(o: &SimulateOpts) -> Result<()> {
    let scenario = o
        .scenario
        .as_deref()
        .ok_or_else(|| usage("--scenario is required"))?;
    let key = parse_scenario(scenario)?;
    let defaults = BenchmarkConfig::default();
    let seed = o.seed.unwrap_or(defaults.seed);
    let order = o.order.unwrap_or(1);
    let replicate = o.replicate.unwrap_or(0);
    let mut out = out_dir(&o.out_dir)?;
    let spec = build_scenario(key)?
        .with_size(
            o.n_sequences.unwrap_or(defaults.n_sequences),
            o.seq_len.unwrap_or(defaults.seq_len),
        )?
        .with_order(order, lift_seed(seed, key))?;
    let (set, labels) = spec.generate(&mut dataset_rng(seed, key, replicate))?;
    out.mark("simulate");
    let mut bytes = Vec::new();
    write_sequences_csv(&set, &mut bytes)?;
    out.write("sequences.csv", bytes)?;
    out.write_csv(
        "labels.csv",
        &["id", "cluster"],
        assignment_rows(&set, &labels),
    )?;
    let run = json!({
        "scenario": key.to_string(),
        "catalog_version": CATALOG_VERSION,
        "n_clusters": spec.n_clusters(),
        "n_sequences": set.len(),
        "seq_len": set.seq_len(),
        "lift_seed": lift_seed(seed, key),
    });
    out.finish("simulate", o, run)
}

fn benchmark(o: &BenchmarkOpts) -> Result<()> {
    let mut config = BenchmarkConfig::default();
    if o.full_scale == Some(true) {
        config = config.full_scale();
    }
    if !o.scenarios.is_empty() {
        config.scenarios = o
            .scenarios
            .iter()
            .map(|s| parse_scenario(s))
            .collect::<Result<_>>()?;
    }
    if let Some(orders) = &o.orders {
        config.orders = parse_grid(orders)?;
        if config.orders.contains(&0) {
            return Err(usage("--orders must be at least 1"));
        }
    }
    config.datasets = o.replicates.unwrap_or(config.datasets);
    config.n_sequences = o.n_sequences.unwrap_or(config.n_sequences);
    config.seq_len = o.seq_len.unwrap_or(config.seq_len);
    config.seed = o.seed.unwrap_or(config.seed);

    let fit = fit_config(&o.h_grid, &o.p_grid, o.restarts, o.seed)?;
    let amdc = AmdcMethod {
        config: fit.clone(),
        weights: None,
    };
    let hier = HierarchicalMethod {
        p_grid: fit.p_grid.clone(),
    };
    let mut methods: Vec<&dyn ClusterMethod> = Vec::new();
    for name in o
        .methods
        .as_deref()
        .unwrap_or("amdc,hier")
        .split(',')
        .map(str::trim)
    {
        match name {
            "amdc" => methods.push(&amdc),
            "hier" => methods.push(&hier),
            other => return Err(usage(format!("unknown method `{other}`; use amdc or hier"))),
        }
    }

    let mut out = out_dir(&o.out_dir)?;
    let result = run_benchmark(&config, &methods)?;
    out.mark("benchmark");

    let header = [
        "overlap",
        "type",
        "order",
        "method",
        "true_p",
        "datasets",
        "failures",
        "accuracy_mean",
        "accuracy_sd",
        "mode_p",
    ];
    out.write_csv(
        "results.csv",
        &header,
        result.summary.iter().map(|r| {
            vec![
                r.overlap.to_string(),
                r.kind.clone(),
                r.order.to_string(),
                r.method.clone(),
                r.true_p.to_string(),
                r.datasets.to_string(),
                r.failures.to_string(),
                format!("{:.4}", r.accuracy_mean),
                format!("{:.4}", r.accuracy_sd),
                r.mode_p.map_or_else(String::new, |p| p.to_string()),
            ]
        }),
    )?;
    out.write_csv(
        "records.csv",
        &[
            "scenario",
            "order",
            "replicate",
            "method",
            "true_p",
            "accuracy",
            "selected_p",
            "error",
        ],
        result.records.iter().map(|r| {
            vec![
                r.scenario.clone(),
                r.order.to_string(),
                r.replicate.to_string(),
                r.method.clone(),
                r.true_p.to_string(),
                csv_opt(r.accuracy),
                r.selected_p.map_or_else(String::new, |p| p.to_string()),
                r.error.clone().unwrap_or_default(),
            ]
        }),
    )?;
    for r in &result.summary {
        out.add_timing(
            &format!("{}/order{}/{}/prep_mean", r.scenario(), r.order, r.method),
            r.prep_mean.as_secs_f64(),
        );
        out.add_timing(
            &format!("{}/order{}/{}/total_mean", r.scenario(), r.order, r.method),
            r.total_mean.as_secs_f64(),
        );
    }
    let run = json!({
        "seed": config.seed,
        "catalog_version": CATALOG_VERSION,
        "scenarios": config.scenarios.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "lift_seeds": config.scenarios.iter().map(|&k| (k.to_string(), lift_seed(config.seed, k))).collect::<BTreeMap<_, _>>(),
        "orders": config.orders,
        "methods": methods.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "p_grid": fit.p_grid,
        "h_grid": fit.h_grid,
        "restarts": fit.restarts,
        "datasets": config.datasets,
        "n_sequences": config.n_sequences,
        "seq_len": config.seq_len,
    });
    out.finish("benchmark", o, run)
}

fn stability_cmd(o: &StabilityOpts) -> Result<()> {
    let set = read_set(&o.input, &o.alphabet)?;
    let config = fit_config(&o.h_grid, &o.p_grid, o.restarts, o.seed)?;
    let weights = weight_vector(&o.weights, o.quantum, set.seq_len())?;
    let replicates = o.replicates.unwrap_or(DEFAULT_REPLICATES);
    if replicates == 0 {
        return Err(usage("--replicates must be at least 1"));
    }
    let mut out = out_dir(&o.out_dir)?;
    let model = fit(&set, weights.as_ref(), &config)?;
    out.mark("fit");
    let report = stability(&set, &model, replicates, config.seed)?;
    out.mark("bootstrap");
    out.write_csv(
        "stability.csv",
        &["id", "cluster", "stability"],
        set.sequences()
            .iter()
            .zip(&model.assignments)
            .zip(&report.scores)
            .map(|((s, k), x)| [s.id.clone(), k.to_string(), csv_num(*x)]),
    )?;
    let summary = json!({
        "h": model.h,
        "p": model.p,
        "replicates": report.replicates,
        "failed_replicates": report.failed_replicates,
        "mean": json_num(report.mean),
        "median": json_num(report.median),
        "clusters": report.clusters.iter().map(|c| json!({
            "cluster": c.cluster,
            "size": c.size,
            "mean": json_num(c.mean),
            "median": json_num(c.median),
        })).collect::<Vec<_>>(),
        "replicate_cluster_counts": report.cluster_counts.iter().map(|(p, c)| (p.to_string(), *c)).collect::<BTreeMap<_, _>>(),
    });
    out.write_json("stability.json", &summary)?;
    out.mark("write");
    let run = json!({"h": model.h, "p": model.p, "resolved": resolved(&config, &model), "replicates": replicates});
    out.finish("stability", o, run)
}

fn contrib(o: &ContribOpts) -> Result<()> {
    let set = read_set(&o.input, &o.alphabet)?;
    let weights = weight_vector(&o.weights, o.quantum, set.seq_len())?;
    let mut out = out_dir(&o.out_dir)?;
    let data = center(assemble(&set, weights.as_ref())?)?;
    let factors = decompose(&data)?;
    let c = contributions(&data, &factors)?;
    out.mark("decompose");
    let rank = c.values.ncols();
    let mut header = vec!["transition".to_string()];
    header.extend((1..=rank).map(|k| format!("dim{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let labels = ContributionMatrix::row_labels(set.alphabet());
    out.write_csv(
        "contributions.csv",
        &header,
        labels.iter().enumerate().map(|(i, label)| {
            let mut row = vec![label.clone()];
            row.extend((0..rank).map(|k| csv_num(c.values[(i, k)])));
            row
        }),
    )?;
    out.write_csv(
        "singular_values.csv",
        &["dim", "singular_value"],
        factors
            .s
            .iter()
            .enumerate()
            .map(|(k, s)| [(k + 1).to_string(), csv_num(*s)]),
    )?;
    let run = json!({"rank": rank, "n_sequences": set.len(), "seq_len": set.seq_len()});
    out.finish("contrib", o, run)
}

fn render(o: &RenderOpts) -> Result<()> {
    let set = read_set(&o.input, &o.alphabet)?;
    let file = existing_file(&o.assignments, "--assignments")?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = rdr.headers()?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "cluster"] {
        return Err(usage("assignment header must be `id,cluster`"));
    }
    let mut by_id = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let k: usize = record[1].parse().with_context(|| {
            format!(
                "cluster `{}` for `{}` is not a number",
                &record[1], &record[0]
            )
        })?;
        by_id.insert(record[0].to_string(), k);
    }
    let assignments = set
        .sequences()
        .iter()
        .map(|s| {
            by_id
                .get(&s.id)
                .copied()
                .with_context(|| format!("no cluster assigned to sequence `{}`", s.id))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = out_dir(&o.out_dir)?;
    let warnings = write_svgs(&mut out, &set, &assignments, o.separator_every)?;
    out.mark("render");
    out.finish("render", o, json!({"render_warnings": warnings}))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_syntaxes_agree() {
        assert_eq!(
            parse_scenario("duration:low:2").unwrap(),
            parse_scenario("dur2-low").unwrap()
        );
        assert_eq!(
            parse_scenario("state:high").unwrap(),
            parse_scenario("state-high").unwrap()
        );
        assert!(parse_scenario("duration:low:4").is_err());
        assert!(parse_scenario("nope").is_err());
    }

    #[test]
    fn weekday_ranges() {
        assert_eq!(parse_weekdays("mon-fri").unwrap().len(), 5);
        assert_eq!(
            parse_weekdays("sat,sun").unwrap(),
            vec![Weekday::Sat, Weekday::Sun]
        );
        assert!(parse_weekdays("funday").is_err());
    }

    #[test]
    fn weight_specs() {
        let w = weight_vector(&["09:00-17:00=2".into()], Some(5), 289)
            .unwrap()
            .unwrap();
        assert_eq!(w.as_slice()[107], 1.0);
        assert_eq!(w.as_slice()[108], 2.0);
        assert_eq!(w.as_slice()[204], 1.0);
        assert!(weight_vector(&["09:00-17:00".into()], None, 10).is_err());
        assert!(weight_vector(&[], None, 10).unwrap().is_none());
    }
}
