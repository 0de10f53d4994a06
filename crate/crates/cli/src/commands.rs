use std::fmt::Write as _;
use std::path::Path;

use jumppat::algebra::{vectorize, ExactComplex, Field, C64};
use jumppat::channel::ChannelProcess;
use jumppat::clustering::{
    cluster_graph, consecutive_successors, quality_csv, ClusterAnalysis, DistanceBackend, DEFAULT_HORIZON,
    DEFAULT_WEIGHT_MIN,
};
use jumppat::io::{csv, format_float, matrix_csv, matrix_to_json, ToJsonEntry};
use jumppat::model::occupation_projector;
use jumppat::patterns::{classify_recurrence, detect_pattern, ClassifyOptions, DetectOptions, IntegerChannels};
use jumppat::stats::{
    full_distribution, log_likelihood, mutual_information, parse_sequence, single_outcome, spectral_two_point, two_point,
};
use jumppat::trajectory::{self, ensemble, symbol_stream, SimulationOptions};

use crate::config::{describe, overlay_model, Backend, Mode, RunConfig};
use crate::CliError;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Output { path, source })
}

fn build<T: Field>(cfg: &RunConfig) -> Result<ChannelProcess<T>, CliError> {
    Ok(ChannelProcess::build(&cfg.build_model::<T>(&cfg.model)?, cfg.tolerances())?)
}

fn initial_state<T: Field>(process: &ChannelProcess<T>, occupation: Option<&str>) -> Result<Option<Vec<T>>, CliError> {
    let Some(occ) = occupation else { return Ok(None) };
    let rho = occupation_projector::<T>(occ)?;
    if rho.rows() != process.dim() {
        return Err(CliError::Config(format!("initial occupation `{occ}` does not fit dimension {}", process.dim())));
    }
    Ok(Some(vectorize(&rho)?.data))
}

pub fn stats(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.mode.unwrap_or_default() {
        Mode::Exact => stats_with::<ExactComplex>(cfg),
        Mode::Float => stats_with::<C64>(cfg),
    }
}

fn stats_with<T: Field>(cfg: &RunConfig) -> Result<(), CliError> {
    let p = build::<T>(cfg)?;
    let out = cfg.out_dir();
    let order = cfg.stats.order.unwrap_or(2);
    let mi_max = cfg.stats.mi_max.unwrap_or(6);
    let tp_max = cfg.stats.two_point_max.unwrap_or(10);
    if order == 0 {
        return Err(CliError::Config("order must be at least 1".into()));
    }
    let alphabet = p.alphabet().to_vec();

    let mut rows = Vec::new();
    for (k, label) in alphabet.iter().enumerate() {
        rows.push([label.clone(), format_float(single_outcome(&p, k)?.to_c64().re)]);
    }
    write(&out, "single_outcome.csv", &csv("symbol,probability", rows))?;

    for n in 1..=order {
        write(&out, &format!("distribution_{n}.csv"), &full_distribution(&p, n)?.to_csv())?;
    }

    let mut rows = Vec::new();
    for n in 2..=tp_max {
        for a in 0..alphabet.len() {
            for b in 0..alphabet.len() {
                let direct = two_point(&p, a, b, n)?.to_c64().re;
                let (spectral, diff) = match spectral_two_point(&p, a, b, n) {
                    Ok(s) => (format_float(s), format_float((s - direct).abs())),
                    Err(jumppat::Error::NotDiagonalizable { .. }) => (String::new(), String::new()),
                    Err(e) => return Err(e.into()),
                };
                rows.push([n.to_string(), alphabet[a].clone(), alphabet[b].clone(), format_float(direct), spectral, diff]);
            }
        }
    }
    write(&out, "two_point.csv", &csv("n,k1,kn,direct,spectral,difference", rows))?;

    let mut rows = Vec::new();
    for n in 2..=mi_max {
        rows.push([n.to_string(), format_float(mutual_information(&p, n)?)]);
    }
    write(&out, "mutual_information.csv", &csv("n,mutual_information", rows))?;

    println!("model: {}", describe(&cfg.model));
    println!("activity: {}", format_float(p.activity().to_c64().re));
    println!("wrote single_outcome.csv, distribution_1..{order}.csv, two_point.csv, mutual_information.csv");
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.mode.unwrap_or_default() {
        Mode::Exact => simulate_with::<ExactComplex>(cfg),
        Mode::Float => simulate_with::<C64>(cfg),
    }
}

fn simulate_with<T: Field + ToJsonEntry>(cfg: &RunConfig) -> Result<(), CliError> {
    let seed = cfg.require_seed()?;
    let p = build::<T>(cfg)?;
    let s = &cfg.simulate;
    let steps = s.steps.unwrap_or(1000);
    let count = s.trajectories.unwrap_or(1);
    if steps == 0 || count == 0 {
        return Err(CliError::Config("steps and trajectories must be positive".into()));
    }
    let keep = s.keep_states.unwrap_or(false);
    let mut opts = SimulationOptions::new(steps).burn_in(s.burn_in.unwrap_or(0));
    if keep {
        opts = opts.keep_states(1);
    }
    let initial = initial_state(&p, s.initial.as_deref())?;
    let records = ensemble(&p, &opts, seed, count, initial.as_deref())?;
    let out = cfg.out_dir();
    let stream = symbol_stream(&records, p.alphabet());
    write(&out, "symbols.txt", &stream)?;
    if keep {
        let d = p.dim();
        for (i, r) in records.iter().enumerate() {
            let mut text = String::new();
            for state in &r.states {
                let m = jumppat::algebra::VectorizedOperator { dim: d, data: state.clone() }.unvectorize();
                let _ = writeln!(text, "{}", serde_json::to_string(&matrix_to_json(&m)?).expect("serializable"));
            }
            write(&out, &format!("states_{i}.jsonl"), &text)?;
        }
    }
    print!("{stream}");
    Ok(())
}

pub fn patterns(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.mode == Some(Mode::Float) {
        return Err(CliError::Config("pattern detection runs in exact mode only".into()));
    }
    let seed = cfg.require_seed()?;
    let p = build::<ExactComplex>(cfg)?;
    let s = &cfg.patterns;
    let defaults = ClassifyOptions::default();
    let opts = ClassifyOptions {
        trials: s.trials.unwrap_or(defaults.trials),
        steps: s.steps.unwrap_or(defaults.steps),
        seed,
        max_states: s.max_states.unwrap_or(defaults.max_states),
        bit_cap: s.bit_cap.unwrap_or(defaults.bit_cap),
        ..defaults
    };
    if opts.trials == 0 || opts.steps == 0 {
        return Err(CliError::Config("trials and steps must be positive".into()));
    }
    let report = classify_recurrence(&p, &opts)?;
    let out = cfg.out_dir();
    let det = &report.detection;
    let mut text = String::new();
    let _ = writeln!(text, "classification: {}", report.classification);
    let _ = writeln!(text, "model: {}", describe(&cfg.model));
    let _ = writeln!(text, "trajectories: {}", det.trajectories.len());
    let _ = writeln!(text, "distinct_states: {}", det.store.len());
    let _ = writeln!(text, "revisit_fraction: {}", format_float(report.revisit_fraction));
    let max_bits = det.trajectories.iter().map(|t| t.max_bits).max().unwrap_or(0);
    let _ = writeln!(text, "max_bits: {max_bits}");
    let _ = writeln!(text, "truncated: {}", det.truncated());
    if let Some(closure) = &report.closure {
        let g = closure.graph();
        let _ = writeln!(text, "closure: {}", if closure.is_closed() { "closed" } else { "incomplete" });
        let _ = writeln!(text, "graph_nodes: {}", g.nodes.len());
        let _ = writeln!(text, "graph_edges: {}", g.edges.len());
        let mut g = g.clone();
        g.classification = Some(report.classification);
        write(&out, "pattern.dot", &g.to_dot())?;
    }
    for (i, t) in det.trajectories.iter().enumerate() {
        write(&out, &format!("labels_{i}.csv"), &t.to_csv())?;
    }
    if let Some(tol) = s.tol_match {
        let channels = IntegerChannels::new(&p)?;
        let approx = detect_pattern(
            &channels,
            &DetectOptions { max_steps: opts.steps, trajectories: opts.trials, seed, bit_cap: opts.bit_cap, tol_match: Some(tol) },
        )?;
        let mut most = 0;
        for (i, t) in approx.trajectories.iter().enumerate() {
            if let (Some(csv), Some(labels)) = (t.approximate_csv(), &t.approximate_labels) {
                most = most.max(labels.iter().max().copied().unwrap_or(0));
                write(&out, &format!("approximate_labels_{i}.csv"), &csv)?;
            }
        }
        let _ = writeln!(text, "approximate_labels: {most}");
    }
    write(&out, "patterns.txt", &text)?;
    print!("{text}");
    Ok(())
}

pub fn cluster(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.mode == Some(Mode::Exact) {
        return Err(CliError::Config("clustering runs in float mode only".into()));
    }
    let seed = cfg.require_seed()?;
    let p = build::<C64>(cfg)?;
    let s = &cfg.cluster;
    let samples = s.samples.unwrap_or(2000);
    if samples < 2 {
        return Err(CliError::Config("need at least two samples".into()));
    }
    let horizon = s.horizon.unwrap_or(DEFAULT_HORIZON);
    let counts = s.nc.clone().unwrap_or_else(|| vec![12, 32]);
    if counts.is_empty() || counts.iter().any(|&c| c == 0 || c > samples) {
        return Err(CliError::Config(format!("cluster counts must lie in 1..={samples}")));
    }
    let weight_min = s.weight_min.unwrap_or(DEFAULT_WEIGHT_MIN);
    let backend = match s.backend.unwrap_or_default() {
        Backend::Probability => DistanceBackend::Probability,
        Backend::Trace => DistanceBackend::TraceDistance,
    };
    let opts = SimulationOptions::new(samples - 1).burn_in(s.burn_in.unwrap_or(200)).keep_states(1);
    let rec = trajectory::simulate(&p, &opts, seed, None)?;
    let analysis = ClusterAnalysis::new(&p, &rec.states, horizon, backend)?;
    let successors = consecutive_successors(&rec.symbols, rec.states.len());
    let out = cfg.out_dir();
    if s.dump_distances.unwrap_or(false) {
        write(&out, "distances.csv", &matrix_csv(&analysis.distances.to_rows()))?;
    }
    for &nc in &counts {
        let model = analysis.cut(nc)?;
        let graph = cluster_graph(&model, &successors, p.alphabet(), weight_min)?;
        write(&out, &format!("assignment_nc{nc}.csv"), &model.assignment_csv())?;
        write(&out, &format!("cluster_distances_nc{nc}.csv"), &matrix_csv(&model.distances))?;
        write(&out, &format!("cluster_graph_nc{nc}.dot"), &graph.to_dot())?;
        println!(
            "nc={nc} max_diagonal={} max_intra={} edges={}",
            format_float(model.quality()),
            format_float(model.max_intra_distance()),
            graph.edges.len()
        );
    }
    write(&out, "quality.csv", &quality_csv(&analysis.quality_curve(&counts)?))?;
    Ok(())
}

pub fn likelihood(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.mode.unwrap_or_default() {
        Mode::Exact => likelihood_with::<ExactComplex>(cfg),
        Mode::Float => likelihood_with::<C64>(cfg),
    }
}

fn likelihood_with<T: Field>(cfg: &RunConfig) -> Result<(), CliError> {
    let string = cfg.likelihood.string.as_deref().unwrap_or("").trim().to_string();
    if string.is_empty() {
        return Err(CliError::Config("a nonempty symbol string is required".into()));
    }
    let sections = match &cfg.likelihood.candidates {
        Some(c) if !c.is_empty() => c.iter().map(|c| overlay_model(&cfg.model, c)).collect(),
        _ => vec![cfg.model.clone()],
    };
    let mut results = Vec::new();
    for section in &sections {
        let p = ChannelProcess::build(&cfg.build_model::<T>(section)?, cfg.tolerances())?;
        let seq = parse_sequence(p.alphabet(), &string)?;
        results.push((describe(section), log_likelihood(&p, &seq, None)?));
    }
    // Most likely first; impossible strings last, in input order.
    results.sort_by(|a, b| b.1.value.total_cmp(&a.1.value));
    let text = csv(
        "rank,model,log_likelihood,impossible",
        results.iter().enumerate().map(|(i, (name, ll))| {
            [(i + 1).to_string(), name.clone(), format_float(ll.value), ll.impossible.to_string()]
        }),
    );
    write(&cfg.out_dir(), "likelihood.csv", &text)?;
    print!("{text}");
    Ok(())
}
