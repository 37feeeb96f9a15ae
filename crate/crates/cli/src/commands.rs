//! One function per subcommand. Every run writes its CSVs and a one-line
//! JSON manifest holding the resolved settings and the seed.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use modelclass::io::{
    read_gamma, read_pool, read_table, write_coefficients, write_cv_curve, write_frequency_matrix,
    write_gamma, write_minimal_classes, write_pool, write_unique_counts,
};
use modelclass::minclass::{
    assemble_minimal_class, estimate_noise_variance, frequency_matrix, unique_counts,
};
use modelclass::scoring::uniform_delta_grid;
use modelclass::solver::lambda_grid;
use modelclass::{
    cv_select_lambda, expand_features, multi_start_search, run_study, score_predictors, solve_penalized,
    standardize_with, Dataset, Error, ExpansionOptions, GammaScores, MinimalClass, Model, ModelPool,
    Normalization, PenaltySpec, ScenarioConfig, Schedule, ScoringOptions, SearchOptions, SolverOptions,
    StudyOptions,
};
use serde_json::{json, Map, Value};

use crate::config::{parse_floats, parse_geometric, parse_keep, parse_sizes, Settings};
use crate::error::{CliError, CliResult};

type Results = Map<String, Value>;

pub fn dispatch(command: &str, st: &Settings) -> CliResult<()> {
    let mut results = Results::new();
    let manifest = match command {
        "fit" => fit(st, &mut results)?,
        "score" => score(st, &mut results)?,
        "search" => search(st, &mut results)?,
        "report" => report(st, &mut results)?,
        "simulate" => simulate(st, &mut results)?,
        "pipeline" => pipeline(st, &mut results)?,
        other => unreachable!("unknown command {other}"),
    };
    write_manifest(&manifest, command, st, results)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_owned(),
        source,
    }
}

fn out_dir(st: &Settings) -> CliResult<PathBuf> {
    let dir = PathBuf::from(st.raw("io.out"));
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    Ok(dir)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn write_manifest(path: &Path, command: &str, st: &Settings, results: Results) -> CliResult<()> {
    let config: Map<String, Value> = st
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    let manifest = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": st.get::<u64>("run.seed")?,
        "config": config,
        "results": results,
    });
    let mut w = create(path)?;
    writeln!(w, "{manifest}").map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

fn seed(st: &Settings) -> CliResult<u64> {
    st.get("run.seed")
}

fn load_data(st: &Settings, results: &mut Results) -> CliResult<Dataset<f64>> {
    let input = st.require("io.input")?;
    let response = st.require("io.response")?;
    let path = Path::new(input);
    let mut raw = read_table::<f64, _>(File::open(path).map_err(io_err(path))?, response)?;
    let expand: ExpansionOptions = st.raw("core.expand").parse()?;
    if !expand.is_empty() {
        let e = expand_features(&raw, expand);
        for s in &e.skipped {
            eprintln!("warning: skipped {s}");
        }
        results.insert("skipped_transforms".into(), json!(e.skipped));
        raw = e.table;
    }
    let norm: Normalization = st.raw("core.normalization").parse()?;
    let data = standardize_with(&raw, norm)?;
    results.insert("rows".into(), json!(data.n()));
    results.insert("columns".into(), json!(data.p()));
    Ok(data)
}

fn solver_options() -> SolverOptions<f64> {
    SolverOptions::default()
}

fn fit(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let data = load_data(st, results)?;
    let dir = out_dir(st)?;
    let alpha: f64 = st.get("solver.alpha")?;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CliError::Config(format!("alpha {alpha} outside (0, 1]")));
    }
    let opts = solver_options();
    let lambda = match st.opt::<f64>("solver.lambda")? {
        Some(l) => l,
        None => {
            let grid = lambda_grid(&data, alpha, st.get("solver.grid_len")?, st.get("solver.grid_ratio")?);
            let cv = cv_select_lambda(&data, alpha, st.get("solver.cv_folds")?, &grid, seed(st)?, &opts)?;
            let path = dir.join("cv_curve.csv");
            write_cv_curve(&cv, create(&path)?)?;
            cv.lambda
        }
    };
    let fit = solve_penalized(&data, &PenaltySpec::elastic_net(lambda, alpha), None, &opts)?;
    write_coefficients(&data, &fit.coefficients, create(&dir.join("coefficients.csv"))?)?;
    results.insert("lambda".into(), json!(lambda));
    results.insert("support_size".into(), json!(fit.support.size()));
    results.insert("converged".into(), json!(fit.converged));
    Ok(dir.join("manifest.json"))
}

fn scoring_options(st: &Settings) -> CliResult<ScoringOptions<f64>> {
    Ok(ScoringOptions {
        folds: st.get("solver.cv_folds")?,
        enet_alpha: st.get("scoring.alpha")?,
        delta_grid: uniform_delta_grid(st.get("scoring.delta_steps")?),
        grid_len: st.get("solver.grid_len")?,
        grid_ratio: st.get("solver.grid_ratio")?,
        solver: solver_options(),
        seed: seed(st)?,
    })
}

fn compute_scores(
    st: &Settings,
    data: &Dataset<f64>,
    dir: &Path,
    results: &mut Results,
) -> CliResult<GammaScores<f64>> {
    let rep = score_predictors(data, &scoring_options(st)?)?;
    write_gamma(&rep.gamma, data.column_names(), create(&dir.join("gamma.csv"))?)?;
    let part = rep.gamma.partition.as_ref().expect("scores from data carry a partition");
    results.insert("lasso_lambda".into(), json!(rep.lasso_cv.lambda));
    results.insert("enet_lambda".into(), json!(rep.enet_cv.lambda));
    results.insert("lasso_support".into(), json!(part.s_l.size()));
    results.insert("enet_only".into(), json!(part.s_plus.size()));
    results.insert("positive_scores".into(), json!(rep.gamma.support.size()));
    Ok(rep.gamma)
}

fn score(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let data = load_data(st, results)?;
    let dir = out_dir(st)?;
    compute_scores(st, &data, &dir, results)?;
    Ok(dir.join("manifest.json"))
}

fn search_options(st: &Settings) -> CliResult<SearchOptions<f64>> {
    let (scale, ratio, count) = parse_geometric(st.raw("search.temps"))?;
    let record_candidates = match st.raw("search.record") {
        "all" => true,
        "accepted" => false,
        other => {
            return Err(CliError::Config(format!(
                "search.record = {other:?}, expected all or accepted"
            )))
        }
    };
    Ok(SearchOptions {
        schedule: Schedule::geometric(scale, ratio, count, st.get("search.iters")?),
        seed: seed(st)?,
        record_candidates,
    })
}

/// Requested sizes that the scores and the sample size allow.
fn feasible_sizes(
    st: &Settings,
    data: &Dataset<f64>,
    gamma: &GammaScores<f64>,
    results: &mut Results,
) -> CliResult<Vec<usize>> {
    let wanted = parse_sizes(st.raw("search.kappa"))?;
    let (ok, dropped): (Vec<usize>, Vec<usize>) = wanted
        .into_iter()
        .partition(|&k| gamma.support.size() > k && k < data.n());
    if !dropped.is_empty() {
        eprintln!(
            "warning: {} predictors with positive score, skipping sizes {dropped:?}",
            gamma.support.size()
        );
    }
    if ok.is_empty() {
        return Err(Error::NoCandidates.into());
    }
    results.insert("sizes_searched".into(), json!(ok));
    results.insert("sizes_skipped".into(), json!(dropped));
    Ok(ok)
}

fn run_search(
    st: &Settings,
    data: &Dataset<f64>,
    gamma: &GammaScores<f64>,
    dir: &Path,
    results: &mut Results,
) -> CliResult<ModelPool<f64>> {
    let sizes = feasible_sizes(st, data, gamma, results)?;
    let pool = multi_start_search(data, gamma, &sizes, st.get("search.starts")?, &search_options(st)?)?;
    write_pool(&pool, create(&dir.join("pool.csv"))?)?;
    results.insert("pool_models".into(), json!(pool.len()));
    Ok(pool)
}

fn search(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let data = load_data(st, results)?;
    let dir = out_dir(st)?;
    let gamma = if st.is_set("scoring.gamma_file") {
        let path = PathBuf::from(st.raw("scoring.gamma_file"));
        let g = read_gamma::<f64, _>(File::open(&path).map_err(io_err(&path))?)?;
        if g.p() != data.p() {
            return Err(Error::DimensionMismatch {
                expected: data.p(),
                found: g.p(),
            }
            .into());
        }
        g
    } else {
        compute_scores(st, &data, &dir, results)?
    };
    run_search(st, &data, &gamma, &dir, results)?;
    Ok(dir.join("manifest.json"))
}

/// Classes for every size in the pool, the unique counts and the
/// co-occurrence matrix of class members.
fn write_report(
    st: &Settings,
    pool: &ModelPool<f64>,
    data: Option<&Dataset<f64>>,
    dir: &Path,
    results: &mut Results,
) -> CliResult<()> {
    let eta = match (st.opt::<f64>("minclass.eta")?, data) {
        (Some(e), _) => e,
        (None, Some(d)) => {
            let s2 = estimate_noise_variance(d, pool)?;
            let best = pool
                .iter()
                .filter(|(_, e)| e.mse.is_finite())
                .min_by(|a, b| a.1.mse.total_cmp(&b.1.mse).then_with(|| a.0.cmp(b.0)))
                .map(|(m, _)| m.size())
                .unwrap_or(0);
            // fewer residual degrees of freedom than parameters
            let flagged = d.n() - best <= best;
            if flagged {
                eprintln!("warning: noise estimate {s2} rests on {} residual degrees of freedom", d.n() - best);
            }
            results.insert("sigma2".into(), json!(s2));
            results.insert("sigma2_flagged".into(), json!(flagged));
            st.get::<f64>("minclass.eta_factor")? * s2
        }
        (None, None) => {
            return Err(CliError::Config(
                "minclass.eta is required when no input data is given".into(),
            ))
        }
    };
    results.insert("eta".into(), json!(eta));
    let keep = parse_keep(st.raw("minclass.keep"))?;
    let mut classes: Vec<MinimalClass<f64>> = Vec::new();
    for k in pool.sizes() {
        match assemble_minimal_class(pool, k, eta) {
            Ok(mut c) => {
                if let Some(m) = keep {
                    c.models.truncate(m);
                }
                classes.push(c);
            }
            Err(Error::EmptySize(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let p = match data {
        Some(d) => d.p(),
        None => pool
            .iter()
            .filter_map(|(m, _)| m.indices().last())
            .max()
            .map_or(0, |&j| j + 1),
    };
    let names: Vec<String> = match data {
        Some(d) => d.column_names().to_vec(),
        None => (0..p).map(|j| format!("x{j}")).collect(),
    };
    if pool.iter().any(|(m, _)| m.indices().iter().any(|&j| j >= p)) {
        return Err(Error::InvalidInput(format!("pool refers to predictors beyond the {p} columns of the data")).into());
    }

    write_minimal_classes(&classes, &names, create(&dir.join("minimal_class.csv"))?)?;
    write_unique_counts(&unique_counts(pool), create(&dir.join("unique_counts.csv"))?)?;
    let members: Vec<Model> = classes
        .iter()
        .flat_map(|c| c.models.iter().map(|(m, _)| m.clone()))
        .collect();
    if !members.is_empty() {
        let fm = frequency_matrix(&members, st.get("minclass.threshold")?)?;
        write_frequency_matrix(&fm, &names, create(&dir.join("frequency.csv"))?)?;
    }
    results.insert("class_models".into(), json!(members.len()));

    let mut out = std::io::stdout().lock();
    for c in &classes {
        let _ = writeln!(out, "size {} ({} models, best mse {:.6})", c.kappa, c.len(), c.best_mse);
        for (m, mse) in &c.models {
            let labels: Vec<&str> = m.indices().iter().map(|&j| names[j].as_str()).collect();
            let _ = writeln!(out, "  {:.6}  {}", mse, labels.join(" "));
        }
    }
    Ok(())
}

fn report(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let path = PathBuf::from(st.require("minclass.pool")?);
    let pool = read_pool::<f64, _>(File::open(&path).map_err(io_err(&path))?)?;
    let data = if st.is_set("io.input") {
        Some(load_data(st, results)?)
    } else {
        None
    };
    let dir = out_dir(st)?;
    write_report(st, &pool, data.as_ref(), &dir, results)?;
    Ok(dir.join("manifest.json"))
}

fn pipeline(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let data = load_data(st, results)?;
    let dir = out_dir(st)?;
    let gamma = compute_scores(st, &data, &dir, results)?;
    let pool = run_search(st, &data, &gamma, &dir, results)?;
    write_report(st, &pool, Some(&data), &dir, results)?;
    Ok(dir.join("manifest.json"))
}

fn simulate(st: &Settings, results: &mut Results) -> CliResult<PathBuf> {
    let ps = parse_sizes(st.raw("simulation.p"))?;
    let snrs = parse_floats(st.raw("simulation.snr"))?;
    let seed = seed(st)?;
    let n: usize = st.get("simulation.n")?;
    let replicates: usize = st.get("simulation.replicates")?;
    let cells: Vec<ScenarioConfig> = ps
        .iter()
        .flat_map(|&p| {
            snrs.iter().map(move |&snr| ScenarioConfig {
                n,
                ..ScenarioConfig::new(p, snr, replicates, seed)
            })
        })
        .collect();
    let opts = StudyOptions {
        scoring: scoring_options(st)?,
        search: search_options(st)?,
        kappas: parse_sizes(st.raw("search.kappa"))?,
        starts: st.get("search.starts")?,
        top: st.get("simulation.top")?,
    };
    let table = run_study::<f64>(&cells, &opts)?;
    let out = PathBuf::from(st.raw("io.out"));
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let mut w = create(&out)?;
    w.write_all(table.to_csv().as_bytes()).map_err(io_err(&out))?;
    w.flush().map_err(io_err(&out))?;
    print!("{}", table.to_text());
    let incomplete: usize = table.cells.iter().map(|c| c.incomplete).sum();
    results.insert("incomplete_replicates".into(), json!(incomplete));
    Ok(out.with_extension("manifest.json"))
}
