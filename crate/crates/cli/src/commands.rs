//! Subcommand implementations.

use std::fs;
use std::net::SocketAddr;
use std::path::Path;

use serde::Serialize;

use gustosonic_core::featurize::{featurize_dataset, FeatureSchema, WindowSpec};
use gustosonic_core::learn::{
    cross_validate, load_model, randomized_search, save_model, train_baselines, train_forest,
    Example, ForestParams, SearchSpace, TreeParams,
};
use gustosonic_core::sensor_data::{parse_csv, write_csv, ActivityLabel, LabeledDataset};
use gustosonic_core::sound::{build_placeholder_library, encode_wav, SchedulerState};
use gustosonic_core::synthgen::{generate_dataset, GeneratorSpec};
use gustosonic_service::{replay as run_replay, Pace, ReplayError, ReplayOptions};

use crate::report::{metrics_csv, render_table};
use crate::{
    AppError, BaselinesArgs, ClipsArgs, CvArgs, ForestArgs, GenArgs, PaceArg, ReplayArgs,
    ServeArgs, TrainArgs, TuneArgs, WindowArgs,
};

/// Writes the effective configuration (flags + defaults) next to a run's
/// outputs, so every run is reproducible from its artifacts.
fn record_config(out_dir: &Path, command: &str, args: &impl Serialize) -> Result<(), AppError> {
    #[derive(Serialize)]
    struct Effective<'a, T: Serialize> {
        command: &'a str,
        #[serde(flatten)]
        args: &'a T,
    }
    let text = serde_json::to_string_pretty(&Effective { command, args })
        .expect("config serializes");
    fs::create_dir_all(out_dir).map_err(AppError::runtime)?;
    fs::write(out_dir.join(format!("{command}_config.json")), text).map_err(AppError::runtime)?;
    Ok(())
}

fn parent_dir(path: &Path) -> std::path::PathBuf {
    match path.parent() {
        Some(p) if p.as_os_str().is_empty() => std::path::PathBuf::from("."),
        Some(p) => p.to_path_buf(),
        None => std::path::PathBuf::from("."),
    }
}

fn load_dataset(path: &Path) -> Result<LabeledDataset, AppError> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Runtime(format!("reading {}: {e}", path.display())))?;
    let mut dataset = parse_csv(&text).map_err(AppError::data)?;
    dataset.source = path.display().to_string();
    Ok(dataset)
}

fn featurized(
    dataset: &LabeledDataset,
    window: &WindowArgs,
) -> Result<(Vec<Example>, WindowSpec), AppError> {
    let spec = WindowSpec::new(window.window_len, window.hop).map_err(AppError::data)?;
    let data = featurize_dataset(dataset, &spec).map_err(AppError::data)?;
    if data.is_empty() {
        return Err(AppError::Data(format!(
            "dataset yields no full {}-sample windows",
            spec.window_len
        )));
    }
    Ok((data, spec))
}

fn forest_params(args: &ForestArgs, seed: u64, n_features: usize) -> ForestParams {
    let defaults = TreeParams::default_for(n_features);
    ForestParams {
        n_trees: args.trees,
        tree: TreeParams {
            max_depth: args.max_depth,
            min_samples_split: args.min_split,
            max_features: args.max_features.unwrap_or(defaults.max_features),
        },
        bootstrap: args.bootstrap,
        seed,
    }
}

pub fn gen(args: GenArgs) -> Result<(), AppError> {
    let mut spec = GeneratorSpec {
        participants: args.participants,
        minutes_per_activity: args.minutes,
        sample_rate_hz: args.rate,
        activities: GeneratorSpec::mouth_activities(),
        seed: args.seed,
        noise_scale: args.noise_scale,
    };
    if args.idle {
        spec = spec.with_idle();
    }
    let dataset = generate_dataset(&spec).map_err(AppError::data)?;
    let out_dir = parent_dir(&args.out);
    fs::create_dir_all(&out_dir).map_err(AppError::runtime)?;
    fs::write(&args.out, write_csv(&dataset)).map_err(AppError::runtime)?;
    record_config(&out_dir, "gen", &args)?;
    println!(
        "wrote {} records ({} activities x {} participants) to {}",
        dataset.record_count(),
        spec.activities.len(),
        spec.participants,
        args.out.display()
    );
    Ok(())
}

pub fn train(args: TrainArgs) -> Result<(), AppError> {
    let dataset = load_dataset(&args.data)?;
    let (data, spec) = featurized(&dataset, &args.window)?;
    let schema = FeatureSchema::standard();
    let params = forest_params(&args.forest, args.seed, schema.len());
    let model = train_forest(&data, &params, &schema)
        .map_err(AppError::data)?
        .with_window_spec(spec);
    let out_dir = parent_dir(&args.model);
    fs::create_dir_all(&out_dir).map_err(AppError::runtime)?;
    fs::write(&args.model, save_model(&model)).map_err(AppError::runtime)?;
    record_config(&out_dir, "train", &args)?;
    println!(
        "trained {} trees on {} windows; model {} -> {}",
        params.n_trees,
        data.len(),
        model.model_version(),
        args.model.display()
    );
    Ok(())
}

pub fn cv(args: CvArgs) -> Result<(), AppError> {
    let dataset = load_dataset(&args.data)?;
    let (data, _) = featurized(&dataset, &args.window)?;
    let params = forest_params(&args.forest, args.seed, FeatureSchema::standard().len());
    let report = cross_validate(&data, &params, args.k, args.seed).map_err(AppError::data)?;

    let out_dir = parent_dir(&args.out);
    fs::create_dir_all(&out_dir).map_err(AppError::runtime)?;
    fs::write(&args.out, metrics_csv(&report.pooled)).map_err(AppError::runtime)?;
    record_config(&out_dir, "cv", &args)?;

    println!(
        "{}-fold cross-validation over {} windows (seed {})\n",
        args.k,
        data.len(),
        args.seed
    );
    print!("{}", render_table(&report.pooled));
    println!("\nmean macro F1 across folds: {:.4}", report.mean_f1);
    println!("report written to {}", args.out.display());
    Ok(())
}

pub fn tune(args: TuneArgs) -> Result<(), AppError> {
    let dataset = load_dataset(&args.data)?;
    let (data, _) = featurized(&dataset, &args.window)?;
    let mut space = SearchSpace::default_for(FeatureSchema::standard().len());
    space.n_iters = args.iters;
    let result = randomized_search(&data, &space, args.k, args.seed).map_err(AppError::data)?;

    fs::create_dir_all(&args.out).map_err(AppError::runtime)?;
    let best = serde_json::json!({
        "best_params": result.best_params,
        "best_mean_f1": result.best_mean_f1,
    });
    fs::write(
        args.out.join("tune_best.json"),
        serde_json::to_string_pretty(&best).expect("json"),
    )
    .map_err(AppError::runtime)?;

    let mut log = String::from("trial,n_trees,max_depth,min_samples_split,max_features,mean_f1\n");
    for (i, trial) in result.trials.iter().enumerate() {
        log.push_str(&format!(
            "{},{},{},{},{},{:.4}\n",
            i,
            trial.params.n_trees,
            trial
                .params
                .tree
                .max_depth
                .map_or("unlimited".to_string(), |d| d.to_string()),
            trial.params.tree.min_samples_split,
            trial.params.tree.max_features,
            trial.mean_f1
        ));
    }
    fs::write(args.out.join("tune_trials.csv"), log).map_err(AppError::runtime)?;
    record_config(&args.out, "tune", &args)?;

    println!(
        "scored {} configurations; best mean F1 {:.4} with {} trees, depth {}, min split {}, {} features",
        result.trials.len(),
        result.best_mean_f1,
        result.best_params.n_trees,
        result
            .best_params
            .tree
            .max_depth
            .map_or("unlimited".to_string(), |d| d.to_string()),
        result.best_params.tree.min_samples_split,
        result.best_params.tree.max_features,
    );
    println!("results written to {}", args.out.display());
    Ok(())
}

pub fn baselines(args: BaselinesArgs) -> Result<(), AppError> {
    let dataset = load_dataset(&args.data)?;
    let (data, _) = featurized(&dataset, &args.window)?;
    let table = train_baselines(&data, args.k, args.seed).map_err(AppError::data)?;

    let out_dir = parent_dir(&args.out);
    fs::create_dir_all(&out_dir).map_err(AppError::runtime)?;
    let mut csv = String::from("model,mean_f1\n");
    for row in &table {
        csv.push_str(&format!("{},{:.4}\n", row.model, row.mean_f1));
    }
    fs::write(&args.out, csv).map_err(AppError::runtime)?;
    record_config(&out_dir, "baselines", &args)?;

    println!("{}-fold mean macro F1 per model:", args.k);
    for row in &table {
        println!("  {:<24} {:.4}", row.model, row.mean_f1);
    }
    println!("table written to {}", args.out.display());
    Ok(())
}

pub fn serve(args: ServeArgs) -> Result<(), AppError> {
    let text = fs::read_to_string(&args.model)
        .map_err(|e| AppError::Runtime(format!("reading {}: {e}", args.model.display())))?;
    let model = load_model(&text).map_err(AppError::data)?;
    let listen: SocketAddr = args
        .listen
        .parse()
        .map_err(|e| AppError::Data(format!("listen address {:?}: {e}", args.listen)))?;
    println!("serving model {} ({} trees)", model.model_version(), model.trees.len());
    gustosonic_service::server::run_server(model, listen, |addr| {
        println!("listening on http://{addr}");
        use std::io::Write;
        let _ = std::io::stdout().flush();
    })
    .map_err(AppError::runtime)
}

pub fn replay(args: ReplayArgs) -> Result<(), AppError> {
    let dataset = load_dataset(&args.data)?;
    let mut opts = ReplayOptions::new(args.endpoint.clone());
    opts.pace = match args.pace {
        PaceArg::Accelerated => Pace::Accelerated,
        PaceArg::RealTime => Pace::RealTime,
    };
    opts.window_len = args.window_len;

    fs::create_dir_all(&args.out).map_err(AppError::runtime)?;
    let report = match run_replay(&dataset, &opts) {
        Ok(report) => report,
        Err(ReplayError::ConnectionFailed {
            attempts,
            detail,
            partial,
        }) => {
            // keep whatever completed, flagged incomplete, then fail
            write_replay_outputs(&args, &partial)?;
            return Err(AppError::Runtime(format!(
                "endpoint {} unreachable after {attempts} attempts: {detail} \
                 (partial report written to {})",
                args.endpoint,
                args.out.display()
            )));
        }
        Err(e) => return Err(AppError::runtime(e)),
    };

    write_replay_outputs(&args, &report)?;
    record_config(&args.out, "replay", &args)?;

    println!(
        "replayed {} windows against {} ({} server errors)",
        report.rows.len(),
        args.endpoint,
        report.failures.len()
    );
    if let Ok(metrics) = report.metrics() {
        println!();
        print!("{}", render_table(&metrics));
    }
    println!("outputs written to {}", args.out.display());
    Ok(())
}

/// Writes the prediction report, the scheduler event log, and a summary.
/// The scheduler replays the prediction sequence deterministically from the
/// clip seed.
fn write_replay_outputs(
    args: &ReplayArgs,
    report: &gustosonic_service::ReplayReport,
) -> Result<(), AppError> {
    fs::write(args.out.join("replay_report.csv"), report.to_csv())
        .map_err(AppError::runtime)?;

    let library = build_placeholder_library(args.clip_seed);
    let mut scheduler = SchedulerState::new(args.clip_seed);
    for row in &report.rows {
        scheduler.next_action(row.window_start_ms, row.predicted, &library);
    }
    fs::write(args.out.join("playback_events.csv"), scheduler.events_csv())
        .map_err(AppError::runtime)?;

    let summary = serde_json::json!({
        "windows_predicted": report.rows.len(),
        "server_errors": report.failures.len(),
        "incomplete": report.incomplete,
        "macro_f1": report.metrics().ok().map(|m| m.macro_avg.f1),
    });
    fs::write(
        args.out.join("replay_summary.json"),
        serde_json::to_string_pretty(&summary).expect("json"),
    )
    .map_err(AppError::runtime)?;
    Ok(())
}

pub fn clips(args: ClipsArgs) -> Result<(), AppError> {
    let library = build_placeholder_library(args.clip_seed);
    library.check().map_err(AppError::data)?;
    fs::create_dir_all(&args.out).map_err(AppError::runtime)?;
    let mut written = 0;
    for activity in [
        ActivityLabel::CrunchyFood,
        ActivityLabel::SoftFood,
        ActivityLabel::Beverage,
    ] {
        let set = library.set(activity).expect("validated library");
        for (clip_id, clip) in set.clips.iter().enumerate() {
            let name = format!("{}_{:02}_{}.wav", activity.as_str(), clip_id, set.family.as_str());
            fs::write(args.out.join(name), encode_wav(clip)).map_err(AppError::runtime)?;
            written += 1;
        }
    }
    record_config(&args.out, "clips", &args)?;
    println!("wrote {written} clips to {}", args.out.display());
    Ok(())
}
