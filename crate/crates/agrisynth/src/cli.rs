//! The `agrisynth` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use agrisynth_core::augment;
use agrisynth_core::generate::{self, gen_column};
use agrisynth_core::model::{self, AnyModel, Regressor};
use agrisynth_core::optimize::{self, explained_variability, SurrogateYield};
use agrisynth_core::simulate::{blend_weather, run_season};
use agrisynth_core::validate::validate_tables;
use agrisynth_core::{Column, Date, Rng, Table, WeatherSeries};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::{Catalog, CatalogEntry, Kind, Query, TimeRange};
use crate::config::{self, digest};
use crate::csv_io::{read_csv_auto, write_csv_with_schema as write_csv};
use crate::model_io::ModelArtifact;
use crate::power::{PowerClient, PowerRequest};
use crate::visualize::{self, ChartSpec};
use crate::{demo, Error};

#[derive(Parser, Debug)]
#[command(name = "agrisynth", version, about = "Synthetic agricultural data toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate weather, a soil grid, field trials or independent columns.
    Generate(GenerateArgs),
    /// Append synthetic rows (SMOTE, jitter or extrapolation) to a table.
    Augment(AugmentArgs),
    /// Compare a synthetic table against a real one.
    Validate(ValidateArgs),
    /// Train, apply or evaluate yield models.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Recommend per-field NPK rates.
    Optimize(OptimizeArgs),
    /// Simulate a growing season.
    Simulate(SimulateArgs),
    /// Render SVG charts.
    #[command(subcommand)]
    Visualize(VisualizeCommand),
    /// Inspect or extend a dataset catalog.
    #[command(subcommand)]
    Catalog(CatalogCommand),
    /// Run the end-to-end augmentation scenario.
    Demo(DemoArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
}

#[derive(Args, Debug)]
pub struct Common {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random draw; overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Tabular output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct AugmentArgs {
    #[arg(short, long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub synth: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON report.
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum ModelCommand {
    /// Fit a model; with `test_seasons` set, also report holdout metrics.
    Train {
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        /// JSON evaluation report on the held-out seasons.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Append a `prediction` column to a table.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score a model on a table containing the target column.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// One row per field.
    #[arg(short, long)]
    pub input: PathBuf,
    /// Fitted model artifact; default is the config's `yield_response`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// JSON summary with explained variability against the observed rates.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Read POWER weather from the fixture directory; never use the network.
    #[arg(long)]
    pub offline: bool,
    /// Also write the (possibly blended) weather series as CSV.
    #[arg(long)]
    pub weather_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ChartArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum VisualizeCommand {
    Histogram {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        column: String,
        #[command(flatten)]
        chart: ChartArgs,
    },
    Compare {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        #[arg(long)]
        column: String,
        #[command(flatten)]
        chart: ChartArgs,
    },
    Timeseries {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value = "date")]
        x: String,
        /// Comma-separated series columns.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[command(flatten)]
        chart: ChartArgs,
    },
    Heatmap {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value = "x")]
        x: String,
        #[arg(long, default_value = "y")]
        y: String,
        #[arg(long, default_value = "value")]
        value: String,
        #[command(flatten)]
        chart: ChartArgs,
    },
}

#[derive(Subcommand, Debug)]
pub enum CatalogCommand {
    /// Print every entry as JSON.
    List {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Print matching entries as JSON, ordered by id.
    Query {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<Kind>,
        #[arg(long)]
        region: Option<String>,
        /// Keep entries overlapping [from, to].
        #[arg(long, requires = "to")]
        from: Option<Date>,
        #[arg(long, requires = "from")]
        to: Option<Date>,
    },
    /// Add an existing file to the manifest (created if missing).
    Register {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, value_parser = parse_kind)]
        kind: Kind,
        #[arg(long)]
        region: String,
        #[arg(long)]
        start: Date,
        #[arg(long)]
        end: Date,
        /// Relative to the manifest's directory.
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        schema_path: Option<PathBuf>,
        #[arg(long, default_value = "")]
        provenance: String,
    },
}

fn parse_kind(s: &str) -> Result<Kind, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown kind `{s}` (weather, soil, trials, synthetic)"))
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// Use the bundled trials table instead of generating one.
    #[arg(long)]
    pub bundled: bool,
    #[command(flatten)]
    pub common: Common,
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn announce<T: Serialize>(command: &str, seed: Option<u64>, cfg: &T) {
    let seed = seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    eprintln!("agrisynth {command}: seed={seed} config={}", digest(cfg));
}

fn write_table(table: &Table, common: &Common) -> Result<(), Error> {
    match common.format {
        Format::Csv => Ok(write_csv(table, &common.output)?),
    }
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read(path: &Path) -> Result<Table, Error> {
    Ok(read_csv_auto(path)?)
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Generate(a) => cmd_generate(a),
        Command::Augment(a) => cmd_augment(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Model(m) => cmd_model(m),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Visualize(v) => cmd_visualize(v),
        Command::Catalog(c) => cmd_catalog(c),
        Command::Demo(a) => cmd_demo(a),
    }
}

fn require_config(c: &Common, command: &str) -> Result<PathBuf, Error> {
    c.config.clone().ok_or_else(|| Error::Usage(format!("{command} needs --config")))
}

fn cmd_generate(a: GenerateArgs) -> Result<(), Error> {
    let mut cfg: config::GenerateConfig = config::load(&require_config(&a.common, "generate")?)?;
    let seed = config::seed(a.common.seed, cfg.seed)?;
    cfg.seed = Some(seed);
    announce("generate", Some(seed), &cfg);
    let sections = [cfg.weather.is_some(), cfg.soil_grid.is_some(), cfg.trials.is_some(), cfg.columns.is_some()];
    if sections.iter().filter(|s| **s).count() != 1 {
        return Err(Error::Config("exactly one of [weather], [soil_grid], [trials], [columns] is required".into()));
    }
    let rng = Rng::new(seed);
    let table = if let Some(w) = &cfg.weather {
        generate::gen_weather(&w.params, w.start, w.days, &rng)?.to_table()
    } else if let Some(g) = &cfg.soil_grid {
        generate::gen_soil_grid(g, &rng)?
    } else if let Some(t) = &cfg.trials {
        generate::gen_trials(t, &rng)?
    } else {
        let spec = cfg.columns.as_ref().expect("one section is set");
        let mut t = Table::new();
        for c in &spec.columns {
            let mut stream = rng.split(&format!("column/{}", c.name));
            t.push_column(c.name.clone(), Column::Float(gen_column(&c.dist, spec.n, &mut stream)?))?;
        }
        t
    };
    write_table(&table, &a.common)
}

fn cmd_augment(a: AugmentArgs) -> Result<(), Error> {
    let mut cfg: config::AugmentConfig = config::load(&require_config(&a.common, "augment")?)?;
    let seed = config::seed(a.common.seed, cfg.seed)?;
    cfg.seed = Some(seed);
    announce("augment", Some(seed), &cfg);
    let table = read(&a.input)?;
    let out = augment::stratified_oversample(&table, &cfg.plan, &Rng::new(seed))?;
    write_table(&out, &a.common)
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Error> {
    let cfg: config::ValidateConfig = config::load_or_default(a.config.as_deref())?;
    announce("validate", None, &cfg);
    let real = read(&a.real)?;
    let synth = read(&a.synth)?;
    let report = validate_tables(&real, &synth, &cfg.options)?;
    write_json(&report, &a.output)
}

fn feature_list(table: &Table, cfg: &config::ModelConfig) -> Vec<String> {
    match &cfg.features {
        Some(f) => f.clone(),
        None => model::numeric_features(table, &[cfg.target.as_str()]),
    }
}

fn cmd_model(m: ModelCommand) -> Result<(), Error> {
    match m {
        ModelCommand::Train { input, common, report } => {
            let mut cfg: config::ModelConfig = config::load(&require_config(&common, "model train")?)?;
            let needs_seed = cfg.stack.is_some();
            let seed = if needs_seed { Some(config::seed(common.seed, cfg.seed)?) } else { common.seed.or(cfg.seed) };
            cfg.seed = seed;
            announce("model train", seed, &cfg);
            let table = read(&input)?;
            let (train, test) = if cfg.test_seasons.is_empty() {
                (table.clone(), None)
            } else {
                let held: Vec<&str> = cfg.test_seasons.iter().map(String::as_str).collect();
                let (tr, te) = model::temporal_split(&table, &cfg.season_col, &held)?;
                (tr, Some(te))
            };
            let features = feature_list(&train, &cfg);
            let y = train.float(&cfg.target)?.to_vec();
            let fitted = match (&cfg.regressor, &cfg.stack) {
                (Some(spec), None) => AnyModel::Single(model::fit_columns(spec, &train, &features, &y)?),
                (None, Some(stack)) => AnyModel::Stacked(model::fit_stacked_columns(
                    stack,
                    &train,
                    &features,
                    &y,
                    &Rng::new(seed.expect("stack requires a seed")),
                )?),
                _ => return Err(Error::Config("exactly one of [regressor] or [stack] is required".into())),
            };
            if let Some(path) = report {
                let test = test.ok_or_else(|| Error::Usage("--report needs `test_seasons` in the config".into()))?;
                let r = model::evaluate(&fitted, &test, test.float(&cfg.target)?)?;
                write_json(&r, &path)?;
            }
            ModelArtifact::new(&cfg.target, fitted).save(&common.output)
        }
        ModelCommand::Predict { model: path, input, output } => {
            let art = ModelArtifact::load(&path)?;
            announce("model predict", None, &art);
            let mut table = read(&input)?;
            let pred = art.model.predict(&table)?;
            table.push_column("prediction", Column::Float(pred))?;
            Ok(write_csv(&table, &output)?)
        }
        ModelCommand::Evaluate { model: path, input, output } => {
            let art = ModelArtifact::load(&path)?;
            announce("model evaluate", None, &art);
            let table = read(&input)?;
            let r = model::evaluate(&art.model, &table, table.float(&art.target)?)?;
            write_json(&r, &output)
        }
    }
}

#[derive(Serialize)]
struct OptimizeSummary {
    fields: usize,
    mean_predicted_gain: f64,
    /// Per nutrient (n, p, k); absent when the input lacks observed rates or
    /// they do not vary.
    explained_variability: Option<[f64; 3]>,
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), Error> {
    let mut cfg: config::OptimizeConfig = config::load(&require_config(&a.common, "optimize")?)?;
    let seed = config::seed(a.common.seed, cfg.seed)?;
    cfg.seed = Some(seed);
    announce("optimize", Some(seed), &cfg);
    let fields = read(&a.input)?;
    let rng = Rng::new(seed);
    let recs = match &a.model {
        Some(path) => {
            let art = ModelArtifact::load(path)?;
            let rc = &cfg.rate_columns;
            let surrogate = SurrogateYield::new(art.model, [rc[0].as_str(), rc[1].as_str(), rc[2].as_str()])?;
            optimize::recommend_npk(&fields, &surrogate, &cfg.objective, &cfg.solver, &rng)?
        }
        None => {
            let resp = cfg
                .yield_response
                .as_ref()
                .ok_or_else(|| Error::Config("set [yield_response] or pass --model".into()))?;
            optimize::recommend_npk(&fields, resp, &cfg.objective, &cfg.solver, &rng)?
        }
    };
    if let Some(path) = &a.report {
        let gains = recs.float("predicted_gain")?;
        let observed: Option<Vec<Vec<f64>>> = cfg.rate_columns.iter().map(|c| fields.numeric(c).ok()).collect();
        let ev = match observed {
            Some(obs) => {
                let mut out = [0.0; 3];
                let mut ok = true;
                for (i, rec_col) in ["rec_n", "rec_p", "rec_k"].iter().enumerate() {
                    match explained_variability(recs.float(rec_col)?, &obs[i]) {
                        Ok(v) => out[i] = v,
                        Err(_) => ok = false,
                    }
                }
                ok.then_some(out)
            }
            None => None,
        };
        let summary = OptimizeSummary {
            fields: recs.n_rows(),
            mean_predicted_gain: agrisynth_core::stats::mean(gains),
            explained_variability: ev,
        };
        write_json(&summary, path)?;
    }
    write_table(&recs, &a.common)
}

fn cmd_simulate(a: SimulateArgs) -> Result<(), Error> {
    let cfg_path = require_config(&a.common, "simulate")?;
    let mut cfg: config::SimulateConfig = config::load(&cfg_path)?;
    let base = cfg_path.parent().unwrap_or(Path::new(""));
    if let Some(p) = cfg.csv.as_mut() {
        *p = base.join(&*p);
    }
    if a.offline {
        if let Some(p) = cfg.power.as_mut() {
            p.offline = true;
        }
    }
    if let Some(p) = cfg.power.as_mut() {
        p.cache_dir = base.join(&p.cache_dir);
        p.fixture_dir = base.join(&p.fixture_dir);
    }
    let seed = if cfg.is_stochastic() { Some(config::seed(a.common.seed, cfg.seed)?) } else { a.common.seed.or(cfg.seed) };
    cfg.seed = seed;
    announce("simulate", seed, &cfg);
    let sources = [cfg.csv.is_some(), cfg.power.is_some(), cfg.generate.is_some()];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(Error::Config("exactly one weather source (csv, [power], [generate]) is required".into()));
    }
    let rng = seed.map(Rng::new);
    let mut weather = if let Some(path) = &cfg.csv {
        WeatherSeries::from_table(&read(path)?)?
    } else if let Some(p) = &cfg.power {
        let req = PowerRequest { lat: p.lat, lon: p.lon, start: p.start, end: p.end };
        let client = if p.offline { PowerClient::fixture(&p.fixture_dir) } else { PowerClient::live(&p.cache_dir) };
        client.fetch_daily(&req)?
    } else {
        let g = cfg.generate.as_ref().expect("one source is set");
        let rng = rng.as_ref().expect("generation is stochastic");
        generate::gen_weather(&g.params, g.start, g.days, &rng.split("simulate/weather"))?
    };
    if let Some(ext) = &cfg.extend {
        if ext.days > 0 {
            let rng = rng.as_ref().expect("extension is stochastic");
            weather = blend_weather(&weather, &ext.params, ext.days, &rng.split("simulate/extend"))?;
        }
    }
    let log = run_season(&weather, &cfg.crop, &cfg.actions)?;
    eprintln!(
        "agrisynth simulate: {} days, final yield {:.1} kg/ha, nutrients applied n={} p={} k={}",
        log.days.len(),
        log.final_yield,
        log.total_nutrients().n,
        log.total_nutrients().p,
        log.total_nutrients().k
    );
    if let Some(path) = &a.weather_out {
        write_csv(&weather.to_table(), path)?;
    }
    write_table(&log.to_table(), &a.common)
}

fn chart_spec(c: &ChartArgs, default_title: &str) -> Result<ChartSpec, Error> {
    let cfg: config::VisualizeConfig = config::load_or_default(c.config.as_deref())?;
    let mut spec = cfg.chart;
    if let Some(t) = &c.title {
        spec.title = t.clone();
    } else if spec.title.is_empty() {
        spec.title = default_title.into();
    }
    announce("visualize", None, &spec);
    Ok(spec)
}

fn write_svg(svg: &str, path: &Path) -> Result<(), Error> {
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn cmd_visualize(v: VisualizeCommand) -> Result<(), Error> {
    match v {
        VisualizeCommand::Histogram { input, column, chart } => {
            let mut spec = chart_spec(&chart, &column)?;
            if spec.x_label.is_empty() {
                spec.x_label = column.clone();
            }
            let t = read(&input)?;
            write_svg(&visualize::render_histogram(&t.numeric(&column)?, &spec)?, &chart.output)
        }
        VisualizeCommand::Compare { real, synth, column, chart } => {
            let mut spec = chart_spec(&chart, &format!("{column}: real vs synthetic"))?;
            if spec.x_label.is_empty() {
                spec.x_label = column.clone();
            }
            let (r, s) = (read(&real)?, read(&synth)?);
            let svg = visualize::render_compare(&r.numeric(&column)?, &s.numeric(&column)?, &spec)?;
            write_svg(&svg, &chart.output)
        }
        VisualizeCommand::Timeseries { input, x, y, chart } => {
            let spec = chart_spec(&chart, &y.join(", "))?;
            let t = read(&input)?;
            let cols: Vec<&str> = y.iter().map(String::as_str).collect();
            write_svg(&visualize::render_timeseries(&t, &x, &cols, &spec)?, &chart.output)
        }
        VisualizeCommand::Heatmap { input, x, y, value, chart } => {
            let spec = chart_spec(&chart, &value)?;
            let t = read(&input)?;
            write_svg(&visualize::render_heatmap(&t, &x, &y, &value, &spec)?, &chart.output)
        }
    }
}

fn print_entries(entries: &[&CatalogEntry]) -> Result<(), Error> {
    use std::io::Write;
    let text = serde_json::to_string_pretty(entries).expect("entries serialize");
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::io(Path::new("<stdout>"), e)),
        _ => Ok(()),
    }
}

fn cmd_catalog(c: CatalogCommand) -> Result<(), Error> {
    match c {
        CatalogCommand::List { manifest } => {
            let cat = Catalog::load(&manifest)?;
            print_entries(&cat.query(&Query::default()))?;
        }
        CatalogCommand::Query { manifest, kind, region, from, to } => {
            let cat = Catalog::load(&manifest)?;
            let overlaps = from.zip(to).map(|(start, end)| TimeRange { start, end });
            print_entries(&cat.query(&Query { kind, region, overlaps }))?;
        }
        CatalogCommand::Register { manifest, id, kind, region, start, end, path, schema_path, provenance } => {
            let mut cat = if manifest.is_file() { Catalog::load(&manifest)? } else { Catalog::create(&manifest) };
            let entry = CatalogEntry { id, kind, region, time_range: TimeRange { start, end }, path, schema_path, provenance };
            cat.register_output(entry)?;
            eprintln!("agrisynth catalog: {} entries in {}", cat.len(), manifest.display());
        }
    }
    Ok(())
}

fn cmd_demo(a: DemoArgs) -> Result<(), Error> {
    let mut cfg: config::DemoRunConfig = config::load_or_default(a.common.config.as_deref())?;
    let seed = config::seed(a.common.seed, cfg.seed)?;
    cfg.seed = Some(seed);
    announce("demo", Some(seed), &cfg);
    let report = if a.bundled { demo::run_on(&demo::bundled_trials(), &cfg.demo, seed)? } else { demo::run(&cfg.demo, seed)? };
    eprintln!(
        "agrisynth demo: test MAPE {:.3}% un-augmented, {:.3}% augmented; growth {:.1}%; overlap {}",
        report.unaugmented.mape,
        report.augmented.mape,
        report.growth_pct,
        report.overlap().map_or_else(|| "n/a".into(), |o| format!("{o:.4}"))
    );
    write_json(&report, &a.common.output)?;
    Ok(())
}
