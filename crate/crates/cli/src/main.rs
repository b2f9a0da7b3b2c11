use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use paired_gof::selection::test_fitted;
use paired_gof::simulation::parse_grid;
use paired_gof::{
    aic, fit, parse_frequency_table, run_grid, select_model, BootstrapOptions, Error, FitOptions, FrequencyTable,
    GofMethod, ModelKind, TableFormat,
};

mod report;

use report::{FitRow, GofRow, Render};

#[derive(Debug, Parser)]
#[command(
    name = "paired-gof",
    version,
    about = "Goodness-of-fit tests for combined unilateral and bilateral binary data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum likelihood fits.
    Fit(TableArgs),
    /// Goodness-of-fit p-values per model and method.
    Gof(TableArgs),
    /// Choose the passing model with the smallest AIC.
    Select {
        #[command(flatten)]
        table: TableArgs,
        /// Every requested test must give a p-value above this.
        #[arg(long, visible_alias = "alpha", default_value_t = 0.05)]
        threshold: f64,
    },
    /// Monte Carlo rejection rates over a scenario grid.
    Simulate {
        /// Scenario grid (JSON).
        #[arg(long)]
        input: PathBuf,
        #[arg(long, required = true)]
        seed: Option<u64>,
        /// Override every scenario's test list.
        #[arg(long)]
        method: Option<String>,
        /// Override every scenario's inner bootstrap size.
        #[arg(long)]
        n_boot: Option<usize>,
        /// Override every scenario's outer replicate count.
        #[arg(long)]
        n_rep: Option<usize>,
        /// Override every scenario's nominal level.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_enum, default_value_t = Output::Table)]
        output: Output,
    },
}

#[derive(Debug, Args)]
struct TableArgs {
    /// Frequency table, JSON or CSV (by extension).
    #[arg(long)]
    input: PathBuf,
    /// Comma-separated model names, or `all`.
    #[arg(long, default_value = "all")]
    model: String,
    /// Comma-separated methods (g2, x2, x2adj, b1, b2, b3), or `all`.
    #[arg(long, default_value = "g2,x2,x2adj")]
    method: String,
    /// Required for bootstrap methods.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2000)]
    n_boot: usize,
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Convergence threshold on the nuisance update.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
}

impl FitArgs {
    fn options(&self) -> Result<FitOptions, Failure> {
        let opts = FitOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..FitOptions::default()
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
}

/// An error together with the exit status it maps to.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Malformed(_)
            | Error::MissingField { .. }
            | Error::NegativeCount { .. }
            | Error::ZeroGroups
            | Error::DegenerateGroup { .. }
            | Error::GroupMismatch { .. }
            | Error::WrongMethod(_)
            | Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

fn load_table(path: &PathBuf) -> Result<FrequencyTable, Failure> {
    let text = read_input(path)?;
    let format = TableFormat::from_path(&path.to_string_lossy());
    Ok(parse_frequency_table(&text, format)?)
}

fn parse_models(s: &str) -> Result<Vec<ModelKind>, Failure> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let items = if part.eq_ignore_ascii_case("all") {
            ModelKind::CANDIDATES.to_vec()
        } else {
            vec![part.parse::<ModelKind>()?]
        };
        for m in items {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("no models given".into()));
    }
    Ok(out)
}

fn boot_options(seed: Option<u64>, n_boot: usize, methods: &[GofMethod]) -> Result<Option<BootstrapOptions>, Failure> {
    if !methods.iter().any(|m| m.is_bootstrap()) {
        return Ok(None);
    }
    let seed = seed.ok_or_else(|| Failure::Usage("bootstrap methods need --seed".into()))?;
    let boot = BootstrapOptions::new(n_boot, seed);
    boot.validate()?;
    Ok(Some(boot))
}

fn run_fit(args: &TableArgs) -> Result<Box<dyn Render>, Failure> {
    let table = load_table(&args.input)?;
    let opts = args.fit.options()?;
    let mut rows = Vec::new();
    for model in parse_models(&args.model)? {
        let f = fit(model, &table, &opts)?;
        if !f.converged {
            return Err(Failure::Numerical(format!(
                "{model} did not converge in {} iterations",
                f.iterations
            )));
        }
        let a = aic(&f, &table)?;
        rows.push(FitRow::new(&f, a));
    }
    Ok(Box::new(rows))
}

fn run_gof(args: &TableArgs) -> Result<Box<dyn Render>, Failure> {
    let table = load_table(&args.input)?;
    let opts = args.fit.options()?;
    let methods = GofMethod::parse_list(&args.method)?;
    let boot = boot_options(args.seed, args.n_boot, &methods)?;
    let mut rows = Vec::new();
    for model in parse_models(&args.model)? {
        if model == ModelKind::Saturated {
            return Err(Failure::Usage("the saturated model has no goodness-of-fit test".into()));
        }
        let f = fit(model, &table, &opts)?;
        if !f.converged {
            return Err(Failure::Numerical(format!(
                "{model} did not converge in {} iterations",
                f.iterations
            )));
        }
        let results = test_fitted(&f, &table, &methods, boot.as_ref(), &opts)?;
        rows.push(GofRow {
            model,
            kappa: f.params.kappa,
            aic: aic(&f, &table)?,
            results,
        });
    }
    Ok(Box::new(rows))
}

fn run_select(args: &TableArgs, threshold: f64) -> Result<Box<dyn Render>, Failure> {
    let table = load_table(&args.input)?;
    let opts = args.fit.options()?;
    let methods = GofMethod::parse_list(&args.method)?;
    let boot = boot_options(args.seed, args.n_boot, &methods)?;
    let models = parse_models(&args.model)?;
    Ok(Box::new(select_model(
        &table,
        &models,
        &methods,
        threshold,
        boot.as_ref(),
        &opts,
    )?))
}

fn run(cli: &Cli) -> Result<(Box<dyn Render>, Output), Failure> {
    match &cli.command {
        Command::Fit(a) => Ok((run_fit(a)?, a.output)),
        Command::Gof(a) => Ok((run_gof(a)?, a.output)),
        Command::Select { table, threshold } => Ok((run_select(table, *threshold)?, table.output)),
        Command::Simulate {
            input,
            seed,
            method,
            n_boot,
            n_rep,
            alpha,
            fit,
            output,
        } => {
            let mut grid = parse_grid(&read_input(input)?)?;
            let opts = fit.options()?;
            let methods = method.as_deref().map(GofMethod::parse_list).transpose()?;
            for cfg in &mut grid {
                if let Some(m) = &methods {
                    cfg.methods = m.clone();
                }
                if let Some(b) = n_boot {
                    cfg.boot.n_boot = *b;
                }
                if let Some(n) = n_rep {
                    cfg.n_rep = *n;
                }
                if let Some(a) = alpha {
                    cfg.alpha = *a;
                }
                cfg.fit = opts.clone();
            }
            let seed = seed.ok_or_else(|| Failure::Usage("simulate needs --seed".into()))?;
            Ok((Box::new(run_grid(&grid, seed)?), *output))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = paired_gof::init_thread_pool() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match run(&cli) {
        Ok((report, output)) => {
            let text = match output {
                Output::Json => report.json(),
                Output::Table => report.table(),
            };
            println!("{text}");
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
