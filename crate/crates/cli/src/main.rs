use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhsense::metrology::DerivativePath;
use nhsense::{Bc, Family};
use nhsense_cli::config::{parse_config, Format, Grid, ModelConfig, Output, RunConfig, Task};
use nhsense_cli::recipes::RECIPES;
use nhsense_cli::runner::run;
use nhsense_cli::CliError;

#[derive(Parser)]
#[command(name = "nhsense", version, about = "Non-Hermitian sensing pipelines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues with residuals and error bounds (optionally Bloch traces).
    Spectrum(Overrides),
    /// Spectral winding numbers around reference energies.
    Winding(Overrides),
    /// Summed eigenstate populations per site.
    Population(Overrides),
    /// Fisher records over the (λ, L) grid.
    Qfi(Overrides),
    /// Fisher records and a power-law fit per λ.
    Scaling(Overrides),
    /// Scaling exponent b(λ) over a λ grid.
    Sweep(Overrides),
    /// Run a named figure recipe.
    Reproduce {
        figure: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// List recipe names.
    Recipes,
}

#[derive(Args)]
struct Overrides {
    /// TOML run config; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    family: Option<Family>,
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, value_parser = parse_bc)]
    bc: Option<Bc>,
    #[arg(long, value_parser = parse_bc)]
    bc_y: Option<Bc>,
    /// Model parameter as NAME=VALUE; repeatable.
    #[arg(long = "param", value_parser = parse_kv)]
    params: Vec<(String, f64)>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    nk: Option<usize>,
    #[arg(long)]
    fd_step: Option<f64>,
    /// steady, edge, m=<k> or m=L.
    #[arg(long)]
    selector: Option<String>,
    #[arg(long, value_parser = parse_path)]
    path: Option<DerivativePath>,
    #[arg(long)]
    allow_untrusted: bool,
    /// Reference energy as RE,IM; repeatable.
    #[arg(long = "e0", value_parser = parse_complex, allow_hyphen_values = true)]
    e0: Vec<[f64; 2]>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    kx: Option<Vec<f64>>,
    #[arg(long)]
    curves: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn parse_kv(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected NAME=VALUE")?;
    Ok((k.to_string(), v.parse().map_err(|e| format!("{v}: {e}"))?))
}

fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').unwrap_or((s, "0"));
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    Ok([p(a)?, p(b)?])
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::ALL
        .into_iter()
        .find(|f| f.tag() == s || format!("{f:?}") == s)
        .ok_or_else(|| format!("unknown family {s:?}"))
}

fn parse_bc(s: &str) -> Result<Bc, String> {
    match s {
        "pbc" => Ok(Bc::Pbc),
        "obc" => Ok(Bc::Obc),
        _ => Err(format!("expected pbc or obc, got {s:?}")),
    }
}

fn parse_path(s: &str) -> Result<DerivativePath, String> {
    match s {
        "auto" => Ok(DerivativePath::Auto),
        "analytic" => Ok(DerivativePath::Analytic),
        "numeric" => Ok(DerivativePath::Numeric),
        _ => Err(format!("expected auto, analytic or numeric, got {s:?}")),
    }
}

fn build_config(task: Task, o: Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = match &o.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            let mut c = parse_config(&text)?;
            c.task = task;
            c
        }
        None => RunConfig { task, figure: None, model: None, grid: Grid::default(), output: Output::default() },
    };
    if cfg.model.is_none() {
        let family = o.family.ok_or_else(|| CliError::Config("model: give --config or --family".into()))?;
        cfg.model = Some(ModelConfig {
            family,
            size: o.size.unwrap_or(20),
            bc: o.bc.unwrap_or(Bc::Obc),
            bc_y: None,
            inter_cell: Default::default(),
            params: Default::default(),
        });
    }
    let m = cfg.model.as_mut().unwrap();
    if let Some(f) = o.family {
        m.family = f;
    }
    if let Some(s) = o.size {
        m.size = s;
    }
    if let Some(b) = o.bc {
        m.bc = b;
    }
    if o.bc_y.is_some() {
        m.bc_y = o.bc_y;
    }
    m.params.extend(o.params);
    let g = &mut cfg.grid;
    if o.lambdas.is_some() {
        g.lambdas = o.lambdas;
    }
    if o.sizes.is_some() {
        g.sizes = o.sizes;
    }
    if let Some(n) = o.nk {
        g.nk = n;
    }
    if let Some(d) = o.fd_step {
        g.fd_step = d;
    }
    if let Some(s) = o.selector {
        g.selector = s;
    }
    if let Some(p) = o.path {
        g.path = p;
    }
    g.allow_untrusted |= o.allow_untrusted;
    if !o.e0.is_empty() {
        g.e0 = o.e0;
    }
    if let Some(k) = o.kx {
        g.kx = k;
    }
    g.curves |= o.curves;
    if let Some(d) = o.out {
        cfg.output.dir = d;
    }
    if let Some(f) = o.format {
        cfg.output.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let cfg = match cli.command {
        Command::Recipes => {
            for r in RECIPES {
                println!("{r}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Reproduce { figure, out, format } => Ok(RunConfig {
            task: Task::Reproduce,
            output: Output {
                dir: out.unwrap_or_else(|| PathBuf::from("out").join(&figure)),
                format: format.unwrap_or_default(),
            },
            figure: Some(figure),
            model: None,
            grid: Grid::default(),
        }),
        Command::Spectrum(o) => build_config(Task::Spectrum, o),
        Command::Winding(o) => build_config(Task::Winding, o),
        Command::Population(o) => build_config(Task::Population, o),
        Command::Qfi(o) => build_config(Task::Qfi, o),
        Command::Scaling(o) => build_config(Task::Scaling, o),
        Command::Sweep(o) => build_config(Task::Sweep, o),
    };
    let result = cfg.and_then(|c| run(&c));
    match result {
        Ok(report) => {
            for f in &report.failures {
                eprintln!("failed cell {f:?}");
            }
            println!("{} cells, {} failed", report.cells, report.failures.len());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
