//! Command-line front end.

pub mod config;
pub mod output;
pub mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analytic::theorem1_bounds;
use crate::error::{Error, Result};
use crate::model::LogBase;
use crate::montecarlo::{run_campaign, CampaignConfig, GeometryMode};
use crate::validation::{run_all, Level, ValidationOptions};

pub use config::{load_config, parse_config, parse_config_with};
pub use sweep::{preset_base, run_sweep, FigurePreset, SweepAxis, SweepRow, SweepSpec, SweepTable};

#[derive(Debug, Parser)]
#[command(
    name = "irs-secrecy",
    version,
    about = "Secrecy rates of IRS-assisted two-way pairs with an eavesdropper"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML configuration; keys it omits keep their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Campaign seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per campaign.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output directory. Without it, single tables go to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Report rates in nats instead of bits.
    #[arg(long, global = true)]
    pub nats: bool,
    /// Also write an SVG chart for sweeps and figures.
    #[arg(long, global = true)]
    pub svg: bool,
    /// User placement: fixed (disc centers) or random (uniform in the discs).
    #[arg(long, global = true, value_parser = parse_keyword::<GeometryMode>)]
    pub geometry: Option<GeometryMode>,
    /// Worker threads; 0 means all cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form rate bounds at the disc centers.
    Analytic,
    /// Monte Carlo average secrecy rates for every configured scheme.
    Simulate,
    /// Monte Carlo sweep over one parameter.
    Sweep {
        #[arg(long, value_parser = parse_keyword::<SweepAxis>)]
        axis: SweepAxis,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Add the closed-form bound columns.
        #[arg(long)]
        analytic: bool,
        /// Add the high-SNR reference, anchored at this axis value.
        #[arg(long)]
        reference_anchor: Option<f64>,
    },
    /// Reproduce a figure: fig1, fig2, fig3 or all.
    Figure { name: String },
    /// Run the acceptance criteria.
    Validate {
        #[arg(long, default_value = "quick", value_parser = parse_keyword::<Level>)]
        level: Level,
    },
}

fn parse_keyword<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl GlobalArgs {
    /// Defaults, then the config file, then flags.
    pub fn campaign_config(&self) -> Result<CampaignConfig> {
        let mut base = preset_base();
        if self.nats {
            base.params.log_base = LogBase::Nats;
        }
        let mut c = match &self.config {
            Some(path) => load_config(path, base)?,
            None => base,
        };
        if self.nats {
            c.params.log_base = LogBase::Nats;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.trials {
            c.trials = v;
        }
        if let Some(v) = self.geometry {
            c.geometry_mode = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        c.validate()?;
        Ok(c)
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes to `<out>/<name>` when an output directory is set, else stdout.
fn emit<F>(out: Option<&Path>, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(dir) => {
            ensure_dir(dir)?;
            let path = dir.join(name);
            output::write_file(&path, |w| f(w))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}

fn write_svg(dir: &Path, name: &str, svg: &str) -> Result<()> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

/// Emits one figure's CSV, and its SVG when requested, into `dir`.
pub fn run_figure_preset(preset: FigurePreset, base: &CampaignConfig, dir: &Path, svg: bool) -> Result<SweepTable> {
    let table = run_sweep(&preset.spec(base))?;
    emit(Some(dir), &format!("{preset}.csv"), |w| {
        output::write_sweep_csv(&table, w)
    })?;
    if svg {
        write_svg(
            dir,
            &format!("{preset}.svg"),
            &output::sweep_svg(&table, preset.title()),
        )?;
    }
    Ok(table)
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    let cfg = g.campaign_config()?;
    let out = g.out.as_deref();
    match &cli.command {
        Command::Analytic => {
            let bounds = theorem1_bounds(&cfg.params, &cfg.fixed_geometry())?;
            emit(out, "analytic.csv", |w| {
                output::write_analytic_csv(&cfg.params, &bounds, w)
            })?;
        }
        Command::Simulate => {
            let report = run_campaign(&cfg)?;
            emit(out, "campaign.csv", |w| {
                output::write_campaign_csv(&report, cfg.params.log_base, w)
            })?;
        }
        Command::Sweep {
            axis,
            values,
            analytic,
            reference_anchor,
        } => {
            let spec = SweepSpec {
                axis: *axis,
                values: values.clone(),
                base: cfg,
                include_analytic: *analytic,
                reference_anchor: *reference_anchor,
            };
            let table = run_sweep(&spec)?;
            emit(out, "sweep.csv", |w| output::write_sweep_csv(&table, w))?;
            if g.svg {
                let dir = out.unwrap_or(Path::new("."));
                write_svg(
                    dir,
                    "sweep.svg",
                    &output::sweep_svg(&table, &format!("Sum secrecy rate vs {axis}")),
                )?;
            }
        }
        Command::Figure { name } => {
            let presets = if name == "all" {
                FigurePreset::ALL.to_vec()
            } else {
                vec![name.parse::<FigurePreset>()?]
            };
            let dir = out.unwrap_or(Path::new("."));
            for p in presets {
                run_figure_preset(p, &cfg, dir, g.svg)?;
            }
        }
        Command::Validate { level } => {
            let opts = ValidationOptions {
                level: *level,
                seed: g.seed.unwrap_or(ValidationOptions::default().seed),
                workers: cfg.workers,
            };
            let reports = run_all(&opts);
            for r in &reports {
                eprintln!("{r}");
            }
            emit(out, "validation.csv", |w| output::write_validation_csv(&reports, w))?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}
