use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use vacshift_core::potential::{ChiFamily, ChiSpec};

use crate::commands::{self, Outcome};
use crate::config::{ExperimentConfig, PotentialConfig};
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "vacshift", version, about = "Vacuum-energy experiments for a confined 1+1D Dirac field")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Free spectrum as CSV, with the lattice cross-check.
    Spectrum(CommonArgs),
    /// Exactness checks for a pure-gauge potential, as JSON.
    GaugeCheck(CommonArgs),
    /// Vacuum-energy sums over the truncation sweep: CSV table plus JSON summary.
    VacuumSweep(SweepArgs),
    /// Perturbation theory against exact Fock-space diagonalization, as JSON.
    FockOracle(OracleArgs),
    /// Matrix-element table as CSV.
    MatrixElements(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON experiment config; defaults apply to anything it leaves out.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Box half-width.
    #[arg(long)]
    pub a: Option<f64>,
    /// Fermion mass.
    #[arg(long)]
    pub mass: Option<f64>,
    #[arg(long)]
    pub basis_size: Option<usize>,
    /// Pure-gauge family: sine-series, bump-polynomial or raw-polynomial.
    #[arg(long, value_parser = parse_family, requires = "chi")]
    pub chi_family: Option<ChiFamily>,
    /// Gauge-function coefficients, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub chi: Option<Vec<f64>>,
    /// Use V = 0.
    #[arg(long, conflicts_with_all = ["chi", "chi_family"])]
    pub zero_potential: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_delimiter = ',')]
    pub l: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub m_inner: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// JSON summary file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub k_neg: Option<usize>,
    #[arg(long)]
    pub k_pos: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Filled band of the second vacuum; 0 disables it.
    #[arg(long)]
    pub band_l: Option<usize>,
}

fn parse_family(s: &str) -> std::result::Result<ChiFamily, String> {
    match s {
        "sine-series" | "sine_series" => Ok(ChiFamily::SineSeries),
        "bump-polynomial" | "bump_polynomial" => Ok(ChiFamily::BumpPolynomial),
        "raw-polynomial" | "raw_polynomial" => Ok(ChiFamily::RawPolynomial),
        _ => Err(format!("unknown gauge family `{s}`")),
    }
}

impl CommonArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(a) = self.a {
            cfg.box_params.a = a;
        }
        if let Some(m) = self.mass {
            cfg.box_params.m = m;
        }
        if self.basis_size.is_some() {
            cfg.basis_size = self.basis_size;
        }
        if let Some(c) = &self.chi {
            let family = self.chi_family.unwrap_or(ChiFamily::SineSeries);
            cfg.potential = PotentialConfig::PureGauge { chi: ChiSpec { family, coefficients: c.clone() } };
        }
        if self.zero_potential {
            cfg.potential = PotentialConfig::Zero;
        }
    }

    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        self.apply(&mut cfg);
        Ok(cfg)
    }
}

impl Command {
    /// Resolves the effective config and runs the command.
    pub fn run(&self) -> Result<Outcome> {
        match self {
            Command::Spectrum(c) => {
                let mut cfg = c.load()?;
                set(&mut cfg.output.spectrum, &c.out);
                commands::spectrum(&cfg)
            }
            Command::GaugeCheck(c) => {
                let mut cfg = c.load()?;
                set(&mut cfg.output.gauge_check, &c.out);
                commands::gauge_check(&cfg)
            }
            Command::MatrixElements(c) => {
                let mut cfg = c.load()?;
                set(&mut cfg.output.matrix_elements, &c.out);
                commands::matrix_elements(&cfg)
            }
            Command::VacuumSweep(s) => {
                let mut cfg = s.common.load()?;
                set(&mut cfg.output.vacuum_sweep, &s.common.out);
                set(&mut cfg.output.vacuum_summary, &s.summary);
                if let Some(v) = &s.l {
                    cfg.sweep.l = v.clone();
                }
                if let Some(v) = &s.m_inner {
                    cfg.sweep.m_inner = v.clone();
                }
                if let Some(v) = &s.d {
                    cfg.sweep.d = v.clone();
                }
                commands::vacuum_sweep(&cfg)
            }
            Command::FockOracle(o) => {
                let mut cfg = o.common.load()?;
                set(&mut cfg.output.fock_oracle, &o.common.out);
                if let Some(k) = o.k_neg {
                    cfg.oracle.k_neg = k;
                }
                if let Some(k) = o.k_pos {
                    cfg.oracle.k_pos = k;
                }
                if let Some(l) = &o.lambdas {
                    cfg.oracle.lambdas = l.clone();
                }
                match o.band_l {
                    Some(0) => cfg.oracle.band_l = None,
                    Some(l) => cfg.oracle.band_l = Some(l),
                    None => {}
                }
                if cfg.oracle.lambdas.iter().any(|l| !l.is_finite()) {
                    return Err(CliError::Usage("lambdas must be finite".into()));
                }
                commands::fock_oracle(&cfg)
            }
        }
    }
}

fn set(slot: &mut Option<PathBuf>, value: &Option<PathBuf>) {
    if value.is_some() {
        slot.clone_from(value);
    }
}
