use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vacshift_core::basis::BoxParams;
use vacshift_core::fock::{ModeWindow, VacuumChoice, MAX_MODES};
use vacshift_core::potential::{make_gauge_potential, ChiSpec, Potential, Profile};
use vacshift_core::vacuum::Truncation;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: &str = "vacshift-report/1";

/// One JSON document drives every subcommand. Every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "box")]
    pub box_params: BoxParams,
    /// Largest `|n|` kept. Sized from the sweep when absent.
    pub basis_size: Option<usize>,
    pub potential: PotentialConfig,
    pub sweep: SweepConfig,
    pub oracle: OracleConfig,
    pub lattice: LatticeConfig,
    pub gauge_check: GaugeCheckConfig,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            box_params: BoxParams { a: 1.0, m: 0.0 },
            basis_size: None,
            potential: PotentialConfig::default(),
            sweep: SweepConfig::default(),
            oracle: OracleConfig::default(),
            lattice: LatticeConfig::default(),
            gauge_check: GaugeCheckConfig::default(),
            output: OutputConfig::default(),
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Zero,
    PureGauge { chi: ChiSpec },
    General {
        #[serde(default = "zero_profile")]
        a0: Profile,
        #[serde(default = "zero_profile")]
        ay: Profile,
    },
}

fn zero_profile() -> Profile {
    Profile::Zero
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::PureGauge { chi: ChiSpec::sine_series(vec![1.0]) }
    }
}

impl PotentialConfig {
    pub fn build(&self, params: &BoxParams) -> Result<Potential> {
        Ok(match self {
            PotentialConfig::Zero => Potential::zero(params),
            PotentialConfig::PureGauge { chi } => make_gauge_potential(chi.clone(), params)?,
            PotentialConfig::General { a0, ay } => Potential::general(a0.clone(), ay.clone(), params)?,
        })
    }

    /// The gauge function for the gauge checks; a zero potential is `chi = 0`.
    pub fn gauge_spec(&self) -> Result<ChiSpec> {
        match self {
            PotentialConfig::Zero => Ok(ChiSpec::sine_series(vec![0.0])),
            PotentialConfig::PureGauge { chi } => Ok(chi.clone()),
            PotentialConfig::General { .. } => Err(CliError::Usage("gauge-check needs a pure_gauge or zero potential".into())),
        }
    }
}

/// Truncations to sweep. Lists are zipped; a list of length one is
/// broadcast against the others.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub l: Vec<usize>,
    pub m_inner: Vec<usize>,
    pub d: Vec<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { l: vec![4, 8, 16], m_inner: vec![100, 200, 400], d: vec![96, 192, 384] }
    }
}

impl SweepConfig {
    pub fn truncations(&self) -> Result<Vec<Truncation>> {
        let lens = [self.l.len(), self.m_inner.len(), self.d.len()];
        if lens.contains(&0) {
            return Err(CliError::Usage("sweep lists l, m_inner and d must be non-empty".into()));
        }
        let rows = *lens.iter().max().unwrap();
        if lens.iter().any(|&n| n != 1 && n != rows) {
            return Err(CliError::Usage(format!("sweep lists have incompatible lengths {lens:?}")));
        }
        let pick = |v: &[usize], i: usize| if v.len() == 1 { v[0] } else { v[i] };
        (0..rows)
            .map(|i| Truncation::new(pick(&self.l, i), pick(&self.m_inner, i), pick(&self.d, i)).map_err(CliError::from))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub k_neg: usize,
    pub k_pos: usize,
    pub lambdas: Vec<f64>,
    /// Filled band of the second vacuum; omitted means standard vacuum only.
    pub band_l: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { k_neg: 4, k_pos: 3, lambdas: vec![0.2, 0.1, 0.05], band_l: Some(2) }
    }
}

impl OracleConfig {
    pub fn window(&self) -> Result<ModeWindow> {
        if self.k_neg + self.k_pos > MAX_MODES {
            return Err(CliError::Usage(format!("oracle window {} + {} exceeds {MAX_MODES} modes", self.k_neg, self.k_pos)));
        }
        Ok(ModeWindow::new(self.k_neg, self.k_pos)?)
    }

    pub fn vacua(&self) -> Vec<VacuumChoice> {
        let mut v = vec![VacuumChoice::Standard];
        v.extend(self.band_l.map(|l| VacuumChoice::Band { l }));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeConfig {
    pub n_check: usize,
    pub grid_sizes: Vec<usize>,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self { n_check: 3, grid_sizes: vec![200, 400, 800] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeCheckConfig {
    /// Levels `|n| <= n_max` are checked.
    pub n_max: usize,
    pub inner_cutoffs: Vec<usize>,
    pub residual_points: usize,
}

impl Default for GaugeCheckConfig {
    fn default() -> Self {
        Self { n_max: 8, inner_cutoffs: vec![40, 80, 160], residual_points: 201 }
    }
}

/// Where each subcommand writes. Unset paths go to stdout.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub spectrum: Option<PathBuf>,
    pub gauge_check: Option<PathBuf>,
    pub vacuum_sweep: Option<PathBuf>,
    pub vacuum_summary: Option<PathBuf>,
    pub fock_oracle: Option<PathBuf>,
    pub matrix_elements: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub gauge_residual: f64,
    pub first_order: f64,
    pub completeness: f64,
    pub orthonormality: f64,
    pub eigen_residual: f64,
    pub lattice: f64,
    pub reconciliation: f64,
    pub cancellation_ratio: f64,
    pub fock_identity: f64,
    pub pt_relative: f64,
    pub slope: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gauge_residual: 1e-8,
            first_order: 1e-10,
            completeness: 1e-10,
            orthonormality: 1e-10,
            eigen_residual: 1e-8,
            lattice: 1e-3,
            reconciliation: 1e-13,
            cancellation_ratio: 0.1,
            fock_identity: 1e-14,
            pt_relative: 1e-12,
            slope: 0.3,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { context: format!("reading {}", path.display()), source })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn params(&self) -> Result<BoxParams> {
        let p = BoxParams::new(self.box_params.a, self.box_params.m)?;
        Ok(p)
    }

    /// `basis_size` if given, after checking it covers `needed`; otherwise
    /// the larger of `needed` and `default`.
    pub fn basis_size_for(&self, needed: usize, default: usize) -> Result<usize> {
        match self.basis_size {
            Some(n) if n < needed.max(1) => Err(CliError::Usage(format!("basis_size {n} is smaller than the {needed} levels this run needs"))),
            Some(n) => Ok(n),
            None => Ok(needed.max(default).max(1)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_broadcasts_singletons() {
        let s = SweepConfig { l: vec![2, 4], m_inner: vec![10], d: vec![8, 16] };
        let t = s.truncations().unwrap();
        assert_eq!(t, vec![Truncation::new(2, 10, 8).unwrap(), Truncation::new(4, 10, 16).unwrap()]);
        assert!(SweepConfig { l: vec![], ..s.clone() }.truncations().is_err());
        assert!(SweepConfig { m_inner: vec![1, 2, 3], ..s }.truncations().is_err());
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let c: ExperimentConfig = serde_json::from_str(r#"{"box": {"a": 2.0, "m": 0.5}, "oracle": {"k_neg": 3}}"#).unwrap();
        assert_eq!(c.box_params, BoxParams { a: 2.0, m: 0.5 });
        assert_eq!(c.oracle.k_neg, 3);
        assert_eq!(c.oracle.k_pos, 3);
        assert_eq!(c.sweep, SweepConfig::default());
    }

    #[test]
    fn config_round_trips() {
        let c = ExperimentConfig {
            potential: PotentialConfig::General { a0: Profile::Step { value: -1.0, half_width: 0.5 }, ay: Profile::Zero },
            ..Default::default()
        };
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn basis_size_must_cover_the_run() {
        let mut c = ExperimentConfig::default();
        assert_eq!(c.basis_size_for(5, 8).unwrap(), 8);
        c.basis_size = Some(4);
        assert!(c.basis_size_for(5, 8).is_err());
    }
}
