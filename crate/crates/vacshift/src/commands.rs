use std::path::PathBuf;

use serde::Serialize;
use vacshift_core::basis::{build_basis, uniform_grid, Basis, BoxParams};
use vacshift_core::elements::{
    derivative_identity_check, energies_for, gauge_matrix_element_identity, matrix_element, IndexWindow, MatrixElementTable,
};
use vacshift_core::fock::{build_operators, ExactShift, FreeSectorReport, IdentityReport, VacuumChoice};
use vacshift_core::lattice::{verify_spectrum_lattice, LatticeReport};
use vacshift_core::potential::{exact_gauge_solution_residual, make_gauge_potential, Potential};
use vacshift_core::vacuum::{
    completeness_route, first_order_shift, second_order_shift, summation_order_demo, vacuum_shift_report, x_l1_antisymmetry,
    OrderDemoRow, Truncation, VacuumShiftReport,
};

use crate::config::{ExperimentConfig, PotentialConfig, SCHEMA_VERSION};
use crate::error::{CliError, Result};
use crate::output::{csv_bytes, fmt_f64, json_bytes};

/// Bytes destined for a file, or stdout when `path` is unset.
#[derive(Debug)]
pub struct Artifact {
    pub path: Option<PathBuf>,
    pub bytes: Vec<u8>,
}

/// What a command produced. Violations are reported after the artifacts
/// are written and turn into exit code 2.
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub violations: Vec<String>,
}

#[derive(Serialize)]
struct RunReport<'a, T: Serialize> {
    schema: &'static str,
    command: &'static str,
    config: &'a ExperimentConfig,
    result: T,
}

fn report<T: Serialize>(command: &'static str, config: &ExperimentConfig, result: T) -> Result<Vec<u8>> {
    json_bytes(&RunReport { schema: SCHEMA_VERSION, command, config, result })
}

/// Every element of `window`, in row-major order.
pub fn build_table(basis: &Basis, pot: &Potential, window: IndexWindow) -> Result<MatrixElementTable> {
    #[cfg(feature = "parallel")]
    let values: Vec<_> = {
        use rayon::prelude::*;
        let rows: Vec<Vec<_>> = window
            .rows
            .par_iter()
            .map(|&m| window.cols.iter().map(|&n| matrix_element(basis, pot, m, n)).collect::<std::result::Result<Vec<_>, _>>())
            .collect::<std::result::Result<_, _>>()?;
        rows.into_iter().flatten().collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<_> = window
        .rows
        .iter()
        .flat_map(|&m| window.cols.iter().map(move |&n| (m, n)))
        .map(|(m, n)| matrix_element(basis, pot, m, n))
        .collect::<std::result::Result<_, _>>()?;
    let energies = energies_for(basis, &window)?;
    Ok(MatrixElementTable::from_values(window, energies, values)?)
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

// ---- spectrum ----

pub fn spectrum(config: &ExperimentConfig) -> Result<Outcome> {
    let params = config.params()?;
    let n_max = config.basis_size_for(1, 8)?;
    let basis = build_basis(params, n_max)?;
    let tol = &config.tolerances;
    let mut violations = Vec::new();

    let n_check = config.lattice.n_check.min(n_max);
    let lattice = if n_check > 0 && !config.lattice.grid_sizes.is_empty() {
        Some(verify_spectrum_lattice(&basis, n_check, &config.lattice.grid_sizes)?)
    } else {
        None
    };
    if let Some(l) = &lattice {
        let d = lattice_error(l);
        if d >= tol.lattice {
            violations.push(format!("lattice discrepancy {d:e} exceeds {:e}", tol.lattice));
        }
        if !l.is_converging() {
            violations.push("lattice discrepancy does not shrink under refinement".into());
        }
    }
    let ortho = basis.orthonormality_defect(n_max)?;
    if ortho >= tol.orthonormality {
        violations.push(format!("orthonormality defect {ortho:e} exceeds {:e}", tol.orthonormality));
    }
    let resid = basis.eigen_residual(201);
    if resid >= tol.eigen_residual {
        violations.push(format!("eigen-residual {resid:e} exceeds {:e}", tol.eigen_residual));
    }

    let finest = lattice.as_ref().and_then(LatticeReport::finest);
    let mut rows = vec![vec!["n".into(), "k_n".into(), "epsilon_n".into(), "lattice_epsilon".into(), "lattice_discrepancy".into()]];
    for mode in basis.iter() {
        let lat = finest.and_then(|g| g.levels.iter().find(|l| l.index == mode.index));
        rows.push(vec![
            mode.index.to_string(),
            fmt_f64(mode.momentum),
            fmt_f64(mode.energy),
            lat.map(|l| fmt_f64(l.lattice)).unwrap_or_default(),
            lat.map(|l| fmt_f64(l.discrepancy)).unwrap_or_default(),
        ]);
    }
    Ok(Outcome { artifacts: vec![Artifact { path: config.output.spectrum.clone(), bytes: csv_bytes(&rows)? }], violations })
}

/// Extrapolated discrepancy when available, else the finest grid's.
fn lattice_error(l: &LatticeReport) -> f64 {
    l.extrapolated_max_discrepancy().unwrap_or_else(|| l.finest().map_or(0.0, |g| g.max_discrepancy))
}

// ---- gauge-check ----

#[derive(Serialize)]
struct DirectShift {
    m_inner: usize,
    value: f64,
}

#[derive(Serialize)]
struct GaugeLevel {
    n: i32,
    energy: f64,
    residual: f64,
    first_order: f64,
    completeness_route: f64,
    direct: Vec<DirectShift>,
    direct_decreasing: bool,
}

#[derive(Serialize)]
struct GaugeChecks {
    residuals: bool,
    first_order: bool,
    completeness_route: bool,
    direct_decreasing: bool,
}

#[derive(Serialize)]
struct GaugeCheckResult {
    levels: Vec<GaugeLevel>,
    max_residual: f64,
    max_first_order: f64,
    max_completeness_route: f64,
    /// `max |V_mn - i (e_m - e_n) <m|chi|n>|` over the checked block.
    max_gauge_identity_discrepancy: f64,
    /// Largest defect of `d/dy(phi_m† sigma_y phi_n) = -i (e_m - e_n) phi_m† phi_n`.
    max_derivative_identity_defect: f64,
    table_hermiticity_defect: f64,
    checks: GaugeChecks,
}

pub fn gauge_check(config: &ExperimentConfig) -> Result<Outcome> {
    let params = config.params()?;
    let gc = &config.gauge_check;
    let tol = &config.tolerances;
    if gc.n_max == 0 {
        return Err(CliError::Usage("gauge_check.n_max must be at least 1".into()));
    }
    let spec = config.potential.gauge_spec()?;
    let pot = make_gauge_potential(spec, &params)?;
    let cutoffs = &gc.inner_cutoffs;
    let deepest = cutoffs.iter().copied().max().unwrap_or(0).max(gc.n_max);
    let basis = build_basis(params, config.basis_size_for(deepest, 0)?)?;

    let cols: Vec<i32> = basis.indices_up_to(gc.n_max).collect();
    let rows = IndexWindow::symmetric(deepest).rows;
    let table = build_table(&basis, &pot, IndexWindow { rows, cols: cols.clone() })?;

    let mut levels = Vec::with_capacity(cols.len());
    for &n in &cols {
        let direct: Vec<DirectShift> = cutoffs
            .iter()
            .map(|&c| second_order_shift(&table, n, c).map(|value| DirectShift { m_inner: c, value }))
            .collect::<std::result::Result<_, _>>()?;
        let mags: Vec<f64> = direct.iter().map(|d| d.value.abs()).collect();
        let direct_decreasing = mags.last().is_none_or(|&x| x == 0.0) || mags.windows(2).all(|w| w[1] < w[0]);
        levels.push(GaugeLevel {
            n,
            energy: basis.energy(n).unwrap(),
            residual: exact_gauge_solution_residual(&basis, &pot, n, gc.residual_points)?,
            first_order: first_order_shift(&table, n)?,
            completeness_route: completeness_route(&basis, &pot, n)?,
            direct,
            direct_decreasing,
        });
    }

    let grid = uniform_grid(params.a, 101);
    let mut identity: f64 = 0.0;
    let mut derivative: f64 = 0.0;
    for &m in &cols {
        for &n in &cols {
            identity = identity.max(gauge_matrix_element_identity(&basis, &pot, m, n)?.discrepancy);
            derivative = derivative.max(derivative_identity_check(&basis, m, n, &grid)?);
        }
    }

    let max = |f: fn(&GaugeLevel) -> f64| levels.iter().map(f).fold(0.0, f64::max);
    let max_residual = max(|l| l.residual);
    let max_first_order = max(|l| l.first_order.abs());
    let max_completeness_route = max(|l| l.completeness_route.abs());
    let checks = GaugeChecks {
        residuals: max_residual < tol.gauge_residual,
        first_order: max_first_order < tol.first_order,
        completeness_route: max_completeness_route < tol.completeness,
        direct_decreasing: levels.iter().all(|l| l.direct_decreasing),
    };
    let mut violations = Vec::new();
    if !checks.residuals {
        violations.push(format!("exact-solution residual {max_residual:e} exceeds {:e}", tol.gauge_residual));
    }
    if !checks.first_order {
        violations.push(format!("first-order shift {max_first_order:e} exceeds {:e}", tol.first_order));
    }
    if !checks.completeness_route {
        violations.push(format!("completeness route {max_completeness_route:e} exceeds {:e}", tol.completeness));
    }
    if !checks.direct_decreasing {
        violations.push("truncated second-order shift does not shrink as the inner cutoff grows".into());
    }
    let result = GaugeCheckResult {
        levels,
        max_residual,
        max_first_order,
        max_completeness_route,
        max_gauge_identity_discrepancy: identity,
        max_derivative_identity_defect: derivative,
        table_hermiticity_defect: table.hermiticity_defect(),
        checks,
    };
    let bytes = report("gauge-check", config, result)?;
    Ok(Outcome { artifacts: vec![Artifact { path: config.output.gauge_check.clone(), bytes }], violations })
}

// ---- vacuum-sweep ----

#[derive(Serialize)]
struct SweepRow {
    #[serde(flatten)]
    report: VacuumShiftReport,
    cancellation_ratio: f64,
    reconciliation_defect: f64,
    x_l1_pairwise: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    pure_gauge: bool,
    rows: Vec<SweepRow>,
    order_demo: Vec<OrderDemoRow>,
    max_reconciliation_defect: f64,
    /// Only asserted for pure-gauge potentials.
    cancellation_below_tolerance: Option<bool>,
    cancellation_decreasing: Option<bool>,
}

fn sweep_table(config: &ExperimentConfig, params: BoxParams, truncs: &[Truncation]) -> Result<MatrixElementTable> {
    let l_max = truncs.iter().map(|t| t.l).max().unwrap();
    let m_max = truncs.iter().map(|t| t.m_inner).max().unwrap();
    let deepest = truncs.iter().map(Truncation::deepest).max().unwrap();
    let basis = build_basis(params, config.basis_size_for(deepest.max(m_max), 0)?)?;
    let pot = config.potential.build(&params)?;
    build_table(&basis, &pot, IndexWindow::for_vacuum(l_max, m_max, deepest - l_max))
}

pub fn vacuum_sweep(config: &ExperimentConfig) -> Result<Outcome> {
    let params = config.params()?;
    let truncs = config.sweep.truncations()?;
    let table = sweep_table(config, params, &truncs)?;
    let tol = &config.tolerances;
    let pure_gauge = !matches!(config.potential, PotentialConfig::General { .. });

    let mut rows = Vec::with_capacity(truncs.len());
    for &t in &truncs {
        let report = vacuum_shift_report(&table, t)?;
        let x = x_l1_antisymmetry(&table, t.l)?;
        rows.push(SweepRow {
            cancellation_ratio: report.cancellation_ratio(),
            reconciliation_defect: report.reconciliation_defect(),
            x_l1_pairwise: x.pairwise_sum,
            report,
        });
    }
    let order_demo = summation_order_demo(&table, &truncs)?;

    let mut violations = Vec::new();
    let max_reconciliation_defect = rows.iter().map(|r| r.reconciliation_defect).fold(0.0, f64::max);
    if max_reconciliation_defect >= tol.reconciliation {
        violations.push(format!("hole/field-theory reconciliation {max_reconciliation_defect:e} exceeds {:e}", tol.reconciliation));
    }
    let (below, decreasing) = if pure_gauge {
        let below = rows.iter().all(|r| r.cancellation_ratio < tol.cancellation_ratio);
        if !below {
            violations.push(format!("|Y_L + X_L2| / |Y_L| reaches {:e}", rows.iter().map(|r| r.cancellation_ratio).fold(0.0, f64::max)));
        }
        let decreasing = rows.windows(2).all(|w| w[1].cancellation_ratio <= w[0].cancellation_ratio);
        (Some(below), Some(decreasing))
    } else {
        (None, None)
    };

    let mut csv_rows = vec![["L", "M_inner", "D", "Y_L", "X_L1_raw", "X_L2", "dE2_hole", "dE2_qft_standard", "dE2_qft_redefined"]
        .map(String::from)
        .to_vec()];
    for r in &rows {
        let v = &r.report;
        let t = v.truncation;
        csv_rows.push(vec![
            t.l.to_string(),
            t.m_inner.to_string(),
            t.depth.to_string(),
            fmt_f64(v.y_l),
            fmt_f64(v.x_l1_raw),
            fmt_f64(v.x_l2),
            fmt_f64(v.de2_hole),
            fmt_f64(v.de2_qft_standard),
            fmt_f64(v.de2_qft_redefined),
        ]);
    }
    let summary = SweepSummary {
        pure_gauge,
        rows,
        order_demo,
        max_reconciliation_defect,
        cancellation_below_tolerance: below,
        cancellation_decreasing: decreasing,
    };

    let out = &config.output;
    let mut artifacts = vec![Artifact { path: out.vacuum_sweep.clone(), bytes: csv_bytes(&csv_rows)? }];
    // The summary shares stdout only when the table went to a file.
    if out.vacuum_summary.is_some() || out.vacuum_sweep.is_some() {
        artifacts.push(Artifact { path: out.vacuum_summary.clone(), bytes: report("vacuum-sweep", config, summary)? });
    }
    Ok(Outcome { artifacts, violations })
}

// ---- fock-oracle ----

#[derive(Serialize)]
struct Perturbative {
    e1_many_body: f64,
    e2_many_body: f64,
    e1_single_particle: f64,
    /// Window-truncated field-theory sum for this vacuum.
    e2_single_particle: f64,
    e2_hole_theory: f64,
    e1_relative_defect: f64,
    e2_relative_defect: f64,
}

#[derive(Serialize)]
struct CouplingRow {
    #[serde(flatten)]
    exact: ExactShift,
    /// `|exact - lambda E1 - lambda² E2|`
    residual: f64,
}

#[derive(Serialize)]
struct VacuumComparison {
    vacuum: VacuumChoice,
    truncation: Truncation,
    xi_ren: f64,
    identities: IdentityReport,
    free_sector: FreeSectorReport,
    perturbative: Perturbative,
    couplings: Vec<CouplingRow>,
    /// Least-squares slope of `log residual` against `log lambda`.
    residual_slope: Option<f64>,
    slope_near_three: Option<bool>,
}

#[derive(Serialize)]
struct OracleResult {
    vacua: Vec<VacuumComparison>,
}

fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.0 > 0.0 && p.1 > 0.0).map(|&(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 || pts.len() != points.len() {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

pub fn fock_oracle(config: &ExperimentConfig) -> Result<Outcome> {
    let params = config.params()?;
    let window = config.oracle.window()?;
    let tol = &config.tolerances;
    let basis = build_basis(params, config.basis_size_for(window.k_neg.max(window.k_pos), 0)?)?;
    let pot = config.potential.build(&params)?;
    let table = build_table(&basis, &pot, window.index_window())?;

    let mut violations = Vec::new();
    let mut vacua = Vec::new();
    for vac in config.oracle.vacua() {
        let label = match vac {
            VacuumChoice::Standard => "standard vacuum".to_string(),
            VacuumChoice::Band { l } => format!("band vacuum L={l}"),
        };
        let ops = build_operators(&table, window, vac)?;
        let identities = ops.expectation_identities()?;
        if identities.max_exact_defect() != 0.0 {
            violations.push(format!("{label}: operator identity defect {:e}", identities.max_exact_defect()));
        }
        let float_defect = identities.vacuum_coupling.max(identities.hermiticity_and_charge);
        if float_defect >= tol.fock_identity {
            violations.push(format!("{label}: coupling/hermiticity defect {float_defect:e}"));
        }
        if vac == VacuumChoice::Standard && identities.free_gap <= 0.0 {
            violations.push(format!("{label}: free sector has a state at or below the vacuum"));
        }

        let truncation = vac.truncation(&window);
        let single = vacuum_shift_report(&table, truncation)?;
        let (e1, e2) = ops.pt_from_spectrum()?;
        let e2_single = match vac {
            VacuumChoice::Standard => single.de2_qft_standard,
            VacuumChoice::Band { .. } => single.de2_qft_redefined,
        };
        let perturbative = Perturbative {
            e1_many_body: e1,
            e2_many_body: e2,
            e1_single_particle: single.e1,
            e2_single_particle: e2_single,
            e2_hole_theory: single.de2_hole,
            e1_relative_defect: relative_gap(e1, single.e1),
            e2_relative_defect: relative_gap(e2, e2_single),
        };
        if perturbative.e2_relative_defect >= tol.pt_relative || perturbative.e1_relative_defect >= tol.pt_relative {
            violations.push(format!(
                "{label}: many-body and single-particle sums differ (E1 {:e}, E2 {:e})",
                perturbative.e1_relative_defect, perturbative.e2_relative_defect
            ));
        }

        let couplings: Vec<CouplingRow> = config
            .oracle
            .lambdas
            .iter()
            .map(|&lam| {
                let exact = ops.exact_vacuum_shift(lam)?;
                let residual = (exact.shift - lam * e1 - lam * lam * e2).abs();
                Ok(CouplingRow { exact, residual })
            })
            .collect::<Result<_>>()?;
        let residual_slope = loglog_slope(&couplings.iter().map(|c| (c.exact.coupling.abs(), c.residual)).collect::<Vec<_>>());
        vacua.push(VacuumComparison {
            vacuum: vac,
            truncation,
            xi_ren: ops.xi_ren(),
            identities,
            free_sector: ops.free_sector_report(),
            perturbative,
            couplings,
            residual_slope,
            slope_near_three: residual_slope.map(|s| (s - 3.0).abs() <= tol.slope),
        });
    }
    let bytes = report("fock-oracle", config, OracleResult { vacua })?;
    Ok(Outcome { artifacts: vec![Artifact { path: config.output.fock_oracle.clone(), bytes }], violations })
}

// ---- matrix-elements ----

pub fn matrix_elements(config: &ExperimentConfig) -> Result<Outcome> {
    let params = config.params()?;
    let n_max = config.basis_size_for(1, 8)?;
    let basis = build_basis(params, n_max)?;
    let pot = config.potential.build(&params)?;
    let table = build_table(&basis, &pot, IndexWindow::symmetric(n_max))?;
    let mut rows = vec![["m", "n", "Re", "Im"].map(String::from).to_vec()];
    for (m, n, v) in table.entries() {
        rows.push(vec![m.to_string(), n.to_string(), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    Ok(Outcome { artifacts: vec![Artifact { path: config.output.matrix_elements.clone(), bytes: csv_bytes(&rows)? }], violations: vec![] })
}
