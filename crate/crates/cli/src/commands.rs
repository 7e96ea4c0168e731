use std::collections::BTreeMap;

use anyhow::{bail, Result};
use serde::Serialize;

use pcf_spectral::fredholm::{
    build_module, commutator, energy_functional, hs_green_bound, invariance_check, log_averaged_sums,
    schatten_report, Constants, EnergyFunctional, FredholmLevel, HsGreenBound, HsIdentity,
    InvarianceReport,
};
use pcf_spectral::harmonic::{verify_harmonic, HarmonicReport, DEFAULT_HARMONIC_TOL};
use pcf_spectral::spectra::{
    c1_estimate, green_diagonal, heat_bound_check, potential_kernel, resistance_exponent,
    spectral_volume_estimate, weyl_fit, BoundaryCondition, HeatBoundCheck, HeatConstant,
    PotentialReport, VolumeEstimate, WeylFit, WEYL_DEFAULT_TOL,
};

use crate::config::{Cli, Command, Resolved, RunConfig};
use crate::output::{write_csv, write_report, MetaSource};

const SPECTRUM_DEFAULT_LEVEL: usize = 6;
const FREDHOLM_DEFAULT_LEVEL: usize = 4;
/// Relative gap between eigenvalues counted as one multiplicity cluster.
const MULTIPLICITY_TOL: f64 = 1e-8;
/// Heat-kernel bound checked on `[1/λ_max, HEAT_T_MAX]`.
const HEAT_T_MAX: f64 = 10.0;
const DEFAULT_P: f64 = 1.6;

type Checks = BTreeMap<&'static str, bool>;

pub fn run(cli: &Cli) -> Result<bool> {
    let cfg = cli.command.config();
    let resolved = cfg.resolve()?;
    let meta = MetaSource::new(&resolved.definition.canonical_json(), cfg.seed, cfg.record_time);
    match &cli.command {
        Command::Describe(_) => describe(cfg, &resolved, &meta),
        Command::Spectrum(_) => spectrum(cfg, &resolved),
        Command::Weyl(_) => weyl(cfg, &resolved, &meta),
        Command::Kernels(_) => kernels(cfg, &resolved, &meta),
        Command::Commutator(_) => commutator_cmd(cfg, &resolved, &meta),
        Command::Invariance(_) => invariance(cfg, &resolved, &meta),
    }
}

fn print_checks(checks: &Checks) {
    for (name, ok) in checks {
        println!("{:<28} {}", name, if *ok { "pass" } else { "FAIL" });
    }
}

#[derive(Serialize)]
struct LevelCounts {
    m: usize,
    vertices: usize,
    cells: usize,
}

#[derive(Serialize)]
struct DescribeReport {
    name: String,
    n_maps: usize,
    n_boundary: usize,
    levels: Vec<LevelCounts>,
    harmonic: HarmonicReport,
    r: Vec<f64>,
    mu: Vec<f64>,
    d_s: f64,
    d_h: f64,
    gamma: Vec<f64>,
    nu: Vec<f64>,
    lattice: bool,
    exponent_residual: f64,
    checks: Checks,
}

fn describe(cfg: &RunConfig, r: &Resolved, meta: &MetaSource) -> Result<bool> {
    let model = &r.model;
    let s = &model.structure;
    let tol = cfg.tol.unwrap_or(DEFAULT_HARMONIC_TOL);
    let harmonic = verify_harmonic(s, &model.harmonic, tol)?;
    let levels = (0..=3)
        .map(|m| {
            let c = model.complex(m);
            LevelCounts { m, vertices: c.n_vertices(), cells: c.n_cells() }
        })
        .collect();
    let se = &model.exponent;
    let checks = Checks::from([("harmonic_structure", harmonic.pass)]);
    let report = DescribeReport {
        name: s.name().to_string(),
        n_maps: s.n_maps(),
        n_boundary: s.n_boundary(),
        levels,
        r: model.harmonic.r().to_vec(),
        mu: model.measure.weights().to_vec(),
        d_s: se.d_s,
        d_h: resistance_exponent(&model.harmonic)?,
        gamma: se.gamma.clone(),
        nu: se.kl_weights(),
        lattice: se.lattice,
        exponent_residual: se.residual,
        harmonic,
        checks,
    };
    println!("structure   {} (N = {}, n0 = {})", report.name, report.n_maps, report.n_boundary);
    println!("schur dev   {:.3e} (tol {:.1e})", report.harmonic.deviation, report.harmonic.tol);
    println!("d_S         {:.12}", report.d_s);
    println!("nu          {:?}", report.nu);
    println!("lattice     {}", report.lattice);
    print_checks(&report.checks);
    write_report(&cfg.out, "describe.json", &report, meta.meta())?;
    Ok(report.checks.values().all(|&ok| ok))
}

fn spectrum(cfg: &RunConfig, r: &Resolved) -> Result<bool> {
    let m = cfg.level_or(SPECTRUM_DEFAULT_LEVEL)?;
    let lv = r.model.level(m)?;
    let sd = r.model.spectrum(&lv, cfg.bc)?;
    let ranks = sd.multiplicity_ranks(MULTIPLICITY_TOL);
    let rows = sd
        .eigenvalues
        .iter()
        .zip(&ranks)
        .enumerate()
        .map(|(k, (l, rank))| format!("{},{:e},{}", k + 1, l, rank));
    write_csv(&cfg.out, "spectrum.csv", "index,eigenvalue,multiplicity_rank", rows)?;
    println!("{} eigenvalues at level {m} ({}), lowest {:.10e}", sd.len(), cfg.bc, sd.eigenvalues[0]);
    Ok(true)
}

#[derive(Serialize)]
struct WeylReport {
    level: usize,
    bc: BoundaryCondition,
    d_s: f64,
    lattice: bool,
    fit: WeylFit,
    volume: Option<VolumeEstimate>,
    volume_note: Option<String>,
    checks: Checks,
}

fn weyl(cfg: &RunConfig, r: &Resolved, meta: &MetaSource) -> Result<bool> {
    let m = cfg.level_or(SPECTRUM_DEFAULT_LEVEL)?;
    let lv = r.model.level(m)?;
    let sd = r.model.spectrum(&lv, cfg.bc)?;
    let fit = weyl_fit(&sd, r.model.d_s(), cfg.tol.unwrap_or(WEYL_DEFAULT_TOL))?;
    let (volume, volume_note) = match spectral_volume_estimate(&sd, &r.model.exponent) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let checks = Checks::from([("weyl_slope", fit.pass)]);
    println!(
        "slope {:.5} (expected {:.5} ± {}), ratio band [{:.4}, {:.4}]",
        fit.slope, fit.expected_slope, fit.tol, fit.ratio_band[0], fit.ratio_band[1]
    );
    if let Some(v) = &volume {
        println!("volume estimate {:.5} ± {:.5}", v.estimate, v.uncertainty);
    }
    print_checks(&checks);
    let report = WeylReport {
        level: m,
        bc: cfg.bc,
        d_s: r.model.d_s(),
        lattice: r.model.exponent.lattice,
        fit,
        volume,
        volume_note,
        checks,
    };
    write_report(&cfg.out, "weyl.json", &report, meta.meta())?;
    Ok(report.checks.values().all(|&ok| ok))
}

#[derive(Serialize)]
struct GreenSummary {
    values: Vec<f64>,
    sup: f64,
    argmax: usize,
}

#[derive(Serialize)]
struct HeatSummary {
    constant: HeatConstant,
    bound: HeatBoundCheck,
}

#[derive(Serialize)]
struct KernelsReport {
    level: usize,
    d_s: f64,
    lambda1: f64,
    lambda_max: f64,
    green: GreenSummary,
    heat: HeatSummary,
    potential: PotentialReport,
    volume: Option<VolumeEstimate>,
    checks: Checks,
}

fn kernels(cfg: &RunConfig, r: &Resolved, meta: &MetaSource) -> Result<bool> {
    if cfg.bc != BoundaryCondition::Dirichlet {
        bail!("kernels are defined for the Dirichlet spectrum only");
    }
    let m = cfg.level_or(SPECTRUM_DEFAULT_LEVEL)?;
    let d = r.model.d_s();
    let lv = r.model.level(m)?;
    let sd = r.model.spectrum(&lv, BoundaryCondition::Dirichlet)?;
    let g = green_diagonal(&sd)?;
    let constant = c1_estimate(&sd, d);
    let bound = heat_bound_check(&sd, d, constant.c1, HEAT_T_MAX);
    let p = cfg.p.unwrap_or_else(|| (d + 0.3).min(2.0));
    let potential = potential_kernel(&sd, p, d, constant.c1)?;
    let volume = spectral_volume_estimate(&sd, &r.model.exponent).ok();
    let checks = Checks::from([("heat_bound", bound.pass), ("potential_bound", potential.pass)]);
    println!("sup g {:.6e}, c1 {:.6e} at t = {:.4e}", g.sup, constant.c1, constant.t_star);
    println!("potential p = {p}: max diag {:.6e} <= {:.6e}", potential.max_diag, potential.rhs);
    print_checks(&checks);
    let report = KernelsReport {
        level: m,
        d_s: d,
        lambda1: sd.eigenvalues[0],
        lambda_max: sd.lambda_max(),
        green: GreenSummary { values: g.values, sup: g.sup, argmax: g.argmax },
        heat: HeatSummary { constant, bound },
        potential,
        volume,
        checks,
    };
    write_report(&cfg.out, "kernels.json", &report, meta.meta())?;
    Ok(report.checks.values().all(|&ok| ok))
}

#[derive(Serialize)]
struct LogAveragedSummary {
    max: f64,
    argmax: usize,
    at_full: f64,
    at_half: f64,
    total: f64,
}

#[derive(Serialize)]
struct SummabilityReport {
    level: usize,
    function_id: String,
    p: f64,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    constants: Constants,
    energy: f64,
    zero_count: usize,
    hs_identity: HsIdentity,
    hs_green_bound: HsGreenBound,
    log_averaged: LogAveragedSummary,
    energy_functional: EnergyFunctional,
    checks: Checks,
}

fn commutator_cmd(cfg: &RunConfig, r: &Resolved, meta: &MetaSource) -> Result<bool> {
    let m = cfg.level_or(FREDHOLM_DEFAULT_LEVEL)?;
    if m == 0 {
        bail!("commutator needs level ≥ 1 for a Dirichlet spectrum");
    }
    let model = &r.model;
    let d = model.d_s();
    let spec = cfg.function(m.min(2))?;
    let a = spec.evaluate(model, m)?;
    let lv = model.level(m)?;
    let em = build_module(&lv.form)?;
    let sd = model.spectrum(&lv, BoundaryCondition::Dirichlet)?;
    let c1 = c1_estimate(&sd, d).c1;
    let p = cfg.p.unwrap_or(DEFAULT_P);

    let cs = commutator(&em, &a, &spec.id(), d)?;
    let schatten = schatten_report(&cs, &sd, p, c1)?;
    let green = hs_green_bound(&em, &sd, &a)?;
    let log = log_averaged_sums(&cs, d);
    let functional = energy_functional(&cs, &sd, c1)?;

    write_csv(
        &cfg.out,
        "svals.csv",
        "rank,sigma",
        cs.svals.iter().enumerate().map(|(k, s)| format!("{},{:e}", k + 1, s)),
    )?;
    let checks = Checks::from([
        ("schatten_bound", schatten.pass),
        ("hs_identity", cs.hs_identity.pass),
        ("per_vector_inequality", green.per_vector_pass),
        ("partial_hs_sum", green.partial_pass),
        ("energy_functional_bound", functional.pass),
    ]);
    println!(
        "{}: Schatten p = {p} ratio {:.4e}, energy functional {:.6e} (ratio {:.4e})",
        spec.id(),
        schatten.ratio,
        functional.phi,
        functional.ratio
    );
    print_checks(&checks);
    let report = SummabilityReport {
        level: m,
        function_id: cs.function_id.clone(),
        p,
        lhs: schatten.lhs,
        rhs: schatten.rhs,
        ratio: schatten.ratio,
        constants: schatten.constants,
        energy: cs.energy,
        zero_count: cs.zero_count,
        hs_identity: cs.hs_identity.clone(),
        hs_green_bound: green,
        log_averaged: LogAveragedSummary {
            max: log.max,
            argmax: log.argmax,
            at_full: log.at_full,
            at_half: log.at_half,
            total: log.total,
        },
        energy_functional: functional,
        checks,
    };
    write_report(&cfg.out, "summability.json", &report, meta.meta())?;
    Ok(report.checks.values().all(|&ok| ok))
}

#[derive(Serialize)]
struct InvarianceOutput {
    level: usize,
    function_id: String,
    pairs: Vec<InvarianceReport>,
    gap_nonincreasing: bool,
    checks: Checks,
}

/// Relative to the largest fine-level derivative entry.
const CELL_DEFECT_TOL: f64 = 1e-12;

fn invariance(cfg: &RunConfig, r: &Resolved, meta: &MetaSource) -> Result<bool> {
    let m = cfg.level_or(FREDHOLM_DEFAULT_LEVEL + 1)?;
    if m < 3 {
        bail!("invariance compares levels m-2, m-1 and m; need --level ≥ 3");
    }
    let model = &r.model;
    let spec = cfg.function((m - 1).min(2))?;
    let levels: Vec<FredholmLevel> = (m - 2..=m)
        .map(|k| FredholmLevel::new(model, k))
        .collect::<pcf_spectral::Result<_>>()?;
    let mut pairs = Vec::with_capacity(2);
    let mut defect_ok = true;
    for w in levels.windows(2) {
        let a = spec.evaluate(model, w[1].m())?;
        let report = invariance_check(model, &w[0], &w[1], &a)?;
        let scale = w[1].module.derive(&a)?.amax();
        defect_ok &= report.cell_defect <= CELL_DEFECT_TOL * scale.max(f64::MIN_POSITIVE);
        pairs.push(report);
    }
    let gap_nonincreasing = pairs[1].relative_gap <= pairs[0].relative_gap;
    let checks = Checks::from([
        ("cell_decomposition", defect_ok),
        ("cell_sum_bound", pairs.iter().all(|p| p.cell_bound_pass)),
        ("holder_chain", pairs.iter().all(|p| p.holder.pass)),
    ]);
    for p in &pairs {
        println!(
            "m = {} -> {}: Φ̂ fine {:.6e}, Σ cells {:.6e}, gap {:.4e}",
            p.level,
            p.level + 1,
            p.phi_fine,
            p.phi_sum,
            p.relative_gap
        );
    }
    println!("gap nonincreasing: {gap_nonincreasing}");
    print_checks(&checks);
    let report = InvarianceOutput {
        level: m,
        function_id: spec.id(),
        pairs,
        gap_nonincreasing,
        checks,
    };
    write_report(&cfg.out, "invariance.json", &report, meta.meta())?;
    Ok(report.checks.values().all(|&ok| ok))
}
