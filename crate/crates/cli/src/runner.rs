//! Task execution: one config, one output directory, one manifest.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use nhsense::metrology::{exponent_sweep, fisher_record, scaling_fit, FisherRecord, Selector};
use nhsense::models::build;
use nhsense::spectral::{
    cumulative_population, eig, loop_area, pbc_curve_1d, qwz_ky_curves, winding_2d, winding_aah,
    winding_bands_1d, SpectralCurve,
};
use nhsense::{Family, ModelSpec};
use serde::Serialize;

use crate::config::{parse_selector, RunConfig, Task};
use crate::export::{curve_table, export_table, fisher_table, Cell, Table};
use crate::recipes::recipe;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kx: Option<f64>,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub cells: usize,
    pub failures: Vec<Failure>,
}

impl RunReport {
    /// 0 when every cell succeeded, 2 for partial success, 1 when nothing succeeded.
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else if self.failures.len() < self.cells {
            2
        } else {
            1
        }
    }

    fn status(&self) -> &'static str {
        match self.exit_code() {
            0 => "ok",
            2 => "partial",
            _ => "failed",
        }
    }

    fn fail(&mut self, lambda: Option<f64>, size: Option<usize>, kx: Option<f64>, e: impl ToString) {
        let error = e.to_string();
        log::warn!("cell λ={lambda:?} L={size:?} kx={kx:?} failed: {error}");
        self.failures.push(Failure { lambda, size, kx, error });
    }

    fn absorb(&mut self, other: RunReport) {
        self.outputs.extend(other.outputs);
        self.cells += other.cells;
        self.failures.extend(other.failures);
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<ModelSpec>,
    lambdas: Vec<f64>,
    sizes: Vec<usize>,
    status: &'static str,
    cells: usize,
    outputs: Vec<String>,
    failures: &'a [Failure],
    wall_time_s: f64,
}

/// Runs a validated config, writing data files and `manifest.json` into its output directory.
pub fn run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let t = Instant::now();
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let report = match cfg.task {
        Task::Reproduce => reproduce(cfg)?,
        Task::Spectrum => spectrum(cfg)?,
        Task::Population => population(cfg)?,
        Task::Winding => winding(cfg)?,
        Task::Qfi => qfi(cfg)?,
        Task::Scaling | Task::Sweep => scaling(cfg)?,
    };
    let manifest = Manifest {
        tool: "nhsense",
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        model: cfg.model.as_ref().and_then(|m| m.to_spec().ok()),
        lambdas: cfg.lambdas(),
        sizes: cfg.sizes(),
        status: report.status(),
        cells: report.cells,
        outputs: report
            .outputs
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect(),
        failures: &report.failures,
        wall_time_s: t.elapsed().as_secs_f64(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(report)
}

fn reproduce(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let id = cfg.figure.as_deref().unwrap_or_default();
    let parts = recipe(id).ok_or_else(|| CliError::UnknownRecipe(id.to_string()))?;
    let mut report = RunReport::default();
    for (name, mut sub) in parts {
        sub.output.dir = cfg.output.dir.join(name);
        sub.output.format = cfg.output.format;
        log::info!("{id}: running {name}");
        report.absorb(run(&sub)?);
    }
    Ok(report)
}

fn cell_spec(base: &ModelSpec, size: usize, lambda: f64) -> ModelSpec {
    base.with_size(size).with_lambda(lambda)
}

fn save(report: &mut RunReport, cfg: &RunConfig, table: &Table, stem: &str) -> Result<(), CliError> {
    let p = export_table(table, &cfg.output.dir, stem, cfg.output.format)?;
    report.outputs.push(p);
    Ok(())
}

fn spectrum(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let base = cfg.spec()?;
    let mut report = RunReport::default();
    let mut table = Table::new(&["lambda", "L", "index", "re", "im", "residual", "error_bound", "reliable"]);
    for &size in &cfg.sizes() {
        for &lambda in &cfg.lambdas() {
            report.cells += 1;
            let s = build(&cell_spec(&base, size, lambda)).and_then(|h| eig(&h));
            match s {
                Ok(s) => {
                    for i in 0..s.len() {
                        let z = s.eigenvalues[i];
                        table.push(vec![
                            lambda.into(),
                            size.into(),
                            i.into(),
                            z.re.into(),
                            z.im.into(),
                            s.residuals[i].into(),
                            s.error_bounds[i].into(),
                            s.reliable(i).into(),
                        ]);
                    }
                }
                Err(e) => report.fail(Some(lambda), Some(size), None, e),
            }
        }
    }
    save(&mut report, cfg, &table, "spectrum")?;
    if cfg.grid.curves {
        curves(cfg, &base, &mut report)?;
    }
    Ok(report)
}

fn curves(cfg: &RunConfig, base: &ModelSpec, report: &mut RunReport) -> Result<(), CliError> {
    let mut summary = Table::new(&["lambda", "kx", "curve", "label", "closed", "ambiguous", "area", "file"]);
    let nk = cfg.grid.nk;
    for (i, &lambda) in cfg.lambdas().iter().enumerate() {
        let spec = base.with_lambda(lambda);
        let sets: Vec<(Option<f64>, String, nhsense::Result<Vec<SpectralCurve>>)> = if spec.family.is_two_dimensional() {
            cfg.grid
                .kx
                .iter()
                .enumerate()
                .map(|(j, &kx)| (Some(kx), format!("curves/lam{i}_kx{j}"), qwz_ky_curves(&spec, kx, nk)))
                .collect()
        } else {
            vec![(None, format!("curves/lam{i}"), pbc_curve_1d(&spec, nk))]
        };
        for (kx, stem, res) in sets {
            report.cells += 1;
            match res {
                Ok(cs) => {
                    for (c, curve) in cs.iter().enumerate() {
                        let name = format!("{stem}_c{c}");
                        save(report, cfg, &curve_table(&curve.points), &name)?;
                        let area = if curve.closed { loop_area(curve).ok() } else { None };
                        summary.push(vec![
                            lambda.into(),
                            kx.into(),
                            c.into(),
                            curve.label.clone().into(),
                            curve.closed.into(),
                            curve.ambiguous.into(),
                            area.into(),
                            format!("{name}.{}", cfg.output.format.extension()).into(),
                        ]);
                    }
                }
                Err(e) => report.fail(Some(lambda), None, kx, e),
            }
        }
    }
    save(report, cfg, &summary, "curves")
}

fn population(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let base = cfg.spec()?;
    let mut report = RunReport::default();
    let mut table = Table::new(&["lambda", "L", "site", "weight"]);
    for &size in &cfg.sizes() {
        for &lambda in &cfg.lambdas() {
            report.cells += 1;
            match build(&cell_spec(&base, size, lambda)).and_then(|h| eig(&h)) {
                Ok(s) => {
                    for (j, w) in cumulative_population(&s).into_iter().enumerate() {
                        table.push(vec![lambda.into(), size.into(), (j + 1).into(), w.into()]);
                    }
                }
                Err(e) => report.fail(Some(lambda), Some(size), None, e),
            }
        }
    }
    save(&mut report, cfg, &table, "population")?;
    Ok(report)
}

fn winding(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let base = cfg.spec()?;
    let mut report = RunReport::default();
    let mut table = Table::new(&["lambda", "kx", "e0_re", "e0_im", "winding", "raw_phase", "max_step"]);
    let kxs: Vec<Option<f64>> = if base.family == Family::NhQwz {
        cfg.grid.kx.iter().map(|&k| Some(k)).collect()
    } else {
        vec![None]
    };
    for &lambda in &cfg.lambdas() {
        let spec = base.with_lambda(lambda);
        for &kx in &kxs {
            for e0 in cfg.e0() {
                report.cells += 1;
                let w = match (spec.family, kx) {
                    (Family::NhQwz, Some(kx)) => winding_2d(&spec, kx, e0, cfg.grid.nk),
                    (Family::NhAah, _) => winding_aah(&spec, e0, cfg.grid.nk),
                    _ => winding_bands_1d(&spec, e0, cfg.grid.nk),
                };
                match w {
                    Ok(w) => table.push(vec![
                        lambda.into(),
                        kx.into(),
                        e0.re.into(),
                        e0.im.into(),
                        w.value.into(),
                        w.raw_phase.into(),
                        w.max_step.into(),
                    ]),
                    Err(e) => report.fail(Some(lambda), None, kx, e),
                }
            }
        }
    }
    save(&mut report, cfg, &table, "winding")?;
    Ok(report)
}

fn record(cfg: &RunConfig, base: &ModelSpec, size: usize, lambda: f64) -> Result<FisherRecord, CliError> {
    let selector = parse_selector(&cfg.grid.selector, size)?;
    Ok(fisher_record(&base.with_size(size), lambda, selector, &cfg.derivative_options())?)
}

fn qfi(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let base = cfg.spec()?;
    let mut report = RunReport::default();
    let mut records = Vec::new();
    for &size in &cfg.sizes() {
        for &lambda in &cfg.lambdas() {
            report.cells += 1;
            match record(cfg, &base, size, lambda) {
                Ok(r) => records.push(r),
                Err(e) => report.fail(Some(lambda), Some(size), None, e),
            }
        }
    }
    save(&mut report, cfg, &fisher_table(&records), "fisher")?;
    Ok(report)
}

/// Fisher records over the (λ, L) grid plus one power-law fit per λ.
fn scaling(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let base = cfg.spec()?;
    let (lambdas, sizes) = (cfg.lambdas(), cfg.sizes());
    let mut report = RunReport::default();
    let mut records = Vec::new();
    let mut fits = Table::new(&["lambda", "a", "b", "r_squared", "points", "meaningful"]);
    let fixed = cfg.grid.selector != "m=L";
    let rows: Vec<(f64, Vec<FisherRecord>, Vec<(usize, String)>)> = if cfg.task == Task::Sweep && fixed {
        let selector: Selector = parse_selector(&cfg.grid.selector, 2)?;
        exponent_sweep(&base, &lambdas, &sizes, selector, &cfg.derivative_options())?
            .into_iter()
            .map(|row| (row.lambda, row.records, row.failures.into_iter().filter(|f| f.0 != 0).collect()))
            .collect()
    } else {
        lambdas
            .iter()
            .map(|&lambda| {
                let mut recs = Vec::new();
                let mut fails = Vec::new();
                for &size in &sizes {
                    match record(cfg, &base, size, lambda) {
                        Ok(r) => recs.push(r),
                        Err(e) => fails.push((size, e.to_string())),
                    }
                }
                (lambda, recs, fails)
            })
            .collect()
    };
    for (lambda, recs, fails) in rows {
        report.cells += recs.len() + fails.len();
        for (size, e) in fails {
            report.fail(Some(lambda), Some(size), None, e);
        }
        let pts: Vec<(f64, f64)> = recs.iter().map(|r| (r.size as f64, r.f_q)).collect();
        match scaling_fit(&pts) {
            Ok(f) => fits.push(vec![
                lambda.into(),
                f.a.into(),
                f.b.into(),
                f.r_squared.into(),
                pts.len().into(),
                f.meaningful().into(),
            ]),
            Err(e) => {
                log::warn!("no fit at λ = {lambda}: {e}");
                fits.push(vec![lambda.into(), Cell::Empty, Cell::Empty, Cell::Empty, pts.len().into(), false.into()]);
            }
        }
        records.extend(recs);
    }
    save(&mut report, cfg, &fisher_table(&records), "fisher")?;
    save(&mut report, cfg, &fits, "fit")?;
    Ok(report)
}
