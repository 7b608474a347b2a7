//! Scenario orchestration: build the model, run one experiment, write its
//! artifacts and a manifest describing the run.

use std::path::Path;
use std::time::Instant;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coincidence::{coincidence_snapshot, parameter_study, standard_panels, SignalGrid, StudyPanel};
use crate::config::{Axis, InitialState, RunConfig, Scenario, ScanMode, SourceMode};
use crate::error::{Error, Result};
use crate::excitation::{prepare_closed_form, scan_targets, PreparationResult, ScanSource, ScanTargets};
use crate::exciton::Manifold;
use crate::model::ExcitonModel;
use crate::output::{ArtifactWriter, Cell, Format, Plot, Table};
use crate::propagate::{snapshot_series, PopulationDistribution};
use crate::source::{jsi_map, CoherentSource, EppSource, GaussianProfile};
use crate::units::RAD_PER_FS_PER_CM;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub excitonscope: &'static str,
    pub artifact_schema: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Everything needed to reproduce and audit a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub versions: Versions,
    pub threads: usize,
    pub format: Format,
    pub timings: Vec<StageTiming>,
    pub warnings: Vec<String>,
    pub artifacts: Vec<String>,
}

/// The field driving the two-exciton preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Entangled(EppSource),
    Coherent(CoherentSource),
}

impl Drive {
    fn prepare(&self, model: &ExcitonModel, cfg: &RunConfig, label: &str) -> Result<PreparationResult> {
        match self {
            Drive::Entangled(s) => prepare_closed_form(model, s, &cfg.excitation, label),
            Drive::Coherent(s) => prepare_closed_form(model, s, &cfg.excitation, label),
        }
    }
}

fn state_label(prefix: char, i: usize) -> String {
    format!("{prefix}{:02}", i + 1)
}

/// The entangled source the config describes, with frequencies fixed by the
/// model when a target state is named.
pub fn entangled_source(cfg: &RunConfig, model: &ExcitonModel) -> Result<EppSource> {
    let s = &cfg.source;
    let (omega1, omega2) = match (s.target, s.omega1, s.omega2) {
        (Some(t), _, _) => {
            if t == 0 || t > model.n_two() {
                return Err(Error::validation(format!(
                    "source.target {t} outside 1..={}",
                    model.n_two()
                )));
            }
            let half = 0.5 * model.f(t - 1);
            (half, half)
        }
        (None, Some(a), Some(b)) => (a, b),
        _ => return Err(Error::validation("source needs target or omega1 and omega2")),
    };
    let src = EppSource {
        omega1,
        omega2,
        pump_center: s.pump_center.unwrap_or(omega1 + omega2),
        tau0: s.tau0,
        t1: s.t1,
        t2: s.t2,
        alpha: s.alpha,
        e0: s.e0,
    };
    src.validate()?;
    Ok(src)
}

pub fn drive(cfg: &RunConfig, model: &ExcitonModel) -> Result<Drive> {
    let epp = entangled_source(cfg, model)?;
    Ok(match cfg.source.mode {
        SourceMode::Entangled => Drive::Entangled(epp),
        SourceMode::Coherent => {
            let width = cfg
                .source
                .coherent_width
                .unwrap_or_else(|| CoherentSource::matched_to(&epp).profiles[0].width);
            let p = |center| GaussianProfile {
                center,
                width,
                amplitude: cfg.source.e0,
            };
            let src = CoherentSource {
                profiles: [p(epp.omega1), p(epp.omega2), p(epp.omega1), p(epp.omega2)],
            };
            src.validate()?;
            Drive::Coherent(src)
        }
    })
}

struct Run<'a> {
    cfg: &'a RunConfig,
    out: ArtifactWriter,
    timings: Vec<StageTiming>,
    warnings: Vec<String>,
}

impl Run<'_> {
    fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let r = f().map_err(|e| e.in_stage(stage.to_string()))?;
        self.timings.push(StageTiming {
            stage: stage.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        Ok(r)
    }

    fn csv(&self) -> bool {
        self.out.format == Format::Csv
    }

    fn note_population(&mut self, what: &str, rho: &PopulationDistribution) {
        self.note_clipped(what, rho.clipped);
    }

    fn note_clipped(&mut self, what: &str, clipped: f64) {
        if clipped != 0.0 {
            self.warnings
                .push(format!("{what}: clipped {:.3e} of negative round-off", clipped.abs()));
        }
    }

    fn note_model(&mut self, model: &ExcitonModel) {
        for tm in [&model.one, &model.two] {
            if tm.disconnected {
                self.warnings.push(format!(
                    "{} transport has more than one stationary mode",
                    tm.manifold
                ));
            }
        }
    }

    fn initial_population(
        &mut self,
        model: &ExcitonModel,
        initial: InitialState,
    ) -> Result<PopulationDistribution> {
        match initial {
            InitialState::State(s) => {
                if s == 0 || s > model.n_two() {
                    return Err(Error::validation(format!("initial state {s} outside 1..={}", model.n_two()))
                        .in_stage("initial population"));
                }
                Ok(PopulationDistribution::delta(Manifold::Two, model.n_two(), s - 1))
            }
            InitialState::Excite => {
                let cfg = self.cfg;
                let prep = self.timed("excitation", || {
                    let d = drive(cfg, model)?;
                    d.prepare(model, cfg, "initial")
                })?;
                if prep.regularized {
                    self.warnings.push("excitation: a pole was shifted off the real axis".into());
                }
                self.note_population("excitation", &prep.distribution);
                Ok(prep.distribution)
            }
        }
    }
}

/// Runs the configured scenario with the given table format, writing into
/// `cfg.output_dir`. The manifest is written last.
pub fn run_scenario(cfg: &RunConfig, format: Format) -> Result<RunManifest> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let threads = cfg.threads.unwrap_or_else(rayon::current_num_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::validation(format!("cannot start {threads} worker threads: {e}")))?;
    pool.install(|| run_in_pool(cfg, format, threads))
}

fn run_in_pool(cfg: &RunConfig, format: Format, threads: usize) -> Result<RunManifest> {
    let mut run = Run {
        cfg,
        out: ArtifactWriter::new(cfg.output_dir(), format),
        timings: Vec::new(),
        warnings: Vec::new(),
    };
    let model = run.timed("model", || {
        let spec = cfg.load_aggregate()?;
        ExcitonModel::new(&spec, &cfg.bath())
    })?;
    run.note_model(&model);

    match cfg.scenario {
        Scenario::ModelInfo => model_info(&mut run, &model)?,
        Scenario::Jsa => jsa(&mut run, &model)?,
        Scenario::Excite => excite(&mut run, &model)?,
        Scenario::ExciteScan => excite_scan(&mut run, &model)?,
        Scenario::Propagate => propagate(&mut run, &model)?,
        Scenario::Coincidence => coincidence(&mut run, &model)?,
        Scenario::PanelStudy => panel_study(&mut run, &model)?,
    }

    let mut artifacts = run.out.written.clone();
    artifacts.push(MANIFEST_NAME.into());
    let manifest = RunManifest {
        config: cfg.clone(),
        versions: Versions {
            excitonscope: env!("CARGO_PKG_VERSION"),
            artifact_schema: SCHEMA_VERSION,
        },
        threads,
        format,
        timings: run.timings,
        warnings: run.warnings,
        artifacts,
    };
    run.out.json(MANIFEST_NAME, &manifest)?;
    Ok(manifest)
}

fn energy_table(prefix: char, energies: &[f64], populations: &[(&str, &[f64])]) -> Table {
    let mut header = vec!["state".to_string(), "label".into(), "energy_cm".into()];
    header.extend(populations.iter().map(|(h, _)| h.to_string()));
    let mut t = Table::new(header);
    for (i, &e) in energies.iter().enumerate() {
        let mut row = vec![Cell::Int(i + 1), Cell::Text(state_label(prefix, i)), Cell::Num(e)];
        row.extend(populations.iter().map(|(_, v)| Cell::Num(v[i])));
        t.push(row);
    }
    t
}

fn matrix_table(corner: &str, rows: &[String], cols: &[String], m: &DMatrix<f64>) -> Table {
    let mut t = Table::new(std::iter::once(corner.to_string()).chain(cols.iter().cloned()));
    for (r, label) in rows.iter().enumerate() {
        t.push_labeled(label.clone(), m.row(r).iter().copied());
    }
    t
}

fn labels(prefix: char, n: usize) -> Vec<String> {
    (0..n).map(|i| state_label(prefix, i)).collect()
}

fn model_info(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let one: Vec<f64> = model.eig.one_ex_energies.iter().copied().collect();
    let two: Vec<f64> = model.eig.two_ex_energies.iter().copied().collect();
    let eg: Vec<f64> = (0..model.n_one()).map(|e| model.dipoles.eg_strength(e)).collect();
    let eg_width: Vec<f64> = (0..model.n_one()).map(|e| model.widths.eg(e)).collect();
    let mut t = energy_table('e', &one, &[("dipole_strength", &eg), ("eg_width_cm", &eg_width)]);
    t.header.push("out_rate_cm".into());
    for (i, row) in t.rows.iter_mut().enumerate() {
        row.push(Cell::Num(model.one.out_rates[i]));
    }
    run.out.table("one_exciton", &t)?;

    let fg_width: Vec<f64> = (0..model.n_two()).map(|f| model.widths.fg(f)).collect();
    let mut t = energy_table('f', &two, &[("fg_width_cm", &fg_width)]);
    t.header.push("out_rate_cm".into());
    for (i, row) in t.rows.iter_mut().enumerate() {
        row.push(Cell::Num(model.two.out_rates[i]));
    }
    run.out.table("two_exciton", &t)?;

    let (le, lf) = (labels('e', model.n_one()), labels('f', model.n_two()));
    run.out.table("transport_one", &matrix_table("to\\from", &le, &le, &model.one.k))?;
    run.out.table("transport_two", &matrix_table("to\\from", &lf, &lf, &model.two.k))?;
    let fe = DMatrix::from_fn(model.n_two(), model.n_one(), |f, e| model.dipoles.fe_strength(f, e));
    run.out.table("fe_dipole_strength", &matrix_table("f\\e", &lf, &le, &fe))?;

    #[derive(Serialize)]
    struct Info<'a> {
        name: &'a str,
        n_sites: usize,
        n_one: usize,
        n_two: usize,
        one_exciton_span_cm: f64,
        two_exciton_span_cm: f64,
        orthonormality_defect: f64,
        transport_column_sum_defect: [f64; 2],
    }
    let span = |v: &[f64]| v.last().unwrap_or(&0.0) - v.first().unwrap_or(&0.0);
    run.out.json(
        "model.json",
        &Info {
            name: &model.spec.name,
            n_sites: model.eig.n_sites(),
            n_one: model.n_one(),
            n_two: model.n_two(),
            one_exciton_span_cm: span(&one),
            two_exciton_span_cm: span(&two),
            orthonormality_defect: model.eig.orthonormality_defect(),
            transport_column_sum_defect: [model.one.column_sum_defect(), model.two.column_sum_defect()],
        },
    )
}

fn jsa(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let src = entangled_source(run.cfg, model).map_err(|e| e.in_stage("source"))?;
    let jc = &run.cfg.jsa;
    // spectral reach of the pump envelope plus the phase-matching sinc
    let reach = 4.0 * (2.0 * src.pump_gamma_cm()).sqrt()
        + 4.0 / (RAD_PER_FS_PER_CM * (src.t2 - src.t1).max(1.0));
    let half = reach.min(4000.0);
    let auto = |c: f64| Axis {
        start: c - half,
        stop: c + half,
        n: jc.points,
    };
    let a = jc.axis_a.unwrap_or(auto(src.omega1));
    let b = jc.axis_b.unwrap_or(auto(src.omega2));
    let (ga, gb) = (a.values(), b.values());
    let map = run.timed("jsa", || jsi_map(&src, &ga, &gb))?;

    let name = if run.csv() {
        let t = nonuniform_matrix(&gb, &ga, |i, j| map[(j, i)]);
        run.out.table("jsi", &t)?
    } else {
        let rows: Vec<String> = ga.iter().map(|&x| crate::output::fmt_float(x)).collect();
        let cols: Vec<String> = gb.iter().map(|&x| crate::output::fmt_float(x)).collect();
        run.out.table("jsi", &matrix_table("omega_a\\omega_b", &rows, &cols, &map))?
    };
    #[derive(Serialize)]
    struct Meta {
        data: String,
        layout: &'static str,
        source: EppSource,
        axis_a: Axis,
        axis_b: Axis,
        normalization: &'static str,
    }
    run.out.json(
        "jsi_meta.json",
        &Meta {
            data: name.clone(),
            layout: layout_note(run.out.format),
            source: src,
            axis_a: a,
            axis_b: b,
            normalization: "divided by maximum",
        },
    )?;
    if run.csv() {
        run.out.plot(
            "jsi.gp",
            &Plot::Heatmap {
                csv: name,
                title: "joint spectral intensity".into(),
                xlabel: "omega_b (cm^-1)".into(),
                ylabel: "omega_a (cm^-1)".into(),
            },
        )?;
    }
    Ok(())
}

fn layout_note(format: Format) -> &'static str {
    match format {
        Format::Csv => {
            "nonuniform matrix: first row is the column count then x values; each later row is a y value then z values"
        }
        Format::Json => "header row of x values; each row starts with its y value",
    }
}

/// Gnuplot's nonuniform matrix layout: x along columns, y along rows.
fn nonuniform_matrix(x: &[f64], y: &[f64], z: impl Fn(usize, usize) -> f64) -> Table {
    let mut t = Table::new(std::iter::once(Cell::Int(x.len())).chain(x.iter().map(|&v| Cell::Num(v))));
    for (j, &yv) in y.iter().enumerate() {
        let mut row = vec![Cell::Num(yv)];
        row.extend((0..x.len()).map(|i| Cell::Num(z(i, j))));
        t.push(row);
    }
    t
}

fn excite(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let cfg = run.cfg;
    let d = run.timed("source", || drive(cfg, model))?;
    let label = match cfg.source.target {
        Some(t) => state_label('f', t - 1),
        None => "custom".into(),
    };
    let prep = run.timed("excitation", || d.prepare(model, cfg, &label))?;
    if prep.regularized {
        run.warnings.push("excitation: a pole was shifted off the real axis".into());
    }
    run.note_population("excitation", &prep.distribution);
    let two: Vec<f64> = model.eig.two_ex_energies.iter().copied().collect();
    let t = energy_table(
        'f',
        &two,
        &[("population", &prep.distribution.values), ("raw", &prep.raw)],
    );
    let name = run.out.table("distribution", &t)?;

    #[derive(Serialize)]
    struct Meta {
        data: String,
        label: String,
        source: serde_json::Value,
        normalization: f64,
        clipped: f64,
        regularized: bool,
        total: f64,
        mean_energy_cm: f64,
    }
    let source = match d {
        Drive::Entangled(s) => serde_json::to_value(s)?,
        Drive::Coherent(s) => serde_json::to_value(s)?,
    };
    let dist = &prep.distribution;
    let meta = Meta {
        data: name,
        label,
        source,
        normalization: dist.normalization,
        clipped: dist.clipped,
        regularized: prep.regularized,
        total: dist.total(),
        mean_energy_cm: dist.mean_energy(&model.eig.two_ex_energies),
    };
    run.out.json("distribution_meta.json", &meta)?;
    if run.csv() {
        run.out.plot(
            "distribution.gp",
            &Plot::GroupedBars {
                csv: meta.data.clone(),
                title: format!("two-exciton population, {}", meta.label),
                label_column: 2,
                first_column: 4,
                n_series: 1,
                ylabel: "population".into(),
            },
        )?;
    }
    Ok(())
}

fn excite_scan(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let cfg = run.cfg;
    let sc = &cfg.scan;
    let targets = match sc.mode {
        ScanMode::Degenerate => {
            let list: Vec<usize> = match &sc.targets {
                Some(t) => t.iter().map(|&f| f - 1).collect(),
                None => (0..model.n_two()).collect(),
            };
            ScanTargets::Degenerate(list)
        }
        ScanMode::Mediated => ScanTargets::Mediated(sc.pairs.iter().map(|p| (p[0] - 1, p[1] - 1)).collect()),
    };
    let template = ScanSource {
        tau0: cfg.source.tau0,
        t_ent: cfg.source.t2 - cfg.source.t1,
        alpha: cfg.source.alpha,
        e0: cfg.source.e0,
    };
    let result = run.timed("excite-scan", || scan_targets(model, &template, &targets, &cfg.excitation))?;
    if result.regularized {
        run.warnings.push("excite-scan: a pole was shifted off the real axis".into());
    }
    let cols = labels('f', model.n_two());
    let map_name = run.out.table("scan_map", &matrix_table("target", &result.labels, &cols, &result.map))?;

    let mut t = Table::new(["row", "label", "target", "selectivity", "argmax"]);
    let argmax = result.argmax();
    for (r, label) in result.labels.iter().enumerate() {
        t.push(vec![
            Cell::Int(r + 1),
            Cell::Text(label.clone()),
            Cell::Text(state_label('f', result.targets[r])),
            Cell::Num(result.selectivity[r]),
            Cell::Text(state_label('f', argmax[r])),
        ]);
    }
    let sel_name = run.out.table("scan_selectivity", &t)?;

    #[derive(Serialize)]
    struct Meta<'a> {
        data: String,
        selectivity: String,
        mode: ScanMode,
        rows: usize,
        columns: usize,
        source: ScanSource,
        normalization: &'static str,
        row_axis: &'static str,
        column_axis: &'static str,
        labels: &'a [String],
    }
    let meta = Meta {
        data: map_name.clone(),
        selectivity: sel_name,
        mode: sc.mode,
        rows: result.map.nrows(),
        columns: result.map.ncols(),
        source: template,
        normalization: "each row divided by its maximum",
        row_axis: "targeted state",
        column_axis: "two-exciton state",
        labels: &result.labels,
    };
    run.out.json("scan_meta.json", &meta)?;
    if run.csv() {
        run.out.plot(
            "scan_map.gp",
            &Plot::MatrixImage {
                csv: map_name,
                title: "two-exciton population per target".into(),
                xlabel: meta.column_axis.into(),
                ylabel: meta.row_axis.into(),
            },
        )?;
    }
    Ok(())
}

fn propagate(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let cfg = run.cfg;
    let rho0 = run.initial_population(model, cfg.propagate.initial)?;
    let times = &cfg.propagate.times;
    let series = run.timed("propagation", || snapshot_series(&rho0, &model.two, times))?;
    for (s, t) in series.iter().zip(times) {
        run.note_clipped(&format!("propagation to {t} fs"), s.clipped - rho0.clipped);
    }
    let headers: Vec<String> = std::iter::once("t=0".to_string())
        .chain(times.iter().map(|t| format!("t={t}")))
        .collect();
    let mut columns: Vec<(&str, &[f64])> = vec![(headers[0].as_str(), rho0.values.as_slice())];
    for (h, s) in headers[1..].iter().zip(&series) {
        columns.push((h.as_str(), s.values.as_slice()));
    }
    let two: Vec<f64> = model.eig.two_ex_energies.iter().copied().collect();
    let name = run.out.table("snapshots", &energy_table('f', &two, &columns))?;

    #[derive(Serialize)]
    struct Meta<'a> {
        data: String,
        initial: InitialState,
        times_fs: &'a [f64],
        totals: Vec<f64>,
        mean_energy_cm: Vec<f64>,
    }
    let all: Vec<&PopulationDistribution> = std::iter::once(&rho0).chain(&series).collect();
    let meta = Meta {
        data: name.clone(),
        initial: cfg.propagate.initial,
        times_fs: times,
        totals: all.iter().map(|d| d.total()).collect(),
        mean_energy_cm: all.iter().map(|d| d.mean_energy(&model.eig.two_ex_energies)).collect(),
    };
    run.out.json("snapshots_meta.json", &meta)?;
    if run.csv() {
        run.out.plot(
            "snapshots.gp",
            &Plot::GroupedBars {
                csv: name,
                title: "two-exciton populations".into(),
                label_column: 2,
                first_column: 5,
                n_series: times.len(),
                ylabel: "population".into(),
            },
        )?;
    }
    Ok(())
}

/// Axes spanning every transition with appreciable dipole strength.
pub fn auto_axes(model: &ExcitonModel, points: usize, pad: f64) -> (Axis, Axis) {
    let dip = &model.dipoles;
    let eg_max = (0..model.n_one()).map(|e| dip.eg_strength(e)).fold(0.0, f64::max);
    let bright_e: Vec<usize> = (0..model.n_one())
        .filter(|&e| dip.eg_strength(e) >= 1e-3 * eg_max)
        .collect();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &e in &bright_e {
        lo = lo.min(model.e(e));
        hi = hi.max(model.e(e));
    }
    let eg = Axis {
        start: lo - pad,
        stop: hi + pad,
        n: points,
    };
    let fe_max = (0..model.n_two())
        .flat_map(|f| (0..model.n_one()).map(move |e| (f, e)))
        .map(|(f, e)| dip.fe_strength(f, e))
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for f in 0..model.n_two() {
        for e in 0..model.n_one() {
            if dip.fe_strength(f, e) >= 1e-3 * fe_max {
                let w = model.f(f) - model.e(e);
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
    }
    let fe = Axis {
        start: lo - pad,
        stop: hi + pad,
        n: points,
    };
    (fe, eg)
}

fn coincidence_axes(run: &Run, model: &ExcitonModel) -> (Axis, Axis) {
    let c = &run.cfg.coincidence;
    let pad = 3.0 * (c.detectors.fe.sigma_omega.max(c.detectors.eg.sigma_omega) + 10.0);
    let (fe, eg) = auto_axes(model, c.points, pad);
    (c.fe_axis.unwrap_or(fe), c.eg_axis.unwrap_or(eg))
}

#[derive(Serialize)]
struct GridMeta<'a> {
    data: String,
    layout: &'static str,
    x_axis: &'static str,
    y_axis: &'static str,
    panel: &'a StudyPanel,
    fe_axis: Axis,
    eg_axis: Axis,
    detector_dos: f64,
    normalization: f64,
    peak: [f64; 2],
}

fn write_grid(run: &mut Run, stem: &str, panel: &StudyPanel, axes: (Axis, Axis), grid: &SignalGrid) -> Result<()> {
    let name = if run.csv() {
        run.out.table(stem, &nonuniform_matrix(&grid.fe_axis, &grid.eg_axis, |i, j| grid.values[i][j]))?
    } else {
        let m = DMatrix::from_fn(grid.eg_axis.len(), grid.fe_axis.len(), |j, i| grid.values[i][j]);
        let rows: Vec<String> = grid.eg_axis.iter().map(|&x| crate::output::fmt_float(x)).collect();
        let cols: Vec<String> = grid.fe_axis.iter().map(|&x| crate::output::fmt_float(x)).collect();
        run.out.table(stem, &matrix_table("eg\\fe", &rows, &cols, &m))?
    };
    let (i, j) = grid.argmax();
    let meta = GridMeta {
        data: name.clone(),
        layout: layout_note(run.out.format),
        x_axis: "fe gate center (f -> e emission), cm^-1",
        y_axis: "eg gate center (e -> g emission), cm^-1",
        panel,
        fe_axis: axes.0,
        eg_axis: axes.1,
        detector_dos: grid.detector_dos,
        normalization: grid.normalization,
        peak: [grid.fe_axis[i], grid.eg_axis[j]],
    };
    run.out.json(&format!("{stem}_meta.json"), &meta)?;
    if run.csv() {
        run.out.plot(
            &format!("{stem}.gp"),
            &Plot::Heatmap {
                csv: name,
                title: format!("coincidence signal, {}", panel.label),
                xlabel: "fe gate (cm^-1)".into(),
                ylabel: "eg gate (cm^-1)".into(),
            },
        )?;
    }
    Ok(())
}

fn check_zero(run: &mut Run, label: &str, grid: &SignalGrid) {
    if grid.normalization == 0.0 {
        run.warnings.push(format!("{label}: signal is identically zero"));
    }
}

fn coincidence(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let cfg = run.cfg;
    let c = &cfg.coincidence;
    let rho = run.initial_population(model, c.initial)?;
    let axes = coincidence_axes(run, model);
    let panel = StudyPanel {
        label: "configured".into(),
        detectors: c.detectors,
        tw1: c.tw1,
        tw2: c.tw2,
    };
    let grid = run.timed("coincidence", || {
        let g = SignalGrid::new(axes.0.values(), axes.1.values(), c.tw1, c.tw2)?;
        coincidence_snapshot(&rho, model, &c.detectors, &g)
    })?;
    check_zero(run, "coincidence", &grid);
    write_grid(run, "signal", &panel, axes, &grid)
}

fn panel_study(run: &mut Run, model: &ExcitonModel) -> Result<()> {
    let cfg = run.cfg;
    let c = &cfg.coincidence;
    let rho = run.initial_population(model, c.initial)?;
    let axes = coincidence_axes(run, model);
    let reference = StudyPanel {
        label: "reference".into(),
        detectors: c.detectors,
        tw1: c.tw1,
        tw2: c.tw2,
    };
    let panels = standard_panels(&reference);
    let grids = run.timed("panel-study", || {
        parameter_study(&rho, model, &panels, &axes.0.values(), &axes.1.values())
    })?;
    for (panel, (label, grid)) in panels.iter().zip(&grids) {
        check_zero(run, label, grid);
        write_grid(run, &format!("panel_{label}"), panel, axes, grid)?;
    }
    Ok(())
}

/// Loads the config at `path` and runs it.
pub fn run_config_file(path: &Path, format: Format) -> Result<RunManifest> {
    let cfg = crate::config::load_config(path)?;
    run_scenario(&cfg, format)
}
