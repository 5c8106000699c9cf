//! Subcommand implementations.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use reeb_fuller::continuation::{
    continue_orbit, cylinder_orbit, detect_sky_catastrophe, FixedModel, HomotopyFamily, OrbitTrack, SkyReport,
};
use reeb_fuller::gwf::{gwf_invariant, verify_counterexample, GwfQuery, GwfReport, COUNTEREXAMPLE_CLASSES};
use reeb_fuller::index::{conley_zehnder, geodesic_index_report, index_report, CzResult, SymplecticPath};
use reeb_fuller::linalg::rotation2;
use reeb_fuller::models::{ContactModel, IsometryModel, Model, ReebFlow};
use reeb_fuller::orbit::{find_geodesics, find_reeb_orbits, ClosedOrbit, OrbitFamilyReport, ReebTarget};
use reeb_fuller::{Error, Result};

use crate::config::RunConfig;
use crate::output::{to_json, Envelope, InputHash};
use crate::plot::line_plot;
use crate::{Cli, Command, IndexCmd, OrbitsCmd, TargetArgs, TrackArgs, EXIT_OK};

pub enum CliError {
    Core(Error),
    Io(String, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

pub struct Output {
    pub report: Vec<u8>,
    pub exit_code: i32,
}

/// Inputs read so far, hashed in reading order.
#[derive(Default)]
struct Inputs {
    hashes: Vec<InputHash>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> std::result::Result<String, CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
        self.hashes.push(InputHash { path: path.display().to_string(), sha256: crate::output::sha256_hex(&bytes) });
        String::from_utf8(bytes).map_err(|e| CliError::Core(Error::Parse(format!("{}: {e}", path.display()))))
    }
}

fn resolve_config(cli: &Cli, inputs: &mut Inputs) -> std::result::Result<RunConfig, CliError> {
    let g = &cli.global;
    let mut cfg = match &g.config {
        Some(p) => serde_json::from_str::<RunConfig>(&inputs.read(p)?).map_err(Error::from)?,
        None => RunConfig::default(),
    };
    if let Some(v) = g.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = g.samples {
        cfg.samples = v;
    }
    if let Some(v) = g.tol_orbit {
        cfg.tol_orbit = v;
    }
    if let Some(v) = g.tol_match {
        cfg.tol_match = v;
    }
    if let Some(v) = g.degeneracy_tol {
        cfg.degeneracy_tol = v;
    }
    if let Some(v) = g.rng_seed {
        cfg.rng_seed = v;
    }
    if let Some(v) = g.escape_window {
        cfg.continuation.window = v;
    }
    if let Some(v) = g.period_cap {
        cfg.continuation.period_cap = v;
    }
    if let Some(p) = &g.out {
        cfg.output = Some(p.display().to_string());
    }
    if let Some(p) = &g.plot {
        cfg.plot = Some(p.display().to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn envelope<T: Serialize>(command: &str, cfg: &RunConfig, inputs: Inputs, result: T) -> Vec<u8> {
    to_json(&Envelope { command, version: env!("CARGO_PKG_VERSION"), config: cfg, inputs: inputs.hashes, result })
}

fn write_plot(dir: &Option<String>, name: &str, svg: String) -> std::result::Result<(), CliError> {
    if let Some(dir) = dir {
        let dir = PathBuf::from(dir);
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(dir.display().to_string(), e))?;
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    }
    Ok(())
}

fn orbit_trace_plot(title: &str, orbits: &[&ClosedOrbit]) -> String {
    let series: Vec<Vec<(f64, f64)>> = orbits
        .iter()
        .map(|o| {
            let mut pts: Vec<(f64, f64)> = o.samples.iter().map(|p| (p[0], p[1])).collect();
            let shift = o.lift_shift();
            pts.push((o.samples[0][0] + shift[0], o.samples[0][1] + shift[1]));
            pts
        })
        .collect();
    line_plot(title, "coordinate 1", "coordinate 2", &series)
}

fn period_plot(tracks: &[&OrbitTrack]) -> String {
    let series: Vec<Vec<(f64, f64)>> = tracks.iter().map(|t| t.period_profile.clone()).collect();
    line_plot("period along the family", "t", "period", &series)
}

pub enum Target {
    Class(Vec<i64>),
    Window(f64, f64),
}

fn target(t: &TargetArgs) -> Result<Option<Target>> {
    match (&t.class, &t.window) {
        (Some(_), Some(_)) => Err(Error::InvalidInput("give either --class or --window".into())),
        (Some(k), None) => Ok(Some(Target::Class(k.clone()))),
        (None, Some(w)) => match w.as_slice() {
            [a, b] if a < b => Ok(Some(Target::Window(*a, *b))),
            _ => Err(Error::InvalidInput("--window takes min,max with min < max".into())),
        },
        (None, None) => Ok(None),
    }
}

fn base_class(k: &[i64]) -> Result<[i64; 2]> {
    match k {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::InvalidInput(format!("torus class needs two entries, got {k:?}"))),
    }
}

/// Orbit search on a loaded model.
pub fn find_orbits(model: &Model, target: &Target, cfg: &RunConfig) -> Result<OrbitFamilyReport> {
    let c = cfg.finder();
    match (model, target) {
        (Model::Metric(g), Target::Class(k)) => find_geodesics(g, base_class(k)?, &c),
        (Model::Metric(_), Target::Window(..)) => {
            Err(Error::InvalidInput("geodesic searches are by class; use --class".into()))
        }
        (Model::Contact(m), Target::Class(k)) => find_reeb_orbits(m, &ReebTarget::Class { winding: k.clone() }, &c),
        (Model::Contact(m), Target::Window(a, b)) => find_reeb_orbits(m, &ReebTarget::Window { min: *a, max: *b }, &c),
        (Model::MappingTorus(_), _) => {
            Err(Error::InvalidInput("orbit search on mapping tori goes through the gwf command".into()))
        }
    }
}

fn require_target(t: &TargetArgs) -> Result<Target> {
    target(t)?.ok_or_else(|| Error::InvalidInput("give --class or --window".into()))
}

fn load_model(path: &Path, cfg: &RunConfig, inputs: &mut Inputs) -> std::result::Result<Model, CliError> {
    Ok(Model::from_json(&inputs.read(path)?, cfg.checks())?)
}

#[derive(Serialize)]
struct IndexOutput {
    orbits: OrbitFamilyReport,
    index: reeb_fuller::index::IndexReport,
}

fn index_for(model: &Model, report: &OrbitFamilyReport, cfg: &RunConfig, morse_bott: bool) -> Result<reeb_fuller::index::IndexReport> {
    let ic = cfg.index();
    match model {
        Model::Metric(g) => geodesic_index_report(g, &report.strings, &report.components, &ic, morse_bott),
        Model::Contact(m) => index_report(&ReebFlow::new(m.clone()), &report.strings, &report.components, &ic, morse_bott),
        Model::MappingTorus(_) => Err(Error::InvalidInput("index on mapping tori goes through the gwf command".into())),
    }
}

#[derive(Serialize)]
struct CzOutput {
    path: &'static str,
    parameter: f64,
    cz: CzResult,
}

fn rotation_path(theta: f64) -> SymplecticPath {
    SymplecticPath::from_fn(|t| rotation2(std::f64::consts::TAU * theta * t), 2048)
}

fn hyperbolic_path(lambda: f64) -> SymplecticPath {
    SymplecticPath::from_fn(|t| DMatrix::from_row_slice(2, 2, &[(lambda * t).exp(), 0.0, 0.0, (-lambda * t).exp()]), 2048)
}

/// The model a family runs through at an endpoint, and start orbits on it.
fn start_orbits(
    family: &HomotopyFamily,
    from: f64,
    orbit_file: Option<&Path>,
    target: Option<Target>,
    cfg: &RunConfig,
    inputs: &mut Inputs,
) -> std::result::Result<Vec<ClosedOrbit>, CliError> {
    if let Some(p) = orbit_file {
        let v: Value = serde_json::from_str(&inputs.read(p)?).map_err(Error::from)?;
        let v = v.get("result").cloned().unwrap_or(v);
        let v = v.get("orbits").cloned().unwrap_or(v);
        if let Some(strings) = v.get("strings") {
            let strings: Vec<reeb_fuller::orbit::OrbitString> =
                serde_json::from_value(strings.clone()).map_err(Error::from)?;
            return Ok(strings.into_iter().map(|s| s.representative).collect());
        }
        return Ok(vec![serde_json::from_value(v).map_err(Error::from)?]);
    }
    let model = family.model_at(from)?;
    let mut orbits = match (&model, target) {
        (FixedModel::Cylinder { c }, _) => vec![cylinder_orbit(*c, cfg.samples)?],
        (FixedModel::Metric { metric }, Some(t)) => {
            find_orbits(&Model::Metric(metric.clone()), &t, cfg)?.strings.into_iter().map(|s| s.representative).collect()
        }
        (FixedModel::Contact { model }, Some(t)) => {
            find_orbits(&Model::Contact(model.clone()), &t, cfg)?.strings.into_iter().map(|s| s.representative).collect()
        }
        (_, None) => return Err(Error::InvalidInput("give --orbit, --class or --window to choose start orbits".into()).into()),
    };
    orbits.sort_by(|a, b| a.period.total_cmp(&b.period));
    Ok(orbits)
}

#[derive(Serialize)]
struct TrackOutcome {
    start_period: f64,
    track: Option<OrbitTrack>,
    /// Set when the track stalled.
    stall: Option<String>,
}

#[derive(Serialize)]
struct SkyOutcome {
    start_period: f64,
    report: SkyReport,
}

fn load_family(track: &TrackArgs, cfg: &RunConfig, inputs: &mut Inputs) -> std::result::Result<HomotopyFamily, CliError> {
    let family: HomotopyFamily = serde_json::from_str(&inputs.read(&track.family)?).map_err(Error::from)?;
    family.validate_at(track.from, cfg.checks())?;
    if track.from != 0.0 && track.from != 1.0 {
        return Err(Error::InvalidInput("--from must be 0 or 1".into()).into());
    }
    Ok(family)
}

fn isometry(args: &crate::GwfArgs) -> Result<IsometryModel> {
    let shift = match args.shift.as_slice() {
        [a, b] => [*a, *b],
        _ => return Err(Error::InvalidInput("--shift takes two numbers".into())),
    };
    Ok(match &args.linear {
        None => IsometryModel::translation(shift),
        Some(l) => match l.as_slice() {
            [a, b, c, d] => IsometryModel::linear([[*a, *b], [*c, *d]], shift),
            _ => return Err(Error::InvalidInput("--linear takes four integers".into())),
        },
    })
}

/// Runs the parsed command and renders its report.
pub fn execute(cli: &Cli) -> std::result::Result<Output, CliError> {
    let mut inputs = Inputs::default();
    let cfg = resolve_config(cli, &mut inputs)?;
    let ok = |report| Ok(Output { report, exit_code: EXIT_OK });
    match &cli.command {
        Command::Orbits { cmd: OrbitsCmd::Find { model, target: t } } => {
            let t = require_target(t)?;
            let model = load_model(model, &cfg, &mut inputs)?;
            let report = find_orbits(&model, &t, &cfg)?;
            let reps: Vec<&ClosedOrbit> = report.strings.iter().map(|s| &s.representative).collect();
            write_plot(&cfg.plot, "orbits.svg", orbit_trace_plot("orbit traces", &reps))?;
            ok(envelope("orbits find", &cfg, inputs, report))
        }
        Command::Index { cmd: IndexCmd::Fuller { model, target: t, morse_bott } } => {
            let t = require_target(t)?;
            let model = load_model(model, &cfg, &mut inputs)?;
            let orbits = find_orbits(&model, &t, &cfg)?;
            let index = index_for(&model, &orbits, &cfg, *morse_bott)?;
            ok(envelope("index fuller", &cfg, inputs, IndexOutput { orbits, index }))
        }
        Command::Index { cmd: IndexCmd::Cz { rotation, hyperbolic, model, target: t } } => {
            match (rotation, hyperbolic, model) {
                (Some(theta), None, None) => {
                    let cz = conley_zehnder(&rotation_path(*theta))?;
                    ok(envelope("index cz", &cfg, inputs, CzOutput { path: "rotation", parameter: *theta, cz }))
                }
                (None, Some(lambda), None) => {
                    let cz = conley_zehnder(&hyperbolic_path(*lambda))?;
                    ok(envelope("index cz", &cfg, inputs, CzOutput { path: "hyperbolic", parameter: *lambda, cz }))
                }
                (None, None, Some(model)) => {
                    let t = require_target(t)?;
                    let model = load_model(model, &cfg, &mut inputs)?;
                    let orbits = find_orbits(&model, &t, &cfg)?;
                    let index = index_for(&model, &orbits, &cfg, true)
                        .or_else(|_| index_for(&model, &orbits, &cfg, false))?;
                    ok(envelope("index cz", &cfg, inputs, IndexOutput { orbits, index }))
                }
                _ => Err(Error::InvalidInput("give exactly one of --rotation, --hyperbolic, --model".into()).into()),
            }
        }
        Command::Continue(track) => {
            let family = load_family(track, &cfg, &mut inputs)?;
            let starts = start_orbits(&family, track.from, track.orbit.as_deref(), target(&track.target)?, &cfg, &mut inputs)?;
            let cc = cfg.continuation();
            let outcomes: Vec<TrackOutcome> = starts
                .par_iter()
                .map(|o| -> Result<TrackOutcome> {
                    match continue_orbit(&family, o, track.from, &cc) {
                        Ok(tr) => Ok(TrackOutcome { start_period: o.period, track: Some(tr), stall: None }),
                        Err(e @ Error::Stall { .. }) => {
                            Ok(TrackOutcome { start_period: o.period, track: None, stall: Some(e.to_string()) })
                        }
                        Err(e) => Err(e),
                    }
                })
                .collect::<Result<_>>()?;
            let tracks: Vec<&OrbitTrack> = outcomes.iter().filter_map(|o| o.track.as_ref()).collect();
            write_plot(&cfg.plot, "period.svg", period_plot(&tracks))?;
            ok(envelope("continue", &cfg, inputs, outcomes))
        }
        Command::Sky(track) => {
            let family = load_family(track, &cfg, &mut inputs)?;
            let starts = start_orbits(&family, track.from, track.orbit.as_deref(), target(&track.target)?, &cfg, &mut inputs)?;
            let cc = cfg.continuation();
            let outcomes: Vec<SkyOutcome> = starts
                .par_iter()
                .map(|o| {
                    detect_sky_catastrophe(&family, o, track.from, &cc)
                        .map(|report| SkyOutcome { start_period: o.period, report })
                })
                .collect::<Result<_>>()?;
            let tracks: Vec<&OrbitTrack> = outcomes.iter().filter_map(|o| o.report.track.as_ref()).collect();
            write_plot(&cfg.plot, "period.svg", period_plot(&tracks))?;
            ok(envelope("sky", &cfg, inputs, outcomes))
        }
        Command::Gwf(args) => {
            let metric = match load_model(&args.metric, &cfg, &mut inputs)? {
                Model::Metric(g) => g,
                Model::Contact(ContactModel::UnitCotangentTorus { metric }) => metric,
                _ => return Err(Error::InvalidInput("gwf needs a torus metric".into()).into()),
            };
            let phi = isometry(args)?;
            let class = base_class(&args.class)?;
            let reports: Vec<GwfReport> = args
                .charge
                .iter()
                .map(|&n| {
                    let q = GwfQuery { metric: metric.clone(), phi: phi.clone(), class, charge: n };
                    gwf_invariant(&q, &cfg.finder(), &cfg.index())
                })
                .collect::<Result<_>>()?;
            let reps: Vec<&ClosedOrbit> =
                reports.iter().flat_map(|r| r.fixed.fixed.iter().map(|f| &f.string.representative)).collect();
            write_plot(&cfg.plot, "fixed_strings.svg", orbit_trace_plot("fixed strings", &reps))?;
            ok(envelope("gwf", &cfg, inputs, reports))
        }
        Command::Counterexample(args) => {
            let shift = match args.shift.as_deref() {
                None => [2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0],
                Some([a, b]) => [*a, *b],
                Some(_) => return Err(Error::InvalidInput("--shift takes two numbers".into()).into()),
            };
            let report = verify_counterexample(shift, &COUNTEREXAMPLE_CLASSES, &args.charges, &cfg.finder(), &cfg.index())?;
            let series: Vec<Vec<(f64, f64)>> = COUNTEREXAMPLE_CLASSES
                .iter()
                .map(|k| {
                    report
                        .bounds
                        .iter()
                        .filter(|b| b.class == *k)
                        .map(|b| (b.charge as f64, b.closed_form))
                        .collect()
                })
                .collect();
            write_plot(&cfg.plot, "displacement.svg", line_plot("displacement bounds", "charge", "distance", &series))?;
            ok(envelope("counterexample", &cfg, inputs, report))
        }
        Command::Selftest => {
            let report = crate::selftest::run(&cfg)?;
            let code = if report.all_passed { EXIT_OK } else { crate::EXIT_FAILURE };
            Ok(Output { report: envelope("selftest", &cfg, inputs, report), exit_code: code })
        }
    }
}
