//! Command-line front end: parses scenario files, runs one action and writes
//! its artifacts.
//!
//! Exit codes: 0 success, 1 usage error, 2 configuration error, 3 numerical
//! or I/O failure, 4 a selftest criterion failed. Every failure also prints a
//! line `error_code=<name>` on standard error.

pub mod config;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use ndarray::Array2;
use vortexlab_core::beam::synthesize;
use vortexlab_core::field::{ScalarField, SpinorField, VectorField2D};
use vortexlab_core::heatmap::{export_heatmap, Colormap};
use vortexlab_core::observables::{currents, densities, oam_expectation};
use vortexlab_core::pair::{pair_correlations, pair_correlations_between, PairSpec, SpinSymmetry};
use vortexlab_core::propagate::{propagate, PropagationPlan};
use vortexlab_core::vortex::{singularity_census, vortex_report, FieldSource, LoopSpec, WindingOptions};
use vortexlab_core::vxf::{write_atomic, write_vxf, write_vxf_scalar};
use vortexlab_core::{selftest, Error as CoreError, TransverseGrid};

pub use config::{parse_config, parse_config_file, Action, ConfigError, Scenario};

#[derive(Debug, Parser)]
#[command(name = "vortexlab", version, about = "Structured-light vortex toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Scenario file.
    #[arg(long, alias = "beam", value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory, or a `.vxf` file for `synth` and `propagate`.
    #[arg(long, value_name = "PATH", default_value = "vortexlab-out")]
    pub out: PathBuf,
    /// Grid override: `nx,ny,dx,dy`.
    #[arg(long, value_name = "NX,NY,DX,DY")]
    pub grid: Option<String>,
    /// Suppress the report on standard output.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the beam on the grid and write a VXF field.
    Synth(Common),
    /// Synthesize, then propagate by `[propagate] dz` × `steps`.
    Propagate(Common),
    /// Densities and currents as VXF scalars and heatmaps.
    Observables(Common),
    /// Winding, circulation and topological charge on a circular loop.
    Circulation {
        #[command(flatten)]
        common: Common,
        /// Loop radius in λ₀ (overrides `[loop] radius`).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Plaquette charges and the zero-amplitude raster.
    Census(Common),
    /// Two-photon correlation rings, matrices and disks.
    Coherence(Common),
    /// Orbital angular momentum expectation values.
    Oam(Common),
    /// Run the built-in acceptance checks.
    Selftest {
        #[arg(long)]
        quiet: bool,
    },
}

/// Failure classes with stable exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Config(ConfigError),
    Numerical(String),
    Io(String),
    Selftest(usize),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) | Failure::Io(_) => 3,
            Failure::Selftest(_) => 4,
        }
    }

    pub fn code_name(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Config(_) => "config",
            Failure::Numerical(_) => "numerical",
            Failure::Io(_) => "io",
            Failure::Selftest(_) => "selftest",
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) => m.clone(),
            Failure::Config(e) => e.to_string(),
            Failure::Selftest(n) => format!("{n} selftest criteria failed"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(io) => Failure::Io(io.to_string()),
            CoreError::InvalidParameter(m) | CoreError::InvalidGrid(m) => {
                Failure::Config(ConfigError { line: None, message: m })
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, S>(argv: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            let _ = writeln!(err, "error_code=usage");
            return 1;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            let _ = writeln!(err, "error_code={}", f.code_name());
            f.exit_code()
        }
    }
}

fn execute(cmd: &Command, out: &mut dyn std::io::Write) -> Outcome {
    let (common, action) = match cmd {
        Command::Selftest { quiet } => return run_selftest(*quiet, out),
        Command::Synth(c) => (c, Action::Synth),
        Command::Propagate(c) => (c, Action::Propagate),
        Command::Observables(c) => (c, Action::Observables),
        Command::Circulation { common, .. } => (common, Action::Circulation),
        Command::Census(c) => (c, Action::Census),
        Command::Coherence(c) => (c, Action::Coherence),
        Command::Oam(c) => (c, Action::Oam),
    };
    let mut scenario = parse_config_file(&common.config)?;
    if let Some(a) = scenario.action {
        if a != action {
            return Err(Failure::Usage(format!(
                "{} declares action `{}` but was run with `{}`",
                common.config.display(),
                a.name(),
                action.name()
            )));
        }
    }
    if let Some(g) = &common.grid {
        scenario.grid = parse_grid_flag(g, scenario.grid.z)?;
    }
    if let Command::Circulation { radius: Some(r), .. } = cmd {
        if !(*r > 0.0) {
            return Err(Failure::Usage(format!("--radius must be positive, got {r}")));
        }
        scenario.loop_.radius = Some(*r);
    }
    let mut report = String::new();
    match action {
        Action::Synth => synth(&scenario, &common.out, &mut report)?,
        Action::Propagate => propagate_cmd(&scenario, &common.out, &mut report)?,
        Action::Observables => observables(&scenario, &common.out, &mut report)?,
        Action::Circulation => circulation(&scenario, &common.out, &mut report)?,
        Action::Census => census(&scenario, &common.out, &mut report)?,
        Action::Coherence => coherence(&scenario, &common.out, &mut report)?,
        Action::Oam => oam(&scenario, &common.out, &mut report)?,
    }
    if !common.quiet {
        out.write_all(report.as_bytes())?;
    }
    Ok(())
}

fn parse_grid_flag(s: &str, z: f64) -> std::result::Result<config::GridConfig, Failure> {
    let bad = || Failure::Usage(format!("--grid expects nx,ny,dx,dy, got `{s}`"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let nx: usize = parts[0].parse().map_err(|_| bad())?;
    let ny: usize = parts[1].parse().map_err(|_| bad())?;
    let dx: f64 = parts[2].parse().map_err(|_| bad())?;
    let dy: f64 = parts[3].parse().map_err(|_| bad())?;
    if nx < 4 || ny < 4 || !(dx > 0.0) || !(dy > 0.0) {
        return Err(bad());
    }
    Ok(config::GridConfig { nx, ny, dx, dy, z })
}

fn run_selftest(quiet: bool, out: &mut dyn std::io::Write) -> Outcome {
    let mut failed = 0;
    for outcome in selftest::run_all() {
        failed += usize::from(!outcome.passed);
        if !quiet || !outcome.passed {
            writeln!(out, "{outcome}")?;
        }
    }
    if failed > 0 {
        Err(Failure::Selftest(failed))
    } else {
        Ok(())
    }
}

fn out_dir(out: &Path) -> std::result::Result<PathBuf, Failure> {
    std::fs::create_dir_all(out)?;
    Ok(out.to_path_buf())
}

/// A `.vxf` target is written directly; anything else is a directory.
fn field_target(out: &Path, default_name: &str) -> std::result::Result<PathBuf, Failure> {
    if out.extension().is_some_and(|e| e == "vxf") {
        if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(out.to_path_buf())
    } else {
        Ok(out_dir(out)?.join(default_name))
    }
}

fn write_text(path: &Path, text: &str) -> Outcome {
    Ok(write_atomic(path, text.as_bytes())?)
}

fn beam_field(s: &Scenario, grid: &TransverseGrid, report: &mut String) -> std::result::Result<SpinorField, Failure> {
    let beam = s.require_beam()?;
    for w in beam.warnings(s.lambda0) {
        let _ = writeln!(report, "warning={w}");
    }
    Ok(synthesize(beam, grid)?)
}

/// Synthesizes the beam and applies `[propagate]` when present.
fn evolved_field(s: &Scenario, report: &mut String) -> std::result::Result<SpinorField, Failure> {
    let grid = s.grid()?;
    let f = beam_field(s, &grid, report)?;
    match s.propagate {
        None => Ok(f),
        Some(p) => {
            let result = propagate(&f, &PropagationPlan::new(p.dz, p.steps)?)?;
            for w in &result.warnings {
                let _ = writeln!(report, "warning={w}");
            }
            Ok(result.field)
        }
    }
}

fn grid_lines(report: &mut String, g: &TransverseGrid) {
    let _ = writeln!(report, "nx={}\nny={}\ndx={}\ndy={}\nz={}\nlambda0={}", g.nx, g.ny, g.dx, g.dy, g.z, g.lambda0);
}

fn synth(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let grid = s.grid()?;
    let f = beam_field(s, &grid, report)?;
    let path = field_target(out, "field.vxf")?;
    write_vxf(&f, &path)?;
    grid_lines(report, &grid);
    let _ = writeln!(report, "norm={}\nfield={}", f.norm_sqr() * grid.cell_area(), path.display());
    Ok(())
}

fn propagate_cmd(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let p = s.propagate.ok_or_else(|| ConfigError {
        line: None,
        message: "propagate needs a [propagate] section with dz".into(),
    })?;
    let grid = s.grid()?;
    let start = beam_field(s, &grid, report)?;
    let result = propagate(&start, &PropagationPlan::new(p.dz, p.steps)?)?;
    for w in &result.warnings {
        let _ = writeln!(report, "warning={w}");
    }
    let path = field_target(out, "field.vxf")?;
    write_vxf(&result.field, &path)?;
    let n0 = start.norm_sqr();
    grid_lines(report, &result.field.grid);
    let _ = writeln!(
        report,
        "steps={}\ndz={}\nnorm_drift={}\nfield={}",
        p.steps,
        p.dz,
        (result.field.norm_sqr() - n0) / n0,
        path.display()
    );
    Ok(())
}

fn emit_scalar(dir: &Path, name: &str, s: &ScalarField, map: Option<Colormap>, report: &mut String) -> Outcome {
    let path = dir.join(format!("{name}.vxf"));
    write_vxf_scalar(s, &path)?;
    let _ = writeln!(report, "{name}={name}.vxf");
    if let Some(map) = map {
        let ext = if map == Colormap::Gray { "pgm" } else { "ppm" };
        export_heatmap(s, dir.join(format!("{name}.{ext}")), map)?;
    }
    Ok(())
}

fn observables(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let f = evolved_field(s, report)?;
    let dir = out_dir(out)?;
    let (n, h) = densities(&f);
    let (jn, jh) = currents(&f);
    grid_lines(report, &f.grid);
    let _ = writeln!(report, "pnd_max={}\nhelicity_max_abs={}", n.max(), h.max_abs());
    let _ = writeln!(report, "j_n_max={}\nj_h_max={}", jn.max_norm(), jh.max_norm());
    let heat = |m| s.heatmaps.then_some(m);
    emit_scalar(&dir, "pnd", &n, heat(Colormap::Gray), report)?;
    emit_scalar(&dir, "helicity", &h, heat(Colormap::Signed), report)?;
    let vec = |v: &VectorField2D, name: &str, report: &mut String| -> Outcome {
        emit_scalar(&dir, &format!("{name}_x"), &v.x_component(), heat(Colormap::Signed), report)?;
        emit_scalar(&dir, &format!("{name}_y"), &v.y_component(), heat(Colormap::Signed), report)?;
        emit_scalar(&dir, &format!("{name}_mag"), &v.magnitude(), heat(Colormap::Gray), report)
    };
    vec(&jn, "j_n", report)?;
    vec(&jh, "j_h", report)?;
    write_text(&dir.join("observables.txt"), report)
}

fn circulation(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let beam = s.require_beam()?;
    let w0 = beam.components.iter().map(|c| c.profile.w0()).fold(0.0, f64::max);
    let radius = s.loop_.radius.unwrap_or(w0);
    let lp = LoopSpec::circle(s.loop_.cx, s.loop_.cy, radius, s.loop_.samples)?;
    let source = FieldSource::analytic(beam, s.lambda0, s.grid.z)?;
    let opts = WindingOptions { first_jump_negative: s.loop_.first_jump_negative, ..WindingOptions::default() };
    let r = vortex_report(&source, s.loop_.component, &lp, &opts)?;
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| x.to_string());
    let _ = writeln!(report, "radius={radius}\ncx={}\ncy={}\nz={}", s.loop_.cx, s.loop_.cy, s.grid.z);
    let _ = writeln!(report, "samples={}", s.loop_.samples);
    let _ = writeln!(report, "winding={}", r.winding);
    let _ = writeln!(report, "total_phase={}", r.total_phase);
    let _ = writeln!(report, "converged={}", r.converged);
    let _ = writeln!(report, "axis_fallback={}", r.axis_fallback);
    let _ = writeln!(report, "jumps={}", r.jump_events.len());
    for (k, j) in r.jump_events.iter().enumerate() {
        let _ = writeln!(report, "jump_{k}_angle={}\njump_{k}_sign={}", j.arc * 2.0 * PI, j.sign);
    }
    let _ = writeln!(report, "kappa_n={}\nkappa_h={}", opt(r.kappa_n), opt(r.kappa_h));
    let _ = writeln!(report, "tc_berry_arg={}\ntc_berry_field={}", r.tc_berry_arg, opt(r.tc_berry_field));
    let dir = out_dir(out)?;
    let mut csv = String::from("s,x,y,amplitude,phase,increment\n");
    for p in &r.samples {
        let _ = writeln!(csv, "{},{},{},{},{},{}", p.s, p.x, p.y, p.amplitude, p.phase, p.increment);
    }
    write_text(&dir.join("loop_phase.csv"), &csv)?;
    write_text(&dir.join("circulation.txt"), report)
}

fn census(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let f = evolved_field(s, report)?;
    let c = singularity_census(&f, s.census_component);
    let dir = out_dir(out)?;
    let positive = c.singularities.iter().filter(|v| v.charge > 0).count();
    grid_lines(report, &f.grid);
    let _ = writeln!(report, "net_charge={}", c.net_charge());
    let _ = writeln!(report, "positive={positive}\nnegative={}", c.singularities.len() - positive);
    let _ = writeln!(report, "zero_pixels={}", c.zero_raster.iter().filter(|&&z| z).count());
    let mut csv = String::from("x,y,charge\n");
    for v in &c.singularities {
        let _ = writeln!(csv, "{},{},{}", v.x, v.y, v.charge);
    }
    write_text(&dir.join("singularities.csv"), &csv)?;
    let raster = ScalarField::new(f.grid, c.zero_raster.mapv(|z| if z { 0.0 } else { 1.0 }));
    export_heatmap(&raster, dir.join("zero_raster.pgm"), Colormap::Gray)?;
    let psi = f.psi_plus.clone() + &f.psi_minus;
    let picked = match s.census_component {
        vortexlab_core::vortex::Component::Plus => f.psi_plus.clone(),
        vortexlab_core::vortex::Component::Minus => f.psi_minus.clone(),
        _ => psi,
    };
    let phase = ScalarField::new(f.grid, picked.mapv(|v| v.arg()));
    if s.heatmaps {
        export_heatmap(&phase, dir.join("phase.ppm"), Colormap::Signed)?;
    }
    write_text(&dir.join("census.txt"), report)
}

fn symmetry_name(s: SpinSymmetry) -> &'static str {
    match s {
        SpinSymmetry::Symmetric => "symmetric",
        SpinSymmetry::Antisymmetric => "antisymmetric",
        SpinSymmetry::SameUp => "same_up",
        SpinSymmetry::SameDown => "same_down",
    }
}

fn coherence(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let cfg = s.pair.as_ref().ok_or_else(|| ConfigError {
        line: None,
        message: "coherence needs a [pair] section".into(),
    })?;
    let dir = out_dir(out)?;
    for &m in &cfg.m {
        for &symmetry in &cfg.symmetry {
            let spec = PairSpec {
                m,
                symmetry,
                theta_b: cfg.theta_b,
                phi_b: cfg.phi_b,
                phi0: cfg.phi0,
                eta: cfg.eta.clone(),
                z: cfg.z,
            };
            spec.validate()?;
            let tag = format!("m{m}_{}", symmetry_name(symmetry));
            let rho = cfg.ring_radius;

            // Reference point at azimuth 0 followed by the ring samples.
            let n = cfg.ring_samples;
            let ring: Vec<(f64, f64)> = (0..n).map(|k| (rho, 2.0 * PI * k as f64 / n as f64)).collect();
            let c = pair_correlations_between(&spec, &[(rho, 0.0)], &ring)?;
            let mut csv = String::from("delta_phi,g2,G2,G2H\n");
            for (k, p) in ring.iter().enumerate() {
                let _ = writeln!(csv, "{},{},{},{}", p.1, c.g2[[0, k]], c.big_g2[[0, k]], c.big_g2h[[0, k]]);
            }
            write_text(&dir.join(format!("g2_ring_{tag}.csv")), &csv)?;

            let nm = cfg.matrix_samples;
            let pts: Vec<(f64, f64)> = (0..nm).map(|k| (rho, 2.0 * PI * k as f64 / nm as f64)).collect();
            let c = pair_correlations(&spec, &pts)?;
            let mut csv = String::from("i,j,phi_i,phi_j,g2,G2,G2H\n");
            for i in 0..nm {
                for j in 0..nm {
                    let _ = writeln!(
                        csv,
                        "{i},{j},{},{},{},{},{}",
                        pts[i].1, pts[j].1, c.g2[[i, j]], c.big_g2[[i, j]], c.big_g2h[[i, j]]
                    );
                }
            }
            write_text(&dir.join(format!("g2_matrix_{tag}.csv")), &csv)?;

            let disk = g2_disk(&spec, cfg.disk_radius, cfg.disk_n, rho)?;
            export_heatmap(&disk, dir.join(format!("g2_disk_{tag}.pgm")), Colormap::Gray)?;
            let _ = writeln!(report, "{tag}_g2_at_reference={}", c.g2[[0, 0]]);
        }
    }
    write_text(&dir.join("coherence.txt"), report)
}

/// `g²(r_ref, r′)` with `r_ref = (rho_ref, 0)` and `r′` over a disk; outside is masked.
fn g2_disk(spec: &PairSpec, radius: f64, n: usize, rho_ref: f64) -> std::result::Result<ScalarField, Failure> {
    let d = 2.0 * radius / (n - 1) as f64;
    let grid = TransverseGrid::new(n, n, d, d, -radius, -radius, 1.0, spec.z)?;
    let mut pts = Vec::new();
    let mut index = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (grid.x(i), grid.y(j));
            let r = x.hypot(y);
            if r <= radius && r > 0.0 {
                index.push((j, i));
                pts.push((r, y.atan2(x)));
            }
        }
    }
    let c = pair_correlations_between(spec, &[(rho_ref, 0.0)], &pts)?;
    let mut values = Array2::from_elem((n, n), f64::NAN);
    for (k, &(j, i)) in index.iter().enumerate() {
        values[[j, i]] = c.g2[[0, k]];
    }
    let mask = values.mapv(|v| !v.is_finite());
    Ok(ScalarField::new(grid, values).with_mask(mask))
}

fn oam(s: &Scenario, out: &Path, report: &mut String) -> Outcome {
    let f = evolved_field(s, report)?;
    let dz = s.oam_dz;
    let lo = propagate(&f, &PropagationPlan::new(-dz, 1)?)?.field;
    let hi = propagate(&f, &PropagationPlan::new(dz, 1)?)?.field;
    let l = oam_expectation(&lo, &f, &hi, dz)?;
    grid_lines(report, &f.grid);
    let _ = writeln!(report, "lx={}\nly={}\nlz={}", l.lx, l.ly, l.lz);
    let dir = out_dir(out)?;
    write_text(&dir.join("oam.txt"), report)
}

