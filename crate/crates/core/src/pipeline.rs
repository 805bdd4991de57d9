//! One end-to-end run: load, build, solve, check, write `<name>.uv.obj`, `<name>.svg` and
//! `<name>.report.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{
    check_layout_polygon, check_reflections_8, check_rotation_63, check_tiling, emit_report, emit_svg, emit_svg_uv,
    flip_count, flip_count_torus, per_copy_energies, AnalysisError, Report, SolverSummary, SvgOptions,
};
use crate::construct::{
    build_torus_4, build_torus_42, build_torus_63, build_torus_8, detect_sigma, make_symmetric_cuts, validate_covering,
    ConstructError, Construction, GluedTorus, MarkedDisk, SphereCutSystem,
};
use crate::direct::{crosscheck_against_torus, solve_direct, DirectError, TargetShape};
use crate::energy::{conformal_energy, weight_positivity_report, weights_for, WeightScheme};
use crate::lattice::Lattice;
use crate::linalg::SolverOptions;
use crate::mesh::{load_obj, save_obj_with_uv, MeshError, SurfaceMesh};
use crate::scalar::Vec2;
use crate::torus::{harmonic_embedding, TorusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    DiskIsosceles,
    DiskEquilateral,
    DiskRectangle,
    #[serde(rename = "sphere-3fold")]
    Sphere3fold,
}

impl Mode {
    pub fn marks(self) -> Option<usize> {
        match self {
            Mode::DiskIsosceles | Mode::DiskEquilateral => Some(3),
            Mode::DiskRectangle => Some(4),
            Mode::Sphere3fold => None,
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
            format!("unknown mode `{s}` (expected disk-isosceles, disk-equilateral, disk-rectangle or sphere-3fold)")
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Torus,
    Direct,
    Both,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "torus" => Ok(Method::Torus),
            "direct" => Ok(Method::Direct),
            "both" => Ok(Method::Both),
            other => Err(format!("unknown method `{other}` (expected torus, direct or both)")),
        }
    }
}

/// `sigma` given as a vertex permutation, or found from `p_O`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaArg {
    Explicit(Vec<usize>),
    Detect(String),
}

impl std::str::FromStr for SigmaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "detect" {
            return Ok(SigmaArg::Detect(s.into()));
        }
        parse_list(s).map(SigmaArg::Explicit)
    }
}

pub fn parse_list(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("bad index `{x}`: {e}")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Harmonic equation residual, relative.
    pub residual: f64,
    /// Symmetry residuals, times the lattice cell diameter.
    pub symmetry: f64,
    /// Tile area sum against `|det Λ|`, relative.
    pub area: f64,
    /// Tile translation and congruence RMS, times the cell diameter.
    pub tiles: f64,
    /// Relative spread of the per-copy energies.
    pub energy_spread: f64,
    /// Direct against torus solution, RMS relative to the shape diameter.
    pub crosscheck: f64,
    /// Relative edge-length deviation of the equilateral tiles.
    pub edge: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: 1e-10,
            symmetry: 1e-8,
            area: 1e-8,
            tiles: 1e-8,
            energy_spread: 1e-9,
            crosscheck: 1e-7,
            edge: 1e-7,
        }
    }
}

/// Every field optional, as read from a JSON config file or collected from flags.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub input: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub marks: Option<Vec<usize>>,
    pub weights: Option<WeightScheme>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub name: Option<String>,
    #[serde(rename = "pO")]
    pub p_o: Option<usize>,
    pub sigma: Option<SigmaArg>,
    pub seed_target: Option<usize>,
    pub aspect: Option<f64>,
    pub tolerances: Option<Tolerances>,
}

impl PartialConfig {
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those of `self`.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            input: over.input.or(self.input),
            mode: over.mode.or(self.mode),
            marks: over.marks.or(self.marks),
            weights: over.weights.or(self.weights),
            method: over.method.or(self.method),
            out: over.out.or(self.out),
            name: over.name.or(self.name),
            p_o: over.p_o.or(self.p_o),
            sigma: over.sigma.or(self.sigma),
            seed_target: over.seed_target.or(self.seed_target),
            aspect: over.aspect.or(self.aspect),
            tolerances: over.tolerances.or(self.tolerances),
        }
    }

    pub fn finish(self) -> Result<RunConfig, PipelineError> {
        let cfg = |m: &str| PipelineError::Config(m.to_string());
        let input = self.input.ok_or_else(|| cfg("--input is required"))?;
        let mode = self.mode.ok_or_else(|| cfg("--mode is required"))?;
        let method = self.method.unwrap_or(Method::Torus);
        let source = match mode.marks() {
            Some(k) => {
                let marks = self.marks.ok_or_else(|| cfg("--marks is required for disk modes"))?;
                if marks.len() != k {
                    return Err(PipelineError::Config(format!(
                        "mode {mode:?} needs {k} marks, got {}",
                        marks.len()
                    )));
                }
                if self.p_o.is_some() || self.sigma.is_some() || self.seed_target.is_some() {
                    return Err(cfg("--pO, --sigma and --seed-target only apply to sphere-3fold"));
                }
                Source::Disk { marks }
            }
            None => {
                if self.marks.is_some() {
                    return Err(cfg("sphere-3fold takes --pO/--sigma/--seed-target, not --marks"));
                }
                if method != Method::Torus {
                    return Err(cfg("sphere-3fold only supports --method torus"));
                }
                let sigma = match self.sigma.ok_or_else(|| cfg("--sigma is required for sphere-3fold"))? {
                    SigmaArg::Detect(s) if s == "detect" => None,
                    SigmaArg::Detect(s) => return Err(PipelineError::Config(format!("bad --sigma `{s}`"))),
                    SigmaArg::Explicit(v) => Some(v),
                };
                Source::Sphere {
                    p_o: self.p_o.ok_or_else(|| cfg("--pO is required for sphere-3fold"))?,
                    sigma,
                    seed_target: self.seed_target.ok_or_else(|| cfg("--seed-target is required for sphere-3fold"))?,
                }
            }
        };
        let aspect = self.aspect.unwrap_or(1.0);
        if self.aspect.is_some() && mode != Mode::DiskRectangle {
            return Err(cfg("--aspect only applies to disk-rectangle"));
        }
        if !(aspect > 0.0 && aspect.is_finite()) {
            return Err(PipelineError::Config(format!("aspect must be positive, got {aspect}")));
        }
        let name = match self.name {
            Some(n) => n,
            None => input.file_stem().and_then(|s| s.to_str()).unwrap_or("out").to_string(),
        };
        Ok(RunConfig {
            input,
            mode,
            source,
            weights: self.weights.unwrap_or(WeightScheme::Cotangent),
            method,
            out: self.out.unwrap_or_else(|| PathBuf::from(".")),
            name,
            aspect,
            tolerances: self.tolerances.unwrap_or_default(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Disk { marks: Vec<usize> },
    Sphere { p_o: usize, sigma: Option<Vec<usize>>, seed_target: usize },
}

/// A validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub mode: Mode,
    pub source: Source,
    pub weights: WeightScheme,
    pub method: Method,
    pub out: PathBuf,
    pub name: String,
    pub aspect: f64,
    pub tolerances: Tolerances,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("input: {0}")]
    Input(#[from] MeshError),
    #[error("construction: {0}")]
    Construct(#[from] ConstructError),
    #[error("torus solve: {0}")]
    Torus(#[from] TorusError),
    #[error("direct solve: {0}")]
    Direct(#[from] DirectError),
    #[error("analysis: {0}")]
    Analysis(#[from] AnalysisError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    /// 2 for unusable configuration or input, 1 for failures further down.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Input(_) | PipelineError::Construct(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub uv_path: PathBuf,
    pub svg_path: PathBuf,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.passed {
            0
        } else {
            1
        }
    }
}

enum Built {
    Disk(MarkedDisk<f64>, GluedTorus<f64>),
    Sphere(Box<SphereCutSystem<f64>>, GluedTorus<f64>),
}

impl Built {
    fn torus(&self) -> &GluedTorus<f64> {
        match self {
            Built::Disk(_, t) | Built::Sphere(_, t) => t,
        }
    }
}

fn build(cfg: &RunConfig, mesh: SurfaceMesh<f64>) -> Result<Built, PipelineError> {
    match &cfg.source {
        Source::Disk { marks } => {
            let d = MarkedDisk::new(mesh, marks.clone())?;
            let t = match cfg.mode {
                Mode::DiskIsosceles => build_torus_8(&d)?,
                Mode::DiskEquilateral => build_torus_42(&d)?,
                Mode::DiskRectangle => build_torus_4(&d, cfg.aspect)?,
                Mode::Sphere3fold => unreachable!("validated in finish"),
            };
            Ok(Built::Disk(d, t))
        }
        Source::Sphere { p_o, sigma, seed_target } => {
            let sigma = match sigma {
                Some(s) => s.clone(),
                None => detect_sigma(&mesh, *p_o)?,
            };
            let c = make_symmetric_cuts(&mesh, *p_o, &sigma, *seed_target)?;
            let t = build_torus_63(&c)?;
            Ok(Built::Sphere(Box::new(c), t))
        }
    }
}

fn shape(cfg: &RunConfig) -> TargetShape<f64> {
    match cfg.mode {
        Mode::DiskIsosceles => TargetShape::right_isosceles(),
        Mode::DiskEquilateral => TargetShape::equilateral(),
        _ => TargetShape::rectangle(cfg.aspect),
    }
}

struct Checks {
    residuals: BTreeMap<String, f64>,
    passed: BTreeMap<String, bool>,
}

impl Checks {
    fn record(&mut self, name: &str, value: f64, tol: f64) {
        self.residuals.insert(name.to_string(), value);
        self.passed.insert(name.to_string(), value <= tol);
    }
}

fn write(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

pub fn run(cfg: &RunConfig) -> Result<RunOutcome, PipelineError> {
    let tol = cfg.tolerances;
    let mesh: SurfaceMesh<f64> = load_obj(&cfg.input)?;
    info!("loaded {} ({} vertices, {} faces)", cfg.input.display(), mesh.n_vertices(), mesh.n_faces());
    let built = build(cfg, mesh)?;
    let t = built.torus();
    let base = &t.base().mesh;
    let base_w = weights_for(base, cfg.weights);
    let positivity = weight_positivity_report(&base_w);
    let positive = positivity.negative_edge_count == 0 && !base_w.has_sentinel();
    let opts = SolverOptions::for_scalar::<f64>();
    let covering = validate_covering(t);
    let mut checks = Checks { residuals: BTreeMap::new(), passed: BTreeMap::new() };
    checks.passed.insert("covering".into(), covering.passed);

    let mut energies = Vec::new();
    let mut total_energy = None;
    let mut energy_spread = None;
    let flips;
    let solver;
    let mut crosscheck = None;
    let uv: Vec<Vec2<f64>>;
    let svg: String;

    if cfg.method != Method::Direct {
        let w = t.lift_weights(&base_w);
        let (emb, _) = harmonic_embedding(t, &w, t.default_pin(), Lattice::unit_square(), &opts)?;
        info!("torus solve: {:?}, equation residual {:.3e}", emb.stats, emb.equation_residual);
        let diam = emb.lattice.cell_diameter();
        checks.record("torus_equations", emb.equation_residual, tol.residual);
        solver = Some(SolverSummary::new(&emb.stats, emb.equation_residual));

        let e = per_copy_energies(&emb, t, &w);
        checks.record("energy_spread", e.relative_spread, tol.energy_spread);
        energies = e.energies;
        total_energy = Some(e.total);
        energy_spread = Some(e.relative_spread);

        let x = check_tiling(&emb, t);
        checks.record("tile_area", x.area_relative_error, tol.area);
        checks.record("tile_translation", x.max_translation_rms / diam, tol.tiles);
        checks.record("tile_congruence", x.max_congruence_rms / diam, tol.tiles);
        checks.record("tile_overlaps", x.overlaps as f64, 0.0);
        if let Some(h) = &x.hexagon_groups {
            checks.record("hexagon_area", h.area_relative_error, tol.area);
            checks.record("hexagon_regularity", h.regularity, tol.tiles);
            checks.record("hexagon_translation", h.translation_rms / diam, tol.tiles);
            checks.record("tile_edge_deviation", h.edge_deviation, tol.edge);
        }

        match &built {
            Built::Disk(..) => {
                if t.construction() == Construction::Isosceles8 {
                    let r = check_reflections_8(&emb, t)?;
                    for c in &r.checks {
                        checks.record(&format!("reflection_{}", c.name), c.max_residual / diam, tol.symmetry);
                    }
                }
                let (mut corner, mut side) = (0.0f64, 0.0f64);
                for c in 0..t.copies() {
                    if let Some(p) = check_layout_polygon(&emb, t, c) {
                        corner = corner.max(p.max_corner_error);
                        side = side.max(p.max_side_deviation);
                    }
                }
                checks.record("layout_corners", corner / diam, tol.symmetry);
                checks.record("layout_sides", side / diam, tol.symmetry);
            }
            Built::Sphere(c, _) => {
                let r = check_rotation_63(&emb, t, c)?;
                checks.record("rotation", r.max_residual() / diam, tol.symmetry);
            }
        }

        flips = flip_count_torus(&emb, t.mesh());
        uv = emb.copy_uv(t, 0);
        svg = emit_svg(&emb, t, SvgOptions::default())?;
    } else {
        let Built::Disk(d, _) = &built else { unreachable!("validated in finish") };
        let s = solve_direct(d, &shape(cfg), &base_w, &opts)?;
        checks.record("direct_equations", s.equation_residual, tol.residual);
        solver = Some(SolverSummary::new(&s.stats, s.equation_residual));
        uv = s.uv;
        svg = emit_svg_uv(base, &uv)?;
        flips = flip_count(base, &uv);
    }

    if cfg.method == Method::Both {
        let Built::Disk(d, _) = &built else { unreachable!("validated in finish") };
        let (c, direct) = crosscheck_against_torus(d, &shape(cfg), &base_w, &opts)?;
        checks.record("direct_equations", direct.equation_residual, tol.residual);
        let direct_flips = flip_count(base, &direct.uv);
        if positive {
            checks.passed.insert("direct_flips".into(), direct_flips == 0);
        }
        checks.record("crosscheck", c.relative_rms, tol.crosscheck);
        info!("crosscheck relative RMS {:.3e}", c.relative_rms);
        crosscheck = Some(c);
    }

    if positive {
        checks.passed.insert("flips".into(), flips == 0);
    }
    // copy 0 keeps the disk orientation, so its conformal energy must not go negative
    let conformal = conformal_energy(base, &base_w, &uv).unwrap_or(f64::NAN);
    checks.residuals.insert("conformal_energy".into(), conformal);
    if positive && cfg.weights == WeightScheme::Cotangent {
        let scale: f64 = energies.iter().sum::<f64>().max(1.0);
        checks.passed.insert("conformal_nonnegative".into(), conformal >= -1e-12 * scale);
    }

    let passed = checks.passed.values().all(|&p| p);
    let report = Report {
        construction: t.construction(),
        k: t.copies(),
        weights: match cfg.weights {
            WeightScheme::Cotangent => "cotan".into(),
            WeightScheme::Uniform => "uniform".into(),
        },
        method: serde_json::to_value(cfg.method).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
        energies,
        total_energy,
        energy_spread,
        residuals: checks.residuals,
        flips,
        negative_weights: positivity.negative_edge_count,
        branch_table: covering.branch_table,
        solver,
        crosscheck,
        checks: checks.passed,
        passed,
    };

    fs::create_dir_all(&cfg.out).map_err(|source| PipelineError::Io { path: cfg.out.clone(), source })?;
    let uv_path = cfg.out.join(format!("{}.uv.obj", cfg.name));
    let svg_path = cfg.out.join(format!("{}.svg", cfg.name));
    let report_path = cfg.out.join(format!("{}.report.json", cfg.name));
    save_obj_with_uv(base, &uv, &uv_path)?;
    write(&svg_path, svg.as_bytes())?;
    write(&report_path, emit_report(&report)?.as_bytes())?;
    info!("wrote {}, {}, {}", uv_path.display(), svg_path.display(), report_path.display());
    Ok(RunOutcome { report, uv_path, svg_path, report_path })
}
