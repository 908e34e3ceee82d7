//! Experiment pipelines behind the `reconstruct` and `sweep` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ctrecon::{
    add_noise, build_mask, fbp_reconstruct, forward, relative_error, shepp_logan, solve_exact_mask,
    solve_masked_l2, solve_tv_split_bregman, true_mask, tv_apply, EdgeMask, FilterSpec, Image,
    MaskedL2Config, ProjectionGeometry, Sinogram, SplitBregmanConfig,
};
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Method, SWEEP_PARAMETERS};
use crate::error::{CliError, CliResult};
use crate::matrix_file::Matrix;
use crate::preview::write_preview;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub method: Method,
    pub relative_error: f64,
    pub wall_time_seconds: f64,
    pub iterations: usize,
    pub objective_value: f64,
}

pub const REPORT_HEADER: &str =
    "method,relative_error,wall_time_seconds,iterations,objective_value";
pub const SWEEP_HEADER: &str = "parameter,value,method,relative_error,wall_time_seconds,iterations,objective_value,mask_zero_count";

impl ReportRow {
    fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.method,
            self.relative_error,
            self.wall_time_seconds,
            self.iterations,
            self.objective_value
        )
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub phantom: Image,
    pub sinogram: Sinogram,
    /// Mask built from the FBP image at threshold τ.
    pub mask: EdgeMask,
    /// Ground-truth mask, present when `exact_mask` ran.
    pub true_mask: Option<EdgeMask>,
    pub images: Vec<(Method, Image)>,
    pub rows: Vec<ReportRow>,
}

pub fn image_matrix(img: &Image) -> Matrix {
    Matrix {
        rows: img.size(),
        cols: img.size(),
        data: img.as_slice().to_vec(),
    }
}

pub fn sinogram_matrix(s: &Sinogram) -> Matrix {
    let g = s.geometry();
    Matrix {
        rows: g.n_angles(),
        cols: g.n_detectors(),
        data: s.as_slice().to_vec(),
    }
}

/// Masks are stored as a `2N × N` matrix of 0/1: horizontal differences in the
/// first N rows, vertical in the last N.
pub fn mask_matrix(m: &EdgeMask) -> Matrix {
    let n = m.size_n();
    Matrix {
        rows: 2 * n,
        cols: n,
        data: m
            .bits()
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    }
}

pub fn matrix_image(m: &Matrix) -> CliResult<Image> {
    if m.rows != m.cols {
        return Err(CliError::Invalid(format!(
            "image matrix must be square, got {}x{}",
            m.rows, m.cols
        )));
    }
    Ok(Image::from_vec(m.rows, m.data.clone())?)
}

pub fn matrix_sinogram(m: &Matrix, size_n: usize) -> CliResult<(ProjectionGeometry, Sinogram)> {
    let geom = ProjectionGeometry::new(size_n, m.rows)?;
    if geom.n_detectors() != m.cols {
        return Err(CliError::Invalid(format!(
            "sinogram has {} detectors but a {size_n}x{size_n} image needs {}",
            m.cols,
            geom.n_detectors()
        )));
    }
    let s = Sinogram::from_vec(&geom, m.data.clone())?;
    Ok((geom, s))
}

/// Runs every configured method on one problem. Methods run one after the
/// other so their wall times are comparable.
pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<Experiment> {
    let problems = cfg.problems();
    if !problems.is_empty() {
        return Err(CliError::Config(problems));
    }
    let n = cfg.phantom_size;
    let phantom = shepp_logan(n)?;
    let (geom, clean) = match &cfg.sinogram_path {
        Some(path) => {
            let (g, s) = matrix_sinogram(&Matrix::read(path)?, n)?;
            if g.n_angles() != cfg.n_angles {
                return Err(CliError::Config(vec![format!(
                    "n_angles: config says {} but {} has {} rows",
                    cfg.n_angles,
                    path.display(),
                    g.n_angles()
                )]));
            }
            (g, s)
        }
        None => {
            let g = ProjectionGeometry::new(n, cfg.n_angles)?;
            let s = forward(&phantom, &g)?;
            (g, s)
        }
    };
    let sinogram = add_noise(&clean, &cfg.noise)?;

    let start = Instant::now();
    let fbp = fbp_reconstruct(&sinogram, &geom, &FilterSpec::default())?;
    let fbp_time = start.elapsed().as_secs_f64();
    let mask = build_mask(&tv_apply(&fbp), cfg.tau)?;

    let mut images = Vec::new();
    let mut rows = Vec::new();
    let mut exact = None;
    for &method in &cfg.methods {
        let (img, wall, iters, objective) = match method {
            Method::Fbp => {
                let misfit = data_misfit(&fbp, &sinogram, &geom)?;
                (fbp.clone(), fbp_time, 0, misfit)
            }
            Method::MaskedL2 => {
                let mcfg = MaskedL2Config {
                    lambda: cfg.lambda_masked,
                    max_iters: cfg.max_iters,
                    rel_tolerance: cfg.rel_tolerance,
                    initial_guess: cfg.initial_guess,
                };
                let (u, r) = solve_masked_l2(&sinogram, &geom, &mask, &mcfg)?;
                (u, r.wall_time_seconds, r.iterations_used, r.objective_value)
            }
            Method::TvSb => {
                let scfg = SplitBregmanConfig {
                    lambda: cfg.lambda_tv,
                    mu: cfg.sb_mu,
                    outer_iters: cfg.sb_outer_iters,
                    inner_cg_iters: cfg.inner_cg_iters(),
                };
                let (u, r) = solve_tv_split_bregman(&sinogram, &geom, &scfg)?;
                (u, r.wall_time_seconds, r.iterations_used, r.objective_value)
            }
            Method::ExactMask => {
                let tm = true_mask(&phantom);
                let mcfg = MaskedL2Config {
                    max_iters: cfg.max_iters,
                    rel_tolerance: cfg.rel_tolerance,
                    initial_guess: cfg.initial_guess,
                    ..Default::default()
                };
                let (u, r) = solve_exact_mask(&sinogram, &geom, &tm, cfg.lambda_large, &mcfg)?;
                exact = Some(tm);
                (u, r.wall_time_seconds, r.iterations_used, r.objective_value)
            }
        };
        rows.push(ReportRow {
            method,
            relative_error: relative_error(&img, &phantom)?,
            wall_time_seconds: wall,
            iterations: iters,
            objective_value: objective,
        });
        images.push((method, img));
    }

    Ok(Experiment {
        phantom,
        sinogram,
        mask,
        true_mask: exact,
        images,
        rows,
    })
}

fn data_misfit(u: &Image, s: &Sinogram, geom: &ProjectionGeometry) -> CliResult<f64> {
    let ru = forward(u, geom)?;
    Ok(ru
        .as_slice()
        .iter()
        .zip(s.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_with_preview(m: &Matrix, dir: &Path, stem: &str) -> CliResult<()> {
    m.write(&dir.join(format!("{stem}.ctmat")))?;
    write_preview(m, &dir.join(format!("{stem}.pgm")))
}

/// Writes the experiment's matrices, previews and `report.csv` into `dir`.
pub fn write_experiment(exp: &Experiment, dir: &Path) -> CliResult<()> {
    create_dir(dir)?;
    write_with_preview(&image_matrix(&exp.phantom), dir, "phantom")?;
    sinogram_matrix(&exp.sinogram).write(&dir.join("sinogram.ctmat"))?;
    write_with_preview(&mask_matrix(&exp.mask), dir, "mask")?;
    if let Some(tm) = &exp.true_mask {
        write_with_preview(&mask_matrix(tm), dir, "true_mask")?;
    }
    for (method, img) in &exp.images {
        write_with_preview(&image_matrix(img), dir, method.name())?;
    }
    let mut csv = String::from(REPORT_HEADER);
    csv.push('\n');
    for row in &exp.rows {
        csv.push_str(&row.csv_fields());
        csv.push('\n');
    }
    let path = dir.join("report.csv");
    fs::write(&path, csv).map_err(|e| CliError::io(&path, e))
}

pub fn cmd_reconstruct(cfg: &ExperimentConfig) -> CliResult<Experiment> {
    let exp = run_experiment(cfg)?;
    write_experiment(&exp, &cfg.output_dir)?;
    Ok(exp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: String,
    pub mask_zero_count: usize,
    pub row: ReportRow,
}

/// Runs one experiment per value of `parameter`. Points may run
/// concurrently; rows come back in the order of `values`. Each point's files
/// go to `<output_dir>/<parameter>_<index>`, and the combined table to
/// `<output_dir>/report_sweep.csv`.
pub fn cmd_sweep(
    base: &ExperimentConfig,
    parameter: &str,
    values: &[String],
) -> CliResult<Vec<SweepRow>> {
    if !SWEEP_PARAMETERS.contains(&parameter) {
        return Err(CliError::Invalid(format!(
            "unknown sweep parameter `{parameter}` (expected one of {})",
            SWEEP_PARAMETERS.join(", ")
        )));
    }
    if values.is_empty() {
        return Err(CliError::Invalid("sweep needs at least one value".into()));
    }
    let mut configs = Vec::with_capacity(values.len());
    let mut errors = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let mut cfg = base.clone();
        cfg.output_dir = base.output_dir.join(format!("{parameter}_{i}"));
        match cfg.set(parameter, v) {
            Ok(()) => errors.extend(cfg.problems()),
            Err(e) => errors.push(e),
        }
        configs.push(cfg);
    }
    if !errors.is_empty() {
        return Err(CliError::Config(errors));
    }

    let points: Vec<Experiment> = configs
        .par_iter()
        .map(|cfg| {
            let exp = run_experiment(cfg)?;
            write_experiment(&exp, &cfg.output_dir)?;
            Ok(exp)
        })
        .collect::<CliResult<_>>()?;

    let mut rows = Vec::new();
    for (value, exp) in values.iter().zip(&points) {
        for row in &exp.rows {
            rows.push(SweepRow {
                parameter: parameter.to_string(),
                value: value.clone(),
                mask_zero_count: exp.mask.zero_count(),
                row: row.clone(),
            });
        }
    }
    create_dir(&base.output_dir)?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.parameter,
            r.value,
            r.row.csv_fields(),
            r.mask_zero_count
        ));
    }
    let path = base.output_dir.join("report_sweep.csv");
    fs::write(&path, csv).map_err(|e| CliError::io(&path, e))?;
    Ok(rows)
}

/// Writes the `size`×`size` phantom to `out` and a preview next to it.
pub fn cmd_phantom(size: usize, out: &Path) -> CliResult<()> {
    let m = image_matrix(&shepp_logan(size)?);
    m.write(out)?;
    write_preview(&m, &preview_path(out))
}

pub fn cmd_project(
    image: &Path,
    n_angles: usize,
    noise: &ctrecon::NoiseSpec,
    out: &Path,
) -> CliResult<()> {
    let img = matrix_image(&Matrix::read(image)?)?;
    let geom = ProjectionGeometry::new(img.size(), n_angles)?;
    let s = add_noise(&forward(&img, &geom)?, noise)?;
    sinogram_matrix(&s).write(out)
}

pub fn cmd_fbp(sinogram: &Path, size: usize, out: &Path) -> CliResult<()> {
    let (geom, s) = matrix_sinogram(&Matrix::read(sinogram)?, size)?;
    let m = image_matrix(&fbp_reconstruct(&s, &geom, &FilterSpec::default())?);
    m.write(out)?;
    write_preview(&m, &preview_path(out))
}

/// Mask of `image` at threshold `tau`; returns its zero count.
pub fn cmd_mask(image: &Path, tau: f64, out: &Path) -> CliResult<usize> {
    let img = matrix_image(&Matrix::read(image)?)?;
    let mask = build_mask(&tv_apply(&img), tau)?;
    let m = mask_matrix(&mask);
    m.write(out)?;
    write_preview(&m, &preview_path(out))?;
    Ok(mask.zero_count())
}

pub fn cmd_metrics(image: &Path, reference: &Path) -> CliResult<f64> {
    let u = matrix_image(&Matrix::read(image)?)?;
    let x = matrix_image(&Matrix::read(reference)?)?;
    Ok(relative_error(&u, &x)?)
}

pub fn preview_path(out: &Path) -> PathBuf {
    out.with_extension("pgm")
}
