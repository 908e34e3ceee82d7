use std::fs;
use std::path::Path;
use std::process::Command;

use ctrecon::{relative_error, shepp_logan, Image, ProjectionGeometry};
use ctrecon_cli::pipeline::{cmd_reconstruct, cmd_sweep, matrix_image, SWEEP_HEADER};
use ctrecon_cli::{ExperimentConfig, Matrix, Method};

fn ctrecon(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ctrecon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_config(dir: &Path, methods: &[Method]) -> ExperimentConfig {
    ExperimentConfig {
        phantom_size: 32,
        n_angles: 12,
        methods: methods.to_vec(),
        max_iters: 40,
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::fig3()
    }
}

#[test]
fn phantom_command_writes_matrix_and_preview() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.ctmat");
    let res = ctrecon(&["phantom", "--size", "64", "--out", p(&out)]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );

    let bytes = fs::read(&out).unwrap();
    assert_eq!(bytes.len(), "CTMAT 1 64 64\n".len() + 64 * 64 * 8);
    let m = Matrix::read(&out).unwrap();
    let expected = shepp_logan(64).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&m.data), bits(expected.as_slice()));

    let pgm = fs::read(dir.path().join("x.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5"));
}

#[test]
fn zero_image_preview_is_black() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z.pgm");
    let m = Matrix::new(5, 7, vec![0.0; 35]).unwrap();
    ctrecon_cli::preview::write_preview(&m, &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    assert!(bytes.ends_with(&[0u8; 35]));
    assert!(bytes.starts_with(b"P5"));
}

#[test]
fn single_step_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("x.ctmat");
    let sino = dir.path().join("s.ctmat");
    let rec = dir.path().join("fbp.ctmat");
    let mask = dir.path().join("m.ctmat");
    assert!(ctrecon(&["phantom", "--size", "32", "--out", p(&img)])
        .status
        .success());
    assert!(ctrecon(&[
        "project",
        "--image",
        p(&img),
        "--angles",
        "30",
        "--out",
        p(&sino)
    ])
    .status
    .success());
    let s = Matrix::read(&sino).unwrap();
    assert_eq!(
        (s.rows, s.cols),
        (30, ProjectionGeometry::new(32, 30).unwrap().n_detectors())
    );

    assert!(ctrecon(&[
        "fbp",
        "--sinogram",
        p(&sino),
        "--size",
        "32",
        "--out",
        p(&rec)
    ])
    .status
    .success());
    let res = ctrecon(&[
        "mask",
        "--image",
        p(&rec),
        "--tau",
        "0.3",
        "--out",
        p(&mask),
    ]);
    assert!(res.status.success());
    assert!(String::from_utf8_lossy(&res.stdout).starts_with("mask_zero_count="));
    let m = Matrix::read(&mask).unwrap();
    assert_eq!((m.rows, m.cols), (64, 32));

    let res = ctrecon(&["metrics", "--image", p(&rec), "--reference", p(&img)]);
    assert!(res.status.success());
    let printed: f64 = String::from_utf8_lossy(&res.stdout)
        .trim()
        .strip_prefix("relative_error=")
        .unwrap()
        .parse()
        .unwrap();
    let expected = relative_error(
        &matrix_image(&Matrix::read(&rec).unwrap()).unwrap(),
        &matrix_image(&Matrix::read(&img).unwrap()).unwrap(),
    )
    .unwrap();
    assert_eq!(printed, expected);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ctrecon(&["--help"]).status.code(), Some(0));
    assert_eq!(ctrecon(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        ctrecon(&["phantom", "--size", "4", "--out", "/tmp/never.ctmat"])
            .status
            .code(),
        Some(1)
    );

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "tau = -1\nmethods = \n").unwrap();
    let res = ctrecon(&["reconstruct", "--config", p(&cfg)]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("tau") && err.contains("methods"), "{err}");

    let missing = dir.path().join("missing.cfg");
    assert_eq!(
        ctrecon(&["reconstruct", "--config", p(&missing)])
            .status
            .code(),
        Some(3)
    );
    let unwritable = dir.path().join("no/such/dir/x.ctmat");
    assert_eq!(
        ctrecon(&["phantom", "--size", "16", "--out", p(&unwritable)])
            .status
            .code(),
        Some(3)
    );

    let ok = dir.path().join("ok.cfg");
    fs::write(&ok, "phantom_size = 16\nn_angles = 4\nmethods = fbp\n").unwrap();
    let res = ctrecon(&[
        "sweep",
        "--config",
        p(&ok),
        "--parameter",
        "tau",
        "--values",
    ]);
    assert_eq!(res.status.code(), Some(1));
    let res = ctrecon(&[
        "sweep",
        "--config",
        p(&ok),
        "--parameter",
        "mu",
        "--values",
        "1",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn reconstruct_reports_match_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), &[Method::Fbp, Method::MaskedL2, Method::TvSb]);
    let exp = cmd_reconstruct(&cfg).unwrap();

    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next(),
        Some("method,relative_error,wall_time_seconds,iterations,objective_value")
    );
    let phantom = matrix_image(&Matrix::read(&dir.path().join("phantom.ctmat")).unwrap()).unwrap();
    for (line, row) in lines.zip(&exp.rows) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], row.method.name());
        let written =
            matrix_image(&Matrix::read(&dir.path().join(format!("{}.ctmat", fields[0]))).unwrap())
                .unwrap();
        let recomputed = relative_error(&written, &phantom).unwrap();
        assert_eq!(fields[1].parse::<f64>().unwrap(), recomputed);
    }
    assert!(dir.path().join("mask.ctmat").exists());
    assert!(dir.path().join("sinogram.ctmat").exists());
}

#[test]
fn zero_sinogram_gives_zero_fbp() {
    let dir = tempfile::tempdir().unwrap();
    let g = ProjectionGeometry::new(32, 12).unwrap();
    let zero = Matrix::new(12, g.n_detectors(), vec![0.0; g.data_len()]).unwrap();
    let sino = dir.path().join("zero.ctmat");
    zero.write(&sino).unwrap();
    let mut cfg = small_config(&dir.path().join("out"), &[Method::Fbp]);
    cfg.sinogram_path = Some(sino);
    let exp = cmd_reconstruct(&cfg).unwrap();
    assert_eq!(exp.images[0].1, Image::zeros(32));
    assert_eq!(exp.rows[0].relative_error, 1.0);
}

#[test]
fn sweep_over_views_lowers_fbp_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        methods: vec![Method::Fbp],
        output_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::fig3()
    };
    let values: Vec<String> = ["15", "45", "90", "180"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = cmd_sweep(&cfg, "n_angles", &values).unwrap();
    assert_eq!(rows.len(), 4);
    for (r, v) in rows.iter().zip(&values) {
        assert_eq!(&r.value, v);
    }
    for w in rows.windows(2) {
        assert!(w[1].row.relative_error < w[0].row.relative_error);
    }
    let csv = fs::read_to_string(dir.path().join("report_sweep.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(SWEEP_HEADER));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn sweep_over_tau_shrinks_mask_zero_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path(), &[Method::Fbp]);
    let values: Vec<String> = ["0.1", "0.3", "0.6"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = cmd_sweep(&cfg, "tau", &values).unwrap();
    assert_eq!(rows.len(), 3);
    for w in rows.windows(2) {
        assert!(w[1].mask_zero_count <= w[0].mask_zero_count);
    }
}

#[test]
fn sweep_rejects_bad_requests() {
    let cfg = small_config(Path::new("/tmp/unused"), &[Method::Fbp]);
    assert!(cmd_sweep(&cfg, "tau", &[]).is_err());
    assert!(cmd_sweep(&cfg, "mu", &["1".to_string()]).is_err());
    assert!(cmd_sweep(&cfg, "tau", &["-1".to_string()]).is_err());
    assert!(cmd_sweep(&cfg, "n_angles", &["2.5".to_string()]).is_err());
}

#[test]
fn repeated_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut cfg = small_config(a.path(), &[Method::Fbp, Method::MaskedL2, Method::TvSb]);
    cfg.noise.sigma = 0.05;
    cfg.noise.seed = 9;
    cmd_reconstruct(&cfg).unwrap();
    cfg.output_dir = b.path().to_path_buf();
    cmd_reconstruct(&cfg).unwrap();
    for name in ["phantom", "sinogram", "mask", "fbp", "masked_l2", "tv_sb"] {
        let file = format!("{name}.ctmat");
        assert_eq!(
            fs::read(a.path().join(&file)).unwrap(),
            fs::read(b.path().join(&file)).unwrap(),
            "{file}"
        );
    }
}
