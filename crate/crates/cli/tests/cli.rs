//! End-to-end tests of the command line binary: exit codes, CSV contracts,
//! and run determinism.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lamecouple"))
}

fn tmp(tag: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(tag);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_conf(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("run.conf");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn missing_arguments_exit_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tmp("bad_config");
    let conf = write_conf(&dir, "experiment = interpretive-dance\n");
    let out = bin().arg(&conf).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let conf2 = write_conf(&dir, "experiment = solve\nunknown.key = 1\n");
    let out2 = bin().arg(&conf2).output().unwrap();
    assert_eq!(out2.status.code(), Some(2));
}

#[test]
fn rbm_check_exits_0_and_writes_verify_csv() {
    let dir = tmp("rbm_cli");
    let conf = write_conf(&dir, "experiment = rbm-check\nlevels = 2\n");
    let out = bin().arg(&conf).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("verify.csv")).unwrap();
    assert!(csv.starts_with("check,pass,certificates\n"));
    assert!(csv.contains("rbm_independence_2d,true,sigma_min="));
}

#[test]
fn centroid_check_on_shipped_mesh_file() {
    let dir = tmp("centroid_cli");
    let asset = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/tetrahedron.mesh3d");
    let conf = write_conf(
        &dir,
        &format!("experiment = centroid-check\nsurface = {}\n", asset.display()),
    );
    let out = bin().arg(&conf).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("verify.csv")).unwrap();
    assert!(csv.contains("noncollinear_centroids,true"));
}

#[test]
fn converge_writes_results_with_contract_columns() {
    let dir = tmp("converge_cli");
    let conf = write_conf(
        &dir,
        "experiment = converge\nlevels = 3\nproblem = smooth-biharmonic-free\nsolver.method = direct\n",
    );
    let out = bin().arg(&conf).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,h,dofs,err_eps,err_phi,rate_eps,rate_phi,iters"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    // errors strictly decrease for the smooth problem
    let err_of = |row: &str| -> f64 { row.split(',').nth(3).unwrap().parse().unwrap() };
    assert!(err_of(rows[1]) < err_of(rows[0]));
    assert!(err_of(rows[2]) < err_of(rows[1]));
}

#[test]
fn identical_runs_are_byte_identical() {
    let mut outputs = Vec::new();
    for tag in ["det_run_a", "det_run_b"] {
        let dir = tmp(tag);
        let conf = write_conf(
            &dir,
            "experiment = converge\nlevels = 2\nproblem = kelvin-exterior\nsolver.method = direct\n",
        );
        let out = bin().arg(&conf).arg("--out").arg(&dir).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(dir.join("results.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn hencky_picard_solve_from_config() {
    let dir = tmp("hencky_cli");
    let conf = write_conf(
        &dir,
        "experiment = solve\nlevels = 3\nproblem = rotational-force\n\
         material.kind = hencky\nmaterial.K = 5\nmaterial.mu_tilde = invshift(2, 1)\n\
         material.alpha = 2\nmaterial.beta = 2\n\
         coupling.stabilize = true\nsolver.method = picard\n",
    );
    let out = bin().arg(&conf).arg("--out").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("solved"), "stdout: {stdout}");
}

#[test]
fn dump_matrices_flag_writes_dense_csv() {
    let dir = tmp("dump_cli");
    let conf = write_conf(
        &dir,
        "experiment = solve\nlevels = 2\nproblem = linear-patch\nsolver.method = direct\n",
    );
    let out = bin()
        .arg(&conf)
        .arg("--out")
        .arg(&dir)
        .arg("--dump-matrices")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v = std::fs::read_to_string(dir.join("matrix_v.csv")).unwrap();
    let first_row_cols = v.lines().next().unwrap().split(',').count();
    assert!(first_row_cols >= 16, "V should be at least 16 columns wide");
}
