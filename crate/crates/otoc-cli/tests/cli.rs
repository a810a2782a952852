//! End-to-end tests of the `otoc` binary: every subcommand is driven
//! through a real process with a JSON config, and the artifacts are read
//! back the way a user would read them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn run_subcommand(sub: &str, config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otoc"))
        .arg(sub)
        .arg("--config")
        .arg(config)
        .output()
        .expect("the binary launches")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(value).expect("serializes"))
        .expect("config written");
    path
}

fn expect_success(sub: &str, config: &Path) {
    let out = run_subcommand(sub, config);
    assert!(
        out.status.success(),
        "{sub} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn data_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).expect("artifact readable");
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|f| f.trim().parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect()
}

fn header_value(path: &Path, key: &str) -> String {
    let text = fs::read_to_string(path).expect("artifact readable");
    let prefix = format!("# {key}: ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key:?} header line in {}", path.display()))
        .to_string()
}

fn shipped_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/synthetic_xs_form.csv")
}

fn small_chain_physics() -> Value {
    json!({
        "model": {"model": "mixed_field_ising", "J": 1.0, "hx": 1.05, "hz": 0.5,
                  "normalize_E0": true, "L": 9},
        "chi": 64, "dt": 0.002, "t_max": 3.0, "record_stride": 50,
        "base_site": 5, "probe_sites": [6, 7, 8, 9]
    })
}

/// The tensor-network evolution and exact diagonalization must agree on
/// every cell of the grid artifact — times, separations, commutators, and
/// norms — to 1e-6, and stamp the same physics digest despite writing to
/// different paths under different subcommands.
#[test]
fn otoc_matches_exact_diagonalization_on_a_small_chain() {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut mpo_cfg = small_chain_physics();
    mpo_cfg["output"] = json!(dir.path().join("mpo.csv"));
    let mut ed_cfg = small_chain_physics();
    ed_cfg["output"] = json!(dir.path().join("ed.csv"));

    expect_success("otoc", &write_config(dir.path(), "mpo.json", &mpo_cfg));
    expect_success("oracle-ed", &write_config(dir.path(), "ed.json", &ed_cfg));

    let mpo = data_rows(&dir.path().join("mpo.csv"));
    let ed = data_rows(&dir.path().join("ed.csv"));
    // 1500 steps at stride 50 plus the initial sample: 31 times, 4 probes.
    assert_eq!(mpo.len(), 31 * 4, "unexpected row count");
    assert_eq!(mpo.len(), ed.len());
    for (a, b) in mpo.iter().zip(&ed) {
        assert_eq!(a[0], b[0], "time grids diverge");
        assert_eq!(a[1], b[1], "separation grids diverge");
        assert!((a[2] - b[2]).abs() <= 1e-6, "C mismatch at t={}: {} vs {}", a[0], a[2], b[2]);
        assert!((a[3] - b[3]).abs() <= 1e-6, "norm drift at t={}: {}", a[0], a[3]);
    }

    let mpo_hash = header_value(&dir.path().join("mpo.csv"), "config_sha256");
    let ed_hash = header_value(&dir.path().join("ed.csv"), "config_sha256");
    assert_eq!(mpo_hash, ed_hash, "same physics must hash identically");
}

/// A zero horizon records exactly the initial sample: one row per probe,
/// all at t = 0 with C = 0 and unit norm.
#[test]
fn evolve_with_zero_horizon_emits_one_zero_row_per_probe() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("zero.csv");
    let cfg = json!({
        "model": {"model": "mixed_field_ising", "J": 1.0, "hx": 1.05, "hz": 0.5,
                  "normalize_E0": true, "L": 9},
        "chi": 16, "dt": 0.05, "t_max": 0.0,
        "base_site": 5, "probe_sites": [6, 7, 8], "output": out,
    });
    expect_success("evolve", &write_config(dir.path(), "zero.json", &cfg));
    let rows = data_rows(&out);
    assert_eq!(rows.len(), 3);
    for (row, x) in rows.iter().zip([1.0, 2.0, 3.0]) {
        assert_eq!(row.as_slice(), [0.0, x, 0.0, 1.0]);
    }
}

/// The shipped synthetic front must be recovered to 1e-6 in every
/// parameter with the stock window and starting point.
#[test]
fn the_shipped_synthetic_front_is_recovered_to_1e6() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("fit.json");
    let cfg = json!({ "data": shipped_data(), "output": out });
    expect_success("fit", &write_config(dir.path(), "fit.json", &cfg));

    let report: Value =
        serde_json::from_str(&fs::read_to_string(&out).expect("report readable"))
            .expect("report parses");
    assert_eq!(report["model"], "xs_form");
    assert_eq!(report["converged"], true);
    let truth = [("lambda", 3.8), ("p", 0.67), ("v_B", 0.67), ("x0", 1.8)];
    for (key, expected) in truth {
        let got = report[key].as_f64().unwrap_or_else(|| panic!("{key} missing"));
        assert!(
            (got - expected).abs() <= 1e-6,
            "{key}: {got} vs {expected}"
        );
    }
    assert!(report["meta"]["seed"].is_u64(), "the seed must be recorded");
    assert!(report["window"]["c_min"].is_f64(), "the window must be echoed");
}

/// `collapse` must place every windowed point on the master curve of its
/// own fit: log C = -lambda u^(1+p) with u > 0.
#[test]
fn collapse_rescales_onto_a_single_master_curve() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("collapse.csv");
    let fit_out = dir.path().join("fit.json");
    let cfg = json!({ "data": shipped_data(), "output": out, "fit_output": fit_out });
    expect_success("collapse", &write_config(dir.path(), "collapse.json", &cfg));

    let report: Value =
        serde_json::from_str(&fs::read_to_string(&fit_out).expect("report readable"))
            .expect("report parses");
    let lambda = report["lambda"].as_f64().expect("lambda");
    let p = report["p"].as_f64().expect("p");
    let rows = data_rows(&out);
    assert!(!rows.is_empty());
    for row in &rows {
        let (u, log_c) = (row[2], row[3]);
        assert!(u > 0.0, "window points sit ahead of the front");
        let on_curve = -lambda * u.powf(1.0 + p);
        assert!(
            (log_c - on_curve).abs() <= 1e-9,
            "off the master curve: u={u}, log_C={log_c}, curve={on_curve}"
        );
    }
}

/// Typos anywhere in a config are validation failures, exit code 2.
#[test]
fn unknown_config_keys_fail_with_the_validation_code() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("typo.json");
    fs::write(&path, r#"{"chii": 4}"#).expect("config written");
    let out = run_subcommand("otoc", &path);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("chii"), "stderr must name the bad key: {stderr}");
}

/// A config pinned to one subcommand refuses to drive another.
#[test]
fn command_pins_are_enforced() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = json!({ "command": "otoc", "data": shipped_data(), "output": dir.path().join("o.json") });
    let path = write_config(dir.path(), "pinned.json", &cfg);
    let out = run_subcommand("fit", &path);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pinned"));
}

/// An output path that cannot be created is a compute failure (the run
/// itself was valid), exit code 3.
#[test]
fn unwritable_output_paths_fail_with_the_compute_code() {
    let dir = tempfile::tempdir().expect("tempdir");
    let cfg = json!({
        "g": 1.0, "dt": 0.5, "t_max": 1.0, "base_site": 1, "probe_sites": [3],
        "output": "/nonexistent-directory-zz/out.csv",
    });
    let path = write_config(dir.path(), "unwritable.json", &cfg);
    let out = run_subcommand("oracle-free", &path);
    assert_eq!(
        out.status.code(),
        Some(3),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

/// Splitting a run at a checkpoint must reproduce the uninterrupted run's
/// final observables to 1e-12, and a checkpoint must refuse to resume
/// under different physics.
#[test]
fn checkpoint_resume_reproduces_the_uninterrupted_run() {
    let dir = tempfile::tempdir().expect("tempdir");
    let model = json!({"model": "mixed_field_ising", "J": 1.0, "hx": 1.05, "hz": 0.5,
                       "normalize_E0": true, "L": 7});
    let full_out = dir.path().join("full.csv");
    let full = json!({
        "model": model, "chi": 32, "dt": 0.05, "t_max": 2.0, "record_stride": 8,
        "base_site": 4, "probe_sites": [5, 6, 7], "output": full_out,
    });
    expect_success("evolve", &write_config(dir.path(), "full.json", &full));

    let checkpoint = dir.path().join("state.mpo");
    let first = json!({
        "model": model, "chi": 32, "dt": 0.05, "t_max": 1.0,
        "base_site": 4, "checkpoint_out": checkpoint,
    });
    expect_success("evolve", &write_config(dir.path(), "first.json", &first));
    assert!(checkpoint.exists());
    assert!(dir.path().join("state.mpo.json").exists(), "sidecar missing");

    let resumed_out = dir.path().join("resumed.csv");
    let second = json!({
        "model": model, "chi": 32, "dt": 0.05, "t_max": 2.0, "record_stride": 8,
        "base_site": 4, "probe_sites": [5, 6, 7], "output": resumed_out,
        "resume_from": checkpoint,
    });
    expect_success("evolve", &write_config(dir.path(), "second.json", &second));

    let full_rows = data_rows(&full_out);
    let resumed_rows = data_rows(&resumed_out);
    let final_t = full_rows.last().expect("rows")[0];
    assert_eq!(final_t, 2.0);
    let mut compared = 0;
    for resumed in resumed_rows
        .iter()
        .filter(|r| r[0] == final_t)
    {
        let full_row = full_rows
            .iter()
            .find(|r| r[0] == final_t && r[1] == resumed[1])
            .expect("matching final row");
        assert!(
            (resumed[2] - full_row[2]).abs() <= 1e-12,
            "C diverged after the split: {} vs {}",
            resumed[2],
            full_row[2]
        );
        assert!((resumed[3] - full_row[3]).abs() <= 1e-12, "norm diverged");
        compared += 1;
    }
    assert_eq!(compared, 3, "every probe must appear at the final time");

    // Same checkpoint, different bond cap: a different trajectory.
    let mismatched = json!({
        "model": model, "chi": 48, "dt": 0.05, "t_max": 2.0,
        "base_site": 4, "probe_sites": [5, 6, 7],
        "output": dir.path().join("mismatched.csv"),
        "resume_from": checkpoint,
    });
    let out = run_subcommand(
        "evolve",
        &write_config(dir.path(), "mismatched.json", &mismatched),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different trajectory"));
}

/// Re-reading an artifact and re-printing every cell with the same format
/// must reproduce the data section byte for byte.
#[test]
fn csv_cells_round_trip_bit_exactly() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = dir.path().join("tiny.csv");
    let cfg = json!({
        "model": {"model": "heisenberg_xxx", "J": 1.0, "normalize_E0": true, "L": 5},
        "chi": 8, "dt": 0.05, "t_max": 0.5, "record_stride": 2,
        "base_site": 3, "probe_sites": [4, 5], "output": out,
    });
    expect_success("otoc", &write_config(dir.path(), "tiny.json", &cfg));

    let text = fs::read_to_string(&out).expect("artifact readable");
    let original: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert!(!original.is_empty());
    for line in original {
        let reprinted: Vec<String> = line
            .split(',')
            .map(|f| format!("{:.16e}", f.parse::<f64>().expect("numeric cell")))
            .collect();
        assert_eq!(line, reprinted.join(","), "a cell lost precision");
    }
}

/// The stamped digest ignores where artifacts go but tracks the physics.
#[test]
fn the_config_digest_tracks_physics_not_paths() {
    let dir = tempfile::tempdir().expect("tempdir");
    let grid = |g: f64, name: &str| {
        let out = dir.path().join(name);
        let cfg = json!({
            "g": g, "dt": 0.5, "t_max": 1.0, "base_site": 1, "probe_sites": [2, 3],
            "output": out,
        });
        expect_success(
            "oracle-free",
            &write_config(dir.path(), &format!("{name}.json"), &cfg),
        );
        header_value(&out, "config_sha256")
    };
    let first = grid(1.0, "a.csv");
    let second = grid(1.0, "b.csv");
    let changed = grid(1.5, "c.csv");
    assert_eq!(first, second, "output location leaked into the digest");
    assert_ne!(first, changed, "a physics change must change the digest");

    // The other pinned header lines are present on every artifact.
    for key in ["tool", "command", "generated_unix_seconds", "wall_clock_seconds", "columns"] {
        header_value(&dir.path().join("a.csv"), key);
    }
}
