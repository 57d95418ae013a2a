//! End-to-end runs of the dulac binary: correct numbers on known maps, the
//! documented exit codes, and byte-identical reruns.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn dulac(sub: &str, config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dulac"))
        .args([sub, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawning dulac")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Floats are emitted as strings; parse one back.
fn num(v: &Value) -> f64 {
    v.as_str().unwrap().parse().unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

const SQUARING: &str = "
[map]
kind = \"one_var\"
numer = [0.0, 0.0, 1.0]
";

#[test]
fn cycles_squaring_estimates_match_closed_form() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        &format!("{SQUARING}\n[cycles]\nn_max = 8\nseed = 42\n"),
    );
    let out = tmp.path().join("out");
    let r = dulac("cycles", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));

    let (header, rows) = csv_rows(&out.join("cycles.csv"));
    let est_col = header.iter().position(|h| h == "estimate_s1").unwrap();
    assert_eq!(rows.len(), 8);
    for (i, row) in rows.iter().enumerate() {
        let n = i + 1;
        let expected = (1.0 - 0.5f64.powi(n as i32)) * f64::ln(2.0);
        let got: f64 = row[est_col].parse().unwrap();
        assert!((got - expected).abs() < 1e-9, "n={n}: {got} vs {expected}");
    }

    // Manifest: version, seed, and a correct hash for every output.
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["tool"], "dulac");
    assert_eq!(manifest["subcommand"], "cycles");
    assert_eq!(manifest["seed"], 42);
    assert!(manifest["version"].as_str().unwrap().contains('.'));
    for (name, hash) in manifest["outputs"].as_object().unwrap() {
        let bytes = fs::read(out.join(name)).unwrap();
        let mut h = Sha256::new();
        h.update(&bytes);
        assert_eq!(hash.as_str().unwrap(), format!("{:x}", h.finalize()), "hash of {name}");
    }
}

#[test]
fn resonance_two_block_example() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "
[spectrum]
blocks = [ { rate = -1.0, multiplicity = 1 }, { rate = -2.0, multiplicity = 1 } ]
epsilon = 0.008
",
    );
    let out = tmp.path().join("out");
    let r = dulac("resonance", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));

    let summary = read_json(&out.join("summary.json"));
    assert!((num(&summary["zeta"]) - 0.96).abs() < 1e-12);
    assert_eq!(summary["resonant_count"], 1);

    let (header, rows) = csv_rows(&out.join("table.csv"));
    let col =
        |name: &str| header.iter().position(|h| h == name).unwrap();
    let resonant: Vec<&Vec<String>> =
        rows.iter().filter(|r| r[col("class")] == "resonant").collect();
    assert_eq!(resonant.len(), 1);
    assert_eq!(resonant[0][col("block")], "2");
    assert_eq!(resonant[0][col("alpha")], "2 0");

    // 12+ significant digits on every float column.
    for row in &rows {
        let mantissa = row[col("gap")].split('e').next().unwrap();
        let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
        assert!(digits >= 12, "gap {:?} too short", row[col("gap")]);
    }
}

#[test]
fn rerun_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        &format!("{SQUARING}\n[cycles]\nn_max = 5\nseed = 977\n"),
    );
    let out1 = tmp.path().join("a");
    let out2 = tmp.path().join("b");
    assert!(dulac("cycles", &config, &out1).status.success());
    assert!(dulac("cycles", &config, &out2).status.success());
    for name in ["cycles.csv", "summary.json", "manifest.json"] {
        let a = fs::read(out1.join(name)).unwrap();
        let b = fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn unknown_field_is_named_and_exits_two() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "
[spectrum]
blocks = [ { rate = -1.0, multiplicity = 1 } ]
epsilonn = 0.008
",
    );
    let out = tmp.path().join("out");
    let r = dulac("resonance", &config, &out);
    assert_eq!(r.status.code(), Some(2));

    let record: Value = serde_json::from_slice(&r.stderr).unwrap();
    assert_eq!(record["error"]["class"], "config");
    assert!(record["error"]["message"].as_str().unwrap().contains("epsilonn"));

    let on_disk = read_json(&out.join("error.json"));
    assert_eq!(on_disk, record);
}

#[test]
fn missing_section_is_config_error() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), SQUARING);
    let r = dulac("cycles", &config, &tmp.path().join("out"));
    assert_eq!(r.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&r.stderr).unwrap();
    assert!(record["error"]["message"].as_str().unwrap().contains("[cycles]"));
}

#[test]
fn iteration_budget_failure_exits_one() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "
[spectrum]
blocks = [ { rate = -0.6931471805599453, multiplicity = 1 } ]
epsilon = 0.05

[cocycle]
dim = 1
degree = 8

[[cocycle.germ]]
terms = [
  { comp = 0, alpha = [1], c = 0.5 },
  { comp = 0, alpha = [2], c = 1.0 },
]

[target]
dim = 1
degree = 8

[[target.germ]]
terms = [ { comp = 0, alpha = [1], c = 0.5 } ]

[renorm]
max_iter = 2
tol = 1e-12
",
    );
    let r = dulac("renorm", &config, &tmp.path().join("out"));
    assert_eq!(r.status.code(), Some(1));
    let record: Value = serde_json::from_slice(&r.stderr).unwrap();
    assert_eq!(record["error"]["class"], "module");
    assert_eq!(record["error"]["kind"], "NoConvergence");
}

#[test]
fn renorm_koenigs_limit_coefficients() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "
[spectrum]
blocks = [ { rate = -0.6931471805599453, multiplicity = 1 } ]
epsilon = 0.05

[cocycle]
dim = 1
degree = 8

[[cocycle.germ]]
terms = [
  { comp = 0, alpha = [1], c = 0.5 },
  { comp = 0, alpha = [2], c = 1.0 },
]

[target]
dim = 1
degree = 8

[[target.germ]]
terms = [ { comp = 0, alpha = [1], c = 0.5 } ]

[renorm]
max_iter = 40
tol = 1e-10
",
    );
    let out = tmp.path().join("out");
    let r = dulac("renorm", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));

    // transform.jets: term lines are "comp alpha re im".
    let text = fs::read_to_string(out.join("transform.jets")).unwrap();
    let mut t = vec![0.0f64; 9];
    for line in text.lines().skip(2) {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let alpha: usize = parts[1].parse().unwrap();
        t[alpha] = parts[2].parse().unwrap();
    }
    assert!((t[1] - 1.0).abs() < 1e-10);
    assert!((t[2] - 4.0).abs() < 1e-8);
    assert!((t[3] - 32.0 / 3.0).abs() < 1e-8);

    let summary = read_json(&out.join("summary.json"));
    assert!(num(&summary["ratio"]) <= 0.65);
    assert!(summary["iterations"].as_u64().unwrap() <= 40);
}

#[test]
fn normalize_keeps_only_resonant_terms() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        "
[cocycle]
dim = 2
degree = 6

[[cocycle.germ]]
terms = [
  { comp = 0, alpha = [1, 0], c = 0.5 },
  { comp = 1, alpha = [0, 1], c = 0.25 },
  { comp = 1, alpha = [2, 0], c = 1.0 },
  { comp = 0, alpha = [0, 2], c = 0.3 },
  { comp = 1, alpha = [1, 1], c = [0.1, -0.2] },
]

[normalize]
epsilon = 0.05
",
    );
    let out = tmp.path().join("out");
    let r = dulac("normalize", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));

    let summary = read_json(&out.join("summary.json"));
    assert!(num(&summary["conjugacy_residual"]) < 1e-8);
    assert_eq!(summary["resonant_count"], 1);

    // The normal form of this cocycle is the diagonal linear part plus the
    // one resonant monomial z1^2 in the second component.
    let text = fs::read_to_string(out.join("normal.jets")).unwrap();
    let terms: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(terms.len(), 3, "normal form: {text}");
    assert!(terms.iter().any(|l| l.starts_with("1 2 0 ")));
}

#[test]
fn verify_nt_squaring_fixed_point_passes() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        &format!(
            "{SQUARING}
[verify_nt]
period = 1
point = [1.0]
n_max = 12
eps_fraction = 0.05
"
        ),
    );
    let out = tmp.path().join("out");
    let r = dulac("verify-nt", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["passes"], true);
    assert!((num(&summary["chi1"]) - f64::ln(2.0)).abs() < 1e-12);
}

#[test]
fn density_power_map_fraction_is_one() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(
        tmp.path(),
        &format!(
            "{SQUARING}
[density]
n_min = 3
n_max = 5
eps = 0.1
s = 1
sigma_from_n = 6
"
        ),
    );
    let out = tmp.path().join("out");
    let r = dulac("density", &config, &out);
    assert!(r.status.success(), "stderr: {}", String::from_utf8_lossy(&r.stderr));
    let (header, rows) = csv_rows(&out.join("density.csv"));
    let frac = header.iter().position(|h| h == "fraction").unwrap();
    for row in &rows {
        let f: f64 = row[frac].parse().unwrap();
        assert_eq!(f, 1.0);
    }
}
