use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaugelab"));
    c.env_remove("GAUGELAB_OUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gaugelab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(args: &[&str]) -> Value {
    let o = run(args);
    assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
    serde_json::from_str(&stdout(&o)).expect("record on stdout")
}

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/result_record.schema.json");
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Enough of JSON Schema for the record schema: type, const, enum, required,
/// properties, additionalProperties = false, items, oneOf, minimum, maximum
/// and local $ref.
fn validate(root: &Value, schema: &Value, v: &Value, at: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let target = r
            .trim_start_matches("#/")
            .split('/')
            .try_fold(root, |node, key| node.get(key))
            .ok_or_else(|| format!("{at}: dangling $ref {r}"))?;
        return validate(root, target, v, at);
    }
    if let Some(t) = schema.get("type") {
        let types: Vec<&str> = match t {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().filter_map(Value::as_str).collect(),
            _ => vec![],
        };
        let ok = types.iter().any(|t| match *t {
            "object" => v.is_object(),
            "array" => v.is_array(),
            "string" => v.is_string(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            _ => false,
        });
        if !ok {
            return Err(format!("{at}: expected {types:?}, got {v}"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != v {
            return Err(format!("{at}: expected const {c}, got {v}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            return Err(format!("{at}: {v} not in {options:?}"));
        }
    }
    if let Some(x) = v.as_f64() {
        if schema
            .get("minimum")
            .and_then(Value::as_f64)
            .is_some_and(|m| x < m)
        {
            return Err(format!("{at}: {x} below minimum"));
        }
        if schema
            .get("maximum")
            .and_then(Value::as_f64)
            .is_some_and(|m| x > m)
        {
            return Err(format!("{at}: {x} above maximum"));
        }
    }
    if let Some(obj) = v.as_object() {
        for key in schema
            .get("required")
            .and_then(Value::as_array)
            .into_iter()
            .flatten()
        {
            let key = key.as_str().unwrap();
            if !obj.contains_key(key) {
                return Err(format!("{at}: missing {key}"));
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (key, val) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(s) => validate(root, s, val, &format!("{at}.{key}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{at}: unexpected property {key}"));
                }
                None => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            validate(root, items, x, &format!("{at}[{i}]"))?;
        }
    }
    if let Some(Value::Array(options)) = schema.get("oneOf") {
        let matched = options
            .iter()
            .filter(|s| validate(root, s, v, at).is_ok())
            .count();
        if matched != 1 {
            return Err(format!("{at}: {matched} oneOf branches match"));
        }
    }
    Ok(())
}

fn conforms(rec: &Value) {
    let s = schema();
    if let Err(e) = validate(&s, &s, rec, "$") {
        panic!("record does not conform: {e}\n{rec:#}");
    }
}

#[test]
fn lattice_info_counts() {
    let rec = json(&["lattice-info", "--d", "3", "--L", "2"]);
    let p = &rec["payload"];
    assert_eq!(p["kind"], "lattice-info");
    assert_eq!(
        (p["sites"].as_u64(), p["bonds"].as_u64()),
        (Some(8), Some(12))
    );
    assert_eq!(
        (p["plaquettes"].as_u64(), p["retained_bonds"].as_u64()),
        (Some(6), Some(5))
    );
    assert_eq!(rec["schema_version"], "1.0.0");
    conforms(&rec);
}

#[test]
fn cue_gue_csv_approaches_limit() {
    let o = run(&["cue-gue", "--N", "1", "--beta-grid", "1e-1,1e-2,1e-3,1e-4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,value,target,abs_err"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let last = rows.last().unwrap();
    assert!((last[1] - 0.2821).abs() < 1e-3, "{last:?}");
    assert!((last[2] - 0.282_094_791_773_878).abs() < 1e-12);
    // 17 significant digits survive the round trip.
    assert_eq!(rows[0][0], 0.1);
}

#[test]
fn theorem1_example_passes() {
    let rec = json(&[
        "verify-bounds",
        "--theorem",
        "1",
        "--d",
        "2",
        "--L",
        "3",
        "--N",
        "1",
        "--a",
        "0.01",
    ]);
    assert_eq!(rec["payload"]["kind"], "bounds");
    assert_eq!(rec["payload"]["verdict"], "pass");
    conforms(&rec);
}

#[test]
fn usage_errors_exit_2() {
    let o = run(&["verify-bounds", "--d", "1"]);
    assert_eq!(code(&o), 2);
    assert!(
        stderr(&o).contains("d must be in {2, 3, 4}"),
        "{}",
        stderr(&o)
    );
    assert_eq!(code(&run(&["z-bond", "--a", "2"])), 2);
    assert_eq!(code(&run(&["z-bond", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["cue-gue", "--beta-grid", "0.1,-1"])), 2);
    assert_eq!(code(&run(&["wilson-mc", "--workers", "0"])), 2);
    assert_eq!(code(&run(&["sweep", "--a-grid", "0.5"])), 2);
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let o = run(&[
        "lattice-info",
        "--out",
        file.join("sub/rec.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let o = run(&[
        "sweep",
        "--a-grid",
        "0.5",
        "--out",
        file.join("sweep").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn unreadable_config_exits_2() {
    let o = run(&["lattice-info", "--config", "/nonexistent/gaugelab.toml"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn flags_override_file_override_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "[model]\nd = 3\nL = 2\nN = 2\ngroup = su\n\n[run]\nseed = 77\nn-samples = 500\n",
    )
    .unwrap();
    let rec = json(&[
        "wilson-mc",
        "--config",
        cfg.to_str().unwrap(),
        "--N",
        "1",
        "--group",
        "u",
        "--seed",
        "5",
    ]);
    let c = &rec["config"];
    // From the file.
    assert_eq!(c["model"]["d"], 3);
    assert_eq!(c["model"]["L"], 2);
    assert_eq!(c["n_samples"], 500);
    // From flags.
    assert_eq!(c["model"]["N"], 1);
    assert_eq!(c["model"]["group"], "u");
    assert_eq!(c["seed"], 5);
    // Untouched defaults.
    assert_eq!(c["workers"], 1);
    assert_eq!(c["gauge_fixed"], true);
    conforms(&rec);
}

#[test]
fn bad_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    fs::write(&cfg, "[model]\nseed = 3\n").unwrap();
    let o = run(&["lattice-info", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn out_dir_env_sets_default_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["lattice-info", "--d", "2", "--L", "4"])
        .env("GAUGELAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("lattice-info.json");
    let rec: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rec["payload"]["sites"], 16);

    let o = bin()
        .args(["d2-limit", "--N", "1"])
        .env("GAUGELAB_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(fs::read_to_string(dir.path().join("d2-limit.csv"))
        .unwrap()
        .starts_with("a,value,target,abs_err\n"));
}

#[test]
fn every_subcommand_conforms_to_schema() {
    let cases: &[&[&str]] = &[
        &["z-bond", "--N", "2", "--group", "su"],
        &["z-bond", "--variant", "restricted", "--N", "1", "--d", "4"],
        &[
            "bose-exact",
            "--d",
            "2",
            "--L",
            "3",
            "--N",
            "2",
            "--field",
            "complex",
        ],
        &["bose-exact", "--links", "identity", "--d", "3", "--L", "2"],
        &[
            "wilson-mc",
            "--d",
            "2",
            "--L",
            "3",
            "--N",
            "1",
            "--n-samples",
            "500",
        ],
        &[
            "wilson-mc",
            "--d",
            "2",
            "--L",
            "2",
            "--N",
            "1",
            "--method",
            "quadrature",
            "--nodes",
            "16",
        ],
        &[
            "wilson-mc",
            "--d",
            "3",
            "--L",
            "2",
            "--N",
            "2",
            "--group",
            "su",
            "--n-samples",
            "200",
        ],
        &[
            "verify-bounds",
            "--theorem",
            "2",
            "--d",
            "2",
            "--L",
            "3",
            "--N",
            "1",
        ],
        &[
            "verify-bounds",
            "--theorem",
            "quadratic",
            "--N",
            "2",
            "--group",
            "su",
            "--n-samples",
            "2000",
        ],
        &[
            "verify-bounds",
            "--theorem",
            "elementary",
            "--n-samples",
            "2000",
        ],
        &["cue-gue", "--N", "2", "--format", "json"],
        &["d2-limit", "--N", "2", "--format", "json"],
        &["su2-check", "--format", "json"],
    ];
    for args in cases {
        let rec = json(args);
        conforms(&rec);
    }
}

#[test]
fn schema_rejects_malformed_records() {
    let s = schema();
    let mut rec = json(&["lattice-info"]);
    assert!(validate(&s, &s, &rec, "$").is_ok());
    rec["payload"]["kind"] = "z-bond".into();
    assert!(validate(&s, &s, &rec, "$").is_err());
    let mut rec = json(&["lattice-info"]);
    rec["config"]["format"] = "xml".into();
    assert!(validate(&s, &s, &rec, "$").is_err());
    let mut rec = json(&["lattice-info"]);
    rec.as_object_mut().unwrap().remove("wall_time_s");
    assert!(validate(&s, &s, &rec, "$").is_err());
}

#[test]
fn mc_payload_independent_of_workers() {
    let base = [
        "wilson-mc",
        "--d",
        "3",
        "--L",
        "2",
        "--N",
        "2",
        "--group",
        "su",
        "--n-samples",
        "3000",
    ];
    let one = json(&[&base[..], &["--seed", "9", "--workers", "1"]].concat());
    let four = json(&[&base[..], &["--seed", "9", "--workers", "4"]].concat());
    assert_eq!(one["payload"], four["payload"]);
    let other = json(&[&base[..], &["--seed", "10"]].concat());
    assert_ne!(one["payload"], other["payload"]);
}

fn sweep_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

fn payload(path: &Path) -> Value {
    let rec: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    conforms(&rec);
    rec["payload"].clone()
}

const SWEEP: &[&str] = &[
    "sweep",
    "--task",
    "wilson-mc",
    "--d",
    "2",
    "--L",
    "3",
    "--N",
    "1",
    "--n-samples",
    "400",
    "--a-grid",
    "1,0.5,0.25",
    "--g2-grid",
    "0.5,1,2",
];

#[test]
fn sweep_writes_one_record_per_point_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid");
    let args = [SWEEP, &["--out", out.to_str().unwrap()]].concat();

    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("9 points"), "{}", stdout(&o));
    let files = sweep_files(&out);
    assert_eq!(files.len(), 9);
    let before: Vec<Value> = files.iter().map(|f| payload(f)).collect();
    assert!(before.iter().all(|p| p["kind"] == "wilson-mc"));

    fs::remove_file(&files[1]).unwrap();
    fs::remove_file(&files[7]).unwrap();
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(
        stdout(&o).contains("2 computed, 7 already present"),
        "{}",
        stdout(&o)
    );
    let after: Vec<Value> = sweep_files(&out).iter().map(|f| payload(f)).collect();
    assert_eq!(before, after);

    // A truncated record counts as missing.
    fs::write(&files[4], "{\"schema_version\":").unwrap();
    let o = run(&args);
    assert!(
        stdout(&o).contains("1 computed, 8 already present"),
        "{}",
        stdout(&o)
    );
    assert_eq!(payload(&files[4]), before[4]);
}

#[test]
fn sweep_is_reproducible_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(
        code(&run(&[SWEEP, &["--out", a.to_str().unwrap()]].concat())),
        0
    );
    assert_eq!(
        code(&run(&[
            SWEEP,
            &["--workers", "3", "--out", b.to_str().unwrap()]
        ]
        .concat())),
        0
    );
    let pa: Vec<Value> = sweep_files(&a).iter().map(|f| payload(f)).collect();
    let pb: Vec<Value> = sweep_files(&b).iter().map(|f| payload(f)).collect();
    assert_eq!(pa, pb);
}

#[test]
fn sweep_csv_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let o = run(&[
        "sweep",
        "--task",
        "z-bond",
        "--N",
        "1",
        "--a-grid",
        "1,0.5",
        "--L-grid",
        "2,3",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(out.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("a,g2,L,N,variant,"));
    assert_eq!(lines.count(), 4);
    assert_eq!(sweep_files(&out).len(), 4);
}
