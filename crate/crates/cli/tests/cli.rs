use std::process::{Command, Output};

use qnorm_sld::sld::tail_cone;
use qnorm_sld::PqParams;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnorm-sld"))
        .args(args)
        .env_remove("QNORM_SLD_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Vec<serde_json::Map<String, Value>> {
    let v: Value = serde_json::from_slice(&out.stdout).expect("json output");
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_object().unwrap().clone())
        .collect()
}

fn csv_rows(out: &Output) -> Vec<std::collections::HashMap<String, String>> {
    let mut rdr = csv::Reader::from_reader(&out.stdout[..]);
    rdr.deserialize().map(|r| r.unwrap()).collect()
}

#[test]
fn sld_cone_matches_library() {
    let out = run(&["sld-cone", "--p", "2", "--q", "1", "--n", "100", "--z", "0.9"]);
    assert!(out.status.success());
    let rows = json(&out);
    assert_eq!(rows.len(), 1);
    let lib = tail_cone(100, 0.9, &PqParams::new(2.0, 1.0).unwrap()).unwrap();
    assert_eq!(rows[0]["probability"].as_f64().unwrap(), lib.probability);
    assert_eq!(rows[0]["rate"].as_f64().unwrap(), lib.rate);
    for k in ["xi", "kappa"] {
        assert!(rows[0][k].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn json_and_csv_carry_identical_values() {
    let base = ["sld-ball", "--p", "3", "--q", "1.5", "--n", "50,200", "--z-grid", "0.9:0.98:7"];
    let j = json(&run(&base));
    let mut with_csv = base.to_vec();
    with_csv.extend(["--format", "csv"]);
    let c = csv_rows(&run(&with_csv));
    assert_eq!(j.len(), 14);
    assert_eq!(j.len(), c.len());
    for (jr, cr) in j.iter().zip(&c) {
        for (k, v) in jr {
            let cell = &cr[k];
            match v {
                Value::Null => assert!(cell.is_empty(), "{k}"),
                Value::Number(x) => {
                    let parsed: f64 = cell.parse().unwrap();
                    assert_eq!(parsed.to_bits(), x.as_f64().unwrap().to_bits(), "{k}");
                }
                Value::String(s) => assert_eq!(s, cell),
                _ => unreachable!(),
            }
        }
    }
}

#[test]
fn rate_curve_is_increasing_inside_the_admissible_range() {
    let out = run(&["rate-curve", "--p", "2", "--q", "1", "--z-grid", "0.85:0.99:50", "--format", "csv"]);
    assert!(out.status.success());
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 50);
    let rates: Vec<f64> = rows.iter().map(|r| r["rate"].parse().unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn rate_curve_past_the_hoelder_bound_flags_rows() {
    let out = run(&["rate-curve", "--p", "2", "--q", "1", "--z-grid", "0.85:1.5:50", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(3));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 50);
    for r in &rows {
        let z: f64 = r["z"].parse().unwrap();
        if z < 1.0 {
            assert!(r["error"].is_empty());
        } else {
            assert_eq!(r["error"], "not_admissible");
        }
    }
}

#[test]
fn exit_codes() {
    let bad = [
        vec!["sld-cone", "--p", "1", "--q", "2", "--n", "10", "--z", "0.9"],
        vec!["sld-cone", "--p", "2", "--q", "1", "--n", "0", "--z", "0.9"],
        vec!["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z", "0.5"],
        vec!["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z-grid", "1:2"],
        vec!["mc", "--p", "2", "--q", "1", "--n", "10", "--z", "0.9"],
        vec!["mc", "--p", "2", "--q", "1", "--n", "10", "--z", "0.9", "--samples", "5"],
        vec!["project", "--q-proj", "1.5", "--n", "10", "--z", "1.9"],
        vec!["intersect", "--p", "2", "--q", "1", "--n", "10", "--t", "-1"],
    ];
    for args in &bad {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
    }
    let out = run(&["sld-cone", "--p", "2", "--q", "1", "--n", "10", "--z", "1.2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)[0]["error"], "not_admissible");
    let out = run(&["intersect", "--p", "2", "--q", "1", "--n", "50", "--t", "0.5"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)[0]["error"], "regime_violation");
    let out = run(&["constants", "--p", "2", "--q", "1", "--n", "10", "--output", "/nonexistent/dir/x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn seed_from_environment() {
    let args = ["mc", "--p", "2", "--q", "1", "--n", "20", "--z", "0.8", "--samples", "5000"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_qnorm-sld"))
        .args(args)
        .env("QNORM_SLD_SEED", "99")
        .output()
        .unwrap();
    let mut explicit = args.to_vec();
    explicit.extend(["--seed", "99"]);
    assert_eq!(with_env.stdout, run(&explicit).stdout);
    assert_eq!(json(&with_env)[0]["seed"].as_u64(), Some(99));
    assert_ne!(with_env.stdout, run(&args).stdout);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("qnorm-sld-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.csv");
    let args = ["constants", "--p", "2", "--q", "1", "--n", "10,100,1000", "--format", "csv"];
    let mut to_file = args.to_vec();
    let p = path.to_str().unwrap();
    to_file.extend(["--output", p]);
    assert!(run(&to_file).status.success());
    assert_eq!(std::fs::read(&path).unwrap(), run(&args).stdout);
    std::fs::remove_dir_all(&dir).ok();
}
