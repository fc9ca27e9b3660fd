use std::process::{Command, Output};

use serde_json::Value;

fn caplight(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_caplight"));
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("CAPLIGHT_THREADS", n),
        None => cmd.env_remove("CAPLIGHT_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn polar_check_passes_on_the_unit_sphere() {
    let out = caplight(&["polar-check", "--d", "3", "--R", "1"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["schema"], "caplight/v1");
    assert_eq!(r["passed"], true);
    assert!(r["summary"]["max_discrepancy"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn full_sphere_sharp_constant_is_one() {
    let out = caplight(&["spectral", "--d", "3", "--R", "2", "--degree", "4", "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["d", "R", "N", "q", "gamma", "a", "C_star", "implied_c1", "lambda_min"]);
    let col = header.iter().position(|h| *h == "C_star").unwrap();
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!(values.iter().all(|c| (c - 1.0).abs() <= 1e-12), "{values:?}");
}

#[test]
fn turan_corpus_has_no_violations() {
    let out = caplight(&["turan-fuzz", "--trials", "500", "--seed", "7"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["summary"]["violations"], 0);
    assert_eq!(r["rows"].as_array().unwrap().len(), 500);
}

#[test]
fn unknown_config_key_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(&path, r#"{"d": 3, "radius": 1.0}"#).unwrap();
    let out = caplight(&["cover", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["exit_code"], 2);
    assert!(diag["message"].as_str().unwrap().contains("radius"));
}

#[test]
fn bad_input_exits_two() {
    for args in [
        &["spectral", "--d", "4"][..],
        &["spectral", "--region", r#"{"type":"cap","center":[0,0,2],"a":0.3}"#],
        &["observe", "--T", "0.5,-1"],
        &["spectral", "--no-such-flag"],
    ] {
        assert_eq!(caplight(args, None).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(caplight(&["cover"], Some("many")).status.code(), Some(2));
}

#[test]
fn failed_contract_exits_one() {
    // no solver reaches a residual of 1e-300
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.json");
    std::fs::write(
        &path,
        r#"{"T": 1.0, "cutoff": 4, "tol": 1e-300,
        "region": {"type": "cap", "center": [0, 0, 1], "a": 0.3}}"#,
    )
    .unwrap();
    let out = caplight(&["control", "--config", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["passed"], false);
    let diag: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(diag["status"], "failed");
}

#[test]
fn output_does_not_depend_on_thread_count() {
    for args in [&["local-lemma", "--trials", "12"][..], &["sweep", "--cutoff", "4"], &["turan-fuzz", "--trials", "64"]]
    {
        let one = caplight(args, Some("1"));
        let four = caplight(args, Some("4"));
        assert_eq!(one.status.code(), Some(0), "{args:?}");
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
}

#[test]
fn report_embeds_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    let out_path = dir.path().join("report.json");
    std::fs::write(
        &cfg,
        r#"{"d": 2, "R": 2.5, "T": [0.5, 1.0], "cutoff": 3,
        "region": {"type": "arc", "angle": [0.0, 2.0]}}"#,
    )
    .unwrap();
    let out = caplight(
        &["observe", "--config", cfg.to_str().unwrap(), "--cutoff", "4", "--out", out_path.to_str().unwrap()],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let c = &r["config"];
    assert_eq!(c["command"], "observe");
    assert_eq!((c["d"].as_u64(), c["R"].as_f64()), (Some(2), Some(2.5)));
    assert_eq!(c["cutoff"], 4, "flags override the file");
    assert_eq!(c["T"], serde_json::json!([0.5, 1.0]));
    assert_eq!(c["region"]["type"], "arc");
    assert_eq!(r["rows"].as_array().unwrap().len(), 2);
}

#[test]
fn sweep_csv_columns_round_trip() {
    let out = caplight(&["sweep", "--cutoff", "4", "--T", "0.1,0.2,0.4", "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "d,R,gamma,a,L,T,C_obs,implied_c2,cost_sq_max,residual");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!(r[8] <= r[6] * (1.0 + 1e-6));
    }
    // C_obs decreases in T for each γ
    for chunk in rows.chunks(3) {
        assert!(chunk.windows(2).all(|w| w[1][6] < w[0][6]));
    }
}
