use std::process::Command;

use polycycle::cli::{run, CliOutcome};
use serde_json::Value;

fn cli(args: &[&str]) -> CliOutcome {
    run(std::iter::once("polycycle").chain(args.iter().copied()))
}

fn json(out: &CliOutcome) -> Value {
    let doc: Value = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", out.stdout));
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["timing"]["elapsed_ms"].is_number());
    doc["result"].clone()
}

fn strings(v: &Value) -> Vec<String> {
    v.as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
}

#[test]
fn orbit_to_target() {
    let out = cli(&["orbit", "3", "--map", "collatz", "--stop-target", "2"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    assert_eq!(r["kind"], "orbit");
    assert_eq!(strings(&r["terms"]), ["3", "10", "5", "16", "8", "4", "2"]);
    assert_eq!(r["branch_tags"].as_array().unwrap().len(), 6);
    assert_eq!(r["rows"][6]["running_sum"], "48");
}

#[test]
fn orbit_fixed_steps() {
    let r = json(&cli(&["orbit", "0", "--map", "collatz", "--steps", "2"]));
    assert_eq!(strings(&r["terms"]), ["0", "0", "0"]);
}

#[test]
fn orbit_negative_seed() {
    let r = json(&cli(&["orbit", "-5", "--map", "collatz", "--steps", "5"]));
    assert_eq!(strings(&r["terms"]), ["-5", "-14", "-7", "-20", "-10", "-5"]);
}

#[test]
fn missing_map_is_map_error() {
    let out = cli(&["orbit", "1", "--map", "missing.map"]);
    assert_eq!(out.code, 3);
    assert!(out.stdout.is_empty());
    assert!(out.stderr.contains("missing.map"));
}

#[test]
fn verify_examples() {
    let out = cli(&["verify", "--map", "collatz", "--cycle", "4,2,1", "--checks", "t3,t4,eq1"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    assert_eq!(strings(&r["cycle"]), ["1", "4", "2"]);
    assert_eq!(r["all_pass"], true);
    assert_eq!(r["reports"].as_array().unwrap().len(), 3);

    assert_eq!(cli(&["verify", "--map", "collatz", "--cycle", "1,4,3"]).code, 4);

    let out = cli(&["verify", "--map", "inverse-collatz", "--cycle", "1,2,4", "--checks", "inv"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    let identity = &r["reports"][0];
    assert_eq!(identity["check"], "inverse_identity");
    assert_eq!((identity["lhs"].as_str(), identity["rhs"].as_str()), (Some("21"), Some("21")));
    assert_eq!((r["reports"][1]["lhs"].as_str(), r["reports"][1]["rhs"].as_str()), (Some("14"), Some("18")));

    let out = cli(&["verify", "--map", "collatz", "--cycle", "-5,-14,-7,-20,-10"]);
    assert_eq!(out.code, 0);
    assert_eq!(strings(&json(&out)["cycle"]), ["-20", "-10", "-5", "-14", "-7"]);
}

#[test]
fn verify_bad_member_is_usage() {
    assert_eq!(cli(&["verify", "--map", "collatz", "--cycle", "1,x"]).code, 2);
    assert_eq!(cli(&["verify", "--map", "collatz", "--cycle", "1,4,2", "--checks", "t9"]).code, 2);
}

#[test]
fn padic_examples() {
    let out = cli(&["padic-verify", "1", "--map", "collatz", "--precision", "6"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    assert_eq!(r["series_residue"], "63");
    assert_eq!(r["residual"], "0");
    assert_eq!(r["residual_digits"], serde_json::json!([0, 0, 0, 0, 0, 0]));

    let out = cli(&["padic-verify", "3", "--map", "collatz"]);
    assert_eq!(out.code, 0);
    assert_eq!(json(&out)["precision"], 64);

    assert_eq!(cli(&["padic-verify", "1", "--map", "inverse-collatz"]).code, 3);
    assert_eq!(cli(&["padic-verify", "1", "--map", "collatz", "--precision", "0"]).code, 2);
}

#[test]
fn cycles_examples() {
    let out = cli(&["cycles", "--map", "collatz", "--range", "1..100"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    assert_eq!(r["cycles"].as_array().unwrap().len(), 1);
    assert_eq!(strings(&r["cycles"][0]["members"]), ["1", "4", "2"]);

    let out = cli(&["cycles", "--map", "collatz", "--range", "-100..-1", "--threads", "3"]);
    assert_eq!(out.code, 0);
    assert_eq!(json(&out)["cycles"].as_array().unwrap().len(), 3);

    assert_eq!(cli(&["cycles", "--map", "collatz", "--range", "5..1"]).code, 2);
    assert_eq!(cli(&["cycles", "--map", "collatz", "--range", "1-5"]).code, 2);
    assert_eq!(cli(&["cycles", "--map", "collatz", "--range", "1..5", "--threads", "0"]).code, 2);
}

#[test]
fn cycles_output_independent_of_threads() {
    let result = |t: &str| {
        let mut r = json(&cli(&["cycles", "--map", "collatz", "--range", "-60..60", "--threads", t]));
        r.as_object_mut().unwrap().remove("timing");
        r
    };
    assert_eq!(result("1"), result("7"));
}

#[test]
fn identity_examples() {
    let out = cli(&["identity", "--range", "1..100"]);
    assert_eq!(out.code, 0);
    let r = json(&out);
    assert_eq!(r["passes"], 100);
    assert_eq!(r["failures"], 0);

    let r = json(&cli(&["identity", "--range", "2..2"]));
    assert_eq!(r["rows"][0]["gap"], "2");

    let r = json(&cli(&["identity", "--range", "1..5", "--map", "collatz", "--absorbing", "2"]));
    let gaps: Vec<&str> = r["rows"].as_array().unwrap().iter().map(|row| row["gap"].as_str().unwrap()).collect();
    assert_eq!(gaps, ["0", "2", "4", "6", "8"]);

    assert_eq!(cli(&["identity", "--range", "9..3"]).code, 2);
}

#[test]
fn identity_gap_for_other_absorbing_state() {
    // 4 -> 2 -> 1: gap = 2 * (n - f(1)) = 2 * (n - 4) on the orbit of n to 1
    let r = json(&cli(&["identity", "--range", "1..4", "--absorbing", "1"]));
    assert_eq!(r["checked"], false);
    let gaps: Vec<&str> = r["rows"].as_array().unwrap().iter().map(|row| row["gap"].as_str().unwrap()).collect();
    assert_eq!(gaps, ["-6", "-4", "-2", "0"]);
}

#[test]
fn csv_and_json_agree() {
    let j = json(&cli(&["orbit", "27", "--map", "collatz", "--stop-target", "1"]));
    let c = cli(&["orbit", "27", "--map", "collatz", "--stop-target", "1", "--format", "csv"]);
    assert_eq!(c.code, 0);
    let mut reader = csv::Reader::from_reader(c.stdout.as_bytes());
    assert_eq!(reader.headers().unwrap(), vec!["index", "value", "branch", "running_sum"]);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let jrows = j["rows"].as_array().unwrap();
    assert_eq!(rows.len(), jrows.len());
    for (c, j) in rows.iter().zip(jrows) {
        assert_eq!(c[0], j["index"].to_string());
        assert_eq!(&c[1], j["value"].as_str().unwrap());
        assert_eq!(&c[2], j["branch"].as_str().unwrap_or(""));
        assert_eq!(&c[3], j["running_sum"].as_str().unwrap());
    }

    let j = json(&cli(&["identity", "--range", "1..30"]));
    let c = cli(&["identity", "--range", "1..30", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(c.stdout.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    for (c, j) in rows.iter().zip(j["rows"].as_array().unwrap()) {
        assert_eq!(&c[0], j["n"].as_str().unwrap());
        assert_eq!(&c[1], j["gap"].as_str().unwrap());
        assert_eq!(&c[2], j["expected"].as_str().unwrap());
        assert_eq!(&c[3], j["outcome"].as_str().unwrap());
    }

    let j = json(&cli(&["cycles", "--map", "collatz", "--range", "-100..100"]));
    let c = cli(&["cycles", "--map", "collatz", "--range", "-100..100", "--format", "csv"]);
    let mut reader = csv::Reader::from_reader(c.stdout.as_bytes());
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    let jcycles = j["cycles"].as_array().unwrap();
    assert_eq!(rows.len(), jcycles.len());
    for (c, j) in rows.iter().zip(jcycles) {
        assert_eq!(c[1], j["length"].to_string());
        assert_eq!(c[2], strings(&j["members"]).join(" "));
    }
}

#[test]
fn map_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("square.map");
    std::fs::write(&path, "# x -> x/2 or x^2 + 1\np = 2\ndivisible = x\notherwise = x^2 + 1\n").unwrap();
    let path = path.to_str().unwrap();

    let out = cli(&["verify", "--map", path, "--cycle", "2,1", "--checks", "t3,t4"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(json(&out)["map"], "square");

    let r = json(&cli(&["show-map", "--map", path]));
    let text = r["text"].as_str().unwrap();
    let reparsed = dir.path().join("again.map");
    std::fs::write(&reparsed, text).unwrap();
    let again = json(&cli(&["show-map", "--map", reparsed.to_str().unwrap()]));
    assert_eq!(again["text"], text);

    let bad = dir.path().join("bad.map");
    std::fs::write(&bad, "p = 2\ndivisible = 3x*\notherwise = x\n").unwrap();
    let out = cli(&["orbit", "1", "--map", bad.to_str().unwrap()]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("line 2"), "{}", out.stderr);
}

#[test]
fn binary_streams_and_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_polycycle");
    let out = Command::new(bin).args(["orbit", "7", "--map", "collatz", "--stop-target", "1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["result"]["terms"].as_array().unwrap().len(), 17);

    let out = Command::new(bin).args(["verify", "--map", "collatz", "--cycle", "1,4,3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(4));
    assert!(!out.stderr.is_empty());

    let out = Command::new(bin).args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = Command::new(bin).args(["--help"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn every_command_matches_the_shipped_schema() {
    let schema: Value =
        serde_json::from_str(include_str!("../../../docs/output.schema.json")).expect("schema is valid json");
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("quad.map");
    std::fs::write(&path, "p = 3\ndivisible = 3 + x\notherwise = x^2 - 1\n").unwrap();
    let path = path.to_str().unwrap();
    let invocations: &[&[&str]] = &[
        &["orbit", "27", "--map", "collatz"],
        &["orbit", "3", "--map", "collatz", "--stop-target", "2"],
        &["orbit", "5", "--map", "collatz", "--max-magnitude-bits", "3"],
        &["orbit", "7", "--map", "inverse-collatz", "--steps", "10"],
        &["orbit", "-4", "--map", path, "--steps", "6"],
        &[
            "verify",
            "--map",
            "collatz",
            "--cycle",
            "-17,-50,-25,-74,-37,-110,-55,-164,-82,-41,-122,-61,-182,-91,-272,-136,-68,-34",
        ],
        &["verify", "--map", "inverse-collatz", "--cycle", "-1,-2"],
        &["verify", "--map", "inverse-collatz", "--cycle", "1,2,4", "--checks", "t3,eq1"],
        &["padic-verify", "-9", "--map", "collatz", "--precision", "20"],
        &["padic-verify", "4", "--map", path],
        &["cycles", "--map", "collatz", "--range", "-50..50", "--threads", "4"],
        &["cycles", "--map", "inverse-collatz", "--range", "1..4", "--max-steps", "100"],
        &["cycles", "--map", path, "--range", "-5..5"],
        &["identity", "--range", "1..20"],
        &["identity", "--range", "-2..3"],
        &["identity", "--range", "1..6", "--absorbing", "4"],
        &["show-map", "--map", path],
    ];
    for args in invocations {
        let out = cli(args);
        assert!(out.code == 0 || out.code == 1, "{args:?}: {}", out.stderr);
        let doc: Value = serde_json::from_str(&out.stdout).unwrap();
        let errors: Vec<String> =
            validator.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:#?}");
    }

    let mut doc: Value = serde_json::from_str(&cli(&["orbit", "1", "--map", "collatz"]).stdout).unwrap();
    doc["result"]["seed"] = serde_json::json!(1);
    assert!(!validator.is_valid(&doc), "plain JSON numbers are not accepted for big integers");
}
