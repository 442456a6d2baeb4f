use std::path::PathBuf;
use std::process::{Command, Output};

use privest::bayes::PrivacyReport;
use privest::crowds::CrowdsReport;
use privest::lbs::LbsPrivacy;
use privest::sdc::SdcReport;
use privest::typical::TypicalSet;
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn privest(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_privest"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(data(&format!("golden/{name}"))).unwrap()
}

/// Runs twice and checks the output is byte-identical to the stored golden file.
fn assert_golden(args: &[&str], name: &str) -> Output {
    let a = privest(args);
    let b = privest(args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a), golden(name), "{name} drifted");
    a
}

#[test]
fn metrics_of_uniform_four() {
    let o = privest(&["metrics", &data("uniform4.json")]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    for h in ["h0", "h1", "hinf"] {
        assert_eq!(v[h], 2.0);
    }
}

#[test]
fn metrics_comparison_golden() {
    let o = assert_golden(
        &[
            "metrics",
            &data("skewed.json"),
            &data("fair.json"),
            "--alpha",
            "2",
            "--alpha",
            "inf",
        ],
        "metrics.json",
    );
    let c = &json(&o)["comparison"];
    assert!((c["kl"].as_f64().unwrap() - 0.188_721_875_540_867_2).abs() < 1e-12);
    assert_eq!(c["tv"], 0.25);
    assert_eq!(c["epsilon"], 1.0);
    let renyi = json(&o)["renyi"].clone();
    assert_eq!(renyi[1]["order"], "inf");
}

#[test]
fn metrics_reports_infinite_divergence_as_string() {
    let dir = tempfile::tempdir().unwrap();
    let point = dir.path().join("point.json");
    std::fs::write(&point, r#"{"alphabet": ["0", "1"], "probs": [1.0, 0.0]}"#).unwrap();
    let o = privest(&["metrics", &data("fair.json"), point.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["comparison"]["kl"], "inf");
    assert_eq!(v["comparison"]["epsilon"], "inf");
}

#[test]
fn malformed_json_is_an_input_error_with_position() {
    let o = privest(&["metrics", &data("malformed.json")]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn alphabet_mismatch_is_an_input_error() {
    let o = privest(&["metrics", &data("uniform4.json"), &data("fair.json")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flags_and_missing_subcommand_are_rejected() {
    assert_eq!(
        privest(&["metrics", &data("fair.json"), "--bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(privest(&[]).status.code(), Some(2));
    assert_eq!(privest(&["--help"]).status.code(), Some(0));
}

#[test]
fn csv_format_is_rejected_where_unsupported() {
    let o = privest(&["metrics", &data("fair.json"), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn privacy_of_flip_scenario() {
    let o = assert_golden(&["privacy", &data("flip03.json")], "privacy.json");
    let r: PrivacyReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r.average - 0.3).abs() < 1e-12);
    assert!((r.worst_case - 0.3).abs() < 1e-12);
    assert!((r.average_distortion.unwrap() - 0.3).abs() < 1e-12);
}

#[test]
fn privacy_of_noiseless_scenario_is_zero() {
    let o = privest(&["privacy", &data("noiseless.json")]);
    let r: PrivacyReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.average, 0.0);
    assert_eq!(r.worst_case, 0.0);
}

#[test]
fn unreachable_observation_is_omitted_and_noted() {
    let o = privest(&["privacy", &data("unreachable.json")]);
    assert_eq!(o.status.code(), Some(0));
    let r: PrivacyReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.per_observation.len(), 2);
    assert_eq!(r.unobservable, vec!["never".to_string()]);
    assert!(stderr(&o).contains("never"));
}

#[test]
fn invalid_scenario_is_an_input_error() {
    assert_eq!(
        privest(&["privacy", &data("invalid_scenario.json")])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn sdc_of_two_class_table() {
    let o = assert_golden(
        &["sdc", &data("aids.csv"), &data("aids_roles.json")],
        "sdc.json",
    );
    let r: SdcReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r.t - 0.188_721_875_540_867_2).abs() < 1e-6);
    assert!((r.risk - 0.188_721_875_540_867_2).abs() < 1e-6);
    assert_eq!(r.delta, 1.0);
    assert_eq!(r.k, 4);
}

#[test]
fn sdc_three_anonymous_table() {
    let o = privest(&[
        "sdc",
        &data("three_anon.csv"),
        &data("three_anon_roles.json"),
    ]);
    // some classes never contain some conditions, so delta is infinite
    assert_eq!(o.status.code(), Some(3));
    let r: SdcReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.k, 3);
    assert_eq!(r.classes, 3);
    assert!(r.delta.is_infinite());
}

#[test]
fn sdc_without_confidential_column_is_an_input_error() {
    let o = privest(&[
        "sdc",
        &data("three_anon.csv"),
        &data("no_confidential_roles.json"),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = privest(&[
        "sdc",
        &data("three_anon.csv"),
        &data("three_anon_roles.json"),
        "--confidential",
        "zip",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sdc_infinite_criterion_exit_code() {
    // class "1" never has "cold", so delta is infinite
    let o = privest(&["sdc", &data("singleton.csv"), &data("singleton_roles.json")]);
    assert_eq!(o.status.code(), Some(3));
    let r: SdcReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.delta.is_infinite());
    assert!(r.t.is_finite());
}

#[test]
fn tradeoff_csv_golden() {
    let o = assert_golden(
        &[
            "tradeoff",
            &data("fair.json"),
            &data("hamming.json"),
            "--budgets",
            "0.05,0.1,0.25,0.5,0.7",
        ],
        "tradeoff.csv",
    );
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("D,achieved_D,I_bits,slope,status"));
    let row: Vec<&str> = lines.nth(1).unwrap().split(',').collect();
    let i: f64 = row[2].parse().unwrap();
    assert!((i - 0.531).abs() < 1e-3);
    let last: Vec<&str> = out.lines().last().unwrap().split(',').collect();
    assert_eq!(last[2], "0");
}

#[test]
fn tradeoff_json_and_channel_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("channels.json");
    let o = privest(&[
        "tradeoff",
        &data("fair.json"),
        &data("hamming.json"),
        "--budgets",
        "0.2",
        "--format",
        "json",
        "--dump-channels",
        dump.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)[0]["status"], "ok");
    let channels: Value = serde_json::from_str(&std::fs::read_to_string(dump).unwrap()).unwrap();
    let rows = &channels[0]["channel"]["rows"];
    assert!((rows[0][1].as_f64().unwrap() - 0.2).abs() < 1e-6);
}

#[test]
fn tradeoff_input_errors() {
    let base = ["tradeoff", &data("fair.json"), &data("hamming.json")];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = base.iter().map(|s| s.as_ref()).collect();
        args.extend_from_slice(extra);
        privest(&args)
    };
    assert_eq!(run(&["--budgets"]).status.code(), Some(2));
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["--budgets", "0.3,0.2"]).status.code(), Some(2));
    let infeasible = run(&["--budgets", "-0.1,0.2"]);
    assert_eq!(infeasible.status.code(), Some(2));
    assert!(stdout(&infeasible).contains("-0.1,,,,infeasible"));
}

#[test]
fn crowds_golden_and_thread_independent() {
    let args = [
        "crowds", "--n", "4", "--p", "0.5", "--trials", "200000", "--seed", "7",
    ];
    let o = assert_golden(&args, "crowds.json");
    let r: CrowdsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.analytic.conditional_privacy, 0.375);
    assert!(r.z_posterior_same.abs() < 4.0);

    let mut threaded = args.to_vec();
    threaded.extend(["--threads", "3"]);
    assert_eq!(privest(&threaded).stdout, o.stdout);

    let other = privest(&[
        "crowds", "--n", "4", "--p", "0.5", "--trials", "200000", "--seed", "8",
    ]);
    assert_ne!(other.stdout, o.stdout);
}

#[test]
fn crowds_rejects_bad_parameters() {
    assert_eq!(
        privest(&["crowds", "--n", "0", "--p", "0.5"]).status.code(),
        Some(2)
    );
    assert_eq!(
        privest(&["crowds", "--n", "3", "--p", "1.5"]).status.code(),
        Some(2)
    );
}

#[test]
fn lbs_noiseless_and_gaussian() {
    let o = privest(&["lbs", "--grid", &data("grid_noiseless.json")]);
    let r: LbsPrivacy = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r.avg_mse_grid, 0.0);
    let o = assert_golden(&["lbs", "--grid", &data("grid_gaussian.json")], "lbs.json");
    let r: LbsPrivacy = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.avg_mse_mean <= r.avg_mse_grid);
}

#[test]
fn typical_golden_and_inputs() {
    let o = assert_golden(
        &[
            "typical",
            "--probs",
            "0.8,0.2",
            "--k",
            "20",
            "--epsilon",
            "0.2",
        ],
        "typical.json",
    );
    let t: TypicalSet = serde_json::from_slice(&o.stdout).unwrap();
    assert!((t.member_count as f64) <= t.cardinality_bound);

    let from_file = privest(&[
        "typical",
        &data("skewed.json"),
        "--k",
        "6",
        "--epsilon",
        "0.3",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    let joint = privest(&[
        "typical",
        "--joint",
        &data("bsc_joint.json"),
        "--k",
        "6",
        "--epsilon",
        "0.3",
    ]);
    assert!(json(&joint)["jointly_typical_fraction"].as_f64().unwrap() > 0.0);

    assert_eq!(
        privest(&["typical", "--k", "6", "--epsilon", "0.3"])
            .status
            .code(),
        Some(2)
    );
    let capped = privest(&[
        "typical",
        "--probs",
        "0.5,0.5",
        "--k",
        "30",
        "--epsilon",
        "0.1",
        "--cap",
        "1000",
    ]);
    assert_eq!(capped.status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = privest(&[
        "privacy",
        &data("flip03.json"),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(path).unwrap(),
        golden("privacy.json")
    );
}

#[test]
fn json_outputs_round_trip() {
    let cases: [(&[&str], &str); 4] = [
        (&["privacy", &data("flip03.json")], "privacy"),
        (
            &["sdc", &data("singleton.csv"), &data("singleton_roles.json")],
            "sdc",
        ),
        (&["lbs", "--grid", &data("grid_gaussian.json")], "lbs"),
        (
            &[
                "typical",
                "--probs",
                "0.7,0.3",
                "--k",
                "8",
                "--epsilon",
                "0.2",
            ],
            "typical",
        ),
    ];
    for (args, kind) in cases {
        let o = privest(args);
        let text = stdout(&o);
        let again = match kind {
            "privacy" => {
                serde_json::to_string_pretty(&serde_json::from_str::<PrivacyReport>(&text).unwrap())
            }
            "sdc" => {
                serde_json::to_string_pretty(&serde_json::from_str::<SdcReport>(&text).unwrap())
            }
            "lbs" => {
                serde_json::to_string_pretty(&serde_json::from_str::<LbsPrivacy>(&text).unwrap())
            }
            _ => serde_json::to_string_pretty(&serde_json::from_str::<TypicalSet>(&text).unwrap()),
        }
        .unwrap();
        assert_eq!(again + "\n", text, "{kind}");
    }
}
