use std::path::PathBuf;
use std::process::{Command, Output};

fn rdcsym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdcsym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const CUBIC: &str = r#"{"family":"power","p":0,"k":1,"lambda":1,"F":"lambda1*V^(2*k+1)",
  "operator":{"tau":"2*k*t + A1","xi":"k*x + A2","eta":"-V"},
  "grid":{"x0":0,"x1":1,"nx":21,"t0":0,"dt":0.001,"steps":10},
  "seed":5,"params":{"lambda1":2,"A1":1,"A2":0},"epsilon":0.1}"#;

#[test]
fn derive_json_has_four_equations() {
    let o = rdcsym(&["derive", "--family", "power", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["equations"].as_array().unwrap().len(), 4);
    assert_eq!(v["family"], "power");
    let o = rdcsym(&["derive", "--family", "exp"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("exp((n + 1)*V)") || stdout(&o).contains("exp("));
}

#[test]
fn tables_render() {
    let o = rdcsym(&["table", "--case", "k=p-1", "--target", "2p+3", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cells: Vec<&str> = v["values"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(
        cells,
        ["-", "-", "-", "-1", "-2", "-3", "-4", "-5", "-1", "-3/2"]
    );
    let o = rdcsym(&["table", "--case", "k=p-1", "--target", "2p+1"]);
    let text = stdout(&o);
    assert!(
        text.contains("-1/2") && text.contains("| 2*p + 1 |"),
        "{text}"
    );
}

#[test]
fn coincide_lists_five_cases() {
    let o = rdcsym(&[
        "coincide",
        "--exponents",
        "p+1, p, p-1, k, k-1, 0",
        "--forbidden",
        "k != 0, k != p, k != p+1, p != -1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5, "{}", stdout(&o));
}

#[test]
fn check_op_exit_status() {
    let ok = rdcsym(&["check-op", "--xi", "c", "--eta", "0"]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = rdcsym(&["check-op", "--xi", "x", "--eta", "V^2"]);
    assert_eq!(bad.status.code(), Some(1));
    let scaled = rdcsym(&[
        "check-op",
        "--tau",
        "2*k*t + A1",
        "--xi",
        "k*x + A2",
        "--eta",
        "-V",
        "--source",
        "lambda1*V^(2*k+1)",
        "--case",
        "p=0",
        "--json",
    ]);
    assert_eq!(scaled.status.code(), Some(0), "{}", stdout(&scaled));
}

#[test]
fn numeric_check_and_transform() {
    let inst = scratch("cubic.json", CUBIC);
    let path = inst.to_str().unwrap();
    let o = rdcsym(&["check-op-numeric", "--equation", path, "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["max_residual"].as_f64().unwrap() < 1e-9);
    let o = rdcsym(&[
        "check-op-numeric",
        "--equation",
        path,
        "--eta",
        "-V + V^2/10",
    ]);
    assert_eq!(o.status.code(), Some(1));

    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("moved.csv");
    let o = rdcsym(&[
        "transform",
        "--equation",
        path,
        "--initial",
        "1 + x/2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("t,x,V\n"));
    assert_eq!(csv.lines().count(), 1 + 11 * 21);
}

#[test]
fn split_command() {
    let o = rdcsym(&[
        "split",
        "a*V^2 + f*V + g*V^k",
        "--forbidden",
        "k != 1, k != 2, k != 0",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 3);
    let o = rdcsym(&["split", "a*V^2 + g*V^k"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_paper_passes_and_fault_fails() {
    let o = rdcsym(&["verify-paper"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(),
        14
    );
    let o = rdcsym(&["verify-paper", "--inject-fault", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v[0]["status"], "fail");
    assert_eq!(v[0]["id"], "determining-systems");
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify-paper", "--json", "--seed", "3"][..],
        &["derive", "--family", "exp", "--json"][..],
    ] {
        assert_eq!(rdcsym(args).stdout, rdcsym(args).stdout);
    }
}

#[test]
fn usage_errors_exit_two() {
    let corpus: &[&[&str]] = &[
        &[],
        &["nonsense"],
        &["derive", "--family", "cubic"],
        &["derive", "--bogus"],
        &["table", "--target", "2p+3"],
        &["table", "--case", "k=p-1", "--target", "2p+"],
        &["table", "--case", "k=p-1", "--target", "p+7"],
        &["coincide"],
        &["coincide", "--exponents", "p+, k"],
        &["check-op", "--xi", "x"],
        &["check-op", "--xi", "((", "--eta", "0"],
        &["check-op", "--xi", "1", "--eta", "0", "--case", "p<0"],
        &[
            "check-op-numeric",
            "--equation",
            "/nonexistent/instance.json",
        ],
        &["verify-paper", "--seed", "minus"],
        &["split"],
    ];
    for args in corpus {
        let o = rdcsym(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}
