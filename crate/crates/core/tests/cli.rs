use std::process::{Command, Output};

fn sdcrk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdcrk")).args(args).output().unwrap()
}

fn golden(name: &str) -> String {
    format!("{}/tests/golden/{name}.csv", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn order_table_check_passes_and_fails() {
    let ok = sdcrk(&["order-table", "--nodes", "radau", "--s", "1..3", "--k", "1..5", "--check", &golden("jumperradau")]);
    assert_eq!(ok.status.code(), Some(0));
    let csv = String::from_utf8(ok.stdout).unwrap();
    assert!(csv.starts_with("s,1,2,3,4,5\n"));
    assert!(csv.contains("\n3,2,4,5,5,5\n"));
    let bad = sdcrk(&["order-table", "--nodes", "radau", "--s", "2..3", "--k", "1..3", "--schedule", "zero,ie", "--check", &golden("jumperradau")]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("differ"));
}

#[test]
fn single_cell_implicit_euler() {
    let out = sdcrk(&["order-table", "--nodes", "radau", "--s", "1..1", "--k", "1..1", "--schedule", "zero,ie"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let cell: usize = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(cell >= 1);
}

#[test]
fn table_json_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let json = dir.path().join("t.json");
    let out = sdcrk(&[
        "order-table", "--nodes", "gauss", "--s", "1..2", "--k", "1..3", "--schedule", "zero,minsrns",
        "--out", csv.to_str().unwrap(), "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let j: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(j["orders"][1], serde_json::json!([3, 4, 4]));
    assert_eq!(j["jumps"][1], serde_json::json!([true, false, false]));
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("s,1,2,3"));
}

#[test]
fn exit_codes() {
    assert_eq!(sdcrk(&["order-table", "--s", "3..1"]).status.code(), Some(1));
    assert_eq!(sdcrk(&["nosuch"]).status.code(), Some(1));
    assert_eq!(sdcrk(&["--precision", "64", "order-table", "--nodes", "gauss", "--s", "8..8", "--k", "1..1"]).status.code(), Some(1));
    // the first Lobatto node is 0, so the jumper EED is singular in the stiff limit
    assert_eq!(sdcrk(&["certify", "--nodes", "lobatto", "--s", "3", "--schedule", "zero,jumper", "--k", "2"]).status.code(), Some(3));
}

#[test]
fn precision_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_sdcrk"))
        .env("SDCRK_PRECISION_BITS", "64")
        .args(["order-table", "--nodes", "gauss", "--s", "8..8", "--k", "1..1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bits"));
}

#[test]
fn certify_reports() {
    let out = sdcrk(&["certify", "--nodes", "radau", "--s", "5", "--schedule", "flex", "--k", "5", "--expect-nilpotent"]);
    assert_eq!(out.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["nilpotency"]["pass"], true);
    let jump = sdcrk(&["certify", "--nodes", "radau", "--s", "6", "--schedule", "zero,jumper", "--k", "3", "--expect-jumps"]);
    assert_eq!(jump.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&jump.stdout).unwrap();
    assert!(r["jump_condition"].as_array().unwrap().iter().all(|c| c["holds"] == true));
    let ie = sdcrk(&["certify", "--nodes", "gauss", "--s", "3", "--schedule", "zero,ie", "--k", "2", "--expect-jumps"]);
    assert_eq!(ie.status.code(), Some(2));
}

#[test]
fn stability_grids() {
    let dir = tempfile::tempdir().unwrap();
    let contour = dir.path().join("c.csv");
    let args = ["--nodes", "radau", "--s", "3", "--schedule", "zero,jumper", "--k", "1", "--n-re", "41", "--n-im", "21"];
    let mut a = vec!["stability"];
    a.extend(args);
    a.extend(["--contour", contour.to_str().unwrap()]);
    let out = sdcrk(&a);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# re_min=-20"));
    assert_eq!(lines.next().unwrap(), "re,im,value,flag");
    assert_eq!(lines.count(), 41 * 21);
    assert!(std::fs::read_to_string(&contour).unwrap().lines().count() > 1);

    // the trapezoid region is the left half-plane
    let tab = dir.path().join("trap.json");
    std::fs::write(&tab, r#"{"c":["0","1"],"A":[["0","0"],["0.5","0.5"]],"b":["0.5","0.5"]}"#).unwrap();
    let out = sdcrk(&["stability", "--tableau", tab.to_str().unwrap(), "--n-re", "26", "--n-im", "11"]);
    assert_eq!(out.status.code(), Some(0));
    for l in String::from_utf8(out.stdout).unwrap().lines().skip(2) {
        let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
        if v[0] < -1e-9 {
            assert!(v[2] <= 1.0 + 1e-12, "{l}");
        } else if v[0] > 1e-9 && v[3] == 0.0 {
            assert!(v[2] > 1.0, "{l}");
        }
    }

    let rho = sdcrk(&["stability", "--rho", "--nodes", "radau", "--s", "3", "--k", "10", "--n-re", "11", "--n-im", "5", "--format", "json"]);
    assert_eq!(rho.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&rho.stdout).unwrap();
    assert_eq!(j["values"].as_array().unwrap().len(), 55);
}

#[test]
fn convergence_and_relaxation() {
    let out = sdcrk(&["convergence", "--nodes", "radau", "--s", "3", "--k", "1..2", "--levels", "2..5", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let s1 = j[0]["study"]["slope"].as_f64().unwrap();
    let s2 = j[1]["study"]["slope"].as_f64().unwrap();
    assert!((s1 - 2.0).abs() < 0.2 && (s2 - 4.0).abs() < 0.3, "{s1} {s2}");

    let out = sdcrk(&["relaxation", "--t-end", "10", "--sample-every", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("variant,t,u_1,u_2,u_3,H,error\n"));
    assert!(text.contains("\nplain,") && text.contains("\nrelaxed,"));
    let out = sdcrk(&["relaxation", "--t-end", "10", "--format", "json"]);
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(j[1]["max_drift"].as_f64().unwrap() < 1e-13);
    assert!(j[0]["max_drift"].as_f64().unwrap() > 1e-8);
}

#[test]
fn tableau_json_round_trips() {
    let out = sdcrk(&["tableau", "--nodes", "gauss", "--s", "2", "--schedule", "zero,ie", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let t = sdcrk::tableau::ButcherTableau::<f64>::from_json(&String::from_utf8(out.stdout).unwrap(), sdcrk::Precision::F64).unwrap();
    assert_eq!(t.stages(), 6);
}
