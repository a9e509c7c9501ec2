use std::path::PathBuf;
use std::process::{Command, Output};

fn errdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_errdist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario_file(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    root.join(name).to_string_lossy().into_owned()
}

fn ok_stdout(args: &[&str]) -> String {
    let out = errdist(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Csv {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers().unwrap().iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.unwrap().iter().map(String::from).collect())
            .collect();
        Csv { header, rows }
    }

    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn rows_where(&self, name: &str, value: &str) -> Vec<usize> {
        let c = self.col(name);
        (0..self.rows.len())
            .filter(|&i| self.rows[i][c] == value)
            .collect()
    }
}

#[test]
fn vienna_verify_saturation_and_ozawa_slack() {
    let csv = Csv::parse(&ok_stdout(&["verify", "--scenario", "vienna"]));
    assert_eq!(
        csv.header,
        [
            "param",
            "relation_id",
            "lhs",
            "rhs",
            "slack",
            "satisfied",
            "precondition_residuals"
        ]
    );
    let main = csv.rows_where("relation_id", "MAIN");
    assert_eq!(main.len(), 181);
    assert_eq!(csv.rows[main[0]][0], "0.0");
    assert!(csv.num(main[0], "slack").abs() < 1e-9);
    let ozawa = csv.rows_where("relation_id", "OZAWA");
    assert_eq!(ozawa.len(), 181);
    assert!(ozawa.iter().all(|&i| csv.num(i, "slack") > 0.0));
    assert!(csv.rows.iter().all(|r| r[csv.col("satisfied")] == "true"));
}

#[test]
fn vienna_sweep_has_a_naive_product_violation() {
    let csv = Csv::parse(&ok_stdout(&["sweep"]));
    assert_eq!(csv.rows.len(), 181);
    let violated: Vec<usize> = (0..csv.rows.len())
        .filter(|&i| csv.num(i, "naive_product") < csv.num(i, "c_ab") - 1e-9)
        .collect();
    assert!(!violated.is_empty());
    // The naive product 2|sin(φ/2)|·√2|cos φ| against c_AB = 1.
    for i in 0..csv.rows.len() {
        let phi = csv.num(i, "param");
        let expected = 2.0 * (phi / 2.0).sin().abs() * 2f64.sqrt() * phi.cos().abs();
        assert!(
            (csv.num(i, "naive_product") - expected).abs() < 1e-12,
            "phi {phi}"
        );
        assert_eq!(csv.rows[i][csv.col("comm_ab")], "0.0+2.0i");
    }
}

#[test]
fn sweep_components_are_consistent() {
    let csv = Csv::parse(&ok_stdout(&["sweep", "--grid", "0:pi:7"]));
    for i in 0..csv.rows.len() {
        for side in ["a", "b"] {
            let eps = csv.num(i, &format!("eps_{side}"));
            let bias = csv.num(i, &format!("bias_{side}"));
            let fuzz = csv.num(i, &format!("fuzziness_{side}"));
            assert!((eps * eps - bias * bias - fuzz * fuzz).abs() < 1e-12);
        }
    }
}

#[test]
fn preset_and_file_agree_byte_for_byte() {
    let preset = ok_stdout(&["sweep", "--scenario", "vienna"]);
    let file = ok_stdout(&["sweep", "--scenario", &scenario_file("vienna.txt")]);
    assert_eq!(preset, file);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["verify"],
        vec!["sweep", "--grid", "0:2pi:37"],
        vec!["region"],
        vec![
            "circuit", "--param", "pi/3", "--shots", "20000", "--seed", "9",
        ],
        vec![
            "circuit", "--grid", "0:pi:5", "--shots", "5000", "--seed", "2",
        ],
    ] {
        assert_eq!(ok_stdout(&args), ok_stdout(&args), "{args:?}");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let stdout = ok_stdout(&["sweep", "--grid", "0:1:4"]);
    let written = ok_stdout(&["sweep", "--grid", "0:1:4", "--out", path.to_str().unwrap()]);
    assert!(written.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), stdout);
}

#[test]
fn region_unit_parameters() {
    let csv = Csv::parse(&ok_stdout(&["region", "--grid", "0:3:31", "--branciard"]));
    assert_eq!(
        csv.header,
        [
            "eps_a",
            "eps_b_ozawa",
            "eps_b_branciard_special",
            "eps_b_both_unbiased",
            "eps_b_unbiased_a_proj_b",
            "eps_b_unbiased_a"
        ]
    );
    assert_eq!(csv.num(0, "eps_b_branciard_special"), 1.0);
    assert_eq!(csv.num(0, "eps_b_ozawa"), 1.0);
    assert_eq!(csv.rows[0][csv.col("eps_b_both_unbiased")], "inf");
    let last = csv.rows.len() - 1;
    assert!((csv.num(last, "eps_b_both_unbiased") - 1.0 / 3.0).abs() < 1e-15);
    for i in 0..csv.rows.len() {
        assert_eq!(csv.num(i, "eps_b_unbiased_a_proj_b"), 1.0);
    }
}

#[test]
fn region_without_unit_parameters_drops_branciard() {
    let csv = Csv::parse(&ok_stdout(&["region", "--sigma-a", "2", "--c-ab", "0.5"]));
    assert!(!csv.header.iter().any(|h| h.contains("branciard")));
    for i in 0..csv.rows.len() {
        assert_eq!(csv.num(i, "eps_b_unbiased_a_proj_b"), 0.25);
    }
    let far = Csv::parse(&ok_stdout(&["region", "--grid", "1e6:1e6:1"]));
    assert!(far.num(0, "eps_b_both_unbiased") < 1e-5);
}

#[test]
fn negative_values_are_not_taken_for_flags() {
    let csv = Csv::parse(&ok_stdout(&["sweep", "--grid", "-pi:pi:3"]));
    assert_eq!(csv.rows[0][0], format!("{:?}", -std::f64::consts::PI));
    ok_stdout(&["circuit", "--param", "-pi/4", "--shots", "100"]);
}

#[test]
fn region_from_scenario_stats() {
    let csv = Csv::parse(&ok_stdout(&[
        "region",
        "--scenario",
        "vienna",
        "--grid",
        "0:1:3",
    ]));
    assert!(csv.header.iter().any(|h| h.contains("branciard")));
}

#[test]
fn circuit_vienna_rows() {
    let csv = Csv::parse(&ok_stdout(&["circuit", "--param", "pi/3", "--seed", "4"]));
    assert_eq!(
        csv.header,
        [
            "param",
            "quantity",
            "exact",
            "operator_route",
            "sampled",
            "std_error",
            "shots",
            "seed"
        ]
    );
    let quantities: Vec<&str> = csv.rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(
        quantities,
        [
            "fuzziness_a",
            "fuzziness_b",
            "error_a",
            "disturbance_b",
            "commutator_bound"
        ]
    );
    let error = csv.rows_where("quantity", "error_a")[0];
    assert!((csv.num(error, "exact") - 1.0).abs() < 1e-12);
    assert!((csv.num(error, "operator_route") - 1.0).abs() < 1e-12);
    for i in 0..csv.rows.len() {
        let gap = (csv.num(i, "sampled") - csv.num(i, "exact")).abs();
        // The fuzziness of A vanishes, so its sampled root carries a
        // square-root bias; the others sit within a few standard errors.
        if csv.rows[i][1] != "fuzziness_a" && csv.rows[i][1] != "commutator_bound" {
            assert!(gap < 5.0 * csv.num(i, "std_error"), "{:?}", csv.rows[i]);
        }
        assert_eq!(csv.rows[i][6], "100000");
        assert_eq!(csv.rows[i][7], "4");
    }

    let projective = Csv::parse(&ok_stdout(&["circuit", "--param", "pi/2", "--basis", "x"]));
    let fa = projective.rows_where("quantity", "fuzziness_a")[0];
    assert_eq!(projective.num(fa, "exact"), 0.0);
    assert!(projective.num(fa, "operator_route").abs() < 1e-12);
}

#[test]
fn circuit_y_basis_gives_the_commutator_bound_only() {
    let csv = Csv::parse(&ok_stdout(&["circuit", "--basis", "y", "--param", "0.4"]));
    assert_eq!(csv.rows.len(), 1);
    assert_eq!(csv.rows[0][1], "commutator_bound");
}

#[test]
fn singlet_variant_matches_controlled_swap_exactly() {
    let args = |v: &'static str| {
        [
            "circuit",
            "--param",
            "pi/3",
            "--shots",
            "1000",
            "--variant",
            v,
        ]
    };
    let cswap = Csv::parse(&ok_stdout(&args("cswap")));
    let singlet = Csv::parse(&ok_stdout(&args("singlet")));
    assert_eq!(singlet.rows.len(), 4);
    for (i, row) in singlet.rows.iter().enumerate() {
        assert_eq!(row[1], cswap.rows[i][1]);
        assert!((singlet.num(i, "exact") - cswap.num(i, "exact")).abs() < 1e-10);
    }
}

#[test]
fn joint_b_side_file_loads() {
    let csv = Csv::parse(&ok_stdout(&[
        "verify",
        "--scenario",
        &scenario_file("cnot_joint.txt"),
    ]));
    assert!(!csv.rows.is_empty());
}

fn expect_exit(args: &[&str], code: i32, stderr_has: &str) {
    let out = errdist(args);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {stderr}");
    assert!(stderr.contains(stderr_has), "{args:?}: {stderr}");
}

#[test]
fn input_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };
    let malformed = write("bad.txt", "state = zplus\nthis is not a pair\n");
    expect_exit(&["verify", "--scenario", &malformed], 2, "line 2");

    let vienna = std::fs::read_to_string(scenario_file("vienna.txt")).unwrap();
    let heavy = write(
        "trace.txt",
        &vienna.replace("state   = zplus", "state = [1, 0; 0, 1]"),
    );
    expect_exit(&["sweep", "--scenario", &heavy], 2, "trace residual");

    let not_hermitian = write(
        "herm.txt",
        &vienna.replace("a       = X", "a = [0, 1; 0, 0]"),
    );
    expect_exit(&["sweep", "--scenario", &not_hermitian], 2, "Hermitian");

    expect_exit(
        &["sweep", "--scenario", "no/such/file.txt"],
        2,
        "cannot read",
    );
    expect_exit(&["region", "--sigma-a", "2", "--branciard"], 2, "BRANCIARD");
    expect_exit(&["region", "--c-ab", "-1"], 2, "c_ab");
    expect_exit(&["sweep", "--grid", "0:1:0"], 2, "count");
    expect_exit(&["sweep", "--grid", "-pi:pi"], 2, "start:stop:count");
    expect_exit(
        &["circuit", "--variant", "singlet", "--basis", "y"],
        2,
        "singlet",
    );
    expect_exit(&["circuit", "--shots", "0"], 2, "shots");
    expect_exit(&["circuit", "--basis", "z"], 2, "");
}
