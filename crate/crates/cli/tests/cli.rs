use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sabatier"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn sabatier")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

const COARSE: &str = "[reactor]\nn_nodes = 111\n";

#[test]
fn print_config_round_trips_through_toml() {
    let dir = scratch("print_config");
    let out = run(&dir, &["print-config"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let value: toml::Table = toml::from_str(&text).unwrap();
    for section in [
        "paths",
        "reactor",
        "kinetics",
        "scenario",
        "solver",
        "optimizer",
        "fit",
        "flow",
    ] {
        assert!(value.contains_key(section), "missing [{section}]");
    }
    fs::write(dir.join("c.toml"), &text).unwrap();
    let out = run(&dir, &["equilibrium", "--config", "c.toml", "--out", "eq"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_errors_exit_with_code_2() {
    let dir = scratch("config_errors");
    fs::write(
        dir.join("bad.toml"),
        "[scenario]\ntemperature_model = \"linear\"\n",
    )
    .unwrap();
    assert_eq!(code(&run(&dir, &["simulate", "--config", "bad.toml"])), 2);
    fs::write(dir.join("typo.toml"), "[reactor]\nn_node = 11\n").unwrap();
    assert_eq!(code(&run(&dir, &["simulate", "--config", "typo.toml"])), 2);
    assert_eq!(
        code(&run(&dir, &["simulate", "--config", "missing.toml"])),
        2
    );
    fs::write(dir.join("neg.toml"), "[scenario]\nflow_rate = -5.0\n").unwrap();
    assert_eq!(code(&run(&dir, &["simulate", "--config", "neg.toml"])), 2);
    assert_eq!(code(&run(&dir, &["simulate", "--jobs", "many"])), 2);
}

#[test]
fn simulate_writes_profile_and_balance_checked_summary() {
    let dir = scratch("simulate");
    fs::write(dir.join("c.toml"), COARSE).unwrap();
    let out = run(&dir, &["simulate", "--config", "c.toml", "--out", "res"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let profile = fs::read_to_string(dir.join("res/profile.csv")).unwrap();
    let mut lines = profile.lines();
    assert_eq!(
        lines.next().unwrap(),
        "x,p,u,T,Y_CO2,Y_H2,Y_CH4,Y_H2O,conversion"
    );
    assert_eq!(lines.count(), 111);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("res/summary.json")).unwrap()).unwrap();
    let s = &summary["summary"];
    let chi = s["conversion"].as_f64().unwrap();
    assert!(chi > 0.9 && chi < 1.0, "{chi}");
    for key in ["mass_flux_spread", "atom_balance"] {
        let v = s["balance"][key].as_f64().unwrap();
        assert!(v.abs() < 1e-6, "{key} = {v}");
    }
    assert!(summary["operating_point"]["flow_mln_min"].is_number());
}

#[test]
fn generate_data_is_reproducible_per_seed() {
    let dir = scratch("generate");
    fs::write(dir.join("c.toml"), COARSE).unwrap();
    let gen = |out: &str, seed: &str| {
        let o = run(
            &dir,
            &[
                "generate-data",
                "--config",
                "c.toml",
                "--out",
                out,
                "--seed",
                seed,
            ],
        );
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.join(out).join("experiments.csv")).unwrap()
    };
    let a = gen("a", "7");
    let b = gen("b", "7");
    let c = gen("c", "8");
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("id,T_wall_C,flow_mln_min,conversion"));
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn invalid_experiments_exit_with_code_4() {
    let dir = scratch("invalid_experiments");
    fs::write(dir.join("c.toml"), COARSE).unwrap();
    fs::write(
        dir.join("range.csv"),
        "id,T_wall_C,flow_mln_min,conversion\n1,300,50,0.7\n2,325,50,1.3\n",
    )
    .unwrap();
    fs::write(
        dir.join("dup.csv"),
        "id,T_wall_C,flow_mln_min,conversion\n1,300,50,0.7\n2,300,50,0.71\n",
    )
    .unwrap();
    fs::write(dir.join("header.csv"), "id,T,flow,chi\n1,300,50,0.7\n").unwrap();
    for file in ["range.csv", "dup.csv", "header.csv"] {
        let out = run(&dir, &["fit", "--config", "c.toml", "--experiments", file]);
        assert_eq!(
            code(&out),
            4,
            "{file}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn newton_iteration_cap_exits_with_code_3() {
    let dir = scratch("nonconvergence");
    fs::write(
        dir.join("c.toml"),
        format!("{COARSE}[solver]\nmax_iter = 2\n"),
    )
    .unwrap();
    let out = run(&dir, &["simulate", "--config", "c.toml", "--out", "res"]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn equilibrium_rows_are_consistent() {
    let dir = scratch("equilibrium");
    fs::write(
        dir.join("c.toml"),
        "[equilibrium]\nt_min_c = 200.0\nt_max_c = 600.0\npoints = 5\npressures_bar = [1.0, 10.0]\n",
    )
    .unwrap();
    let out = run(
        &dir,
        &[
            "equilibrium",
            "--config",
            "c.toml",
            "--out",
            "eq",
            "--jobs",
            "2",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(dir.join("eq/equilibrium.csv")).unwrap();
    let rows: Vec<Vec<f64>> = rdr
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for r in &rows {
        assert!((r[1] - r[0] - 273.15).abs() < 1e-9);
        let x_sum: f64 = r[4..8].iter().sum();
        assert!((x_sum - 1.0).abs() < 1e-10);
        // CH4 and H2O form in a 1:2 ratio from a 1:4 feed
        assert!((r[7] - 2.0 * r[6]).abs() < 1e-10);
    }
    for w in rows[..5].windows(2) {
        assert!(w[1][3] < w[0][3]);
    }
    for i in 0..5 {
        assert!(rows[i + 5][3] > rows[i][3], "pressure raises conversion");
    }
    assert!(rows[4][3] < 0.5, "600 °C at 1 bar: {}", rows[4][3]);
}
