use std::fs;
use std::path::Path;
use std::process::Command;

use dicke_thermo::runner::{
    compare_rows, converge_rows, sweep_rows, tc_rows, ConfigFile, Command as Cmd, Overrides, RunConfig, SweepRow,
};
use dicke_thermo::ModelKind;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dicke-thermo"))
}

fn config(cmd: Cmd, json: &str) -> RunConfig {
    let file: ConfigFile = serde_json::from_str(json).unwrap();
    RunConfig::resolve(cmd, file, &Overrides::default()).unwrap()
}

fn free_spin_f(beta: f64) -> f64 {
    -(2.0 * (0.5 * beta).cosh()).ln() / beta
}

#[test]
fn sweep_free_spins() {
    let cfg = config(Cmd::Sweep, r#"{"kinds": ["ExactEffective"], "lambda": 0, "atoms": [2], "beta": [1.0]}"#);
    let rows = sweep_rows(&cfg).unwrap();
    assert_eq!(rows.len(), 1);
    assert!((rows[0].f - free_spin_f(1.0)).abs() < 1e-12);
    assert!((rows[0].f + 0.8132616).abs() < 1e-7);
    assert!(rows[0].photon_density.is_none());
}

#[test]
fn sweep_rows_are_ordered() {
    let cfg = config(
        Cmd::Sweep,
        r#"{"kinds": ["LibertiZaffino", "ExactEffective"], "atoms": [3, 1], "beta": [0.5, 2.0]}"#,
    );
    let rows = sweep_rows(&cfg).unwrap();
    let keys: Vec<(ModelKind, usize, f64)> = rows.iter().map(|r| (r.kind, r.n_atoms, r.beta)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert_eq!(rows.len(), 8);
}

#[test]
fn dicke_cutoff_grows_with_coupling() {
    let cutoffs: Vec<usize> = ["0", "0.5", "1"]
        .iter()
        .map(|lam| {
            let cfg = config(
                Cmd::Sweep,
                &format!(r#"{{"kinds": ["Dicke"], "lambda": {lam}, "atoms": [4], "beta": [1.0], "tol": 1e-8}}"#),
            );
            sweep_rows(&cfg).unwrap()[0].cutoff_used.unwrap()
        })
        .collect();
    assert!(cutoffs.windows(2).all(|w| w[1] >= w[0]), "{cutoffs:?}");
}

#[test]
fn tc_examples() {
    let cfg = config(Cmd::Tc, r#"{"kinds": ["ExactEffective", "LibertiZaffino"], "epsilon": 1, "lambda": [1, 0.4, 0.3]}"#);
    let rows = tc_rows(&cfg).unwrap();
    assert_eq!(rows.len(), 6);
    let find = |k, l| rows.iter().find(|r| r.kind == k && r.lambda == l).unwrap();
    let exact = find(ModelKind::ExactEffective, 1.0);
    assert!((exact.t_c.unwrap() - 1.0 / (2.0 * 0.25f64.atanh())).abs() < 1e-9);
    assert!(!find(ModelKind::ExactEffective, 0.4).exists);
    let lz = find(ModelKind::LibertiZaffino, 0.3);
    assert!(lz.exists && lz.t_c.unwrap().is_finite());
}

#[test]
fn compare_at_zero_coupling_matches_closed_forms() {
    let cfg = config(Cmd::Compare, r#"{"lambda": 0, "atoms": [2, 4], "beta": [0.5, 1.0, 3.0], "tol": 1e-12}"#);
    let (compare, convergence) = compare_rows(&cfg).unwrap();
    assert_eq!(compare.len(), 3);
    assert_eq!(convergence.len(), 6);
    for row in &compare {
        let spin = free_spin_f(row.beta);
        let photon = (-(-row.beta).exp()).ln_1p().abs() / (row.beta * 4.0);
        assert!((row.f_exact - spin).abs() < 1e-12);
        assert!((row.f_dicke - (spin - photon)).abs() < 1e-9);
        assert_eq!(row.d_reslen, 0.0);
        assert_eq!(row.d_lz, 0.0);
        assert!((row.d_dicke - photon).abs() < 1e-9);
        assert!((row.f_limit_exact - spin).abs() < 1e-12);
    }
}

#[test]
fn compare_coefficient_limits() {
    let cfg = config(Cmd::Compare, r#"{"lambda": 0.5, "atoms": [4], "beta": [0.05, 50]}"#);
    let (compare, _) = compare_rows(&cfg).unwrap();
    assert!(compare[0].d_lz < compare[0].d_reslen);
    assert!(compare[1].d_reslen < compare[1].d_lz);

    // β = 1e-3 needs a boson cutoff far above the cap, so only the
    // effective-model discrepancies are checked there.
    let p = dicke_thermo::ModelParams::new(1.0, 0.5, 4).unwrap();
    let f = |k| dicke_thermo::thermo::free_energy_per_atom(&p, k, 1e-3, None).unwrap();
    let exact = f(ModelKind::ExactEffective);
    assert!((f(ModelKind::LibertiZaffino) - exact).abs() < (f(ModelKind::ReslenEffective) - exact).abs());
}

#[test]
fn converge_ladder() {
    let cfg = config(Cmd::Converge, r#"{"lambda": 0, "atoms": [2], "beta": [1.0], "tol": 1e-8}"#);
    let rows = converge_rows(&cfg).unwrap();
    let last = &rows[rows.len() - 2..];
    assert!((last[0].f - last[1].f).abs() < 1e-8);
    assert!(last[0].cutoff <= 40);
    assert!(rows.windows(2).all(|w| w[1].cutoff == w[0].cutoff + 10));

    let converged = |lam: &str| {
        let cfg = config(Cmd::Converge, &format!(r#"{{"lambda": {lam}, "atoms": [4], "beta": [1.0]}}"#));
        let rows = converge_rows(&cfg).unwrap();
        rows[rows.len() - 2].cutoff
    };
    let c: Vec<usize> = ["0", "0.5", "1"].iter().map(|l| converged(l)).collect();
    assert!(c.windows(2).all(|w| w[1] >= w[0]), "{c:?}");
}

fn write_config(dir: &Path, json: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let status = bin().arg("bogus").status().unwrap();
    assert_eq!(status.code(), Some(4));

    let empty = write_config(dir.path(), r#"{"beta": []}"#);
    let status = bin().args(["sweep", "--config"]).arg(&empty).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin().args(["sweep", "--config", "/no/such/file.json"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = bin()
        .args(["sweep", "--kinds", "ExactEffective", "--atoms", "2", "--beta-min", "0.5", "--beta-max", "1", "--beta-steps", "2"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "kind,n_atoms,beta,f,u,s,jx2_per_atom2,jz_per_atom,photon_density,cutoff_used"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn numeric_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // cutoff ladder starts above the hard cap
    let status = bin()
        .args(["converge", "--lambda", "5", "--atoms", "20", "--beta-min", "1", "--beta-max", "1", "--beta-steps", "1"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn json_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(
        dir.path(),
        &format!(
            r#"{{"kinds": ["Dicke", "ReslenEffective"], "lambda": 0.7, "atoms": [2, 3], "beta": [0.4, 1.7], "format": "json", "out": {:?}}}"#,
            dir.path().join("out")
        ),
    );
    let status = bin().args(["sweep", "--config"]).arg(&cfg_path).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("out/sweep.json")).unwrap();
    let parsed: Vec<SweepRow> = serde_json::from_str(&text).unwrap();

    let file = ConfigFile::load(&cfg_path).unwrap();
    let cfg = RunConfig::resolve(Cmd::Sweep, file, &Overrides::default()).unwrap();
    assert_eq!(parsed, sweep_rows(&cfg).unwrap());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, workers: &str| {
        let out = dir.path().join(format!("{sub}-{workers}"));
        let status = bin()
            .env("DICKE_THERMO_WORKERS", workers)
            .args([sub, "--lambda", "0.8", "--atoms", "2,4", "--beta-min", "0.5", "--beta-max", "2", "--beta-steps", "3"])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        out
    };
    for (sub, files) in [("sweep", &["sweep.csv"][..]), ("compare", &["compare.csv", "convergence.csv"][..])] {
        let a = run(sub, "1");
        let b = run(sub, "4");
        for f in files {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{sub}/{f}");
        }
    }
}
