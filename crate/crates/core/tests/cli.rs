//! Command-line behaviour, driven in-process through `cli::run`.

use pure_shuffle::cli::run;

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pure-shuffle").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn rows(out: &str) -> Vec<&str> {
    out.lines().filter(|l| !l.starts_with('#')).collect()
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--protocol", "binary", "--epsilon", "1", "--n", "100", "--trials", "2000", "--seed", "7"];
    let (code, first, _) = call(&args);
    assert_eq!(code, 0);
    let (_, second, _) = call(&args);
    assert_eq!(first, second);
    let body = rows(&first);
    assert_eq!(body.len(), 2);
    assert!(body[0].starts_with("protocol,epsilon,n,trials,seed,mean_abs_error"));
    assert!(body[1].starts_with("binary,1,100,2000,7,"));
    assert!(first.starts_with("# pure-shuffle "));
    assert!(first.contains("# seed = 7"));
}

#[test]
fn thread_count_does_not_change_results() {
    let base = ["simulate", "--n", "30", "--trials", "500", "--seed", "3"];
    let (_, a, _) = call(&[&base[..], &["--threads", "1"]].concat());
    let (_, b, _) = call(&[&base[..], &["--threads", "3"]].concat());
    assert_eq!(rows(&a), rows(&b));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["simulate", "--trials", "0"]).0, 2);
    assert_eq!(call(&["construct", "nonsense"]).0, 2);
    assert_eq!(call(&["no-such-command"]).0, 2);
    assert_eq!(call(&["audit", "--d", "8", "--s", "1", "--p", "0.1"]).0, 2);
    assert_eq!(call(&["simulate", "--threads", "0"]).0, 2);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("search-params"));
}

#[test]
fn audit_exit_codes() {
    let (code, out, _) = call(&["audit", "--d", "31", "--s", "0.5", "--p", "0.01", "--n", "10"]);
    assert_eq!(code, 0);
    let body = rows(&out);
    assert_eq!(body[0], "epsilon_hat,worst_c,worst_t,feasible");
    assert!(body[1].ends_with(",true"));

    let (code, out, _) = call(&["audit", "--n", "50", "--p", "0", "--assert-epsilon", "1"]);
    assert_eq!(code, 1);
    assert!(rows(&out)[1].starts_with("inf,"));
    assert!(rows(&out)[1].ends_with(",false"));

    assert_eq!(call(&["audit", "--epsilon", "1", "--n", "50", "--assert-epsilon", "1"]).0, 0);
    assert_eq!(call(&["audit", "--epsilon", "1", "--n", "50", "--assert-epsilon", "0.5"]).0, 1);
}

#[test]
fn audit_curve() {
    let (code, out, _) = call(&["audit", "--d", "7", "--s", "1", "--p", "0.2", "--n", "5", "--curve", "2"]);
    assert_eq!(code, 0);
    let body = rows(&out);
    assert_eq!(body[0], "t,log_ratio");
    assert_eq!(body.len(), 1 + 36);
}

#[test]
fn figure2_dump() {
    let (code, out, _) = call(&["construct", "figure2"]);
    assert_eq!(code, 0);
    let body = rows(&out);
    assert_eq!(body[0], "value,mass_r0,mass_r1,log2_mass_r0,log2_mass_r1");
    let data: Vec<Vec<&str>> = body[1..].iter().map(|l| l.split(',').collect()).collect();
    assert_eq!(data.len(), 32);
    for v in 0..32 {
        assert_eq!(data[v][1], data[31 - v][2], "reflection at {v}");
        assert_eq!(data[v][3], data[31 - v][4]);
    }
}

#[test]
fn figure3_dump() {
    let (code, out, _) = call(&["construct", "figure3"]);
    assert_eq!(code, 0);
    assert!(out.contains("# tv_distance = 0.98"));
    let body = rows(&out);
    assert_eq!(body[0], "value,mass_y0,mass_y1");
    assert_eq!(body.len(), 1 + 101);
    assert!(body[1].starts_with("0,"));
    assert!(body[101].starts_with("100,"));
}

#[test]
fn gaussian_pair_echoes_solver_outputs() {
    let (code, out, _) = call(&["construct", "gaussian-pair", "--gamma", "1e-4", "--epsilon", "0.1"]);
    assert_eq!(code, 0);
    let line = out.lines().find(|l| l.starts_with("# pair = ")).unwrap();
    for key in ["s = ", "ell_star = ", "w = ", "c = ", "m = "] {
        assert!(line.contains(key), "{line}");
    }
    assert_eq!(call(&["construct", "gaussian-pair", "--gamma", "0.7"]).0, 2);
}

#[test]
fn config_file_and_precedence() {
    let dir = std::env::temp_dir().join(format!("pure-shuffle-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("good.toml");
    std::fs::write(&good, "[binary]\nn = 30\nd = 7\ns = 0.875\np = 0.36\n[experiment]\ntrials = 50\nseed = 4\n").unwrap();
    let (code, out, _) = call(&["simulate", "--config", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(rows(&out)[1].starts_with("binary,1,30,50,4,"));
    let (_, out, _) = call(&["simulate", "--config", good.to_str().unwrap(), "--n", "20", "--seed", "9"]);
    assert!(rows(&out)[1].starts_with("binary,1,20,50,9,"));

    let bad = dir.join("bad.toml");
    std::fs::write(&bad, "[binary]\nn = 30\nunknown_key = 1\n").unwrap();
    let (code, _, err) = call(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown"));
    assert_eq!(call(&["simulate", "--config", dir.join("missing.toml").to_str().unwrap()]).0, 2);

    let target = dir.join("out.csv");
    let (code, out, _) = call(&["dual-cert", "--k", "2", "--m", "3", "--epsilon", "0.1", "--output", target.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    assert!(std::fs::read_to_string(&target).unwrap().contains("k,m,rho,zeta,points,worst_slack,holds"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn other_subcommands() {
    let (code, out, _) = call(&["search-params", "--epsilon", "1", "--n", "50"]);
    assert_eq!(code, 0);
    assert!(rows(&out)[1].starts_with("1,50,7,"));

    let (code, out, _) = call(&["mgf-check", "--source", "figure3"]);
    assert_eq!(code, 0);
    let sup: f64 = rows(&out)[1].split(',').next().unwrap().parse().unwrap();
    assert!(sup.is_finite());

    let (code, out, _) = call(&["mgf-check", "--d", "7", "--s", "0.875", "--p", "0.1", "--n", "50", "--grid-points", "101"]);
    assert_eq!(code, 0);
    assert!(out.contains("grid_points = 101"));

    let (code, out, _) = call(&["pmk-table", "--d", "5", "--s", "1", "--m-max", "2"]);
    assert_eq!(code, 0);
    let body = rows(&out);
    assert_eq!(body[0], "m,k,probability");
    assert_eq!(body.len(), 1 + 1 + 6 + 11);

    let (code, out, _) = call(&["simulate", "--protocol", "histogram", "--n", "20", "--buckets", "3", "--trials", "20"]);
    assert_eq!(code, 0, "{out}");
    assert!(rows(&out)[1].starts_with("histogram,1,20,20,0,"));
    assert_eq!(call(&["simulate", "--protocol", "histogram", "--n", "20", "--inputs", "all-zeros", "--trials", "5"]).0, 2);
}
