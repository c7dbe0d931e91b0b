use std::path::Path;
use std::process::{Command, Output};

use mvnorm_pairs::cli::{keys_for, parse_config, read_report, run_experiment, Experiment, Report};
use mvnorm_pairs::Error;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvnorm-pairs")).args(args).output().expect("binary runs")
}

fn run(text: &str) -> Report {
    run_experiment(&parse_config(text).unwrap()).unwrap()
}

/// One small configuration per experiment.
const PRESETS: [&str; 6] = [
    "experiment=haar-check\nns=4\nsamples=5000",
    "experiment=pair-audit\nmodel=orthogonal_projection\nn=12\nsamples=4000",
    "experiment=bound\ntheorem=ksphere\nk=2\nn=30\na=1.5",
    "experiment=stein-check\ng=sine\nk=2\nsamples=5000\nnodes=32\npoints=3",
    "experiment=w1-compare\nmodel=unitary_projection\nn=10\nm=150\nreps=3\ndirections=16",
    "experiment=diag-example\nn=10\na=2,5,10\nm=150\nreps=3\ndirections=16",
];

#[test]
fn uthm_example_reaches_its_value() {
    let r = run("experiment=bound\ntheorem=uthm\nk=2\nn=20");
    assert!(r.pass);
    assert!((r.results["value"].as_f64().unwrap() - 0.3).abs() < 1e-15);
}

#[test]
fn config_errors_name_keys_and_lines() {
    match parse_config("") {
        Err(Error::MissingKeys(keys)) => assert!(keys.contains(&"experiment".to_string())),
        other => panic!("expected missing keys, got {other:?}"),
    }
    match parse_config("experiment=pair-audit\nmodel=iid_sum\nn=abc") {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(parse_config("n=abc"), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn mix_with_identity_gram() {
    let r = run("experiment=bound\ntheorem=mix\nk=2\nn=50\nc=1,0;0,1");
    let want = 2f64.sqrt() * 2.0 / 49.0;
    assert!((r.results["value"].as_f64().unwrap() - want).abs() < 1e-14);
}

#[test]
fn diag_example_gram_entries() {
    let r = run("experiment=diag-example\nn=10\na=2,5,10\nm=100\nreps=3\ndirections=8");
    let gram = &r.results["gram"];
    let a = [2.0f64, 5.0, 10.0];
    for i in 0..3 {
        for j in 0..3 {
            let want = 10.0 * (a[i.min(j)] / a[i.max(j)]).sqrt();
            assert!((gram[i][j].as_f64().unwrap() - want).abs() <= 1e-12, "({i},{j})");
        }
    }
}

#[test]
fn iid_audit_slope_near_minus_identity() {
    let r = run("experiment=pair-audit\nmodel=iid_sum\nk=2\nn=20\nsamples=30000");
    let c = r.checks.iter().find(|c| c.name == "max |slope + I|").unwrap();
    assert!(c.pass, "slope deviation {}", c.value);
}

#[test]
fn presets_cover_every_module_and_embed_config() {
    let mut touched = std::collections::BTreeSet::new();
    for p in PRESETS {
        let r = run(p);
        assert!(r.pass, "{p}: {:?}", r.failed_checks());
        let exp: Experiment = r.experiment.parse().unwrap();
        for spec in keys_for(exp) {
            if spec.name != "out" && (spec.default.is_some() || p.contains(&format!("{}=", spec.name))) {
                assert!(r.config.contains_key(spec.name), "{p}: config lacks {}", spec.name);
            }
        }
        assert!(r.config.contains_key("seed"));
        assert!(r.wall_clock_seconds.is_none());
        // each module leaves a trace in the results it produced
        let res = &r.results;
        match exp {
            Experiment::HaarCheck => {
                assert!(res["records"][0]["exact"].is_f64());
                touched.extend(["haar", "matrix"]);
            }
            Experiment::PairAudit => {
                assert!(res["audit"]["slope_matrix"].is_array());
                assert!(res["bounds"][0]["value"].is_f64());
                touched.extend(["pairs", "bounds"]);
            }
            Experiment::Bound => assert_eq!(res["theorem"], "ksphere"),
            Experiment::SteinCheck => {
                assert!(res["points"][0]["value"]["residual"]["se"].is_f64());
                touched.insert("stein");
            }
            Experiment::W1Compare => {
                assert!(res["rows"][0]["self_distance"]["sd"].is_f64());
                touched.insert("transport");
            }
            Experiment::DiagExample => assert!(res["d_dt_deviation"].as_f64().unwrap() <= 1e-10),
        }
    }
    assert_eq!(touched.len(), 6);
}

#[test]
fn timing_adds_wall_clock() {
    let r = run("experiment=bound\ntheorem=uthm\nk=2\nn=20\ntiming=true");
    assert!(r.wall_clock_seconds.is_some());
}

#[test]
fn exit_codes() {
    let ok = bin(&["bound", "uthm", "--k", "2", "--n", "20"]);
    assert_eq!(ok.status.code(), Some(0));
    let fail = bin(&["stein-check", "samples=2000", "nodes=16", "points=2", "tolerance=0"]);
    assert_eq!(fail.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&fail.stderr).contains("FAIL max |residual|"));
    let err = bin(&["bound", "basic", "--k", "2"]);
    assert_eq!(err.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&err.stderr).contains("n"));
    assert_eq!(bin(&["haar-check", "--nonsense", "1"]).status.code(), Some(1));
    assert_eq!(bin(&["bound", "uthm", "--k", "2", "--n", "20", "--threads", "0"]).status.code(), Some(1));
}

#[test]
fn reports_and_csv_from_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = d.join("w1.conf");
    std::fs::write(&cfg, "# small comparison\nexperiment = w1-compare\nmodel = spherical\nn = 20\nm = 100,200\nreps = 3\n").unwrap();
    let path = |name: &str| d.join(name).display().to_string();
    let cfg = cfg.display().to_string();
    let first = bin(&["w1-compare", "--config", &cfg, "--out", &path("a.json"), "--csv", &path("a.csv"), "--seed", "5"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = bin(&["w1-compare", "--config", &cfg, "--seed", "5", "--threads", "1", "--out", &path("b.json")]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(std::fs::read(path("a.json")).unwrap(), std::fs::read(path("b.json")).unwrap());

    let csv = std::fs::read_to_string(path("a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,w1,self,debiased,bound,pass"));
    assert_eq!(lines.count(), 2);

    let report = read_report(Path::new(&path("a.json"))).unwrap();
    assert_eq!(report.seed, 5);
    assert_eq!(report.config["seed"], 5);
    let stdout = bin(&["w1-compare", "--config", &cfg, "--seed", "5"]);
    assert_eq!(stdout.stdout, std::fs::read(path("a.json")).unwrap());
}

#[test]
fn same_seed_same_bytes() {
    for p in PRESETS {
        assert_eq!(run(p).to_json().unwrap(), run(p).to_json().unwrap(), "{p}");
    }
    let a = run("experiment=pair-audit\nmodel=iid_sum\nn=20\nsamples=4000\nseed=1");
    let b = run("experiment=pair-audit\nmodel=iid_sum\nn=20\nsamples=4000\nseed=2");
    assert_ne!(a.results, b.results);
}
