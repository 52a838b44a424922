use std::path::PathBuf;
use std::process::{Command, Output};

use ensldpc::sim::CSV_HEADER;

fn ensldpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ensldpc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ensldpc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn simulate_writes_one_row_per_grid_point() {
    let out = scratch("grid.csv");
    let o = ensldpc(&[
        "simulate",
        "--code",
        "simplex63",
        "--method",
        "bp",
        "--ebn0",
        "0:0.5:7",
        "--target-errors",
        "5",
        "--max-trials",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 16);
    assert!(lines[1].starts_with("simplex63,bp,1,BP,8,0.000e0,"));
    assert!(lines[15].starts_with("simplex63,bp,1,BP,8,7.000e0,"));
    // single decoders report no recovery probability
    assert!(lines[1].contains(",,,"));
    assert!(stdout(&o).contains("simplex63 BP-8"));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let o = ensldpc(&[
        "simulate",
        "--code",
        "simplex63",
        "--method",
        "aed",
        "--M",
        "4",
        "--ebn0",
        "3",
        "--max-trials",
        "100",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines, [CSV_HEADER, lines[1]]);
    assert!(lines[1].starts_with("simplex63,aed,4,BP,8,3.000e0,100,"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("AED-4 BP-8"));
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_ensldpc"))
            .args([
                "simulate",
                "--code",
                "simplex63",
                "--method",
                "ned",
                "--ebn0",
                "2:1:4",
                "--target-errors",
                "20",
                "--max-trials",
                "3000",
            ])
            .env("ENSLDPC_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        o.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn configuration_errors_exit_with_2() {
    let cases: [&[&str]; 7] = [
        &["simulate", "--code", "hamming7", "--method", "bp", "--ebn0", "3"],
        &["simulate", "--code", "simplex63", "--method", "osd", "--ebn0", "3"],
        &[
            "simulate",
            "--code",
            "simplex63",
            "--method",
            "bp",
            "--M",
            "4",
            "--ebn0",
            "3",
        ],
        &[
            "simulate",
            "--code",
            "simplex63",
            "--method",
            "aed",
            "--sigma2-ned",
            "0.3",
            "--ebn0",
            "3",
        ],
        &["simulate", "--code", "simplex63", "--method", "bp", "--ebn0", "3:-1:1"],
        &["simulate", "--code", "pg273", "--method", "ml-oracle", "--ebn0", "3"],
        &["code-info", "nonexistent"],
    ];
    for args in cases {
        let o = ensldpc(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn code_info_lines() {
    let simplex = stdout(&ensldpc(&["code-info", "simplex63"]));
    assert!(simplex.starts_with("N=63 K=6 R=0.095 cyclic\n"), "{simplex}");
    let pg = stdout(&ensldpc(&["code-info", "pg273"]));
    assert!(pg.starts_with("N=273 K=191 R=0.70 cyclic\n"), "{pg}");
    assert!(pg.contains("273 checks of weight 17"));
    let fiveg = stdout(&ensldpc(&["code-info", "5g132"]));
    assert!(fiveg.starts_with("N=132 K=66 R=0.50 quasi-cyclic Z=11\n"), "{fiveg}");
}

#[test]
fn automorphism_reports() {
    let simplex = stdout(&ensldpc(&["check-automorphisms", "simplex63"]));
    assert!(simplex.contains("S0: 63/63 pass"));
    assert!(simplex.contains("S1: 6/6 pass"));
    assert!(simplex.contains("200/200 inputs"));
    let fiveg = stdout(&ensldpc(&["check-automorphisms", "5g132"]));
    assert!(fiveg.contains("QC: 11/11 pass"));
    assert!(fiveg.contains("non-equivariance witness after deleting 3 rows"));
}

#[test]
fn flags_override_config_file() {
    let cfg = scratch("run.cfg");
    std::fs::write(
        &cfg,
        "# small run\ncode = simplex63\nmethod = aed\nM = 4\nebn0 = 3\nmax-trials = 64\nseed = 3\n",
    )
    .unwrap();
    let path = cfg.to_str().unwrap();
    let from_file = stdout(&ensldpc(&["simulate", "--config", path]));
    assert!(from_file
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("simplex63,aed,4,BP,8,3.000e0,64,"));
    let overridden = stdout(&ensldpc(&["simulate", "--config", path, "--M", "2", "--ebn0", "4"]));
    assert!(overridden
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("simplex63,aed,2,BP,8,4.000e0,64,"));

    std::fs::write(&cfg, "code = simplex63\ncolour = blue\n").unwrap();
    assert_eq!(ensldpc(&["simulate", "--config", path]).status.code(), Some(2));
}

#[test]
fn uer_reports_each_iteration_count() {
    let o = ensldpc(&[
        "uer",
        "--code",
        "simplex63",
        "--iters",
        "32,8",
        "--ebn0",
        "3",
        "--max-trials",
        "500",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("simplex63,bp,1,BP,8,3.000e0,500,"));
    assert!(lines[2].starts_with("simplex63,bp,1,BP,32,3.000e0,500,"));
}
