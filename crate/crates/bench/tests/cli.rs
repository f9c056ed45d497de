use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use goalvi::problems::{parse_mdp_file, Layout, Noise};
use goalvi::{sup_norm_diff, Pipeline};
use goalvi_bench::{emit_scaling_table, run_jobs, run_suite, ProblemSource, RunSettings};

fn goalvi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_goalvi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(Result::unwrap)
        .collect()
}

fn settings(solvers: &[Pipeline]) -> RunSettings {
    RunSettings {
        solvers: solvers.to_vec(),
        ..Default::default()
    }
}

#[test]
fn chain3_suite_with_all_solvers() {
    let p = ProblemSource::Chain3.load(0.99).unwrap();
    let runs = run_jobs(
        &[("chain3".into(), ProblemSource::Chain3)],
        &RunSettings::default(),
    );
    assert_eq!(runs.len(), 6);
    assert!(runs.iter().all(|r| r.ok()));
    let values: Vec<_> = Pipeline::ALL
        .iter()
        .map(|s| s.run(&p, &RunSettings::default().cfg).value().clone())
        .collect();
    for a in &values {
        for b in &values {
            assert!(sup_norm_diff(a, b).unwrap() <= 0.198);
        }
    }
    for r in &runs {
        assert!(r.final_residual.unwrap() <= r.eps);
    }
}

#[test]
fn pvi1_beats_vi_on_grid_a() {
    let dir = tempfile::tempdir().unwrap();
    let sources = [
        ProblemSource::grid(Layout::A, Noise::Standard),
        ProblemSource::grid(Layout::A, Noise::Noisy),
    ];
    let out = run_suite(
        &sources,
        &settings(&[Pipeline::Vi, Pipeline::Pvi1]),
        dir.path(),
    )
    .unwrap();
    assert!(out.all_ok());
    for pair in out.runs.chunks(2) {
        assert_eq!(
            (pair[0].solver.as_str(), pair[1].solver.as_str()),
            ("vi", "pvi1")
        );
        assert!(pair[1].backups < pair[0].backups, "{}", pair[0].problem);
    }
    assert_eq!(records(&dir.path().join("summary.csv")).len(), 4);
}

#[test]
fn summary_schema_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = goalvi(&[
        "suite",
        "--layout",
        "chain3,split",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        [
            "problem",
            "solver",
            "num_states",
            "eps",
            "delta",
            "discount",
            "iterations",
            "backups",
            "skip_tests",
            "converged",
            "final_residual",
            "wall_time_ms"
        ]
    );
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 12);
    for row in &rows {
        assert_eq!(&row[9], "true");
        let trace = fs::read_to_string(
            dir.path()
                .join("traces")
                .join(format!("{}__{}.txt", &row[0], &row[1])),
        )
        .unwrap();
        let residuals: Vec<f64> = trace.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(residuals.len(), row[6].parse::<usize>().unwrap());
    }
}

#[test]
fn empty_solver_selection_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = goalvi(&[
        "suite",
        "--layout",
        "chain3",
        "--solver",
        "",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
    let err = run_suite(&[ProblemSource::Chain3], &settings(&[]), &out_dir).unwrap_err();
    assert!(err.is_usage());
    assert!(!out_dir.exists());
}

#[test]
fn bad_arguments_exit_with_usage_code() {
    for args in [
        &["suite", "--solver", "pvi2"][..],
        &["suite", "--eps", "0"],
        &["suite", "--discount", "1"],
        &["scale", "--copies", "2,1"],
        &["solve", "--layout", "a", "--solver", "vi,gs"],
        &["frobnicate"],
    ] {
        assert_eq!(goalvi(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(goalvi(&["--help"]).status.code(), Some(0));
}

#[test]
fn unreadable_problem_file_is_a_run_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("broken.mdp");
    fs::write(&bad, "mdp 2 1 0.9\ngoal 0\ndone 1\nt 0 0 0 0.5\n").unwrap();
    let missing = dir.path().join("missing.mdp");
    let out_dir = dir.path().join("out");
    let out = goalvi(&[
        "suite",
        "--layout",
        "chain3",
        "--problem",
        bad.to_str().unwrap(),
        "--problem",
        missing.to_str().unwrap(),
        "--solver",
        "vi",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 4"), "{stderr}");
    let rows = records(&out_dir.join("summary.csv"));
    let converged: Vec<(&str, &str)> = rows.iter().map(|r| (&r[0], &r[9])).collect();
    assert_eq!(
        converged,
        [
            ("chain3", "true"),
            ("broken", "false"),
            ("missing", "false")
        ]
    );
}

#[test]
fn exported_grid_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.mdp");
    let out = goalvi(&[
        "export",
        "--layout",
        "a",
        "--noise",
        "noisy",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let p = parse_mdp_file::<f64>(&fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(
        p,
        ProblemSource::grid(Layout::A, Noise::Noisy)
            .load(0.99)
            .unwrap()
    );

    let out = goalvi(&[
        "solve",
        "--problem",
        file.to_str().unwrap(),
        "--solver",
        "pvi1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("num_states      51"), "{text}");
}

#[test]
fn scaling_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = settings(&[Pipeline::Vi, Pipeline::Pvi1]);
    let rows = emit_scaling_table(Layout::A, Noise::Standard, &[1, 2, 4], &s, dir.path()).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.converged));
    let vi: Vec<u64> = rows
        .iter()
        .filter(|r| r.solver == "vi")
        .map(|r| r.backups.unwrap())
        .collect();
    assert!(vi.windows(2).all(|w| w[0] < w[1]), "{vi:?}");
    for r in &rows {
        let want = if r.solver == "vi" {
            1.0
        } else {
            vi[0] as f64 / r.backups.unwrap() as f64
        };
        if r.copies == 1 {
            assert_eq!(r.vi_backup_ratio, Some(want));
        }
    }
    assert_eq!(records(&dir.path().join("scaling.csv")).len(), 6);

    // one copy reproduces the plain suite run
    let single = emit_scaling_table(Layout::A, Noise::Standard, &[1], &s, dir.path()).unwrap();
    let suite = run_jobs(
        &[(
            "grid-a".into(),
            ProblemSource::grid(Layout::A, Noise::Standard),
        )],
        &s,
    );
    for (a, b) in single.iter().zip(&suite) {
        assert_eq!(a.solver, b.solver);
        assert_eq!(a.num_states, b.num_states);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.backups, b.backups);
        assert_eq!(a.skip_tests, b.skip_tests);
        assert_eq!(a.final_residual, b.final_residual);
    }
}

#[test]
fn reruns_differ_only_in_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = goalvi(&[
            "suite",
            "--layout",
            "chain3,a",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
        let mut rows = records(&out.join("summary.csv"));
        for r in &mut rows {
            let mut fields: Vec<&str> = r.iter().collect();
            fields.pop();
            *r = csv::StringRecord::from(fields);
        }
        (
            rows,
            fs::read_to_string(out.join("traces/grid-a-noisy__pvi.txt")).unwrap(),
        )
    };
    assert_eq!(run("first"), run("second"));
}
