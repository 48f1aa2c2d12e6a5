mod common;

use std::process::Command;
use std::sync::Arc;

use knowpc::dsl::{parse_program, ActionPrimitive, PointClass};
use knowpc::harness::{cmd_eval, cmd_inspect, cmd_train, load_program, HarnessError, ARTIFACTS};
use knowpc::rollout::{cross_play, ProgramPolicy};
use knowpc::sim::DEFAULT_HORIZON;
use knowpc::synth::Mode;
use knowpc::GridLayout;

use common::*;

fn bundled(name: &str) -> GridLayout {
    GridLayout::bundled(name).unwrap()
}

#[test]
fn train_writes_artifacts_and_inspect_reads_them() {
    let dir = tempfile::tempdir().unwrap();
    let (run, summary) = cmd_train(
        &bundled("cramped_room"),
        Mode::KnowPc,
        &small_config(2),
        dir.path(),
    )
    .unwrap();
    for a in ARTIFACTS {
        assert!(dir.path().join(a).is_file(), "{a}");
    }
    assert_eq!(summary.best_id, run.best);
    assert_eq!(
        &load_program(&dir.path().join("best.ktp")).unwrap(),
        run.best_program()
    );

    let report = cmd_inspect(dir.path()).unwrap();
    assert_eq!(report.summary, summary);
    assert_eq!(report.table, run.search.table);
    let onion = ActionPrimitive(PointClass::OnionDisp);
    assert!(report.table.get(onion).is_some());
    assert_eq!(report.front.len(), run.front.len());
    let p = &report.probe;
    assert_eq!(p.steps, u64::from(DEFAULT_HORIZON));
    assert_eq!(p.per_module.iter().sum::<u64>(), p.steps - p.fallback);
    assert!(report.render().contains("GoIntOnionDisp"));
}

#[test]
fn inspect_names_the_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    cmd_train(
        &bundled("cramped_room"),
        Mode::KnowPc,
        &small_config(4),
        dir.path(),
    )
    .unwrap();
    std::fs::remove_file(dir.path().join("pareto.csv")).unwrap();
    match cmd_inspect(dir.path()) {
        Err(HarnessError::Missing(p)) => assert!(p.ends_with("pareto.csv")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn eval_matrix_is_symmetric_with_self_play_diagonal() {
    let programs = vec![
        ("listing1".to_string(), parse_program(LISTING1).unwrap()),
        (
            "onions".to_string(),
            parse_program("if HoldEmpty:\n\tGoIntOnionDisp\nif HoldOnion:\n\tGoIntIdlePot\n")
                .unwrap(),
        ),
        ("idle".to_string(), parse_program("").unwrap()),
    ];
    let layouts = [bundled("cramped_room"), bundled("counter_circuit_v2")];
    let ms = cmd_eval(&programs, &layouts, 2, 9);
    assert_eq!(ms.len(), 2);
    for (m, l) in ms.iter().zip(&layouts) {
        assert_eq!(m.layout, l.name);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(m.values[i][j], m.values[j][i]);
            }
            let p = ProgramPolicy::greedy(&programs[i].1);
            let sp = cross_play(&Arc::new(l.clone()), &p, &p, 2, 9, DEFAULT_HORIZON);
            assert_eq!(m.values[i][i], sp);
        }
        let n = m.normalized();
        assert!(n.diagonal().iter().all(|&v| v <= 1.0));
        assert_eq!(m.to_csv().lines().count(), 4);
    }
    assert!(ms[1].values[0][0] > 0.0, "listing 1 on counter_circuit_v2");
}

#[test]
fn cli_round_trip() {
    let bin = env!("CARGO_BIN_EXE_knowpc");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "iterations = 2\ninit_population = 10\npopulation = 4\nbootstrap_episodes = 10\nrefresh_every = 1\ncross_eval_pool = 4\ncross_eval_episodes = 1\nfinal_episodes = 1\nepisodes_per_eval = 1\n").unwrap();
    let run = dir.path().join("run");
    let out = Command::new(bin)
        .args([
            "train",
            "--layout",
            "cramped_room",
            "--seed",
            "5",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&run)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("final reward"));

    let out = Command::new(bin).arg("inspect").arg(&run).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("pareto front"));

    let listing = dir.path().join("listing1.ktp");
    std::fs::write(&listing, LISTING1).unwrap();
    let csv = dir.path().join("csv");
    let out = Command::new(bin)
        .args([
            "eval",
            "--episodes",
            "1",
            "--layouts",
            "cramped_room",
            "counter_circuit",
            "--programs",
        ])
        .arg(&listing)
        .arg(run.join("best.ktp"))
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(csv.join("counter_circuit.csv")).unwrap();
    assert!(text.starts_with("program,listing1,best\n"), "{text}");
    assert!(csv.join("cramped_room.normalized.csv").is_file());

    let out = Command::new(bin)
        .args(["train", "--layout", "no_such_kitchen", "--out"])
        .arg(&run)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
