use std::path::Path;
use std::process::Command;

use catoni_bandits::harness::config::random_class;
use catoni_bandits::harness::{
    aggregate, eluder_report, format_g12, parse_trace_csv, run_episode, run_experiment, run_seeds, trace_to_csv,
    write_runs, AgentKind, AgentSpec, Emit, InstanceSpec, RunSpec, TRACE_HEADER,
};
use catoni_bandits::hypothesis::eluder_trace;
use catoni_bandits::Error;
use proptest::prelude::*;

fn spec(horizon: usize, seeds: Vec<u64>) -> RunSpec {
    RunSpec::from_json(
        &format!(
            r#"{{
              "instance": {{ "preset": "random-class", "sigma": 0.2, "r": 20, "n_functions": 5, "n_actions": 3, "class_seed": 4 }},
              "agents": [
                {{ "preset": "catoni-oful", "constant_scale": 0.05 }},
                {{ "preset": "catoni-oful-cs", "constant_scale": 0.05 }},
                {{ "preset": "vacb", "constant_scale": 0.001 }},
                {{ "preset": "oful-ls", "constant_scale": 0.05 }}
              ],
              "horizon": {horizon},
              "seeds": {seeds:?},
              "burn_in": 10
            }}"#
        ),
        Path::new("inline"),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn g12_round_trips_to_twelve_digits(x in prop::num::f64::NORMAL) {
        let back: f64 = format_g12(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 1e-11 * x.abs());
    }
}

#[test]
fn trace_csv_round_trips() {
    let s = spec(60, vec![3]);
    let inst = s.instance.build(s.horizon).unwrap();
    for a in &s.agents {
        let mut agent = a.build(&inst, s.horizon).unwrap();
        let trace = run_episode(&inst, agent.as_mut(), s.horizon, 3).unwrap();
        let csv = trace_to_csv(&trace);
        assert!(csv.starts_with(TRACE_HEADER));
        let rows = parse_trace_csv(&csv, Path::new("mem")).unwrap();
        assert_eq!(rows.len(), trace.rows.len());
        for (a, b) in rows.iter().zip(&trace.rows) {
            assert_eq!((a.round, a.action, a.level, a.active_size), (b.round, b.action, b.level, b.active_size));
            assert!((a.cum_regret - b.cum_regret).abs() <= 1e-11 * b.cum_regret.abs().max(1.0));
            assert_eq!(a.weight.is_some(), b.weight.is_some());
        }
        // Re-encoding the parsed rows is a fixed point.
        let again = trace_to_csv(&catoni_bandits::harness::RegretTrace { rows, ..trace.clone() });
        assert_eq!(again, csv);
    }
}

#[test]
fn malformed_traces_are_parse_errors() {
    let p = Path::new("t.csv");
    assert!(matches!(parse_trace_csv("", p), Err(Error::Parse { .. })));
    assert!(matches!(parse_trace_csv("a,b\n", p), Err(Error::Parse { .. })));
    let short = format!("{TRACE_HEADER}\n1,0,1\n");
    assert!(matches!(parse_trace_csv(&short, p), Err(Error::Parse { .. })));
    let bad = format!("{TRACE_HEADER}\n1,x,0,0,0,,,,\n");
    assert!(matches!(parse_trace_csv(&bad, p), Err(Error::Parse { .. })));
}

#[test]
fn parallel_seeds_match_sequential_episodes() {
    let s = spec(50, vec![1, 2, 3, 4]);
    let inst = s.instance.build(s.horizon).unwrap();
    for a in &s.agents {
        let par = run_seeds(&inst, s.horizon, &s.seeds, || a.build(&inst, s.horizon)).unwrap();
        for (t, &seed) in par.iter().zip(&s.seeds) {
            let mut agent = a.build(&inst, s.horizon).unwrap();
            assert_eq!(t, &run_episode(&inst, agent.as_mut(), s.horizon, seed).unwrap());
        }
    }
}

#[test]
fn summary_statistics_follow_the_traces() {
    let s = spec(40, vec![1, 2, 3]);
    let runs = run_experiment(&s).unwrap();
    for run in &runs {
        let last = run.summary.final_row().unwrap();
        let finals: Vec<f64> = run.traces.iter().map(|t| t.final_regret()).collect();
        let mean = finals.iter().sum::<f64>() / 3.0;
        let var = finals.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / 2.0;
        assert!((last.mean_cum_regret - mean).abs() < 1e-12);
        assert!((last.std_cum_regret - var.sqrt()).abs() < 1e-12);
        assert_eq!(last.min, finals.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(last.max, finals.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        assert!(run.summary.rows.windows(2).all(|w| w[0].mean_cum_regret <= w[1].mean_cum_regret));
    }
    assert!(aggregate(&[]).is_err());
}

#[test]
fn written_outputs_are_byte_identical_across_runs() {
    let s = spec(40, vec![5, 6]);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_runs(&run_experiment(&s).unwrap(), d.path(), Emit::Csv).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 4 * 3);
    for n in names {
        let a = std::fs::read(dirs[0].path().join(&n)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&n)).unwrap();
        assert_eq!(a, b, "{n:?}");
    }
}

#[test]
fn eluder_report_uses_recorded_weights() {
    let s = spec(30, vec![1]);
    let inst = s.instance.build(s.horizon).unwrap();
    let mut agent = AgentSpec::new(AgentKind::CatoniOful).with_scale(0.05).build(&inst, s.horizon).unwrap();
    let trace = run_episode(&inst, agent.as_mut(), s.horizon, 1).unwrap();
    let rep = eluder_report(inst.class(), &trace.rows, 1.0).unwrap();
    let actions: Vec<usize> = trace.rows.iter().map(|r| r.action).collect();
    let weights: Vec<f64> = trace.rows.iter().map(|r| r.weight.unwrap()).collect();
    assert_eq!(rep.coefficients, eluder_trace(inst.class(), &actions, &weights, 1.0).unwrap());
    assert!(rep.dimension <= s.horizon as f64);
}

#[test]
fn sweep_and_random_class_presets_build() {
    let mut s = spec(20, vec![1]);
    s.instance.set_sigma(0.05);
    assert!(matches!(&s.instance, InstanceSpec::RandomClass(r) if r.sigma == 0.05));
    assert_eq!(random_class(3, 2, 9).unwrap(), random_class(3, 2, 9).unwrap());
    assert_ne!(random_class(3, 2, 9).unwrap(), random_class(3, 2, 10).unwrap());
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_catoni-bandit"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn cli_run_eluder_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.json",
        r#"{
          "instance": { "preset": "lb-plus", "sigma": 0.3, "r": 10 },
          "agents": [ { "preset": "catoni-oful", "constant_scale": 0.05 } ],
          "horizon": 30, "seeds": [1]
        }"#,
    );
    let out = dir.path().join("out");
    let st = cli().args(["run", cfg.to_str().unwrap(), "--seeds", "1,2", "--out", out.to_str().unwrap()]).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(out.join("catoni-oful_seed2.csv").exists());
    assert!(out.join("catoni-oful_summary.csv").exists());

    let class = write(dir.path(), "class.txt", &{
        let inst = InstanceSpec::LbPlus(serde_json::from_str(r#"{"sigma": 0.3, "r": 10}"#).unwrap()).build(30).unwrap();
        inst.class().to_text()
    });
    let trace = out.join("catoni-oful_seed1.csv");
    let st = cli()
        .args(["eluder", class.to_str().unwrap(), trace.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    assert!(out.join("eluder.csv").exists());

    let missing = dir.path().join("nope.json");
    assert_eq!(cli().args(["run", missing.to_str().unwrap()]).status().unwrap().code(), Some(3));
    let broken = write(dir.path(), "broken.json", "{ not json");
    assert_eq!(cli().args(["run", broken.to_str().unwrap()]).status().unwrap().code(), Some(2));
    let no_sweep = cli().args(["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert_eq!(no_sweep.code(), Some(2));
    let bad_trace = write(dir.path(), "bad.csv", "round\n1\n");
    let st = cli().args(["eluder", class.to_str().unwrap(), bad_trace.to_str().unwrap()]).status().unwrap();
    assert_eq!(st.code(), Some(2));
}

#[test]
fn cli_concentration_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{
          "instance": { "preset": "random-class", "sigma": 0.1, "r": 10, "n_functions": 3, "n_actions": 2 },
          "agents": [ { "preset": "oful-ls", "constant_scale": 0.05 } ],
          "horizon": 20, "seeds": [1, 2],
          "sweep": { "parameter": "horizon", "values": [10, 20] },
          "concentration": { "sigma": 0.5, "r": 100, "n": 50, "trials": 40 }
        }"#,
    );
    let out = dir.path().join("o");
    let st = cli().args(["concentration", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).output().unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let text = std::fs::read_to_string(out.join("concentration.csv")).unwrap();
    assert_eq!(text.lines().count(), 5);
    let st = cli()
        .args(["sweep", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--format", "json"])
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let points: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("sweep.json")).unwrap()).unwrap();
    assert_eq!(points.as_array().unwrap().len(), 2);
}
