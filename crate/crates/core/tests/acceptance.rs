//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to
//! see the report.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use readiness_core::assess::score_results;
use readiness_core::provenance::{emit_provenance, recompute_assessment};
use readiness_core::scoring::{
    compute_alpha, compute_rcs, compute_ros, compute_rrs, derive_proxy_evidence, gate, raws, ExecutionEvidence, Probe,
};
use readiness_core::stats::{
    auc_roc, benjamini_hochberg, grid_configurations, kendall_tau, kruskal_wallis, load_corpus, run_diagnostics, DiagnosticsOptions,
};
use readiness_core::{
    acquire_repository, aggregate_failure_mode, assess_snapshot, Category, FailureMode, Patterns, RubricProfile, SubMetricId,
    SubMetricResult,
};

const ROS_TOL: f64 = 0.05;
const RCS_TOL: f64 = 0.05;
const EXACT: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn all(checks: &[(bool, String)]) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|(ok, _)| !ok).map(|(_, d)| d.as_str()).collect();
    if failed.is_empty() {
        outcome(true, checks.iter().map(|(_, d)| d.as_str()).collect::<Vec<_>>().join("; "))
    } else {
        outcome(false, failed.join("; "))
    }
}

/// Per-mode (I, X, N, E′) component means, RRS mean, and the printed ROS and
/// RCS, as published for each failure mode.
const ROS_TABLE: [(FailureMode, f64, f64, f64); 5] = [
    (FailureMode::Success, 100.0, 14.6, 59.4),
    (FailureMode::InstallDep, 1.3, 26.8, 19.8),
    (FailureMode::MissingModule, 3.8, 7.0, 24.6),
    (FailureMode::MissingData, 8.6, 6.4, 31.7),
    (FailureMode::CodeError, 13.3, 14.3, 35.7),
];
const ROS_PRINTED: [f64; 5] = [100.0, 13.5, 40.5, 54.5, 55.1];

fn table5() -> Outcome {
    let start = Instant::now();
    let mut checks = Vec::new();
    for (i, (mode, n_mean, rrs, rcs_printed)) in ROS_TABLE.into_iter().enumerate() {
        // The binary probes come from the proxy definitions; N is the
        // printed mean rate.
        let mut ev = derive_proxy_evidence::<f64>(mode, 0, 1).unwrap();
        ev.set(Probe::NotebookRate, Some(n_mean)).unwrap();
        let ros = compute_ros(&ev).unwrap();
        let alpha = compute_alpha(&ev);
        let rcs = compute_rcs(rrs, Some(ros), alpha);
        let ros_ok = (ros - ROS_PRINTED[i]).abs() <= ROS_TOL;
        let rcs_ok = (rcs - rcs_printed).abs() <= RCS_TOL;
        checks.push((
            ros_ok && rcs_ok,
            format!("{}: ROS {ros:.3} (reference {}), RCS {rcs:.3} (reference {rcs_printed})", mode.as_str(), ROS_PRINTED[i]),
        ));
    }
    let elapsed = start.elapsed().as_secs_f64();
    checks.push((elapsed < 1.0, format!("runtime {elapsed:.4}s")));
    all(&checks)
}

fn alpha() -> Outcome {
    let four = ExecutionEvidence::from_components([
        (Probe::Install, 100.0),
        (Probe::Execution, 0.0),
        (Probe::NotebookRate, 50.0),
        (Probe::ImportRate, 100.0),
    ])
    .unwrap();
    let full = ExecutionEvidence::from_components(Probe::ALL.map(|p| (p, 100.0))).unwrap();
    let only_t = ExecutionEvidence::from_components([(Probe::Tests, 100.0)]).unwrap();
    let (a, b, c) = (compute_alpha(&four), compute_alpha(&full), compute_alpha(&only_t));
    all(&[
        (a == 0.525, format!("{{I,X,N,E'}} -> {a}")),
        (b == 0.70, format!("full -> {b}")),
        (c == 0.10, format!("only T -> {c}")),
    ])
}

const TABLE_GATES: [(f64, f64); 5] = [(40.0, 1.5), (30.0, 1.5), (20.0, 1.2), (25.0, 1.2), (30.0, 1.2)];

fn gate_exactness() -> Outcome {
    let mut worst_half = 0.0f64;
    let mut worst_cont = 0.0f64;
    for (tau, k) in TABLE_GATES {
        worst_half = worst_half.max((gate(tau / 2.0, tau, k).unwrap() - 2f64.powf(-k) * tau / 100.0).abs());
        let below = gate(tau * (1.0 - f64::EPSILON), tau, k).unwrap();
        worst_cont = worst_cont.max((below - gate(tau, tau, k).unwrap()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let triples = 20_000;
    let mut violations = 0;
    for _ in 0..triples {
        let tau = rng.gen_range(1.0..=100.0);
        let k = rng.gen_range(1.0..4.0);
        let a: f64 = rng.gen_range(0.0..=100.0);
        let b: f64 = rng.gen_range(0.0..=100.0);
        let (lo, hi) = (a.min(b), a.max(b));
        if gate(lo, tau, k).unwrap() > gate(hi, tau, k).unwrap() {
            violations += 1;
        }
    }
    all(&[
        (worst_half <= EXACT, format!("half-threshold error {worst_half:.1e}")),
        (worst_cont <= EXACT, format!("continuity gap {worst_cont:.1e}")),
        (violations == 0, format!("{violations} monotonicity violations in {triples} triples")),
    ])
}

fn results_from(scores: &[Option<f64>]) -> Vec<SubMetricResult> {
    SubMetricId::ALL.iter().zip(scores).map(|(&id, &s)| SubMetricResult::new(id, s, vec![])).collect()
}

fn rrs_properties() -> Outcome {
    let rubric = RubricProfile::default_profile();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut out_of_range, mut non_monotone) = (0, 0);
    let trials = 5_000;
    for _ in 0..trials {
        let scores: Vec<Option<f64>> = (0..26).map(|_| rng.gen_bool(0.85).then(|| rng.gen_range(0.0..=100.0))).collect();
        let base = score_results(results_from(&scores), &rubric, None).unwrap().rrs();
        if !(0.0..=100.0).contains(&base) {
            out_of_range += 1;
        }
        let i = rng.gen_range(0..26);
        let mut raised = scores.clone();
        if let Some(s) = raised[i] {
            raised[i] = Some((s + rng.gen_range(0.0..=100.0)).min(100.0));
        }
        if score_results(results_from(&raised), &rubric, None).unwrap().rrs() < base - 1e-9 {
            non_monotone += 1;
        }
    }
    let worked = compute_rrs(&raws([50.0, 40.0, 30.0, 25.0, 30.0]), &rubric, Some(100.0)).unwrap().rrs;
    let at_boundary = compute_rrs(&raws([10.0, 10.0, 100.0, 100.0, 100.0]), &rubric, Some(50.0)).unwrap();
    let below = compute_rrs(&raws([9.99, 10.0, 100.0, 100.0, 100.0]), &rubric, Some(50.0)).unwrap();
    let boundary_ok = at_boundary.hard_penalty.points == 0.0 && at_boundary.seed_penalty == 0.0 && below.hard_penalty.points == 20.0;
    all(&[
        (out_of_range == 0, format!("{out_of_range} of {trials} outside [0,100]")),
        (non_monotone == 0, format!("{non_monotone} monotonicity violations")),
        (worked == 37.75, format!("worked example {worked}")),
        (boundary_ok, format!("E=A=10, sigma=50 -> {}; E=9.99 -> {}", at_boundary.hard_penalty.points, below.hard_penalty.points)),
    ])
}

const BIOINFORMATICS_VERBATIM: &str = r#"name: bioinformatics-v1
version: "1.0"
categories:
  E: {weight: 0.35, tau: 40, k: 1.5}
  A: {weight: 0.40, tau: 30, k: 1.5}  # FAIR data priority
  D: {weight: 0.10, tau: 20, k: 1.2}
  C: {weight: 0.05, tau: 25, k: 1.2}
  S: {weight: 0.10, tau: 30, k: 1.2}
"#;

fn rubric() -> Outcome {
    let bio = RubricProfile::from_yaml(BIOINFORMATICS_VERBATIM);
    let loads = bio.as_ref().is_ok_and(|r| r.weight(Category::A) == 0.40);
    let heavy = BIOINFORMATICS_VERBATIM.replace("weight: 0.10, tau: 30", "weight: 0.12, tau: 30");
    let rejected = RubricProfile::from_yaml(&heavy).is_err();
    let mut mismatches = Vec::new();
    if let Ok(bio) = &bio {
        let default = RubricProfile::default_profile();
        for f in common::ten_fixtures() {
            let snap = f.snapshot();
            let record = emit_provenance(&assess_snapshot(&snap, &default, &Patterns::default()).unwrap(), &snap);
            let direct = assess_snapshot(&snap, bio, &Patterns::default()).unwrap();
            if recompute_assessment(&record, bio).ok().as_ref() != Some(&direct) {
                mismatches.push(f.name.clone());
            }
        }
    }
    all(&[
        (loads, "verbatim bioinformatics-v1 loads and validates".to_string()),
        (rejected, "weight sum 1.02 rejected".to_string()),
        (mismatches.is_empty(), format!("recompute == direct on 10 fixtures (mismatches: {mismatches:?})")),
    ])
}

fn submetric_formulas() -> Outcome {
    let rubric = RubricProfile::default_profile();
    let tests = |n: usize| {
        let mut f = common::Fixture::new("t").file("main.py", "x = 1\n");
        for i in 0..n {
            f = f.file(&format!("tests/test_{i}.py"), "def test_a():\n    pass\n");
        }
        f.assess(&rubric).score_of(SubMetricId::TestFilePresence)
    };
    let t = [tests(0), tests(1), tests(3)];
    let seeds = common::Fixture::new("s")
        .file("a.py", "import random\nrandom.seed(1)\nrandom.random()\n")
        .file("b.py", "import numpy as np\nnp.random.rand(2)\n")
        .file("c.py", "import torch\ntorch.manual_seed(0)\ntorch.randn(1)\n")
        .assess(&rubric)
        .score_of(SubMetricId::SeedManagement);
    let order = common::Fixture::new("n")
        .notebook("a.ipynb", common::counted_notebook(&[Some(1), Some(2)]))
        .notebook("b.ipynb", common::counted_notebook(&[Some(2), Some(1)]))
        .notebook("c.ipynb", common::counted_notebook(&[Some(1), Some(5), Some(9)]))
        .notebook("d.ipynb", common::counted_notebook(&[Some(4), Some(3)]))
        .assess(&rubric)
        .score_of(SubMetricId::NotebookExecOrder);
    let imports = common::missing_module_like().assess(&rubric).score_of(SubMetricId::ImportResolvability);
    all(&[
        (t == [Some(0.0), Some(50.0), Some(100.0)], format!("test files 0/1/3 -> {t:?}")),
        (seeds.is_some_and(|s| (s - 200.0 / 3.0).abs() < EXACT), format!("seeded 2/3 -> {seeds:?}")),
        (order == Some(50.0), format!("ordered 2/4 -> {order:?}")),
        (imports == Some(0.0), format!("no manifest + third-party imports -> {imports:?}")),
    ])
}

fn auc_pairs_ok(rng: &mut ChaCha8Rng) -> (usize, usize) {
    let mut bad = 0;
    let corpora = 200;
    for _ in 0..corpora {
        let n = rng.gen_range(2..=200);
        let scores: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0u32..50))).collect();
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        if (auc_roc(&scores, &labels).unwrap() - common::auc_pairs(&scores, &labels)).abs() > EXACT {
            bad += 1;
        }
    }
    (bad, corpora)
}

fn statistics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (auc_bad, corpora) = auc_pairs_ok(&mut rng);
    let h = kruskal_wallis(&[vec![1.0f64, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]]).unwrap().h;
    let mut p = vec![0.003f64];
    p.extend((1..26).map(|i| 0.2 + 0.03 * f64::from(i)));
    let q = benjamini_hochberg(&p).unwrap()[0];
    let mut tau_bad = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..60);
        let a: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0u32..10))).collect();
        let b: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0u32..10))).collect();
        let got = kendall_tau(&a, &b).unwrap();
        let want = common::kendall_pairs(&a, &b);
        let same = match (got, want) {
            (Some(g), Some(w)) => (g - w).abs() <= EXACT,
            (g, w) => g == w,
        };
        if !same {
            tau_bad += 1;
        }
    }
    let grid = grid_configurations(0.1, 0.1).unwrap().len();
    all(&[
        (auc_bad == 0, format!("AUC == pair enumeration on {corpora} corpora ({auc_bad} mismatches)")),
        ((h - 7.2).abs() <= 1e-9, format!("KW H {h}")),
        ((q - 0.078).abs() <= EXACT, format!("BH q {q}")),
        (tau_bad == 0, format!("Kendall tau == pair counting ({tau_bad} mismatches)")),
        (grid == 126, format!("grid size {grid}")),
    ])
}

fn failure_modes() -> Outcome {
    use FailureMode::*;
    let cases: [(&[&str], FailureMode); 5] = [
        (&["success", "success"], Success),
        (&["success", "code_error"], CodeError),
        (&["code_error", "missing_data"], MissingData),
        (&["missing_data", "missing_module", "code_error"], MissingModule),
        (&["missing_module", "install_dep", "success"], InstallDep),
    ];
    let checks: Vec<(bool, String)> = cases
        .iter()
        .map(|(labels, want)| {
            let got = aggregate_failure_mode(*labels).unwrap();
            (got == *want, format!("{labels:?} -> {}", got.as_str()))
        })
        .collect();
    all(&checks)
}

fn discrimination() -> Outcome {
    let rubric = RubricProfile::default_profile();
    let gold = common::gold().assess(&rubric);
    let install = common::install_dep_like().assess(&rubric);
    let module = common::missing_module_like().assess(&rubric);
    let data = common::missing_data_like().assess(&rubric);
    let code = common::code_error_like().assess(&rubric);
    let (ie, me) = (install.raw(Category::E), module.raw(Category::E));
    let (ic, mc) = (install.raw(Category::C), module.raw(Category::C));
    let dp = data.score_of(SubMetricId::DataPointer);
    let gold_top = [&install, &module, &data, &code].iter().all(|o| gold.rrs() > o.rrs());
    all(&[
        (ie > me, format!("E install_dep {ie:.1} > missing_module {me:.1}")),
        (ic > mc, format!("C install_dep {ic:.1} > missing_module {mc:.1}")),
        (dp == Some(0.0), format!("missing_data data_pointer {dp:?}")),
        (gold_top, format!("gold RRS {:.1} highest", gold.rrs())),
    ])
}

fn corpus_pipeline() -> Outcome {
    // The corpus-scale numbers need the external labeled corpus. Here the
    // full on-disk pipeline runs over a synthetic one.
    let dir = tempfile::tempdir().unwrap();
    let rubric = RubricProfile::default_profile();
    let mut csv = String::from("repo_id,failure_mode,success_nb_count,total_exec_count\n");
    for i in 0..30usize {
        let mode = FailureMode::ALL[i % 5];
        let x = [(i * 7 % 90) as f64 + 5.0, (i * 11 % 80) as f64, (i * 13 % 70) as f64 + 20.0, 60.0, (i * 3 % 50) as f64];
        let id = format!("org__r{i:02}");
        let rec = common::synthetic_record(&id, x, &rubric);
        std::fs::write(dir.path().join(format!("{id}.json")), rec.to_json().unwrap()).unwrap();
        csv.push_str(&format!("{id},{},{},{}\n", mode.as_str(), i % 4, 4));
    }
    let labels = dir.path().join("labels.csv");
    std::fs::write(&labels, csv).unwrap();
    let corpus = load_corpus(dir.path(), &labels).unwrap();
    let opts = DiagnosticsOptions { resamples: 1000, ..Default::default() };
    match run_diagnostics(&corpus, &rubric, &opts) {
        Ok(r) => {
            let complete = r.categories.is_some()
                && r.pairwise.is_some()
                && r.submetrics.is_some()
                && r.auc.is_some()
                && r.perturbation.is_some()
                && r.loco.is_some()
                && r.grid.is_some()
                && r.modes.is_some();
            outcome(
                complete && r.n_records == 30,
                "all analyses ran on a 30-record synthetic corpus; published corpus values need the external corpus",
            )
        }
        Err(e) => outcome(false, format!("diagnostics failed: {e}")),
    }
}

fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn determinism() -> Outcome {
    let rubric = RubricProfile::default_profile();
    let f = common::gold().commit();
    let src = f.path().to_str().unwrap().to_string();
    let run = |s: &str| {
        let snap = acquire_repository(s, true).unwrap();
        emit_provenance(&assess_snapshot(&snap, &rubric, &Patterns::default()).unwrap(), &snap).to_json().unwrap()
    };
    let same = strip_timestamp(&run(&src)) == strip_timestamp(&run(&src));

    let fixtures = common::ten_fixtures();
    let score = |f: &common::Fixture| {
        let snap = f.snapshot();
        strip_timestamp(&emit_provenance(&assess_snapshot(&snap, &rubric, &Patterns::default()).unwrap(), &snap).to_json().unwrap())
    };
    let sequential: Vec<String> = fixtures.iter().map(score).collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let parallel: Vec<String> = pool.install(|| fixtures.par_iter().map(score).collect());
    all(&[
        (same, "two runs over one commit byte-identical modulo timestamp".to_string()),
        (sequential == parallel, "1 vs 4 workers identical over 10 fixtures".to_string()),
    ])
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("ROS/RCS table reproduction", table5),
        ("coverage weight", alpha),
        ("gate exactness", gate_exactness),
        ("readiness score properties", rrs_properties),
        ("rubric loading and rescoring", rubric),
        ("sub-metric formulas", submetric_formulas),
        ("statistics oracles", statistics),
        ("failure-mode aggregation", failure_modes),
        ("fixture discrimination", discrimination),
        ("corpus diagnostics pipeline", corpus_pipeline),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        println!("{} {:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
