//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p pilotcluster-cli --test acceptance`.

use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use pilotcluster::game::{enumerate_partitions, exhaustive_optimum, CoalitionStructure, Game};
use pilotcluster::geometry::{generate_deployment, Deployment, Point};
use pilotcluster::harness::{run_experiment, ExperimentConfig, Method};
use pilotcluster::spectral::{cell_utility, interference, oracle_sweep};
use pilotcluster::{estimate_propagation, PropagationTable, Scheme, SystemParams};

const DENSITY: f64 = 25.0;
const MU_SAMPLES: usize = 10_000;

// 1
const JENSEN_DEPLOYMENTS: u64 = 20;
const JENSEN_CELLS: [usize; 3] = [2, 4, 7];
const JENSEN_ANTENNAS: [u32; 2] = [50, 200];
const JENSEN_TRIALS: usize = 2000;
const JENSEN_SIGMAS: f64 = 3.0;
const JENSEN_BUDGET: Duration = Duration::from_secs(300);

// 2
const OPT_DEPLOYMENTS: usize = 30;
const OPT_ANTENNAS: [u32; 3] = [100, 300, 500];
const OPT_RATIO: f64 = 0.9;
const OPT_BUDGET: Duration = Duration::from_secs(600);

// 3
const STABILITY_RUNS: u64 = 100;
const STABILITY_MAX_CELLS: usize = 20;
const STABILITY_MAX_BUDGET: u32 = 100;

// 4
const SEARCH_CELLS: usize = 20;
const SEARCH_TRIALS: usize = 10;
const SEARCH_BUDGET_Q: u32 = 100;
const SEARCH_LOW: f64 = 0.05;
const SEARCH_HIGH: f64 = 1.0;

// 5
const CROSSOVER_TRIALS: usize = 20;
const CROSSOVER_SMALL_M: [u32; 5] = [20, 50, 70, 75, 80];
const CROSSOVER_LARGE_M: u32 = 2000;

// 6: reference values from scripts/single_cell_reference.py (mpmath, 30 digits)
const REF_I_MRC: f64 = 0.106_424_555_320_336_76;
const REF_U_MRC: f64 = 32.935_520_602_820_2;
const REF_I_ZFC: f64 = 0.007_138_394_800_374_176;
const REF_U_ZFC: f64 = 69.619_353_704_586_8;
const SIG_FIGS_REL: f64 = 5e-6;

// 7
const INVARIANT_DEPLOYMENTS: u64 = 20;
const QUAD_GRID: usize = 2000;
const QUAD_SAMPLES: usize = 100_000;
const QUAD_REL_TOL: f64 = 0.01;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn default_params(antennas: u32, cells: usize) -> SystemParams {
    SystemParams::from_db(antennas, 10, 400, 5.0, cells).expect("valid parameters")
}

fn deployment_and_table(cells: usize, seed: u64) -> (Deployment, PropagationTable) {
    let d = generate_deployment(cells, DENSITY, seed).expect("deployment");
    let t = estimate_propagation(&d, MU_SAMPLES, seed ^ 0x5eed).expect("table");
    (d, t)
}

fn jensen_bound() -> Outcome {
    let start = Instant::now();
    let results: Vec<(usize, usize, Option<String>)> = (0..JENSEN_DEPLOYMENTS)
        .into_par_iter()
        .map(|k| {
            let cells = JENSEN_CELLS[k as usize % JENSEN_CELLS.len()];
            let (d, t) = deployment_and_table(cells, 1000 + k);
            let partitions: Vec<_> = enumerate_partitions(cells).unwrap().collect();
            let mut rng = pilotcluster::seed::rng(2000 + k);
            let c = partitions[rng.gen_range(0..partitions.len())].clone();
            let params = default_params(JENSEN_ANTENNAS[0], cells);
            let sweep = oracle_sweep(&c, &params, &d, &JENSEN_ANTENNAS, JENSEN_TRIALS, 3000 + k)
                .expect("oracle");
            let (mut checks, mut infeasible) = (0, 0);
            for &m in &JENSEN_ANTENNAS {
                let params = params.with_antennas(m).unwrap();
                for scheme in Scheme::ALL {
                    for j in 0..cells {
                        checks += 1;
                        let bound = cell_utility(j, &c, &params, &t, scheme).unwrap();
                        match sweep.get(j, m, scheme) {
                            Ok(est) if est.mean >= bound - JENSEN_SIGMAS * est.stderr => {}
                            Ok(est) => {
                                return (checks, infeasible, Some(format!(
                                    "deployment {k} {c} M={m} {scheme} cell {j}: oracle {:.4} +- {:.4} < bound {bound:.4}",
                                    est.mean, est.stderr
                                )))
                            }
                            Err(_) if bound == 0.0 => infeasible += 1,
                            Err(e) => return (checks, infeasible, Some(e.to_string())),
                        }
                    }
                }
            }
            (checks, infeasible, None)
        })
        .collect();
    let elapsed = start.elapsed();
    let checks: usize = results.iter().map(|r| r.0).sum();
    let infeasible: usize = results.iter().map(|r| r.1).sum();
    if let Some(msg) = results.iter().find_map(|r| r.2.clone()) {
        return outcome(false, msg);
    }
    outcome(
        elapsed < JENSEN_BUDGET,
        format!(
            "{checks} cell checks ({infeasible} ZFC-infeasible at 0) over {JENSEN_DEPLOYMENTS} deployments, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn formation_vs_exhaustive() -> Outcome {
    let start = Instant::now();
    // per deployment: [(formation, exhaustive)] for each M
    let totals: Vec<Vec<(f64, f64)>> = (0..OPT_DEPLOYMENTS)
        .into_par_iter()
        .map(|k| {
            let (_, t) = deployment_and_table(7, 4000 + k as u64);
            OPT_ANTENNAS
                .iter()
                .map(|&m| {
                    let game =
                        Game::with_uniform_budget(default_params(m, 7), &t, Scheme::Mrc, 100)
                            .unwrap();
                    let formed = game.run_formation(5000 + k as u64).final_structure;
                    let (_, best) = exhaustive_optimum(&game, Default::default()).unwrap();
                    (game.total_se(&formed), best)
                })
                .collect()
        })
        .collect();
    let elapsed = start.elapsed();
    let mut pass = elapsed < OPT_BUDGET;
    let mut parts = Vec::new();
    for (i, m) in OPT_ANTENNAS.iter().enumerate() {
        let n = totals.len() as f64;
        let formation = totals.iter().map(|v| v[i].0).sum::<f64>() / n;
        let optimum = totals.iter().map(|v| v[i].1).sum::<f64>() / n;
        let dominated = totals.iter().all(|v| v[i].1 >= v[i].0 - 1e-9);
        pass &= formation >= OPT_RATIO * optimum && dominated;
        parts.push(format!("M={m}: {:.1}%", 100.0 * formation / optimum));
    }
    outcome(
        pass,
        format!(
            "formation/optimum {}, {:.1}s",
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn stability() -> Outcome {
    let failures: Vec<String> = (0..STABILITY_RUNS)
        .into_par_iter()
        .filter_map(|k| {
            let mut rng = pilotcluster::seed::rng(6000 + k);
            let cells = rng.gen_range(1..=STABILITY_MAX_CELLS);
            let antennas = [20, 50, 100, 300, 500][rng.gen_range(0..5)];
            let scheme = Scheme::ALL[rng.gen_range(0..2)];
            let budgets: Vec<u32> = (0..cells)
                .map(|_| rng.gen_range(0..=STABILITY_MAX_BUDGET))
                .collect();
            let d = generate_deployment(cells, DENSITY, 7000 + k).unwrap();
            let t = estimate_propagation(&d, 2000, 8000 + k).unwrap();
            let game = Game::new(default_params(antennas, cells), &t, scheme, budgets.clone()).unwrap();
            let trace = game.run_formation(9000 + k);
            let stable = game
                .is_individually_stable(&trace.final_structure, &trace.eta)
                .unwrap();
            let bound: usize = budgets.iter().map(|&q| q as usize).sum();
            let replayed = trace.replay().ok() == Some(trace.final_structure.clone());
            let logged = pilotcluster::game::FormationTrace::from_log(&trace.to_log())
                .map(|back| back == trace)
                .unwrap_or(false);
            (!(stable && trace.deviation_count() <= bound && replayed && logged)).then(|| {
                format!(
                    "run {k} (L={cells}, M={antennas}, {scheme}): stable={stable} t={} bound={bound} replay={replayed} log={logged}",
                    trace.deviation_count()
                )
            })
        })
        .collect();
    match failures.first() {
        None => outcome(
            true,
            format!("{STABILITY_RUNS} runs stable, t <= sum q, replay exact"),
        ),
        Some(f) => outcome(
            false,
            format!("{} failing runs; first: {f}", failures.len()),
        ),
    }
}

fn search_cost() -> Outcome {
    let config = ExperimentConfig {
        cells: SEARCH_CELLS,
        antennas: vec![100, 500],
        schemes: Scheme::ALL.to_vec(),
        budget: SEARCH_BUDGET_Q,
        trials: SEARCH_TRIALS,
        methods: vec![Method::Formation],
        workers: 8,
        master_seed: 11,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&config).unwrap();
    let (lo, hi) = (
        SEARCH_LOW * SEARCH_CELLS as f64,
        SEARCH_HIGH * SEARCH_CELLS as f64,
    );
    let mut pass = true;
    let mut parts = Vec::new();
    for &m in &config.antennas {
        for scheme in Scheme::ALL {
            let sel: Vec<_> = records
                .iter()
                .filter(|r| r.antennas == m && r.scheme == scheme)
                .collect();
            let mean = sel.iter().map(|r| r.mean_searches).sum::<f64>() / sel.len() as f64;
            pass &= (lo..=hi).contains(&mean);
            parts.push(format!("M={m} {scheme}: {mean:.2}"));
        }
    }
    // Budget never binds: largest counter over independent instances.
    let mut max_eta = 0;
    for trial in 0..SEARCH_TRIALS as u64 {
        let (_, t) = deployment_and_table(SEARCH_CELLS, 12_000 + trial);
        for &m in &config.antennas {
            for scheme in Scheme::ALL {
                let game = Game::with_uniform_budget(
                    default_params(m, SEARCH_CELLS),
                    &t,
                    scheme,
                    SEARCH_BUDGET_Q,
                )
                .unwrap();
                max_eta = max_eta.max(*game.run_formation(trial).eta.iter().max().unwrap());
            }
        }
    }
    pass &= max_eta < SEARCH_BUDGET_Q;
    outcome(
        pass,
        format!(
            "mean searches per BS in [{lo}, {hi}]: {}; max eta {max_eta} < q={SEARCH_BUDGET_Q}",
            parts.join(", ")
        ),
    )
}

fn crossover() -> Outcome {
    let config = ExperimentConfig {
        cells: 7,
        pilots_per_cell: 10,
        antennas: CROSSOVER_SMALL_M
            .iter()
            .copied()
            .chain([CROSSOVER_LARGE_M])
            .collect(),
        schemes: vec![Scheme::Zfc],
        trials: CROSSOVER_TRIALS,
        methods: vec![Method::Singletons, Method::Grand],
        workers: 8,
        master_seed: 13,
        ..ExperimentConfig::default()
    };
    let records = run_experiment(&config).unwrap();
    let mean = |m: u32, method: Method| {
        let v: Vec<f64> = records
            .iter()
            .filter(|r| r.antennas == m && r.method == method)
            .map(|r| r.mean_se)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for &m in &config.antennas {
        let (grand, single) = (mean(m, Method::Grand), mean(m, Method::Singletons));
        let ok = if m == CROSSOVER_LARGE_M {
            grand > single
        } else {
            grand == 0.0 || grand < single
        };
        pass &= ok;
        parts.push(format!("M={m}: grand {grand:.2} vs single {single:.2}"));
    }
    outcome(pass, parts.join("; "))
}

fn closed_form() -> Outcome {
    let t = PropagationTable::from_matrices(1, vec![1.0], vec![1.0], 1, 0, 0).unwrap();
    let c = CoalitionStructure::singletons(1);
    let p = default_params(100, 1);

    // Independent scalar evaluation: every moment is 1 with one cell.
    let (m, b, s, k) = (100.0_f64, 10.0_f64, 400.0_f64, 10.0_f64);
    let snr = 10f64.powf(0.5);
    let eps = 1.0 / (b * snr);
    let i_mrc = (k + 1.0 / snr) * (1.0 + eps) / m;
    let i_zfc = (k - k / (1.0 + eps) + 1.0 / snr) * (1.0 + eps) / (m - k);
    let u = |i: f64| (1.0 - b / s) * k * (1.0 + 1.0 / i).log2();

    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    let mut worst = 0.0_f64;
    for (scheme, ri, ru, ii) in [
        (Scheme::Mrc, REF_I_MRC, REF_U_MRC, i_mrc),
        (Scheme::Zfc, REF_I_ZFC, REF_U_ZFC, i_zfc),
    ] {
        let got_i = interference(0, &c, &p, &t, scheme).unwrap();
        let got_u = cell_utility(0, &c, &p, &t, scheme).unwrap();
        worst = worst
            .max(rel(got_i, ri))
            .max(rel(got_u, ru))
            .max(rel(ii, ri))
            .max(rel(u(ii), ru));
    }
    outcome(
        worst < SIG_FIGS_REL,
        format!(
            "I_mrc={:.7} U_mrc={:.4} I_zfc={:.7} U_zfc={:.4}; worst relative error {worst:.1e}",
            REF_I_MRC, REF_U_MRC, REF_I_ZFC, REF_U_ZFC
        ),
    )
}

fn propagation() -> Outcome {
    let mut violations = 0;
    let mut entries = 0;
    for k in 0..INVARIANT_DEPLOYMENTS {
        let cells = 2 + (k as usize % 12);
        let (_, t) = deployment_and_table(cells, 14_000 + k);
        for j in 0..cells {
            for l in 0..cells {
                entries += 1;
                let (m1, m2) = (t.mu1(j, l), t.mu2(j, l));
                let ok = if j == l {
                    m1 == 1.0 && m2 == 1.0
                } else {
                    m1 * m1 <= m2 * (1.0 + 1e-12) && m2 <= m1 && m1 <= 1.0 && m2 > 0.0
                };
                violations += usize::from(!ok);
            }
        }
    }

    let d = Deployment::new(
        vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)],
        1.0,
        3.0,
        0.001,
    )
    .unwrap();
    let h = 1.0 / QUAD_GRID as f64;
    let (sum, count) = (0..QUAD_GRID)
        .into_par_iter()
        .map(|ix| {
            let mut acc = (0.0, 0usize);
            for iy in 0..QUAD_GRID {
                let z = Point::new((ix as f64 + 0.5) * h, (iy as f64 + 0.5) * h);
                if d.assign_cell(z) == 1 {
                    acc.0 += d.channel_variance(0, z) / d.channel_variance(1, z);
                    acc.1 += 1;
                }
            }
            acc
        })
        .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let quad = sum / count as f64;
    let mc = estimate_propagation(&d, QUAD_SAMPLES, 15)
        .unwrap()
        .mu1(0, 1);
    let err = ((mc - quad) / quad).abs();
    outcome(
        violations == 0 && err < QUAD_REL_TOL,
        format!(
            "{entries} entries, {violations} violations; mu1[0][1] estimate {mc:.6} vs quadrature {quad:.6} ({:.3}%)",
            100.0 * err
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.cfg");
    fs::write(
        &config,
        "cells = 5\ntrials = 3\nantennas = 50,200\nmu_samples = 2000\nmaster_seed = 21\n",
    )
    .unwrap();
    let run = |name: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pilotcluster"))
            .arg("sweep")
            .arg("--config")
            .arg(&config)
            .args(["--workers", "2", "--out"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("sweep exited with {status}"));
        }
        fs::read(&out).map_err(|e| e.to_string())
    };
    match (run("a.csv"), run("b.csv")) {
        (Ok(a), Ok(b)) => outcome(
            a == b && !a.is_empty(),
            format!("{} bytes, identical={}", a.len(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e),
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("jensen-bound", jensen_bound),
        ("formation-vs-exhaustive", formation_vs_exhaustive),
        ("stability-and-convergence", stability),
        ("search-cost", search_cost),
        ("zfc-regime-crossover", crossover),
        ("closed-form-spot-checks", closed_form),
        ("propagation-invariants", propagation),
        ("sweep-determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        failed += usize::from(!result.pass);
        println!(
            "{} {} {name} [{:.1}s]: {}",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
