use std::io::{Read, Write};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use crate::error::{Error, Result};
use crate::game::{exhaustive_optimum, CoalitionStructure, Game};
use crate::geometry::Deployment;
use crate::propagation::estimate_propagation;
use crate::seed::{self, Stream};
use crate::spectral::Scheme;

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub trial: usize,
    pub antennas: u32,
    pub scheme: Scheme,
    pub method: Method,
    /// Mean per-cell spectral efficiency, bit/s/Hz.
    pub mean_se: f64,
    pub mean_coalition_size: f64,
    pub mean_searches: f64,
    pub deviations: usize,
    pub stable: bool,
    /// Zero unless timing is enabled in the config.
    pub wall_time_ms: f64,
}

/// Evaluates every (antennas, scheme, method) combination on trial `trial`.
pub fn run_trial(config: &ExperimentConfig, trial: usize) -> Result<Vec<ResultRecord>> {
    let t = trial as u64;
    let deployment = Deployment::random(
        config.cells,
        config.density,
        config.alpha,
        seed::derive(config.master_seed, t, Stream::Deployment),
    )?;
    let table = estimate_propagation(
        &deployment,
        config.mu_samples,
        seed::derive(config.master_seed, t, Stream::Propagation),
    )?;
    let formation_seed = seed::derive(config.master_seed, t, Stream::Formation);
    let cells = config.cells;

    let mut records =
        Vec::with_capacity(config.antennas.len() * config.schemes.len() * config.methods.len());
    for &antennas in &config.antennas {
        let params = config.params(antennas)?;
        for &scheme in &config.schemes {
            let game = Game::with_uniform_budget(params, &table, scheme, config.budget)?;
            for &method in &config.methods {
                let start = Instant::now();
                let zero_eta = vec![0u32; cells];
                let (structure, eta, deviations, stable) = match method {
                    Method::Formation => {
                        let trace = game.run_formation(formation_seed);
                        (
                            trace.final_structure,
                            trace.eta,
                            trace.deviations.len(),
                            trace.stable,
                        )
                    }
                    Method::Singletons | Method::Grand | Method::Exhaustive => {
                        let structure = match method {
                            Method::Singletons => CoalitionStructure::singletons(cells),
                            Method::Grand => CoalitionStructure::grand(cells),
                            _ => exhaustive_optimum(&game, config.objective)?.0,
                        };
                        let stable = game.is_individually_stable(&structure, &zero_eta)?;
                        (structure, zero_eta, 0, stable)
                    }
                };
                let mean_se = game.total_se(&structure) / cells as f64;
                let wall_time_ms = if config.timing {
                    start.elapsed().as_secs_f64() * 1e3
                } else {
                    0.0
                };
                records.push(ResultRecord {
                    trial,
                    antennas,
                    scheme,
                    method,
                    mean_se,
                    mean_coalition_size: structure.mean_block_size(),
                    mean_searches: eta.iter().map(|&e| f64::from(e)).sum::<f64>() / cells as f64,
                    deviations,
                    stable,
                    wall_time_ms,
                });
            }
        }
    }
    Ok(records)
}

/// Runs all trials on `config.workers` threads. Records come back in trial
/// order, then antennas, scheme and method in config order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let per_trial = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| run_trial(config, trial))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(per_trial.into_iter().flatten().collect())
}

pub fn write_csv<W: Write>(records: &[ResultRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
