//! Propagation moments between cells.
//!
//! For a user placed uniformly in cell `l`, `mu1[j][l]` and `mu2[j][l]` are
//! the first and second moments of `d_j(z) / d_l(z)`, the channel variance
//! towards BS `j` relative to the serving BS. They fingerprint the network
//! topology and do not depend on antennas, pilots or the coalition
//! structure, so one table serves every evaluation on a deployment.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Deployment;
use crate::seed;

pub const DEFAULT_SAMPLES_PER_CELL: usize = 10_000;

/// Slack for the Jensen check: sample moments satisfy it exactly in exact
/// arithmetic but summation can lose a few ulps when the spread is tiny.
const JENSEN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationTable {
    cells: usize,
    mu1: Vec<f64>,
    mu2: Vec<f64>,
    samples_per_cell: usize,
    seed: u64,
    deployment_hash: u64,
}

impl PropagationTable {
    /// Builds a table from row-major `L x L` matrices and checks the
    /// invariants: unit diagonal, `0 < mu <= 1`, `mu1^2 <= mu2 <= mu1`.
    pub fn from_matrices(
        cells: usize,
        mu1: Vec<f64>,
        mu2: Vec<f64>,
        samples_per_cell: usize,
        seed: u64,
        deployment_hash: u64,
    ) -> Result<Self> {
        if cells == 0 || mu1.len() != cells * cells || mu2.len() != cells * cells {
            return Err(Error::InvalidParameter(format!(
                "moment matrices must be {cells}x{cells}"
            )));
        }
        for j in 0..cells {
            for l in 0..cells {
                let (m1, m2) = (mu1[j * cells + l], mu2[j * cells + l]);
                let bad = |what: &str| {
                    Err(Error::InvalidParameter(format!(
                        "mu[{j}][{l}] violates {what}: mu1={m1}, mu2={m2}"
                    )))
                };
                if j == l {
                    if m1 != 1.0 || m2 != 1.0 {
                        return bad("unit diagonal");
                    }
                    continue;
                }
                if !(m1 > 0.0 && m1 <= 1.0 && m2 > 0.0 && m2 <= 1.0) {
                    return bad("0 < mu <= 1");
                }
                if m2 > m1 {
                    return bad("mu2 <= mu1");
                }
                if m2 < m1 * m1 * (1.0 - JENSEN_SLACK) {
                    return bad("mu1^2 <= mu2");
                }
            }
        }
        Ok(Self {
            cells,
            mu1,
            mu2,
            samples_per_cell,
            seed,
            deployment_hash,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// First moment of `d_j / d_l` for a user in cell `l`.
    #[inline]
    pub fn mu1(&self, j: usize, l: usize) -> f64 {
        self.mu1[j * self.cells + l]
    }

    /// Second moment of `d_j / d_l` for a user in cell `l`.
    #[inline]
    pub fn mu2(&self, j: usize, l: usize) -> f64 {
        self.mu2[j * self.cells + l]
    }

    pub fn samples_per_cell(&self) -> usize {
        self.samples_per_cell
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn deployment_hash(&self) -> u64 {
        self.deployment_hash
    }

    /// Plain-text form: provenance header, then both matrices row-major.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# propagation-table\n");
        let _ = writeln!(out, "seed {}", self.seed);
        let _ = writeln!(out, "samples {}", self.samples_per_cell);
        let _ = writeln!(out, "deployment {:016x}", self.deployment_hash);
        let _ = writeln!(out, "cells {}", self.cells);
        for (name, m) in [("mu1", &self.mu1), ("mu2", &self.mu2)] {
            let _ = writeln!(out, "{name}");
            for row in m.chunks(self.cells) {
                let row: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut samples = None;
        let mut hash = None;
        let mut cells = None;
        let mut section: Option<&str> = None;
        let mut mu1 = Vec::new();
        let mut mu2 = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap_or_default();
            let int = |s: Option<&str>, radix: u32| {
                s.and_then(|s| u64::from_str_radix(s, radix).ok())
                    .ok_or_else(|| Error::parse(line_no, format!("bad value for `{head}`")))
            };
            match head {
                "seed" => seed = Some(int(parts.next(), 10)?),
                "samples" => samples = Some(int(parts.next(), 10)? as usize),
                "deployment" => hash = Some(int(parts.next(), 16)?),
                "cells" => cells = Some(int(parts.next(), 10)? as usize),
                "mu1" | "mu2" => section = Some(if head == "mu1" { "mu1" } else { "mu2" }),
                _ => {
                    let target = match section {
                        Some("mu1") => &mut mu1,
                        Some(_) => &mut mu2,
                        None => return Err(Error::parse(line_no, "matrix row before section")),
                    };
                    for tok in line.split_whitespace() {
                        target.push(
                            tok.parse::<f64>()
                                .map_err(|e| Error::parse(line_no, format!("{tok:?}: {e}")))?,
                        );
                    }
                }
            }
        }
        let missing = |k: &str| Error::parse(0, format!("missing header field `{k}`"));
        Self::from_matrices(
            cells.ok_or_else(|| missing("cells"))?,
            mu1,
            mu2,
            samples.ok_or_else(|| missing("samples"))?,
            seed.ok_or_else(|| missing("seed"))?,
            hash.ok_or_else(|| missing("deployment"))?,
        )
    }
}

/// Monte-Carlo estimate of the moment table.
///
/// Cell `l` draws `samples_per_cell` users from its own generator, seeded
/// from `(seed, l)`, so the result does not depend on thread scheduling.
pub fn estimate_propagation(
    deployment: &Deployment,
    samples_per_cell: usize,
    seed: u64,
) -> Result<PropagationTable> {
    if samples_per_cell == 0 {
        return Err(Error::InvalidParameter(
            "samples_per_cell must be >= 1".into(),
        ));
    }
    let cells = deployment.cells();
    // columns[l] = (sum of ratios, sum of squared ratios) towards every j.
    let columns = (0..cells)
        .into_par_iter()
        .map(|l| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut rng = seed::rng(seed::child(seed, l as u64));
            let mut s1 = vec![0.0; cells];
            let mut s2 = vec![0.0; cells];
            for _ in 0..samples_per_cell {
                let z = deployment.sample_ue_in_cell(l, &mut rng)?;
                let serving = deployment.channel_variance(l, z);
                for j in 0..cells {
                    let r = deployment.channel_variance(j, z) / serving;
                    s1[j] += r;
                    s2[j] += r * r;
                }
            }
            Ok((s1, s2))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = samples_per_cell as f64;
    let mut mu1 = vec![0.0; cells * cells];
    let mut mu2 = vec![0.0; cells * cells];
    for (l, (s1, s2)) in columns.iter().enumerate() {
        for j in 0..cells {
            let (m1, m2) = if j == l {
                (1.0, 1.0)
            } else {
                (s1[j] / n, s2[j] / n)
            };
            mu1[j * cells + l] = m1;
            mu2[j * cells + l] = m2;
        }
    }
    PropagationTable::from_matrices(
        cells,
        mu1,
        mu2,
        samples_per_cell,
        seed,
        deployment.fingerprint(),
    )
}
