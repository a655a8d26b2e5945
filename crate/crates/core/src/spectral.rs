//! Closed-form average spectral efficiency per cell, and a Monte-Carlo
//! oracle over user positions.
//!
//! With `K_l = (B/L)|Φ_l|` users scheduled in cell `l`, the utility of cell
//! `j` is `(1 - B/S) K_j log2(1 + 1/I_j)`. The interference term `I_j` is a
//! pilot-contamination sum over the partners in `j`'s coalition plus an
//! inter-user term over every cell; MRC divides the latter by the array
//! gain `M`, ZFC cancels part of it and divides by `M - K_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::CoalitionStructure;
use crate::geometry::{Deployment, Point};
use crate::propagation::PropagationTable;
use crate::seed;

/// Receive combining scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Maximum ratio combining.
    Mrc,
    /// Zero-forcing combining.
    Zfc,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Mrc, Scheme::Zfc];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Mrc => "mrc",
            Scheme::Zfc => "zfc",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mrc" => Ok(Scheme::Mrc),
            "zfc" | "zf" => Ok(Scheme::Zfc),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Array and frame dimensions shared by every cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    antennas: u32,
    pilots: u32,
    symbols: u32,
    snr: f64,
    cells: usize,
}

impl SystemParams {
    /// `pilots` is the network-wide pilot count `B`, split evenly over the
    /// cells; `snr` is the linear ratio `rho / sigma^2`.
    pub fn new(antennas: u32, pilots: u32, symbols: u32, snr: f64, cells: usize) -> Result<Self> {
        let invalid = |m: String| Err(Error::InvalidParameter(m));
        if cells == 0 {
            return invalid("at least one cell required".into());
        }
        if antennas == 0 {
            return invalid("at least one antenna required".into());
        }
        if pilots == 0 || pilots >= symbols {
            return invalid(format!("need 1 <= B < S, got B={pilots}, S={symbols}"));
        }
        if !(pilots as usize).is_multiple_of(cells) {
            return invalid(format!("B={pilots} not divisible by L={cells}"));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return invalid(format!("snr must be positive, got {snr}"));
        }
        Ok(Self {
            antennas,
            pilots,
            symbols,
            snr,
            cells,
        })
    }

    /// Convenience constructor taking pilots per cell and SNR in dB.
    pub fn from_db(
        antennas: u32,
        pilots_per_cell: u32,
        symbols: u32,
        snr_db: f64,
        cells: usize,
    ) -> Result<Self> {
        Self::new(
            antennas,
            pilots_per_cell * cells as u32,
            symbols,
            10f64.powf(snr_db / 10.0),
            cells,
        )
    }

    pub fn with_antennas(self, antennas: u32) -> Result<Self> {
        Self::new(antennas, self.pilots, self.symbols, self.snr, self.cells)
    }

    pub fn antennas(&self) -> u32 {
        self.antennas
    }

    pub fn pilots(&self) -> u32 {
        self.pilots
    }

    pub fn symbols(&self) -> u32 {
        self.symbols
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn pilots_per_cell(&self) -> u32 {
        self.pilots / self.cells as u32
    }

    /// Users scheduled by a cell whose coalition has `coalition_size` members.
    pub fn users(&self, coalition_size: usize) -> u32 {
        self.pilots_per_cell() * coalition_size as u32
    }

    /// Pilot overhead factor `1 - B/S`.
    pub fn prelog(&self) -> f64 {
        1.0 - f64::from(self.pilots) / f64::from(self.symbols)
    }

    fn check(&self, structure: &CoalitionStructure, table: &PropagationTable) -> Result<()> {
        if structure.cells() != self.cells || table.cells() != self.cells {
            return Err(Error::InvalidParameter(format!(
                "size mismatch: params {} cells, structure {}, table {}",
                self.cells,
                structure.cells(),
                table.cells()
            )));
        }
        Ok(())
    }
}

/// The two parts of the interference term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceTerms {
    /// Contamination from coalition partners sharing `j`'s pilots.
    pub pilot: f64,
    /// Inter-user interference and noise after combining.
    pub inter_user: f64,
}

impl InterferenceTerms {
    pub fn total(&self) -> f64 {
        self.pilot + self.inter_user
    }
}

pub(crate) fn terms_unchecked(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> Result<InterferenceTerms> {
    let per_cell = f64::from(params.pilots_per_cell());
    let users_j = params.users(structure.coalition_size(j));
    let antennas = f64::from(params.antennas);
    let noise = 1.0 / params.snr;
    let pilot_noise = 1.0 / (f64::from(params.pilots) * params.snr);

    let gain = match scheme {
        Scheme::Mrc => antennas,
        Scheme::Zfc if params.antennas <= users_j => {
            return Err(Error::ZfcInfeasible {
                cell: j,
                antennas: params.antennas,
                users: users_j,
            })
        }
        Scheme::Zfc => antennas - f64::from(users_j),
    };

    let own = structure.label_of(j);
    let mut pilot = 0.0;
    let mut coalition_mu1 = 0.0;
    let mut coalition_mu1_sq = 0.0;
    let mut load = 0.0;
    for l in 0..structure.cells() {
        let m1 = table.mu1(j, l);
        load += m1 * per_cell * structure.coalition_size(l) as f64;
        if structure.label_of(l) == own {
            coalition_mu1 += m1;
            coalition_mu1_sq += m1 * m1;
            if l != j {
                let m2 = table.mu2(j, l);
                pilot += m2 + (m2 - m1 * m1) / gain;
            }
        }
    }
    let estimate_quality = coalition_mu1 + pilot_noise;
    let inter_user = match scheme {
        Scheme::Mrc => (load + noise) * estimate_quality / antennas,
        Scheme::Zfc => {
            let cancelled = coalition_mu1_sq * f64::from(users_j) / estimate_quality;
            (load - cancelled + noise) * estimate_quality / gain
        }
    };
    Ok(InterferenceTerms { pilot, inter_user })
}

/// Both interference parts for cell `j` under `structure`.
pub fn interference_terms(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> Result<InterferenceTerms> {
    params.check(structure, table)?;
    if j >= params.cells {
        return Err(Error::CellOutOfRange {
            cell: j,
            cells: params.cells,
        });
    }
    terms_unchecked(j, structure, params, table, scheme)
}

/// Interference term `I_j` of the closed-form utility.
///
/// Returns [`Error::ZfcInfeasible`] when ZFC has `M <= K_j`.
pub fn interference(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> Result<f64> {
    interference_terms(j, structure, params, table, scheme).map(|t| t.total())
}

pub(crate) fn utility_unchecked(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> f64 {
    match terms_unchecked(j, structure, params, table, scheme) {
        Ok(t) => {
            let users = f64::from(params.users(structure.coalition_size(j)));
            params.prelog() * users * (1.0 / t.total()).ln_1p() / std::f64::consts::LN_2
        }
        Err(_) => 0.0,
    }
}

/// Average sum spectral efficiency of cell `j` in bit/s/Hz.
///
/// A ZFC cell that cannot zero-force its scheduled users earns 0.
pub fn cell_utility(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> Result<f64> {
    match interference(j, structure, params, table, scheme) {
        Ok(_) | Err(Error::ZfcInfeasible { .. }) => {
            Ok(utility_unchecked(j, structure, params, table, scheme))
        }
        Err(e) => Err(e),
    }
}

/// Mean and standard error of a Monte-Carlo spectral-efficiency estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn estimate(&self) -> OracleEstimate {
        let stderr = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
        } else {
            0.0
        };
        OracleEstimate {
            mean: self.mean,
            stderr,
            trials: self.n,
        }
    }
}

/// Oracle estimates for every cell, antenna count and scheme, sharing one
/// set of sampled user positions.
#[derive(Debug, Clone)]
pub struct OracleSweep {
    antennas: Vec<u32>,
    cells: usize,
    // [cell][antenna index][scheme] -> None when ZFC is infeasible
    stats: Vec<Vec<[Option<Welford>; 2]>>,
    users: Vec<u32>,
}

impl OracleSweep {
    pub fn antennas(&self) -> &[u32] {
        &self.antennas
    }

    pub fn get(&self, cell: usize, antennas: u32, scheme: Scheme) -> Result<OracleEstimate> {
        if cell >= self.cells {
            return Err(Error::CellOutOfRange {
                cell,
                cells: self.cells,
            });
        }
        let idx = self
            .antennas
            .iter()
            .position(|&m| m == antennas)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("antenna count {antennas} not swept"))
            })?;
        self.stats[cell][idx][scheme as usize]
            .map(|w| w.estimate())
            .ok_or(Error::ZfcInfeasible {
                cell,
                antennas,
                users: self.users[cell],
            })
    }
}

/// Monte-Carlo spectral efficiency over user positions.
///
/// Fading is already averaged out analytically, so each trial only draws
/// `K_l` positions in every cell `l` and evaluates the per-position SINR of
/// every scheduled user. The result is the trial mean of
/// `(1 - B/S) sum_k log2(1 + SINR_jk)` for each cell `j`.
pub fn oracle_sweep(
    structure: &CoalitionStructure,
    params: &SystemParams,
    deployment: &Deployment,
    antennas: &[u32],
    trials: usize,
    seed: u64,
) -> Result<OracleSweep> {
    let cells = params.cells;
    if structure.cells() != cells || deployment.cells() != cells {
        return Err(Error::InvalidParameter("cell count mismatch".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if antennas.is_empty() || antennas.contains(&0) {
        return Err(Error::InvalidParameter(
            "antenna counts must be >= 1".into(),
        ));
    }
    let users: Vec<u32> = (0..cells)
        .map(|l| params.users(structure.coalition_size(l)))
        .collect();
    let noise = 1.0 / params.snr;
    let pilot_noise = 1.0 / (f64::from(params.pilots) * params.snr);
    let prelog = params.prelog();
    let coalitions: Vec<Vec<usize>> = (0..cells).map(|j| structure.coalition_of(j)).collect();

    let mut stats: Vec<Vec<[Option<Welford>; 2]>> = users
        .iter()
        .map(|&k| {
            antennas
                .iter()
                .map(|&m| [Some(Welford::default()), (m > k).then(Welford::default)])
                .collect()
        })
        .collect();

    let mut rng = seed::rng(seed);
    // variances[l][m][j] = d_j(z_lm)
    let mut variances: Vec<Vec<Vec<f64>>> = users
        .iter()
        .map(|&k| vec![vec![0.0; cells]; k as usize])
        .collect();
    let mut quality = Vec::new();
    let mut contamination = Vec::new();

    for _ in 0..trials {
        for (l, cell_users) in variances.iter_mut().enumerate() {
            for row in cell_users.iter_mut() {
                let z: Point = deployment.sample_ue_in_cell(l, &mut rng)?;
                for (j, v) in row.iter_mut().enumerate() {
                    *v = deployment.channel_variance(j, z);
                }
            }
        }
        let ratio = |j: usize, l: usize, m: usize| {
            let row = &variances[l][m];
            row[j] / row[l]
        };

        for j in 0..cells {
            let k_j = users[j] as usize;
            let total: f64 = (0..cells)
                .map(|l| (0..users[l] as usize).map(|m| ratio(j, l, m)).sum::<f64>())
                .sum();
            quality.clear();
            contamination.clear();
            let mut cancelled = 0.0;
            for k in 0..k_j {
                let mut a = pilot_noise;
                let mut p = 0.0;
                let mut sq = 0.0;
                for &l in &coalitions[j] {
                    let r = ratio(j, l, k);
                    a += r;
                    sq += r * r;
                    if l != j {
                        p += r * r;
                    }
                }
                cancelled += sq / a;
                quality.push(a);
                contamination.push(p);
            }

            for (idx, &m) in antennas.iter().enumerate() {
                let m = f64::from(m);
                let slot = &mut stats[j][idx];
                if let Some(w) = slot[Scheme::Mrc as usize].as_mut() {
                    let inter = (total + noise) / m;
                    let se: f64 = (0..k_j)
                        .map(|k| (1.0 / (contamination[k] + quality[k] * inter)).ln_1p())
                        .sum();
                    w.push(prelog * se / std::f64::consts::LN_2);
                }
                if let Some(w) = slot[Scheme::Zfc as usize].as_mut() {
                    let inter = (total - cancelled + noise) / (m - k_j as f64);
                    let se: f64 = (0..k_j)
                        .map(|k| (1.0 / (contamination[k] + quality[k] * inter)).ln_1p())
                        .sum();
                    w.push(prelog * se / std::f64::consts::LN_2);
                }
            }
        }
    }

    Ok(OracleSweep {
        antennas: antennas.to_vec(),
        cells,
        stats,
        users,
    })
}

/// Oracle spectral efficiency of cell `j` at the antenna count in `params`.
pub fn oracle_se(
    j: usize,
    structure: &CoalitionStructure,
    params: &SystemParams,
    deployment: &Deployment,
    scheme: Scheme,
    trials: usize,
    seed: u64,
) -> Result<OracleEstimate> {
    deployment.check_cell(j)?;
    oracle_sweep(
        structure,
        params,
        deployment,
        &[params.antennas],
        trials,
        seed,
    )?
    .get(j, params.antennas, scheme)
}
