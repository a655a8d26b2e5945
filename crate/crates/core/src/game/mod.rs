//! Coalition formation among base stations.
//!
//! Cells are players; a coalition pools its members' pilots. A cell may
//! leave its coalition for another one (or go alone) when it strictly
//! gains and, for joins, every member of the receiving coalition consents
//! by not losing. Each join request costs the asker one unit of a finite
//! searching budget; once a cell exceeds its budget its utility is treated
//! as zero, which bounds the dynamics.

mod exhaustive;
mod formation;
pub mod structure;

pub use exhaustive::{
    enumerate_partitions, exhaustive_optimum, Objective, Partitions, MAX_ENUMERATION_CELLS,
};
pub use formation::{Deviation, FormationTrace};
pub use structure::{CoalitionStructure, Target};

use crate::error::{Error, Result};
use crate::propagation::PropagationTable;
use crate::spectral::{self, Scheme, SystemParams};

/// Budget-restricted utility: the cell's spectral efficiency while
/// `eta_j <= q_j`, zero once it has searched more than its budget.
pub fn restricted_utility(
    j: usize,
    structure: &CoalitionStructure,
    eta_j: u32,
    q_j: u32,
    params: &SystemParams,
    table: &PropagationTable,
    scheme: Scheme,
) -> Result<f64> {
    if eta_j <= q_j {
        spectral::cell_utility(j, structure, params, table, scheme)
    } else {
        Ok(0.0)
    }
}

/// One pilot-clustering game: the network, the combining scheme and the
/// per-cell searching budgets.
#[derive(Debug, Clone)]
pub struct Game<'a> {
    params: SystemParams,
    table: &'a PropagationTable,
    scheme: Scheme,
    budgets: Vec<u32>,
}

impl<'a> Game<'a> {
    pub fn new(
        params: SystemParams,
        table: &'a PropagationTable,
        scheme: Scheme,
        budgets: Vec<u32>,
    ) -> Result<Self> {
        let cells = params.cells();
        if table.cells() != cells || budgets.len() != cells {
            return Err(Error::InvalidParameter(format!(
                "{cells} cells but table has {} and {} budgets given",
                table.cells(),
                budgets.len()
            )));
        }
        Ok(Self {
            params,
            table,
            scheme,
            budgets,
        })
    }

    /// Same budget `q` for every cell.
    pub fn with_uniform_budget(
        params: SystemParams,
        table: &'a PropagationTable,
        scheme: Scheme,
        q: u32,
    ) -> Result<Self> {
        Self::new(params, table, scheme, vec![q; params.cells()])
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn table(&self) -> &PropagationTable {
        self.table
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn budgets(&self) -> &[u32] {
        &self.budgets
    }

    pub fn cells(&self) -> usize {
        self.params.cells()
    }

    fn check(&self, structure: &CoalitionStructure) -> Result<()> {
        if structure.cells() != self.cells() {
            return Err(Error::InvalidStructure(format!(
                "structure has {} cells, game has {}",
                structure.cells(),
                self.cells()
            )));
        }
        Ok(())
    }

    fn check_eta(&self, eta: &[u32]) -> Result<()> {
        if eta.len() != self.cells() {
            return Err(Error::InvalidParameter(format!(
                "{} search counters for {} cells",
                eta.len(),
                self.cells()
            )));
        }
        Ok(())
    }

    /// Unrestricted spectral efficiency of cell `j`.
    pub fn utility(&self, j: usize, structure: &CoalitionStructure) -> f64 {
        spectral::utility_unchecked(j, structure, &self.params, self.table, self.scheme)
    }

    pub fn utilities(&self, structure: &CoalitionStructure) -> Vec<f64> {
        (0..self.cells())
            .map(|j| self.utility(j, structure))
            .collect()
    }

    /// Sum of all cells' spectral efficiencies.
    pub fn total_se(&self, structure: &CoalitionStructure) -> f64 {
        (0..self.cells()).map(|j| self.utility(j, structure)).sum()
    }

    pub fn restricted_utility(&self, j: usize, structure: &CoalitionStructure, eta_j: u32) -> f64 {
        if eta_j <= self.budgets[j] {
            self.utility(j, structure)
        } else {
            0.0
        }
    }

    /// Whether `j` moving to `target` is admissible under the search
    /// counters `eta`: `j` strictly gains and no member of the receiving
    /// coalition loses.
    pub fn is_admissible(
        &self,
        structure: &CoalitionStructure,
        j: usize,
        target: Target,
        eta: &[u32],
    ) -> Result<bool> {
        self.check(structure)?;
        self.check_eta(eta)?;
        let next = structure.deviate(j, target)?;
        Ok(self.admissible_move(structure, &next, j, target, eta))
    }

    /// `next` must be `structure` after `j` moved to `target`.
    pub(crate) fn admissible_move(
        &self,
        structure: &CoalitionStructure,
        next: &CoalitionStructure,
        j: usize,
        target: Target,
        eta: &[u32],
    ) -> bool {
        if self.restricted_utility(j, next, eta[j]) <= self.restricted_utility(j, structure, eta[j])
        {
            return false;
        }
        match target {
            Target::Empty => true,
            Target::Block(b) => structure.members(b).all(|k| {
                self.restricted_utility(k, next, eta[k])
                    >= self.restricted_utility(k, structure, eta[k])
            }),
        }
    }

    /// True iff no cell has an admissible deviation, `Empty` included.
    pub fn is_individually_stable(
        &self,
        structure: &CoalitionStructure,
        eta: &[u32],
    ) -> Result<bool> {
        self.check(structure)?;
        self.check_eta(eta)?;
        Ok(self.first_admissible(structure, eta).is_none())
    }

    /// First admissible deviation in cell/target order, if any.
    pub fn first_admissible(
        &self,
        structure: &CoalitionStructure,
        eta: &[u32],
    ) -> Option<(usize, Target)> {
        (0..self.cells()).find_map(|j| {
            structure.targets_for(j).into_iter().find_map(|target| {
                let next = structure.deviate(j, target).ok()?;
                self.admissible_move(structure, &next, j, target, eta)
                    .then_some((j, target))
            })
        })
    }
}
