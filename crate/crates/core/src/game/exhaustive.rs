use super::{CoalitionStructure, Game};
use crate::error::{Error, Result};

/// Largest network size for which partitions are enumerated (Bell(12) = 4 213 597).
pub const MAX_ENUMERATION_CELLS: usize = 12;

/// What the exhaustive search maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Objective {
    /// Sum of the cells' spectral efficiencies.
    #[default]
    TotalSe,
    /// Mean spectral efficiency per cell.
    PerCellMean,
}

impl Objective {
    pub fn evaluate(self, game: &Game<'_>, structure: &CoalitionStructure) -> f64 {
        let total = game.total_se(structure);
        match self {
            Objective::TotalSe => total,
            Objective::PerCellMean => total / game.cells() as f64,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Objective::TotalSe => "total-se",
            Objective::PerCellMean => "per-cell-mean",
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "total-se" | "total" => Ok(Objective::TotalSe),
            "per-cell-mean" | "mean" => Ok(Objective::PerCellMean),
            other => Err(Error::InvalidParameter(format!(
                "unknown objective {other:?}"
            ))),
        }
    }
}

/// Iterator over all set partitions of `0..cells` as restricted-growth
/// strings in lexicographic order.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..i]) for i >= 1
    prefix_max: Vec<usize>,
    done: bool,
}

impl Iterator for Partitions {
    type Item = CoalitionStructure;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = CoalitionStructure::from_rgs(self.labels.clone());
        // Advance: bump the rightmost position that may still grow.
        let n = self.labels.len();
        match (1..n).rev().find(|&i| self.labels[i] <= self.prefix_max[i]) {
            None => self.done = true,
            Some(i) => {
                self.labels[i] += 1;
                let m = self.prefix_max[i].max(self.labels[i]);
                for k in i + 1..n {
                    self.labels[k] = 0;
                    self.prefix_max[k] = m;
                }
            }
        }
        Some(out)
    }
}

/// Every partition of `cells` cells exactly once.
pub fn enumerate_partitions(cells: usize) -> Result<Partitions> {
    if cells == 0 || cells > MAX_ENUMERATION_CELLS {
        return Err(Error::TooManyCells {
            cells,
            max: MAX_ENUMERATION_CELLS,
        });
    }
    Ok(Partitions {
        labels: vec![0; cells],
        prefix_max: vec![0; cells],
        done: false,
    })
}

/// Best structure by exhaustive search and its total spectral efficiency.
/// Ties keep the earliest partition in enumeration order.
pub fn exhaustive_optimum(
    game: &Game<'_>,
    objective: Objective,
) -> Result<(CoalitionStructure, f64)> {
    let mut best: Option<(CoalitionStructure, f64)> = None;
    for c in enumerate_partitions(game.cells())? {
        let value = objective.evaluate(game, &c);
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((c, value));
        }
    }
    let (structure, _) = best.expect("at least one partition");
    let total = game.total_se(&structure);
    Ok((structure, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_deployment;
    use crate::propagation::{estimate_propagation, PropagationTable};
    use crate::spectral::{Scheme, SystemParams};
    use std::collections::BTreeSet;

    /// Distinct canonical partitions among all `n^n` labelings.
    fn brute_force_count(n: usize) -> usize {
        let mut seen = BTreeSet::new();
        let mut labels = vec![0usize; n];
        loop {
            seen.insert(CoalitionStructure::from_labels(&labels).unwrap());
            let mut i = 0;
            while i < n {
                labels[i] += 1;
                if labels[i] < n {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
            if i == n {
                return seen.len();
            }
        }
    }

    /// Bell numbers via the Bell triangle.
    fn bell(n: usize) -> u64 {
        let mut row = vec![1u64];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for &x in &row {
                next.push(next.last().unwrap() + x);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn partition_counts_match_independent_counts() {
        assert_eq!(brute_force_count(2), 2);
        assert_eq!(brute_force_count(3), 5);
        for n in 1..=6 {
            let all: Vec<_> = enumerate_partitions(n).unwrap().collect();
            assert_eq!(all.len(), brute_force_count(n), "n={n}");
            let unique: BTreeSet<_> = all.iter().cloned().collect();
            assert_eq!(unique.len(), all.len());
            assert!(all.windows(2).all(|w| w[0].labels() < w[1].labels()));
        }
        assert_eq!(bell(7), 877);
        assert_eq!(enumerate_partitions(7).unwrap().count(), 877);
        assert_eq!(enumerate_partitions(9).unwrap().count() as u64, bell(9));
    }

    #[test]
    fn extremes_are_enumerated() {
        let all: Vec<_> = enumerate_partitions(5).unwrap().collect();
        assert_eq!(all.first(), Some(&CoalitionStructure::grand(5)));
        assert_eq!(all.last(), Some(&CoalitionStructure::singletons(5)));
    }

    #[test]
    fn enumeration_guard() {
        assert!(enumerate_partitions(0).is_err());
        assert!(enumerate_partitions(13).is_err());
        assert!(enumerate_partitions(12).is_ok());
    }

    #[test]
    fn optimum_dominates_extremes() {
        let d = generate_deployment(6, 25.0, 12).unwrap();
        let t = estimate_propagation(&d, 1_000, 2).unwrap();
        for scheme in Scheme::ALL {
            for m in [60, 200, 600] {
                let p = SystemParams::from_db(m, 10, 400, 5.0, 6).unwrap();
                let g = Game::with_uniform_budget(p, &t, scheme, 100).unwrap();
                let (best, total) = exhaustive_optimum(&g, Objective::TotalSe).unwrap();
                assert_eq!(total, g.total_se(&best));
                assert!(total >= g.total_se(&CoalitionStructure::grand(6)));
                assert!(total >= g.total_se(&CoalitionStructure::singletons(6)));
                let (mean_best, _) = exhaustive_optimum(&g, Objective::PerCellMean).unwrap();
                assert_eq!(mean_best, best);
            }
        }
    }

    #[test]
    fn single_cell_optimum() {
        let t = PropagationTable::from_matrices(1, vec![1.0], vec![1.0], 1, 0, 0).unwrap();
        let p = SystemParams::from_db(100, 10, 400, 5.0, 1).unwrap();
        let g = Game::with_uniform_budget(p, &t, Scheme::Mrc, 1).unwrap();
        let (best, _) = exhaustive_optimum(&g, Objective::TotalSe).unwrap();
        assert_eq!(best, CoalitionStructure::singletons(1));
    }
}
