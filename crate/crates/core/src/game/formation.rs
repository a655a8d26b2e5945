use std::fmt::Write as _;

use rand::seq::SliceRandom;

use super::{CoalitionStructure, Game, Target};
use crate::error::{Error, Result};
use crate::seed;

/// One accepted move of the formation dynamics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Deviation {
    /// Deviation count after this move (1-based).
    pub t: usize,
    pub cell: usize,
    /// Coalition the cell left, itself included.
    pub source: Vec<usize>,
    /// Coalition joined, before the move; `None` for a new singleton.
    pub target: Option<Vec<usize>>,
    /// The mover's search count when the move was accepted.
    pub searches: u32,
}

/// Record of one formation run.
#[derive(Debug, Clone, PartialEq)]
pub struct FormationTrace {
    pub initial: CoalitionStructure,
    pub final_structure: CoalitionStructure,
    pub deviations: Vec<Deviation>,
    pub eta: Vec<u32>,
    pub budgets: Vec<u32>,
    pub stable: bool,
}

impl FormationTrace {
    pub fn deviation_count(&self) -> usize {
        self.deviations.len()
    }

    pub fn total_searches(&self) -> u64 {
        self.eta.iter().map(|&e| u64::from(e)).sum()
    }

    pub fn mean_searches(&self) -> f64 {
        self.total_searches() as f64 / self.eta.len() as f64
    }

    /// Re-applies the deviations to the initial structure.
    pub fn replay(&self) -> Result<CoalitionStructure> {
        let mut c = self.initial.clone();
        for d in &self.deviations {
            let bad = |m: &str| Error::InvalidStructure(format!("deviation t={}: {m}", d.t));
            if c.coalition_of(d.cell) != d.source {
                return Err(bad("source coalition does not match"));
            }
            let target = match &d.target {
                None => Target::Empty,
                Some(members) => {
                    let first = *members.first().ok_or_else(|| bad("empty target"))?;
                    let label = c.label_of(first);
                    if c.members(label).collect::<Vec<_>>() != *members {
                        return Err(bad("target coalition does not match"));
                    }
                    Target::Block(label)
                }
            };
            c = c.deviate(d.cell, target)?;
        }
        Ok(c)
    }

    /// Line-oriented log, one deviation per line.
    pub fn to_log(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let nums = |v: &[u32]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::from("# formation-trace\n");
        let _ = writeln!(out, "cells {}", self.initial.cells());
        let _ = writeln!(out, "budgets {}", nums(&self.budgets));
        let _ = writeln!(out, "initial {}", self.initial.to_label_line());
        for d in &self.deviations {
            let target = d.target.as_deref().map_or("-".to_string(), join);
            let _ = writeln!(
                out,
                "deviation t={} cell={} from={} to={} searches={}",
                d.t,
                d.cell,
                join(&d.source),
                target,
                d.searches
            );
        }
        let _ = writeln!(out, "final {}", self.final_structure.to_label_line());
        let _ = writeln!(out, "eta {}", nums(&self.eta));
        let _ = writeln!(out, "stable {}", self.stable);
        out
    }

    pub fn from_log(text: &str) -> Result<Self> {
        let mut initial = None;
        let mut final_structure = None;
        let mut eta = None;
        let mut budgets = None;
        let mut stable = None;
        let mut deviations = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, rest) = line.split_once(' ').unwrap_or((line, ""));
            let err = |m: String| Error::parse(line_no, m);
            let u32s = |s: &str| {
                s.split_whitespace()
                    .map(|t| t.parse::<u32>().map_err(|e| err(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            };
            match head {
                "cells" => {}
                "budgets" => budgets = Some(u32s(rest)?),
                "eta" => eta = Some(u32s(rest)?),
                "initial" => initial = Some(CoalitionStructure::parse(rest)?),
                "final" => final_structure = Some(CoalitionStructure::parse(rest)?),
                "stable" => {
                    stable = Some(
                        rest.trim()
                            .parse::<bool>()
                            .map_err(|e| err(e.to_string()))?,
                    )
                }
                "deviation" => deviations.push(parse_deviation(rest).map_err(err)?),
                other => return Err(err(format!("unknown record {other:?}"))),
            }
        }
        let missing = |k: &str| Error::parse(0, format!("missing `{k}` record"));
        Ok(Self {
            initial: initial.ok_or_else(|| missing("initial"))?,
            final_structure: final_structure.ok_or_else(|| missing("final"))?,
            deviations,
            eta: eta.ok_or_else(|| missing("eta"))?,
            budgets: budgets.ok_or_else(|| missing("budgets"))?,
            stable: stable.ok_or_else(|| missing("stable"))?,
        })
    }
}

fn parse_deviation(rest: &str) -> std::result::Result<Deviation, String> {
    let mut t = None;
    let mut cell = None;
    let mut source = None;
    let mut target = None;
    let mut searches = None;
    let list = |s: &str| {
        s.split(',')
            .map(|x| x.parse::<usize>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
    };
    for field in rest.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got {field:?}"))?;
        match k {
            "t" => t = Some(v.parse::<usize>().map_err(|e| e.to_string())?),
            "cell" => cell = Some(v.parse::<usize>().map_err(|e| e.to_string())?),
            "from" => source = Some(list(v)?),
            "to" => target = Some(if v == "-" { None } else { Some(list(v)?) }),
            "searches" => searches = Some(v.parse::<u32>().map_err(|e| e.to_string())?),
            other => return Err(format!("unknown field {other:?}")),
        }
    }
    Ok(Deviation {
        t: t.ok_or("missing t")?,
        cell: cell.ok_or("missing cell")?,
        source: source.ok_or("missing from")?,
        target: target.ok_or("missing to")?,
        searches: searches.ok_or("missing searches")?,
    })
}

impl Game<'_> {
    /// Runs the budgeted formation dynamics from all-singletons.
    pub fn run_formation(&self, seed: u64) -> FormationTrace {
        self.run_formation_from(CoalitionStructure::singletons(self.cells()), seed)
            .expect("singletons match the game size")
    }

    /// Runs the formation dynamics from `initial`.
    ///
    /// Cells are visited in a random order. The visited cell walks its
    /// profitable targets in random order, paying one search per request;
    /// profitability is re-evaluated with the current counter before each
    /// request. An accepted move restarts the scan with a fresh order. The
    /// run ends after a full pass without moves that leaves the structure
    /// individually stable under the final counters.
    pub fn run_formation_from(
        &self,
        initial: CoalitionStructure,
        seed: u64,
    ) -> Result<FormationTrace> {
        if initial.cells() != self.cells() {
            return Err(Error::InvalidStructure(format!(
                "initial structure has {} cells, game has {}",
                initial.cells(),
                self.cells()
            )));
        }
        let cells = self.cells();
        let mut rng = seed::rng(seed);
        let mut current = initial.clone();
        let mut eta = vec![0u32; cells];
        let mut deviations = Vec::new();
        let mut order: Vec<usize> = (0..cells).collect();

        loop {
            order.shuffle(&mut rng);
            let mut moved = false;
            'scan: for &j in &order {
                let mut targets = current.targets_for(j);
                targets.shuffle(&mut rng);
                for target in targets {
                    let next = current.deviate(j, target)?;
                    if self.restricted_utility(j, &next, eta[j])
                        <= self.restricted_utility(j, &current, eta[j])
                    {
                        continue;
                    }
                    eta[j] += 1;
                    if self.admissible_move(&current, &next, j, target, &eta) {
                        deviations.push(Deviation {
                            t: deviations.len() + 1,
                            cell: j,
                            source: current.coalition_of(j),
                            target: match target {
                                Target::Empty => None,
                                Target::Block(b) => Some(current.members(b).collect()),
                            },
                            searches: eta[j],
                        });
                        current = next;
                        moved = true;
                        break 'scan;
                    }
                }
            }
            // Counters that crossed a budget during a quiet pass can turn a
            // rejected request into an admissible one; keep scanning then.
            if !moved && self.first_admissible(&current, &eta).is_none() {
                break;
            }
        }

        let stable = self.first_admissible(&current, &eta).is_none();
        Ok(FormationTrace {
            initial,
            final_structure: current,
            deviations,
            eta,
            budgets: self.budgets.clone(),
            stable,
        })
    }
}
