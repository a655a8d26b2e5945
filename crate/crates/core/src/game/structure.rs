use std::fmt;

use crate::error::{Error, Result};

/// A partition of the cells into pilot-sharing coalitions.
///
/// Stored as a restricted-growth string: cell 0 carries label 0 and every
/// new label is one more than the largest label seen so far. Equal
/// partitions therefore have identical encodings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoalitionStructure {
    labels: Vec<usize>,
    sizes: Vec<usize>,
}

/// Where a deviating cell goes: an existing coalition (by its current
/// label) or a fresh singleton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Block(usize),
    Empty,
}

impl CoalitionStructure {
    /// Canonicalizes arbitrary labels by order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidStructure("no cells".into()));
        }
        let mut map: Vec<(usize, usize)> = Vec::new();
        let canonical = labels
            .iter()
            .map(|&raw| match map.iter().find(|(r, _)| *r == raw) {
                Some(&(_, c)) => c,
                None => {
                    let c = map.len();
                    map.push((raw, c));
                    c
                }
            })
            .collect();
        Ok(Self::from_rgs(canonical))
    }

    /// Builds from a list of blocks; they must be disjoint and cover `0..cells`.
    pub fn from_blocks(cells: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![usize::MAX; cells];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidStructure("empty block".into()));
            }
            for &cell in block {
                if cell >= cells {
                    return Err(Error::InvalidStructure(format!("cell {cell} out of range")));
                }
                if labels[cell] != usize::MAX {
                    return Err(Error::InvalidStructure(format!(
                        "cell {cell} in two blocks"
                    )));
                }
                labels[cell] = b;
            }
        }
        if let Some(cell) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidStructure(format!("cell {cell} not covered")));
        }
        Self::from_labels(&labels)
    }

    /// `labels` must already be a restricted-growth string.
    pub(crate) fn from_rgs(labels: Vec<usize>) -> Self {
        debug_assert!(is_rgs(&labels));
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0; blocks];
        for &l in &labels {
            sizes[l] += 1;
        }
        Self { labels, sizes }
    }

    /// Every cell alone: no pilot sharing.
    pub fn singletons(cells: usize) -> Self {
        Self::from_rgs((0..cells).collect())
    }

    /// One coalition holding every cell: full pilot reuse.
    pub fn grand(cells: usize) -> Self {
        Self::from_rgs(vec![0; cells])
    }

    pub fn cells(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_blocks(&self) -> usize {
        self.sizes.len()
    }

    #[inline]
    pub fn label_of(&self, cell: usize) -> usize {
        self.labels[cell]
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Size of the coalition containing `cell`.
    #[inline]
    pub fn coalition_size(&self, cell: usize) -> usize {
        self.sizes[self.labels[cell]]
    }

    pub fn members(&self, label: usize) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter(move |(_, &l)| l == label)
            .map(|(c, _)| c)
    }

    /// Members of the coalition containing `cell`, itself included.
    pub fn coalition_of(&self, cell: usize) -> Vec<usize> {
        self.members(self.labels[cell]).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.num_blocks()];
        for (c, &l) in self.labels.iter().enumerate() {
            blocks[l].push(c);
        }
        blocks
    }

    /// Mean coalition size, `cells / blocks`.
    pub fn mean_block_size(&self) -> f64 {
        self.cells() as f64 / self.num_blocks() as f64
    }

    /// Every deviation open to `cell`: the other blocks, then `Empty` when
    /// the cell is not already alone.
    pub fn targets_for(&self, cell: usize) -> Vec<Target> {
        let own = self.labels[cell];
        let mut out: Vec<Target> = (0..self.num_blocks())
            .filter(|&b| b != own)
            .map(Target::Block)
            .collect();
        if self.sizes[own] > 1 {
            out.push(Target::Empty);
        }
        out
    }

    /// `cell` leaves its coalition and joins `target`; the result is canonical.
    pub fn deviate(&self, cell: usize, target: Target) -> Result<Self> {
        if cell >= self.cells() {
            return Err(Error::CellOutOfRange {
                cell,
                cells: self.cells(),
            });
        }
        let own = self.labels[cell];
        let new_label = match target {
            Target::Block(b) if b == own => return Err(Error::NotADeviation { cell }),
            Target::Block(b) if b >= self.num_blocks() => {
                return Err(Error::InvalidStructure(format!("no block labelled {b}")))
            }
            Target::Block(b) => b,
            Target::Empty if self.sizes[own] == 1 => return Err(Error::NotADeviation { cell }),
            Target::Empty => self.num_blocks(),
        };
        let mut labels = self.labels.clone();
        labels[cell] = new_label;
        Self::from_labels(&labels)
    }

    /// Parses whitespace- or comma-separated labels, ignoring `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let labels = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or_default())
            .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::InvalidStructure(format!("{t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_labels(&labels)
    }

    /// Labels as one space-separated line.
    pub fn to_label_line(&self) -> String {
        let parts: Vec<String> = self.labels.iter().map(|l| l.to_string()).collect();
        parts.join(" ")
    }
}

impl fmt::Display for CoalitionStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            let cells: Vec<String> = block.iter().map(|c| c.to_string()).collect();
            write!(f, "{{{}}}", cells.join(","))?;
        }
        write!(f, "}}")
    }
}

pub(crate) fn is_rgs(labels: &[usize]) -> bool {
    let mut next = 0;
    for &l in labels {
        if l > next {
            return false;
        }
        if l == next {
            next += 1;
        }
    }
    !labels.is_empty()
}
