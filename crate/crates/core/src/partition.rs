//! Nearest-displayed-item partition of the whole dataset.
//!
//! Showing `k` items splits the collection into `k` cells: every item joins
//! the cell of the displayed item closest to it. A user's pick is then read
//! as evidence for the whole cell of the picked item.

use crate::dataset::{euclidean, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The items shown in one round, in display order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DisplaySet(Vec<usize>);

impl DisplaySet {
    /// Validates that every index is below `n` and no index repeats.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() || indices.len() > n {
            return Err(Error::InvalidDisplaySize {
                k: indices.len(),
                n,
            });
        }
        let mut seen = vec![false; n];
        for &i in &indices {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicateDisplayItem(i));
            }
        }
        Ok(DisplaySet(indices))
    }

    pub(crate) fn from_distinct(indices: Vec<usize>) -> Self {
        DisplaySet(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn item(&self, position: usize) -> Option<usize> {
        self.0.get(position).copied()
    }

    pub fn position_of(&self, item: usize) -> Option<usize> {
        self.0.iter().position(|&i| i == item)
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.contains(&item)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// `owner[i]` is the display position whose item is nearest to item `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionAssignment {
    owner: Vec<usize>,
    k: usize,
}

impl PartitionAssignment {
    pub fn owners(&self) -> &[usize] {
        &self.owner
    }

    pub fn cells(&self) -> usize {
        self.k
    }

    /// All items in the cell of display `position`, in increasing order.
    pub fn members(&self, position: usize) -> Result<Vec<usize>> {
        partition_members(self, position)
    }
}

/// Assigns every item to its nearest displayed item. Equal distances go to
/// the earlier display position.
pub fn assign_partitions<F: Scalar>(
    dataset: &Dataset<F>,
    display: &DisplaySet,
) -> Result<PartitionAssignment> {
    let display = DisplaySet::new(display.indices().to_vec(), dataset.len())?;
    let centers: Vec<&[F]> = display.indices().iter().map(|&i| dataset.vector(i)).collect();
    let owner = dataset
        .vectors()
        .map(|x| {
            let mut best = 0;
            let mut best_d = euclidean(x, centers[0]);
            for (j, c) in centers.iter().enumerate().skip(1) {
                let d = euclidean(x, c);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            best
        })
        .collect();
    Ok(PartitionAssignment {
        owner,
        k: display.len(),
    })
}

pub fn partition_members(assignment: &PartitionAssignment, position: usize) -> Result<Vec<usize>> {
    if position >= assignment.k {
        return Err(Error::IndexOutOfRange {
            index: position,
            len: assignment.k,
        });
    }
    Ok(assignment
        .owner
        .iter()
        .enumerate()
        .filter(|&(_, &o)| o == position)
        .map(|(i, _)| i)
        .collect())
}
