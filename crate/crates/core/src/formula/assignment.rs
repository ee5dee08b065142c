use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use super::TruthValue;
use crate::MAX_WIDTH;

/// Enumeration refuses universes larger than `2^MAX_ENUMERATION_WIDTH`.
pub const MAX_ENUMERATION_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignmentError {
    #[error("index {index} is unassigned and cannot be flipped")]
    FlipUnassigned { index: usize },
    #[error("index {index} is outside width {width}")]
    OutOfRange { index: usize, width: usize },
    #[error("cannot enumerate 2^{width} assignments (limit 2^{limit})")]
    TooWide { width: usize, limit: usize },
    #[error("width {0} exceeds the supported maximum of 64")]
    WidthUnsupported(usize),
    #[error("invalid assignment character {0:?}; expected 0, 1 or U")]
    BadSymbol(char),
}

/// A fixed-width vector of truth values. Position `i` holds variable `x{i+1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<TruthValue>);

impl Assignment {
    pub fn new(values: Vec<TruthValue>) -> Self {
        Assignment(values)
    }

    pub fn unassigned(width: usize) -> Self {
        Assignment(alloc::vec![TruthValue::Unassigned; width])
    }

    /// Boolean assignment with bit `i` of `bits` at position `i`.
    pub fn from_bits(width: usize, bits: u64) -> Self {
        Assignment(
            (0..width)
                .map(|i| TruthValue::from_bool((bits >> i) & 1 == 1))
                .collect(),
        )
    }

    pub fn from_bools(values: &[bool]) -> Self {
        Assignment(values.iter().map(|&b| TruthValue::from_bool(b)).collect())
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, index: usize) -> Option<TruthValue> {
        self.0.get(index).copied()
    }

    pub fn values(&self) -> &[TruthValue] {
        &self.0
    }

    pub fn is_boolean(&self) -> bool {
        self.0.iter().all(|v| v.is_assigned())
    }

    /// Bits of the `True` positions.
    pub fn true_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| **v == TruthValue::True)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Bits of the assigned (non-`Unassigned`) positions.
    pub fn assigned_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_assigned())
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    /// Negates the values at `indices`. Every flipped position must be Boolean.
    pub fn flip(&self, indices: &[usize]) -> Result<Assignment, AssignmentError> {
        let mut values = self.0.clone();
        for &index in indices {
            let slot = values.get_mut(index).ok_or(AssignmentError::OutOfRange {
                index,
                width: self.width(),
            })?;
            if !slot.is_assigned() {
                return Err(AssignmentError::FlipUnassigned { index });
            }
            *slot = !*slot;
        }
        Ok(Assignment(values))
    }

    /// The mutant that keeps the values at `keep` and masks every other
    /// position to `Unassigned`.
    pub fn mask(&self, keep: &[usize]) -> Assignment {
        let mut bits = 0u64;
        for &k in keep {
            if k < self.width() {
                bits |= 1 << k;
            }
        }
        self.mask_bits(bits)
    }

    /// As [`Assignment::mask`] with the kept positions given as a bitmask.
    pub fn mask_bits(&self, keep: u64) -> Assignment {
        Assignment(
            self.0
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if (keep >> i) & 1 == 1 {
                        v
                    } else {
                        TruthValue::Unassigned
                    }
                })
                .collect(),
        )
    }

    /// `0`/`1`/`U` per position, position 0 first.
    pub fn to_bitstring(&self) -> alloc::string::String {
        self.0.iter().map(|v| v.symbol()).collect()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.0 {
            write!(f, "{}", v.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = AssignmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let values = s
            .chars()
            .map(|c| match c {
                '0' | 'F' | 'f' => Ok(TruthValue::False),
                '1' | 'T' | 't' => Ok(TruthValue::True),
                'U' | 'u' | '*' => Ok(TruthValue::Unassigned),
                other => Err(AssignmentError::BadSymbol(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if values.len() > MAX_WIDTH {
            return Err(AssignmentError::WidthUnsupported(values.len()));
        }
        Ok(Assignment(values))
    }
}

/// Iterator over Boolean assignments in lexicographic order, first position
/// most significant (`00, 01, 10, 11`).
#[derive(Debug, Clone)]
pub struct Assignments {
    width: usize,
    positions: Vec<usize>,
    next: u64,
    end: u64,
}

impl Assignments {
    fn assignment_for(&self, counter: u64) -> Assignment {
        let n = self.positions.len();
        let mut bits = 0u64;
        for (j, &p) in self.positions.iter().enumerate() {
            if (counter >> (n - 1 - j)) & 1 == 1 {
                bits |= 1 << p;
            }
        }
        Assignment::from_bits(self.width, bits)
    }

    /// Number of assignments in the whole universe.
    pub fn universe_size(&self) -> u64 {
        1u64 << self.positions.len()
    }
}

impl Iterator for Assignments {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        if self.next >= self.end {
            return None;
        }
        let a = self.assignment_for(self.next);
        self.next += 1;
        Some(a)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Assignments {}

fn universe(width: usize, used_vars: Option<&[usize]>) -> Result<Assignments, AssignmentError> {
    if width > MAX_WIDTH {
        return Err(AssignmentError::WidthUnsupported(width));
    }
    let positions: Vec<usize> = match used_vars {
        Some(used) => {
            let mut used = used.to_vec();
            used.sort_unstable();
            used.dedup();
            if let Some(&index) = used.iter().find(|&&i| i >= width) {
                return Err(AssignmentError::OutOfRange { index, width });
            }
            used
        }
        None => (0..width).collect(),
    };
    if positions.len() > MAX_ENUMERATION_WIDTH {
        return Err(AssignmentError::TooWide {
            width: positions.len(),
            limit: MAX_ENUMERATION_WIDTH,
        });
    }
    let end = 1u64 << positions.len();
    Ok(Assignments {
        width,
        positions,
        next: 0,
        end,
    })
}

/// All Boolean assignments of `width` positions, or with `used_vars` given,
/// all assignments of those positions with every other position `False`.
pub fn enumerate_assignments(
    width: usize,
    used_vars: Option<&[usize]>,
) -> Result<Assignments, AssignmentError> {
    universe(width, used_vars)
}

/// `count` distinct assignments drawn uniformly without replacement from the
/// same universe as [`enumerate_assignments`], returned in lexicographic
/// order. The whole universe is returned when it has at most `count` members.
pub fn sample_assignments<R: Rng + ?Sized>(
    width: usize,
    used_vars: Option<&[usize]>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<Assignment>, AssignmentError> {
    let all = universe(width, used_vars)?;
    let size = all.universe_size() as usize;
    if count >= size {
        return Ok(all.collect());
    }
    let mut picks = rand::seq::index::sample(rng, size, count).into_vec();
    picks.sort_unstable();
    Ok(picks
        .into_iter()
        .map(|c| all.assignment_for(c as u64))
        .collect())
}
