//! Block-diagonal SDPs in SDPA form, conversion from moment relaxations, an
//! interior-point solver and SDPA sparse-file I/O.
//!
//! An [`SdpProblem`] is the SDPA pair
//!
//! ```text
//! (P)  min  c'x + offset   s.t.  Z = sum_i F_i x_i - F_0 >= 0
//! (D)  max  <F_0, Y> + offset   s.t.  <F_i, Y> = c_i,  Y >= 0
//! ```
//!
//! with free `x`. For a moment relaxation `x` holds the moments left after
//! eliminating `y_0 = 1` and the moment equalities, so (P) is the moment
//! side and (D) the sum-of-squares side.

mod ipm;
mod presolve;
mod sdpa;
mod standard;

pub use presolve::facially_reduced;
pub use ipm::{solve_ipm, IpmOptions, IterateLog, SolveResult, SolveStatus};
pub use sdpa::{parse_sdpa, read_sdpa, to_sdpa_string, write_sdpa};
pub use standard::{standard_form_with_map, to_standard_form, MomentMap};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Shape of one diagonal block of `Z` and `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Dense(usize),
    /// Diagonal block, written with a negative size in SDPA files.
    Diagonal(usize),
}

impl BlockKind {
    pub fn size(self) -> usize {
        match self {
            BlockKind::Dense(n) | BlockKind::Diagonal(n) => n,
        }
    }
}

/// Upper-triangle entry of a data matrix (0-based, `row <= col`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry<T> {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem<T> {
    pub blocks: Vec<BlockKind>,
    pub c: Vec<T>,
    /// `F_0`.
    pub constant: Vec<Entry<T>>,
    /// `F_1 .. F_m`.
    pub matrices: Vec<Vec<Entry<T>>>,
    /// Constant added to both objectives.
    pub offset: T,
}

/// Sorts by position, mirrors lower-triangle entries, merges duplicates and
/// drops zeros.
pub(crate) fn canonical_entries<T: Scalar>(mut v: Vec<Entry<T>>) -> Vec<Entry<T>> {
    for e in &mut v {
        if e.row > e.col {
            std::mem::swap(&mut e.row, &mut e.col);
        }
    }
    v.sort_by_key(|e| (e.block, e.row, e.col));
    let mut out: Vec<Entry<T>> = Vec::with_capacity(v.len());
    for e in v {
        match out.last_mut() {
            Some(l) if (l.block, l.row, l.col) == (e.block, e.row, e.col) => l.value += e.value,
            _ => out.push(e),
        }
    }
    out.retain(|e| !e.value.is_zero());
    out
}

impl<T: Scalar> SdpProblem<T> {
    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    /// Total dimension of the block-diagonal matrices.
    pub fn total_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.size()).sum()
    }

    /// Block size -> count, diagonal blocks counted entrywise as 1x1.
    pub fn block_histogram(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut h = std::collections::BTreeMap::new();
        for b in &self.blocks {
            match *b {
                BlockKind::Dense(n) => *h.entry(n).or_insert(0) += 1,
                BlockKind::Diagonal(n) => *h.entry(1).or_insert(0) += n,
            }
        }
        h
    }

    /// Puts every data matrix in canonical entry order.
    pub fn canonicalize(&mut self) {
        self.constant = canonical_entries(std::mem::take(&mut self.constant));
        for m in &mut self.matrices {
            *m = canonical_entries(std::mem::take(m));
        }
    }

    /// Checks sizes, index ranges and diagonal-block shape.
    pub fn validate(&self) -> Result<()> {
        if self.matrices.len() != self.c.len() {
            return Err(Error::InvalidInput(format!(
                "{} objective coefficients for {} data matrices",
                self.c.len(),
                self.matrices.len()
            )));
        }
        if self.blocks.iter().any(|b| b.size() == 0) {
            return Err(Error::InvalidInput("zero-sized block".into()));
        }
        for e in std::iter::once(&self.constant).chain(&self.matrices).flatten() {
            let kind = self.blocks.get(e.block).ok_or_else(|| {
                Error::InvalidInput(format!("entry names missing block {}", e.block))
            })?;
            if e.row > e.col || e.col >= kind.size() {
                return Err(Error::InvalidInput(format!(
                    "entry ({}, {}) out of range for block {}",
                    e.row, e.col, e.block
                )));
            }
            if matches!(kind, BlockKind::Diagonal(_)) && e.row != e.col {
                return Err(Error::InvalidInput(format!(
                    "off-diagonal entry in diagonal block {}",
                    e.block
                )));
            }
        }
        Ok(())
    }

    /// Objective of (P) at `x`, offset included.
    pub fn primal_value(&self, x: &[T]) -> T {
        self.c.iter().zip(x).fold(self.offset, |s, (&c, &v)| s + c * v)
    }
}
