//! Moment relaxations as block SDPs over moment variables `y_alpha`.
//!
//! Every PSD block is a (sub)matrix of a moment or localizing matrix whose
//! entries are linear forms in the moments; all blocks share one
//! [`MomentIndex`], so overlapping cliques see the same variables.

mod assemble;

use std::collections::{BTreeMap, BTreeSet};

pub use assemble::{
    assemble_cs, assemble_cs_ts, assemble_dense, assemble_ts, equality_multipliers, moment_block,
};

use crate::poly::{Exponent, Polynomial};
use crate::scalar::Scalar;

/// Bijection between the moments used by a relaxation and `0..len`. The
/// zero exponent always has id 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentIndex {
    exponents: Vec<Exponent>,
    ids: BTreeMap<Exponent, usize>,
}

impl MomentIndex {
    fn from_set(nvars: usize, mut set: BTreeSet<Exponent>) -> Self {
        set.insert(Exponent::zero(nvars));
        let exponents: Vec<Exponent> = set.into_iter().collect();
        let ids = exponents
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self { exponents, ids }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn id(&self, alpha: &Exponent) -> Option<usize> {
        self.ids.get(alpha).copied()
    }

    pub fn exponent(&self, id: usize) -> &Exponent {
        &self.exponents[id]
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exponents
    }
}

/// Sparse linear form `sum_k coef_k * y_{id_k}` with ids strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm<T> {
    pub terms: Vec<(usize, T)>,
}

impl<T: Scalar> LinearForm<T> {
    fn from_poly(p: &Polynomial<T>, index: &MomentIndex) -> Self {
        let mut terms: Vec<(usize, T)> = p
            .terms()
            .map(|(a, c)| (index.id(a).expect("moment indexed"), c))
            .collect();
        terms.sort_by_key(|t| t.0);
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value of the form at a moment vector.
    pub fn eval(&self, y: &[T]) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |acc, &(id, c)| acc + c * y[id])
    }
}

/// Where a PSD block comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockOrigin {
    Moment { clique: usize },
    Localizing { clique: usize, ineq: usize },
    /// Extra first-order moment matrix of a clique.
    FirstOrder { clique: usize },
}

/// Symmetric block whose `(i, j)` entry is `L_y(g * x^{b_i + b_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock<T> {
    pub origin: BlockOrigin,
    pub basis: Vec<Exponent>,
    /// Row-major `dim x dim` entries.
    pub entries: Vec<LinearForm<T>>,
}

impl<T> PsdBlock<T> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &LinearForm<T> {
        &self.entries[i * self.dim() + j]
    }
}

/// Assembled moment relaxation:
/// `min L(f)` s.t. PSD blocks, `L(g_j) >= 0` scalars, moment equalities,
/// `y_0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSdp<T> {
    pub index: MomentIndex,
    pub psd_blocks: Vec<PsdBlock<T>>,
    pub scalar_ineqs: Vec<LinearForm<T>>,
    pub moment_eqs: Vec<LinearForm<T>>,
    pub objective: LinearForm<T>,
}

/// Structural summary of a relaxation.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RelaxationReport {
    /// PSD block size -> count (1x1 blocks are listed as scalar constraints).
    pub block_sizes: BTreeMap<usize, usize>,
    pub num_psd_blocks: usize,
    pub max_block_size: usize,
    pub num_scalar_ineqs: usize,
    pub num_moments: usize,
    pub num_equalities: usize,
}

impl<T: Scalar> MomentSdp<T> {
    pub fn report(&self) -> RelaxationReport {
        let mut block_sizes = BTreeMap::new();
        for b in &self.psd_blocks {
            *block_sizes.entry(b.dim()).or_insert(0) += 1;
        }
        RelaxationReport {
            block_sizes,
            num_psd_blocks: self.psd_blocks.len(),
            max_block_size: self.psd_blocks.iter().map(PsdBlock::dim).max().unwrap_or(1),
            num_scalar_ineqs: self.scalar_ineqs.len(),
            num_moments: self.index.len(),
            num_equalities: self.moment_eqs.len(),
        }
    }

    /// Every `(block, i, j)` entry as its set of moment ids, for structural
    /// comparisons between relaxations.
    pub fn entry_moments(&self) -> BTreeSet<Vec<Exponent>> {
        let mut out = BTreeSet::new();
        for b in &self.psd_blocks {
            for f in &b.entries {
                out.insert(f.terms.iter().map(|&(id, _)| self.index.exponent(id).clone()).collect());
            }
        }
        out
    }
}

/// Structure report for logs and regression tests.
pub fn lower_relaxation_report<T: Scalar>(msdp: &MomentSdp<T>) -> RelaxationReport {
    msdp.report()
}
