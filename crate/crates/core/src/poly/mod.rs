//! Sparse multivariate polynomials stored as a support (list of exponent
//! vectors) and a matching coefficient vector.

mod exponent;
pub mod io;
mod pop;

use std::collections::{BTreeMap, BTreeSet};

pub use exponent::{reduce_binary, Exponent};
pub use pop::{support_of, HalfDegrees, PopInstance};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A polynomial in `nvars` commuting variables.
///
/// `supp` is sorted in graded order, contains no duplicates and every stored
/// coefficient is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial<T> {
    nvars: usize,
    supp: Vec<Exponent>,
    coe: Vec<T>,
}

impl<T: Scalar> Polynomial<T> {
    /// Builds a canonical polynomial from an arbitrary term list: repeated
    /// exponents are merged and zero terms are dropped.
    pub fn canonicalize<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, T)>,
    {
        let mut acc: BTreeMap<Exponent, T> = BTreeMap::new();
        for (alpha, c) in terms {
            if alpha.nvars() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: alpha.nvars(),
                });
            }
            *acc.entry(alpha).or_insert_with(T::zero) += c;
        }
        Ok(Self::from_sorted_map(nvars, acc))
    }

    fn from_sorted_map(nvars: usize, acc: BTreeMap<Exponent, T>) -> Self {
        let (supp, coe) = acc.into_iter().filter(|(_, c)| !c.is_zero()).unzip();
        Self { nvars, supp, coe }
    }

    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            supp: Vec::new(),
            coe: Vec::new(),
        }
    }

    pub fn constant(nvars: usize, c: T) -> Self {
        if c.is_zero() {
            return Self::zero(nvars);
        }
        Self {
            nvars,
            supp: vec![Exponent::zero(nvars)],
            coe: vec![c],
        }
    }

    /// The monomial `x^alpha` with unit coefficient.
    pub fn monomial(alpha: Exponent) -> Self {
        Self {
            nvars: alpha.nvars(),
            supp: vec![alpha],
            coe: vec![T::one()],
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn supp(&self) -> &[Exponent] {
        &self.supp
    }

    pub fn coe(&self) -> &[T] {
        &self.coe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, T)> + '_ {
        self.supp.iter().zip(self.coe.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.supp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supp.is_empty()
    }

    /// Maximal total degree of the support; zero for constants and the zero
    /// polynomial.
    pub fn degree(&self) -> u32 {
        self.supp.iter().map(Exponent::degree).max().unwrap_or(0)
    }

    /// Indices of variables occurring in at least one term.
    pub fn variables(&self) -> BTreeSet<usize> {
        self.supp.iter().flat_map(|a| a.support()).collect()
    }

    /// Coefficient of `x^alpha`, zero when absent.
    pub fn coefficient(&self, alpha: &Exponent) -> T {
        match self.supp.binary_search(alpha) {
            Ok(i) => self.coe[i],
            Err(_) => T::zero(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut acc: BTreeMap<Exponent, T> = BTreeMap::new();
        for (a, ca) in self.terms() {
            for (b, cb) in other.terms() {
                *acc.entry(a.add(b)).or_insert_with(T::zero) += ca * cb;
            }
        }
        Self::from_sorted_map(self.nvars, acc)
    }

    pub fn scale(&self, s: T) -> Self {
        let acc = self.terms().map(|(a, c)| (a.clone(), c * s)).collect();
        Self::from_sorted_map(self.nvars, acc)
    }

    /// Applies `x_i^2 = 1` to the first `nb` variables.
    pub fn reduce_binary(&self, nb: usize) -> Self {
        if nb == 0 {
            return self.clone();
        }
        let mut acc: BTreeMap<Exponent, T> = BTreeMap::new();
        for (a, c) in self.terms() {
            *acc.entry(reduce_binary(a, nb)).or_insert_with(T::zero) += c;
        }
        Self::from_sorted_map(self.nvars, acc)
    }

    pub fn evaluate(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.nvars);
        self.terms()
            .map(|(a, c)| {
                a.entries()
                    .iter()
                    .zip(x)
                    .fold(c, |acc, (&e, &xi)| acc * xi.powi(e as i32))
            })
            .fold(T::zero(), |s, t| s + t)
    }
}

/// All monomials in the variables `vars` (sorted indices) of total degree at
/// most `max_degree`, in graded order. Binary variables (index `< nb`) appear
/// with power at most one.
pub fn monomial_basis(nvars: usize, vars: &[usize], max_degree: u32, nb: usize) -> Vec<Exponent> {
    fn grow(
        vars: &[usize],
        left: u32,
        nb: usize,
        cur: &mut Vec<u32>,
        out: &mut Vec<Exponent>,
    ) {
        let Some((&v, rest)) = vars.split_first() else {
            out.push(Exponent::new(cur.clone()));
            return;
        };
        let cap = if v < nb { left.min(1) } else { left };
        for e in 0..=cap {
            cur[v] = e;
            grow(rest, left - e, nb, cur, out);
        }
        cur[v] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; nvars];
    grow(vars, max_degree, nb, &mut cur, &mut out);
    out.sort();
    out
}

impl<T: Scalar> std::fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        for (k, (a, c)) in self.terms().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}")?;
            if a.degree() > 0 {
                write!(f, "*{a}")?;
            }
        }
        Ok(())
    }
}
