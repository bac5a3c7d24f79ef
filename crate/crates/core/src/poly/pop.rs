use std::collections::BTreeSet;

use super::{Exponent, Polynomial};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Polynomial optimization problem
/// `min f(x) s.t. g_j(x) >= 0, h_k(x) = 0`, where the first `nb` variables
/// are binary (`x_i^2 = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct PopInstance<T> {
    n: usize,
    nb: usize,
    objective: Polynomial<T>,
    ineqs: Vec<Polynomial<T>>,
    eqs: Vec<Polynomial<T>>,
}

/// Half degrees `ceil(deg/2)` of every constraint and the minimal relaxation
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfDegrees {
    pub objective: u32,
    pub ineq: Vec<u32>,
    pub eq: Vec<u32>,
    pub min_order: u32,
}

fn half(deg: u32) -> u32 {
    deg.div_ceil(2)
}

impl<T: Scalar> PopInstance<T> {
    pub fn new(
        n: usize,
        nb: usize,
        objective: Polynomial<T>,
        ineqs: Vec<Polynomial<T>>,
        eqs: Vec<Polynomial<T>>,
    ) -> Result<Self> {
        if nb > n {
            return Err(Error::InvalidProblem(format!(
                "{nb} binary variables declared but only {n} variables"
            )));
        }
        for p in std::iter::once(&objective).chain(&ineqs).chain(&eqs) {
            if p.nvars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.nvars(),
                });
            }
        }
        Ok(Self {
            n,
            nb,
            objective,
            ineqs,
            eqs,
        })
    }

    pub fn unconstrained(objective: Polynomial<T>) -> Self {
        Self {
            n: objective.nvars(),
            nb: 0,
            objective,
            ineqs: Vec::new(),
            eqs: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn nbinary(&self) -> usize {
        self.nb
    }

    pub fn objective(&self) -> &Polynomial<T> {
        &self.objective
    }

    pub fn ineqs(&self) -> &[Polynomial<T>] {
        &self.ineqs
    }

    pub fn eqs(&self) -> &[Polynomial<T>] {
        &self.eqs
    }

    /// Same problem with `nb` leading binary variables.
    pub fn with_binary(mut self, nb: usize) -> Result<Self> {
        if nb > self.n {
            return Err(Error::InvalidProblem(format!(
                "{nb} binary variables declared but only {} variables",
                self.n
            )));
        }
        self.nb = nb;
        Ok(self)
    }

    /// Moves the last `numeq` inequalities into the equality list, for input
    /// that lists all constraints together.
    pub fn split_trailing_equalities(mut self, numeq: usize) -> Result<Self> {
        if numeq > self.ineqs.len() {
            return Err(Error::InvalidProblem(format!(
                "numeq = {numeq} exceeds the {} listed constraints",
                self.ineqs.len()
            )));
        }
        let tail = self.ineqs.split_off(self.ineqs.len() - numeq);
        self.eqs.splice(0..0, tail);
        Ok(self)
    }

    /// Applies `x_i^2 = 1` for the binary variables to every polynomial.
    pub fn binary_reduced(&self) -> Self {
        let nb = self.nb;
        Self {
            n: self.n,
            nb,
            objective: self.objective.reduce_binary(nb),
            ineqs: self.ineqs.iter().map(|g| g.reduce_binary(nb)).collect(),
            eqs: self.eqs.iter().map(|h| h.reduce_binary(nb)).collect(),
        }
    }

    pub fn half_degrees(&self) -> HalfDegrees {
        let objective = half(self.objective.degree());
        let ineq: Vec<u32> = self.ineqs.iter().map(|g| half(g.degree())).collect();
        let eq: Vec<u32> = self.eqs.iter().map(|h| half(h.degree())).collect();
        let min_order = ineq
            .iter()
            .chain(&eq)
            .copied()
            .fold(objective, u32::max);
        HalfDegrees {
            objective,
            ineq,
            eq,
            min_order,
        }
    }

    /// Returns an error when `order` is below the minimal relaxation order.
    pub fn check_order(&self, order: u32) -> Result<()> {
        let min_order = self.half_degrees().min_order;
        if order < min_order || order == 0 {
            return Err(Error::OrderTooLow {
                order,
                min_order: min_order.max(1),
            });
        }
        Ok(())
    }
}

/// Union of the supports of the objective and of every constraint.
pub fn support_of<T: Scalar>(pop: &PopInstance<T>) -> BTreeSet<Exponent> {
    std::iter::once(pop.objective())
        .chain(pop.ineqs())
        .chain(pop.eqs())
        .flat_map(|p| p.supp().iter().cloned())
        .collect()
}
