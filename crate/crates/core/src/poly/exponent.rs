use std::cmp::Ordering;
use std::fmt;

/// Exponent vector `alpha` of the monomial `x_1^alpha_1 ... x_n^alpha_n`.
///
/// Ordered by total degree first; within a degree the monomial with the
/// larger power of the earliest variable comes first, so the degree-one
/// block reads `x_1, x_2, ..., x_n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    /// `x_i` as an exponent in `nvars` variables.
    pub fn unit(nvars: usize, i: usize) -> Self {
        let mut v = vec![0; nvars];
        v[i] = 1;
        Self(v)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Indices of the variables with a nonzero power.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e != 0)
            .map(|(i, _)| i)
    }

    /// True when every variable with a nonzero power belongs to `vars`
    /// (a sorted slice of variable indices).
    pub fn supported_on(&self, vars: &[usize]) -> bool {
        self.support().all(|i| vars.binary_search(&i).is_ok())
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.nvars(), other.nvars());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn doubled(&self) -> Exponent {
        Exponent(self.0.iter().map(|a| 2 * a).collect())
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            write!(f, "x{}", i + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Replaces the first `nb` entries by their parity (`x_i^2 = 1`).
pub fn reduce_binary(alpha: &Exponent, nb: usize) -> Exponent {
    assert!(nb <= alpha.nvars(), "binary count exceeds exponent length");
    if nb == 0 {
        return alpha.clone();
    }
    let mut v = alpha.0.clone();
    for e in v.iter_mut().take(nb) {
        *e %= 2;
    }
    Exponent(v)
}
