use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::Rational;

/// Exponent vector over `c_2, c_3, ...`; index 0 is the power of `c_2`.
/// Trailing zeros are never stored, so equal monomials compare equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    /// The monomial `c_index` (index >= 2).
    pub fn var(index: usize) -> Self {
        assert!(index >= 2, "coefficient symbols start at c_2");
        let mut exps = vec![0; index - 1];
        exps[index - 2] = 1;
        Monomial(exps)
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    /// Exponent of `c_index`.
    pub fn exponent(&self, index: usize) -> u32 {
        index
            .checked_sub(2)
            .and_then(|i| self.0.get(i).copied())
            .unwrap_or(0)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    fn times(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        let exps = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&0) + other.0.get(i).unwrap_or(&0))
            .collect();
        Monomial(exps)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &p) in self.0.iter().enumerate() {
            if p == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "c{}", i + 2)?;
            if p > 1 {
                write!(f, "^{p}")?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Sparse polynomial over the rationals in the symbols `c_2, c_3, ...`.
///
/// Zero coefficients are never stored; monomials are kept in a `BTreeMap`, so
/// structural equality is polynomial equality.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoeffPoly {
    terms: BTreeMap<Monomial, Rational>,
}

impl CoeffPoly {
    pub fn zero() -> Self {
        CoeffPoly::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(value: impl Into<Rational>) -> Self {
        Self::term(value, Monomial::one())
    }

    /// The symbol `c_index`.
    pub fn var(index: usize) -> Self {
        Self::term(1, Monomial::var(index))
    }

    pub fn term(coeff: impl Into<Rational>, monomial: Monomial) -> Self {
        let coeff = coeff.into();
        let mut terms = BTreeMap::new();
        if coeff != 0 {
            terms.insert(monomial, coeff);
        }
        CoeffPoly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The value if the polynomial has no symbols.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::new()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, monomial: &Monomial) -> Rational {
        self.terms.get(monomial).cloned().unwrap_or_default()
    }

    pub fn scale(&self, factor: &Rational) -> CoeffPoly {
        if *factor == 0 {
            return CoeffPoly::zero();
        }
        CoeffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), Rational::from(c * factor)))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> CoeffPoly {
        let mut out = CoeffPoly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Substitutes `values[i]` for `c_{i+2}`; symbols past the end are zero.
    pub fn eval(&self, values: &[Rational]) -> Rational {
        let mut total = Rational::new();
        'terms: for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &p) in m.0.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                match values.get(i) {
                    Some(v) => {
                        for _ in 0..p {
                            t *= v;
                        }
                    }
                    None => continue 'terms,
                }
            }
            total += t;
        }
        total
    }

    fn accumulate(&mut self, monomial: Monomial, coeff: Rational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(monomial) {
            Entry::Vacant(v) => {
                if coeff != 0 {
                    v.insert(coeff);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }
}

impl Add for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.accumulate(m.clone(), Rational::from(-c));
        }
        out
    }
}

impl Mul for &CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: &CoeffPoly) -> CoeffPoly {
        let mut out = CoeffPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.accumulate(ma.times(mb), Rational::from(ca * cb));
            }
        }
        out
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        CoeffPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), Rational::from(-c)))
                .collect(),
        }
    }
}

/// Terms from the highest power of `c_2` down, e.g. `-4*c2^4 + 4*c2^2*c3`.
impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = *c < 0;
            let abs = Rational::from(c.abs_ref());
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else if abs == 1 {
                write!(f, "{m}")?;
            } else {
                write!(f, "{abs}*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(i: usize) -> CoeffPoly {
        CoeffPoly::var(i)
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let a = &c(2) + &c(3);
        let b = &c(2) - &c(3);
        let prod = &a * &b;
        let expected = &c(2).pow(2) - &c(3).pow(2);
        assert_eq!(prod, expected);
        assert!((&prod - &expected).is_zero());
        assert_eq!((&a - &a).len(), 0);
    }

    #[test]
    fn monomials_are_canonical() {
        assert_eq!(Monomial::from_exponents(vec![1, 0, 0]), Monomial::var(2));
        assert_eq!(Monomial::var(3).exponent(3), 1);
        assert_eq!(Monomial::var(3).exponent(2), 0);
        let m = Monomial::var(2).times(&Monomial::var(4));
        assert_eq!(m.degree(), 2);
        assert_eq!(m.to_string(), "c2*c4");
    }

    #[test]
    fn display_orders_terms() {
        let p = &(&c(2).pow(2) * &c(3)).scale(&Rational::from(4))
            - &c(2).pow(4).scale(&Rational::from(4));
        assert_eq!(p.to_string(), "-4*c2^4 + 4*c2^2*c3");
        assert_eq!(c(2).pow(3).to_string(), "c2^3");
        assert_eq!(
            CoeffPoly::constant(Rational::from((-1, 2))).to_string(),
            "-1/2"
        );
        assert_eq!(CoeffPoly::zero().to_string(), "0");
    }

    #[test]
    fn constants_and_evaluation() {
        assert_eq!(
            CoeffPoly::constant(5).as_constant(),
            Some(Rational::from(5))
        );
        assert_eq!(CoeffPoly::zero().as_constant(), Some(Rational::new()));
        assert_eq!(c(2).as_constant(), None);
        let p = &(&c(2) * &c(3)).scale(&Rational::from(3)) + &CoeffPoly::constant(1);
        let v = p.eval(&[Rational::from(2), Rational::from((1, 3))]);
        assert_eq!(v, Rational::from(3));
        // c3 missing -> treated as zero
        assert_eq!(p.eval(&[Rational::from(2)]), Rational::from(1));
    }
}
