//! Sparse multivariate polynomials with rational coefficients.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use super::{QMat, Rat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("contracted polynomial has degree {0}; a constant Hessian needs degree 2")]
    DimensionMismatch(u32),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
}

/// Sorted `(variable, exponent)` pairs with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(String, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: &str) -> Self {
        Monomial(vec![(v.to_string(), 1)])
    }

    pub fn from_pairs<I: IntoIterator<Item = (String, u32)>>(pairs: I) -> Self {
        let mut map: BTreeMap<String, u32> = BTreeMap::new();
        for (v, e) in pairs {
            *map.entry(v).or_default() += e;
        }
        Monomial(map.into_iter().filter(|&(_, e)| e > 0).collect())
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, v: &str) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    pub fn pairs(&self) -> &[(String, u32)] {
        &self.0
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    /// Derivative with respect to `v`: `(multiplier, monomial)`, or `None` if zero.
    fn derive(&self, v: &str) -> Option<(u32, Monomial)> {
        let pos = self.0.iter().position(|(w, _)| w == v)?;
        let e = self.0[pos].1;
        let mut out = self.0.clone();
        if e == 1 {
            out.remove(pos);
        } else {
            out[pos].1 = e - 1;
        }
        Some((e, Monomial(out)))
    }
}

/// Sparse polynomial `Σ c_m · m`; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, Rat>,
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (v, e) in &m.0 {
                if *e == 1 {
                    write!(f, "*{v}")?;
                } else {
                    write!(f, "*{v}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: &str) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::var(v), Rat::one());
        p
    }

    /// Linear form `Σ cᵢ·vᵢ`.
    pub fn linear<'a, I: IntoIterator<Item = (&'a str, Rat)>>(terms: I) -> Self {
        let mut p = Self::zero();
        for (v, c) in terms {
            p.add_term(Monomial::var(v), c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
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

    /// Highest total degree, or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn variables(&self) -> BTreeSet<String> {
        self.terms.keys().flat_map(|m| m.0.iter().map(|(v, _)| v.clone())).collect()
    }

    pub fn scaled(&self, c: &Rat) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn plus(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn minus(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn times(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn partial(&self, v: &str) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            if let Some((e, dm)) = m.derive(v) {
                out.add_term(dm, c * Rat::from_integer(e.into()));
            }
        }
        out
    }

    /// `∂_v f = Σᵢ vᵢ ∂ᵢ f`.
    pub fn directional(&self, dir: &BTreeMap<String, Rat>) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (v, c) in dir {
            if !c.is_zero() {
                out = out.plus(&self.partial(v).scaled(c));
            }
        }
        out
    }

    /// Evaluates at a point; every variable of `self` must have a value.
    pub fn eval(&self, point: &BTreeMap<String, Rat>) -> Result<Rat, PolyError> {
        let mut total = Rat::zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (v, e) in &m.0 {
                let x = point.get(v).ok_or_else(|| PolyError::UnknownVariable(v.clone()))?;
                for _ in 0..*e {
                    term *= x;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Contracts with every direction in turn, then returns the constant
    /// Hessian of the remaining quadratic form, rows and columns ordered by `vars`.
    pub fn hessian_at_contraction(
        &self,
        dirs: &[BTreeMap<String, Rat>],
        vars: &[String],
    ) -> Result<QMat, PolyError> {
        let mut g = self.clone();
        for d in dirs {
            g = g.directional(d);
        }
        match g.total_degree() {
            None => return Ok(QMat::zeros(vars.len(), vars.len())),
            Some(2) if g.is_homogeneous() => {}
            Some(k) => return Err(PolyError::DimensionMismatch(k)),
        }
        if let Some(v) = g.variables().into_iter().find(|v| !vars.contains(v)) {
            return Err(PolyError::UnknownVariable(v));
        }
        let mut h = QMat::zeros(vars.len(), vars.len());
        for (i, vi) in vars.iter().enumerate() {
            let gi = g.partial(vi);
            for (j, vj) in vars.iter().enumerate() {
                h[(i, j)] = gi.partial(vj).coefficient(&Monomial::one());
            }
        }
        Ok(h)
    }
}

/// Commutative ring operations shared by numeric and symbolic evaluation.
pub trait Ring: Clone + Send + Sync {
    fn ring_zero() -> Self;
    fn from_rat(r: Rat) -> Self;
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_scale(&self, c: &Rat) -> Self;
    fn ring_is_zero(&self) -> bool;
}

impl Ring for Rat {
    fn ring_zero() -> Self {
        <Rat as Zero>::zero()
    }
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn ring_scale(&self, c: &Rat) -> Self {
        self * c
    }
    fn ring_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
}

impl Ring for MultiPoly {
    fn ring_zero() -> Self {
        MultiPoly::zero()
    }
    fn from_rat(r: Rat) -> Self {
        MultiPoly::constant(r)
    }
    fn ring_add(&self, other: &Self) -> Self {
        self.plus(other)
    }
    fn ring_mul(&self, other: &Self) -> Self {
        self.times(other)
    }
    fn ring_scale(&self, c: &Rat) -> Self {
        self.scaled(c)
    }
    fn ring_is_zero(&self) -> bool {
        self.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{rat, ratio, signature, Signature};
    use proptest::prelude::*;

    fn x() -> MultiPoly {
        MultiPoly::var("x")
    }
    fn y() -> MultiPoly {
        MultiPoly::var("y")
    }

    fn point(pairs: &[(&str, Rat)]) -> BTreeMap<String, Rat> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn partial_of_square() {
        let f = x().times(&x());
        assert_eq!(f.partial("x"), x().scaled(&rat(2)));
        assert!(f.partial("y").is_zero());
    }

    #[test]
    fn hessian_of_xy() {
        let f = x().times(&y());
        let h = f.hessian_at_contraction(&[], &["x".into(), "y".into()]).unwrap();
        assert_eq!(h, QMat::from_int_rows(&[&[0, 1], &[1, 0]]));
    }

    #[test]
    fn quadrant_volume_polynomial_signature() {
        let s = MultiPoly::var("z1").plus(&MultiPoly::var("z3"));
        let t = MultiPoly::var("z2").plus(&MultiPoly::var("z4"));
        let f = s.times(&t);
        let vars: Vec<String> = ["z1", "z2", "z3", "z4"].iter().map(|s| s.to_string()).collect();
        let h = f.hessian_at_contraction(&[], &vars).unwrap();
        assert_eq!(signature(&h).unwrap(), Signature { n_plus: 1, n_minus: 1, n_zero: 2 });
    }

    #[test]
    fn contraction_requires_quadratic_remainder() {
        let f = x().times(&x()).times(&y());
        let vars = vec!["x".to_string(), "y".to_string()];
        assert_eq!(f.hessian_at_contraction(&[], &vars), Err(PolyError::DimensionMismatch(3)));
        let dir = point(&[("x", rat(1))]);
        let h = f.hessian_at_contraction(&[dir], &vars).unwrap();
        // ∂_x(x²y) = 2xy
        assert_eq!(h, QMat::from_int_rows(&[&[0, 2], &[2, 0]]));
    }

    #[test]
    fn evaluation_and_missing_variables() {
        let f = x().times(&y()).plus(&MultiPoly::constant(ratio(1, 2)));
        assert_eq!(f.eval(&point(&[("x", rat(2)), ("y", rat(3))])).unwrap(), ratio(13, 2));
        assert_eq!(f.eval(&point(&[("x", rat(2))])), Err(PolyError::UnknownVariable("y".into())));
    }

    #[test]
    fn zero_coefficients_are_pruned() {
        let f = x().minus(&x());
        assert!(f.is_zero());
        assert_eq!(f.total_degree(), None);
    }

    fn arb_homogeneous(deg: u32) -> impl Strategy<Value = MultiPoly> {
        let vars = ["a", "b", "c"];
        proptest::collection::vec(
            (proptest::collection::vec(0usize..3, deg as usize), -5i64..=5),
            1..6,
        )
        .prop_map(move |terms| {
            let mut p = MultiPoly::zero();
            for (idx, c) in terms {
                let m = Monomial::from_pairs(idx.into_iter().map(|i| (vars[i].to_string(), 1)));
                p.add_term(m, rat(c));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn mixed_partials_commute(f in arb_homogeneous(3)) {
            for a in ["a", "b", "c"] {
                for b in ["a", "b", "c"] {
                    prop_assert_eq!(f.partial(a).partial(b), f.partial(b).partial(a));
                }
            }
        }

        #[test]
        fn euler_identity(f in arb_homogeneous(3)) {
            let mut euler = MultiPoly::zero();
            for v in ["a", "b", "c"] {
                euler = euler.plus(&MultiPoly::var(v).times(&f.partial(v)));
            }
            prop_assert_eq!(euler, f.scaled(&rat(3)));
        }
    }
}
