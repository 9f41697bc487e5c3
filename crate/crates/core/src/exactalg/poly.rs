use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::cyclo::{fmt_rational, CycloNumber};
use super::ExactError;

/// An ordered list of variable names. Polynomials on the same ring share the
/// exponent-vector layout.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    vars: Vec<String>,
}

impl Ring {
    pub fn new<S: AsRef<str>>(vars: &[S]) -> Arc<Ring> {
        let vars: Vec<String> = vars.iter().map(|s| s.as_ref().to_string()).collect();
        for (i, v) in vars.iter().enumerate() {
            assert!(!vars[..i].contains(v), "duplicate variable {v}");
        }
        Arc::new(Ring { vars })
    }

    pub fn empty() -> Arc<Ring> {
        Arc::new(Ring { vars: Vec::new() })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Concatenation; panics on overlapping names.
    pub fn join(a: &Ring, b: &Ring) -> Arc<Ring> {
        let mut vars = a.vars.clone();
        vars.extend(b.vars.iter().cloned());
        Ring::new(&vars)
    }

    pub fn is_disjoint(&self, other: &Ring) -> bool {
        self.vars.iter().all(|v| other.index_of(v).is_none())
    }
}

/// Exponent vector, ordered graded-lexicographically (total degree first,
/// then lexicographic in ring order).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(arity: usize) -> Self {
        Monomial(vec![0; arity])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug)]
pub struct Polynomial {
    ring: Arc<Ring>,
    terms: BTreeMap<Monomial, CycloNumber>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.same_ring(other) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Polynomial {
    pub fn zero(ring: &Arc<Ring>) -> Self {
        Polynomial { ring: ring.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(ring: &Arc<Ring>, c: CycloNumber) -> Self {
        let mut p = Self::zero(ring);
        p.add_term(Monomial::one(ring.arity()), c);
        p
    }

    pub fn from_int(ring: &Arc<Ring>, n: i64) -> Self {
        Self::constant(ring, CycloNumber::from_int(n))
    }

    pub fn one(ring: &Arc<Ring>) -> Self {
        Self::from_int(ring, 1)
    }

    /// The variable `name`; panics if the ring does not contain it.
    pub fn var(ring: &Arc<Ring>, name: &str) -> Self {
        let i = ring.index_of(name).unwrap_or_else(|| panic!("unknown variable {name}"));
        Self::var_at(ring, i)
    }

    pub fn var_at(ring: &Arc<Ring>, i: usize) -> Self {
        let mut e = vec![0; ring.arity()];
        e[i] = 1;
        Self::monomial(ring, Monomial(e), CycloNumber::one())
    }

    pub fn monomial(ring: &Arc<Ring>, m: Monomial, c: CycloNumber) -> Self {
        assert_eq!(m.0.len(), ring.arity(), "exponent vector arity mismatch");
        let mut p = Self::zero(ring);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(ring: &Arc<Ring>, terms: impl IntoIterator<Item = (Monomial, CycloNumber)>) -> Self {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            assert_eq!(m.0.len(), ring.arity(), "exponent vector arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn same_ring(&self, other: &Polynomial) -> bool {
        Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring
    }

    fn check_ring(&self, other: &Polynomial) {
        assert!(
            self.same_ring(other),
            "ring mismatch: {:?} vs {:?}",
            self.ring.vars,
            other.ring.vars
        );
    }

    pub fn add_term(&mut self, m: Monomial, c: CycloNumber) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().add(&c);
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
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

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &CycloNumber)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> CycloNumber {
        self.terms.get(m).cloned().unwrap_or_else(CycloNumber::zero)
    }

    pub fn constant_term(&self) -> CycloNumber {
        self.coeff(&Monomial::one(self.ring.arity()))
    }

    /// `Some(c)` iff the polynomial is the constant `c` (including 0).
    pub fn as_constant(&self) -> Option<CycloNumber> {
        match self.terms.len() {
            0 => Some(CycloNumber::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn scale(&self, c: &CycloNumber) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ring);
        }
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a.mul(c))).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.ring);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative with respect to the i-th ring variable.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut p = Polynomial::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[i] -= 1;
            p.add_term(m2, c.mul(&CycloNumber::from_int(e as i64)));
        }
        p
    }

    pub fn derivative_by(&self, name: &str) -> Polynomial {
        match self.ring.index_of(name) {
            Some(i) => self.derivative(i),
            None => Polynomial::zero(&self.ring),
        }
    }

    /// Indices of variables that occur with a positive exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.ring.arity())
            .filter(|&i| self.terms.keys().any(|m| m.0[i] > 0))
            .collect()
    }

    /// Ring homomorphism sending each variable named in `images` to its image;
    /// all images must live on `target`. Variables without an image must not
    /// occur in `self`.
    pub fn substitute(
        &self,
        images: &BTreeMap<String, Polynomial>,
        target: &Arc<Ring>,
    ) -> Result<Polynomial, ExactError> {
        let mut table: Vec<Option<&Polynomial>> = Vec::with_capacity(self.ring.arity());
        for v in self.ring.vars() {
            let img = images.get(v);
            if let Some(p) = img {
                if !(Arc::ptr_eq(p.ring(), target) || **p.ring() == **target) {
                    return Err(ExactError::RingMismatch(v.clone()));
                }
            }
            table.push(img);
        }
        for i in self.support_vars() {
            if table[i].is_none() {
                return Err(ExactError::MissingImage(self.ring.vars[i].clone()));
            }
        }
        // Cache powers of each image.
        let mut powers: Vec<Vec<Polynomial>> = vec![Vec::new(); self.ring.arity()];
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let img = table[i].unwrap();
                let pw = &mut powers[i];
                if pw.is_empty() {
                    pw.push(Polynomial::one(target));
                }
                while pw.len() <= e as usize {
                    let next = &pw[pw.len() - 1] * img;
                    pw.push(next);
                }
                t = &t * &pw[e as usize];
            }
            out = &out + &t;
        }
        Ok(out)
    }

    /// Same polynomial on a ring that contains every variable occurring in
    /// `self` (matched by name).
    pub fn embed(&self, target: &Arc<Ring>) -> Result<Polynomial, ExactError> {
        if Arc::ptr_eq(&self.ring, target) || *self.ring == **target {
            return Ok(Polynomial { ring: target.clone(), terms: self.terms.clone() });
        }
        let map: Vec<Option<usize>> = self.ring.vars.iter().map(|v| target.index_of(v)).collect();
        for i in self.support_vars() {
            if map[i].is_none() {
                return Err(ExactError::MissingImage(self.ring.vars[i].clone()));
            }
        }
        let mut p = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.arity()];
            for (i, &x) in m.0.iter().enumerate() {
                if x > 0 {
                    e[map[i].unwrap()] = x;
                }
            }
            p.add_term(Monomial(e), c.clone());
        }
        Ok(p)
    }

    /// Sets every variable missing from `target` to zero, then embeds.
    pub fn restrict(&self, target: &Arc<Ring>) -> Polynomial {
        let map: Vec<Option<usize>> = self.ring.vars.iter().map(|v| target.index_of(v)).collect();
        let mut p = Polynomial::zero(target);
        'terms: for (m, c) in &self.terms {
            let mut e = vec![0; target.arity()];
            for (i, &x) in m.0.iter().enumerate() {
                if x > 0 {
                    match map[i] {
                        Some(j) => e[j] = x,
                        None => continue 'terms,
                    }
                }
            }
            p.add_term(Monomial(e), c.clone());
        }
        p
    }

    /// Splits into coefficients with respect to the variables of `outer`:
    /// returns a map from exponent vectors on `outer` to polynomials on
    /// `inner`. Every ring variable must belong to exactly one of the two.
    pub fn split(&self, outer: &Arc<Ring>, inner: &Arc<Ring>) -> BTreeMap<Monomial, Polynomial> {
        let side: Vec<(bool, usize)> = self
            .ring
            .vars
            .iter()
            .map(|v| match (outer.index_of(v), inner.index_of(v)) {
                (Some(j), None) => (true, j),
                (None, Some(j)) => (false, j),
                _ => panic!("variable {v} must be in exactly one of the split rings"),
            })
            .collect();
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut eo = vec![0; outer.arity()];
            let mut ei = vec![0; inner.arity()];
            for (i, &x) in m.0.iter().enumerate() {
                let (is_outer, j) = side[i];
                if is_outer {
                    eo[j] = x;
                } else {
                    ei[j] = x;
                }
            }
            out.entry(Monomial(eo))
                .or_insert_with(|| Polynomial::zero(inner))
                .add_term(Monomial(ei), c.clone());
        }
        out
    }

    /// Lowest common cyclotomic order of the coefficients.
    pub fn coefficient_order(&self) -> u32 {
        self.terms.values().fold(1, |k, c| super::cyclo::lcm_order(k, c.order()))
    }

    fn fmt_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(self.ring.vars[i].clone()),
                _ => parts.push(format!("{}^{}", self.ring.vars[i], e)),
            }
        }
        parts.join("*")
    }
}

impl fmt::Display for Polynomial {
    /// Canonical form: terms in descending graded-lex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let mono = self.fmt_monomial(m);
            let (neg, body) = match c.as_rational() {
                Some(r) => {
                    let neg = r.is_negative();
                    let a = r.abs();
                    let body = if mono.is_empty() {
                        fmt_rational(&a)
                    } else if a.is_one() {
                        mono
                    } else {
                        format!("{}*{}", fmt_rational(&a), mono)
                    };
                    (neg, body)
                }
                None => {
                    let body = if mono.is_empty() {
                        format!("({})", c)
                    } else {
                        format!("({})*{}", c, mono)
                    };
                    (false, body)
                }
            };
            match (idx, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body)
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body)
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body)
                }
            }
        }
        write!(f, "{}", out)
    }
}

impl<'a> Add for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_ring(rhs);
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl<'a> Sub for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_ring(rhs);
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.neg());
        }
        p
    }
}

impl<'a> Mul for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_ring(rhs);
        let mut p = Polynomial::zero(&self.ring);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                p.add_term(m1.mul(m2), c1.mul(c2));
            }
        }
        p
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &'a Polynomial) -> Polynomial {
                (&self).$f(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Integer literal shorthand used throughout the tests.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_order() {
        let a = Monomial(vec![2, 0]);
        let b = Monomial(vec![1, 1]);
        let c = Monomial(vec![0, 3]);
        assert!(a > b);
        assert!(c > a);
    }

    #[test]
    fn arithmetic_and_display() {
        let r = Ring::new(&["x", "y"]);
        let x = Polynomial::var(&r, "x");
        let y = Polynomial::var(&r, "y");
        let p = &(&x + &y) * &(&x - &y);
        assert_eq!(p.to_string(), "x^2 - y^2");
        assert_eq!((&p - &p).to_string(), "0");
        let q = x.pow(3).scale(&CycloNumber::from_ratio(-1, 2));
        assert_eq!(q.to_string(), "-1/2*x^3");
    }

    #[test]
    fn substitute_missing_image() {
        let r = Ring::new(&["x", "y"]);
        let p = Polynomial::var(&r, "y");
        let images = BTreeMap::from([("x".to_string(), Polynomial::var(&r, "x"))]);
        assert!(matches!(p.substitute(&images, &r), Err(ExactError::MissingImage(v)) if v == "y"));
    }

    #[test]
    fn split_and_restrict() {
        let r = Ring::new(&["x", "y"]);
        let rx = Ring::new(&["x"]);
        let ry = Ring::new(&["y"]);
        let x = Polynomial::var(&r, "x");
        let y = Polynomial::var(&r, "y");
        let p = &(&x * &y) + &(&y.pow(2) + &x);
        let s = p.split(&rx, &ry);
        assert_eq!(s.len(), 2);
        assert_eq!(p.restrict(&ry).to_string(), "y^2");
    }
}
