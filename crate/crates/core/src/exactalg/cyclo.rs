//! Elements of the cyclotomic field ℚ(ζ_k).
//!
//! A number of order `k` is stored by its coordinates in the power basis
//! `1, ζ_k, …, ζ_k^{φ(k)-1}`, i.e. as a polynomial in ζ_k reduced modulo the
//! k-th cyclotomic polynomial. Numbers of different orders are combined by
//! embedding both into the field of the least common multiple order.
//! Rational values are always kept at order 1.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Debug)]
pub struct CycloNumber {
    order: u32,
    coords: Vec<BigRational>,
}

/// Φ_k as monic integer coefficients, lowest degree first.
pub fn cyclotomic_polynomial(k: u32) -> Arc<Vec<i64>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    assert!(k > 0, "cyclotomic order must be positive");
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().unwrap().get(&k) {
        return p.clone();
    }
    // x^k - 1 divided by Φ_d for every proper divisor d.
    let mut num = vec![0i64; k as usize + 1];
    num[0] = -1;
    num[k as usize] = 1;
    for d in 1..k {
        if k.is_multiple_of(d) {
            let div = cyclotomic_polynomial(d);
            num = exact_int_div(&num, &div);
        }
    }
    let p = Arc::new(num);
    cache.write().unwrap().insert(k, p.clone());
    p
}

fn exact_int_div(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let nd = num.len() - 1;
    let mut q = vec![0i64; nd - dd + 1];
    for i in (0..=nd - dd).rev() {
        // den is monic
        let c = rem[i + dd];
        q[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// Euler's totient.
pub fn totient(k: u32) -> usize {
    cyclotomic_polynomial(k).len() - 1
}

pub fn lcm_order(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Reduces a dense polynomial in ζ_k modulo Φ_k.
fn reduce(mut v: Vec<BigRational>, k: u32) -> Vec<BigRational> {
    let phi = cyclotomic_polynomial(k);
    let deg = phi.len() - 1;
    if v.len() > deg {
        for i in (deg..v.len()).rev() {
            if v[i].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut v[i], BigRational::zero());
            for (j, &pj) in phi[..deg].iter().enumerate() {
                if pj != 0 {
                    v[i - deg + j] -= &c * BigRational::from_integer(BigInt::from(pj));
                }
            }
        }
        v.truncate(deg);
    }
    while v.len() < deg {
        v.push(BigRational::zero());
    }
    v
}

impl CycloNumber {
    fn normalized(order: u32, coords: Vec<BigRational>) -> Self {
        if order != 1 && coords.iter().skip(1).all(Zero::is_zero) {
            let c0 = coords.into_iter().next().unwrap_or_else(BigRational::zero);
            return CycloNumber { order: 1, coords: vec![c0] };
        }
        CycloNumber { order, coords }
    }

    pub fn zero() -> Self {
        CycloNumber { order: 1, coords: vec![BigRational::zero()] }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        CycloNumber { order: 1, coords: vec![r] }
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// ζ_k^j for any integer j.
    pub fn zeta_pow(k: u32, j: i64) -> Self {
        assert!(k > 0, "cyclotomic order must be positive");
        let e = j.rem_euclid(k as i64) as usize;
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = BigRational::one();
        Self::normalized(k, reduce(v, k))
    }

    pub fn zeta(k: u32) -> Self {
        Self::zeta_pow(k, 1)
    }

    /// Builds a number of order `k` from power-basis coordinates (any length;
    /// reduced modulo Φ_k).
    pub fn from_coords(k: u32, coords: Vec<BigRational>) -> Self {
        assert!(k > 0, "cyclotomic order must be positive");
        Self::normalized(k, reduce(coords, k))
    }

    /// The order of the field this value is currently represented in.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.order == 1 && self.coords[0].is_one()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.order == 1 {
            Some(&self.coords[0])
        } else {
            None
        }
    }

    pub fn is_positive_rational(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_positive())
    }

    /// Re-expresses the number in ℚ(ζ_target). Requires `order | target`.
    pub fn embed(&self, target: u32) -> CycloNumber {
        assert!(
            target.is_multiple_of(self.order),
            "cannot embed order {} into order {}",
            self.order,
            target
        );
        if target == self.order {
            return self.clone();
        }
        let step = (target / self.order) as usize;
        let mut v = vec![BigRational::zero(); (self.coords.len().saturating_sub(1)) * step + 1];
        for (j, c) in self.coords.iter().enumerate() {
            v[j * step] = c.clone();
        }
        CycloNumber { order: target, coords: reduce(v, target) }
    }

    fn unify(a: &CycloNumber, b: &CycloNumber) -> (u32, Vec<BigRational>, Vec<BigRational>) {
        let k = lcm_order(a.order, b.order);
        (k, a.embed(k).coords, b.embed(k).coords)
    }

    pub fn add(&self, other: &CycloNumber) -> CycloNumber {
        if self.order == 1 && other.order == 1 {
            return CycloNumber::from_rational(&self.coords[0] + &other.coords[0]);
        }
        let (k, mut a, b) = Self::unify(self, other);
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        Self::normalized(k, a)
    }

    pub fn sub(&self, other: &CycloNumber) -> CycloNumber {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CycloNumber {
        CycloNumber { order: self.order, coords: self.coords.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, other: &CycloNumber) -> CycloNumber {
        if self.order == 1 && other.order == 1 {
            return CycloNumber::from_rational(&self.coords[0] * &other.coords[0]);
        }
        if other.order == 1 {
            return self.scale(&other.coords[0]);
        }
        if self.order == 1 {
            return other.scale(&self.coords[0]);
        }
        let (k, a, b) = Self::unify(self, other);
        let mut v = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    v[i + j] += x * y;
                }
            }
        }
        Self::normalized(k, reduce(v, k))
    }

    pub fn scale(&self, r: &BigRational) -> CycloNumber {
        Self::normalized(self.order, self.coords.iter().map(|c| c * r).collect())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<CycloNumber> {
        if self.is_zero() {
            return None;
        }
        if self.order == 1 {
            return Some(CycloNumber::from_rational(self.coords[0].recip()));
        }
        let phi: Vec<BigRational> = cyclotomic_polynomial(self.order)
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        let (g, s) = upoly::ext_gcd(self.coords.clone(), phi);
        // g is a nonzero constant because Φ_k is irreducible.
        debug_assert_eq!(g.len(), 1);
        let ginv = g[0].recip();
        let s: Vec<BigRational> = s.into_iter().map(|c| c * &ginv).collect();
        Some(Self::normalized(self.order, reduce(s, self.order)))
    }

    pub fn div(&self, other: &CycloNumber) -> Option<CycloNumber> {
        other.inv().map(|i| self.mul(&i))
    }

    pub fn pow(&self, mut e: u32) -> CycloNumber {
        let mut base = self.clone();
        let mut acc = CycloNumber::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// Square root of a rational number inside a cyclotomic field, when one
    /// exists there (every √q with q ∈ ℚ does). Uses quadratic Gauss sums.
    pub fn sqrt_rational(q: &BigRational) -> CycloNumber {
        if q.is_zero() {
            return CycloNumber::zero();
        }
        // q = s^2 * n with n squarefree integer (possibly negative).
        let num = q.numer() * q.denom();
        let den = q.denom().clone();
        let neg = num.is_negative();
        let mut n = num.abs();
        let mut square = BigInt::one();
        let mut p = BigInt::from(2);
        while &p * &p <= n {
            let pp = &p * &p;
            while (&n % &pp).is_zero() {
                n /= &pp;
                square *= &p;
            }
            p += 1;
        }
        // √q = square/den * √(±n)
        let factor = CycloNumber::from_rational(BigRational::new(square, den));
        let mut root = CycloNumber::one();
        let mut rest = n.clone();
        let mut p = BigInt::from(2);
        let mut primes = Vec::new();
        while rest > BigInt::one() {
            if (&rest % &p).is_zero() {
                primes.push(p.clone());
                rest /= &p;
            }
            p += 1;
        }
        for p in primes {
            root = root.mul(&sqrt_prime(&p));
        }
        if neg {
            root = root.mul(&CycloNumber::zeta(4));
        }
        factor.mul(&root)
    }
}

/// √p for a prime p.
fn sqrt_prime(p: &BigInt) -> CycloNumber {
    let p: u32 = p.try_into().expect("prime too large for a cyclotomic square root");
    if p == 2 {
        // ζ_8 + ζ_8^{-1}
        return CycloNumber::zeta_pow(8, 1).add(&CycloNumber::zeta_pow(8, -1));
    }
    // Gauss sum g = Σ (a/p) ζ_p^a, g^2 = (-1)^{(p-1)/2} p.
    let mut g = CycloNumber::zero();
    for a in 1..p {
        let leg = legendre(a, p);
        g = g.add(&CycloNumber::zeta_pow(p, a as i64).scale(&BigRational::from_integer(leg.into())));
    }
    if p % 4 == 1 {
        g
    } else {
        // g = i√p
        g.mul(&CycloNumber::zeta(4).neg())
    }
}

fn legendre(a: u32, p: u32) -> i64 {
    let mut r = 1u64;
    let mut base = (a % p) as u64;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

impl PartialEq for CycloNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coords == other.coords;
        }
        let (_, a, b) = Self::unify(self, other);
        a == b
    }
}

impl Eq for CycloNumber {}

impl From<i64> for CycloNumber {
    fn from(n: i64) -> Self {
        CycloNumber::from_int(n)
    }
}

impl From<BigRational> for CycloNumber {
    fn from(r: BigRational) -> Self {
        CycloNumber::from_rational(r)
    }
}

pub(crate) fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for CycloNumber {
    /// Rationals print as `p` or `p/q`; other values as a sum over powers
    /// of `zetaK`, e.g. `1 + 2*zeta3`. The output parses back to the same
    /// value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(r) = self.as_rational() {
            return write!(f, "{}", fmt_rational(r));
        }
        let mut parts: Vec<String> = Vec::new();
        for (j, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let zeta = match j {
                0 => String::new(),
                1 => format!("zeta{}", self.order),
                _ => format!("zeta{}^{}", self.order, j),
            };
            let body = if j == 0 {
                fmt_rational(&c.abs())
            } else if c.abs().is_one() {
                zeta
            } else {
                format!("{}*{}", fmt_rational(&c.abs()), zeta)
            };
            if parts.is_empty() {
                parts.push(if c.is_negative() { format!("-{}", body) } else { body });
            } else if c.is_negative() {
                parts.push(format!("- {}", body));
            } else {
                parts.push(format!("+ {}", body));
            }
        }
        write!(f, "{}", parts.join(" "))
    }
}

/// Dense univariate polynomials over ℚ, lowest degree first.
pub(crate) mod upoly {
    use num_rational::BigRational;
    use num_traits::Zero;

    pub fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
        while v.len() > 1 && v.last().is_some_and(Zero::is_zero) {
            v.pop();
        }
        if v.is_empty() {
            v.push(BigRational::zero());
        }
        v
    }

    fn is_zero(v: &[BigRational]) -> bool {
        v.iter().all(Zero::is_zero)
    }

    pub fn mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let mut v = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                v[i + j] += x * y;
            }
        }
        trim(v)
    }

    pub fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
        let n = a.len().max(b.len());
        let mut v = vec![BigRational::zero(); n];
        for (i, x) in a.iter().enumerate() {
            v[i] += x;
        }
        for (i, y) in b.iter().enumerate() {
            v[i] -= y;
        }
        trim(v)
    }

    pub fn divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
        let b = trim(b.to_vec());
        let mut r = trim(a.to_vec());
        let db = b.len() - 1;
        if r.len() < b.len() || is_zero(&r) {
            return (vec![BigRational::zero()], r);
        }
        let lead = b[db].clone();
        let mut q = vec![BigRational::zero(); r.len() - db];
        for i in (0..q.len()).rev() {
            let c = &r[i + db] / &lead;
            if !c.is_zero() {
                for (j, bj) in b.iter().enumerate() {
                    r[i + j] -= &c * bj;
                }
            }
            q[i] = c;
        }
        r.truncate(db.max(1));
        (trim(q), trim(r))
    }

    /// Returns (g, s) with s·a ≡ g (mod b), g = gcd(a, b).
    pub fn ext_gcd(a: Vec<BigRational>, b: Vec<BigRational>) -> (Vec<BigRational>, Vec<BigRational>) {
        let (mut r0, mut r1) = (trim(a), trim(b));
        let (mut s0, mut s1) = (vec![BigRational::from_integer(1.into())], vec![BigRational::zero()]);
        while !is_zero(&r1) {
            let (q, r) = divrem(&r0, &r1);
            let s2 = sub(&s0, &mul(&q, &s1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
        }
        (r0, s0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_polynomial(2), vec![1, 1]);
        assert_eq!(*cyclotomic_polynomial(3), vec![1, 1, 1]);
        assert_eq!(*cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(totient(15), 8);
    }

    #[test]
    fn zeta_has_exact_order() {
        for k in [1u32, 2, 3, 4, 5, 6, 8, 12] {
            let z = CycloNumber::zeta(k);
            assert!(z.pow(k).is_one(), "zeta{k}^{k} != 1");
            for j in 1..k {
                assert!(!z.pow(j).is_one(), "zeta{k}^{j} == 1");
            }
        }
    }

    #[test]
    fn zeta2_is_minus_one() {
        assert_eq!(CycloNumber::zeta(2), CycloNumber::from_int(-1));
        assert_eq!(CycloNumber::zeta(2).order(), 1);
    }

    #[test]
    fn inverse_and_mixed_orders() {
        let a = CycloNumber::from_int(2).add(&CycloNumber::zeta(5));
        let b = a.inv().unwrap();
        assert!(a.mul(&b).is_one());
        // ζ_6 = -ζ_3^2
        assert_eq!(CycloNumber::zeta(6), CycloNumber::zeta_pow(3, 2).neg());
        let s = CycloNumber::zeta(3).add(&CycloNumber::zeta(4));
        assert_eq!(s.order(), 12);
        assert_eq!(s.sub(&CycloNumber::zeta(4)), CycloNumber::zeta(3));
    }

    #[test]
    fn rational_square_roots() {
        for (n, d) in [(2i64, 1i64), (3, 1), (5, 1), (-3, 1), (-1, 1), (12, 7), (9, 4), (-10, 3)] {
            let q = BigRational::new(n.into(), d.into());
            let r = CycloNumber::sqrt_rational(&q);
            assert_eq!(r.mul(&r), CycloNumber::from_rational(q.clone()), "sqrt({n}/{d})");
        }
    }

    #[test]
    fn display() {
        assert_eq!(CycloNumber::from_ratio(-3, 2).to_string(), "-3/2");
        let z = CycloNumber::from_int(1).add(&CycloNumber::zeta(3).scale(&BigRational::from_integer(2.into())));
        assert_eq!(z.to_string(), "1 + 2*zeta3");
        assert_eq!(CycloNumber::zeta_pow(3, 2).to_string(), "-1 - zeta3");
    }
}
