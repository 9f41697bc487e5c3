use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Polynomial, Ring};
use super::ExactError;

/// Positive rational weights, one per variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSystem {
    weights: BTreeMap<String, BigRational>,
}

/// Outcome of a weighted-degree check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    /// The zero polynomial is homogeneous of every degree.
    Zero,
    Degree(BigRational),
    Inhomogeneous,
}

impl WeightSystem {
    pub fn new(weights: BTreeMap<String, BigRational>) -> Result<Self, ExactError> {
        if let Some((v, _)) = weights.iter().find(|(_, w)| !w.is_positive()) {
            return Err(ExactError::NonPositiveWeight(v.clone()));
        }
        Ok(WeightSystem { weights })
    }

    /// Integer weights listed in ring order.
    pub fn from_ints<S: AsRef<str>>(vars: &[S], ws: &[i64]) -> Result<Self, ExactError> {
        assert_eq!(vars.len(), ws.len());
        Self::new(
            vars.iter()
                .zip(ws)
                .map(|(v, &w)| (v.as_ref().to_string(), BigRational::from_integer(w.into())))
                .collect(),
        )
    }

    pub fn empty() -> Self {
        WeightSystem { weights: BTreeMap::new() }
    }

    pub fn get(&self, var: &str) -> Option<&BigRational> {
        self.weights.get(var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BigRational)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn scaled(&self, f: &BigRational) -> WeightSystem {
        WeightSystem { weights: self.weights.iter().map(|(k, w)| (k.clone(), w * f)).collect() }
    }

    /// Union of two weight systems on disjoint variables.
    pub fn union(&self, other: &WeightSystem) -> WeightSystem {
        let mut w = self.weights.clone();
        w.extend(other.weights.iter().map(|(k, v)| (k.clone(), v.clone())));
        WeightSystem { weights: w }
    }

    pub fn renamed(&self, f: impl Fn(&str) -> String) -> WeightSystem {
        WeightSystem { weights: self.weights.iter().map(|(k, v)| (f(k), v.clone())).collect() }
    }

    /// Weights for the variables of `ring`, in ring order.
    pub fn for_ring(&self, ring: &Ring) -> Result<Vec<BigRational>, ExactError> {
        ring.vars()
            .iter()
            .map(|v| self.weights.get(v).cloned().ok_or_else(|| ExactError::MissingWeight(v.clone())))
            .collect()
    }

    /// Canonical integer form: the weights scaled to coprime integers, with
    /// the scaled value of `degree`.
    pub fn integer_form(&self, degree: &BigRational) -> (BTreeMap<String, BigInt>, BigRational) {
        let mut l = BigInt::one();
        for w in self.weights.values() {
            l = l.lcm(w.denom());
        }
        let ints: BTreeMap<String, BigInt> =
            self.weights.iter().map(|(k, w)| (k.clone(), (w * BigRational::from_integer(l.clone())).to_integer())).collect();
        let mut g = BigInt::zero();
        for v in ints.values() {
            g = g.gcd(v);
        }
        if g.is_zero() {
            g = BigInt::one();
        }
        let scale = BigRational::new(l, g.clone());
        (ints.into_iter().map(|(k, v)| (k, v / &g)).collect(), degree * scale)
    }

    /// Unique weights making every term of `p` have degree 1, if they exist
    /// and are positive for every ring variable.
    pub fn infer(p: &Polynomial) -> Option<WeightSystem> {
        let ring = p.ring();
        let n = ring.arity();
        if n == 0 || p.is_zero() {
            return if n == 0 { Some(WeightSystem::empty()) } else { None };
        }
        // Rows: exponent vectors | 1.
        let mut rows: Vec<Vec<BigRational>> = p
            .terms()
            .map(|(m, _)| {
                let mut r: Vec<BigRational> =
                    m.exps().iter().map(|&e| BigRational::from_integer(e.into())).collect();
                r.push(BigRational::one());
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..n {
            let Some(piv) = (row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
                continue;
            };
            rows.swap(row, piv);
            let inv = rows[row][col].recip();
            for x in rows[row].iter_mut() {
                *x *= &inv;
            }
            for r in 0..rows.len() {
                if r != row && !rows[r][col].is_zero() {
                    let f = rows[r][col].clone();
                    let pr = rows[row].clone();
                    for (x, y) in rows[r].iter_mut().zip(pr) {
                        *x -= &f * y;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        // Consistency and uniqueness.
        if rows[row..].iter().any(|r| !r[n].is_zero()) || pivots.len() < n {
            return None;
        }
        let mut weights = BTreeMap::new();
        for (i, &col) in pivots.iter().enumerate() {
            let w = rows[i][n].clone();
            if !w.is_positive() {
                return None;
            }
            weights.insert(ring.vars()[col].clone(), w);
        }
        Some(WeightSystem { weights })
    }
}

/// Weighted degree of `p`; variables without a weight make the result an error.
pub fn weighted_degree(p: &Polynomial, w: &WeightSystem) -> Result<Homogeneity, ExactError> {
    if p.is_zero() {
        return Ok(Homogeneity::Zero);
    }
    let ws = weights_for_support(p, w)?;
    let mut deg: Option<BigRational> = None;
    for (m, _) in p.terms() {
        let d = monomial_weight(m.exps(), &ws);
        match &deg {
            None => deg = Some(d),
            Some(d0) if *d0 != d => return Ok(Homogeneity::Inhomogeneous),
            _ => {}
        }
    }
    Ok(Homogeneity::Degree(deg.unwrap()))
}

pub(crate) fn weights_for_support(p: &Polynomial, w: &WeightSystem) -> Result<Vec<BigRational>, ExactError> {
    let ring: &Arc<Ring> = p.ring();
    let support = p.support_vars();
    ring.vars()
        .iter()
        .enumerate()
        .map(|(i, v)| match w.get(v) {
            Some(x) => Ok(x.clone()),
            None if !support.contains(&i) => Ok(BigRational::zero()),
            None => Err(ExactError::MissingWeight(v.clone())),
        })
        .collect()
}

pub fn monomial_weight(exps: &[u32], ws: &[BigRational]) -> BigRational {
    exps.iter()
        .zip(ws)
        .filter(|(e, _)| **e > 0)
        .fold(BigRational::zero(), |acc, (&e, w)| acc + w * BigRational::from_integer(e.into()))
}
