//! Gröbner bases over cyclotomic coefficient fields.
//!
//! Buchberger's algorithm with the sugar selection strategy, the product
//! criterion and the chain criterion. Pair selection is deterministic, so the
//! same input always produces the same reduced basis.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::exactalg::{CycloNumber, Monomial, Polynomial, Ring};

pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroebnerError {
    #[error("resource limit exceeded after {steps} reduction steps")]
    Budget { steps: u64 },
    #[error("generators live on different rings")]
    RingMismatch,
    #[error("variable {0:?} is not in the ring")]
    UnknownVariable(String),
}

/// Monomial orders relative to the ring's variable order (first variable
/// largest).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    GrevLex,
    Lex,
    /// Block order: the first `block` variables are compared by grevlex
    /// first, ties broken by grevlex on the rest. Eliminates the block.
    Elimination { block: usize },
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| {
        for (x, y) in a.iter().zip(b).rev() {
            if x != y {
                return y.cmp(x);
            }
        }
        Ordering::Equal
    })
}

impl MonomialOrder {
    pub fn cmp(&self, a: &[u32], b: &[u32]) -> Ordering {
        match *self {
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::GrevLex => grevlex(a, b),
            MonomialOrder::Elimination { block } => {
                grevlex(&a[..block], &b[..block]).then_with(|| grevlex(&a[block..], &b[block..]))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GbConfig {
    pub max_steps: u64,
}

impl Default for GbConfig {
    fn default() -> Self {
        GbConfig { max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Clone, Debug)]
struct Term {
    exp: Vec<u32>,
    coef: CycloNumber,
}

/// Terms sorted descending in the active order.
type SPoly = Vec<Term>;

struct Engine {
    order: MonomialOrder,
    steps: u64,
    max_steps: u64,
}

impl Engine {
    fn tick(&mut self) -> Result<(), GroebnerError> {
        self.steps += 1;
        if self.steps > self.max_steps {
            return Err(GroebnerError::Budget { steps: self.steps - 1 });
        }
        Ok(())
    }

    fn from_poly(&self, p: &Polynomial) -> SPoly {
        let mut t: SPoly = p.terms().map(|(m, c)| Term { exp: m.0.clone(), coef: c.clone() }).collect();
        t.sort_by(|a, b| self.order.cmp(&b.exp, &a.exp));
        t
    }

    fn make_monic(p: &mut SPoly) {
        if let Some(first) = p.first() {
            if !first.coef.is_one() {
                let inv = first.coef.inv().expect("nonzero leading coefficient");
                for t in p.iter_mut() {
                    t.coef = t.coef.mul(&inv);
                }
            }
        }
    }

    /// a + c·x^m·b for descending term lists.
    fn merge_add(&self, a: &[Term], b: &[Term], c: &CycloNumber, m: &[u32]) -> SPoly {
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        let shifted = |t: &Term| -> Vec<u32> { t.exp.iter().zip(m).map(|(x, y)| x + y).collect() };
        let mut bj: Option<Vec<u32>> = b.first().map(shifted);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), &bj) {
                (Some(ta), Some(eb)) => self.order.cmp(&ta.exp, eb),
                (Some(_), None) => Ordering::Greater,
                (None, Some(_)) => Ordering::Less,
                (None, None) => unreachable!(),
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(Term { exp: bj.take().unwrap(), coef: b[j].coef.mul(c) });
                    j += 1;
                    bj = b.get(j).map(shifted);
                }
                Ordering::Equal => {
                    let s = a[i].coef.add(&b[j].coef.mul(c));
                    if !s.is_zero() {
                        out.push(Term { exp: bj.take().unwrap(), coef: s });
                    }
                    i += 1;
                    j += 1;
                    bj = b.get(j).map(shifted);
                }
            }
        }
        out
    }

    /// Full reduction of `p` by `basis` (every basis element monic).
    fn reduce(&mut self, p: SPoly, basis: &[&SPoly]) -> Result<SPoly, GroebnerError> {
        let mut rem: SPoly = Vec::new();
        let mut p = p;
        while !p.is_empty() {
            let lt = &p[0];
            let div = basis.iter().find(|g| divides(&g[0].exp, &lt.exp));
            match div {
                Some(g) => {
                    self.tick()?;
                    let m: Vec<u32> = lt.exp.iter().zip(&g[0].exp).map(|(x, y)| x - y).collect();
                    let c = lt.coef.neg();
                    p = self.merge_add(&p[1..], &g[1..], &c, &m);
                }
                None => {
                    let mut rest = p.split_off(1);
                    rem.push(p.pop().unwrap());
                    std::mem::swap(&mut p, &mut rest);
                }
            }
        }
        Ok(rem)
    }

    fn s_poly(&self, f: &SPoly, g: &SPoly) -> SPoly {
        let l = lcm(&f[0].exp, &g[0].exp);
        let mf: Vec<u32> = l.iter().zip(&f[0].exp).map(|(x, y)| x - y).collect();
        let mg: Vec<u32> = l.iter().zip(&g[0].exp).map(|(x, y)| x - y).collect();
        // f and g are monic: mf·f − mg·g with leading terms cancelling.
        let a = self.merge_add(&[], &f[1..], &CycloNumber::one(), &mf);
        self.merge_add(&a, &g[1..], &CycloNumber::from_int(-1), &mg)
    }
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn coprime(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

fn deg(a: &[u32]) -> u32 {
    a.iter().sum()
}

#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    ring: Arc<Ring>,
    order: MonomialOrder,
    gens: Vec<Polynomial>,
    inner: Vec<SPoly>,
    steps: u64,
}

/// Standard monomials of a quotient ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuotientBasis {
    Finite(Vec<Monomial>),
    Infinite,
}

impl QuotientBasis {
    pub fn dimension(&self) -> Option<usize> {
        match self {
            QuotientBasis::Finite(v) => Some(v.len()),
            QuotientBasis::Infinite => None,
        }
    }
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Vec<u32>,
    sugar: u32,
}

/// Computes the reduced Gröbner basis of the ideal generated by `gens`.
pub fn buchberger(
    ring: &Arc<Ring>,
    gens: &[Polynomial],
    order: MonomialOrder,
    cfg: &GbConfig,
) -> Result<GroebnerBasis, GroebnerError> {
    if gens.iter().any(|g| !(Arc::ptr_eq(g.ring(), ring) || **g.ring() == **ring)) {
        return Err(GroebnerError::RingMismatch);
    }
    let mut eng = Engine { order, steps: 0, max_steps: cfg.max_steps };
    let mut basis: Vec<SPoly> = Vec::new();
    let mut sugar: Vec<u32> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut pending: BTreeSet<(usize, usize)> = BTreeSet::new();

    let mut input: Vec<SPoly> = gens.iter().filter(|g| !g.is_zero()).map(|g| eng.from_poly(g)).collect();
    input.sort_by(|a, b| order.cmp(&a[0].exp, &b[0].exp));

    fn add_element(
        basis: &mut Vec<SPoly>,
        sugar: &mut Vec<u32>,
        pairs: &mut Vec<Pair>,
        pending: &mut BTreeSet<(usize, usize)>,
        mut h: SPoly,
        s: u32,
    ) {
        Engine::make_monic(&mut h);
        let k = basis.len();
        for (i, g) in basis.iter().enumerate() {
            let l = lcm(&g[0].exp, &h[0].exp);
            let ps = (sugar[i] + deg(&l) - deg(&g[0].exp)).max(s + deg(&l) - deg(&h[0].exp));
            pairs.push(Pair { i, j: k, lcm: l, sugar: ps });
            pending.insert((i, k));
        }
        basis.push(h);
        sugar.push(s);
    }

    for g in input {
        let refs: Vec<&SPoly> = basis.iter().collect();
        let s = g.iter().map(|t| deg(&t.exp)).max().unwrap_or(0);
        let h = eng.reduce(g, &refs)?;
        if !h.is_empty() {
            add_element(&mut basis, &mut sugar, &mut pairs, &mut pending, h, s);
        }
    }

    while !pairs.is_empty() {
        let best = (0..pairs.len())
            .min_by(|&a, &b| {
                let (pa, pb) = (&pairs[a], &pairs[b]);
                pa.sugar
                    .cmp(&pb.sugar)
                    .then_with(|| order.cmp(&pa.lcm, &pb.lcm))
                    .then_with(|| (pa.i, pa.j).cmp(&(pb.i, pb.j)))
            })
            .unwrap();
        let pair = pairs.swap_remove(best);
        pending.remove(&(pair.i, pair.j));
        let (fi, fj) = (&basis[pair.i], &basis[pair.j]);
        if coprime(&fi[0].exp, &fj[0].exp) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != pair.i
                && k != pair.j
                && divides(&basis[k][0].exp, &pair.lcm)
                && !pending.contains(&(pair.i.min(k), pair.i.max(k)))
                && !pending.contains(&(pair.j.min(k), pair.j.max(k)))
        });
        if chain {
            continue;
        }
        eng.tick()?;
        let s = eng.s_poly(fi, fj);
        let refs: Vec<&SPoly> = basis.iter().collect();
        let h = eng.reduce(s, &refs)?;
        if !h.is_empty() {
            add_element(&mut basis, &mut sugar, &mut pairs, &mut pending, h, pair.sugar);
        }
    }

    // Minimalize.
    let mut keep: Vec<SPoly> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && divides(&h[0].exp, &g[0].exp) && (h[0].exp != g[0].exp || j < i)
        });
        if !redundant {
            keep.push(g.clone());
        }
    }
    // Interreduce tails.
    let mut reduced: Vec<SPoly> = Vec::with_capacity(keep.len());
    for i in 0..keep.len() {
        let others: Vec<&SPoly> = keep.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g).collect();
        let head = keep[i][0].clone();
        let tail = eng.reduce(keep[i][1..].to_vec(), &others)?;
        let mut g = vec![head];
        g.extend(tail);
        Engine::make_monic(&mut g);
        reduced.push(g);
    }
    reduced.sort_by(|a, b| order.cmp(&a[0].exp, &b[0].exp));
    let gens = reduced
        .iter()
        .map(|g| Polynomial::from_terms(ring, g.iter().map(|t| (Monomial(t.exp.clone()), t.coef.clone()))))
        .collect();
    Ok(GroebnerBasis { ring: ring.clone(), order, gens, inner: reduced, steps: eng.steps })
}

impl GroebnerBasis {
    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    /// Reduced, monic generators sorted by leading monomial (ascending).
    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    /// Reduction steps spent computing the basis.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.inner.iter().map(|g| Monomial(g[0].exp.clone())).collect()
    }

    /// True iff the ideal is the whole ring.
    pub fn is_unit(&self) -> bool {
        self.inner.iter().any(|g| g[0].exp.iter().all(|&e| e == 0))
    }

    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        let p = if Arc::ptr_eq(p.ring(), &self.ring) || **p.ring() == *self.ring {
            p.clone()
        } else {
            p.embed(&self.ring).expect("polynomial not on the basis ring")
        };
        let mut eng = Engine { order: self.order, steps: 0, max_steps: u64::MAX };
        let refs: Vec<&SPoly> = self.inner.iter().collect();
        let r = eng.reduce(eng.from_poly(&p), &refs).expect("unbounded budget");
        Polynomial::from_terms(&self.ring, r.into_iter().map(|t| (Monomial(t.exp), t.coef)))
    }

    pub fn contains(&self, p: &Polynomial) -> bool {
        self.normal_form(p).is_zero()
    }

    /// Leading term of `p` in this basis' order.
    pub fn leading_monomial(&self, p: &Polynomial) -> Option<Monomial> {
        p.terms().map(|(m, _)| m).max_by(|a, b| self.order.cmp(&a.0, &b.0)).cloned()
    }

    /// Standard monomials (not divisible by any leading monomial), in
    /// ascending order, or `Infinite` when the ideal is not zero-dimensional.
    pub fn quotient_basis(&self) -> QuotientBasis {
        let n = self.ring.arity();
        let lms = self.leading_monomials();
        if self.is_unit() {
            return QuotientBasis::Finite(Vec::new());
        }
        for i in 0..n {
            let has_pure = lms.iter().any(|m| m.0[i] > 0 && m.0.iter().enumerate().all(|(j, &e)| j == i || e == 0));
            if !has_pure {
                return QuotientBasis::Infinite;
            }
        }
        let standard = |e: &[u32]| !lms.iter().any(|m| divides(&m.0, e));
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut frontier = vec![vec![0u32; n]];
        seen.insert(vec![0; n]);
        while let Some(e) = frontier.pop() {
            for i in 0..n {
                let mut f = e.clone();
                f[i] += 1;
                if standard(&f) && seen.insert(f.clone()) {
                    frontier.push(f);
                }
            }
        }
        let mut out: Vec<Monomial> = seen.into_iter().map(Monomial).collect();
        out.sort_by(|a, b| self.order.cmp(&a.0, &b.0));
        QuotientBasis::Finite(out)
    }

    /// Reduces every S-polynomial of the stored generators; returns the
    /// nonzero remainders (empty for a genuine Gröbner basis).
    pub fn s_pair_residues(&self) -> Vec<Polynomial> {
        let mut out = Vec::new();
        let eng = Engine { order: self.order, steps: 0, max_steps: u64::MAX };
        for i in 0..self.inner.len() {
            for j in i + 1..self.inner.len() {
                let s = eng.s_poly(&self.inner[i], &self.inner[j]);
                let sp = Polynomial::from_terms(&self.ring, s.into_iter().map(|t| (Monomial(t.exp), t.coef)));
                let r = self.normal_form(&sp);
                if !r.is_zero() {
                    out.push(r);
                }
            }
        }
        out
    }
}

/// Generators of `⟨gens⟩ ∩ k[retained variables]`, on the ring of retained
/// variables (in their original order).
pub fn eliminate(
    ring: &Arc<Ring>,
    gens: &[Polynomial],
    drop: &[&str],
    cfg: &GbConfig,
) -> Result<(Arc<Ring>, Vec<Polynomial>), GroebnerError> {
    for d in drop {
        if ring.index_of(d).is_none() {
            return Err(GroebnerError::UnknownVariable(d.to_string()));
        }
    }
    let dropped: Vec<&String> = ring.vars().iter().filter(|v| drop.contains(&v.as_str())).collect();
    let kept: Vec<&String> = ring.vars().iter().filter(|v| !drop.contains(&v.as_str())).collect();
    let mut order_vars: Vec<&String> = dropped.clone();
    order_vars.extend(kept.iter().copied());
    let elim_ring = Ring::new(&order_vars);
    let kept_ring = Ring::new(&kept);
    if gens.is_empty() {
        return Ok((kept_ring, Vec::new()));
    }
    let moved: Vec<Polynomial> = gens
        .iter()
        .map(|g| g.embed(&elim_ring).map_err(|_| GroebnerError::RingMismatch))
        .collect::<Result<_, _>>()?;
    let gb = buchberger(&elim_ring, &moved, MonomialOrder::Elimination { block: dropped.len() }, cfg)?;
    let out = gb
        .generators()
        .iter()
        .filter(|g| g.terms().all(|(m, _)| m.0[..dropped.len()].iter().all(|&e| e == 0)))
        .map(|g| g.restrict(&kept_ring))
        .collect();
    Ok((kept_ring, out))
}

/// Coefficient map of `p` keyed by monomial, convenient for comparisons.
pub fn term_map(p: &Polynomial) -> BTreeMap<Monomial, CycloNumber> {
    p.terms().map(|(m, c)| (m.clone(), c.clone())).collect()
}
