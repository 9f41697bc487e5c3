//! Finite abelian group actions by polynomial substitutions, invariant
//! rings and descent witnesses.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::exactalg::{CycloNumber, ExactError, Monomial, PolyMatrix, Polynomial, Ring};
use crate::groebner::{eliminate, GbConfig, GroebnerError};
use crate::jacobi::JacobiData;

/// Upper bound on enumerated group elements.
pub const MAX_GROUP_ORDER: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActionError {
    #[error("substitution of generator {0} has a singular linear part")]
    NotInvertible(usize),
    #[error("generator {0} does not act diagonally on the coordinates")]
    NotDiagonal(usize),
    #[error("degree bound {bound} too small: invariant {missing} of degree {degree} is needed")]
    BoundTooSmall { bound: usize, missing: String, degree: usize },
    #[error("group has more than {MAX_GROUP_ORDER} elements")]
    TooLarge,
    #[error("generator count and order count differ")]
    Shape,
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

type Substitution = BTreeMap<String, Polynomial>;

/// An abelian group presented by commuting substitution generators of
/// declared orders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupAction {
    ring: Arc<Ring>,
    generators: Vec<Substitution>,
    orders: Vec<u32>,
}

impl GroupAction {
    /// Images missing from a generator default to the identity.
    pub fn new(ring: &Arc<Ring>, generators: Vec<Substitution>, orders: Vec<u32>) -> Result<Self, ActionError> {
        if generators.len() != orders.len() {
            return Err(ActionError::Shape);
        }
        let mut full = Vec::with_capacity(generators.len());
        for g in generators {
            let mut s = Substitution::new();
            for v in ring.vars() {
                let img = match g.get(v) {
                    Some(p) => p.embed(ring)?,
                    None => Polynomial::var(ring, v),
                };
                s.insert(v.clone(), img);
            }
            if let Some(k) = g.keys().find(|k| ring.index_of(k).is_none()) {
                return Err(ActionError::Exact(ExactError::MissingImage(k.clone())));
            }
            full.push(s);
        }
        Ok(GroupAction { ring: ring.clone(), generators: full, orders })
    }

    /// Diagonal action: generator `k` multiplies variable `i` by `chars[k][i]`.
    pub fn diagonal(ring: &Arc<Ring>, chars: &[Vec<CycloNumber>], orders: Vec<u32>) -> Result<Self, ActionError> {
        let gens = chars
            .iter()
            .map(|row| {
                ring.vars()
                    .iter()
                    .zip(row)
                    .map(|(v, c)| (v.clone(), Polynomial::var(ring, v).scale(c)))
                    .collect()
            })
            .collect();
        Self::new(ring, gens, orders)
    }

    pub fn trivial(ring: &Arc<Ring>) -> Self {
        GroupAction { ring: ring.clone(), generators: Vec::new(), orders: Vec::new() }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn generators(&self) -> &[Substitution] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    fn apply_sub(&self, s: &Substitution, p: &Polynomial) -> Result<Polynomial, ExactError> {
        let ring = p.ring();
        let mut images = Substitution::new();
        for v in ring.vars() {
            let img = match s.get(v) {
                Some(q) => q.embed(ring)?,
                None => Polynomial::var(ring, v),
            };
            images.insert(v.clone(), img);
        }
        p.substitute(&images, ring)
    }

    /// Applies generator `g` to `p`; variables outside the action are fixed.
    pub fn apply(&self, g: usize, p: &Polynomial) -> Result<Polynomial, ExactError> {
        self.apply_sub(&self.generators[g], p)
    }

    /// `a ∘ b`: first `b`, then `a`, as substitutions of the variables.
    fn compose(&self, a: &Substitution, b: &Substitution) -> Substitution {
        b.iter()
            .map(|(v, img)| (v.clone(), self.apply_sub(a, img).expect("images on the action ring")))
            .collect()
    }

    fn identity(&self) -> Substitution {
        self.ring.vars().iter().map(|v| (v.clone(), Polynomial::var(&self.ring, v))).collect()
    }

    /// All group elements as substitutions, identity first.
    pub fn elements(&self) -> Result<Vec<Substitution>, ActionError> {
        let mut out = vec![self.identity()];
        let mut k = 0;
        while k < out.len() {
            for g in &self.generators {
                let h = self.compose(g, &out[k]);
                if !out.contains(&h) {
                    if out.len() >= MAX_GROUP_ORDER {
                        return Err(ActionError::TooLarge);
                    }
                    out.push(h);
                }
            }
            k += 1;
        }
        Ok(out)
    }

    pub fn group_order(&self) -> Result<usize, ActionError> {
        Ok(self.elements()?.len())
    }

    fn linear_part(&self, s: &Substitution) -> PolyMatrix {
        let n = self.ring.arity();
        let e = Ring::empty();
        let mut m = PolyMatrix::zero(&e, n, n);
        for (i, v) in self.ring.vars().iter().enumerate() {
            let img = &s[v];
            for j in 0..n {
                let mut mono = vec![0; n];
                mono[j] = 1;
                m.set(i, j, Polynomial::constant(&e, img.coeff(&Monomial(mono))));
            }
        }
        m
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ActionReport {
    /// Per generator: `g^order = id` and no smaller positive power is.
    pub orders: Vec<bool>,
    /// Per generator pair `(g, h)`, `g < h`: `gh = hg`.
    pub commutation: Vec<((usize, usize), bool)>,
}

impl ActionReport {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|&b| b) && self.commutation.iter().all(|(_, b)| *b)
    }
}

/// Checks the declared generator orders and commutation exactly.
pub fn action_verify(a: &GroupAction) -> Result<ActionReport, ActionError> {
    let id = a.identity();
    let mut report = ActionReport::default();
    for (k, g) in a.generators.iter().enumerate() {
        if a.linear_part(g).det().is_zero() {
            return Err(ActionError::NotInvertible(k));
        }
        let mut p = id.clone();
        let mut ok = true;
        for step in 1..=a.orders[k] {
            p = a.compose(g, &p);
            if (p == id) != (step == a.orders[k]) {
                ok = false;
                break;
            }
        }
        report.orders.push(ok);
    }
    for i in 0..a.generators.len() {
        for j in i + 1..a.generators.len() {
            let gh = a.compose(&a.generators[i], &a.generators[j]);
            let hg = a.compose(&a.generators[j], &a.generators[i]);
            report.commutation.push(((i, j), gh == hg));
        }
    }
    Ok(report)
}

/// True iff every generator fixes `f`.
pub fn invariance_check(f: &Polynomial, a: &GroupAction) -> Result<bool, ActionError> {
    for g in 0..a.generator_count() {
        if a.apply(g, f)? != *f {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Average of `f` over the group.
pub fn reynolds(f: &Polynomial, a: &GroupAction) -> Result<Polynomial, ActionError> {
    let elems = a.elements()?;
    let mut acc = Polynomial::zero(f.ring());
    for s in &elems {
        acc = &acc + &a.apply_sub(s, f)?;
    }
    Ok(acc.scale(&CycloNumber::from_ratio(1, elems.len() as i64)))
}

#[derive(Clone, Debug)]
pub struct InvariantRing {
    /// Invariant generators, polynomials on the action ring.
    pub gens: Vec<Polynomial>,
    /// Ring of the generator symbols `z1, z2, ...`.
    pub z_ring: Arc<Ring>,
    /// Relations among the generators, on `z_ring`.
    pub relations: Vec<Polynomial>,
}

fn all_exponents(n: usize, max_deg: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    let mut frontier = vec![vec![0u32; n]];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for e in &frontier {
            // Increment only at or after the last nonzero index: each monomial once.
            let start = e.iter().rposition(|&x| x > 0).unwrap_or(0);
            for i in start..n {
                let mut f = e.clone();
                f[i] += 1;
                next.push(f);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Invariant generators and relations of a diagonal action, optionally after
/// the coordinate change `linearization` (one polynomial per variable, the new
/// coordinates in terms of the old). `degree_bound` defaults to `|G|`.
pub fn invariant_generators(
    a: &GroupAction,
    degree_bound: Option<usize>,
    linearization: Option<&[Polynomial]>,
    cfg: &GbConfig,
) -> Result<InvariantRing, ActionError> {
    let ring = a.ring().clone();
    let n = ring.arity();
    let coords: Vec<Polynomial> = match linearization {
        Some(c) => c.iter().map(|p| p.embed(&ring)).collect::<Result<_, _>>()?,
        None => (0..n).map(|i| Polynomial::var_at(&ring, i)).collect(),
    };
    let mut chars: Vec<Vec<CycloNumber>> = Vec::new();
    for g in 0..a.generator_count() {
        let mut row = Vec::new();
        for c in &coords {
            let gc = a.apply(g, c)?;
            let (m, lead) = c.terms().next().ok_or(ActionError::NotDiagonal(g))?;
            let eps = gc.coeff(m).div(lead).ok_or(ActionError::NotDiagonal(g))?;
            if gc != c.scale(&eps) {
                return Err(ActionError::NotDiagonal(g));
            }
            row.push(eps);
        }
        chars.push(row);
    }
    let noether = a.group_order()?;
    let invariant = |e: &[u32]| {
        chars.iter().all(|row| row.iter().zip(e).fold(CycloNumber::one(), |acc, (c, &k)| acc.mul(&c.pow(k))).is_one())
    };
    let candidates: Vec<Vec<u32>> =
        all_exponents(n, noether).into_iter().filter(|e| e.iter().any(|&x| x > 0) && invariant(e)).collect();
    let mut minimal: Vec<Vec<u32>> = candidates
        .iter()
        .filter(|e| {
            !candidates.iter().any(|d| d != *e && d.iter().zip(e.iter()).all(|(x, y)| x <= y))
        })
        .cloned()
        .collect();
    minimal.sort_by(|x, y| {
        let (dx, dy): (u32, u32) = (x.iter().sum(), y.iter().sum());
        dx.cmp(&dy).then_with(|| y.cmp(x))
    });
    let bound = degree_bound.unwrap_or(noether);
    let coord_ring = Ring::new(&(0..n).map(|i| format!("c{i}")).collect::<Vec<_>>());
    if let Some(e) = minimal.iter().find(|e| e.iter().sum::<u32>() as usize > bound) {
        let m = Polynomial::monomial(&coord_ring, Monomial(e.clone()), CycloNumber::one());
        return Err(ActionError::BoundTooSmall {
            bound,
            missing: m.to_string(),
            degree: e.iter().sum::<u32>() as usize,
        });
    }
    let gens: Vec<Polynomial> = minimal
        .iter()
        .map(|e| e.iter().zip(&coords).fold(Polynomial::one(&ring), |acc, (&k, c)| &acc * &c.pow(k)))
        .collect();
    let mut znames = Vec::new();
    let mut taken: Vec<String> = ring.vars().to_vec();
    for k in 1..=gens.len() {
        let z = crate::mfcore::fresh_name(&format!("z{k}"), &taken);
        taken.push(z.clone());
        znames.push(z);
    }
    let z_ring = Ring::new(&znames);
    let joint = Ring::join(&ring, &z_ring);
    let graph: Vec<Polynomial> = gens
        .iter()
        .zip(&znames)
        .map(|(g, z)| Ok(&Polynomial::var(&joint, z) - &g.embed(&joint)?))
        .collect::<Result<_, ExactError>>()?;
    let drop: Vec<&str> = ring.vars().iter().map(String::as_str).collect();
    let (kept, relations) = eliminate(&joint, &graph, &drop, cfg)?;
    let relations = relations.into_iter().map(|r| r.embed(&z_ring).expect("same variables")).collect();
    debug_assert_eq!(kept.vars(), z_ring.vars());
    Ok(InvariantRing { gens, z_ring, relations })
}

/// Data certifying that an invariant `f` descends to `f̂` on a chart:
/// `f = F(gens)` and `f̂ = F(chart)`, with the relations among the generators
/// vanishing on both sides.
#[derive(Clone, Debug)]
pub struct DescentWitness {
    pub action: GroupAction,
    pub f: Polynomial,
    /// Coordinates in which the action is diagonal, if not the variables.
    pub linearization: Option<Vec<Polynomial>>,
    pub invariant_gens: Vec<Polynomial>,
    pub z_ring: Arc<Ring>,
    pub relations: Vec<Polynomial>,
    /// `F` on `z_ring` with `F(invariant_gens) = f`.
    pub f_in_invariants: Polynomial,
    pub chart_ring: Arc<Ring>,
    /// Image of each `z_j` on `chart_ring`.
    pub chart_map: BTreeMap<String, Polynomial>,
    pub f_hat: Polynomial,
}

impl DescentWitness {
    /// Identity group, identity chart.
    pub fn trivial(f: &Polynomial) -> DescentWitness {
        let ring = f.ring().clone();
        let zn: Vec<String> = (1..=ring.arity()).map(|k| format!("z{k}")).collect();
        let z_ring = Ring::new(&zn);
        let to_z: BTreeMap<String, Polynomial> =
            ring.vars().iter().zip(&zn).map(|(v, z)| (v.clone(), Polynomial::var(&z_ring, z))).collect();
        DescentWitness {
            action: GroupAction::trivial(&ring),
            f: f.clone(),
            linearization: None,
            invariant_gens: (0..ring.arity()).map(|i| Polynomial::var_at(&ring, i)).collect(),
            f_in_invariants: f.substitute(&to_z, &z_ring).expect("all images"),
            chart_map: zn.iter().zip(ring.vars()).map(|(z, v)| (z.clone(), Polynomial::var(&ring, v))).collect(),
            z_ring,
            relations: Vec::new(),
            chart_ring: ring,
            f_hat: f.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentReport {
    pub f_invariant: bool,
    pub gens_invariant: bool,
    /// `F(invariant_gens) = f`
    pub f_matches: bool,
    /// `F(chart) = f̂`
    pub chart_matches: bool,
    pub relations_on_gens: bool,
    pub relations_on_chart: bool,
    pub milnor_f: Option<usize>,
    pub milnor_f_hat: Option<usize>,
    pub errors: Vec<String>,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.f_invariant
            && self.gens_invariant
            && self.f_matches
            && self.chart_matches
            && self.relations_on_gens
            && self.relations_on_chart
            && self.errors.is_empty()
    }
}

pub fn descent_verify(w: &DescentWitness, cfg: &GbConfig) -> DescentReport {
    let mut errors = Vec::new();
    let mut ok = |r: Result<bool, String>| match r {
        Ok(b) => b,
        Err(e) => {
            errors.push(e);
            false
        }
    };
    let a = &w.action;
    let f_invariant = ok(invariance_check(&w.f, a).map_err(|e| e.to_string()));
    let gens_invariant = ok(w
        .invariant_gens
        .iter()
        .map(|g| invariance_check(g, a))
        .collect::<Result<Vec<_>, _>>()
        .map(|v| v.into_iter().all(|b| b))
        .map_err(|e| e.to_string()));
    let ring = w.f.ring().clone();
    let gen_images: Result<BTreeMap<String, Polynomial>, String> = if w.invariant_gens.len() != w.z_ring.arity() {
        Err(format!("{} generators for {} symbols", w.invariant_gens.len(), w.z_ring.arity()))
    } else {
        w.z_ring
            .vars()
            .iter()
            .zip(&w.invariant_gens)
            .map(|(z, g)| g.embed(&ring).map(|g| (z.clone(), g)).map_err(|e| e.to_string()))
            .collect()
    };
    let on_gens = |p: &Polynomial| -> Result<Polynomial, String> {
        let imgs = gen_images.clone()?;
        p.substitute(&imgs, &ring).map_err(|e| e.to_string())
    };
    let on_chart = |p: &Polynomial| -> Result<Polynomial, String> {
        let imgs: BTreeMap<String, Polynomial> = w
            .chart_map
            .iter()
            .map(|(z, q)| q.embed(&w.chart_ring).map(|q| (z.clone(), q)))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        p.substitute(&imgs, &w.chart_ring).map_err(|e| e.to_string())
    };
    let f_matches = ok(on_gens(&w.f_in_invariants).map(|p| p == w.f));
    let chart_matches = ok(on_chart(&w.f_in_invariants).and_then(|p| {
        w.f_hat.embed(&w.chart_ring).map(|fh| p == fh).map_err(|e| e.to_string())
    }));
    let relations_on_gens =
        ok(w.relations.iter().map(|r| on_gens(r).map(|p| p.is_zero())).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().all(|b| b)));
    let relations_on_chart =
        ok(w.relations.iter().map(|r| on_chart(r).map(|p| p.is_zero())).collect::<Result<Vec<_>, _>>().map(|v| v.into_iter().all(|b| b)));
    let milnor_f = JacobiData::build_inferred(&w.f, cfg).ok().map(|j| j.milnor());
    let milnor_f_hat = JacobiData::build_inferred(&w.f_hat, cfg).ok().map(|j| j.milnor());
    DescentReport {
        f_invariant,
        gens_invariant,
        f_matches,
        chart_matches,
        relations_on_gens,
        relations_on_chart,
        milnor_f,
        milnor_f_hat,
        errors,
    }
}

/// Rational `p/q` as a cyclotomic constant.
pub fn rational_constant(r: BigRational) -> CycloNumber {
    CycloNumber::from_rational(r)
}
