//! Ansatz search for graded rank-2 factorizations of `V − U`.
//!
//! For a 2×2 block `d1` with `d0 = adj(d1)` both factorization conditions
//! reduce to `det(d1) = V − U`. Each entry of `d1` is a generic combination of
//! the monomials of its prescribed weighted degree; matching coefficients of
//! the determinant gives a polynomial system in the unknown coefficients,
//! which is solved by a depth-first search over Gröbner bases.

use std::cmp::Ordering as CmpOrdering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::exactalg::{
    weighted_degree, CycloNumber, ExactError, Homogeneity, Monomial, PolyMatrix, Polynomial, Ring,
    WeightSystem,
};
use crate::groebner::{buchberger, GbConfig, GroebnerError, MonomialOrder, QuotientBasis};
use crate::mfcore::{mf_verify, Grading, MatrixFactorization, MfError};
use crate::qdim::{certify_equivalence, EquivalenceCertificate, QDimError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("incompatible weights: {0}")]
    IncompatibleWeights(String),
    #[error("entry ({row}, {col}) has no monomial of degree {degree}")]
    NoAdmissibleMonomials { row: usize, col: usize, degree: String },
    #[error("resource limit exceeded after {steps} reduction steps")]
    Budget { steps: u64 },
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Mf(#[from] MfError),
    #[error(transparent)]
    QDim(#[from] QDimError),
}

/// `V(target) − U(source)` together with the weights making both homogeneous
/// of degree `degree`.
#[derive(Clone, Debug)]
pub struct SearchTarget {
    pub u: Polynomial,
    pub v: Polynomial,
    pub weights_source: WeightSystem,
    pub weights_target: WeightSystem,
    pub degree: BigRational,
    pub group_order_claim: Option<u64>,
}

impl SearchTarget {
    fn check(&self) -> Result<(), SearchError> {
        if !self.degree.is_positive() {
            return Err(SearchError::IncompatibleWeights("degree must be positive".into()));
        }
        if let Some(x) = self.u.ring().vars().iter().find(|x| self.v.ring().index_of(x).is_some()) {
            return Err(SearchError::IncompatibleWeights(format!("variable {x} is on both sides")));
        }
        for (side, p, w) in [("U", &self.u, &self.weights_source), ("V", &self.v, &self.weights_target)] {
            w.for_ring(p.ring())?;
            match weighted_degree(p, w)? {
                Homogeneity::Degree(d) if d == self.degree => {}
                Homogeneity::Zero => {}
                Homogeneity::Degree(d) => {
                    return Err(SearchError::IncompatibleWeights(format!(
                        "{side} has degree {d}, expected {}",
                        self.degree
                    )))
                }
                Homogeneity::Inhomogeneous => {
                    return Err(SearchError::IncompatibleWeights(format!("{side} is not quasi-homogeneous")))
                }
            }
        }
        Ok(())
    }

    fn joint_ring(&self) -> Arc<Ring> {
        Ring::join(self.u.ring(), self.v.ring())
    }

    fn joint_weights(&self, ring: &Ring) -> Vec<BigRational> {
        self.weights_source.union(&self.weights_target).for_ring(ring).expect("checked weights")
    }

    /// `Σ (1 − 2 q_i / D)` agrees on both sides.
    pub fn central_charges_match(&self) -> bool {
        let c = |w: &WeightSystem| {
            w.iter().fold(BigRational::zero(), |acc, (_, q)| {
                acc + BigRational::one() - q * BigRational::from_integer(2.into()) / &self.degree
            })
        };
        c(&self.weights_source) == c(&self.weights_target)
    }
}

/// Weighted degrees `[[a, b], [c, e]]` of the entries of `d1`, with
/// `a + e = b + c = D`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DegreeProfile(pub [[BigRational; 2]; 2]);

impl DegreeProfile {
    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.0[i][j]
    }

    fn swap_rows(&self) -> DegreeProfile {
        let g = &self.0;
        DegreeProfile([g[1].clone(), g[0].clone()])
    }

    fn swap_cols(&self) -> DegreeProfile {
        let g = &self.0;
        DegreeProfile([[g[0][1].clone(), g[0][0].clone()], [g[1][1].clone(), g[1][0].clone()]])
    }

    /// Smallest profile reachable by permuting rows and columns; those
    /// permutations map solutions to solutions.
    pub fn canonical(&self) -> DegreeProfile {
        let r = self.swap_rows();
        [self.clone(), self.swap_cols(), r.swap_cols(), r].into_iter().min().unwrap()
    }

    fn zero_entries(&self) -> usize {
        self.0.iter().flatten().filter(|d| d.is_zero()).count()
    }

    fn spread(&self) -> BigRational {
        let mut it = self.0.iter().flatten();
        let first = it.next().unwrap().clone();
        let (lo, hi) = it.fold((first.clone(), first), |(lo, hi), d| (lo.min(d.clone()), hi.max(d.clone())));
        hi - lo
    }

    /// Generator degrees `(even, odd)` with the first even generator in degree 0.
    pub fn generator_degrees(&self, degree: &BigRational) -> (Vec<BigRational>, Vec<BigRational>) {
        let half = degree / BigRational::from_integer(2.into());
        let g = &self.0;
        (vec![BigRational::zero(), &g[1][0] - &g[0][0]], vec![&half - &g[0][0], &half - &g[0][1]])
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.0;
        write!(f, "({}, {}; {}, {})", g[0][0], g[0][1], g[1][0], g[1][1])
    }
}

/// Exponent vectors on `ring` of weighted degree exactly `d`, in descending
/// grlex order.
fn monomials_of_degree(ws: &[BigRational], d: &BigRational) -> Vec<Monomial> {
    fn go(ws: &[BigRational], i: usize, left: &BigRational, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == ws.len() {
            if left.is_zero() {
                out.push(Monomial(cur.clone()));
            }
            return;
        }
        let mut rest = left.clone();
        let mut e = 0;
        while !rest.is_negative() {
            cur[i] = e;
            go(ws, i + 1, &rest, cur, out);
            rest -= &ws[i];
            e += 1;
        }
        cur[i] = 0;
    }
    if d.is_negative() {
        return Vec::new();
    }
    let mut out = Vec::new();
    go(ws, 0, d, &mut vec![0; ws.len()], &mut out);
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// Every grid `(a, b; c, e)` with `a + e = b + c = D` whose entries all admit
/// at least one monomial, in ascending order of `(a, b)`.
pub fn entry_degree_profiles(t: &SearchTarget) -> Result<Vec<DegreeProfile>, SearchError> {
    t.check()?;
    let ring = t.joint_ring();
    let ws = t.joint_weights(&ring);
    let d = &t.degree;
    // Attainable degrees in [0, D] are the only candidates for a.
    let (ints, scaled_d) = t.weights_source.union(&t.weights_target).integer_form(d);
    if !scaled_d.is_integer() || ints.is_empty() {
        return Ok(Vec::new());
    }
    let scale = &scaled_d / d;
    let top = scaled_d.to_integer().to_u64().unwrap_or(0);
    let attainable: Vec<BigRational> = (0..=top)
        .map(|k| BigRational::from_integer(k.into()) / &scale)
        .filter(|x| !monomials_of_degree(&ws, x).is_empty())
        .collect();
    let mut out = Vec::new();
    for a in &attainable {
        let e = d - a;
        if !attainable.contains(&e) {
            continue;
        }
        for b in &attainable {
            let c = d - b;
            if !attainable.contains(&c) {
                continue;
            }
            out.push(DegreeProfile([[a.clone(), b.clone()], [c, e.clone()]]));
        }
    }
    Ok(out)
}

/// Generic 2×2 `d1` for one degree profile: every admissible monomial of
/// every entry carries its own unknown coefficient.
#[derive(Clone, Debug)]
pub struct Ansatz {
    pub target: SearchTarget,
    pub profile: DegreeProfile,
    /// Source variables followed by target variables.
    pub ring: Arc<Ring>,
    pub unknowns: Vec<String>,
    /// `entries[i][j]` lists `(monomial, unknown index)`.
    pub entries: [[Vec<(Monomial, usize)>; 2]; 2],
}

impl Ansatz {
    pub fn new(target: &SearchTarget, profile: &DegreeProfile) -> Result<Ansatz, SearchError> {
        target.check()?;
        let ring = target.joint_ring();
        let ws = target.joint_weights(&ring);
        let prefix = ["c", "k", "coef"]
            .into_iter()
            .find(|p| ring.vars().iter().all(|v| !v.starts_with(p)))
            .unwrap_or("_c");
        let mut unknowns = Vec::new();
        let mut entries: [[Vec<(Monomial, usize)>; 2]; 2] = Default::default();
        for i in 0..2 {
            for j in 0..2 {
                let ms = monomials_of_degree(&ws, profile.get(i, j));
                if ms.is_empty() {
                    return Err(SearchError::NoAdmissibleMonomials { row: i, col: j, degree: profile.get(i, j).to_string() });
                }
                for m in ms {
                    entries[i][j].push((m, unknowns.len()));
                    unknowns.push(format!("{prefix}{}", unknowns.len()));
                }
            }
        }
        Ok(Ansatz { target: target.clone(), profile: profile.clone(), ring, unknowns, entries })
    }

    /// Coefficients of `det(d1) − (V − U)` with respect to the factorization
    /// variables, as polynomials in the unknowns.
    pub fn equations(&self) -> Vec<Polynomial> {
        let coef_ring = Ring::new(&self.unknowns);
        let big = Ring::join(&self.ring, &coef_ring);
        let n = self.ring.arity();
        let entry = |i: usize, j: usize| {
            let mut p = Polynomial::zero(&big);
            for (m, k) in &self.entries[i][j] {
                let mut e = m.0.clone();
                e.resize(big.arity(), 0);
                e[n + k] = 1;
                p.add_term(Monomial(e), CycloNumber::one());
            }
            p
        };
        let det = &(&entry(0, 0) * &entry(1, 1)) - &(&entry(0, 1) * &entry(1, 0));
        let vu = &self.target.v.embed(&big).expect("target var") - &self.target.u.embed(&big).expect("source var");
        (&det - &vu).split(&self.ring, &coef_ring).into_values().filter(|p| !p.is_zero()).collect()
    }

    /// Number of unknowns in the first row; they come first.
    pub fn first_row_unknowns(&self) -> usize {
        self.entries[0][0].len() + self.entries[0][1].len()
    }

    /// Entry of `d1` that unknown `k` belongs to.
    pub fn entry_of(&self, k: usize) -> (usize, usize) {
        let mut start = 0;
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            start += self.entries[i][j].len();
            if k < start {
                return (i, j);
            }
        }
        panic!("unknown index {k} out of range")
    }

    /// The factorization obtained by substituting coefficient values.
    pub fn instantiate(&self, values: &[CycloNumber]) -> Result<MatrixFactorization, SearchError> {
        let mut d1 = PolyMatrix::zero(&self.ring, 2, 2);
        for i in 0..2 {
            for j in 0..2 {
                let p = Polynomial::from_terms(
                    &self.ring,
                    self.entries[i][j].iter().map(|(m, k)| (m.clone(), values[*k].clone())),
                );
                d1.set(i, j, p);
            }
        }
        let d0 = d1.adjugate();
        let (even, odd) = self.profile.generator_degrees(&self.target.degree);
        let grading = Grading {
            weights_source: self.target.weights_source.clone(),
            weights_target: self.target.weights_target.clone(),
            degree: self.target.degree.clone(),
            generator_degrees_even: even,
            generator_degrees_odd: odd,
        };
        Ok(MatrixFactorization::new(
            self.target.u.ring().vars(),
            self.target.v.ring().vars(),
            &self.target.u,
            &self.target.v,
            &d0,
            &d1,
            Some(grading),
            1,
        )?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_profiles: usize,
    /// Gröbner reduction steps per profile, summed over all nodes.
    pub max_steps: u64,
    pub max_nodes: usize,
    /// Solutions kept per profile besides accepted ones; the search goes on
    /// past this count.
    pub max_solutions_per_profile: usize,
    /// Skip profiles after the first one yielding an accepted certificate.
    pub stop_at_first_certificate: bool,
    pub central_charge_prefilter: bool,
    /// Values tried for an unknown left free by the equations.
    pub values: Vec<i64>,
    /// No new profile is started after this much wall-clock time.
    pub soft_time_limit: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_profiles: 10_000,
            max_steps: 1_000_000,
            max_nodes: 2_000,
            max_solutions_per_profile: 4,
            stop_at_first_certificate: true,
            central_charge_prefilter: true,
            values: vec![0, 1, -1],
            soft_time_limit: Some(Duration::from_secs(240)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub profiles_total: usize,
    pub profiles_tried: usize,
    pub profiles_exhausted: usize,
    pub nodes: usize,
    pub groebner_steps: u64,
    pub solutions_dropped: usize,
    pub prefiltered: bool,
    pub soft_limit_hit: bool,
    pub elapsed_ms: u128,
}

#[derive(Clone, Debug, Default)]
pub struct SearchResult {
    pub solutions: Vec<MatrixFactorization>,
    /// One per solution, in the same order.
    pub certificates: Vec<EquivalenceCertificate>,
    /// Components whose coefficients need roots beyond quadratic radicals.
    pub unsolved: Vec<String>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn accepted(&self) -> impl Iterator<Item = &EquivalenceCertificate> {
        self.certificates.iter().filter(|c| c.accepted())
    }

    fn absorb(&mut self, other: SearchResult) {
        self.solutions.extend(other.solutions);
        self.certificates.extend(other.certificates);
        self.unsolved.extend(other.unsolved);
        self.stats.profiles_tried += other.stats.profiles_tried;
        self.stats.profiles_exhausted += other.stats.profiles_exhausted;
        self.stats.nodes += other.stats.nodes;
        self.stats.groebner_steps += other.stats.groebner_steps;
        self.stats.solutions_dropped += other.stats.solutions_dropped;
    }
}

/// Rational roots of an integer-coefficient polynomial (ascending degree),
/// ascending and without multiplicity, plus the cofactor left after dividing
/// them out. `None` when a coefficient is too large to factor.
fn rational_roots(coeffs: &[BigRational]) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let mut p: Vec<BigRational> = coeffs.to_vec();
    let mut roots = Vec::new();
    while p.len() > 1 && p[0].is_zero() {
        p.remove(0);
        if !roots.contains(&BigRational::zero()) {
            roots.push(BigRational::zero());
        }
    }
    if p.len() <= 1 {
        return Some((roots, p));
    }
    let l = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
    let limit = BigInt::from(1_000_000_000_000u64);
    let (a0, an) = (ints[0].abs(), ints[ints.len() - 1].abs());
    if a0 > limit || an > limit {
        return None;
    }
    let divisors = |n: u64| -> Vec<u64> {
        let mut ds = Vec::new();
        let mut k = 1;
        while k * k <= n {
            if n.is_multiple_of(k) {
                ds.push(k);
                if k * k != n {
                    ds.push(n / k);
                }
            }
            k += 1;
        }
        ds
    };
    let mut cands: Vec<BigRational> = Vec::new();
    for pd in divisors(a0.to_u64().unwrap()) {
        for qd in divisors(an.to_u64().unwrap()) {
            for s in [1i64, -1] {
                let r = BigRational::new(BigInt::from(pd) * s, BigInt::from(qd));
                if !cands.contains(&r) {
                    cands.push(r);
                }
            }
        }
    }
    cands.sort();
    for r in cands {
        loop {
            let (q, rem) = synthetic_division(&p, &r);
            if !rem.is_zero() {
                break;
            }
            if !roots.contains(&r) {
                roots.push(r.clone());
            }
            p = q;
        }
    }
    roots.sort();
    Some((roots, p))
}

/// Divides by `(t − r)`; coefficients ascending.
fn synthetic_division<T: Clone + Zero>(p: &[T], r: &T) -> (Vec<T>, T)
where
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T> + std::ops::Add<&'a T, Output = T>,
{
    let n = p.len();
    let mut q = vec![T::zero(); n.saturating_sub(1)];
    let mut acc = T::zero();
    for k in (0..n).rev() {
        acc = &(&acc * r) + &p[k];
        if k > 0 {
            q[k - 1] = acc.clone();
        }
    }
    (q, acc)
}

/// Roots of a univariate polynomial (coefficients ascending) that are
/// rational or quadratic radicals over the coefficient field; `Err` with the
/// unresolved cofactor degree otherwise.
fn radical_roots(coeffs: &[CycloNumber]) -> Result<Vec<CycloNumber>, usize> {
    let mut c: Vec<CycloNumber> = coeffs.to_vec();
    while c.len() > 1 && c.last().unwrap().is_zero() {
        c.pop();
    }
    let deg = c.len() - 1;
    let quadratic = |c: &[CycloNumber]| -> Option<Vec<CycloNumber>> {
        let (a, b, k) = (&c[2], &c[1], &c[0]);
        let disc = b.mul(b).sub(&a.mul(k).mul(&CycloNumber::from_int(4)));
        let s = CycloNumber::sqrt_rational(disc.as_rational()?);
        let two_a = a.mul(&CycloNumber::from_int(2));
        let r1 = b.neg().add(&s).div(&two_a)?;
        let r2 = b.neg().sub(&s).div(&two_a)?;
        Some(if r1 == r2 { vec![r1] } else { vec![r1, r2] })
    };
    match deg {
        0 => Ok(Vec::new()),
        1 => Ok(vec![c[0].neg().div(&c[1]).expect("nonzero leading coefficient")]),
        _ => {
            if let Some(rc) = c.iter().map(|x| x.as_rational().cloned()).collect::<Option<Vec<_>>>() {
                let (roots, rest) = rational_roots(&rc).ok_or(deg)?;
                let mut out: Vec<CycloNumber> = roots.into_iter().map(CycloNumber::from_rational).collect();
                match rest.len() {
                    0 | 1 => {}
                    3 => {
                        let rest: Vec<CycloNumber> = rest.into_iter().map(CycloNumber::from_rational).collect();
                        out.extend(quadratic(&rest).ok_or(2usize)?);
                    }
                    n => return Err(n - 1),
                }
                Ok(out)
            } else if deg == 2 {
                quadratic(&c).ok_or(2)
            } else {
                Err(deg)
            }
        }
    }
}

/// Systems with at most this many unknowns go to a Gröbner basis even
/// when nonlinear.
const SMALL_SYSTEM: usize = 6;

fn lowest_univariate(gens: &[Polynomial]) -> Option<Polynomial> {
    gens.iter()
        .filter(|g| g.support_vars().len() == 1)
        .min_by_key(|g| (g.total_degree(), g.support_vars()[0]))
        .cloned()
}

struct Dfs<'a> {
    ansatz: &'a Ansatz,
    equations: Vec<Polynomial>,
    budget: &'a Budget,
    result: SearchResult,
    exhausted: bool,
    cancel: &'a dyn Fn() -> bool,
    done: bool,
}

enum Node {
    Dead,
    Solution,
    Branch(usize, Vec<CycloNumber>),
}

impl Dfs<'_> {
    fn steps_left(&self) -> u64 {
        self.budget.max_steps.saturating_sub(self.result.stats.groebner_steps)
    }

    fn gb(&mut self, ring: &Arc<Ring>, eqs: &[Polynomial], order: MonomialOrder) -> Option<crate::groebner::GroebnerBasis> {
        match buchberger(ring, eqs, order, &GbConfig { max_steps: self.steps_left() }) {
            Ok(gb) => {
                self.result.stats.groebner_steps += gb.steps();
                Some(gb)
            }
            Err(GroebnerError::Budget { steps }) => {
                self.result.stats.groebner_steps += steps;
                self.exhausted = true;
                None
            }
            Err(e) => panic!("ansatz equations share one ring: {e}"),
        }
    }

    /// Decides what to do with a partial assignment.
    fn expand(&mut self, assigned: &[Option<CycloNumber>]) -> Option<Node> {
        let free: Vec<&String> =
            self.ansatz.unknowns.iter().zip(assigned).filter(|(_, a)| a.is_none()).map(|(n, _)| n).collect();
        let ring = Ring::new(&free);
        let images: BTreeMap<String, Polynomial> = self
            .ansatz
            .unknowns
            .iter()
            .zip(assigned)
            .map(|(n, a)| match a {
                Some(c) => (n.clone(), Polynomial::constant(&ring, c.clone())),
                None => (n.clone(), Polynomial::var(&ring, n)),
            })
            .collect();
        let eqs: Vec<Polynomial> = self
            .equations
            .iter()
            .map(|e| e.substitute(&images, &ring).expect("images cover every unknown"))
            .filter(|e| !e.is_zero())
            .collect();
        if eqs.iter().any(|e| e.as_constant().is_some()) {
            return Some(Node::Dead);
        }
        if free.is_empty() {
            return Some(Node::Solution);
        }
        let global = |local: usize| self.ansatz.unknowns.iter().position(|n| n == free[local]).unwrap();
        if let Some(g) = lowest_univariate(&eqs) {
            return Some(self.branch_on_roots(&g, global(g.support_vars()[0])));
        }
        let first_row = (0..free.len()).find(|&i| global(i) < self.ansatz.first_row_unknowns());
        let linear = eqs.iter().all(|e| e.total_degree().unwrap_or(0) <= 1);
        if !linear && free.len() > SMALL_SYSTEM {
            let var = global(first_row.expect("fixing the first row makes the system linear"));
            return Some(Node::Branch(var, self.specialization_values(var, assigned)));
        }
        let gb = self.gb(&ring, &eqs, MonomialOrder::GrevLex)?;
        if gb.is_unit() {
            return Some(Node::Dead);
        }
        let mut uni = lowest_univariate(gb.generators());
        if uni.is_none() && matches!(gb.quotient_basis(), QuotientBasis::Finite(_)) {
            let lex = self.gb(&ring, &eqs, MonomialOrder::Lex)?;
            uni = lowest_univariate(lex.generators());
        }
        if let Some(g) = uni {
            return Some(self.branch_on_roots(&g, global(g.support_vars()[0])));
        }
        // Positive-dimensional: specialize the first row, then a variable
        // dividing no leading monomial, then one without a pure-power one.
        let lms = gb.leading_monomials();
        let divides_none = (0..free.len()).rev().find(|&i| lms.iter().all(|m| m.0[i] == 0));
        let no_pure_power = (0..free.len())
            .rev()
            .find(|&i| !lms.iter().any(|m| m.0[i] > 0 && m.0.iter().enumerate().all(|(j, &e)| j == i || e == 0)));
        let var = global(first_row.or(divides_none).or(no_pure_power).expect("positive-dimensional ideal has a free variable"));
        Some(Node::Branch(var, self.specialization_values(var, assigned)))
    }

    fn branch_on_roots(&mut self, g: &Polynomial, var: usize) -> Node {
        let local = g.support_vars()[0];
        let deg = g.total_degree().unwrap() as usize;
        let mut coeffs = vec![CycloNumber::zero(); deg + 1];
        for (m, c) in g.terms() {
            coeffs[m.0[local] as usize] = c.clone();
        }
        match radical_roots(&coeffs) {
            Ok(roots) => Node::Branch(var, roots),
            Err(d) => {
                self.result.unsolved.push(format!(
                    "profile {}: {g} = 0 leaves a factor of degree {d} without radical roots",
                    self.ansatz.profile
                ));
                Node::Dead
            }
        }
    }

    /// Row and column scalings preserving the determinant make the first
    /// nonzero coefficient of each first-row entry equal to one.
    fn specialization_values(&self, var: usize, assigned: &[Option<CycloNumber>]) -> Vec<CycloNumber> {
        let (i, j) = self.ansatz.entry_of(var);
        let leading = i == 0
            && self.ansatz.entries[i][j]
                .iter()
                .take_while(|(_, k)| *k != var)
                .all(|(_, k)| assigned[*k].as_ref().is_some_and(|c| c.is_zero()));
        if i == 1 {
            // With the first row fixed, the rest of the second row only adds
            // multiples of the first row.
            vec![CycloNumber::zero()]
        } else if leading {
            vec![CycloNumber::zero(), CycloNumber::one()]
        } else {
            self.budget.values.iter().map(|&v| CycloNumber::from_int(v)).collect()
        }
    }

    fn run(&mut self, assigned: &mut Vec<Option<CycloNumber>>) -> Result<(), SearchError> {
        if self.done || self.exhausted {
            return Ok(());
        }
        if self.result.stats.nodes >= self.budget.max_nodes || (self.cancel)() {
            self.exhausted = true;
            return Ok(());
        }
        self.result.stats.nodes += 1;
        match self.expand(assigned) {
            None | Some(Node::Dead) => {}
            Some(Node::Solution) => {
                let values: Vec<CycloNumber> = assigned.iter().map(|a| a.clone().unwrap()).collect();
                let x = self.ansatz.instantiate(&values)?;
                if mf_verify(&x).passed() && !self.result.solutions.contains(&x) {
                    let cert = certify_equivalence(&x, self.ansatz.target.group_order_claim)?;
                    let accepted = cert.accepted();
                    if accepted || self.result.solutions.len() < self.budget.max_solutions_per_profile {
                        self.result.solutions.push(x);
                        self.result.certificates.push(cert);
                    } else {
                        self.result.stats.solutions_dropped += 1;
                    }
                    if accepted && self.budget.stop_at_first_certificate {
                        self.done = true;
                    }
                }
            }
            Some(Node::Branch(var, values)) => {
                for v in values {
                    assigned[var] = Some(v);
                    self.run(assigned)?;
                    assigned[var] = None;
                    if self.done || self.exhausted {
                        break;
                    }
                }
            }
        }
        Ok(())
    }
}

fn solve_with_cancel(a: &Ansatz, budget: &Budget, cancel: &dyn Fn() -> bool) -> Result<SearchResult, SearchError> {
    let mut dfs = Dfs {
        ansatz: a,
        equations: a.equations(),
        budget,
        result: SearchResult::default(),
        exhausted: false,
        cancel,
        done: false,
    };
    dfs.result.stats.profiles_total = 1;
    dfs.result.stats.profiles_tried = 1;
    let mut assigned = vec![None; a.unknowns.len()];
    dfs.run(&mut assigned)?;
    if dfs.exhausted {
        dfs.result.stats.profiles_exhausted = 1;
        if dfs.result.solutions.is_empty() && !cancel() {
            return Err(SearchError::Budget { steps: dfs.result.stats.groebner_steps });
        }
    }
    Ok(dfs.result)
}

/// Solves one ansatz. Every returned factorization passes [`mf_verify`] and
/// carries its grading; its certificate sits at the same index.
pub fn solve_ansatz(a: &Ansatz, budget: &Budget) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let mut r = solve_with_cancel(a, budget, &|| false)?;
    r.stats.elapsed_ms = start.elapsed().as_millis();
    Ok(r)
}

/// Order in which profiles are tried: fewer constant entries first, then
/// balanced grids, then lexicographic.
fn profile_rank(a: &DegreeProfile, b: &DegreeProfile) -> CmpOrdering {
    (a.zero_entries(), a.spread(), a).cmp(&(b.zero_entries(), b.spread(), b))
}

/// Runs the ansatz over every profile up to row and column swaps. Profiles
/// are solved in parallel; results are concatenated in profile order, and
/// with `stop_at_first_certificate` everything after the first profile that
/// produced an accepted certificate is dropped, so the output does not depend
/// on scheduling.
pub fn search(t: &SearchTarget, budget: &Budget) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let mut profiles: Vec<DegreeProfile> = entry_degree_profiles(t)?.iter().map(|p| p.canonical()).collect();
    profiles.sort_by(profile_rank);
    profiles.dedup();
    let mut result = SearchResult::default();
    result.stats.profiles_total = profiles.len();
    if budget.central_charge_prefilter && !t.central_charges_match() {
        result.stats.prefiltered = true;
        result.stats.elapsed_ms = start.elapsed().as_millis();
        return Ok(result);
    }
    profiles.truncate(budget.max_profiles);
    let first_hit = AtomicUsize::new(usize::MAX);
    let late = |i: usize| {
        (budget.stop_at_first_certificate && i > first_hit.load(Ordering::Relaxed))
            || budget.soft_time_limit.is_some_and(|l| start.elapsed() > l)
    };
    let outcomes: Vec<Option<Result<SearchResult, SearchError>>> = profiles
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            if late(i) {
                return None;
            }
            let a = match Ansatz::new(t, p) {
                Ok(a) => a,
                Err(e) => return Some(Err(e)),
            };
            let r = solve_with_cancel(&a, budget, &|| late(i));
            if let Ok(r) = &r {
                if r.certificates.iter().any(|c| c.accepted()) {
                    first_hit.fetch_min(i, Ordering::Relaxed);
                }
            }
            Some(r)
        })
        .collect();
    let cutoff = first_hit.load(Ordering::Relaxed);
    for (i, o) in outcomes.into_iter().enumerate() {
        if budget.stop_at_first_certificate && i > cutoff {
            break;
        }
        match o {
            Some(Ok(r)) => result.absorb(r),
            Some(Err(SearchError::Budget { steps })) => {
                result.stats.profiles_tried += 1;
                result.stats.profiles_exhausted += 1;
                result.stats.groebner_steps += steps;
            }
            Some(Err(e)) => return Err(e),
            None => result.stats.soft_limit_hit = true,
        }
    }
    result.stats.elapsed_ms = start.elapsed().as_millis();
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{poly_parse, rat};

    fn target(u: &str, us: &[&str], uw: &[i64], v: &str, vs: &[&str], vw: &[i64], d: i64, claim: Option<u64>) -> SearchTarget {
        SearchTarget {
            u: poly_parse(u, &Ring::new(us), 1).unwrap(),
            v: poly_parse(v, &Ring::new(vs), 1).unwrap(),
            weights_source: WeightSystem::from_ints(us, uw).unwrap(),
            weights_target: WeightSystem::from_ints(vs, vw).unwrap(),
            degree: rat(d, 1),
            group_order_claim: claim,
        }
    }

    #[test]
    fn monomial_enumeration() {
        let ws = vec![rat(1, 1), rat(3, 1)];
        let ms = monomials_of_degree(&ws, &rat(4, 1));
        assert_eq!(ms, vec![Monomial(vec![4, 0]), Monomial(vec![1, 1])]);
        assert!(monomials_of_degree(&ws, &rat(-1, 1)).is_empty());
        assert_eq!(monomials_of_degree(&ws, &rat(0, 1)), vec![Monomial(vec![0, 0])]);
    }

    #[test]
    fn profiles_a5_d4() {
        let t = target("u^6 + v^2", &["u", "v"], &[1, 3], "x^3 + x*y^2", &["x", "y"], &[2, 2], 6, Some(2));
        let ps = entry_degree_profiles(&t).unwrap();
        assert!(!ps.is_empty());
        let known = DegreeProfile([[rat(2, 1), rat(3, 1)], [rat(3, 1), rat(4, 1)]]);
        assert!(ps.contains(&known));
        for p in &ps {
            assert_eq!(p.get(0, 0) + p.get(1, 1), rat(6, 1));
            assert_eq!(p.get(0, 1) + p.get(1, 0), rat(6, 1));
        }
    }

    #[test]
    fn odd_degree_even_weights_has_no_profiles() {
        let t = target("x^2", &["x"], &[2], "y^2", &["y"], &[2], 4, None);
        assert!(!entry_degree_profiles(&t).unwrap().is_empty());
        let t = SearchTarget { degree: rat(3, 1), ..target("x^2", &["x"], &[2], "y^2", &["y"], &[2], 4, None) };
        assert!(entry_degree_profiles(&t).is_err());
        let t = SearchTarget {
            u: Polynomial::zero(&Ring::new(&["x"])),
            v: Polynomial::zero(&Ring::new(&["y"])),
            degree: rat(3, 1),
            ..target("x^2", &["x"], &[2], "y^2", &["y"], &[2], 4, None)
        };
        assert!(entry_degree_profiles(&t).unwrap().is_empty());
    }

    #[test]
    fn diagonal_profile_of_x2() {
        let t = target("x^2", &["x"], &[1], "y^2", &["y"], &[1], 2, None);
        let ps = entry_degree_profiles(&t).unwrap();
        assert!(ps.contains(&DegreeProfile([[rat(1, 1), rat(1, 1)], [rat(1, 1), rat(1, 1)]])));
    }

    #[test]
    fn recovers_difference_of_squares() {
        let t = target("x^2", &["x"], &[1], "y^2", &["y"], &[1], 2, None);
        let p = DegreeProfile([[rat(1, 1), rat(1, 1)], [rat(1, 1), rat(1, 1)]]);
        let a = Ansatz::new(&t, &p).unwrap();
        let budget = Budget { stop_at_first_certificate: false, max_solutions_per_profile: 50, ..Budget::default() };
        let r = solve_ansatz(&a, &budget).unwrap();
        assert!(!r.solutions.is_empty());
        let ring = r.solutions[0].ring().clone();
        let q = |s: &str| poly_parse(s, &ring, 1).unwrap();
        let diag = r.solutions.iter().any(|x| {
            let d1 = x.d1();
            d1.get(0, 1).is_zero() && d1.get(1, 0).is_zero() && {
                let (a, b) = (d1.get(0, 0), d1.get(1, 1));
                (a == &q("y - x") && b == &q("y + x")) || (a == &q("y + x") && b == &q("y - x"))
            }
        });
        assert!(diag);
        for x in &r.solutions {
            assert!(mf_verify(x).passed());
            assert_eq!(x.d1().det(), q("y^2 - x^2"));
        }
    }

    #[test]
    fn radical_root_extraction() {
        let c = |v: &[i64]| v.iter().map(|&x| CycloNumber::from_int(x)).collect::<Vec<_>>();
        // (t − 1)(t + 2)(2t − 3)
        let roots = radical_roots(&c(&[6, -7, -1, 2])).unwrap();
        assert_eq!(roots, vec![CycloNumber::from_int(-2), CycloNumber::from_int(1), CycloNumber::from_ratio(3, 2)]);
        // t² − 2
        let roots = radical_roots(&c(&[-2, 0, 1])).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.mul(r), CycloNumber::from_int(2));
        }
        // t³ − 2
        assert_eq!(radical_roots(&c(&[-2, 0, 0, 1])), Err(3));
        // t²(t − 5)
        assert_eq!(radical_roots(&c(&[0, 0, -5, 1])).unwrap(), vec![CycloNumber::zero(), CycloNumber::from_int(5)]);
    }

    #[test]
    fn central_charge_mismatch_is_prefiltered() {
        let t = target("x^3", &["x"], &[1], "y^2", &["y"], &[1], 2, None);
        assert!(t.check().is_err());
        let t = target("x^3", &["x"], &[2], "y^3", &["y"], &[2], 6, None);
        assert!(t.central_charges_match());
        let t = target("x^4", &["x"], &[1], "y^2", &["y"], &[2], 4, None);
        assert!(!t.central_charges_match());
        let r = search(&t, &Budget::default()).unwrap();
        assert!(r.solutions.is_empty() && r.stats.prefiltered && r.stats.profiles_total > 0);
    }

    fn a_d(b: i64) -> SearchTarget {
        target(
            &format!("u^{} + v^2", 2 * b),
            &["u", "v"],
            &[1, b],
            &format!("x^{b} + x*y^2"),
            &["x", "y"],
            &[2, b - 1],
            2 * b,
            Some(2),
        )
    }

    #[test]
    fn known_targets_give_product_two() {
        for b in [2, 3] {
            let r = search(&a_d(b), &Budget::default()).unwrap();
            let acc: Vec<_> = r.accepted().collect();
            assert!(!acc.is_empty(), "b = {b}: {:?}", r.stats);
            for c in acc {
                assert_eq!(c.dims.product, CycloNumber::from_int(2));
            }
        }
    }

    #[test]
    fn search_is_deterministic() {
        let budget = Budget { stop_at_first_certificate: false, max_nodes: 300, ..Budget::default() };
        let a = search(&a_d(3), &budget).unwrap();
        let b = search(&a_d(3), &budget).unwrap();
        assert_eq!(a.solutions, b.solutions);
        assert_eq!(a.unsolved, b.unsolved);
    }

    #[test]
    fn node_budget_is_reported() {
        let t = a_d(3);
        let p = DegreeProfile([[rat(2, 1), rat(3, 1)], [rat(3, 1), rat(4, 1)]]);
        let a = Ansatz::new(&t, &p).unwrap();
        let r = solve_ansatz(&a, &Budget { max_nodes: 3, ..Budget::default() });
        assert!(matches!(r, Err(SearchError::Budget { .. })));
    }

    #[test]
    fn canonical_profiles() {
        let p = DegreeProfile([[rat(4, 1), rat(3, 1)], [rat(3, 1), rat(2, 1)]]);
        assert_eq!(p.canonical(), DegreeProfile([[rat(2, 1), rat(3, 1)], [rat(3, 1), rat(4, 1)]]));
    }
}
