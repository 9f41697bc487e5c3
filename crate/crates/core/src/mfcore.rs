//! Matrix factorizations of `V(y) − U(x)` and the constructions on them.
//!
//! Block convention: the full odd differential is `[[0, d1], [d0, 0]]` on the
//! basis (even generators, odd generators), so `d1` is `r0 × r1` and `d0` is
//! `r1 × r0`. The factorization condition reads `d1·d0 = (V−U)·Id_{r0}` and
//! `d0·d1 = (V−U)·Id_{r1}`.
//!
//! With grading, entry `(i, j)` of the full differential must be
//! quasi-homogeneous of degree `g_i − g_j + D/2`, where `g` lists the even
//! generator degrees followed by the odd ones.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::equivariance::GroupAction;
use crate::exactalg::{
    lcm_order, weighted_degree, ExactError, Homogeneity, Monomial, PolyMatrix, Polynomial, Ring,
    WeightSystem,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MfError {
    #[error("block dimensions do not match: d1 is {d1:?}, d0 is {d0:?}")]
    Dimension { d1: (usize, usize), d0: (usize, usize) },
    #[error("variable {0:?} occurs in both the source and the target")]
    OverlappingVariables(String),
    #[error("sum mismatch: Σ a_i·b_i − (V − U) = {0}")]
    SumMismatch(String),
    #[error("grading lists {found} generator degrees, expected {expected}")]
    GradingRank { expected: usize, found: usize },
    #[error("representation of generator {generator} has the wrong size")]
    RepresentationRank { generator: usize },
    #[error("{0} is not defined on the factorization's variables")]
    Foreign(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grading {
    pub weights_source: WeightSystem,
    pub weights_target: WeightSystem,
    pub degree: BigRational,
    pub generator_degrees_even: Vec<BigRational>,
    pub generator_degrees_odd: Vec<BigRational>,
}

impl Grading {
    fn weights(&self) -> WeightSystem {
        self.weights_source.union(&self.weights_target)
    }

    /// Same grading with every weight and degree multiplied by `f`.
    pub fn scaled(&self, f: &BigRational) -> Grading {
        Grading {
            weights_source: self.weights_source.scaled(f),
            weights_target: self.weights_target.scaled(f),
            degree: &self.degree * f,
            generator_degrees_even: self.generator_degrees_even.iter().map(|g| g * f).collect(),
            generator_degrees_odd: self.generator_degrees_odd.iter().map(|g| g * f).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixFactorization {
    source: Arc<Ring>,
    target: Arc<Ring>,
    ring: Arc<Ring>,
    u: Polynomial,
    v: Polynomial,
    d0: PolyMatrix,
    d1: PolyMatrix,
    grading: Option<Grading>,
    order: u32,
}

fn embed_matrix(m: &PolyMatrix, ring: &Arc<Ring>) -> Result<PolyMatrix, ExactError> {
    m.try_map(ring, |p| p.embed(ring))
}

impl MatrixFactorization {
    /// Assembles a factorization; `u`, `v` and the blocks may live on any
    /// ring whose used variables are among the source and target variables.
    pub fn new<S: AsRef<str>>(
        source_vars: &[S],
        target_vars: &[S],
        u: &Polynomial,
        v: &Polynomial,
        d0: &PolyMatrix,
        d1: &PolyMatrix,
        grading: Option<Grading>,
        order: u32,
    ) -> Result<Self, MfError> {
        let source = Ring::new(source_vars);
        let target = Ring::new(target_vars);
        if let Some(x) = source.vars().iter().find(|x| target.index_of(x).is_some()) {
            return Err(MfError::OverlappingVariables(x.clone()));
        }
        let ring = Ring::join(&source, &target);
        if d1.rows() != d0.cols() || d1.cols() != d0.rows() {
            return Err(MfError::Dimension { d1: (d1.rows(), d1.cols()), d0: (d0.rows(), d0.cols()) });
        }
        let u = u.embed(&source).map_err(|_| MfError::Foreign("U".into()))?.embed(&ring)?;
        let v = v.embed(&target).map_err(|_| MfError::Foreign("V".into()))?.embed(&ring)?;
        let d0 = embed_matrix(d0, &ring).map_err(|_| MfError::Foreign("d0".into()))?;
        let d1 = embed_matrix(d1, &ring).map_err(|_| MfError::Foreign("d1".into()))?;
        if let Some(g) = &grading {
            if g.generator_degrees_even.len() != d1.rows() {
                return Err(MfError::GradingRank { expected: d1.rows(), found: g.generator_degrees_even.len() });
            }
            if g.generator_degrees_odd.len() != d1.cols() {
                return Err(MfError::GradingRank { expected: d1.cols(), found: g.generator_degrees_odd.len() });
            }
        }
        let mut k = order.max(1);
        for p in d0.entries().chain(d1.entries()).map(|(_, _, p)| p).chain([&u, &v]) {
            k = lcm_order(k, p.coefficient_order());
        }
        Ok(MatrixFactorization { source, target, ring, u, v, d0, d1, grading, order: k })
    }

    /// The unit for the external tensor product: ranks (1, 0), zero potentials.
    pub fn unit() -> Self {
        let r = Ring::empty();
        MatrixFactorization {
            source: r.clone(),
            target: r.clone(),
            ring: r.clone(),
            u: Polynomial::zero(&r),
            v: Polynomial::zero(&r),
            d0: PolyMatrix::zero(&r, 0, 1),
            d1: PolyMatrix::zero(&r, 1, 0),
            grading: Some(Grading {
                weights_source: WeightSystem::empty(),
                weights_target: WeightSystem::empty(),
                degree: BigRational::one(),
                generator_degrees_even: vec![BigRational::zero()],
                generator_degrees_odd: vec![],
            }),
            order: 1,
        }
    }

    pub fn source_ring(&self) -> &Arc<Ring> {
        &self.source
    }

    pub fn target_ring(&self) -> &Arc<Ring> {
        &self.target
    }

    /// Source variables followed by target variables.
    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn source_vars(&self) -> &[String] {
        self.source.vars()
    }

    pub fn target_vars(&self) -> &[String] {
        self.target.vars()
    }

    /// Source potential on the joint ring.
    pub fn u(&self) -> &Polynomial {
        &self.u
    }

    /// Target potential on the joint ring.
    pub fn v(&self) -> &Polynomial {
        &self.v
    }

    pub fn u_source(&self) -> Polynomial {
        self.u.restrict(&self.source)
    }

    pub fn v_target(&self) -> Polynomial {
        self.v.restrict(&self.target)
    }

    pub fn potential(&self) -> Polynomial {
        &self.v - &self.u
    }

    pub fn d0(&self) -> &PolyMatrix {
        &self.d0
    }

    pub fn d1(&self) -> &PolyMatrix {
        &self.d1
    }

    pub fn grading(&self) -> Option<&Grading> {
        self.grading.as_ref()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Ranks of the even and odd parts.
    pub fn ranks(&self) -> (usize, usize) {
        (self.d1.rows(), self.d1.cols())
    }

    /// Full odd differential `[[0, d1], [d0, 0]]`.
    pub fn full(&self) -> PolyMatrix {
        let (r0, r1) = self.ranks();
        PolyMatrix::block(
            &PolyMatrix::zero(&self.ring, r0, r0),
            &self.d1,
            &self.d0,
            &PolyMatrix::zero(&self.ring, r1, r1),
        )
    }

    /// Replaces the grading; no homogeneity check is done here.
    pub fn with_grading(mut self, grading: Option<Grading>) -> Result<Self, MfError> {
        if let Some(g) = &grading {
            let (r0, r1) = self.ranks();
            if g.generator_degrees_even.len() != r0 || g.generator_degrees_odd.len() != r1 {
                return Err(MfError::GradingRank {
                    expected: r0 + r1,
                    found: g.generator_degrees_even.len() + g.generator_degrees_odd.len(),
                });
            }
        }
        self.grading = grading;
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Check {
    /// `d1·d0 = (V−U)·Id`
    D1D0,
    /// `d0·d1 = (V−U)·Id`
    D0D1,
    /// entry of `d1` has the wrong weighted degree
    GradingD1,
    /// entry of `d0` has the wrong weighted degree
    GradingD0,
    /// `V − U` is not of degree D
    PotentialDegree,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub check: Check,
    pub row: usize,
    pub col: usize,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MfReport {
    pub violations: Vec<Violation>,
}

impl MfReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for MfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(f, "pass");
        }
        writeln!(f, "fail ({} violations)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {:?} ({}, {}): {}", v.check, v.row + 1, v.col + 1, v.detail)?;
        }
        Ok(())
    }
}

/// Checks both block identities exactly and, with grading, the weighted
/// degree of every entry. Indices in the report are 0-based.
pub fn mf_verify(x: &MatrixFactorization) -> MfReport {
    let mut out = Vec::new();
    let w = x.potential();
    for (check, prod) in [(Check::D1D0, x.d1.mul(&x.d0)), (Check::D0D1, x.d0.mul(&x.d1))] {
        for i in 0..prod.rows() {
            for j in 0..prod.cols() {
                let expected = if i == j { w.clone() } else { Polynomial::zero(&x.ring) };
                let diff = prod.get(i, j) - &expected;
                if !diff.is_zero() {
                    out.push(Violation { check, row: i, col: j, detail: format!("residual {diff}") });
                }
            }
        }
    }
    if let Some(g) = &x.grading {
        let ws = g.weights();
        match weighted_degree(&w, &ws) {
            Ok(Homogeneity::Degree(d)) if d != g.degree => out.push(Violation {
                check: Check::PotentialDegree,
                row: 0,
                col: 0,
                detail: format!("degree {d}, expected {}", g.degree),
            }),
            Ok(Homogeneity::Inhomogeneous) => out.push(Violation {
                check: Check::PotentialDegree,
                row: 0,
                col: 0,
                detail: "inhomogeneous".into(),
            }),
            Err(e) => out.push(Violation { check: Check::PotentialDegree, row: 0, col: 0, detail: e.to_string() }),
            _ => {}
        }
        let half = &g.degree / BigRational::from_integer(2.into());
        let blocks = [
            (Check::GradingD1, &x.d1, &g.generator_degrees_even, &g.generator_degrees_odd),
            (Check::GradingD0, &x.d0, &g.generator_degrees_odd, &g.generator_degrees_even),
        ];
        for (check, m, gi, gj) in blocks {
            for (i, j, p) in m.entries() {
                let expected = &gi[i] - &gj[j] + &half;
                let bad = match weighted_degree(p, &ws) {
                    Ok(Homogeneity::Zero) => None,
                    Ok(Homogeneity::Degree(d)) if d == expected => None,
                    Ok(Homogeneity::Degree(d)) => Some(format!("degree {d}, expected {expected}")),
                    Ok(Homogeneity::Inhomogeneous) => Some(format!("inhomogeneous, expected degree {expected}")),
                    Err(e) => Some(e.to_string()),
                };
                if let Some(detail) = bad {
                    out.push(Violation { check, row: i, col: j, detail });
                }
            }
        }
    }
    MfReport { violations: out }
}

/// Index bookkeeping for graded tensor products: positions of the
/// even- and odd-parity basis vectors of `X ⊗ Y` in Kronecker (row-major)
/// order, given the parity vectors of the factors.
fn tensor_parity_split(px: &[bool], py: &[bool]) -> (Vec<usize>, Vec<usize>) {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (i, a) in px.iter().enumerate() {
        for (j, b) in py.iter().enumerate() {
            let k = i * py.len() + j;
            if a ^ b {
                odd.push(k);
            } else {
                even.push(k);
            }
        }
    }
    (even, odd)
}

fn parities(r0: usize, r1: usize) -> Vec<bool> {
    let mut p = vec![false; r0];
    p.extend(std::iter::repeat_n(true, r1));
    p
}

fn parity_involution(ring: &Arc<Ring>, r0: usize, r1: usize) -> PolyMatrix {
    let mut s = PolyMatrix::identity(ring, r0 + r1);
    for k in r0..r0 + r1 {
        s.set(k, k, Polynomial::from_int(ring, -1));
    }
    s
}

/// Graded tensor of two full odd differentials on a common ring:
/// `D_X ⊗ 1 + σ_X ⊗ D_Y`, then split by parity. Returns `(d0, d1, even, odd)`.
fn tensor_blocks(
    dx: &PolyMatrix,
    (rx0, rx1): (usize, usize),
    dy: &PolyMatrix,
    (ry0, ry1): (usize, usize),
) -> (PolyMatrix, PolyMatrix, Vec<usize>, Vec<usize>) {
    let ring = dx.ring().clone();
    let ix = PolyMatrix::identity(&ring, ry0 + ry1);
    let sx = parity_involution(&ring, rx0, rx1);
    let d = dx.kron(&ix).add(&sx.kron(dy));
    let (even, odd) = tensor_parity_split(&parities(rx0, rx1), &parities(ry0, ry1));
    (d.select(&odd, &even), d.select(&even, &odd), even, odd)
}

/// Combines generator degrees along the parity split of [`tensor_blocks`].
fn tensor_degrees(
    gx: (&[BigRational], &[BigRational]),
    gy: (&[BigRational], &[BigRational]),
    even: &[usize],
    odd: &[usize],
) -> (Vec<BigRational>, Vec<BigRational>) {
    let ax: Vec<&BigRational> = gx.0.iter().chain(gx.1).collect();
    let ay: Vec<&BigRational> = gy.0.iter().chain(gy.1).collect();
    let ny = ay.len();
    let at = |k: usize| ax[k / ny] + ay[k % ny];
    (even.iter().map(|&k| at(k)).collect(), odd.iter().map(|&k| at(k)).collect())
}

/// Even map `diag(A0, A1)` of `X ⊗ Y` from even maps of the factors.
pub fn tensor_even_maps(
    ax: (&PolyMatrix, &PolyMatrix),
    ay: (&PolyMatrix, &PolyMatrix),
) -> (PolyMatrix, PolyMatrix) {
    let ring = ax.0.ring().clone();
    let full = |a0: &PolyMatrix, a1: &PolyMatrix| {
        PolyMatrix::block(
            a0,
            &PolyMatrix::zero(&ring, a0.rows(), a1.cols()),
            &PolyMatrix::zero(&ring, a1.rows(), a0.cols()),
            a1,
        )
    };
    let fx = full(ax.0, ax.1);
    let fy = full(ay.0, ay.1);
    let (even, odd) = tensor_parity_split(&parities(ax.0.rows(), ax.1.rows()), &parities(ay.0.rows(), ay.1.rows()));
    let f = fx.kron(&fy);
    (f.select(&even, &even), f.select(&odd, &odd))
}

/// Koszul factorization of `V − U` from pairs with `Σ a_i·b_i = V − U`,
/// as the graded tensor product of the rank-one factorizations
/// `[[0, a_i], [b_i, 0]]`. With `weights`, a grading is attached: the rank-one
/// factor of `(a, b)` has generator degrees `0` (even) and `D/2 − deg a` (odd).
pub fn koszul<S: AsRef<str>>(
    source_vars: &[S],
    target_vars: &[S],
    pairs: &[(Polynomial, Polynomial)],
    u: &Polynomial,
    v: &Polynomial,
    weights: Option<(&WeightSystem, &WeightSystem, &BigRational)>,
) -> Result<MatrixFactorization, MfError> {
    let source = Ring::new(source_vars);
    let target = Ring::new(target_vars);
    if let Some(x) = source.vars().iter().find(|x| target.index_of(x).is_some()) {
        return Err(MfError::OverlappingVariables(x.clone()));
    }
    let ring = Ring::join(&source, &target);
    let pairs: Vec<(Polynomial, Polynomial)> = pairs
        .iter()
        .map(|(a, b)| Ok((a.embed(&ring)?, b.embed(&ring)?)))
        .collect::<Result<_, ExactError>>()
        .map_err(|_| MfError::Foreign("Koszul pair".into()))?;
    let uj = u.embed(&ring).map_err(|_| MfError::Foreign("U".into()))?;
    let vj = v.embed(&ring).map_err(|_| MfError::Foreign("V".into()))?;
    let sum = pairs.iter().fold(Polynomial::zero(&ring), |acc, (a, b)| &acc + &(a * b));
    let diff = &sum - &(&vj - &uj);
    if !diff.is_zero() {
        return Err(MfError::SumMismatch(diff.to_string()));
    }
    let ws = weights.map(|(s, t, _)| s.union(t));
    let half = weights.map(|(_, _, d)| d / BigRational::from_integer(2.into()));
    // Start from the unit (1, 0) and tensor on each rank-one factor.
    let mut d = PolyMatrix::zero(&ring, 1, 1);
    let mut ranks = (1usize, 0usize);
    let mut degs: (Vec<BigRational>, Vec<BigRational>) = (vec![BigRational::zero()], vec![]);
    for (a, b) in &pairs {
        let f = PolyMatrix::from_rows(
            &ring,
            vec![vec![Polynomial::zero(&ring), a.clone()], vec![b.clone(), Polynomial::zero(&ring)]],
        );
        let (d0, d1, even, odd) = tensor_blocks(&d, ranks, &f, (1, 1));
        if let (Some(ws), Some(half)) = (&ws, &half) {
            let deg_a = match (weighted_degree(a, ws)?, weighted_degree(b, ws)?) {
                (Homogeneity::Degree(da), _) => da,
                (_, Homogeneity::Degree(db)) => half * BigRational::from_integer(2.into()) - db,
                _ => BigRational::zero(),
            };
            let gf = [BigRational::zero(), half - deg_a];
            degs = tensor_degrees((&degs.0, &degs.1), (&gf[..1], &gf[1..]), &even, &odd);
        }
        ranks = (even.len(), odd.len());
        d = PolyMatrix::block(
            &PolyMatrix::zero(&ring, ranks.0, ranks.0),
            &d1,
            &d0,
            &PolyMatrix::zero(&ring, ranks.1, ranks.1),
        );
    }
    let d1 = d.select(&(0..ranks.0).collect::<Vec<_>>(), &(ranks.0..ranks.0 + ranks.1).collect::<Vec<_>>());
    let d0 = d.select(&(ranks.0..ranks.0 + ranks.1).collect::<Vec<_>>(), &(0..ranks.0).collect::<Vec<_>>());
    let grading = weights.map(|(s, t, deg)| Grading {
        weights_source: s.clone(),
        weights_target: t.clone(),
        degree: deg.clone(),
        generator_degrees_even: degs.0.clone(),
        generator_degrees_odd: degs.1.clone(),
    });
    MatrixFactorization::new(source.vars(), target.vars(), &uj, &vj, &d0, &d1, grading, 1)
}

/// Name of the target copy of a source variable in the diagonal.
pub fn target_name(x: &str) -> String {
    format!("{x}_t")
}

/// `N / (y − x)` for a polynomial `N` divisible by `y − x`, where `y` is the
/// variable at index `yi` and `x` does not involve it.
fn divide_by_difference(n: &Polynomial, yi: usize, x: &Polynomial) -> Option<Polynomial> {
    let ring = n.ring().clone();
    let mut by_power: BTreeMap<u32, Polynomial> = BTreeMap::new();
    for (m, c) in n.terms() {
        let mut e = m.0.clone();
        let k = std::mem::replace(&mut e[yi], 0);
        by_power.entry(k).or_insert_with(|| Polynomial::zero(&ring)).add_term(Monomial(e), c.clone());
    }
    let top = match by_power.keys().next_back() {
        Some(&t) => t,
        None => return Some(Polynomial::zero(&ring)),
    };
    // Synthetic division: q_{k−1} = c_k + x·q_k from the top down.
    let y = Polynomial::var_at(&ring, yi);
    let mut q = Polynomial::zero(&ring);
    let mut carry = Polynomial::zero(&ring);
    for k in (1..=top).rev() {
        let c = by_power.get(&k).cloned().unwrap_or_else(|| Polynomial::zero(&ring));
        carry = &c + &(x * &carry);
        q = &q + &(&carry * &y.pow(k - 1));
    }
    let c0 = by_power.get(&0).cloned().unwrap_or_else(|| Polynomial::zero(&ring));
    let rem = &c0 + &(x * &carry);
    rem.is_zero().then_some(q)
}

/// Koszul pairs `(y_i − x_i, ∂^{[i]}W)` of the diagonal of `w`, on the joint
/// ring of `w`'s variables and their target copies.
pub fn delta_pairs(w: &Polynomial) -> (Arc<Ring>, Arc<Ring>, Vec<(Polynomial, Polynomial)>) {
    let source = w.ring().clone();
    let tvars: Vec<String> = source.vars().iter().map(|x| target_name(x)).collect();
    let target = Ring::new(&tvars);
    let ring = Ring::join(&source, &target);
    let n = source.arity();
    let xs: Vec<Polynomial> = (0..n).map(|i| Polynomial::var_at(&ring, i)).collect();
    let ys: Vec<Polynomial> = (0..n).map(|i| Polynomial::var_at(&ring, n + i)).collect();
    // W evaluated at (y_1..y_k, x_{k+1}..x_n).
    let partial = |k: usize| {
        let images: BTreeMap<String, Polynomial> = source
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), if i < k { ys[i].clone() } else { xs[i].clone() }))
            .collect();
        w.substitute(&images, &ring).expect("every variable has an image")
    };
    let mut prev = partial(0);
    let mut pairs = Vec::with_capacity(n);
    for i in 0..n {
        let next = partial(i + 1);
        let q = divide_by_difference(&(&next - &prev), n + i, &xs[i]).expect("difference quotient is exact");
        pairs.push((&ys[i] - &xs[i], q));
        prev = next;
    }
    (source, target, pairs)
}

/// The diagonal factorization of `W(y) − W(x)`. Graded when `w` is
/// quasi-homogeneous, using the integer weight form.
pub fn diagonal_delta(w: &Polynomial) -> MatrixFactorization {
    let (source, target, pairs) = delta_pairs(w);
    let ring = Ring::join(&source, &target);
    let wx = w.embed(&ring).expect("source variables");
    let images: BTreeMap<String, Polynomial> = source
        .vars()
        .iter()
        .map(|x| (x.clone(), Polynomial::var(&ring, &target_name(x))))
        .collect();
    let wy = w.substitute(&images, &ring).expect("all images given");
    let weights = WeightSystem::infer(w).filter(|_| !w.is_zero() || source.arity() == 0).map(|q| {
        let (ints, degree) = q.integer_form(&BigRational::one());
        let ws = WeightSystem::new(ints.into_iter().map(|(k, v)| (k, BigRational::from_integer(v))).collect())
            .expect("positive weights");
        let wt = ws.renamed(target_name);
        (ws, wt, degree)
    });
    let gw = weights.as_ref().map(|(s, t, d)| (s, t, d));
    koszul(source.vars(), target.vars(), &pairs, &wx, &wy, gw).expect("telescoping sum is exact")
}

/// Swaps the even and odd parts.
pub fn shift(x: &MatrixFactorization) -> MatrixFactorization {
    let mut y = x.clone();
    std::mem::swap(&mut y.d0, &mut y.d1);
    if let Some(g) = &mut y.grading {
        std::mem::swap(&mut g.generator_degrees_even, &mut g.generator_degrees_odd);
    }
    y
}

/// Dual factorization of `U − V` with source and target exchanged:
/// `d1' = −d0ᵀ`, `d0' = d1ᵀ`, generator degrees negated.
pub fn dual(x: &MatrixFactorization) -> MatrixFactorization {
    let ring = Ring::join(&x.target, &x.source);
    let e = |m: &PolyMatrix| embed_matrix(m, &ring).expect("same variables");
    let d1 = e(&x.d0.transpose().neg());
    let d0 = e(&x.d1.transpose());
    let grading = x.grading.as_ref().map(|g| Grading {
        weights_source: g.weights_target.clone(),
        weights_target: g.weights_source.clone(),
        degree: g.degree.clone(),
        generator_degrees_even: g.generator_degrees_even.iter().map(|d| -d).collect(),
        generator_degrees_odd: g.generator_degrees_odd.iter().map(|d| -d).collect(),
    });
    MatrixFactorization {
        source: x.target.clone(),
        target: x.source.clone(),
        u: x.v.embed(&ring).expect("same variables"),
        v: x.u.embed(&ring).expect("same variables"),
        ring,
        d0,
        d1,
        grading,
        order: x.order,
    }
}

/// Which variable count decides whether the dagger includes a shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DaggerParity {
    Total,
    Source,
    Target,
}

impl DaggerParity {
    pub fn count(self, m: usize, n: usize) -> usize {
        match self {
            DaggerParity::Total => m + n,
            DaggerParity::Source => m,
            DaggerParity::Target => n,
        }
    }
}

/// Dual, shifted when the chosen variable count is odd.
pub fn dagger_with(x: &MatrixFactorization, parity: DaggerParity) -> MatrixFactorization {
    let d = dual(x);
    if parity.count(x.source.arity(), x.target.arity()) % 2 == 1 {
        shift(&d)
    } else {
        d
    }
}

/// Dual shifted by the variable-count parity of the calibrated sign
/// convention, or the total count if calibration fails.
pub fn dagger(x: &MatrixFactorization) -> MatrixFactorization {
    let parity = crate::qdim::session_convention().map_or(DaggerParity::Total, |c| c.dagger);
    dagger_with(x, parity)
}

/// External tensor product, a factorization of `(V + V') − (U + U')` with
/// source `x ++ x'` and target `y ++ y'`.
pub fn external_tensor(x: &MatrixFactorization, y: &MatrixFactorization) -> Result<MatrixFactorization, MfError> {
    let all_x = x.ring.vars();
    if let Some(v) = y.ring.vars().iter().find(|v| all_x.contains(v)) {
        return Err(MfError::OverlappingVariables(v.clone()));
    }
    let source = Ring::join(&x.source, &y.source);
    let target = Ring::join(&x.target, &y.target);
    let ring = Ring::join(&source, &target);
    let e = |m: &PolyMatrix| embed_matrix(m, &ring).expect("disjoint union contains both");
    let (d0, d1, even, odd) = tensor_blocks(&e(&x.full()), x.ranks(), &e(&y.full()), y.ranks());
    let grading = match (&x.grading, &y.grading) {
        (Some(gx), Some(gy)) => {
            let gy = if gy.degree == gx.degree || gy.degree.is_zero() {
                gy.clone()
            } else {
                gy.scaled(&(&gx.degree / &gy.degree))
            };
            let (ge, go) = tensor_degrees(
                (&gx.generator_degrees_even, &gx.generator_degrees_odd),
                (&gy.generator_degrees_even, &gy.generator_degrees_odd),
                &even,
                &odd,
            );
            Some(Grading {
                weights_source: gx.weights_source.union(&gy.weights_source),
                weights_target: gx.weights_target.union(&gy.weights_target),
                degree: gx.degree.clone(),
                generator_degrees_even: ge,
                generator_degrees_odd: go,
            })
        }
        _ => None,
    };
    let u = &x.u.embed(&ring)? + &y.u.embed(&ring)?;
    let v = &x.v.embed(&ring)? + &y.v.embed(&ring)?;
    MatrixFactorization::new(source.vars(), target.vars(), &u, &v, &d0, &d1, grading, lcm_order(x.order, y.order))
}

/// First of `base`, `base1`, `base2`, ... not in `taken`.
pub fn fresh_name(base: &str, taken: &[String]) -> String {
    if !taken.iter().any(|t| t == base) {
        return base.to_string();
    }
    (1..).map(|k| format!("{base}{k}")).find(|c| !taken.contains(c)).unwrap()
}

/// Koszul factorization of `uv` with target `(u, v)`, graded with both
/// weights equal to `D/2`.
pub fn koszul_uv(u: &str, v: &str, degree: &BigRational) -> MatrixFactorization {
    let ring = Ring::new(&[u, v]);
    let pu = Polynomial::var(&ring, u);
    let pv = Polynomial::var(&ring, v);
    let half = degree / BigRational::from_integer(2.into());
    let wt = WeightSystem::new([(u.to_string(), half.clone()), (v.to_string(), half)].into()).expect("positive");
    let none: [&str; 0] = [];
    koszul(&none, &[u, v], &[(pu.clone(), pv.clone())], &Polynomial::zero(&ring), &(&pu * &pv), Some((&WeightSystem::empty(), &wt, degree)))
        .expect("uv = u·v")
}

/// `Δ_W ⊠ koszul{(u, v)}`, a factorization of `(W(y) + uv) − W(x)`.
pub fn knorrer_certificate(w: &Polynomial) -> MatrixFactorization {
    let delta = diagonal_delta(w);
    let taken = delta.ring.vars().to_vec();
    let u = fresh_name("u", &taken);
    let v = fresh_name("v", &taken);
    let degree = delta.grading.as_ref().map(|g| g.degree.clone()).unwrap_or_else(BigRational::one);
    external_tensor(&delta, &koszul_uv(&u, &v, &degree)).expect("fresh names are disjoint")
}

/// Per group generator, even invertible blocks `(A0, A1)` intertwining the
/// differential with its translate.
#[derive(Clone, Debug)]
pub struct EquivariantStructure {
    pub action: GroupAction,
    pub reps: Vec<(PolyMatrix, PolyMatrix)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EquivariantViolation {
    /// `A0·d1^g ≠ d1·A1` or `A1·d0^g ≠ d0·A0`, with the block name.
    Intertwining { generator: usize, block: &'static str, row: usize, col: usize },
    /// The product of translates over the generator's order is not the identity.
    Order { generator: usize },
    /// `A_g·(A_h)^g ≠ A_h·(A_g)^h`.
    Commutation { g: usize, h: usize },
    /// The potential is not invariant under the generator.
    Potential { generator: usize },
}

/// Checks intertwining, the order relation and commutation of the
/// representation matrices.
pub fn equivariant_verify(
    x: &MatrixFactorization,
    e: &EquivariantStructure,
) -> Result<Vec<EquivariantViolation>, MfError> {
    let (r0, r1) = x.ranks();
    let ngen = e.action.generator_count();
    if e.reps.len() != ngen {
        return Err(MfError::RepresentationRank { generator: e.reps.len().min(ngen) });
    }
    let ring = &x.ring;
    let mut reps = Vec::with_capacity(ngen);
    for (k, (a0, a1)) in e.reps.iter().enumerate() {
        if (a0.rows(), a0.cols(), a1.rows(), a1.cols()) != (r0, r0, r1, r1) {
            return Err(MfError::RepresentationRank { generator: k });
        }
        let a0 = embed_matrix(a0, ring).map_err(|_| MfError::Foreign("representation".into()))?;
        let a1 = embed_matrix(a1, ring).map_err(|_| MfError::Foreign("representation".into()))?;
        reps.push((a0, a1));
    }
    let act = |g: usize, m: &PolyMatrix| -> Result<PolyMatrix, MfError> {
        m.try_map(ring, |p| e.action.apply(g, p)).map_err(MfError::from)
    };
    let mut out = Vec::new();
    for (g, (a0, a1)) in reps.iter().enumerate() {
        let pot = x.potential();
        if e.action.apply(g, &pot)? != pot {
            out.push(EquivariantViolation::Potential { generator: g });
        }
        let lhs1 = a0.mul(&act(g, &x.d1)?);
        let rhs1 = x.d1.mul(a1);
        let lhs0 = a1.mul(&act(g, &x.d0)?);
        let rhs0 = x.d0.mul(a0);
        for (block, l, r) in [("d1", &lhs1, &rhs1), ("d0", &lhs0, &rhs0)] {
            for (i, j, p) in l.entries() {
                if p != r.get(i, j) {
                    out.push(EquivariantViolation::Intertwining { generator: g, block, row: i, col: j });
                }
            }
        }
        // A_{g^n} = A_g · (A_g)^g · ... · (A_g)^{g^{n−1}} must be the identity.
        let n = e.action.orders()[g];
        let (mut p0, mut p1) = (PolyMatrix::identity(ring, r0), PolyMatrix::identity(ring, r1));
        let (mut t0, mut t1) = (a0.clone(), a1.clone());
        for _ in 0..n {
            p0 = p0.mul(&t0);
            p1 = p1.mul(&t1);
            t0 = act(g, &t0)?;
            t1 = act(g, &t1)?;
        }
        if p0 != PolyMatrix::identity(ring, r0) || p1 != PolyMatrix::identity(ring, r1) {
            out.push(EquivariantViolation::Order { generator: g });
        }
    }
    for g in 0..ngen {
        for h in g + 1..ngen {
            let (ag0, ag1) = &reps[g];
            let (ah0, ah1) = &reps[h];
            let l0 = ag0.mul(&act(g, ah0)?);
            let r0m = ah0.mul(&act(h, ag0)?);
            let l1 = ag1.mul(&act(g, ah1)?);
            let r1m = ah1.mul(&act(h, ag1)?);
            if l0 != r0m || l1 != r1m {
                out.push(EquivariantViolation::Commutation { g, h });
            }
        }
    }
    Ok(out)
}

/// Representation of a Koszul factorization induced by an action that
/// scales every `a_i` by a constant `ε_i`: the rank-one factor of `(a, b)`
/// gets `diag(1, ε)`. Returns `None` if some `a_i` is not an eigenvector.
pub fn koszul_equivariant_rep(
    ring: &Arc<Ring>,
    pairs: &[(Polynomial, Polynomial)],
    action: &GroupAction,
    g: usize,
) -> Option<(PolyMatrix, PolyMatrix)> {
    let mut acc = (PolyMatrix::identity(ring, 1), PolyMatrix::zero(ring, 0, 0));
    for (a, _) in pairs {
        let a = a.embed(ring).ok()?;
        let ag = action.apply(g, &a).ok()?;
        let (m, c) = a.terms().next()?;
        let eps = ag.coeff(m).div(c)?;
        if ag != a.scale(&eps) {
            return None;
        }
        let f0 = PolyMatrix::identity(ring, 1);
        let f1 = PolyMatrix::scalar(ring, 1, &Polynomial::constant(ring, eps));
        acc = tensor_even_maps((&acc.0, &acc.1), (&f0, &f1));
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::poly_parse;

    fn p(r: &Arc<Ring>, s: &str) -> Polynomial {
        poly_parse(s, r, 1).unwrap()
    }

    #[test]
    fn rank_one_checks() {
        let r = Ring::new(&["x", "y"]);
        let m = |s: &str| PolyMatrix::from_rows(&r, vec![vec![p(&r, s)]]);
        let good = MatrixFactorization::new(&["x"], &["y"], &p(&r, "x^2"), &p(&r, "y^2"), &m("y - x"), &m("y + x"), None, 1)
            .unwrap();
        assert!(mf_verify(&good).passed());
        let bad = MatrixFactorization::new(&["x"], &["y"], &p(&r, "x^2"), &p(&r, "y^2"), &m("y"), &m("x"), None, 1)
            .unwrap();
        let rep = mf_verify(&bad);
        assert!(!rep.passed());
        assert_eq!((rep.violations[0].row, rep.violations[0].col), (0, 0));
    }

    #[test]
    fn dimension_mismatch() {
        let r = Ring::new(&["x"]);
        let e = MatrixFactorization::new(
            &["x"],
            &[] as &[&str],
            &Polynomial::zero(&r),
            &Polynomial::zero(&r),
            &PolyMatrix::zero(&r, 2, 1),
            &PolyMatrix::zero(&r, 2, 2),
            None,
            1,
        );
        assert!(matches!(e, Err(MfError::Dimension { .. })));
    }

    #[test]
    fn koszul_uv_blocks() {
        let k = koszul_uv("u", "v", &BigRational::from_integer(2.into()));
        assert_eq!(k.d1().get(0, 0).to_string(), "u");
        assert_eq!(k.d0().get(0, 0).to_string(), "v");
        assert!(mf_verify(&k).passed());
    }

    #[test]
    fn koszul_sum_mismatch() {
        let r = Ring::new(&["x", "y"]);
        let e = koszul(&["x"], &["y"], &[(p(&r, "x"), p(&r, "x"))], &Polynomial::zero(&r), &p(&r, "y^2"), None);
        assert!(matches!(e, Err(MfError::SumMismatch(_))));
    }

    #[test]
    fn koszul_rank_two() {
        let r = Ring::new(&["x", "y"]);
        let none: [&str; 0] = [];
        let k = koszul(&none, &["x", "y"], &[(p(&r, "x"), p(&r, "x")), (p(&r, "y"), p(&r, "y"))], &Polynomial::zero(&r), &p(&r, "x^2 + y^2"), None)
            .unwrap();
        assert_eq!(k.ranks(), (2, 2));
        assert!(mf_verify(&k).passed());
    }

    #[test]
    fn diagonal_pairs() {
        let r = Ring::new(&["x"]);
        let (_, _, pairs) = delta_pairs(&p(&r, "x^3"));
        let j = Ring::new(&["x", "x_t"]);
        assert_eq!(pairs[0].0, p(&j, "x_t - x"));
        assert_eq!(pairs[0].1, p(&j, "x_t^2 + x*x_t + x^2"));
        let r = Ring::new(&["x", "y"]);
        let w = p(&r, "x^3 + x*y^2");
        let d = diagonal_delta(&w);
        assert_eq!(d.ranks(), (2, 2));
        assert!(mf_verify(&d).passed(), "{}", mf_verify(&d));
    }

    #[test]
    fn shift_dual_dagger() {
        let r = Ring::new(&["x", "y"]);
        let d = diagonal_delta(&p(&r, "x^3 + y^3"));
        assert_eq!(shift(&shift(&d)), d);
        assert!(mf_verify(&shift(&d)).passed());
        let du = dual(&d);
        assert!(mf_verify(&du).passed(), "{}", mf_verify(&du));
        let dd = dual(&du);
        assert_eq!(dd.d0(), &d.d0().neg());
        assert_eq!(dd.d1(), &d.d1().neg());
        assert_eq!(dagger_with(&d, DaggerParity::Total), du);
        assert_eq!(dagger(&d), du);
        let k = knorrer_certificate(&p(&Ring::new(&["x"]), "x^2"));
        assert_eq!(dagger_with(&k, DaggerParity::Total), dual(&k));
        assert_eq!(dagger_with(&k, DaggerParity::Source), shift(&dual(&k)));
        let r = Ring::new(&["x"]);
        let none: [&str; 0] = [];
        let odd = koszul(&none, &["x"], &[(p(&r, "x"), p(&r, "x"))], &Polynomial::zero(&r), &p(&r, "x^2"), None).unwrap();
        assert_eq!(dagger_with(&odd, DaggerParity::Total), shift(&dual(&odd)));
        assert_eq!(dagger_with(&odd, DaggerParity::Source), dual(&odd));
        assert_eq!(dagger(&odd), dual(&odd));
    }

    #[test]
    fn tensor_unit_and_grading() {
        let r = Ring::new(&["x"]);
        let d = diagonal_delta(&p(&r, "x^2"));
        let t = external_tensor(&d, &MatrixFactorization::unit()).unwrap();
        assert_eq!(t.d0(), d.d0());
        assert_eq!(t.d1(), d.d1());
        let z = diagonal_delta(&p(&Ring::new(&["z"]), "z^3"));
        let dz = external_tensor(&d, &z).unwrap();
        assert!(mf_verify(&dz).passed(), "{}", mf_verify(&dz));
        assert!(external_tensor(&d, &d).is_err());
    }

    #[test]
    fn knorrer_verifies() {
        for (w, v) in [("x^2", &["x"][..]), ("x^3", &["x"]), ("x^3 + y^3", &["x", "y"])] {
            let k = knorrer_certificate(&p(&Ring::new(v), w));
            assert!(mf_verify(&k).passed(), "{w}: {}", mf_verify(&k));
        }
        let k = knorrer_certificate(&Polynomial::zero(&Ring::empty()));
        assert_eq!(k.ranks(), (1, 1));
        assert!(mf_verify(&k).passed());
    }

    #[test]
    fn synthetic_division() {
        let r = Ring::new(&["x", "y"]);
        let n = p(&r, "y^4 - x^4");
        let q = divide_by_difference(&n, 1, &p(&r, "x")).unwrap();
        assert_eq!(&q * &p(&r, "y - x"), n);
        assert!(divide_by_difference(&p(&r, "y^2 + x^2"), 1, &p(&r, "x")).is_none());
    }
}
