//! Quantum dimensions of graded matrix factorizations.
//!
//! With `Λ = ∂_{x_1}D ⋯ ∂_{x_m}D · ∂_{y_1}D ⋯ ∂_{y_n}D` for the full odd
//! differential `D` of a factorization of `V(y) − U(x)`:
//!
//! ```text
//! dim_l = (−1)^{e_l(m,n)} · Res_V( str Λ |_{x=0} )
//! dim_r = (−1)^{e_r(m,n)} · Res_U( str Λ |_{y=0} )
//! ```
//!
//! The exponents `e_l`, `e_r` are not hard-coded: [`calibrate`] picks them from
//! a fixed candidate list so that the diagonal has both dimensions equal to
//! one and `dim_l(X) = dim_r(X†)` holds on the calibration suite.

use std::fmt;
use std::sync::OnceLock;

use num_traits::Zero;
use thiserror::Error;

use crate::exactalg::{poly_parse, CycloNumber, PolyMatrix, Polynomial, Ring};
use crate::groebner::{buchberger, GbConfig, MonomialOrder};
use crate::jacobi::{JacobiData, JacobiError};
use crate::mfcore::{dagger_with, diagonal_delta, dual, external_tensor, fresh_name, koszul_uv, DaggerParity, MatrixFactorization};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QDimError {
    #[error("quantum dimensions need a graded factorization")]
    Ungraded,
    #[error("supertrace needs a square matrix with even rank at most its size")]
    Shape,
    #[error("{side} potential: {source}")]
    Jacobi { side: &'static str, source: JacobiError },
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalibrationError {
    #[error("ambiguous: {0}")]
    Ambiguous(String),
    #[error("no consistent convention")]
    NoConsistentConvention,
    #[error("calibration potential {0:?} failed: {1}")]
    Potential(String, String),
}

/// Trace of the even block minus trace of the odd block; the even block is
/// the first `even_rank` rows and columns.
pub fn supertrace(m: &PolyMatrix, even_rank: usize) -> Result<Polynomial, QDimError> {
    if m.rows() != m.cols() || even_rank > m.rows() {
        return Err(QDimError::Shape);
    }
    let mut s = Polynomial::zero(m.ring());
    for k in 0..m.rows() {
        if k < even_rank {
            s = &s + m.get(k, k);
        } else {
            s = &s - m.get(k, k);
        }
    }
    Ok(s)
}

/// `Λ`: product of the partial derivatives of the full differential, source
/// variables first, each side in ring order.
pub fn lambda(x: &MatrixFactorization) -> PolyMatrix {
    let d = x.full();
    let n = d.rows();
    (0..x.ring().arity()).fold(PolyMatrix::identity(x.ring(), n), |acc, i| acc.mul(&d.derivative(i)))
}

/// Candidate sign exponents, as functions of the source arity `m` and target
/// arity `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignExponent {
    /// `C(m+1, 2)`
    Source,
    /// `C(m+1, 2) + 1`
    SourceFlipped,
    /// `C(n+1, 2)`
    Target,
    /// `C(n+1, 2) + 1`
    TargetFlipped,
}

impl SignExponent {
    pub const ALL: [SignExponent; 4] =
        [SignExponent::Source, SignExponent::SourceFlipped, SignExponent::Target, SignExponent::TargetFlipped];

    pub fn exponent(self, m: usize, n: usize) -> usize {
        let b = |k: usize| k * (k + 1) / 2;
        match self {
            SignExponent::Source => b(m),
            SignExponent::SourceFlipped => b(m) + 1,
            SignExponent::Target => b(n),
            SignExponent::TargetFlipped => b(n) + 1,
        }
    }

    pub fn sign(self, m: usize, n: usize) -> CycloNumber {
        CycloNumber::from_int(if self.exponent(m, n).is_multiple_of(2) { 1 } else { -1 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SignConvention {
    pub left: SignExponent,
    pub right: SignExponent,
    pub dagger: DaggerParity,
}

impl fmt::Display for SignConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |e: SignExponent| match e {
            SignExponent::Source => "C(m+1,2)",
            SignExponent::SourceFlipped => "C(m+1,2)+1",
            SignExponent::Target => "C(n+1,2)",
            SignExponent::TargetFlipped => "C(n+1,2)+1",
        };
        write!(
            f,
            "dim_l sign (-1)^[{}], dim_r sign (-1)^[{}], dagger shift parity {:?}",
            name(self.left),
            name(self.right),
            self.dagger
        )
    }
}

impl SignConvention {
    /// Exchanges the roles of the source and target arities.
    pub fn mirrored(&self) -> SignConvention {
        let m = |e: SignExponent| match e {
            SignExponent::Source => SignExponent::Target,
            SignExponent::SourceFlipped => SignExponent::TargetFlipped,
            SignExponent::Target => SignExponent::Source,
            SignExponent::TargetFlipped => SignExponent::SourceFlipped,
        };
        SignConvention { left: m(self.left), right: m(self.right), dagger: self.dagger }
    }

    /// Candidates in preference order.
    pub fn candidates(dagger: DaggerParity) -> Vec<SignConvention> {
        let lefts = [SignExponent::Source, SignExponent::SourceFlipped, SignExponent::Target, SignExponent::TargetFlipped];
        let rights = [SignExponent::Target, SignExponent::TargetFlipped, SignExponent::Source, SignExponent::SourceFlipped];
        let mut out = Vec::with_capacity(16);
        for l in lefts {
            for r in rights {
                out.push(SignConvention { left: l, right: r, dagger });
            }
        }
        out
    }
}

/// Unsigned residues and arities of a factorization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawResidues {
    pub target_residue: CycloNumber,
    pub source_residue: CycloNumber,
    pub m: usize,
    pub n: usize,
}

impl RawResidues {
    pub fn left(&self, c: &SignConvention) -> CycloNumber {
        c.left.sign(self.m, self.n).mul(&self.target_residue)
    }

    pub fn right(&self, c: &SignConvention) -> CycloNumber {
        c.right.sign(self.m, self.n).mul(&self.source_residue)
    }
}

fn side_jacobi(x: &MatrixFactorization, source_side: bool) -> Result<JacobiData, QDimError> {
    let g = x.grading().ok_or(QDimError::Ungraded)?;
    let cfg = GbConfig::default();
    let (f, w, side) = if source_side {
        (x.u_source(), &g.weights_source, "source")
    } else {
        (x.v_target(), &g.weights_target, "target")
    };
    JacobiData::build(&f, w, &cfg).map_err(|source| QDimError::Jacobi { side, source })
}

pub fn raw_residues(x: &MatrixFactorization) -> Result<RawResidues, QDimError> {
    if x.grading().is_none() {
        return Err(QDimError::Ungraded);
    }
    let jt = side_jacobi(x, false)?;
    let js = side_jacobi(x, true)?;
    let st = supertrace(&lambda(x), x.ranks().0)?;
    Ok(RawResidues {
        target_residue: jt.residue(&st.restrict(x.target_ring())),
        source_residue: js.residue(&st.restrict(x.source_ring())),
        m: x.source_ring().arity(),
        n: x.target_ring().arity(),
    })
}

/// Left dimension from the target residue after reducing `str Λ` modulo the
/// source Jacobi ideal first; agrees with the plain evaluation for graded
/// input. Right dimension symmetrically.
pub fn raw_residues_reduced(x: &MatrixFactorization) -> Result<RawResidues, QDimError> {
    let jt = side_jacobi(x, false)?;
    let js = side_jacobi(x, true)?;
    let st = supertrace(&lambda(x), x.ranks().0)?;
    let cfg = GbConfig::default();
    let reduce_by = |j: &JacobiData| -> Result<Polynomial, QDimError> {
        let gens: Vec<Polynomial> = j.partials().iter().map(|p| p.embed(x.ring()).expect("side variables")).collect();
        let gb = buchberger(x.ring(), &gens, MonomialOrder::GrevLex, &cfg)
            .map_err(|e| QDimError::Jacobi { side: "joint", source: JacobiError::Groebner(e) })?;
        Ok(gb.normal_form(&st))
    };
    let st_x = reduce_by(&js)?;
    let st_y = reduce_by(&jt)?;
    Ok(RawResidues {
        target_residue: jt.residue(&st_x.restrict(x.target_ring())),
        source_residue: js.residue(&st_y.restrict(x.source_ring())),
        m: x.source_ring().arity(),
        n: x.target_ring().arity(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QDimResult {
    pub left: CycloNumber,
    pub right: CycloNumber,
    pub product: CycloNumber,
    pub invertible_left: bool,
    pub invertible_right: bool,
    pub rational_positive_product: bool,
}

impl QDimResult {
    pub fn new(left: CycloNumber, right: CycloNumber) -> Self {
        let product = left.mul(&right);
        QDimResult {
            invertible_left: !left.is_zero(),
            invertible_right: !right.is_zero(),
            rational_positive_product: product.is_positive_rational(),
            left,
            right,
            product,
        }
    }
}

pub fn qdims_with(x: &MatrixFactorization, c: &SignConvention) -> Result<QDimResult, QDimError> {
    let raw = raw_residues(x)?;
    Ok(QDimResult::new(raw.left(c), raw.right(c)))
}

pub fn qdims(x: &MatrixFactorization) -> Result<QDimResult, QDimError> {
    qdims_with(x, session_convention()?)
}

pub fn qdim_left(x: &MatrixFactorization) -> Result<CycloNumber, QDimError> {
    Ok(qdims(x)?.left)
}

pub fn qdim_right(x: &MatrixFactorization) -> Result<CycloNumber, QDimError> {
    Ok(qdims(x)?.right)
}

/// Calibration potentials used when none are given.
pub const DEFAULT_SUITE: [(&str, &[&str]); 4] =
    [("x^2", &["x"]), ("x^3", &["x"]), ("x^3 + y^3", &["x", "y"]), ("x^4 + y^2", &["x", "y"])];

pub fn default_suite() -> Vec<Polynomial> {
    DEFAULT_SUITE.iter().map(|(f, v)| poly_parse(f, &Ring::new(v), 1).expect("valid potential")).collect()
}

type Constraint = Box<dyn Fn(&SignConvention) -> bool + Send + Sync>;

fn build_constraints(suite: &[Polynomial], parity: DaggerParity) -> Result<Vec<Constraint>, CalibrationError> {
    let err = |f: &Polynomial, e: QDimError| CalibrationError::Potential(f.to_string(), e.to_string());
    let mut out: Vec<Constraint> = Vec::new();
    let one = CycloNumber::one();
    for w in suite {
        let delta = diagonal_delta(w);
        let r = raw_residues(&delta).map_err(|e| err(w, e))?;
        let one = one.clone();
        out.push(Box::new(move |c: &SignConvention| r.left(c) == one && r.right(c) == one));
        let taken = delta.ring().vars().to_vec();
        let degree = delta.grading().map(|g| g.degree.clone()).expect("graded diagonal");
        let k = koszul_uv(&fresh_name("u", &taken), &fresh_name("v", &taken), &degree);
        let knorrer = external_tensor(&delta, &k).expect("fresh names");
        for x in [dual(&delta), knorrer] {
            let rx = raw_residues(&x).map_err(|e| err(w, e))?;
            let rd = raw_residues(&dagger_with(&x, parity)).map_err(|e| err(w, e))?;
            out.push(Box::new(move |c: &SignConvention| rx.left(c) == rd.right(c)));
        }
    }
    Ok(out)
}

/// Picks the sign convention satisfying the unit law on every diagonal of
/// the suite and `dim_l(X) = dim_r(X†)` on their duals and quadratic
/// stabilizations. Dagger shift counts are tried in the order total, source,
/// target. A survivor and its left/right mirror (source and target exponents
/// exchanged) are accepted together and the first in preference order wins.
pub fn calibrate(suite: &[Polynomial]) -> Result<SignConvention, CalibrationError> {
    if suite.is_empty() {
        return Err(CalibrationError::Ambiguous("empty suite".into()));
    }
    let has_even = suite.iter().any(|f| f.ring().arity() % 2 == 0);
    let has_odd = suite.iter().any(|f| f.ring().arity() % 2 == 1);
    if !(has_even && has_odd) {
        let missing = if has_even { "odd" } else { "even" };
        return Err(CalibrationError::Ambiguous(format!("suite has no potential with an {missing} number of variables")));
    }
    for parity in [DaggerParity::Total, DaggerParity::Source, DaggerParity::Target] {
        let constraints = build_constraints(suite, parity)?;
        let survivors: Vec<SignConvention> = SignConvention::candidates(parity)
            .into_iter()
            .filter(|c| constraints.iter().all(|k| k(c)))
            .collect();
        let Some(first) = survivors.first() else { continue };
        if let Some(other) = survivors.iter().find(|c| **c != *first && **c != first.mirrored()) {
            return Err(CalibrationError::Ambiguous(format!("both [{first}] and [{other}] fit the suite")));
        }
        return Ok(*first);
    }
    Err(CalibrationError::NoConsistentConvention)
}

static SESSION: OnceLock<Result<SignConvention, CalibrationError>> = OnceLock::new();

/// The session convention, calibrated on the default suite on first use.
pub fn session_convention() -> Result<&'static SignConvention, CalibrationError> {
    SESSION.get_or_init(|| calibrate(&default_suite())).as_ref().map_err(Clone::clone)
}

#[derive(Clone, Debug)]
pub struct EquivalenceCertificate {
    pub mf: MatrixFactorization,
    pub dims: QDimResult,
    pub group_order_claim: Option<u64>,
    pub verdict: bool,
    pub product_matches_group_order: Option<bool>,
}

impl EquivalenceCertificate {
    pub fn product_in_positive_rationals(&self) -> bool {
        self.dims.rational_positive_product
    }

    /// Verdict, and the product law when a group order was claimed.
    pub fn accepted(&self) -> bool {
        self.verdict && self.product_matches_group_order.unwrap_or(true)
    }
}

pub fn certify_equivalence_with(
    x: &MatrixFactorization,
    claim: Option<u64>,
    c: &SignConvention,
) -> Result<EquivalenceCertificate, QDimError> {
    let dims = qdims_with(x, c)?;
    let verdict = dims.invertible_left && dims.invertible_right;
    let matches = claim.map(|k| dims.product == CycloNumber::from_int(k as i64));
    Ok(EquivalenceCertificate { mf: x.clone(), dims, group_order_claim: claim, verdict, product_matches_group_order: matches })
}

pub fn certify_equivalence(x: &MatrixFactorization, claim: Option<u64>) -> Result<EquivalenceCertificate, QDimError> {
    certify_equivalence_with(x, claim, session_convention()?)
}

/// Necessary condition for nonzero dimensions: equal central charges
/// `Σ (1 − 2 q_i)` with weights normalized to degree 1.
pub fn central_charges_match(x: &MatrixFactorization) -> Option<bool> {
    let g = x.grading()?;
    if g.degree.is_zero() {
        return None;
    }
    let c = |w: &crate::exactalg::WeightSystem| {
        w.iter().fold(num_rational::BigRational::zero(), |acc, (_, q)| {
            acc + num_rational::BigRational::from_integer(1.into()) - q * num_rational::BigRational::from_integer(2.into()) / &g.degree
        })
    };
    Some(c(&g.weights_source) == c(&g.weights_target))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::rat;
    use crate::mfcore::{knorrer_certificate, shift};

    fn p(f: &str, v: &[&str]) -> Polynomial {
        poly_parse(f, &Ring::new(v), 1).unwrap()
    }

    #[test]
    fn supertrace_examples() {
        let r = Ring::new(&["a", "b", "u", "v"]);
        assert!(supertrace(&PolyMatrix::identity(&r, 2), 1).unwrap().is_zero());
        let mut m = PolyMatrix::zero(&r, 2, 2);
        m.set(0, 0, Polynomial::var(&r, "a"));
        m.set(1, 1, Polynomial::var(&r, "b"));
        assert_eq!(supertrace(&m, 1).unwrap().to_string(), "a - b");
        let k = koszul_uv("u", "v", &num_rational::BigRational::from_integer(2.into()));
        let d = k.full();
        let lam = d.derivative(0).mul(&d.derivative(1));
        assert!(supertrace(&lam, 1).unwrap().is_one_poly());
        assert!(supertrace(&PolyMatrix::zero(&r, 2, 3), 1).is_err());
    }

    trait IsOne {
        fn is_one_poly(&self) -> bool;
    }
    impl IsOne for Polynomial {
        fn is_one_poly(&self) -> bool {
            self.as_constant().is_some_and(|c| c.is_one())
        }
    }

    #[test]
    fn diagonal_of_x2_by_hand() {
        // str Λ = −2 and Res_{y^2}(1) = 1/2, so the unsigned residue is −1.
        let d = diagonal_delta(&p("x^2", &["x"]));
        let r = raw_residues(&d).unwrap();
        assert_eq!(r.target_residue, CycloNumber::from_int(-1));
        assert_eq!(r.source_residue, CycloNumber::from_int(-1));
    }

    #[test]
    fn calibration_errors() {
        assert!(matches!(calibrate(&[]), Err(CalibrationError::Ambiguous(_))));
        assert!(matches!(calibrate(&[p("x^3 + y^3", &["x", "y"])]), Err(CalibrationError::Ambiguous(_))));
    }

    #[test]
    fn default_suite_convention() {
        let c = calibrate(&default_suite()).unwrap();
        assert_eq!(c.dagger, DaggerParity::Source);
        assert_eq!((c.left, c.right), (SignExponent::Source, SignExponent::Target));
        // The total shift count has no survivor at all.
        let constraints = build_constraints(&default_suite(), DaggerParity::Total).unwrap();
        assert!(SignConvention::candidates(DaggerParity::Total).iter().all(|c| !constraints.iter().all(|k| k(c))));
        let constraints = build_constraints(&default_suite(), c.dagger).unwrap();
        assert!(constraints.iter().all(|k| k(&c.mirrored())));
    }

    #[test]
    fn session_unit_law() {
        let c = session_convention().unwrap();
        for (f, v) in DEFAULT_SUITE {
            let d = qdims_with(&diagonal_delta(&p(f, v)), c).unwrap();
            assert!(d.left.is_one() && d.right.is_one(), "{f}");
        }
    }

    #[test]
    fn shift_negates() {
        let c = session_convention().unwrap();
        let d = diagonal_delta(&p("x^3 + x*y^2", &["x", "y"]));
        let a = qdims_with(&d, c).unwrap();
        let b = qdims_with(&shift(&d), c).unwrap();
        assert_eq!(a.left.neg(), b.left);
        assert_eq!(a.right.neg(), b.right);
    }

    #[test]
    fn knorrer_dims_invertible() {
        let c = session_convention().unwrap();
        for (f, v) in [("x^2", &["x"][..]), ("x^3", &["x"]), ("x^3 + y^3", &["x", "y"])] {
            let cert = certify_equivalence_with(&knorrer_certificate(&p(f, v)), None, c).unwrap();
            assert!(cert.verdict, "{f}");
            let prod = cert.dims.product.as_rational().cloned().unwrap();
            assert!(prod == rat(1, 1) || prod == rat(-1, 1), "{f}: {prod}");
        }
        let k = knorrer_certificate(&Polynomial::zero(&Ring::empty()));
        let cert = certify_equivalence_with(&k, None, c).unwrap();
        assert!(cert.verdict);
    }

    #[test]
    fn zero_factorization_rejected() {
        let r = Ring::empty();
        let z = MatrixFactorization::new(
            &[] as &[&str],
            &[],
            &Polynomial::zero(&r),
            &Polynomial::zero(&r),
            &PolyMatrix::zero(&r, 1, 1),
            &PolyMatrix::zero(&r, 1, 1),
            Some(crate::mfcore::Grading {
                weights_source: crate::exactalg::WeightSystem::empty(),
                weights_target: crate::exactalg::WeightSystem::empty(),
                degree: rat(1, 1),
                generator_degrees_even: vec![rat(0, 1)],
                generator_degrees_odd: vec![rat(1, 2)],
            }),
            1,
        )
        .unwrap();
        let cert = certify_equivalence_with(&z, None, session_convention().unwrap()).unwrap();
        assert!(!cert.verdict);
        assert!(cert.dims.left.is_zero() && cert.dims.right.is_zero());
    }

    #[test]
    fn ungraded_rejected() {
        let d = diagonal_delta(&p("x^2", &["x"])).with_grading(None).unwrap();
        assert_eq!(raw_residues(&d), Err(QDimError::Ungraded));
    }
}

