//! Jacobi rings of quasi-homogeneous isolated singularities and the residue
//! pairing on them.

use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::exactalg::{
    monomial_weight, weighted_degree, CycloNumber, ExactError, Homogeneity, Monomial, PolyMatrix, Polynomial, Ring,
    WeightSystem,
};
use crate::groebner::{buchberger, GbConfig, GroebnerBasis, GroebnerError, MonomialOrder, QuotientBasis};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JacobiError {
    #[error("singularity is not isolated (infinite-dimensional Jacobi ring)")]
    NotIsolated,
    #[error("potential is not quasi-homogeneous for the given weights")]
    Inhomogeneous,
    #[error("potential has a nonzero linear part")]
    Smooth,
    #[error("no positive weights make the potential quasi-homogeneous")]
    NoWeights,
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Groebner(#[from] GroebnerError),
}

#[derive(Clone, Debug)]
pub struct JacobiData {
    potential: Polynomial,
    weights: WeightSystem,
    partials: Vec<Polynomial>,
    gb: GroebnerBasis,
    basis: Vec<Monomial>,
    hessian: Polynomial,
    hessian_nf: Polynomial,
    socle: Monomial,
    socle_hessian_coeff: CycloNumber,
}

impl JacobiData {
    /// Builds the Jacobi data of `f`, which must be quasi-homogeneous for `w`.
    pub fn build(f: &Polynomial, w: &WeightSystem, cfg: &GbConfig) -> Result<JacobiData, JacobiError> {
        let ring = f.ring().clone();
        let ws = w.for_ring(&ring)?;
        match weighted_degree(f, w)? {
            Homogeneity::Inhomogeneous => return Err(JacobiError::Inhomogeneous),
            Homogeneity::Zero if ring.arity() > 0 => return Err(JacobiError::NotIsolated),
            _ => {}
        }
        if f.terms().any(|(m, _)| m.degree() == 1) {
            return Err(JacobiError::Smooth);
        }
        let n = ring.arity();
        let partials: Vec<Polynomial> = (0..n).map(|i| f.derivative(i)).collect();
        let gb = buchberger(&ring, &partials, MonomialOrder::GrevLex, cfg)?;
        let basis = match gb.quotient_basis() {
            QuotientBasis::Finite(b) => b,
            QuotientBasis::Infinite => return Err(JacobiError::NotIsolated),
        };
        let hess_rows: Vec<Vec<Polynomial>> =
            (0..n).map(|i| (0..n).map(|j| partials[i].derivative(j)).collect()).collect();
        let hessian = PolyMatrix::from_rows(&ring, hess_rows).det();
        let hessian_nf = gb.normal_form(&hessian);
        // The socle is the unique standard monomial of top weighted degree.
        let socle = basis
            .iter()
            .max_by(|a, b| monomial_weight(a.exps(), &ws).cmp(&monomial_weight(b.exps(), &ws)))
            .cloned()
            .expect("nonempty quotient basis");
        let socle_hessian_coeff = hessian_nf.coeff(&socle);
        assert!(!socle_hessian_coeff.is_zero(), "hessian vanishes on the socle");
        Ok(JacobiData {
            potential: f.clone(),
            weights: w.clone(),
            partials,
            gb,
            basis,
            hessian,
            hessian_nf,
            socle,
            socle_hessian_coeff,
        })
    }

    /// Like [`JacobiData::build`], inferring the weights from `f`.
    pub fn build_inferred(f: &Polynomial, cfg: &GbConfig) -> Result<JacobiData, JacobiError> {
        let w = WeightSystem::infer(f).ok_or(JacobiError::NoWeights)?;
        Self::build(f, &w, cfg)
    }

    pub fn ring(&self) -> &Arc<Ring> {
        self.potential.ring()
    }

    pub fn potential(&self) -> &Polynomial {
        &self.potential
    }

    pub fn weights(&self) -> &WeightSystem {
        &self.weights
    }

    pub fn partials(&self) -> &[Polynomial] {
        &self.partials
    }

    pub fn groebner(&self) -> &GroebnerBasis {
        &self.gb
    }

    pub fn basis(&self) -> &[Monomial] {
        &self.basis
    }

    pub fn milnor(&self) -> usize {
        self.basis.len()
    }

    pub fn hessian(&self) -> &Polynomial {
        &self.hessian
    }

    pub fn hessian_nf(&self) -> &Polynomial {
        &self.hessian_nf
    }

    pub fn socle_monomial(&self) -> &Monomial {
        &self.socle
    }

    /// Weighted degree of the socle, `Σ (1 − 2 q_i)` when the potential has degree 1.
    pub fn socle_degree(&self) -> BigRational {
        let ws = self.weights.for_ring(self.ring()).expect("weights checked at build");
        monomial_weight(self.socle.exps(), &ws)
    }

    pub fn normal_form(&self, h: &Polynomial) -> Polynomial {
        self.gb.normal_form(h)
    }

    /// Residue of `h`, normalized so that the Hessian determinant maps to μ.
    pub fn residue(&self, h: &Polynomial) -> CycloNumber {
        let c = self.gb.normal_form(h).coeff(&self.socle);
        c.mul(&CycloNumber::from_int(self.milnor() as i64))
            .div(&self.socle_hessian_coeff)
            .expect("nonzero socle coefficient")
    }
}

/// Milnor number of `f` with weights inferred from its terms.
pub fn milnor_number(f: &Polynomial, cfg: &GbConfig) -> Result<usize, JacobiError> {
    Ok(JacobiData::build_inferred(f, cfg)?.milnor())
}
