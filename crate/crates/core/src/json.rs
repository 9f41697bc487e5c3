//! JSON documents for factorizations, certificates, group actions, descent
//! witnesses and search requests.
//!
//! Polynomials, cyclotomic numbers and rationals travel as strings in the
//! polynomial grammar; readers re-parse them against the declared variables
//! and cyclotomic order. Every writer's output is accepted by its reader.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariance::{ActionError, DescentWitness, GroupAction};
use crate::exactalg::{
    parse_rational, poly_parse, rational_string, CycloNumber, ExactError, PolyMatrix, Polynomial, Ring, WeightSystem,
};
use crate::mfcore::{Grading, MatrixFactorization, MfError};
use crate::qdim::{certify_equivalence, EquivalenceCertificate, QDimError};
use crate::search::{Budget, SearchResult, SearchStats, SearchTarget};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Mf(#[from] MfError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    QDim(#[from] QDimError),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, JsonError> {
    Err(JsonError::Schema(msg.into()))
}

/// A rational given either as a JSON integer or as a `"p/q"` string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalJson {
    Int(i64),
    Text(String),
}

impl RationalJson {
    fn from_rational(r: &BigRational) -> Self {
        RationalJson::Text(rational_string(r))
    }

    fn value(&self) -> Result<BigRational, JsonError> {
        match self {
            RationalJson::Int(n) => Ok(BigRational::from_integer((*n).into())),
            RationalJson::Text(s) => parse_rational(s).map_or_else(|| schema(format!("bad rational {s:?}")), Ok),
        }
    }
}

/// Variable names must be identifiers other than the `zetaK` tokens.
pub fn ring_of(vars: &[String]) -> Result<Arc<Ring>, JsonError> {
    for (i, v) in vars.iter().enumerate() {
        let mut chars = v.chars();
        let ident = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        let zeta = v.strip_prefix("zeta").is_some_and(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()));
        if !ident || zeta {
            return schema(format!("invalid variable name {v:?}"));
        }
        if vars[..i].contains(v) {
            return schema(format!("duplicate variable {v:?}"));
        }
    }
    Ok(Ring::new(vars))
}

fn weights_to_json(w: &WeightSystem) -> BTreeMap<String, RationalJson> {
    w.iter().map(|(k, q)| (k.clone(), RationalJson::from_rational(q))).collect()
}

fn weights_from_json(m: &BTreeMap<String, RationalJson>) -> Result<WeightSystem, JsonError> {
    let w = m.iter().map(|(k, v)| Ok((k.clone(), v.value()?))).collect::<Result<BTreeMap<_, _>, JsonError>>()?;
    Ok(WeightSystem::new(w)?)
}

fn matrix_to_json(m: &PolyMatrix) -> Vec<Vec<String>> {
    m.row_vecs().iter().map(|r| r.iter().map(|p| p.to_string()).collect()).collect()
}

fn matrix_from_json(rows: &[Vec<String>], cols: usize, ring: &Arc<Ring>, order: u32) -> Result<PolyMatrix, JsonError> {
    if rows.iter().any(|r| r.len() != cols) {
        return schema("matrix rows must all have the same length");
    }
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| poly_parse(s, ring, order)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(if rows.is_empty() { PolyMatrix::zero(ring, 0, cols) } else { PolyMatrix::from_rows(ring, rows) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingJson {
    pub weights_source: BTreeMap<String, RationalJson>,
    pub weights_target: BTreeMap<String, RationalJson>,
    pub degree: RationalJson,
    pub generator_degrees_even: Vec<RationalJson>,
    pub generator_degrees_odd: Vec<RationalJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfJson {
    pub source_vars: Vec<String>,
    pub target_vars: Vec<String>,
    #[serde(rename = "U")]
    pub u: String,
    #[serde(rename = "V")]
    pub v: String,
    pub d0: Vec<Vec<String>>,
    pub d1: Vec<Vec<String>>,
    pub grading: Option<GradingJson>,
    pub cyclotomic_order: u32,
}

impl MfJson {
    pub fn from_mf(x: &MatrixFactorization) -> MfJson {
        MfJson {
            source_vars: x.source_vars().to_vec(),
            target_vars: x.target_vars().to_vec(),
            u: x.u_source().to_string(),
            v: x.v_target().to_string(),
            d0: matrix_to_json(x.d0()),
            d1: matrix_to_json(x.d1()),
            grading: x.grading().map(|g| GradingJson {
                weights_source: weights_to_json(&g.weights_source),
                weights_target: weights_to_json(&g.weights_target),
                degree: RationalJson::from_rational(&g.degree),
                generator_degrees_even: g.generator_degrees_even.iter().map(RationalJson::from_rational).collect(),
                generator_degrees_odd: g.generator_degrees_odd.iter().map(RationalJson::from_rational).collect(),
            }),
            cyclotomic_order: x.order(),
        }
    }

    pub fn to_mf(&self) -> Result<MatrixFactorization, JsonError> {
        let k = self.cyclotomic_order;
        let source = ring_of(&self.source_vars)?;
        let target = ring_of(&self.target_vars)?;
        if let Some(x) = self.source_vars.iter().find(|x| self.target_vars.contains(x)) {
            return schema(format!("variable {x:?} is both source and target"));
        }
        let ring = Ring::join(&source, &target);
        let u = poly_parse(&self.u, &source, k)?;
        let v = poly_parse(&self.v, &target, k)?;
        let r0 = self.d1.len();
        let r1 = self.d0.len();
        let d1 = matrix_from_json(&self.d1, r1, &ring, k)?;
        let d0 = matrix_from_json(&self.d0, r0, &ring, k)?;
        let grading = match &self.grading {
            None => None,
            Some(g) => {
                let degs = |v: &[RationalJson]| v.iter().map(RationalJson::value).collect::<Result<Vec<_>, _>>();
                Some(Grading {
                    weights_source: weights_from_json(&g.weights_source)?,
                    weights_target: weights_from_json(&g.weights_target)?,
                    degree: g.degree.value()?,
                    generator_degrees_even: degs(&g.generator_degrees_even)?,
                    generator_degrees_odd: degs(&g.generator_degrees_odd)?,
                })
            }
        };
        if let Some(g) = &grading {
            g.weights_source.for_ring(&source)?;
            g.weights_target.for_ring(&target)?;
        }
        Ok(MatrixFactorization::new(&self.source_vars, &self.target_vars, &u, &v, &d0, &d1, grading, k)?)
    }
}

pub fn mf_to_string(x: &MatrixFactorization) -> String {
    serde_json::to_string_pretty(&MfJson::from_mf(x)).expect("serializable")
}

pub fn mf_from_str(s: &str) -> Result<MatrixFactorization, JsonError> {
    serde_json::from_str::<MfJson>(s)?.to_mf()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateJson {
    pub mf: MfJson,
    pub dim_left: String,
    pub dim_right: String,
    pub product: String,
    pub group_order_claim: Option<u64>,
    pub verdict: bool,
    pub product_matches_group_order: Option<bool>,
    pub product_in_positive_rationals: bool,
}

impl CertificateJson {
    pub fn from_certificate(c: &EquivalenceCertificate) -> CertificateJson {
        CertificateJson {
            mf: MfJson::from_mf(&c.mf),
            dim_left: c.dims.left.to_string(),
            dim_right: c.dims.right.to_string(),
            product: c.dims.product.to_string(),
            group_order_claim: c.group_order_claim,
            verdict: c.verdict,
            product_matches_group_order: c.product_matches_group_order,
            product_in_positive_rationals: c.product_in_positive_rationals(),
        }
    }

    /// Parses every field without recomputing anything.
    pub fn parse(&self) -> Result<CertificateRecord, JsonError> {
        let mf = self.mf.to_mf()?;
        let k = mf.order();
        let num = |s: &str| -> Result<CycloNumber, JsonError> {
            let p = poly_parse(s, &Ring::empty(), k)?;
            Ok(p.as_constant().unwrap_or_else(CycloNumber::zero))
        };
        Ok(CertificateRecord {
            mf,
            dim_left: num(&self.dim_left)?,
            dim_right: num(&self.dim_right)?,
            product: num(&self.product)?,
            group_order_claim: self.group_order_claim,
            verdict: self.verdict,
            product_matches_group_order: self.product_matches_group_order,
            product_in_positive_rationals: self.product_in_positive_rationals,
        })
    }
}

/// A certificate as stored, before its claims are recomputed.
#[derive(Clone, Debug)]
pub struct CertificateRecord {
    pub mf: MatrixFactorization,
    pub dim_left: CycloNumber,
    pub dim_right: CycloNumber,
    pub product: CycloNumber,
    pub group_order_claim: Option<u64>,
    pub verdict: bool,
    pub product_matches_group_order: Option<bool>,
    pub product_in_positive_rationals: bool,
}

impl CertificateRecord {
    /// Recomputes the certificate; the stored fields that disagree are listed.
    pub fn recheck(&self) -> Result<(EquivalenceCertificate, Vec<&'static str>), JsonError> {
        let c = certify_equivalence(&self.mf, self.group_order_claim)?;
        let mut bad = Vec::new();
        if c.dims.left != self.dim_left {
            bad.push("dim_left");
        }
        if c.dims.right != self.dim_right {
            bad.push("dim_right");
        }
        if c.dims.product != self.product {
            bad.push("product");
        }
        if c.verdict != self.verdict {
            bad.push("verdict");
        }
        if c.product_matches_group_order != self.product_matches_group_order {
            bad.push("product_matches_group_order");
        }
        if c.product_in_positive_rationals() != self.product_in_positive_rationals {
            bad.push("product_in_positive_rationals");
        }
        Ok((c, bad))
    }
}

pub fn certificate_to_string(c: &EquivalenceCertificate) -> String {
    serde_json::to_string_pretty(&CertificateJson::from_certificate(c)).expect("serializable")
}

pub fn certificate_from_str(s: &str) -> Result<CertificateRecord, JsonError> {
    serde_json::from_str::<CertificateJson>(s)?.parse()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionJson {
    pub vars: Vec<String>,
    /// One substitution map per generator; missing variables are fixed.
    pub generators: Vec<BTreeMap<String, String>>,
    pub orders: Vec<u32>,
    pub cyclotomic_order: u32,
}

impl ActionJson {
    pub fn from_action(a: &GroupAction) -> ActionJson {
        let mut k = 1;
        for g in a.generators() {
            for p in g.values() {
                k = crate::exactalg::lcm_order(k, p.coefficient_order());
            }
        }
        ActionJson {
            vars: a.ring().vars().to_vec(),
            generators: a
                .generators()
                .iter()
                .map(|g| {
                    g.iter()
                        .filter(|(v, p)| **p != Polynomial::var(a.ring(), v))
                        .map(|(v, p)| (v.clone(), p.to_string()))
                        .collect()
                })
                .collect(),
            orders: a.orders().to_vec(),
            cyclotomic_order: k,
        }
    }

    pub fn to_action(&self) -> Result<GroupAction, JsonError> {
        let ring = ring_of(&self.vars)?;
        let gens = self
            .generators
            .iter()
            .map(|g| {
                g.iter()
                    .map(|(v, s)| {
                        if ring.index_of(v).is_none() {
                            return schema(format!("action image for unknown variable {v:?}"));
                        }
                        Ok((v.clone(), poly_parse(s, &ring, self.cyclotomic_order)?))
                    })
                    .collect::<Result<BTreeMap<_, _>, JsonError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroupAction::new(&ring, gens, self.orders.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessJson {
    pub action: ActionJson,
    pub f: String,
    pub linearization: Option<Vec<String>>,
    pub invariant_gens: Vec<String>,
    pub z_vars: Vec<String>,
    pub relations: Vec<String>,
    pub f_in_invariants: String,
    pub chart_vars: Vec<String>,
    pub chart_map: BTreeMap<String, String>,
    pub f_hat: String,
}

impl WitnessJson {
    pub fn from_witness(w: &DescentWitness) -> WitnessJson {
        let strs = |v: &[Polynomial]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>();
        let mut action = ActionJson::from_action(&w.action);
        for p in [&w.f, &w.f_in_invariants, &w.f_hat].into_iter().chain(&w.invariant_gens).chain(&w.relations) {
            action.cyclotomic_order = crate::exactalg::lcm_order(action.cyclotomic_order, p.coefficient_order());
        }
        WitnessJson {
            action,
            f: w.f.to_string(),
            linearization: w.linearization.as_ref().map(|l| strs(l)),
            invariant_gens: strs(&w.invariant_gens),
            z_vars: w.z_ring.vars().to_vec(),
            relations: strs(&w.relations),
            f_in_invariants: w.f_in_invariants.to_string(),
            chart_vars: w.chart_ring.vars().to_vec(),
            chart_map: w.chart_map.iter().map(|(z, p)| (z.clone(), p.to_string())).collect(),
            f_hat: w.f_hat.to_string(),
        }
    }

    pub fn to_witness(&self) -> Result<DescentWitness, JsonError> {
        let action = self.action.to_action()?;
        let k = self.action.cyclotomic_order;
        let ring = action.ring().clone();
        let z_ring = ring_of(&self.z_vars)?;
        let chart_ring = ring_of(&self.chart_vars)?;
        let on = |r: &Arc<Ring>, v: &[String]| v.iter().map(|s| poly_parse(s, r, k)).collect::<Result<Vec<_>, _>>();
        if let Some(z) = self.chart_map.keys().find(|z| z_ring.index_of(z).is_none()) {
            return schema(format!("chart image for unknown symbol {z:?}"));
        }
        Ok(DescentWitness {
            f: poly_parse(&self.f, &ring, k)?,
            linearization: self.linearization.as_ref().map(|l| on(&ring, l)).transpose()?,
            invariant_gens: on(&ring, &self.invariant_gens)?,
            relations: on(&z_ring, &self.relations)?,
            f_in_invariants: poly_parse(&self.f_in_invariants, &z_ring, k)?,
            chart_map: self
                .chart_map
                .iter()
                .map(|(z, s)| Ok((z.clone(), poly_parse(s, &chart_ring, k)?)))
                .collect::<Result<_, JsonError>>()?,
            f_hat: poly_parse(&self.f_hat, &chart_ring, k)?,
            action,
            z_ring,
            chart_ring,
        })
    }
}

pub fn witness_to_string(w: &DescentWitness) -> String {
    serde_json::to_string_pretty(&WitnessJson::from_witness(w)).expect("serializable")
}

pub fn witness_from_str(s: &str) -> Result<DescentWitness, JsonError> {
    serde_json::from_str::<WitnessJson>(s)?.to_witness()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetJson {
    pub max_profiles: Option<usize>,
    pub max_steps: Option<u64>,
    pub max_nodes: Option<usize>,
    pub max_solutions_per_profile: Option<usize>,
    pub stop_at_first_certificate: Option<bool>,
    pub central_charge_prefilter: Option<bool>,
    pub values: Option<Vec<i64>>,
    pub soft_time_limit_ms: Option<u64>,
}

impl BudgetJson {
    pub fn from_budget(b: &Budget) -> BudgetJson {
        BudgetJson {
            max_profiles: Some(b.max_profiles),
            max_steps: Some(b.max_steps),
            max_nodes: Some(b.max_nodes),
            max_solutions_per_profile: Some(b.max_solutions_per_profile),
            stop_at_first_certificate: Some(b.stop_at_first_certificate),
            central_charge_prefilter: Some(b.central_charge_prefilter),
            values: Some(b.values.clone()),
            soft_time_limit_ms: b.soft_time_limit.map(|d| d.as_millis() as u64),
        }
    }

    /// Missing fields take their defaults.
    pub fn to_budget(&self) -> Budget {
        let d = Budget::default();
        Budget {
            max_profiles: self.max_profiles.unwrap_or(d.max_profiles),
            max_steps: self.max_steps.unwrap_or(d.max_steps),
            max_nodes: self.max_nodes.unwrap_or(d.max_nodes),
            max_solutions_per_profile: self.max_solutions_per_profile.unwrap_or(d.max_solutions_per_profile),
            stop_at_first_certificate: self.stop_at_first_certificate.unwrap_or(d.stop_at_first_certificate),
            central_charge_prefilter: self.central_charge_prefilter.unwrap_or(d.central_charge_prefilter),
            values: self.values.clone().unwrap_or(d.values),
            soft_time_limit: self.soft_time_limit_ms.map(Duration::from_millis).or(d.soft_time_limit),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRequestJson {
    #[serde(rename = "U")]
    pub u: String,
    #[serde(rename = "V")]
    pub v: String,
    /// Variable orders; default to the weight keys in sorted order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_vars: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_vars: Option<Vec<String>>,
    pub weights_source: BTreeMap<String, RationalJson>,
    pub weights_target: BTreeMap<String, RationalJson>,
    pub degree: RationalJson,
    pub group_order_claim: Option<u64>,
    #[serde(default)]
    pub budget: BudgetJson,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub cyclotomic_order: u32,
}

fn one() -> u32 {
    1
}

fn is_one(k: &u32) -> bool {
    *k == 1
}

impl SearchRequestJson {
    pub fn to_target(&self) -> Result<(SearchTarget, Budget), JsonError> {
        let sv = self.source_vars.clone().unwrap_or_else(|| self.weights_source.keys().cloned().collect());
        let tv = self.target_vars.clone().unwrap_or_else(|| self.weights_target.keys().cloned().collect());
        let source = ring_of(&sv)?;
        let target = ring_of(&tv)?;
        if let Some(x) = sv.iter().find(|x| tv.contains(x)) {
            return schema(format!("variable {x:?} is both source and target"));
        }
        let t = SearchTarget {
            u: poly_parse(&self.u, &source, self.cyclotomic_order)?,
            v: poly_parse(&self.v, &target, self.cyclotomic_order)?,
            weights_source: weights_from_json(&self.weights_source)?,
            weights_target: weights_from_json(&self.weights_target)?,
            degree: self.degree.value()?,
            group_order_claim: self.group_order_claim,
        };
        t.weights_source.for_ring(&source)?;
        t.weights_target.for_ring(&target)?;
        Ok((t, self.budget.to_budget()))
    }

    pub fn from_target(t: &SearchTarget, b: &Budget) -> SearchRequestJson {
        SearchRequestJson {
            u: t.u.to_string(),
            v: t.v.to_string(),
            source_vars: Some(t.u.ring().vars().to_vec()),
            target_vars: Some(t.v.ring().vars().to_vec()),
            weights_source: weights_to_json(&t.weights_source),
            weights_target: weights_to_json(&t.weights_target),
            degree: RationalJson::from_rational(&t.degree),
            group_order_claim: t.group_order_claim,
            budget: BudgetJson::from_budget(b),
            cyclotomic_order: t.u.coefficient_order().max(t.v.coefficient_order()),
        }
    }
}

pub fn search_request_from_str(s: &str) -> Result<(SearchTarget, Budget), JsonError> {
    serde_json::from_str::<SearchRequestJson>(s)?.to_target()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchStatsJson {
    pub profiles_total: usize,
    pub profiles_tried: usize,
    pub profiles_exhausted: usize,
    pub nodes: usize,
    pub groebner_steps: u64,
    pub solutions_dropped: usize,
    pub prefiltered: bool,
    pub soft_limit_hit: bool,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchResponseJson {
    pub certificates: Vec<CertificateJson>,
    pub accepted: usize,
    pub unsolved: Vec<String>,
    pub stats: SearchStatsJson,
}

impl SearchResponseJson {
    pub fn from_result(r: &SearchResult) -> SearchResponseJson {
        let s: &SearchStats = &r.stats;
        SearchResponseJson {
            certificates: r.certificates.iter().map(CertificateJson::from_certificate).collect(),
            accepted: r.accepted().count(),
            unsolved: r.unsolved.clone(),
            stats: SearchStatsJson {
                profiles_total: s.profiles_total,
                profiles_tried: s.profiles_tried,
                profiles_exhausted: s.profiles_exhausted,
                nodes: s.nodes,
                groebner_steps: s.groebner_steps,
                solutions_dropped: s.solutions_dropped,
                prefiltered: s.prefiltered,
                soft_limit_hit: s.soft_limit_hit,
                elapsed_ms: s.elapsed_ms as u64,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivariance::invariance_check;
    use crate::exactalg::rat;
    use crate::mfcore::{diagonal_delta, knorrer_certificate, mf_verify};

    fn p(s: &str, v: &[&str]) -> Polynomial {
        poly_parse(s, &Ring::new(v), 1).unwrap()
    }

    #[test]
    fn mf_round_trip() {
        for x in [
            diagonal_delta(&p("x^3 + x*y^2", &["x", "y"])),
            knorrer_certificate(&p("x^3", &["x"])),
            MatrixFactorization::unit(),
        ] {
            let s = mf_to_string(&x);
            let y = mf_from_str(&s).unwrap();
            assert_eq!(x, y);
            assert_eq!(mf_to_string(&y), s);
        }
    }

    #[test]
    fn mf_keys_are_exact() {
        let v: serde_json::Value = serde_json::from_str(&mf_to_string(&diagonal_delta(&p("x^2", &["x"])))).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["U", "V", "cyclotomic_order", "d0", "d1", "grading", "source_vars", "target_vars"]);
        let g: Vec<&String> = v["grading"].as_object().unwrap().keys().collect();
        assert_eq!(
            g,
            ["degree", "generator_degrees_even", "generator_degrees_odd", "weights_source", "weights_target"]
        );
    }

    #[test]
    fn mf_reader_rejects_bad_documents() {
        let good = mf_to_string(&diagonal_delta(&p("x^2", &["x"])));
        assert!(matches!(mf_from_str("{"), Err(JsonError::Syntax(_))));
        let ragged = good.replace("\"d1\": [\n    [\n", "\"d1\": [\n    [\n      \"x\",\n");
        assert!(mf_from_str(&ragged).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["target_vars"] = serde_json::json!(["x"]);
        assert!(mf_from_str(&v.to_string()).is_err());
        v["target_vars"] = serde_json::json!(["zeta3"]);
        assert!(mf_from_str(&v.to_string()).is_err());
        let mut v: serde_json::Value = serde_json::from_str(&good).unwrap();
        v["extra"] = serde_json::json!(1);
        assert!(mf_from_str(&v.to_string()).is_err());
    }

    #[test]
    fn wrong_potential_fails_verification() {
        let r = Ring::new(&["x", "y"]);
        let d = |s: &str| PolyMatrix::from_rows(&r, vec![vec![poly_parse(s, &r, 1).unwrap()]]);
        let x = MatrixFactorization::new(&["x"], &["y"], &p("x^2", &["x"]), &p("y^2", &["y"]), &d("y"), &d("x"), None, 1)
            .unwrap();
        let back = mf_from_str(&mf_to_string(&x)).unwrap();
        let rep = mf_verify(&back);
        assert!(!rep.passed());
        assert_eq!((rep.violations[0].row, rep.violations[0].col), (0, 0));
    }

    #[test]
    fn certificate_round_trip() {
        let c = certify_equivalence(&diagonal_delta(&p("x^3", &["x"])), Some(1)).unwrap();
        let rec = certificate_from_str(&certificate_to_string(&c)).unwrap();
        let (again, bad) = rec.recheck().unwrap();
        assert!(bad.is_empty());
        assert_eq!(again.dims, c.dims);
        let forged = certificate_to_string(&c).replace("\"dim_left\": \"1\"", "\"dim_left\": \"2\"");
        let (_, bad) = certificate_from_str(&forged).unwrap().recheck().unwrap();
        assert_eq!(bad, ["dim_left"]);
    }

    #[test]
    fn cyclotomic_values_round_trip() {
        let k = 12;
        for s in ["zeta12", "1/2 - 3*zeta12^3", "-zeta12^2 + 7"] {
            let c = poly_parse(s, &Ring::empty(), k).unwrap();
            let back = poly_parse(&c.to_string(), &Ring::empty(), k).unwrap();
            assert_eq!(c, back);
        }
    }

    #[test]
    fn witness_round_trip() {
        let w = DescentWitness::trivial(&p("a^3 + b^2", &["a", "b"]));
        let s = witness_to_string(&w);
        let back = witness_from_str(&s).unwrap();
        assert_eq!(witness_to_string(&back), s);
        let r = Ring::new(&["y1", "y2"]);
        let a = GroupAction::new(
            &r,
            vec![[("y1".to_string(), poly_parse("zeta3*y1", &r, 3).unwrap())].into_iter().collect()],
            vec![3],
        )
        .unwrap();
        let back = ActionJson::from_action(&a).to_action().unwrap();
        assert_eq!(back, a);
        assert!(!invariance_check(&poly_parse("y1", &r, 1).unwrap(), &back).unwrap());
    }

    #[test]
    fn search_request_parsing() {
        let req = r#"{"U": "u^6 + v^2", "V": "x^3 + x*y^2",
            "weights_source": {"u": 1, "v": "3"}, "weights_target": {"x": 2, "y": 2},
            "degree": 6, "group_order_claim": 2, "budget": {"max_nodes": 10}}"#;
        let (t, b) = search_request_from_str(req).unwrap();
        assert_eq!(t.degree, rat(6, 1));
        assert_eq!(b.max_nodes, 10);
        assert_eq!(b.max_profiles, Budget::default().max_profiles);
        let again = serde_json::to_string(&SearchRequestJson::from_target(&t, &b)).unwrap();
        let (t2, b2) = search_request_from_str(&again).unwrap();
        assert_eq!((t2.u, t2.v, t2.degree), (t.u, t.v, t.degree));
        assert_eq!(b2, b);
        assert!(search_request_from_str(&req.replace("\"v\": \"3\"", "\"v\": \"0\"")).is_err());
    }
}
