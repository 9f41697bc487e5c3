//! Built-in registry of singularities, quotient pairs and equivalence chains,
//! with batch verification and chain bookkeeping.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivariance::{action_verify, descent_verify, invariance_check, invariant_generators, DescentWitness, GroupAction};
use crate::exactalg::{
    poly_parse, rat, rational_string, weighted_degree, CycloNumber, Homogeneity, PolyMatrix, Polynomial, Ring,
    WeightSystem,
};
use crate::groebner::{eliminate, GbConfig};
use crate::jacobi::{milnor_number, JacobiData};
use crate::json::{ActionJson, CertificateJson, JsonError, WitnessJson};
use crate::mfcore::{knorrer_certificate, Grading, MatrixFactorization};
use crate::qdim::{certify_equivalence, qdims, EquivalenceCertificate};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry {0:?}")]
    UnknownEntry(String),
    #[error("no catalog pair joins {0} and {1}")]
    UnknownPair(String, String),
    #[error("chain step {step} starts at {found}, previous step ended at {expected}")]
    EndpointMismatch { step: usize, expected: String, found: String },
    #[error(transparent)]
    Json(#[from] JsonError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Potential given verbatim with the equivalence it belongs to.
    Quoted,
    StandardNormalForm,
}

#[derive(Clone, Debug)]
pub struct SingularityEntry {
    pub name: String,
    pub potential: Polynomial,
    /// Weights normalizing the potential to degree 1.
    pub weights: WeightSystem,
    pub expected_milnor: usize,
    pub provenance: Provenance,
    pub enabled: bool,
}

#[derive(Clone, Debug)]
pub struct EquivalencePair {
    pub source: String,
    pub target: String,
    /// Presentation of the source potential the action acts on.
    pub potential: Polynomial,
    pub action: Option<GroupAction>,
    pub action_text: String,
    pub group_order: u64,
    /// Coordinates diagonalizing a non-diagonal action.
    pub linearization: Option<Vec<Polynomial>>,
    pub witness: Option<DescentWitness>,
    pub certificate: Option<EquivalenceCertificate>,
    pub origin_citation: String,
    pub enabled: bool,
    /// Recorded as not realizable by a quotient construction.
    pub nonexample: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainStep {
    /// A catalog pair, traversed in either direction.
    Pair { from: String, to: String },
    /// Quadratic stabilization `W ~ W + uv`.
    Knorrer { entry: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceChain {
    pub name: String,
    pub steps: Vec<ChainStep>,
}

#[derive(Clone, Debug)]
pub struct Catalog {
    pub entries: Vec<SingularityEntry>,
    pub pairs: Vec<EquivalencePair>,
    pub chains: Vec<EquivalenceChain>,
}

fn entry(name: &str, vars: &[&str], potential: &str, mu: usize, provenance: Provenance) -> SingularityEntry {
    let ring = Ring::new(vars);
    let potential = poly_parse(potential, &ring, 1).expect("built-in potential");
    let weights = WeightSystem::infer(&potential).expect("built-in potential is quasi-homogeneous");
    SingularityEntry { name: name.into(), potential, weights, expected_milnor: mu, provenance, enabled: true }
}

fn action(vars: &[&str], images: &[(&str, &str)], order: u32, k: u32) -> GroupAction {
    let ring = Ring::new(vars);
    let g = images.iter().map(|(v, s)| (v.to_string(), poly_parse(s, &ring, k).expect("built-in image"))).collect();
    GroupAction::new(&ring, vec![g], vec![order]).expect("built-in action")
}

/// Witness from explicit generators, `F` and chart; relations by elimination.
fn witness(a: &GroupAction, f: &str, gens: &[&str], big_f: &str, chart_vars: &[&str], chart: &[&str], f_hat: &str) -> DescentWitness {
    let ring = a.ring().clone();
    let k = a.generators().iter().flat_map(|g| g.values()).fold(1, |k, p| crate::exactalg::lcm_order(k, p.coefficient_order()));
    let p = |s: &str, r: &Arc<Ring>| poly_parse(s, r, k).expect("built-in witness");
    let zn: Vec<String> = (1..=gens.len()).map(|i| format!("z{i}")).collect();
    let z_ring = Ring::new(&zn);
    let chart_ring = Ring::new(chart_vars);
    let invariant_gens: Vec<Polynomial> = gens.iter().map(|g| p(g, &ring)).collect();
    let joint = Ring::join(&ring, &z_ring);
    let graph: Vec<Polynomial> = invariant_gens
        .iter()
        .zip(&zn)
        .map(|(g, z)| &Polynomial::var(&joint, z) - &g.embed(&joint).expect("subring"))
        .collect();
    let drop: Vec<&str> = ring.vars().iter().map(String::as_str).collect();
    let (_, relations) = eliminate(&joint, &graph, &drop, &GbConfig::default()).expect("small elimination");
    let relations = relations.into_iter().map(|r| r.embed(&z_ring).expect("z variables")).collect();
    DescentWitness {
        action: a.clone(),
        f: p(f, &ring),
        linearization: None,
        invariant_gens,
        relations,
        f_in_invariants: p(big_f, &z_ring),
        chart_map: zn.iter().zip(chart).map(|(z, c)| (z.clone(), p(c, &chart_ring))).collect(),
        f_hat: p(f_hat, &chart_ring),
        z_ring,
        chart_ring,
    }
}

/// Rank-2 factorization of `(x^b + x y^2) − (u^{2b} + v^2)` with `d0 = adj(d1)`.
pub fn a_d_factorization(b: u32) -> MatrixFactorization {
    assert!(b >= 2, "b >= 2");
    let r = Ring::new(&["u", "v", "x", "y"]);
    let p = |s: &str| poly_parse(s, &r, 1).expect("closed form");
    let bi = b as i64;
    let tail: Vec<String> = (0..b).map(|i| format!("x^{}*u^{}", b - 1 - i, 2 * i)).collect();
    let d1 = PolyMatrix::from_rows(
        &r,
        vec![
            vec![p("x - u^2"), p("u*y - v")],
            vec![p("-u*y - v"), p(&format!("{} + y^2", tail.join(" + ")))],
        ],
    );
    let grading = Grading {
        weights_source: WeightSystem::from_ints(&["u", "v"], &[1, bi]).expect("positive"),
        weights_target: WeightSystem::from_ints(&["x", "y"], &[2, bi - 1]).expect("positive"),
        degree: rat(2 * bi, 1),
        generator_degrees_even: vec![rat(0, 1), rat(bi - 2, 1)],
        generator_degrees_odd: vec![rat(bi - 2, 1), rat(0, 1)],
    };
    MatrixFactorization::new(
        &["u", "v"],
        &["x", "y"],
        &p(&format!("u^{} + v^2", 2 * b)).restrict(&Ring::new(&["u", "v"])),
        &p(&format!("x^{b} + x*y^2")).restrict(&Ring::new(&["x", "y"])),
        &d1.adjugate(),
        &d1,
        Some(grading),
        1,
    )
    .expect("closed form has consistent shapes")
}

/// The built-in catalog. Certificates are computed, not stored.
pub fn catalog_load() -> Catalog {
    use Provenance::*;
    let mut entries = Vec::new();
    for n in (1..=11).chain([17, 29]) {
        entries.push(entry(&format!("A{n}"), &["x", "y"], &format!("x^{} + y^2", n + 1), n, StandardNormalForm));
    }
    for n in 3..=10 {
        entries.push(entry(&format!("D{n}"), &["x", "y"], &format!("x^{} + x*y^2", n - 1), n, StandardNormalForm));
    }
    entries.push(entry("E6", &["x", "y"], "x^3 + y^4", 6, StandardNormalForm));
    entries.push(entry("E7", &["x", "y"], "x^3 + x*y^3", 7, StandardNormalForm));
    entries.push(entry("E8", &["x", "y"], "x^3 + y^5", 8, StandardNormalForm));
    entries.push(entry("A2xA2", &["y1", "y2"], "y1^3 + y2^3", 4, StandardNormalForm));
    entries.push(entry("Z13", &["x1", "x2", "x3"], "x1^6*x2 + x2^3 + x3^2", 13, Quoted));
    entries.push(entry("Q10", &["x", "y", "z"], "x^3 + y^4 + y*z^2", 10, StandardNormalForm));
    entries.push(entry("Q11", &["x", "y", "z"], "x^3 + y^2*z + x*z^3", 11, StandardNormalForm));
    entries.push(entry("Q12", &["x", "y", "z"], "x^3 + y^5 + y*z^2", 12, StandardNormalForm));
    entries.push(entry("Q18", &["x", "y", "z"], "x^3 + y^8 + y*z^2", 18, StandardNormalForm));
    entries.push(entry("S11", &["x", "y", "z"], "x^4 + y^2*z + x*z^2", 11, StandardNormalForm));
    entries.push(entry("W13", &["y1", "y2", "y3"], "y2^4 + y2*y1^4 + y3^2", 13, StandardNormalForm));
    entries.push(entry("K14", &["u", "v", "w"], "u^3 + v^8 + w^2", 14, StandardNormalForm));
    entries.push(entry("E18", &["x", "y", "z"], "y^3 + x^10 + z^2", 18, StandardNormalForm));
    entries.push(entry("E30", &["u", "v", "w"], "v^3 + w^2 - w*u^8", 30, StandardNormalForm));

    let mut pairs = Vec::new();
    let pair = |source: &str, target: &str, vars: &[&str], f: &str, a: Option<GroupAction>, text: &str, order: u64| {
        EquivalencePair {
            source: source.into(),
            target: target.into(),
            potential: poly_parse(f, &Ring::new(vars), 1).expect("built-in potential"),
            action: a,
            action_text: text.into(),
            group_order: order,
            linearization: None,
            witness: None,
            certificate: None,
            origin_citation: String::new(),
            enabled: true,
            nonexample: false,
        }
    };
    for b in 2..=6u32 {
        let a = action(&["u", "v"], &[("u", "-u"), ("v", "-v")], 2, 1);
        let f = format!("u^{} + v^2", 2 * b);
        let mut p = pair(&format!("A{}", 2 * b - 1), &format!("D{}", b + 1), &["u", "v"], &f, Some(a.clone()), "(u,v) -> (-u,-v)", 2);
        p.witness = Some(witness(&a, &f, &["u^2", "u*v", "v^2"], &format!("z1^{b} + z3"), &["s", "t"], &["s", "s*t", "s*t^2"], &format!("s^{b} + s*t^2")));
        p.certificate = Some(certify_equivalence(&a_d_factorization(b), Some(2)).expect("graded closed form"));
        p.origin_citation = "Z/2 quotient of A_{2b-1}; chart of the minimal resolution gives D_{b+1}".into();
        pairs.push(p);
    }
    {
        let a = action(&["y1", "y2"], &[("y1", "zeta3*y1"), ("y2", "zeta3^2*y2")], 3, 3);
        let f = "y1^3 + y2^3";
        let mut p = pair("A2xA2", "D4", &["y1", "y2"], f, Some(a.clone()), "(y1,y2) -> (zeta3*y1, zeta3^-1*y2)", 3);
        p.witness = Some(witness(&a, f, &["y1*y2", "y1^3", "y2^3"], "z2 + z3", &["s", "t"], &["s*t", "s^2*t", "s*t^2"], "s^2*t + s*t^2"));
        p.origin_citation = "Z/3 quotient of A2xA2".into();
        pairs.push(p);
    }
    {
        let vars = ["x1", "x2", "x3"];
        let a = action(&vars, &[("x1", "-x1"), ("x3", "-x3")], 2, 1);
        let f = "x1^6*x2 + x2^3 + x3^2";
        let mut p = pair("Z13", "Q11", &vars, f, Some(a.clone()), "(x1,x2,x3) -> (-x1,x2,-x3)", 2);
        p.witness = Some(witness(
            &a,
            f,
            &["x1^2", "x1*x3", "x3^2", "x2"],
            "z1^3*z4 + z4^3 + z3",
            &["s", "t", "x2"],
            &["s", "s*t", "s*t^2", "x2"],
            "s^3*x2 + x2^3 + s*t^2",
        ));
        p.origin_citation = "Z/2 quotient of the Z13 presentation".into();
        pairs.push(p);
    }
    let unverified = |mut p: EquivalencePair, lin: Option<&[&str]>| {
        let ring = p.potential.ring().clone();
        p.linearization = lin.map(|l| l.iter().map(|s| poly_parse(s, &ring, 1).expect("linearization")).collect());
        p.enabled = false;
        p.origin_citation = "unverified potential: no descent witness".into();
        p
    };
    let uvw = ["u", "v", "w"];
    let ys = ["y1", "y2", "y3"];
    pairs.push(unverified(
        pair("W13", "S11", &ys, "y2^4 + y2*y1^4 + y3^2", Some(action(&ys, &[("y1", "-y1"), ("y3", "-y3")], 2, 1)), "(y1,y2,y3) -> (-y1,y2,-y3)", 2),
        None,
    ));
    pairs.push(unverified(
        pair("K14", "Q10", &uvw, "v^3 + w^2 + w*u^4", Some(action(&uvw, &[("u", "-u"), ("w", "-w - u^4")], 2, 1)), "(u,v,w) -> (-u,v,-w-u^4)", 2),
        Some(&["u", "v", "w + 1/2*u^4"]),
    ));
    pairs.push(unverified(
        pair("K14", "Q10", &uvw, "u^3 + v^8 + w^2", Some(action(&uvw, &[("v", "-v"), ("w", "-w")], 2, 1)), "(u,v,w) -> (u,-v,-w)", 2),
        None,
    ));
    let xyz = ["x", "y", "z"];
    pairs.push(unverified(
        pair("E18", "Q12", &xyz, "y^3 + x^10 + z^2", Some(action(&xyz, &[("x", "-x"), ("z", "-z")], 2, 1)), "(x,y,z) -> (-x,y,-z)", 2),
        None,
    ));
    pairs.push(unverified(
        pair("E30", "Q18", &uvw, "v^3 + w^2 - w*u^8", Some(action(&uvw, &[("u", "-u"), ("w", "-w + u^8")], 2, 1)), "(u,v,w) -> (-u,v,-w+u^8)", 2),
        Some(&["u", "v", "w - 1/2*u^8"]),
    ));
    for (a, e) in [("A11", "E6"), ("A17", "E7"), ("A29", "E8")] {
        let f = entries.iter().find(|x| x.name == a).expect("listed above").potential.to_string();
        let mut p = pair(a, e, &["x", "y"], &f, None, "", 0);
        p.nonexample = true;
        p.origin_citation = "product not in Q>0: not realizable by a quotient construction".into();
        pairs.push(p);
    }

    let step = |from: &str, to: &str| ChainStep::Pair { from: from.into(), to: to.into() };
    let chains = vec![
        EquivalenceChain { name: "A5-D4-A2xA2".into(), steps: vec![step("A5", "D4"), step("D4", "A2xA2")] },
        EquivalenceChain { name: "A11-E6".into(), steps: vec![step("A11", "E6")] },
        EquivalenceChain { name: "A17-E7".into(), steps: vec![step("A17", "E7")] },
        EquivalenceChain { name: "A29-E8".into(), steps: vec![step("A29", "E8")] },
    ];
    Catalog { entries, pairs, chains }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub subject: String,
    pub check: String,
    pub passed: bool,
    pub detail: String,
    /// Rows of disabled entries and pairs are reported but not counted.
    pub counted: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub rows: Vec<VerifyRow>,
}

impl CatalogReport {
    pub fn passed(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyRow> {
        self.rows.iter().filter(|r| r.counted && !r.passed)
    }
}

impl fmt::Display for CatalogReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let status = match (r.passed, r.counted) {
                (true, true) => "PASS",
                (false, true) => "FAIL",
                (true, false) => "pass (disabled)",
                (false, false) => "fail (disabled)",
            };
            writeln!(f, "{:<12} {:<14} {:<16} {}", r.subject, r.check, status, r.detail)?;
        }
        Ok(())
    }
}

fn row(subject: &str, check: &str, passed: bool, detail: impl Into<String>, counted: bool) -> VerifyRow {
    VerifyRow { subject: subject.into(), check: check.into(), passed, detail: detail.into(), counted }
}

/// Sorted degree-1 weights, or `None` if not quasi-homogeneous.
fn weight_profile(p: &Polynomial) -> Option<Vec<BigRational>> {
    let mut w: Vec<BigRational> = WeightSystem::infer(p)?.iter().map(|(_, q)| q.clone()).collect();
    w.sort();
    Some(w)
}

fn show_weights(w: &[BigRational]) -> String {
    w.iter().map(rational_string).collect::<Vec<_>>().join(",")
}

pub fn verify_entry(e: &SingularityEntry) -> Vec<VerifyRow> {
    let cfg = GbConfig::default();
    let homogeneous = matches!(weighted_degree(&e.potential, &e.weights), Ok(Homogeneity::Degree(_)));
    let mut rows = vec![row(&e.name, "homogeneous", homogeneous, e.potential.to_string(), e.enabled)];
    let (ok, detail) = match JacobiData::build(&e.potential, &e.weights, &cfg) {
        Ok(j) => (j.milnor() == e.expected_milnor, format!("expected {}, got {}", e.expected_milnor, j.milnor())),
        Err(err) => (false, err.to_string()),
    };
    rows.push(row(&e.name, "milnor", ok, detail, e.enabled));
    rows
}

impl Catalog {
    pub fn entry(&self, name: &str) -> Option<&SingularityEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// First enabled pair joining `a` and `b` in either direction, else any.
    pub fn pair_between(&self, a: &str, b: &str) -> Option<&EquivalencePair> {
        let joins = |p: &&EquivalencePair| (p.source == a && p.target == b) || (p.source == b && p.target == a);
        self.pairs.iter().filter(joins).find(|p| p.enabled).or_else(|| self.pairs.iter().find(joins))
    }

    pub fn verify_pair(&self, p: &EquivalencePair) -> Vec<VerifyRow> {
        let cfg = GbConfig::default();
        let subject = format!("{}~{}", p.source, p.target);
        let on = p.enabled;
        let mut rows = Vec::new();
        if p.nonexample {
            let realized = p.certificate.as_ref().is_some_and(|c| c.verdict && c.product_in_positive_rationals());
            rows.push(row(&subject, "nonexample", !realized, "flagged: product not in Q>0", on));
            return rows;
        }
        let source = self.entry(&p.source);
        match source {
            None => rows.push(row(&subject, "presentation", false, format!("unknown entry {}", p.source), on)),
            Some(e) => {
                let (wp, we) = (weight_profile(&p.potential), weight_profile(&e.potential));
                let mu = milnor_number(&p.potential, &cfg).ok();
                let ok = wp.is_some() && wp == we && mu.is_some() && mu == milnor_number(&e.potential, &cfg).ok();
                let detail = format!(
                    "weights {} vs {}, milnor {}",
                    wp.as_deref().map_or("-".into(), show_weights),
                    we.as_deref().map_or("-".into(), show_weights),
                    mu.map_or("-".into(), |m| m.to_string())
                );
                rows.push(row(&subject, "presentation", ok, detail, on));
            }
        }
        if self.entry(&p.target).is_none() {
            rows.push(row(&subject, "target", false, format!("unknown entry {}", p.target), on));
        }
        if let Some(a) = &p.action {
            let (ok, detail) = match (action_verify(a), a.group_order()) {
                (Ok(rep), Ok(n)) => (rep.passed() && n as u64 == p.group_order, format!("order {n}")),
                (Err(e), _) | (_, Err(e)) => (false, e.to_string()),
            };
            rows.push(row(&subject, "action", ok, format!("{} {}", p.action_text, detail), on));
            let inv = invariance_check(&p.potential, a);
            rows.push(row(&subject, "invariance", inv.as_ref().is_ok_and(|b| *b), p.potential.to_string(), on));
            if let Some(lin) = &p.linearization {
                let r = invariant_generators(a, None, Some(lin), &cfg);
                let detail = match &r {
                    Ok(ir) => format!("{} generators", ir.gens.len()),
                    Err(e) => e.to_string(),
                };
                rows.push(row(&subject, "linearization", r.is_ok(), detail, on));
            }
        }
        if let Some(w) = &p.witness {
            let rep = descent_verify(w, &cfg);
            let target_mu = self.entry(&p.target).map(|e| e.expected_milnor);
            let hat_matches = rep.milnor_f_hat.is_some()
                && rep.milnor_f_hat == target_mu
                && weight_profile(&w.f_hat) == self.entry(&p.target).and_then(|e| weight_profile(&e.potential));
            let same_f = w.f == p.potential;
            let detail = format!(
                "milnor f = {}, milnor f_hat = {}",
                rep.milnor_f.map_or("-".into(), |m| m.to_string()),
                rep.milnor_f_hat.map_or("-".into(), |m| m.to_string())
            );
            rows.push(row(&subject, "descent", rep.passed() && hat_matches && same_f, detail, on));
        }
        if let Some(c) = &p.certificate {
            let ok = c.verdict && c.dims.product == CycloNumber::from_int(p.group_order as i64);
            let detail = format!("dims {} {}, product {}", c.dims.left, c.dims.right, c.dims.product);
            rows.push(row(&subject, "certificate", ok, detail, on));
        }
        rows
    }

    /// Entry rows, then pair rows, then chain rows, in catalog order.
    pub fn verify(&self, parallel: bool) -> CatalogReport {
        enum Item<'a> {
            Entry(&'a SingularityEntry),
            Pair(&'a EquivalencePair),
            Chain(&'a EquivalenceChain),
        }
        let items: Vec<Item> = self
            .entries
            .iter()
            .map(Item::Entry)
            .chain(self.pairs.iter().map(Item::Pair))
            .chain(self.chains.iter().map(Item::Chain))
            .collect();
        let run = |it: &Item| match it {
            Item::Entry(e) => verify_entry(e),
            Item::Pair(p) => self.verify_pair(p),
            Item::Chain(c) => vec![match chain_check(self, c) {
                Ok(r) => row(&c.name, "chain", true, r.summary(), true),
                Err(e) => row(&c.name, "chain", false, e.to_string(), true),
            }],
        };
        let rows: Vec<Vec<VerifyRow>> =
            if parallel { items.par_iter().map(run).collect() } else { items.iter().map(run).collect() };
        CatalogReport { rows: rows.into_iter().flatten().collect() }
    }
}

pub fn catalog_verify(parallel: bool) -> CatalogReport {
    catalog_load().verify(parallel)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// Quotient pair; the product is its certificate's, else the group order.
    Quotient { group_order: u64, certified: bool },
    Knorrer,
    Nonexample,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainStepReport {
    pub from: String,
    pub to: String,
    pub kind: StepKind,
    pub product: Option<CycloNumber>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainReport {
    pub steps: Vec<ChainStepReport>,
    /// `None` when some step has no product.
    pub total: Option<CycloNumber>,
    pub in_positive_rationals: bool,
    /// Group orders of the steps when every step is a quotient pair.
    pub group_orders: Option<Vec<u64>>,
    pub necessary_condition_fails: bool,
}

impl ChainReport {
    pub fn summary(&self) -> String {
        if self.necessary_condition_fails {
            return "necessary condition fails: product not in Q>0".into();
        }
        let total = self.total.as_ref().map_or("-".into(), |t| t.to_string());
        match &self.group_orders {
            Some(g) if !g.is_empty() => {
                let parts: Vec<String> = g.iter().map(u64::to_string).collect();
                format!("product {total} = {} in Q>0", parts.join("*"))
            }
            _ => format!("product {total}, in Q>0: {}", self.in_positive_rationals),
        }
    }
}

/// Multiplies the step products of a chain and checks adjacency.
pub fn chain_check(cat: &Catalog, c: &EquivalenceChain) -> Result<ChainReport, CatalogError> {
    let mut steps = Vec::new();
    let mut prev: Option<String> = None;
    for (i, s) in c.steps.iter().enumerate() {
        let (from, to, kind, product) = match s {
            ChainStep::Pair { from, to } => {
                let p = cat.pair_between(from, to).ok_or_else(|| CatalogError::UnknownPair(from.clone(), to.clone()))?;
                if p.nonexample {
                    (from.clone(), to.clone(), StepKind::Nonexample, None)
                } else {
                    let product = match &p.certificate {
                        Some(cert) => cert.dims.product.clone(),
                        None => CycloNumber::from_int(p.group_order as i64),
                    };
                    let kind = StepKind::Quotient { group_order: p.group_order, certified: p.certificate.is_some() };
                    (from.clone(), to.clone(), kind, Some(product))
                }
            }
            ChainStep::Knorrer { entry } => {
                let e = cat.entry(entry).ok_or_else(|| CatalogError::UnknownEntry(entry.clone()))?;
                let product = qdims(&knorrer_certificate(&e.potential)).ok().map(|d| d.product);
                (entry.clone(), entry.clone(), StepKind::Knorrer, product)
            }
        };
        for name in [&from, &to] {
            if cat.entry(name).is_none() {
                return Err(CatalogError::UnknownEntry(name.clone()));
            }
        }
        if let Some(p) = &prev {
            if *p != from {
                return Err(CatalogError::EndpointMismatch { step: i, expected: p.clone(), found: from });
            }
        }
        prev = Some(to.clone());
        steps.push(ChainStepReport { from, to, kind, product });
    }
    let total = steps.iter().try_fold(CycloNumber::one(), |acc, s| s.product.as_ref().map(|p| acc.mul(p)));
    let in_positive_rationals = total.as_ref().is_some_and(CycloNumber::is_positive_rational);
    let group_orders = steps
        .iter()
        .map(|s| match s.kind {
            StepKind::Quotient { group_order, .. } => Some(group_order),
            _ => None,
        })
        .collect();
    Ok(ChainReport {
        necessary_condition_fails: !in_positive_rationals,
        steps,
        total,
        in_positive_rationals,
        group_orders,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub name: String,
    pub vars: Vec<String>,
    pub potential: String,
    pub weights: BTreeMap<String, String>,
    pub expected_milnor: usize,
    pub provenance: Provenance,
    pub enabled: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairJson {
    pub source: String,
    pub target: String,
    pub vars: Vec<String>,
    pub potential: String,
    pub action: Option<ActionJson>,
    pub action_text: String,
    pub group_order: u64,
    pub linearization: Option<Vec<String>>,
    pub witness: Option<WitnessJson>,
    pub certificate: Option<CertificateJson>,
    pub origin_citation: String,
    pub enabled: bool,
    pub nonexample: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogJson {
    pub entries: Vec<EntryJson>,
    pub pairs: Vec<PairJson>,
    pub chains: Vec<EquivalenceChain>,
}

fn parse_in(s: &str, vars: &[String], k: u32) -> Result<Polynomial, JsonError> {
    let ring = crate::json::ring_of(vars)?;
    Ok(poly_parse(s, &ring, k)?)
}

impl CatalogJson {
    pub fn from_catalog(c: &Catalog) -> CatalogJson {
        CatalogJson {
            entries: c
                .entries
                .iter()
                .map(|e| EntryJson {
                    name: e.name.clone(),
                    vars: e.potential.ring().vars().to_vec(),
                    potential: e.potential.to_string(),
                    weights: e.weights.iter().map(|(k, q)| (k.clone(), rational_string(q))).collect(),
                    expected_milnor: e.expected_milnor,
                    provenance: e.provenance,
                    enabled: e.enabled,
                })
                .collect(),
            pairs: c
                .pairs
                .iter()
                .map(|p| PairJson {
                    source: p.source.clone(),
                    target: p.target.clone(),
                    vars: p.potential.ring().vars().to_vec(),
                    potential: p.potential.to_string(),
                    action: p.action.as_ref().map(ActionJson::from_action),
                    action_text: p.action_text.clone(),
                    group_order: p.group_order,
                    linearization: p.linearization.as_ref().map(|l| l.iter().map(|q| q.to_string()).collect()),
                    witness: p.witness.as_ref().map(WitnessJson::from_witness),
                    certificate: p.certificate.as_ref().map(CertificateJson::from_certificate),
                    origin_citation: p.origin_citation.clone(),
                    enabled: p.enabled,
                    nonexample: p.nonexample,
                })
                .collect(),
            chains: c.chains.clone(),
        }
    }

    /// Rebuilds the catalog, recomputing every certificate; stored
    /// certificate fields that disagree are an error.
    pub fn to_catalog(&self) -> Result<Catalog, JsonError> {
        let mut entries = Vec::new();
        for e in &self.entries {
            let potential = parse_in(&e.potential, &e.vars, 1)?;
            let w = e
                .weights
                .iter()
                .map(|(k, v)| {
                    crate::exactalg::parse_rational(v)
                        .map(|q| (k.clone(), q))
                        .ok_or_else(|| JsonError::Schema(format!("bad weight {v:?}")))
                })
                .collect::<Result<BTreeMap<_, _>, _>>()?;
            let weights = WeightSystem::new(w)?;
            weights.for_ring(potential.ring())?;
            entries.push(SingularityEntry {
                name: e.name.clone(),
                potential,
                weights,
                expected_milnor: e.expected_milnor,
                provenance: e.provenance,
                enabled: e.enabled,
            });
        }
        let mut pairs = Vec::new();
        for p in &self.pairs {
            let k = p.action.as_ref().map_or(1, |a| a.cyclotomic_order);
            let potential = parse_in(&p.potential, &p.vars, k)?;
            let action = p.action.as_ref().map(ActionJson::to_action).transpose()?;
            if let Some(a) = &action {
                if a.ring().vars() != potential.ring().vars() {
                    return Err(JsonError::Schema(format!("action variables differ for {}~{}", p.source, p.target)));
                }
            }
            let linearization = p
                .linearization
                .as_ref()
                .map(|l| l.iter().map(|s| parse_in(s, &p.vars, k)).collect::<Result<Vec<_>, _>>())
                .transpose()?;
            let certificate = match &p.certificate {
                None => None,
                Some(c) => {
                    let (cert, bad) = c.parse()?.recheck()?;
                    if !bad.is_empty() {
                        return Err(JsonError::Schema(format!(
                            "certificate of {}~{} disagrees on {}",
                            p.source,
                            p.target,
                            bad.join(", ")
                        )));
                    }
                    Some(cert)
                }
            };
            pairs.push(EquivalencePair {
                source: p.source.clone(),
                target: p.target.clone(),
                potential,
                action,
                action_text: p.action_text.clone(),
                group_order: p.group_order,
                linearization,
                witness: p.witness.as_ref().map(WitnessJson::to_witness).transpose()?,
                certificate,
                origin_citation: p.origin_citation.clone(),
                enabled: p.enabled,
                nonexample: p.nonexample,
            });
        }
        Ok(Catalog { entries, pairs, chains: self.chains.clone() })
    }
}

pub fn catalog_to_string(c: &Catalog) -> String {
    serde_json::to_string_pretty(&CatalogJson::from_catalog(c)).expect("serializable")
}

/// Loads a catalog file and re-verifies it.
pub fn catalog_from_str(s: &str, parallel: bool) -> Result<(Catalog, CatalogReport), JsonError> {
    let c = serde_json::from_str::<CatalogJson>(s)?.to_catalog()?;
    let report = c.verify(parallel);
    Ok((c, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mfcore::mf_verify;

    fn chain(steps: &[(&str, &str)]) -> EquivalenceChain {
        EquivalenceChain {
            name: "t".into(),
            steps: steps.iter().map(|(a, b)| ChainStep::Pair { from: a.to_string(), to: b.to_string() }).collect(),
        }
    }

    #[test]
    fn closed_form_factorizations() {
        for b in 2..=6 {
            let x = a_d_factorization(b);
            assert!(mf_verify(&x).passed(), "b = {b}");
            let c = certify_equivalence(&x, Some(2)).unwrap();
            assert!(c.accepted(), "b = {b}");
        }
    }

    #[test]
    fn only_the_z13_milnor_row_fails() {
        let rep = catalog_verify(true);
        let failing: Vec<(&str, &str)> = rep.failures().map(|r| (r.subject.as_str(), r.check.as_str())).collect();
        assert_eq!(failing, [("Z13", "milnor")]);
        let z13 = rep.rows.iter().find(|r| r.subject == "Z13" && r.check == "milnor").unwrap();
        assert_eq!(z13.detail, "expected 13, got 16");
        let q11 = rep.rows.iter().find(|r| r.subject == "Z13~Q11" && r.check == "descent").unwrap();
        assert!(q11.passed);
        assert!(q11.detail.contains("milnor f_hat = 11"));
    }

    #[test]
    fn parallel_and_serial_reports_agree() {
        assert_eq!(catalog_verify(true), catalog_verify(false));
    }

    #[test]
    fn injected_wrong_milnor_fails_only_its_row() {
        let mut c = catalog_load();
        c.entries.iter_mut().find(|e| e.name == "E7").unwrap().expected_milnor = 8;
        let base = catalog_load().verify(false);
        let rep = c.verify(false);
        let changed: Vec<_> = rep.rows.iter().zip(&base.rows).filter(|(a, b)| a != b).map(|(a, _)| a).collect();
        assert_eq!(changed.len(), 1);
        assert_eq!((changed[0].subject.as_str(), changed[0].check.as_str(), changed[0].passed), ("E7", "milnor", false));
    }

    #[test]
    fn built_in_chains() {
        let c = catalog_load();
        let r = chain_check(&c, &chain(&[("A5", "D4"), ("D4", "A2xA2")])).unwrap();
        assert_eq!(r.total, Some(CycloNumber::from_int(6)));
        assert!(r.in_positive_rationals);
        assert_eq!(r.group_orders, Some(vec![2, 3]));
        let empty = chain_check(&c, &chain(&[])).unwrap();
        assert_eq!(empty.total, Some(CycloNumber::one()));
        for (a, e) in [("A11", "E6"), ("A17", "E7"), ("A29", "E8")] {
            let r = chain_check(&c, &chain(&[(a, e)])).unwrap();
            assert!(r.necessary_condition_fails);
            assert_eq!(r.summary(), "necessary condition fails: product not in Q>0");
        }
        let r = chain_check(&c, &chain(&[("A5", "D4"), ("D4", "A2xA2"), ("A2xA2", "D4"), ("D4", "A5"), ("A5", "A11")]));
        assert!(matches!(r, Err(CatalogError::UnknownPair(..))));
    }

    #[test]
    fn endpoint_mismatch_is_an_error() {
        let c = catalog_load();
        let r = chain_check(&c, &chain(&[("A5", "D4"), ("A2xA2", "D4")]));
        assert!(matches!(r, Err(CatalogError::EndpointMismatch { step: 1, .. })));
    }

    #[test]
    fn knorrer_steps_multiply() {
        let c = catalog_load();
        let ch = EquivalenceChain {
            name: "k".into(),
            steps: vec![ChainStep::Knorrer { entry: "A2".into() }, ChainStep::Knorrer { entry: "A2".into() }],
        };
        let r = chain_check(&c, &ch).unwrap();
        let p = r.steps[0].product.clone().unwrap();
        assert!(p == CycloNumber::one() || p == CycloNumber::from_int(-1));
        assert_eq!(r.total, Some(CycloNumber::one()));
    }

    #[test]
    fn json_round_trip_reverifies() {
        let c = catalog_load();
        let s = catalog_to_string(&c);
        let (back, rep) = catalog_from_str(&s, true).unwrap();
        assert_eq!(catalog_to_string(&back), s);
        assert_eq!(rep, c.verify(true));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys, ["chains", "entries", "pairs"]);
    }

    #[test]
    fn forged_certificate_is_rejected() {
        let mut j = CatalogJson::from_catalog(&catalog_load());
        let cert = j.pairs[0].certificate.as_mut().unwrap();
        cert.product = "3".into();
        assert!(j.to_catalog().is_err());
    }
}
