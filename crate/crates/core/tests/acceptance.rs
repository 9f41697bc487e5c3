//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use mfkit::catalog::{catalog_load, chain_check};
use mfkit::equivariance::{action_verify, invariance_check};
use mfkit::exactalg::{poly_parse, CycloNumber, Polynomial, Ring, WeightSystem};
use mfkit::groebner::{buchberger, GbConfig, MonomialOrder};
use mfkit::jacobi::{milnor_number, JacobiData};
use mfkit::mfcore::{dagger, diagonal_delta, external_tensor, knorrer_certificate};
use mfkit::qdim::{qdims, QDimResult};
use mfkit::search::{search, Budget, SearchTarget};
use num_rational::BigRational;

type Outcome = Result<String, String>;

const SUITE_SIZE: usize = 80;

fn p(s: &str) -> Polynomial {
    let mut vars: Vec<String> = s
        .split(|c: char| !c.is_ascii_alphanumeric() && c != '_')
        .filter(|t| t.starts_with(|c: char| c.is_ascii_alphabetic()))
        .map(String::from)
        .collect();
    vars.sort();
    vars.dedup();
    poly_parse(s, &Ring::new(&vars), 1).unwrap()
}

fn dims(x: &mfkit::mfcore::MatrixFactorization) -> Result<QDimResult, String> {
    qdims(x).map_err(|e| e.to_string())
}

fn unit_law() -> Outcome {
    let ws = ["x^2", "x^3", "x^4 + y^2", "x^5 + y^2", "x^6 + y^2", "x^3 + x*y^2", "x^3 + y^3", "x^3 + y^4"];
    for w in ws {
        let d = dims(&diagonal_delta(&p(w)))?;
        if !(d.left.is_one() && d.right.is_one()) {
            return Err(format!("{w}: dims {} {}", d.left, d.right));
        }
    }
    Ok(format!("{} potentials, both dimensions 1", ws.len()))
}

fn adjunction_symmetry() -> Outcome {
    let suite = common::suite(common::DEFAULT_SEED, SUITE_SIZE);
    let mut nonzero = 0;
    for (i, s) in suite.iter().enumerate() {
        let x = s.build("");
        let l = dims(&x)?.left;
        let r = dims(&dagger(&x))?.right;
        if l != r {
            return Err(format!("sample {i} {:?}: dim_l {l}, dim_r of dagger {r}", s.blocks));
        }
        nonzero += usize::from(!l.is_zero());
    }
    Ok(format!("{} Koszul factorizations, {nonzero} with nonzero dimension", suite.len()))
}

fn multiplicativity() -> Outcome {
    let suite = common::suite(common::DEFAULT_SEED, SUITE_SIZE);
    let mut checked = 0;
    for (i, a) in suite.iter().enumerate() {
        let fits = |b: &&common::Sample| {
            let (x, y) = (a.arity(), b.arity());
            x.0 + y.0 <= common::MAX_VARS && x.1 + y.1 <= common::MAX_VARS
        };
        let Some(b) = suite.iter().cycle().skip(i + 1).take(suite.len() - 1).find(fits) else {
            continue;
        };
        let (x1, x2) = (a.build("a"), b.build("b"));
        let t = dims(&external_tensor(&x1, &x2).map_err(|e| e.to_string())?)?;
        let (d1, d2) = (dims(&x1)?, dims(&x2)?);
        if t.left != d2.left.mul(&d1.left) || t.right != d2.right.mul(&d1.right) {
            return Err(format!("sample {i}: tensor dims {} {}, factors {} {} and {} {}", t.left, t.right, d1.left, d1.right, d2.left, d2.right));
        }
        checked += 1;
    }
    if checked < 50 {
        return Err(format!("only {checked} tensor products in the variable bound"));
    }
    Ok(format!("{checked} external tensor products within 3+3 variables, left and right"))
}

/// `Π (1/q_i − 1)` for degree-1 weights.
fn weight_formula(f: &Polynomial) -> Option<BigRational> {
    let w = WeightSystem::infer(f)?;
    Some(w.iter().fold(BigRational::from_integer(1.into()), |acc, (_, q)| acc * (q.recip() - BigRational::from_integer(1.into()))))
}

fn milnor_numbers() -> Outcome {
    let cfg = GbConfig::default();
    let mut cases: Vec<(String, String, usize)> = Vec::new();
    for n in 1..=10 {
        cases.push((format!("A{n}"), format!("x^{} + y^2", n + 1), n));
    }
    for n in 3..=10 {
        cases.push((format!("D{n}"), format!("x^{} + x*y^2", n - 1), n));
    }
    cases.push(("E6".into(), "x^3 + y^4".into(), 6));
    cases.push(("E7".into(), "x^3 + x*y^3".into(), 7));
    cases.push(("E8".into(), "x^3 + y^5".into(), 8));
    cases.push(("Z13".into(), "x1^6*x2 + x2^3 + x3^2".into(), 13));
    let mut bad = Vec::new();
    for (name, f, mu) in &cases {
        let got = milnor_number(&p(f), &cfg).map_err(|e| format!("{name}: {e}"))?;
        let formula = weight_formula(&p(f)).map(|q| q.to_string()).unwrap_or_default();
        if got.to_string() != formula {
            return Err(format!("{name}: Groebner count {got} disagrees with the weight formula {formula}"));
        }
        if got != *mu {
            bad.push(format!("{name} ({f}): expected {mu}, got {got}"));
        }
    }
    if bad.is_empty() {
        Ok(format!("{} potentials", cases.len()))
    } else {
        Err(bad.join("; "))
    }
}

fn action_suite() -> Outcome {
    let cat = catalog_load();
    let mut n = 0;
    for pair in cat.pairs.iter().filter(|q| !q.nonexample) {
        let a = pair.action.as_ref().ok_or_else(|| format!("{}~{}: no action", pair.source, pair.target))?;
        let rep = action_verify(a).map_err(|e| e.to_string())?;
        let order = a.group_order().map_err(|e| e.to_string())?;
        if !rep.passed() || order as u64 != pair.group_order {
            return Err(format!("{}: order {order}, report {rep:?}", pair.action_text));
        }
        if !invariance_check(&pair.potential, a).map_err(|e| e.to_string())? {
            return Err(format!("{} does not fix {}", pair.action_text, pair.potential));
        }
        n += 1;
    }
    let quoted = ["(u,v) -> (-u,-v)", "(y1,y2) -> (zeta3*y1, zeta3^-1*y2)", "(x1,x2,x3) -> (-x1,x2,-x3)", "(y1,y2,y3) -> (-y1,y2,-y3)", "(u,v,w) -> (-u,v,-w-u^4)", "(u,v,w) -> (-u,v,-w+u^8)", "(x,y,z) -> (-x,y,-z)"];
    for q in quoted {
        if !cat.pairs.iter().any(|x| x.action_text == q) {
            return Err(format!("action {q} missing from the catalog"));
        }
    }
    Ok(format!("{n} actions verified, each fixing its potential"))
}

fn target(u: &str, v: &str, ws: &[i64], wt: &[i64], d: i64) -> SearchTarget {
    let (su, sv) = (p(u), p(v));
    SearchTarget {
        weights_source: WeightSystem::from_ints(su.ring().vars(), ws).unwrap(),
        weights_target: WeightSystem::from_ints(sv.ring().vars(), wt).unwrap(),
        u: su,
        v: sv,
        degree: BigRational::from_integer(d.into()),
        group_order_claim: Some(2),
    }
}

fn mckay_product_law() -> Outcome {
    let mut out = Vec::new();
    for (name, t) in [
        ("D4 - A5", target("u^6 + v^2", "x^3 + x*y^2", &[1, 3], &[2, 2], 6)),
        ("D3 - A3", target("u^4 + v^2", "x^2 + x*y^2", &[1, 2], &[2, 1], 4)),
    ] {
        let start = Instant::now();
        let r = search(&t, &Budget::default()).map_err(|e| format!("{name}: {e}"))?;
        let c = r.accepted().next().ok_or_else(|| format!("{name}: no certificate, stats {:?}", r.stats))?;
        if c.dims.product != CycloNumber::from_int(2) || c.mf.ranks() != (2, 2) || c.mf.grading().is_none() {
            return Err(format!("{name}: product {}", c.dims.product));
        }
        out.push(format!("{name}: dims {} {} in {} ms", c.dims.left, c.dims.right, start.elapsed().as_millis()));
    }
    Ok(out.join("; "))
}

fn knorrer() -> Outcome {
    let mut out = Vec::new();
    for w in ["x^2", "x^3", "x^3 + y^3"] {
        let d = dims(&knorrer_certificate(&p(w)))?;
        let unit = d.product == CycloNumber::one() || d.product == CycloNumber::from_int(-1);
        if !(d.left.inv().is_some() && d.right.inv().is_some() && unit) {
            return Err(format!("{w}: dims {} {}", d.left, d.right));
        }
        out.push(format!("{w}: product {}", d.product));
    }
    Ok(out.join("; "))
}

fn nonexample_discriminant() -> Outcome {
    let cat = catalog_load();
    let chain = |n: &str| cat.chains.iter().find(|c| c.name == n).ok_or(format!("chain {n} missing"));
    let r = chain_check(&cat, chain("A5-D4-A2xA2")?).map_err(|e| e.to_string())?;
    if r.total != Some(CycloNumber::from_int(6)) || !r.in_positive_rationals {
        return Err(format!("A5-D4-A2xA2: {}", r.summary()));
    }
    for n in ["A11-E6", "A17-E7", "A29-E8"] {
        let r = chain_check(&cat, chain(n)?).map_err(|e| e.to_string())?;
        if !r.necessary_condition_fails {
            return Err(format!("{n} not flagged"));
        }
    }
    Ok(format!("A5-D4-A2xA2 {}; three nonexamples flagged", r.summary()))
}

fn oracle_cross_checks() -> Outcome {
    let cfg = GbConfig::default();
    let cat = catalog_load();
    for e in &cat.entries {
        let j = JacobiData::build(&e.potential, &e.weights, &cfg).map_err(|x| format!("{}: {x}", e.name))?;
        let res = j.residue(j.hessian());
        if res != CycloNumber::from_int(j.milnor() as i64) {
            return Err(format!("{}: residue of the Hessian {res}, milnor {}", e.name, j.milnor()));
        }
        let ring = e.potential.ring();
        let partials: Vec<Polynomial> = (0..ring.arity()).map(|i| e.potential.derivative(i)).collect();
        let lex = buchberger(ring, &partials, MonomialOrder::Lex, &cfg).map_err(|x| x.to_string())?;
        let elim = buchberger(ring, &partials, MonomialOrder::Elimination { block: 1 }, &cfg).map_err(|x| x.to_string())?;
        let sizes = [Some(j.milnor()), lex.quotient_basis().dimension(), elim.quotient_basis().dimension()];
        if sizes.iter().any(|s| *s != sizes[0]) {
            return Err(format!("{}: quotient basis sizes {sizes:?}", e.name));
        }
    }
    Ok(format!("{} catalog entries, grevlex/lex/elimination agree", cat.entries.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 9] = [
        ("1 unit law", unit_law, Duration::from_secs(10)),
        ("2 adjunction symmetry", adjunction_symmetry, Duration::from_secs(60)),
        ("3 multiplicativity", multiplicativity, Duration::from_secs(60)),
        ("4 Milnor numbers", milnor_numbers, Duration::from_secs(10)),
        ("5 action suite", action_suite, Duration::from_secs(5)),
        ("6 product law from search", mckay_product_law, Duration::from_secs(600)),
        ("7 Knorrer certificates", knorrer, Duration::from_secs(30)),
        ("8 nonexample discriminant", nonexample_discriminant, Duration::from_secs(1)),
        ("9 oracle cross-checks", oracle_cross_checks, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over the {} s limit", limit.as_secs())),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("{} criterion {name} ({:.2} s): {detail}", if ok { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
}
