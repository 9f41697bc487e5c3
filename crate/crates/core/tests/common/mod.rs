//! Seeded suites of graded Koszul factorizations shared by the integration tests.
#![allow(dead_code)]

use mfkit::exactalg::{poly_parse, rat, Polynomial, Ring, WeightSystem};
use mfkit::mfcore::{koszul, MatrixFactorization};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Rank-one building blocks of `V − U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// `y^k − x^k` split as `(y − x)·(...)`.
    Diagonal { k: u32 },
    /// `y^k − x^k` split as `(y^a − x^a)·(...)`, `a | k`.
    Power { k: u32, a: u32 },
    /// `y^k − x^k` split as `Π_{i<a} (y − ζ_k^i x)` times the other roots.
    RootSet { k: u32, a: u32 },
    /// `y^k − x^(jk)` split as `(y − x^j)·(...)`.
    Mixed { k: u32, j: u32 },
    /// `y^(jk) − x^k` split as `(y^j − x)·(...)`.
    MixedReversed { k: u32, j: u32 },
    /// `y1·y2` with no source variable.
    TargetProduct,
    /// `−x1·x2` with no target variable.
    SourceProduct,
    /// `y^2` with no source variable.
    TargetSquare,
    /// `−x^2` with no target variable.
    SourceSquare,
}

impl Block {
    /// (source, target) variable counts.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Block::TargetProduct => (0, 2),
            Block::SourceProduct => (2, 0),
            Block::TargetSquare => (0, 1),
            Block::SourceSquare => (1, 0),
            _ => (1, 1),
        }
    }
}

/// The pair's first factor is scaled by `scale` and the second by its inverse.
#[derive(Clone, Debug)]
pub struct Sample {
    pub blocks: Vec<(Block, (i64, i64))>,
}

pub const MAX_VARS: usize = 3;

pub fn random_sample(rng: &mut ChaCha8Rng) -> Sample {
    let wanted = rng.gen_range(1..=3);
    let mut blocks = Vec::new();
    let (mut ns, mut nt) = (0, 0);
    for _ in 0..8 {
        if blocks.len() == wanted {
            break;
        }
        let b = match rng.gen_range(0..20) {
            0..=4 => Block::Diagonal { k: rng.gen_range(2..=5) },
            5..=8 => {
                let (k, a) = [(3, 2), (4, 2), (4, 3), (5, 2), (5, 3)][rng.gen_range(0..5)];
                Block::RootSet { k, a }
            }
            9..=10 => {
                let (k, a) = [(4, 2), (6, 3)][rng.gen_range(0..2)];
                Block::Power { k, a }
            }
            11..=13 => Block::TargetProduct,
            14 => Block::SourceProduct,
            15 => Block::Mixed { k: rng.gen_range(2..=3), j: 2 },
            16 => Block::MixedReversed { k: rng.gen_range(2..=3), j: 2 },
            17 => Block::TargetSquare,
            _ => Block::SourceSquare,
        };
        let (s, t) = b.arity();
        if ns + s > MAX_VARS || nt + t > MAX_VARS {
            continue;
        }
        ns += s;
        nt += t;
        let scale = [(1, 1), (2, 1), (-1, 1), (1, 3), (-3, 2)][rng.gen_range(0..5)];
        blocks.push((b, scale));
    }
    if blocks.is_empty() {
        blocks.push((Block::Diagonal { k: 2 }, (1, 1)));
    }
    Sample { blocks }
}

pub fn suite(seed: u64, n: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_sample(&mut rng)).collect()
}

impl Sample {
    /// Source variables `x{tag}{i}`, target variables `y{tag}{i}`, degree 1.
    pub fn build(&self, tag: &str) -> MatrixFactorization {
        let mut sv = Vec::new();
        let mut tv = Vec::new();
        let mut ws = Vec::new();
        let mut wt = Vec::new();
        let mut terms: Vec<(String, String, String, String)> = Vec::new();
        let mut orders: Vec<u32> = Vec::new();
        for (i, (b, _)) in self.blocks.iter().enumerate() {
            let x = format!("x{tag}{i}");
            let y = format!("y{tag}{i}");
            let sum = |hi: &str, lo: &str, k: u32| -> String {
                (0..k).map(|e| format!("{hi}^{}*{lo}^{}", k - 1 - e, e)).collect::<Vec<_>>().join(" + ")
            };
            orders.push(match *b {
                Block::RootSet { k, .. } => k,
                _ => 1,
            });
            match *b {
                Block::RootSet { k, a } => {
                    ws.push((x.clone(), rat(1, k as i64)));
                    wt.push((y.clone(), rat(1, k as i64)));
                    let roots = |r: std::ops::Range<u32>| r.map(|i| format!("({y} - zeta{k}^{i}*{x})")).collect::<Vec<_>>().join("*");
                    terms.push((roots(0..a), roots(a..k), format!("{x}^{k}"), format!("{y}^{k}")));
                }
                Block::Diagonal { k } => {
                    ws.push((x.clone(), rat(1, k as i64)));
                    wt.push((y.clone(), rat(1, k as i64)));
                    terms.push((format!("{y} - {x}"), sum(&y, &x, k), format!("{x}^{k}"), format!("{y}^{k}")));
                }
                Block::Mixed { k, j } => {
                    ws.push((x.clone(), rat(1, (j * k) as i64)));
                    wt.push((y.clone(), rat(1, k as i64)));
                    let xj = format!("({x}^{j})");
                    terms.push((format!("{y} - {xj}"), sum(&y, &xj, k), format!("{x}^{}", j * k), format!("{y}^{k}")));
                }
                Block::MixedReversed { k, j } => {
                    ws.push((x.clone(), rat(1, k as i64)));
                    wt.push((y.clone(), rat(1, (j * k) as i64)));
                    let yj = format!("({y}^{j})");
                    terms.push((format!("{yj} - {x}"), sum(&yj, &x, k), format!("{x}^{k}"), format!("{y}^{}", j * k)));
                }
                Block::Power { k, a } => {
                    ws.push((x.clone(), rat(1, k as i64)));
                    wt.push((y.clone(), rat(1, k as i64)));
                    let (ya, xa) = (format!("({y}^{a})"), format!("({x}^{a})"));
                    terms.push((format!("{ya} - {xa}"), sum(&ya, &xa, k / a), format!("{x}^{k}"), format!("{y}^{k}")));
                }
                Block::TargetProduct => {
                    let y2 = format!("{y}b");
                    wt.push((y.clone(), rat(1, 2)));
                    wt.push((y2.clone(), rat(1, 2)));
                    terms.push((y.clone(), y2.clone(), String::new(), format!("{y}*{y2}")));
                    tv.push(y.clone());
                    tv.push(y2);
                    continue;
                }
                Block::SourceProduct => {
                    let x2 = format!("{x}b");
                    ws.push((x.clone(), rat(1, 2)));
                    ws.push((x2.clone(), rat(1, 2)));
                    terms.push((x.clone(), format!("-{x2}"), format!("{x}*{x2}"), String::new()));
                    sv.push(x.clone());
                    sv.push(x2);
                    continue;
                }
                Block::TargetSquare => {
                    wt.push((y.clone(), rat(1, 2)));
                    terms.push((y.clone(), y.clone(), String::new(), format!("{y}^2")));
                }
                Block::SourceSquare => {
                    ws.push((x.clone(), rat(1, 2)));
                    terms.push((x.clone(), format!("-{x}"), format!("{x}^2"), String::new()));
                }
            }
            if ws.last().is_some_and(|(v, _)| *v == x) {
                sv.push(x);
            }
            if wt.last().is_some_and(|(v, _)| *v == y) {
                tv.push(y);
            }
        }
        let all: Vec<String> = sv.iter().chain(&tv).cloned().collect();
        let ring = Ring::new(&all);
        let pk = |s: &str, k: u32| poly_parse(if s.is_empty() { "0" } else { s }, &ring, k).expect("generated polynomial");
        let p = |s: &str| pk(s, 1);
        let pairs: Vec<(Polynomial, Polynomial)> = terms
            .iter()
            .zip(&self.blocks)
            .zip(&orders)
            .map(|(((a, b, _, _), (_, (n, d))), &k)| {
                let c = mfkit::exactalg::CycloNumber::from_ratio(*n, *d);
                (pk(a, k).scale(&c), pk(b, k).scale(&c.inv().expect("nonzero")))
            })
            .collect();
        let u = terms.iter().fold(Polynomial::zero(&ring), |acc, t| &acc + &p(&t.2));
        let v = terms.iter().fold(Polynomial::zero(&ring), |acc, t| &acc + &p(&t.3));
        let u = u.restrict(&Ring::new(&sv));
        let v = v.restrict(&Ring::new(&tv));
        let w = |list: Vec<(String, BigRational)>| WeightSystem::new(list.into_iter().collect()).expect("positive");
        koszul(&sv, &tv, &pairs, &u, &v, Some((&w(ws), &w(wt), &rat(1, 1)))).expect("pairs sum to V - U")
    }

    pub fn arity(&self) -> (usize, usize) {
        self.blocks.iter().fold((0, 0), |(s, t), (b, _)| (s + b.arity().0, t + b.arity().1))
    }
}
