use std::sync::Arc;

use super::cyclo::CycloNumber;
use super::poly::{Polynomial, Ring};

/// Dense matrix of polynomials on a common ring. Zero-sized dimensions are
/// allowed (rank-0 blocks).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    ring: Arc<Ring>,
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zero(ring: &Arc<Ring>, rows: usize, cols: usize) -> Self {
        PolyMatrix { ring: ring.clone(), rows, cols, entries: vec![Polynomial::zero(ring); rows * cols] }
    }

    pub fn identity(ring: &Arc<Ring>, n: usize) -> Self {
        Self::scalar(ring, n, &Polynomial::one(ring))
    }

    pub fn scalar(ring: &Arc<Ring>, n: usize, p: &Polynomial) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, p.clone());
        }
        m
    }

    pub fn from_rows(ring: &Arc<Ring>, rows: Vec<Vec<Polynomial>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        PolyMatrix { ring: ring.clone(), rows: r, cols: c, entries: rows.into_iter().flatten().collect() }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn row_vecs(&self) -> Vec<Vec<Polynomial>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Polynomial)> {
        self.entries.iter().enumerate().map(move |(k, p)| (k / self.cols.max(1), k % self.cols.max(1), p))
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> PolyMatrix {
        let entries: Vec<Polynomial> = self.entries.iter().map(f).collect();
        let ring = entries.first().map_or_else(|| self.ring.clone(), |p| p.ring().clone());
        PolyMatrix { ring, rows: self.rows, cols: self.cols, entries }
    }

    pub fn try_map<E>(&self, ring: &Arc<Ring>, f: impl Fn(&Polynomial) -> Result<Polynomial, E>) -> Result<PolyMatrix, E> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>, E>>()?;
        Ok(PolyMatrix { ring: ring.clone(), rows: self.rows, cols: self.cols, entries })
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut t = PolyMatrix::zero(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn neg(&self) -> PolyMatrix {
        self.map(|p| -p)
    }

    pub fn scale(&self, c: &CycloNumber) -> PolyMatrix {
        self.map(|p| p.scale(c))
    }

    pub fn add(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch in add");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        PolyMatrix { ring: self.ring.clone(), rows: self.rows, cols: self.cols, entries }
    }

    pub fn sub(&self, other: &PolyMatrix) -> PolyMatrix {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &PolyMatrix) -> PolyMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let mut out = PolyMatrix::zero(&self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = &out.entries[i * other.cols + j] + &(a * b);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    /// Entrywise partial derivative by the i-th ring variable.
    pub fn derivative(&self, i: usize) -> PolyMatrix {
        self.map(|p| p.derivative(i))
    }

    pub fn trace(&self) -> Polynomial {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).fold(Polynomial::zero(&self.ring), |acc, i| &acc + self.get(i, i))
    }

    /// Determinant by cofactor expansion along the first row.
    pub fn det(&self) -> Polynomial {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let idx: Vec<usize> = (0..self.cols).collect();
        self.det_minor(0, &idx)
    }

    fn det_minor(&self, row: usize, cols: &[usize]) -> Polynomial {
        if cols.is_empty() {
            return Polynomial::one(&self.ring);
        }
        if cols.len() == 1 {
            return self.get(row, cols[0]).clone();
        }
        let mut acc = Polynomial::zero(&self.ring);
        for (k, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a * &self.det_minor(row + 1, &rest);
            acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
        }
        acc
    }

    /// Classical adjugate: adj(A)·A = A·adj(A) = det(A)·Id.
    pub fn adjugate(&self) -> PolyMatrix {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = PolyMatrix::zero(&self.ring, n, n);
        if n == 1 {
            out.set(0, 0, Polynomial::one(&self.ring));
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let mut minor = PolyMatrix::zero(&self.ring, n - 1, n - 1);
                for (ri, r) in (0..n).filter(|&r| r != j).enumerate() {
                    for (ci, c) in (0..n).filter(|&c| c != i).enumerate() {
                        minor.set(ri, ci, self.get(r, c).clone());
                    }
                }
                let d = minor.det();
                out.set(i, j, if (i + j) % 2 == 0 { d } else { -&d });
            }
        }
        out
    }

    /// Kronecker product, row-major over (self index, other index).
    pub fn kron(&self, other: &PolyMatrix) -> PolyMatrix {
        let mut out = PolyMatrix::zero(&self.ring, self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Submatrix on the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PolyMatrix {
        let mut out = PolyMatrix::zero(&self.ring, rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Block matrix [[a, b], [c, d]].
    pub fn block(a: &PolyMatrix, b: &PolyMatrix, c: &PolyMatrix, d: &PolyMatrix) -> PolyMatrix {
        assert_eq!(a.rows, b.rows);
        assert_eq!(c.rows, d.rows);
        assert_eq!(a.cols, c.cols);
        assert_eq!(b.cols, d.cols);
        let ring = a.ring.clone();
        let mut out = PolyMatrix::zero(&ring, a.rows + c.rows, a.cols + b.cols);
        for (blk, r0, c0) in [(a, 0, 0), (b, 0, a.cols), (c, a.rows, 0), (d, a.rows, a.cols)] {
            for i in 0..blk.rows {
                for j in 0..blk.cols {
                    out.set(r0 + i, c0 + j, blk.get(i, j).clone());
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }
}
