//! Double-double arithmetic (about 32 significant digits) for the few kernels where
//! float64 cancellation is fatal: symplectic invariants and the fidelity of
//! strongly squeezed states. Only the operations those kernels need are provided.

use nalgebra::DMatrix;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn max0(self) -> Self {
        if self.is_sign_negative() {
            Dd::ZERO
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = Dd::new(self.hi.sqrt());
        // one Newton step doubles the precision of the float64 seed
        x + (self - x * x) / (x * 2.0)
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, o: f64) -> Dd {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Dense square matrix in double-double, row-major.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DdMatrix {
    dim: usize,
    data: Vec<Dd>,
}

impl DdMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Dd::ZERO; dim * dim],
        }
    }

    pub fn from_f64(m: &DMatrix<f64>) -> Self {
        let dim = m.nrows();
        let mut out = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                out.set(i, j, Dd::new(m[(i, j)]));
            }
        }
        out
    }

    /// The symplectic form on `dim / 2` modes.
    pub fn omega(dim: usize) -> Self {
        let mut out = Self::zeros(dim);
        for k in 0..dim / 2 {
            out.set(2 * k, 2 * k + 1, Dd::ONE);
            out.set(2 * k + 1, 2 * k, -Dd::ONE);
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Dd {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Dd) {
        self.data[i * self.dim + j] = v;
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Dd::ZERO;
                for k in 0..n {
                    acc = acc + self.get(i, k) * o.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn trace(&self) -> Dd {
        (0..self.dim).fold(Dd::ZERO, |acc, i| acc + self.get(i, i))
    }

    /// LU factorization with partial pivoting; returns `None` for an exactly singular matrix.
    fn lu(&self) -> Option<(Self, Vec<usize>, bool)> {
        let n = self.dim;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut odd = false;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| {
                    a.get(x, col)
                        .abs()
                        .hi
                        .partial_cmp(&a.get(y, col).abs().hi)
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a.get(pivot, col).hi == 0.0 {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = a.get(col, j);
                    a.set(col, j, a.get(pivot, j));
                    a.set(pivot, j, tmp);
                }
                perm.swap(col, pivot);
                odd = !odd;
            }
            let p = a.get(col, col);
            for row in col + 1..n {
                let factor = a.get(row, col) / p;
                a.set(row, col, factor);
                for j in col + 1..n {
                    let v = a.get(row, j) - factor * a.get(col, j);
                    a.set(row, j, v);
                }
            }
        }
        Some((a, perm, odd))
    }

    pub fn det(&self) -> Dd {
        match self.lu() {
            None => Dd::ZERO,
            Some((lu, _, odd)) => {
                let d = (0..self.dim).fold(Dd::ONE, |acc, i| acc * lu.get(i, i));
                if odd {
                    -d
                } else {
                    d
                }
            }
        }
    }

    /// Solves `self · X = rhs` column by column.
    pub fn solve(&self, rhs: &Self) -> Option<Self> {
        let n = self.dim;
        let (lu, perm, _) = self.lu()?;
        let mut out = Self::zeros(n);
        for c in 0..n {
            let mut y = vec![Dd::ZERO; n];
            for i in 0..n {
                let mut v = rhs.get(perm[i], c);
                for (k, yk) in y.iter().enumerate().take(i) {
                    v = v - lu.get(i, k) * *yk;
                }
                y[i] = v;
            }
            for i in (0..n).rev() {
                let mut v = y[i];
                for k in i + 1..n {
                    v = v - lu.get(i, k) * out.get(k, c);
                }
                out.set(i, c, v / lu.get(i, i));
            }
        }
        Some(out)
    }

    /// Quadratic form `xᵀ · self⁻¹ · x`.
    pub fn inverse_quadratic_form(&self, x: &[f64]) -> Option<Dd> {
        let n = self.dim;
        let mut rhs = Self::zeros(n);
        for (i, xi) in x.iter().enumerate() {
            rhs.set(i, 0, Dd::new(*xi));
        }
        let sol = self.solve(&rhs)?;
        Some(
            x.iter()
                .enumerate()
                .fold(Dd::ZERO, |acc, (i, xi)| acc + sol.get(i, 0) * *xi),
        )
    }
}

/// Squared symplectic eigenvalues of a CM with one or two modes, largest first.
///
/// Uses the characteristic polynomial of `ΩV`: for two modes the squared eigenvalues
/// are the roots of `x² - p x + q` with `p = -tr((ΩV)²)/2` and `q = det V`.
pub(crate) fn squared_symplectic_spectrum(v: &DdMatrix) -> Vec<Dd> {
    match v.dim() {
        2 => vec![v.det()],
        4 => {
            let ov = DdMatrix::omega(4).mul(v);
            let p = -(ov.mul(&ov).trace() * 0.5);
            let q = v.det();
            quadratic_roots(p, q).to_vec()
        }
        _ => unreachable!("only one- and two-mode matrices reach the double-double kernel"),
    }
}

/// Roots of `x² - p x + q` (both assumed real and non-negative), larger first. The
/// smaller root is taken as `q / larger` to avoid cancellation.
pub(crate) fn quadratic_roots(p: Dd, q: Dd) -> [Dd; 2] {
    let disc = (p * p - q * 4.0).max0();
    let big = (p + disc.sqrt()) * 0.5;
    if big.hi <= 0.0 {
        return [Dd::ZERO, Dd::ZERO];
    }
    [big, q / big]
}
