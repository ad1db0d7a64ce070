//! Pfaffians of complex skew-symmetric matrices and log-domain determinants.

use std::fmt;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::{Real, C};

/// Number stored as `exp(log_magnitude) * phase`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogScaled<T> {
    pub log_magnitude: T,
    pub phase: C<T>,
}

impl<T: Real> LogScaled<T> {
    pub fn one() -> Self {
        Self { log_magnitude: T::zero(), phase: C::one() }
    }

    /// Exact zero, encoded by `log_magnitude = −∞`.
    pub fn zero() -> Self {
        Self { log_magnitude: T::neg_infinity(), phase: C::one() }
    }

    pub fn from_value(z: C<T>) -> Self {
        let r = z.norm();
        if r == T::zero() {
            Self::zero()
        } else {
            Self { log_magnitude: r.ln(), phase: z / r }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == T::neg_infinity()
    }

    pub fn value(&self) -> C<T> {
        if self.is_zero() {
            C::zero()
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let p = self.phase * other.phase;
        Self { log_magnitude: self.log_magnitude + other.log_magnitude, phase: p / p.norm() }
    }

    pub fn mul_value(&self, z: C<T>) -> Self {
        self.mul(&Self::from_value(z))
    }

    pub fn neg(&self) -> Self {
        Self { log_magnitude: self.log_magnitude, phase: -self.phase }
    }

    pub fn powi(&self, n: i32) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::one() } else { Self::zero() };
        }
        let p = self.phase.powi(n);
        Self { log_magnitude: self.log_magnitude * T::from_int(n as i64), phase: p / p.norm() }
    }

    /// Natural log of the real part, assuming a positive real value.
    pub fn ln_real(&self) -> T {
        self.log_magnitude + self.phase.re.ln()
    }

    /// Angle of the phase.
    pub fn arg(&self) -> T {
        self.phase.arg()
    }

    /// Relative distance between two values, robust to tiny magnitudes.
    pub fn rel_diff(&self, other: &Self) -> T {
        if self.is_zero() || other.is_zero() {
            return if self.is_zero() && other.is_zero() { T::zero() } else { T::one() };
        }
        let scale = self.log_magnitude.max(other.log_magnitude);
        let a = self.phase * (self.log_magnitude - scale).exp();
        let b = other.phase * (other.log_magnitude - scale).exp();
        (a - b).norm()
    }
}

impl<T: Real> fmt::Display for LogScaled<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({}) * ({} + {}i)", self.log_magnitude, self.phase.re, self.phase.im)
    }
}

/// Complex skew-symmetric matrix of even order; only the strict upper
/// triangle is stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix<T> {
    order: usize,
    upper: Vec<C<T>>,
}

impl<T: Real> SkewMatrix<T> {
    pub fn zeros(order: usize) -> Result<Self> {
        if order == 0 || order % 2 == 1 {
            return Err(Error::Dimension(format!("skew matrix order {order} must be even and positive")));
        }
        Ok(Self { order, upper: vec![C::zero(); order * (order - 1) / 2] })
    }

    /// Builds from `f(i, j)` for `i < j`.
    pub fn from_upper(order: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Result<Self> {
        let mut m = Self::zeros(order)?;
        for i in 0..order {
            for j in i + 1..order {
                m.set(i, j, f(i, j));
            }
        }
        Ok(m)
    }

    /// Takes the strict upper triangle of a dense matrix.
    pub fn from_dense(a: &Matrix<C<T>>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("skew matrix must be square".into()));
        }
        Self::from_upper(a.rows(), |i, j| a[(i, j)])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * (2 * self.order - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> C<T> {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.slot(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.slot(j, i)],
            std::cmp::Ordering::Equal => C::zero(),
        }
    }

    /// Sets entry (i, j), i < j; (j, i) follows by skew symmetry.
    pub fn set(&mut self, i: usize, j: usize, v: C<T>) {
        assert!(i < j && j < self.order, "set requires i < j < order");
        let s = self.slot(i, j);
        self.upper[s] = v;
    }

    pub fn to_dense(&self) -> Matrix<C<T>> {
        Matrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    /// X A Xᵗ for a square X of matching order.
    pub fn congruence(&self, x: &Matrix<C<T>>) -> Result<Self> {
        if x.rows() != self.order || x.cols() != self.order {
            return Err(Error::Dimension("congruence factor has wrong shape".into()));
        }
        let dense = x.matmul(&self.to_dense()).matmul(&x.transpose());
        Self::from_dense(&dense)
    }
}

/// Pfaffian by the pairing expansion along the first row. Exponential cost;
/// intended for orders up to 12.
pub fn pfaffian_pairings<T: Real>(a: &SkewMatrix<T>) -> LogScaled<T> {
    fn rec<T: Real>(a: &SkewMatrix<T>, idx: &mut Vec<usize>) -> C<T> {
        if idx.is_empty() {
            return C::one();
        }
        let first = idx.remove(0);
        let mut total = C::zero();
        for pos in 0..idx.len() {
            let j = idx.remove(pos);
            let sign = if pos % 2 == 0 { T::one() } else { -T::one() };
            let term = a.get(first, j);
            if term != C::zero() {
                total = total + term * rec(a, idx) * sign;
            }
            idx.insert(pos, j);
        }
        idx.insert(0, first);
        total
    }
    let mut idx: Vec<usize> = (0..a.order()).collect();
    LogScaled::from_value(rec(a, &mut idx))
}

/// Pfaffian by skew-symmetric Gaussian elimination with partial pivoting.
pub fn pfaffian<T: Real>(a: &SkewMatrix<T>) -> LogScaled<T> {
    let n = a.order();
    let mut m = a.to_dense();
    let mut acc = LogScaled::one();
    let mut k = 0;
    while k + 1 < n {
        let mut kp = k + 1;
        let mut best = m[(k + 1, k)].norm();
        for i in k + 2..n {
            let v = m[(i, k)].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            m.swap_rows(k + 1, kp);
            m.swap_cols(k + 1, kp);
            acc = acc.neg();
        }
        let piv = m[(k, k + 1)];
        if piv == C::zero() {
            return LogScaled::zero();
        }
        acc = acc.mul_value(piv);
        if k + 2 < n {
            let tau: Vec<C<T>> = (k + 2..n).map(|j| m[(k, j)] / piv).collect();
            let col: Vec<C<T>> = (k + 2..n).map(|i| m[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    m[(i, j)] = m[(i, j)] + tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    acc
}

/// Determinant by LU with partial pivoting, accumulated in the log domain.
pub fn logdet<T: Real>(m: &Matrix<C<T>>) -> Result<LogScaled<T>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!("determinant of a {}x{} matrix", m.rows(), m.cols())));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut acc = LogScaled::one();
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].norm();
        for i in k + 1..n {
            let v = a[(i, k)].norm();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == T::zero() {
            return Ok(LogScaled::zero());
        }
        if p != k {
            a.swap_rows(p, k);
            acc = acc.neg();
        }
        let piv = a[(k, k)];
        acc = acc.mul_value(piv);
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            if f == C::zero() {
                continue;
            }
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] = a[(i, j)] - f * v;
            }
        }
    }
    Ok(acc)
}

/// Both sides of pf([[0, X], [−Xᵗ, 0]]) = (−1)^{n(n−1)/2} det X.
pub fn pfaffian_block_identity<T: Real>(x: &Matrix<C<T>>) -> Result<(LogScaled<T>, LogScaled<T>)> {
    let n = x.rows();
    let a = SkewMatrix::from_upper(2 * n, |i, j| if i < n && j >= n { x[(i, j - n)] } else { C::zero() })?;
    let mut rhs = logdet(x)?;
    if (n * (n.saturating_sub(1)) / 2) % 2 == 1 {
        rhs = rhs.neg();
    }
    Ok((pfaffian(&a), rhs))
}

/// Both sides of pf(X Y Xᵗ) = det X · pf Y.
pub fn pfaffian_congruence_identity<T: Real>(x: &Matrix<C<T>>, y: &SkewMatrix<T>) -> Result<(LogScaled<T>, LogScaled<T>)> {
    let lhs = pfaffian(&y.congruence(x)?);
    let rhs = logdet(x)?.mul(&pfaffian(y));
    Ok((lhs, rhs))
}

/// Determinant by cofactor expansion; reference oracle for small orders.
pub fn det_cofactor<T: Real>(m: &Matrix<C<T>>) -> C<T> {
    let n = m.rows();
    match n {
        0 => C::one(),
        1 => m[(0, 0)],
        _ => {
            let mut total = C::zero();
            for j in 0..n {
                let minor = Matrix::from_fn(n - 1, n - 1, |r, c| m[(r + 1, if c < j { c } else { c + 1 })]);
                let s = if j % 2 == 0 { T::one() } else { -T::one() };
                total = total + m[(0, j)] * det_cofactor(&minor) * s;
            }
            total
        }
    }
}

/// Complex value helper used by tests and callers.
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}
