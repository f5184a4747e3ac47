//! Admittance-matrix assembly and reduction.
//!
//! The pipeline runs from the bus admittance matrix `Y_bus`, through Kron
//! elimination of the zero-injection nodes (`Y_t`, one row per generator
//! terminal), into the real `2m x 2m` block form `Y_r`, and finally absorbs
//! the generator source impedances to give the internal-bus matrix `Y` that
//! maps internal voltages to terminal currents in the network `xy` frame.

use std::fmt;

use crate::error::{Error, Inversion, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use num_complex::Complex;

/// Dense complex admittance matrix in per-unit. Node indices are 1-based at
/// the API boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexAdmittanceMatrix<T> {
    inner: DenseMatrix<Complex<T>>,
}

impl<T: Real> ComplexAdmittanceMatrix<T> {
    pub fn new(inner: DenseMatrix<Complex<T>>) -> Result<Self> {
        if inner.rows() == 0 {
            return Err(Error::EmptySystem);
        }
        if !inner.is_square() {
            return Err(Error::Dimension {
                expected: inner.rows(),
                actual: inner.cols(),
                context: "admittance matrix must be square",
            });
        }
        if !inner.all_finite() {
            return Err(Error::NonFinite("admittance matrix"));
        }
        Ok(Self { inner })
    }

    pub fn from_rows<R: AsRef<[Complex<T>]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    pub fn dim(&self) -> usize {
        self.inner.rows()
    }

    /// Zero-based entry access.
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.inner[(i, j)]
    }

    pub fn matrix(&self) -> &DenseMatrix<Complex<T>> {
        &self.inner
    }

    /// Injected currents `I = Y V`.
    pub fn currents(&self, voltages: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        self.inner.mul_vec(voltages)
    }
}

/// Real `2m x 2m` matrix whose `(i, j)` 2x2 block couples generator `i` to
/// generator `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBlockMatrix<T> {
    inner: DenseMatrix<T>,
}

impl<T: Real> RealBlockMatrix<T> {
    pub fn new(inner: DenseMatrix<T>) -> Result<Self> {
        if !inner.is_square() || !inner.rows().is_multiple_of(2) || inner.rows() == 0 {
            return Err(Error::Dimension {
                expected: 2 * (inner.rows() / 2).max(1),
                actual: inner.cols(),
                context: "block matrix must be 2m x 2m",
            });
        }
        if !inner.all_finite() {
            return Err(Error::NonFinite("block matrix"));
        }
        Ok(Self { inner })
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            inner: DenseMatrix::zeros(2 * m, 2 * m),
        }
    }

    pub fn identity(m: usize) -> Self {
        Self {
            inner: DenseMatrix::identity(2 * m),
        }
    }

    /// Generator count.
    pub fn m(&self) -> usize {
        self.inner.rows() / 2
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.inner[(i, j)]
    }

    /// The 2x2 block `(i, j)`, zero-based generator indices.
    pub fn block(&self, i: usize, j: usize) -> [[T; 2]; 2] {
        let (r, c) = (2 * i, 2 * j);
        [
            [self.inner[(r, c)], self.inner[(r, c + 1)]],
            [self.inner[(r + 1, c)], self.inner[(r + 1, c + 1)]],
        ]
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.inner
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.inner
    }

    /// `I = Y E` on stacked `[x1, y1, x2, y2, ...]` vectors.
    pub fn apply(&self, v: &[T]) -> Result<Vec<T>> {
        self.inner.mul_vec(v)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.inner.max_abs_diff(&other.inner)
    }

    /// True when every block has the `[[G, -B], [B, G]]` pattern exactly.
    pub fn has_complex_block_structure(&self) -> bool {
        let m = self.m();
        (0..m).all(|i| {
            (0..m).all(|j| {
                let b = self.block(i, j);
                b[0][0] == b[1][1] && b[0][1] == -b[1][0]
            })
        })
    }

    fn block_diagonal(blocks: impl ExactSizeIterator<Item = [[T; 2]; 2]>) -> Self {
        let m = blocks.len();
        let mut inner = DenseMatrix::zeros(2 * m, 2 * m);
        for (k, b) in blocks.enumerate() {
            let r = 2 * k;
            inner[(r, r)] = b[0][0];
            inner[(r, r + 1)] = b[0][1];
            inner[(r + 1, r)] = b[1][0];
            inner[(r + 1, r + 1)] = b[1][1];
        }
        Self { inner }
    }
}

/// Generator source impedance `R_a + jX'` with separate d/q transient
/// reactances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceImpedance<T> {
    pub r_a: T,
    pub x_d_prime: T,
    pub x_q_prime: T,
}

impl<T: Real> SourceImpedance<T> {
    pub fn new(r_a: T, x_d_prime: T, x_q_prime: T) -> Result<Self> {
        let z = Self {
            r_a,
            x_d_prime,
            x_q_prime,
        };
        z.validate(0)?;
        Ok(z)
    }

    /// Classical machines use a single transient reactance on both axes.
    pub fn classical(r_a: T, x_d_prime: T) -> Self {
        Self {
            r_a,
            x_d_prime,
            x_q_prime: x_d_prime,
        }
    }

    pub fn validate(&self, generator: usize) -> Result<()> {
        let bad = |field, reason| Error::InvalidParameter {
            generator,
            field,
            reason,
        };
        if !(self.r_a.is_finite() && self.x_d_prime.is_finite() && self.x_q_prime.is_finite()) {
            return Err(bad("source impedance", "must be finite"));
        }
        if self.r_a < T::zero() {
            return Err(bad("R_a", "must be non-negative"));
        }
        if self.x_d_prime <= T::zero() {
            return Err(bad("X'_d", "must be positive"));
        }
        if self.x_q_prime <= T::zero() {
            return Err(bad("X'_q", "must be positive"));
        }
        Ok(())
    }

    /// The dq-frame impedance block `[[R_a, -X'_q], [X'_d, R_a]]`.
    pub fn block(&self) -> [[T; 2]; 2] {
        [[self.r_a, -self.x_q_prime], [self.x_d_prime, self.r_a]]
    }

    pub fn is_isotropic(&self) -> bool {
        self.x_d_prime == self.x_q_prime
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    pub from: usize,
    pub to: usize,
    pub admittance: Complex<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shunt<T> {
    pub node: usize,
    pub admittance: Complex<T>,
}

/// Stamps series branches and shunts into `Y_bus`.
pub fn build_y_bus<T: Real>(
    branches: &[Branch<T>],
    shunts: &[Shunt<T>],
    n_nodes: usize,
) -> Result<ComplexAdmittanceMatrix<T>> {
    if n_nodes == 0 {
        return Err(Error::EmptySystem);
    }
    let check = |index: usize| {
        if index == 0 || index > n_nodes {
            Err(Error::NodeIndex { index, n_nodes })
        } else {
            Ok(index - 1)
        }
    };
    let mut y = DenseMatrix::zeros(n_nodes, n_nodes);
    for br in branches {
        let (f, t) = (check(br.from)?, check(br.to)?);
        if f == t {
            return Err(Error::SelfLoop(br.from));
        }
        let ys = br.admittance;
        y[(f, f)] += ys;
        y[(t, t)] += ys;
        y[(f, t)] -= ys;
        y[(t, f)] -= ys;
    }
    for sh in shunts {
        let n = check(sh.node)?;
        y[(n, n)] += sh.admittance;
    }
    ComplexAdmittanceMatrix::new(y)
}

/// Shunt admittance of a constant-impedance load drawing `P + jQ` at the
/// solved voltage magnitude.
pub fn constant_impedance_load<T: Real>(p: T, q: T, v_mag: T) -> Complex<T> {
    Complex::new(p, -q) / (v_mag * v_mag)
}

/// Eliminates every node not in `retained` (1-based, output in the given
/// order): `Y_t = Y_mm - Y_mn Y_nn^-1 Y_nm`.
pub fn kron_reduce<T: Real>(
    y_bus: &ComplexAdmittanceMatrix<T>,
    retained: &[usize],
) -> Result<ComplexAdmittanceMatrix<T>> {
    let n = y_bus.dim();
    if retained.is_empty() {
        return Err(Error::EmptySystem);
    }
    let mut keep = Vec::with_capacity(retained.len());
    let mut seen = vec![false; n];
    for &idx in retained {
        if idx == 0 || idx > n {
            return Err(Error::NodeIndex { index: idx, n_nodes: n });
        }
        if std::mem::replace(&mut seen[idx - 1], true) {
            return Err(Error::DuplicateNode(idx));
        }
        keep.push(idx - 1);
    }
    let elim: Vec<usize> = (0..n).filter(|i| !seen[*i]).collect();

    let y = y_bus.matrix();
    let y_mm = y.select(&keep, &keep);
    if elim.is_empty() {
        return ComplexAdmittanceMatrix::new(y_mm);
    }
    let y_nn = y.select(&elim, &elim);
    let y_nm = y.select(&elim, &keep);
    let y_mn = y.select(&keep, &elim);

    let inv = y_nn.inverse(Inversion::EliminatedBlock)?;
    let correction = &y_mn * &(&inv * &y_nm);
    ComplexAdmittanceMatrix::new(&y_mm - &correction)
}

/// Expands each complex entry `G + jB` into the real block `[[G, -B], [B, G]]`.
pub fn expand_real_blocks<T: Real>(y_t: &ComplexAdmittanceMatrix<T>) -> RealBlockMatrix<T> {
    let m = y_t.dim();
    let inner = DenseMatrix::from_fn(2 * m, 2 * m, |r, c| {
        let z = y_t.get(r / 2, c / 2);
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    });
    RealBlockMatrix { inner }
}

/// Rotation block that takes `xy` network components to the machine `dq`
/// frame.
pub fn rotation_block<T: Real>(delta: T) -> [[T; 2]; 2] {
    let (s, c) = delta.sin_cos();
    [[s, -c], [c, s]]
}

/// Block-diagonal `T1` of per-machine `xy -> dq` rotations.
pub fn build_t1<T: Real>(deltas: &[T]) -> RealBlockMatrix<T> {
    RealBlockMatrix::block_diagonal(deltas.iter().map(|&d| rotation_block(d)))
}

/// Block-diagonal `T2` of per-machine dq source impedances.
pub fn build_t2<T: Real>(impedances: &[SourceImpedance<T>]) -> RealBlockMatrix<T> {
    RealBlockMatrix::block_diagonal(impedances.iter().map(SourceImpedance::block))
}

/// Terminal-bus matrix `Y_r` with its inverse computed once, shared by every
/// internal-bus evaluation on the same network.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalNetwork<T> {
    y_r: RealBlockMatrix<T>,
    y_r_inv: DenseMatrix<T>,
}

impl<T: Real> TerminalNetwork<T> {
    pub fn new(y_r: RealBlockMatrix<T>) -> Result<Self> {
        let y_r_inv = y_r.matrix().inverse(Inversion::TerminalAdmittance)?;
        Ok(Self { y_r, y_r_inv })
    }

    pub fn from_terminal(y_t: &ComplexAdmittanceMatrix<T>) -> Result<Self> {
        Self::new(expand_real_blocks(y_t))
    }

    pub fn y_r(&self) -> &RealBlockMatrix<T> {
        &self.y_r
    }

    pub fn y_r_inverse(&self) -> &DenseMatrix<T> {
        &self.y_r_inv
    }

    pub fn m(&self) -> usize {
        self.y_r.m()
    }

    fn check_dims(&self, other: &RealBlockMatrix<T>, context: &'static str) -> Result<()> {
        if other.m() != self.m() {
            return Err(Error::Dimension {
                expected: 2 * self.m(),
                actual: 2 * other.m(),
                context,
            });
        }
        Ok(())
    }
}

/// Internal-bus admittance `Y = (T1 Yr^-1 + T2 T1)^-1 T1`.
pub fn internal_bus_admittance<T: Real>(
    network: &TerminalNetwork<T>,
    t1: &RealBlockMatrix<T>,
    t2: &RealBlockMatrix<T>,
) -> Result<RealBlockMatrix<T>> {
    network.check_dims(t1, "T1")?;
    network.check_dims(t2, "T2")?;
    let rotated = t1.matrix() * network.y_r_inverse();
    let sum = &rotated + &(t2.matrix() * t1.matrix());
    let inv = sum.inverse(Inversion::RotatedSum)?;
    RealBlockMatrix::new(&inv * t1.matrix())
}

/// Verifies `T2 T1 = T1 T2` holds for every angle, i.e. each machine has
/// `X'_d = X'_q`.
pub fn check_commuting<T: Real>(t2: &RealBlockMatrix<T>) -> Result<()> {
    for k in 0..t2.m() {
        let z = t2.block(k, k);
        if z[0][0] != z[1][1] || z[0][1] != -z[1][0] {
            return Err(Error::NonCommuting {
                generator: k + 1,
                x_d_prime: z[1][0].as_f64(),
                x_q_prime: (-z[0][1]).as_f64(),
            });
        }
    }
    Ok(())
}

/// Angle-independent internal-bus admittance `Y = (Yr^-1 + T2)^-1`, valid
/// only when every machine has `X'_d = X'_q`.
pub fn constant_internal_admittance<T: Real>(
    network: &TerminalNetwork<T>,
    t2: &RealBlockMatrix<T>,
) -> Result<RealBlockMatrix<T>> {
    network.check_dims(t2, "T2")?;
    check_commuting(t2)?;
    let sum = network.y_r_inverse() + t2.matrix();
    RealBlockMatrix::new(sum.inverse(Inversion::ImpedanceSum)?)
}

/// Fixed-layout text rendering with 4 decimals, one row per line.
pub struct Fixed4<'a, M>(pub &'a M);

impl<T: Real> fmt::Display for Fixed4<'_, RealBlockMatrix<T>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0.matrix();
        for i in 0..m.rows() {
            let row: Vec<String> = m.row(i).iter().map(|x| format!("{:>9.4}", clean(*x))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl<T: Real> fmt::Display for Fixed4<'_, ComplexAdmittanceMatrix<T>> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0.matrix();
        for i in 0..m.rows() {
            let row: Vec<String> = m
                .row(i)
                .iter()
                .map(|z| {
                    let im = clean(z.im);
                    let sign = if im.is_sign_negative() { '-' } else { '+' };
                    format!("{:>8.4} {} j{:.4}", clean(z.re), sign, im.abs())
                })
                .collect();
            writeln!(f, "{}", row.join("   "))?;
        }
        Ok(())
    }
}

// Avoids printing "-0.0000" for values that round to zero.
fn clean<T: Real>(x: T) -> f64 {
    let v = x.as_f64();
    if v.abs() < 5e-5 {
        0.0
    } else {
        v
    }
}

impl<T: Real> ComplexAdmittanceMatrix<T> {
    pub fn identity(m: usize) -> Self {
        Self {
            inner: DenseMatrix::identity(m),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

impl<T: Real> RealBlockMatrix<T> {
    /// Whether each diagonal block is orthogonal to within `tol`.
    pub fn diagonal_blocks_orthogonal(&self, tol: T) -> bool {
        (0..self.m()).all(|k| {
            let b = self.block(k, k);
            let g00 = b[0][0] * b[0][0] + b[1][0] * b[1][0];
            let g11 = b[0][1] * b[0][1] + b[1][1] * b[1][1];
            let g01 = b[0][0] * b[0][1] + b[1][0] * b[1][1];
            (g00 - T::one()).abs() < tol && (g11 - T::one()).abs() < tol && g01.abs() < tol
        })
    }
}
