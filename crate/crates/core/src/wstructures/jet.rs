//! Truncated bivariate Taylor jets in `(z - z0)` and `(zbar - zbar0)`.
//!
//! Each jet records the rectangle of coefficients that are still exact: a
//! derivative in `z` loses the top row, a product keeps the smaller rectangle.
//! Reading a value outside that rectangle is an error rather than a silent
//! truncation artefact.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::algebra::{SquareMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

pub const DEFAULT_ORDER_Z: usize = 6;
pub const DEFAULT_ORDER_ZBAR: usize = 2;

/// Scalar jet with coefficients `c[j][k]` of `(z - z0)^j (zbar - zbar0)^k`,
/// `0 <= j <= order_z`, `0 <= k <= order_zbar`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JetJson", into = "JetJson")]
pub struct BiJet {
    point: C64,
    order_z: usize,
    order_zbar: usize,
    valid_z: isize,
    valid_zbar: isize,
    coeffs: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JetJson {
    #[serde(with = "crate::algebra::complex_pair")]
    point: C64,
    /// Rows indexed by the power of `z - z0`.
    coefficients: Vec<Vec<[f64; 2]>>,
}

impl TryFrom<JetJson> for BiJet {
    type Error = Error;

    fn try_from(j: JetJson) -> Result<Self> {
        let rows = j
            .coefficients
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        BiJet::from_rows(j.point, rows)
    }
}

impl From<BiJet> for JetJson {
    fn from(b: BiJet) -> Self {
        let coefficients = (0..=b.order_z)
            .map(|j| (0..=b.order_zbar).map(|k| [b.coeff(j, k).re, b.coeff(j, k).im]).collect())
            .collect();
        JetJson {
            point: b.point,
            coefficients,
        }
    }
}

impl BiJet {
    pub fn zero(point: C64, order_z: usize, order_zbar: usize) -> Self {
        Self {
            point,
            order_z,
            order_zbar,
            valid_z: order_z as isize,
            valid_zbar: order_zbar as isize,
            coeffs: vec![ZERO; (order_z + 1) * (order_zbar + 1)],
        }
    }

    pub fn constant(point: C64, order_z: usize, order_zbar: usize, c: C64) -> Self {
        let mut out = Self::zero(point, order_z, order_zbar);
        out.coeffs[0] = c;
        out
    }

    pub fn from_fn(point: C64, order_z: usize, order_zbar: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut out = Self::zero(point, order_z, order_zbar);
        for j in 0..=order_z {
            for k in 0..=order_zbar {
                out.coeffs[j * (order_zbar + 1) + k] = f(j, k);
            }
        }
        out
    }

    /// Jet from coefficient rows; all rows must have the same length.
    pub fn from_rows(point: C64, rows: Vec<Vec<C64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidArgument("jet needs at least one coefficient".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != width) {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: bad.len(),
            });
        }
        if !point.re.is_finite() || !point.im.is_finite() || rows.iter().flatten().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("jet data must be finite".into()));
        }
        Ok(Self::from_fn(point, rows.len() - 1, width - 1, |j, k| rows[j][k]))
    }

    /// The coordinate function `z`.
    pub fn z(point: C64, order_z: usize, order_zbar: usize) -> Self {
        let mut out = Self::constant(point, order_z, order_zbar, point);
        if order_z > 0 {
            out.coeffs[order_zbar + 1] = ONE;
        }
        out
    }

    /// The coordinate function `zbar`, centred at `conj(z0)`.
    pub fn zbar(point: C64, order_z: usize, order_zbar: usize) -> Self {
        let mut out = Self::constant(point, order_z, order_zbar, point.conj());
        if order_zbar > 0 {
            out.coeffs[1] = ONE;
        }
        out
    }

    /// A zero jet with the same point and truncation.
    pub fn zero_like(&self) -> Self {
        Self::zero(self.point, self.order_z, self.order_zbar)
    }

    pub fn constant_like(&self, c: C64) -> Self {
        Self::constant(self.point, self.order_z, self.order_zbar, c)
    }

    pub fn point(&self) -> C64 {
        self.point
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.order_z, self.order_zbar)
    }

    /// Largest `(j, k)` for which coefficients are exact; negative once a
    /// derivative has consumed the whole truncation in that direction.
    pub fn validity(&self) -> (isize, isize) {
        (self.valid_z, self.valid_zbar)
    }

    pub fn coeff(&self, j: usize, k: usize) -> C64 {
        self.coeffs[j * (self.order_zbar + 1) + k]
    }

    pub fn set_coeff(&mut self, j: usize, k: usize, c: C64) {
        self.coeffs[j * (self.order_zbar + 1) + k] = c;
    }

    pub fn is_exact_at(&self, j: usize, k: usize) -> bool {
        j as isize <= self.valid_z && k as isize <= self.valid_zbar
    }

    /// Value at the expansion point.
    pub fn value(&self) -> Result<C64> {
        if self.is_exact_at(0, 0) {
            Ok(self.coeffs[0])
        } else {
            Err(Error::JetExhausted)
        }
    }

    /// Largest modulus over the exact coefficients.
    pub fn max_valid_abs(&self) -> Result<f64> {
        if !self.is_exact_at(0, 0) {
            return Err(Error::JetExhausted);
        }
        let mut m: f64 = 0.0;
        for j in 0..=self.valid_z as usize {
            for k in 0..=self.valid_zbar as usize {
                m = m.max(self.coeff(j, k).norm());
            }
        }
        Ok(m)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.point == other.point && self.order_z == other.order_z && self.order_zbar == other.order_zbar
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::JetMismatch)
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            point: self.point,
            order_z: self.order_z,
            order_zbar: self.order_zbar,
            valid_z: self.valid_z.min(other.valid_z),
            valid_zbar: self.valid_zbar.min(other.valid_zbar),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// Truncated Cauchy product. Mirror-image terms are paired before
    /// accumulation so that `a * b` and `b * a` agree bit for bit.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let w = self.order_zbar + 1;
        let (a, b) = (&self.coeffs, &other.coeffs);
        let mut out = self.zip(other, |_, _| ZERO);
        for j in 0..=self.order_z {
            for k in 0..=self.order_zbar {
                let mut acc = ZERO;
                for p in 0..=j {
                    for q in 0..=k {
                        let (pp, qq) = (j - p, k - q);
                        let (i1, i2) = (p * w + q, pp * w + qq);
                        match (p, q).cmp(&(pp, qq)) {
                            Ordering::Less => acc += a[i1] * b[i2] + a[i2] * b[i1],
                            Ordering::Equal => acc += a[i1] * b[i1],
                            Ordering::Greater => {}
                        }
                    }
                }
                out.coeffs[j * w + k] = acc;
            }
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// `self + c` for a constant `c`.
    pub fn add_constant(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += c;
        out
    }

    pub fn d_z(&self) -> Self {
        let w = self.order_zbar + 1;
        let mut out = self.clone();
        for j in 0..=self.order_z {
            for k in 0..w {
                out.coeffs[j * w + k] = if j < self.order_z {
                    self.coeffs[(j + 1) * w + k] * (j + 1) as f64
                } else {
                    ZERO
                };
            }
        }
        out.valid_z -= 1;
        out
    }

    pub fn d_zbar(&self) -> Self {
        let w = self.order_zbar + 1;
        let mut out = self.clone();
        for j in 0..=self.order_z {
            for k in 0..w {
                out.coeffs[j * w + k] = if k + 1 < w {
                    self.coeffs[j * w + k + 1] * (k + 1) as f64
                } else {
                    ZERO
                };
            }
        }
        out.valid_zbar -= 1;
        out
    }

    pub fn d_z_n(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |acc, _| acc.d_z())
    }

    pub fn powi(&self, n: usize) -> Self {
        (0..n).fold(self.constant_like(ONE), |acc, _| &acc * self)
    }

    /// Multiplicative inverse; the value at the point must be nonzero.
    pub fn recip(&self) -> Result<Self> {
        let a0 = self.value()?;
        if a0.norm() <= 1e-300 {
            return Err(Error::Singular);
        }
        let inv = ONE / a0;
        let w = self.order_zbar + 1;
        let mut out = self.zero_like();
        out.valid_z = self.valid_z;
        out.valid_zbar = self.valid_zbar;
        out.coeffs[0] = inv;
        for j in 0..=self.order_z {
            for k in 0..w {
                if j == 0 && k == 0 {
                    continue;
                }
                let mut acc = ZERO;
                for p in 0..=j {
                    for q in 0..=k {
                        if p == 0 && q == 0 {
                            continue;
                        }
                        acc += self.coeffs[p * w + q] * out.coeffs[(j - p) * w + (k - q)];
                    }
                }
                out.coeffs[j * w + k] = -acc * inv;
            }
        }
        Ok(out)
    }

    /// `self ∘ inner` for a jet `self` that is holomorphic in its variable and
    /// expanded at the value of `inner`.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        let w0 = inner.value()?;
        if (w0 - self.point).norm() > 1e-12 * (1.0 + w0.norm()) {
            return Err(Error::JetMismatch);
        }
        for j in 0..=self.order_z {
            for k in 1..=self.order_zbar {
                if self.coeff(j, k) != ZERO {
                    return Err(Error::InvalidArgument("outer jet of a composition must be holomorphic".into()));
                }
            }
        }
        let (vz, vzb) = inner.validity();
        let need = (vz + vzb) as usize;
        if self.valid_z < need as isize {
            return Err(Error::Truncation {
                need_z: need,
                need_zbar: 0,
                have_z: self.valid_z.max(0) as usize,
                have_zbar: 0,
            });
        }
        let mut h = inner.clone();
        h.coeffs[0] = ZERO;
        let mut acc = inner.constant_like(self.coeff(need, 0));
        for m in (0..need).rev() {
            acc = (&acc * &h).add_constant(self.coeff(m, 0));
        }
        acc.valid_z = vz;
        acc.valid_zbar = vzb;
        Ok(acc)
    }
}

impl Add for &BiJet {
    type Output = BiJet;
    /// Panics on mismatched jets; use [`BiJet::try_add`] to recover.
    fn add(self, rhs: &BiJet) -> BiJet {
        self.try_add(rhs).expect("jet shapes must match")
    }
}

impl Sub for &BiJet {
    type Output = BiJet;
    fn sub(self, rhs: &BiJet) -> BiJet {
        self.try_sub(rhs).expect("jet shapes must match")
    }
}

impl Mul for &BiJet {
    type Output = BiJet;
    fn mul(self, rhs: &BiJet) -> BiJet {
        self.try_mul(rhs).expect("jet shapes must match")
    }
}

impl Neg for &BiJet {
    type Output = BiJet;
    fn neg(self) -> BiJet {
        self.scale_real(-1.0)
    }
}

/// `S(F) = F'''/F' - 3/2 (F''/F')^2` in the `z` variable.
pub fn schwarzian(f: &BiJet) -> Result<BiJet> {
    let f1 = f.d_z();
    if !f1.is_exact_at(0, 0) || f1.coeff(0, 0).norm() <= 1e-12 {
        return Err(Error::DegenerateMap);
    }
    let f2 = f1.d_z();
    let f3 = f2.d_z();
    let r = f1.recip()?;
    let b = &f2 * &r;
    Ok(&(&f3 * &r) - &(&b * &b).scale_real(1.5))
}

/// Square matrix of jets sharing one expansion point and truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJetJson", into = "MatrixJetJson")]
pub struct MatrixBiJet {
    dim: usize,
    entries: Vec<BiJet>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJetJson {
    /// Row-major entries.
    entries: Vec<Vec<BiJet>>,
}

impl TryFrom<MatrixJetJson> for MatrixBiJet {
    type Error = Error;

    fn try_from(m: MatrixJetJson) -> Result<Self> {
        let n = m.entries.len();
        if let Some(bad) = m.entries.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        MatrixBiJet::from_entries(n, m.entries.into_iter().flatten().collect())
    }
}

impl From<MatrixBiJet> for MatrixJetJson {
    fn from(m: MatrixBiJet) -> Self {
        MatrixJetJson {
            entries: m.entries.chunks(m.dim).map(<[BiJet]>::to_vec).collect(),
        }
    }
}

impl MatrixBiJet {
    /// Row-major entries; all must share point and truncation.
    pub fn from_entries(dim: usize, entries: Vec<BiJet>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        if entries.iter().any(|e| !e.same_shape(&entries[0])) {
            return Err(Error::JetMismatch);
        }
        Ok(Self { dim, entries })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> BiJet) -> Result<Self> {
        let entries = (0..dim * dim).map(|i| f(i / dim, i % dim)).collect();
        Self::from_entries(dim, entries)
    }

    pub fn zeros(dim: usize, template: &BiJet) -> Self {
        Self {
            dim,
            entries: vec![template.zero_like(); dim * dim],
        }
    }

    /// `s * 1_N`.
    pub fn scalar(dim: usize, s: &BiJet) -> Self {
        let mut out = Self::zeros(dim, s);
        for i in 0..dim {
            out.entries[i * dim + i] = s.clone();
        }
        out
    }

    pub fn identity(dim: usize, template: &BiJet) -> Self {
        Self::scalar(dim, &template.constant_like(ONE))
    }

    /// Constant matrix jet.
    pub fn constant(m: &SquareMatrix, template: &BiJet) -> Self {
        let n = m.dim();
        Self {
            dim: n,
            entries: (0..n * n).map(|i| template.constant_like(m.get(i / n, i % n))).collect(),
        }
    }

    /// Square matrix assembled from `blocks[r][c]`, all of one size.
    pub fn from_blocks(blocks: &[Vec<MatrixBiJet>]) -> Result<Self> {
        let nb = blocks.len();
        let n = blocks[0][0].dim;
        if blocks.iter().any(|r| r.len() != nb || r.iter().any(|b| b.dim != n)) {
            return Err(Error::DimensionMismatch { expected: n, found: 0 });
        }
        Self::from_fn(nb * n, |i, j| blocks[i / n][j / n].entry(i % n, j % n).clone())
    }

    /// Block `(r, c)` of size `size`.
    pub fn block(&self, r: usize, c: usize, size: usize) -> Self {
        Self::from_fn(size, |i, j| self.entry(r * size + i, c * size + j).clone()).expect("block within bounds")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, i: usize, j: usize) -> &BiJet {
        &self.entries[i * self.dim + j]
    }

    pub fn template(&self) -> &BiJet {
        &self.entries[0]
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        self.entries[0].check(&other.entries[0])
    }

    fn map(&self, f: impl Fn(&BiJet) -> BiJet) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(Self {
            dim: self.dim,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let n = self.dim;
        Self::from_fn(n, |i, j| {
            let mut acc = &self.entries[i * n] * &other.entries[j];
            for l in 1..n {
                acc = &acc + &(&self.entries[i * n + l] * &other.entries[l * n + j]);
            }
            acc
        })
    }

    /// Entrywise product with a scalar jet.
    pub fn scale_jet(&self, s: &BiJet) -> Self {
        self.map(|e| e * s)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|e| e.scale(s))
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|e| e.scale_real(s))
    }

    pub fn d_z(&self) -> Self {
        self.map(BiJet::d_z)
    }

    pub fn d_zbar(&self) -> Self {
        self.map(BiJet::d_zbar)
    }

    pub fn d_z_n(&self, n: usize) -> Self {
        self.map(|e| e.d_z_n(n))
    }

    pub fn trace(&self) -> BiJet {
        (1..self.dim).fold(self.entries[0].clone(), |acc, i| &acc + self.entry(i, i))
    }

    /// `XY - YX`.
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn max_valid_abs(&self) -> Result<f64> {
        self.entries.iter().try_fold(0.0_f64, |m, e| Ok(m.max(e.max_valid_abs()?)))
    }

    /// Matrix of values at the expansion point.
    pub fn value(&self) -> Result<SquareMatrix> {
        let vals = self.entries.iter().map(BiJet::value).collect::<Result<Vec<_>>>()?;
        Ok(SquareMatrix::from_fn(self.dim, |i, j| vals[i * self.dim + j]))
    }
}

impl Add for &MatrixBiJet {
    type Output = MatrixBiJet;
    fn add(self, rhs: &MatrixBiJet) -> MatrixBiJet {
        self.try_add(rhs).expect("matrix jet shapes must match")
    }
}

impl Sub for &MatrixBiJet {
    type Output = MatrixBiJet;
    fn sub(self, rhs: &MatrixBiJet) -> MatrixBiJet {
        self.try_sub(rhs).expect("matrix jet shapes must match")
    }
}

impl Mul for &MatrixBiJet {
    type Output = MatrixBiJet;
    fn mul(self, rhs: &MatrixBiJet) -> MatrixBiJet {
        self.try_mul(rhs).expect("matrix jet shapes must match")
    }
}

impl Neg for &MatrixBiJet {
    type Output = MatrixBiJet;
    fn neg(self) -> MatrixBiJet {
        self.scale_real(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: C64 = C64::new(0.3, -0.2);

    fn jet_from(v: &[(f64, f64)]) -> BiJet {
        BiJet::from_fn(P, 6, 2, |j, k| {
            let (re, im) = v[j * 3 + k];
            C64::new(re, im)
        })
    }

    fn arb_jet() -> impl Strategy<Value = BiJet> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 21).prop_map(|v| jet_from(&v))
    }

    fn close(a: &BiJet, b: &BiJet, tol: f64) -> bool {
        (a - b).max_valid_abs().unwrap() <= tol
    }

    #[test]
    fn derivative_of_power() {
        let h = BiJet::z(ZERO, 6, 2);
        let d = h.powi(5).d_z();
        let expect = h.powi(4).scale_real(5.0);
        assert_eq!(d.coeff(4, 0), expect.coeff(4, 0));
        assert!(close(&d, &expect, 0.0));
        assert_eq!(d.validity(), (5, 2));
    }

    #[test]
    fn shifted_power_has_binomial_coefficients() {
        let z = BiJet::z(P, 6, 2);
        let cube = z.powi(3);
        assert!((cube.coeff(0, 0) - P * P * P).norm() < 1e-15);
        assert!((cube.coeff(1, 0) - P * P * 3.0).norm() < 1e-15);
        assert!((cube.coeff(2, 0) - P * 3.0).norm() < 1e-15);
        assert_eq!(cube.coeff(3, 0), ONE);
    }

    #[test]
    fn exhaustion_is_reported() {
        let z = BiJet::z(P, 2, 1);
        assert_eq!(z.d_z_n(3).value(), Err(Error::JetExhausted));
        assert_eq!(z.d_zbar().d_zbar().value(), Err(Error::JetExhausted));
        assert!(z.d_z_n(2).value().is_ok());
    }

    #[test]
    fn mismatched_shapes_error() {
        let a = BiJet::z(P, 6, 2);
        assert_eq!(a.try_mul(&BiJet::z(P, 5, 2)), Err(Error::JetMismatch));
        assert_eq!(a.try_add(&BiJet::z(ZERO, 6, 2)), Err(Error::JetMismatch));
    }

    #[test]
    fn recip_inverts() {
        let a = BiJet::z(P, 6, 2).add_constant(C64::new(2.0, 1.0));
        let one = &a * &a.recip().unwrap();
        assert!(close(&one, &a.constant_like(ONE), 1e-15));
        assert_eq!(a.zero_like().recip(), Err(Error::Singular));
    }

    fn mobius(a: C64, b: C64, c: C64, d: C64) -> BiJet {
        let z = BiJet::z(P, 6, 2);
        let num = z.scale(a).add_constant(b);
        let den = z.scale(c).add_constant(d);
        &num * &den.recip().unwrap()
    }

    #[test]
    fn schwarzian_kills_mobius() {
        let f = mobius(C64::new(1.0, 2.0), C64::new(-0.5, 0.1), C64::new(0.4, -0.3), C64::new(2.0, 0.0));
        let s = schwarzian(&f).unwrap();
        assert!(s.max_valid_abs().unwrap() < 1e-12);
    }

    #[test]
    fn schwarzian_of_exponential() {
        let f = BiJet::from_fn(P, 8, 2, |j, k| {
            if k == 0 {
                P.exp() / (1..=j).product::<usize>() as f64
            } else {
                ZERO
            }
        });
        let s = schwarzian(&f).unwrap();
        assert!((s.value().unwrap() + 0.5).norm() < 1e-13);
        assert!(close(&s, &s.constant_like(C64::new(-0.5, 0.0)), 1e-12));
    }

    #[test]
    fn schwarzian_needs_nonzero_derivative() {
        let z = BiJet::z(ZERO, 6, 2);
        assert_eq!(schwarzian(&z.powi(2)).unwrap_err(), Error::DegenerateMap);
    }

    #[test]
    fn schwarzian_cocycle() {
        let g = BiJet::from_fn(P, 6, 2, |j, k| match (j, k) {
            (0, 0) => C64::new(0.1, 0.2),
            (1, 0) => C64::new(1.0, 0.5),
            (2, 0) => C64::new(-0.3, 0.2),
            (3, 0) => C64::new(0.25, 0.0),
            _ => ZERO,
        });
        let w0 = g.value().unwrap();
        let f = BiJet::from_fn(w0, 14, 0, |j, _| match j {
            0 => C64::new(0.4, 0.0),
            1 => C64::new(1.5, -0.2),
            2 => C64::new(0.3, 0.7),
            3 => C64::new(-0.2, 0.1),
            4 => C64::new(0.05, 0.0),
            _ => ZERO,
        });
        let sf = schwarzian(&f).unwrap();
        let fg = f.compose(&g).unwrap();
        let lhs = schwarzian(&fg).unwrap();
        let gp = g.d_z();
        let rhs = &(&sf.compose(&g).unwrap() * &(&gp * &gp)) + &schwarzian(&g).unwrap();
        assert!((&lhs - &rhs).max_valid_abs().unwrap() < 1e-12);
    }

    #[test]
    fn matrix_jet_blocks_roundtrip() {
        let t = BiJet::z(P, 6, 2);
        let m = MatrixBiJet::from_fn(4, |i, j| t.scale_real((i * 4 + j) as f64)).unwrap();
        let blocks = vec![
            vec![m.block(0, 0, 2), m.block(0, 1, 2)],
            vec![m.block(1, 0, 2), m.block(1, 1, 2)],
        ];
        assert_eq!(MatrixBiJet::from_blocks(&blocks).unwrap(), m);
        assert_eq!(m.block(1, 0, 2).entry(0, 1), &t.scale_real(9.0));
    }

    #[test]
    fn jet_json_roundtrip() {
        let a = BiJet::from_fn(P, 3, 1, |j, k| C64::new(j as f64, k as f64 - 0.5));
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(serde_json::from_str::<BiJet>(&s).unwrap(), a);
        let m = MatrixBiJet::scalar(2, &a);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<MatrixBiJet>(&s).unwrap(), m);
    }

    proptest! {
        #[test]
        fn product_commutes_exactly(a in arb_jet(), b in arb_jet()) {
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn product_associates_and_distributes(a in arb_jet(), b in arb_jet(), c in arb_jet()) {
            prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-13));
            prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-13));
        }

        #[test]
        fn leibniz_and_commuting_derivatives(a in arb_jet(), b in arb_jet()) {
            let ab = &a * &b;
            prop_assert!(close(&ab.d_z(), &(&(&a.d_z() * &b) + &(&a * &b.d_z())), 1e-13));
            prop_assert!(close(&ab.d_zbar(), &(&(&a.d_zbar() * &b) + &(&a * &b.d_zbar())), 1e-13));
            prop_assert_eq!(a.d_z().d_zbar(), a.d_zbar().d_z());
        }

        #[test]
        fn matrix_product_is_associative(v in prop::collection::vec(arb_jet(), 12)) {
            let m = |k: usize| MatrixBiJet::from_entries(2, v[4 * k..4 * k + 4].to_vec()).unwrap();
            let (x, y, z) = (m(0), m(1), m(2));
            let d = &(&(&x * &y) * &z) - &(&x * &(&y * &z));
            prop_assert!(d.max_valid_abs().unwrap() < 1e-12);
            prop_assert!((&x.commutator(&y).trace()).max_valid_abs().unwrap() < 1e-13);
        }
    }
}
