//! Dense complex matrices over sl(N, C), coadjoint orbit points and the
//! Lie–Poisson bracket on products of orbits.
//!
//! The pairing is fixed as `<X, Y> = tr(XY)`; no `1/N` normalization is
//! applied anywhere in the crate.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex `N x N` matrix.
///
/// Serializes as a row-major nested array of `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix(DMatrix<C64>);

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(n, n, f))
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    /// Builds a matrix from row-major rows; rejects ragged or non-square input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty matrix".into()));
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    /// Matrix unit `E_{ij}` (zero-based indices).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        Self::from_fn(n, |r, c| if r == i && c == j { ONE } else { ZERO })
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn determinant(&self) -> C64 {
        self.0.clone().determinant()
    }

    pub fn inverse(&self) -> Result<Self> {
        self.0.clone().try_inverse().map(Self).ok_or(Error::Singular)
    }

    /// `g * self * g^{-1}`.
    pub fn conjugate_by(&self, g: &SquareMatrix) -> Result<Self> {
        let ginv = g.inverse()?;
        Ok(Self(&g.0 * &self.0 * &ginv.0))
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..k {
            out = Self(&out.0 * &self.0);
        }
        out
    }

    /// Eigenvalues from the diagonal of the complex Schur form.
    pub fn eigenvalues(&self) -> Vec<C64> {
        let n = self.dim();
        if n == 1 {
            return vec![self.0[(0, 0)]];
        }
        if n == 2 {
            // Closed form is more accurate than an iterative Schur sweep.
            let (a, b, c, d) = (self.0[(0, 0)], self.0[(0, 1)], self.0[(1, 0)], self.0[(1, 1)]);
            let half_tr = (a + d) * 0.5;
            let disc = ((a - d) * 0.5 * ((a - d) * 0.5) + b * c).sqrt();
            return vec![half_tr + disc, half_tr - disc];
        }
        let schur = self
            .0
            .clone()
            .try_schur(1e-15, 10_000)
            .unwrap_or_else(|| self.0.clone().schur());
        let (_, t) = schur.unpack();
        (0..n).map(|i| t[(i, i)]).collect()
    }

    /// Ratio of largest to smallest singular value.
    pub fn condition_number(&self) -> f64 {
        let sv = self.0.clone().svd(false, false).singular_values;
        let max = sv.iter().cloned().fold(0.0, f64::max);
        let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    fn check_same_dim(&self, other: &SquareMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 + &rhs.0)
    }
}

impl Add for SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: SquareMatrix) -> SquareMatrix {
        SquareMatrix(self.0 + rhs.0)
    }
}

impl AddAssign<&SquareMatrix> for SquareMatrix {
    fn add_assign(&mut self, rhs: &SquareMatrix) {
        self.0 += &rhs.0;
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 - &rhs.0)
    }
}

impl Sub for SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: SquareMatrix) -> SquareMatrix {
        SquareMatrix(self.0 - rhs.0)
    }
}

impl Mul for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        SquareMatrix(&self.0 * &rhs.0)
    }
}

impl Mul for SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: SquareMatrix) -> SquareMatrix {
        SquareMatrix(self.0 * rhs.0)
    }
}

impl Neg for &SquareMatrix {
    type Output = SquareMatrix;
    fn neg(self) -> SquareMatrix {
        SquareMatrix(-&self.0)
    }
}

impl Neg for SquareMatrix {
    type Output = SquareMatrix;
    fn neg(self) -> SquareMatrix {
        SquareMatrix(-self.0)
    }
}

impl Serialize for SquareMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .into_iter()
            .map(|r| r.into_iter().map(|c| [c.re, c.im]).collect())
            .collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SquareMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(deserializer)?;
        let rows: Vec<Vec<C64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[re, im]| C64::new(re, im)).collect())
            .collect();
        SquareMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// `[re, im]` pair serialization for complex scalars.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &C64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }

    pub mod vec {
        use super::C64;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
            v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
            let v = Vec::<[f64; 2]>::deserialize(d)?;
            Ok(v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
        }
    }
}

/// `XY - YX`.
pub fn commutator(x: &SquareMatrix, y: &SquareMatrix) -> Result<SquareMatrix> {
    x.check_same_dim(y)?;
    Ok(bracket(x, y))
}

/// Unchecked commutator for internal hot paths where dimensions are known.
pub(crate) fn bracket(x: &SquareMatrix, y: &SquareMatrix) -> SquareMatrix {
    SquareMatrix(&x.0 * &y.0 - &y.0 * &x.0)
}

/// `tr(XY)`.
pub fn trace_pairing(x: &SquareMatrix, y: &SquareMatrix) -> Result<C64> {
    x.check_same_dim(y)?;
    Ok(pairing(x, y))
}

pub(crate) fn pairing(x: &SquareMatrix, y: &SquareMatrix) -> C64 {
    let n = x.dim();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += x.0[(i, k)] * y.0[(k, i)];
        }
    }
    acc
}

/// Smallest achievable maximum deviation between two eigenvalue multisets,
/// over all matchings.
pub fn spectrum_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    (0..n)
        .permutations(n)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .map(|(i, &j)| (a[i] - b[j]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// A residue on a fixed coadjoint orbit: the matrix together with the
/// spectrum that labels its orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPoint {
    pub p: SquareMatrix,
    #[serde(with = "complex_pair::vec")]
    pub reference_spectrum: Vec<C64>,
}

impl OrbitPoint {
    /// Wraps `p`, taking its current eigenvalues as the orbit label.
    pub fn new(p: SquareMatrix) -> Result<Self> {
        let scale = p.norm().max(1.0);
        if p.trace().norm() > 1e-12 * scale {
            return Err(Error::SpectrumNotTraceless(p.trace().norm()));
        }
        let reference_spectrum = p.eigenvalues();
        Ok(Self {
            p,
            reference_spectrum,
        })
    }

    /// `p` with an explicitly declared orbit label, checked against its eigenvalues.
    pub fn with_spectrum(p: SquareMatrix, spectrum: Vec<C64>) -> Result<Self> {
        let point = Self {
            p,
            reference_spectrum: spectrum,
        };
        let drift = point.spectrum_drift();
        if drift > 1e-9 * point.p.norm().max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "declared spectrum differs from eigenvalues by {drift:e}"
            )));
        }
        Ok(point)
    }

    /// The orbit point `diag(spectrum)` (identity conjugator).
    pub fn diagonal(spectrum: &[C64]) -> Result<Self> {
        check_traceless_spectrum(spectrum)?;
        Ok(Self {
            p: SquareMatrix::from_diagonal(spectrum),
            reference_spectrum: spectrum.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.p.dim()
    }

    /// Same orbit label, new representative.
    pub fn moved_to(&self, p: SquareMatrix) -> Self {
        Self {
            p,
            reference_spectrum: self.reference_spectrum.clone(),
        }
    }

    /// Distance of the current eigenvalues from the orbit label.
    pub fn spectrum_drift(&self) -> f64 {
        spectrum_distance(&self.p.eigenvalues(), &self.reference_spectrum)
    }
}

fn check_traceless_spectrum(spectrum: &[C64]) -> Result<()> {
    if spectrum.len() < 2 {
        return Err(Error::InvalidArgument(
            "spectrum must have at least two entries".into(),
        ));
    }
    let sum: C64 = spectrum.iter().sum();
    let scale = spectrum.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if sum.norm() > 1e-12 * scale {
        return Err(Error::SpectrumNotTraceless(sum.norm()));
    }
    Ok(())
}

const MAX_CONDITION: f64 = 1e6;

/// Samples `g diag(spectrum) g^{-1}` with a seeded, well-conditioned `g`.
pub fn orbit_sample(spectrum: &[C64], seed: u64) -> Result<OrbitPoint> {
    check_traceless_spectrum(spectrum)?;
    let scale = spectrum.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for (i, a) in spectrum.iter().enumerate() {
        for b in &spectrum[i + 1..] {
            if (a - b).norm() <= 1e-12 * scale {
                return Err(Error::DegenerateSpectrum);
            }
        }
    }
    let n = spectrum.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag = SquareMatrix::from_diagonal(spectrum);
    loop {
        let g = SquareMatrix::from_fn(n, |i, j| {
            let shift = if i == j { 1.0 } else { 0.0 };
            C64::new(
                shift + rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            )
        });
        if g.condition_number() > MAX_CONDITION {
            continue;
        }
        let p = diag.conjugate_by(&g)?;
        return Ok(OrbitPoint {
            p,
            reference_spectrum: spectrum.to_vec(),
        });
    }
}

/// Power traces `(tr p^2, ..., tr p^kmax)`; `kmax` is capped at the dimension.
pub fn casimir_values(p: &SquareMatrix, kmax: usize) -> Result<Vec<C64>> {
    if kmax < 2 {
        return Err(Error::InvalidArgument(format!("kmax must be >= 2, got {kmax}")));
    }
    if kmax > p.dim() {
        return Err(Error::InvalidArgument(format!(
            "kmax {kmax} exceeds the dimension cap {}",
            p.dim()
        )));
    }
    Ok(power_traces(p, kmax))
}

/// `(tr p^2, ..., tr p^kmax)` without the dimension cap.
pub fn power_traces(p: &SquareMatrix, kmax: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(kmax.saturating_sub(1));
    let mut power = p.clone();
    for _ in 2..=kmax {
        power = &power * p;
        out.push(power.trace());
    }
    out
}

/// `sum_a <p_a, [grad_a F, grad_a G]>`.
///
/// Gradients are per-site matrices with `dF = sum_a <grad_a F, dp_a>`.
pub fn lie_poisson_bracket(
    grad_f: &[SquareMatrix],
    grad_g: &[SquareMatrix],
    state: &[SquareMatrix],
) -> Result<C64> {
    if grad_f.len() != state.len() || grad_g.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            found: if grad_f.len() != state.len() {
                grad_f.len()
            } else {
                grad_g.len()
            },
        });
    }
    let mut acc = ZERO;
    for ((p, gf), gg) in state.iter().zip(grad_f).zip(grad_g) {
        p.check_same_dim(gf)?;
        p.check_same_dim(gg)?;
        acc += pairing(p, &bracket(gf, gg));
    }
    Ok(acc)
}

/// Random traceless matrix with entries in the unit box, for tests and fixtures.
pub fn random_traceless(n: usize, rng: &mut impl Rng) -> SquareMatrix {
    let mut m = SquareMatrix::from_fn(n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let shift = m.trace() / n as f64;
    for i in 0..n {
        m.0[(i, i)] -= shift;
    }
    m
}
