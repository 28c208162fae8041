//! Genus-0 Fuchsian connections `L(z) = sum_a p_a / (z - x_a)` and their
//! spectral curves `det(lambda + L(z)) = 0`.

use serde::{Deserialize, Serialize};

use crate::algebra::{complex_pair, OrbitPoint, SquareMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

/// Relative tolerance for `sum_a p_a = 0` on construction.
const INFINITY_TOL: f64 = 1e-12;

/// Connection data `(kappa, x_a, p_a)`; the operator is `kappa d + L(z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConnectionJson", into = "ConnectionJson")]
pub struct FuchsianConnection {
    kappa: C64,
    points: Vec<C64>,
    residues: Vec<OrbitPoint>,
    trivial_at_infinity: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConnectionJson {
    #[serde(with = "complex_pair")]
    kappa: C64,
    #[serde(with = "complex_pair::vec")]
    points: Vec<C64>,
    residues: Vec<SquareMatrix>,
    #[serde(default = "default_true")]
    trivial_at_infinity: bool,
}

fn default_true() -> bool {
    true
}

impl TryFrom<ConnectionJson> for FuchsianConnection {
    type Error = Error;
    fn try_from(raw: ConnectionJson) -> Result<Self> {
        let residues = raw
            .residues
            .into_iter()
            .map(OrbitPoint::new)
            .collect::<Result<Vec<_>>>()?;
        FuchsianConnection::new(raw.kappa, raw.points, residues, raw.trivial_at_infinity)
    }
}

impl From<FuchsianConnection> for ConnectionJson {
    fn from(c: FuchsianConnection) -> Self {
        ConnectionJson {
            kappa: c.kappa,
            points: c.points,
            residues: c.residues.into_iter().map(|r| r.p).collect(),
            trivial_at_infinity: c.trivial_at_infinity,
        }
    }
}

impl FuchsianConnection {
    pub fn new(
        kappa: C64,
        points: Vec<C64>,
        residues: Vec<OrbitPoint>,
        trivial_at_infinity: bool,
    ) -> Result<Self> {
        if kappa.norm() == 0.0 || !kappa.re.is_finite() || !kappa.im.is_finite() {
            return Err(Error::InvalidArgument("kappa must be finite and nonzero".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidArgument("at least one marked point is required".into()));
        }
        if points.len() != residues.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                found: residues.len(),
            });
        }
        let dim = residues[0].dim();
        for r in &residues {
            if r.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.dim(),
                });
            }
        }
        check_distinct(&points)?;
        let conn = Self {
            kappa,
            points,
            residues,
            trivial_at_infinity,
        };
        if trivial_at_infinity {
            let defect = conn.residue_sum().norm();
            let scale = conn.residue_scale();
            if defect >= INFINITY_TOL * scale {
                return Err(Error::InvalidArgument(format!(
                    "residues sum to {defect:e}, but the connection is declared trivial at infinity"
                )));
            }
        }
        Ok(conn)
    }

    /// Convenience constructor from bare matrices; orbit labels are taken from
    /// the current eigenvalues.
    pub fn from_matrices(
        kappa: C64,
        points: Vec<C64>,
        residues: Vec<SquareMatrix>,
        trivial_at_infinity: bool,
    ) -> Result<Self> {
        let residues = residues
            .into_iter()
            .map(OrbitPoint::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(kappa, points, residues, trivial_at_infinity)
    }

    pub fn kappa(&self) -> C64 {
        self.kappa
    }

    pub fn points(&self) -> &[C64] {
        &self.points
    }

    pub fn residues(&self) -> &[OrbitPoint] {
        &self.residues
    }

    pub fn residue_matrices(&self) -> Vec<SquareMatrix> {
        self.residues.iter().map(|r| r.p.clone()).collect()
    }

    pub fn trivial_at_infinity(&self) -> bool {
        self.trivial_at_infinity
    }

    pub fn dim(&self) -> usize {
        self.residues[0].dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn residue_sum(&self) -> SquareMatrix {
        let mut sum = SquareMatrix::zeros(self.dim());
        for r in &self.residues {
            sum += &r.p;
        }
        sum
    }

    fn residue_scale(&self) -> f64 {
        self.residues.iter().map(|r| r.p.norm()).fold(1.0, f64::max)
    }

    /// Same connection with every residue replaced by `g p_a g^{-1}`.
    pub fn conjugated(&self, g: &SquareMatrix) -> Result<Self> {
        let residues = self
            .residues
            .iter()
            .map(|r| Ok(r.moved_to(r.p.conjugate_by(g)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            residues,
            ..self.clone()
        })
    }

    /// Length scale used for pole-proximity tests.
    pub fn scale(&self) -> f64 {
        self.points.iter().map(|x| x.norm()).fold(1.0, f64::max)
    }
}

fn check_distinct(points: &[C64]) -> Result<()> {
    for (a, x) in points.iter().enumerate() {
        for (b, y) in points.iter().enumerate().skip(a + 1) {
            if (x - y).norm() == 0.0 {
                return Err(Error::CoincidentPoints {
                    a,
                    b,
                    separation: 0.0,
                });
            }
        }
    }
    Ok(())
}

/// `sum_a p_a / (z - x_a)` for raw data; fails when `z` sits on a pole.
pub(crate) fn lax_matrix(points: &[C64], residues: &[&SquareMatrix], z: C64) -> Result<SquareMatrix> {
    let scale = points.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let mut out = SquareMatrix::zeros(residues[0].dim());
    for (a, (x, p)) in points.iter().zip(residues).enumerate() {
        let d = z - x;
        if d.norm() <= 1e-12 * scale {
            return Err(Error::AtPole { index: a });
        }
        out += &p.scale(d.inv());
    }
    Ok(out)
}

/// `L(z) = sum_a p_a / (z - x_a)`.
pub fn evaluate_l(conn: &FuchsianConnection, z: C64) -> Result<SquareMatrix> {
    let residues: Vec<&SquareMatrix> = conn.residues.iter().map(|r| &r.p).collect();
    lax_matrix(&conn.points, &residues, z)
}

/// `det(lambda + L(z))` evaluated pointwise.
pub fn characteristic_value(conn: &FuchsianConnection, lambda: C64, z: C64) -> Result<C64> {
    let l = evaluate_l(conn, z)?;
    Ok((&l + &SquareMatrix::identity(l.dim()).scale(lambda)).determinant())
}

/// Principal part of one coefficient `s_k` at one marked point:
/// `coefficients[m-1]` multiplies `(z - x_a)^{-m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrincipalPart {
    #[serde(with = "complex_pair")]
    pub pole: C64,
    #[serde(with = "complex_pair::vec")]
    pub coefficients: Vec<C64>,
}

impl PrincipalPart {
    fn eval(&self, z: C64) -> C64 {
        let u = (z - self.pole).inv();
        let mut acc = ZERO;
        let mut pow = u;
        for c in &self.coefficients {
            acc += c * pow;
            pow *= u;
        }
        acc
    }
}

/// Coefficients of `det(lambda + L(z)) = lambda^N + sum_k s_k(z) lambda^{N-k}`.
///
/// `L` vanishes at infinity, so each `s_k` equals the sum of its principal
/// parts and no polynomial tail is stored.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurveData {
    pub dim: usize,
    /// `parts[k-1][a]` is the principal part of `s_k` at `x_a`.
    pub parts: Vec<Vec<PrincipalPart>>,
}

impl SpectralCurveData {
    /// `s_k(z)` for `1 <= k <= N`.
    pub fn coefficient(&self, k: usize, z: C64) -> C64 {
        self.parts[k - 1].iter().map(|pp| pp.eval(z)).sum()
    }

    /// `lambda^N + sum_k s_k(z) lambda^{N-k}`.
    pub fn evaluate(&self, lambda: C64, z: C64) -> C64 {
        let n = self.dim;
        let mut acc = lambda.powu(n as u32);
        for k in 1..=n {
            acc += self.coefficient(k, z) * lambda.powu((n - k) as u32);
        }
        acc
    }

    /// Largest coefficient difference between two curves with the same poles.
    pub fn max_difference(&self, other: &SpectralCurveData) -> f64 {
        let mut worst: f64 = 0.0;
        for (row_a, row_b) in self.parts.iter().zip(&other.parts) {
            for (pa, pb) in row_a.iter().zip(row_b) {
                worst = worst.max((pa.pole - pb.pole).norm());
                for (ca, cb) in pa.coefficients.iter().zip(&pb.coefficients) {
                    worst = worst.max((ca - cb).norm());
                }
            }
        }
        worst
    }
}

// Truncated power series in u with matrix coefficients.
type MatSeries = Vec<SquareMatrix>;

fn series_mul(a: &MatSeries, b: &MatSeries, order: usize) -> MatSeries {
    let n = a[0].dim();
    (0..=order)
        .map(|j| {
            let mut acc = SquareMatrix::zeros(n);
            for i in 0..=j {
                acc += &(&a[i] * &b[j - i]);
            }
            acc
        })
        .collect()
}

fn scalar_series_mul(a: &[C64], b: &[C64], order: usize) -> Vec<C64> {
    (0..=order)
        .map(|j| (0..=j).map(|i| a[i] * b[j - i]).sum())
        .collect()
}

/// Principal parts of every `s_k` at every marked point.
///
/// Near `x_a`, `u L = P(u) = p_a + sum_{j>=0} B_j u^{j+1}` with
/// `B_j = sum_{b != a} (-1)^j p_b / (x_a - x_b)^{j+1}`; then
/// `s_k = u^{-k} e_k(P(u))` and `e_k` follows from power sums by Newton's
/// identities on truncated series.
pub fn spectral_curve(conn: &FuchsianConnection) -> SpectralCurveData {
    let n = conn.dim();
    let order = n - 1;
    let mut parts: Vec<Vec<PrincipalPart>> = vec![Vec::new(); n];
    for (a, xa) in conn.points.iter().enumerate() {
        let mut p_series: MatSeries = vec![SquareMatrix::zeros(n); order + 1];
        p_series[0] = conn.residues[a].p.clone();
        for j in 0..order {
            let mut bj = SquareMatrix::zeros(n);
            for (b, xb) in conn.points.iter().enumerate() {
                if b == a {
                    continue;
                }
                let d = xa - xb;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                bj += &conn.residues[b].p.scale(d.powu(j as u32 + 1).inv() * sign);
            }
            p_series[j + 1] = bj;
        }
        // power sums pi_i(u) = tr P(u)^i
        let mut power = p_series.clone();
        let mut power_sums: Vec<Vec<C64>> = vec![vec![]; n + 1];
        for i in 1..=n {
            if i > 1 {
                power = series_mul(&power, &p_series, order);
            }
            power_sums[i] = power.iter().map(|m| m.trace()).collect();
        }
        let mut e: Vec<Vec<C64>> = vec![vec![ZERO; order + 1]; n + 1];
        e[0][0] = ONE;
        for k in 1..=n {
            let mut acc = vec![ZERO; order + 1];
            for i in 1..=k {
                let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
                let term = scalar_series_mul(&e[k - i], &power_sums[i], order);
                for (t, v) in acc.iter_mut().zip(term) {
                    *t += v * sign;
                }
            }
            e[k] = acc.into_iter().map(|v| v / k as f64).collect();
        }
        for k in 1..=n {
            // coefficient of u^{-m} in u^{-k} e_k(u) is [u^{k-m}] e_k
            let coefficients = (1..=k).map(|m| e[k][k - m]).collect();
            parts[k - 1].push(PrincipalPart {
                pole: *xa,
                coefficients,
            });
        }
    }
    SpectralCurveData { dim: n, parts }
}

/// Dimension count `(2j - 1)(g - 1) + (j - 1) n` of deformation moduli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuliDimension {
    pub value: i64,
    /// Set when the count is negative, i.e. there are no deformation moduli.
    pub no_moduli: bool,
}

pub fn moduli_dimension(genus: i64, n: i64, j: i64) -> Result<ModuliDimension> {
    if genus < 0 || n < 0 {
        return Err(Error::InvalidArgument("genus and n must be non-negative".into()));
    }
    if j < 2 {
        return Err(Error::InvalidArgument(format!("spin j must be >= 2, got {j}")));
    }
    let value = (2 * j - 1) * (genus - 1) + (j - 1) * n;
    Ok(ModuliDimension {
        value,
        no_moduli: value < 0,
    })
}
