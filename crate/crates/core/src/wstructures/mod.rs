//! Local checks of W-structure identities on truncated jets: projective
//! structures (W2), their gauged versions W2N and W3N, and the moment
//! constraints of general WkN.

mod constraints;
mod jet;
mod sweep;
mod w2;
mod w3;

pub use constraints::{expected_pole_coefficients, pole_metadata_residual, wk_constraint_values, PoleCoefficients};
pub use jet::{schwarzian, BiJet, MatrixBiJet, DEFAULT_ORDER_Z, DEFAULT_ORDER_ZBAR};
pub use sweep::{identity_sweep, random_quasiconformal_map, IdentitySweep, SweepOptions};
pub use w2::{
    flatness_residual, w2_from_map, w2_projective_residual, w2_residual_jet, w2n_coefficients, w2n_curvature_blocks,
    w2n_ward_residual, W2nCoefficients,
};
pub use w3::{
    w3_reduced_residuals, w3_structure_residuals, w3n_coefficients, w3n_coefficients_displayed, w3n_curvature_blocks,
    w3n_row3_residuals, W3Residuals, W3nCoefficients,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::C64;
use crate::error::{Error, Result};

/// Truncation needed by the W2 and W2N identities (`d^3 mu`, one `dbar`).
pub const W2_MIN_ORDERS: (usize, usize) = (3, 1);
/// Truncation needed by the W3 and W3N identities (`d^5 rho` after the curvature).
pub const W3_MIN_ORDERS: (usize, usize) = (5, 1);

/// Local field data of a W2 or W3 structure at one point, optionally gauged
/// by an `sl(N)` pair `(A, Abar)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleJson", into = "SampleJson")]
pub struct WFieldSample {
    kappa: C64,
    level: usize,
    t: BiJet,
    mu: BiJet,
    w: Option<BiJet>,
    rho: Option<BiJet>,
    gauge: Option<(MatrixBiJet, MatrixBiJet)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleJson {
    #[serde(with = "crate::algebra::complex_pair")]
    kappa: C64,
    level: usize,
    t: BiJet,
    mu: BiJet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<BiJet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<BiJet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<MatrixBiJet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    abar: Option<MatrixBiJet>,
}

impl TryFrom<SampleJson> for WFieldSample {
    type Error = Error;

    fn try_from(j: SampleJson) -> Result<Self> {
        let gauge = match (j.a, j.abar) {
            (Some(a), Some(abar)) => Some((a, abar)),
            (None, None) => None,
            _ => return Err(Error::InvalidArgument("a and abar must be given together".into())),
        };
        WFieldSample::new(j.kappa, j.level, j.t, j.mu, j.w, j.rho, gauge)
    }
}

impl From<WFieldSample> for SampleJson {
    fn from(s: WFieldSample) -> Self {
        let (a, abar) = s.gauge.map_or((None, None), |(a, b)| (Some(a), Some(b)));
        SampleJson {
            kappa: s.kappa,
            level: s.level,
            t: s.t,
            mu: s.mu,
            w: s.w,
            rho: s.rho,
            a,
            abar,
        }
    }
}

impl WFieldSample {
    /// Checks levels, presence of `W, rho` exactly at level 3, shared jet
    /// shape, and that every field is exact up to the level's minimal orders.
    pub fn new(
        kappa: C64,
        level: usize,
        t: BiJet,
        mu: BiJet,
        w: Option<BiJet>,
        rho: Option<BiJet>,
        gauge: Option<(MatrixBiJet, MatrixBiJet)>,
    ) -> Result<Self> {
        if kappa.norm() == 0.0 || !kappa.re.is_finite() || !kappa.im.is_finite() {
            return Err(Error::InvalidArgument("kappa must be finite and nonzero".into()));
        }
        let need = match level {
            2 => W2_MIN_ORDERS,
            3 => W3_MIN_ORDERS,
            _ => return Err(Error::InvalidArgument(format!("level must be 2 or 3, got {level}"))),
        };
        if (level == 3) != (w.is_some() && rho.is_some()) || (level == 2 && (w.is_some() || rho.is_some())) {
            return Err(Error::InvalidArgument("W and rho are required at level 3 and absent at level 2".into()));
        }
        let mut scalars = vec![&t, &mu];
        scalars.extend(w.iter());
        scalars.extend(rho.iter());
        let mut all: Vec<&BiJet> = scalars.clone();
        if let Some((a, abar)) = &gauge {
            if a.dim() != abar.dim() {
                return Err(Error::DimensionMismatch {
                    expected: a.dim(),
                    found: abar.dim(),
                });
            }
            all.push(a.template());
            all.push(abar.template());
        }
        if all.iter().any(|j| !j.same_shape(&t)) {
            return Err(Error::JetMismatch);
        }
        let (vz, vzb) = all
            .iter()
            .map(|j| j.validity())
            .fold((isize::MAX, isize::MAX), |(a, b), (c, d)| (a.min(c), b.min(d)));
        if vz < need.0 as isize || vzb < need.1 as isize {
            return Err(Error::Truncation {
                need_z: need.0,
                need_zbar: need.1,
                have_z: vz.max(0) as usize,
                have_zbar: vzb.max(0) as usize,
            });
        }
        Ok(Self {
            kappa,
            level,
            t,
            mu,
            w,
            rho,
            gauge,
        })
    }

    pub fn w2(kappa: C64, t: BiJet, mu: BiJet) -> Result<Self> {
        Self::new(kappa, 2, t, mu, None, None, None)
    }

    pub fn w3(kappa: C64, t: BiJet, mu: BiJet, w: BiJet, rho: BiJet) -> Result<Self> {
        Self::new(kappa, 3, t, mu, Some(w), Some(rho), None)
    }

    /// Same fields with the gauge pair `(A, Abar)` attached.
    pub fn with_gauge(self, a: MatrixBiJet, abar: MatrixBiJet) -> Result<Self> {
        Self::new(self.kappa, self.level, self.t, self.mu, self.w, self.rho, Some((a, abar)))
    }

    /// Same scalar fields without the gauge pair.
    pub fn ungauged(&self) -> Self {
        Self {
            gauge: None,
            ..self.clone()
        }
    }

    /// Level-2 sample with the same `T, mu` and gauge pair.
    pub fn to_level2(&self) -> Self {
        Self {
            level: 2,
            w: None,
            rho: None,
            ..self.clone()
        }
    }

    pub fn kappa(&self) -> C64 {
        self.kappa
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// `N`, or 1 for ungauged samples.
    pub fn dim(&self) -> usize {
        self.gauge.as_ref().map_or(1, |(a, _)| a.dim())
    }

    pub fn is_gauged(&self) -> bool {
        self.gauge.is_some()
    }

    pub fn t(&self) -> &BiJet {
        &self.t
    }

    pub fn mu(&self) -> &BiJet {
        &self.mu
    }

    pub fn w(&self) -> Option<&BiJet> {
        self.w.as_ref()
    }

    pub fn rho(&self) -> Option<&BiJet> {
        self.rho.as_ref()
    }

    pub fn gauge(&self) -> Option<(&MatrixBiJet, &MatrixBiJet)> {
        self.gauge.as_ref().map(|(a, b)| (a, b))
    }

    pub(crate) fn expect_shape(&self, level: usize, gauged: bool) -> Result<()> {
        if self.level != level || self.is_gauged() != gauged {
            return Err(Error::InvalidArgument(format!(
                "expected a {}level-{level} sample, got a {}level-{} sample",
                if gauged { "gauged " } else { "" },
                if self.is_gauged() { "gauged " } else { "" },
                self.level
            )));
        }
        Ok(())
    }

    fn gauge_pair(&self) -> (&MatrixBiJet, &MatrixBiJet) {
        let (a, b) = self.gauge.as_ref().expect("checked gauged");
        (a, b)
    }

    fn w3_fields(&self) -> (&BiJet, &BiJet) {
        (self.w.as_ref().expect("level 3"), self.rho.as_ref().expect("level 3"))
    }
}

/// Shape of random samples drawn by [`random_w_sample`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WSampleSpec {
    pub level: usize,
    /// `Some(N)` for gauged samples.
    pub gauge_dim: Option<usize>,
    pub order_z: usize,
    pub order_zbar: usize,
}

impl WSampleSpec {
    pub fn new(level: usize, gauge_dim: Option<usize>) -> Self {
        Self {
            level,
            gauge_dim,
            order_z: DEFAULT_ORDER_Z,
            order_zbar: DEFAULT_ORDER_ZBAR,
        }
    }
}

/// Sample with every coefficient's real and imaginary part uniform in
/// `[-1, 1]`, traceless `A, Abar`, and `|kappa|` in `[0.5, 1.5]` with a
/// random phase.
pub fn random_w_sample(spec: &WSampleSpec, seed: u64) -> Result<WFieldSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let kappa = C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
    let (jz, jzb) = (spec.order_z, spec.order_zbar);
    let jet = |rng: &mut ChaCha8Rng| {
        BiJet::from_fn(point, jz, jzb, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    };
    let t = jet(&mut rng);
    let mu = jet(&mut rng);
    let (w, rho) = if spec.level == 3 {
        (Some(jet(&mut rng)), Some(jet(&mut rng)))
    } else {
        (None, None)
    };
    let gauge = match spec.gauge_dim {
        Some(n) => {
            let traceless = |rng: &mut ChaCha8Rng| {
                let mut entries: Vec<BiJet> = (0..n * n).map(|_| jet(rng)).collect();
                let partial = (0..n - 1).fold(entries[0].zero_like(), |acc, i| &acc + &entries[i * n + i]);
                entries[n * n - 1] = -&partial;
                MatrixBiJet::from_entries(n, entries)
            };
            Some((traceless(&mut rng)?, traceless(&mut rng)?))
        }
        None => None,
    };
    WFieldSample::new(kappa, spec.level, t, mu, w, rho, gauge)
}
