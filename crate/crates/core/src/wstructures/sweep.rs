//! Random-sample sweeps over the W-structure identities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jet::{BiJet, MatrixBiJet};
use super::w2::{projective_operator, w2_from_map, w2_residual_jet, w2n_coefficients, w2n_curvature_blocks};
use super::w3::{w3_reduced_jets, w3n_coefficients, w3n_curvature_blocks};
use super::{random_w_sample, WFieldSample, WSampleSpec};
use crate::algebra::C64;
use crate::error::Result;

/// What a sweep draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub seed: u64,
    /// Samples per `(level, N)` pair.
    pub samples: usize,
    pub dims: Vec<usize>,
    /// Random quasiconformal maps fed to `w2_from_map`.
    pub maps: usize,
    pub order_z: usize,
    pub order_zbar: usize,
}

impl SweepOptions {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            samples: 100,
            dims: vec![2, 3],
            maps: 20,
            order_z: super::DEFAULT_ORDER_Z,
            order_zbar: super::DEFAULT_ORDER_ZBAR,
        }
    }
}

/// Largest norms found by a sweep. Structural entries must vanish for every
/// sample; reduction entries compare limits of neighbouring structures.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentitySweep {
    pub samples: usize,
    /// Row 1 of the W2N curvature.
    pub w2n_row1: f64,
    /// Rows 1 and 2 of the W3N curvature.
    pub w3n_rows12: f64,
    /// W3N at `rho = 0` against W2N: flatness blocks and `f1`.
    pub w3n_to_w2n: f64,
    /// W2N at `A = Abar = 0` against the projective equation.
    pub w2n_to_w2: f64,
    /// W3N at `A = Abar = rho = 0`: block `(3,2)` against the projective
    /// equation for `T/4`.
    pub w3n_to_w2: f64,
    /// W3N at `A = Abar = 0`: row 3 against the reduced W3 equations.
    pub w3n_to_w3: f64,
    /// Projective equation on samples built by `w2_from_map`.
    pub from_map: f64,
}

impl IdentitySweep {
    pub fn structural(&self) -> f64 {
        self.w2n_row1.max(self.w3n_rows12)
    }

    pub fn reduction(&self) -> f64 {
        self.w3n_to_w2n.max(self.w2n_to_w2).max(self.w3n_to_w2).max(self.w3n_to_w3)
    }

    fn merge(mut self, o: &Self) -> Self {
        self.samples += o.samples;
        self.w2n_row1 = self.w2n_row1.max(o.w2n_row1);
        self.w3n_rows12 = self.w3n_rows12.max(o.w3n_rows12);
        self.w3n_to_w2n = self.w3n_to_w2n.max(o.w3n_to_w2n);
        self.w2n_to_w2 = self.w2n_to_w2.max(o.w2n_to_w2);
        self.w3n_to_w2 = self.w3n_to_w2.max(o.w3n_to_w2);
        self.w3n_to_w3 = self.w3n_to_w3.max(o.w3n_to_w3);
        self.from_map = self.from_map.max(o.from_map);
        self
    }
}

fn with_gauge_of(s: &WFieldSample, rho: Option<BiJet>, gauge: Option<(MatrixBiJet, MatrixBiJet)>) -> Result<WFieldSample> {
    WFieldSample::new(s.kappa(), s.level(), s.t().clone(), s.mu().clone(), s.w().cloned(), rho, gauge)
}

fn zero_gauge(s: &WFieldSample) -> Option<(MatrixBiJet, MatrixBiJet)> {
    let z = MatrixBiJet::zeros(s.dim(), s.t());
    Some((z.clone(), z))
}

fn level2_sample(spec: &WSampleSpec, seed: u64) -> Result<IdentitySweep> {
    let s = random_w_sample(spec, seed)?;
    let n = s.dim();
    let b = w2n_curvature_blocks(&s)?;
    let w2n_row1 = b[0][0].max_valid_abs()?.max(b[0][1].max_valid_abs()?);
    let s0 = with_gauge_of(&s, None, zero_gauge(&s))?;
    let b0 = w2n_curvature_blocks(&s0)?;
    let r = w2_residual_jet(&s.ungauged())?;
    let w2n_to_w2 = (&b0[1][0] - &MatrixBiJet::scalar(n, &r)).max_valid_abs()?;
    Ok(IdentitySweep {
        samples: 1,
        w2n_row1,
        w2n_to_w2,
        ..Default::default()
    })
}

fn level3_sample(spec: &WSampleSpec, seed: u64) -> Result<IdentitySweep> {
    let s = random_w_sample(spec, seed)?;
    let n = s.dim();
    let b = w3n_curvature_blocks(&s)?;
    let mut w3n_rows12: f64 = 0.0;
    for row in &b[..2] {
        for blk in row {
            w3n_rows12 = w3n_rows12.max(blk.max_valid_abs()?);
        }
    }
    // rho = 0 against the level-2 structure with the same gauge pair.
    let zero = s.t().zero_like();
    let gauge = s.gauge().map(|(a, b)| (a.clone(), b.clone()));
    let s_rho0 = with_gauge_of(&s, Some(zero.clone()), gauge)?;
    let s2 = s_rho0.to_level2();
    let b3 = w3n_curvature_blocks(&s_rho0)?;
    let b2 = w2n_curvature_blocks(&s2)?;
    let flat = (&b3[2][2].scale_real(1.0 / 3.0) - &b2[1][1].scale_real(0.5)).max_valid_abs()?;
    let half = MatrixBiJet::scalar(n, &s.mu().d_z().scale_real(0.5));
    let f1 = (&(&w3n_coefficients(&s_rho0)?.f[0] - &w2n_coefficients(&s2)?.f1) - &half).max_valid_abs()?;
    // A = Abar = rho = 0: the T equation is the projective one for T/4.
    let s_plain = with_gauge_of(&s, Some(zero), zero_gauge(&s))?;
    let r2 = projective_operator(s.kappa(), &s.t().scale_real(0.25), s.mu()).scale_real(4.0);
    let w3n_to_w2 = (&w3n_curvature_blocks(&s_plain)?[2][1] - &MatrixBiJet::scalar(n, &r2)).max_valid_abs()?;
    // A = Abar = 0: row 3 is the reduced W3 system.
    let s_free = with_gauge_of(&s, s.rho().cloned(), zero_gauge(&s))?;
    let bf = w3n_curvature_blocks(&s_free)?;
    let red = w3_reduced_jets(&s.ungauged())?;
    let w3n_to_w3 = (&bf[2][0] - &MatrixBiJet::scalar(n, &red.w_equation))
        .max_valid_abs()?
        .max((&bf[2][1] - &MatrixBiJet::scalar(n, &red.t_equation)).max_valid_abs()?)
        .max(bf[2][2].max_valid_abs()?);
    Ok(IdentitySweep {
        samples: 1,
        w3n_rows12,
        w3n_to_w2n: flat.max(f1),
        w3n_to_w2,
        w3n_to_w3,
        ..Default::default()
    })
}

/// `F = z + sum_{j + k >= 2} c_jk (z - z0)^j (zbar - zbar0)^k` with
/// `|Re c|, |Im c| <= 0.1`.
pub fn random_quasiconformal_map(order_z: usize, order_zbar: usize, seed: u64) -> BiJet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    BiJet::from_fn(point, order_z, order_zbar, |j, k| match (j, k) {
        (0, 0) => point,
        (1, 0) => C64::new(1.0, 0.0),
        (0, 1) => C64::new(0.0, 0.0),
        _ => C64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)),
    })
}

fn map_sample(opts: &SweepOptions, seed: u64) -> Result<IdentitySweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x006b_6170_7061);
    let kappa = C64::from_polar(rng.random_range(0.5..1.5), rng.random_range(0.0..std::f64::consts::TAU));
    let f = random_quasiconformal_map(opts.order_z, opts.order_zbar, seed);
    let s = w2_from_map(&f, kappa)?;
    Ok(IdentitySweep {
        from_map: w2_residual_jet(&s)?.max_valid_abs()?,
        ..Default::default()
    })
}

/// Sweeps both levels over every `N` in `dims`, plus the map construction.
/// Sample seeds are `seed + i` offset per `(level, N)` block, so results do
/// not depend on thread scheduling.
pub fn identity_sweep(opts: &SweepOptions) -> Result<IdentitySweep> {
    let mut jobs: Vec<(usize, usize, u64)> = Vec::new();
    for (d, &n) in opts.dims.iter().enumerate() {
        for level in [2, 3] {
            let block = ((d * 2 + level - 2) as u64) << 32;
            jobs.extend((0..opts.samples as u64).map(|i| (level, n, opts.seed.wrapping_add(block + i))));
        }
    }
    let parts = jobs
        .par_iter()
        .map(|&(level, n, seed)| {
            let spec = WSampleSpec {
                level,
                gauge_dim: Some(n),
                order_z: opts.order_z,
                order_zbar: opts.order_zbar,
            };
            if level == 2 {
                level2_sample(&spec, seed)
            } else {
                level3_sample(&spec, seed)
            }
        })
        .chain((0..opts.maps as u64).into_par_iter().map(|i| map_sample(opts, opts.seed.wrapping_add(u64::MAX / 2 + i))))
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.iter().fold(IdentitySweep::default(), IdentitySweep::merge))
}
