//! Projective structures and their `sl(N)` gauged version.

use super::jet::{schwarzian, BiJet, MatrixBiJet};
use super::WFieldSample;
use crate::algebra::C64;
use crate::error::Result;

/// `(dbar + mu d + 2 d mu) T - kappa^2/2 d^3 mu` as a jet.
pub(crate) fn projective_operator(kappa: C64, t: &BiJet, mu: &BiJet) -> BiJet {
    let lhs = &(&t.d_zbar() + &(mu * &t.d_z())) + &(&mu.d_z() * t).scale_real(2.0);
    &lhs - &mu.d_z_n(3).scale(kappa * kappa * 0.5)
}

/// Residual jet of the projective-structure equation.
pub fn w2_residual_jet(sample: &WFieldSample) -> Result<BiJet> {
    sample.expect_shape(2, false)?;
    Ok(projective_operator(sample.kappa(), sample.t(), sample.mu()))
}

/// Residual of `(dbar + mu d + 2 d mu) T = kappa^2/2 d^3 mu` at the point.
pub fn w2_projective_residual(sample: &WFieldSample) -> Result<C64> {
    w2_residual_jet(sample)?.value()
}

/// Projective structure of a quasiconformal map `F`: the Beltrami coefficient
/// `mu = -dbar F / d F` and `T = -kappa^2/2 S(F)`.
pub fn w2_from_map(f: &BiJet, kappa: C64) -> Result<WFieldSample> {
    let s = schwarzian(f)?;
    let mu = -&(&f.d_zbar() * &f.d_z().recip()?);
    let t = s.scale(kappa * kappa * -0.5);
    WFieldSample::w2(kappa, t, mu)
}

/// `Ttilde = T - A^2 - kappa dA` and the top-left entry `f1` of `Abar_cal`.
#[derive(Clone, Debug, PartialEq)]
pub struct W2nCoefficients {
    pub t_tilde: MatrixBiJet,
    pub f1: MatrixBiJet,
}

pub fn w2n_coefficients(sample: &WFieldSample) -> Result<W2nCoefficients> {
    sample.expect_shape(2, true)?;
    let k = sample.kappa();
    let (a, abar) = sample.gauge_pair();
    let n = a.dim();
    let (t, mu) = (sample.t(), sample.mu());
    let t_tilde = &(&MatrixBiJet::scalar(n, t) - &(a * a)) - &a.d_z().scale(k);
    let f1 = &(&MatrixBiJet::scalar(n, &mu.d_z().scale_real(0.5)) - abar) - &a.scale_jet(mu).scale(k.inv());
    Ok(W2nCoefficients { t_tilde, f1 })
}

/// `dbar A_cal - kappa d Abar_cal + [A_cal, Abar_cal]`.
pub(crate) fn curvature(a_cal: &MatrixBiJet, abar_cal: &MatrixBiJet, kappa: C64) -> MatrixBiJet {
    &(&a_cal.d_zbar() - &abar_cal.d_z().scale(kappa)) + &a_cal.commutator(abar_cal)
}

pub(crate) fn split_blocks<const B: usize>(m: &MatrixBiJet, n: usize) -> [[MatrixBiJet; B]; B] {
    std::array::from_fn(|r| std::array::from_fn(|c| m.block(r, c, n)))
}

/// Blocks of the curvature of the `2N x 2N` pair built from `(T, mu, A, Abar)`.
/// Row 1 vanishes identically; `(2,2)` is `-2` times the flatness residual.
pub fn w2n_curvature_blocks(sample: &WFieldSample) -> Result<[[MatrixBiJet; 2]; 2]> {
    let W2nCoefficients { t_tilde, f1 } = w2n_coefficients(sample)?;
    let k = sample.kappa();
    let (a, abar) = sample.gauge_pair();
    let n = a.dim();
    let mu = sample.mu();
    let zero = MatrixBiJet::zeros(n, mu);
    let one = MatrixBiJet::identity(n, mu);
    let mu_k = MatrixBiJet::scalar(n, &mu.scale(k.inv()));
    let a_cal = MatrixBiJet::from_blocks(&[vec![zero, one], vec![t_tilde.clone(), a.scale_real(-2.0)]])?;
    let b21 = &(-&(&mu_k * &t_tilde)) + &f1.d_z().scale(k);
    let b22 = &(&(-abar) + &(&mu_k * a)) - &MatrixBiJet::scalar(n, &mu.d_z().scale_real(0.5));
    let abar_cal = MatrixBiJet::from_blocks(&[vec![f1, -&mu_k], vec![b21, b22]])?;
    Ok(split_blocks(&curvature(&a_cal, &abar_cal, k), n))
}

/// Ward identity as displayed:
/// `(dbar + mu d + 2 d mu) Ttilde - kappa^2/2 d^3 mu - [Ttilde, Abar + mu A / kappa] - 2 kappa A d f1`.
pub fn w2n_ward_residual(sample: &WFieldSample) -> Result<MatrixBiJet> {
    let W2nCoefficients { t_tilde, f1 } = w2n_coefficients(sample)?;
    let k = sample.kappa();
    let (a, abar) = sample.gauge_pair();
    let n = a.dim();
    let mu = sample.mu();
    let lhs = &(&(&t_tilde.d_zbar() + &t_tilde.d_z().scale_jet(mu)) + &t_tilde.scale_jet(&mu.d_z()).scale_real(2.0))
        - &MatrixBiJet::scalar(n, &mu.d_z_n(3).scale(k * k * 0.5));
    let rhs = &t_tilde.commutator(&(abar + &a.scale_jet(mu).scale(k.inv()))) + &(a * &f1.d_z()).scale(k * 2.0);
    Ok(&lhs - &rhs)
}

/// `dbar A - kappa d Abar + [Abar, A]` for a gauged sample of either level.
pub fn flatness_residual(sample: &WFieldSample) -> Result<MatrixBiJet> {
    let (a, abar) = sample
        .gauge()
        .ok_or_else(|| crate::error::Error::InvalidArgument("flatness needs a gauged sample".into()))?;
    Ok(&(&a.d_zbar() - &abar.d_z().scale(sample.kappa())) + &abar.commutator(a))
}
