//! W3 structures and their `sl(N)` gauged version.

use super::jet::{BiJet, MatrixBiJet};
use super::w2::{curvature, split_blocks};
use super::WFieldSample;
use crate::algebra::C64;
use crate::error::Result;

/// `(d^2 - T / kappa^2) f`.
fn lop(kappa: C64, t: &BiJet, f: &BiJet) -> BiJet {
    &f.d_z_n(2) - &(t * f).scale((kappa * kappa).inv())
}

/// Residuals of the two W3 equations: the one solved for `dbar T` and the one
/// solved for `dbar W`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct W3Residuals {
    pub t_equation: C64,
    pub w_equation: C64,
}

pub(crate) struct W3Jets {
    pub t_equation: BiJet,
    pub w_equation: BiJet,
}

impl W3Jets {
    fn values(&self) -> Result<W3Residuals> {
        Ok(W3Residuals {
            t_equation: self.t_equation.value()?,
            w_equation: self.w_equation.value()?,
        })
    }
}

/// `(dbar + rho d^2 + (mu + 2 d rho) d + 3 d mu) W`.
fn w_transport(w: &BiJet, mu: &BiJet, rho: &BiJet) -> BiJet {
    let drho2 = &rho.d_z().scale_real(2.0) + mu;
    &(&(&w.d_zbar() + &(rho * &w.d_z_n(2))) + &(&drho2 * &w.d_z())) + &(&mu.d_z() * w).scale_real(3.0)
}

pub(crate) fn w3_structure_jets(sample: &WFieldSample) -> Result<W3Jets> {
    sample.expect_shape(3, false)?;
    let k = sample.kappa();
    let (t, mu) = (sample.t(), sample.mu());
    let (w, rho) = sample.w3_fields();
    let lr = lop(k, t, rho);
    let ki = k.inv();
    let t_transport = &(&t.d_zbar() + &(mu * &t.d_z())) + &(&mu.d_z() * t).scale_real(2.0);
    let rhs = &(&lr.d_z_n(2).scale(k * k * (2.0 / 3.0)) + &(w * rho).d_z().scale(ki))
        - &(w * &(mu - &rho.d_z())).scale(ki);
    let t_equation = &(&mu.d_z_n(3).scale(k * k) - &t_transport) - &rhs;
    let x = &mu.d_z() - &lr.scale_real(2.0 / 3.0);
    let w_equation = &w_transport(w, mu, rho) - &lop(k, t, &x).d_z().scale(k * k * k);
    Ok(W3Jets { t_equation, w_equation })
}

/// The two W3 equations as displayed, evaluated at the point on an ungauged
/// level-3 sample.
pub fn w3_structure_residuals(sample: &WFieldSample) -> Result<W3Residuals> {
    w3_structure_jets(sample)?.values()
}

pub(crate) fn w3_reduced_jets(sample: &WFieldSample) -> Result<W3Jets> {
    sample.expect_shape(3, false)?;
    let k = sample.kappa();
    let (t, mu) = (sample.t(), sample.mu());
    let (w, rho) = sample.w3_fields();
    let lr = lop(k, t, rho);
    let t_transport = &(&t.d_zbar() + &(mu * &t.d_z())) + &(&mu.d_z() * t).scale_real(2.0);
    let w_terms = &(rho * &w.d_z()).scale_real(2.0) + &(&rho.d_z() * w).scale_real(3.0);
    let t_equation = &(&(&t_transport - &mu.d_z_n(3).scale(k * k * 2.0)) + &lr.d_z_n(2).scale(k * k)) + &w_terms.scale(k.inv());
    let x = &mu.d_z() - &lr.scale_real(2.0 / 3.0);
    let third = &x.d_z_n(3) - &(t * &x.d_z()).scale((k * k).inv());
    let w_equation = &w_transport(w, mu, rho) - &third.scale(k * k * k);
    Ok(W3Jets { t_equation, w_equation })
}

/// The W3 equations obtained from the flat `3 x 3` connection with the gauge
/// fields switched off; these are the rows `(3,2)` and `(3,1)` of the
/// curvature at `A = Abar = 0`.
pub fn w3_reduced_residuals(sample: &WFieldSample) -> Result<W3Residuals> {
    w3_reduced_jets(sample)?.values()
}

/// `f1 .. f7` together with `Ttilde` and `Wtilde`.
#[derive(Clone, Debug, PartialEq)]
pub struct W3nCoefficients {
    pub f: [MatrixBiJet; 7],
    pub t_tilde: MatrixBiJet,
    pub w_tilde: MatrixBiJet,
}

struct W3nParts {
    k: C64,
    n: usize,
    a: MatrixBiJet,
    abar: MatrixBiJet,
    mu: BiJet,
    rho: BiJet,
    lr: BiJet,
    t_tilde: MatrixBiJet,
    w_tilde: MatrixBiJet,
    f1: MatrixBiJet,
    f2: MatrixBiJet,
}

impl W3nParts {
    fn new(sample: &WFieldSample) -> Result<Self> {
        sample.expect_shape(3, true)?;
        let k = sample.kappa();
        let ki = k.inv();
        let (a, abar) = sample.gauge_pair();
        let n = a.dim();
        let (t, mu) = (sample.t(), sample.mu());
        let (w, rho) = sample.w3_fields();
        let s = |j: &BiJet| MatrixBiJet::scalar(n, j);
        let a2 = a * a;
        let da = a.d_z();
        let t_tilde = &s(t) - &(&a2 + &da.scale(k)).scale_real(3.0);
        let w_tilde = &(&(&(&s(w) + &a.scale_jet(t)) - &(&a2 * a)) - &(&(a * &da) + &a2.d_z()).scale(k))
            - &da.d_z().scale(k * k);
        let lr = lop(k, t, rho);
        let f1 = &(&(&(&s(&(&mu.d_z() - &lr.scale_real(2.0 / 3.0))) - abar) + &a.scale_jet(&rho.d_z()).scale(2.0 * ki))
            - &a.scale_jet(mu).scale(ki))
            - &a2.scale_jet(rho).scale(2.0 * ki * ki);
        let f2 = &s(&(mu - &rho.d_z()).scale(-ki)) - &a.scale_jet(rho).scale(3.0 * ki * ki);
        Ok(Self {
            k,
            n,
            a: a.clone(),
            abar: abar.clone(),
            mu: mu.clone(),
            rho: rho.clone(),
            lr,
            t_tilde,
            w_tilde,
            f1,
            f2,
        })
    }

    fn s(&self, j: &BiJet) -> MatrixBiJet {
        MatrixBiJet::scalar(self.n, j)
    }
}

/// `f1 .. f7` from `f1, f2` and the recursive relations
/// `f3 = kappa d f1 - Wtilde rho / kappa^2`,
/// `f4 = kappa d f2 + f1 - Ttilde rho / kappa^2`,
/// `f5 = -mu Wtilde / kappa + kappa d f3`,
/// `f6 = -mu Ttilde / kappa + kappa d f4 + f3`,
/// `f7 = 3 mu A / kappa - d mu + f4`.
pub fn w3n_coefficients(sample: &WFieldSample) -> Result<W3nCoefficients> {
    let p = W3nParts::new(sample)?;
    let (k, ki) = (p.k, p.k.inv());
    let rk2 = p.rho.scale(ki * ki);
    let mk = p.mu.scale(ki);
    let f3 = &p.f1.d_z().scale(k) - &p.w_tilde.scale_jet(&rk2);
    let f4 = &(&p.f2.d_z().scale(k) + &p.f1) - &p.t_tilde.scale_jet(&rk2);
    let f5 = &(-&p.w_tilde.scale_jet(&mk)) + &f3.d_z().scale(k);
    let f6 = &(&(-&p.t_tilde.scale_jet(&mk)) + &f4.d_z().scale(k)) + &f3;
    let f7 = &(&p.a.scale_jet(&mk).scale_real(3.0) - &p.s(&p.mu.d_z())) + &f4;
    Ok(W3nCoefficients {
        f: [p.f1, p.f2, f3, f4, f5, f6, f7],
        t_tilde: p.t_tilde,
        w_tilde: p.w_tilde,
    })
}

/// `f1 .. f7` from their expanded closed forms.
pub fn w3n_coefficients_displayed(sample: &WFieldSample) -> Result<W3nCoefficients> {
    let p = W3nParts::new(sample)?;
    let (k, ki) = (p.k, p.k.inv());
    let (a, abar, mu, rho, lr) = (&p.a, &p.abar, &p.mu, &p.rho, &p.lr);
    let a2 = a * a;
    let a_drho = a.scale_jet(&rho.d_z());
    let wrho = p.w_tilde.scale_jet(rho);
    let q = &a.scale_jet(mu) + &a2.scale_jet(rho).scale(2.0 * ki);
    let a2rho = a2.scale_jet(rho).scale(ki * ki);
    let f3 = &(&(&(&(&p.s(&lr.d_z().scale(k * (-2.0 / 3.0))) + &p.s(&mu.d_z_n(2).scale(k))) - &abar.d_z().scale(k))
        + &a_drho.d_z().scale_real(2.0))
        - &wrho.scale(ki * ki))
        - &q.d_z();
    let f4 = &(&(&(&p.s(&lr.scale_real(1.0 / 3.0)) - &a_drho.scale(ki)) - abar) + &a2rho) - &a.scale_jet(mu).scale(ki);
    let f5 = &(&(&(&(&(&p.s(&lr.d_z_n(2).scale(k * k * (-2.0 / 3.0))) + &p.s(&mu.d_z_n(3).scale(k * k)))
        - &abar.d_z_n(2).scale(k * k))
        + &a_drho.d_z_n(2).scale(2.0 * k))
        - &wrho.d_z().scale(ki))
        - &p.w_tilde.scale_jet(mu).scale(ki))
        - &q.d_z_n(2).scale(k);
    let f6 = &(&(&(&(&(&(&p.s(&lr.d_z().scale(k * (-2.0 / 3.0))) + &p.s(&mu.d_z_n(2).scale(k))) - &abar.d_z().scale(k))
        + &a_drho.d_z())
        - &wrho.scale(ki * ki))
        - &p.t_tilde.scale_jet(mu).scale(ki))
        + &a2.d_z().scale_jet(rho).scale(3.0 * ki))
        - &q.d_z().scale_real(2.0);
    let f7 = &(&(&(&(&a.scale_jet(mu).scale(2.0 * ki) - &p.s(&mu.d_z())) + &p.s(&lr.scale_real(1.0 / 3.0)))
        - &a_drho.scale(ki))
        - abar)
        + &a2rho;
    Ok(W3nCoefficients {
        f: [p.f1, p.f2, f3, f4, f5, f6, f7],
        t_tilde: p.t_tilde,
        w_tilde: p.w_tilde,
    })
}

fn w3n_cal(sample: &WFieldSample) -> Result<(W3nCoefficients, MatrixBiJet, MatrixBiJet)> {
    let c = w3n_coefficients(sample)?;
    let k = sample.kappa();
    let (a, _) = sample.gauge_pair();
    let n = a.dim();
    let (mu, rho) = (sample.mu(), sample.w3_fields().1);
    let zero = MatrixBiJet::zeros(n, mu);
    let one = MatrixBiJet::identity(n, mu);
    let a_cal = MatrixBiJet::from_blocks(&[
        vec![zero.clone(), one.clone(), zero.clone()],
        vec![zero.clone(), zero, one],
        vec![c.w_tilde.clone(), c.t_tilde.clone(), a.scale_real(-3.0)],
    ])?;
    let [f1, f2, f3, f4, f5, f6, f7] = c.f.clone();
    let abar_cal = MatrixBiJet::from_blocks(&[
        vec![f1, f2, MatrixBiJet::scalar(n, &rho.scale(-(k * k).inv()))],
        vec![f3, f4, MatrixBiJet::scalar(n, &mu.scale(-k.inv()))],
        vec![f5, f6, f7],
    ])?;
    Ok((c, a_cal, abar_cal))
}

/// Blocks of the curvature of the `3N x 3N` pair. Rows 1 and 2 vanish
/// identically; row 3 is `[r1, r2 - f5, -3 r3]` with `r1..r3` from
/// [`w3n_row3_residuals`].
pub fn w3n_curvature_blocks(sample: &WFieldSample) -> Result<[[MatrixBiJet; 3]; 3]> {
    let (_, a_cal, abar_cal) = w3n_cal(sample)?;
    Ok(split_blocks(&curvature(&a_cal, &abar_cal, sample.kappa()), sample.dim()))
}

/// The three gauged W3 identities as displayed:
/// `dbar Wt - kappa d f5 + Wt f1 + Tt f3 - 3 A f5 - f7 Wt`,
/// `dbar Tt - kappa d f6 + Wt f2 + Tt f4 - 3 A f6 - f7 Tt`,
/// `dbar A - kappa d Abar + [Abar, A]`.
pub fn w3n_row3_residuals(sample: &WFieldSample) -> Result<[MatrixBiJet; 3]> {
    let c = w3n_coefficients(sample)?;
    let k = sample.kappa();
    let (a, abar) = sample.gauge_pair();
    let [f1, f2, f3, f4, f5, f6, f7] = &c.f;
    let (wt, tt) = (&c.w_tilde, &c.t_tilde);
    let a3 = a.scale_real(3.0);
    let r1 = &(&(&(&(&wt.d_zbar() - &f5.d_z().scale(k)) + &(wt * f1)) + &(tt * f3)) - &(&a3 * f5)) - &(f7 * wt);
    let r2 = &(&(&(&(&tt.d_zbar() - &f6.d_z().scale(k)) + &(wt * f2)) + &(tt * f4)) - &(&a3 * f6)) - &(f7 * tt);
    let r3 = &(&a.d_zbar() - &abar.d_z().scale(k)) + &abar.commutator(a);
    Ok([r1, r2, r3])
}
