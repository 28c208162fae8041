//! Autonomous limit: Gaudin flows with frozen marked points, their Lax form and
//! conservation of the spectral curve.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{bracket, complex_pair, lie_poisson_bracket, power_traces, OrbitPoint, SquareMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::isoflow::{
    check_distinct, gradient, hamiltonian, integrate_residues, FieldSign, FlowOptions, FlowSample, LaxSnapshot,
    Trajectory,
};
use crate::ode::OdeStats;
use crate::sampling::random_probes_with_margin;

/// Residues over fixed marked points; `times` only records how long each
/// flow has run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutonomousState {
    #[serde(with = "complex_pair::vec")]
    pub positions: Vec<C64>,
    pub residues: Vec<OrbitPoint>,
    #[serde(with = "complex_pair::vec")]
    pub times: Vec<C64>,
}

impl AutonomousState {
    pub fn new(positions: Vec<C64>, residues: Vec<OrbitPoint>) -> Result<Self> {
        let state = Self {
            times: vec![ZERO; positions.len()],
            positions,
            residues,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n == 0 {
            return Err(Error::InvalidArgument("no marked points".into()));
        }
        if self.residues.len() != n || self.times.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.residues.len(),
            });
        }
        let dim = self.residues[0].dim();
        if let Some(r) = self.residues.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
        check_distinct(&self.positions)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.residues[0].dim()
    }

    pub fn residue_matrices(&self) -> Vec<SquareMatrix> {
        self.residues.iter().map(|r| r.p.clone()).collect()
    }

    fn check_index(&self, a: usize) -> Result<()> {
        if a >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: a,
                len: self.len(),
            });
        }
        Ok(())
    }
}

impl LaxSnapshot for AutonomousState {
    fn lax_positions(&self) -> Vec<C64> {
        self.positions.clone()
    }

    fn lax_residues(&self) -> Vec<&SquareMatrix> {
        self.residues.iter().map(|r| &r.p).collect()
    }
}

pub type AutonomousTrajectory = Trajectory<AutonomousState>;

/// Quadratic Gaudin Hamiltonian `H_a = sum_{b != a} tr(p_a p_b) / (x_a - x_b)`.
pub fn gaudin_hamiltonian(state: &AutonomousState, a: usize) -> Result<C64> {
    state.check_index(a)?;
    Ok(hamiltonian(&state.positions, &state.residue_matrices(), a))
}

fn gaudin_field(x: &[C64], p: &[SquareMatrix], a: usize, sign: f64) -> Vec<SquareMatrix> {
    let grad = gradient(x, p, a);
    p.iter()
        .zip(&grad)
        .map(|(pe, ge)| bracket(pe, ge).scale_real(sign))
        .collect()
}

/// Lie–Poisson Hamiltonian vector field `dp_e = [p_e, grad_e H_a]`.
pub fn gaudin_vector_field(state: &AutonomousState, a: usize) -> Result<Vec<SquareMatrix>> {
    state.check_index(a)?;
    Ok(gaudin_field(&state.positions, &state.residue_matrices(), a, 1.0))
}

/// `|{H_a, H_b}|` with analytic gradients.
pub fn commutation_check(state: &AutonomousState, a: usize, b: usize) -> Result<f64> {
    state.check_index(a)?;
    state.check_index(b)?;
    if a == b {
        return Ok(0.0);
    }
    let p = state.residue_matrices();
    let ga = gradient(&state.positions, &p, a);
    let gb = gradient(&state.positions, &p, b);
    Ok(lie_poisson_bracket(&ga, &gb, &p)?.norm())
}

/// Largest `|{H_a, H_b}|` over all pairs.
pub fn max_commutator(state: &AutonomousState) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..state.len() {
        for b in a + 1..state.len() {
            worst = worst.max(commutation_check(state, a, b)?);
        }
    }
    Ok(worst)
}

/// Integrates the Gaudin flow of `H_a` with positions frozen.
pub fn autonomous_flow(state0: &AutonomousState, a: usize, t_end: C64, tol: f64) -> Result<AutonomousTrajectory> {
    autonomous_flow_with(state0, a, t_end, &FlowOptions::new(tol))
}

pub fn autonomous_flow_with(
    state0: &AutonomousState,
    a: usize,
    t_end: C64,
    opts: &FlowOptions,
) -> Result<AutonomousTrajectory> {
    state0.validate()?;
    state0.check_index(a)?;
    let mut trajectory = Trajectory {
        direction: a,
        t_end,
        samples: vec![FlowSample {
            s: 0.0,
            t: ZERO,
            state: state0.clone(),
        }],
        stats: OdeStats::default(),
    };
    if t_end == ZERO {
        return Ok(trajectory);
    }
    let sign = match opts.sign {
        FieldSign::Correct => 1.0,
        FieldSign::Flipped => -1.0,
    };
    let x = state0.positions.clone();
    let (samples, stats) = integrate_residues(&state0.residue_matrices(), t_end, opts, |_, p| {
        gaudin_field(&x, p, a, sign)
    })?;
    trajectory.samples = samples
        .into_iter()
        .map(|(s, p)| {
            let mut state = state0.clone();
            for (o, m) in state.residues.iter_mut().zip(p) {
                *o = o.moved_to(m);
            }
            state.times[a] += t_end * s;
            FlowSample { s, t: t_end * s, state }
        })
        .collect();
    trajectory.stats = stats;
    Ok(trajectory)
}

/// `(lambda, z)` probes for the spectral audit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralProbe {
    #[serde(with = "complex_pair")]
    pub lambda: C64,
    #[serde(with = "complex_pair")]
    pub z: C64,
}

/// Seeded probes away from every position visited by the trajectory.
pub fn spectral_probes<S: LaxSnapshot>(trajectory: &Trajectory<S>, count: usize, seed: u64) -> Vec<SpectralProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let visited: Vec<C64> = trajectory
        .samples
        .iter()
        .flat_map(|s| s.state.lax_positions())
        .collect();
    random_probes_with_margin(&visited, count, 0.25, &mut rng)
        .into_iter()
        .map(|z| SpectralProbe {
            lambda: C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)),
            z,
        })
        .collect()
}

fn char_value(l: &SquareMatrix, lambda: C64) -> C64 {
    (l + &SquareMatrix::identity(l.dim()).scale(lambda)).determinant()
}

/// Largest relative change `|det(lambda + L_t(z)) - det(lambda + L_0(z))| /
/// max(1, |det(lambda + L_0(z))|)` over samples and 20 seeded probes.
pub fn spectral_conservation_audit<S: LaxSnapshot>(trajectory: &Trajectory<S>) -> Result<f64> {
    let probes = spectral_probes(trajectory, 20, 0x5eed);
    spectral_conservation_audit_with(trajectory, &probes)
}

pub fn spectral_conservation_audit_with<S: LaxSnapshot>(
    trajectory: &Trajectory<S>,
    probes: &[SpectralProbe],
) -> Result<f64> {
    let initial = trajectory.initial();
    let reference: Vec<C64> = probes
        .iter()
        .map(|pr| Ok(char_value(&initial.lax_at(pr.z)?, pr.lambda)))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for sample in &trajectory.samples[1..] {
        for (pr, d0) in probes.iter().zip(&reference) {
            let d = char_value(&sample.state.lax_at(pr.z)?, pr.lambda);
            worst = worst.max((d - d0).norm() / d0.norm().max(1.0));
        }
    }
    Ok(worst)
}

/// Largest change of `tr L(z)^k`, `k = 2..=kmax`, at fixed `z` along a trajectory.
pub fn trace_drift<S: LaxSnapshot>(trajectory: &Trajectory<S>, z: C64, kmax: usize) -> Result<f64> {
    let reference = power_traces(&trajectory.initial().lax_at(z)?, kmax);
    let mut worst: f64 = 0.0;
    for sample in &trajectory.samples[1..] {
        let traces = power_traces(&sample.state.lax_at(z)?, kmax);
        for (t, t0) in traces.iter().zip(&reference) {
            worst = worst.max((t - t0).norm());
        }
    }
    Ok(worst)
}

/// `max_z ||d_a L - [L, M_a]||` with `M_a = -p_a/(z - x_a)`, using `field` for
/// the residue velocities.
pub fn lax_form_residual_with(
    state: &AutonomousState,
    a: usize,
    probes: &[C64],
    field: &[SquareMatrix],
) -> Result<f64> {
    state.check_index(a)?;
    if field.len() != state.len() {
        return Err(Error::DimensionMismatch {
            expected: state.len(),
            found: field.len(),
        });
    }
    let pa = &state.residues[a].p;
    let mut worst: f64 = 0.0;
    for &z in probes {
        let l = state.lax_at(z)?;
        let mut dl = SquareMatrix::zeros(state.dim());
        for (x, v) in state.positions.iter().zip(field) {
            dl += &v.scale((z - x).inv());
        }
        let m = pa.scale(-(z - state.positions[a]).inv());
        worst = worst.max((&dl - &bracket(&l, &m)).norm());
    }
    Ok(worst)
}

/// Lax-form residual of the Gaudin field itself.
pub fn lax_form_residual(state: &AutonomousState, a: usize, probes: &[C64]) -> Result<f64> {
    let field = gaudin_vector_field(state, a)?;
    lax_form_residual_with(state, a, probes, &field)
}

/// Audit summary of one autonomous run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaudinReport {
    pub spectral_drift: f64,
    pub bracket_max: f64,
    pub hamiltonian_drift: f64,
    pub eigen_drift: f64,
    pub sum_p_drift: f64,
    pub ode: OdeStats,
}

/// Runs the flow of `H_a` and collects its conservation audits.
pub fn gaudin_run(state0: &AutonomousState, a: usize, t_end: C64, opts: &FlowOptions) -> Result<(AutonomousTrajectory, GaudinReport)> {
    let trajectory = autonomous_flow_with(state0, a, t_end, opts)?;
    let spectral_drift = spectral_conservation_audit(&trajectory)?;
    let mut bracket_max: f64 = 0.0;
    let mut hamiltonian_drift: f64 = 0.0;
    let h0: Vec<C64> = (0..state0.len())
        .map(|b| gaudin_hamiltonian(state0, b))
        .collect::<Result<_>>()?;
    for sample in &trajectory.samples {
        bracket_max = bracket_max.max(max_commutator(&sample.state)?);
        for (b, h) in h0.iter().enumerate() {
            hamiltonian_drift = hamiltonian_drift.max((gaudin_hamiltonian(&sample.state, b)? - h).norm());
        }
    }
    let report = GaudinReport {
        spectral_drift,
        bracket_max,
        hamiltonian_drift,
        eigen_drift: crate::isoflow::eigen_drift(&trajectory),
        sum_p_drift: crate::isoflow::sum_p_drift(&trajectory),
        ode: trajectory.stats,
    };
    Ok((trajectory, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pairing, random_traceless};
    use crate::isoflow::{integrate_flow, FlowOptions};
    use crate::sampling::{random_autonomous_state, random_probes, random_schlesinger_state, SchlesingerSampleSpec};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn opposite_pair_has_zero_field() {
        let p = OrbitPoint::new(random_traceless(2, &mut ChaCha8Rng::seed_from_u64(1))).unwrap();
        let q = p.moved_to(-p.p.clone());
        let s = AutonomousState::new(vec![c(0.0, 0.0), c(1.0, 1.0)], vec![p, q]).unwrap();
        assert!(gaudin_vector_field(&s, 0).unwrap().iter().all(|v| v.max_abs() < 1e-16));
    }

    #[test]
    fn field_sums_to_zero_and_matches_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..10 {
            let s = random_autonomous_state(3 + seed as usize % 2, 2 + seed as usize % 2, seed);
            let n = s.dim();
            for a in 0..s.len() {
                let field = gaudin_vector_field(&s, a).unwrap();
                let mut sum = SquareMatrix::zeros(n);
                for v in &field {
                    sum += v;
                }
                assert!(sum.max_abs() < 1e-13);
                // d/dh H_a(p + h [p, X]) pairs the field against X
                for e in 0..s.len() {
                    let x = random_traceless(n, &mut rng);
                    let mut probe = vec![SquareMatrix::zeros(n); s.len()];
                    probe[e] = x.clone();
                    let grad = gradient(&s.positions, &s.residue_matrices(), a);
                    let expected = lie_poisson_bracket(&grad, &probe, &s.residue_matrices()).unwrap();
                    assert!((pairing(&field[e], &x) - expected).norm() < 1e-12);
                    let h = 1e-5;
                    let shifted = |sign: f64| {
                        let mut p = s.residue_matrices();
                        p[e] = &p[e] + &x.scale_real(sign * h);
                        hamiltonian(&s.positions, &p, a)
                    };
                    let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
                    assert!((fd - pairing(&grad[e], &x)).norm() < 1e-8 * fd.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn hamiltonians_commute() {
        for seed in 0..20 {
            let s = random_autonomous_state(3 + seed as usize % 2, 2 + seed as usize % 2, seed);
            assert!(max_commutator(&s).unwrap() < 1e-11);
            assert_eq!(commutation_check(&s, 1, 1).unwrap(), 0.0);
        }
        let diag = |a: f64| OrbitPoint::diagonal(&[c(a, 0.0), c(-a, 0.0)]).unwrap();
        let s = AutonomousState::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 1.0)], vec![diag(0.1), diag(0.4), diag(0.3)]).unwrap();
        assert!(max_commutator(&s).unwrap() < 1e-14);
    }

    #[test]
    fn flow_conserves_hamiltonians_and_curve() {
        let s = random_autonomous_state(3, 2, 8);
        let (traj, report) = gaudin_run(&s, 0, c(1.0, 0.0), &FlowOptions::new(1e-10)).unwrap();
        assert!(report.hamiltonian_drift < 1e-8, "{report:?}");
        assert!(report.spectral_drift < 1e-8, "{report:?}");
        assert!(report.eigen_drift < 1e-9, "{report:?}");
        assert!(report.sum_p_drift < 1e-9, "{report:?}");
        assert!(trace_drift(&traj, c(0.3, 2.5), 3).unwrap() < 1e-8);
        assert_eq!(traj.last().positions, s.positions);
        let h0 = gaudin_hamiltonian(&s, 0).unwrap();
        assert!((gaudin_hamiltonian(traj.last(), 0).unwrap() - h0).norm() < 1e-9);
    }

    #[test]
    fn zero_time_and_zero_field() {
        let s = random_autonomous_state(3, 3, 2);
        let traj = autonomous_flow(&s, 2, ZERO, 1e-10).unwrap();
        assert_eq!(traj.samples.len(), 1);
        let diag = |a: f64| OrbitPoint::diagonal(&[c(a, 0.0), c(-a, 0.0)]).unwrap();
        let still = AutonomousState::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![diag(0.1), diag(0.4)]).unwrap();
        let traj = autonomous_flow(&still, 0, c(1.0, 0.0), 1e-10).unwrap();
        assert_eq!(spectral_conservation_audit(&traj).unwrap(), 0.0);
    }

    #[test]
    fn schlesinger_trajectory_deforms_the_curve() {
        let s = random_schlesinger_state(&SchlesingerSampleSpec::new(3, 2), 4);
        let traj = integrate_flow(&s, 0, c(1.0, 0.0), 1e-10).unwrap();
        assert!(spectral_conservation_audit(&traj).unwrap() > 1e-3);
    }

    #[test]
    fn lax_residual_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..10 {
            let s = random_autonomous_state(4, 2, seed);
            let probes = random_probes(&s.positions, 20, &mut rng);
            for a in 0..4 {
                assert!(lax_form_residual(&s, a, &probes).unwrap() < 1e-12);
                let flipped: Vec<SquareMatrix> = gaudin_vector_field(&s, a).unwrap().iter().map(|v| -v).collect();
                assert!(lax_form_residual_with(&s, a, &probes, &flipped).unwrap() > 1e-3);
            }
        }
    }

    #[test]
    fn flows_of_distinct_hamiltonians_commute() {
        let s = random_autonomous_state(3, 2, 6);
        let dt = c(0.1, 0.0);
        let ab = autonomous_flow(autonomous_flow(&s, 0, dt, 1e-11).unwrap().last(), 1, dt, 1e-11).unwrap();
        let ba = autonomous_flow(autonomous_flow(&s, 1, dt, 1e-11).unwrap().last(), 0, dt, 1e-11).unwrap();
        for (p, q) in ab.last().residues.iter().zip(&ba.last().residues) {
            assert!((p.p.clone() - q.p.clone()).max_abs() < 1e-7);
        }
    }
}
