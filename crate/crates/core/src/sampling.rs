//! Seeded random configurations for audits, fixtures and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{random_traceless, OrbitPoint, SquareMatrix, C64};
use crate::hitchin::AutonomousState;
use crate::isoflow::{check_path_separation, SchlesingerState};
use crate::monodromy::{angular_order, default_base_point};

/// Shape of a random Schlesinger configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchlesingerSampleSpec {
    pub points: usize,
    pub dim: usize,
    /// Upper bound on every `||p_a||_F`.
    pub max_norm: f64,
    pub min_separation: f64,
    /// Residues are rescaled so the largest norm is at least this fraction of
    /// `max_norm`.
    pub min_fill: f64,
    pub trivial_at_infinity: bool,
}

impl SchlesingerSampleSpec {
    pub fn new(points: usize, dim: usize) -> Self {
        Self {
            points,
            dim,
            max_norm: 1.0,
            min_separation: 1.0,
            min_fill: 0.5,
            trivial_at_infinity: true,
        }
    }
}

/// Points in a square box, redrawn until pairwise separations reach `min_sep`.
pub fn random_points(n: usize, min_sep: f64, rng: &mut impl Rng) -> Vec<C64> {
    let half = min_sep * (0.5 + (n as f64).sqrt());
    'draw: loop {
        let pts: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.random_range(-half..half), rng.random_range(-half..half)))
            .collect();
        for a in 0..n {
            for b in a + 1..n {
                if (pts[a] - pts[b]).norm() < min_sep {
                    continue 'draw;
                }
            }
        }
        return pts;
    }
}

/// Traceless residues, summing to zero when `trivial` holds, rescaled so the
/// largest Frobenius norm lies in `[min_fill, 1] * max_norm`.
pub fn random_residues(
    n: usize,
    dim: usize,
    max_norm: f64,
    min_fill: f64,
    trivial: bool,
    rng: &mut impl Rng,
) -> Vec<SquareMatrix> {
    let mut residues: Vec<SquareMatrix> = (0..n).map(|_| random_traceless(dim, rng)).collect();
    if trivial && n > 0 {
        let mut sum = SquareMatrix::zeros(dim);
        for r in &residues[..n - 1] {
            sum += r;
        }
        residues[n - 1] = -sum;
    }
    let biggest = residues.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let target = max_norm * rng.random_range(min_fill..=1.0);
    residues.iter().map(|r| r.scale_real(target / biggest)).collect()
}

/// Random Schlesinger state with `kappa = 1`.
pub fn random_schlesinger_state(spec: &SchlesingerSampleSpec, seed: u64) -> SchlesingerState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    schlesinger_state_from_rng(spec, &mut rng)
}

fn schlesinger_state_from_rng(spec: &SchlesingerSampleSpec, rng: &mut impl Rng) -> SchlesingerState {
    let points = random_points(spec.points, spec.min_separation, rng);
    let residues = random_residues(
        spec.points,
        spec.dim,
        spec.max_norm,
        spec.min_fill,
        spec.trivial_at_infinity,
        rng,
    );
    let residues = residues
        .into_iter()
        .map(|p| OrbitPoint::new(p).expect("traceless by construction"))
        .collect();
    SchlesingerState::new(C64::new(1.0, 0.0), points, residues).expect("separated by construction")
}

/// A flow experiment: initial state, moving point and complex end time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowExperiment {
    pub seed: u64,
    /// Number of rejected draws before this one was accepted.
    pub rejected: usize,
    pub state: SchlesingerState,
    pub direction: usize,
    #[serde(with = "crate::algebra::complex_pair")]
    pub t_end: C64,
}

/// Whether the loop system keeps its homotopy class along the straight flow
/// of point `a` to `t_end` (angular order from the trajectory base point is
/// constant on a fine grid).
pub fn loop_order_is_stable(positions: &[C64], a: usize, t_end: C64, grid: usize) -> bool {
    let mut end = positions.to_vec();
    end[a] += t_end;
    let all: Vec<C64> = positions.iter().chain(&end).copied().collect();
    let base = default_base_point(&all);
    let first = angular_order(positions, base);
    let mut moving = positions.to_vec();
    (1..=grid).all(|k| {
        moving[a] = positions[a] + t_end * (k as f64 / grid as f64);
        angular_order(&moving, base) == first
    })
}

/// Random Schlesinger flow with `|t_end| = t_abs`, direction `seed % n` and a
/// random phase, redrawn until the loop system is stable along the flow.
pub fn random_flow_experiment(spec: &SchlesingerSampleSpec, t_abs: f64, seed: u64) -> FlowExperiment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = (seed % spec.points as u64) as usize;
    let mut rejected = 0;
    loop {
        let state = schlesinger_state_from_rng(spec, &mut rng);
        let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        let t_end = C64::from_polar(t_abs, phase);
        let x = state.positions();
        let scale = x.iter().map(|z| z.norm()).fold(1.0, f64::max);
        if check_path_separation(&x, direction, t_end, 1e-3 * scale).is_ok()
            && loop_order_is_stable(&x, direction, t_end, 256)
        {
            return FlowExperiment {
                seed,
                rejected,
                state,
                direction,
                t_end,
            };
        }
        rejected += 1;
    }
}

/// Random autonomous state; residues need not sum to zero.
pub fn random_autonomous_state(points: usize, dim: usize, seed: u64) -> AutonomousState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = random_points(points, 1.0, &mut rng);
    let residues = random_residues(points, dim, 1.0, 0.5, false, &mut rng)
        .into_iter()
        .map(|p| OrbitPoint::new(p).expect("traceless by construction"))
        .collect();
    AutonomousState::new(x, residues).expect("separated by construction")
}

/// `count` probes in the box around `points`, at least `0.25` from each point.
pub fn random_probes(points: &[C64], count: usize, rng: &mut impl Rng) -> Vec<C64> {
    random_probes_with_margin(points, count, 0.25, rng)
}

pub fn random_probes_with_margin(points: &[C64], count: usize, margin: f64, rng: &mut impl Rng) -> Vec<C64> {
    let lo_re = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - 1.0;
    let hi_re = points.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let lo_im = points.iter().map(|z| z.im).fold(f64::INFINITY, f64::min) - 1.0;
    let hi_im = points.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = C64::new(rng.random_range(lo_re..hi_re), rng.random_range(lo_im..hi_im));
        if points.iter().all(|x| (x - z).norm() >= margin) {
            out.push(z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schlesinger_samples_meet_the_spec() {
        for seed in 0..50 {
            let spec = SchlesingerSampleSpec::new(3 + (seed as usize % 2), 2);
            let s = random_schlesinger_state(&spec, seed);
            let x = s.positions();
            for a in 0..x.len() {
                assert!(s.residues[a].p.norm() <= 1.0 + 1e-12);
                for b in a + 1..x.len() {
                    assert!((x[a] - x[b]).norm() >= 1.0);
                }
            }
            assert!(s.residue_sum().norm() < 1e-14);
        }
    }

    #[test]
    fn samples_are_deterministic() {
        let spec = SchlesingerSampleSpec::new(4, 2);
        assert_eq!(random_schlesinger_state(&spec, 9), random_schlesinger_state(&spec, 9));
        assert_ne!(random_schlesinger_state(&spec, 9), random_schlesinger_state(&spec, 10));
        assert_eq!(random_flow_experiment(&spec, 0.3, 4), random_flow_experiment(&spec, 0.3, 4));
    }

    #[test]
    fn flow_experiments_are_stable() {
        for seed in 0..20 {
            let spec = SchlesingerSampleSpec::new(3 + (seed as usize % 2), 2);
            let e = random_flow_experiment(&spec, 0.3, seed);
            assert!((e.t_end.norm() - 0.3).abs() < 1e-15);
            assert_eq!(e.direction, seed as usize % spec.points);
            assert!(loop_order_is_stable(&e.state.positions(), e.direction, e.t_end, 256));
        }
    }

    #[test]
    fn probes_avoid_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts = random_points(4, 1.0, &mut rng);
        let probes = random_probes(&pts, 20, &mut rng);
        assert_eq!(probes.len(), 20);
        assert!(probes.iter().all(|z| pts.iter().all(|x| (x - z).norm() >= 0.25)));
    }
}
