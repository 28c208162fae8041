//! Schlesinger deformations at genus zero: the vector field moving one marked
//! point, its Hamiltonians, flow integration and monodromy audits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    bracket, complex_pair, lie_poisson_bracket, pairing, spectrum_distance, OrbitPoint, SquareMatrix, C64, ZERO,
};
use crate::connection::{lax_matrix, FuchsianConnection};
use crate::error::{Error, Result};
use crate::monodromy::{
    angular_order, default_base_point, monodromy_rep_for, standard_loop_system, word_indices, word_invariants,
    word_label,
};
use crate::ode::{integrate, OdeOptions, OdeStats};

/// Number of equal subintervals of a flow; each endpoint is a trajectory sample.
pub const FLOW_SUBINTERVALS: usize = 16;

/// Local error target as a fraction of the requested flow tolerance.
const LOCAL_SAFETY: f64 = 1e-2;

/// Snapshot of a Lax matrix `L(z) = sum_a p_a / (z - x_a)`.
pub trait LaxSnapshot {
    fn lax_positions(&self) -> Vec<C64>;
    fn lax_residues(&self) -> Vec<&SquareMatrix>;

    fn lax_at(&self, z: C64) -> Result<SquareMatrix> {
        lax_matrix(&self.lax_positions(), &self.lax_residues(), z)
    }
}

/// Residues over moving marked points `x_a = x_a^0 + t_a`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchlesingerState {
    #[serde(with = "complex_pair")]
    pub kappa: C64,
    #[serde(with = "complex_pair::vec")]
    pub reference_positions: Vec<C64>,
    #[serde(with = "complex_pair::vec")]
    pub times: Vec<C64>,
    pub residues: Vec<OrbitPoint>,
}

impl SchlesingerState {
    pub fn new(kappa: C64, positions: Vec<C64>, residues: Vec<OrbitPoint>) -> Result<Self> {
        let times = vec![ZERO; positions.len()];
        let state = Self {
            kappa,
            reference_positions: positions,
            times,
            residues,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn from_connection(conn: &FuchsianConnection) -> Self {
        Self {
            kappa: conn.kappa(),
            reference_positions: conn.points().to_vec(),
            times: vec![ZERO; conn.len()],
            residues: conn.residues().to_vec(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kappa.norm() == 0.0 {
            return Err(Error::InvalidArgument("kappa must be nonzero".into()));
        }
        let n = self.reference_positions.len();
        if self.times.len() != n || self.residues.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if self.times.len() != n {
                    self.times.len()
                } else {
                    self.residues.len()
                },
            });
        }
        if n == 0 {
            return Err(Error::InvalidArgument("no marked points".into()));
        }
        let dim = self.residues[0].dim();
        if let Some(r) = self.residues.iter().find(|r| r.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.dim(),
            });
        }
        check_distinct(&self.positions())
    }

    pub fn len(&self) -> usize {
        self.reference_positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reference_positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.residues[0].dim()
    }

    /// Current positions `x_a^0 + t_a`.
    pub fn positions(&self) -> Vec<C64> {
        self.reference_positions
            .iter()
            .zip(&self.times)
            .map(|(x, t)| x + t)
            .collect()
    }

    pub fn residue_matrices(&self) -> Vec<SquareMatrix> {
        self.residues.iter().map(|r| r.p.clone()).collect()
    }

    pub fn residue_sum(&self) -> SquareMatrix {
        let mut sum = SquareMatrix::zeros(self.dim());
        for r in &self.residues {
            sum += &r.p;
        }
        sum
    }

    /// The connection at the current positions; trivial at infinity when the
    /// residues sum to zero.
    pub fn connection(&self) -> Result<FuchsianConnection> {
        let scale = self.residues.iter().map(|r| r.p.norm()).fold(1.0, f64::max);
        let trivial = self.residue_sum().norm() < 1e-12 * scale;
        FuchsianConnection::new(self.kappa, self.positions(), self.residues.clone(), trivial)
    }

    /// Copy with every position moved by `delta[a]` and residues unchanged.
    pub fn shifted(&self, delta: &[C64]) -> Self {
        let mut out = self.clone();
        for (t, d) in out.times.iter_mut().zip(delta) {
            *t += d;
        }
        out
    }

    fn with_residues(&self, residues: &[SquareMatrix]) -> Self {
        Self {
            residues: self
                .residues
                .iter()
                .zip(residues)
                .map(|(o, p)| o.moved_to(p.clone()))
                .collect(),
            ..self.clone()
        }
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

impl LaxSnapshot for SchlesingerState {
    fn lax_positions(&self) -> Vec<C64> {
        self.positions()
    }

    fn lax_residues(&self) -> Vec<&SquareMatrix> {
        self.residues.iter().map(|r| &r.p).collect()
    }
}

pub(crate) fn check_distinct(points: &[C64]) -> Result<()> {
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let separation = (points[a] - points[b]).norm();
            if separation == 0.0 {
                return Err(Error::CoincidentPoints { a, b, separation });
            }
        }
    }
    Ok(())
}

/// Sign of the commutator field; `Flipped` is the control experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSign {
    #[default]
    Correct,
    Flipped,
}

impl FieldSign {
    fn factor(self) -> f64 {
        match self {
            FieldSign::Correct => 1.0,
            FieldSign::Flipped => -1.0,
        }
    }
}

/// `dp_e/dt_a = [p_a, p_e] / (kappa (x_e - x_a))` for `e != a`, and
/// `dp_a/dt_a = -sum_{e != a} dp_e/dt_a`.
pub(crate) fn commutator_field(
    positions: &[C64],
    residues: &[SquareMatrix],
    a: usize,
    scale: C64,
) -> Vec<SquareMatrix> {
    let n = residues[0].dim();
    let mut out = vec![SquareMatrix::zeros(n); residues.len()];
    let mut own = SquareMatrix::zeros(n);
    for e in 0..residues.len() {
        if e == a {
            continue;
        }
        let v = bracket(&residues[a], &residues[e]).scale(scale / (positions[e] - positions[a]));
        own += &(-&v);
        out[e] = v;
    }
    out[a] = own;
    out
}

/// Schlesinger vector field `dp_e/dt_a` for all sites `e`.
pub fn schlesinger_vector_field(state: &SchlesingerState, a: usize) -> Result<Vec<SquareMatrix>> {
    schlesinger_vector_field_signed(state, a, FieldSign::Correct)
}

pub fn schlesinger_vector_field_signed(
    state: &SchlesingerState,
    a: usize,
    sign: FieldSign,
) -> Result<Vec<SquareMatrix>> {
    state.check_index(a)?;
    let positions = state.positions();
    check_distinct(&positions)?;
    Ok(commutator_field(
        &positions,
        &state.residue_matrices(),
        a,
        state.kappa.inv() * sign.factor(),
    ))
}

/// `max_z ||kappa d_a L - kappa dM_a + [M_a, L]||` with `M_a = -p_a/(z - x_a)`,
/// using `field` for the residue velocities.
pub fn zero_curvature_residual_with(
    state: &SchlesingerState,
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
    let x = state.positions();
    let kappa = state.kappa;
    let pa = &state.residues[a].p;
    let mut worst: f64 = 0.0;
    for &z in probes {
        let l = state.lax_at(z)?;
        let u = (z - x[a]).inv();
        // total t_a derivative of L: residue velocities plus the moving pole
        let mut dl = pa.scale(u * u);
        for (e, v) in field.iter().enumerate() {
            dl += &v.scale((z - x[e]).inv());
        }
        let m = pa.scale(-u);
        let dm = pa.scale(u * u);
        let residual = &(&dl.scale(kappa) - &dm.scale(kappa)) + &bracket(&m, &l);
        worst = worst.max(residual.norm());
    }
    Ok(worst)
}

/// Zero-curvature residual of the Schlesinger field itself.
pub fn zero_curvature_residual(state: &SchlesingerState, a: usize, probes: &[C64]) -> Result<f64> {
    let field = schlesinger_vector_field(state, a)?;
    zero_curvature_residual_with(state, a, probes, &field)
}

/// `H_a = sum_{b != a} tr(p_a p_b) / (x_a - x_b)`.
pub fn schlesinger_hamiltonian(state: &SchlesingerState, a: usize) -> Result<C64> {
    state.check_index(a)?;
    let x = state.positions();
    check_distinct(&x)?;
    Ok(hamiltonian(&x, &state.residue_matrices(), a))
}

pub(crate) fn hamiltonian(x: &[C64], p: &[SquareMatrix], a: usize) -> C64 {
    (0..p.len())
        .filter(|&b| b != a)
        .map(|b| pairing(&p[a], &p[b]) / (x[a] - x[b]))
        .sum()
}

/// Per-site gradients of `H_a` with respect to the residues.
pub fn hamiltonian_gradient(state: &SchlesingerState, a: usize) -> Result<Vec<SquareMatrix>> {
    state.check_index(a)?;
    let x = state.positions();
    check_distinct(&x)?;
    Ok(gradient(&x, &state.residue_matrices(), a))
}

pub(crate) fn gradient(x: &[C64], p: &[SquareMatrix], a: usize) -> Vec<SquareMatrix> {
    let n = p[0].dim();
    let mut out = vec![SquareMatrix::zeros(n); p.len()];
    let mut own = SquareMatrix::zeros(n);
    for b in 0..p.len() {
        if b == a {
            continue;
        }
        let w = (x[a] - x[b]).inv();
        out[b] = p[a].scale(w);
        own += &p[b].scale(w);
    }
    out[a] = own;
    out
}

fn check_fd_step(h: f64) -> Result<()> {
    if !(1e-6..=1e-3).contains(&h) {
        return Err(Error::InvalidArgument(format!("finite-difference step {h:e} outside [1e-6, 1e-3]")));
    }
    Ok(())
}

/// Central difference of `H_b` in the position of point `a`, residues frozen.
fn position_derivative(state: &SchlesingerState, a: usize, b: usize, h: f64) -> Result<C64> {
    let mut delta = vec![ZERO; state.len()];
    delta[a] = C64::new(h, 0.0);
    let plus = schlesinger_hamiltonian(&state.shifted(&delta), b)?;
    delta[a] = C64::new(-h, 0.0);
    let minus = schlesinger_hamiltonian(&state.shifted(&delta), b)?;
    Ok((plus - minus) / (2.0 * h))
}

/// `|kappa d_a H_b - kappa d_b H_a + {H_a, H_b}|` with finite-difference
/// position derivatives.
pub fn whitham_residual(state: &SchlesingerState, a: usize, b: usize, h: f64) -> Result<f64> {
    state.check_index(a)?;
    state.check_index(b)?;
    check_fd_step(h)?;
    if a == b {
        return Ok(0.0);
    }
    let kappa = state.kappa;
    let da_hb = position_derivative(state, a, b, h)?;
    let db_ha = position_derivative(state, b, a, h)?;
    let p = state.residue_matrices();
    let bracket = lie_poisson_bracket(&hamiltonian_gradient(state, a)?, &hamiltonian_gradient(state, b)?, &p)?;
    Ok((kappa * da_hb - kappa * db_ha + bracket).norm())
}

/// `|d_a H_b - d_b H_a|` by central differences (closedness of `sum H_a dt_a`).
pub fn tau_closedness_residual(state: &SchlesingerState, a: usize, b: usize, h: f64) -> Result<f64> {
    state.check_index(a)?;
    state.check_index(b)?;
    check_fd_step(h)?;
    if a == b {
        return Ok(0.0);
    }
    Ok((position_derivative(state, a, b, h)? - position_derivative(state, b, a, h)?).norm())
}

/// One sample of a flow: parameter `s` in `[0, 1]`, time `t = s t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowSample<S> {
    pub s: f64,
    #[serde(with = "complex_pair")]
    pub t: C64,
    pub state: S,
}

/// Samples of a flow along the straight complex time path `0 -> t_end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub direction: usize,
    #[serde(with = "complex_pair")]
    pub t_end: C64,
    pub samples: Vec<FlowSample<S>>,
    pub stats: OdeStats,
}

pub type FlowTrajectory = Trajectory<SchlesingerState>;

impl<S> Trajectory<S> {
    pub fn initial(&self) -> &S {
        &self.samples[0].state
    }

    pub fn last(&self) -> &S {
        &self.samples[self.samples.len() - 1].state
    }
}

/// Integrator settings for flows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub sign: FieldSign,
}

impl FlowOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_steps: 200_000,
            sign: FieldSign::Correct,
        }
    }

    pub fn flipped(mut self) -> Self {
        self.sign = FieldSign::Flipped;
        self
    }

    fn check(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol <= 1e-3) {
            return Err(Error::InvalidArgument(format!("flow tolerance {:e} out of range", self.tol)));
        }
        Ok(())
    }
}

fn pack(residues: &[SquareMatrix]) -> Vec<C64> {
    residues
        .iter()
        .flat_map(|m| m.as_matrix().as_slice().iter().copied())
        .collect()
}

fn unpack(y: &[C64], n: usize) -> Vec<SquareMatrix> {
    y.chunks(n * n)
        .map(|c| SquareMatrix::from_fn(n, |i, j| c[i + j * n]))
        .collect()
}

/// Integrates `dp/dt = field(s, p)` along `t = s t_end`, returning the residues
/// at `s = k / FLOW_SUBINTERVALS`.
pub(crate) fn integrate_residues<F>(
    residues0: &[SquareMatrix],
    t_end: C64,
    opts: &FlowOptions,
    mut field: F,
) -> Result<(Vec<(f64, Vec<SquareMatrix>)>, OdeStats)>
where
    F: FnMut(f64, &[SquareMatrix]) -> Vec<SquareMatrix>,
{
    let n = residues0[0].dim();
    let mut y = pack(residues0);
    let mut samples = vec![(0.0, residues0.to_vec())];
    let mut stats = OdeStats::default();
    let ode = OdeOptions::new(opts.tol * LOCAL_SAFETY).with_max_steps(opts.max_steps);
    for k in 0..FLOW_SUBINTERVALS {
        let s0 = k as f64 / FLOW_SUBINTERVALS as f64;
        let s1 = (k + 1) as f64 / FLOW_SUBINTERVALS as f64;
        let seg = integrate(
            |s, y, dy| {
                let v = field(s, &unpack(y, n));
                for (chunk, m) in dy.chunks_mut(n * n).zip(&v) {
                    for (d, val) in chunk.iter_mut().zip(m.as_matrix().as_slice()) {
                        *d = val * t_end;
                    }
                }
                Ok(())
            },
            &mut y,
            s0,
            s1,
            &ode,
            k,
        )?;
        stats.merge(&seg);
        samples.push((s1, unpack(&y, n)));
    }
    Ok((samples, stats))
}

/// Aborts if moving point `a` along `x_a + s t_end` comes within `min_sep` of
/// another point.
pub(crate) fn check_path_separation(positions: &[C64], a: usize, t_end: C64, min_sep: f64) -> Result<()> {
    let start = positions[a];
    let len2 = t_end.norm_sqr();
    for (b, &x) in positions.iter().enumerate() {
        if b == a {
            continue;
        }
        let s = if len2 == 0.0 {
            0.0
        } else {
            (((x - start) * t_end.conj()).re / len2).clamp(0.0, 1.0)
        };
        if (start + t_end * s - x).norm() < min_sep {
            return Err(Error::NearCollision {
                a: a.min(b),
                b: a.max(b),
                parameter: s,
            });
        }
    }
    Ok(())
}

/// Integrates the Schlesinger flow in direction `a` along `t in [0, t_end]`.
pub fn integrate_flow(state0: &SchlesingerState, a: usize, t_end: C64, tol: f64) -> Result<FlowTrajectory> {
    integrate_flow_with(state0, a, t_end, &FlowOptions::new(tol))
}

pub fn integrate_flow_with(
    state0: &SchlesingerState,
    a: usize,
    t_end: C64,
    opts: &FlowOptions,
) -> Result<FlowTrajectory> {
    state0.validate()?;
    state0.check_index(a)?;
    opts.check()?;
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
    let x0 = state0.positions();
    let scale = x0.iter().map(|x| x.norm()).fold(1.0, f64::max);
    check_path_separation(&x0, a, t_end, 1e-3 * scale)?;
    let factor = state0.kappa.inv() * opts.sign.factor();
    let mut positions = x0.clone();
    let (samples, stats) = integrate_residues(&state0.residue_matrices(), t_end, opts, |s, p| {
        positions[a] = x0[a] + t_end * s;
        commutator_field(&positions, p, a, factor)
    })?;
    trajectory.samples = samples
        .into_iter()
        .map(|(s, p)| {
            let mut state = state0.with_residues(&p);
            state.times[a] += t_end * s;
            FlowSample { s, t: t_end * s, state }
        })
        .collect();
    trajectory.stats = stats;
    Ok(trajectory)
}

/// Largest eigenvalue drift of any residue relative to the first sample.
pub fn eigen_drift<S: LaxSnapshot>(trajectory: &Trajectory<S>) -> f64 {
    let initial: Vec<Vec<C64>> = trajectory
        .initial()
        .lax_residues()
        .iter()
        .map(|p| p.eigenvalues())
        .collect();
    trajectory
        .samples
        .iter()
        .flat_map(|sample| {
            sample
                .state
                .lax_residues()
                .into_iter()
                .zip(&initial)
                .map(|(p, e0)| spectrum_distance(&p.eigenvalues(), e0))
                .collect::<Vec<_>>()
        })
        .fold(0.0, f64::max)
}

/// Largest change of `sum_a p_a` relative to the first sample.
pub fn sum_p_drift<S: LaxSnapshot>(trajectory: &Trajectory<S>) -> f64 {
    let sum = |s: &S| {
        let residues = s.lax_residues();
        let mut acc = SquareMatrix::zeros(residues[0].dim());
        for p in residues {
            acc += p;
        }
        acc
    };
    let initial = sum(trajectory.initial());
    trajectory
        .samples
        .iter()
        .map(|sample| (sum(&sample.state) - initial.clone()).norm())
        .fold(0.0, f64::max)
}

/// Drift of one word trace between the start and any later sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordDrift {
    pub word: String,
    pub drift: f64,
}

/// Word invariants along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSeries {
    pub words: Vec<String>,
    #[serde(with = "complex_pair::vec")]
    pub times: Vec<C64>,
    /// `values[k][w]`: trace of word `w` at sample `k`.
    pub values: Vec<Vec<[f64; 2]>>,
    /// `eigen_drifts[k][a]`: eigenvalue drift of `p_a` at sample `k`.
    pub eigen_drifts: Vec<Vec<f64>>,
}

/// Outcome of comparing monodromy before and along a Schlesinger flow.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub direction: usize,
    #[serde(with = "complex_pair")]
    pub t_end: C64,
    #[serde(with = "complex_pair")]
    pub base: C64,
    /// Largest change of any word invariant (length <= 2) over the samples.
    pub invariant_drift: f64,
    /// Invariant drift between the endpoints only.
    pub endpoint_distance: f64,
    pub word_drifts: Vec<WordDrift>,
    pub eigen_drift: f64,
    pub sum_p_drift: f64,
    pub product_defect: f64,
    pub ode: OdeStats,
    pub series: InvariantSeries,
}

/// Settings of [`isomonodromy_audit_with`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditOptions {
    pub ode_tol: f64,
    /// Tolerance used for the monodromy transports.
    pub transport_tol: f64,
    pub max_steps: usize,
    pub sign: FieldSign,
    pub max_word_len: usize,
}

impl AuditOptions {
    pub fn new(ode_tol: f64) -> Self {
        Self {
            ode_tol,
            transport_tol: ode_tol.clamp(1e-13, 1e-6),
            max_steps: 200_000,
            sign: FieldSign::Correct,
            max_word_len: 2,
        }
    }
}

/// Integrates the flow and compares monodromy invariants at every sample
/// against `t = 0`, using one base point valid along the whole trajectory.
pub fn isomonodromy_audit(state0: &SchlesingerState, a: usize, t_end: C64, ode_tol: f64) -> Result<AuditReport> {
    isomonodromy_audit_with(state0, a, t_end, &AuditOptions::new(ode_tol))
}

pub fn isomonodromy_audit_with(
    state0: &SchlesingerState,
    a: usize,
    t_end: C64,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    let flow = FlowOptions {
        tol: opts.ode_tol,
        max_steps: opts.max_steps,
        sign: opts.sign,
    };
    let trajectory = integrate_flow_with(state0, a, t_end, &flow)?;
    audit_trajectory(&trajectory, opts)
}

/// Base point for a trajectory: the default rule applied to every position the
/// trajectory visits.
pub fn trajectory_base_point<S: LaxSnapshot>(trajectory: &Trajectory<S>) -> C64 {
    let all: Vec<C64> = trajectory
        .samples
        .iter()
        .flat_map(|s| s.state.lax_positions())
        .collect();
    default_base_point(&all)
}

/// Monodromy audit of an existing trajectory.
pub fn audit_trajectory(trajectory: &FlowTrajectory, opts: &AuditOptions) -> Result<AuditReport> {
    let base = trajectory_base_point(trajectory);
    let first_order = angular_order(&trajectory.initial().positions(), base);
    for sample in &trajectory.samples {
        let order = angular_order(&sample.state.positions(), base);
        if order != first_order {
            return Err(Error::LoopClassChanged {
                before: first_order,
                after: order,
            });
        }
    }
    let reps = trajectory
        .samples
        .par_iter()
        .map(|sample| {
            let conn = sample.state.connection()?;
            let system = standard_loop_system(conn.points(), base)?;
            monodromy_rep_for(&conn, &system, opts.transport_tol)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let words: Vec<String> = word_indices(trajectory.initial().len(), opts.max_word_len)
        .iter()
        .map(|w| word_label(w))
        .collect();
    let values: Vec<Vec<C64>> = reps
        .iter()
        .map(|r| word_invariants(r, opts.max_word_len))
        .collect::<Result<_>>()?;
    let mut word_drifts: Vec<WordDrift> = words
        .iter()
        .map(|w| WordDrift {
            word: w.clone(),
            drift: 0.0,
        })
        .collect();
    for row in &values[1..] {
        for (wd, (v, v0)) in word_drifts.iter_mut().zip(row.iter().zip(&values[0])) {
            wd.drift = wd.drift.max((v - v0).norm());
        }
    }
    let invariant_drift = word_drifts.iter().map(|w| w.drift).fold(0.0, f64::max);
    let last = values.len() - 1;
    let endpoint_distance = values[last]
        .iter()
        .zip(&values[0])
        .map(|(v, v0)| (v - v0).norm())
        .fold(0.0, f64::max);
    let product_defect = reps
        .iter()
        .filter_map(|r| r.product_defect)
        .fold(0.0, f64::max);

    let initial_eigs: Vec<Vec<C64>> = trajectory
        .initial()
        .residues
        .iter()
        .map(|r| r.p.eigenvalues())
        .collect();
    let eigen_drifts: Vec<Vec<f64>> = trajectory
        .samples
        .iter()
        .map(|sample| {
            sample
                .state
                .residues
                .iter()
                .zip(&initial_eigs)
                .map(|(r, e0)| spectrum_distance(&r.p.eigenvalues(), e0))
                .collect()
        })
        .collect();
    let series = InvariantSeries {
        words,
        times: trajectory.samples.iter().map(|s| s.t).collect(),
        values: values
            .iter()
            .map(|row| row.iter().map(|v| [v.re, v.im]).collect())
            .collect(),
        eigen_drifts,
    };
    Ok(AuditReport {
        direction: trajectory.direction,
        t_end: trajectory.t_end,
        base,
        invariant_drift,
        endpoint_distance,
        word_drifts,
        eigen_drift: eigen_drift(trajectory),
        sum_p_drift: sum_p_drift(trajectory),
        product_defect,
        ode: trajectory.stats,
        series,
    })
}
