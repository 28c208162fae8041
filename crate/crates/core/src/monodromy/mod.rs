//! Analytic continuation of `(kappa d + L) Psi = 0` along contours and
//! monodromy representations of the punctured sphere.

mod contour;

pub use contour::{detoured_line, ContourPath, Segment};

use itertools::Itertools;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{complex_pair, SquareMatrix, C64, ZERO};
use crate::connection::FuchsianConnection;
use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions, OdeStats};

/// Label of the loop convention produced by [`standard_loop_system`].
pub const STANDARD_CONVENTION: &str = "angular-from-base/v1";

/// Fraction of the loop radius used for detour disks around other poles.
const DETOUR_FRACTION: f64 = 0.8;

/// Local error target as a fraction of the requested tolerance; loop products
/// amplify per-step error by the norms of the monodromy matrices.
const LOCAL_SAFETY: f64 = 1e-2;

/// Transfer matrix together with integrator statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport {
    pub matrix: SquareMatrix,
    pub stats: OdeStats,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(1e-13..=1e-6).contains(&tol) {
        return Err(Error::InvalidArgument(format!(
            "transport tolerance {tol:e} outside [1e-13, 1e-6]"
        )));
    }
    Ok(())
}

/// Integrates `dU/dz = -(1/kappa) L(z) U` along `path` from `U = Id`, so that
/// `Psi(end) = U Psi(start)`.
pub fn transport_with_stats(conn: &FuchsianConnection, path: &ContourPath, tol: f64) -> Result<Transport> {
    check_tol(tol)?;
    path.check_clearance(conn.points())?;
    let n = conn.dim();
    let residues: Vec<DMatrix<C64>> = conn.residues().iter().map(|r| r.p.as_matrix().clone()).collect();
    let points = conn.points().to_vec();
    let neg_inv_kappa = -conn.kappa().inv();

    let mut state: Vec<C64> = SquareMatrix::identity(n).as_matrix().as_slice().to_vec();
    let mut stats = OdeStats::default();
    let opts = OdeOptions::new(tol * LOCAL_SAFETY);
    let mut l = DMatrix::<C64>::zeros(n, n);
    for (index, seg) in path.segments().iter().enumerate() {
        let rhs = |s: f64, y: &[C64], dy: &mut [C64]| -> Result<()> {
            let z = seg.point(s);
            let dz = seg.tangent(s);
            l.fill(ZERO);
            for (x, p) in points.iter().zip(&residues) {
                let w = (z - x).inv();
                for (li, pi) in l.iter_mut().zip(p.iter()) {
                    *li += pi * w;
                }
            }
            let u = nalgebra::DMatrixView::from_slice(y, n, n);
            let mut out = nalgebra::DMatrixViewMut::from_slice(dy, n, n);
            out.gemm(neg_inv_kappa * dz, &l, &u, ZERO);
            Ok(())
        };
        let seg_stats = integrate(rhs, &mut state, 0.0, seg.length(), &opts, index)?;
        stats.merge(&seg_stats);
    }
    let matrix = SquareMatrix::from_matrix(DMatrix::from_column_slice(n, n, &state))?;
    if !matrix.is_finite() {
        return Err(Error::NonFinite {
            segment: path.segments().len() - 1,
        });
    }
    Ok(Transport { matrix, stats })
}

/// Transfer matrix `U` with `Psi(end) = U Psi(start)`.
pub fn transport(conn: &FuchsianConnection, path: &ContourPath, tol: f64) -> Result<SquareMatrix> {
    transport_with_stats(conn, path, tol).map(|t| t.matrix)
}

/// `1 + max|x_a| + i (1 + max|Im x_a|)`.
pub fn default_base_point(points: &[C64]) -> C64 {
    let rmax = points.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let imax = points.iter().map(|x| x.im.abs()).fold(0.0, f64::max);
    C64::new(1.0 + rmax, 1.0 + imax)
}

/// Order of the marked points by the angle of `x_a - base`, measured
/// counterclockwise from the direction `-base`; ties go to the nearer point.
pub fn angular_order(points: &[C64], base: C64) -> Vec<usize> {
    let reference = -base;
    let key = |a: usize| {
        let rel = (points[a] - base) / reference;
        (rel.arg(), (points[a] - base).norm())
    };
    (0..points.len())
        .sorted_by(|&a, &b| {
            let (ta, da) = key(a);
            let (tb, db) = key(b);
            ta.total_cmp(&tb).then(da.total_cmp(&db)).then(a.cmp(&b))
        })
        .collect()
}

/// Deterministic generators of the fundamental group based at `base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoopSystem {
    #[serde(with = "complex_pair")]
    pub base: C64,
    /// Loop radius around each marked point, by point index.
    pub radii: Vec<f64>,
    /// Loops by point index.
    pub loops: Vec<ContourPath>,
    /// Angular order; the ordered product is `Y[order[n-1]] ... Y[order[0]]`.
    pub order: Vec<usize>,
    /// Circle about the origin through `base`, enclosing every marked point.
    pub big_loop: ContourPath,
}

/// Builds one positively oriented loop per marked point.
///
/// Each loop runs straight from `base` towards `x_a`, circles `x_a` once
/// counterclockwise at radius `r_a = min(nearest neighbour, |base - x_a|) / 2`
/// and returns the same way. Where the straight run would cut close to another
/// point it detours along an arc of radius `0.8 r_c`, keeping that point on the
/// same side as the straight line, so each loop is homotopic to the straight
/// ray construction.
pub fn standard_loop_system(points: &[C64], base: C64) -> Result<LoopSystem> {
    let n = points.len();
    if n == 0 {
        return Err(Error::InvalidArgument("no marked points".into()));
    }
    let rmax = points.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let outer_gap = base.norm() - rmax;
    let radii: Vec<f64> = (0..n)
        .map(|a| {
            let nn = (0..n)
                .filter(|&b| b != a)
                .map(|b| (points[a] - points[b]).norm())
                .fold(f64::INFINITY, f64::min);
            0.5 * nn.min((base - points[a]).norm())
        })
        .collect();
    let min_radius = radii.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_radius > 0.0) {
        let (a, b) = closest_pair(points);
        return Err(Error::CoincidentPoints {
            a,
            b,
            separation: (points[a] - points[b]).norm(),
        });
    }
    if outer_gap < min_radius {
        return Err(Error::InvalidArgument(format!(
            "base point must lie outside the disk |z| <= max|x_a| + {min_radius:e}"
        )));
    }
    let clearance = 0.5 * DETOUR_FRACTION * min_radius;
    let loops = (0..n)
        .map(|a| {
            let dir = (base - points[a]) / (base - points[a]).norm();
            let entry = points[a] + dir * radii[a];
            let disks: Vec<(C64, f64)> = (0..n)
                .filter(|&c| c != a)
                .map(|c| (points[c], DETOUR_FRACTION * radii[c]))
                .collect();
            let outward = detoured_line(base, entry, &disks);
            let mut segments = outward.clone();
            segments.push(Segment::circle(points[a], radii[a], dir.arg()));
            segments.extend(outward.iter().rev().map(Segment::reversed));
            let path = ContourPath::new(segments, clearance)?;
            path.check_clearance(points)?;
            Ok(path)
        })
        .collect::<Result<Vec<_>>>()?;
    let big_loop = ContourPath::new(
        vec![Segment::circle(C64::new(0.0, 0.0), base.norm(), base.arg())],
        0.5 * outer_gap,
    )?;
    Ok(LoopSystem {
        base,
        radii,
        loops,
        order: angular_order(points, base),
        big_loop,
    })
}

fn closest_pair(points: &[C64]) -> (usize, usize) {
    (0..points.len())
        .tuple_combinations()
        .min_by(|&(a, b), &(c, d)| {
            (points[a] - points[b])
                .norm()
                .total_cmp(&(points[c] - points[d]).norm())
        })
        .unwrap_or((0, 0))
}

/// Monodromy matrices of the standard loop system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyRep {
    #[serde(with = "complex_pair")]
    pub base: C64,
    pub convention: String,
    pub loops: Vec<ContourPath>,
    /// `Y_a` by point index.
    pub matrices: Vec<SquareMatrix>,
    /// Product order of the loops (see [`LoopSystem::order`]).
    pub order: Vec<usize>,
    /// Largest `|det Y_a - 1|`, a posteriori accuracy indicator.
    pub tolerance: f64,
    /// `||Y[order[n-1]] ... Y[order[0]] - Id||` when the connection is trivial
    /// at infinity.
    pub product_defect: Option<f64>,
    pub stats: OdeStats,
}

impl MonodromyRep {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    /// `Y[order[n-1]] ... Y[order[0]]`.
    pub fn ordered_product(&self) -> SquareMatrix {
        let mut acc = SquareMatrix::identity(self.dim());
        for &a in &self.order {
            acc = &self.matrices[a] * &acc;
        }
        acc
    }

    /// Simultaneous conjugation `Y_a -> g Y_a g^{-1}`.
    pub fn conjugated(&self, g: &SquareMatrix) -> Result<Self> {
        let matrices = self
            .matrices
            .iter()
            .map(|y| y.conjugate_by(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            matrices,
            ..self.clone()
        })
    }
}

/// Transports around every loop of the standard system based at `base`.
pub fn monodromy_rep(conn: &FuchsianConnection, base: C64, tol: f64) -> Result<MonodromyRep> {
    let system = standard_loop_system(conn.points(), base)?;
    monodromy_rep_for(conn, &system, tol)
}

/// Same as [`monodromy_rep`] with a precomputed loop system.
pub fn monodromy_rep_for(conn: &FuchsianConnection, system: &LoopSystem, tol: f64) -> Result<MonodromyRep> {
    check_tol(tol)?;
    if system.loops.len() != conn.len() {
        return Err(Error::DimensionMismatch {
            expected: conn.len(),
            found: system.loops.len(),
        });
    }
    let transports = system
        .loops
        .par_iter()
        .map(|path| transport_with_stats(conn, path, tol))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut stats = OdeStats::default();
    let mut tolerance: f64 = 0.0;
    let mut matrices = Vec::with_capacity(transports.len());
    for t in transports {
        stats.merge(&t.stats);
        tolerance = tolerance.max((t.matrix.determinant() - 1.0).norm());
        matrices.push(t.matrix);
    }
    let mut rep = MonodromyRep {
        base: system.base,
        convention: STANDARD_CONVENTION.to_string(),
        loops: system.loops.clone(),
        matrices,
        order: system.order.clone(),
        tolerance,
        product_defect: None,
        stats,
    };
    if conn.trivial_at_infinity() {
        let id = SquareMatrix::identity(rep.dim());
        rep.product_defect = Some((rep.ordered_product() - id).norm());
    }
    Ok(rep)
}

/// Transport around the circle `|z| = |base|` starting at `base`.
pub fn big_loop_transport(conn: &FuchsianConnection, base: C64, tol: f64) -> Result<SquareMatrix> {
    let system = standard_loop_system(conn.points(), base)?;
    transport(conn, &system.big_loop, tol)
}

/// A word in the generators together with its trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordTrace {
    pub word: String,
    #[serde(with = "complex_pair")]
    pub trace: C64,
}

/// Index tuples of the words of length `1..=max_len` with increasing indices.
pub fn word_indices(n: usize, max_len: usize) -> Vec<Vec<usize>> {
    (1..=max_len.min(n))
        .flat_map(|k| (0..n).combinations(k))
        .collect()
}

/// `"Y1Y3"` style label of a word (1-based point indices).
pub fn word_label(word: &[usize]) -> String {
    word.iter().map(|a| format!("Y{}", a + 1)).collect()
}

/// Traces of `Y_a`, `Y_a Y_b` (a<b) and `Y_a Y_b Y_c` (a<b<c) up to `max_len`.
pub fn word_invariants(rep: &MonodromyRep, max_len: usize) -> Result<Vec<C64>> {
    Ok(word_traces(rep, max_len)?.into_iter().map(|w| w.trace).collect())
}

/// Labelled version of [`word_invariants`].
pub fn word_traces(rep: &MonodromyRep, max_len: usize) -> Result<Vec<WordTrace>> {
    if !(1..=3).contains(&max_len) {
        return Err(Error::InvalidArgument(format!("word length {max_len} not in 1..=3")));
    }
    Ok(word_indices(rep.len(), max_len)
        .into_iter()
        .map(|w| {
            let mut m = rep.matrices[w[0]].clone();
            for &b in &w[1..] {
                m = &m * &rep.matrices[b];
            }
            WordTrace {
                word: word_label(&w),
                trace: m.trace(),
            }
        })
        .collect())
}

/// Largest difference between the word traces of length at most two.
pub fn rep_distance(r1: &MonodromyRep, r2: &MonodromyRep) -> Result<f64> {
    if r1.convention != r2.convention {
        return Err(Error::ConventionMismatch(format!("{} vs {}", r1.convention, r2.convention)));
    }
    if r1.len() != r2.len() || r1.dim() != r2.dim() {
        return Err(Error::ConventionMismatch(format!(
            "{} loops of rank {} vs {} loops of rank {}",
            r1.len(),
            r1.dim(),
            r2.len(),
            r2.dim()
        )));
    }
    let a = word_invariants(r1, 2)?;
    let b = word_invariants(r2, 2)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// JSON report of a monodromy computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    #[serde(with = "complex_pair")]
    pub base: C64,
    pub invariants: Vec<WordTrace>,
    pub product_defect: Option<f64>,
}

impl MonodromyReport {
    pub fn new(rep: &MonodromyRep, max_len: usize) -> Result<Self> {
        Ok(Self {
            base: rep.base,
            invariants: word_traces(rep, max_len)?,
            product_defect: rep.product_defect,
        })
    }
}

/// Full circle of radius `r` about `center` starting at angle 0.
pub fn circle_path(center: C64, radius: f64, clearance: f64) -> Result<ContourPath> {
    ContourPath::new(vec![Segment::circle(center, radius, 0.0)], clearance)
}

/// Closed polygon through `vertices` (the first vertex is repeated at the end).
pub fn polygon_path(vertices: &[C64], clearance: f64) -> Result<ContourPath> {
    let segments = vertices
        .iter()
        .zip(vertices.iter().cycle().skip(1))
        .map(|(&from, &to)| Segment::Line { from, to })
        .collect();
    ContourPath::new(segments, clearance)
}
