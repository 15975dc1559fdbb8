//! Dirichlet restrictions to balls, their spectral decompositions, restricted
//! heat kernels `p_t^i`, the mass function `M_t`, and exhaustion limits.
//!
//! The restricted kernels increase pointwise to the heat kernel of the full
//! graph as the ball radius grows, so properties of the (conceptually
//! infinite) graph are approached through a schedule of growing radii.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::graph::{Layering, VertexId, WeightedGraph};
use crate::linalg::{self, LinalgError};
use crate::profile::{
    reduced_operator, Boundary, ProfileError, ReducedOperator, SymmetricProfile,
};

/// Largest dimension accepted for a dense decomposition.
pub const DEFAULT_DENSE_CAP: usize = 4000;

#[derive(Debug, Error)]
pub enum SemigroupError {
    #[error("RadiusOutOfRange: radius {radius} exceeds layering radius {max}")]
    RadiusOutOfRange { radius: usize, max: usize },
    #[error("SizeCapExceeded: ball of radius {radius} has {size} vertices, cap is {cap}")]
    SizeCapExceeded {
        radius: usize,
        size: usize,
        cap: usize,
    },
    #[error("IndexOutOfRange: index {index} not in a decomposition of dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("DimensionMismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("NonPositiveKernel: spectral sum {sum:.3e} at t = {t}")]
    NonPositiveKernel { t: f64, sum: f64 },
    #[error(transparent)]
    Convergence(#[from] LinalgError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// The Laplacian restricted to the ball `B_i` with Dirichlet conditions, in
/// symmetrized coordinates `S = D_m^{-1/2} K D_m^{-1/2}`.
///
/// The diagonal of `K` keeps the FULL weighted degree `sum_y b(x,y) + c(x)`,
/// summed over every neighbor in the ambient graph including those outside
/// the ball. Dropping the outside edges would produce a Neumann-type matrix
/// instead; keeping them is what makes the restriction Dirichlet.
#[derive(Debug, Clone)]
pub struct DirichletBall {
    radius: usize,
    vertices: Vec<VertexId>,
    local: Vec<usize>,
    radii: Vec<usize>,
    measures: Vec<f64>,
    q: Vec<f64>,
    matrix: DMatrix<f64>,
}

impl DirichletBall {
    #[inline]
    pub fn dim(&self) -> usize {
        self.vertices.len()
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Ball membership, ordered by `(radius, vertex id)`.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn local_index(&self, v: VertexId) -> Option<usize> {
        self.local.get(v.0).copied().filter(|&i| i != usize::MAX)
    }

    /// Radius of the vertex at a local index.
    pub fn radius_of(&self, local: usize) -> usize {
        self.radii[local]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Dirichlet restriction of `graph` to the ball of radius `i`, with the
/// default size cap.
pub fn restrict(
    graph: &WeightedGraph,
    layering: &Layering,
    i: usize,
) -> Result<DirichletBall, SemigroupError> {
    restrict_with_cap(graph, layering, i, DEFAULT_DENSE_CAP)
}

pub fn restrict_with_cap(
    graph: &WeightedGraph,
    layering: &Layering,
    i: usize,
    cap: usize,
) -> Result<DirichletBall, SemigroupError> {
    if i > layering.max_radius() {
        return Err(SemigroupError::RadiusOutOfRange {
            radius: i,
            max: layering.max_radius(),
        });
    }
    let size = layering.ball_size(i);
    if size > cap {
        return Err(SemigroupError::SizeCapExceeded {
            radius: i,
            size,
            cap,
        });
    }

    let mut vertices = Vec::with_capacity(size);
    let mut radii = Vec::with_capacity(size);
    for (r, sphere) in layering.spheres().iter().take(i + 1).enumerate() {
        for &v in sphere {
            vertices.push(v);
            radii.push(r);
        }
    }
    let mut local = vec![usize::MAX; graph.vertex_count()];
    for (idx, &v) in vertices.iter().enumerate() {
        local[v.0] = idx;
    }
    let measures: Vec<f64> = vertices.iter().map(|&v| graph.measure(v)).collect();
    let q: Vec<f64> = vertices.iter().map(|&v| graph.q(v)).collect();
    let sqrt_m: Vec<f64> = measures.iter().map(|&m| m.sqrt()).collect();

    let mut matrix = DMatrix::zeros(size, size);
    for (a, &v) in vertices.iter().enumerate() {
        // full weighted degree, including edges that leave the ball
        let diag = graph.weighted_degree(v) + graph.potential(v);
        matrix[(a, a)] = diag / (sqrt_m[a] * sqrt_m[a]);
        for &(y, b) in graph.neighbors(v) {
            let bl = local[y];
            if bl != usize::MAX && bl > a {
                let val = -b / (sqrt_m[a] * sqrt_m[bl]);
                matrix[(a, bl)] = val;
                matrix[(bl, a)] = val;
            }
        }
    }

    Ok(DirichletBall {
        radius: i,
        vertices,
        local,
        radii,
        measures,
        q,
        matrix,
    })
}

/// Full symmetric eigendecomposition together with the measure weights that
/// de-symmetrize eigenvectors back into functions on the underlying index
/// set (ball vertices, or radii for a reduced operator).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    weights: Vec<f64>,
    sqrt_w: Vec<f64>,
    q: Vec<f64>,
}

impl SpectralDecomposition {
    fn new(
        matrix: &DMatrix<f64>,
        weights: Vec<f64>,
        q: Vec<f64>,
    ) -> Result<Self, SemigroupError> {
        let eig = linalg::sym_eigen(matrix)?;
        let sqrt_w = weights.iter().map(|&w| w.sqrt()).collect();
        Ok(SpectralDecomposition {
            values: eig.values,
            vectors: eig.vectors,
            weights,
            sqrt_w,
            q,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvalues ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Smallest eigenvalue.
    pub fn lambda0(&self) -> f64 {
        self.values[0]
    }

    /// Orthonormal eigenvectors (columns) in symmetrized coordinates.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q
    }

    fn check_index(&self, index: usize) -> Result<(), SemigroupError> {
        if index >= self.dim() {
            return Err(SemigroupError::IndexOutOfRange {
                index,
                dim: self.dim(),
            });
        }
        Ok(())
    }

    /// Restricted heat kernel
    /// `p_t(x, y) = (1/sqrt(m(x) m(y))) sum_k e^{-t lambda_k} phi_k(x) phi_k(y)`.
    ///
    /// Computed with the spectrum shifted by `lambda_0` so that only the
    /// overall factor `e^{-t lambda_0}` can underflow.
    pub fn heat_kernel(&self, t: f64, x: usize, y: usize) -> Result<f64, SemigroupError> {
        self.check_index(x)?;
        self.check_index(y)?;
        let l0 = self.values[0];
        let mut acc = 0.0;
        for (k, &lambda) in self.values.iter().enumerate() {
            acc += (-t * (lambda - l0)).exp() * self.vectors[(x, k)] * self.vectors[(y, k)];
        }
        Ok((-t * l0).exp() * acc / (self.sqrt_w[x] * self.sqrt_w[y]))
    }

    /// `ln p_t(x, y)`, evaluated in the log domain. Errors when the shifted
    /// spectral sum is not positive, which can only happen off-diagonal at
    /// tiny times where the kernel is below roundoff.
    pub fn heat_kernel_ln(&self, t: f64, x: usize, y: usize) -> Result<f64, SemigroupError> {
        self.check_index(x)?;
        self.check_index(y)?;
        let l0 = self.values[0];
        let mut acc = 0.0;
        for (k, &lambda) in self.values.iter().enumerate() {
            acc += (-t * (lambda - l0)).exp() * self.vectors[(x, k)] * self.vectors[(y, k)];
        }
        if acc <= 0.0 {
            return Err(SemigroupError::NonPositiveKernel { t, sum: acc });
        }
        Ok(-t * l0 + acc.ln() - self.sqrt_w[x].ln() - self.sqrt_w[y].ln())
    }

    /// Applies `e^{-tL}` to a function given in natural coordinates.
    pub fn heat_apply(&self, t: f64, f: &[f64]) -> Result<Vec<f64>, SemigroupError> {
        let n = self.dim();
        if f.len() != n {
            return Err(SemigroupError::DimensionMismatch {
                expected: n,
                got: f.len(),
            });
        }
        let g: Vec<f64> = (0..n).map(|i| f[i] * self.sqrt_w[i]).collect();
        let mut coeffs = vec![0.0; n];
        for k in 0..n {
            let mut c = 0.0;
            for i in 0..n {
                c += self.vectors[(i, k)] * g[i];
            }
            coeffs[k] = c * (-t * self.values[k]).exp();
        }
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += self.vectors[(i, k)] * coeffs[k];
            }
            out[i] = acc / self.sqrt_w[i];
        }
        Ok(out)
    }

    /// Mass function
    /// `M_t(x) = (e^{-tL} 1)(x) + int_0^t (e^{-sL} q)(x) ds`,
    /// with the integral in closed spectral form: the mode at eigenvalue
    /// `lambda` contributes `(1 - e^{-t lambda}) / lambda` (or `t` when
    /// `lambda` vanishes). Values lie in `[0, 1]` up to roundoff; the deficit
    /// `1 - M_t` is the heat lost through the Dirichlet boundary.
    pub fn mass_function(&self, t: f64, x: usize) -> Result<f64, SemigroupError> {
        assert!(t >= 0.0, "time must be non-negative");
        self.check_index(x)?;
        let n = self.dim();
        let mut acc = 0.0;
        for k in 0..n {
            let mut c_one = 0.0;
            let mut c_q = 0.0;
            for i in 0..n {
                c_one += self.vectors[(i, k)] * self.sqrt_w[i];
                c_q += self.vectors[(i, k)] * self.sqrt_w[i] * self.q[i];
            }
            let lambda = self.values[k];
            let g = if lambda > 1e-12 {
                (1.0 - (-t * lambda).exp()) / lambda
            } else {
                t
            };
            acc += self.vectors[(x, k)] * ((-t * lambda).exp() * c_one + g * c_q);
        }
        Ok(acc / self.sqrt_w[x])
    }

    /// Matrix of `e^{-tL}` acting on functions in natural coordinates.
    /// At `t = 0` this is the identity exactly.
    pub fn semigroup_matrix(&self, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        if t == 0.0 {
            return DMatrix::identity(n, n);
        }
        let mut scaled = self.vectors.clone();
        for (k, &lambda) in self.values.iter().enumerate() {
            let factor = (-t * lambda).exp();
            scaled.column_mut(k).scale_mut(factor);
        }
        let mut e = scaled * self.vectors.transpose();
        for i in 0..n {
            for j in 0..n {
                e[(i, j)] *= self.sqrt_w[j] / self.sqrt_w[i];
            }
        }
        e
    }
}

/// Decomposes a Dirichlet ball.
pub fn decompose(ball: &DirichletBall) -> Result<SpectralDecomposition, SemigroupError> {
    SpectralDecomposition::new(&ball.matrix, ball.measures.clone(), ball.q.clone())
}

/// Decomposes a reduced (tridiagonal) operator over its radius window.
pub fn decompose_reduced(op: &ReducedOperator) -> Result<SpectralDecomposition, SemigroupError> {
    let dense = linalg::tridiag_to_dense(op.sym_diag(), op.sym_off());
    SpectralDecomposition::new(&dense, op.weights().to_vec(), op.q_values().to_vec())
}

/// Sphere membership of a ball, for commutation tests against the averaging
/// projection.
#[derive(Debug, Clone)]
pub struct SphereAveraging {
    sphere_of: Vec<usize>,
    weights: Vec<f64>,
    sphere_measure: Vec<f64>,
}

impl SphereAveraging {
    pub fn from_ball(ball: &DirichletBall) -> Self {
        let radii = &ball.radii;
        let max_r = radii.iter().copied().max().unwrap_or(0);
        let mut sphere_measure = vec![0.0; max_r + 1];
        for (i, &r) in radii.iter().enumerate() {
            sphere_measure[r] += ball.measures[i];
        }
        SphereAveraging {
            sphere_of: radii.clone(),
            weights: ball.measures.clone(),
            sphere_measure,
        }
    }

    /// Matrix of the averaging projection on the ball.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.sphere_of.len();
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if self.sphere_of[i] == self.sphere_of[j] {
                    a[(i, j)] = self.weights[j] / self.sphere_measure[self.sphere_of[i]];
                }
            }
        }
        a
    }
}

/// Max-norm of `A e^{-tL} - e^{-tL} A` on the ball. Vanishes for all `t`
/// exactly when the ball data is weakly spherically symmetric.
pub fn commutation_defect(
    d: &SpectralDecomposition,
    avg: &SphereAveraging,
    t: f64,
) -> Result<f64, SemigroupError> {
    if avg.sphere_of.len() != d.dim() {
        return Err(SemigroupError::DimensionMismatch {
            expected: d.dim(),
            got: avg.sphere_of.len(),
        });
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let e = d.semigroup_matrix(t);
    let a = avg.matrix();
    let defect = &a * &e - &e * &a;
    Ok(defect.amax())
}

/// What to evaluate on each Dirichlet restriction during exhaustion.
/// Indices are vertex ids for graph sources and radii for profile sources.
#[derive(Debug, Clone, Copy)]
pub enum Observable {
    HeatKernelAt { t: f64, x: usize, y: usize },
    MassAt { t: f64, x: usize },
    Lambda0,
}

/// Radius schedule and stopping rule for exhaustion.
#[derive(Debug, Clone, Copy)]
pub struct ExhaustSchedule {
    pub start: usize,
    pub step: usize,
    pub tol: f64,
    pub r_max: usize,
    pub cap: usize,
}

impl ExhaustSchedule {
    pub fn for_graph() -> Self {
        ExhaustSchedule {
            start: 4,
            step: 2,
            tol: 1e-8,
            r_max: 64,
            cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn for_profile() -> Self {
        ExhaustSchedule {
            start: 4,
            step: 2,
            tol: 1e-8,
            r_max: 2048,
            cap: usize::MAX,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_r_max(mut self, r_max: usize) -> Self {
        self.r_max = r_max;
        self
    }
}

/// Where the growing Dirichlet restrictions come from.
pub enum BallSource<'a> {
    Graph {
        graph: &'a WeightedGraph,
        layering: &'a Layering,
    },
    Profile(&'a SymmetricProfile),
}

impl BallSource<'_> {
    fn max_radius(&self) -> usize {
        match self {
            BallSource::Graph { layering, .. } => layering.max_radius(),
            BallSource::Profile(p) => p.boundary_radius(),
        }
    }

    fn evaluate(&self, i: usize, obs: Observable, cap: usize) -> Result<f64, SemigroupError> {
        match self {
            BallSource::Graph { graph, layering } => {
                let ball = restrict_with_cap(graph, layering, i, cap)?;
                match obs {
                    Observable::Lambda0 => Ok(linalg::smallest_eigenvalue_sym(&ball.matrix)),
                    Observable::HeatKernelAt { t, x, y } => {
                        let d = decompose(&ball)?;
                        let xl = ball.local_index(VertexId(x)).ok_or(
                            SemigroupError::IndexOutOfRange {
                                index: x,
                                dim: ball.dim(),
                            },
                        )?;
                        let yl = ball.local_index(VertexId(y)).ok_or(
                            SemigroupError::IndexOutOfRange {
                                index: y,
                                dim: ball.dim(),
                            },
                        )?;
                        d.heat_kernel(t, xl, yl)
                    }
                    Observable::MassAt { t, x } => {
                        let d = decompose(&ball)?;
                        let xl = ball.local_index(VertexId(x)).ok_or(
                            SemigroupError::IndexOutOfRange {
                                index: x,
                                dim: ball.dim(),
                            },
                        )?;
                        d.mass_function(t, xl)
                    }
                }
            }
            BallSource::Profile(p) => {
                let op = reduced_operator(p, i, Boundary::Dirichlet)?;
                match obs {
                    Observable::Lambda0 => Ok(linalg::smallest_eigenvalue_tridiag(
                        op.sym_diag(),
                        op.sym_off(),
                    )),
                    Observable::HeatKernelAt { t, x, y } => {
                        decompose_reduced(&op)?.heat_kernel(t, x, y)
                    }
                    Observable::MassAt { t, x } => decompose_reduced(&op)?.mass_function(t, x),
                }
            }
        }
    }
}

/// Trace of an observable along the exhaustion schedule.
#[derive(Debug, Clone)]
pub struct ExhaustReport {
    /// Last evaluated value. Heat kernel and mass observables increase with
    /// the radius, the bottom of the spectrum decreases, so the final value
    /// carries a one-sided error against the infinite-graph limit.
    pub value: f64,
    pub trace: Vec<(usize, f64)>,
    /// Whether two consecutive values got closer than the tolerance before
    /// the schedule ran out.
    pub converged: bool,
}

/// Evaluates `observable` on Dirichlet restrictions at the scheduled radii,
/// stopping once two consecutive values differ by less than the tolerance.
pub fn exhaust(
    source: &BallSource<'_>,
    observable: Observable,
    schedule: &ExhaustSchedule,
) -> Result<ExhaustReport, SemigroupError> {
    assert!(schedule.tol > 0.0);
    assert!(schedule.step >= 1);
    let needed = match observable {
        Observable::Lambda0 => 0,
        Observable::MassAt { x, .. } => match source {
            BallSource::Graph { layering, .. } => layering.radius_of(VertexId(x)),
            BallSource::Profile(_) => x,
        },
        Observable::HeatKernelAt { x, y, .. } => match source {
            BallSource::Graph { layering, .. } => layering
                .radius_of(VertexId(x))
                .max(layering.radius_of(VertexId(y))),
            BallSource::Profile(_) => x.max(y),
        },
    };
    let limit = schedule.r_max.min(source.max_radius());
    if needed > limit {
        return Err(SemigroupError::RadiusOutOfRange {
            radius: needed,
            max: limit,
        });
    }

    let mut trace: Vec<(usize, f64)> = Vec::new();
    let mut converged = false;
    let mut i = schedule.start.max(needed).min(limit);
    loop {
        let value = source.evaluate(i, observable, schedule.cap)?;
        if let Some(&(_, prev)) = trace.last() {
            if (value - prev).abs() < schedule.tol {
                trace.push((i, value));
                converged = true;
                break;
            }
        }
        trace.push((i, value));
        if i >= limit {
            break;
        }
        i = (i + schedule.step).min(limit);
    }
    Ok(ExhaustReport {
        value: trace.last().expect("schedule evaluates at least once").1,
        trace,
        converged,
    })
}
