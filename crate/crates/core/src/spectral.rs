//! Bottom-of-spectrum machinery: Dirichlet exhaustion of `lambda_0`, the
//! volume-criterion lower bound `1/a` with its positive-solution certificate,
//! exterior (annulus) probes for discreteness of the spectrum, the large-time
//! heat kernel estimate of the ground state energy, and curvature comparison
//! against weakly spherically symmetric profiles.

use thiserror::Error;

use crate::graph::{layer, Layering, VertexId, WeightedGraph};
use crate::linalg;
use crate::profile::{
    ball_stats, criterion, exterior_reduced_operator, reduced_operator, solve_recursion, Boundary,
    CriterionKind, CriterionOutcome, ProfileError, SymmetricProfile, VolumeWeight,
};
use crate::semigroup::{
    decompose, decompose_reduced, exhaust, restrict, BallSource, ExhaustReport, ExhaustSchedule,
    Observable, SemigroupError, SpectralDecomposition,
};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("NotComparable: curvature comparison verdict is Neither")]
    NotComparable,
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// Smallest eigenvalue of a decomposed operator; equals the infimum of the
/// Rayleigh quotient `Q(f, f) / <f, f>` over the ball.
pub fn lambda0(d: &SpectralDecomposition) -> f64 {
    d.lambda0()
}

/// Nonincreasing trace of `lambda_0(L_i^{(D)})` along the exhaustion. The
/// final value is an upper bound for `lambda_0` of the unrestricted operator.
pub fn lambda0_limit(
    source: &BallSource<'_>,
    schedule: &ExhaustSchedule,
) -> Result<ExhaustReport, SemigroupError> {
    exhaust(source, Observable::Lambda0, schedule)
}

/// Rigorous upper bound `a` for `sum_r V_1(r) / dB(r)` together with the
/// spectral lower bound `1/a`.
#[derive(Debug, Clone, Copy)]
pub struct VolumeBound {
    pub a: f64,
    pub lower: f64,
}

/// Present exactly when the volume criterion converges in closed form.
pub fn volume_bound(p: &SymmetricProfile) -> Option<VolumeBound> {
    match criterion(p, CriterionKind::Spectrum) {
        CriterionOutcome::Converges { sum_bound } => Some(VolumeBound {
            a: sum_bound,
            lower: 1.0 / sum_bound,
        }),
        _ => None,
    }
}

/// Certificate from running the radial recursion at `alpha = -lam`.
#[derive(Debug, Clone, Copy)]
pub struct LowerBoundCertificate {
    pub verdict: Verdict,
    /// The candidate lower bound that was tested.
    pub lambda: f64,
    /// Radius up to which the solution was followed.
    pub radius: usize,
    /// Smallest solution value encountered.
    pub min_value: f64,
    /// Whether the lower envelope `1 - lam * sum_{j<=r} V_1(j)/dB(j)` held.
    pub envelope_ok: bool,
}

/// Follows the solution of `(J - lam) v = 0`, `v(0) = 1`, out to `radius`.
/// `Positive` certifies `lambda_0 >= lam` up to radius-limited evidence: the
/// solution stayed strictly positive and satisfied the lower envelope. Exact
/// whenever the profile's rule keeps the envelope positive for all radii.
pub fn certify_lower_bound(
    p: &SymmetricProfile,
    lam: f64,
    radius: usize,
) -> Result<LowerBoundCertificate, ProfileError> {
    assert!(lam > 0.0, "candidate bound must be positive");
    let radius = radius.min(p.max_radius());
    let v = solve_recursion(p, -lam, 1.0, radius)?;
    let stats = ball_stats(p, VolumeWeight::One, radius.saturating_sub(1).min(p.boundary_radius()))?;
    let mut min_value = f64::INFINITY;
    for &val in &v {
        min_value = min_value.min(val);
    }
    let positive = min_value > 0.0;
    let mut envelope_ok = true;
    for r in 0..radius.min(stats.partial_sums.len()) {
        let envelope = 1.0 - lam * stats.partial_sums[r];
        if v[r + 1] < envelope - 1e-12 * envelope.abs().max(1.0) {
            envelope_ok = false;
            break;
        }
    }
    Ok(LowerBoundCertificate {
        verdict: if positive && envelope_ok {
            Verdict::Positive
        } else {
            Verdict::Negative
        },
        lambda: lam,
        radius,
        min_value,
        envelope_ok,
    })
}

/// Exterior (annulus) eigenvalue probe.
#[derive(Debug, Clone)]
pub struct EssentialProbe {
    /// `(i, lambda_0)` of the exterior operator on `B_i^c`, stabilized over
    /// the outer-radius schedule.
    pub exterior_trace: Vec<(usize, f64)>,
    /// Lower bounds `1/a_i` from the convergent criterion tail, when present.
    pub tail_lower_bounds: Option<Vec<(usize, f64)>>,
    pub discreteness: Verdict,
    /// Upper bound for `lambda_0` used in the discreteness heuristic.
    pub lambda0_estimate: f64,
}

/// For each `i` in `i_list`, stabilizes `lambda_0` of the two-sided Dirichlet
/// operator on the annulus `i+1..=j` over growing `j`. Discreteness is
/// reported `Positive` when the exterior values outgrow ten times the
/// `lambda_0` estimate and the volume criterion converges; this is an
/// operational verdict, not a proof.
pub fn essential_probe(
    p: &SymmetricProfile,
    i_list: &[usize],
    schedule: &ExhaustSchedule,
) -> Result<EssentialProbe, SemigroupError> {
    let limit = p.boundary_radius().min(schedule.r_max);
    let mut exterior_trace = Vec::with_capacity(i_list.len());
    for &i in i_list {
        if i + 1 > limit {
            return Err(SemigroupError::Profile(ProfileError::RadiusOutOfRange {
                radius: i + 1,
                limit,
            }));
        }
        let mut prev: Option<f64> = None;
        let mut j = (i + 1 + schedule.step).min(limit);
        let value = loop {
            let op = exterior_reduced_operator(p, i, j)?;
            let lam = linalg::smallest_eigenvalue_tridiag(op.sym_diag(), op.sym_off());
            if let Some(prev) = prev {
                if (lam - prev).abs() < schedule.tol {
                    break lam;
                }
            }
            if j >= limit {
                break lam;
            }
            prev = Some(lam);
            j = (j + schedule.step).min(limit);
        };
        exterior_trace.push((i, value));
    }

    let lambda0_estimate = lambda0_limit(&BallSource::Profile(p), schedule)?.value;
    let bound = volume_bound(p);
    let tail_lower_bounds = bound.map(|vb| {
        let stats = ball_stats(p, VolumeWeight::One, p.boundary_radius())
            .expect("criterion already walked the table");
        i_list
            .iter()
            .map(|&i| {
                let a_i = (vb.a - stats.partial_sums[i.min(stats.partial_sums.len() - 1)])
                    .max(f64::MIN_POSITIVE);
                (i, 1.0 / a_i)
            })
            .collect()
    });

    let unbounded_growth = exterior_trace
        .last()
        .map(|&(_, lam)| lam > 10.0 * lambda0_estimate.max(f64::MIN_POSITIVE))
        .unwrap_or(false);
    let discreteness = if unbounded_growth && bound.is_some() {
        Verdict::Positive
    } else {
        Verdict::Undetermined
    };

    Ok(EssentialProbe {
        exterior_trace,
        tail_lower_bounds,
        discreteness,
        lambda0_estimate,
    })
}

/// The sequence `-ln p_t(x, y) / t` over the time grid, computed in the log
/// domain. Its tail converges to `lambda_0` of the decomposed operator.
pub fn li_estimate(
    d: &SpectralDecomposition,
    x: usize,
    y: usize,
    t_grid: &[f64],
) -> Result<Vec<f64>, SemigroupError> {
    t_grid
        .iter()
        .map(|&t| d.heat_kernel_ln(t, x, y).map(|lp| -lp / t))
        .collect()
}

/// Direction of a comparison against a symmetric profile. Equality counts as
/// both directions and is reported as `Stronger`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonSide {
    Stronger,
    Weaker,
    Neither,
}

impl std::fmt::Display for ComparisonSide {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ComparisonSide::Stronger => write!(f, "Stronger"),
            ComparisonSide::Weaker => write!(f, "Weaker"),
            ComparisonSide::Neither => write!(f, "Neither"),
        }
    }
}

/// Per-radius extremes of the explicit curvatures against the profile.
#[derive(Debug, Clone, Copy)]
pub struct RadiusCurvatureDetail {
    pub radius: usize,
    pub min_kappa_plus: f64,
    pub max_kappa_plus: f64,
    pub sym_kappa_plus: Option<f64>,
    pub min_kappa_minus: f64,
    pub max_kappa_minus: f64,
    pub sym_kappa_minus: f64,
}

#[derive(Debug, Clone)]
pub struct CurvatureComparison {
    pub side: ComparisonSide,
    pub stronger_holds: bool,
    pub weaker_holds: bool,
    /// The comparison requires equal root measures; on mismatch the side is
    /// `Neither` and this flag records why.
    pub root_measure_ok: bool,
    pub detail: Vec<RadiusCurvatureDetail>,
}

const COMPARE_SLACK: f64 = 1e-12;

/// Compares per-vertex curvatures with the profile:
/// stronger growth means `kappa_+(x) >= sym kappa_+(r)` and
/// `kappa_-(x) <= sym kappa_-(r)` on every sphere. The outermost sphere's
/// `kappa_+` is excluded — the truncation cut those edges.
pub fn curvature_compare(
    graph: &WeightedGraph,
    layering: &Layering,
    p: &SymmetricProfile,
) -> Result<CurvatureComparison, ProfileError> {
    let r_max = layering.max_radius();
    if r_max > p.max_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius: r_max,
            limit: p.max_radius(),
        });
    }
    let curv = crate::graph::curvature(graph, layering).expect("layering from this graph");
    let root_m = graph.measure(layering.root());
    let root_measure_ok = (root_m - p.sphere_measure(0)).abs()
        <= COMPARE_SLACK * root_m.abs().max(p.sphere_measure(0)).max(1.0);

    let mut stronger = true;
    let mut weaker = true;
    let mut detail = Vec::with_capacity(r_max + 1);
    for (r, sphere) in layering.spheres().iter().enumerate() {
        let mut min_kp = f64::INFINITY;
        let mut max_kp = f64::NEG_INFINITY;
        let mut min_km = f64::INFINITY;
        let mut max_km = f64::NEG_INFINITY;
        for &v in sphere {
            min_kp = min_kp.min(curv.kappa_plus(v));
            max_kp = max_kp.max(curv.kappa_plus(v));
            min_km = min_km.min(curv.kappa_minus(v));
            max_km = max_km.max(curv.kappa_minus(v));
        }
        let sym_kp = if r < r_max { p.kappa_plus(r) } else { None };
        let sym_km = p.kappa_minus(r);
        if let Some(kp) = sym_kp {
            if min_kp < kp - COMPARE_SLACK {
                stronger = false;
            }
            if max_kp > kp + COMPARE_SLACK {
                weaker = false;
            }
        }
        if max_km > sym_km + COMPARE_SLACK {
            stronger = false;
        }
        if min_km < sym_km - COMPARE_SLACK {
            weaker = false;
        }
        detail.push(RadiusCurvatureDetail {
            radius: r,
            min_kappa_plus: min_kp,
            max_kappa_plus: max_kp,
            sym_kappa_plus: sym_kp,
            min_kappa_minus: min_km,
            max_kappa_minus: max_km,
            sym_kappa_minus: sym_km,
        });
    }

    let (stronger_holds, weaker_holds) = if root_measure_ok {
        (stronger, weaker)
    } else {
        (false, false)
    };
    let side = if stronger_holds {
        ComparisonSide::Stronger
    } else if weaker_holds {
        ComparisonSide::Weaker
    } else {
        ComparisonSide::Neither
    };
    Ok(CurvatureComparison {
        side,
        stronger_holds,
        weaker_holds,
        root_measure_ok,
        detail,
    })
}

/// A pointwise failure of the predicted kernel inequality.
#[derive(Debug, Clone, Copy)]
pub struct KernelViolation {
    pub t: f64,
    pub vertex: VertexId,
    pub radius: usize,
    pub symmetric: f64,
    pub explicit: f64,
}

/// Verification of the heat kernel and spectral comparison at one matched
/// ball radius.
#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub side: ComparisonSide,
    pub radius: usize,
    pub kernel_checks: usize,
    pub violations: Vec<KernelViolation>,
    pub lambda0_explicit: f64,
    pub lambda0_symmetric: f64,
    pub lambda0_ok: bool,
}

impl ComparisonReport {
    pub fn all_hold(&self) -> bool {
        self.violations.is_empty() && self.lambda0_ok
    }
}

const KERNEL_SLACK: f64 = 1e-10;

/// Checks `sym p_t(r) >= p_t(root, x)` for stronger curvature growth (and the
/// reversed inequality for weaker) on the matched restriction of radius `i`,
/// for every ball vertex and every grid time, plus the corresponding
/// `lambda_0` inequality.
pub fn comparison_report(
    graph: &WeightedGraph,
    p: &SymmetricProfile,
    t_grid: &[f64],
    i: usize,
) -> Result<ComparisonReport, SpectralError> {
    let layering = layer(graph, graph.root()).expect("graph root is valid");
    let comparison = curvature_compare(graph, &layering, p)?;
    if comparison.side == ComparisonSide::Neither {
        return Err(SpectralError::NotComparable);
    }
    let side = comparison.side;

    let ball = restrict(graph, &layering, i)?;
    let d_ball = decompose(&ball)?;
    let op = reduced_operator(p, i, Boundary::Dirichlet)?;
    let d_sym = decompose_reduced(&op)?;
    let root_local = ball
        .local_index(layering.root())
        .expect("root is inside every ball");

    let mut violations = Vec::new();
    let mut kernel_checks = 0usize;
    for &t in t_grid {
        let sym_at: Vec<f64> = (0..=i)
            .map(|r| d_sym.heat_kernel(t, 0, r))
            .collect::<Result<_, _>>()?;
        for (xl, &v) in ball.vertices().iter().enumerate() {
            let r = ball.radius_of(xl);
            let explicit = d_ball.heat_kernel(t, root_local, xl)?;
            let symmetric = sym_at[r];
            kernel_checks += 1;
            let holds = match side {
                ComparisonSide::Stronger => symmetric >= explicit - KERNEL_SLACK,
                ComparisonSide::Weaker => symmetric <= explicit + KERNEL_SLACK,
                ComparisonSide::Neither => unreachable!(),
            };
            if !holds {
                violations.push(KernelViolation {
                    t,
                    vertex: v,
                    radius: r,
                    symmetric,
                    explicit,
                });
            }
        }
    }

    let lambda0_explicit = d_ball.lambda0();
    let lambda0_symmetric = d_sym.lambda0();
    let lambda0_ok = match side {
        ComparisonSide::Stronger => lambda0_explicit >= lambda0_symmetric - KERNEL_SLACK,
        ComparisonSide::Weaker => lambda0_explicit <= lambda0_symmetric + KERNEL_SLACK,
        ComparisonSide::Neither => unreachable!(),
    };

    Ok(ComparisonReport {
        side,
        radius: i,
        kernel_checks,
        violations,
        lambda0_explicit,
        lambda0_symmetric,
        lambda0_ok,
    })
}

/// Aggregated spectral findings for one profile.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Final Dirichlet value: an upper bound for `lambda_0`, approached from
    /// above along the trace.
    pub lambda0_estimate: f64,
    pub lambda0_trace: Vec<(usize, f64)>,
    pub lambda0_converged: bool,
    pub volume_bound: Option<VolumeBound>,
    pub certificate: Option<LowerBoundCertificate>,
    pub discreteness: Verdict,
    pub exterior_trace: Vec<(usize, f64)>,
}

/// Default annulus anchors: powers of two up to a quarter of the table.
pub fn default_i_list(p: &SymmetricProfile) -> Vec<usize> {
    let limit = (p.boundary_radius() / 4).max(2);
    let mut out = Vec::new();
    let mut i = 2usize;
    while i <= limit && out.len() < 6 {
        out.push(i);
        i *= 2;
    }
    if out.is_empty() {
        out.push(1);
    }
    out
}

pub fn profile_spectrum_report(
    p: &SymmetricProfile,
    schedule: &ExhaustSchedule,
) -> Result<SpectrumReport, SemigroupError> {
    let limit = lambda0_limit(&BallSource::Profile(p), schedule)?;
    let vb = volume_bound(p);
    let certificate = match vb {
        Some(vb) => Some(certify_lower_bound(p, vb.lower, p.max_radius())?),
        None => None,
    };
    let probe = essential_probe(p, &default_i_list(p), schedule)?;
    Ok(SpectrumReport {
        lambda0_estimate: limit.value,
        lambda0_trace: limit.trace,
        lambda0_converged: limit.converged,
        volume_bound: vb,
        certificate,
        discreteness: probe.discreteness,
        exterior_trace: probe.exterior_trace,
    })
}
