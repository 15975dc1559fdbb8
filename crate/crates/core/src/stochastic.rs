//! Stochastic completeness at infinity: classification through the
//! summability criterion, boundedness envelopes for radial solutions,
//! numerical mass-deficit measurement, potential comparison, and the
//! completeness transfer between comparable graphs.
//!
//! Verdicts about infinite behavior are only issued from closed-form growth
//! rules; a stabilized mass deficit is reported as numerical evidence, never
//! as a proof — a finite computation cannot decide that a series diverges.

use thiserror::Error;

use crate::graph::{layer, GraphError, Layering, WeightedGraph};
use crate::profile::{
    ball_stats, criterion, solve_recursion, CriterionKind, CriterionOutcome, ProfileError,
    SymmetricProfile, VolumeWeight,
};
use crate::semigroup::{
    exhaust, BallSource, ExhaustReport, ExhaustSchedule, Observable, SemigroupError,
};
use crate::spectral::{
    curvature_compare, default_i_list, essential_probe, volume_bound, ComparisonSide,
    CurvatureComparison,
};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum StochasticError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Semigroup(#[from] SemigroupError),
}

/// Completeness verdict for the heat semigroup at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    Incomplete,
    Undetermined,
}

impl std::fmt::Display for Completeness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Completeness::Complete => write!(f, "Complete"),
            Completeness::Incomplete => write!(f, "Incomplete"),
            Completeness::Undetermined => write!(f, "Undetermined"),
        }
    }
}

/// Classification with the evidence that produced it.
#[derive(Debug, Clone)]
pub struct CompletenessReport {
    pub verdict: Completeness,
    pub criterion: CriterionOutcome,
    /// Envelope analysis of the radial solution at `alpha = 1`.
    pub boundedness: Option<SolutionBoundedness>,
    /// When incomplete: the spectral lower bound `1/a` that comes with it.
    pub lambda0_lower: Option<f64>,
    /// When incomplete: the discreteness probe verdict.
    pub discreteness: Option<Verdict>,
    /// Mass trace `M_t^i(root)` when one was requested.
    pub mass_trace: Option<ExhaustReport>,
    pub mass_time: Option<f64>,
}

/// Classifies a profile: `Complete` iff the stochastic criterion diverges,
/// `Incomplete` iff it converges, `Undetermined` otherwise (tabulated
/// profiles always end up here). An incomplete verdict is cross-checked with
/// the spectral consequences: the volume lower bound and the discreteness
/// probe are attached.
pub fn classify(p: &SymmetricProfile) -> CompletenessReport {
    let outcome = criterion(p, CriterionKind::Stochastic);
    let verdict = match outcome {
        CriterionOutcome::Diverges => Completeness::Complete,
        CriterionOutcome::Converges { .. } => Completeness::Incomplete,
        CriterionOutcome::Undetermined { .. } => Completeness::Undetermined,
    };
    let boundedness = solution_boundedness(p, 1.0, p.boundary_radius().min(60)).ok();
    let (lambda0_lower, discreteness) = if verdict == Completeness::Incomplete {
        let vb = volume_bound(p);
        let probe = essential_probe(p, &default_i_list(p), &ExhaustSchedule::for_profile()).ok();
        (vb.map(|b| b.lower), probe.map(|pr| pr.discreteness))
    } else {
        (None, None)
    };
    CompletenessReport {
        verdict,
        criterion: outcome,
        boundedness,
        lambda0_lower,
        discreteness,
        mass_trace: None,
        mass_time: None,
    }
}

/// [`classify`] plus a mass-deficit exhaustion at the root for time `t`.
pub fn classify_with_mass(
    p: &SymmetricProfile,
    t: f64,
    schedule: &ExhaustSchedule,
) -> Result<CompletenessReport, SemigroupError> {
    let mut report = classify(p);
    let deficit = mass_deficit(&BallSource::Profile(p), t, schedule)?;
    report.mass_trace = Some(deficit.report);
    report.mass_time = Some(t);
    Ok(report)
}

/// Radial solution at `alpha > 0` with the two one-sided envelopes that
/// decide boundedness: increments dominate `V_{q+alpha}(r)/dB(r) * v(0)`
/// from below, and `v` is dominated by the running product
/// `prod (1 + V_{q+alpha}/dB)` from above. Divergence of the increment sums
/// forces unboundedness; convergence of the product forces boundedness.
#[derive(Debug, Clone)]
pub struct SolutionBoundedness {
    pub alpha: f64,
    pub values: Vec<f64>,
    /// Partial sums of `V_{q+alpha}(r) / dB(r)`.
    pub growth_sums: Vec<f64>,
    /// Running products of `1 + V_{q+alpha}(r) / dB(r)`.
    pub product_bounds: Vec<f64>,
    /// Increment envelope verified pointwise against the solution.
    pub lower_ok: bool,
    /// Product envelope verified pointwise against the solution.
    pub upper_ok: bool,
}

const ENVELOPE_SLACK: f64 = 1e-10;

pub fn solution_boundedness(
    p: &SymmetricProfile,
    alpha: f64,
    radius: usize,
) -> Result<SolutionBoundedness, ProfileError> {
    assert!(alpha > 0.0, "boundedness analysis needs alpha > 0");
    let radius = radius.min(p.max_radius());
    let v = solve_recursion(p, alpha, 1.0, radius)?;
    let stats = ball_stats(
        p,
        VolumeWeight::QPlusAlpha(alpha),
        radius.saturating_sub(1).min(p.boundary_radius()),
    )?;
    let mut lower_ok = true;
    let mut upper_ok = true;
    let mut product = 1.0;
    let mut product_bounds = Vec::with_capacity(stats.ratio.len());
    for (r, &ratio) in stats.ratio.iter().enumerate() {
        let increment = v[r + 1] - v[r];
        if increment < ratio - ENVELOPE_SLACK * ratio.abs().max(1.0) {
            lower_ok = false;
        }
        product *= 1.0 + ratio;
        product_bounds.push(product);
        if v[r + 1] > product * (1.0 + ENVELOPE_SLACK) + ENVELOPE_SLACK {
            upper_ok = false;
        }
    }
    Ok(SolutionBoundedness {
        alpha,
        values: v,
        growth_sums: stats.partial_sums,
        product_bounds,
        lower_ok,
        upper_ok,
    })
}

/// Stabilized mass deficit `1 - lim_i M_t^i(root)`.
#[derive(Debug, Clone)]
pub struct MassDeficit {
    pub deficit: f64,
    pub report: ExhaustReport,
}

/// Exhausts the mass function at the root. A stabilized positive deficit is
/// numerical evidence of stochastic incompleteness at infinity.
pub fn mass_deficit(
    source: &BallSource<'_>,
    t: f64,
    schedule: &ExhaustSchedule,
) -> Result<MassDeficit, SemigroupError> {
    assert!(t > 0.0, "deficit needs a positive time");
    let x = match source {
        BallSource::Graph { layering, .. } => layering.root().0,
        BallSource::Profile(_) => 0,
    };
    let report = exhaust(source, Observable::MassAt { t, x }, schedule)?;
    Ok(MassDeficit {
        deficit: 1.0 - report.value,
        report,
    })
}

/// Pointwise comparison of normalized potentials against a profile.
/// Equality counts as both directions and is reported `Stronger`.
#[derive(Debug, Clone, Copy)]
pub struct PotentialComparison {
    pub side: ComparisonSide,
    pub stronger_holds: bool,
    pub weaker_holds: bool,
}

pub fn potential_compare(
    graph: &WeightedGraph,
    layering: &Layering,
    p: &SymmetricProfile,
) -> Result<PotentialComparison, ProfileError> {
    let r_max = layering.max_radius();
    if r_max > p.max_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius: r_max,
            limit: p.max_radius(),
        });
    }
    let mut stronger = true;
    let mut weaker = true;
    for (r, sphere) in layering.spheres().iter().enumerate() {
        let sym_q = p.q(r);
        for &v in sphere {
            let q = graph.q(v);
            if q < sym_q - 1e-12 {
                stronger = false;
            }
            if q > sym_q + 1e-12 {
                weaker = false;
            }
        }
    }
    let side = if stronger {
        ComparisonSide::Stronger
    } else if weaker {
        ComparisonSide::Weaker
    } else {
        ComparisonSide::Neither
    };
    Ok(PotentialComparison {
        side,
        stronger_holds: stronger,
        weaker_holds: weaker,
    })
}

/// Premises and conclusion of the completeness transfer.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub verdict: Completeness,
    pub curvature: CurvatureComparison,
    pub potential: PotentialComparison,
    pub profile_report: CompletenessReport,
}

/// Transfers the profile's completeness verdict to a comparable graph:
/// stronger curvature growth with weaker potential inherits incompleteness,
/// weaker curvature growth with stronger potential inherits completeness.
/// The premises are certified up to the truncation radius of the graph.
pub fn sc_transfer(
    graph: &WeightedGraph,
    p: &SymmetricProfile,
) -> Result<TransferReport, StochasticError> {
    let layering = layer(graph, graph.root())?;
    let curvature = curvature_compare(graph, &layering, p)?;
    let potential = potential_compare(graph, &layering, p)?;
    let profile_report = classify(p);

    let verdict = if curvature.stronger_holds
        && potential.weaker_holds
        && profile_report.verdict == Completeness::Incomplete
    {
        Completeness::Incomplete
    } else if curvature.weaker_holds
        && potential.stronger_holds
        && profile_report.verdict == Completeness::Complete
    {
        Completeness::Complete
    } else {
        Completeness::Undetermined
    };

    Ok(TransferReport {
        verdict,
        curvature,
        potential,
        profile_report,
    })
}
