//! Weakly spherically symmetric graphs as per-radius profiles.
//!
//! A profile tabulates, for radii `0..=R`, the sphere measures `m(S_r)`, the
//! curvatures `kappa_+(r)`, `kappa_-(r)` and the normalized potential `q(r)`.
//! These four sequences determine the action of the Laplacian on spherically
//! symmetric functions, which reduces to a Jacobi (tridiagonal) operator on
//! radii. Generators for antitrees and spherically symmetric trees produce an
//! explicit graph together with its profile; a profile alone can extend far
//! beyond any explicit truncation.

use thiserror::Error;

use crate::graph::{VertexId, WeightedGraph};
use crate::verdict::Verdict;

/// Hard ceiling on generated explicit graphs.
pub const DEFAULT_VERTEX_CAP: usize = 200_000;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("SizeOverflow: generator needs {total} vertices, cap is {cap}")]
    SizeOverflow { total: u128, cap: usize },
    #[error("RadiusOutOfRange: radius {radius} not tabulated (limit {limit})")]
    RadiusOutOfRange { radius: usize, limit: usize },
    #[error("ZeroBoundary: boundary measure vanishes at radius {0}")]
    ZeroBoundary(usize),
    #[error("InvalidProfile: {0}")]
    InvalidProfile(String),
}

/// Closed-form growth family attached to a profile, when one is known.
#[derive(Debug, Clone, PartialEq)]
pub enum GrowthRule {
    /// Antitree with `|S_r| = max(1, round(r^beta))` for `r >= 1`.
    PolynomialAntitree { beta: f64 },
    /// Spherically symmetric tree with forward branching `kappa_+(r) = k(r)`.
    TreeBranching(Branching),
    /// No closed form; only the tabulated entries are known.
    Tabulated,
}

/// Forward branching numbers `k(r)` of a spherically symmetric tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Branching {
    /// `k(r) = c` for every radius.
    Constant(u32),
    /// The k-regular tree: `k(0) = k`, `k(r) = k - 1` for `r >= 1`.
    Regular(u32),
    /// `k(r) = (r + 1)^e`.
    Power(u32),
    /// Explicitly tabulated branching numbers.
    Sequence(Vec<u32>),
}

impl Branching {
    /// Branching number at radius `r`, if defined there.
    pub fn at(&self, r: usize) -> Option<u64> {
        match self {
            Branching::Constant(c) => Some(u64::from(*c)),
            Branching::Regular(k) => Some(if r == 0 {
                u64::from(*k)
            } else {
                u64::from(k.saturating_sub(1))
            }),
            Branching::Power(e) => (r as u64 + 1).checked_pow(*e),
            Branching::Sequence(ks) => ks.get(r).map(|&k| u64::from(k)),
        }
    }

    /// Polynomial degree of `k(r)` when the family is polynomial.
    pub fn degree(&self) -> Option<u32> {
        match self {
            Branching::Constant(_) | Branching::Regular(_) => Some(0),
            Branching::Power(e) => Some(*e),
            Branching::Sequence(_) => None,
        }
    }
}

/// Per-radius data of a weakly spherically symmetric graph.
///
/// `kappa_plus` covers radii `0..=R` when the generator knows the next sphere
/// (rule present) and `0..R` otherwise; `kappa_minus(0) = 0` always. The
/// balance identity `kappa_+(r) m(S_r) = kappa_-(r+1) m(S_{r+1})` is what
/// makes the reduced operator symmetrizable.
#[derive(Debug, Clone)]
pub struct SymmetricProfile {
    sphere_measure: Vec<f64>,
    kappa_plus: Vec<f64>,
    kappa_minus: Vec<f64>,
    q: Vec<f64>,
    rule: GrowthRule,
}

impl SymmetricProfile {
    pub fn new(
        sphere_measure: Vec<f64>,
        kappa_plus: Vec<f64>,
        kappa_minus: Vec<f64>,
        q: Vec<f64>,
        rule: GrowthRule,
    ) -> Result<Self, ProfileError> {
        let len = sphere_measure.len();
        if len == 0 {
            return Err(ProfileError::InvalidProfile(
                "profile needs at least the root sphere".into(),
            ));
        }
        let r_max = len - 1;
        if kappa_minus.len() != len || q.len() != len {
            return Err(ProfileError::InvalidProfile(format!(
                "kappa_minus and q must cover radii 0..={r_max}"
            )));
        }
        if kappa_plus.len() != r_max && kappa_plus.len() != len {
            return Err(ProfileError::InvalidProfile(format!(
                "kappa_plus must cover radii 0..{r_max} or 0..={r_max}"
            )));
        }
        for (r, &m) in sphere_measure.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(ProfileError::InvalidProfile(format!(
                    "sphere measure at radius {r} is {m}"
                )));
            }
        }
        for (r, &k) in kappa_plus.iter().enumerate() {
            if !(k > 0.0) || !k.is_finite() {
                return Err(ProfileError::InvalidProfile(format!(
                    "kappa_plus at radius {r} is {k}"
                )));
            }
        }
        if kappa_minus[0] != 0.0 {
            return Err(ProfileError::InvalidProfile(format!(
                "kappa_minus(0) must be 0, got {}",
                kappa_minus[0]
            )));
        }
        for (r, &k) in kappa_minus.iter().enumerate().skip(1) {
            if !(k > 0.0) || !k.is_finite() {
                return Err(ProfileError::InvalidProfile(format!(
                    "kappa_minus at radius {r} is {k}"
                )));
            }
        }
        for (r, &v) in q.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(ProfileError::InvalidProfile(format!(
                    "q at radius {r} is {v}"
                )));
            }
        }
        Ok(SymmetricProfile {
            sphere_measure,
            kappa_plus,
            kappa_minus,
            q,
            rule,
        })
    }

    /// Largest tabulated radius `R`.
    #[inline]
    pub fn max_radius(&self) -> usize {
        self.sphere_measure.len() - 1
    }

    /// Largest radius with a tabulated `kappa_+`, i.e. the largest `r` for
    /// which the boundary measure of `B_r` is known.
    #[inline]
    pub fn boundary_radius(&self) -> usize {
        self.kappa_plus.len() - 1
    }

    #[inline]
    pub fn sphere_measure(&self, r: usize) -> f64 {
        self.sphere_measure[r]
    }

    pub fn kappa_plus(&self, r: usize) -> Option<f64> {
        self.kappa_plus.get(r).copied()
    }

    #[inline]
    pub fn kappa_minus(&self, r: usize) -> f64 {
        self.kappa_minus[r]
    }

    #[inline]
    pub fn q(&self, r: usize) -> f64 {
        self.q[r]
    }

    pub fn q_slice(&self, up_to: usize) -> &[f64] {
        &self.q[..=up_to]
    }

    pub fn sphere_measures(&self) -> &[f64] {
        &self.sphere_measure
    }

    pub fn rule(&self) -> &GrowthRule {
        &self.rule
    }

    /// Attaches a growth rule to a tabulated profile, after checking that
    /// the table agrees with the rule's closed form.
    pub fn with_rule(mut self, rule: GrowthRule) -> Result<Self, ProfileError> {
        self.rule = rule;
        let check = validate_profile(&self, 1e-9);
        if check.verdict != crate::verdict::Verdict::Positive {
            return Err(ProfileError::InvalidProfile(format!(
                "tabulated entries disagree with the rule: {}",
                check.detail.unwrap_or_default()
            )));
        }
        Ok(self)
    }

    /// Boundary measure of the ball of radius `r`:
    /// `dB(r) = kappa_+(r) m(S_r)`, the total edge weight leaving `B_r`.
    pub fn boundary(&self, r: usize) -> Result<f64, ProfileError> {
        match self.kappa_plus.get(r) {
            Some(&k) => Ok(k * self.sphere_measure[r]),
            None => Err(ProfileError::RadiusOutOfRange {
                radius: r,
                limit: self.kappa_plus.len().saturating_sub(1),
            }),
        }
    }
}

/// Outcome of checking a profile against its structural invariants.
#[derive(Debug, Clone)]
pub struct ProfileValidation {
    pub verdict: Verdict,
    /// Largest relative violation seen (balance or rule agreement).
    pub max_violation: f64,
    pub detail: Option<String>,
}

/// Checks the balance identity on all tabulated radii, and — when a growth
/// rule is attached — that the tabulated entries agree with the closed form.
pub fn validate_profile(p: &SymmetricProfile, tol: f64) -> ProfileValidation {
    assert!(tol > 0.0);
    let mut max_violation = 0.0f64;
    let mut detail = None;
    let r_max = p.max_radius();
    for r in 0..r_max {
        let lhs = p.kappa_plus[r] * p.sphere_measure[r];
        let rhs = p.kappa_minus[r + 1] * p.sphere_measure[r + 1];
        let rel = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        if rel > max_violation {
            max_violation = rel;
            if rel > tol {
                detail = Some(format!(
                    "balance fails at radius {r}: kappa_+(r) m(S_r) = {lhs}, \
                     kappa_-(r+1) m(S_{{r+1}}) = {rhs}"
                ));
            }
        }
    }

    let mut check = |expected: f64, got: f64, what: &str, r: usize| {
        let rel = (expected - got).abs() / expected.abs().max(got.abs()).max(1.0);
        if rel > max_violation {
            max_violation = rel;
            if rel > tol {
                detail = Some(format!("{what} at radius {r} is {got}, rule gives {expected}"));
            }
        }
    };
    match &p.rule {
        GrowthRule::PolynomialAntitree { beta } => {
            for r in 0..=r_max {
                check(antitree_sphere_size(*beta, r) as f64, p.sphere_measure[r], "m(S_r)", r);
                if let Some(k) = p.kappa_plus.get(r) {
                    check(antitree_sphere_size(*beta, r + 1) as f64, *k, "kappa_plus", r);
                }
                if r > 0 {
                    check(antitree_sphere_size(*beta, r - 1) as f64, p.kappa_minus[r], "kappa_minus", r);
                }
                check(0.0, p.q[r], "q", r);
            }
        }
        GrowthRule::TreeBranching(b) => {
            let mut size = 1.0;
            for r in 0..=r_max {
                check(size, p.sphere_measure[r], "m(S_r)", r);
                let k = b.at(r).unwrap_or(0) as f64;
                if let Some(kp) = p.kappa_plus.get(r) {
                    check(k, *kp, "kappa_plus", r);
                }
                if r > 0 {
                    check(1.0, p.kappa_minus[r], "kappa_minus", r);
                }
                check(0.0, p.q[r], "q", r);
                size *= k;
            }
        }
        GrowthRule::Tabulated => {}
    }

    let verdict = if max_violation <= tol {
        Verdict::Positive
    } else {
        Verdict::Negative
    };
    ProfileValidation {
        verdict,
        max_violation,
        detail,
    }
}

/// Canonical antitree sphere size: `|S_0| = 1`, `|S_r| = max(1, round(r^beta))`.
pub fn antitree_sphere_size(beta: f64, r: usize) -> u64 {
    if r == 0 {
        1
    } else {
        (r as f64).powf(beta).round().max(1.0) as u64
    }
}

fn check_cap(sizes: &[u64]) -> Result<usize, ProfileError> {
    let total: u128 = sizes.iter().map(|&s| u128::from(s)).sum();
    if total > DEFAULT_VERTEX_CAP as u128 {
        return Err(ProfileError::SizeOverflow {
            total,
            cap: DEFAULT_VERTEX_CAP,
        });
    }
    Ok(total as usize)
}

fn antitree_graph(sizes: &[u64]) -> Result<WeightedGraph, ProfileError> {
    let total = check_cap(sizes)?;
    let mut first = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0usize;
    for &s in sizes {
        first.push(acc);
        acc += s as usize;
    }
    first.push(acc);
    let vertices: Vec<(usize, f64, f64)> = (0..total).map(|i| (i, 1.0, 0.0)).collect();
    let mut edges = Vec::new();
    for r in 0..sizes.len() - 1 {
        for u in first[r]..first[r + 1] {
            for v in first[r + 1]..first[r + 2] {
                edges.push((u, v, 1.0));
            }
        }
    }
    WeightedGraph::build(&vertices, &edges, Some(VertexId(0)))
        .map_err(|e| ProfileError::InvalidProfile(e.to_string()))
}

fn antitree_profile_from_sizes(sizes: &[u64], next_size: Option<u64>, rule: GrowthRule) -> SymmetricProfile {
    let r_max = sizes.len() - 1;
    let sphere_measure: Vec<f64> = sizes.iter().map(|&s| s as f64).collect();
    let mut kappa_plus: Vec<f64> = (0..r_max).map(|r| sizes[r + 1] as f64).collect();
    if let Some(s) = next_size {
        kappa_plus.push(s as f64);
    }
    let mut kappa_minus = vec![0.0];
    kappa_minus.extend((1..=r_max).map(|r| sizes[r - 1] as f64));
    let q = vec![0.0; r_max + 1];
    SymmetricProfile::new(sphere_measure, kappa_plus, kappa_minus, q, rule)
        .expect("generated antitree profile is well formed")
}

/// Antitree with polynomial sphere growth: every vertex of `S_r` is joined to
/// every vertex of `S_{r+1}`, with `b = m = 1` and `c = 0`.
pub fn make_antitree(
    beta: f64,
    radius: usize,
) -> Result<(WeightedGraph, SymmetricProfile), ProfileError> {
    assert!(beta > 0.0, "beta must be positive");
    assert!(radius >= 1);
    let sizes: Vec<u64> = (0..=radius).map(|r| antitree_sphere_size(beta, r)).collect();
    let graph = antitree_graph(&sizes)?;
    let profile = antitree_profile_from_sizes(
        &sizes,
        Some(antitree_sphere_size(beta, radius + 1)),
        GrowthRule::PolynomialAntitree { beta },
    );
    Ok((graph, profile))
}

/// Antitree with explicitly given sphere sizes (no growth rule attached).
pub fn make_antitree_with_sizes(
    sizes: &[u64],
) -> Result<(WeightedGraph, SymmetricProfile), ProfileError> {
    if sizes.len() < 2 || sizes[0] != 1 || sizes.iter().any(|&s| s == 0) {
        return Err(ProfileError::InvalidProfile(
            "need sizes |S_0| = 1, |S_r| >= 1 up to radius >= 1".into(),
        ));
    }
    let graph = antitree_graph(sizes)?;
    let profile = antitree_profile_from_sizes(sizes, None, GrowthRule::Tabulated);
    Ok((graph, profile))
}

/// Profile of the polynomial antitree, without the explicit graph. Not
/// subject to the vertex cap: sphere measures are tabulated as reals.
pub fn antitree_profile(beta: f64, radius: usize) -> SymmetricProfile {
    assert!(beta > 0.0);
    assert!(radius >= 1);
    let sizes: Vec<u64> = (0..=radius).map(|r| antitree_sphere_size(beta, r)).collect();
    antitree_profile_from_sizes(
        &sizes,
        Some(antitree_sphere_size(beta, radius + 1)),
        GrowthRule::PolynomialAntitree { beta },
    )
}

fn tree_sizes(branching: &Branching, radius: usize) -> Result<Vec<u64>, ProfileError> {
    let mut sizes = vec![1u64];
    for r in 0..radius {
        let k = branching.at(r).ok_or_else(|| {
            ProfileError::InvalidProfile(format!("branching undefined at radius {r}"))
        })?;
        if k == 0 {
            return Err(ProfileError::InvalidProfile(format!(
                "branching must be positive, got 0 at radius {r}"
            )));
        }
        let next = sizes[r]
            .checked_mul(k)
            .ok_or(ProfileError::SizeOverflow {
                total: u128::MAX,
                cap: DEFAULT_VERTEX_CAP,
            })?;
        sizes.push(next);
    }
    Ok(sizes)
}

fn tree_profile_from(branching: &Branching, radius: usize) -> Result<SymmetricProfile, ProfileError> {
    // sphere measures as reals: profiles routinely reach radii where the
    // vertex counts overflow any integer type
    let mut sphere_measure = vec![1.0f64];
    let mut kappa_plus = Vec::with_capacity(radius + 1);
    for r in 0..=radius {
        let k = branching.at(r).ok_or_else(|| {
            ProfileError::InvalidProfile(format!("branching undefined at radius {r}"))
        })?;
        if k == 0 {
            return Err(ProfileError::InvalidProfile(format!(
                "branching must be positive, got 0 at radius {r}"
            )));
        }
        kappa_plus.push(k as f64);
        if r < radius {
            let next = sphere_measure[r] * k as f64;
            if !next.is_finite() {
                return Err(ProfileError::InvalidProfile(format!(
                    "sphere measure overflows f64 at radius {}",
                    r + 1
                )));
            }
            sphere_measure.push(next);
        }
    }
    let mut kappa_minus = vec![0.0];
    kappa_minus.extend(std::iter::repeat(1.0).take(radius));
    let q = vec![0.0; radius + 1];
    SymmetricProfile::new(
        sphere_measure,
        kappa_plus,
        kappa_minus,
        q,
        GrowthRule::TreeBranching(branching.clone()),
    )
}

/// Largest radius at which the tree profile's sphere measure is still a
/// normal f64.
pub fn tree_profile_radius_limit(branching: &Branching, want: usize) -> usize {
    let mut size = 1.0f64;
    for r in 0..want {
        match branching.at(r) {
            Some(k) if k > 0 => size *= k as f64,
            _ => return r,
        }
        if !size.is_finite() || size > 1e300 {
            return r;
        }
    }
    want
}

/// Spherically symmetric tree: the root has `k(0)` children and every vertex
/// of `S_r` has `k(r)` children, with `b = m = 1` and `c = 0`.
pub fn make_sym_tree(
    branching: &Branching,
    radius: usize,
) -> Result<(WeightedGraph, SymmetricProfile), ProfileError> {
    assert!(radius >= 1);
    let sizes = tree_sizes(branching, radius)?;
    let total = check_cap(&sizes)?;
    let vertices: Vec<(usize, f64, f64)> = (0..total).map(|i| (i, 1.0, 0.0)).collect();
    let mut edges = Vec::new();
    let mut first = Vec::with_capacity(sizes.len() + 1);
    let mut acc = 0usize;
    for &s in &sizes {
        first.push(acc);
        acc += s as usize;
    }
    first.push(acc);
    for r in 0..radius {
        let k = branching.at(r).unwrap() as usize;
        for (offset, u) in (first[r]..first[r + 1]).enumerate() {
            for j in 0..k {
                let v = first[r + 1] + offset * k + j;
                edges.push((u, v, 1.0));
            }
        }
    }
    let graph = WeightedGraph::build(&vertices, &edges, Some(VertexId(0)))
        .map_err(|e| ProfileError::InvalidProfile(e.to_string()))?;
    let profile = tree_profile_from(branching, radius)?;
    Ok((graph, profile))
}

/// Profile of the spherically symmetric tree, without the explicit graph.
pub fn sym_tree_profile(
    branching: &Branching,
    radius: usize,
) -> Result<SymmetricProfile, ProfileError> {
    tree_profile_from(branching, radius)
}

/// Boundary condition of a reduced operator at its outer radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// `f(r_hi + 1) = 0`: the outer row keeps its full diagonal
    /// `kappa_+ + kappa_- + q`. This is the radial form of the Dirichlet
    /// restriction to the ball.
    Dirichlet,
    /// The truncation is the whole graph: nothing exists beyond `r_hi`, so
    /// the outer row has no `kappa_+` term.
    None,
}

/// The Laplacian restricted to spherically symmetric functions, as a Jacobi
/// operator on a radius window:
/// `(Jf)(r) = kappa_+(r)(f(r) - f(r+1)) + kappa_-(r)(f(r) - f(r-1)) + q(r) f(r)`
/// with `f(r_lo - 1) = 0` and the outer boundary as configured.
///
/// Conjugating by `sqrt(m(S_r))` turns `J` into a real symmetric tridiagonal
/// matrix; the balance identity makes the two off-diagonals coincide, and the
/// symmetrized coupling `-sqrt(kappa_+(r) kappa_-(r+1))` is computed once so
/// the matrix is symmetric bit-for-bit.
#[derive(Debug, Clone)]
pub struct ReducedOperator {
    r_lo: usize,
    diag: Vec<f64>,
    off: Vec<f64>,
    weights: Vec<f64>,
    q: Vec<f64>,
    boundary: Boundary,
}

impl ReducedOperator {
    #[inline]
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    #[inline]
    pub fn r_lo(&self) -> usize {
        self.r_lo
    }

    #[inline]
    pub fn r_hi(&self) -> usize {
        self.r_lo + self.diag.len() - 1
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Diagonal of the symmetrized matrix (also the diagonal of `J`).
    pub fn sym_diag(&self) -> &[f64] {
        &self.diag
    }

    /// Off-diagonal of the symmetrized matrix, length `dim - 1`.
    pub fn sym_off(&self) -> &[f64] {
        &self.off
    }

    /// Radius weights `m(S_r)` over the window.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Normalized potential over the window.
    pub fn q_values(&self) -> &[f64] {
        &self.q
    }
}

/// Reduced operator on radii `0..=i`.
pub fn reduced_operator(
    p: &SymmetricProfile,
    i: usize,
    boundary: Boundary,
) -> Result<ReducedOperator, ProfileError> {
    if i > p.max_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius: i,
            limit: p.max_radius(),
        });
    }
    if boundary == Boundary::Dirichlet && p.kappa_plus(i).is_none() {
        return Err(ProfileError::RadiusOutOfRange {
            radius: i,
            limit: p.boundary_radius(),
        });
    }
    let mut diag = Vec::with_capacity(i + 1);
    for r in 0..=i {
        let kp = if r < i {
            p.kappa_plus[r]
        } else {
            match boundary {
                Boundary::Dirichlet => p.kappa_plus[i],
                Boundary::None => 0.0,
            }
        };
        diag.push(kp + p.kappa_minus[r] + p.q[r]);
    }
    let off: Vec<f64> = (0..i)
        .map(|r| -(p.kappa_plus[r] * p.kappa_minus[r + 1]).sqrt())
        .collect();
    Ok(ReducedOperator {
        r_lo: 0,
        diag,
        off,
        weights: p.sphere_measure[..=i].to_vec(),
        q: p.q[..=i].to_vec(),
        boundary,
    })
}

/// Reduced operator on the annulus `i+1..=j` with Dirichlet conditions on
/// both sides (`f(i) = 0` and `f(j+1) = 0`). Its smallest eigenvalue bounds
/// the spectrum of the Laplacian on the complement of `B_i` from below along
/// the exhaustion.
pub fn exterior_reduced_operator(
    p: &SymmetricProfile,
    i: usize,
    j: usize,
) -> Result<ReducedOperator, ProfileError> {
    if i + 1 > j || j > p.boundary_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius: j,
            limit: p.boundary_radius(),
        });
    }
    let diag: Vec<f64> = (i + 1..=j)
        .map(|r| p.kappa_plus[r] + p.kappa_minus[r] + p.q[r])
        .collect();
    let off: Vec<f64> = (i + 1..j)
        .map(|r| -(p.kappa_plus[r] * p.kappa_minus[r + 1]).sqrt())
        .collect();
    Ok(ReducedOperator {
        r_lo: i + 1,
        diag,
        off,
        weights: p.sphere_measure[i + 1..=j].to_vec(),
        q: p.q[i + 1..=j].to_vec(),
        boundary: Boundary::Dirichlet,
    })
}

/// Solves `(J + alpha) v = 0` radially for the initial value `v(0) = v0`:
/// `v(r+1) = v(r) + (1/dB(r)) * sum_{j<=r} (q(j) + alpha) m(S_j) v(j)`.
/// For `alpha > 0` and `v0 > 0` the solution is strictly increasing.
pub fn solve_recursion(
    p: &SymmetricProfile,
    alpha: f64,
    v0: f64,
    radius: usize,
) -> Result<Vec<f64>, ProfileError> {
    if radius > p.max_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius,
            limit: p.max_radius(),
        });
    }
    let mut v = Vec::with_capacity(radius + 1);
    v.push(v0);
    let mut acc = 0.0;
    for r in 0..radius {
        acc += (p.q[r] + alpha) * p.sphere_measure[r] * v[r];
        let boundary = p.boundary(r)?;
        if boundary <= 0.0 {
            return Err(ProfileError::ZeroBoundary(r));
        }
        v.push(v[r] + acc / boundary);
    }
    Ok(v)
}

/// Weight function for ball volumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeWeight {
    One,
    QPlusOne,
    QPlusAlpha(f64),
}

/// Volumes, boundary measures and their ratios over radii `0..=radius`.
#[derive(Debug, Clone)]
pub struct BallStats {
    /// `V_f(r) = sum_{r' <= r} f(r') m(S_{r'})`.
    pub volume: Vec<f64>,
    /// `dB(r) = kappa_+(r) m(S_r)`.
    pub boundary: Vec<f64>,
    /// `V_f(r) / dB(r)`.
    pub ratio: Vec<f64>,
    /// Partial sums of the ratios.
    pub partial_sums: Vec<f64>,
}

pub fn ball_stats(
    p: &SymmetricProfile,
    weight: VolumeWeight,
    radius: usize,
) -> Result<BallStats, ProfileError> {
    if radius > p.boundary_radius() {
        return Err(ProfileError::RadiusOutOfRange {
            radius,
            limit: p.boundary_radius(),
        });
    }
    let f = |r: usize| match weight {
        VolumeWeight::One => 1.0,
        VolumeWeight::QPlusOne => p.q[r] + 1.0,
        VolumeWeight::QPlusAlpha(a) => p.q[r] + a,
    };
    let mut volume = Vec::with_capacity(radius + 1);
    let mut boundary = Vec::with_capacity(radius + 1);
    let mut ratio = Vec::with_capacity(radius + 1);
    let mut partial_sums = Vec::with_capacity(radius + 1);
    let mut vol = 0.0;
    let mut sum = 0.0;
    for r in 0..=radius {
        vol += f(r) * p.sphere_measure[r];
        let db = p.boundary(r)?;
        volume.push(vol);
        boundary.push(db);
        let rt = vol / db;
        ratio.push(rt);
        sum += rt;
        partial_sums.push(sum);
    }
    Ok(BallStats {
        volume,
        boundary,
        ratio,
        partial_sums,
    })
}

/// Which summability criterion to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriterionKind {
    /// `sum_r V_1(r) / dB(r)`: finiteness bounds the bottom of the spectrum
    /// from below by the reciprocal and forces purely discrete spectrum.
    Spectrum,
    /// `sum_r V_{q+1}(r) / dB(r)`: divergence characterizes stochastic
    /// completeness at infinity.
    Stochastic,
}

/// Decision about an infinite series from a finite table plus a growth rule.
#[derive(Debug, Clone)]
pub enum CriterionOutcome {
    /// The series converges; `sum_bound` is a rigorous upper bound for its
    /// value (tabulated partial sum plus an integral tail bound).
    Converges { sum_bound: f64 },
    Diverges,
    /// No closed form decides the tail. Carries the tabulated partial sums
    /// and an advisory log-log slope of the ratio sequence.
    Undetermined {
        partial_sums: Vec<f64>,
        loglog_slope: Option<f64>,
    },
}

impl CriterionOutcome {
    pub fn label(&self) -> &'static str {
        match self {
            CriterionOutcome::Converges { .. } => "Converges",
            CriterionOutcome::Diverges => "Diverges",
            CriterionOutcome::Undetermined { .. } => "Undetermined",
        }
    }
}

fn loglog_slope(ratio: &[f64]) -> Option<f64> {
    let n = ratio.len();
    if n < 6 {
        return None;
    }
    let lo = (n / 2).max(1);
    let pts: Vec<(f64, f64)> = (lo..n)
        .filter(|&r| ratio[r] > 0.0)
        .map(|r| ((r as f64).ln(), ratio[r].ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = k * sxx - sx * sx;
    (denom.abs() > 1e-12).then(|| (k * sxy - sx * sy) / denom)
}

// Tail bounds. Both come from the integral test applied to explicit
// term-wise envelopes of V(r)/dB(r), so the reported sum is an upper
// bound and its reciprocal a valid spectral lower bound.
fn antitree_tail_bound(beta: f64, last_r: usize) -> f64 {
    // |S_r| in [r^beta / 2, 3 r^beta / 2] gives V(r)/dB(r) <= C r^(1-beta)
    let c = 4.0 + 12.0 / (beta + 1.0);
    c * (last_r as f64).powf(2.0 - beta) / (beta - 2.0)
}

fn tree_power_tail_bound(degree: f64, last_r: usize) -> f64 {
    // |B_r|/|S_r| <= 3/2 for r >= 2 gives V(r)/dB(r) <= 2 (r+1)^(-d)
    2.0 * (last_r as f64 + 1.0).powf(1.0 - degree) / (degree - 1.0)
}

/// Evaluates the chosen summability criterion. With a polynomial growth rule
/// the verdict is decided in closed form; tabulated profiles only ever get
/// `Undetermined`, because a finite table cannot decide a tail.
pub fn criterion(p: &SymmetricProfile, kind: CriterionKind) -> CriterionOutcome {
    let radius = p.boundary_radius();
    let weight = match kind {
        CriterionKind::Spectrum => VolumeWeight::One,
        CriterionKind::Stochastic => VolumeWeight::QPlusOne,
    };
    let stats = ball_stats(p, weight, radius).expect("radius within tabulated range");
    let q_is_zero = p.q.iter().all(|&v| v == 0.0);

    // a positive potential only enlarges the stochastic sum, so a divergent
    // V_1 criterion settles the V_{q+1} one; convergence needs q == 0
    let decided = match &p.rule {
        GrowthRule::PolynomialAntitree { beta } => {
            if *beta <= 2.0 {
                Some(CriterionOutcome::Diverges)
            } else if (kind == CriterionKind::Spectrum || q_is_zero) && radius >= 4 {
                Some(CriterionOutcome::Converges {
                    sum_bound: stats.partial_sums[radius] + antitree_tail_bound(*beta, radius),
                })
            } else {
                None
            }
        }
        GrowthRule::TreeBranching(b) => match b.degree() {
            Some(d) if d <= 1 => Some(CriterionOutcome::Diverges),
            Some(d) if (kind == CriterionKind::Spectrum || q_is_zero) && radius >= 4 => {
                Some(CriterionOutcome::Converges {
                    sum_bound: stats.partial_sums[radius]
                        + tree_power_tail_bound(f64::from(d), radius),
                })
            }
            _ => None,
        },
        GrowthRule::Tabulated => None,
    };

    decided.unwrap_or_else(|| CriterionOutcome::Undetermined {
        loglog_slope: loglog_slope(&stats.ratio),
        partial_sums: stats.partial_sums,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn half_line_profile(radius: usize) -> SymmetricProfile {
        sym_tree_profile(&Branching::Constant(1), radius).unwrap()
    }

    #[test]
    fn antitree_beta1_sizes_and_curvatures() {
        let (_, p) = make_antitree(1.0, 3).unwrap();
        assert_eq!(p.sphere_measures(), &[1.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.kappa_plus(0), Some(1.0));
        assert_eq!(p.kappa_plus(1), Some(2.0));
        assert_eq!(p.kappa_plus(2), Some(3.0));
        // the rule extends kappa_+ one step past the truncation
        assert_eq!(p.kappa_plus(3), Some(4.0));
    }

    #[test]
    fn antitree_beta3_sizes() {
        let (g, p) = make_antitree(3.0, 3).unwrap();
        assert_eq!(g.vertex_count(), 1 + 1 + 8 + 27);
        assert_eq!(p.sphere_measures(), &[1.0, 1.0, 8.0, 27.0]);
    }

    #[test]
    fn antitree_with_given_sizes() {
        let (_, p) = make_antitree_with_sizes(&[1, 2, 2]).unwrap();
        assert_eq!(p.kappa_plus(0), Some(2.0));
        assert_eq!(p.kappa_plus(1), Some(2.0));
        assert_eq!(p.kappa_plus(2), None);
        assert_eq!(p.kappa_minus(0), 0.0);
        assert_eq!(p.kappa_minus(1), 1.0);
        assert_eq!(p.kappa_minus(2), 2.0);
    }

    #[test]
    fn generator_respects_vertex_cap() {
        let err = make_antitree(4.0, 60).unwrap_err();
        assert!(matches!(err, ProfileError::SizeOverflow { .. }));
    }

    #[test]
    fn regular_tree_sizes() {
        let (g, p) = make_sym_tree(&Branching::Regular(3), 3).unwrap();
        assert_eq!(g.vertex_count(), 1 + 3 + 6 + 12);
        assert_eq!(p.sphere_measures(), &[1.0, 3.0, 6.0, 12.0]);
        assert_eq!(p.kappa_plus(0), Some(3.0));
        assert_eq!(p.kappa_plus(1), Some(2.0));
    }

    #[test]
    fn constant_branching_one_is_half_line() {
        let (g, p) = make_sym_tree(&Branching::Constant(1), 5).unwrap();
        assert_eq!(g.vertex_count(), 6);
        assert_eq!(g.edges().len(), 5);
        assert!(p.sphere_measures().iter().all(|&m| m == 1.0));
    }

    #[test]
    fn power_branching_kappa_and_reciprocal_sums() {
        let (_, p) = make_sym_tree(&Branching::Power(2), 3).unwrap();
        assert_eq!(p.kappa_plus(0), Some(1.0));
        assert_eq!(p.kappa_plus(1), Some(4.0));
        assert_eq!(p.kappa_plus(2), Some(9.0));
        let partial: Vec<f64> = (0..3)
            .scan(0.0, |acc, r| {
                *acc += 1.0 / p.kappa_plus(r).unwrap();
                Some(*acc)
            })
            .collect();
        assert!((partial[0] - 1.0).abs() < 1e-15);
        assert!((partial[1] - 1.25).abs() < 1e-15);
        assert!((partial[2] - (1.25 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn validate_generated_profiles() {
        for beta in [1.0, 2.0, 3.0] {
            let (_, p) = make_antitree(beta, 5).unwrap();
            let v = validate_profile(&p, 1e-12);
            assert_eq!(v.verdict, Verdict::Positive, "beta = {beta}: {:?}", v.detail);
        }
        let p = half_line_profile(10);
        assert_eq!(validate_profile(&p, 1e-12).verdict, Verdict::Positive);
    }

    #[test]
    fn validate_flags_perturbed_balance() {
        let (_, p) = make_antitree(2.0, 5).unwrap();
        let mut kappa_minus: Vec<f64> = (0..=5).map(|r| p.kappa_minus(r)).collect();
        kappa_minus[3] += 1e-3;
        let bad = SymmetricProfile::new(
            p.sphere_measures().to_vec(),
            (0..=5).map(|r| p.kappa_plus(r).unwrap()).collect(),
            kappa_minus,
            vec![0.0; 6],
            GrowthRule::Tabulated,
        )
        .unwrap();
        let v = validate_profile(&bad, 1e-9);
        assert_eq!(v.verdict, Verdict::Negative);
        assert!(v.max_violation > 1e-6);
    }

    #[test]
    fn reduced_half_line_two_by_two() {
        let p = half_line_profile(4);
        let op = reduced_operator(&p, 1, Boundary::Dirichlet).unwrap();
        assert_eq!(op.sym_diag(), &[1.0, 2.0]);
        assert_eq!(op.sym_off(), &[-1.0]);
    }

    #[test]
    fn reduced_none_boundary_annihilates_constants_in_interior() {
        let (_, p) = make_antitree(2.0, 5).unwrap();
        let op = reduced_operator(&p, 5, Boundary::None).unwrap();
        // apply J to the constant function via the symmetrized matrix:
        // J = D^{1/2}-conjugate, so act on sqrt(w) directly
        let w: Vec<f64> = op.weights().iter().map(|&x| x.sqrt()).collect();
        let n = op.dim();
        for r in 0..n {
            let mut acc = op.sym_diag()[r] * w[r];
            if r > 0 {
                acc += op.sym_off()[r - 1] * w[r - 1];
            }
            if r + 1 < n {
                acc += op.sym_off()[r] * w[r + 1];
            }
            assert!(
                (acc / w[r]).abs() < 1e-12,
                "row {r} of J applied to constants: {}",
                acc / w[r]
            );
        }
    }

    #[test]
    fn exterior_operator_windows() {
        let p = half_line_profile(10);
        let op = exterior_reduced_operator(&p, 0, 2).unwrap();
        assert_eq!(op.r_lo(), 1);
        assert_eq!(op.r_hi(), 2);
        assert_eq!(op.sym_diag(), &[2.0, 2.0]);

        let single = exterior_reduced_operator(&p, 4, 5).unwrap();
        assert_eq!(single.dim(), 1);
        assert_eq!(single.sym_diag(), &[2.0]);

        assert!(matches!(
            exterior_reduced_operator(&p, 5, 4),
            Err(ProfileError::RadiusOutOfRange { .. })
        ));
    }

    #[test]
    fn recursion_half_line_alpha_one() {
        let p = half_line_profile(6);
        let v = solve_recursion(&p, 1.0, 1.0, 5).unwrap();
        assert_eq!(&v[..4], &[1.0, 2.0, 5.0, 13.0]);
        // residual of (J + 1) v at interior radii
        for r in 0..5usize {
            let prev = if r == 0 { 0.0 } else { v[r - 1] };
            let kp = p.kappa_plus(r).unwrap();
            let km = p.kappa_minus(r);
            let res = kp * (v[r] - v[r + 1]) + km * (v[r] - prev) + (p.q(r) + 1.0) * v[r];
            assert!(res.abs() < 1e-12, "residual {res} at radius {r}");
        }
    }

    #[test]
    fn recursion_monotone_for_positive_alpha() {
        let (_, p) = make_antitree(3.0, 8).unwrap();
        let v = solve_recursion(&p, 0.7, 0.5, 8).unwrap();
        for r in 0..8 {
            assert!(v[r + 1] > v[r]);
        }
    }

    #[test]
    fn recursion_constants_for_alpha_zero() {
        let p = half_line_profile(12);
        let v = solve_recursion(&p, 0.0, 1.0, 12).unwrap();
        for val in v {
            assert_eq!(val, 1.0);
        }
    }

    #[test]
    fn ball_stats_half_line() {
        let p = half_line_profile(5);
        let s = ball_stats(&p, VolumeWeight::One, 5).unwrap();
        assert_eq!(s.volume, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert!(s.boundary.iter().all(|&b| b == 1.0));
        assert_eq!(s.partial_sums[2], 6.0);
    }

    #[test]
    fn ball_stats_antitree_asymptotics() {
        let p = antitree_profile(3.0, 60);
        let s = ball_stats(&p, VolumeWeight::One, 50).unwrap();
        // V(50) = 1 + (50 * 51 / 2)^2 and dB(50) = 50^3 * 51^3 exactly
        let v = 1.0 + (50.0f64 * 51.0 / 2.0).powi(2);
        assert_eq!(s.volume[50], v);
        assert_eq!(s.boundary[50], 50.0f64.powi(3) * 51.0f64.powi(3));
        let asymptote = 1.0 / (4.0 * 50.0f64 * 50.0);
        assert!((s.ratio[50] / asymptote - 1.0).abs() < 0.05);
    }

    #[test]
    fn q_plus_one_weight_reduces_to_one_without_potential() {
        let (_, p) = make_antitree(2.0, 6).unwrap();
        let a = ball_stats(&p, VolumeWeight::One, 6).unwrap();
        let b = ball_stats(&p, VolumeWeight::QPlusOne, 6).unwrap();
        assert_eq!(a.volume, b.volume);
    }

    #[test]
    fn criterion_antitree_thresholds() {
        for (beta, expect_converges) in [(1.0, false), (2.0, false), (3.0, true), (4.0, true)] {
            let p = antitree_profile(beta, 80);
            let out = criterion(&p, CriterionKind::Stochastic);
            match out {
                CriterionOutcome::Converges { sum_bound } => {
                    assert!(expect_converges, "beta = {beta} must diverge");
                    assert!(sum_bound.is_finite() && sum_bound > 0.0);
                }
                CriterionOutcome::Diverges => assert!(!expect_converges, "beta = {beta}"),
                CriterionOutcome::Undetermined { .. } => panic!("rule present for beta = {beta}"),
            }
        }
    }

    #[test]
    fn criterion_tree_power_two_converges() {
        let p = sym_tree_profile(&Branching::Power(2), 40).unwrap();
        assert!(matches!(
            criterion(&p, CriterionKind::Stochastic),
            CriterionOutcome::Converges { .. }
        ));
        let half = half_line_profile(40);
        assert!(matches!(
            criterion(&half, CriterionKind::Spectrum),
            CriterionOutcome::Diverges
        ));
    }

    #[test]
    fn criterion_tabulated_is_undetermined() {
        let (_, p) = make_antitree_with_sizes(&[1, 2, 4, 8, 16, 32, 64, 128]).unwrap();
        match criterion(&p, CriterionKind::Spectrum) {
            CriterionOutcome::Undetermined { partial_sums, .. } => {
                assert!(!partial_sums.is_empty());
            }
            other => panic!("expected Undetermined, got {}", other.label()),
        }
    }

    #[test]
    fn converging_sum_bound_dominates_partials() {
        let p = antitree_profile(3.0, 300);
        let CriterionOutcome::Converges { sum_bound } = criterion(&p, CriterionKind::Spectrum)
        else {
            panic!("beta = 3 converges");
        };
        let stats = ball_stats(&p, VolumeWeight::One, p.boundary_radius()).unwrap();
        assert!(sum_bound >= *stats.partial_sums.last().unwrap());
        // ... and is not wildly loose
        assert!(sum_bound < stats.partial_sums.last().unwrap() + 0.1);
    }
}
