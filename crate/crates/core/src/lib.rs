//! Heat kernels, spectral bounds and stochastic completeness for locally
//! finite weighted graphs.
//!
//! A weighted graph `(V, b, c, m)` carries symmetric edge weights `b`, a
//! killing potential `c >= 0` and a vertex measure `m > 0`. Around a root it
//! decomposes into spheres; when the inner and outer curvatures and the
//! normalized potential are constant on every sphere the graph is *weakly
//! spherically symmetric*, its heat kernel is a function of the radius, and
//! everything reduces to a tridiagonal operator on radii. This crate
//! implements that reduction and uses such graphs as comparison spaces:
//!
//! - [`graph`]: the explicit graph model, layering, curvatures, the formal
//!   Laplacian and the symmetry detector;
//! - [`profile`]: per-radius profiles, antitree and tree generators, the
//!   reduced operator, the radial recursion and volume criteria;
//! - [`semigroup`]: Dirichlet restrictions, spectral decompositions, heat
//!   kernels, the mass function and exhaustion limits;
//! - [`spectral`]: bottom-of-spectrum estimates, volume lower bounds with
//!   certificates, discreteness probes and curvature comparison;
//! - [`stochastic`]: completeness classification, mass deficits and the
//!   completeness transfer;
//! - [`io`]: the `.wg` graph and `.wsp` profile file formats.
//!
//! The binary `wsgraph` exposes the analyses as subcommands; see the README.

pub mod fixtures;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod profile;
pub mod semigroup;
pub mod spectral;
pub mod stochastic;
pub mod verdict;

pub use graph::{Layering, VertexId, WeightedGraph};
pub use profile::{Boundary, GrowthRule, ReducedOperator, SymmetricProfile};
pub use semigroup::{DirichletBall, SpectralDecomposition};
pub use verdict::Verdict;
