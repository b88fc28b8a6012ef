//! Collective decision-making dynamics on order-2 hypernetworks.
//!
//! Agents hold scalar opinions `x_i` and interact through weighted pairwise
//! edges (`A2`) and three-agent hyperedges (the slices `B_i` of `A3`):
//!
//! ```text
//! dx_i/dt = -delta_i x_i + pi * sum_j a_ij psi(x_j) + pi * psi(x)^T B_i psi(x)
//! ```
//!
//! The crate provides the network substrate ([`hypergraph`]), the saturated
//! transmission law ([`nonlinearity`]), simulation and Lyapunov diagnostics
//! ([`dynamics`]), spectral thresholds ([`spectra`]), equilibrium search and
//! normal-form coefficients ([`equilibria`]) and parameter sweeps with branch
//! threading ([`bifurcation`]).

pub mod bifurcation;
pub mod dynamics;
pub mod equilibria;
mod error;
pub mod hypergraph;
pub mod nonlinearity;
pub mod spectra;

pub use bifurcation::{
    basin_probe, bistability_interval, sweep, Attractor, BasinReport, BifurcationBranch,
    BistabilityInterval, SweepOptions, SweepResult,
};
pub use dynamics::{
    integrate, lyapunov_v, vector_field, IntegrateOptions, SystemInstance, Trajectory,
};
pub use equilibria::{
    consensus_roots, find_all, newton_find, normal_form_coeffs, pi1_star, Classification,
    Equilibrium, NormalForm, ScalarReduced, SeedSpec,
};
pub use error::{Error, Result};
pub use hypergraph::{Hypergraph2, PairwiseMatrix, TwoInteractionTensor};
pub use nonlinearity::SigmoidFamily;
pub use spectra::{thresholds, Spectrum, Thresholds};
