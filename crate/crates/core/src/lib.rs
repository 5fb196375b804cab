//! Generalized (Sharma-Mittal) entropy powers and the diffusion flows they
//! are concave along.
//!
//! * [`functionals`]: Renyi, Tsallis and Sharma-Mittal entropies, entropy
//!   powers, the generalized Fisher information `I_p` and the second-order
//!   functional `J_p` of densities on uniform grids.
//! * [`flow`]: conservative solvers for the heat, porous-medium and nonlocal
//!   Sharma-Mittal flows, plus Gaussian and Barenblatt references.
//! * [`lab`]: checks of the entropy-production identities, concavity of
//!   `N_{p,q}` along the flow, the `J_p M_p >= 2(1/d + p - 1) I_p^2`
//!   inequality and dilation invariance.
//! * [`epi`]: entropy power inequalities for sums of independent variables
//!   via grid convolution.

pub mod epi;
pub mod error;
pub mod flow;
pub mod functionals;
pub mod grid;
pub mod lab;
pub mod orders;
pub mod qalgebra;
pub mod timediff;

pub use error::{Error, Result};
pub use functionals::FunctionalSnapshot;
pub use grid::{Geometry, GridDensity};
pub use lab::{CheckId, CheckReport};
pub use orders::{Orders, Regime, LIMIT_EPS};
