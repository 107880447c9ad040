//! Split-step propagators, trajectory recording and blow-up detection.

mod boost;
mod energy;
mod params;
mod stepper;
mod trajectory;

pub use boost::{boost_gradient, boost_solution, galilean_boost, BoostGradient};
pub use energy::{coupled_energy, energy, harmonic_energy};
pub(crate) use energy::variance_integral;
#[allow(unused_imports)]
pub(crate) use energy::power_integral;
pub use params::{CoupledParams, Criticality, NlsParams};
pub use stepper::{step_harmonic_nls, step_linear, step_nls, Flow, Propagator};
pub use trajectory::{evolve, evolve_coupled, evolve_harmonic, SolveConfig, Termination, Trajectory};
