//! Multi-run studies: concatenation sweeps, the decay-membership proxy and
//! spread multi-bump data.

mod concat;
mod gd;
mod strichartz;

pub use concat::{
    concat_run, coupled_concat_run, coupled_d_sweep, d_sweep, scale_perturbation, snap_distance, ConcatReport,
    ConcatRow, ConcatScenario, CoupledScenario, NOT_REACHED,
};
pub use gd::{build_spread_data, gd_proxy, GdProxyResult, GdVerdict, SpreadRecord, OVERLAP_TOL};
pub use strichartz::{discrete_strichartz_norm, s0_parts, s1_proxy, strichartz_of_fields, S0Parts, StrichartzOrder};
