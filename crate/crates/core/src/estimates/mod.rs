//! Both sides of the disturbance, Virial, interaction and scattering
//! inequalities, evaluated on recorded trajectories.

mod disturbance;
mod gn;
mod interaction;
mod scattering;
mod virial;

pub use disturbance::{
    check_disturbance_boosted, check_disturbance_linear, check_disturbance_lp, check_disturbance_nls, cone_mass,
    ConeReport, DisturbanceReport, EstimateTag, LpRecord, Mode, MARGIN_TOL, SUPPORT_TOL,
};
pub use gn::{calibrate_gn, gn_exponent, gn_gaussian, gn_quotient};
pub use interaction::{dual_exponent, interaction_at, interaction_field, interaction_norm, trapezoid_lp, InteractionReport};
pub use scattering::{scattering_localization, sigma_norm, ScatteringReport, LENS_TIME};
pub use virial::{virial_track, VirialReport};

use crate::error::{Error, Result};
use crate::spectral::{region_distance, Region};

/// Positive distance between two regions.
fn separation(a: &Region, b: &Region) -> Result<f64> {
    let d = region_distance(a, b)?;
    if d <= 0.0 {
        return Err(Error::TouchingRegions(d));
    }
    Ok(d)
}
