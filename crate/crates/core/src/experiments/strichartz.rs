use serde::{Deserialize, Serialize};

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::estimates::trapezoid_lp;
use crate::spectral::{gradient, l2_norm, lp_unchecked, norm_hs, Field};

/// Order of the discrete Strichartz proxy. Fractional orders interpolate
/// log-convexly between the order-0 and order-1 proxies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "s")]
pub enum StrichartzOrder {
    Zero,
    One,
    Fractional(f64),
}

impl StrichartzOrder {
    pub fn from_order(s: f64) -> Result<Self> {
        match s {
            s if s == 0.0 => Ok(StrichartzOrder::Zero),
            s if s == 1.0 => Ok(StrichartzOrder::One),
            s if s > 0.0 && s < 1.0 => Ok(StrichartzOrder::Fractional(s)),
            _ => Err(Error::InvalidParameter(format!("Strichartz order must lie in [0, 1], got {s}"))),
        }
    }
}

/// Pieces of the order-0 proxy `max_t ‖u‖₂ + (∫ ‖u‖_{σ+2}^{σ+2} dt)^{1/(σ+2)}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct S0Parts {
    pub sup_l2: f64,
    pub spacetime: f64,
}

impl S0Parts {
    pub fn total(&self) -> f64 {
        self.sup_l2 + self.spacetime
    }
}

fn window_indices(times: &[f64], window: Option<(f64, f64)>) -> Result<Vec<usize>> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let slack = 1e-9 * (hi - lo).abs().min(1.0);
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= lo - slack && times[i] <= hi + slack).collect();
    if idx.is_empty() {
        return Err(Error::EmptyWindow(lo, hi));
    }
    Ok(idx)
}

pub fn s0_parts(times: &[f64], fields: &[Field], sigma: f64, window: Option<(f64, f64)>) -> Result<S0Parts> {
    let idx = window_indices(times, window)?;
    let q = sigma + 2.0;
    let sup_l2 = idx.iter().map(|&i| l2_norm(&fields[i])).fold(0.0, f64::max);
    let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    let lq: Vec<f64> = idx.iter().map(|&i| lp_unchecked(fields[i].grid(), fields[i].values(), q, None)).collect();
    Ok(S0Parts {
        sup_l2,
        spacetime: trapezoid_lp(&ts, &lq, q).unwrap_or(0.0),
    })
}

/// Order-1 proxy `max_t ‖u‖_{H¹} + (∫ (‖u‖_{σ+2} + ‖∇u‖_{σ+2})^q dt)^{1/q}`,
/// `q = 4(σ+2)/(σd)`.
pub fn s1_proxy(times: &[f64], fields: &[Field], sigma: f64, window: Option<(f64, f64)>) -> Result<f64> {
    let idx = window_indices(times, window)?;
    let p = sigma + 2.0;
    let dim = fields[idx[0]].grid().dim() as f64;
    let q = 4.0 * p / (sigma * dim);
    let mut sup_h1: f64 = 0.0;
    let mut w1p = Vec::with_capacity(idx.len());
    for &i in &idx {
        let u = &fields[i];
        sup_h1 = sup_h1.max(norm_hs(u, 1.0)?);
        let grads = gradient(u);
        let mag: Vec<_> = (0..u.grid().len())
            .map(|j| num_complex::Complex64::new(grads.iter().map(|g| g.values()[j].norm_sqr()).sum::<f64>().sqrt(), 0.0))
            .collect();
        w1p.push(lp_unchecked(u.grid(), u.values(), p, None) + lp_unchecked(u.grid(), &mag, p, None));
    }
    let ts: Vec<f64> = idx.iter().map(|&i| times[i]).collect();
    Ok(sup_h1 + trapezoid_lp(&ts, &w1p, q).unwrap_or(0.0))
}

/// Strichartz proxy of a sequence of fields at the given times.
pub fn strichartz_of_fields(
    times: &[f64],
    fields: &[Field],
    sigma: f64,
    order: StrichartzOrder,
    window: Option<(f64, f64)>,
) -> Result<f64> {
    if times.len() != fields.len() {
        return Err(Error::Misaligned(format!("{} times for {} fields", times.len(), fields.len())));
    }
    match order {
        StrichartzOrder::Zero => Ok(s0_parts(times, fields, sigma, window)?.total()),
        StrichartzOrder::One => s1_proxy(times, fields, sigma, window),
        StrichartzOrder::Fractional(s) => {
            let s0 = s0_parts(times, fields, sigma, window)?.total();
            let s1 = s1_proxy(times, fields, sigma, window)?;
            Ok(s0.powf(1.0 - s) * s1.powf(s))
        }
    }
}

/// Strichartz proxy of a recorded run, with `σ` from the run's parameters.
pub fn discrete_strichartz_norm(traj: &Trajectory, order: StrichartzOrder, window: Option<(f64, f64)>) -> Result<f64> {
    strichartz_of_fields(&traj.times, &traj.snapshots, traj.params.sigma, order, window)
}
