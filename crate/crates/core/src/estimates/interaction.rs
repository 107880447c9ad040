use std::io::Write;

use num_complex::Complex64;

use crate::dynamics::{NlsParams, Trajectory};
use crate::error::{Error, Result};
use crate::report::{num, opt, write_rows, CsvReport};
use crate::spectral::{lp_unchecked, pow_abs, Field, Region};

/// `N(u,v) = |u+v|^σ(u+v) − |u|^σu − |v|^σv`.
pub fn interaction_field(u: &Field, v: &Field, sigma: f64) -> Result<Field> {
    u.check_same_grid(v)?;
    let power = |z: Complex64| z * pow_abs(z.norm_sqr(), sigma);
    let values = u.values().iter().zip(v.values()).map(|(&a, &b)| power(a + b) - power(a) - power(b)).collect();
    Field::from_values(u.grid(), values)
}

/// `‖N(u,v)‖_{L^r}` globally and on `B^+ = {x₁ > 0}`, `B^− = {x₁ < 0}`.
pub fn interaction_at(u: &Field, v: &Field, sigma: f64, r: f64) -> Result<[f64; 3]> {
    let n = interaction_field(u, v, sigma)?;
    let g = n.grid();
    Ok([
        lp_unchecked(g, n.values(), r, None),
        lp_unchecked(g, n.values(), r, Some(&Region::above(0, 0.0))),
        lp_unchecked(g, n.values(), r, Some(&Region::below(0, 0.0))),
    ])
}

/// Default spatial exponent `(σ+2)/(σ+1)`, also the time exponent `γ'`.
pub fn dual_exponent(sigma: f64) -> f64 {
    (sigma + 2.0) / (sigma + 1.0)
}

#[derive(Clone, Debug)]
pub struct InteractionReport {
    /// Separation label set by the caller.
    pub separation: Option<f64>,
    pub r: f64,
    pub time_exponent: f64,
    pub times: Vec<f64>,
    pub global: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// `(∫ ‖N‖^{γ'} dt)^{1/γ'}` by the composite trapezoid; absent for a single time.
    pub aggregated: Option<f64>,
    pub aggregated_plus: Option<f64>,
    pub aggregated_minus: Option<f64>,
}

impl InteractionReport {
    pub fn with_separation(mut self, d: f64) -> Self {
        self.separation = Some(d);
        self
    }

    /// Restricted pieces never exceed the global norm.
    pub fn pieces_bounded(&self) -> bool {
        (0..self.times.len()).all(|i| self.plus[i].max(self.minus[i]) <= self.global[i])
    }
}

impl CsvReport for InteractionReport {
    fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (0..self.times.len()).map(|i| {
            vec![
                opt(self.separation),
                num(self.times[i]),
                num(self.global[i]),
                num(self.plus[i]),
                num(self.minus[i]),
                opt(self.aggregated),
                opt(self.aggregated_plus),
                opt(self.aggregated_minus),
            ]
        });
        write_rows(
            w,
            &["separation", "time", "global", "plus", "minus", "aggregated", "aggregated_plus", "aggregated_minus"],
            rows,
        )
    }
}

/// Composite trapezoid of `f^p`, returned as `(∫ f^p)^{1/p}`.
pub fn trapezoid_lp(times: &[f64], values: &[f64], p: f64) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let s: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0].powf(p) + f[1].powf(p)))
        .sum();
    Some(s.powf(1.0 / p))
}

/// Interaction norms on matching snapshots of two runs, optionally within a
/// time window. `r` defaults to `(σ+2)/(σ+1)`.
pub fn interaction_norm(
    u: &Trajectory,
    v: &Trajectory,
    params: &NlsParams,
    r: Option<f64>,
    window: Option<(f64, f64)>,
) -> Result<InteractionReport> {
    let r = r.unwrap_or_else(|| dual_exponent(params.sigma));
    if !(r >= 1.0) {
        return Err(Error::InvalidParameter(format!("spatial exponent must be >= 1, got {r}")));
    }
    if u.times.len() != v.times.len() || u.times.iter().zip(&v.times).any(|(a, b)| (a - b).abs() > 1e-9 * u.dt.max(v.dt)) {
        return Err(Error::Misaligned(format!(
            "snapshot times differ ({} vs {} snapshots)",
            u.times.len(),
            v.times.len()
        )));
    }
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let picked: Vec<usize> = (0..u.times.len()).filter(|&i| u.times[i] >= lo && u.times[i] <= hi).collect();
    if picked.is_empty() {
        return Err(Error::EmptyWindow(lo, hi));
    }
    let mut report = InteractionReport {
        separation: None,
        r,
        time_exponent: dual_exponent(params.sigma),
        times: Vec::new(),
        global: Vec::new(),
        plus: Vec::new(),
        minus: Vec::new(),
        aggregated: None,
        aggregated_plus: None,
        aggregated_minus: None,
    };
    for i in picked {
        let [g, p, m] = interaction_at(&u.snapshots[i], &v.snapshots[i], params.sigma, r)?;
        report.times.push(u.times[i]);
        report.global.push(g);
        report.plus.push(p);
        report.minus.push(m);
    }
    let q = report.time_exponent;
    report.aggregated = trapezoid_lp(&report.times, &report.global, q);
    report.aggregated_plus = trapezoid_lp(&report.times, &report.plus, q);
    report.aggregated_minus = trapezoid_lp(&report.times, &report.minus, q);
    Ok(report)
}
