//! Radial maps from the flat synthetic plane onto a surface.
//!
//! Two radial ODEs are solved here. The length-preserving one gives the chart radius `r̂`
//! reached after Riemannian distance `r′` along a radial geodesic; the volume-preserving one
//! gives the Riemannian radius `r′(r)` that makes the disk of Euclidean radius `r` and its
//! image carry the same area, `dr′/dr = r / (r′ g(r′))`. The derivative `dr′/dr` is the slip.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geodesic::{exp_map, NormalFrame, SampledCurve};
use crate::metric::{ChartPoint, MetricField, RadialFn, TangentTuple};
use crate::numerics::mat2::{self, Mat2, Vec2};
use crate::numerics::{quad, rk4, MonotoneCubic};
use crate::table::Table;

/// Slip beyond which the radial map counts as degenerate.
pub const BLOW_UP_SLIP: f64 = 1e8;

const BOUNDARY_PANELS: usize = 64;
const MASS_PANELS: usize = 256;
/// Sample count when scanning a volume element for its first zero.
const ZERO_SCAN: usize = 1000;
/// Step of the central differences along synthetic curves.
const CURVE_FD_STEP: f64 = 1e-6;

/// Riemannian length of the chart ray from the origin to chart radius `r_hat_max`,
/// `∫₀^R √g_rr(r̂) dr̂`.
///
/// Evaluated with `r̂ = R(1 − w²)`, which turns an inverse square-root blow-up of `g_rr` at
/// the rim into a smooth integrand.
pub fn radial_boundary_length(g_rr: &dyn Fn(f64) -> f64, r_hat_max: f64) -> f64 {
    if !r_hat_max.is_finite() {
        return f64::INFINITY;
    }
    let big_r = r_hat_max;
    quad::gauss_legendre(
        |w| {
            let r = big_r * (1.0 - w * w);
            g_rr(r).sqrt() * 2.0 * big_r * w
        },
        0.0,
        1.0,
        BOUNDARY_PANELS,
    )
}

/// Chart radius as a function of Riemannian radius along radial geodesics.
#[derive(Debug, Clone)]
pub struct LengthProfile {
    map: MonotoneCubic,
    boundary: f64,
    r_hat_max: f64,
}

impl LengthProfile {
    /// Riemannian distance from the origin to the chart rim (infinite for unbounded charts).
    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    /// Largest tabulated `r′`.
    pub fn r_prime_end(&self) -> f64 {
        self.map.x_range().1
    }

    pub fn grid(&self) -> &[f64] {
        self.map.xs()
    }

    /// `r̂(r′)`.
    pub fn r_hat(&self, r_prime: f64) -> Result<f64> {
        if r_prime > self.r_prime_end() && self.r_prime_end() >= self.boundary {
            return Err(Error::Singularity { r_prime: self.boundary });
        }
        self.map.value(r_prime).ok_or(Error::Range { value: r_prime, max: self.r_prime_end() })
    }

    /// `r′(r̂)`.
    pub fn r_prime(&self, r_hat: f64) -> Result<f64> {
        let top = self.map.ys()[self.map.ys().len() - 1];
        self.map.inverse(r_hat).ok_or(Error::Range { value: r_hat, max: top.min(self.r_hat_max) })
    }

    /// Columns `r_prime, r_hat`.
    pub fn table(&self, rows: &[f64]) -> Result<Table> {
        let mut t = Table::new(["r_prime", "r_hat"]);
        for &r in rows {
            t.push(vec![r, self.r_hat(r)?]);
        }
        Ok(t)
    }
}

/// Integrates `dr̂/dr′ = 1/√g_rr(r̂)`, `r̂(0) = 0`, over `[0, min(span, boundary)]` in
/// `n_steps` RK4 steps.
///
/// When the span reaches the chart rim the profile stops there and its last node is the rim
/// itself; asking for larger `r′` then reports the rim distance as a singularity.
pub fn solve_length_preserving(
    g_rr: &dyn Fn(f64) -> f64,
    r_hat_max: f64,
    span: f64,
    n_steps: usize,
) -> Result<LengthProfile> {
    if n_steps < 2 {
        return Err(Error::Step(n_steps));
    }
    let boundary = radial_boundary_length(g_rr, r_hat_max);
    let end = span.min(boundary);
    if !(end > 0.0 && end.is_finite()) {
        return Err(Error::InvalidArgument(format!("radial span must be positive and finite, got {span}")));
    }
    let rate = |r_hat: f64| -> Result<f64> {
        if r_hat > r_hat_max {
            return Ok(0.0);
        }
        let g = g_rr(r_hat.max(0.0));
        if g.is_infinite() || (r_hat == r_hat_max && !(g > 0.0)) {
            return Ok(0.0);
        }
        if !(g > 0.0) {
            return Err(Error::SingularMetric { x: r_hat, y: 0.0 });
        }
        Ok(1.0 / g.sqrt())
    };
    let mut f = |_t: f64, y: &[f64; 1]| rate(y[0]).map(|d| [d]);
    let h = end / n_steps as f64;
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut ys = Vec::with_capacity(n_steps + 1);
    let mut y = [0.0];
    xs.push(0.0);
    ys.push(0.0);
    for k in 0..n_steps {
        y = rk4::step(&mut f, k as f64 * h, &y, h)?;
        y[0] = y[0].min(r_hat_max);
        xs.push(if k + 1 == n_steps { end } else { (k + 1) as f64 * h });
        ys.push(y[0]);
    }
    if end >= boundary {
        *ys.last_mut().expect("nodes") = r_hat_max;
    }
    let ds = ys.iter().map(|r| rate(*r).unwrap_or(f64::NAN)).collect();
    Ok(LengthProfile { map: MonotoneCubic::with_slopes(xs, ys, ds), boundary, r_hat_max })
}

/// Length-preserving profile of a rotationally symmetric metric.
pub fn chart_length_profile(m: &MetricField, span: f64, n_steps: usize) -> Result<LengthProfile> {
    let rc = m.radial().ok_or_else(|| Error::NotRadial(m.name().to_string()))?;
    solve_length_preserving(&|r| rc.g_rr(r), rc.radius(), span, n_steps)
}

/// Tabulated solution of the volume-preserving radial problem.
#[derive(Clone)]
pub struct RadialProfile {
    origin: ChartPoint,
    r_prime: MonotoneCubic,
    g: RadialFn,
    chart: Option<LengthProfile>,
    r_max: f64,
    r_prime_end: f64,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile")
            .field("origin", &self.origin)
            .field("r_max", &self.r_max)
            .field("r_end", &self.r_end())
            .field("nodes", &self.r_prime.xs().len())
            .finish()
    }
}

impl RadialProfile {
    pub fn origin(&self) -> ChartPoint {
        self.origin
    }

    /// Synthetic radius of the first blow-up or cut radius (infinite when none exists).
    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Riemannian radius at `r_max`.
    pub fn r_prime_max(&self) -> f64 {
        self.r_prime_end
    }

    /// Largest tabulated synthetic radius.
    pub fn r_end(&self) -> f64 {
        self.r_prime.x_range().1
    }

    pub fn grid_r(&self) -> &[f64] {
        self.r_prime.xs()
    }

    pub fn chart(&self) -> Option<&LengthProfile> {
        self.chart.as_ref()
    }

    /// Adds the chart-radius map so that `r̂(r)` becomes available.
    pub fn with_chart(mut self, chart: LengthProfile) -> Self {
        self.chart = Some(chart);
        self
    }

    /// Volume element of normal coordinates at Riemannian radius `r′`.
    pub fn g(&self, r_prime: f64) -> f64 {
        (self.g)(r_prime)
    }

    /// `r′(r)`.
    pub fn r_prime(&self, r: f64) -> Result<f64> {
        self.r_prime.value(r).ok_or(Error::Range { value: r, max: self.r_end() })
    }

    /// `r̂(r′(r))`; needs an attached chart.
    pub fn r_hat(&self, r: f64) -> Result<f64> {
        let chart = self.chart.as_ref().ok_or_else(|| Error::NotRadial("profile has no chart".into()))?;
        chart.r_hat(self.r_prime(r)?)
    }

    /// Differential slip `dr′/dr = r / (r′ g(r′))` at `0 ≤ r < r_max`.
    pub fn slip(&self, r: f64) -> Result<f64> {
        if r >= self.r_max || r < 0.0 {
            return Err(Error::Range { value: r, max: self.r_max });
        }
        let rp = self.r_prime(r)?;
        if r == 0.0 || rp == 0.0 {
            return Ok(1.0);
        }
        let s = r / (rp * self.g(rp));
        if !(s.is_finite() && s < BLOW_UP_SLIP) {
            return Err(Error::Range { value: r, max: self.r_max });
        }
        Ok(s)
    }

    /// Synthetic radius with chart radius `r_hat`.
    pub fn inverse(&self, r_hat: f64) -> Result<f64> {
        let chart = self.chart.as_ref().ok_or_else(|| Error::NotRadial("profile has no chart".into()))?;
        let rp = chart.r_prime(r_hat)?;
        self.r_prime.inverse(rp).ok_or(Error::Range { value: r_hat, max: chart.r_hat(self.r_prime_end)? })
    }

    /// Columns `r, r_prime, r_hat, slip, g`; `r_hat` is NaN without a chart and `slip` is
    /// infinite at a degenerate rim.
    pub fn table(&self, rows: &[f64]) -> Result<Table> {
        let mut t = Table::new(["r", "r_prime", "r_hat", "slip", "g"]);
        for &r in rows {
            let rp = self.r_prime(r)?;
            let r_hat = match &self.chart {
                Some(c) => c.r_hat(rp)?,
                None => f64::NAN,
            };
            let slip = if r >= self.r_max { self.r_max / (rp * self.g(rp)) } else { self.slip(r)? };
            let slip = if slip.is_finite() && slip < BLOW_UP_SLIP { slip } else { f64::INFINITY };
            t.push(vec![r, rp, r_hat, slip, self.g(rp)]);
        }
        Ok(t)
    }
}

/// `∫₀^R s g(s) ds`, the area of the geodesic disk of radius `R` divided by 2π.
fn radial_mass(g: &dyn Fn(f64) -> f64, big_r: f64) -> f64 {
    quad::gauss_legendre(|s| s * g(s), 0.0, big_r, MASS_PANELS)
}

/// First zero of `g` on `(0, end]`, or `end` if `g` stays positive.
fn positive_extent(g: &dyn Fn(f64) -> f64, end: f64) -> f64 {
    let mut prev = 0.0;
    for k in 1..=ZERO_SCAN {
        let s = end * k as f64 / ZERO_SCAN as f64;
        if !(g(s) > 0.0) {
            let (mut lo, mut hi) = (prev, s);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return hi;
        }
        prev = s;
    }
    end
}

/// Solves `dr′/dr = r / (r′ g(r′))`, `r′(0) = 0`, for `r ∈ [0, min(r_span, r_max)]` on a
/// uniform grid of `n_steps` RK4 steps.
///
/// `r_prime_end` is where the volume element stops being defined (infinite if nowhere); a
/// zero of `g` before it ends the profile early. `r_max` follows from equal areas,
/// `r_max² = 2 ∫₀^{R′} s g(s) ds`. The ODE is integrated in `u = r′²`, where it reads
/// `du/dr = 2r / g(√u)` and has no singularity at the origin.
pub fn solve_volume_preserving(
    g: RadialFn,
    r_prime_end: f64,
    r_span: f64,
    n_steps: usize,
) -> Result<RadialProfile> {
    let gf = |s: f64| if s <= 0.0 { 1.0 } else { g(s) };
    let (r_max, big_r) = if r_prime_end.is_finite() {
        let big_r = positive_extent(&gf, r_prime_end);
        ((2.0 * radial_mass(&gf, big_r)).sqrt(), big_r)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    volume_profile(g, big_r, r_max, r_span, n_steps)
}

/// RK4 part of [`solve_volume_preserving`] once the extent `big_r` of the volume element and
/// the matching synthetic radius `r_max` are known.
fn volume_profile(g: RadialFn, big_r: f64, r_max: f64, r_span: f64, n_steps: usize) -> Result<RadialProfile> {
    if n_steps < 2 {
        return Err(Error::Step(n_steps));
    }
    if !(r_span > 0.0) {
        return Err(Error::InvalidArgument(format!("radial span must be positive, got {r_span}")));
    }
    let gf = |s: f64| if s <= 0.0 { 1.0 } else { g(s) };
    let end = r_span.min(r_max);
    if !end.is_finite() {
        return Err(Error::InvalidArgument("radial span must be finite".into()));
    }
    let u_cap = big_r * big_r;
    let mut f = |r: f64, y: &[f64; 1]| -> Result<[f64; 1]> {
        let u = y[0].clamp(0.0, u_cap);
        let gv = gf(u.sqrt());
        if !(gv > 0.0) {
            return Ok([2.0 * r * BLOW_UP_SLIP]);
        }
        Ok([2.0 * r / gv])
    };
    let h = end / n_steps as f64;
    let mut xs = Vec::with_capacity(n_steps + 1);
    let mut us = Vec::with_capacity(n_steps + 1);
    let mut y = [0.0];
    xs.push(0.0);
    us.push(0.0);
    for k in 0..n_steps {
        y = rk4::step(&mut f, k as f64 * h, &y, h)?;
        y[0] = y[0].min(u_cap);
        xs.push(if k + 1 == n_steps { end } else { (k + 1) as f64 * h });
        us.push(y[0]);
    }
    let mut ys: Vec<f64> = us.iter().map(|u| u.sqrt()).collect();
    if end >= r_max {
        *ys.last_mut().expect("nodes") = big_r;
    }
    let ds = xs
        .iter()
        .zip(&ys)
        .map(|(r, rp)| if *r == 0.0 { 1.0 } else { r / (rp * gf(*rp)) })
        .collect();
    let r_prime = MonotoneCubic::with_slopes(xs, ys, ds);
    let r_prime_at_end = if end >= r_max { big_r } else { r_prime.value(end).expect("end node") };
    Ok(RadialProfile {
        origin: ChartPoint::ORIGIN,
        r_prime,
        g: Arc::new(move |s| if s <= 0.0 { 1.0 } else { g(s) }),
        chart: None,
        r_max,
        r_prime_end: r_prime_at_end,
    })
}

/// Volume-preserving profile of a rotationally symmetric metric about its chart origin.
///
/// The volume element comes from the chart, `g(r′) = √g_φφ(r̂(r′)) / r′`. For charts without
/// a rim the length profile is extended until it covers the synthetic radius `r_span`.
pub fn chart_distortion_profile(m: &MetricField, r_span: f64, n_steps: usize) -> Result<RadialProfile> {
    let rc = m.radial().ok_or_else(|| Error::NotRadial(m.name().to_string()))?.clone();
    let boundary = radial_boundary_length(&|r| rc.g_rr(r), rc.radius());
    let mut span = if boundary.is_finite() { boundary } else { r_span.max(1.0) };
    let mut chart = solve_length_preserving(&|r| rc.g_rr(r), rc.radius(), span, n_steps)?;
    if !boundary.is_finite() {
        for _ in 0..32 {
            let c = chart.clone();
            let rc2 = rc.clone();
            let mass = radial_mass(&|s| if s == 0.0 { 1.0 } else { rc2.g_phiphi(c.r_hat(s).unwrap_or(f64::NAN)).sqrt() / s }, span);
            if 2.0 * mass >= r_span * r_span {
                break;
            }
            span *= 2.0;
            chart = solve_length_preserving(&|r| rc.g_rr(r), rc.radius(), span, n_steps)?;
        }
    }
    let c = chart.clone();
    let end = chart.r_prime_end();
    let rc_g = rc.clone();
    let g: RadialFn = Arc::new(move |s: f64| {
        if s < 1e-12 {
            return 1.0;
        }
        match c.r_hat(s.min(end)) {
            Ok(r_hat) => rc_g.g_phiphi(r_hat).sqrt() / s,
            Err(_) => f64::NAN,
        }
    });
    let mut profile = if boundary.is_finite() {
        // area of the chart disk, integrated in r̂ where both factors are known exactly
        let big_r = rc.radius();
        let mass = quad::gauss_legendre(
            |w| {
                let r = big_r * (1.0 - w * w);
                (rc.g_rr(r) * rc.g_phiphi(r)).sqrt() * 2.0 * big_r * w
            },
            0.0,
            1.0,
            BOUNDARY_PANELS,
        );
        volume_profile(g, boundary, (2.0 * mass).sqrt(), r_span, n_steps)?
    } else {
        // the chart is only solved on [0, span], which covers r_span
        volume_profile(g, span, f64::INFINITY, r_span, n_steps)?
    };
    profile.chart = Some(chart);
    Ok(profile)
}

/// Volume-preserving profile along one direction of a general metric.
///
/// The volume element of normal coordinates is sampled along the radial geodesic in
/// `direction` and interpolated; the radial problem is then solved as if it held in every
/// direction.
pub fn direction_profile(
    m: &MetricField,
    frame: &NormalFrame,
    direction: Vec2,
    r_prime_end: f64,
    samples: usize,
    r_span: f64,
    n_steps: usize,
    steps_per_unit: usize,
) -> Result<RadialProfile> {
    if samples < 2 {
        return Err(Error::Step(samples));
    }
    let grid: Vec<f64> = (0..=samples).map(|k| r_prime_end * k as f64 / samples as f64).collect();
    let gs = crate::geodesic::normal_volume_profile(m, frame, direction, &grid, steps_per_unit)?;
    let interp = MonotoneCubic::new(grid, gs);
    let g: RadialFn = Arc::new(move |s| interp.value(s.min(r_prime_end)).unwrap_or(f64::NAN));
    let mut p = solve_volume_preserving(g, r_prime_end, r_span, n_steps)?;
    p.origin = frame.origin;
    Ok(p)
}

/// `r(r̂)`: synthetic radius whose image has chart radius `r_hat`.
pub fn inverse_profile(p: &RadialProfile, r_hat: f64) -> Result<f64> {
    p.inverse(r_hat)
}

/// `dt/ds = dr′/dr` at synthetic radius `r`.
pub fn differential_slip(p: &RadialProfile, r: f64) -> Result<f64> {
    p.slip(r)
}

/// A point of the flat synthetic plane, in coordinates of an orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticPoint {
    pub components: Vec2,
}

impl SyntheticPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { components: [x, y] }
    }

    pub fn norm(self) -> f64 {
        self.components[0].hypot(self.components[1])
    }
}

/// Image of `s` under the distortion map: the point at Riemannian distance `r′(‖s‖)` along
/// the geodesic leaving the frame origin in direction `s/‖s‖`.
///
/// For a rotationally symmetric chart centred at the frame origin the geodesic is the chart
/// ray and `r̂(r′)` is read off the profile; points up to and including `r_max` are mapped
/// (the rim of a bounded chart lands on the chart boundary). Otherwise the exponential map
/// is integrated.
pub fn theta_map(
    p: &RadialProfile,
    m: &MetricField,
    frame: &NormalFrame,
    s: SyntheticPoint,
    steps_per_unit: usize,
) -> Result<ChartPoint> {
    let norm = s.norm();
    if norm == 0.0 {
        return Ok(frame.origin);
    }
    if norm > p.r_max() {
        return Err(Error::Range { value: norm, max: p.r_max() });
    }
    let dir = frame.to_chart([s.components[0] / norm, s.components[1] / norm]);
    let rp = p.r_prime(norm)?;
    match p.chart() {
        Some(chart) if m.radial().is_some() && frame.origin.norm() == 0.0 => {
            let r_hat = chart.r_hat(rp)?;
            let len = dir[0].hypot(dir[1]);
            Ok(ChartPoint::new(r_hat * dir[0] / len, r_hat * dir[1] / len))
        }
        _ => exp_map(m, frame, [rp * dir[0], rp * dir[1]], steps_per_unit),
    }
}

/// Pointwise map `κ` with `κκᵀ = g⁻¹` in the rotationally symmetric gauge.
///
/// In the polar frame `(∂_r̂, ∂_φ)` it scales the radial part by `1/√g_rr` and the angular
/// part by `r̂/√g_φφ`; at the origin it is the identity.
#[derive(Debug, Clone)]
pub struct KappaField<'m> {
    metric: &'m MetricField,
    origin: ChartPoint,
}

impl<'m> KappaField<'m> {
    pub fn new(metric: &'m MetricField) -> Result<Self> {
        if metric.radial().is_none() {
            return Err(Error::NotRadial(metric.name().to_string()));
        }
        Ok(Self { metric, origin: ChartPoint::ORIGIN })
    }

    pub fn metric(&self) -> &'m MetricField {
        self.metric
    }

    pub fn origin(&self) -> ChartPoint {
        self.origin
    }

    /// `κ(q)` in chart Cartesian components.
    pub fn matrix_at(&self, q: ChartPoint) -> Result<Mat2> {
        self.metric.metric_at(q)?;
        let rc = self.metric.radial().expect("checked in new");
        let r = q.distance(self.origin);
        if r == 0.0 {
            return Ok(mat2::IDENTITY);
        }
        let u = [(q.x - self.origin.x) / r, (q.y - self.origin.y) / r];
        let radial = 1.0 / rc.g_rr(r).sqrt();
        let angular = r / rc.g_phiphi(r).sqrt();
        let uu = mat2::outer(&u, &u);
        Ok(mat2::add(&mat2::scale(&uu, radial), &mat2::scale(&mat2::sub(&mat2::IDENTITY, &uu), angular)))
    }

    /// `κ(q) v`.
    pub fn apply(&self, q: ChartPoint, v: Vec2) -> Result<Vec2> {
        Ok(mat2::apply(&self.matrix_at(q)?, &v))
    }

    /// `max |κκᵀ − g⁻¹|` at `q`.
    pub fn gauge_residual(&self, q: ChartPoint) -> Result<f64> {
        let k = self.matrix_at(q)?;
        let kkt = mat2::mul(&k, &mat2::transpose(&k));
        Ok(mat2::max_abs(&mat2::sub(&kkt, &self.metric.inverse_metric_at(q)?)))
    }

    /// `κ(q)` in polar components `(r̂, φ)`.
    pub fn polar_matrix_at(&self, q: ChartPoint) -> Result<Mat2> {
        let (j, j_inv) = polar_jacobian(q, self.origin)?;
        Ok(mat2::mul(&j, &mat2::mul(&self.matrix_at(q)?, &j_inv)))
    }

    /// Max-norm distance, in polar components, between `κ(q)` and the diagonal square root of
    /// the polar inverse metric `diag(1/g_rr, 1/g_φφ)`.
    ///
    /// Both square `g⁻¹`; they differ in the angular entry (`r̂/√g_φφ` against `1/√g_φφ`)
    /// whenever `r̂ ≠ 1`.
    pub fn polar_root_gap(&self, q: ChartPoint) -> Result<f64> {
        let rc = self.metric.radial().expect("checked in new");
        let r = q.distance(self.origin);
        let k = self.polar_matrix_at(q)?;
        let root = [[1.0 / rc.g_rr(r).sqrt(), 0.0], [0.0, 1.0 / rc.g_phiphi(r).sqrt()]];
        Ok(mat2::max_abs(&mat2::sub(&k, &root)))
    }
}

/// Jacobian of `(x, y) ↦ (r̂, φ)` about `origin` and its inverse.
fn polar_jacobian(q: ChartPoint, origin: ChartPoint) -> Result<(Mat2, Mat2)> {
    let r = q.distance(origin);
    if r == 0.0 {
        return Err(Error::InvalidArgument("polar frame is undefined at the origin".into()));
    }
    let (c, s) = ((q.x - origin.x) / r, (q.y - origin.y) / r);
    Ok(([[c, s], [-s / r, c / r]], [[c, -s * r], [s, c * r]]))
}

/// `κ(q) v` for the field `k`.
pub fn kappa_apply(k: &KappaField<'_>, q: ChartPoint, v: Vec2) -> Result<Vec2> {
    k.apply(q, v)
}

/// Maps a Euclidean unit-speed synthetic curve `c` on `[0, s_max]` through [`theta_map`] and
/// reparametrizes the image to unit g-speed.
///
/// The image is sampled at `n_samples + 1` equally spaced values of `s`; its g-speed `σ(s)`
/// comes from central differences, and the new parameter `t(s) = ∫ σ ds` from Simpson's rule
/// on each sampling interval.
pub fn renormalized_transport<'m>(
    p: &RadialProfile,
    m: &'m MetricField,
    frame: &NormalFrame,
    c: &dyn Fn(f64) -> SyntheticPoint,
    s_max: f64,
    n_samples: usize,
    steps_per_unit: usize,
) -> Result<SampledCurve<'m>> {
    if n_samples < 2 {
        return Err(Error::Step(n_samples));
    }
    let image = |s: f64| theta_map(p, m, frame, c(s), steps_per_unit);
    let velocity = |s: f64| -> Result<(ChartPoint, Vec2)> {
        let here = image(s)?;
        let h = CURVE_FD_STEP * s_max.max(1.0);
        let d = if s - h >= 0.0 && s + h <= s_max {
            let (a, b) = (image(s + h)?, image(s - h)?);
            [(a.x - b.x) / (2.0 * h), (a.y - b.y) / (2.0 * h)]
        } else {
            let sign = if s - h < 0.0 { 1.0 } else { -1.0 };
            let (a, b) = (image(s + sign * h)?, image(s + 2.0 * sign * h)?);
            [
                sign * (-3.0 * here.x + 4.0 * a.x - b.x) / (2.0 * h),
                sign * (-3.0 * here.y + 4.0 * a.y - b.y) / (2.0 * h),
            ]
        };
        Ok((here, d))
    };
    let speed = |s: f64| -> Result<(ChartPoint, Vec2, f64)> {
        let (q, d) = velocity(s)?;
        Ok((q, d, m.norm(q, d)?))
    };
    let ds = s_max / n_samples as f64;
    let mut points = Vec::with_capacity(n_samples + 1);
    let mut tangents = Vec::with_capacity(n_samples + 1);
    let mut param = Vec::with_capacity(n_samples + 1);
    let (mut q, mut d, mut sigma) = speed(0.0)?;
    let mut t = 0.0;
    for k in 0..=n_samples {
        points.push(q);
        tangents.push(TangentTuple::contravariant(q, [d[0] / sigma, d[1] / sigma]));
        param.push(t);
        if k == n_samples {
            break;
        }
        let s = k as f64 * ds;
        let (_, _, sigma_mid) = speed(s + 0.5 * ds)?;
        let next = speed(if k + 1 == n_samples { s_max } else { s + ds })?;
        t += ds / 6.0 * (sigma + 4.0 * sigma_mid + next.2);
        (q, d, sigma) = next;
    }
    Ok(SampledCurve::from_parts(m, points, tangents, param))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{WarpChart, WarpProfile};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI, SQRT_2};

    fn sin_ratio() -> RadialFn {
        Arc::new(|s: f64| s.sin() / s)
    }

    #[test]
    fn boundary_lengths() {
        assert!((radial_boundary_length(&|r| 1.0 / (1.0 - r * r), 1.0) - FRAC_PI_2).abs() < 1e-13);
        assert!((radial_boundary_length(&|_| 1.0, 0.7) - 0.7).abs() < 1e-15);
        assert_eq!(radial_boundary_length(&|_| 1.0, f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn length_profile_of_the_sphere_is_sine() {
        let lp = solve_length_preserving(&|r| 1.0 / (1.0 - r * r), 1.0, 10.0, 2000).unwrap();
        assert!((lp.boundary() - FRAC_PI_2).abs() < 1e-13);
        assert!((lp.r_hat(FRAC_PI_4).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(lp.r_hat(lp.r_prime_end()).unwrap(), 1.0);
        for k in 0..=100 {
            let r = 1.5 * k as f64 / 100.0;
            assert!((lp.r_hat(r).unwrap() - r.sin()).abs() < 1e-10, "r' = {r}");
        }
        assert!(matches!(lp.r_hat(1.6), Err(Error::Singularity { .. })));
        assert!((lp.r_prime(0.5).unwrap() - PI / 6.0).abs() < 1e-10);
    }

    #[test]
    fn length_profile_of_flat_and_hyperbolic() {
        let e = solve_length_preserving(&|_| 1.0, f64::INFINITY, 3.0, 100).unwrap();
        assert!((e.r_hat(2.2).unwrap() - 2.2).abs() < 1e-14);
        let h = solve_length_preserving(&|r| 1.0 / (1.0 + r * r), f64::INFINITY, 2.0, 2000).unwrap();
        for r in [0.3, 1.0, 1.9] {
            assert!((h.r_hat(r).unwrap() - r.sinh()).abs() < 1e-10);
        }
        assert!(matches!(h.r_hat(2.5), Err(Error::Range { .. })));
    }

    #[test]
    fn sphere_distortion_closed_forms() {
        let p = solve_volume_preserving(sin_ratio(), FRAC_PI_2, 10.0, 2000).unwrap();
        assert!((p.r_max() - SQRT_2).abs() < 1e-13);
        assert!((p.r_prime(1.0).unwrap() - FRAC_PI_3).abs() < 1e-10);
        assert!((p.slip(1.0).unwrap() - 2.0 / 3f64.sqrt()).abs() < 1e-10);
        assert_eq!(p.slip(0.0).unwrap(), 1.0);
        assert!((p.slip(1e-7).unwrap() - 1.0).abs() < 1e-9);
        for k in 0..=140 {
            let r = 0.01 * k as f64;
            let exact = (1.0 - r * r / 2.0).acos();
            assert!((p.r_prime(r).unwrap() - exact).abs() < 1e-9, "r = {r}");
        }
        assert!(p.slip(SQRT_2).is_err());
    }

    #[test]
    fn full_sphere_reaches_the_cut_locus() {
        let p = solve_volume_preserving(sin_ratio(), PI, 10.0, 2000).unwrap();
        assert!((p.r_max() - 2.0).abs() < 1e-12);
        assert_eq!(p.r_prime(p.r_end()).unwrap(), PI);
        assert!((p.r_prime(1.9).unwrap() - (1.0 - 1.9f64.powi(2) / 2.0).acos()).abs() < 1e-6);
    }

    #[test]
    fn zero_of_the_volume_element_ends_the_profile() {
        let p = solve_volume_preserving(sin_ratio(), 4.0, 10.0, 500).unwrap();
        assert!((p.r_max() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn flat_distortion_is_identity() {
        let p = solve_volume_preserving(Arc::new(|_| 1.0), f64::INFINITY, 3.0, 50).unwrap();
        assert_eq!(p.r_max(), f64::INFINITY);
        for r in [0.0, 0.5, 2.9] {
            assert!((p.r_prime(r).unwrap() - r).abs() < 1e-14);
            assert!((p.slip(r).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn chart_profiles() {
        let s = MetricField::sphere_projection();
        let p = chart_distortion_profile(&s, 10.0, 2000).unwrap();
        assert!((p.r_max() - SQRT_2).abs() < 1e-12);
        assert!((p.r_hat(1.0).unwrap() - 0.75f64.sqrt()).abs() < 1e-10);
        assert!((p.inverse(1.0).unwrap() - SQRT_2).abs() < 1e-12);
        assert!((p.inverse(0.75f64.sqrt()).unwrap() - 1.0).abs() < 1e-9);

        let h = MetricField::warped(WarpProfile::Sinh, WarpChart::Projection, None);
        let p = chart_distortion_profile(&h, 2.0, 2000).unwrap();
        assert!((p.r_hat(1.0).unwrap() - 1.25f64.sqrt()).abs() < 1e-10);
        assert!((p.r_hat(2.0).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);

        let n = MetricField::warped(WarpProfile::Sin, WarpChart::Normal, None);
        let p = chart_distortion_profile(&n, 10.0, 2000).unwrap();
        assert!((p.r_max() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn theta_map_examples() {
        let s = MetricField::sphere_projection();
        let f = NormalFrame::orthonormalize(&s, ChartPoint::ORIGIN).unwrap();
        let p = chart_distortion_profile(&s, 10.0, 2000).unwrap();
        assert_eq!(theta_map(&p, &s, &f, SyntheticPoint::new(0.0, 0.0), 100).unwrap(), ChartPoint::ORIGIN);
        let q = theta_map(&p, &s, &f, SyntheticPoint::new(1.0, 0.0), 100).unwrap();
        assert!(q.distance(ChartPoint::new(0.75f64.sqrt(), 0.0)) < 1e-10);
        let rim = theta_map(&p, &s, &f, SyntheticPoint::new(SQRT_2, 0.0), 100).unwrap();
        assert_eq!(rim, ChartPoint::new(1.0, 0.0));
        assert!(theta_map(&p, &s, &f, SyntheticPoint::new(1.5, 0.0), 100).is_err());
    }

    #[test]
    fn kappa_examples() {
        let s = MetricField::sphere_projection();
        let k = KappaField::new(&s).unwrap();
        assert_eq!(k.matrix_at(ChartPoint::ORIGIN).unwrap(), mat2::IDENTITY);
        let m = k.matrix_at(ChartPoint::new(0.6, 0.0)).unwrap();
        let ev = mat2::sym_eigenvalues(&m);
        assert!((ev[0] - 0.8).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert!(k.gauge_residual(ChartPoint::new(0.6, 0.0)).unwrap() < 1e-15);
        assert!(k.gauge_residual(ChartPoint::new(0.4, 0.3)).unwrap() < 1e-15);
        assert!((k.polar_root_gap(ChartPoint::new(0.4, 0.3)).unwrap() - 1.0).abs() < 1e-12);
        assert!(KappaField::new(&MetricField::sphere_polar()).is_err());
    }

    #[test]
    fn transport_of_a_circle() {
        let s = MetricField::sphere_projection();
        let f = NormalFrame::orthonormalize(&s, ChartPoint::ORIGIN).unwrap();
        let p = chart_distortion_profile(&s, 10.0, 2000).unwrap();
        let r = 1.0;
        let circle = |t: f64| SyntheticPoint::new(r * (t / r).cos(), r * (t / r).sin());
        let c = renormalized_transport(&p, &s, &f, &circle, 2.0 * PI * r, 400, 100).unwrap();
        let r_hat = 0.75f64.sqrt();
        for (q, t) in c.points().iter().zip(c.param()) {
            assert!((q.norm() - r_hat).abs() < 1e-10);
            let phi = q.y.atan2(q.x).rem_euclid(2.0 * PI);
            let expected = (t / r_hat).rem_euclid(2.0 * PI);
            let diff = (phi - expected).abs();
            assert!(diff.min(2.0 * PI - diff) < 1e-8, "t = {t}");
        }
        assert!(c.speed_defect().unwrap() < 1e-5);
    }

    #[test]
    fn transport_of_a_ray() {
        let s = MetricField::sphere_projection();
        let f = NormalFrame::orthonormalize(&s, ChartPoint::ORIGIN).unwrap();
        let p = chart_distortion_profile(&s, 10.0, 2000).unwrap();
        let ray = |t: f64| SyntheticPoint::new(0.0, t);
        let c = renormalized_transport(&p, &s, &f, &ray, 1.3, 130, 100).unwrap();
        for (k, t) in c.param().iter().enumerate() {
            let sv = 0.01 * k as f64;
            assert!((t - p.r_prime(sv).unwrap()).abs() < 1e-8, "s = {sv}");
        }
    }

    #[test]
    fn direction_profile_matches_closed_form() {
        let s = MetricField::sphere_projection();
        let f = NormalFrame::orthonormalize(&s, ChartPoint::ORIGIN).unwrap();
        let p = direction_profile(&s, &f, [0.6, 0.8], 1.5, 60, 1.4, 400, 1000).unwrap();
        let exact = (1.0f64 - 0.5).acos();
        assert!((p.r_prime(1.0).unwrap() - exact).abs() < 1e-5);
    }
}
