//! Numerical checks of the identities tying the geodesic and distortion engines together,
//! collected into a report.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::distortion::{self, KappaField, RadialProfile, SyntheticPoint};
use crate::error::{Error, Result};
use crate::geodesic::{self, NormalFrame};
use crate::metric::{ChartPoint, Domain, MetricField, TangentTuple, WarpChart, WarpProfile};
use crate::numerics::mat2::{self, Vec2};
use crate::numerics::quad;
use crate::spec::ManifoldSpec;
use crate::table::{fmt_sig, json_number, Format};

/// Synthetic radius analysed on charts without a rim.
pub const ANALYSIS_RADIUS: f64 = 2.0;
/// Mollifier widths, decreasing.
pub const MOLLIFIER_EPS: [f64; 3] = [0.2, 0.1, 0.05];

const SEGMENT_COUNT: usize = 10;
const KAPPA_SAMPLES: usize = 500;
const METRIC_SAMPLES: usize = 1000;
const MOLLIFIER_PANELS: usize = 8;
const MOLLIFIER_DIRECTIONS: usize = 16;
/// Change of `|I(ε) − 1|` that still counts as quadrature noise.
const TREND_NOISE: f64 = 1e-9;
/// Endpoint errors below this are treated as converged by the order check.
const ORDER_FLOOR: f64 = 1e-9;
const ORDER_LEVELS: [usize; 4] = [10, 20, 40, 80];
const POLAR_GAP_THRESHOLD: f64 = 1e-3;
const GAUSS_FD_STEP: f64 = 1e-5;
const SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resolution {
    /// RK4 steps of the radial solvers and geodesic steps per unit length.
    pub steps: usize,
    /// Sample count of radial grids.
    pub grid: usize,
    /// Panels of the area quadratures.
    pub quad_n: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self { steps: 2000, grid: 100, quad_n: 512 }
    }
}

impl Resolution {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 || self.grid < 2 || self.quad_n < 2 {
            return Err(Error::InvalidArgument("resolution values must be at least 2".into()));
        }
        if !self.quad_n.is_multiple_of(2) {
            return Err(Error::InvalidArgument("quad_n must be even".into()));
        }
        Ok(())
    }
}

fn sig<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    json_number(*x).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    /// The identity being checked.
    #[serde(rename = "paper_ref")]
    pub anchor: String,
    #[serde(serialize_with = "sig")]
    pub residual: f64,
    #[serde(serialize_with = "sig")]
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip)]
    pub runtime_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    pub fn new(name: &str, anchor: &str, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            passed: residual <= tolerance,
            runtime_ms: 0.0,
            error: None,
        }
    }

    pub fn failure(name: &str, anchor: &str, tolerance: f64, err: &Error) -> Self {
        Self { error: Some(err.to_string()), ..Self::new(name, anchor, f64::INFINITY, tolerance) }
    }
}

/// Runs `f` and records its residual, or the error it returned.
fn timed(name: &str, anchor: &str, tolerance: f64, f: impl FnOnce() -> Result<f64>) -> CheckRecord {
    let start = Instant::now();
    let mut rec = match f() {
        Ok(r) => CheckRecord::new(name, anchor, r, tolerance),
        Err(e) => CheckRecord::failure(name, anchor, tolerance, &e),
    };
    rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub manifold: String,
    #[serde(skip)]
    pub parameters: Resolution,
    pub checks: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn passed_all(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            manifold: &'a str,
            checks: &'a [CheckRecord],
            passed_all: bool,
        }
        let out = Out { manifold: &self.manifold, checks: &self.checks, passed_all: self.passed_all() };
        let mut s = serde_json::to_string_pretty(&out).expect("report serializes");
        s.push('\n');
        s
    }

    /// Columns `name, paper_ref, residual, tolerance, passed`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "paper_ref", "residual", "tolerance", "passed"]).expect("in-memory write");
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.anchor.clone(),
                fmt_sig(c.residual),
                fmt_sig(c.tolerance),
                c.passed.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_text(&self) -> String {
        let p = self.parameters;
        let mut out = String::new();
        writeln!(out, "manifold: {}", self.manifold).unwrap();
        writeln!(out, "steps: {}  grid: {}  quad_n: {}", p.steps, p.grid, p.quad_n).unwrap();
        let rows: Vec<[String; 4]> = self
            .checks
            .iter()
            .map(|c| {
                [c.name.clone(), fmt_sig(c.residual), fmt_sig(c.tolerance), (if c.passed { "pass" } else { "FAIL" }).into()]
            })
            .collect();
        let header = ["check".to_string(), "residual".into(), "tolerance".into(), "status".into()];
        let mut widths = header.clone().map(|h| h.chars().count());
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        for r in std::iter::once(&header).chain(&rows) {
            let name = format!("{:<w$}", r[0], w = widths[0]);
            writeln!(out, "{name}  {:>w1$}  {:>w2$}  {}", r[1], r[2], r[3], w1 = widths[1], w2 = widths[2]).unwrap();
        }
        for c in self.failures() {
            write!(out, "failed {}: {}", c.name, c.anchor).unwrap();
            if let Some(e) = &c.error {
                write!(out, " ({e})").unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "passed_all: {}", self.passed_all()).unwrap();
        out
    }
}

/// Max over `grid` of the deviation from 1 of the g-speed of the radial geodesic in
/// `direction`, measured both by the integrated velocity and by central differences of the
/// exponential map along the ray.
pub fn check_gauss_classical(
    m: &MetricField,
    frame: &NormalFrame,
    direction: Vec2,
    grid: &[f64],
    steps_per_unit: usize,
) -> Result<CheckRecord> {
    let anchor = "radial images of the exponential map have unit g-speed";
    Ok(timed("gauss lemma", anchor, 1e-6, || {
        let mut times = Vec::with_capacity(3 * grid.len());
        for &t in grid {
            if t >= GAUSS_FD_STEP {
                times.extend([t - GAUSS_FD_STEP, t, t + GAUSS_FD_STEP]);
            } else {
                times.extend([t, t + GAUSS_FD_STEP, t + 2.0 * GAUSS_FD_STEP]);
            }
        }
        let mut sorted = times.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let samples = geodesic::sample_geodesic(m, frame.origin, direction, None, &sorted, steps_per_unit)?;
        let at = |t: f64| samples[sorted.partition_point(|s| *s < t)];
        let mut worst = 0.0_f64;
        for (k, &t) in grid.iter().enumerate() {
            let (a, b, c) = (times[3 * k], times[3 * k + 1], times[3 * k + 2]);
            let here = at(t);
            let (pa, pb, pc) = (at(a).point, at(b).point, at(c).point);
            let fd = if t >= GAUSS_FD_STEP {
                [(pc.x - pa.x) / (2.0 * GAUSS_FD_STEP), (pc.y - pa.y) / (2.0 * GAUSS_FD_STEP)]
            } else {
                [
                    (-3.0 * pa.x + 4.0 * pb.x - pc.x) / (2.0 * GAUSS_FD_STEP),
                    (-3.0 * pa.y + 4.0 * pb.y - pc.y) / (2.0 * GAUSS_FD_STEP),
                ]
            };
            worst = worst
                .max((m.norm(here.point, here.velocity)? - 1.0).abs())
                .max((m.norm(here.point, fd)? - 1.0).abs());
        }
        Ok(worst)
    }))
}

/// Integrand of chart areas in the variables `(r′, φ)`: `√det g(P) · r̂ · dr̂/dr′` at
/// `P = r̂(r′)(cos φ, sin φ)`. On the chart rim it takes its continuous extension `√g_φφ`.
fn area_density(m: &MetricField, p: &RadialProfile, r_prime: f64, phi: f64) -> Result<f64> {
    let rc = m.radial().ok_or_else(|| Error::NotRadial(m.name().to_string()))?;
    let chart = p.chart().ok_or_else(|| Error::NotRadial("profile has no chart".into()))?;
    let r_hat = chart.r_hat(r_prime)?;
    if r_hat >= rc.radius() {
        return Ok(rc.g_phiphi(r_hat).sqrt());
    }
    let point = ChartPoint::new(r_hat * phi.cos(), r_hat * phi.sin());
    Ok(m.volume_element_at(point)? * r_hat / rc.g_rr(r_hat).sqrt())
}

/// Relative difference between the Euclidean area of the synthetic annular segment
/// `r_interval × phi_interval` and the g-area of its image, both by composite Simpson rules
/// with `quad_n` panels per variable.
pub fn check_segment_volume(
    p: &RadialProfile,
    m: &MetricField,
    r_interval: (f64, f64),
    phi_interval: (f64, f64),
    quad_n: usize,
) -> Result<CheckRecord> {
    let anchor = "synthetic segment area equals the g-area of its image";
    Ok(timed("segment volume", anchor, 1e-6, || segment_residual(p, m, r_interval, phi_interval, quad_n)))
}

fn segment_residual(
    p: &RadialProfile,
    m: &MetricField,
    (a, b): (f64, f64),
    (phi0, phi1): (f64, f64),
    quad_n: usize,
) -> Result<f64> {
    if !(0.0 <= a && a <= b && b <= p.r_end()) {
        return Err(Error::Range { value: b, max: p.r_end() });
    }
    let lhs = (phi1 - phi0) * quad::simpson(|l| l, a, b, quad_n);
    let (ra, rb) = (p.r_prime(a)?, p.r_prime(b)?);
    let failure = std::cell::RefCell::new(None);
    let rhs = quad::simpson(
        |phi| {
            quad::simpson(
                |l| {
                    area_density(m, p, l, phi).unwrap_or_else(|e| {
                        failure.borrow_mut().get_or_insert(e);
                        f64::NAN
                    })
                },
                ra,
                rb,
                quad_n,
            )
        },
        phi0,
        phi1,
        quad_n,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if lhs == rhs {
        return Ok(0.0);
    }
    Ok((lhs - rhs).abs() / rhs.abs())
}

/// Relative difference between `π r²` for the tabulated extent `r` of the profile (its
/// blow-up radius when reached) and the g-area of the image disk, integrated with an open
/// Gauss–Legendre rule in `(r′, φ)`.
pub fn check_total_volume(p: &RadialProfile, m: &MetricField, quad_n: usize) -> Result<CheckRecord> {
    let anchor = "disk of radius r_max has the g-area of the whole image";
    Ok(timed("total volume", anchor, 1e-6, || {
        let r = p.r_end();
        let lhs = PI * r * r;
        let rp_end = p.r_prime(r)?;
        let panels = (quad_n / 4).max(1);
        let radial = quad::gauss_legendre_rule(0.0, rp_end, panels);
        let angular = quad::gauss_legendre_rule(0.0, 2.0 * PI, panels);
        let mut rhs = 0.0;
        for &(phi, wp) in &angular {
            let mut inner = 0.0;
            for &(l, wl) in &radial {
                inner += wl * area_density(m, p, l, phi)?;
            }
            rhs += wp * inner;
        }
        Ok((lhs - rhs).abs() / rhs)
    }))
}

/// Result of the mollifier experiment at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct MollifierCheck {
    /// `I(ε)` for each width.
    pub values: Vec<f64>,
    /// `|I(ε_min) − 1|` against the finite-width threshold.
    pub mass: CheckRecord,
    /// Largest increase of `|I(ε) − 1|` as `ε` decreases.
    pub trend: CheckRecord,
}

fn bump(t: f64) -> f64 {
    if t >= 1.0 {
        0.0
    } else {
        (1.0 / (t * t - 1.0)).exp()
    }
}

/// Mass of the smooth bump of width `ε`, centred at `q` in normal coordinates, under the
/// image of Lebesgue measure by the distortion map.
///
/// In normal coordinates `z` at `q` the mass is `∫ φ_ε(z) |det DΘ⁻¹(P)| |det D exp_q(z)| dz`
/// with `P = exp_q(z)`. The first factor comes from the radial profile
/// (`r / (r̂ · dr̂/dr)`), the second from the normal-coordinate volume element divided by
/// `√det g(P)`. The bump is normalized with the same radial rule, so the flat case gives 1.
pub fn mollifier_mass(
    p: &RadialProfile,
    m: &MetricField,
    q: ChartPoint,
    eps: f64,
    steps_per_unit: usize,
) -> Result<f64> {
    let rc = m.radial().ok_or_else(|| Error::NotRadial(m.name().to_string()))?;
    let frame = NormalFrame::orthonormalize(m, q).map_err(|_| Error::SupportEscape { eps })?;
    let rule = quad::gauss_legendre_rule(0.0, 1.0, MOLLIFIER_PANELS);
    let norm: f64 = 2.0 * PI * rule.iter().map(|(t, w)| w * bump(*t) * t).sum::<f64>();
    let radii: Vec<f64> = rule.iter().map(|(t, _)| eps * t).collect();
    let escape = |e: Error| match e {
        Error::DomainEscape { .. } | Error::Domain { .. } | Error::SingularMetric { .. } => Error::SupportEscape { eps },
        other => other,
    };
    let mut total = 0.0;
    for j in 0..MOLLIFIER_DIRECTIONS {
        let theta = 2.0 * PI * j as f64 / MOLLIFIER_DIRECTIONS as f64;
        let dir = frame.to_chart([theta.cos(), theta.sin()]);
        let normal = geodesic::normal_volume_profile(m, &frame, dir, &radii, steps_per_unit).map_err(escape)?;
        let points = geodesic::sample_geodesic(m, q, dir, None, &radii, steps_per_unit).map_err(escape)?;
        let mut ring = 0.0;
        for ((&(t, w), gn), s) in rule.iter().zip(&normal).zip(&points) {
            let exp_det = gn / m.volume_element_at(s.point).map_err(escape)?;
            let r_hat = s.point.norm();
            let theta_inv_det = if r_hat == 0.0 {
                1.0
            } else {
                let r = p.inverse(r_hat)?;
                let dr_hat = p.slip(r)? / rc.g_rr(r_hat).sqrt();
                r / (r_hat * dr_hat)
            };
            ring += w * bump(t) * t * exp_det * theta_inv_det;
        }
        total += ring * 2.0 * PI / MOLLIFIER_DIRECTIONS as f64;
    }
    Ok(total / norm)
}

/// `I(ε)` over a strictly decreasing list of widths, with the finite-width mass check and the
/// monotone-approach check.
pub fn check_mollifier_delta(
    p: &RadialProfile,
    m: &MetricField,
    q: ChartPoint,
    eps_list: &[f64],
    steps_per_unit: usize,
) -> Result<MollifierCheck> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("mollifier widths must be strictly decreasing".into()));
    }
    let start = Instant::now();
    let values = eps_list.iter().map(|&e| mollifier_mass(p, m, q, e, steps_per_unit)).collect::<Result<Vec<_>>>()?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let dev: Vec<f64> = values.iter().map(|v| (v - 1.0).abs()).collect();
    let increase = dev.windows(2).map(|w| (w[1] - w[0]).max(0.0)).fold(0.0, f64::max);
    let mut mass = CheckRecord::new(
        "mollifier mass",
        "normalized bump mass tends to 1 under the exterior volume",
        dev[dev.len() - 1],
        1e-2,
    );
    let mut trend = CheckRecord::new(
        "mollifier trend",
        "|I(eps) - 1| does not grow as eps decreases",
        increase,
        TREND_NOISE,
    );
    mass.runtime_ms = ms;
    trend.runtime_ms = ms;
    Ok(MollifierCheck { values, mass, trend })
}

/// Uniform random chart points in the disk of radius `radius`.
pub fn sample_disk(radius: f64, n: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let r = radius * rng.gen::<f64>().sqrt();
            let phi = 2.0 * PI * rng.gen::<f64>();
            ChartPoint::new(r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// Max of `|κκᵀ − g⁻¹|` over `points`.
pub fn check_kappa_gauge(k: &KappaField<'_>, points: &[ChartPoint]) -> Result<CheckRecord> {
    Ok(timed("kappa gauge", "kappa kappa^T = g^-1", 1e-8, || {
        points.iter().try_fold(0.0_f64, |acc, q| Ok(acc.max(k.gauge_residual(*q)?)))
    }))
}

/// Confirms that `κ` differs from the diagonal square root of the inverse metric in polar
/// components at `q`. The residual is how far the gap falls short of a fixed threshold.
pub fn check_kappa_polar(k: &KappaField<'_>, q: ChartPoint) -> Result<CheckRecord> {
    let anchor = "rotationally symmetric kappa is not the diagonal root of g^-1 in polar components";
    Ok(timed("kappa non-diagonal", anchor, 0.0, || Ok((POLAR_GAP_THRESHOLD - k.polar_root_gap(q)?).max(0.0))))
}

/// Largest deviation from the identity of the Gram matrix of a g-orthonormal frame
/// transported along radial geodesics of length `length` in each of `directions`
/// (frame coefficients).
pub fn check_transport(
    m: &MetricField,
    frame: &NormalFrame,
    directions: &[Vec2],
    length: f64,
    steps_per_unit: usize,
) -> Result<CheckRecord> {
    let anchor = "parallel transport preserves g-inner products";
    Ok(timed("parallel transport", anchor, 1e-8, || {
        let n = ((steps_per_unit as f64 * length).ceil() as usize).max(2);
        let mut worst = 0.0_f64;
        for d in directions {
            let len = d[0].hypot(d[1]);
            let u = [d[0] / len, d[1] / len];
            let v = frame.to_chart(u);
            let w = frame.to_chart([-u[1], u[0]]);
            let curve = geodesic::geodesic_shoot(m, frame, v, length, n)?;
            let a = geodesic::parallel_transport(&curve, &TangentTuple::contravariant(frame.origin, v))?;
            let b = geodesic::parallel_transport(&curve, &TangentTuple::contravariant(frame.origin, w))?;
            for ((p, x), y) in curve.points().iter().zip(&a).zip(&b) {
                let gram = [
                    m.inner(*p, x.components, x.components)? - 1.0,
                    m.inner(*p, x.components, y.components)?,
                    m.inner(*p, y.components, y.components)? - 1.0,
                ];
                worst = gram.iter().fold(worst, |acc, g| acc.max(g.abs()));
            }
        }
        Ok(worst)
    }))
}

/// Ratio of successive endpoint errors of the radial geodesic along the chart x axis when
/// the RK4 step count doubles; fourth order means at most 1/16, the check allows 1/8.
pub fn check_rk4_order(
    m: &MetricField,
    frame: &NormalFrame,
    exact: &dyn Fn(f64) -> f64,
    length: f64,
) -> Result<CheckRecord> {
    let anchor = "fixed-step RK4 endpoint error is fourth order";
    Ok(timed("rk4 order", anchor, 0.125, || {
        let v = [1.0 / m.metric_at(frame.origin)?[0][0].sqrt(), 0.0];
        let target = exact(length);
        let errors = ORDER_LEVELS
            .iter()
            .map(|&n| {
                let c = geodesic::geodesic_shoot(m, frame, v, length, n)?;
                let end = c.end();
                Ok((end.x - target).hypot(end.y))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(errors
            .windows(2)
            .map(|w| if w[0] < ORDER_FLOOR { 0.0 } else { w[1] / w[0] })
            .fold(0.0, f64::max))
    }))
}

/// Closed forms of a warped product `dr′² + f(r′)² dφ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedForm {
    pub profile: WarpProfile,
    pub chart: WarpChart,
}

impl ClosedForm {
    /// Chart radius after Riemannian distance `r′`.
    pub fn r_hat(&self, r_prime: f64) -> f64 {
        match self.chart {
            WarpChart::Projection => self.profile.f(r_prime),
            WarpChart::Normal => r_prime,
        }
    }

    /// Riemannian distance to chart radius `r̂`.
    pub fn r_prime_of_hat(&self, r_hat: f64) -> f64 {
        match (self.chart, self.profile) {
            (WarpChart::Normal, _) | (_, WarpProfile::Flat) => r_hat,
            (_, WarpProfile::Sin) => r_hat.asin(),
            (_, WarpProfile::Sinh) => r_hat.asinh(),
        }
    }

    /// Equal-area radius `r′(r)`: `r²/2 = ∫₀^{r′} f`.
    pub fn r_prime(&self, r: f64) -> f64 {
        match self.profile {
            WarpProfile::Flat => r,
            WarpProfile::Sin => (1.0 - r * r / 2.0).acos(),
            WarpProfile::Sinh => (1.0 + r * r / 2.0).acosh(),
        }
    }

    /// Inverse of [`ClosedForm::r_prime`].
    pub fn r(&self, r_prime: f64) -> f64 {
        match self.profile {
            WarpProfile::Flat => r_prime,
            WarpProfile::Sin => (2.0 * (1.0 - r_prime.cos())).sqrt(),
            WarpProfile::Sinh => (2.0 * (r_prime.cosh() - 1.0)).sqrt(),
        }
    }

    /// `dr′/dr = r / f(r′)`.
    pub fn slip(&self, r: f64) -> f64 {
        if r == 0.0 {
            1.0
        } else {
            r / self.profile.f(self.r_prime(r))
        }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// Arc length that geodesics from [`base_point`] along the first frame axis can travel while
/// staying well inside the chart: 90% of the distance to a chart rim, at most
/// [`ANALYSIS_RADIUS`].
pub fn geodesic_reach(m: &MetricField) -> f64 {
    if let Some(rc) = m.radial() {
        let boundary = distortion::radial_boundary_length(&|r| rc.g_rr(r), rc.radius());
        return if boundary.is_finite() { (0.9 * boundary).min(ANALYSIS_RADIUS) } else { ANALYSIS_RADIUS };
    }
    match m.domain() {
        Domain::Strip { max, .. } => 0.9 * (max - base_point(m).x).min(1.0),
        _ => 1.0,
    }
}

/// Base point of the checks: the chart origin, or the middle of a strip-type domain.
pub fn base_point(m: &MetricField) -> ChartPoint {
    match m.domain() {
        Domain::Strip { min, max } => ChartPoint::new(0.5 * (min + max), 0.0),
        _ => ChartPoint::ORIGIN,
    }
}

fn max_abs_diff(grid: &[f64], f: impl Fn(f64) -> Result<f64>, g: impl Fn(f64) -> f64) -> Result<f64> {
    grid.iter().try_fold(0.0_f64, |acc, &x| Ok(acc.max((f(x)? - g(x)).abs())))
}

/// Every applicable check for the manifold described by `spec`.
///
/// Checks that fail with an error are recorded as failures; the suite itself only fails on
/// an invalid spec or resolution. Output is deterministic for fixed inputs.
pub fn run_suite(spec: &ManifoldSpec, res: Resolution) -> Result<VerificationReport> {
    res.validate()?;
    let m = spec.metric()?;
    let mut checks = Vec::new();
    let steps = res.steps;

    checks.push(timed("metric invariants", "g symmetric positive definite and g g^-1 = I", 1e-10, || {
        metric_invariant_residual(&m)
    }));

    let base = base_point(&m);
    let frame = match NormalFrame::orthonormalize(&m, base) {
        Ok(f) => f,
        Err(e) => {
            checks.push(CheckRecord::failure("normal frame", "orthonormal frame at the base point", 0.0, &e));
            return Ok(VerificationReport { manifold: spec.name.clone(), parameters: res, checks });
        }
    };

    let radial = m.radial().is_some();
    let boundary = m
        .radial()
        .map(|rc| distortion::radial_boundary_length(&|r| rc.g_rr(r), rc.radius()))
        .unwrap_or(f64::INFINITY);
    let reach = geodesic_reach(&m);
    let direction = frame.to_chart([0.6, 0.8]);
    let gauss_dir = if radial { direction } else { frame.to_chart([1.0, 0.0]) };
    let gauss_grid = linspace(0.0, reach, res.grid);
    checks.push(check_gauss_classical(&m, &frame, gauss_dir, &gauss_grid, steps).expect("recorded"));

    let transport_dirs: &[Vec2] = if radial { &[[1.0, 0.0], [0.6, 0.8], [-0.28, 0.96]] } else { &[[1.0, 0.0]] };
    checks.push(check_transport(&m, &frame, transport_dirs, reach, steps).expect("recorded"));

    let closed = spec.warp().map(|(profile, chart)| ClosedForm { profile, chart });
    if let Some(cf) = closed {
        let length = reach.min(1.4);
        checks.push(check_rk4_order(&m, &frame, &|t| cf.r_hat(t), length).expect("recorded"));
    }

    if !radial {
        return Ok(VerificationReport { manifold: spec.name.clone(), parameters: res, checks });
    }

    let exp_span = if boundary.is_finite() { (0.96 * boundary).min(1.5) } else { 1.5 };
    let length_profile = distortion::chart_length_profile(&m, exp_span.max(boundary.min(ANALYSIS_RADIUS)), steps);
    if let Some(cf) = closed {
        let grid = linspace(0.0, exp_span, res.grid);
        checks.push(timed("exp profile", "radial chart distance r_hat(r') matches its closed form", 1e-8, || {
            let lp = length_profile.clone()?;
            max_abs_diff(&grid, |r| lp.r_hat(r), |r| cf.r_hat(r))
        }));
    }

    let span = if boundary.is_finite() { f64::INFINITY } else { ANALYSIS_RADIUS };
    let profile = match distortion::chart_distortion_profile(&m, span, steps) {
        Ok(p) => p,
        Err(e) => {
            checks.push(CheckRecord::failure("distortion profile", "volume-preserving radial ODE", 0.0, &e));
            return Ok(VerificationReport { manifold: spec.name.clone(), parameters: res, checks });
        }
    };
    let d_span = if profile.r_max().is_finite() { (0.99 * profile.r_max()).min(1.4) } else { ANALYSIS_RADIUS };
    let d_grid = linspace(0.0, d_span, res.grid);

    if let Some(cf) = closed {
        checks.push(timed("distortion profile", "equal-area radius r'(r) and r_hat(r) match their closed forms", 1e-8, || {
            let a = max_abs_diff(&d_grid, |r| profile.r_prime(r), |r| cf.r_prime(r))?;
            let b = max_abs_diff(&d_grid, |r| profile.r_hat(r), |r| cf.r_hat(cf.r_prime(r)))?;
            Ok(a.max(b))
        }));
        checks.push(timed("inverse profile", "r(r_hat) inverts the distortion, reaching r_max at the rim", 1e-8, || {
            let mut worst = max_abs_diff(&d_grid, |r| profile.inverse(profile.r_hat(r)?), |r| r)?;
            if profile.r_max().is_finite() {
                let rim = m.radial().expect("radial").radius();
                let exact = cf.r(cf.r_prime_of_hat(rim));
                worst = worst.max((profile.inverse(rim)? - exact).abs());
            }
            Ok(worst)
        }));
        checks.push(timed("slip", "differential slip dr'/dr = r / f(r')", 1e-8, || {
            let near_zero = (profile.slip(1e-9)? - 1.0).abs();
            Ok(max_abs_diff(&d_grid, |r| profile.slip(r), |r| cf.slip(r))?.max(near_zero))
        }));
    }

    checks.push(check_total_volume(&profile, &m, res.quad_n).expect("recorded"));
    if closed.map(|c| c.profile) == Some(WarpProfile::Sin) {
        let other = match closed.expect("closed form").chart {
            WarpChart::Projection => WarpChart::Normal,
            WarpChart::Normal => WarpChart::Projection,
        };
        let om = MetricField::warped(WarpProfile::Sin, other, None);
        let mut rec = match distortion::chart_distortion_profile(&om, f64::INFINITY, steps) {
            Ok(op) => check_total_volume(&op, &om, res.quad_n).expect("recorded"),
            Err(e) => CheckRecord::failure("total volume", "whole-sphere area", 1e-6, &e),
        };
        rec.name = match other {
            WarpChart::Normal => "total volume (cut locus)".into(),
            WarpChart::Projection => "total volume (hemisphere)".into(),
        };
        checks.push(rec);
    }

    checks.push(timed("segment volume", "synthetic segment area equals the g-area of its image", 1e-6, || {
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let top = 0.99 * profile.r_end();
        let mut worst = 0.0_f64;
        for _ in 0..SEGMENT_COUNT {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let (a, b) = (top * u.min(v), top * u.max(v));
            let phi0 = 2.0 * PI * rng.gen::<f64>();
            let dphi = 2.0 * PI * rng.gen::<f64>();
            worst = worst.max(segment_residual(&profile, &m, (a, b), (phi0, phi0 + dphi), res.quad_n)?);
        }
        Ok(worst)
    }));

    match KappaField::new(&m) {
        Ok(k) => {
            let radius = m.domain().radius();
            let sample_r = if radius.is_finite() { 0.95 * radius } else { ANALYSIS_RADIUS };
            checks.push(check_kappa_gauge(&k, &sample_disk(sample_r, KAPPA_SAMPLES, SEED)).expect("recorded"));
            let scale = if radius.is_finite() { (radius / 1.0).min(1.0) } else { 1.0 };
            checks.push(check_kappa_polar(&k, ChartPoint::new(0.4 * scale, 0.3 * scale)).expect("recorded"));
        }
        Err(e) => checks.push(CheckRecord::failure("kappa gauge", "kappa kappa^T = g^-1", 1e-8, &e)),
    }

    checks.push(timed("circle transport", "unit circles map to g-unit-speed circles of circumference 2 pi sqrt(g_phiphi)", 1e-6, || {
        let r = (0.7 * profile.r_max()).min(1.0);
        let circle = move |t: f64| SyntheticPoint::new(r * (t / r).cos(), r * (t / r).sin());
        let n = 4 * res.grid;
        let c = distortion::renormalized_transport(&profile, &m, &frame, &circle, 2.0 * PI * r, n, steps)?;
        let r_hat = profile.r_hat(r)?;
        let circumference = 2.0 * PI * m.radial().expect("radial").g_phiphi(r_hat).sqrt();
        let total = c.param()[c.len() - 1];
        Ok((total - circumference).abs() / circumference)
    }));

    let origin = ChartPoint::ORIGIN;
    let off = ChartPoint::new(0.5, 0.0);
    let bases: Vec<(&str, ChartPoint)> = if m.contains(ChartPoint::new(0.5 + 2.0 * MOLLIFIER_EPS[0], 0.0)) {
        vec![("origin", origin), ("off-origin", off)]
    } else {
        vec![("origin", origin)]
    };
    for (label, q) in bases {
        match check_mollifier_delta(&profile, &m, q, &MOLLIFIER_EPS, steps) {
            Ok(mc) => {
                let mut mass = mc.mass;
                let mut trend = mc.trend;
                mass.name = format!("{} ({label})", mass.name);
                trend.name = format!("{} ({label})", trend.name);
                checks.push(mass);
                checks.push(trend);
            }
            Err(e) => checks.push(CheckRecord::failure(
                &format!("mollifier mass ({label})"),
                "normalized bump mass tends to 1 under the exterior volume",
                1e-2,
                &e,
            )),
        }
    }

    Ok(VerificationReport { manifold: spec.name.clone(), parameters: res, checks })
}

/// Worst symmetry, inverse and definiteness defect over random domain points.
fn metric_invariant_residual(m: &MetricField) -> Result<f64> {
    let points: Vec<ChartPoint> = match m.domain() {
        Domain::Strip { min, max } => {
            let mut rng = ChaCha8Rng::seed_from_u64(SEED);
            (0..METRIC_SAMPLES)
                .map(|_| ChartPoint::new(min + (max - min) * rng.gen_range(0.001..0.999), 2.0 * PI * rng.gen::<f64>()))
                .collect()
        }
        d => {
            let r = d.radius();
            sample_disk(if r.is_finite() { 0.999 * r } else { 10.0 }, METRIC_SAMPLES, SEED)
        }
    };
    let mut worst = 0.0_f64;
    for p in points {
        let g = m.metric_at(p)?;
        if mat2::sym_eigenvalues(&g)[0] <= 0.0 {
            return Err(Error::SingularMetric { x: p.x, y: p.y });
        }
        let id = mat2::mul(&g, &m.inverse_metric_at(p)?);
        let scale = mat2::max_abs(&g).max(1.0);
        worst = worst
            .max((g[0][1] - g[1][0]).abs() / scale)
            .max(mat2::max_abs(&mat2::sub(&id, &mat2::IDENTITY)) / scale);
    }
    Ok(worst)
}
