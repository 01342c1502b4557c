//! Geodesic and parallel-transport integration, the exponential map and its radial inverse.
//!
//! The state vector is `(x, y, ẋ, ẏ)` optionally followed by the components of a vector
//! carried along by parallel transport. Everything is integrated with fixed-step RK4.

use crate::error::{Error, Result};
use crate::metric::{ChartPoint, MetricField, TangentTuple, Variance, BLOW_UP_VOLUME};
use crate::numerics::mat2::{self, Vec2};
use crate::numerics::rk4;
use crate::table::Table;

pub const DEFAULT_STEPS_PER_UNIT: usize = 2000;

/// Allowed deviation of an input direction from g-unit length.
const UNIT_TOLERANCE: f64 = 1e-8;
/// Offset between neighbouring geodesics when differentiating the exponential map.
const JACOBI_STEP: f64 = 1e-5;
const LOG_MAX_ITERATIONS: usize = 200;

/// A g-orthonormal basis of the tangent plane at `origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalFrame {
    pub origin: ChartPoint,
    pub basis: [TangentTuple; 2],
}

impl NormalFrame {
    pub fn new(m: &MetricField, origin: ChartPoint, e1: Vec2, e2: Vec2) -> Result<Self> {
        let g = m.metric_at(origin)?;
        let gram = [
            mat2::bilinear(&g, &e1, &e1) - 1.0,
            mat2::bilinear(&g, &e1, &e2),
            mat2::bilinear(&g, &e2, &e2) - 1.0,
        ];
        if gram.iter().any(|d| d.abs() > 1e-10) {
            return Err(Error::InvalidArgument("frame is not g-orthonormal".into()));
        }
        Ok(Self {
            origin,
            basis: [TangentTuple::contravariant(origin, e1), TangentTuple::contravariant(origin, e2)],
        })
    }

    /// Gram–Schmidt on the chart axes.
    pub fn orthonormalize(m: &MetricField, origin: ChartPoint) -> Result<Self> {
        let g = m.metric_at(origin)?;
        let n1 = g[0][0].sqrt();
        let e1 = [1.0 / n1, 0.0];
        let mut e2 = [0.0, 1.0];
        let proj = mat2::bilinear(&g, &e2, &e1);
        e2 = [e2[0] - proj * e1[0], e2[1] - proj * e1[1]];
        let n2 = mat2::bilinear(&g, &e2, &e2).sqrt();
        e2 = [e2[0] / n2, e2[1] / n2];
        Self::new(m, origin, e1, e2)
    }

    /// Chart components of `c₁ e₁ + c₂ e₂`.
    pub fn to_chart(&self, c: Vec2) -> Vec2 {
        let (e1, e2) = (self.basis[0].components, self.basis[1].components);
        [c[0] * e1[0] + c[1] * e2[0], c[0] * e1[1] + c[1] * e2[1]]
    }

    /// Frame coefficients `⟨v, e_k⟩_g` of a chart vector.
    pub fn coefficients(&self, m: &MetricField, v: Vec2) -> Result<Vec2> {
        Ok([
            m.inner(self.origin, v, self.basis[0].components)?,
            m.inner(self.origin, v, self.basis[1].components)?,
        ])
    }
}

/// A curve on the chart sampled at increasing Riemannian arc length.
#[derive(Debug, Clone)]
pub struct SampledCurve<'m> {
    metric: &'m MetricField,
    points: Vec<ChartPoint>,
    tangents: Vec<TangentTuple>,
    param: Vec<f64>,
}

/// Solution of the geodesic equation, sampled by arc length.
pub type GeodesicCurve<'m> = SampledCurve<'m>;

impl<'m> SampledCurve<'m> {
    pub(crate) fn from_parts(
        metric: &'m MetricField,
        points: Vec<ChartPoint>,
        tangents: Vec<TangentTuple>,
        param: Vec<f64>,
    ) -> Self {
        Self { metric, points, tangents, param }
    }

    pub fn metric(&self) -> &'m MetricField {
        self.metric
    }

    pub fn points(&self) -> &[ChartPoint] {
        &self.points
    }

    pub fn tangents(&self) -> &[TangentTuple] {
        &self.tangents
    }

    pub fn param(&self) -> &[f64] {
        &self.param
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn end(&self) -> ChartPoint {
        self.points[self.points.len() - 1]
    }

    /// `√⟨c′, c′⟩_g` at sample `i`.
    pub fn g_speed(&self, i: usize) -> Result<f64> {
        self.metric.norm(self.points[i], self.tangents[i].components)
    }

    /// `max |g-speed − 1|` over all samples.
    pub fn speed_defect(&self) -> Result<f64> {
        (0..self.len()).try_fold(0.0_f64, |acc, i| Ok(acc.max((self.g_speed(i)? - 1.0).abs())))
    }

    /// Columns `t, x, y, vx, vy, g_speed`.
    pub fn to_table(&self) -> Result<Table> {
        let mut table = Table::new(["t", "x", "y", "vx", "vy", "g_speed"]);
        for i in 0..self.len() {
            let p = self.points[i];
            let v = self.tangents[i].components;
            table.push(vec![self.param[i], p.x, p.y, v[0], v[1], self.g_speed(i)?]);
        }
        Ok(table)
    }
}

/// Point and velocity of a geodesic at parameter `t`, with an optionally transported vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicSample {
    pub t: f64,
    pub point: ChartPoint,
    pub velocity: Vec2,
    pub carried: Option<Vec2>,
}

fn rhs<const N: usize>(m: &MetricField, y: &[f64; N]) -> Result<[f64; N]> {
    let p = ChartPoint::new(y[0], y[1]);
    if m.volume_element_at(p)? > BLOW_UP_VOLUME {
        return Err(Error::SingularMetric { x: p.x, y: p.y });
    }
    let gamma = m.connection_at(p)?;
    let v = [y[2], y[3]];
    let acc = gamma.contract(v, v);
    let mut out = [0.0; N];
    out[0] = v[0];
    out[1] = v[1];
    out[2] = -acc[0];
    out[3] = -acc[1];
    let mut k = 4;
    while k + 1 < N {
        let d = gamma.contract(v, [y[k], y[k + 1]]);
        out[k] = -d[0];
        out[k + 1] = -d[1];
        k += 2;
    }
    Ok(out)
}

/// `n` equal steps over `[0, t_max]`, visiting every node.
fn march_uniform<const N: usize>(
    m: &MetricField,
    y0: [f64; N],
    t_max: f64,
    n: usize,
    mut visit: impl FnMut(f64, &[f64; N]),
) -> Result<()> {
    let h = t_max / n as f64;
    let mut f = |_t: f64, y: &[f64; N]| rhs(m, y);
    let mut y = y0;
    visit(0.0, &y);
    for k in 0..n {
        let t = k as f64 * h;
        y = rk4::step(&mut f, t, &y, h).map_err(|_| Error::DomainEscape { last_t: t })?;
        visit((k + 1) as f64 * h, &y);
    }
    Ok(())
}

/// Advances through increasing `times`, each gap split into `⌈steps_per_unit · gap⌉` steps.
fn march_through<const N: usize>(
    m: &MetricField,
    y0: [f64; N],
    times: &[f64],
    steps_per_unit: usize,
) -> Result<Vec<[f64; N]>> {
    let mut f = |_t: f64, y: &[f64; N]| rhs(m, y);
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    let mut t = 0.0;
    for &target in times {
        if target < t {
            return Err(Error::InvalidArgument("sample times must be non-negative and increasing".into()));
        }
        let gap = target - t;
        if gap > 0.0 {
            let n = ((steps_per_unit as f64 * gap).ceil() as usize).max(1);
            let h = gap / n as f64;
            for k in 0..n {
                let tk = t + k as f64 * h;
                y = rk4::step(&mut f, tk, &y, h).map_err(|_| Error::DomainEscape { last_t: tk })?;
            }
        }
        t = target;
        out.push(y);
    }
    Ok(out)
}

fn steps_for(length: f64, steps_per_unit: usize) -> usize {
    ((steps_per_unit as f64 * length).ceil() as usize).max(2)
}

fn check_unit(m: &MetricField, p: ChartPoint, v: Vec2) -> Result<()> {
    let n = m.norm(p, v)?;
    if (n - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::InvalidArgument(format!("direction has g-norm {n}, expected 1")));
    }
    Ok(())
}

/// Integrates the unit-speed geodesic from `frame.origin` with initial velocity `v`
/// (chart components, g-unit length) over `[0, t_max]` in `n_steps` RK4 steps.
pub fn geodesic_shoot<'m>(
    m: &'m MetricField,
    frame: &NormalFrame,
    v: Vec2,
    t_max: f64,
    n_steps: usize,
) -> Result<GeodesicCurve<'m>> {
    if n_steps < 2 {
        return Err(Error::Step(n_steps));
    }
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument(format!("t_max must be positive, got {t_max}")));
    }
    check_unit(m, frame.origin, v)?;
    let o = frame.origin;
    let mut points = Vec::with_capacity(n_steps + 1);
    let mut tangents = Vec::with_capacity(n_steps + 1);
    let mut param = Vec::with_capacity(n_steps + 1);
    march_uniform(m, [o.x, o.y, v[0], v[1]], t_max, n_steps, |t, y| {
        let p = ChartPoint::new(y[0], y[1]);
        points.push(p);
        tangents.push(TangentTuple::contravariant(p, [y[2], y[3]]));
        param.push(t);
    })?;
    Ok(GeodesicCurve { metric: m, points, tangents, param })
}

/// Endpoint of the geodesic with initial velocity `v` at parameter 1.
fn shoot_end(m: &MetricField, origin: ChartPoint, v: Vec2, steps_per_unit: usize) -> Result<[f64; 4]> {
    let len = m.norm(origin, v)?;
    let n = steps_for(len, steps_per_unit);
    let mut last = [origin.x, origin.y, v[0] / len, v[1] / len];
    march_uniform(m, last, len, n, |_, y| last = *y)?;
    Ok(last)
}

/// `exp_p(v)` with `p = frame.origin` and `v` in chart components.
pub fn exp_map(m: &MetricField, frame: &NormalFrame, v: Vec2, steps_per_unit: usize) -> Result<ChartPoint> {
    if v == [0.0, 0.0] {
        m.metric_at(frame.origin)?;
        return Ok(frame.origin);
    }
    let y = shoot_end(m, frame.origin, v, steps_per_unit)?;
    Ok(ChartPoint::new(y[0], y[1]))
}

/// Samples the geodesic with initial velocity `v` at the given increasing parameter values,
/// optionally parallel-transporting `carried` along it.
pub fn sample_geodesic(
    m: &MetricField,
    origin: ChartPoint,
    v: Vec2,
    carried: Option<Vec2>,
    times: &[f64],
    steps_per_unit: usize,
) -> Result<Vec<GeodesicSample>> {
    let to_sample = |t: f64, y: &[f64]| GeodesicSample {
        t,
        point: ChartPoint::new(y[0], y[1]),
        velocity: [y[2], y[3]],
        carried: (y.len() > 4).then(|| [y[4], y[5]]),
    };
    match carried {
        None => {
            let states = march_through(m, [origin.x, origin.y, v[0], v[1]], times, steps_per_unit)?;
            Ok(times.iter().zip(&states).map(|(t, y)| to_sample(*t, y)).collect())
        }
        Some(w) => {
            let states =
                march_through(m, [origin.x, origin.y, v[0], v[1], w[0], w[1]], times, steps_per_unit)?;
            Ok(times.iter().zip(&states).map(|(t, y)| to_sample(*t, y)).collect())
        }
    }
}

/// Inverse of [`exp_map`] for metrics rotationally symmetric about the frame origin.
///
/// Radial geodesics of such metrics run along chart rays, so the preimage of `q` is found by
/// bracketing the arc length at which the ray through `q` reaches chart radius `|q|`
/// (safeguarded Newton inside a bisection bracket).
pub fn log_map_radial(
    m: &MetricField,
    frame: &NormalFrame,
    q: ChartPoint,
    tol: f64,
    steps_per_unit: usize,
) -> Result<Vec2> {
    if m.radial().is_none() || frame.origin.norm() > 1e-14 {
        return Err(Error::NotRadial(m.name().to_string()));
    }
    m.metric_at(q)?;
    let rho = q.norm();
    if rho == 0.0 {
        return Ok([0.0, 0.0]);
    }
    let d = [q.x / rho, q.y / rho];
    let dn = m.norm(frame.origin, d)?;
    let u = [d[0] / dn, d[1] / dn];

    // chart radius and its rate of change after arc length t
    let radius = |t: f64| -> Result<(f64, f64)> {
        if t == 0.0 {
            return Ok((0.0, 1.0 / dn));
        }
        let y = shoot_end(m, frame.origin, [t * u[0], t * u[1]], steps_per_unit)?;
        let r = y[0].hypot(y[1]);
        Ok((r, (y[0] * y[2] + y[1] * y[3]) / r))
    };

    let mut lo = 0.0;
    let mut hi = rho / dn;
    let mut bracketed = false;
    for _ in 0..64 {
        match radius(hi) {
            Ok((r, _)) if r >= rho => {
                bracketed = true;
                break;
            }
            Ok(_) => {
                lo = hi;
                hi *= 2.0;
            }
            Err(Error::DomainEscape { last_t }) => {
                if last_t <= lo {
                    return Err(Error::Range { value: rho, max: radius(lo)?.0 });
                }
                hi = last_t;
                if let Ok((r, _)) = radius(hi) {
                    if r < rho {
                        return Err(Error::Range { value: rho, max: r });
                    }
                    bracketed = true;
                    break;
                }
            }
            Err(e) => return Err(e),
        }
    }
    if !bracketed {
        return Err(Error::Convergence(64));
    }

    let mut t = 0.5 * (lo + hi);
    for _ in 0..LOG_MAX_ITERATIONS {
        let (r, dr) = radius(t)?;
        if (r - rho).abs() <= tol {
            return Ok([t * u[0], t * u[1]]);
        }
        if r < rho {
            lo = t;
        } else {
            hi = t;
        }
        let newton = t - (r - rho) / dr;
        t = if dr > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::Convergence(LOG_MAX_ITERATIONS))
}

/// Parallel transport of `v0` along `curve`, sampled at the curve's nodes.
///
/// The geodesic is re-integrated jointly with the transported vector on the same step grid,
/// so RK4 stages see exact curve data.
pub fn parallel_transport(curve: &GeodesicCurve<'_>, v0: &TangentTuple) -> Result<Vec<TangentTuple>> {
    if v0.variance() != Variance::Contravariant {
        return Err(Error::InvalidArgument("parallel transport expects a contravariant tuple".into()));
    }
    let start = curve.points[0];
    if v0.base.distance(start) > 1e-12 {
        return Err(Error::InvalidArgument("vector is not based at the curve start".into()));
    }
    let c0 = curve.tangents[0].components;
    let n = curve.len() - 1;
    let t_max = curve.param[n];
    let mut out = Vec::with_capacity(n + 1);
    march_uniform(
        curve.metric,
        [start.x, start.y, c0[0], c0[1], v0.components[0], v0.components[1]],
        t_max,
        n,
        |_, y| out.push(TangentTuple::contravariant(ChartPoint::new(y[0], y[1]), [y[4], y[5]])),
    )?;
    Ok(out)
}

/// Volume element of the metric pulled back to normal coordinates, `√det g_normal`, along the
/// radial geodesic in `direction` (g-unit, chart components) at each arc length in `grid`.
///
/// The Jacobian of `exp` is measured against a parallel-transported orthonormal frame: the
/// radial column is the geodesic tangent, the transverse column a central difference between
/// neighbouring geodesics.
pub fn normal_volume_profile(
    m: &MetricField,
    frame: &NormalFrame,
    direction: Vec2,
    grid: &[f64],
    steps_per_unit: usize,
) -> Result<Vec<f64>> {
    check_unit(m, frame.origin, direction)?;
    let a = frame.coefficients(m, direction)?;
    let w = frame.to_chart([-a[1], a[0]]);
    let central = sample_geodesic(m, frame.origin, direction, Some(w), grid, steps_per_unit)?;
    let mut out = Vec::with_capacity(grid.len());
    for s in &central {
        if s.t == 0.0 {
            out.push(1.0);
            continue;
        }
        let offset = |sign: f64| -> Result<Vec2> {
            let v = [s.t * direction[0] + sign * JACOBI_STEP * w[0], s.t * direction[1] + sign * JACOBI_STEP * w[1]];
            let y = shoot_end(m, frame.origin, v, steps_per_unit)?;
            Ok([y[0], y[1]])
        };
        let plus = offset(1.0)?;
        let minus = offset(-1.0)?;
        let transverse = [(plus[0] - minus[0]) / (2.0 * JACOBI_STEP), (plus[1] - minus[1]) / (2.0 * JACOBI_STEP)];
        let e1 = s.velocity;
        let e2 = s.carried.expect("carried vector");
        let jac = [
            [m.inner(s.point, e1, e1)?, m.inner(s.point, e1, e2)?],
            [m.inner(s.point, transverse, e1)?, m.inner(s.point, transverse, e2)?],
        ];
        out.push(mat2::det(&jac).abs());
    }
    Ok(out)
}
