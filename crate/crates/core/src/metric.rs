//! 2D Riemannian metrics given in a coordinate chart, with pointwise tensor algebra.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::mat2::{self, Mat2, Vec2};

/// Relative central-difference step used for metric derivatives.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Volume element beyond which a chart is treated as blown up.
pub const BLOW_UP_VOLUME: f64 = 1e8;

/// `gamma[k][i][j]` holds Γ^k_ij.
pub type Gamma = [[[f64; 2]; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChartPoint {
    pub x: f64,
    pub y: f64,
}

impl ChartPoint {
    pub const ORIGIN: ChartPoint = ChartPoint { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_array(a: Vec2) -> Self {
        Self { x: a[0], y: a[1] }
    }

    pub fn to_array(self) -> Vec2 {
        [self.x, self.y]
    }

    /// Euclidean chart radius.
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn offset(self, v: Vec2, s: f64) -> Self {
        Self::new(self.x + s * v[0], self.y + s * v[1])
    }

    pub fn distance(self, other: ChartPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Contravariant,
    Covariant,
}

/// Component tuple of a tangent vector or covector at a chart point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentTuple {
    pub base: ChartPoint,
    pub components: Vec2,
    variance: Variance,
}

impl TangentTuple {
    pub fn contravariant(base: ChartPoint, components: Vec2) -> Self {
        Self { base, components, variance: Variance::Contravariant }
    }

    pub fn covariant(base: ChartPoint, components: Vec2) -> Self {
        Self { base, components, variance: Variance::Covariant }
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }
}

/// Region of the chart on which a metric is defined. All regions are open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Plane,
    /// Open disk about the chart origin.
    Disk { radius: f64 },
    /// `min < x < max`, `y` unrestricted (polar-type charts).
    Strip { min: f64, max: f64 },
}

impl Domain {
    pub fn contains(&self, p: ChartPoint) -> bool {
        if !p.is_finite() {
            return false;
        }
        match *self {
            Domain::Plane => true,
            Domain::Disk { radius } => p.norm() < radius,
            Domain::Strip { min, max } => p.x > min && p.x < max,
        }
    }

    /// Radius of the largest origin-centred disk inside the domain.
    pub fn radius(&self) -> f64 {
        match *self {
            Domain::Plane => f64::INFINITY,
            Domain::Disk { radius } => radius,
            Domain::Strip { .. } => 0.0,
        }
    }
}

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Polar components of a metric that is rotationally symmetric about the chart origin:
/// `ds² = g_rr(r̂) dr̂² + g_φφ(r̂) dφ²` with `r̂` the Euclidean chart radius.
#[derive(Clone)]
pub struct RadialChart {
    g_rr: RadialFn,
    g_phiphi: RadialFn,
    radius: f64,
}

impl RadialChart {
    pub fn new(g_rr: RadialFn, g_phiphi: RadialFn, radius: f64) -> Self {
        Self { g_rr, g_phiphi, radius }
    }

    pub fn g_rr(&self, r_hat: f64) -> f64 {
        (self.g_rr)(r_hat)
    }

    pub fn g_phiphi(&self, r_hat: f64) -> f64 {
        (self.g_phiphi)(r_hat)
    }

    /// Chart radius bound; `INFINITY` for charts covering the plane.
    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Warping function `f` of `ds² = dr′² + f(r′)² dφ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpProfile {
    /// `f(r′) = r′`, the plane.
    Flat,
    /// `f(r′) = sin r′`, the unit sphere.
    Sin,
    /// `f(r′) = sinh r′`, the hyperbolic plane.
    Sinh,
}

impl WarpProfile {
    pub fn f(self, r: f64) -> f64 {
        match self {
            WarpProfile::Flat => r,
            WarpProfile::Sin => r.sin(),
            WarpProfile::Sinh => r.sinh(),
        }
    }

    /// `f(r)/r`, continuous at 0.
    pub fn ratio(self, r: f64) -> f64 {
        if r == 0.0 {
            1.0
        } else {
            self.f(r) / r
        }
    }

    /// Gaussian curvature sign.
    fn curvature(self) -> f64 {
        match self {
            WarpProfile::Flat => 0.0,
            WarpProfile::Sin => 1.0,
            WarpProfile::Sinh => -1.0,
        }
    }
}

/// Which chart a warped-product metric is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpChart {
    /// Chart radius `r̂ = f(r′)`: the orthogonal projection onto the tangent plane.
    Projection,
    /// Chart radius `r̂ = r′`: geodesic normal coordinates.
    Normal,
}

type TensorFn = Arc<dyn Fn(ChartPoint) -> Mat2 + Send + Sync>;
type GammaFn = Arc<dyn Fn(ChartPoint) -> Gamma + Send + Sync>;

/// A metric tensor field `g_ij` on a chart domain.
///
/// Cloning is cheap; the component functions are shared.
#[derive(Clone)]
pub struct MetricField {
    name: String,
    domain: Domain,
    tensor: TensorFn,
    christoffel: Option<GammaFn>,
    radial: Option<RadialChart>,
}

impl fmt::Debug for MetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricField")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("analytic_christoffel", &self.christoffel.is_some())
            .field("radial", &self.radial.is_some())
            .finish()
    }
}

impl MetricField {
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        tensor: impl Fn(ChartPoint) -> Mat2 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), domain, tensor: Arc::new(tensor), christoffel: None, radial: None }
    }

    /// Supplies closed-form Christoffel symbols used by the geodesic engine instead of
    /// finite differences.
    pub fn with_christoffel(mut self, gamma: impl Fn(ChartPoint) -> Gamma + Send + Sync + 'static) -> Self {
        self.christoffel = Some(Arc::new(gamma));
        self
    }

    /// Declares rotational symmetry about the chart origin.
    pub fn with_radial(mut self, radial: RadialChart) -> Self {
        self.radial = Some(radial);
        self
    }

    pub fn euclidean() -> Self {
        Self::euclidean_disk(f64::INFINITY)
    }

    pub fn euclidean_disk(radius: f64) -> Self {
        let domain = if radius.is_finite() { Domain::Disk { radius } } else { Domain::Plane };
        Self::new("euclidean", domain, |_| mat2::IDENTITY)
            .with_christoffel(|_| [[[0.0; 2]; 2]; 2])
            .with_radial(RadialChart::new(Arc::new(|_| 1.0), Arc::new(|r| r * r), radius))
    }

    /// The upper unit hemisphere in orthogonal projection coordinates (x, y).
    pub fn sphere_projection() -> Self {
        let mut m = Self::warped(WarpProfile::Sin, WarpChart::Projection, None);
        m.name = "sphere_projection".into();
        m
    }

    /// The hemisphere chart in its polar form: coordinates are `(r̂, φ)` stored as `(x, y)`.
    pub fn sphere_polar() -> Self {
        Self::new("sphere_polar", Domain::Strip { min: 0.0, max: 1.0 }, |p| {
            let r = p.x;
            [[1.0 / (1.0 - r * r), 0.0], [0.0, r * r]]
        })
    }

    /// Warped product `dr′² + f(r′)² dφ²` in the chosen Cartesian-type chart.
    ///
    /// `radius` restricts the chart disk; it is clipped to the largest radius on which the
    /// chart is valid (1 for the spherical projection, π for spherical normal coordinates).
    pub fn warped(profile: WarpProfile, chart: WarpChart, radius: Option<f64>) -> Self {
        let natural = match (profile, chart) {
            (WarpProfile::Sin, WarpChart::Projection) => 1.0,
            (WarpProfile::Sin, WarpChart::Normal) => std::f64::consts::PI,
            _ => f64::INFINITY,
        };
        let radius = radius.map_or(natural, |r| r.min(natural));
        let domain = if radius.is_finite() { Domain::Disk { radius } } else { Domain::Plane };
        let label = match profile {
            WarpProfile::Flat => "flat",
            WarpProfile::Sin => "sin",
            WarpProfile::Sinh => "sinh",
        };
        match chart {
            WarpChart::Projection => {
                // g = I + σ x xᵀ / (1 − σ r̂²) for curvature σ ∈ {−1, 0, 1}
                let s = profile.curvature();
                let name = format!("warped_{label}_projection");
                Self::new(name, domain, move |p| {
                    let c = s / (1.0 - s * (p.x * p.x + p.y * p.y));
                    [[1.0 + c * p.x * p.x, c * p.x * p.y], [c * p.x * p.y, 1.0 + c * p.y * p.y]]
                })
                .with_christoffel(move |p| {
                    let x = [p.x, p.y];
                    let c = s / (1.0 - s * (p.x * p.x + p.y * p.y));
                    let mut gamma = [[[0.0; 2]; 2]; 2];
                    for (k, gk) in gamma.iter_mut().enumerate() {
                        for i in 0..2 {
                            for j in 0..2 {
                                let delta = if i == j { 1.0 } else { 0.0 };
                                gk[i][j] = s * x[k] * (delta + c * x[i] * x[j]);
                            }
                        }
                    }
                    gamma
                })
                .with_radial(RadialChart::new(
                    Arc::new(move |r| 1.0 / (1.0 - s * r * r)),
                    Arc::new(|r| r * r),
                    radius,
                ))
            }
            WarpChart::Normal => {
                let name = format!("warped_{label}_normal");
                Self::new(name, domain, move |p| {
                    let r2 = p.x * p.x + p.y * p.y;
                    if r2 == 0.0 {
                        return mat2::IDENTITY;
                    }
                    let q = profile.ratio(r2.sqrt());
                    let q2 = q * q;
                    let c = (1.0 - q2) / r2;
                    [[q2 + c * p.x * p.x, c * p.x * p.y], [c * p.x * p.y, q2 + c * p.y * p.y]]
                })
                .with_radial(RadialChart::new(
                    Arc::new(|_| 1.0),
                    Arc::new(move |r| profile.f(r).powi(2)),
                    radius,
                ))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn radial(&self) -> Option<&RadialChart> {
        self.radial.as_ref()
    }

    pub fn has_analytic_christoffel(&self) -> bool {
        self.christoffel.is_some()
    }

    pub fn contains(&self, p: ChartPoint) -> bool {
        self.domain.contains(p)
    }

    fn check(&self, p: ChartPoint) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(Error::Domain { metric: self.name.clone(), x: p.x, y: p.y })
        }
    }

    /// `g_ij(p)`.
    pub fn metric_at(&self, p: ChartPoint) -> Result<Mat2> {
        self.check(p)?;
        Ok((self.tensor)(p))
    }

    /// `g^ij(p)`.
    pub fn inverse_metric_at(&self, p: ChartPoint) -> Result<Mat2> {
        let g = self.metric_at(p)?;
        if mat2::det(&g) <= 0.0 {
            return Err(Error::SingularMetric { x: p.x, y: p.y });
        }
        mat2::inverse(&g).ok_or(Error::SingularMetric { x: p.x, y: p.y })
    }

    /// `√det g(p)`.
    pub fn volume_element_at(&self, p: ChartPoint) -> Result<f64> {
        let g = self.metric_at(p)?;
        let d = mat2::det(&g);
        if !(d > 0.0) {
            return Err(Error::SingularMetric { x: p.x, y: p.y });
        }
        Ok(d.sqrt())
    }

    /// Christoffel symbols from central differences of the metric.
    ///
    /// The step along coordinate `l` is `fd_step · max(1, |p_l|)`; every stencil point must
    /// lie inside the domain.
    pub fn christoffel_at(&self, p: ChartPoint, fd_step: f64) -> Result<ChristoffelTensor> {
        let g_inv = self.inverse_metric_at(p)?;
        // dg[l][i][j] = ∂_l g_ij
        let mut dg = [[[0.0; 2]; 2]; 2];
        for (l, dgl) in dg.iter_mut().enumerate() {
            let mut e = [0.0; 2];
            let h = fd_step * p.to_array()[l].abs().max(1.0);
            e[l] = 1.0;
            let plus = self.metric_at(p.offset(e, h))?;
            let minus = self.metric_at(p.offset(e, -h))?;
            for i in 0..2 {
                for j in 0..2 {
                    dgl[i][j] = (plus[i][j] - minus[i][j]) / (2.0 * h);
                }
            }
        }
        let mut gamma = [[[0.0; 2]; 2]; 2];
        for (k, gk) in gamma.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    gk[i][j] = (0..2)
                        .map(|l| 0.5 * g_inv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]))
                        .sum();
                }
            }
        }
        Ok(ChristoffelTensor { base: p, gamma })
    }

    /// Christoffel symbols used for integration: closed form when the metric provides one,
    /// otherwise [`christoffel_at`](Self::christoffel_at) with the default step.
    pub fn connection_at(&self, p: ChartPoint) -> Result<ChristoffelTensor> {
        match &self.christoffel {
            Some(gamma) => {
                self.check(p)?;
                Ok(ChristoffelTensor { base: p, gamma: gamma(p) })
            }
            None => self.christoffel_at(p, DEFAULT_FD_STEP),
        }
    }

    /// `g(a, b)` for contravariant components at `p`.
    pub fn inner(&self, p: ChartPoint, a: Vec2, b: Vec2) -> Result<f64> {
        Ok(mat2::bilinear(&self.metric_at(p)?, &a, &b))
    }

    pub fn norm(&self, p: ChartPoint, v: Vec2) -> Result<f64> {
        Ok(self.inner(p, v, v)?.sqrt())
    }

    /// Index lowering `v_i = g_ik v^k`.
    pub fn flat(&self, v: &TangentTuple) -> Result<TangentTuple> {
        if v.variance() != Variance::Contravariant {
            return Err(Error::InvalidArgument("flat expects a contravariant tuple".into()));
        }
        let g = self.metric_at(v.base)?;
        Ok(TangentTuple::covariant(v.base, mat2::apply(&g, &v.components)))
    }

    /// Index raising `v^i = g^ik v_k`.
    pub fn sharp(&self, v: &TangentTuple) -> Result<TangentTuple> {
        if v.variance() != Variance::Covariant {
            return Err(Error::InvalidArgument("sharp expects a covariant tuple".into()));
        }
        let g_inv = self.inverse_metric_at(v.base)?;
        Ok(TangentTuple::contravariant(v.base, mat2::apply(&g_inv, &v.components)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelTensor {
    pub base: ChartPoint,
    pub gamma: Gamma,
}

impl ChristoffelTensor {
    /// `Γ^k_ij a^i b^j`
    pub fn contract(&self, a: Vec2, b: Vec2) -> Vec2 {
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *o += self.gamma[k][i][j] * a[i] * b[j];
                }
            }
        }
        out
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        (0..2).map(|k| (self.gamma[k][0][1] - self.gamma[k][1][0]).abs()).fold(0.0, f64::max)
    }
}
