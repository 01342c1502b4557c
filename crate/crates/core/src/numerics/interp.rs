//! Piecewise cubic Hermite interpolation with Fritsch–Carlson slope limiting.
//!
//! Monotone data stay monotone between nodes, which is what lets radial
//! profiles be inverted by root bracketing.

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl MonotoneCubic {
    /// PCHIP-style interpolant: slopes from weighted harmonic means of the secants.
    ///
    /// `xs` must be strictly increasing and have at least two entries.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_nodes(&xs, &ys);
        let ds = pchip_slopes(&xs, &ys);
        Self { xs, ys, ds }
    }

    /// Hermite interpolant through known slopes.
    ///
    /// Non-finite slopes are replaced by the PCHIP estimate, then every interval
    /// is limited so that the interpolant is monotone wherever the data are.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Self {
        assert_nodes(&xs, &ys);
        assert_eq!(ds.len(), xs.len());
        let fallback = pchip_slopes(&xs, &ys);
        for (d, f) in ds.iter_mut().zip(&fallback) {
            if !d.is_finite() {
                *d = *f;
            }
        }
        limit_slopes(&xs, &ys, &mut ds);
        Self { xs, ys, ds }
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value at `x`, or `None` outside the node range.
    pub fn value(&self, x: f64) -> Option<f64> {
        let i = self.interval(x)?;
        Some(self.hermite(i, x).0)
    }

    /// First derivative at `x`, or `None` outside the node range.
    pub fn derivative(&self, x: f64) -> Option<f64> {
        let i = self.interval(x)?;
        Some(self.hermite(i, x).1)
    }

    /// Solves `value(x) = y` for data that increase monotonically.
    pub fn inverse(&self, y: f64) -> Option<f64> {
        let n = self.ys.len();
        if !(y >= self.ys[0] && y <= self.ys[n - 1]) {
            return None;
        }
        // first node with ys >= y
        let j = self.ys.partition_point(|v| *v < y);
        if j == 0 {
            return Some(self.xs[0]);
        }
        if self.ys[j] == y {
            return Some(self.xs[j]);
        }
        let i = j - 1;
        let (mut lo, mut hi) = (self.xs[i], self.xs[j]);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.hermite(i, mid).0 < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }

    fn interval(&self, x: f64) -> Option<usize> {
        let (a, b) = self.x_range();
        if !(x >= a && x <= b) {
            return None;
        }
        let j = self.xs.partition_point(|v| *v <= x);
        Some(j.clamp(1, self.xs.len() - 1) - 1)
    }

    fn hermite(&self, i: usize, x: f64) -> (f64, f64) {
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (m0, m1) = (self.ds[i] * h, self.ds[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let dh00 = 6.0 * t2 - 6.0 * t;
        let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
        let dh01 = -6.0 * t2 + 6.0 * t;
        let dh11 = 3.0 * t2 - 2.0 * t;
        let slope = (dh00 * y0 + dh10 * m0 + dh01 * y1 + dh11 * m1) / h;
        (value, slope)
    }
}

fn assert_nodes(xs: &[f64], ys: &[f64]) {
    assert!(xs.len() >= 2, "need at least two nodes");
    assert_eq!(xs.len(), ys.len());
    assert!(xs.windows(2).all(|w| w[1] > w[0]), "nodes must be strictly increasing");
}

fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

// Three-point one-sided estimate, clipped to keep the end interval shape-preserving.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

fn limit_slopes(xs: &[f64], ys: &[f64], ds: &mut [f64]) {
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == 0.0 {
            ds[i] = 0.0;
            ds[i + 1] = 0.0;
            continue;
        }
        if ds[i] * delta < 0.0 {
            ds[i] = 0.0;
        }
        if ds[i + 1] * delta < 0.0 {
            ds[i + 1] = 0.0;
        }
        let a = ds[i] / delta;
        let b = ds[i + 1] / delta;
        let norm = a.hypot(b);
        if norm > 3.0 {
            let tau = 3.0 / norm;
            ds[i] = tau * a * delta;
            ds[i + 1] = tau * b * delta;
        }
    }
}
