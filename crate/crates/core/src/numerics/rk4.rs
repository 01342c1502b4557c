//! Classical fixed-step fourth-order Runge–Kutta.

/// One RK4 step of size `h` from `(t, y)`.
///
/// The right-hand side may fail (for example when a stage leaves the chart);
/// the first failure aborts the step.
pub fn step<const N: usize, E>(
    f: &mut impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t: f64,
    y: &[f64; N],
    h: f64,
) -> Result<[f64; N], E> {
    let k1 = f(t, y)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(t + h, &axpy(y, h, &k3))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrates from `t0` to `t1` in `n` equal steps, returning every node (n + 1 states).
pub fn integrate<const N: usize, E>(
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
    t0: f64,
    t1: f64,
    y0: [f64; N],
    n: usize,
) -> Result<Vec<[f64; N]>, E> {
    let h = (t1 - t0) / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(y0);
    let mut y = y0;
    for k in 0..n {
        y = step(&mut f, t0 + k as f64 * h, &y, h)?;
        out.push(y);
    }
    Ok(out)
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn exp_error(n: usize) -> f64 {
        let nodes = integrate(|_, y: &[f64; 1]| Ok::<_, Infallible>([y[0]]), 0.0, 1.0, [1.0], n).unwrap();
        (nodes[n][0] - 1.0_f64.exp()).abs()
    }

    #[test]
    fn fourth_order_on_exponential() {
        let ratio = exp_error(10) / exp_error(20);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn exact_for_cubic_quadrature() {
        let nodes = integrate(|t, _: &[f64; 1]| Ok::<_, Infallible>([3.0 * t * t]), 0.0, 2.0, [0.0], 3).unwrap();
        assert!((nodes[3][0] - 8.0).abs() < 1e-14);
    }

    #[test]
    fn stage_failure_propagates() {
        let r = integrate(|t, _: &[f64; 1]| if t > 0.5 { Err("out") } else { Ok([1.0]) }, 0.0, 1.0, [0.0], 4);
        assert_eq!(r.unwrap_err(), "out");
    }
}
