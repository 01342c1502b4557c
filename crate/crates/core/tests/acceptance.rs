//! End-to-end acceptance criteria. Prints one line per criterion and exits non-zero if any
//! fails. Run with `cargo test -p distortion-core --test acceptance`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use distortion_core::distortion::{self, LengthProfile, RadialProfile};
use distortion_core::metric::RadialFn;
use distortion_core::verification::{self, CheckRecord, MOLLIFIER_EPS};
use distortion_core::{ChartPoint, KappaField, MetricField, NormalFrame, Result, WarpChart, WarpProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: usize = 2000;
const QUAD_N: usize = 512;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    residual: f64,
    tolerance: f64,
    passed: bool,
    note: String,
}

impl Outcome {
    fn below(residual: f64, tolerance: f64) -> Self {
        Self { residual, tolerance, passed: residual < tolerance, note: String::new() }
    }

    fn from_records(records: &[CheckRecord]) -> Self {
        let worst = records
            .iter()
            .max_by(|a, b| (a.residual / a.tolerance.max(1e-300)).total_cmp(&(b.residual / b.tolerance.max(1e-300))))
            .expect("records");
        let failed: Vec<&str> = records.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        let errors: Vec<&str> = records.iter().filter_map(|r| r.error.as_deref()).collect();
        Self {
            residual: worst.residual,
            tolerance: worst.tolerance,
            passed: failed.is_empty(),
            note: if failed.is_empty() { String::new() } else { format!("failed: {} {}", failed.join(", "), errors.join("; ")) },
        }
    }

    fn and(self, other: Outcome) -> Self {
        let passed = self.passed && other.passed;
        let note = [self.note, other.note].into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>().join("; ");
        let (residual, tolerance) = if other.residual / other.tolerance > self.residual / self.tolerance {
            (other.residual, other.tolerance)
        } else {
            (self.residual, self.tolerance)
        };
        Self { residual, tolerance, passed, note }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn max_err(grid: &[f64], f: impl Fn(f64) -> Result<f64>, exact: impl Fn(f64) -> f64) -> Result<f64> {
    grid.iter().try_fold(0.0_f64, |acc, &x| Ok(acc.max((f(x)? - exact(x)).abs())))
}

fn sphere_chart_profile(span: f64) -> Result<LengthProfile> {
    distortion::solve_length_preserving(&|r| 1.0 / (1.0 - r * r), 1.0, span, STEPS)
}

fn sphere_distortion() -> Result<RadialProfile> {
    let g: RadialFn = Arc::new(|s: f64| s.sin() / s);
    Ok(distortion::solve_volume_preserving(g, FRAC_PI_2, 2.0, STEPS)?.with_chart(sphere_chart_profile(FRAC_PI_2)?))
}

fn exp_closed_form() -> Result<Outcome> {
    let p = sphere_chart_profile(1.5)?;
    Ok(Outcome::below(max_err(&linspace(0.0, 1.5, 100), |r| p.r_hat(r), f64::sin)?, 1e-8))
}

fn distortion_closed_form() -> Result<Outcome> {
    let p = sphere_distortion()?;
    let grid = linspace(0.0, 1.4, 100);
    let forward = max_err(&grid, |r| p.r_hat(r), |r| r * (1.0 - r * r / 4.0).sqrt())?;
    let hats = linspace(0.0, 0.999, 100);
    let inverse = max_err(&hats, |h| distortion::inverse_profile(&p, h), |h| SQRT_2 * (1.0 - (1.0 - h * h).sqrt()).sqrt())?;
    let rim = (distortion::inverse_profile(&p, 1.0)? - SQRT_2).abs();
    Ok(Outcome::below(forward.max(inverse).max(rim), 1e-8))
}

fn slip_closed_form() -> Result<Outcome> {
    let p = sphere_distortion()?;
    let at_one = (distortion::differential_slip(&p, 1.0)? - 2.0 / 3f64.sqrt()).abs();
    let near_zero = (distortion::differential_slip(&p, 1e-9)? - 1.0).abs();
    Ok(Outcome::below(at_one, 1e-8).and(Outcome::below(near_zero, 1e-6)))
}

fn total_volume() -> Result<Outcome> {
    let hemisphere = MetricField::sphere_projection();
    let p = distortion::chart_distortion_profile(&hemisphere, f64::INFINITY, STEPS)?;
    let area = Outcome::below((PI * p.r_max() * p.r_max() - 2.0 * PI).abs() / (2.0 * PI), 1e-6);
    let quad = Outcome::from_records(&[verification::check_total_volume(&p, &hemisphere, QUAD_N)?]);

    let sphere = MetricField::warped(WarpProfile::Sin, WarpChart::Normal, None);
    let whole = distortion::chart_distortion_profile(&sphere, f64::INFINITY, STEPS)?;
    let radius = Outcome::below((whole.r_max() - 2.0).abs(), 1e-6);
    let extended = Outcome::below((PI * whole.r_max() * whole.r_max() - 4.0 * PI).abs() / (4.0 * PI), 1e-6);
    let quad_whole = Outcome::from_records(&[verification::check_total_volume(&whole, &sphere, QUAD_N)?]);
    Ok(area.and(quad).and(radius).and(extended).and(quad_whole))
}

fn segment_volume() -> Result<Outcome> {
    let m = MetricField::sphere_projection();
    let p = distortion::chart_distortion_profile(&m, f64::INFINITY, STEPS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let top = 0.99 * p.r_max();
    let mut records = Vec::new();
    for _ in 0..10 {
        let (u, v): (f64, f64) = (rng.gen(), rng.gen());
        let phi0 = 2.0 * PI * rng.gen::<f64>();
        let dphi = 2.0 * PI * rng.gen::<f64>();
        records.push(verification::check_segment_volume(&p, &m, (top * u.min(v), top * u.max(v)), (phi0, phi0 + dphi), QUAD_N)?);
    }
    Ok(Outcome::from_records(&records))
}

fn kappa_gauge() -> Result<Outcome> {
    let m = MetricField::sphere_projection();
    let k = KappaField::new(&m)?;
    let gauge = verification::check_kappa_gauge(&k, &verification::sample_disk(0.95, 500, 23))?;
    let polar = verification::check_kappa_polar(&k, ChartPoint::new(0.4, 0.3))?;
    Ok(Outcome::from_records(&[gauge, polar]))
}

fn gauss_lemma() -> Result<Outcome> {
    let grid = linspace(0.0, 1.4, 100);
    let mut records = Vec::new();
    for m in [MetricField::sphere_projection(), MetricField::warped(WarpProfile::Sinh, WarpChart::Projection, None)] {
        let frame = NormalFrame::orthonormalize(&m, ChartPoint::ORIGIN)?;
        for d in [[1.0, 0.0], [0.6, 0.8], [-0.28, -0.96]] {
            records.push(verification::check_gauss_classical(&m, &frame, frame.to_chart(d), &grid, STEPS)?);
        }
    }
    Ok(Outcome::from_records(&records))
}

fn rk4_order() -> Result<Outcome> {
    let m = MetricField::sphere_projection();
    let frame = NormalFrame::orthonormalize(&m, ChartPoint::ORIGIN)?;
    Ok(Outcome::from_records(&[verification::check_rk4_order(&m, &frame, &f64::sin, 1.4)?]))
}

fn transport() -> Result<Outcome> {
    let m = MetricField::sphere_projection();
    let frame = NormalFrame::orthonormalize(&m, ChartPoint::ORIGIN)?;
    let dirs = [[1.0, 0.0], [0.6, 0.8], [0.0, 1.0], [-0.8, 0.6], [-0.28, -0.96]];
    Ok(Outcome::from_records(&[verification::check_transport(&m, &frame, &dirs, 1.4, STEPS)?]))
}

fn mollifier() -> Result<Outcome> {
    let m = MetricField::sphere_projection();
    let p = distortion::chart_distortion_profile(&m, f64::INFINITY, STEPS)?;
    let mut records = Vec::new();
    for q in [ChartPoint::ORIGIN, ChartPoint::new(0.5, 0.0)] {
        let mc = verification::check_mollifier_delta(&p, &m, q, &MOLLIFIER_EPS, STEPS)?;
        records.push(mc.mass);
        records.push(mc.trend);
    }
    Ok(Outcome::from_records(&records))
}

fn hyperbolic_oracle() -> Result<Outcome> {
    let g: RadialFn = Arc::new(|s: f64| if s == 0.0 { 1.0 } else { s.sinh() / s });
    let chart = distortion::solve_length_preserving(&|r| 1.0 / (1.0 + r * r), f64::INFINITY, 2.0, STEPS)?;
    let p = distortion::solve_volume_preserving(g, f64::INFINITY, 2.0, STEPS)?.with_chart(chart);
    let err = max_err(&linspace(0.0, 2.0, 100), |r| p.r_hat(r), |r| r * (1.0 + r * r / 4.0).sqrt())?;
    Ok(Outcome::below(err, 1e-8))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exponential map r_hat = sin r'", exp_closed_form),
        ("sphere distortion and its inverse", distortion_closed_form),
        ("sphere differential slip", slip_closed_form),
        ("total volume, hemisphere and whole sphere", total_volume),
        ("segment volume, 10 random segments", segment_volume),
        ("kappa gauge and polar non-diagonality", kappa_gauge),
        ("gauss lemma, sphere and hyperbolic", gauss_lemma),
        ("rk4 fourth-order convergence", rk4_order),
        ("parallel transport of a frame", transport),
        ("mollifier mass and trend", mollifier),
        ("hyperbolic distortion", hyperbolic_oracle),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run().unwrap_or_else(|e| Outcome {
            residual: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            note: format!("error: {e}"),
        });
        if !outcome.passed {
            failures += 1;
        }
        println!(
            "{:>2} {} {:<44} residual {:.3e} tolerance {:e} ({:.0} ms) {}",
            k + 1,
            if outcome.passed { "PASS" } else { "FAIL" },
            name,
            outcome.residual,
            outcome.tolerance,
            t.elapsed().as_secs_f64() * 1e3,
            outcome.note,
        );
    }
    println!("{} of {} criteria passed in {:.1} s", criteria.len() - failures, criteria.len(), start.elapsed().as_secs_f64());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
