use std::f64::consts::{FRAC_PI_2, PI};

use distortion_core::distortion::{self, SyntheticPoint};
use distortion_core::geodesic::{self, NormalFrame};
use distortion_core::numerics::quad;
use distortion_core::verification;
use distortion_core::{ChartPoint, Error, KappaField, MetricField, TangentTuple, WarpChart, WarpProfile};
use proptest::prelude::*;

const SPU: usize = 2000;

fn hyperbolic() -> MetricField {
    MetricField::warped(WarpProfile::Sinh, WarpChart::Projection, None)
}

fn origin_frame(m: &MetricField) -> NormalFrame {
    NormalFrame::orthonormalize(m, ChartPoint::ORIGIN).unwrap()
}

#[test]
fn simpson_error_drops_fourfold_per_doubling() {
    let exact = 1.0 - 1.3f64.cos();
    let errs: Vec<f64> = [4, 8, 16, 32].iter().map(|&n| (quad::simpson(f64::sin, 0.0, 1.3, n) - exact).abs()).collect();
    for w in errs.windows(2) {
        assert!(w[0] / w[1] >= 4.0, "{errs:?}");
    }
}

#[test]
fn segment_volume_improves_with_quadrature() {
    let m = MetricField::sphere_projection();
    let p = distortion::chart_distortion_profile(&m, f64::INFINITY, SPU).unwrap();
    let res: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| verification::check_segment_volume(&p, &m, (0.2, 1.1), (0.3, 2.5), n).unwrap().residual)
        .collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 4.0, "{res:?}");
    }
}

#[test]
fn shooting_past_the_rim_escapes() {
    let m = MetricField::sphere_projection();
    let f = origin_frame(&m);
    match geodesic::geodesic_shoot(&m, &f, [1.0, 0.0], 2.0, 4000) {
        Err(Error::DomainEscape { last_t }) => assert!(last_t > 1.5 && last_t < FRAC_PI_2 + 1e-9, "{last_t}"),
        other => panic!("expected escape, got {other:?}"),
    }
}

#[test]
fn distortion_rejects_radii_beyond_r_max() {
    let m = MetricField::sphere_projection();
    let p = distortion::chart_distortion_profile(&m, f64::INFINITY, SPU).unwrap();
    assert!((p.r_max() - 2f64.sqrt()).abs() < 1e-10);
    assert!(matches!(distortion::differential_slip(&p, 1.5), Err(Error::Range { .. })));
    let f = origin_frame(&m);
    let rim = distortion::theta_map(&p, &m, &f, SyntheticPoint::new(0.0, p.r_max()), SPU).unwrap();
    assert!((rim.norm() - 1.0).abs() < 1e-12);
    assert!(distortion::theta_map(&p, &m, &f, SyntheticPoint::new(1.5, 0.0), SPU).is_err());
}

#[test]
fn off_centre_frame_reports_not_radial() {
    let m = MetricField::sphere_projection();
    let f = NormalFrame::orthonormalize(&m, ChartPoint::new(0.2, 0.0)).unwrap();
    assert!(matches!(geodesic::log_map_radial(&m, &f, ChartPoint::new(0.5, 0.1), 1e-12, SPU), Err(Error::NotRadial(_))));
}

#[test]
fn normal_chart_distortion_is_identity_on_the_plane() {
    let m = MetricField::warped(WarpProfile::Flat, WarpChart::Normal, None);
    let p = distortion::chart_distortion_profile(&m, 3.0, SPU).unwrap();
    for r in [0.0, 0.7, 1.9, 3.0] {
        assert!((p.r_hat(r).unwrap() - r).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn theta_rays_follow_geodesics(r in 0.05f64..1.35, phi in 0.0f64..(2.0 * PI)) {
        let m = MetricField::sphere_projection();
        let f = origin_frame(&m);
        let p = distortion::chart_distortion_profile(&m, f64::INFINITY, SPU).unwrap();
        let s = SyntheticPoint::new(r * phi.cos(), r * phi.sin());
        let via_chart = distortion::theta_map(&p, &m, &f, s, SPU).unwrap();
        let rp = p.r_prime(r).unwrap();
        let v = f.to_chart([rp * phi.cos(), rp * phi.sin()]);
        let via_exp = geodesic::exp_map(&m, &f, v, SPU).unwrap();
        prop_assert!(via_chart.distance(via_exp) < 1e-9, "{via_chart:?} {via_exp:?}");
    }

    #[test]
    fn exp_log_round_trip(rho in 0.01f64..0.95, phi in 0.0f64..(2.0 * PI), sphere in any::<bool>()) {
        let m = if sphere { MetricField::sphere_projection() } else { hyperbolic() };
        let f = origin_frame(&m);
        let q = ChartPoint::new(rho * phi.cos(), rho * phi.sin());
        let v = geodesic::log_map_radial(&m, &f, q, 1e-13, SPU).unwrap();
        let back = geodesic::exp_map(&m, &f, v, SPU).unwrap();
        prop_assert!(back.distance(q) < 1e-9, "{back:?} {q:?}");
        let len = m.norm(f.origin, v).unwrap();
        let exact = if sphere { rho.asin() } else { rho.asinh() };
        prop_assert!((len - exact).abs() < 1e-9);
    }

    #[test]
    fn kappa_squares_to_inverse_metric(x in -0.69f64..0.69, y in -0.69f64..0.69) {
        for m in [MetricField::sphere_projection(), hyperbolic()] {
            let k = KappaField::new(&m).unwrap();
            prop_assert!(k.gauge_residual(ChartPoint::new(x, y)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn distortion_is_monotone_with_positive_slip(a in 0.0f64..1.4, b in 0.0f64..1.4) {
        let m = MetricField::sphere_projection();
        let p = distortion::chart_distortion_profile(&m, f64::INFINITY, 400).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(p.r_hat(lo).unwrap() <= p.r_hat(hi).unwrap());
        prop_assert!(p.r_prime(lo).unwrap() <= p.r_prime(hi).unwrap());
        prop_assert!(p.slip(lo).unwrap() >= 1.0 - 1e-12);
        let back = p.inverse(p.r_hat(hi).unwrap()).unwrap();
        prop_assert!((back - hi).abs() < 1e-8);
    }

    #[test]
    fn transport_preserves_length(phi in 0.0f64..(2.0 * PI), w in 0.0f64..(2.0 * PI)) {
        let m = hyperbolic();
        let f = origin_frame(&m);
        let v = f.to_chart([phi.cos(), phi.sin()]);
        let curve = geodesic::geodesic_shoot(&m, &f, v, 1.5, 600).unwrap();
        let carried = geodesic::parallel_transport(&curve, &TangentTuple::contravariant(f.origin, f.to_chart([w.cos(), w.sin()]))).unwrap();
        for (p, t) in curve.points().iter().zip(&carried) {
            prop_assert!((m.norm(*p, t.components).unwrap() - 1.0).abs() < 1e-9);
        }
        let angle = m.inner(curve.end(), curve.tangents()[curve.len() - 1].components, carried[carried.len() - 1].components).unwrap();
        prop_assert!((angle - (w - phi).cos()).abs() < 1e-9);
    }

    #[test]
    fn metrics_are_symmetric_positive_definite(x in -0.99f64..0.99, y in -0.99f64..0.99) {
        let p = ChartPoint::new(x, y);
        let m = MetricField::sphere_projection();
        prop_assume!(m.contains(p));
        let g = m.metric_at(p).unwrap();
        prop_assert_eq!(g[0][1], g[1][0]);
        prop_assert!(g[0][0] > 0.0 && g[0][0] * g[1][1] - g[0][1] * g[1][0] > 0.0);
    }
}
