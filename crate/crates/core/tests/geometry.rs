use std::f64::consts::PI;

use ijd_core::geometry::{
    classify_direction, closest_point, distance_to_closure, invert_chart, tangent_frame, AffineChart, BallAnnulusChart,
    Chart, CircleChart, Direction,
};
use ijd_core::Vector;
use proptest::prelude::*;

fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

proptest! {
    #[test]
    fn circle_inversion_recovers_angle(t in 0.0..2.0 * PI, nudge in -0.3f64..0.3) {
        let c = CircleChart::unit();
        let y = v(&[t]);
        let inv = invert_chart(&c, &c.phi(&y), &v(&[t + nudge])).unwrap();
        prop_assert!(inv.residual < 1e-12);
        prop_assert!(c.domain().difference(&inv.y, &y).norm() < 1e-10);
    }

    #[test]
    fn annulus_closest_point_recovers_parameter(s in 0.0..0.98f64, t in 0.0..2.0 * PI) {
        let c = BallAnnulusChart::new(1.0, 0.02).unwrap();
        let y = v(&[s, t]);
        let inv = closest_point(&c, &c.phi(&y)).unwrap();
        prop_assert!(inv.residual < 1e-10);
        prop_assert!(c.domain().difference(&inv.y, &y).norm() < 1e-8);
    }

    #[test]
    fn distance_off_the_circle_is_radial(r in 0.2..3.0f64, t in 0.0..2.0 * PI) {
        let h = v(&[r * t.cos(), r * t.sin()]);
        let d = distance_to_closure(&CircleChart::unit(), &h).unwrap();
        prop_assert!((d - (r - 1.0).abs()).abs() < 1e-9);
    }

    #[test]
    fn projector_is_symmetric_and_idempotent(s in 0.0..0.98f64, t in 0.0..2.0 * PI) {
        let c = BallAnnulusChart::new(1.0, 0.02).unwrap();
        let f = tangent_frame(&c, &v(&[s, t])).unwrap();
        let p = f.projector();
        prop_assert!((&p * &p - &p).abs().max() < 1e-12);
        prop_assert!((&p - p.transpose()).abs().max() < 1e-12);
    }
}

#[test]
fn closure_distance_outside_the_ball() {
    let c = BallAnnulusChart::new(1.0, 0.02).unwrap();
    assert!((distance_to_closure(&c, &v(&[0.0, 1.5])).unwrap() - 0.5).abs() < 1e-9);
    assert!(distance_to_closure(&c, &v(&[0.3, 0.4])).unwrap() < 1e-10);
}

#[test]
fn cone_distance_and_directions() {
    let cone = AffineChart::cone(&[v(&[1.0, 0.0]), v(&[0.0, 1.0])]).unwrap();
    assert!((distance_to_closure(&cone, &v(&[-1.0, 2.0])).unwrap() - 1.0).abs() < 1e-9);
    assert!((distance_to_closure(&cone, &v(&[-3.0, -4.0])).unwrap() - 5.0).abs() < 1e-9);

    // boundary face y₁ = 0, i.e. the h₂ axis
    let f = tangent_frame(&cone, &v(&[0.0, 1.0])).unwrap();
    assert!(f.is_boundary);
    let eta = f.inward_normal.clone().unwrap();
    assert!((eta - v(&[1.0, 0.0])).norm() < 1e-14);
    assert_eq!(classify_direction(&f, &v(&[1.0, 0.3]), 1e-10), Direction::Inward);
    assert_eq!(classify_direction(&f, &v(&[-1.0, 0.3]), 1e-10), Direction::Outward);
    assert_eq!(classify_direction(&f, &v(&[0.0, -2.0]), 1e-10), Direction::BoundaryTangent);
    assert!(Direction::BoundaryTangent.is_admissible());
    assert!(!Direction::Outward.is_admissible());
}

#[test]
fn sphere_boundary_normal_points_inwards() {
    let c = BallAnnulusChart::new(1.0, 0.02).unwrap();
    for t in [0.0, 1.0, 2.5, 4.0] {
        let f = tangent_frame(&c, &v(&[0.0, t])).unwrap();
        let eta = f.inward_normal.unwrap();
        assert!((eta + v(&[t.cos(), t.sin()])).norm() < 1e-12);
    }
}

#[test]
fn circle_tangent_is_rotation() {
    let c = CircleChart::unit();
    let f = tangent_frame(&c, &v(&[0.7])).unwrap();
    let h = c.phi(&v(&[0.7]));
    assert_eq!(classify_direction(&f, &v(&[h[1], -h[0]]), 1e-10), Direction::InteriorTangent);
    assert_eq!(classify_direction(&f, &h, 1e-10), Direction::NotTangent);
}
