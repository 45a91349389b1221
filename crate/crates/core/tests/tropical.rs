use proptest::prelude::*;
use smoothmax::approx::{eval_l, eval_r};
use smoothmax::tropical::{amoeba_upper_boundary, tentacle_lines, LineKind, TentacleLabel};
use smoothmax::{summarize, RealVector};

fn example_vector() -> RealVector {
    let mut v = vec![0; 8];
    v.extend([1; 5]);
    v.extend([2; 40]);
    v.extend([3; 5]);
    v.extend([4; 40]);
    RealVector::from_ints(v).unwrap()
}

#[test]
fn tentacles_of_mixed_multiplicities() {
    let [top, bottom] = tentacle_lines(&example_vector()).unwrap();
    assert_eq!(top.label, TentacleLabel::MaxTentacle);
    assert_eq!(top.kind, LineKind::SlopeIntercept);
    assert_eq!(top.slope, 4.0);
    assert!((top.intercept - 40f64.ln()).abs() < 1e-15);
    assert_eq!(bottom.label, TentacleLabel::MinTentacle);
    assert_eq!(bottom.slope, 0.0);
    assert!((bottom.intercept - 8f64.ln()).abs() < 1e-15);
}

#[test]
fn constant_vector_tentacles_coincide() {
    let [top, bottom] = tentacle_lines(&RealVector::from_ints([0; 6]).unwrap()).unwrap();
    assert_eq!((top.slope, top.intercept), (bottom.slope, bottom.intercept));
    assert!((top.intercept - 6f64.ln()).abs() < 1e-15);
}

#[test]
fn repeated_maximum_tentacle() {
    let v2 = RealVector::from_ints([1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7]).unwrap();
    let s = summarize(&v2);
    let [top, _] = tentacle_lines(&v2).unwrap();
    assert_eq!(top.slope, s.max);
    assert!((top.intercept - (s.max_multiplicity() as f64).ln()).abs() < 1e-15);
}

#[test]
fn boundary_approaches_tentacles_from_above() {
    let v = example_vector();
    let [top, bottom] = tentacle_lines(&v).unwrap();
    let pts = amoeba_upper_boundary(&v, -30.0, 30.0, 601).unwrap();
    for p in &pts {
        assert!(p.s >= top.at(p.u) - 1e-12 && p.s >= bottom.at(p.u) - 1e-12);
    }
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    assert!(last.s - top.at(last.u) < 1e-12);
    assert!(first.s - bottom.at(first.u) < 1e-12);

    let v1 = RealVector::from_ints(1..=7).unwrap();
    let far = amoeba_upper_boundary(&v1, 40.0, 60.0, 2).unwrap();
    assert!((far[1].s - 7.0 * far[1].u).abs() < 1e-15);
}

#[test]
fn slopes_recover_l_and_r() {
    let v = RealVector::from_ints([1, 2, 3, 4, 5, 6, 7, 7, 7, 7, 7]).unwrap();
    let h = 1e-3;
    for u in [0.3, 1.0, 2.0, 4.0] {
        let pts = amoeba_upper_boundary(&v, u - h, u + h, 3).unwrap();
        let t = u.exp();
        assert!((pts[1].s / u - eval_l(&v, t).unwrap().value).abs() < 1e-12);
        let fd = (pts[2].s - pts[0].s) / (2.0 * h);
        assert!((fd - eval_r(&v, t).unwrap().value).abs() < 1e-4);
    }
}

proptest! {
    #[test]
    fn boundary_is_convex(v in prop::collection::vec(-10i64..=10, 1..30)) {
        let v = RealVector::from_ints(v).unwrap();
        let pts = amoeba_upper_boundary(&v, -3.0, 3.0, 121).unwrap();
        for w in pts.windows(3) {
            prop_assert!(w[0].s - 2.0 * w[1].s + w[2].s >= -1e-9);
        }
    }
}
