mod common;

use dualband::registration::{fuse_weighted, plant_mask, WeightMap};
use dualband::GrayImage;
use proptest::prelude::*;
use rand::Rng;

use common::{random_image, rng};

fn px(v: u8) -> GrayImage {
    GrayImage::filled(1, 1, v).unwrap()
}

fn fuse1(v: u8, n: u8, w: f64) -> u8 {
    let wm = WeightMap::constant(1, 1, w).unwrap();
    fuse_weighted(&px(v), &px(n), &wm).unwrap().get(0, 0)
}

#[test]
fn formula_examples() {
    assert_eq!(fuse1(200, 100, -1.0), 100);
    assert_eq!(fuse1(200, 255, 1.0), 255);
    assert_eq!(fuse1(0, 173, 1.0), 173);
    assert_eq!(fuse1(10, 100, -1.0), 0);
    // 100 + 0.5 * 5 = 102.5 rounds up
    assert_eq!(fuse1(100, 5, 0.5), 103);
}

#[test]
fn zero_weight_returns_vis_exactly() {
    let mut r = rng(1);
    let (v, n) = (random_image(&mut r, 31, 17), random_image(&mut r, 31, 17));
    let zero = WeightMap::constant(31, 17, 0.0).unwrap();
    assert_eq!(fuse_weighted(&v, &n, &zero).unwrap(), v);
}

#[test]
fn unit_weight_over_black_vis_returns_nir() {
    let mut r = rng(2);
    let n = random_image(&mut r, 9, 9);
    let v = GrayImage::filled(9, 9, 0).unwrap();
    let one = WeightMap::constant(9, 9, 1.0).unwrap();
    assert_eq!(fuse_weighted(&v, &n, &one).unwrap(), n);
}

#[test]
fn mismatched_sizes_are_rejected() {
    let a = GrayImage::filled(4, 4, 0).unwrap();
    let b = GrayImage::filled(4, 5, 0).unwrap();
    let w4 = WeightMap::constant(4, 4, 0.0).unwrap();
    let w5 = WeightMap::constant(5, 4, 0.0).unwrap();
    assert!(fuse_weighted(&a, &b, &w4).is_err());
    assert!(fuse_weighted(&a, &a, &w5).is_err());
    assert!(plant_mask(&a, &b, 10.0, 0.5).is_err());
    assert!(WeightMap::constant(2, 2, 1.5).is_err());
    assert!(WeightMap::new(2, 2, vec![0.0; 3]).is_err());
}

#[test]
fn random_fusions_stay_in_range() {
    let mut r = rng(3);
    for _ in 0..1000 {
        let (v, n) = (random_image(&mut r, 4, 4), random_image(&mut r, 4, 4));
        let w: Vec<f64> = (0..16).map(|_| r.random_range(-1.0..=1.0)).collect();
        let f = fuse_weighted(&v, &n, &WeightMap::new(4, 4, w.clone()).unwrap()).unwrap();
        for (i, wi) in w.iter().enumerate() {
            let exact = f64::from(v.as_slice()[i]) + wi * f64::from(n.as_slice()[i]);
            let want = exact.round().clamp(0.0, 255.0);
            assert!((f64::from(f.as_slice()[i]) - want).abs() <= 1.0);
        }
    }
}

proptest! {
    #[test]
    fn fusion_is_monotone_in_weight(v: u8, n: u8, w in -1.0f64..=1.0, dw in 0.0f64..=1.0) {
        let hi = (w + dw).min(1.0);
        prop_assert!(fuse1(v, n, hi) >= fuse1(v, n, w));
    }

    #[test]
    fn plant_mask_ignores_common_offset(
        n in prop::collection::vec(0u8..=200, 64),
        v in prop::collection::vec(0u8..=200, 64),
        k in 0u8..=55,
    ) {
        let ni = GrayImage::from_vec(8, 8, n).unwrap();
        let vi = GrayImage::from_vec(8, 8, v).unwrap();
        let add = |g: &GrayImage| GrayImage::from_fn(8, 8, |x, y| g.get(x, y) + k).unwrap();
        let a = plant_mask(&ni, &vi, 20.0, 0.4).unwrap();
        let b = plant_mask(&add(&ni), &add(&vi), 20.0, 0.4).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn plant_mask_rule() {
    let n = GrayImage::filled(5, 5, 200).unwrap();
    let v = GrayImage::filled(5, 5, 50).unwrap();
    let m = plant_mask(&n, &v, 100.0, 0.7).unwrap();
    assert!(m.weights().iter().all(|&w| w == -0.7));
    let same = plant_mask(&n, &n, 1.0, 0.7).unwrap();
    assert!(same.weights().iter().all(|&w| w == 0.0));
    assert!(plant_mask(&n, &v, 0.0, 0.5).is_err());
    assert!(plant_mask(&n, &v, 5.0, 1.5).is_err());
}

#[test]
fn plant_mask_majority_removes_specks_and_fills_holes() {
    let v = GrayImage::filled(9, 9, 50).unwrap();
    // isolated bright pixel outside, one dark hole inside a bright block
    let n = GrayImage::from_fn(9, 9, |x, y| {
        if (x, y) == (0, 8) || ((3..8).contains(&x) && (1..6).contains(&y) && (x, y) != (5, 3)) {
            200
        } else {
            50
        }
    })
    .unwrap();
    let m = plant_mask(&n, &v, 20.0, 0.5).unwrap();
    let on = |x: usize, y: usize| m.weights()[y * 9 + x] != 0.0;
    assert!(!on(0, 8));
    assert!(on(5, 3));
    assert!(on(4, 2));
}

#[test]
fn weight_map_gray_encoding() {
    let img = GrayImage::from_vec(3, 1, vec![0, 128, 255]).unwrap();
    let w = WeightMap::from_gray(&img);
    assert_eq!(w.weights(), &[-1.0, 0.0, 1.0]);
    assert_eq!(w.to_gray(), img);
    let all = GrayImage::from_fn(256, 1, |x, _| x as u8).unwrap();
    assert_eq!(WeightMap::from_gray(&all).to_gray(), all);
}
