use dualband::ops::EdgeState;
use dualband::optics::{WaterBody, NIR, VIS};
use dualband_web::{gray_to_rgba, slider_water, state_rgba, transmission_curve, Demo};

#[test]
fn default_sliders_reproduce_natural_water() {
    assert_eq!(slider_water(1.0, 1.2).unwrap(), WaterBody::natural());
}

#[test]
fn sliders_that_break_band_ordering_are_rejected() {
    let err = slider_water(1.0, 0.05).unwrap_err().to_string();
    assert!(err.contains("a(NIR)"), "{err}");
    assert!(slider_water(-1.0, 1.2).is_err());
}

#[test]
fn turbidity_scales_scattering_only() {
    let w = slider_water(2.0, 1.5).unwrap();
    let (v, n) = (
        w.band(VIS).unwrap().coefficients,
        w.band(NIR).unwrap().coefficients,
    );
    assert_eq!((v.a(), v.b()), (0.10, 1.20));
    assert_eq!((n.a(), n.b()), (1.5, 0.10));
}

#[test]
fn curve_is_interleaved_and_starts_at_full_transmission() {
    let c = transmission_curve(&WaterBody::natural(), 2.0, 4).unwrap();
    assert_eq!(c.len(), 15);
    assert_eq!(&c[..3], &[0.0, 100.0, 100.0]);
    assert_eq!(c[12], 2.0);
    // natural water: c_vis = 0.7, c_nir = 1.25
    assert!((c[13] - 100.0 * (-1.4f64).exp()).abs() < 1e-9);
    assert!((c[14] - 100.0 * (-2.5f64).exp()).abs() < 1e-9);
    for row in c.chunks(3).skip(1) {
        assert!(row[2] < row[1]);
    }
}

#[test]
fn rgba_helpers() {
    let img = dualband::GrayImage::from_vec(2, 1, vec![7, 200]).unwrap();
    assert_eq!(gray_to_rgba(&img), vec![7, 7, 7, 255, 200, 200, 200, 255]);
    let colours: Vec<_> = [
        EdgeState::None,
        EdgeState::VisOnly,
        EdgeState::NirOnly,
        EdgeState::Both,
    ]
    .map(state_rgba)
    .to_vec();
    for (i, a) in colours.iter().enumerate() {
        for b in &colours[i + 1..] {
            assert_ne!(a, b);
        }
    }
}

#[test]
fn demo_round_trip() {
    let mut demo = Demo::new().unwrap();
    let (w, h) = (demo.width(), demo.height());
    assert_eq!((demo.vis().width(), demo.vis().height()), (w, h));

    let edges = demo.edges(1.0, 25.0, 60.0).unwrap();
    assert_eq!(edges.len(), 4 * w * h);
    let red = state_rgba(EdgeState::NirOnly);
    let cyan = state_rgba(EdgeState::VisOnly);
    let count = |c: [u8; 4]| edges.chunks(4).filter(|p| *p == c).count();
    // the plant outline is much busier in NIR
    assert!(
        count(red) > count(cyan),
        "{} vs {}",
        count(red),
        count(cyan)
    );

    let fused = demo.fuse(33.0, 0.33).unwrap();
    assert_ne!(&fused, demo.vis());
    assert!(demo.fuse(-1.0, 0.33).is_err());

    let before = demo.nir().clone();
    demo.render(1.0, 1.2, 1).unwrap();
    assert_ne!(demo.nir(), &before, "new seed, new noise");
    let murky_nir_mean = |d: &Demo| {
        d.nir()
            .as_slice()
            .iter()
            .map(|&v| f64::from(v))
            .sum::<f64>()
    };
    let clear = murky_nir_mean(&demo);
    demo.render(1.0, 3.0, 1).unwrap();
    assert!(murky_nir_mean(&demo) < clear);
    assert!(demo.render(1.0, 0.01, 1).is_err());
}
