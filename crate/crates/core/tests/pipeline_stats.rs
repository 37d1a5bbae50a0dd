//! Statistics of single-trial pipeline runs, accumulated by hand rather than
//! through the Monte Carlo driver.

use std::io::Write;

use lci_snr::pipeline::{capture, lci_acquire, lci_reconstruct, Architecture};
use lci_snr::scene::{load_image, synth_uniform_random};
use lci_snr::snr::lci_pixel_noise_variance;
use lci_snr::{NoiseParams, RngStream, Scene, SensingOperator};

#[test]
fn lci_reconstruction_is_unbiased_with_flat_noise() {
    let n = 64;
    let x0 = 1e5;
    let sigma = 3.0;
    let scene = synth_uniform_random(n, x0, 4).unwrap();
    let op = SensingOperator::new(n).unwrap();
    let params = NoiseParams::with_additive(sigma, 0.0);
    let trials = 4000;
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for t in 0..trials {
        let z = lci_acquire(&op, &scene, &params, &mut RngStream::new(99, t)).unwrap();
        let x = lci_reconstruct(&op, &z).unwrap();
        for i in 0..n {
            let e = x.values[i] - scene.values()[i];
            sum[i] += e;
            sq[i] += e * e;
        }
    }
    let expected = lci_pixel_noise_variance(n, x0, sigma);
    for i in 0..n {
        let var = sq[i] / trials as f64;
        let bias = sum[i] / trials as f64;
        assert!((var / expected - 1.0).abs() < 0.08, "pixel {i}: {var} vs {expected}");
        assert!(bias.abs() < 4.0 * (expected / trials as f64).sqrt(), "pixel {i}: bias {bias}");
    }
}

#[test]
fn trials_depend_only_on_their_stream() {
    let scene = synth_uniform_random(128, 1e6, 1).unwrap();
    let op = SensingOperator::new(128).unwrap();
    let params = NoiseParams::with_additive(5.0, 5.0);
    for arch in Architecture::ALL {
        let a = capture(arch, &op, &scene, &params, &mut RngStream::new(3, 17)).unwrap();
        let b = capture(arch, &op, &scene, &params, &mut RngStream::new(3, 17)).unwrap();
        let c = capture(arch, &op, &scene, &params, &mut RngStream::new(3, 18)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.values, c.values);
    }
}

fn temp_with(contents: &[u8], suffix: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(suffix).tempfile().unwrap();
    f.write_all(contents).unwrap();
    f
}

#[test]
fn image_files_become_padded_scenes() {
    let csv = temp_with(b"1,2,3\n4,5,6\n", ".csv");
    let scene = load_image(csv.path(), 10.0).unwrap();
    assert_eq!((scene.width(), scene.height(), scene.order()), (3, 2, 8));
    assert_eq!(scene.values()[0], 0.0);
    assert_eq!(scene.values()[7], 0.0);
    assert!((scene.brightness() - 60.0).abs() < 1e-9);
    assert!((scene.usable()[5] / scene.usable()[0] - 6.0).abs() < 1e-12);

    let pgm = temp_with(b"P2\n2 2\n15\n0 15\n5 10\n", ".pgm");
    let scene = load_image(pgm.path(), 1.0).unwrap();
    assert_eq!(scene.order(), 8);
    assert_eq!(scene.usable(), &[0.0, 2.0, 2.0 / 3.0, 4.0 / 3.0]);

    assert!(load_image(temp_with(b"0,0\n0,0\n", ".csv").path(), 5.0).is_err());
    assert!(load_image(temp_with(b"1,-2\n", ".csv").path(), 5.0).is_err());
    assert!(load_image("/nonexistent/scene.pgm", 5.0).is_err());
}

#[test]
fn direct_capture_of_a_vector_scene() {
    let scene = Scene::from_vector(vec![0.0, 50.0, 0.0, 200.0]).unwrap();
    let op = SensingOperator::new(4).unwrap();
    let img = capture(Architecture::Pai, &op, &scene, &NoiseParams::noiseless(), &mut RngStream::new(0, 0)).unwrap();
    assert_eq!(img.values, scene.values());
}
