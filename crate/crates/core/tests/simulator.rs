mod common;

use spikerec::simulator::{ideal_intensity, simulate_constant, simulate_pixel, simulate_scene_with, IntegratorState};
use spikerec::{simulate_scene, Error, Execution, InitialResidual, NoiseSpec, SceneKind, SceneSpec, SimConfig};

#[test]
fn small_rate_example() {
    let s = simulate_constant(0.3, 1.0, 10).unwrap();
    assert_eq!(s.values(), &[0, 0, 0, 1, 0, 0, 1, 0, 0, 1]);
}

#[test]
fn tenth_rate_fires_every_tenth_step() {
    let s = simulate_constant(0.1, 1.0, 10_000).unwrap();
    let pos: Vec<usize> = s.firing_positions().collect();
    assert_eq!(pos.len(), 1000);
    assert!(pos.iter().enumerate().all(|(k, &p)| p == 10 * k + 9));
}

#[test]
fn full_rate_fires_every_step() {
    assert!(simulate_constant(1.0, 1.0, 50)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v == 1));
    assert!(simulate_constant(0.0, 1.0, 50)
        .unwrap()
        .values()
        .iter()
        .all(|&v| v == 0));
}

#[test]
fn rates_above_threshold_are_rejected() {
    assert!(simulate_pixel(&[0.5, 1.5], 1.0, 0.0).is_err());
    assert!(IntegratorState::new(1.0, 1.0).is_err());
    assert!(IntegratorState::new(0.0, 0.0).is_err());
    let scene = SceneSpec::new(
        3,
        2,
        SceneKind::Step {
            before: 0.5,
            after: 1.2,
            switch_frame: 4,
        },
    )
    .unwrap();
    match simulate_scene(&scene, 8, &SimConfig::default()) {
        Err(Error::RateOutOfRange {
            x: 0, y: 0, frame: 4, ..
        }) => {}
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn initial_residual_shifts_phase() {
    let s = simulate_pixel(&[0.25; 8], 1.0, 0.5).unwrap();
    assert_eq!(s.values(), &[0, 1, 0, 0, 0, 1, 0, 0]);
}

#[test]
fn noise_is_seeded_and_schedule_independent() {
    let scene = SceneSpec::new(
        17,
        9,
        SceneKind::RotatingWedge {
            background: 0.1,
            wedge: 0.7,
            half_angle: 0.5,
            radians_per_frame: 0.05,
        },
    )
    .unwrap();
    let config = SimConfig {
        threshold: 1.0,
        initial_residual: InitialResidual::Uniform { seed: 4 },
        noise: Some(NoiseSpec {
            flip_probability: 0.02,
            rate_jitter: 0.1,
            seed: 9,
        }),
    };
    let a = simulate_scene_with(&scene, 200, &config, Execution::Sequential).unwrap();
    let b = simulate_scene_with(&scene, 200, &config, Execution::Parallel).unwrap();
    assert_eq!(a, b);
    let mut other = config;
    other.noise.as_mut().unwrap().seed = 10;
    assert_ne!(a, simulate_scene(&scene, 200, &other).unwrap());
}

#[test]
fn invalid_noise_rejected() {
    let scene = SceneSpec::constant(2, 2, 0.3).unwrap();
    for noise in [
        NoiseSpec {
            flip_probability: 0.5,
            rate_jitter: 0.0,
            seed: 0,
        },
        NoiseSpec {
            flip_probability: 0.0,
            rate_jitter: -1.0,
            seed: 0,
        },
    ] {
        let config = SimConfig {
            noise: Some(noise),
            ..SimConfig::default()
        };
        assert!(simulate_scene(&scene, 4, &config).is_err());
    }
}

#[test]
fn ideal_intensity_scales_rate() {
    let scene = SceneSpec::constant(3, 2, 0.3).unwrap();
    let img = ideal_intensity(&scene, 1.0, 0);
    assert!(img.values().iter().all(|&v| (v - 76.5).abs() < 1e-4));
    let img = ideal_intensity(&scene, 0.6, 0);
    assert!(img.values().iter().all(|&v| (v - 127.5).abs() < 1e-4));
}

#[test]
fn empty_volume() {
    let v = simulate_scene(&SceneSpec::constant(4, 3, 0.5).unwrap(), 0, &SimConfig::default()).unwrap();
    assert_eq!((v.width(), v.height(), v.frames()), (4, 3, 0));
}
