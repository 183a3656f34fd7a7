mod common;

use cgseq::filter::{run_filter, scalar};
use cgseq::model::ScalarSystem;
use cgseq::{GaussianBelief, Vector};
use cgseq_testkit::joint::JointGaussian;
use cgseq_testkit::random::{price_noise_step, random_spd, random_step, rng, uniform_vector};
use common::{params_of, v1};
use nalgebra::DVector;
use rand::Rng;

fn check_against_joint(k: usize, l: usize, draws: usize, seed: u64) {
    let mut g = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let steps: Vec<_> = (0..5).map(|_| random_step(k, l, &mut g)).collect();
        let m0 = uniform_vector(k, -1.0, 1.0, &mut g);
        let g0 = random_spd(k, 0.1, &mut g);
        let joint = JointGaussian::build(&steps, &m0, &g0);
        let z = DVector::from_fn(joint.base_dim(), |_, _| g.random_range(-2.0..2.0));
        let (_, xi) = joint.simulate(&z);
        let ps: Vec<_> = steps.iter().map(params_of).collect();
        let beliefs = run_filter(&ps, &xi, &GaussianBelief::new(m0.clone(), g0.clone()).unwrap()).unwrap();
        for t in 1..=5 {
            let (m, c) = joint.filtered(t, &xi);
            worst = worst
                .max((&beliefs[t].mean - m).amax())
                .max((&beliefs[t].cov - c).amax());
        }
    }
    assert!(worst < 1e-10, "k={k} l={l}: max deviation {worst:e}");
}

#[test]
fn scalar_filter_matches_joint_conditioning() {
    check_against_joint(1, 1, 100, 11);
}

#[test]
fn bivariate_state_filter_matches_joint_conditioning() {
    check_against_joint(2, 1, 100, 12);
    check_against_joint(2, 2, 100, 13);
}

#[test]
fn anchored_start_matches_joint_conditioning() {
    let steps: Vec<_> = (0..5).map(|_| price_noise_step(0.4, -0.15, 0.3)).collect();
    let joint = JointGaussian::build(&steps, &v1(0.2), &nalgebra::DMatrix::zeros(1, 1));
    let xi: Vec<Vector> = [0.1, 0.5, 0.3, 0.9, 0.4].iter().map(|&x| v1(x)).collect();
    let ps: Vec<_> = steps.iter().map(params_of).collect();
    let beliefs = run_filter(&ps, &xi, &GaussianBelief::scalar(0.2, 0.0)).unwrap();
    for t in 1..=5 {
        let (m, c) = joint.filtered(t, &xi);
        assert!((beliefs[t].mean[0] - m[0]).abs() < 1e-12);
        assert!((beliefs[t].cov[(0, 0)] - c[(0, 0)]).abs() < 1e-12);
    }
}

#[test]
fn scalar_fast_path_matches_joint_conditioning() {
    let mut g = rng(14);
    for _ in 0..50 {
        let vol = g.random_range(0.1..1.0);
        let corr = g.random_range(-0.5..0.5);
        let noise = g.random_range(0.05..0.8);
        let steps: Vec<_> = (0..5).map(|_| price_noise_step(vol, corr, noise)).collect();
        let joint = JointGaussian::build(&steps, &v1(0.0), &nalgebra::DMatrix::from_element(1, 1, 0.3));
        let z = DVector::from_fn(joint.base_dim(), |_, _| g.random_range(-2.0..2.0));
        let (_, xi) = joint.simulate(&z);
        let obs: Vec<f64> = xi.iter().map(|x| x[0]).collect();
        let sys = ScalarSystem::price_noise(vol, corr, noise);
        let (m, v) = scalar::run(|_| sys, &obs, 0.0, 0.3).unwrap();
        for t in 1..=5 {
            let (jm, jc) = joint.filtered(t, &xi);
            assert!((m[t] - jm[0]).abs() < 1e-12 && (v[t] - jc[(0, 0)]).abs() < 1e-12);
        }
    }
}
