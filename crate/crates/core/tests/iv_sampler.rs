mod common;

use cgseq::iv::hmc::{leapfrog, log_acceptance};
use cgseq::iv::{
    block_stats, draw_from_prior, draw_observations, iv_point_and_interval, run_gibbs, sample_corr_loading, sample_noise_var, ChainState, HmcPotential,
    McmcConfig, ParamSharing, PriorHyper, StepSize, VolTarget,
};
use cgseq::sim::{simulate_day, SimDesign};
use cgseq::SimRng;
use cgseq_testkit::random::rng;
use cgseq_testkit::stats::{
    autocorr_time, inverse_gamma_cdf, ks_one_sample, mean, normal_cdf, truncated_normal_cdf, variance, GridCdf,
};
use common::geweke::{geweke, thin};
use rand::Rng;
use rayon::prelude::*;

fn fixture() -> (ChainState, Vec<f64>) {
    let theta = vec![0.0, 0.8, 0.5, 1.4, 1.1, 0.2, 0.9];
    let xi = vec![0.0, 0.6, 0.9, 1.2, 0.7, 0.4, 1.3];
    (ChainState::uniform(theta, ParamSharing::Shared, -0.1, 0.3, 0.7), xi)
}

fn log_obs_lik(state: &ChainState, xi: &[f64], corr: f64, noise_var: f64, vol: f64) -> f64 {
    let th = &state.theta;
    (0..state.steps())
        .map(|t| {
            let d = th[t + 1] - th[t];
            let r = xi[t + 1] - th[t + 1] - corr / vol * d;
            -0.5 * r * r / noise_var - 0.5 * noise_var.ln()
        })
        .sum()
}

fn prior() -> PriorHyper {
    PriorHyper {
        corr_mean: 0.1,
        corr_var: 0.25,
        vol_mean: 0.8,
        vol_var: 0.09,
        noise_shape: 3.0,
        noise_scale: 0.6,
    }
}

#[test]
fn corr_loading_draws_match_quadrature() {
    let (mut state, xi) = fixture();
    let pr = prior();
    let stats = block_stats(&state, &xi);
    let (nv, vol) = (state.noise_var[0], state.vol[0]);
    let base = state.clone();
    let grid = GridCdf::from_log_density(-4.0, 4.0, 40_001, |c| {
        -0.5 * (c - pr.corr_mean).powi(2) / pr.corr_var + log_obs_lik(&base, &xi, c, nv, vol)
    });
    let mut r = SimRng::seed_from(1);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            sample_corr_loading(&mut state, &stats, &pr, &mut r);
            state.corr_loading[0]
        })
        .collect();
    let (_, p) = ks_one_sample(&draws, |x| grid.cdf(x));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn corr_loading_is_prior_when_path_is_flat() {
    let mut state = ChainState::uniform(vec![0.3; 5], ParamSharing::PerStep, 0.0, 0.2, 0.5);
    let xi = vec![0.3, 0.1, 0.9, 0.4, 0.2];
    let pr = prior();
    let stats = block_stats(&state, &xi);
    let mut r = SimRng::seed_from(2);
    let mut draws = Vec::new();
    for _ in 0..20_000 {
        sample_corr_loading(&mut state, &stats, &pr, &mut r);
        draws.extend_from_slice(&state.corr_loading);
    }
    let (_, p) = ks_one_sample(&draws, normal_cdf(pr.corr_mean, pr.corr_var));
    assert!(p > 0.001, "p = {p}");
}

#[test]
fn dogmatic_corr_prior_pins_the_draw() {
    let (mut state, xi) = fixture();
    let pr = PriorHyper { corr_var: 1e-30, ..prior() };
    let stats = block_stats(&state, &xi);
    sample_corr_loading(&mut state, &stats, &pr, &mut SimRng::seed_from(3));
    assert!((state.corr_loading[0] - pr.corr_mean).abs() < 1e-12);
}

#[test]
fn noise_var_draws_follow_inverse_gamma() {
    let (mut state, xi) = fixture();
    let pr = prior();
    let stats = block_stats(&state, &xi);
    let (c, b) = (state.corr_loading[0], state.vol[0]);
    let th = state.theta.clone();
    let ss: f64 = (0..6)
        .map(|t| (xi[t + 1] - th[t + 1] - c / b * (th[t + 1] - th[t])).powi(2))
        .sum();
    let (shape, scale) = (pr.noise_shape + 3.0, pr.noise_scale + 0.5 * ss);
    let mut r = SimRng::seed_from(4);
    let draws: Vec<f64> = (0..100_000)
        .map(|_| {
            sample_noise_var(&mut state, &stats, &pr, &mut r);
            state.noise_var[0]
        })
        .collect();
    let m = scale / (shape - 1.0);
    let v = scale * scale / ((shape - 1.0).powi(2) * (shape - 2.0));
    assert!((mean(&draws) - m).abs() < 4.0 * (v / draws.len() as f64).sqrt());
    let (_, p) = ks_one_sample(&draws, inverse_gamma_cdf(shape, scale));
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn zero_residual_single_step_gives_shifted_shape_with_prior_scale() {
    let pr = PriorHyper { noise_shape: 2.1, noise_scale: 1.99e-8, ..prior() };
    let mut state = ChainState::uniform(vec![0.0, 0.0], ParamSharing::PerStep, 0.0, 1.0, 1.0);
    let stats = block_stats(&state, &[0.0, 0.0]);
    let mut r = SimRng::seed_from(5);
    let draws: Vec<f64> = (0..200_000)
        .map(|_| {
            sample_noise_var(&mut state, &stats, &pr, &mut r);
            state.noise_var[0]
        })
        .collect();
    // IG(α + ½, β): mean β / (α − ½)
    let m = 1.99e-8 / 1.6;
    let sd = m / (0.6f64).sqrt();
    assert!((mean(&draws) - m).abs() < 5.0 * sd / (draws.len() as f64).sqrt());
}

fn exact_vol_log_density(state: &ChainState, xi: &[f64], pr: &PriorHyper, full: bool) -> impl Fn(f64) -> f64 {
    let s = state.clone();
    let xi = xi.to_vec();
    let pr = *pr;
    move |b: f64| {
        let mut l = -0.5 * (b - pr.vol_mean).powi(2) / pr.vol_var
            + log_obs_lik(&s, &xi, s.corr_loading[0], s.noise_var[0], b);
        if full {
            for t in 0..s.steps() {
                let d = s.theta[t + 1] - s.theta[t];
                l += -0.5 * d * d / (b * b) - b.ln();
            }
        }
        l
    }
}

fn hmc_invariance(potential: HmcPotential, seed: u64) {
    let (mut state, xi) = fixture();
    let pr = prior();
    let stats = block_stats(&state, &xi);
    let floor = 1e-8;
    let logd = exact_vol_log_density(&state, &xi, &pr, potential == HmcPotential::Full);
    let grid = GridCdf::from_log_density(floor, 4.0, 40_001, logd);
    let mut r = SimRng::seed_from(seed);
    let mut draws = Vec::with_capacity(60_000);
    let mut accepted = 0;
    for _ in 0..60_000 {
        let out = cgseq::iv::hmc_step_vol(&mut state, &stats, &pr, potential, 0.08, 10, floor, &mut r);
        accepted += out.accepted;
        draws.push(state.vol[0]);
    }
    let tau = autocorr_time(&draws).ceil() as usize;
    let kept = thin(&draws, 2 * tau);
    let (_, p) = ks_one_sample(&kept, |x| grid.cdf(x));
    assert!(p > 0.01, "{potential:?}: p = {p}, tau = {tau}, acc = {accepted}");
}

#[test]
fn hmc_leaves_full_conditional_invariant() {
    hmc_invariance(HmcPotential::Full, 6);
}

#[test]
fn hmc_leaves_observation_only_target_invariant() {
    hmc_invariance(HmcPotential::ObservationOnly, 7);
}

#[test]
fn leapfrog_is_reversible() {
    let mut g = rng(8);
    let (state, xi) = fixture();
    let pr = prior();
    let stats = block_stats(&state, &xi)[0];
    for _ in 0..1_000 {
        let t = VolTarget {
            corr_loading: g.random_range(-0.5..0.5),
            noise_var: g.random_range(0.05..1.0),
            ..VolTarget::new(&state, 0, stats, &pr, HmcPotential::Full)
        };
        let b = g.random_range(0.3..1.5);
        let p = g.random_range(-2.0..2.0);
        let eps = g.random_range(0.001..0.05);
        let (b1, p1) = leapfrog(b, p, eps, 10, |x| t.gradient(x));
        let (b2, p2) = leapfrog(b1, -p1, eps, 10, |x| t.gradient(x));
        assert!((b2 - b).abs() < 1e-10 && (p2 + p).abs() < 1e-10, "{b} {p} -> {b2} {p2}");
        let (bz, pz) = leapfrog(b, p, 0.0, 10, |x| t.gradient(x));
        assert_eq!(log_acceptance(&t, b, p, bz, pz, 1e-8), Some(0.0));
    }
}

#[test]
fn uncorrelated_observation_term_has_no_vol_gradient() {
    let (state, xi) = fixture();
    let stats = block_stats(&state, &xi)[0];
    let pr = prior();
    let t = VolTarget { corr_loading: 0.0, ..VolTarget::new(&state, 0, stats, &pr, HmcPotential::ObservationOnly) };
    for b in [0.2, 0.9, 3.0] {
        assert!((t.gradient(b) - (b - pr.vol_mean) / pr.vol_var).abs() < 1e-12);
    }
}

fn geweke_check(sharing: ParamSharing, steps: usize, sweeps: usize, seed: u64) {
    let pr = PriorHyper {
        corr_mean: -0.2,
        corr_var: 0.04,
        vol_mean: 1.0,
        vol_var: 0.09,
        noise_shape: 3.0,
        noise_scale: 1.0,
    };
    let tr = geweke(&pr, sharing, steps, sweeps, seed);
    let floor = McmcConfig::default().vol_floor;
    let checks: Vec<(&str, &Vec<f64>, Box<dyn Fn(f64) -> f64>)> = vec![
        ("corr_loading", &tr.corr_loading, Box::new(normal_cdf(pr.corr_mean, pr.corr_var))),
        ("noise_var", &tr.noise_var, Box::new(inverse_gamma_cdf(pr.noise_shape, pr.noise_scale))),
        ("vol", &tr.vol, Box::new(truncated_normal_cdf(pr.vol_mean, pr.vol_var, floor))),
    ];
    for (name, x, cdf) in checks {
        let tau = autocorr_time(x).ceil() as usize;
        let kept = thin(x, (2 * tau).max(10));
        let (_, p) = ks_one_sample(&kept, cdf);
        assert!(p > 0.01, "{sharing:?} {name}: p = {p}, tau = {tau}, n = {}", kept.len());
    }
    let z = &tr.standardized_increment;
    let tau = autocorr_time(z).ceil() as usize;
    let (_, p) = ks_one_sample(&thin(z, (2 * tau).max(10)), normal_cdf(0.0, 1.0));
    assert!(p > 0.01, "{sharing:?} path increment: p = {p}");
}

#[test]
fn geweke_shared_parameters() {
    geweke_check(ParamSharing::Shared, 20, 50_000, 9);
}

#[test]
fn geweke_per_step_parameters() {
    geweke_check(ParamSharing::PerStep, 5, 50_000, 10);
}

fn small_design(seed: u64) -> SimDesign {
    SimDesign { steps: 300, days: 1, seed, ..Default::default() }
}

#[test]
fn estimate_is_within_three_posterior_sd_of_truth() {
    let d = SimDesign { steps: 2_340, ..small_design(11) };
    let day = simulate_day(&d, 0).unwrap();
    let cfg = McmcConfig { iterations: 400, burn_in: 200, seed: 3, ..Default::default() };
    let post = run_gibbs(&day.xi, &d.prior(1.2).unwrap(), &cfg).unwrap();
    let sd = variance(&post.iv_draws).sqrt();
    assert!((post.point_estimate() - day.true_qv).abs() < 3.0 * sd);
    assert!(post.acceptance_rate > 0.5 && post.acceptance_rate < 0.95, "{}", post.acceptance_rate);
}

#[test]
fn single_retained_draw_is_the_estimate() {
    let d = small_design(12);
    let day = simulate_day(&d, 0).unwrap();
    let cfg = McmcConfig { iterations: 21, burn_in: 20, keep_paths: true, ..Default::default() };
    let post = run_gibbs(&day.xi, &d.prior(1.2).unwrap(), &cfg).unwrap();
    let path = &post.paths.as_ref().unwrap()[0];
    let qv: f64 = path.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    assert_eq!(post.iv_draws.len(), 1);
    assert_eq!(post.point_estimate(), qv);
}

#[test]
fn draws_are_invariant_to_price_level() {
    let d = small_design(13);
    let day = simulate_day(&d, 0).unwrap();
    let shifted: Vec<f64> = day.xi.iter().map(|x| x + 4.6).collect();
    let cfg = McmcConfig { iterations: 60, burn_in: 30, ..Default::default() };
    let pr = d.prior(1.2).unwrap();
    let a = run_gibbs(&day.xi, &pr, &cfg).unwrap();
    let b = run_gibbs(&shifted, &pr, &cfg).unwrap();
    for (x, y) in a.iv_draws.iter().zip(&b.iv_draws) {
        assert!((x / y - 1.0).abs() < 1e-6, "{x} {y}");
    }
}

#[test]
fn runs_are_seed_deterministic() {
    let d = small_design(14);
    let day = simulate_day(&d, 0).unwrap();
    let cfg = McmcConfig { iterations: 50, burn_in: 25, seed: 77, ..Default::default() };
    let pr = d.prior(1.2).unwrap();
    assert_eq!(run_gibbs(&day.xi, &pr, &cfg).unwrap(), run_gibbs(&day.xi, &pr, &cfg).unwrap());
}

#[test]
fn frozen_corr_loading_is_never_updated() {
    let d = small_design(15);
    let day = simulate_day(&d, 0).unwrap();
    let cfg = McmcConfig { iterations: 40, burn_in: 20, fixed_corr_loading: Some(0.0), ..Default::default() };
    let post = run_gibbs(&day.xi, &d.prior(1.2).unwrap(), &cfg).unwrap();
    assert!(post.param_trace.iter().all(|p| p.corr_loading == 0.0));
}

#[test]
fn per_step_mode_runs_and_respects_floor() {
    let d = small_design(16);
    let day = simulate_day(&d, 0).unwrap();
    let cfg = McmcConfig {
        iterations: 60,
        burn_in: 30,
        sharing: ParamSharing::PerStep,
        step_size: StepSize::Fixed(2e-5),
        ..Default::default()
    };
    let post = run_gibbs(&day.xi, &d.prior(1.2).unwrap(), &cfg).unwrap();
    assert_eq!(post.final_state.vol.len(), 300);
    assert!(post.final_state.vol.iter().all(|&v| v >= cfg.vol_floor));
    assert!(post.iv_draws.iter().all(|&v| v >= 0.0));
}

/// Days drawn from the prior predictive, so the 90% interval covers the realized
/// quadratic variation with probability 0.9 up to MCMC error.
#[test]
fn interval_coverage_is_close_to_nominal() {
    let pr = PriorHyper {
        corr_mean: -0.2,
        corr_var: 0.04,
        vol_mean: 1.0,
        vol_var: 0.09,
        noise_shape: 3.0,
        noise_scale: 1.0,
    };
    let days = 200;
    let hits: usize = (0..days)
        .into_par_iter()
        .map(|i| {
            let mut r = SimRng::derive(99, i as u64);
            let st = draw_from_prior(&pr, 200, ParamSharing::Shared, 1e-8, 0.0, &mut r).unwrap();
            let xi = draw_observations(&st, &mut r);
            let cfg = McmcConfig { iterations: 3_000, burn_in: 1_000, seed: i as u64, ..Default::default() };
            let post = run_gibbs(&xi, &pr, &cfg).unwrap();
            let s = iv_point_and_interval(&post.iv_draws, 0.9).unwrap();
            let qv = st.quadratic_variation();
            usize::from(s.lower <= qv && qv <= s.upper)
        })
        .sum();
    let rate = hits as f64 / days as f64;
    let se = (0.9 * 0.1 / days as f64).sqrt();
    assert!((rate - 0.9).abs() < 4.0 * se, "coverage {rate}");
}

#[test]
fn constant_draws_give_degenerate_interval() {
    let s = iv_point_and_interval(&[0.7; 10], 0.9).unwrap();
    assert_eq!((s.estimate, s.lower, s.upper), (0.7, 0.7, 0.7));
}
