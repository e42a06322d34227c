use elasticmkl::enlp::enlp_solve_detailed;
use elasticmkl::wsr::{wsr_step, WsrState};
use elasticmkl::{
    enlp_oracle, enlp_solve, scaling_grad, scaling_norm, wsr_oracle, wsr_solve, ElasticNetMix,
    WsrConfig, WsrStrategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mix(e: f64) -> ElasticNetMix {
    ElasticNetMix::new(e).unwrap()
}

fn log_uniform_beta(rng: &mut ChaCha8Rng, q: usize) -> Vec<f64> {
    (0..q).map(|_| 10f64.powf(rng.random_range(-3.0..3.0))).collect()
}

fn reciprocal_sum(beta: &[f64], theta: &[f64]) -> f64 {
    beta.iter().zip(theta).map(|(b, t)| b / t).sum()
}

fn product(x: &[f64], beta: &[f64], eta: ElasticNetMix) -> f64 {
    WsrState::new(x.to_vec(), beta, eta).unwrap().product()
}

#[test]
fn wsr_matches_oracle_for_both_strategies() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let q = rng.random_range(2..=10);
        let beta = log_uniform_beta(&mut rng, q);
        let eta = mix(rng.random_range(0..=10) as f64 / 10.0);
        let reference = wsr_oracle(&beta, eta, 1e-10).unwrap();
        let best = reciprocal_sum(&beta, &reference);
        for strategy in [WsrStrategy::Main, WsrStrategy::Alternating] {
            let cfg = WsrConfig::for_eta(eta).with_strategy(strategy);
            let sol = wsr_solve(&beta, &vec![1.0; q], eta, &cfg).unwrap();
            assert!(sol.converged);
            assert!(
                (sol.objective - best).abs() <= 1e-7 * best,
                "{strategy:?} eta={eta}: {} vs {best}",
                sol.objective
            );
        }
    }
}

#[test]
fn zeta_descends_and_certificate_sandwiches() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..40 {
        let q = rng.random_range(2..=8);
        let beta = log_uniform_beta(&mut rng, q);
        let eta = mix(rng.random_range(0.0..=1.0));
        let reference = wsr_oracle(&beta, eta, 1e-10).unwrap();
        let p_star = reciprocal_sum(&beta, &reference);

        let mut state = WsrState::new(vec![1.0; q], &beta, eta).unwrap();
        let p0 = state.product();
        let floor = beta.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
        for _ in 0..200 {
            let next = wsr_step(&state, &beta).unwrap();
            assert!(next.zeta() <= state.zeta() * (1.0 + 1e-12));
            // r² ≤ P* ≤ P after every main step
            assert!(next.r_val * next.r_val <= p_star * (1.0 + 1e-9));
            assert!(p_star <= next.product() * (1.0 + 1e-9));
            for &x in &next.x {
                assert!(x >= floor * (1.0 - 1e-12));
                assert!(x <= p0.sqrt() * (1.0 + 1e-12));
            }
            state = next;
        }
    }
}

#[test]
fn fixed_point_identity_at_convergence() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let q = rng.random_range(2..=6);
        let beta: Vec<f64> = (0..q).map(|_| rng.random_range(0.1..10.0)).collect();
        let eta = mix(rng.random_range(0.0..=1.0));
        // the certificate is quadratic in the distance to the fixed point
        // and rounds to zero early, so drive the map directly
        let mut s = WsrState::new(vec![1.0; q], &beta, eta).unwrap();
        for _ in 0..5000 {
            s = wsr_step(&s, &beta).unwrap();
        }
        for ((&lhs, &b), &x) in s.q.iter().zip(&beta).zip(&s.x) {
            let rhs = b / (x * x);
            assert!((lhs - rhs).abs() <= 1e-8 * rhs, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn product_is_pseudoconvex_along_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let mut checked = 0;
    while checked < 2000 {
        let q = rng.random_range(2..=6);
        let beta: Vec<f64> = (0..q).map(|_| rng.random_range(0.1..10.0)).collect();
        let eta = mix(rng.random_range(0.0..=1.0));
        let y: Vec<f64> = (0..q).map(|_| rng.random_range(0.1..3.0)).collect();
        let z: Vec<f64> = (0..q).map(|_| rng.random_range(0.1..3.0)).collect();
        let (py, pz) = (product(&y, &beta, eta), product(&z, &beta, eta));
        if pz >= py * (1.0 - 1e-6) {
            continue;
        }
        let h = 1e-6;
        let at = |t: f64| -> Vec<f64> { y.iter().zip(&z).map(|(a, b)| a + t * (b - a)).collect() };
        let slope = (product(&at(h), &beta, eta) - product(&at(-h), &beta, eta)) / (2.0 * h);
        assert!(slope < 0.0, "slope {slope} with P(y)={py}, P(z)={pz}");
        checked += 1;
    }
}

#[test]
fn norm_sandwich_and_euler() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..5000 {
        let q = rng.random_range(1..=8);
        let eta = mix(rng.random_range(0.0..=1.0));
        let x: Vec<f64> = (0..q).map(|_| rng.random_range(0.01..5.0)).collect();
        let y: Vec<f64> = (0..q).map(|_| rng.random_range(0.01..5.0)).collect();
        let sx = scaling_norm(&x, eta).unwrap();
        let sy = scaling_norm(&y, eta).unwrap();
        let gx = scaling_grad(&x, eta).unwrap();
        let gy = scaling_grad(&y, eta).unwrap();
        let lower: f64 = gy.iter().zip(&x).map(|(g, v)| g * v).sum();
        let upper: f64 = (0..q).map(|i| sy * gy[i] / y[i] * x[i] * x[i]).sum::<f64>().sqrt();
        let euler: f64 = gx.iter().zip(&x).map(|(g, v)| g * v).sum();
        assert!(lower <= sx + 1e-9 * sx);
        assert!(sx <= upper + 1e-9 * sx);
        assert!((euler - sx).abs() <= 1e-9 * sx);
    }
}

#[test]
fn lp_matches_enumeration_and_prunes_soundly() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let etas = [0.0, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0];
    for _ in 0..200 {
        let q = rng.random_range(2..=12);
        let mut u: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0)).collect();
        for v in u.iter_mut() {
            if rng.random_bool(0.2) {
                *v = 0.0;
            }
        }
        if u.iter().all(|&v| v == 0.0) {
            u[0] = 0.5;
        }
        let eta = mix(etas[rng.random_range(0..etas.len())]);
        let st = enlp_solve_detailed(&u, eta).unwrap();
        let reference = enlp_oracle(&u, eta).unwrap();
        let value = |t: &[f64]| -> f64 { t.iter().zip(&u).map(|(a, b)| a * b).sum() };
        if eta.get() == 1.0 {
            // ties make the vertex non-unique; compare the optimal value
            assert!((value(&st.iterate) - value(&reference)).abs() <= 1e-12);
        } else {
            for (a, b) in st.iterate.iter().zip(&reference) {
                assert!((a - b).abs() <= 1e-9, "eta={eta} u={u:?}: {a} vs {b}");
            }
            for &k in &st.zeroed {
                assert_eq!(reference[k], 0.0, "pruned index {k} is active in the optimum");
            }
        }
        assert!(st.passes <= q);
    }
}

#[test]
fn lp_value_bounds_the_current_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..100 {
        let q = rng.random_range(2..=8);
        let u: Vec<f64> = (0..q).map(|_| rng.random_range(0.0..1.0)).collect();
        let eta = mix(rng.random_range(0.0..=1.0));
        let best = enlp_solve(&u, eta).unwrap();
        let best_val: f64 = best.iter().zip(&u).map(|(a, b)| a * b).sum();
        let beta = log_uniform_beta(&mut rng, q);
        let theta = wsr_solve(&beta, &vec![1.0; q], eta, &WsrConfig::for_eta(eta))
            .unwrap()
            .theta;
        let val: f64 = theta.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!(val <= best_val * (1.0 + 1e-10));
    }
}
