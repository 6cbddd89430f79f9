use super::*;
use crate::gwishart::log_marginal_likelihood;
use crate::numeric::normalize_log_weights;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rows(values: &[f64]) -> Vec<DVector<f64>> {
    values.iter().map(|&v| DVector::from_vec(vec![v])).collect()
}

fn check_invariants(s: &HmmState<f64>, data: &[DVector<f64>]) {
    let l = s.num_states();
    assert_eq!(s.counts(), recount(s.trajectory(), l).as_slice());
    assert_eq!(s.gamma().len(), l + 1);
    assert!(s.gamma().iter().all(|&g| g > 0.0));
    assert!((s.gamma().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    for k in 0..l {
        let members: Vec<&DVector<f64>> =
            data.iter().zip(s.trajectory()).filter(|(_, &c)| c == k).map(|(x, _)| x).collect();
        assert!(!members.is_empty());
        let fresh = ClusterStats::from_rows(data[0].len(), members);
        assert!(s.state_stats(k).max_abs_diff(&fresh).unwrap() < 1e-8);
    }
}

#[test]
fn middle_point_weights_follow_the_self_transition_case() {
    let data = rows(&[0.1, -0.3, 0.8]);
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let mut s =
        HmmState::from_trajectory(&data, &prior, &[0, 0, 0], vec![g.clone()], vec![0.6, 0.4], 2.0, 1.0).unwrap();
    s.remove_time(1, &data, &prior).unwrap();
    assert_eq!(s.counts(), &[vec![0]]);
    let w = state_log_weights(1, &s, &data, &prior, &g).unwrap();
    let stats = ClusterStats::from_rows(1, [&data[0], &data[2]]);
    let pred_old = crate::gwishart::log_predictive(&data[1], &stats, &g, &prior).unwrap();
    let pred_new = crate::gwishart::log_predictive(&data[1], &ClusterStats::empty(1), &g, &prior).unwrap();
    // (0 + 2 * 0.6) (0 + 2 * 0.6 + 1) / (0 + 2 + 1) and 2 * 0.4 * 0.6.
    assert!((w[0] - (0.88f64.ln() + pred_old)).abs() < 1e-12);
    assert!((w[1] - (0.48f64.ln() + pred_new)).abs() < 1e-12);
    let norm = normalize_log_weights(&w).unwrap();
    assert!((norm.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn boundary_weights() {
    let data = rows(&[0.1, -0.3, 0.8, 0.2]);
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let gamma = vec![0.5, 0.3, 0.2];
    let mut s =
        HmmState::from_trajectory(&data, &prior, &[0, 1, 1, 0], vec![g.clone(), g.clone()], gamma, 1.5, 1.0).unwrap();
    let strip = |w: Vec<f64>, s: &HmmState<f64>, j: usize| -> Vec<f64> {
        let mut t = w;
        for (k, v) in t.iter_mut().enumerate() {
            let stats = if k < s.num_states() { s.state_stats(k).clone() } else { ClusterStats::empty(1) };
            *v -= crate::gwishart::log_predictive(&data[j], &stats, &g, &prior).unwrap();
        }
        t
    };
    s.remove_time(0, &data, &prior).unwrap();
    let w = strip(state_log_weights(0, &s, &data, &prior, &g).unwrap(), &s, 0);
    // Remaining counts: 1->1 once, 1->0 once; row total of state 1 is 2.
    let a = 1.5;
    let expected = [0.5 * (0.0 + a * 0.3) / (0.0 + a), 0.3 * (1.0 + a * 0.3) / (2.0 + a), 0.2 * 0.3];
    for (got, want) in w.iter().zip(expected) {
        assert!((got - f64::ln(want)).abs() < 1e-12);
    }
    s.insert_time(0, 0, &data, &prior).unwrap();
    s.remove_time(3, &data, &prior).unwrap();
    let w = strip(state_log_weights(3, &s, &data, &prior, &g).unwrap(), &s, 3);
    let l = s.num_states();
    // Previous state is 1 with one 1->1 transition; the outgoing factor is gone.
    let gam = s.gamma().to_vec();
    let want: Vec<f64> =
        (0..l).map(|k| s.counts()[1][k] as f64 + a * gam[k]).chain(std::iter::once(a * gam[l])).map(f64::ln).collect();
    for (got, want) in w.iter().zip(want) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn bookkeeping_survives_random_moves() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<DVector<f64>> =
        (0..25).map(|i| DVector::from_fn(2, |_, _| rng.random::<f64>() + (i / 8) as f64)).collect();
    let prior = PriorSpec::standard(2);
    let mut s = HmmState::new(&data, &prior, 1.0, 1.0).unwrap();
    for _ in 0..500 {
        let j = rng.random_range(0..data.len());
        s.remove_time(j, &data, &prior).unwrap();
        let l = s.num_states();
        let label = rng.random_range(0..=l);
        if label == l {
            s.spawn_state(DecomposableGraph::empty(2).unwrap(), &prior, SpawnRule::StickBreaking, &mut rng).unwrap();
        }
        s.insert_time(j, label, &data, &prior).unwrap();
        check_invariants(&s, &data);
    }
}

#[test]
fn invariants_hold_after_every_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data: Vec<DVector<f64>> =
        (0..60).map(|i| DVector::from_fn(3, |_, _| rng.random::<f64>() + 2.0 * ((i / 20) % 2) as f64)).collect();
    let prior = PriorSpec::standard(3);
    let mut s = HmmState::new(&data, &prior, 1.0, 1.0).unwrap();
    let cfg = IhmmConfig::default();
    let table = LogStirling1Table::new(data.len());
    for _ in 0..40 {
        sweep(&mut s, &data, &prior, &cfg, &table, &mut rng).unwrap();
        check_invariants(&s, &data);
        assert!(s.alpha() > 0.0 && s.alpha0() > 0.0);
        for (row, mrow) in s.counts().iter().zip(s.tables()) {
            for (&r, &m) in row.iter().zip(mrow) {
                assert!(m <= r && (r == 0) == (m == 0));
            }
        }
    }
}

/// Exact probability that both points share a state: `P(same) = 1 / (1 +
/// alpha0)` a priori, reweighted by the emission marginals.
fn two_point_posterior(x: f64, alpha0: f64) -> f64 {
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let one = log_marginal_likelihood(&ClusterStats::from_rows(1, &rows(&[x])), &g, &prior).unwrap();
    let both = log_marginal_likelihood(&ClusterStats::from_rows(1, &rows(&[x, x])), &g, &prior).unwrap();
    let same = both.exp() / (1.0 + alpha0);
    let diff = (2.0 * one).exp() * alpha0 / (1.0 + alpha0);
    same / (same + diff)
}

#[test]
fn two_point_trajectory_posterior_matches_enumeration() {
    let data = rows(&[0.3, 0.3]);
    let prior = PriorSpec::standard(1);
    let alpha0 = 1.4;
    let cfg = IhmmConfig { alpha0, resample_alpha0: false, alpha: 0.8, resample_alpha: false, ..IhmmConfig::default() };
    let exact = two_point_posterior(0.3, alpha0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut s = HmmState::new(&data, &prior, 0.8, alpha0).unwrap();
    let table = LogStirling1Table::new(2);
    let sweeps = 100_000;
    let mut same = 0usize;
    for _ in 0..sweeps {
        sweep(&mut s, &data, &prior, &cfg, &table, &mut rng).unwrap();
        same += usize::from(s.num_states() == 1);
    }
    let freq = same as f64 / sweeps as f64;
    // Total variation over the two partitions is |freq - exact|.
    assert!((freq - exact).abs() < 0.03, "{freq} vs {exact}");
}

#[test]
fn constant_data_stays_in_one_state() {
    let data = rows(&[0.0; 5]);
    let prior = PriorSpec::standard(1);
    let chain = ChainSettings::new(200, 50, 1).unwrap();
    let trace = run_ihmm(&data, &prior, &IhmmConfig::default(), &chain, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let single = trace.iter().filter(|r| r.num_clusters() == 1).count();
    assert!(single * 2 > trace.len());
}

#[test]
fn same_seed_gives_identical_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let data: Vec<DVector<f64>> = (0..30).map(|_| DVector::from_fn(3, |_, _| rng.random::<f64>())).collect();
    let prior = PriorSpec::standard(3);
    let chain = ChainSettings::new(20, 5, 3).unwrap();
    let cfg = IhmmConfig { sample_params: true, ..IhmmConfig::default() };
    let a = run_ihmm(&data, &prior, &cfg, &chain, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let b = run_ihmm(&data, &prior, &cfg, &chain, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 5);
    assert!(a.iter().all(|r| r.gamma.as_ref().unwrap().len() == r.num_clusters() + 1));
}

#[test]
fn appended_time_keeps_bookkeeping_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<DVector<f64>> = (0..30).map(|_| DVector::from_fn(2, |_, _| rng.random::<f64>())).collect();
    let prior = PriorSpec::standard(2);
    let cfg = IhmmConfig::default();
    let table = LogStirling1Table::new(data.len());
    let mut s = HmmState::new(&data[..20], &prior, 1.0, 1.0).unwrap();
    for _ in 0..5 {
        sweep(&mut s, &data[..20], &prior, &cfg, &table, &mut rng).unwrap();
    }
    for n in 21..=30 {
        s.append_time(&data[..n], &prior).unwrap();
        check_invariants(&s, &data[..n]);
        sweep(&mut s, &data[..n], &prior, &cfg, &table, &mut rng).unwrap();
    }
    assert!(s.append_time(&data[..29], &prior).is_err());
}

#[test]
fn complete_prior_keeps_every_state_complete() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data: Vec<DVector<f64>> =
        (0..40).map(|i| DVector::from_fn(3, |_, _| rng.random::<f64>() + 3.0 * ((i / 20) as f64))).collect();
    let cfg = IhmmConfig { graph_prior: GraphPrior::Complete, ..IhmmConfig::default() };
    let chain = ChainSettings::new(30, 10, 1).unwrap();
    let trace = run_ihmm(&data, &PriorSpec::standard(3), &cfg, &chain, &mut rng).unwrap();
    for r in &trace {
        assert!(r.graphs.iter().all(|g| g.len() == 3));
        assert_eq!(r.mh_proposed, 0);
    }
}
