use super::*;
use crate::graph::all_decomposable;
use crate::gwishart::log_marginal_likelihood;
use crate::numeric::normalize_log_weights;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

fn rows(values: &[f64]) -> Vec<DVector<f64>> {
    values.iter().map(|&v| DVector::from_vec(vec![v])).collect()
}

/// `log p(x_1..x_n)` for `p = 1` under the default prior, by brute-force
/// two-dimensional quadrature over `(mu, k)`.
fn quadrature_log_marginal(xs: &[f64]) -> f64 {
    // k ~ Gamma(3/2, rate 1/2); mu | k ~ N(0, 1/k).
    let (nk, nm) = (3000, 3000);
    let lk_lo = -12.0f64;
    let lk_hi = 4.0f64;
    let hk = (lk_hi - lk_lo) / nk as f64;
    let mut total = 0.0;
    for a in 0..nk {
        let k = (lk_lo + (a as f64 + 0.5) * hk).exp();
        let log_gamma_pdf = 1.5 * 0.5f64.ln() - Real::ln_gamma(1.5) + 0.5 * k.ln() - 0.5 * k;
        let sd = (1.0 / k).sqrt();
        let half_width = 12.0 * sd + xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let hm = 2.0 * half_width / nm as f64;
        let mut inner = 0.0;
        for b in 0..nm {
            let mu = -half_width + (b as f64 + 0.5) * hm;
            let mut log_l = 0.5 * (k / std::f64::consts::TAU).ln() - 0.5 * k * mu * mu;
            for x in xs {
                log_l += 0.5 * (k / std::f64::consts::TAU).ln() - 0.5 * k * (x - mu) * (x - mu);
            }
            inner += log_l.exp() * hm;
        }
        // Change of variables to log k.
        total += inner * log_gamma_pdf.exp() * k * hk;
    }
    total.ln()
}

#[test]
fn p1_marginal_matches_quadrature() {
    let prior = PriorSpec::<f64>::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    for xs in [vec![0.0], vec![0.3, -1.2], vec![1.0, 2.0, -0.5]] {
        let stats = ClusterStats::from_rows(1, &rows(&xs));
        let exact = log_marginal_likelihood(&stats, &g, &prior).unwrap();
        let quad = quadrature_log_marginal(&xs);
        assert!((exact - quad).abs() < 1e-6, "{xs:?}: {exact} vs {quad}");
    }
}

#[test]
fn single_observation_must_open_new_cluster() {
    let data = rows(&[0.4]);
    let prior = PriorSpec::standard(1);
    let mut s = MixtureState::new(&data, &prior, 1.0, 0.0).unwrap();
    s.remove_observation(0, &data, &prior).unwrap();
    assert_eq!(s.num_clusters(), 0);
    let w = urn_log_weights(0, &s, &data, &prior, &DecomposableGraph::empty(1).unwrap()).unwrap();
    assert_eq!(w.len(), 1);
    assert_eq!(normalize_log_weights(&w).unwrap(), vec![1.0]);
}

#[test]
fn two_point_coclustering_probability() {
    let data = rows(&[0.0, 0.0]);
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let labels = [0usize, 0];
    let mut s = MixtureState::from_assignments(&data, &prior, &labels, vec![g.clone()], 1.0, 0.0).unwrap();
    s.remove_observation(1, &data, &prior).unwrap();
    let w = normalize_log_weights(&urn_log_weights(1, &s, &data, &prior, &g).unwrap()).unwrap();
    let joint = (quadrature_log_marginal(&[0.0, 0.0]) - quadrature_log_marginal(&[0.0])).exp();
    let fresh = quadrature_log_marginal(&[0.0]).exp();
    let expected = joint / (joint + fresh);
    assert!((w[0] - expected).abs() < 1e-6, "{} vs {expected}", w[0]);
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn zero_discount_weights_are_dp_weights() {
    let data = rows(&[0.1, 0.5, -2.0, 3.0]);
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let mut s =
        MixtureState::from_assignments(&data, &prior, &[0, 0, 1, 1], vec![g.clone(), g.clone()], 0.7, 0.0).unwrap();
    s.remove_observation(0, &data, &prior).unwrap();
    let w = urn_log_weights(0, &s, &data, &prior, &g).unwrap();
    let c0 = ClusterStats::from_rows(1, &data[1..2]);
    let c1 = ClusterStats::from_rows(1, &data[2..4]);
    let pred = |st: &ClusterStats<f64>| crate::gwishart::log_predictive(&data[0], st, &g, &prior).unwrap();
    assert!((w[0] - pred(&c0)).abs() < 1e-10);
    assert!((w[1] - (2.0f64.ln() + pred(&c1))).abs() < 1e-10);
    assert!((w[2] - (0.7f64.ln() + pred(&ClusterStats::empty(1)))).abs() < 1e-10);
}

#[test]
fn remove_then_reinsert_restores_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data: Vec<DVector<f64>> = (0..12).map(|_| DVector::from_fn(3, |_, _| rng.random::<f64>())).collect();
    let prior = PriorSpec::standard(3);
    let mut s = MixtureState::new(&data, &prior, 1.0, 0.0).unwrap();
    let cfg = MixtureConfig::default();
    for _ in 0..5 {
        sweep(&mut s, &data, &prior, &cfg, &mut rng).unwrap();
    }
    let before = s.clone();
    for j in 0..data.len() {
        let label = s.assignments()[j];
        let sizes = s.cluster_sizes();
        if sizes[label] == 1 {
            continue;
        }
        s.remove_observation(j, &data, &prior).unwrap();
        s.insert_observation(j, label, None, &data, &prior).unwrap();
        assert_eq!(s.assignments(), before.assignments());
        assert_eq!(s.cluster_sizes(), before.cluster_sizes());
        for l in 0..s.num_clusters() {
            assert_eq!(s.graph(l), before.graph(l));
            assert!(s.cluster_stats(l).max_abs_diff(before.cluster_stats(l)).unwrap() < 1e-12);
        }
    }
}

fn standardized(data: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let n = data.len() as f64;
    let mean = data.iter().fold(DVector::zeros(data[0].len()), |a, x| a + x) / n;
    let var = data.iter().fold(DVector::zeros(data[0].len()), |a, x| a + (x - &mean).map(|v| v * v)) / (n - 1.0);
    data.iter().map(|x| (x - &mean).component_div(&var.map(f64::sqrt))).collect()
}

fn check_invariants(s: &MixtureState<f64>, data: &[DVector<f64>]) {
    let l = s.num_clusters();
    assert!(l >= 1);
    let mut seen = vec![0usize; l];
    for &c in s.assignments() {
        assert!(c < l);
        seen[c] += 1;
    }
    assert_eq!(seen, s.cluster_sizes());
    assert!(seen.iter().all(|&r| r >= 1));
    for (k, _) in seen.iter().enumerate() {
        let rows: Vec<&DVector<f64>> =
            data.iter().zip(s.assignments()).filter(|(_, &c)| c == k).map(|(x, _)| x).collect();
        let fresh = ClusterStats::from_rows(data[0].len(), rows);
        assert!(s.cluster_stats(k).max_abs_diff(&fresh).unwrap() < 1e-8);
    }
}

#[test]
fn invariants_hold_after_every_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let data: Vec<DVector<f64>> =
        (0..40).map(|i| DVector::from_fn(4, |_, _| rng.random::<f64>() + (i % 3) as f64)).collect();
    let prior = PriorSpec::standard(4);
    let mut s = MixtureState::new(&data, &prior, 1.0, 0.0).unwrap();
    let cfg = MixtureConfig { discount: 0.3, ..MixtureConfig::default() };
    for _ in 0..30 {
        sweep(&mut s, &data, &prior, &cfg, &mut rng).unwrap();
        check_invariants(&s, &data);
    }
}

fn blob_data(seed: u64) -> Vec<DVector<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<DVector<f64>> = (0..40)
        .map(|i| {
            let c = if i < 20 { -6.0 } else { 6.0 };
            DVector::from_fn(2, |_, _| c + crate::numeric::std_normal::<f64, _>(&mut rng))
        })
        .collect();
    standardized(&data)
}

/// Counts sweeps with two clusters and those among them that split the
/// blobs exactly.
fn blob_split_counts(trace: &[TraceRecord]) -> (usize, usize) {
    let mut two = 0;
    let mut matching = 0;
    for r in trace {
        if r.num_clusters() == 2 {
            two += 1;
            let lab = r.labels();
            if lab[..20].iter().all(|&c| c == lab[0]) && lab[20..].iter().all(|&c| c == lab[20]) && lab[0] != lab[20] {
                matching += 1;
            }
        }
    }
    (two, matching)
}

#[test]
fn separated_blobs_with_tiny_concentration() {
    let data = blob_data(3);
    let prior = PriorSpec::standard(2);
    let cfg = MixtureConfig { alpha0: 0.01, resample_alpha0: false, ..MixtureConfig::default() };
    let chain = ChainSettings::new(100, 20, 1).unwrap();
    let trace = run_dpm(&data, &prior, &cfg, &chain, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    assert!(trace.iter().all(|r| r.num_clusters() <= 2));
    let (two, matching) = blob_split_counts(&trace);
    assert!(matching as f64 >= 0.95 * two as f64, "{matching}/{two}");
}

#[test]
fn separated_blobs_are_recovered() {
    let data = blob_data(4);
    let prior = PriorSpec::standard(2);
    let chain = ChainSettings::new(600, 300, 1).unwrap();
    let trace = run_dpm(&data, &prior, &MixtureConfig::default(), &chain, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
    let (two, matching) = blob_split_counts(&trace);
    assert!(two * 2 > trace.len(), "{two}/{}", trace.len());
    assert!(matching as f64 >= 0.95 * two as f64, "{matching}/{two}");
}

fn partition_key(labels: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

#[test]
fn three_point_partition_posterior_matches_enumeration() {
    let xs = [-1.0, 0.2, 1.5];
    let data = rows(&xs);
    let prior = PriorSpec::standard(1);
    let g = DecomposableGraph::empty(1).unwrap();
    let alpha0 = 1.3f64;
    let partitions: Vec<Vec<usize>> = vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 0], vec![0, 1, 1], vec![0, 1, 2]];
    let mut exact: Vec<f64> = partitions
        .iter()
        .map(|part| {
            let l = part.iter().max().unwrap() + 1;
            let mut log_mass = l as f64 * alpha0.ln();
            for k in 0..l {
                let members: Vec<DVector<f64>> =
                    data.iter().zip(part).filter(|(_, &c)| c == k).map(|(x, _)| x.clone()).collect();
                log_mass += Real::ln_gamma(members.len() as f64);
                log_mass += log_marginal_likelihood(&ClusterStats::from_rows(1, &members), &g, &prior).unwrap();
            }
            log_mass.exp()
        })
        .collect();
    let z: f64 = exact.iter().sum();
    exact.iter_mut().for_each(|v| *v /= z);

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = MixtureConfig { alpha0, resample_alpha0: false, ..MixtureConfig::default() };
    let mut s = MixtureState::new(&data, &prior, alpha0, 0.0).unwrap();
    let sweeps = 100_000;
    let mut freq = vec![0.0; 5];
    for _ in 0..sweeps {
        sweep(&mut s, &data, &prior, &cfg, &mut rng).unwrap();
        let key = partition_key(s.assignments());
        freq[partitions.iter().position(|p| *p == key).unwrap()] += 1.0 / sweeps as f64;
    }
    let tv: f64 = exact.iter().zip(&freq).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    assert!(tv < 0.03, "TV {tv}: {exact:?} vs {freq:?}");
}

fn graph_chain_tv(stats: &ClusterStats<f64>, p: usize, steps: usize, seed: u64) -> f64 {
    let prior = PriorSpec::standard(p);
    let all = all_decomposable(p).unwrap();
    let logs: Vec<f64> = all.iter().map(|g| log_marginal_likelihood(stats, g, &prior).unwrap()).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z: f64 = logs.iter().map(|l| (l - top).exp()).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DecomposableGraph::empty(p).unwrap();
    let mut counts: HashMap<String, f64> = HashMap::new();
    for _ in 0..steps {
        g = mh_graph_update(&g, stats, &prior, &GraphPrior::Uniform, 1, &mut rng).unwrap().0;
        *counts.entry(g.to_edge_list()).or_default() += 1.0 / steps as f64;
    }
    all.iter()
        .zip(&logs)
        .map(|(g, l)| ((l - top).exp() / z - counts.get(&g.to_edge_list()).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
        / 2.0
}

#[test]
fn graph_chain_without_data_is_uniform() {
    let tv = graph_chain_tv(&ClusterStats::empty(2), 2, 100_000, 5);
    assert!(tv < 0.02, "{tv}");
}

#[test]
fn graph_chain_matches_exhaustive_posterior() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data: Vec<DVector<f64>> = (0..6)
        .map(|_| {
            let z: f64 = crate::numeric::std_normal(&mut rng);
            DVector::from_fn(3, |i, _| {
                if i < 2 {
                    z + 0.5 * crate::numeric::std_normal::<f64, _>(&mut rng)
                } else {
                    crate::numeric::std_normal(&mut rng)
                }
            })
        })
        .collect();
    let stats = ClusterStats::from_rows(3, &data);
    let tv = graph_chain_tv(&stats, 3, 200_000, 7);
    assert!(tv < 0.03, "{tv}");
}

#[test]
fn same_seed_gives_identical_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<DVector<f64>> = (0..30).map(|_| DVector::from_fn(3, |_, _| rng.random::<f64>())).collect();
    let prior = PriorSpec::standard(3);
    let chain = ChainSettings::new(20, 5, 2).unwrap();
    let cfg = MixtureConfig { sample_params: true, ..MixtureConfig::default() };
    let a = run_dpm(&data, &prior, &cfg, &chain, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let b = run_dpm(&data, &prior, &cfg, &chain, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 7);

    let dp = MixtureConfig { resample_alpha0: false, ..MixtureConfig::default() };
    let py = MixtureConfig { discount: 0.0, ..dp.clone() };
    let a = run_dpm(&data, &prior, &dp, &chain, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    let b = run_dpm(&data, &prior, &py, &chain, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_observation_run() {
    let data = rows(&[0.0]);
    let prior = PriorSpec::standard(1);
    let chain = ChainSettings::new(50, 10, 1).unwrap();
    let trace = run_dpm(&data, &prior, &MixtureConfig::default(), &chain, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert!(trace.iter().all(|r| r.num_clusters() == 1));
}

#[test]
fn invalid_discount_is_a_config_error() {
    let cfg = MixtureConfig { discount: 1.5, ..MixtureConfig::default() };
    assert!(matches!(cfg.validate(), Err(Error::Config(m)) if m.contains("discount")));
}

#[test]
fn appended_observation_joins_its_predecessor() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data: Vec<DVector<f64>> = (0..25).map(|_| DVector::from_fn(2, |_, _| rng.random::<f64>())).collect();
    let prior = PriorSpec::standard(2);
    let cfg = MixtureConfig::default();
    let mut s = MixtureState::new(&data[..20], &prior, 1.0, 0.0).unwrap();
    for n in 21..=25 {
        sweep(&mut s, &data[..n - 1], &prior, &cfg, &mut rng).unwrap();
        s.append_observation(&data[..n], &prior).unwrap();
        assert_eq!(s.assignments()[n - 1], s.assignments()[n - 2]);
        check_invariants(&s, &data[..n]);
    }
}
