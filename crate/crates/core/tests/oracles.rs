//! Brute-force oracles checked against the optimized code paths.

use std::collections::HashMap;

use aaseq_core::embed::{
    embed_dataset, kmer_spectrum, minimizer_of_kmer, minimizer_spectrum, spaced_spectrum, Method,
    PcaPolicy, SpectrumConfig,
};
use aaseq_core::seq_io::{synth_dataset, Alphabet, SynthParams};
use aaseq_core::trainer::{
    batch_gradient, cross_entropy, init_weights, normalize_prediction, train, NormMode, TrainConfig,
};
use aaseq_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_seq(rng: &mut ChaCha8Rng, alphabet: &str, len: usize) -> String {
    let syms: Vec<char> = alphabet.chars().collect();
    (0..len)
        .map(|_| syms[rng.random_range(0..syms.len())])
        .collect()
}

/// Rank computed independently: position of each char in the alphabet string.
fn oracle_rank(mer: &str, alphabet: &str) -> usize {
    let sigma = alphabet.chars().count();
    mer.chars()
        .fold(0, |acc, c| acc * sigma + alphabet.find(c).unwrap())
}

fn ordinals(s: &str, alphabet: &str) -> Vec<usize> {
    s.chars().map(|c| alphabet.find(c).unwrap()).collect()
}

fn oracle_minimizer(kmer: &str, m: usize, alphabet: &str) -> String {
    let reversed: String = kmer.chars().rev().collect();
    let mut windows: Vec<String> = Vec::new();
    for s in [kmer, reversed.as_str()] {
        for i in 0..=s.len() - m {
            windows.push(s[i..i + m].to_string());
        }
    }
    windows
        .into_iter()
        .min_by(|a, b| ordinals(a, alphabet).cmp(&ordinals(b, alphabet)))
        .unwrap()
}

fn to_dense(counts: HashMap<String, u32>, alphabet: &str, len: usize) -> Vec<u32> {
    let width = alphabet.chars().count().pow(len as u32);
    let mut v = vec![0; width];
    for (mer, c) in counts {
        v[oracle_rank(&mer, alphabet)] += c;
    }
    v
}

fn count_kmers(s: &str, k: usize) -> HashMap<String, u32> {
    let mut map = HashMap::new();
    for i in 0..=s.len() - k {
        *map.entry(s[i..i + k].to_string()).or_insert(0) += 1;
    }
    map
}

#[test]
fn spectra_match_dictionary_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for preset in [Alphabet::AMINO, Alphabet::NUCLEOTIDE] {
        let alphabet = Alphabet::new(preset).unwrap();
        for _ in 0..100 {
            let n = rng.random_range(20..=200);
            let s = random_seq(&mut rng, preset, n);

            let got = kmer_spectrum(&s, 3, &alphabet).unwrap();
            assert_eq!(got, to_dense(count_kmers(&s, 3), preset, 3));
            assert_eq!(got.iter().sum::<u32>() as usize, n - 3 + 1);

            let mut mins = HashMap::new();
            for i in 0..=n - 9 {
                *mins
                    .entry(oracle_minimizer(&s[i..i + 9], 3, preset))
                    .or_insert(0) += 1;
            }
            let got = minimizer_spectrum(&s, 9, 3, &alphabet).unwrap();
            assert_eq!(got, to_dense(mins, preset, 3));
            assert_eq!(got.iter().sum::<u32>() as usize, n - 9 + 1);

            let mut spaced = HashMap::new();
            for i in 0..=n - 9 {
                let gmer = &s[i..i + 9];
                *spaced.entry(gmer[..4].to_string()).or_insert(0) += 1;
            }
            let got = spaced_spectrum(&s, 4, 9, &alphabet).unwrap();
            assert_eq!(got, to_dense(spaced, preset, 4));
            assert_eq!(got.iter().sum::<u32>() as usize, n - 9 + 1);
        }
    }
}

#[test]
fn minimizer_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let alphabet = Alphabet::amino();
    for _ in 0..1000 {
        let kmer = random_seq(&mut rng, Alphabet::AMINO, 9);
        assert_eq!(
            minimizer_of_kmer(&kmer, 3, &alphabet).unwrap(),
            oracle_minimizer(&kmer, 3, Alphabet::AMINO)
        );
    }
}

#[test]
fn embedded_rows_sum_to_mer_counts() {
    let s = synth_dataset(
        &SynthParams {
            num_classes: 3,
            per_class: 15,
            length: 40,
            motif_len: 5,
            noise: 0.1,
            seed: 5,
        },
        &Alphabet::nucleotide(),
    )
    .unwrap();
    for (method, window) in [
        (Method::KmerSpectrum { k: 3 }, 3),
        (Method::Minimizer { k: 9, m: 3 }, 9),
        (Method::Spaced { k: 4, g: 9 }, 9),
    ] {
        let cfg = SpectrumConfig::new(method, Alphabet::nucleotide()).unwrap();
        let e = embed_dataset(&s.dataset, &cfg, &PcaPolicy::DISABLED).unwrap();
        for (seq, row) in s
            .dataset
            .sequences()
            .iter()
            .zip(e.features.values.row_iter())
        {
            assert_eq!(
                row.iter().sum::<f64>(),
                (seq.residues.len() - window + 1) as f64
            );
            assert!(row.iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
        }
    }
}

fn mean_loss(x: &Matrix, y: &Matrix, w: &Matrix) -> f64 {
    let mut total = 0.0;
    for (xi, yi) in x.row_iter().zip(y.row_iter()) {
        let scores: Vec<f64> = w
            .row_iter()
            .map(|r| r.iter().zip(xi).map(|(a, b)| a * b).sum())
            .collect();
        let p = normalize_prediction(&scores, NormMode::Softmax, 1e-10).unwrap();
        total += cross_entropy(yi, &p, 1e-10);
    }
    total / x.rows() as f64
}

#[test]
fn softmax_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let (c, d, n) = (3, 5, 4);
    let h = 1e-6;
    for trial in 0..20 {
        let w = init_weights(c, d, 1000 + trial);
        let x = Matrix::from_row_major(
            n,
            d,
            (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let mut y = Matrix::zeros(n, c);
        for i in 0..n {
            y[(i, rng.random_range(0..c))] = 1.0;
        }
        let g = batch_gradient(&x, &y, &w, NormMode::Softmax, 1e-10).unwrap();
        for ci in 0..c {
            for j in 0..d {
                let mut plus = w.clone();
                plus[(ci, j)] += h;
                let mut minus = w.clone();
                minus[(ci, j)] -= h;
                let fd = (mean_loss(&x, &y, &plus) - mean_loss(&x, &y, &minus)) / (2.0 * h);
                // g is the descent direction
                let rel = (g[(ci, j)] + fd).abs() / fd.abs().max(g[(ci, j)].abs()).max(1e-8);
                assert!(
                    rel < 1e-5,
                    "trial {trial} entry ({ci},{j}): g={} fd={fd} rel={rel}",
                    g[(ci, j)]
                );
            }
        }
    }
}

/// History-free loop written out directly: W ← W + mean((y − p)·xᵀ).
fn plain_loop(x: &Matrix, y: &Matrix, iters: usize, seed: u64) -> Vec<(f64, f64)> {
    let (n, d, c) = (x.rows(), x.cols(), y.cols());
    let mut w = init_weights(c, d, seed);
    let mut out = Vec::new();
    for _ in 0..iters {
        let mut grad = vec![0.0; c * d];
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for i in 0..n {
            let xi = x.row(i);
            let yi = y.row(i);
            let mut scores = vec![0.0; c];
            for k in 0..c {
                let mut acc = 0.0;
                for j in 0..d {
                    acc += w[(k, j)] * xi[j];
                }
                scores[k] = acc;
            }
            let mx = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = scores.iter().map(|s| (s - mx).exp()).collect();
            let mut z = 0.0;
            for v in &e {
                z += v;
            }
            let p: Vec<f64> = e.iter().map(|v| v / z).collect();
            let mut acc = 0.0;
            for k in 0..c {
                acc += yi[k] * (p[k].max(0.0) + 1e-10).ln();
            }
            loss_sum += -acc;
            let pred = (0..c).fold(0, |b, k| if p[k] > p[b] { k } else { b });
            let truth = (0..c).fold(0, |b, k| if yi[k] > yi[b] { k } else { b });
            if pred == truth {
                correct += 1;
            }
            for k in 0..c {
                let r = yi[k] - p[k];
                for j in 0..d {
                    grad[k * d + j] += r * xi[j];
                }
            }
        }
        out.push((loss_sum / n as f64, correct as f64 / n as f64));
        for k in 0..c {
            for j in 0..d {
                w[(k, j)] += grad[k * d + j] / n as f64;
            }
        }
    }
    out
}

#[test]
fn alpha_zero_equals_plain_loop() {
    let s = synth_dataset(
        &SynthParams {
            num_classes: 3,
            per_class: 20,
            length: 40,
            motif_len: 6,
            noise: 0.05,
            seed: 13,
        },
        &Alphabet::nucleotide(),
    )
    .unwrap();
    let cfg = SpectrumConfig::new(Method::KmerSpectrum { k: 3 }, Alphabet::nucleotide()).unwrap();
    let x = embed_dataset(&s.dataset, &cfg, &PcaPolicy::default())
        .unwrap()
        .features
        .values;
    let y = s.dataset.one_hot_matrix();
    let tc = TrainConfig {
        alpha: 0.0,
        iters: 40,
        seed: 5,
        ..Default::default()
    };
    let run = train(&x, &y, &tc).unwrap();
    let plain = plain_loop(&x, &y, 40, 5);
    for (r, (loss, acc)) in run.trace.records.iter().zip(plain) {
        assert_eq!(
            r.mean_loss.to_bits(),
            loss.to_bits(),
            "iteration {}",
            r.iteration
        );
        assert_eq!(r.accuracy.to_bits(), acc.to_bits());
    }
}
