use aaseq_core::embed::{embed_dataset, ColumnKind, Method, PcaPolicy, SpectrumConfig};
use aaseq_core::seq_io::{synth_dataset, Alphabet, SynthParams};
use aaseq_core::trainer::{alpha_sweep, default_grid, NormMode, TrainConfig};

#[test]
fn wide_spectrum_reduces_to_requested_components() {
    // 20 symbols with k = 3 gives an 8000-wide spectrum
    let alphabet = Alphabet::new("ACDEFGHIKLMNPQRSTVWY").unwrap();
    let s = synth_dataset(
        &SynthParams {
            num_classes: 3,
            per_class: 200,
            length: 60,
            motif_len: 6,
            noise: 0.05,
            seed: 21,
        },
        &alphabet,
    )
    .unwrap();
    let cfg = SpectrumConfig::new(Method::KmerSpectrum { k: 3 }, alphabet).unwrap();
    assert_eq!(cfg.width(), 8000);
    let e = embed_dataset(
        &s.dataset,
        &cfg,
        &PcaPolicy {
            threshold: 1000,
            components: 500,
        },
    )
    .unwrap();
    assert_eq!(e.features.values.shape(), (600, 500));
    assert_eq!(e.features.columns, ColumnKind::PrincipalComponent);
    let pca = e.pca.unwrap();
    assert!(pca.explained_variance.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn anderson_sweep_on_planted_motifs() {
    let s = synth_dataset(
        &SynthParams {
            num_classes: 3,
            per_class: 100,
            length: 60,
            motif_len: 6,
            noise: 0.05,
            seed: 13,
        },
        &Alphabet::amino(),
    )
    .unwrap();
    let cfg = SpectrumConfig::new(Method::DEFAULT_KMER, Alphabet::amino()).unwrap();
    let x = embed_dataset(&s.dataset, &cfg, &PcaPolicy::default())
        .unwrap()
        .features
        .values;
    let y = s.dataset.one_hot_matrix();
    let base = TrainConfig {
        iters: 200,
        seed: 13,
        norm: NormMode::Softmax,
        ..Default::default()
    };
    let sweep = alpha_sweep(&x, &y, &base, &default_grid(), 0.0).unwrap();
    let no_aa = sweep.entry(0.0).unwrap().final_loss.unwrap();
    let best = sweep.best().unwrap().final_loss.unwrap();
    assert!(best <= no_aa);
}
