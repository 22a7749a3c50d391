//! Golden determinism tests: frozen checksums of a reference dataset and a
//! reference training run, and a pinned complexity table for m = 2..5.

use mvfactor::eval::{complexity_csv, complexity_report, percent_increase};
use mvfactor::numerics::{Activation, MlpSpec};
use mvfactor::objectives::Scheme;
use mvfactor::synth::{dataset_checksum, generate, matrix_to_csv, GeneratorConfig};
use mvfactor::train::{export_embeddings, run_training, TrainConfig};

fn fnv(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[test]
fn reference_dataset_checksum_is_stable() {
    let model = GeneratorConfig::desk_default(128, 2024)
        .build_model()
        .unwrap();
    let ds = generate(&model, 128, 2024).unwrap();
    assert_eq!(dataset_checksum(&ds), 0xbb8b_1d2f_61e6_40e4);
}

#[test]
fn reference_run_embeddings_are_stable() {
    let mut cfg = TrainConfig::desk_default(Scheme::Pairwise, 7);
    cfg.embed_dim = 8;
    cfg.encoder_hidden = vec![12];
    cfg.batch_size = 32;
    cfg.pretrain_epochs = 2;
    cfg.joint_epochs = 2;
    cfg.lr = 1e-3;
    cfg.critic_hidden = Some(8);
    let ds = {
        let mut g = GeneratorConfig::desk_default(64, 5);
        g.modality_dims = vec![6; 3];
        g.unique_dims = vec![2; 3];
        g.shared_dim = 2;
        g.label_unique_weights = vec![0.5; 3];
        generate(&g.build_model().unwrap(), 64, 5).unwrap()
    };
    let trained = run_training(&ds, &cfg).unwrap();
    let emb = export_embeddings(&trained, &ds).unwrap();
    assert_eq!(fnv(matrix_to_csv(&emb).as_bytes()), 0x1a09_3bf9_b394_05e9);
}

#[test]
fn complexity_table_matches_golden_file() {
    let mut csv = String::new();
    for m in 2..=5usize {
        let encoders: Vec<MlpSpec> = (0..m)
            .map(|_| MlpSpec::uniform(vec![16, 64, 32], Activation::Relu).unwrap())
            .collect();
        let p = complexity_report(Scheme::Pairwise, 32, &encoders, None, 1).unwrap();
        let f = complexity_report(Scheme::Factorized, 32, &encoders, None, 1).unwrap();
        let inc = percent_increase(&p, &f).unwrap();
        csv.push_str(&complexity_csv(&[p, f], Some(&inc)));
    }
    let golden = include_str!("golden/complexity.csv");
    assert_eq!(csv, golden);
}
