use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use vendi_core::ingest::{pair, EmbeddingSet};
use vendi_core::score_report;
use vendi_core::scores::{conditional_vendi, information_vendi, vendi};

fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> EmbeddingSet {
    let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    EmbeddingSet::new(n, d, v).unwrap()
}

#[test]
fn constant_prompts_carry_no_information() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = gaussian(&mut rng, 40, 3);
    let t = EmbeddingSet::new(40, 2, vec![0.7; 80]).unwrap();
    let d = pair(x.clone(), t, None).unwrap();
    for alpha in [0.5, 1.0, 2.0, 4.0] {
        let r = score_report(&d, 1.5, 1.0, alpha).unwrap();
        assert!((r.information_vendi - 1.0).abs() < 1e-9);
        assert!((r.conditional_vendi - vendi(&x, 1.5, alpha).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn standalone_scores_agree_with_report() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let x = gaussian(&mut rng, 60, 4);
    let t = gaussian(&mut rng, 60, 2);
    let d = pair(x.clone(), t, None).unwrap();
    let r = score_report(&d, 2.0, 1.0, 1.0).unwrap();
    assert!((r.vendi_x - vendi(&x, 2.0, 1.0).unwrap()).abs() < 1e-10);
    assert!((r.conditional_vendi - conditional_vendi(&d, 2.0, 1.0, 1.0).unwrap()).abs() < 1e-10);
    assert!((r.information_vendi - information_vendi(&d, 2.0, 1.0, 1.0).unwrap()).abs() < 1e-10);
}

#[test]
fn reordering_pairs_leaves_scores_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = pair(gaussian(&mut rng, 50, 3), gaussian(&mut rng, 50, 3), None).unwrap();
    let mut order: Vec<usize> = (0..50).collect();
    order.reverse();
    order.swap(3, 17);
    let a = score_report(&d, 1.0, 1.0, 2.0).unwrap();
    let b = score_report(&d.permuted(&order).unwrap(), 1.0, 1.0, 2.0).unwrap();
    assert!((a.h_xt - b.h_xt).abs() < 1e-10);
    assert!((a.i_xt - b.i_xt).abs() < 1e-10);
}

#[test]
fn vendi_stays_in_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [1, 2, 17, 90] {
        let x = gaussian(&mut rng, n, 5);
        for sigma in [0.01, 1.0, 100.0] {
            let v = vendi(&x, sigma, 1.0).unwrap();
            assert!((1.0..=n as f64 + 1e-9).contains(&v), "{v}");
        }
    }
}
