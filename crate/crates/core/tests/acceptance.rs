//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Run with `cargo test --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use vendi_core::bandwidth::{select_bandwidth, BandwidthConfig};
use vendi_core::ingest::{pair, EmbeddingSet, PairedDataset};
use vendi_core::kernel::{gaussian_kernel, trace_normalize};
use vendi_core::oracle::check_proposition1;
use vendi_core::oracle::scenarios::{
    mode_growth, random_paired_dataset, substitution, theorem1_run, ModeGrowthConfig,
    SubstitutionConfig, Theorem1Scenario,
};
use vendi_core::spectrum::{entropy_alpha2_fast, kernel_entropy};
use vendi_core::{score_report, Result, ScoreReport};

const ORDERS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn random_datasets(count: usize, seed: u64) -> Vec<(PairedDataset, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_paired_dataset(&mut rng, 8..=256, 2..=64).expect("dataset"))
        .collect()
}

/// Reports for every dataset at every order, with the time they took.
fn reports(sets: &[(PairedDataset, f64, f64)]) -> (Vec<[Result<ScoreReport>; 4]>, Duration) {
    let start = Instant::now();
    let all = sets
        .iter()
        .map(|(d, sx, st)| ORDERS.map(|alpha| score_report(d, *sx, *st, alpha)))
        .collect();
    (all, start.elapsed())
}

fn decomposition_identity(all: &[[Result<ScoreReport>; 4]], elapsed: Duration) -> Outcome {
    let mut worst = 0.0f64;
    let mut errors = 0;
    for r in all.iter().flatten() {
        match r {
            Ok(r) => worst = worst.max(r.product_residual()),
            Err(_) => errors += 1,
        }
    }
    outcome(
        errors == 0 && worst <= 1e-6 && within(elapsed, 120),
        format!(
            "{} datasets x {} orders, max relative residual {worst:.3e}, {errors} errors, {:.1}s",
            all.len(),
            ORDERS.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn non_negativity(all: &[[Result<ScoreReport>; 4]]) -> Outcome {
    let mut min_cond = f64::INFINITY;
    let mut min_info = f64::INFINITY;
    let mut negative = vec![0usize; ORDERS.len()];
    let mut errors = 0;
    for per_order in all {
        for (oi, r) in per_order.iter().enumerate() {
            match r {
                Ok(r) => {
                    min_cond = min_cond.min(r.h_x_given_t);
                    min_info = min_info.min(r.i_xt);
                    if r.h_x_given_t < -1e-8 || r.i_xt < -1e-8 {
                        negative[oi] += 1;
                    }
                }
                Err(_) => errors += 1,
            }
        }
    }
    let breakdown: Vec<String> = ORDERS
        .iter()
        .zip(&negative)
        .map(|(a, c)| format!("a={a}:{c}"))
        .collect();
    outcome(
        errors == 0 && min_cond >= -1e-8 && min_info >= -1e-8,
        format!(
            "min H(X|T) {min_cond:.3e}, min I(X;T) {min_info:.3e}, violations [{}], {errors} errors",
            breakdown.join(" ")
        ),
    )
}

fn proposition1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_eig = 0.0f64;
    let mut worst_entropy = 0.0f64;
    let mut errors = 0;
    for _ in 0..50 {
        let n = rng.random_range(1..=32);
        let dx = rng.random_range(1..=16);
        let dt = rng.random_range(1..=256 / dx).min(64);
        let mut draw = |d: usize| {
            let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
            EmbeddingSet::new(n, d, v).expect("finite")
        };
        let (x, t) = (draw(dx), draw(dt));
        let d = pair(x, t, None).expect("paired");
        for alpha in ORDERS {
            match check_proposition1(&d, alpha) {
                Ok(r) => {
                    worst_eig = worst_eig.max(r.eigenvalue_discrepancy);
                    worst_entropy = worst_entropy
                        .max(r.conditional_entropy_gap)
                        .max(r.mutual_information_gap);
                }
                Err(_) => errors += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        errors == 0 && worst_eig <= 1e-8 && worst_entropy <= 1e-8 && within(elapsed, 60),
        format!(
            "50 datasets, max eigenvalue gap {worst_eig:.3e}, max entropy gap {worst_entropy:.3e}, \
             {errors} errors, {:.1}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn theorem1() -> Outcome {
    let start = Instant::now();
    let scenario = Theorem1Scenario::default();
    let mut worst_gap = 0.0f64;
    let mut min_bound = f64::INFINITY;
    let mut ok = true;
    for seed in 0..10 {
        match theorem1_run(4, seed, &scenario) {
            Ok(r) => {
                worst_gap = worst_gap.max(r.gap);
                min_bound = min_bound.min(r.bound);
                ok &= r.gap <= r.bound && r.gap <= 0.05;
            }
            Err(_) => ok = false,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        ok && within(elapsed, 300),
        format!(
            "m=4, n={}, 10 seeds, max gap {worst_gap:.3e}, min bound {min_bound:.3e}, {:.1}s",
            scenario.n,
            elapsed.as_secs_f64()
        ),
    )
}

fn mode_growth_trend() -> Outcome {
    let config = ModeGrowthConfig::default();
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut min_growth = f64::INFINITY;
    let mut worst_track = 0.0f64;
    for seed in 0..3 {
        let (spec, unspec) = match (
            mode_growth(true, seed, &config),
            mode_growth(false, seed, &config),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return outcome(false, format!("seed {seed}: scenario failed")),
        };
        let cv: Vec<f64> = spec.iter().map(|r| r.conditional_vendi).collect();
        let max = cv.iter().copied().fold(f64::MIN, f64::max);
        let min = cv.iter().copied().fold(f64::MAX, f64::min);
        worst_ratio = worst_ratio.max(max / min);
        let growth = spec.last().unwrap().vendi / spec[0].vendi;
        min_growth = min_growth.min(growth);
        let track = unspec
            .iter()
            .map(|r| (r.conditional_vendi / r.vendi - 1.0).abs())
            .fold(0.0, f64::max);
        worst_track = worst_track.max(track);
        ok &= max / min <= 1.2 && growth >= 3.0 && track <= 0.10;
    }
    outcome(
        ok,
        format!(
            "modes 1..={}, 3 seeds: conditional-vendi max/min {worst_ratio:.3}, vendi growth \
             {min_growth:.2}x, uninformative deviation {:.2}%",
            config.max_modes,
            100.0 * worst_track
        ),
    )
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn substitution_trend() -> Outcome {
    let config = SubstitutionConfig::default();
    let mut ok = true;
    let mut worst_rho = -1.0f64;
    let mut monotone = 0;
    for seed in 0..10 {
        let Ok(rows) = substitution(seed, &config) else {
            return outcome(false, format!("seed {seed}: scenario failed"));
        };
        let info: Vec<f64> = rows.iter().map(|r| r.information_vendi).collect();
        let strictly = info.windows(2).all(|w| w[1] < w[0]);
        let rho = spearman(&config.rates, &info);
        monotone += usize::from(strictly);
        worst_rho = worst_rho.max(rho);
        ok &= strictly && rho <= -0.99;
    }
    outcome(
        ok,
        format!("10 seeds, {monotone}/10 strictly decreasing, max Spearman {worst_rho:.3}"),
    )
}

fn alpha2_fast_path() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=512);
        let d = rng.random_range(1..=32);
        let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        let set = EmbeddingSet::new(n, d, v).expect("finite");
        let sigma = rng.random_range(0.1..10.0) * (d as f64).sqrt();
        let k = trace_normalize(gaussian_kernel(&set, sigma).expect("kernel"));
        let fast = entropy_alpha2_fast(&k).expect("fast").value;
        let eig = kernel_entropy(&k, 2.0).expect("eigen").value;
        worst = worst.max((fast - eig).abs());
    }
    outcome(
        worst <= 1e-10,
        format!("100 kernels, max |fast - eigen| {worst:.3e}"),
    )
}

fn performance() -> Outcome {
    let (n, d) = (4096, 768);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut draw = || {
        let v: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
        EmbeddingSet::new(n, d, v).expect("finite")
    };
    let (x, t) = (draw(), draw());
    let data = pair(x, t, None).expect("paired");
    let sigma = (2.0 * d as f64).sqrt();
    let start = Instant::now();
    let result = score_report(&data, sigma, sigma, 1.0);
    let elapsed = start.elapsed();
    outcome(
        result.is_ok() && within(elapsed, 60),
        format!(
            "n={n}, d={d}: {:.1}s on {} thread(s){}",
            elapsed.as_secs_f64(),
            std::thread::available_parallelism().map_or(1, |p| p.get()),
            result
                .err()
                .map(|e| format!(", error: {e}"))
                .unwrap_or_default()
        ),
    )
}

fn bandwidth_protocol() -> Outcome {
    let set = EmbeddingSet::new(200, 5, [0.3, -1.0, 2.0, 0.0, 4.5].repeat(200)).expect("finite");
    let config = BandwidthConfig {
        candidates: Some(vec![0.05, 0.5, 5.0, 50.0]),
        seed: 9,
        ..Default::default()
    };
    let (a, b) = (
        select_bandwidth(&set, &config),
        select_bandwidth(&set, &config),
    );
    let ((Ok(a), Ok(b)), Ok(c)) = ((a, b), select_bandwidth(&set, &BandwidthConfig::default()))
    else {
        return outcome(false, "selection failed".into());
    };
    let default_ok = c.sigma == c.candidates[0];
    outcome(
        a.sigma == 0.05 && a.passed && a == b && default_ok,
        format!(
            "explicit grid -> {} (passed {}), rerun identical {}, default grid -> smallest {}",
            a.sigma,
            a.passed,
            a == b,
            default_ok
        ),
    )
}

fn main() -> ExitCode {
    let sets = random_datasets(200, 7);
    let (all, elapsed) = reports(&sets);
    let criteria: [(&str, &dyn Fn() -> Outcome); 9] = [
        ("decomposition identity", &|| {
            decomposition_identity(&all, elapsed)
        }),
        ("non-negativity", &|| non_negativity(&all)),
        ("proposition oracle", &proposition1),
        ("aggregation bound", &theorem1),
        ("mode-growth trend", &mode_growth_trend),
        ("substitution trend", &substitution_trend),
        ("order-2 fast path", &alpha2_fast_path),
        ("performance", &performance),
        ("bandwidth protocol", &bandwidth_protocol),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        failed += usize::from(!result.pass);
        println!(
            "{} {name}: {}",
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    println!("{} of {} criteria passed", total - failed, total);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
