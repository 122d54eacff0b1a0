//! Acceptance criteria. Run with `--nocapture` to see one PASS/FAIL line each.

mod common;

use std::time::{Duration, Instant};

use common::{max_abs_diff, random_image, reference_encode, synthetic_stream};
use fic::boxcount::fractal_dimension;
use fic::codec::{deserialize, serialize, StreamHeader, HEADER_LEN};
use fic::metrics::{bit_budget, compression_ratio};
use fic::transform::best_fit;
use fic::{
    encode, fixtures, rmse, Angle, Block, BlockGrid, BoxCountConfig, CandidateSet, CodecConfig,
    CompressedImage, Decoder, Direction, Image, Quantizer, Transformation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, what: &str, ok: bool, detail: String) {
    println!("[{}] {id}: {what} ({detail})", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn cfg(mirrored: bool, angles: usize, contrast_bits: u32) -> CodecConfig {
    CodecConfig {
        candidates: CandidateSet::new(mirrored, angles).unwrap(),
        contrast_bits,
        ..CodecConfig::default()
    }
}

fn with_box(mut c: CodecConfig, t1: u8, t2: f64) -> CodecConfig {
    c.box_counting = Some(BoxCountConfig::with_default_sizes(t1, t2, c.dest_size).unwrap());
    c
}

/// CR of a stream with `count` covered blocks; pixel content never matters.
fn cr(size: usize, c: &CodecConfig, count: usize) -> f64 {
    let stream = synthetic_stream(size, size, c, count);
    compression_ratio(&Image::filled(size, size, 0), &stream).unwrap()
}

#[test]
fn ac1_bit_budget_cr_exactness() {
    let start = Instant::now();
    let base = cfg(true, 4, 8);
    let small = cr(256, &base, 256);
    let large = cr(512, &base, 1024);
    let elapsed = start.elapsed();
    let ok = (small - 81.92).abs() <= 0.005
        && (large - 75.85).abs() <= 0.005
        && bit_budget(&base, 256, 256).unwrap().bits_per_transform == 25
        && elapsed < Duration::from_secs(1);
    report(
        "AC-1",
        "baseline CR 81.92 (256x256) and 75.85 (512x512)",
        ok,
        format!("{small:.4} / {large:.4} in {elapsed:?}"),
    );
}

#[test]
fn ac2_optimization_cr_deltas() {
    let checks = [
        ("contrast 4-bit 256", cr(256, &cfg(true, 4, 4), 256), 97.52),
        ("contrast 4-bit 512", cr(512, &cfg(true, 4, 4), 1024), 89.04),
        ("no direction, 2 angles 256", cr(256, &cfg(false, 2, 8), 256), 89.04),
        ("no direction, 2 angles 512", cr(512, &cfg(false, 2, 8), 1024), 81.92),
        ("integrated, 233 blocks", cr(256, &with_box(cfg(false, 2, 4), 50, 1.6), 233), 118.43),
        ("integrated, 952 blocks", cr(512, &with_box(cfg(false, 2, 4), 20, 2.0), 952), 104.90),
    ];
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, got, want)| format!("{name}: {got:.4} vs {want}"))
        .collect();
    let ok = checks.iter().all(|(_, got, want)| (got - want).abs() <= 0.01);
    report("AC-2", "optimization CR deltas", ok, detail.join("; "));
}

/// Box counts by direct tiling, independent of the library.
fn oracle_dimension(img: &Image, t1: f64, sizes: &[usize]) -> f64 {
    let n = img.width();
    let pts: Vec<(f64, f64)> = sizes
        .iter()
        .filter_map(|&r| {
            let mut count = 0usize;
            for i in (0..n).step_by(r) {
                for j in (0..n).step_by(r) {
                    let mut s = 0u64;
                    for a in i..i + r {
                        for b in j..j + r {
                            s += img.get(a, b) as u64;
                        }
                    }
                    if s as f64 / (r * r) as f64 > t1 {
                        count += 1;
                    }
                }
            }
            (count > 0).then(|| ((1.0 / r as f64).ln(), (count as f64).ln()))
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    num / den
}

#[test]
fn ac3_box_counting_correctness() {
    let start = Instant::now();
    let solid = Block::constant(16, 255.0);
    let solid_d = fractal_dimension(&solid, &BoxCountConfig::with_default_sizes(50, 1.6, 16).unwrap()).unwrap();

    let sizes = [64, 32, 16, 8, 4, 2];
    let carpet = fixtures::sierpinski_carpet(64);
    let carpet_d = fractal_dimension(
        &Block::from_image(&carpet, 0, 0, 64),
        &BoxCountConfig::new(50, 1.0, sizes.to_vec()).unwrap(),
    )
    .unwrap();
    let oracle_d = oracle_dimension(&carpet, 50.0, &sizes);
    let target = 8f64.ln() / 3f64.ln();
    let elapsed = start.elapsed();
    let ok = (solid_d - 2.0).abs() <= 1e-9
        && (carpet_d - target).abs() <= 0.15
        && (carpet_d - oracle_d).abs() <= 1e-12
        && elapsed < Duration::from_secs(1);
    report(
        "AC-3",
        "solid block D = 2, Sierpinski carpet D ~ 1.893",
        ok,
        format!("solid {solid_d}, carpet {carpet_d:.4} (oracle {oracle_d:.4}) in {elapsed:?}"),
    );
}

#[test]
fn ac4_monotonic_trends() {
    let start = Instant::now();
    let t2s = [0.5, 1.6, 1.7, 1.8, 1.9, 2.0];
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["texture", "carpet"] {
        let img = fixtures::by_name(name, 256).unwrap();
        for t1 in [30u8, 50] {
            let mut counts = Vec::new();
            let mut ratios = Vec::new();
            for &t2 in &t2s {
                let stream = encode(&img, &with_box(CodecConfig::default(), t1, t2)).unwrap();
                counts.push(stream.transform_count());
                // an empty stream has unbounded ratio
                ratios.push(compression_ratio(&img, &stream).unwrap_or(f64::INFINITY));
            }
            ok &= counts.windows(2).all(|w| w[0] >= w[1]);
            ok &= ratios.windows(2).all(|w| w[0] <= w[1]);
            detail.push(format!("{name} t1={t1}: {counts:?}"));
        }
    }

    // per-block best MSE never improves when the candidate set shrinks
    let img = fixtures::value_noise(64, 64, 21);
    let cq = Quantizer::contrast(8).unwrap();
    let bq = Quantizer::brightness(8).unwrap();
    let sources: Vec<Block> = BlockGrid::for_image(&img, 32, 32)
        .unwrap()
        .indices()
        .map(|(k, l)| fic::preprocess::reduce(&Block::from_image(&img, k * 32, l * 32, 32), 2).unwrap())
        .collect();
    let dest_grid = BlockGrid::for_image(&img, 16, 16).unwrap();
    let sets = [CandidateSet::FULL, CandidateSet::new(false, 4).unwrap(), CandidateSet::REDUCED, CandidateSet::new(false, 1).unwrap()];
    let mut mse_ok = true;
    for (bi, bj) in dest_grid.indices() {
        let dest = Block::from_image(&img, bi * 16, bj * 16, 16);
        let best: Vec<f64> = sets
            .iter()
            .map(|set| {
                sources
                    .iter()
                    .map(|s| best_fit(s, &dest, set, &cq, &bq).mse)
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        mse_ok &= best.windows(2).all(|w| w[0] <= w[1]);
    }
    ok &= mse_ok;
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    detail.push(format!("per-block MSE monotone: {mse_ok}"));
    report("AC-4", "t2 sweep and candidate-set trends", ok, format!("{} in {elapsed:?}", detail.join("; ")));
}

#[test]
fn ac5_oracle_equivalence_across_threads() {
    let start = Instant::now();
    let config = CodecConfig::with_dest_size(4);
    let mut ok = true;
    for seed in 0..5 {
        let img = random_image(32, 32, seed);
        let expected = serialize(&reference_encode(&img, &config));
        for threads in [1, 2, 8] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| serialize(&encode(&img, &config).unwrap()));
            ok &= got == expected;
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    report(
        "AC-5",
        "parallel encoder byte-identical to reference at 1/2/8 threads",
        ok,
        format!("5 images x 3 thread counts in {elapsed:?}"),
    );
}

#[test]
fn ac6_decoder_convergence() {
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["gradient", "texture"] {
        let img = fixtures::by_name(name, 256).unwrap();
        let stream = encode(&img, &CodecConfig::default()).unwrap();

        let mut dec = Decoder::new(&stream, None).unwrap();
        let mut prev = dec.image();
        let mut errors = Vec::new();
        let mut steps = Vec::new();
        for _ in 0..16 {
            dec.step();
            let cur = dec.image();
            errors.push(rmse(&img, &cur).unwrap());
            steps.push(max_abs_diff(&prev, &cur));
            prev = cur;
        }
        let gap = (errors[7] - errors[15]).abs();
        // successive iterates once the default iteration count is reached
        let late_step = *steps[7..].iter().max().unwrap();

        let other = Decoder::new(&stream, Some(&fixtures::checkerboard(256, 256, 8))).unwrap().run(16);
        let seeds = rmse(&prev, &other).unwrap();

        ok &= gap <= 0.5 && late_step <= 2 && seeds <= 1.0;
        detail.push(format!(
            "{name}: rmse@8 {:.3} rmse@16 {:.3}, max step after 8 = {late_step}, seed gap {seeds:.3}",
            errors[7], errors[15]
        ));
    }
    report("AC-6", "decoder convergence and seed independence", ok, detail.join("; "));
}

fn random_stream(rng: &mut ChaCha8Rng) -> CompressedImage {
    let dest = [2usize, 4, 8, 16][rng.random_range(0..4)];
    let source = 2 * dest;
    let width = dest * rng.random_range(2..12usize).max(2);
    let height = dest * rng.random_range(2..12usize).max(2);
    let step = rng.random_range(1..=source);
    let candidates = CandidateSet::new(rng.random(), [1, 2, 4][rng.random_range(0..3)]).unwrap();
    let mut config = CodecConfig {
        source_size: source,
        dest_size: dest,
        step,
        candidates,
        contrast_bits: rng.random_range(2..=10),
        brightness_bits: rng.random_range(1..=10),
        decode_iterations: rng.random_range(1..=20),
        ..CodecConfig::default()
    };
    if rng.random_bool(0.5) {
        let t2 = rng.random_range(0.0..=2.0);
        config.box_counting = Some(BoxCountConfig::with_default_sizes(rng.random(), t2, dest).unwrap());
    }
    let header = StreamHeader::new(width, height, &config).unwrap();
    let src = header.source_grid();
    let blocks = header.dest_grid().len();
    let coverage: Vec<bool> = if config.box_counting.is_some() {
        (0..blocks).map(|_| rng.random_bool(0.6)).collect()
    } else {
        vec![true; blocks]
    };
    let cq = header.contrast_quantizer();
    let bq = header.brightness_quantizer();
    let transforms = coverage
        .iter()
        .filter(|&&c| c)
        .map(|_| Transformation {
            k: rng.random_range(0..src.rows as u32),
            l: rng.random_range(0..src.cols as u32),
            direction: if candidates.mirrored() && rng.random() { Direction::Mirrored } else { Direction::Identity },
            angle: Angle::ALL[rng.random_range(0..candidates.angle_count())],
            alpha_code: rng.random_range(0..=cq.max_code()),
            beta_code: rng.random_range(0..=bq.max_code()),
        })
        .collect();
    CompressedImage::new(header, coverage, transforms).unwrap()
}

#[test]
fn ac7_format_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf1c);
    let mut failures = 0;
    for _ in 0..1000 {
        let stream = random_stream(&mut rng);
        let bytes = serialize(&stream);
        let h = stream.header();
        let b = h.bit_budget();
        let closed_form = (if src_rows(h) > 1 { bits(src_rows(h)) } else { 0 })
            + (if src_cols(h) > 1 { bits(src_cols(h)) } else { 0 })
            + u32::from(h.candidates.mirrored())
            + h.candidates.angle_count().trailing_zeros()
            + h.contrast_bits
            + h.brightness_bits;
        let payload_bits = stream.transform_count() * closed_form as usize;
        let bitmap = h.dest_grid().len().div_ceil(8);
        let expected_len = HEADER_LEN + bitmap + payload_bits.div_ceil(8);
        if b.bits_per_transform != closed_form
            || bytes.len() != expected_len
            || deserialize(&bytes).ok().as_ref() != Some(&stream)
        {
            failures += 1;
        }
    }
    report(
        "AC-7",
        "serialize/deserialize identity and payload length",
        failures == 0,
        format!("1000 random streams, {failures} failures"),
    );
}

fn src_rows(h: &StreamHeader) -> usize {
    (h.height - h.source_size) / h.step + 1
}

fn src_cols(h: &StreamHeader) -> usize {
    (h.width - h.source_size) / h.step + 1
}

/// ceil(log2(n)) by search.
fn bits(n: usize) -> u32 {
    (0..).find(|&b| (1usize << b) >= n).unwrap()
}

#[test]
fn ac8_relative_speed_direction() {
    let img = fixtures::by_name("texture", 256).unwrap();
    let full = CodecConfig::default();
    let reduced = CodecConfig {
        candidates: CandidateSet::REDUCED,
        ..CodecConfig::default()
    };
    let full_candidates = full.candidates_per_block(256, 256).unwrap();
    let reduced_candidates = reduced.candidates_per_block(256, 256).unwrap();

    let time = |c: &CodecConfig| {
        (0..5)
            .map(|_| {
                let t = Instant::now();
                std::hint::black_box(encode(&img, c).unwrap());
                t.elapsed()
            })
            .min()
            .unwrap()
    };
    let t_full = time(&full);
    let t_reduced = time(&reduced);
    let speedup = t_full.as_secs_f64() / t_reduced.as_secs_f64();
    let ok = full_candidates == 512 && reduced_candidates == 128 && speedup >= 2.0;
    report(
        "AC-8",
        "reduced candidate set: 4x fewer evaluations, >= 2x faster",
        ok,
        format!("{full_candidates} -> {reduced_candidates} candidates, {t_full:?} -> {t_reduced:?} ({speedup:.2}x)"),
    );
}
