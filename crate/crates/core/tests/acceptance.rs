//! Acceptance suite. Prints one line per criterion and exits nonzero when
//! any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::brute_sup;
use selfaffine::attractor::{classify_origin_at_level, raster_attractor, OriginClass};
use selfaffine::beurling::{
    lebesgue_from_density, lower_density_profile, rescale_points, upper_density_profile, WindowSchedule,
};
use selfaffine::cantor::{
    cantor_hausdorff, cantor_sdensity_sequence, count_upto, translation_dominance_check, CantorPair,
};
use selfaffine::expansion::{collision_witness, expand_level, WitnessCheck};
use selfaffine::format::num;
use selfaffine::pair::pair_1d;
use selfaffine::sdensity::{
    check_renormalization, hausdorff_from_sdensity, interval_ratio, natural_thresholds, sample_self_similar_measure,
    upper_s_density_profile, AxisBox,
};
use selfaffine::{WeightedPointSet, DEFAULT_CAP};

type Outcome = Result<String, String>;
type Criterion = Box<dyn FnOnce(&mut ChaCha8Rng) -> Outcome>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(v: f64, lo: f64, hi: f64, what: &str) -> Result<(), String> {
    ensure((lo..=hi).contains(&v), format!("{what} = {v} outside [{lo}, {hi}]"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn tile_golden_values() -> Outcome {
    let binary = pair_1d(2.0, &[0.0, 1.0]).map_err(e)?;
    let mu = expand_level(&binary, 16, DEFAULT_CAP).map_err(e)?;
    let up = upper_density_profile(&mu, &WindowSchedule::geometric(16.0, 4096.0, 9).map_err(e)?).map_err(e)?;
    let sup = up.last().sup_value;
    within(sup, 1.0, 1.0005, "binary upper density at N=4096")?;
    let leb = lebesgue_from_density(&[up.with_level(16)]).map_err(e)?;
    within(leb.measure, 0.9995, 1.0, "binary lebesgue")?;
    let (_, raster) = raster_attractor(&binary, 4096, 400).map_err(e)?;
    within(raster.outer, 1.0, 1.01, "binary raster outer")?;

    let nega = pair_1d(-2.0, &[0.0, 1.0]).map_err(e)?;
    let mu = expand_level(&nega, 16, DEFAULT_CAP).map_err(e)?;
    let deeper = expand_level(&nega, 18, DEFAULT_CAP).map_err(e)?;
    let sched = WindowSchedule::natural(mu.extent(), 6).map_err(e)?;
    let est = lower_density_profile(&mu, &sched, Some(&deeper)).map_err(e)?.with_level(16);
    let last = est.last();
    let inf = last.inf.as_ref().ok_or("negabinary lower density missing")?;
    ensure(inf.trusted, "negabinary lower density at the largest window is not trusted")?;
    within(last.sup_value, 0.99, 1.011, "negabinary upper density")?;
    within(inf.value, 0.99, 1.011, "negabinary lower density")?;
    let nleb = lebesgue_from_density(std::slice::from_ref(&est)).map_err(e)?;
    within(nleb.measure, 0.99, 1.01, "negabinary lebesgue")?;
    let (_, nraster) = raster_attractor(&nega, 4096, 400).map_err(e)?;
    within(nraster.outer, 1.0, 1.01, "negabinary raster outer")?;
    Ok(format!(
        "binary sup {sup:.6}, |K| {:.6}, raster {:.5}; negabinary sup {:.6}, inf {:.6}, |K| {:.6}, raster {:.5}",
        leb.measure, raster.outer, last.sup_value, inf.value, nleb.measure, nraster.outer
    ))
}

fn origin_dichotomy() -> Outcome {
    let binary =
        classify_origin_at_level(&pair_1d(2.0, &[0.0, 1.0]).map_err(e)?, 10, 4, None, DEFAULT_CAP).map_err(e)?;
    let nega =
        classify_origin_at_level(&pair_1d(-2.0, &[0.0, 1.0]).map_err(e)?, 10, 4, None, DEFAULT_CAP).map_err(e)?;
    ensure(binary.class == OriginClass::Boundary, format!("binary classified {binary}"))?;
    ensure(nega.class == OriginClass::Interior, format!("negabinary classified {nega}"))?;
    Ok(format!("(2,{{0,1}}) {binary}; (-2,{{0,1}}) {nega}"))
}

fn divergence() -> Outcome {
    let p4 = pair_1d(4.0, &[0.0, 1.0, 2.0, 8.0]).map_err(e)?;
    let w = collision_witness(&p4, &[8.0], 2, 4, DEFAULT_CAP).map_err(e)?;
    let mult = match w.check {
        WitnessCheck::Verified(m) => m,
        WitnessCheck::Unverified => return Err("witness not verified".into()),
    };
    ensure(w.level == 8 && mult >= 16 && mult >= w.lower_bound, format!("multiplicity {mult} at level {}", w.level))?;

    let sched = WindowSchedule::geometric(1.0, 64.0, 7).map_err(e)?;
    let profiles = (1..=8)
        .map(|k| {
            let mu = expand_level(&p4, k, DEFAULT_CAP)?;
            Ok(upper_density_profile(&mu, &sched)?.with_level(k))
        })
        .collect::<selfaffine::Result<Vec<_>>>()
        .map_err(e)?;
    let leb = lebesgue_from_density(&profiles).map_err(e)?;
    ensure(leb.divergent && leb.measure == 0.0, format!("lebesgue {} divergent {}", leb.measure, leb.divergent))?;

    let th = pair_1d(1.5, &[0.0, 1.0]).map_err(e)?;
    let mu = expand_level(&th, 20, DEFAULT_CAP).map_err(e)?;
    let up = upper_density_profile(&mu, &WindowSchedule::natural(mu.extent(), 6).map_err(e)?).map_err(e)?;
    let sup = up.last().sup_value;
    ensure(sup >= 150.0, format!("3/2 upper density {sup} below 150"))?;
    let (_, raster) = raster_attractor(&th, 4096, 400).map_err(e)?;
    within(raster.outer, 2.0, 2.02, "3/2 raster outer")?;
    Ok(format!(
        "witness {} has multiplicity {mult} at level 8; |K| = 0 (divergent); 3/2 sup {sup:.2} at N={:.1}, raster {:.5}",
        num(w.point[0]),
        up.last().size,
        raster.outer
    ))
}

fn cantor_closed_forms(rng: &mut ChaCha8Rng) -> Outcome {
    let h = cantor_hausdorff(&CantorPair::new(3.0, 2.0).map_err(e)?);
    ensure((h - 1.0).abs() <= 1e-12, format!("H(3,2) = {h}"))?;
    ensure(num(h) == "1.000000000000", format!("H(3,2) prints as {}", num(h)))?;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.gen_range(3.0..=10.0);
        let d = rng.gen_range(0.1..=10.0);
        let cp = CantorPair::new(n, d).map_err(e)?;
        let s = (2f64).ln() / n.ln();
        let identity = cantor_hausdorff(&cp) * ((n - 1.0) / d).powf(s);
        worst = worst.max((identity - 1.0).abs());
    }
    ensure(worst <= 1e-12, format!("reciprocal identity off by {worst:e}"))?;
    Ok(format!("H(3,2) = {}; 50 random pairs, worst identity error {worst:.1e}", num(h)))
}

/// Points of `D_{m+1}` in `[0, b]` for the pair `(N, {0, d})`, by listing every
/// digit word.
fn brute_count(n: f64, d: f64, m: usize, b: f64) -> u64 {
    let len = m + 1;
    (0u64..1 << len)
        .filter(|word| {
            let x: f64 = (0..len).filter(|j| word >> j & 1 == 1).map(|j| d * n.powi(j as i32)).sum();
            x <= b + 1e-9 * b.max(1.0)
        })
        .count() as u64
}

fn counting_oracle(rng: &mut ChaCha8Rng) -> Outcome {
    for case in 0..200 {
        let n = [3.0, 4.0, 5.0][rng.gen_range(0..3)];
        let d = [0.5, 1.0, 2.0][rng.gen_range(0..3)];
        let m = rng.gen_range(1..=10);
        let coeffs: Vec<f64> = (0..m).map(|_| if rng.gen_bool(0.5) { d } else { 0.0 }).collect();
        let cp = CantorPair::new(n, d).map_err(e)?;
        let fast = count_upto(&cp, &coeffs).map_err(e)?;
        let slow = brute_count(n, d, m, cp.value(&coeffs));
        ensure(fast == slow, format!("case {case}: N={n} d={d} {coeffs:?}: {fast} vs {slow}"))?;
    }
    Ok("200 random coefficient vectors, 0 mismatches".into())
}

fn translation_dominance() -> Outcome {
    let mut checked = 0;
    for n in [3.0, 4.0] {
        for d in [1.0, 2.0] {
            let cp = CantorPair::new(n, d).map_err(e)?;
            for k in 0..=8 {
                if let Some(v) = translation_dominance_check(&cp, k, DEFAULT_CAP).map_err(e)? {
                    return Err(format!("N={n} d={d} k={k}: {v:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (N, d, k) cases, 0 counterexamples"))
}

fn sdensity_convergence() -> Outcome {
    let p = pair_1d(3.0, &[0.0, 2.0]).map_err(e)?;
    let s = 2f64.ln() / 3f64.ln();
    let profiles = (8..=12)
        .map(|k| {
            let mu = expand_level(&p, k, DEFAULT_CAP)?;
            Ok(upper_s_density_profile(&mu, s, &natural_thresholds(mu.extent(), 6))?.with_level(k))
        })
        .collect::<selfaffine::Result<Vec<_>>>()
        .map_err(e)?;
    let (r, sup) = profiles.last().unwrap().last_present().ok_or("no s-density entry")?;
    ensure(r >= 1000.0, format!("largest threshold {r} below 1000"))?;
    within(sup.value, 1.0, 1.01, "s-density sup")?;
    let h = hausdorff_from_sdensity(&profiles).map_err(e)?;
    within(h.measure, 0.99, 1.0, "hausdorff estimate")?;

    let mu12 = expand_level(&p, 12, DEFAULT_CAP).map_err(e)?;
    let seq = cantor_sdensity_sequence(&CantorPair::new(3.0, 2.0).map_err(e)?, 12).map_err(e)?;
    let mut worst = 0.0f64;
    for &(m, v) in &seq.values {
        let (_, scan) = interval_ratio(&mu12, 0.0, 3f64.powi(m as i32) - 1.0, s).map_err(e)?;
        worst = worst.max((scan - v).abs());
    }
    ensure(worst <= 1e-9, format!("v_m differs from the scan by {worst:e}"))?;
    Ok(format!("sup {:.6} at r={r:.0}, H^s {:.6}, v_m worst error {worst:.1e}", sup.value, h.measure))
}

fn random_set(rng: &mut ChaCha8Rng, dim: usize) -> WeightedPointSet {
    let count = rng.gen_range(1..=200);
    let pts: Vec<(Vec<f64>, u64)> = (0..count)
        .map(|_| ((0..dim).map(|_| rng.gen_range(-160i32..160) as f64 * 0.25).collect(), rng.gen_range(1..5)))
        .collect();
    WeightedPointSet::from_points(dim, &pts).unwrap()
}

fn scaling_law(rng: &mut ChaCha8Rng) -> Outcome {
    for case in 0..100 {
        let pts = random_set(rng, 1);
        let c = [0.5, 2.0, 3.0][rng.gen_range(0..3)];
        let sizes: Vec<f64> = (0..4).map(|_| rng.gen_range(1..=160) as f64 * 0.25).collect();
        let mut sorted = sizes.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.dedup();
        let scaled = rescale_points(&pts, &[vec![c]]).map_err(e)?;
        let a = upper_density_profile(&pts, &WindowSchedule::new(sorted.clone()).map_err(e)?).map_err(e)?;
        let b =
            upper_density_profile(&scaled, &WindowSchedule::new(sorted.iter().map(|n| c * n).collect()).map_err(e)?)
                .map_err(e)?;
        for (x, y) in a.per_size.iter().zip(&b.per_size) {
            ensure(
                x.sup_count == y.sup_count,
                format!("case {case}: count {} vs {} at N={}", x.sup_count, y.sup_count, x.size),
            )?;
            ensure(y.size == c * x.size, format!("case {case}: window {} is not {c} * {}", y.size, x.size))?;
            for entry in [x, y] {
                ensure(
                    entry.sup_value == entry.sup_count as f64 / entry.size,
                    format!("case {case}: value {} is not count / size", entry.sup_value),
                )?;
            }
        }
    }
    Ok("100 random sets, counts identical, values equal as count / size".into())
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> Outcome {
    for dim in [1, 2] {
        for case in 0..100 {
            let pts = random_set(rng, dim);
            let size = rng.gen_range(1..=80) as f64 * 0.25;
            let fast = upper_density_profile(&pts, &WindowSchedule::new(vec![size]).map_err(e)?).map_err(e)?;
            let slow = brute_sup(&pts, size);
            ensure(
                fast.per_size[0].sup_count == slow,
                format!("{dim}-D case {case}: {} vs {slow}", fast.per_size[0].sup_count),
            )?;
        }
    }
    Ok("100 sets each in 1-D and 2-D, 0 mismatches".into())
}

fn renormalization() -> Outcome {
    let cases = [(3.0, [0.0, 2.0], [0.0, 2.0], 1), (2.0, [0.0, 1.0], [0.0, 1.0], 2)];
    let mut summary = Vec::new();
    for (b, digits, [lo, hi], steps) in cases {
        let pair = pair_1d(b, &digits).map_err(e)?;
        let window = AxisBox::new(vec![lo], vec![hi]).map_err(e)?;
        let mut agree = 0;
        for seed in 0..100 {
            let sample = sample_self_similar_measure(&pair, 100_000, seed, 64);
            let r = check_renormalization(&pair, &window, steps, &sample, DEFAULT_CAP).map_err(e)?;
            agree += r.agrees(3.0) as usize;
        }
        ensure(agree >= 95, format!("B={b}: only {agree}/100 seeds agree"))?;
        summary.push(format!("B={b} W=[{lo},{hi}] N={steps}: {agree}/100"));
    }
    Ok(summary.join("; "))
}

fn sampler_masses() -> Outcome {
    let pair = pair_1d(3.0, &[0.0, 2.0]).map_err(e)?;
    let n = 100_000;
    let sample = sample_self_similar_measure(&pair, n, 2024, 64);
    let mut parts = Vec::new();
    for (hi, expected) in [(1.0 / 3.0, 0.5), (1.0 / 9.0, 0.25)] {
        let mass = sample.mass(&AxisBox::new(vec![0.0], vec![hi]).map_err(e)?);
        let sigma = (expected * (1.0 - expected) / n as f64).sqrt();
        ensure((mass - expected).abs() <= 3.0 * sigma, format!("[0, {hi}] mass {mass} vs {expected}"))?;
        parts.push(format!("[0,{hi:.4}] {mass:.4} vs {expected}"));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e1f_aff1);
    let criteria: Vec<(&str, Criterion)> = vec![
        ("tile golden values", Box::new(|_| tile_golden_values())),
        ("origin dichotomy", Box::new(|_| origin_dichotomy())),
        ("divergence", Box::new(|_| divergence())),
        ("Cantor closed forms", Box::new(cantor_closed_forms)),
        ("counting oracle", Box::new(counting_oracle)),
        ("translation dominance", Box::new(|_| translation_dominance())),
        ("s-density convergence", Box::new(|_| sdensity_convergence())),
        ("scaling law", Box::new(scaling_law)),
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("renormalization", Box::new(|_| renormalization())),
        ("sampler masses", Box::new(|_| sampler_masses())),
    ];
    let total = criteria.len();
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&mut rng);
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS - {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL - {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("acceptance: {}/{total} criteria passed", total - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
