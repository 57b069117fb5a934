//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Each criterion runs to completion and is then checked against its wall-clock limit.
//! Run with `cargo test --release -p qrep-core --test acceptance` for the timings the
//! limits were written for; the test profile is optimized as well.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use qrep_core::blocks::{
    block_dimension, block_dimension_of_surface, caterpillar, edge_support, equivalent_roots, standard_graphs,
    verlinde_dimension, BlockSpec, ColorSystem, Equivalence,
};
use qrep_core::burau::{
    burau_generators, infinite_order_witness, primitive_exponents, standard_root_of_unity, BraidWord, BurauParams,
};
use qrep_core::cyclo::{residue_contexts, CyclotomicNumber};
use qrep_core::linalg::{burnside_span, finite_order_test, invariant_hermitian_form, RepMatrix};
use qrep_core::profile::{group_profile, RepresentationTag, DEFAULT_PRECISION};
use qrep_core::quasi::{indefinite_classes, rotation_number, CMat, IndefiniteModel, DEFAULT_KAPPA};
use qrep_core::quotients::{
    cayley_gap, group_closure, lift_check, normalized_lambda2, reduce_generator_set, usable_contexts, ClosureReport,
    ReducedGenSet, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn minutes(m: u64) -> Duration {
    Duration::from_secs(60 * m)
}

// ---- 1 ----

fn braid_relations() -> Outcome {
    let params = [
        CyclotomicNumber::zeta_pow(5, 2),
        CyclotomicNumber::zeta_pow(7, 3),
        CyclotomicNumber::zeta_pow(12, 5),
        CyclotomicNumber::zeta_pow(11, 1),
        &CyclotomicNumber::zeta_pow(9, 1) + &CyclotomicNumber::from_int(9, 2),
    ];
    let mut checked = 0;
    for q in &params {
        for n in 3..=6 {
            let g = burau_generators(n, q).map_err(|e| e.to_string())?;
            for i in 0..g.len() {
                for j in i + 1..g.len() {
                    let ok = if j == i + 1 {
                        g[i].mul(&g[j]).mul(&g[i]) == g[j].mul(&g[i]).mul(&g[j])
                    } else {
                        g[i].mul(&g[j]) == g[j].mul(&g[i])
                    };
                    ensure!(ok, "relation ({i},{j}) fails for n={n} at q={q}");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} relations at 5 parameters, n = 3..6"))
}

// ---- 2 ----

fn invariant_form() -> Outcome {
    let mut count = 0;
    for p in [7u32, 11] {
        for k in primitive_exponents(p) {
            let b = BurauParams::new(p, k, 4).map_err(|e| e.to_string())?;
            let res = invariant_hermitian_form(&b.generators()).map_err(|e| e.to_string())?;
            ensure!(res.solution_space_dim == 1, "p={p} k={k}: solution space {}", res.solution_space_dim);
            ensure!(res.nondegenerate, "p={p} k={k}: degenerate form");
            count += 1;
        }
    }
    Ok(format!("{count} roots, each with a unique nondegenerate form"))
}

// ---- 3 ----

fn signature_profile() -> Outcome {
    let prof = group_profile(7, RepresentationTag::BurauPb4, DEFAULT_PRECISION).map_err(|e| e.to_string())?;
    ensure!(prof.factors.len() == 3, "{} classes", prof.factors.len());
    for f in &prof.factors {
        ensure!(
            matches!(f.signature, (3, 0) | (0, 3) | (2, 1) | (1, 2)),
            "signature {:?} at {:?}",
            f.signature,
            f.embedding
        );
    }
    let compact = prof.factors.iter().filter(|f| f.compact).count();
    ensure!(compact >= 1 && prof.noncompact >= 1, "compact {compact}, non-compact {}", prof.noncompact);
    let sigs: Vec<String> = prof
        .factors
        .iter()
        .map(|f| format!("k={}:{:?}", f.embedding.exponent, f.signature))
        .collect();
    Ok(format!("{}, n(7) = {}", sigs.join(" "), prof.noncompact))
}

// ---- 4 ----

fn four_holed(labels: [u32; 4], sys: &ColorSystem) -> Result<(u64, BTreeSet<u32>), String> {
    let spec = BlockSpec::new(0, labels.to_vec(), caterpillar(0, 4).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    Ok((
        block_dimension(&spec, sys).map_err(|e| e.to_string())?,
        edge_support(&spec, sys, 0).map_err(|e| e.to_string())?,
    ))
}

fn dimension_table() -> Outcome {
    let mut rows = 0;
    for p in (7u32..=21).step_by(2) {
        let sys = ColorSystem::new(p).map_err(|e| e.to_string())?;
        let got = four_holed([2; 4], &sys)?;
        ensure!(got == (3, BTreeSet::from([0, 2, 4])), "p={p} (2,2,2,2): {got:?}");
        rows += 1;
    }
    for p in (8u32..=24).step_by(2) {
        let sys = ColorSystem::new(p).map_err(|e| e.to_string())?;
        let got = four_holed([1; 4], &sys)?;
        ensure!(got == (2, BTreeSet::from([0, 2])), "p={p} (1,1,1,1): {got:?}");
        let d = block_dimension_of_surface(0, &[1, 1, 2], &sys).map_err(|e| e.to_string())?;
        ensure!(d == 1, "p={p} (1,1,2): {d}");
        let r = (p - 2) / 2;
        for f in 0..r {
            let top = (2 * f).min(2 * r - 2 - 2 * f);
            let expected: BTreeSet<u32> = (0..=top).step_by(2).collect();
            let (dim, support) = four_holed([f; 4], &sys)?;
            ensure!(support == expected, "p={p} f={f}: support {support:?}");
            ensure!(dim as usize == expected.len(), "p={p} f={f}: dim {dim}");
            if 2 * f <= r - 1 {
                ensure!(dim == f as u64 + 1, "p={p} f={f}: dim {dim}, want f+1");
            }
            rows += 1;
        }
        rows += 2;
    }
    Ok(format!("{rows} table entries"))
}

// ---- 5 ----

fn label_vectors(colors: &[u32], n: usize) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                colors.iter().map(move |&c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

fn verlinde_equivalence() -> Outcome {
    let mut surfaces = 0u64;
    for p in [5u32, 7, 11, 13] {
        let sys = ColorSystem::new(p).map_err(|e| e.to_string())?;
        let mut cases: Vec<(usize, Vec<u32>)> = (1..=4).map(|g| (g, vec![])).collect();
        for n in 3..=6 {
            cases.extend(label_vectors(&sys.colors, n).into_iter().map(|l| (0, l)));
        }
        let mut graphs_by_shape = HashMap::new();
        for (g, labels) in cases {
            let n = labels.len();
            let graphs = match graphs_by_shape.entry((g, n)) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => {
                    e.insert(standard_graphs(g, n).map_err(|e| e.to_string())?)
                }
            };
            ensure!(graphs.len() >= 2, "only {} graphs for ({g},{n})", graphs.len());
            let oracle = verlinde_dimension(g, &labels, &sys).map_err(|e| e.to_string())?;
            for graph in graphs.iter() {
                let spec = BlockSpec::new(g, labels.clone(), graph.clone()).map_err(|e| e.to_string())?;
                let d = block_dimension(&spec, &sys).map_err(|e| e.to_string())?;
                ensure!(d as u128 == oracle, "p={p} g={g} labels={labels:?}: {d} vs Verlinde {oracle}");
            }
            surfaces += 1;
        }
    }
    Ok(format!("{surfaces} labelled surfaces agree on every graph"))
}

// ---- 6 ----

fn root_equivalence() -> Outcome {
    let mut pairs = 0;
    for p in [5u32, 7, 11] {
        let roots = primitive_exponents(p);
        for &ka in &roots {
            for &kb in &roots {
                let a = CyclotomicNumber::zeta_pow(2 * p, ka as i64);
                let b = CyclotomicNumber::zeta_pow(2 * p, kb as i64);
                let expected = if a == b {
                    Equivalence::Same
                } else if a == b.conj() {
                    Equivalence::Conjugate
                } else {
                    Equivalence::Inequivalent
                };
                let got = equivalent_roots(p, &a, &b).map_err(|e| e.to_string())?;
                ensure!(got == expected, "p={p} ({ka},{kb}): {got:?}, want {expected:?}");
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} ordered pairs match the predicate"))
}

// ---- 7 ----

fn density_prerequisites() -> Outcome {
    let mut count = 0;
    for p in [5u32, 7, 11] {
        for k in primitive_exponents(p) {
            let pb = BurauParams::new(p, k, 4).map_err(|e| e.to_string())?.pure_generators();
            let span = burnside_span(&pb, 6).map_err(|e| e.to_string())?;
            ensure!(span.span_dim == 9 && span.irreducible, "p={p} k={k}: span {}", span.span_dim);
            let (w, m) = infinite_order_witness(&pb, 3).ok_or(format!("p={p} k={k}: no infinite-order word"))?;
            ensure!(!finite_order_test(&m).finite, "p={p} k={k}: witness {w:?} is finite");
            count += 1;
        }
    }
    Ok(format!("{count} roots: span 9 and an infinite-order word"))
}

// ---- 8, 9, 10 ----

fn b3() -> Vec<RepMatrix> {
    BurauParams::standard(7, 3).expect("valid").generators()
}

fn sweep() -> Vec<(ReducedGenSet, u128)> {
    usable_contexts(&b3(), 50, 200_000, true)
        .into_iter()
        .map(|(ctx, t)| (reduce_generator_set(&b3(), &ctx, 1, true).expect("reducible"), t))
        .collect()
}

fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn describe(r: &ClosureReport) -> String {
    format!("{} / {:?} {:?}", r.order, r.target_order, r.verdict)
}

fn strong_approximation() -> Outcome {
    const BUDGET: u64 = 20_000_000;
    let pb = BurauParams::standard(7, 4).map_err(|e| e.to_string())?.pure_generators();
    let ctx = residue_contexts(7, 2).map_err(|e| e.to_string())?.remove(0);
    let rgs = reduce_generator_set(&pb, &ctx, 1, true).map_err(|e| e.to_string())?;
    let t = Instant::now();
    let flag = group_closure(&rgs, BUDGET).map_err(|e| e.to_string())?.report;
    let flag_time = t.elapsed();
    ensure!(flag.verdict == Verdict::Full, "flagship: {}", describe(&flag));
    ensure!(flag.state_count <= BUDGET, "flagship used {} states", flag.state_count);
    let rss = peak_rss_bytes();
    if let Some(b) = rss {
        ensure!(b < 4 << 30, "peak resident memory {} MiB", b >> 20);
    }
    let mut full = Vec::new();
    for (rgs, _) in sweep() {
        let t = Instant::now();
        let r = group_closure(&rgs, BUDGET).map_err(|e| e.to_string())?.report;
        let el = t.elapsed();
        ensure!(el < minutes(1), "q={}: {el:.1?}", rgs.ctx.prime);
        if r.verdict == Verdict::Full {
            full.push(format!("{}:{}", rgs.ctx.prime, r.order));
        }
    }
    ensure!(full.len() >= 5, "only {} Full sweep closures: {full:?}", full.len());
    Ok(format!(
        "PB_4 mod 2 projective: {} in {flag_time:.1?}, peak RSS {}; B_3 sweep Full at {}",
        describe(&flag),
        rss.map_or("n/a".into(), |b| format!("{} MiB", b >> 20)),
        full.join(" ")
    ))
}

fn prime_power_lift() -> Outcome {
    let ctx = residue_contexts(7, 13).map_err(|e| e.to_string())?.remove(0);
    let lo = reduce_generator_set(&b3(), &ctx, 1, true).map_err(|e| e.to_string())?;
    let hi = reduce_generator_set(&b3(), &ctx, 2, true).map_err(|e| e.to_string())?;
    let cl = group_closure(&lo, 20_000_000).map_err(|e| e.to_string())?.report;
    let ch = group_closure(&hi, 20_000_000).map_err(|e| e.to_string())?.report;
    let r = lift_check(&lo, &cl, &hi, &ch).map_err(|e| e.to_string())?;
    ensure!(r.predicted_kernel == Some(13u128.pow(3)), "predicted kernel {:?}", r.predicted_kernel);
    ensure!(r.ratio == Some(2197), "ratio {:?} ({} -> {})", r.ratio, r.low_order, r.high_order);
    ensure!(r.verdict == Verdict::Full, "verdict {:?}", r.verdict);
    Ok(format!("{} -> {}, ratio {}, Full", r.low_order, r.high_order, 2197))
}

fn expander_suite() -> Outcome {
    let mut gaps = Vec::new();
    for (rgs, _) in sweep() {
        let cl = group_closure(&rgs, 20_000_000).map_err(|e| e.to_string())?;
        if cl.report.verdict != Verdict::Full {
            continue;
        }
        let g = cayley_gap(&rgs, &cl, 1_000_000, 7).map_err(|e| e.to_string())?;
        ensure!(g.gap > 1e-3, "q={}: gap {}", rgs.ctx.prime, g.gap);
        gaps.push(format!("{}:{:.4}", rgs.ctx.prime, g.gap));
    }
    ensure!(!gaps.is_empty(), "no Full closures in the sweep");
    let mut worst: f64 = 0.0;
    for n in [3usize, 4, 5, 8, 17, 64, 100, 257, 500] {
        let nb: Vec<u32> = (0..n).flat_map(|i| [((i + 1) % n) as u32, ((i + n - 1) % n) as u32]).collect();
        let s = normalized_lambda2(&nb, 2, 1);
        worst = worst.max((s.lambda2 - (2.0 * PI / n as f64).cos()).abs());
    }
    // the same calibration through the group pipeline: Z/100 as the units of F_101
    let ctx = residue_contexts(1, 101).map_err(|e| e.to_string())?.remove(0);
    let ring = ctx.ring(1).map_err(|e| e.to_string())?;
    let rgs = ReducedGenSet::from_ring_matrices(ctx, ring, 1, vec![vec![2]], false).map_err(|e| e.to_string())?;
    let cl = group_closure(&rgs, 1000).map_err(|e| e.to_string())?;
    ensure!(cl.report.order == 100, "cyclic order {}", cl.report.order);
    let g = cayley_gap(&rgs, &cl, 1000, 5).map_err(|e| e.to_string())?;
    worst = worst.max((g.lambda2 - (2.0 * PI / 100.0).cos()).abs());
    ensure!(worst < 1e-9, "cycle calibration error {worst:e}");
    Ok(format!("gaps {}; calibration error {worst:.1e}", gaps.join(" ")))
}

// ---- 11 ----

fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> BraidWord {
    let len = rng.gen_range(1..=max_len);
    BraidWord(
        (0..len)
            .map(|_| {
                let g: i32 = rng.gen_range(1..=3);
                if rng.gen() {
                    g
                } else {
                    -g
                }
            })
            .collect(),
    )
}

fn quasimorphism_suite() -> Outcome {
    const N_MAX: usize = 1 << 14;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_cocycle, mut worst_bound, mut worst_rot) = (0.0f64, 0.0f64, 0.0f64);
    let mut classes = 0;
    for p in [5u32, 7, 11] {
        let a = standard_root_of_unity(p).map_err(|e| e.to_string())?.exponent;
        for sigma in indefinite_classes(p, a).map_err(|e| e.to_string())? {
            let m = IndefiniteModel::new(p, a, sigma, DEFAULT_KAPPA).map_err(|e| e.to_string())?;
            let c = |x: &CMat, y: &CMat| m.dupont_cocycle(x, y).map(|v| v.value).map_err(|e| e.to_string());
            let word = |w: &BraidWord| m.word_matrix(w).map_err(|e| e.to_string());
            for _ in 0..100 {
                let [x, y, z] = [0; 3].map(|_| random_word(&mut rng, 20));
                let (x, y, z) = (word(&x)?, word(&y)?, word(&z)?);
                let r = c(&y, &z)? - c(&(x * y), &z)? + c(&x, &(y * z))? - c(&x, &y)?;
                worst_cocycle = worst_cocycle.max(r.abs());
            }
            ensure!(worst_cocycle < 1e-9, "p={p} {sigma:?}: cocycle residual {worst_cocycle:e}");
            for _ in 0..10_000 {
                let [x, y] = [0; 2].map(|_| random_word(&mut rng, 20));
                worst_bound = worst_bound.max(c(&word(&x)?, &word(&y)?)?.abs());
            }
            ensure!(
                worst_bound <= m.cocycle_bound(),
                "p={p} {sigma:?}: |c| = {worst_bound} exceeds {}",
                m.cocycle_bound()
            );
            let rot = |w: &BraidWord| rotation_number(w, &m, N_MAX).map(|r| r.value).map_err(|e| format!("{w}: {e}"));
            for _ in 0..20 {
                let g = random_word(&mut rng, 6);
                let h = random_word(&mut rng, 6);
                let r = rot(&g)?;
                for k in [2usize, 3] {
                    let d = (rot(&BraidWord(g.0.repeat(k)))? - k as f64 * r).abs();
                    ensure!(d < 1e-3, "p={p} {sigma:?} g={g} m={k}: defect {d:e}");
                    worst_rot = worst_rot.max(d);
                }
                let d = (rot(&h.concat(&g).concat(&h.inverse()))? - r).abs();
                ensure!(d < 1e-3, "p={p} {sigma:?} g={g} h={h}: conjugation defect {d:e}");
                worst_rot = worst_rot.max(d);
            }
            classes += 1;
        }
    }
    Ok(format!(
        "{classes} indefinite classes; cocycle residual {worst_cocycle:.1e}, max |c| {worst_bound:.4} (bound {}), rotation defect {worst_rot:.1e}",
        DEFAULT_KAPPA / 8.0
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, Duration, fn() -> Outcome); 11] = [
        (1, "exact braid relations", Duration::from_secs(1), braid_relations),
        (2, "invariant Hermitian form on B_4", Duration::from_secs(30), invariant_form),
        (3, "signature profile at p = 7", Duration::from_secs(30), signature_profile),
        (4, "block dimension table", Duration::from_secs(1), dimension_table),
        (5, "blocks against Verlinde", minutes(2), verlinde_equivalence),
        (6, "equivalence of roots", Duration::from_secs(10), root_equivalence),
        (7, "irreducible, infinite PB_4 images", minutes(1), density_prerequisites),
        (8, "flagship closure and dim-2 sweep", minutes(10), strong_approximation),
        (9, "prime-power lift", minutes(5), prime_power_lift),
        (10, "Cayley gaps and calibration", minutes(5), expander_suite),
        (11, "quasimorphism suite", minutes(10), quasimorphism_suite),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if elapsed <= limit => ("PASS", d),
            Ok(d) => ("FAIL", format!("over the {limit:?} limit; {d}")),
            Err(e) => ("FAIL", e),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {id:>2} {status} [{elapsed:.2?} / {limit:?}] {name}: {detail}");
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
