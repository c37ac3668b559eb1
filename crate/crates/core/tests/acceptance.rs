//! Acceptance suite: one pass/fail line per criterion, exit status 1 if any fails.
//!
//! Runs without the libtest harness so the verdict lines always print.

use num_bigint::{BigInt, BigUint};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use siegel_lab::blaschke::{rotation_number, solve_parameter, BlaschkeModel, SolveOptions, SolveStatus};
use siegel_lab::cellgraph::{build_graph, build_partitions, enumerate_cells, strip_height, CircleSource};
use siegel_lab::contfrac::{convergents, expand_rational, value, CFExpansion};
use siegel_lab::covering::{certify_lemma1, certify_lemma2, lemma1_constants, synth_exclusion_set, synth_lemma2};
use siegel_lab::dynamics::{classify_f, deficiency_exponent, density_scan, scan_budget, OrbitFate};
use siegel_lab::hyperbolic::{density_ext, density_h, dist_h, ExteriorPoint, HPoint};
use siegel_lab::Certified;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

type C = Complex<f64>;
type Verdict = Result<String, String>;

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_budget(start: Instant, limit: Duration) -> Result<(), String> {
    let e = start.elapsed();
    check(e <= limit, || format!("took {:.1} s, budget {} s", e.as_secs_f64(), limit.as_secs()))
}

fn continued_fractions() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..1000 {
        let len = rng.gen_range(1..=40);
        let entries: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=1_000_000)).collect();
        let cf = CFExpansion::from_u64s(&entries).map_err(|e| e.to_string())?;
        let cs = convergents(&cf, len).map_err(|e| e.to_string())?;
        // independent determinant from the raw integers, seeded with (p_0, q_0) = (0, 1)
        let (mut pp, mut qp) = (BigInt::from(0), BigInt::from(1));
        for c in &cs {
            let (p, q) = (BigInt::from(c.p.clone()), BigInt::from(c.q.clone()));
            let det = &p * &qp - &pp * &q;
            let want = if c.n % 2 == 1 { BigInt::from(1) } else { BigInt::from(-1) };
            check(det == want, || format!("case {case}, n = {}: determinant {det}", c.n))?;
            (pp, qp) = (p, q);
        }
        let mut canon = entries.clone();
        if canon.len() > 1 && *canon.last().unwrap() == 1 {
            canon.pop();
            *canon.last_mut().unwrap() += 1;
        }
        if canon == [1] {
            continue;
        }
        let cf = CFExpansion::from_u64s(&canon).map_err(|e| e.to_string())?;
        let back = expand_rational(&value(&cf).map_err(|e| e.to_string())?, 64).map_err(|e| e.to_string())?;
        let want: Vec<BigUint> = canon.iter().map(|&a| BigUint::from(a)).collect();
        check(back.entries() == want.as_slice() && !back.is_truncated(), || format!("case {case}: round trip"))?;
    }
    within_budget(start, Duration::from_secs(5))?;
    Ok("1000 determinants exact; canonical round trips exact".into())
}

fn blaschke_identities() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_circle: f64 = 0.0;
    let mut worst_one: f64 = 0.0;
    let mut worst_deriv: f64 = 0.0;
    for _ in 0..20 {
        let t: f64 = rng.gen_range(0.0..1.0);
        let m = BlaschkeModel::new(t);
        let one = C::new(1.0, 0.0);
        let f1 = m.eval(one).map_err(|e| e.to_string())?;
        worst_one = worst_one.max((f1 - C::from_polar(1.0, std::f64::consts::TAU * t)).norm());
        for _ in 0..50 {
            let z = C::from_polar(1.0, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI));
            worst_circle = worst_circle.max((m.eval(z).map_err(|e| e.to_string())?.norm() - 1.0).abs());
        }
        let h = 1e-5;
        let central =
            (m.eval(one + h).map_err(|e| e.to_string())? - m.eval(one - h).map_err(|e| e.to_string())?) / (2.0 * h);
        worst_deriv = worst_deriv.max(central.norm()).max(m.derivative(one).map_err(|e| e.to_string())?.norm());
    }
    check(worst_one <= 1e-12, || format!("|f(1) − e^(2πit)| = {worst_one:e}"))?;
    check(worst_circle <= 1e-12, || format!("||f(z)| − 1| = {worst_circle:e}"))?;
    check(worst_deriv <= 1e-9, || format!("|f'(1)| = {worst_deriv:e}"))?;
    within_budget(start, Duration::from_secs(1))?;
    Ok(format!("1000 circle samples, max ||f|−1| = {worst_circle:.1e}; max |f'(1)| = {worst_deriv:.1e}"))
}

fn rotation_solver() -> Verdict {
    let start = Instant::now();
    let sol = solve_parameter(GOLDEN, 1e-7, SolveOptions::default()).map_err(|e| e.to_string())?;
    check(sol.status == SolveStatus::Converged, || format!("status {:?}", sol.status))?;
    check(sol.residual <= 1e-7, || format!("certified residual {:e}", sol.residual))?;
    check((sol.rho_achieved - GOLDEN).abs() <= sol.residual, || "estimate outside its bound".into())?;
    // ρ nondecreasing on [0,1): no pair of grid points with disjoint brackets
    // in the wrong order (t = 1 is reduced to t = 0)
    let n = 20_000;
    let est: Vec<_> =
        (0..100).map(|i| rotation_number(i as f64 / 100.0, n)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    for (i, w) in est.windows(2).enumerate() {
        check(w[1].rho + w[1].error_bound >= w[0].rho - w[0].error_bound, || {
            format!("ρ decreases between grid points {i} and {}", i + 1)
        })?;
    }
    within_budget(start, Duration::from_secs(60))?;
    Ok(format!("t = {:.10}, certified |ρ − α| ≤ {:.1e}; 100-point grid monotone", sol.t, sol.residual))
}

fn lemma_constants() -> Verdict {
    let k = lemma1_constants(1.0, 0.5).map_err(|e| e.to_string())?;
    check(k.m == 23 && k.n0 == 5, || format!("(M, n0) = ({}, {})", k.m, k.n0))?;
    let chain = k.verify_chain();
    check(chain.holds(), || format!("chain {chain:?}"))?;
    let (m, c) = (23.0f64, 1.0f64);
    let zeta = 1.0 / (4.0 * std::f64::consts::PI * m * m * (0.5 + (c + 2.0) * m).powi(2));
    let lambda = (1.0 - zeta / 2.0).powf(1.0 / 10.0);
    let rz = ((k.zeta - zeta) / zeta).abs();
    let rl = ((k.lambda - lambda) / lambda).abs();
    check(rz <= 1e-12 && rl <= 1e-12, || format!("relative errors ζ {rz:e}, λ {rl:e}"))?;
    Ok(format!("M = 23, n0 = 5, chain certified; ζ = {:.6e}, λ = 1 − {:.6e}", k.zeta, 1.0 - k.lambda))
}

fn dyadic_lemma() -> Verdict {
    let start = Instant::now();
    let lambda = 0.5;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let depth = 4 + (seed % 3) as usize;
        let e = synth_lemma2(seed, depth, lambda).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = certify_lemma2(&e, lambda, false).map_err(|e| format!("seed {seed}: {e}"))?;
        check(r.density_verified, || format!("seed {seed}: density not certified"))?;
        check(r.bound_holds == Certified::True, || format!("seed {seed}: area bound {:?}", r.bound_holds))?;
        for p in &r.properties {
            check(p.holds == Certified::True, || format!("seed {seed}: property {} {:?}", p.property, p.holds))?;
        }
        worst = worst.max(r.measured_ratio / (8.0 * std::f64::consts::PI * lambda));
    }
    within_budget(start, Duration::from_secs(30))?;
    Ok(format!("100 instances, properties (1)-(3) and area bound exact; max area(E)/(8πλ) = {worst:.3}"))
}

fn madic_lemma() -> Verdict {
    let start = Instant::now();
    // c = 1 admits no cell set of positive area, so the suite runs at c = 2
    let k = lemma1_constants(2.0, 0.5).map_err(|e| e.to_string())?;
    let n = 10;
    for seed in 0..20u64 {
        let e = synth_exclusion_set(seed, &k, n, 3).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = certify_lemma1(&e, &k, n).map_err(|e| format!("seed {seed}: {e}"))?;
        check(r.hypotheses.holds(), || format!("seed {seed}: hypotheses {:?}", r.hypotheses))?;
        for p in r.appendix_a.iter().chain(&r.translated) {
            check(p.holds == Certified::True, || format!("seed {seed}: property {} {:?}", p.property, p.holds))?;
        }
        check(r.bound_holds, || format!("seed {seed}: area(E) ≤ λ^N area(S) not certified"))?;
    }
    within_budget(start, Duration::from_secs(300))?;
    Ok(format!("20 instances (c = 2, η = 1/2, N = {n}, depth 3): properties and λ^N bound exact"))
}

fn deficiency_oracle() -> Verdict {
    let start = Instant::now();
    let esc = OrbitFate::Escaped { exit_step: 0 };
    let cap = OrbitFate::Captured { entry_step: 0 };
    let c = C::new(0.2, 0.1);
    // complement of area r³: a concentric ball of radius r^{3/2}/√π
    let hole = |z: C, r: f64| if (z - c).norm() < r.powf(1.5) / std::f64::consts::PI.sqrt() { esc } else { cap };
    let s = density_scan(c, 0.25, 0.5, 5, hole, 512, 5).map_err(|e| e.to_string())?;
    let cubic = deficiency_exponent(&s).map_err(|e| e.to_string())?;
    let half = |z: C, _r: f64| if z.re > c.re { esc } else { cap };
    let s = density_scan(c, 0.25, 0.5, 5, half, 512, 6).map_err(|e| e.to_string())?;
    let uniform = deficiency_exponent(&s).map_err(|e| e.to_string())?;
    check((cubic.slope - 3.0).abs() <= 0.15, || format!("cubic slope {}", cubic.slope))?;
    check((uniform.slope - 2.0).abs() <= 0.05, || format!("uniform slope {}", uniform.slope))?;
    within_budget(start, Duration::from_secs(10))?;
    Ok(format!("slopes {:.3} (target 3 ± 0.15) and {:.3} (target 2 ± 0.05)", cubic.slope, uniform.slope))
}

fn density_trend() -> Verdict {
    let start = Instant::now();
    let sol = solve_parameter(GOLDEN, 1e-7, SolveOptions::default()).map_err(|e| e.to_string())?;
    let m = BlaschkeModel::new(sol.t);
    let r = 0.5;
    let s =
        density_scan(C::new(1.0, 0.0), 0.125, 0.5, 4, |z, rad| classify_f(&m, r, z, scan_budget(100_000, rad)), 512, 0)
            .map_err(|e| e.to_string())?;
    let mut inversions = 0;
    for w in s.rows.windows(2) {
        if w[1].frac_escaped > w[0].frac_escaped {
            inversions += 1;
            let ci = w[0].ci_halfwidth.max(w[1].ci_halfwidth);
            check(w[1].frac_escaped - w[0].frac_escaped <= 3.0 * ci, || {
                format!("inversion beyond 3·ci at scale {}", w[1].scale)
            })?;
        }
    }
    check(inversions <= 1, || format!("{inversions} inversions"))?;
    within_budget(start, Duration::from_secs(600))?;
    let fr: Vec<String> = s.rows.iter().map(|r| format!("{:.4}", r.frac_escaped)).collect();
    Ok(format!("evidence only: escaped fractions [{}] across radii 2^-3..2^-6", fr.join(", ")))
}

fn cell_graph() -> Verdict {
    let start = Instant::now();
    let cf = CFExpansion::golden();
    let sol = solve_parameter(GOLDEN, 1e-7, SolveOptions::default()).map_err(|e| e.to_string())?;
    let m = BlaschkeModel::new(sol.t);
    let n_max = 10;
    let parts =
        build_partitions(CircleSource::Blaschke { model: &m, tol: 1e-12 }, &cf, n_max).map_err(|e| e.to_string())?;
    let g = build_graph(&parts).map_err(|e| e.to_string())?;
    let mut cells = 0;
    for n in 0..n_max {
        for c in enumerate_cells(&g, n) {
            cells += 1;
            check(c.k == 1 || c.k == 2, || format!("{n}-cell with k = {}", c.k))?;
        }
    }
    let h = strip_height(&g).map_err(|e| e.to_string())?;
    check(h.heights.windows(2).all(|w| w[1] <= w[0]), || format!("heights {:?}", h.heights))?;
    check(h.sigma > 0.0 && h.sigma < 1.0, || format!("σ = {}", h.sigma))?;
    let rot = build_partitions(CircleSource::Rotation { alpha: GOLDEN }, &cf, n_max).map_err(|e| e.to_string())?;
    let slope = build_graph(&rot).map_err(|e| e.to_string())?.max_slope();
    check(slope <= 0.5, || format!("rotation slope {slope}"))?;
    within_budget(start, Duration::from_secs(300))?;
    Ok(format!("{cells} cells with k ∈ {{1, 2}}; σ = {:.4}; rotation slopes ≤ {slope:.4}", h.sigma))
}

fn hyperbolic() -> Verdict {
    let hp = |re: f64, im: f64| HPoint::new(C::new(re, im)).map_err(|e| e.to_string());
    let d = dist_h(hp(0.0, 1.0)?, hp(0.0, 2.0)?);
    check((d - 2f64.ln()).abs() <= 1e-12, || format!("dist(i, 2i) = {d}"))?;
    // pushforward of the half-plane density through w ↦ exp(−iw), five-point stencil
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z = ExteriorPoint::new(C::from_polar(1.0 + rng.gen_range(0.01..5.0), rng.gen_range(-3.1..3.1)))
            .map_err(|e| e.to_string())?;
        let w = z.lift();
        let p = |v: C| (-C::i() * v).exp();
        let hs = 1e-3;
        let x = w.w();
        let dp = (p(x - 2.0 * hs) - p(x + 2.0 * hs) + 8.0 * (p(x + hs) - p(x - hs))) / (12.0 * hs);
        let (a, b) = (density_ext(z), density_h(w) / dp.norm());
        worst = worst.max((a - b).abs() / a.max(1.0));
    }
    check(worst <= 1e-10, || format!("pushforward mismatch {worst:e}"))?;
    let maps: [(f64, f64, f64, f64); 6] = [
        (1.0, 0.0, 0.0, 1.0),
        (2.0, 1.0, 1.0, 1.0),
        (0.0, -1.0, 1.0, 0.0),
        (1.0, 3.0, 0.0, 1.0),
        (3.0, -2.0, 2.0, -1.0),
        (0.5, 0.0, 0.0, 2.0),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (a, b, c, dd) in maps {
        for _ in 0..200 {
            let u = hp(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0))?;
            let v = hp(rng.gen_range(-3.0..3.0), rng.gen_range(0.05..3.0))?;
            let f = |w: C| (w * a + b) / (w * c + dd);
            let (fu, fv) =
                (HPoint::new(f(u.w())).map_err(|e| e.to_string())?, HPoint::new(f(v.w())).map_err(|e| e.to_string())?);
            check(dist_h(fu, fv) <= dist_h(u, v) + 1e-12, || format!("Schwarz–Pick fails for ({a}, {b}, {c}, {dd})"))?;
        }
    }
    Ok(format!("dist(i, 2i) − log 2 = {:.1e}; pushforward error {worst:.1e}; 6 Möbius maps contract", d - 2f64.ln()))
}

fn run_cli(args: &[&str], threads: usize, dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_siegel-lab"))
        .args(args)
        .current_dir(dir)
        .env("SIEGEL_LAB_THREADS", threads.to_string())
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    let mut bytes = out.stdout;
    for name in ["out.bin", "extra.bin"] {
        if let Ok(b) = std::fs::read(dir.join(name)) {
            bytes.extend(b);
            std::fs::remove_file(dir.join(name)).map_err(|e| e.to_string())?;
        }
    }
    Ok(bytes)
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = "0.6136486381292343";
    // frac_escaped = r/π gives a complement of area r³ per ball
    let mut rows = String::from("scale,radius,frac_escaped,frac_captured,frac_undecided,samples,ci\n");
    for k in 0..5 {
        let r = 0.25 / 2f64.powi(k);
        let f = r / std::f64::consts::PI;
        rows.push_str(&format!("{k},{r},{f},{},0,1000,0.01\n", 1.0 - f));
    }
    std::fs::write(dir.path().join("scan.csv"), rows).map_err(|e| e.to_string())?;
    let runs: Vec<Vec<&str>> = vec![
        vec!["classify", "--alpha", "golden", "--terms", "30"],
        vec!["rotnum", "--alpha", "silver", "--tol", "1e-5"],
        vec!["partition", "--alpha", "golden", "--t", t, "--n-max", "8", "--out", "out.bin"],
        vec![
            "density-scan",
            "--model",
            "F",
            "--alpha",
            "golden",
            "--t",
            t,
            "--r",
            "0.5",
            "--center",
            "crit",
            "--scales",
            "4",
            "--grid",
            "64",
            "--budget",
            "2000",
            "--seed",
            "7",
        ],
        vec![
            "density-scan",
            "--model",
            "P",
            "--alpha",
            "golden",
            "--r",
            "0.05",
            "--center",
            "crit",
            "--scales",
            "3",
            "--grid",
            "32",
            "--budget",
            "500",
            "--orbit",
            "20000",
            "--angle-bins",
            "512",
        ],
        vec!["deep-fit", "--input", "scan.csv"],
        vec![
            "render", "--alpha", "golden", "--t", t, "--width", "48", "--height", "32", "--budget", "300", "--out",
            "out.bin",
        ],
        vec![
            "cover-check",
            "--lemma",
            "1",
            "--c",
            "2",
            "--eta",
            "0.5",
            "--N",
            "10",
            "--seed",
            "4",
            "--save-instance",
            "extra.bin",
        ],
        vec!["cover-check", "--lemma", "2", "--lambda", "0.5", "--depth", "5", "--seed", "4"],
        vec![
            "cellgraph",
            "--alpha",
            "golden",
            "--t",
            t,
            "--n-max",
            "8",
            "--exp-grid",
            "64",
            "--ppm",
            "extra.bin",
            "--ppm-size",
            "64",
        ],
    ];
    for args in &runs {
        let base = run_cli(args, 1, dir.path())?;
        for threads in [1, 2, 4] {
            let again = run_cli(args, threads, dir.path())?;
            check(again == base, || format!("{} differs at {threads} threads", args[0]))?;
        }
    }
    Ok(format!("{} invocations over 8 subcommands byte-identical at 1, 2 and 4 threads", runs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("continued-fraction identities", continued_fractions),
        ("Blaschke identities", blaschke_identities),
        ("rotation solver", rotation_solver),
        ("M-adic lemma constants", lemma_constants),
        ("dyadic density lemma", dyadic_lemma),
        ("M-adic property suite", madic_lemma),
        ("deficiency-exponent oracle", deficiency_oracle),
        ("density trend at the critical point", density_trend),
        ("cell graph", cell_graph),
        ("hyperbolic metric", hyperbolic),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("acceptance {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
