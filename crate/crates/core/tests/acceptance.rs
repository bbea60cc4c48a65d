//! Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::time::Instant;

use gave::bench::{run_table_on, BenchPlan, BenchRow};
use gave::convergence::{
    check_gnms, check_gnms_tau_window, check_mn, check_mn_classic, check_nms, check_nms_classic, check_picard,
    check_picard_rho, check_rnms, check_rnms_classic, compute_scalars_for, quadratic_root_modulus, spectral_radius_w,
    youngs_root_test, Certificate, ConvergenceScalars,
};
use gave::linalg::vector::dist2;
use gave::linalg::Matrix;
use gave::oracle::enumerate_solutions;
use gave::problem::{default_start, block_problem, random_problem, GaveProblem};
use gave::solver::{
    preset_gnms, preset_gnms_with, preset_mn, preset_ngs, preset_nms, preset_picard, residual, MethodPreset,
    MethodRegistry, Scheme,
};
use gave::splitting::{
    diag_multiple, default_triangular_splitting, identity_splitting, nms_splitting, triangular_splitting, trivial_splitting,
};
use gave::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Reference iteration counts per table row (method, parameter label, IT) and the
/// reference `τ_opt` for the swept rows.
const REFERENCE: [(&str, &str, usize, Option<f64>); 12] = [
    ("GNMS", "", 8, Some(1.00)),
    ("MN", "omega=2diag(A)", 47, None),
    ("MN", "omega=1/2diag(A)", 16, None),
    ("Picard", "", 26, None),
    ("FPI", "", 17, Some(0.80)),
    ("NMS", "omega=2diag(A)", 52, None),
    ("NMS", "omega=1/2diag(A)", 19, None),
    ("NGS", "omega=2diag(A)", 51, None),
    ("NGS", "omega=1/2diag(A)", 18, None),
    ("RMS", "", 12, Some(0.99)),
    ("SSMN", "omega_tilde=2diag(A)", 18, None),
    ("SSMN", "omega_tilde=1/2diag(A)", 39, None),
];
const IT_TOL: usize = 2;
const TAU_TOL: f64 = 0.02 + 1e-12;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    notes: Vec<String>,
    seconds: f64,
}

fn criterion(id: &'static str, title: &'static str, f: impl FnOnce(&mut Vec<String>) -> Result<bool>) -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let pass = match f(&mut notes) {
        Ok(p) => p,
        Err(e) => {
            notes.push(format!("error: {e}"));
            false
        }
    };
    Outcome {
        id,
        title,
        pass,
        notes,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn row_label(r: &BenchRow) -> String {
    if r.params.starts_with("omega") {
        format!("{} {}", r.method, r.params.split(',').next().unwrap_or(""))
    } else {
        r.method.clone()
    }
}

fn table(m: usize, cache: &mut BTreeMap<usize, Vec<BenchRow>>) -> Result<Vec<BenchRow>> {
    if let Some(rows) = cache.get(&m) {
        return Ok(rows.clone());
    }
    let mut plan = BenchPlan::table(m, m);
    plan.repetitions = 1;
    let problem = plan.problem()?;
    let rows = run_table_on(&plan, &problem, &MethodRegistry::with_builtins())?;
    cache.insert(m, rows.clone());
    Ok(rows)
}

fn compare_with_reference(m: usize, rows: &[BenchRow], notes: &mut Vec<String>) -> bool {
    let mut ok = true;
    for (row, (method, omega, it_ref, tau_ref)) in rows.iter().zip(REFERENCE) {
        let label = row_label(row);
        let expected_label = if omega.is_empty() { method.to_string() } else { format!("{method} {omega}") };
        assert_eq!(label, expected_label, "table rows out of order");
        let Some(it) = row.it.filter(|_| row.converged()) else {
            notes.push(format!("m={m} {label}: did not converge ({:?})", row.error));
            ok = false;
            continue;
        };
        let it_ok = it.abs_diff(it_ref) <= IT_TOL;
        let tau_ok = match (tau_ref, row.tau_opt) {
            (Some(t), Some(got)) => (got - t).abs() <= TAU_TOL,
            (None, _) => true,
            (Some(_), None) => false,
        };
        let tau_note = row.tau_opt.map_or(String::new(), |t| format!(" tau_opt={t:.2} (ref {:.2})", tau_ref.unwrap_or(f64::NAN)));
        notes.push(format!(
            "m={m} {label:<28} IT={it:<3} (ref {it_ref}){tau_note} RES={:.3e} {}",
            row.res.unwrap_or(f64::NAN),
            if it_ok && tau_ok { "ok" } else { "OUT OF TOLERANCE" }
        ));
        ok &= it_ok && tau_ok;
    }
    ok
}

fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let d = dist2(x, y).unwrap();
    let s = x.iter().chain(y).fold(0.0f64, |m, v| m.max(v.abs()));
    let nx: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if s == 0.0 {
        0.0
    } else {
        d / nx.max(ny)
    }
}

fn max_trajectory_gap(p: &MethodPreset, q: &MethodPreset, prob: &GaveProblem, steps: usize) -> Result<f64> {
    let x0 = default_start(prob.dim());
    let s = p.trajectory(&prob.b, &prob.c, &x0, &prob.c, steps)?;
    let t = q.trajectory(&prob.b, &prob.c, &x0, &prob.c, steps)?;
    Ok(s.iter().zip(&t).map(|(u, v)| rel_diff(u, v)).fold(0.0, f64::max))
}

fn random_scalars(rng: &mut ChaCha8Rng) -> ConvergenceScalars {
    ConvergenceScalars {
        alpha: rng.gen_range(0.0..1.5),
        beta: rng.gen_range(0.0..2.0),
        gamma: rng.gen_range(0.0..1.5),
        mu: rng.gen_range(0.0..1.0),
        nu: rng.gen_range(0.0..1.0),
        tau: rng.gen_range(0.01..2.0),
    }
}

/// Dense, diagonally dominant `A` and a `B` of comparable size.
fn random_pair(rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let n = rng.gen_range(2..=6);
    let d: f64 = rng.gen_range(2.0..6.0);
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, n);
    let b_scale = rng.gen_range(0.05..1.2) * d / n as f64;
    for i in 0..n {
        for j in 0..n {
            let off = if i == j { d + rng.gen_range(0.0..1.0) } else { rng.gen_range(-0.5..0.5) };
            a.set(i, j, off);
            b.set(i, j, b_scale * rng.gen_range(-1.0..1.0));
        }
    }
    (a, b)
}

/// Counts instances where `premise` holds and how many of those violate `conclusion`.
fn implication_counts(
    samples: usize,
    seed: u64,
    mut pair: impl FnMut(&mut ChaCha8Rng) -> Result<(Certificate, Certificate)>,
) -> Result<(usize, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut premise, mut counter, mut tested) = (0, 0, 0);
    while tested < samples {
        let (old, new) = pair(&mut rng)?;
        if old.margin.abs() < 1e-9 || new.margin.abs() < 1e-9 {
            continue;
        }
        tested += 1;
        if old.holds {
            premise += 1;
            if !new.holds {
                counter += 1;
            }
        }
    }
    Ok((tested, premise, counter))
}

fn main() {
    let registry_names = MethodRegistry::with_builtins().names().join(", ");
    println!("acceptance suite (methods: {registry_names})");
    let mut cache = BTreeMap::new();
    let mut outcomes = Vec::new();

    outcomes.push(criterion("1a", "benchmark table iteration counts within ±2 at m = 20", |notes| {
        let rows = table(20, &mut cache)?;
        Ok(compare_with_reference(20, &rows, notes))
    }));

    outcomes.push(criterion("1b", "benchmark table iteration counts within ±2 at m = 60", |notes| {
        let rows = table(60, &mut cache)?;
        Ok(compare_with_reference(60, &rows, notes))
    }));

    outcomes.push(criterion("2", "iteration counts identical for m = 20, 40, 60", |notes| {
        let mut ok = true;
        let t20 = table(20, &mut cache)?;
        let t40 = table(40, &mut cache)?;
        let t60 = table(60, &mut cache)?;
        for ((a, b), c) in t20.iter().zip(&t40).zip(&t60) {
            let same = a.it == b.it && b.it == c.it && a.converged() && b.converged() && c.converged();
            notes.push(format!(
                "{:<28} IT m=20: {:?}  m=40: {:?}  m=60: {:?} {}",
                row_label(a),
                a.it,
                b.it,
                c.it,
                if same { "ok" } else { "DIFFERS" }
            ));
            ok &= same;
        }
        Ok(ok)
    }));

    outcomes.push(criterion("3", "2x2 norm and spectral-radius examples within 1e-3", |notes| {
        let a1 = Matrix::from_rows(&[[1.0, 0.5], [3.0, 0.25]]);
        let b1 = Matrix::from_rows(&[[1.0, 0.0], [2.1, 1.0]]);
        let a2 = Matrix::from_rows(&[[3.0, 0.0], [0.0, 3.0]]);
        let b2 = Matrix::from_rows(&[[-2.0, 1.0], [1.0, 2.0]]);
        let checks = [
            ("example (1) |A^-1 B|", check_picard(&a1, &b1)?.value(), 1.0910),
            ("example (1) rho(|A^-1 B|)", check_picard_rho(&a1, &b1)?.value(), 0.9780),
            ("example (2) |A^-1 B|", check_picard(&a2, &b2)?.value(), 0.7454),
            ("example (2) rho(|A^-1 B|)", check_picard_rho(&a2, &b2)?.value(), 1.0),
        ];
        let mut ok = true;
        for (label, got, want) in checks {
            let good = (got - want).abs() <= 1e-3;
            notes.push(format!("{label}: computed {got:.6}, expected {want} {}", if good { "ok" } else { "MISMATCH" }));
            ok &= good;
        }
        Ok(ok)
    }));

    outcomes.push(criterion("4", "W-contraction condition and root test equivalences (10000 samples each)", |notes| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a11);
        let (mut tested, mut disagree, mut held) = (0, 0, 0);
        while tested < 10_000 {
            let s = random_scalars(&mut rng);
            let c = check_gnms(&s);
            if c.margin.abs() <= 1e-9 {
                continue;
            }
            tested += 1;
            held += c.holds as usize;
            if c.holds != (spectral_radius_w(&s) < 1.0) {
                disagree += 1;
            }
        }
        notes.push(format!("condition vs rho(W) < 1: {tested} samples, {held} certified, {disagree} disagreements"));
        let (mut tested_r, mut disagree_r) = (0, 0);
        while tested_r < 10_000 {
            let s: f64 = rng.gen_range(-3.0..3.0);
            let q: f64 = rng.gen_range(-2.0..2.0);
            if (1.0 - q.abs()).min(1.0 + q - s.abs()).abs() <= 1e-9 {
                continue;
            }
            tested_r += 1;
            // roots of x² − sx + q from the quadratic formula
            let disc = s * s - 4.0 * q;
            let modulus = if disc >= 0.0 {
                ((s + disc.sqrt()) / 2.0).abs().max(((s - disc.sqrt()) / 2.0).abs())
            } else {
                q.sqrt()
            };
            debug_assert!((modulus - quadratic_root_modulus(s, q)).abs() < 1e-12);
            if youngs_root_test(s, q) != (modulus < 1.0) {
                disagree_r += 1;
            }
        }
        notes.push(format!("root test vs explicit roots: {tested_r} samples, {disagree_r} disagreements"));
        Ok(disagree == 0 && disagree_r == 0)
    }));

    outcomes.push(criterion("5", "stronger conditions imply weaker ones (>= 1000 instances each)", |notes| {
        let mut ok = true;
        // simplified τ-window condition ⇒ W-contraction condition
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let (mut premise, mut counter, mut draws) = (0, 0, 0);
        while premise < 1000 && draws < 10_000_000 {
            draws += 1;
            let mut s = random_scalars(&mut rng);
            s.alpha = rng.gen_range(0.0..1.0);
            s.gamma = rng.gen_range(0.0..1.0);
            let window = check_gnms_tau_window(&s);
            let full = check_gnms(&s);
            if !window.holds || window.margin < 1e-9 || full.margin.abs() < 1e-9 {
                continue;
            }
            premise += 1;
            counter += (!full.holds) as usize;
        }
        notes.push(format!("tau-window => gnms: {premise} premise instances, {counter} counterexamples"));
        ok &= premise >= 1000 && counter == 0;

        let (t, p, c) = implication_counts(1000, 0x15, |rng| {
            let (a, b) = random_pair(rng);
            let omega = diag_multiple(&a, rng.gen_range(0.0..2.0));
            Ok((check_mn_classic(&a, &b, &omega)?, check_mn(&a, &b, &omega)?))
        })?;
        notes.push(format!("mn-classic => mn: {t} instances, {p} premise, {c} counterexamples"));
        ok &= c == 0 && p > 0;

        let (t, p, c) = implication_counts(1000, 0x17, |rng| {
            let (a, b) = random_pair(rng);
            let inner = triangular_splitting(&a, rng.gen_range(0.5..1.0))?;
            let omega = diag_multiple(&a, rng.gen_range(0.0..2.0));
            Ok((check_nms_classic(&inner, &b, &omega)?, check_nms(&inner, &b, &omega)?))
        })?;
        notes.push(format!("nms-classic => nms: {t} instances, {p} premise, {c} counterexamples"));
        ok &= c == 0 && p > 0;

        let (t, p, c) = implication_counts(1000, 0x19, |rng| {
            let (a, b) = random_pair(rng);
            let inner = triangular_splitting(&a, rng.gen_range(0.5..1.0))?;
            let theta = rng.gen_range(0.5..1.5);
            let omega = diag_multiple(&a, rng.gen_range(0.0..2.0));
            Ok((check_rnms_classic(&inner, theta, &omega, &b)?, check_rnms(&inner, theta, &omega, &b)?))
        })?;
        notes.push(format!("rnms-classic => rnms: {t} instances, {p} premise, {c} counterexamples"));
        ok &= c == 0 && p > 0;
        Ok(ok)
    }));

    outcomes.push(criterion("6", "parameter collapses reproduce iterates to 1e-12 (20 instances, 50 steps)", |notes| {
        let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
        for seed in 0..20 {
            let p = random_problem(20, 1000 + seed, 0.5)?;
            let a = &p.a;
            let inner = default_triangular_splitting(a)?;
            let omega = diag_multiple(a, 0.5);
            let zero = Matrix::banded_zeros(20, 0, 0);
            let gnms = preset_gnms_with(a, nms_splitting(&inner, &omega)?, identity_splitting(20)?, 1.0)?;
            let nms = preset_nms(a, &inner, &omega)?;
            let nms_trivial = preset_nms(a, &trivial_splitting(a)?, &omega)?;
            let mn = preset_mn(a, &omega)?;
            let mn0 = preset_mn(a, &zero)?;
            let picard = preset_picard(a)?;
            let pairs = [
                ("gnms(Q=I, tau=1) vs nms", max_trajectory_gap(&gnms, &nms, &p, 50)?),
                ("nms(Mbar=A, Nbar=0) vs mn", max_trajectory_gap(&nms_trivial, &mn, &p, 50)?),
                ("mn(omega=0) vs picard", max_trajectory_gap(&mn0, &picard, &p, 50)?),
            ];
            for (k, v) in pairs {
                let e = worst.entry(k).or_insert(0.0);
                *e = e.max(v);
            }
            for (tau, key) in [(0.3, "update forms, tau=0.3"), (1.0, "update forms, tau=1"), (1.7, "update forms, tau=1.7")] {
                let g = preset_gnms(a, tau)?;
                let Scheme::Gnms(cfg) = &g.scheme else { unreachable!() };
                let h = MethodPreset {
                    scheme: Scheme::GnmsReformulated(cfg.clone()),
                    ..g.clone()
                };
                let gap = max_trajectory_gap(&g, &h, &p, 50)?;
                let e = worst.entry(key).or_insert(0.0);
                *e = e.max(gap);
            }
        }
        let mut ok = true;
        for (k, v) in &worst {
            notes.push(format!("{k}: max relative gap {v:.2e}"));
            ok &= *v <= 1e-12;
        }
        Ok(ok)
    }));

    outcomes.push(criterion("7", "certified presets reach the unique enumerated solution (200 instances, n <= 10)", |notes| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x07ac1e);
        let (mut instances, mut runs, mut failures, mut attempts) = (0, 0, 0, 0u64);
        let mut per_method: BTreeMap<String, usize> = BTreeMap::new();
        while instances < 200 && attempts < 10_000 {
            attempts += 1;
            let n = rng.gen_range(1..=10);
            let p = random_problem(n, rng.gen(), rng.gen_range(0.2..1.3))?;
            let a = &p.a;
            let mut presets = vec![
                preset_picard(a)?,
                preset_mn(a, &diag_multiple(a, 2.0))?,
                preset_mn(a, &diag_multiple(a, 0.5))?,
                preset_nms(a, &default_triangular_splitting(a)?, &diag_multiple(a, 0.5))?,
                preset_ngs(a, &diag_multiple(a, 0.5))?,
            ];
            for tau in [0.5, 1.0, 1.5] {
                presets.push(preset_gnms(a, tau)?);
            }
            let mut certified = Vec::new();
            for pr in presets {
                let Scheme::Gnms(cfg) = &pr.scheme else { unreachable!() };
                let cert = check_gnms(&compute_scalars_for(cfg, &p.b)?);
                if cert.holds && cert.margin > 1e-9 {
                    certified.push(pr);
                }
            }
            if certified.is_empty() {
                continue;
            }
            instances += 1;
            let sols = enumerate_solutions(a, &p.b, &p.c)?;
            if sols.len() != 1 {
                notes.push(format!("n={n}: certified instance has {} enumerated solutions", sols.len()));
                failures += 1;
                continue;
            }
            for pr in certified {
                runs += 1;
                *per_method.entry(if pr.name == "GNMS" { format!("GNMS(tau={})", pr.tau().unwrap_or(1.0)) } else { pr.name.clone() }).or_default() += 1;
                let r = pr.solve(&p.b, &p.c, None, None)?;
                let gap = dist2(&r.x_final, &sols[0])?;
                if !r.converged() || gap > 1e-6 {
                    failures += 1;
                    notes.push(format!("n={n} {}: {:?}, distance to solution {gap:.2e}", pr.name, r.termination));
                }
            }
        }
        let summary: Vec<String> = per_method.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        notes.push(format!("{instances} certified instances, {runs} certified runs ({}), {failures} failures", summary.join(" ")));
        Ok(instances == 200 && failures == 0)
    }));

    outcomes.push(criterion("8", "benchmark instances: RES(x*) <= 1e-12, symmetry, bandwidth", |notes| {
        let mut ok = true;
        for (m, rows) in [(3, 3), (9, 9), (10, 10), (12, 5), (20, 20), (40, 40), (60, 60)] {
            let p = block_problem(m, rows)?;
            let x = p.x_star.as_ref().expect("constructed from x*");
            let res = residual(&p.a, &p.b, &p.c, x)?;
            let n = m * rows;
            let mut symmetric = true;
            for i in 0..n {
                let (s, e) = p.a.row_span(i);
                for j in s..e {
                    symmetric &= p.a.get(i, j) == p.a.get(j, i) && p.b.get(i, j) == p.b.get(j, i);
                }
            }
            let expect_bw = (rows.min(5) - 1) * m;
            let expect_bw = expect_bw.max(3.min(m - 1));
            let band_ok = p.a.nonzero_bandwidth() == (expect_bw, expect_bw) && p.b.nonzero_bandwidth() == (expect_bw, expect_bw);
            let diag_ok = p.a.diagonal().iter().all(|d| *d == 36.2) && p.b.diagonal().iter().all(|d| *d == 3.0);
            let good = res <= 1e-12 && symmetric && band_ok && diag_ok && p.dim() == n;
            notes.push(format!(
                "m={m} block_rows={rows}: n={n} RES(x*)={res:.1e} symmetric={symmetric} bandwidth={:?} {}",
                p.a.nonzero_bandwidth(),
                if good { "ok" } else { "FAILED" }
            ));
            ok &= good;
        }
        Ok(ok)
    }));

    println!();
    for o in &outcomes {
        for n in &o.notes {
            println!("    [{}] {n}", o.id);
        }
    }
    println!();
    for o in &outcomes {
        println!("{} criterion {:<3} {} ({:.1} s)", if o.pass { "PASS" } else { "FAIL" }, o.id, o.title, o.seconds);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("\n{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
