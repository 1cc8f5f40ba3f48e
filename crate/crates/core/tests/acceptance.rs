//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails, except the sub-checks listed in `KNOWN_GAPS`, which are
//! computed and reported as FAIL but do not fail the run. Each known gap is
//! explained in the README.

use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use accavity::asymptotics::{
    case1_levels, case1_radicand, energy_case1, energy_case2, n_max, Branch, Case1Params,
};
use accavity::currents::{
    current_case1, current_case1_per_level, current_case2, current_numeric, CurrentError, NPolicy,
    OccupationWindow,
};
use accavity::model::{
    derive, effective_potentials, field_divergence, missing_phase, Channel, DerivedParams,
    PhysicalConfig, Spin,
};
use accavity::oracle::{fd_eigenvalues, GridSpec};
use accavity::quantize::{solve_channel, EnergyLevel, SearchControls};
use accavity::specfun::{gamma, kummer_m, rgamma, tricomi_u};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PI3: f64 = PI * PI * PI;

/// Sub-checks that cannot pass as written.
const KNOWN_GAPS: [&str; 2] = ["5a", "8b"];

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome {
        id,
        title,
        pass,
        detail,
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn spin(rng: &mut impl Rng) -> Spin {
    if rng.gen_bool(0.5) {
        Spin::Up
    } else {
        Spin::Down
    }
}

fn criterion_1() -> Vec<Outcome> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let draws = 1000;
    let (mut kummer, mut ident, mut recur, mut wrons) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut wrons_n = 0;
    for _ in 0..draws {
        let (a, b, x) = (rng.gen_range(-20.0..20.0), rng.gen_range(0.2..12.0), rng.gen_range(-30.0..30.0f64));
        let lhs = kummer_m(a, b, x).unwrap().value;
        let rhs = x.exp() * kummer_m(b - a, b, -x).unwrap().value;
        let scale = lhs.abs().max(1e-6 * x.exp().max(1.0));
        kummer = kummer.max((lhs - rhs).abs() / scale);

        let (a, x) = (rng.gen_range(-5.0..5.0), rng.gen_range(0.01..20.0f64));
        ident = ident.max(rel(tricomi_u(a, a + 1.0, x).unwrap().value, x.powf(-a)));

        let (a, b, x) = (rng.gen_range(-30.0..30.0), rng.gen_range(1.0..8.0), rng.gen_range(0.01..40.0f64));
        let terms = [
            tricomi_u(a - 1.0, b, x).unwrap().value,
            (b - 2.0 * a - x) * tricomi_u(a, b, x).unwrap().value,
            a * (a - b + 1.0) * tricomi_u(a + 1.0, b, x).unwrap().value,
        ];
        let scale = terms.iter().fold(0.0f64, |s, t| s.max(t.abs()));
        recur = recur.max(terms.iter().sum::<f64>().abs() / scale);

        let (a, b, x) = (rng.gen_range(-10.0..10.0f64), rng.gen_range(1.0..6.0), rng.gen_range(0.05..20.0f64));
        // Γ(a) is infinite at the poles; skip draws within 1e-3 of one.
        if !(a < 1e-3 && (a - a.round()).abs() < 1e-3) {
            let m = kummer_m(a, b, x).unwrap().value;
            let dm = a / b * kummer_m(a + 1.0, b + 1.0, x).unwrap().value;
            let u = tricomi_u(a, b, x).unwrap().value;
            let du = -a * tricomi_u(a + 1.0, b + 1.0, x).unwrap().value;
            let want = -gamma(b).unwrap() * rgamma(a) * x.powf(-b) * x.exp();
            wrons = wrons.max(rel(m * du - dm * u, want));
            wrons_n += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = kummer <= 1e-9 && ident <= 1e-11 && recur <= 1e-7 && wrons <= 1e-7 && secs < 10.0;
    vec![outcome(
        "1",
        "special-function identities",
        pass,
        format!(
            "{draws} draws each; worst Kummer {kummer:.1e}, U(a,a+1) {ident:.1e}, recurrence {recur:.1e}, Wronskian {wrons:.1e} ({wrons_n} draws off the poles); {secs:.2} s"
        ),
    )]
}

fn dp_for_y(y_a: f64, ell: i64, s: Spin) -> DerivedParams {
    let r_a = (2.0 * y_a).sqrt();
    let cfg = PhysicalConfig::new(1.0, 1.0, 1.0, r_a, 10.0).unwrap();
    derive(&cfg, Channel::new(ell, s)).unwrap()
}

fn criterion_2() -> Vec<Outcome> {
    let t0 = Instant::now();
    let controls = SearchControls::default();
    let mut worst = 0.0f64;
    let mut configs = 0;
    let mut errors = Vec::new();
    for y_a in [0.01, 0.1, 0.5, 2.0] {
        for ell in [0, 1, -2] {
            for s in [Spin::Up, Spin::Down] {
                let dp = dp_for_y(y_a, ell, s);
                let mut e_max = energy_case2(5, &dp) + 2.0 * y_a;
                let levels = loop {
                    match solve_channel(&dp, e_max, &controls) {
                        Ok(l) if l.len() >= 5 => break Some(l),
                        Ok(_) => e_max *= 1.5,
                        Err(e) => {
                            errors.push(format!("y_a {y_a} ell {ell} s {s}: {e}"));
                            break None;
                        }
                    }
                };
                let Some(levels) = levels else { continue };
                let grid = GridSpec::for_energy(&dp, e_max, 20_000).unwrap();
                let oracle = fd_eigenvalues(&dp, &grid, 5).unwrap();
                for (lv, &e) in levels.iter().zip(oracle.energies()) {
                    worst = worst.max(rel(lv.energy, e));
                }
                configs += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = errors.is_empty() && worst <= 1e-4 && secs < 120.0;
    vec![outcome(
        "2",
        "exact vs oracle spectra",
        pass,
        format!("{configs} configurations, lowest 5 levels; worst relative difference {worst:.2e}; {secs:.1} s{}", if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join(" | ")) }),
    )]
}

fn criterion_3() -> Vec<Outcome> {
    let controls = SearchControls::default();
    let mut monotone = true;
    let mut worst_small = 0.0f64;
    let mut notes = Vec::new();
    let mut floored = 0;
    for ell in -3..=3 {
        for s in [Spin::Up, Spin::Down] {
            let mut prev = [f64::INFINITY; 3];
            for y_a in [1e-2, 1e-3, 1e-4] {
                let dp = dp_for_y(y_a, ell, s);
                let levels = solve_channel(&dp, energy_case2(3, &dp), &controls).unwrap();
                for n in 0..3 {
                    let d = (levels[n].energy - energy_case2(n, &dp)).abs();
                    // Below the root tolerance the gap is rounding noise.
                    let floor = 1e-11 * levels[n].energy.abs().max(dp.omega_ac);
                    if d <= floor {
                        floored += 1;
                    } else if d.is_nan() || d >= prev[n] {
                        monotone = false;
                        notes.push(format!("ell {ell} s {s} n {n} at y_a {y_a}"));
                    }
                    prev[n] = d;
                    if y_a == 1e-4 && dp.gamma.abs() >= 0.5 {
                        worst_small = worst_small.max(d / dp.omega_ac);
                    }
                }
            }
        }
    }
    let pass = monotone && worst_small <= 0.01;
    vec![outcome(
        "3",
        "case-2 limit",
        pass,
        format!(
            "ell in [-3, 3], both spins, lowest 3 levels; monotone decrease {} ({floored} gaps already below the 1e-11 root floor); worst |E_exact - E_case2| at y_a = 1e-4 with |gamma| >= 1/2: {worst_small:.2e} omega{}",
            if monotone { "holds" } else { "violated" },
            if notes.is_empty() { String::new() } else { format!(" ({})", notes.join(", ")) }
        ),
    )]
}

fn criterion_4() -> Vec<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut admitted = 0;
    let base = derive(&PhysicalConfig::default(), Channel::new(0, Spin::Up)).unwrap();
    for _ in 0..1000 {
        let s = spin(&mut rng);
        let phi = rng.gen_range(-40.0 * PI3..40.0 * PI3);
        let n = rng.gen_range(0..25usize);
        let dp = derive(&PhysicalConfig::default(), Channel::new(0, s)).unwrap().with_phase(phi);
        let _ = &base;
        let admissible = n_max(&dp).is_some_and(|m| n <= m);
        let real = Case1Params::new(Branch::Plus, n, &dp)
            .and_then(|p| energy_case1(&p, &dp))
            .is_ok_and(f64::is_finite);
        if real != admissible {
            mismatches += 1;
        }
        admitted += usize::from(real);
    }
    vec![outcome(
        "4",
        "cutoff law",
        mismatches == 0,
        format!("1000 draws, {admitted} admissible; {mismatches} mismatches"),
    )]
}

fn case1_source(
    w: &OccupationWindow,
    base: DerivedParams,
    branch: Branch,
) -> impl Fn(f64) -> Result<Vec<EnergyLevel>, CurrentError> + '_ {
    move |phi| {
        Ok(w.channels(&base.with_phase(phi))
            .iter()
            .flat_map(|ch| case1_levels(ch, &[branch]))
            .collect())
    }
}

fn criterion_5() -> Vec<Outcome> {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut literal_worst, mut per_level_worst) = (0.0f64, 0.0f64);
    let mut cases = 0;
    while cases < 200 {
        let s = spin(&mut rng);
        let phi = s.sign() * rng.gen_range(1.0 * PI3..30.0 * PI3);
        let dp = derive(&PhysicalConfig::default(), Channel::new(0, s)).unwrap().with_phase(phi);
        let Some(m) = n_max(&dp) else { continue };
        let ns: Vec<usize> = (0..=m).filter(|&n| case1_radicand(n, &dp) >= 0.01).collect();
        if ns.is_empty() {
            continue;
        }
        let w = OccupationWindow::new(0, 0, NPolicy::Explicit(ns)).unwrap();
        for branch in Branch::BOTH {
            let numeric = current_numeric(case1_source(&w, dp, branch), phi, &w, 1e-6 * phi.abs()).unwrap();
            literal_worst = literal_worst.max(rel(current_case1(&dp, &w, branch).unwrap(), numeric));
            per_level_worst = per_level_worst.max(rel(current_case1_per_level(&dp, &w, branch).unwrap(), numeric));
        }
        cases += 1;
    }

    // Case 2: sweep Φ and compare every jump with the crossings in between.
    let unit = 1.0 / (4.0 * PI);
    let mut jump_err = 0.0f64;
    let mut jumps = 0;
    for s in [Spin::Up, Spin::Down] {
        let dps = |phi: f64| -> Vec<DerivedParams> {
            (-5..=5)
                .map(|ell| derive(&PhysicalConfig::default(), Channel::new(ell, s)).unwrap().with_phase(phi))
                .collect()
        };
        let steps = 20_000;
        let mut prev: Option<(f64, f64)> = None;
        for k in 0..=steps {
            let phi = -40.0 + 80.0 * (k as f64 + 0.5) / steps as f64;
            let i = current_case2(&dps(phi), s).unwrap();
            if let Some((p_phi, p_i)) = prev {
                let crossings = (-5..=5)
                    .filter(|&ell| {
                        let at = 2.0 * PI * (ell as f64 + 0.5 * (1.0 - s.sign()));
                        at > p_phi && at < phi
                    })
                    .count();
                jumps += crossings;
                jump_err = jump_err.max((p_i - i - 2.0 * unit * crossings as f64).abs());
            }
            prev = Some((phi, i));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    vec![
        outcome(
            "5a",
            "case-1 closed-form current vs -dE/dPhi",
            literal_worst <= 1e-6 && secs < 10.0,
            format!("{cases} draws, radicand >= 0.01; worst relative difference {literal_worst:.2e}"),
        ),
        outcome(
            "5b",
            "case-1 per-level derivative vs -dE/dPhi",
            per_level_worst <= 1e-6 && secs < 10.0,
            format!("same draws; worst relative difference {per_level_worst:.2e}"),
        ),
        outcome(
            "5c",
            "case-2 current piecewise constant",
            jump_err < 1e-12 && jumps > 0 && secs < 10.0,
            format!("{jumps} crossings, each jump 2 omega/(4 pi) to {jump_err:.1e}; {secs:.2} s for criterion 5"),
        ),
    ]
}

fn criterion_6() -> Vec<Outcome> {
    let cfg = PhysicalConfig::new(1.3, 0.7, 2.1, 0.8, 4.0).unwrap();
    let mut loop_err = 0.0f64;
    let mut curl_err = 0.0f64;
    let mut div_err = 0.0f64;
    for s in [Spin::Up, Spin::Down] {
        let ch = Channel::new(0, s);
        let phi = missing_phase(&cfg, s);
        for k in [1.0, 2.0, 10.0] {
            let r = k * cfg.r_a;
            let n = 10_000;
            let dphi = 2.0 * PI / n as f64;
            let v: f64 = (0..n).map(|_| effective_potentials(r, ch, &cfg).unwrap().1 * r * dphi).sum();
            loop_err = loop_err.max((v - phi).abs());
        }
        for i in 0..100 {
            let r = cfg.r_a * (1.01 + 4.0 * i as f64 / 100.0);
            let h = 1e-5 * r;
            let ra1 = |x: f64| x * effective_potentials(x, ch, &cfg).unwrap().0;
            let curl = (ra1(r + h) - ra1(r - h)) / (2.0 * h * r);
            curl_err = curl_err.max((curl - s.sign() * cfg.mu * cfg.rho).abs());
        }
    }
    for i in 1..100 {
        let r = cfg.r_a + (cfg.r_b - cfg.r_a) * i as f64 / 100.0;
        div_err = div_err.max((field_divergence(r, &cfg).unwrap() - cfg.rho).abs());
    }
    vec![outcome(
        "6",
        "geometry invariants",
        loop_err <= 1e-10 && curl_err <= 1e-8 && div_err <= 1e-8,
        format!("loop integral at r_a, 2r_a, 10r_a off by {loop_err:.1e}; curl {curl_err:.1e}; div E {div_err:.1e}"),
    )]
}

fn criterion_7() -> Vec<Outcome> {
    let controls = SearchControls::default();
    let e_max = 10.0;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in [Spin::Up, Spin::Down] {
        for ell in -6..=6 {
            let dp = derive(&PhysicalConfig::default(), Channel::new(ell, s)).unwrap();
            let shifted = dp.with_ell(ell + 1).with_phase(dp.phi_mac + 2.0 * PI);
            a.extend(solve_channel(&dp, e_max, &controls).unwrap().iter().map(|l| l.energy));
            b.extend(solve_channel(&shifted, e_max, &controls).unwrap().iter().map(|l| l.energy));
        }
    }
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let worst = a.iter().zip(&b).map(|(x, y)| rel(*y, *x)).fold(0.0, f64::max);
    vec![outcome(
        "7",
        "relabeling periodicity",
        a.len() == b.len() && worst <= 1e-9,
        format!(
            "ell window [-6, 6] at Phi matched with [-5, 7] at Phi + 2 pi; {} levels below {e_max} omega each side; worst relative difference {worst:.1e}",
            a.len()
        ),
    )]
}

fn criterion_8() -> Vec<Outcome> {
    let dp = derive(&PhysicalConfig::default(), Channel::new(0, Spin::Up)).unwrap().with_phase(2.0 * PI3);
    let e1 = energy_case1(&Case1Params::new(Branch::Plus, 0, &dp).unwrap(), &dp).unwrap();
    let w = OccupationWindow::new(0, 0, NPolicy::Explicit(vec![0])).unwrap();
    let i1 = current_case1(&dp, &w, Branch::Plus).unwrap();
    let dp2 = derive(&PhysicalConfig::default(), Channel::new(1, Spin::Down)).unwrap().with_phase(-PI);
    let e2 = energy_case2(2, &dp2);

    let r = 0.75f64.sqrt();
    let e1_sub = -(PI * PI + 0.75) - 2.0 * (1.0 + r);
    let i1_sub = 1.0 / (2.0 * PI) - 1.0 / PI3 + r / PI3 + 1.0 / (8.0 * PI3 * r);
    let sub_ok = rel(e1, e1_sub) <= 1e-7 && rel(i1, i1_sub) <= 1e-7 && rel(e2, 3.0) <= 1e-7;

    let (e1_printed, i1_printed) = (-14.351_691_8, 0.159_491_7);
    let printed_ok = rel(e1, e1_printed) <= 1e-7 && rel(i1, i1_printed) <= 1e-7 && rel(e2, 3.0) <= 1e-7;
    vec![
        outcome(
            "8a",
            "worked values by direct substitution",
            sub_ok,
            format!("E_case1 = {e1:.15}, I_case1 = {i1:.15}, E_case2 = {e2:.15}"),
        ),
        outcome(
            "8b",
            "worked values as printed (-14.3516918, 0.1594917, 3)",
            printed_ok,
            format!(
                "relative differences {:.1e}, {:.1e}, {:.1e}",
                rel(e1, e1_printed),
                rel(i1, i1_printed),
                rel(e2, 3.0)
            ),
        ),
    ]
}

fn criterion_9() -> Vec<Outcome> {
    let phi = format!("{}", 10.0 * PI3);
    let out = Command::new(env!("CARGO_BIN_EXE_accavity"))
        .args(["spectrum", "--methods", "exact,case1", "--ell", "0", "--s", "+1", "--phi-override", &phi, "--emax", "8"])
        .env("RUST_LOG", "off")
        .output()
        .expect("binary runs");
    let text = String::from_utf8_lossy(&out.stdout);
    let table: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.starts_with("# table: case1_vs_exact"))
        .skip(1)
        .take_while(|l| !l.starts_with('#'))
        .collect();
    for line in &table {
        println!("    {line}");
    }
    vec![outcome(
        "9",
        "case-1 vs exact comparison reported, not asserted",
        out.status.success() && table.len() > 1,
        format!("{} comparison rows at Phi = 10 pi^3, ell = 0, s = +1 (table above)", table.len().saturating_sub(1)),
    )]
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here; run everything.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let t0 = Instant::now();
    let mut all = Vec::new();
    for f in [
        criterion_1 as fn() -> Vec<Outcome>,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ] {
        for o in f() {
            let tag = if o.pass { "PASS" } else { "FAIL" };
            let note = if !o.pass && KNOWN_GAPS.contains(&o.id) { " [known gap, see README]" } else { "" };
            println!("criterion {} ({}): {tag}{note}: {}", o.id, o.title, o.detail);
            all.push(o);
        }
    }
    let unexpected: Vec<&str> = all
        .iter()
        .filter(|o| !o.pass && !KNOWN_GAPS.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let passed = all.iter().filter(|o| o.pass).count();
    println!(
        "acceptance: {passed}/{} checks pass; {:.1} s",
        all.len(),
        t0.elapsed().as_secs_f64()
    );
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
