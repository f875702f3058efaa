//! End-to-end acceptance checks. Each test prints one `[PASS]` or `[FAIL]`
//! line before asserting, so `--nocapture` gives a readable summary.

use std::f64::consts::FRAC_PI_2;

use dcsk_cd::analytic::{approx_fit, craig_closed_form, gamma_sum, gamma_sum_pdf, GammaDist};
use dcsk_cd::channel::FadingProfile;
use dcsk_cd::cli::{run_curve, write_csv};
use dcsk_cd::montecarlo::{ebn0_grid, estimate_ber, Overlays, StoppingRule};
use dcsk_cd::spreading::walsh;
use dcsk_cd::system::{energy_audit, Protocol, SystemConfig, Topology};

const SEED: u64 = 1;

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    println!("[{}] criterion {id}: {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {id} failed: {detail}");
}

/// Common settings: two users, m = 1, L = 2, 2beta = 128, (1,1), 1:1:1.
fn base(topology: Topology, protocol: Protocol) -> SystemConfig {
    SystemConfig { topology, protocol, ..Default::default() }
}

fn exact_at(cfg: &SystemConfig, ebn0_db: f64) -> f64 {
    SystemConfig { ebn0_db, ..cfg.clone() }.exact_ber().expect("exact BER")
}

fn approx_at(cfg: &SystemConfig, ebn0_db: f64) -> f64 {
    SystemConfig { ebn0_db, ..cfg.clone() }.approx_ber().expect("approximate BER")
}

/// Eb/N0 (dB) at which a decreasing BER curve crosses `target`, by bisection.
fn crossing(ber: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 60.0);
    assert!(ber(lo) > target && ber(hi) < target, "target {target} not bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ber(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Horizontal distance `b - a` in dB between two curves at `target`.
fn gap(a: &SystemConfig, b: &SystemConfig, target: f64) -> f64 {
    crossing(|x| exact_at(b, x), target) - crossing(|x| exact_at(a, x), target)
}

#[test]
fn criterion_1_simulation_matches_exact() {
    let grid = ebn0_grid(6.0, 18.0, 2.0).unwrap();
    let rule = StoppingRule::default();
    let cases = [
        ("NC", base(Topology::Nc, Protocol::Ef)),
        ("CC", base(Topology::Cc, Protocol::Df)),
        ("CD/EF", base(Topology::Cd, Protocol::Ef)),
        ("CD/DF", base(Topology::Cd, Protocol::Df)),
    ];
    let (mut inside, mut total) = (0, 0);
    let mut misses = Vec::new();
    for (name, cfg) in &cases {
        let r = run_curve(cfg, &grid, Some(&rule), SEED, Overlays { exact: true, approx: false }).unwrap();
        assert!(r.failures.is_empty(), "{:?}", r.failures);
        for p in &r.curve.points {
            let sim = p.sim.as_ref().unwrap().as_ref().unwrap();
            let exact = *p.exact.as_ref().unwrap().as_ref().unwrap();
            total += 1;
            if sim.contains(exact) {
                inside += 1;
            } else {
                misses.push(format!(
                    "{name}@{}dB sim {:.3e} [{:.3e}, {:.3e}] exact {exact:.3e}",
                    p.ebn0_db, sim.ber, sim.ci_low, sim.ci_high
                ));
            }
        }
    }
    let detail = format!("{inside}/{total} exact values inside the 95% CI {}", misses.join("; "));
    report(1, "simulation agrees with exact BER", inside == total, detail.trim_end());
}

#[test]
fn criterion_2_cooperative_gains() {
    let target = 4e-3;
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [Protocol::Ef, Protocol::Df] {
        let cd = base(Topology::Cd, p);
        let cc = base(Topology::Cc, p);
        let nc = base(Topology::Nc, p);
        let over_cc = gap(&cd, &cc, target);
        let over_nc = gap(&cd, &nc, target);
        pass &= (0.5..=1.5).contains(&over_cc) && (3.0..=5.0).contains(&over_nc);
        parts
            .push(format!("{p:?}: CD over CC {over_cc:.3} dB (want 0.5..1.5), CD over NC {over_nc:.3} dB (want 3..5)"));
    }
    report(2, "CD gain over CC and NC at BER 4e-3", pass, &parts.join("; "));
}

#[test]
fn criterion_3_relay_protocol_gap_vs_fading_depth() {
    let target = 2e-3;
    let with_m = |p, m| SystemConfig { fading: FadingProfile::uniform(m, 2).unwrap(), ..base(Topology::Cd, p) };
    let deep = gap(&with_m(Protocol::Ef, 0.5), &with_m(Protocol::Df, 0.5), target);
    let mild = gap(&with_m(Protocol::Ef, 2.0), &with_m(Protocol::Df, 2.0), target);
    let pass = (1.0..=2.0).contains(&deep) && mild < 0.3;
    let detail = format!("DF minus EF: m=0.5 {deep:.3} dB (want 1..2), m=2 {mild:.3} dB (want < 0.3)");
    report(3, "EF/DF gap shrinks with milder fading", pass, &detail);
}

#[test]
fn criterion_4_antenna_pair_gain() {
    let small = base(Topology::Cd, Protocol::Df);
    let large = SystemConfig { m_r: 3, m_d: 2, ..small.clone() };
    let g = gap(&large, &small, 2e-4);
    report(4, "(3,2) over (1,1) at BER 2e-4", (2.3..=3.7).contains(&g), &format!("{g:.3} dB (want 2.3..3.7)"));
}

#[test]
fn criterion_5_shorter_links_help() {
    let equal = SystemConfig { m_r: 2, m_d: 2, ..base(Topology::Cd, Protocol::Df) };
    let near = SystemConfig { d_sr: 0.8, d_rd: 0.4, ..equal.clone() };
    let grid = ebn0_grid(6.0, 16.0, 1.0).unwrap();
    let worst = grid.iter().map(|&x| exact_at(&near, x) / exact_at(&equal, x)).fold(0.0f64, f64::max);
    let pass = grid.iter().all(|&x| exact_at(&near, x) < exact_at(&equal, x));
    report(5, "1:0.8:0.4 below 1:1:1 on 6..16 dB", pass, &format!("largest BER ratio {worst:.4}"));
}

#[test]
fn criterion_6_spreading_factor_ordering() {
    // Neighbouring points differ by about 0.03 near BER 0.3; 2e4 errors keep
    // each full interval near 0.007 so the ordering can be resolved.
    let rule = StoppingRule { min_errors: 20_000, ..Default::default() };
    let points: Vec<_> = [64, 128, 256]
        .into_iter()
        .map(|two_beta| {
            let cfg = SystemConfig { two_beta, m_r: 2, m_d: 2, ebn0_db: 12.0, ..base(Topology::Cd, Protocol::Df) };
            (two_beta, estimate_ber(&cfg, &rule, SEED).unwrap())
        })
        .collect();
    let separated = |a: &dcsk_cd::montecarlo::BerPoint, b: &dcsk_cd::montecarlo::BerPoint| {
        b.ber - a.ber > (a.ci_high - a.ci_low) + (b.ci_high - b.ci_low)
    };
    let pass = separated(&points[0].1, &points[1].1) && separated(&points[1].1, &points[2].1);
    let detail = points
        .iter()
        .map(|(tb, p)| format!("2beta={tb}: {:.4e} [{:.4e}, {:.4e}]", p.ber, p.ci_low, p.ci_high))
        .collect::<Vec<_>>()
        .join("; ");
    report(6, "smaller spreading factor gives lower BER at 12 dB", pass, &detail);
}

#[test]
fn criterion_7_relay_antenna_threshold() {
    let ber = |m_r| exact_at(&SystemConfig { m_r, m_d: 2, ..base(Topology::Cd, Protocol::Df) }, 16.0);
    let (b3, b4, b5) = (ber(3), ber(4), ber(5));
    let gain34 = (b3 - b4) / b3;
    let gain45 = (b4 - b5) / b4;
    let pass = gain34 > 0.10 && gain45 < 0.03;
    let detail = format!(
        "BER(3,4,5) = {b3:.4e}, {b4:.4e}, {b5:.4e}; 3->4 {:.2}% (want > 10%), 4->5 {:.2}% (want < 3%)",
        100.0 * gain34,
        100.0 * gain45
    );
    report(7, "relay antenna gains saturate beyond four", pass, &detail);
}

#[test]
fn criterion_8_approximation_improves_with_paths() {
    let target = 1e-3;
    let distance =
        |cfg: &SystemConfig| crossing(|x| approx_at(cfg, x), target) - crossing(|x| exact_at(cfg, x), target);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, t, p) in [("NC", Topology::Nc, Protocol::Ef), ("CD/EF", Topology::Cd, Protocol::Ef)] {
        let d: Vec<f64> = [2, 4, 8]
            .into_iter()
            .map(|l| distance(&SystemConfig { fading: FadingProfile::uniform(1.0, l).unwrap(), ..base(t, p) }).abs())
            .collect();
        pass &= d[0] > d[1] && d[1] > d[2];
        if name == "NC" {
            pass &= d[2] < 0.2;
        }
        parts.push(format!("{name} |approx - exact| at L=2,4,8: {:.3}, {:.3}, {:.3} dB", d[0], d[1], d[2]));
    }
    report(8, "closed form tightens as paths increase", pass, &parts.join("; "));
}

/// Running maximum that lets NaN through instead of discarding it.
fn nan_max(acc: f64, v: f64) -> f64 {
    if v.is_nan() || acc.is_nan() {
        f64::NAN
    } else {
        acc.max(v)
    }
}

/// Tanh-sinh quadrature on `[a, b]`, refined until successive levels agree.
fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let r = 0.5 * (b - a);
    let node = |t: f64| {
        let u = FRAC_PI_2 * t.sinh();
        let x = u.tanh();
        let w = FRAC_PI_2 * t.cosh() / u.cosh().powi(2);
        // Distance to the nearer endpoint, computed without cancellation.
        let tail = 1.0 / (u.abs().exp() * u.cosh());
        (x, w, tail)
    };
    let eval = |t: f64| {
        let (x, w, tail) = node(t);
        if w < 1e-300 || tail == 0.0 {
            return 0.0;
        }
        let pt = if x < 0.0 { a + r * tail } else { b - r * tail };
        w * f(pt)
    };
    let mut h = 1.0;
    let mut sum = eval(0.0) + (1..=6).map(|k| eval(k as f64) + eval(-(k as f64))).sum::<f64>();
    let mut prev = sum * h * r;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1.0;
        while k * h <= 6.5 {
            sum += eval(k * h) + eval(-k * h);
            k += 2.0;
        }
        let est = sum * h * r;
        if (est - prev).abs() <= 1e-15 * est.abs().max(1e-300) {
            return est;
        }
        prev = est;
    }
    prev
}

#[test]
fn criterion_9_identities() {
    let mut failures = Vec::new();

    // Closed form against the Craig integral on a 10 x 10 grid.
    let mut worst = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let aw = 0.25 * 1.6f64.powi(i);
            let bw = 1e-3 * 3.5f64.powi(j);
            let fit = GammaDist::new(aw, bw).unwrap();
            let closed = craig_closed_form(&fit).unwrap();
            let quad =
                tanh_sinh(|t| (1.0 + bw / (2.0 * t.sin().powi(2))).powf(-aw), 0.0, FRAC_PI_2) / std::f64::consts::PI;
            let rel = (closed - quad).abs() / quad;
            worst = nan_max(worst, rel);
        }
    }
    if !(worst <= 1e-10) {
        failures.push(format!("closed form vs Craig integral rel err {worst:.2e}"));
    }
    // The fitted parameters of a realistic link pass through the same path.
    let fit = approx_fit(2.0, 5.0, 32.0).unwrap();
    let q = tanh_sinh(|t| (1.0 + fit.scale / (2.0 * t.sin().powi(2))).powf(-fit.shape), 0.0, FRAC_PI_2)
        / std::f64::consts::PI;
    if !((craig_closed_form(&fit).unwrap() - q).abs() <= 1e-10 * q) {
        failures.push("fitted link closed form".into());
    }

    // Series PDF integrates to one.
    let sums = [
        vec![GammaDist::new(2.0, 1.0).unwrap(), GammaDist::new(4.0, 0.5).unwrap()],
        vec![GammaDist::new(0.5, 3.0).unwrap(), GammaDist::new(1.5, 0.7).unwrap(), GammaDist::new(3.0, 1.9).unwrap()],
        vec![GammaDist::new(8.0, 0.2).unwrap(), GammaDist::new(16.0, 0.1).unwrap()],
    ];
    let mut worst_mass = 0.0f64;
    for comps in &sums {
        let s = gamma_sum(comps).unwrap();
        // x = u / (1 - u) maps [0, 1) onto [0, inf).
        let mass = tanh_sinh(
            |u| {
                let x = u / (1.0 - u);
                if !x.is_finite() {
                    return 0.0;
                }
                gamma_sum_pdf(&s, x, 1e-14).unwrap() / ((1.0 - u) * (1.0 - u))
            },
            0.0,
            1.0,
        );
        worst_mass = nan_max(worst_mass, (mass - 1.0).abs());
    }
    if !(worst_mass <= 1e-8) {
        failures.push(format!("series PDF mass off by {worst_mass:.2e}"));
    }

    // Two exponentials: f(x) = (e^{-x/b1} - e^{-x/b2}) / (b1 - b2).
    let (b1, b2) = (0.7, 2.3);
    let s = gamma_sum(&[GammaDist::new(1.0, b1).unwrap(), GammaDist::new(1.0, b2).unwrap()]).unwrap();
    let mut worst_conv = 0.0f64;
    for k in 0..200 {
        let x = 0.05 * k as f64;
        let oracle = ((-x / b1).exp() - (-x / b2).exp()) / (b1 - b2);
        worst_conv = nan_max(worst_conv, (gamma_sum_pdf(&s, x, 1e-14).unwrap() - oracle).abs());
    }
    if !(worst_conv <= 1e-8) {
        failures.push(format!("two-exponential convolution off by {worst_conv:.2e}"));
    }

    // Walsh rows are exactly orthogonal.
    for order in [2usize, 4, 8, 16, 32, 64, 128] {
        let w = walsh(order).unwrap();
        for (i, ri) in w.rows().iter().enumerate() {
            for (j, rj) in w.rows().iter().enumerate() {
                let dot: i64 = ri.iter().zip(rj).map(|(&a, &b)| a as i64 * b as i64).sum();
                if dot != if i == j { order as i64 } else { 0 } {
                    failures.push(format!("Walsh order {order} rows {i},{j} dot {dot}"));
                }
            }
        }
    }

    // Energy split sums to exactly one bit energy.
    for m_r in 1..=4 {
        for m_d in 1..=4 {
            let a = energy_audit(&SystemConfig { m_r, m_d, ..base(Topology::Cd, Protocol::Df) });
            let slot1 = a.per_sd_channel * m_d as f64;
            let slot2 = a.per_rd_channel * (m_r * m_d) as f64;
            if slot1 != a.slot1 || slot2 != a.slot2 || slot1 + slot2 != 1.0 {
                failures.push(format!("energy audit ({m_r},{m_d}): {slot1} + {slot2}"));
            }
        }
    }

    // CSV bytes do not depend on the thread count.
    let cfg = SystemConfig { m_r: 2, ..base(Topology::Cd, Protocol::Df) };
    let grid = [4.0, 8.0, 12.0];
    let rule = StoppingRule { min_errors: 200, ..Default::default() };
    let csv = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let r = run_curve(&cfg, &grid, Some(&rule), SEED, Overlays { exact: true, approx: true }).unwrap();
            let mut buf = Vec::new();
            write_csv(&mut buf, &r.curve).unwrap();
            buf
        })
    };
    if csv(1) != csv(6) {
        failures.push("CSV differs between 1 and 6 threads".into());
    }

    let detail = if failures.is_empty() {
        format!(
            "closed form rel err {worst:.1e}, PDF mass err {worst_mass:.1e}, convolution err {worst_conv:.1e}, Walsh, energy and threading exact"
        )
    } else {
        failures.join("; ")
    };
    report(9, "identity checks", failures.is_empty(), &detail);
}
