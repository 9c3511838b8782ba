//! End-to-end acceptance suite. Runs every criterion, prints one line each, and
//! exits non-zero if any of them fails.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use lyapsize::dynamics::{quotient_distance, search_rho, NeighborhoodSpec, SystemSpec};
use lyapsize::expansivity::{advance_chain_dir, check_cw_expansive, check_expansive_pairs, replay_witness, Chain, PairState, Verdict, DEFAULT_POINT_BUDGET};
use lyapsize::hyperspace::{hausdorff_points, whitney_size_exact, SizeConfig};
use lyapsize::lyapunov::{AsymptoticLyapunov, IsolatedKind, IsolatedSetLyapunov, LyapOptions, SingularityLyapunov};
use lyapsize::metric::{AmbientSpace, Point, PointSet};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Verdict_ {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict_ {
    Verdict_ { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn torus() -> AmbientSpace<f64> {
    AmbientSpace::flat_torus(vec![1.0, 1.0]).unwrap()
}

fn random_points(r: &mut ChaCha8Rng, n: usize) -> Vec<Point<f64>> {
    (0..n).map(|_| vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)]).collect()
}

fn set(points: Vec<Point<f64>>) -> PointSet<f64> {
    PointSet::new(points, 0.0).unwrap()
}

fn ulp_slack(a: f64, b: f64) -> f64 {
    4.0 * f64::EPSILON * (a + b)
}

/// Random point of the square `[-w, w]^2` satisfying `keep`.
fn draw(r: &mut ChaCha8Rng, w: f64, keep: impl Fn(&[f64]) -> bool) -> Point<f64> {
    loop {
        let x = vec![r.gen_range(-w..w), r.gen_range(-w..w)];
        if keep(&x) {
            return x;
        }
    }
}

fn whitney_axioms() -> Verdict_ {
    let t0 = Instant::now();
    let cfg = SizeConfig::new(torus(), 1024).unwrap();
    let grid: Vec<Point<f64>> = cfg.references().to_vec();
    // the prefix must be exactly the 32 x 32 grid
    let on_grid = grid.iter().all(|q| q.iter().all(|c| (c * 32.0).fract() == 0.0));
    let mut keys: Vec<(u64, u64)> = grid.iter().map(|q| ((q[0] * 32.0) as u64, (q[1] * 32.0) as u64)).collect();
    keys.sort_unstable();
    keys.dedup();
    if !on_grid || keys.len() != 1024 {
        return verdict(false, "dense prefix does not enumerate the 32x32 grid".into());
    }
    let mut r = rng(1);
    let mut failures = 0;
    for _ in 0..1000 {
        let nb = r.gen_range(2..=40);
        let b: Vec<Point<f64>> = grid.choose_multiple(&mut r, nb).cloned().collect();
        let na = r.gen_range(1..nb);
        let a = b[..na].to_vec();
        if whitney_size_exact(&set(a), &cfg) >= whitney_size_exact(&set(b), &cfg) {
            failures += 1;
        }
    }
    for _ in 0..1000 {
        let n = if r.gen_bool(0.5) { 1 } else { r.gen_range(2..=20) };
        let a: Vec<Point<f64>> = grid.choose_multiple(&mut r, n).cloned().collect();
        if whitney_size_exact(&set(a), &cfg).is_zero() != (n == 1) {
            failures += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(failures == 0 && secs < 10.0, format!("{failures} failures in 2000 checks, {secs:.2} s (limit 10 s)"))
}

fn lipschitz() -> Verdict_ {
    let cfg = SizeConfig::new(torus(), 64).unwrap();
    let mut r = rng(2);
    let mut failures = 0;
    for _ in 0..1000 {
        let (na, nb) = (r.gen_range(1..=20), r.gen_range(1..=20));
        let (a, b) = (random_points(&mut r, na), random_points(&mut r, nb));
        let dh = hausdorff_points(cfg.space(), &a, &b);
        let diff = (&whitney_size_exact(&set(a), &cfg) - &whitney_size_exact(&set(b), &cfg)).to_f64().abs();
        if diff > 2.0 * dh + 2.0 * cfg.tail_bound() {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{failures} failures in 1000 pairs"))
}

fn hausdorff_axioms() -> Verdict_ {
    let s = torus();
    let mut r = rng(3);
    let mut failures = 0;
    for _ in 0..1000 {
        let n = [r.gen_range(1..=12), r.gen_range(1..=12), r.gen_range(1..=12)];
        let (a, b, c) = (random_points(&mut r, n[0]), random_points(&mut r, n[1]), random_points(&mut r, n[2]));
        let (ab, bc, ac) = (hausdorff_points(&s, &a, &b), hausdorff_points(&s, &b, &c), hausdorff_points(&s, &a, &c));
        let ok = hausdorff_points(&s, &a, &a) == 0.0
            && ab == hausdorff_points(&s, &b, &a)
            && (ab > 0.0 || a == b)
            && ac <= ab + bc + ulp_slack(ab, bc);
        if !ok {
            failures += 1;
        }
    }
    verdict(failures == 0, format!("{failures} failures in 1000 triples"))
}

fn node_audit() -> Verdict_ {
    let t0 = Instant::now();
    let node = SystemSpec::linear_node(vec![-1.0, -2.0], 0.01).unwrap();
    let cfg = SizeConfig::new(node.space().clone(), 64).unwrap();
    let opts = LyapOptions::default();
    let floor = opts.floor;
    let a = AsymptoticLyapunov::new(node, vec![0.0, 0.0], 0.9, &cfg, opts).unwrap();
    let mut r = rng(4);
    let (mut bad, mut steps) = (0, 0);
    for _ in 0..100 {
        let x = draw(&mut r, 0.9, |x| a.contains(x) && x[0].hypot(x[1]) >= floor);
        let rep = a.audit(&x, 20.0).unwrap();
        bad += rep.violations.len();
        steps += rep.values.len();
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(bad == 0 && secs < 30.0, format!("{bad} violations in {steps} samples from 100 starts, {secs:.2} s (limit 30 s)"))
}

fn saddle_audit() -> Verdict_ {
    let t0 = Instant::now();
    let sad = SystemSpec::planar_saddle(1.0, -1.0, 0.01).unwrap();
    let cfg = SizeConfig::new(sad.space().clone(), 64).unwrap();
    let opts = LyapOptions::default();
    let (u, _) = match search_rho(&sad, vec![0.0, 0.0], 1.0, opts.grid, opts.horizon, 8) {
        Ok(found) => found,
        Err(e) => return verdict(false, format!("rho search failed: {e}")),
    };
    let floor = opts.floor;
    let s = SingularityLyapunov::new(sad, u.spec().clone(), &cfg, opts).unwrap();
    let mut r = rng(5);
    let (mut bad, mut steps, mut worst) = (0, 0, f64::NEG_INFINITY);
    for _ in 0..100 {
        let x = draw(&mut r, 1.0, |x| s.contains(x) && x[0].hypot(x[1]) >= floor);
        let rep = s.audit(&x, 20.0).unwrap();
        bad += rep.violations.len();
        steps += rep.values.len() - 1;
        worst = rep.max_violation().map_or(worst, |m| worst.max(m));
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        bad == 0 && secs < 60.0,
        format!(
            "{bad} violations in {steps} steps from 100 starts (rho = {}, largest increment {worst:e}), {secs:.2} s (limit 60 s)",
            u.spec().rho
        ),
    )
}

fn attracting_circle() -> Verdict_ {
    let sys = SystemSpec::attracting_circle(0.01).unwrap();
    let n = 1024;
    let ring: Vec<Point<f64>> = (0..n)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / n as f64;
            vec![th.cos(), th.sin()]
        })
        .collect();
    let mesh = std::f64::consts::PI / n as f64;
    let lambda = PointSet::new(ring.clone(), mesh).unwrap();
    let cfg = SizeConfig::new(sys.space().clone(), 64).unwrap();
    let iso = IsolatedSetLyapunov::new(&sys, &lambda, 0.5, 0.25, &cfg, &LyapOptions::default()).unwrap();
    let slack = 2.0 * mesh + 1e-9;
    let on_lambda = ring.iter().step_by(8).all(|l| iso.value(l).unwrap().abs() <= slack);

    let mut r = rng(6);
    let base = sys.space().clone();
    let (mut bad, mut steps) = (0, 0);
    for _ in 0..50 {
        let x = draw(&mut r, 1.5, |x| {
            let d = base.dist_to_set(x, &ring);
            d >= 0.01 && d < 0.5
        });
        let rep = iso.audit(&x, 20.0).unwrap();
        bad += rep.violations.len();
        steps += rep.values.len();
    }

    let mut qfail = 0;
    for _ in 0..1000 {
        let pick = |r: &mut ChaCha8Rng| {
            if r.gen_bool(0.2) {
                ring[r.gen_range(0..n)].clone()
            } else {
                vec![r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]
            }
        };
        let (x, y, z) = (pick(&mut r), pick(&mut r), pick(&mut r));
        let q = |a: &[f64], b: &[f64]| quotient_distance(&base, &ring, a, b).unwrap();
        let (xy, yz, xz) = (q(&x, &y), q(&y, &z), q(&x, &z));
        let ok = q(&x, &x) == 0.0
            && xy == q(&y, &x)
            && xz <= xy + yz + ulp_slack(xy, yz)
            && xy <= base.dist(&x, &y);
        if !ok {
            qfail += 1;
        }
    }
    let pass = iso.kind() == IsolatedKind::Attracting && on_lambda && bad == 0 && qfail == 0;
    verdict(
        pass,
        format!(
            "kind {:?}, V on sampled L within {slack:e}: {on_lambda}, {bad} violations in {steps} samples from 50 orbits, {qfail} quotient axiom failures in 1000 triples",
            iso.kind()
        ),
    )
}

/// First `n` with `|M^n v| >= delta` by exact integer powers of the cat matrix.
fn cat_oracle_first_separation(v: [f64; 2], delta: f64) -> i64 {
    let (mut a, mut b, mut c, mut d) = (1i64, 0i64, 0i64, 1i64);
    for n in 0..64 {
        let w = [a as f64 * v[0] + b as f64 * v[1], c as f64 * v[0] + d as f64 * v[1]];
        if w[0].hypot(w[1]) >= delta {
            return n;
        }
        // multiply by [[2, 1], [1, 1]] on the left
        (a, b, c, d) = (2 * a + c, 2 * b + d, a + c, b + d);
    }
    -1
}

fn cat_pairs() -> Verdict_ {
    let cat = SystemSpec::<f64>::cat_map();
    let mut r = rng(7);
    let mut pairs = Vec::with_capacity(1000);
    for _ in 0..1000 {
        let x = vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
        let (len, ang) = (r.gen_range(1e-3..0.1), r.gen_range(0.0..std::f64::consts::TAU));
        let mut y = vec![x[0] + len * ang.cos(), x[1] + len * ang.sin()];
        cat.space().normalize(&mut y);
        pairs.push(PairState::new(cat.space(), x, y).unwrap());
    }
    let rep = check_expansive_pairs(&cat, 0.2, 64, &pairs).unwrap();
    let within = rep.first_separation.iter().filter(|n| n.is_some_and(|n| n.abs() <= 8)).count();

    let g = (5f64.sqrt() - 1.0) / 2.0;
    let norm = (1.0 + g * g).sqrt();
    let v = [1e-3 / norm, 1e-3 * g / norm];
    let unstable = PairState::new(cat.space(), vec![0.0, 0.0], v.to_vec()).unwrap();
    let got = check_expansive_pairs(&cat, 0.2, 64, &[unstable]).unwrap().first_separation[0];
    let oracle = cat_oracle_first_separation(v, 0.2);

    let rot = SystemSpec::rotation(1.0).unwrap();
    let rpairs = vec![PairState::new(rot.space(), vec![0.5], vec![0.51]).unwrap()];
    let rrep = check_expansive_pairs(&rot, 0.2, 10_000, &rpairs).unwrap();
    let replay = rrep.witness.as_ref().is_some_and(|w| replay_witness(&rot, 0.2, 10_000, w).unwrap_or(false));

    let pass = within == 1000 && got == Some(oracle) && oracle == 6 && rrep.verdict == Verdict::Counterexample && replay;
    verdict(
        pass,
        format!(
            "{within}/1000 pairs separate within 8, unstable pair at {got:?} (oracle {oracle}), rotation verdict {:?} with witness replay {replay}",
            rrep.verdict
        ),
    )
}

fn cat_chains() -> Verdict_ {
    let cat = SystemSpec::<f64>::cat_map();
    let eps = 1e-4;
    let mut r = rng(8);
    let mut seeds = Vec::with_capacity(100);
    for _ in 0..100 {
        let x = vec![r.gen_range(0.0..1.0), r.gen_range(0.0..1.0)];
        let ang = r.gen_range(0.0..std::f64::consts::TAU);
        let y = vec![x[0] + 1e-3 * ang.cos(), x[1] + 1e-3 * ang.sin()];
        seeds.push(Chain::segment(x, y, eps).unwrap());
    }
    let rep = check_cw_expansive(&cat, 0.2, 64, &seeds).unwrap();
    let within = rep.first_separation.iter().filter(|n| n.is_some_and(|n| n.abs() <= 8)).count();

    let mut gap_failures = 0;
    let mut advances = 0;
    for seed in &seeds {
        for forward in [true, false] {
            let mut c = seed.clone();
            for _ in 0..8 {
                c = advance_chain_dir(&cat, &c, forward, DEFAULT_POINT_BUDGET).unwrap();
                advances += 1;
                if c.max_gap() > eps {
                    gap_failures += 1;
                }
            }
        }
    }

    let rot = SystemSpec::rotation(1.0).unwrap();
    let arcs: Vec<Chain<f64>> = (0..10).map(|k| Chain::segment(vec![0.5 * k as f64], vec![0.5 * k as f64 + 0.05], 1e-3).unwrap()).collect();
    let rrep = check_cw_expansive(&rot, 0.2, 1000, &arcs).unwrap();

    let pass = within == 100 && gap_failures == 0 && rep.errors.is_empty() && rrep.verdict == Verdict::Counterexample;
    verdict(
        pass,
        format!(
            "{within}/100 arcs exceed 0.2 within 8, {gap_failures} gap failures in {advances} advances, rotation verdict {:?}",
            rrep.verdict
        ),
    )
}

fn isolated_vs_singularity() -> Verdict_ {
    let sad = SystemSpec::planar_saddle(1.0, -1.0, 0.01).unwrap();
    let cfg = SizeConfig::new(sad.space().clone(), 64).unwrap();
    let opts = LyapOptions::default();
    let p = vec![0.0, 0.0];
    let nb = NeighborhoodSpec::new(p.clone(), 1.0, 0.5).unwrap();
    let sing = SingularityLyapunov::new(sad.clone(), nb, &cfg, opts.clone()).unwrap();
    let iso = IsolatedSetLyapunov::new(&sad, &PointSet::singleton(p.clone()), 1.0, 0.5, &cfg, &opts).unwrap();
    let v_p = sing.value(&p).unwrap();
    let slack = 2.0 * opts.tol_for(&cfg);
    let mut r = rng(9);
    let mut worst = 0.0f64;
    let mut failures = 0;
    for _ in 0..50 {
        let x = draw(&mut r, 1.0, |x| sing.contains(x) && iso.contains(x));
        let diff = (iso.value(&x).unwrap() - (sing.value(&x).unwrap() - v_p)).abs();
        worst = worst.max(diff);
        if diff > slack {
            failures += 1;
        }
    }
    verdict(
        failures == 0 && iso.kind() == IsolatedKind::SaddleType,
        format!("{failures}/50 points outside slack {slack:e}, largest difference {worst:e}"),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let o = Command::new(env!("CARGO_BIN_EXE_lyapsize")).current_dir(dir).args(args).output().expect("binary runs");
    (o.status.code(), o.stdout)
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .map(|rd| rd.map(|e| e.unwrap().path()).collect::<Vec<_>>())
        .unwrap_or_default()
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

fn determinism() -> Verdict_ {
    let d = tempfile::TempDir::new().unwrap();
    let dir = d.path();
    fs::write(dir.join("set.csv"), "0.1,0.2\n0.4,0.9\n0.7,0.3\n").unwrap();
    let configs = [
        ("size.json", "size", r#"{"mode":"size","system":{"id":"cat_map"},"io":{"inputs":["set.csv"]}}"#),
        (
            "node.json",
            "lyap",
            r#"{"mode":"lyap-asymptotic","system":{"id":"linear_node"},"neighborhood":{"r":0.9},"sampling":{"count":4},"seed":17}"#,
        ),
        (
            "sad.json",
            "lyap",
            r#"{"mode":"lyap-singularity","system":{"id":"planar_saddle"},"neighborhood":{"r":1.0,"rho":0.5},"audit":{"horizon":40},"sampling":{"count":2},"seed":17}"#,
        ),
        ("pairs.json", "expansive", r#"{"mode":"expansive","system":{"id":"cat_map"},"sampling":{"count":50},"seed":17}"#),
        (
            "arcs.json",
            "cw-expansive",
            r#"{"mode":"cw-expansive","system":{"id":"cat_map"},"sampling":{"count":10,"offset_min":0.001,"offset_max":0.001},"seed":17}"#,
        ),
        ("rot.json", "expansive", r#"{"mode":"expansive","system":{"id":"rotation"},"sampling":{"count":3},"seed":17}"#),
    ];
    let mut mismatches = Vec::new();
    for (name, sub, text) in configs {
        fs::write(dir.join(name), text).unwrap();
        let mut runs = Vec::new();
        for k in 0..2 {
            let out = format!("{name}.out{k}");
            let (code, stdout) = run_cli(dir, &[sub, "--config", name, "--out-dir", &out]);
            runs.push((code, stdout, tree(&dir.join(&out))));
        }
        if runs[0] != runs[1] || runs[0].0 == Some(1) {
            mismatches.push(name);
        }
    }
    verdict(mismatches.is_empty(), format!("{} configs run twice, differing or failing: {mismatches:?}", configs.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict_); 10] = [
        ("Whitney axioms on the 32x32 torus grid", whitney_axioms),
        ("Lipschitz bound against Hausdorff distance", lipschitz),
        ("Hausdorff metric axioms", hausdorff_axioms),
        ("asymptotic construction audit, linear node", node_audit),
        ("singular point construction audit, planar saddle", saddle_audit),
        ("isolated set construction, attracting circle", attracting_circle),
        ("cat map pair separation and rotation counterexample", cat_pairs),
        ("cat map arc separation and chain gaps", cat_chains),
        ("isolated singleton against singular point construction", isolated_vs_singularity),
        ("determinism of CLI outputs", determinism),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        let _ = writeln!(out, "criterion {:>2} {}: {} ({})", i + 1, if v.pass { "PASS" } else { "FAIL" }, name, v.detail);
        let _ = out.flush();
    }
    let _ = writeln!(out, "{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
