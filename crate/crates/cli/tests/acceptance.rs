//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sonc::bnb::{solve_bnb, BnbOptions};
use sonc::certify::{repair_and_certify, sample_soundness_check, RepairMode};
use sonc::covers::ExponentStrategy;
use sonc::geometry::{barycentric_coordinates, CandidateSet, Provenance};
use sonc::harness::{generate_corpus, run_batch, write_corpus, BatchOptions, Config};
use sonc::{compute_bound, BoundOptions, Exponent, Polynomial, PopInstance, Status};

const CORPUS_SEED: u64 = 2024;
const CORPUS_SIZE: usize = 100;
const DENSITY: f64 = 0.3;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn e(v: &[u32]) -> Exponent {
    Exponent::new(v.to_vec())
}

fn univariate(terms: &[(u32, f64)], l: f64, u: f64) -> PopInstance {
    let f = Polynomial::from_terms(1, terms.iter().map(|&(k, c)| (e(&[k]), c))).unwrap();
    PopInstance::new(f, vec![], vec![l], vec![u]).unwrap()
}

fn motzkin() -> PopInstance {
    let f = Polynomial::from_terms(
        2,
        [
            (e(&[4, 2]), 1.0),
            (e(&[2, 4]), 1.0),
            (e(&[2, 2]), -3.0),
            (e(&[0, 0]), 1.0),
        ],
    )
    .unwrap();
    PopInstance::new(f, vec![], vec![-1.0; 2], vec![1.0; 2]).unwrap()
}

/// Golden-section maximization of a concave function on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = b - r * (b - a);
        let x2 = a + r * (b - a);
        if f(x1) < f(x2) {
            a = x1;
        } else {
            b = x2;
        }
    }
    f(0.5 * (a + b))
}

fn criterion_1(dir: &Path) -> Verdict {
    let start = Instant::now();
    let rep = run_batch(
        dir,
        &BatchOptions {
            jobs: 4,
            timings: false,
            ..Default::default()
        },
    )
    .expect("batch runs");
    let elapsed = start.elapsed();
    let t = &rep.table;
    let total = t.total(Config::WithBounds) as f64;
    let without_unc = t.count(Config::WithoutBounds, Status::CoverUnavailable) as f64 / total;
    let with_unc = t.count(Config::WithBounds, Status::CoverUnavailable);
    let with_opt = t.count(Config::WithBounds, Status::Optimal) as f64 / total;
    let pass = total as usize == CORPUS_SIZE
        && without_unc >= 0.90
        && with_unc == 0
        && with_opt >= 0.85
        && elapsed < Duration::from_secs(300);
    verdict(
        pass,
        format!(
            "without-bcs cover-unavailable {:.0}%, with-bcs cover-unavailable {with_unc}, with-bcs optimal {:.0}%, {:.1}s",
            100.0 * without_unc,
            100.0 * with_opt,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_2() -> Verdict {
    // min -x on [-1, 2], a = 2: gamma(nu) = -4 nu - 1/(4 nu)
    let o1 = golden_max(|nu| -4.0 * nu - 1.0 / (4.0 * nu), 1e-6, 10.0);
    // min -x^2 on [-1, 2], a = 4: gamma(nu) = -16 nu - 1/(4 nu)
    let o2 = golden_max(|nu| -16.0 * nu - 1.0 / (4.0 * nu), 1e-6, 10.0);
    // Motzkin: largest gamma with 3 (1 - gamma)^(1/3) >= 3, by bisection
    let (mut lo, mut hi) = (-10.0f64, 0.9f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 3.0 * (1.0 - mid).cbrt() >= 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let o3 = lo;

    let cases = [
        (
            "min -x",
            univariate(&[(1, -1.0)], -1.0, 2.0),
            ExponentStrategy::Fixed(vec![2]),
            o1,
        ),
        (
            "min -x^2",
            univariate(&[(2, -1.0)], -1.0, 2.0),
            ExponentStrategy::Fixed(vec![4]),
            o2,
        ),
        ("motzkin", motzkin(), ExponentStrategy::Uniform, o3),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, inst, strategy, oracle) in cases {
        let opts = BoundOptions {
            strategy,
            use_bound_constraints: name != "motzkin",
            ..Default::default()
        };
        let start = Instant::now();
        let out = compute_bound(&inst, &opts);
        let secs = start.elapsed().as_secs_f64();
        let g = out.gamma_certified().unwrap_or(f64::NAN);
        let ok = (g - oracle).abs() <= 1e-5 && secs < 1.0;
        pass &= ok;
        parts.push(format!("{name} {g:.7} (oracle {oracle:.7}, {secs:.3}s)"));
    }
    verdict(pass, parts.join("; "))
}

struct CorpusSolves {
    optimal: usize,
    violations: usize,
    vacuous: usize,
    worst_excess: f64,
    worst_idem: f64,
    contract_failures: usize,
}

fn corpus_solves(corpus: &[(String, PopInstance)]) -> CorpusSolves {
    let mut s = CorpusSolves {
        optimal: 0,
        violations: 0,
        vacuous: 0,
        worst_excess: f64::NEG_INFINITY,
        worst_idem: 0.0,
        contract_failures: 0,
    };
    for (k, (_, inst)) in corpus.iter().enumerate() {
        for opts in [BoundOptions::default(), BoundOptions::without_bound_constraints()] {
            let out = compute_bound(inst, &opts);
            let (Some(cert), Some(model), Some(res)) = (&out.certificate, &out.model, &out.solve)
            else {
                continue;
            };
            s.optimal += 1;
            let report = sample_soundness_check(inst, cert.gamma, 1000, k as u64);
            s.violations += report.violations;
            if report.is_vacuous() {
                s.vacuous += 1;
            }
            let excess = cert.gamma - res.gamma;
            s.worst_excess = s.worst_excess.max(excess);
            match repair_and_certify(model, &cert.to_solve_result(model), RepairMode::Standard) {
                Ok(again) => s.worst_idem = s.worst_idem.max((again.gamma - cert.gamma).abs()),
                Err(_) => s.contract_failures += 1,
            }
        }
    }
    s
}

fn criterion_3(s: &CorpusSolves) -> Verdict {
    verdict(
        s.optimal > 0 && s.violations == 0,
        format!(
            "{} optimal solves, {} violations, {} with no feasible sample",
            s.optimal, s.violations, s.vacuous
        ),
    )
}

type Q = Ratio<i64>;

/// Exact containment: `beta` is in the hull of `pts` iff it is a nonnegative
/// affine combination of some affinely independent subset (Caratheodory).
fn hull_contains(pts: &[Exponent], beta: &Exponent) -> bool {
    let n = beta.dim();
    let k = pts.len();
    for mask in 1u32..(1 << k) {
        let sub: Vec<&Exponent> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| &pts[i]).collect();
        if sub.len() > n + 1 {
            continue;
        }
        if let Some(l) = solve_exact(&sub, beta) {
            if l.iter().all(|v| *v >= Q::from_integer(0)) {
                return true;
            }
        }
    }
    false
}

/// Unique solution of `sum l_j p_j = beta, sum l_j = 1`, if any.
fn solve_exact(sub: &[&Exponent], beta: &Exponent) -> Option<Vec<Q>> {
    let n = beta.dim();
    let s = sub.len();
    let mut m: Vec<Vec<Q>> = (0..=n)
        .map(|r| {
            let mut row: Vec<Q> = sub
                .iter()
                .map(|p| {
                    if r < n {
                        Q::from_integer(i64::from(p.entries()[r]))
                    } else {
                        Q::from_integer(1)
                    }
                })
                .collect();
            row.push(if r < n {
                Q::from_integer(i64::from(beta.entries()[r]))
            } else {
                Q::from_integer(1)
            });
            row
        })
        .collect();
    let mut row = 0;
    for col in 0..s {
        let piv = (row..=n).find(|&r| m[r][col] != Q::from_integer(0))?;
        m.swap(row, piv);
        let p = m[row][col];
        for v in m[row].iter_mut() {
            *v /= p;
        }
        for r in 0..=n {
            if r != row && m[r][col] != Q::from_integer(0) {
                let f = m[r][col];
                let pivot = m[row].clone();
                for (dst, &src) in m[r].iter_mut().zip(&pivot) {
                    *dst -= src * f;
                }
            }
        }
        row += 1;
    }
    // leftover rows must be consistent
    if (row..=n).any(|r| m[r][s] != Q::from_integer(0)) {
        return None;
    }
    Some((0..s).map(|r| m[r][s]).collect())
}

fn criterion_4() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let (mut covered, mut uncovered, mut bad) = (0, 0, 0);
    for _ in 0..500 {
        let n = rng.gen_range(1..=3);
        let mut cands = CandidateSet::new(n);
        let extra = rng.gen_range(1..=5);
        for _ in 0..extra {
            let p: Vec<u32> = (0..n).map(|_| 2 * rng.gen_range(0..=3)).collect();
            cands.insert(e(&p), Provenance::SupportEven).unwrap();
        }
        let beta = e(&(0..n).map(|_| rng.gen_range(0..=4)).collect::<Vec<u32>>());
        let pts: Vec<Exponent> = cands.iter().map(|(p, _)| p.clone()).collect();
        let oracle = hull_contains(&pts, &beta);
        match barycentric_coordinates(&beta, &cands) {
            Ok(Some(cover)) => {
                covered += 1;
                let sum: f64 = cover.weights.iter().map(|(_, w)| w).sum();
                let ok = (sum - 1.0).abs() <= 1e-9
                    && cover.residual(&cands) <= 1e-9
                    && cover.weights.len() <= n + 1
                    && oracle;
                if !ok {
                    bad += 1;
                }
            }
            Ok(None) => {
                uncovered += 1;
                if oracle {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    verdict(
        bad == 0,
        format!("500 pairs: {covered} covered, {uncovered} uncovered, {bad} disagreements"),
    )
}

fn criterion_5(s: &CorpusSolves) -> Verdict {
    verdict(
        s.optimal > 0
            && s.worst_excess <= 1e-9
            && s.worst_idem <= 1e-12
            && s.contract_failures == 0,
        format!(
            "max gamma_certified - gamma_solver {:e}, max repair drift {:e}, {} re-repair failures",
            s.worst_excess, s.worst_idem, s.contract_failures
        ),
    )
}

fn criterion_6(corpus: &[(String, PopInstance)]) -> Verdict {
    let root = solve_bnb(&univariate(&[(2, -1.0)], -1.0, 2.0), &BnbOptions::default());
    let root_ok = root.nodes == 1 && root.gap() <= 1e-6;

    let (mut instances, mut pairs, mut drops, mut unfinished) = (0, 0, 0, 0);
    let mut worst = f64::INFINITY;
    for (_, inst) in corpus {
        if inst.n != 1 || inst.objective.total_degree().unwrap_or(0) > 6 {
            continue;
        }
        instances += 1;
        let r = solve_bnb(inst, &BnbOptions::default());
        if r.status != sonc::bnb::BnbStatus::Converged {
            unfinished += 1;
        }
        for p in &r.pairs {
            pairs += 1;
            worst = worst.min(p.child - p.parent);
            if p.child < p.parent - 1e-7 {
                drops += 1;
            }
        }
    }
    verdict(
        root_ok && drops == 0,
        format!(
            "-x^2 root: {} node(s), gap {:e}; {instances} univariate instances, {pairs} parent/child pairs, {drops} drops (worst {worst:e}), {unfinished} not converged in 1e4 nodes",
            root.nodes,
            root.gap()
        ),
    )
}

fn criterion_7(dir: &Path) -> Verdict {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_sonc-bound"))
            .args(["batch", dir.to_str().unwrap(), "--no-timings", "--jobs", "4"])
            .output()
            .expect("binary runs")
    };
    let a = run();
    let b = run();
    let ok = a.status.success() && b.status.success() && a.stdout == b.stdout;
    verdict(
        ok && !a.stdout.is_empty(),
        format!("{} CSV bytes per run, identical: {}", a.stdout.len(), a.stdout == b.stdout),
    )
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path().join("corpus");
    let corpus = generate_corpus(CORPUS_SEED, CORPUS_SIZE, DENSITY);
    write_corpus(&dir, &corpus).expect("corpus written");
    let shaped = corpus
        .iter()
        .all(|(_, i)| i.objective.support().any(|p| !p.is_even()));
    assert!(shaped, "every corpus objective has a non-square support point");

    let solves = corpus_solves(&corpus);
    let results = [
        criterion_1(&dir),
        criterion_2(),
        criterion_3(&solves),
        criterion_4(),
        criterion_5(&solves),
        criterion_6(&corpus),
        criterion_7(&dir),
    ];
    let mut all = true;
    for (i, v) in results.iter().enumerate() {
        all &= v.pass;
        println!(
            "criterion {}: {} - {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
