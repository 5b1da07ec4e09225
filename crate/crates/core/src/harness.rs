//! Random instance generation and the batch runner behind the status table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bound::{compute_bound, BoundOptions};
use crate::error::Result;
use crate::poly::{Exponent, Polynomial, PopInstance};
use crate::solver::Status;

pub const CSV_HEADER: &str = "instance,config,status,gamma_solver,gamma_certified,seconds";

/// Coefficients are drawn from `[-2, 2]` outside `(-MIN_COEFF, MIN_COEFF)`.
const MIN_COEFF: f64 = 1e-3;
/// Box center slack of every generated constraint.
const CENTER_SLACK: f64 = 0.1;

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let c = rng.gen_range(-2.0..=2.0);
        if f64::abs(c) >= MIN_COEFF {
            return c;
        }
    }
}

/// All exponents in `n` variables of total degree at most `d`, in lexicographic order.
fn monomials(n: usize, d: u32) -> Vec<Exponent> {
    fn rec(n: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Exponent>) {
        if cur.len() == n {
            out.push(Exponent::new(cur.clone()));
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

fn random_poly(
    rng: &mut ChaCha8Rng,
    n: usize,
    d: u32,
    density: f64,
) -> BTreeMap<Exponent, f64> {
    let mut terms = BTreeMap::new();
    for e in monomials(n, d) {
        if rng.gen::<f64>() < density {
            terms.insert(e, coefficient(rng));
        }
    }
    terms
}

/// A top-degree exponent with at least one odd entry.
fn forced_odd_term(rng: &mut ChaCha8Rng, n: usize, d: u32) -> Exponent {
    let i = rng.gen_range(0..n);
    let mut e = vec![0; n];
    if d % 2 == 1 {
        e[i] = d;
    } else if n == 1 {
        e[i] = d - 1;
    } else {
        let j = (i + rng.gen_range(1..n)) % n;
        e[i] = d - 1;
        e[j] = 1;
    }
    Exponent::new(e)
}

/// Deterministic random instance. The objective always contains a
/// top-degree term with an odd exponent entry, and every constraint is
/// satisfied with slack at least 0.1 at the box center.
pub fn generate_instance(seed: u64, n: usize, m: usize, max_degree: u32, density: f64) -> PopInstance {
    assert!(n >= 1 && max_degree >= 1, "need n >= 1 and max_degree >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut obj = random_poly(&mut rng, n, max_degree, density);
    let forced = forced_odd_term(&mut rng, n, max_degree);
    let c = coefficient(&mut rng);
    obj.insert(forced, c);

    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..=0.0)).collect();
    let upper: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..=3.0)).collect();
    let center: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| 0.5 * (l + u)).collect();

    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let mut g = random_poly(&mut rng, n, max_degree, density);
        let zero = Exponent::zeros(n);
        g.remove(&zero);
        let rest: f64 = g.iter().map(|(e, c)| c * e.monomial(&center)).sum();
        let mut constant = coefficient(&mut rng).max(CENTER_SLACK - rest);
        if constant.abs() < MIN_COEFF {
            constant = MIN_COEFF;
        }
        g.insert(zero, constant);
        constraints.push(Polynomial::from_terms(n, g).expect("generated terms are valid"));
    }
    let objective = Polynomial::from_terms(n, obj).expect("generated terms are valid");
    PopInstance::new(objective, constraints, lower, upper).expect("generated box is valid")
}

/// Shape of the `k`-th corpus instance: `(n, m, max_degree)`.
pub fn corpus_shape(k: usize) -> (usize, usize, u32) {
    let n = 1 + k % 3;
    let d = 3 + (k / 3 % 4) as u32;
    let m = k / 12 % 2;
    (n, m, d)
}

/// `count` instances cycling through `n` in 1..=3, degree in 3..=6 and 0 or 1 constraints.
pub fn generate_corpus(seed: u64, count: usize, density: f64) -> Vec<(String, PopInstance)> {
    (0..count)
        .map(|k| {
            let (n, m, d) = corpus_shape(k);
            let s = seed.wrapping_mul(1_000_003).wrapping_add(k as u64);
            (format!("inst_{k:04}.json"), generate_instance(s, n, m, d, density))
        })
        .collect()
}

/// Writes a corpus as one JSON file per instance.
pub fn write_corpus(dir: &Path, corpus: &[(String, PopInstance)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, inst) in corpus {
        std::fs::write(dir.join(name), inst.to_json())?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Config {
    WithBounds,
    WithoutBounds,
}

impl Config {
    pub const ALL: [Config; 2] = [Config::WithBounds, Config::WithoutBounds];

    pub fn as_str(self) -> &'static str {
        match self {
            Config::WithBounds => "with-bcs",
            Config::WithoutBounds => "without-bcs",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Config::WithBounds => "With BndConss",
            Config::WithoutBounds => "Without BndConss",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchRow {
    pub instance: String,
    pub config: Config,
    pub status: Status,
    pub gamma_solver: Option<f64>,
    pub gamma_certified: Option<f64>,
    pub seconds: f64,
    pub message: Option<String>,
}

/// Status counts for each configuration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatusTable {
    pub counts: BTreeMap<Config, BTreeMap<Status, usize>>,
}

impl StatusTable {
    pub fn from_rows(rows: &[BatchRow]) -> Self {
        let mut t = StatusTable::default();
        for c in Config::ALL {
            t.counts
                .insert(c, Status::ALL.iter().map(|&s| (s, 0)).collect());
        }
        for r in rows {
            *t.counts.get_mut(&r.config).unwrap().get_mut(&r.status).unwrap() += 1;
        }
        t
    }

    pub fn count(&self, config: Config, status: Status) -> usize {
        self.counts
            .get(&config)
            .and_then(|m| m.get(&status))
            .copied()
            .unwrap_or(0)
    }

    pub fn total(&self, config: Config) -> usize {
        self.counts.get(&config).map_or(0, |m| m.values().sum())
    }

    /// Percentage of instances with a finite certified bound.
    pub fn finite_percentage(&self, config: Config) -> Option<f64> {
        let total = self.total(config);
        (total > 0).then(|| 100.0 * self.count(config, Status::Optimal) as f64 / total as f64)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<18}", "");
        for st in Status::ALL {
            let _ = write!(s, " {:>17}", st.as_str());
        }
        let _ = writeln!(s, " {:>13}", "finite bound");
        for c in Config::ALL {
            let _ = write!(s, "{:<18}", c.label());
            for st in Status::ALL {
                let _ = write!(s, " {:>17}", self.count(c, st));
            }
            match self.finite_percentage(c) {
                Some(p) => {
                    let _ = writeln!(s, " {:>12.1}%", p);
                }
                None => {
                    let _ = writeln!(s, " {:>13}", "-");
                }
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchOptions {
    /// Settings for the with-bcs run; the other run only drops bound constraints.
    pub bound: BoundOptions,
    pub jobs: usize,
    /// Write measured times; otherwise the seconds column reads `NA`.
    pub timings: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            bound: BoundOptions::default(),
            jobs: 1,
            timings: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatchReport {
    pub rows: Vec<BatchRow>,
    pub table: StatusTable,
    pub timings: bool,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BatchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let secs = if self.timings {
                format!("{:.6}", r.seconds)
            } else {
                "NA".to_string()
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.instance,
                r.config.as_str(),
                r.status,
                fmt_opt(r.gamma_solver),
                fmt_opt(r.gamma_certified),
                secs
            );
        }
        s
    }
}

fn solve_file(path: &Path, name: &str, opts: &BatchOptions) -> Vec<BatchRow> {
    let inst = std::fs::read_to_string(path)
        .map_err(crate::error::Error::from)
        .and_then(|t| PopInstance::from_json(&t));
    Config::ALL
        .iter()
        .map(|&config| {
            let start = Instant::now();
            let mut row = BatchRow {
                instance: name.to_string(),
                config,
                status: Status::NumericalError,
                gamma_solver: None,
                gamma_certified: None,
                seconds: 0.0,
                message: None,
            };
            match &inst {
                Ok(inst) => {
                    let bo = BoundOptions {
                        use_bound_constraints: config == Config::WithBounds,
                        ..opts.bound.clone()
                    };
                    let out = compute_bound(inst, &bo);
                    row.status = out.status;
                    row.gamma_certified = out.gamma_certified();
                    row.gamma_solver = out.gamma_solver;
                    row.message = out.message;
                }
                Err(e) => row.message = Some(e.to_string()),
            }
            row.seconds = start.elapsed().as_secs_f64();
            row
        })
        .collect()
}

/// Instance files (`*.json`) in `dir`, sorted by name.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

/// Solves every instance in `dir` with and without bound constraints.
/// Instances that fail to load are recorded as numerical errors.
pub fn run_batch(dir: &Path, opts: &BatchOptions) -> Result<BatchReport> {
    let files = instance_files(dir)?;
    let next = AtomicUsize::new(0);
    let jobs = opts.jobs.max(1).min(files.len().max(1));
    let mut done: Vec<(usize, Vec<BatchRow>)> = std::thread::scope(|s| {
        let workers: Vec<_> = (0..jobs)
            .map(|_| {
                s.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let k = next.fetch_add(1, Ordering::Relaxed);
                        let Some(path) = files.get(k) else { break };
                        let name = path
                            .file_name()
                            .map(|n| n.to_string_lossy().into_owned())
                            .unwrap_or_default();
                        out.push((k, solve_file(path, &name, opts)));
                    }
                    out
                })
            })
            .collect();
        workers
            .into_iter()
            .flat_map(|w| w.join().expect("batch worker panicked"))
            .collect()
    });
    done.sort_by_key(|(k, _)| *k);
    let rows: Vec<BatchRow> = done.into_iter().flat_map(|(_, r)| r).collect();
    Ok(BatchReport {
        table: StatusTable::from_rows(&rows),
        rows,
        timings: opts.timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(
            generate_instance(11, 2, 1, 5, 0.3),
            generate_instance(11, 2, 1, 5, 0.3)
        );
        assert_ne!(
            generate_instance(11, 2, 1, 5, 0.3),
            generate_instance(12, 2, 1, 5, 0.3)
        );
    }

    #[test]
    fn generated_instances_have_odd_terms_and_feasible_center() {
        for seed in 0..50 {
            let (n, m, d) = corpus_shape(seed as usize);
            let inst = generate_instance(seed, n, m.max(1), d, 0.3);
            assert!(inst.objective.support().any(|e| !e.is_even()));
            assert!(inst
                .objective
                .terms()
                .all(|(_, c)| (MIN_COEFF..=2.0).contains(&c.abs())));
            let center: Vec<f64> = inst
                .lower
                .iter()
                .zip(&inst.upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect();
            for g in &inst.constraints {
                assert!(g.evaluate(&center) >= CENTER_SLACK - 1e-12);
            }
            for i in 0..n {
                assert!((-3.0..=0.0).contains(&inst.lower[i]));
                assert!((0.0..=3.0).contains(&inst.upper[i]));
            }
        }
    }

    #[test]
    fn forced_term_has_top_degree() {
        let inst = generate_instance(3, 2, 0, 6, 0.0);
        assert_eq!(inst.objective.len(), 1);
        let (e, _) = inst.objective.terms().next().unwrap();
        assert_eq!(e.degree(), 6);
        assert!(!e.is_even());
        let inst = generate_instance(3, 1, 0, 4, 0.0);
        assert_eq!(inst.objective.terms().next().unwrap().0.entries(), &[3]);
    }

    #[test]
    fn monomial_count() {
        // C(n + d, n)
        assert_eq!(monomials(3, 6).len(), 84);
        assert_eq!(monomials(1, 3).len(), 4);
    }

    #[test]
    fn empty_table() {
        let t = StatusTable::from_rows(&[]);
        assert_eq!(t.total(Config::WithBounds), 0);
        assert_eq!(t.finite_percentage(Config::WithBounds), None);
        assert!(t.to_text().contains("With BndConss"));
    }
}
