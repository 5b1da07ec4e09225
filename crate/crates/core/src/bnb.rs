//! Spatial branch and bound with the relaxation as bounding oracle.
//!
//! Each node recomputes the bound constraints from its own box, keeping the
//! exponents chosen at the root, so only the radii `M_i` change. Those radii
//! only see `|x_i|`, so a box away from the origin gains little; a second
//! bound on the problem recentered at the box center, where the radius is
//! the half-width, is taken alongside and the node keeps the larger one.
//! Incumbents come from seeded sampling of each node box plus its corners
//! and center.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bound::{compute_bound, BoundOptions};
use crate::covers::ExponentStrategy;
use crate::poly::PopInstance;
use crate::solver::Status;

/// Widths at or below this are not split.
pub const MIN_WIDTH: f64 = 1e-9;
/// Corners are enumerated only up to this dimension.
const MAX_CORNER_DIM: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct BnbOptions {
    pub max_nodes: usize,
    pub gap_tol: f64,
    pub seed: u64,
    /// Nodes this deep are never split.
    pub depth_cap: usize,
    /// Random incumbent samples per node.
    pub samples: usize,
    /// Also bound each node in coordinates centered on its box.
    pub recenter: bool,
    pub bound: BoundOptions,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            max_nodes: 10_000,
            gap_tol: 1e-4,
            seed: 0,
            depth_cap: 60,
            samples: 200,
            recenter: true,
            bound: BoundOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbNode {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub parent_bound: f64,
    pub depth: usize,
}

impl BnbNode {
    pub fn root(inst: &PopInstance) -> Self {
        BnbNode {
            lower: inst.lower.clone(),
            upper: inst.upper.clone(),
            parent_bound: f64::NEG_INFINITY,
            depth: 0,
        }
    }
}

/// Bisects the widest coordinate; `None` when every width is at most [`MIN_WIDTH`].
pub fn branch(node: &BnbNode) -> Option<(BnbNode, BnbNode)> {
    let (i, w) = node
        .lower
        .iter()
        .zip(&node.upper)
        .map(|(l, u)| u - l)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, cur| {
            if cur.1 > best.1 {
                cur
            } else {
                best
            }
        });
    // NaN widths also stop here
    if w.is_nan() || w <= MIN_WIDTH {
        return None;
    }
    let mid = 0.5 * (node.lower[i] + node.upper[i]);
    let mut left = node.clone();
    let mut right = node.clone();
    left.upper[i] = mid;
    right.lower[i] = mid;
    left.depth += 1;
    right.depth += 1;
    Some((left, right))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BnbStatus {
    /// Gap closed to `gap_tol`.
    Converged,
    NodeLimit,
    /// No node left to split but the gap is still open.
    Exhausted,
}

impl BnbStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BnbStatus::Converged => "converged",
            BnbStatus::NodeLimit => "node-limit",
            BnbStatus::Exhausted => "exhausted",
        }
    }
}

impl fmt::Display for BnbStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodeLog {
    pub id: usize,
    pub depth: usize,
    /// Certified bound, NaN when the node failed.
    pub bound: f64,
    /// Certified bound from the original coordinates alone.
    pub plain_bound: f64,
    pub incumbent: f64,
    pub status: Status,
}

impl fmt::Display for NodeLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "node {} depth {} bound {} incumbent {} status {}",
            self.id, self.depth, self.bound, self.incumbent, self.status
        )
    }
}

/// A branching step where both parent and child were certified in the
/// original coordinates with the root exponents.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundPair {
    pub parent: f64,
    pub child: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BnbResult {
    pub status: BnbStatus,
    pub lower_bound: f64,
    /// `+inf` when no feasible sample was found.
    pub incumbent: f64,
    pub incumbent_point: Option<Vec<f64>>,
    pub nodes: usize,
    pub numerical_errors: usize,
    /// Bound-constraint exponents fixed at the root.
    pub exponents: Vec<u32>,
    pub log: Vec<NodeLog>,
    pub pairs: Vec<BoundPair>,
}

impl BnbResult {
    pub fn gap(&self) -> f64 {
        self.incumbent - self.lower_bound
    }
}

struct Open {
    node: BnbNode,
    /// Certified bound in the original coordinates, if any.
    plain: Option<f64>,
    /// Bound used for ordering and pruning (never below the parent's).
    bound: f64,
}

struct Search<'a> {
    inst: &'a PopInstance,
    opts: &'a BnbOptions,
    bound_opts: BoundOptions,
    rng: ChaCha8Rng,
    incumbent: f64,
    incumbent_point: Option<Vec<f64>>,
    log: Vec<NodeLog>,
    numerical_errors: usize,
}

impl Search<'_> {
    fn offer(&mut self, x: &[f64]) {
        if !self.inst.is_feasible(x, 1e-9) {
            return;
        }
        let v = self.inst.objective.evaluate(x);
        if v < self.incumbent {
            self.incumbent = v;
            self.incumbent_point = Some(x.to_vec());
        }
    }

    fn sample(&mut self, node: &BnbNode) {
        let n = node.lower.len();
        let mut x: Vec<f64> = node
            .lower
            .iter()
            .zip(&node.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect();
        self.offer(&x);
        if n <= MAX_CORNER_DIM {
            for mask in 0u32..(1 << n) {
                for (i, xi) in x.iter_mut().enumerate() {
                    *xi = if mask >> i & 1 == 1 {
                        node.upper[i]
                    } else {
                        node.lower[i]
                    };
                }
                self.offer(&x);
            }
        }
        for _ in 0..self.opts.samples {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = node.lower[i] + (node.upper[i] - node.lower[i]) * self.rng.gen::<f64>();
            }
            self.offer(&x);
        }
    }

    fn evaluate(&mut self, node: BnbNode) -> Open {
        let id = self.log.len();
        self.sample(&node);
        let Ok(sub) = self.inst.with_box(node.lower.clone(), node.upper.clone()) else {
            unreachable!("child boxes stay valid")
        };
        let rec = if self.opts.recenter {
            sub.recentered().ok()
        } else {
            None
        };
        let (status, own, plain) = if rec.as_ref().is_some_and(provably_infeasible) {
            (Status::Infeasible, Some(f64::INFINITY), None)
        } else {
            let out = compute_bound(&sub, &self.bound_opts);
            let (mut status, plain) = (out.status, out.gamma_certified());
            let mut own = plain;
            let shifted = rec
                .map(|r| compute_bound(&r, &self.opts.bound))
                .and_then(|o| o.gamma_certified());
            if let Some(b) = shifted {
                own = Some(own.map_or(b, |p| p.max(b)));
                status = Status::Optimal;
            }
            (status, own, plain)
        };
        if own.is_none() {
            self.numerical_errors += 1;
        }
        self.log.push(NodeLog {
            id,
            depth: node.depth,
            bound: own.unwrap_or(f64::NAN),
            plain_bound: plain.unwrap_or(f64::NAN),
            incumbent: self.incumbent,
            status,
        });
        let bound = own.map_or(node.parent_bound, |b| b.max(node.parent_bound));
        Open {
            node,
            plain,
            bound,
        }
    }
}

/// Some constraint is negative on the whole unit box: its constant plus the
/// absolute values of all other coefficients is below zero.
fn provably_infeasible(unit: &PopInstance) -> bool {
    unit.constraints.iter().any(|g| {
        let reach: f64 = g
            .terms()
            .filter(|(e, _)| !e.is_zero())
            .map(|(_, c)| c.abs())
            .sum();
        let top = g.constant_term() + reach;
        top < -1e-12 * (1.0 + reach)
    })
}

/// Best-first search; ties go to the deeper node, then the older one.
pub fn solve_bnb(inst: &PopInstance, opts: &BnbOptions) -> BnbResult {
    let mut search = Search {
        inst,
        opts,
        bound_opts: opts.bound.clone(),
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        incumbent: f64::INFINITY,
        incumbent_point: None,
        log: Vec::new(),
        numerical_errors: 0,
    };

    // fix the root exponents for every later node
    let exponents = if opts.bound.use_bound_constraints {
        let inner = crate::bound::vanilla_inner_terms(inst);
        crate::covers::select_bound_exponents(inst, &inner, &opts.bound.strategy).unwrap_or_default()
    } else {
        Vec::new()
    };
    if !exponents.is_empty() {
        search.bound_opts.strategy = ExponentStrategy::Fixed(exponents.clone());
    }

    let root = search.evaluate(BnbNode::root(inst));
    let mut open: Vec<(usize, Open)> = vec![(0, root)];
    let mut closed = f64::INFINITY;
    let mut pairs = Vec::new();
    let mut nodes = 1;

    let status = loop {
        let lb = open.iter().map(|(_, o)| o.bound).fold(closed, f64::min);
        if search.incumbent - lb <= opts.gap_tol {
            break BnbStatus::Converged;
        }
        if open.is_empty() {
            // every box was pruned as infeasible
            if lb == f64::INFINITY {
                break BnbStatus::Converged;
            }
            break BnbStatus::Exhausted;
        }
        let pick = (0..open.len())
            .min_by(|&a, &b| {
                let (ia, oa) = &open[a];
                let (ib, ob) = &open[b];
                oa.bound
                    .total_cmp(&ob.bound)
                    .then(ob.node.depth.cmp(&oa.node.depth))
                    .then(ia.cmp(ib))
            })
            .expect("open is nonempty");
        let (id, cur) = open.swap_remove(pick);
        if cur.bound >= search.incumbent - opts.gap_tol || cur.node.depth >= opts.depth_cap {
            closed = closed.min(cur.bound);
            continue;
        }
        let Some((mut left, mut right)) = branch(&cur.node) else {
            closed = closed.min(cur.bound);
            continue;
        };
        if nodes + 2 > opts.max_nodes {
            open.push((id, cur));
            break BnbStatus::NodeLimit;
        }
        left.parent_bound = cur.bound;
        right.parent_bound = cur.bound;
        for child in [left, right] {
            let child_id = search.log.len();
            let ev = search.evaluate(child);
            nodes += 1;
            if let (Some(p), Some(c)) = (cur.plain, ev.plain) {
                pairs.push(BoundPair {
                    parent: p,
                    child: c,
                });
            }
            open.push((child_id, ev));
        }
    };

    let lb = open.iter().map(|(_, o)| o.bound).fold(closed, f64::min);
    BnbResult {
        status,
        lower_bound: lb.min(search.incumbent),
        incumbent: search.incumbent,
        incumbent_point: search.incumbent_point,
        nodes,
        numerical_errors: search.numerical_errors,
        exponents,
        log: search.log,
        pairs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Exponent, Polynomial};

    fn node(l: &[f64], u: &[f64]) -> BnbNode {
        BnbNode {
            lower: l.to_vec(),
            upper: u.to_vec(),
            parent_bound: -1.0,
            depth: 0,
        }
    }

    fn univariate(terms: &[(u32, f64)], l: f64, u: f64) -> PopInstance {
        let f = Polynomial::from_terms(1, terms.iter().map(|&(e, c)| (Exponent::new(vec![e]), c)))
            .unwrap();
        PopInstance::new(f, vec![], vec![l], vec![u]).unwrap()
    }

    #[test]
    fn branch_widest() {
        let (a, b) = branch(&node(&[-1.0, 0.0], &[2.0, 1.0])).unwrap();
        assert_eq!((a.lower, a.upper), (vec![-1.0, 0.0], vec![0.5, 1.0]));
        assert_eq!((b.lower, b.upper), (vec![0.5, 0.0], vec![2.0, 1.0]));
        assert_eq!(a.parent_bound, -1.0);
        assert_eq!(b.depth, 1);

        let (a, b) = branch(&node(&[0.0], &[1.0])).unwrap();
        assert_eq!((a.upper[0], b.lower[0]), (0.5, 0.5));
        assert!(branch(&node(&[1.0], &[1.0])).is_none());
    }

    #[test]
    fn min_minus_x_squared_closes_at_root() {
        let r = solve_bnb(&univariate(&[(2, -1.0)], -1.0, 2.0), &BnbOptions::default());
        assert_eq!(r.status, BnbStatus::Converged);
        assert_eq!(r.nodes, 1);
        assert_eq!(r.incumbent, -4.0);
        assert!(r.gap() <= 1e-6, "{}", r.gap());
    }

    #[test]
    fn min_minus_x_closes_at_root() {
        let r = solve_bnb(&univariate(&[(1, -1.0)], -1.0, 2.0), &BnbOptions::default());
        assert_eq!(r.nodes, 1);
        assert_eq!(r.incumbent_point, Some(vec![2.0]));
        assert!((r.lower_bound + 2.0).abs() < 1e-6);
    }

    #[test]
    fn node_cap() {
        // x^4 - 3x^2 + x: root relaxation leaves a gap
        let inst = univariate(&[(4, 1.0), (2, -3.0), (1, 1.0)], -2.0, 2.0);
        let opts = BnbOptions {
            max_nodes: 1,
            ..Default::default()
        };
        let r = solve_bnb(&inst, &opts);
        assert_eq!(r.status, BnbStatus::NodeLimit);
        assert_eq!(r.nodes, 1);
        assert!(r.gap() > 0.0);
        assert!(r.lower_bound <= r.incumbent);
    }

    #[test]
    fn search_narrows_gap() {
        let inst = univariate(&[(4, 1.0), (2, -3.0), (1, 1.0)], -2.0, 2.0);
        let r = solve_bnb(&inst, &BnbOptions::default());
        assert_eq!(r.status, BnbStatus::Converged, "{:?}", r.log.last());
        assert!(r.lower_bound <= r.incumbent);
        for p in &r.pairs {
            assert!(p.child >= p.parent - 1e-7, "{p:?}");
        }
        assert!(r.log[0].to_string().starts_with("node 0 depth 0 bound "));
    }
}
