//! Connected components of a Milnor fiber, estimated by sampling and joining
//! sampled points with in-fiber paths, together with the exact cyclic-cover
//! model of the gcd criterion.
//!
//! A join between `q` and `p` follows the deformation argument: an ambient
//! path in the tube `∂E(r₀, δ)` from `q` to `p`, closed up with a correcting
//! loop so that its total winding is zero, is pushed into the fiber by the
//! characteristic maps `h_{−ψ(t)}`. The correcting loop is realised by the
//! monodromy flow, so it returns to `p` only when `h^m(p) = p`; joins whose
//! deformed endpoint is not `p` are discarded rather than recorded.
//!
//! Missing joins can only split classes, so the reported component count is
//! an upper bound on the true count.

use std::collections::{HashMap, HashSet};
use std::f64::consts::{FRAC_PI_4, PI, TAU};

use num_complex::Complex64;
use num_integer::Integer;
use petgraph::unionfind::UnionFind;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fiber::{
    correcting_loop, deform_node, deform_path_to_fiber, distance, find_fiber_point,
    norm, project_to_tube, FiberError, FiberPoint, FibrationConfig, SampledPath,
};
use crate::mixedpoly::MixedPolynomial;
use crate::rng::{pair_stream, stream_rng, uniform_in_ball};

pub const CAVEAT: &str = "upper bound";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectivityError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error("only {found} distinct fiber points found; the fiber may be empty at this delta")]
    TooFewPoints { found: usize },
    #[error("need at least 2 sample points, got {0}")]
    SampleSize(usize),
    #[error("multiplicities must be non-empty and positive")]
    InvalidMultiplicities,
    #[error("{factors} factors but {multiplicities} multiplicities")]
    LengthMismatch { factors: usize, multiplicities: usize },
    #[error("factor {0} is not holomorphic")]
    NotHolomorphic(usize),
}

/// Tuning knobs for sampling and path joining.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectOptions {
    /// Neighbours per point in the candidate graph.
    pub k: usize,
    /// Points closer than this are merged; `None` means `1e-4 · r0`.
    pub dedup_radius: Option<f64>,
    /// Extra attempts per pair, the `a`-th using `a` random waypoints.
    pub retries: usize,
    /// Largest allowed distance between consecutive path nodes; `None` means `0.02 · r0`.
    pub resolution: Option<f64>,
    pub max_nodes: usize,
    /// Seeds tried per requested sample point before giving up.
    pub seed_budget_factor: usize,
    /// Endpoint agreement required for a join to count.
    pub endpoint_tol: f64,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            k: 6,
            dedup_radius: None,
            retries: 3,
            resolution: None,
            max_nodes: 2048,
            seed_budget_factor: 20,
            endpoint_tol: 1e-8,
        }
    }
}

impl ConnectOptions {
    fn dedup(&self, cfg: &FibrationConfig) -> f64 {
        self.dedup_radius.unwrap_or(1e-4 * cfg.r0)
    }

    fn resolution(&self, cfg: &FibrationConfig) -> f64 {
        self.resolution.unwrap_or(0.02 * cfg.r0)
    }
}

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

/// Halton points of `[−R, R]^{2n}` with a seeded Cranley–Patterson shift,
/// keeping those inside the ball of radius `R`.
fn halton_ball_seeds(n: usize, radius: f64, seed: u64) -> impl Iterator<Item = Vec<Complex64>> {
    let mut rng = stream_rng(seed, u64::MAX);
    let shift: Vec<f64> = (0..2 * n).map(|_| rng.gen::<f64>()).collect();
    (1u64..).filter_map(move |i| {
        let x: Vec<f64> = (0..2 * n)
            .map(|d| {
                let u = (radical_inverse(i, PRIMES[d % PRIMES.len()]) + shift[d]).fract();
                radius * (2.0 * u - 1.0)
            })
            .collect();
        let z: Vec<Complex64> = x.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        (norm(&z) <= radius).then_some(z)
    })
}

/// `count` distinct points of `F_0 = f⁻¹(δ) ∩ B`, found by Gauss–Newton from
/// quasi-random seeds in the working ball. Failed seeds are skipped; points
/// within the dedup radius of an earlier point are merged into it.
pub fn sample_fiber(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    count: usize,
    seed: u64,
    opts: &ConnectOptions,
) -> Result<Vec<FiberPoint>, ConnectivityError> {
    if count < 2 {
        return Err(ConnectivityError::SampleSize(count));
    }
    cfg.validate()?;
    if f.is_constant() {
        return Err(FiberError::ConstantPolynomial.into());
    }
    let target = Complex64::new(cfg.delta, 0.0);
    let dedup = opts.dedup(cfg);
    let budget = opts.seed_budget_factor.max(1) * count;
    let mut seeds = halton_ball_seeds(f.n(), cfg.working_radius(), seed);
    let mut points: Vec<FiberPoint> = Vec::with_capacity(count);
    let mut used = 0;
    while used < budget && points.len() < count {
        let batch: Vec<Vec<Complex64>> = seeds.by_ref().take(64.min(budget - used)).collect();
        used += batch.len();
        let found: Vec<Option<FiberPoint>> = batch
            .par_iter()
            .map(|s| find_fiber_point(f, target, cfg, s).ok())
            .collect();
        for p in found.into_iter().flatten() {
            if points.len() == count {
                break;
            }
            if points.iter().all(|q| distance(&q.z, &p.z) >= dedup) {
                points.push(p);
            }
        }
    }
    if points.len() < 2 {
        return Err(ConnectivityError::TooFewPoints { found: points.len() });
    }
    Ok(points)
}

/// Joins `q` to `p` inside their common fiber along the straight segment,
/// returning the deformed path from `q` to `p`, or `None` when any step fails.
/// `None` is not evidence of disconnection.
pub fn connect_attempt(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    q: &FiberPoint,
    p: &FiberPoint,
) -> Option<SampledPath> {
    connect_via(f, cfg, q, p, &[], &ConnectOptions::default())
}

/// [`connect_attempt`] along the polyline `q → waypoints… → p`.
pub fn connect_via(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    q: &FiberPoint,
    p: &FiberPoint,
    waypoints: &[Vec<Complex64>],
    opts: &ConnectOptions,
) -> Option<SampledPath> {
    connect_cached(f, cfg, q, p, waypoints, opts, &mut HashMap::new())
}

/// Correcting loops at `p` by winding, `None` where the loop does not return to `p`.
type LoopCache = HashMap<i64, Option<SampledPath>>;

fn connect_cached(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    q: &FiberPoint,
    p: &FiberPoint,
    waypoints: &[Vec<Complex64>],
    opts: &ConnectOptions,
    loops: &mut LoopCache,
) -> Option<SampledPath> {
    if (q.target - p.target).norm() > cfg.tol_fiber || q.z.len() != f.n() || p.z.len() != f.n() {
        return None;
    }
    if q.z == p.z {
        return SampledPath::constant(f, q.z.clone()).ok();
    }
    let mut corners = vec![q.z.clone()];
    corners.extend(waypoints.iter().cloned());
    corners.push(p.z.clone());
    let resolution = opts.resolution(cfg);
    let ambient = Ambient { f, cfg, corners: &corners };

    let (mut params, mut nodes) = ambient.refine_initial(resolution, opts.max_nodes)?;
    let sigma = SampledPath::from_nodes(f, nodes.clone()).ok()?;
    let winding = crate::fiber::rotation_number_with_tol(f, &sigma, 1e-3).ok()?;

    let mut omega_nodes = Vec::new();
    if winding != 0 {
        let omega = loops
            .entry(winding)
            .or_insert_with(|| {
                correcting_loop(f, p, winding, cfg)
                    .ok()
                    .filter(|w| distance(w.last(), &p.z) <= opts.endpoint_tol)
            })
            .as_ref()?;
        let stride = ((PI / 16.0) / cfg.ode_step).ceil().max(1.0) as usize;
        let last = omega.len() - 1;
        omega_nodes = (stride..last).step_by(stride).chain([last]).map(|k| omega.nodes[k].clone()).collect();
    }

    let mut all = nodes.clone();
    all.extend(omega_nodes.iter().cloned());
    let composite = SampledPath::from_nodes(f, all).ok()?;
    let deformed = deform_path_to_fiber(f, &composite, cfg).ok()?;
    let base = f.evaluate(&q.z).ok()?.arg();

    // Refine the ambient segment wherever consecutive deformed nodes are far apart.
    let seg = nodes.len();
    let mut psi: Vec<f64> = composite.psi[..seg].to_vec();
    let mut out: Vec<Vec<Complex64>> = deformed.nodes[..seg].to_vec();
    loop {
        let wide: Vec<usize> = (0..out.len() - 1)
            .filter(|&k| distance(&out[k], &out[k + 1]) > resolution)
            .collect();
        if wide.is_empty() {
            break;
        }
        if out.len() + wide.len() > opts.max_nodes {
            return None;
        }
        let inserted: Vec<Option<(f64, Vec<Complex64>, f64, Vec<Complex64>)>> = wide
            .par_iter()
            .map(|&k| {
                let s = 0.5 * (params[k] + params[k + 1]);
                let z = ambient.node(s).ok()?;
                let v = f.eval_unchecked(&z);
                let inc = (v / f.eval_unchecked(&nodes[k])).arg();
                if inc.abs() >= FRAC_PI_4 {
                    return None;
                }
                let ps = psi[k] + inc;
                let d = deform_node(f, &z, base, ps, cfg).ok()?;
                Some((s, z, ps, d))
            })
            .collect();
        for (k, ins) in wide.iter().zip(inserted).rev() {
            let (s, z, ps, d) = ins?;
            params.insert(k + 1, s);
            nodes.insert(k + 1, z);
            psi.insert(k + 1, ps);
            out.insert(k + 1, d);
        }
    }
    out.extend(deformed.nodes[seg..].iter().cloned());
    let path = SampledPath::from_nodes(f, out).ok()?;
    if distance(path.first(), &q.z) > opts.endpoint_tol || distance(path.last(), &p.z) > opts.endpoint_tol {
        return None;
    }
    if path.angle_spread(f).ok()? > cfg.tol_angle {
        return None;
    }
    Some(path)
}

/// The polyline through `corners`, pushed onto the tube `|f| = δ`.
struct Ambient<'a> {
    f: &'a MixedPolynomial,
    cfg: &'a FibrationConfig,
    corners: &'a [Vec<Complex64>],
}

impl Ambient<'_> {
    fn straight(&self, s: f64) -> Vec<Complex64> {
        let legs = self.corners.len() - 1;
        let x = (s * legs as f64).clamp(0.0, legs as f64);
        let i = (x.floor() as usize).min(legs - 1);
        let t = x - i as f64;
        self.corners[i]
            .iter()
            .zip(&self.corners[i + 1])
            .map(|(a, b)| a + (b - a) * t)
            .collect()
    }

    fn node(&self, s: f64) -> Result<Vec<Complex64>, FiberError> {
        if s == 0.0 {
            return Ok(self.corners[0].clone());
        }
        if s == 1.0 {
            return Ok(self.corners.last().expect("two corners").clone());
        }
        project_to_tube(self.f, &self.straight(s), self.cfg).map(|p| p.z)
    }

    /// Samples until consecutive nodes are within `resolution` and `arg f`
    /// moves less than π/4 between them.
    fn refine_initial(&self, resolution: f64, max_nodes: usize) -> Option<(Vec<f64>, Vec<Vec<Complex64>>)> {
        let start = 8 * (self.corners.len() - 1);
        let mut params: Vec<f64> = (0..=start).map(|k| k as f64 / start as f64).collect();
        let mut nodes: Vec<Vec<Complex64>> =
            params.par_iter().map(|&s| self.node(s)).collect::<Result<_, _>>().ok()?;
        loop {
            let wide: Vec<usize> = (0..nodes.len() - 1)
                .filter(|&k| {
                    let inc = (self.f.eval_unchecked(&nodes[k + 1]) / self.f.eval_unchecked(&nodes[k])).arg();
                    distance(&nodes[k], &nodes[k + 1]) > resolution || inc.abs() >= FRAC_PI_4
                })
                .collect();
            if wide.is_empty() {
                return Some((params, nodes));
            }
            if nodes.len() + wide.len() > max_nodes {
                return None;
            }
            let mids: Vec<f64> = wide.iter().map(|&k| 0.5 * (params[k] + params[k + 1])).collect();
            let new: Vec<Vec<Complex64>> =
                mids.par_iter().map(|&s| self.node(s)).collect::<Result<_, _>>().ok()?;
            for ((k, s), z) in wide.iter().zip(mids).zip(new).rev() {
                params.insert(k + 1, s);
                nodes.insert(k + 1, z);
            }
        }
    }
}

/// A successful join between sample points `a` and `b`, with its evidence path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub path: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentReport {
    pub points: Vec<FiberPoint>,
    pub edges: Vec<Edge>,
    pub paths: Vec<SampledPath>,
    /// Component label of every point, numbered by first appearance.
    pub labels: Vec<usize>,
    pub component_count: usize,
    /// Sizes in decreasing order.
    pub component_sizes: Vec<usize>,
    /// Pairs for which a join was attempted.
    pub attempted_pairs: usize,
}

impl ComponentReport {
    /// Re-checks every evidence path: endpoints at its edge's points and
    /// angle spread of `f` within `tol_angle`.
    pub fn validate(&self, f: &MixedPolynomial, cfg: &FibrationConfig, endpoint_tol: f64) -> bool {
        self.edges.iter().all(|e| {
            let path = &self.paths[e.path];
            distance(path.first(), &self.points[e.a].z) <= endpoint_tol
                && distance(path.last(), &self.points[e.b].z) <= endpoint_tol
                && path.angle_spread(f).map_or(false, |s| s <= cfg.tol_angle)
        })
    }

    /// Number of union-find classes induced by the edges.
    pub fn recount(&self) -> usize {
        let mut uf = UnionFind::new(self.points.len());
        for e in &self.edges {
            uf.union(e.a, e.b);
        }
        let mut roots: Vec<usize> = (0..self.points.len()).map(|i| uf.find(i)).collect();
        roots.sort_unstable();
        roots.dedup();
        roots.len()
    }
}

fn knn_pairs(points: &[FiberPoint], k: usize) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        let mut d: Vec<(f64, usize)> =
            (0..n).filter(|&j| j != i).map(|j| (distance(&points[i].z, &points[j].z), j)).collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(dist, j) in d.iter().take(k) {
            pairs.push((dist, i.min(j), i.max(j)));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    pairs.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
    pairs.into_iter().map(|(_, i, j)| (i, j)).collect()
}

fn random_pairs(n: usize, budget: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = stream_rng(seed, u64::MAX - 1);
    let mut out = Vec::with_capacity(budget);
    while out.len() < budget && n >= 2 {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            out.push((i.min(j), i.max(j)));
        }
    }
    out
}

/// Attempts a join with up to `retries` perturbed polylines after the straight one.
fn join_pair(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    points: &[FiberPoint],
    (i, j): (usize, usize),
    seed: u64,
    opts: &ConnectOptions,
) -> Option<SampledPath> {
    let (q, p) = (&points[i], &points[j]);
    let mut loops = LoopCache::new();
    if let Some(path) = connect_cached(f, cfg, q, p, &[], opts, &mut loops) {
        return Some(path);
    }
    let len = distance(&q.z, &p.z);
    let limit = 0.9 * cfg.working_radius();
    for attempt in 1..=opts.retries {
        let mut rng = stream_rng(seed, pair_stream((i * points.len() + j) as u64, attempt as u64));
        let waypoints: Vec<Vec<Complex64>> = (1..=attempt)
            .map(|w| {
                let t = w as f64 / (attempt + 1) as f64;
                let bump = uniform_in_ball(&mut rng, f.n(), 0.5 * len);
                let mut z: Vec<Complex64> =
                    q.z.iter().zip(&p.z).zip(bump).map(|((a, b), e)| a + (b - a) * t + e).collect();
                let nz = norm(&z);
                if nz > limit {
                    z.iter_mut().for_each(|c| *c *= limit / nz);
                }
                z
            })
            .collect();
        if let Some(path) = connect_cached(f, cfg, q, p, &waypoints, opts, &mut loops) {
            return Some(path);
        }
    }
    None
}

const PAIR_BATCH: usize = 16;
const COMPLETION_PAIRS: usize = 8;

struct Joiner<'a> {
    f: &'a MixedPolynomial,
    cfg: &'a FibrationConfig,
    points: &'a [FiberPoint],
    seed: u64,
    opts: &'a ConnectOptions,
    uf: UnionFind<usize>,
    tried: HashSet<(usize, usize)>,
    edges: Vec<Edge>,
    paths: Vec<SampledPath>,
}

impl Joiner<'_> {
    /// Attempts the untried pairs of `candidates` not already in one class,
    /// in fixed-size batches; returns the number of successful joins.
    fn run(&mut self, candidates: &[(usize, usize)]) -> usize {
        let mut joined = 0;
        let mut cursor = 0;
        while cursor < candidates.len() {
            let mut batch = Vec::with_capacity(PAIR_BATCH);
            while cursor < candidates.len() && batch.len() < PAIR_BATCH {
                let (i, j) = candidates[cursor];
                cursor += 1;
                if !self.uf.equiv(i, j) && self.tried.insert((i, j)) {
                    batch.push((i, j));
                }
            }
            let results: Vec<Option<SampledPath>> = batch
                .par_iter()
                .map(|&pair| join_pair(self.f, self.cfg, self.points, pair, self.seed, self.opts))
                .collect();
            for (&(i, j), r) in batch.iter().zip(results) {
                if let Some(path) = r {
                    self.uf.union(i, j);
                    self.edges.push(Edge { a: i, b: j, path: self.paths.len() });
                    self.paths.push(path);
                    joined += 1;
                }
            }
        }
        joined
    }

    /// For each class except the largest, its closest untried pairs to
    /// points outside it.
    fn completion_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.points.len();
        let roots: Vec<usize> = (0..n).map(|i| self.uf.find(i)).collect();
        let mut sizes = std::collections::BTreeMap::new();
        for &r in &roots {
            *sizes.entry(r).or_insert(0usize) += 1;
        }
        let largest = sizes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(&r, _)| r);
        let mut out = Vec::new();
        for &root in sizes.keys().filter(|&&r| Some(r) != largest) {
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for i in (0..n).filter(|&i| roots[i] == root) {
                for j in (0..n).filter(|&j| roots[j] != root) {
                    let key = (i.min(j), i.max(j));
                    if !self.tried.contains(&key) {
                        pairs.push((distance(&self.points[i].z, &self.points[j].z), key.0, key.1));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
            out.extend(pairs.into_iter().take(COMPLETION_PAIRS).map(|(_, i, j)| (i, j)));
        }
        out
    }
}

/// Samples `count` fiber points and joins them along a k-nearest-neighbour
/// graph plus `budget` random long-range pairs. Pairs already in one class
/// are skipped; pairs are processed in fixed-size batches so the report is
/// reproducible for a given seed.
pub fn component_report(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    count: usize,
    budget: usize,
    seed: u64,
    opts: &ConnectOptions,
) -> Result<ComponentReport, ConnectivityError> {
    let points = sample_fiber(f, cfg, count, seed, opts)?;
    Ok(join_points(f, cfg, points, budget, seed, opts))
}

/// The joining stage of [`component_report`] for given points.
pub fn join_points(
    f: &MixedPolynomial,
    cfg: &FibrationConfig,
    points: Vec<FiberPoint>,
    budget: usize,
    seed: u64,
    opts: &ConnectOptions,
) -> ComponentReport {
    let n = points.len();
    let mut candidates = knn_pairs(&points, opts.k);
    candidates.extend(random_pairs(n, budget, seed));
    let mut joiner = Joiner {
        f,
        cfg,
        points: &points,
        seed,
        opts,
        uf: UnionFind::new(n),
        tried: HashSet::new(),
        edges: Vec::new(),
        paths: Vec::new(),
    };
    joiner.run(&candidates);
    // Neighbours of a point often all lie in other components; let every
    // component but the largest also try its closest outside points.
    loop {
        let extra = joiner.completion_pairs();
        if extra.is_empty() || joiner.run(&extra) == 0 {
            break;
        }
    }
    let Joiner { uf, edges, paths, tried, .. } = joiner;
    let attempted = tried.len();
    let mut labels = vec![usize::MAX; n];
    let mut root_label = std::collections::HashMap::new();
    for (i, label) in labels.iter_mut().enumerate() {
        let next = root_label.len();
        *label = *root_label.entry(uf.find(i)).or_insert(next);
    }
    let component_count = root_label.len();
    let mut component_sizes = vec![0; component_count];
    for &l in &labels {
        component_sizes[l] += 1;
    }
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));
    ComponentReport {
        points,
        edges,
        paths,
        labels,
        component_count,
        component_sizes,
        attempted_pairs: attempted,
    }
}

/// `f = Π f_i^{n_i}` with the factors given explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct FactoredGerm {
    pub factors: Vec<MixedPolynomial>,
    pub multiplicities: Vec<u32>,
}

impl FactoredGerm {
    /// Factors must be holomorphic; coprimality is the caller's assertion.
    pub fn new(factors: Vec<MixedPolynomial>, multiplicities: Vec<u32>) -> Result<Self, ConnectivityError> {
        if factors.len() != multiplicities.len() {
            return Err(ConnectivityError::LengthMismatch {
                factors: factors.len(),
                multiplicities: multiplicities.len(),
            });
        }
        if multiplicities.is_empty() || multiplicities.contains(&0) {
            return Err(ConnectivityError::InvalidMultiplicities);
        }
        if let Some(i) = factors.iter().position(|g| !g.is_holomorphic()) {
            return Err(ConnectivityError::NotHolomorphic(i));
        }
        Ok(Self { factors, multiplicities })
    }

    fn power_product(&self, divide_by: u32) -> MixedPolynomial {
        let n = self.factors.iter().map(MixedPolynomial::n).max().unwrap_or(1);
        self.factors
            .iter()
            .zip(&self.multiplicities)
            .fold(MixedPolynomial::constant(n, Complex64::new(1.0, 0.0)), |acc, (g, &m)| {
                &acc * &g.pow(m / divide_by)
            })
    }

    /// `Π f_i^{n_i}`.
    pub fn product(&self) -> MixedPolynomial {
        self.power_product(1)
    }

    /// `g = Π f_i^{n_i / n₀}`, so that `f = g^{n₀}`.
    pub fn reduced_root(&self) -> MixedPolynomial {
        self.power_product(gcd_predict(self))
    }
}

/// `n₀ = gcd(n_1, …, n_r)`, the predicted number of fiber components.
pub fn gcd_predict(g: &FactoredGerm) -> u32 {
    g.multiplicities.iter().fold(0, |acc, &m| acc.gcd(&m))
}

/// Components of the graph on residues mod `n_1` with edges `a ↔ a + n_j`
/// for `j ≥ 2`: the points of `F ∩ ∂D_1` joined by the monodromy argument.
pub fn cyclic_cover_components(multiplicities: &[u32]) -> Result<usize, ConnectivityError> {
    let (&n1, rest) = multiplicities.split_first().ok_or(ConnectivityError::InvalidMultiplicities)?;
    if n1 == 0 || rest.contains(&0) {
        return Err(ConnectivityError::InvalidMultiplicities);
    }
    let n1 = n1 as usize;
    let mut uf = UnionFind::new(n1);
    for &nj in rest {
        let step = nj as usize % n1;
        for a in 0..n1 {
            uf.union(a, (a + step) % n1);
        }
    }
    let mut roots: Vec<usize> = (0..n1).map(|a| uf.find(a)).collect();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots.len())
}

/// For `f = g^{n₀}`, the class `k ∈ 0..n₀` with `arg g(z) ≈ (arg t + 2πk) / n₀`,
/// where `t` is the fiber value; `None` when `arg g` is further than `tol`
/// from every such angle.
pub fn arg_classes(g: &MixedPolynomial, points: &[FiberPoint], n0: u32, tol: f64) -> Vec<Option<u32>> {
    let n0f = f64::from(n0);
    points
        .iter()
        .map(|p| {
            let a = g.evaluate(&p.z).ok()?.arg() - p.target.arg() / n0f;
            let x = a * n0f / TAU;
            let k = x.round();
            ((x - k).abs() * TAU / n0f <= tol).then(|| (k as i64).rem_euclid(i64::from(n0)) as u32)
        })
        .collect()
}
