//! Numerical search for states unbiased to every basis of a set.
//!
//! The residual
//!
//! ```text
//! F(v) = Σ_B Σ_{b ∈ B} (|⟨b|v⟩|² − 1/d)²
//! ```
//!
//! vanishes exactly on states unbiased to all bases. It is minimized from
//! many random starting points on the unit sphere; restart `r` draws its
//! start from a ChaCha stream selected by `(seed, r)`, so reports depend only
//! on the configuration and never on the thread count.
//!
//! A `NotFound` verdict is evidence of strong unextendibility, not a proof.

mod cliques;
mod sphere;

pub use cliques::{partition_into_bases, EXACT_LIMIT};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MubError, Result};
use crate::linalg::{check_dims, random_state, unbiasedness_defect, Basis, CVec, MubSet, C64};
use sphere::{minimize_on_sphere, project_tangent, LocalOptions, LocalResult, SphereObjective};

/// Number of smallest local minima echoed in every report.
pub const REPORTED_MINIMA: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iterations: usize,
    /// Stop a restart once the tangent gradient norm falls below this.
    pub grad_tol: f64,
    /// A restart is a hit when its residual is at most this.
    pub hit_threshold: f64,
    /// Two hits are the same state when `|⟨u|v⟩| > 1 − dedup_threshold`.
    pub dedup_threshold: f64,
    /// Orthogonality threshold on `|⟨u|v⟩|²` when grouping hits into bases.
    pub orthogonality_tol: f64,
    pub seed: u64,
    /// Worker threads; `0` uses the global pool. Never affects results.
    #[serde(skip)]
    pub threads: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 1000,
            max_iterations: 2000,
            grad_tol: 1e-12,
            hit_threshold: 1e-18,
            dedup_threshold: 1e-6,
            orthogonality_tol: 1e-8,
            seed: 0,
            threads: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(MubError::InvalidConfig(format!("{what} must be positive")));
        if self.restarts == 0 {
            return bad("restarts");
        }
        if self.max_iterations == 0 {
            return bad("max_iterations");
        }
        for (name, x) in [
            ("grad_tol", self.grad_tol),
            ("hit_threshold", self.hit_threshold),
            ("dedup_threshold", self.dedup_threshold),
            ("orthogonality_tol", self.orthogonality_tol),
        ] {
            if !(x > 0.0 && x.is_finite()) {
                return bad(name);
            }
        }
        Ok(())
    }

    fn run<T: Send>(&self, f: impl Fn(usize) -> T + Sync + Send) -> Result<Vec<T>> {
        let job = || (0..self.restarts).into_par_iter().map(&f).collect::<Vec<T>>();
        if self.threads == 0 {
            Ok(job())
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.threads)
                .build()
                .map_err(|e| MubError::InvalidConfig(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }

    fn start(&self, restart: usize, d: usize) -> Vec<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(restart as u64);
        random_state(d, &mut rng).into_entries()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Found,
    NotFound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchReport {
    pub verdict: Verdict,
    /// Hits, deduplicated up to global phase, in restart order.
    pub found_vectors: Vec<CVec>,
    pub best_residual: f64,
    /// The smallest final residuals over all restarts, ascending.
    pub smallest_minima: Vec<f64>,
    pub restarts: usize,
    pub restarts_converged: usize,
    pub seed: u64,
}

/// Flattened rows of every basis in a set.
struct Rows {
    d: usize,
    rows: Vec<Vec<C64>>,
}

impl Rows {
    fn of(s: &MubSet) -> Self {
        Rows {
            d: s.dim(),
            rows: s.bases().iter().flat_map(|b| b.rows().iter().map(|r| r.entries().to_vec())).collect(),
        }
    }

    /// `Σ f(p_b)` with gradient `Σ 2 f'(p_b) ⟨b|v⟩ b`.
    fn accumulate(&self, v: &[C64], grad: Option<&mut [C64]>, f: impl Fn(f64) -> (f64, f64)) -> f64 {
        let mut total = 0.0;
        match grad {
            None => {
                for b in &self.rows {
                    let c: C64 = b.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                    total += f(c.norm_sqr()).0;
                }
            }
            Some(g) => {
                g.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                for b in &self.rows {
                    let c: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                    let (val, slope) = f(c.norm_sqr());
                    total += val;
                    let w = c * (2.0 * slope);
                    for (gi, bi) in g.iter_mut().zip(b) {
                        *gi += w * bi;
                    }
                }
            }
        }
        total
    }
}

struct Residual(Rows);

impl Residual {
    fn term(&self) -> impl Fn(f64) -> (f64, f64) {
        let t = 1.0 / self.0.d as f64;
        move |p| {
            let e = p - t;
            (e * e, 2.0 * e)
        }
    }
}

impl SphereObjective for Residual {
    fn value(&self, v: &[C64]) -> f64 {
        self.0.accumulate(v, None, self.term())
    }
    fn value_grad(&self, v: &[C64], grad: &mut [C64]) -> f64 {
        self.0.accumulate(v, Some(grad), self.term())
    }
}

/// `Σ p log₂ p` over all outcome probabilities: minus the summed entropies.
struct NegEntropy(Rows);

fn plogp(p: f64) -> (f64, f64) {
    let q = p.max(1e-300);
    let val = if p > 0.0 { p * p.log2() } else { 0.0 };
    (val, q.log2() + std::f64::consts::LOG2_E)
}

impl SphereObjective for NegEntropy {
    fn value(&self, v: &[C64]) -> f64 {
        self.0.accumulate(v, None, plogp)
    }
    fn value_grad(&self, v: &[C64], grad: &mut [C64]) -> f64 {
        self.0.accumulate(v, Some(grad), plogp)
    }
}

/// `F(v) = Σ_B Σ_b (|⟨b|v⟩|² − 1/d)²`.
pub fn unbiasedness_residual(v: &CVec, s: &MubSet) -> Result<f64> {
    check_dims(s.dim(), v.dim())?;
    Ok(Residual(Rows::of(s)).value(v.entries()))
}

/// Gradient of the residual with respect to `(Re v, Im v)`, projected onto
/// the tangent space of the unit sphere at `v`. Real parts come first.
pub fn residual_gradient(v: &CVec, s: &MubSet) -> Result<Vec<f64>> {
    check_dims(s.dim(), v.dim())?;
    let mut g = vec![C64::new(0.0, 0.0); v.dim()];
    Residual(Rows::of(s)).value_grad(v.entries(), &mut g);
    project_tangent(v.entries(), &mut g);
    Ok(g.iter().map(|z| z.re).chain(g.iter().map(|z| z.im)).collect())
}

/// Residual values of one descent run from `start`, one per iteration.
/// Exposed so that the descent contract can be checked from outside.
pub fn descent_trace(s: &MubSet, start: &CVec, cfg: &SearchConfig) -> Result<Vec<f64>> {
    check_dims(s.dim(), start.dim())?;
    let opts = residual_options(cfg, true);
    Ok(minimize_on_sphere(&Residual(Rows::of(s)), start.entries().to_vec(), &opts).history)
}

fn residual_options(cfg: &SearchConfig, record_history: bool) -> LocalOptions {
    LocalOptions {
        max_iterations: cfg.max_iterations,
        grad_tol: cfg.grad_tol,
        target: cfg.hit_threshold * 1e-4,
        record_history,
    }
}

fn smallest(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.truncate(REPORTED_MINIMA);
    v
}

/// Multi-start minimization of the residual over unit vectors.
pub fn search_unbiased_vector(s: &MubSet, cfg: &SearchConfig) -> Result<SearchReport> {
    cfg.validate()?;
    let obj = Residual(Rows::of(s));
    let opts = residual_options(cfg, false);
    let d = s.dim();
    let runs: Vec<LocalResult> = cfg.run(|r| minimize_on_sphere(&obj, cfg.start(r, d), &opts))?;

    let mut found: Vec<CVec> = Vec::new();
    for run in runs.iter().filter(|r| r.value <= cfg.hit_threshold) {
        let v = CVec::new(run.point.clone())?.canonical_phase();
        let duplicate = found
            .iter()
            .any(|u| crate::linalg::inner_unchecked(u.entries(), v.entries()).norm() > 1.0 - cfg.dedup_threshold);
        if !duplicate {
            found.push(v);
        }
    }
    let best = runs.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    Ok(SearchReport {
        verdict: if found.is_empty() { Verdict::NotFound } else { Verdict::Found },
        found_vectors: found,
        best_residual: best,
        smallest_minima: smallest(runs.iter().map(|r| r.value)),
        restarts: cfg.restarts,
        restarts_converged: runs.iter().filter(|r| r.converged).count(),
        seed: cfg.seed,
    })
}

/// All distinct unbiased states found. The count is a lower bound.
pub fn enumerate_unbiased_vectors(s: &MubSet, cfg: &SearchConfig) -> Result<Vec<CVec>> {
    Ok(search_unbiased_vector(s, cfg)?.found_vectors)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtendibilityLevel {
    ExtendsByBasis,
    ExtendsByVectorsOnly,
    NoVectorFound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtendibilityVerdict {
    pub level: ExtendibilityLevel,
    pub search: SearchReport,
    /// Disjoint orthonormal bases assembled from the found states.
    #[serde(skip)]
    pub partition: Vec<Basis>,
    pub partition_size: usize,
    /// Whether `partition` came from completing a found state rather than
    /// from the found states themselves.
    pub completed: bool,
    /// Indices into `partition` of a largest pairwise unbiased subfamily.
    pub extension: Vec<usize>,
    /// Input bases plus the extension.
    pub total_bases: usize,
}

impl ExtendibilityVerdict {
    /// The input set enlarged by the extension bases.
    pub fn extended_set(&self, s: &MubSet) -> Result<MubSet> {
        let mut out = s.clone();
        for &k in &self.extension {
            out.push(self.partition[k].clone())?;
        }
        Ok(out)
    }
}

/// Found states tried as the first row of a completed basis.
const COMPLETION_SEEDS: usize = 3;
/// Restarts per row when completing a basis.
const COMPLETION_RESTARTS: usize = 200;

/// Orthonormal basis of the complement of `chosen` (orthonormal rows), as
/// rows.
fn complement(chosen: &[Vec<C64>], d: usize) -> Vec<Vec<C64>> {
    let mut span: Vec<Vec<C64>> = chosen.to_vec();
    let mut out = Vec::new();
    for k in 0..d {
        let mut e = vec![C64::new(0.0, 0.0); d];
        e[k] = C64::new(1.0, 0.0);
        // two passes keep the projection accurate
        for _ in 0..2 {
            for u in &span {
                let c = crate::linalg::inner_unchecked(u, &e);
                e.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = e.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            e.iter_mut().for_each(|z| *z /= n);
            span.push(e.clone());
            out.push(e);
        }
        if out.len() + chosen.len() == d {
            break;
        }
    }
    out
}

/// Grows `first` into an orthonormal basis of states unbiased to `s`.
///
/// Each further row is searched for inside the orthogonal complement of the
/// rows chosen so far, `v = Σ_k w_k q_k`, so orthogonality holds by
/// construction and only the residual is minimized, over unit `w`.
fn complete_basis(s: &MubSet, first: &CVec, cfg: &SearchConfig) -> Result<Option<Basis>> {
    let d = s.dim();
    let rows = Rows::of(s);
    let sub = SearchConfig { restarts: cfg.restarts.min(COMPLETION_RESTARTS), ..cfg.clone() };
    let opts = residual_options(&sub, false);
    let mut chosen = vec![first.entries().to_vec()];
    while chosen.len() < d {
        let q = complement(&chosen, d);
        // ⟨b|Σ w_k q_k⟩ = Σ_k ⟨b|q_k⟩ w_k: rows of the reduced problem are ⟨q_k|b⟩
        let reduced = Rows {
            d,
            rows: rows
                .rows
                .iter()
                .map(|b| q.iter().map(|qk| crate::linalg::inner_unchecked(qk, b)).collect())
                .collect(),
        };
        let obj = Residual(reduced);
        let runs = sub.run(|r| minimize_on_sphere(&obj, sub.start(r, q.len()), &opts))?;
        let Some(hit) = runs.iter().find(|r| r.value <= cfg.hit_threshold) else {
            return Ok(None);
        };
        let mut v = vec![C64::new(0.0, 0.0); d];
        for (w, qk) in hit.point.iter().zip(&q) {
            v.iter_mut().zip(qk).for_each(|(x, y)| *x += w * y);
        }
        chosen.push(v);
    }
    let rows = chosen.into_iter().map(|r| CVec::new(r).map(|v| v.canonical_phase())).collect::<Result<Vec<_>>>()?;
    let basis = Basis::from_rows(rows, "completed")?;
    let unbiased = s
        .bases()
        .iter()
        .try_fold(true, |ok, b| Ok::<_, MubError>(ok && unbiasedness_defect(b, &basis)? <= cfg.orthogonality_tol))?;
    Ok((unbiased && basis.orthonormality_defect() <= cfg.orthogonality_tol).then_some(basis))
}

/// Search, group the hits into bases, and pick the largest family of those
/// bases that is pairwise unbiased.
///
/// When the hits hold no complete basis, as happens when the unbiased states
/// form a continuum, the first few hits are each grown into a basis by
/// searching the orthogonal complement row by row.
pub fn classify_extendibility(s: &MubSet, cfg: &SearchConfig) -> Result<ExtendibilityVerdict> {
    let search = search_unbiased_vector(s, cfg)?;
    let mut partition = partition_into_bases(&search.found_vectors, cfg.orthogonality_tol)?;
    let mut completed = false;
    if partition.is_empty() {
        for first in search.found_vectors.iter().take(COMPLETION_SEEDS) {
            if let Some(b) = complete_basis(s, first, cfg)? {
                partition.push(b);
                completed = true;
                break;
            }
        }
    }
    let extension = largest_unbiased_family(&partition, cfg.orthogonality_tol)?;
    let level = match (search.verdict, partition.is_empty()) {
        (Verdict::NotFound, _) => ExtendibilityLevel::NoVectorFound,
        (Verdict::Found, true) => ExtendibilityLevel::ExtendsByVectorsOnly,
        (Verdict::Found, false) => ExtendibilityLevel::ExtendsByBasis,
    };
    Ok(ExtendibilityVerdict {
        level,
        total_bases: s.len() + extension.len(),
        partition_size: partition.len(),
        completed,
        extension,
        partition,
        search,
    })
}

fn largest_unbiased_family(bases: &[Basis], tol: f64) -> Result<Vec<usize>> {
    let n = bases.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let ok = unbiasedness_defect(&bases[i], &bases[j])? <= tol;
            adj[i][j] = ok;
            adj[j][i] = ok;
        }
    }
    fn grow(adj: &[Vec<bool>], cands: &[usize], current: &mut Vec<usize>, best: &mut Vec<usize>) {
        if current.len() > best.len() {
            *best = current.clone();
        }
        for (pos, &c) in cands.iter().enumerate() {
            if current.len() + cands.len() - pos <= best.len() {
                return;
            }
            let next: Vec<usize> = cands[pos + 1..].iter().copied().filter(|&o| adj[c][o]).collect();
            current.push(c);
            grow(adj, &next, current, best);
            current.pop();
        }
    }
    let mut best = Vec::new();
    grow(&adj, &(0..n).collect::<Vec<_>>(), &mut Vec::new(), &mut best);
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyWitness {
    /// Largest summed outcome entropy found, in bits: a lower bound on the
    /// maximum over pure states.
    pub bits: f64,
    /// `n log₂ d`, reached exactly when some state is unbiased to all bases.
    pub ceiling: f64,
    pub maximizer: CVec,
}

/// Maximizes `Σ_B H({|⟨b|v⟩|²}_b)` over pure states by multi-start descent
/// on the negated objective.
pub fn entropy_witness_bound(s: &MubSet, cfg: &SearchConfig) -> Result<EntropyWitness> {
    cfg.validate()?;
    let obj = NegEntropy(Rows::of(s));
    let opts = LocalOptions {
        max_iterations: cfg.max_iterations,
        grad_tol: cfg.grad_tol,
        target: f64::NEG_INFINITY,
        record_history: false,
    };
    let d = s.dim();
    let runs = cfg.run(|r| minimize_on_sphere(&obj, cfg.start(r, d), &opts))?;
    let best = runs.into_iter().reduce(|a, b| if b.value < a.value { b } else { a }).expect("at least one restart");
    Ok(EntropyWitness {
        bits: -best.value,
        ceiling: s.len() as f64 * (d as f64).log2(),
        maximizer: CVec::new(best.point)?.canonical_phase(),
    })
}

/// Summed base-2 outcome entropy of `v` over every basis of `s`.
pub fn summed_entropy(v: &CVec, s: &MubSet) -> Result<f64> {
    check_dims(s.dim(), v.dim())?;
    Ok(-NegEntropy(Rows::of(s)).value(v.entries()))
}
