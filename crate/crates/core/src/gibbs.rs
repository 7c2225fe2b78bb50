//! Exact Gibbs computations by full enumeration of configurations.
//!
//! An [`ExactSystem`] is a set of active edges `A ⊆ E_n`, a coupling, and
//! the cached log-partition function of the Gibbs measure on configurations
//! supported on `A`. Everything that needs exact expectations (Ursell
//! functions, inequality verifiers, the duplication machinery) consumes
//! this type.
//!
//! Enumeration visits configurations in ascending order of their local bit
//! mask, split into a fixed number of contiguous blocks that depend only on
//! `|A|`. Blocks are summed independently (in parallel) with compensated
//! summation and merged in block order, so results are bit-identical for any
//! thread count.

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{hom_count, Config, EdgeIndex, PatternKind, SubgraphPattern, WedgeList};
use crate::numeric::{sigmoid, CompensatedSum};

/// Default limit on the number of active edges (2^24 configurations).
pub const ENUMERATION_CAP: usize = 24;

/// Largest system for which the full probability/moment table is kept.
pub const MOMENT_TABLE_CAP: usize = 20;

/// Two-star couplings `(α, h)` of `H = (α/n) Σ_W x_i x_j + h Σ x_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarParams {
    pub alpha: f64,
    pub h: f64,
}

impl ScalarParams {
    pub fn new(alpha: f64, h: f64) -> Self {
        ScalarParams { alpha, h }
    }
}

/// Per-wedge couplings `α_ij` and per-edge fields `h_i`.
///
/// `alpha` is aligned with [`WedgeList::new`] for `K_n`; `h` with edge ids.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedParams {
    n: usize,
    alpha: Vec<f64>,
    h: Vec<f64>,
}

impl GeneralizedParams {
    pub fn new(n: usize, alpha: Vec<f64>, h: Vec<f64>) -> Result<Self> {
        let idx = EdgeIndex::new(n);
        let wedges = WedgeList::new(&idx);
        if alpha.len() != wedges.len() {
            return Err(Error::InvalidParams(format!(
                "alpha map has {} entries, K_{n} has {} wedges",
                alpha.len(),
                wedges.len()
            )));
        }
        if h.len() != idx.m() {
            return Err(Error::InvalidParams(format!(
                "field vector has {} entries, K_{n} has {} edges",
                h.len(),
                idx.m()
            )));
        }
        if alpha.iter().chain(&h).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite coupling".into()));
        }
        Ok(GeneralizedParams { n, alpha, h })
    }

    /// Constant maps, equivalent to [`ScalarParams`].
    pub fn constant(n: usize, alpha: f64, h: f64) -> Self {
        let idx = EdgeIndex::new(n);
        let w = WedgeList::new(&idx).len();
        GeneralizedParams {
            n,
            alpha: vec![alpha; w],
            h: vec![h; idx.m()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn alpha_mut(&mut self) -> &mut [f64] {
        &mut self.alpha
    }

    pub fn h_mut(&mut self) -> &mut [f64] {
        &mut self.h
    }
}

/// General exponential random graph: `H = n² Σ_j β_j t(H_j, G)`, first
/// pattern an edge.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgmParams {
    patterns: Vec<SubgraphPattern>,
    kinds: Vec<PatternKind>,
    betas: Vec<f64>,
}

impl ErgmParams {
    pub fn new(patterns: Vec<SubgraphPattern>, betas: Vec<f64>) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::InvalidParams("ERGM needs at least one pattern".into()));
        }
        if patterns.len() != betas.len() {
            return Err(Error::InvalidParams(format!(
                "{} patterns but {} coefficients",
                patterns.len(),
                betas.len()
            )));
        }
        let kinds = patterns.iter().map(|p| p.kind()).collect::<Result<Vec<_>>>()?;
        if kinds[0] != PatternKind::Edge {
            return Err(Error::InvalidParams("first ERGM pattern must be the edge".into()));
        }
        if betas.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidParams("non-finite coefficient".into()));
        }
        Ok(ErgmParams {
            patterns,
            kinds,
            betas,
        })
    }

    /// Edge + wedge model with coefficients `(β₁, β₂)`.
    pub fn two_star(beta1: f64, beta2: f64) -> Self {
        Self::new(
            vec![SubgraphPattern::edge(), SubgraphPattern::wedge()],
            vec![beta1, beta2],
        )
        .expect("edge + wedge is supported")
    }

    /// Edge + triangle model with coefficients `(β₁, β₂)`.
    pub fn edge_triangle(beta1: f64, beta2: f64) -> Self {
        Self::new(
            vec![SubgraphPattern::edge(), SubgraphPattern::triangle()],
            vec![beta1, beta2],
        )
        .expect("edge + triangle is supported")
    }

    pub fn patterns(&self) -> &[SubgraphPattern] {
        &self.patterns
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// True when `β₂, …, β_k ≥ 0`.
    pub fn higher_nonnegative(&self) -> bool {
        self.betas[1..].iter().all(|&b| b >= 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coupling {
    Scalar(ScalarParams),
    Generalized(GeneralizedParams),
    Ergm(ErgmParams),
}

impl From<ScalarParams> for Coupling {
    fn from(p: ScalarParams) -> Self {
        Coupling::Scalar(p)
    }
}

impl From<GeneralizedParams> for Coupling {
    fn from(p: GeneralizedParams) -> Self {
        Coupling::Generalized(p)
    }
}

impl From<ErgmParams> for Coupling {
    fn from(p: ErgmParams) -> Self {
        Coupling::Ergm(p)
    }
}

/// Compiled energy function over local bit masks.
#[derive(Debug, Clone)]
enum Kernel {
    Pairwise {
        field: Vec<f64>,
        /// For local edge k: (local j < k, α_jk / n) over active wedges.
        lower: Vec<Vec<(usize, f64)>>,
    },
    Ergm,
}

/// Observable accepted by [`ExactSystem::expectation`].
pub enum Observable<'a> {
    /// `x_A = Π_{i ∈ A} x_i` (empty product is 1).
    Monomial(&'a [usize]),
    Functional(&'a (dyn Fn(&Config) -> f64 + Sync)),
}

/// Gibbs measure on configurations supported on an active edge subset.
#[derive(Debug, Clone)]
pub struct ExactSystem {
    index: Arc<EdgeIndex>,
    wedges: Arc<WedgeList>,
    active: Vec<usize>,
    /// Local position of every global edge, if active.
    local: Vec<Option<usize>>,
    coupling: Coupling,
    kernel: Kernel,
    cap: usize,
    log_z: f64,
    moments: OnceLock<Arc<Vec<f64>>>,
}

impl ExactSystem {
    /// Full system on `K_n`.
    pub fn new(n: usize, coupling: impl Into<Coupling>) -> Result<Self> {
        let m = n * n.saturating_sub(1) / 2;
        Self::with_active(n, coupling, (0..m).collect(), ENUMERATION_CAP)
    }

    pub fn scalar(n: usize, alpha: f64, h: f64) -> Result<Self> {
        Self::new(n, ScalarParams::new(alpha, h))
    }

    /// System restricted to `active` (any order, duplicates ignored).
    pub fn with_active(
        n: usize,
        coupling: impl Into<Coupling>,
        mut active: Vec<usize>,
        cap: usize,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("K_n needs n ≥ 1".into()));
        }
        let coupling = coupling.into();
        match &coupling {
            Coupling::Scalar(p) if !(p.alpha.is_finite() && p.h.is_finite()) => {
                return Err(Error::InvalidParams("non-finite scalar coupling".into()))
            }
            Coupling::Generalized(g) if g.n != n => {
                return Err(Error::InvalidParams(format!(
                    "generalized couplings built for n = {}, system has n = {n}",
                    g.n
                )))
            }
            _ => {}
        }
        let index = Arc::new(EdgeIndex::new(n));
        let wedges = Arc::new(WedgeList::new(&index));
        active.sort_unstable();
        active.dedup();
        for &e in &active {
            index.check_edge(e)?;
        }
        if active.len() > cap {
            return Err(Error::EnumerationCap {
                active: active.len(),
                cap,
            });
        }
        let mut local = vec![None; index.m()];
        for (k, &e) in active.iter().enumerate() {
            local[e] = Some(k);
        }
        let kernel = compile(&index, &wedges, &active, &local, &coupling);
        let mut sys = ExactSystem {
            index,
            wedges,
            active,
            local,
            coupling,
            kernel,
            cap,
            log_z: 0.0,
            moments: OnceLock::new(),
        };
        sys.log_z = sys.compute_log_z();
        Ok(sys)
    }

    /// Same coupling and `n`, restricted to `subset ⊆ active`.
    pub fn restrict(&self, subset: &[usize]) -> Result<ExactSystem> {
        for &e in subset {
            self.index.check_edge(e)?;
            if self.local[e].is_none() {
                return Err(Error::InactiveEdge { edge: e });
            }
        }
        Self::with_active(self.n(), self.coupling.clone(), subset.to_vec(), self.cap)
    }

    /// Same active set with a different coupling.
    pub fn with_coupling(&self, coupling: impl Into<Coupling>) -> Result<ExactSystem> {
        Self::with_active(self.n(), coupling, self.active.clone(), self.cap)
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn m(&self) -> usize {
        self.index.m()
    }

    pub fn index(&self) -> &EdgeIndex {
        &self.index
    }

    pub fn wedges(&self) -> &WedgeList {
        &self.wedges
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn is_full(&self) -> bool {
        self.active.len() == self.m()
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn scalar_params(&self) -> Option<ScalarParams> {
        match self.coupling {
            Coupling::Scalar(p) => Some(p),
            _ => None,
        }
    }

    pub fn is_pairwise(&self) -> bool {
        !matches!(self.coupling, Coupling::Ergm(_))
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    /// `ln Z / n²`.
    pub fn free_energy(&self) -> f64 {
        let n = self.n() as f64;
        self.log_z / (n * n)
    }

    /// Field `h_i` of a pairwise coupling.
    pub fn field(&self, edge: usize) -> Option<f64> {
        match &self.coupling {
            Coupling::Scalar(p) => Some(p.h),
            Coupling::Generalized(g) => Some(g.h[edge]),
            Coupling::Ergm(_) => None,
        }
    }

    /// Coupling `α_ij` of the wedge `{i, j}` (`None` for non-wedges or ERGMs).
    pub fn wedge_alpha(&self, i: usize, j: usize) -> Option<f64> {
        let pos = self.wedges.position(i, j)?;
        match &self.coupling {
            Coupling::Scalar(p) => Some(p.alpha),
            Coupling::Generalized(g) => Some(g.alpha[pos]),
            Coupling::Ergm(_) => None,
        }
    }

    /// True when every coupling α is non-negative (ERGM: β₂.. ≥ 0).
    pub fn alpha_nonnegative(&self) -> bool {
        match &self.coupling {
            Coupling::Scalar(p) => p.alpha >= 0.0,
            Coupling::Generalized(g) => g.alpha.iter().all(|&a| a >= 0.0),
            Coupling::Ergm(e) => e.higher_nonnegative(),
        }
    }

    /// True when every field is non-negative (ERGM: β₁ ≥ 0).
    pub fn field_nonnegative(&self) -> bool {
        match &self.coupling {
            Coupling::Scalar(p) => p.h >= 0.0,
            Coupling::Generalized(g) => g.h.iter().all(|&h| h >= 0.0),
            Coupling::Ergm(e) => e.betas[0] >= 0.0,
        }
    }

    pub fn local_of(&self, edge: usize) -> Option<usize> {
        self.local.get(edge).copied().flatten()
    }

    /// Local bit mask of an edge subset; every edge must be active.
    pub fn local_mask(&self, edges: &[usize]) -> Result<u64> {
        let mut mask = 0u64;
        for &e in edges {
            self.index.check_edge(e)?;
            let k = self.local[e].ok_or(Error::InactiveEdge { edge: e })?;
            mask |= 1 << k;
        }
        Ok(mask)
    }

    /// Global configuration for a local mask.
    pub fn config_of(&self, mask: u64) -> Config {
        let mut c = Config::empty(self.m());
        for (k, &e) in self.active.iter().enumerate() {
            if mask >> k & 1 == 1 {
                c.set(e, true);
            }
        }
        c
    }

    /// Local mask of a configuration supported on the active set.
    pub fn mask_of(&self, c: &Config) -> Result<u64> {
        c.check_len(self.m())?;
        let mut mask = 0u64;
        for e in c.ones() {
            let k = self.local[e].ok_or(Error::UnsupportedConfig { edge: e })?;
            mask |= 1 << k;
        }
        Ok(mask)
    }

    pub fn num_configs(&self) -> u64 {
        1u64 << self.active.len()
    }

    /// Hamiltonian of a configuration supported on the active set.
    pub fn hamiltonian(&self, c: &Config) -> Result<f64> {
        let mask = self.mask_of(c)?;
        Ok(self.energy(mask))
    }

    /// Hamiltonian of the configuration with local mask `mask`.
    #[inline]
    pub fn energy(&self, mask: u64) -> f64 {
        match &self.kernel {
            Kernel::Pairwise { field, lower } => {
                let mut e = 0.0;
                let mut rest = mask;
                while rest != 0 {
                    let k = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    e += field[k];
                    for &(j, a) in &lower[k] {
                        if mask >> j & 1 == 1 {
                            e += a;
                        }
                    }
                }
                e
            }
            Kernel::Ergm => {
                let Coupling::Ergm(p) = &self.coupling else {
                    unreachable!("ERGM kernel without ERGM coupling")
                };
                ergm_energy(p, &self.index, &self.config_of(mask))
            }
        }
    }

    /// `ln μ(x)` for a local mask.
    pub fn log_prob(&self, mask: u64) -> f64 {
        self.energy(mask) - self.log_z
    }

    /// `Σ_x f(x) μ(x)` over local masks.
    pub fn expect_mask<F>(&self, f: F) -> f64
    where
        F: Fn(u64) -> f64 + Sync,
    {
        let log_z = self.log_z;
        let partial: Vec<CompensatedSum> = self
            .blocks()
            .into_par_iter()
            .map(|(lo, hi)| {
                let mut s = CompensatedSum::new();
                for mask in lo..hi {
                    let v = f(mask);
                    if v != 0.0 {
                        s.add(v * (self.energy(mask) - log_z).exp());
                    }
                }
                s
            })
            .collect();
        merge(&partial)
    }

    /// `E[f(x)]` for a functional of the global configuration.
    pub fn expect<F>(&self, f: F) -> f64
    where
        F: Fn(&Config) -> f64 + Sync,
    {
        self.expect_mask(|mask| f(&self.config_of(mask)))
    }

    /// `E[x_A]`, by direct enumeration.
    pub fn expect_monomial(&self, edges: &[usize]) -> Result<f64> {
        let a = self.local_mask(edges)?;
        Ok(self.expect_mask(|mask| if mask & a == a { 1.0 } else { 0.0 }))
    }

    pub fn expectation(&self, obs: &Observable<'_>) -> Result<f64> {
        match obs {
            Observable::Monomial(edges) => self.expect_monomial(edges),
            Observable::Functional(f) => Ok(self.expect(|c| f(c))),
        }
    }

    /// Right-hand side of the edge-occurrence identity:
    /// `E[σ((1/n) Σ_{j ~ i} α_ij x_j + h_i)]`.
    pub fn edge_occurrence_rhs(&self, edge: usize) -> Result<f64> {
        if !self.is_pairwise() {
            return Err(Error::NeedsPairwise("edge-occurrence identity"));
        }
        self.index.check_edge(edge)?;
        self.local[edge].ok_or(Error::InactiveEdge { edge })?;
        let h = self.field(edge).expect("pairwise");
        let n = self.n() as f64;
        let partners: Vec<(usize, f64)> = self
            .index
            .partners(edge)
            .iter()
            .filter_map(|&j| {
                let lj = self.local[j]?;
                Some((lj, self.wedge_alpha(edge, j).expect("partner is a wedge") / n))
            })
            .collect();
        Ok(self.expect_mask(|mask| {
            let s: f64 = partners
                .iter()
                .filter(|(lj, _)| mask >> lj & 1 == 1)
                .map(|&(_, a)| a)
                .sum();
            sigmoid(s + h)
        }))
    }

    /// Probability of every local mask, `μ(mask)`.
    pub fn probabilities(&self) -> Result<Vec<f64>> {
        if self.active.len() > MOMENT_TABLE_CAP {
            return Err(Error::SizeCap {
                what: "probability table",
                got: self.active.len(),
                cap: MOMENT_TABLE_CAP,
            });
        }
        Ok((0..self.num_configs()).map(|m| self.log_prob(m).exp()).collect())
    }

    /// Table of all monomial moments: entry `A` (local mask) is `E[x_A]`.
    /// Built once by a superset-sum transform of the probability table.
    pub fn moments(&self) -> Result<Arc<Vec<f64>>> {
        if let Some(t) = self.moments.get() {
            return Ok(Arc::clone(t));
        }
        let mut t = self.probabilities()?;
        let k = self.active.len();
        for b in 0..k {
            let bit = 1usize << b;
            for mask in 0..t.len() {
                if mask & bit == 0 {
                    t[mask] += t[mask | bit];
                }
            }
        }
        let t = Arc::new(t);
        let _ = self.moments.set(Arc::clone(&t));
        Ok(t)
    }

    fn blocks(&self) -> Vec<(u64, u64)> {
        let k = self.active.len();
        let split = k.min(6);
        let size = 1u64 << (k - split);
        (0..1u64 << split).map(|b| (b * size, (b + 1) * size)).collect()
    }

    fn compute_log_z(&self) -> f64 {
        let blocks = self.blocks();
        let max = blocks
            .par_iter()
            .map(|&(lo, hi)| (lo..hi).map(|m| self.energy(m)).fold(f64::NEG_INFINITY, f64::max))
            .reduce(|| f64::NEG_INFINITY, f64::max);
        let partial: Vec<CompensatedSum> = blocks
            .into_par_iter()
            .map(|(lo, hi)| (lo..hi).map(|m| (self.energy(m) - max).exp()).collect())
            .collect();
        max + merge(&partial).ln()
    }
}

fn merge(partial: &[CompensatedSum]) -> f64 {
    let mut total = CompensatedSum::new();
    for p in partial {
        total.add(p.value());
    }
    total.value()
}

fn compile(
    index: &EdgeIndex,
    wedges: &WedgeList,
    active: &[usize],
    local: &[Option<usize>],
    coupling: &Coupling,
) -> Kernel {
    let n = index.n() as f64;
    type Lookup<'a> = Box<dyn Fn(usize) -> f64 + 'a>;
    let (alpha_of, h_of): (Lookup, Lookup) = match coupling {
        Coupling::Scalar(p) => {
            let (a, h) = (p.alpha, p.h);
            (Box::new(move |_| a), Box::new(move |_| h))
        }
        Coupling::Generalized(g) => (Box::new(|w| g.alpha[w]), Box::new(|e| g.h[e])),
        Coupling::Ergm(_) => return Kernel::Ergm,
    };
    let field = active.iter().map(|&e| h_of(e)).collect();
    let mut lower = vec![Vec::new(); active.len()];
    for (w, &(i, j)) in wedges.pairs().iter().enumerate() {
        if let (Some(li), Some(lj)) = (local[i], local[j]) {
            let (lo, hi) = if li < lj { (li, lj) } else { (lj, li) };
            lower[hi].push((lo, alpha_of(w) / n));
        }
    }
    Kernel::Pairwise { field, lower }
}

/// `n² Σ_j β_j t(H_j, G)`.
pub fn ergm_energy(p: &ErgmParams, index: &EdgeIndex, c: &Config) -> f64 {
    let n = index.n() as f64;
    p.patterns
        .iter()
        .zip(&p.betas)
        .map(|(pat, &b)| {
            let hom = hom_count(pat, index, c).expect("pattern validated at construction") as f64;
            b * n * n * hom / n.powi(pat.vertex_count() as i32)
        })
        .sum()
}
