//! Glauber (heat-bath) dynamics for the scalar two-star model.
//!
//! Each update picks a uniform edge `i` and resamples it from
//! `P(x_i = 1 | rest) = σ((α/n) Σ_{j ~ i} x_j + h)`. For `i = {u, v}` the
//! neighbour sum is `deg(u) + deg(v) − 2x_i`, so keeping vertex degrees
//! makes every update O(1).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{ExactSystem, ScalarParams};
use crate::graph::{Config, EdgeIndex};
use crate::numeric::sigmoid;

pub const DEFAULT_BURN_IN: u64 = 1000;
pub const DEFAULT_THINNING: u64 = 10;

/// Bound on exact second differences of `m_n` in the concavity scan.
pub const CONCAVITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub params: ScalarParams,
    /// Total sweeps per chain, burn-in included. One sweep is `m` updates.
    pub sweeps: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub chains: usize,
}

impl ChainSpec {
    /// Spec with the default burn-in and thinning.
    pub fn new(n: usize, alpha: f64, h: f64, sweeps: u64, chains: usize, seed: u64) -> Result<Self> {
        ChainSpec {
            n,
            params: ScalarParams::new(alpha, h),
            sweeps,
            burn_in: DEFAULT_BURN_IN,
            thinning: DEFAULT_THINNING,
            seed,
            chains,
        }
        .validated()
    }

    pub fn with_burn_in(mut self, burn_in: u64) -> Result<Self> {
        self.burn_in = burn_in;
        self.validated()
    }

    pub fn with_thinning(mut self, thinning: u64) -> Result<Self> {
        self.thinning = thinning;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let bad = |msg: String| Err(Error::ChainSpec(msg));
        if self.n < 2 {
            return bad(format!("n = {} has no edges", self.n));
        }
        if self.sweeps <= self.burn_in {
            return bad(format!(
                "sweeps {} must exceed burn-in {}",
                self.sweeps, self.burn_in
            ));
        }
        if self.thinning == 0 {
            return bad("thinning must be at least 1".into());
        }
        if self.chains == 0 {
            return bad("need at least one chain".into());
        }
        if !self.params.alpha.is_finite() || !self.params.h.is_finite() {
            return bad("non-finite parameters".into());
        }
        Ok(self)
    }

    /// Seed of chain `k`, a hash of the master seed and the index.
    pub fn chain_seed(&self, k: usize) -> u64 {
        splitmix64(self.seed ^ splitmix64(k as u64 ^ 0xA076_1D64_78BD_642F))
    }

    pub fn samples_per_chain(&self) -> u64 {
        (self.sweeps - self.burn_in) / self.thinning
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `P(x_i = 1 | rest)` under the scalar two-star measure.
pub fn conditional_prob(index: &EdgeIndex, c: &Config, edge: usize, params: ScalarParams) -> f64 {
    let on = index.partners(edge).iter().filter(|&&j| c.get(j)).count();
    sigmoid(params.alpha / index.n() as f64 * on as f64 + params.h)
}

/// A single chain's state with cached degrees and statistics.
#[derive(Debug, Clone)]
pub struct Chain<'a> {
    index: &'a EdgeIndex,
    params: ScalarParams,
    coef: f64,
    x: Vec<bool>,
    deg: Vec<u32>,
    edges: u64,
    wedges: u64,
    rng: ChaCha8Rng,
}

impl<'a> Chain<'a> {
    /// Starts from independent fair coin flips.
    pub fn new(index: &'a EdgeIndex, params: ScalarParams, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<bool> = (0..index.m()).map(|_| rng.gen_bool(0.5)).collect();
        let mut chain = Chain {
            index,
            params,
            coef: params.alpha / index.n() as f64,
            deg: vec![0; index.n()],
            x: vec![false; index.m()],
            edges: 0,
            wedges: 0,
            rng,
        };
        for (e, on) in x.into_iter().enumerate() {
            chain.set(e, on);
        }
        chain
    }

    pub fn from_config(index: &'a EdgeIndex, params: ScalarParams, c: &Config, seed: u64) -> Self {
        let mut chain = Chain {
            index,
            params,
            coef: params.alpha / index.n() as f64,
            deg: vec![0; index.n()],
            x: vec![false; index.m()],
            edges: 0,
            wedges: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        for e in c.ones() {
            chain.set(e, true);
        }
        chain
    }

    #[inline]
    fn set(&mut self, e: usize, on: bool) {
        if self.x[e] == on {
            return;
        }
        let (u, v) = self.index.pair_of(e);
        if on {
            // new wedges: one per present edge at each endpoint
            self.wedges += u64::from(self.deg[u] + self.deg[v]);
            self.deg[u] += 1;
            self.deg[v] += 1;
            self.edges += 1;
        } else {
            self.deg[u] -= 1;
            self.deg[v] -= 1;
            self.wedges -= u64::from(self.deg[u] + self.deg[v]);
            self.edges -= 1;
        }
        self.x[e] = on;
    }

    /// Heat-bath update of edge `e`.
    #[inline]
    pub fn update(&mut self, e: usize) {
        let (u, v) = self.index.pair_of(e);
        let nb = self.deg[u] + self.deg[v] - 2 * u32::from(self.x[e]);
        let p = sigmoid(self.coef * f64::from(nb) + self.params.h);
        let on = self.rng.gen::<f64>() < p;
        self.set(e, on);
    }

    /// `m` updates at uniformly chosen edges.
    pub fn sweep(&mut self) {
        let m = self.index.m();
        for _ in 0..m {
            let e = self.rng.gen_range(0..m);
            self.update(e);
        }
    }

    pub fn edge_count(&self) -> u64 {
        self.edges
    }

    /// Number of present wedges, `Σ_v C(deg v, 2)`.
    pub fn wedge_count(&self) -> u64 {
        self.wedges
    }

    pub fn config(&self) -> Config {
        let mut c = Config::empty(self.x.len());
        for (e, &on) in self.x.iter().enumerate() {
            c.set(e, on);
        }
        c
    }
}

/// One sweep of Glauber dynamics applied to `c`.
pub fn glauber_sweep<R: Rng>(index: &EdgeIndex, c: &mut Config, params: ScalarParams, rng: &mut R) {
    let m = index.m();
    for _ in 0..m {
        let e = rng.gen_range(0..m);
        let p = conditional_prob(index, c, e, params);
        let on = rng.gen::<f64>() < p;
        c.set(e, on);
    }
}

/// Thinned samples of a single chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSeries {
    pub seed: u64,
    pub edges: Vec<u64>,
    pub wedges: Vec<u64>,
}

impl ChainSeries {
    /// `2E_n / n²` per sample.
    pub fn densities(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let scale = 2.0 / (n * n) as f64;
        self.edges.iter().map(move |&e| e as f64 * scale)
    }
}

pub fn run_chain(spec: &ChainSpec, index: &EdgeIndex, k: usize) -> ChainSeries {
    let seed = spec.chain_seed(k);
    let mut chain = Chain::new(index, spec.params, seed);
    for _ in 0..spec.burn_in {
        chain.sweep();
    }
    let count = spec.samples_per_chain() as usize;
    let mut edges = Vec::with_capacity(count);
    let mut wedges = Vec::with_capacity(count);
    for _ in 0..count {
        for _ in 0..spec.thinning {
            chain.sweep();
        }
        edges.push(chain.edge_count());
        wedges.push(chain.wedge_count());
    }
    ChainSeries { seed, edges, wedges }
}

/// Mean and standard error from per-chain means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    fn from_chain_means(means: &[f64]) -> Self {
        let k = means.len() as f64;
        let mean = means.iter().sum::<f64>() / k;
        let se = if means.len() > 1 {
            let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            f64::NAN
        };
        Estimate { mean, se }
    }

    /// `|mean − target| ≤ z · se`.
    pub fn within(&self, target: f64, z: f64) -> bool {
        (self.mean - target).abs() <= z * self.se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSummary {
    pub spec: ChainSpec,
    pub chains: Vec<ChainSeries>,
    /// Edge density `2E_n / n²`.
    pub density: Estimate,
    /// `E[x_i] = E_n / m`.
    pub edge_probability: Estimate,
    pub edge_count: Estimate,
    pub wedge_count: Estimate,
    /// Sample variance of `√2 (E_n − mean) / n` over all pooled samples.
    pub standardized_variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

pub fn run_chains(spec: &ChainSpec) -> Result<ChainSummary> {
    let spec = spec.clone().validated()?;
    let index = EdgeIndex::new(spec.n);
    let chains: Vec<ChainSeries> = (0..spec.chains)
        .into_par_iter()
        .map(|k| run_chain(&spec, &index, k))
        .collect();
    Ok(summarize(spec, chains))
}

fn mean_of(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = xs.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    s / k as f64
}

fn summarize(spec: ChainSpec, chains: Vec<ChainSeries>) -> ChainSummary {
    let n = spec.n;
    let m = (n * (n - 1) / 2) as f64;
    let per = |f: &dyn Fn(&ChainSeries) -> f64| -> Estimate {
        Estimate::from_chain_means(&chains.iter().map(f).collect::<Vec<_>>())
    };
    let edge_count = per(&|c| mean_of(c.edges.iter().map(|&e| e as f64)));
    let wedge_count = per(&|c| mean_of(c.wedges.iter().map(|&w| w as f64)));
    let density = per(&|c| mean_of(c.densities(n)));
    let edge_probability = Estimate {
        mean: edge_count.mean / m,
        se: edge_count.se / m,
    };

    let centre = edge_count.mean;
    let scale = 2f64.sqrt() / n as f64;
    let std: Vec<f64> = chains
        .iter()
        .flat_map(|c| c.edges.iter().map(|&e| scale * (e as f64 - centre)))
        .collect();
    let (variance, skewness, excess_kurtosis) = moments(&std);
    ChainSummary {
        spec,
        chains,
        density,
        edge_probability,
        edge_count,
        wedge_count,
        standardized_variance: variance,
        skewness,
        excess_kurtosis,
    }
}

/// Unbiased variance, sample skewness and excess kurtosis.
fn moments(xs: &[f64]) -> (f64, f64, f64) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in xs {
        let d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let (m2, m3, m4) = (m2 / k, m3 / k, m4 / k);
    (m2 * k / (k - 1.0), m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanMode {
    Exact,
    Mcmc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityRow {
    pub alpha: f64,
    pub h: f64,
    pub n: usize,
    /// `m_n = E(E_n) / n²`.
    pub m_n: f64,
    /// Standard error (MCMC mode only).
    pub se: Option<f64>,
    /// `m_n(h−Δ) − 2m_n(h) + m_n(h+Δ)` at interior grid points.
    pub second_difference: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityScan {
    pub mode: ScanMode,
    pub rows: Vec<ConcavityRow>,
}

impl ConcavityScan {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Scans `m_n(α, ·)` over an increasing uniform `h` grid.
///
/// Exact mode requires every interior second difference to be at most
/// [`CONCAVITY_TOL`]. MCMC mode requires `m_n` to be non-decreasing within
/// three combined standard errors between neighbouring grid points; its
/// second differences are reported but not asserted.
pub fn concavity_scan(
    alpha: f64,
    hs: &[f64],
    n: usize,
    mode: ScanMode,
    mcmc: Option<&ChainSpec>,
) -> Result<ConcavityScan> {
    if hs.len() >= 3 {
        let step = hs[1] - hs[0];
        let uniform = step > 0.0
            && hs
                .windows(2)
                .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
        if !uniform {
            return Err(Error::InvalidParams(
                "h grid must be increasing and uniform".into(),
            ));
        }
    }
    let n2 = (n * n) as f64;
    let values: Vec<(f64, Option<f64>)> = match mode {
        ScanMode::Exact => hs
            .iter()
            .map(|&h| {
                let sys = ExactSystem::scalar(n, alpha, h)?;
                let mean_edges = sys.expect_mask(|mask| f64::from(mask.count_ones()));
                Ok((mean_edges / n2, None))
            })
            .collect::<Result<_>>()?,
        ScanMode::Mcmc => {
            let base = mcmc.ok_or_else(|| Error::InvalidParams("mcmc mode needs a chain spec".into()))?;
            hs.iter()
                .map(|&h| {
                    let spec = ChainSpec {
                        n,
                        params: ScalarParams::new(alpha, h),
                        ..base.clone()
                    };
                    let s = run_chains(&spec)?;
                    Ok((s.edge_count.mean / n2, Some(s.edge_count.se / n2)))
                })
                .collect::<Result<_>>()?
        }
    };
    let rows = hs
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            let (m_n, se) = values[k];
            let second = (k > 0 && k + 1 < hs.len()).then(|| values[k - 1].0 - 2.0 * m_n + values[k + 1].0);
            let pass = match mode {
                ScanMode::Exact => second.map_or(true, |d| d <= CONCAVITY_TOL),
                ScanMode::Mcmc => match k.checked_sub(1).map(|p| values[p]) {
                    Some((prev, prev_se)) => {
                        let band = 3.0 * (se.unwrap_or(0.0).powi(2) + prev_se.unwrap_or(0.0).powi(2)).sqrt();
                        m_n - prev >= -band
                    }
                    None => true,
                },
            };
            ConcavityRow {
                alpha,
                h,
                n,
                m_n,
                se,
                second_difference: second,
                pass,
            }
        })
        .collect();
    Ok(ConcavityScan { mode, rows })
}
