//! Ursell functions and correlation-inequality verifiers.
//!
//! Every verifier returns an [`InequalityReport`] whose `worst_violation`
//! is signed so that positive values are violations: the report passes iff
//! `worst_violation <= SLACK`.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{Coupling, ExactSystem, GeneralizedParams, ScalarParams};
use crate::graph::Config;

/// Numerical slack for inequality verdicts.
pub const SLACK: f64 = 1e-12;

/// Exhaustive FKG-lattice checks visit `4^k` pairs; beyond this many active
/// edges pairs are sampled.
pub const FKG_EXHAUSTIVE_CAP: usize = 12;

/// Monotonicity audits of caller functionals are exhaustive up to this size.
pub const MONOTONE_AUDIT_CAP: usize = 8;

/// Exhaustive partition-function submodularity sweeps (`3^k` restrictions).
pub const SUBMODULAR_EXHAUSTIVE_CAP: usize = 10;

/// Third-order stencils need `m ≤ 15` (`m³` Ursell terms).
pub const DERIVATIVE_CAP: usize = 15;

/// Finite-difference steps for derivative orders 1, 2, 3.
pub const FD_STEPS: [f64; 3] = [1e-4, 1e-3, 1e-2];

/// Relative tolerances for derivative orders 1, 2, 3.
pub const FD_TOLERANCES: [f64; 3] = [1e-8, 1e-6, 1e-5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InequalityTag {
    FkgLattice,
    Fkg,
    Gks,
    Ghs,
    VolMono,
    PartSubmod,
    PairCorrelation,
    AlphaMonotone,
    ZzCorrelation,
    ZvCorrelation,
    SectorMonotone,
    PLattice,
}

impl InequalityTag {
    pub fn as_str(self) -> &'static str {
        match self {
            InequalityTag::FkgLattice => "fkg-lattice",
            InequalityTag::Fkg => "fkg",
            InequalityTag::Gks => "gks",
            InequalityTag::Ghs => "ghs",
            InequalityTag::VolMono => "vol-mono",
            InequalityTag::PartSubmod => "part-submod",
            InequalityTag::PairCorrelation => "pair-correlation",
            InequalityTag::AlphaMonotone => "alpha-monotone",
            InequalityTag::ZzCorrelation => "zz-correlation",
            InequalityTag::ZvCorrelation => "zv-correlation",
            InequalityTag::SectorMonotone => "sector-monotone",
            InequalityTag::PLattice => "p-lattice",
        }
    }
}

/// Parameter point that produced a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamPoint {
    pub n: usize,
    pub model: String,
    pub alpha: Option<f64>,
    pub h: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub active_edges: usize,
}

impl ParamPoint {
    pub fn of(sys: &ExactSystem) -> Self {
        let (model, alpha, h, betas) = match sys.coupling() {
            Coupling::Scalar(p) => ("two-star".to_string(), Some(p.alpha), Some(p.h), None),
            Coupling::Generalized(_) => ("generalized".to_string(), None, None, None),
            Coupling::Ergm(e) => {
                let name = e
                    .patterns()
                    .iter()
                    .map(|p| p.name())
                    .collect::<Vec<_>>()
                    .join("+");
                (name, None, None, Some(e.betas().to_vec()))
            }
        };
        ParamPoint {
            n: sys.n(),
            model,
            alpha,
            h,
            betas,
            active_edges: sys.active().len(),
        }
    }

    pub fn label(&self) -> String {
        match (&self.alpha, &self.h, &self.betas) {
            (Some(a), Some(h), _) => format!("n={} alpha={a} h={h}", self.n),
            (_, _, Some(b)) => format!("n={} {} betas={b:?}", self.n, self.model),
            _ => format!("n={} {}", self.n, self.model),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_violation(v: f64) -> Self {
        if v <= SLACK {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub tag: InequalityTag,
    pub point: ParamPoint,
    /// Largest signed violation; `<= SLACK` means the inequality held.
    pub worst_violation: f64,
    /// Indices or subsets attaining the worst violation.
    pub witness: String,
    pub checked: u64,
    /// Whether the sufficient conditions of the inequality hold at this point.
    pub hypotheses_met: bool,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl InequalityReport {
    pub(crate) fn new(tag: InequalityTag, sys: &ExactSystem, hypotheses_met: bool) -> Self {
        InequalityReport {
            tag,
            point: ParamPoint::of(sys),
            worst_violation: f64::NEG_INFINITY,
            witness: String::new(),
            checked: 0,
            hypotheses_met,
            verdict: Verdict::Pass,
            note: None,
        }
    }

    pub(crate) fn observe(&mut self, violation: f64, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if violation > self.worst_violation {
            self.worst_violation = violation;
            self.witness = witness();
        }
    }

    pub(crate) fn finish(mut self) -> Self {
        if self.checked == 0 {
            self.worst_violation = 0.0;
        }
        self.verdict = Verdict::from_violation(self.worst_violation);
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    /// Folds another report on the same point and tag into this one.
    pub fn absorb(mut self, other: &InequalityReport) -> Self {
        self.checked += other.checked;
        if other.worst_violation > self.worst_violation {
            self.worst_violation = other.worst_violation;
            self.witness = other.witness.clone();
        }
        self.hypotheses_met &= other.hypotheses_met;
        self.verdict = Verdict::from_violation(self.worst_violation);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrsellValue {
    pub order: usize,
    pub indices: Vec<usize>,
    pub value: f64,
}

/// Moment lookup: `E[x_A]` for local masks, from the cached table when the
/// system is small enough, else by direct enumeration.
struct Moments<'a> {
    sys: &'a ExactSystem,
    table: Option<std::sync::Arc<Vec<f64>>>,
}

impl<'a> Moments<'a> {
    fn new(sys: &'a ExactSystem) -> Self {
        Moments {
            sys,
            table: sys.moments().ok(),
        }
    }

    fn get(&self, mask: u64) -> f64 {
        match &self.table {
            Some(t) => t[mask as usize],
            None => self.sys.expect_mask(|x| if x & mask == mask { 1.0 } else { 0.0 }),
        }
    }

    fn ursell(&self, locals: &[usize]) -> f64 {
        let bit = |k: usize| 1u64 << k;
        match *locals {
            [i] => self.get(bit(i)),
            [i, j] => self.get(bit(i) | bit(j)) - self.get(bit(i)) * self.get(bit(j)),
            [i, j, k] => {
                let (ei, ej, ek) = (self.get(bit(i)), self.get(bit(j)), self.get(bit(k)));
                self.get(bit(i) | bit(j) | bit(k))
                    - ei * self.get(bit(j) | bit(k))
                    - ej * self.get(bit(i) | bit(k))
                    - ek * self.get(bit(i) | bit(j))
                    + 2.0 * ei * ej * ek
            }
            _ => unreachable!("order checked by caller"),
        }
    }
}

fn locals(sys: &ExactSystem, edges: &[usize]) -> Result<Vec<usize>> {
    edges
        .iter()
        .map(|&e| {
            sys.index().check_edge(e)?;
            sys.local_of(e).ok_or(Error::InactiveEdge { edge: e })
        })
        .collect()
}

/// Ursell function `u_ℓ(i₁, …, i_ℓ)` for `ℓ ≤ 3` (indices may repeat).
pub fn ursell(sys: &ExactSystem, indices: &[usize]) -> Result<UrsellValue> {
    if indices.is_empty() || indices.len() > 3 {
        return Err(Error::UrsellOrder(indices.len()));
    }
    let loc = locals(sys, indices)?;
    Ok(UrsellValue {
        order: indices.len(),
        indices: indices.to_vec(),
        value: Moments::new(sys).ursell(&loc),
    })
}

/// GKS for one pair of subsets: `E[x_A x_B] ≥ E[x_A] E[x_B]`.
pub fn verify_gks(sys: &ExactSystem, a: &[usize], b: &[usize]) -> Result<InequalityReport> {
    let (ma, mb) = (sys.local_mask(a)?, sys.local_mask(b)?);
    let mom = Moments::new(sys);
    let mut r = InequalityReport::new(InequalityTag::Gks, sys, sys.alpha_nonnegative());
    let v = mom.get(ma) * mom.get(mb) - mom.get(ma | mb);
    r.observe(v, || format!("A={a:?} B={b:?}"));
    Ok(r.finish())
}

/// All subsets of the active edges with at most `max_size` elements, as
/// local masks in rank order.
fn small_subsets(k: usize, max_size: usize) -> Vec<u64> {
    let mut out = Vec::new();
    for size in 0..=max_size.min(k) {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            out.push(combo.iter().fold(0u64, |m, &i| m | 1 << i));
            // next combination in lexicographic order
            let mut i = size;
            while i > 0 && combo[i - 1] == k - size + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..size {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    out
}

fn edges_of(sys: &ExactSystem, mask: u64) -> Vec<usize> {
    sys.active()
        .iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, &e)| e)
        .collect()
}

/// GKS over every unordered pair of subsets with `|A|, |B| ≤ max_size`.
pub fn verify_gks_exhaustive(sys: &ExactSystem, max_size: usize) -> InequalityReport {
    let subsets = small_subsets(sys.active().len(), max_size);
    let mom = Moments::new(sys);
    let means: Vec<f64> = subsets.iter().map(|&s| mom.get(s)).collect();
    let mut r = InequalityReport::new(InequalityTag::Gks, sys, sys.alpha_nonnegative());
    for (p, &a) in subsets.iter().enumerate() {
        for (q, &b) in subsets.iter().enumerate().skip(p) {
            let v = means[p] * means[q] - mom.get(a | b);
            r.observe(v, || format!("A={:?} B={:?}", edges_of(sys, a), edges_of(sys, b)));
        }
    }
    r.note = Some(format!("subset size cap {max_size}"));
    r.finish()
}

/// `u₂(i, j) ≥ 0` for every pair of active edges (including `i = j`).
pub fn verify_pair_correlations(sys: &ExactSystem) -> InequalityReport {
    let k = sys.active().len();
    let mom = Moments::new(sys);
    let mut r = InequalityReport::new(InequalityTag::PairCorrelation, sys, sys.alpha_nonnegative());
    for i in 0..k {
        for j in i..k {
            let u2 = mom.ursell(&[i, j]);
            r.observe(-u2, || format!("({}, {})", sys.active()[i], sys.active()[j]));
        }
    }
    r.finish()
}

/// GHS for one triple: `u₃(i, j, k) ≤ 0`.
pub fn verify_ghs(sys: &ExactSystem, i: usize, j: usize, k: usize) -> Result<InequalityReport> {
    let u3 = ursell(sys, &[i, j, k])?.value;
    let mut r = InequalityReport::new(
        InequalityTag::Ghs,
        sys,
        sys.alpha_nonnegative() && sys.field_nonnegative(),
    );
    r.observe(u3, || format!("({i}, {j}, {k})"));
    Ok(r.finish())
}

/// GHS over all triples `i ≤ j ≤ k` of active edges (Ursell functions are
/// symmetric, so this covers every ordered triple).
pub fn verify_ghs_exhaustive(sys: &ExactSystem) -> InequalityReport {
    let n = sys.active().len();
    let mom = Moments::new(sys);
    let act = sys.active();
    let mut r = InequalityReport::new(
        InequalityTag::Ghs,
        sys,
        sys.alpha_nonnegative() && sys.field_nonnegative(),
    );
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                let u3 = mom.ursell(&[i, j, k]);
                r.observe(u3, || format!("({}, {}, {})", act[i], act[j], act[k]));
            }
        }
    }
    r.finish()
}

/// How [`verify_fkg_lattice`] chooses configuration pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Exhaustive when `k ≤ FKG_EXHAUSTIVE_CAP`, otherwise sampled.
    Auto {
        samples: u64,
        seed: u64,
    },
    Sampled {
        samples: u64,
        seed: u64,
    },
}

impl Default for PairMode {
    fn default() -> Self {
        PairMode::Auto {
            samples: 1 << 20,
            seed: 0,
        }
    }
}

/// FKG lattice condition `μ(x∨y) μ(x∧y) ≥ μ(x) μ(y)`, compared in log space.
pub fn verify_fkg_lattice(sys: &ExactSystem, mode: PairMode) -> InequalityReport {
    let k = sys.active().len();
    let mut r = InequalityReport::new(InequalityTag::FkgLattice, sys, sys.alpha_nonnegative());
    let gap = |x: u64, y: u64, e: &dyn Fn(u64) -> f64| e(x) + e(y) - e(x | y) - e(x & y);
    let witness = |x: u64, y: u64| format!("x={:?} y={:?}", sys.config_of(x), sys.config_of(y));
    match mode {
        PairMode::Auto { .. } if k <= FKG_EXHAUSTIVE_CAP => {
            let table: Vec<f64> = (0..sys.num_configs()).map(|m| sys.energy(m)).collect();
            let e = |m: u64| table[m as usize];
            for x in 0..sys.num_configs() {
                for y in 0..sys.num_configs() {
                    r.observe(gap(x, y, &e), || witness(x, y));
                }
            }
            r.note = Some("exhaustive".into());
        }
        PairMode::Auto { samples, seed } | PairMode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let span = sys.num_configs();
            let e = |m: u64| sys.energy(m);
            for _ in 0..samples {
                let (x, y) = (rng.gen_range(0..span), rng.gen_range(0..span));
                r.observe(gap(x, y, &e), || witness(x, y));
            }
            r.note = Some(format!("sampled {samples} pairs, seed {seed}"));
        }
    }
    r.finish()
}

/// A named real functional of the configuration.
pub struct Functional<'a> {
    pub name: String,
    pub f: Box<dyn Fn(&Config) -> f64 + Sync + 'a>,
}

impl<'a> Functional<'a> {
    pub fn new(name: &str, f: impl Fn(&Config) -> f64 + Sync + 'a) -> Self {
        Functional {
            name: name.to_string(),
            f: Box::new(f),
        }
    }

    pub fn eval(&self, c: &Config) -> f64 {
        (self.f)(c)
    }
}

/// Checks `f(x) ≤ f(y)` for every comparable pair `x ≤ y` of configurations
/// supported on the active set.
pub fn audit_increasing(sys: &ExactSystem, f: &Functional<'_>) -> Result<()> {
    let values: Vec<f64> = (0..sys.num_configs())
        .map(|m| f.eval(&sys.config_of(m)))
        .collect();
    for y in 0..sys.num_configs() {
        // all submasks x of y
        let mut x = y;
        loop {
            if values[x as usize] > values[y as usize] {
                return Err(Error::NotMonotone {
                    name: f.name.clone(),
                    lower: format!("{:?}", sys.config_of(x)),
                    upper: format!("{:?}", sys.config_of(y)),
                    f_lower: values[x as usize],
                    f_upper: values[y as usize],
                });
            }
            if x == 0 {
                break;
            }
            x = (x - 1) & y;
        }
    }
    Ok(())
}

/// FKG inequality `E[fg] ≥ E[f] E[g]` for increasing functionals. The
/// monotonicity of `f` and `g` is audited exhaustively when the system has
/// at most [`MONOTONE_AUDIT_CAP`] active edges; larger systems trust the
/// caller and say so in the report note.
pub fn verify_fkg_monotone(
    sys: &ExactSystem,
    f: &Functional<'_>,
    g: &Functional<'_>,
) -> Result<InequalityReport> {
    let audited = sys.active().len() <= MONOTONE_AUDIT_CAP;
    if audited {
        audit_increasing(sys, f)?;
        audit_increasing(sys, g)?;
    }
    let ef = sys.expect(|c| f.eval(c));
    let eg = sys.expect(|c| g.eval(c));
    let efg = sys.expect(|c| f.eval(c) * g.eval(c));
    let mut r = InequalityReport::new(InequalityTag::Fkg, sys, sys.alpha_nonnegative());
    r.observe(ef * eg - efg, || format!("f={} g={}", f.name, g.name));
    r.note = Some(if audited {
        "monotonicity audited exhaustively".into()
    } else {
        "monotonicity declared by caller, not audited".into()
    });
    Ok(r.finish())
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let b: BTreeSet<_> = b.iter().collect();
    a.iter().all(|e| b.contains(e))
}

/// Volume monotonicity `E_A[x_Λ] ≤ E_B[x_Λ]` for `Λ ⊆ A ⊆ B`, where the
/// restricted systems are built from `sys` (same coupling and `n`).
pub fn verify_volume_monotonicity(
    sys: &ExactSystem,
    lambda: &[usize],
    a: &[usize],
    b: &[usize],
) -> Result<InequalityReport> {
    if !is_subset(lambda, a) {
        return Err(Error::NotNested(format!("Λ={lambda:?} ⊄ A={a:?}")));
    }
    if !is_subset(a, b) {
        return Err(Error::NotNested(format!("A={a:?} ⊄ B={b:?}")));
    }
    let sys_a = sys.restrict(a)?;
    let sys_b = sys.restrict(b)?;
    let ea = sys_a.expect_monomial(lambda)?;
    let eb = sys_b.expect_monomial(lambda)?;
    let mut r = InequalityReport::new(InequalityTag::VolMono, sys, sys.alpha_nonnegative());
    r.observe(ea - eb, || {
        format!("Λ={lambda:?} A={a:?} B={b:?}: E_A={ea} E_B={eb}")
    });
    Ok(r.finish())
}

/// Result of the partition-function comparison for one pair `(E, F)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmodularityReport {
    pub report: InequalityReport,
    /// `L = ln Z_{E∪F} + ln Z_{E∩F} − ln Z_E − ln Z_F`.
    pub l_value: f64,
}

/// `Z_E Z_F ≤ Z_{E∪F} Z_{E∩F}` for edge subsets of the active set.
pub fn verify_partition_submodularity(
    sys: &ExactSystem,
    e: &[usize],
    f: &[usize],
) -> Result<SubmodularityReport> {
    let union: BTreeSet<usize> = e.iter().chain(f).copied().collect();
    let fset: BTreeSet<usize> = f.iter().copied().collect();
    let inter: Vec<usize> = e.iter().copied().filter(|x| fset.contains(x)).collect();
    let union: Vec<usize> = union.into_iter().collect();
    let lz = |s: &[usize]| sys.restrict(s).map(|r| r.log_partition());
    let l = lz(&union)? + lz(&inter)? - lz(e)? - lz(f)?;
    let mut r = InequalityReport::new(InequalityTag::PartSubmod, sys, sys.alpha_nonnegative());
    r.observe(-l, || format!("E={e:?} F={f:?}"));
    Ok(SubmodularityReport {
        report: r.finish(),
        l_value: l,
    })
}

/// Log-partition functions of every restriction of `sys`, indexed by local
/// mask.
pub fn restricted_log_partitions(sys: &ExactSystem) -> Result<Vec<f64>> {
    let k = sys.active().len();
    if k > SUBMODULAR_EXHAUSTIVE_CAP {
        return Err(Error::SizeCap {
            what: "exhaustive restriction sweep",
            got: k,
            cap: SUBMODULAR_EXHAUSTIVE_CAP,
        });
    }
    (0..1u64 << k)
        .map(|mask| sys.restrict(&edges_of(sys, mask)).map(|s| s.log_partition()))
        .collect()
}

/// Partition-function submodularity over all `4^k` ordered subset pairs.
pub fn verify_partition_submodularity_exhaustive(sys: &ExactSystem) -> Result<InequalityReport> {
    let lz = restricted_log_partitions(sys)?;
    let mut r = InequalityReport::new(InequalityTag::PartSubmod, sys, sys.alpha_nonnegative());
    for e in 0..lz.len() {
        for f in 0..lz.len() {
            let l = lz[e | f] + lz[e & f] - lz[e] - lz[f];
            r.observe(-l, || {
                format!("E={:?} F={:?}", edges_of(sys, e as u64), edges_of(sys, f as u64))
            });
        }
    }
    r.note = Some("exhaustive".into());
    Ok(r.finish())
}

/// Finite-difference check of `∂_{α_ij} E_A[x_Λ] = (1/n) Cov_A(x_Λ, x_i x_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSensitivity {
    pub wedge: (usize, usize),
    pub lambda: Vec<usize>,
    pub finite_difference: f64,
    pub covariance_form: f64,
    pub abs_error: f64,
}

/// Central difference (step `delta`) of `E_A[x_Λ]` in the coupling of the
/// wedge `{i, j}`, against the covariance expression.
pub fn alpha_sensitivity(
    sys: &ExactSystem,
    lambda: &[usize],
    wedge: (usize, usize),
    delta: f64,
) -> Result<AlphaSensitivity> {
    let (i, j) = wedge;
    let pos = sys
        .wedges()
        .position(i, j)
        .ok_or_else(|| Error::InvalidParams(format!("({i}, {j}) is not a wedge")))?;
    let base = match sys.coupling() {
        Coupling::Scalar(p) => GeneralizedParams::constant(sys.n(), p.alpha, p.h),
        Coupling::Generalized(g) => g.clone(),
        Coupling::Ergm(_) => return Err(Error::NeedsPairwise("alpha sensitivity")),
    };
    let shifted = |d: f64| -> Result<f64> {
        let mut g = base.clone();
        g.alpha_mut()[pos] += d;
        sys.with_coupling(g)?.expect_monomial(lambda)
    };
    let fd = (shifted(delta)? - shifted(-delta)?) / (2.0 * delta);
    let mut both: Vec<usize> = lambda.to_vec();
    both.extend([i, j]);
    let cov = sys.expect_monomial(&both)? - sys.expect_monomial(lambda)? * sys.expect_monomial(&[i, j])?;
    let cov = cov / sys.n() as f64;
    Ok(AlphaSensitivity {
        wedge,
        lambda: lambda.to_vec(),
        finite_difference: fd,
        covariance_form: cov,
        abs_error: (fd - cov).abs(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeRow {
    /// 1, 2, 3 for h-derivatives of `n² f`; 0 for `∂_α f`.
    pub order: usize,
    pub step: f64,
    pub finite_difference: f64,
    pub exact: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    pub point: ParamPoint,
    pub rows: Vec<DerivativeRow>,
}

impl DerivativeReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn rel_error(fd: f64, exact: f64) -> f64 {
    (fd - exact).abs() / exact.abs().max(1e-6)
}

/// Compares finite differences of `n² f = ln Z` in `h` (orders 1–3) with
/// the sums of Ursell functions, and `∂_α f` with `E[W]/n³`.
///
/// Orders 1 and 2 use the three-point central stencils; order 3 uses the
/// six-point central stencil, whose `O(δ⁴)` truncation error is needed to
/// meet the relative tolerance at `δ = 10⁻²`.
pub fn derivative_ursell_check(sys: &ExactSystem) -> Result<DerivativeReport> {
    let p = sys
        .scalar_params()
        .ok_or_else(|| Error::InvalidParams("derivative check needs scalar parameters".into()))?;
    let k = sys.active().len();
    if k > DERIVATIVE_CAP {
        return Err(Error::SizeCap {
            what: "derivative check",
            got: k,
            cap: DERIVATIVE_CAP,
        });
    }
    let lz = |alpha: f64, h: f64| -> Result<f64> {
        Ok(sys.with_coupling(ScalarParams::new(alpha, h))?.log_partition())
    };
    let f_h = |d: f64| lz(p.alpha, p.h + d);

    let mom = Moments::new(sys);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut s3 = 0.0;
    for i in 0..k {
        s1 += mom.ursell(&[i]);
        for j in 0..k {
            s2 += mom.ursell(&[i, j]);
            for l in 0..k {
                s3 += mom.ursell(&[i, j, l]);
            }
        }
    }

    let [d1, d2, d3] = FD_STEPS;
    let fd1 = (f_h(d1)? - f_h(-d1)?) / (2.0 * d1);
    let fd2 = (f_h(d2)? - 2.0 * f_h(0.0)? + f_h(-d2)?) / (d2 * d2);
    let fd3 = (-f_h(3.0 * d3)? + 8.0 * f_h(2.0 * d3)? - 13.0 * f_h(d3)? + 13.0 * f_h(-d3)?
        - 8.0 * f_h(-2.0 * d3)?
        + f_h(-3.0 * d3)?)
        / (8.0 * d3 * d3 * d3);

    let n = sys.n() as f64;
    let da = FD_STEPS[0];
    let fda = (lz(p.alpha + da, p.h)? - lz(p.alpha - da, p.h)?) / (2.0 * da) / (n * n);
    let wedges: Vec<(usize, usize)> = sys
        .wedges()
        .pairs()
        .iter()
        .filter_map(|&(i, j)| Some((sys.local_of(i)?, sys.local_of(j)?)))
        .collect();
    let wedge_density = wedges.iter().map(|&(i, j)| mom.get(1 << i | 1 << j)).sum::<f64>() / (n * n * n);

    let row = |order: usize, step: f64, fd: f64, exact: f64, tol: f64| {
        let rel = rel_error(fd, exact);
        DerivativeRow {
            order,
            step,
            finite_difference: fd,
            exact,
            rel_error: rel,
            tolerance: tol,
            pass: rel <= tol,
        }
    };
    let [t1, t2, t3] = FD_TOLERANCES;
    let alpha_abs = (fda - wedge_density).abs();
    Ok(DerivativeReport {
        point: ParamPoint::of(sys),
        rows: vec![
            row(1, d1, fd1, s1, t1),
            row(2, d2, fd2, s2, t2),
            row(3, d3, fd3, s3, t3),
            DerivativeRow {
                order: 0,
                step: da,
                finite_difference: fda,
                exact: wedge_density,
                rel_error: alpha_abs,
                tolerance: t1,
                pass: alpha_abs <= t1,
            },
        ],
    })
}

/// One point of the GHS-necessity explorer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRecord {
    pub point: ParamPoint,
    pub min_edge_prob: f64,
    pub worst_u3: f64,
    pub witness: String,
    pub ghs_violated: bool,
    pub below_half: bool,
    /// `ghs_violated == below_half`: the datapoint is consistent with the
    /// "E[x_i] ≥ 1/2 iff GHS" conjecture.
    pub consistent: bool,
}

/// Records, for each system, the smallest edge probability and the largest
/// third Ursell function. Never asserts anything about the conjecture.
pub fn conjecture_scan(systems: &[ExactSystem]) -> Vec<ConjectureRecord> {
    use rayon::prelude::*;
    systems
        .par_iter()
        .map(|sys| {
            let mom = Moments::new(sys);
            let min_edge_prob = (0..sys.active().len())
                .map(|i| mom.get(1 << i))
                .fold(f64::INFINITY, f64::min);
            let ghs = verify_ghs_exhaustive(sys);
            let ghs_violated = ghs.worst_violation > SLACK;
            let below_half = min_edge_prob < 0.5;
            ConjectureRecord {
                point: ParamPoint::of(sys),
                min_edge_prob,
                worst_u3: ghs.worst_violation,
                witness: ghs.witness,
                ghs_violated,
                below_half,
                consistent: ghs_violated == below_half,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::sigmoid;
    use std::f64::consts::E;

    #[test]
    fn ursell_order_limits() {
        let sys = ExactSystem::scalar(3, 1.0, 0.0).unwrap();
        assert_eq!(ursell(&sys, &[0, 1, 2, 0]).unwrap_err(), Error::UrsellOrder(4));
        assert_eq!(ursell(&sys, &[]).unwrap_err(), Error::UrsellOrder(0));
    }

    #[test]
    fn ursell_examples() {
        let free = ExactSystem::scalar(4, 0.0, 0.3).unwrap();
        assert!(ursell(&free, &[0, 5]).unwrap().value.abs() < 1e-14);
        let flat = ExactSystem::scalar(3, 0.0, 0.0).unwrap();
        assert!(ursell(&flat, &[1, 1, 1]).unwrap().value.abs() < 1e-14);

        let sys = ExactSystem::scalar(3, 3.0, 0.0).unwrap();
        let z = E.powi(3) + 3.0 * E + 4.0;
        let p = (E.powi(3) + 2.0 * E + 1.0) / z;
        let u2 = (E.powi(3) + E) / z - p * p;
        assert!((ursell(&sys, &[0, 1]).unwrap().value - u2).abs() < 1e-13);
        assert!((u2 - 0.0306).abs() < 5e-4);
    }

    #[test]
    fn ghs_counterexample_is_detected() {
        let sys = ExactSystem::scalar(3, 0.0, -1.0).unwrap();
        let r = verify_ghs(&sys, 0, 0, 0).unwrap();
        let p = sigmoid(-1.0);
        assert!((r.worst_violation - p * (1.0 - p) * (1.0 - 2.0 * p)).abs() < 1e-13);
        assert!(!r.passed());
        assert!(!r.hypotheses_met);
    }

    #[test]
    fn fkg_identical_and_comparable_pairs_are_equalities() {
        let sys = ExactSystem::scalar(4, 2.0, -1.0).unwrap();
        for x in [0u64, 5, 17, 63] {
            for y in [x, x | 2, 63] {
                let g = sys.energy(x) + sys.energy(y) - sys.energy(x | y) - sys.energy(x & y);
                assert!(g.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn volume_monotonicity_requires_nesting() {
        let sys = ExactSystem::scalar(4, 1.0, 0.0).unwrap();
        assert!(matches!(
            verify_volume_monotonicity(&sys, &[0], &[1, 2], &[0, 1, 2]),
            Err(Error::NotNested(_))
        ));
        assert!(matches!(
            verify_volume_monotonicity(&sys, &[0], &[0, 1, 2], &[0, 1]),
            Err(Error::NotNested(_))
        ));
        let eq = verify_volume_monotonicity(&sys, &[0], &[0, 1], &[0, 1]).unwrap();
        assert_eq!(eq.worst_violation, 0.0);
    }

    #[test]
    fn submodularity_trivial_cases() {
        let sys = ExactSystem::scalar(4, 2.0, 0.5).unwrap();
        let nested = verify_partition_submodularity(&sys, &[0, 1], &[0, 1, 2]).unwrap();
        assert!(nested.l_value.abs() < 1e-12);
        // (0,1) and (2,3) share no vertex: no wedge joins them
        let idx = sys.index();
        let e = [idx.id_of(0, 1)];
        let f = [idx.id_of(2, 3)];
        let disjoint = verify_partition_submodularity(&sys, &e, &f).unwrap();
        assert!(disjoint.l_value.abs() < 1e-12);
    }

    #[test]
    fn monotone_audit_rejects_decreasing_functionals() {
        let sys = ExactSystem::scalar(3, 1.0, 0.0).unwrap();
        let dec = Functional::new("missing", |c| (c.len() - c.count()) as f64);
        let inc = Functional::new("edges", |c| c.count() as f64);
        assert!(matches!(
            verify_fkg_monotone(&sys, &inc, &dec),
            Err(Error::NotMonotone { .. })
        ));
        let constant = Functional::new("one", |_| 1.0);
        let r = verify_fkg_monotone(&sys, &inc, &constant).unwrap();
        assert!(r.worst_violation.abs() < 1e-14);
    }

    #[test]
    fn subset_enumeration_counts() {
        // C(6,0)+C(6,1)+C(6,2)+C(6,3)
        assert_eq!(small_subsets(6, 3).len(), 1 + 6 + 15 + 20);
        assert_eq!(small_subsets(3, 5).len(), 8);
    }
}
