//! Duplicate-variable decomposition of the doubled two-star measure.
//!
//! Take two independent copies `x, y` of a pairwise system and pass to
//! `z = x − y ∈ {−1,0,1}` and `v = (x + y)/2 ∈ {0,½,1}`. Using
//! `x_i x_j + y_i y_j = z_i z_j / 2 + 2 v_i v_j`, the doubled Hamiltonian
//! splits as `Ĥ¹(z) + Ĥ²(v)`:
//!
//! ```text
//! Ĥ¹(z) = (1/2n) Σ_W α_ij z_i z_j
//! Ĥ²(v) = (2/n) Σ_W α_ij v_i v_j + 2 Σ h_i v_i
//! ```
//!
//! The doubled state space is the disjoint union over `A ⊆ E` of sectors
//! `S_A` (`z = 0`, `v ∈ {0,1}` on `A`; `v = ½`, `z = ±1` off `A`). On `S_A`
//! the `z` part is a zero-field Ising model on `Aᶜ` with couplings
//! `α_ij / 2n`, and the `v` part is a two-star system on `A` with couplings
//! `2α` and fields `h'_i = 2h_i + (1/n) Σ_{j ∈ Aᶜ, j ~ i} α_ij`, shifted by
//! the constant
//! `c_A = (1/2n) Σ_{W_{Aᶜ}} α_ij + Σ_{i ∈ Aᶜ} h_i`.
//!
//! The mixture weight of sector `A` is
//! `P(A) = Z^Is_{Aᶜ} · e^{c_A} · Z_{A; 2α, h'} / Z²`. The constant `c_A`
//! drops out of each sector's conditional measure but not out of `P`:
//! without it the weights do not sum to one.
//!
//! All sets here are subsets of the system's active edges, addressed by
//! local bit masks in rank order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gibbs::{Coupling, ExactSystem, GeneralizedParams};
use crate::graph::Config;
use crate::inequalities::{self, InequalityReport, InequalityTag, ParamPoint, SLACK};
use crate::numeric::CompensatedSum;

/// Full doubled enumeration visits `4^k` states.
pub const DOUBLED_CAP: usize = 10;

/// Sector sums visit `2^k` sectors with two sub-enumerations each.
pub const SECTOR_CAP: usize = 12;

/// The lattice check on `P` is exhaustive up to this many edges.
pub const P_LATTICE_EXHAUSTIVE_CAP: usize = 8;

/// Tolerance for the identities (decomposition, `u₃` representation).
pub const IDENTITY_TOL: f64 = 1e-12;

/// Tolerance for mixture sums against direct doubled enumeration.
pub const MIXTURE_TOL: f64 = 1e-10;

/// Two independent configurations on the same edge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubledState {
    pub x: Config,
    pub y: Config,
}

/// `z_i = x_i − y_i` per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZState(pub Vec<i8>);

/// `v_i = (x_i + y_i)/2` per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct VState(pub Vec<f64>);

impl DoubledState {
    pub fn new(x: Config, y: Config) -> Self {
        assert_eq!(x.len(), y.len(), "copies over different edge sets");
        DoubledState { x, y }
    }
}

pub fn to_zv(s: &DoubledState) -> (ZState, VState) {
    let m = s.x.len();
    let z = (0..m)
        .map(|i| i8::from(s.x.get(i)) - i8::from(s.y.get(i)))
        .collect();
    let v = (0..m)
        .map(|i| (f64::from(u8::from(s.x.get(i))) + f64::from(u8::from(s.y.get(i)))) / 2.0)
        .collect();
    (ZState(z), VState(v))
}

/// `z_i ≠ 0 ⇔ v_i = ½` for every coordinate.
pub fn constraint_holds(z: &ZState, v: &VState) -> bool {
    z.0.iter().zip(&v.0).all(|(&zi, &vi)| (zi != 0) == (vi == 0.5))
}

/// `Π_{i ∈ C} z_i`.
pub fn z_monomial(c: &[usize]) -> impl Fn(&[i8]) -> f64 + Sync + '_ {
    move |z| c.iter().map(|&i| f64::from(z[i])).product()
}

/// `Π_{i ∈ D} v_i`.
pub fn v_monomial(d: &[usize]) -> impl Fn(&[f64]) -> f64 + Sync + '_ {
    move |v| d.iter().map(|&i| v[i]).product()
}

/// Pairwise data of the system over its active edges, local indices.
struct Pairwise {
    n: f64,
    active: Vec<usize>,
    m: usize,
    field: Vec<f64>,
    /// (local i, local j, α_ij), i < j.
    wedges: Vec<(usize, usize, f64)>,
}

impl Pairwise {
    fn of(sys: &ExactSystem) -> Result<Self> {
        if !sys.is_pairwise() {
            return Err(Error::NeedsPairwise("variable duplication"));
        }
        let field = sys
            .active()
            .iter()
            .map(|&e| sys.field(e).expect("pairwise"))
            .collect();
        let wedges = sys
            .wedges()
            .pairs()
            .iter()
            .filter_map(|&(i, j)| {
                let (li, lj) = (sys.local_of(i)?, sys.local_of(j)?);
                Some((li.min(lj), li.max(lj), sys.wedge_alpha(i, j).expect("wedge")))
            })
            .collect();
        Ok(Pairwise {
            n: sys.n() as f64,
            active: sys.active().to_vec(),
            m: sys.m(),
            field,
            wedges,
        })
    }

    fn k(&self) -> usize {
        self.active.len()
    }

    fn full(&self) -> u64 {
        (1u64 << self.k()) - 1
    }

    /// `Ĥ¹(z)` for local spins (0 where `z = 0`).
    fn h_hat1(&self, z: &[i8]) -> f64 {
        self.wedges
            .iter()
            .map(|&(i, j, a)| a * f64::from(z[i] * z[j]))
            .sum::<f64>()
            / (2.0 * self.n)
    }

    /// `Ĥ²(v)` for local `v` values.
    fn h_hat2(&self, v: &[f64]) -> f64 {
        let pair: f64 = self.wedges.iter().map(|&(i, j, a)| a * v[i] * v[j]).sum();
        let field: f64 = self.field.iter().zip(v).map(|(h, vi)| h * vi).sum();
        2.0 * pair / self.n + 2.0 * field
    }

    /// Scatter local values into a global per-edge vector.
    fn scatter<T: Copy>(&self, local: &[T], fill: T, out: &mut Vec<T>) {
        out.clear();
        out.resize(self.m, fill);
        for (k, &e) in self.active.iter().enumerate() {
            out[e] = local[k];
        }
    }
}

fn check_cap(what: &'static str, k: usize, cap: usize) -> Result<()> {
    if k > cap {
        Err(Error::SizeCap { what, got: k, cap })
    } else {
        Ok(())
    }
}

/// Outcome of an identity check (max absolute discrepancy against a tolerance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub check: String,
    pub point: ParamPoint,
    pub max_abs_error: f64,
    pub tolerance: f64,
    pub checked: u64,
    pub pass: bool,
    pub detail: String,
}

impl IdentityReport {
    fn new(check: &str, sys: &ExactSystem, tolerance: f64) -> Self {
        IdentityReport {
            check: check.to_string(),
            point: ParamPoint::of(sys),
            max_abs_error: 0.0,
            tolerance,
            checked: 0,
            pass: true,
            detail: String::new(),
        }
    }

    fn observe(&mut self, err: f64, detail: impl FnOnce() -> String) {
        self.checked += 1;
        if err > self.max_abs_error || err.is_nan() {
            self.max_abs_error = err;
            self.detail = detail();
        }
        self.pass = self.max_abs_error <= self.tolerance;
    }
}

/// Checks `H(x) + H(y) = Ĥ¹(z) + Ĥ²(v)` on every doubled state.
pub fn check_decomposition(sys: &ExactSystem) -> Result<IdentityReport> {
    let pw = Pairwise::of(sys)?;
    check_cap("doubled enumeration", pw.k(), DOUBLED_CAP)?;
    let mut r = IdentityReport::new("decomposition", sys, IDENTITY_TOL);
    let k = pw.k();
    let mut z = vec![0i8; k];
    let mut v = vec![0f64; k];
    for x in 0..=pw.full() {
        for y in 0..=pw.full() {
            for b in 0..k {
                let (xb, yb) = ((x >> b & 1) as i8, (y >> b & 1) as i8);
                z[b] = xb - yb;
                v[b] = f64::from(xb + yb) / 2.0;
            }
            let lhs = sys.energy(x) + sys.energy(y);
            let rhs = pw.h_hat1(&z) + pw.h_hat2(&v);
            r.observe((lhs - rhs).abs(), || format!("x={x:#b} y={y:#b}: {lhs} vs {rhs}"));
        }
    }
    Ok(r)
}

/// Exact doubled measure `μ(x) μ(y)` over the active edges.
pub struct DoubledMeasure<'a> {
    sys: &'a ExactSystem,
    pw: Pairwise,
    prob: Vec<f64>,
}

impl<'a> DoubledMeasure<'a> {
    pub fn new(sys: &'a ExactSystem) -> Result<Self> {
        let pw = Pairwise::of(sys)?;
        check_cap("doubled enumeration", pw.k(), DOUBLED_CAP)?;
        let prob = sys.probabilities()?;
        Ok(DoubledMeasure { sys, pw, prob })
    }

    pub fn system(&self) -> &ExactSystem {
        self.sys
    }

    /// `E[Φ(z) Ψ(v)]` by summing over all `4^k` doubled states. Functionals
    /// see per-edge vectors indexed by global edge id.
    pub fn expect<P, S>(&self, phi: P, psi: S) -> f64
    where
        P: Fn(&[i8]) -> f64 + Sync,
        S: Fn(&[f64]) -> f64 + Sync,
    {
        let k = self.pw.k();
        let full = self.pw.full();
        let rows: Vec<CompensatedSum> = (0..=full)
            .into_par_iter()
            .map(|x| {
                let mut zl = vec![0i8; k];
                let mut vl = vec![0f64; k];
                let (mut zg, mut vg) = (Vec::new(), Vec::new());
                let mut s = CompensatedSum::new();
                for y in 0..=full {
                    for b in 0..k {
                        let (xb, yb) = ((x >> b & 1) as i8, (y >> b & 1) as i8);
                        zl[b] = xb - yb;
                        vl[b] = f64::from(xb + yb) / 2.0;
                    }
                    self.pw.scatter(&zl, 0, &mut zg);
                    self.pw.scatter(&vl, 0.0, &mut vg);
                    let val = phi(&zg) * psi(&vg);
                    if val != 0.0 {
                        s.add(val * self.prob[x as usize] * self.prob[y as usize]);
                    }
                }
                s
            })
            .collect();
        merge(&rows)
    }

    /// `E[z_C v_D]` using bit arithmetic on local masks.
    pub fn expect_zv(&self, c: &[usize], d: &[usize]) -> Result<f64> {
        let cm = self.sys.local_mask(c)?;
        let dm = self.sys.local_mask(d)?;
        let full = self.pw.full();
        let rows: Vec<CompensatedSum> = (0..=full)
            .into_par_iter()
            .map(|x| {
                let mut s = CompensatedSum::new();
                for y in 0..=full {
                    let diff = x ^ y;
                    if cm & !diff != 0 {
                        continue; // some z_i = 0
                    }
                    if dm & !(x | y) != 0 {
                        continue; // some v_i = 0
                    }
                    let sign = if (cm & y).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
                    let half = 0.5f64.powi((dm & diff).count_ones() as i32);
                    s.add(sign * half * self.prob[x as usize] * self.prob[y as usize]);
                }
                s
            })
            .collect();
        Ok(merge(&rows))
    }
}

fn merge(parts: &[CompensatedSum]) -> f64 {
    let mut t = CompensatedSum::new();
    for p in parts {
        t.add(p.value());
    }
    t.value()
}

/// Zero-field Ising model on `Aᶜ` with couplings `α_ij / 2n`.
#[derive(Debug, Clone)]
pub struct IsingSubsystem {
    /// Local indices of the sites (`Aᶜ`).
    sites: Vec<usize>,
    /// (site position a, site position b, β_ab).
    couplings: Vec<(usize, usize, f64)>,
    log_z: f64,
}

impl IsingSubsystem {
    fn new(pw: &Pairwise, a: u64) -> Self {
        let sites: Vec<usize> = (0..pw.k()).filter(|&b| a >> b & 1 == 0).collect();
        let mut pos = vec![usize::MAX; pw.k()];
        for (p, &s) in sites.iter().enumerate() {
            pos[s] = p;
        }
        let couplings = pw
            .wedges
            .iter()
            .filter(|&&(i, j, _)| pos[i] != usize::MAX && pos[j] != usize::MAX)
            .map(|&(i, j, al)| (pos[i], pos[j], al / (2.0 * pw.n)))
            .collect();
        let mut sys = IsingSubsystem {
            sites,
            couplings,
            log_z: 0.0,
        };
        let energies: Vec<f64> = (0..sys.num_states()).map(|s| sys.energy(s)).collect();
        sys.log_z = crate::numeric::log_sum_exp(&energies);
        sys
    }

    fn num_states(&self) -> u64 {
        1u64 << self.sites.len()
    }

    /// Spin of site `p` in state `s`: bit set → +1.
    #[inline]
    fn spin(s: u64, p: usize) -> f64 {
        if s >> p & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn energy(&self, s: u64) -> f64 {
        self.couplings
            .iter()
            .map(|&(a, b, beta)| beta * Self::spin(s, a) * Self::spin(s, b))
            .sum()
    }

    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn couplings(&self) -> impl Iterator<Item = f64> + '_ {
        self.couplings.iter().map(|c| c.2)
    }

    /// Local `z` vector (zeros on `A`) for state `s`.
    fn fill_z(&self, s: u64, z: &mut [i8]) {
        z.fill(0);
        for (p, &site) in self.sites.iter().enumerate() {
            z[site] = if s >> p & 1 == 1 { 1 } else { -1 };
        }
    }
}

/// Two-star system on `A` with couplings `2α` and shifted fields `h'`,
/// plus the additive constant `c_A`.
#[derive(Debug, Clone)]
pub struct ShiftedTwoStar {
    system: ExactSystem,
    constant: f64,
}

impl ShiftedTwoStar {
    fn new(sys: &ExactSystem, pw: &Pairwise, a: u64) -> Result<Self> {
        let in_a = |b: usize| a >> b & 1 == 1;
        let base = match sys.coupling() {
            Coupling::Scalar(p) => GeneralizedParams::constant(sys.n(), p.alpha, p.h),
            Coupling::Generalized(g) => g.clone(),
            Coupling::Ergm(_) => return Err(Error::NeedsPairwise("variable duplication")),
        };
        let mut shifted = base.clone();
        for x in shifted.alpha_mut() {
            *x *= 2.0;
        }
        let mut constant = 0.0;
        for (b, &e) in pw.active.iter().enumerate() {
            if in_a(b) {
                shifted.h_mut()[e] = 2.0 * pw.field[b];
            } else {
                constant += pw.field[b];
            }
        }
        for &(i, j, al) in &pw.wedges {
            match (in_a(i), in_a(j)) {
                (true, false) => shifted.h_mut()[pw.active[i]] += al / pw.n,
                (false, true) => shifted.h_mut()[pw.active[j]] += al / pw.n,
                (false, false) => constant += al / (2.0 * pw.n),
                (true, true) => {}
            }
        }
        let edges: Vec<usize> = (0..pw.k()).filter(|&b| in_a(b)).map(|b| pw.active[b]).collect();
        let system = ExactSystem::with_active(sys.n(), shifted, edges, sys.cap())?;
        Ok(ShiftedTwoStar { system, constant })
    }

    pub fn system(&self) -> &ExactSystem {
        &self.system
    }

    /// `c_A`.
    pub fn constant(&self) -> f64 {
        self.constant
    }
}

/// One sector `S_A` of the doubled state space.
#[derive(Debug, Clone)]
pub struct Sector {
    /// Local mask of `A`.
    pub mask: u64,
    pub ising: IsingSubsystem,
    pub shifted: ShiftedTwoStar,
    /// `ln P(A)`.
    pub log_weight: f64,
}

impl Sector {
    /// `f^Φ(A)`: Ising average of `Φ(z)` with `z = 0` on `A`.
    pub fn f_phi<P>(&self, pw_m: usize, active: &[usize], phi: &P) -> f64
    where
        P: Fn(&[i8]) -> f64,
    {
        let k = active.len();
        let mut zl = vec![0i8; k];
        let mut zg = vec![0i8; pw_m];
        let mut s = CompensatedSum::new();
        for st in 0..self.ising.num_states() {
            self.ising.fill_z(st, &mut zl);
            zg.fill(0);
            for (b, &e) in active.iter().enumerate() {
                zg[e] = zl[b];
            }
            let val = phi(&zg);
            if val != 0.0 {
                s.add(val * (self.ising.energy(st) - self.ising.log_z).exp());
            }
        }
        s.value()
    }

    /// `g^Ψ(A)`: shifted two-star average of `Ψ(v)` with `v = ½` off `A`.
    pub fn g_psi<S>(&self, pw_m: usize, active: &[usize], psi: &S) -> f64
    where
        S: Fn(&[f64]) -> f64 + Sync,
    {
        let half: Vec<usize> = (0..active.len())
            .filter(|&b| self.mask >> b & 1 == 0)
            .map(|b| active[b])
            .collect();
        self.shifted.system.expect(|c| {
            let mut vg = vec![0.0; pw_m];
            for &e in &half {
                vg[e] = 0.5;
            }
            for e in c.ones() {
                vg[e] = 1.0;
            }
            psi(&vg)
        })
    }
}

/// The full sector decomposition of a pairwise system.
pub struct Decomposition<'a> {
    sys: &'a ExactSystem,
    pw: Pairwise,
    sectors: Vec<Sector>,
}

impl<'a> Decomposition<'a> {
    pub fn new(sys: &'a ExactSystem) -> Result<Self> {
        let pw = Pairwise::of(sys)?;
        check_cap("sector decomposition", pw.k(), SECTOR_CAP)?;
        let two_log_z = 2.0 * sys.log_partition();
        let sectors = (0..=pw.full())
            .into_par_iter()
            .map(|a| {
                let ising = IsingSubsystem::new(&pw, a);
                let shifted = ShiftedTwoStar::new(sys, &pw, a)?;
                let log_weight = ising.log_z + shifted.constant + shifted.system.log_partition() - two_log_z;
                Ok(Sector {
                    mask: a,
                    ising,
                    shifted,
                    log_weight,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Decomposition { sys, pw, sectors })
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn sector(&self, a: u64) -> &Sector {
        &self.sectors[a as usize]
    }

    pub fn system(&self) -> &ExactSystem {
        self.sys
    }

    pub fn weights(&self) -> MixtureWeights {
        MixtureWeights {
            point: ParamPoint::of(self.sys),
            active: self.pw.active.clone(),
            log_weights: self.sectors.iter().map(|s| s.log_weight).collect(),
            hypotheses_met: self.sys.alpha_nonnegative() && self.sys.field_nonnegative(),
        }
    }

    pub fn f_phi<P: Fn(&[i8]) -> f64>(&self, a: u64, phi: &P) -> f64 {
        self.sector(a).f_phi(self.pw.m, &self.pw.active, phi)
    }

    pub fn g_psi<S: Fn(&[f64]) -> f64 + Sync>(&self, a: u64, psi: &S) -> f64 {
        self.sector(a).g_psi(self.pw.m, &self.pw.active, psi)
    }

    /// `Σ_A P(A) f^Φ(A) g^Ψ(A)`, accumulated in sector-rank order.
    pub fn mixture_expectation<P, S>(&self, phi: P, psi: S) -> f64
    where
        P: Fn(&[i8]) -> f64 + Sync,
        S: Fn(&[f64]) -> f64 + Sync,
    {
        let terms: Vec<f64> = self
            .sectors
            .par_iter()
            .map(|s| {
                let f = s.f_phi(self.pw.m, &self.pw.active, &phi);
                if f == 0.0 {
                    return 0.0;
                }
                s.log_weight.exp() * f * s.g_psi(self.pw.m, &self.pw.active, &psi)
            })
            .collect();
        terms.into_iter().collect::<CompensatedSum>().value()
    }
}

/// Mixture weights `P(A)` over subsets of the active edges (local masks).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureWeights {
    pub point: ParamPoint,
    pub active: Vec<usize>,
    pub log_weights: Vec<f64>,
    pub hypotheses_met: bool,
}

impl MixtureWeights {
    pub fn weight(&self, a: u64) -> f64 {
        self.log_weights[a as usize].exp()
    }

    pub fn total(&self) -> f64 {
        self.log_weights
            .iter()
            .map(|l| l.exp())
            .collect::<CompensatedSum>()
            .value()
    }

    /// `P(A)` for a set of global edge ids.
    pub fn weight_of(&self, edges: &[usize]) -> Option<f64> {
        let mut mask = 0u64;
        for e in edges {
            mask |= 1 << self.active.iter().position(|a| a == e)?;
        }
        Some(self.weight(mask))
    }
}

pub fn mixture_weights(sys: &ExactSystem) -> Result<MixtureWeights> {
    Ok(Decomposition::new(sys)?.weights())
}

/// Sector-sum value of `E[Φ(z) Ψ(v)]`.
pub fn mixture_expectation<P, S>(sys: &ExactSystem, phi: P, psi: S) -> Result<f64>
where
    P: Fn(&[i8]) -> f64 + Sync,
    S: Fn(&[f64]) -> f64 + Sync,
{
    Ok(Decomposition::new(sys)?.mixture_expectation(phi, psi))
}

/// Both duplicated-variable correlation inequalities for one `(C, D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZvReport {
    /// `E(z_C z_D) ≥ E(z_C) E(z_D)`.
    pub zz: InequalityReport,
    /// `E(z_C v_D) ≤ E(z_C) E(v_D)`.
    pub zv: InequalityReport,
}

impl ZvReport {
    pub fn passed(&self) -> bool {
        self.zz.passed() && self.zv.passed()
    }
}

pub fn verify_zv_inequalities(sys: &ExactSystem, c: &[usize], d: &[usize]) -> Result<ZvReport> {
    let dm = DoubledMeasure::new(sys)?;
    verify_zv_with(&dm, c, d)
}

/// As [`verify_zv_inequalities`], reusing a doubled measure.
pub fn verify_zv_with(dm: &DoubledMeasure<'_>, c: &[usize], d: &[usize]) -> Result<ZvReport> {
    let sys = dm.system();
    let hyp = sys.alpha_nonnegative() && sys.field_nonnegative();
    let ez_c = dm.expect_zv(c, &[])?;
    let ez_d = dm.expect_zv(d, &[])?;
    let ev_d = dm.expect_zv(&[], d)?;
    // z_C z_D = z_{C Δ D} · z_{C ∩ D}², and z_i² = 1 exactly where z_i ≠ 0,
    // so evaluate the product directly.
    let ezz = dm.expect(|z| z_monomial(c)(z) * z_monomial(d)(z), |_| 1.0);
    let ezv = dm.expect_zv(c, d)?;
    let mut zz = InequalityReport::new(InequalityTag::ZzCorrelation, sys, hyp);
    zz.observe(ez_c * ez_d - ezz, || format!("C={c:?} D={d:?}"));
    let mut zv = InequalityReport::new(InequalityTag::ZvCorrelation, sys, hyp);
    zv.observe(ezv - ez_c * ev_d, || format!("C={c:?} D={d:?}"));
    Ok(ZvReport {
        zz: zz.finish(),
        zv: zv.finish(),
    })
}

/// `u₃(i, j, k) = E(z_i z_j v_k) − E(z_i z_j) E(v_k)`.
pub fn verify_u3_representation(sys: &ExactSystem, i: usize, j: usize, k: usize) -> Result<IdentityReport> {
    let dm = DoubledMeasure::new(sys)?;
    verify_u3_with(&dm, i, j, k)
}

pub fn verify_u3_with(dm: &DoubledMeasure<'_>, i: usize, j: usize, k: usize) -> Result<IdentityReport> {
    let sys = dm.system();
    let direct = inequalities::ursell(sys, &[i, j, k])?.value;
    let zz: &[usize] = if i == j { &[] } else { &[i, j] };
    // z_i² = 1 - (1 - z_i²); for i = j use the product form directly
    let (ezzv, ezz) = if i == j {
        let sq = |z: &[i8]| f64::from(z[i] * z[i]);
        (
            dm.expect(sq, v_monomial(std::slice::from_ref(&k))),
            dm.expect(sq, |_| 1.0),
        )
    } else {
        (dm.expect_zv(zz, &[k])?, dm.expect_zv(zz, &[])?)
    };
    let ev = dm.expect_zv(&[], &[k])?;
    let rep = ezzv - ezz * ev;
    let mut r = IdentityReport::new("u3-representation", sys, IDENTITY_TOL);
    r.observe((direct - rep).abs(), || {
        format!("({i}, {j}, {k}): u3={direct} zv-form={rep}")
    });
    Ok(r)
}

/// Sector monotonicity for `A ⊆ B`: `f^{z_C}(B) ≤ f^{z_C}(A)` and
/// `g^{v_D}(A) ≤ g^{v_D}(B)`.
pub fn verify_sector_monotonicity(
    dec: &Decomposition<'_>,
    c: &[usize],
    d: &[usize],
    a: &[usize],
    b: &[usize],
) -> Result<InequalityReport> {
    let sys = dec.system();
    let am = sys.local_mask(a)?;
    let bm = sys.local_mask(b)?;
    if am & !bm != 0 {
        return Err(Error::NotNested(format!("A={a:?} ⊄ B={b:?}")));
    }
    let phi = z_monomial(c);
    let psi = v_monomial(d);
    let hyp = sys.alpha_nonnegative() && sys.field_nonnegative();
    let mut r = InequalityReport::new(InequalityTag::SectorMonotone, sys, hyp);
    let (fa, fb) = (dec.f_phi(am, &phi), dec.f_phi(bm, &phi));
    r.observe(fb - fa, || {
        format!("f^z_C: C={c:?} A={a:?} B={b:?}: {fa} -> {fb}")
    });
    let (ga, gb) = (dec.g_psi(am, &psi), dec.g_psi(bm, &psi));
    r.observe(ga - gb, || {
        format!("g^v_D: D={d:?} A={a:?} B={b:?}: {ga} -> {gb}")
    });
    Ok(r.finish())
}

/// Lattice condition `P(E) P(F) ≤ P(E∪F) P(E∩F)` on the mixture weights,
/// in log space. Exhaustive up to [`P_LATTICE_EXHAUSTIVE_CAP`] edges,
/// otherwise over `samples` seeded random pairs.
pub fn verify_p_lattice(w: &MixtureWeights, samples: u64, seed: u64) -> InequalityReport {
    use rand::{Rng, SeedableRng};
    let k = w.active.len();
    let mut r = InequalityReport {
        tag: InequalityTag::PLattice,
        point: w.point.clone(),
        worst_violation: f64::NEG_INFINITY,
        witness: String::new(),
        checked: 0,
        hypotheses_met: w.hypotheses_met,
        verdict: inequalities::Verdict::Pass,
        note: None,
    };
    let lw = &w.log_weights;
    let gap = |e: usize, f: usize| lw[e] + lw[f] - lw[e | f] - lw[e & f];
    if k <= P_LATTICE_EXHAUSTIVE_CAP {
        for e in 0..lw.len() {
            for f in 0..lw.len() {
                r.observe(gap(e, f), || format!("E={e:#b} F={f:#b}"));
            }
        }
        r.note = Some("exhaustive".into());
    } else {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let (e, f) = (rng.gen_range(0..lw.len()), rng.gen_range(0..lw.len()));
            r.observe(gap(e, f), || format!("E={e:#b} F={f:#b}"));
        }
        r.note = Some(format!("sampled {samples} pairs, seed {seed}"));
    }
    r.finish()
}

/// Subsets of the active edges with at most `max` elements, as global ids.
fn small_sets(sys: &ExactSystem, max: usize) -> Vec<Vec<usize>> {
    let k = sys.active().len();
    (0..1u64 << k)
        .filter(|m| m.count_ones() as usize <= max)
        .map(|m| {
            (0..k)
                .filter(|b| m >> b & 1 == 1)
                .map(|b| sys.active()[b])
                .collect()
        })
        .collect()
}

/// Mixture sum against direct doubled enumeration for every `(z_C, v_D)`
/// with `|C| ≤ max_c`, `|D| ≤ max_d`.
pub fn verify_mixture_identity(
    dec: &Decomposition<'_>,
    dm: &DoubledMeasure<'_>,
    max_c: usize,
    max_d: usize,
) -> Result<IdentityReport> {
    let sys = dec.system();
    let mut r = IdentityReport::new("mixture-identity", sys, MIXTURE_TOL);
    let cs = small_sets(sys, max_c);
    let ds = small_sets(sys, max_d);
    for c in &cs {
        for d in &ds {
            let mix = dec.mixture_expectation(z_monomial(c), v_monomial(d));
            let direct = dm.expect_zv(c, d)?;
            r.observe((mix - direct).abs(), || {
                format!("C={c:?} D={d:?}: {mix} vs {direct}")
            });
        }
    }
    Ok(r)
}

/// `|Σ_A P(A) − 1|`.
pub fn verify_normalization(dec: &Decomposition<'_>) -> IdentityReport {
    let mut r = IdentityReport::new("mixture-normalization", dec.system(), MIXTURE_TOL);
    let total = dec.weights().total();
    r.observe((total - 1.0).abs(), || format!("sum = {total}"));
    r
}

/// Both z/v inequalities over all `C, D` with `|C|, |D| ≤ max`.
pub fn verify_zv_exhaustive(dm: &DoubledMeasure<'_>, max: usize) -> Result<ZvReport> {
    let sets = small_sets(dm.system(), max);
    let mut acc: Option<ZvReport> = None;
    for c in &sets {
        for d in &sets {
            let r = verify_zv_with(dm, c, d)?;
            acc = Some(match acc {
                None => r,
                Some(a) => ZvReport {
                    zz: a.zz.absorb(&r.zz),
                    zv: a.zv.absorb(&r.zv),
                },
            });
        }
    }
    Ok(acc.expect("the empty set is always present"))
}

/// The `u₃` representation over all index triples `i ≤ j ≤ k`.
pub fn verify_u3_all(dm: &DoubledMeasure<'_>) -> Result<IdentityReport> {
    let sys = dm.system();
    let mut r = IdentityReport::new("u3-representation", sys, IDENTITY_TOL);
    let act = sys.active();
    for (a, &i) in act.iter().enumerate() {
        for (b, &j) in act.iter().enumerate().skip(a) {
            for &k in &act[b..] {
                let one = verify_u3_with(dm, i, j, k)?;
                r.observe(one.max_abs_error, || one.detail.clone());
            }
        }
    }
    Ok(r)
}

/// Sector monotonicity for every nested pair `A ⊆ B` and every `C, D` with
/// `|C|, |D| ≤ max`.
pub fn verify_sector_monotonicity_exhaustive(dec: &Decomposition<'_>, max: usize) -> InequalityReport {
    let sys = dec.system();
    let sets = small_sets(sys, max);
    let hyp = sys.alpha_nonnegative() && sys.field_nonnegative();
    let mut r = InequalityReport::new(InequalityTag::SectorMonotone, sys, hyp);
    let full = dec.pw.full();
    let fs: Vec<Vec<f64>> = sets
        .iter()
        .map(|c| (0..=full).map(|a| dec.f_phi(a, &z_monomial(c))).collect())
        .collect();
    let gs: Vec<Vec<f64>> = sets
        .iter()
        .map(|d| (0..=full).map(|a| dec.g_psi(a, &v_monomial(d))).collect())
        .collect();
    for b in 0..=full {
        // all submasks a of b
        let mut a = b;
        loop {
            for (ci, f) in fs.iter().enumerate() {
                r.observe(f[b as usize] - f[a as usize], || {
                    format!("f^z_C C={:?} A={a:#b} B={b:#b}", sets[ci])
                });
            }
            for (di, g) in gs.iter().enumerate() {
                r.observe(g[a as usize] - g[b as usize], || {
                    format!("g^v_D D={:?} A={a:#b} B={b:#b}", sets[di])
                });
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    r.finish()
}

/// Sector partition sizes: `|S_A| = 2^k` for every `A`, total `4^k`.
pub fn sector_sizes(sys: &ExactSystem) -> Result<Vec<u64>> {
    let pw = Pairwise::of(sys)?;
    check_cap("doubled enumeration", pw.k(), DOUBLED_CAP)?;
    let mut sizes = vec![0u64; 1 << pw.k()];
    for x in 0..=pw.full() {
        for y in 0..=pw.full() {
            // sector = coordinates with z = 0
            let a = !(x ^ y) & pw.full();
            sizes[a as usize] += 1;
        }
    }
    Ok(sizes)
}

/// `SLACK` re-exported for callers that compare reports by hand.
pub const INEQUALITY_SLACK: f64 = SLACK;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zv_coordinates() {
        let s = DoubledState::new(Config::from_mask(3, 0b011), Config::from_mask(3, 0b110));
        let (z, v) = to_zv(&s);
        assert_eq!(z.0, vec![1, 0, -1]);
        assert_eq!(v.0, vec![0.5, 1.0, 0.5]);
        assert!(constraint_holds(&z, &v));
        let (z0, v0) = to_zv(&DoubledState::new(Config::empty(2), Config::empty(2)));
        assert_eq!((z0.0, v0.0), (vec![0, 0], vec![0.0, 0.0]));
    }

    #[test]
    fn pair_identity_all_bits() {
        for bits in 0..16u8 {
            let (xi, xj, yi, yj) = (bits & 1, bits >> 1 & 1, bits >> 2 & 1, bits >> 3 & 1);
            let (zi, zj) = (f64::from(xi) - f64::from(yi), f64::from(xj) - f64::from(yj));
            let (vi, vj) = (f64::from(xi + yi) / 2.0, f64::from(xj + yj) / 2.0);
            let lhs = f64::from(xi * xj + yi * yj);
            assert_eq!(lhs, zi * zj / 2.0 + 2.0 * vi * vj);
        }
    }

    #[test]
    fn caps_are_enforced() {
        let sys = ExactSystem::scalar(6, 1.0, 0.0).unwrap(); // 15 edges
        assert!(matches!(check_decomposition(&sys), Err(Error::SizeCap { .. })));
        assert!(matches!(mixture_weights(&sys), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn ergm_systems_are_rejected() {
        let sys = ExactSystem::new(3, crate::gibbs::ErgmParams::edge_triangle(0.1, 0.2)).unwrap();
        assert!(matches!(mixture_weights(&sys), Err(Error::NeedsPairwise(_))));
    }

    #[test]
    fn sector_partition_sizes() {
        let sys = ExactSystem::scalar(4, 1.0, 0.5).unwrap();
        let sizes = sector_sizes(&sys).unwrap();
        assert!(sizes.iter().all(|&s| s == 64));
        assert_eq!(sizes.iter().sum::<u64>(), 4096);
    }

    #[test]
    fn nesting_is_checked() {
        let sys = ExactSystem::scalar(3, 1.0, 1.0).unwrap();
        let dec = Decomposition::new(&sys).unwrap();
        assert!(matches!(
            verify_sector_monotonicity(&dec, &[0], &[1], &[0, 1], &[1]),
            Err(Error::NotNested(_))
        ));
    }

    #[test]
    fn weights_normalise_and_mixture_matches_direct() {
        let g = {
            let mut g = GeneralizedParams::constant(4, 1.3, -0.4);
            g.alpha_mut()[3] = 0.2;
            g.h_mut()[2] = 0.9;
            g
        };
        for sys in [
            ExactSystem::scalar(3, 2.0, 0.5).unwrap(),
            ExactSystem::scalar(4, 0.7, -1.0).unwrap(),
            ExactSystem::new(4, g).unwrap(),
        ] {
            let dec = Decomposition::new(&sys).unwrap();
            assert!((dec.weights().total() - 1.0).abs() < 1e-12);
            assert!(check_decomposition(&sys).unwrap().pass);
            let dm = DoubledMeasure::new(&sys).unwrap();
            for (c, d) in [(vec![0, 1], vec![2]), (vec![0], vec![0, 2]), (vec![], vec![1, 2])] {
                let mix = dec.mixture_expectation(z_monomial(&c), v_monomial(&d));
                let direct = dm.expect(z_monomial(&c), v_monomial(&d));
                let bits = dm.expect_zv(&c, &d).unwrap();
                assert!((mix - direct).abs() < MIXTURE_TOL, "{mix} vs {direct}");
                assert!((bits - direct).abs() < 1e-13);
            }
            assert!(verify_u3_with(&dm, 0, 1, 2).unwrap().pass);
            assert!(verify_u3_with(&dm, 1, 1, 0).unwrap().pass);
        }
    }
}
