//! Command-line driver: argument parsing, dispatch and report output.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::duplication::{self, Decomposition, DoubledMeasure, IdentityReport};
use crate::error::{Error, Result};
use crate::gibbs::{ErgmParams, ExactSystem, ENUMERATION_CAP};
use crate::graph::WedgeList;
use crate::inequalities::{self, Functional, InequalityReport, PairMode};
use crate::mcmc::{self, ChainSpec, ScanMode};
use crate::meanfield::{self, PhaseRecord};
use crate::report::{Format, Report};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "TWOSTAR_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "twostar",
    version,
    about = "Correlation inequalities and phase structure of the two-star random graph model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file; `-` or absent writes to stdout unless an output directory is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Directory for `<command>.<format>` when `--out` is absent.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Scalar two-star model with `--alpha`, `--h`.
    TwoStar,
    /// Edge + wedge ERGM with `--beta1`, `--beta2`.
    ErgmTwoStar,
    /// Edge + triangle ERGM with `--beta1`, `--beta2`.
    EdgeTriangle,
}

#[derive(Debug, Clone, Args)]
pub struct PointArgs {
    /// Vertex counts, e.g. `3,4,5`.
    #[arg(long, default_value = "4", value_parser = parse_sizes)]
    pub n: Sizes,

    #[arg(long, value_enum, default_value_t = Model::TwoStar)]
    pub model: Model,

    /// Wedge coupling grid (`start:stop:step` or comma list).
    #[arg(long, default_value = "1", value_parser = parse_grid_arg, allow_hyphen_values = true)]
    pub alpha: Grid,

    /// Edge field grid.
    #[arg(long, default_value = "0", value_parser = parse_grid_arg, allow_hyphen_values = true)]
    pub h: Grid,

    /// Edge coefficient grid for ERGM models.
    #[arg(long, default_value = "0", value_parser = parse_grid_arg, allow_hyphen_values = true)]
    pub beta1: Grid,

    /// Second-pattern coefficient grid for ERGM models.
    #[arg(long, default_value = "0", value_parser = parse_grid_arg, allow_hyphen_values = true)]
    pub beta2: Grid,
}

#[derive(Debug, Clone, Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 10_000)]
    pub sweeps: u64,
    #[arg(long, default_value_t = mcmc::DEFAULT_BURN_IN)]
    pub burn_in: u64,
    #[arg(long, default_value_t = mcmc::DEFAULT_THINNING)]
    pub thinning: u64,
    #[arg(long, default_value_t = 8)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    FkgLattice,
    Fkg,
    Gks,
    Ghs,
    VolMono,
    PartSubmod,
    Duplication,
    U3Repr,
    PLattice,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact log-partition function, free energy and densities.
    Exact(PointArgs),
    /// Ursell functions of one order over all index tuples.
    Ursell {
        #[command(flatten)]
        point: PointArgs,
        #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
        order: u8,
    },
    /// Run a correlation-inequality verifier over a parameter grid.
    Verify {
        #[arg(value_enum)]
        check: Check,
        #[command(flatten)]
        point: PointArgs,
        /// Largest subset size in exhaustive subset sweeps.
        #[arg(long, default_value_t = 3)]
        max_size: usize,
        /// Sampled pairs when a lattice check exceeds its exhaustive cap.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mean-field phase diagram.
    Phase {
        #[arg(long, default_value = "0:4:0.05", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
        #[arg(long, default_value = "-4:1:0.05", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        h: Grid,
    },
    /// Fixed points of the mean-field equation.
    Fixpoint {
        #[arg(long, value_parser = parse_grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
        #[arg(long, value_parser = parse_grid_arg, allow_hyphen_values = true)]
        h: Grid,
    },
    /// Coexistence curve `h = q(α)` for `α > 2`.
    Curve {
        #[arg(long, default_value = "2.25:4:0.25", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
    },
    /// Glauber dynamics summaries.
    Mcmc {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value = "1", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
        #[arg(long, default_value = "0", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        h: Grid,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Concavity of the mean edge density in the field.
    Concavity {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value = "1", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        alpha: Grid,
        #[arg(long, default_value = "0:2:0.25", value_parser = parse_grid_arg, allow_hyphen_values = true)]
        h: Grid,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Records GHS violations against the edge-probability-½ threshold.
    Conjecture(PointArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Mcmc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

#[derive(Debug, Clone, PartialEq)]
pub struct Sizes(pub Vec<usize>);

/// Parses `start:stop:step` (inclusive of `stop` within half a step), a
/// comma list, or a single value. Range points are rounded to 12 decimals
/// so that, e.g., `-4:1:0.05` contains exactly `-3.0`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: &str| Error::Grid {
        spec: spec.to_string(),
        reason: reason.to_string(),
    };
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(&format!("`{s}` is not a number")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(bad("values must be finite"))
        }
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, s) = (num(start)?, num(stop)?, num(step)?);
            if s <= 0.0 {
                return Err(bad("step must be positive"));
            }
            if b < a {
                return Err(bad("stop is below start"));
            }
            let count = ((b - a) / s + 0.5).floor() as usize + 1;
            if count > 10_000_000 {
                return Err(bad("too many points"));
            }
            Ok((0..count)
                .map(|k| {
                    let x = a + k as f64 * s;
                    let r = (x * 1e12).round() / 1e12;
                    if r == 0.0 {
                        0.0
                    } else {
                        r
                    }
                })
                .collect())
        }
        [_] => {
            let vals = spec.split(',').map(num).collect::<Result<Vec<_>>>()?;
            if vals.is_empty() {
                Err(bad("empty grid"))
            } else {
                Ok(vals)
            }
        }
        _ => Err(bad("expected start:stop:step or a comma list")),
    }
}

fn parse_grid_arg(s: &str) -> std::result::Result<Grid, String> {
    parse_grid(s).map(Grid).map_err(|e| e.to_string())
}

fn parse_sizes(s: &str) -> std::result::Result<Sizes, String> {
    let v = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{p}` is not a vertex count"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if v.iter().any(|&n| n < 2) {
        return Err("vertex counts must be at least 2".into());
    }
    Ok(Sizes(v))
}

impl PointArgs {
    fn systems(&self) -> Result<Vec<ExactSystem>> {
        let mut out = Vec::new();
        for &n in &self.n.0 {
            let m = n * (n - 1) / 2;
            if m > ENUMERATION_CAP {
                return Err(Error::EnumerationCap {
                    active: m,
                    cap: ENUMERATION_CAP,
                });
            }
            match self.model {
                Model::TwoStar => {
                    for &a in &self.alpha.0 {
                        for &h in &self.h.0 {
                            out.push(ExactSystem::scalar(n, a, h)?);
                        }
                    }
                }
                Model::ErgmTwoStar | Model::EdgeTriangle => {
                    for &b1 in &self.beta1.0 {
                        for &b2 in &self.beta2.0 {
                            let p = if self.model == Model::ErgmTwoStar {
                                ErgmParams::two_star(b1, b2)
                            } else {
                                ErgmParams::edge_triangle(b1, b2)
                            };
                            out.push(ExactSystem::new(n, p)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

const POINT_COLUMNS: [&str; 6] = ["n", "model", "alpha", "h", "beta1", "beta2"];

fn point_fields(sys: &ExactSystem) -> serde_json::Map<String, Value> {
    let p = inequalities::ParamPoint::of(sys);
    let beta = |k: usize| p.betas.as_ref().and_then(|b| b.get(k).copied());
    let mut m = serde_json::Map::new();
    m.insert("n".into(), json!(p.n));
    m.insert("model".into(), json!(p.model));
    m.insert("alpha".into(), json!(p.alpha));
    m.insert("h".into(), json!(p.h));
    m.insert("beta1".into(), json!(beta(0)));
    m.insert("beta2".into(), json!(beta(1)));
    m
}

fn with_point(sys: &ExactSystem, extra: Value) -> Value {
    let mut m = point_fields(sys);
    if let Value::Object(e) = extra {
        m.extend(e);
    }
    Value::Object(m)
}

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    POINT_COLUMNS
        .iter()
        .copied()
        .chain(extra.iter().copied())
        .collect()
}

const VERIFY_COLUMNS: [&str; 7] = [
    "check",
    "worst_violation",
    "witness",
    "checked",
    "hypotheses_met",
    "verdict",
    "note",
];

fn inequality_row(sys: &ExactSystem, r: &InequalityReport) -> Value {
    with_point(
        sys,
        json!({
            "check": r.tag.as_str(),
            "worst_violation": r.worst_violation,
            "witness": r.witness,
            "checked": r.checked,
            "hypotheses_met": r.hypotheses_met,
            "verdict": if r.passed() { "pass" } else { "fail" },
            "note": r.note,
        }),
    )
}

fn identity_row(sys: &ExactSystem, r: &IdentityReport) -> Value {
    with_point(
        sys,
        json!({
            "check": r.check,
            "worst_violation": r.max_abs_error,
            "witness": r.detail,
            "checked": r.checked,
            "hypotheses_met": true,
            "verdict": if r.pass { "pass" } else { "fail" },
            "note": format!("absolute error, tolerance {:e}", r.tolerance),
        }),
    )
}

/// Runs one parsed command and builds its report.
pub fn dispatch(command: &Command) -> Result<Report> {
    let start = Instant::now();
    let mut report = match command {
        Command::Exact(p) => exact(p)?,
        Command::Ursell { point, order } => ursell(point, *order as usize)?,
        Command::Verify {
            check,
            point,
            max_size,
            samples,
            seed,
        } => verify(*check, point, *max_size, *samples, *seed)?,
        Command::Phase { alpha, h } => phase(alpha, h)?,
        Command::Fixpoint { alpha, h } => fixpoint(alpha, h)?,
        Command::Curve { alpha } => curve(alpha)?,
        Command::Mcmc { n, alpha, h, chain } => run_mcmc(*n, alpha, h, chain)?,
        Command::Concavity {
            n,
            alpha,
            h,
            mode,
            chain,
        } => concavity(*n, alpha, h, *mode, chain)?,
        Command::Conjecture(p) => conjecture(p)?,
    };
    report.meta.elapsed_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn exact(p: &PointArgs) -> Result<Report> {
    let mut r = Report::new(
        "exact",
        &columns(&[
            "log_z",
            "free_energy",
            "edge_prob",
            "edge_density",
            "wedge_density",
        ]),
    );
    r.meta.caps.insert("enumeration".into(), json!(ENUMERATION_CAP));
    for sys in p.systems()? {
        let n = sys.n() as f64;
        let mean_edges = sys.expect_mask(|mask| f64::from(mask.count_ones()));
        let wl = WedgeList::new(sys.index());
        let mean_wedges = sys.expect(|c| crate::graph::wedge_value(c, &wl) as f64);
        r.push(&with_point(
            &sys,
            json!({
                "log_z": sys.log_partition(),
                "free_energy": sys.free_energy(),
                "edge_prob": mean_edges / sys.m() as f64,
                "edge_density": mean_edges / (n * n),
                "wedge_density": mean_wedges / (n * n * n),
            }),
        ))?;
    }
    Ok(r)
}

fn ursell(p: &PointArgs, order: usize) -> Result<Report> {
    let mut r = Report::new("ursell", &columns(&["order", "indices", "value"]));
    for sys in p.systems()? {
        let m = sys.m();
        let mut tuples: Vec<Vec<usize>> = Vec::new();
        match order {
            1 => tuples.extend((0..m).map(|i| vec![i])),
            2 => {
                for i in 0..m {
                    tuples.extend((i..m).map(|j| vec![i, j]));
                }
            }
            _ => {
                for i in 0..m {
                    for j in i..m {
                        tuples.extend((j..m).map(|k| vec![i, j, k]));
                    }
                }
            }
        }
        for t in tuples {
            let u = inequalities::ursell(&sys, &t)?;
            let idx = t.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            r.push(&with_point(
                &sys,
                json!({"order": order, "indices": idx, "value": u.value}),
            ))?;
        }
    }
    Ok(r)
}

fn verify(check: Check, p: &PointArgs, max_size: usize, samples: u64, seed: u64) -> Result<Report> {
    let name = format!("verify {}", check.to_possible_value().expect("named").get_name());
    let mut r = Report::new(name, &columns(&VERIFY_COLUMNS));
    r.meta.seed = Some(seed);
    r.meta.caps.insert("max_subset_size".into(), json!(max_size));
    r.meta.caps.insert(
        "fkg_exhaustive_edges".into(),
        json!(inequalities::FKG_EXHAUSTIVE_CAP),
    );
    r.meta.caps.insert(
        "doubled_enumeration_edges".into(),
        json!(duplication::DOUBLED_CAP),
    );
    r.meta
        .caps
        .insert("sector_sum_edges".into(), json!(duplication::SECTOR_CAP));
    r.meta.caps.insert("slack".into(), json!(inequalities::SLACK));
    let ineq = |r: &mut Report, sys: &ExactSystem, rep: &InequalityReport| -> Result<()> {
        r.verdict(rep.passed());
        r.push(&inequality_row(sys, rep))
    };
    let ident = |r: &mut Report, sys: &ExactSystem, rep: &IdentityReport| -> Result<()> {
        r.verdict(rep.pass);
        r.push(&identity_row(sys, rep))
    };
    for sys in p.systems()? {
        match check {
            Check::FkgLattice => {
                let rep = inequalities::verify_fkg_lattice(&sys, PairMode::Auto { samples, seed });
                ineq(&mut r, &sys, &rep)?;
            }
            Check::Fkg => {
                let wl = WedgeList::new(sys.index());
                let edges = Functional::new("edge_count", |c| c.count() as f64);
                let wedges = Functional::new("wedge_count", |c| crate::graph::wedge_value(c, &wl) as f64);
                for (f, g) in [(&edges, &edges), (&edges, &wedges), (&wedges, &wedges)] {
                    let rep = inequalities::verify_fkg_monotone(&sys, f, g)?;
                    ineq(&mut r, &sys, &rep)?;
                }
            }
            Check::Gks => {
                ineq(&mut r, &sys, &inequalities::verify_pair_correlations(&sys))?;
                ineq(&mut r, &sys, &inequalities::verify_gks_exhaustive(&sys, max_size))?;
            }
            Check::Ghs => ineq(&mut r, &sys, &inequalities::verify_ghs_exhaustive(&sys))?,
            Check::VolMono => ineq(&mut r, &sys, &volume_battery(&sys)?)?,
            Check::PartSubmod => {
                let rep = inequalities::verify_partition_submodularity_exhaustive(&sys)?;
                ineq(&mut r, &sys, &rep)?;
            }
            Check::Duplication => {
                let dm = DoubledMeasure::new(&sys)?;
                let dec = Decomposition::new(&sys)?;
                ident(&mut r, &sys, &duplication::check_decomposition(&sys)?)?;
                ident(&mut r, &sys, &duplication::verify_normalization(&dec))?;
                ident(
                    &mut r,
                    &sys,
                    &duplication::verify_mixture_identity(&dec, &dm, 2, 2)?,
                )?;
                let zv = duplication::verify_zv_exhaustive(&dm, max_size.min(2))?;
                ineq(&mut r, &sys, &zv.zz)?;
                ineq(&mut r, &sys, &zv.zv)?;
                let mono = duplication::verify_sector_monotonicity_exhaustive(&dec, 1);
                ineq(&mut r, &sys, &mono)?;
            }
            Check::U3Repr => {
                let dm = DoubledMeasure::new(&sys)?;
                ident(&mut r, &sys, &duplication::verify_u3_all(&dm)?)?;
            }
            Check::PLattice => {
                let w = duplication::mixture_weights(&sys)?;
                ineq(&mut r, &sys, &duplication::verify_p_lattice(&w, samples, seed))?;
            }
        }
    }
    Ok(r)
}

/// `Λ = {e}`, `A` = the star of one endpoint of `e`, `B` = all edges, for
/// every edge `e`.
fn volume_battery(sys: &ExactSystem) -> Result<InequalityReport> {
    let idx = sys.index();
    let all: Vec<usize> = sys.active().to_vec();
    let mut acc: Option<InequalityReport> = None;
    for &e in &all {
        let (u, _) = idx.pair_of(e);
        let star: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&f| {
                let (a, b) = idx.pair_of(f);
                a == u || b == u
            })
            .collect();
        let one = inequalities::verify_volume_monotonicity(sys, &[e], &star, &all)?;
        acc = Some(match acc {
            None => one,
            Some(a) => a.absorb(&one),
        });
    }
    Ok(acc.expect("systems have at least one edge"))
}

const PHASE_COLUMNS: [&str; 7] = [
    "alpha",
    "h",
    "n_roots",
    "u_star_1",
    "u_star_2",
    "classification",
    "variance",
];

fn phase(alpha: &Grid, h: &Grid) -> Result<Report> {
    let mut r = Report::new("phase", &PHASE_COLUMNS);
    r.meta
        .caps
        .insert("scan_intervals".into(), json!(meanfield::SCAN_INTERVALS));
    for p in meanfield::phase_grid(&alpha.0, &h.0) {
        r.push(&PhaseRecord::from(&p))?;
    }
    Ok(r)
}

fn fixpoint(alpha: &Grid, h: &Grid) -> Result<Report> {
    let mut r = Report::new(
        "fixpoint",
        &["alpha", "h", "roots", "maximizers", "classification", "variance"],
    );
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    for p in meanfield::phase_grid(&alpha.0, &h.0) {
        r.push(&json!({
            "alpha": p.alpha,
            "h": p.h,
            "roots": join(&p.roots),
            "maximizers": join(&p.maximizers),
            "classification": p.classification.as_str(),
            "variance": p.variance(),
        }))?;
    }
    Ok(r)
}

fn curve(alpha: &Grid) -> Result<Report> {
    let mut r = Report::new("curve", &["alpha", "q", "u_low", "u_high", "objective_gap"]);
    r.meta
        .caps
        .insert("curve_tolerance".into(), json!(meanfield::CURVE_TOL));
    for &a in &alpha.0 {
        r.push(&meanfield::critical_curve(a)?)?;
    }
    Ok(r)
}

fn chain_spec(n: usize, alpha: f64, h: f64, c: &ChainArgs) -> Result<ChainSpec> {
    ChainSpec {
        n,
        params: crate::gibbs::ScalarParams::new(alpha, h),
        sweeps: c.sweeps,
        burn_in: c.burn_in,
        thinning: c.thinning,
        seed: c.seed,
        chains: c.chains,
    }
    .validated()
}

fn chain_meta(r: &mut Report, c: &ChainArgs) {
    r.meta.seed = Some(c.seed);
    r.meta.caps.insert("sweeps".into(), json!(c.sweeps));
    r.meta.caps.insert("burn_in".into(), json!(c.burn_in));
    r.meta.caps.insert("thinning".into(), json!(c.thinning));
    r.meta.caps.insert("chains".into(), json!(c.chains));
}

fn run_mcmc(n: usize, alpha: &Grid, h: &Grid, c: &ChainArgs) -> Result<Report> {
    let mut r = Report::new(
        "mcmc",
        &[
            "n",
            "alpha",
            "h",
            "density_mean",
            "density_se",
            "edge_prob_mean",
            "edge_prob_se",
            "wedge_mean",
            "wedge_se",
            "standardized_variance",
            "skewness",
            "excess_kurtosis",
            "u_star",
            "limiting_variance",
        ],
    );
    chain_meta(&mut r, c);
    for &a in &alpha.0 {
        for &hh in &h.0 {
            let s = mcmc::run_chains(&chain_spec(n, a, hh, c)?)?;
            let mf = meanfield::classify(a, hh);
            r.push(&json!({
                "n": n,
                "alpha": a,
                "h": hh,
                "density_mean": s.density.mean,
                "density_se": s.density.se,
                "edge_prob_mean": s.edge_probability.mean,
                "edge_prob_se": s.edge_probability.se,
                "wedge_mean": s.wedge_count.mean,
                "wedge_se": s.wedge_count.se,
                "standardized_variance": s.standardized_variance,
                "skewness": s.skewness,
                "excess_kurtosis": s.excess_kurtosis,
                "u_star": mf.u_star(),
                "limiting_variance": mf.variance(),
            }))?;
        }
    }
    Ok(r)
}

fn concavity(n: usize, alpha: &Grid, h: &Grid, mode: ModeArg, c: &ChainArgs) -> Result<Report> {
    let mut r = Report::new(
        "concavity",
        &["alpha", "h", "n", "m_n", "se", "second_difference", "pass"],
    );
    r.meta
        .caps
        .insert("concavity_tolerance".into(), json!(mcmc::CONCAVITY_TOL));
    let (mode, spec) = match mode {
        ModeArg::Exact => (ScanMode::Exact, None),
        ModeArg::Mcmc => {
            chain_meta(&mut r, c);
            (ScanMode::Mcmc, Some(chain_spec(n, 0.0, 0.0, c)?))
        }
    };
    for &a in &alpha.0 {
        let scan = mcmc::concavity_scan(a, &h.0, n, mode, spec.as_ref())?;
        for row in &scan.rows {
            r.verdict(row.pass);
            r.push(row)?;
        }
    }
    Ok(r)
}

fn conjecture(p: &PointArgs) -> Result<Report> {
    let mut r = Report::new(
        "conjecture",
        &columns(&[
            "min_edge_prob",
            "worst_u3",
            "witness",
            "ghs_violated",
            "below_half",
            "consistent",
        ]),
    );
    let systems = p.systems()?;
    for (sys, rec) in systems.iter().zip(inequalities::conjecture_scan(&systems)) {
        r.push(&with_point(
            sys,
            json!({
                "min_edge_prob": rec.min_edge_prob,
                "worst_u3": rec.worst_u3,
                "witness": rec.witness,
                "ghs_violated": rec.ghs_violated,
                "below_half": rec.below_half,
                "consistent": rec.consistent,
            }),
        ))?;
    }
    Ok(r)
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Exact(_) => "exact",
        Command::Ursell { .. } => "ursell",
        Command::Verify { .. } => "verify",
        Command::Phase { .. } => "phase",
        Command::Fixpoint { .. } => "fixpoint",
        Command::Curve { .. } => "curve",
        Command::Mcmc { .. } => "mcmc",
        Command::Concavity { .. } => "concavity",
        Command::Conjecture(_) => "conjecture",
    }
}

fn write_report(report: &Report, cmd: &Command, out: &OutputArgs) -> Result<()> {
    let ext = match out.format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let path = match (&out.out, &out.out_dir) {
        (Some(p), _) if p.as_os_str() != "-" => Some(p.clone()),
        (Some(_), _) => None,
        (None, Some(dir)) => Some(dir.join(format!("{}.{ext}", command_name(cmd)))),
        (None, None) => None,
    };
    match path {
        Some(p) => report.write(&p, out.format),
        None => {
            let bytes = report.emit(out.format)?;
            std::io::stdout().write_all(&bytes).map_err(|e| Error::Output {
                path: "stdout".into(),
                reason: e.to_string(),
            })
        }
    }
}

/// Exit status: 0 when all verifiers pass, 1 when any fails, 2 on usage or
/// runtime errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut report = match dispatch(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    report.meta.command = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy())
        .collect::<Vec<_>>()
        .join(" ");
    if let Err(e) = write_report(&report, &cli.command, &cli.output) {
        eprintln!("error: {e}");
        return 2;
    }
    if report.all_passed() {
        0
    } else {
        if let Some(v) = &report.meta.verdicts {
            eprintln!("{} of {} checks failed", v.failed, v.checked);
        }
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0:2:0.5").unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(parse_grid("1,2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert_eq!(parse_grid("7").unwrap(), vec![7.0]);
        let g = parse_grid("-4:1:0.05").unwrap();
        assert_eq!(g.len(), 101);
        assert!(g.contains(&-3.0) && g.contains(&-2.5) && g.contains(&0.0));
        assert_eq!(*g.last().unwrap(), 1.0);
        // stop reached within half a step
        assert_eq!(parse_grid("0:0.99:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        for bad in ["", "1:0:0.1", "0:1:0", "0:1", "a", "0:1:-1", "nan"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_sizes("3,4").unwrap(), Sizes(vec![3, 4]));
        assert!(parse_sizes("1").is_err());
    }
}
