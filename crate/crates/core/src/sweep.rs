//! `(α, χ, r)` regime sweeps.

use std::cmp::Ordering;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{run, Outcome, SolverConfig};
use crate::grid::{fmt_f64, TorusGrid};
use crate::ic::InitialCondition;
use crate::model::{alpha_star_strong, alpha_star_weak, ModelParams};
use crate::par;
use crate::spectral::DriftVariant;

/// Cells with `α > α*_strong + GATE_MARGIN` and `α >= GATE_FLOOR` must complete.
pub const GATE_MARGIN: f64 = 0.05;
pub const GATE_FLOOR: f64 = 0.3;

/// Environment variable that overrides [`SweepSpec::parallelism`].
pub const THREADS_ENV: &str = "FRACKS_THREADS";

fn default_beta() -> f64 {
    2.0
}

fn default_parallelism() -> usize {
    1
}

fn default_variant() -> DriftVariant {
    DriftVariant::Helmholtz
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alpha_grid: Vec<f64>,
    pub chi_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub ic_family: InitialCondition,
    #[serde(default)]
    pub config: SolverConfig,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_variant")]
    pub variant: DriftVariant,
    #[serde(default)]
    pub epsilon: f64,
}

impl SweepSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, g) in [
            ("alpha_grid", &self.alpha_grid),
            ("chi_grid", &self.chi_grid),
            ("r_grid", &self.r_grid),
        ] {
            if g.is_empty() {
                return Err(Error::Parse(format!("{name} is empty")));
            }
        }
        if let Some(&a) = self.alpha_grid.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
            return Err(Error::domain("alpha_grid", a, "0 < alpha <= 2"));
        }
        if let Some(&c) = self.chi_grid.iter().find(|&&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::domain("chi_grid", c, "chi > 0"));
        }
        if let Some(&r) = self.r_grid.iter().find(|&&r| !(r >= 0.0 && r.is_finite())) {
            return Err(Error::domain("r_grid", r, "r >= 0"));
        }
        if self.parallelism == 0 {
            return Err(Error::domain("parallelism", 0.0, "parallelism >= 1"));
        }
        self.config.validate()?;
        self.params(1.0, 1.0, 0.0).validate()
    }

    fn params(&self, alpha: f64, chi: f64, r: f64) -> ModelParams {
        ModelParams {
            alpha,
            beta: self.beta,
            chi,
            r,
            epsilon: self.epsilon,
            variant: self.variant,
        }
    }

    /// Every `(α, χ, r)` cell in grid order.
    pub fn cells(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        for &a in &self.alpha_grid {
            for &c in &self.chi_grid {
                for &r in &self.r_grid {
                    out.push((a, c, r));
                }
            }
        }
        out
    }
}

/// Parses a positive thread count from [`THREADS_ENV`].
pub fn threads_override() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Whether the sweep gate asserts completion for this cell.
pub fn is_gated(alpha: f64, chi: f64, r: f64) -> bool {
    alpha > alpha_star_strong(chi, r) + GATE_MARGIN && alpha >= GATE_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub alpha: f64,
    pub chi: f64,
    pub r: f64,
    pub outcome: Outcome,
    pub t_final: f64,
    pub sup_linf: f64,
    pub alpha_star_strong: f64,
    pub alpha_star_weak: f64,
    pub gated: bool,
}

impl RegimeRow {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.alpha
            .total_cmp(&other.alpha)
            .then(self.chi.total_cmp(&other.chi))
            .then(self.r.total_cmp(&other.r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeMap {
    pub rows: Vec<RegimeRow>,
}

const REGIME_COLUMNS: [&str; 9] = [
    "alpha",
    "chi",
    "r",
    "outcome",
    "t_final",
    "sup_linf",
    "alpha_star_strong",
    "alpha_star_weak",
    "gated",
];

impl RegimeMap {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", REGIME_COLUMNS.join(","))?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                fmt_f64(r.alpha),
                fmt_f64(r.chi),
                fmt_f64(r.r),
                r.outcome,
                fmt_f64(r.t_final),
                fmt_f64(r.sup_linf),
                fmt_f64(r.alpha_star_strong),
                fmt_f64(r.alpha_star_weak),
                u8::from(r.gated)
            )?;
        }
        Ok(())
    }

    /// Gated cells that did not complete.
    pub fn gate_failures(&self) -> Vec<&RegimeRow> {
        self.rows
            .iter()
            .filter(|r| r.gated && r.outcome != Outcome::Completed)
            .collect()
    }
}

fn run_cell(
    spec: &SweepSpec,
    grid: TorusGrid,
    (alpha, chi, r): (f64, f64, f64),
) -> Result<RegimeRow> {
    let p = spec.params(alpha, chi, r);
    let u0 = spec.ic_family.sample(grid)?;
    let traj = run(&u0, &p, &spec.config)?;
    log::info!(
        "cell alpha={alpha} chi={chi} r={r}: {} at t={}",
        traj.outcome,
        traj.final_time
    );
    Ok(RegimeRow {
        alpha,
        chi,
        r,
        outcome: traj.outcome,
        t_final: traj.final_time,
        sup_linf: traj.sup_linf(),
        alpha_star_strong: alpha_star_strong(chi, r),
        alpha_star_weak: alpha_star_weak(chi, r),
        gated: is_gated(alpha, chi, r),
    })
}

/// Runs every cell on up to `threads` workers and returns the rows sorted by
/// `(α, χ, r)`.
pub fn run_sweep_with(spec: &SweepSpec, threads: usize) -> Result<RegimeMap> {
    spec.validate()?;
    let grid = TorusGrid::new(spec.config.n)?;
    let cells = spec.cells();
    let results = par::with_threads(threads, || {
        par::map_slice(&cells, |&c| run_cell(spec, grid, c))
    });
    let mut rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    rows.sort_by(RegimeRow::key_cmp);
    Ok(RegimeMap { rows })
}

/// [`run_sweep_with`] at the spec's parallelism.
pub fn run_sweep(spec: &SweepSpec) -> Result<RegimeMap> {
    run_sweep_with(spec, spec.parallelism)
}
