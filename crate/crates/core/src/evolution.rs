//! First-order IMEX integration with adaptive step control and blow-up
//! detection.
//!
//! The diffusion `-Λ^α - ε Λ^{1.75}` is treated implicitly as a diagonal
//! multiplier; the drift `χ ∂x(u B(u))` (dealiased) and the logistic term
//! `r u (1 - u)` are explicit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{collect_values, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{fft_forward, fft_inverse, Field, TorusGrid};
use crate::model::{ModelParams, REGULARIZATION_ORDER};
use crate::spectral::{
    dealias_cutoff, derivative_symbol, drift_symbol, mollify, potential_symbol, Symbol,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n: usize,
    pub dt_init: f64,
    pub t_end: f64,
    pub adapt: bool,
    pub dt_min: f64,
    /// Accepted steps between diagnostics records.
    pub record_every: usize,
    /// Hard cap on `‖u‖∞`.
    pub blowup_linf: f64,
    /// Spectral-tail fraction which, exceeded at two consecutive records,
    /// counts as blow-up.
    pub blowup_tail: f64,
    /// Heat-kernel time applied to the initial data; `0` disables it.
    pub mollify_ic_eps: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 256,
            dt_init: 1e-3,
            t_end: 1.0,
            adapt: true,
            dt_min: 1e-9,
            record_every: 100,
            blowup_linf: 1e6,
            blowup_tail: 0.1,
            mollify_ic_eps: 0.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        TorusGrid::new(self.n)?;
        if !(self.dt_init > 0.0 && self.dt_init.is_finite()) {
            return Err(Error::domain("dt_init", self.dt_init, "dt_init > 0"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::domain("t_end", self.t_end, "t_end > 0"));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init) {
            return Err(Error::domain(
                "dt_min",
                self.dt_min,
                "0 < dt_min <= dt_init",
            ));
        }
        if self.record_every == 0 {
            return Err(Error::domain("record_every", 0.0, "record_every >= 1"));
        }
        if self.blowup_linf.is_nan() || self.blowup_linf <= 0.0 {
            return Err(Error::domain(
                "blowup_linf",
                self.blowup_linf,
                "blowup_linf > 0",
            ));
        }
        if !(self.blowup_tail > 0.0 && self.blowup_tail <= 1.0) {
            return Err(Error::domain(
                "blowup_tail",
                self.blowup_tail,
                "0 < blowup_tail <= 1",
            ));
        }
        if !(self.mollify_ic_eps >= 0.0 && self.mollify_ic_eps.is_finite()) {
            return Err(Error::domain(
                "mollify_ic_eps",
                self.mollify_ic_eps,
                "mollify_ic_eps >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Completed,
    BlowupDetected,
    DtUnderflow,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Completed => "COMPLETED",
            Outcome::BlowupDetected => "BLOWUP_DETECTED",
            Outcome::DtUnderflow => "DT_UNDERFLOW",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Time integrals accumulated by the left-rectangle rule over accepted steps,
/// matching the explicit treatment of the reaction term so that
/// `mass(t) - mass(0) = mass_source(t)` holds to round-off.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RunningIntegrals {
    /// `∫ ‖u‖²_{L²} dt`.
    pub l2_sq: f64,
    /// `∫ ‖u‖^{2+s}_{L^{2+s}} dt`.
    pub l2ps_pow: f64,
    /// `∫ ‖u‖_{L∞} dt`.
    pub linf: f64,
    /// `∫ r (∫u - ∫u²) dt`.
    pub mass_source: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: ModelParams,
    pub config: SolverConfig,
    pub records: Vec<DiagnosticsRecord>,
    /// Running integrals at the time of each record.
    pub integrals: Vec<RunningIntegrals>,
    pub outcome: Outcome,
    /// State at `t = 0`, after the optional mollification.
    pub initial_field: Field,
    /// Last finite state.
    pub final_field: Field,
    pub final_time: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn sup_linf(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| !r.blowup)
            .map(|r| r.lp_norms.linf)
            .fold(0.0, f64::max)
    }

    pub fn initial(&self) -> &DiagnosticsRecord {
        &self.records[0]
    }
}

/// Explicit part of the right-hand side plus the quantities the step
/// controller needs.
struct Explicit {
    rhs_hat: Vec<Complex64>,
    u_hat: Vec<Complex64>,
    drift_max: f64,
    growth_max: f64,
}

/// Precomputed multipliers for one `(grid, params)` pair.
pub struct Imex {
    grid: TorusGrid,
    params: ModelParams,
    damping: Vec<f64>,
    drift: Symbol,
    growth: Symbol,
    deriv: Symbol,
    cut: i64,
}

impl Imex {
    pub fn new(grid: TorusGrid, params: ModelParams) -> Result<Self> {
        params.validate()?;
        let damping = (0..grid.n())
            .map(|j| {
                let k = grid.wavenumber(j).unsigned_abs() as f64;
                if k == 0.0 {
                    0.0
                } else {
                    k.powf(params.alpha) + params.epsilon * k.powf(REGULARIZATION_ORDER)
                }
            })
            .collect();
        let potential = potential_symbol(grid, params.beta, params.variant)?;
        // ∂x B = Λ^β v
        let growth = Symbol::even(grid, |k| k.powf(params.beta)).compose(&potential);
        Ok(Self {
            grid,
            params,
            damping,
            drift: drift_symbol(grid, params.beta, params.variant)?,
            growth,
            deriv: derivative_symbol(grid),
            cut: dealias_cutoff(grid),
        })
    }

    fn explicit(&self, u: &[f64], with_bounds: bool) -> Explicit {
        let n = self.grid.n();
        let p = &self.params;
        let mut u_hat: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_forward(&mut u_hat);

        let mut b = u_hat.clone();
        self.drift.apply_in_place(&mut b);
        fft_inverse(&mut b);
        let drift_max = b.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));

        let mut rhs_hat = vec![Complex64::new(0.0, 0.0); n];
        if p.chi != 0.0 {
            let mut ub: Vec<Complex64> = u
                .iter()
                .zip(&b)
                .map(|(&ui, bi)| Complex64::new(ui * bi.re, 0.0))
                .collect();
            fft_forward(&mut ub);
            for (j, c) in ub.iter_mut().enumerate() {
                if self.grid.wavenumber(j).abs() > self.cut {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            self.deriv.apply_in_place(&mut ub);
            for (r, c) in rhs_hat.iter_mut().zip(&ub) {
                *r += c * p.chi;
            }
        }
        if p.r != 0.0 {
            let mut react: Vec<Complex64> = u
                .iter()
                .map(|&ui| Complex64::new(p.r * ui * (1.0 - ui), 0.0))
                .collect();
            fft_forward(&mut react);
            for (r, c) in rhs_hat.iter_mut().zip(&react) {
                *r += c;
            }
        }

        let growth_max = if with_bounds && p.chi != 0.0 {
            let mut g = u_hat.clone();
            self.growth.apply_in_place(&mut g);
            fft_inverse(&mut g);
            g.iter().fold(0.0f64, |m, z| m.max(z.re.abs()))
        } else {
            0.0
        };
        Explicit {
            rhs_hat,
            u_hat,
            drift_max,
            growth_max,
        }
    }

    /// `χ ∂x(dealias(u B(u))) + r u (1 - u)` sampled on the grid.
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let mut e = self.explicit(u, false).rhs_hat;
        fft_inverse(&mut e);
        e.into_iter().map(|z| z.re).collect()
    }

    fn advance(&self, ex: &Explicit, dt: f64) -> Vec<f64> {
        let mut next: Vec<Complex64> = ex
            .u_hat
            .iter()
            .zip(&ex.rhs_hat)
            .zip(&self.damping)
            .map(|((u, r), d)| (u + r * dt) / (1.0 + dt * d))
            .collect();
        fft_inverse(&mut next);
        next.into_iter().map(|z| z.re).collect()
    }

    /// One IMEX step of length `dt`.
    pub fn step(&self, u: &[f64], dt: f64) -> Vec<f64> {
        self.advance(&self.explicit(u, false), dt)
    }

    /// Largest stable explicit step: von Neumann bound for the advection
    /// `c ∂x` against the implicit damping, `c = χ‖B‖∞`, over retained modes,
    /// and a rate bound for the local growth `χ Λ^β v + r(1 - 2u)`.
    fn stable_dt(&self, u: &[f64], ex: &Explicit) -> f64 {
        let p = &self.params;
        let mut cap = f64::INFINITY;
        let c = p.chi * ex.drift_max;
        if c > 0.0 {
            let c2 = c * c;
            for k in 1..=self.cut as usize {
                let d = self.damping[k];
                let kf = k as f64;
                let excess = c2 * kf * kf - d * d;
                if excess > 0.0 {
                    cap = cap.min(2.0 * d / excess);
                }
            }
        }
        let react = u.iter().fold(0.0f64, |m, &v| m.max((1.0 - 2.0 * v).abs()));
        let rate = p.chi * ex.growth_max + p.r * react;
        if rate > 0.0 {
            cap = cap.min(0.5 / rate);
        }
        cap
    }
}

/// Explicit right-hand side for `u`.
pub fn rhs_explicit(u: &Field, p: &ModelParams) -> Result<Field> {
    let imex = Imex::new(u.grid(), *p)?;
    Field::new(u.grid(), imex.rhs(u.values()))
}

/// One first-order IMEX step; a non-finite result is reported as an error.
pub fn step_imex(u: &Field, dt: f64, p: &ModelParams) -> Result<Field> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt", dt, "dt > 0"));
    }
    let imex = Imex::new(u.grid(), *p)?;
    Field::new(u.grid(), imex.step(u.values(), dt))
}

/// Stateful blow-up proxy: non-finite samples, `‖u‖∞` above the hard cap, or
/// the spectral tail above its cap at two consecutive records.
#[derive(Debug, Default, Clone)]
pub struct BlowupDetector {
    tail_streak: usize,
}

impl BlowupDetector {
    pub fn check(&mut self, u: &[f64], rec: &DiagnosticsRecord, cfg: &SolverConfig) -> bool {
        if hard_cap_tripped(u, cfg) || rec.blowup {
            return true;
        }
        if rec.spectral_tail > cfg.blowup_tail {
            self.tail_streak += 1;
        } else {
            self.tail_streak = 0;
        }
        self.tail_streak >= 2
    }
}

fn hard_cap_tripped(u: &[f64], cfg: &SolverConfig) -> bool {
    u.iter()
        .any(|v| !v.is_finite() || v.abs() > cfg.blowup_linf)
}

/// Single-record form of [`BlowupDetector`]: a tail exceedance recorded in
/// `rec.blowup` by the caller counts, a lone tail reading does not.
pub fn detect_blowup(u: &Field, rec: &DiagnosticsRecord, cfg: &SolverConfig) -> bool {
    hard_cap_tripped(u.values(), cfg) || rec.blowup
}

const GROWTH_FACTOR: f64 = 1.2;
const GROWTH_AFTER: usize = 10;
const UNDERSHOOT: f64 = 1e-8;

fn linf(u: &[f64]) -> f64 {
    u.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn min(u: &[f64]) -> f64 {
    u.iter().fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Integrates from `u0` to `cfg.t_end` or until blow-up or step underflow.
pub fn run(u0: &Field, p: &ModelParams, cfg: &SolverConfig) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    let grid = u0.grid();
    if grid.n() != cfg.n {
        return Err(Error::LengthMismatch {
            expected: cfg.n,
            got: grid.n(),
        });
    }
    let e = u0.extrema();
    if e.min < -1e-10 {
        return Err(Error::Negative {
            index: e.argmin,
            value: e.min,
        });
    }
    let start = if cfg.mollify_ic_eps > 0.0 {
        mollify(u0, cfg.mollify_ic_eps)?
    } else {
        u0.clone()
    };

    let imex = Imex::new(grid, *p)?;
    let dx = grid.dx();
    let s = p.s_exponent();
    let mut u = start.values().to_vec();
    let mut t = 0.0;
    let mut dt = cfg.dt_init;
    let mut acc = RunningIntegrals::default();
    let mut records = vec![collect_values(grid, &u, 0.0, p)];
    let mut integrals = vec![acc];
    let mut detector = BlowupDetector::default();
    let mut steps = 0usize;
    let mut rejected = 0usize;
    let mut streak = 0usize;
    let mut outcome = Outcome::Completed;
    let t_tol = 1e-12 * cfg.t_end;

    while cfg.t_end - t > t_tol {
        let ex = imex.explicit(&u, cfg.adapt);
        let remaining = cfg.t_end - t;
        let mut h = dt.min(remaining);
        if cfg.adapt {
            let cap = imex.stable_dt(&u, &ex);
            if cap < cfg.dt_min {
                outcome = Outcome::DtUnderflow;
                break;
            }
            h = h.min(cap);
        }
        let next = imex.advance(&ex, h);
        let finite = next.iter().all(|v| v.is_finite());
        let old_linf = linf(&u);
        let new_linf = if finite { linf(&next) } else { f64::INFINITY };

        if cfg.adapt
            && (!finite || new_linf > 2.0 * old_linf || min(&next) < -UNDERSHOOT * new_linf)
        {
            log::debug!(
                "rejected step t={t:.6} h={h:.3e} min {:.3e} -> {:.3e}, linf {old_linf:.4} -> {new_linf:.4}",
                min(&u),
                min(&next)
            );
            if h / 2.0 >= cfg.dt_min {
                dt = h / 2.0;
                rejected += 1;
                streak = 0;
                continue;
            }
            outcome = Outcome::BlowupDetected;
            let mut rec = collect_values(grid, &next, t + h, p);
            rec.blowup = true;
            records.push(rec);
            integrals.push(acc);
            break;
        }

        let sq: f64 = u.iter().map(|v| v * v).sum::<f64>() * dx;
        let sum: f64 = u.iter().sum::<f64>() * dx;
        acc.l2_sq += h * sq;
        acc.l2ps_pow += h * u.iter().map(|v| v.abs().powf(2.0 + s)).sum::<f64>() * dx;
        acc.linf += h * old_linf;
        acc.mass_source += h * p.r * (sum - sq);
        t = if h == remaining || remaining - h <= t_tol {
            cfg.t_end
        } else {
            t + h
        };
        steps += 1;

        if !finite || new_linf > cfg.blowup_linf {
            outcome = Outcome::BlowupDetected;
            let mut rec = collect_values(grid, &next, t, p);
            rec.blowup = true;
            records.push(rec);
            integrals.push(acc);
            break;
        }
        u = next;

        if cfg.adapt {
            streak += 1;
            if streak >= GROWTH_AFTER {
                dt = (dt * GROWTH_FACTOR).min(cfg.dt_init);
                streak = 0;
            }
        }

        let done = cfg.t_end - t <= t_tol;
        if steps.is_multiple_of(cfg.record_every) || done {
            let mut rec = collect_values(grid, &u, t, p);
            if detector.check(&u, &rec, cfg) {
                rec.blowup = true;
                records.push(rec);
                integrals.push(acc);
                outcome = Outcome::BlowupDetected;
                break;
            }
            records.push(rec);
            integrals.push(acc);
        }
    }

    if outcome == Outcome::DtUnderflow && records.last().is_some_and(|r| r.t < t) {
        records.push(collect_values(grid, &u, t, p));
        integrals.push(acc);
    }
    Ok(Trajectory {
        params: *p,
        config: *cfg,
        records,
        integrals,
        outcome,
        initial_field: start,
        final_field: Field::from_trusted(grid, u),
        final_time: t,
        steps,
        rejected,
    })
}
