//! Brute-force real-space evaluation of the nonlocal operators.
//!
//! These routines never touch the Fourier symbols in [`crate::spectral`];
//! the only spectral step is trigonometric interpolation of the input onto a
//! finer grid, which introduces no new frequencies. They are the ground truth
//! the spectral implementation is checked against.
//!
//! For `Λ^α` the symmetrized integrand `(2f(x) - f(x-η) - f(x+η))·K(η)` on
//! `[0, π]` behaves like `-f''(x)·η^{1-α}` near the origin, with `K` the
//! periodized kernel `Σ_k |η + 2πk|^{-1-α}`. The quadratic Taylor surrogate
//! `-f''(x)·η²·|η|^{-1-α}` is subtracted before the trapezoid rule and its
//! integral `-f''(x)·π^{2-α}/(2-α)` is restored in closed form, leaving a
//! remainder of order `η^{3-α}`. The same device handles the squared
//! differences of the dissipation functional and the Gagliardo seminorm.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{refine_values, Field};
use crate::par;

/// Discretization controls for the kernel quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Sub-sampling factor relative to the field's grid.
    pub refinement: usize,
    /// Number of explicit periodic images `1 <= |k| <= image_cutoff`.
    pub image_cutoff: usize,
    /// Half-width, in refined cells, of the window around the singularity in
    /// which the (already regularized) remainder is taken as zero.
    pub pv_exclusion: f64,
    /// Add the Euler-Maclaurin estimate of the images beyond the cutoff.
    pub tail_correction: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            refinement: 8,
            image_cutoff: 200,
            pv_exclusion: 1.0,
            tail_correction: true,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.refinement < 2 {
            return Err(Error::domain(
                "refinement",
                self.refinement as f64,
                "refinement >= 2",
            ));
        }
        if self.image_cutoff < 16 {
            return Err(Error::domain(
                "image_cutoff",
                self.image_cutoff as f64,
                "image_cutoff >= 16",
            ));
        }
        if !(self.pv_exclusion > 0.0 && self.pv_exclusion.is_finite()) {
            return Err(Error::domain(
                "pv_exclusion",
                self.pv_exclusion,
                "pv_exclusion > 0",
            ));
        }
        Ok(())
    }

    fn doubled_refinement(&self) -> Self {
        Self {
            refinement: self.refinement * 2,
            pv_exclusion: self.pv_exclusion * 2.0,
            ..*self
        }
    }

    fn doubled_images(&self) -> Self {
        Self {
            image_cutoff: self.image_cutoff * 2,
            ..*self
        }
    }
}

/// Oracle result with its self-estimated absolute tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub tolerance: f64,
}

/// Normalization constant `Γ(1+α)·cos((1-α)π/2)/π` of the kernel of `Λ^α`.
pub fn c_alpha(alpha: f64) -> f64 {
    gamma(1.0 + alpha) * ((1.0 - alpha) * PI / 2.0).cos() / PI
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain("alpha", alpha, "0 < alpha < 2"));
    }
    Ok(())
}

/// Euler-Maclaurin estimate of `Σ_{k > K} [(2πk + η)^{-1-α} + (2πk - η)^{-1-α}]`.
fn image_tail(eta: f64, alpha: f64, cutoff: usize) -> f64 {
    let a1 = 1.0 + alpha;
    let tp = 2.0 * PI;
    let mut sum = 0.0;
    for c in [eta, -eta] {
        let z = tp * cutoff as f64 + c;
        let integral = z.powf(-alpha) / (tp * alpha);
        let f0 = z.powf(-a1);
        let f1 = -a1 * tp * z.powf(-a1 - 1.0);
        let f3 = -a1 * (a1 + 1.0) * (a1 + 2.0) * tp.powi(3) * z.powf(-a1 - 3.0);
        sum += integral - 0.5 * f0 - f1 / 12.0 + f3 / 720.0;
    }
    sum
}

/// Periodic images `Σ_{1<=|k|<=K} |η + 2πk|^{-1-α}` (plus optional tail) for
/// `η ∈ [0, π]`.
pub fn image_kernel(eta: f64, alpha: f64, cutoff: usize, tail: bool) -> f64 {
    let a1 = 1.0 + alpha;
    let tp = 2.0 * PI;
    let mut s = 0.0;
    // smallest terms first
    for k in (1..=cutoff).rev() {
        let base = tp * k as f64;
        s += (base + eta).powf(-a1) + (base - eta).powf(-a1);
    }
    if tail {
        s += image_tail(eta, alpha, cutoff);
    }
    s
}

/// Full periodized kernel `Σ_k |η + 2πk|^{-1-α}`, `0 < η <= π`.
pub fn periodized_kernel(eta: f64, alpha: f64, cutoff: usize, tail: bool) -> f64 {
    eta.powf(-1.0 - alpha) + image_kernel(eta, alpha, cutoff, tail)
}

/// Trigonometric interpolant of a field sampled on a grid `ratio` times finer.
struct Refined {
    values: Vec<f64>,
    ratio: usize,
    h: f64,
}

impl Refined {
    fn new(f: &Field, ratio: usize) -> Self {
        Self {
            values: refine_values(f.values(), ratio),
            ratio,
            h: 2.0 * PI / (f.len() * ratio) as f64,
        }
    }

    #[inline]
    fn m(&self) -> usize {
        self.values.len()
    }

    #[inline]
    fn at(&self, p: usize, offset: isize) -> f64 {
        let m = self.m() as isize;
        self.values[((p as isize + offset).rem_euclid(m)) as usize]
    }

    /// Sixth-order central differences `(f', f'')` at refined node `p`.
    fn derivatives(&self, p: usize) -> (f64, f64) {
        let f = |o: isize| self.at(p, o);
        let d1 = (-f(-3) + 9.0 * f(-2) - 45.0 * f(-1) + 45.0 * f(1) - 9.0 * f(2) + f(3))
            / (60.0 * self.h);
        let d2 = (2.0 * f(-3) - 27.0 * f(-2) + 270.0 * f(-1) - 490.0 * f(0) + 270.0 * f(1)
            - 27.0 * f(2)
            + 2.0 * f(3))
            / (180.0 * self.h * self.h);
        (d1, d2)
    }
}

/// One quadrature level: refined samples plus tables of the periodized
/// kernel and of `η^{1-α}` on `η_j = j·h`, `j = 0..=m/2`.
struct Level {
    refined: Refined,
    kernel: Vec<f64>,
    surrogate: Vec<f64>,
    first_node: usize,
    alpha: f64,
}

impl Level {
    fn new(f: &Field, alpha: f64, q: &QuadratureSpec) -> Self {
        let refined = Refined::new(f, q.refinement);
        let half = refined.m() / 2;
        let h = refined.h;
        let mut kernel = vec![0.0; half + 1];
        let mut surrogate = vec![0.0; half + 1];
        for j in 1..=half {
            let eta = j as f64 * h;
            kernel[j] = periodized_kernel(eta, alpha, q.image_cutoff, q.tail_correction);
            surrogate[j] = eta.powf(1.0 - alpha);
        }
        Self {
            refined,
            kernel,
            surrogate,
            first_node: (q.pv_exclusion.ceil() as usize).max(1),
            alpha,
        }
    }

    /// Trapezoid rule over `[0, π]` of `g(j)` on nodes `first_node..=m/2`,
    /// treating the integrand as zero on the excluded window.
    fn trapezoid(&self, g: impl Fn(usize) -> f64) -> f64 {
        let half = self.refined.m() / 2;
        let mut s = 0.0;
        for j in self.first_node..=half {
            let w = if j == half { 0.5 } else { 1.0 };
            s += w * g(j);
        }
        // the first included node is the right end of the excluded window
        s -= 0.5 * g(self.first_node);
        s * self.refined.h
    }

    fn lambda_alpha(&self, index: usize) -> f64 {
        let a = self.alpha;
        let r = &self.refined;
        let p = index * r.ratio;
        let (_, d2) = r.derivatives(p);
        let fx = r.at(p, 0);
        let integral = self.trapezoid(|j| {
            let jj = j as isize;
            let d = 2.0 * fx - r.at(p, -jj) - r.at(p, jj);
            d * self.kernel[j] + d2 * self.surrogate[j]
        });
        c_alpha(a) * (integral - d2 * PI.powf(2.0 - a) / (2.0 - a))
    }

    fn dissipation(&self, index: usize) -> f64 {
        let a = self.alpha;
        let r = &self.refined;
        let p = index * r.ratio;
        let (d1, _) = r.derivatives(p);
        let fx = r.at(p, 0);
        let integral = self.trapezoid(|j| {
            let jj = j as isize;
            let e = (fx - r.at(p, -jj)).powi(2) + (fx - r.at(p, jj)).powi(2);
            e * self.kernel[j] - 2.0 * d1 * d1 * self.surrogate[j]
        });
        c_alpha(a) * (integral + 2.0 * d1 * d1 * PI.powf(2.0 - a) / (2.0 - a))
    }
}

/// Three-level evaluator: base spec, doubled refinement, doubled images.
/// The doubled-refinement value is reported; the spread is the tolerance.
struct Ladder {
    base: Level,
    fine: Level,
    wide: Level,
}

impl Ladder {
    fn new(f: &Field, alpha: f64, q: &QuadratureSpec) -> Result<Self> {
        check_alpha(alpha)?;
        q.validate()?;
        let fq = q.doubled_refinement();
        Ok(Self {
            base: Level::new(f, alpha, q),
            fine: Level::new(f, alpha, &fq),
            wide: Level::new(f, alpha, &fq.doubled_images()),
        })
    }

    fn eval(&self, op: impl Fn(&Level) -> f64) -> OracleValue {
        let b = op(&self.base);
        let f = op(&self.fine);
        let w = op(&self.wide);
        OracleValue {
            value: f,
            tolerance: (f - b).abs() + (w - f).abs() + 1e-14 * f.abs(),
        }
    }
}

fn check_index(f: &Field, index: usize) -> Result<()> {
    if index >= f.len() {
        return Err(Error::IndexOutOfRange { index, n: f.len() });
    }
    Ok(())
}

/// `Λ^α f` at one grid point from the periodized singular-kernel integral.
pub fn lambda_alpha_point(
    f: &Field,
    alpha: f64,
    index: usize,
    q: &QuadratureSpec,
) -> Result<OracleValue> {
    check_index(f, index)?;
    let ladder = Ladder::new(f, alpha, q)?;
    Ok(ladder.eval(|l| l.lambda_alpha(index)))
}

/// `Λ^α f` at every grid point (parallel over points).
pub fn lambda_alpha_field(f: &Field, alpha: f64, q: &QuadratureSpec) -> Result<Vec<OracleValue>> {
    let ladder = Ladder::new(f, alpha, q)?;
    Ok(par::map_range(f.len(), |i| {
        ladder.eval(|l| l.lambda_alpha(i))
    }))
}

/// Dissipation functional
/// `I(f)(x) = c_α Σ_k ∫ (f(x) - f(y))² / |x - y + 2πk|^{1+α} dy` at one point.
pub fn dissipation_i(
    f: &Field,
    alpha: f64,
    index: usize,
    q: &QuadratureSpec,
) -> Result<OracleValue> {
    check_index(f, index)?;
    let ladder = Ladder::new(f, alpha, q)?;
    Ok(ladder.eval(|l| l.dissipation(index)))
}

pub fn dissipation_i_field(f: &Field, alpha: f64, q: &QuadratureSpec) -> Result<Vec<OracleValue>> {
    let ladder = Ladder::new(f, alpha, q)?;
    Ok(par::map_range(f.len(), |i| {
        ladder.eval(|l| l.dissipation(i))
    }))
}

fn hilbert_at(r: &Refined, index: usize) -> f64 {
    // midpoint rule with spacing 2h on the smooth, even, periodic integrand
    // (f(x-t) - f(x+t))·cot(t/2) over [0, π]
    let p = index * r.ratio;
    let quarter = r.m() / 4;
    let mut s = 0.0;
    for j in 0..quarter {
        let o = (2 * j + 1) as isize;
        let t = o as f64 * r.h;
        s += (r.at(p, -o) - r.at(p, o)) / (0.5 * t).tan();
    }
    s * 2.0 * r.h / (2.0 * PI)
}

fn hilbert_ladder(f: &Field, q: &QuadratureSpec) -> Result<(Refined, Refined)> {
    q.validate()?;
    Ok((
        Refined::new(f, q.refinement),
        Refined::new(f, 2 * q.refinement),
    ))
}

/// Periodic Hilbert transform from the cotangent kernel,
/// `Hf(x) = (1/2π) P.V.∫ f(y) cot((x - y)/2) dy`.
pub fn hilbert_point(f: &Field, index: usize, q: &QuadratureSpec) -> Result<OracleValue> {
    check_index(f, index)?;
    let (b, fi) = hilbert_ladder(f, q)?;
    let (vb, vf) = (hilbert_at(&b, index), hilbert_at(&fi, index));
    Ok(OracleValue {
        value: vf,
        tolerance: (vf - vb).abs() + 1e-14 * vf.abs().max(f.max_abs()),
    })
}

pub fn hilbert_field(f: &Field, q: &QuadratureSpec) -> Result<Vec<OracleValue>> {
    let (b, fi) = hilbert_ladder(f, q)?;
    let scale = f.max_abs();
    Ok(par::map_range(f.len(), |i| {
        let (vb, vf) = (hilbert_at(&b, i), hilbert_at(&fi, i));
        OracleValue {
            value: vf,
            tolerance: (vf - vb).abs() + 1e-14 * vf.abs().max(scale),
        }
    }))
}

/// Default refinement of the Gagliardo double sum.
pub const GAGLIARDO_REFINEMENT: usize = 4;

/// Gagliardo seminorm
/// `(∫∫ |f(x) - f(y)|^p / d(x,y)^{1+sp} dx dy)^{1/p}`, `0 < s < 1`, `p >= 1`,
/// with `d` the geodesic distance on the torus.
pub fn gagliardo_seminorm(f: &Field, s: f64, p: f64) -> Result<f64> {
    gagliardo_seminorm_with(f, s, p, GAGLIARDO_REFINEMENT)
}

pub fn gagliardo_seminorm_with(f: &Field, s: f64, p: f64, refinement: usize) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("s", s, "0 < s < 1"));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain("p", p, "p >= 1"));
    }
    if refinement < 2 {
        return Err(Error::domain(
            "refinement",
            refinement as f64,
            "refinement >= 2",
        ));
    }
    let r = Refined::new(f, refinement);
    let half = r.m() / 2;
    let h = r.h;
    let e_kernel = -1.0 - s * p;
    let e_sur = p - 1.0 - s * p;
    let closed = PI.powf(p - s * p) / (p - s * p);
    // η-dependent powers are shared by all x
    let kern: Vec<f64> = (0..=half).map(|j| (j as f64 * h).powf(e_kernel)).collect();
    let sur: Vec<f64> = (0..=half).map(|j| (j as f64 * h).powf(e_sur)).collect();
    let inner = par::map_range(f.len(), |i| {
        let pidx = i * r.ratio;
        let (d1, _) = r.derivatives(pidx);
        let fx = r.at(pidx, 0);
        let a = 2.0 * d1.abs().powf(p);
        let mut acc = 0.0;
        for j in 1..=half {
            let jj = j as isize;
            let w = if j == half { 0.5 } else { 1.0 };
            let diff = (fx - r.at(pidx, -jj)).abs().powf(p) + (fx - r.at(pidx, jj)).abs().powf(p);
            acc += w * (diff * kern[j] - a * sur[j]);
        }
        acc * h + a * closed
    });
    let total: f64 = inner.iter().sum::<f64>() * f.grid().dx();
    Ok(total.max(0.0).powf(1.0 / p))
}
