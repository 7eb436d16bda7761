//! Scalar functionals tracked along trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, real_to_spectrum, spectrum_to_real, Field};
use crate::model::ModelParams;
use crate::oracle::gagliardo_seminorm;
use crate::spectral::dealias_cutoff;

/// Largest negative excursion accepted as round-off by the functionals that
/// require nonnegative input.
pub const NEGATIVITY_TOL: f64 = 1e-12;

/// `(Σ |f_j|^p dx)^{1/p}`; `p = ∞` gives `max |f|`.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::domain("p", p, "p >= 1"));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    let dx = f.grid().dx();
    let s: f64 = if p == 1.0 {
        f.values().iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        f.values().iter().map(|v| v * v).sum()
    } else {
        f.values().iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((s * dx).powf(1.0 / p))
}

fn check_nonnegative(f: &Field) -> Result<()> {
    let e = f.extrema();
    if e.min < -NEGATIVITY_TOL {
        return Err(Error::Negative {
            index: e.argmin,
            value: e.min,
        });
    }
    Ok(())
}

#[inline]
fn entropy_density(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else {
        u * u.ln() - u + 1.0
    }
}

fn entropy_clamped(f: &Field) -> f64 {
    let clamp = f.values().iter().fold(0.0f64, |m, &v| m.max(-v));
    if clamp > 0.0 {
        log::debug!("entropy: clamped negative values up to {clamp:e}");
    }
    f.values().iter().map(|&v| entropy_density(v)).sum::<f64>() * f.grid().dx()
}

/// `∫ u log u - u + 1 dx`, with round-off negatives clamped to zero.
pub fn entropy(f: &Field) -> Result<f64> {
    check_nonnegative(f)?;
    Ok(entropy_clamped(f))
}

/// `Σ_k |k|^{2σ} |f̂_k|²` normalized as `∫ |Λ^σ f|² dx`.
pub fn homogeneous_sobolev_sq(f: &Field, sigma: f64) -> f64 {
    let grid = f.grid();
    let n = grid.n() as f64;
    let c = real_to_spectrum(f.values());
    c.iter()
        .enumerate()
        .map(|(j, z)| {
            let k = grid.wavenumber(j).unsigned_abs() as f64;
            if k == 0.0 {
                0.0
            } else {
                k.powf(2.0 * sigma) * z.norm_sqr()
            }
        })
        .sum::<f64>()
        * 2.0
        * std::f64::consts::PI
        / (n * n)
}

/// `‖f‖_{Ḣ^σ}`.
pub fn homogeneous_sobolev(f: &Field, sigma: f64) -> f64 {
    homogeneous_sobolev_sq(f, sigma).sqrt()
}

/// `‖Λ^{1/2} f‖²_{L²}`.
pub fn fisher_information(f: &Field) -> f64 {
    homogeneous_sobolev_sq(f, 0.5)
}

fn lambda_alpha_values(f: &Field, alpha: f64) -> Vec<f64> {
    let grid = f.grid();
    let mut c = real_to_spectrum(f.values());
    for (j, z) in c.iter_mut().enumerate() {
        let k = grid.wavenumber(j).unsigned_abs() as f64;
        *z *= if k == 0.0 { 0.0 } else { k.powf(alpha) };
    }
    spectrum_to_real(&c)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0 + 1e-15) {
        return Err(Error::domain("alpha", alpha, "0 < alpha <= 2"));
    }
    Ok(())
}

/// `∫ f^s Λ^α f dx` for nonnegative `f`.
pub fn dissipation_pairing(f: &Field, s: f64, alpha: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain("s", s, "0 < s <= 1"));
    }
    check_alpha(alpha)?;
    check_nonnegative(f)?;
    Ok(pairing_unchecked(f, s, alpha))
}

fn pairing_unchecked(f: &Field, s: f64, alpha: f64) -> f64 {
    let l = lambda_alpha_values(f, alpha);
    f.values()
        .iter()
        .zip(&l)
        .map(|(&u, &lu)| {
            let us = if s == 1.0 { u } else { u.max(0.0).powf(s) };
            us * lu
        })
        .sum::<f64>()
        * f.grid().dx()
}

/// `∫ Λ^α(f + 1) · log(f + 1) dx` for nonnegative `f`.
pub fn entropy_dissipation_pairing(f: &Field, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nonnegative(f)?;
    // Λ^α annihilates the shift
    let l = lambda_alpha_values(f, alpha);
    Ok(f.values()
        .iter()
        .zip(&l)
        .map(|(&u, &lu)| lu * u.max(0.0).ln_1p())
        .sum::<f64>()
        * f.grid().dx())
}

/// Fraction of the `L²` energy of `u²`, sampled on the grid, carried by
/// `|k| > n/3`: the part of the quadratic products that dealiasing discards.
pub fn spectral_tail(f: &Field) -> f64 {
    let grid = f.grid();
    let sq: Vec<f64> = f.values().iter().map(|v| v * v).collect();
    let c = real_to_spectrum(&sq);
    let cut = dealias_cutoff(grid);
    let mut total = 0.0;
    let mut tail = 0.0;
    for (j, z) in c.iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        if grid.wavenumber(j).abs() > cut {
            tail += e;
        }
    }
    if total > 0.0 {
        tail / total
    } else {
        0.0
    }
}

/// `L^p` norms for `p ∈ {1, 1+s, 2, 2+s, ∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpNorms {
    pub s: f64,
    pub l1: f64,
    pub l1ps: f64,
    pub l2: f64,
    pub l2ps: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub lp_norms: LpNorms,
    pub entropy: f64,
    pub hs_half_alpha: f64,
    pub dissipation_pairing: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub spectral_tail: f64,
    pub blowup: bool,
}

const CSV_COLUMNS: [&str; 15] = [
    "t",
    "mass",
    "s",
    "l1",
    "l1ps",
    "l2",
    "l2ps",
    "linf",
    "entropy",
    "hs_half_alpha",
    "dissipation_pairing",
    "min_u",
    "max_u",
    "spectral_tail",
    "blowup",
];

impl DiagnosticsRecord {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_fields(&self) -> Vec<String> {
        let l = &self.lp_norms;
        let mut out: Vec<String> = [
            self.t,
            self.mass,
            l.s,
            l.l1,
            l.l1ps,
            l.l2,
            l.l2ps,
            l.linf,
            self.entropy,
            self.hs_half_alpha,
            self.dissipation_pairing,
            self.min_u,
            self.max_u,
            self.spectral_tail,
        ]
        .iter()
        .map(|&v| fmt_f64(v))
        .collect();
        out.push(u8::from(self.blowup).to_string());
        out
    }

    pub fn csv_row(&self) -> String {
        self.csv_fields().join(",")
    }

    pub fn write_csv<W: Write>(records: &[DiagnosticsRecord], mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::csv_header())?;
        for r in records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    fn nonfinite(t: f64, s: f64) -> Self {
        let nan = f64::NAN;
        Self {
            t,
            mass: nan,
            lp_norms: LpNorms {
                s,
                l1: nan,
                l1ps: nan,
                l2: nan,
                l2ps: nan,
                linf: f64::INFINITY,
            },
            entropy: nan,
            hs_half_alpha: nan,
            dissipation_pairing: nan,
            min_u: nan,
            max_u: nan,
            spectral_tail: nan,
            blowup: true,
        }
    }
}

/// Diagnostics of the raw samples `u` at time `t`. Non-finite samples give a
/// record flagged as blow-up.
pub fn collect_values(
    grid: crate::grid::TorusGrid,
    u: &[f64],
    t: f64,
    params: &ModelParams,
) -> DiagnosticsRecord {
    let s = params.s_exponent();
    if u.iter().any(|v| !v.is_finite()) || u.len() != grid.n() {
        return DiagnosticsRecord::nonfinite(t, s);
    }
    collect(&Field::from_trusted(grid, u.to_vec()), t, params)
}

/// Populates every diagnostic for `f` at time `t`.
pub fn collect(f: &Field, t: f64, params: &ModelParams) -> DiagnosticsRecord {
    let s = params.s_exponent();
    let norm = |p: f64| lp_norm(f, p).unwrap_or(f64::NAN);
    let e = f.extrema();
    let pairing = if s > 0.0 {
        pairing_unchecked(f, s, params.alpha)
    } else {
        // f^0 ≡ 1 and Λ^α f has zero mean
        0.0
    };
    DiagnosticsRecord {
        t,
        mass: norm(1.0),
        lp_norms: LpNorms {
            s,
            l1: norm(1.0),
            l1ps: norm(1.0 + s),
            l2: norm(2.0),
            l2ps: norm(2.0 + s),
            linf: f.max_abs(),
        },
        entropy: entropy_clamped(f),
        hs_half_alpha: homogeneous_sobolev(f, params.alpha / 2.0),
        dissipation_pairing: pairing,
        min_u: e.min,
        max_u: e.max,
        spectral_tail: spectral_tail(f),
        blowup: false,
    }
}

/// Ratio `‖f‖^{2+2s}_{Ẇ^{σ,1+s}} / (‖f‖^{1+s}_{L^{1+s}} ∫ f^s Λ^α f)` with
/// `σ = α/(2+2s) - δ`, `δ = α/(4+4s)`. Bounded above for nonnegative `f`.
pub fn seminorm_pairing_ratio(f: &Field, alpha: f64, s: f64) -> Result<f64> {
    let sigma = alpha / (2.0 + 2.0 * s) - alpha / (4.0 + 4.0 * s);
    let semi = gagliardo_seminorm(f, sigma, 1.0 + s)?;
    let lp = lp_norm(f, 1.0 + s)?;
    let pairing = dissipation_pairing(f, s, alpha)?;
    Ok(semi.powf(2.0 + 2.0 * s) / (lp.powf(1.0 + s) * pairing))
}

/// Ratio `‖f‖²_{Ḣ^{α/2}} / (‖f + 1‖_{L∞} ∫ Λ^α(f+1) log(f+1))`.
pub fn sobolev_entropy_ratio(f: &Field, alpha: f64) -> Result<f64> {
    let num = homogeneous_sobolev_sq(f, alpha / 2.0);
    let den = (f.max() + 1.0).abs() * entropy_dissipation_pairing(f, alpha)?;
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::random::RandomFields;
    use std::f64::consts::PI;

    fn g(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn lp_examples() {
        let grid = g(64);
        let one = Field::constant(grid, 1.0).unwrap();
        assert!((lp_norm(&one, 1.0).unwrap() - 2.0 * PI).abs() < 1e-13);
        let c = Field::from_fn(grid, f64::cos).unwrap();
        assert!((lp_norm(&c, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let f = Field::from_fn(grid, |x| 1.0 + x.cos()).unwrap();
        assert!((lp_norm(&f, 1.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(lp_norm(&c, f64::INFINITY).unwrap(), 1.0);
        assert!(lp_norm(&c, 0.5).is_err());
    }

    #[test]
    fn entropy_examples() {
        let grid = g(64);
        assert_eq!(entropy(&Field::constant(grid, 1.0).unwrap()).unwrap(), 0.0);
        let c = 3.0f64;
        let e = entropy(&Field::constant(grid, c).unwrap()).unwrap();
        assert!((e - 2.0 * PI * (c * c.ln() - c + 1.0)).abs() < 1e-12);
        let f = |n| entropy(&Field::from_fn(g(n), |x| 1.0 + 0.5 * x.cos()).unwrap()).unwrap();
        assert!((f(64) - f(256)).abs() < 1e-10);
        assert!(f(64) > 0.0);
        assert!((entropy(&Field::constant(grid, 0.0).unwrap()).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!(entropy(&Field::constant(grid, -1e-13).unwrap()).is_ok());
        assert!(matches!(
            entropy(&Field::from_fn(grid, |x| x.cos()).unwrap()),
            Err(Error::Negative { .. })
        ));
    }

    #[test]
    fn fisher_examples() {
        let grid = g(64);
        assert!(fisher_information(&Field::constant(grid, 4.0).unwrap()).abs() < 1e-20);
        let c = Field::from_fn(grid, f64::cos).unwrap();
        assert!((fisher_information(&c) - PI).abs() < 1e-12);
        let cc = Field::from_fn(grid, |x| x.cos() + (2.0 * x).cos()).unwrap();
        assert!((fisher_information(&cc) - 3.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn pairing_examples() {
        let grid = g(64);
        let c = Field::constant(grid, 2.0).unwrap();
        assert!(dissipation_pairing(&c, 0.5, 1.0).unwrap().abs() < 1e-12);
        assert!(entropy_dissipation_pairing(&c, 1.0).unwrap().abs() < 1e-12);
        let f = Field::from_fn(grid, |x| 1.0 + 0.5 * x.cos()).unwrap();
        for &alpha in &[0.3, 1.0, 1.7] {
            let v = dissipation_pairing(&f, 1.0, alpha).unwrap();
            assert!((v - PI / 4.0).abs() < 1e-12);
        }
        let h = |n| {
            dissipation_pairing(
                &Field::from_fn(g(n), |x| 1.0 + 0.5 * x.cos()).unwrap(),
                0.5,
                1.0,
            )
            .unwrap()
        };
        assert!(h(64) > 0.0 && (h(64) - h(128)).abs() < 1e-8);
        let sq = Field::from_fn(grid, |x| (0.5 + 0.5 * x.cos()).powi(2)).unwrap();
        let e = entropy_dissipation_pairing(&sq, 1.0).unwrap();
        assert!(e > 0.0);
        assert_eq!(e, entropy_dissipation_pairing(&sq, 1.0).unwrap());
        assert!(dissipation_pairing(&Field::from_fn(grid, f64::cos).unwrap(), 0.5, 1.0).is_err());
        assert!(dissipation_pairing(&f, 1.5, 1.0).is_err());
    }

    #[test]
    fn spectral_tail_is_a_fraction() {
        let grid = g(60);
        assert!(spectral_tail(&Field::constant(grid, 1.0).unwrap()) < 1e-28);
        assert!(spectral_tail(&Field::from_fn(grid, |x| (3.0 * x).cos()).unwrap()) < 1e-28);
        // u² of a mode at 12 sits at ±24, above the cutoff 20
        let t = spectral_tail(&Field::from_fn(grid, |x| (12.0 * x).cos()).unwrap());
        assert!((t - 1.0 / 3.0).abs() < 1e-12, "{t}");
    }

    #[test]
    fn collect_examples() {
        let grid = g(64);
        let p = ModelParams::default();
        let r = collect(&Field::constant(grid, 1.0).unwrap(), 0.0, &p);
        assert!((r.mass - 2.0 * PI).abs() < 1e-13);
        assert_eq!(
            (r.entropy, r.min_u, r.max_u, r.spectral_tail),
            (0.0, 1.0, 1.0, 0.0)
        );
        let f = Field::from_fn(grid, |x| 1.0 + x.cos()).unwrap();
        let r = collect(&f, 0.0, &p);
        assert!((r.mass - 2.0 * PI).abs() < 1e-12);
        assert_eq!(r.max_u, 2.0);
        assert!(r.min_u.abs() < 1e-15);
        assert_eq!(collect(&f, 0.0, &p), r);
        assert!(!r.blowup);
        let bad = collect_values(grid, &vec![f64::INFINITY; 64], 1.0, &p);
        assert!(bad.blowup);
        assert_eq!(
            r.csv_fields().len(),
            DiagnosticsRecord::csv_header().split(',').count()
        );
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert!(v.get("entropy").is_some());
    }

    #[test]
    fn pairings_are_nonnegative_on_random_fields() {
        let grid = g(128);
        let mut rf = RandomFields::new(5);
        for _ in 0..50 {
            let f = rf.nonnegative(grid, 20);
            let scale = 1.0 + f.max_abs().powf(1.5);
            assert!(dissipation_pairing(&f, 0.5, 0.8).unwrap() >= -1e-8 * scale);
            assert!(entropy_dissipation_pairing(&f, 1.2).unwrap() >= -1e-8);
            assert!(entropy(&f).unwrap() >= 0.0);
        }
    }
}
