//! Fourier-multiplier operators on the torus.
//!
//! Every operator here is diagonal in the discrete Fourier basis, so each is
//! a table of symbol values indexed like a [`Spectrum`]. Odd symbols (those
//! carrying a factor `i·sgn(k)`) are zeroed at the Nyquist slot so that real
//! fields map to real fields.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{real_to_spectrum, spectrum_to_real, Field, Spectrum, TorusGrid};

/// How the potential `v` is obtained from the density `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriftVariant {
    /// `v = (1 + Λ^β)^{-1} u`
    Helmholtz,
    /// `v = Λ^{-β}(u - ⟨u⟩)`
    Riesz,
}

impl fmt::Display for DriftVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DriftVariant::Helmholtz => write!(f, "helmholtz"),
            DriftVariant::Riesz => write!(f, "riesz"),
        }
    }
}

impl FromStr for DriftVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "helmholtz" => Ok(DriftVariant::Helmholtz),
            "riesz" => Ok(DriftVariant::Riesz),
            other => Err(Error::Parse(format!(
                "unknown drift variant `{other}` (expected helmholtz|riesz)"
            ))),
        }
    }
}

/// Symbol table of a Fourier multiplier on a fixed grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    grid: TorusGrid,
    values: Vec<Complex64>,
}

impl Symbol {
    /// Real even symbol `m(|k|)`.
    pub fn even(grid: TorusGrid, m: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n())
            .map(|j| Complex64::new(m(grid.wavenumber(j).unsigned_abs() as f64), 0.0))
            .collect();
        Self { grid, values }
    }

    /// Odd symbol `-i·sgn(k)·m(|k|)`, zero at `k = 0` and at Nyquist.
    pub fn odd_hilbert_type(grid: TorusGrid, m: impl Fn(f64) -> f64) -> Self {
        let nyq = grid.nyquist();
        let values = (0..grid.n())
            .map(|j| {
                let k = grid.wavenumber(j);
                if k == 0 || j == nyq {
                    Complex64::new(0.0, 0.0)
                } else {
                    let sgn = k.signum() as f64;
                    Complex64::new(0.0, -sgn * m(k.unsigned_abs() as f64))
                }
            })
            .collect();
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Symbol of the product operator.
    pub fn compose(&self, other: &Symbol) -> Symbol {
        debug_assert_eq!(self.grid, other.grid);
        Symbol {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    /// Multiplies spectral coefficients in place.
    pub fn apply_in_place(&self, coeffs: &mut [Complex64]) {
        for (c, m) in coeffs.iter_mut().zip(&self.values) {
            *c *= m;
        }
    }

    pub fn apply_spectrum(&self, s: &Spectrum) -> Spectrum {
        let mut out = s.clone();
        self.apply_in_place(out.coeffs_mut());
        out
    }

    /// Applies the multiplier to a real field.
    pub fn apply(&self, f: &Field) -> Field {
        debug_assert_eq!(self.grid, f.grid());
        let mut c = real_to_spectrum(f.values());
        self.apply_in_place(&mut c);
        Field::from_trusted(f.grid(), spectrum_to_real(&c))
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::domain("beta", beta, "beta > 0"));
    }
    Ok(())
}

/// Symbol `|k|^s`, `s >= 0`, with `|0|^0 = 1`.
pub fn fractional_symbol(grid: TorusGrid, s: f64) -> Result<Symbol> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::domain(
            "s",
            s,
            "s >= 0 (use solve_potential for negative powers)",
        ));
    }
    Ok(Symbol::even(
        grid,
        |k| if s == 0.0 { 1.0 } else { k.powf(s) },
    ))
}

/// Symbol `-i·sgn(k)`.
pub fn hilbert_symbol(grid: TorusGrid) -> Symbol {
    Symbol::odd_hilbert_type(grid, |_| 1.0)
}

/// Symbol `i·k` of `∂x` (zero at Nyquist).
pub fn derivative_symbol(grid: TorusGrid) -> Symbol {
    // i·k = -(-i·sgn(k))·|k|
    Symbol::odd_hilbert_type(grid, |k| -k)
}

/// Symbol of the potential solve `u ↦ v`.
pub fn potential_symbol(grid: TorusGrid, beta: f64, variant: DriftVariant) -> Result<Symbol> {
    check_beta(beta)?;
    Ok(match variant {
        DriftVariant::Helmholtz => Symbol::even(grid, |k| 1.0 / (1.0 + k.powf(beta))),
        DriftVariant::Riesz => Symbol::even(grid, |k| if k == 0.0 { 0.0 } else { k.powf(-beta) }),
    })
}

/// Fused symbol of `B(u) = Λ^{β-1} H v`.
///
/// Evaluated directly as `-i·sgn(k)·|k|^{β-1}·(potential symbol)` rather than
/// by chaining three multipliers, which matters for `β < 1` where
/// `|k|^{β-1}` is singular at the origin.
pub fn drift_symbol(grid: TorusGrid, beta: f64, variant: DriftVariant) -> Result<Symbol> {
    check_beta(beta)?;
    Ok(match variant {
        DriftVariant::Helmholtz => Symbol::odd_hilbert_type(grid, |k| {
            // k^{β-1}/(1+k^β) written to stay finite for huge k
            let kb = k.powf(beta);
            kb / (k * (1.0 + kb))
        }),
        DriftVariant::Riesz => Symbol::odd_hilbert_type(grid, |k| 1.0 / k),
    })
}

/// Heat-kernel symbol `exp(-k² ε)`.
pub fn heat_symbol(grid: TorusGrid, eps: f64) -> Result<Symbol> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("epsilon", eps, "epsilon > 0"));
    }
    Ok(Symbol::even(grid, |k| (-k * k * eps).exp()))
}

/// `Λ^s f`. For `s > 0` the output has zero mean.
pub fn fractional_laplacian(f: &Field, s: f64) -> Result<Field> {
    Ok(fractional_symbol(f.grid(), s)?.apply(f))
}

/// Periodic Hilbert transform, symbol `-i·sgn(k)`.
pub fn hilbert(f: &Field) -> Field {
    hilbert_symbol(f.grid()).apply(f)
}

/// Spectral derivative `∂x f`.
pub fn derivative(f: &Field) -> Field {
    derivative_symbol(f.grid()).apply(f)
}

/// Solves `v + Λ^β v = u` (Helmholtz) or `Λ^β v = u - ⟨u⟩` (Riesz, zero-mean `v`).
pub fn solve_potential(u: &Field, beta: f64, variant: DriftVariant) -> Result<Field> {
    Ok(potential_symbol(u.grid(), beta, variant)?.apply(u))
}

/// `B(u) = Λ^{β-1} H v` with `v` from [`solve_potential`].
pub fn drift(u: &Field, beta: f64, variant: DriftVariant) -> Result<Field> {
    Ok(drift_symbol(u.grid(), beta, variant)?.apply(u))
}

/// Convolution with the periodic heat kernel at time `eps`.
pub fn mollify(f: &Field, eps: f64) -> Result<Field> {
    Ok(heat_symbol(f.grid(), eps)?.apply(f))
}

/// Largest wavenumber retained by the two-thirds rule.
#[inline]
pub fn dealias_cutoff(grid: TorusGrid) -> i64 {
    grid.n() as i64 / 3
}

/// Zeroes every coefficient in place with `|k| > n/3`.
pub fn dealias_in_place(grid: TorusGrid, coeffs: &mut [Complex64]) {
    let cut = dealias_cutoff(grid);
    for (j, c) in coeffs.iter_mut().enumerate() {
        if grid.wavenumber(j).abs() > cut {
            *c = Complex64::new(0.0, 0.0);
        }
    }
}

/// Two-thirds-rule truncation.
pub fn dealias(s: &Spectrum) -> Spectrum {
    let mut out = s.clone();
    dealias_in_place(s.grid(), out.coeffs_mut());
    out
}
