//! Periodic grid, sampled fields and their discrete spectra.
//!
//! Samples live at `x_j = -π + j·dx`, `j = 0..n`. The forward transform is
//! unnormalized and the inverse divides by `n`, so the `k = 0` coefficient of
//! a field equals `n · mean`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative imaginary residue below which an inverse transform is accepted
/// as real.
pub const REALNESS_TOL: f64 = 1e-12;

/// Formats a float with 17 significant digits, the fixed policy for every
/// CSV written by this crate.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Uniform discretization of `[-π, π)` with an even number of samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    n: usize,
}

impl TorusGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Sample location of index `j`.
    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        -PI + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Wavenumber stored at transform slot `j`: `0..=n/2` then `-n/2+1..-1`.
    #[inline]
    pub fn wavenumber(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j <= n / 2 {
            j
        } else {
            j - n
        }
    }

    /// Wavenumbers in transform layout.
    pub fn wavenumbers(&self) -> Vec<i64> {
        (0..self.n).map(|j| self.wavenumber(j)).collect()
    }

    #[inline]
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }

    /// Index of the sample nearest to `x` (wrapped onto the torus).
    pub fn nearest_index(&self, x: f64) -> usize {
        let t = (x + PI).rem_euclid(2.0 * PI) / self.dx();
        (t.round() as usize) % self.n
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if forward {
            p.plan_fft_forward(n)
        } else {
            p.plan_fft_inverse(n)
        }
    })
}

/// In-place unnormalized forward FFT.
pub(crate) fn fft_forward(buf: &mut [Complex64]) {
    plan(buf.len(), true).process(buf);
}

/// In-place inverse FFT including the `1/n` normalization.
pub(crate) fn fft_inverse(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let s = 1.0 / n as f64;
    for c in buf.iter_mut() {
        *c *= s;
    }
}

/// Forward transform of real samples.
pub(crate) fn real_to_spectrum(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    buf
}

/// Inverse transform that keeps only the real part.
pub(crate) fn spectrum_to_real(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    fft_inverse(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}

/// Samples of the trigonometric interpolant of `values` on a grid `ratio`
/// times finer. The Nyquist coefficient is split evenly between `±n/2` so
/// the interpolant stays real.
pub(crate) fn refine_values(values: &[f64], ratio: usize) -> Vec<f64> {
    let n = values.len();
    let m = n * ratio;
    let c = real_to_spectrum(values);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    let scale = ratio as f64;
    for j in 0..half {
        padded[j] = c[j] * scale;
    }
    for j in 1..half {
        padded[m - j] = c[n - j] * scale;
    }
    padded[half] += c[half] * (0.5 * scale);
    padded[m - half] += c[half] * (0.5 * scale);
    spectrum_to_real(&padded)
}

/// Real-valued periodic samples on a [`TorusGrid`]. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at the grid points. Fails if `f` produces a non-finite value.
    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.n()).map(|j| f(grid.x(j))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n()])
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    /// Builds a field from values already known to be finite and of the right
    /// length.
    pub(crate) fn from_trusted(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Pointwise map. The result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::LengthMismatch {
                expected: self.grid.n(),
                got: other.grid.n(),
            });
        }
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn scaled(&self, a: f64) -> Self {
        Self::from_trusted(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        mean(self)
    }

    pub fn extrema(&self) -> Extrema {
        extrema(self)
    }

    pub fn to_spectrum(&self) -> Spectrum {
        Spectrum {
            grid: self.grid,
            coeffs: real_to_spectrum(&self.values),
        }
    }

    /// Trigonometric interpolant sampled on a grid `ratio` times finer.
    pub fn refine(&self, ratio: usize) -> Result<Field> {
        if ratio == 0 {
            return Err(Error::domain("ratio", 0.0, "ratio >= 1"));
        }
        let grid = TorusGrid::new(self.len() * ratio)?;
        Ok(Field::from_trusted(
            grid,
            refine_values(&self.values, ratio),
        ))
    }

    /// Maximum absolute difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Writes `x,value` rows with a header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["x", "value"])?;
        for (j, v) in self.values.iter().enumerate() {
            wr.write_record([fmt_f64(self.grid.x(j)), fmt_f64(*v)])?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`Field::write_csv`]. The grid size is
    /// the number of data rows; the `x` column is checked against it.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut xs = Vec::new();
        let mut vals = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Parse(format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(e.to_string()))
            };
            xs.push(parse(0)?);
            vals.push(parse(1)?);
        }
        let grid = TorusGrid::new(vals.len())?;
        for (j, x) in xs.iter().enumerate() {
            if (x - grid.x(j)).abs() > 1e-9 {
                return Err(Error::Parse(format!(
                    "row {j}: x = {x} does not match grid point {}",
                    grid.x(j)
                )));
            }
        }
        Self::new(grid, vals)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.values)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let vals: Vec<f64> = serde_json::from_str(s)?;
        let grid = TorusGrid::new(vals.len())?;
        Self::new(grid, vals)
    }
}

/// Discrete Fourier coefficients of a real field in transform layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::LengthMismatch {
                expected: grid.n(),
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
        }
    }

    #[inline]
    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at wavenumber `k` (`-n/2 < k <= n/2`).
    pub fn at(&self, k: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        self.coeffs[k.rem_euclid(n) as usize]
    }

    /// Largest conjugate-symmetry defect relative to the largest coefficient,
    /// with the wavenumber where it occurs.
    pub fn symmetry_defect(&self) -> (i64, f64) {
        let n = self.grid.n();
        let scale = self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        if scale == 0.0 {
            return (0, 0.0);
        }
        let mut worst = (0, 0.0);
        for j in 0..=n / 2 {
            let mirror = (n - j) % n;
            let d = (self.coeffs[j] - self.coeffs[mirror].conj()).norm() / scale;
            if d > worst.1 {
                worst = (self.grid.wavenumber(j), d);
            }
        }
        worst
    }

    /// `Σ_k |c_k|²` scaled so that it equals `∫ f² dx` (Parseval).
    pub fn energy(&self) -> f64 {
        let n = self.grid.n() as f64;
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * 2.0 * PI / (n * n)
    }

    pub fn to_field(&self) -> Result<Field> {
        from_spectrum(self)
    }
}

/// Forward transform of a field.
pub fn to_spectrum(f: &Field) -> Spectrum {
    f.to_spectrum()
}

/// Checked inverse transform.
///
/// Fails when the spectrum is not conjugate-symmetric, i.e. when the
/// imaginary residue of the inverse exceeds [`REALNESS_TOL`] relative to the
/// largest coefficient.
pub fn from_spectrum(s: &Spectrum) -> Result<Field> {
    let (k, defect) = s.symmetry_defect();
    if defect > REALNESS_TOL {
        return Err(Error::SpectrumAsymmetric {
            wavenumber: k,
            residue: defect,
        });
    }
    let vals = spectrum_to_real(&s.coeffs);
    Field::new(s.grid, vals)
}

/// Arithmetic mean of the samples, i.e. `(1/2π)∫f` under the rectangle rule.
pub fn mean(f: &Field) -> f64 {
    f.values.iter().sum::<f64>() / f.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: usize,
    pub max: f64,
    pub argmax: usize,
}

/// Grid-resolved extrema; ties resolve to the lowest index.
pub fn extrema(f: &Field) -> Extrema {
    let mut e = Extrema {
        min: f.values[0],
        argmin: 0,
        max: f.values[0],
        argmax: 0,
    };
    for (j, &v) in f.values.iter().enumerate().skip(1) {
        if v < e.min {
            e.min = v;
            e.argmin = j;
        }
        if v > e.max {
            e.max = v;
            e.argmax = j;
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(n: usize) -> TorusGrid {
        TorusGrid::new(n).unwrap()
    }

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(TorusGrid::new(6).is_err());
        assert!(TorusGrid::new(9).is_err());
        assert!(TorusGrid::new(8).is_ok());
        let grid = g(64);
        assert!((grid.dx() * 64.0 - 2.0 * PI).abs() < 1e-15);
        assert_eq!(grid.wavenumber(32), 32);
        assert_eq!(grid.wavenumber(33), -31);
    }

    #[test]
    fn refine_interpolates_trigonometric_polynomials() {
        let f = Field::from_fn(g(16), |x| 1.0 + (3.0 * x).sin() + 0.5 * (8.0 * x).cos()).unwrap();
        let r = f.refine(4).unwrap();
        assert_eq!(r.len(), 64);
        for j in 0..16 {
            assert!((r.values()[4 * j] - f.values()[j]).abs() < 1e-13);
        }
        let exact = Field::from_fn(g(64), |x| 1.0 + (3.0 * x).sin()).unwrap();
        // the Nyquist cosine aliases to a half-amplitude pair at ±8 on the fine grid
        let nyq = Field::from_fn(g(64), |x| 0.5 * (8.0 * x).cos()).unwrap();
        for j in 0..64 {
            let want = exact.values()[j] + nyq.values()[j];
            assert!((r.values()[j] - want).abs() < 1e-13);
        }
        assert!(f.refine(1).unwrap().max_abs_diff(&f) < 1e-14);
        assert!(f.refine(0).is_err());
    }

    #[test]
    fn constant_has_only_mean_mode() {
        let f = Field::constant(g(16), 1.0).unwrap();
        let s = f.to_spectrum();
        assert!((s.at(0).re - 16.0).abs() < 1e-13);
        for k in 1..=8 {
            assert!(s.at(k).norm() < 1e-13);
        }
        assert!((s.at(0).re / 16.0 - f.mean()).abs() < 1e-15);
    }

    #[test]
    fn pure_mode_lands_on_its_wavenumber() {
        let f = Field::from_fn(g(32), |x| (3.0 * x).cos()).unwrap();
        let s = f.to_spectrum();
        for k in -15..=16 {
            let c = s.at(k).norm();
            if k.abs() == 3 {
                assert!((c - 16.0).abs() < 1e-12);
            } else {
                assert!(c < 1e-12, "k={k} c={c}");
            }
        }
    }

    #[test]
    fn inverse_of_zero_and_constant() {
        let grid = g(16);
        assert_eq!(
            from_spectrum(&Spectrum::zeros(grid)).unwrap(),
            Field::zeros(grid)
        );
        let mut s = Spectrum::zeros(grid);
        s.coeffs_mut()[0] = Complex64::new(32.0, 0.0);
        let f = from_spectrum(&s).unwrap();
        assert!(f.values().iter().all(|v| (v - 2.0).abs() < 1e-15));
    }

    #[test]
    fn cos5_round_trip() {
        let f = Field::from_fn(g(64), |x| (5.0 * x).cos()).unwrap();
        let back = from_spectrum(&f.to_spectrum()).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn asymmetric_spectrum_is_rejected() {
        let grid = g(16);
        let mut s = Spectrum::zeros(grid);
        s.coeffs_mut()[2] = Complex64::new(1.0, 0.0);
        match from_spectrum(&s) {
            Err(Error::SpectrumAsymmetric { wavenumber, .. }) => assert_eq!(wavenumber.abs(), 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_sample_names_index() {
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        match Field::new(g(16), v) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn means() {
        let grid = g(64);
        assert!((Field::constant(grid, 3.5).unwrap().mean() - 3.5).abs() < 1e-15);
        for k in 1..10 {
            let f = Field::from_fn(grid, |x| (k as f64 * x).cos()).unwrap();
            assert!(f.mean().abs() < 1e-14);
        }
        let f = Field::from_fn(grid, |x| 1.0 + 0.5 * x.cos()).unwrap();
        assert!((f.mean() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn extrema_examples() {
        let e = Field::zeros(g(16)).extrema();
        assert_eq!((e.min, e.argmin, e.max, e.argmax), (0.0, 0, 0.0, 0));

        let grid = g(16);
        let e = Field::from_fn(grid, f64::cos).unwrap().extrema();
        assert_eq!(e.argmax, 8);
        assert!((e.max - 1.0).abs() < 1e-15);

        let e = Field::from_fn(grid, f64::sin).unwrap().extrema();
        assert_eq!(e.argmin, grid.nearest_index(-PI / 2.0));
        assert_eq!(e.argmax, grid.nearest_index(PI / 2.0));
        assert!((e.min + 1.0).abs() < 1e-15 && (e.max - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_and_json_round_trip() {
        let f = Field::from_fn(g(32), |x| (x.cos()).exp() - 0.3 * (2.0 * x).sin()).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,value\n"));
        let back = Field::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);
        let back = Field::from_json(&f.to_json().unwrap()).unwrap();
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs());
        }
    }

    fn arb_values() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 64)
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(vals in arb_values()) {
            let grid = g(64);
            let f = Field::new(grid, vals).unwrap();
            let s = f.to_spectrum();
            let (_, defect) = s.symmetry_defect();
            prop_assert!(defect < 1e-13);
            let back = from_spectrum(&s).unwrap();
            let scale = f.max_abs().max(1e-300);
            prop_assert!(back.max_abs_diff(&f) / scale <= 1e-12);
            let direct: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * grid.dx();
            prop_assert!((direct - s.energy()).abs() <= 1e-12 * direct.max(1e-300));
        }

        #[test]
        fn linearity(a in -3.0f64..3.0, b in -3.0f64..3.0, u in arb_values(), v in arb_values()) {
            let grid = g(64);
            let f = Field::new(grid, u).unwrap();
            let h = Field::new(grid, v).unwrap();
            let comb = f.zip_with(&h, |p, q| a * p + b * q).unwrap().to_spectrum();
            let (sf, sh) = (f.to_spectrum(), h.to_spectrum());
            let scale = comb.coeffs().iter().fold(1.0_f64, |m, c| m.max(c.norm()));
            for j in 0..64 {
                let lhs = comb.coeffs()[j];
                let rhs = sf.coeffs()[j] * a + sh.coeffs()[j] * b;
                prop_assert!((lhs - rhs).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn mean_is_rotation_invariant(vals in arb_values(), shift in 0usize..64) {
            let grid = g(64);
            let f = Field::new(grid, vals.clone()).unwrap();
            let mut rot = vals;
            rot.rotate_left(shift);
            let r = Field::new(grid, rot).unwrap();
            prop_assert!((f.mean() - r.mean()).abs() <= 1e-13 * f.max_abs().max(1.0));
        }
    }
}
