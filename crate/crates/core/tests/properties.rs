use std::f64::consts::PI;

use proptest::prelude::*;

use fracks_core::diagnostics::{entropy, fisher_information, homogeneous_sobolev_sq};
use fracks_core::evolution::run;
use fracks_core::grid::{fmt_f64, to_spectrum};
use fracks_core::oracle::gagliardo_seminorm;
use fracks_core::spectral::{
    derivative, derivative_symbol, fractional_laplacian, fractional_symbol, hilbert_symbol,
    potential_symbol, solve_potential,
};
use fracks_core::verification::{check_elliptic_suite, check_log_sobolev};
use fracks_core::{DriftVariant, Field, ModelParams, Outcome, SolverConfig, TorusGrid};

fn grid_size() -> impl Strategy<Value = usize> {
    prop::sample::select(vec![16usize, 32, 64, 128])
}

/// Trigonometric polynomial from `(a_k, b_k)` pairs, `k = 0, 1, ...`.
fn trig(grid: TorusGrid, coeffs: &[(f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let kx = k as f64 * x;
                a * kx.cos() + if k == 0 { 0.0 } else { b * kx.sin() }
            })
            .sum()
    })
    .unwrap()
}

fn coeffs(max_len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 1..max_len)
}

fn field() -> impl Strategy<Value = Field> {
    (grid_size(), coeffs(8)).prop_map(|(n, c)| trig(TorusGrid::new(n).unwrap(), &c))
}

/// `g² + c`, nonnegative with floor `c`.
fn nonnegative(floor: f64) -> impl Strategy<Value = Field> {
    (grid_size(), coeffs(5), floor..floor + 1.0).prop_map(|(n, c, f0)| {
        let g = trig(TorusGrid::new(n).unwrap(), &c);
        g.map(|v| v * v + f0).unwrap()
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(f in field()) {
        let direct: f64 = f.values().iter().map(|v| v * v).sum::<f64>() * f.grid().dx();
        prop_assert!(close(direct, to_spectrum(&f).energy(), 1e-12));
    }

    #[test]
    fn transform_is_linear(
        (n, cf, cg) in (grid_size(), coeffs(8), coeffs(8)),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
    ) {
        let grid = TorusGrid::new(n).unwrap();
        let (f, g) = (trig(grid, &cf), trig(grid, &cg));
        let h = f.zip_with(&g, |x, y| a * x + b * y).unwrap();
        let (sf, sg, sh) = (to_spectrum(&f), to_spectrum(&g), to_spectrum(&h));
        let scale = sh.coeffs().iter().chain(sf.coeffs()).chain(sg.coeffs())
            .map(|c| c.norm()).fold(1.0, f64::max);
        for j in 0..n {
            let d = (sh.coeffs()[j] - (sf.coeffs()[j] * a + sg.coeffs()[j] * b)).norm();
            prop_assert!(d <= 1e-12 * scale);
        }
    }

    #[test]
    fn round_trip(f in field()) {
        let back = to_spectrum(&f).to_field().unwrap();
        prop_assert!(back.max_abs_diff(&f) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn mean_is_rotation_invariant(f in field(), shift in 0usize..128) {
        let n = f.len();
        let mut v = f.values().to_vec();
        v.rotate_left(shift % n);
        let g = Field::new(f.grid(), v).unwrap();
        prop_assert!((f.mean() - g.mean()).abs() <= 1e-14 * f.max_abs().max(1.0));
    }

    #[test]
    fn multipliers_commute(f in field(), s in 0.1..2.0f64, beta in 0.5..3.0f64) {
        let grid = f.grid();
        let ops = [
            fractional_symbol(grid, s).unwrap(),
            hilbert_symbol(grid),
            derivative_symbol(grid),
            potential_symbol(grid, beta, DriftVariant::Helmholtz).unwrap(),
            potential_symbol(grid, beta, DriftVariant::Riesz).unwrap(),
        ];
        for a in &ops {
            for b in &ops {
                let ab = a.apply(&b.apply(&f));
                let ba = b.apply(&a.apply(&f));
                let scale = ab.max_abs().max(1.0);
                prop_assert!(ab.max_abs_diff(&ba) <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn semigroup_and_hilbert_derivative(f in field(), a in 0.1..1.0f64, b in 0.1..1.0f64) {
        let lab = fractional_laplacian(&fractional_laplacian(&f, a).unwrap(), b).unwrap();
        let direct = fractional_laplacian(&f, a + b).unwrap();
        prop_assert!(lab.max_abs_diff(&direct) <= 1e-10 * direct.max_abs().max(1.0));
        // H ∂x = Λ
        let h_dx = hilbert_symbol(f.grid()).apply(&derivative(&f));
        let lam = fractional_laplacian(&f, 1.0).unwrap();
        prop_assert!(h_dx.max_abs_diff(&lam) <= 1e-10 * lam.max_abs().max(1.0));
    }

    #[test]
    fn helmholtz_comparison(u in nonnegative(0.0)) {
        let v = solve_potential(&u, 2.0, DriftVariant::Helmholtz).unwrap();
        let lv = fractional_laplacian(&v, 2.0).unwrap();
        let tol = 1e-10 * u.max_abs();
        prop_assert!(v.min() >= -tol);
        prop_assert!(v.max_abs() <= u.max_abs() + tol);
        for (l, x) in lv.values().iter().zip(u.values()) {
            prop_assert!(*l <= x + tol);
        }
    }

    #[test]
    fn riesz_identity(u in nonnegative(0.0), beta in 0.5..3.0f64) {
        let grid = u.grid();
        let lv = fractional_symbol(grid, beta).unwrap()
            .compose(&potential_symbol(grid, beta, DriftVariant::Riesz).unwrap())
            .apply(&u);
        let mean = u.mean();
        let expected = u.map(|x| x - mean).unwrap();
        prop_assert!(lv.max_abs_diff(&expected) <= 1e-12 * u.max_abs());
    }

    #[test]
    fn gagliardo_equivalent_to_fractional_norm(
        (n, c) in (prop::sample::select(vec![32usize, 64]), coeffs(6)),
        s in prop::sample::select(vec![0.25, 0.5, 0.75]),
    ) {
        let f = trig(TorusGrid::new(n).unwrap(), &c);
        let h = homogeneous_sobolev_sq(&f, s);
        prop_assume!(h > 1e-8);
        let g = gagliardo_seminorm(&f, s, 2.0).unwrap().powi(2);
        let ratio = g / h;
        prop_assert!((0.1..=10.0).contains(&ratio), "ratio {}", ratio);
    }

    #[test]
    fn entropy_is_nonnegative(u in nonnegative(0.0)) {
        prop_assert!(entropy(&u).unwrap() >= 0.0);
    }

    #[test]
    fn log_sobolev_on_unit_mean_fields(u in nonnegative(0.1)) {
        let m = u.mean();
        let f = u.scaled(1.0 / m);
        let lhs: f64 = f.values().iter().map(|v| v * v.ln()).sum::<f64>() * f.grid().dx();
        let rhs = 2.0 * PI + fisher_information(&f) / (2.0 * f.min());
        prop_assert!(lhs <= rhs + 1e-8);
    }

    #[test]
    fn fmt_f64_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Mass law, nonnegativity and the L¹ ceiling along short runs.
    #[test]
    fn trajectory_invariants(
        c in coeffs(4),
        floor in 0.0..0.5f64,
        alpha in 0.8..2.0f64,
        chi in 0.0..1.5f64,
        r in 0.0..1.5f64,
    ) {
        let grid = TorusGrid::new(64).unwrap();
        let u0 = trig(grid, &c).map(|v| v * v + floor).unwrap();
        let p = ModelParams { alpha, chi, r, ..ModelParams::default() };
        let cfg = SolverConfig { n: 64, t_end: 0.5, record_every: 10, ..SolverConfig::default() };
        let traj = run(&u0, &p, &cfg).unwrap();
        prop_assume!(traj.outcome == Outcome::Completed);
        let l1_0 = traj.initial().lp_norms.l1;
        let big_n = l1_0.max(2.0 * PI);
        for (rec, ints) in traj.records.iter().zip(&traj.integrals) {
            prop_assert!(rec.min_u >= -1e-8 * rec.max_u.abs().max(1.0));
            prop_assert!(rec.lp_norms.l1 <= big_n + 1e-6);
            let law = rec.mass - traj.initial().mass - ints.mass_source;
            prop_assert!(law.abs() <= 1e-9 * big_n, "mass law residual {}", law);
        }
    }

    #[test]
    fn verdicts_are_deterministic(seed in any::<u64>()) {
        let a = check_elliptic_suite(5, 2.0, DriftVariant::Helmholtz, seed, 32).unwrap();
        let b = check_elliptic_suite(5, 2.0, DriftVariant::Helmholtz, seed, 32).unwrap();
        prop_assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let a = check_log_sobolev(5, seed, 32).unwrap();
        let b = check_log_sobolev(5, seed, 32).unwrap();
        prop_assert_eq!(a, b);
    }
}
