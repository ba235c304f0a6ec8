//! Self-check suites. Every check yields a residual compared against a
//! tolerance scaled by the caller; predicates report residual 0 or 1 against
//! tolerance 0.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    count_dark_rings, count_dark_rings_field, eval_bg_closed, eval_hg_polar, eval_lg,
    eval_perelomov_closed, eval_state, interior_minima, max_relative_deviation, intelligent_field, overlap,
    quadrature_norm2, radial_operator_rayleigh, rayleigh_rho_max, PolarGrid, DEFAULT_NR,
};
use crate::specfun::{
    bessel_i, bessel_j, binomial, hermite, laguerre, laguerre_genfun_residual,
    laguerre_positive_zeros, ln_factorial,
};
use crate::states::{
    barut_girardello, barut_girardello_with_tail, perelomov_with_tail, intelligent_eigenvalue, intelligent_state, intelligent_state_auto, intelligent_truncation,
    lowering_residual, mean_rings, perelomov, uncertainty_report, wp_distribution,
    intelligent_residual, RadialState,
};
use crate::su11::{
    asymptotic_peak, build_operator, default_dmatrix_margin, rotation_extent, casimir_residual, commutator_residual, dmatrix,
    dmatrix_asymptotic, e_unitarity_report, interior_max_abs, IrrepLabel, OperatorKind,
    OperatorMatrix, Truncation,
};
use crate::two_mode::{
    build_two_mode, canonical_residual, circular_number_residual, circular_state,
    degeneracy_spectrum, kplus_cross_check, radial_link_check, TwoModeBasis, TwoModeOp,
    DEFAULT_N_MAX,
};

pub const REPORT_SCHEMA: &str = "report-v1";

const ALGEBRA_ELLS: [i32; 9] = [0, 1, -1, 2, -2, 5, -5, 10, -10];
const DMATRIX_TAUS: [f64; 4] = [0.25, 0.5, 1.0, 2.0];
const DMATRIX_P_MAX: usize = 128;
/// Relative threshold for the large-k d-function approximation.
pub const ASYMPTOTIC_TOL: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Specfun,
    Algebra,
    States,
    Fields,
    Twomode,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Self::Specfun, Self::Algebra, Self::States, Self::Fields, Self::Twomode];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Specfun => "specfun",
            Self::Algebra => "algebra",
            Self::States => "states",
            Self::Fields => "fields",
            Self::Twomode => "twomode",
            Self::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::EACH
            .into_iter()
            .chain([Self::All])
            .find(|x| x.tag() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub suite: Suite,
    pub check: String,
    /// `None` when the computation itself failed; see `note`.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub suite: Suite,
    pub tol_scale: f64,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn find(&self, check: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.check == check)
    }
}

struct Recorder {
    suite: Suite,
    scale: f64,
    checks: Vec<Check>,
}

impl Recorder {
    fn residual(&mut self, check: impl Into<String>, value: Result<f64>, tolerance: f64) {
        let check = check.into();
        let (residual, note) = match value {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = residual.is_some_and(|r| r.is_finite() && r <= tolerance * self.scale);
        self.checks.push(Check {
            suite: self.suite,
            check,
            residual,
            tolerance,
            pass,
            note,
        });
    }

    fn predicate(&mut self, check: impl Into<String>, value: Result<bool>, note: String) {
        let value = value.map(|ok| if ok { 0.0 } else { 1.0 });
        let failed = value.is_err();
        self.residual(check, value, 0.0);
        if !failed {
            if let Some(last) = self.checks.last_mut() {
                last.note = Some(note);
            }
        }
    }
}

/// Runs `suite` with every tolerance multiplied by `tol_scale`.
pub fn run(suite: Suite, tol_scale: f64) -> Result<Report> {
    if !(tol_scale > 0.0 && tol_scale.is_finite()) {
        return Err(Error::Domain(format!("tolerance scale must be positive, got {tol_scale}")));
    }
    let list: Vec<Suite> = match suite {
        Suite::All => Suite::EACH.to_vec(),
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in list {
        let mut rec = Recorder {
            suite: s,
            scale: tol_scale,
            checks: Vec::new(),
        };
        match s {
            Suite::Specfun => specfun_suite(&mut rec),
            Suite::Algebra => algebra_suite(&mut rec),
            Suite::States => states_suite(&mut rec),
            Suite::Fields => fields_suite(&mut rec),
            Suite::Twomode => twomode_suite(&mut rec),
            Suite::All => unreachable!(),
        }
        checks.extend(rec.checks);
    }
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        suite,
        tol_scale,
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn try_max(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0, |acc, v| Ok(f64::max(acc, v?)))
}

// ---------------------------------------------------------------- specfun

/// Explicit sum `Σ_j (-1)^j C(p+a, p-j) x^j / j!` and the sum of its moduli.
fn laguerre_series(p: usize, a: usize, x: f64) -> (f64, f64) {
    let (mut sum, mut cond) = (0.0, 0.0);
    let mut power = 1.0;
    for j in 0..=p {
        if j > 0 {
            power *= x / j as f64;
        }
        let t = binomial_product((p + a) as u64, (p - j) as u64) * power;
        sum += if j % 2 == 0 { t } else { -t };
        cond += t;
    }
    (sum, cond)
}

/// `Σ_m (-1)^m n!/(m!(n-2m)!) (2x)^{n-2m}`.
fn hermite_series(n: usize, x: f64) -> f64 {
    (0..=n / 2)
        .map(|m| {
            let t = (ln_factorial(n as u64) - ln_factorial(m as u64) - ln_factorial((n - 2 * m) as u64)).exp()
                * (2.0 * x).powi((n - 2 * m) as i32);
            if m % 2 == 0 { t } else { -t }
        })
        .sum()
}

/// Trapezoid rule on the periodic integrands
/// `J_n = (1/π)∫cos(nθ - x sinθ)`, `I_n = (1/π)∫e^{x cosθ}cos(nθ)`.
fn bessel_quadrature(n: u32, x: f64) -> (f64, f64) {
    const POINTS: usize = 1024;
    let h = 2.0 * PI / POINTS as f64;
    let (mut j, mut i) = (0.0, 0.0);
    for q in 0..POINTS {
        let t = q as f64 * h;
        j += (f64::from(n) * t - x * t.sin()).cos();
        i += (x * t.cos()).exp() * (f64::from(n) * t).cos();
    }
    (j * h / (2.0 * PI), i * h / (2.0 * PI))
}

fn binomial_product(n: u64, r: u64) -> f64 {
    (0..r).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

fn specfun_suite(rec: &mut Recorder) {
    let mut worst = 0.0f64;
    for p in [0, 1, 2, 5, 10, 20] {
        for a in [0, 1, 3, 7] {
            for x in [0.1, 1.0, 5.0, 15.0, 30.0] {
                let (ser, cond) = laguerre_series(p, a, x);
                worst = worst.max((laguerre(p, a, x) - ser).abs() / (ser.abs() + 1e-5 * cond));
            }
        }
    }
    rec.residual("laguerre_vs_series", Ok(worst), 1e-10);

    let origin = max_of((0..=30u64).flat_map(|p| {
        (0..=30u64).map(move |a| {
            let b = binomial_product(p + a, p);
            (laguerre(p as usize, a as usize, 0.0) - b).abs() / b
        })
    }));
    rec.residual("laguerre_origin_binomial", Ok(origin), 1e-12);

    let mut count_ok = true;
    let mut root = 0.0f64;
    for p in 0..=9 {
        for a in 0..=6 {
            match laguerre_positive_zeros(p, a) {
                Ok(z) => {
                    count_ok &= z.len() == p && z.windows(2).all(|w| w[0] < w[1]) && z.iter().all(|&x| x > 0.0);
                    root = max_of(z.iter().map(|&x| laguerre(p, a, x).abs()).chain([root]));
                }
                Err(_) => count_ok = false,
            }
        }
    }
    rec.predicate(
        "laguerre_zero_count",
        Ok(count_ok),
        "p distinct positive zeros for p <= 9, a <= 6".into(),
    );
    rec.residual("laguerre_zero_residual", Ok(root), 1e-9);

    let herm = max_of((0..=12).flat_map(|n| {
        [-2.5, -0.3, 0.0, 0.7, 3.1].map(|x| {
            let s = hermite_series(n, x);
            (hermite(n, x) - s).abs() / s.abs().max(1.0)
        })
    }));
    rec.residual("hermite_vs_series", Ok(herm), 1e-12);

    let bessel = try_max((0..=8u32).flat_map(|n| {
        [0.0, 0.5, 2.0, 7.5, 20.0, 45.0].map(move |x| {
            let (jq, iq) = bessel_quadrature(n, x);
            let dj = (bessel_j(n, x)? - jq).abs() / jq.abs().max(1e-3);
            let di = (bessel_i(n, x)? - iq).abs() / iq.max(1e-3 * x.exp());
            Ok(dj.max(di))
        })
    }));
    rec.residual("bessel_vs_quadrature", bessel, 1e-12);

    let binom = try_max((0..=60u64).flat_map(|n| {
        (0..=n).map(move |r| {
            let b = binomial_product(n, r);
            Ok((binomial(n as f64, r)? - b).abs() / b)
        })
    }));
    rec.residual("binomial_vs_product", binom, 1e-13);

    let genfun = try_max([(0.5, 1.0, 0), (-0.6, 3.0, 2), (0.8, 8.0, 4), (0.3, 0.2, 1)]
        .map(|(g, x, l)| laguerre_genfun_residual(g, x, l, 400)));
    rec.residual("laguerre_generating_function", genfun, 1e-10);
}

// ---------------------------------------------------------------- algebra

fn scaled(m: &OperatorMatrix, s: Complex64) -> OperatorMatrix {
    OperatorMatrix::from_entries(m.irrep(), m.truncation(), m.entries() * s).expect("same shape")
}

fn algebra_suite(rec: &mut Recorder) {
    use OperatorKind::*;
    let trunc = Truncation::algebra(64).expect("valid truncation");
    let i = Complex64::i();
    let names = ["[k+,k-]=-2kz", "[kz,k+]=k+", "[kz,k-]=-k-", "[kx,ky]=-ikz", "[ky,kz]=ikx", "[kz,kx]=iky"];
    for ell in ALGEBRA_ELLS {
        let irrep = IrrepLabel::new(ell);
        let g = |w| build_operator(irrep, w, trunc);
        let kz = g(Kz);
        let cases = [
            (g(KPlus), g(KMinus), kz.clone(), -2.0),
            (kz.clone(), g(KPlus), g(KPlus), 1.0),
            (kz.clone(), g(KMinus), g(KMinus), -1.0),
            (g(Kx), g(Ky), scaled(&kz, -i), 1.0),
            (g(Ky), kz.clone(), scaled(&g(Kx), i), 1.0),
            (kz.clone(), g(Kx), scaled(&g(Ky), i), 1.0),
        ];
        let comm = try_max(cases.iter().map(|(a, b, e, s)| commutator_residual(a, b, e, *s)));
        rec.residual(format!("commutators ell={ell} ({})", names.join(", ")), comm, 1e-12);
        rec.residual(format!("casimir ell={ell}"), Ok(casimir_residual(irrep, trunc)), 1e-12);

        let eye = DMatrix::<Complex64>::identity(trunc.dim(), trunc.dim());
        let derived = (g(NHat).entries() - eye * c(irrep.abs_ell() as f64)) * c(0.5);
        let p_hat = g(PHat);
        rec.residual(
            format!("p_hat=(n_hat-|ell|)/2 ell={ell}"),
            Ok(interior_max_abs(&(derived - p_hat.entries()), trunc.interior())),
            1e-12,
        );
        let e = g(ELower);
        rec.residual(format!("[e,p_hat]=e ell={ell}"), commutator_residual(&e, &p_hat, &e, 1.0), 1e-14);
        let (u1, u2) = e_unitarity_report(irrep, trunc);
        rec.residual(format!("e_unitarity ell={ell}"), Ok(u1.max(u2)), 1e-12);
        let herm = [Kx, Ky, Kz, PHat, NHat, Casimir].map(|w| g(w).hermiticity_defect());
        rec.residual(format!("hermiticity ell={ell}"), Ok(max_of(herm)), 1e-12);
    }
    dmatrix_checks(rec);
    asymptotic_check(rec);
}

fn dmatrix_checks(rec: &mut Recorder) {
    for ell in [0, 1, -3] {
        let irrep = IrrepLabel::new(ell);
        let id = Truncation::for_dmatrix(irrep, 0.0, 40)
            .and_then(|t| dmatrix(irrep, 0.0, t))
            .map(|d| max_of((d.entries() - DMatrix::<Complex64>::identity(d.dim(), d.dim())).iter().map(|z| z.norm())));
        rec.residual(format!("dmatrix_identity ell={ell}"), id, 1e-15);
        for tau in DMATRIX_TAUS {
            let result = (|| -> Result<[f64; 4]> {
                let trunc = Truncation::for_dmatrix(irrep, tau, DMATRIX_P_MAX)?;
                let d = dmatrix(irrep, tau, trunc)?;
                let last = trunc.interior();
                let real = d.entries().map(|z| z.re);
                let rows = real.rows(0, last + 1);
                let ortho = (&rows * rows.transpose() - DMatrix::<f64>::identity(last + 1, last + 1)).amax();
                let half = dmatrix(irrep, tau / 2.0, trunc)?;
                let squared = half.entries() * half.entries();
                let additive = interior_max_abs(&(squared - d.entries()), last);
                let padded = Truncation::new(trunc.dim() + trunc.margin() - 1, 0)?;
                let ky = build_operator(irrep, OperatorKind::Ky, padded);
                let oracle = (ky.entries() * Complex64::new(0.0, tau)).exp();
                let mut realness = 0.0f64;
                for r in 0..=last {
                    for s in 0..=last {
                        realness = realness.max((oracle[(r, s)] - d.get(r, s)).norm());
                    }
                }
                let reverse = dmatrix(irrep, -tau, trunc)?;
                let transpose = interior_max_abs(&(reverse.entries() - d.entries().transpose()), last);
                Ok([ortho, additive, realness, transpose])
            })();
            let pick = |k: usize| result.as_ref().map(|v| v[k]).map_err(Clone::clone);
            rec.residual(format!("dmatrix_orthonormality ell={ell} tau={tau}"), pick(0), 1e-10);
            rec.residual(format!("dmatrix_additivity ell={ell} tau={tau}"), pick(1), 1e-10);
            rec.residual(format!("dmatrix_realness ell={ell} tau={tau}"), pick(2), 1e-13);
            rec.residual(format!("dmatrix_reversal ell={ell} tau={tau}"), pick(3), 1e-10);
        }
    }
    let irrep = IrrepLabel::new(0);
    let vacuum = try_max(DMATRIX_TAUS.map(|tau| {
        let d = dmatrix(irrep, tau, Truncation::for_dmatrix(irrep, tau, DMATRIX_P_MAX)?)?;
        Ok((d.get(0, 0).re - (tau / 2.0).cosh().recip()).abs())
    }));
    rec.residual("dmatrix_vacuum_sech k=1/2", vacuum, 1e-10);
}

/// Largest relative error of the large-k formula against the exact
/// `d^k_{k+p,k}` for `k = 50`, `1 <= p <= 5`, `τ ∈ [τ_p - 0.3, τ_p + 0.3]`.
///
/// One d-matrix per τ serves every `p` whose window contains it; τ runs over
/// a 0.05 grid spanning all windows plus each `τ_p`.
pub fn asymptotic_error() -> Result<f64> {
    const P_TOP: usize = 5;
    const HALF_WIDTH: f64 = 0.3;
    let irrep = IrrepLabel::new(99);
    let k = irrep.k();
    let peaks: Vec<f64> = (1..=P_TOP).map(|p| asymptotic_peak(k, p)).collect();
    let lo = peaks[0] - HALF_WIDTH;
    let hi = peaks[P_TOP - 1] + HALF_WIDTH;
    let steps = ((hi - lo) / 0.05).ceil() as usize;
    let mut taus: Vec<f64> = (0..=steps).map(|j| (lo + 0.05 * j as f64).min(hi)).collect();
    taus.extend(&peaks);
    let mut worst = 0.0f64;
    for tau in taus {
        let floor = default_dmatrix_margin(k, tau);
        let p_max = rotation_extent(k, P_TOP, tau).max(floor + P_TOP);
        let d = dmatrix(irrep, tau, Truncation::for_dmatrix(irrep, tau, p_max)?)?;
        for (p, tp) in (1..=P_TOP).zip(&peaks) {
            if (tau - tp).abs() <= HALF_WIDTH + 1e-12 {
                let exact = d.get(p, 0).re;
                worst = worst.max((dmatrix_asymptotic(k, p, tau)? - exact).abs() / exact.abs());
            }
        }
    }
    Ok(worst)
}

fn asymptotic_check(rec: &mut Recorder) {
    rec.residual("dmatrix_asymptotic k=50 p=1..5", asymptotic_error(), ASYMPTOTIC_TOL);
}

// ---------------------------------------------------------------- states

/// Intelligent state on twice the automatic truncation, so the boundary
/// amplitude no longer limits eigen residuals.
fn intelligent_state_padded(irrep: IrrepLabel, m: usize, tau: f64) -> Result<RadialState> {
    let auto = intelligent_state_auto(irrep, m, tau)?;
    let margin = intelligent_truncation(irrep, m, tau)?.margin();
    intelligent_state(irrep, m, tau, Truncation::new(2 * auto.p_max(), margin)?)
}

fn deep_perelomov(irrep: IrrepLabel, zeta: Complex64, tol: f64) -> Result<RadialState> {
    perelomov_with_tail(irrep, zeta, 16, tol)
}

const PERELOMOV_CASES: [(i32, f64, f64); 5] = [(0, 0.5, 0.0), (1, 0.7, 0.3), (-3, 0.3, 2.0), (5, 0.6, -1.0), (2, 0.9, 0.5)];

fn states_suite(rec: &mut Recorder) {
    for (ell, modulus, arg) in PERELOMOV_CASES {
        let irrep = IrrepLabel::new(ell);
        let zeta = Complex64::from_polar(modulus, arg);
        let tag = format!("ell={ell} zeta={modulus}@{arg}");
        let s = deep_perelomov(irrep, zeta, 1e-14);
        rec.residual(format!("perelomov_norm {tag}"), s.as_ref().map(|s| (s.norm2() - 1.0).abs()).map_err(Clone::clone), 1e-12);
        let wp = s.as_ref().map_err(Clone::clone).and_then(|s| {
            let w = wp_distribution(irrep, zeta, s.p_max())?;
            Ok(max_of(w.iter().zip(s.coeffs()).map(|(w, c)| (w - c.norm_sqr()).abs())))
        });
        rec.residual(format!("wp_vs_coefficients {tag}"), wp, 1e-12);
        let moment = s.as_ref().map_err(Clone::clone).and_then(|s| {
            let w = wp_distribution(irrep, zeta, s.p_max())?;
            let pbar = mean_rings(irrep, zeta)?;
            let sum: f64 = w.iter().enumerate().map(|(p, w)| p as f64 * w).sum();
            Ok((sum - pbar).abs() / pbar.max(1.0))
        });
        rec.residual(format!("pbar_moment {tag}"), moment, 1e-10);
    }

    for (ell, zeta) in [(0, c(0.8)), (2, Complex64::from_polar(1.5, PI / 4.0)), (-4, c(6.0)), (1, Complex64::new(-3.0, 2.0))] {
        let irrep = IrrepLabel::new(ell);
        let r = barut_girardello_with_tail(irrep, zeta, 16, 1e-30).map(|s| lowering_residual(&s, zeta));
        rec.residual(format!("bg_eigen ell={ell} zeta={zeta}"), r, 1e-10);
    }
    let bg_norm = try_max([(0, 0.7), (3, 2.0), (-2, 5.0)].map(|(ell, x)| {
        let irrep = IrrepLabel::new(ell);
        let a = irrep.abs_ell();
        let s = barut_girardello(irrep, c(x), 8)?;
        let norm = (-0.5 * ln_factorial(a as u64)).exp() / s.coeffs()[0].re;
        let expected = (bessel_i(a as u32, 2.0 * x)? / x.powi(a as i32)).sqrt();
        Ok((norm - expected).abs() / expected)
    }));
    rec.residual("bg_normalization_vs_bessel", bg_norm, 1e-12);

    let (mut printed, mut opposite, mut saturation) = (Ok(0.0), Ok(0.0), Ok(0.0));
    let mut squeezed = true;
    for ell in [0, 1, 3, 5] {
        for m in [0, 2, 5] {
            for tau in [0.3, 0.8, 1.5] {
                let irrep = IrrepLabel::new(ell);
                let step = intelligent_state_padded(irrep, m, tau).map(|s| {
                    let lam = intelligent_eigenvalue(irrep, m, tau);
                    let r = uncertainty_report(&s);
                    squeezed &= r.squeezed_x || r.squeezed_y;
                    (
                        intelligent_residual(&s, tau.cosh(), lam),
                        intelligent_residual(&s, tau.cosh(), -lam),
                        (r.product - r.bound).abs(),
                    )
                });
                let fold = |acc: Result<f64>, v: Result<f64>| -> Result<f64> { Ok(acc?.max(v?)) };
                printed = fold(printed, step.clone().map(|v| v.0));
                opposite = fold(opposite, step.clone().map(|v| v.1));
                saturation = fold(saturation, step.map(|v| v.2));
            }
        }
    }
    rec.residual("intelligent_eigen lambda=cosh(tau) Lambda=-(k+M)sinh(tau)", printed, 1e-9);
    rec.residual("intelligent_eigen lambda=cosh(tau) Lambda=+(k+M)sinh(tau)", opposite, 1e-9);
    rec.residual("intelligent_saturation", saturation, 1e-8);
    rec.predicate(
        "intelligent_family_squeezed",
        Ok(squeezed),
        "one variance below |<kz>|/2 for every tau > 0".into(),
    );

    let vac = (|| -> Result<f64> {
        let irrep = IrrepLabel::new(1);
        let tau: f64 = 0.5;
        let s = intelligent_state_auto(irrep, 0, tau)?;
        let p = perelomov(irrep, c((tau / 2.0).tanh()), s.p_max())?.resized(s.p_max());
        Ok(max_of(s.coeffs().iter().zip(p.coeffs()).map(|(a, b)| (a - b).norm())))
    })();
    rec.residual("intelligent_M0_is_perelomov", vac, 1e-10);

    for (name, state) in [
        ("perelomov", perelomov(IrrepLabel::new(2), c(0.5), 16)),
        ("barut_girardello", barut_girardello(IrrepLabel::new(2), c(1.3), 16)),
    ] {
        let verdict = state.map(|s| {
            let r = uncertainty_report(&s);
            (r.intelligent && !r.squeezed_x && !r.squeezed_y, r)
        });
        let note = match &verdict {
            Ok((_, r)) => format!(
                "product {:.12e}, bound {:.12e}, var_kx {:.12e}, var_ky {:.12e}",
                r.product, r.bound, r.var_kx, r.var_ky
            ),
            Err(_) => String::new(),
        };
        rec.predicate(format!("{name}_real_zeta_intelligent_not_squeezed"), verdict.map(|v| v.0), note);
    }

    let mut rng = StdRng::seed_from_u64(0x5eed_1a6e);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let ell = rng.random_range(-6..=6);
        let n = rng.random_range(1..=24);
        let raw: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-3 {
            continue;
        }
        let coeffs = raw.iter().map(|z| z / norm).collect();
        if let Ok(s) = RadialState::from_coeffs(IrrepLabel::new(ell), coeffs, 0.0) {
            let r = uncertainty_report(&s);
            worst = worst.max(r.bound - r.product);
        }
    }
    rec.residual("robertson_random_states", Ok(worst.max(0.0)), 1e-9);
}

// ---------------------------------------------------------------- fields

fn lg_gram(ell: i32, p_top: usize, grid: &PolarGrid) -> Result<DMatrix<Complex64>> {
    let modes = (0..=p_top).map(|p| eval_lg(p, ell, grid)).collect::<Result<Vec<_>>>()?;
    let mut gram = DMatrix::zeros(p_top + 1, p_top + 1);
    for (i, a) in modes.iter().enumerate() {
        for (j, b) in modes.iter().enumerate() {
            gram[(i, j)] = overlap(a, b)?;
        }
    }
    Ok(gram)
}

/// Nondecreasing up to the mode, nonincreasing after.
fn unimodal(w: &[f64]) -> (bool, usize) {
    let mode = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap_or(0);
    let rising = w[..=mode].windows(2).all(|x| x[0] <= x[1]);
    let falling = w[mode..].windows(2).all(|x| x[0] >= x[1]);
    (rising && falling, mode)
}

/// Modes of `W_p` for ℓ = 1 at the given mean ring numbers.
pub fn figure_wp_modes(pbars: &[f64]) -> Result<Vec<(bool, usize)>> {
    let irrep = IrrepLabel::new(1);
    pbars
        .iter()
        .map(|&pbar| {
            let zeta = c((pbar / (pbar + 2.0)).sqrt());
            let s = deep_perelomov(irrep, zeta, 1e-14)?;
            Ok(unimodal(&wp_distribution(irrep, zeta, s.p_max())?))
        })
        .collect()
}

/// Interior minima and ring count of an intelligent-state field on its
/// default grid.
pub fn intelligent_profile_stats(ell: i32, m: usize, tau: f64) -> Result<(usize, usize)> {
    let irrep = IrrepLabel::new(ell);
    let mut trunc = intelligent_truncation(irrep, m, tau)?;
    let state = intelligent_state_auto(irrep, m, tau)?;
    trunc = Truncation::new(state.p_max(), trunc.margin())?;
    let grid = PolarGrid::default_for(trunc.p_max(), ell, SQRT_2)?;
    let f = intelligent_field(ell, m, tau, &grid, trunc)?;
    Ok((interior_minima(&f)?, count_dark_rings_field(&f)?))
}

/// Observed convergence order of the Rayleigh quotient over `h, h/2, h/4`.
pub fn rayleigh_order(p: usize, ell: i32, h: f64) -> Result<f64> {
    let q = [h, h / 2.0, h / 4.0].map(|s| radial_operator_rayleigh(p, ell, s));
    let [a, b, d] = [q[0].clone()?, q[1].clone()?, q[2].clone()?];
    Ok(((a - b) / (b - d)).abs().log2())
}

fn fields_suite(rec: &mut Recorder) {
    for ell in [0, 1, 2, -3] {
        let r = PolarGrid::default_for(8, ell, SQRT_2).and_then(|g| lg_gram(ell, 8, &g)).map(|gram| {
            (gram - DMatrix::<Complex64>::identity(9, 9)).iter().map(|z| z.norm()).fold(0.0, f64::max)
        });
        rec.residual(format!("lg_orthonormality ell={ell} p<=8 n_r={DEFAULT_NR}"), r, 1e-8);
    }
    for (p, ell) in [(0, 0), (3, 0), (8, 0), (2, 1), (5, -4), (8, 3)] {
        let norm = PolarGrid::default_for(p, ell, SQRT_2)
            .and_then(|g| eval_lg(p, ell, &g))
            .map(|f| (quadrature_norm2(&f) - 1.0).abs());
        rec.residual(format!("lg_default_grid_norm p={p} ell={ell}"), norm, 1e-6);
    }

    let per = try_max(
        [(1, Complex64::from_polar(0.5, PI / 6.0)), (0, c(0.3)), (-3, Complex64::from_polar(0.7, 2.0))].map(|(ell, zeta)| {
            let s = deep_perelomov(IrrepLabel::new(ell), zeta, 1e-32)?;
            let g = PolarGrid::default_for(s.p_max(), ell, SQRT_2)?;
            max_relative_deviation(&eval_state(&s, &g)?, &eval_perelomov_closed(zeta, ell, &g)?)
        }),
    );
    rec.residual("perelomov_closed_form_vs_expansion", per, 1e-8);

    let bg = try_max(
        [(1, c(1.0)), (-2, Complex64::from_polar(1.5, 2.0)), (0, c(0.0)), (3, c(2.5))].map(|(ell, zeta)| {
            let s = barut_girardello_with_tail(IrrepLabel::new(ell), zeta, 16, 1e-30)?;
            let g = PolarGrid::default_for(20, ell, SQRT_2)?;
            max_relative_deviation(&eval_state(&s, &g)?, &eval_bg_closed(zeta, ell, &g)?)
        }),
    );
    rec.residual("bg_closed_form_vs_expansion", bg, 1e-6);

    let mut mismatches = Vec::new();
    for p in 0..=10 {
        for ell in -5..=5 {
            let got = PolarGrid::default_for(p, ell, SQRT_2)
                .and_then(|g| eval_lg(p, ell, &g))
                .and_then(|f| count_dark_rings_field(&f));
            let zeros = count_dark_rings(p, ell);
            if got != Ok(p) || zeros != Ok(p) {
                mismatches.push(format!("p={p} ell={ell}"));
            }
        }
    }
    let note = if mismatches.is_empty() {
        "all 121 modes".into()
    } else {
        mismatches.join("; ")
    };
    rec.predicate("ring_count_equals_p p<=10 |ell|<=5", Ok(mismatches.is_empty()), note);

    for (p, ell) in [(0, 0), (2, 1), (3, -2), (5, 4)] {
        let h = rayleigh_rho_max(p, ell) / 4096.0;
        let v = radial_operator_rayleigh(p, ell, h).map(|q| (q - p as f64).abs());
        rec.residual(format!("rayleigh_value p={p} ell={ell}"), v, 1e-4);
        let order = rayleigh_order(p, ell, 0.04).map(|o| (o - 2.0).abs());
        rec.residual(format!("rayleigh_order p={p} ell={ell}"), order, 0.2);
    }

    let shell = try_max([(2, 0), (1, 1), (2, 1)].map(|(nx, ny): (usize, usize)| {
        let n = nx + ny;
        let g = PolarGrid::new(PolarGrid::default_r_max(n, 0, SQRT_2), 8192, 64, SQRT_2)?;
        let hg = eval_hg_polar(nx, ny, &g)?;
        let mut total = 0.0;
        for ell in (-(n as i32)..=n as i32).step_by(2) {
            let p = (n - ell.unsigned_abs() as usize) / 2;
            total += overlap(&eval_lg(p, ell, &g)?, &hg)?.norm_sqr();
        }
        Ok((total - 1.0).abs())
    }));
    rec.residual("hg_shell_completeness n_r=8192", shell, 1e-6);

    let pbars = [1.0, 3.0, 5.0, 9.0, 15.0];
    let fig1 = figure_wp_modes(&pbars);
    let note = match &fig1 {
        Ok(v) => format!("modes {:?}", v.iter().map(|x| x.1).collect::<Vec<_>>()),
        Err(_) => String::new(),
    };
    rec.predicate(
        "figure_wp_unimodal_mode_increasing ell=1",
        fig1.map(|v| v.iter().all(|x| x.0) && v.windows(2).all(|w| w[0].1 < w[1].1)),
        note,
    );

    let fig3 = [1, 10, 20].map(|ell| intelligent_profile_stats(ell, 10, 0.5)).into_iter().collect::<Result<Vec<_>>>();
    let note = match &fig3 {
        Ok(v) => format!("interior minima {:?}", v.iter().map(|x| x.0).collect::<Vec<_>>()),
        Err(_) => String::new(),
    };
    rec.predicate(
        "figure_intelligent_minima_decrease_with_ell M=10 tau=1/2",
        fig3.map(|v| v.windows(2).all(|w| w[0].0 > w[1].0)),
        note,
    );

    let fig4 = [0.6, 3.2].map(|tau| intelligent_profile_stats(3, 11, tau)).into_iter().collect::<Result<Vec<_>>>();
    let note = match &fig4 {
        Ok(v) => format!("rings {} at tau=3/5, {} at tau=16/5", v[0].1, v[1].1),
        Err(_) => String::new(),
    };
    rec.predicate("figure_intelligent_rings_grow_with_tau M=11 ell=3", fig4.map(|v| v[1].1 > v[0].1), note);
}

// ---------------------------------------------------------------- twomode

fn twomode_suite(rec: &mut Recorder) {
    let basis = TwoModeBasis::new(DEFAULT_N_MAX).expect("valid basis");
    rec.residual("canonical_commutators", Ok(canonical_residual(&basis)), 1e-12);
    let (n, l) = circular_number_residual(&basis);
    rec.residual("n=n_plus+n_minus, ell=n_plus-n_minus", Ok(n.max(l)), 1e-12);

    let nop = build_two_mode(TwoModeOp::N, &basis);
    let lop = build_two_mode(TwoModeOp::Ell, &basis);
    let circ = try_max([(0, 0), (3, 1), (2, 5), (0, 7)].map(|(np, nm)| {
        let v = circular_state(&basis, np, nm)?;
        let en = (&nop * &v - &v * c((np + nm) as f64)).norm();
        let el = (&lop * &v - &v * c(np as f64 - nm as f64)).norm();
        Ok(en.max(el).max((v.norm() - 1.0).abs()))
    }));
    rec.residual("circular_fock_states", circ, 1e-12);

    let spectrum = degeneracy_spectrum(&basis);
    let exact = (0..=20).all(|n| spectrum.iter().any(|&(level, mult)| level == n && mult == n + 1));
    rec.predicate("degeneracy n+1 for n<=20", Ok(exact), format!("{:?}", &spectrum[..spectrum.len().min(21)]));

    let link = try_max([0, 1, -1, 3, -4].map(|ell| radial_link_check(&basis, ell)));
    rec.residual("radial_number_link", link, 1e-12);
    let cross = try_max([0, 1, -2, 4].map(|ell| kplus_cross_check(&basis, ell)));
    rec.residual("kplus_two_mode_cross_check", cross, 1e-12);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_tags_round_trip() {
        for s in Suite::EACH.into_iter().chain([Suite::All]) {
            assert_eq!(s.tag().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn rejects_bad_scale() {
        assert!(run(Suite::Twomode, 0.0).is_err());
        assert!(run(Suite::Twomode, f64::NAN).is_err());
    }

    #[test]
    fn twomode_report_passes() {
        let r = run(Suite::Twomode, 1.0).unwrap();
        assert!(r.pass, "{:#?}", r.failures().collect::<Vec<_>>());
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["schema"], REPORT_SCHEMA);
        assert_eq!(json["checks"][0]["suite"], "twomode");
    }

    #[test]
    fn failed_computation_is_null_residual() {
        let mut rec = Recorder {
            suite: Suite::Specfun,
            scale: 1.0,
            checks: Vec::new(),
        };
        rec.residual("x", Err(Error::Domain("boom".into())), 1.0);
        rec.residual("y", Ok(f64::NAN), 1.0);
        rec.residual("z", Ok(2.0), 1.0);
        assert!(rec.checks.iter().all(|c| !c.pass));
        assert_eq!(rec.checks[0].residual, None);
        rec.residual("w", Ok(2.0), 1.0);
        rec.scale = 2.0;
        rec.residual("v", Ok(2.0), 1.0);
        assert!(rec.checks[4].pass);
    }

    #[test]
    fn unimodality() {
        assert_eq!(unimodal(&[0.1, 0.3, 0.4, 0.2]), (true, 2));
        assert!(!unimodal(&[0.3, 0.1, 0.4, 0.2]).0);
    }
}
