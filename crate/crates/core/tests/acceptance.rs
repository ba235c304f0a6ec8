//! Acceptance gate. Each test prints one PASS/FAIL line for its criterion,
//! preceded by indented lines for the individual checks.

use std::f64::consts::{PI, SQRT_2};
use std::time::Instant;

use lgradial::fields::{
    count_dark_rings, count_dark_rings_field, eval_bg_closed, eval_lg, eval_perelomov_closed,
    eval_state, max_relative_deviation, overlap, PolarGrid,
};
use lgradial::states::{
    barut_girardello, barut_girardello_with_tail, intelligent_eigenvalue, intelligent_residual,
    intelligent_state, intelligent_state_auto, intelligent_truncation, lowering_residual,
    mean_rings, perelomov, perelomov_with_tail, uncertainty_report, wp_distribution, RadialState,
};
use lgradial::su11::{
    build_operator, casimir_residual, commutator_residual, dmatrix, e_unitarity_report,
    interior_max_abs, IrrepLabel, OperatorKind, OperatorMatrix, Truncation,
};
use lgradial::two_mode::{
    canonical_residual, circular_number_residual, degeneracy_spectrum, kplus_cross_check,
    radial_link_check, TwoModeBasis, DEFAULT_N_MAX,
};
use lgradial::verify::{asymptotic_error, figure_wp_modes, intelligent_profile_stats, rayleigh_order};
use nalgebra::DMatrix;
use num_complex::Complex64;

struct Gate {
    id: u32,
    title: &'static str,
    limit_s: f64,
    start: Instant,
    lines: Vec<(bool, String)>,
}

impl Gate {
    fn new(id: u32, title: &'static str, limit_s: f64) -> Self {
        Self {
            id,
            title,
            limit_s,
            start: Instant::now(),
            lines: Vec::new(),
        }
    }

    fn residual(&mut self, label: impl AsRef<str>, value: f64, tol: f64) {
        let ok = value.is_finite() && value < tol;
        self.lines.push((ok, format!("{}: {value:.3e} (< {tol:e})", label.as_ref())));
    }

    fn predicate(&mut self, label: impl AsRef<str>, ok: bool, detail: impl AsRef<str>) {
        self.lines.push((ok, format!("{}: {}", label.as_ref(), detail.as_ref())));
    }

    fn finish(mut self) {
        let elapsed = self.start.elapsed().as_secs_f64();
        self.lines.push((
            elapsed < self.limit_s,
            format!("runtime: {elapsed:.2} s (< {} s)", self.limit_s),
        ));
        for (ok, text) in &self.lines {
            println!("    {} {text}", if *ok { "pass" } else { "FAIL" });
        }
        let failed = self.lines.iter().filter(|l| !l.0).count();
        let verdict = if failed == 0 { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {} ({}): {} checks, {failed} failed", self.id, self.title, self.lines.len());
        assert_eq!(failed, 0, "criterion {} has failing checks", self.id);
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn scaled(m: &OperatorMatrix, s: Complex64) -> OperatorMatrix {
    OperatorMatrix::from_entries(m.irrep(), m.truncation(), m.entries() * s).unwrap()
}

#[test]
fn criterion_1_algebra() {
    use OperatorKind::*;
    let mut gate = Gate::new(1, "algebra suite", 5.0);
    let trunc = Truncation::algebra(64).unwrap();
    let i = Complex64::i();
    for ell in [0, 1, -1, 2, -2, 5, -5, 10, -10] {
        let irrep = IrrepLabel::new(ell);
        let g = |w| build_operator(irrep, w, trunc);
        let kz = g(Kz);
        let cases = [
            ("[k+,k-] = -2kz", g(KPlus), g(KMinus), kz.clone(), -2.0),
            ("[kz,k+] = k+", kz.clone(), g(KPlus), g(KPlus), 1.0),
            ("[kz,k-] = -k-", kz.clone(), g(KMinus), g(KMinus), -1.0),
            ("[kx,ky] = -i kz", g(Kx), g(Ky), scaled(&kz, -i), 1.0),
            ("[ky,kz] = i kx", g(Ky), kz.clone(), scaled(&g(Kx), i), 1.0),
            ("[kz,kx] = i ky", kz.clone(), g(Kx), scaled(&g(Ky), i), 1.0),
        ];
        for (name, a, b, e, s) in cases {
            gate.residual(format!("ell={ell} {name}"), commutator_residual(&a, &b, &e, s).unwrap(), 1e-12);
        }
        gate.residual(format!("ell={ell} casimir = k(k-1)"), casimir_residual(irrep, trunc), 1e-12);
        let eye = DMatrix::<Complex64>::identity(trunc.dim(), trunc.dim());
        let derived = (g(NHat).entries() - eye * c(irrep.abs_ell() as f64)) * c(0.5);
        gate.residual(
            format!("ell={ell} p_hat = (n_hat-|ell|)/2"),
            interior_max_abs(&(derived - g(PHat).entries()), trunc.interior()),
            1e-12,
        );
        let e = g(ELower);
        gate.residual(format!("ell={ell} [e,p_hat] = e"), commutator_residual(&e, &g(PHat), &e, 1.0).unwrap(), 1e-12);
        let (u1, u2) = e_unitarity_report(irrep, trunc);
        gate.residual(format!("ell={ell} e e^dag = 1"), u1, 1e-12);
        gate.residual(format!("ell={ell} e^dag e = 1 - |0><0|"), u2, 1e-12);
    }
    gate.finish();
}

#[test]
fn criterion_2_dmatrix() {
    let mut gate = Gate::new(2, "d-matrix suite", 10.0);
    for ell in [0, 1, -3, 5] {
        let irrep = IrrepLabel::new(ell);
        let t0 = Truncation::for_dmatrix(irrep, 0.0, 64).unwrap();
        let d0 = dmatrix(irrep, 0.0, t0).unwrap();
        let id = (d0.entries() - DMatrix::<Complex64>::identity(d0.dim(), d0.dim()))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        gate.residual(format!("ell={ell} d(0) = 1"), id, 1e-15);
        for tau in [0.25, 0.5, 1.0, 2.0] {
            let trunc = Truncation::for_dmatrix(irrep, tau, 128).unwrap();
            let last = trunc.interior();
            let d = dmatrix(irrep, tau, trunc).unwrap();
            let real = d.entries().map(|z| z.re);
            let rows = real.rows(0, last + 1);
            let ortho = (&rows * rows.transpose() - DMatrix::<f64>::identity(last + 1, last + 1)).amax();
            gate.residual(format!("ell={ell} tau={tau} interior row orthonormality"), ortho, 1e-10);

            let a = dmatrix(irrep, 0.4 * tau, trunc).unwrap();
            let b = dmatrix(irrep, 0.6 * tau, trunc).unwrap();
            let additive = interior_max_abs(&(a.entries() * b.entries() - d.entries()), last);
            gate.residual(format!("ell={ell} tau={tau} d(0.4tau) d(0.6tau) = d(tau)"), additive, 1e-10);

            // independent dense complex exponential of i tau k_y
            let padded = Truncation::new(trunc.dim() + trunc.margin() - 1, 0).unwrap();
            let ky = build_operator(irrep, OperatorKind::Ky, padded);
            let oracle = (ky.entries() * Complex64::new(0.0, tau)).exp();
            let (mut imag, mut agree) = (0.0f64, 0.0f64);
            for r in 0..=last {
                for s in 0..=last {
                    imag = imag.max(oracle[(r, s)].im.abs());
                    agree = agree.max((oracle[(r, s)] - d.get(r, s)).norm());
                }
            }
            gate.residual(format!("ell={ell} tau={tau} |Im exp(i tau k_y)|"), imag, 1e-13);
            gate.residual(format!("ell={ell} tau={tau} d vs complex exponential"), agree, 1e-13);
        }
    }
    let irrep = IrrepLabel::new(0);
    for tau in [0.25, 0.5, 1.0, 2.0] {
        let d = dmatrix(irrep, tau, Truncation::for_dmatrix(irrep, tau, 128).unwrap()).unwrap();
        gate.residual(
            format!("k=1/2 tau={tau} d_00 = sech(tau/2)"),
            (d.get(0, 0).re - (tau / 2.0).cosh().recip()).abs(),
            1e-10,
        );
    }
    gate.finish();
}

fn padded_intelligent(irrep: IrrepLabel, m: usize, tau: f64) -> RadialState {
    let auto = intelligent_state_auto(irrep, m, tau).unwrap();
    let margin = intelligent_truncation(irrep, m, tau).unwrap().margin();
    intelligent_state(irrep, m, tau, Truncation::new(2 * auto.p_max(), margin).unwrap()).unwrap()
}

#[test]
fn criterion_3_states() {
    let mut gate = Gate::new(3, "state suite", 30.0);
    for (ell, modulus, arg) in [(0, 0.5, 0.0), (1, 0.7, 0.3), (-3, 0.3, 2.0), (5, 0.6, -1.0), (2, 0.9, 0.5)] {
        let irrep = IrrepLabel::new(ell);
        let zeta = Complex64::from_polar(modulus, arg);
        let s = perelomov_with_tail(irrep, zeta, 16, 1e-14).unwrap();
        let tag = format!("perelomov ell={ell} zeta={modulus:.1}e^{{{arg}i}}");
        gate.residual(format!("{tag} norm"), (s.norm2() - 1.0).abs(), 1e-12);
        let w = wp_distribution(irrep, zeta, s.p_max()).unwrap();
        let dev = w.iter().zip(s.coeffs()).map(|(w, c)| (w - c.norm_sqr()).abs()).fold(0.0, f64::max);
        gate.residual(format!("{tag} W_p = |c_p|^2"), dev, 1e-12);
        let moment: f64 = w.iter().enumerate().map(|(p, w)| p as f64 * w).sum();
        let pbar = mean_rings(irrep, zeta).unwrap();
        gate.residual(format!("{tag} sum p W_p = (|ell|+1)|zeta|^2/(1-|zeta|^2)"), (moment - pbar).abs() / pbar.max(1.0), 1e-10);
    }

    for (ell, zeta) in [(0, c(0.8)), (2, Complex64::from_polar(1.5, PI / 4.0)), (-4, c(6.0)), (1, Complex64::new(-3.0, 2.0))] {
        let s = barut_girardello_with_tail(IrrepLabel::new(ell), zeta, 16, 1e-30).unwrap();
        gate.residual(format!("bg ell={ell} zeta={zeta} |k_- psi - zeta psi|"), lowering_residual(&s, zeta), 1e-10);
    }

    let (mut printed, mut opposite, mut saturation) = (0.0f64, 0.0f64, 0.0f64);
    let mut squeezed = true;
    for ell in [-5, -2, 0, 1, 3, 5] {
        for m in 0..=5 {
            for tau in [0.1, 0.5, 1.0, 1.5] {
                let irrep = IrrepLabel::new(ell);
                let s = padded_intelligent(irrep, m, tau);
                let lam = intelligent_eigenvalue(irrep, m, tau);
                printed = printed.max(intelligent_residual(&s, tau.cosh(), lam));
                opposite = opposite.max(intelligent_residual(&s, tau.cosh(), -lam));
                let r = uncertainty_report(&s);
                saturation = saturation.max((r.product - r.bound).abs());
                squeezed &= r.squeezed_x || r.squeezed_y;
            }
        }
    }
    gate.residual(
        format!("intelligent |(k_x - i cosh(tau) k_y - Lambda) psi|, Lambda = -(k+M) sinh(tau) [with +(k+M) sinh(tau): {opposite:.2e}]"),
        printed,
        1e-9,
    );
    gate.residual("intelligent dk_x dk_y = |<k_z>|/2", saturation, 1e-8);
    gate.predicate("intelligent family flagged squeezed", squeezed, "every (ell, M, tau > 0)");

    for (name, s) in [
        ("perelomov zeta=0.5", perelomov(IrrepLabel::new(2), c(0.5), 16).unwrap()),
        ("barut-girardello zeta=1.3", barut_girardello(IrrepLabel::new(2), c(1.3), 16).unwrap()),
    ] {
        let r = uncertainty_report(&s);
        gate.predicate(
            format!("{name} flagged intelligent, not squeezed"),
            r.intelligent && !r.squeezed_x && !r.squeezed_y,
            format!(
                "intelligent={} squeezed_x={} squeezed_y={} (var_kx {:.4}, var_ky {:.4}, |<kz>|/2 {:.4})",
                r.intelligent, r.squeezed_x, r.squeezed_y, r.var_kx, r.var_ky, r.bound
            ),
        );
    }
    gate.finish();
}

#[test]
fn criterion_4_fields() {
    let mut gate = Gate::new(4, "field suite", 60.0);
    for ell in [0, 1, -2, 5] {
        let g = PolarGrid::default_for(8, ell, SQRT_2).unwrap();
        let modes: Vec<_> = (0..=8).map(|p| eval_lg(p, ell, &g).unwrap()).collect();
        let mut worst = 0.0f64;
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((overlap(a, b).unwrap() - target).norm());
            }
        }
        gate.residual(format!("ell={ell} LG Gram matrix p<=8, n_r={}", g.n_r()), worst, 1e-8);
    }

    for (ell, zeta) in [(1, Complex64::from_polar(0.5, PI / 6.0)), (0, c(0.3)), (-3, Complex64::from_polar(0.7, 2.0))] {
        let s = perelomov_with_tail(IrrepLabel::new(ell), zeta, 16, 1e-32).unwrap();
        let g = PolarGrid::default_for(s.p_max(), ell, SQRT_2).unwrap();
        let dev = max_relative_deviation(&eval_state(&s, &g).unwrap(), &eval_perelomov_closed(zeta, ell, &g).unwrap()).unwrap();
        gate.residual(format!("perelomov closed form ell={ell} zeta={zeta:.3}"), dev, 1e-8);
    }
    for (ell, zeta) in [(1, c(1.0)), (-2, Complex64::from_polar(1.5, 2.0)), (3, c(2.5)), (0, Complex64::new(-0.5, 1.0))] {
        let s = barut_girardello_with_tail(IrrepLabel::new(ell), zeta, 16, 1e-30).unwrap();
        let g = PolarGrid::default_for(20, ell, SQRT_2).unwrap();
        let dev = max_relative_deviation(&eval_state(&s, &g).unwrap(), &eval_bg_closed(zeta, ell, &g).unwrap()).unwrap();
        gate.residual(format!("bg closed form ell={ell} zeta={zeta:.3}"), dev, 1e-6);
    }

    let mut wrong = Vec::new();
    for p in 0..=10 {
        for ell in -5..=5 {
            let g = PolarGrid::default_for(p, ell, SQRT_2).unwrap();
            let field = count_dark_rings_field(&eval_lg(p, ell, &g).unwrap()).unwrap();
            let zeros = count_dark_rings(p, ell).unwrap();
            if field != p || zeros != p {
                wrong.push(format!("(p={p}, ell={ell}: {field}/{zeros})"));
            }
        }
    }
    gate.predicate("ring count = p for p<=10, |ell|<=5", wrong.is_empty(), format!("{} mismatches {}", wrong.len(), wrong.join(" ")));

    for (p, ell) in [(0, 0), (2, 1), (3, -2), (5, 4)] {
        let order = rayleigh_order(p, ell, 0.04).unwrap();
        gate.residual(format!("rayleigh quotient p={p} ell={ell} |order - 2| (observed {order:.3})"), (order - 2.0).abs(), 0.2);
    }
    gate.finish();
}

#[test]
fn criterion_5_two_mode() {
    let mut gate = Gate::new(5, "two-mode suite", 10.0);
    let basis = TwoModeBasis::new(DEFAULT_N_MAX).unwrap();
    gate.residual("canonical commutators", canonical_residual(&basis), 1e-12);
    let (n, l) = circular_number_residual(&basis);
    gate.residual("n = n_+ + n_-", n, 1e-12);
    gate.residual("ell = n_+ - n_-", l, 1e-12);
    for ell in [0, 1, -1, 3, -4] {
        gate.residual(format!("ell={ell} radial number link"), radial_link_check(&basis, ell).unwrap(), 1e-12);
    }
    for ell in [0, 1, -2, 4] {
        gate.residual(format!("ell={ell} <p+1|a+^dag a-^dag|p> = sqrt((2k+p)(p+1))"), kplus_cross_check(&basis, ell).unwrap(), 1e-12);
    }
    let spectrum = degeneracy_spectrum(&basis);
    let bad: Vec<_> = (0..=20)
        .filter(|&n| !spectrum.iter().any(|&(level, mult)| level == n && mult == n + 1))
        .collect();
    gate.predicate("degeneracy n+1 for n<=20", bad.is_empty(), format!("levels off: {bad:?}"));
    gate.finish();
}

#[test]
fn criterion_6_asymptotic() {
    let mut gate = Gate::new(6, "large-k d-function approximation", 5.0);
    let err = asymptotic_error().unwrap();
    gate.residual("k=50, 1<=p<=5, |tau - tau_p| <= 0.3, max relative error", err, 0.05);
    gate.finish();
}

#[test]
fn criterion_7_figures() {
    let mut gate = Gate::new(7, "figure reproduction", 60.0);
    let modes = figure_wp_modes(&[1.0, 3.0, 5.0, 9.0, 15.0]).unwrap();
    let ok = modes.iter().all(|m| m.0) && modes.windows(2).all(|w| w[0].1 < w[1].1);
    gate.predicate(
        "W_p, ell=1, pbar in {1,3,5,9,15}: unimodal, mode increasing",
        ok,
        format!("modes {:?}", modes.iter().map(|m| m.1).collect::<Vec<_>>()),
    );
    let fig3: Vec<_> = [1, 10, 20].map(|ell| intelligent_profile_stats(ell, 10, 0.5).unwrap()).to_vec();
    gate.predicate(
        "M=10, tau=1/2, ell=1,10,20: fewer interior minima as ell grows",
        fig3.windows(2).all(|w| w[0].0 > w[1].0),
        format!("minima {:?}", fig3.iter().map(|x| x.0).collect::<Vec<_>>()),
    );
    let fig4: Vec<_> = [0.6, 1.3, 3.2].map(|tau| intelligent_profile_stats(3, 11, tau).unwrap()).to_vec();
    gate.predicate(
        "M=11, ell=3: more rings at tau=16/5 than at tau=3/5",
        fig4[2].1 > fig4[0].1,
        format!("rings at tau=3/5, 13/10, 16/5: {:?}", fig4.iter().map(|x| x.1).collect::<Vec<_>>()),
    );
    gate.finish();
}
