//! Radial states in coefficient space.
//!
//! Every constructor fixes the global phase so that the first nonzero
//! coefficient is real and positive, which makes states comparable by vector
//! distance.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::specfun::{binomial, ln_factorial};
use crate::su11::{
    build_operator, default_dmatrix_margin, rotation_extent, rotation_raw, IrrepLabel,
    OperatorKind, Truncation,
};
use crate::{Error, Result};

/// Largest truncation reached by auto-grow.
pub const GROWTH_CAP: usize = 4096;
/// Tail mass accepted from every constructor.
pub const TAIL_TOL: f64 = 1e-10;
/// Tolerance behind the `intelligent` and `squeezed_*` report flags.
pub const REPORT_TOL: f64 = 1e-8;

/// Coefficients `c_p` of a state on one radial ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialState {
    irrep: IrrepLabel,
    coeffs: Vec<Complex64>,
    tail_mass: f64,
}

impl RadialState {
    /// Wraps raw coefficients. `tail_mass` is the weight declared lost to
    /// truncation.
    pub fn from_coeffs(irrep: IrrepLabel, coeffs: Vec<Complex64>, tail_mass: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidTruncation("a state needs at least one coefficient".into()));
        }
        if !(tail_mass >= 0.0) || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coefficient or negative tail mass".into()));
        }
        Ok(Self {
            irrep,
            coeffs,
            tail_mass,
        })
    }

    pub fn irrep(&self) -> IrrepLabel {
        self.irrep
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn p_max(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn norm2(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Same state on a ladder of `p_max + 1` levels. Shrinking adds the
    /// dropped weight to the tail.
    pub fn resized(&self, p_max: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        let dropped: f64 = coeffs.iter().skip(p_max + 1).map(|c| c.norm_sqr()).sum();
        coeffs.resize(p_max + 1, Complex64::new(0.0, 0.0));
        Self {
            irrep: self.irrep,
            coeffs,
            tail_mass: self.tail_mass + dropped,
        }
    }

    /// `Σ conj(a_p) b_p`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.irrep != other.irrep {
            return Err(Error::IrrepMismatch {
                left: self.irrep.ell(),
                right: other.irrep.ell(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    fn with_positive_phase(mut self) -> Self {
        if let Some(first) = self.coeffs.iter().find(|c| **c != Complex64::new(0.0, 0.0)) {
            let phase = first.conj() / first.norm();
            self.coeffs.iter_mut().for_each(|c| *c *= phase);
            // exact zero imaginary part for the leading entry
            if let Some(c) = self.coeffs.iter_mut().find(|c| c.norm() > 0.0) {
                c.im = 0.0;
            }
        }
        self
    }
}

/// Means and variances of `k_x`, `k_y`, `k_z` with the uncertainty verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub mean_kx: f64,
    pub mean_ky: f64,
    pub mean_kz: f64,
    pub var_kx: f64,
    pub var_ky: f64,
    /// `|⟨k_z⟩|/2`
    pub bound: f64,
    /// `√(var_kx·var_ky)`
    pub product: f64,
    pub intelligent: bool,
    pub squeezed_x: bool,
    pub squeezed_y: bool,
}

impl UncertaintyReport {
    fn new(mean: [f64; 3], var_kx: f64, var_ky: f64) -> Self {
        let bound = mean[2].abs() / 2.0;
        let product = (var_kx * var_ky).sqrt();
        Self {
            mean_kx: mean[0],
            mean_ky: mean[1],
            mean_kz: mean[2],
            var_kx,
            var_ky,
            bound,
            product,
            intelligent: (product - bound).abs() < REPORT_TOL,
            squeezed_x: var_kx < bound - REPORT_TOL,
            squeezed_y: var_ky < bound - REPORT_TOL,
        }
    }
}

fn check_disc(zeta: Complex64) -> Result<()> {
    let modulus = zeta.norm();
    if !(modulus < 1.0) {
        return Err(Error::OutsideUnitDisc { modulus });
    }
    Ok(())
}

/// Doubles `p_max` until `build` reports a tail below `tol`.
fn grow<F>(p_max: usize, tol: f64, mut build: F) -> Result<RadialState>
where
    F: FnMut(usize) -> RadialState,
{
    let mut p = p_max.max(1);
    loop {
        let s = build(p);
        if s.tail_mass <= tol {
            return Ok(s);
        }
        if p >= GROWTH_CAP {
            return Err(Error::GrowthCapExceeded {
                cap: GROWTH_CAP,
                tolerance: tol,
            });
        }
        p = (2 * p).min(GROWTH_CAP);
    }
}

/// Geometric bound on `Σ_{p>p_max} w_p` given `w_{p_max+1}` and a ratio
/// `w_{p+1}/w_p ≤ ratio` valid beyond.
fn geometric_tail(first: f64, ratio: f64) -> f64 {
    if ratio < 1.0 {
        first / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

pub fn fock_state(irrep: IrrepLabel, p: usize, p_max: usize) -> Result<RadialState> {
    if p > p_max {
        return Err(Error::IndexOutOfRange { p, p_max });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); p_max + 1];
    coeffs[p] = Complex64::new(1.0, 0.0);
    RadialState::from_coeffs(irrep, coeffs, 0.0)
}

/// `ln |⟨p|ζ⟩|²` for the Perelomov state with modulus² `z2`.
fn perelomov_ln_weight(two_k: u32, z2: f64, p: usize) -> f64 {
    let k2 = f64::from(two_k);
    let ln_binom = ln_factorial(u64::from(two_k) + p as u64 - 1)
        - ln_factorial(p as u64)
        - ln_factorial(u64::from(two_k) - 1);
    k2 * (-z2).ln_1p() + ln_binom + p as f64 * z2.ln()
}

/// Perelomov coherent state
/// `c_p = (1-|ζ|²)^k √(Γ(2k+p)/(p!Γ(2k))) ζ^p`, auto-grown from `p_max`.
pub fn perelomov(irrep: IrrepLabel, zeta: Complex64, p_max: usize) -> Result<RadialState> {
    perelomov_with_tail(irrep, zeta, p_max, TAIL_TOL)
}

/// [`perelomov`] grown until the neglected weight is below `tol`.
pub fn perelomov_with_tail(irrep: IrrepLabel, zeta: Complex64, p_max: usize, tol: f64) -> Result<RadialState> {
    check_disc(zeta)?;
    if zeta.norm() == 0.0 {
        return fock_state(irrep, 0, p_max);
    }
    let z2 = zeta.norm_sqr();
    let arg = zeta.arg();
    let two_k = irrep.two_k();
    grow(p_max, tol, |n| {
        let coeffs = (0..=n)
            .map(|p| Complex64::from_polar((0.5 * perelomov_ln_weight(two_k, z2, p)).exp(), p as f64 * arg))
            .collect();
        let next = perelomov_ln_weight(two_k, z2, n + 1).exp();
        let ratio = z2 * (f64::from(two_k) + n as f64 + 1.0) / (n as f64 + 2.0);
        RadialState {
            irrep,
            coeffs,
            tail_mass: geometric_tail(next, ratio),
        }
    })
}

/// Mean radial number `p̄ = (|ℓ|+1)|ζ|²/(1-|ζ|²)` of a Perelomov state.
pub fn mean_rings(irrep: IrrepLabel, zeta: Complex64) -> Result<f64> {
    check_disc(zeta)?;
    let z2 = zeta.norm_sqr();
    Ok((irrep.abs_ell() as f64 + 1.0) * z2 / (1.0 - z2))
}

fn wp_ln(abs_ell: usize, pbar: f64, p: usize) -> f64 {
    let l1 = abs_ell as f64 + 1.0;
    let (p64, l64) = (p as u64, abs_ell as u64);
    l1 * l1.ln() + ln_factorial(p64 + l64) - ln_factorial(p64) - ln_factorial(l64)
        + p as f64 * pbar.ln()
        - (p as f64 + l1) * (pbar + l1).ln()
}

/// Ring-number distribution `W_p` for `p = 0..=p_max`, written through the
/// mean ring number.
pub fn wp_distribution(irrep: IrrepLabel, zeta: Complex64, p_max: usize) -> Result<Vec<f64>> {
    let pbar = mean_rings(irrep, zeta)?;
    if pbar == 0.0 {
        let mut w = vec![0.0; p_max + 1];
        w[0] = 1.0;
        return Ok(w);
    }
    Ok((0..=p_max).map(|p| wp_ln(irrep.abs_ell(), pbar, p).exp()).collect())
}

/// Upper bound on `Σ_{p>p_max} W_p`.
pub fn wp_tail(irrep: IrrepLabel, zeta: Complex64, p_max: usize) -> Result<f64> {
    let pbar = mean_rings(irrep, zeta)?;
    if pbar == 0.0 {
        return Ok(0.0);
    }
    let z2 = zeta.norm_sqr();
    let next = wp_ln(irrep.abs_ell(), pbar, p_max + 1).exp();
    let ratio = z2 * (f64::from(irrep.two_k()) + p_max as f64 + 1.0) / (p_max as f64 + 2.0);
    Ok(geometric_tail(next, ratio))
}

/// Barut–Girardello state, the `k_-` eigenvector
/// `c_p ∝ ζ^p/√(p!(p+|ℓ|)!)`, normalized numerically.
pub fn barut_girardello(irrep: IrrepLabel, zeta: Complex64, p_max: usize) -> Result<RadialState> {
    barut_girardello_with_tail(irrep, zeta, p_max, TAIL_TOL)
}

/// [`barut_girardello`] grown until the neglected weight is below `tol`.
pub fn barut_girardello_with_tail(irrep: IrrepLabel, zeta: Complex64, p_max: usize, tol: f64) -> Result<RadialState> {
    if !zeta.is_finite() {
        return Err(Error::Domain("zeta must be finite".into()));
    }
    if zeta.norm() == 0.0 {
        return fock_state(irrep, 0, p_max);
    }
    let a = irrep.abs_ell() as u64;
    let lnz = zeta.norm().ln();
    let arg = zeta.arg();
    let ln_w = move |p: usize| {
        2.0 * p as f64 * lnz - ln_factorial(p as u64) - ln_factorial(p as u64 + a)
    };
    grow(p_max, tol, |n| {
        let logs: Vec<f64> = (0..=n).map(ln_w).collect();
        let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        let next = (ln_w(n + 1) - top).exp();
        let ratio = zeta.norm_sqr() / ((n as f64 + 2.0) * (n as f64 + 2.0 + a as f64));
        let tail = geometric_tail(next, ratio);
        let scale = 0.5 * (top + sum.ln());
        let coeffs = logs
            .iter()
            .enumerate()
            .map(|(p, l)| Complex64::from_polar((0.5 * l - scale).exp(), p as f64 * arg))
            .collect();
        RadialState {
            irrep,
            coeffs,
            tail_mass: tail / (sum + tail),
        }
    })
}

/// Seed `κ`: `c_p ∝ C(M,p) tanh^p τ / √C(2k+p-1, p)` for `p ≤ M`.
pub fn intelligent_seed(irrep: IrrepLabel, m: usize, tau: f64) -> Result<RadialState> {
    if !tau.is_finite() {
        return Err(Error::Domain("tau must be finite".into()));
    }
    let t = tau.tanh();
    let k2 = f64::from(irrep.two_k());
    let mut coeffs = Vec::with_capacity(m + 1);
    for p in 0..=m {
        let c = binomial(m as f64, p as u64)? * t.powi(p as i32)
            / binomial(k2 + p as f64 - 1.0, p as u64)?.sqrt();
        coeffs.push(Complex64::new(c, 0.0));
    }
    let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|c| *c /= norm);
    RadialState::from_coeffs(irrep, coeffs, 0.0)
}

/// Truncation sized for [`intelligent_state`]: `p_max` covers the rotated
/// seed, `margin` is the padding used during exponentiation.
pub fn intelligent_truncation(irrep: IrrepLabel, m: usize, tau: f64) -> Result<Truncation> {
    let k = irrep.k();
    let margin = default_dmatrix_margin(k, tau);
    let p_max = rotation_extent(k, m, tau).max(m).max(margin + 1);
    if p_max > GROWTH_CAP {
        return Err(Error::GrowthCapExceeded {
            cap: GROWTH_CAP,
            tolerance: TAIL_TOL,
        });
    }
    Truncation::new(p_max, margin)
}

/// `exp(iτk_y)` applied to the seed of order `M`.
///
/// The exponential is taken on `p_max + margin + 1` levels; the weight landing
/// above `p_max` is reported as tail mass and must stay below [`TAIL_TOL`].
pub fn intelligent_state(
    irrep: IrrepLabel,
    m: usize,
    tau: f64,
    trunc: Truncation,
) -> Result<RadialState> {
    crate::su11::check_tau(tau)?;
    let seed = intelligent_seed(irrep, m, tau)?;
    if m > trunc.p_max() {
        return Err(Error::IndexOutOfRange {
            p: m,
            p_max: trunc.p_max(),
        });
    }
    let padded = trunc.dim() + trunc.margin();
    let rot = rotation_raw(irrep, tau, padded);
    let s = DVector::from_iterator(m + 1, seed.coeffs.iter().map(|c| c.re));
    let psi = rot.columns(0, m + 1) * s;
    let tail: f64 = psi.iter().skip(trunc.dim()).map(|x| x * x).sum();
    if tail > TAIL_TOL {
        return Err(Error::InadequateTruncation {
            residual: tail,
            tolerance: TAIL_TOL,
        });
    }
    let coeffs = psi
        .iter()
        .take(trunc.dim())
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    Ok(RadialState {
        irrep,
        coeffs,
        tail_mass: tail,
    }
    .with_positive_phase())
}

/// [`intelligent_state`] on an automatically sized truncation, grown by half
/// until the tail is certified.
pub fn intelligent_state_auto(irrep: IrrepLabel, m: usize, tau: f64) -> Result<RadialState> {
    let mut trunc = intelligent_truncation(irrep, m, tau)?;
    loop {
        match intelligent_state(irrep, m, tau, trunc) {
            Err(Error::InadequateTruncation { .. }) if trunc.p_max() < GROWTH_CAP => {
                let p = (trunc.p_max() * 3 / 2).min(GROWTH_CAP);
                trunc = Truncation::new(p, trunc.margin())?;
            }
            other => return other,
        }
    }
}

/// Eigenvalue `Λ = -(k+M) sinh τ` attached to the intelligent family.
pub fn intelligent_eigenvalue(irrep: IrrepLabel, m: usize, tau: f64) -> f64 {
    -(irrep.k() + m as f64) * tau.sinh()
}

fn padded_operator(state: &RadialState, which: OperatorKind, pad: usize) -> nalgebra::DMatrix<Complex64> {
    let trunc = Truncation::new(state.p_max() + pad, 0).expect("positive p_max");
    build_operator(state.irrep, which, trunc).into_entries()
}

fn padded_vector(state: &RadialState, pad: usize) -> DVector<Complex64> {
    let mut v = state.coeffs.clone();
    v.resize(state.coeffs.len() + pad, Complex64::new(0.0, 0.0));
    DVector::from_vec(v)
}

/// `⟨Ψ|A|Ψ⟩`.
pub fn expectation(state: &RadialState, op: &crate::su11::OperatorMatrix) -> Result<Complex64> {
    if op.irrep() != state.irrep {
        return Err(Error::IrrepMismatch {
            left: state.irrep.ell(),
            right: op.irrep().ell(),
        });
    }
    if op.dim() != state.coeffs.len() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} and operator of dimension {}",
            state.coeffs.len(),
            op.dim()
        )));
    }
    let v = DVector::from_column_slice(&state.coeffs);
    Ok(v.dotc(&(op.entries() * &v)))
}

pub fn uncertainty_report(state: &RadialState) -> UncertaintyReport {
    const PAD: usize = 2;
    let v = padded_vector(state, PAD);
    let moments = |which| {
        let a = padded_operator(state, which, PAD);
        let av = &a * &v;
        (v.dotc(&av).re, av.norm_squared())
    };
    let (mx, x2) = moments(OperatorKind::Kx);
    let (my, y2) = moments(OperatorKind::Ky);
    let (mz, _) = moments(OperatorKind::Kz);
    let var = |m2: f64, m: f64| (m2 - m * m).max(0.0);
    UncertaintyReport::new([mx, my, mz], var(x2, mx), var(y2, my))
}

/// `‖k_-Ψ - ζΨ‖`.
pub fn lowering_residual(state: &RadialState, zeta: Complex64) -> f64 {
    let v = padded_vector(state, 1);
    let km = padded_operator(state, OperatorKind::KMinus, 1);
    (&km * &v - &v * zeta).norm()
}

/// `‖(k_x - iλk_y)Ψ - ΛΨ‖`.
pub fn intelligent_residual(state: &RadialState, lambda: f64, eigenvalue: f64) -> f64 {
    let v = padded_vector(state, 1);
    let kx = padded_operator(state, OperatorKind::Kx, 1);
    let ky = padded_operator(state, OperatorKind::Ky, 1);
    let op = kx - ky * Complex64::new(0.0, lambda);
    (&op * &v - &v * Complex64::new(eigenvalue, 0.0)).norm()
}
