//! Position-space synthesis on polar and Cartesian grids.
//!
//! All fields share one inner product: `∫ conj(a) b r dr dφ` over the plane,
//! approximated by the midpoint rule on a staggered radial grid. Single modes
//! therefore carry the azimuthal factor `e^{iℓφ}/√(2π)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::specfun::{bessel_i, bessel_j, hermite, laguerre_positive_zeros, ln_factorial, BESSEL_MAX_ARG};
use crate::states::{intelligent_state, RadialState, TAIL_TOL};
use crate::su11::{IrrepLabel, Truncation};
use crate::{Error, Result};

pub const MIN_NR: usize = 64;
pub const MIN_NPHI: usize = 8;
pub const DEFAULT_NR: usize = 2048;
pub const DEFAULT_NPHI: usize = 64;
/// Radial samples below this fraction of the peak are ignored by the ring
/// counter.
pub const RING_FLOOR: f64 = 1e-8;
const FACTORIZATION_TOL: f64 = 1e-10;
const RESCALE: f64 = 1e200;

/// Staggered polar grid `r_j = (j+½) r_max/n_r`, `φ_m = 2πm/n_phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    r_max: f64,
    n_r: usize,
    n_phi: usize,
    alpha: f64,
}

impl PolarGrid {
    pub fn new(r_max: f64, n_r: usize, n_phi: usize, alpha: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(Error::InvalidGrid(format!("r_max must be positive, got {r_max}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidGrid(format!("alpha must be positive, got {alpha}")));
        }
        if n_r < MIN_NR {
            return Err(Error::InvalidGrid(format!("n_r = {n_r} is below {MIN_NR}")));
        }
        if n_phi < MIN_NPHI {
            return Err(Error::InvalidGrid(format!("n_phi = {n_phi} is below {MIN_NPHI}")));
        }
        Ok(Self {
            r_max,
            n_r,
            n_phi,
            alpha,
        })
    }

    /// Turning point of the highest populated shell plus six decay lengths.
    pub fn default_r_max(p_max: usize, ell: i32, alpha: f64) -> f64 {
        let n = 2 * p_max + ell.unsigned_abs() as usize;
        (((2 * n + 1) as f64).sqrt() + 6.0) / alpha
    }

    pub fn default_for(p_max: usize, ell: i32, alpha: f64) -> Result<Self> {
        Self::new(
            Self::default_r_max(p_max, ell, alpha),
            DEFAULT_NR,
            DEFAULT_NPHI,
            alpha,
        )
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.n_r as f64
    }

    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn r(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dr()
    }

    pub fn phi(&self, m: usize) -> f64 {
        m as f64 * self.dphi()
    }
}

/// Complex amplitudes on a [`PolarGrid`], row-major over `(r_j, φ_m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldMap {
    grid: PolarGrid,
    amplitudes: Vec<Complex64>,
    label: String,
    norm2: f64,
}

impl FieldMap {
    pub fn from_amplitudes(grid: PolarGrid, amplitudes: Vec<Complex64>, label: impl Into<String>) -> Result<Self> {
        if amplitudes.len() != grid.n_r * grid.n_phi {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a {}x{} grid",
                amplitudes.len(),
                grid.n_r,
                grid.n_phi
            )));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("non-finite amplitude".into()));
        }
        let mut f = Self {
            grid,
            amplitudes,
            label: label.into(),
            norm2: 0.0,
        };
        f.norm2 = f.quadrature(&f.amplitudes).re;
        Ok(f)
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Quadrature norm² recorded at construction.
    pub fn norm2(&self) -> f64 {
        self.norm2
    }

    pub fn get(&self, j: usize, m: usize) -> Complex64 {
        self.amplitudes[j * self.grid.n_phi + m]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn peak(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    fn quadrature(&self, b: &[Complex64]) -> Complex64 {
        let g = &self.grid;
        let mut total = Complex64::new(0.0, 0.0);
        for j in 0..g.n_r {
            let row = j * g.n_phi..(j + 1) * g.n_phi;
            let s: Complex64 = self.amplitudes[row.clone()]
                .iter()
                .zip(&b[row])
                .map(|(x, y)| x.conj() * y)
                .sum();
            total += s * g.r(j);
        }
        total * g.dr() * g.dphi()
    }
}

fn synthesize<F>(grid: PolarGrid, ell: i32, label: String, radial: F) -> Result<FieldMap>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let n_phi = grid.n_phi;
    let azimuth: Vec<Complex64> = (0..n_phi)
        .map(|m| Complex64::from_polar(1.0 / (2.0 * PI).sqrt(), f64::from(ell) * grid.phi(m)))
        .collect();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.n_r * n_phi];
    amplitudes
        .par_chunks_mut(n_phi)
        .enumerate()
        .for_each(|(j, row)| {
            let f = radial(grid.r(j));
            for (a, e) in row.iter_mut().zip(&azimuth) {
                *a = f * e;
            }
        });
    FieldMap::from_amplitudes(grid, amplitudes, label)
}

/// `Σ_p c_p R_p(r)` where `R_p` is the normalized LG radial function with
/// `∫ |R_p|² r dr = 1`.
///
/// Runs the orthonormal Laguerre recurrence in rescaled units so that high
/// orders at large radius neither overflow nor underflow.
pub fn radial_sum(coeffs: &[Complex64], abs_ell: usize, alpha: f64, r: f64) -> Complex64 {
    let a = abs_ell as f64;
    let rho = alpha * r;
    let x = rho * rho;
    let ln_g = 0.5 * (2.0 * alpha * alpha).ln() + a * rho.ln() - 0.5 * x - 0.5 * ln_factorial(abs_ell as u64);

    let mut shift = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = coeffs[0] * cur;
    for (p, c) in coeffs.iter().enumerate().skip(1) {
        let q = (p - 1) as f64;
        let next = ((2.0 * q + 1.0 + a - x) * cur - (q * (q + a)).sqrt() * prev)
            / ((q + 1.0) * (q + 1.0 + a)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            sum /= RESCALE;
            shift += RESCALE.ln();
        }
        sum += c * cur;
    }
    sum * (ln_g + shift).exp()
}

/// Basis-expansion synthesis `Σ_p c_p Ψ_{pℓ}`.
pub fn eval_state(state: &RadialState, grid: &PolarGrid) -> Result<FieldMap> {
    if state.tail_mass() > TAIL_TOL {
        return Err(Error::InadequateTruncation {
            residual: state.tail_mass(),
            tolerance: TAIL_TOL,
        });
    }
    let irrep = state.irrep();
    let alpha = grid.alpha;
    let coeffs = state.coeffs();
    synthesize(*grid, irrep.ell(), format!("state {irrep}"), |r| {
        radial_sum(coeffs, irrep.abs_ell(), alpha, r)
    })
}

/// Laguerre–Gauss mode `Ψ_{pℓ}`.
pub fn eval_lg(p: usize, ell: i32, grid: &PolarGrid) -> Result<FieldMap> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); p + 1];
    coeffs[p] = Complex64::new(1.0, 0.0);
    let alpha = grid.alpha;
    synthesize(*grid, ell, format!("LG p={p} ell={ell}"), |r| {
        radial_sum(&coeffs, ell.unsigned_abs() as usize, alpha, r)
    })
}

/// Closed-form Perelomov field, a polynomial-Gauss mode
/// `∝ (αr)^{|ℓ|} (1-ζ)^{-(|ℓ|+1)} exp(α²r²(ζ+1)/(2(ζ-1)))`.
pub fn eval_perelomov_closed(zeta: Complex64, ell: i32, grid: &PolarGrid) -> Result<FieldMap> {
    if !(zeta.norm() < 1.0) {
        return Err(Error::OutsideUnitDisc { modulus: zeta.norm() });
    }
    let a = ell.unsigned_abs() as usize;
    let af = a as f64;
    let alpha = grid.alpha;
    let one = Complex64::new(1.0, 0.0);
    let gauss = (zeta + 1.0) / (zeta - 1.0) / 2.0;
    let ln_const = 0.5 * (alpha * alpha / PI).ln() - 0.5 * ln_factorial(a as u64)
        + 0.5 * (af + 1.0) * (-zeta.norm_sqr()).ln_1p()
        - (af + 1.0) * (one - zeta).ln();
    synthesize(*grid, ell, format!("perelomov closed ell={ell}"), |r| {
        let rho = alpha * r;
        // a·ln ρ is fine here: ρ > 0 on the staggered grid
        (ln_const + af * rho.ln() + gauss * rho * rho).exp() * (2.0 * PI).sqrt()
    })
}

/// `Σ_m (-w)^m / (m!(m+a)!)`, entire in `w`.
fn bessel_entire_series(w: Complex64, a: usize) -> Complex64 {
    let mut term = Complex64::new((-ln_factorial(a as u64)).exp(), 0.0);
    let mut sum = term;
    for m in 1..crate::specfun::SERIES_MAX_TERMS {
        term *= -w / (m as f64 * (m + a) as f64);
        sum += term;
        if term.norm() <= crate::specfun::SERIES_REL_CUTOFF * sum.norm() && m as f64 > w.norm().sqrt() {
            break;
        }
    }
    sum
}

/// Closed-form Barut–Girardello field, a Bessel–Gauss mode
/// `√(α²|ζ|^{|ℓ|}/(π I_{|ℓ|}(2|ζ|))) ζ^{-|ℓ|/2} e^{ζ-α²r²/2} J_{|ℓ|}(2αr√ζ) e^{iℓφ}`.
///
/// The Bessel factor is evaluated as `(αr)^{|ℓ|}` times an entire series in
/// `α²r²ζ`, so no branch of `√ζ` is needed; for real positive ζ the series is
/// replaced by `J_{|ℓ|}` itself once its argument exceeds 4.
pub fn eval_bg_closed(zeta: Complex64, ell: i32, grid: &PolarGrid) -> Result<FieldMap> {
    if !zeta.is_finite() {
        return Err(Error::Domain("zeta must be finite".into()));
    }
    let a = ell.unsigned_abs() as usize;
    let alpha = grid.alpha;
    let modulus = zeta.norm();
    let max_arg = 2.0 * alpha * grid.r_max * modulus.sqrt();
    if max_arg > BESSEL_MAX_ARG {
        return Err(Error::InvalidGrid(format!(
            "Bessel argument {max_arg:.3} at r_max exceeds {BESSEL_MAX_ARG}"
        )));
    }
    let norm = if modulus == 0.0 {
        (-ln_factorial(a as u64)).exp().sqrt().recip()
    } else {
        (bessel_i(a as u32, 2.0 * modulus)? / modulus.powi(a as i32)).sqrt()
    };
    let real_positive = zeta.im == 0.0 && zeta.re > 0.0;
    let prefactor = (alpha * alpha / PI).sqrt() / norm;
    let ez = zeta.exp();
    let radial = |r: f64| -> Result<Complex64> {
        let rho = alpha * r;
        let w = zeta * rho * rho;
        let s = if real_positive && 2.0 * w.re.sqrt() > 4.0 {
            let z = 2.0 * w.re.sqrt();
            Complex64::new(bessel_j(a as u32, z)? / w.re.powf(a as f64 / 2.0), 0.0)
        } else {
            bessel_entire_series(w, a)
        };
        Ok(ez * s * (prefactor * rho.powi(a as i32) * (-0.5 * rho * rho).exp()) * (2.0 * PI).sqrt())
    };
    // surface Bessel-kernel failures before the parallel sweep
    radial(grid.r_max)?;
    synthesize(*grid, ell, format!("barut-girardello closed ell={ell}"), |r| {
        radial(r).expect("argument range checked above")
    })
}

/// Largest `|a - b|/|a|` over samples of `oracle` above `1e-6` of its peak.
pub fn max_relative_deviation(oracle: &FieldMap, candidate: &FieldMap) -> Result<f64> {
    if oracle.grid != candidate.grid {
        return Err(Error::GridMismatch);
    }
    let peak = oracle.peak();
    Ok(oracle
        .amplitudes
        .iter()
        .zip(&candidate.amplitudes)
        .filter(|(a, _)| a.norm() > 1e-6 * peak)
        .map(|(a, b)| (a - b).norm() / a.norm())
        .fold(0.0, f64::max))
}

/// `∫ conj(a) b` by the midpoint rule.
pub fn overlap(a: &FieldMap, b: &FieldMap) -> Result<Complex64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(a.quadrature(&b.amplitudes))
}

pub fn quadrature_norm2(field: &FieldMap) -> f64 {
    field.quadrature(&field.amplitudes).re
}

/// Square Cartesian grid of `n × n` cell centres on `[-half_width, half_width]²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartesianGrid {
    half_width: f64,
    n: usize,
    alpha: f64,
}

impl CartesianGrid {
    pub fn new(half_width: f64, n: usize, alpha: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidGrid(format!("alpha must be positive, got {alpha}")));
        }
        if n < MIN_NR {
            return Err(Error::InvalidGrid(format!("n = {n} is below {MIN_NR}")));
        }
        Ok(Self { half_width, n, alpha })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.step()
    }
}

/// Amplitudes on a [`CartesianGrid`], row-major with `y` as the row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartesianField {
    pub grid: CartesianGrid,
    pub amplitudes: Vec<Complex64>,
}

impl CartesianField {
    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitudes[iy * self.grid.n + ix]
    }

    pub fn norm2(&self) -> f64 {
        let h = self.grid.step();
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * h * h
    }
}

/// Hermite–Gauss product `Ψ_{n_x}(x)Ψ_{n_y}(y)`.
pub fn hg_value(nx: usize, ny: usize, alpha: f64, x: f64, y: f64) -> f64 {
    let ln_norm = alpha.ln()
        - 0.5 * (PI.ln() + (nx + ny) as f64 * 2f64.ln() + ln_factorial(nx as u64) + ln_factorial(ny as u64));
    let (u, v) = (alpha * x, alpha * y);
    ln_norm.exp() * hermite(nx, u) * hermite(ny, v) * (-(u * u + v * v) / 2.0).exp()
}

pub fn eval_hg(nx: usize, ny: usize, grid: &CartesianGrid) -> CartesianField {
    let n = grid.n;
    let amplitudes = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let (ix, iy) = (i % n, i / n);
            Complex64::new(hg_value(nx, ny, grid.alpha, grid.coord(ix), grid.coord(iy)), 0.0)
        })
        .collect();
    CartesianField {
        grid: *grid,
        amplitudes,
    }
}

/// Hermite–Gauss product sampled on a polar grid.
pub fn eval_hg_polar(nx: usize, ny: usize, grid: &PolarGrid) -> Result<FieldMap> {
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.n_r * grid.n_phi];
    amplitudes
        .par_chunks_mut(grid.n_phi)
        .enumerate()
        .for_each(|(j, row)| {
            let r = grid.r(j);
            for (m, a) in row.iter_mut().enumerate() {
                let (s, c) = grid.phi(m).sin_cos();
                *a = Complex64::new(hg_value(nx, ny, grid.alpha, r * c, r * s), 0.0);
            }
        });
    FieldMap::from_amplitudes(*grid, amplitudes, format!("HG nx={nx} ny={ny}"))
}

/// Number of dark rings of `Ψ_{pℓ}`: positive zeros of `L_p^{|ℓ|}`.
pub fn count_dark_rings(p: usize, ell: i32) -> Result<usize> {
    Ok(laguerre_positive_zeros(p, ell.unsigned_abs() as usize)?.len())
}

/// Radial profile `f(r_j)` of a field of the form `f(r) e^{iℓφ}`, rotated so
/// its largest sample is real positive, together with the detected ℓ.
pub fn radial_profile(field: &FieldMap) -> Result<(i32, Vec<Complex64>)> {
    let g = field.grid;
    let peak = field.peak();
    if peak == 0.0 {
        return Err(Error::NotFactorized("field vanishes identically".into()));
    }
    let j_star = (0..g.n_r)
        .max_by(|&a, &b| field.get(a, 0).norm().total_cmp(&field.get(b, 0).norm()))
        .unwrap_or(0);
    let base = field.get(j_star, 0);
    if base.norm() < 0.5 * peak {
        return Err(Error::NotFactorized("azimuthal modulus is not uniform".into()));
    }
    let turn = (field.get(j_star, 1) / base).arg() / g.dphi();
    let ell = turn.round() as i32;
    for j in 0..g.n_r {
        let f = field.get(j, 0);
        for m in 0..g.n_phi {
            let expected = f * Complex64::from_polar(1.0, f64::from(ell) * g.phi(m));
            if (field.get(j, m) - expected).norm() > FACTORIZATION_TOL * peak {
                return Err(Error::NotFactorized(format!(
                    "sample (r_{j}, phi_{m}) departs from f(r) exp({ell} i phi)"
                )));
            }
        }
    }
    let phase = base.conj() / base.norm();
    Ok((ell, (0..g.n_r).map(|j| field.get(j, 0) * phase).collect()))
}

/// Sign changes of the real radial profile, ignoring samples below
/// [`RING_FLOOR`] of the peak.
pub fn count_dark_rings_field(field: &FieldMap) -> Result<usize> {
    let (_, profile) = radial_profile(field)?;
    let peak = profile.iter().map(|f| f.norm()).fold(0.0, f64::max);
    let mut last = 0.0f64;
    let mut count = 0;
    for f in &profile {
        if f.norm() <= RING_FLOOR * peak {
            continue;
        }
        if last != 0.0 && (f.re > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = f.re;
    }
    Ok(count)
}

/// Strict local minima of the radial intensity whose neighbours exceed
/// [`RING_FLOOR`] of the peak intensity.
pub fn interior_minima(field: &FieldMap) -> Result<usize> {
    let (_, profile) = radial_profile(field)?;
    let intensity: Vec<f64> = profile.iter().map(|f| f.norm_sqr()).collect();
    let peak = intensity.iter().copied().fold(0.0, f64::max);
    Ok(intensity
        .windows(3)
        .filter(|w| w[1] < w[0] && w[1] < w[2] && w[0].min(w[2]) > RING_FLOOR * peak)
        .count())
}

/// Radial extent in `ρ = αr` used by [`radial_operator_rayleigh`].
pub fn rayleigh_rho_max(p: usize, ell: i32) -> f64 {
    let n = 2 * p + ell.unsigned_abs() as usize;
    (((2 * n + 1) as f64).sqrt() + 6.0).max(10.0)
}

/// Rayleigh quotient of the radial-number operator
/// `-¼(d²/dρ² + ρ⁻¹d/dρ - ℓ²/ρ²) - |ℓ|/2 + ρ²/4 - ½` on the profile of `Ψ_{pℓ}`.
///
/// Central differences in flux form on the staggered grid `ρ_j = (j+½)h`
/// with zero flux through `ρ = 0` and a Dirichlet wall past the last node.
pub fn radial_operator_rayleigh(p: usize, ell: i32, h: f64) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {h}")));
    }
    let a = ell.unsigned_abs() as usize;
    let af = a as f64;
    let n = (rayleigh_rho_max(p, ell) / h).ceil() as usize;
    if n < 3 {
        return Err(Error::StepTooCoarse {
            quotient: f64::NAN,
            distance: f64::NAN,
        });
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); p + 1];
    coeffs[p] = Complex64::new(1.0, 0.0);
    let rho = |j: usize| (j as f64 + 0.5) * h;
    let u: Vec<f64> = (0..n).map(|j| radial_sum(&coeffs, a, 1.0, rho(j)).re).collect();
    let at = |j: isize| if j < 0 || j as usize >= n { 0.0 } else { u[j as usize] };

    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..n {
        let r = rho(j);
        let inner = if j == 0 { 0.0 } else { r - h / 2.0 };
        let outer = r + h / 2.0;
        let ji = j as isize;
        let lap = (outer * (at(ji + 1) - u[j]) - inner * (u[j] - at(ji - 1))) / (r * h * h);
        let hu = -0.25 * (lap - af * af / (r * r) * u[j]) + (r * r / 4.0 - af / 2.0 - 0.5) * u[j];
        num += u[j] * hu * r;
        den += u[j] * u[j] * r;
    }
    let q = num / den;
    let distance = (q - p as f64).abs();
    if distance > 0.5 {
        return Err(Error::StepTooCoarse { quotient: q, distance });
    }
    Ok(q)
}

/// Field of [`intelligent_state`].
pub fn intelligent_field(
    ell: i32,
    m: usize,
    tau: f64,
    grid: &PolarGrid,
    trunc: Truncation,
) -> Result<FieldMap> {
    let state = intelligent_state(IrrepLabel::new(ell), m, tau, trunc)?;
    let mut f = eval_state(&state, grid)?;
    f.label = format!("intelligent ell={ell} M={m} tau={tau}");
    Ok(f)
}
