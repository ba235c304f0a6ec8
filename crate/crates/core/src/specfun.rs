//! Scalar special-function kernels.
//!
//! Everything here is a pure function of plain numbers. Orders are unsigned
//! integers, so the "negative order" domain errors are ruled out by the type
//! system; the remaining domain checks return [`Error::Domain`].
//!
//! Ratios of factorials are always formed in the log domain; `(p + |l|)!`
//! overflows `f64` long before the radial indices used by the state
//! constructors do.

use crate::error::{Error, Result};

/// Relative size below which a series term no longer changes the sum.
pub const SERIES_REL_CUTOFF: f64 = 1e-17;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 10_000;
/// Largest argument accepted by the Bessel kernels.
pub const BESSEL_MAX_ARG: f64 = 50.0;

/// Generalized Laguerre polynomial `L_p^a(x)` by the three-term recurrence
/// `(p+1) L_{p+1} = (2p+1+a-x) L_p - (p+a) L_{p-1}`.
pub fn laguerre(p: usize, a: usize, x: f64) -> f64 {
    let a = a as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for n in 1..p {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + a - x) * cur - (nf + a) * prev) / (nf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// The `p` strictly positive zeros of `L_p^a`, ascending.
///
/// Zeros are bracketed by sign changes on `[0, 4p + 2a + 2]` and polished by
/// bisection until the bracket can no longer shrink in double precision. The
/// bracketing grid is refined until exactly `p` sign changes are seen.
pub fn laguerre_positive_zeros(p: usize, a: usize) -> Result<Vec<f64>> {
    if p == 0 {
        return Ok(Vec::new());
    }
    let upper = (4 * p + 2 * a + 2) as f64;
    let mut cells = 32 * (p + 1);
    let mut found = 0;
    while cells <= 1 << 22 {
        let h = upper / cells as f64;
        let mut brackets = Vec::with_capacity(p);
        // x = 0 itself is never a zero: L_p^a(0) = C(p+a, p) > 0.
        let mut x0 = 0.0;
        let mut f0 = laguerre(p, a, x0);
        for i in 1..=cells {
            let x1 = i as f64 * h;
            let f1 = laguerre(p, a, x1);
            if f1 == 0.0 {
                brackets.push((x1, x1));
            } else if f0 != 0.0 && f0.signum() != f1.signum() {
                brackets.push((x0, x1));
            }
            x0 = x1;
            f0 = f1;
        }
        found = brackets.len();
        if found == p {
            return Ok(brackets
                .into_iter()
                .map(|(lo, hi)| bisect(|x| laguerre(p, a, x), lo, hi))
                .collect());
        }
        cells *= 4;
    }
    Err(Error::RootIsolation { p, a, found })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut f_lo = f(lo);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Modified Bessel function of the first kind `I_nu(x)` from the ascending
/// series. Every term is positive, so the series is well conditioned over
/// the accepted range `0 <= x <= 50`.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64> {
    if !(0.0..=BESSEL_MAX_ARG).contains(&x) {
        return Err(Error::Domain(format!(
            "bessel_i needs 0 <= x <= {BESSEL_MAX_ARG}, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let q = half * half;
    let n = nu as f64;
    let mut term = (n * half.ln() - ln_factorial(nu as u64)).exp();
    let mut sum = term;
    for m in 1..SERIES_MAX_TERMS {
        let mf = m as f64;
        term *= q / (mf * (mf + n));
        sum += term;
        if term < SERIES_REL_CUTOFF * sum {
            break;
        }
    }
    Ok(sum)
}

/// Bessel function of the first kind `J_nu(x)` for `|x| <= 50`.
///
/// Small arguments use the alternating ascending series with compensated
/// summation. Above `x = 1` that series cancels catastrophically (its
/// largest term near `x = 50` is ~1e19), so Miller's backward recurrence
/// normalized by `J_0 + 2 sum J_2k = 1` is used instead.
pub fn bessel_j(nu: u32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > BESSEL_MAX_ARG {
        return Err(Error::Domain(format!(
            "bessel_j needs |x| <= {BESSEL_MAX_ARG}, got {x}"
        )));
    }
    let sign = if x < 0.0 && nu % 2 == 1 { -1.0 } else { 1.0 };
    let x = x.abs();
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    let value = if x <= 1.0 {
        bessel_j_series(nu, x)
    } else {
        bessel_j_miller(nu, x)
    };
    Ok(sign * value)
}

fn bessel_j_series(nu: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let n = nu as f64;
    let mut term = (n * half.ln() - ln_factorial(nu as u64)).exp();
    let mut sum = NeumaierSum::new(term);
    for m in 1..SERIES_MAX_TERMS {
        let mf = m as f64;
        term *= -q / (mf * (mf + n));
        sum.add(term);
        if term.abs() < SERIES_REL_CUTOFF * sum.value().abs() {
            break;
        }
    }
    sum.value()
}

fn bessel_j_miller(nu: u32, x: f64) -> f64 {
    const RESCALE: f64 = 1e250;
    let nu = nu as usize;
    let base = nu.max(x.ceil() as usize);
    let mut start = base + 20 + (40.0 * base as f64).sqrt() as usize;
    start += start % 2;

    let mut j_next = 0.0;
    let mut j_cur = 1e-300;
    let mut wanted = 0.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        if j_cur.abs() > RESCALE {
            j_cur /= RESCALE;
            j_next /= RESCALE;
            wanted /= RESCALE;
            norm /= RESCALE;
        }
        let order = k - 1;
        if order == nu {
            wanted = j_cur;
        }
        if order != 0 && order % 2 == 0 {
            norm += 2.0 * j_cur;
        }
    }
    norm += j_cur;
    wanted / norm
}

struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    fn new(first: f64) -> Self {
        Self { sum: first, comp: 0.0 }
    }

    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    statrs::function::factorial::ln_factorial(n)
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Binomial coefficient `C(n, r)` with real upper argument `n >= r`.
///
/// Integer `n` up to 170 goes through the exact factorial table; anything
/// else through `ln Gamma`.
pub fn binomial(n: f64, r: u64) -> Result<f64> {
    let rf = r as f64;
    if !n.is_finite() || n < 0.0 || rf > n {
        return Err(Error::Domain(format!(
            "binomial needs 0 <= r <= n, got n = {n}, r = {r}"
        )));
    }
    if n.fract() == 0.0 && n <= 170.0 {
        use statrs::function::factorial::factorial;
        let ni = n as u64;
        let value = factorial(ni) / (factorial(r) * factorial(ni - r));
        return Ok(if value < 9.0e15 { value.round() } else { value });
    }
    Ok((ln_gamma(n + 1.0) - ln_gamma(rf + 1.0) - ln_gamma(n - rf + 1.0)).exp())
}

/// Residual of the Laguerre generating-function identity
/// `exp(g x / (g - 1)) = (1 - g)^(1 + l) sum_p g^p L_p^l(x)`, truncated after
/// `terms` terms.
pub fn laguerre_genfun_residual(gamma: f64, x: f64, ell: usize, terms: usize) -> Result<f64> {
    if !(gamma.abs() < 1.0) {
        return Err(Error::Domain(format!(
            "generating function needs |gamma| < 1, got {gamma}"
        )));
    }
    let a = ell as f64;
    let mut sum = 0.0;
    let mut power = 1.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    for p in 0..terms {
        sum += power * cur;
        power *= gamma;
        let pf = p as f64;
        let next = ((2.0 * pf + 1.0 + a - x) * cur - (pf + a) * prev) / (pf + 1.0);
        prev = cur;
        cur = next;
    }
    let lhs = (gamma * x / (gamma - 1.0)).exp();
    Ok((lhs - (1.0 - gamma).powf(1.0 + a) * sum).abs())
}
