//! Truncated su(1,1) operators on one fixed-ℓ radial ladder.
//!
//! The basis is `{|p, ℓ⟩ : 0 ≤ p ≤ p_max}`, identified with the discrete-series
//! vectors `|k, k+p⟩` where `k = (|ℓ|+1)/2`. Truncating a ladder damages the
//! last few rows of any product of raising and lowering matrices, so every
//! identity here is checked on the interior block `0..=p_max-margin`.

mod expm;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};
pub use expm::{expm_tridiagonal, Tridiagonal};

/// Default margin for algebra identities.
pub const ALGEBRA_MARGIN: usize = 8;
/// Largest |τ| accepted by [`dmatrix`].
pub const TAU_CAP: f64 = 6.0;
/// Row-orthonormality tolerance certifying a d-matrix.
pub const DMATRIX_ORTHO_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One discrete-series irrep, labelled by the OAM index.
///
/// The Bargmann index is kept as the integer `2k = |ℓ| + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "IrrepRepr", into = "IrrepRepr")]
pub struct IrrepLabel {
    ell: i32,
    two_k: u32,
}

#[derive(Serialize, Deserialize)]
struct IrrepRepr {
    ell: i32,
    k: f64,
}

impl From<IrrepLabel> for IrrepRepr {
    fn from(l: IrrepLabel) -> Self {
        Self { ell: l.ell, k: l.k() }
    }
}

impl TryFrom<IrrepRepr> for IrrepLabel {
    type Error = Error;

    fn try_from(r: IrrepRepr) -> Result<Self> {
        let label = IrrepLabel::new(r.ell);
        if label.k() != r.k {
            return Err(Error::Domain(format!(
                "k = {} is inconsistent with ell = {} (expected {})",
                r.k,
                r.ell,
                label.k()
            )));
        }
        Ok(label)
    }
}

impl IrrepLabel {
    pub fn new(ell: i32) -> Self {
        Self {
            ell,
            two_k: ell.unsigned_abs() + 1,
        }
    }

    pub fn ell(&self) -> i32 {
        self.ell
    }

    pub fn abs_ell(&self) -> usize {
        self.ell.unsigned_abs() as usize
    }

    pub fn two_k(&self) -> u32 {
        self.two_k
    }

    pub fn k(&self) -> f64 {
        f64::from(self.two_k) / 2.0
    }

    /// Casimir eigenvalue `k(k-1)`.
    pub fn casimir(&self) -> f64 {
        let k = self.k();
        k * (k - 1.0)
    }
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ell={} k={}/2", self.ell, self.two_k)
    }
}

/// Size of a truncated ladder and the number of top levels not trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    p_max: usize,
    margin: usize,
}

impl Truncation {
    pub fn new(p_max: usize, margin: usize) -> Result<Self> {
        if p_max == 0 {
            return Err(Error::InvalidTruncation("p_max must be positive".into()));
        }
        if margin >= p_max {
            return Err(Error::InvalidTruncation(format!(
                "margin {margin} must be smaller than p_max {p_max}"
            )));
        }
        Ok(Self { p_max, margin })
    }

    /// Truncation with the default algebra margin.
    pub fn algebra(p_max: usize) -> Result<Self> {
        Self::new(p_max, ALGEBRA_MARGIN)
    }

    /// Truncation whose interior rows of `exp(iτk_y)` are resolved to double
    /// precision on `p_max + margin + 1` levels.
    ///
    /// The margin is at least `max(16, ⌈4 sinh|τ|·k⌉)` and is widened until
    /// every interior row fits under `p_max` according to [`rotation_extent`].
    pub fn for_dmatrix(irrep: IrrepLabel, tau: f64, p_max: usize) -> Result<Self> {
        let k = irrep.k();
        let floor = default_dmatrix_margin(k, tau);
        if rotation_extent(k, 0, tau) > p_max {
            return Err(Error::InvalidTruncation(format!(
                "p_max = {p_max} cannot hold the rotated vacuum at tau = {tau}; need at least {}",
                rotation_extent(k, 0, tau)
            )));
        }
        let fit = (0..=p_max)
            .take_while(|&p| rotation_extent(k, p, tau) <= p_max)
            .last()
            .unwrap_or(0);
        Self::new(p_max, floor.max(p_max - fit))
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn margin(&self) -> usize {
        self.margin
    }

    pub fn dim(&self) -> usize {
        self.p_max + 1
    }

    /// Last trusted level.
    pub fn interior(&self) -> usize {
        self.p_max - self.margin
    }
}

/// `max(16, ⌈4 sinh|τ|·k⌉)`.
pub fn default_dmatrix_margin(k: f64, tau: f64) -> usize {
    16usize.max((4.0 * tau.abs().sinh() * k).ceil() as usize)
}

/// Level beyond which column `p` of `exp(iτk_y)` carries less than about
/// 1e-14 of its weight.
///
/// Empirical envelope: the rotated state spreads over `~(k+p)e^{|τ|}` levels
/// and its geometric tail decays like `tanh²(τ/2)` per level.
pub fn rotation_extent(k: f64, p: usize, tau: f64) -> usize {
    let t = tau.abs();
    if t == 0.0 {
        return p;
    }
    let decay = -(t / 2.0).tanh().powi(2).ln();
    let extent = (k + p as f64) * 1.4 * t.exp() + 37.0 / decay;
    (extent.ceil() as usize).max(p)
}

/// Operator tags accepted by [`build_operator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    KPlus,
    KMinus,
    Kz,
    Kx,
    Ky,
    PHat,
    NHat,
    ELower,
    Casimir,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 9] = [
        Self::KPlus,
        Self::KMinus,
        Self::Kz,
        Self::Kx,
        Self::Ky,
        Self::PHat,
        Self::NHat,
        Self::ELower,
        Self::Casimir,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::KPlus => "kplus",
            Self::KMinus => "kminus",
            Self::Kz => "kz",
            Self::Kx => "kx",
            Self::Ky => "ky",
            Self::PHat => "p_hat",
            Self::NHat => "n_hat",
            Self::ELower => "e_lower",
            Self::Casimir => "casimir",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_owned()))
    }
}

/// Dense operator on a truncated ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    irrep: IrrepLabel,
    trunc: Truncation,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    /// Wraps a matrix; it must be `(p_max+1)`-square.
    pub fn from_entries(
        irrep: IrrepLabel,
        trunc: Truncation,
        entries: DMatrix<Complex64>,
    ) -> Result<Self> {
        if entries.nrows() != trunc.dim() || entries.ncols() != trunc.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for truncation of dimension {}",
                entries.nrows(),
                entries.ncols(),
                trunc.dim()
            )));
        }
        Ok(Self {
            irrep,
            trunc,
            entries,
        })
    }

    pub fn irrep(&self) -> IrrepLabel {
        self.irrep
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `⟨p'|A|p⟩`.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} for operator of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        let x = nalgebra::DVector::from_column_slice(v);
        Ok((&self.entries * x).as_slice().to_vec())
    }

    /// Max-abs deviation from the conjugate transpose over the full block.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.entries - self.entries.adjoint()))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.irrep != other.irrep {
            return Err(Error::IrrepMismatch {
                left: self.irrep.ell,
                right: other.irrep.ell,
            });
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(format!(
                "operators of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

/// `⟨p+1|k_+|p⟩ = √((2k+p)(p+1))`.
pub fn kplus_element(irrep: IrrepLabel, p: usize) -> f64 {
    ((f64::from(irrep.two_k) + p as f64) * (p as f64 + 1.0)).sqrt()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn raw_operator(irrep: IrrepLabel, which: OperatorKind, dim: usize) -> DMatrix<Complex64> {
    let k = irrep.k();
    let abs_ell = irrep.abs_ell() as f64;
    let ladder = |sign: f64, imag: bool, scale: f64| {
        // scale·(k_+ + sign·k_-), optionally times -i
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for p in 0..dim.saturating_sub(1) {
            let v = kplus_element(irrep, p) * scale;
            let (up, down) = if imag {
                (Complex64::new(0.0, -v), Complex64::new(0.0, -sign * v))
            } else {
                (real(v), real(sign * v))
            };
            m[(p + 1, p)] = up;
            m[(p, p + 1)] = down;
        }
        m
    };
    let diagonal =
        |f: &dyn Fn(f64) -> f64| DMatrix::from_fn(dim, dim, |i, j| if i == j { real(f(i as f64)) } else { ZERO });

    match which {
        OperatorKind::KPlus => {
            let mut m = DMatrix::from_element(dim, dim, ZERO);
            for p in 0..dim.saturating_sub(1) {
                m[(p + 1, p)] = real(kplus_element(irrep, p));
            }
            m
        }
        OperatorKind::KMinus => raw_operator(irrep, OperatorKind::KPlus, dim).transpose(),
        OperatorKind::Kz => diagonal(&|p| k + p),
        OperatorKind::Kx => ladder(1.0, false, 0.5),
        // (k_+ - k_-)/(2i) = -i/2 (k_+ - k_-)
        OperatorKind::Ky => ladder(-1.0, true, 0.5),
        OperatorKind::PHat => diagonal(&|p| p),
        OperatorKind::NHat => diagonal(&|p| 2.0 * p + abs_ell),
        OperatorKind::ELower => {
            let mut m = DMatrix::from_element(dim, dim, ZERO);
            for p in 0..dim.saturating_sub(1) {
                m[(p, p + 1)] = real(1.0);
            }
            m
        }
        OperatorKind::Casimir => {
            let kz = raw_operator(irrep, OperatorKind::Kz, dim);
            let kx = raw_operator(irrep, OperatorKind::Kx, dim);
            let ky = raw_operator(irrep, OperatorKind::Ky, dim);
            &kz * &kz - &kx * &kx - &ky * &ky
        }
    }
}

pub fn build_operator(irrep: IrrepLabel, which: OperatorKind, trunc: Truncation) -> OperatorMatrix {
    OperatorMatrix {
        irrep,
        trunc,
        entries: raw_operator(irrep, which, trunc.dim()),
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max-abs entry of `m` on rows and columns `0..=last`.
pub fn interior_max_abs(m: &DMatrix<Complex64>, last: usize) -> f64 {
    let n = (last + 1).min(m.nrows()).min(m.ncols());
    max_abs(&m.view((0, 0), (n, n)).into_owned())
}

/// Max-abs entry of `[A, B] - sign·expected` on the interior block of `A`.
pub fn commutator_residual(
    a: &OperatorMatrix,
    b: &OperatorMatrix,
    expected: &OperatorMatrix,
    sign: f64,
) -> Result<f64> {
    a.check_compatible(b)?;
    a.check_compatible(expected)?;
    let c = &a.entries * &b.entries - &b.entries * &a.entries - &expected.entries * real(sign);
    Ok(interior_max_abs(&c, a.trunc.interior()))
}

/// Interior residuals of `ê ê† = 1` and `ê† ê = 1 - |0⟩⟨0|`.
pub fn e_unitarity_report(irrep: IrrepLabel, trunc: Truncation) -> (f64, f64) {
    let e = build_operator(irrep, OperatorKind::ELower, trunc).entries;
    let ed = e.adjoint();
    let eye = DMatrix::<Complex64>::identity(trunc.dim(), trunc.dim());
    let mut not_vacuum = eye.clone();
    not_vacuum[(0, 0)] = ZERO;
    let r1 = interior_max_abs(&(&e * &ed - &eye), trunc.interior());
    let r2 = interior_max_abs(&(&ed * &e - not_vacuum), trunc.interior());
    (r1, r2)
}

/// Interior residual of `K² - k(k-1)`.
pub fn casimir_residual(irrep: IrrepLabel, trunc: Truncation) -> f64 {
    let c = build_operator(irrep, OperatorKind::Casimir, trunc).entries;
    let eye = DMatrix::<Complex64>::identity(trunc.dim(), trunc.dim());
    interior_max_abs(&(c - eye * real(irrep.casimir())), trunc.interior())
}

/// Real generator `iτk_y = (τ/2)(k_+ - k_-)` on `dim` levels.
fn rotation_generator(irrep: IrrepLabel, tau: f64, dim: usize) -> Tridiagonal {
    let sub: Vec<f64> = (0..dim.saturating_sub(1))
        .map(|p| 0.5 * tau * kplus_element(irrep, p))
        .collect();
    let sup = sub.iter().map(|x| -x).collect();
    Tridiagonal {
        sub,
        diag: vec![0.0; dim],
        sup,
    }
}

/// `exp(iτk_y)` on `dim` levels without cropping or certification.
pub fn rotation_raw(irrep: IrrepLabel, tau: f64, dim: usize) -> DMatrix<f64> {
    expm_tridiagonal(&rotation_generator(irrep, tau, dim))
}

/// Max-abs of `R Rᵀ - 1` restricted to rows `0..=last`.
pub fn row_orthonormality_residual(r: &DMatrix<f64>, last: usize) -> f64 {
    let n = (last + 1).min(r.nrows());
    let rows = r.rows(0, n);
    let gram = &rows * rows.transpose();
    (gram - DMatrix::<f64>::identity(n, n)).amax()
}

pub fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau.abs() > TAU_CAP {
        return Err(Error::Domain(format!(
            "|tau| = {} exceeds the cap {TAU_CAP}",
            tau.abs()
        )));
    }
    Ok(())
}

/// Wigner d-matrix `d^k_{k+p', k+p}(τ) = ⟨p'|exp(iτk_y)|p⟩`.
///
/// Computed on `p_max + margin + 1` levels and cropped; fails when the
/// interior rows are not orthonormal to [`DMATRIX_ORTHO_TOL`].
pub fn dmatrix(irrep: IrrepLabel, tau: f64, trunc: Truncation) -> Result<OperatorMatrix> {
    check_tau(tau)?;
    let padded = trunc.dim() + trunc.margin();
    let full = rotation_raw(irrep, tau, padded);
    let crop = full.view((0, 0), (trunc.dim(), trunc.dim())).into_owned();
    let residual = row_orthonormality_residual(&crop, trunc.interior());
    if residual > DMATRIX_ORTHO_TOL {
        return Err(Error::InadequateTruncation {
            residual,
            tolerance: DMATRIX_ORTHO_TOL,
        });
    }
    Ok(OperatorMatrix {
        irrep,
        trunc,
        entries: crop.map(real),
    })
}

/// Large-k approximation `e^{-k(τ-τ_p)²/2} / [(k+p)² - k²]^{1/4}`,
/// `cosh τ_p = (k+p)/k`.
pub fn dmatrix_asymptotic(k: f64, p: usize, tau: f64) -> Result<f64> {
    if p == 0 {
        return Err(Error::Domain("asymptotic d-function needs p >= 1".into()));
    }
    if !(k > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("need k > 0 and finite tau, got k = {k}, tau = {tau}")));
    }
    let tau_p = asymptotic_peak(k, p);
    let kp = k + p as f64;
    Ok((-k * (tau - tau_p).powi(2) / 2.0).exp() / (kp * kp - k * k).powf(0.25))
}

/// `τ_p = arcosh((k+p)/k)`.
pub fn asymptotic_peak(k: f64, p: usize) -> f64 {
    ((k + p as f64) / k).acosh()
}
