//! Two-mode Cartesian Fock space `{|n_x, n_y⟩ : n_x + n_y ≤ n_max}`.
//!
//! Small dense matrices used to check the oscillator identities behind the
//! radial ladder and to rebuild `k_+` from circular quanta.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::su11::{kplus_element, IrrepLabel};
use crate::{Error, Result};

pub const DEFAULT_N_MAX: usize = 24;

type CMatrix = DMatrix<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Flat ordering, total-n-major then `n_x` ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoModeBasis {
    n_max: usize,
}

impl TwoModeBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::InvalidTruncation(format!(
                "n_max = {n_max}; at least 2 shells are needed"
            )));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1) * (self.n_max + 2) / 2
    }

    pub fn index(&self, nx: usize, ny: usize) -> Option<usize> {
        let n = nx + ny;
        (n <= self.n_max).then(|| n * (n + 1) / 2 + nx)
    }

    pub fn state(&self, idx: usize) -> (usize, usize) {
        let mut n = 0;
        while (n + 1) * (n + 2) / 2 <= idx {
            n += 1;
        }
        let nx = idx - n * (n + 1) / 2;
        (nx, n - nx)
    }

    /// Number of states with total `n ≤ n_max - 2`.
    pub fn interior_dim(&self) -> usize {
        (self.n_max - 1) * self.n_max / 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoModeOp {
    Ax,
    Ay,
    APlus,
    AMinus,
    N,
    Ell,
}

impl TwoModeOp {
    pub const ALL: [TwoModeOp; 6] = [Self::Ax, Self::Ay, Self::APlus, Self::AMinus, Self::N, Self::Ell];

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Ax => "ax",
            Self::Ay => "ay",
            Self::APlus => "aplus",
            Self::AMinus => "aminus",
            Self::N => "n",
            Self::Ell => "ell",
        }
    }
}

impl fmt::Display for TwoModeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for TwoModeOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| Error::UnknownTag(s.to_owned()))
    }
}

fn lowering(basis: &TwoModeBasis, along_x: bool) -> CMatrix {
    let d = basis.dim();
    let mut m = CMatrix::zeros(d, d);
    for col in 0..d {
        let (nx, ny) = basis.state(col);
        let (q, target) = if along_x {
            (nx, nx.checked_sub(1).map(|x| (x, ny)))
        } else {
            (ny, ny.checked_sub(1).map(|y| (nx, y)))
        };
        if let Some((tx, ty)) = target {
            let row = basis.index(tx, ty).expect("lowering stays inside");
            m[(row, col)] = c((q as f64).sqrt());
        }
    }
    m
}

pub fn build_two_mode(which: TwoModeOp, basis: &TwoModeBasis) -> CMatrix {
    let ax = || lowering(basis, true);
    let ay = || lowering(basis, false);
    let i = Complex64::i();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        TwoModeOp::Ax => ax(),
        TwoModeOp::Ay => ay(),
        // a_± = (a_x ∓ i a_y)/√2
        TwoModeOp::APlus => (ax() - ay() * i) * c(s),
        TwoModeOp::AMinus => (ax() + ay() * i) * c(s),
        TwoModeOp::N => {
            let (x, y) = (ax(), ay());
            x.adjoint() * &x + y.adjoint() * &y
        }
        TwoModeOp::Ell => {
            let (x, y) = (ax(), ay());
            (y.adjoint() * &x - x.adjoint() * &y) * i
        }
    }
}

fn interior_residual(basis: &TwoModeBasis, m: &CMatrix) -> f64 {
    let n = basis.interior_dim();
    m.view((0, 0), (n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Largest interior residual among the canonical commutators of
/// `a_x, a_y, a_+, a_-` and their adjoints.
pub fn canonical_residual(basis: &TwoModeBasis) -> f64 {
    let d = basis.dim();
    let eye = CMatrix::identity(d, d);
    let zero = CMatrix::zeros(d, d);
    let ops: Vec<CMatrix> = [TwoModeOp::Ax, TwoModeOp::Ay, TwoModeOp::APlus, TwoModeOp::AMinus]
        .iter()
        .map(|&w| build_two_mode(w, basis))
        .collect();
    let mut worst = 0.0f64;
    // x/y pair and ± pair are each canonical; cross pairs are not orthogonal
    for pair in [[0usize, 1], [2, 3]] {
        for &u in &pair {
            for &v in &pair {
                let expected = if u == v { &eye } else { &zero };
                worst = worst.max(interior_residual(basis, &(commutator(&ops[u], &ops[v].adjoint()) - expected)));
                worst = worst.max(interior_residual(basis, &commutator(&ops[u], &ops[v])));
            }
        }
    }
    worst
}

/// Residuals of `n = n_+ + n_-` and `ℓ = n_+ - n_-` on the interior.
pub fn circular_number_residual(basis: &TwoModeBasis) -> (f64, f64) {
    let ap = build_two_mode(TwoModeOp::APlus, basis);
    let am = build_two_mode(TwoModeOp::AMinus, basis);
    let np = ap.adjoint() * &ap;
    let nm = am.adjoint() * &am;
    let n = build_two_mode(TwoModeOp::N, basis);
    let ell = build_two_mode(TwoModeOp::Ell, basis);
    (
        interior_residual(basis, &(n - (&np + &nm))),
        interior_residual(basis, &(ell - (np - nm))),
    )
}

/// Distinct eigenvalues of `n` with their multiplicities.
pub fn degeneracy_spectrum(basis: &TwoModeBasis) -> Vec<(usize, usize)> {
    let n = build_two_mode(TwoModeOp::N, basis);
    let eig = SymmetricEigen::new(n);
    let mut counts = vec![0usize; basis.n_max + 1];
    for &lambda in eig.eigenvalues.iter() {
        let level = lambda.round();
        if (lambda - level).abs() < 1e-9 && level >= 0.0 && (level as usize) <= basis.n_max {
            counts[level as usize] += 1;
        }
    }
    counts.into_iter().enumerate().filter(|(_, m)| *m > 0).collect()
}

/// Orthonormal basis of the ℓ-eigenspace, one column per vector, from the
/// shell blocks of `ell_op`, together with its largest entry outside them.
fn ell_eigenspace(basis: &TwoModeBasis, ell_op: &CMatrix, ell: i32) -> (CMatrix, f64) {
    let d = basis.dim();
    let mut off_block = 0.0f64;
    for col in 0..d {
        let shell = basis.state(col).0 + basis.state(col).1;
        for row in 0..d {
            let (x, y) = basis.state(row);
            if x + y != shell {
                off_block = off_block.max(ell_op[(row, col)].norm());
            }
        }
    }
    let mut cols = Vec::new();
    for n in 0..=basis.n_max {
        let start = n * (n + 1) / 2;
        let block = ell_op.view((start, start), (n + 1, n + 1)).into_owned();
        let eig = SymmetricEigen::new(block);
        for (j, &l) in eig.eigenvalues.iter().enumerate() {
            if (l - f64::from(ell)).abs() < 1e-8 {
                let mut v = DVector::from_element(d, c(0.0));
                v.rows_mut(start, n + 1).copy_from(&eig.eigenvectors.column(j));
                cols.push(v);
            }
        }
    }
    (CMatrix::from_columns(&cols), off_block)
}

/// On the ℓ-eigenspace: `(n - |ℓ|)/2` has spectrum `{0, 1, 2, …}` and equals
/// `n_-` for ℓ > 0 (`n_+` for ℓ < 0); `[ℓ, n]` vanishes on the interior.
/// Returns the largest residual.
pub fn radial_link_check(basis: &TwoModeBasis, ell: i32) -> Result<f64> {
    let a = ell.unsigned_abs() as usize;
    if a > basis.n_max {
        return Err(Error::Domain(format!("|ell| = {a} exceeds n_max = {}", basis.n_max)));
    }
    let n = build_two_mode(TwoModeOp::N, basis);
    let ell_op = build_two_mode(TwoModeOp::Ell, basis);
    let (v, off_block) = ell_eigenspace(basis, &ell_op, ell);
    let expected_dim = (basis.n_max - a) / 2 + 1;
    if v.ncols() != expected_dim {
        return Err(Error::DimensionMismatch(format!(
            "ell = {ell} eigenspace has dimension {}, expected {expected_dim}",
            v.ncols()
        )));
    }
    let restricted = v.adjoint() * (&n * &v);
    let radial = (&restricted - CMatrix::identity(v.ncols(), v.ncols()) * c(a as f64)) * c(0.5);

    let mut spectrum: Vec<f64> = SymmetricEigen::new(radial.clone()).eigenvalues.iter().copied().collect();
    spectrum.sort_by(f64::total_cmp);
    let mut worst = spectrum
        .iter()
        .enumerate()
        .map(|(p, s)| (s - p as f64).abs())
        .fold(off_block, f64::max);

    let which = if ell >= 0 { TwoModeOp::AMinus } else { TwoModeOp::APlus };
    let lv = build_two_mode(which, basis) * &v;
    let partial = lv.adjoint() * &lv;
    worst = worst.max((partial - &radial).iter().map(|z| z.norm()).fold(0.0, f64::max));
    worst = worst.max(interior_residual(basis, &commutator(&ell_op, &n)));
    Ok(worst)
}

/// Circular Fock vector `(a_+†)^{n_+}(a_-†)^{n_-}|0,0⟩/√(n_+! n_-!)`.
pub fn circular_state(basis: &TwoModeBasis, n_plus: usize, n_minus: usize) -> Result<DVector<Complex64>> {
    if n_plus + n_minus > basis.n_max {
        return Err(Error::IndexOutOfRange {
            p: n_plus + n_minus,
            p_max: basis.n_max,
        });
    }
    let ap = build_two_mode(TwoModeOp::APlus, basis).adjoint();
    let am = build_two_mode(TwoModeOp::AMinus, basis).adjoint();
    let mut v = DVector::from_element(basis.dim(), c(0.0));
    v[0] = c(1.0);
    for q in 0..n_plus {
        v = (&ap * v) / c(((q + 1) as f64).sqrt());
    }
    for q in 0..n_minus {
        v = (&am * v) / c(((q + 1) as f64).sqrt());
    }
    Ok(v)
}

/// Max deviation of `⟨p+1,ℓ|a_+†a_-†|p,ℓ⟩` from `√((2k+p)(p+1))` over the
/// ladder that fits in the basis.
pub fn kplus_cross_check(basis: &TwoModeBasis, ell: i32) -> Result<f64> {
    let a = ell.unsigned_abs() as usize;
    if a + 2 > basis.n_max {
        return Err(Error::Domain(format!("|ell| = {a} leaves no ladder below n_max = {}", basis.n_max)));
    }
    let kp = build_two_mode(TwoModeOp::AMinus, basis).adjoint() * build_two_mode(TwoModeOp::APlus, basis).adjoint();
    let ket = |p: usize| {
        if ell >= 0 {
            circular_state(basis, p + a, p)
        } else {
            circular_state(basis, p, p + a)
        }
    };
    let irrep = IrrepLabel::new(ell);
    let mut worst = 0.0f64;
    for p in 0..=(basis.n_max - a - 2) / 2 {
        let element = ket(p + 1)?.dotc(&(&kp * ket(p)?));
        worst = worst.max((element - c(kplus_element(irrep, p))).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering() {
        let b = TwoModeBasis::new(4).unwrap();
        assert_eq!(b.dim(), 15);
        assert_eq!(b.state(0), (0, 0));
        assert_eq!(b.state(1), (0, 1));
        assert_eq!(b.state(2), (1, 0));
        assert_eq!(b.state(14), (4, 0));
        for idx in 0..b.dim() {
            let (x, y) = b.state(idx);
            assert_eq!(b.index(x, y), Some(idx));
        }
        assert_eq!(b.index(3, 2), None);
        assert!(TwoModeBasis::new(1).is_err());
    }

    #[test]
    fn tags() {
        for w in TwoModeOp::ALL {
            assert_eq!(w.tag().parse::<TwoModeOp>().unwrap(), w);
        }
        assert!("az".parse::<TwoModeOp>().is_err());
    }

    #[test]
    fn canonical_and_circular_identities() {
        let b = TwoModeBasis::new(DEFAULT_N_MAX).unwrap();
        assert!(canonical_residual(&b) < 1e-14);
        let (n_res, l_res) = circular_number_residual(&b);
        assert!(n_res < 1e-14 && l_res < 1e-14);
    }

    #[test]
    fn circular_state_carries_two_units() {
        let b = TwoModeBasis::new(6).unwrap();
        let v = circular_state(&b, 2, 0).unwrap();
        let lv = build_two_mode(TwoModeOp::Ell, &b) * &v;
        assert!((lv - &v * c(2.0)).norm() < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn shells_are_degenerate() {
        let b = TwoModeBasis::new(DEFAULT_N_MAX).unwrap();
        let spec = degeneracy_spectrum(&b);
        assert_eq!(spec.len(), DEFAULT_N_MAX + 1);
        for (n, mult) in spec {
            assert_eq!(mult, n + 1);
        }
    }

    #[test]
    fn radial_number_link() {
        let b = TwoModeBasis::new(10).unwrap();
        for ell in [2, -1, 0, 5] {
            assert!(radial_link_check(&b, ell).unwrap() < 1e-12, "ell {ell}");
        }
        assert!(radial_link_check(&b, 11).is_err());
    }

    #[test]
    fn kplus_matches_su11() {
        let b = TwoModeBasis::new(DEFAULT_N_MAX).unwrap();
        for ell in [-3, 0, 1, 4] {
            assert!(kplus_cross_check(&b, ell).unwrap() < 1e-12);
        }
    }
}
