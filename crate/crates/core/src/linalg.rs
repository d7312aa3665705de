//! Complex vectors, bases stored row-wise, and the unbiasedness predicates.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{MubError, Result};

pub type C64 = Complex64;

/// Default tolerance for norm, orthonormality and unbiasedness checks.
pub const DEFAULT_TOL: f64 = 1e-10;

/// `exp(2πi k / d)` with the exponent reduced mod `d` first.
pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * k / d as f64)
}

/// A vector of complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct CVec(Vec<C64>);

impl CVec {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(MubError::Domain("vector must have at least one entry".into()));
        }
        Ok(CVec(entries))
    }

    /// Standard basis state `|k⟩` in dimension `d`.
    pub fn basis_state(d: usize, k: usize) -> Self {
        let mut v = vec![C64::new(0.0, 0.0); d];
        v[k] = C64::new(1.0, 0.0);
        CVec(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(MubError::NotNormalized { norm: n });
        }
        Ok(CVec(self.0.iter().map(|z| z / n).collect()))
    }

    /// Errors unless the norm is within `tol` of one.
    pub fn check_state(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(MubError::NotNormalized { norm: n });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &CVec) -> Result<C64> {
        check_dims(self.dim(), other.dim())?;
        Ok(inner_unchecked(&self.0, &other.0))
    }

    pub fn scaled(&self, z: C64) -> CVec {
        CVec(self.0.iter().map(|w| w * z).collect())
    }

    /// Multiply by a global phase so that the first entry of modulus above
    /// `1e-8` is real and positive.
    pub fn canonical_phase(&self) -> CVec {
        match self.0.iter().find(|z| z.norm() > 1e-8) {
            Some(z) => self.scaled(z.conj() / z.norm()),
            None => self.clone(),
        }
    }
}

pub(crate) fn inner_unchecked(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn check_dims(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(MubError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// An ordered list of `d` states in dimension `d`, stored as matrix rows.
///
/// Construction only checks the shape. Orthonormality is measured, not
/// enforced, so that defective inputs can still be reported on.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    rows: Vec<CVec>,
    label: String,
}

impl Basis {
    pub fn from_rows(rows: Vec<CVec>, label: impl Into<String>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(MubError::Domain("basis must have at least one row".into()));
        }
        for r in &rows {
            check_dims(d, r.dim())?;
        }
        Ok(Basis { rows, label: label.into() })
    }

    /// Builds from raw row-major entries.
    pub fn from_entries(rows: Vec<Vec<C64>>, label: impl Into<String>) -> Result<Self> {
        let rows = rows.into_iter().map(CVec::new).collect::<Result<Vec<_>>>()?;
        Basis::from_rows(rows, label)
    }

    pub fn identity(d: usize) -> Self {
        Basis { rows: (0..d).map(|k| CVec::basis_state(d, k)).collect(), label: "I".into() }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[CVec] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &CVec {
        &self.rows[k]
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.rows[row].0[col]
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn to_matrix(&self) -> DMatrix<C64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |j, m| self.entry(j, m))
    }

    pub fn from_matrix(m: &DMatrix<C64>, label: impl Into<String>) -> Result<Self> {
        check_dims(m.nrows(), m.ncols())?;
        let rows = (0..m.nrows()).map(|j| CVec((0..m.ncols()).map(|c| m[(j, c)]).collect())).collect();
        Basis::from_rows(rows, label)
    }

    /// Largest entrywise deviation of the row Gram matrix from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for k in j..d {
                let g = inner_unchecked(&self.rows[j].0, &self.rows[k].0);
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.orthonormality_defect() <= tol
    }

    /// Maps every state `|v⟩` to `U|v⟩`.
    pub fn transform(&self, u: &DMatrix<C64>) -> Result<Basis> {
        check_dims(self.dim(), u.nrows())?;
        check_dims(self.dim(), u.ncols())?;
        let m = self.to_matrix() * u.transpose();
        Basis::from_matrix(&m, self.label.clone())
    }

    /// Entrywise complex conjugate: the basis of conjugated states.
    pub fn conj(&self) -> Basis {
        Basis {
            rows: self.rows.iter().map(|r| CVec(r.0.iter().map(|z| z.conj()).collect())).collect(),
            label: format!("{}*", self.label),
        }
    }
}

/// An ordered collection of bases of a common dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MubSet {
    dim: usize,
    bases: Vec<Basis>,
    note: Option<String>,
}

impl MubSet {
    pub fn new(bases: Vec<Basis>) -> Result<Self> {
        let first = bases.first().ok_or_else(|| MubError::Domain("a set needs at least one basis".into()))?;
        let dim = first.dim();
        for b in &bases {
            check_dims(dim, b.dim())?;
        }
        Ok(MubSet { dim, bases, note: None })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn note(&self) -> Option<&str> {
        self.note.as_deref()
    }

    pub fn push(&mut self, b: Basis) -> Result<()> {
        check_dims(self.dim, b.dim())?;
        self.bases.push(b);
        Ok(())
    }

    /// The set with basis `i` removed. `None` if that would empty it.
    pub fn without(&self, i: usize) -> Option<MubSet> {
        if self.bases.len() <= 1 || i >= self.bases.len() {
            return None;
        }
        let mut bases = self.bases.clone();
        bases.remove(i);
        Some(MubSet { dim: self.dim, bases, note: None })
    }

    pub fn transform(&self, u: &DMatrix<C64>) -> Result<MubSet> {
        let bases = self.bases.iter().map(|b| b.transform(u)).collect::<Result<Vec<_>>>()?;
        Ok(MubSet { dim: self.dim, bases, note: self.note.clone() })
    }
}

/// Outcome of [`validate_mub_set`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub tolerance: f64,
    pub worst_orthonormality_defect: f64,
    /// Max over pairs of `| |⟨u|v⟩|² − 1/d |`.
    pub worst_unbiasedness_defect: f64,
    /// Bases whose orthonormality defect exceeds the tolerance.
    pub non_orthonormal: Vec<usize>,
    /// Pairs of bases whose unbiasedness defect exceeds the tolerance.
    pub biased_pairs: Vec<(usize, usize)>,
}

/// The Fourier basis: row `j` has entries `ω_d^{jm}/√d`.
pub fn fourier_basis(d: usize) -> Result<Basis> {
    if d == 0 {
        return Err(MubError::Domain("dimension must be positive".into()));
    }
    let s = 1.0 / (d as f64).sqrt();
    let rows = (0..d).map(|j| CVec((0..d).map(|m| root_of_unity(d, (j * m) as i64) * s).collect())).collect();
    Basis::from_rows(rows, format!("F{d}"))
}

/// `|⟨u|v⟩|²`.
pub fn overlap_mag2(u: &CVec, v: &CVec) -> Result<f64> {
    Ok(u.inner(v)?.norm_sqr())
}

/// Max over all row pairs of `| |⟨u|v⟩|² − 1/d |`.
pub fn unbiasedness_defect(b1: &Basis, b2: &Basis) -> Result<f64> {
    check_dims(b1.dim(), b2.dim())?;
    let target = 1.0 / b1.dim() as f64;
    let mut worst = 0.0f64;
    for u in b1.rows() {
        for v in b2.rows() {
            worst = worst.max((inner_unchecked(&u.0, &v.0).norm_sqr() - target).abs());
        }
    }
    Ok(worst)
}

pub fn are_mutually_unbiased(b1: &Basis, b2: &Basis, tol: f64) -> Result<bool> {
    if tol <= 0.0 {
        return Err(MubError::InvalidConfig("tolerance must be positive".into()));
    }
    Ok(unbiasedness_defect(b1, b2)? <= tol)
}

pub fn validate_mub_set(s: &MubSet, tol: f64) -> Result<ValidationReport> {
    if tol <= 0.0 {
        return Err(MubError::InvalidConfig("tolerance must be positive".into()));
    }
    let mut worst_orth = 0.0f64;
    let mut non_orthonormal = Vec::new();
    for (i, b) in s.bases().iter().enumerate() {
        let defect = b.orthonormality_defect();
        worst_orth = worst_orth.max(defect);
        if defect > tol {
            non_orthonormal.push(i);
        }
    }
    let mut worst_unb = 0.0f64;
    let mut biased_pairs = Vec::new();
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let defect = unbiasedness_defect(&s.bases()[i], &s.bases()[j])?;
            worst_unb = worst_unb.max(defect);
            if defect > tol {
                biased_pairs.push((i, j));
            }
        }
    }
    Ok(ValidationReport {
        ok: worst_orth <= tol && worst_unb <= tol,
        tolerance: tol,
        worst_orthonormality_defect: worst_orth,
        worst_unbiasedness_defect: worst_unb,
        non_orthonormal,
        biased_pairs,
    })
}

/// Applies the unitary taking the first basis to the identity to every basis
/// of the set. Every pairwise overlap is preserved.
///
/// Rows are states, so `B_i ↦ B_i · B_1^†`; for real sets this is the
/// product with the plain transpose.
pub fn standardize_set(s: &MubSet) -> Result<MubSet> {
    let first_adj = s.bases()[0].to_matrix().adjoint();
    let bases = s
        .bases()
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let label = if i == 0 { "I".to_string() } else { b.label().to_string() };
            Basis::from_matrix(&(b.to_matrix() * &first_adj), label)
        })
        .collect::<Result<Vec<_>>>()?;
    let out = MubSet::new(bases)?;
    Ok(match s.note() {
        Some(n) => out.with_note(n),
        None => out,
    })
}

/// All entries real and of modulus `1/√d`, each within `tol`.
pub fn is_real_hadamard(b: &Basis, tol: f64) -> bool {
    let target = 1.0 / (b.dim() as f64).sqrt();
    b.rows().iter().flat_map(|r| r.entries()).all(|z| z.im.abs() <= tol && (z.norm() - target).abs() <= tol)
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix,
/// with the phases of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<C64> {
    let g = DMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        let z = r[(c, c)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..d {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let v: Vec<C64> =
        (0..d).map(|_| C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    CVec(v.into_iter().map(|z| z / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn fourier_small_cases() {
        let f1 = fourier_basis(1).unwrap();
        assert_eq!(f1.entry(0, 0), c(1.0, 0.0));

        let f2 = fourier_basis(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (j, m, want) in [(0, 0, s), (0, 1, s), (1, 0, s), (1, 1, -s)] {
            assert!((f2.entry(j, m) - c(want, 0.0)).norm() < 1e-15);
        }

        let f7 = fourier_basis(7).unwrap();
        let want = C64::from_polar(1.0, 2.0 * PI * 3.0 / 7.0) / 7f64.sqrt();
        assert!((f7.entry(1, 3) - want).norm() < 1e-15);
        assert!(matches!(fourier_basis(0), Err(MubError::Domain(_))));
    }

    #[test]
    fn fourier_is_unitary_up_to_64() {
        for d in 1..=64 {
            let m = fourier_basis(d).unwrap().to_matrix();
            let prod = &m * m.adjoint();
            let err = (prod - DMatrix::<C64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "d={d} err={err}");
        }
    }

    #[test]
    fn overlap_examples() {
        let e0 = CVec::basis_state(3, 0);
        assert_eq!(overlap_mag2(&e0, &e0).unwrap(), 1.0);
        let f5 = fourier_basis(5).unwrap();
        let o = overlap_mag2(&CVec::basis_state(5, 0), f5.row(0)).unwrap();
        assert!((o - 0.2).abs() < 1e-15);
        let err = overlap_mag2(&CVec::basis_state(3, 0), f5.row(0)).unwrap_err();
        assert_eq!(err, MubError::DimensionMismatch { expected: 3, found: 5 });
    }

    #[test]
    fn mutual_unbiasedness_examples() {
        let i3 = Basis::identity(3);
        let f3 = fourier_basis(3).unwrap();
        assert!(are_mutually_unbiased(&i3, &f3, 1e-10).unwrap());
        assert!(!are_mutually_unbiased(&i3, &i3, 1e-10).unwrap());
        assert!(are_mutually_unbiased(&i3, &Basis::identity(4), 1e-10).is_err());
        assert!(are_mutually_unbiased(&i3, &f3, 0.0).is_err());
    }

    #[test]
    fn identity_pair_defect() {
        for d in 2..6 {
            let s = MubSet::new(vec![Basis::identity(d), Basis::identity(d)]).unwrap();
            let r = validate_mub_set(&s, 1e-10).unwrap();
            assert!(!r.ok);
            assert!((r.worst_unbiasedness_defect - (1.0 - 1.0 / d as f64)).abs() < 1e-15);
            assert_eq!(r.biased_pairs, vec![(0, 1)]);
            assert!(r.non_orthonormal.is_empty());
        }
    }

    #[test]
    fn non_orthonormal_basis_is_reported() {
        let b =
            Basis::from_entries(vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]], "bad").unwrap();
        let r = validate_mub_set(&MubSet::new(vec![b]).unwrap(), 1e-10).unwrap();
        assert!(!r.ok);
        assert_eq!(r.non_orthonormal, vec![0]);
    }

    #[test]
    fn mixed_dimensions_rejected() {
        let err = MubSet::new(vec![Basis::identity(2), Basis::identity(3)]).unwrap_err();
        assert_eq!(err, MubError::DimensionMismatch { expected: 2, found: 3 });
        let ragged = Basis::from_entries(vec![vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]], "x");
        assert!(ragged.is_err());
    }

    #[test]
    fn standardize_fourier_pair_gives_identities() {
        let f2 = fourier_basis(2).unwrap();
        let s = standardize_set(&MubSet::new(vec![f2.clone(), f2]).unwrap()).unwrap();
        for b in s.bases() {
            let err = (b.to_matrix() - DMatrix::<C64>::identity(2, 2)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-15);
        }
    }

    #[test]
    fn standardize_keeps_standard_sets() {
        let s = MubSet::new(vec![Basis::identity(5), fourier_basis(5).unwrap()]).unwrap();
        let t = standardize_set(&s).unwrap();
        for (a, b) in s.bases().iter().zip(t.bases()) {
            let err = (a.to_matrix() - b.to_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-15);
        }
    }

    #[test]
    fn standardize_complex_set_preserves_overlaps() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = haar_unitary(3, &mut rng);
        let s = MubSet::new(vec![Basis::identity(3), fourier_basis(3).unwrap()]).unwrap().transform(&u).unwrap();
        let t = standardize_set(&s).unwrap();
        assert!(validate_mub_set(&t, 1e-12).unwrap().ok);
        let err =
            (t.bases()[0].to_matrix() - DMatrix::<C64>::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
        for b in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    let before = overlap_mag2(s.bases()[0].row(j), s.bases()[b].row(k)).unwrap();
                    let after = overlap_mag2(t.bases()[0].row(j), t.bases()[b].row(k)).unwrap();
                    assert!((before - after).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn real_hadamard_predicate() {
        assert!(is_real_hadamard(&fourier_basis(2).unwrap(), 1e-12));
        assert!(!is_real_hadamard(&fourier_basis(3).unwrap(), 1e-12));
        assert!(!is_real_hadamard(&Basis::identity(2), 1e-12));
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [1, 2, 5, 9] {
            let u = haar_unitary(d, &mut rng);
            let err = (&u * u.adjoint() - DMatrix::<C64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-13);
        }
    }

    #[test]
    fn canonical_phase_makes_leading_entry_positive() {
        let v = CVec::new(vec![c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0)]).unwrap();
        let w = v.canonical_phase();
        assert!((w.entries()[1] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((w.norm() - 1.0).abs() < 1e-15);
    }
}
