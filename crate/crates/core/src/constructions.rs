//! Explicit bases and basis sets: cyclic shift bases, the quadratic-residue
//! seeds for primes `p ≡ 3` and `p ≡ 1 (mod 4)`, Weyl–Heisenberg eigenbases,
//! and the fixed small-dimension sets.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;

use crate::error::{MubError, Result};
use crate::linalg::{fourier_basis, inner_unchecked, root_of_unity, unbiasedness_defect, Basis, CVec, MubSet, C64};

/// Tolerance on the seed vector accepted by [`shift_basis_from_vector`].
pub const SEED_TOL: f64 = 1e-8;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Smallest prime factor of `n ≥ 2`.
pub fn smallest_prime_factor(n: u64) -> u64 {
    let mut k = 2;
    while k * k <= n {
        if n.is_multiple_of(k) {
            return k;
        }
        k += 1;
    }
    n
}

/// Quadratic residues modulo an odd prime, with `0` counted as a residue.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueClasses {
    pub p: u64,
    /// Residues including zero, sorted.
    pub q_set: Vec<u64>,
    /// Non-residues, sorted.
    pub n_set: Vec<u64>,
}

impl ResidueClasses {
    pub fn is_residue(&self, m: u64) -> bool {
        self.q_set.binary_search(&(m % self.p)).is_ok()
    }
}

pub fn quadratic_residues(p: u64) -> Result<ResidueClasses> {
    if p < 3 || !is_prime(p) {
        return Err(MubError::NotOddPrime(p));
    }
    let mut is_square = vec![false; p as usize];
    for x in 0..p {
        is_square[(x * x % p) as usize] = true;
    }
    let (q, n): (Vec<u64>, Vec<u64>) = (0..p).partition(|&m| is_square[m as usize]);
    Ok(ResidueClasses { p, q_set: q, n_set: n })
}

/// Worst `| |⟨j̃|v⟩|² − 1/d |` over the Fourier basis states `|j̃⟩`.
pub fn fourier_unbiasedness_defect(v: &CVec) -> Result<f64> {
    let f = fourier_basis(v.dim())?;
    let target = 1.0 / v.dim() as f64;
    Ok(f.rows()
        .iter()
        .map(|row| (inner_unchecked(row.entries(), v.entries()).norm_sqr() - target).abs())
        .fold(0.0, f64::max))
}

/// Row `k` is `v` cyclically shifted by `k`: entry `v_m` lands at index
/// `(m + k) mod d`.
///
/// The seed must be a unit vector unbiased to the Fourier basis; the shifted
/// copies then form an orthonormal basis that is itself unbiased to it.
pub fn shift_basis_from_vector(v: &CVec) -> Result<Basis> {
    v.check_state(SEED_TOL)?;
    let defect = fourier_unbiasedness_defect(v)?;
    if defect > SEED_TOL {
        return Err(MubError::NotFourierUnbiased { defect });
    }
    let d = v.dim();
    let rows = (0..d)
        .map(|k| {
            let mut row = vec![C64::new(0.0, 0.0); d];
            for (m, z) in v.entries().iter().enumerate() {
                row[(m + k) % d] = *z;
            }
            CVec::new(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Basis::from_rows(rows, "shift")
}

fn require_class(p: u64, class: u64) -> Result<ResidueClasses> {
    let rc = quadratic_residues(p)?;
    if p % 4 != class {
        return Err(MubError::WrongResidueClass { p, expected: class });
    }
    Ok(rc)
}

/// Seed for `p ≡ 3 (mod 4)`: `(−(p−1) + 2i√p)/(p+1)` on residues (zero
/// included), `1` on non-residues, all over `√p`.
pub fn qr_seed_3mod4(p: u64) -> Result<CVec> {
    let rc = require_class(p, 3)?;
    let pf = p as f64;
    let alpha = C64::new(-(pf - 1.0), 2.0 * pf.sqrt()) / (pf + 1.0);
    let s = 1.0 / pf.sqrt();
    CVec::new((0..p).map(|m| if rc.is_residue(m) { alpha * s } else { C64::new(s, 0.0) }).collect())
}

/// Seed for `p ≡ 1 (mod 4)`: `1` at zero, `z₀` on nonzero residues and
/// `z₀*` on non-residues, with `cos θ = (√p − 1)/(p − 1)` and `sin θ > 0`.
pub fn qr_seed_1mod4(p: u64) -> Result<CVec> {
    let rc = require_class(p, 1)?;
    let z0 = residue_phase_1mod4(p);
    let s = 1.0 / (p as f64).sqrt();
    CVec::new(
        (0..p)
            .map(|m| {
                if m == 0 {
                    C64::new(s, 0.0)
                } else if rc.is_residue(m) {
                    z0 * s
                } else {
                    z0.conj() * s
                }
            })
            .collect(),
    )
}

/// `z₀ = cos θ + i sin θ` with `cos θ = (√p − 1)/(p − 1)`, positive branch.
pub fn residue_phase_1mod4(p: u64) -> C64 {
    let pf = p as f64;
    let cos = (pf.sqrt() - 1.0) / (pf - 1.0);
    C64::new(cos, (1.0 - cos * cos).sqrt())
}

pub fn qr_basis_3mod4(p: u64) -> Result<Basis> {
    Ok(shift_basis_from_vector(&qr_seed_3mod4(p)?)?.with_label(format!("QR{p}")))
}

pub fn qr_basis_1mod4(p: u64) -> Result<Basis> {
    Ok(shift_basis_from_vector(&qr_seed_1mod4(p)?)?.with_label(format!("QR{p}")))
}

/// Quadratic-residue basis for any odd prime, dispatching on `p mod 4`.
pub fn qr_basis(p: u64) -> Result<Basis> {
    match quadratic_residues(p)?.p % 4 {
        3 => qr_basis_3mod4(p),
        _ => qr_basis_1mod4(p),
    }
}

/// `{I, F_p, QR_p}`.
pub fn qr_triple(p: u64) -> Result<MubSet> {
    let d = p as usize;
    MubSet::new(vec![Basis::identity(d), fourier_basis(d)?, qr_basis(p)?])
}

/// A Weyl–Heisenberg operator: the clock `Z_d`, or `X_d Z_d^k` (shift for
/// `k = 0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WhOperator {
    Z { d: usize },
    XZ { d: usize, k: usize },
}

impl WhOperator {
    pub fn z(d: usize) -> Self {
        WhOperator::Z { d }
    }

    pub fn x(d: usize) -> Self {
        WhOperator::XZ { d, k: 0 }
    }

    pub fn xz(d: usize, k: usize) -> Self {
        WhOperator::XZ { d, k: k % d.max(1) }
    }

    pub fn dim(&self) -> usize {
        match *self {
            WhOperator::Z { d } | WhOperator::XZ { d, .. } => d,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            WhOperator::Z { .. } => "Z".into(),
            WhOperator::XZ { k: 0, .. } => "X".into(),
            WhOperator::XZ { k: 1, .. } => "XZ".into(),
            WhOperator::XZ { k, .. } => format!("XZ^{k}"),
        }
    }

    /// `Z|j⟩ = ω^j|j⟩`, `X Z^k |j⟩ = ω^{kj} |j+1 mod d⟩`.
    pub fn matrix(&self) -> DMatrix<C64> {
        match *self {
            WhOperator::Z { d } => {
                DMatrix::from_fn(d, d, |r, c| if r == c { root_of_unity(d, r as i64) } else { C64::new(0.0, 0.0) })
            }
            WhOperator::XZ { d, k } => DMatrix::from_fn(d, d, |r, c| {
                if r == (c + 1) % d {
                    root_of_unity(d, (k * c) as i64)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }
}

/// Orthonormal eigenbasis of a Weyl–Heisenberg operator.
///
/// `Z` and `X` have the identity and Fourier bases as eigenbases. Other
/// operators go through a complex Schur decomposition; since they are
/// unitary the Schur vectors are eigenvectors. Rows are ordered by
/// eigenvalue argument in `[0, 2π)`, re-orthonormalized, and phase-fixed.
pub fn wh_eigenbasis(op: WhOperator) -> Result<Basis> {
    let d = op.dim();
    if d < 2 {
        return Err(MubError::Domain("Weyl-Heisenberg operators need d >= 2".into()));
    }
    match op {
        WhOperator::Z { .. } => return Ok(Basis::identity(d).with_label(op.label())),
        WhOperator::XZ { k: 0, .. } => return Ok(fourier_basis(d)?.with_label(op.label())),
        _ => {}
    }
    let m = op.matrix();
    let schur = m
        .clone()
        .try_schur(1e-15, 10_000)
        .ok_or_else(|| MubError::Eigen(format!("Schur iteration did not converge for {}", op.label())))?;
    let (q, t) = schur.unpack();

    let off_diag = (0..d)
        .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| t[(r, c)].norm())
        .fold(0.0, f64::max);
    if off_diag > 1e-9 {
        return Err(MubError::Eigen(format!("Schur form not diagonal (off-diagonal {off_diag:e})")));
    }

    let arg = |z: C64| z.arg().rem_euclid(2.0 * PI);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| arg(t[(a, a)]).total_cmp(&arg(t[(b, b)])));

    let mut rows: Vec<Vec<C64>> = order.iter().map(|&c| q.column(c).iter().copied().collect()).collect();
    gram_schmidt(&mut rows)?;

    for (row, &c) in rows.iter().zip(&order) {
        let lambda = t[(c, c)];
        let v = nalgebra::DVector::from_column_slice(row);
        let res = (&m * &v - v * lambda).norm();
        if res > 1e-9 {
            return Err(MubError::Eigen(format!("eigen-equation residual {res:e} for {}", op.label())));
        }
    }
    let rows = rows.into_iter().map(|r| Ok(CVec::new(r)?.canonical_phase())).collect::<Result<Vec<_>>>()?;
    Basis::from_rows(rows, op.label())
}

/// Modified Gram–Schmidt in place.
fn gram_schmidt(rows: &mut [Vec<C64>]) -> Result<()> {
    for i in 0..rows.len() {
        for j in 0..i {
            let (done, rest) = rows.split_at_mut(i);
            let proj = inner_unchecked(&done[j], &rest[0]);
            for (x, y) in rest[0].iter_mut().zip(&done[j]) {
                *x -= proj * y;
            }
        }
        let n = rows[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-8 {
            return Err(MubError::Eigen("eigenvectors are linearly dependent".into()));
        }
        rows[i].iter_mut().for_each(|z| *z /= n);
    }
    Ok(())
}

/// Eigenbases of `Z, X, XZ, …, XZ^{ξ−2}` with `ξ = (smallest prime factor of d) + 1`.
///
/// Each basis is checked against the ones built before it.
pub fn wh_candidate_set(d: usize) -> Result<MubSet> {
    if d < 2 {
        return Err(MubError::Domain("Weyl-Heisenberg sets need d >= 2".into()));
    }
    let xi = smallest_prime_factor(d as u64) as usize + 1;
    let mut ops = vec![WhOperator::z(d), WhOperator::x(d)];
    ops.extend((1..xi - 1).map(|k| WhOperator::xz(d, k)));
    let mut bases: Vec<Basis> = Vec::with_capacity(xi);
    for op in ops {
        let b = wh_eigenbasis(op)?;
        for prev in &bases {
            let defect = unbiasedness_defect(prev, &b)?;
            if defect > crate::DEFAULT_TOL {
                return Err(MubError::NotUnbiased { defect });
            }
        }
        bases.push(b);
    }
    MubSet::new(bases)
}

/// The complete sets of `d + 1` bases in `d ∈ {2, 3, 5}`.
pub fn fourier_complete_set(d: usize) -> Result<MubSet> {
    if !matches!(d, 2 | 3 | 5) {
        return Err(MubError::Domain(format!("complete sets are provided for d in {{2, 3, 5}}, not {d}")));
    }
    let s = wh_candidate_set(d)?;
    debug_assert_eq!(s.len(), d + 1);
    Ok(s)
}

/// `{I, F₂, σ_y eigenbasis}`.
pub fn pauli_triple() -> Result<MubSet> {
    fourier_complete_set(2)
}

/// The d = 4 triple `{B1 = I, B2, B3(a, b)}`, entries as printed in the
/// source construction.
///
/// `a = π/2` is the parameter value excluded there; the returned set carries
/// a note when it is used.
pub fn dim4_triple(a: f64, b: f64) -> Result<MubSet> {
    let c = |re: f64, im: f64| C64::new(re, im);
    let h = 0.5;
    let one = c(h, 0.0);
    let b2 = Basis::from_entries(
        vec![
            vec![one, one, one, one],
            vec![one, c(0.0, h), -one, c(0.0, -h)],
            vec![one, -one, one, -one],
            vec![one, c(0.0, -h), -one, c(0.0, h)],
        ],
        "B2",
    )?;
    let ea = C64::from_polar(h, a);
    let eb = C64::from_polar(h, b);
    let b3 = Basis::from_entries(
        vec![vec![one, ea, one, -ea], vec![one, -ea, one, ea], vec![one, eb, -one, eb], vec![one, -eb, -one, -eb]],
        "B3",
    )?;
    let set = MubSet::new(vec![Basis::identity(4).with_label("B1"), b2, b3])?;
    Ok(if (a - FRAC_PI_2).abs() < 1e-12 {
        set.with_note("a = pi/2: parameter value excluded from the unextendible family")
    } else {
        set
    })
}

/// The isolated 6×6 complex Hadamard matrix `S6`.
pub fn s6_matrix() -> Basis {
    // exponents of ω₃ as printed
    const E: [[i64; 6]; 6] = [
        [0, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 2, 2],
        [0, 1, 0, 2, 2, 1],
        [0, 1, 2, 0, 1, 2],
        [0, 2, 2, 1, 0, 1],
        [0, 2, 1, 2, 1, 0],
    ];
    let s = 1.0 / 6f64.sqrt();
    let rows = E.iter().map(|r| r.iter().map(|&e| root_of_unity(3, e) * s).collect()).collect();
    Basis::from_entries(rows, "S6").expect("fixed 6x6 shape")
}

/// `{I, S6}`.
pub fn s6_pair() -> MubSet {
    MubSet::new(vec![Basis::identity(6), s6_matrix()]).expect("shared dimension")
}
