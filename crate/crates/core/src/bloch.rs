//! Generalized Bloch vectors.
//!
//! A pure state `|v⟩` maps to the coefficients of `|v⟩⟨v| − I/d` in the
//! generalized Gell-Mann basis, rescaled so that pure states have unit norm.
//! With that scaling
//!
//! ```text
//! |⟨u|v⟩|² = 1/d + (1 − 1/d) · cos∠(bloch(u), bloch(v)),
//! ```
//!
//! so orthogonal states sit at cosine `−1/(d−1)` and unbiased states are
//! orthogonal Bloch vectors.
//!
//! Coordinate order, for `0 ≤ j < k < d` in lexicographic order:
//!
//! 1. symmetric `|j⟩⟨k| + |k⟩⟨j|`,
//! 2. antisymmetric `−i|j⟩⟨k| + i|k⟩⟨j|`,
//! 3. diagonal `√(2/(l(l+1))) (Σ_{j<l} |j⟩⟨j| − l|l⟩⟨l|)` for `l = 1..d−1`.
//!
//! For `d = 2` this is `(σx, σy, σz)`.

use crate::error::{MubError, Result};
use crate::linalg::{check_dims, Basis, CVec};

#[derive(Clone, Debug, PartialEq)]
pub struct BlochVector {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> Result<f64> {
        check_dims(self.dim, other.dim)?;
        Ok(self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum())
    }
}

pub fn bloch_vector(v: &CVec) -> Result<BlochVector> {
    v.check_state(1e-10)?;
    let d = v.dim();
    let a = v.entries();
    let pairs = d * (d - 1) / 2;
    let mut coords = vec![0.0; d * d - 1];
    let mut idx = 0;
    for j in 0..d {
        for k in j + 1..d {
            let z = a[j].conj() * a[k];
            coords[idx] = 2.0 * z.re;
            coords[pairs + idx] = 2.0 * z.im;
            idx += 1;
        }
    }
    for l in 1..d {
        let lf = l as f64;
        let upper: f64 = a[..l].iter().map(|z| z.norm_sqr()).sum();
        coords[2 * pairs + l - 1] = (2.0 / (lf * (lf + 1.0))).sqrt() * (upper - lf * a[l].norm_sqr());
    }
    // Gell-Mann coefficients of a pure state have squared norm 2(1 − 1/d)
    if d > 1 {
        let scale = 1.0 / (2.0 * (1.0 - 1.0 / d as f64)).sqrt();
        coords.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(BlochVector { dim: d, coords })
}

/// Cosine of the angle between the Bloch vectors of two states.
pub fn bloch_angle(u: &CVec, v: &CVec) -> Result<f64> {
    check_dims(u.dim(), v.dim())?;
    let (bu, bv) = (bloch_vector(u)?, bloch_vector(v)?);
    Ok(bu.dot(&bv)? / (bu.norm() * bv.norm()))
}

/// Whether the rows of `b` map to a regular simplex: pairwise cosines
/// `−1/(d−1)` and zero centroid, both within `1e-9`.
///
/// Rows that are not unit vectors give `false`.
pub fn simplex_check(b: &Basis) -> bool {
    let d = b.dim();
    if d < 2 {
        return false;
    }
    let Ok(vs) = b.rows().iter().map(bloch_vector).collect::<Result<Vec<_>>>() else {
        return false;
    };
    let target = -1.0 / (d as f64 - 1.0);
    for i in 0..d {
        for j in i + 1..d {
            let cos = vs[i].dot(&vs[j]).expect("same dimension") / (vs[i].norm() * vs[j].norm());
            if (cos - target).abs() > 1e-9 {
                return false;
            }
        }
    }
    let len = d * d - 1;
    (0..len).all(|c| vs.iter().map(|v| v.coords[c]).sum::<f64>().abs() <= 1e-9)
}

/// `d² − 1 − m(d − 1)`: dimension of the Bloch-space complement of `m`
/// mutually unbiased bases.
pub fn complement_dimension(d: usize, m: usize) -> Result<usize> {
    if d == 0 {
        return Err(MubError::Domain("dimension must be positive".into()));
    }
    let total = d * d - 1;
    let used = m * (d - 1);
    total
        .checked_sub(used)
        .ok_or_else(|| MubError::Domain(format!("{m} bases exceed the {} bases of a complete set in d = {d}", d + 1)))
}
