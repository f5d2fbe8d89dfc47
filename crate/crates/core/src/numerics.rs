//! Shared dense linear algebra on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type RMatrix = DMatrix<f64>;

/// Shared relative cutoff for canonical orthogonalization.
pub const DEFAULT_CANONICAL_CUTOFF: f64 = 1e-8;

/// Relative singular-value cutoff for the amplitude solve.
pub const DEFAULT_SVD_CUTOFF: f64 = 1e-8;

const HERMITIAN_TOL: f64 = 1e-10;

fn frob(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest `|A - A†|` element.
pub fn hermitian_defect(a: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

/// Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eig(a: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let scale = frob(a).max(1.0);
    let defect = hermitian_defect(a);
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::Contract(format!(
            "matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let real = a.iter().all(|z| z.im == 0.0);
    let (vals, vecs) = if real {
        let re = a.map(|z| z.re);
        let re = (&re + re.transpose()).scale(0.5);
        let eig = SymmetricEigen::new(re);
        (eig.eigenvalues, eig.eigenvectors.map(|x| Complex64::new(x, 0.0)))
    } else {
        let eig = SymmetricEigen::new(hermitize(a));
        (eig.eigenvalues, eig.eigenvectors)
    };
    Ok(sort_eigenpairs(vals.as_slice(), &vecs))
}

/// Real symmetric variant.
pub fn symmetric_eig(a: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    if !a.is_square() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let scale = a.norm().max(1.0);
    let defect = (a - a.transpose()).amax();
    if defect > HERMITIAN_TOL * scale {
        return Err(Error::Contract(format!(
            "matrix is not symmetric (defect {defect:.3e})"
        )));
    }
    let eig = SymmetricEigen::new((a + a.transpose()).scale(0.5));
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = RMatrix::from_fn(a.nrows(), a.ncols(), |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

fn sort_eigenpairs(vals: &[f64], vecs: &CMatrix) -> (Vec<f64>, CMatrix) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
    let sorted = idx.iter().map(|&i| vals[i]).collect();
    let v = CMatrix::from_fn(vecs.nrows(), idx.len(), |r, c| vecs[(r, idx[c])]);
    (sorted, v)
}

/// Maps the raw basis onto an orthonormal retained basis.
#[derive(Debug, Clone)]
pub struct CanonicalBasis {
    pub transform: CMatrix,
    pub discarded: usize,
    pub cutoff: f64,
}

impl CanonicalBasis {
    /// Eigenvectors of `s` with eigenvalue above `cutoff * max` scaled by
    /// `1/sqrt(eigenvalue)`.
    pub fn new(s: &CMatrix, cutoff: f64) -> Result<Self> {
        let (vals, vecs) = hermitian_eig(s)?;
        let max = vals.iter().cloned().fold(0.0, f64::max);
        if max <= 0.0 {
            return Err(Error::EmptyRetainedSpace);
        }
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| vals[i] > cutoff * max)
            .collect();
        if keep.is_empty() {
            return Err(Error::EmptyRetainedSpace);
        }
        let n = s.nrows();
        let transform = CMatrix::from_fn(n, keep.len(), |r, c| {
            vecs[(r, keep[c])] / vals[keep[c]].sqrt()
        });
        Ok(CanonicalBasis {
            transform,
            discarded: n - keep.len(),
            cutoff,
        })
    }

    pub fn rank(&self) -> usize {
        self.transform.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub energies: Vec<f64>,
    /// Columns are S-orthonormal eigenvectors in the raw basis.
    pub coeffs: CMatrix,
    pub discarded: usize,
}

/// Solves `H c = S c E` in the canonically orthogonalized retained space.
pub fn canonical_geneig(h: &CMatrix, s: &CMatrix, cutoff: f64) -> Result<GeneralizedEigen> {
    if h.shape() != s.shape() {
        return Err(Error::Dimension {
            expected: s.nrows(),
            found: h.nrows(),
        });
    }
    let basis = CanonicalBasis::new(s, cutoff)?;
    let x = &basis.transform;
    let hp = hermitize(&(x.adjoint() * h * x));
    let (energies, v) = hermitian_eig(&hp)?;
    Ok(GeneralizedEigen {
        energies,
        coeffs: x * v,
        discarded: basis.discarded,
    })
}

#[derive(Debug, Clone)]
pub struct LstsqSolution {
    pub x: DVector<f64>,
    pub residual: f64,
    pub rank: usize,
}

/// Minimum-norm least-squares solution of `m x = rhs` through the
/// pseudo-inverse, dropping singular values below `cutoff * max`.
pub fn lstsq_svd(m: &RMatrix, rhs: &DVector<f64>, cutoff: f64) -> Result<LstsqSolution> {
    if m.nrows() != rhs.len() {
        return Err(Error::Dimension {
            expected: m.nrows(),
            found: rhs.len(),
        });
    }
    let n = m.ncols();
    if n == 0 {
        return Ok(LstsqSolution {
            x: DVector::zeros(0),
            residual: rhs.norm(),
            rank: 0,
        });
    }
    // nalgebra's SVD can return an inaccurate factorization for matrices with
    // highly degenerate singular values, so symmetric input goes through the
    // eigendecomposition and anything else is checked after factorizing
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let symmetric = m.is_square() && (m - m.transpose()).amax() <= HERMITIAN_TOL * scale;
    let mut x = DVector::zeros(n);
    let mut rank = 0;
    if symmetric {
        let (vals, vecs) = symmetric_eig(m)?;
        let lmax = vals.iter().map(|l| l.abs()).fold(0.0, f64::max);
        if lmax <= 0.0 {
            return Err(Error::DegenerateSystem);
        }
        for (k, &l) in vals.iter().enumerate() {
            if l.abs() <= cutoff * lmax {
                continue;
            }
            rank += 1;
            let v = vecs.column(k);
            x.axpy(v.dot(rhs) / l, &v, 1.0);
        }
    } else {
        let svd = m.clone().svd(true, true);
        let u = svd.u.as_ref().expect("u requested");
        let vt = svd.v_t.as_ref().expect("v_t requested");
        let recon = u * RMatrix::from_diagonal(&svd.singular_values) * vt;
        let defect = (recon - m).amax();
        if defect > 1e-10 * scale {
            return Err(Error::Contract(format!("SVD reconstruction off by {defect:.3e}")));
        }
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        if smax <= 0.0 {
            return Err(Error::DegenerateSystem);
        }
        for (k, &sv) in svd.singular_values.iter().enumerate() {
            if sv <= cutoff * smax {
                continue;
            }
            rank += 1;
            let proj = u.column(k).dot(rhs) / sv;
            x.axpy(proj, &vt.row(k).transpose(), 1.0);
        }
    }
    if rank == 0 {
        return Err(Error::DegenerateSystem);
    }
    let residual = (m * &x - rhs).norm();
    Ok(LstsqSolution { x, residual, rank })
}

/// `S^{-1/2}` for Hermitian positive definite `S`.
pub fn inv_sqrt_psd(s: &CMatrix) -> Result<CMatrix> {
    matrix_power_psd(s, -0.5)
}

/// `S^p` via the eigendecomposition; requires every eigenvalue positive.
pub fn matrix_power_psd(s: &CMatrix, p: f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eig(s)?;
    if let Some(&min) = vals.first() {
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
    }
    Ok(spectral_function(&vals, &vecs, |x| x.powf(p)))
}

/// `U f(Λ) U†`.
pub fn spectral_function<F: Fn(f64) -> f64>(vals: &[f64], vecs: &CMatrix, f: F) -> CMatrix {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (c, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for r in 0..n {
            scaled[(r, c)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Convert a real matrix to complex.
pub fn to_complex(a: &RMatrix) -> CMatrix {
    a.map(|x| Complex64::new(x, 0.0))
}

/// 2-norm condition number from singular values.
pub fn condition_number(a: &CMatrix) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn pauli_z_eigenvalues() {
        let z = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let (vals, _) = hermitian_eig(&z).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
    }

    #[test]
    fn identity_eigenvalues() {
        let (vals, _) = hermitian_eig(&CMatrix::identity(4, 4)).unwrap();
        assert!(vals.iter().all(|&v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(hermitian_eig(&a), Err(Error::Contract(_))));
    }

    #[test]
    fn degenerate_symmetric_solve() {
        // rank 7 with a single repeated eigenvalue inside a 28-dimensional space
        let q = RMatrix::from_fn(28, 28, |i, j| ((i * 31 + j * 17) % 13) as f64 - 6.0 + if i == j { 20.0 } else { 0.0 });
        let q = q.qr().q();
        let cols = q.columns(0, 7);
        let m = &cols * cols.transpose() * 8.0;
        let b = &cols * DVector::from_fn(7, |i, _| i as f64 - 3.0);
        let sol = lstsq_svd(&m, &b, 1e-8).unwrap();
        assert_eq!(sol.rank, 7);
        assert!(sol.residual < 1e-12, "{}", sol.residual);
    }

    #[test]
    fn diagonal_solve() {
        let m = RMatrix::identity(3, 3) * 2.0;
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let sol = lstsq_svd(&m, &(-&b), 1e-8).unwrap();
        assert!((sol.x - (-&b / 2.0)).norm() < 1e-14);
        let zero = lstsq_svd(&m, &DVector::zeros(3), 1e-8).unwrap();
        assert_eq!(zero.x.norm(), 0.0);
    }

    #[test]
    fn all_zero_matrix_is_degenerate() {
        let m = RMatrix::zeros(2, 2);
        assert!(matches!(
            lstsq_svd(&m, &DVector::zeros(2), 1e-8),
            Err(Error::DegenerateSystem)
        ));
    }

    #[test]
    fn inverse_sqrt_diag() {
        let s = CMatrix::from_diagonal(&DVector::from_vec(vec![c(4.0), c(9.0)]));
        let r = inv_sqrt_psd(&s).unwrap();
        assert!((r[(0, 0)] - c(0.5)).norm() < 1e-14);
        assert!((r[(1, 1)] - c(1.0 / 3.0)).norm() < 1e-14);
        assert!(r[(0, 1)].norm() < 1e-14);
        let id = inv_sqrt_psd(&CMatrix::identity(3, 3)).unwrap();
        assert!((id - CMatrix::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn inverse_sqrt_rejects_indefinite() {
        let s = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1.0)]));
        assert!(matches!(
            inv_sqrt_psd(&s),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn geneig_trivial_cases() {
        let h = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(-1.0)]));
        let r = canonical_geneig(&h, &CMatrix::identity(2, 2), 1e-8).unwrap();
        assert_eq!(r.energies, vec![-1.0, 3.0]);
        let h1 = CMatrix::from_element(1, 1, c(3.0));
        let s1 = CMatrix::from_element(1, 1, c(2.0));
        let r1 = canonical_geneig(&h1, &s1, 1e-8).unwrap();
        assert!((r1.energies[0] - 1.5).abs() < 1e-14);
    }

    #[test]
    fn geneig_empty_space() {
        let z = CMatrix::zeros(2, 2);
        assert!(matches!(
            canonical_geneig(&z, &z, 1e-8),
            Err(Error::EmptyRetainedSpace)
        ));
    }
}
