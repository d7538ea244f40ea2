use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{cond2, hermitian_part, hermiticity_defect, identity, inverse, is_finite, op_norm};
use super::{CMat, CVec};
use crate::{Error, Result, Tolerances};

/// Eigenvalues with paired right/left (biorthogonal) eigenvectors.
///
/// Columns of `right` are the eigenvectors `eₙ`, columns of `left` the duals
/// `e*ₙ` with `⟨e*ₙ, eₘ⟩ = δₙₘ`. Right eigenvectors are unit-norm with their
/// largest-modulus entry real and positive; the duals carry the inverse scale.
#[derive(Debug, Clone, PartialEq)]
pub struct EigSystem {
    pub eigenvalues: Vec<Complex64>,
    pub right: CMat,
    pub left: CMat,
    /// `max ‖Aeₙ − λₙeₙ‖ / ‖A‖`
    pub residual: f64,
    /// Condition number of the right-eigenvector matrix.
    pub frame_condition: f64,
}

impl EigSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Biorthogonal system from labels and a right frame (columns `eₙ`), taken as given.
    pub fn from_parts(eigenvalues: Vec<Complex64>, right: CMat) -> Result<EigSystem> {
        let d = right.nrows();
        if right.ncols() != d || eigenvalues.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: eigenvalues.len() });
        }
        let left = inverse(&right)?.adjoint();
        let frame_condition = cond2(&right);
        Ok(EigSystem { eigenvalues, right, left, residual: 0.0, frame_condition })
    }

    pub fn right_vec(&self, n: usize) -> CVec {
        self.right.column(n).into_owned()
    }

    pub fn left_vec(&self, n: usize) -> CVec {
        self.left.column(n).into_owned()
    }

    /// Rank-one spectral projector `|eₙ⟩⟨e*ₙ|`.
    pub fn projector(&self, n: usize) -> CMat {
        self.right.column(n) * self.left.column(n).adjoint()
    }

    /// `Σ λₙ |eₙ⟩⟨e*ₙ|`
    pub fn reconstruct(&self) -> CMat {
        self.apply(|z| z)
    }

    /// Finite-dimensional functional calculus `Σ f(λₙ) |eₙ⟩⟨e*ₙ|`.
    pub fn apply<F: Fn(Complex64) -> Complex64>(&self, f: F) -> CMat {
        let d = self.dim();
        let mut scaled = self.right.clone();
        for n in 0..d {
            let fz = f(self.eigenvalues[n]);
            for i in 0..d {
                scaled[(i, n)] *= fz;
            }
        }
        scaled * self.left.adjoint()
    }

    /// `max |⟨e*ₙ, eₘ⟩ − δₙₘ|`
    pub fn biorthogonality_defect(&self) -> f64 {
        let g = self.left.adjoint() * &self.right;
        (g - identity(self.dim())).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖Σ|eₙ⟩⟨e*ₙ| − I‖₂`
    pub fn completeness_defect(&self) -> f64 {
        op_norm(&(&self.right * self.left.adjoint() - identity(self.dim())))
    }

    /// Rescales `eₙ → cₙeₙ`, `e*ₙ → e*ₙ / c̄ₙ`; the projectors are unchanged.
    pub fn rescaled(&self, scalars: &[Complex64]) -> Result<EigSystem> {
        let d = self.dim();
        if scalars.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: scalars.len() });
        }
        if scalars.iter().any(|s| s.norm() == 0.0 || !s.norm().is_finite()) {
            return Err(Error::DomainError("rescaling factors must be finite and nonzero".into()));
        }
        let mut out = self.clone();
        for (n, s) in scalars.iter().enumerate() {
            for i in 0..d {
                out.right[(i, n)] *= *s;
                out.left[(i, n)] /= s.conj();
            }
        }
        out.frame_condition = cond2(&out.right);
        Ok(out)
    }
}

/// Complex Schur decomposition `A = Z T Z†` with `T` upper triangular.
pub fn schur(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
    }
    if !is_finite(a) {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let (mut h, mut z) = hessenberg(a);
    shifted_qr(&mut h, &mut z)?;
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok((z, h))
}

fn hessenberg(a: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let mut h = a.clone();
    let mut q = identity(n);
    if n < 3 {
        return (h, q);
    }
    for k in 0..n - 2 {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x[0] / x[0].norm() };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // rows: H ← (I − 2vv†) H
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for (t, vi) in v.iter().enumerate() {
                s += vi.conj() * h[(k + 1 + t, j)];
            }
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= *vi * s * 2.0;
            }
        }
        // columns: H ← H (I − 2vv†), Q ← Q (I − 2vv†)
        for m in [&mut h, &mut q] {
            for i in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for (t, vi) in v.iter().enumerate() {
                    s += m[(i, k + 1 + t)] * vi;
                }
                for (t, vi) in v.iter().enumerate() {
                    m[(i, k + 1 + t)] -= s * vi.conj() * 2.0;
                }
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
    (h, q)
}

/// Givens pair `(c, s)` with `c` real such that `[[c, s], [−s̄, c]]·(a, b)ᵀ = (r, 0)ᵀ`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let r = (an * an + b.norm_sqr()).sqrt();
    if r == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = an / r;
    let s = (a / an) * b.conj() / r;
    (c, s)
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr_half = (a + d) * 0.5;
    let det = a * d - b * c;
    let disc = (tr_half * tr_half - det).sqrt();
    let l1 = tr_half + disc;
    let l2 = tr_half - disc;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

fn shifted_qr(h: &mut CMat, z: &mut CMat) -> Result<()> {
    let n = h.nrows();
    if n <= 1 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let hnorm = h.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let small = (hnorm * eps).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n.max(4);

    while hi > 0 {
        // locate the active unreduced block [lo, hi]
        let mut lo = 0;
        for k in (1..=hi).rev() {
            let sub = h[(k, k - 1)].norm();
            let diag = h[(k, k)].norm() + h[(k - 1, k - 1)].norm();
            if sub <= eps * diag || sub <= small {
                h[(k, k - 1)] = Complex64::new(0.0, 0.0);
                lo = k;
                break;
            }
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NumericalFailure("QR iteration did not converge".into()));
        }
        let mu = if iter % 11 == 10 {
            // exceptional shift
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        for k in lo..=hi {
            h[(k, k)] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..n {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = x * c + s * y;
                h[(k + 1, j)] = -s.conj() * x + y * c;
            }
            h[(k + 1, k)] = Complex64::new(0.0, 0.0);
            rots.push((k, c, s));
        }
        for &(k, c, s) in &rots {
            let rmax = (k + 1).min(hi);
            for i in 0..=rmax {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            for i in 0..n {
                let x = z[(i, k)];
                let y = z[(i, k + 1)];
                z[(i, k)] = x * c + y * s.conj();
                z[(i, k + 1)] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[(k, k)] += mu;
        }
    }
    Ok(())
}

/// Eigenvectors of an upper-triangular matrix, one per column.
fn triangular_eigenvectors(t: &CMat) -> CMat {
    let n = t.nrows();
    let tnorm = t.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let smin = (tnorm * f64::EPSILON).max(f64::MIN_POSITIVE);
    let mut x = CMat::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        col[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * col[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            col[i] = -s / denom;
            let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if big > 1e150 {
                for z in col.iter_mut() {
                    *z /= big;
                }
            }
        }
        for i in 0..n {
            x[(i, k)] = col[i];
        }
    }
    x
}

/// Unit 2-norm with the largest-modulus entry real and positive.
pub(crate) fn normalize_phase(v: &mut CVec) {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return;
    }
    v.unscale_mut(norm);
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|z| z.norm() >= max * (1.0 - 1e-12))
        .unwrap_or(0);
    let p = v[pivot];
    let phase = p.conj() / p.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
    v[pivot] = Complex64::new(v[pivot].norm(), 0.0);
}

/// Permutation sorting a spectrum ascending by (Re, Im); real parts within a
/// relative `1e-9` of each other are treated as tied.
pub fn sort_spectrum(values: &[Complex64]) -> Vec<usize> {
    let scale = values.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tie = 1e-9 * scale;
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(a.cmp(&b)));
    let mut out = Vec::with_capacity(idx.len());
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && values[idx[end]].re - values[idx[end - 1]].re <= tie {
            end += 1;
        }
        let mut group = idx[start..end].to_vec();
        group.sort_by(|&a, &b| values[a].im.total_cmp(&values[b].im).then(a.cmp(&b)));
        out.extend(group);
        start = end;
    }
    out
}

/// Eigenvalues only, sorted by (Re, Im); never fails on defective input.
pub fn eigenvalues(a: &CMat) -> Result<Vec<Complex64>> {
    let (_, t) = schur(a)?;
    let raw: Vec<Complex64> = (0..t.nrows()).map(|i| t[(i, i)]).collect();
    Ok(sort_spectrum(&raw).into_iter().map(|i| raw[i]).collect())
}

/// General eigendecomposition with default tolerances and residual bound `tol`.
pub fn eig_general(a: &CMat, tol: f64) -> Result<EigSystem> {
    let tols = Tolerances { residual: tol, ..Tolerances::default() };
    eig_general_with(a, &tols)
}

pub fn eig_general_with(a: &CMat, tols: &Tolerances) -> Result<EigSystem> {
    if !(tols.residual > 0.0) {
        return Err(Error::DomainError("tolerance must be positive".into()));
    }
    let n = a.nrows();
    if n == 0 {
        return Err(Error::DomainError("empty matrix".into()));
    }
    let (z, t) = schur(a)?;
    let x = triangular_eigenvectors(&t);
    let v_raw = z * x;
    let raw: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let order = sort_spectrum(&raw);

    let mut right = CMat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = v_raw.column(src).into_owned();
        normalize_phase(&mut v);
        right.set_column(col, &v);
        eigenvalues.push(raw[src]);
    }
    if !is_finite(&right) {
        return Err(Error::NonDiagonalizable { kappa: f64::INFINITY, kappa_max: tols.kappa_max });
    }
    let kappa = cond2(&right);
    if !(kappa <= tols.kappa_max) {
        return Err(Error::NonDiagonalizable { kappa, kappa_max: tols.kappa_max });
    }
    let left = inverse(&right)?.adjoint();

    let anorm = op_norm(a);
    let scale = if anorm > 0.0 { anorm } else { 1.0 };
    let residual = (0..n)
        .map(|k| (a * right.column(k) - right.column(k) * eigenvalues[k]).norm() / scale)
        .fold(0.0, f64::max);
    if residual > tols.residual {
        return Err(Error::NumericalFailure(format!(
            "eigenpair residual {residual:.3e} exceeds {:.1e}",
            tols.residual
        )));
    }
    Ok(EigSystem { eigenvalues, right, left, residual, frame_condition: kappa })
}

/// Dual family `e*ₙ` with `⟨e*ₙ, eₘ⟩ = δₙₘ`: conjugated rows of the inverse frame.
pub fn dual_basis(right: &[CVec]) -> Result<Vec<CVec>> {
    let d = right.len();
    if d == 0 {
        return Err(Error::DomainError("empty frame".into()));
    }
    for v in right {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
    }
    let frame = CMat::from_columns(right);
    let dual = inverse(&frame)?.adjoint();
    Ok((0..d).map(|n| dual.column(n).into_owned()).collect())
}

/// Hermitian eigendecomposition: real ascending eigenvalues, orthonormal
/// eigenvectors, `left == right`.
pub fn herm_eig(hm: &CMat, tol_herm: f64) -> Result<EigSystem> {
    let n = hm.nrows();
    if n == 0 || n != hm.ncols() {
        return Err(Error::DimensionMismatch { expected: n, found: hm.ncols() });
    }
    if !is_finite(hm) {
        return Err(Error::NumericalFailure("matrix has non-finite entries".into()));
    }
    let norm = op_norm(hm);
    let defect = hermiticity_defect(hm);
    if defect > tol_herm * norm.max(f64::MIN_POSITIVE) && defect > 0.0 {
        return Err(Error::NotHermitian(if norm > 0.0 { defect / norm } else { defect }));
    }
    let sym = hermitian_part(hm);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::NumericalFailure("Hermitian eigensolver did not converge".into()))?;
    let vals: Vec<Complex64> = eig.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let order = sort_spectrum(&vals);
    let mut right = CMat::zeros(n, n);
    let mut eigenvalues = Vec::with_capacity(n);
    for (col, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        normalize_phase(&mut v);
        right.set_column(col, &v);
        eigenvalues.push(vals[src]);
    }
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let residual = (0..n)
        .map(|k| (hm * right.column(k) - right.column(k) * eigenvalues[k]).norm() / scale)
        .fold(0.0, f64::max);
    Ok(EigSystem {
        eigenvalues,
        left: right.clone(),
        right,
        residual,
        frame_condition: 1.0,
    })
}

/// `(G^{1/2}, G^{-1/2})` for Hermitian positive-definite `G`.
///
/// Fails with `NotPositiveDefinite` when the smallest eigenvalue is not above
/// `tol_pd · max(1, λ_max)`.
pub fn herm_sqrt(g: &CMat, tol_pd: f64) -> Result<(CMat, CMat)> {
    let sys = herm_eig(g, 1e-9)?;
    let lmin = sys.eigenvalues.first().map_or(0.0, |z| z.re);
    let lmax = sys.eigenvalues.last().map_or(0.0, |z| z.re);
    if !(lmin > tol_pd * lmax.max(1.0)) {
        return Err(Error::NotPositiveDefinite(lmin));
    }
    let s = hermitian_part(&sys.apply(|z| Complex64::new(z.re.sqrt(), 0.0)));
    let sinv = hermitian_part(&sys.apply(|z| Complex64::new(1.0 / z.re.sqrt(), 0.0)));
    Ok((s, sinv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkit::{c, cr, from_rows};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMat {
        CMat::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn schur_is_unitary_triangular_factorization() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [1, 2, 3, 5, 9, 16, 40] {
            let a = random_matrix(&mut rng, d);
            let (z, t) = schur(&a).unwrap();
            assert!(op_norm(&(z.adjoint() * &z - identity(d))) < 1e-13 * d as f64);
            assert!(op_norm(&(&z * &t * z.adjoint() - &a)) < 1e-13 * d as f64 * op_norm(&a));
            for j in 0..d {
                for i in j + 1..d {
                    assert_eq!(t[(i, j)], cr(0.0));
                }
            }
        }
    }

    #[test]
    fn random_matrices_decompose_biorthogonally() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..60 {
            let d = 1 + trial % 12;
            let a = random_matrix(&mut rng, d);
            let sys = eig_general(&a, 1e-10).unwrap();
            assert!(sys.biorthogonality_defect() < 1e-10 * sys.frame_condition);
            assert!(sys.completeness_defect() < 1e-10 * sys.frame_condition);
            assert!(op_norm(&(sys.reconstruct() - &a)) < 1e-11 * sys.frame_condition);
        }
    }

    #[test]
    fn non_normal_triangular_eigenpairs() {
        let a = from_rows(&[&[cr(1.0), cr(3.0)], &[cr(0.0), c(-0.5, 0.2)]]);
        let sys = eig_general(&a, 1e-12).unwrap();
        assert_eq!(sys.eigenvalues, vec![c(-0.5, 0.2), cr(1.0)]);
        // e for lambda = 1 is (1, 0); its dual is (1, -3/(1.5-0.2i))^* direction
        assert!((sys.right_vec(1) - crate::matkit::cvec(&[cr(1.0), cr(0.0)])).norm() < 1e-15);
        let l = sys.left_vec(1);
        assert!((l[0] - cr(1.0)).norm() < 1e-14);
        assert!((l[1] - (cr(3.0) / c(1.5, -0.2)).conj()).norm() < 1e-14);
    }

    #[test]
    fn jordan_block_is_rejected() {
        let a = from_rows(&[&[cr(1.0), cr(1.0)], &[cr(0.0), cr(1.0)]]);
        assert!(matches!(eig_general(&a, 1e-10), Err(Error::NonDiagonalizable { .. })));
        assert_eq!(eigenvalues(&a).unwrap(), vec![cr(1.0), cr(1.0)]);
    }

    #[test]
    fn near_exceptional_point_respects_kappa_cap() {
        // [[1, 1], [eps, 1]] has kappa ~ 1/sqrt(eps)
        let a = from_rows(&[&[cr(1.0), cr(1.0)], &[cr(1e-6), cr(1.0)]]);
        let sys = eig_general(&a, 1e-10).unwrap();
        assert!(sys.frame_condition > 1e2 && sys.frame_condition < 1e4);
        let tight = Tolerances { kappa_max: 10.0, ..Tolerances::default() };
        assert!(matches!(eig_general_with(&a, &tight), Err(Error::NonDiagonalizable { .. })));
    }

    #[test]
    fn phase_convention_largest_entry_real_positive() {
        let a = from_rows(&[&[cr(0.0), c(0.0, -2.0)], &[c(0.0, 0.5), cr(0.0)]]);
        let sys = eig_general(&a, 1e-12).unwrap();
        for n in 0..2 {
            let v = sys.right_vec(n);
            assert!((v.norm() - 1.0).abs() < 1e-15);
            let k = if v[0].norm() >= v[1].norm() * (1.0 - 1e-12) { 0 } else { 1 };
            assert_eq!(v[k].im, 0.0);
            assert!(v[k].re > 0.0);
        }
    }

    #[test]
    fn spectrum_sort_groups_near_equal_real_parts() {
        let v = [c(1.0, 2.0), c(1.0 + 1e-12, -1.0), c(-3.0, 5.0), c(1.0, 0.0)];
        assert_eq!(sort_spectrum(&v), vec![2, 1, 3, 0]);
    }

    #[test]
    fn herm_eig_orders_and_orthonormalizes() {
        let h = from_rows(&[&[cr(2.0), c(0.0, 1.0)], &[c(0.0, -1.0), cr(2.0)]]);
        let sys = herm_eig(&h, 1e-12).unwrap();
        assert_eq!(sys.eigenvalues.len(), 2);
        assert!((sys.eigenvalues[0] - cr(1.0)).norm() < 1e-14);
        assert!((sys.eigenvalues[1] - cr(3.0)).norm() < 1e-14);
        assert!(op_norm(&(sys.right.adjoint() * &sys.right - identity(2))) < 1e-14);
        assert_eq!(sys.right, sys.left);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = from_rows(&[&[cr(1.0), cr(2.0)], &[cr(0.0), cr(1.0)]]);
        assert!(matches!(herm_eig(&a, 1e-9), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn herm_sqrt_matches_two_by_two_closed_form() {
        // sqrt(G) = (G + sqrt(det) I) / sqrt(tr + 2 sqrt(det)) for 2x2 positive G
        let g = from_rows(&[&[cr(3.0), c(1.0, -0.5)], &[c(1.0, 0.5), cr(2.0)]]);
        let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).re;
        let tr = (g[(0, 0)] + g[(1, 1)]).re;
        let oracle = (&g + identity(2) * cr(det.sqrt())) / cr((tr + 2.0 * det.sqrt()).sqrt());
        let (s, sinv) = herm_sqrt(&g, 1e-12).unwrap();
        assert!(op_norm(&(&s - oracle)) < 1e-14);
        assert!(op_norm(&(&s * &sinv - identity(2))) < 1e-14);
    }

    #[test]
    fn herm_sqrt_rejects_indefinite() {
        let g = from_rows(&[&[cr(1.0), cr(0.0)], &[cr(0.0), cr(-1e-3)]]);
        assert!(matches!(herm_sqrt(&g, 1e-12), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn dual_basis_is_biorthogonal() {
        let e = vec![
            crate::matkit::cvec(&[cr(1.0), cr(0.0)]),
            crate::matkit::cvec(&[c(1.0, 1.0), cr(2.0)]),
        ];
        let dual = dual_basis(&e).unwrap();
        for n in 0..2 {
            for m in 0..2 {
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((dual[n].dotc(&e[m]) - cr(want)).norm() < 1e-15);
            }
        }
        let parallel = vec![e[0].clone(), e[0].clone()];
        assert!(matches!(dual_basis(&parallel), Err(Error::SingularFrame(_))));
    }

    proptest! {
        #[test]
        fn rescaling_keeps_projectors(seed in 0u64..1000, d in 1usize..7) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, d);
            let sys = eig_general(&a, 1e-9).unwrap();
            let scalars: Vec<Complex64> = (0..d)
                .map(|_| Complex64::from_polar(rng.random_range(0.2..3.0), rng.random_range(-3.0..3.0)))
                .collect();
            let scaled = sys.rescaled(&scalars).unwrap();
            for n in 0..d {
                let diff = op_norm(&(sys.projector(n) - scaled.projector(n)));
                prop_assert!(diff < 1e-12 * sys.frame_condition);
            }
        }

        #[test]
        fn eigen_residual_small(seed in 0u64..1000, d in 1usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, d);
            let sys = eig_general(&a, 1e-10).unwrap();
            prop_assert!(sys.residual < 1e-12);
        }
    }
}
