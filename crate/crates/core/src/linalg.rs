//! Dense linear-algebra helpers: vec/unvec, ordered SVD with a fixed phase
//! convention, numerical rank, thin QR.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{CMat, CVec, Real, RMat, RVec, C};

/// Relative tolerance used for every rank decision in the crate.
pub const RANK_TOL: f64 = 1e-10;

/// Condition-number limit on the triangular factor of the analog precoder.
pub const COND_LIMIT: f64 = 1e12;

/// Column-major vectorization.
pub fn vec_c<T: Real>(m: &CMat<T>) -> CVec<T> {
    DVector::from_column_slice(m.as_slice())
}

pub fn vec_r<T: Real>(m: &RMat<T>) -> RVec<T> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec_r`].
pub fn unvec_r<T: Real>(v: &RVec<T>, rows: usize, cols: usize) -> RMat<T> {
    DMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Squared Frobenius norm.
pub fn frob2<T: Real>(m: &CMat<T>) -> T {
    m.iter()
        .fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
}

/// Phase of a complex number with the convention `arg(0) = 0`.
pub fn phase<T: Real>(z: C<T>) -> T {
    if z.re == T::zero() && z.im == T::zero() {
        T::zero()
    } else {
        z.im.atan2(z.re)
    }
}

/// Elementwise complex conjugate.
pub fn conj<T: Real>(m: &CMat<T>) -> CMat<T> {
    m.map(|z| z.conj())
}

pub fn real_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.re)
}

pub fn imag_part<T: Real>(m: &CMat<T>) -> RMat<T> {
    m.map(|z| z.im)
}

/// Lifts a real matrix to a complex one.
pub fn complexify<T: Real>(m: &RMat<T>) -> CMat<T> {
    m.map(|x| C::new(x, T::zero()))
}

/// Rotates each column so that its first significant entry is real and
/// positive. Returns the applied unit-modulus factors.
pub fn normalize_column_phases<T: Real>(m: &mut CMat<T>) -> Vec<C<T>> {
    let thresh = T::lit(RANK_TOL);
    let mut factors = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let max = col.iter().fold(T::zero(), |a, z| a.max(z.modulus()));
        let pivot = col
            .iter()
            .find(|z| z.modulus() > thresh * max)
            .copied()
            .unwrap_or_else(|| C::new(T::one(), T::zero()));
        let f = if pivot.modulus() > T::zero() {
            pivot.conj() / C::new(pivot.modulus(), T::zero())
        } else {
            C::new(T::one(), T::zero())
        };
        col.iter_mut().for_each(|z| *z *= f);
        factors.push(f);
    }
    factors
}

/// Singular value decomposition with singular values sorted in decreasing
/// order: `m = U diag(s) Vᴴ`.
#[derive(Clone, Debug)]
pub struct OrderedSvd<T: Real> {
    pub u: CMat<T>,
    pub s: Vec<T>,
    pub v: CMat<T>,
}

/// Thin SVD, singular values descending, each right singular vector rotated
/// so its first significant entry is real positive (left vectors follow).
pub fn svd<T: Real>(m: &CMat<T>) -> OrderedSvd<T> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return OrderedSvd {
            u: CMat::zeros(m.nrows(), 0),
            s: Vec::new(),
            v: CMat::zeros(m.ncols(), 0),
        };
    }
    let dec = m.clone().svd(true, true);
    let u_raw = dec.u.expect("left singular vectors requested");
    let v_raw = dec.v_t.expect("right singular vectors requested").adjoint();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        dec.singular_values[b]
            .partial_cmp(&dec.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut u = CMat::zeros(m.nrows(), k);
    let mut v = CMat::zeros(m.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        u.set_column(dst, &u_raw.column(src));
        v.set_column(dst, &v_raw.column(src));
        s.push(dec.singular_values[src]);
    }
    let factors = normalize_column_phases(&mut v);
    for (j, f) in factors.into_iter().enumerate() {
        u.column_mut(j).iter_mut().for_each(|z| *z *= f);
    }
    OrderedSvd { u, s, v }
}

/// Full right singular basis of `m` (ncols × ncols), singular values padded
/// with zeros to length `ncols`.
pub fn full_right_svd<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.ncols();
    if m.nrows() >= n {
        let d = svd(m);
        return (d.s, d.v);
    }
    let mut padded = CMat::zeros(n, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let d = svd(&padded);
    let mut s = d.s;
    for x in s.iter_mut().skip(m.nrows()) {
        *x = T::zero();
    }
    (s, d.v)
}

/// Left singular basis of a tall matrix `m` (nrows × nrows), columns ordered
/// by decreasing singular value; null-space columns come from the SVD of the
/// zero-padded square matrix. Column phases normalized.
pub fn full_left_svd<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let n = m.nrows();
    let mut padded = CMat::zeros(n, n);
    let cols = m.ncols().min(n);
    padded.view_mut((0, 0), (n, cols)).copy_from(&m.columns(0, cols));
    let d = svd(&padded);
    let mut u = d.u;
    normalize_column_phases(&mut u);
    let mut s = d.s;
    for x in s.iter_mut().skip(cols) {
        *x = T::zero();
    }
    (s, u)
}

/// Singular values, descending.
pub fn singular_values<T: Real>(m: &CMat<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<T> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Number of singular values above `tol · σ_max`; zero matrix → 0.
pub fn numerical_rank<T: Real>(m: &CMat<T>, tol: T) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&smax) if smax > T::zero() => s.iter().filter(|&&x| x > tol * smax).count(),
        _ => 0,
    }
}

/// Thin QR factorization of a tall matrix: `m = Q R`, `Q` with orthonormal
/// columns, `R` square upper triangular.
pub fn qr_thin<T: Real>(m: &CMat<T>) -> (CMat<T>, CMat<T>) {
    let qr = m.clone().qr();
    (qr.q(), qr.r())
}

/// 2-norm condition number of a square matrix (∞ when singular).
pub fn condition_number<T: Real>(m: &CMat<T>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => (hi / lo).as_f64(),
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Thin QR with the ill-conditioning guard on the triangular factor.
pub fn guarded_qr<T: Real>(m: &CMat<T>) -> Result<(CMat<T>, CMat<T>)> {
    if m.ncols() > m.nrows() {
        return Err(Error::dim(format!(
            "analog precoder is {}x{}; needs at least as many rows as columns",
            m.nrows(),
            m.ncols()
        )));
    }
    let (q, r) = qr_thin(m);
    let cond = condition_number(&r);
    if !(cond <= COND_LIMIT) {
        return Err(Error::IllConditionedAnalog {
            cond,
            limit: COND_LIMIT,
        });
    }
    Ok((q, r))
}

/// Inverse of an upper-triangular matrix.
pub fn upper_triangular_inverse<T: Real>(r: &CMat<T>) -> CMat<T> {
    let n = r.nrows();
    let mut inv = CMat::identity(n, n);
    let solved = r.solve_upper_triangular_mut(&mut inv);
    debug_assert!(solved, "triangular factor must be nonsingular");
    inv
}

/// Largest absolute entry of a real matrix.
pub fn max_abs_r<T: Real>(m: &RMat<T>) -> T {
    m.iter().fold(T::zero(), |a, &x| a.max(x.abs()))
}

/// Largest entry modulus of a complex matrix.
pub fn max_abs_c<T: Real>(m: &CMat<T>) -> T {
    m.iter().fold(T::zero(), |a, z| a.max(z.modulus()))
}

/// Hermitian eigen-decomposition with eigenvalues in decreasing order.
pub fn hermitian_eigen<T: Real>(m: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vecs = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        vals.push(eig.eigenvalues[src]);
    }
    (vals, vecs)
}

/// Real symmetric eigen-decomposition, eigenvalues decreasing.
pub fn symmetric_eigen<T: Real>(m: &RMat<T>) -> (Vec<T>, RMat<T>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut vecs = RMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
        vals.push(eig.eigenvalues[src]);
    }
    (vals, vecs)
}

/// `log₂ det(A)` for a Hermitian positive definite `A` via Cholesky.
pub fn log2_det_hpd<T: Real>(a: &CMat<T>) -> Option<T> {
    let chol = a.clone().cholesky()?;
    let l = chol.l();
    let ln_det = l
        .diagonal()
        .iter()
        .fold(T::zero(), |acc, z| acc + z.re.ln());
    Some(ln_det * T::lit(2.0) / T::lit(std::f64::consts::LN_2))
}
