//! Dense Hermitian operators on multipartite Hilbert spaces.
//!
//! An operator carries its list of local dimensions `dims`; the matrix order
//! is the product of the list. Basis indices are row-major over `dims`: the
//! first subsystem is the most significant digit, exactly as produced by the
//! Kronecker product `a ⊗ b`.
//!
//! Worked example for `dims = [2, 3]`: the global index `i` of the basis
//! vector `|a⟩|b⟩` is `i = 3·a + b`, so index 4 is `|1⟩|1⟩` and index 2 is
//! `|0⟩|2⟩`. Tracing out subsystem 1 of an operator `m` gives the 2×2 block
//! sum `out[a][a'] = Σ_b m[3a + b][3a' + b]`, and transposing subsystem 1
//! maps `m[3a + b][3a' + b']` to position `[3a + b'][3a' + b]`.

use std::fmt;
use std::ops::Deref;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Asymmetry below this is treated as round-off and symmetrised away.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on eigenvalues and trace for [`PartitionedState`].
pub const STATE_TOL: f64 = 1e-9;

#[derive(Clone, PartialEq)]
pub struct HermitianOp {
    dims: Vec<usize>,
    mat: CMatrix,
}

impl fmt::Debug for HermitianOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianOp")
            .field("dims", &self.dims)
            .field("mat", &self.mat)
            .finish()
    }
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::invalid("dimension list is empty"));
    }
    if dims.contains(&0) {
        return Err(Error::invalid(format!("zero local dimension in {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Largest entrywise modulus of `m - m†`.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn symmetrise(m: &mut CMatrix) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in i + 1..n {
            let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
}

/// Row-major digits of a global index.
pub(crate) fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (k, &d) in dims.iter().enumerate().rev() {
        out[k] = index % d;
        index /= d;
    }
}

pub(crate) fn undigits(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

fn check_subset(set: &[usize], n: usize, what: &str) -> Result<Vec<bool>> {
    if set.is_empty() {
        return Err(Error::invalid(format!("{what}: empty subsystem set")));
    }
    let mut mask = vec![false; n];
    for &k in set {
        if k >= n {
            return Err(Error::invalid(format!(
                "{what}: subsystem {k} out of range for {n} subsystems"
            )));
        }
        mask[k] = true;
    }
    Ok(mask)
}

impl HermitianOp {
    /// Validates dims against the matrix order. Asymmetry up to
    /// [`HERMITIAN_TOL`] is symmetrised; anything larger is rejected.
    pub fn new(dims: Vec<usize>, mut mat: CMatrix) -> Result<Self> {
        let order = check_dims(&dims)?;
        if mat.nrows() != order || mat.ncols() != order {
            return Err(Error::invalid(format!(
                "matrix is {}x{} but dims {dims:?} require order {order}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let asym = asymmetry(&mat);
        if asym > HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "matrix is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        symmetrise(&mut mat);
        Ok(Self { dims, mat })
    }

    /// For results of operations that preserve Hermiticity exactly.
    pub(crate) fn from_hermitian(dims: Vec<usize>, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), dims.iter().product::<usize>());
        Self { dims, mat }
    }

    /// Symmetrises unconditionally. Used for solver output, whose asymmetry is
    /// bounded by the basis expansion rather than by a tolerance check.
    pub(crate) fn from_nearly_hermitian(dims: Vec<usize>, mut mat: CMatrix) -> Self {
        symmetrise(&mut mat);
        Self { dims, mat }
    }

    pub fn from_real(dims: Vec<usize>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("ragged real matrix"));
        }
        let mat = CMatrix::from_fn(n, n, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(dims, mat)
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self::from_hermitian(dims, CMatrix::zeros(n, n))
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self::from_hermitian(dims, CMatrix::identity(n, n))
    }

    /// `1/d`, the maximally mixed state.
    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self::identity(dims).scale(1.0 / n as f64)
    }

    pub fn diagonal(dims: Vec<usize>, diag: &[f64]) -> Result<Self> {
        let n = check_dims(&dims)?;
        if diag.len() != n {
            return Err(Error::invalid("diagonal length does not match dims"));
        }
        let mut mat = CMatrix::zeros(n, n);
        for (i, &x) in diag.iter().enumerate() {
            mat[(i, i)] = Complex64::new(x, 0.0);
        }
        Ok(Self::from_hermitian(dims, mat))
    }

    /// `|v⟩⟨v|` for the normalised vector `v`.
    pub fn projector(dims: Vec<usize>, v: &CVector) -> Result<Self> {
        let n = check_dims(&dims)?;
        if v.len() != n {
            return Err(Error::invalid("vector length does not match dims"));
        }
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::DegenerateInput("zero vector".into()));
        }
        let u = v.unscale(norm);
        let mat = &u * u.adjoint();
        Ok(Self::from_nearly_hermitian(dims, mat))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.mat.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.order()).map(|i| self.mat[(i, i)].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn inner(&self, other: &HermitianOp) -> f64 {
        assert_eq!(self.order(), other.order(), "order mismatch in inner product");
        let n = self.order();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.mat[(i, j)];
                let b = other.mat[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_hermitian(self.dims.clone(), self.mat.map(|z| z * s))
    }

    fn check_same(&self, other: &HermitianOp) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "dims mismatch: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &HermitianOp) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_hermitian(self.dims.clone(), &self.mat + &other.mat))
    }

    pub fn sub(&self, other: &HermitianOp) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self::from_hermitian(self.dims.clone(), &self.mat - &other.mat))
    }

    /// `a·self + b·other`.
    pub fn lincomb(&self, a: f64, other: &HermitianOp, b: f64) -> Result<Self> {
        self.check_same(other)?;
        let mat = self.mat.map(|z| z * a) + other.mat.map(|z| z * b);
        Ok(Self::from_hermitian(self.dims.clone(), mat))
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HermitianOp) -> f64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Same matrix, new subsystem split (orders must agree).
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        let n = check_dims(&dims)?;
        if n != self.order() {
            return Err(Error::invalid(format!(
                "dims {dims:?} do not match order {}",
                self.order()
            )));
        }
        Ok(Self::from_hermitian(dims, self.mat.clone()))
    }

    pub fn kron(&self, other: &HermitianOp) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_hermitian(dims, self.mat.kronecker(&other.mat))
    }

    /// Traces out every subsystem not listed in `keep`. The result keeps the
    /// listed subsystems in their original order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.num_subsystems();
        let mask = check_subset(keep, n, "partial_trace")?;
        let kept: Vec<usize> = (0..n).filter(|&k| mask[k]).collect();
        let traced: Vec<usize> = (0..n).filter(|&k| !mask[k]).collect();
        let kdims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        let tdims: Vec<usize> = traced.iter().map(|&k| self.dims[k]).collect();
        let kn: usize = kdims.iter().product();
        let tn: usize = tdims.iter().product();

        // Global index of (kept digits, traced digits).
        let mut full = vec![0usize; n];
        let mut kd = vec![0usize; kept.len()];
        let mut td = vec![0usize; traced.len()];
        let mut index = vec![0usize; kn * tn];
        for ki in 0..kn {
            digits(ki, &kdims, &mut kd);
            for ti in 0..tn {
                digits(ti, &tdims, &mut td);
                for (p, &k) in kept.iter().enumerate() {
                    full[k] = kd[p];
                }
                for (p, &k) in traced.iter().enumerate() {
                    full[k] = td[p];
                }
                index[ki * tn + ti] = undigits(&full, &self.dims);
            }
        }
        let mut out = CMatrix::zeros(kn, kn);
        for i in 0..kn {
            for j in 0..kn {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in 0..tn {
                    acc += self.mat[(index[i * tn + t], index[j * tn + t])];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(Self::from_hermitian(kdims, out))
    }

    /// Transposes the listed subsystems.
    pub fn partial_transpose(&self, flip: &[usize]) -> Result<Self> {
        let n = self.num_subsystems();
        let mask = check_subset(flip, n, "partial_transpose")?;
        let order = self.order();
        let mut di = vec![0usize; n];
        let mut dj = vec![0usize; n];
        let mut out = CMatrix::zeros(order, order);
        for i in 0..order {
            digits(i, &self.dims, &mut di);
            for j in 0..order {
                digits(j, &self.dims, &mut dj);
                let mut si = di.clone();
                let mut sj = dj.clone();
                for k in 0..n {
                    if mask[k] {
                        si[k] = dj[k];
                        sj[k] = di[k];
                    }
                }
                out[(undigits(&si, &self.dims), undigits(&sj, &self.dims))] = self.mat[(i, j)];
            }
        }
        Ok(Self::from_hermitian(self.dims.clone(), out))
    }

    /// Reorders subsystems: subsystem `k` of the result is subsystem
    /// `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_subsystems();
        if perm.len() != n {
            return Err(Error::invalid(format!(
                "permutation {perm:?} has wrong length for {n} subsystems"
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::invalid(format!("{perm:?} is not a permutation")));
            }
            seen[p] = true;
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let order = self.order();
        let mut old_digits = vec![0usize; n];
        let mut new_digits = vec![0usize; n];
        let map: Vec<usize> = (0..order)
            .map(|i| {
                digits(i, &self.dims, &mut old_digits);
                for k in 0..n {
                    new_digits[k] = old_digits[perm[k]];
                }
                undigits(&new_digits, &new_dims)
            })
            .collect();
        let mut out = CMatrix::zeros(order, order);
        for i in 0..order {
            for j in 0..order {
                out[(map[i], map[j])] = self.mat[(i, j)];
            }
        }
        Ok(Self::from_hermitian(new_dims, out))
    }

    /// Swaps two subsystems.
    pub fn swap(&self, a: usize, b: usize) -> Result<Self> {
        let mut perm: Vec<usize> = (0..self.num_subsystems()).collect();
        if a >= perm.len() || b >= perm.len() {
            return Err(Error::invalid("swap index out of range"));
        }
        perm.swap(a, b);
        self.permute(&perm)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigenvalues (ascending) with the matching eigenvectors as columns.
    pub fn eigh(&self) -> (Vec<f64>, CMatrix) {
        let eig = self.mat.clone().symmetric_eigen();
        let mut idx: Vec<usize> = (0..self.order()).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vecs = CMatrix::from_fn(self.order(), self.order(), |i, j| eig.eigenvectors[(i, idx[j])]);
        (vals, vecs)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues().last().expect("nonempty spectrum")
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.inner(self)
    }

    /// Conjugation `U · self · U†` by a unitary of matching order.
    pub fn conjugate(&self, u: &CMatrix) -> Self {
        let mat = u * &self.mat * u.adjoint();
        Self::from_nearly_hermitian(self.dims.clone(), mat)
    }
}

/// A density matrix: PSD with unit trace, both within [`STATE_TOL`].
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedState {
    op: HermitianOp,
}

impl PartitionedState {
    pub fn new(op: HermitianOp) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::invalid(format!("trace is {tr}, expected 1")));
        }
        let min = op.min_eigenvalue();
        if min < -STATE_TOL {
            return Err(Error::invalid(format!(
                "operator is not positive semidefinite (min eigenvalue {min:.3e})"
            )));
        }
        Ok(Self { op })
    }

    /// Rescales a PSD operator to unit trace.
    pub fn normalised(op: HermitianOp) -> Result<Self> {
        let tr = op.trace();
        if tr <= 1e-300 {
            return Err(Error::DegenerateInput("operator has zero trace".into()));
        }
        Self::new(op.scale(1.0 / tr))
    }

    pub fn op(&self) -> &HermitianOp {
        &self.op
    }

    pub fn into_op(self) -> HermitianOp {
        self.op
    }

    pub fn total_dim(&self) -> usize {
        self.op.order()
    }
}

impl Deref for PartitionedState {
    type Target = HermitianOp;

    fn deref(&self) -> &HermitianOp {
        &self.op
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> HermitianOp {
        let mut v = CVector::zeros(4);
        v[0] = c(1.0, 0.0);
        v[3] = c(1.0, 0.0);
        HermitianOp::projector(vec![2, 2], &v).unwrap()
    }

    fn herm_from_seed(dims: Vec<usize>, vals: &[f64]) -> HermitianOp {
        let n: usize = dims.iter().product();
        let mut m = CMatrix::zeros(n, n);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let re = vals[k % vals.len()];
                let im = if i == j { 0.0 } else { vals[(k + 7) % vals.len()] };
                m[(i, j)] = c(re, im);
                m[(j, i)] = c(re, -im);
                k += 1;
            }
        }
        HermitianOp::new(dims, m).unwrap()
    }

    #[test]
    fn kron_identity_and_projectors() {
        let i2 = HermitianOp::identity(vec![2]);
        let i4 = i2.kron(&i2);
        assert_eq!(i4.dims(), &[2, 2]);
        assert_eq!(i4.matrix(), HermitianOp::identity(vec![2, 2]).matrix());

        let p0 = HermitianOp::diagonal(vec![2], &[1.0, 0.0]).unwrap();
        let p1 = HermitianOp::diagonal(vec![2], &[0.0, 1.0]).unwrap();
        let expect = HermitianOp::diagonal(vec![2, 2], &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p0.kron(&p1), expect);
    }

    #[test]
    fn partial_trace_examples() {
        let rho = herm_from_seed(vec![2], &[0.3, 0.1, 0.7]);
        let tau = herm_from_seed(vec![3], &[0.5, -0.2, 0.4, 0.9]);
        let pt = rho.kron(&tau).partial_trace(&[0]).unwrap();
        let expect = rho.scale(tau.trace());
        assert!(pt.max_abs_diff(&expect) < 1e-12);

        let marg = bell().partial_trace(&[0]).unwrap();
        assert!(marg.max_abs_diff(&HermitianOp::maximally_mixed(vec![2])) < 1e-15);

        assert!(matches!(bell().partial_trace(&[]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn partial_trace_worked_2x3_example() {
        // index 3a + b, as in the module docs
        let mut m = CMatrix::zeros(6, 6);
        m[(4, 4)] = c(1.0, 0.0); // |1⟩|1⟩
        m[(2, 2)] = c(2.0, 0.0); // |0⟩|2⟩
        m[(1, 4)] = c(0.0, 0.5); // |0⟩|1⟩⟨1|⟨1|
        m[(4, 1)] = c(0.0, -0.5);
        let op = HermitianOp::new(vec![2, 3], m).unwrap();
        let a = op.partial_trace(&[0]).unwrap();
        assert_eq!(a.entry(0, 0), c(2.0, 0.0));
        assert_eq!(a.entry(1, 1), c(1.0, 0.0));
        assert_eq!(a.entry(0, 1), c(0.0, 0.5));
        let pt = op.partial_transpose(&[1]).unwrap();
        // [3a+b][3a'+b'] -> [3a+b'][3a'+b] with a=0,b=1,a'=1,b'=1: unchanged
        assert_eq!(pt.entry(1, 4), c(0.0, 0.5));
        let pta = op.partial_transpose(&[0]).unwrap();
        assert_eq!(pta.entry(4, 1), c(0.0, 0.5));
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = bell().partial_transpose(&[1]).unwrap();
        let ev = pt.eigenvalues();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-12);
        assert!(matches!(bell().partial_transpose(&[2]), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn min_eigenvalue_basics() {
        assert!((HermitianOp::identity(vec![3]).min_eigenvalue() - 1.0).abs() < 1e-14);
        let d = HermitianOp::diagonal(vec![2], &[3.0, -2.0]).unwrap();
        assert!((d.min_eigenvalue() + 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_bad_shapes() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(HermitianOp::new(vec![2], m.clone()).is_err());
        m[(1, 0)] = c(1.0 + 1e-12, 0.0);
        let op = HermitianOp::new(vec![2], m).unwrap();
        assert_eq!(op.entry(0, 1), op.entry(1, 0).conj());
        assert!(HermitianOp::new(vec![3], CMatrix::zeros(2, 2)).is_err());
        assert!(HermitianOp::new(vec![], CMatrix::zeros(1, 1)).is_err());
    }

    #[test]
    fn swap_on_product() {
        let a = herm_from_seed(vec![2], &[0.3, 0.1, 0.7]);
        let b = herm_from_seed(vec![3], &[0.5, -0.2, 0.4, 0.9]);
        let swapped = a.kron(&b).permute(&[1, 0]).unwrap();
        assert!(swapped.max_abs_diff(&b.kron(&a)) < 1e-15);
        assert_eq!(swapped.dims(), &[3, 2]);
        let ab = a.kron(&b);
        assert_eq!(ab.permute(&[0, 1]).unwrap(), ab);
        assert!(ab.permute(&[0, 0]).is_err());
        assert!(ab.permute(&[1]).is_err());
    }

    #[test]
    fn state_validation() {
        let s = PartitionedState::new(bell()).unwrap();
        assert_eq!(s.total_dim(), 4);
        assert!(PartitionedState::new(bell().scale(2.0)).is_err());
        let neg = HermitianOp::diagonal(vec![2], &[1.5, -0.5]).unwrap();
        assert!(PartitionedState::new(neg).is_err());
    }

    fn arb_herm(n: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
            let m = CMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
            (&m + m.adjoint()) * c(0.5, 0.0)
        })
    }

    proptest! {
        #[test]
        fn partial_transpose_is_involution(m in arb_herm(6), flip in 0usize..3) {
            let op = HermitianOp::new(vec![2, 3], m).unwrap();
            let set: Vec<usize> = match flip { 0 => vec![0], 1 => vec![1], _ => vec![0, 1] };
            let twice = op.partial_transpose(&set).unwrap().partial_transpose(&set).unwrap();
            prop_assert_eq!(&twice, &op);
            let once = op.partial_transpose(&set).unwrap();
            prop_assert!((once.trace() - op.trace()).abs() < 1e-12);
            prop_assert!(asymmetry(once.matrix()) < 1e-12);
        }

        #[test]
        fn partial_trace_of_kron(a in arb_herm(2), b in arb_herm(3)) {
            let a = HermitianOp::new(vec![2], a).unwrap();
            let b = HermitianOp::new(vec![3], b).unwrap();
            let ab = a.kron(&b);
            prop_assert!((ab.trace() - a.trace() * b.trace()).abs() < 1e-12);
            let back = ab.partial_trace(&[0]).unwrap();
            prop_assert!(back.max_abs_diff(&a.scale(b.trace())) < 1e-12);
            let tr = ab.partial_trace(&[1]).unwrap();
            prop_assert!((tr.trace() - ab.trace()).abs() < 1e-12);
        }

        #[test]
        fn swap_preserves_spectrum(m in arb_herm(8)) {
            let op = HermitianOp::new(vec![2, 4], m).unwrap();
            let sw = op.permute(&[1, 0]).unwrap();
            prop_assert_eq!(sw.dims(), &[4, 2]);
            for (x, y) in op.eigenvalues().iter().zip(sw.eigenvalues()) {
                prop_assert!((x - y).abs() < 1e-10);
            }
            prop_assert!((sw.trace() - op.trace()).abs() < 1e-12);
            prop_assert_eq!(&sw.permute(&[1, 0]).unwrap(), &op);
        }
    }
}
