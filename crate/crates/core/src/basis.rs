//! Orthonormal Hermitian basis used to vectorise operators for the solver.
//!
//! For a single subsystem of dimension `d` the `d²` elements are, in order:
//! the `d` diagonal units `E_ii`; the symmetric pairs `(E_ij + E_ji)/√2` for
//! `i < j` in row-major order; the antisymmetric pairs `i(E_ji − E_ij)/√2` in
//! the same order. A multipartite basis is the tensor product of the local
//! ones, indexed row-major over the subsystems. Coordinates are `Tr(B_k H)`.
//!
//! Because every element is a product of local elements, a product operator
//! `σ ⊗ τ` has coordinates `coords(σ)[a] · coords(τ)[b]`, and a partial
//! transpose is a sign flip on elements whose transposed factors are
//! antisymmetric.

use num_complex::Complex64;

use crate::hermitian::{digits, undigits, CMatrix, HermitianOp};

#[derive(Clone, Debug)]
struct LocalBasis {
    d: usize,
    elements: Vec<Vec<(usize, usize, Complex64)>>,
}

impl LocalBasis {
    fn new(d: usize) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elements = Vec::with_capacity(d * d);
        for i in 0..d {
            elements.push(vec![(i, i, Complex64::new(1.0, 0.0))]);
        }
        let pairs: Vec<(usize, usize)> = (0..d).flat_map(|i| (i + 1..d).map(move |j| (i, j))).collect();
        for &(i, j) in &pairs {
            elements.push(vec![(i, j, Complex64::new(s, 0.0)), (j, i, Complex64::new(s, 0.0))]);
        }
        for &(i, j) in &pairs {
            elements.push(vec![(i, j, Complex64::new(0.0, -s)), (j, i, Complex64::new(0.0, s))]);
        }
        Self { d, elements }
    }

    fn is_antisymmetric(&self, a: usize) -> bool {
        let p = self.d * (self.d - 1) / 2;
        a >= self.d + p
    }
}

#[derive(Clone, Debug)]
pub struct ProductBasis {
    dims: Vec<usize>,
    sq_dims: Vec<usize>,
    local: Vec<LocalBasis>,
    entries: Vec<Vec<(usize, usize, Complex64)>>,
}

impl ProductBasis {
    pub fn new(dims: &[usize]) -> Self {
        let local: Vec<LocalBasis> = dims.iter().map(|&d| LocalBasis::new(d)).collect();
        let sq_dims: Vec<usize> = dims.iter().map(|d| d * d).collect();
        let len: usize = sq_dims.iter().product();
        let n = dims.len();
        let mut entries = Vec::with_capacity(len);
        let mut a = vec![0usize; n];
        for k in 0..len {
            digits(k, &sq_dims, &mut a);
            let mut acc: Vec<(Vec<usize>, Vec<usize>, Complex64)> =
                vec![(Vec::new(), Vec::new(), Complex64::new(1.0, 0.0))];
            for p in 0..n {
                let mut next = Vec::with_capacity(acc.len() * 2);
                for (rows, cols, v) in &acc {
                    for &(r, c, w) in &local[p].elements[a[p]] {
                        let mut rows = rows.clone();
                        let mut cols = cols.clone();
                        rows.push(r);
                        cols.push(c);
                        next.push((rows, cols, v * w));
                    }
                }
                acc = next;
            }
            entries.push(
                acc.into_iter()
                    .map(|(r, c, v)| (undigits(&r, dims), undigits(&c, dims), v))
                    .collect(),
            );
        }
        Self {
            dims: dims.to_vec(),
            sq_dims,
            local,
            entries,
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of basis elements, `(∏ dims)²`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn order(&self) -> usize {
        self.dims.iter().product()
    }

    /// Nonzero entries `(row, col, value)` of element `k`.
    pub fn element(&self, k: usize) -> &[(usize, usize, Complex64)] {
        &self.entries[k]
    }

    /// Local element indices of global element `k`.
    pub fn local_indices(&self, k: usize) -> Vec<usize> {
        let mut a = vec![0usize; self.dims.len()];
        digits(k, &self.sq_dims, &mut a);
        a
    }

    pub fn coords(&self, op: &HermitianOp) -> Vec<f64> {
        assert_eq!(op.order(), self.order(), "operator order does not match basis");
        let m = op.matrix();
        self.entries
            .iter()
            .map(|el| {
                el.iter()
                    .map(|&(r, c, v)| {
                        let h = m[(c, r)];
                        v.re * h.re - v.im * h.im
                    })
                    .sum()
            })
            .collect()
    }

    pub fn op_from_coords(&self, coords: &[f64]) -> HermitianOp {
        assert_eq!(coords.len(), self.len());
        let n = self.order();
        let mut m = CMatrix::zeros(n, n);
        for (el, &x) in self.entries.iter().zip(coords) {
            if x == 0.0 {
                continue;
            }
            for &(r, c, v) in el {
                m[(r, c)] += v * x;
            }
        }
        HermitianOp::from_nearly_hermitian(self.dims.clone(), m)
    }

    /// Sign acquired by element `k` when the subsystems flagged in `mask`
    /// are transposed.
    pub fn transpose_sign(&self, k: usize, mask: &[bool]) -> f64 {
        let a = self.local_indices(k);
        let flips = (0..self.dims.len())
            .filter(|&p| mask[p] && self.local[p].is_antisymmetric(a[p]))
            .count();
        if flips % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `Tr(B_k)`: one for products of diagonal units, zero otherwise.
    pub fn trace_of(&self, k: usize) -> f64 {
        self.entries[k]
            .iter()
            .filter(|&&(r, c, _)| r == c)
            .map(|&(_, _, v)| v.re)
            .sum()
    }
}

/// Coordinates of the product-basis index of a full system, split into the
/// parts living on two complementary party sets.
///
/// `row(i, j)` is the global coordinate index of the product of element `i` of
/// the basis over `first` with element `j` of the basis over `second`.
#[derive(Clone, Debug)]
pub struct SplitLayout {
    first_offsets: Vec<usize>,
    second_offsets: Vec<usize>,
}

impl SplitLayout {
    /// `first` and `second` must partition `0..dims.len()`; each is read in
    /// increasing party order.
    pub fn new(dims: &[usize], first: &[usize], second: &[usize]) -> Self {
        let n = dims.len();
        let sq: Vec<usize> = dims.iter().map(|d| d * d).collect();
        let mut stride = vec![1usize; n];
        for p in (0..n.saturating_sub(1)).rev() {
            stride[p] = stride[p + 1] * sq[p + 1];
        }
        let offsets = |set: &[usize]| -> Vec<usize> {
            let local: Vec<usize> = set.iter().map(|&p| sq[p]).collect();
            let len: usize = local.iter().product();
            let mut a = vec![0usize; set.len()];
            (0..len)
                .map(|k| {
                    digits(k, &local, &mut a);
                    set.iter().zip(&a).map(|(&p, &x)| x * stride[p]).sum()
                })
                .collect()
        };
        Self {
            first_offsets: offsets(first),
            second_offsets: offsets(second),
        }
    }

    pub fn row(&self, i: usize, j: usize) -> usize {
        self.first_offsets[i] + self.second_offsets[j]
    }

    pub fn first_len(&self) -> usize {
        self.first_offsets.len()
    }

    pub fn second_len(&self) -> usize {
        self.second_offsets.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(dims: Vec<usize>) -> HermitianOp {
        let n: usize = dims.iter().product();
        let m = CMatrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            let im = if i < j {
                0.3 * a - 0.1 * b
            } else if i > j {
                -(0.3 * a - 0.1 * b)
            } else {
                0.0
            };
            Complex64::new(0.2 * a + 0.7 * b + 0.1, im)
        });
        HermitianOp::new(dims, m).unwrap()
    }

    #[test]
    fn orthonormal_and_round_trip() {
        let basis = ProductBasis::new(&[2, 3]);
        assert_eq!(basis.len(), 36);
        for k in 0..basis.len() {
            let mut e = vec![0.0; basis.len()];
            e[k] = 1.0;
            let op = basis.op_from_coords(&e);
            let back = basis.coords(&op);
            for (l, x) in back.iter().enumerate() {
                let want = if l == k { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-14);
            }
        }
        let op = sample(vec![2, 3]);
        let back = basis.op_from_coords(&basis.coords(&op));
        assert!(back.max_abs_diff(&op) < 1e-13);
    }

    #[test]
    fn product_coordinates_factor() {
        let a = sample(vec![2]);
        let b = sample(vec![3]);
        let full = ProductBasis::new(&[2, 3]);
        let ba = ProductBasis::new(&[2]);
        let bb = ProductBasis::new(&[3]);
        let ca = ba.coords(&a);
        let cb = bb.coords(&b);
        let cab = full.coords(&a.kron(&b));
        let layout = SplitLayout::new(&[2, 3], &[0], &[1]);
        for i in 0..4 {
            for j in 0..9 {
                assert!((cab[layout.row(i, j)] - ca[i] * cb[j]).abs() < 1e-12);
            }
        }
        // interleaved: a on party 1 of a 3-party system
        let c = sample(vec![2]);
        let dims = [2, 2, 2];
        let full3 = ProductBasis::new(&dims);
        let op = c.kron(&a).kron(&c).permute(&[1, 0, 2]).unwrap();
        let co = full3.coords(&op);
        let layout = SplitLayout::new(&dims, &[1], &[0, 2]);
        let cc = ba.coords(&c);
        let bcc = ProductBasis::new(&[2, 2]).coords(&a.kron(&c));
        // op = a ⊗ c ⊗ c with parties (0,1,2) = (a, c, c); party 1 holds c.
        for i in 0..4 {
            for j in 0..16 {
                assert!((co[layout.row(i, j)] - cc[i] * bcc[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_is_sign_flip() {
        let op = sample(vec![2, 3]);
        let basis = ProductBasis::new(&[2, 3]);
        let c = basis.coords(&op);
        let pt = basis.coords(&op.partial_transpose(&[1]).unwrap());
        for k in 0..basis.len() {
            assert!((pt[k] - basis.transpose_sign(k, &[false, true]) * c[k]).abs() < 1e-13);
        }
        let tr: f64 = (0..basis.len()).map(|k| basis.trace_of(k) * c[k]).sum();
        assert!((tr - op.trace()).abs() < 1e-12);
    }
}
