//! Real embedding of complex Hermitian cone constraints.
//!
//! A Hermitian `H = X + iY` is PSD iff `[[X, −Y], [Y, X]]` is. Each PSD row
//! block is mapped linearly onto the packed upper triangle (column-major,
//! off-diagonals scaled by √2) of that real symmetric matrix, so the trace
//! inner product is preserved and dual multipliers pull back through the
//! transpose of the same map.

use std::collections::BTreeMap;

use super::{symmetric_element, ConeKind, SdpProblem};
use crate::basis::ProductBasis;

#[derive(Clone, Debug, PartialEq)]
pub enum RealCone {
    Zero(usize),
    Nonneg(usize),
    /// Packed upper triangle of an `n × n` symmetric matrix.
    Psd(usize),
}

impl RealCone {
    pub fn rows(&self) -> usize {
        match *self {
            RealCone::Zero(m) | RealCone::Nonneg(m) => m,
            RealCone::Psd(n) => n * (n + 1) / 2,
        }
    }
}

/// `minimise qᵀx s.t. b − A x ∈ K` with `A` in triplet form.
#[derive(Clone, Debug)]
pub struct RealConicProblem {
    pub n: usize,
    pub q: Vec<f64>,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<RealCone>,
    /// For each source constraint: first real row and the pullback map
    /// (`None` for the identity).
    pub(crate) blocks: Vec<(usize, Option<PackMap>)>,
}

/// Sparse map from expression coordinates to packed rows:
/// `cols[k]` lists `(packed_row, weight)` for expression coordinate `k`.
#[derive(Clone, Debug)]
pub(crate) struct PackMap {
    pub cols: Vec<Vec<(usize, f64)>>,
    pub packed_len: usize,
}

impl PackMap {
    /// `Lᵀ z`: packed dual back to expression coordinates.
    pub fn pull_back(&self, z: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|col| col.iter().map(|&(r, w)| w * z[r]).sum())
            .collect()
    }
}

fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

fn pack_hermitian(dims: &[usize]) -> PackMap {
    let basis = ProductBasis::new(dims);
    let n = basis.order();
    let s2 = std::f64::consts::SQRT_2;
    let cols = (0..basis.len())
        .map(|k| {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            let mut put = |i: usize, j: usize, v: f64| {
                if i <= j && v != 0.0 {
                    let w = if i == j { v } else { s2 * v };
                    *acc.entry(packed_index(i, j)).or_default() += w;
                }
            };
            for &(r, c, v) in basis.element(k) {
                put(r, c, v.re);
                put(r + n, c + n, v.re);
                put(r + n, c, v.im);
                put(r, c + n, -v.im);
            }
            acc.into_iter().filter(|(_, w)| *w != 0.0).collect()
        })
        .collect();
    PackMap {
        cols,
        packed_len: 2 * n * (2 * n + 1) / 2,
    }
}

fn pack_symmetric(n: usize) -> PackMap {
    let s2 = std::f64::consts::SQRT_2;
    let cols = (0..n * (n + 1) / 2)
        .map(|k| {
            symmetric_element(n, k)
                .into_iter()
                .filter(|&(i, j, _)| i <= j)
                .map(|(i, j, v)| (packed_index(i, j), if i == j { v } else { s2 * v }))
                .collect()
        })
        .collect();
    PackMap {
        cols,
        packed_len: n * (n + 1) / 2,
    }
}

/// Builds the real problem handed to the backend. Rows follow constraint
/// order; Hermitian PSD blocks of order `n` become real PSD blocks of order
/// `2n`.
pub fn embed_complex(p: &SdpProblem) -> RealConicProblem {
    let n = p.num_coords();
    let mut q = vec![0.0; n];
    for &(v, c, w) in p.objective() {
        q[p.offset(v) + c] -= w;
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut cones = Vec::new();
    let mut blocks = Vec::new();
    let mut pack_cache: BTreeMap<String, PackMap> = BTreeMap::new();
    for c in p.constraints() {
        let row0 = b.len();
        let map = match &c.kind {
            ConeKind::Zero => {
                cones.push(RealCone::Zero(c.rows));
                None
            }
            ConeKind::Nonneg => {
                cones.push(RealCone::Nonneg(c.rows));
                None
            }
            ConeKind::HermitianPsd(dims) => {
                let key = format!("h{dims:?}");
                let m = pack_cache.entry(key).or_insert_with(|| pack_hermitian(dims)).clone();
                cones.push(RealCone::Psd(2 * dims.iter().product::<usize>()));
                Some(m)
            }
            ConeKind::SymmetricPsd(n) => {
                let key = format!("s{n}");
                let m = pack_cache.entry(key).or_insert_with(|| pack_symmetric(*n)).clone();
                cones.push(RealCone::Psd(*n));
                Some(m)
            }
        };
        match &map {
            None => {
                b.extend_from_slice(&c.constant);
                for t in &c.terms {
                    let off = p.offset(t.var);
                    for &(r, col, v) in &t.entries {
                        a.push((row0 + r, off + col, -v));
                    }
                }
            }
            Some(m) => {
                let mut packed = vec![0.0; m.packed_len];
                for (k, &x) in c.constant.iter().enumerate() {
                    if x != 0.0 {
                        for &(r, w) in &m.cols[k] {
                            packed[r] += w * x;
                        }
                    }
                }
                b.extend_from_slice(&packed);
                for t in &c.terms {
                    let off = p.offset(t.var);
                    for &(r, col, v) in &t.entries {
                        for &(pr, w) in &m.cols[r] {
                            a.push((row0 + pr, off + col, -v * w));
                        }
                    }
                }
            }
        }
        blocks.push((row0, map));
    }
    RealConicProblem {
        n,
        q,
        a,
        b,
        cones,
        blocks,
    }
}
