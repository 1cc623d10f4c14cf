//! Named states, parametrised families, noise mixing and random states.

mod spec;

pub use spec::StateSpec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hermitian::{undigits, CMatrix, CVector, HermitianOp, PartitionedState, STATE_TOL};

pub type StateRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> StateRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pure(dims: Vec<usize>, amplitudes: &[(Vec<usize>, Complex64)]) -> PartitionedState {
    let n: usize = dims.iter().product();
    let mut v = CVector::zeros(n);
    for (digits, a) in amplitudes {
        v[undigits(digits, &dims)] += a;
    }
    PartitionedState::new(HermitianOp::projector(dims, &v).expect("nonzero vector")).expect("projector is a state")
}

fn check_parties(n: usize, d: usize) -> Result<()> {
    if n < 2 || d < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 parties of dimension ≥ 2, got {n}x{d}"
        )));
    }
    if (d as f64).powi(n as i32) > 4096.0 {
        return Err(Error::invalid(format!(
            "{n}x{d} exceeds the supported total dimension 4096"
        )));
    }
    Ok(())
}

/// `(|0…0⟩ + |1…1⟩ + … + |d−1…d−1⟩)/√d`.
pub fn ghz(n: usize, d: usize) -> Result<PartitionedState> {
    check_parties(n, d)?;
    let amps: Vec<_> = (0..d).map(|k| (vec![k; n], c(1.0, 0.0))).collect();
    Ok(pure(vec![d; n], &amps))
}

/// Uniform superposition of single-site excitations; for `d > 2` every
/// nonzero level of every site appears, e.g. the 3-qutrit state
/// `(|100⟩+|010⟩+|001⟩+|200⟩+|020⟩+|002⟩)/√6`.
pub fn w_state(n: usize, d: usize) -> Result<PartitionedState> {
    check_parties(n, d)?;
    let mut amps = Vec::new();
    for level in 1..d {
        for site in 0..n {
            let mut digits = vec![0; n];
            digits[site] = level;
            amps.push((digits, c(1.0, 0.0)));
        }
    }
    Ok(pure(vec![d; n], &amps))
}

/// Qubit Dicke state with `k` excitations.
pub fn dicke(n: usize, k: usize) -> Result<PartitionedState> {
    check_parties(n, 2)?;
    if k == 0 || k >= n {
        return Err(Error::invalid(format!("Dicke excitations must be in 1..{n}, got {k}")));
    }
    let amps: Vec<_> = (0..1usize << n)
        .filter(|b| b.count_ones() as usize == k)
        .map(|b| ((0..n).map(|p| (b >> (n - 1 - p)) & 1).collect(), c(1.0, 0.0)))
        .collect();
    Ok(pure(vec![2; n], &amps))
}

/// `(|+0+0⟩ + |+0−1⟩ + |−1−0⟩ + |−1+1⟩)/2`.
pub fn cluster4() -> PartitionedState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = [s, s];
    let minus = [s, -s];
    let terms: [([f64; 2], usize, [f64; 2], usize); 4] = [
        (plus, 0, plus, 0),
        (plus, 0, minus, 1),
        (minus, 1, minus, 0),
        (minus, 1, plus, 1),
    ];
    let mut amps = Vec::new();
    for (x, b, y, dd) in terms {
        for (a, xa) in x.iter().enumerate() {
            for (cc, yc) in y.iter().enumerate() {
                amps.push((vec![a, b, cc, dd], c(xa * yc, 0.0)));
            }
        }
    }
    pure(vec![2; 4], &amps)
}

pub fn bell() -> PartitionedState {
    pure(vec![2, 2], &[(vec![0, 0], c(1.0, 0.0)), (vec![1, 1], c(1.0, 0.0))])
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return Err(Error::invalid(format!("{name} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// `tΦ + (1 − t)1/d²` with `Φ` the maximally entangled state of `d × d`.
pub fn isotropic(d: usize, t: f64) -> Result<PartitionedState> {
    check_parties(2, d)?;
    check_unit("t", t)?;
    let amps: Vec<_> = (0..d).map(|k| (vec![k, k], c(1.0, 0.0))).collect();
    let phi = pure(vec![d, d], &amps);
    mix_with_white_noise(&phi, t)?.into_state()
}

/// `t·P_anti/tr(P_anti) + (1 − t)1/d²` with `P_anti` the antisymmetric
/// subspace projector of `d × d`.
pub fn werner(d: usize, t: f64) -> Result<PartitionedState> {
    check_parties(2, d)?;
    check_unit("t", t)?;
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            // (1 − SWAP)/2
            m[(i * d + j, i * d + j)] += c(0.5, 0.0);
            m[(i * d + j, j * d + i)] -= c(0.5, 0.0);
        }
    }
    let anti = PartitionedState::normalised(HermitianOp::new(vec![d, d], m)?)?;
    mix_with_white_noise(&anti, t)?.into_state()
}

/// The 3×3 Horodecki bound-entangled family, `a ∈ [0, 1]`.
pub fn horodecki3x3(a: f64) -> Result<PartitionedState> {
    check_unit("a", a)?;
    let mut m = CMatrix::zeros(9, 9);
    for i in 0..9 {
        m[(i, i)] = c(a, 0.0);
    }
    for &(i, j) in &[(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = c(a, 0.0);
        m[(j, i)] = c(a, 0.0);
    }
    let r = (1.0 - a * a).sqrt() / 2.0;
    m[(6, 6)] = c((1.0 + a) / 2.0, 0.0);
    m[(8, 8)] = c((1.0 + a) / 2.0, 0.0);
    m[(6, 8)] = c(r, 0.0);
    m[(8, 6)] = c(r, 0.0);
    let m = m.unscale(8.0 * a + 1.0);
    PartitionedState::new(HermitianOp::new(vec![3, 3], m)?)
}

/// The 2×4 Horodecki bound-entangled family, `b ∈ [0, 1]`.
pub fn horodecki2x4(b: f64) -> Result<PartitionedState> {
    check_unit("b", b)?;
    let mut m = CMatrix::zeros(8, 8);
    for i in [0, 1, 2, 3, 5, 6] {
        m[(i, i)] = c(b, 0.0);
    }
    for &(i, j) in &[(0, 5), (1, 6), (2, 7)] {
        m[(i, j)] = c(b, 0.0);
        m[(j, i)] = c(b, 0.0);
    }
    let r = (1.0 - b * b).sqrt() / 2.0;
    m[(4, 4)] = c((1.0 + b) / 2.0, 0.0);
    m[(7, 7)] = c((1.0 + b) / 2.0, 0.0);
    m[(4, 7)] = c(r, 0.0);
    m[(7, 4)] = c(r, 0.0);
    let m = m.unscale(7.0 * b + 1.0);
    PartitionedState::new(HermitianOp::new(vec![2, 4], m)?)
}

/// The four pure states `|γ_i(θ)⟩` on `A ⊗ BC` spanning `ρ(θ)`.
pub fn gamma_vectors(theta: f64) -> [CVector; 4] {
    let (s, co) = theta.sin_cos();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (A amplitudes, BC vector over |00⟩,|01⟩,|10⟩,|11⟩)
    let parts: [([Complex64; 2], [f64; 4]); 4] = [
        ([c(co, 0.0), c(s, 0.0)], [1.0, 0.0, 0.0, -1.0]),
        ([c(0.0, -s), c(co, 0.0)], [0.0, -1.0, 1.0, 0.0]),
        ([c(-co, 0.0), c(s, 0.0)], [1.0, 0.0, 0.0, 1.0]),
        ([c(0.0, -s), c(-co, 0.0)], [0.0, 1.0, 1.0, 0.0]),
    ];
    parts.map(|(a, bc)| CVector::from_fn(8, |k, _| a[k / 4] * bc[k % 4] * h))
}

/// `ρ(θ) = ¼ Σ_i |γ_i(θ)⟩⟨γ_i(θ)|`, X-shaped with `a = cos²θ`,
/// `b = sin²θ`, `c = sinθ cosθ`.
pub fn gamma_family(theta: f64) -> PartitionedState {
    let mut m = CMatrix::zeros(8, 8);
    for v in gamma_vectors(theta) {
        m += &v * v.adjoint();
    }
    let op = HermitianOp::new(vec![2, 2, 2], m.unscale(4.0)).expect("sum of projectors is Hermitian");
    PartitionedState::new(op).expect("mixture of unit vectors is a state")
}

pub fn maximally_mixed(dims: Vec<usize>) -> Result<PartitionedState> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::invalid("dims must be nonempty and positive"));
    }
    PartitionedState::new(HermitianOp::maximally_mixed(dims))
}

/// `ρ_t = tρ + (1 − t)1/d` for `t ∈ [0, 1.5]`. For `t > 1` the result may
/// fail to be PSD; that is reported in [`NoisyState::psd`], not as an error.
#[derive(Clone, Debug)]
pub struct NoisyState {
    pub op: HermitianOp,
    pub psd: bool,
}

impl NoisyState {
    pub fn into_state(self) -> Result<PartitionedState> {
        PartitionedState::new(self.op)
    }
}

pub fn white_noise_mix(rho: &HermitianOp, t: f64) -> HermitianOp {
    let noise = HermitianOp::maximally_mixed(rho.dims().to_vec());
    rho.lincomb(t, &noise, 1.0 - t).expect("same dims")
}

pub fn mix_with_white_noise(rho: &PartitionedState, t: f64) -> Result<NoisyState> {
    if !(0.0..=1.5).contains(&t) || !t.is_finite() {
        return Err(Error::invalid(format!(
            "noise parameter t must lie in [0, 1.5], got {t}"
        )));
    }
    let op = white_noise_mix(rho, t);
    let psd = t <= 1.0 || op.min_eigenvalue() >= -STATE_TOL;
    Ok(NoisyState { op, psd })
}

/// Normalised vector of i.i.d. standard complex Gaussians (Haar on the sphere).
pub fn haar_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
        let norm = v.norm();
        if norm > 1e-12 {
            return v.unscale(norm);
        }
    }
}

pub fn haar_projector<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> HermitianOp {
    let d = dims.iter().product();
    let v = haar_vector(d, rng);
    HermitianOp::projector(dims, &v).expect("unit vector")
}

/// `GG†/Tr(GG†)` with `G` square complex Ginibre (Hilbert–Schmidt measure).
pub fn random_density_with<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> PartitionedState {
    let d: usize = dims.iter().product();
    let g = CMatrix::from_fn(d, d, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let m = &g * g.adjoint();
    let op = HermitianOp::new(dims, m).expect("GG† is Hermitian");
    PartitionedState::normalised(op).expect("GG† is PSD with positive trace")
}

pub fn random_density(dims: Vec<usize>, seed: u64) -> Result<PartitionedState> {
    check_dims(&dims)?;
    Ok(random_density_with(dims, &mut rng_from_seed(seed)))
}

pub fn random_pure(dims: Vec<usize>, seed: u64) -> Result<PartitionedState> {
    check_dims(&dims)?;
    let op = haar_projector(dims, &mut rng_from_seed(seed));
    PartitionedState::new(op)
}

/// Tensor product of independent Haar-random pure states, one per party.
pub fn random_product_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PartitionedState {
    let mut op = haar_projector(vec![dims[0]], rng);
    for &d in &dims[1..] {
        op = op.kron(&haar_projector(vec![d], rng));
    }
    PartitionedState::new(op).expect("product of projectors is a state")
}

fn check_dims(dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&d| d < 2) {
        return Err(Error::invalid(format!(
            "random states need local dimensions ≥ 2, got {dims:?}"
        )));
    }
    if dims.iter().product::<usize>() > 4096 {
        return Err(Error::invalid("total dimension exceeds 4096"));
    }
    Ok(())
}
