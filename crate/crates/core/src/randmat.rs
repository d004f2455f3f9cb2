//! Seeded random matrices, codebooks and the linear algebra behind them.
//!
//! Everything random here is a pure function of `(master seed, trial index,
//! purpose tag)`: the tuple is expanded into a ChaCha8 key plus stream id,
//! so distinct purposes draw from provably independent streams and any
//! trial can be reproduced bit-for-bit in isolation. Gaussians come from
//! Box-Muller over the raw 53-bit uniforms, never from a library sampler
//! whose internals might change.
//!
//! The eigendecomposition is a cyclic Jacobi iteration on the Hermitian
//! Gram matrix: unconditionally stable, deterministic, and fast enough at
//! the desk scales used here (dimensions up to a few hundred).

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use std::f64::consts::TAU;
use thiserror::Error;

/// Largest feedback word the explicit codebook constructor will materialize.
pub const MAX_CODEBOOK_BITS: u32 = 26;

#[derive(Debug, Error)]
pub enum RandMatError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("codebook of 2^{r_fb} vectors exceeds the materialization cap 2^{max}")]
    CodebookTooLarge { r_fb: u32, max: u32 },
    #[error("matrix is not Hermitian: max asymmetry {max_asym:e}")]
    NotHermitian { max_asym: f64 },
    #[error("Jacobi eigendecomposition did not converge after {sweeps} sweeps (off-norm {off:e})")]
    EigenNoConvergence { sweeps: u32, off: f64 },
    #[error("Gram matrix numerically rank-deficient: eigenvalue {value:e} at index {index}")]
    RankDeficient { index: usize, value: f64 },
    #[error("scene self-check failed: {0}")]
    SceneCheck(String),
}

// ---------------------------------------------------------------------------
// Seed streams
// ---------------------------------------------------------------------------

/// Purpose tags for the named seed streams of one trial.
pub mod purpose {
    pub const SCENE_GAUSSIAN: u64 = 1;
    pub const SCENE_ISOTROPIC: u64 = 2;
    pub const CODEBOOK: u64 = 3;
    pub const ORDER_STAT_DIRECT: u64 = 4;
    pub const ORDER_STAT_CDF: u64 = 5;
    pub const VALIDATE: u64 = 6;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for `(master, trial, purpose)`.
pub fn stream_rng(master: u64, trial: u64, purpose: u64) -> ChaCha8Rng {
    let mut state = master;
    let k0 = splitmix64(&mut state);
    state ^= trial.wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let k1 = splitmix64(&mut state);
    let k2 = splitmix64(&mut state);
    let k3 = splitmix64(&mut state);
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&k0.to_le_bytes());
    key[8..16].copy_from_slice(&k1.to_le_bytes());
    key[16..24].copy_from_slice(&k2.to_le_bytes());
    key[24..32].copy_from_slice(&k3.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose);
    rng
}

/// Uniform draw in (0, 1]; the open lower end keeps `ln` finite.
pub fn next_unit_open(rng: &mut ChaCha8Rng) -> f64 {
    (((rng.next_u64() >> 11) + 1) as f64) * (1.0 / (1u64 << 53) as f64)
}

fn next_unit_half_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64) * (1.0 / (1u64 << 53) as f64)
}

/// Circularly-symmetric complex Gaussian of unit variance via Box-Muller.
pub fn next_cn01(rng: &mut ChaCha8Rng) -> Complex64 {
    let radius = (-next_unit_open(rng).ln()).sqrt();
    let angle = TAU * next_unit_half_open(rng);
    Complex64::from_polar(radius, angle)
}

// ---------------------------------------------------------------------------
// Complex matrices
// ---------------------------------------------------------------------------

/// Dense row-major complex matrix; just enough linear algebra for scenes.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Conjugate transpose.
    pub fn herm(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self[(i, p)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(p, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sq(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

/// `n x k` matrix of i.i.d. complex Gaussians with per-entry variance `1/n`.
pub fn sample_gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, k, |_, _| next_cn01(rng) * scale)
}

/// `n x k` matrix whose columns are independent isotropic unit vectors.
pub fn sample_isotropic_columns(rng: &mut ChaCha8Rng, n: usize, k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, k);
    for j in 0..k {
        let v = sample_unit_vector(rng, n);
        for i in 0..n {
            m[(i, j)] = v[i];
        }
    }
    m
}

/// One isotropic unit vector: a normalized standard complex Gaussian.
pub fn sample_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n).map(|_| next_cn01(rng)).collect();
    let norm = norm_sq(&v).sqrt();
    for z in &mut v {
        *z /= norm;
    }
    v
}

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Statistical model of the interference matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixModel {
    /// i.i.d. complex Gaussian entries with variance `1/n`.
    GaussianEntries,
    /// Independent isotropically distributed unit columns.
    IsotropicColumns,
}

impl MatrixModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            MatrixModel::GaussianEntries => "gaussian_entries",
            MatrixModel::IsotropicColumns => "isotropic_columns",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "gaussian_entries" | "gaussian" => Some(MatrixModel::GaussianEntries),
            "isotropic_columns" | "isotropic" => Some(MatrixModel::IsotropicColumns),
            _ => None,
        }
    }

    fn scene_purpose(&self) -> u64 {
        match self {
            MatrixModel::GaussianEntries => purpose::SCENE_GAUSSIAN,
            MatrixModel::IsotropicColumns => purpose::SCENE_ISOTROPIC,
        }
    }
}

/// Finite system dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// Processing gain (signature length).
    pub n: usize,
    /// Number of users.
    pub m: usize,
    /// Feedback bits; the codebook holds `2^r_fb` signatures.
    pub r_fb: u32,
    /// Interference-matrix column count, `m` (default) or `m - 1`.
    pub k_interf: usize,
}

impl SystemDims {
    pub fn new(n: usize, m: usize, r_fb: u32) -> Result<Self, RandMatError> {
        if n == 0 || m == 0 {
            return Err(RandMatError::InvalidDims(format!(
                "n and m must be positive, got n={n}, m={m}"
            )));
        }
        Ok(Self {
            n,
            m,
            r_fb,
            k_interf: m,
        })
    }

    /// Switch to the literal system-model convention of `m - 1` interferers.
    pub fn with_m_minus_one(mut self) -> Result<Self, RandMatError> {
        if self.m < 2 {
            return Err(RandMatError::InvalidDims(
                "m - 1 interferers requires m >= 2".into(),
            ));
        }
        self.k_interf = self.m - 1;
        Ok(self)
    }

    pub fn codebook_size(&self) -> u128 {
        1u128 << self.r_fb
    }
}

/// A random codebook of `2^r_fb` isotropic unit signatures.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub vectors: Vec<Vec<Complex64>>,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Draws the codebook from the given stream; vectors appear in stream order,
/// so a codebook with fewer bits is a prefix of one drawn with more.
pub fn make_codebook(rng: &mut ChaCha8Rng, n: usize, r_fb: u32) -> Result<Codebook, RandMatError> {
    if r_fb > MAX_CODEBOOK_BITS {
        return Err(RandMatError::CodebookTooLarge {
            r_fb,
            max: MAX_CODEBOOK_BITS,
        });
    }
    let size = 1usize << r_fb;
    let vectors = (0..size).map(|_| sample_unit_vector(rng, n)).collect();
    Ok(Codebook { vectors })
}

/// One realized interference matrix together with its spectral data.
#[derive(Debug, Clone)]
pub struct InterferenceScene {
    /// The `n x k_interf` interference matrix `S`.
    pub matrix: CMatrix,
    /// Nonzero Gram eigenvalues, descending, scaled to the `(1/r) H H^dagger`
    /// normalization with `r = min(n, k_interf)`.
    pub gram_eigenvalues: Vec<f64>,
    /// Hermitian idempotent projector onto the column space of `S`.
    pub column_space_projector: CMatrix,
    pub model: MatrixModel,
    pub dims: SystemDims,
    /// Orthonormal basis of the column space (`n x rank`).
    ucol: CMatrix,
    /// Eigenvector of the smallest Gram eigenvalue; present when `n <= k`.
    min_eigvec: Option<Vec<Complex64>>,
    /// Nonzero eigenvalues of `S S^dagger` itself, descending.
    ss_eigenvalues: Vec<f64>,
}

impl InterferenceScene {
    pub fn n(&self) -> usize {
        self.dims.n
    }

    pub fn k(&self) -> usize {
        self.dims.k_interf
    }

    pub fn rank(&self) -> usize {
        self.n().min(self.k())
    }

    /// True when the matrix has a nontrivial nullspace (`n > k`).
    pub fn is_tall(&self) -> bool {
        self.n() > self.k()
    }

    pub fn min_eigvec(&self) -> Option<&[Complex64]> {
        self.min_eigvec.as_deref()
    }

    pub fn ucol(&self) -> &CMatrix {
        &self.ucol
    }

    /// All `n` eigenvalues of `S S^dagger`, descending, zeros included.
    pub fn ss_eigenvalues_full(&self) -> Vec<f64> {
        let mut v = self.ss_eigenvalues.clone();
        v.resize(self.n(), 0.0);
        v
    }

    /// All `n` eigenvalues in the `(1/r) H H^dagger` normalization,
    /// descending, zeros included.
    pub fn gram_eigenvalues_full(&self) -> Vec<f64> {
        let mut v = self.gram_eigenvalues.clone();
        v.resize(self.n(), 0.0);
        v
    }

    /// Attainable interference range `[lambda_min, lambda_max]` of this
    /// scene in the `S S^dagger` scale.
    pub fn interference_bounds(&self) -> (f64, f64) {
        let lo = if self.is_tall() {
            0.0
        } else {
            *self.ss_eigenvalues.last().unwrap()
        };
        (lo, self.ss_eigenvalues[0])
    }

    /// Structural self-checks: projector idempotence and symmetry, trace =
    /// rank, nonnegative spectrum, and `P s_j = s_j` for every column.
    pub fn validate(&self) -> Result<(), RandMatError> {
        let p = &self.column_space_projector;
        let idem = p.mul(p).max_abs_diff(p);
        if idem > 1e-10 {
            return Err(RandMatError::SceneCheck(format!(
                "projector not idempotent: max deviation {idem:e}"
            )));
        }
        let asym = p.max_asymmetry();
        if asym > 1e-10 {
            return Err(RandMatError::SceneCheck(format!(
                "projector not Hermitian: {asym:e}"
            )));
        }
        let tr = p.trace();
        if (tr.re - self.rank() as f64).abs() > 1e-8 || tr.im.abs() > 1e-10 {
            return Err(RandMatError::SceneCheck(format!(
                "projector trace {tr} != rank {}",
                self.rank()
            )));
        }
        if self.gram_eigenvalues.iter().any(|&l| l < -1e-10) {
            return Err(RandMatError::SceneCheck("negative eigenvalue".into()));
        }
        for j in 0..self.k() {
            let s = self.matrix.col(j);
            let ps = p.mul_vec(&s);
            let dev = s
                .iter()
                .zip(&ps)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if dev > 1e-8 {
                return Err(RandMatError::SceneCheck(format!(
                    "column {j} not fixed by the projector: {dev:e}"
                )));
            }
        }
        Ok(())
    }
}

/// Samples a scene for `(master, trial)` under the given model and computes
/// its spectral data from the smaller Gram matrix.
pub fn make_scene(
    master: u64,
    trial: u64,
    dims: &SystemDims,
    model: MatrixModel,
) -> Result<InterferenceScene, RandMatError> {
    let n = dims.n;
    let k = dims.k_interf;
    let mut rng = stream_rng(master, trial, model.scene_purpose());
    let matrix = match model {
        MatrixModel::GaussianEntries => sample_gaussian_matrix(&mut rng, n, k),
        MatrixModel::IsotropicColumns => sample_isotropic_columns(&mut rng, n, k),
    };
    let scene = scene_from_matrix(matrix, dims, model)?;

    if cfg!(debug_assertions) {
        scene.validate()?;
    } else {
        // spot-check roughly 1 trial in 100, from an independent stream so
        // the scene draw itself is unaffected
        let mut coin = stream_rng(master, trial, purpose::VALIDATE);
        if next_unit_open(&mut coin) < 0.01 {
            scene.validate()?;
        }
    }
    Ok(scene)
}

/// Builds a scene around an explicitly given interference matrix.
pub fn scene_from_matrix(
    matrix: CMatrix,
    dims: &SystemDims,
    model: MatrixModel,
) -> Result<InterferenceScene, RandMatError> {
    let n = dims.n;
    let k = dims.k_interf;
    if matrix.rows() != n || matrix.cols() != k {
        return Err(RandMatError::InvalidDims(format!(
            "matrix is {}x{}, dims say {}x{}",
            matrix.rows(),
            matrix.cols(),
            n,
            k
        )));
    }
    let r = n.min(k);
    let (ss_eigenvalues, ucol, min_eigvec) = if k >= n {
        let gram = matrix.mul(&matrix.herm());
        let eig = eigendecompose_hermitian(&gram)?;
        let min_vec = eig.eigenvectors.col(n - 1);
        (eig.eigenvalues, eig.eigenvectors, Some(min_vec))
    } else {
        let gram = matrix.herm().mul(&matrix);
        let eig = eigendecompose_hermitian(&gram)?;
        let top = eig.eigenvalues[0];
        let mut ucol = CMatrix::zeros(n, k);
        for (idx, &val) in eig.eigenvalues.iter().enumerate() {
            if val <= 1e-12 * top.max(1e-300) {
                return Err(RandMatError::RankDeficient { index: idx, value: val });
            }
            let w = eig.eigenvectors.col(idx);
            let u = matrix.mul_vec(&w);
            let inv = 1.0 / val.sqrt();
            for i in 0..n {
                ucol[(i, idx)] = u[i] * inv;
            }
        }
        (eig.eigenvalues, ucol, None)
    };

    let column_space_projector = ucol.mul(&ucol.herm());
    let scale = n as f64 / r as f64;
    let gram_eigenvalues = ss_eigenvalues.iter().map(|&l| l * scale).collect();

    Ok(InterferenceScene {
        matrix,
        gram_eigenvalues,
        column_space_projector,
        model,
        dims: *dims,
        ucol,
        min_eigvec,
        ss_eigenvalues,
    })
}

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Eigenvalues sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the eigenvalue order.
    pub eigenvectors: CMatrix,
    pub sweeps: u32,
}

const MAX_JACOBI_SWEEPS: u32 = 60;

/// Full eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose asymmetry exceeds `1e-12` (relative to the largest
/// entry) and reports the sweep count on convergence failure.
pub fn eigendecompose_hermitian(a: &CMatrix) -> Result<EigenDecomposition, RandMatError> {
    assert_eq!(a.rows(), a.cols(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    let scale = a.max_abs().max(1e-300);
    let asym = a.max_asymmetry();
    if asym > 1e-12 * scale.max(1.0) {
        return Err(RandMatError::NotHermitian { max_asym: asym });
    }

    let mut work = a.clone();
    // symmetrize exactly so rounding in the input cannot drift
    for i in 0..n {
        work[(i, i)] = Complex64::new(work[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = 0.5 * (work[(i, j)] + work[(j, i)].conj());
            work[(i, j)] = avg;
            work[(j, i)] = avg.conj();
        }
    }
    let mut vecs = CMatrix::identity(n);
    let frob = {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += work[(i, j)].norm_sqr();
            }
        }
        s.sqrt().max(1e-300)
    };

    let off_norm = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += m[(i, j)].norm_sqr();
            }
        }
        (2.0 * s).sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&work) > 1e-13 * frob {
        if sweeps >= MAX_JACOBI_SWEEPS {
            return Err(RandMatError::EigenNoConvergence {
                sweeps,
                off: off_norm(&work),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let beta = work[(p, q)];
                let beta_abs = beta.norm();
                if beta_abs <= 1e-300 {
                    work[(p, q)] = Complex64::new(0.0, 0.0);
                    work[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                let phase = beta / beta_abs;
                let theta = (work[(q, q)].re - work[(p, p)].re) / (2.0 * beta_abs);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = -sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let s_phase = s * phase; // s e^{i phi}
                let s_phase_conj = s * phase.conj();

                // right-multiply columns p, q by the rotation
                for i in 0..n {
                    let ip = work[(i, p)];
                    let iq = work[(i, q)];
                    work[(i, p)] = c * ip + s_phase_conj * iq;
                    work[(i, q)] = -s_phase * ip + c * iq;
                }
                // left-multiply rows p, q by its adjoint
                for j in 0..n {
                    let pj = work[(p, j)];
                    let qj = work[(q, j)];
                    work[(p, j)] = c * pj + s_phase * qj;
                    work[(q, j)] = -s_phase_conj * pj + c * qj;
                }
                work[(p, q)] = Complex64::new(0.0, 0.0);
                work[(q, p)] = Complex64::new(0.0, 0.0);
                work[(p, p)] = Complex64::new(work[(p, p)].re, 0.0);
                work[(q, q)] = Complex64::new(work[(q, q)].re, 0.0);

                // accumulate eigenvectors
                for i in 0..n {
                    let ip = vecs[(i, p)];
                    let iq = vecs[(i, q)];
                    vecs[(i, p)] = c * ip + s_phase_conj * iq;
                    vecs[(i, q)] = -s_phase * ip + c * iq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(j, j)].re.partial_cmp(&work[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| work[(i, i)].re).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}
