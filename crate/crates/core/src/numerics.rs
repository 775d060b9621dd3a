//! Complex vectors and matrices, compensated dot products, finite-difference
//! Jacobians, deviation grids, seeded sampling, and small Hermitian
//! eigenproblems.
//!
//! Everything here is a pure function of its inputs; random sampling is
//! always driven by an explicit seed so verification runs are reproducible.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;

/// The ambient scalar field ℂ in double precision.
pub type Cx = num_complex::Complex64;

/// Tolerances and grid resolution shared by the verifiers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToleranceConfig {
    /// Real step for central finite differences.
    pub diff_step: f64,
    /// Acceptance tolerance for pointwise residuals (interpolation, round trips).
    pub residual_tol: f64,
    /// Acceptance tolerance for Jacobian-based residuals (symplectic, volume).
    pub jac_tol: f64,
    /// Grid points per real axis in deviation measurements.
    pub grid_n: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig { diff_step: 1e-6, residual_tol: 1e-8, jac_tol: 1e-6, grid_n: 7 }
    }
}

/// Deterministic generator for all verification sampling.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// True iff every entry is finite in both components.
pub fn all_finite(z: &[Cx]) -> bool {
    z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// Sup norm `max_i |z_i|` of a complex vector.
pub fn sup_norm(z: &[Cx]) -> f64 {
    z.iter().fold(0.0, |m, c| m.max(c.norm()))
}

/// Sup distance `max_i |a_i − b_i|`; panics if lengths differ.
pub fn sup_dist(a: &[Cx], b: &[Cx]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

// --- error-free transformations ------------------------------------------

/// Knuth's TwoSum: `a + b = s + e` exactly, `s = fl(a + b)`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

/// TwoProd via fused multiply-add: `a·b = p + e` exactly.
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Compensated (twice-working-precision) sum of products Σ aᵢ·bᵢ.
fn dot2<I: Iterator<Item = (f64, f64)>>(pairs: I) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for (a, b) in pairs {
        let (p, pe) = two_prod(a, b);
        let (t, se) = two_sum(s, p);
        s = t;
        c += pe + se;
    }
    s + c
}

/// Compensated bilinear dot product Σ aᵢ·bᵢ (no conjugation).
///
/// Real and imaginary parts are each accumulated as a compensated sum of
/// products, so exactly cancelling term pairs (e.g. `λ·v` for a shear built
/// from the standard symplectic matrix) come out as exact zeros.
pub fn comp_dot(a: &[Cx], b: &[Cx]) -> Cx {
    debug_assert_eq!(a.len(), b.len());
    let re = dot2(
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| [(x.re, y.re), (-x.im, y.im)]),
    );
    let im = dot2(
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| [(x.re, y.im), (x.im, y.re)]),
    );
    Cx::new(re, im)
}

// --- double-double arithmetic ----------------------------------------------

/// Fast renormalization; requires `|a| ≥ |b|` or `a == 0`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Unevaluated sum `hi + lo` carrying ~106 significand bits.
///
/// The symplectic verifier works on Jacobian chains whose entries reach
/// ~1e12 while the defect `DᵀJD − J` must resolve at 1e-6; one double's
/// 53 bits put an eps·‖D‖² roundoff floor above that tolerance, so the
/// accumulation runs in double-double instead.
#[derive(Clone, Copy, Debug, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Rounds back to the nearest double.
    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + other.lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    #[inline]
    pub fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let (hi, lo) = quick_two_sum(p, e + self.hi * other.lo + self.lo * other.hi);
        Dd { hi, lo }
    }

    /// Exact product of two doubles, kept unrounded.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }
}

/// Complex scalar with double-double components.
#[derive(Clone, Copy, Debug, Default)]
pub struct CxDd {
    pub re: Dd,
    pub im: Dd,
}

impl CxDd {
    pub const ZERO: CxDd = CxDd { re: Dd::ZERO, im: Dd::ZERO };

    /// Exact promotion of a double-precision complex number.
    #[inline]
    pub fn from_cx(z: Cx) -> Self {
        CxDd { re: Dd::from_f64(z.re), im: Dd::from_f64(z.im) }
    }

    /// Rounds both components back to doubles.
    #[inline]
    pub fn value(self) -> Cx {
        Cx::new(self.re.value(), self.im.value())
    }

    #[inline]
    pub fn add(self, other: CxDd) -> CxDd {
        CxDd { re: self.re.add(other.re), im: self.im.add(other.im) }
    }

    #[inline]
    pub fn sub(self, other: CxDd) -> CxDd {
        CxDd { re: self.re.sub(other.re), im: self.im.sub(other.im) }
    }

    #[inline]
    pub fn neg(self) -> CxDd {
        CxDd { re: self.re.neg(), im: self.im.neg() }
    }

    #[inline]
    pub fn mul(self, other: CxDd) -> CxDd {
        CxDd {
            re: self.re.mul(other.re).sub(self.im.mul(other.im)),
            im: self.re.mul(other.im).add(self.im.mul(other.re)),
        }
    }

    /// Modulus, rounded to double (plenty for norms of residuals).
    #[inline]
    pub fn norm(self) -> f64 {
        self.value().norm()
    }
}

/// Dense row-major matrix over [`CxDd`].
#[derive(Clone, Debug)]
pub struct DdMatrix {
    rows: usize,
    cols: usize,
    data: Vec<CxDd>,
}

impl DdMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DdMatrix { rows, cols, data: vec![CxDd::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DdMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, CxDd::from_cx(Cx::new(1.0, 0.0)));
        }
        m
    }

    /// Exact promotion of a double-precision matrix.
    pub fn from_cx(m: &CxMatrix) -> Self {
        let mut out = DdMatrix::zeros(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out.set(i, j, CxDd::from_cx(m.get(i, j)));
            }
        }
        out
    }

    /// Rounds every entry back to double precision.
    pub fn to_cx(&self) -> CxMatrix {
        CxMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).value())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> CxDd {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: CxDd) {
        self.data[i * self.cols + j] = v;
    }

    /// Matrix product with double-double accumulation; panics on shape mismatch.
    pub fn mul(&self, other: &DdMatrix) -> DdMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        let mut out = DdMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = CxDd::ZERO;
                for k in 0..self.cols {
                    acc = acc.add(self.get(i, k).mul(other.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

// --- matrices --------------------------------------------------------------

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CxMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl CxMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CxMatrix { rows, cols, data: vec![Cx::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CxMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Cx::new(1.0, 0.0));
        }
        m
    }

    /// Builds from a row-major entry function.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx) -> Self {
        let mut m = CxMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Cx) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Cx] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Cx> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        CxMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Plain matrix product; panics on shape mismatch.
    pub fn mul(&self, other: &CxMatrix) -> CxMatrix {
        assert_eq!(self.cols, other.rows, "matrix product shape mismatch");
        CxMatrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).map(|k| self.get(i, k) * other.get(k, j)).sum()
        })
    }

    pub fn sub(&self, other: &CxMatrix) -> CxMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CxMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Determinant by LU with partial pivoting; 0 on exact singularity.
    pub fn lu_det(&self) -> Cx {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Cx::new(1.0, 0.0);
        for k in 0..n {
            let (mut piv, mut piv_norm) = (k, a[k * n + k].norm());
            for i in k + 1..n {
                let cand = a[i * n + k].norm();
                if cand > piv_norm {
                    piv = i;
                    piv_norm = cand;
                }
            }
            if piv_norm == 0.0 {
                return Cx::new(0.0, 0.0);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                for j in k + 1..n {
                    let sub = factor * a[k * n + j];
                    a[i * n + j] -= sub;
                }
            }
        }
        det
    }
}

// --- grids and deviation ----------------------------------------------------

/// Square `grid_n × grid_n` lattice over `[−r, r]²` in re/im, kept to the
/// closed disc `|z| ≤ r` (the grid of one polydisc coordinate).
pub fn disc_grid(radius: f64, grid_n: usize) -> Vec<Cx> {
    debug_assert!(grid_n >= 2);
    let step = 2.0 * radius / (grid_n as f64 - 1.0);
    let mut pts = Vec::new();
    for iy in 0..grid_n {
        for ix in 0..grid_n {
            let z = Cx::new(-radius + step * ix as f64, -radius + step * iy as f64);
            if z.norm() <= radius * (1.0 + 1e-12) {
                pts.push(z);
            }
        }
    }
    pts
}

/// Max over the polydisc grid of the sup-norm difference `|f(z) − g(z)|`.
///
/// The grid is the `dim`-fold product of [`disc_grid`], enumerated in a
/// fixed row-major order, so the result is deterministic for a fixed config.
pub fn max_deviation<F, G>(
    f: F,
    g: G,
    box_radius: f64,
    dim: usize,
    cfg: &ToleranceConfig,
) -> Result<f64, Error>
where
    F: Fn(&[Cx]) -> Result<Vec<Cx>, Error>,
    G: Fn(&[Cx]) -> Result<Vec<Cx>, Error>,
{
    let axis = disc_grid(box_radius, cfg.grid_n);
    let mut index = vec![0usize; dim];
    let mut point = vec![axis[0]; dim];
    let mut worst = 0.0f64;
    loop {
        for (d, &i) in index.iter().enumerate() {
            point[d] = axis[i];
        }
        let fz = f(&point)?;
        let gz = g(&point)?;
        if !all_finite(&fz) || !all_finite(&gz) {
            return Err(Error::NonFiniteEvaluation);
        }
        worst = worst.max(sup_dist(&fz, &gz));
        // odometer increment over the product grid
        let mut d = 0;
        loop {
            if d == dim {
                return Ok(worst);
            }
            index[d] += 1;
            if index[d] < axis.len() {
                break;
            }
            index[d] = 0;
            d += 1;
        }
    }
}

/// Central-difference Jacobian along the real axis.
///
/// For holomorphic maps one real probe direction recovers the complex
/// derivative: entry `(i, j) = (map(z + h·e_j)_i − map(z − h·e_j)_i) / 2h`.
pub fn jacobian<F>(map: F, z: &[Cx], cfg: &ToleranceConfig) -> Result<CxMatrix, Error>
where
    F: Fn(&[Cx]) -> Result<Vec<Cx>, Error>,
{
    let dim = z.len();
    let h = cfg.diff_step;
    let mut jac = CxMatrix::zeros(dim, dim);
    let mut probe = z.to_vec();
    for j in 0..dim {
        probe[j] = z[j] + h;
        let plus = map(&probe)?;
        probe[j] = z[j] - h;
        let minus = map(&probe)?;
        probe[j] = z[j];
        if !all_finite(&plus) || !all_finite(&minus) || plus.len() != dim || minus.len() != dim {
            return Err(Error::NonFiniteEvaluation);
        }
        for i in 0..dim {
            jac.set(i, j, (plus[i] - minus[i]) / (2.0 * h));
        }
    }
    Ok(jac)
}

// --- sampling ---------------------------------------------------------------

/// Uniform sample from the closed disc of the given radius around a center.
pub fn sample_disc(rng: &mut ChaCha8Rng, center: Cx, radius: f64) -> Cx {
    let r = radius * rng.gen::<f64>().sqrt();
    let theta = core::f64::consts::TAU * rng.gen::<f64>();
    center + Cx::new(r * theta.cos(), r * theta.sin())
}

/// Uniform sample from the polydisc `center + {|z_j| ≤ radius}`.
pub fn sample_polydisc(rng: &mut ChaCha8Rng, center: &[Cx], radius: f64) -> Vec<Cx> {
    center.iter().map(|&c| sample_disc(rng, c, radius)).collect()
}

// --- Hermitian eigenvalues / singular values --------------------------------

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, descending.
///
/// Intended for the small (≤ 6×6) Gram matrices arising in rank checks; the
/// off-diagonal mass shrinks quadratically, and 30 sweeps is far beyond what
/// convergence needs at these sizes.
pub fn hermitian_eigenvalues(h: &CxMatrix) -> Vec<f64> {
    assert_eq!(h.rows(), h.cols(), "eigenvalues need a square matrix");
    let n = h.rows();
    let mut a = h.clone();
    let scale = a.max_abs().max(1.0);
    for _ in 0..30 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let aa = apq.norm();
                if aa <= 1e-300 {
                    continue;
                }
                let u = apq / aa; // unit phase making the 2x2 block real
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let tau = (aqq - app) / (2.0 * aa);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G = I except the (p,q) block [[c, s],[−s·ū, c·ū]]; A ← Gᴴ A G
                let mut g = CxMatrix::identity(n);
                g.set(p, p, Cx::new(c, 0.0));
                g.set(p, q, Cx::new(s, 0.0));
                g.set(q, p, -s * u.conj());
                g.set(q, q, c * u.conj());
                let gh = CxMatrix::from_fn(n, n, |i, j| g.get(j, i).conj());
                a = gh.mul(&a).mul(&g);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    eig.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    eig
}

/// Singular values of a rectangular matrix (descending), via the Hermitian
/// eigenvalues of the smaller Gram matrix.
pub fn singular_values(m: &CxMatrix) -> Vec<f64> {
    let gram = if m.rows() <= m.cols() {
        // M·Mᴴ
        CxMatrix::from_fn(m.rows(), m.rows(), |i, j| {
            (0..m.cols()).map(|k| m.get(i, k) * m.get(j, k).conj()).sum()
        })
    } else {
        // Mᴴ·M
        CxMatrix::from_fn(m.cols(), m.cols(), |i, j| {
            (0..m.rows()).map(|k| m.get(k, i).conj() * m.get(k, j)).sum()
        })
    };
    hermitian_eigenvalues(&gram)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}
