//! SL₂(ℂ) as a tame-set workbench: matrix elements, the six generator
//! fields with a symbolic bracket engine, the unipotent and diagonal
//! interpolation chains, Haar-form verification in the `(a, b, c)` chart,
//! and the prime-mask spanning check.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;

use crate::chain::{validate_injection, ArgSelector, AutoChain, FlowPrimitive, Generator, Primitive};
use crate::error::Error;
use crate::interp::{Interpolant, RootPoly};
use crate::numerics::{
    comp_dot, rng_from_seed, sample_disc, singular_values, sup_dist, Cx, CxMatrix,
    ToleranceConfig,
};
use crate::poly::MPoly;

/// Determinant slack accepted when constructing an element.
const DET_TOL: f64 = 1e-9;
/// Chart points with `|a|` below this are resampled.
const CHART_FLOOR: f64 = 1e-6;
/// Total resampling budget for one Haar verification run.
const CHART_RETRIES: usize = 100;
/// Sample count for the Haar residual.
const HAAR_SAMPLES: usize = 50;

/// One matrix `[[a, b], [c, d]]` with `ad − bc = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SL2Elem {
    pub a: Cx,
    pub b: Cx,
    pub c: Cx,
    pub d: Cx,
}

impl SL2Elem {
    pub fn new(a: Cx, b: Cx, c: Cx, d: Cx) -> Result<Self, Error> {
        let m = SL2Elem { a, b, c, d };
        let residual = m.det_residual();
        if !residual.is_finite() || residual >= DET_TOL {
            return Err(Error::NotUnimodular { residual });
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        SL2Elem {
            a: Cx::new(1.0, 0.0),
            b: Cx::new(0.0, 0.0),
            c: Cx::new(0.0, 0.0),
            d: Cx::new(1.0, 0.0),
        }
    }

    /// The upper unipotent `[[1, k], [0, 1]]`.
    pub fn upper(k: f64) -> Self {
        SL2Elem {
            a: Cx::new(1.0, 0.0),
            b: Cx::new(k, 0.0),
            c: Cx::new(0.0, 0.0),
            d: Cx::new(1.0, 0.0),
        }
    }

    /// The diagonal element `diag(k, 1/k)`; `k` must be nonzero.
    pub fn diagonal(k: f64) -> Self {
        debug_assert!(k != 0.0, "diag(k, 1/k) needs k ≠ 0");
        SL2Elem {
            a: Cx::new(k, 0.0),
            b: Cx::new(0.0, 0.0),
            c: Cx::new(0.0, 0.0),
            d: Cx::new(1.0 / k, 0.0),
        }
    }

    /// `|ad − bc − 1|` with the products accumulated compensated, so exact
    /// unimodularity reads as an exact zero.
    pub fn det_residual(&self) -> f64 {
        let one = Cx::new(1.0, 0.0);
        comp_dot(&[self.a, self.b, one], &[self.d, -self.c, -one]).norm()
    }

    pub fn to_vec(&self) -> Vec<Cx> {
        vec![self.a, self.b, self.c, self.d]
    }

    /// Reads `(a, b, c, d)` back from a coordinate vector, revalidating the
    /// determinant.
    pub fn from_slice(z: &[Cx]) -> Result<Self, Error> {
        if z.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: z.len() });
        }
        SL2Elem::new(z[0], z[1], z[2], z[3])
    }

    pub fn mul(&self, other: &SL2Elem) -> SL2Elem {
        SL2Elem {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }
}

fn is_sl2_generator(gen: &Generator) -> bool {
    matches!(
        gen,
        Generator::SlV
            | Generator::SlW
            | Generator::SlH
            | Generator::SlA
            | Generator::SlB
            | Generator::SlC
    )
}

/// Time-`t` flow of one generator applied to an element, with the image's
/// determinant revalidated.
pub fn flow(gen: &Generator, t: Cx, m: &SL2Elem) -> Result<SL2Elem, Error> {
    if !is_sl2_generator(gen) {
        return Err(Error::UnsupportedPrimitive { context: "flow expects an SL₂ generator" });
    }
    let image = gen.flow(t, &m.to_vec())?;
    SL2Elem::from_slice(&image)
}

// --- symbolic fields ---------------------------------------------------------

/// Polynomial vector field on the coordinates `(a, b, c, d)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinField {
    coeffs: [MPoly; 4],
}

impl LinField {
    pub fn new(coeffs: [MPoly; 4]) -> Self {
        LinField { coeffs }
    }

    pub fn zero() -> Self {
        LinField::new([MPoly::zero(4), MPoly::zero(4), MPoly::zero(4), MPoly::zero(4)])
    }

    /// Coefficient table of one generator.
    pub fn for_generator(gen: &Generator) -> Result<Self, Error> {
        let var = |i: usize| MPoly::var(4, i);
        let (a, b, c, d) = (var(0), var(1), var(2), var(3));
        let zero = MPoly::zero(4);
        let table = match gen {
            Generator::SlV => [c.clone(), d.sub(&a), zero.clone(), c.neg()],
            Generator::SlW => [b.neg(), zero.clone(), a.sub(&d), b.clone()],
            Generator::SlH => {
                let two = Cx::new(2.0, 0.0);
                [zero.clone(), b.scale(-two), c.scale(two), zero.clone()]
            }
            Generator::SlA => [c.clone(), d.clone(), zero.clone(), zero.clone()],
            Generator::SlB => [zero.clone(), zero.clone(), a.clone(), b.clone()],
            Generator::SlC => [zero.clone(), a.clone(), zero.clone(), c.clone()],
            _ => {
                return Err(Error::UnsupportedPrimitive {
                    context: "symbolic fields cover the SL₂ generators",
                })
            }
        };
        Ok(LinField::new(table))
    }

    pub fn coeff(&self, i: usize) -> &MPoly {
        &self.coeffs[i]
    }

    /// Lie bracket `[X, Y]_i = Σ_j (X_j ∂_j Y_i − Y_j ∂_j X_i)` by exact
    /// coordinate differentiation.
    pub fn bracket(&self, other: &LinField) -> LinField {
        let mut out = [MPoly::zero(4), MPoly::zero(4), MPoly::zero(4), MPoly::zero(4)];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = MPoly::zero(4);
            for j in 0..4 {
                let forward = self.coeffs[j].mul(&other.coeffs[i].diff(j));
                let backward = other.coeffs[j].mul(&self.coeffs[i].diff(j));
                acc = acc.add(&forward.sub(&backward));
            }
            *slot = acc;
        }
        LinField::new(out)
    }

    pub fn scale(&self, s: Cx) -> LinField {
        LinField::new([
            self.coeffs[0].scale(s),
            self.coeffs[1].scale(s),
            self.coeffs[2].scale(s),
            self.coeffs[3].scale(s),
        ])
    }

    pub fn eval(&self, z: &[Cx]) -> Vec<Cx> {
        self.coeffs.iter().map(|p| p.eval(z)).collect()
    }

    /// `a·X_d + d·X_a − b·X_c − c·X_b` at a point: the derivative of
    /// `ad − bc` along the field, zero exactly when the field is tangent
    /// to SL₂.
    pub fn tangency_residual(&self, m: &SL2Elem) -> f64 {
        let v = self.eval(&m.to_vec());
        comp_dot(&[m.a, m.d, -m.b, -m.c], &[v[3], v[0], v[2], v[1]]).norm()
    }
}

/// The commutator table the constructions rely on: `[V, W] = H`,
/// `[H, V] = 2V`, `[H, W] = −2W`, `[A, B] = −a∂a − b∂b + c∂c + d∂d`,
/// antisymmetric counterparts, and zero for repeated arguments.
fn claimed_bracket(g1: &Generator, g2: &Generator) -> Result<Option<LinField>, Error> {
    use Generator::{SlA, SlB, SlH, SlV, SlW};
    if g1 == g2 {
        return Ok(Some(LinField::zero()));
    }
    let two = Cx::new(2.0, 0.0);
    let claim = match (g1, g2) {
        (SlV, SlW) => Some(LinField::for_generator(&SlH)?),
        (SlW, SlV) => Some(LinField::for_generator(&SlH)?.scale(-Cx::new(1.0, 0.0))),
        (SlH, SlV) => Some(LinField::for_generator(&SlV)?.scale(two)),
        (SlV, SlH) => Some(LinField::for_generator(&SlV)?.scale(-two)),
        (SlH, SlW) => Some(LinField::for_generator(&SlW)?.scale(-two)),
        (SlW, SlH) => Some(LinField::for_generator(&SlW)?.scale(two)),
        (SlA, SlB) | (SlB, SlA) => {
            let var = |i: usize| MPoly::var(4, i);
            let sign = if matches!(g1, SlA) { 1.0 } else { -1.0 };
            let field = LinField::new([
                var(0).scale(Cx::new(-sign, 0.0)),
                var(1).scale(Cx::new(-sign, 0.0)),
                var(2).scale(Cx::new(sign, 0.0)),
                var(3).scale(Cx::new(sign, 0.0)),
            ]);
            Some(field)
        }
        _ => None,
    };
    Ok(claim)
}

/// Sup-norm gap at `m` between the symbolic bracket `[g1, g2]` and an
/// explicitly claimed field.
pub fn bracket_residual_against(
    g1: &Generator,
    g2: &Generator,
    claim: &LinField,
    m: &SL2Elem,
) -> Result<f64, Error> {
    let lie = LinField::for_generator(g1)?.bracket(&LinField::for_generator(g2)?);
    let p = m.to_vec();
    Ok(sup_dist(&lie.eval(&p), &claim.eval(&p)))
}

/// Residual of the internal commutator table entry for `(g1, g2)` at `m`.
pub fn bracket_check(g1: &Generator, g2: &Generator, m: &SL2Elem) -> Result<f64, Error> {
    match claimed_bracket(g1, g2)? {
        Some(claim) => bracket_residual_against(g1, g2, &claim, m),
        None => Err(Error::UnsupportedPrimitive { context: "no tabled commutator for this pair" }),
    }
}

// --- interpolation chains ------------------------------------------------------

fn push_tracked(
    chain: &mut AutoChain,
    current: &mut [Vec<Cx>],
    stage: FlowPrimitive,
) -> Result<(), Error> {
    for pt in current.iter_mut() {
        *pt = stage.apply(pt)?;
    }
    chain.push_flow(stage)
}

/// Chain `φ_W^G ∘ φ_V^F ∘ φ_W^1` sending each unipotent `E_k = [[1, k], [0, 1]]`,
/// `1 ≤ k ≤ K`, to `E_{ℓ(k)}`.
///
/// `F` has argument `−c` (a V-invariant) with value `√(ℓ(k)/k) − 1` at the
/// tracked argument `k`; `G` has argument `b` (a W-invariant) and its flow
/// times are solved stage-wise from the tracked images: the `c`-entry of
/// `φ_W^t` is quadratic in `t` with the double root `t = −√(−c/b)`
/// (principal branch; the data are positive reals).
pub fn seq1_chain(l: &[usize]) -> Result<AutoChain, Error> {
    validate_injection(l)?;
    let mut chain = AutoChain::new(4);
    let mut current: Vec<Vec<Cx>> =
        (1..=l.len()).map(|k| SL2Elem::upper(k as f64).to_vec()).collect();

    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::constant(Generator::SlW, Cx::new(1.0, 0.0)),
    )?;

    // F: nodes are the tracked arguments −c (= k), values √(ℓ(k)/k) − 1.
    let args: Vec<Cx> = current.iter().map(|p| -p[2]).collect();
    let values: Vec<Cx> = args
        .iter()
        .zip(l)
        .map(|(k, &lk)| (Cx::new(lk as f64, 0.0) / k).sqrt() - Cx::new(1.0, 0.0))
        .collect();
    let f = Interpolant::fit(&args, &values)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::SlV, ArgSelector::NegCoord(2), f)?,
    )?;

    // G: nodes are the tracked b-coordinates (= ℓ(k)), times solved from
    // the same points.
    let nodes: Vec<Cx> = current.iter().map(|p| p[1]).collect();
    let times: Vec<Cx> = current.iter().map(|p| -(-p[2] / p[1]).sqrt()).collect();
    let g = Interpolant::fit(&nodes, &times)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::SlW, ArgSelector::Coord(1), g)?,
    )?;

    Ok(chain)
}

/// Chain `φ_C^h ∘ φ_B^g ∘ φ_A^f ∘ φ_B^1` sending each diagonal
/// `D_k = diag(k, 1/k)`, `1 ≤ k ≤ K`, to `D_{ℓ(k)}`.
///
/// Stage arguments are generator invariants (`c` for `A`, `a` for `B` and
/// `C`); every flow time is solved at the tracked images, where the flows
/// are affine in `t`: `f` moves `a` to `ℓ(k)` (`t = (ℓ(k) − a)/c`), `g`
/// clears `c` (`t = −c/a`), `h` clears `b` (`t = −b/a`).
pub fn seq2_chain(l: &[usize]) -> Result<AutoChain, Error> {
    validate_injection(l)?;
    let mut chain = AutoChain::new(4);
    let mut current: Vec<Vec<Cx>> =
        (1..=l.len()).map(|k| SL2Elem::diagonal(k as f64).to_vec()).collect();

    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::constant(Generator::SlB, Cx::new(1.0, 0.0)),
    )?;

    // f on the c-data: move a to ℓ(k).
    let nodes: Vec<Cx> = current.iter().map(|p| p[2]).collect();
    let times: Vec<Cx> = current
        .iter()
        .zip(l)
        .map(|(p, &lk)| (Cx::new(lk as f64, 0.0) - p[0]) / p[2])
        .collect();
    let f = Interpolant::fit(&nodes, &times)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::SlA, ArgSelector::Coord(2), f)?,
    )?;

    // g on the a-data: clear c.
    let nodes: Vec<Cx> = current.iter().map(|p| p[0]).collect();
    let times: Vec<Cx> = current.iter().map(|p| -p[2] / p[0]).collect();
    let g = Interpolant::fit(&nodes, &times)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::SlB, ArgSelector::Coord(0), g)?,
    )?;

    // h on the a-data: clear b.
    let nodes: Vec<Cx> = current.iter().map(|p| p[0]).collect();
    let times: Vec<Cx> = current.iter().map(|p| -p[1] / p[0]).collect();
    let h = Interpolant::fit(&nodes, &times)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::SlC, ArgSelector::Coord(0), h)?,
    )?;

    Ok(chain)
}

// --- Haar verification ---------------------------------------------------------

/// Lift differential of the chart section `(a, b, c) ↦ (a, b, c, (1+bc)/a)`.
fn chart_lift(p: &[Cx]) -> CxMatrix {
    let (a, b, c) = (p[0], p[1], p[2]);
    let mut lift = CxMatrix::zeros(4, 3);
    lift.set(0, 0, Cx::new(1.0, 0.0));
    lift.set(1, 1, Cx::new(1.0, 0.0));
    lift.set(2, 2, Cx::new(1.0, 0.0));
    lift.set(3, 0, -(Cx::new(1.0, 0.0) + b * c) / (a * a));
    lift.set(3, 1, c / a);
    lift.set(3, 2, b / a);
    lift
}

/// Chart Jacobian of one stage: rows `(a, b, c)` of `D_stage · lift`.
fn chart_jacobian(stage: &Primitive, p: &[Cx]) -> Result<CxMatrix, Error> {
    let full = stage.jacobian(p)?;
    let lifted = full.mul(&chart_lift(p));
    Ok(CxMatrix::from_fn(3, 3, |i, j| lifted.get(i, j)))
}

/// Deviation of the chain from preserving the Haar form: in the chart
/// `(a, b, c)` with density `1/a`, the residual is
/// `max |det(chart Jacobian) · a_source / a_image − 1|` over samples.
///
/// Per-stage chart determinants multiply along the orbit (on tangent
/// vectors the projection/lift pair is the identity at on-variety points)
/// and the density ratio telescopes, so chains are handled stage-wise.
/// Samples with any orbit point at `|a| < 1e−6` are redrawn; the total
/// redraw budget is 100.
pub fn haar_residual(chain: &AutoChain, _cfg: &ToleranceConfig, seed: u64) -> Result<f64, Error> {
    for p in chain.primitives() {
        let ok = matches!(p, Primitive::Flow(f) if is_sl2_generator(f.generator()));
        if !ok {
            return Err(Error::UnsupportedPrimitive {
                context: "haar_residual expects a chain of SL₂ flows",
            });
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut retries = 0usize;
    let mut worst = 0.0f64;
    let mut done = 0usize;
    while done < HAAR_SAMPLES {
        let a = sample_disc(&mut rng, Cx::new(1.0, 0.0), 0.6);
        let b = sample_disc(&mut rng, Cx::new(0.0, 0.0), 1.0);
        let c = sample_disc(&mut rng, Cx::new(0.0, 0.0), 1.0);
        let d = (Cx::new(1.0, 0.0) + b * c) / a;
        let start = vec![a, b, c, d];

        let mut det = Cx::new(1.0, 0.0);
        let mut cur = start.clone();
        let mut singular = cur[0].norm() < CHART_FLOOR;
        if !singular {
            for stage in chain.primitives() {
                det *= chart_jacobian(stage, &cur)?.lu_det();
                cur = stage.apply(&cur)?;
                if cur[0].norm() < CHART_FLOOR {
                    singular = true;
                    break;
                }
            }
        }
        if singular {
            retries += 1;
            if retries > CHART_RETRIES {
                return Err(Error::ChartSingularity);
            }
            continue;
        }
        let residual = (det * start[0] / cur[0] - Cx::new(1.0, 0.0)).norm();
        worst = worst.max(residual);
        done += 1;
    }
    Ok(worst)
}

// --- prime-mask spanning ----------------------------------------------------------

/// The primes up to a cutoff, used as exact zero sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeMask {
    cutoff: usize,
    primes: Vec<usize>,
}

impl PrimeMask {
    pub fn new(cutoff: usize) -> Self {
        let mut is_prime = vec![true; cutoff + 1];
        for k in 0..is_prime.len().min(2) {
            is_prime[k] = false;
        }
        let mut p = 2usize;
        while p * p <= cutoff {
            if is_prime[p] {
                let mut q = p * p;
                while q <= cutoff {
                    is_prime[q] = false;
                    q += p;
                }
            }
            p += 1;
        }
        let primes = (2..=cutoff).filter(|&k| is_prime[k]).collect();
        PrimeMask { cutoff, primes }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn primes(&self) -> &[usize] {
        &self.primes
    }

    pub fn contains(&self, k: usize) -> bool {
        self.primes.binary_search(&k).is_ok()
    }

    /// The mask element `[[1−k, k], [−k, 1+k]]` (unimodular for every `k`).
    pub fn zero_locus_point(&self, k: usize) -> SL2Elem {
        let kf = k as f64;
        SL2Elem {
            a: Cx::new(1.0 - kf, 0.0),
            b: Cx::new(kf, 0.0),
            c: Cx::new(-kf, 0.0),
            d: Cx::new(1.0 + kf, 0.0),
        }
    }
}

/// Rank of the six masked fields `γ(c)A, δ(d)A, α(a)B, β(b)B,
/// ε(−bc)[A,B], ζ(bd)[A,B]` in the tangent space at `m`.
///
/// The scalar coefficients are product-form polynomials vanishing exactly
/// on their mask nodes (`α` at `{1−k}`, `β` at `{k}`, `γ` at `{−k}`, `δ`
/// at `{1+k}`, `ε` at `{k²}`, `ζ` at `{k(1+k)}` for prime `k`), so at a
/// mask point all six columns are exact zeros and the rank is 0 without
/// thresholding doubt; elsewhere the rank is read from the singular values
/// at a 1e−8 relative cut.
pub fn oka_rank(m: &SL2Elem, mask: &PrimeMask) -> Result<usize, Error> {
    let anchor = Cx::new(0.5, 0.0);
    let nodes = |f: &dyn Fn(f64) -> f64| -> Vec<Cx> {
        mask.primes().iter().map(|&k| Cx::new(f(k as f64), 0.0)).collect()
    };
    let alpha = RootPoly::with_anchor(&nodes(&|k| 1.0 - k), anchor)?;
    let beta = RootPoly::with_anchor(&nodes(&|k| k), anchor)?;
    let gamma = RootPoly::with_anchor(&nodes(&|k| -k), anchor)?;
    let delta = RootPoly::with_anchor(&nodes(&|k| 1.0 + k), anchor)?;
    let epsilon = RootPoly::with_anchor(&nodes(&|k| k * k), anchor)?;
    let zeta = RootPoly::with_anchor(&nodes(&|k| k * (1.0 + k)), anchor)?;

    let field_a = LinField::for_generator(&Generator::SlA)?;
    let field_b = LinField::for_generator(&Generator::SlB)?;
    let field_ab = field_a.bracket(&field_b);
    let p = m.to_vec();
    let va = field_a.eval(&p);
    let vb = field_b.eval(&p);
    let vab = field_ab.eval(&p);

    let scalars = [
        gamma.eval(m.c),
        delta.eval(m.d),
        alpha.eval(m.a),
        beta.eval(m.b),
        epsilon.eval(-m.b * m.c),
        zeta.eval(m.b * m.d),
    ];
    let directions = [&va, &va, &vb, &vb, &vab, &vab];
    let matrix = CxMatrix::from_fn(4, 6, |i, j| scalars[j] * directions[j][i]);

    let sv = singular_values(&matrix);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > 1e-8 * top).count())
}
