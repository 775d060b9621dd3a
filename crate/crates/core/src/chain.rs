//! Automorphism chains: ordered compositions of primitive invertible
//! holomorphic maps (shears, one-parameter flows, coordinate-pair lifts)
//! with exact inverses, analytic Jacobians, and the verifier suite
//! (point-action, symplectic, and volume checks).

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::interp::Interpolant;
use crate::numerics::{
    all_finite, comp_dot, rng_from_seed, sample_polydisc, sup_dist, Cx, CxDd, CxMatrix,
    DdMatrix, ToleranceConfig,
};
use crate::poly::{KrField, KrVariety};

/// Sample count used by the Jacobian-based verifiers.
pub const VERIFY_SAMPLES: usize = 50;
/// Sample count used by round-trip checks.
pub const ROUND_TRIP_SAMPLES: usize = 20;

/// Checks that `l` encodes an injection `k ↦ l[k−1]` of `{1..K}` into the
/// positive integers: nonempty, no zeros, no repeats.
pub(crate) fn validate_injection(l: &[usize]) -> Result<(), Error> {
    if l.is_empty() {
        return Err(Error::EmptyNodes);
    }
    for (i, &li) in l.iter().enumerate() {
        if li == 0 {
            // the interpolation data divide by the image value
            return Err(Error::InjectivityViolation);
        }
        for &lj in &l[..i] {
            if li == lj {
                return Err(Error::InjectivityViolation);
            }
        }
    }
    Ok(())
}

/// Applies the standard symplectic matrix `J = [[0, I], [−I, 0]]` to a
/// vector: `(Jv)_k = v_{n+k}` for `k < n` and `(Jv)_k = −v_{k−n}` for `k ≥ n`.
pub fn j_times(v: &[Cx]) -> Vec<Cx> {
    let dim = v.len();
    assert_eq!(dim % 2, 0, "the symplectic matrix needs even dimension");
    let n = dim / 2;
    (0..dim).map(|k| if k < n { v[n + k] } else { -v[k - n] }).collect()
}

// --- shears -----------------------------------------------------------------

/// One shear `z ↦ z + f(λ·z)·v` with `λ·v = 0`.
///
/// The orthogonality makes the argument `λ·z` invariant under the map, so
/// the inverse is the same shear with `−f`; such a map is the time-1 flow
/// of the complete field `f(λ·z)·v`.
#[derive(Clone, Debug)]
pub struct ShearPrimitive {
    v: Vec<Cx>,
    lambda: Vec<Cx>,
    f: Interpolant,
    forstneric: bool,
}

impl ShearPrimitive {
    /// General shear; rejects zero directions and `λ·v ≠ 0`.
    pub fn new(v: Vec<Cx>, lambda: Vec<Cx>, f: Interpolant) -> Result<Self, Error> {
        if lambda.len() != v.len() {
            return Err(Error::DimensionMismatch { expected: v.len(), got: lambda.len() });
        }
        if v.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let residual = comp_dot(&lambda, &v).norm();
        if residual > 1e-12 {
            return Err(Error::NonOrthogonalShear { residual });
        }
        let forstneric = v.len() % 2 == 0 && sup_dist(&j_times(&v), &lambda) < 1e-12;
        Ok(ShearPrimitive { v, lambda, f, forstneric })
    }

    /// Shear with the symplectic-form functional `λ = Jv`; these preserve
    /// the standard symplectic form in dimension `2n` for any scalar
    /// function, since `λ·v = vᵀJv = 0` by antisymmetry.
    pub fn forstneric(v: Vec<Cx>, f: Interpolant, n: usize) -> Result<Self, Error> {
        if v.len() != 2 * n {
            return Err(Error::DimensionMismatch { expected: 2 * n, got: v.len() });
        }
        if v.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::ZeroDirection);
        }
        let lambda = j_times(&v);
        Ok(ShearPrimitive { v, lambda, f, forstneric: true })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn direction(&self) -> &[Cx] {
        &self.v
    }

    pub fn functional(&self) -> &[Cx] {
        &self.lambda
    }

    pub fn scalar_fn(&self) -> &Interpolant {
        &self.f
    }

    pub fn is_forstneric(&self) -> bool {
        self.forstneric
    }

    /// The scalar argument `λ·z` (compensated dot product).
    pub fn argument(&self, z: &[Cx]) -> Cx {
        comp_dot(&self.lambda, z)
    }

    pub fn apply(&self, z: &[Cx]) -> Vec<Cx> {
        let s = self.f.eval(self.argument(z));
        z.iter().zip(&self.v).map(|(zi, vi)| zi + s * vi).collect()
    }

    fn jacobian(&self, z: &[Cx]) -> CxMatrix {
        let (_, fp) = self.f.eval_deriv(self.argument(z));
        let dim = self.dim();
        let mut jac = CxMatrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                let add = fp * self.v[i] * self.lambda[j];
                jac.set(i, j, jac.get(i, j) + add);
            }
        }
        jac
    }

    /// Double-double Jacobian `I + f′·vλᵀ` with unrounded triple products.
    ///
    /// Rounding each `f′vᵢλⱼ` independently (as the double version must)
    /// perturbs the matrix off the exact rank-1 form by ~eps·|f′|, which is
    /// what the symplectic defect measures; carrying the products in
    /// double-double keeps the rank-1 structure to ~eps², so the defect of
    /// the true composition stays resolvable even when |f′| is large.
    fn jacobian_dd(&self, z: &[Cx]) -> DdMatrix {
        let (_, fp) = self.f.eval_deriv(self.argument(z));
        let dim = self.dim();
        let fp_dd = CxDd::from_cx(fp);
        let mut jac = DdMatrix::identity(dim);
        for i in 0..dim {
            for j in 0..dim {
                let vl = CxDd::from_cx(self.v[i]).mul(CxDd::from_cx(self.lambda[j]));
                jac.set(i, j, jac.get(i, j).add(fp_dd.mul(vl)));
            }
        }
        jac
    }

    /// `det(I + f′·vλᵀ) = 1 + f′·(λ·v)`; the compensated dot cancels the
    /// `λ·v` terms exactly for constructed shears, so this is exactly 1.
    fn det(&self, z: &[Cx]) -> Cx {
        let (_, fp) = self.f.eval_deriv(self.argument(z));
        Cx::new(1.0, 0.0) + fp * comp_dot(&self.lambda, &self.v)
    }

    pub fn inverse(&self) -> Self {
        ShearPrimitive {
            v: self.v.clone(),
            lambda: self.lambda.clone(),
            f: self.f.neg(),
            forstneric: self.forstneric,
        }
    }
}

// --- flows ------------------------------------------------------------------

/// Complete-field generators with closed-form flows.
#[derive(Clone, Debug, PartialEq)]
pub enum Generator {
    /// `c∂a + (d−a)∂b − c∂d` on SL₂ coordinates `(a, b, c, d)`.
    SlV,
    /// `−b∂a + (a−d)∂c + b∂d`.
    SlW,
    /// `−2b∂b + 2c∂c`.
    SlH,
    /// `c∂a + d∂b` (left multiplication by an upper-triangular unipotent).
    SlA,
    /// `a∂c + b∂d` (left multiplication by a lower-triangular unipotent).
    SlB,
    /// `a∂b + c∂d` (right multiplication by an upper-triangular unipotent).
    SlC,
    /// `∂x` on `ℂ×ℂ*`: translation of the first factor.
    ProductX,
    /// `y∂y` on `ℂ×ℂ*`: scaling flow `y ↦ e^t y`.
    ProductY,
    /// `w^m ∂z` on the chart `ℂ×ℂ*`.
    GizPhi { m: u32 },
    /// `z^m w ∂w` on the chart `ℂ×ℂ*`.
    GizPsi { m: u32 },
    /// Variety flow shifting `z₀` by `x²t`.
    KrV { variety: KrVariety },
    /// Variety flow shifting `z₁` by `x²t`.
    KrW { variety: KrVariety },
}

impl Generator {
    pub fn dim(&self) -> usize {
        match self {
            Generator::SlV
            | Generator::SlW
            | Generator::SlH
            | Generator::SlA
            | Generator::SlB
            | Generator::SlC => 4,
            Generator::ProductX
            | Generator::ProductY
            | Generator::GizPhi { .. }
            | Generator::GizPsi { .. } => 2,
            Generator::KrV { variety } | Generator::KrW { variety } => variety.point_dim(),
        }
    }

    /// Closed-form time-`t` flow.
    pub fn flow(&self, t: Cx, z: &[Cx]) -> Result<Vec<Cx>, Error> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        let out = match self {
            Generator::SlV => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                vec![a + c * t, b + (d - a) * t - c * t * t, c, d - c * t]
            }
            Generator::SlW => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                vec![a - b * t, b, c + (a - d) * t - b * t * t, d + b * t]
            }
            Generator::SlH => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                let e = (2.0 * t).exp();
                vec![a, b / e, c * e, d]
            }
            Generator::SlA => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                vec![a + t * c, b + t * d, c, d]
            }
            Generator::SlB => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                vec![a, b, c + t * a, d + t * b]
            }
            Generator::SlC => {
                let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
                vec![a, b + t * a, c, d + t * c]
            }
            Generator::ProductX => vec![z[0] + t, z[1]],
            Generator::ProductY => vec![z[0], t.exp() * z[1]],
            Generator::GizPhi { m } => vec![z[0] + z[1].powu(*m) * t, z[1]],
            Generator::GizPsi { m } => vec![z[0], (z[0].powu(*m) * t).exp() * z[1]],
            Generator::KrV { variety } => variety.flow_point(KrField::V, t, z)?,
            Generator::KrW { variety } => variety.flow_point(KrField::W, t, z)?,
        };
        Ok(out)
    }

    /// Analytic Jacobian of `z ↦ φ^t(z)` with `t` held fixed.
    pub fn flow_jacobian(&self, t: Cx, z: &[Cx]) -> CxMatrix {
        let one = Cx::new(1.0, 0.0);
        match self {
            Generator::SlV => CxMatrix::from_fn(4, 4, |i, j| match (i, j) {
                (0, 0) | (1, 1) | (2, 2) | (3, 3) => one,
                (0, 2) => t,
                (1, 0) => -t,
                (1, 2) => -t * t,
                (1, 3) => t,
                (3, 2) => -t,
                _ => Cx::new(0.0, 0.0),
            }),
            Generator::SlW => CxMatrix::from_fn(4, 4, |i, j| match (i, j) {
                (0, 0) | (1, 1) | (2, 2) | (3, 3) => one,
                (0, 1) => -t,
                (2, 0) => t,
                (2, 1) => -t * t,
                (2, 3) => -t,
                (3, 1) => t,
                _ => Cx::new(0.0, 0.0),
            }),
            Generator::SlH => {
                let e = (2.0 * t).exp();
                let mut m = CxMatrix::identity(4);
                m.set(1, 1, one / e);
                m.set(2, 2, e);
                m
            }
            Generator::SlA => {
                let mut m = CxMatrix::identity(4);
                m.set(0, 2, t);
                m.set(1, 3, t);
                m
            }
            Generator::SlB => {
                let mut m = CxMatrix::identity(4);
                m.set(2, 0, t);
                m.set(3, 1, t);
                m
            }
            Generator::SlC => {
                let mut m = CxMatrix::identity(4);
                m.set(1, 0, t);
                m.set(3, 2, t);
                m
            }
            Generator::ProductX => CxMatrix::identity(2),
            Generator::ProductY => {
                let mut m = CxMatrix::identity(2);
                m.set(1, 1, t.exp());
                m
            }
            Generator::GizPhi { m } => {
                let mut jac = CxMatrix::identity(2);
                if *m > 0 {
                    jac.set(0, 1, *m as f64 * z[1].powu(*m - 1) * t);
                }
                jac
            }
            Generator::GizPsi { m } => {
                let mut jac = CxMatrix::identity(2);
                let e = (z[0].powu(*m) * t).exp();
                if *m > 0 {
                    jac.set(1, 0, *m as f64 * z[0].powu(*m - 1) * t * e * z[1]);
                }
                jac.set(1, 1, e);
                jac
            }
            Generator::KrV { variety } => variety.flow_jacobian(KrField::V, t, z),
            Generator::KrW { variety } => variety.flow_jacobian(KrField::W, t, z),
        }
    }

    /// The flow's velocity `∂φ^t/∂t` at `(t, z)`, needed for the Jacobian of
    /// function-valued flow times.
    pub fn time_derivative(&self, t: Cx, z: &[Cx]) -> Vec<Cx> {
        let zero = Cx::new(0.0, 0.0);
        match self {
            Generator::SlV => {
                let (a, c, d) = (z[0], z[2], z[3]);
                vec![c, (d - a) - 2.0 * c * t, zero, -c]
            }
            Generator::SlW => {
                let (a, b, d) = (z[0], z[1], z[3]);
                vec![-b, zero, (a - d) - 2.0 * b * t, b]
            }
            Generator::SlH => {
                let e = (2.0 * t).exp();
                vec![zero, -2.0 * z[1] / e, 2.0 * z[2] * e, zero]
            }
            Generator::SlA => vec![z[2], z[3], zero, zero],
            Generator::SlB => vec![zero, zero, z[0], z[1]],
            Generator::SlC => vec![zero, z[0], zero, z[2]],
            Generator::ProductX => vec![Cx::new(1.0, 0.0), zero],
            Generator::ProductY => vec![zero, t.exp() * z[1]],
            Generator::GizPhi { m } => vec![z[1].powu(*m), zero],
            Generator::GizPsi { m } => {
                let zm = z[0].powu(*m);
                vec![zero, zm * (zm * t).exp() * z[1]]
            }
            Generator::KrV { variety } => variety.flow_time_derivative(KrField::V, t, z),
            Generator::KrW { variety } => variety.flow_time_derivative(KrField::W, t, z),
        }
    }

    /// A representative domain point for structural (kernel) checks.
    fn sample_domain_point(&self, rng: &mut ChaCha8Rng) -> Vec<Cx> {
        match self {
            Generator::SlV
            | Generator::SlW
            | Generator::SlH
            | Generator::SlA
            | Generator::SlB
            | Generator::SlC => {
                // (a, b, c) chart with a bounded away from 0, d solved
                let a = crate::numerics::sample_disc(rng, Cx::new(1.0, 0.0), 0.6);
                let b = crate::numerics::sample_disc(rng, Cx::new(0.0, 0.0), 1.0);
                let c = crate::numerics::sample_disc(rng, Cx::new(0.0, 0.0), 1.0);
                let d = (Cx::new(1.0, 0.0) + b * c) / a;
                vec![a, b, c, d]
            }
            Generator::ProductX
            | Generator::ProductY
            | Generator::GizPhi { .. }
            | Generator::GizPsi { .. } => {
                let z = crate::numerics::sample_disc(rng, Cx::new(0.0, 0.0), 1.5);
                let w = crate::numerics::sample_disc(rng, Cx::new(0.0, 0.0), 1.0).exp();
                vec![z, w]
            }
            Generator::KrV { variety } | Generator::KrW { variety } => {
                sample_polydisc(rng, &vec![Cx::new(0.0, 0.0); variety.point_dim()], 1.0)
            }
        }
    }
}

/// Scalar coordinate functional feeding a function-valued flow time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgSelector {
    Coord(usize),
    NegCoord(usize),
}

impl ArgSelector {
    pub fn eval(&self, z: &[Cx]) -> Cx {
        match *self {
            ArgSelector::Coord(k) => z[k],
            ArgSelector::NegCoord(k) => -z[k],
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            ArgSelector::Coord(k) | ArgSelector::NegCoord(k) => k,
        }
    }

    pub fn sign(&self) -> f64 {
        match *self {
            ArgSelector::Coord(_) => 1.0,
            ArgSelector::NegCoord(_) => -1.0,
        }
    }
}

/// Constant or function-valued flow time.
#[derive(Clone, Debug)]
pub enum FlowTime {
    Constant(Cx),
    /// `t = f(arg(z))`, valid only when `arg` is constant along the
    /// generator's orbits (checked at construction).
    Fitted { arg: ArgSelector, f: Interpolant },
}

/// One flow stage `z ↦ φ^t(z)` of a named generator.
#[derive(Clone, Debug)]
pub struct FlowPrimitive {
    generator: Generator,
    time: FlowTime,
}

impl FlowPrimitive {
    pub fn constant(generator: Generator, t: Cx) -> Self {
        FlowPrimitive { generator, time: FlowTime::Constant(t) }
    }

    /// Function-valued time `t = f(arg(z))`.
    ///
    /// Runs the kernel condition numerically: the argument functional must be
    /// unchanged (within 1e−9) after flowing time 0.1 from 10 seeded domain
    /// points — otherwise the "shear-like" inverse (negated `f`) would not
    /// invert the map.
    pub fn fitted(generator: Generator, arg: ArgSelector, f: Interpolant) -> Result<Self, Error> {
        if arg.index() >= generator.dim() {
            return Err(Error::DimensionMismatch { expected: generator.dim(), got: arg.index() });
        }
        let mut rng = rng_from_seed(0x6b65726e);
        let mut drift = 0.0f64;
        for _ in 0..10 {
            let p = generator.sample_domain_point(&mut rng);
            let before = arg.eval(&p);
            let q = generator.flow(Cx::new(0.1, 0.0), &p)?;
            drift = drift.max((arg.eval(&q) - before).norm());
        }
        if drift > 1e-9 {
            return Err(Error::KernelViolation { drift });
        }
        Ok(FlowPrimitive { generator, time: FlowTime::Fitted { arg, f } })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn time(&self) -> &FlowTime {
        &self.time
    }

    pub fn dim(&self) -> usize {
        self.generator.dim()
    }

    fn time_at(&self, z: &[Cx]) -> Cx {
        match &self.time {
            FlowTime::Constant(t) => *t,
            FlowTime::Fitted { arg, f } => f.eval(arg.eval(z)),
        }
    }

    pub fn apply(&self, z: &[Cx]) -> Result<Vec<Cx>, Error> {
        self.generator.flow(self.time_at(z), z)
    }

    fn jacobian(&self, z: &[Cx]) -> CxMatrix {
        let t = self.time_at(z);
        let mut jac = self.generator.flow_jacobian(t, z);
        if let FlowTime::Fitted { arg, f } = &self.time {
            let (_, fp) = f.eval_deriv(arg.eval(z));
            let velocity = self.generator.time_derivative(t, z);
            let k = arg.index();
            let factor = fp * arg.sign();
            for i in 0..jac.rows() {
                jac.set(i, k, jac.get(i, k) + velocity[i] * factor);
            }
        }
        jac
    }

    fn det(&self, z: &[Cx]) -> Cx {
        self.jacobian(z).lu_det()
    }

    /// Negated time (kernel condition makes the argument orbit-invariant,
    /// so negation inverts the map exactly).
    pub fn inverse(&self) -> Self {
        let time = match &self.time {
            FlowTime::Constant(t) => FlowTime::Constant(-t),
            FlowTime::Fitted { arg, f } => FlowTime::Fitted { arg: *arg, f: f.neg() },
        };
        FlowPrimitive { generator: self.generator.clone(), time }
    }
}

// --- lifts ------------------------------------------------------------------

/// Embeds a 2-dimensional chain into a larger space on a coordinate pair,
/// acting as the identity on the remaining coordinates.
#[derive(Clone, Debug)]
pub struct LiftPrimitive {
    dim: usize,
    coords: (usize, usize),
    inner: AutoChain,
}

impl LiftPrimitive {
    pub fn new(dim: usize, coords: (usize, usize), inner: AutoChain) -> Result<Self, Error> {
        if inner.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: inner.dim() });
        }
        if coords.0 >= dim || coords.1 >= dim || coords.0 == coords.1 {
            return Err(Error::DimensionMismatch { expected: dim, got: coords.0.max(coords.1) });
        }
        Ok(LiftPrimitive { dim, coords, inner })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> (usize, usize) {
        self.coords
    }

    pub fn inner(&self) -> &AutoChain {
        &self.inner
    }

    pub fn apply(&self, z: &[Cx]) -> Result<Vec<Cx>, Error> {
        let pair = [z[self.coords.0], z[self.coords.1]];
        let image = self.inner.apply(&pair)?;
        let mut out = z.to_vec();
        out[self.coords.0] = image[0];
        out[self.coords.1] = image[1];
        Ok(out)
    }

    fn jacobian(&self, z: &[Cx]) -> Result<CxMatrix, Error> {
        let pair = [z[self.coords.0], z[self.coords.1]];
        let block = self.inner.jacobian_at(&pair)?;
        let mut jac = CxMatrix::identity(self.dim);
        let (p, q) = self.coords;
        jac.set(p, p, block.get(0, 0));
        jac.set(p, q, block.get(0, 1));
        jac.set(q, p, block.get(1, 0));
        jac.set(q, q, block.get(1, 1));
        Ok(jac)
    }

    fn jacobian_dd(&self, z: &[Cx]) -> Result<DdMatrix, Error> {
        let pair = [z[self.coords.0], z[self.coords.1]];
        let block = self.inner.jacobian_dd_at(&pair)?;
        let mut jac = DdMatrix::identity(self.dim);
        let (p, q) = self.coords;
        jac.set(p, p, block.get(0, 0));
        jac.set(p, q, block.get(0, 1));
        jac.set(q, p, block.get(1, 0));
        jac.set(q, q, block.get(1, 1));
        Ok(jac)
    }

    fn det(&self, z: &[Cx]) -> Result<Cx, Error> {
        let pair = [z[self.coords.0], z[self.coords.1]];
        self.inner.volume_det_at(&pair)
    }

    pub fn inverse(&self) -> Self {
        LiftPrimitive { dim: self.dim, coords: self.coords, inner: self.inner.inverse() }
    }
}

// --- primitives and chains ----------------------------------------------------

/// One invertible stage of an automorphism chain.
#[derive(Clone, Debug)]
pub enum Primitive {
    Shear(ShearPrimitive),
    Flow(FlowPrimitive),
    Lift(LiftPrimitive),
}

impl Primitive {
    pub fn dim(&self) -> usize {
        match self {
            Primitive::Shear(s) => s.dim(),
            Primitive::Flow(f) => f.dim(),
            Primitive::Lift(l) => l.dim(),
        }
    }

    pub fn apply(&self, z: &[Cx]) -> Result<Vec<Cx>, Error> {
        let out = match self {
            Primitive::Shear(s) => s.apply(z),
            Primitive::Flow(f) => f.apply(z)?,
            Primitive::Lift(l) => l.apply(z)?,
        };
        if !all_finite(&out) {
            return Err(Error::NonFiniteEvaluation);
        }
        Ok(out)
    }

    pub(crate) fn jacobian(&self, z: &[Cx]) -> Result<CxMatrix, Error> {
        match self {
            Primitive::Shear(s) => Ok(s.jacobian(z)),
            Primitive::Flow(f) => Ok(f.jacobian(z)),
            Primitive::Lift(l) => l.jacobian(z),
        }
    }

    /// Per-stage Jacobian promoted to double-double. Shears build their
    /// rank-1 form directly in extended precision; closed-form flow entries
    /// are already exact-to-double and promote without loss.
    fn jacobian_dd(&self, z: &[Cx]) -> Result<DdMatrix, Error> {
        match self {
            Primitive::Shear(s) => Ok(s.jacobian_dd(z)),
            Primitive::Flow(f) => Ok(DdMatrix::from_cx(&f.jacobian(z))),
            Primitive::Lift(l) => l.jacobian_dd(z),
        }
    }

    fn det(&self, z: &[Cx]) -> Result<Cx, Error> {
        match self {
            Primitive::Shear(s) => Ok(s.det(z)),
            Primitive::Flow(f) => Ok(f.det(z)),
            Primitive::Lift(l) => l.det(z),
        }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Primitive::Shear(s) => Primitive::Shear(s.inverse()),
            Primitive::Flow(f) => Primitive::Flow(f.inverse()),
            Primitive::Lift(l) => Primitive::Lift(l.inverse()),
        }
    }
}

/// Ordered composition of primitives, applied left to right.
#[derive(Clone, Debug)]
pub struct AutoChain {
    dim: usize,
    primitives: Vec<Primitive>,
}

impl AutoChain {
    pub fn new(dim: usize) -> Self {
        AutoChain { dim, primitives: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.primitives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn primitives(&self) -> &[Primitive] {
        &self.primitives
    }

    pub fn push(&mut self, p: Primitive) -> Result<(), Error> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: p.dim() });
        }
        self.primitives.push(p);
        Ok(())
    }

    pub fn push_shear(&mut self, s: ShearPrimitive) -> Result<(), Error> {
        self.push(Primitive::Shear(s))
    }

    pub fn push_flow(&mut self, f: FlowPrimitive) -> Result<(), Error> {
        self.push(Primitive::Flow(f))
    }

    /// Appends all primitives of `other` after this chain's.
    pub fn extend(&mut self, other: &AutoChain) -> Result<(), Error> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        self.primitives.extend(other.primitives.iter().cloned());
        Ok(())
    }

    /// Left-to-right application of all primitives.
    pub fn apply(&self, z: &[Cx]) -> Result<Vec<Cx>, Error> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut cur = z.to_vec();
        for p in &self.primitives {
            cur = p.apply(&cur)?;
        }
        Ok(cur)
    }

    /// The exact inverse: each primitive inverted, order reversed.
    pub fn inverse(&self) -> AutoChain {
        AutoChain {
            dim: self.dim,
            primitives: self.primitives.iter().rev().map(Primitive::inverse).collect(),
        }
    }

    /// Analytic Jacobian of the composition at `z`, via the chain rule over
    /// closed-form per-stage Jacobians (interpolant derivatives included).
    ///
    /// This is the verifier-grade derivative: finite differences on the
    /// composite lose too many digits once interpolant derivatives grow.
    pub fn jacobian_at(&self, z: &[Cx]) -> Result<CxMatrix, Error> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut total = CxMatrix::identity(self.dim);
        let mut cur = z.to_vec();
        for p in &self.primitives {
            let stage = p.jacobian(&cur)?;
            total = stage.mul(&total);
            cur = p.apply(&cur)?;
        }
        Ok(total)
    }

    /// Analytic Jacobian accumulated in double-double arithmetic.
    ///
    /// The chain-rule product is the same as [`AutoChain::jacobian_at`]; only
    /// the accumulation precision differs. Verifiers that compare `DᵀJD`
    /// against `J` need it: with stage derivatives up to ~1e12 the defect of
    /// an exactly symplectic composition still carries an eps·‖D‖² rounding
    /// floor in double, far above the 1e-6 tolerance, while the double-double
    /// floor eps²·‖D‖² stays below it.
    pub fn jacobian_dd_at(&self, z: &[Cx]) -> Result<DdMatrix, Error> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut total = DdMatrix::identity(self.dim);
        let mut cur = z.to_vec();
        for p in &self.primitives {
            let stage = p.jacobian_dd(&cur)?;
            total = stage.mul(&total);
            cur = p.apply(&cur)?;
        }
        Ok(total)
    }

    /// Jacobian determinant of the composition as the product of per-stage
    /// determinants (equal in exact arithmetic; the multiplicative form
    /// avoids the cancellation a composite LU would suffer).
    pub fn volume_det_at(&self, z: &[Cx]) -> Result<Cx, Error> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        let mut det = Cx::new(1.0, 0.0);
        let mut cur = z.to_vec();
        for p in &self.primitives {
            det *= p.det(&cur)?;
            cur = p.apply(&cur)?;
        }
        Ok(det)
    }
}

// --- verification -------------------------------------------------------------

/// Where the Jacobian-based verifiers draw their sample points.
///
/// Constructions whose interpolants have widely spread nodes are meaningful
/// map approximations only near their operating set; sampling in a fixed
/// origin-centered box would probe the interpolants' extrapolation regime,
/// where values grow like the node spread to the node count.
#[derive(Clone, Debug)]
pub enum SampleRegion {
    /// Polydisc of the given radius around a center.
    Polydisc { center: Vec<Cx>, radius: f64 },
    /// Union of polydiscs of the given radius around the listed points;
    /// samples pick a point uniformly, then offset inside its polydisc.
    NearPoints { points: Vec<Vec<Cx>>, radius: f64 },
}

impl SampleRegion {
    /// Origin-centered polydisc — the default radius-2 verification region.
    pub fn origin(dim: usize, radius: f64) -> Self {
        SampleRegion::Polydisc { center: vec![Cx::new(0.0, 0.0); dim], radius }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<Cx> {
        match self {
            SampleRegion::Polydisc { center, radius } => sample_polydisc(rng, center, *radius),
            SampleRegion::NearPoints { points, radius } => {
                use rand::Rng;
                let base = &points[rng.gen_range(0..points.len())];
                sample_polydisc(rng, base, *radius)
            }
        }
    }
}

/// One named residual with its tolerance and verdict.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Marks diagnostic checks that document a known discrepancy: they are
    /// reported but do not count against overall acceptance.
    pub expected_fail: bool,
}

impl Check {
    pub fn new(name: &str, residual: f64, tol: f64) -> Self {
        Check { name: name.to_string(), residual, tol, pass: residual <= tol, expected_fail: false }
    }

    pub fn expecting_failure(mut self) -> Self {
        self.expected_fail = true;
        self
    }
}

/// Named residuals plus everything needed to reproduce them.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub construction_name: String,
    pub checks: Vec<Check>,
    pub sample_seed: u64,
    pub config: ToleranceConfig,
}

impl VerificationReport {
    pub fn new(name: &str, seed: u64, cfg: &ToleranceConfig) -> Self {
        VerificationReport {
            construction_name: name.to_string(),
            checks: Vec::new(),
            sample_seed: seed,
            config: *cfg,
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    /// True iff every non-diagnostic check passes.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass || c.expected_fail)
    }
}

/// Max over samples of `‖DᵀJD − J‖∞` for the chain's analytic Jacobian `D`.
pub fn check_symplectic(
    chain: &AutoChain,
    n: usize,
    cfg: &ToleranceConfig,
    seed: u64,
    region: &SampleRegion,
) -> Result<VerificationReport, Error> {
    if chain.dim() != 2 * n {
        return Err(Error::DimensionMismatch { expected: 2 * n, got: chain.dim() });
    }
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..VERIFY_SAMPLES {
        let z = region.sample(&mut rng);
        let d = chain.jacobian_dd_at(&z)?;
        worst = worst.max(symplectic_defect_dd(&d, n));
    }
    let mut report = VerificationReport::new("symplectic", seed, cfg);
    report.push(Check::new("symplectic", worst, cfg.jac_tol));
    Ok(report)
}

/// `‖DᵀJD − J‖∞` with `JD` formed as a signed row permutation and each
/// entry of `DᵀJD` accumulated with a compensated dot product.
pub fn symplectic_defect(d: &CxMatrix, n: usize) -> f64 {
    let dim = 2 * n;
    debug_assert_eq!(d.rows(), dim);
    let mut jd = CxMatrix::zeros(dim, dim);
    for k in 0..dim {
        for j in 0..dim {
            let val = if k < n { d.get(n + k, j) } else { -d.get(k - n, j) };
            jd.set(k, j, val);
        }
    }
    let mut worst = 0.0f64;
    for i in 0..dim {
        let di = d.col(i);
        for j in 0..dim {
            let entry = comp_dot(&di, &jd.col(j));
            let expected = if j == i + n {
                Cx::new(1.0, 0.0)
            } else if i == j + n {
                Cx::new(-1.0, 0.0)
            } else {
                Cx::new(0.0, 0.0)
            };
            worst = worst.max((entry - expected).norm());
        }
    }
    worst
}

/// `‖DᵀJD − J‖∞` for a double-double Jacobian; the same signed row
/// permutation and entry pattern as [`symplectic_defect`], carried out in
/// extended precision end to end.
pub fn symplectic_defect_dd(d: &DdMatrix, n: usize) -> f64 {
    let dim = 2 * n;
    debug_assert_eq!(d.rows(), dim);
    let mut jd = DdMatrix::zeros(dim, dim);
    for k in 0..dim {
        for j in 0..dim {
            let val = if k < n { d.get(n + k, j) } else { d.get(k - n, j).neg() };
            jd.set(k, j, val);
        }
    }
    let one = CxDd::from_cx(Cx::new(1.0, 0.0));
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            let mut entry = CxDd::ZERO;
            for k in 0..dim {
                entry = entry.add(d.get(k, i).mul(jd.get(k, j)));
            }
            let residual = if j == i + n {
                entry.sub(one)
            } else if i == j + n {
                entry.add(one)
            } else {
                entry
            };
            worst = worst.max(residual.norm());
        }
    }
    worst
}

/// Max over samples of `|det(Jacobian) − 1|`, with the determinant taken as
/// the product of per-stage determinants.
pub fn check_volume(
    chain: &AutoChain,
    cfg: &ToleranceConfig,
    seed: u64,
    region: &SampleRegion,
) -> Result<VerificationReport, Error> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..VERIFY_SAMPLES {
        let z = region.sample(&mut rng);
        let det = chain.volume_det_at(&z)?;
        worst = worst.max((det - Cx::new(1.0, 0.0)).norm());
    }
    let mut report = VerificationReport::new("volume", seed, cfg);
    report.push(Check::new("volume", worst, cfg.jac_tol));
    Ok(report)
}

/// Max over the point list of the sup-norm error `‖chain(pᵢ) − imageᵢ‖∞`.
pub fn verify_tame_action(
    chain: &AutoChain,
    points: &[Vec<Cx>],
    images: &[Vec<Cx>],
    cfg: &ToleranceConfig,
) -> Result<VerificationReport, Error> {
    if points.len() != images.len() {
        return Err(Error::LengthMismatch { left: points.len(), right: images.len() });
    }
    let mut worst = 0.0f64;
    for (p, expected) in points.iter().zip(images) {
        let image = chain.apply(p)?;
        if expected.len() != image.len() {
            return Err(Error::LengthMismatch { left: image.len(), right: expected.len() });
        }
        worst = worst.max(sup_dist(&image, expected));
    }
    let mut report = VerificationReport::new("tame_action", 0, cfg);
    report.push(Check::new("tame_action", worst, cfg.residual_tol));
    Ok(report)
}

/// Max round-trip error `‖chain⁻¹(chain(z)) − z‖∞` over sampled points.
pub fn round_trip_residual(
    chain: &AutoChain,
    seed: u64,
    region: &SampleRegion,
) -> Result<f64, Error> {
    let inv = chain.inverse();
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0f64;
    for _ in 0..ROUND_TRIP_SAMPLES {
        let z = region.sample(&mut rng);
        let back = inv.apply(&chain.apply(&z)?)?;
        worst = worst.max(sup_dist(&back, &z));
    }
    Ok(worst)
}
