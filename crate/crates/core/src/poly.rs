//! Sparse multivariate polynomials over ℂ, and the varieties
//! `x²y = a(z) + x·b(z)` they define, together with the complete flows that
//! shift one `z`-variable by `x²t`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;

use crate::error::Error;
use crate::numerics::{Cx, CxMatrix};

/// Sparse multivariate polynomial: a sum of `coeff · ∏ varⱼ^expⱼ` terms.
///
/// Terms are kept sorted by exponent vector with like terms merged and exact
/// zeros dropped, so equality of representations is equality of polynomials
/// with exactly representable coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MPoly {
    nvars: usize,
    terms: Vec<(Cx, Vec<u32>)>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Cx) -> Self {
        let mut p = MPoly { nvars, terms: vec![(c, vec![0; nvars])] };
        p.normalize();
        p
    }

    /// The coordinate polynomial `z_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars, "variable index out of range");
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        MPoly { nvars, terms: vec![(Cx::new(1.0, 0.0), exps)] }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The `(coefficient, exponent vector)` terms, sorted by exponents.
    pub fn terms(&self) -> impl Iterator<Item = (Cx, &[u32])> + '_ {
        self.terms.iter().map(|(c, e)| (*c, e.as_slice()))
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(Cx, Vec<u32>)> = Vec::with_capacity(self.terms.len());
        for (c, e) in self.terms.drain(..) {
            match merged.last_mut() {
                Some((mc, me)) if *me == e => *mc += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| c.re != 0.0 || c.im != 0.0);
        self.terms = merged;
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let mut p = MPoly { nvars: self.nvars, terms };
        p.normalize();
        p
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(c, e)| (-c, e.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: Cx) -> MPoly {
        let mut p = MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(c, e)| (c * s, e.clone())).collect(),
        };
        p.normalize();
        p
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, ea) in &self.terms {
            for (cb, eb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                terms.push((ca * cb, exps));
            }
        }
        let mut p = MPoly { nvars: self.nvars, terms };
        p.normalize();
        p
    }

    /// Partial derivative with respect to variable `i`.
    pub fn diff(&self, i: usize) -> MPoly {
        assert!(i < self.nvars, "variable index out of range");
        let mut terms = Vec::new();
        for (c, e) in &self.terms {
            if e[i] > 0 {
                let mut exps = e.clone();
                exps[i] -= 1;
                terms.push((c * e[i] as f64, exps));
            }
        }
        let mut p = MPoly { nvars: self.nvars, terms };
        p.normalize();
        p
    }

    pub fn eval(&self, vals: &[Cx]) -> Cx {
        debug_assert_eq!(vals.len(), self.nvars);
        let mut acc = Cx::new(0.0, 0.0);
        for (c, e) in &self.terms {
            let mut term = *c;
            for (v, &exp) in vals.iter().zip(e) {
                if exp > 0 {
                    term *= v.powu(exp);
                }
            }
            acc += term;
        }
        acc
    }
}

/// Which `z`-variable a variety flow shifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrField {
    /// Shifts `z₀` by `x²t`.
    V,
    /// Shifts `z₁` by `x²t`.
    W,
}

impl KrField {
    pub fn target_index(self) -> usize {
        match self {
            KrField::V => 0,
            KrField::W => 1,
        }
    }
}

/// The hypersurface `x²y = a(z) + x·b(z)` in variables `(x, y, z₀..z_n)`,
/// with `a`, `b` polynomials in the `z`-variables.
#[derive(Clone, Debug, PartialEq)]
pub struct KrVariety {
    n: usize,
    a: MPoly,
    b: MPoly,
}

impl KrVariety {
    /// `a`, `b` must be polynomials in `n + 1` variables `z₀..z_n`.
    pub fn new(n: usize, a: MPoly, b: MPoly) -> Result<Self, Error> {
        if a.nvars() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: a.nvars() });
        }
        if b.nvars() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: b.nvars() });
        }
        Ok(KrVariety { n, a, b })
    }

    /// The cubic threefold `x²y + x + z² + w³ = 0`, i.e. `a = −(z₀² + z₁³)`,
    /// `b = −1`.
    pub fn kr_cubic() -> Self {
        let z0 = MPoly::var(2, 0);
        let z1 = MPoly::var(2, 1);
        let a = z0.mul(&z0).add(&z1.mul(&z1).mul(&z1)).neg();
        let b = MPoly::constant(2, Cx::new(-1.0, 0.0));
        KrVariety { n: 1, a, b }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Ambient dimension of the points this variety's flows act on.
    pub fn point_dim(&self) -> usize {
        self.n + 3
    }

    pub fn a(&self) -> &MPoly {
        &self.a
    }

    pub fn b(&self) -> &MPoly {
        &self.b
    }

    /// Defining-equation residual `|x²y − a(z) − x·b(z)|`.
    pub fn residual(&self, p: &[Cx]) -> f64 {
        debug_assert_eq!(p.len(), self.point_dim());
        let (x, y, z) = (p[0], p[1], &p[2..]);
        (x * x * y - self.a.eval(z) - x * self.b.eval(z)).norm()
    }

    /// Iterated target-variable derivatives `a^(k)`, `b^(k)` for `k ≥ 1`,
    /// up to the first index where both vanish.
    fn taylor_derivatives(&self, tau: usize) -> (Vec<MPoly>, Vec<MPoly>) {
        let mut da = Vec::new();
        let mut db = Vec::new();
        let mut ak = self.a.diff(tau);
        let mut bk = self.b.diff(tau);
        while !ak.is_zero() || !bk.is_zero() {
            da.push(ak.clone());
            db.push(bk.clone());
            ak = ak.diff(tau);
            bk = bk.diff(tau);
        }
        (da, db)
    }

    /// The y-increment of the flow, written as the finite Taylor expansion
    ///
    /// `Δy = Σ_{k≥1} a^(k)(z)/k! · x^(2k−2) t^k + Σ_{k≥1} b^(k)(z)/k! · x^(2k−1) t^k`,
    ///
    /// which agrees with `[a(z′) − a(z) + x(b(z′) − b(z))]/x²` for `z′ = z + x²t·e_τ`
    /// in exact arithmetic and extends it across `x = 0` with no cancellation.
    fn delta_y(&self, tau: usize, t: Cx, x: Cx, z: &[Cx]) -> Cx {
        let (da, db) = self.taylor_derivatives(tau);
        let mut delta = Cx::new(0.0, 0.0);
        let mut fact = 1.0f64;
        for (i, (ak, bk)) in da.iter().zip(&db).enumerate() {
            let k = (i + 1) as u32;
            fact *= k as f64;
            let t_pow = t.powu(k);
            delta += ak.eval(z) / fact * x.powu(2 * k - 2) * t_pow;
            delta += bk.eval(z) / fact * x.powu(2 * k - 1) * t_pow;
        }
        delta
    }

    /// Time-`t` flow of the field shifting `z_τ` by `x²`: `x` and the other
    /// `z`-variables are unchanged, `z_τ += x²t`, and `y` gains [`Self::delta_y`].
    /// Polynomial in all inputs, hence defined on all of the ambient space; it
    /// preserves the defining equation identically.
    pub fn flow_point(&self, field: KrField, t: Cx, p: &[Cx]) -> Result<Vec<Cx>, Error> {
        let tau = field.target_index();
        if p.len() != self.point_dim() {
            return Err(Error::DimensionMismatch { expected: self.point_dim(), got: p.len() });
        }
        if tau > self.n {
            return Err(Error::UnsupportedPrimitive { context: "flow target beyond variety variables" });
        }
        let (x, z) = (p[0], &p[2..]);
        let mut out = p.to_vec();
        out[2 + tau] += x * x * t;
        out[1] += self.delta_y(tau, t, x, z);
        Ok(out)
    }

    /// Analytic Jacobian of the time-`t` flow map at `p` (t held fixed).
    pub fn flow_jacobian(&self, field: KrField, t: Cx, p: &[Cx]) -> CxMatrix {
        let tau = field.target_index();
        let dim = self.point_dim();
        debug_assert_eq!(p.len(), dim);
        let (x, z) = (p[0], &p[2..]);
        let mut jac = CxMatrix::identity(dim);
        // z_τ row: ∂(z_τ + x²t)/∂x = 2xt
        jac.set(2 + tau, 0, 2.0 * x * t);
        // y row: derivatives of Δy
        let (da, db) = self.taylor_derivatives(tau);
        let mut ddx = Cx::new(0.0, 0.0);
        let mut fact = 1.0f64;
        for (i, (ak, bk)) in da.iter().zip(&db).enumerate() {
            let k = (i + 1) as u32;
            fact *= k as f64;
            let t_pow = t.powu(k);
            if k >= 2 {
                ddx += ak.eval(z) / fact * (2 * k - 2) as f64 * x.powu(2 * k - 3) * t_pow;
            }
            ddx += bk.eval(z) / fact * (2 * k - 1) as f64 * x.powu(2 * k - 2) * t_pow;
        }
        jac.set(1, 0, ddx);
        for j in 0..=self.n {
            let mut ddz = Cx::new(0.0, 0.0);
            let mut factj = 1.0f64;
            for (i, (ak, bk)) in da.iter().zip(&db).enumerate() {
                let k = (i + 1) as u32;
                factj *= k as f64;
                let t_pow = t.powu(k);
                ddz += ak.diff(j).eval(z) / factj * x.powu(2 * k - 2) * t_pow;
                ddz += bk.diff(j).eval(z) / factj * x.powu(2 * k - 1) * t_pow;
            }
            jac.set(1, 2 + j, ddz);
        }
        jac
    }

    /// `∂φ^t/∂t` at `(t, p)` — the flow's velocity, for function-valued times.
    pub fn flow_time_derivative(&self, field: KrField, t: Cx, p: &[Cx]) -> Vec<Cx> {
        let tau = field.target_index();
        let dim = self.point_dim();
        debug_assert_eq!(p.len(), dim);
        let (x, z) = (p[0], &p[2..]);
        let mut vel = vec![Cx::new(0.0, 0.0); dim];
        vel[2 + tau] = x * x;
        let (da, db) = self.taylor_derivatives(tau);
        let mut ddt = Cx::new(0.0, 0.0);
        let mut fact = 1.0f64;
        for (i, (ak, bk)) in da.iter().zip(&db).enumerate() {
            let k = (i + 1) as u32;
            fact *= k as f64;
            let t_pow = if k >= 2 { t.powu(k - 1) } else { Cx::new(1.0, 0.0) };
            ddt += ak.eval(z) / fact * (k as f64) * x.powu(2 * k - 2) * t_pow;
            ddt += bk.eval(z) / fact * (k as f64) * x.powu(2 * k - 1) * t_pow;
        }
        vel[1] = ddt;
        vel
    }
}
