//! Constructions on `ℂ_z × ℂ*_w` and on Koras–Russell-type hypersurfaces:
//! the product-of-flows interpolator, the Gizatullin-chart interpolator,
//! and the `x²∂/∂z` family of variety flows.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::chain::{validate_injection, ArgSelector, AutoChain, FlowPrimitive, Generator};
use crate::error::Error;
use crate::interp::Interpolant;
use crate::numerics::{sample_disc, Cx};
use crate::poly::{KrField, KrVariety};

/// Largest exponent fed to `exp` when building interpolation nodes.
const EXP_ARG_CAP: f64 = 30.0;
/// Largest `K` for the product chain (`e^K` stays a comfortable node).
const PRODUCT_MAX_K: usize = 12;
/// Smallest admissible `|w|` on the second factor.
const W_FLOOR: f64 = 1e-12;

/// One point of `ℂ_z × ℂ*_w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CStarPoint {
    pub z: Cx,
    pub w: Cx,
}

impl CStarPoint {
    pub fn new(z: Cx, w: Cx) -> Result<Self, Error> {
        if w.norm() <= W_FLOOR {
            return Err(Error::ZeroW);
        }
        Ok(CStarPoint { z, w })
    }

    pub fn to_vec(&self) -> Vec<Cx> {
        vec![self.z, self.w]
    }

    pub fn from_slice(p: &[Cx]) -> Result<Self, Error> {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
        CStarPoint::new(p[0], p[1])
    }
}

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

/// Product interpolator `F₃ ∘ F₂ ∘ F₁` on `ℂ×ℂ*` sending `(n, 1) ↦ (ℓ(n), 1)`
/// for `1 ≤ n ≤ K`.
///
/// `F₁ = (x, eˣy)` stamps the index into the second factor, `F₂` translates
/// the first factor by `f(y)` fitted on the markers `eⁿ`, and `F₃` rescales
/// the marker away with `g(x)` fitted at the images `ℓ(n)`. All values are
/// solved at tracked points. `K ≤ 12` keeps the largest marker at `e¹²`.
pub fn product_chain(l: &[usize]) -> Result<AutoChain, Error> {
    validate_injection(l)?;
    if l.len() > PRODUCT_MAX_K {
        return Err(Error::OverflowGuard { value: l.len() as f64 });
    }
    let mut chain = AutoChain::new(2);
    let mut current: Vec<Vec<Cx>> =
        (1..=l.len()).map(|n| vec![Cx::new(n as f64, 0.0), Cx::new(1.0, 0.0)]).collect();

    // F₁: y ↦ eˣ y.
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::ProductY, ArgSelector::Coord(0), Interpolant::identity())?,
    )?;

    // F₂: x ↦ x + f(y), f at the actual markers toward the targets.
    let nodes: Vec<Cx> = current.iter().map(|p| p[1]).collect();
    let values: Vec<Cx> = current
        .iter()
        .zip(l)
        .map(|(p, &ln)| Cx::new(ln as f64, 0.0) - p[0])
        .collect();
    let f = Interpolant::fit(&nodes, &values)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::ProductX, ArgSelector::Coord(1), f)?,
    )?;

    // F₃: y ↦ e^{g(x)} y with g clearing the marker.
    let nodes: Vec<Cx> = current.iter().map(|p| p[0]).collect();
    let values: Vec<Cx> = current.iter().map(|p| -p[1].ln()).collect();
    let g = Interpolant::fit(&nodes, &values)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::ProductY, ArgSelector::Coord(0), g)?,
    )?;

    Ok(chain)
}

/// Gizatullin-chart interpolator for the fields `w^m ∂z` and `z^m w ∂w`,
/// sending `(n, 1) ↦ (ℓ(n), 1)` for `1 ≤ n ≤ K`.
///
/// `F₁ = ψ^z` stamps the marker `e^{n^{m+1}}` into `w`, `F₂ = φ^{g(w)}`
/// moves `z` to `ℓ(n)` (`g = (ℓ(n) − z)/wᵐ` at the markers), `F₃ = ψ^{h(z)}`
/// clears the marker (`h = −ln(w)/zᵐ` at the images). Node arguments
/// `n^{m+1}` are capped at 30 so every marker is representable.
pub fn gizatullin_chain(m: u32, l: &[usize]) -> Result<AutoChain, Error> {
    validate_injection(l)?;
    let worst_arg = (l.len() as f64).powi(m as i32 + 1);
    if worst_arg > EXP_ARG_CAP {
        return Err(Error::OverflowGuard { value: worst_arg });
    }
    let mut chain = AutoChain::new(2);
    let mut current: Vec<Vec<Cx>> =
        (1..=l.len()).map(|n| vec![Cx::new(n as f64, 0.0), Cx::new(1.0, 0.0)]).collect();

    // F₁: w ↦ e^{z^m · z} w, i.e. ψ at time z.
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(
            Generator::GizPsi { m },
            ArgSelector::Coord(0),
            Interpolant::identity(),
        )?,
    )?;

    // F₂: z ↦ z + wᵐ g(w) at the actual markers.
    let nodes: Vec<Cx> = current.iter().map(|p| p[1]).collect();
    let values: Vec<Cx> = current
        .iter()
        .zip(l)
        .map(|(p, &ln)| (Cx::new(ln as f64, 0.0) - p[0]) / p[1].powu(m))
        .collect();
    let g = Interpolant::fit(&nodes, &values)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::GizPhi { m }, ArgSelector::Coord(1), g)?,
    )?;

    // F₃: w ↦ e^{z^m h(z)} w clearing the marker.
    let nodes: Vec<Cx> = current.iter().map(|p| p[0]).collect();
    let values: Vec<Cx> = current.iter().map(|p| -p[1].ln() / p[0].powu(m)).collect();
    let h = Interpolant::fit(&nodes, &values)?;
    push_tracked(
        &mut chain,
        &mut current,
        FlowPrimitive::fitted(Generator::GizPsi { m }, ArgSelector::Coord(0), h)?,
    )?;

    Ok(chain)
}

/// Residual `|x²y − a(z) − x·b(z)|` of the defining equation at `p`.
pub fn kr_residual(p: &[Cx], var: &KrVariety) -> f64 {
    var.residual(p)
}

/// Time-`t` flow of one commuting field on the hypersurface
/// `x²y = a(z) + x·b(z)`: the target `z`-coordinate shifts by `x²t`, `y`
/// absorbs the matching finite Taylor increment, everything else is fixed.
///
/// The point must already satisfy the defining equation within 1e−8.
pub fn kr_flow(field: KrField, t: Cx, p: &[Cx], var: &KrVariety) -> Result<Vec<Cx>, Error> {
    let residual = kr_residual(p, var);
    if !(residual <= 1e-8) {
        return Err(Error::OffVariety { residual });
    }
    var.flow_point(field, t, p)
}

/// A random point of the hypersurface: `|x|` log-uniform in
/// `[10⁻⁸, 2]` with uniform phase, `z` in the unit polydisc, and `y`
/// solved exactly from the defining equation.
pub fn sample_on_variety(var: &KrVariety, rng: &mut ChaCha8Rng) -> Vec<Cx> {
    let log_lo = (1e-8f64).ln();
    let log_hi = (2.0f64).ln();
    let radius = (log_lo + (log_hi - log_lo) * rng.gen::<f64>()).exp();
    let phase = 2.0 * core::f64::consts::PI * rng.gen::<f64>();
    let x = Cx::new(radius * phase.cos(), radius * phase.sin());
    let z: Vec<Cx> =
        (0..=var.n()).map(|_| sample_disc(rng, Cx::new(0.0, 0.0), 1.0)).collect();
    let y = (var.a().eval(&z) + x * var.b().eval(&z)) / (x * x);
    let mut p = vec![x, y];
    p.extend(z);
    p
}
