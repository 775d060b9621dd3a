//! Shear constructions on ℂⁿ: sending a line's worth of points to arbitrary
//! targets, relabeling points of ℂ² along an axis, and normalizing a finite
//! set into very tame position `(k, 0)`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;

use crate::chain::{AutoChain, ShearPrimitive};
use crate::error::Error;
use crate::interp::Interpolant;
use crate::numerics::{rng_from_seed, Cx};

/// Minimum pairwise distance below which coordinates count as colliding.
const COORD_RESOLUTION: f64 = 1e-9;

pub(crate) fn basis(dim: usize, k: usize) -> Vec<Cx> {
    let mut v = vec![Cx::new(0.0, 0.0); dim];
    v[k] = Cx::new(1.0, 0.0);
    v
}

/// Sends the collinear points `(bᵢ, 0, …, 0)` to targets agreeing in the
/// first coordinate, using one shear per remaining coordinate.
///
/// Each shear `z ↦ z + f_j(z₁)·e_j` (j = 2, …, n) interpolates the j-th
/// target coordinates over the first coordinates `bᵢ`, so the composition
/// moves every `(bᵢ, 0, …, 0)` onto `targets[i]` while each stage leaves
/// `z₁` untouched.
///
/// Errors with [`Error::FirstCoordinateMismatch`] if some target's first
/// coordinate differs from `bᵢ`, and propagates node collisions among the
/// `bᵢ` from the interpolation.
pub fn line_to_targets(b: &[Cx], targets: &[Vec<Cx>], dim: usize) -> Result<AutoChain, Error> {
    if b.len() != targets.len() {
        return Err(Error::LengthMismatch { left: b.len(), right: targets.len() });
    }
    for (i, t) in targets.iter().enumerate() {
        if t.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: t.len() });
        }
        if (t[0] - b[i]).norm() > 1e-12 {
            return Err(Error::FirstCoordinateMismatch { index: i });
        }
    }
    let mut chain = AutoChain::new(dim);
    for j in 1..dim {
        let values: Vec<Cx> = targets.iter().map(|t| t[j]).collect();
        let f = Interpolant::fit(b, &values)?;
        chain.push_shear(ShearPrimitive::new(basis(dim, j), basis(dim, 0), f)?)?;
    }
    Ok(chain)
}

/// Relabels points of ℂ² along the first axis: sends `(αᵢ, 0)` to `(βᵢ, 0)`
/// by a three-shear zig-zag.
///
/// Stage 1 lifts each point to height `i+1` (`y += p(x)`, `p(αᵢ) = i+1`);
/// stage 2 translates horizontally by the difference (`x += q(y)` with
/// `q = βᵢ − αᵢ` at height `i+1`); stage 3 drops back down (`y += r(x)`,
/// `r(βᵢ) = −(i+1)`).  The heights `i+1` separate the points even when `α`
/// and `β` interleave.  Stages 2 and 3 are fitted at the *tracked* images of
/// the points under the earlier stages, so per-stage evaluation noise is
/// never amplified through later interpolants.
pub fn c2_relabel(alpha: &[Cx], beta: &[Cx]) -> Result<AutoChain, Error> {
    if alpha.len() != beta.len() {
        return Err(Error::LengthMismatch { left: alpha.len(), right: beta.len() });
    }
    let mut chain = AutoChain::new(2);
    let mut current: Vec<Vec<Cx>> = alpha.iter().map(|a| vec![*a, Cx::new(0.0, 0.0)]).collect();

    let labels: Vec<Cx> = (0..alpha.len()).map(|i| Cx::new((i + 1) as f64, 0.0)).collect();
    let p = Interpolant::fit(alpha, &labels)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 1), basis(2, 0), p)?)?;

    let heights: Vec<Cx> = current.iter().map(|pt| pt[1]).collect();
    let shifts: Vec<Cx> =
        current.iter().zip(beta).map(|(pt, b)| b - pt[0]).collect();
    let q = Interpolant::fit(&heights, &shifts)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 0), basis(2, 1), q)?)?;

    let xs: Vec<Cx> = current.iter().map(|pt| pt[0]).collect();
    let drops: Vec<Cx> = current.iter().map(|pt| -pt[1]).collect();
    let r = Interpolant::fit(&xs, &drops)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 1), basis(2, 0), r)?)?;
    Ok(chain)
}

/// Appends the shear to the chain and advances the tracked point images.
fn push_tracked(
    chain: &mut AutoChain,
    current: &mut [Vec<Cx>],
    shear: ShearPrimitive,
) -> Result<(), Error> {
    for pt in current.iter_mut() {
        *pt = shear.apply(pt);
    }
    chain.push_shear(shear)
}

/// Moves a finite set of distinct points of ℂ² into very tame position:
/// point `i` (0-indexed) lands on `((i+1), 0)`.
///
/// If two points share an `x`-coordinate (within 1e−9), a preliminary
/// generic shear `x += c·y` with a small seeded `c` separates them; up to 8
/// retries with fresh `c` before giving up with [`Error::GenericityFailure`].
/// Then three shears finish the job: `y += p(x)` lifts point `i` to height
/// `i+1`, `x += q(y)` moves it to first coordinate `i+1`, and `y += r(x)`
/// drops it to the axis.
pub fn very_tame_normalize(points: &[Vec<Cx>], seed: u64) -> Result<AutoChain, Error> {
    for p in points {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
    }
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i][0] - points[j][0]).norm() < COORD_RESOLUTION
                && (points[i][1] - points[j][1]).norm() < COORD_RESOLUTION
            {
                return Err(Error::DuplicatePoints);
            }
        }
    }
    let mut chain = AutoChain::new(2);
    let mut current: Vec<Vec<Cx>> = points.to_vec();

    let needs_separation = |pts: &[Vec<Cx>]| {
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if (pts[i][0] - pts[j][0]).norm() < COORD_RESOLUTION {
                    return true;
                }
            }
        }
        false
    };

    if needs_separation(&current) {
        let mut rng = rng_from_seed(seed);
        let mut separated = false;
        for _ in 0..8 {
            let c = crate::numerics::sample_disc(&mut rng, Cx::new(0.0, 0.0), 0.1);
            let candidate: Vec<Vec<Cx>> =
                current.iter().map(|p| vec![p[0] + c * p[1], p[1]]).collect();
            if !needs_separation(&candidate) {
                let shear = ShearPrimitive::new(
                    basis(2, 0),
                    vec![Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)],
                    Interpolant::fit(
                        &[Cx::new(0.0, 0.0), Cx::new(1.0, 0.0)],
                        &[Cx::new(0.0, 0.0), c],
                    )?,
                )?;
                push_tracked(&mut chain, &mut current, shear)?;
                separated = true;
                break;
            }
        }
        if !separated {
            return Err(Error::GenericityFailure);
        }
    }

    // y += p(x): point i rises to height i+1
    let xs: Vec<Cx> = current.iter().map(|p| p[0]).collect();
    let lift_values: Vec<Cx> = current
        .iter()
        .enumerate()
        .map(|(i, p)| Cx::new((i + 1) as f64, 0.0) - p[1])
        .collect();
    let p = Interpolant::fit(&xs, &lift_values)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 1), basis(2, 0), p)?)?;

    // x += q(y): point i moves to first coordinate i+1
    let heights: Vec<Cx> = current.iter().map(|pt| pt[1]).collect();
    let shift_values: Vec<Cx> = current
        .iter()
        .enumerate()
        .map(|(i, pt)| Cx::new((i + 1) as f64, 0.0) - pt[0])
        .collect();
    let q = Interpolant::fit(&heights, &shift_values)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 0), basis(2, 1), q)?)?;

    // y += r(x): drop to the axis
    let final_xs: Vec<Cx> = current.iter().map(|pt| pt[0]).collect();
    let drops: Vec<Cx> = current.iter().map(|pt| -pt[1]).collect();
    let r = Interpolant::fit(&final_xs, &drops)?;
    push_tracked(&mut chain, &mut current, ShearPrimitive::new(basis(2, 1), basis(2, 0), r)?)?;
    Ok(chain)
}
