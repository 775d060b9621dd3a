//! Finite-stage point matching in ℂ²: a composition of volume shears, each
//! measurably small on a growing compact box, that maps one finite point
//! list onto another while leaving already-matched targets exactly fixed.
//!
//! The ε-closeness of every stage is *measured* on the box grid (there is no
//! constructive a-priori bound at this scale) and enforced by damping: each
//! shear's scalar function receives zero nodes spread over the box boundary,
//! roughly doubling per retry round, until the grid deviation meets the
//! stage target or the rounds are exhausted — in which case the construction
//! fails loudly with the best deviation it reached.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;
use rand::Rng;

use crate::chain::{AutoChain, ShearPrimitive};
use crate::error::Error;
use crate::euclid::basis;
use crate::interp::{Interpolant, MAX_NODES};
use crate::numerics::{max_deviation, rng_from_seed, sup_norm, Cx, ToleranceConfig};

/// Smallest admissible ratio of a shear key's modulus to the box radius.
///
/// A shear keyed at modulus `≤` the box radius takes its full value at a
/// grid point, so no amount of damping can make it small on the box; the
/// 25% clearance keeps the per-ring-node decay factor at most 0.8.
const KEY_CLEARANCE: f64 = 1.25;
/// Minimum distance between a shear's key and any of its zero nodes: a key
/// closer than this to a zero inflates the polynomial everywhere else.
const KEY_SEPARATION: f64 = 1e-3;
/// Ring nodes landing this close to an existing zero node are dropped.
const RING_DEDUPE: f64 = 1e-6;
/// Fixed-point key coordinates closer than this collapse to one zero node.
const FIX_RESOLUTION: f64 = 1e-9;
/// Damping schedule: zero nodes per ring, one entry per retry round.
const DAMPING_ROUNDS: [usize; 6] = [0, 4, 8, 16, 32, 48];
/// 2π(1 − 1/φ); irrational rotations keep retry geometry collision-free.
const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
/// Waypoint angles tried before declaring the configuration degenerate.
const WAYPOINT_TRIES: usize = 8;

/// Polydisc stand-in for one compact of an exhaustion schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactBox {
    /// Polydisc radius; must be positive, and strictly increasing along a
    /// schedule (enforced by [`equivalence_chain`], not by this type).
    pub radius: f64,
}

impl CompactBox {
    pub fn new(radius: f64) -> Self {
        debug_assert!(radius > 0.0 && radius.is_finite(), "box radius {radius} must be positive");
        CompactBox { radius }
    }
}

/// Per-stage record of the matching run.
#[derive(Clone, Debug, PartialEq)]
pub struct StageLog {
    /// 1-based stage number.
    pub stage: usize,
    /// The ε_k this stage had to meet.
    pub epsilon_target: f64,
    /// Grid-measured deviation of this stage's map from the identity on the
    /// box it was constrained on ([`CompactBox::radius`] = `box_radius`).
    pub measured_deviation: f64,
    /// Pairs matched once this stage completed.
    pub matched_pairs: usize,
    /// Ring zero nodes each shear of this stage carried.
    pub damping_nodes_used: usize,
    /// Radius of the box the deviation was measured on (the previous
    /// schedule compact).
    pub box_radius: f64,
    /// Index one past this stage's last primitive in the composed chain.
    pub primitives_end: usize,
}

/// Key coordinates of the fixed points, per plane: `keys[0]` holds first
/// coordinates (zeros of every `y += p(x)` shear), `keys[1]` second
/// coordinates (zeros of every `x += q(y)` shear). Deduplicated so
/// coincident coordinates become a single zero node.
fn fixed_keys(fixed: &[Vec<Cx>]) -> Result<[Vec<Cx>; 2], Error> {
    let mut keys = [Vec::new(), Vec::new()];
    for p in fixed {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
        for c in 0..2 {
            if keys[c].iter().all(|k: &Cx| (*k - p[c]).norm() > FIX_RESOLUTION) {
                keys[c].push(p[c]);
            }
        }
    }
    Ok(keys)
}

/// A route is a list of single-coordinate moves `(coord, target)`; the shear
/// realizing a move is keyed on the *other* coordinate's current value.
type Route = Vec<(usize, Cx)>;

/// Walks the route, checking every keyed step: the key must clear the box
/// radius (else damping can never win) and stay [`KEY_SEPARATION`] away from
/// every zero node in its plane (else the shear cannot both vanish there and
/// take its value at the key). Steps whose target already equals the current
/// coordinate are skipped, exactly as the builder skips them.
fn route_is_buildable(route: &[(usize, Cx)], a: &[Cx], keys: &[Vec<Cx>; 2], radius: f64) -> bool {
    let mut cur = [a[0], a[1]];
    for &(c, target) in route {
        if target == cur[c] {
            continue;
        }
        let key = cur[1 - c];
        if key.norm() < KEY_CLEARANCE * radius
            || keys[1 - c].iter().any(|f| (key - f).norm() < KEY_SEPARATION)
        {
            return false;
        }
        cur[c] = target;
    }
    true
}

/// Picks a two-shear direct route when one is buildable, otherwise routes
/// through a waypoint coordinate outside the box (three shears), retrying
/// the waypoint angle along the golden-angle sequence.
fn select_route(a: &[Cx], b: &[Cx], keys: &[Vec<Cx>; 2], radius: f64) -> Option<Route> {
    let direct: [Route; 2] =
        [vec![(1, b[1]), (0, b[0])], vec![(0, b[0]), (1, b[1])]];
    for route in direct {
        if route_is_buildable(&route, a, keys, radius) {
            return Some(route);
        }
    }
    for j in 0..WAYPOINT_TRIES {
        let t = Cx::from_polar(1.5 * radius + 1.0, GOLDEN_ANGLE * (j + 1) as f64);
        let detours: [Route; 2] =
            [vec![(1, t), (0, b[0]), (1, b[1])], vec![(0, t), (1, b[1]), (0, b[0])]];
        for route in detours {
            if route_is_buildable(&route, a, keys, radius) {
                return Some(route);
            }
        }
    }
    None
}

/// Builds the route as plane shears, each fit at the tracked current point
/// with `ring` zero nodes spread over the box boundary circle in its
/// argument plane, plus exact zeros at every fixed key.
fn build_with_damping(
    route: &[(usize, Cx)],
    a: &[Cx],
    keys: &[Vec<Cx>; 2],
    radius: f64,
    ring: usize,
) -> Result<AutoChain, Error> {
    let mut chain = AutoChain::new(2);
    let mut cur = a.to_vec();
    for (step, &(c, target)) in route.iter().enumerate() {
        if target == cur[c] {
            continue;
        }
        let key = cur[1 - c];
        let delta = target - cur[c];
        let mut zeros = keys[1 - c].clone();
        if ring > 0 {
            let offset = GOLDEN_ANGLE * (step + 1) as f64 + 0.05 * ring as f64;
            for j in 0..ring {
                let node =
                    Cx::from_polar(radius, offset + core::f64::consts::TAU * j as f64 / ring as f64);
                if (node - key).norm() > KEY_SEPARATION
                    && zeros.iter().all(|z| (node - *z).norm() > RING_DEDUPE)
                {
                    zeros.push(node);
                }
            }
        }
        let f = Interpolant::fit_damped(&[key], &[delta], &zeros)?;
        let shear = ShearPrimitive::new(basis(2, c), basis(2, 1 - c), f)?;
        cur = shear.apply(&cur);
        chain.push_shear(shear)?;
    }
    Ok(chain)
}

/// [`move_point_fixing`] plus the measured deviation and ring size actually
/// used, for stage logging.
pub(crate) fn move_point_fixing_detailed(
    a: &[Cx],
    b: &[Cx],
    fixed: &[Vec<Cx>],
    boundary: &CompactBox,
    eps: f64,
) -> Result<(AutoChain, f64, usize), Error> {
    for p in [a, b] {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
    }
    debug_assert!(eps > 0.0, "deviation target {eps} must be positive");
    if a[0] == b[0] && a[1] == b[1] {
        return Ok((AutoChain::new(2), 0.0, 0));
    }
    let keys = fixed_keys(fixed)?;
    let radius = boundary.radius;
    let route = select_route(a, b, &keys, radius).ok_or(Error::GenericityFailure)?;

    let cfg = ToleranceConfig::default();
    let budget = (MAX_NODES - 1).saturating_sub(keys[0].len().max(keys[1].len()));
    let mut best: Option<(AutoChain, f64, usize)> = None;
    let mut previous = usize::MAX;
    for &m in &DAMPING_ROUNDS {
        let ring = m.min(budget);
        if ring == previous {
            continue;
        }
        previous = ring;
        let chain = build_with_damping(&route, a, &keys, radius, ring)?;
        let dev = max_deviation(|z| chain.apply(z), |z| Ok(z.to_vec()), radius, 2, &cfg)?;
        if best.as_ref().is_none_or(|(_, d, _)| dev < *d) {
            best = Some((chain, dev, ring));
        }
        // aim for half the target so grid-off measurement noise has headroom
        if dev <= 0.5 * eps {
            break;
        }
    }
    let (chain, dev, ring) = best.expect("the m = 0 round always runs");
    if dev <= eps {
        Ok((chain, dev, ring))
    } else {
        Err(Error::DampingExhausted { measured: dev })
    }
}

/// A chain of at most three volume shears mapping `a ↦ b`, fixing every
/// point of `fixed` exactly (their coordinates are zero nodes of every
/// shear function), with grid-measured deviation from the identity on the
/// box at most `eps`.
///
/// `a` and `b` must be keyable outside the box: each route step's key
/// coordinate needs modulus at least 25% beyond the box radius and
/// macroscopic separation from the fixed keys; when no direct route
/// qualifies, a waypoint outside the box is tried along the golden-angle
/// sequence. Returns [`Error::GenericityFailure`] if every route is
/// blocked, [`Error::DampingExhausted`] if six damping rounds cannot meet
/// `eps`.
pub fn move_point_fixing(
    a: &[Cx],
    b: &[Cx],
    fixed: &[Vec<Cx>],
    boundary: &CompactBox,
    eps: f64,
) -> Result<AutoChain, Error> {
    move_point_fixing_detailed(a, b, fixed, boundary, eps).map(|(chain, _, _)| chain)
}

/// Composes per-pair stages into one chain mapping `a_pts[i] ↦ b_pts[i]`
/// for every `i`, with stage `k` measurably `ε₀·growth⁻ᵏ`-close to the
/// identity on the `k`-th schedule box.
///
/// Pairs are matched in order of increasing `‖b‖∞`; each box grows to
/// contain the newly matched target (`r_k = max(r_{k−1} + ε_k,
/// ‖b_k‖∞ + 0.1·ε_k)`), so matched targets stay inside all later boxes.
/// Every stage fixes exactly, as zero nodes, both the already-matched
/// targets and the *current positions of all unmatched points* — the
/// damped shears grow fast beyond their key radius, so an unprotected
/// unmatched point would be flung beyond numerical recovery.
///
/// `growth` must exceed 1 for the ε-schedule to telescope.
pub fn equivalence_chain(
    a_pts: &[Vec<Cx>],
    b_pts: &[Vec<Cx>],
    eps0: f64,
    growth: f64,
) -> Result<(AutoChain, Vec<StageLog>), Error> {
    if a_pts.len() != b_pts.len() {
        return Err(Error::LengthMismatch { left: a_pts.len(), right: b_pts.len() });
    }
    debug_assert!(eps0 > 0.0, "schedule base {eps0} must be positive");
    debug_assert!(growth > 1.0, "schedule growth {growth} must exceed 1");
    for p in a_pts.iter().chain(b_pts) {
        if p.len() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: p.len() });
        }
    }
    for list in [a_pts, b_pts] {
        for i in 0..list.len() {
            for j in i + 1..list.len() {
                if crate::numerics::sup_dist(&list[i], &list[j]) < FIX_RESOLUTION {
                    return Err(Error::DuplicatePoints);
                }
            }
        }
    }
    if a_pts.is_empty() {
        return Ok((AutoChain::new(2), Vec::new()));
    }

    let mut order: Vec<usize> = (0..a_pts.len()).collect();
    order.sort_by(|&i, &j| {
        sup_norm(&b_pts[i]).partial_cmp(&sup_norm(&b_pts[j])).expect("finite norms").then(i.cmp(&j))
    });

    let mut radius =
        0.5 * a_pts.iter().chain(b_pts).map(|p| sup_norm(p)).fold(f64::INFINITY, f64::min);
    if !(radius > 0.0) {
        return Err(Error::ScheduleViolation { stage: 0 });
    }

    let mut cur: Vec<Vec<Cx>> = a_pts.to_vec();
    let mut matched: Vec<Vec<Cx>> = Vec::new();
    let mut chain = AutoChain::new(2);
    let mut logs = Vec::new();

    for (idx, &i) in order.iter().enumerate() {
        let stage = idx + 1;
        let eps_k = eps0 / growth.powi(stage as i32);
        if sup_norm(&cur[i]) <= radius || sup_norm(&b_pts[i]) <= radius {
            return Err(Error::ScheduleViolation { stage });
        }
        // matched targets are fixed by contract; unmatched current points
        // are fixed as protection so no stage moves a point it doesn't own
        let mut fixed = matched.clone();
        fixed.extend(order[idx + 1..].iter().map(|&j| cur[j].clone()));
        let (stage_chain, dev, ring) =
            move_point_fixing_detailed(&cur[i], &b_pts[i], &fixed, &CompactBox::new(radius), eps_k)?;
        for p in cur.iter_mut() {
            *p = stage_chain.apply(p)?;
        }
        chain.extend(&stage_chain)?;
        logs.push(StageLog {
            stage,
            epsilon_target: eps_k,
            measured_deviation: dev,
            matched_pairs: stage,
            damping_nodes_used: ring,
            box_radius: radius,
            primitives_end: chain.len(),
        });
        matched.push(b_pts[i].clone());
        radius = (radius + eps_k).max(sup_norm(&b_pts[i]) + 0.1 * eps_k);
    }
    Ok((chain, logs))
}

/// A seeded random matching instance compatible with the growing-box
/// schedule: pair `p`'s four coordinates all have modulus in a narrow band
/// around `2·1.4ᵖ` with uniform phases, so every stage's keys clear its box
/// by the 25% margin, and all coordinates in each plane are pairwise at
/// least 0.25 apart (resampled otherwise).
pub fn sample_instance(pairs: usize, seed: u64) -> (Vec<Vec<Cx>>, Vec<Vec<Cx>>) {
    let mut rng = rng_from_seed(seed);
    loop {
        let mut a_pts = Vec::with_capacity(pairs);
        let mut b_pts = Vec::with_capacity(pairs);
        for p in 0..pairs {
            let base = 2.0 * 1.4f64.powi(p as i32);
            let mut coord = || {
                let modulus = base * (1.0 + 0.025 * rng.gen::<f64>());
                Cx::from_polar(modulus, core::f64::consts::TAU * rng.gen::<f64>())
            };
            a_pts.push(vec![coord(), coord()]);
            b_pts.push(vec![coord(), coord()]);
        }
        let mut separated = true;
        for c in 0..2 {
            let coords: Vec<Cx> =
                a_pts.iter().chain(&b_pts).map(|pt: &Vec<Cx>| pt[c]).collect();
            for i in 0..coords.len() {
                for j in i + 1..coords.len() {
                    separated &= (coords[i] - coords[j]).norm() >= 0.25;
                }
            }
        }
        if separated {
            return (a_pts, b_pts);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{check_volume, SampleRegion};
    use crate::numerics::sup_dist;

    fn pt(x: f64, y: f64) -> Vec<Cx> {
        vec![Cx::new(x, 0.0), Cx::new(y, 0.0)]
    }

    fn deviation_from_identity(chain: &AutoChain, radius: f64) -> f64 {
        let cfg = ToleranceConfig::default();
        max_deviation(|z| chain.apply(z), |z| Ok(z.to_vec()), radius, 2, &cfg).unwrap()
    }

    #[test]
    fn coincident_endpoints_give_an_empty_chain() {
        let a = pt(3.0, 4.0);
        let chain =
            move_point_fixing(&a, &a, &[pt(5.0, 1.0)], &CompactBox::new(1.0), 0.1).unwrap();
        assert!(chain.is_empty());
        assert_eq!(deviation_from_identity(&chain, 1.0), 0.0);
    }

    #[test]
    fn vertical_move_fixes_the_bystander_and_meets_its_budget() {
        let a = pt(3.0, 0.0);
        let b = pt(3.0, 2.0);
        let fixed = vec![pt(4.0, 1.0)];
        let chain = move_point_fixing(&a, &b, &fixed, &CompactBox::new(1.0), 0.1).unwrap();
        let image = chain.apply(&a).unwrap();
        assert!(sup_dist(&image, &b) < 1e-9, "a landed at {image:?}");
        let held = chain.apply(&fixed[0]).unwrap();
        assert!(
            sup_dist(&held, &fixed[0]) < 1e-12,
            "fixed point drifted {:e}",
            sup_dist(&held, &fixed[0])
        );
        let dev = deviation_from_identity(&chain, 1.0);
        assert!(dev <= 0.1, "deviation {dev:e} exceeds 0.1");
    }

    #[test]
    fn full_move_with_two_fixed_points_lands_on_target() {
        let a = pt(5.0, 0.0);
        let b = pt(0.0, 5.0);
        let fixed = vec![pt(4.0, 1.0), pt(-3.0, -2.0)];
        let chain = move_point_fixing(&a, &b, &fixed, &CompactBox::new(1.0), 0.1).unwrap();
        let image = chain.apply(&a).unwrap();
        assert!(sup_dist(&image, &b) < 1e-8, "a landed at {image:?}");
        for f in &fixed {
            let held = chain.apply(f).unwrap();
            assert!(sup_dist(&held, f) < 1e-9, "{f:?} drifted {:e}", sup_dist(&held, f));
        }
    }

    #[test]
    fn collision_on_the_first_coordinate_takes_the_other_route() {
        // a shares its first coordinate with a fixed point, so the y-first
        // route is blocked; the x-first route must be chosen and still work.
        let a = pt(4.0, 3.0);
        let b = pt(2.0, 5.0);
        let fixed = vec![pt(4.0, -2.0)];
        let chain = move_point_fixing(&a, &b, &fixed, &CompactBox::new(1.0), 0.1).unwrap();
        assert!(sup_dist(&chain.apply(&a).unwrap(), &b) < 1e-8);
        assert!(sup_dist(&chain.apply(&fixed[0]).unwrap(), &fixed[0]) < 1e-9);
    }

    #[test]
    fn doubly_blocked_target_routes_through_a_waypoint() {
        // b₂ collides with one fixed second coordinate and a₂ with another:
        // both direct routes are blocked, but both first coordinates are
        // clear, so the three-shear detour through a waypoint must engage.
        let a = pt(4.0, 3.0);
        let b = pt(6.0, 5.0);
        let fixed = vec![pt(9.0, 3.0), pt(7.0, 5.0)];
        let chain = move_point_fixing(&a, &b, &fixed, &CompactBox::new(1.0), 0.1).unwrap();
        assert_eq!(chain.len(), 3, "expected the waypoint detour's three shears");
        assert!(sup_dist(&chain.apply(&a).unwrap(), &b) < 1e-8);
        for f in &fixed {
            assert!(sup_dist(&chain.apply(f).unwrap(), f) < 1e-9);
        }
    }

    #[test]
    fn fully_blocked_start_is_a_genericity_failure() {
        // both of a's coordinates collide with fixed keys: no shear can move
        // a while vanishing at every fixed key, in any routing.
        let a = pt(4.0, 3.0);
        let b = pt(6.0, 5.0);
        let fixed = vec![pt(4.0, 9.0), pt(8.0, 3.0)];
        let got = move_point_fixing(&a, &b, &fixed, &CompactBox::new(1.0), 0.1);
        assert!(matches!(got, Err(Error::GenericityFailure)), "got {got:?}");
    }

    #[test]
    fn unreachable_deviation_target_fails_loudly() {
        let a = pt(1.3, 0.2);
        let b = pt(1.35, 0.3);
        let got = move_point_fixing(&a, &b, &[], &CompactBox::new(1.0), 1e-12);
        match got {
            Err(Error::DampingExhausted { measured }) => {
                assert!(measured > 1e-12, "reported best deviation {measured:e}");
            }
            other => panic!("expected DampingExhausted, got {other:?}"),
        }
    }

    #[test]
    fn damping_rounds_shrink_the_grid_deviation() {
        let a = pt(3.0, 0.0);
        let b = pt(3.0, 2.0);
        let keys = fixed_keys(&[pt(4.0, 1.0)]).unwrap();
        let route = select_route(&a, &b, &keys, 1.0).unwrap();
        let undamped = build_with_damping(&route, &a, &keys, 1.0, 0).unwrap();
        let damped = build_with_damping(&route, &a, &keys, 1.0, 16).unwrap();
        let d0 = deviation_from_identity(&undamped, 1.0);
        let d16 = deviation_from_identity(&damped, 1.0);
        assert!(
            d16 < 0.01 * d0,
            "16 ring nodes only improved {d0:e} to {d16:e}"
        );
        // damping must not disturb the interpolation conditions
        assert!(sup_dist(&damped.apply(&a).unwrap(), &b) < 1e-9);
    }

    #[test]
    fn identical_lists_match_trivially() {
        let pts = vec![pt(2.0, 2.0), pt(-3.0, 1.0), pt(0.5, -4.0)];
        let (chain, logs) = equivalence_chain(&pts, &pts, 0.5, 2.0).unwrap();
        assert!(chain.is_empty());
        assert_eq!(logs.len(), 3);
        for log in &logs {
            assert_eq!(log.measured_deviation, 0.0, "stage {}", log.stage);
            assert_eq!(log.damping_nodes_used, 0);
        }
    }

    #[test]
    fn banded_instance_matches_every_pair_within_schedule() {
        let (a_pts, b_pts) = sample_instance(3, 11);
        let (chain, logs) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        for (a, b) in a_pts.iter().zip(&b_pts) {
            let image = chain.apply(a).unwrap();
            assert!(
                sup_dist(&image, b) < 1e-8,
                "pair residual {:e}",
                sup_dist(&image, b)
            );
        }
        for log in &logs {
            assert!(
                log.measured_deviation <= log.epsilon_target,
                "stage {} deviation {:e} over its target {:e}",
                log.stage,
                log.measured_deviation,
                log.epsilon_target
            );
        }
        // schedule bookkeeping: radii strictly increase, ε halves
        for pair in logs.windows(2) {
            assert!(pair[1].box_radius > pair[0].box_radius);
            assert!((pair[1].epsilon_target - 0.5 * pair[0].epsilon_target).abs() < 1e-15);
        }
    }

    #[test]
    fn matched_targets_survive_all_later_stages() {
        let (a_pts, b_pts) = sample_instance(3, 23);
        let (chain, logs) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        let order: Vec<usize> = {
            let mut idx: Vec<usize> = (0..b_pts.len()).collect();
            idx.sort_by(|&i, &j| sup_norm(&b_pts[i]).partial_cmp(&sup_norm(&b_pts[j])).unwrap());
            idx
        };
        for (k, &i) in order.iter().enumerate() {
            let mut tail = AutoChain::new(2);
            for p in &chain.primitives()[logs[k].primitives_end..] {
                tail.push(p.clone()).unwrap();
            }
            let drift = sup_dist(&tail.apply(&b_pts[i]).unwrap(), &b_pts[i]);
            assert!(drift < 1e-9, "target {i} drifted {drift:e} after matching");
        }
    }

    #[test]
    fn tail_deviation_telescopes_over_the_boxes() {
        // convergence proxy: everything after stage k moves the k-th box by
        // no more than the remaining ε budget.
        let (a_pts, b_pts) = sample_instance(3, 37);
        let (chain, logs) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        for k in 0..logs.len() - 1 {
            let mut tail = AutoChain::new(2);
            for p in &chain.primitives()[logs[k].primitives_end..] {
                tail.push(p.clone()).unwrap();
            }
            let remaining: f64 = logs[k + 1..].iter().map(|l| l.epsilon_target).sum();
            let dev = deviation_from_identity(&tail, logs[k + 1].box_radius);
            assert!(
                dev <= remaining + 1e-9,
                "tail after stage {} deviates {dev:e} > {remaining:e}",
                logs[k].stage
            );
        }
    }

    #[test]
    fn matching_chains_preserve_volume() {
        // the chain's numerical envelope is the initial box (every stage is
        // damped there) and the exact matching trajectories; beyond them the
        // damped high-degree shears overflow doubles by design, and the
        // verifier reports that loudly rather than pretending det = 1.
        let (a_pts, b_pts) = sample_instance(3, 41);
        let (chain, logs) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        let cfg = ToleranceConfig::default();
        let inner = SampleRegion::origin(2, 0.9 * logs[0].box_radius);
        let rep = check_volume(&chain, &cfg, 5, &inner).unwrap();
        assert!(rep.checks[0].residual < 1e-9, "det residual {:e}", rep.checks[0].residual);
        let along = SampleRegion::NearPoints { points: a_pts, radius: 0.0 };
        let rep = check_volume(&chain, &cfg, 5, &along).unwrap();
        assert!(rep.checks[0].residual < 1e-9, "trajectory det {:e}", rep.checks[0].residual);
    }

    #[test]
    fn duplicate_points_are_rejected() {
        let a_pts = vec![pt(2.0, 2.0), pt(2.0, 2.0 + 1e-10), pt(3.0, 1.0)];
        let b_pts = vec![pt(2.5, 2.0), pt(2.0, 2.5), pt(3.5, 1.0)];
        assert!(matches!(
            equivalence_chain(&a_pts, &b_pts, 0.5, 2.0),
            Err(Error::DuplicatePoints)
        ));
    }

    #[test]
    fn swallowed_points_violate_the_schedule() {
        // matching the small-b pair first grows the box past the second
        // pair's points, which is exactly what the schedule must refuse.
        let a_pts = vec![pt(5.0, 5.0), pt(2.0, 2.0)];
        let b_pts = vec![pt(5.5, 5.4), pt(6.0, 6.0)];
        let got = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0);
        assert!(matches!(got, Err(Error::ScheduleViolation { stage: 2 })), "got {got:?}");
    }

    #[test]
    fn runs_are_deterministic() {
        let (a_pts, b_pts) = sample_instance(4, 7);
        let (c1, l1) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        let (c2, l2) = equivalence_chain(&a_pts, &b_pts, 0.5, 2.0).unwrap();
        assert_eq!(l1, l2);
        let probe = pt(1.7, -0.4);
        assert_eq!(c1.apply(&probe).unwrap(), c2.apply(&probe).unwrap());
    }
}
