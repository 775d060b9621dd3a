//! Finite-node polynomial interpolation in Newton form with Leja ordering —
//! the desk-scale stand-in for an entire function prescribed on a discrete
//! set — plus a product-form (root-listing) polynomial representation whose
//! zeros are float-exact.

use alloc::vec::Vec;

#[allow(unused_imports)] // resolves f64 math in no_std builds; inherent methods win under std
use num_traits::Float;

use crate::error::Error;
use crate::numerics::Cx;

/// Nodes closer than this are rejected as colliding.
pub const NODE_RESOLUTION: f64 = 1e-12;
/// Hard cap on nodes per interpolant; divided differences beyond this lose
/// too many digits in double precision.
pub const MAX_NODES: usize = 64;
/// Above this many nodes the interpolant reports a conditioning warning.
pub const CONDITIONING_WARNING_NODES: usize = 30;

/// Newton-form polynomial through finitely many (node, value) pairs.
///
/// Nodes are stored in the caller's order; evaluation uses a Leja
/// permutation (greedily maximizing distance products), which keeps the
/// divided-difference recurrence and Horner evaluation stable for the
/// clustered and spread node sets that arise here.
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolant {
    nodes: Vec<Cx>,
    values: Vec<Cx>,
    /// Leja permutation: `order[i]` indexes into `nodes`.
    order: Vec<usize>,
    /// Newton divided differences with respect to the Leja-ordered nodes.
    coeffs: Vec<Cx>,
}

impl Interpolant {
    /// Fits the unique degree `n−1` polynomial through the given data.
    pub fn fit(nodes: &[Cx], values: &[Cx]) -> Result<Self, Error> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch { left: nodes.len(), right: values.len() });
        }
        if nodes.is_empty() {
            return Err(Error::EmptyNodes);
        }
        if nodes.len() > MAX_NODES {
            return Err(Error::TooManyNodes { count: nodes.len() });
        }
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if (nodes[i] - nodes[j]).norm() < NODE_RESOLUTION {
                    return Err(Error::NodeCollision { a: nodes[i], b: nodes[j] });
                }
            }
        }
        let order = leja_order(nodes);
        let x: Vec<Cx> = order.iter().map(|&i| nodes[i]).collect();
        let mut coeffs: Vec<Cx> = order.iter().map(|&i| values[i]).collect();
        for k in 1..x.len() {
            for j in (k..x.len()).rev() {
                coeffs[j] = (coeffs[j] - coeffs[j - 1]) / (x[j] - x[j - k]);
            }
        }
        Ok(Interpolant { nodes: nodes.to_vec(), values: values.to_vec(), order, coeffs })
    }

    /// Fits through `(nodes, values)` and additionally through
    /// `(zero_nodes, 0)`; planting zeros inside a compact empirically
    /// shrinks the sup norm there.
    pub fn fit_damped(nodes: &[Cx], values: &[Cx], zero_nodes: &[Cx]) -> Result<Self, Error> {
        if nodes.len() != values.len() {
            return Err(Error::LengthMismatch { left: nodes.len(), right: values.len() });
        }
        let mut all_nodes = nodes.to_vec();
        all_nodes.extend_from_slice(zero_nodes);
        let mut all_values = values.to_vec();
        all_values.resize(all_nodes.len(), Cx::new(0.0, 0.0));
        Interpolant::fit(&all_nodes, &all_values)
    }

    /// The polynomial `z ↦ z` (exact in floating point).
    pub fn identity() -> Self {
        // Built directly so node 0 leads the Newton form: Horner then
        // evaluates 1·(z − 0) + 0 = z bit for bit. (Leja ordering would put
        // node 1 first, making the evaluation (z − 1) + 1, which rounds.)
        let zero = Cx::new(0.0, 0.0);
        let one = Cx::new(1.0, 0.0);
        Interpolant {
            nodes: alloc::vec![zero, one],
            values: alloc::vec![zero, one],
            order: alloc::vec![0, 1],
            coeffs: alloc::vec![zero, one],
        }
    }

    /// The constant polynomial (exact everywhere).
    pub fn constant(c: Cx) -> Self {
        Interpolant::fit(&[Cx::new(0.0, 0.0)], &[c]).expect("one node")
    }

    /// Horner-style nested Newton evaluation.
    pub fn eval(&self, z: Cx) -> Cx {
        let n = self.coeffs.len();
        let mut p = self.coeffs[n - 1];
        for j in (0..n - 1).rev() {
            p = p * (z - self.nodes[self.order[j]]) + self.coeffs[j];
        }
        p
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_deriv(&self, z: Cx) -> (Cx, Cx) {
        let n = self.coeffs.len();
        let mut p = self.coeffs[n - 1];
        let mut dp = Cx::new(0.0, 0.0);
        for j in (0..n - 1).rev() {
            let x = self.nodes[self.order[j]];
            dp = dp * (z - x) + p;
            p = p * (z - x) + self.coeffs[j];
        }
        (p, dp)
    }

    /// The negated polynomial `−p` (divided differences are linear in the
    /// values, so both values and coefficients flip sign).
    pub fn neg(&self) -> Self {
        Interpolant {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|v| -v).collect(),
            order: self.order.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn nodes(&self) -> &[Cx] {
        &self.nodes
    }

    pub fn values(&self) -> &[Cx] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one node
    }

    pub fn degree(&self) -> usize {
        self.nodes.len() - 1
    }

    /// True above the node count where divided differences start losing
    /// digits; callers may surface this in their reports.
    pub fn conditioning_warning(&self) -> bool {
        self.nodes.len() > CONDITIONING_WARNING_NODES
    }
}

/// Greedy Leja permutation: start at the largest-modulus node, then repeatedly
/// take the node maximizing the distance product to all chosen ones
/// (log-accumulated to avoid overflow); ties resolve to the earliest index,
/// keeping the ordering deterministic.
fn leja_order(nodes: &[Cx]) -> Vec<usize> {
    let n = nodes.len();
    let mut chosen = Vec::with_capacity(n);
    let mut used = alloc::vec![false; n];
    let mut first = 0;
    for i in 1..n {
        if nodes[i].norm() > nodes[first].norm() {
            first = i; // strict comparison keeps the earliest index on ties
        }
    }
    chosen.push(first);
    used[first] = true;
    let mut log_prod = alloc::vec![0.0f64; n];
    while chosen.len() < n {
        let last = *chosen.last().expect("nonempty");
        for i in 0..n {
            if !used[i] {
                log_prod[i] += (nodes[i] - nodes[last]).norm().ln();
            }
        }
        let mut best = usize::MAX;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..n {
            if !used[i] && log_prod[i] > best_val {
                best = i;
                best_val = log_prod[i];
            }
        }
        chosen.push(best);
        used[best] = true;
    }
    chosen
}

/// Polynomial kept in product form `scale · ∏ (z − rootᵢ)`.
///
/// Evaluation at a root multiplies by an exact floating-point zero, so the
/// polynomial vanishes *exactly* there — the property the vanishing-rank
/// checks need, which no expanded or Newton representation can guarantee.
#[derive(Clone, Debug, PartialEq)]
pub struct RootPoly {
    scale: Cx,
    roots: Vec<Cx>,
}

impl RootPoly {
    /// Product-form polynomial with the given roots, normalized to take the
    /// value 1 at the anchor point (anchor must not be a root).
    pub fn with_anchor(roots: &[Cx], anchor: Cx) -> Result<Self, Error> {
        let mut prod = Cx::new(1.0, 0.0);
        for r in roots {
            prod *= anchor - r;
        }
        if prod.norm() < 1e-300 || !prod.re.is_finite() || !prod.im.is_finite() {
            return Err(Error::NonFiniteEvaluation);
        }
        Ok(RootPoly { scale: prod.inv(), roots: roots.to_vec() })
    }

    pub fn eval(&self, z: Cx) -> Cx {
        let mut p = self.scale;
        for r in &self.roots {
            p *= z - r;
        }
        p
    }

    pub fn roots(&self) -> &[Cx] {
        &self.roots
    }
}
