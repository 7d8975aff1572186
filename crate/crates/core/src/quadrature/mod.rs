//! Adaptive composite Gauss-Legendre quadrature for oscillatory integrands.
//!
//! Panels are optionally pre-split to a quarter of a caller-supplied local
//! oscillation wavelength, then bisected worst-first until the summed
//! per-panel error estimate meets the tolerance. Panel values are summed in
//! order of position, so results do not depend on refinement history.

mod gauss;

pub use gauss::GaussLegendre;

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::model::Condensate;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuadError {
    #[error("rel_tol must lie in (0, 1e-2], got {0}")]
    RelTol(f64),
    #[error("abs_tol must be non-negative and finite, got {0}")]
    AbsTol(f64),
    #[error("panel rule needs at least 7 nodes, got {0}")]
    PanelNodes(usize),
    #[error("max_panels must be at least 1")]
    MaxPanels,
    #[error("tail_threshold must be at least 8, got {0}")]
    TailThreshold(f64),
    #[error("interval [{0}, {1}] is not finite")]
    Interval(f64, f64),
}

/// Tolerances and budgets for one level of integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    /// Nodes of the fixed Gauss-Legendre rule applied per panel.
    pub panel_nodes: usize,
    /// Airy argument beyond which `Ai` is treated as zero.
    pub tail_threshold: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_panels: 4000,
            panel_nodes: 10,
            tail_threshold: 10.0,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-2) {
            return Err(QuadError::RelTol(self.rel_tol));
        }
        if !(self.abs_tol >= 0.0 && self.abs_tol.is_finite()) {
            return Err(QuadError::AbsTol(self.abs_tol));
        }
        if self.panel_nodes < 7 {
            return Err(QuadError::PanelNodes(self.panel_nodes));
        }
        if self.max_panels == 0 {
            return Err(QuadError::MaxPanels);
        }
        if !(self.tail_threshold >= 8.0 && self.tail_threshold.is_finite()) {
            return Err(QuadError::TailThreshold(self.tail_threshold));
        }
        Ok(())
    }

    /// Spec for an integral nested one level inside this one.
    pub fn nested(&self) -> Self {
        Self {
            rel_tol: self.rel_tol * 0.1,
            abs_tol: self.abs_tol * 0.1,
            ..*self
        }
    }

    pub fn with_rel_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }
}

/// Values a quadrature can accumulate.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        libm::fabs(*self)
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

/// Several integrands sharing one panel layout; refinement is driven by the
/// largest component error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bundle<T, const N: usize>(pub [T; N]);

impl<T: QuadValue, const N: usize> Add for Bundle<T, N> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Bundle(core::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl<T: QuadValue, const N: usize> Sub for Bundle<T, N> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Bundle(core::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl<T: QuadValue, const N: usize> Mul<f64> for Bundle<T, N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Bundle(self.0.map(|v| v * rhs))
    }
}

impl<T: QuadValue, const N: usize> QuadValue for Bundle<T, N> {
    fn zero() -> Self {
        Bundle([T::zero(); N])
    }
    fn magnitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| libm::fmax(m, v.magnitude()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub converged: bool,
    pub evaluations: usize,
}

impl<T: QuadValue> QuadResult<T> {
    /// Whether the error estimate meets `spec`.
    pub fn within(&self, spec: &QuadSpec) -> bool {
        self.error <= tolerance(spec, self.value.magnitude())
    }
}

/// Final composite rule of an adaptive integration: integrating any other
/// function `h` as `Σ wᵢ h(xᵢ)` reuses the refined panel layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl CompositeRule {
    pub fn apply<T: QuadValue>(&self, mut f: impl FnMut(f64) -> T) -> T {
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(x) * w;
        }
        acc
    }
}

fn tolerance(spec: &QuadSpec, magnitude: f64) -> f64 {
    libm::fmax(spec.abs_tol, spec.rel_tol * magnitude)
}

struct Panel<T> {
    a: f64,
    b: f64,
    /// Rule on each half.
    left: T,
    right: T,
    error: f64,
}

struct Ranked {
    error: f64,
    index: usize,
}

impl PartialEq for Ranked {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Ranked {}
impl PartialOrd for Ranked {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ranked {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Adaptive integrator holding a precomputed panel rule.
#[derive(Debug, Clone)]
pub struct Integrator {
    spec: QuadSpec,
    rule: GaussLegendre,
}

impl Integrator {
    pub fn new(spec: QuadSpec) -> Result<Self, QuadError> {
        spec.validate()?;
        Ok(Self { spec, rule: GaussLegendre::new(spec.panel_nodes) })
    }

    pub fn spec(&self) -> &QuadSpec {
        &self.spec
    }

    /// Same panel rule, different tolerances.
    pub fn with_spec(&self, spec: QuadSpec) -> Result<Self, QuadError> {
        spec.validate()?;
        if spec.panel_nodes == self.spec.panel_nodes {
            Ok(Self { spec, rule: self.rule.clone() })
        } else {
            Self::new(spec)
        }
    }

    pub fn nested(&self) -> Self {
        Self { spec: self.spec.nested(), rule: self.rule.clone() }
    }

    fn panel_sum<T: QuadValue>(&self, f: &mut impl FnMut(f64) -> T, a: f64, b: f64) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = T::zero();
        for (&x, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }

    fn make_panel<T: QuadValue>(
        &self,
        f: &mut impl FnMut(f64) -> T,
        a: f64,
        b: f64,
        coarse: Option<T>,
    ) -> Panel<T> {
        let coarse = match coarse {
            Some(c) => c,
            None => self.panel_sum(f, a, b),
        };
        let m = 0.5 * (a + b);
        let left = self.panel_sum(f, a, m);
        let right = self.panel_sum(f, m, b);
        let error = (left + right - coarse).magnitude();
        Panel { a, b, left, right, error }
    }

    /// `∫_a^b f`, optionally pre-splitting panels to a quarter of
    /// `wavelength(x)`.
    pub fn integrate<T: QuadValue>(
        &self,
        f: impl FnMut(f64) -> T,
        a: f64,
        b: f64,
        wavelength: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<QuadResult<T>, QuadError> {
        self.run(f, a, b, wavelength).map(|(r, _)| r)
    }

    /// As [`Integrator::integrate`], also returning the refined rule.
    pub fn integrate_with_rule<T: QuadValue>(
        &self,
        f: impl FnMut(f64) -> T,
        a: f64,
        b: f64,
        wavelength: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<(QuadResult<T>, CompositeRule), QuadError> {
        let (result, panels) = self.run(f, a, b, wavelength)?;
        let n = self.rule.len();
        let mut nodes = Vec::with_capacity(panels.len() * 2 * n);
        let mut weights = Vec::with_capacity(panels.len() * 2 * n);
        for (pa, pb) in panels {
            let m = 0.5 * (pa + pb);
            for (lo, hi) in [(pa, m), (m, pb)] {
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                for (&x, &w) in self.rule.nodes().iter().zip(self.rule.weights()) {
                    nodes.push(mid + half * x);
                    weights.push(w * half);
                }
            }
        }
        Ok((result, CompositeRule { nodes, weights }))
    }

    #[allow(clippy::type_complexity)]
    fn run<T: QuadValue>(
        &self,
        mut f: impl FnMut(f64) -> T,
        a: f64,
        b: f64,
        wavelength: Option<&dyn Fn(f64) -> f64>,
    ) -> Result<(QuadResult<T>, Vec<(f64, f64)>), QuadError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(QuadError::Interval(a, b));
        }
        if a == b {
            let r = QuadResult { value: T::zero(), error: 0.0, converged: true, evaluations: 0 };
            return Ok((r, alloc::vec![(a, b)]));
        }
        if b < a {
            let (r, mut p) = self.run(f, b, a, wavelength)?;
            p.reverse();
            let value = r.value * -1.0;
            return Ok((QuadResult { value, ..r }, p));
        }

        let budget = self.spec.max_panels;
        let edges = initial_edges(a, b, wavelength, budget.div_ceil(2).max(1));
        let mut evaluations = 0;
        let per_panel = self.rule.len();
        let mut panels: Vec<Panel<T>> = Vec::with_capacity(edges.len());
        for w in edges.windows(2) {
            panels.push(self.make_panel(&mut f, w[0], w[1], None));
            evaluations += 3 * per_panel;
        }

        let mut heap: BinaryHeap<Ranked> = panels
            .iter()
            .enumerate()
            .map(|(index, p)| Ranked { error: p.error, index })
            .collect();

        // Running totals drive refinement only; the reported sums are
        // recomputed in position order at the end.
        let (mut value, mut error) = totals(&panels);
        let mut converged;
        loop {
            converged = error <= tolerance(&self.spec, value.magnitude());
            if converged || panels.len() >= budget {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let p = &panels[worst.index];
            let (pa, pb, left, right) = (p.a, p.b, p.left, p.right);
            let m = 0.5 * (pa + pb);
            if !(m > pa && m < pb) {
                // Panel cannot be split further in f64.
                converged = false;
                break;
            }
            let lp = self.make_panel(&mut f, pa, m, Some(left));
            let rp = self.make_panel(&mut f, m, pb, Some(right));
            evaluations += 4 * per_panel;
            value = value - left - right + lp.left + lp.right + rp.left + rp.right;
            error += lp.error + rp.error - panels[worst.index].error;
            panels[worst.index] = lp;
            heap.push(Ranked { error: panels[worst.index].error, index: worst.index });
            panels.push(rp);
            let idx = panels.len() - 1;
            heap.push(Ranked { error: panels[idx].error, index: idx });
        }

        panels.sort_by(|x, y| x.a.total_cmp(&y.a));
        let (value, error) = totals(&panels);
        let layout = panels.iter().map(|p| (p.a, p.b)).collect();
        Ok((QuadResult { value, error, converged, evaluations }, layout))
    }
}

fn totals<T: QuadValue>(panels: &[Panel<T>]) -> (T, f64) {
    let mut value = T::zero();
    let mut error = 0.0;
    for p in panels.iter() {
        value = value + p.left + p.right;
        error += p.error;
    }
    (value, error)
}

fn initial_edges(
    a: f64,
    b: f64,
    wavelength: Option<&dyn Fn(f64) -> f64>,
    cap: usize,
) -> Vec<f64> {
    let mut edges = alloc::vec![a];
    let Some(lambda) = wavelength else {
        edges.push(b);
        return edges;
    };
    let len = b - a;
    let min_step = len / cap as f64;
    let mut x = a;
    while x < b {
        let mut step = 0.25 * lambda(x);
        if !(step.is_finite() && step > 0.0) {
            step = len;
        }
        // Look ahead once so a shrinking wavelength inside the step is seen.
        let ahead = 0.25 * lambda(libm::fmin(x + step, b));
        if ahead.is_finite() && ahead > 0.0 {
            step = libm::fmin(step, ahead);
        }
        step = libm::fmax(step, min_step);
        let next = if x + step >= b - 1e-12 * len { b } else { x + step };
        edges.push(next);
        x = next;
    }
    edges
}

/// Integrate `f` with the default panel rule of `spec`.
pub fn integrate_1d<T: QuadValue>(
    f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    spec: &QuadSpec,
    wavelength: Option<&dyn Fn(f64) -> f64>,
) -> Result<QuadResult<T>, QuadError> {
    Integrator::new(*spec)?.integrate(f, a, b, wavelength)
}

/// Upper limit of the `k̄⊥` integral at detuning `nu`.
///
/// The resonant vertical energy is `Ē(k) = ν − k²/ā²`; at the lowest point
/// of the condensate `ȳ = −b̄` the Airy argument is `−b̄ − Ē(k)`. Returns the
/// smallest `k` for which that argument reaches `spec.tail_threshold`, so
/// the source overlap beyond it is below `exp(−⅔ t^{3/2})` times its scale.
pub fn truncate_kperp(cond: &Condensate, nu: f64, spec: &QuadSpec) -> f64 {
    let s = spec.tail_threshold + cond.b_bar() + nu;
    if s > 0.0 {
        cond.a_bar() * libm::sqrt(s)
    } else {
        0.0
    }
}
