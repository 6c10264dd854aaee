//! Vertex colors, vertex types and the greedy priority ordering.
//!
//! A vertex type counts the red and blue neighbors of an uncolored vertex.
//! Types are stored unordered (`low <= high`); the two oriented views are
//! recovered on demand with [`VertexType::oriented`].

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Color of a vertex. `Uncolored` is a color in its own right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Color {
    Uncolored,
    Red,
    Blue,
}

impl Color {
    /// The opposite color; `Uncolored` is its own opposite.
    pub fn opposite(self) -> Color {
        match self {
            Color::Uncolored => Color::Uncolored,
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn is_colored(self) -> bool {
        self != Color::Uncolored
    }
}

/// Unordered vertex type `{r, b}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VertexType {
    low: u8,
    high: u8,
}

/// A vertex type with orientation: `red` red neighbors and `blue` blue ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrientedType {
    pub red: u8,
    pub blue: u8,
}

/// Which side of the unordered type a vertex sits on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Strictly more red neighbors.
    RedHeavy,
    /// Strictly more blue neighbors.
    BlueHeavy,
    /// Equal counts.
    Balanced,
}

impl VertexType {
    pub fn new(r: u8, b: u8) -> Self {
        VertexType {
            low: r.min(b),
            high: r.max(b),
        }
    }

    pub fn low(self) -> u8 {
        self.low
    }

    pub fn high(self) -> u8 {
        self.high
    }

    /// Number of colored neighbors, `r + b`.
    pub fn colored(self) -> u8 {
        self.low + self.high
    }

    pub fn is_symmetric(self) -> bool {
        self.low == self.high
    }

    /// The red-heavy and blue-heavy ordered views (`D^r`, `D^b`).
    pub fn oriented(self) -> (OrientedType, OrientedType) {
        (
            OrientedType {
                red: self.high,
                blue: self.low,
            },
            OrientedType {
                red: self.low,
                blue: self.high,
            },
        )
    }

    /// Valid for degree `d` when `r + b <= d`.
    pub fn is_valid_for(self, d: usize) -> bool {
        (self.colored() as usize) <= d
    }

    /// All unordered types with `r + b <= d`.
    pub fn all(d: usize) -> Vec<VertexType> {
        let d = d as u8;
        let mut out = Vec::new();
        for low in 0..=d {
            for high in low..=d {
                if low + high <= d {
                    out.push(VertexType::new(low, high));
                }
            }
        }
        out
    }
}

impl OrientedType {
    pub fn new(red: u8, blue: u8) -> Self {
        OrientedType { red, blue }
    }

    pub fn unordered(self) -> VertexType {
        VertexType::new(self.red, self.blue)
    }

    pub fn orientation(self) -> Orientation {
        match self.red.cmp(&self.blue) {
            Ordering::Greater => Orientation::RedHeavy,
            Ordering::Less => Orientation::BlueHeavy,
            Ordering::Equal => Orientation::Balanced,
        }
    }

    /// Swap red and blue.
    pub fn flipped(self) -> Self {
        OrientedType {
            red: self.blue,
            blue: self.red,
        }
    }
}

impl fmt::Display for VertexType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.low, self.high)
    }
}

/// Greedy priority comparison on unordered types.
///
/// With both types normalized so that `r <= b`, `a < b` iff the gap `b - r`
/// is smaller, or the gaps agree and `a` has fewer red neighbors.
pub fn priority_compare(a: VertexType, b: VertexType) -> Ordering {
    let gap_a = a.high - a.low;
    let gap_b = b.high - b.low;
    gap_a.cmp(&gap_b).then(a.low.cmp(&b.low))
}

impl PartialOrd for VertexType {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for VertexType {
    fn cmp(&self, other: &Self) -> Ordering {
        priority_compare(*self, *other)
    }
}

/// 1 for a symmetric type, 2 otherwise.
pub fn multiplicity(t: VertexType) -> u8 {
    if t.is_symmetric() {
        1
    } else {
        2
    }
}

/// Priority-maximal type whose mass is at least `eps`, or `None` when no
/// type qualifies (the greedy phase is over).
///
/// Keys are normalized, so `(r, b)` and `(b, r)` entries are pooled.
pub fn dominant_type<I>(type_masses: I, eps: f64) -> Option<VertexType>
where
    I: IntoIterator<Item = (VertexType, f64)>,
{
    let mut pooled: BTreeMap<VertexType, f64> = BTreeMap::new();
    for (t, m) in type_masses {
        *pooled.entry(t).or_insert(0.0) += m;
    }
    pooled
        .into_iter()
        .rev()
        .find(|&(_, m)| m >= eps)
        .map(|(t, _)| t)
}

/// One entry of the coloring schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub t: usize,
    pub dominant: VertexType,
    pub multiplicity: u8,
    pub q: f64,
    pub q_hat: f64,
}

/// Why a schedule entry is rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StepParamsError {
    #[error("step {t}: multiplicity {m} does not match dominant type {dominant}")]
    Multiplicity { t: usize, m: u8, dominant: VertexType },
    #[error("step {t}: threshold q = {q} out of bounds")]
    Q { t: usize, q: f64 },
    #[error("step {t}: threshold q_hat = {q_hat} out of bounds")]
    QHat { t: usize, q_hat: f64 },
    #[error("step {t}: dominant type {dominant} invalid for degree {d}")]
    Type { t: usize, dominant: VertexType, d: usize },
}

impl StepParams {
    pub fn validate(&self, d: usize) -> Result<(), StepParamsError> {
        if !self.dominant.is_valid_for(d) {
            return Err(StepParamsError::Type {
                t: self.t,
                dominant: self.dominant,
                d,
            });
        }
        if self.multiplicity != multiplicity(self.dominant) {
            return Err(StepParamsError::Multiplicity {
                t: self.t,
                m: self.multiplicity,
                dominant: self.dominant,
            });
        }
        let q_ok = self.q.is_finite()
            && self.q >= 0.0
            && self.q <= 1.0
            && (self.multiplicity == 2 || 2.0 * self.q <= 1.0);
        if !q_ok {
            return Err(StepParamsError::Q { t: self.t, q: self.q });
        }
        if !(self.q_hat.is_finite() && self.q_hat >= 0.0 && 2.0 * self.q_hat <= 1.0) {
            return Err(StepParamsError::QHat {
                t: self.t,
                q_hat: self.q_hat,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(r: u8, b: u8) -> VertexType {
        VertexType::new(r, b)
    }

    #[test]
    fn priority_examples() {
        assert_eq!(priority_compare(t(1, 2), t(0, 2)), Ordering::Less);
        assert_eq!(priority_compare(t(0, 1), t(1, 2)), Ordering::Less);
        assert_eq!(priority_compare(t(1, 2), t(2, 1)), Ordering::Equal);
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(t(0, 0)), 1);
        assert_eq!(multiplicity(t(1, 2)), 2);
        assert_eq!(multiplicity(t(2, 2)), 1);
    }

    #[test]
    fn dominant_examples() {
        assert_eq!(dominant_type([(t(0, 0), 1.0)], 1e-3), Some(t(0, 0)));
        let masses = [(t(0, 0), 0.5), (t(0, 1), 0.3), (t(1, 2), 0.2)];
        assert_eq!(dominant_type(masses, 0.1), Some(t(1, 2)));
        assert_eq!(dominant_type([(t(0, 1), 1e-4)], 1e-3), None);
    }

    #[test]
    fn dominant_pools_orientations() {
        // (0,1) and (1,0) are the same unordered type
        let masses = [(t(0, 1), 0.6e-3), (VertexType::new(1, 0), 0.6e-3)];
        assert_eq!(dominant_type(masses, 1e-3), Some(t(0, 1)));
    }

    #[test]
    fn priority_is_a_total_order_on_unordered_types() {
        for d in 1..=10 {
            let all = VertexType::all(d);
            for &a in &all {
                for &b in &all {
                    let ab = priority_compare(a, b);
                    assert_eq!(ab, priority_compare(b, a).reverse());
                    assert_eq!(ab == Ordering::Equal, a == b);
                    for &c in &all {
                        if ab != Ordering::Greater && priority_compare(b, c) != Ordering::Greater {
                            assert_ne!(priority_compare(a, c), Ordering::Greater);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn step_params_bounds() {
        let ok = StepParams {
            t: 1,
            dominant: t(0, 0),
            multiplicity: 1,
            q: 0.5,
            q_hat: 0.5,
        };
        assert!(ok.validate(5).is_ok());
        let bad_q = StepParams { q: 0.6, ..ok };
        assert!(matches!(bad_q.validate(5), Err(StepParamsError::Q { .. })));
        let asym = StepParams {
            dominant: t(1, 2),
            multiplicity: 2,
            q: 1.0,
            ..ok
        };
        assert!(asym.validate(5).is_ok());
        let wrong_m = StepParams { multiplicity: 1, ..asym };
        assert!(matches!(
            wrong_m.validate(5),
            Err(StepParamsError::Multiplicity { .. })
        ));
    }

    fn arb_masses() -> impl Strategy<Value = Vec<((u8, u8), f64)>> {
        prop::collection::vec(((0u8..=3, 0u8..=3), 0.0f64..0.3), 0..12)
    }

    proptest! {
        #[test]
        fn dominant_swap_invariant(masses in arb_masses(), eps in 1e-3f64..0.2) {
            let direct: Vec<_> = masses.iter().map(|&((r, b), m)| (t(r, b), m)).collect();
            let swapped: Vec<_> = masses.iter().map(|&((r, b), m)| (VertexType::new(b, r), m)).collect();
            prop_assert_eq!(dominant_type(direct, eps), dominant_type(swapped, eps));
        }

        #[test]
        fn dominant_is_maximal_qualifying(masses in arb_masses(), eps in 1e-3f64..0.2) {
            let mut pooled: BTreeMap<VertexType, f64> = BTreeMap::new();
            for &((r, b), m) in &masses {
                *pooled.entry(t(r, b)).or_insert(0.0) += m;
            }
            let got = dominant_type(masses.iter().map(|&((r, b), m)| (t(r, b), m)), eps);
            match got {
                None => prop_assert!(pooled.values().all(|&m| m < eps)),
                Some(dom) => {
                    prop_assert!(pooled[&dom] >= eps);
                    for (&other, &m) in &pooled {
                        if priority_compare(other, dom) == Ordering::Greater {
                            prop_assert!(m < eps);
                        }
                    }
                }
            }
        }
    }
}
