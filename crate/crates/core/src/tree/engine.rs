//! Evolution of the root-neighborhood law through the greedy phase, the
//! terminal fair-coin coloring, and the cut statistics read off the result.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::tree::kernel::{NeighborKernel, PassTables, Scratch, MAX_KERNEL_DEGREE};
use crate::tree::measure::{compensated_sum, Measure};
use crate::tree::space::{StateSpace, BLUE, RED};
use crate::tree::state::{NeighborDescriptor, RootStatus};
use crate::tree::TreeError;
use crate::types::{dominant_type, multiplicity, Color, OrientedType, Orientation, StepParams, VertexType};

/// How transition probabilities are expanded.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full product over all tracked vertices.
    Exact,
    /// The root moves exactly; around it at most one tracked vertex changes
    /// per step and multi-change outcomes stay on the unchanged state.
    Simplified,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Mode::Exact),
            "simplified" => Ok(Mode::Simplified),
            other => Err(format!("unknown mode `{other}` (expected exact|simplified)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Simplified => "simplified",
        })
    }
}

/// Guaranteed bihole fraction for conflict graphs of maximum degree `delta`.
pub fn bihole_fraction(delta: u8) -> Result<f64, TreeError> {
    match delta {
        3 => Ok(0.34116),
        4 => Ok(0.24716),
        other => Err(TreeError::UnsupportedDelta(other)),
    }
}

/// Cut per vertex after swapping a bihole of the eligible vertices.
pub fn improved_cut(cut: f64, eligible: f64, delta: u8) -> Result<f64, TreeError> {
    Ok(cut - bihole_fraction(delta)? * eligible)
}

/// Thresholds `(q, q_hat)` for a step whose dominant type is `dominant`.
pub fn step_thresholds(mu_prev: &Measure, dominant: VertexType, eps: f64) -> Result<(f64, f64), TreeError> {
    let d = mu_prev.degree();
    let type_mass = mu_prev.root_type_mass(dominant);
    if !(type_mass >= eps) || type_mass <= 0.0 {
        return Err(TreeError::DominantUnderMassed {
            dominant,
            mass: type_mass,
            eps,
        });
    }
    let edge = mu_prev.uncolored_edge_mass();
    if edge <= 0.0 {
        return Err(TreeError::ZeroDenominator);
    }
    let m = multiplicity(dominant) as f64;
    let q = m * (eps / 2.0) / type_mass;
    let open = (d - dominant.colored() as usize) as f64;
    let q_hat = (open / d as f64 * eps / 2.0) / edge;
    Ok((q, q_hat))
}

/// Probabilities `(red, blue)` that an uncolored vertex with oriented type
/// `ty` is colored at a step with parameters `p`.
fn coloring_probs(ty: OrientedType, p: &StepParams) -> (f64, f64) {
    if ty.unordered() != p.dominant {
        return (0.0, 0.0);
    }
    let other = (2 - p.multiplicity) as f64 * p.q;
    match ty.orientation() {
        Orientation::Balanced => (p.q, p.q),
        Orientation::RedHeavy => (p.q, other),
        Orientation::BlueHeavy => (other, p.q),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Outcome of the greedy phase.
#[derive(Clone, Debug)]
pub struct Phase1 {
    pub measure: Measure,
    pub schedule: Vec<StepParams>,
}

/// Cut statistics of one measure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutStatistics {
    pub cut_per_vertex: f64,
    pub miscolored_measure: f64,
    pub eligible_measure: f64,
}

/// Full result of a tree run. The headline statistics are read off the
/// measure at the end of the greedy phase; `completed` holds the same
/// statistics after the leftover vertices are colored by fair coins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeReport {
    pub d: usize,
    pub eps: f64,
    pub mode: Mode,
    pub steps_taken: usize,
    pub schedule: Vec<StepParams>,
    pub cut_per_vertex: f64,
    pub miscolored_measure: f64,
    pub eligible_measure: f64,
    /// `None` when no bihole constant is known for the conflict degree.
    pub improvement: Option<f64>,
    pub improved_cut_per_vertex: Option<f64>,
    pub completed: CutStatistics,
    /// Uncolored root mass left for the fair-coin coloring.
    pub leftover_uncolored: f64,
    pub prune_threshold: f64,
}

/// Tree measure engine for one degree and mode.
pub struct TreeEngine {
    space: Arc<StateSpace>,
    tables: PassTables,
    mode: Mode,
    prune_threshold: f64,
}

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-30;

impl TreeEngine {
    pub fn new(d: usize, mode: Mode) -> Result<Self, TreeError> {
        if d > MAX_KERNEL_DEGREE {
            return Err(TreeError::UnsupportedDegree(d));
        }
        let space = Arc::new(StateSpace::new(d)?);
        let tables = PassTables::new(&space);
        Ok(TreeEngine {
            space,
            tables,
            mode,
            prune_threshold: DEFAULT_PRUNE_THRESHOLD,
        })
    }

    pub fn with_prune_threshold(mut self, threshold: f64) -> Self {
        self.prune_threshold = threshold;
        self
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn degree(&self) -> usize {
        self.space.degree()
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune_threshold
    }

    pub fn initial_measure(&self) -> Measure {
        Measure::initial(self.space.clone())
    }

    /// Kernel for one neighbor given the color its root contributes.
    fn neighbor_kernel(&self, root: Color, p: &StepParams) -> NeighborKernel {
        let d = self.degree();
        let alphabet = self.space.alphabet();
        let mut rows = Vec::with_capacity(alphabet.len());
        for (sym, desc) in alphabet.iter().enumerate() {
            let NeighborDescriptor::Open { outer_red, outer_blue } = *desc else {
                rows.push(vec![(sym as u8, 1.0)]);
                continue;
            };
            let (r, b) = (outer_red as usize, outer_blue as usize);
            let ty = OrientedType::new(
                (r + (root == Color::Red) as usize) as u8,
                (b + (root == Color::Blue) as usize) as u8,
            );
            let (p_red, p_blue) = coloring_probs(ty, p);
            let stay = 1.0 - p_red - p_blue;
            let free = d - 1 - r - b;
            let mut row = Vec::new();
            if p_red > 0.0 {
                row.push((RED, p_red));
            }
            if p_blue > 0.0 {
                row.push((BLUE, p_blue));
            }
            if stay > 0.0 {
                if p.q_hat == 0.0 {
                    row.push((sym as u8, stay));
                } else {
                    let keep = 1.0 - 2.0 * p.q_hat;
                    for x in 0..=free {
                        for y in 0..=free - x {
                            let z = free - x - y;
                            let coef = factorial(free) / (factorial(x) * factorial(y) * factorial(z));
                            let prob = coef * p.q_hat.powi((x + y) as i32) * keep.powi(z as i32);
                            if prob > 0.0 {
                                row.push((self.space.open_symbol(r + x, b + y), stay * prob));
                            }
                        }
                    }
                }
            }
            rows.push(row);
        }
        NeighborKernel::new(rows)
    }

    /// Per symbol: the outcomes in which exactly one tracked vertex of the
    /// neighbor's branch changes, and the probability that none does
    /// (simplified mode).
    fn single_change_rows(&self, root: Color, p: &StepParams) -> Vec<(Vec<(u8, f64)>, f64)> {
        let d = self.degree();
        self.space
            .alphabet()
            .iter()
            .map(|desc| {
                let NeighborDescriptor::Open { outer_red, outer_blue } = *desc else {
                    return (Vec::new(), 1.0);
                };
                let (r, b) = (outer_red as usize, outer_blue as usize);
                let ty = OrientedType::new(
                    (r + (root == Color::Red) as usize) as u8,
                    (b + (root == Color::Blue) as usize) as u8,
                );
                let (p_red, p_blue) = coloring_probs(ty, p);
                let stay = 1.0 - p_red - p_blue;
                let free = d - 1 - r - b;
                let keep = 1.0 - 2.0 * p.q_hat;
                let mut row = Vec::new();
                if p_red > 0.0 {
                    row.push((RED, p_red));
                }
                if p_blue > 0.0 {
                    row.push((BLUE, p_blue));
                }
                if free > 0 && p.q_hat > 0.0 {
                    let w = stay * free as f64 * p.q_hat * keep.powi(free as i32 - 1);
                    row.push((self.space.open_symbol(r + 1, b), w));
                    row.push((self.space.open_symbol(r, b + 1), w));
                }
                (row, stay * keep.powi(free as i32))
            })
            .collect()
    }

    /// Root coloring probabilities for every neighbor multiset.
    fn root_probs(&self, p: &StepParams) -> Vec<(f64, f64)> {
        (0..self.space.multisets())
            .map(|i| {
                let ty = OrientedType::new(self.space.red_count(i) as u8, self.space.blue_count(i) as u8);
                coloring_probs(ty, p)
            })
            .collect()
    }

    /// One greedy step.
    pub fn transition_step(&self, mu_prev: &Measure, p: &StepParams) -> Measure {
        let mut next = match self.mode {
            Mode::Exact => self.exact_step(mu_prev, p),
            Mode::Simplified => self.simplified_step(mu_prev, p),
        };
        if self.prune_threshold > 0.0 {
            next.prune(self.prune_threshold);
        }
        next
    }

    fn exact_step(&self, mu_prev: &Measure, p: &StepParams) -> Measure {
        let m = self.space.multisets();
        let root = self.root_probs(p);
        let strict = p.multiplicity == 2;
        let uncolored = mu_prev.slab(RootStatus::Uncolored);
        let mut stay = vec![0.0; m];
        let mut new_red = vec![0.0; m];
        let mut new_blue = vec![0.0; m];
        for i in 0..m {
            let w = uncolored[i];
            if w == 0.0 {
                continue;
            }
            let (pr, pb) = root[i];
            new_red[i] = w * pr;
            new_blue[i] = w * pb;
            stay[i] = w * (1.0 - pr - pb);
        }
        let k_none = self.neighbor_kernel(Color::Uncolored, p);
        let k_red = self.neighbor_kernel(Color::Red, p);
        let k_blue = self.neighbor_kernel(Color::Blue, p);

        let mut out = Measure::zero(self.space.clone());
        let mut scratch = Scratch::default();
        {
            let slabs = split_slabs(&mut out.mass, m);
            let [u, rs, rn, bs, bn] = slabs;
            self.tables.apply(&stay, &k_none, u, &mut scratch);
            self.tables.apply(mu_prev.slab(RootStatus::red(true)), &k_red, rs, &mut scratch);
            self.tables.apply(mu_prev.slab(RootStatus::red(false)), &k_red, rn, &mut scratch);
            self.tables.apply(mu_prev.slab(RootStatus::blue(true)), &k_blue, bs, &mut scratch);
            self.tables.apply(mu_prev.slab(RootStatus::blue(false)), &k_blue, bn, &mut scratch);
            let (red_dst, blue_dst) = if strict { (rs, bs) } else { (rn, bn) };
            self.tables.apply(&new_red, &k_none, red_dst, &mut scratch);
            self.tables.apply(&new_blue, &k_none, blue_dst, &mut scratch);
        }
        out
    }

    fn simplified_step(&self, mu_prev: &Measure, p: &StepParams) -> Measure {
        let m = self.space.multisets();
        let root = self.root_probs(p);
        let strict = p.multiplicity == 2;
        let rows = [
            self.single_change_rows(Color::Uncolored, p),
            self.single_change_rows(Color::Red, p),
            self.single_change_rows(Color::Blue, p),
        ];
        let mut out = Measure::zero(self.space.clone());
        let red_target = RootStatus::red(strict).index();
        let blue_target = RootStatus::blue(strict).index();
        let mut distinct = Vec::with_capacity(self.degree());
        for status in RootStatus::ALL {
            let s = status.index();
            let ctx = match status.color() {
                Color::Uncolored => 0,
                Color::Red => 1,
                Color::Blue => 2,
            };
            let row_set = &rows[ctx];
            for i in 0..m {
                let w = mu_prev.mass[s * m + i];
                if w == 0.0 {
                    continue;
                }
                // the root moves exactly; the neighborhood moves at most once
                let (mut w_stay, mut targets) = (w, [None, None]);
                if status == RootStatus::Uncolored {
                    let (pr, pb) = root[i];
                    w_stay = w * (1.0 - pr - pb);
                    targets = [Some((red_target, w * pr)), Some((blue_target, w * pb))];
                }
                distinct.clear();
                distinct.extend(self.tables.distinct(i));
                let mut moved = 0.0;
                let emit = |out: &mut Measure, j: usize, pw: f64| {
                    out.mass[s * m + j] += w_stay * pw;
                    for (dst, wt) in targets.iter().flatten() {
                        if *wt > 0.0 {
                            out.mass[dst * m + j] += wt * pw;
                        }
                    }
                };
                for (k, &(sym, count)) in distinct.iter().enumerate() {
                    let (row, _) = &row_set[sym as usize];
                    if row.is_empty() {
                        continue;
                    }
                    let others: f64 = distinct
                        .iter()
                        .enumerate()
                        .map(|(l, &(o, c))| {
                            let n = row_set[o as usize].1;
                            if l == k {
                                n.powi(c as i32 - 1)
                            } else {
                                n.powi(c as i32)
                            }
                        })
                        .product();
                    for &(o, prob) in row {
                        let pw = count as f64 * prob * others;
                        if pw > 0.0 {
                            emit(&mut out, self.tables.replace(i, sym, o), pw);
                            moved += pw;
                        }
                    }
                }
                emit(&mut out, i, 1.0 - moved);
            }
        }
        out
    }

    /// Color every remaining uncolored root and neighbor by a fair coin.
    pub fn finalize_random_coloring(&self, mu: &Measure) -> Measure {
        let m = self.space.multisets();
        let rows = self
            .space
            .alphabet()
            .iter()
            .enumerate()
            .map(|(sym, desc)| match desc {
                NeighborDescriptor::Open { .. } => vec![(RED, 0.5), (BLUE, 0.5)],
                _ => vec![(sym as u8, 1.0)],
            })
            .collect();
        let coin = NeighborKernel::new(rows);
        let half: Vec<f64> = mu.slab(RootStatus::Uncolored).iter().map(|w| 0.5 * w).collect();
        let mut out = Measure::zero(self.space.clone());
        let mut scratch = Scratch::default();
        {
            let [_, rs, rn, bs, bn] = split_slabs(&mut out.mass, m);
            self.tables.apply(mu.slab(RootStatus::red(true)), &coin, rs, &mut scratch);
            self.tables.apply(mu.slab(RootStatus::red(false)), &coin, rn, &mut scratch);
            self.tables.apply(mu.slab(RootStatus::blue(true)), &coin, bs, &mut scratch);
            self.tables.apply(mu.slab(RootStatus::blue(false)), &coin, bn, &mut scratch);
            self.tables.apply(&half, &coin, rn, &mut scratch);
            self.tables.apply(&half, &coin, bn, &mut scratch);
        }
        out
    }

    /// Parameters of the next step, or `None` once no type has mass `eps`.
    pub fn next_params(&self, mu_prev: &Measure, eps: f64, t: usize) -> Result<Option<StepParams>, TreeError> {
        let Some(dominant) = dominant_type(mu_prev.root_type_masses(), eps) else {
            return Ok(None);
        };
        let (q, q_hat) = step_thresholds(mu_prev, dominant, eps)?;
        let p = StepParams {
            t,
            dominant,
            multiplicity: multiplicity(dominant),
            q,
            q_hat,
        };
        p.validate(self.degree())?;
        Ok(Some(p))
    }

    /// Run the greedy phase to completion.
    pub fn run_phase1(&self, eps: f64) -> Result<Phase1, TreeError> {
        self.run_phase1_observed(eps, |_, _| {})
    }

    /// As [`run_phase1`](Self::run_phase1), calling `observe` after each
    /// step with the step's parameters and the new measure.
    pub fn run_phase1_observed<F>(&self, eps: f64, mut observe: F) -> Result<Phase1, TreeError>
    where
        F: FnMut(&StepParams, &Measure),
    {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(TreeError::InvalidEps(eps));
        }
        let mut mu = self.initial_measure();
        let mut schedule = Vec::new();
        let max_steps = (1.0 / eps).ceil() as usize + 1;
        while let Some(p) = self.next_params(&mu, eps, schedule.len() + 1)? {
            if schedule.len() >= max_steps {
                return Err(TreeError::TooManySteps(max_steps));
            }
            mu = self.transition_step(&mu, &p);
            observe(&p, &mu);
            schedule.push(p);
        }
        Ok(Phase1 { measure: mu, schedule })
    }

    /// Greedy phase, fair-coin completion and statistics.
    pub fn run(&self, eps: f64) -> Result<TreeReport, TreeError> {
        let phase1 = self.run_phase1(eps)?;
        self.report(eps, phase1)
    }

    pub fn report(&self, eps: f64, phase1: Phase1) -> Result<TreeReport, TreeError> {
        let leftover = phase1.measure.uncolored_root_mass();
        let stats = cut_statistics(&phase1.measure);
        let completed = cut_statistics(&self.finalize_random_coloring(&phase1.measure));
        let delta = conflict_degree(self.degree());
        let improvement = bihole_fraction(delta).ok().map(|mu| mu * stats.eligible_measure);
        Ok(TreeReport {
            d: self.degree(),
            eps,
            mode: self.mode,
            steps_taken: phase1.schedule.len(),
            schedule: phase1.schedule,
            cut_per_vertex: stats.cut_per_vertex,
            miscolored_measure: stats.miscolored_measure,
            eligible_measure: stats.eligible_measure,
            improvement,
            improved_cut_per_vertex: improvement.map(|x| stats.cut_per_vertex - x),
            completed,
            leftover_uncolored: leftover,
            prune_threshold: self.prune_threshold,
        })
    }
}

/// Maximum conflict-graph degree for eligible vertices: a vertex of terminal
/// type `(floor(d/2), floor(d/2) + 1)` has `floor(d/2) + 1` opposite
/// neighbors.
pub fn conflict_degree(d: usize) -> u8 {
    (d / 2 + 1) as u8
}

fn split_slabs(mass: &mut [f64], m: usize) -> [&mut [f64]; 5] {
    let (u, rest) = mass.split_at_mut(m);
    let (rs, rest) = rest.split_at_mut(m);
    let (rn, rest) = rest.split_at_mut(m);
    let (bs, bn) = rest.split_at_mut(m);
    [u, rs, rn, bs, bn]
}

/// Expected cut edges per vertex: `d * P(root red, fixed neighbor blue)`.
/// Uncolored vertices belong to neither class.
pub fn cut_per_vertex(mu: &Measure) -> f64 {
    let sp = mu.space();
    let red_roots = [RootStatus::red(true), RootStatus::red(false)];
    compensated_sum(red_roots.iter().flat_map(|&r| {
        mu.slab(r)
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| w * sp.blue_count(i) as f64)
    }))
}

/// `(miscolored, eligible)`. Miscolored is twice the mass of red roots
/// whose neighbors are all colored with a blue majority; eligible is twice
/// the mass of strictly colored red roots with exactly `floor(d/2) + 1` blue
/// and `d - floor(d/2) - 1` red neighbors.
pub fn miscolored_and_eligible_measures(mu: &Measure) -> (f64, f64) {
    let sp = mu.space();
    let d = sp.degree();
    let minority = d / 2 + 1;
    let mut mis = Vec::new();
    let mut eligible = Vec::new();
    for root in [RootStatus::red(true), RootStatus::red(false)] {
        for (i, &w) in mu.slab(root).iter().enumerate() {
            if w == 0.0 || sp.open_count(i) > 0 {
                continue;
            }
            let blue = sp.blue_count(i);
            if 2 * blue > d {
                mis.push(w);
            }
            if root.is_strict() && blue == minority {
                eligible.push(w);
            }
        }
    }
    (2.0 * compensated_sum(mis), 2.0 * compensated_sum(eligible))
}

pub fn cut_statistics(mu: &Measure) -> CutStatistics {
    let (mis, eligible) = miscolored_and_eligible_measures(mu);
    CutStatistics {
        cut_per_vertex: cut_per_vertex(mu),
        miscolored_measure: mis,
        eligible_measure: eligible,
    }
}
