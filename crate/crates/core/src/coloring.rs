//! The ε-step local algorithm on a finite graph, driven by a precomputed
//! schedule and per-vertex seeds.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::rng::{self, Purpose};
use crate::tree::{NeighborDescriptor, RootStatus, TreeState};
use crate::types::{Color, OrientedType, Orientation, StepParams, StepParamsError};

#[derive(Debug, Error)]
pub enum ColoringError {
    #[error("schedule entry {index}: {source}")]
    Schedule {
        index: usize,
        #[source]
        source: StepParamsError,
    },
    #[error("schedule entry {index} has t={t}, expected {expected}")]
    StepIndex { index: usize, t: usize, expected: usize },
    #[error("vertex {0} is uncolored")]
    Uncolored(usize),
    #[error("assignment has {got} vertices, graph has {expected}")]
    SizeMismatch { got: usize, expected: usize },
}

/// How a vertex reads its neighbors' colors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Perception {
    Normal,
    /// Neighbor colors are read swapped and seeds pass through the
    /// involution [`involute`].
    Colorblind,
}

impl std::str::FromStr for Perception {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "normal" => Ok(Perception::Normal),
            "colorblind" => Ok(Perception::Colorblind),
            other => Err(format!("unknown perception `{other}` (expected normal|colorblind)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub color: Color,
    /// Step at which the vertex was colored: 0 never, `N + 1` for the
    /// terminal coin.
    pub step: u32,
    /// Colored at a step with an asymmetric dominant type.
    pub strict: bool,
}

impl VertexRecord {
    const UNCOLORED: VertexRecord = VertexRecord {
        color: Color::Uncolored,
        step: 0,
        strict: false,
    };
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoringAssignment {
    records: Vec<VertexRecord>,
}

impl ColoringAssignment {
    pub fn uncolored(n: usize) -> Self {
        ColoringAssignment {
            records: vec![VertexRecord::UNCOLORED; n],
        }
    }

    pub fn from_records(records: Vec<VertexRecord>) -> Self {
        ColoringAssignment { records }
    }

    /// Colors only; step 0 and strict=false are recorded for colored
    /// vertices.
    pub fn from_colors(colors: &[Color]) -> Self {
        ColoringAssignment {
            records: colors
                .iter()
                .map(|&color| VertexRecord {
                    color,
                    step: 0,
                    strict: false,
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[VertexRecord] {
        &self.records
    }

    pub fn record(&self, v: usize) -> VertexRecord {
        self.records[v]
    }

    pub fn color(&self, v: usize) -> Color {
        self.records[v].color
    }

    pub fn colors(&self) -> Vec<Color> {
        self.records.iter().map(|r| r.color).collect()
    }

    /// Change a vertex's color, keeping its coloring-time metadata.
    pub fn set_color(&mut self, v: usize, color: Color) {
        self.records[v].color = color;
    }

    /// `(red, blue, uncolored)` counts.
    pub fn class_sizes(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in &self.records {
            match r.color {
                Color::Red => c.0 += 1,
                Color::Blue => c.1 += 1,
                Color::Uncolored => c.2 += 1,
            }
        }
        c
    }

    pub fn is_fully_colored(&self) -> bool {
        self.records.iter().all(|r| r.color.is_colored())
    }
}

/// Source of the per-vertex uniform seeds `s_t(v)`, `t = 1..=N+1`.
pub trait SeedSource: Sync {
    fn seed(&self, v: usize, t: usize) -> f64;
}

/// Seeds computed on demand from a master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedTable {
    pub master: u64,
}

impl SeedTable {
    pub fn new(master: u64) -> Self {
        SeedTable { master }
    }
}

impl SeedSource for SeedTable {
    fn seed(&self, v: usize, t: usize) -> f64 {
        rng::unit(self.master, Purpose::VertexSeed, v as u64, t as u64)
    }
}

impl<F> SeedSource for F
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    fn seed(&self, v: usize, t: usize) -> f64 {
        self(v, t)
    }
}

/// The seed involution: at a symmetric step it swaps `[0, q]` and
/// `(q, 2q]`; at asymmetric steps it is the identity; the terminal coin
/// (`step = None`) is mirrored.
pub fn involute(s: f64, step: Option<&StepParams>) -> f64 {
    match step {
        None => 1.0 - s,
        Some(p) if p.multiplicity == 1 => {
            if s <= p.q {
                s + p.q
            } else if s <= 2.0 * p.q {
                s - p.q
            } else {
                s
            }
        }
        Some(_) => s,
    }
}

/// `(#red, #blue)` among the neighbors of `v`.
pub fn vertex_type(g: &Graph, colors: &[Color], v: usize) -> OrientedType {
    let mut r = 0u8;
    let mut b = 0u8;
    for &w in g.neighbors(v) {
        match colors[w as usize] {
            Color::Red => r += 1,
            Color::Blue => b += 1,
            Color::Uncolored => {}
        }
    }
    OrientedType::new(r, b)
}

fn check_schedule(schedule: &[StepParams], d: usize) -> Result<(), ColoringError> {
    for (index, p) in schedule.iter().enumerate() {
        if p.t != index + 1 {
            return Err(ColoringError::StepIndex {
                index,
                t: p.t,
                expected: index + 1,
            });
        }
        p.validate(d).map_err(|source| ColoringError::Schedule { index, source })?;
    }
    Ok(())
}

/// Decision of an uncolored vertex with perceived type `ty` and seed `s`.
fn decide(ty: OrientedType, s: f64, p: &StepParams) -> Option<Color> {
    if ty.unordered() != p.dominant {
        return None;
    }
    if p.multiplicity == 1 {
        if s <= p.q {
            Some(Color::Red)
        } else if s <= 2.0 * p.q {
            Some(Color::Blue)
        } else {
            None
        }
    } else if s <= p.q {
        match ty.orientation() {
            Orientation::RedHeavy => Some(Color::Red),
            Orientation::BlueHeavy => Some(Color::Blue),
            Orientation::Balanced => None,
        }
    } else {
        None
    }
}

/// Synchronous execution of a schedule, one step at a time.
pub struct LocalRun<'a, S: SeedSource> {
    g: &'a Graph,
    schedule: &'a [StepParams],
    seeds: &'a S,
    perception: Perception,
    records: Vec<VertexRecord>,
    colors: Vec<Color>,
    t: usize,
    newly_colored: Vec<usize>,
}

impl<'a, S: SeedSource> LocalRun<'a, S> {
    pub fn new(g: &'a Graph, schedule: &'a [StepParams], seeds: &'a S, perception: Perception) -> Result<Self, ColoringError> {
        check_schedule(schedule, g.d())?;
        Ok(LocalRun {
            g,
            schedule,
            seeds,
            perception,
            records: vec![VertexRecord::UNCOLORED; g.n()],
            colors: vec![Color::Uncolored; g.n()],
            t: 0,
            newly_colored: Vec::with_capacity(schedule.len() + 1),
        })
    }

    /// Steps completed so far (the terminal coin counts as step `N + 1`).
    pub fn steps_done(&self) -> usize {
        self.t
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn records(&self) -> &[VertexRecord] {
        &self.records
    }

    /// Vertices colored at each completed step.
    pub fn newly_colored(&self) -> &[usize] {
        &self.newly_colored
    }

    fn seed(&self, v: usize, t: usize, step: Option<&StepParams>) -> f64 {
        let s = self.seeds.seed(v, t);
        match self.perception {
            Perception::Normal => s,
            Perception::Colorblind => involute(s, step),
        }
    }

    /// Run the next greedy step; `None` once the schedule is exhausted.
    pub fn step(&mut self) -> Option<usize> {
        let p = self.schedule.get(self.t)?;
        let t = self.t + 1;
        let colorblind = self.perception == Perception::Colorblind;
        let decisions: Vec<(usize, Color)> = (0..self.g.n())
            .into_par_iter()
            .filter(|&v| self.colors[v] == Color::Uncolored)
            .filter_map(|v| {
                let mut ty = vertex_type(self.g, &self.colors, v);
                if colorblind {
                    ty = ty.flipped();
                }
                decide(ty, self.seed(v, t, Some(p)), p).map(|c| (v, c))
            })
            .collect();
        let strict = p.multiplicity == 2;
        for &(v, color) in &decisions {
            self.colors[v] = color;
            self.records[v] = VertexRecord {
                color,
                step: t as u32,
                strict,
            };
        }
        self.t = t;
        self.newly_colored.push(decisions.len());
        Some(decisions.len())
    }

    /// Run the remaining steps and the terminal fair coin.
    pub fn finish(mut self) -> (ColoringAssignment, Vec<usize>) {
        while self.step().is_some() {}
        let t = self.schedule.len() + 1;
        let mut count = 0;
        for v in 0..self.g.n() {
            if self.colors[v] == Color::Uncolored {
                let color = if self.seed(v, t, None) <= 0.5 { Color::Red } else { Color::Blue };
                self.colors[v] = color;
                self.records[v] = VertexRecord {
                    color,
                    step: t as u32,
                    strict: false,
                };
                count += 1;
            }
        }
        self.newly_colored.push(count);
        (ColoringAssignment { records: self.records }, self.newly_colored)
    }
}

/// Full run: every step of `schedule`, then the terminal coin.
pub fn run_schedule<S: SeedSource>(
    g: &Graph,
    schedule: &[StepParams],
    seeds: &S,
    perception: Perception,
) -> Result<ColoringAssignment, ColoringError> {
    Ok(LocalRun::new(g, schedule, seeds, perception)?.finish().0)
}

/// Number of bicolored edges.
pub fn cut_size(g: &Graph, coloring: &ColoringAssignment) -> Result<usize, ColoringError> {
    if coloring.len() != g.n() {
        return Err(ColoringError::SizeMismatch {
            got: coloring.len(),
            expected: g.n(),
        });
    }
    if let Some(v) = (0..g.n()).find(|&v| !coloring.color(v).is_colored()) {
        return Err(ColoringError::Uncolored(v));
    }
    Ok(g.edges().filter(|&(u, v)| coloring.color(u) != coloring.color(v)).count())
}

/// Move uniformly chosen vertices out of the larger class until the class
/// sizes differ by at most one. Returns the repaired coloring and the number
/// of moves.
pub fn balance_repair(coloring: &ColoringAssignment, master_seed: u64) -> Result<(ColoringAssignment, usize), ColoringError> {
    if let Some(v) = (0..coloring.len()).find(|&v| !coloring.color(v).is_colored()) {
        return Err(ColoringError::Uncolored(v));
    }
    let (red, blue, _) = coloring.class_sizes();
    let (larger, diff) = if red >= blue { (Color::Red, red - blue) } else { (Color::Blue, blue - red) };
    let moves = diff / 2;
    let mut out = coloring.clone();
    if moves == 0 {
        return Ok((out, 0));
    }
    let mut pool: Vec<usize> = (0..coloring.len()).filter(|&v| coloring.color(v) == larger).collect();
    let mut rng = rng::stream(master_seed, Purpose::BalanceRepair, coloring.len() as u64);
    let (chosen, _) = pool.partial_shuffle(&mut rng, moves);
    for &v in chosen.iter() {
        out.set_color(v, larger.opposite());
    }
    Ok((out, moves))
}

fn root_status(r: &VertexRecord) -> RootStatus {
    match r.color {
        Color::Uncolored => RootStatus::Uncolored,
        color => RootStatus::Colored { color, strict: r.strict },
    }
}

/// Canonical depth-2 state of vertex `v`.
pub fn two_ball_state(g: &Graph, records: &[VertexRecord], v: usize) -> TreeState {
    let neighbors = g
        .neighbors(v)
        .iter()
        .map(|&u| {
            let u = u as usize;
            match records[u].color {
                Color::Red => NeighborDescriptor::ColoredRed,
                Color::Blue => NeighborDescriptor::ColoredBlue,
                Color::Uncolored => {
                    let (mut r, mut b) = (0u8, 0u8);
                    for &w in g.neighbors(u) {
                        if w as usize == v {
                            continue;
                        }
                        match records[w as usize].color {
                            Color::Red => r += 1,
                            Color::Blue => b += 1,
                            Color::Uncolored => {}
                        }
                    }
                    NeighborDescriptor::open(r, b)
                }
            }
        })
        .collect();
    TreeState::new(root_status(&records[v]), neighbors)
}

/// Whether the closed 2-ball of `v` induces a tree.
pub fn two_ball_is_tree(g: &Graph, v: usize) -> bool {
    let nb = g.neighbors(v);
    let mut seen: Vec<u32> = Vec::with_capacity(g.d() * g.d());
    for &u in nb {
        for &w in g.neighbors(u as usize) {
            if w as usize == v {
                continue;
            }
            // a neighbor adjacent to another neighbor, or two paths to w
            if nb.contains(&w) || seen.contains(&w) {
                return false;
            }
            seen.push(w);
        }
    }
    // edges between second neighbors
    for &w in &seen {
        for &x in g.neighbors(w as usize) {
            if x != w && seen.contains(&x) {
                return false;
            }
        }
    }
    true
}

/// Frequencies of depth-2 states over vertices whose 2-ball is a tree.
pub fn empirical_two_ball_distribution(g: &Graph, records: &[VertexRecord]) -> HashMap<TreeState, f64> {
    let mut counts: HashMap<TreeState, usize> = HashMap::new();
    let mut total = 0usize;
    for v in 0..g.n() {
        if two_ball_is_tree(g, v) {
            *counts.entry(two_ball_state(g, records, v)).or_default() += 1;
            total += 1;
        }
    }
    counts
        .into_iter()
        .map(|(s, c)| (s, c as f64 / total.max(1) as f64))
        .collect()
}

/// Fraction of vertices colored against a strict majority of the other
/// color: red with more blue than red neighbors, and vice versa.
pub fn miscolored_fraction(g: &Graph, coloring: &ColoringAssignment) -> f64 {
    let colors = coloring.colors();
    let count = (0..g.n())
        .filter(|&v| {
            let ty = vertex_type(g, &colors, v);
            match colors[v] {
                Color::Red => ty.blue > ty.red,
                Color::Blue => ty.red > ty.blue,
                Color::Uncolored => false,
            }
        })
        .count();
    count as f64 / g.n().max(1) as f64
}
