//! Depth-2 neighborhood states of the tree root.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::types::Color;

/// What is tracked about one neighbor of the root.
///
/// Colored neighbors carry only their color; uncolored ones carry the color
/// counts among their `d - 1` outer neighbors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NeighborDescriptor {
    ColoredRed,
    ColoredBlue,
    Open { outer_red: u8, outer_blue: u8 },
}

impl NeighborDescriptor {
    pub fn open(outer_red: u8, outer_blue: u8) -> Self {
        NeighborDescriptor::Open {
            outer_red,
            outer_blue,
        }
    }

    pub fn color(self) -> Color {
        match self {
            NeighborDescriptor::ColoredRed => Color::Red,
            NeighborDescriptor::ColoredBlue => Color::Blue,
            NeighborDescriptor::Open { .. } => Color::Uncolored,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            NeighborDescriptor::ColoredRed => NeighborDescriptor::ColoredBlue,
            NeighborDescriptor::ColoredBlue => NeighborDescriptor::ColoredRed,
            NeighborDescriptor::Open {
                outer_red,
                outer_blue,
            } => NeighborDescriptor::Open {
                outer_red: outer_blue,
                outer_blue: outer_red,
            },
        }
    }
}

/// Root color plus, for colored roots, whether the coloring step had an
/// asymmetric dominant type (the vertex joined a strict majority).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootStatus {
    Uncolored,
    Colored { color: Color, strict: bool },
}

impl RootStatus {
    pub const ALL: [RootStatus; 5] = [
        RootStatus::Uncolored,
        RootStatus::Colored {
            color: Color::Red,
            strict: true,
        },
        RootStatus::Colored {
            color: Color::Red,
            strict: false,
        },
        RootStatus::Colored {
            color: Color::Blue,
            strict: true,
        },
        RootStatus::Colored {
            color: Color::Blue,
            strict: false,
        },
    ];

    pub fn red(strict: bool) -> Self {
        RootStatus::Colored {
            color: Color::Red,
            strict,
        }
    }

    pub fn blue(strict: bool) -> Self {
        RootStatus::Colored {
            color: Color::Blue,
            strict,
        }
    }

    pub fn color(self) -> Color {
        match self {
            RootStatus::Uncolored => Color::Uncolored,
            RootStatus::Colored { color, .. } => color,
        }
    }

    pub fn is_strict(self) -> bool {
        matches!(self, RootStatus::Colored { strict: true, .. })
    }

    /// Dense index into [`RootStatus::ALL`].
    pub fn index(self) -> usize {
        match self {
            RootStatus::Uncolored => 0,
            RootStatus::Colored { color: Color::Red, strict: true } => 1,
            RootStatus::Colored { color: Color::Red, strict: false } => 2,
            RootStatus::Colored { color: Color::Blue, strict: true } => 3,
            RootStatus::Colored { color: Color::Blue, strict: false } => 4,
            RootStatus::Colored { color: Color::Uncolored, .. } => {
                panic!("colored root status with Uncolored color")
            }
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            RootStatus::Uncolored => RootStatus::Uncolored,
            RootStatus::Colored { color, strict } => RootStatus::Colored {
                color: color.opposite(),
                strict,
            },
        }
    }
}

/// Canonical depth-2 state: root status and the sorted neighbor multiset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TreeState {
    pub root: RootStatus,
    neighbors: Vec<NeighborDescriptor>,
}

impl TreeState {
    /// Build a state; the neighbors are sorted into canonical order.
    pub fn new(root: RootStatus, mut neighbors: Vec<NeighborDescriptor>) -> Self {
        neighbors.sort_unstable();
        TreeState { root, neighbors }
    }

    pub fn neighbors(&self) -> &[NeighborDescriptor] {
        &self.neighbors
    }

    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }

    /// `(#ColoredRed, #ColoredBlue)` among the neighbors.
    pub fn colored_counts(&self) -> (usize, usize) {
        let red = self
            .neighbors
            .iter()
            .filter(|n| **n == NeighborDescriptor::ColoredRed)
            .count();
        let blue = self
            .neighbors
            .iter()
            .filter(|n| **n == NeighborDescriptor::ColoredBlue)
            .count();
        (red, blue)
    }

    /// Global red/blue swap.
    pub fn swapped(&self) -> TreeState {
        TreeState::new(
            self.root.swapped(),
            self.neighbors.iter().map(|n| n.swapped()).collect(),
        )
    }

    /// Whether the descriptors fit degree `d`.
    pub fn is_valid_for(&self, d: usize) -> bool {
        self.neighbors.len() == d
            && self.neighbors.iter().all(|n| match n {
                NeighborDescriptor::Open {
                    outer_red,
                    outer_blue,
                } => (*outer_red as usize + *outer_blue as usize) < d,
                _ => true,
            })
    }
}

impl fmt::Display for TreeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let root = match self.root {
            RootStatus::Uncolored => "U".to_string(),
            RootStatus::Colored { color, strict } => {
                let c = if color == Color::Red { "R" } else { "B" };
                if strict {
                    format!("{c}*")
                } else {
                    c.to_string()
                }
            }
        };
        write!(f, "{root};")?;
        for (i, n) in self.neighbors.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            match n {
                NeighborDescriptor::ColoredRed => write!(f, "R")?,
                NeighborDescriptor::ColoredBlue => write!(f, "B")?,
                NeighborDescriptor::Open {
                    outer_red,
                    outer_blue,
                } => write!(f, "U({outer_red},{outer_blue})")?,
            }
        }
        Ok(())
    }
}
