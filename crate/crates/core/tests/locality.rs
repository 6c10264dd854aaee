mod common;

use regbisect::coloring::{LocalRun, Perception, SeedSource, SeedTable};
use regbisect::graph::{sample_regular_graph, SampleMode};

use common::{ball, tree_schedule};

/// Seeds of `base` inside `keep`, of `other` outside.
struct Mixed<'a> {
    base: SeedTable,
    other: SeedTable,
    keep: &'a [bool],
}

impl SeedSource for Mixed<'_> {
    fn seed(&self, v: usize, t: usize) -> f64 {
        if self.keep[v] {
            self.base.seed(v, t)
        } else {
            self.other.seed(v, t)
        }
    }
}

#[test]
fn color_after_t_steps_depends_on_the_t_minus_1_ball() {
    let schedule = tree_schedule(5, 0.02);
    let (g, _) = sample_regular_graph(3000, 5, 11, SampleMode::Reject).unwrap();
    let base = SeedTable::new(1);
    for (trial, &steps) in [1usize, 2, 3, 4].iter().enumerate() {
        for perception in [Perception::Normal, Perception::Colorblind] {
            let mut reference = LocalRun::new(&g, &schedule, &base, perception).unwrap();
            for _ in 0..steps {
                reference.step();
            }
            for v in [0usize, 17, 999, 2500] {
                let keep = ball(&g, v, steps - 1);
                let mixed = Mixed {
                    base,
                    other: SeedTable::new(100 + trial as u64),
                    keep: &keep,
                };
                let mut run = LocalRun::new(&g, &schedule, &mixed, perception).unwrap();
                for _ in 0..steps {
                    run.step();
                }
                assert_eq!(run.colors()[v], reference.colors()[v], "v={v} steps={steps}");
            }
        }
    }
}

#[test]
fn outside_seeds_do_matter_somewhere() {
    // sanity for the test above: resampling every seed changes the coloring
    let schedule = tree_schedule(5, 0.02);
    let (g, _) = sample_regular_graph(3000, 5, 11, SampleMode::Reject).unwrap();
    let run = |m| {
        let seeds = SeedTable::new(m);
        let mut r = LocalRun::new(&g, &schedule, &seeds, Perception::Normal).unwrap();
        for _ in 0..4 {
            r.step();
        }
        r.colors().to_vec()
    };
    assert_ne!(run(1), run(2));
}

#[test]
fn runs_are_deterministic() {
    let schedule = tree_schedule(5, 0.02);
    let (g1, m1) = sample_regular_graph(2000, 5, 9, SampleMode::Reject).unwrap();
    let (g2, m2) = sample_regular_graph(2000, 5, 9, SampleMode::Reject).unwrap();
    assert_eq!(g1.to_edge_list(), g2.to_edge_list());
    assert_eq!(m1, m2);
    let seeds = SeedTable::new(4);
    let a = LocalRun::new(&g1, &schedule, &seeds, Perception::Normal).unwrap().finish();
    let b = LocalRun::new(&g2, &schedule, &seeds, Perception::Normal).unwrap().finish();
    assert_eq!(a.0.colors(), b.0.colors());
    assert_eq!(a.1, b.1);
}
