//! Iterates of the worked example against values composed exactly from the
//! closed-form stage formulas by `golden/paper_example.py`.

use std::collections::BTreeMap;

use bregman_ep::solver::{IterateState, Stages};
use bregman_ep::{Preset, Vector};

const TOL: f64 = 1e-12;

fn golden() -> BTreeMap<usize, BTreeMap<String, f64>> {
    let text = include_str!("golden/paper_example.golden");
    let mut table: BTreeMap<usize, BTreeMap<String, f64>> = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 3, "malformed golden line {line:?}");
        table
            .entry(fields[0].parse().unwrap())
            .or_default()
            .insert(fields[1].to_string(), fields[2].parse().unwrap());
    }
    table
}

fn stage(stages: &Stages, name: &str) -> f64 {
    let v = match name {
        "y" => &stages.y,
        "z" => &stages.z,
        "v" => &stages.v,
        "w" => &stages.w,
        "u" => &stages.u,
        "k" => &stages.k,
        "h" => &stages.h,
        other => panic!("unknown stage {other}"),
    };
    v[0]
}

#[test]
fn iterates_match_golden_file() {
    let table = golden();
    assert_eq!(table.keys().copied().collect::<Vec<_>>(), vec![1, 2, 10, 100]);
    let solver = Preset::PaperExample.solver();
    let anchor = Vector::scalar(1.0).unwrap();
    let mut state = IterateState::initial(Vector::scalar(5.0).unwrap());
    let last = *table.keys().last().unwrap();
    let mut compared = 0;
    while state.n <= last {
        let next = solver.step(&state, &anchor).unwrap();
        if let Some(expected) = table.get(&state.n) {
            let stages = next.stages.as_ref().unwrap();
            for (name, &want) in expected {
                let got = match name.as_str() {
                    "x" => state.x[0],
                    "x_next" => next.x[0],
                    other => stage(stages, other),
                };
                assert!(
                    (got - want).abs() <= TOL * want.abs().max(1.0),
                    "n={} {name}: got {got:e}, golden {want:e}",
                    state.n
                );
                compared += 1;
            }
        }
        state = next;
    }
    assert_eq!(compared, 4 * 9);
}
