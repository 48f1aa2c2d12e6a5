use std::fmt::Write as _;
use std::sync::Arc;

use crate::dsl::Program;
use crate::rollout::{cross_play, ProgramPolicy};
use crate::sim::{GridLayout, DEFAULT_HORIZON};

/// Pairwise cross-play rewards of a set of programs on one layout.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalMatrix {
    pub layout: String,
    pub names: Vec<String>,
    /// `values[i][j]`: program i partnered with program j.
    pub values: Vec<Vec<f64>>,
}

impl EvalMatrix {
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.names.len()).map(|i| self.values[i][i]).collect()
    }

    /// Every entry divided by the largest self-play score; an all-zero
    /// diagonal leaves the matrix unchanged.
    pub fn normalized(&self) -> EvalMatrix {
        let max = self.diagonal().into_iter().fold(0.0, f64::max);
        let scale = if max > 0.0 { max } else { 1.0 };
        EvalMatrix {
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|v| v / scale).collect())
                .collect(),
            ..self.clone()
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("program");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (n, row) in self.names.iter().zip(&self.values) {
            s.push_str(n);
            for v in row {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }
}

/// Fills the upper triangle with greedy cross-play (both role assignments,
/// `episodes` each, one shared seed) and mirrors it.
pub fn cmd_eval(
    programs: &[(String, Program)],
    layouts: &[GridLayout],
    episodes: usize,
    seed: u64,
) -> Vec<EvalMatrix> {
    layouts
        .iter()
        .map(|layout| {
            let layout = Arc::new(layout.clone());
            let n = programs.len();
            let mut values = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let a = ProgramPolicy::greedy(&programs[i].1);
                    let b = ProgramPolicy::greedy(&programs[j].1);
                    let r = cross_play(&layout, &a, &b, episodes, seed, DEFAULT_HORIZON);
                    values[i][j] = r;
                    values[j][i] = r;
                }
            }
            EvalMatrix {
                layout: layout.name.clone(),
                names: programs.iter().map(|p| p.0.clone()).collect(),
                values,
            }
        })
        .collect()
}
