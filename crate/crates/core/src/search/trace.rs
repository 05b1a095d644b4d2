use std::fmt;
use std::io::Write;

use super::Edit;
use crate::error::Result;
use crate::graph::{Cpdag, VariableSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    Forward,
    Backward,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Forward => "forward",
            Phase::Backward => "backward",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchState {
    pub class: Cpdag,
    pub score: f64,
    /// Number of member DAGs, filled in once the class has been expanded.
    pub member_count_hint: Option<usize>,
}

impl SearchState {
    pub fn new(class: Cpdag, score: f64) -> Self {
        SearchState {
            class,
            score,
            member_count_hint: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceStep {
    pub phase: Phase,
    /// The edit that produced this state; `None` for the start entry.
    pub edit: Option<Edit>,
    pub state: SearchState,
}

/// Every state visited by a search, starting with the initial class.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchTrace {
    steps: Vec<TraceStep>,
    /// Stopped by the step bound while an improving move remained.
    pub truncated: bool,
}

impl SearchTrace {
    pub(crate) fn start(phase: Phase, class: Cpdag, score: f64) -> Self {
        SearchTrace {
            steps: vec![TraceStep {
                phase,
                edit: None,
                state: SearchState::new(class, score),
            }],
            truncated: false,
        }
    }

    pub(crate) fn push(&mut self, edit: Edit, state: SearchState) {
        self.steps.push(TraceStep {
            phase: edit.phase(),
            edit: Some(edit),
            state,
        });
    }

    pub(crate) fn set_member_count(&mut self, count: usize) {
        if let Some(last) = self.steps.last_mut() {
            last.state.member_count_hint = Some(count);
        }
    }

    /// Appends a trace that starts where this one ends, dropping its start entry.
    pub(crate) fn extend(&mut self, next: SearchTrace) {
        self.steps.extend(next.steps.into_iter().skip(1));
        self.truncated |= next.truncated;
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &TraceStep {
        self.steps.last().expect("trace has a start entry")
    }

    pub fn result(&self) -> &Cpdag {
        &self.last().state.class
    }

    pub fn score(&self) -> f64 {
        self.last().state.score
    }

    /// Number of moves taken.
    pub fn moves(&self) -> usize {
        self.steps.len() - 1
    }

    /// Tab-separated log, one move per line: phase, move, score before, score after.
    pub fn write_tsv<W: Write>(&self, mut w: W, spec: &VariableSpec) -> Result<()> {
        writeln!(w, "phase\tmove\tscore_before\tscore_after")?;
        for pair in self.steps.windows(2) {
            let edit = pair[1].edit.expect("only the start entry lacks an edit");
            writeln!(
                w,
                "{}\t{}\t{}\t{}",
                pair[1].phase,
                edit.describe(spec),
                pair[0].state.score,
                pair[1].state.score
            )?;
        }
        if self.truncated {
            writeln!(w, "# truncated")?;
        }
        Ok(())
    }
}
