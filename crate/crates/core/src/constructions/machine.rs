//! Two-symbol Turing machines in the common `1RB1LB_1LA0LC_…` notation,
//! run under a step cap.

use std::collections::VecDeque;

use super::source::EnumerationSource;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Transition {
    write: u8,
    right: bool,
    /// `None` halts.
    next: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Machine {
    table: Vec<[Option<Transition>; 2]>,
}

impl Machine {
    /// States are `_`-separated; each has two three-character transitions for
    /// read symbols 0 and 1. `---` (or a target outside the table, such as
    /// `Z`) halts.
    pub fn parse(text: &str) -> Result<Machine> {
        let states: Vec<&str> = text.trim().split('_').collect();
        let bad = |m: String| Error::InvalidArgument(format!("machine `{text}`: {m}"));
        let mut table = Vec::with_capacity(states.len());
        for st in &states {
            let chars: Vec<char> = st.chars().collect();
            if chars.len() != 6 {
                return Err(bad(format!("state `{st}` is not six characters")));
            }
            let mut row = [None, None];
            for (slot, c) in row.iter_mut().zip(chars.chunks(3)) {
                if c == ['-', '-', '-'] {
                    continue;
                }
                let write = match c[0] {
                    '0' => 0,
                    '1' => 1,
                    x => return Err(bad(format!("bad symbol `{x}`"))),
                };
                let right = match c[1] {
                    'R' => true,
                    'L' => false,
                    x => return Err(bad(format!("bad direction `{x}`"))),
                };
                if !c[2].is_ascii_uppercase() {
                    return Err(bad(format!("bad state `{}`", c[2])));
                }
                let next = (c[2] as usize) - ('A' as usize);
                *slot = Some(Transition {
                    write,
                    right,
                    next: (next < states.len()).then_some(next),
                });
            }
            table.push(row);
        }
        Ok(Machine { table })
    }

    /// Steps to halt on input n (n ones from the head rightwards), or
    /// `None` if the machine is still running after `cap` steps.
    pub fn run(&self, n: u64, cap: u64) -> Option<u64> {
        let mut tape: VecDeque<u8> = std::iter::repeat(1).take(n as usize).collect();
        if tape.is_empty() {
            tape.push_back(0);
        }
        let mut head = 0usize;
        let mut state = 0usize;
        for step in 0..cap {
            let t = match self.table[state][tape[head] as usize] {
                Some(t) => t,
                None => return Some(step),
            };
            tape[head] = t.write;
            if t.right {
                head += 1;
                if head == tape.len() {
                    tape.push_back(0);
                }
            } else if head == 0 {
                tape.push_front(0);
            } else {
                head -= 1;
            }
            match t.next {
                Some(s) => state = s,
                None => return Some(step + 1),
            }
        }
        None
    }
}

/// Runs machine e on inputs `0..inputs` for at most `cap` steps each and
/// lists the halting pairs ordered by halting time, then (e, n).
pub fn source_from_machines(machines: &[Machine], inputs: u64, cap: u64) -> Result<EnumerationSource> {
    let mut halted = Vec::new();
    for (e, m) in machines.iter().enumerate() {
        for n in 0..inputs {
            if let Some(steps) = m.run(n, cap) {
                halted.push((steps, e as u64, n));
            }
        }
    }
    halted.sort();
    Ok(EnumerationSource::new(halted.into_iter().map(|(_, e, n)| (e, n)).collect(), [])?
        .with_columns(machines.len() as u64))
}
