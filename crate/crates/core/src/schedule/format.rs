//! Text and JSON encodings of schedules.
//!
//! Text format, one step per line after a lattice header:
//!
//! ```text
//! chain 8
//! 1/2 UUDDUUDD
//! 1/2 UDDUUDDU
//! 1/1 UUUUUUUU
//! ```
//!
//! Durations are always written as reduced `p/q`; charge strings use
//! `N`/`U`/`D` per site, row-major for grids (`grid R C` header).

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ChargeConfig, Schedule, Step};
use crate::geometry::Lattice;
use crate::{format_rational, Error, Rational, Result};

impl Schedule {
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.lattice);
        for step in &self.steps {
            out.push_str(&format_rational(&step.duration));
            out.push(' ');
            out.push_str(&step.config.to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (line, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing lattice header".into(),
        })?;
        let lattice = parse_header(header).map_err(|msg| Error::Parse { line, msg })?;
        let mut schedule = Schedule::new(lattice);
        for (line, body) in lines {
            let err = |msg: String| Error::Parse { line, msg };
            let mut fields = body.split_whitespace();
            let (Some(dur), Some(charges), None) = (fields.next(), fields.next(), fields.next())
            else {
                return Err(err("expected `<duration> <charges>`".into()));
            };
            let duration =
                Rational::from_str(dur).map_err(|e| err(format!("bad duration {dur:?}: {e}")))?;
            let config = ChargeConfig::parse(charges)
                .ok_or_else(|| err(format!("charge string {charges:?} must use N, U, D")))?;
            let step = Step::new(config, duration).map_err(|e| err(e.to_string()))?;
            schedule.push(step).map_err(|e| err(e.to_string()))?;
        }
        Ok(schedule)
    }

    pub fn to_document(&self) -> ScheduleDocument {
        ScheduleDocument {
            lattice: self.lattice,
            total_time: format_rational(&self.total_time()),
            steps: self
                .steps
                .iter()
                .map(|s| StepDocument {
                    duration: format_rational(&s.duration),
                    config: s.config.to_string(),
                })
                .collect(),
        }
    }
}

fn parse_header(header: &str) -> std::result::Result<Lattice, String> {
    let fields: Vec<&str> = header.split_whitespace().collect();
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| format!("bad size {s:?}: {e}"))
    };
    let lattice = match fields.as_slice() {
        ["chain", n] => Lattice::chain(num(n)?),
        ["grid", r, c] => Lattice::grid(num(r)?, num(c)?),
        _ => return Err(format!("expected `chain N` or `grid R C`, got {header:?}")),
    };
    lattice.map_err(|e| e.to_string())
}

/// JSON view of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDocument {
    pub lattice: Lattice,
    pub total_time: String,
    pub steps: Vec<StepDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDocument {
    pub duration: String,
    pub config: String,
}
