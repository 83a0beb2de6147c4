//! Built-in cancellation protocols.

use super::{ChargeConfig, ChargeState, Schedule, Step};
use crate::geometry::Lattice;
use crate::{ratio, Error, Result};

use ChargeState::*;

fn residue(site: usize, anchor: i64, period: i64) -> i64 {
    (site as i64 - anchor).rem_euclid(period)
}

fn chain_len(lattice: Lattice) -> Result<usize> {
    match lattice {
        Lattice::Chain { n } => Ok(n),
        Lattice::Grid { .. } => Err(Error::NotAChain),
    }
}

/// Baseline: every molecule displaced to (0,2) for `t₀`.
pub fn gen_one_step(lattice: Lattice) -> Schedule {
    let n = lattice.len();
    let step = Step::new(ChargeConfig::uniform(n, Up), ratio(1, 1)).expect("positive duration");
    Schedule::from_steps(lattice, vec![step]).expect("config sized to lattice")
}

/// Three steps removing every `(4n+2)`-separated coupling on a chain.
///
/// Relative to `anchor`, residues `{0,1}` are Up and `{2,3}` Down for `t₀/2`,
/// then `{0,3}` Up and `{1,2}` Down for `t₀/2`, then all Up for `t₀`.
pub fn gen_three_step(lattice: Lattice, anchor: i64) -> Result<Schedule> {
    let n = chain_len(lattice)?;
    let first = ChargeConfig::from_fn(n, |s| match residue(s, anchor, 4) {
        0 | 1 => Up,
        _ => Down,
    });
    let second = ChargeConfig::from_fn(n, |s| match residue(s, anchor, 4) {
        0 | 3 => Up,
        _ => Down,
    });
    Schedule::from_steps(
        lattice,
        vec![
            Step::new(first, ratio(1, 2))?,
            Step::new(second, ratio(1, 2))?,
            Step::new(ChargeConfig::uniform(n, Up), ratio(1, 1))?,
        ],
    )
}

/// `m + 1` steps cancelling separations `mn+2 ..= mn+m-2`, for `4 ≤ m ≤ 8`.
///
/// Step `s` (1-based) puts the two-site window at residues `{1-s, 2-s} mod m`
/// in Up and every other site in Down for `t₀/4`; the window moves one site
/// left per step. The last step is all Up for `(8-m)·t₀/4`, which is zero at
/// `m = 8` and is kept so the step count is always `m + 1`.
pub fn gen_m_step(lattice: Lattice, m: usize, anchor: i64) -> Result<Schedule> {
    if !(4..=8).contains(&m) {
        return Err(Error::PeriodOutOfRange(m));
    }
    let n = chain_len(lattice)?;
    let period = m as i64;
    let mut steps = Vec::with_capacity(m + 1);
    for s in 1..=period {
        let lo = (1 - s).rem_euclid(period);
        let hi = (2 - s).rem_euclid(period);
        let config = ChargeConfig::from_fn(n, |site| {
            let r = residue(site, anchor, period);
            if r == lo || r == hi {
                Up
            } else {
                Down
            }
        });
        steps.push(Step::new(config, ratio(1, 4))?);
    }
    steps.push(Step::new(
        ChargeConfig::uniform(n, Up),
        ratio(8 - m as i64, 4),
    )?);
    Schedule::from_steps(lattice, steps)
}

/// Three `t₀` steps on a grid that cancel every diagonal coupling.
///
/// With parities taken relative to `anchor = (row, col)`: step 1 puts
/// (even, even) Up and (odd, odd) Down; step 2 puts (even, odd) Up and
/// (odd, even) Down; all other sites stay Neutral. Step 3 is all Up.
pub fn gen_2d_three_step(lattice: Lattice, anchor: (i64, i64)) -> Result<Schedule> {
    let Lattice::Grid { .. } = lattice else {
        return Err(Error::NotAGrid);
    };
    let n = lattice.len();
    let parity = |site: usize| {
        let (r, c) = lattice.coords(site);
        (residue(r, anchor.0, 2), residue(c, anchor.1, 2))
    };
    let first = ChargeConfig::from_fn(n, |s| match parity(s) {
        (0, 0) => Up,
        (1, 1) => Down,
        _ => Neutral,
    });
    let second = ChargeConfig::from_fn(n, |s| match parity(s) {
        (0, 1) => Up,
        (1, 0) => Down,
        _ => Neutral,
    });
    Schedule::from_steps(
        lattice,
        vec![
            Step::new(first, ratio(1, 1))?,
            Step::new(second, ratio(1, 1))?,
            Step::new(ChargeConfig::uniform(n, Up), ratio(1, 1))?,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::net_coupling;
    use crate::Rational;

    #[test]
    fn three_step_patterns() {
        let sched = gen_three_step(Lattice::chain(8).unwrap(), 0).unwrap();
        let rendered: Vec<String> = sched
            .steps()
            .iter()
            .map(|s| s.config().to_string())
            .collect();
        assert_eq!(rendered, ["UUDDUUDD", "UDDUUDDU", "UUUUUUUU"]);
        let shifted = gen_three_step(Lattice::chain(8).unwrap(), 1).unwrap();
        assert_eq!(shifted.steps()[0].config().to_string(), "DUUDDUUD");
    }

    #[test]
    fn m_step_windows_move_left() {
        let sched = gen_m_step(Lattice::chain(10).unwrap(), 5, 0).unwrap();
        let rendered: Vec<String> = sched
            .steps()
            .iter()
            .map(|s| s.config().to_string())
            .collect();
        assert_eq!(
            rendered,
            [
                "UUDDDUUDDD",
                "UDDDUUDDDU",
                "DDDUUDDDUU",
                "DDUUDDDUUD",
                "DUUDDDUUDD",
                "UUUUUUUUUU"
            ]
        );
        assert_eq!(*sched.steps()[5].duration(), ratio(3, 4));
    }

    #[test]
    fn m_step_range_checked() {
        let chain = Lattice::chain(20).unwrap();
        assert_eq!(
            gen_m_step(chain, 3, 0).unwrap_err(),
            Error::PeriodOutOfRange(3)
        );
        assert_eq!(
            gen_m_step(chain, 9, 0).unwrap_err(),
            Error::PeriodOutOfRange(9)
        );
        let grid = Lattice::grid(4, 4).unwrap();
        assert_eq!(gen_m_step(grid, 8, 0).unwrap_err(), Error::NotAChain);
        assert_eq!(gen_three_step(grid, 0).unwrap_err(), Error::NotAChain);
        assert_eq!(
            gen_2d_three_step(chain, (0, 0)).unwrap_err(),
            Error::NotAGrid
        );
    }

    #[test]
    fn two_dimensional_patterns() {
        let grid = Lattice::grid(2, 4).unwrap();
        let sched = gen_2d_three_step(grid, (0, 0)).unwrap();
        assert_eq!(sched.steps()[0].config().to_string(), "UNUNNDND");
        assert_eq!(sched.steps()[1].config().to_string(), "NUNUDNDN");
        assert_eq!(sched.total_time(), ratio(3, 1));
    }

    #[test]
    fn one_step_on_two_qubits() {
        let c = net_coupling(&gen_one_step(Lattice::chain(2).unwrap())).unwrap();
        assert_eq!(c.pairs().count(), 1);
        assert_eq!(c.get(0, 1), Rational::from_integer(1.into()));
    }
}
