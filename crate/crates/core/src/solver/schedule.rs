use serde::{Deserialize, Serialize};

use super::problem::AffineSelector;
use crate::{Error, Result};

/// Longest simulated period before giving up on computing coverage.
const MAX_PERIOD: usize = 10_000_000;

/// Block selection in serializable form; turned into a [`RoundRobin`] once
/// the problem is known.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSpec {
    /// Constraint ids activated at every iteration.
    pub always_active: Vec<usize>,
    /// Window size over the remaining ids; `None` activates all of them.
    pub block_size: Option<usize>,
}

/// `i(n)` cycles over `I′`; `I_n` is the always-active ids plus a cyclic
/// window over the rotating ids (every id that is neither always active
/// nor a member of `I′`).
#[derive(Debug, Clone)]
pub struct RoundRobin {
    affine: Vec<AffineSelector>,
    always: Vec<usize>,
    rotating: Vec<usize>,
    block: usize,
    coverage: Vec<usize>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn schedule_round_robin(
    num_constraints: usize,
    affine: &[AffineSelector],
    always_active: &[usize],
    block_size: usize,
) -> Result<RoundRobin> {
    if num_constraints == 0 {
        return Err(Error::InvalidSchedule("empty constraint list".into()));
    }
    if affine.is_empty() {
        return Err(Error::InvalidSchedule("empty extrapolation family".into()));
    }
    if block_size == 0 {
        return Err(Error::InvalidSchedule(
            "block size must be at least 1".into(),
        ));
    }
    let mut always = always_active.to_vec();
    always.sort_unstable();
    always.dedup();
    if let Some(&bad) = always.iter().find(|&&i| i >= num_constraints) {
        return Err(Error::InvalidSchedule(format!(
            "always-active id {bad} out of range"
        )));
    }
    let in_affine = |i: usize| affine.contains(&AffineSelector::Constraint(i));
    if let Some(&AffineSelector::Constraint(bad)) = affine
        .iter()
        .find(|s| matches!(s, AffineSelector::Constraint(i) if *i >= num_constraints))
    {
        return Err(Error::InvalidSchedule(format!(
            "affine id {bad} out of range"
        )));
    }
    let rotating: Vec<usize> = (0..num_constraints)
        .filter(|&i| !in_affine(i) && always.binary_search(&i).is_err())
        .collect();
    if rotating.is_empty()
        && always.is_empty()
        && affine.iter().any(|s| *s == AffineSelector::Ambient)
    {
        return Err(Error::InvalidSchedule(
            "ambient space selected with no activated constraint".into(),
        ));
    }
    let block = block_size.min(rotating.len().max(1));
    let mut rr = RoundRobin {
        affine: affine.to_vec(),
        always,
        rotating,
        block,
        coverage: Vec::new(),
    };
    rr.coverage = rr.simulate_coverage(num_constraints)?;
    Ok(rr)
}

impl RoundRobin {
    pub fn period(&self) -> usize {
        let a = self.affine.len();
        let r = self.rotating.len();
        let windows = if r == 0 {
            1
        } else {
            r / gcd(r, self.block % r)
        };
        a / gcd(a, windows) * windows
    }

    /// `(i(n), I_n)`, with `I_n` sorted increasingly.
    pub fn select(&self, n: usize) -> (AffineSelector, Vec<usize>) {
        let sel = self.affine[n % self.affine.len()];
        let mut active = self.always.clone();
        let r = self.rotating.len();
        if r > 0 {
            let start = (n % r) * self.block % r;
            active.extend((0..self.block).map(|j| self.rotating[(start + j) % r]));
        }
        if active.is_empty() {
            if let AffineSelector::Constraint(i) = sel {
                active.push(i);
            }
        }
        active.sort_unstable();
        active.dedup();
        (sel, active)
    }

    /// `M_i`: every id is served, as `i(n)` or inside `I_n`, at least once
    /// in every window of `M_i` consecutive iterations.
    pub fn coverage(&self) -> &[usize] {
        &self.coverage
    }

    /// `max_i M_i`
    pub fn max_coverage(&self) -> usize {
        self.coverage.iter().copied().max().unwrap_or(1)
    }

    /// Largest `card I_n` over one period.
    pub fn max_block(&self) -> usize {
        (0..self.period())
            .map(|n| self.select(n).1.len())
            .max()
            .unwrap_or(0)
    }

    fn simulate_coverage(&self, num: usize) -> Result<Vec<usize>> {
        let period = self.period();
        if period > MAX_PERIOD {
            return Err(Error::InvalidSchedule(format!("period {period} too long")));
        }
        let mut first = vec![None::<usize>; num];
        let mut last = vec![0usize; num];
        let mut gap = vec![0usize; num];
        let mut visit = |i: usize, n: usize| {
            match first[i] {
                None => first[i] = Some(n),
                Some(_) => gap[i] = gap[i].max(n - last[i]),
            }
            last[i] = n;
        };
        for n in 0..period {
            let (sel, active) = self.select(n);
            if let AffineSelector::Constraint(i) = sel {
                visit(i, n);
            }
            for i in active {
                if sel != AffineSelector::Constraint(i) {
                    visit(i, n);
                }
            }
        }
        (0..num)
            .map(|i| {
                let f = first[i].ok_or_else(|| {
                    Error::InvalidSchedule(format!("constraint {i} is never activated"))
                })?;
                Ok(gap[i].max(f + period - last[i]))
            })
            .collect()
    }
}
