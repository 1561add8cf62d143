use crate::error::{invalid, Error, Result};

/// Rounds of simultaneous Bell-state measurements along a repeater chain.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSchedule {
    configurations: Vec<usize>,
    durations: Vec<f64>,
    repeater_count: usize,
}

impl RoundSchedule {
    pub fn new(configurations: Vec<usize>, durations: Vec<f64>) -> Result<Self> {
        if configurations.len() != durations.len() {
            return Err(Error::Schedule("one duration per round is required".into()));
        }
        if configurations.contains(&0) {
            return Err(Error::Schedule("every round needs at least one repeater".into()));
        }
        if durations.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            return Err(Error::Schedule(
                "round durations must be finite and non-negative".into(),
            ));
        }
        let repeater_count = configurations.iter().sum();
        Ok(Self {
            configurations,
            durations,
            repeater_count,
        })
    }

    /// Repeaters measured in each round.
    pub fn configurations(&self) -> &[usize] {
        &self.configurations
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn repeater_count(&self) -> usize {
        self.repeater_count
    }

    pub fn num_rounds(&self) -> usize {
        self.configurations.len()
    }

    /// Completion time of each round relative to the start, `sum_{l<=i} delta_l`.
    pub fn cumulative(&self) -> Vec<f64> {
        self.durations
            .iter()
            .scan(0.0, |acc, d| {
                *acc += d;
                Some(*acc)
            })
            .collect()
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Duration of the final round, zero when there are no rounds.
    pub fn last_duration(&self) -> f64 {
        self.durations.last().copied().unwrap_or(0.0)
    }
}

/// Ceil-halving schedule: `N_i = ceil(remaining / 2)` until no repeater is left.
pub fn round_schedule(n_repeater: usize, t_bsm: f64) -> Result<RoundSchedule> {
    if !(t_bsm >= 0.0) || !t_bsm.is_finite() {
        return Err(invalid("t_bsm must be finite and non-negative"));
    }
    let mut remaining = n_repeater;
    let mut configs = Vec::new();
    while remaining > 0 {
        let n = remaining.div_ceil(2);
        configs.push(n);
        remaining -= n;
    }
    let durations = vec![t_bsm; configs.len()];
    RoundSchedule::new(configs, durations)
}

/// Assigns the repeaters of `chain` (endpoints included) to rounds.
///
/// Each round takes the odd positions (1st, 3rd, ...) of the repeaters still
/// unmeasured; when a schedule asks for a different count the odd positions
/// are truncated or topped up with even positions, in chain order.
pub fn assign_rounds_to_nodes<T: Copy>(chain: &[T], schedule: &RoundSchedule) -> Result<Vec<Vec<T>>> {
    if chain.len() < 2 {
        return Err(invalid("a chain needs two endpoints"));
    }
    let repeaters = chain.len() - 2;
    if schedule.repeater_count() != repeaters {
        return Err(Error::Schedule(format!(
            "schedule covers {} repeaters, chain has {repeaters}",
            schedule.repeater_count()
        )));
    }
    let mut alive: Vec<T> = chain[1..chain.len() - 1].to_vec();
    let mut rounds = Vec::with_capacity(schedule.num_rounds());
    for &n in schedule.configurations() {
        let mut order: Vec<usize> = (0..alive.len()).step_by(2).collect();
        order.extend((1..alive.len()).step_by(2));
        let mut pick: Vec<usize> = order.into_iter().take(n).collect();
        pick.sort_unstable();
        rounds.push(pick.iter().map(|&i| alive[i]).collect());
        let mut k = 0;
        alive.retain(|_| {
            let keep = pick.binary_search(&k).is_err();
            k += 1;
            keep
        });
    }
    Ok(rounds)
}
