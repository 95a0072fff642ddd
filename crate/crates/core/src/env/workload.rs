use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp, Uniform};

use super::config::Range;
use crate::error::{Error, Result};

/// One generation request.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRequest {
    pub id: usize,
    /// Denoising steps the task occupies on its provider.
    pub steps: u32,
    /// Run time in simulated seconds.
    pub duration: f64,
    pub arrival_time: f64,
}

/// Poisson arrivals: exponential gaps with mean `1/rate`, uniform integer
/// step demand, uniform duration.
pub fn generate_workload<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    rate: f64,
    steps: Range<u32>,
    duration: Range<f64>,
) -> Result<Vec<TaskRequest>> {
    if count == 0 {
        return Err(Error::InvalidArgument("workload needs at least one task".into()));
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::InvalidArgument(format!("arrival rate {rate} must be positive")));
    }
    let gap = Exp::new(rate).expect("checked rate");
    if steps.lo > steps.hi {
        return Err(Error::InvalidArgument("empty step range".into()));
    }
    if !(duration.lo > 0.0 && duration.lo <= duration.hi) {
        return Err(Error::InvalidArgument("empty or non-positive duration range".into()));
    }
    let step_dist = Uniform::new_inclusive(steps.lo, steps.hi).expect("checked range");
    let dur_dist = Uniform::new_inclusive(duration.lo, duration.hi).expect("checked range");
    let mut clock = 0.0;
    Ok((0..count)
        .map(|id| {
            clock += gap.sample(rng);
            TaskRequest {
                id,
                steps: step_dist.sample(rng),
                duration: dur_dist.sample(rng),
                arrival_time: clock,
            }
        })
        .collect())
}

pub fn write_workload_csv(path: &Path, tasks: &[TaskRequest]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "arrival_time", "steps", "duration"])?;
    for t in tasks {
        w.write_record([
            t.id.to_string(),
            t.arrival_time.to_string(),
            t.steps.to_string(),
            t.duration.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_workload_csv(path: &Path) -> Result<Vec<TaskRequest>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::InvalidArgument(format!("{}: short row", path.display())));
        let parse_err = |what: &str| Error::InvalidArgument(format!("{}: bad {what}", path.display()));
        out.push(TaskRequest {
            id: field(0)?.parse().map_err(|_| parse_err("id"))?,
            arrival_time: field(1)?.parse().map_err(|_| parse_err("arrival_time"))?,
            steps: field(2)?.parse().map_err(|_| parse_err("steps"))?,
            duration: field(3)?.parse().map_err(|_| parse_err("duration"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn defaults(seed: u64, n: usize) -> Vec<TaskRequest> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate_workload(&mut rng, n, 0.001, Range::new(100, 250), Range::new(5000.0, 20000.0)).unwrap()
    }

    #[test]
    fn mean_gap_near_inverse_rate() {
        let w = defaults(7, 1000);
        let mean_gap = w.last().unwrap().arrival_time / 1000.0;
        // 3 standard errors of an exponential mean over 1000 draws.
        assert!((mean_gap - 1000.0).abs() <= 100.0, "mean gap {mean_gap}");
    }

    #[test]
    fn steps_within_range_and_arrivals_sorted() {
        let w = defaults(8, 1000);
        assert!(w.iter().all(|t| (100..=250).contains(&t.steps)));
        assert!(w.iter().all(|t| t.duration > 0.0));
        assert!(w.windows(2).all(|p| p[0].arrival_time <= p[1].arrival_time));
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(defaults(3, 50), defaults(3, 50));
        assert_ne!(defaults(3, 50), defaults(4, 50));
    }

    #[test]
    fn rejects_bad_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(generate_workload(&mut rng, 0, 0.001, Range::new(1, 2), Range::new(1.0, 2.0)).is_err());
        assert!(generate_workload(&mut rng, 5, 0.0, Range::new(1, 2), Range::new(1.0, 2.0)).is_err());
        assert!(generate_workload(&mut rng, 5, 0.1, Range::new(3, 2), Range::new(1.0, 2.0)).is_err());
        assert!(generate_workload(&mut rng, 5, 0.1, Range::new(1, 2), Range::new(2.0, 1.0)).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let w = defaults(5, 40);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("w.csv");
        write_workload_csv(&p, &w).unwrap();
        assert_eq!(read_workload_csv(&p).unwrap(), w);
    }
}
