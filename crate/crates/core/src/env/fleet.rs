use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::config::{EnvConfig, Range};
use crate::error::{Error, Result};

/// Static description of one service provider.
#[derive(Debug, Clone, PartialEq)]
pub struct AspProfile {
    pub id: usize,
    pub capacity: u32,
    pub ax: f64,
    pub ay: f64,
    pub bx: f64,
    pub by: f64,
}

impl AspProfile {
    /// Piecewise-linear quality: `A_y` up to `A_x`, `B_y` from `B_x`, linear between.
    pub fn utility(&self, steps: f64) -> f64 {
        if steps <= self.ax {
            self.ay
        } else if steps >= self.bx {
            self.by
        } else {
            self.ay + (self.by - self.ay) * (steps - self.ax) / (self.bx - self.ax)
        }
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, r: Range<f64>) -> f64 {
    if r.lo == r.hi {
        r.lo
    } else {
        Uniform::new_inclusive(r.lo, r.hi).expect("validated range").sample(rng)
    }
}

/// Draws capacities and utility anchors for every provider.
pub fn sample_fleet<R: Rng + ?Sized>(config: &EnvConfig, rng: &mut R) -> Vec<AspProfile> {
    let cap = Uniform::new_inclusive(config.capacity.lo, config.capacity.hi).expect("validated range");
    (0..config.num_asps)
        .map(|id| AspProfile {
            id,
            capacity: cap.sample(rng),
            ax: uniform(rng, config.anchor_ax),
            ay: uniform(rng, config.anchor_ay),
            bx: uniform(rng, config.anchor_bx),
            by: uniform(rng, config.anchor_by),
        })
        .collect()
}

pub fn write_fleet_csv(path: &Path, fleet: &[AspProfile]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["asp_id", "capacity", "A_x", "A_y", "B_x", "B_y"])?;
    for a in fleet {
        w.write_record([
            a.id.to_string(),
            a.capacity.to_string(),
            a.ax.to_string(),
            a.ay.to_string(),
            a.bx.to_string(),
            a.by.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_fleet_csv(path: &Path) -> Result<Vec<AspProfile>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| Error::InvalidArgument(format!("{}: short row", path.display())))
        };
        let num = |i: usize| -> Result<f64> {
            f(i)?
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{}: bad number in column {i}", path.display())))
        };
        out.push(AspProfile {
            id: f(0)?.parse().map_err(|_| Error::InvalidArgument("bad asp_id".into()))?,
            capacity: f(1)?.parse().map_err(|_| Error::InvalidArgument("bad capacity".into()))?,
            ax: num(2)?,
            ay: num(3)?,
            bx: num(4)?,
            by: num(5)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn asp() -> AspProfile {
        AspProfile {
            id: 0,
            capacity: 500,
            ax: 50.0,
            ay: 0.25,
            bx: 200.0,
            by: 0.75,
        }
    }

    #[test]
    fn interpolation_and_clamps() {
        let a = asp();
        assert_eq!(a.utility(125.0), 0.5);
        assert_eq!(a.utility(50.0), 0.25);
        assert_eq!(a.utility(0.0), 0.25);
        assert_eq!(a.utility(2000.0), 0.75);
    }

    #[test]
    fn utility_monotone() {
        let a = asp();
        let mut prev = a.utility(0.0);
        for s in 1..400 {
            let u = a.utility(s as f64);
            assert!(u >= prev);
            prev = u;
        }
    }

    #[test]
    fn sampled_fleet_respects_ranges() {
        let cfg = EnvConfig::default();
        let fleet = sample_fleet(&cfg, &mut ChaCha8Rng::seed_from_u64(2));
        assert_eq!(fleet.len(), 20);
        for a in &fleet {
            assert!(cfg.capacity.contains(a.capacity));
            assert!(0.0 <= a.ay && a.ay <= a.by && a.by <= 1.0);
            assert!(a.ax < a.bx);
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let fleet = sample_fleet(&EnvConfig::default(), &mut ChaCha8Rng::seed_from_u64(9));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fleet.csv");
        write_fleet_csv(&p, &fleet).unwrap();
        assert_eq!(read_fleet_csv(&p).unwrap(), fleet);
    }
}
