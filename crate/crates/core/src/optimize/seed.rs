use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::steer::Rotation;
use crate::xcorr::{XiBlocks, XiEvaluator};

/// Seeding grid: `alpha, gamma = j * 2pi/na`, `beta = (j + 1/2) * pi/nb`.
///
/// Offsetting `beta` by half a step keeps every node off the poles, where
/// the Euler chart is singular.
#[derive(Debug, Clone)]
pub struct SeedGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
}

impl SeedGrid {
    pub fn new(step: f64) -> Self {
        let na = ((2.0 * PI / step) - 1e-9).ceil().max(1.0) as usize;
        let nb = ((PI / step) - 1e-9).ceil().max(1.0) as usize;
        let ring: Vec<f64> = (0..na).map(|j| 2.0 * PI * j as f64 / na as f64).collect();
        let betas = (0..nb).map(|j| PI * (j as f64 + 0.5) / nb as f64).collect();
        Self { alphas: ring.clone(), betas, gammas: ring }
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.betas.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A seeded starting point with its score at the seeding band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Seed {
    pub angles: [f64; 3],
    pub score: f64,
}

/// Strict local maxima of `values` (laid out `[beta][alpha][gamma]`) over
/// the 26-neighbourhood, best first. Equal neighbours count as larger when
/// their flat index is smaller, so a plateau yields one point.
pub(crate) fn local_maxima(grid: &SeedGrid, values: &[f64], max_candidates: usize) -> Vec<Seed> {
    let (na, nb, ng) = (grid.alphas.len() as isize, grid.betas.len() as isize, grid.gammas.len() as isize);
    let flat = |b: isize, a: isize, g: isize| ((b * na + a) * ng + g) as usize;
    // Crossing a pole maps (a, b, g) to (a + pi, b', g + pi).
    let half_a = (na as f64 / 2.0).round() as isize;
    let half_g = (ng as f64 / 2.0).round() as isize;
    let neighbour = |b: isize, a: isize, g: isize| -> usize {
        let (mut a, mut b, mut g) = (a, b, g);
        if b < 0 {
            b = -b - 1;
            a += half_a;
            g += half_g;
        } else if b >= nb {
            b = 2 * nb - b - 1;
            a += half_a;
            g += half_g;
        }
        flat(b, a.rem_euclid(na), g.rem_euclid(ng))
    };
    let mut out = Vec::new();
    for b in 0..nb {
        for a in 0..na {
            for g in 0..ng {
                let here = flat(b, a, g);
                let v = values[here];
                let mut is_max = true;
                'scan: for db in -1..=1 {
                    for da in -1..=1 {
                        for dg in -1..=1 {
                            if (db, da, dg) == (0, 0, 0) {
                                continue;
                            }
                            let j = neighbour(b + db, a + da, g + dg);
                            if j == here {
                                continue;
                            }
                            let w = values[j];
                            if w > v || (w == v && j < here) {
                                is_max = false;
                                break 'scan;
                            }
                        }
                    }
                }
                if is_max {
                    let angles = [grid.alphas[a as usize], grid.betas[b as usize], grid.gammas[g as usize]];
                    out.push((here, Seed { angles, score: v }));
                }
            }
        }
    }
    out.sort_by(|x, y| y.1.score.total_cmp(&x.1.score).then(x.0.cmp(&y.0)));
    out.truncate(max_candidates);
    out.into_iter().map(|(_, s)| s).collect()
}

pub(crate) fn seeds_from(ev: &XiEvaluator, l_low: usize, step: f64, max_candidates: usize) -> (Vec<Seed>, u64) {
    let grid = SeedGrid::new(step);
    let values = ev.grid(&grid.alphas, &grid.betas, &grid.gammas, l_low);
    (local_maxima(&grid, &values, max_candidates), grid.len() as u64)
}

/// Local maxima of the correlation at band `l_low` on the seeding grid,
/// sorted by score and truncated to `max_candidates`.
pub fn seed_candidates(xi: &XiBlocks, l_low: usize, grid_step: f64, max_candidates: usize) -> Result<Vec<(Rotation, f64)>> {
    if l_low > xi.l_max() {
        return Err(invalid(format!("band {l_low} exceeds l_max {}", xi.l_max())));
    }
    if !(grid_step > 0.0 && grid_step <= PI) {
        return Err(invalid("grid step must lie in (0, pi]"));
    }
    let ev = XiEvaluator::new(xi);
    let (seeds, _) = seeds_from(&ev, l_low, grid_step, max_candidates);
    Ok(seeds
        .into_iter()
        .map(|s| (Rotation::from_euler_zyz(s.angles[0], s.angles[1], s.angles[2]), s.score))
        .collect())
}
