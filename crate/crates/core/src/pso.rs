//! Particle-swarm selection of the best foreground/background sample pair.
//!
//! Particles move in the continuous box `[0, |f|) x [0, |b|)`; a position is
//! evaluated by flooring each coordinate to a candidate index. Runs are fully
//! deterministic for a fixed seed.

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matting::{pair_fitness, CandidateSet, FitnessParams, SamplePair};

/// Swarm hyper-parameters. The defaults are the standard constriction
/// coefficients.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            swarm_size: 20,
            iterations: 40,
            inertia: 0.729,
            cognitive: 1.49445,
            social: 1.49445,
            seed: 42,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size < 1 {
            return Err(Error::InvalidParameter("swarm_size must be >= 1".into()));
        }
        if self.iterations < 1 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        if !(self.inertia > 0.0 && self.inertia < 1.0) {
            return Err(Error::InvalidParameter(
                "inertia must lie strictly in (0, 1)".into(),
            ));
        }
        if self.cognitive <= 0.0 || self.social <= 0.0 {
            return Err(Error::InvalidParameter(
                "cognitive and social factors must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// 53-bit uniform in [0, 1), independent of `rand` distribution internals.
#[inline]
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Mixes a base seed with a task index into an independent stream seed
/// (splitmix64 finalizer), so per-pixel work is schedule-independent.
pub fn derive_stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

#[inline]
fn index_of(pos: f64, len: usize) -> usize {
    (pos.floor() as usize).min(len - 1)
}

/// Picks the candidate pair with the lowest fitness the swarm can find.
///
/// The global best is monotone non-increasing over iterations, so the result
/// is never worse than the best initial particle.
pub fn pso_select(
    cands: &CandidateSet,
    z_colour: [f64; 3],
    z_pos: (u32, u32),
    cfg: &PsoConfig,
    fitness: &FitnessParams,
) -> SamplePair {
    let nf = cands.f_list.len();
    let nb = cands.b_list.len();
    assert!(nf > 0 && nb > 0, "candidate lists must be non-empty");
    if nf == 1 && nb == 1 {
        return cands.pair(0, 0, z_colour, z_pos);
    }

    // Fitness memoized per discrete cell; the swarm revisits cells often.
    let mut cache = vec![f64::NAN; nf * nb];
    let mut evaluate = |fi: usize, bi: usize| -> f64 {
        let slot = fi * nb + bi;
        if cache[slot].is_nan() {
            cache[slot] = pair_fitness(&cands.pair(fi, bi, z_colour, z_pos), fitness);
        }
        cache[slot]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dims = [nf as f64, nb as f64];
    let upper = dims.map(|d| d - 1e-9);

    let n = cfg.swarm_size;
    let mut pos = vec![[0.0f64; 2]; n];
    let mut vel = vec![[0.0f64; 2]; n];
    let mut pbest_pos = vec![[0.0f64; 2]; n];
    let mut pbest_fit = vec![f64::INFINITY; n];
    let mut gbest_pos = [0.0f64; 2];
    let mut gbest_fit = f64::INFINITY;
    let mut gbest_idx = (0usize, 0usize);

    for i in 0..n {
        for d in 0..2 {
            pos[i][d] = (uniform(&mut rng) * dims[d]).min(upper[d]);
            // Gentle start: a quarter-box velocity cap searches the
            // candidate grid far more reliably than box-sized kicks.
            vel[i][d] = (uniform(&mut rng) - 0.5) * 0.25 * dims[d];
        }
        let (fi, bi) = (index_of(pos[i][0], nf), index_of(pos[i][1], nb));
        let fit = evaluate(fi, bi);
        pbest_pos[i] = pos[i];
        pbest_fit[i] = fit;
        if fit < gbest_fit {
            gbest_fit = fit;
            gbest_pos = pos[i];
            gbest_idx = (fi, bi);
        }
    }

    for _ in 0..cfg.iterations {
        for i in 0..n {
            for d in 0..2 {
                let r1 = uniform(&mut rng);
                let r2 = uniform(&mut rng);
                vel[i][d] = cfg.inertia * vel[i][d]
                    + cfg.cognitive * r1 * (pbest_pos[i][d] - pos[i][d])
                    + cfg.social * r2 * (gbest_pos[d] - pos[i][d]);
                let vmax = 0.25 * dims[d];
                vel[i][d] = vel[i][d].clamp(-vmax, vmax);
                pos[i][d] = (pos[i][d] + vel[i][d]).clamp(0.0, upper[d]);
            }
            let (fi, bi) = (index_of(pos[i][0], nf), index_of(pos[i][1], nb));
            let fit = evaluate(fi, bi);
            if fit < pbest_fit[i] {
                pbest_fit[i] = fit;
                pbest_pos[i] = pos[i];
            }
            if fit < gbest_fit {
                gbest_fit = fit;
                gbest_pos = pos[i];
                gbest_idx = (fi, bi);
            }
        }
    }

    cands.pair(gbest_idx.0, gbest_idx.1, z_colour, z_pos)
}
