//! Monte Carlo simulation of the logistic equation driven by telegraph noise.
//!
//! Between flips the trajectory follows `dx/dτ = x + (p2 + α q2) x²`
//! exactly, so the only error left is sampling error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::quad::QuadError;
use crate::verhulst::{InitialDensity, InitialSampler, MixedDistribution1D, VerhulstError, VerhulstParams};

pub const DEFAULT_BATCH_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TelegraphError {
    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),
    #[error("blow-up in segment (x0 = {x0}, c = {c}, dtau = {dt})")]
    BlowUp { x0: f64, c: f64, dt: f64 },
    #[error("{flagged} of {paths} paths blew up")]
    Flagged { flagged: usize, paths: usize },
    #[error(transparent)]
    Initial(#[from] VerhulstError),
    #[error(transparent)]
    Quad(#[from] QuadError),
}

/// Exact solution of `dx/dτ = x + c x²` after time `dt` from `x0`.
pub fn flow_exact(x0: f64, c: f64, dt: f64) -> Result<f64, TelegraphError> {
    let den = 1.0 - c * x0 * dt.exp_m1();
    if den.is_nan() || den <= 0.0 {
        return Err(TelegraphError::BlowUp { x0, c, dt });
    }
    Ok(x0 * dt.exp() / den)
}

/// Dichotomous noise `α = ±1` flipping at exponential times.
#[derive(Clone, Debug)]
pub struct TelegraphNoise {
    alpha: f64,
    next_flip: f64,
    clock: Exp<f64>,
}

impl TelegraphNoise {
    /// Symmetric random initial state; first flip drawn from the clock.
    pub fn start<R: Rng + ?Sized>(flip_rate: f64, rng: &mut R) -> Self {
        let clock = Exp::new(flip_rate).expect("positive flip rate");
        let alpha = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let next_flip = clock.sample(rng);
        Self { alpha, next_flip, clock }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Time of the next flip.
    pub fn next_flip(&self) -> f64 {
        self.next_flip
    }

    fn flip<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.alpha = -self.alpha;
        self.next_flip += self.clock.sample(rng);
    }

    /// Applies every flip up to and including time `t`.
    pub fn advance_to<R: Rng + ?Sized>(&mut self, t: f64, rng: &mut R) {
        while self.next_flip <= t {
            self.flip(rng);
        }
    }
}

/// Per-path generator: one independent ChaCha stream per path index.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

#[derive(Clone, Debug)]
pub struct McConfig {
    pub params: VerhulstParams,
    pub init: InitialDensity,
    pub paths: usize,
    pub checkpoints: Vec<f64>,
    pub seed: u64,
    pub batch_size: usize,
    /// Rate of individual flips in τ units; the noise correlation decays at twice this.
    pub flip_rate: f64,
}

impl McConfig {
    pub fn new(params: VerhulstParams, init: InitialDensity, paths: usize, checkpoints: Vec<f64>, seed: u64) -> Self {
        Self { params, init, paths, checkpoints, seed, batch_size: DEFAULT_BATCH_SIZE, flip_rate: 1.0 }
    }

    pub fn validate(&self) -> Result<(), TelegraphError> {
        let bad = |m: &str| Err(TelegraphError::InvalidConfig(m.into()));
        if self.paths == 0 {
            return bad("paths must be positive");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.flip_rate > 0.0 && self.flip_rate.is_finite()) {
            return bad("flip_rate must be positive");
        }
        if self.checkpoints.is_empty() {
            return bad("at least one checkpoint is required");
        }
        if self.checkpoints.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return bad("checkpoints must be finite and nonnegative");
        }
        if self.checkpoints.windows(2).any(|w| w[1] < w[0]) {
            return bad("checkpoints must be sorted ascending");
        }
        Ok(())
    }
}

/// Sorted samples at every checkpoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalEnsemble {
    pub checkpoints: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
    pub paths: usize,
}

impl EmpiricalEnsemble {
    pub fn at(&self, k: usize) -> &[f64] {
        &self.samples[k]
    }

    pub fn mean(&self, k: usize) -> f64 {
        self.samples[k].iter().sum::<f64>() / self.paths as f64
    }

    /// Standard error of the mean at checkpoint `k`.
    pub fn std_error(&self, k: usize) -> f64 {
        let m = self.mean(k);
        let n = self.paths as f64;
        let var = self.samples[k].iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        (var / n).sqrt()
    }
}

fn run_path(cfg: &McConfig, sampler: &InitialSampler, index: u64, out: &mut [f64]) -> Result<(), TelegraphError> {
    let mut rng = path_rng(cfg.seed, index);
    let mut x = sampler.sample(&mut rng);
    let mut noise = TelegraphNoise::start(cfg.flip_rate, &mut rng);
    let (p2, q2) = (cfg.params.p2(), cfg.params.q2());
    let mut t = 0.0;
    for (slot, &tk) in out.iter_mut().zip(&cfg.checkpoints) {
        while noise.next_flip() <= tk {
            let tf = noise.next_flip();
            x = flow_exact(x, p2 + noise.alpha() * q2, tf - t)?;
            t = tf;
            noise.flip(&mut rng);
        }
        // evaluated from the segment start so noiseless paths land exactly on the exact atoms
        *slot = flow_exact(x, p2 + noise.alpha() * q2, tk - t)?;
    }
    Ok(())
}

/// Runs all paths; output is identical for every batch size and thread count.
pub fn simulate(cfg: &McConfig) -> Result<EmpiricalEnsemble, TelegraphError> {
    cfg.validate()?;
    let sampler = cfg.init.sampler()?;
    let nk = cfg.checkpoints.len();
    let batches: Vec<(usize, usize)> =
        (0..cfg.paths).step_by(cfg.batch_size).map(|start| (start, (start + cfg.batch_size).min(cfg.paths))).collect();
    let results: Vec<(Vec<f64>, usize)> = batches
        .par_iter()
        .map(|&(start, end)| {
            let mut rows = vec![f64::NAN; (end - start) * nk];
            let mut flagged = 0;
            for (i, row) in rows.chunks_mut(nk).enumerate() {
                if run_path(cfg, &sampler, (start + i) as u64, row).is_err() {
                    flagged += 1;
                }
            }
            (rows, flagged)
        })
        .collect();
    let flagged: usize = results.iter().map(|r| r.1).sum();
    if flagged > 0 {
        return Err(TelegraphError::Flagged { flagged, paths: cfg.paths });
    }
    let mut samples = vec![Vec::with_capacity(cfg.paths); nk];
    for (rows, _) in &results {
        for row in rows.chunks(nk) {
            for (k, v) in row.iter().enumerate() {
                samples[k].push(*v);
            }
        }
    }
    samples.par_iter_mut().for_each(|s| s.sort_by(f64::total_cmp));
    Ok(EmpiricalEnsemble { checkpoints: cfg.checkpoints.clone(), samples, seed: cfg.seed, paths: cfg.paths })
}

/// Relative distance within which a sample is treated as sitting on an atom.
pub const ATOM_SNAP: f64 = 1e-9;

/// `sup |F_n − F|` between the empirical CDF of `sorted` samples and `d`,
/// checking both one-sided limits at every sample and atom location.
pub fn kolmogorov_distance(sorted: &[f64], d: &MixedDistribution1D) -> Result<f64, QuadError> {
    if sorted.is_empty() {
        return Ok(1.0);
    }
    let atoms: Vec<f64> = d.atoms().iter().map(|a| a.x).collect();
    let snap = |x: f64| atoms.iter().copied().find(|&a| (x - a).abs() <= ATOM_SNAP * a.abs().max(1.0)).unwrap_or(x);
    let mut xs: Vec<f64> = sorted.iter().map(|&x| snap(x)).collect();
    xs.sort_by(f64::total_cmp);
    let mut pts: Vec<f64> = xs.iter().copied().chain(atoms.iter().copied()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let model = d.cdf_pairs(&pts)?;
    let n = xs.len() as f64;
    let mut j = 0;
    let mut worst: f64 = 0.0;
    for (&z, &(left, right)) in pts.iter().zip(&model) {
        let below = j;
        while j < xs.len() && xs[j] <= z {
            j += 1;
        }
        worst = worst.max((below as f64 / n - left).abs()).max((j as f64 / n - right).abs());
    }
    Ok(worst)
}

/// Estimate of `E[α(0) α(s)]` at each lag from independent noise paths.
pub fn noise_autocorrelation(flip_rate: f64, lags: &[f64], paths: usize, seed: u64) -> Vec<f64> {
    let sums = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let mut noise = TelegraphNoise::start(flip_rate, &mut rng);
            let a0 = noise.alpha();
            let mut row = Vec::with_capacity(lags.len());
            for &s in lags {
                noise.advance_to(s, &mut rng);
                row.push(a0 * noise.alpha());
            }
            row
        })
        .reduce(
            || vec![0.0; lags.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    sums.into_iter().map(|s| s / paths as f64).collect()
}

/// Least-squares decay rate `r` in `corr ≈ e^{−r s}`, using lags with positive correlation.
pub fn fit_decay_rate(lags: &[f64], corr: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = lags.iter().zip(corr).filter(|(_, c)| **c > 0.0).map(|(s, c)| (*s, c.ln())).collect();
    // regression through the origin: ln corr(0) = 0
    let num: f64 = pts.iter().map(|(s, l)| s * l).sum();
    let den: f64 = pts.iter().map(|(s, _)| s * s).sum();
    -num / den
}
