use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::initial::RealFn;
use crate::quad::{integrate_breaks, QuadError, QuadOptions};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// Absolutely continuous part of a [`MixedDistribution1D`].
#[derive(Clone)]
pub enum Density {
    None,
    /// `scale / x²` on `(lo, hi)`.
    InverseSquare {
        scale: f64,
        lo: f64,
        hi: f64,
    },
    /// Arbitrary density on `(lo, hi)`, integrated numerically; `breaks`
    /// are interior points where it may fail to be smooth.
    Callable {
        f: RealFn,
        lo: f64,
        hi: f64,
        breaks: Vec<f64>,
    },
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::None => f.write_str("None"),
            Density::InverseSquare { scale, lo, hi } => write!(f, "InverseSquare({scale}/x^2 on ({lo}, {hi}))"),
            Density::Callable { lo, hi, .. } => write!(f, "Callable(on ({lo}, {hi}))"),
        }
    }
}

impl Density {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::None => 0.0,
            Density::InverseSquare { scale, lo, hi } => {
                if x > *lo && x < *hi {
                    scale / (x * x)
                } else {
                    0.0
                }
            }
            Density::Callable { f, lo, hi, .. } => {
                if x > *lo && x < *hi {
                    f(x)
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_{-∞}^{z}` of the density.
    pub fn mass_below(&self, z: f64, quad: &QuadOptions) -> Result<f64, QuadError> {
        match self {
            Density::None => Ok(0.0),
            Density::InverseSquare { scale, lo, hi } => {
                if z <= *lo {
                    return Ok(0.0);
                }
                let z = z.min(*hi);
                Ok(scale * (1.0 / lo - 1.0 / z))
            }
            Density::Callable { f, lo, hi, breaks } => {
                if z <= *lo {
                    return Ok(0.0);
                }
                let z = z.min(*hi);
                Ok(integrate_breaks(|t| f(t), &panels(*lo, z, breaks), quad)?.value)
            }
        }
    }

    fn moment(&self, k: i32, quad: &QuadOptions) -> Result<f64, QuadError> {
        match self {
            Density::None => Ok(0.0),
            Density::InverseSquare { scale, lo, hi } => Ok(match k {
                1 => scale * (hi / lo).ln(),
                _ => scale * (hi.powi(k - 1) - lo.powi(k - 1)) / (k - 1) as f64,
            }),
            Density::Callable { f, lo, hi, breaks } => {
                Ok(integrate_breaks(|t| f(t) * t.powi(k), &panels(*lo, *hi, breaks), quad)?.value)
            }
        }
    }

    fn interval(&self) -> Option<(f64, f64)> {
        match self {
            Density::None => None,
            Density::InverseSquare { lo, hi, .. } | Density::Callable { lo, hi, .. } => Some((*lo, *hi)),
        }
    }
}

fn panels(lo: f64, hi: f64, breaks: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo];
    pts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts
}

/// Finitely many point masses plus a density.
#[derive(Clone, Debug)]
pub struct MixedDistribution1D {
    atoms: Vec<Atom>,
    density: Density,
    quad: QuadOptions,
}

impl MixedDistribution1D {
    /// Atoms are sorted by location; coincident atoms are merged and zero-mass atoms dropped.
    pub fn new(mut atoms: Vec<Atom>, density: Density) -> Self {
        atoms.retain(|a| a.mass != 0.0);
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        Self { atoms: merged, density, quad: QuadOptions::default() }
    }

    /// Equal-weight atoms at the given samples.
    pub fn empirical(samples: &[f64]) -> Self {
        let m = 1.0 / samples.len() as f64;
        Self::new(samples.iter().map(|&x| Atom { x, mass: m }).collect(), Density::None)
    }

    pub fn with_quad_options(mut self, quad: QuadOptions) -> Self {
        self.quad = quad;
        self
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn density_at(&self, x: f64) -> f64 {
        self.density.eval(x)
    }

    /// Smallest closed interval containing all atoms and the density's support.
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in &self.atoms {
            lo = lo.min(a.x);
            hi = hi.max(a.x);
        }
        if let Some((a, b)) = self.density.interval() {
            lo = lo.min(a);
            hi = hi.max(b);
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    pub fn continuous_mass(&self) -> Result<f64, QuadError> {
        self.density.mass_below(f64::INFINITY, &self.quad)
    }

    pub fn total_mass(&self) -> Result<f64, QuadError> {
        Ok(self.atom_mass() + self.continuous_mass()?)
    }

    /// Right-continuous CDF, `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> Result<f64, QuadError> {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.x <= x).map(|a| a.mass).sum();
        Ok(atoms + self.density.mass_below(x, &self.quad)?)
    }

    /// Left limit of the CDF, `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> Result<f64, QuadError> {
        let atoms: f64 = self.atoms.iter().take_while(|a| a.x < x).map(|a| a.mass).sum();
        Ok(atoms + self.density.mass_below(x, &self.quad)?)
    }

    /// `(P(X < z), P(X ≤ z))` at every point of an ascending sequence. Cheaper
    /// than repeated [`Self::cdf`] calls for numerically integrated densities.
    pub fn cdf_pairs(&self, sorted: &[f64]) -> Result<Vec<(f64, f64)>, QuadError> {
        let continuous: Vec<f64> = match &self.density {
            Density::Callable { f, lo, hi, breaks } => {
                let clip = |z: f64| z.clamp(*lo, *hi);
                let pieces: Vec<f64> = (0..sorted.len())
                    .into_par_iter()
                    .map(|i| {
                        let a = if i == 0 { *lo } else { clip(sorted[i - 1]) };
                        let b = clip(sorted[i]);
                        if b <= a {
                            return Ok(0.0);
                        }
                        Ok(integrate_breaks(|t| f(t), &panels(a, b, breaks), &self.quad)?.value)
                    })
                    .collect::<Result<_, QuadError>>()?;
                pieces
                    .iter()
                    .scan(0.0, |acc, m| {
                        *acc += m;
                        Some(*acc)
                    })
                    .collect()
            }
            other => sorted.iter().map(|&z| other.mass_below(z, &self.quad)).collect::<Result<_, _>>()?,
        };
        let mut out = Vec::with_capacity(sorted.len());
        let mut j = 0;
        let mut below = 0.0;
        for (i, &z) in sorted.iter().enumerate() {
            while j < self.atoms.len() && self.atoms[j].x < z {
                below += self.atoms[j].mass;
                j += 1;
            }
            let at: f64 = self.atoms[j..].iter().take_while(|a| a.x == z).map(|a| a.mass).sum();
            out.push((below + continuous[i], below + at + continuous[i]));
        }
        Ok(out)
    }

    /// `E[X^k]`, including the atoms.
    pub fn moment(&self, k: i32) -> Result<f64, QuadError> {
        let atoms: f64 = self.atoms.iter().map(|a| a.mass * a.x.powi(k)).sum();
        Ok(atoms + self.density.moment(k, &self.quad)?)
    }
}

/// Convenience for building a callable density from a closure.
pub fn callable(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lo: f64, hi: f64) -> Density {
    Density::Callable { f: Arc::new(f), lo, hi, breaks: Vec::new() }
}
