//! Complete solution of `u_xy + x u_xz − u_z = 0` through the factorization
//! with `X1 = D_x`, `X2 = D_y + x D_z`, `X3 = D_z`, checked on polynomials.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Axis, MPoly3, Rat, UPoly};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiniError {
    #[error("incompatible v: X2 X1 v = {0} is not zero")]
    IncompatibleV(String),
    #[error("{name} must not depend on {axis}")]
    StrayVariable { name: &'static str, axis: char },
}

/// `X2 = D_y + x D_z`.
pub fn x2(p: &MPoly3) -> MPoly3 {
    &p.partial(Axis::Y) + &(&MPoly3::var(Axis::X) * &p.partial(Axis::Z))
}

/// `v = ∫ φ(x, xy − z) dx + ψ(y, z)`.
///
/// `φ(a, b)` is stored with `a` on the x axis and `b` on the y axis;
/// `ψ` uses the y and z axes.
pub fn dini_v(phi: &MPoly3, psi: &MPoly3) -> Result<MPoly3, DiniError> {
    if phi.degree_in(Axis::Z) > 0 {
        return Err(DiniError::StrayVariable { name: "phi", axis: 'z' });
    }
    if psi.degree_in(Axis::X) > 0 {
        return Err(DiniError::StrayVariable { name: "psi", axis: 'x' });
    }
    let x = MPoly3::var(Axis::X);
    let b = &(&x * &MPoly3::var(Axis::Y)) - &MPoly3::var(Axis::Z);
    let composed = phi.substitute(&[x, b, MPoly3::zero()]);
    Ok(&composed.antiderivative(Axis::X) + psi)
}

/// `u = ∫₀ˣ v(s, y, 0) ds + ∫₀ᶻ (X2 v)(x, y, s) ds + θ(y)`, the line integral
/// taken along the path from `(0, y, 0)`.
pub fn dini_u(v: &MPoly3, theta: &UPoly) -> Result<MPoly3, DiniError> {
    let obstruction = x2(&v.partial(Axis::X));
    if !obstruction.is_zero() {
        return Err(DiniError::IncompatibleV(obstruction.to_string()));
    }
    let along_x = v.restrict(Axis::Z, &Rat::from_integer(BigInt::from(0))).antiderivative(Axis::X);
    let along_z = x2(v).antiderivative(Axis::Z);
    Ok(&(&along_x + &along_z) + &MPoly3::from_upoly(theta, Axis::Y))
}

/// `L u = u_xy + x u_xz − u_z`.
pub fn check_l(u: &MPoly3) -> MPoly3 {
    let ux = u.partial(Axis::X);
    let mixed = &ux.partial(Axis::Y) + &(&MPoly3::var(Axis::X) * &ux.partial(Axis::Z));
    &mixed - &u.partial(Axis::Z)
}

fn random_rat<R: Rng + ?Sized>(rng: &mut R) -> Rat {
    Rat::new(BigInt::from(rng.gen_range(-9i64..=9)), BigInt::from(rng.gen_range(1i64..=6)))
}

/// Random polynomial in the two given axes with total degree at most `degree`.
pub fn random_bivariate<R: Rng + ?Sized>(rng: &mut R, axes: (Axis, Axis), degree: u32) -> MPoly3 {
    let mut terms = Vec::new();
    for i in 0..=degree {
        for j in 0..=degree - i {
            if rng.gen_bool(0.6) {
                let mut e = [0u32; 3];
                e[axes.0 as usize] = i;
                e[axes.1 as usize] = j;
                terms.push((e, random_rat(rng)));
            }
        }
    }
    MPoly3::from_terms(terms)
}

pub fn random_univariate<R: Rng + ?Sized>(rng: &mut R, degree: u32) -> UPoly {
    UPoly::new((0..=degree).map(|_| random_rat(rng)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiniTrial {
    pub phi: String,
    pub psi: String,
    pub theta: String,
    /// Number of terms in `L u`; zero for every correct trial.
    pub residual_terms: usize,
    /// Terms of `X1 u − v` and `X3 u − X2 v`.
    pub x1_defect_terms: usize,
    pub x3_defect_terms: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiniReport {
    pub seed: u64,
    pub trials: Vec<DiniTrial>,
    pub all_zero: bool,
}

/// One trial on explicit inputs.
pub fn run_trial(phi: &MPoly3, psi: &MPoly3, theta: &UPoly) -> Result<DiniTrial, DiniError> {
    let v = dini_v(phi, psi)?;
    let u = dini_u(&v, theta)?;
    Ok(DiniTrial {
        phi: phi.to_string(),
        psi: psi.to_string(),
        theta: theta.to_string(),
        residual_terms: check_l(&u).num_terms(),
        x1_defect_terms: (&u.partial(Axis::X) - &v).num_terms(),
        x3_defect_terms: (&u.partial(Axis::Z) - &x2(&v)).num_terms(),
    })
}

/// Randomized suite over `trials` inputs of degree at most `max_degree`.
pub fn demo(seed: u64, trials: usize, max_degree: u32) -> Result<DiniReport, DiniError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let d = rng.gen_range(0..=max_degree);
        let phi = random_bivariate(&mut rng, (Axis::X, Axis::Y), d);
        let d = rng.gen_range(0..=max_degree);
        let psi = random_bivariate(&mut rng, (Axis::Y, Axis::Z), d);
        let d = rng.gen_range(0..=max_degree);
        let theta = random_univariate(&mut rng, d);
        out.push(run_trial(&phi, &psi, &theta)?);
    }
    let all_zero = out.iter().all(|t| t.residual_terms == 0 && t.x1_defect_terms == 0 && t.x3_defect_terms == 0);
    Ok(DiniReport { seed, trials: out, all_zero })
}
