//! Characteristic form of 2×2 first-order hyperbolic systems.
//!
//! A system `v_t = A(x) v_x + B(x) v` with strictly hyperbolic `A` is
//! rewritten along its characteristic fields `X_i = D_t − λ_i D_x` as
//!
//! ```text
//! X_1 u_1 = α_11 u_1 + α_12 u_2
//! X_2 u_2 = α_21 u_1 + α_22 u_2
//! ```
//!
//! with `u_i = l_i · v` for the left eigenvectors `l_i` of `A`. Coefficients
//! depend on `x` only, so every quantity is a univariate [`RationalFunction`]
//! and `X_i g(x) = −λ_i g'(x)`.
//!
//! The evolution variable is `t` and the spatial one is `x`; in the
//! classical presentation these roles are often named `x` and `y`.

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{rat_to_string, AlgebraError, Rat, RationalFunction, UPoly};

pub type Matrix2 = [[RationalFunction; 2]; 2];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CharFormError {
    #[error("irrational characteristic speeds: discriminant {0} is not a square")]
    IrrationalSpeeds(String),
    #[error("not strictly hyperbolic: characteristic speeds coincide")]
    NotStrictlyHyperbolic,
    #[error("system carries no eigenvector data")]
    NoEigenvectors,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `v_t = A(x) v_x + B(x) v` for `v = (v_1, v_2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FirstOrderSystem2 {
    pub a: Matrix2,
    pub b: Matrix2,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Eigendata {
    pub lambda: [RationalFunction; 2],
    /// Row `i` is the left eigenvector for `lambda[i]`, first nonzero entry 1.
    pub leftvecs: Matrix2,
}

/// A 2×2 system in characteristic form.
///
/// The operators are `X_i = s_i (D_t − λ_i D_x)` where the constant operator
/// scales `s_i` are 1 unless [`crate::cascade::rescale`] was applied.
/// `P`, `Q` are the commutator coefficients `[X_1, X_2] = P X_1 + Q X_2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacteristicSystem {
    lambda: [RationalFunction; 2],
    scale: [Rat; 2],
    alpha: Matrix2,
    p: RationalFunction,
    q: RationalFunction,
    leftvecs: Option<Matrix2>,
}

impl CharacteristicSystem {
    /// Builds a system with unit operator scales, computing `P`, `Q` from the speeds.
    pub fn new(lambda: [RationalFunction; 2], alpha: Matrix2) -> Result<Self, CharFormError> {
        let (p, q) = commutator_coeffs(&lambda[0], &lambda[1])?;
        Ok(Self { lambda, scale: [Rat::one(), Rat::one()], alpha, p, q, leftvecs: None })
    }

    pub(crate) fn from_parts(
        lambda: [RationalFunction; 2],
        scale: [Rat; 2],
        alpha: Matrix2,
        p: RationalFunction,
        q: RationalFunction,
        leftvecs: Option<Matrix2>,
    ) -> Self {
        Self { lambda, scale, alpha, p, q, leftvecs }
    }

    pub fn lambda(&self, i: usize) -> &RationalFunction {
        &self.lambda[i]
    }

    pub fn lambdas(&self) -> &[RationalFunction; 2] {
        &self.lambda
    }

    pub fn scale(&self, i: usize) -> &Rat {
        &self.scale[i]
    }

    pub fn scales(&self) -> &[Rat; 2] {
        &self.scale
    }

    /// `alpha(i, k)` with zero-based indices.
    pub fn alpha(&self, i: usize, k: usize) -> &RationalFunction {
        &self.alpha[i][k]
    }

    pub fn alphas(&self) -> &Matrix2 {
        &self.alpha
    }

    pub fn p(&self) -> &RationalFunction {
        &self.p
    }

    pub fn q(&self) -> &RationalFunction {
        &self.q
    }

    pub fn leftvecs(&self) -> Option<&Matrix2> {
        self.leftvecs.as_ref()
    }

    /// `X_i g` for a function of `x` alone: `−s_i λ_i g'`.
    pub fn apply_x(&self, i: usize, g: &RationalFunction) -> Result<RationalFunction, AlgebraError> {
        let d = g.derivative()?;
        Ok(self.lambda[i].checked_mul(&d)?.scale(&-&self.scale[i]))
    }

    /// `X_i ln g`, realized through the logarithmic derivative.
    pub fn apply_x_log(&self, i: usize, g: &RationalFunction) -> Result<RationalFunction, AlgebraError> {
        let d = g.log_deriv()?;
        Ok(self.lambda[i].checked_mul(&d)?.scale(&-&self.scale[i]))
    }

    /// Largest numerator/denominator degree among the coefficients.
    pub fn max_degree(&self) -> usize {
        self.alpha
            .iter()
            .flatten()
            .chain([&self.p, &self.q])
            .map(|f| f.num().degree().unwrap_or(0).max(f.den().degree().unwrap_or(0)))
            .max()
            .unwrap_or(0)
    }

    pub fn to_json(&self) -> Value {
        let m = |mat: &Matrix2| -> Value {
            json!(mat.iter().map(|row| row.iter().map(|f| f.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
        };
        json!({
            "lambda": [self.lambda[0].to_string(), self.lambda[1].to_string()],
            "scale": [rat_to_string(&self.scale[0]), rat_to_string(&self.scale[1])],
            "alpha": m(&self.alpha),
            "P": self.p.to_string(),
            "Q": self.q.to_string(),
            "leftvecs": self.leftvecs.as_ref().map(m),
        })
    }
}

impl FirstOrderSystem2 {
    pub fn to_json(&self) -> Value {
        let m = |mat: &Matrix2| -> Value {
            json!(mat.iter().map(|row| row.iter().map(|f| f.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>())
        };
        json!({ "A": m(&self.a), "B": m(&self.b) })
    }
}

/// Characteristic speeds and left eigenvectors of `A`.
///
/// When `A` is triangular (`a_12 a_21 = 0`) the speeds keep the diagonal
/// order; otherwise `λ_1 − λ_2` is the square root of the discriminant with
/// positive leading coefficient.
pub fn eigendata(a: &Matrix2) -> Result<Eigendata, CharFormError> {
    let [[a11, a12], [a21, a22]] = a;
    let trace = a11.checked_add(a22)?;
    let off = a12.checked_mul(a21)?;
    let spread = if off.is_zero() {
        a11.checked_sub(a22)?
    } else {
        let diff = a11.checked_sub(a22)?;
        let disc = diff.checked_mul(&diff)?.checked_add(&off.scale(&Rat::from_integer(4.into())))?;
        match (disc.num().sqrt(), disc.den().sqrt()) {
            (Some(n), Some(d)) => RationalFunction::new(n, d)?,
            _ => return Err(CharFormError::IrrationalSpeeds(disc.to_string())),
        }
    };
    if spread.is_zero() {
        return Err(CharFormError::NotStrictlyHyperbolic);
    }
    let half = Rat::new(1.into(), 2.into());
    let lambda1 = trace.checked_add(&spread)?.scale(&half);
    let lambda2 = trace.checked_sub(&spread)?.scale(&half);
    let l1 = left_eigenvector(a, &lambda1)?;
    let l2 = left_eigenvector(a, &lambda2)?;
    Ok(Eigendata { lambda: [lambda1, lambda2], leftvecs: [l1, l2] })
}

fn left_eigenvector(a: &Matrix2, lambda: &RationalFunction) -> Result<[RationalFunction; 2], CharFormError> {
    let [[a11, a12], [a21, a22]] = a;
    // l (A − λ I) = 0 has solutions (a21, λ − a11) and (a22 − λ, −a12)
    let first = [a21.clone(), lambda.checked_sub(a11)?];
    let second = [a22.checked_sub(lambda)?, a12.neg()];
    let v = if first.iter().any(|f| !f.is_zero()) { first } else { second };
    let pivot = if v[0].is_zero() { &v[1] } else { &v[0] };
    if pivot.is_zero() {
        return Err(CharFormError::NotStrictlyHyperbolic);
    }
    Ok([v[0].checked_div(pivot)?, v[1].checked_div(pivot)?])
}

fn inverse2(m: &Matrix2) -> Result<Matrix2, CharFormError> {
    let det = m[0][0].checked_mul(&m[1][1])?.checked_sub(&m[0][1].checked_mul(&m[1][0])?)?;
    let inv = det.recip()?;
    Ok([
        [m[1][1].checked_mul(&inv)?, m[0][1].neg().checked_mul(&inv)?],
        [m[1][0].neg().checked_mul(&inv)?, m[0][0].checked_mul(&inv)?],
    ])
}

fn matmul(a: &Matrix2, b: &Matrix2) -> Result<Matrix2, AlgebraError> {
    let entry = |i: usize, j: usize| -> Result<RationalFunction, AlgebraError> {
        a[i][0].checked_mul(&b[0][j])?.checked_add(&a[i][1].checked_mul(&b[1][j])?)
    };
    Ok([[entry(0, 0)?, entry(0, 1)?], [entry(1, 0)?, entry(1, 1)?]])
}

/// Coefficients of `[X_1, X_2] = P X_1 + Q X_2` for `X_i = D_t − λ_i(x) D_x`.
///
/// The commutator is `(λ_1 λ_2' − λ_2 λ_1') D_x`; matching the `D_t` and
/// `D_x` parts gives `P + Q = 0` and `P = (λ_2 λ_1' − λ_1 λ_2')/(λ_1 − λ_2)`.
pub fn commutator_coeffs(
    lambda1: &RationalFunction,
    lambda2: &RationalFunction,
) -> Result<(RationalFunction, RationalFunction), CharFormError> {
    let gap = lambda1.checked_sub(lambda2)?;
    if gap.is_zero() {
        return Err(CharFormError::NotStrictlyHyperbolic);
    }
    let top =
        lambda2.checked_mul(&lambda1.derivative()?)?.checked_sub(&lambda1.checked_mul(&lambda2.derivative()?)?)?;
    let p = top.checked_div(&gap)?;
    let q = p.neg();
    Ok((p, q))
}

/// Rewrites `sys` in characteristic form.
///
/// With `L` the matrix of left eigenvectors, row `i` of `α` is
/// `(l_i B + X_i l_i) L⁻¹`.
pub fn to_characteristic(sys: &FirstOrderSystem2) -> Result<CharacteristicSystem, CharFormError> {
    let eig = eigendata(&sys.a)?;
    let l = eig.leftvecs;
    let linv = inverse2(&l)?;
    let mut rows: Matrix2 = Default::default();
    for i in 0..2 {
        for s in 0..2 {
            let lb = l[i][0].checked_mul(&sys.b[0][s])?.checked_add(&l[i][1].checked_mul(&sys.b[1][s])?)?;
            let xl = eig.lambda[i].checked_mul(&l[i][s].derivative()?)?.neg();
            rows[i][s] = lb.checked_add(&xl)?;
        }
    }
    let alpha = matmul(&rows, &linv)?;
    let mut cs = CharacteristicSystem::new(eig.lambda, alpha)?;
    cs.leftvecs = Some(l);
    Ok(cs)
}

/// Inverse of [`to_characteristic`]: recovers `A` and `B` from the speeds,
/// `α`, and the retained eigenvector rows.
pub fn reconstruct(cs: &CharacteristicSystem) -> Result<FirstOrderSystem2, CharFormError> {
    let l = cs.leftvecs.as_ref().ok_or(CharFormError::NoEigenvectors)?;
    let linv = inverse2(l)?;
    let diag: Matrix2 =
        [[cs.lambda[0].clone(), RationalFunction::zero()], [RationalFunction::zero(), cs.lambda[1].clone()]];
    let a = matmul(&matmul(&linv, &diag)?, l)?;
    // l_i B = (α_i/s_i) L + λ_i l_i'
    let mut rhs: Matrix2 = Default::default();
    let alpha_l = matmul(&cs.alpha, l)?;
    for i in 0..2 {
        let inv_scale = cs.scale[i].recip();
        for s in 0..2 {
            let xl = cs.lambda[i].checked_mul(&l[i][s].derivative()?)?;
            rhs[i][s] = alpha_l[i][s].scale(&inv_scale).checked_add(&xl)?;
        }
    }
    let b = matmul(&linv, &rhs)?;
    Ok(FirstOrderSystem2 { a, b })
}

/// Master equations of `ẋ = p(x) + α(t) q(x)` with dichotomous `α = ±1`
/// switching at frequency `2ν`, for `v = (W, W_1)`:
///
/// ```text
/// W_t   + (p W)_x + (q W_1)_x = 0
/// W_1,t + 2ν W_1 + (p W_1)_x + (q W)_x = 0
/// ```
pub fn master_system(p: &UPoly, q: &UPoly, nu: &Rat) -> FirstOrderSystem2 {
    let f = |u: &UPoly| RationalFunction::from_poly(u.clone());
    let (dp, dq) = (p.derivative(), q.derivative());
    let two_nu = UPoly::constant(nu + nu);
    FirstOrderSystem2 {
        a: [[f(&-p), f(&-q)], [f(&-q), f(&-p)]],
        b: [[f(&-&dp), f(&-&dq)], [f(&-&dq), f(&-(&dp + &two_nu))]],
    }
}

/// `p(x) = p1 x + p2 x²`, `q(x) = q2 x²`.
pub fn verhulst_polys(p1: &Rat, p2: &Rat, q2: &Rat) -> (UPoly, UPoly) {
    let p = UPoly::new(vec![Rat::zero(), p1.clone(), p2.clone()]);
    let q = UPoly::new(vec![Rat::zero(), Rat::zero(), q2.clone()]);
    (p, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{parse_upoly, rat};

    fn c(n: i64) -> RationalFunction {
        RationalFunction::constant(rat(n, 1))
    }

    fn poly(s: &str) -> RationalFunction {
        RationalFunction::from_poly(parse_upoly(s, "x").unwrap())
    }

    #[test]
    fn master_eigendata() {
        let (p, q) = verhulst_polys(&rat(1, 1), &rat(-2, 1), &rat(1, 2));
        let sys = master_system(&p, &q, &rat(1, 1));
        let eig = eigendata(&sys.a).unwrap();
        let (pf, qf) = (RationalFunction::from_poly(p), RationalFunction::from_poly(q));
        assert_eq!(eig.lambda[0], pf.neg().checked_add(&qf).unwrap());
        assert_eq!(eig.lambda[1], pf.neg().checked_sub(&qf).unwrap());
        assert_eq!(eig.leftvecs, [[c(1), c(-1)], [c(1), c(1)]]);
    }

    #[test]
    fn diagonal_eigendata_keeps_order() {
        let a = [[c(1), c(0)], [c(0), c(2)]];
        let eig = eigendata(&a).unwrap();
        assert_eq!(eig.lambda, [c(1), c(2)]);
        assert_eq!(eig.leftvecs, [[c(1), c(0)], [c(0), c(1)]]);
    }

    #[test]
    fn off_diagonal_x() {
        let a = [[c(0), poly("x")], [poly("x"), c(0)]];
        let eig = eigendata(&a).unwrap();
        assert_eq!(eig.lambda, [poly("x"), poly("-x")]);
        for i in 0..2 {
            let l = &eig.leftvecs[i];
            for j in 0..2 {
                let lhs =
                    l[0].checked_mul(&a[0][j]).unwrap().checked_add(&l[1].checked_mul(&a[1][j]).unwrap()).unwrap();
                assert_eq!(lhs, eig.lambda[i].checked_mul(&l[j]).unwrap());
            }
        }
    }

    #[test]
    fn eigendata_errors() {
        let irrational = [[c(0), c(1)], [c(2), c(0)]];
        assert!(matches!(eigendata(&irrational), Err(CharFormError::IrrationalSpeeds(_))));
        let degenerate = [[c(3), c(0)], [c(0), c(3)]];
        assert_eq!(eigendata(&degenerate), Err(CharFormError::NotStrictlyHyperbolic));
        // q ≡ 0 master system
        let sys = master_system(&UPoly::x(), &UPoly::zero(), &rat(1, 1));
        assert_eq!(to_characteristic(&sys), Err(CharFormError::NotStrictlyHyperbolic));
    }

    #[test]
    fn master_alpha_matches_closed_form() {
        let p = parse_upoly("x - 2*x^2", "x").unwrap();
        let q = parse_upoly("1/2*x^2", "x").unwrap();
        let nu = rat(3, 1);
        let cs = to_characteristic(&master_system(&p, &q, &nu)).unwrap();
        let (px, qx) = (RationalFunction::from_poly(p.derivative()), RationalFunction::from_poly(q.derivative()));
        let nuf = RationalFunction::constant(nu);
        let a11 = px.checked_sub(&qx).unwrap().checked_add(&nuf).unwrap().neg();
        let a22 = px.checked_add(&qx).unwrap().checked_add(&nuf).unwrap().neg();
        assert_eq!(cs.alpha(0, 0), &a11);
        assert_eq!(cs.alpha(0, 1), &nuf);
        assert_eq!(cs.alpha(1, 0), &nuf);
        assert_eq!(cs.alpha(1, 1), &a22);
    }

    #[test]
    fn constant_diagonal_without_sources() {
        let sys = FirstOrderSystem2 { a: [[c(1), c(0)], [c(0), c(2)]], b: [[c(0), c(0)], [c(0), c(0)]] };
        let cs = to_characteristic(&sys).unwrap();
        assert!(cs.alphas().iter().flatten().all(RationalFunction::is_zero));
        assert!(cs.p().is_zero() && cs.q().is_zero());
    }

    #[test]
    fn commutator_examples() {
        let (p, q) = commutator_coeffs(&c(1), &c(2)).unwrap();
        assert!(p.is_zero() && q.is_zero());
        let (p, _) = commutator_coeffs(&poly("x"), &poly("-x")).unwrap();
        assert!(p.is_zero());
        assert!(commutator_coeffs(&poly("x"), &poly("x")).is_err());
        // Verhulst speeds: P = (q p' − p q')/q, which is −p1 for the polynomial family
        let l1 = poly("-x + 5/2*x^2");
        let l2 = poly("-x + 3/2*x^2");
        let (p, q) = commutator_coeffs(&l1, &l2).unwrap();
        assert_eq!(p, c(-1));
        assert_eq!(q, c(1));
    }

    #[test]
    fn master_first_row_is_divergence() {
        let (p, q) = verhulst_polys(&rat(2, 1), &rat(-3, 1), &rat(1, 1));
        let sys = master_system(&p, &q, &rat(5, 1));
        for j in 0..2 {
            assert_eq!(sys.b[0][j], sys.a[0][j].derivative().unwrap());
        }
        let sym = master_system(&p, &q, &rat(0, 1));
        assert_eq!(sym.b[0][1], sym.b[1][0]);
    }

    #[test]
    fn round_trip_master() {
        let (p, q) = verhulst_polys(&rat(1, 1), &rat(-2, 1), &rat(1, 2));
        let sys = master_system(&p, &q, &rat(7, 3));
        let cs = to_characteristic(&sys).unwrap();
        assert_eq!(reconstruct(&cs).unwrap(), sys);
    }
}
