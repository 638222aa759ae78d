//! Laplace invariants and the Laplace cascade for 2×2 characteristic systems.
//!
//! For `X_1 u_1 = α_11 u_1 + α_12 u_2`, `X_2 u_2 = α_21 u_1 + α_22 u_2` with
//! `[X_1, X_2] = P X_1 + Q X_2` the invariants are
//!
//! ```text
//! h = X_2(α_11) − X_1(α_22) − X_1 X_2 ln α_12 − X_1(P) + P α_11 + α_12 α_21
//!     + (α_22 + X_2 ln α_12 + P) Q
//! k = α_12 α_21
//! ```
//!
//! Eliminating `u_2 = (X_1 u_1 − α_11 u_1)/α_12` gives the scalar operator
//! `X_1 X_2 + β_1 X_1 + β_2 X_2 + β_3 = (X_1 + β_2)(X_2 + β_1) − h` with
//! `β_1 = −(P + α_22 + X_2 ln α_12)` and `β_2 = −(Q + α_11)`. Introducing
//! `w = (X_2 + β_1) u_1` yields the X₁-transformed system
//!
//! ```text
//! X_1 w   = −β_2 w + h u_1
//! X_2 u_1 =      w − β_1 u_1
//! ```
//!
//! whose `k` is the old `h`. The X₂-transform is the same construction with
//! the roles of the two equations exchanged.

use num_traits::Zero;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{AlgebraError, Rat, RationalFunction};
use crate::charform::{CharFormError, CharacteristicSystem, Matrix2};

pub const DEFAULT_CHAIN_STEPS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CascadeError {
    #[error("h undefined; system already triangular in this direction (alpha_12 = 0)")]
    HUndefined,
    #[error("transform undefined: off-diagonal coefficient {0} vanishes")]
    TransformUndefined(&'static str),
    #[error("gauge factor must be nonzero")]
    ZeroGauge,
    #[error("rescaling constant must be nonzero")]
    ZeroScale,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    CharForm(#[from] CharFormError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantPair {
    pub h: RationalFunction,
    pub k: RationalFunction,
}

/// `k = α_12 α_21`; always defined.
pub fn k_invariant(cs: &CharacteristicSystem) -> Result<RationalFunction, CascadeError> {
    Ok(cs.alpha(0, 1).checked_mul(cs.alpha(1, 0))?)
}

/// Both Laplace invariants. Fails when `α_12 = 0`, where `h` is undefined
/// (use [`k_invariant`] there).
pub fn invariants(cs: &CharacteristicSystem) -> Result<InvariantPair, CascadeError> {
    let a11 = cs.alpha(0, 0);
    let a12 = cs.alpha(0, 1);
    let a22 = cs.alpha(1, 1);
    if a12.is_zero() {
        return Err(CascadeError::HUndefined);
    }
    let k = k_invariant(cs)?;
    let x2_log = cs.apply_x_log(1, a12)?;
    let h = cs
        .apply_x(1, a11)?
        .checked_sub(&cs.apply_x(0, a22)?)?
        .checked_sub(&cs.apply_x(0, &x2_log)?)?
        .checked_sub(&cs.apply_x(0, cs.p())?)?
        .checked_add(&cs.p().checked_mul(a11)?)?
        .checked_add(&k)?
        .checked_add(&a22.checked_add(&x2_log)?.checked_add(cs.p())?.checked_mul(cs.q())?)?;
    Ok(InvariantPair { h, k })
}

pub fn is_triangular(cs: &CharacteristicSystem) -> bool {
    cs.alpha(0, 1).is_zero() || cs.alpha(1, 0).is_zero()
}

/// The X₁-transformed system, relabelled into standard form: the new first
/// unknown is `w = (X_2 + β_1) u_1` (carried by `X_1`) and the new second
/// unknown is `u_1` (carried by `X_2`). Its `k` equals the `h` of `cs`.
pub fn x1_transform(cs: &CharacteristicSystem) -> Result<CharacteristicSystem, CascadeError> {
    if cs.alpha(0, 1).is_zero() {
        return Err(CascadeError::TransformUndefined("alpha_12"));
    }
    let h = invariants(cs)?.h;
    let x2_log = cs.apply_x_log(1, cs.alpha(0, 1))?;
    let alpha: Matrix2 = [
        [cs.q().checked_add(cs.alpha(0, 0))?, h],
        [RationalFunction::one(), cs.p().checked_add(cs.alpha(1, 1))?.checked_add(&x2_log)?],
    ];
    Ok(CharacteristicSystem::from_parts(
        cs.lambdas().clone(),
        cs.scales().clone(),
        alpha,
        cs.p().clone(),
        cs.q().clone(),
        None,
    ))
}

/// Exchanges the roles of the two equations. With `Y_1 = X_2`, `Y_2 = X_1`
/// the commutator is `[Y_1, Y_2] = −Q Y_1 − P Y_2`.
fn swap(cs: &CharacteristicSystem) -> CharacteristicSystem {
    let a = cs.alphas();
    CharacteristicSystem::from_parts(
        [cs.lambda(1).clone(), cs.lambda(0).clone()],
        [cs.scale(1).clone(), cs.scale(0).clone()],
        [[a[1][1].clone(), a[1][0].clone()], [a[0][1].clone(), a[0][0].clone()]],
        cs.q().neg(),
        cs.p().neg(),
        cs.leftvecs().map(|l| [l[1].clone(), l[0].clone()]),
    )
}

/// Eliminates `u_1` instead of `u_2`; inverse of [`x1_transform`] up to gauge.
///
/// In the result the first unknown is the old `u_2` and the second is
/// `(X_1 + β̃_1) u_2`; its `k` is the invariant of the `u_2`-equation.
pub fn x2_transform(cs: &CharacteristicSystem) -> Result<CharacteristicSystem, CascadeError> {
    if cs.alpha(1, 0).is_zero() {
        return Err(CascadeError::TransformUndefined("alpha_21"));
    }
    Ok(swap(&x1_transform(&swap(cs))?))
}

/// Substitution `u_i = g_i ũ_i`. Invariants are unchanged.
pub fn gauge(
    cs: &CharacteristicSystem,
    g1: &RationalFunction,
    g2: &RationalFunction,
) -> Result<CharacteristicSystem, CascadeError> {
    if g1.is_zero() || g2.is_zero() {
        return Err(CascadeError::ZeroGauge);
    }
    let g = [g1, g2];
    let mut alpha: Matrix2 = cs.alphas().clone();
    for i in 0..2 {
        // X_i(g_i ũ_i) = g_i X_i ũ_i + X_i(g_i) ũ_i
        let shift = cs.apply_x(i, g[i])?.checked_div(g[i])?;
        alpha[i][i] = cs.alpha(i, i).checked_sub(&shift)?;
        let k = 1 - i;
        alpha[i][k] = cs.alpha(i, k).checked_mul(g[k])?.checked_div(g[i])?;
    }
    let leftvecs = match cs.leftvecs() {
        Some(l) => Some([
            [l[0][0].checked_div(g1)?, l[0][1].checked_div(g1)?],
            [l[1][0].checked_div(g2)?, l[1][1].checked_div(g2)?],
        ]),
        None => None,
    };
    Ok(CharacteristicSystem::from_parts(
        cs.lambdas().clone(),
        cs.scales().clone(),
        alpha,
        cs.p().clone(),
        cs.q().clone(),
        leftvecs,
    ))
}

/// Constant operator rescaling `X_i → γ_i X_i`; multiplies both invariants by `γ_1 γ_2`.
pub fn rescale(cs: &CharacteristicSystem, gamma1: &Rat, gamma2: &Rat) -> Result<CharacteristicSystem, CascadeError> {
    if gamma1.is_zero() || gamma2.is_zero() {
        return Err(CascadeError::ZeroScale);
    }
    let gamma = [gamma1, gamma2];
    let a = cs.alphas();
    let alpha: Matrix2 =
        [[a[0][0].scale(gamma1), a[0][1].scale(gamma1)], [a[1][0].scale(gamma2), a[1][1].scale(gamma2)]];
    // [γ1 X1, γ2 X2] = γ2 P (γ1 X1) + γ1 Q (γ2 X2)
    Ok(CharacteristicSystem::from_parts(
        cs.lambdas().clone(),
        [cs.scale(0) * gamma[0], cs.scale(1) * gamma[1]],
        alpha,
        cs.p().scale(gamma2),
        cs.q().scale(gamma1),
        cs.leftvecs().cloned(),
    ))
}

/// Why one direction of a chain stopped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainEnd {
    /// The last entry is zero: the system there is triangular.
    Triangular,
    /// `max_steps` transforms were applied without reaching zero.
    StepCap,
    /// Coefficient degrees outgrew the cap; the message says where.
    DegreeOverflow(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainOptions {
    pub max_steps: usize,
    pub degree_cap: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self { max_steps: DEFAULT_CHAIN_STEPS, degree_cap: crate::algebra::degree_cap() }
    }
}

/// `k` values along the cascade in both directions from a starting system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantChain {
    /// `h` of the starting system; `None` when `α_12 = 0`.
    pub h: Option<RationalFunction>,
    pub k: RationalFunction,
    /// `k_(1), k_(2), …`
    pub forward: Vec<RationalFunction>,
    /// `k_(−1), k_(−2), …`
    pub backward: Vec<RationalFunction>,
    pub forward_end: ChainEnd,
    pub backward_end: ChainEnd,
}

impl InvariantChain {
    pub fn terminated_forward(&self) -> bool {
        self.forward_end == ChainEnd::Triangular
    }

    pub fn terminated_backward(&self) -> bool {
        self.backward_end == ChainEnd::Triangular
    }

    /// JSON form used by the CLI. Both lists start with the central `k`.
    pub fn to_json(&self) -> Value {
        let list = |side: &[RationalFunction]| -> Vec<String> {
            std::iter::once(&self.k).chain(side).map(|f| f.to_string()).collect()
        };
        let end = |e: &ChainEnd| match e {
            ChainEnd::Triangular => "triangular".to_string(),
            ChainEnd::StepCap => "step-cap".to_string(),
            ChainEnd::DegreeOverflow(m) => format!("degree-overflow: {m}"),
        };
        json!({
            "h": self.h.as_ref().map_or_else(|| "undefined".to_string(), |h| h.to_string()),
            "k": self.k.to_string(),
            "forward": list(&self.forward),
            "backward": list(&self.backward),
            "terminated": self.terminated_forward() || self.terminated_backward(),
            "terminated_forward": self.terminated_forward(),
            "terminated_backward": self.terminated_backward(),
            "forward_status": end(&self.forward_end),
            "backward_status": end(&self.backward_end),
        })
    }
}

type Transform = fn(&CharacteristicSystem) -> Result<CharacteristicSystem, CascadeError>;

fn walk(
    start: &CharacteristicSystem,
    transform: Transform,
    opts: &ChainOptions,
) -> Result<(Vec<RationalFunction>, ChainEnd), CascadeError> {
    let mut out = Vec::new();
    let mut current = start.clone();
    for _ in 0..opts.max_steps {
        let next = match transform(&current) {
            Ok(n) => n,
            Err(CascadeError::Algebra(AlgebraError::DegreeCap { degree, cap })) => {
                return Ok((out, ChainEnd::DegreeOverflow(format!("degree {degree} > cap {cap}"))));
            }
            Err(e) => return Err(e),
        };
        let degree = next.max_degree();
        if degree > opts.degree_cap {
            let msg = format!("degree {degree} > cap {} after {} steps", opts.degree_cap, out.len() + 1);
            return Ok((out, ChainEnd::DegreeOverflow(msg)));
        }
        let k = k_invariant(&next)?;
        let done = k.is_zero();
        out.push(k);
        if done {
            return Ok((out, ChainEnd::Triangular));
        }
        current = next;
    }
    Ok((out, ChainEnd::StepCap))
}

/// Applies X₁-transforms forward and X₂-transforms backward, collecting `k`
/// until it vanishes, the step cap is reached, or degrees overflow.
pub fn build_chain(cs: &CharacteristicSystem, opts: &ChainOptions) -> Result<InvariantChain, CascadeError> {
    let k = k_invariant(cs)?;
    let h = match invariants(cs) {
        Ok(pair) => Some(pair.h),
        Err(CascadeError::HUndefined) => None,
        Err(e) => return Err(e),
    };
    if k.is_zero() {
        return Ok(InvariantChain {
            h,
            k,
            forward: Vec::new(),
            backward: Vec::new(),
            forward_end: ChainEnd::Triangular,
            backward_end: ChainEnd::Triangular,
        });
    }
    let (forward, forward_end) = walk(cs, x1_transform, opts)?;
    let (backward, backward_end) = walk(cs, x2_transform, opts)?;
    Ok(InvariantChain { h, k, forward, backward, forward_end, backward_end })
}
