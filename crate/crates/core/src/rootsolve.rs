//! Real-root extraction for the polynomial families the feedback laws reduce to.
//!
//! Only the branches the controllers need are provided: the Cardano real root
//! of a depressed cubic with nonnegative discriminant, and both real roots of a
//! quadratic. Rounding can push a discriminant that is nonnegative in exact
//! arithmetic slightly below zero; values inside a relative slack band are
//! clamped to zero, anything beyond it is reported as a domain error.

use thiserror::Error;

use crate::scalar::Scalar;

/// Relative slack applied to discriminants before they are treated as negative.
pub const DISCRIMINANT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum RootError {
    #[error("negative discriminant {discriminant:e} (slack {slack:e})")]
    NegativeDiscriminant { discriminant: f64, slack: f64 },
    #[error("leading coefficient is zero")]
    DegenerateLeading,
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Monic cubic without quadratic term: `v³ + beta·v + q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepressedCubic<T> {
    pub beta: T,
    pub q: T,
}

impl<T: Scalar> DepressedCubic<T> {
    pub fn new(beta: T, q: T) -> Self {
        Self { beta, q }
    }

    /// `q²/4 + beta³/27`.
    pub fn discriminant(&self) -> T {
        self.q * self.q / T::lit(4.0) + self.beta.powi(3) / T::lit(27.0)
    }

    /// Floating-point slack `1e-12 · max(1, q², |beta|³)`.
    pub fn slack(&self) -> T {
        let scale = T::one().max(self.q * self.q).max(self.beta.abs().powi(3));
        T::lit(DISCRIMINANT_SLACK) * scale
    }

    pub fn eval(&self, v: T) -> T {
        v * v * v + self.beta * v + self.q
    }
}

/// Coefficients of `a·v² + b·v + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoeffs<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Scalar> QuadraticCoeffs<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn discriminant(&self) -> T {
        self.b * self.b - T::lit(4.0) * self.a * self.c
    }

    pub fn slack(&self) -> T {
        let scale = T::one().max(self.b * self.b).max((T::lit(4.0) * self.a * self.c).abs());
        T::lit(DISCRIMINANT_SLACK) * scale
    }

    pub fn eval(&self, v: T) -> T {
        (self.a * v + self.b) * v + self.c
    }
}

/// Real cube root, odd in its argument.
#[inline]
pub fn signed_cbrt<T: Scalar>(x: T) -> T {
    if x < T::zero() {
        -(-x).cbrt()
    } else {
        x.cbrt()
    }
}

fn clamp_discriminant<T: Scalar>(disc: T, slack: T) -> Result<T, RootError> {
    if disc.is_nan() || slack.is_nan() {
        return Err(RootError::NonFinite);
    }
    if disc >= T::zero() {
        Ok(disc)
    } else if disc >= -slack {
        Ok(T::zero())
    } else {
        Err(RootError::NegativeDiscriminant {
            discriminant: disc.to_f64().unwrap_or(f64::NAN),
            slack: slack.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Cardano's real root `∛(−q/2 + √Δ) + ∛(−q/2 − √Δ)` of a depressed cubic
/// with `Δ = q²/4 + beta³/27 ≥ 0`.
///
/// The two cube roots multiply to `−beta/3`, so the one whose radicand has
/// no cancellation is computed directly and the other is recovered from the
/// product. Both terms are the real cube roots of the textbook formula, so
/// the result is the same continuous branch.
pub fn cardano_real_root<T: Scalar>(cubic: DepressedCubic<T>) -> Result<T, RootError> {
    let DepressedCubic { beta, q } = cubic;
    if !beta.is_finite() || !q.is_finite() {
        return Err(RootError::NonFinite);
    }
    let disc = clamp_discriminant(cubic.discriminant(), cubic.slack())?;
    if q == T::zero() {
        // ∛(√Δ) + ∛(−√Δ) cancels exactly.
        return Ok(T::zero());
    }
    let half_q = q / T::lit(2.0);
    let root_disc = disc.sqrt();
    let dominant = if q > T::zero() { signed_cbrt(-half_q - root_disc) } else { signed_cbrt(-half_q + root_disc) };
    if dominant == T::zero() {
        return Ok(T::zero());
    }
    let partner = -beta / (T::lit(3.0) * dominant);
    Ok(dominant + partner)
}

/// Both real roots of a quadratic, ordered `(smaller, larger)`.
pub fn quadratic_roots<T: Scalar>(qc: QuadraticCoeffs<T>) -> Result<(T, T), RootError> {
    let QuadraticCoeffs { a, b, c } = qc;
    if !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(RootError::NonFinite);
    }
    if a == T::zero() {
        return Err(RootError::DegenerateLeading);
    }
    let disc = clamp_discriminant(qc.discriminant(), qc.slack())?;
    let root_disc = disc.sqrt();
    // t = −(b + sign(b)·√disc)/2 never cancels; the roots are t/a and c/t.
    let t = if b >= T::zero() { -(b + root_disc) / T::lit(2.0) } else { (root_disc - b) / T::lit(2.0) };
    let (r1, r2) = if t == T::zero() { (T::zero(), T::zero()) } else { (t / a, c / t) };
    Ok(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}
