//! Universal boundary feedback laws for the convection-reaction-diffusion plant
//!
//! ```text
//! u_t = ε u_xx + C(u)_x + R(u),   x ∈ (0, 1)
//! ```
//!
//! with Dirichlet actuation at one endpoint and `V = ½∫u²` as the Lyapunov
//! functional. Every law consumes the same triple ([`FeedbackInputs`]):
//! `V`, the slope `u_x` at the actuated endpoint, and
//! `Φ = ∫(u R(u) − ε u_x²)`. After integration by parts `V̇` equals `Φ` plus a
//! polynomial in the boundary value `v`:
//!
//! | kind              | plant convection | `V̇ − Φ`                     |
//! |-------------------|------------------|-----------------------------|
//! | `FlowPositive`    | `+(u²)_x`, left  | `−(2/3)v³ − ε v u_x(0)`     |
//! | `FlowNegative`    | `−(u²)_x`, left  | `+(2/3)v³ − ε v u_x(0)`     |
//! | `Counter`         | `+u_x`, left     | `−½v² − ε v u_x(0)`         |
//! | `Buckmaster`      | `+(u³)_x`, left  | `−¾v⁴ − ε v u_x(0)`         |
//! | `CounterRight`    | `−u_x`, right    | `−½v² + ε v u_x(1)`         |
//! | `BuckmasterRight` | `−(u³)_x`, right | `−¾v⁴ + ε v u_x(1)`         |
//!
//! Each controller picks `v` as a root of a polynomial equation built so that
//! `V̇ ≤ −α(V)` holds and the root depends continuously on the inputs.
//! The quartic cases are first relaxed with Young's inequality
//! `|ε v u_x| ≤ ½|u_x|v² + (ε²/2)|u_x|`, which leaves a biquadratic in `v`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rootsolve::{cardano_real_root, quadratic_roots, DepressedCubic, QuadraticCoeffs, RootError};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid controller configuration: {0}")]
    Config(String),
    #[error("invalid feedback inputs: {0}")]
    Inputs(String),
    #[error("controller kind {0} cannot build a depressed cubic")]
    WrongKind(ControllerKind),
    #[error(transparent)]
    Root(#[from] RootError),
}

/// Endpoint at which the Dirichlet control acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ControllerKind {
    FlowPositive,
    FlowNegative,
    Counter,
    Buckmaster,
    CounterRight,
    BuckmasterRight,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 6] = [
        ControllerKind::FlowPositive,
        ControllerKind::FlowNegative,
        ControllerKind::Counter,
        ControllerKind::Buckmaster,
        ControllerKind::CounterRight,
        ControllerKind::BuckmasterRight,
    ];

    pub fn side(self) -> Side {
        match self {
            ControllerKind::CounterRight | ControllerKind::BuckmasterRight => Side::Right,
            _ => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::FlowPositive => "flow_positive",
            ControllerKind::FlowNegative => "flow_negative",
            ControllerKind::Counter => "counter",
            ControllerKind::Buckmaster => "buckmaster",
            ControllerKind::CounterRight => "counter_right",
            ControllerKind::BuckmasterRight => "buckmaster_right",
        }
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ControllerKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ControlError::Config(format!("unknown controller kind `{s}`")))
    }
}

/// Sign selector for the `±` in the quadratic and biquadratic laws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Branch {
    #[default]
    Plus,
    Minus,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }
}

impl FromStr for Branch {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plus" | "+" => Ok(Branch::Plus),
            "minus" | "-" => Ok(Branch::Minus),
            other => Err(ControlError::Config(format!("unknown branch `{other}`"))),
        }
    }
}

/// The triple a universal feedback consumes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackInputs<T> {
    /// `V = ½∫u²`.
    pub lyapunov: T,
    /// `u_x` at the actuated endpoint.
    pub boundary_slope: T,
    /// `Φ = ∫(u R(u) − ε u_x²)`.
    pub phi: T,
}

impl<T: Scalar> FeedbackInputs<T> {
    pub fn new(lyapunov: T, boundary_slope: T, phi: T) -> Result<Self, ControlError> {
        let inputs = Self { lyapunov, boundary_slope, phi };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn zero() -> Self {
        Self { lyapunov: T::zero(), boundary_slope: T::zero(), phi: T::zero() }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.lyapunov.is_finite() && self.boundary_slope.is_finite() && self.phi.is_finite()) {
            return Err(ControlError::Inputs("non-finite field".into()));
        }
        if self.lyapunov < T::zero() {
            return Err(ControlError::Inputs(format!("negative V = {}", self.lyapunov)));
        }
        Ok(())
    }
}

/// Decay envelope `α(V) = gain · V^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSpec<T> {
    pub gain: T,
    pub exponent: T,
}

impl<T: Scalar> AlphaSpec<T> {
    pub fn new(gain: T, exponent: T) -> Result<Self, ControlError> {
        let spec = Self { gain, exponent };
        spec.validate()?;
        Ok(spec)
    }

    /// `α(V) = V`.
    pub fn identity() -> Self {
        Self { gain: T::one(), exponent: T::one() }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        if !(self.gain.is_finite() && self.gain > T::zero()) {
            return Err(ControlError::Config(format!("alpha gain must be > 0, got {}", self.gain)));
        }
        if !(self.exponent.is_finite() && self.exponent >= T::one()) {
            return Err(ControlError::Config(format!("alpha exponent must be >= 1, got {}", self.exponent)));
        }
        Ok(())
    }
}

pub fn alpha_eval<T: Scalar>(spec: &AlphaSpec<T>, lyapunov: T) -> Result<T, ControlError> {
    if !(lyapunov >= T::zero()) {
        return Err(ControlError::Inputs(format!("alpha evaluated at V = {lyapunov}")));
    }
    if lyapunov == T::zero() {
        return Ok(T::zero());
    }
    Ok(spec.gain * lyapunov.powf(spec.exponent))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerSpec<T> {
    pub kind: ControllerKind,
    pub alpha: AlphaSpec<T>,
    /// Diffusion coefficient of the plant.
    pub epsilon: T,
    pub branch: Branch,
}

impl<T: Scalar> ControllerSpec<T> {
    pub fn new(kind: ControllerKind, alpha: AlphaSpec<T>, epsilon: T) -> Self {
        Self { kind, alpha, epsilon, branch: Branch::Plus }
    }

    pub fn with_branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        self.alpha.validate()?;
        if !(self.epsilon.is_finite() && self.epsilon > T::zero()) {
            return Err(ControlError::Config(format!("epsilon must be > 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// `α(V) + |Φ|`, the forcing both quadratic-family laws and the cubics share.
fn forcing<T: Scalar>(inputs: &FeedbackInputs<T>, spec: &ControllerSpec<T>) -> Result<T, ControlError> {
    Ok(alpha_eval(&spec.alpha, inputs.lyapunov)? + inputs.phi.abs())
}

/// `√(2ε³)/2 · |u_x|^{3/2}`.
fn slope_term<T: Scalar>(epsilon: T, slope: T) -> T {
    (T::lit(2.0) * epsilon.powi(3)).sqrt() / T::lit(2.0) * slope.abs().powf(T::lit(1.5))
}

/// Cubic for `+(u²)_x`: `beta = (3ε/2)u_x(0)`,
/// `q = −(3/2)(α(V) + |Φ|) − √(2ε³)/2 · |u_x(0)|^{3/2}`.
pub fn build_cubic_flow_positive<T: Scalar>(
    inputs: &FeedbackInputs<T>,
    spec: &ControllerSpec<T>,
) -> Result<DepressedCubic<T>, ControlError> {
    if spec.kind != ControllerKind::FlowPositive {
        return Err(ControlError::WrongKind(spec.kind));
    }
    let beta = T::lit(1.5) * spec.epsilon * inputs.boundary_slope;
    let q = -T::lit(1.5) * forcing(inputs, spec)? - slope_term(spec.epsilon, inputs.boundary_slope);
    Ok(DepressedCubic::new(beta, q))
}

/// Cubic for `−(u²)_x`: signs of both coefficients mirrored, so `q ≥ 0`.
pub fn build_cubic_flow_negative<T: Scalar>(
    inputs: &FeedbackInputs<T>,
    spec: &ControllerSpec<T>,
) -> Result<DepressedCubic<T>, ControlError> {
    if spec.kind != ControllerKind::FlowNegative {
        return Err(ControlError::WrongKind(spec.kind));
    }
    let beta = -T::lit(1.5) * spec.epsilon * inputs.boundary_slope;
    let q = T::lit(1.5) * forcing(inputs, spec)? + slope_term(spec.epsilon, inputs.boundary_slope);
    Ok(DepressedCubic::new(beta, q))
}

/// Cardano root of the flow-convection cubic.
pub fn control_flow<T: Scalar>(inputs: &FeedbackInputs<T>, spec: &ControllerSpec<T>) -> Result<T, ControlError> {
    let cubic = match spec.kind {
        ControllerKind::FlowPositive => build_cubic_flow_positive(inputs, spec)?,
        ControllerKind::FlowNegative => build_cubic_flow_negative(inputs, spec)?,
        other => return Err(ControlError::WrongKind(other)),
    };
    Ok(cardano_real_root(cubic)?)
}

/// Root `v = b ± √(b² + 2c)` of `−½v² + b v + c = 0`, with `c = α(V) + |Φ|`
/// and `b = −ε u_x(0)` (left) or `b = +ε u_x(1)` (right).
pub fn control_counter<T: Scalar>(inputs: &FeedbackInputs<T>, spec: &ControllerSpec<T>) -> Result<T, ControlError> {
    let b = match spec.kind {
        ControllerKind::Counter => -spec.epsilon * inputs.boundary_slope,
        ControllerKind::CounterRight => spec.epsilon * inputs.boundary_slope,
        other => return Err(ControlError::WrongKind(other)),
    };
    let c = forcing(inputs, spec)?;
    let (low, high) = quadratic_roots(QuadraticCoeffs::new(-T::lit(0.5), b, c))?;
    Ok(match spec.branch {
        Branch::Plus => high,
        Branch::Minus => low,
    })
}

/// `v = ±√ṽ` with `ṽ = (2/3)(b + √(b² + 3c))` the nonnegative root of
/// `−¾ṽ² + b ṽ + c = 0`, `b = ½|u_x|`, `c = |Φ| + α(V) + (ε²/2)|u_x|`.
pub fn control_buckmaster<T: Scalar>(inputs: &FeedbackInputs<T>, spec: &ControllerSpec<T>) -> Result<T, ControlError> {
    if !matches!(spec.kind, ControllerKind::Buckmaster | ControllerKind::BuckmasterRight) {
        return Err(ControlError::WrongKind(spec.kind));
    }
    let slope = inputs.boundary_slope.abs();
    let b = T::lit(0.5) * slope;
    let c = forcing(inputs, spec)? + spec.epsilon * spec.epsilon / T::lit(2.0) * slope;
    let (_, squared) = quadratic_roots(QuadraticCoeffs::new(-T::lit(0.75), b, c))?;
    let magnitude = squared.max(T::zero()).sqrt();
    Ok(match spec.branch {
        Branch::Plus => magnitude,
        Branch::Minus => -magnitude,
    })
}

/// `V̇` as a function of the applied boundary value.
///
/// For the Buckmaster kinds this is the Young-inequality upper bound, which
/// is the quantity the controller certifies.
pub fn vdot_closed_form<T: Scalar>(kind: ControllerKind, inputs: &FeedbackInputs<T>, epsilon: T, v: T) -> T {
    let FeedbackInputs { phi, boundary_slope: slope, .. } = *inputs;
    let two_thirds = T::lit(2.0) / T::lit(3.0);
    let half = T::lit(0.5);
    let young = |v: T| -T::lit(0.75) * v.powi(4) + half * slope.abs() * v * v + epsilon * epsilon * half * slope.abs();
    match kind {
        ControllerKind::FlowPositive => phi - two_thirds * v.powi(3) - epsilon * v * slope,
        ControllerKind::FlowNegative => phi + two_thirds * v.powi(3) - epsilon * v * slope,
        ControllerKind::Counter => phi - half * v * v - epsilon * v * slope,
        ControllerKind::CounterRight => phi - half * v * v + epsilon * v * slope,
        ControllerKind::Buckmaster | ControllerKind::BuckmasterRight => phi + young(v),
    }
}

/// A boundary feedback map from [`FeedbackInputs`] to the control value.
pub trait Feedback<T> {
    fn control(&self, inputs: &FeedbackInputs<T>) -> Result<T, ControlError>;
}

/// Validated dispatcher over the six laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Controller<T> {
    spec: ControllerSpec<T>,
}

impl<T: Scalar> Controller<T> {
    pub fn spec(&self) -> &ControllerSpec<T> {
        &self.spec
    }

    /// Closed-form `V̇` for this controller's kind under the control `v`.
    pub fn vdot(&self, inputs: &FeedbackInputs<T>, v: T) -> T {
        vdot_closed_form(self.spec.kind, inputs, self.spec.epsilon, v)
    }

    pub fn alpha(&self, lyapunov: T) -> Result<T, ControlError> {
        alpha_eval(&self.spec.alpha, lyapunov)
    }
}

impl<T: Scalar> Feedback<T> for Controller<T> {
    fn control(&self, inputs: &FeedbackInputs<T>) -> Result<T, ControlError> {
        inputs.validate()?;
        match self.spec.kind {
            ControllerKind::FlowPositive | ControllerKind::FlowNegative => control_flow(inputs, &self.spec),
            ControllerKind::Counter | ControllerKind::CounterRight => control_counter(inputs, &self.spec),
            ControllerKind::Buckmaster | ControllerKind::BuckmasterRight => control_buckmaster(inputs, &self.spec),
        }
    }
}

impl<T, F> Feedback<T> for F
where
    F: Fn(&FeedbackInputs<T>) -> Result<T, ControlError>,
{
    fn control(&self, inputs: &FeedbackInputs<T>) -> Result<T, ControlError> {
        self(inputs)
    }
}

pub fn make_controller<T: Scalar>(spec: ControllerSpec<T>) -> Result<Controller<T>, ControlError> {
    spec.validate()?;
    Ok(Controller { spec })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(kind: ControllerKind, epsilon: f64) -> ControllerSpec<f64> {
        ControllerSpec::new(kind, AlphaSpec::identity(), epsilon)
    }

    fn inputs(v: f64, slope: f64, phi: f64) -> FeedbackInputs<f64> {
        FeedbackInputs::new(v, slope, phi).unwrap()
    }

    #[test]
    fn alpha_examples() {
        let id = AlphaSpec::<f64>::identity();
        assert_eq!(alpha_eval(&id, 0.0).unwrap(), 0.0);
        assert_eq!(alpha_eval(&id, 67500.0).unwrap(), 67500.0);
        assert_eq!(alpha_eval(&AlphaSpec::new(2.0, 2.0).unwrap(), 3.0).unwrap(), 18.0);
        assert!(alpha_eval(&id, -1.0).is_err());
    }

    #[test]
    fn alpha_spec_rejects_non_class_k() {
        assert!(AlphaSpec::new(0.0, 1.0).is_err());
        assert!(AlphaSpec::new(1.0, 0.5).is_err());
        assert!(AlphaSpec::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn inputs_validation() {
        assert!(FeedbackInputs::new(-1.0, 0.0, 0.0).is_err());
        assert!(FeedbackInputs::new(1.0, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn cubic_positive_examples() {
        let c = build_cubic_flow_positive(&FeedbackInputs::zero(), &spec(ControllerKind::FlowPositive, 1.0)).unwrap();
        assert_eq!((c.beta, c.q), (0.0, 0.0));

        // ε = 2, slope 1: √(2ε³)/2 = √16/2 = 2 and (2√3/9)·3^{3/2} = 2.
        let c = build_cubic_flow_positive(&inputs(0.0, 1.0, 0.0), &spec(ControllerKind::FlowPositive, 2.0)).unwrap();
        assert_eq!(c.beta, 3.0);
        assert!((c.q + 2.0).abs() < 1e-15);
        let boxed = -(2.0 * 3f64.sqrt() / 9.0) * 3f64.powf(1.5);
        assert!((boxed + 2.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_negative_examples() {
        let c = build_cubic_flow_negative(&FeedbackInputs::zero(), &spec(ControllerKind::FlowNegative, 1.0)).unwrap();
        assert_eq!((c.beta, c.q), (0.0, 0.0));
        let c = build_cubic_flow_negative(&inputs(0.0, 1.0, 0.0), &spec(ControllerKind::FlowNegative, 2.0)).unwrap();
        assert_eq!(c.beta, -3.0);
        assert!((c.q - 2.0).abs() < 1e-15);
    }

    #[test]
    fn cubic_builders_check_kind() {
        let s = spec(ControllerKind::Counter, 1.0);
        assert!(matches!(
            build_cubic_flow_positive(&FeedbackInputs::zero(), &s),
            Err(ControlError::WrongKind(ControllerKind::Counter))
        ));
        assert!(build_cubic_flow_negative(&FeedbackInputs::zero(), &s).is_err());
        assert!(control_flow(&FeedbackInputs::zero(), &s).is_err());
    }

    #[test]
    fn flow_control_reduces_to_pure_cube() {
        // FlowPositive with slope 0 and α + |Φ| = 4/3 gives β = 0, q = −2.
        let s = spec(ControllerKind::FlowPositive, 1.0);
        let v = control_flow(&inputs(4.0 / 3.0, 0.0, 0.0), &s).unwrap();
        assert!((v - 2f64.cbrt()).abs() < 1e-14);
        assert_eq!(control_flow(&FeedbackInputs::zero(), &s).unwrap(), 0.0);
    }

    #[test]
    fn counter_examples() {
        let s = spec(ControllerKind::Counter, 1.0);
        assert_eq!(control_counter(&FeedbackInputs::zero(), &s).unwrap(), 0.0);
        // b = 0, c = 2 → v = ±2.
        let inp = inputs(2.0, 0.0, 0.0);
        assert!((control_counter(&inp, &s).unwrap() - 2.0).abs() < 1e-15);
        assert!((control_counter(&inp, &s.with_branch(Branch::Minus)).unwrap() + 2.0).abs() < 1e-15);
        // b = −1, c = 0: roots of −v²/2 − v are −2 and 0.
        let inp = inputs(0.0, 1.0, 0.0);
        assert_eq!(control_counter(&inp, &s).unwrap(), 0.0);
        assert!((control_counter(&inp, &s.with_branch(Branch::Minus)).unwrap() + 2.0).abs() < 1e-15);
    }

    #[test]
    fn counter_right_uses_positive_slope_sign() {
        // b = +ε u_x(1) = 1, c = 0: roots of −v²/2 + v are 0 and 2.
        let s = spec(ControllerKind::CounterRight, 1.0);
        assert!((control_counter(&inputs(0.0, 1.0, 0.0), &s).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn buckmaster_examples() {
        let s = spec(ControllerKind::Buckmaster, 1.0);
        assert_eq!(control_buckmaster(&FeedbackInputs::zero(), &s).unwrap(), 0.0);
        // b = 0, c = 3: ṽ = 2.
        let v = control_buckmaster(&inputs(3.0, 0.0, 0.0), &s).unwrap();
        assert!((v - 2f64.sqrt()).abs() < 1e-15);
        assert!((-0.75 * 4.0 + 3.0f64).abs() < 1e-15);
        // slope 2, ε 1: b = 1, c = 1, ṽ = (2/3)(1 + 2) = 2.
        let v = control_buckmaster(&inputs(0.0, 2.0, 0.0), &s).unwrap();
        assert!((v * v - 2.0).abs() < 1e-14);
        let biquadratic = -0.75 * (v * v).powi(2) + 0.5 * 2.0 * v * v + 0.5 * 2.0;
        assert!(biquadratic.abs() < 1e-14);
    }

    #[test]
    fn vdot_examples() {
        assert_eq!(vdot_closed_form(ControllerKind::FlowPositive, &FeedbackInputs::zero(), 1.0, 0.0), 0.0);
        assert_eq!(vdot_closed_form(ControllerKind::Counter, &inputs(2.0, 0.0, 0.0), 1.0, 2.0), -2.0);
        let s = spec(ControllerKind::FlowPositive, 1.0);
        let inp = inputs(0.5, 0.0, 1.0);
        let v = control_flow(&inp, &s).unwrap();
        assert!(vdot_closed_form(ControllerKind::FlowPositive, &inp, 1.0, v) <= -0.5 + 1e-12);
    }

    #[test]
    fn make_controller_dispatch() {
        let c = make_controller(spec(ControllerKind::FlowNegative, 1.0)).unwrap();
        assert_eq!(c.control(&FeedbackInputs::zero()).unwrap(), 0.0);
        let c = make_controller(spec(ControllerKind::Counter, 1.0)).unwrap();
        assert!((c.control(&inputs(2.0, 0.0, 0.0)).unwrap() - 2.0).abs() < 1e-15);
        let c = make_controller(spec(ControllerKind::Buckmaster, 1.0).with_branch(Branch::Minus)).unwrap();
        assert!((c.control(&inputs(3.0, 0.0, 0.0)).unwrap() + 2f64.sqrt()).abs() < 1e-15);
        assert!(make_controller(spec(ControllerKind::Counter, 0.0)).is_err());
        assert!("sontag".parse::<ControllerKind>().is_err());
        assert_eq!("buckmaster_right".parse::<ControllerKind>().unwrap(), ControllerKind::BuckmasterRight);
    }

    #[test]
    fn every_kind_vanishes_at_origin() {
        for kind in ControllerKind::ALL {
            for branch in [Branch::Plus, Branch::Minus] {
                let c = make_controller(spec(kind, 0.3).with_branch(branch)).unwrap();
                assert_eq!(c.control(&FeedbackInputs::zero()).unwrap(), 0.0, "{kind} {branch:?}");
            }
        }
    }

    #[test]
    fn generic_over_f32() {
        let s = ControllerSpec::new(ControllerKind::Counter, AlphaSpec::<f32>::identity(), 1.0);
        let c = make_controller(s).unwrap();
        let v = c.control(&FeedbackInputs::new(2.0f32, 0.0, 0.0).unwrap()).unwrap();
        assert!((v - 2.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn boxed_q_identity(
            eps in 1e-4f64..2.0,
            slope in -1e3f64..1e3,
            v in 0.0f64..1e6,
            phi in -1e6f64..1e6,
        ) {
            let s = spec(ControllerKind::FlowPositive, eps);
            let inp = inputs(v, slope, phi);
            let c = build_cubic_flow_positive(&inp, &s).unwrap();
            let boxed = -(1.5 * (v + phi.abs()) + 2.0 * 3f64.sqrt() / 9.0 * c.beta.abs().powf(1.5));
            prop_assert!((c.q - boxed).abs() <= 1e-12 * c.q.abs().max(f64::MIN_POSITIVE));
        }

        #[test]
        fn negative_cubic_has_nonnegative_q_and_discriminant(
            eps in 1e-4f64..2.0,
            slope in -1e3f64..1e3,
            v in 0.0f64..1e6,
            phi in -1e6f64..1e6,
        ) {
            let s = spec(ControllerKind::FlowNegative, eps);
            let c = build_cubic_flow_negative(&inputs(v, slope, phi), &s).unwrap();
            prop_assert!(c.q >= 0.0);
            prop_assert!(c.discriminant() >= -c.slack());
        }

        #[test]
        fn counter_root_satisfies_quadratic(
            eps in 1e-4f64..2.0,
            slope in -1e3f64..1e3,
            v in 0.0f64..1e6,
            phi in -1e6f64..1e6,
            minus in proptest::bool::ANY,
        ) {
            let branch = if minus { Branch::Minus } else { Branch::Plus };
            let s = spec(ControllerKind::Counter, eps).with_branch(branch);
            let inp = inputs(v, slope, phi);
            let u = control_counter(&inp, &s).unwrap();
            let residual = phi.abs() - u * u / 2.0 - eps * slope * u + v;
            let scale = (u * u / 2.0).max((eps * slope * u).abs()).max(v + phi.abs()).max(1.0);
            prop_assert!(residual.abs() <= 1e-10 * scale);
        }

        #[test]
        fn buckmaster_square_solves_biquadratic(
            eps in 1e-4f64..2.0,
            slope in -1e3f64..1e3,
            v in 0.0f64..1e6,
            phi in -1e6f64..1e6,
        ) {
            let s = spec(ControllerKind::Buckmaster, eps);
            let inp = inputs(v, slope, phi);
            let u = control_buckmaster(&inp, &s).unwrap();
            prop_assert!(u >= 0.0);
            let sq = u * u;
            let b = 0.5 * slope.abs();
            let c = phi.abs() + v + eps * eps / 2.0 * slope.abs();
            let residual = -0.75 * sq * sq + b * sq + c;
            let scale = (0.75 * sq * sq).max(b * sq).max(c).max(1.0);
            prop_assert!(residual.abs() <= 1e-10 * scale);
        }
    }
}
