//! Closed-loop time integration of `u_t = ε u_xx + C(u)_x + R(u)` on `(0, 1)`
//! with Dirichlet actuation at one endpoint and a homogeneous condition at
//! the other.
//!
//! Diffusion is advanced with Crank-Nicolson, convection and reaction are
//! explicit, and the boundary value is held over each step (computed from
//! `u^n`). The Crank-Nicolson left-hand matrix is constant and factored once.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::controllers::{
    make_controller, vdot_closed_form, ControlError, Controller, ControllerKind, ControllerSpec, Feedback,
    FeedbackInputs, Side,
};
use crate::discretization::{
    build_diff_ops, build_grid, feedback_inputs, Backend, DiffOps, DiscretizationError, GridState,
};
use crate::linalg::{LinalgError, LuFactors, Matrix, SparseMatrix};
use crate::profile::Profile;
use crate::scalar::Scalar;

/// Default threshold on `max |u|` beyond which a run is declared blown up.
pub const DEFAULT_BLOWUP_THRESHOLD: f64 = 1e6;
/// Default number of snapshot frames over a run.
pub const DEFAULT_SNAPSHOT_FRAMES: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("controller {controller} does not match plant convection {convection}")]
    Mismatch { controller: ControllerKind, convection: Convection },
    #[error(transparent)]
    Discretization(#[from] DiscretizationError),
    #[error("Crank-Nicolson matrix: {0}")]
    Linalg(#[from] LinalgError),
    #[error("controller failed at t = {time}: {source}")]
    Control { time: f64, source: ControlError },
    #[error("decay rate estimation: {0}")]
    Estimation(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionTerm<T> {
    pub coefficient: T,
    pub power: u32,
}

/// Polynomial reaction `R(u) = Σ c_k u^{p_k}` with every `p_k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReactionSpec<T> {
    terms: Vec<ReactionTerm<T>>,
}

impl<T: Scalar> ReactionSpec<T> {
    pub fn new(terms: Vec<ReactionTerm<T>>) -> Result<Self, SimError> {
        for t in &terms {
            if t.power == 0 {
                return Err(SimError::Config("reaction terms need power >= 1 so that R(0) = 0".into()));
            }
            if !t.coefficient.is_finite() {
                return Err(SimError::Config("non-finite reaction coefficient".into()));
            }
        }
        Ok(Self { terms })
    }

    pub fn none() -> Self {
        Self { terms: Vec::new() }
    }

    /// `λ u³`.
    pub fn cubic(lambda: T) -> Self {
        Self { terms: vec![ReactionTerm { coefficient: lambda, power: 3 }] }
    }

    pub fn terms(&self) -> &[ReactionTerm<T>] {
        &self.terms
    }

    pub fn eval(&self, u: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, t| acc + t.coefficient * u.powi(t.power as i32))
    }
}

pub fn reaction_eval<T: Scalar>(spec: &ReactionSpec<T>, u: T) -> T {
    spec.eval(u)
}

/// Plant convection `C(u)_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Convection {
    None,
    /// `+(u²)_x`
    PlusSquare,
    /// `−(u²)_x`
    MinusSquare,
    /// `+u_x`
    PlusLinear,
    /// `+(u³)_x`
    PlusCube,
    /// `−u_x`
    MinusLinear,
    /// `−(u³)_x`
    MinusCube,
}

impl Convection {
    pub const ALL: [Convection; 7] = [
        Convection::None,
        Convection::PlusSquare,
        Convection::MinusSquare,
        Convection::PlusLinear,
        Convection::PlusCube,
        Convection::MinusLinear,
        Convection::MinusCube,
    ];

    pub fn flux<T: Scalar>(self, u: T) -> T {
        match self {
            Convection::None => T::zero(),
            Convection::PlusSquare => u * u,
            Convection::MinusSquare => -u * u,
            Convection::PlusLinear => u,
            Convection::PlusCube => u * u * u,
            Convection::MinusLinear => -u,
            Convection::MinusCube => -u * u * u,
        }
    }

    pub fn flux_derivative<T: Scalar>(self, u: T) -> T {
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        match self {
            Convection::None => T::zero(),
            Convection::PlusSquare => two * u,
            Convection::MinusSquare => -two * u,
            Convection::PlusLinear => T::one(),
            Convection::PlusCube => three * u * u,
            Convection::MinusLinear => -T::one(),
            Convection::MinusCube => -three * u * u,
        }
    }

    /// The controller for which `½∫u²` is a control Lyapunov functional.
    pub fn controller_kind(self) -> Option<ControllerKind> {
        match self {
            Convection::None => None,
            Convection::PlusSquare => Some(ControllerKind::FlowPositive),
            Convection::MinusSquare => Some(ControllerKind::FlowNegative),
            Convection::PlusLinear => Some(ControllerKind::Counter),
            Convection::PlusCube => Some(ControllerKind::Buckmaster),
            Convection::MinusLinear => Some(ControllerKind::CounterRight),
            Convection::MinusCube => Some(ControllerKind::BuckmasterRight),
        }
    }

    pub fn side(self) -> Side {
        self.controller_kind().map_or(Side::Left, ControllerKind::side)
    }

    pub fn name(self) -> &'static str {
        match self {
            Convection::None => "none",
            Convection::PlusSquare => "+u^2",
            Convection::MinusSquare => "-u^2",
            Convection::PlusLinear => "+u",
            Convection::PlusCube => "+u^3",
            Convection::MinusLinear => "-u",
            Convection::MinusCube => "-u^3",
        }
    }
}

impl fmt::Display for Convection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convection {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Convection::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown convection `{s}`")))
    }
}

/// Spatial form of the explicit convection term.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum ConvectionForm {
    /// `d1·C(u)`.
    #[default]
    Conservative,
    /// `C'(u)·(d1·u)`.
    ChainRule,
    /// Flux differences with the local Lax-Friedrichs (Rusanov) numerical
    /// flux on the uniform grid. Stable under forward Euler for
    /// `max|C'(u)|·dt/h ≤ 1`, which the central forms never are.
    Rusanov,
}

impl ConvectionForm {
    pub fn name(self) -> &'static str {
        match self {
            ConvectionForm::Conservative => "conservative",
            ConvectionForm::ChainRule => "chain_rule",
            ConvectionForm::Rusanov => "rusanov",
        }
    }
}

impl FromStr for ConvectionForm {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [ConvectionForm::Conservative, ConvectionForm::ChainRule, ConvectionForm::Rusanov]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| SimError::Config(format!("unknown convection form `{s}`")))
    }
}

/// Discrete `C(u)_x` at every node.
pub fn convection_term<T: Scalar>(
    convection: Convection,
    form: ConvectionForm,
    state: &GridState<T>,
    ops: &DiffOps<T>,
) -> Vec<T> {
    let u = state.values();
    let n = u.len();
    if convection == Convection::None {
        return vec![T::zero(); n];
    }
    match form {
        ConvectionForm::Conservative => {
            let flux: Vec<T> = u.iter().map(|&x| convection.flux(x)).collect();
            ops.first_derivative(&flux)
        }
        ConvectionForm::ChainRule => {
            let ux = ops.first_derivative(u);
            u.iter().zip(ux).map(|(&x, dx)| convection.flux_derivative(x) * dx).collect()
        }
        ConvectionForm::Rusanov => {
            // u_t + f(u)_x = 0 with f = −C.
            let h = ops.grid().spacing();
            let half = T::lit(0.5);
            let interface: Vec<T> = u
                .windows(2)
                .map(|w| {
                    let (l, r) = (w[0], w[1]);
                    let speed = convection.flux_derivative(l).abs().max(convection.flux_derivative(r).abs());
                    -half * (convection.flux(l) + convection.flux(r)) - half * speed * (r - l)
                })
                .collect();
            let mut out = vec![T::zero(); n];
            for i in 1..n - 1 {
                out[i] = -(interface[i] - interface[i - 1]) / h;
            }
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    Profile(Profile<T>),
    /// Nodal values; the length must match the grid.
    Sampled(Vec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoopMode<T> {
    Open,
    Closed(ControllerSpec<T>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    pub epsilon: T,
    pub reaction: ReactionSpec<T>,
    pub convection: Convection,
    pub convection_form: ConvectionForm,
    pub grid_n: usize,
    pub backend: Backend<T>,
    pub dt: T,
    pub t_final: T,
    pub initial: InitialCondition<T>,
    pub loop_mode: LoopMode<T>,
    pub blowup_threshold: T,
    /// Steps between snapshots; `None` spreads about 200 frames over the run.
    pub snapshot_every: Option<usize>,
}

impl<T: Scalar> SimConfig<T> {
    /// Open-loop pure diffusion of a zero state; adjust fields from here.
    pub fn new(epsilon: T, grid_n: usize, dt: T, t_final: T) -> Self {
        Self {
            epsilon,
            reaction: ReactionSpec::none(),
            convection: Convection::None,
            convection_form: ConvectionForm::default(),
            grid_n,
            backend: Backend::FiniteDifference,
            dt,
            t_final,
            initial: InitialCondition::Profile(Profile::zero()),
            loop_mode: LoopMode::Open,
            blowup_threshold: T::lit(DEFAULT_BLOWUP_THRESHOLD),
            snapshot_every: None,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let positive = |name: &str, v: T| {
            if v.is_finite() && v > T::zero() {
                Ok(())
            } else {
                Err(SimError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        positive("blowup_threshold", self.blowup_threshold)?;
        if let Backend::Multiquadric { shape } = self.backend {
            positive("shape", shape)?;
        }
        if self.grid_n < crate::discretization::MIN_INTERVALS {
            return Err(DiscretizationError::TooFewIntervals(self.grid_n).into());
        }
        if self.snapshot_every == Some(0) {
            return Err(SimError::Config("snapshot_every must be >= 1".into()));
        }
        match &self.initial {
            InitialCondition::Sampled(v) if v.len() != self.grid_n + 1 => {
                return Err(DiscretizationError::LengthMismatch { expected: self.grid_n + 1, got: v.len() }.into());
            }
            InitialCondition::Sampled(v) if v.iter().any(|x| !x.is_finite()) => {
                return Err(SimError::Config("non-finite initial values".into()));
            }
            InitialCondition::Profile(p) if !p.is_finite() => {
                return Err(SimError::Config("non-finite initial profile".into()));
            }
            _ => {}
        }
        if let LoopMode::Closed(spec) = &self.loop_mode {
            spec.validate().map_err(|e| SimError::Config(e.to_string()))?;
            if self.convection.controller_kind() != Some(spec.kind) {
                return Err(SimError::Mismatch { controller: spec.kind, convection: self.convection });
            }
            if spec.epsilon != self.epsilon {
                return Err(SimError::Config(format!(
                    "controller epsilon {} differs from plant epsilon {}",
                    spec.epsilon, self.epsilon
                )));
            }
        }
        Ok(())
    }

    pub fn side(&self) -> Side {
        match &self.loop_mode {
            LoopMode::Closed(spec) => spec.kind.side(),
            LoopMode::Open => self.convection.side(),
        }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round().to_usize().unwrap_or(0).max(1)
    }

    pub fn build_ops(&self) -> Result<DiffOps<T>, SimError> {
        let grid = build_grid(self.grid_n)?;
        Ok(build_diff_ops(&grid, self.backend)?)
    }

    pub fn initial_state(&self, ops: &DiffOps<T>) -> Result<GridState<T>, SimError> {
        let grid = ops.grid();
        Ok(match &self.initial {
            InitialCondition::Profile(p) => GridState::from_fn(grid, |x| p.eval(x)),
            InitialCondition::Sampled(v) => GridState::new(v.clone(), grid)?,
        })
    }
}

/// Crank-Nicolson operators with Dirichlet rows at both endpoints.
#[derive(Debug, Clone)]
pub struct CrankNicolson<T> {
    /// `I − (ε dt/2)·d2`, boundary rows replaced by identity rows.
    pub left: Matrix<T>,
    /// `I + (ε dt/2)·d2`, boundary rows zeroed.
    pub right: Matrix<T>,
    right_sparse: SparseMatrix<T>,
    lu: LuFactors<T>,
}

impl<T: Scalar> CrankNicolson<T> {
    pub fn factorization(&self) -> &LuFactors<T> {
        &self.lu
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        self.lu.solve(rhs)
    }
}

pub fn cn_matrices<T: Scalar>(epsilon: T, dt: T, ops: &DiffOps<T>) -> Result<CrankNicolson<T>, SimError> {
    if !(dt > T::zero()) {
        return Err(SimError::Config(format!("dt must be positive, got {dt}")));
    }
    let n = ops.grid().len();
    let last = n - 1;
    let half = epsilon * dt / T::lit(2.0);
    let id = Matrix::identity(n);
    let mut left = id.add_scaled(-half, ops.d2());
    let mut right = id.add_scaled(half, ops.d2());
    for row in [0, last] {
        left.row_mut(row).fill(T::zero());
        left[(row, row)] = T::one();
        right.row_mut(row).fill(T::zero());
    }
    let lu = LuFactors::factor(&left)?;
    let right_sparse = right.to_sparse();
    Ok(CrankNicolson { left, right, right_sparse, lu })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRecord<T> {
    pub t: T,
    pub lyapunov: T,
    pub control: T,
    pub max_abs_u: T,
    pub boundary_slope: T,
    /// `Φ` used by the feedback at this time; NaN on a blown-up state.
    pub phi: T,
}

impl<T: Scalar> SeriesRecord<T> {
    pub fn inputs(&self) -> FeedbackInputs<T> {
        FeedbackInputs { lyapunov: self.lyapunov, boundary_slope: self.boundary_slope, phi: self.phi }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot<T> {
    pub t: T,
    pub values: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome<T> {
    Completed,
    BlowUp { time: T },
}

impl<T> Outcome<T> {
    pub fn is_blow_up(&self) -> bool {
        matches!(self, Outcome::BlowUp { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult<T> {
    pub series: Vec<SeriesRecord<T>>,
    pub snapshots: Vec<Snapshot<T>>,
    pub outcome: Outcome<T>,
}

impl<T: Scalar> RunResult<T> {
    pub fn decay_rate(&self) -> Result<T, SimError> {
        let points: Vec<(T, T)> =
            self.series.iter().filter(|r| r.lyapunov.is_finite()).map(|r| (r.t, r.lyapunov)).collect();
        decay_rate(&points)
    }

    pub fn max_abs_control(&self) -> T {
        self.series.iter().map(|r| r.control.abs()).filter(|v| v.is_finite()).fold(T::zero(), T::max)
    }
}

/// Least-squares slope of `ln V` against `t` over the prefix where
/// `V > 1e-12·V(0)`.
pub fn decay_rate<T: Scalar>(series: &[(T, T)]) -> Result<T, SimError> {
    let v0 = series.first().map(|p| p.1).unwrap_or(T::zero());
    if !(v0 > T::zero()) {
        return Err(SimError::Estimation("series must start with V > 0".into()));
    }
    let floor = T::lit(1e-12) * v0;
    let window: Vec<(T, T)> =
        series.iter().take_while(|(_, v)| *v > floor && v.is_finite()).map(|&(t, v)| (t, v.ln())).collect();
    if window.len() < 10 {
        return Err(SimError::Estimation(format!("need at least 10 points with V > 0, got {}", window.len())));
    }
    let n = T::from_count(window.len());
    let (st, sy) = window.iter().fold((T::zero(), T::zero()), |(a, b), &(t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (sxy, sxx) = window.iter().fold((T::zero(), T::zero()), |(a, b), &(t, y)| {
        let dt = t - mt;
        (a + dt * (y - my), b + dt * dt)
    });
    if !(sxx > T::zero()) {
        return Err(SimError::Estimation("degenerate time axis".into()));
    }
    Ok(sxy / sxx)
}

/// Time stepper bound to one configuration and one set of operators.
pub struct Simulator<'a, T> {
    config: &'a SimConfig<T>,
    ops: &'a DiffOps<T>,
    cn: CrankNicolson<T>,
    controller: Option<Controller<T>>,
}

impl<'a, T: Scalar> Simulator<'a, T> {
    pub fn new(config: &'a SimConfig<T>, ops: &'a DiffOps<T>) -> Result<Self, SimError> {
        config.validate()?;
        if ops.grid().n_intervals() != config.grid_n {
            return Err(SimError::Config(format!(
                "operators built for {} intervals, config asks for {}",
                ops.grid().n_intervals(),
                config.grid_n
            )));
        }
        let cn = cn_matrices(config.epsilon, config.dt, ops)?;
        let controller = match &config.loop_mode {
            LoopMode::Open => None,
            LoopMode::Closed(spec) => Some(make_controller(*spec).map_err(|e| SimError::Config(e.to_string()))?),
        };
        Ok(Self { config, ops, cn, controller })
    }

    pub fn crank_nicolson(&self) -> &CrankNicolson<T> {
        &self.cn
    }

    pub fn controller(&self) -> Option<&Controller<T>> {
        self.controller.as_ref()
    }

    pub fn feedback_inputs(&self, state: &GridState<T>) -> Result<FeedbackInputs<T>, DiscretizationError> {
        feedback_inputs(state, self.ops, |u| self.config.reaction.eval(u), self.config.epsilon, self.config.side())
    }

    /// One step with the boundary value `v` held on the actuated endpoint.
    /// The result may contain non-finite values; callers check for blow-up.
    pub fn step(&self, state: &GridState<T>, v: T) -> GridState<T> {
        let u = state.values();
        let n = u.len();
        let conv = convection_term(self.config.convection, self.config.convection_form, state, self.ops);
        let mut rhs = vec![T::zero(); n];
        self.cn.right_sparse.mul_vec_into(u, &mut rhs);
        let dt = self.config.dt;
        for i in 0..n {
            rhs[i] = rhs[i] + dt * (conv[i] + self.config.reaction.eval(u[i]));
        }
        let (actuated, fixed) = match self.config.side() {
            Side::Left => (0, n - 1),
            Side::Right => (n - 1, 0),
        };
        rhs[actuated] = v;
        rhs[fixed] = T::zero();
        GridState::from_raw(self.cn.solve(&rhs))
    }

    pub fn run(&self) -> Result<RunResult<T>, SimError> {
        match &self.controller {
            Some(c) => self.run_with(Some(c)),
            None => self.run_with(None),
        }
    }

    /// Runs with an arbitrary feedback map, or open loop (`v = 0`) for `None`.
    pub fn run_with(&self, feedback: Option<&dyn Feedback<T>>) -> Result<RunResult<T>, SimError> {
        let cfg = self.config;
        let n_steps = cfg.n_steps();
        let every = cfg.snapshot_every.unwrap_or_else(|| n_steps.div_ceil(DEFAULT_SNAPSHOT_FRAMES)).max(1);
        let time = |k: usize| T::from_count(k) * cfg.dt;

        let mut state = cfg.initial_state(self.ops)?;
        let mut series = Vec::with_capacity(n_steps + 1);
        let mut snapshots = Vec::new();

        for k in 0..=n_steps {
            let t = time(k);
            let inputs = self.feedback_inputs(&state)?;
            let v = match feedback {
                Some(f) => f
                    .control(&inputs)
                    .map_err(|source| SimError::Control { time: t.to_f64().unwrap_or(f64::NAN), source })?,
                None => T::zero(),
            };
            series.push(SeriesRecord {
                t,
                lyapunov: inputs.lyapunov,
                control: v,
                max_abs_u: state.max_abs(),
                boundary_slope: inputs.boundary_slope,
                phi: inputs.phi,
            });
            if k % every == 0 || k == n_steps {
                snapshots.push(Snapshot { t, values: state.values().to_vec() });
            }
            if k == n_steps {
                break;
            }

            let next = self.step(&state, v);
            let peak = next.max_abs();
            if !next.is_finite() || !(peak <= cfg.blowup_threshold) {
                let t_next = time(k + 1);
                let ux = self.ops.first_derivative(next.values());
                let slope = match cfg.side() {
                    Side::Left => ux[0],
                    Side::Right => ux[ux.len() - 1],
                };
                series.push(SeriesRecord {
                    t: t_next,
                    lyapunov: next.lyapunov(self.ops),
                    control: v,
                    max_abs_u: if peak.is_nan() { T::infinity() } else { peak },
                    boundary_slope: slope,
                    phi: T::nan(),
                });
                snapshots.push(Snapshot { t: t_next, values: next.into_values() });
                return Ok(RunResult { series, snapshots, outcome: Outcome::BlowUp { time: t_next } });
            }
            state = next;
        }
        Ok(RunResult { series, snapshots, outcome: Outcome::Completed })
    }
}

/// Validates, builds operators for the configured backend, and runs.
pub fn run<T: Scalar>(config: &SimConfig<T>) -> Result<RunResult<T>, SimError> {
    let ops = config.build_ops()?;
    run_with_ops(config, &ops)
}

pub fn run_with_ops<T: Scalar>(config: &SimConfig<T>, ops: &DiffOps<T>) -> Result<RunResult<T>, SimError> {
    Simulator::new(config, ops)?.run()
}

/// Per-record check of `V̇(v) ≤ −α(V) + tol·(1 + |Φ| + α(V))` on a closed-loop
/// series, using the closed-form derivative for the controller's kind.
/// Records without a finite `Φ` (the blow-up record) are skipped.
pub fn certificate_violations<T: Scalar>(
    series: &[SeriesRecord<T>],
    controller: &Controller<T>,
    tolerance: T,
) -> Result<Vec<usize>, ControlError> {
    let spec = controller.spec();
    let mut bad = Vec::new();
    for (i, rec) in series.iter().enumerate() {
        if !(rec.phi.is_finite() && rec.lyapunov.is_finite()) {
            continue;
        }
        let inputs = rec.inputs();
        let alpha = controller.alpha(inputs.lyapunov)?;
        let vdot = vdot_closed_form(spec.kind, &inputs, spec.epsilon, rec.control);
        if !(vdot <= -alpha + tolerance * (T::one() + inputs.phi.abs() + alpha)) {
            bad.push(i);
        }
    }
    Ok(bad)
}
