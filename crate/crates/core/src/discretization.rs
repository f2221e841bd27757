//! Collocation on a uniform grid of `[0, 1]`.
//!
//! Two backends produce first/second differentiation matrices on the same
//! nodes:
//!
//! * finite differences: second-order central stencils inside, one-sided
//!   stencils on the boundary rows;
//! * multiquadric RBF collocation with kernel `√((x − x_j)² + c²)` centred at
//!   the nodes, augmented with the linear polynomials `{1, x}` so constants
//!   and linear functions are differentiated exactly on every row.
//!
//! As `c → 0` the multiquadric kernel tends to `|x − x_j|`: the interpolant
//! becomes the piecewise-linear spline through the data. Its first-derivative
//! matrix then reduces to central differences inside the domain, while the
//! second-derivative matrix scales like `h/(2c)` times a second difference and
//! no longer approximates `u_xx`. The finite-difference backend is the
//! reference for anything involving curvature.
//!
//! Integrals use trapezoidal weights on the nodes in both backends.

use thiserror::Error;

use crate::controllers::{FeedbackInputs, Side};
use crate::linalg::{LinalgError, LuFactors, Matrix, SparseMatrix};
use crate::scalar::Scalar;

pub const MIN_INTERVALS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiscretizationError {
    #[error("grid needs at least {MIN_INTERVALS} intervals, got {0}")]
    TooFewIntervals(usize),
    #[error("RBF shape parameter must be positive and finite, got {0}")]
    InvalidShape(f64),
    #[error("RBF interpolation matrix is singular: {0}")]
    SingularInterpolation(LinalgError),
    #[error("length mismatch: grid has {expected} nodes, got {got} values")]
    LengthMismatch { expected: usize, got: usize },
    #[error("state contains non-finite values")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    n_intervals: usize,
    nodes: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn n_intervals(&self) -> usize {
        self.n_intervals
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn spacing(&self) -> T {
        T::one() / T::from_count(self.n_intervals)
    }

    /// Samples `f` at every node.
    pub fn sample(&self, f: impl Fn(T) -> T) -> Vec<T> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }
}

/// Uniform grid `x_i = i/N`, `i = 0..=N`.
pub fn build_grid<T: Scalar>(n_intervals: usize) -> Result<Grid<T>, DiscretizationError> {
    if n_intervals < MIN_INTERVALS {
        return Err(DiscretizationError::TooFewIntervals(n_intervals));
    }
    let n = T::from_count(n_intervals);
    let mut nodes: Vec<T> = (0..=n_intervals).map(|i| T::from_count(i) / n).collect();
    nodes[n_intervals] = T::one();
    Ok(Grid { n_intervals, nodes })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend<T> {
    FiniteDifference,
    Multiquadric { shape: T },
}

/// Differentiation matrices and quadrature weights on one grid.
#[derive(Debug, Clone)]
pub struct DiffOps<T> {
    grid: Grid<T>,
    backend: Backend<T>,
    d1: Matrix<T>,
    d2: Matrix<T>,
    quad_weights: Vec<T>,
    d1_sparse: SparseMatrix<T>,
    d2_sparse: SparseMatrix<T>,
}

impl<T: Scalar> DiffOps<T> {
    fn assemble(grid: Grid<T>, backend: Backend<T>, d1: Matrix<T>, d2: Matrix<T>) -> Self {
        let quad_weights = trapezoid_weights(&grid);
        let d1_sparse = d1.to_sparse();
        let d2_sparse = d2.to_sparse();
        Self { grid, backend, d1, d2, quad_weights, d1_sparse, d2_sparse }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn backend(&self) -> Backend<T> {
        self.backend
    }

    pub fn d1(&self) -> &Matrix<T> {
        &self.d1
    }

    pub fn d2(&self) -> &Matrix<T> {
        &self.d2
    }

    pub fn quad_weights(&self) -> &[T] {
        &self.quad_weights
    }

    pub fn first_derivative(&self, values: &[T]) -> Vec<T> {
        self.d1_sparse.mul_vec(values)
    }

    pub fn first_derivative_into(&self, values: &[T], out: &mut [T]) {
        self.d1_sparse.mul_vec_into(values, out)
    }

    pub fn second_derivative(&self, values: &[T]) -> Vec<T> {
        self.d2_sparse.mul_vec(values)
    }

    /// `Σ w_i v_i`.
    pub fn integrate(&self, values: &[T]) -> T {
        debug_assert_eq!(values.len(), self.quad_weights.len());
        values.iter().zip(&self.quad_weights).fold(T::zero(), |acc, (&v, &w)| acc + v * w)
    }
}

pub fn build_diff_ops<T: Scalar>(grid: &Grid<T>, backend: Backend<T>) -> Result<DiffOps<T>, DiscretizationError> {
    match backend {
        Backend::FiniteDifference => Ok(build_fd_diff_ops(grid)),
        Backend::Multiquadric { shape } => build_rbf_diff_ops(grid, shape),
    }
}

/// Second-order finite-difference operators.
pub fn build_fd_diff_ops<T: Scalar>(grid: &Grid<T>) -> DiffOps<T> {
    let n = grid.len();
    let last = n - 1;
    let h = grid.spacing();
    let h2 = h * h;
    let two_h = T::lit(2.0) * h;
    let mut d1 = Matrix::zeros(n, n);
    let mut d2 = Matrix::zeros(n, n);

    for i in 1..last {
        d1[(i, i - 1)] = -T::one() / two_h;
        d1[(i, i + 1)] = T::one() / two_h;
        d2[(i, i - 1)] = T::one() / h2;
        d2[(i, i)] = -T::lit(2.0) / h2;
        d2[(i, i + 1)] = T::one() / h2;
    }
    for (k, c) in [-3.0, 4.0, -1.0].into_iter().enumerate() {
        d1[(0, k)] = T::lit(c) / two_h;
        d1[(last, last - k)] = -T::lit(c) / two_h;
    }
    for (k, c) in [2.0, -5.0, 4.0, -1.0].into_iter().enumerate() {
        d2[(0, k)] = T::lit(c) / h2;
        d2[(last, last - k)] = T::lit(c) / h2;
    }
    DiffOps::assemble(grid.clone(), Backend::FiniteDifference, d1, d2)
}

/// Multiquadric collocation operators `d1 = B1·A⁻¹`, `d2 = B2·A⁻¹`, where `A`
/// is the kernel matrix augmented with `{1, x}` and `B1`, `B2` collocate the
/// kernel derivatives.
pub fn build_rbf_diff_ops<T: Scalar>(grid: &Grid<T>, shape: T) -> Result<DiffOps<T>, DiscretizationError> {
    if !(shape.is_finite() && shape > T::zero()) {
        return Err(DiscretizationError::InvalidShape(shape.to_f64().unwrap_or(f64::NAN)));
    }
    let x = grid.nodes();
    let n = x.len();
    let c2 = shape * shape;
    let kernel = |r: T| (r * r + c2).sqrt();

    // Saddle-point system [[A, P], [Pᵀ, 0]] with P = [1, x].
    let m = n + 2;
    let system = Matrix::from_fn(m, m, |i, j| match (i < n, j < n) {
        (true, true) => kernel(x[i] - x[j]),
        (true, false) => {
            if j == n {
                T::one()
            } else {
                x[i]
            }
        }
        (false, true) => {
            if i == n {
                T::one()
            } else {
                x[j]
            }
        }
        (false, false) => T::zero(),
    });
    let lu = LuFactors::factor(&system).map_err(DiscretizationError::SingularInterpolation)?;

    // The system is symmetric, so row i of B·M⁻¹ is M⁻¹ applied to row i of B.
    let mut d1 = Matrix::zeros(n, n);
    let mut d2 = Matrix::zeros(n, n);
    let mut rhs = vec![T::zero(); m];
    let mut sol = vec![T::zero(); m];
    for i in 0..n {
        for j in 0..n {
            let r = x[i] - x[j];
            rhs[j] = r / kernel(r);
        }
        rhs[n] = T::zero();
        rhs[n + 1] = T::one();
        lu.solve_into(&rhs, &mut sol);
        d1.row_mut(i).copy_from_slice(&sol[..n]);

        for j in 0..n {
            let a = kernel(x[i] - x[j]);
            rhs[j] = c2 / (a * a * a);
        }
        rhs[n] = T::zero();
        rhs[n + 1] = T::zero();
        lu.solve_into(&rhs, &mut sol);
        d2.row_mut(i).copy_from_slice(&sol[..n]);
    }
    Ok(DiffOps::assemble(grid.clone(), Backend::Multiquadric { shape }, d1, d2))
}

pub fn trapezoid_weights<T: Scalar>(grid: &Grid<T>) -> Vec<T> {
    let h = grid.spacing();
    let mut w = vec![h; grid.len()];
    let last = w.len() - 1;
    w[0] = h / T::lit(2.0);
    w[last] = h / T::lit(2.0);
    w
}

pub fn trapezoid<T: Scalar>(values: &[T], grid: &Grid<T>) -> Result<T, DiscretizationError> {
    if values.len() != grid.len() {
        return Err(DiscretizationError::LengthMismatch { expected: grid.len(), got: values.len() });
    }
    Ok(values.iter().zip(trapezoid_weights(grid)).fold(T::zero(), |acc, (&v, w)| acc + v * w))
}

/// Nodal values of the state on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState<T> {
    values: Vec<T>,
}

impl<T: Scalar> GridState<T> {
    pub fn new(values: Vec<T>, grid: &Grid<T>) -> Result<Self, DiscretizationError> {
        if values.len() != grid.len() {
            return Err(DiscretizationError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { values })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        Self { values: vec![T::zero(); grid.len()] }
    }

    pub fn from_fn(grid: &Grid<T>, f: impl Fn(T) -> T) -> Self {
        Self { values: grid.sample(f) }
    }

    pub(crate) fn from_raw(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `max |u_i|`; NaN entries propagate as NaN.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(
            T::zero(),
            |acc, &v| {
                if v.is_nan() || acc.is_nan() {
                    T::nan()
                } else {
                    acc.max(v.abs())
                }
            },
        )
    }

    /// `½ Σ w_i u_i²`.
    pub fn lyapunov(&self, ops: &DiffOps<T>) -> T {
        let sq: Vec<T> = self.values.iter().map(|&u| u * u).collect();
        ops.integrate(&sq) / T::lit(2.0)
    }
}

/// `V = ½∫u²`, the slope at the actuated node and `Φ = ∫(u R(u) − ε u_x²)`.
pub fn feedback_inputs<T: Scalar>(
    state: &GridState<T>,
    ops: &DiffOps<T>,
    reaction: impl Fn(T) -> T,
    epsilon: T,
    side: Side,
) -> Result<FeedbackInputs<T>, DiscretizationError> {
    let u = state.values();
    if u.len() != ops.grid().len() {
        return Err(DiscretizationError::LengthMismatch { expected: ops.grid().len(), got: u.len() });
    }
    if !state.is_finite() {
        return Err(DiscretizationError::NonFinite);
    }
    let ux = ops.first_derivative(u);
    let integrand: Vec<T> = u.iter().zip(&ux).map(|(&ui, &dx)| ui * reaction(ui) - epsilon * dx * dx).collect();
    let slope = match side {
        Side::Left => ux[0],
        Side::Right => ux[ux.len() - 1],
    };
    let inputs =
        FeedbackInputs { lyapunov: state.lyapunov(ops), boundary_slope: slope, phi: ops.integrate(&integrand) };
    if !(inputs.lyapunov.is_finite() && inputs.boundary_slope.is_finite() && inputs.phi.is_finite()) {
        return Err(DiscretizationError::NonFinite);
    }
    Ok(inputs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &[f64], b: &[f64], range: std::ops::Range<usize>) -> f64 {
        range.map(|i| (a[i] - b[i]).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn grid_examples() {
        let g = build_grid::<f64>(4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = build_grid::<f64>(500).unwrap();
        assert_eq!(g.len(), 501);
        assert!((g.spacing() - 0.002).abs() < 1e-18);
        assert_eq!(g.nodes()[500], 1.0);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(build_grid::<f64>(1), Err(DiscretizationError::TooFewIntervals(1)));
    }

    #[test]
    fn fd_second_derivative_exact_on_quadratics() {
        let g = build_grid::<f64>(10).unwrap();
        let ops = build_fd_diff_ops(&g);
        let f = g.sample(|x| x * x);
        let d2 = ops.second_derivative(&f);
        assert!(d2.iter().all(|&v| (v - 2.0).abs() <= 1e-8), "{d2:?}");
    }

    #[test]
    fn fd_second_derivative_of_sine() {
        let g = build_grid::<f64>(100).unwrap();
        let ops = build_fd_diff_ops(&g);
        let f = g.sample(|x| (PI * x).sin());
        let d2 = ops.second_derivative(&f);
        let err = d2.iter().zip(&f).map(|(a, b)| (a + PI * PI * b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-2, "{err}");
    }

    #[test]
    fn fd_first_derivative_endpoint_rows() {
        let g = build_grid::<f64>(10).unwrap();
        let ops = build_fd_diff_ops(&g);
        let d1 = ops.first_derivative(g.nodes());
        assert!((d1[0] - 1.0).abs() < 1e-13);
        assert!((d1[10] - 1.0).abs() < 1e-13);
        let ones = vec![1.0; g.len()];
        assert!(ops.first_derivative(&ones).iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn rbf_linear_derivative_on_small_grid() {
        let g = build_grid::<f64>(4).unwrap();
        let ops = build_rbf_diff_ops(&g, 1.0).unwrap();
        let d1 = ops.first_derivative(g.nodes());
        assert!(max_err(&d1, &[1.0; 5], 1..4) <= 1e-3, "{d1:?}");
    }

    #[test]
    fn rbf_invariants_on_constants_and_linears() {
        for shape in [1e-9, 1e-2, 0.05] {
            let g = build_grid::<f64>(40).unwrap();
            let ops = build_rbf_diff_ops(&g, shape).unwrap();
            let ones = vec![1.0; g.len()];
            let d1c = ops.first_derivative(&ones);
            let d1x = ops.first_derivative(g.nodes());
            for i in 0..g.len() {
                assert!(d1c[i].abs() <= 1e-6, "shape {shape} row {i}: {}", d1c[i]);
                assert!((d1x[i] - 1.0).abs() <= 1e-6, "shape {shape} row {i}: {}", d1x[i]);
            }
            let wsum: f64 = ops.quad_weights().iter().sum();
            assert!((wsum - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rbf_tiny_shape_first_derivative_is_central_difference() {
        let g = build_grid::<f64>(50).unwrap();
        let rbf = build_rbf_diff_ops(&g, 1e-9).unwrap();
        let fd = build_fd_diff_ops(&g);
        let f = g.sample(|x| (2.0 * PI * x).sin() + x * x * x);
        let a = rbf.first_derivative(&f);
        let b = fd.first_derivative(&f);
        assert!(max_err(&a, &b, 1..50) < 1e-6);
    }

    #[test]
    fn rbf_rejects_bad_shape() {
        let g = build_grid::<f64>(4).unwrap();
        assert!(matches!(build_rbf_diff_ops(&g, 0.0), Err(DiscretizationError::InvalidShape(_))));
        assert!(matches!(build_rbf_diff_ops(&g, f64::NAN), Err(DiscretizationError::InvalidShape(_))));
    }

    #[test]
    fn trapezoid_examples() {
        let g = build_grid::<f64>(10).unwrap();
        assert!((trapezoid(&[1.0; 11], &g).unwrap() - 1.0).abs() < 1e-15);
        assert!((trapezoid(g.nodes(), &g).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            trapezoid(&[1.0, 2.0], &g),
            Err(DiscretizationError::LengthMismatch { expected: 11, got: 2 })
        ));
    }

    #[test]
    fn trapezoid_initial_profile_energy() {
        // ½∫(300(1 − cos 10πx))² = ½·300²·∫(1 − 2cos + cos²) = ½·90000·3/2.
        let g = build_grid::<f64>(500).unwrap();
        let u = g.sample(|x| -300.0 * ((10.0 * PI * x).cos() - 1.0));
        let sq: Vec<f64> = u.iter().map(|v| v * v).collect();
        let v = trapezoid(&sq, &g).unwrap() / 2.0;
        assert!((v - 67500.0).abs() <= 1.0, "{v}");
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        let err = |n: usize| {
            let g = build_grid::<f64>(n).unwrap();
            (trapezoid(&g.sample(|x| (PI * x).sin()), &g).unwrap() - 2.0 / PI).abs()
        };
        for n in [8, 16, 32, 64] {
            let ratio = err(n) / err(2 * n);
            assert!((ratio - 4.0).abs() < 0.05, "n = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn feedback_inputs_examples() {
        let g = build_grid::<f64>(200).unwrap();
        let ops = build_fd_diff_ops(&g);
        let zero = GridState::zeros(&g);
        let inp = feedback_inputs(&zero, &ops, |_| 0.0, 1.0, Side::Left).unwrap();
        assert_eq!((inp.lyapunov, inp.boundary_slope, inp.phi), (0.0, 0.0, 0.0));

        let u = GridState::from_fn(&g, |x| x * (1.0 - x));
        let inp = feedback_inputs(&u, &ops, |_| 0.0, 1.0, Side::Left).unwrap();
        assert!((inp.lyapunov - 1.0 / 60.0).abs() <= 1e-4);
        assert!((inp.boundary_slope - 1.0).abs() <= 1e-2);
        assert!((inp.phi + 1.0 / 3.0).abs() <= 1e-2);
        let right = feedback_inputs(&u, &ops, |_| 0.0, 1.0, Side::Right).unwrap();
        assert!((right.boundary_slope + 1.0).abs() <= 1e-2);
    }

    #[test]
    fn feedback_inputs_rejects_bad_state() {
        let g = build_grid::<f64>(10).unwrap();
        let ops = build_fd_diff_ops(&g);
        let mut v = vec![0.0; 11];
        v[3] = f64::NAN;
        let s = GridState::new(v, &g).unwrap();
        assert_eq!(feedback_inputs(&s, &ops, |_| 0.0, 1.0, Side::Left), Err(DiscretizationError::NonFinite));
        assert!(GridState::new(vec![0.0; 3], &g).is_err());
    }

    #[test]
    fn max_abs_propagates_nan() {
        let g = build_grid::<f64>(4).unwrap();
        let s = GridState::new(vec![0.0, -3.0, 2.0, 1.0, 0.0], &g).unwrap();
        assert_eq!(s.max_abs(), 3.0);
        let s = GridState::new(vec![0.0, f64::NAN, 2.0, 1.0, 0.0], &g).unwrap();
        assert!(s.max_abs().is_nan());
    }
}
