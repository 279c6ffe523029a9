//! Model problems `(D u_x)_x + r u = f` on (0, 1) and the built-in catalog.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FemError, Result};

/// Scalar values are carried as complex numbers; real problems keep a zero
/// imaginary part and are assembled without the real/imaginary split.
pub type Scalar = Complex64;

pub type Coefficient = Arc<dyn Fn(f64) -> Scalar + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Real,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variable {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "ux")]
    Ux,
    #[serde(rename = "uxx")]
    Uxx,
}

impl Variable {
    pub const ALL: [Variable; 3] = [Variable::U, Variable::Ux, Variable::Uxx];

    pub fn name(self) -> &'static str {
        match self {
            Variable::U => "u",
            Variable::Ux => "ux",
            Variable::Uxx => "uxx",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "u" => Ok(Variable::U),
            "ux" | "u_x" | "v" => Ok(Variable::Ux),
            "uxx" | "u_xx" | "vx" => Ok(Variable::Uxx),
            other => Err(FemError::arg(format!(
                "unknown variable '{other}' (expected u, ux or uxx)"
            ))),
        }
    }

    pub fn derivative_order(self) -> usize {
        match self {
            Variable::U => 0,
            Variable::Ux => 1,
            Variable::Uxx => 2,
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn coordinate(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }

    /// Outward normal.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryKind {
    /// u = g
    Dirichlet,
    /// u_x = h
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCondition {
    pub side: Side,
    pub kind: BoundaryKind,
    pub value: Scalar,
}

impl BoundaryCondition {
    pub fn dirichlet(side: Side, value: impl Into<Scalar>) -> Self {
        BoundaryCondition {
            side,
            kind: BoundaryKind::Dirichlet,
            value: value.into(),
        }
    }

    pub fn neumann(side: Side, value: impl Into<Scalar>) -> Self {
        BoundaryCondition {
            side,
            kind: BoundaryKind::Neumann,
            value: value.into(),
        }
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub u: Coefficient,
    pub ux: Coefficient,
    pub uxx: Coefficient,
}

impl ExactSolution {
    pub fn get(&self, var: Variable) -> &Coefficient {
        match var {
            Variable::U => &self.u,
            Variable::Ux => &self.ux,
            Variable::Uxx => &self.uxx,
        }
    }
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub kind: ScalarKind,
    pub d: Coefficient,
    /// Analytic derivative of `d`, needed by the mixed formulation.
    pub dx: Coefficient,
    pub r: Coefficient,
    pub f: Coefficient,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
    pub exact: Option<ExactSolution>,
    /// D = 1 and r = 0 identically; the mixed system is then a symmetric
    /// saddle-point system with a zero (2,2) block.
    pub unit_diffusion: bool,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("bc_left", &self.bc_left)
            .field("bc_right", &self.bc_right)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn bc(&self, side: Side) -> &BoundaryCondition {
        match side {
            Side::Left => &self.bc_left,
            Side::Right => &self.bc_right,
        }
    }

    pub fn is_complex(&self) -> bool {
        self.kind == ScalarKind::Complex
    }

    /// Replaces the condition on one side; the exact solution is kept, so the
    /// caller must supply data consistent with it.
    pub fn with_bc(mut self, bc: BoundaryCondition, label: impl Into<String>) -> Self {
        match bc.side {
            Side::Left => self.bc_left = bc,
            Side::Right => self.bc_right = bc,
        }
        self.label = label.into();
        self
    }

    /// Checks the exact solution against the ODE and the boundary data.
    pub fn check_consistency(&self) -> Result<()> {
        let Some(ex) = &self.exact else {
            return Ok(());
        };
        // golden-ratio sequence: deterministic, well spread
        let golden = 0.618_033_988_749_894_9;
        for k in 1..=20 {
            let x = (k as f64 * golden).fract();
            let terms = [
                (self.dx)(x) * (ex.ux)(x),
                (self.d)(x) * (ex.uxx)(x),
                (self.r)(x) * (ex.u)(x),
            ];
            let f = (self.f)(x);
            let residual = terms.iter().sum::<Scalar>() - f;
            let scale = terms.iter().map(|t| t.norm()).sum::<f64>() + f.norm();
            if residual.norm() > 1e-8 * scale {
                return Err(FemError::arg(format!(
                    "{}: exact solution violates the ODE at x = {x} (residual {:e})",
                    self.label,
                    residual.norm()
                )));
            }
        }
        for bc in [&self.bc_left, &self.bc_right] {
            let x = bc.side.coordinate();
            let got = match bc.kind {
                BoundaryKind::Dirichlet => (ex.u)(x),
                BoundaryKind::Neumann => (ex.ux)(x),
            };
            let tol = 1e-12 * bc.value.norm().max(1.0);
            if (got - bc.value).norm() > tol {
                return Err(FemError::arg(format!(
                    "{}: exact solution violates the boundary condition at x = {x}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

pub fn eval_exact(spec: &ProblemSpec, var: Variable, x: f64) -> Result<Scalar> {
    let ex = spec
        .exact
        .as_ref()
        .ok_or_else(|| FemError::ExactUnavailable(spec.label.clone()))?;
    Ok((ex.get(var))(x))
}

pub const CATALOG: &[&str] = &[
    "bench-poisson",
    "bench-poisson-dn",
    "bench-diffusion",
    "bench-helmholtz",
    "case1",
    "case2",
    "case3",
    "case4",
    "case5",
    "validation-helmholtz",
];

/// One-line description of a catalog entry.
pub fn describe(name: &str) -> Option<&'static str> {
    Some(match name {
        "bench-poisson" => "u'' = f, u = exp(-(x-1/2)^2), Dirichlet/Dirichlet",
        "bench-poisson-dn" => "bench-poisson with u_x(1) = -exp(-1/4) on the right",
        "bench-diffusion" => "((1+x) u_x)_x = f, u = sin(2 pi x), Dirichlet/Neumann",
        "bench-helmholtz" => "complex diffusion-reaction, Dirichlet/Neumann, closed-form u",
        "case1" => "u = sin(2 pi c x)/(2 pi c)^2 (needs --coef)",
        "case2" => "u = exp(-c (x-1/2)^2) (needs --coef)",
        "case3" => "u = sin(2 pi c x)/(2 pi c)^2 - x^2/2 (needs --coef)",
        "case4" => "u = sin(2 pi c x)/(2 pi c) (needs --coef)",
        "case5" => "u = x/c, linear (needs --coef)",
        "validation-helmholtz" => "complex Helmholtz-type problem without exact solution",
        _ => return None,
    })
}

fn real(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Coefficient {
    Arc::new(move |x| Complex64::new(f(x), 0.0))
}

fn constant(c: Scalar) -> Coefficient {
    Arc::new(move |_| c)
}

fn exact_real(
    u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ux: impl Fn(f64) -> f64 + Send + Sync + 'static,
    uxx: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Option<ExactSolution> {
    Some(ExactSolution {
        u: real(u),
        ux: real(ux),
        uxx: real(uxx),
    })
}

fn poisson(
    label: String,
    f: Coefficient,
    left: f64,
    right: f64,
    exact: Option<ExactSolution>,
) -> ProblemSpec {
    ProblemSpec {
        label,
        kind: ScalarKind::Real,
        d: constant(1.0.into()),
        dx: constant(0.0.into()),
        r: constant(0.0.into()),
        f,
        bc_left: BoundaryCondition::dirichlet(Side::Left, left),
        bc_right: BoundaryCondition::dirichlet(Side::Right, right),
        exact,
        unit_diffusion: true,
    }
}

/// Looks up a catalog problem. `case1`..`case5` need the coefficient `c_i`.
pub fn catalog(name: &str, coefficient: Option<f64>) -> Result<ProblemSpec> {
    let need_c = || coefficient.ok_or_else(|| FemError::MissingCoefficient(name.to_string()));
    let spec = match name {
        "bench-poisson" | "bench-poisson-dn" => {
            let g = (-0.25f64).exp();
            let e = |x: f64| (-(x - 0.5) * (x - 0.5)).exp();
            let spec = poisson(
                "bench-poisson".into(),
                real(move |x| e(x) * (4.0 * x * x - 4.0 * x - 1.0)),
                g,
                g,
                exact_real(
                    e,
                    move |x| -2.0 * (x - 0.5) * e(x),
                    move |x| (4.0 * (x - 0.5) * (x - 0.5) - 2.0) * e(x),
                ),
            );
            if name == "bench-poisson-dn" {
                spec.with_bc(BoundaryCondition::neumann(Side::Right, -g), name)
            } else {
                spec
            }
        }
        "bench-diffusion" => ProblemSpec {
            label: name.into(),
            kind: ScalarKind::Real,
            d: real(|x| 1.0 + x),
            dx: constant(1.0.into()),
            r: constant(0.0.into()),
            f: real(|x| {
                2.0 * PI * (2.0 * PI * x).cos() - 4.0 * PI * PI * (2.0 * PI * x).sin() * (x + 1.0)
            }),
            bc_left: BoundaryCondition::dirichlet(Side::Left, 0.0),
            bc_right: BoundaryCondition::neumann(Side::Right, 2.0 * PI),
            exact: exact_real(
                |x| (2.0 * PI * x).sin(),
                |x| 2.0 * PI * (2.0 * PI * x).cos(),
                |x| -4.0 * PI * PI * (2.0 * PI * x).sin(),
            ),
            unit_diffusion: false,
        },
        "bench-helmholtz" => {
            let i = Complex64::i();
            let one = Complex64::new(1.0, 0.0);
            let a = one / ((one - i) * (one + 2.0 * i).exp() + one);
            let b = one - a;
            ProblemSpec {
                label: name.into(),
                kind: ScalarKind::Complex,
                d: Arc::new(move |x| (one + i) * (-x).exp()),
                dx: Arc::new(move |x| -(one + i) * (-x).exp()),
                r: real(|x| 2.0 * (-x).exp()),
                f: constant(0.0.into()),
                bc_left: BoundaryCondition::dirichlet(Side::Left, 1.0),
                bc_right: BoundaryCondition::neumann(Side::Right, 0.0),
                exact: Some(ExactSolution {
                    u: Arc::new(move |x| a * ((one + i) * x).exp() + b * (-i * x).exp()),
                    ux: Arc::new(move |x| {
                        a * (one + i) * ((one + i) * x).exp() - i * b * (-i * x).exp()
                    }),
                    uxx: Arc::new(move |x| {
                        2.0 * i * a * ((one + i) * x).exp() - b * (-i * x).exp()
                    }),
                }),
                unit_diffusion: false,
            }
        }
        // The cases are usually quoted for -u'' = f; f below carries the
        // opposite sign so every entry solves (D u_x)_x + r u = f with D = 1.
        "case1" => {
            let c = need_c()?;
            let k = 2.0 * PI * c;
            poisson(
                format!("case1(c={c})"),
                real(move |x| -(k * x).sin()),
                0.0,
                k.powi(-2) * k.sin(),
                exact_real(
                    move |x| k.powi(-2) * (k * x).sin(),
                    move |x| (k * x).cos() / k,
                    move |x| -(k * x).sin(),
                ),
            )
        }
        "case2" => {
            let c = need_c()?;
            let e = move |x: f64| (-c * (x - 0.5) * (x - 0.5)).exp();
            let g = (-c / 4.0).exp();
            poisson(
                format!("case2(c={c})"),
                real(move |x| e(x) * (4.0 * c * c * (x - 0.5) * (x - 0.5) - 2.0 * c)),
                g,
                g,
                exact_real(
                    e,
                    move |x| -2.0 * c * (x - 0.5) * e(x),
                    move |x| (4.0 * c * c * (x - 0.5) * (x - 0.5) - 2.0 * c) * e(x),
                ),
            )
        }
        "case3" => {
            let c = need_c()?;
            let k = 2.0 * PI * c;
            poisson(
                format!("case3(c={c})"),
                real(move |x| -((k * x).sin() + 1.0)),
                0.0,
                k.powi(-2) * k.sin() - 0.5,
                exact_real(
                    move |x| k.powi(-2) * (k * x).sin() - 0.5 * x * x,
                    move |x| (k * x).cos() / k - x,
                    move |x| -(k * x).sin() - 1.0,
                ),
            )
        }
        "case4" => {
            let c = need_c()?;
            let k = 2.0 * PI * c;
            poisson(
                format!("case4(c={c})"),
                real(move |x| -k * (k * x).sin()),
                0.0,
                k.sin() / k,
                exact_real(
                    move |x| (k * x).sin() / k,
                    move |x| (k * x).cos(),
                    move |x| -k * (k * x).sin(),
                ),
            )
        }
        "case5" => {
            let c = need_c()?;
            poisson(
                format!("case5(c={c})"),
                constant(0.0.into()),
                0.0,
                1.0 / c,
                exact_real(move |x| x / c, move |_| 1.0 / c, |_| 0.0),
            )
        }
        "validation-helmholtz" => ProblemSpec {
            label: name.into(),
            kind: ScalarKind::Complex,
            d: real(|x| (0.01 + x) * (1.01 - x)),
            dx: real(|x| 1.0 - 2.0 * x),
            r: constant(Complex64::new(0.0, -0.01)),
            f: constant(1.0.into()),
            bc_left: BoundaryCondition::dirichlet(Side::Left, 0.0),
            bc_right: BoundaryCondition::neumann(Side::Right, 0.0),
            exact: None,
            unit_diffusion: false,
        },
        _ => {
            return Err(FemError::UnknownProblem {
                name: name.to_string(),
                available: CATALOG.join(", "),
            })
        }
    };
    if let Some(c) = coefficient {
        if name.starts_with("case") && !(c.is_finite() && c != 0.0) {
            return Err(FemError::arg(format!(
                "coefficient for {name} must be finite and nonzero"
            )));
        }
    }
    spec.check_consistency()?;
    Ok(spec)
}
