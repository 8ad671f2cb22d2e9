//! Three reformulations of a solvable x-system.
//!
//! - An affine change of variables `x = u₀ + Uξ`. Example 1 also has explicit
//!   coefficient formulas ([`affine_example1_coefficients`]).
//! - The isochronizing shift `ẇₙ = (α/(p − 1))wₙ + fₙ(w)` for right-hand
//!   sides homogeneous of degree `p`. With `α = iω` every solution is periodic
//!   with a period that is an integer multiple of `2π/|ω|`.
//! - Real plane vectors `rₙ = (Re xₙ, Im xₙ)`.

use num_complex::Complex64;
use num_rational::Ratio;

use crate::complexpoly::{MultiPoly, PolyError};
use crate::generator::{GeneratorError, XSystem};
use crate::pipeline::{solve_algebraic, PipelineError, SolveRequest, SystemChoice, Trajectory};

type C = Complex64;

/// Determinants below this modulus are treated as singular.
pub const SINGULAR_DET: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VariantError {
    #[error("affine map is singular (|u| = {0:e})")]
    SingularMap(f64),
    #[error("p = 1 has no isochronizing shift")]
    UnitDegree,
    #[error("right-hand sides are not homogeneous of degree {0}")]
    NotHomogeneous(Ratio<i64>),
    #[error("vector form is defined for examples 1 to 4, got {0}")]
    UnknownExample(u8),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
}

/// `x₁ = u₁₀ + u₁₁ξ₁ + u₁₂ξ₂`, `x₂ = u₂₀ + u₂₁ξ₁ + u₂₂ξ₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub u10: C,
    pub u20: C,
    pub u11: C,
    pub u12: C,
    pub u21: C,
    pub u22: C,
}

impl AffineMap {
    pub fn new(u10: C, u20: C, u11: C, u12: C, u21: C, u22: C) -> Result<Self, VariantError> {
        let m = AffineMap {
            u10,
            u20,
            u11,
            u12,
            u21,
            u22,
        };
        let u = m.det();
        if u.norm() < SINGULAR_DET || !u.re.is_finite() || !u.im.is_finite() {
            return Err(VariantError::SingularMap(u.norm()));
        }
        Ok(m)
    }

    pub fn identity() -> Self {
        let (z, one) = (C::new(0.0, 0.0), C::new(1.0, 0.0));
        AffineMap {
            u10: z,
            u20: z,
            u11: one,
            u12: z,
            u21: z,
            u22: one,
        }
    }

    /// `u = u₁₁u₂₂ − u₁₂u₂₁`.
    pub fn det(&self) -> C {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    /// `ξ ↦ x`.
    pub fn forward(&self, xi1: C, xi2: C) -> (C, C) {
        (
            self.u10 + self.u11 * xi1 + self.u12 * xi2,
            self.u20 + self.u21 * xi1 + self.u22 * xi2,
        )
    }

    /// `x ↦ ξ`.
    pub fn inverse(&self, x1: C, x2: C) -> (C, C) {
        let u = self.det();
        let (d1, d2) = (x1 - self.u10, x2 - self.u20);
        (
            (self.u22 * d1 - self.u12 * d2) / u,
            (-self.u21 * d1 + self.u11 * d2) / u,
        )
    }
}

/// The x-system rewritten for `ξ` (its variables keep the names `x1`, `x2`
/// but stand for `ξ₁`, `ξ₂`).
pub fn affine_transform_system(xs: &XSystem, m: &AffineMap) -> Result<XSystem, VariantError> {
    let vars = ["x1", "x2"];
    let target: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let xi1 = MultiPoly::var(&vars, "x1")?;
    let xi2 = MultiPoly::var(&vars, "x2")?;
    let k = |c: C| MultiPoly::constant(&vars, c);
    let x1 = k(m.u10).add(&xi1.scale(m.u11))?.add(&xi2.scale(m.u12))?;
    let x2 = k(m.u20).add(&xi1.scale(m.u21))?.add(&xi2.scale(m.u22))?;
    let bind = [("x1", &x1), ("x2", &x2)];
    let p1 = xs.p1.substitute(&bind, &target)?;
    let p2 = xs.p2.substitute(&bind, &target)?;
    let inv_u = m.det().inv();
    let q1 = p1.scale(m.u22 * inv_u).sub(&p2.scale(m.u12 * inv_u))?;
    let q2 = p2.scale(m.u11 * inv_u).sub(&p1.scale(m.u21 * inv_u))?;
    Ok(XSystem::new(&q1, &q2)?)
}

/// Coefficients of `ξ̇ₙ = Aₙ + Bₙ₁ξ₁ + Bₙ₂ξ₂ + Cₙ₁ξ₁² + Cₙ₂ξ₂² + Cₙ₃ξ₁ξ₂`.
/// Index 0 is `ξ̇₁`, index 1 is `ξ̇₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticCoefficients {
    pub a: [C; 2],
    /// `b[n][m]` multiplies `ξ_{m+1}` in `ξ̇_{n+1}`.
    pub b: [[C; 2]; 2],
    /// `c[n] = [Cₙ₁, Cₙ₂, Cₙ₃]`.
    pub c: [[C; 3]; 2],
}

impl QuadraticCoefficients {
    /// Reads the coefficients off a quadratic system over `(x1, x2)`.
    pub fn from_system(xs: &XSystem) -> Self {
        let read = |p: &MultiPoly| {
            (
                p.coeff(&[0, 0]),
                [p.coeff(&[1, 0]), p.coeff(&[0, 1])],
                [p.coeff(&[2, 0]), p.coeff(&[0, 2]), p.coeff(&[1, 1])],
            )
        };
        let (a1, b1, c1) = read(&xs.p1);
        let (a2, b2, c2) = read(&xs.p2);
        QuadraticCoefficients {
            a: [a1, a2],
            b: [b1, b2],
            c: [c1, c2],
        }
    }

    pub fn max_abs_diff(&self, other: &QuadraticCoefficients) -> f64 {
        let mut d: f64 = 0.0;
        for n in 0..2 {
            d = d.max((self.a[n] - other.a[n]).norm());
            for m in 0..2 {
                d = d.max((self.b[n][m] - other.b[n][m]).norm());
            }
            for l in 0..3 {
                d = d.max((self.c[n][l] - other.c[n][l]).norm());
            }
        }
        d
    }
}

/// Closed-form coefficients of example 1 after the affine map.
///
/// The second row uses the inverse `ξ₂ = u⁻¹{−u₂₁(x₁ − u₁₀) + u₁₁(x₂ − u₂₀)}`;
/// with it, every formula shares the pattern of the first row with
/// `(u₂₂, −u₁₂)` replaced by `(−u₂₁, u₁₁)`.
pub fn affine_example1_coefficients(a: C, b: C, m: &AffineMap) -> QuadraticCoefficients {
    let u = m.det();
    let (u10, u20) = (m.u10, m.u20);
    let col = [(m.u11, m.u21), (m.u12, m.u22)];
    // (p, q) with ξ̇ₙ = u⁻¹(p·ẋ₁ + q·ẋ₂)
    let rows = [(m.u22, -m.u12), (-m.u21, m.u11)];
    let mut out = QuadraticCoefficients {
        a: [C::new(0.0, 0.0); 2],
        b: [[C::new(0.0, 0.0); 2]; 2],
        c: [[C::new(0.0, 0.0); 3]; 2],
    };
    for (n, &(p, q)) in rows.iter().enumerate() {
        // ẋ₁ = a + b(x₁² − 4x₁x₂ − x₂²), ẋ₂ = a + b(x₂² − 4x₁x₂ − x₁²), so
        // pẋ₁ + qẋ₂ = (p + q)(a − 4b x₁x₂) + b(p − q)(x₁² − x₂²)
        let (s, d) = (p + q, p - q);
        out.a[n] = (s * (a - 4.0 * b * u10 * u20) + b * d * (u10 * u10 - u20 * u20)) / u;
        for (k, &(v1, v2)) in col.iter().enumerate() {
            out.b[n][k] =
                2.0 * b * (-2.0 * s * (u10 * v2 + u20 * v1) + d * (u10 * v1 - u20 * v2)) / u;
            out.c[n][k] = b * (-4.0 * s * v1 * v2 + d * (v1 * v1 - v2 * v2)) / u;
        }
        let (v11, v21) = col[0];
        let (v12, v22) = col[1];
        out.c[n][2] =
            2.0 * b * (-2.0 * s * (v11 * v22 + v12 * v21) + d * (v11 * v12 - v21 * v22)) / u;
    }
    out
}

/// Solves the ξ-system of a built-in example by mapping to x, solving
/// algebraically and mapping back.
pub fn solve_affine(
    req: &SolveRequest,
    m: &AffineMap,
    xi1_0: C,
    xi2_0: C,
) -> Result<Trajectory, VariantError> {
    let (x1, x2) = m.forward(xi1_0, xi2_0);
    let r = SolveRequest {
        x1_0: x1,
        x2_0: x2,
        ..req.clone()
    };
    let mut traj = solve_algebraic(&r)?;
    for s in &mut traj.states {
        *s = m.inverse(s.0, s.1);
    }
    Ok(traj)
}

/// The isochronizing shift with rate `α` for degree-`p` right-hand sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsochronySetup {
    pub alpha: C,
    pub p: Ratio<i64>,
}

impl IsochronySetup {
    pub fn new(alpha: C, p: Ratio<i64>) -> Result<Self, VariantError> {
        if p == Ratio::from_integer(1) {
            return Err(VariantError::UnitDegree);
        }
        Ok(IsochronySetup { alpha, p })
    }

    /// `α/(p − 1)`.
    pub fn shift(&self) -> C {
        let q = self.p - 1;
        self.alpha * (*q.denom() as f64) / (*q.numer() as f64)
    }

    /// `ω` when `α = iω` is purely imaginary.
    pub fn omega(&self) -> Option<f64> {
        (self.alpha.re == 0.0 && self.alpha.im != 0.0).then_some(self.alpha.im)
    }

    /// `T = 2π/|ω|`.
    pub fn period(&self) -> Option<f64> {
        self.omega().map(|w| std::f64::consts::TAU / w.abs())
    }

    /// `τ(t) = (e^{αt} − 1)/α`.
    pub fn tau(&self, t: f64) -> C {
        if self.alpha.norm() == 0.0 {
            C::new(t, 0.0)
        } else {
            ((self.alpha * t).exp() - 1.0) / self.alpha
        }
    }

    /// `wₙ(t) = e^{αt/(p−1)} xₙ(τ(t))`, given `xₙ(τ(t))`.
    pub fn transport(&self, t: f64, x_at_tau: (C, C)) -> (C, C) {
        let f = (self.shift() * t).exp();
        (f * x_at_tau.0, f * x_at_tau.1)
    }
}

/// True when every monomial of both right-hand sides has total degree `p`.
pub fn homogeneity_check(xs: &XSystem, p: Ratio<i64>) -> bool {
    if !p.is_integer() || *p.numer() < 0 {
        return xs.p1.is_zero() && xs.p2.is_zero();
    }
    let deg = *p.numer() as u32;
    [&xs.p1, &xs.p2]
        .iter()
        .all(|poly| poly.terms().all(|(m, _)| m.degree() == deg))
}

/// `ẇₙ = (α/(p − 1))wₙ + fₙ(w)`.
pub fn isochronize(xs: &XSystem, setup: &IsochronySetup) -> Result<XSystem, VariantError> {
    if setup.p == Ratio::from_integer(1) {
        return Err(VariantError::UnitDegree);
    }
    if !homogeneity_check(xs, setup.p) {
        return Err(VariantError::NotHomogeneous(setup.p));
    }
    let vars = ["x1", "x2"];
    let shift = setup.shift();
    let w1 = MultiPoly::var(&vars, "x1")?.scale(shift);
    let w2 = MultiPoly::var(&vars, "x2")?.scale(shift);
    Ok(XSystem::new(&xs.p1.add(&w1)?, &xs.p2.add(&w2)?)?)
}

/// Real plane vector.
pub type Vec2 = [f64; 2];

fn dot(u: Vec2, v: Vec2) -> f64 {
    u[0] * v[0] + u[1] * v[1]
}

/// Zeros and parameters as real plane vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorState {
    pub r1: Vec2,
    pub r2: Vec2,
    /// `(Re a, Im a)`.
    pub a_vec: Vec2,
    /// `(Re b, −Im b)`.
    pub b_vec: Vec2,
}

pub fn to_vector_form(x1: C, x2: C, a: C, b: C) -> VectorState {
    VectorState {
        r1: [x1.re, x1.im],
        r2: [x2.re, x2.im],
        a_vec: [a.re, a.im],
        b_vec: [b.re, -b.im],
    }
}

/// Inverse of [`to_vector_form`]: `(x₁, x₂, a, b)`.
pub fn from_vector_form(v: &VectorState) -> (C, C, C, C) {
    (
        C::new(v.r1[0], v.r1[1]),
        C::new(v.r2[0], v.r2[1]),
        C::new(v.a_vec[0], v.a_vec[1]),
        C::new(v.b_vec[0], -v.b_vec[1]),
    )
}

/// Example 1 in covariant vector form:
/// `ṙₙ = a⃗ + 2rₙ[b⃗·(rₙ − 2rₙ₊₁)] − 2rₙ₊₁[b⃗·(rₙ₊₁ + 2rₙ)] + b⃗[rₙ₊₁² − rₙ² + 4rₙ·rₙ₊₁]`.
pub fn example1_vector_rhs(v: &VectorState) -> (Vec2, Vec2) {
    let one = |rn: Vec2, rm: Vec2| -> Vec2 {
        let s1 = 2.0 * dot(v.b_vec, [rn[0] - 2.0 * rm[0], rn[1] - 2.0 * rm[1]]);
        let s2 = -2.0 * dot(v.b_vec, [rm[0] + 2.0 * rn[0], rm[1] + 2.0 * rn[1]]);
        let s3 = dot(rm, rm) - dot(rn, rn) + 4.0 * dot(rn, rm);
        [
            v.a_vec[0] + s1 * rn[0] + s2 * rm[0] + s3 * v.b_vec[0],
            v.a_vec[1] + s1 * rn[1] + s2 * rm[1] + s3 * v.b_vec[1],
        ]
    };
    (one(v.r1, v.r2), one(v.r2, v.r1))
}

/// Vector-form velocity of example `n` by real/imaginary decomposition.
///
/// For examples 3 and 4 the vector `b⃗` stands for `b³` and `b²` of the
/// complex system, so the parameter fed to the complex right-hand side is
/// the corresponding power of `b`.
pub fn example_vector_rhs(n: u8, v: &VectorState) -> Result<(Vec2, Vec2), VariantError> {
    let (x1, x2, a, b) = from_vector_form(v);
    let b_eff = match n {
        1 | 2 => b,
        3 => b * b * b,
        4 => b * b,
        _ => return Err(VariantError::UnknownExample(n)),
    };
    let (_, xs) = crate::generator::builtin_example(n, a, b_eff);
    let (d1, d2) = xs.eval(x1, x2);
    Ok(([d1.re, d1.im], [d2.re, d2.im]))
}

/// The request for a built-in example, used by [`solve_affine`].
pub fn example_request(n: u8, a: C, b: C, t_max: f64, grid: usize) -> SolveRequest {
    SolveRequest {
        system: SystemChoice::Example(n),
        a,
        b,
        x1_0: C::new(0.0, 0.0),
        x2_0: C::new(0.0, 0.0),
        t_max,
        grid,
    }
}
