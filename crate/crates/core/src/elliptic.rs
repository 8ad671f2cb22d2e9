//! Jacobi `sn` for complex argument and complex modulus.
//!
//! The core evaluator is the descending Landen transformation: the modulus is
//! mapped through `kᵢ₊₁ = kᵢ² / (1 + √(1 − kᵢ²))²` until it is negligible,
//! where `sn = sin`, `cn = cos`, `dn = 1`, and the values are then carried
//! back up with the Gauss ascent
//!
//! ```text
//! sn(u|k) = (1 + κ) s / (1 + κ s²)
//! cn(u|k) = c d / (1 + κ s²)
//! dn(u|k) = (1 − κ s²) / (1 + κ s²)
//! ```
//!
//! with `κ = kᵢ₊₁`, `v = u / (1 + κ)` and `(s, c, d)` evaluated at `(v, κ)`.
//!
//! All three functions depend on the modulus only through `m = k²`, which is
//! what the routines below take internally. Moduli with `|m| > 1` go through
//! the reciprocal-modulus identity, and moduli near `m = 1` through Jacobi's
//! imaginary transformation, so the descent always starts from a modulus
//! well inside the unit disc and away from 1.
//!
//! Arguments are not reduced to a period parallelogram; accuracy degrades
//! slowly as `|z|` grows past a few periods.

use num_complex::Complex64;

type C = Complex64;

/// Landen descent stops once the modulus drops below this.
const DESCENT_STOP: f64 = 1e-15;
/// Distance from `m = 1` inside which the imaginary transformation is used.
const NEAR_ONE: f64 = 0.1;
const MAX_DESCENT: usize = 64;
/// Magnitude treated as having hit a pole.
const POLE_MAGNITUDE: f64 = 1e13;

/// Elliptic modulus `k` (only `k²` matters for `sn`, `cn`, `dn`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus {
    pub k: C,
}

impl EllipticModulus {
    pub fn new(k: C) -> Self {
        EllipticModulus { k }
    }

    /// The modulus whose square is `m` (principal root).
    pub fn from_parameter(m: C) -> Self {
        EllipticModulus { k: m.sqrt() }
    }

    pub fn parameter(&self) -> C {
        self.k * self.k
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error("argument {z} is at or next to a pole of sn (nearest pole ≈ {nearest_pole})")]
    Pole { z: C, nearest_pole: C },
    #[error("non-finite argument or modulus")]
    NonFinite,
}

/// The triple `(sn, cn, dn)` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: C,
    pub cn: C,
    pub dn: C,
}

fn finite(z: C) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn landen(u: C, m: C) -> Jacobi {
    let one = C::new(1.0, 0.0);
    let mut kappas = [C::new(0.0, 0.0); MAX_DESCENT];
    let mut depth = 0;
    let mut k2 = m;
    let mut v = u;
    while k2.norm().sqrt() >= DESCENT_STOP && depth < MAX_DESCENT {
        let kp = (one - k2).sqrt();
        let mut kappa = k2 / ((one + kp) * (one + kp));
        // continuity with the previous iterate: the descent must shrink
        if (one - kp).norm() > (one + kp).norm() {
            kappa = one / kappa;
        }
        kappas[depth] = kappa;
        depth += 1;
        v /= one + kappa;
        k2 = kappa * kappa;
    }
    let mut j = Jacobi {
        sn: v.sin(),
        cn: v.cos(),
        dn: one,
    };
    for &kappa in kappas[..depth].iter().rev() {
        let s2 = j.sn * j.sn;
        let den = one + kappa * s2;
        j = Jacobi {
            sn: (one + kappa) * j.sn / den,
            cn: j.cn * j.dn / den,
            dn: (one - kappa * s2) / den,
        };
    }
    j
}

fn near_one(u: C, m: C) -> Jacobi {
    // sn(u|m) = -i sn(iu|m₁)/cn(iu|m₁), cn = 1/cn(iu|m₁), dn = dn(iu|m₁)/cn(iu|m₁)
    let i = C::new(0.0, 1.0);
    let m1 = C::new(1.0, 0.0) - m;
    let t = landen(i * u, m1);
    Jacobi {
        sn: -i * t.sn / t.cn,
        cn: t.cn.inv(),
        dn: t.dn / t.cn,
    }
}

fn inside_unit_disc(u: C, m: C) -> Jacobi {
    if (C::new(1.0, 0.0) - m).norm() < NEAR_ONE {
        near_one(u, m)
    } else {
        landen(u, m)
    }
}

/// `(sn, cn, dn)` with parameter `m = k²`.
pub fn jacobi_m(z: C, m: C) -> Result<Jacobi, EllipticError> {
    if !finite(z) || !finite(m) {
        return Err(EllipticError::NonFinite);
    }
    let j = if m.norm() > 1.0 {
        // reciprocal modulus: sn(u|m) = sn(√m u | 1/m)/√m, cn ↔ dn
        let k = m.sqrt();
        let t = inside_unit_disc(k * z, m.inv());
        Jacobi {
            sn: t.sn / k,
            cn: t.dn,
            dn: t.cn,
        }
    } else {
        inside_unit_disc(z, m)
    };
    let ok = [j.sn, j.cn, j.dn]
        .iter()
        .all(|v| finite(*v) && v.norm() < POLE_MAGNITUDE);
    if !ok {
        // one Newton step on 1/sn from z when it is still representable
        let nearest_pole = {
            let step = j.sn / (j.cn * j.dn);
            if finite(step) && step.norm() < 1.0 {
                z + step
            } else {
                z
            }
        };
        return Err(EllipticError::Pole { z, nearest_pole });
    }
    Ok(j)
}

/// `(sn, cn, dn)` for modulus `k`.
pub fn jacobi(z: C, k: EllipticModulus) -> Result<Jacobi, EllipticError> {
    jacobi_m(z, k.parameter())
}

/// Jacobi's `sn(z, k)`.
pub fn sn(z: C, k: EllipticModulus) -> Result<C, EllipticError> {
    Ok(jacobi(z, k)?.sn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }
    fn k(re: f64, im: f64) -> EllipticModulus {
        EllipticModulus::new(c(re, im))
    }

    #[test]
    fn zero_modulus_is_sine() {
        assert!((sn(c(0.3, 0.0), k(0.0, 0.0)).unwrap() - c(0.3f64.sin(), 0.0)).norm() < 1e-15);
        let z = c(0.4, -1.1);
        assert!((sn(z, k(0.0, 0.0)).unwrap() - z.sin()).norm() < 1e-14);
    }

    #[test]
    fn unit_modulus_is_tanh() {
        assert!((sn(c(0.3, 0.0), k(1.0, 0.0)).unwrap() - c(0.3f64.tanh(), 0.0)).norm() < 1e-15);
        let z = c(-0.8, 0.6);
        assert!((sn(z, k(1.0, 0.0)).unwrap() - z.tanh()).norm() < 1e-14);
    }

    #[test]
    fn pythagorean_identities() {
        for &(z, kk) in &[
            (c(0.5, 0.2), c(0.5, 0.0)),
            (c(-1.3, 0.4), c(0.3, 0.8)),
            (c(0.7, -0.9), c(1.6, -0.4)),
            (c(0.2, 0.1), c(0.999, 0.02)),
            (c(0.6, 0.3), c(0.0, 2.5)),
        ] {
            let m = kk * kk;
            let j = jacobi_m(z, m).unwrap();
            let one = c(1.0, 0.0);
            assert!((j.sn * j.sn + j.cn * j.cn - one).norm() < 1e-12, "{z} {kk}");
            assert!(
                (m * j.sn * j.sn + j.dn * j.dn - one).norm() < 1e-12,
                "{z} {kk}"
            );
        }
    }

    #[test]
    fn odd_in_argument() {
        let kk = k(0.6, 0.3);
        let z = c(0.8, -0.35);
        let a = sn(z, kk).unwrap();
        let b = sn(-z, kk).unwrap();
        assert!((a + b).norm() < 1e-14);
    }

    #[test]
    fn pole_is_reported() {
        // sn(u, 0) = sin(u) has no poles, but sn(u, 1) = tanh(u) has one at iπ/2
        let z = c(0.0, std::f64::consts::FRAC_PI_2);
        match sn(z, k(1.0, 0.0)) {
            Err(EllipticError::Pole { nearest_pole, .. }) => {
                assert!((nearest_pole - z).norm() < 1e-6)
            }
            other => panic!("expected a pole, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert_eq!(
            sn(c(f64::NAN, 0.0), k(0.5, 0.0)),
            Err(EllipticError::NonFinite)
        );
    }
}
