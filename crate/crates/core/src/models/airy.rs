//! Airy function of the first kind and its derivative on the real line, plus
//! the zeros of `Ai` (the gravitational eigenenergies above a mirror).
//!
//! Three regimes:
//!
//! * `-7 <= x <= 2.5`: Maclaurin series of the two fundamental solutions.
//! * `x > 2.5`: `Ai(x) = sqrt(x/3) K_{1/3}(zeta) / pi` with `zeta = 2 x^{3/2} / 3`,
//!   where `K` comes from Steed's continued fraction (exponentially scaled).
//! * `x < -7`: Hankel-type asymptotic expansion with the `u_k`, `v_k` coefficients.
//!
//! Above `x ~ 105` the value underflows and is returned as 0.

use std::f64::consts::PI;

use super::ModelError;
use crate::numerics::bisect;

/// `Ai(0) = 3^{-2/3} / Gamma(2/3)`.
pub const AI_AT_ZERO: f64 = 0.355_028_053_887_817_24;
/// `Ai'(0) = -3^{-1/3} / Gamma(1/3)`.
pub const AI_PRIME_AT_ZERO: f64 = -0.258_819_403_792_806_8;

/// Upper end of the series regime on the positive axis.
pub const SERIES_UPPER: f64 = 2.5;
/// Lower end of the series regime on the negative axis.
pub const SERIES_LOWER: f64 = -7.0;
/// Most negative argument accepted; beyond it the oscillation phase loses precision.
pub const DOMAIN_LOWER: f64 = -1.0e4;

/// Largest number of zeros `airy_zeros` will produce.
pub const MAX_ZEROS: usize = 20_000;

pub fn airy_ai(x: f64) -> Result<f64, ModelError> {
    airy_pair(x).map(|p| p.0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64, ModelError> {
    airy_pair(x).map(|p| p.1)
}

/// `(Ai(x), Ai'(x))` evaluated together; every regime produces both for the cost of one.
pub fn airy_pair(x: f64) -> Result<(f64, f64), ModelError> {
    if x.is_nan() || x < DOMAIN_LOWER {
        return Err(ModelError::DomainOverflow { x });
    }
    Ok(if x < SERIES_LOWER {
        asymptotic_negative(-x)
    } else if x <= SERIES_UPPER {
        maclaurin(x)
    } else {
        via_bessel_k(x)
    })
}

pub(crate) fn maclaurin(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let x3 = x2 * x;
    let (mut f, mut fp, mut g, mut gp) = (1.0, 0.0, x, 1.0);
    let (mut a, mut b) = (1.0, x);
    for k in 1..300 {
        let k3 = 3.0 * k as f64;
        let da = a * x2 / (k3 - 1.0);
        let db = b * x2 / k3;
        a *= x3 / ((k3 - 1.0) * k3);
        b *= x3 / (k3 * (k3 + 1.0));
        f += a;
        fp += da;
        g += b;
        gp += db;
        let last = a.abs() + b.abs() + da.abs() + db.abs();
        if last <= 1e-18 * (f.abs() + g.abs() + fp.abs() + gp.abs()) {
            break;
        }
    }
    (
        AI_AT_ZERO * f + AI_PRIME_AT_ZERO * g,
        AI_AT_ZERO * fp + AI_PRIME_AT_ZERO * gp,
    )
}

/// `e^z K_mu(z)` and `e^z K_{mu+1}(z)` for `z >= 2`, `|mu| <= 1/2` (Steed's CF2).
fn scaled_bessel_k(mu: f64, z: f64) -> (f64, f64) {
    let a1 = 0.25 - mu * mu;
    let mut b = 2.0 * (1.0 + z);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let (mut q1, mut q2) = (0.0, 1.0);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k_mu = (PI / (2.0 * z)).sqrt() / s;
    let k_mu1 = k_mu * (mu + z + 0.5 - h) / z;
    (k_mu, k_mu1)
}

fn via_bessel_k(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let scale = (-zeta).exp();
    if scale == 0.0 {
        return (0.0, 0.0);
    }
    let (k13, k43) = scaled_bessel_k(1.0 / 3.0, zeta);
    // K_{-2/3} = K_{2/3}; recurrence K_{4/3} = K_{-2/3} + (2/(3 zeta)) K_{1/3}
    let k23 = k43 - 2.0 / (3.0 * zeta) * k13;
    let ai = (x / 3.0).sqrt() / PI * k13 * scale;
    let aip = -x / (PI * 3f64.sqrt()) * k23 * scale;
    (ai, aip)
}

/// `(Ai(-z), Ai'(-z))` for large positive `z`.
fn asymptotic_negative(z: f64) -> (f64, f64) {
    const TERMS: usize = 40;
    let zeta = 2.0 / 3.0 * z * z.sqrt();
    let inv = 1.0 / zeta;
    // u_k / zeta^k and v_k / zeta^k, accumulated until the terms stop shrinking
    let (mut p, mut q, mut r, mut s) = (1.0, 0.0, 1.0, 0.0);
    let mut u = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..TERMS {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf) * inv;
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        let size = u.abs().max(v.abs());
        if size >= prev || size < 1e-17 {
            break;
        }
        prev = size;
        // (-1)^{floor(k/2)} sign pattern of the paired sums
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * u;
            r += sign * v;
        } else {
            q += sign * u;
            s += sign * v;
        }
    }
    let theta = zeta - PI / 4.0;
    let (sin, cos) = theta.sin_cos();
    let root = z.sqrt().sqrt();
    let norm = 1.0 / PI.sqrt();
    let ai = norm / root * (cos * p + sin * q);
    let aip = norm * root * (sin * r - cos * s);
    (ai, aip)
}

/// Asymptotic estimate of the `n`-th zero magnitude (`n >= 1`).
fn zero_guess(n: usize) -> f64 {
    let t = 3.0 * PI * (4.0 * n as f64 - 1.0) / 8.0;
    let t2 = 1.0 / (t * t);
    t.powf(2.0 / 3.0) * (1.0 + t2 * (5.0 / 48.0 - t2 * (5.0 / 36.0 - t2 * 77125.0 / 82944.0)))
}

/// The first `k` zeros of `Ai`, returned as positive magnitudes `E_n` (so `Ai(-E_n) = 0`),
/// strictly increasing.
pub fn airy_zeros(k: usize) -> Result<Vec<f64>, ModelError> {
    if k == 0 || k > MAX_ZEROS {
        return Err(ModelError::InvalidParameter(format!(
            "zero count must be in 1..={MAX_ZEROS}, got {k}"
        )));
    }
    let mut zeros = Vec::with_capacity(k);
    for n in 1..=k {
        let guess = zero_guess(n);
        let half_width = if n == 1 { 0.2 } else { 0.05 };
        let root = bisect(
            |e| airy_ai(-e).unwrap_or(f64::NAN),
            guess - half_width,
            guess + half_width,
            1e-14 * guess,
        )
        .ok_or_else(|| ModelError::InvalidParameter(format!("no sign change bracketing zero {n}")))?;
        zeros.push(root);
    }
    Ok(zeros)
}

/// `∫ exp(-u²) Ai(2au + b) du` over the real line, in closed form:
/// `√π exp(a²b + 2a⁶/3) Ai(b + a⁴)`.
pub fn gaussian_airy_integral(a: f64, b: f64) -> Result<f64, ModelError> {
    let a2 = a * a;
    Ok(PI.sqrt() * (a2 * b + 2.0 / 3.0 * a2 * a2 * a2).exp() * airy_ai(b + a2 * a2)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        let (ai, aip) = airy_pair(0.0).unwrap();
        assert_eq!(ai, AI_AT_ZERO);
        assert_eq!(aip, AI_PRIME_AT_ZERO);
    }

    #[test]
    fn large_positive_decays_to_zero() {
        let v = airy_ai(10.0).unwrap();
        assert!(v > 0.0 && v < 1e-9);
        assert_eq!(airy_ai(200.0).unwrap(), 0.0);
    }

    #[test]
    fn rejects_far_negative() {
        assert!(matches!(airy_ai(-2e4), Err(ModelError::DomainOverflow { .. })));
        assert!(airy_ai(f64::NAN).is_err());
    }

    #[test]
    fn seams_are_continuous() {
        for &x in &[SERIES_UPPER, SERIES_LOWER] {
            let a = maclaurin(x);
            let b = if x > 0.0 { via_bessel_k(x) } else { asymptotic_negative(-x) };
            assert!((a.0 - b.0).abs() < 1e-11 * a.0.abs().max(0.1), "{x}: {a:?} vs {b:?}");
            assert!((a.1 - b.1).abs() < 1e-11 * a.1.abs().max(0.1), "{x}: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn gaussian_identity_by_quadrature() {
        for a in [0.1, 0.3] {
            for b in [-1.0, 0.0, 2.0] {
                let q = crate::numerics::quad::integrate(|u| (-u * u).exp() * airy_ai(2.0 * a * u + b).unwrap(), -9.0, 9.0, 1e-14, 1e-14);
                let c = gaussian_airy_integral(a, b).unwrap();
                assert!((q.value - c).abs() < 1e-8, "({a},{b}): {} vs {c}", q.value);
            }
        }
    }

    #[test]
    fn zeros_count_and_order() {
        assert!(airy_zeros(0).is_err());
        let z = airy_zeros(2).unwrap();
        assert!(z[1] > z[0]);
        assert!((z[0] - 2.338_107_410_459_767).abs() < 1e-10);
    }
}
