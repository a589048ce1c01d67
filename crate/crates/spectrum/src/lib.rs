//! The exponent function `f(lambda)` and its relay variant.
//!
//! `g(lambda, phi) = ln((1-phi)/(lambda+phi)) / ln((1-phi)/phi)` is maximized
//! over `phi in (0, (1-lambda)/2]`. The maximizer is located by a dense grid
//! scan (no unimodality assumed), refined by golden-section search and then
//! polished by bisection on the stationarity condition
//! `(1+lambda) phi (D + k) = (lambda+phi) N`, where `N` and `D` are the
//! numerator and denominator logs and `k` is the relay offset.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("lambda {0} outside the supported range (1e-6, 1-1e-6)")]
    LambdaDomain(f64),
    #[error("phi {phi} outside (0, {max}] for lambda {lambda}")]
    PhiDomain { lambda: f64, phi: f64, max: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("no convergence for lambda {lambda}: bracket [{lo}, {hi}] after {iters} iterations")]
    NoConvergence { lambda: f64, lo: f64, hi: f64, iters: usize },
}

/// One row of the spectrum table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub lambda: f64,
    pub f: f64,
    pub phi_star: f64,
    pub mu: f64,
    pub f_hat: f64,
    pub phi_hat_star: f64,
    /// Stationarity residual at `phi_star`; `None` when the maximum sits on
    /// the boundary.
    pub residual: Option<f64>,
    pub residual_hat: Option<f64>,
}

pub const DEFAULT_TOL: f64 = 1e-10;
const GRID: usize = 1024;
const MAX_ITERS: usize = 500;

/// Upper end of the admissible output-rate interval.
pub fn phi_max(lambda: f64) -> f64 {
    (1.0 - lambda) / 2.0
}

fn check_phi(lambda: f64, phi: f64) -> Result<(), SpectrumError> {
    let max = phi_max(lambda);
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(SpectrumError::LambdaDomain(lambda));
    }
    if !(phi > 0.0 && phi <= max) {
        return Err(SpectrumError::PhiDomain { lambda, phi, max });
    }
    Ok(())
}

fn num_log(lambda: f64, phi: f64) -> f64 {
    ((1.0 - phi) / (lambda + phi)).ln()
}

fn den_log(phi: f64) -> f64 {
    ((1.0 - phi) / phi).ln()
}

/// Denominator offset of the relay variant.
pub fn relay_offset(lambda: f64) -> f64 {
    ((1.0 + lambda) / (1.0 - lambda)).ln()
}

fn ratio(lambda: f64, phi: f64, k: f64) -> f64 {
    num_log(lambda, phi) / (den_log(phi) + k)
}

/// The objective `g(lambda, phi)`.
pub fn g(lambda: f64, phi: f64) -> Result<f64, SpectrumError> {
    check_phi(lambda, phi)?;
    Ok(ratio(lambda, phi, 0.0))
}

/// The relay objective with denominator `ln(((1-phi)/phi) * ((1+lambda)/(1-lambda)))`.
pub fn g_hat(lambda: f64, phi: f64) -> Result<f64, SpectrumError> {
    check_phi(lambda, phi)?;
    Ok(ratio(lambda, phi, relay_offset(lambda)))
}

/// `(1+lambda) phi (D + k) - (lambda+phi) N`; negative where the objective
/// is increasing.
fn stationarity(lambda: f64, phi: f64, k: f64) -> f64 {
    (1.0 + lambda) * phi * (den_log(phi) + k) - (lambda + phi) * num_log(lambda, phi)
}

/// Residual of the stationarity identity for the plain objective.
pub fn stationarity_residual(lambda: f64, phi: f64) -> f64 {
    stationarity(lambda, phi, 0.0).abs()
}

struct Max {
    phi: f64,
    value: f64,
    residual: Option<f64>,
}

fn maximize(lambda: f64, k: f64, tol: f64) -> Result<Max, SpectrumError> {
    let hi = phi_max(lambda);
    let at = |i: usize| hi * i as f64 / GRID as f64;
    let obj = |phi: f64| ratio(lambda, phi, k);
    let best = (1..=GRID)
        .max_by(|&a, &b| obj(at(a)).total_cmp(&obj(at(b))))
        .unwrap();
    if best == GRID {
        return Ok(Max { phi: hi, value: obj(hi), residual: None });
    }
    let (mut a, mut b) = (at(best - 1).max(hi * 1e-12), at(best + 1));

    // Golden-section on the objective.
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut fc, mut fd) = (obj(c), obj(d));
    let mut iters = 0;
    while b - a > tol.max(1e-7 * hi) {
        iters += 1;
        if iters > MAX_ITERS {
            return Err(SpectrumError::NoConvergence { lambda, lo: a, hi: b, iters });
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv * (b - a);
            fd = obj(d);
        }
    }

    // Widen to a sign change of the stationarity function and bisect; the
    // objective is too flat at the peak to resolve phi below ~1e-8 directly.
    let h = |phi: f64| stationarity(lambda, phi, k);
    let (mut lo, mut up) = (a, b);
    let mut step = (b - a).max(hi * 1e-9);
    while h(lo) > 0.0 && lo > step {
        lo -= step;
        step *= 2.0;
    }
    let mut step = (b - a).max(hi * 1e-9);
    while h(up) < 0.0 && up + step < hi {
        up += step;
        step *= 2.0;
    }
    if !(h(lo) <= 0.0 && h(up) >= 0.0) {
        let phi = (a + b) / 2.0;
        return Ok(Max { phi, value: obj(phi), residual: Some(h(phi).abs()) });
    }
    let mut iters = 0;
    while up - lo > tol.min(1e-14) && iters < MAX_ITERS {
        iters += 1;
        let mid = 0.5 * (lo + up);
        if mid <= lo || mid >= up {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            up = mid;
        }
    }
    if up - lo > tol {
        return Err(SpectrumError::NoConvergence { lambda, lo, hi: up, iters });
    }
    let phi = 0.5 * (lo + up);
    Ok(Max { phi, value: obj(phi), residual: Some(h(phi).abs()) })
}

/// Computes `f`, `phi*`, `mu` and the relay pair `f_hat`, `phi_hat*`.
pub fn solve_spectrum(lambda: f64, tol: f64) -> Result<SpectrumPoint, SpectrumError> {
    if !(lambda > 1e-6 && lambda < 1.0 - 1e-6) {
        return Err(SpectrumError::LambdaDomain(lambda));
    }
    if !(tol > 0.0) {
        return Err(SpectrumError::BadTolerance(tol));
    }
    let plain = maximize(lambda, 0.0, tol)?;
    let relay = maximize(lambda, relay_offset(lambda), tol)?;
    Ok(SpectrumPoint {
        lambda,
        f: plain.value,
        phi_star: plain.phi,
        mu: (lambda + plain.phi) / (1.0 - plain.phi),
        f_hat: relay.value,
        phi_hat_star: relay.phi,
        residual: plain.residual,
        residual_hat: relay.residual,
    })
}

/// Solves every `lambda` in order.
pub fn emit_table(lambdas: &[f64], tol: f64) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    lambdas.iter().map(|&l| solve_spectrum(l, tol)).collect()
}

pub const CSV_HEADER: &str = "lambda,f,phi_star,mu,f_hat,phi_hat_star";

/// Renders rows as CSV with `precision` decimals.
pub fn to_csv(rows: &[SpectrumPoint], precision: usize) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let p = precision;
        writeln!(
            out,
            "{:.p$},{:.p$},{:.p$},{:.p$},{:.p$},{:.p$}",
            r.lambda, r.f, r.phi_star, r.mu, r.f_hat, r.phi_hat_star
        )
        .unwrap();
    }
    out
}

/// Evenly spaced grid `start, start+step, ...` not exceeding `end`.
pub fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    (0..count).map(|i| start + step * i as f64).collect()
}
