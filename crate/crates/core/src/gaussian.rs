//! Gaussian mass computations over lattices: rho sums, the periodic Gaussian
//! f_s, the smoothing parameter, and the tail-cut rule that makes truncated
//! enumeration honest.

use crate::enumerate::FloatEnum;
use crate::error::Error;
use crate::lattice::{reduce_mod_parallelepiped, Basis, FloatLattice, Target};
use crate::stats::Kahan;
use std::f64::consts::PI;

/// Gaussian width parameter s in rho_s(x) = exp(-pi ||x||^2 / s^2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParam(f64);

impl GaussianParam {
    pub fn new(s: f64) -> Result<Self, Error> {
        if s > 0.0 && s.is_finite() {
            Ok(GaussianParam(s))
        } else {
            Err(Error::InvalidParameter(format!(
                "gaussian width must be positive and finite, got {s}"
            )))
        }
    }

    pub fn get(&self) -> f64 {
        self.0
    }
}

pub fn rho(s: f64, x: &[f64]) -> f64 {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    (-PI * n2 / (s * s)).exp()
}

pub fn rho_scalar_sq(s: f64, norm_sq: f64) -> f64 {
    (-PI * norm_sq / (s * s)).exp()
}

/// Tail-cut rule. The radius R = s (x + sqrt(n / 2 pi)) keeps the discarded
/// mass below exp(-pi x^2) times the full lattice mass; the evaluation loop
/// grows x until the a-posteriori bound meets `rel_error_target`.
#[derive(Clone, Copy, Debug)]
pub struct TruncationPolicy {
    pub rel_error_target: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            rel_error_target: (2.0f64).powi(-40),
        }
    }
}

impl TruncationPolicy {
    pub fn with_target(rel_error_target: f64) -> Self {
        TruncationPolicy { rel_error_target }
    }

    /// Initial tail exponent: exp(-pi x0^2) = target / 2.
    pub fn initial_tail_x(&self) -> f64 {
        ((2.0 / self.rel_error_target).ln() / PI).sqrt()
    }

    pub fn radius(&self, n: usize, s: f64, tail_x: f64) -> f64 {
        s * (tail_x + (n as f64 / (2.0 * PI)).sqrt())
    }
}

/// A truncated Gaussian mass with its documented relative-error bound.
#[derive(Clone, Copy, Debug)]
pub struct MassEstimate {
    pub value: f64,
    pub rel_error_bound: f64,
    pub radius: f64,
    pub points: usize,
}

/// rho_s(L - t) by truncated enumeration. The shift is reduced mod P(B)
/// first (the sum is invariant); the discarded tail is bounded through the
/// Banaszczyk tail estimate against the full mass rho_s(L).
pub fn rho_lattice(
    basis: &Basis,
    fl: &FloatLattice,
    s: f64,
    shift: Option<&Target>,
    policy: TruncationPolicy,
) -> Result<MassEstimate, Error> {
    GaussianParam::new(s)?;
    let center: Vec<f64> = match shift {
        Some(t) => {
            if t.dim() != fl.n {
                return Err(Error::DimensionMismatch {
                    expected: fl.n,
                    got: t.dim(),
                });
            }
            reduce_mod_parallelepiped(basis, t).to_f64()
        }
        None => vec![0.0; fl.n],
    };
    let unshifted_mass = if shift.is_some() {
        Some(rho_lattice(basis, fl, s, None, policy)?.value)
    } else {
        None
    };

    let mut tail_x = policy.initial_tail_x();
    for _attempt in 0..24 {
        let radius = policy.radius(fl.n, s, tail_x);
        let mut acc = Kahan::new();
        let mut points = 0usize;
        FloatEnum::new(fl, &center).visit(radius, |_z, dist_sq| {
            acc.add(rho_scalar_sq(s, dist_sq));
            points += 1;
        });
        let value = acc.value();
        if value > 0.0 {
            let full_mass_ub =
                unshifted_mass.unwrap_or(value) * (1.0 + 4.0 * policy.rel_error_target);
            let tail_bound = (-PI * tail_x * tail_x).exp() * full_mass_ub;
            let rel = tail_bound / value;
            if rel <= policy.rel_error_target {
                return Ok(MassEstimate {
                    value,
                    rel_error_bound: rel,
                    radius,
                    points,
                });
            }
        }
        tail_x += 1.0;
    }
    Err(Error::InvalidParameter(
        "rho_lattice truncation did not converge (shift mass vanishing?)".into(),
    ))
}

/// Periodic Gaussian f_s(t) = rho_s(L - t) / rho_s(L), in (0, 1].
#[derive(Clone, Copy, Debug)]
pub struct PeriodicGaussianValue {
    pub value: f64,
    pub rel_error_bound: f64,
}

pub fn periodic_gaussian_f(
    basis: &Basis,
    fl: &FloatLattice,
    s: f64,
    t: &Target,
    policy: TruncationPolicy,
) -> Result<PeriodicGaussianValue, Error> {
    let num = rho_lattice(basis, fl, s, Some(t), policy)?;
    let den = rho_lattice(basis, fl, s, None, policy)?;
    Ok(PeriodicGaussianValue {
        value: num.value / den.value,
        rel_error_bound: num.rel_error_bound + den.rel_error_bound,
    })
}

/// Dual-side cosine expectation E_{w ~ D_{L*, width}}[cos(2 pi <w, t>)],
/// evaluated by truncated enumeration over the dual lattice. By Poisson
/// summation this equals f_{L, 1/width}(t); callers compute both sides
/// independently to cross-check.
pub fn dual_cosine_expectation(
    dual_fl: &FloatLattice,
    width: f64,
    t: &[f64],
    policy: TruncationPolicy,
) -> Result<f64, Error> {
    GaussianParam::new(width)?;
    if t.len() != dual_fl.n {
        return Err(Error::DimensionMismatch {
            expected: dual_fl.n,
            got: t.len(),
        });
    }
    let mut tail_x = policy.initial_tail_x();
    let center = vec![0.0; dual_fl.n];
    for _attempt in 0..24 {
        let radius = policy.radius(dual_fl.n, width, tail_x);
        let mut num = Kahan::new();
        let mut den = Kahan::new();
        let en = FloatEnum::new(dual_fl, &center);
        en.visit(radius, |z, dist_sq| {
            let w = dual_fl.embed(z);
            let weight = rho_scalar_sq(width, dist_sq);
            let phase: f64 = w.iter().zip(t).map(|(a, b)| a * b).sum();
            num.add(weight * (2.0 * PI * phase).cos());
            den.add(weight);
        });
        let tail =
            (-PI * tail_x * tail_x).exp() * den.value() * (1.0 + 4.0 * policy.rel_error_target);
        if den.value() > 0.0 && tail <= policy.rel_error_target * den.value() {
            // |cos| <= 1: the numerator tail is bounded by the mass tail.
            return Ok(num.value() / den.value());
        }
        tail_x += 1.0;
    }
    Err(Error::InvalidParameter(
        "dual cosine expectation truncation did not converge".into(),
    ))
}

/// Smoothing parameter: the unique s with rho_{1/s}(L*) = 1 + eps, found by
/// monotonic bracketing bisection to relative tolerance 1e-10 on s.
pub fn smoothing_parameter(
    basis: &Basis,
    eps: f64,
    policy: TruncationPolicy,
) -> Result<f64, Error> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "smoothing eps must be positive, got {eps}"
        )));
    }
    let dual = basis.dual();
    let dual_fl = dual.to_float();
    let excess = |s: f64| -> Result<f64, Error> {
        Ok(rho_lattice(&dual, &dual_fl, 1.0 / s, None, policy)?.value - 1.0)
    };
    // rho_{1/s}(L*) - 1 is strictly decreasing in s. Bracket by doubling.
    let mut hi = 1.0f64;
    let mut steps = 0;
    while excess(hi)? > eps {
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::InvalidParameter("smoothing bracket diverged".into()));
        }
    }
    let mut lo = hi;
    while excess(lo)? < eps {
        lo /= 2.0;
        steps += 1;
        if steps > 400 {
            return Err(Error::InvalidParameter("smoothing bracket diverged".into()));
        }
    }
    // Invariant: excess(lo) >= eps >= excess(hi).
    while (hi - lo) / lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? >= eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
