//! The four mixing-distribution families: parameter domains, bilateral
//! Laplace transforms, sign-conditioned decompositions, closed-form moment
//! terms, tail metadata, and exact seeded samplers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{ln_factorial, normal_cdf, splitmix64, GOLDEN_GAMMA};

/// Parameters are snapped to the dedicated `alpha = 1` branch inside this
/// distance; the secant pole at 1 is a parameterization artifact, not a
/// property of the family.
pub const ALPHA_ONE_SNAP: f64 = 1e-9;

/// A mixing distribution for a mixed Poisson count model. The law of the
/// random intensity `X` may put mass on negative reals.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Atom at `-a` with probability `p`, atom at `b` with probability `1-p`.
    TwoPoint { a: f64, b: f64, p: f64 },
    /// `[-X | X<0] ~ Exp(lambda1)` with probability `p`,
    /// `[X | X>=0] ~ Exp(lambda2)` with probability `1-p`.
    AsymLaplace { lambda1: f64, lambda2: f64, p: f64 },
    /// `X ~ N(mu, sigma2)`.
    GaussianMix { mu: f64, sigma2: f64 },
    /// Stable law with skew fixed at `beta = 1` (maximally right-skewed),
    /// index `alpha` in (0, 2], scale `sigma`, location `delta`.
    ExtremeStable { alpha: f64, sigma: f64, delta: f64 },
}

impl FamilySpec {
    pub fn two_point(a: f64, b: f64, p: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "two-point atom magnitude a must be positive, got {a}"
            )));
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "two-point atom b must be positive, got {b}"
            )));
        }
        check_probability(p)?;
        Ok(Self::TwoPoint { a, b, p })
    }

    pub fn asym_laplace(lambda1: f64, lambda2: f64, p: f64) -> Result<Self> {
        for (name, rate) in [("lambda1", lambda1), ("lambda2", lambda2)] {
            if !rate.is_finite() || rate <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive rate, got {rate}"
                )));
            }
        }
        check_probability(p)?;
        Ok(Self::AsymLaplace { lambda1, lambda2, p })
    }

    pub fn gaussian(mu: f64, sigma2: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be a positive variance, got {sigma2}"
            )));
        }
        Ok(Self::GaussianMix { mu, sigma2 })
    }

    pub fn extreme_stable(alpha: f64, sigma: f64, delta: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 2.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 2], got {alpha}"
            )));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite, got {delta}"
            )));
        }
        if !sigma.is_finite() || sigma < 0.0 || (sigma == 0.0 && !alpha_is_one(alpha)) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive (nonnegative when alpha = 1), got {sigma}"
            )));
        }
        Ok(Self::ExtremeStable { alpha, sigma, delta })
    }

    pub fn family_name(&self) -> &'static str {
        match self {
            Self::TwoPoint { .. } => "two-point",
            Self::AsymLaplace { .. } => "asym-laplace",
            Self::GaussianMix { .. } => "gaussian",
            Self::ExtremeStable { .. } => "extreme-stable",
        }
    }

    /// Odds of the negative component, `p / (1-p)`, for the two families
    /// parameterized by an explicit negative-mass probability.
    pub fn odds(&self) -> Option<f64> {
        match self {
            Self::TwoPoint { p, .. } | Self::AsymLaplace { p, .. } => Some(p / (1.0 - p)),
            _ => None,
        }
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !p.is_finite() || !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "p must lie in [0, 1), got {p}"
        )));
    }
    Ok(())
}

pub(crate) fn alpha_is_one(alpha: f64) -> bool {
    (alpha - 1.0).abs() <= ALPHA_ONE_SNAP
}

/// `sec(pi * alpha / 2)`, only valid away from the alpha = 1 pole.
pub(crate) fn sec_half_pi_alpha(alpha: f64) -> f64 {
    debug_assert!(!alpha_is_one(alpha));
    1.0 / (std::f64::consts::FRAC_PI_2 * alpha).cos()
}

/// Bilateral Laplace transform `E[exp(-tX)]` of the mixing law at `t >= 0`.
///
/// For the asymmetric Laplace family the transform is finite only for
/// `t < lambda1`. The extreme stable branch at `alpha = 1` evaluates
/// `t·log t` as 0 at `t = 0` (its analytic limit).
pub fn laplace(spec: &FamilySpec, t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::Domain(format!("laplace requires t >= 0, got {t}")));
    }
    if t == 0.0 {
        // E[1] = 1, exactly; the mixture sums below would round.
        return Ok(1.0);
    }
    match *spec {
        FamilySpec::TwoPoint { a, b, p } => Ok((1.0 - p) * (-t * b).exp() + p * (t * a).exp()),
        FamilySpec::AsymLaplace { lambda1, lambda2, p } => {
            if t >= lambda1 {
                return Err(Error::Domain(format!(
                    "laplace diverges for t >= lambda1 ({t} >= {lambda1})"
                )));
            }
            Ok((1.0 - p) * lambda2 / (lambda2 + t) + p * lambda1 / (lambda1 - t))
        }
        FamilySpec::GaussianMix { mu, sigma2 } => Ok((-t * mu + 0.5 * t * t * sigma2).exp()),
        FamilySpec::ExtremeStable { alpha, sigma, delta } => {
            if alpha_is_one(alpha) {
                let t_log_t = if t == 0.0 { 0.0 } else { t * t.ln() };
                Ok((-t * delta + sigma * std::f64::consts::FRAC_2_PI * t_log_t).exp())
            } else {
                let c = sec_half_pi_alpha(alpha) * sigma.powf(alpha);
                Ok((-t * delta - c * t.powf(alpha)).exp())
            }
        }
    }
}

/// A probability mass that is either known in closed form or known only to
/// be strictly positive (estimate it with `oracle::mc_p_neg`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassValue {
    Exact(f64),
    Unavailable,
}

impl MassValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, MassValue::Exact(x) if *x == 0.0)
    }

    pub fn exact(&self) -> Option<f64> {
        match self {
            MassValue::Exact(x) => Some(*x),
            MassValue::Unavailable => None,
        }
    }
}

/// Law of one sign-conditioned part of a mixing distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartLaw {
    PointMass { location: f64 },
    Exponential { rate: f64 },
    /// Law of `-X` given `X < 0` for Gaussian `X`.
    GaussianLowerTailNegated { mu: f64, sigma2: f64 },
    /// Law of `X` given `X >= 0` for Gaussian `X`.
    GaussianUpperTail { mu: f64, sigma2: f64 },
    /// Sign-conditioned extreme stable tail; no closed form (sample the whole
    /// law with `sample_mixing` and condition on the sign).
    StableConditionalTail { negative_side: bool },
}

/// Sign decomposition of a mixing law into `A = [-X | X<0]` and
/// `B = [X | X>=0]` with the negative-part mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Split {
    pub p_neg: MassValue,
    /// `None` when the negative part carries no mass.
    pub neg_part: Option<PartLaw>,
    /// `None` when the nonnegative part carries no mass.
    pub pos_part: Option<PartLaw>,
}

/// Decompose the mixing law around zero.
pub fn split(spec: &FamilySpec) -> Split {
    match *spec {
        FamilySpec::TwoPoint { a, b, p } => Split {
            p_neg: MassValue::Exact(p),
            neg_part: (p > 0.0).then_some(PartLaw::PointMass { location: a }),
            pos_part: Some(PartLaw::PointMass { location: b }),
        },
        FamilySpec::AsymLaplace { lambda1, lambda2, p } => Split {
            p_neg: MassValue::Exact(p),
            neg_part: (p > 0.0).then_some(PartLaw::Exponential { rate: lambda1 }),
            pos_part: Some(PartLaw::Exponential { rate: lambda2 }),
        },
        FamilySpec::GaussianMix { mu, sigma2 } => Split {
            p_neg: MassValue::Exact(normal_cdf(-mu / sigma2.sqrt())),
            neg_part: Some(PartLaw::GaussianLowerTailNegated { mu, sigma2 }),
            pos_part: Some(PartLaw::GaussianUpperTail { mu, sigma2 }),
        },
        FamilySpec::ExtremeStable { alpha, sigma, delta } => {
            if sigma == 0.0 {
                // Degenerate point mass at delta.
                return Split {
                    p_neg: MassValue::Exact(if delta < 0.0 { 1.0 } else { 0.0 }),
                    neg_part: (delta < 0.0).then_some(PartLaw::PointMass { location: -delta }),
                    pos_part: (delta >= 0.0).then_some(PartLaw::PointMass { location: delta }),
                };
            }
            let p_neg = if alpha < 1.0 && !alpha_is_one(alpha) && delta >= 0.0 {
                // Support is [delta, infinity): the positive stable regime.
                MassValue::Exact(0.0)
            } else {
                MassValue::Unavailable
            };
            Split {
                neg_part: (!p_neg.is_zero())
                    .then_some(PartLaw::StableConditionalTail { negative_side: true }),
                pos_part: Some(PartLaw::StableConditionalTail { negative_side: false }),
                p_neg,
            }
        }
    }
}

/// Closed-form `E[A^n e^A]` for the negative part `A = [-X | X<0]`.
///
/// Available for the two-point and asymmetric Laplace families; the latter
/// requires `lambda1 > 1` for the expectation to be finite.
pub fn term_neg(spec: &FamilySpec, n: u64) -> Result<f64> {
    log_term_neg(spec, n).map(f64::exp)
}

/// Closed-form `E[B^n e^{-B}]` for the nonnegative part `B = [X | X>=0]`.
pub fn term_pos(spec: &FamilySpec, n: u64) -> Result<f64> {
    log_term_pos(spec, n).map(f64::exp)
}

/// Log-scale companion of [`term_neg`]; the closed forms grow factorially,
/// so comparisons at large `n` must happen in log space.
pub fn log_term_neg(spec: &FamilySpec, n: u64) -> Result<f64> {
    match *spec {
        FamilySpec::TwoPoint { a, .. } => Ok(n as f64 * a.ln() + a),
        FamilySpec::AsymLaplace { lambda1, .. } => {
            if lambda1 <= 1.0 {
                return Err(Error::Domain(format!(
                    "E[A^n e^A] diverges for lambda1 <= 1 (got {lambda1})"
                )));
            }
            Ok(lambda1.ln() + ln_factorial(n) - (n as f64 + 1.0) * (lambda1 - 1.0).ln())
        }
        _ => Err(no_closed_term(spec)),
    }
}

/// Log-scale companion of [`term_pos`].
pub fn log_term_pos(spec: &FamilySpec, n: u64) -> Result<f64> {
    match *spec {
        FamilySpec::TwoPoint { b, .. } => Ok(n as f64 * b.ln() - b),
        FamilySpec::AsymLaplace { lambda2, .. } => {
            Ok(lambda2.ln() + ln_factorial(n) - (n as f64 + 1.0) * (lambda2 + 1.0).ln())
        }
        _ => Err(no_closed_term(spec)),
    }
}

fn no_closed_term(spec: &FamilySpec) -> Error {
    Error::UnsupportedFamily {
        family: spec.family_name(),
        reason: "no closed-form sign-conditioned moment terms; use the oracle module",
    }
}

/// Subweibull index meaning "not q-subweibull for any q > 0" (a power-law
/// tail, heavier than every stretched exponential).
pub const NOT_SUBWEIBULL: f64 = 0.0;

/// Analytic tail metadata for the two sign-conditioned parts of a mixing law.
///
/// Indices use `f64::INFINITY` for tails that are strictly q-subweibull for
/// every q (bounded or faster-than-any-stretched-exponential decay) and the
/// [`NOT_SUBWEIBULL`] sentinel `0.0` for power-law tails. When `p_neg` is
/// zero, `q_left` is `INFINITY` by convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailDescriptor {
    pub q_left: f64,
    pub q_left_strict: bool,
    pub q_right: f64,
    pub q_right_strict: bool,
    /// `E[e^A] < infinity`.
    pub e_a_finite: bool,
    /// `E[e^{2A}] < infinity`.
    pub e_2a_finite: bool,
    pub p_neg: MassValue,
    pub p_pos: MassValue,
}

/// Tail classification of a mixing law, consumed by the necessary-condition
/// screen in the validity module.
pub fn tail_descriptor(spec: &FamilySpec) -> TailDescriptor {
    match *spec {
        FamilySpec::TwoPoint { p, .. } => TailDescriptor {
            q_left: f64::INFINITY,
            q_left_strict: true,
            q_right: f64::INFINITY,
            q_right_strict: true,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg: MassValue::Exact(p),
            p_pos: MassValue::Exact(1.0 - p),
        },
        FamilySpec::AsymLaplace { lambda1, p, .. } => {
            if p == 0.0 {
                TailDescriptor {
                    q_left: f64::INFINITY,
                    q_left_strict: true,
                    q_right: 1.0,
                    q_right_strict: false,
                    e_a_finite: true,
                    e_2a_finite: true,
                    p_neg: MassValue::Exact(0.0),
                    p_pos: MassValue::Exact(1.0),
                }
            } else {
                TailDescriptor {
                    q_left: 1.0,
                    q_left_strict: false,
                    q_right: 1.0,
                    q_right_strict: false,
                    e_a_finite: lambda1 > 1.0,
                    e_2a_finite: lambda1 > 2.0,
                    p_neg: MassValue::Exact(p),
                    p_pos: MassValue::Exact(1.0 - p),
                }
            }
        }
        FamilySpec::GaussianMix { mu, sigma2 } => {
            let p_neg = normal_cdf(-mu / sigma2.sqrt());
            TailDescriptor {
                q_left: 2.0,
                q_left_strict: true,
                q_right: 2.0,
                q_right_strict: true,
                e_a_finite: true,
                e_2a_finite: true,
                p_neg: MassValue::Exact(p_neg),
                p_pos: MassValue::Exact(1.0 - p_neg),
            }
        }
        FamilySpec::ExtremeStable { alpha, sigma, delta } => {
            stable_tail_descriptor(alpha, sigma, delta)
        }
    }
}

fn stable_tail_descriptor(alpha: f64, sigma: f64, delta: f64) -> TailDescriptor {
    if sigma == 0.0 {
        // Degenerate point mass at delta.
        let neg = if delta < 0.0 { 1.0 } else { 0.0 };
        return TailDescriptor {
            q_left: f64::INFINITY,
            q_left_strict: true,
            q_right: f64::INFINITY,
            q_right_strict: true,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg: MassValue::Exact(neg),
            p_pos: MassValue::Exact(if delta > 0.0 { 1.0 } else { 0.0 }),
        };
    }
    if alpha == 2.0 {
        // Gaussian with mean delta and variance 2 sigma^2.
        let p_neg = normal_cdf(-delta / (sigma * std::f64::consts::SQRT_2));
        return TailDescriptor {
            q_left: 2.0,
            q_left_strict: true,
            q_right: 2.0,
            q_right_strict: true,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg: MassValue::Exact(p_neg),
            p_pos: MassValue::Exact(1.0 - p_neg),
        };
    }
    // All exponential moments of the left tail are finite for beta = 1: the
    // left tail is strictly subexponential, so E[e^A] and E[e^{2A}] exist.
    if alpha_is_one(alpha) {
        TailDescriptor {
            q_left: f64::INFINITY,
            q_left_strict: true,
            q_right: NOT_SUBWEIBULL,
            q_right_strict: false,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg: MassValue::Unavailable,
            p_pos: MassValue::Unavailable,
        }
    } else if alpha < 1.0 {
        // Positive stable regime: support is [delta, infinity), so the left
        // part is bounded. Mass below zero exists only when delta < 0.
        let (p_neg, p_pos) = if delta >= 0.0 {
            (MassValue::Exact(0.0), MassValue::Exact(1.0))
        } else {
            (MassValue::Unavailable, MassValue::Unavailable)
        };
        TailDescriptor {
            q_left: f64::INFINITY,
            q_left_strict: true,
            q_right: NOT_SUBWEIBULL,
            q_right_strict: false,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg,
            p_pos,
        }
    } else {
        // 1 < alpha < 2: left tail decays like exp(-c x^{alpha/(alpha-1)}).
        TailDescriptor {
            q_left: alpha / (alpha - 1.0),
            q_left_strict: true,
            q_right: NOT_SUBWEIBULL,
            q_right_strict: false,
            e_a_finite: true,
            e_2a_finite: true,
            p_neg: MassValue::Unavailable,
            p_pos: MassValue::Unavailable,
        }
    }
}

/// Samples are generated in fixed-size shards; shard `k` of a call with seed
/// `s` is drawn from a ChaCha8 stream seeded with
/// `splitmix64(s + (k+1) * GOLDEN_GAMMA)`. The layout makes any prefix of the
/// sequence reproducible independently of how shards are scheduled.
pub const SHARD_SIZE: usize = 1 << 16;

pub(crate) fn shard_seed(seed: u64, shard_index: u64) -> u64 {
    splitmix64(seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(shard_index.wrapping_add(1))))
}

pub(crate) fn fill_shard(spec: &FamilySpec, seed: u64, shard_index: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(shard_seed(seed, shard_index));
    match *spec {
        FamilySpec::TwoPoint { a, b, p } => {
            for x in out.iter_mut() {
                let u: f64 = rng.random();
                *x = if u < p { -a } else { b };
            }
        }
        FamilySpec::AsymLaplace { lambda1, lambda2, p } => {
            for x in out.iter_mut() {
                let u: f64 = rng.random();
                let e = exp_draw(&mut rng);
                *x = if u < p { -e / lambda1 } else { e / lambda2 };
            }
        }
        FamilySpec::GaussianMix { mu, sigma2 } => {
            let sigma = sigma2.sqrt();
            for x in out.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *x = mu + sigma * z;
            }
        }
        FamilySpec::ExtremeStable { alpha, sigma, delta } => {
            let sampler = StableSampler::new(alpha, sigma, delta);
            for x in out.iter_mut() {
                *x = sampler.draw(&mut rng);
            }
        }
    }
}

/// Draw `count` mixing-law samples; deterministic for fixed `(seed, count)`,
/// and any prefix agrees with a longer call made with the same seed.
pub fn sample_mixing(spec: &FamilySpec, seed: u64, count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    for (idx, chunk) in out.chunks_mut(SHARD_SIZE).enumerate() {
        fill_shard(spec, seed, idx as u64, chunk);
    }
    out
}

fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    u.clamp(1e-15, 1.0 - 1e-15)
}

fn exp_draw<R: Rng>(rng: &mut R) -> f64 {
    -(1.0 - open_unit(rng)).ln()
}

/// Chambers-Mallows-Stuck sampler for the maximally right-skewed stable law
/// in the same parameterization as the characteristic function used by the
/// transform code (the form carrying the `tan(pi alpha / 2)` factor). The
/// `alpha = 1` branch has its own log form, including the `sigma ln sigma`
/// location shift that the scaling rule of this parameterization demands.
struct StableSampler {
    alpha: f64,
    sigma: f64,
    shift: f64,
    is_one: bool,
    // alpha != 1 precomputed constants
    theta0: f64,
    scale_s: f64,
    inv_alpha: f64,
    exp_term: f64,
}

impl StableSampler {
    fn new(alpha: f64, sigma: f64, delta: f64) -> Self {
        let is_one = alpha_is_one(alpha);
        if is_one {
            let shift = if sigma > 0.0 {
                delta + std::f64::consts::FRAC_2_PI * sigma * sigma.ln()
            } else {
                delta
            };
            Self {
                alpha: 1.0,
                sigma,
                shift,
                is_one,
                theta0: 0.0,
                scale_s: 0.0,
                inv_alpha: 1.0,
                exp_term: 0.0,
            }
        } else {
            let tan_term = (std::f64::consts::FRAC_PI_2 * alpha).tan();
            Self {
                alpha,
                sigma,
                shift: delta,
                is_one,
                theta0: tan_term.atan() / alpha,
                scale_s: (1.0 + tan_term * tan_term).powf(1.0 / (2.0 * alpha)),
                inv_alpha: 1.0 / alpha,
                exp_term: (1.0 - alpha) / alpha,
            }
        }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.is_one && self.sigma == 0.0 {
            return self.shift;
        }
        let v = std::f64::consts::PI * (open_unit(rng) - 0.5);
        let w = exp_draw(rng).max(1e-16);
        if self.is_one {
            let half_pi = std::f64::consts::FRAC_PI_2;
            let arg = half_pi + v;
            let z = std::f64::consts::FRAC_2_PI
                * (arg * v.tan() - (half_pi * w * v.cos() / arg).ln());
            self.sigma * z + self.shift
        } else {
            let phi = self.alpha * (v + self.theta0);
            let z = self.scale_s * phi.sin() / v.cos().powf(self.inv_alpha)
                * ((v - phi).cos() / w).powf(self.exp_term);
            self.sigma * z + self.shift
        }
    }
}
