//! Diffusion noise schedules and their closed-form derived quantities.
//!
//! A schedule fixes the per-step variances `beta[1..T]` of the forward
//! noising process. Everything else is derived: `alpha[t] = 1 - beta[t]`,
//! the cumulative products `alpha_bar[0..T]` (with `alpha_bar[0] = 1`), and
//! the posterior variances `beta_tilde[t] = (1 - alpha_bar[t-1]) /
//! (1 - alpha_bar[t]) * beta[t]` of `q(y_{t-1} | y_t, y_0)`.
//!
//! All schedule arithmetic is done and stored in 64-bit; consumers may
//! downcast.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Per-step beta is clipped to this value so `alpha[t]` stays positive.
pub const BETA_CLIP: f64 = 0.999;

/// Standard baseline endpoints for the linear schedule.
pub const LINEAR_BETA_START: f64 = 1e-4;
pub const LINEAR_BETA_END: f64 = 0.02;

/// Default offset of the cosine schedule.
pub const COSINE_OFFSET: f64 = 0.008;

/// How the beta sequence is generated. Carries the parameters needed to
/// reconstruct the schedule; full beta arrays are never serialized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScheduleKind {
    Linear { beta_start: f64, beta_end: f64 },
    Cosine { offset: f64 },
}

/// A fully-materialized noise schedule.
///
/// Indexing convention: diffusion timesteps are 1-based (`t` in `1..=T`).
/// `alpha_bar` has length `T + 1` with `alpha_bar[0] = 1`.
#[derive(Debug, Clone)]
pub struct NoiseSchedule {
    kind: ScheduleKind,
    steps: usize,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    alpha_bar: Vec<f64>,
    posterior_beta_tilde: Vec<f64>,
    /// log beta_tilde with the t = 1 entry replaced by the first nonzero
    /// posterior variance, so learned-variance interpolation is finite at
    /// every step.
    posterior_log_beta_tilde_clipped: Vec<f64>,
}

/// Closed-form cosine envelope `f(u) = cos^2(((u + offset)/(1 + offset)) * pi/2)`.
fn cosine_envelope(u: f64, offset: f64) -> f64 {
    let angle = (u + offset) / (1.0 + offset) * std::f64::consts::FRAC_PI_2;
    angle.cos().powi(2)
}

impl NoiseSchedule {
    fn from_betas(kind: ScheduleKind, beta: Vec<f64>) -> Result<Self> {
        let steps = beta.len();
        for (i, &b) in beta.iter().enumerate() {
            if !(b > 0.0 && b <= BETA_CLIP) {
                return Err(CoreError::numeric(format!(
                    "beta[{}] = {} outside (0, {}]",
                    i + 1,
                    b,
                    BETA_CLIP
                )));
            }
        }
        let alpha: Vec<f64> = beta.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bar = Vec::with_capacity(steps + 1);
        alpha_bar.push(1.0);
        let mut prod = 1.0;
        for &a in &alpha {
            prod *= a;
            alpha_bar.push(prod);
        }
        let mut posterior_beta_tilde = Vec::with_capacity(steps);
        for t in 1..=steps {
            let denom = 1.0 - alpha_bar[t];
            if denom <= 0.0 {
                return Err(CoreError::numeric(format!(
                    "1 - alpha_bar[{t}] underflowed to zero"
                )));
            }
            posterior_beta_tilde.push((1.0 - alpha_bar[t - 1]) / denom * beta[t - 1]);
        }
        // beta_tilde[1] is exactly zero; its log is patched with the next
        // step's value (or beta[1] for T = 1) so variance interpolation stays
        // finite.
        let first_positive = posterior_beta_tilde
            .iter()
            .copied()
            .find(|&v| v > 0.0)
            .unwrap_or(beta[0]);
        let posterior_log_beta_tilde_clipped: Vec<f64> = posterior_beta_tilde
            .iter()
            .map(|&v| if v > 0.0 { v.ln() } else { first_positive.ln() })
            .collect();
        Ok(NoiseSchedule {
            kind,
            steps,
            beta,
            alpha,
            alpha_bar,
            posterior_beta_tilde,
            posterior_log_beta_tilde_clipped,
        })
    }

    /// Linear interpolation of beta between the two endpoints over `t = 1..T`.
    pub fn linear(steps: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if steps < 1 {
            return Err(CoreError::config("schedule needs at least one step"));
        }
        if !(beta_start > 0.0 && beta_start < 1.0 && beta_end > 0.0 && beta_end < 1.0) {
            return Err(CoreError::config(format!(
                "linear beta endpoints ({beta_start}, {beta_end}) must lie in (0, 1)"
            )));
        }
        if beta_start > beta_end {
            return Err(CoreError::config(format!(
                "beta_start {beta_start} exceeds beta_end {beta_end}"
            )));
        }
        let beta: Vec<f64> = if steps == 1 {
            vec![beta_start]
        } else {
            (0..steps)
                .map(|i| beta_start + (beta_end - beta_start) * i as f64 / (steps - 1) as f64)
                .collect()
        };
        Self::from_betas(ScheduleKind::Linear { beta_start, beta_end }, beta)
    }

    /// Cosine schedule: `alpha_bar[t] = f(t/T) / f(0)` with the envelope above;
    /// betas come from consecutive ratios, clipped at [`BETA_CLIP`].
    pub fn cosine(steps: usize, offset: f64) -> Result<Self> {
        if steps < 1 {
            return Err(CoreError::config("schedule needs at least one step"));
        }
        if offset <= 0.0 {
            return Err(CoreError::config(format!(
                "cosine offset {offset} must be positive"
            )));
        }
        let f0 = cosine_envelope(0.0, offset);
        let mut beta = Vec::with_capacity(steps);
        let mut prev = 1.0;
        for t in 1..=steps {
            let ab = cosine_envelope(t as f64 / steps as f64, offset) / f0;
            let b = (1.0 - ab / prev).min(BETA_CLIP);
            beta.push(b);
            prev = ab;
        }
        Self::from_betas(ScheduleKind::Cosine { offset }, beta)
    }

    /// Rebuild a schedule from its serialized parameters.
    pub fn from_kind(kind: ScheduleKind, steps: usize) -> Result<Self> {
        match kind {
            ScheduleKind::Linear { beta_start, beta_end } => {
                Self::linear(steps, beta_start, beta_end)
            }
            ScheduleKind::Cosine { offset } => Self::cosine(steps, offset),
        }
    }

    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    /// Number of diffusion steps T.
    pub fn steps(&self) -> usize {
        self.steps
    }

    fn check_t(&self, t: usize) -> Result<()> {
        if t < 1 || t > self.steps {
            return Err(CoreError::config(format!(
                "timestep {t} outside [1, {}]",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn beta(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.beta[t - 1])
    }

    pub fn alpha(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.alpha[t - 1])
    }

    /// `alpha_bar[t]` for `t` in `0..=T` (`alpha_bar[0] = 1`).
    pub fn alpha_bar(&self, t: usize) -> Result<f64> {
        if t > self.steps {
            return Err(CoreError::config(format!(
                "timestep {t} outside [0, {}]",
                self.steps
            )));
        }
        Ok(self.alpha_bar[t])
    }

    pub fn posterior_beta_tilde(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.posterior_beta_tilde[t - 1])
    }

    /// `log beta_tilde[t]` with the zero at t = 1 patched (see field docs).
    pub fn posterior_log_beta_tilde_clipped(&self, t: usize) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.posterior_log_beta_tilde_clipped[t - 1])
    }

    /// Coefficients of the forward-process posterior
    /// `q(y_{t-1} | y_t, y_0) = N(coef_y0 * y_0 + coef_yt * y_t, var)`.
    pub fn posterior_coefficients(&self, t: usize) -> Result<(f64, f64, f64)> {
        self.check_t(t)?;
        let one_minus_ab = 1.0 - self.alpha_bar[t];
        if one_minus_ab <= 0.0 {
            return Err(CoreError::numeric(format!(
                "1 - alpha_bar[{t}] underflowed to zero"
            )));
        }
        let coef_y0 = self.alpha_bar[t - 1].sqrt() * self.beta[t - 1] / one_minus_ab;
        let coef_yt = self.alpha[t - 1].sqrt() * (1.0 - self.alpha_bar[t - 1]) / one_minus_ab;
        Ok((coef_y0, coef_yt, self.posterior_beta_tilde[t - 1]))
    }
}

/// Convenience constructor with the standard baseline endpoints.
pub fn make_linear_schedule(steps: usize, beta_start: f64, beta_end: f64) -> Result<NoiseSchedule> {
    NoiseSchedule::linear(steps, beta_start, beta_end)
}

/// Convenience constructor; `offset` defaults to [`COSINE_OFFSET`] at call sites.
pub fn make_cosine_schedule(steps: usize, offset: f64) -> Result<NoiseSchedule> {
    NoiseSchedule::cosine(steps, offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_endpoints_returned_verbatim() {
        let s = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
        assert_eq!(s.beta(1).unwrap(), 1e-4);
        assert_eq!(s.beta(1000).unwrap(), 0.02);
    }

    #[test]
    fn linear_single_step_product() {
        let s = NoiseSchedule::linear(1, 0.5, 0.5).unwrap();
        assert_eq!(s.alpha_bar(1).unwrap(), 0.5);
    }

    #[test]
    fn linear_terminal_alpha_bar_matches_high_precision_product() {
        // Frozen from an independent 40-digit cumulative product of the same
        // interpolated betas.
        let s = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
        assert_relative_eq!(
            s.alpha_bar(1000).unwrap(),
            4.035829765375683e-5,
            max_relative = 1e-10
        );
    }

    #[test]
    fn cosine_alpha_bar_zero_is_one() {
        let s = NoiseSchedule::cosine(1000, COSINE_OFFSET).unwrap();
        assert_eq!(s.alpha_bar(0).unwrap(), 1.0);
    }

    #[test]
    fn cosine_midpoint_matches_closed_form() {
        // Frozen from an independent 40-digit evaluation of
        // f(0.5)/f(0) with f(u) = cos^2(((u + 0.008)/1.008) * pi/2).
        let s = NoiseSchedule::cosine(1000, COSINE_OFFSET).unwrap();
        assert_relative_eq!(
            s.alpha_bar(500).unwrap(),
            0.4938435904406377,
            max_relative = 1e-10
        );
    }

    #[test]
    fn alpha_bar_strictly_decreasing() {
        for s in [
            NoiseSchedule::cosine(273, COSINE_OFFSET).unwrap(),
            NoiseSchedule::linear(273, 1e-4, 0.02).unwrap(),
        ] {
            for t in 1..=s.steps() {
                assert!(
                    s.alpha_bar(t).unwrap() < s.alpha_bar(t - 1).unwrap(),
                    "alpha_bar not strictly decreasing at t={t}"
                );
            }
        }
    }

    #[test]
    fn product_consistency() {
        let s = NoiseSchedule::cosine(500, COSINE_OFFSET).unwrap();
        let mut prod = 1.0f64;
        for t in 1..=500 {
            prod *= s.alpha(t).unwrap();
            assert!((s.alpha_bar(t).unwrap() - prod).abs() <= 1e-12 * prod.max(1e-300));
        }
    }

    #[test]
    fn posterior_beta_tilde_bounded_by_beta() {
        let s = NoiseSchedule::cosine(200, COSINE_OFFSET).unwrap();
        for t in 1..=200 {
            assert!(s.posterior_beta_tilde(t).unwrap() <= s.beta(t).unwrap());
        }
    }

    #[test]
    fn posterior_coefficients_at_t1() {
        let s = NoiseSchedule::linear(7, 0.05, 0.3).unwrap();
        let (c0, ct, var) = s.posterior_coefficients(1).unwrap();
        assert_eq!(c0, 1.0);
        assert_eq!(ct, 0.0);
        assert_eq!(var, 0.0);
    }

    #[test]
    fn posterior_coefficients_direct_substitution() {
        // Frozen from independent 40-digit substitution with
        // beta = (0.1, 0.2): coef_y0 = sqrt(0.9)*0.2/(1-0.72),
        // coef_yt = sqrt(0.8)*0.1/0.28, var = 0.1/0.28*0.2.
        let s = NoiseSchedule::linear(2, 0.1, 0.2).unwrap();
        let (c0, ct, var) = s.posterior_coefficients(2).unwrap();
        assert_relative_eq!(c0, 0.6776309271789384, max_relative = 1e-12);
        assert_relative_eq!(ct, 0.3194382824999700, max_relative = 1e-12);
        assert_relative_eq!(var, 0.07142857142857142, max_relative = 1e-12);
    }

    #[test]
    fn cosine_adds_noise_slower_than_linear_early() {
        let cos = NoiseSchedule::cosine(1000, COSINE_OFFSET).unwrap();
        let lin = NoiseSchedule::linear(1000, LINEAR_BETA_START, LINEAR_BETA_END).unwrap();
        assert!(cos.beta(1).unwrap() < lin.beta(1).unwrap());
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(NoiseSchedule::linear(0, 0.1, 0.2).is_err());
        assert!(NoiseSchedule::linear(10, 0.0, 0.2).is_err());
        assert!(NoiseSchedule::linear(10, 0.2, 0.1).is_err());
        assert!(NoiseSchedule::linear(10, 0.1, 1.0).is_err());
        assert!(NoiseSchedule::cosine(0, 0.008).is_err());
        assert!(NoiseSchedule::cosine(10, 0.0).is_err());
    }

    #[test]
    fn out_of_range_timesteps_rejected() {
        let s = NoiseSchedule::linear(5, 0.1, 0.2).unwrap();
        assert!(s.beta(0).is_err());
        assert!(s.beta(6).is_err());
        assert!(s.alpha_bar(6).is_err());
        assert!(s.posterior_coefficients(0).is_err());
    }
}
