//! Observation coefficients.
//!
//! Integrating the velocity equation from 0 to `t_M` and moving every
//! unknown to the right yields
//!
//! ```text
//! β_M = C_b^n(0) (α_M + χ_M b_a + λ_M b_g + γ_M l)
//! ```
//!
//! where `β_M` depends only on GNSS data and the Earth model, and `α, χ, λ, γ`
//! only on the IMU increments. [`CoeffBuilder`] accumulates these per update
//! interval and emits their differences over a fixed window of `∇` epochs.

use alloc::collections::VecDeque;

use crate::earth::EarthParams;
use crate::rotation::{rotvec_to_dcm, skew};
use crate::sim::{GnssFix, ImuIncrement};
use crate::{Error, Mat3, Result, Vec3};

/// Allowed mismatch between GNSS fix spacing and the update interval, s.
pub const SPACING_TOLERANCE: f64 = 1e-6;

/// Undifferenced coefficients at epoch `M` (time `t = M T`).
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffEpoch {
    pub m: usize,
    pub t: f64,
    pub alpha: Vec3,
    pub beta: Vec3,
    pub chi: Mat3,
    pub lambda: Mat3,
    pub gamma: Mat3,
    /// `C_b(t)^b(0)`
    pub c_b: Mat3,
    /// `C_n(t)^n(0)`
    pub c_n: Mat3,
}

impl CoeffEpoch {
    pub fn initial() -> Self {
        Self {
            m: 0,
            t: 0.0,
            alpha: Vec3::zeros(),
            beta: Vec3::zeros(),
            chi: Mat3::zeros(),
            lambda: Mat3::zeros(),
            gamma: Mat3::zeros(),
            c_b: Mat3::identity(),
            c_n: Mat3::identity(),
        }
    }
}

/// `CoeffEpoch(M) − CoeffEpoch(M − ∇)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffCoeff {
    pub m: usize,
    pub alpha: Vec3,
    pub beta: Vec3,
    pub chi: Mat3,
    pub lambda: Mat3,
    pub gamma: Mat3,
    pub window: usize,
}

impl DiffCoeff {
    pub fn between(earlier: &CoeffEpoch, later: &CoeffEpoch) -> Self {
        Self {
            m: later.m,
            alpha: later.alpha - earlier.alpha,
            beta: later.beta - earlier.beta,
            chi: later.chi - earlier.chi,
            lambda: later.lambda - earlier.lambda,
            gamma: later.gamma - earlier.gamma,
            window: later.m - earlier.m,
        }
    }

    /// `[χ̄ λ̄ γ̄]`, the 3×9 block multiplying `[b_a; b_g; l]`.
    pub fn param_block(&self) -> crate::Mat3x9 {
        let mut g = crate::Mat3x9::zeros();
        g.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.chi);
        g.fixed_view_mut::<3, 3>(0, 3).copy_from(&self.lambda);
        g.fixed_view_mut::<3, 3>(0, 6).copy_from(&self.gamma);
        g
    }
}

/// Differences the newest epoch of `history` against the one `window`
/// epochs earlier.
pub fn window_diff<'a, I>(history: I, window: usize) -> Result<DiffCoeff>
where
    I: IntoIterator<Item = &'a CoeffEpoch>,
    I::IntoIter: DoubleEndedIterator + ExactSizeIterator,
{
    let iter = history.into_iter();
    let have = iter.len();
    if window == 0 || have < window + 1 {
        return Err(Error::InsufficientHistory {
            needed: window + 1,
            have,
        });
    }
    let mut rev = iter.rev();
    let latest = rev.next().expect("non-empty history");
    let earlier = rev.nth(window - 1).expect("history long enough");
    Ok(DiffCoeff::between(earlier, latest))
}

/// Two-sample velocity increment with rotation and sculling compensation.
pub fn sculled_dv(imu: &ImuIncrement) -> Vec3 {
    let [th1, th2] = imu.dtheta;
    let [v1, v2] = imu.dvel;
    v1 + v2 + (th1 + th2).cross(&(v1 + v2)) * 0.5 + (th1.cross(&v2) + v1.cross(&th2)) * (2.0 / 3.0)
}

/// Two-sample rotation vector over the interval (first-order coning term).
pub fn coned_rotation(imu: &ImuIncrement) -> Vec3 {
    let [th1, th2] = imu.dtheta;
    th1 + th2 + th1.cross(&th2) * (2.0 / 3.0)
}

/// Body rate at the start of the interval from the linear rate model.
pub fn rate_at_start(imu: &ImuIncrement) -> Vec3 {
    (imu.dtheta[0] * 3.0 - imu.dtheta[1]) / imu.interval
}

/// Body rate at the end of the interval from the linear rate model.
pub fn rate_at_end(imu: &ImuIncrement) -> Vec3 {
    (imu.dtheta[1] * 3.0 - imu.dtheta[0]) / imu.interval
}

/// Streaming builder for [`CoeffEpoch`] and [`DiffCoeff`].
///
/// Keeps only the last `∇ + 1` epochs. Feed it one IMU interval and the GNSS
/// fix that closes it at a time through [`CoeffBuilder::push`].
#[derive(Debug, Clone)]
pub struct CoeffBuilder {
    interval: f64,
    window: usize,
    current: CoeffEpoch,
    v0: Vec3,
    /// Running sum of the Coriolis and gravity integrals in `β`.
    beta_sum: Vec3,
    last_fix: GnssFix,
    omega0_skew: Option<Mat3>,
    history: VecDeque<CoeffEpoch>,
}

impl CoeffBuilder {
    /// Starts at the GNSS fix taken at `t = 0`.
    pub fn new(first_fix: GnssFix, interval: f64, window: usize) -> Result<Self> {
        if !(interval > 0.0) {
            return Err(Error::InvalidConfig("update interval must be positive"));
        }
        if window == 0 {
            return Err(Error::InvalidConfig("difference window must be at least one epoch"));
        }
        let current = CoeffEpoch {
            t: first_fix.t,
            ..CoeffEpoch::initial()
        };
        let mut history = VecDeque::with_capacity(window + 1);
        history.push_back(current.clone());
        Ok(Self {
            interval,
            window,
            current,
            v0: first_fix.velocity,
            beta_sum: Vec3::zeros(),
            last_fix: first_fix,
            omega0_skew: None,
            history,
        })
    }

    pub fn interval(&self) -> f64 {
        self.interval
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn current(&self) -> &CoeffEpoch {
        &self.current
    }

    pub fn history(&self) -> impl ExactSizeIterator<Item = &CoeffEpoch> + DoubleEndedIterator {
        self.history.iter()
    }

    /// Advances the GNSS-side quantities `β` and `C_n(t)^n(0)` across
    /// `[fix_k.t, fix_k1.t]` with the Earth model evaluated at `fix_k`.
    pub fn update_nav_side(&mut self, fix_k: &GnssFix, fix_k1: &GnssFix, earth: &EarthParams) -> Result<()> {
        let t = self.interval;
        let spacing = fix_k1.t - fix_k.t;
        if (spacing - t).abs() > SPACING_TOLERANCE {
            return Err(Error::GapDetected { spacing, expected: t });
        }
        let w_in = skew(&earth.omega_in);
        let w_ie = skew(&earth.omega_ie);
        let eye = Mat3::identity();
        let coriolis_k = (eye * (t / 2.0) + w_in * (t * t / 6.0)) * w_ie * fix_k.velocity;
        let coriolis_k1 = (eye * (t / 2.0) + w_in * (t * t / 3.0)) * w_ie * fix_k1.velocity;
        let grav = (eye * t + w_in * (t * t / 2.0)) * earth.gravity;
        self.beta_sum += self.current.c_n * (coriolis_k + coriolis_k1 - grav);
        self.current.c_n *= rotvec_to_dcm(&(earth.omega_in * t));
        self.current.beta = self.current.c_n * fix_k1.velocity - self.v0 + self.beta_sum;
        Ok(())
    }

    /// Folds one IMU interval into `α, χ, λ` and advances `C_b(t)^b(0)`.
    pub fn update_body_side(&mut self, imu: &ImuIncrement) {
        let t = self.interval;
        let k = self.current.m as f64;
        let c = self.current.c_b;
        let [th1, th2] = imu.dtheta;
        let [v1, v2] = imu.dvel;
        let dv = sculled_dv(imu);
        self.current.alpha += c * dv;
        self.current.chi -= c * (Mat3::identity() + skew(&(th1 * 5.0 + th2)) / 6.0) * t;
        // Gyro bias acting inside the interval weights the specific force by
        // the elapsed time; with a linear force model that is T/6 (Δv₁ + 5Δv₂).
        self.current.lambda += c * skew(&(v1 + v2 * 5.0)) * (t / 6.0) + skew(&dv) * (k * t);
        self.current.c_b = c * rotvec_to_dcm(&coned_rotation(imu));
    }

    /// `γ_M = C_b(t_M)^b(0) (ω(t_M)×) − (ω(0)×)` with `ω(t_M)` taken at the
    /// end of `imu`, the interval closing epoch `M`.
    pub fn gamma_eval(&self, imu: &ImuIncrement) -> Mat3 {
        match self.omega0_skew {
            Some(w0) if self.current.m > 0 => self.current.c_b * skew(&rate_at_end(imu)) - w0,
            _ => Mat3::zeros(),
        }
    }

    /// Processes interval `[t_M, t_M + T]` and the fix at its end. Returns
    /// the differenced coefficients once `M ≥ ∇`.
    pub fn push(&mut self, imu: &ImuIncrement, fix: &GnssFix) -> Result<Option<DiffCoeff>> {
        if (imu.t - self.last_fix.t).abs() > SPACING_TOLERANCE {
            return Err(Error::TimeGap {
                expected: self.last_fix.t,
                got: imu.t,
            });
        }
        if (imu.interval - self.interval).abs() > SPACING_TOLERANCE {
            return Err(Error::GapDetected {
                spacing: imu.interval,
                expected: self.interval,
            });
        }
        let last = self.last_fix;
        let earth = EarthParams::at(&last.position, &last.velocity)?;
        self.update_nav_side(&last, fix, &earth)?;
        if self.omega0_skew.is_none() {
            self.omega0_skew = Some(skew(&rate_at_start(imu)));
        }
        self.update_body_side(imu);
        self.current.m += 1;
        self.current.t = fix.t;
        self.current.gamma = self.gamma_eval(imu);
        self.last_fix = *fix;

        if self.history.len() == self.window + 1 {
            self.history.pop_front();
        }
        self.history.push_back(self.current.clone());
        if self.current.m >= self.window {
            window_diff(self.history.iter(), self.window).map(Some)
        } else {
            Ok(None)
        }
    }
}
