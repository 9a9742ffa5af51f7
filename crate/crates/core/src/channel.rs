//! Narrowband geometric MIMO channel: a handful of plane-wave paths, each a
//! complex gain times the outer product of receive and transmit ULA
//! responses.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One propagation path. Angles in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub gain: Complex64,
    /// Angle of departure at the base station.
    pub aod: f64,
    /// Angle of arrival at the receiver.
    pub aoa: f64,
    pub is_los: bool,
}

fn default_num_paths() -> usize {
    3
}
fn default_los_amplitude() -> f64 {
    1.0
}
fn default_nlos_sigma() -> f64 {
    0.55
}
fn default_aod_range() -> [f64; 2] {
    [-60.0, 60.0]
}

/// Distribution parameters for [`draw_multipath`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    /// L, number of paths when the LOS path is present.
    #[serde(default = "default_num_paths")]
    pub num_paths: usize,
    #[serde(default = "default_los_amplitude")]
    pub los_amplitude: f64,
    /// Per-axis standard deviation of the NLOS complex gains.
    #[serde(default = "default_nlos_sigma")]
    pub nlos_sigma: f64,
    /// NLOS departure angles are uniform over this interval (degrees).
    #[serde(default = "default_aod_range")]
    pub nlos_aod_range_deg: [f64; 2],
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            num_paths: default_num_paths(),
            los_amplitude: default_los_amplitude(),
            nlos_sigma: default_nlos_sigma(),
            nlos_aod_range_deg: default_aod_range(),
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::ChannelParam("num_paths must be at least 1"));
        }
        if !(self.los_amplitude.is_finite() && self.los_amplitude >= 0.0) {
            return Err(Error::ChannelParam("los_amplitude must be finite and nonnegative"));
        }
        if !(self.nlos_sigma.is_finite() && self.nlos_sigma >= 0.0) {
            return Err(Error::ChannelParam("nlos_sigma must be finite and nonnegative"));
        }
        let [lo, hi] = self.nlos_aod_range_deg;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= -90.0 && hi <= 90.0) {
            return Err(Error::ChannelParam("nlos_aod_range_deg must be an ordered interval within [-90, 90]"));
        }
        Ok(())
    }

    fn aod_range_rad(&self) -> (f64, f64) {
        let [lo, hi] = self.nlos_aod_range_deg;
        (lo.to_radians(), hi.to_radians())
    }
}

/// N_r x N_t complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    n_r: usize,
    n_t: usize,
    data: Vec<Complex64>,
}

impl ChannelMatrix {
    pub fn zeros(n_r: usize, n_t: usize) -> Self {
        Self { n_r, n_t, data: vec![Complex64::new(0.0, 0.0); n_r * n_t] }
    }

    pub fn from_rows(n_r: usize, n_t: usize, data: Vec<Complex64>) -> Result<Self> {
        if n_r == 0 || n_t == 0 {
            return Err(Error::ZeroAntennas);
        }
        if data.len() != n_r * n_t {
            return Err(Error::ShapeMismatch { expected: n_r * n_t, got: data.len() });
        }
        Ok(Self { n_r, n_t, data })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.n_t + c]
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.n_t..(r + 1) * self.n_t]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn scale(&mut self, c: f64) {
        for v in &mut self.data {
            *v *= c;
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v.norm_sqr()).sum())
    }
}

/// Half-wavelength ULA response, unit norm:
/// `a[n] = exp(j*pi*n*sin(theta)) / sqrt(N)`.
pub fn steering_vector(n: usize, theta: f64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::ZeroAntennas);
    }
    let amp = 1.0 / libm::sqrt(n as f64);
    let s = libm::sin(theta);
    Ok((0..n).map(|k| Complex64::from_polar(amp, PI * k as f64 * s)).collect())
}

/// Draws one channel realization. When `blocked` the LOS path is dropped and
/// only the L-1 scattered paths are returned.
///
/// Random draws are consumed in a fixed order (LOS phase, then per NLOS path:
/// gain real, gain imaginary, departure, arrival) so a seed maps to one
/// realization regardless of who consumes it.
pub fn draw_multipath<R: Rng + ?Sized>(
    rng: &mut R,
    theta_los: f64,
    blocked: bool,
    params: &ChannelParams,
) -> Vec<PathComponent> {
    let mut paths = Vec::with_capacity(params.num_paths);
    if !blocked {
        let phase = rng.random::<f64>() * 2.0 * PI;
        paths.push(PathComponent {
            gain: Complex64::from_polar(params.los_amplitude, phase),
            aod: theta_los,
            aoa: theta_los,
            is_los: true,
        });
    }
    let (lo, hi) = params.aod_range_rad();
    for _ in 1..params.num_paths {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let aod = lo + (hi - lo) * rng.random::<f64>();
        let aoa = -FRAC_PI_2 + PI * rng.random::<f64>();
        paths.push(PathComponent {
            gain: Complex64::new(re * params.nlos_sigma, im * params.nlos_sigma),
            aod,
            aoa,
            is_los: false,
        });
    }
    paths
}

/// `H = sqrt(N_t N_r) * sum_l gain_l * a_r(aoa_l) * a_t(aod_l)^H`.
pub fn synthesize_channel(paths: &[PathComponent], n_t: usize, n_r: usize) -> Result<ChannelMatrix> {
    if paths.is_empty() {
        return Err(Error::NoPaths);
    }
    let mut h = ChannelMatrix::zeros(n_r, n_t);
    let scale = libm::sqrt((n_t * n_r) as f64);
    for p in paths {
        let a_t = steering_vector(n_t, p.aod)?;
        let a_r = steering_vector(n_r, p.aoa)?;
        for (r, ar) in a_r.iter().enumerate() {
            let g = p.gain * ar * scale;
            for (c, at) in a_t.iter().enumerate() {
                h.data[r * n_t + c] += g * at.conj();
            }
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream_rng;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn steering_single_element() {
        let v = steering_vector(1, 0.7).unwrap();
        assert_eq!(v, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn steering_broadside_and_endfire() {
        let r = 1.0 / 2f64.sqrt();
        let v = steering_vector(2, 0.0).unwrap();
        assert!(close(v[0], Complex64::new(r, 0.0), 1e-15) && close(v[1], Complex64::new(r, 0.0), 1e-15));
        let v = steering_vector(2, FRAC_PI_2).unwrap();
        assert!(close(v[0], Complex64::new(r, 0.0), 1e-15) && close(v[1], Complex64::new(-r, 0.0), 1e-15));
    }

    #[test]
    fn steering_rejects_zero_antennas() {
        assert_eq!(steering_vector(0, 0.0), Err(Error::ZeroAntennas));
    }

    #[test]
    fn draw_shapes() {
        let params = ChannelParams::default();
        let mut rng = stream_rng(1, 2);
        let p = draw_multipath(&mut rng, 0.3, false, &params);
        assert_eq!(p.len(), 3);
        assert_eq!(p.iter().filter(|c| c.is_los).count(), 1);
        assert!((p[0].gain.norm() - 1.0).abs() < 1e-12);
        assert_eq!((p[0].aod, p[0].aoa), (0.3, 0.3));

        let p = draw_multipath(&mut rng, 0.3, true, &params);
        assert_eq!(p.len(), 2);
        assert!(p.iter().all(|c| !c.is_los));
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let params = ChannelParams::default();
        let a = draw_multipath(&mut stream_rng(9, 9), 0.1, false, &params);
        let b = draw_multipath(&mut stream_rng(9, 9), 0.1, false, &params);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.gain.re.to_bits(), y.gain.re.to_bits());
            assert_eq!(x.gain.im.to_bits(), y.gain.im.to_bits());
            assert_eq!(x.aod.to_bits(), y.aod.to_bits());
            assert_eq!(x.aoa.to_bits(), y.aoa.to_bits());
        }
    }

    #[test]
    fn nlos_aod_stays_in_range() {
        let params = ChannelParams { nlos_aod_range_deg: [-40.0, -30.0], ..Default::default() };
        let mut rng = stream_rng(3, 0);
        for _ in 0..1000 {
            for p in draw_multipath(&mut rng, 0.0, true, &params) {
                let d = p.aod.to_degrees();
                assert!((-40.0 - 1e-9..=-30.0 + 1e-9).contains(&d));
            }
        }
    }

    #[test]
    fn nlos_amplitude_matches_rayleigh_mean() {
        // |CN(0, 2 sigma^2)| is Rayleigh(sigma) with mean sigma*sqrt(pi/2).
        let sigma = 0.55;
        let params = ChannelParams { nlos_sigma: sigma, ..Default::default() };
        let mut rng = stream_rng(2024, 0);
        let (mut sum, mut count) = (0.0, 0usize);
        for _ in 0..100_000 {
            for p in draw_multipath(&mut rng, 0.0, false, &params).iter().filter(|p| !p.is_los) {
                sum += p.gain.norm();
                count += 1;
            }
        }
        let expected = sigma * libm::sqrt(PI / 2.0);
        let mean = sum / count as f64;
        assert!(((mean - expected) / expected).abs() < 0.01, "mean {mean} vs {expected}");
    }

    #[test]
    fn params_validation() {
        assert!(ChannelParams::default().validate().is_ok());
        assert!(ChannelParams { num_paths: 0, ..Default::default() }.validate().is_err());
        assert!(ChannelParams { nlos_sigma: -1.0, ..Default::default() }.validate().is_err());
        assert!(ChannelParams { nlos_aod_range_deg: [10.0, -10.0], ..Default::default() }.validate().is_err());
    }

    #[test]
    fn scalar_channel_is_the_gain() {
        let g = Complex64::from_polar(1.0, 0.4);
        let h = synthesize_channel(&[PathComponent { gain: g, aod: 0.2, aoa: -0.3, is_los: true }], 1, 1).unwrap();
        assert!(close(h.get(0, 0), g, 1e-15));
        assert!((h.get(0, 0).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn on_grid_los_row_has_norm_sqrt_nt() {
        let n = 16;
        for q in 0..n / 2 {
            let phi = libm::asin(2.0 * q as f64 / n as f64);
            let p = PathComponent { gain: Complex64::new(1.0, 0.0), aod: phi, aoa: 0.0, is_los: true };
            let h = synthesize_channel(&[p], n, 1).unwrap();
            assert!((h.frobenius_norm() - libm::sqrt(n as f64)).abs() < 1e-12);
            let a = steering_vector(n, phi).unwrap();
            for c in 0..n {
                assert!(close(h.get(0, c), a[c].conj() * libm::sqrt(n as f64), 1e-12));
            }
        }
    }

    #[test]
    fn empty_paths_rejected() {
        assert_eq!(synthesize_channel(&[], 4, 1), Err(Error::NoPaths));
    }

    fn path() -> impl Strategy<Value = PathComponent> {
        (-2.0f64..2.0, -2.0f64..2.0, -1.5f64..1.5, -1.5f64..1.5, any::<bool>())
            .prop_map(|(re, im, aod, aoa, is_los)| PathComponent { gain: Complex64::new(re, im), aod, aoa, is_los })
    }

    proptest! {
        #[test]
        fn steering_has_unit_norm(theta in -PI..PI, n in prop::sample::select(vec![1usize, 2, 8, 64])) {
            let v = steering_vector(n, theta).unwrap();
            let norm = libm::sqrt(v.iter().map(|x| x.norm_sqr()).sum::<f64>());
            prop_assert!((norm - 1.0).abs() < 1e-12);
        }

        #[test]
        fn synthesis_is_linear(a in prop::collection::vec(path(), 1..4), b in prop::collection::vec(path(), 1..4), n_t in 1usize..9, n_r in 1usize..4) {
            let joint: Vec<_> = a.iter().chain(&b).copied().collect();
            let h = synthesize_channel(&joint, n_t, n_r).unwrap();
            let ha = synthesize_channel(&a, n_t, n_r).unwrap();
            let hb = synthesize_channel(&b, n_t, n_r).unwrap();
            for i in 0..n_t * n_r {
                prop_assert!(close(h.as_slice()[i], ha.as_slice()[i] + hb.as_slice()[i], 1e-12));
            }
        }
    }
}
