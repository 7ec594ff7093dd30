//! Seeded FIR MIMO channels from standard power-delay profiles, with exact
//! frequency-response derivatives and calibrated AWGN.
//!
//! Channels are static and sample-spaced: profile delays are rounded to the
//! nearest sample at f_s = 2M·15 kHz, colliding delays accumulate power, and
//! the per-path variances are normalised to unit total average gain per
//! antenna pair. An FIR response is an entire function of ω, so all
//! derivatives H^(r)(ω) = Σ_l (-jl)^r h_l e^{-jωl} are exact.

use crate::error::{Error, Result};
use crate::C64;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Subcarrier spacing fixed by the LTE-like scenario.
pub const SUBCARRIER_SPACING_HZ: f64 = 15_000.0;

/// One path of a power-delay profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdpPath {
    pub delay_ns: f64,
    pub power_db: f64,
}

/// A named power-delay profile.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerDelayProfile {
    pub name: String,
    pub paths: Vec<PdpPath>,
}

impl PowerDelayProfile {
    /// Extended Vehicular A.
    pub fn eva() -> Self {
        Self::parse("EVA", include_str!("../data/eva.pdp")).expect("bundled EVA profile")
    }

    /// Extended Typical Urban.
    pub fn etu() -> Self {
        Self::parse("ETU", include_str!("../data/etu.pdp")).expect("bundled ETU profile")
    }

    /// Look a built-in profile up by (case-insensitive) name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "eva" => Ok(Self::eva()),
            "etu" => Ok(Self::etu()),
            other => Err(Error::UnknownProfile(other.into())),
        }
    }

    /// Parse the plain-text profile format: one `delay_ns, power_dB` row per
    /// path, `#` comments.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut paths = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(d), Some(p), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::InvalidParam(format!(
                    "profile line {}: expected `delay_ns, power_dB`",
                    lineno + 1
                )));
            };
            let delay_ns: f64 = d
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad delay on line {}", lineno + 1)))?;
            let power_db: f64 = p
                .parse()
                .map_err(|_| Error::InvalidParam(format!("bad power on line {}", lineno + 1)))?;
            paths.push(PdpPath { delay_ns, power_db });
        }
        if paths.is_empty() {
            return Err(Error::InvalidParam(format!("profile {name} has no paths")));
        }
        Ok(Self { name: name.to_string(), paths })
    }

    /// Per-sample-delay variances at sample rate f_s, normalised to unit sum.
    /// Colliding delays accumulate.
    pub fn sampled_variances(&self, sample_rate: f64) -> Vec<f64> {
        let mut bins: Vec<(usize, f64)> = Vec::new();
        for path in &self.paths {
            let lag = (path.delay_ns * 1e-9 * sample_rate).round() as usize;
            let lin = 10f64.powf(path.power_db / 10.0);
            if let Some(entry) = bins.iter_mut().find(|(d, _)| *d == lag) {
                entry.1 += lin;
            } else {
                bins.push((lag, lin));
            }
        }
        let max_lag = bins.iter().map(|&(d, _)| d).max().unwrap_or(0);
        let total: f64 = bins.iter().map(|&(_, p)| p).sum();
        let mut out = vec![0.0; max_lag + 1];
        for (d, p) in bins {
            out[d] = p / total;
        }
        out
    }
}

/// Static FIR MIMO channel: one N_R×N_T matrix per sample delay.
#[derive(Debug, Clone)]
pub struct MimoChannelModel {
    taps: Vec<Array2<C64>>,
    profile_name: String,
    sample_rate: f64,
    seed: u64,
}

impl MimoChannelModel {
    /// Draw a seeded realization: i.i.d. complex Gaussian taps with the
    /// profile's per-delay variances, identical statistics for every antenna
    /// pair.
    pub fn generate(
        profile: &PowerDelayProfile,
        n_r: usize,
        n_t: usize,
        m: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_r == 0 || n_t == 0 || m == 0 {
            return Err(Error::InvalidParam("antenna counts and M must be positive".into()));
        }
        let sample_rate = 2.0 * m as f64 * SUBCARRIER_SPACING_HZ;
        let variances = profile.sampled_variances(sample_rate);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut taps = Vec::with_capacity(variances.len());
        for &var in &variances {
            let amp = (var / 2.0).sqrt();
            let tap = Array2::from_shape_fn((n_r, n_t), |_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                C64::new(re * amp, im * amp)
            });
            taps.push(tap);
        }
        Ok(Self { taps, profile_name: profile.name.clone(), sample_rate, seed })
    }

    /// Wrap explicit taps (used for custom and degenerate test channels).
    pub fn from_taps(taps: Vec<Array2<C64>>, name: &str) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidParam("channel needs at least one tap".into()));
        }
        let dim = taps[0].dim();
        if taps.iter().any(|t| t.dim() != dim) {
            return Err(Error::ShapeMismatch("taps differ in antenna dimensions".into()));
        }
        Ok(Self { taps, profile_name: name.to_string(), sample_rate: 0.0, seed: 0 })
    }

    /// Frequency-flat channel with the given matrix as its only tap.
    pub fn flat(h: Array2<C64>) -> Self {
        Self { taps: vec![h], profile_name: "FLAT".into(), sample_rate: 0.0, seed: 0 }
    }

    /// Scalar (SISO) FIR channel from a tap list.
    pub fn scalar(taps: &[C64]) -> Result<Self> {
        Self::from_taps(
            taps.iter().map(|&h| Array2::from_elem((1, 1), h)).collect(),
            "SISO",
        )
    }

    pub fn n_r(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn n_t(&self) -> usize {
        self.taps[0].ncols()
    }

    pub fn num_taps(&self) -> usize {
        self.taps.len()
    }

    pub fn taps(&self) -> &[Array2<C64>] {
        &self.taps
    }

    pub fn profile_name(&self) -> &str {
        &self.profile_name
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Scalar tap sequence of one antenna pair.
    pub fn scalar_taps(&self, rx: usize, tx: usize) -> Vec<C64> {
        self.taps.iter().map(|t| t[(rx, tx)]).collect()
    }

    /// H(ω).
    pub fn freq_response(&self, omega: f64) -> Array2<C64> {
        self.freq_response_deriv(0, omega)
    }

    /// Exact r-th derivative H^(r)(ω) = Σ_l (-jl)^r h_l e^{-jωl}.
    pub fn freq_response_deriv(&self, r: usize, omega: f64) -> Array2<C64> {
        let mut out = Array2::zeros((self.n_r(), self.n_t()));
        for (l, tap) in self.taps.iter().enumerate() {
            let mut w = C64::from_polar(1.0, -omega * l as f64);
            let minus_jl = C64::new(0.0, -(l as f64));
            for _ in 0..r {
                w *= minus_jl;
            }
            out.scaled_add(w, tap);
        }
        out
    }
}

/// AWGN description: variance per complex sample plus its own seed.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec {
    pub variance: f64,
    pub seed: u64,
}

/// Add i.i.d. circular complex Gaussian noise of the given per-sample
/// variance; deterministic per seed.
pub fn add_awgn(signal: &[C64], spec: &NoiseSpec) -> Vec<C64> {
    if spec.variance == 0.0 {
        return signal.to_vec();
    }
    let amp = (spec.variance / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    signal
        .iter()
        .map(|&x| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            x + C64::new(re * amp, im * amp)
        })
        .collect()
}
