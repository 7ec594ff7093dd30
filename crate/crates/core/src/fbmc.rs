//! FBMC/OQAM modulation chain and exact closed-form demodulator expressions.
//!
//! Conventions (0-based indices, 2M subcarriers, ω_k = πk/M, pulse length
//! L = 2Mκ, half-symbol offset M samples):
//!
//! ```text
//! TX:  s[n] = Σ_{k,t} u[k,t] · j^{k + (t mod 2)} · p[n - tM] · e^{jω_k(n - tM + ½)}
//! RX:  z[k,i] = (1/M) · (-j)^k · Σ_m r[vM + m] · q[L-1-m] · e^{-jω_k(m + ½)}
//! ```
//!
//! with v = i + 1 - 2κ for the i-th retained output column (2N + 2κ columns
//! in total). The staggered grid u interleaves Re/Im of the complex symbols
//! in its even/odd columns. These phase and alignment choices are exactly the
//! ones under which the ideal-channel chain equals the closed-form grid built
//! from Φ, F and the R/S pulse matrices; the closed-form equalities in the
//! test suite pin every sign and offset.
//!
//! Two independent demodulator expressions are provided: the ideal-channel
//! form (convolution of the transformed symbol columns with R and S) and the
//! general FIR form (tap-shifted matrices built from the shifted polyphase
//! matrix Q(ℓ)). Together with the time-domain chain and the per-subcarrier
//! direct oracle this gives four mutually checkable routes to the same grid.

use crate::dft::DftPlan;
use crate::error::{Error, Result};
use crate::pulse::PulseMatrices;
use crate::C64;
use ndarray::{s, Array1, Array2};
use rand::Rng;

/// Phase tables and FFT plan shared by all chain operations at one grid size.
#[derive(Debug, Clone)]
pub struct ModulatorConstants {
    m: usize,
    /// Φ_k = e^{-jπ(M+1)k/(2M)}.
    phi: Vec<C64>,
    /// Θ_k = e^{-jω_k}.
    theta: Vec<C64>,
    plan: DftPlan,
}

impl ModulatorConstants {
    pub fn new(m: usize) -> Self {
        let two_m = 2 * m;
        let phi = (0..two_m)
            .map(|k| {
                C64::from_polar(
                    1.0,
                    -std::f64::consts::PI * (m as f64 + 1.0) * k as f64 / (2.0 * m as f64),
                )
            })
            .collect();
        let theta = (0..two_m)
            .map(|k| C64::from_polar(1.0, -std::f64::consts::PI * k as f64 / m as f64))
            .collect();
        Self { m, phi, theta, plan: DftPlan::new(two_m) }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn subcarriers(&self) -> usize {
        2 * self.m
    }

    pub fn phi(&self) -> &[C64] {
        &self.phi
    }

    pub fn theta(&self) -> &[C64] {
        &self.theta
    }

    /// Subcarrier centre frequency ω_k in rad/sample.
    pub fn omega(&self, k: usize) -> f64 {
        std::f64::consts::PI * k as f64 / self.m as f64
    }
}

/// Per-stream complex QAM symbols.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    streams: Vec<Array2<C64>>,
}

impl SymbolGrid {
    pub fn from_streams(streams: Vec<Array2<C64>>) -> Result<Self> {
        if streams.is_empty() {
            return Err(Error::InvalidParam("no streams".into()));
        }
        let dim = streams[0].dim();
        if streams.iter().any(|st| st.dim() != dim) {
            return Err(Error::ShapeMismatch("streams differ in shape".into()));
        }
        Ok(Self { streams })
    }

    /// Unit-energy QPSK drawn i.i.d.: Re and Im uniform on ±√(P_s/2).
    pub fn random_qpsk(m: usize, n: usize, n_streams: usize, p_s: f64, rng: &mut impl Rng) -> Self {
        let amp = (p_s / 2.0).sqrt();
        let streams = (0..n_streams)
            .map(|_| {
                Array2::from_shape_fn((2 * m, n), |_| {
                    let re = if rng.gen::<bool>() { amp } else { -amp };
                    let im = if rng.gen::<bool>() { amp } else { -amp };
                    C64::new(re, im)
                })
            })
            .collect();
        Self { streams }
    }

    pub fn n_streams(&self) -> usize {
        self.streams.len()
    }

    pub fn n_symbols(&self) -> usize {
        self.streams[0].ncols()
    }

    pub fn stream(&self, i: usize) -> &Array2<C64> {
        &self.streams[i]
    }

    /// Real part matrix B_n of one stream.
    pub fn b_part(&self, i: usize) -> Array2<f64> {
        self.streams[i].mapv(|v| v.re)
    }

    /// Imaginary part matrix C_n of one stream.
    pub fn c_part(&self, i: usize) -> Array2<f64> {
        self.streams[i].mapv(|v| v.im)
    }

    /// Staggered real grid of one stream.
    pub fn staggered(&self, i: usize) -> Array2<f64> {
        stagger(&self.streams[i])
    }
}

/// Interleave Re/Im parts into 2N real columns (Re at even, Im at odd).
pub fn stagger(symbols: &Array2<C64>) -> Array2<f64> {
    let (rows, n) = symbols.dim();
    let mut out = Array2::zeros((rows, 2 * n));
    for j in 0..n {
        for k in 0..rows {
            out[(k, 2 * j)] = symbols[(k, j)].re;
            out[(k, 2 * j + 1)] = symbols[(k, j)].im;
        }
    }
    out
}

/// Bookkeeping inverse of [`stagger`]: no filtering, just re-pairs columns.
pub fn unstagger(grid: &Array2<f64>) -> Result<Array2<C64>> {
    let (rows, cols) = grid.dim();
    if cols % 2 != 0 {
        return Err(Error::ShapeMismatch(format!("staggered grid has odd column count {cols}")));
    }
    let n = cols / 2;
    Ok(Array2::from_shape_fn((rows, n), |(k, j)| {
        C64::new(grid[(k, 2 * j)], grid[(k, 2 * j + 1)])
    }))
}

/// Lift a real staggered grid to the complex grid the chain operates on.
pub fn complexify(grid: &Array2<f64>) -> Array2<C64> {
    grid.mapv(|v| C64::new(v, 0.0))
}

fn check_pulse_len(pulse: &[f64], c: &ModulatorConstants) -> Result<usize> {
    let two_m = c.subcarriers();
    if pulse.is_empty() || pulse.len() % two_m != 0 {
        return Err(Error::ShapeMismatch(format!(
            "pulse length {} is not a multiple of 2M = {two_m}",
            pulse.len()
        )));
    }
    Ok(pulse.len() / two_m)
}

/// Fast polyphase synthesis: IFFT per staggered column, overlap-add at
/// M-sample offsets under the pulse window.
///
/// Output length is (T-1)M + 2Mκ for T staggered columns.
pub fn synthesize(
    staggered: &Array2<C64>,
    pulse: &[f64],
    c: &ModulatorConstants,
) -> Result<Vec<C64>> {
    let two_m = c.subcarriers();
    let m = c.m();
    check_pulse_len(pulse, c)?;
    if staggered.nrows() != two_m {
        return Err(Error::ShapeMismatch(format!(
            "staggered grid has {} rows, expected {two_m}",
            staggered.nrows()
        )));
    }
    let t_cols = staggered.ncols();
    let len = pulse.len();
    let mut out = vec![C64::new(0.0, 0.0); (t_cols.saturating_sub(1)) * m + len];
    let mut buf = vec![C64::new(0.0, 0.0); two_m];
    for t in 0..t_cols {
        // j^{t mod 2} joins the per-subcarrier phase conj(Φ)_k = j^k e^{jω_k/2}.
        let slot = if t % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        for k in 0..two_m {
            buf[k] = staggered[(k, t)] * c.phi[k].conj() * slot;
        }
        c.plan.inverse(&mut buf);
        let base = t * m;
        for (mm, &p) in pulse.iter().enumerate() {
            out[base + mm] += buf[mm % two_m] * p;
        }
    }
    Ok(out)
}

/// Received grid before de-staggering: 2M×(2N+2κ).
#[derive(Debug, Clone)]
pub struct DemodGrid {
    pub z: Array2<C64>,
    kappa: usize,
}

impl DemodGrid {
    pub fn new(z: Array2<C64>, kappa: usize) -> Result<Self> {
        if z.ncols() < 2 * kappa || (z.ncols() - 2 * kappa) % 2 != 0 {
            return Err(Error::ShapeMismatch(format!(
                "grid with {} columns cannot be 2N + 2κ for κ = {kappa}",
                z.ncols()
            )));
        }
        Ok(Self { z, kappa })
    }

    pub fn zeros(two_m: usize, n_symbols: usize, kappa: usize) -> Self {
        Self { z: Array2::zeros((two_m, 2 * n_symbols + 2 * kappa)), kappa }
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Number of complex multicarrier symbols N carried by the grid.
    pub fn n_symbols(&self) -> usize {
        (self.z.ncols() - 2 * self.kappa) / 2
    }

    /// Columns 2, 4, ... (1-based) of the grid.
    pub fn z_odd(&self) -> Array2<C64> {
        self.z.slice(s![.., 1..;2]).to_owned()
    }

    /// Columns 1, 3, ... (1-based) of the grid.
    pub fn z_even(&self) -> Array2<C64> {
        self.z.slice(s![.., 0..;2]).to_owned()
    }

    /// De-stagger the ℓ-th multicarrier symbol (1-based, interior only:
    /// κ ≤ ℓ ≤ N-κ): ŝ = Re{Z_odd}_{:,ℓ+κ-1} + j·Im{Z_even}_{:,ℓ+κ}.
    pub fn destagger(&self, ell: usize) -> Result<Array1<C64>> {
        let n = self.n_symbols();
        if ell < self.kappa || ell + self.kappa > n {
            return Err(Error::InvalidParam(format!(
                "symbol index {ell} outside interior range {}..={}",
                self.kappa,
                n.saturating_sub(self.kappa)
            )));
        }
        let l0 = ell - 1;
        let odd_col = 2 * l0 + 2 * self.kappa - 1;
        let even_col = odd_col + 1;
        Ok(Array1::from_shape_fn(self.z.nrows(), |k| {
            C64::new(self.z[(k, odd_col)].re, self.z[(k, even_col)].im)
        }))
    }

    /// Interior symbol range κ..=N-κ (1-based).
    pub fn interior_symbols(&self) -> std::ops::RangeInclusive<usize> {
        self.kappa..=self.n_symbols() - self.kappa
    }
}

/// Matched-filter analysis bank producing the retained 2M×(2N+2κ) grid.
/// The signal length must be exactly (2N-1)M + 2Mκ for some N.
pub fn analyze(signal: &[C64], pulse: &[f64], c: &ModulatorConstants) -> Result<DemodGrid> {
    let m = c.m();
    let len = pulse.len();
    if signal.len() < len || (signal.len() - len) % m != 0 {
        return Err(Error::ShapeMismatch(format!(
            "signal length {} is not (2N-1)M + 2Mκ for M = {m}, κ = {}",
            signal.len(),
            len / (2 * m)
        )));
    }
    let t_cols = (signal.len() - len) / m + 1;
    if t_cols % 2 != 0 {
        return Err(Error::ShapeMismatch(format!(
            "signal length {} implies an odd number of half-symbols",
            signal.len()
        )));
    }
    analyze_n(signal, pulse, c, t_cols / 2)
}

/// Analysis bank with an explicit symbol count; accepts any signal length
/// (samples outside the buffer are treated as zero). Used when the received
/// signal carries a channel tail.
pub fn analyze_n(
    signal: &[C64],
    pulse: &[f64],
    c: &ModulatorConstants,
    n_symbols: usize,
) -> Result<DemodGrid> {
    let two_m = c.subcarriers();
    let m = c.m();
    let kappa = check_pulse_len(pulse, c)?;
    let len = pulse.len();
    let cols = 2 * n_symbols + 2 * kappa;
    let mut z = Array2::zeros((two_m, cols));
    let mut fold = vec![C64::new(0.0, 0.0); two_m];
    let inv_m = 1.0 / m as f64;
    for i in 0..cols {
        let v = i as i64 + 1 - 2 * kappa as i64;
        let start = v * m as i64;
        fold.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        for mm in 0..len {
            let idx = start + mm as i64;
            if idx >= 0 && (idx as usize) < signal.len() {
                fold[mm % two_m] += signal[idx as usize] * pulse[len - 1 - mm];
            }
        }
        c.plan.forward(&mut fold);
        for k in 0..two_m {
            z[(k, i)] = fold[k] * c.phi[k] * inv_m;
        }
    }
    DemodGrid::new(z, kappa)
}

/// Textbook per-subcarrier synthesis: explicit loops, explicit modulation,
/// no FFT, no polyphase. Small M only.
pub fn direct_chain_oracle(
    staggered: &Array2<C64>,
    pulse: &[f64],
    c: &ModulatorConstants,
) -> Result<Vec<C64>> {
    let two_m = c.subcarriers();
    let m = c.m();
    check_pulse_len(pulse, c)?;
    if staggered.nrows() != two_m {
        return Err(Error::ShapeMismatch("staggered grid row count".into()));
    }
    let t_cols = staggered.ncols();
    let len = pulse.len();
    let mut out = vec![C64::new(0.0, 0.0); (t_cols.saturating_sub(1)) * m + len];
    for t in 0..t_cols {
        for k in 0..two_m {
            let amp = staggered[(k, t)];
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            // j^{k + (t mod 2)}
            let quarter_turns = (k + (t % 2)) % 4;
            let rot = match quarter_turns {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            let omega = c.omega(k);
            for (mm, &p) in pulse.iter().enumerate() {
                let phase = C64::from_polar(1.0, omega * (mm as f64 + 0.5));
                out[t * m + mm] += amp * rot * p * phase;
            }
        }
    }
    Ok(out)
}

/// Full (non-truncating) FIR convolution; taps[d] is the gain at delay d.
pub fn fir_convolve(signal: &[C64], taps: &[C64]) -> Vec<C64> {
    if signal.is_empty() || taps.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); signal.len() + taps.len() - 1];
    for (d, &h) in taps.iter().enumerate() {
        if h == C64::new(0.0, 0.0) {
            continue;
        }
        for (n, &x) in signal.iter().enumerate() {
            out[n + d] += x * h;
        }
    }
    out
}

/// Ideal-channel chain: synthesis followed by analysis with possibly
/// different pulses at the two sides.
pub fn ideal_chain(
    staggered: &Array2<C64>,
    tx_pulse: &[f64],
    rx_pulse: &[f64],
    c: &ModulatorConstants,
) -> Result<DemodGrid> {
    let signal = synthesize(staggered, tx_pulse, c)?;
    analyze(&signal, rx_pulse, c)
}

/// Closed-form ideal-channel demodulated grid, built directly from the R and
/// S matrices: each output column mixes the per-column transforms of the
/// staggered data with columns of R (direct part) and S (quadrature part,
/// with crossed transform halves and a one-column stagger between them).
pub fn ideal_demod_closed_form(
    staggered: &Array2<C64>,
    pm: &PulseMatrices,
    c: &ModulatorConstants,
) -> Result<DemodGrid> {
    let two_m = c.subcarriers();
    let m = c.m();
    if pm.subcarriers() != two_m || staggered.nrows() != two_m {
        return Err(Error::ShapeMismatch("pulse matrices / grid size".into()));
    }
    if staggered.ncols() % 2 != 0 {
        return Err(Error::ShapeMismatch("staggered grid needs an even column count".into()));
    }
    let n = staggered.ncols() / 2;
    let kappa = pm.kappa();
    let r_cols = 2 * kappa - 1;

    // G_b[:,j] = unscaled IDFT of Φ* b_j, G_c[:,j] same for j·c_j.
    let mut g_b = Array2::zeros((two_m, n));
    let mut g_c = Array2::zeros((two_m, n));
    let mut buf = vec![C64::new(0.0, 0.0); two_m];
    for j in 0..n {
        for k in 0..two_m {
            buf[k] = staggered[(k, 2 * j)] * c.phi[k].conj();
        }
        c.plan.inverse(&mut buf);
        g_b.column_mut(j).iter_mut().zip(&buf).for_each(|(d, &v)| *d = v);
        for k in 0..two_m {
            buf[k] = staggered[(k, 2 * j + 1)] * c.phi[k].conj() * C64::new(0.0, 1.0);
        }
        c.plan.inverse(&mut buf);
        g_c.column_mut(j).iter_mut().zip(&buf).for_each(|(d, &v)| *d = v);
    }

    let mut grid = DemodGrid::zeros(two_m, n, kappa);
    let mut w = vec![C64::new(0.0, 0.0); two_m];
    let scale = 1.0 / m as f64;
    // part 0: odd half-grid (direct data = b, quadrature = jc);
    // part 1: even half-grid (roles swapped, R read one column earlier).
    for part in 0..2 {
        let (g_dir, g_quad) = if part == 0 { (&g_b, &g_c) } else { (&g_c, &g_b) };
        for m0 in 0..n + kappa {
            w.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
            for j0 in 0..n {
                if m0 < j0 {
                    continue;
                }
                let cr = m0 - j0;
                if cr >= part && cr - part < r_cols {
                    for k in 0..two_m {
                        w[k] += g_dir[(k, j0)] * pm.r[(k, cr - part)];
                    }
                }
                // S couples with crossed transform halves: top rows of S read
                // the lower half of the quadrature transform one column early.
                if cr >= 1 && cr - 1 < r_cols {
                    for rho in 0..m {
                        w[rho] += g_quad[(m + rho, j0)] * pm.s[(rho, cr - 1)];
                    }
                }
                if cr < r_cols {
                    for sig in 0..m {
                        w[m + sig] += g_quad[(sig, j0)] * pm.s[(m + sig, cr)];
                    }
                }
            }
            c.plan.forward(&mut w);
            let out_col = 2 * m0 + 1 - part;
            for k in 0..two_m {
                grid.z[(k, out_col)] = w[k] * c.phi[k] * scale;
            }
        }
    }
    Ok(grid)
}

/// Shifted receive polyphase matrix Q(ℓ), 2M×(κ+2), for -M < ℓ ≤ M.
fn shifted_q(q: &Array2<f64>, ell: i64) -> Array2<f64> {
    let (rows, kappa) = q.dim();
    let mut out = Array2::zeros((rows, kappa + 2));
    for r in 0..rows as i64 {
        let src = r - ell;
        // column offset: wrapped rows move one FFT period (one column).
        let (row, off) = if src < 0 {
            (src + rows as i64, 2)
        } else if src >= rows as i64 {
            (src - rows as i64, 0)
        } else {
            (src, 1)
        };
        for cc in 0..kappa {
            out[(r as usize, cc + off as usize)] = q[(row as usize, cc)];
        }
    }
    out
}

/// Row-wise convolution of an M-row block of P against the J_M-reversed
/// M-row block of a shifted Q, producing 2κ+1 columns.
fn block_conv(p_block: ndarray::ArrayView2<f64>, q_block: ndarray::ArrayView2<f64>) -> Array2<f64> {
    let m = p_block.nrows();
    let out_cols = p_block.ncols() + q_block.ncols() - 1;
    let mut out = Array2::zeros((m, out_cols));
    for r in 0..m {
        let q_rev = q_block.row(m - 1 - r);
        for (i, &a) in p_block.row(r).iter().enumerate() {
            for (j, &b) in q_rev.iter().enumerate() {
                out[(r, i + j)] += a * b;
            }
        }
    }
    out
}

/// Balanced remainder δ = 2Mλ + δ̃ with δ̃ ∈ (-M, M].
fn balanced_rem(delta: i64, two_m: i64) -> (i64, i64) {
    let mut rem = delta.rem_euclid(two_m);
    if rem > two_m / 2 {
        rem -= two_m;
    }
    ((delta - rem) / two_m, rem)
}

/// Exact demodulated grid for a scalar FIR channel, evaluated from the
/// tap-shifted pulse structure (no time-domain filtering).
///
/// `taps[d]` is the channel gain at integer delay d; delays must stay below
/// one FFT period (2M samples).
pub fn channel_demod_closed_form(
    staggered: &Array2<C64>,
    pm: &PulseMatrices,
    taps: &[C64],
    c: &ModulatorConstants,
) -> Result<DemodGrid> {
    let two_m = c.subcarriers();
    let m = c.m();
    if pm.subcarriers() != two_m || staggered.nrows() != two_m {
        return Err(Error::ShapeMismatch("pulse matrices / grid size".into()));
    }
    if staggered.ncols() % 2 != 0 {
        return Err(Error::ShapeMismatch("staggered grid needs an even column count".into()));
    }
    if taps.len() > two_m {
        return Err(Error::InvalidParam(format!(
            "FIR delay span {} exceeds one FFT period (2M = {two_m})",
            taps.len()
        )));
    }
    let n = staggered.ncols() / 2;
    let kappa = pm.kappa();
    let cols = 2 * n + 2 * kappa;
    let struct_cols = 2 * kappa + 1;

    // Per-column transforms x_t = IDFT(Φ* · j^{t mod 2} · u_t), unscaled.
    let t_cols = staggered.ncols();
    let mut x = Array2::zeros((two_m, t_cols));
    let mut buf = vec![C64::new(0.0, 0.0); two_m];
    for t in 0..t_cols {
        let slot = if t % 2 == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        for k in 0..two_m {
            buf[k] = staggered[(k, t)] * c.phi[k].conj() * slot;
        }
        c.plan.inverse(&mut buf);
        x.column_mut(t).iter_mut().zip(&buf).for_each(|(d, &v)| *d = v);
    }

    let mut grid = DemodGrid::zeros(two_m, n, kappa);
    let mut g = vec![C64::new(0.0, 0.0); two_m];
    let scale = 1.0 / m as f64;
    for (delay, &gain) in taps.iter().enumerate() {
        if gain == C64::new(0.0, 0.0) {
            continue;
        }
        let (lambda, rem) = balanced_rem(delay as i64, two_m as i64);
        let q_shift = shifted_q(&pm.q, rem);
        let r_shift = {
            // P ⊛ J_{2M} Q(rem), assembled from half blocks.
            let top = block_conv(pm.p.slice(s![..m, ..]), q_shift.slice(s![m.., ..]));
            let bot = block_conv(pm.p.slice(s![m.., ..]), q_shift.slice(s![..m, ..]));
            let mut full = Array2::zeros((two_m, struct_cols));
            full.slice_mut(s![..m, ..]).assign(&top);
            full.slice_mut(s![m.., ..]).assign(&bot);
            full
        };
        let t1 = block_conv(pm.p.slice(s![..m, ..]), q_shift.slice(s![..m, ..]));
        let t2 = block_conv(pm.p.slice(s![m.., ..]), q_shift.slice(s![m.., ..]));
        // Θ^δ uses the true delay, not its balanced remainder.
        let theta_pow: Vec<C64> = (0..two_m)
            .map(|k| C64::from_polar(1.0, -c.omega(k) * delay as f64))
            .collect();

        for i in 0..cols {
            let v = i as i64 + 1 - 2 * kappa as i64;
            for t in 0..t_cols {
                let d = v - t as i64;
                let (col, odd_gap) = if d.rem_euclid(2) == 0 {
                    (d / 2 + kappa as i64 - lambda, false)
                } else {
                    (d.div_euclid(2) + kappa as i64 - lambda, true)
                };
                g.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                let mut any = false;
                if !odd_gap {
                    if col >= 0 && (col as usize) < struct_cols {
                        let cc = col as usize;
                        for k in 0..two_m {
                            g[k] = x[(k, t)] * r_shift[(k, cc)];
                        }
                        any = true;
                    }
                } else {
                    let ct = col + 1;
                    if ct >= 0 && (ct as usize) < struct_cols {
                        for rho in 0..m {
                            g[rho] = x[(rho, t)] * t1[(rho, ct as usize)];
                        }
                        any = true;
                    }
                    if col >= 0 && (col as usize) < struct_cols {
                        for sig in 0..m {
                            g[m + sig] = x[(m + sig, t)] * t2[(sig, col as usize)];
                        }
                        any = true;
                    }
                }
                if !any {
                    continue;
                }
                if odd_gap {
                    // odd half-symbol gaps carry a (-1)^k factor: rotate by M.
                    g.rotate_left(m);
                }
                c.plan.forward(&mut g);
                for k in 0..two_m {
                    grid.z[(k, i)] += gain * theta_pow[k] * c.phi[k] * g[k] * scale;
                }
            }
        }
    }
    Ok(grid)
}
