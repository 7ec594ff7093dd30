//! Prototype pulse design and pulse-specific quantities of the distortion
//! analysis.
//!
//! Pulses are frequency-sampling (PHYDYAS-style) cosine sums
//!
//! ```text
//! p(τ) = P_0 + 2 Σ_{j=1}^{κ-1} P_j cos(2πjτ/κ),   τ ∈ [-κ/2, κ/2]
//! ```
//!
//! discretised on τ_n = (2n+1-2Mκ)/(4M), n = 0..2Mκ. Time is measured in
//! multicarrier symbol periods (T_s ≡ 1); the symbol-period prefactor of the
//! r-th derivative pulse cancels against differentiation, so all derivative
//! pulses are scale-free. Derivatives are exact: each cosine term maps to
//! `2 P_j (2πj/κ)^r cos(2πjτ/κ + rπ/2)`.
//!
//! Pulse energy is normalised so that Σ_n p[n]² = M. Under this convention a
//! perfect-reconstruction pair satisfies U⁺R(p,q) = I exactly and the ideal
//! single-tap chain has unit symbol gain.

use crate::error::{Error, Result};
use ndarray::Array2;

/// Default cap on cached derivative orders (supports K_T = K_R ≤ 3).
pub const MAX_DERIVATIVE_ORDER: usize = 6;

/// Published PHYDYAS frequency-sampling coefficient P_1 for κ = 3.
const PHYDYAS_P1_K3: f64 = 0.911_438;
/// Published PHYDYAS frequency-sampling coefficient P_1 for κ = 4.
const PHYDYAS_P1_K4: f64 = 0.971_960;

/// Cosine-sum representation of a frequency-sampling waveform derivative.
///
/// Differentiation stays inside the family: it scales each term by 2πj/κ and
/// advances its phase by π/2, so arbitrary orders can be chained without any
/// finite differencing.
#[derive(Debug, Clone)]
pub struct CosineSum {
    coeffs: Vec<f64>,
    kappa: usize,
    order: usize,
}

impl CosineSum {
    pub fn new(coeffs: Vec<f64>, kappa: usize) -> Self {
        Self { coeffs, kappa, order: 0 }
    }

    /// Analytic derivative, still a `CosineSum`.
    pub fn differentiate(&self) -> Self {
        Self {
            coeffs: self.coeffs.clone(),
            kappa: self.kappa,
            order: self.order + 1,
        }
    }

    /// Evaluate at normalised time τ (multicarrier symbol periods).
    pub fn eval(&self, tau: f64) -> f64 {
        let kappa = self.kappa as f64;
        let mut acc = if self.order == 0 { self.coeffs[0] } else { 0.0 };
        for (j, &c) in self.coeffs.iter().enumerate().skip(1) {
            let w = 2.0 * std::f64::consts::PI * j as f64 / kappa;
            let phase = w * tau + self.order as f64 * std::f64::consts::FRAC_PI_2;
            acc += 2.0 * c * w.powi(self.order as i32) * phase.cos();
        }
        acc
    }

    /// Sample on the length-2Mκ grid τ_n = (2n+1-2Mκ)/(4M).
    pub fn sample(&self, m: usize) -> Vec<f64> {
        let len = 2 * m * self.kappa;
        (0..len)
            .map(|n| {
                let tau = (2.0 * n as f64 + 1.0 - len as f64) / (4.0 * m as f64);
                self.eval(tau)
            })
            .collect()
    }
}

/// A discretised prototype pulse with cached analytic derivative pulses.
#[derive(Debug, Clone)]
pub struct PrototypePulse {
    m_half: usize,
    kappa: usize,
    analog_coeffs: Vec<f64>,
    /// derivatives[r][n] = p^(r)[n]; derivatives[0] are the samples.
    derivatives: Vec<Vec<f64>>,
}

impl PrototypePulse {
    /// Build a pulse from frequency-sampling coefficients P_0..P_{κ-1},
    /// rescaled so that Σ_n p[n]² = M.
    pub fn from_freq_coeffs(m: usize, coeffs: &[f64], max_order: usize) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParam("empty coefficient vector".into()));
        }
        if m == 0 {
            return Err(Error::InvalidParam("M must be positive".into()));
        }
        let kappa = coeffs.len();
        let raw = CosineSum::new(coeffs.to_vec(), kappa).sample(m);
        let energy: f64 = raw.iter().map(|x| x * x).sum();
        if energy <= 0.0 {
            return Err(Error::InvalidParam("pulse has zero energy".into()));
        }
        let scale = (m as f64 / energy).sqrt();
        let scaled: Vec<f64> = coeffs.iter().map(|c| c * scale).collect();

        let mut term = CosineSum::new(scaled.clone(), kappa);
        let mut derivatives = Vec::with_capacity(max_order + 1);
        for _ in 0..=max_order {
            derivatives.push(term.sample(m));
            term = term.differentiate();
        }
        Ok(Self { m_half: m, kappa, analog_coeffs: scaled, derivatives })
    }

    /// The PHYDYAS near-PR prototype with overlapping factor κ ∈ {3, 4}.
    ///
    /// Coefficients follow the frequency-sampling constraint
    /// P_j² + P_{κ-j}² = 1 anchored on the published P_1 value; near-PR is
    /// verified by [`pr_residuals`], not assumed.
    pub fn phydyas(m: usize, kappa: usize) -> Result<Self> {
        if !m.is_power_of_two() {
            return Err(Error::InvalidParam(format!("M = {m} is not a power of two")));
        }
        let coeffs = match kappa {
            3 => vec![1.0, PHYDYAS_P1_K3, (1.0 - PHYDYAS_P1_K3 * PHYDYAS_P1_K3).sqrt()],
            4 => vec![
                1.0,
                PHYDYAS_P1_K4,
                std::f64::consts::FRAC_1_SQRT_2,
                (1.0 - PHYDYAS_P1_K4 * PHYDYAS_P1_K4).sqrt(),
            ],
            other => {
                return Err(Error::InvalidParam(format!(
                    "overlapping factor {other} not supported (expected 3 or 4)"
                )))
            }
        };
        Self::from_freq_coeffs(m, &coeffs, MAX_DERIVATIVE_ORDER)
    }

    /// Rectangular κ = 1 pulse: the exact-PR reference pair (p = q).
    ///
    /// All derivative pulses vanish, so it is only meaningful for single-stage
    /// chains; used to pin the perfect-reconstruction floor in tests.
    pub fn rectangular_pr(m: usize) -> Result<Self> {
        Self::from_freq_coeffs(m, &[1.0], MAX_DERIVATIVE_ORDER)
    }

    pub fn samples(&self) -> &[f64] {
        &self.derivatives[0]
    }

    /// p^(r)[n]; `r = 0` returns the samples themselves.
    pub fn derivative(&self, r: usize) -> Result<&[f64]> {
        self.derivatives.get(r).map(Vec::as_slice).ok_or(Error::DerivativeOrder {
            requested: r,
            max: self.derivatives.len() - 1,
        })
    }

    pub fn len(&self) -> usize {
        2 * self.m_half * self.kappa
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m(&self) -> usize {
        self.m_half
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn max_order(&self) -> usize {
        self.derivatives.len() - 1
    }

    pub fn freq_coeffs(&self) -> &[f64] {
        &self.analog_coeffs
    }

    /// Polyphase matrix of the r-th derivative pulse.
    pub fn polyphase(&self, r: usize) -> Result<Array2<f64>> {
        polyphase_matrix(self.derivative(r)?, self.m_half, self.kappa)
    }
}

/// Arrange samples in the 2M×κ polyphase matrix: entry (k, c) = samples[k + 2Mc].
pub fn polyphase_matrix(samples: &[f64], m: usize, kappa: usize) -> Result<Array2<f64>> {
    let rows = 2 * m;
    if samples.len() != rows * kappa {
        return Err(Error::ShapeMismatch(format!(
            "expected {} samples for M = {m}, κ = {kappa}, got {}",
            rows * kappa,
            samples.len()
        )));
    }
    let mut out = Array2::zeros((rows, kappa));
    for k in 0..rows {
        for c in 0..kappa {
            out[(k, c)] = samples[k + rows * c];
        }
    }
    Ok(out)
}

/// Transmit/receive polyphase matrices together with their row-wise
/// convolution products R and S.
#[derive(Debug, Clone)]
pub struct PulseMatrices {
    /// Transmit polyphase matrix, 2M×κ.
    pub p: Array2<f64>,
    /// Receive polyphase matrix, 2M×κ.
    pub q: Array2<f64>,
    /// R(p,q) = P ⊛ J_{2M} Q, 2M×(2κ-1).
    pub r: Array2<f64>,
    /// S(p,q) = (J_2 ⊗ I_M) P ⊛ J_{2M} Q, 2M×(2κ-1).
    pub s: Array2<f64>,
}

impl PulseMatrices {
    pub fn subcarriers(&self) -> usize {
        self.p.nrows()
    }

    pub fn kappa(&self) -> usize {
        self.p.ncols()
    }

    /// Build the matrices from derivative orders (rt, rr) of a pulse pair.
    pub fn from_pulses(
        tx: &PrototypePulse,
        tx_order: usize,
        rx: &PrototypePulse,
        rx_order: usize,
    ) -> Result<Self> {
        let p = tx.polyphase(tx_order)?;
        let q = rx.polyphase(rx_order)?;
        rs_matrices(&p, &q)
    }
}

fn conv(a: &[f64], b: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
}

/// Row-wise convolution products of two polyphase matrices.
///
/// Row k of R is the convolution of row k of P with row 2M-1-k of Q; S uses
/// the half-swapped rows of P instead.
pub fn rs_matrices(p: &Array2<f64>, q: &Array2<f64>) -> Result<PulseMatrices> {
    if p.dim() != q.dim() {
        return Err(Error::ShapeMismatch(format!("P is {:?}, Q is {:?}", p.dim(), q.dim())));
    }
    let (rows, kappa) = p.dim();
    if rows % 2 != 0 || rows == 0 {
        return Err(Error::ShapeMismatch(format!("polyphase row count {rows} is not even")));
    }
    let m = rows / 2;
    let mut r = Array2::zeros((rows, 2 * kappa - 1));
    let mut s = Array2::zeros((rows, 2 * kappa - 1));
    let mut buf = vec![0.0; 2 * kappa - 1];
    for k in 0..rows {
        let q_rev = q.row(rows - 1 - k);
        conv(p.row(k).as_slice().unwrap(), q_rev.as_slice().unwrap(), &mut buf);
        r.row_mut(k).iter_mut().zip(&buf).for_each(|(d, &v)| *d = v);
        let swapped = (k + m) % rows;
        conv(p.row(swapped).as_slice().unwrap(), q_rev.as_slice().unwrap(), &mut buf);
        s.row_mut(k).iter_mut().zip(&buf).for_each(|(d, &v)| *d = v);
    }
    Ok(PulseMatrices { p: p.clone(), q: q.clone(), r, s })
}

/// Row pairing induced by I_2 ⊗ J_M (mirror within each half).
#[inline]
fn mirror_row(k: usize, m: usize) -> usize {
    if k < m {
        m - 1 - k
    } else {
        3 * m - 1 - k
    }
}

/// tr[X1 X2ᵀ U±] without materialising U±.
fn trace_u(x1: &Array2<f64>, x2: &Array2<f64>, plus: bool) -> f64 {
    let m = x1.nrows() / 2;
    let sign = if plus { 1.0 } else { -1.0 };
    let mut acc = 0.0;
    for k in 0..x1.nrows() {
        let direct: f64 = x1.row(k).iter().zip(x2.row(k)).map(|(a, b)| a * b).sum();
        let mirrored: f64 =
            x1.row(k).iter().zip(x2.row(mirror_row(k, m))).map(|(a, b)| a * b).sum();
        acc += direct + sign * mirrored;
    }
    acc
}

/// R - ½I with I the ones-in-central-column matrix.
fn r_minus_half_identity(r: &Array2<f64>) -> Array2<f64> {
    let mut out = r.clone();
    let central = r.ncols() / 2;
    for k in 0..r.nrows() {
        out[(k, central)] -= 0.5;
    }
    out
}

/// Residuals of the perfect-reconstruction conditions plus the NPR distortion
/// floor δ.
#[derive(Debug, Clone, Copy)]
pub struct PrResiduals {
    /// δ = (P_s/2M) tr[(R-½I)(R-½I)ᵀU⁺ + S SᵀU⁻]; zero under PR.
    pub delta: f64,
    /// ‖U⁺R - I‖_F.
    pub r_residual: f64,
    /// ‖U⁻S‖_F.
    pub s_residual: f64,
}

/// Evaluate the PR residuals of a pulse pair at symbol power `p_s`.
pub fn pr_residuals(pm: &PulseMatrices, p_s: f64) -> PrResiduals {
    let rows = pm.r.nrows();
    let m = rows / 2;
    let central = pm.r.ncols() / 2;

    let mut r_res = 0.0;
    let mut s_res = 0.0;
    for k in 0..rows {
        for c in 0..pm.r.ncols() {
            let sym = pm.r[(k, c)] + pm.r[(mirror_row(k, m), c)] - if c == central { 1.0 } else { 0.0 };
            let asym = pm.s[(k, c)] - pm.s[(mirror_row(k, m), c)];
            r_res += sym * sym;
            s_res += asym * asym;
        }
    }

    let rc = r_minus_half_identity(&pm.r);
    let delta = p_s / (rows as f64) * (trace_u(&rc, &rc, true) + trace_u(&pm.s, &pm.s, false));
    PrResiduals { delta, r_residual: r_res.sqrt(), s_residual: s_res.sqrt() }
}

/// Ordering of the U⁺/U⁻ weights in the second-moment trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignOrder {
    /// tr[R₁R₂ᵀU⁺ + S₁S₂ᵀU⁻]; second moment of the in-phase component.
    PlusMinus,
    /// tr[R₁R₂ᵀU⁻ + S₁S₂ᵀU⁺]; second moment of the quadrature component.
    MinusPlus,
}

/// Pulse-pair second-moment quantity η.
pub fn eta(pm1: &PulseMatrices, pm2: &PulseMatrices, order: SignOrder, p_s: f64) -> f64 {
    let rows = pm1.r.nrows() as f64;
    let plus_first = order == SignOrder::PlusMinus;
    p_s / rows
        * (trace_u(&pm1.r, &pm2.r, plus_first) + trace_u(&pm1.s, &pm2.s, !plus_first))
}

/// NPR cross term μ between the base pair and a derivative pair.
pub fn mu(pm_base: &PulseMatrices, pm_deriv: &PulseMatrices, p_s: f64) -> f64 {
    let rows = pm_base.r.nrows() as f64;
    let rc = r_minus_half_identity(&pm_base.r);
    p_s / rows * (trace_u(&rc, &pm_deriv.r, true) + trace_u(&pm_base.s, &pm_deriv.s, false))
}

/// Binomial coefficient as f64 (small arguments only).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// μ̃ combination: Σ_{j=K}^{ℓ} (-1)^{j+K} C(ℓ,j) C(j-1,K-1) μ_{(j, m-j)}.
///
/// `mu_lookup(a, b)` must return μ for the derivative-pair orders (a, b).
pub fn mu_tilde(mu_lookup: impl Fn(usize, usize) -> f64, ell: usize, m: usize, k: usize) -> Result<f64> {
    if !(k <= ell && ell <= m) {
        return Err(Error::InvalidParam(format!("need K ≤ ℓ ≤ m, got K={k}, ℓ={ell}, m={m}")));
    }
    let mut acc = 0.0;
    for j in k..=ell {
        let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(ell, j) * binomial(j - 1, k - 1) * mu_lookup(j, m - j);
    }
    Ok(acc)
}

/// Precomputed pulse-scalar tables for one (tx, rx) pulse pair, covering all
/// derivative orders needed by the distortion predictor.
#[derive(Debug, Clone)]
pub struct PulseScalars {
    pub p_s: f64,
    pub delta: f64,
    max_order: usize,
    /// μ_{(a,b)} for a + b ≤ max_order.
    mu_table: Vec<Vec<f64>>,
    /// Cached matrices for η lookups, indexed by (tx_order, rx_order).
    matrices: Vec<Vec<PulseMatrices>>,
}

impl PulseScalars {
    /// Compute tables up to combined derivative order `max_order`.
    pub fn compute(
        tx: &PrototypePulse,
        rx: &PrototypePulse,
        p_s: f64,
        max_order: usize,
    ) -> Result<Self> {
        if tx.len() != rx.len() {
            return Err(Error::ShapeMismatch(format!(
                "pulse lengths differ: {} vs {}",
                tx.len(),
                rx.len()
            )));
        }
        let mut matrices = Vec::with_capacity(max_order + 1);
        for a in 0..=max_order {
            let mut row = Vec::with_capacity(max_order + 1);
            for b in 0..=max_order {
                row.push(PulseMatrices::from_pulses(tx, a, rx, b)?);
            }
            matrices.push(row);
        }
        let base = &matrices[0][0];
        let delta = pr_residuals(base, p_s).delta;
        let mut mu_table = vec![vec![0.0; max_order + 1]; max_order + 1];
        for a in 0..=max_order {
            for b in 0..=max_order {
                mu_table[a][b] = mu(base, &matrices[a][b], p_s);
            }
        }
        Ok(Self { p_s, delta, max_order, mu_table, matrices })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn matrices(&self, tx_order: usize, rx_order: usize) -> &PulseMatrices {
        &self.matrices[tx_order][rx_order]
    }

    pub fn mu(&self, tx_order: usize, rx_order: usize) -> f64 {
        self.mu_table[tx_order][rx_order]
    }

    pub fn mu_tilde(&self, ell: usize, m: usize, k: usize) -> Result<f64> {
        mu_tilde(|a, b| self.mu_table[a][b], ell, m, k)
    }

    /// η for derivative pairs (m,n) × (m',n').
    pub fn eta(&self, pair1: (usize, usize), pair2: (usize, usize), order: SignOrder) -> f64 {
        eta(&self.matrices[pair1.0][pair1.1], &self.matrices[pair2.0][pair2.1], order, self.p_s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn dtft(samples: &[f64], omega: f64) -> C64 {
        samples
            .iter()
            .enumerate()
            .map(|(n, &x)| C64::from_polar(x, -omega * n as f64))
            .sum()
    }

    #[test]
    fn phydyas_length_and_symmetry() {
        let p = PrototypePulse::phydyas(64, 3).unwrap();
        assert_eq!(p.samples().len(), 384);
        let s = p.samples();
        for n in 0..s.len() {
            assert!(
                (s[n] - s[s.len() - 1 - n]).abs() < 1e-12,
                "asymmetry at {n}: {} vs {}",
                s[n],
                s[s.len() - 1 - n]
            );
        }
        let energy: f64 = s.iter().map(|x| x * x).sum();
        assert!((energy - 64.0).abs() < 1e-9, "energy {energy} != M");
    }

    #[test]
    fn phydyas_rejects_bad_params() {
        assert!(PrototypePulse::phydyas(64, 5).is_err());
        assert!(PrototypePulse::phydyas(48, 3).is_err());
    }

    #[test]
    fn phydyas_is_near_pr() {
        let p = PrototypePulse::phydyas(64, 3).unwrap();
        let pm = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let res = pr_residuals(&pm, 1.0);
        assert!(res.delta > 0.0, "PHYDYAS is NPR, δ must be positive");
        assert!(res.delta < 1e-3, "near-PR bound violated: δ/P_s = {}", res.delta);
    }

    #[test]
    fn derivative_order_zero_is_samples() {
        let p = PrototypePulse::phydyas(16, 3).unwrap();
        assert_eq!(p.derivative(0).unwrap(), p.samples());
        assert!(p.derivative(MAX_DERIVATIVE_ORDER + 1).is_err());
    }

    #[test]
    fn first_derivative_is_antisymmetric() {
        let p = PrototypePulse::phydyas(32, 3).unwrap();
        let d = p.derivative(1).unwrap();
        for n in 0..d.len() {
            assert!(
                (d[n] + d[d.len() - 1 - n]).abs() < 1e-12,
                "not antisymmetric at {n}"
            );
        }
    }

    #[test]
    fn derivative_chaining_matches_direct_order() {
        let p = PrototypePulse::phydyas(16, 3).unwrap();
        let chained = CosineSum::new(p.freq_coeffs().to_vec(), 3)
            .differentiate()
            .differentiate()
            .sample(16);
        let direct = p.derivative(2).unwrap();
        for (a, b) in chained.iter().zip(direct) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn derivative_spectrum_approaches_frequency_scaling() {
        // ‖P¹(ω) - 2MjωP(ω)‖ / ‖2MjωP(ω)‖ over |ω| ≤ π/(2M) shrinks with M.
        let mut prev = f64::INFINITY;
        for m in [64usize, 128, 256] {
            let p = PrototypePulse::phydyas(m, 3).unwrap();
            let d1 = p.derivative(1).unwrap();
            let mut num: f64 = 0.0;
            let mut den: f64 = 0.0;
            for i in 1..=8 {
                let omega = std::f64::consts::PI / (2.0 * m as f64) * i as f64 / 8.0;
                let lhs = dtft(d1, omega);
                let rhs = C64::new(0.0, 2.0 * m as f64 * omega) * dtft(p.samples(), omega);
                num = num.max((lhs - rhs).norm());
                den = den.max(rhs.norm());
            }
            let rel = num / den;
            assert!(rel < prev, "relative error {rel} did not decrease at M = {m}");
            prev = rel;
        }
    }

    #[test]
    fn polyphase_matrix_layout() {
        let pm = polyphase_matrix(&[1.0, 2.0, 3.0, 4.0], 1, 2).unwrap();
        assert_eq!(pm[(0, 0)], 1.0);
        assert_eq!(pm[(1, 0)], 2.0);
        assert_eq!(pm[(0, 1)], 3.0);
        assert_eq!(pm[(1, 1)], 4.0);
        assert!(polyphase_matrix(&[1.0; 5], 1, 2).is_err());

        let p = PrototypePulse::phydyas(64, 3).unwrap();
        let full = polyphase_matrix(p.samples(), 64, 3).unwrap();
        assert_eq!(full.dim(), (128, 3));
        // Reshaping back column-major over (row, column) recovers the samples.
        for (n, &x) in p.samples().iter().enumerate() {
            assert_eq!(full[(n % 128, n / 128)], x);
        }
    }

    #[test]
    fn rs_matrices_shapes_and_zero() {
        let p = PrototypePulse::rectangular_pr(4).unwrap();
        let pp = p.polyphase(0).unwrap();
        let pm = rs_matrices(&pp, &pp).unwrap();
        assert_eq!(pm.r.ncols(), 1);

        let zq = Array2::zeros(pp.dim());
        let pm0 = rs_matrices(&pp, &zq).unwrap();
        assert!(pm0.r.iter().all(|&x| x == 0.0));
        assert!(pm0.s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn rs_rows_match_scalar_convolution() {
        let p = PrototypePulse::phydyas(64, 3).unwrap();
        let pp = p.polyphase(0).unwrap();
        let pm = rs_matrices(&pp, &pp).unwrap();
        let rows = pp.nrows();
        for k in 0..rows {
            let a: Vec<f64> = pp.row(k).to_vec();
            let b: Vec<f64> = pp.row(rows - 1 - k).to_vec();
            let mut expect = vec![0.0; a.len() + b.len() - 1];
            for i in 0..a.len() {
                for j in 0..b.len() {
                    expect[i + j] += a[i] * b[j];
                }
            }
            for (c, &e) in expect.iter().enumerate() {
                assert!((pm.r[(k, c)] - e).abs() < 1e-12, "row {k} col {c}");
            }
        }
    }

    #[test]
    fn rectangular_pair_is_exactly_pr() {
        let p = PrototypePulse::rectangular_pr(8).unwrap();
        let pm = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let res = pr_residuals(&pm, 1.0);
        assert!(res.delta.abs() < 1e-12, "δ = {}", res.delta);
        assert!(res.r_residual < 1e-12);
        assert!(res.s_residual < 1e-12);
    }

    #[test]
    fn delta_is_linear_in_symbol_power() {
        let p = PrototypePulse::phydyas(32, 3).unwrap();
        let pm = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let d1 = pr_residuals(&pm, 1.0).delta;
        let d2 = pr_residuals(&pm, 2.0).delta;
        assert!((d2 - 2.0 * d1).abs() < 1e-12 * d1.abs().max(1.0));
    }

    #[test]
    fn delta_invariant_under_polyphase_row_relabeling() {
        // Relabeling the polyphase rows by the half-grid swap ρ ↔ (ρ+M) mod 2M
        // (moving the commutator reference by half an FFT period) commutes with
        // the I_2⊗J_M mirror pairing, so δ must not change.
        let m = 8;
        let p = PrototypePulse::phydyas(m, 3).unwrap();
        let base = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let swap_rows = |x: &Array2<f64>| -> Array2<f64> {
            let rows = x.nrows();
            let mut out = x.clone();
            for k in 0..rows {
                out.row_mut(k).assign(&x.row((k + m) % rows));
            }
            out
        };
        let mut relabeled = base.clone();
        relabeled.r = swap_rows(&base.r);
        relabeled.s = swap_rows(&base.s);
        let d0 = pr_residuals(&base, 1.0).delta;
        let d1 = pr_residuals(&relabeled, 1.0).delta;
        assert!(
            (d0 - d1).abs() < 1e-14 * d0.max(1e-12),
            "δ changed under row relabeling: {d0} vs {d1}"
        );
    }

    #[test]
    fn eta_zero_and_symmetry() {
        let p = PrototypePulse::phydyas(16, 3).unwrap();
        let pm1 = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let pm2 = PulseMatrices::from_pulses(&p, 1, &p, 0).unwrap();
        let mut zero = pm1.clone();
        zero.r.fill(0.0);
        zero.s.fill(0.0);
        assert_eq!(eta(&pm1, &zero, SignOrder::PlusMinus, 1.0), 0.0);
        let a = eta(&pm1, &pm2, SignOrder::PlusMinus, 1.0);
        let b = eta(&pm2, &pm1, SignOrder::PlusMinus, 1.0);
        assert!((a - b).abs() < 1e-12 * a.abs().max(1.0), "η not symmetric: {a} vs {b}");
    }

    #[test]
    fn eta_is_bilinear() {
        let p = PrototypePulse::phydyas(8, 3).unwrap();
        let pm1 = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        let pm2 = PulseMatrices::from_pulses(&p, 1, &p, 1).unwrap();
        let base = eta(&pm1, &pm2, SignOrder::MinusPlus, 1.0);
        for scale in [0.5, 2.0, -3.0] {
            let mut scaled = pm1.clone();
            scaled.r.mapv_inplace(|x| x * scale);
            scaled.s.mapv_inplace(|x| x * scale);
            let got = eta(&scaled, &pm2, SignOrder::MinusPlus, 1.0);
            assert!((got - scale * base).abs() < 1e-12 * base.abs().max(1.0));
        }
    }

    #[test]
    fn mu_vanishes_for_pr_pair() {
        let p = PrototypePulse::rectangular_pr(8).unwrap();
        let base = PulseMatrices::from_pulses(&p, 0, &p, 0).unwrap();
        for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
            let pm = PulseMatrices::from_pulses(&p, a, &p, b).unwrap();
            assert!(mu(&base, &pm, 1.0).abs() < 1e-12, "μ({a},{b}) nonzero");
        }
    }

    #[test]
    fn mu_tilde_identities() {
        let p = PrototypePulse::phydyas(16, 3).unwrap();
        let scalars = PulseScalars::compute(&p, &p, 1.0, 4).unwrap();
        // Single-term sum: μ̃^{(K)}_{(K,m)} = μ_{(K, m-K)}.
        for k in 1..=2usize {
            for m in k..=4 {
                let got = scalars.mu_tilde(k, m, k).unwrap();
                let expect = scalars.mu(k, m - k);
                assert!((got - expect).abs() < 1e-14, "K={k}, m={m}");
            }
        }
        // μ̃^{(1)}_{(2,2)} = 2μ_{(1,1)} - μ_{(2,0)}.
        let got = scalars.mu_tilde(2, 2, 1).unwrap();
        let expect = 2.0 * scalars.mu(1, 1) - scalars.mu(2, 0);
        assert!((got - expect).abs() < 1e-14);
        assert!(scalars.mu_tilde(1, 2, 2).is_err());
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(6, 6), 1.0);
    }
}
