//! Monte Carlo symbol error rates over block Rayleigh fading.
//!
//! SISO: each real coordinate of an `n`-dimensional composite point sees an
//! independent real Rayleigh fade, `y[l] = sqrt(P) h[l] x[l] + z[l]`.
//! MIMO: pairs of two-dimensional composite points become complex symbols of a
//! 2x2 Alamouti block over an i.i.d. `CN(0, 1)` channel.
//!
//! Every trial draws from its own ChaCha8 stream keyed by `(snr index, trial)`,
//! so a curve is reproducible bit for bit from its seed regardless of the
//! number of worker threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::analysis::StbcScaling;
use crate::constellation::CompositeScheme;
use crate::error::{NomaError, Result};

/// Description of the generator recorded in run metadata.
pub const RNG_DESCRIPTION: &str = "ChaCha8Rng; stream = (snr_index << 40) | trial";

/// Smallest accepted number of trials per SNR point.
pub const MIN_TRIALS: u64 = 10_000;

/// Error count at which optional early stopping ends an SNR point.
pub const EARLY_STOP_ERRORS: u64 = 400;

const MAX_DIM: usize = 32;
/// Trials per scheduling round; stop rules are evaluated between rounds.
const ROUND: u64 = 1 << 16;
const CHUNK: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    SisoRayleigh,
    /// Alamouti over `mr x mt` Rayleigh; only `2 x 2` is supported.
    MimoRayleigh {
        mt: usize,
        mr: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub kind: ChannelKind,
    /// User 1's average SNR per point, in dB.
    pub snr_db_user1: Vec<f64>,
    /// User 1 minus user 2 average SNR, in dB.
    pub snr_gap_db: f64,
}

impl ChannelConfig {
    pub fn siso(snr_db: Vec<f64>) -> Self {
        Self {
            kind: ChannelKind::SisoRayleigh,
            snr_db_user1: snr_db,
            snr_gap_db: 0.0,
        }
    }

    pub fn alamouti(snr_db_user1: Vec<f64>, snr_gap_db: f64) -> Self {
        Self {
            kind: ChannelKind::MimoRayleigh { mt: 2, mr: 2 },
            snr_db_user1,
            snr_gap_db,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db_user1.is_empty() {
            return Err(NomaError::ConfigInvalid {
                field: "snr_db",
                reason: "at least one SNR point is required".into(),
            });
        }
        if self.snr_db_user1.iter().any(|s| !s.is_finite())
            || self.snr_db_user1.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(NomaError::ConfigInvalid {
                field: "snr_db",
                reason: "SNR points must be finite and strictly increasing".into(),
            });
        }
        if !(self.snr_gap_db >= 0.0 && self.snr_gap_db.is_finite()) {
            return Err(NomaError::ConfigInvalid {
                field: "snr_gap_db",
                reason: format!("must be finite and >= 0, got {}", self.snr_gap_db),
            });
        }
        if let ChannelKind::MimoRayleigh { mt, mr } = self.kind {
            if (mt, mr) != (2, 2) {
                return Err(NomaError::ConfigInvalid {
                    field: "antennas",
                    reason: format!("only 2x2 Alamouti is supported, got mt={mt} mr={mr}"),
                });
            }
        }
        Ok(())
    }
}

/// Receiver used by user 1. User 2 always decodes on its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    /// Joint nearest composite point, keep own label.
    SingleUser,
    /// Cancel the true user-2 component, then decode user 1 alone.
    GenieSic,
    /// Decode user 2, cancel it, then decode user 1.
    Sic,
}

impl Decoder {
    pub fn tag(&self) -> &'static str {
        match self {
            Decoder::SingleUser => "single_user",
            Decoder::GenieSic => "genie_sic",
            Decoder::Sic => "sic",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "single_user" | "single-user" | "su" => Some(Decoder::SingleUser),
            "genie_sic" | "genie-sic" | "genie" => Some(Decoder::GenieSic),
            "sic" => Some(Decoder::Sic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub seed: u64,
    /// Minimum trials per SNR point (Alamouti: blocks).
    pub trials: u64,
    /// Keep extending a point until each user has this many errors (0 = off).
    pub target_errors: u64,
    /// Hard cap when extending towards `target_errors`.
    pub max_trials: u64,
    /// Stop a point once each user has [`EARLY_STOP_ERRORS`] errors.
    pub early_stop: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub stbc: StbcScaling,
}

impl SimOptions {
    pub fn new(seed: u64, trials: u64) -> Self {
        Self {
            seed,
            trials,
            target_errors: 0,
            max_trials: trials,
            early_stop: false,
            threads: None,
            stbc: StbcScaling::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub ser: f64,
}

/// Per-user SER against user 1's average SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SerCurve {
    pub users: [Vec<SerPoint>; 2],
    pub decoder: Decoder,
    pub seed: u64,
    pub scheme: String,
    pub channel: ChannelKind,
    pub snr_gap_db: f64,
    pub rng: &'static str,
}

impl SerCurve {
    pub fn user(&self, user: usize) -> &[SerPoint] {
        &self.users[user - 1]
    }

    /// Mean of the two users' SER at point `i`.
    pub fn average_ser(&self, i: usize) -> f64 {
        0.5 * (self.users[0][i].ser + self.users[1][i].ser)
    }

    pub fn worst_ser(&self, i: usize) -> f64 {
        self.users[0][i].ser.max(self.users[1][i].ser)
    }
}

/// Fading realizations returned by [`sample_fading`].
#[derive(Debug, Clone, PartialEq)]
pub enum Fading {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Amplitude factor that puts a user `gap_db` below the reference SNR.
pub fn gap_amplitude(gap_db: f64) -> f64 {
    10f64.powf(-gap_db / 20.0)
}

fn rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    ((a * a + b * b) * 0.5).sqrt()
}

fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit-power fades: real Rayleigh with `E[h^2] = 1`, or `CN(0, 1)` entries.
pub fn sample_fading<R: Rng + ?Sized>(kind: ChannelKind, count: usize, rng: &mut R) -> Fading {
    match kind {
        ChannelKind::SisoRayleigh => Fading::Real((0..count).map(|_| rayleigh(rng)).collect()),
        ChannelKind::MimoRayleigh { .. } => {
            Fading::Complex((0..count).map(|_| cn01(rng)).collect())
        }
    }
}

/// Index of the candidate minimizing `sum_l (y[l] - gains[l] x[l])^2`.
/// Ties go to the lowest index.
pub fn nearest(candidates: &[f64], dim: usize, y: &[f64], gains: &[f64]) -> usize {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (i, x) in candidates.chunks_exact(dim).enumerate() {
        let mut metric = 0.0;
        for l in 0..dim {
            let e = y[l] - gains[l] * x[l];
            metric += e * e;
        }
        if metric < best {
            best = metric;
            arg = i;
        }
    }
    arg
}

/// Single-user decoding for `user` (1 or 2): nearest composite point, then
/// that point's label for the requested user. `gains[l] = sqrt(P) h[l]`.
pub fn detect_single_user(
    y: &[f64],
    gains: &[f64],
    scheme: &CompositeScheme,
    user: usize,
) -> usize {
    let (l1, l2) = scheme.labels(nearest(scheme.points(), scheme.dim(), y, gains));
    if user == 1 {
        l1
    } else {
        l2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SicMode {
    /// The transmitted user-2 label is known and cancelled exactly.
    Genie { label2: usize },
    /// User 2 is decoded first and its re-mapped component cancelled.
    Decoded,
}

/// Successive interference cancellation at user 1. Returns `(label1, label2)`,
/// where `label2` is the cancelled user-2 label.
pub fn detect_sic(
    y: &[f64],
    gains: &[f64],
    scheme: &CompositeScheme,
    mode: SicMode,
) -> (usize, usize) {
    sic_scaled(y, gains, scheme, 1.0, mode)
}

fn sic_scaled(
    y: &[f64],
    gains: &[f64],
    scheme: &CompositeScheme,
    scale: f64,
    mode: SicMode,
) -> (usize, usize) {
    let n = scheme.dim();
    let label2 = match mode {
        SicMode::Genie { label2 } => label2,
        SicMode::Decoded => detect_single_user(y, gains, scheme, 2),
    };
    let comp2 = scheme.user2_component(label2);
    let mut residual = [0.0; MAX_DIM];
    for l in 0..n {
        residual[l] = y[l] - gains[l] * scale * comp2[l];
    }
    let label1 = if scale == 1.0 {
        nearest(scheme.user1_components(), n, &residual[..n], gains)
    } else {
        let mut g = [0.0; MAX_DIM];
        for l in 0..n {
            g[l] = gains[l] * scale;
        }
        nearest(scheme.user1_components(), n, &residual[..n], &g[..n])
    };
    (label1, label2)
}

/// Alamouti codeword: rows are transmit antennas, columns time slots.
pub fn alamouti_encode(x1: Complex64, x2: Complex64) -> [[Complex64; 2]; 2] {
    [[x1, -x2.conj()], [x2, x1.conj()]]
}

/// `Y = a * H * X + Z` for 2x2 matrices.
pub fn mimo_receive(
    h: &[[Complex64; 2]; 2],
    x: &[[Complex64; 2]; 2],
    amplitude: f64,
    noise: &[[Complex64; 2]; 2],
) -> [[Complex64; 2]; 2] {
    let mut y = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for t in 0..2 {
            y[j][t] = amplitude * (h[j][0] * x[0][t] + h[j][1] * x[1][t]) + noise[j][t];
        }
    }
    y
}

/// Maximum-ratio combining of an Alamouti block. Returns the two combined
/// statistics `||H||_F^2 x_k + noise` and `||H||_F^2`.
pub fn alamouti_combine(y: &[[Complex64; 2]; 2], h: &[[Complex64; 2]; 2]) -> ([Complex64; 2], f64) {
    let mut s1 = Complex64::new(0.0, 0.0);
    let mut s2 = Complex64::new(0.0, 0.0);
    let mut energy = 0.0;
    for j in 0..2 {
        s1 += h[j][0].conj() * y[j][0] + h[j][1] * y[j][1].conj();
        s2 += h[j][1].conj() * y[j][0] - h[j][0] * y[j][1].conj();
        energy += h[j][0].norm_sqr() + h[j][1].norm_sqr();
    }
    ([s1, s2], energy)
}

/// Encode two symbols, pass them through `H` with the given noise, combine and
/// pick the nearest candidates (flat `(re, im)` pairs) for each symbol.
pub fn alamouti_roundtrip(
    symbols: [Complex64; 2],
    h: &[[Complex64; 2]; 2],
    noise: &[[Complex64; 2]; 2],
    amplitude: f64,
    candidates: &[f64],
) -> [usize; 2] {
    let x = alamouti_encode(symbols[0], symbols[1]);
    let y = mimo_receive(h, &x, amplitude, noise);
    let (stats, energy) = alamouti_combine(&y, h);
    let g = amplitude * energy;
    stats.map(|s| nearest(candidates, 2, &[s.re, s.im], &[g, g]))
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    trials: u64,
    errors: [u64; 2],
}

impl Counts {
    fn add(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            errors: [self.errors[0] + o.errors[0], self.errors[1] + o.errors[1]],
        }
    }
}

struct Engine<'a> {
    scheme: &'a CompositeScheme,
    decoder: Decoder,
    kind: ChannelKind,
    base: ChaCha8Rng,
    amp2: f64,
    /// Composite scaled to unit complex power for Alamouti (flat re, im).
    stbc_points: Vec<f64>,
    stbc_scale: f64,
}

impl Engine<'_> {
    fn trial_rng(&self, snr_index: usize, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(((snr_index as u64) << 40) | trial);
        rng.set_word_pos(0);
        rng
    }

    fn run_range(&self, snr_index: usize, sqrt_p: f64, start: u64, end: u64) -> Counts {
        let mut c = Counts::default();
        for t in start..end {
            let mut rng = self.trial_rng(snr_index, t);
            let e = match self.kind {
                ChannelKind::SisoRayleigh => self.siso_trial(&mut rng, sqrt_p),
                ChannelKind::MimoRayleigh { .. } => self.alamouti_trial(&mut rng, sqrt_p),
            };
            c.trials += e.trials;
            c.errors[0] += e.errors[0];
            c.errors[1] += e.errors[1];
        }
        c
    }

    fn decode_user1(&self, y: &[f64], gains: &[f64], scale: f64, label2: usize) -> usize {
        match self.decoder {
            Decoder::SingleUser => {
                let pts = if scale == 1.0 {
                    self.scheme.points()
                } else {
                    &self.stbc_points
                };
                self.scheme
                    .labels(nearest(pts, self.scheme.dim(), y, gains))
                    .0
            }
            Decoder::GenieSic => {
                sic_scaled(y, gains, self.scheme, scale, SicMode::Genie { label2 }).0
            }
            Decoder::Sic => self.decoded_sic(y, gains, scale),
        }
    }

    fn decoded_sic(&self, y: &[f64], gains: &[f64], scale: f64) -> usize {
        if scale == 1.0 {
            return sic_scaled(y, gains, self.scheme, 1.0, SicMode::Decoded).0;
        }
        let l2 = self
            .scheme
            .labels(nearest(&self.stbc_points, 2, y, gains))
            .1;
        sic_scaled(y, gains, self.scheme, scale, SicMode::Genie { label2: l2 }).0
    }

    fn decode_user2(&self, y: &[f64], gains: &[f64], scale: f64) -> usize {
        let pts = if scale == 1.0 {
            self.scheme.points()
        } else {
            &self.stbc_points
        };
        self.scheme
            .labels(nearest(pts, self.scheme.dim(), y, gains))
            .1
    }

    fn siso_trial(&self, rng: &mut ChaCha8Rng, sqrt_p: f64) -> Counts {
        let n = self.scheme.dim();
        let idx = rng.random_range(0..self.scheme.len());
        let (l1, l2) = self.scheme.labels(idx);
        let x = self.scheme.point(idx);
        let mut errors = [0u64; 2];
        for (user, amp) in [(0usize, 1.0), (1, self.amp2)] {
            let mut gains = [0.0; MAX_DIM];
            let mut y = [0.0; MAX_DIM];
            for l in 0..n {
                gains[l] = sqrt_p * amp * rayleigh(rng);
                let z: f64 = rng.sample(StandardNormal);
                y[l] = gains[l] * x[l] + z;
            }
            let wrong = if user == 0 {
                self.decode_user1(&y[..n], &gains[..n], 1.0, l2) != l1
            } else {
                self.decode_user2(&y[..n], &gains[..n], 1.0) != l2
            };
            errors[user] += wrong as u64;
        }
        Counts { trials: 1, errors }
    }

    /// One Alamouti block: two composite symbols, counted as two trials.
    fn alamouti_trial(&self, rng: &mut ChaCha8Rng, sqrt_p: f64) -> Counts {
        let s = self.stbc_scale;
        let idx = [
            rng.random_range(0..self.scheme.len()),
            rng.random_range(0..self.scheme.len()),
        ];
        let sym = idx.map(|i| {
            let p = self.scheme.point(i);
            Complex64::new(s * p[0], s * p[1])
        });
        let x = alamouti_encode(sym[0], sym[1]);
        let mut errors = [0u64; 2];
        for (user, amp) in [(0usize, 1.0), (1, self.amp2)] {
            let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
            let mut z = [[Complex64::new(0.0, 0.0); 2]; 2];
            for row in h.iter_mut() {
                for v in row.iter_mut() {
                    *v = amp * cn01(rng);
                }
            }
            for row in z.iter_mut() {
                for v in row.iter_mut() {
                    *v = cn01(rng);
                }
            }
            let y = mimo_receive(&h, &x, sqrt_p, &z);
            let (stats, energy) = alamouti_combine(&y, &h);
            let g = sqrt_p * energy;
            for (k, st) in stats.iter().enumerate() {
                let (l1, l2) = self.scheme.labels(idx[k]);
                let yv = [st.re, st.im];
                let wrong = if user == 0 {
                    self.decode_user1(&yv, &[g, g], s, l2) != l1
                } else {
                    self.decode_user2(&yv, &[g, g], s) != l2
                };
                errors[user] += wrong as u64;
            }
        }
        Counts { trials: 2, errors }
    }
}

fn validate(scheme: &CompositeScheme, channel: &ChannelConfig, opts: &SimOptions) -> Result<()> {
    channel.validate()?;
    if opts.trials < MIN_TRIALS {
        return Err(NomaError::ConfigInvalid {
            field: "trials",
            reason: format!("need at least {MIN_TRIALS}, got {}", opts.trials),
        });
    }
    if opts.max_trials < opts.trials {
        return Err(NomaError::ConfigInvalid {
            field: "max_trials",
            reason: format!("{} is below trials = {}", opts.max_trials, opts.trials),
        });
    }
    if opts.threads == Some(0) {
        return Err(NomaError::ConfigInvalid {
            field: "threads",
            reason: "must be positive".into(),
        });
    }
    if scheme.dim() > MAX_DIM {
        return Err(NomaError::ConfigInvalid {
            field: "p",
            reason: format!("dimension {} exceeds {MAX_DIM}", scheme.dim()),
        });
    }
    if matches!(channel.kind, ChannelKind::MimoRayleigh { .. }) && scheme.dim() != 2 {
        return Err(NomaError::UnsupportedDimension { n: scheme.dim() });
    }
    Ok(())
}

/// Monte Carlo SER of both users for every SNR point of `channel`.
pub fn simulate_ser(
    scheme: &CompositeScheme,
    channel: &ChannelConfig,
    decoder: Decoder,
    opts: &SimOptions,
) -> Result<SerCurve> {
    validate(scheme, channel, opts)?;
    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| NomaError::ConfigInvalid {
                    field: "threads",
                    reason: e.to_string(),
                })?;
            Ok(pool.install(|| run(scheme, channel, decoder, opts)))
        }
        None => Ok(run(scheme, channel, decoder, opts)),
    }
}

fn run(
    scheme: &CompositeScheme,
    channel: &ChannelConfig,
    decoder: Decoder,
    opts: &SimOptions,
) -> SerCurve {
    let stbc_scale = opts.stbc.factor();
    let engine = Engine {
        scheme,
        decoder,
        kind: channel.kind,
        base: ChaCha8Rng::seed_from_u64(opts.seed),
        amp2: gap_amplitude(channel.snr_gap_db),
        stbc_points: scheme.points().iter().map(|v| v * stbc_scale).collect(),
        stbc_scale,
    };
    let channel_gain = match channel.kind {
        ChannelKind::SisoRayleigh => scheme.dim() as f64,
        ChannelKind::MimoRayleigh { mt, mr } => (mt * mr) as f64,
    };
    let mut users: [Vec<SerPoint>; 2] = [Vec::new(), Vec::new()];
    for (si, &snr_db) in channel.snr_db_user1.iter().enumerate() {
        // Average SNR = E||h||^2 P with unit-power fades.
        let sqrt_p = (10f64.powf(snr_db / 10.0) / channel_gain).sqrt();
        let counts = run_point(&engine, si, sqrt_p, opts);
        for (list, &errors) in users.iter_mut().zip(&counts.errors) {
            list.push(SerPoint {
                snr_db,
                trials: counts.trials,
                errors,
                ser: errors as f64 / counts.trials as f64,
            });
        }
    }
    SerCurve {
        users,
        decoder,
        seed: opts.seed,
        scheme: scheme.describe(),
        channel: channel.kind,
        snr_gap_db: channel.snr_gap_db,
        rng: RNG_DESCRIPTION,
    }
}

fn run_point(engine: &Engine<'_>, si: usize, sqrt_p: f64, opts: &SimOptions) -> Counts {
    let mut done = 0u64;
    let mut total = Counts::default();
    loop {
        let cap = if done < opts.trials {
            opts.trials
        } else {
            opts.max_trials
        };
        let end = (done + ROUND).min(cap);
        let round = (done..end)
            .step_by(CHUNK as usize)
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|start| engine.run_range(si, sqrt_p, start, (start + CHUNK).min(end)))
            .reduce(Counts::default, Counts::add);
        total = total.add(round);
        done = end;

        let fewest = total.errors[0].min(total.errors[1]);
        if done >= opts.max_trials {
            break;
        }
        if opts.early_stop && fewest >= EARLY_STOP_ERRORS {
            break;
        }
        if done >= opts.trials && (opts.target_errors == 0 || fewest >= opts.target_errors) {
            break;
        }
    }
    total
}

/// Least-squares slope of `log10(SER)` against `-SNR_dB / 10`.
pub fn diversity_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|(snr, _)| -snr / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|(_, ser)| ser.log10()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Diversity order of one user's curve over `[lo_db, hi_db]`.
pub fn estimate_diversity(curve: &SerCurve, user: usize, lo_db: f64, hi_db: f64) -> Result<f64> {
    let window: Vec<&SerPoint> = curve
        .user(user)
        .iter()
        .filter(|p| p.snr_db >= lo_db && p.snr_db <= hi_db)
        .collect();
    let positive = window.iter().filter(|p| p.ser > 0.0).count();
    if window.len() < 3 || positive < window.len() {
        return Err(NomaError::InsufficientData {
            needed: 3.max(window.len()),
            found: positive,
        });
    }
    Ok(diversity_slope(
        &window.iter().map(|p| (p.snr_db, p.ser)).collect::<Vec<_>>(),
    ))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constellation::{coset_leaders, lattice_partition_scheme, superimpose};
    use crate::lattice::cyclotomic_lattice;

    fn lp(p: u32, m1: u32, m2: u32) -> CompositeScheme {
        lattice_partition_scheme(Arc::new(cyclotomic_lattice(p).unwrap()), m1, m2).unwrap()
    }

    #[test]
    fn synthetic_slopes() {
        for order in [2.0, 3.0] {
            let pts: Vec<(f64, f64)> = (0..5)
                .map(|k| {
                    let snr_db = 20.0 + 5.0 * k as f64;
                    (snr_db, 0.7 * 10f64.powf(snr_db / 10.0).powf(-order))
                })
                .collect();
            assert!((diversity_slope(&pts) - order).abs() < 1e-6);
        }
    }

    #[test]
    fn diversity_needs_three_positive_points() {
        let point = |snr_db, ser| SerPoint {
            snr_db,
            trials: 10,
            errors: 0,
            ser,
        };
        let curve = SerCurve {
            users: [
                vec![point(10.0, 0.1), point(20.0, 0.01), point(30.0, 0.0)],
                vec![point(10.0, 0.1), point(20.0, 0.01)],
            ],
            decoder: Decoder::SingleUser,
            seed: 0,
            scheme: String::new(),
            channel: ChannelKind::SisoRayleigh,
            snr_gap_db: 0.0,
            rng: RNG_DESCRIPTION,
        };
        assert!(matches!(
            estimate_diversity(&curve, 1, 0.0, 40.0),
            Err(NomaError::InsufficientData { .. })
        ));
        assert!(estimate_diversity(&curve, 2, 0.0, 40.0).is_err());
    }

    #[test]
    fn fading_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let Fading::Real(h) = sample_fading(ChannelKind::SisoRayleigh, 1_000_000, &mut rng) else {
            panic!("expected real fades");
        };
        assert!(h.iter().all(|&v| v >= 0.0));
        let m = h.iter().map(|v| v * v).sum::<f64>() / h.len() as f64;
        assert!((0.99..=1.01).contains(&m), "{m}");
        let kind = ChannelKind::MimoRayleigh { mt: 2, mr: 2 };
        let Fading::Complex(h) = sample_fading(kind, 1_000_000, &mut rng) else {
            panic!("expected complex fades");
        };
        let m = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / h.len() as f64;
        assert!((0.99..=1.01).contains(&m), "{m}");
    }

    #[test]
    fn gap_is_power_ratio() {
        let a = gap_amplitude(5.0);
        assert!((1.0 / (a * a) - 3.1623).abs() < 1e-4);
    }

    #[test]
    fn noiseless_detection_recovers_labels() {
        let s = lp(7, 1, 1);
        let gains = [0.3, 1.7, 0.9];
        for i in 0..s.len() {
            let y: Vec<f64> = s.point(i).iter().zip(&gains).map(|(x, g)| x * g).collect();
            let (l1, l2) = s.labels(i);
            assert_eq!(detect_single_user(&y, &gains, &s, 1), l1);
            assert_eq!(detect_single_user(&y, &gains, &s, 2), l2);
            assert_eq!(detect_sic(&y, &gains, &s, SicMode::Decoded), (l1, l2));
            assert_eq!(
                detect_sic(&y, &gains, &s, SicMode::Genie { label2: l2 }),
                (l1, l2)
            );
        }
    }

    #[test]
    fn midpoint_ties_break_low() {
        let pts = [0.5, -1.0, 1.5, -1.0, 0.5, 1.0];
        assert_eq!(nearest(&pts, 2, &[1.0, -1.0], &[1.0, 1.0]), 0);
        assert_eq!(nearest(&pts[2..], 2, &[1.0, 0.0], &[1.0, 1.0]), 0);
        assert_eq!(nearest(&pts, 2, &[2.0, -2.0], &[2.0, 2.0]), 0);
    }

    #[test]
    fn alamouti_gram_is_scaled_identity() {
        let x1 = Complex64::new(0.3, -1.2);
        let x2 = Complex64::new(-0.7, 0.4);
        let x = alamouti_encode(x1, x2);
        let e = x1.norm_sqr() + x2.norm_sqr();
        for i in 0..2 {
            for k in 0..2 {
                let v: Complex64 = (0..2).map(|t| x[i][t] * x[k][t].conj()).sum();
                let expect = if i == k { e } else { 0.0 };
                assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn alamouti_noiseless_roundtrip() {
        let s = lp(5, 2, 1);
        let scale = StbcScaling::default().factor();
        let cands: Vec<f64> = s.points().iter().map(|v| v * scale).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zero = [[Complex64::new(0.0, 0.0); 2]; 2];
        for _ in 0..200 {
            let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
            h.iter_mut().flatten().for_each(|v| *v = cn01(&mut rng));
            let i = rng.random_range(0..s.len());
            let k = rng.random_range(0..s.len());
            let sym = [i, k].map(|j| Complex64::new(cands[2 * j], cands[2 * j + 1]));
            assert_eq!(alamouti_roundtrip(sym, &h, &zero, 3.0, &cands), [i, k]);
        }
    }

    #[test]
    fn config_validation() {
        let s = lp(5, 1, 1);
        let opts = SimOptions::new(1, 20_000);
        let bad = ChannelConfig::siso(vec![10.0, 10.0]);
        assert!(simulate_ser(&s, &bad, Decoder::SingleUser, &opts).is_err());
        let mut bad = ChannelConfig::siso(vec![10.0]);
        bad.snr_gap_db = -1.0;
        assert!(simulate_ser(&s, &bad, Decoder::SingleUser, &opts).is_err());
        let few = SimOptions::new(1, 100);
        let ok = ChannelConfig::siso(vec![10.0]);
        assert!(matches!(
            simulate_ser(&s, &ok, Decoder::SingleUser, &few),
            Err(NomaError::ConfigInvalid {
                field: "trials",
                ..
            })
        ));
        let s3 = lp(7, 1, 1);
        assert_eq!(
            simulate_ser(
                &s3,
                &ChannelConfig::alamouti(vec![10.0], 5.0),
                Decoder::SingleUser,
                &opts
            )
            .unwrap_err(),
            NomaError::UnsupportedDimension { n: 3 }
        );
    }

    #[test]
    fn coincident_points_force_label_errors() {
        // alpha = 1/2 with equal rates: (v1, v2) and (v2, v1) land on the same point.
        let l = Arc::new(cyclotomic_lattice(5).unwrap());
        let c = coset_leaders(l, 1).unwrap();
        let s = superimpose(&c, &c, 0.5).unwrap();
        let coincident = (0..s.len())
            .filter(|&i| {
                (0..s.len()).any(|j| {
                    j != i
                        && s.labels(j).0 != s.labels(i).0
                        && s.point(i)
                            .iter()
                            .zip(s.point(j))
                            .all(|(a, b)| (a - b).abs() < 1e-12)
                })
            })
            .count();
        assert_eq!(coincident, 12);
        let curve = simulate_ser(
            &s,
            &ChannelConfig::siso(vec![60.0]),
            Decoder::SingleUser,
            &SimOptions::new(5, 20_000),
        )
        .unwrap();
        let floor = coincident as f64 / s.len() as f64 / 2.0;
        assert!(
            curve.user(1)[0].ser >= floor - 0.02,
            "{}",
            curve.user(1)[0].ser
        );
    }
}
