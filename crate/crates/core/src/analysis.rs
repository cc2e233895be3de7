//! Distance figures of a composite constellation.
//!
//! Exhaustive pair scans give the exact minimum product and Euclidean
//! distances. The analytical side provides the piecewise upper bound on the
//! minimum product distance for an arbitrary power split, the closed form for
//! the lattice-partition scheme, and the Alamouti minimum determinant.

use rayon::prelude::*;

use crate::constellation::{
    eta_general, eta_lattice_partition, lattice_partition_alpha, one_dimensional_composite,
    CompositeScheme, SchemeMode,
};
use crate::error::{NomaError, Result};
use crate::lattice::RotatedLattice;

/// Two coordinates whose absolute difference is at most this are treated as equal.
pub const DIFFER_TOL: f64 = 1e-9;

/// Largest constellation accepted by the exhaustive scans.
pub const MAX_SCAN_POINTS: usize = 1 << 16;

/// How the second band of the arbitrary-power bound ends.
///
/// `Printed` uses `4 / ((2^{m1} - 1/2) + 4)`; `Squared` uses
/// `4 / ((2^{m1} - 1/2)^2 + 4)`, which meets the first multi-cluster band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandVariant {
    #[default]
    Printed,
    Squared,
}

/// Product of `|a[l] - b[l]|` over the coordinates that differ, and how many
/// coordinates differ.
pub fn product_distance(a: &[f64], b: &[f64]) -> (f64, usize) {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .filter(|d| *d > DIFFER_TOL)
        .fold((1.0, 0), |(p, l), d| (p * d, l + 1))
}

/// Two `(label1, label2)` composite labels.
pub type LabelPair = ((usize, usize), (usize, usize));

/// Outcome of an exhaustive pair scan over the distinct points of a scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScan {
    /// Minimum product distance over pairs differing in all `n` coordinates.
    pub dpmin: f64,
    /// Composite indices achieving `dpmin`.
    pub dpmin_argmin: Option<(usize, usize)>,
    /// Minimum Euclidean distance over distinct points.
    pub demin: f64,
    pub demin_argmin: Option<(usize, usize)>,
    /// Distinct pairs that agree in at least one coordinate (diversity loss).
    pub diversity_loss_pairs: u64,
    /// Smallest number of differing coordinates over distinct pairs.
    pub min_differing: usize,
    /// Labeled pairs that map to the same point.
    pub coincident_pairs: u64,
    /// First coincident index pair.
    pub coincident_argmin: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy)]
struct Partial {
    dp: (f64, usize, usize),
    de2: (f64, usize, usize),
    loss: u64,
    min_l: usize,
    coincident: u64,
    first_coincident: (usize, usize),
}

impl Partial {
    fn empty(n: usize) -> Self {
        Self {
            dp: (f64::INFINITY, usize::MAX, usize::MAX),
            de2: (f64::INFINITY, usize::MAX, usize::MAX),
            loss: 0,
            min_l: n,
            coincident: 0,
            first_coincident: (usize::MAX, usize::MAX),
        }
    }

    fn merge(self, o: Self) -> Self {
        let lex = |a: (f64, usize, usize), b: (f64, usize, usize)| {
            if (b.0, b.1, b.2) < (a.0, a.1, a.2) {
                b
            } else {
                a
            }
        };
        Self {
            dp: lex(self.dp, o.dp),
            de2: lex(self.de2, o.de2),
            loss: self.loss + o.loss,
            min_l: self.min_l.min(o.min_l),
            coincident: self.coincident + o.coincident,
            first_coincident: self.first_coincident.min(o.first_coincident),
        }
    }
}

/// Exhaustive scan of all unordered index pairs of a flat point list.
///
/// Ties are resolved towards the lexicographically smallest index pair, so the
/// result does not depend on how the work is partitioned.
pub fn scan_points(points: &[f64], dim: usize) -> PairScan {
    let count = points.len() / dim;
    let total = (0..count)
        .into_par_iter()
        .map(|i| {
            let a = &points[i * dim..(i + 1) * dim];
            let mut acc = Partial::empty(dim);
            for j in i + 1..count {
                let b = &points[j * dim..(j + 1) * dim];
                let mut prod = 1.0;
                let mut sq = 0.0;
                let mut differing = 0;
                for (x, y) in a.iter().zip(b) {
                    let d = (x - y).abs();
                    sq += d * d;
                    if d > DIFFER_TOL {
                        differing += 1;
                        prod *= d;
                    }
                }
                if differing == 0 {
                    acc.coincident += 1;
                    acc.first_coincident = acc.first_coincident.min((i, j));
                    continue;
                }
                if sq < acc.de2.0 {
                    acc.de2 = (sq, i, j);
                }
                acc.min_l = acc.min_l.min(differing);
                if differing < dim {
                    acc.loss += 1;
                } else if prod < acc.dp.0 {
                    acc.dp = (prod, i, j);
                }
            }
            acc
        })
        .reduce(|| Partial::empty(dim), Partial::merge);

    let pair = |t: (f64, usize, usize)| (t.1 != usize::MAX).then_some((t.1, t.2));
    PairScan {
        dpmin: if total.dp.0.is_finite() {
            total.dp.0
        } else {
            0.0
        },
        dpmin_argmin: pair(total.dp),
        demin: if total.de2.0.is_finite() {
            total.de2.0.sqrt()
        } else {
            0.0
        },
        demin_argmin: pair(total.de2),
        diversity_loss_pairs: total.loss,
        min_differing: total.min_l,
        coincident_pairs: total.coincident,
        coincident_argmin: (total.first_coincident.0 != usize::MAX)
            .then_some(total.first_coincident),
    }
}

/// At `alpha` 0 or 1 the general superposition carries a single user and
/// coincident labels are expected; anywhere else they make both minima zero.
fn coincidence_collapses(mode: SchemeMode, alpha: f64) -> bool {
    mode == SchemeMode::General && (alpha == 0.0 || alpha == 1.0)
}

/// Exhaustive scan of a composite scheme.
///
/// Coincident labeled points give `dpmin = demin = 0` unless the scheme
/// degenerates to a single user, where minima are over distinct points.
pub fn scan_scheme(scheme: &CompositeScheme) -> Result<PairScan> {
    if scheme.len() > MAX_SCAN_POINTS {
        return Err(NomaError::SizeCap {
            log2_points: scheme.len().ilog2(),
            max_log2: MAX_SCAN_POINTS.ilog2(),
        });
    }
    let mut scan = scan_points(scheme.points(), scheme.dim());
    if scan.coincident_pairs > 0 && !coincidence_collapses(scheme.mode(), scheme.alpha()) {
        scan.dpmin = 0.0;
        scan.demin = 0.0;
        scan.dpmin_argmin = scan.coincident_argmin;
        scan.demin_argmin = scan.coincident_argmin;
    }
    Ok(scan)
}

/// Exact minimum product distance with the label pairs achieving it.
pub fn dpmin_bruteforce(scheme: &CompositeScheme) -> Result<(f64, Option<LabelPair>)> {
    let scan = scan_scheme(scheme)?;
    Ok((
        scan.dpmin,
        scan.dpmin_argmin
            .map(|(i, j)| (scheme.labels(i), scheme.labels(j))),
    ))
}

/// Exact minimum Euclidean distance over distinct points.
pub fn demin_bruteforce(scheme: &CompositeScheme) -> Result<f64> {
    Ok(scan_scheme(scheme)?.demin)
}

/// Largest difference set accepted by [`difference_scan`].
pub const MAX_DIFFERENCES: u64 = 1 << 27;

/// Exact distance minima obtained from the difference set of a composite.
///
/// Coset leaders are integer boxes, so every difference `Delta * G` with
/// `|Delta_i| < 2^m` is realized by some pair. Scanning the
/// `(2^{m1+1} - 1)^n (2^{m2+1} - 1)^n` combined differences (one per sign)
/// yields the same minima as a pair scan at a fraction of the cost.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferenceScan {
    pub dpmin: f64,
    /// Label pairs `((l1, l2), (l1', l2'))` realizing `dpmin`.
    pub dpmin_witness: Option<LabelPair>,
    pub demin: f64,
    pub demin_witness: Option<LabelPair>,
    /// Nonzero label differences that map to the zero vector.
    pub coincident_differences: u64,
    /// Distinct differences that vanish in some coordinate.
    pub diversity_loss_differences: u64,
}

/// Per-user scale applied to raw coset leaders in each scheme mode.
pub fn user_weights(m1: u32, m2: u32, mode: SchemeMode, alpha: f64) -> (f64, f64) {
    match mode {
        SchemeMode::General => {
            let eta = eta_general(m1, m2, alpha);
            (eta * alpha.sqrt(), eta * (1.0 - alpha).sqrt())
        }
        SchemeMode::LatticePartition => {
            let eta = eta_lattice_partition(m1, m2);
            (eta, eta * (1u64 << m1) as f64)
        }
    }
}

fn box_differences(lattice: &RotatedLattice, m: u32) -> Vec<f64> {
    let n = lattice.dim();
    let q = 1i64 << m;
    let side = (2 * q - 1) as usize;
    let count = side.pow(n as u32);
    let mut out = Vec::with_capacity(count * n);
    let mut delta = vec![0.0; n];
    for k in 0..count {
        let mut r = k;
        for i in (0..n).rev() {
            delta[i] = (r % side) as f64 - (q - 1) as f64;
            r /= side;
        }
        out.extend(lattice.point(&delta));
    }
    out
}

/// Label pair whose points differ by the integer difference with flat index `k`.
fn witness(n: usize, m: u32, k: usize) -> (usize, usize) {
    let q = 1usize << m;
    let side = 2 * q - 1;
    let mut digits = vec![0i64; n];
    let mut r = k;
    for i in (0..n).rev() {
        digits[i] = (r % side) as i64 - (q as i64 - 1);
        r /= side;
    }
    let (mut hi, mut lo) = (0usize, 0usize);
    for d in digits {
        let base = (-d).max(0) as usize;
        lo = lo * q + base;
        hi = hi * q + (base as i64 + d) as usize;
    }
    (hi, lo)
}

/// Exact minimum product and Euclidean distances of the composite defined by
/// `(lattice, m1, m2, mode, alpha)`, without building the point set.
pub fn difference_scan(
    lattice: &RotatedLattice,
    m1: u32,
    m2: u32,
    mode: SchemeMode,
    alpha: f64,
) -> Result<DifferenceScan> {
    check_alpha(alpha)?;
    let n = lattice.dim();
    let side = |m: u32| (2u64 << m) - 1;
    let total = side(m1)
        .checked_pow(n as u32)
        .and_then(|a| a.checked_mul(side(m2).checked_pow(n as u32)?));
    if total.is_none_or(|t| t > MAX_DIFFERENCES) {
        return Err(NomaError::SizeCap {
            log2_points: (m1 + m2) * n as u32,
            max_log2: MAX_SCAN_POINTS.ilog2(),
        });
    }
    let (w1, w2) = user_weights(m1, m2, mode, alpha);
    let d1: Vec<f64> = box_differences(lattice, m1)
        .iter()
        .map(|v| v * w1)
        .collect();
    let d2: Vec<f64> = box_differences(lattice, m2)
        .iter()
        .map(|v| v * w2)
        .collect();
    let k1 = d1.len() / n;
    let k2 = d2.len() / n;
    // Negating a difference maps flat index k to K - 1 - k; keep k below the centre.
    let (c1, c2) = ((k1 - 1) / 2, (k2 - 1) / 2);
    let total = (0..=c1)
        .into_par_iter()
        .map(|i1| {
            let a = &d1[i1 * n..(i1 + 1) * n];
            let end = if i1 == c1 { c2 } else { k2 };
            let mut acc = Partial::empty(n);
            let mut v = [0.0; 64];
            for i2 in 0..end {
                let b = &d2[i2 * n..(i2 + 1) * n];
                let mut prod = 1.0;
                let mut sq = 0.0;
                let mut differing = 0;
                for l in 0..n {
                    v[l] = (a[l] + b[l]).abs();
                    sq += v[l] * v[l];
                    if v[l] > DIFFER_TOL {
                        differing += 1;
                        prod *= v[l];
                    }
                }
                if differing == 0 {
                    acc.coincident += 1;
                    acc.first_coincident = acc.first_coincident.min((i1, i2));
                    continue;
                }
                if sq < acc.de2.0 {
                    acc.de2 = (sq, i1, i2);
                }
                if differing < n {
                    acc.loss += 1;
                } else if prod < acc.dp.0 {
                    acc.dp = (prod, i1, i2);
                }
            }
            acc
        })
        .reduce(|| Partial::empty(n), Partial::merge);

    let labels = |t: (f64, usize, usize)| {
        (t.1 != usize::MAX).then(|| {
            let (a1, b1) = witness(n, m1, t.1);
            let (a2, b2) = witness(n, m2, t.2);
            ((a1, a2), (b1, b2))
        })
    };
    let mut scan = DifferenceScan {
        dpmin: if total.dp.0.is_finite() {
            total.dp.0
        } else {
            0.0
        },
        dpmin_witness: labels(total.dp),
        demin: if total.de2.0.is_finite() {
            total.de2.0.sqrt()
        } else {
            0.0
        },
        demin_witness: labels(total.de2),
        coincident_differences: total.coincident,
        diversity_loss_differences: total.loss,
    };
    if total.coincident > 0 && !coincidence_collapses(mode, alpha) {
        let (i1, i2) = total.first_coincident;
        scan.dpmin = 0.0;
        scan.demin = 0.0;
        scan.dpmin_witness = labels((0.0, i1, i2));
        scan.demin_witness = scan.dpmin_witness;
    }
    Ok(scan)
}

/// [`difference_scan`] of an already built scheme.
pub fn difference_scan_scheme(scheme: &CompositeScheme) -> Result<DifferenceScan> {
    difference_scan(
        scheme.lattice(),
        scheme.user1().bits_per_dim(),
        scheme.user2().bits_per_dim(),
        scheme.mode(),
        scheme.alpha(),
    )
}

/// Minimum gap of the one-dimensional composite, zero where distinct labels
/// coincide (except in the single-user cases `alpha` 0 and 1).
pub fn composite_gap(m1: u32, m2: u32, alpha: f64) -> f64 {
    let mut v = one_dimensional_composite(m1, m2, alpha);
    if !coincidence_collapses(SchemeMode::General, alpha) {
        v.sort_by(f64::total_cmp);
        if v.windows(2).any(|w| w[1] - w[0] <= DIFFER_TOL) {
            return 0.0;
        }
    }
    min_gap(&v)
}

/// Smallest gap between distinct values of a one-dimensional set.
pub fn min_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2)
        .map(|w| w[1] - w[0])
        .filter(|&d| d > DIFFER_TOL)
        .fold(f64::INFINITY, f64::min)
}

/// Closed form `(12 / (2^{2(m1+m2)} - 1))^{n/2} p^{-(n-1)/2}`.
pub fn dpmin_lattice_partition(m1: u32, m2: u32, n: usize, p: u32) -> f64 {
    let base = (p as f64).powf(-((n as f64 - 1.0) / 2.0));
    (12.0 / (4f64.powi((m1 + m2) as i32) - 1.0)).powf(n as f64 / 2.0) * base
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(NomaError::AlphaOutOfRange(alpha))
    }
}

/// `n`-th root of the inter-cluster distance with a single weak-user bit.
///
/// `r1`, `r2` are the `n`-th roots of the per-user intra-layer distances.
fn inter_cluster_root(m1: u32, alpha: f64, r1: f64, r2: f64) -> f64 {
    let q = (1u64 << m1) as f64;
    if alpha <= 1.0 / ((q - 1.5).powi(2) + 1.0) {
        return (r2 - (q - 1.0) * r1).abs();
    }
    let top = (1u64 << m1).saturating_sub(2);
    for l in 2..=top {
        let l = l as f64;
        let lo = 1.0 / ((q + 0.5 - l).powi(2) + 1.0);
        let hi = 1.0 / ((q - 0.5 - l).powi(2) + 1.0);
        if lo < alpha && alpha <= hi {
            return (r2 - (q - l) * r1).abs();
        }
    }
    (r2 - r1).abs()
}

/// Shared piecewise form for `alpha in [0, 1/2]`, expressed in `n`-th roots.
fn piecewise_root(m1: u32, m2: u32, alpha: f64, r1: f64, r2: f64, variant: BandVariant) -> f64 {
    if alpha == 0.0 {
        // User 1 collapses to a single point; only user 2's spacing remains.
        return r2;
    }
    if alpha <= lattice_partition_alpha(m1) {
        return r1;
    }
    let q = (1u64 << m1) as f64 - 0.5;
    let clusters = 1u64 << m2;
    let r_cl = inter_cluster_root(m1, alpha, r1, r2);
    let c = match variant {
        BandVariant::Printed => q,
        BandVariant::Squared => q * q,
    };
    if alpha <= 4.0 / (c + 4.0) {
        return r_cl;
    }
    let band = |gamma_max: u64, beta_max: u64| {
        let mut best = f64::INFINITY;
        for gamma in 0..=gamma_max {
            for beta in 1..=beta_max {
                best = best.min((gamma as f64 * r1 - beta as f64 * r_cl).abs());
            }
        }
        best
    };
    let edge = |xi: u64| {
        let k = ((xi - 1) * (xi - 1)) as f64;
        k / (q * q + k)
    };
    for xi in 3..clusters {
        if edge(xi) < alpha && alpha <= edge(xi + 1) {
            return band((xi - 1) / 2, xi - 1);
        }
    }
    band(clusters / 2 - 1, clusters - 1)
}

fn user_roots(m1: u32, m2: u32, alpha: f64, unit: f64) -> (f64, f64) {
    let eta = eta_general(m1, m2, alpha);
    (eta * alpha.sqrt() * unit, eta * (1.0 - alpha).sqrt() * unit)
}

/// Upper bound on the minimum product distance of the general superposition,
/// using the printed second-band edge.
pub fn dpmin_upper_bound(m1: u32, m2: u32, n: usize, p: u32, alpha: f64) -> Result<f64> {
    dpmin_upper_bound_with(m1, m2, n, p, alpha, BandVariant::Printed)
}

pub fn dpmin_upper_bound_with(
    m1: u32,
    m2: u32,
    n: usize,
    p: u32,
    alpha: f64,
    variant: BandVariant,
) -> Result<f64> {
    check_alpha(alpha)?;
    let (m1, m2, alpha) = if alpha > 0.5 {
        (m2, m1, 1.0 - alpha)
    } else {
        (m1, m2, alpha)
    };
    let base = (p as f64).powf(-((n as f64 - 1.0) / 2.0));
    let (r1, r2) = user_roots(m1, m2, alpha, base.powf(1.0 / n as f64));
    Ok(piecewise_root(m1, m2, alpha, r1, r2, variant).powi(n as i32))
}

/// Analytical minimum Euclidean distance of the normalized composite
/// (the `n = 1` instance of the piecewise form with unit lattice spacing).
pub fn demin_analytic(m1: u32, m2: u32, alpha: f64, variant: BandVariant) -> Result<f64> {
    check_alpha(alpha)?;
    let (m1, m2, alpha) = if alpha > 0.5 {
        (m2, m1, 1.0 - alpha)
    } else {
        (m1, m2, alpha)
    };
    let (r1, r2) = user_roots(m1, m2, alpha, 1.0);
    Ok(piecewise_root(m1, m2, alpha, r1, r2, variant))
}

/// Scale applied to composite points before Alamouti encoding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StbcScaling {
    /// Code-specific normalization (1 for Alamouti).
    pub tau: f64,
    /// Normalize to unit average energy per complex symbol.
    pub unit_complex_power: bool,
}

impl Default for StbcScaling {
    fn default() -> Self {
        Self {
            tau: 1.0,
            unit_complex_power: true,
        }
    }
}

impl StbcScaling {
    pub fn factor(&self) -> f64 {
        if self.unit_complex_power {
            self.tau / std::f64::consts::SQRT_2
        } else {
            self.tau
        }
    }
}

/// Minimum determinant `min det(Delta Delta^H) = d_E^{2 Mt}` of the OSTBC
/// carrying the two-dimensional composite as complex symbols.
pub fn min_determinant(scheme: &CompositeScheme, mt: usize, scaling: StbcScaling) -> Result<f64> {
    if scheme.dim() != 2 {
        return Err(NomaError::UnsupportedDimension { n: scheme.dim() });
    }
    if mt != 2 {
        return Err(NomaError::ConfigInvalid {
            field: "mt",
            reason: format!("only Mt = 2 (Alamouti) is supported, got {mt}"),
        });
    }
    let m1 = scheme.user1().bits_per_dim();
    let m2 = scheme.user2().bits_per_dim();
    let gap = composite_gap(m1, m2, scheme.alpha());
    let de = scaling.factor() * gap;
    Ok(de.powi(2 * mt as i32))
}

/// Everything known about one scheme's distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceReport {
    pub scheme: String,
    pub alpha: f64,
    pub dpmin_exact: f64,
    pub dpmin_bound: f64,
    pub demin_exact: f64,
    pub dpmin_argmin: Option<LabelPair>,
    pub demin_argmin: Option<LabelPair>,
    pub diversity_loss_pairs: u64,
    pub coincident_pairs: u64,
}

/// Exhaustive scan plus the analytical bound for a cyclotomic scheme.
pub fn distance_report(scheme: &CompositeScheme, variant: BandVariant) -> Result<DistanceReport> {
    let p = scheme
        .lattice()
        .field()
        .map(|f| f.p())
        .ok_or(NomaError::ConfigInvalid {
            field: "lattice",
            reason: "the bound needs a cyclotomic lattice".into(),
        })?;
    let scan = scan_scheme(scheme)?;
    let labels =
        |pair: Option<(usize, usize)>| pair.map(|(i, j)| (scheme.labels(i), scheme.labels(j)));
    Ok(DistanceReport {
        scheme: scheme.describe(),
        alpha: scheme.alpha(),
        dpmin_exact: scan.dpmin,
        dpmin_bound: dpmin_upper_bound_with(
            scheme.user1().bits_per_dim(),
            scheme.user2().bits_per_dim(),
            scheme.dim(),
            p,
            scheme.alpha(),
            variant,
        )?,
        demin_exact: scan.demin,
        dpmin_argmin: labels(scan.dpmin_argmin),
        demin_argmin: labels(scan.demin_argmin),
        diversity_loss_pairs: scan.diversity_loss_pairs,
        coincident_pairs: scan.coincident_pairs,
    })
}
