//! Per-user coset-leader constellations and their two-user superpositions.
//!
//! User `k` carves the `2^{n m_k}` coset leaders of `Lambda / 2^{m_k} Lambda`
//! from the rotated lattice. The composite either superimposes the two dithered
//! user constellations with an arbitrary power split `alpha`, or nests them as
//! `C1 + 2^{m1} C2`, which is the coset-leader set of `Lambda / 2^{m1+m2} Lambda`.

use std::sync::Arc;

use crate::error::{NomaError, Result};
use crate::lattice::RotatedLattice;

/// Default cap on `log2` of any constellation size.
pub const DEFAULT_MAX_LOG2_POINTS: u32 = 16;

/// `1 / (1 + 2^{2 m1})`, the power split at which superposition coincides with
/// the lattice-partition scheme.
pub fn lattice_partition_alpha(m1: u32) -> f64 {
    1.0 / (1.0 + 4f64.powi(m1 as i32))
}

/// Normalization of the general superposition so that `E||x||^2 = n`.
pub fn eta_general(m1: u32, m2: u32, alpha: f64) -> f64 {
    let a = 4f64.powi(m1 as i32);
    let b = 4f64.powi(m2 as i32);
    (12.0 / ((a - b) * alpha + b - 1.0)).sqrt()
}

/// Normalization of the lattice-partition scheme.
pub fn eta_lattice_partition(m1: u32, m2: u32) -> f64 {
    (12.0 / (4f64.powi((m1 + m2) as i32) - 1.0)).sqrt()
}

/// Average energy of the dithered coset leaders of `Z^n / 2^m Z^n`.
pub fn dithered_power(n: usize, m: u32) -> f64 {
    n as f64 / 12.0 * (4f64.powi(m as i32) - 1.0)
}

/// The normalized, dithered one-dimensional composite
/// `eta (sqrt(alpha)(X1 - d1) + sqrt(1 - alpha)(X2 - d2))`, indexed by
/// `a + 2^{m1} * b` for `a in X1`, `b in X2`.
pub fn one_dimensional_composite(m1: u32, m2: u32, alpha: f64) -> Vec<f64> {
    let q1 = 1usize << m1;
    let q2 = 1usize << m2;
    let c1 = (q1 as f64 - 1.0) / 2.0;
    let c2 = (q2 as f64 - 1.0) / 2.0;
    let eta = eta_general(m1, m2, alpha);
    let (s1, s2) = (alpha.sqrt(), (1.0 - alpha).sqrt());
    let mut out = Vec::with_capacity(q1 * q2);
    for b in 0..q2 {
        for a in 0..q1 {
            out.push(eta * (s1 * (a as f64 - c1) + s2 * (b as f64 - c2)));
        }
    }
    out
}

fn check_cap(log2_points: u32, max_log2: u32) -> Result<()> {
    if log2_points > max_log2 {
        Err(NomaError::SizeCap {
            log2_points,
            max_log2,
        })
    } else {
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(NomaError::AlphaOutOfRange(alpha))
    }
}

fn mean_of(points: &[f64], dim: usize) -> Vec<f64> {
    let count = points.len() / dim;
    let mut mean = vec![0.0; dim];
    for p in points.chunks_exact(dim) {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= count as f64);
    mean
}

/// One user's alphabet: the coset leaders `b * G`, `b in {0..2^m - 1}^n`.
///
/// Labels are the mixed-radix value of `b` with `b[0]` most significant.
#[derive(Debug, Clone)]
pub struct UserConstellation {
    lattice: Arc<RotatedLattice>,
    m: u32,
    /// Undithered points, `n` coordinates each.
    points: Vec<f64>,
    dithered: Vec<f64>,
    dither: Vec<f64>,
}

impl UserConstellation {
    pub fn lattice(&self) -> &Arc<RotatedLattice> {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim()
    }

    pub fn bits_per_dim(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, label: usize) -> &[f64] {
        let n = self.dim();
        &self.points[label * n..(label + 1) * n]
    }

    pub fn dithered_point(&self, label: usize) -> &[f64] {
        let n = self.dim();
        &self.dithered[label * n..(label + 1) * n]
    }

    pub fn dithered_points(&self) -> &[f64] {
        &self.dithered
    }

    pub fn dither(&self) -> &[f64] {
        &self.dither
    }

    /// Integer coordinates `b` of a label.
    pub fn digits(&self, label: usize) -> Vec<u32> {
        let n = self.dim();
        let q = 1usize << self.m;
        let mut b = vec![0u32; n];
        let mut rest = label;
        for d in b.iter_mut().rev() {
            *d = (rest % q) as u32;
            rest /= q;
        }
        b
    }

    pub fn label_of(&self, digits: &[u32]) -> usize {
        let q = 1usize << self.m;
        digits.iter().fold(0, |acc, &d| acc * q + d as usize)
    }
}

/// Coset leaders of `Lambda / 2^m Lambda` with the default size cap.
pub fn coset_leaders(lattice: Arc<RotatedLattice>, m: u32) -> Result<UserConstellation> {
    coset_leaders_capped(lattice, m, DEFAULT_MAX_LOG2_POINTS)
}

pub fn coset_leaders_capped(
    lattice: Arc<RotatedLattice>,
    m: u32,
    max_log2: u32,
) -> Result<UserConstellation> {
    if m == 0 {
        return Err(NomaError::ZeroRate);
    }
    let n = lattice.dim();
    check_cap(n as u32 * m, max_log2)?;
    let q = 1usize << m;
    let count = q.pow(n as u32);
    let mut points = Vec::with_capacity(count * n);
    let mut b = vec![0.0f64; n];
    for label in 0..count {
        let mut rest = label;
        for d in b.iter_mut().rev() {
            *d = (rest % q) as f64;
            rest /= q;
        }
        points.extend(lattice.point(&b));
    }
    let dither = mean_of(&points, n);
    let dithered = points
        .chunks_exact(n)
        .flat_map(|p| p.iter().zip(&dither).map(|(x, d)| x - d))
        .collect();
    Ok(UserConstellation {
        lattice,
        m,
        points,
        dithered,
        dither,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeMode {
    General,
    LatticePartition,
}

/// Two-user composite constellation.
///
/// Point `i` carries labels `(i / |C2|, i % |C2|)`.
#[derive(Debug, Clone)]
pub struct CompositeScheme {
    user1: UserConstellation,
    user2: UserConstellation,
    alpha: f64,
    eta: f64,
    mode: SchemeMode,
    points: Vec<f64>,
    /// Scaled dithered user components; `points[(l1, l2)] = comp1[l1] + comp2[l2]`.
    comp1: Vec<f64>,
    comp2: Vec<f64>,
    /// Dither of the undithered superposition (before `eta`).
    dither: Vec<f64>,
}

impl CompositeScheme {
    pub fn user1(&self) -> &UserConstellation {
        &self.user1
    }

    pub fn user2(&self) -> &UserConstellation {
        &self.user2
    }

    pub fn lattice(&self) -> &Arc<RotatedLattice> {
        self.user1.lattice()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `eta` for general mode, `eta'` for lattice partition.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn mode(&self) -> SchemeMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.user1.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> &[f64] {
        let n = self.dim();
        &self.points[index * n..(index + 1) * n]
    }

    pub fn labels(&self, index: usize) -> (usize, usize) {
        let l2 = self.user2.len();
        (index / l2, index % l2)
    }

    pub fn index_of(&self, label1: usize, label2: usize) -> usize {
        label1 * self.user2.len() + label2
    }

    /// Dither `d` of the undithered superposition.
    pub fn dither(&self) -> &[f64] {
        &self.dither
    }

    pub fn user1_component(&self, label1: usize) -> &[f64] {
        let n = self.dim();
        &self.comp1[label1 * n..(label1 + 1) * n]
    }

    pub fn user2_component(&self, label2: usize) -> &[f64] {
        let n = self.dim();
        &self.comp2[label2 * n..(label2 + 1) * n]
    }

    pub fn user1_components(&self) -> &[f64] {
        &self.comp1
    }

    pub fn user2_components(&self) -> &[f64] {
        &self.comp2
    }

    /// Empirical `E||x||^2`.
    pub fn average_power(&self) -> f64 {
        self.points.iter().map(|v| v * v).sum::<f64>() / self.len() as f64
    }

    pub fn describe(&self) -> String {
        let mode = match self.mode {
            SchemeMode::General => "general",
            SchemeMode::LatticePartition => "lattice_partition",
        };
        format!(
            "{mode} {} m1={} m2={} alpha={}",
            self.lattice().describe(),
            self.user1.m,
            self.user2.m,
            self.alpha
        )
    }
}

fn scaled(u: &UserConstellation, s: f64) -> Vec<f64> {
    u.dithered.iter().map(|v| v * s).collect()
}

/// General superposition `eta (sqrt(alpha) C1 + sqrt(1 - alpha) C2 - d)`.
///
/// Coincident composite points are kept as separate labeled entries.
pub fn superimpose(
    c1: &UserConstellation,
    c2: &UserConstellation,
    alpha: f64,
) -> Result<CompositeScheme> {
    superimpose_capped(c1, c2, alpha, DEFAULT_MAX_LOG2_POINTS)
}

pub fn superimpose_capped(
    c1: &UserConstellation,
    c2: &UserConstellation,
    alpha: f64,
    max_log2: u32,
) -> Result<CompositeScheme> {
    check_alpha(alpha)?;
    if !c1.lattice.same_as(&c2.lattice) {
        return Err(NomaError::LatticeMismatch);
    }
    let n = c1.dim();
    check_cap(n as u32 * (c1.m + c2.m), max_log2)?;
    let eta = eta_general(c1.m, c2.m, alpha);
    let (s1, s2) = (alpha.sqrt(), (1.0 - alpha).sqrt());

    let mut raw = Vec::with_capacity(c1.len() * c2.len() * n);
    for l1 in 0..c1.len() {
        for l2 in 0..c2.len() {
            raw.extend(
                c1.point(l1)
                    .iter()
                    .zip(c2.point(l2))
                    .map(|(a, b)| s1 * a + s2 * b),
            );
        }
    }
    let dither = mean_of(&raw, n);
    let points = raw
        .chunks_exact(n)
        .flat_map(|p| p.iter().zip(&dither).map(|(x, d)| eta * (x - d)))
        .collect();
    Ok(CompositeScheme {
        comp1: scaled(c1, eta * s1),
        comp2: scaled(c2, eta * s2),
        user1: c1.clone(),
        user2: c2.clone(),
        alpha,
        eta,
        mode: SchemeMode::General,
        points,
        dither,
    })
}

/// Nested scheme `eta' (C1 + 2^{m1} C2 - d')` with the default size cap.
pub fn lattice_partition_scheme(
    lattice: Arc<RotatedLattice>,
    m1: u32,
    m2: u32,
) -> Result<CompositeScheme> {
    lattice_partition_scheme_capped(lattice, m1, m2, DEFAULT_MAX_LOG2_POINTS)
}

pub fn lattice_partition_scheme_capped(
    lattice: Arc<RotatedLattice>,
    m1: u32,
    m2: u32,
    max_log2: u32,
) -> Result<CompositeScheme> {
    if m1 == 0 || m2 == 0 {
        return Err(NomaError::ZeroRate);
    }
    let n = lattice.dim();
    check_cap(n as u32 * (m1 + m2), max_log2)?;
    let c1 = coset_leaders_capped(lattice.clone(), m1, max_log2)?;
    let c2 = coset_leaders_capped(lattice, m2, max_log2)?;
    let eta = eta_lattice_partition(m1, m2);
    let shift = (1u64 << m1) as f64;

    let mut raw = Vec::with_capacity(c1.len() * c2.len() * n);
    for l1 in 0..c1.len() {
        for l2 in 0..c2.len() {
            raw.extend(
                c1.point(l1)
                    .iter()
                    .zip(c2.point(l2))
                    .map(|(a, b)| a + shift * b),
            );
        }
    }
    let dither = mean_of(&raw, n);
    let points = raw
        .chunks_exact(n)
        .flat_map(|p| p.iter().zip(&dither).map(|(x, d)| eta * (x - d)))
        .collect();
    Ok(CompositeScheme {
        comp1: scaled(&c1, eta),
        comp2: scaled(&c2, eta * shift),
        user1: c1,
        user2: c2,
        alpha: lattice_partition_alpha(m1),
        eta,
        mode: SchemeMode::LatticePartition,
        points,
        dither,
    })
}
