use std::path::Path;
use std::process::Command as Process;
use std::sync::Arc;

use noma_core::analysis::{difference_scan, scan_scheme};
use noma_core::constellation::{lattice_partition_alpha, SchemeMode};
use noma_core::sim::RNG_DESCRIPTION;
use noma_core::{
    build_field, coset_leaders, cyclotomic_lattice, dpmin_lattice_partition,
    dpmin_upper_bound_with, estimate_diversity, lattice_partition_scheme, min_determinant,
    simulate_ser, superimpose, BandVariant, ChannelConfig, ChannelKind, CompositeScheme, Decoder,
    RotatedLattice, SerCurve, SimOptions, StbcScaling,
};
use serde_json::json;

use crate::error::CliError;
use crate::output::{csv_writer, sig12, write_text};
use crate::settings::{Settings, Source};
use crate::svg::{Plot, Series};

fn config_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

pub fn lattice_from(s: &Settings) -> Result<Arc<RotatedLattice>, CliError> {
    let p = s.u32("p")?;
    let lattice = match s.choice("lattice", &["cyclotomic", "identity"])? {
        "cyclotomic" => cyclotomic_lattice(p)?,
        _ => RotatedLattice::identity(build_field(p)?.degree()),
    };
    Ok(Arc::new(lattice))
}

pub fn mode_from(s: &Settings) -> Result<SchemeMode, CliError> {
    Ok(match s.choice("mode", &["general", "lattice_partition"])? {
        "general" => SchemeMode::General,
        _ => SchemeMode::LatticePartition,
    })
}

/// Scheme described by `p, m1, m2, mode, alpha, lattice`.
pub fn scheme_from(s: &Settings) -> Result<CompositeScheme, CliError> {
    let lattice = lattice_from(s)?;
    let (m1, m2) = (s.u32("m1")?, s.u32("m2")?);
    match mode_from(s)? {
        SchemeMode::LatticePartition => {
            if s.source("alpha") != Source::Default {
                return Err(config_error(
                    "alpha",
                    "not used with mode = lattice_partition (alpha is implied by m1)",
                ));
            }
            Ok(lattice_partition_scheme(lattice, m1, m2)?)
        }
        SchemeMode::General => {
            let alpha = s.f64("alpha")?;
            let c1 = coset_leaders(lattice.clone(), m1)?;
            let c2 = coset_leaders(lattice, m2)?;
            Ok(superimpose(&c1, &c2, alpha)?)
        }
    }
}

fn summary_to_stderr(out: &str) -> bool {
    out == "-"
}

macro_rules! summary {
    ($to_err:expr, $($arg:tt)*) => {
        if $to_err { eprintln!($($arg)*) } else { println!($($arg)*) }
    };
}

pub fn lattice(s: &Settings) -> Result<(), CliError> {
    let l = cyclotomic_lattice(s.u32("p")?)?;
    let g = l.generator();
    let n = l.dim();
    println!(
        "lattice p={} n={n} dpmin={} orthogonality_residual={:.3e} det={}",
        s.u32("p")?,
        sig12(l.dpmin()),
        g.orthogonality_residual(),
        sig12(g.determinant())
    );
    for i in 0..n {
        let row: Vec<String> = g.row(i).iter().map(|v| format!("{v:>16.12}")).collect();
        println!("  {}", row.join(" "));
    }
    if let Some(out) = s.path("out") {
        let mut w = csv_writer(out)?;
        w.write_record((1..=n).map(|j| format!("col_{j}")))?;
        for i in 0..n {
            w.write_record(g.row(i).iter().map(|v| sig12(*v)))?;
        }
        w.flush().map_err(|e| CliError::io(out, e))?;
    }
    Ok(())
}

pub fn constellation(s: &Settings) -> Result<(), CliError> {
    let scheme = scheme_from(s)?;
    let out = s.string("out");
    let n = scheme.dim();
    let mut w = csv_writer(out)?;
    let mut header = vec!["label1".to_string(), "label2".to_string()];
    header.extend((1..=n).map(|j| format!("coord_{j}")));
    w.write_record(&header)?;
    for i in 0..scheme.len() {
        let (l1, l2) = scheme.labels(i);
        let mut rec = vec![l1.to_string(), l2.to_string()];
        rec.extend(scheme.point(i).iter().map(|v| sig12(*v)));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| CliError::io(out, e))?;
    summary!(
        summary_to_stderr(out),
        "constellation {}: {} points, alpha={}, eta={}, power={}",
        scheme.describe(),
        scheme.len(),
        sig12(scheme.alpha()),
        sig12(scheme.eta()),
        sig12(scheme.average_power())
    );
    Ok(())
}

/// `count` equally spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

fn alpha_grid(s: &Settings) -> Result<Vec<f64>, CliError> {
    let (lo, hi) = (s.f64("alpha_min")?, s.f64("alpha_max")?);
    if !(0.0..=1.0).contains(&lo) {
        return Err(config_error("alpha_min", "must lie in [0, 1]"));
    }
    if !(lo..=1.0).contains(&hi) {
        return Err(config_error("alpha_max", "must lie in [alpha_min, 1]"));
    }
    let grid = s.usize("grid")?;
    if grid == 0 {
        return Err(config_error("grid", "must be positive"));
    }
    Ok(linspace(lo, hi, grid))
}

/// The power splits at which the superposition is a lattice partition
/// (user 1 fine, or mirrored with user 2 fine).
pub fn lattice_partition_alphas(m1: u32, m2: u32) -> [f64; 2] {
    [
        lattice_partition_alpha(m1),
        1.0 - lattice_partition_alpha(m2),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMethod {
    Pairs,
    Differences,
}

impl ScanMethod {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        Ok(match s.choice("method", &["pairs", "differences"])? {
            "pairs" => ScanMethod::Pairs,
            _ => ScanMethod::Differences,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub alpha: f64,
    pub dpmin_exact: f64,
    pub bound_printed: f64,
    pub bound_squared: f64,
    pub demin_exact: f64,
    pub is_lattice_partition: bool,
}

impl SweepRow {
    pub fn bound(&self, variant: BandVariant) -> f64 {
        match variant {
            BandVariant::Printed => self.bound_printed,
            BandVariant::Squared => self.bound_squared,
        }
    }
}

/// Exact minima and both bound variants over the general superposition.
pub fn dpmin_sweep_rows(
    lattice: &Arc<RotatedLattice>,
    m1: u32,
    m2: u32,
    alphas: &[f64],
    method: ScanMethod,
) -> Result<Vec<SweepRow>, CliError> {
    let p = lattice
        .field()
        .map(|f| f.p())
        .ok_or_else(|| config_error("lattice", "the bound needs a cyclotomic lattice"))?;
    let n = lattice.dim();
    let leaders = match method {
        ScanMethod::Pairs => Some((
            coset_leaders(lattice.clone(), m1)?,
            coset_leaders(lattice.clone(), m2)?,
        )),
        ScanMethod::Differences => None,
    };
    let lp = lattice_partition_alphas(m1, m2);
    alphas
        .iter()
        .map(|&alpha| {
            let (dp, de) = match &leaders {
                Some((c1, c2)) => {
                    let scan = scan_scheme(&superimpose(c1, c2, alpha)?)?;
                    (scan.dpmin, scan.demin)
                }
                None => {
                    let scan = difference_scan(lattice, m1, m2, SchemeMode::General, alpha)?;
                    (scan.dpmin, scan.demin)
                }
            };
            Ok(SweepRow {
                alpha,
                dpmin_exact: dp,
                bound_printed: dpmin_upper_bound_with(m1, m2, n, p, alpha, BandVariant::Printed)?,
                bound_squared: dpmin_upper_bound_with(m1, m2, n, p, alpha, BandVariant::Squared)?,
                demin_exact: de,
                is_lattice_partition: lp.iter().any(|a| (a - alpha).abs() <= 1e-12),
            })
        })
        .collect()
}

pub fn write_sweep_csv(
    path: &str,
    rows: &[SweepRow],
    variant: BandVariant,
) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "alpha",
        "dpmin_exact",
        "dpmin_bound",
        "demin_exact",
        "is_lattice_partition_alpha",
    ])?;
    for r in rows {
        w.write_record([
            sig12(r.alpha),
            sig12(r.dpmin_exact),
            sig12(r.bound(variant)),
            sig12(r.demin_exact),
            r.is_lattice_partition.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn sweep_plot(title: &str, rows: &[SweepRow], variant: BandVariant) -> Plot {
    Plot::new(title, "alpha", "minimum product distance", true)
        .with(Series::new(
            "exact",
            rows.iter().map(|r| (r.alpha, r.dpmin_exact)).collect(),
        ))
        .with(
            Series::new(
                "upper bound",
                rows.iter().map(|r| (r.alpha, r.bound(variant))).collect(),
            )
            .dashed(),
        )
}

/// Rows where `bound < exact - 1e-12`.
pub fn violations(rows: &[SweepRow], variant: BandVariant) -> usize {
    rows.iter()
        .filter(|r| r.bound(variant) < r.dpmin_exact - 1e-12)
        .count()
}

pub fn band_variant(s: &Settings) -> Result<BandVariant, CliError> {
    Ok(match s.choice("band", &["printed", "squared"])? {
        "printed" => BandVariant::Printed,
        _ => BandVariant::Squared,
    })
}

pub fn dpmin_sweep(s: &Settings) -> Result<(), CliError> {
    let p = s.u32("p")?;
    let lattice = Arc::new(cyclotomic_lattice(p)?);
    let (m1, m2) = (s.u32("m1")?, s.u32("m2")?);
    let variant = band_variant(s)?;
    let method = ScanMethod::from_settings(s)?;
    let mut alphas = alpha_grid(s)?;
    let (lo, hi) = (s.f64("alpha_min")?, s.f64("alpha_max")?);
    if s.bool("include_lp")? {
        alphas.extend(
            lattice_partition_alphas(m1, m2)
                .into_iter()
                .filter(|a| (lo..=hi).contains(a)),
        );
        alphas.sort_by(f64::total_cmp);
        alphas.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    }
    let rows = dpmin_sweep_rows(&lattice, m1, m2, &alphas, method)?;
    let out = s.string("out");
    write_sweep_csv(out, &rows, variant)?;
    if let Some(svg) = s.path("svg") {
        let title = format!("dpmin sweep (m1={m1}, m2={m2}, p={p})");
        write_text(svg, &sweep_plot(&title, &rows, variant).render())?;
    }
    let differ = rows
        .iter()
        .filter(|r| (r.bound_printed - r.bound_squared).abs() > 1e-15)
        .count();
    let (vp, vs) = (
        violations(&rows, BandVariant::Printed),
        violations(&rows, BandVariant::Squared),
    );
    let tight = rows
        .iter()
        .filter(|r| (r.alpha - lattice_partition_alpha(m1)).abs() <= 1e-12)
        .map(|r| (r.bound(variant) - r.dpmin_exact).abs())
        .next();
    summary!(
        summary_to_stderr(out),
        "dpmin-sweep m1={m1} m2={m2} p={p}: {} rows, violations printed={vp} squared={vs}, variants differ on {differ} rows{}",
        rows.len(),
        tight.map_or(String::new(), |g| format!(
            ", gap at alpha_LP={:.3e} (closed form {})",
            g,
            sig12(dpmin_lattice_partition(m1, m2, lattice.dim(), p))
        ))
    );
    if violations(&rows, variant) > 0 {
        return Err(CliError::Failed(format!(
            "bound below exact value on {} rows",
            violations(&rows, variant)
        )));
    }
    Ok(())
}

pub fn stbc_from(s: &Settings) -> Result<StbcScaling, CliError> {
    let tau = s.f64("tau")?;
    if tau <= 0.0 {
        return Err(config_error("tau", "must be positive"));
    }
    Ok(StbcScaling {
        tau,
        unit_complex_power: s.bool("unit_complex_power")?,
    })
}

pub fn mindet_sweep(s: &Settings) -> Result<(), CliError> {
    let lattice = Arc::new(cyclotomic_lattice(s.u32("p")?)?);
    let (m1, m2) = (s.u32("m1")?, s.u32("m2")?);
    let mt = s.usize("mt")?;
    let scaling = stbc_from(s)?;
    let c1 = coset_leaders(lattice.clone(), m1)?;
    let c2 = coset_leaders(lattice, m2)?;
    let mut rows = Vec::new();
    for alpha in alpha_grid(s)? {
        let scheme = superimpose(&c1, &c2, alpha)?;
        rows.push((alpha, min_determinant(&scheme, mt, scaling)?));
    }
    let out = s.string("out");
    let mut w = csv_writer(out)?;
    w.write_record(["alpha", "min_det"])?;
    for (a, d) in &rows {
        w.write_record([sig12(*a), sig12(*d)])?;
    }
    w.flush().map_err(|e| CliError::io(out, e))?;
    if let Some(svg) = s.path("svg") {
        let plot = Plot::new(
            &format!("minimum determinant (m1={m1}, m2={m2})"),
            "alpha",
            "min det",
            true,
        )
        .with(Series::new("min det", rows.clone()));
        write_text(svg, &plot.render())?;
    }
    let best =
        rows.iter().copied().fold(
            (f64::NAN, f64::NEG_INFINITY),
            |b, r| if r.1 > b.1 { r } else { b },
        );
    summary!(
        summary_to_stderr(out),
        "mindet-sweep m1={m1} m2={m2}: {} rows, max min_det={} at alpha={}",
        rows.len(),
        sig12(best.1),
        sig12(best.0)
    );
    Ok(())
}

pub fn decoder_from(s: &Settings) -> Result<Decoder, CliError> {
    let tag = s.choice("decoder", &["single_user", "genie_sic", "sic"])?;
    Ok(Decoder::from_tag(tag).expect("listed decoder"))
}

pub fn channel_from(s: &Settings) -> Result<ChannelConfig, CliError> {
    let snr = s.f64_list("snr_db")?;
    let gap = s.f64("snr_gap_db")?;
    let channel = match s.choice("channel", &["siso", "alamouti"])? {
        "siso" => ChannelConfig {
            snr_gap_db: gap,
            ..ChannelConfig::siso(snr)
        },
        _ => ChannelConfig::alamouti(snr, gap),
    };
    channel.validate()?;
    Ok(channel)
}

pub fn curve_csv(path: &str, curve: &SerCurve) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["user", "snr_db", "trials", "errors", "ser"])?;
    for user in 1..=2 {
        for pt in curve.user(user) {
            w.write_record([
                user.to_string(),
                sig12(pt.snr_db),
                pt.trials.to_string(),
                pt.errors.to_string(),
                sig12(pt.ser),
            ])?;
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn git_describe() -> Option<String> {
    let out = Process::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
}

pub fn channel_tag(kind: ChannelKind) -> &'static str {
    match kind {
        ChannelKind::SisoRayleigh => "siso_rayleigh",
        ChannelKind::MimoRayleigh { .. } => "mimo_rayleigh_alamouti_2x2",
    }
}

pub fn curve_metadata(
    curve: &SerCurve,
    opts: &SimOptions,
    config: &[(&str, String)],
    config_file: Option<&str>,
) -> serde_json::Value {
    let config: serde_json::Map<String, serde_json::Value> = config
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({
        "tool": concat!("noma-lab ", env!("CARGO_PKG_VERSION")),
        "seed": curve.seed,
        "scheme": curve.scheme,
        "decoder": curve.decoder.tag(),
        "channel": channel_tag(curve.channel),
        "snr_gap_db": curve.snr_gap_db,
        "rng": RNG_DESCRIPTION,
        "trials_min": opts.trials,
        "target_errors": opts.target_errors,
        "max_trials": opts.max_trials,
        "early_stop": opts.early_stop,
        "config_file": config_file,
        "config": config,
        "git_describe": git_describe(),
    })
}

pub fn curve_plot(title: &str, curves: &[(&str, &SerCurve)], user: usize) -> Plot {
    let mut plot = Plot::new(title, "user 1 average SNR (dB)", "SER", true);
    for (name, c) in curves {
        plot = plot.with(Series::new(
            *name,
            c.user(user).iter().map(|p| (p.snr_db, p.ser)).collect(),
        ));
    }
    plot
}

fn sidecar_path(out: &str) -> String {
    let p = Path::new(out);
    p.with_extension("json").display().to_string()
}

pub fn ser_sim(s: &Settings, config_file: Option<&str>) -> Result<(), CliError> {
    let scheme = scheme_from(s)?;
    let channel = channel_from(s)?;
    let decoder = decoder_from(s)?;
    let trials = s.u64("trials")?;
    let max_trials = match s.u64("max_trials")? {
        0 => trials,
        v => v,
    };
    let opts = SimOptions {
        seed: s.u64("seed")?,
        trials,
        target_errors: s.u64("target_errors")?,
        max_trials,
        early_stop: s.bool("early_stop")?,
        threads: None,
        stbc: stbc_from(s)?,
    };
    let out = s.string("out");
    if out == "-" {
        return Err(config_error("out", "ser-sim needs a file path for its CSV"));
    }
    let curve = simulate_ser(&scheme, &channel, decoder, &opts)?;
    curve_csv(out, &curve)?;
    let meta = s
        .path("meta")
        .map_or_else(|| sidecar_path(out), str::to_string);
    let entries: Vec<(&str, String)> = s.entries().map(|(k, v)| (k, v.to_string())).collect();
    let json = curve_metadata(&curve, &opts, &entries, config_file);
    write_text(
        &meta,
        &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")),
    )?;
    if let Some(svg) = s.path("svg") {
        let plot = curve_plot(&format!("SER, {}", curve.scheme), &[("user 1", &curve)], 1).with(
            Series::new(
                "user 2",
                curve.user(2).iter().map(|p| (p.snr_db, p.ser)).collect(),
            ),
        );
        write_text(svg, &plot.render())?;
    }
    let (lo, hi) = (
        channel.snr_db_user1[0],
        *channel.snr_db_user1.last().expect("nonempty"),
    );
    let slope =
        |u| estimate_diversity(&curve, u, lo, hi).map_or("n/a".to_string(), |d| format!("{d:.3}"));
    println!(
        "ser-sim {} decoder={} seed={}: {} SNR points, slope user1={} user2={}, wrote {out} and {meta}",
        curve.scheme,
        decoder.tag(),
        opts.seed,
        curve.user(1).len(),
        slope(1),
        slope(2)
    );
    Ok(())
}
