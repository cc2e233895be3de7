//! Packaged experiments with PASS/FAIL verdicts.

use std::path::PathBuf;
use std::sync::Arc;

use noma_core::constellation::lattice_partition_alpha;
use noma_core::{
    coset_leaders, cyclotomic_lattice, dpmin_lattice_partition, estimate_diversity,
    lattice_partition_scheme, min_determinant, simulate_ser, superimpose, BandVariant,
    ChannelConfig, CompositeScheme, Decoder, RotatedLattice, SerCurve, SimOptions, StbcScaling,
};

use crate::commands::{
    curve_csv, curve_metadata, curve_plot, dpmin_sweep_rows, linspace, sweep_plot, violations,
    write_sweep_csv, ScanMethod,
};
use crate::error::CliError;
use crate::output::{csv_writer, sig12, write_text};
use crate::settings::Settings;

pub const FIGURES: [&str; 4] = ["fig7", "fig8-9", "fig12-13", "mindet-table"];

/// Reference minimum determinants for `(m1, m2) = (2, 1)`; `None` is the
/// lattice-partition scheme.
pub const REFERENCE_MIN_DET: [(Option<f64>, f64); 4] = [
    (Some(0.11), 0.136e-4),
    (Some(0.14), 0.169e-2),
    (Some(0.31), 0.449e-2),
    (None, 0.91e-2),
];

#[derive(Debug, Clone)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone)]
pub struct ReproConfig {
    /// Artifact directory; `None` writes nothing.
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
    pub trials: u64,
    pub target_errors: u64,
    pub max_trials: u64,
    pub grid: usize,
    pub method: ScanMethod,
}

impl ReproConfig {
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let cfg = Self {
            out_dir: Some(PathBuf::from(s.string("out_dir"))),
            seed: s.u64("seed")?,
            trials: s.u64("trials")?,
            target_errors: s.u64("target_errors")?,
            max_trials: s.u64("max_trials")?,
            grid: s.usize("grid")?,
            method: ScanMethod::from_settings(s)?,
        };
        if cfg.max_trials < cfg.trials {
            return Err(CliError::Config {
                field: "max_trials".into(),
                reason: "must be at least trials".into(),
            });
        }
        if cfg.grid < 2 {
            return Err(CliError::Config {
                field: "grid".into(),
                reason: "need at least 2 points".into(),
            });
        }
        Ok(cfg)
    }

    fn path(&self, name: &str) -> Option<String> {
        self.out_dir
            .as_ref()
            .map(|d| d.join(name).display().to_string())
    }

    fn sim_options(&self, extend: bool) -> SimOptions {
        SimOptions {
            seed: self.seed,
            trials: self.trials,
            target_errors: if extend { self.target_errors } else { 0 },
            max_trials: if extend { self.max_trials } else { self.trials },
            early_stop: false,
            threads: None,
            stbc: StbcScaling::default(),
        }
    }

    fn save_curve(&self, stem: &str, curve: &SerCurve, opts: &SimOptions) -> Result<(), CliError> {
        if let (Some(csv), Some(meta)) = (
            self.path(&format!("{stem}.csv")),
            self.path(&format!("{stem}.json")),
        ) {
            curve_csv(&csv, curve)?;
            let json = curve_metadata(curve, opts, &[("experiment", stem.to_string())], None);
            write_text(
                &meta,
                &format!("{}\n", serde_json::to_string_pretty(&json).expect("json")),
            )?;
        }
        Ok(())
    }
}

fn lattice(p: u32) -> Result<Arc<RotatedLattice>, CliError> {
    Ok(Arc::new(cyclotomic_lattice(p)?))
}

fn general(
    lattice: Arc<RotatedLattice>,
    m1: u32,
    m2: u32,
    alpha: f64,
) -> Result<CompositeScheme, CliError> {
    let c1 = coset_leaders(lattice.clone(), m1)?;
    let c2 = coset_leaders(lattice, m2)?;
    Ok(superimpose(&c1, &c2, alpha)?)
}

/// Bound dominance over an alpha grid and tightness at the lattice-partition
/// split, for `(m1, m2, p) = (3, 3, 5)`.
pub fn fig7(cfg: &ReproConfig) -> Result<Vec<Verdict>, CliError> {
    let (m1, m2, p) = (3, 3, 5);
    let l = lattice(p)?;
    let lp = lattice_partition_alpha(m1);
    let mut alphas = linspace(0.0, 1.0, cfg.grid);
    alphas.push(lp);
    alphas.sort_by(f64::total_cmp);
    let rows = dpmin_sweep_rows(&l, m1, m2, &alphas, cfg.method)?;
    if let Some(path) = cfg.path("fig7.csv") {
        write_sweep_csv(&path, &rows, BandVariant::Printed)?;
    }
    if let Some(path) = cfg.path("fig7.svg") {
        let title = format!("minimum product distance, (m1, m2) = ({m1}, {m2}), p = {p}");
        write_text(
            &path,
            &sweep_plot(&title, &rows, BandVariant::Printed).render(),
        )?;
    }
    let mut out = Vec::new();
    for variant in [BandVariant::Printed, BandVariant::Squared] {
        let worst = rows
            .iter()
            .map(|r| r.dpmin_exact - r.bound(variant))
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(Verdict::new(
            format!("fig7 dominance ({variant:?} band)"),
            violations(&rows, variant) == 0,
            format!("{} alphas, max(exact - bound) = {worst:.3e}", rows.len()),
        ));
    }
    let at = rows.iter().find(|r| r.alpha == lp).expect("lp row");
    let closed = dpmin_lattice_partition(m1, m2, l.dim(), p);
    let gap = (at.bound_printed - at.dpmin_exact)
        .abs()
        .max((at.dpmin_exact - closed).abs());
    out.push(Verdict::new(
        "fig7 tight at lattice-partition alpha",
        gap <= 1e-9,
        format!(
            "alpha={}, exact={}, bound={}, closed form={}",
            sig12(lp),
            sig12(at.dpmin_exact),
            sig12(at.bound_printed),
            sig12(closed)
        ),
    ));
    Ok(out)
}

pub const FIG8_9_SNR_DB: [f64; 4] = [25.0, 30.0, 35.0, 40.0];

/// Diversity slopes of lattice-partition schemes against unrotated baselines.
pub fn fig8_9(cfg: &ReproConfig) -> Result<Vec<Verdict>, CliError> {
    let (lo, hi) = (FIG8_9_SNR_DB[0], FIG8_9_SNR_DB[3]);
    let opts = cfg.sim_options(true);
    let channel = ChannelConfig::siso(FIG8_9_SNR_DB.to_vec());
    let runs: [(&str, CompositeScheme); 4] = [
        ("lp-p5", lattice_partition_scheme(lattice(5)?, 1, 1)?),
        ("lp-p7", lattice_partition_scheme(lattice(7)?, 1, 1)?),
        (
            "qam-n2",
            general(Arc::new(RotatedLattice::identity(2)), 1, 1, 0.2)?,
        ),
        (
            "qam-n3",
            general(Arc::new(RotatedLattice::identity(3)), 1, 1, 0.2)?,
        ),
    ];
    let mut curves = Vec::new();
    for (name, scheme) in &runs {
        let curve = simulate_ser(scheme, &channel, Decoder::SingleUser, &opts)?;
        cfg.save_curve(&format!("fig8-9_{name}"), &curve, &opts)?;
        let slopes = [
            estimate_diversity(&curve, 1, lo, hi)?,
            estimate_diversity(&curve, 2, lo, hi)?,
        ];
        curves.push((*name, curve, slopes));
    }
    for (user, file) in [(1, "fig8.svg"), (2, "fig9.svg")] {
        if let Some(path) = cfg.path(file) {
            let named: Vec<(&str, &SerCurve)> = curves.iter().map(|(n, c, _)| (*n, c)).collect();
            let plot = curve_plot(
                &format!("user {user} SER, single-user decoding"),
                &named,
                user,
            );
            write_text(&path, &plot.render())?;
        }
    }
    let slope = |name: &str| curves.iter().find(|c| c.0 == name).expect("run").2;
    let detail = |name: &str| {
        let c = &curves.iter().find(|c| c.0 == name).expect("run").1;
        let s = slope(name);
        let trials: Vec<String> = c.user(1).iter().map(|p| p.trials.to_string()).collect();
        format!(
            "slope user1 = {:.3}, user2 = {:.3} over {lo}-{hi} dB (trials {})",
            s[0],
            s[1],
            trials.join("/")
        )
    };
    let within = |v: f64, a: f64, b: f64| (a..=b).contains(&v);
    Ok(vec![
        Verdict::new(
            "fig8-9 n=2 lattice partition slope in [1.7, 2.3]",
            within(slope("lp-p5")[0], 1.7, 2.3),
            detail("lp-p5"),
        ),
        Verdict::new(
            "fig8-9 n=3 lattice partition slope in [2.5, 3.5]",
            within(slope("lp-p7")[0], 2.5, 3.5),
            detail("lp-p7"),
        ),
        Verdict::new(
            "fig8-9 unrotated baseline slope in [0.8, 1.2]",
            within(slope("qam-n2")[0], 0.8, 1.2),
            detail("qam-n2"),
        ),
        Verdict::new(
            "fig8-9 rotated >= baseline - 0.2 (n = 2, 3)",
            slope("lp-p5")[0] >= slope("qam-n2")[0] - 0.2
                && slope("lp-p7")[0] >= slope("qam-n3")[0] - 0.2,
            format!(
                "n=2: {:.3} vs {:.3}; n=3: {:.3} vs {:.3}",
                slope("lp-p5")[0],
                slope("qam-n2")[0],
                slope("lp-p7")[0],
                slope("qam-n3")[0]
            ),
        ),
    ])
}

pub const FIG12_13_SNR_DB: [f64; 5] = [10.0, 15.0, 20.0, 25.0, 30.0];
pub const FIG12_13_GAP_DB: f64 = 5.0;
/// SNR at which schemes are ranked.
pub const RANK_SNR_DB: f64 = 30.0;

fn mimo_schemes() -> Result<Vec<(String, CompositeScheme)>, CliError> {
    let l = lattice(5)?;
    REFERENCE_MIN_DET
        .iter()
        .map(|(alpha, _)| {
            Ok(match alpha {
                Some(a) => (format!("alpha-{a}"), general(l.clone(), 2, 1, *a)?),
                None => (
                    "lattice-partition".to_string(),
                    lattice_partition_scheme(l.clone(), 2, 1)?,
                ),
            })
        })
        .collect()
}

/// Alamouti MIMO-NOMA: ranking by minimum determinant versus simulated
/// average SER, and the genie-SIC gain. `snr_db` must contain 30 dB.
pub fn fig12_13(cfg: &ReproConfig, snr_db: &[f64]) -> Result<Vec<Verdict>, CliError> {
    let at = snr_db
        .iter()
        .position(|s| *s == RANK_SNR_DB)
        .ok_or_else(|| CliError::Failed(format!("SNR list must contain {RANK_SNR_DB} dB")))?;
    let opts = cfg.sim_options(false);
    let channel = ChannelConfig::alamouti(snr_db.to_vec(), FIG12_13_GAP_DB);
    let mut rows = Vec::new();
    let mut plain = Vec::new();
    for (name, scheme) in mimo_schemes()? {
        let det = min_determinant(&scheme, 2, opts.stbc)?;
        let su = simulate_ser(&scheme, &channel, Decoder::SingleUser, &opts)?;
        let genie = simulate_ser(&scheme, &channel, Decoder::GenieSic, &opts)?;
        cfg.save_curve(&format!("fig12-13_{name}_single_user"), &su, &opts)?;
        cfg.save_curve(&format!("fig12-13_{name}_genie_sic"), &genie, &opts)?;
        rows.push((name.clone(), det, su.average_ser(at), genie.average_ser(at)));
        plain.push((name, su));
    }
    for (file, title, worst) in [
        ("fig12.svg", "average SER, Alamouti, 5 dB gap", false),
        ("fig13.svg", "worst-user SER, Alamouti, 5 dB gap", true),
    ] {
        if let Some(path) = cfg.path(file) {
            let mut plot = crate::svg::Plot::new(title, "user 1 average SNR (dB)", "SER", true);
            for (name, c) in &plain {
                let pts = (0..snr_db.len())
                    .map(|i| {
                        (
                            snr_db[i],
                            if worst {
                                c.worst_ser(i)
                            } else {
                                c.average_ser(i)
                            },
                        )
                    })
                    .collect();
                plot = plot.with(crate::svg::Series::new(name.clone(), pts));
            }
            write_text(&path, &plot.render())?;
        }
    }
    let mut by_det = rows.clone();
    by_det.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut by_ser = rows.clone();
    by_ser.sort_by(|a, b| a.2.total_cmp(&b.2));
    let names = |v: &[(String, f64, f64, f64)]| v.iter().map(|r| r.0.clone()).collect::<Vec<_>>();
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("{}: det={} ser={}", r.0, sig12(r.1), sig12(r.2)))
        .collect();
    let ratios: Vec<String> = rows
        .iter()
        .map(|r| format!("{}: {:.3}", r.0, r.2 / r.3))
        .collect();
    let negligible = rows.iter().all(|r| r.2 < 2.0 * r.3);
    Ok(vec![
        Verdict::new(
            "fig12-13 min-det ranking matches average-SER ranking at 30 dB",
            names(&by_det) == names(&by_ser),
            table.join("; "),
        ),
        Verdict::new(
            "fig12-13 genie-SIC gain on average SER < 2x at 30 dB",
            negligible,
            format!("no-SIC / genie ratios {}", ratios.join(", ")),
        ),
    ])
}

/// Minimum determinants of the four Alamouti schemes against the reference
/// values, 1% relative tolerance.
pub fn mindet_table(cfg: &ReproConfig) -> Result<Vec<Verdict>, CliError> {
    let scaling = StbcScaling::default();
    let mut out = Vec::new();
    let mut records = Vec::new();
    for ((name, scheme), (_, reference)) in mimo_schemes()?.into_iter().zip(REFERENCE_MIN_DET) {
        let det = min_determinant(&scheme, 2, scaling)?;
        let rel = (det - reference).abs() / reference;
        out.push(Verdict::new(
            format!("mindet-table {name}"),
            rel <= 0.01,
            format!(
                "min det = {} vs reference {} (relative error {:.3}%)",
                sig12(det),
                sig12(reference),
                100.0 * rel
            ),
        ));
        records.push([
            name,
            sig12(scheme.alpha()),
            sig12(det),
            sig12(reference),
            sig12(rel),
        ]);
    }
    if let Some(path) = cfg.path("mindet_table.csv") {
        let mut w = csv_writer(&path)?;
        w.write_record(["scheme", "alpha", "min_det", "reference", "relative_error"])?;
        for r in &records {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    Ok(out)
}

pub fn run(figure: &str, s: &Settings, threads: usize) -> Result<(), CliError> {
    if !FIGURES.contains(&figure) {
        return Err(CliError::UnknownFigure(figure.to_string()));
    }
    let cfg = ReproConfig::from_settings(s)?;
    println!(
        "reproduce {figure}: seed={} trials={} target_errors={} max_trials={} grid={} method={:?} threads={threads} out_dir={}",
        cfg.seed,
        cfg.trials,
        cfg.target_errors,
        cfg.max_trials,
        cfg.grid,
        cfg.method,
        s.string("out_dir")
    );
    let verdicts = match figure {
        "fig7" => fig7(&cfg)?,
        "fig8-9" => fig8_9(&cfg)?,
        "fig12-13" => fig12_13(&cfg, &FIG12_13_SNR_DB)?,
        _ => mindet_table(&cfg)?,
    };
    for v in &verdicts {
        println!("{}", v.line());
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    if failed > 0 {
        return Err(CliError::Failed(format!(
            "{failed} of {} checks failed",
            verdicts.len()
        )));
    }
    Ok(())
}
