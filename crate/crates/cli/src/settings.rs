//! Key tables, config files and layered parameter lookup.
//!
//! Every subcommand owns a table of keys. A value is taken from the command
//! line flag if given, else from the subcommand's `[section]` of the config
//! file, else from the table default.

use std::collections::BTreeMap;
use std::path::Path;

use ini::Ini;

use crate::error::CliError;

#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key {
        name,
        default,
        help,
    }
}

pub const COMMANDS: [&str; 6] = [
    "lattice",
    "constellation",
    "dpmin-sweep",
    "mindet-sweep",
    "ser-sim",
    "reproduce",
];

const LATTICE: &[Key] = &[
    key("p", "5", "prime p >= 5; dimension n = (p-1)/2"),
    key("out", "", "optional CSV path for the generator matrix"),
];

const CONSTELLATION: &[Key] = &[
    key("p", "5", "prime p >= 5"),
    key("m1", "1", "user 1 bits per real dimension"),
    key("m2", "1", "user 2 bits per real dimension"),
    key("mode", "general", "general | lattice_partition"),
    key("alpha", "0.2", "user 1 power fraction (general mode)"),
    key("lattice", "cyclotomic", "cyclotomic | identity"),
    key("out", "-", "CSV path, - for stdout"),
];

const DPMIN_SWEEP: &[Key] = &[
    key("p", "5", "prime p >= 5"),
    key("m1", "1", "user 1 bits per real dimension"),
    key("m2", "1", "user 2 bits per real dimension"),
    key("grid", "512", "number of equally spaced alpha values"),
    key("alpha_min", "0", "first alpha of the grid"),
    key("alpha_max", "1", "last alpha of the grid"),
    key(
        "include_lp",
        "true",
        "add the lattice-partition alphas to the grid",
    ),
    key(
        "band",
        "printed",
        "second-band edge of the bound: printed | squared",
    ),
    key("method", "differences", "exact scan: differences | pairs"),
    key("out", "dpmin_sweep.csv", "CSV path, - for stdout"),
    key("svg", "", "optional SVG plot path"),
];

const MINDET_SWEEP: &[Key] = &[
    key("p", "5", "prime with n = 2 (only 5)"),
    key("m1", "2", "user 1 bits per real dimension"),
    key("m2", "1", "user 2 bits per real dimension"),
    key("grid", "512", "number of equally spaced alpha values"),
    key("alpha_min", "0", "first alpha of the grid"),
    key("alpha_max", "1", "last alpha of the grid"),
    key("mt", "2", "transmit antennas (Alamouti: 2)"),
    key("tau", "1", "code scale"),
    key(
        "unit_complex_power",
        "true",
        "normalize to unit energy per complex symbol",
    ),
    key("out", "mindet_sweep.csv", "CSV path, - for stdout"),
    key("svg", "", "optional SVG plot path"),
];

const SER_SIM: &[Key] = &[
    key("p", "5", "prime p >= 5; identity lattices use n = (p-1)/2"),
    key("m1", "1", "user 1 bits per real dimension"),
    key("m2", "1", "user 2 bits per real dimension"),
    key("mode", "lattice_partition", "general | lattice_partition"),
    key("alpha", "0.2", "user 1 power fraction (general mode)"),
    key("lattice", "cyclotomic", "cyclotomic | identity"),
    key("channel", "siso", "siso | alamouti"),
    key(
        "snr_db",
        "25:40:5",
        "user 1 SNR list: a,b,c or start:stop:step",
    ),
    key("snr_gap_db", "0", "user 1 minus user 2 average SNR in dB"),
    key("decoder", "single_user", "single_user | genie_sic | sic"),
    key("trials", "1000000", "minimum trials per SNR point (>= 1e4)"),
    key(
        "target_errors",
        "0",
        "extend each point until both users reach this many errors",
    ),
    key(
        "max_trials",
        "0",
        "cap when extending; 0 means equal to trials",
    ),
    key(
        "early_stop",
        "false",
        "stop a point once both users have 400 errors",
    ),
    key("seed", "1", "RNG seed"),
    key("tau", "1", "Alamouti code scale"),
    key(
        "unit_complex_power",
        "true",
        "Alamouti: unit energy per complex symbol",
    ),
    key("out", "ser.csv", "CSV path"),
    key(
        "meta",
        "",
        "metadata JSON path; default replaces the CSV extension",
    ),
    key("svg", "", "optional SVG plot path"),
];

const REPRODUCE: &[Key] = &[
    key(
        "out_dir",
        "repro",
        "directory for CSV, SVG and JSON artifacts",
    ),
    key("seed", "20190601", "RNG seed for Monte Carlo figures"),
    key(
        "trials",
        "1000000",
        "minimum trials (blocks for Alamouti) per SNR point",
    ),
    key(
        "target_errors",
        "400",
        "extend SISO points until both users reach this many errors",
    ),
    key("max_trials", "400000000", "cap when extending SISO points"),
    key("grid", "512", "alpha grid for fig7"),
    key(
        "method",
        "pairs",
        "exact scan for fig7: pairs | differences",
    ),
];

pub fn keys_for(command: &str) -> Option<&'static [Key]> {
    Some(match command {
        "lattice" => LATTICE,
        "constellation" => CONSTELLATION,
        "dpmin-sweep" => DPMIN_SWEEP,
        "mindet-sweep" => MINDET_SWEEP,
        "ser-sim" => SER_SIM,
        "reproduce" => REPRODUCE,
        _ => return None,
    })
}

/// Flag spelling of a key: `snr_gap_db` -> `snr-gap-db`.
pub fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

fn config_error(field: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        reason: reason.into(),
    }
}

/// Reads a config file, rejecting unknown sections and keys in any section,
/// and returns the entries of `section`.
pub fn load_config(path: &Path, section: &str) -> Result<Vec<(String, String)>, CliError> {
    let ini = Ini::load_from_file(path)
        .map_err(|e| config_error("config", format!("{}: {e}", path.display())))?;
    let mut wanted = Vec::new();
    for (name, props) in ini.iter() {
        let Some(name) = name else {
            if let Some((k, _)) = props.iter().next() {
                return Err(config_error(k, "key outside any [section]"));
            }
            continue;
        };
        let keys = keys_for(name)
            .ok_or_else(|| config_error(name, format!("unknown section [{name}]")))?;
        let mut seen = Vec::new();
        for (k, v) in props.iter() {
            if !keys.iter().any(|key| key.name == k) {
                return Err(config_error(k, format!("unknown key in [{name}]")));
            }
            if seen.contains(&k) {
                return Err(config_error(k, format!("repeated in [{name}]")));
            }
            seen.push(k);
            if name == section {
                wanted.push((k.to_string(), v.to_string()));
            }
        }
    }
    Ok(wanted)
}

/// Effective parameters of one subcommand.
#[derive(Debug, Clone)]
pub struct Settings {
    command: &'static str,
    values: BTreeMap<&'static str, (String, Source)>,
}

impl Settings {
    pub fn new(command: &'static str) -> Self {
        let keys = keys_for(command).expect("known command");
        let values = keys
            .iter()
            .map(|k| (k.name, (k.default.to_string(), Source::Default)))
            .collect();
        Self { command, values }
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    pub fn set(&mut self, key: &str, value: &str, source: Source) -> Result<(), CliError> {
        let slot = self
            .values
            .iter_mut()
            .find(|(k, _)| **k == key)
            .map(|(_, v)| v)
            .ok_or_else(|| config_error(key, format!("unknown key for {}", self.command)))?;
        *slot = (value.trim().to_string(), source);
        Ok(())
    }

    pub fn raw(&self, key: &str) -> &str {
        &self.values[key].0
    }

    pub fn source(&self, key: &str) -> Source {
        self.values[key].1
    }

    /// `key=value` pairs in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.values.iter().map(|(k, (v, _))| (*k, v.as_str()))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T, CliError> {
        self.raw(key)
            .parse()
            .map_err(|_| config_error(key, format!("expected {what}, got {:?}", self.raw(key))))
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.parse(key, "a number")?;
        if !v.is_finite() {
            return Err(config_error(key, "must be finite"));
        }
        Ok(v)
    }

    pub fn string(&self, key: &str) -> &str {
        self.raw(key)
    }

    /// Unsigned integer; accepts `1e6` style when the value is integral.
    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        if let Ok(v) = self.raw(key).parse::<u64>() {
            return Ok(v);
        }
        let v: f64 = self.parse(key, "a non-negative integer")?;
        if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
            Ok(v as u64)
        } else {
            Err(config_error(
                key,
                format!("expected a non-negative integer, got {:?}", self.raw(key)),
            ))
        }
    }

    pub fn u32(&self, key: &str) -> Result<u32, CliError> {
        u32::try_from(self.u64(key)?).map_err(|_| config_error(key, "value too large"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        usize::try_from(self.u64(key)?).map_err(|_| config_error(key, "value too large"))
    }

    pub fn bool(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key).to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            other => Err(config_error(
                key,
                format!("expected true or false, got {other:?}"),
            )),
        }
    }

    pub fn choice<'a>(&self, key: &str, allowed: &[&'a str]) -> Result<&'a str, CliError> {
        let v = self.raw(key);
        allowed.iter().find(|a| **a == v).copied().ok_or_else(|| {
            config_error(
                key,
                format!("expected one of {}, got {v:?}", allowed.join(" | ")),
            )
        })
    }

    /// `a,b,c` or inclusive `start:stop:step`.
    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.raw(key);
        let bad = || {
            config_error(
                key,
                format!("expected a,b,c or start:stop:step, got {raw:?}"),
            )
        };
        let out: Vec<f64> = if raw.contains(':') {
            let parts: Vec<f64> = raw
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            let [start, stop, step] = parts[..] else {
                return Err(bad());
            };
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(config_error(key, "range needs step > 0 and stop >= start"));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count).map(|i| start + step * i as f64).collect()
        } else {
            raw.split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?
        };
        if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
            return Err(bad());
        }
        Ok(out)
    }

    /// Optional path: empty string means unset.
    pub fn path(&self, key: &str) -> Option<&str> {
        let v = self.raw(key);
        (!v.is_empty()).then_some(v)
    }
}
