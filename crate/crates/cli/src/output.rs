use std::fs::{self, File};
use std::io::{self, Write};
use std::path::Path;

use crate::error::CliError;

/// Shortest rendering with 12 significant digits, `%.12g` style.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp).max(0) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Opens `path` for writing (`-` is stdout), creating parent directories.
pub fn open_sink(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        return Ok(Box::new(io::stdout().lock()));
    }
    if let Some(dir) = Path::new(path)
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
    {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    Ok(Box::new(io::BufWriter::new(f)))
}

pub fn csv_writer(path: &str) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    Ok(csv::Writer::from_writer(open_sink(path)?))
}

pub fn write_text(path: &str, text: &str) -> Result<(), CliError> {
    let mut sink = open_sink(path)?;
    sink.write_all(text.as_bytes())
        .and_then(|_| sink.flush())
        .map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(-0.5257311121191336), "-0.525731112119");
        assert_eq!(sig12(0.4472135954999579), "0.4472135955");
        assert_eq!(sig12(1.3105e-3), "0.0013105");
        assert_eq!(sig12(2.2661725247149108e-5), "2.26617252471e-5");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(sig12(9.9999999999999), "10");
    }
}
