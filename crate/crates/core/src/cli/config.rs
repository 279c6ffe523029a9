//! Flat `key = value` config files and the list syntaxes shared by flags.

use std::fs;
use std::path::Path;

use crate::assembly::Flavor;
use crate::error::{FemError, Result};
use crate::mesh_basis::MAX_DEGREE;
use crate::problem::Variable;

/// Turns a config file into `--key=value` arguments. Blank lines and lines
/// starting with `#` are skipped; underscores in keys become dashes.
pub fn config_args(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| FemError::arg(format!("cannot read config file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            FemError::arg(format!(
                "{}:{}: expected key = value",
                path.display(),
                k + 1
            ))
        })?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(FemError::arg(format!(
                "{}:{}: invalid key '{key}'",
                path.display(),
                k + 1
            )));
        }
        out.push(format!("--{key}={}", value.trim()));
    }
    Ok(out)
}

/// Splices config-file arguments in front of the subcommand's own flags so
/// that flags given on the command line win.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(
                it.next()
                    .ok_or_else(|| FemError::arg("--config needs a path"))?,
            );
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let extra = config_args(Path::new(&path))?;
    // Program name and subcommand come first.
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(extra);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}

/// `4`, `1..5`, `1,3,5` or combinations such as `1..3,5`.
pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || FemError::arg(format!("invalid degree set '{s}'"));
        let (lo, hi) = match part.split_once("..") {
            Some((a, b)) => {
                let hi = b.trim_start_matches('=');
                (
                    a.trim().parse().map_err(|_| bad())?,
                    hi.trim().parse().map_err(|_| bad())?,
                )
            }
            None => {
                let p = part.parse().map_err(|_| bad())?;
                (p, p)
            }
        };
        if lo == 0 || hi > MAX_DEGREE || lo > hi {
            return Err(FemError::arg(format!(
                "degrees must lie in 1..={MAX_DEGREE}, got '{part}'"
            )));
        }
        for p in lo..=hi {
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(FemError::arg("empty degree set"));
    }
    out.sort_unstable();
    Ok(out)
}

/// Comma list of variables, or `all`.
pub fn parse_vars(s: &str) -> Result<Vec<Variable>> {
    if s.trim() == "all" {
        return Ok(Variable::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let v = Variable::parse(part)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.is_empty() {
        return Err(FemError::arg("empty variable set"));
    }
    out.sort_by_key(|v| v.derivative_order());
    Ok(out)
}

/// `standard`, `mixed` or `both`.
pub fn parse_flavors(s: &str) -> Result<Vec<Flavor>> {
    match s.trim() {
        "both" | "all" => Ok(vec![Flavor::Standard, Flavor::Mixed]),
        other => Ok(vec![Flavor::parse(other)?]),
    }
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| FemError::arg(format!("invalid number '{p}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if v.is_empty() {
        return Err(FemError::arg("empty number list"));
    }
    Ok(v)
}

/// Accepts `1e8` as well as plain integers.
pub fn parse_count(s: &str) -> Result<usize> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| FemError::arg(format!("invalid count '{s}'")))?;
    if !(x.is_finite() && x >= 1.0 && x <= 1e15) {
        return Err(FemError::arg(format!("count out of range: '{s}'")));
    }
    Ok(x.round() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn degree_ranges() {
        assert_eq!(parse_degrees("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_degrees("4").unwrap(), vec![4]);
        assert_eq!(parse_degrees("5,1..2,2").unwrap(), vec![1, 2, 5]);
        assert_eq!(parse_degrees("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_degrees("").is_err());
        assert!(parse_degrees("0").is_err());
        assert!(parse_degrees("3..1").is_err());
        assert!(parse_degrees("x").is_err());
    }

    #[test]
    fn variable_lists() {
        assert_eq!(
            parse_vars("uxx,u").unwrap(),
            vec![Variable::U, Variable::Uxx]
        );
        assert_eq!(parse_vars("all").unwrap().len(), 3);
        assert!(parse_vars("w").is_err());
    }

    #[test]
    fn counts_and_reals() {
        assert_eq!(parse_count("1e8").unwrap(), 100_000_000);
        assert_eq!(parse_count("4097").unwrap(), 4097);
        assert!(parse_count("-3").is_err());
        assert_eq!(parse_reals("1e-10, 1e-4").unwrap(), vec![1e-10, 1e-4]);
    }

    #[test]
    fn config_file_goes_before_flags() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# defaults\nproblem = case1\ncoef=2\n\nn_max = 1e5").unwrap();
        let args: Vec<String> = ["fem-errbal", "sweep", "--config"]
            .iter()
            .map(|s| s.to_string())
            .chain([f.path().display().to_string(), "--coef".into(), "3".into()])
            .collect();
        let out = expand_config(args).unwrap();
        assert_eq!(
            out,
            vec![
                "fem-errbal",
                "sweep",
                "--problem=case1",
                "--coef=2",
                "--n-max=1e5",
                "--coef",
                "3"
            ]
        );
    }

    #[test]
    fn malformed_config_line() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "problem case1").unwrap();
        assert!(config_args(f.path()).is_err());
    }
}
