//! Line-oriented config dialect for measures and costs.
//!
//! ```text
//! # a two-point measure and the quadratic cost
//! atom 0 0.5
//! atom 1 0.5
//! cost quadratic 1
//! ```
//!
//! Directives: `atom <x> <w>`, `gridcdf <path>`, `family <tag> <params...>`,
//! `cost quadratic <t0>`, `cost hp <p>`, `cost thetaD <D>`,
//! `cost power <p> [coef]`, `cost table <path> [h|theta]`. Relative paths are
//! resolved against the directory of the file that mentions them.

use std::path::{Path, PathBuf};

use crate::costs::{CostSpec, Role};
use crate::error::{Error, Result};
use crate::measures::{Atoms, Family, GridCdf, Measure1D, NORMALIZATION_TOL};

/// Everything a config file or an inline token list can declare.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    pub measure: Option<Measure1D>,
    pub cost: Option<CostSpec>,
}

/// Reads a config file.
pub fn read_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, path, &base)
}

/// Parses config text; `origin` only labels error messages.
pub fn parse_config(text: &str, origin: &Path, base_dir: &Path) -> Result<Config> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if !line.is_empty() {
            lines.push((i + 1, line.split_whitespace().map(str::to_string).collect::<Vec<_>>()));
        }
    }
    build(lines, origin, base_dir)
}

/// Parses an inline directive stream such as
/// `family gaussian 0 1 cost quadratic 1`. A token naming an existing file is
/// read as a config file.
pub fn parse_tokens(tokens: &[String], base_dir: &Path) -> Result<Config> {
    const KEYWORDS: [&str; 4] = ["atom", "gridcdf", "family", "cost"];
    let mut groups: Vec<(usize, Vec<String>)> = Vec::new();
    let mut from_files = Config::default();
    for (i, tok) in tokens.iter().enumerate() {
        if KEYWORDS.contains(&tok.as_str()) {
            groups.push((i + 1, vec![tok.clone()]));
        } else if let Some(g) = groups.last_mut() {
            g.1.push(tok.clone());
        } else {
            let path = base_dir.join(tok);
            if !path.is_file() {
                return Err(Error::invalid(format!("expected a directive keyword or a config file, got '{tok}'")));
            }
            let c = read_config(&path)?;
            merge(&mut from_files, c)?;
        }
    }
    let inline = build(groups, Path::new("<arguments>"), base_dir)?;
    merge(&mut from_files, inline)?;
    Ok(from_files)
}

fn merge(into: &mut Config, other: Config) -> Result<()> {
    if other.measure.is_some() {
        if into.measure.is_some() {
            return Err(Error::invalid("more than one measure declared"));
        }
        into.measure = other.measure;
    }
    if other.cost.is_some() {
        if into.cost.is_some() {
            return Err(Error::invalid("more than one cost declared"));
        }
        into.cost = other.cost;
    }
    Ok(())
}

fn build(lines: Vec<(usize, Vec<String>)>, origin: &Path, base_dir: &Path) -> Result<Config> {
    let perr = |line: usize, msg: String| Error::Parse { path: origin.to_path_buf(), line, msg };
    let mut atoms: Vec<(f64, f64)> = Vec::new();
    let mut measure: Option<Measure1D> = None;
    let mut cost: Option<CostSpec> = None;
    let mut last_line = 0;
    for (line, toks) in lines {
        last_line = line;
        let args = &toks[1..];
        let nums = |need: std::ops::RangeInclusive<usize>| -> Result<Vec<f64>> {
            if !need.contains(&args.len()) {
                return Err(perr(line, format!("'{}' takes {:?} numeric arguments", toks[0], need)));
            }
            args.iter()
                .map(|a| a.parse::<f64>().map_err(|_| perr(line, format!("'{a}' is not a number"))))
                .collect()
        };
        match toks[0].as_str() {
            "atom" => {
                let v = nums(2..=2)?;
                if measure.is_some() {
                    return Err(perr(line, "atoms mixed with another measure directive".into()));
                }
                atoms.push((v[0], v[1]));
            }
            "gridcdf" | "family" => {
                if measure.is_some() || !atoms.is_empty() {
                    return Err(perr(line, "more than one measure declared".into()));
                }
                let m = if toks[0] == "gridcdf" {
                    if args.len() != 1 {
                        return Err(perr(line, "'gridcdf' takes one path".into()));
                    }
                    let (xs, fs) = read_table(&base_dir.join(&args[0]))?;
                    Measure1D::GridCdf(GridCdf::new(xs, fs).map_err(|e| perr(line, e.to_string()))?)
                } else {
                    parse_family(&toks[1..]).map_err(|e| perr(line, e.to_string()))?
                };
                measure = Some(m);
            }
            "cost" => {
                if cost.is_some() {
                    return Err(perr(line, "more than one cost declared".into()));
                }
                cost = Some(parse_cost(&toks[1..], base_dir).map_err(|e| match e {
                    Error::InvalidInput(msg) => perr(line, msg),
                    other => other,
                })?);
            }
            other => return Err(perr(line, format!("unknown directive '{other}'"))),
        }
    }
    if !atoms.is_empty() {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(perr(last_line, format!("atom weights sum to {total}, not 1")));
        }
        let a = Atoms::from_pairs(atoms).map_err(|e| perr(last_line, e.to_string()))?;
        measure = Some(Measure1D::Atoms(a));
    }
    Ok(Config { measure, cost })
}

/// Parses `<tag> <params...>` of a `family` directive.
pub fn parse_family(toks: &[String]) -> Result<Measure1D> {
    let (tag, rest) = toks.split_first().ok_or_else(|| Error::invalid("family needs a tag"))?;
    let p: Vec<f64> = rest
        .iter()
        .map(|a| a.parse::<f64>().map_err(|_| Error::invalid(format!("'{a}' is not a number"))))
        .collect::<Result<_>>()?;
    let fam = match (tag.as_str(), p.as_slice()) {
        ("symmetric-exponential", []) => Family::SymmetricExponential { scale: 1.0 },
        ("symmetric-exponential", [s]) => Family::SymmetricExponential { scale: *s },
        ("gaussian", []) => Family::Gaussian { mean: 0.0, sd: 1.0 },
        ("gaussian", [m, s]) => Family::Gaussian { mean: *m, sd: *s },
        ("uniform", [a, b]) => Family::Uniform { lo: *a, hi: *b },
        ("two-point", [a, b]) => Family::TwoPoint { x0: *a, x1: *b, p0: 0.5 },
        ("two-point", [a, b, w]) => Family::TwoPoint { x0: *a, x1: *b, p0: *w },
        _ => {
            return Err(Error::invalid(format!(
                "unknown family or wrong parameter count: '{tag}' with {} parameters",
                p.len()
            )))
        }
    };
    Measure1D::family(fam)
}

/// Parses `<kind> <params...>` of a `cost` directive.
pub fn parse_cost(toks: &[String], base_dir: &Path) -> Result<CostSpec> {
    let (kind, rest) = toks.split_first().ok_or_else(|| Error::invalid("cost needs a kind"))?;
    let num = |i: usize| -> Result<f64> {
        let a = rest.get(i).ok_or_else(|| Error::invalid(format!("cost {kind} is missing a parameter")))?;
        a.parse::<f64>().map_err(|_| Error::invalid(format!("'{a}' is not a number")))
    };
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if rest.len() < lo || rest.len() > hi {
            Err(Error::invalid(format!("cost {kind} takes {lo}..={hi} parameters")))
        } else {
            Ok(())
        }
    };
    Ok(match kind.as_str() {
        "quadratic" => {
            arity(0, 1)?;
            CostSpec::Quadratic { t0: if rest.is_empty() { 1.0 } else { num(0)? } }
        }
        "hp" => {
            arity(1, 1)?;
            CostSpec::Hp { p: num(0)? }
        }
        "thetaD" => {
            arity(1, 1)?;
            CostSpec::ThetaD { d: num(0)? }
        }
        "power" => {
            arity(1, 2)?;
            CostSpec::Power { p: num(0)?, coef: if rest.len() > 1 { num(1)? } else { 1.0 } }
        }
        "table" => {
            arity(1, 2)?;
            let role = match rest.get(1).map(String::as_str) {
                None | Some("theta") => Role::Theta,
                Some("h") => Role::H,
                Some(r) => return Err(Error::invalid(format!("unknown table role '{r}'"))),
            };
            let (xs, vals) = read_table(&base_dir.join(&rest[0]))?;
            CostSpec::Table { xs, vals, role }
        }
        other => return Err(Error::invalid(format!("unknown cost kind '{other}'"))),
    })
}

/// Reads a two-column numeric table separated by whitespace or commas.
/// A first line that does not parse as numbers is taken as a header.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    parse_table(&text, path)
}

pub fn parse_table(text: &str, origin: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        let parsed: Option<Vec<f64>> = cells.iter().map(|c| c.parse::<f64>().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => {
                xs.push(v[0]);
                ys.push(v[1]);
            }
            None if xs.is_empty() => continue,
            _ => {
                return Err(Error::Parse {
                    path: PathBuf::from(origin),
                    line: i + 1,
                    msg: "expected two numeric columns".into(),
                })
            }
        }
    }
    Ok((xs, ys))
}
