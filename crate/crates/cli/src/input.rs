//! Reading spaces, point sets and other JSON inputs from files or inline text.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use norming_core::norming::PointSet;
use norming_core::spaces::Space;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(norming_core::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<norming_core::Error> for CliError {
    fn from(e: norming_core::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn is_inline(arg: &str) -> bool {
    matches!(arg.trim_start().chars().next(), Some('{') | Some('['))
}

/// Contents of `arg`, read from disk unless it is inline JSON.
pub fn read_source(arg: &str, what: &str) -> CliResult<String> {
    if is_inline(arg) {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| input(format!("cannot read {what} file `{arg}`: {e}")))
}

fn json_error(what: &str, origin: &str, e: serde_json::Error) -> CliError {
    input(format!("{what} ({origin}): {e}"))
}

fn origin(arg: &str) -> &str {
    if is_inline(arg) {
        "inline"
    } else {
        arg
    }
}

pub fn parse_json<T: DeserializeOwned>(arg: &str, what: &str) -> CliResult<T> {
    let text = read_source(arg, what)?;
    serde_json::from_str(&text).map_err(|e| json_error(what, origin(arg), e))
}

pub fn load_space(arg: &str) -> CliResult<Space> {
    let space: Space = parse_json(arg, "space")?;
    space.validate()?;
    Ok(space)
}

#[derive(serde::Deserialize)]
#[serde(untagged)]
enum PointsJson {
    Wrapped { points: Vec<Vec<f64>> },
    Rows(Vec<Vec<f64>>),
    Scalars(Vec<f64>),
}

/// Points from JSON (`{"points": [[..]]}`, `[[..]]` or `[x, ..]`) or CSV
/// (one point per line, optional header, `#` comments).
pub fn load_points(arg: &str) -> CliResult<PointSet> {
    let text = read_source(arg, "points")?;
    let json_like = is_inline(arg)
        || Path::new(arg).extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
        || is_inline(&text);
    let rows = if json_like {
        match serde_json::from_str::<PointsJson>(&text) {
            Ok(PointsJson::Wrapped { points }) | Ok(PointsJson::Rows(points)) => points,
            Ok(PointsJson::Scalars(xs)) => xs.into_iter().map(|x| vec![x]).collect(),
            Err(e) => return Err(json_error("points", origin(arg), e)),
        }
    } else {
        parse_csv(&text, origin(arg))?
    };
    PointSet::new(rows).map_err(CliError::from)
}

fn parse_csv(text: &str, origin: &str) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| input(format!("points ({origin}): {e}")))?;
        let line = record.position().map_or(k as u64 + 1, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Result<f64, _>> = record.iter().map(str::parse::<f64>).collect();
        if rows.is_empty() && parsed.iter().all(|v| v.is_err()) {
            // header line
            continue;
        }
        let mut row = Vec::with_capacity(parsed.len());
        for (j, v) in parsed.into_iter().enumerate() {
            match v {
                Ok(x) => row.push(x),
                Err(_) => {
                    return Err(input(format!(
                        "points ({origin}): line {line}, field {}: cannot parse `{}` as a number",
                        j + 1,
                        &record[j]
                    )))
                }
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(input(format!("points ({origin}): no points found")));
    }
    Ok(rows)
}

/// Comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<T>()
                .map_err(|_| input(format!("{what}: cannot parse `{t}`")))
        })
        .collect()
}

/// Intervals `a,b;c,d;...`.
pub fn parse_intervals(s: &str) -> CliResult<Vec<(f64, f64)>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            let v: Vec<f64> = parse_list(t, "interval")?;
            match v[..] {
                [a, b] if b >= a => Ok((a, b)),
                _ => Err(input(format!("interval `{t}`: expected `a,b` with a <= b"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_header_and_comments() {
        let rows = parse_csv("x,y\n# note\n1, 2\n\n-0.5,0.25\n", "t").unwrap();
        assert_eq!(rows, vec![vec![1.0, 2.0], vec![-0.5, 0.25]]);
    }

    #[test]
    fn csv_reports_line_and_field() {
        let err = parse_csv("1,2\n3,abc\n", "t").unwrap_err().to_string();
        assert!(err.contains("line 2") && err.contains("field 2"), "{err}");
    }

    #[test]
    fn inline_points() {
        assert_eq!(load_points("[-1, 0, 1]").unwrap().len(), 3);
        assert_eq!(load_points(r#"{"points": [[0.5, 0.5]]}"#).unwrap().dim(), 2);
    }

    #[test]
    fn intervals() {
        assert_eq!(parse_intervals("0,0.5; 0.7,1").unwrap(), vec![(0.0, 0.5), (0.7, 1.0)]);
        assert!(parse_intervals("1,0").is_err());
    }
}
