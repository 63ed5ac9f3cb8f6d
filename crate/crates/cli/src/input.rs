//! Parsing of command-line values and input files.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use subcover::graph::{connectivity_check, FundamentalGraph, GraphFile};
use subcover::iso::{LevelSet, LevelSets, RationalQuasimomentum};
use subcover::spectrum::Side;
use subcover::ChiralMatrix;

/// Bad input: a file that does not parse or a graph that fails validation.
#[derive(Debug, Clone, PartialEq)]
pub enum InputError {
    Parse { path: String, line: usize, column: usize, message: String },
    Validation { path: String, message: String },
    Io { path: String, message: String },
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputError::Parse { path, line, column, message } => {
                write!(f, "{path}:{line}:{column}: parse error: {message}")
            }
            InputError::Validation { path, message } => write!(f, "{path}: invalid graph: {message}"),
            InputError::Io { path, message } => write!(f, "{path}: {message}"),
        }
    }
}

impl std::error::Error for InputError {}

impl InputError {
    pub fn kind(&self) -> &'static str {
        match self {
            InputError::Parse { .. } => "parse",
            InputError::Validation { .. } => "validation",
            InputError::Io { .. } => "io",
        }
    }
}

fn read(path: &Path) -> Result<String, InputError> {
    std::fs::read_to_string(path)
        .map_err(|e| InputError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Graph from its JSON text; `path` is only used in messages.
pub fn parse_graph_str(path: &Path, text: &str) -> Result<FundamentalGraph, InputError> {
    let file: GraphFile = parse_json(path, text)?;
    let invalid = |message: String| InputError::Validation { path: path.display().to_string(), message };
    let g = file.into_graph().map_err(|e| invalid(e.to_string()))?;
    let report = connectivity_check(&g);
    if !report.is_connected() {
        let why = if report.components.len() > 1 {
            format!("{} components in the fundamental graph", report.components.len())
        } else {
            format!("cycle offsets span a sublattice with factors {:?}", report.cycle_factors)
        };
        return Err(invalid(format!("periodic graph is disconnected: {why}")));
    }
    Ok(g)
}

pub fn parse_graph_file(path: &Path) -> Result<FundamentalGraph, InputError> {
    parse_graph_str(path, &read(path)?)
}

/// Rows separated by `;`, entries by `,`: `"1,5,-1;4,1,0"`.
pub fn parse_chiral(s: &str) -> Result<ChiralMatrix, String> {
    let rows = s
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|e| format!("bad integer {x:?}: {e}")))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    ChiralMatrix::from_rows(&rows).map_err(|e| e.to_string())
}

/// Comma-separated rationals, each a multiple of `π`: `"2/3,-2/3"`.
pub fn parse_k0(s: &str) -> Result<RationalQuasimomentum, String> {
    RationalQuasimomentum::from_str(s).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSetFile {
    #[serde(default)]
    complete: bool,
    sets: Vec<LevelSetRecord>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSetRecord {
    band: usize,
    side: String,
    /// Each point as comma-separated rationals in units of `π`.
    points: Vec<String>,
}

pub fn parse_level_sets_str(path: &Path, text: &str) -> Result<LevelSets, InputError> {
    let file: LevelSetFile = parse_json(path, text)?;
    let invalid = |message: String| InputError::Validation { path: path.display().to_string(), message };
    let sets = file
        .sets
        .into_iter()
        .map(|r| {
            let side = Side::from_str(&r.side).map_err(|e| invalid(e.to_string()))?;
            let points = r
                .points
                .iter()
                .map(|p| parse_k0(p).map_err(|e| invalid(format!("band {} {}: {e}", r.band, r.side))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(LevelSet { band: r.band, side, points })
        })
        .collect::<Result<Vec<_>, InputError>>()?;
    Ok(LevelSets { sets, complete: file.complete })
}

pub fn parse_level_sets_file(path: &Path) -> Result<LevelSets, InputError> {
    parse_level_sets_str(path, &read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chiral_rows() {
        let t = parse_chiral("1,5,-1;4,1,0").unwrap();
        assert_eq!((t.count(), t.dim()), (2, 3));
        assert_eq!(parse_chiral(" 2, 3").unwrap().row(0), &[2, 3]);
        assert!(parse_chiral("1,2;3").is_err());
        assert!(parse_chiral("1.5,2").is_err());
        assert!(parse_chiral("1,2,3;2,4,6").is_ok());
        assert!(parse_chiral("1,2;3,4").is_err());
    }

    #[test]
    fn rational_points() {
        assert_eq!(parse_k0("2/3,-2/3").unwrap().to_string(), "2/3,-2/3");
        assert_eq!(parse_k0("1,1,1").unwrap().dim(), 3);
        assert!(parse_k0("1/0").is_err());
    }

    #[test]
    fn graph_parse_errors_carry_position() {
        let p = Path::new("g.json");
        let err = parse_graph_str(p, "{\n  \"dimension\": 2,\n  \"vertices\": 3\n}").unwrap_err();
        match err {
            InputError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let float_offset = r#"{"dimension":1,"vertices":[{"label":"a","potential":0}],
            "edges":[{"tail":"a","head":"a","offset":[1.5]}]}"#;
        assert!(matches!(parse_graph_str(p, float_offset), Err(InputError::Parse { line: 2, .. })));
    }

    #[test]
    fn disconnected_graph_rejected() {
        let p = Path::new("g.json");
        let text = r#"{"dimension":1,"vertices":[{"label":"a","potential":0}],
            "edges":[{"tail":"a","head":"a","offset":[2]}]}"#;
        let err = parse_graph_str(p, text).unwrap_err();
        assert_eq!(err.kind(), "validation");
        assert!(err.to_string().contains("disconnected"));
    }
}
