//! Flat-file formats.
//!
//! Graph text format (`.wg`), line oriented, UTF-8:
//! ```text
//! # comment
//! vertex <id> <m> <c>
//! edge <u> <v> <b>
//! root <id>
//! ```
//! Profile format (`.wsp`), a CSV with header
//! `r,sphere_measure,kappa_plus,kappa_minus,q` and rows for `r = 0..=R`
//! ascending; `kappa_plus` may be blank on the last row only.
//!
//! All numbers are written with 17 significant digits so that parsing a
//! written file reproduces every `f64` bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::graph::{VertexId, WeightedGraph};
use crate::profile::{GrowthRule, SymmetricProfile};
use crate::verdict::Verdict;

#[derive(Debug, Error)]
pub enum FileFormatError {
    #[error("ParseError: line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("BalanceViolation: {0}")]
    Balance(String),
    #[error("ValidationError: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, message: impl Into<String>) -> FileFormatError {
    FileFormatError::Parse {
        line,
        message: message.into(),
    }
}

/// 17 significant digits; round-trips any finite `f64` exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_num<T: std::str::FromStr>(
    token: &str,
    line: usize,
    what: &str,
) -> Result<T, FileFormatError> {
    token
        .parse::<T>()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {token:?}")))
}

pub fn parse_graph_str(text: &str) -> Result<WeightedGraph, FileFormatError> {
    let mut vertices = Vec::new();
    let mut edges = Vec::new();
    let mut root: Option<(usize, usize)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a token");
        let rest: Vec<&str> = tokens.collect();
        match keyword {
            "vertex" => {
                if rest.len() != 3 {
                    return Err(parse_err(lineno, "expected: vertex <id> <m> <c>"));
                }
                let id: usize = parse_num(rest[0], lineno, "vertex id")?;
                let m: f64 = parse_num(rest[1], lineno, "measure")?;
                let c: f64 = parse_num(rest[2], lineno, "potential")?;
                vertices.push((id, m, c));
            }
            "edge" => {
                if rest.len() != 3 {
                    return Err(parse_err(lineno, "expected: edge <u> <v> <b>"));
                }
                let u: usize = parse_num(rest[0], lineno, "vertex id")?;
                let v: usize = parse_num(rest[1], lineno, "vertex id")?;
                let b: f64 = parse_num(rest[2], lineno, "edge weight")?;
                if u == v {
                    return Err(parse_err(lineno, format!("SelfLoop: edge ({u}, {v})")));
                }
                edges.push((u, v, b));
            }
            "root" => {
                if rest.len() != 1 {
                    return Err(parse_err(lineno, "expected: root <id>"));
                }
                if let Some((_, prev)) = root {
                    return Err(parse_err(
                        lineno,
                        format!("root already declared on line {prev}"),
                    ));
                }
                let id: usize = parse_num(rest[0], lineno, "root id")?;
                root = Some((id, lineno));
            }
            other => {
                return Err(parse_err(lineno, format!("unknown keyword {other:?}")));
            }
        }
    }
    WeightedGraph::build(
        &vertices,
        &edges,
        root.map(|(id, _)| VertexId(id)),
    )
    .map_err(|e| FileFormatError::Validation(e.to_string()))
}

pub fn parse_graph_file(path: impl AsRef<Path>) -> Result<WeightedGraph, FileFormatError> {
    parse_graph_str(&std::fs::read_to_string(path)?)
}

pub fn write_graph_string(graph: &WeightedGraph) -> String {
    let mut out = String::new();
    for i in 0..graph.vertex_count() {
        let v = VertexId(i);
        let _ = writeln!(
            out,
            "vertex {i} {} {}",
            fmt_f64(graph.measure(v)),
            fmt_f64(graph.potential(v))
        );
    }
    for &(u, v, b) in graph.edges() {
        let _ = writeln!(out, "edge {u} {v} {}", fmt_f64(b));
    }
    let _ = writeln!(out, "root {}", graph.root());
    out
}

pub fn write_graph_file(
    path: impl AsRef<Path>,
    graph: &WeightedGraph,
) -> Result<(), FileFormatError> {
    std::fs::write(path, write_graph_string(graph))?;
    Ok(())
}

pub const PROFILE_HEADER: &str = "r,sphere_measure,kappa_plus,kappa_minus,q";

/// Balance is rechecked on parse at this relative tolerance.
pub const PARSE_BALANCE_TOL: f64 = 1e-9;

pub fn parse_profile_str(text: &str) -> Result<SymmetricProfile, FileFormatError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty profile file"))?;
    if header.trim() != PROFILE_HEADER {
        return Err(parse_err(
            1,
            format!("header must be {PROFILE_HEADER:?}, got {:?}", header.trim()),
        ));
    }
    let mut sphere_measure = Vec::new();
    let mut kappa_plus: Vec<f64> = Vec::new();
    let mut kappa_minus = Vec::new();
    let mut q = Vec::new();
    let mut blank_kappa = false;
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(parse_err(lineno, "expected 5 comma-separated fields"));
        }
        let r: usize = parse_num(fields[0], lineno, "radius")?;
        if r != sphere_measure.len() {
            return Err(parse_err(
                lineno,
                format!("radii must ascend from 0, expected {}, got {r}", sphere_measure.len()),
            ));
        }
        if blank_kappa {
            return Err(parse_err(
                lineno,
                "kappa_plus may be blank on the last row only",
            ));
        }
        sphere_measure.push(parse_num::<f64>(fields[1], lineno, "sphere_measure")?);
        if fields[2].is_empty() {
            blank_kappa = true;
        } else {
            kappa_plus.push(parse_num::<f64>(fields[2], lineno, "kappa_plus")?);
        }
        kappa_minus.push(parse_num::<f64>(fields[3], lineno, "kappa_minus")?);
        q.push(parse_num::<f64>(fields[4], lineno, "q")?);
    }
    if sphere_measure.is_empty() {
        return Err(parse_err(2, "profile has no rows"));
    }
    if kappa_minus[0] != 0.0 {
        return Err(FileFormatError::Balance(format!(
            "kappa_minus must vanish at the root sphere, got {}",
            kappa_minus[0]
        )));
    }
    let profile = SymmetricProfile::new(
        sphere_measure,
        kappa_plus,
        kappa_minus,
        q,
        GrowthRule::Tabulated,
    )
    .map_err(|e| FileFormatError::Validation(e.to_string()))?;
    let check = crate::profile::validate_profile(&profile, PARSE_BALANCE_TOL);
    if check.verdict != Verdict::Positive {
        return Err(FileFormatError::Balance(
            check.detail.unwrap_or_else(|| "balance identity violated".into()),
        ));
    }
    Ok(profile)
}

pub fn parse_profile_file(path: impl AsRef<Path>) -> Result<SymmetricProfile, FileFormatError> {
    parse_profile_str(&std::fs::read_to_string(path)?)
}

pub fn write_profile_string(p: &SymmetricProfile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{PROFILE_HEADER}");
    for r in 0..=p.max_radius() {
        let kp = p
            .kappa_plus(r)
            .map(fmt_f64)
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{r},{},{kp},{},{}",
            fmt_f64(p.sphere_measure(r)),
            fmt_f64(p.kappa_minus(r)),
            fmt_f64(p.q(r))
        );
    }
    out
}

pub fn write_profile_file(
    path: impl AsRef<Path>,
    p: &SymmetricProfile,
) -> Result<(), FileFormatError> {
    std::fs::write(path, write_profile_string(p))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{antitree_profile, make_antitree, make_sym_tree, Branching};

    #[test]
    fn parses_minimal_graph() {
        let text = "# a path\nvertex 0 1.0 0.0\nvertex 1 1.0 0.0\nvertex 2 1.0 0.0\n\
                    edge 0 1 1.0\nedge 1 2 1.0\n";
        let g = parse_graph_str(text).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.root(), VertexId(0));
    }

    #[test]
    fn self_loop_is_a_parse_error_with_line_number() {
        let text = "vertex 0 1.0 0.0\nedge 0 0 1.0\n";
        match parse_graph_str(text).unwrap_err() {
            FileFormatError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("SelfLoop"));
            }
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn validation_errors_carry_module_error_names() {
        let text = "vertex 0 1.0 0.0\nvertex 1 1.0 0.0\nvertex 2 1.0 0.0\nedge 0 1 1.0\n";
        let err = parse_graph_str(text).unwrap_err();
        assert!(err.to_string().contains("Disconnected"));
    }

    #[test]
    fn graph_round_trip_is_exact() {
        let mut rng = crate::fixtures::rng(2718);
        let g = crate::fixtures::random_connected_graph(&mut rng, 5, 40, true);
        let parsed = parse_graph_str(&write_graph_string(&g)).unwrap();
        assert_eq!(g.vertex_count(), parsed.vertex_count());
        assert_eq!(g.root(), parsed.root());
        assert_eq!(g.measures(), parsed.measures());
        assert_eq!(g.potentials(), parsed.potentials());
        assert_eq!(g.edges(), parsed.edges());
    }

    #[test]
    fn profile_round_trip_is_exact() {
        for p in [
            antitree_profile(2.5, 9),
            make_sym_tree(&Branching::Regular(3), 7).unwrap().1,
        ] {
            let parsed = parse_profile_str(&write_profile_string(&p)).unwrap();
            assert_eq!(p.sphere_measures(), parsed.sphere_measures());
            assert_eq!(p.max_radius(), parsed.max_radius());
            for r in 0..=p.max_radius() {
                assert_eq!(p.kappa_plus(r), parsed.kappa_plus(r));
                assert_eq!(p.kappa_minus(r), parsed.kappa_minus(r));
                assert_eq!(p.q(r), parsed.q(r));
            }
        }
    }

    #[test]
    fn blank_kappa_plus_allowed_on_last_row_only() {
        let (_, p) = make_antitree(2.0, 3).unwrap();
        let mut text = String::from(PROFILE_HEADER);
        text.push('\n');
        for r in 0..=3usize {
            let kp = if r == 1 {
                String::new()
            } else {
                fmt_f64(p.kappa_plus(r).unwrap())
            };
            text.push_str(&format!(
                "{r},{},{kp},{},{}\n",
                fmt_f64(p.sphere_measure(r)),
                fmt_f64(p.kappa_minus(r)),
                fmt_f64(p.q(r))
            ));
        }
        assert!(matches!(
            parse_profile_str(&text),
            Err(FileFormatError::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn half_line_profile_parses() {
        let text = "r,sphere_measure,kappa_plus,kappa_minus,q\n\
                    0,1.0,1.0,0.0,0.0\n1,1.0,1.0,1.0,0.0\n2,1.0,,1.0,0.0\n";
        let p = parse_profile_str(text).unwrap();
        assert_eq!(p.max_radius(), 2);
        assert_eq!(p.boundary_radius(), 1);
    }

    #[test]
    fn nonzero_root_kappa_minus_is_balance_violation() {
        let text = "r,sphere_measure,kappa_plus,kappa_minus,q\n\
                    0,1.0,1.0,0.5,0.0\n1,1.0,,1.0,0.0\n";
        assert!(matches!(
            parse_profile_str(text),
            Err(FileFormatError::Balance(_))
        ));
    }

    #[test]
    fn misspelled_header_is_parse_error() {
        let text = "r,sphere_measure,kplus,kappa_minus,q\n0,1.0,1.0,0.0,0.0\n";
        assert!(matches!(
            parse_profile_str(text),
            Err(FileFormatError::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn unbalanced_rows_are_rejected() {
        let text = "r,sphere_measure,kappa_plus,kappa_minus,q\n\
                    0,1.0,2.0,0.0,0.0\n1,1.0,,1.0,0.0\n";
        assert!(matches!(
            parse_profile_str(text),
            Err(FileFormatError::Balance(_))
        ));
    }
}
