//! Plain-text formats for graphs, measures and vertex functions.
//!
//! Every format is whitespace separated, one record per line, with blank
//! lines and `#` comments ignored. Floats are written in the shortest form
//! that parses back to the identical `f64`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::function::VertexFunction;
use crate::graph::{GraphBuilder, WeightedGraph};

/// Lines of a data file with their 1-based numbers, comments stripped.
pub(crate) fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let body = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_float(path: &Path, line: usize, s: &str) -> Result<f64> {
    s.parse::<f64>()
        .map_err(|_| parse_error(path, line, format!("not a number: {s:?}")))
}

/// Shortest decimal that round-trips to the same `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:?}")
}

/// Reads an edge list (`x y w` or a lone `x` for a vertex) and an optional
/// measure file (`x mu`). Missing measures default to 1.
pub fn read_graph(graph_path: &Path, measure_path: Option<&Path>) -> Result<WeightedGraph> {
    let mut builder = GraphBuilder::new();
    let text = read_text(graph_path)?;
    for (line, fields) in records(&text) {
        let at = |e: Error| parse_error(graph_path, line, e.to_string());
        match fields.as_slice() {
            [x] => {
                builder.add_vertex(x);
            }
            [x, y, w] => {
                let w = parse_float(graph_path, line, w)?;
                builder.add_edge(x, y, w).map_err(at)?;
            }
            _ => return Err(parse_error(graph_path, line, "expected \"x y w\"")),
        }
    }
    if let Some(path) = measure_path {
        let text = read_text(path)?;
        for (line, fields) in records(&text) {
            let [x, mu] = fields.as_slice() else {
                return Err(parse_error(path, line, "expected \"x mu\""));
            };
            let mu = parse_float(path, line, mu)?;
            builder
                .set_measure(x, mu)
                .map_err(|e| parse_error(path, line, e.to_string()))?;
        }
    }
    builder.build()
}

pub fn graph_to_string(graph: &WeightedGraph) -> String {
    let mut out = String::new();
    for &(a, b, w) in graph.edges() {
        out.push_str(&format!("{} {} {}\n", graph.id(a), graph.id(b), format_float(w)));
    }
    if graph.edge_count() == 0 {
        for id in graph.ids() {
            out.push_str(&format!("{id}\n"));
        }
    }
    out
}

pub fn measure_to_string(graph: &WeightedGraph) -> String {
    graph
        .ids()
        .iter()
        .zip(graph.measures())
        .map(|(id, mu)| format!("{id} {}\n", format_float(*mu)))
        .collect()
}

pub fn write_graph(graph: &WeightedGraph, graph_path: &Path, measure_path: Option<&Path>) -> Result<()> {
    write_text(graph_path, &graph_to_string(graph))?;
    if let Some(path) = measure_path {
        write_text(path, &measure_to_string(graph))?;
    }
    Ok(())
}

/// Reads `x value` lines; vertices not listed are zero.
pub fn read_function(graph: &WeightedGraph, path: &Path) -> Result<VertexFunction> {
    let text = read_text(path)?;
    let mut values = vec![0.0; graph.vertex_count()];
    let mut seen = vec![false; graph.vertex_count()];
    for (line, fields) in records(&text) {
        let [x, v] = fields.as_slice() else {
            return Err(parse_error(path, line, "expected \"x value\""));
        };
        let idx = graph
            .vertex(x)
            .map_err(|e| parse_error(path, line, e.to_string()))?;
        if seen[idx] {
            return Err(parse_error(path, line, format!("vertex {x:?} listed twice")));
        }
        seen[idx] = true;
        values[idx] = parse_float(path, line, v)?;
    }
    Ok(VertexFunction::from_values(values))
}

/// Tab-separated `x value` lines in vertex order.
pub fn function_to_string(graph: &WeightedGraph, u: &VertexFunction) -> String {
    graph
        .ids()
        .iter()
        .enumerate()
        .map(|(x, id)| format!("{id}\t{}\n", format_float(u.value(x))))
        .collect()
}

pub fn write_function(graph: &WeightedGraph, u: &VertexFunction, path: &Path) -> Result<()> {
    write_text(path, &function_to_string(graph, u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [1.0, 0.1, 1.0 / 3.0, 1e-300, -2.5e17, f64::MIN_POSITIVE] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_float(1.0), "1.0");
    }

    #[test]
    fn records_skip_comments() {
        let r: Vec<_> = records("# head\n\na b 1 # tail\n  c  \n").collect();
        assert_eq!(r, vec![(3, vec!["a", "b", "1"]), (4, vec!["c"])]);
    }
}
