use std::fmt::Write as _;

use super::{Edge, WeightedMultigraph};
use crate::error::{Error, Result};

impl WeightedMultigraph {
    /// Parses the line format: header `n m`, then `m` lines `edge_id u v w`.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "missing header".into() })?;
        let h = parse_fields(hline + 1, header, 2)?;
        let (n, m) = (h[0] as usize, h[1] as usize);
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            let f = parse_fields(idx + 1, line, 4)?;
            edges.push(Edge::new(f[0] as usize, f[1] as usize, f[2] as usize, f[3]));
        }
        if edges.len() != m {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header announces {m} edges, found {}", edges.len()),
            });
        }
        WeightedMultigraph::new(n, edges)
    }

    /// Serializes in id order; `from_text(to_text(g)) == g`.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(16 * (self.m() + 1));
        let _ = writeln!(out, "{} {}", self.n(), self.m());
        for e in self.edges() {
            let _ = writeln!(out, "{} {} {} {}", e.id, e.u, e.v, e.w);
        }
        out
    }
}

fn parse_fields(line: usize, text: &str, want: usize) -> Result<Vec<u64>> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != want {
        return Err(Error::Parse { line, msg: format!("expected {want} fields, found {}", fields.len()) });
    }
    fields
        .iter()
        .map(|f| f.parse::<u64>().map_err(|e| Error::Parse { line, msg: format!("{f:?}: {e}") }))
        .collect()
}
