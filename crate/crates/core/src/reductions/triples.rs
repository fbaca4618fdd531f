//! Triple systems: 3-element vertex subsets with gadget provenance.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexRole {
    WheelHub,
    WheelTip,
    TreeNode,
    Root,
    Clause,
    /// Vertices of systems read from disk without gadget information.
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TripleTag {
    Wheel {
        var: usize,
        copy: usize,
        pos: usize,
    },
    Tree {
        var: usize,
        occurrence: usize,
        positive: bool,
        level: usize,
        /// Heap index inside the tree; 1 is the root.
        pos: usize,
    },
    Clause {
        clause: usize,
        /// Bit `i` is the value given to the clause's `i`-th variable.
        assignment: u8,
        /// 0 = the triple on the three fresh vertices, 1 and 2 = side triples.
        slot: u8,
    },
    Plain,
}

/// A set of distinct 3-vertex triples over `n_vertices` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripleSystem {
    roles: Vec<VertexRole>,
    triples: Vec<[usize; 3]>,
    tags: Vec<TripleTag>,
}

impl TripleSystem {
    /// Builds a system; each triple is stored sorted. Duplicate triples are rejected.
    pub fn new(roles: Vec<VertexRole>, triples: Vec<[usize; 3]>, tags: Vec<TripleTag>) -> Result<Self> {
        if tags.len() != triples.len() {
            return Err(Error::MalformedTripleSystem(format!(
                "{} tags for {} triples",
                tags.len(),
                triples.len()
            )));
        }
        let n = roles.len();
        let mut seen = BTreeSet::new();
        let mut sorted = Vec::with_capacity(triples.len());
        for (i, t) in triples.into_iter().enumerate() {
            let mut t = t;
            t.sort_unstable();
            if t[0] == t[1] || t[1] == t[2] {
                return Err(Error::MalformedTripleSystem(format!("triple {i} repeats a vertex: {t:?}")));
            }
            if t[2] >= n {
                return Err(Error::MalformedTripleSystem(format!("triple {i} uses vertex {} of {n}", t[2])));
            }
            if !seen.insert(t) {
                return Err(Error::MalformedTripleSystem(format!("duplicate triple {t:?}")));
            }
            sorted.push(t);
        }
        Ok(Self { roles, triples: sorted, tags })
    }

    /// Untagged system over `n_vertices` vertices.
    pub fn plain(n_vertices: usize, triples: Vec<[usize; 3]>) -> Result<Self> {
        let tags = vec![TripleTag::Plain; triples.len()];
        Self::new(vec![VertexRole::Plain; n_vertices], triples, tags)
    }

    pub fn n_vertices(&self) -> usize {
        self.roles.len()
    }

    /// Size of a perfect matching, `|V|/3`, when `|V|` is divisible by 3.
    pub fn target_size(&self) -> Option<usize> {
        (self.roles.len() % 3 == 0).then_some(self.roles.len() / 3)
    }

    pub fn triples(&self) -> &[[usize; 3]] {
        &self.triples
    }

    pub fn tags(&self) -> &[TripleTag] {
        &self.tags
    }

    pub fn roles(&self) -> &[VertexRole] {
        &self.roles
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n_vertices()];
        for t in &self.triples {
            for &v in t {
                d[v] += 1;
            }
        }
        d
    }

    /// Maximum vertex degree.
    pub fn degree_bound(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    /// Drops the given vertices and every triple touching them; survivors are renumbered.
    pub fn without_vertices(&self, removed: &[usize]) -> Self {
        let gone: BTreeSet<usize> = removed.iter().copied().collect();
        let mut map = vec![usize::MAX; self.n_vertices()];
        let mut roles = Vec::new();
        for v in 0..self.n_vertices() {
            if !gone.contains(&v) {
                map[v] = roles.len();
                roles.push(self.roles[v]);
            }
        }
        let mut triples = Vec::new();
        let mut tags = Vec::new();
        for (t, tag) in self.triples.iter().zip(&self.tags) {
            if t.iter().all(|v| !gone.contains(v)) {
                triples.push([map[t[0]], map[t[1]], map[t[2]]]);
                tags.push(*tag);
            }
        }
        Self::new(roles, triples, tags).expect("a subsystem of a valid system is valid")
    }

    /// `p 3dm <|V|> <|T|>` followed by one 1-based triple per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("p 3dm {} {}\n", self.n_vertices(), self.triples.len());
        for t in &self.triples {
            out.push_str(&format!("{} {} {}\n", t[0] + 1, t[1] + 1, t[2] + 1));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut header = None;
        let mut triples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let bad = |m: &str| Error::Parse(format!("line {}: {m}", lineno + 1));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.first() == Some(&"p") {
                if parts.len() != 4 || parts[1] != "3dm" {
                    return Err(bad("expected 'p 3dm <vertices> <triples>'"));
                }
                let v: usize = parts[2].parse().map_err(|_| bad("bad vertex count"))?;
                let t: usize = parts[3].parse().map_err(|_| bad("bad triple count"))?;
                header = Some((v, t));
                continue;
            }
            if header.is_none() {
                return Err(bad("triple before header"));
            }
            if parts.len() != 3 {
                return Err(bad("expected three vertices"));
            }
            let mut t = [0usize; 3];
            for (slot, p) in t.iter_mut().zip(&parts) {
                let v: usize = p.parse().map_err(|_| bad("bad vertex"))?;
                if v == 0 {
                    return Err(bad("vertices are 1-based"));
                }
                *slot = v - 1;
            }
            triples.push(t);
        }
        let (v, t) = header.ok_or_else(|| Error::Parse("missing 'p 3dm' header".into()))?;
        if triples.len() != t {
            return Err(Error::Parse(format!("header declares {t} triples, found {}", triples.len())));
        }
        Self::plain(v, triples)
    }
}
