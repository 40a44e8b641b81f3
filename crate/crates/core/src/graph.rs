//! Simple undirected graphs over a dense vertex range, their edge-list text
//! format, and Boolean layer aggregation.
//!
//! Adjacency is stored in compressed form: `offsets[u]..offsets[u + 1]`
//! indexes the sorted neighbor run of `u` inside `targets`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

pub type VertexId = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

/// What [`UndirectedGraph::from_edges_counted`] threw away.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dropped {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Dropped {
    pub fn total(&self) -> usize {
        self.self_loops + self.duplicates
    }
}

impl UndirectedGraph {
    pub fn empty(n: usize) -> Self {
        Self {
            offsets: vec![0; n + 1],
            targets: Vec::new(),
        }
    }

    /// Builds a graph from unordered pairs, silently dropping self-loops and
    /// repeated pairs.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        Self::from_edges_counted(n, edges).map(|(g, _)| g)
    }

    pub fn from_edges_counted<I>(n: usize, edges: I) -> Result<(Self, Dropped)>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut dropped = Dropped::default();
        let mut pairs = Vec::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: w as u64,
                        n,
                    });
                }
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            pairs.push(if u < v { (u, v) } else { (v, u) });
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        dropped.duplicates = before - pairs.len();
        Ok((Self::from_canonical_pairs(n, &pairs), dropped))
    }

    /// `pairs` must be sorted, deduplicated, loop-free and satisfy `u < v`.
    fn from_canonical_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in pairs {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut acc = 0;
        for d in &degree {
            acc += d;
            offsets.push(acc);
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0; acc];
        // Pairs are sorted by (u, v): the first pass fills every run with its
        // lower neighbors in ascending order, the second appends the higher
        // ones, so no per-vertex sort is needed.
        for &(u, v) in pairs {
            targets[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for &(u, v) in pairs {
            targets[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
        }
        Self { offsets, targets }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: VertexId) -> &[VertexId] {
        let u = u as usize;
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: VertexId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        (0..self.n() as VertexId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n <= 1 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0 as VertexId];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    pub(crate) fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub(crate) fn targets(&self) -> &[VertexId] {
        &self.targets
    }
}

/// Graph read from an edge-list stream along with the entries it discarded.
#[derive(Clone, Debug)]
pub struct ParsedGraph {
    pub graph: UndirectedGraph,
    pub dropped: Dropped,
}

fn parse_vertex(tok: &str, line: usize) -> Result<VertexId> {
    tok.parse::<VertexId>().map_err(|e| Error::Parse {
        line,
        msg: format!("bad vertex id {tok:?}: {e}"),
    })
}

fn declared_n(comment: &str, line: usize) -> Result<Option<usize>> {
    let body = comment.trim_start_matches('#').trim();
    let Some(rest) = body.strip_prefix("n=") else {
        return Ok(None);
    };
    rest.trim()
        .parse::<usize>()
        .map(Some)
        .map_err(|e| Error::Parse {
            line,
            msg: format!("bad vertex count {rest:?}: {e}"),
        })
}

/// Reads a whitespace-, tab- or comma-separated edge list.
///
/// Lines starting with `#` are comments, except `# n=<count>` which declares
/// the vertex count. The resulting `n` is the largest of `n_hint`, the
/// declared count and one past the highest id seen; ids at or above a
/// declared count are rejected.
pub fn parse_edge_list<R: BufRead>(reader: R, n_hint: Option<usize>) -> Result<ParsedGraph> {
    let mut declared: Option<usize> = None;
    let mut pairs = Vec::new();
    let mut max_id: Option<(VertexId, usize)> = None;
    let mut saw_content = false;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        saw_content = true;
        if line.starts_with('#') {
            if let Some(count) = declared_n(line, lineno)? {
                if declared.is_some_and(|d| d != count) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("conflicting vertex count declaration n={count}"),
                    });
                }
                declared = Some(count);
            }
            continue;
        }
        let mut toks = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty());
        let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected two vertex ids, got {line:?}"),
            });
        };
        let u = parse_vertex(a, lineno)?;
        let v = parse_vertex(b, lineno)?;
        let hi = u.max(v);
        if max_id.is_none_or(|(m, _)| hi > m) {
            max_id = Some((hi, lineno));
        }
        pairs.push((u, v));
    }

    if !saw_content && n_hint.is_none() {
        return Err(Error::Parse {
            line: 0,
            msg: "empty edge list".into(),
        });
    }
    if let (Some(d), Some((hi, _))) = (declared, max_id) {
        if hi as usize >= d {
            return Err(Error::VertexOutOfRange {
                vertex: hi as u64,
                n: d,
            });
        }
    }
    let n = [
        n_hint.unwrap_or(0),
        declared.unwrap_or(0),
        max_id.map_or(0, |(hi, _)| hi as usize + 1),
    ]
    .into_iter()
    .max()
    .unwrap_or(0);

    let (graph, dropped) = UndirectedGraph::from_edges_counted(n, pairs)?;
    Ok(ParsedGraph { graph, dropped })
}

/// Writes `# n=<n>` followed by one `u\tv` line per edge (`u < v`, sorted).
pub fn write_edge_list<W: Write>(g: &UndirectedGraph, mut sink: W) -> Result<()> {
    writeln!(sink, "# n={}", g.n())?;
    for (u, v) in g.edges() {
        writeln!(sink, "{u}\t{v}")?;
    }
    sink.flush()?;
    Ok(())
}

fn check_same_n(gx: &UndirectedGraph, gy: &UndirectedGraph) -> Result<()> {
    if gx.n() != gy.n() {
        return Err(Error::DimensionMismatch {
            left: gx.n(),
            right: gy.n(),
        });
    }
    Ok(())
}

fn merge_layers<F>(gx: &UndirectedGraph, gy: &UndirectedGraph, mut merge: F) -> UndirectedGraph
where
    F: FnMut(&[VertexId], &[VertexId], &mut Vec<VertexId>),
{
    let n = gx.n();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    for u in 0..n as VertexId {
        merge(gx.neighbors(u), gy.neighbors(u), &mut targets);
        offsets.push(targets.len());
    }
    UndirectedGraph { offsets, targets }
}

/// Edge-set intersection of two layers over the same vertex set.
pub fn and_aggregate(gx: &UndirectedGraph, gy: &UndirectedGraph) -> Result<UndirectedGraph> {
    check_same_n(gx, gy)?;
    Ok(merge_layers(gx, gy, |a, b, out| {
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
    }))
}

/// Edge-set union of two layers over the same vertex set.
pub fn or_aggregate(gx: &UndirectedGraph, gy: &UndirectedGraph) -> Result<UndirectedGraph> {
    check_same_n(gx, gy)?;
    Ok(merge_layers(gx, gy, |a, b, out| {
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
    }))
}

/// A homogeneous multilayer network: every layer spans the same `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HoMln {
    n: usize,
    layers: Vec<UndirectedGraph>,
    labels: Vec<String>,
}

impl HoMln {
    pub fn new(layers: Vec<UndirectedGraph>, labels: Vec<String>) -> Result<Self> {
        let Some(first) = layers.first() else {
            return Err(Error::InvalidParameter(
                "a multilayer network needs at least one layer".into(),
            ));
        };
        if labels.len() != layers.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} layers",
                labels.len(),
                layers.len()
            )));
        }
        let n = first.n();
        for layer in &layers[1..] {
            if layer.n() != n {
                return Err(Error::DimensionMismatch {
                    left: n,
                    right: layer.n(),
                });
            }
        }
        Ok(Self { n, layers, labels })
    }

    /// Layers labelled `L1`, `L2`, ...
    pub fn from_layers(layers: Vec<UndirectedGraph>) -> Result<Self> {
        let labels = (1..=layers.len()).map(|i| format!("L{i}")).collect();
        Self::new(layers, labels)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[UndirectedGraph] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> Option<&UndirectedGraph> {
        self.layers.get(i)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// AND of the layers at `indices`, folded left to right.
    pub fn and_of(&self, indices: &[usize]) -> Result<UndirectedGraph> {
        let mut iter = indices.iter().map(|&i| {
            self.layers.get(i).ok_or(Error::LayerOutOfRange {
                index: i,
                layers: self.layers.len(),
            })
        });
        let Some(first) = iter.next() else {
            return Err(Error::InvalidParameter("no layers selected".into()));
        };
        let mut acc = first?.clone();
        for g in iter {
            acc = and_aggregate(&acc, g?)?;
        }
        Ok(acc)
    }
}
