//! Sparse directed graphs with nonnegative edge weights.
//!
//! Storage is row-major (CSR): every kernel pass consumes whole rows, so
//! column access is never needed on the hot path. Within a row, targets are
//! sorted and unique; duplicate input edges are summed.

use std::io::BufRead;

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    row_sums: Vec<f64>,
}

/// How the third column of an edge list is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeWeights {
    /// Use the weight column when present, 1 otherwise.
    #[default]
    Weighted,
    /// Ignore any weight column; every edge has weight 1.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureReport {
    pub strongly_connected: bool,
    /// Only ever true for strongly connected graphs (primitivity).
    pub aperiodic: bool,
    pub dangling_nodes: Vec<usize>,
    pub zero_columns: Vec<usize>,
}

impl Graph {
    /// Builds a graph from `(src, dst, weight)` triples. Duplicates are summed
    /// and exact zeros dropped.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        if n == 0 {
            return Err(Error::EmptyInput);
        }
        let mut triples: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, w) in edges {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, n });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("edge weight"));
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { line: 0, weight: w });
            }
            triples.push((i, j, w));
        }
        triples.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut offsets = vec![0usize; n + 1];
        let mut targets = Vec::with_capacity(triples.len());
        let mut weights: Vec<f64> = Vec::with_capacity(triples.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, w) in triples {
            if last == Some((i, j)) {
                *weights.last_mut().unwrap() += w;
                continue;
            }
            last = Some((i, j));
            targets.push(j);
            weights.push(w);
            offsets[i + 1] += 1;
        }
        // drop zero-weight entries after summation
        let mut keep_offsets = vec![0usize; n + 1];
        let mut keep_targets = Vec::with_capacity(targets.len());
        let mut keep_weights = Vec::with_capacity(weights.len());
        let mut pos = 0;
        for i in 0..n {
            let len = offsets[i + 1];
            for k in pos..pos + len {
                if weights[k] > 0.0 {
                    keep_targets.push(targets[k]);
                    keep_weights.push(weights[k]);
                    keep_offsets[i + 1] += 1;
                }
            }
            pos += len;
        }
        for i in 0..n {
            keep_offsets[i + 1] += keep_offsets[i];
        }
        Ok(Self::from_csr(n, keep_offsets, keep_targets, keep_weights))
    }

    fn from_csr(n: usize, offsets: Vec<usize>, targets: Vec<usize>, weights: Vec<f64>) -> Self {
        let row_sums = (0..n)
            .map(|i| weights[offsets[i]..offsets[i + 1]].iter().sum())
            .collect();
        Self {
            n,
            offsets,
            targets,
            weights,
            row_sums,
        }
    }

    /// Dense row-major input; used for small matrices and tests.
    pub fn from_dense<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut edges = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            for (j, &w) in row.iter().enumerate() {
                if w < 0.0 {
                    return Err(Error::NegativeWeight {
                        line: i + 1,
                        weight: w,
                    });
                }
                if w != 0.0 {
                    edges.push((i, j, w));
                }
            }
        }
        Self::from_edges(n, edges)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NonSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let rows: Vec<Vec<f64>> = (0..m.nrows())
            .map(|i| m.row(i).iter().copied().collect())
            .collect();
        Self::from_dense(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.targets.len()
    }

    /// Iterates the stored `(target, weight)` pairs of row `i`, sorted by target.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[i]..self.offsets[i + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub(crate) fn row_slices(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.targets[range.clone()], &self.weights[range])
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row_sums[i]
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (targets, weights) = self.row_slices(i);
        match targets.binary_search(&j) {
            Ok(k) => weights[k],
            Err(_) => 0.0,
        }
    }

    /// Edges as `(src, dst, weight)` in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, w)| (i, j, w)))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, w) in self.edges() {
            m[(i, j)] = w;
        }
        m
    }

    /// True when every entry of the adjacency matrix is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.nnz() == self.n * self.n
    }

    pub fn has_zero_row(&self) -> Option<usize> {
        self.row_sums.iter().position(|&s| s <= 0.0)
    }

    /// Replaces every zero-sum row by a row of all ones (diagonal included).
    pub fn normalize_dangling(&self) -> Graph {
        if self.has_zero_row().is_none() {
            return self.clone();
        }
        let mut offsets = vec![0usize; self.n + 1];
        let mut targets = Vec::with_capacity(self.nnz());
        let mut weights = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            if self.row_sums[i] <= 0.0 {
                targets.extend(0..self.n);
                weights.extend(std::iter::repeat(1.0).take(self.n));
            } else {
                let (t, w) = self.row_slices(i);
                targets.extend_from_slice(t);
                weights.extend_from_slice(w);
            }
            offsets[i + 1] = targets.len();
        }
        Self::from_csr(self.n, offsets, targets, weights)
    }

    /// Strongly connected components (Tarjan), each listed in discovery order.
    pub fn strongly_connected_components(&self) -> Vec<Vec<usize>> {
        tarjan(self)
    }

    pub fn analyze_structure(&self) -> StructureReport {
        let sccs = tarjan(self);
        let strongly_connected = sccs.len() == 1;
        let aperiodic = strongly_connected && self.period() == 1;
        let dangling_nodes = (0..self.n).filter(|&i| self.row_sums[i] <= 0.0).collect();
        let mut has_in = vec![false; self.n];
        for &j in &self.targets {
            has_in[j] = true;
        }
        let zero_columns = (0..self.n).filter(|&j| !has_in[j]).collect();
        StructureReport {
            strongly_connected,
            aperiodic,
            dangling_nodes,
            zero_columns,
        }
    }

    /// Period of a strongly connected graph: gcd of `level(u) + 1 - level(v)`
    /// over all edges, with BFS levels from node 0.
    fn period(&self) -> usize {
        let mut level = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        level[0] = 0;
        queue.push_back(0);
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.row(u) {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for (u, v, _) in self.edges() {
            let diff = (level[u] + 1).abs_diff(level[v]);
            g = gcd(g, diff);
        }
        g
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn tarjan(g: &Graph) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = g.n();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut components = Vec::new();
    let mut next = 0usize;
    // (node, position within its row)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let (targets, _) = g.row_slices(v);
            if *pos < targets.len() {
                let w = targets[*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.reverse();
                    components.push(comp);
                }
            }
        }
    }
    components
}

/// Reads an edge list: lines `src<TAB>dst[<TAB>weight]` with 0-based indices,
/// `#` comments and an optional `#n <count>` directive declaring the node count.
/// Any whitespace separates fields.
pub fn load_edge_list<R: BufRead>(source: R, directive: EdgeWeights) -> Result<Graph> {
    let mut edges = Vec::new();
    let mut declared: Option<usize> = None;
    let mut max_index: Option<usize> = None;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let mut parts = rest.split_whitespace();
            if parts.next() == Some("n") {
                let count = parts
                    .next()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| Error::Parse {
                        line: lineno,
                        message: "malformed node-count directive, expected `#n <count>`".into(),
                    })?;
                declared = Some(count);
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 2 or 3 fields, found {}", fields.len()),
            });
        }
        let parse_index = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid node index `{s}`"),
            })
        };
        let src = parse_index(fields[0])?;
        let dst = parse_index(fields[1])?;
        let weight = match (directive, fields.get(2)) {
            (EdgeWeights::Weighted, Some(s)) => {
                let w = s.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid weight `{s}`"),
                })?;
                if !w.is_finite() {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("non-finite weight `{s}`"),
                    });
                }
                if w < 0.0 {
                    return Err(Error::NegativeWeight {
                        line: lineno,
                        weight: w,
                    });
                }
                w
            }
            _ => 1.0,
        };
        max_index = Some(max_index.map_or(src.max(dst), |m| m.max(src).max(dst)));
        edges.push((src, dst, weight));
    }
    let n = match (declared, max_index) {
        (None, None) => return Err(Error::EmptyInput),
        (Some(d), None) => d,
        (None, Some(m)) => m + 1,
        (Some(d), Some(m)) => {
            if m >= d {
                return Err(Error::IndexOutOfRange { index: m, n: d });
            }
            d
        }
    };
    Graph::from_edges(n, edges)
}

/// Reads a MatrixMarket coordinate file (`real`, `integer` or `pattern`,
/// `general` symmetry). Pattern entries get unit weight.
pub fn load_matrix_market<R: BufRead>(source: R) -> Result<Graph> {
    let mut lines = source.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
    let header = header?;
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.len() != 5
        || tokens[0] != "%%matrixmarket"
        || tokens[1] != "matrix"
        || tokens[2] != "coordinate"
    {
        return Err(Error::UnsupportedHeader(header));
    }
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        _ => return Err(Error::UnsupportedHeader(header)),
    };
    if tokens[4] != "general" {
        return Err(Error::UnsupportedHeader(header));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut edges = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parse_usize = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid integer `{s}`"),
            })
        };
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        message: "expected `rows cols entries` size line".into(),
                    });
                }
                let (rows, cols) = (parse_usize(fields[0])?, parse_usize(fields[1])?);
                if rows != cols {
                    return Err(Error::NonSquare { rows, cols });
                }
                size = Some((rows, cols, parse_usize(fields[2])?));
            }
            Some((rows, _, _)) => {
                let expected = if pattern { 2 } else { 3 };
                if fields.len() != expected {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected {expected} fields, found {}", fields.len()),
                    });
                }
                let i = parse_usize(fields[0])?;
                let j = parse_usize(fields[1])?;
                if i == 0 || j == 0 || i > rows || j > rows {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("entry ({i}, {j}) outside a {rows}x{rows} matrix"),
                    });
                }
                let w = if pattern {
                    1.0
                } else {
                    let w = fields[2].parse::<f64>().map_err(|_| Error::Parse {
                        line: lineno,
                        message: format!("invalid value `{}`", fields[2]),
                    })?;
                    if w < 0.0 {
                        return Err(Error::NegativeWeight {
                            line: lineno,
                            weight: w,
                        });
                    }
                    w
                };
                edges.push((i - 1, j - 1, w));
            }
        }
    }
    let (rows, _, declared) = size.ok_or(Error::EmptyInput)?;
    if edges.len() != declared {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "size line declares {declared} entries, found {}",
                edges.len()
            ),
        });
    }
    Graph::from_edges(rows, edges)
}

/// Synthetic graph families.
pub mod generators {
    use super::*;

    /// All-ones `n x n` matrix.
    pub fn complete(n: usize) -> Graph {
        let edges = (0..n).flat_map(|i| (0..n).map(move |j| (i, j, 1.0)));
        Graph::from_edges(n, edges).expect("valid complete graph")
    }

    /// Ring where node `i` links to itself and both neighbours.
    pub fn ring(n: usize) -> Graph {
        let edges = (0..n).flat_map(|i| {
            [(i + n - 1) % n, i, (i + 1) % n]
                .into_iter()
                .map(move |j| (i, j, 1.0))
        });
        Graph::from_edges(n, edges).expect("valid ring graph")
    }

    /// Directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n, 1.0))).expect("valid cycle")
    }

    /// Erdős–Rényi digraph: every arc (self-loops included) present
    /// independently with probability `p`, unit weights. Sampled by
    /// geometric skipping, so cost is proportional to the number of edges.
    pub fn random<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
        let mut edges = Vec::new();
        if p >= 1.0 {
            return complete(n);
        }
        if p > 0.0 {
            let total = (n as u128) * (n as u128);
            let log_q = (1.0 - p).ln();
            let mut pos: u128 = 0;
            loop {
                let u: f64 = rng.gen();
                let skip = ((1.0 - u).ln() / log_q).floor() as u128;
                pos += skip;
                if pos >= total {
                    break;
                }
                edges.push(((pos / n as u128) as usize, (pos % n as u128) as usize, 1.0));
                pos += 1;
            }
        }
        Graph::from_edges(n, edges).expect("valid random graph")
    }

    /// Random strongly connected graph: a random Hamiltonian cycle plus
    /// extra arcs with probability `p`; weights uniform in `[0.5, 2]`.
    pub fn random_irreducible<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut edges = Vec::new();
        for k in 0..n {
            edges.push((perm[k], perm[(k + 1) % n], rng.gen_range(0.5..2.0)));
        }
        for i in 0..n {
            for j in 0..n {
                if rng.gen::<f64>() < p {
                    edges.push((i, j, rng.gen_range(0.5..2.0)));
                }
            }
        }
        Graph::from_edges(n, edges).expect("valid random graph")
    }

    /// Dense matrix with entries uniform in `[lo, hi]`, `lo > 0`.
    pub fn random_positive<R: Rng + ?Sized>(n: usize, lo: f64, hi: f64, rng: &mut R) -> Graph {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (i, j, rng.gen_range(lo..=hi)))
            .collect();
        Graph::from_edges(n, edges).expect("valid positive graph")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn three_node_example() -> Graph {
        Graph::from_dense(&[[0.0, 1.0, 1.0], [1.0, 1.0, 0.0], [1.0, 0.0, 1.0]]).unwrap()
    }

    #[test]
    fn edge_list_matches_dense_example() {
        let text = "0\t1\n0\t2\n1\t0\n1\t1\n2\t0\n2\t2\n";
        let g = load_edge_list(text.as_bytes(), EdgeWeights::Weighted).unwrap();
        assert_eq!(g, three_node_example());
    }

    #[test]
    fn single_self_loop() {
        let g = load_edge_list("0\t0\n".as_bytes(), EdgeWeights::Weighted).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 0, 1.0)]);
    }

    #[test]
    fn negative_weight_rejected() {
        let err = load_edge_list("0\t1\t-1\n".as_bytes(), EdgeWeights::Weighted).unwrap_err();
        assert!(matches!(err, Error::NegativeWeight { line: 1, .. }));
    }

    #[test]
    fn malformed_line_reports_number() {
        let err =
            load_edge_list("# c\n0\t1\n0\tx\n".as_bytes(), EdgeWeights::Weighted).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = load_edge_list("0 1 2 3\n".as_bytes(), EdgeWeights::Weighted).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn empty_stream_rejected() {
        let err =
            load_edge_list("# only a comment\n".as_bytes(), EdgeWeights::Weighted).unwrap_err();
        assert!(matches!(err, Error::EmptyInput));
    }

    #[test]
    fn duplicates_summed_and_unit_directive() {
        let text = "0 1 2.5\n0 1 0.5\n1 0\n";
        let g = load_edge_list(text.as_bytes(), EdgeWeights::Weighted).unwrap();
        assert_eq!(g.weight(0, 1), 3.0);
        let g = load_edge_list(text.as_bytes(), EdgeWeights::Unit).unwrap();
        assert_eq!(g.weight(0, 1), 2.0);
    }

    #[test]
    fn node_count_directive() {
        let g = load_edge_list("#n 5\n0\t1\n".as_bytes(), EdgeWeights::Weighted).unwrap();
        assert_eq!(g.n(), 5);
        assert_eq!(g.analyze_structure().dangling_nodes, vec![1, 2, 3, 4]);
        let err = load_edge_list("#n 2\n0\t3\n".as_bytes(), EdgeWeights::Weighted).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { .. }));
    }

    #[test]
    fn matrix_market_pattern() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n% comment\n3 3 6\n1 2\n1 3\n2 1\n2 2\n3 1\n3 3\n";
        let g = load_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(g, three_node_example());
    }

    #[test]
    fn matrix_market_real_and_errors() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 2 0.5\n2 1 4\n";
        let g = load_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(g.weight(0, 1), 0.5);
        assert_eq!(g.weight(1, 0), 4.0);

        let non_square = "%%MatrixMarket matrix coordinate real general\n2 3 0\n";
        assert!(matches!(
            load_matrix_market(non_square.as_bytes()),
            Err(Error::NonSquare { rows: 2, cols: 3 })
        ));
        let symmetric = "%%MatrixMarket matrix coordinate real symmetric\n2 2 0\n";
        assert!(matches!(
            load_matrix_market(symmetric.as_bytes()),
            Err(Error::UnsupportedHeader(_))
        ));
        let array = "%%MatrixMarket matrix array real general\n2 2\n";
        assert!(matches!(
            load_matrix_market(array.as_bytes()),
            Err(Error::UnsupportedHeader(_))
        ));
    }

    #[test]
    fn matrix_market_empty_list_is_all_dangling() {
        let text = "%%MatrixMarket matrix coordinate pattern general\n4 4 0\n";
        let g = load_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.analyze_structure().dangling_nodes, vec![0, 1, 2, 3]);
    }

    #[test]
    fn dangling_rows_become_all_ones() {
        let g = Graph::from_dense(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let norm = g.normalize_dangling();
        assert_eq!(norm, Graph::from_dense(&[[0.0, 1.0], [1.0, 1.0]]).unwrap());
        assert_eq!(norm.normalize_dangling(), norm);

        let clean = three_node_example();
        assert_eq!(clean.normalize_dangling(), clean);

        let single = Graph::from_edges(1, std::iter::empty()).unwrap();
        assert_eq!(
            single.normalize_dangling(),
            Graph::from_dense(&[[1.0]]).unwrap()
        );
    }

    #[test]
    fn structure_examples() {
        let two_cycle = Graph::from_dense(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let r = two_cycle.analyze_structure();
        assert!(r.strongly_connected);
        assert!(!r.aperiodic);

        let r = three_node_example().analyze_structure();
        assert!(r.strongly_connected && r.aperiodic);

        let r = Graph::from_dense(&[[0.0, 1.0], [0.0, 1.0]])
            .unwrap()
            .analyze_structure();
        assert!(!r.strongly_connected);
        assert!(!r.aperiodic);
        assert_eq!(r.zero_columns, vec![0]);

        let r = generators::cycle(6).analyze_structure();
        assert!(r.strongly_connected && !r.aperiodic);
    }

    #[test]
    fn complete_graphs_are_primitive() {
        for n in 1..8 {
            let r = generators::complete(n).analyze_structure();
            assert!(r.strongly_connected && r.aperiodic, "n = {n}");
        }
    }

    fn reachable_from(g: &Graph, s: usize) -> Vec<bool> {
        let mut seen = vec![false; g.n()];
        let mut queue = vec![s];
        seen[s] = true;
        while let Some(u) = queue.pop() {
            for (v, _) in g.row(u) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen
    }

    #[test]
    fn strong_connectivity_matches_reachability_oracle() {
        let mut rng = seeded(11);
        for case in 0..300 {
            let n = 1 + case % 64;
            let p = [0.02, 0.05, 0.1, 0.3][case % 4];
            let g = generators::random(n, p, &mut rng);
            let oracle = (0..n).all(|s| reachable_from(&g, s).iter().all(|&b| b));
            assert_eq!(
                g.analyze_structure().strongly_connected,
                oracle,
                "case {case}"
            );
            let sccs = g.strongly_connected_components();
            assert_eq!(sccs.iter().map(Vec::len).sum::<usize>(), n);
        }
    }

    #[test]
    fn row_sums_are_recomputable() {
        let mut rng = seeded(3);
        for _ in 0..20 {
            let g = generators::random_irreducible(9, 0.3, &mut rng).normalize_dangling();
            for i in 0..g.n() {
                let s: f64 = g.row(i).map(|(_, w)| w).sum();
                assert_eq!(s, g.row_sum(i));
            }
        }
    }

    #[test]
    fn random_generator_density() {
        let mut rng = seeded(5);
        let n = 2000;
        let g = generators::random(n, 10.0 / n as f64, &mut rng);
        let mean = g.nnz() as f64 / n as f64;
        assert!((mean - 10.0).abs() < 0.5, "mean out-degree {mean}");
    }
}
