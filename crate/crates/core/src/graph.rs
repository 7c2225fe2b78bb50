//! Combinatorics of the complete graph `K_n`.
//!
//! Edges of `K_n` are numbered `0..m` with `m = n(n-1)/2`, in lexicographic
//! order of their endpoint pairs `(u, v)`, `u < v`. A [`Config`] is an
//! occupancy vector over those ids, i.e. one simple graph on `n` labelled
//! vertices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bijection between vertex pairs of `K_n` and edge ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeIndex {
    n: usize,
    pairs: Vec<(usize, usize)>,
    /// Wedge partners of every edge, ascending.
    partners: Vec<Vec<usize>>,
}

impl EdgeIndex {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "K_n needs at least one vertex");
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let mut idx = EdgeIndex {
            n,
            pairs,
            partners: Vec::new(),
        };
        idx.partners = (0..idx.m())
            .map(|e| {
                let (u, v) = idx.pairs[e];
                let mut p: Vec<usize> = (0..n)
                    .filter(|&w| w != u && w != v)
                    .flat_map(|w| [idx.id_of(u, w), idx.id_of(v, w)])
                    .collect();
                p.sort_unstable();
                p
            })
            .collect();
        idx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pair_of(&self, edge: usize) -> (usize, usize) {
        self.pairs[edge]
    }

    /// Edge id of the unordered pair `{u, v}`; argument order does not matter.
    pub fn id_of(&self, u: usize, v: usize) -> usize {
        assert!(
            u != v && u < self.n && v < self.n,
            "({u}, {v}) is not an edge of K_{}",
            self.n
        );
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        u * (2 * self.n - u - 1) / 2 + (v - u - 1)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Edges sharing exactly one endpoint with `edge`.
    pub fn partners(&self, edge: usize) -> &[usize] {
        &self.partners[edge]
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let (p, q) = (self.pairs[a], self.pairs[b]);
        p.0 == q.0 || p.0 == q.1 || p.1 == q.0 || p.1 == q.1
    }

    pub fn check_edge(&self, edge: usize) -> Result<()> {
        if edge < self.m() {
            Ok(())
        } else {
            Err(Error::EdgeOutOfRange { edge, m: self.m() })
        }
    }
}

/// All unordered pairs of distinct adjacent edges (`i ~ j`), smaller id first,
/// sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WedgeList {
    pairs: Vec<(usize, usize)>,
}

impl WedgeList {
    pub fn new(idx: &EdgeIndex) -> Self {
        let pairs = (0..idx.m())
            .flat_map(|i| {
                idx.partners(i)
                    .iter()
                    .copied()
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
            })
            .collect();
        WedgeList { pairs }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Position of the wedge `{i, j}` in the list.
    pub fn position(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.pairs.binary_search(&key).ok()
    }
}

/// Occupancy bit-vector over the edges of `K_n`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Config {
    len: usize,
    words: Vec<u64>,
}

impl Config {
    pub fn empty(len: usize) -> Self {
        Config {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut c = Self::empty(len);
        for i in 0..len {
            c.set(i, true);
        }
        c
    }

    /// Low `len` bits of `mask`, bit `i` = edge `i`.
    pub fn from_mask(len: usize, mask: u64) -> Self {
        assert!(
            len <= 64 && (len == 64 || mask >> len == 0),
            "mask does not fit {len} bits"
        );
        let mut c = Self::empty(len);
        if len > 0 {
            c.words[0] = mask;
        }
        c
    }

    pub fn from_edges(len: usize, edges: &[usize]) -> Self {
        let mut c = Self::empty(len);
        for &e in edges {
            c.set(e, true);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, on: bool) {
        assert!(i < self.len, "edge {i} out of range for {} edges", self.len);
        let bit = 1u64 << (i % 64);
        if on {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    /// Pointwise maximum `x ∨ y`.
    pub fn join(&self, other: &Config) -> Config {
        self.zip_words(other, |a, b| a | b)
    }

    /// Pointwise minimum `x ∧ y`.
    pub fn meet(&self, other: &Config) -> Config {
        self.zip_words(other, |a, b| a & b)
    }

    /// Coordinatewise order `x ≤ y`.
    pub fn le(&self, other: &Config) -> bool {
        assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    fn zip_words(&self, other: &Config, f: impl Fn(u64, u64) -> u64) -> Config {
        assert_eq!(self.len, other.len, "configs over different edge sets");
        Config {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub(crate) fn check_len(&self, m: usize) -> Result<()> {
        if self.len == m {
            Ok(())
        } else {
            Err(Error::ConfigLength {
                expected: m,
                got: self.len,
            })
        }
    }
}

impl fmt::Debug for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Config(")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, ")")
    }
}

/// Number of present edges.
pub fn edge_count(c: &Config) -> usize {
    c.count()
}

/// Number of present wedges, `Σ_{{i,j} ∈ W} x_i x_j`.
pub fn wedge_value(c: &Config, wedges: &WedgeList) -> usize {
    wedges
        .pairs()
        .iter()
        .filter(|&&(i, j)| c.get(i) && c.get(j))
        .count()
}

/// Vertex degrees of the graph encoded by `c`.
pub fn degrees(idx: &EdgeIndex, c: &Config) -> Vec<usize> {
    let mut deg = vec![0; idx.n()];
    for e in c.ones() {
        let (u, v) = idx.pair_of(e);
        deg[u] += 1;
        deg[v] += 1;
    }
    deg
}

/// Number of triangles of the graph encoded by `c`.
pub fn triangle_count(idx: &EdgeIndex, c: &Config) -> usize {
    let n = idx.n();
    let mut t = 0;
    for a in 0..n {
        for b in a + 1..n {
            if !c.get(idx.id_of(a, b)) {
                continue;
            }
            for w in b + 1..n {
                if c.get(idx.id_of(a, w)) && c.get(idx.id_of(b, w)) {
                    t += 1;
                }
            }
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    Edge,
    Wedge,
    Triangle,
}

/// A small simple graph `H` whose homomorphism density enters an ERGM
/// Hamiltonian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphPattern {
    name: String,
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl SubgraphPattern {
    pub fn edge() -> Self {
        Self::from_parts("edge", 2, vec![(0, 1)])
    }

    pub fn wedge() -> Self {
        Self::from_parts("wedge", 3, vec![(0, 1), (0, 2)])
    }

    pub fn triangle() -> Self {
        Self::from_parts("triangle", 3, vec![(0, 1), (0, 2), (1, 2)])
    }

    pub fn of_kind(kind: PatternKind) -> Self {
        match kind {
            PatternKind::Edge => Self::edge(),
            PatternKind::Wedge => Self::wedge(),
            PatternKind::Triangle => Self::triangle(),
        }
    }

    /// Arbitrary simple graph on `vertices` vertices. Validated, but only
    /// edge/wedge/triangle shapes can be counted.
    pub fn custom(name: &str, vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let bad = |reason: String| Error::InvalidPattern {
            name: name.to_string(),
            reason,
        };
        let mut seen = Vec::with_capacity(edges.len());
        for &(a, b) in &edges {
            if a >= vertices || b >= vertices {
                return Err(bad(format!(
                    "edge ({a}, {b}) uses a vertex outside 0..{vertices}"
                )));
            }
            if a == b {
                return Err(bad(format!("self-loop at vertex {a}")));
            }
            let key = (a.min(b), a.max(b));
            if seen.contains(&key) {
                return Err(bad(format!("edge ({a}, {b}) listed twice")));
            }
            seen.push(key);
        }
        Ok(Self::from_parts(name, vertices, seen))
    }

    fn from_parts(name: &str, vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        SubgraphPattern {
            name: name.to_string(),
            vertices,
            edges,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Shape of the pattern up to isomorphism, if supported.
    pub fn kind(&self) -> Result<PatternKind> {
        // Isolated vertices would rescale the density by n, so only exact
        // shapes qualify.
        match (self.vertices, self.edges.len()) {
            (2, 1) => Ok(PatternKind::Edge),
            (3, 2) => Ok(PatternKind::Wedge),
            (3, 3) => Ok(PatternKind::Triangle),
            _ => Err(Error::UnsupportedPattern(self.name.clone())),
        }
    }
}

/// `|hom(H, G)|`, counting every edge-preserving vertex map including
/// non-injective ones.
pub fn hom_count(pattern: &SubgraphPattern, idx: &EdgeIndex, c: &Config) -> Result<u64> {
    c.check_len(idx.m())?;
    Ok(match pattern.kind()? {
        PatternKind::Edge => 2 * c.count() as u64,
        PatternKind::Wedge => degrees(idx, c).iter().map(|&d| (d * d) as u64).sum(),
        PatternKind::Triangle => 6 * triangle_count(idx, c) as u64,
    })
}

/// Homomorphism density `t(H, G) = |hom(H, G)| / n^{|V(H)|}`.
pub fn hom_density(pattern: &SubgraphPattern, c: &Config, idx: &EdgeIndex) -> Result<f64> {
    let hom = hom_count(pattern, idx, c)?;
    Ok(hom as f64 / (idx.n() as f64).powi(pattern.vertex_count() as i32))
}
