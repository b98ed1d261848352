//! Finite Cayley graphs and their path metric.
//!
//! Every built-in family is the Cayley graph of an explicit finite group with
//! a symmetric generating set `S`: vertex `x` is joined to `x·s` for each
//! `s ∈ S` (right multiplication), so left translation `x ↦ g·x` acts by
//! graph automorphisms. Vertex ids are the canonical element codes of the
//! group (mixed-radix digits for abelian families), which keeps ids stable
//! across runs and lines them up with the usual coordinates.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count any constructor will accept.
pub const MAX_VERTICES: usize = 1 << 26;

/// Associativity of an explicit multiplication table is verified exhaustively
/// up to this order.
const ASSOCIATIVITY_CHECK_LIMIT: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `Z_n` with generators `±1`.
    Cycle { n: usize },
    /// `Z_n^dim` with generators `±e_i`.
    Torus { n: usize, dim: usize },
    /// `Z_2^k` with generators `e_i`.
    Hypercube { k: usize },
    /// `Z_n` with every non-zero element as a generator.
    Complete { n: usize },
    /// Dihedral group of order `2n`, generators `r, r^-1, s`.
    Dihedral { n: usize },
    /// `Z_2 ≀ Z_n`: lamp configuration plus lamplighter position, generators
    /// move `±1` and flip the lamp under the lamplighter.
    Lamplighter { n: usize },
    /// Explicit multiplication table `table[a][b] = a·b` and generator list.
    Cayley {
        table: Vec<Vec<usize>>,
        generators: Vec<usize>,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Cycle { .. } => "cycle",
            Family::Torus { .. } => "torus",
            Family::Hypercube { .. } => "hypercube",
            Family::Complete { .. } => "complete",
            Family::Dihedral { .. } => "dihedral",
            Family::Lamplighter { .. } => "lamplighter",
            Family::Cayley { .. } => "cayley",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub family: Family,
    /// Self-loop half-edges added at every vertex.
    #[serde(default)]
    pub self_loops: usize,
}

impl GraphSpec {
    pub fn new(family: Family) -> Self {
        GraphSpec { family, self_loops: 0 }
    }

    pub fn with_loops(mut self, self_loops: usize) -> Self {
        self.self_loops = self_loops;
        self
    }

    pub fn cycle(n: usize) -> Self {
        Self::new(Family::Cycle { n })
    }

    pub fn torus(n: usize, dim: usize) -> Self {
        Self::new(Family::Torus { n, dim })
    }

    pub fn hypercube(k: usize) -> Self {
        Self::new(Family::Hypercube { k })
    }

    pub fn complete(n: usize) -> Self {
        Self::new(Family::Complete { n })
    }

    pub fn dihedral(n: usize) -> Self {
        Self::new(Family::Dihedral { n })
    }

    pub fn lamplighter(n: usize) -> Self {
        Self::new(Family::Lamplighter { n })
    }
}

/// A finite group acting on the vertex set by left translation. Elements are
/// encoded as integers `0..order`.
#[derive(Debug, Clone, PartialEq)]
pub enum Group {
    /// `Z_radix^dim`; digit `i` of the code (least significant first) is
    /// coordinate `i`.
    Abelian { radix: usize, dim: usize },
    /// `r^a s^b` is encoded as `b·n + a`.
    Dihedral { n: usize },
    /// `(lamps, pos)` is encoded as `lamps·n + pos`.
    Lamplighter { n: usize },
    Table {
        table: Vec<Vec<usize>>,
        inverse: Vec<usize>,
        identity: usize,
    },
}

impl Group {
    pub fn order(&self) -> usize {
        match self {
            Group::Abelian { radix, dim } => radix.pow(*dim as u32),
            Group::Dihedral { n } => 2 * n,
            Group::Lamplighter { n } => (1usize << n) * n,
            Group::Table { table, .. } => table.len(),
        }
    }

    pub fn identity(&self) -> usize {
        match self {
            Group::Table { identity, .. } => *identity,
            _ => 0,
        }
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match self {
            Group::Abelian { radix, dim } => {
                if *dim == 1 {
                    return (a + b) % radix;
                }
                if *radix == 2 {
                    return a ^ b;
                }
                let (mut a, mut b) = (a, b);
                let mut out = 0;
                let mut place = 1;
                for _ in 0..*dim {
                    out += ((a % radix + b % radix) % radix) * place;
                    a /= radix;
                    b /= radix;
                    place *= radix;
                }
                out
            }
            Group::Dihedral { n } => {
                let (ra, sa) = (a % n, a / n);
                let (rb, sb) = (b % n, b / n);
                // s r^c = r^-c s
                let rot = if sa == 0 { (ra + rb) % n } else { (ra + n - rb) % n };
                ((sa + sb) % 2) * n + rot
            }
            Group::Lamplighter { n } => {
                let (fa, pa) = (a / n, a % n);
                let (fb, pb) = (b / n, b % n);
                let lamps = fa ^ rotate_lamps(fb, pa, *n);
                lamps * n + (pa + pb) % n
            }
            Group::Table { table, .. } => table[a][b],
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match self {
            Group::Abelian { radix, dim } => {
                if *radix == 2 {
                    return a;
                }
                let mut a = a;
                let mut out = 0;
                let mut place = 1;
                for _ in 0..*dim {
                    out += ((radix - a % radix) % radix) * place;
                    a /= radix;
                    place *= radix;
                }
                out
            }
            Group::Dihedral { n } => {
                let (r, s) = (a % n, a / n);
                if s == 0 {
                    (n - r) % n
                } else {
                    a
                }
            }
            Group::Lamplighter { n } => {
                let (f, p) = (a / n, a % n);
                let back = (n - p) % n;
                rotate_lamps(f, back, *n) * n + back
            }
            Group::Table { inverse, .. } => inverse[a],
        }
    }
}

/// Shift lamp configuration `f` by `by` positions around the ring of `n`
/// lamps: lamp `i` of the result is lamp `i - by` of `f`.
fn rotate_lamps(f: usize, by: usize, n: usize) -> usize {
    let by = by % n;
    if by == 0 {
        return f;
    }
    let mask = (1usize << n) - 1;
    ((f << by) | (f >> (n - by))) & mask
}

/// Immutable `d`-regular connected graph with explicit loop slots.
#[derive(Debug, Clone)]
pub struct Graph {
    spec: GraphSpec,
    n: usize,
    degree: usize,
    /// `targets[x*degree..(x+1)*degree]` lists the edge slots of `x`.
    targets: Vec<u32>,
    group: Option<Group>,
}

impl Graph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn spec(&self) -> &GraphSpec {
        &self.spec
    }

    pub fn family(&self) -> &Family {
        &self.spec.family
    }

    pub fn group(&self) -> Option<&Group> {
        self.group.as_ref()
    }

    /// Edge slots of `x`, loops included with multiplicity.
    pub fn neighbors(&self, x: usize) -> &[u32] {
        &self.targets[x * self.degree..(x + 1) * self.degree]
    }

    /// Drops the group structure, leaving a plain regular graph.
    pub fn forget_group(mut self) -> Self {
        self.group = None;
        self
    }

    /// Coordinates of `x` for torus, cycle and hypercube graphs.
    pub fn coords(&self, x: usize) -> Option<Vec<usize>> {
        match self.group {
            Some(Group::Abelian { radix, dim }) if !matches!(self.spec.family, Family::Complete { .. }) => {
                let mut x = x;
                Some(
                    (0..dim)
                        .map(|_| {
                            let c = x % radix;
                            x /= radix;
                            c
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Inverse of [`Graph::coords`].
    pub fn vertex_at(&self, coords: &[usize]) -> Option<usize> {
        match self.group {
            Some(Group::Abelian { radix, dim }) if coords.len() == dim && coords.iter().all(|&c| c < radix) => {
                Some(coords.iter().rev().fold(0, |acc, &c| acc * radix + c))
            }
            _ => None,
        }
    }

    /// Eccentricity of vertex 0; equals the diameter by transitivity.
    pub fn diameter(&self) -> u32 {
        bfs_distances(self, 0).map(|d| d.max()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceField {
    pub source: usize,
    pub dist: Vec<u32>,
}

impl DistanceField {
    pub fn max(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

fn check_size(n: usize) -> Result<()> {
    if n > MAX_VERTICES {
        return Err(invalid(format!("{n} vertices exceeds limit {MAX_VERTICES}")));
    }
    Ok(())
}

fn group_and_generators(family: &Family) -> Result<(Group, Vec<usize>)> {
    match family {
        Family::Cycle { n } => {
            if *n < 2 {
                return Err(invalid("cycle needs n >= 2"));
            }
            Ok((Group::Abelian { radix: *n, dim: 1 }, vec![1, n - 1]))
        }
        Family::Torus { n, dim } => {
            if *n < 2 || *dim < 1 {
                return Err(invalid("torus needs n >= 2 and dim >= 1"));
            }
            let order = n.checked_pow(*dim as u32).ok_or_else(|| invalid("torus too large"))?;
            check_size(order)?;
            let mut gens = Vec::with_capacity(2 * dim);
            let mut place = 1;
            for _ in 0..*dim {
                gens.push(place);
                gens.push((n - 1) * place);
                place *= n;
            }
            Ok((Group::Abelian { radix: *n, dim: *dim }, gens))
        }
        Family::Hypercube { k } => {
            if *k < 2 || *k > 26 {
                return Err(invalid("hypercube needs 2 <= k <= 26"));
            }
            Ok((Group::Abelian { radix: 2, dim: *k }, (0..*k).map(|i| 1 << i).collect()))
        }
        Family::Complete { n } => {
            if *n < 2 {
                return Err(invalid("complete graph needs n >= 2"));
            }
            check_size(*n)?;
            Ok((Group::Abelian { radix: *n, dim: 1 }, (1..*n).collect()))
        }
        Family::Dihedral { n } => {
            if *n < 2 {
                return Err(invalid("dihedral group needs n >= 2"));
            }
            check_size(2 * n)?;
            Ok((Group::Dihedral { n: *n }, vec![1, n - 1, *n]))
        }
        Family::Lamplighter { n } => {
            if *n < 2 || *n > 20 {
                return Err(invalid("lamplighter needs 2 <= n <= 20"));
            }
            Ok((Group::Lamplighter { n: *n }, vec![1, n - 1, *n]))
        }
        Family::Cayley { table, generators } => {
            let group = table_group(table)?;
            Ok((group, generators.clone()))
        }
    }
}

fn table_group(table: &[Vec<usize>]) -> Result<Group> {
    let m = table.len();
    if m < 2 {
        return Err(invalid("multiplication table needs at least 2 elements"));
    }
    check_size(m)?;
    let mut seen = vec![false; m];
    for row in table {
        if row.len() != m {
            return Err(invalid("multiplication table is not square"));
        }
        seen.iter_mut().for_each(|s| *s = false);
        for &v in row {
            if v >= m || std::mem::replace(&mut seen[v], true) {
                return Err(invalid("multiplication table rows must be permutations of 0..m"));
            }
        }
    }
    for c in 0..m {
        seen.iter_mut().for_each(|s| *s = false);
        for row in table {
            if std::mem::replace(&mut seen[row[c]], true) {
                return Err(invalid("multiplication table columns must be permutations of 0..m"));
            }
        }
    }
    let identity = (0..m)
        .find(|&e| (0..m).all(|x| table[e][x] == x && table[x][e] == x))
        .ok_or_else(|| invalid("multiplication table has no identity"))?;
    if m <= ASSOCIATIVITY_CHECK_LIMIT {
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(invalid(format!("multiplication is not associative at ({a}, {b}, {c})")));
                    }
                }
            }
        }
    }
    let inverse = (0..m)
        .map(|a| {
            (0..m)
                .find(|&b| table[a][b] == identity)
                .expect("latin square has inverses")
        })
        .collect();
    Ok(Group::Table {
        table: table.to_vec(),
        inverse,
        identity,
    })
}

/// Builds the Cayley graph described by `spec`.
pub fn build_graph(spec: &GraphSpec) -> Result<Graph> {
    let (group, generators) = group_and_generators(&spec.family)?;
    let n = group.order();
    check_size(n)?;
    if generators.is_empty() && spec.self_loops == 0 {
        return Err(invalid("empty generator set"));
    }
    if let Some(&g) = generators.iter().find(|&&g| g >= n) {
        return Err(invalid(format!("generator {g} outside group of order {n}")));
    }
    if let Some(&g) = generators.iter().find(|&&g| g == group.identity()) {
        return Err(invalid(format!(
            "generator {g} is the identity; use self_loops instead"
        )));
    }
    for &g in &generators {
        let gi = group.inv(g);
        let count = |v: usize| generators.iter().filter(|&&h| h == v).count();
        if count(g) != count(gi) {
            return Err(Error::NotSymmetric(g));
        }
    }

    let degree = generators.len() + spec.self_loops;
    let mut targets = Vec::with_capacity(n * degree);
    for x in 0..n {
        for &s in &generators {
            targets.push(group.mul(x, s) as u32);
        }
        targets.extend(std::iter::repeat_n(x as u32, spec.self_loops));
    }
    let graph = Graph {
        spec: spec.clone(),
        n,
        degree,
        targets,
        group: Some(group),
    };

    let dist = bfs_distances(&graph, graph.group.as_ref().map_or(0, Group::identity))?;
    if let Some(unreached) = dist.dist.iter().position(|&d| d == u32::MAX) {
        return Err(Error::NotGenerating { unreached });
    }
    Ok(graph)
}

/// Single-source shortest-path distances, loop slots ignored. Unreachable
/// vertices (impossible for graphs from [`build_graph`]) keep `u32::MAX`.
pub fn bfs_distances(graph: &Graph, source: usize) -> Result<DistanceField> {
    if source >= graph.n {
        return Err(Error::VertexOutOfRange {
            vertex: source,
            n: graph.n,
        });
    }
    let mut dist = vec![u32::MAX; graph.n];
    let mut queue = VecDeque::with_capacity(graph.n);
    dist[source] = 0;
    queue.push_back(source);
    while let Some(x) = queue.pop_front() {
        let next = dist[x] + 1;
        for &y in graph.neighbors(x) {
            let y = y as usize;
            if dist[y] == u32::MAX {
                dist[y] = next;
                queue.push_back(y);
            }
        }
    }
    Ok(DistanceField { source, dist })
}

/// Left translation `g·x`.
pub fn translation_action(graph: &Graph, g: usize, x: usize) -> Result<usize> {
    let group = graph.group.as_ref().ok_or(Error::UnsupportedAction)?;
    for v in [g, x] {
        if v >= graph.n {
            return Err(Error::VertexOutOfRange { vertex: v, n: graph.n });
        }
    }
    Ok(group.mul(g, x))
}
