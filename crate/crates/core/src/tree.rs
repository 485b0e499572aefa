//! Rooted trees, stump sets and stump cut sets.
//!
//! Vertices are indexed `0..len()` in ascending label order. An edge is named
//! by its upper end, so an [`EdgeSet`] is a bit mask over non-root vertices and
//! the order on edges is the order on their upper ends.

use crate::bits::{bit_positions, bitset64, low_bits};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

bitset64!(
    /// A set of vertex indices.
    VertexSet
);
bitset64!(
    /// A set of edges, each named by the index of its upper end.
    EdgeSet
);

macro_rules! index_set_impl {
    ($name:ident) => {
        impl $name {
            #[inline]
            pub fn contains(self, v: usize) -> bool {
                v < 64 && self.0 >> v & 1 == 1
            }

            #[inline]
            pub fn with(self, v: usize) -> Self {
                Self(self.0 | 1u64 << v)
            }

            #[inline]
            pub fn without(self, v: usize) -> Self {
                Self(self.0 & !(1u64 << v))
            }

            pub fn singleton(v: usize) -> Self {
                Self(1u64 << v)
            }

            pub fn iter(self) -> impl Iterator<Item = usize> {
                bit_positions(self.0)
            }

            pub fn from_indices<I: IntoIterator<Item = usize>>(it: I) -> Self {
                it.into_iter().fold(Self::EMPTY, |s, v| s.with(v))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.debug_set().entries(self.iter()).finish()
            }
        }
    };
}

index_set_impl!(VertexSet);
index_set_impl!(EdgeSet);

impl EdgeSet {
    /// The upper ends as a vertex set.
    pub fn upper_ends(self) -> VertexSet {
        VertexSet(self.0)
    }
}

/// A finite rooted plane tree with at most 64 vertices.
#[derive(Clone, PartialEq, Eq)]
pub struct RootedTree {
    labels: Vec<u32>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    desc: Vec<VertexSet>,
    anc: Vec<VertexSet>,
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RootedTree")
            .field("root", &self.labels[self.root])
            .field("edges", &self.labeled_edges())
            .finish()
    }
}

impl RootedTree {
    /// Build from a root label and `(parent, child)` label pairs. Children are
    /// kept in the order their edges are listed.
    pub fn new(root: u32, edges: &[(u32, u32)]) -> Result<Self> {
        let mut labels: Vec<u32> = std::iter::once(root)
            .chain(edges.iter().flat_map(|&(p, c)| [p, c]))
            .collect();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() > 64 {
            return Err(Error::SizeBound { what: "vertices", got: labels.len(), limit: 64 });
        }
        if edges.len() + 1 != labels.len() {
            return Err(Error::MalformedTree(format!(
                "{} vertices need {} edges, got {}",
                labels.len(),
                labels.len() - 1,
                edges.len()
            )));
        }
        let index: HashMap<u32, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        let mut parent = vec![None; labels.len()];
        let mut children = vec![Vec::new(); labels.len()];
        for &(p, c) in edges {
            let (pi, ci) = (index[&p], index[&c]);
            if parent[ci].is_some() {
                return Err(Error::MalformedTree(format!("vertex {c} has two parents")));
            }
            parent[ci] = Some(pi);
            children[pi].push(ci);
        }
        let root_i = index[&root];
        if parent[root_i].is_some() {
            return Err(Error::MalformedTree(format!("root {root} has a parent")));
        }
        Self::assemble(labels, parent, children, root_i)
    }

    /// Build from a parent vector over vertices `0..len`; labels are the indices.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self> {
        let roots: Vec<usize> = (0..parents.len()).filter(|&v| parents[v].is_none()).collect();
        let [root] = roots[..] else {
            return Err(Error::MalformedTree(format!("expected one root, found {}", roots.len())));
        };
        let edges: Vec<(u32, u32)> = parents
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p as u32, c as u32)))
            .collect();
        if parents.len() == 1 {
            return Self::new(root as u32, &[]);
        }
        Self::new(root as u32, &edges)
    }

    fn assemble(
        labels: Vec<u32>,
        parent: Vec<Option<usize>>,
        children: Vec<Vec<usize>>,
        root: usize,
    ) -> Result<Self> {
        let m = labels.len();
        let mut anc = vec![VertexSet::EMPTY; m];
        let mut desc = vec![VertexSet::EMPTY; m];
        let mut order = Vec::with_capacity(m);
        let mut stack = vec![root];
        anc[root] = VertexSet::singleton(root);
        while let Some(v) = stack.pop() {
            order.push(v);
            for &c in children[v].iter().rev() {
                anc[c] = anc[v].with(c);
                stack.push(c);
            }
        }
        if order.len() != m {
            return Err(Error::MalformedTree("tree is not connected".into()));
        }
        for &v in order.iter().rev() {
            desc[v] = children[v].iter().fold(VertexSet::singleton(v), |s, &c| s.union(desc[c]));
        }
        Ok(Self { labels, parent, children, root, desc, anc })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn index_of(&self, label: u32) -> Option<usize> {
        self.labels.binary_search(&label).ok()
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet(low_bits(self.len() as u32))
    }

    pub fn edges(&self) -> EdgeSet {
        EdgeSet(self.vertices().without(self.root).0)
    }

    pub fn edge_count(&self) -> usize {
        self.len() - 1
    }

    /// `a ≼ b`: `a` lies on the path from the root to `b`.
    pub fn precedes_eq(&self, a: usize, b: usize) -> bool {
        self.anc[b].contains(a)
    }

    /// `v` and all its descendants in the full tree.
    pub fn descendants(&self, v: usize) -> VertexSet {
        self.desc[v]
    }

    /// Root-to-`v` path, both ends included.
    pub fn ancestors(&self, v: usize) -> VertexSet {
        self.anc[v]
    }

    pub fn labeled_edges(&self) -> Vec<(u32, u32)> {
        (0..self.len())
            .filter_map(|c| self.parent[c].map(|p| (self.labels[p], self.labels[c])))
            .collect()
    }

    /// Pre-order traversal, children left to right.
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.children[v].iter().rev());
        }
        out
    }

    pub fn check_edges(&self, h: EdgeSet) -> Result<()> {
        if h.is_subset(self.edges()) {
            Ok(())
        } else {
            Err(Error::NotEdgeSet)
        }
    }

    /// Vertices strictly below some cut edge of `h`.
    fn cut_off(&self, h: EdgeSet) -> VertexSet {
        h.iter().fold(VertexSet::EMPTY, |s, b| s.union(self.desc[b]))
    }

    /// `V_γ(H)`: vertices of the root component of `T − H`.
    pub fn stump_set(&self, h: EdgeSet) -> VertexSet {
        debug_assert!(h.is_subset(self.edges()));
        self.vertices().difference(self.cut_off(h))
    }

    /// `E_γ(H)`: the edges of the stump tree of `T − H`.
    pub fn stump_edges(&self, h: EdgeSet) -> EdgeSet {
        EdgeSet(self.stump_set(h).without(self.root).0)
    }

    /// Vertex set of `T_α(H)`: `α` and its descendants in `T − H`.
    pub fn subtree_vertices(&self, alpha: usize, h: EdgeSet) -> VertexSet {
        let below = EdgeSet(h.0 & self.desc[alpha].without(alpha).0);
        self.desc[alpha].difference(self.cut_off(below))
    }

    /// `T_α(H)` as a tree in its own right (labels preserved).
    pub fn subtree(&self, alpha: usize, h: EdgeSet) -> RootedTree {
        self.induced(self.subtree_vertices(alpha, h), alpha)
    }

    /// The subtree induced on `keep`, which must be connected and contain `root`.
    fn induced(&self, keep: VertexSet, root: usize) -> RootedTree {
        let old: Vec<usize> = keep.iter().collect();
        let new_index: HashMap<usize, usize> = old.iter().enumerate().map(|(n, &o)| (o, n)).collect();
        let labels = old.iter().map(|&o| self.labels[o]).collect();
        let parent = old
            .iter()
            .map(|&o| if o == root { None } else { self.parent[o].map(|p| new_index[&p]) })
            .collect();
        let children = old
            .iter()
            .map(|&o| self.children[o].iter().filter_map(|c| new_index.get(c).copied()).collect())
            .collect();
        Self::assemble(labels, parent, children, new_index[&root]).expect("induced subtree is a tree")
    }

    /// `M(H)`: the `≼`-minimal edges of `H`.
    pub fn minimal_edges(&self, h: EdgeSet) -> EdgeSet {
        EdgeSet::from_indices(h.iter().filter(|&b| self.anc[b].without(b).intersection(h.upper_ends()).is_empty()))
    }

    /// Vertex counterpart of [`minimal_edges`](Self::minimal_edges).
    pub fn minimal_vertices(&self, s: VertexSet) -> VertexSet {
        VertexSet::from_indices(s.iter().filter(|&b| self.anc[b].without(b).intersection(s).is_empty()))
    }

    /// `H` is a stump cut set iff `H = M(H)`, i.e. `H` is an antichain.
    pub fn is_stump_cut_set(&self, h: EdgeSet) -> bool {
        h == self.minimal_edges(h)
    }

    /// True if `r` is an order ideal of `(V, ≼)` that contains the root.
    pub fn is_stump_set(&self, r: VertexSet) -> bool {
        r.contains(self.root) && r.iter().all(|v| self.anc[v].is_subset(r))
    }

    /// `∂(R)`: edges leaving the stump set `R`.
    pub fn stump_cut_set(&self, r: VertexSet) -> Result<EdgeSet> {
        if !r.is_subset(self.vertices()) || !self.is_stump_set(r) {
            return Err(Error::NotStumpSet);
        }
        Ok(EdgeSet::from_indices(
            self.vertices()
                .difference(r)
                .iter()
                .filter(|&b| self.parent[b].is_some_and(|p| r.contains(p))),
        ))
    }

    /// All antichains of `(E, ≼)`, each once. Order: recursive over the
    /// children of each vertex; for a child either cut its edge or recurse.
    pub fn enumerate_stump_cut_sets(&self) -> Vec<EdgeSet> {
        self.antichains_below(self.root)
    }

    fn antichains_below(&self, v: usize) -> Vec<EdgeSet> {
        let mut acc = vec![EdgeSet::EMPTY];
        for &c in &self.children[v] {
            let mut options = vec![EdgeSet::singleton(c)];
            options.extend(self.antichains_below(c));
            acc = acc
                .iter()
                .flat_map(|a| options.iter().map(move |o| a.union(*o)))
                .collect();
        }
        acc
    }

    /// `ℛ(T)`: all stump sets, in the order of [`enumerate_stump_cut_sets`](Self::enumerate_stump_cut_sets).
    pub fn stump_sets(&self) -> Vec<VertexSet> {
        self.enumerate_stump_cut_sets().into_iter().map(|c| self.stump_set(c)).collect()
    }

    pub fn vertex_labels(&self, s: VertexSet) -> Vec<u32> {
        s.iter().map(|v| self.labels[v]).collect()
    }

    pub fn edge_labels(&self, h: EdgeSet) -> Vec<u32> {
        self.vertex_labels(h.upper_ends())
    }

    pub fn edge_set_from_labels(&self, labels: &[u32]) -> Result<EdgeSet> {
        let mut h = EdgeSet::EMPTY;
        for &l in labels {
            match self.index_of(l) {
                Some(v) if v != self.root => h = h.with(v),
                _ => return Err(Error::Parse(format!("{l} does not name an edge"))),
            }
        }
        Ok(h)
    }

    /// Parse an edge list such as `"e1,e2"` or `"1,2"`; the empty string is `∅`.
    pub fn parse_edge_set(&self, text: &str) -> Result<EdgeSet> {
        let mut labels = Vec::new();
        for tok in text.split([',', ';']).map(str::trim).filter(|t| !t.is_empty()) {
            let digits = tok.strip_prefix('e').unwrap_or(tok);
            labels.push(digits.parse().map_err(|_| Error::Parse(format!("bad edge name {tok:?}")))?);
        }
        self.edge_set_from_labels(&labels)
    }

    /// `"e1,e2"`, or `"∅"`.
    pub fn edge_set_name(&self, h: EdgeSet) -> String {
        if h.is_empty() {
            "∅".into()
        } else {
            self.edge_labels(h).iter().map(|l| format!("e{l}")).collect::<Vec<_>>().join(",")
        }
    }
}

/// All plane (ordered) rooted trees on `m >= 1` vertices, `C_{m-1}` of them.
/// Vertices are labelled `0..m` in pre-order.
pub fn enumerate_plane_trees(m: usize) -> Vec<RootedTree> {
    assert!((1..=64).contains(&m));
    plane_parent_vectors(m)
        .iter()
        .map(|p| RootedTree::from_parents(p).expect("valid parent vector"))
        .collect()
}

fn plane_parent_vectors(m: usize) -> Vec<Vec<Option<usize>>> {
    // Pre-order construction: vertex k attaches to some vertex on the
    // rightmost path of the tree built from vertices 0..k.
    fn grow(m: usize, parents: &mut Vec<Option<usize>>, path: &mut Vec<usize>, out: &mut Vec<Vec<Option<usize>>>) {
        let k = parents.len();
        if k == m {
            out.push(parents.clone());
            return;
        }
        for depth in 0..path.len() {
            let p = path[depth];
            let saved: Vec<usize> = path.drain(depth + 1..).collect();
            parents.push(Some(p));
            path.push(k);
            grow(m, parents, path, out);
            path.pop();
            parents.pop();
            path.extend(saved);
        }
    }
    let mut out = Vec::new();
    let mut parents = vec![None];
    let mut path = vec![0];
    grow(m, &mut parents, &mut path, &mut out);
    out
}

/// On-disk tree format: `{"links": [1, n], "root": γ, "edges": [[parent, child], ...]}`.
/// `links` is present for fragmentation trees; `root` is `null` for the empty
/// planted tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<[u32; 2]>,
    pub root: Option<u32>,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
}

impl TreeJson {
    pub fn from_tree(tree: &RootedTree) -> Self {
        Self {
            links: None,
            root: Some(tree.label(tree.root())),
            edges: tree.labeled_edges().into_iter().map(|(p, c)| [p, c]).collect(),
        }
    }

    pub fn to_tree(&self) -> Result<RootedTree> {
        let root = self.root.ok_or_else(|| Error::MalformedTree("missing root".into()))?;
        let edges: Vec<(u32, u32)> = self.edges.iter().map(|&[p, c]| (p, c)).collect();
        RootedTree::new(root, &edges)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Tree of the stump-set example: root α1 with children α2, α3; α2 has
    /// children α4, α5, α6; α3 has α7; α4 has α8. Labels are the subscripts.
    pub fn alpha_tree() -> RootedTree {
        RootedTree::new(1, &[(1, 2), (1, 3), (2, 4), (2, 5), (2, 6), (3, 7), (4, 8)]).unwrap()
    }

    /// Root 0 with children 3 and 4; vertex 3 has children 1 and 2. Edge
    /// `e_k` is the edge with upper end `k`, so `e3 ≺ e1, e2`.
    pub fn four_edge_tree() -> RootedTree {
        RootedTree::new(0, &[(0, 3), (0, 4), (3, 1), (3, 2)]).unwrap()
    }

    pub fn edges(t: &RootedTree, labels: &[u32]) -> EdgeSet {
        t.edge_set_from_labels(labels).unwrap()
    }

    pub fn verts(t: &RootedTree, labels: &[u32]) -> VertexSet {
        VertexSet::from_indices(labels.iter().map(|&l| t.index_of(l).unwrap()))
    }
}
