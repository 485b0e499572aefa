//! Fragmentation trees: planted plane binary trees on a set of removed links
//! whose lines carry the fragments created when the links are removed in tree
//! order.

use crate::error::{Error, Result};
use crate::links::{Fragment, LinkSet, Subset};
use crate::tree::{EdgeSet, RootedTree, TreeJson, VertexSet};

/// What hangs from one side of a vertex (or from the phantom root).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Line {
    /// An edge to a child vertex.
    Vertex(usize),
    /// A branch carrying the external fragment with this index in `ℒ_G`.
    External(usize),
}

/// Exponential-work guard for tree enumeration and the alternating sums over
/// edge subsets. A set `G` costs `C_|G| · 2^(|G|-1)` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_terms: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_terms: 10_000_000 }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Self { max_terms: u64::MAX }
    }

    pub fn terms_for(size: usize) -> u128 {
        if size == 0 {
            1
        } else {
            catalan(size).saturating_mul(1u128 << (size - 1).min(126))
        }
    }

    pub fn check(self, size: usize) -> Result<()> {
        let needed = Self::terms_for(size);
        if needed > self.max_terms as u128 {
            Err(Error::BudgetExceeded { needed, budget: self.max_terms })
        } else {
            Ok(())
        }
    }
}

/// Catalan number `C_k = binom(2k, k) / (k + 1)`, saturating at `u128::MAX`.
pub fn catalan(k: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        // C_{i+1} = C_i · 2(2i+1) / (i+2)
        c = match c.checked_mul(2 * (2 * i + 1)) {
            Some(x) => x / (i + 2),
            None => return u128::MAX,
        };
    }
    c
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FragTree {
    chain: LinkSet,
    tree: Option<RootedTree>,
    left: Vec<Line>,
    right: Vec<Line>,
    internal: Vec<Fragment>,
    externals: Vec<Fragment>,
}

impl FragTree {
    /// The empty planted tree: no vertices, a single line carrying `L`.
    pub fn empty(chain: LinkSet) -> Self {
        Self {
            chain,
            tree: None,
            left: Vec::new(),
            right: Vec::new(),
            internal: Vec::new(),
            externals: vec![chain.whole()],
        }
    }

    /// Attach fragments to a tree whose labels are links of `chain`. Each
    /// vertex may have at most one child below it and one above it, and every
    /// child must lie in the corresponding side fragment of its parent.
    pub fn from_tree(chain: LinkSet, tree: RootedTree) -> Result<Self> {
        let m = tree.len();
        for &l in tree.labels() {
            if !chain.contains(l) {
                return Err(Error::LinkOutOfRange { link: l, n: chain.n() });
            }
        }
        let mut internal = vec![chain.whole(); m];
        let mut left = vec![Line::External(usize::MAX); m];
        let mut right = vec![Line::External(usize::MAX); m];
        for v in tree.preorder() {
            let a = tree.label(v);
            let frag = internal[v];
            let (mut l, mut r) = (None, None);
            for &c in tree.children(v) {
                let slot = if tree.label(c) < a { &mut l } else { &mut r };
                if slot.replace(c).is_some() {
                    return Err(Error::MalformedTree(format!("vertex {a} has two children on one side")));
                }
            }
            if let Some(c) = l {
                if !frag.left_of(a).contains(tree.label(c)) {
                    return Err(Error::MalformedTree(format!("{} is not in the left fragment of {a}", tree.label(c))));
                }
                internal[c] = frag.left_of(a);
                left[v] = Line::Vertex(c);
            }
            if let Some(c) = r {
                if !frag.right_of(a).contains(tree.label(c)) {
                    return Err(Error::MalformedTree(format!("{} is not in the right fragment of {a}", tree.label(c))));
                }
                internal[c] = frag.right_of(a);
                right[v] = Line::Vertex(c);
            }
        }
        // Vertex indices follow link order, so index order is the in-order walk.
        let mut externals = Vec::with_capacity(m + 1);
        for v in 0..m {
            let a = tree.label(v);
            if let Line::External(_) = left[v] {
                left[v] = Line::External(externals.len());
                externals.push(internal[v].left_of(a));
            }
            if let Line::External(_) = right[v] {
                right[v] = Line::External(externals.len());
                externals.push(internal[v].right_of(a));
            }
        }
        // In-order, externals interleave with vertices; re-sort by position.
        let mut order: Vec<usize> = (0..externals.len()).collect();
        order.sort_by_key(|&k| externals[k].start());
        let mut rank = vec![0; externals.len()];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        for line in left.iter_mut().chain(right.iter_mut()) {
            if let Line::External(k) = line {
                *k = rank[*k];
            }
        }
        let externals: Vec<Fragment> = order.iter().map(|&k| externals[k]).collect();
        let out = Self { chain, tree: Some(tree), left, right, internal, externals };
        debug_assert_eq!(out.externals, chain.whole().split(out.vertex_links()));
        Ok(out)
    }

    pub fn from_json(js: &TreeJson) -> Result<Self> {
        let [lo, hi] = js.links.ok_or_else(|| Error::MalformedTree("fragmentation tree needs \"links\"".into()))?;
        if lo != 1 {
            return Err(Error::MalformedTree(format!("links must start at 1, got {lo}")));
        }
        let chain = LinkSet::new(hi)?;
        match js.root {
            None if js.edges.is_empty() => Ok(Self::empty(chain)),
            None => Err(Error::MalformedTree("edges without a root".into())),
            Some(_) => Self::from_tree(chain, js.to_tree()?),
        }
    }

    pub fn to_json(&self) -> TreeJson {
        let mut js = match &self.tree {
            Some(t) => TreeJson::from_tree(t),
            None => TreeJson { links: None, root: None, edges: Vec::new() },
        };
        js.links = Some([1, self.chain.n()]);
        js
    }

    pub fn chain(&self) -> LinkSet {
        self.chain
    }

    pub fn tree(&self) -> Option<&RootedTree> {
        self.tree.as_ref()
    }

    /// Number of vertices `|G|`.
    pub fn len(&self) -> usize {
        self.internal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.internal.is_empty()
    }

    pub fn root(&self) -> Option<usize> {
        self.tree.as_ref().map(RootedTree::root)
    }

    pub fn link(&self, v: usize) -> u32 {
        self.tree.as_ref().expect("vertex of empty tree").label(v)
    }

    /// The vertex set `G` as links.
    pub fn vertex_links(&self) -> Subset {
        self.links_of(VertexSet(crate::bits::low_bits(self.len() as u32)))
    }

    pub fn links_of(&self, s: VertexSet) -> Subset {
        match &self.tree {
            Some(t) => Subset::from_links(s.iter().map(|v| t.label(v))),
            None => Subset::EMPTY,
        }
    }

    pub fn edges(&self) -> EdgeSet {
        self.tree.as_ref().map_or(EdgeSet::EMPTY, RootedTree::edges)
    }

    /// `I_α`, the fragment from which the link of vertex `v` is removed.
    pub fn internal(&self, v: usize) -> Fragment {
        self.internal[v]
    }

    /// `I′_α`.
    pub fn left_fragment(&self, v: usize) -> Fragment {
        self.internal[v].left_of(self.link(v))
    }

    /// `I″_α`.
    pub fn right_fragment(&self, v: usize) -> Fragment {
        self.internal[v].right_of(self.link(v))
    }

    pub fn left(&self, v: usize) -> Line {
        self.left[v]
    }

    pub fn right(&self, v: usize) -> Line {
        self.right[v]
    }

    /// The line from the phantom node.
    pub fn root_line(&self) -> Line {
        match self.root() {
            Some(r) => Line::Vertex(r),
            None => Line::External(0),
        }
    }

    /// `ℒ_G`, the external fragments left to right.
    pub fn externals(&self) -> &[Fragment] {
        &self.externals
    }

    pub fn line_fragment(&self, line: Line) -> Fragment {
        match line {
            Line::Vertex(v) => self.internal[v],
            Line::External(k) => self.externals[k],
        }
    }

    /// `G_α(H)` as a vertex set.
    pub fn subtree_vertices(&self, v: usize, h: EdgeSet) -> VertexSet {
        self.tree.as_ref().expect("vertex of empty tree").subtree_vertices(v, h)
    }

    /// `G_γ(H)` as links; empty for the empty tree.
    pub fn stump_links(&self, h: EdgeSet) -> Subset {
        match &self.tree {
            Some(t) => self.links_of(t.stump_set(h)),
            None => Subset::EMPTY,
        }
    }

    /// `ℒ^{I_α}_{G_α(H)}`: the fragments of `I_α` left after removing the
    /// vertex set of `T_α(H)`.
    pub fn fragment_family(&self, v: usize, h: EdgeSet) -> Vec<Fragment> {
        self.internal[v].split(self.links_of(self.subtree_vertices(v, h)))
    }

    /// `𝕊`: internal fragments by vertex, then external fragments.
    pub fn all_fragments(&self) -> Vec<Fragment> {
        self.internal.iter().chain(self.externals.iter()).copied().collect()
    }
}

/// `τ(G, L)`: all `C_|G|` fragmentation trees on `G`, roots ascending, then
/// left subtrees, then right subtrees.
pub fn enumerate_fragmentation_trees(g: Subset, chain: LinkSet, budget: Budget) -> Result<Vec<FragTree>> {
    chain.check(g)?;
    let links = g.to_vec();
    if Budget::terms_for(links.len()) > budget.max_terms as u128 || catalan(links.len()) > budget.max_terms as u128 {
        return Err(Error::BudgetExceeded { needed: Budget::terms_for(links.len()), budget: budget.max_terms });
    }
    if links.is_empty() {
        return Ok(vec![FragTree::empty(chain)]);
    }
    shapes(&links)
        .into_iter()
        .map(|(root, edges)| FragTree::from_tree(chain, RootedTree::new(root, &edges)?))
        .collect()
}

type Shape = (u32, Vec<(u32, u32)>);

fn shapes(links: &[u32]) -> Vec<Shape> {
    let mut out = Vec::new();
    for (i, &root) in links.iter().enumerate() {
        let lefts = sub_shapes(&links[..i]);
        let rights = sub_shapes(&links[i + 1..]);
        for l in &lefts {
            for r in &rights {
                let mut edges = Vec::with_capacity(links.len() - 1);
                for (child, sub) in [l, r].into_iter().flatten() {
                    edges.push((root, *child));
                    edges.extend_from_slice(sub);
                }
                out.push((root, edges));
            }
        }
    }
    out
}

fn sub_shapes(links: &[u32]) -> Vec<Option<Shape>> {
    if links.is_empty() {
        vec![None]
    } else {
        shapes(links).into_iter().map(Some).collect()
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    /// Root 3 with left child 1 and right child 4 on `L = {1..6}`.
    pub fn tree_134() -> FragTree {
        FragTree::from_tree(LinkSet::new(6).unwrap(), RootedTree::new(3, &[(3, 1), (3, 4)]).unwrap()).unwrap()
    }

    /// Root 3 with right child 4 on `L = {1..5}`.
    pub fn tree_34() -> FragTree {
        FragTree::from_tree(LinkSet::new(5).unwrap(), RootedTree::new(3, &[(3, 4)]).unwrap()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn spans(frags: &[Fragment]) -> Vec<Vec<u32>> {
        frags.iter().map(|f| f.links().collect()).collect()
    }

    #[test]
    fn catalan_numbers() {
        let c: Vec<u128> = (0..=10).map(catalan).collect();
        assert_eq!(c, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862, 16796]);
    }

    #[test]
    fn three_vertices_give_five_trees() {
        let l = LinkSet::new(6).unwrap();
        let trees = enumerate_fragmentation_trees(Subset::from_links([1, 3, 4]), l, Budget::default()).unwrap();
        assert_eq!(trees.len(), 5);
        assert!(trees.contains(&tree_134()));
        let roots: Vec<u32> = trees.iter().map(|t| t.link(t.root().unwrap())).collect();
        assert_eq!(roots, vec![1, 1, 3, 4, 4]);
    }

    #[test]
    fn empty_vertex_set_gives_planted_tree() {
        let l = LinkSet::new(4).unwrap();
        let trees = enumerate_fragmentation_trees(Subset::EMPTY, l, Budget::default()).unwrap();
        assert_eq!(trees.len(), 1);
        assert!(trees[0].is_empty());
        assert_eq!(trees[0].externals(), &[l.whole()]);
    }

    #[test]
    fn fragments_of_tree_134() {
        let t = tree_134();
        let v = |a: u32| t.tree().unwrap().index_of(a).unwrap();
        assert_eq!(t.internal(v(3)).links().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(t.internal(v(1)).links().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(t.internal(v(4)).links().collect::<Vec<_>>(), vec![4, 5, 6]);
        assert_eq!(spans(t.externals()), vec![vec![], vec![2], vec![], vec![5, 6]]);
        // 𝕊 = {I3, I1, I4, ∅, I″1, I″4} up to the second empty slot
        assert_eq!(t.all_fragments().len(), 7);
    }

    #[test]
    fn fragment_family_examples() {
        let t = tree_34();
        let v4 = t.tree().unwrap().index_of(4).unwrap();
        let fam = t.fragment_family(v4, EdgeSet::EMPTY);
        assert_eq!(spans(&fam), vec![vec![], vec![5]]);
        assert_eq!(fam, vec![t.left_fragment(v4), t.right_fragment(v4)]);

        let t = tree_134();
        let tr = t.tree().unwrap();
        let v3 = tr.index_of(3).unwrap();
        let h = tr.edge_set_from_labels(&[4]).unwrap();
        assert_eq!(spans(&t.fragment_family(v3, h)), vec![vec![], vec![2], vec![4, 5, 6]]);
        let v1 = tr.index_of(1).unwrap();
        assert_eq!(t.fragment_family(v1, EdgeSet::EMPTY), vec![t.left_fragment(v1), t.right_fragment(v1)]);
    }

    #[test]
    fn rejects_non_binary_or_misplaced_children() {
        let l = LinkSet::new(6).unwrap();
        assert!(FragTree::from_tree(l, RootedTree::new(3, &[(3, 4), (3, 5)]).unwrap()).is_err());
        // 2 hangs right of 4 but lies in 4's left fragment
        assert!(FragTree::from_tree(l, RootedTree::new(1, &[(1, 4), (4, 5), (5, 2)]).unwrap()).is_err());
        assert!(FragTree::from_tree(LinkSet::new(3).unwrap(), RootedTree::new(3, &[(3, 4)]).unwrap()).is_err());
    }

    #[test]
    fn budget_guard() {
        let l = LinkSet::new(20).unwrap();
        let g = Subset::from_links(1..=14);
        assert!(matches!(
            enumerate_fragmentation_trees(g, l, Budget::default()),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(Budget::default().check(10).is_ok());
        assert!(Budget::default().check(11).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = tree_134();
        let back = FragTree::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        let e = FragTree::empty(LinkSet::new(3).unwrap());
        assert_eq!(FragTree::from_json(&e.to_json()).unwrap(), e);
    }
}
