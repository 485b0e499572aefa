//! Graphviz export.

use crate::error::Result;
use crate::fragtree::{FragTree, Line};
use crate::poset::{hasse_edges, leq_p};
use crate::tree::{EdgeSet, RootedTree};
use std::fmt::Write as _;

/// A rooted tree; edges in `cut` are dashed, so `T − H` reads as a forest.
pub fn tree_dot(t: &RootedTree, cut: EdgeSet) -> String {
    let mut out = String::from("digraph tree {\n  node [shape=circle];\n");
    for v in 0..t.len() {
        writeln!(out, "  v{} [label=\"{}\"];", t.label(v), t.label(v)).unwrap();
    }
    for v in t.preorder() {
        for &c in t.children(v) {
            let dashed = if cut.contains(c) { ", style=dashed" } else { "" };
            writeln!(out, "  v{} -> v{} [label=\"e{}\"{dashed}];", t.label(v), t.label(c), t.label(c)).unwrap();
        }
    }
    out.push_str("}\n");
    out
}

/// A fragmentation tree drawn top-down from a phantom node; each line is
/// labelled with the fragment it carries and external fragments end in boxes.
pub fn fragtree_dot(ft: &FragTree) -> String {
    let mut out = String::from("digraph fragtree {\n  ordering=out;\n  top [shape=point];\n");
    for v in 0..ft.len() {
        writeln!(out, "  v{} [shape=circle, label=\"{}\"];", ft.link(v), ft.link(v)).unwrap();
    }
    for (k, j) in ft.externals().iter().enumerate() {
        writeln!(out, "  x{k} [shape=box, label=\"{j}\"];").unwrap();
    }
    let target = |line: Line| match line {
        Line::Vertex(c) => format!("v{}", ft.link(c)),
        Line::External(k) => format!("x{k}"),
    };
    let root = ft.root_line();
    writeln!(out, "  top -> {} [label=\"{}\"];", target(root), ft.line_fragment(root)).unwrap();
    if let Some(t) = ft.tree() {
        for v in t.preorder() {
            for line in [ft.left(v), ft.right(v)] {
                writeln!(out, "  v{} -> {} [label=\"{}\"];", ft.link(v), target(line), ft.line_fragment(line)).unwrap();
            }
        }
    }
    out.push_str("}\n");
    out
}

/// The Hasse diagram of the pruning poset, `∅` on top. With `highlight = H`,
/// the interval `[H, ∅]` is drawn bold.
pub fn hasse_dot(t: &RootedTree, highlight: Option<EdgeSet>) -> Result<String> {
    let covers = hasse_edges(t)?;
    let inside = |x: EdgeSet| highlight.is_some_and(|h| leq_p(t, h, x));
    let id = |x: EdgeSet| format!("s{}", x.0);
    let mut out = String::from("digraph hasse {\n  rankdir=BT;\n  node [shape=plaintext];\n");
    for x in t.edges().subsets() {
        let bold = if inside(x) { ", fontname=\"Helvetica-Bold\"" } else { "" };
        writeln!(out, "  {} [label=\"{}\"{}];", id(x), t.edge_set_name(x), bold).unwrap();
    }
    for (lo, hi) in covers {
        let bold = if inside(lo) && inside(hi) { " [penwidth=3]" } else { "" };
        writeln!(out, "  {} -> {}{};", id(lo), id(hi), bold).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}
