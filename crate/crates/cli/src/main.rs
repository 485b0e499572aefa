use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fragtree::dot::{fragtree_dot, hasse_dot, tree_dot};
use fragtree::poset::{hasse_edges, leq_p, mobius, mobius_recursive};
use fragtree::prob::{
    dist_continuous, dist_continuous_all, dist_continuous_via_trees, dist_discrete, dist_discrete_all, format_prob,
    tree_prob_continuous, tree_prob_discrete,
};
use fragtree::sim::{estimate_subset_prob, estimate_tree_prob, DEFAULT_SEED};
use fragtree::verify::{run_verify, VerifyConfig};
use fragtree::{
    enumerate_fragmentation_trees, Budget, DistTable, EdgeSet, Error, FragTree, LinkSet, Mode, RateSpec, RootedTree,
    Subset, Time, TreeJson,
};

#[derive(Parser)]
#[command(version, about = "Exact and simulated laws of chain fragmentation")]
struct Args {
    /// Worker threads (numerical output is bit-stable at 1).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Dot,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// P(F_t = G) for one subset or all subsets.
    Dist {
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        time: String,
        /// Links of G, e.g. 1,3,4 (empty for the empty set).
        #[arg(long, conflicts_with = "all")]
        subset: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Exact rational arithmetic (discrete rates only).
        #[arg(long)]
        exact: bool,
        /// Continuous mode: sum tree probabilities instead of the closed form.
        #[arg(long)]
        via_trees: bool,
    },
    /// Probability that the process matches a fragmentation tree at time t.
    Treeprob {
        #[arg(long)]
        rates: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        time: String,
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// List the fragmentation trees on G.
    Trees {
        /// Chain length n.
        #[arg(long)]
        links: u32,
        #[arg(long, default_value = "")]
        subset: String,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Hasse diagram of the pruning poset, or a Möbius self-check.
    Poset {
        #[arg(long)]
        tree: PathBuf,
        /// Draw the interval [H, ∅] in bold.
        #[arg(long)]
        highlight: Option<String>,
        /// Compare closed-form and recursive Möbius values on all pairs.
        #[arg(long)]
        verify: bool,
        /// Draw the tree itself with these edges dashed.
        #[arg(long, conflicts_with_all = ["highlight", "verify"])]
        forest: Option<String>,
    },
    /// Möbius function μ(H, K) of the pruning poset.
    Mobius {
        #[arg(long)]
        tree: PathBuf,
        /// H as edge names, e.g. e1,e2.
        #[arg(long, default_value = "")]
        from: String,
        /// K as edge names; empty for the top element.
        #[arg(long, default_value = "")]
        to: String,
        /// Use the recursive definition instead of the closed form.
        #[arg(long)]
        recursive: bool,
    },
    /// Monte Carlo estimate of a tree or subset probability.
    Simulate {
        #[arg(long)]
        rates: PathBuf,
        #[arg(long, conflicts_with = "subset")]
        tree: Option<PathBuf>,
        #[arg(long)]
        subset: Option<String>,
        #[arg(long)]
        time: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Run the self-check suite and report every group.
    Verify {
        #[arg(long, default_value_t = 4)]
        n: u32,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
        /// Negative control: perturb link 1 on the formula side.
        #[arg(long)]
        perturb: Option<f64>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_rates(path: &Path) -> Result<RateSpec> {
    Ok(RateSpec::from_json_str(&read(path)?)?)
}

fn load_tree_json(path: &Path) -> Result<TreeJson> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing tree {}", path.display()))
}

fn load_rooted_tree(path: &Path) -> Result<RootedTree> {
    Ok(load_tree_json(path)?.to_tree()?)
}

fn load_fragtree(path: &Path, chain: LinkSet) -> Result<FragTree> {
    let ft = FragTree::from_json(&load_tree_json(path)?)?;
    if ft.chain() != chain {
        bail!("tree is on {} links but rates are on {}", ft.chain().n(), chain.n());
    }
    Ok(ft)
}

fn emit_table<S: fragtree::Scalar>(table: &DistTable<S>, format: Format) -> Result<String> {
    match format {
        Format::Csv | Format::Text => Ok(table.to_csv()),
        Format::Json => Ok(serde_json::to_string_pretty(&table.to_json())? + "\n"),
        Format::Dot => bail!("dot output is not available for distributions"),
    }
}

fn cmd_dist(
    rates: &Path,
    time: &str,
    subset: Option<&str>,
    all: bool,
    format: Format,
    exact: bool,
    via_trees: bool,
) -> Result<String> {
    let rates = load_rates(rates)?;
    let t = Time::parse(time, rates.mode())?;
    let budget = Budget::default();
    let subset = match (subset, all) {
        (Some(s), false) => Some(Subset::parse(s, rates.chain())?),
        (None, true) => None,
        _ => bail!("give either --subset or --all"),
    };
    if exact && rates.mode() != Mode::Discrete {
        bail!("--exact needs discrete rates");
    }
    match (t, subset) {
        (Time::Step(s), Some(g)) if exact => {
            let p = dist_discrete(g, &rates.to_exact(), s, budget)?;
            emit_table(&DistTable { time: t, entries: vec![(g, p)] }, format)
        }
        (Time::Step(s), None) if exact => emit_table(&dist_discrete_all(&rates.to_exact(), s, budget)?, format),
        (Time::Step(s), Some(g)) => {
            emit_table(&DistTable { time: t, entries: vec![(g, dist_discrete(g, &rates, s, budget)?)] }, format)
        }
        (Time::Step(s), None) => emit_table(&dist_discrete_all(&rates, s, budget)?, format),
        (Time::Real(x), Some(g)) => {
            let p = if via_trees { dist_continuous_via_trees(g, &rates, x, budget)? } else { dist_continuous(g, &rates, x)? };
            emit_table(&DistTable { time: t, entries: vec![(g, p)] }, format)
        }
        (Time::Real(x), None) if via_trees => {
            let entries = rates
                .chain()
                .subsets()
                .map(|g| Ok((g, dist_continuous_via_trees(g, &rates, x, budget)?)))
                .collect::<Result<Vec<_>>>()?;
            emit_table(&DistTable { time: t, entries }, format)
        }
        (Time::Real(x), None) => emit_table(&dist_continuous_all(&rates, x)?, format),
    }
}

fn cmd_treeprob(rates: &Path, tree: &Path, time: &str, exact: bool, format: Format) -> Result<String> {
    let rates = load_rates(rates)?;
    let ft = load_fragtree(tree, rates.chain())?;
    let t = Time::parse(time, rates.mode())?;
    let p = match t {
        Time::Step(s) if exact => fragtree::Scalar::to_f64(&tree_prob_discrete(&ft, &rates.to_exact(), s)?),
        Time::Step(s) => tree_prob_discrete(&ft, &rates, s)?,
        Time::Real(_) if exact => bail!("--exact needs discrete rates"),
        Time::Real(x) => tree_prob_continuous(&ft, &rates, x)?,
    };
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(&json!({
            "tree": ft.to_json(),
            "t": t.as_f64(),
            "probability": p,
        }))? + "\n"),
        _ => Ok(format!("probability\n{}\n", format_prob(p))),
    }
}

fn describe(ft: &FragTree) -> String {
    match ft.tree() {
        None => "empty".into(),
        Some(t) => {
            let edges: Vec<String> = t
                .preorder()
                .into_iter()
                .flat_map(|v| t.children(v).iter().map(move |&c| format!("{}->{}", t.label(v), t.label(c))))
                .collect();
            format!("root {} [{}]", t.label(t.root()), edges.join(" "))
        }
    }
}

fn cmd_trees(links: u32, subset: &str, format: Format) -> Result<String> {
    let chain = LinkSet::new(links)?;
    let g = Subset::parse(subset, chain)?;
    let trees = enumerate_fragmentation_trees(g, chain, Budget::default())?;
    Ok(match format {
        Format::Json => serde_json::to_string_pretty(&trees.iter().map(FragTree::to_json).collect::<Vec<_>>())? + "\n",
        Format::Dot => trees.iter().map(fragtree_dot).collect::<Vec<_>>().join("\n"),
        Format::Text | Format::Csv => {
            let mut out = String::new();
            for (i, ft) in trees.iter().enumerate() {
                let frags: Vec<String> = ft.externals().iter().map(|j| j.to_string()).collect();
                out += &format!("{}\t{}\texternal {}\n", i + 1, describe(ft), frags.join(" "));
            }
            out
        }
    })
}

fn cmd_poset(tree: &Path, highlight: Option<&str>, verify: bool, forest: Option<&str>) -> Result<(String, bool)> {
    let t = load_rooted_tree(tree)?;
    if let Some(h) = forest {
        return Ok((tree_dot(&t, t.parse_edge_set(h)?), true));
    }
    if verify {
        let mut pairs = 0u64;
        let mut mismatches = Vec::new();
        for h in t.edges().subsets() {
            for k in h.subsets().filter(|&k| leq_p(&t, h, k)) {
                pairs += 1;
                let (a, b) = (mobius(&t, h, k).value, mobius_recursive(&t, h, k)?.value);
                if a != b {
                    mismatches.push(json!({"H": t.edge_set_name(h), "K": t.edge_set_name(k), "closed": a, "recursive": b}));
                }
            }
        }
        let ok = mismatches.is_empty();
        let report = json!({
            "pairs": pairs,
            "covers": hasse_edges(&t)?.len(),
            "result": if ok { "closed-form = recursive on all pairs" } else { "mismatch" },
            "mismatches": mismatches,
        });
        return Ok((serde_json::to_string_pretty(&report)? + "\n", ok));
    }
    let h = highlight.map(|h| t.parse_edge_set(h)).transpose()?;
    Ok((hasse_dot(&t, h)?, true))
}

fn cmd_mobius(tree: &Path, from: &str, to: &str, recursive: bool) -> Result<String> {
    let t = load_rooted_tree(tree)?;
    let (h, k): (EdgeSet, EdgeSet) = (t.parse_edge_set(from)?, t.parse_edge_set(to)?);
    let m = if recursive { mobius_recursive(&t, h, k)? } else { mobius(&t, h, k) };
    if m.comparable {
        Ok(format!("{}\n", m.value))
    } else {
        Ok(format!("{} (incomparable)\n", m.value))
    }
}

fn cmd_simulate(rates: &Path, tree: Option<&Path>, subset: Option<&str>, time: &str, samples: u64, seed: u64) -> Result<String> {
    let rates = load_rates(rates)?;
    let t = Time::parse(time, rates.mode())?;
    let budget = Budget::default();
    let (target, est, exact) = match (tree, subset) {
        (Some(path), None) => {
            let ft = load_fragtree(path, rates.chain())?;
            let est = estimate_tree_prob(&ft, &rates, t, samples, seed)?;
            let exact = match t {
                Time::Step(s) => tree_prob_discrete(&ft, &rates, s)?,
                Time::Real(x) => tree_prob_continuous(&ft, &rates, x)?,
            };
            (json!({"tree": ft.to_json()}), est, exact)
        }
        (None, Some(s)) => {
            let g = Subset::parse(s, rates.chain())?;
            let est = estimate_subset_prob(g, &rates, t, samples, seed)?;
            let exact = match t {
                Time::Step(s) => dist_discrete(g, &rates, s, budget)?,
                Time::Real(x) => dist_continuous(g, &rates, x)?,
            };
            (json!({"subset": g.to_vec()}), est, exact)
        }
        _ => bail!("give exactly one of --tree or --subset"),
    };
    let report = json!({
        "target": target,
        "t": t.as_f64(),
        "samples": samples,
        "estimate": est.estimate,
        "stderr": est.stderr,
        "exact": exact,
        "z": if est.stderr > 0.0 { (est.estimate - exact) / est.stderr } else { 0.0 },
        "seed": seed,
    });
    Ok(serde_json::to_string_pretty(&report)? + "\n")
}

/// 0 success, 1 verification failure, 2 usage or input error, 3 resource budget.
fn run(args: Args) -> Result<u8> {
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let (text, ok) = match args.command {
        Command::Dist { rates, time, subset, all, format, exact, via_trees } => {
            (cmd_dist(&rates, &time, subset.as_deref(), all, format, exact, via_trees)?, true)
        }
        Command::Treeprob { rates, tree, time, exact, format } => (cmd_treeprob(&rates, &tree, &time, exact, format)?, true),
        Command::Trees { links, subset, format } => (cmd_trees(links, &subset, format)?, true),
        Command::Poset { tree, highlight, verify, forest } => cmd_poset(&tree, highlight.as_deref(), verify, forest.as_deref())?,
        Command::Mobius { tree, from, to, recursive } => (cmd_mobius(&tree, &from, &to, recursive)?, true),
        Command::Simulate { rates, tree, subset, time, samples, seed } => {
            (cmd_simulate(&rates, tree.as_deref(), subset.as_deref(), &time, samples, seed)?, true)
        }
        Command::Verify { n, samples, seed, tolerance, perturb } => {
            let cfg = VerifyConfig { n, samples, seed, tolerance, perturb, ..VerifyConfig::default() };
            let report = run_verify(&cfg)?;
            (serde_json::to_string_pretty(&report)? + "\n", report.passed)
        }
    };
    match &args.output {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(if ok { 0 } else { 1 })
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::BudgetExceeded { .. } | Error::SizeBound { .. }) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
