use rand::Rng;
use serde_json::json;

use super::*;
use crate::bits::BitSet;
use crate::bottleneck::{self, covering_tree, random_cover_input, RectIndex, TreeChecks};
use crate::cnf::{dimacs, encode_bin_clique, encode_block_clique, CnfFormula};
use crate::comm::{self, distributional_error, leaf_census, subcube_like_check, ErrorMode, ProtocolTree};
use crate::density::{self, CnMode, CnParams};
use crate::f2::{self, closure, is_safe, rank_of, safety_report, Layout, LinearForm};
use crate::graph::{self, BlockGraph, SimpleGraph, VertexId};
use crate::pdt::{self, NonEdgeInstance, ParityDecisionTree};
use crate::proof::{self, CpProof, ResPlusProof, VarSplit};
use crate::rng::stream;
use crate::stats::{self, CsvRow};

pub(super) fn dispatch(cmd: Command, global: &Global) -> Result<(), CliError> {
    match cmd {
        Command::SampleGraph(g) => sample_graph(&mut Ctx::new("sample-graph", global)?, g),
        Command::Encode { which } => match which {
            EncodeCmd::Bin(g) => encode_bin(&mut Ctx::new("encode bin", global)?, g),
            EncodeCmd::Block(g) => encode_block(&mut Ctx::new("encode block", global)?, g),
        },
        Command::CheckDensity { which } => match which {
            DensityCmd::Ac { graph, s } => density_ac(&mut Ctx::new("check-density ac", global)?, graph, s),
            DensityCmd::Bcn {
                graph,
                alpha,
                beta,
                r,
                mode,
                trials,
                budget,
            } => density_bcn(&mut Ctx::new("check-density bcn", global)?, graph, alpha, beta, r, mode, trials, budget),
        },
        Command::Concentration(a) => concentration(&mut Ctx::new("concentration", global)?, a),
        Command::Walk { which } => match which {
            WalkCmd::Simulate(t) => walk_simulate(&mut Ctx::new("walk simulate", global)?, t),
            WalkCmd::Distribution { tree, trials, tv_max } => {
                walk_distribution(&mut Ctx::new("walk distribution", global)?, tree, trials, tv_max)
            }
            WalkCmd::SuccessRate {
                tree,
                trials,
                alpha,
                beta,
                r,
            } => walk_success(&mut Ctx::new("walk success-rate", global)?, tree, trials, alpha, beta, r),
        },
        Command::Extract(a) => extract(&mut Ctx::new("extract", global)?, a),
        Command::ClosureTest(a) => closure_test(&mut Ctx::new("closure-test", global)?, a),
        Command::RankProb(a) => rank_prob(&mut Ctx::new("rank-prob", global)?, a),
        Command::Bottleneck { which } => match which {
            BottleneckCmd::Mu { graph, q } => bottleneck_mu(&mut Ctx::new("bottleneck mu", global)?, graph, q),
            BottleneckCmd::Cover {
                graph,
                q,
                support,
                node_cap,
            } => bottleneck_cover(&mut Ctx::new("bottleneck cover", global)?, graph, q, support, node_cap),
            BottleneckCmd::Census {
                graph,
                q,
                support,
                instances,
                node_cap,
                family,
            } => bottleneck_census(
                &mut Ctx::new("bottleneck census", global)?,
                graph,
                q,
                support,
                instances,
                node_cap,
                family,
            ),
        },
        Command::Verify { which } => match which {
            ProofCmd::Cp(a) => verify(&mut Ctx::new("verify cp", global)?, a, ProofKind::Cp),
            ProofCmd::Rlin(a) => verify(&mut Ctx::new("verify rlin", global)?, a, ProofKind::Rlin),
        },
        Command::Translate { which } => match which {
            TranslateCmd::CpDag(a) => translate(&mut Ctx::new("translate cp-dag", global)?, a, ProofKind::Cp),
            TranslateCmd::RlinDag(a) => translate(&mut Ctx::new("translate rlin-dag", global)?, a, ProofKind::Rlin),
        },
        Command::Comm { which } => match which {
            CommCmd::Check(a) => comm_check(&mut Ctx::new("comm check", global)?, a),
            CommCmd::Error { protocol, trials } => comm_error(&mut Ctx::new("comm error", global)?, protocol, trials),
            CommCmd::Census { protocol, s } => comm_census(&mut Ctx::new("comm census", global)?, protocol, s),
        },
    }
}

/// Graph parameters as resolved, plus the graph.
struct Loaded {
    g: BlockGraph,
    p: f64,
    seed: u64,
}

fn load_graph(ctx: &mut Ctx, a: GraphArgs, defaults: (usize, usize, f64)) -> Result<Loaded, CliError> {
    if let Some(path) = ctx.path("graph", a.graph)? {
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let g = BlockGraph::from_json(&text).map_err(config_err)?;
        let meta = g.meta();
        let p = meta.map_or(f64::NAN, |m| m.p);
        let seed = meta.map_or(0, |m| m.seed);
        ctx.note("n", g.n());
        ctx.note("k", g.k());
        return Ok(Loaded { g, p, seed });
    }
    let n = ctx.get("n", a.n, defaults.0)?;
    let k = ctx.get("k", a.k, defaults.1)?;
    let p = ctx.get("p", a.p, defaults.2)?;
    let seed = ctx.get("seed", a.seed, 0)?;
    let g = BlockGraph::sample(n, p, k, seed).map_err(config_err)?;
    Ok(Loaded { g, p, seed })
}

fn sample_graph(ctx: &mut Ctx, a: GraphArgs) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (16, 3, 0.5))?;
    let value: serde_json::Value = serde_json::from_str(&l.g.to_json()).map_err(failed)?;
    ctx.write_json(&format!("graph_n{}_k{}_seed{}.json", l.g.n(), l.g.k(), l.seed), value)?;
    println!("edges = {}", l.g.edge_count());
    Ok(())
}

fn summarize_cnf(f: &CnfFormula) {
    println!("vars = {}", f.num_vars);
    println!("clauses = {}", f.clauses.len());
}

fn encode_block(ctx: &mut Ctx, a: GraphArgs) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (4, 3, 0.5))?;
    let f = encode_block_clique(&l.g);
    let text = dimacs::to_dimacs(&f, &ctx.header());
    ctx.write(&format!("block_n{}_k{}_seed{}.cnf", l.g.n(), l.g.k(), l.seed), &text)?;
    summarize_cnf(&f);
    Ok(())
}

fn encode_bin(ctx: &mut Ctx, a: GraphArgs) -> Result<(), CliError> {
    if a.graph.is_some() {
        return Err(config_err("encode bin samples G(n, p); --graph is not supported"));
    }
    let n = ctx.get("n", a.n, 8)?;
    let k = ctx.get("k", a.k, 3)?;
    let p = ctx.get("p", a.p, 0.5)?;
    let seed = ctx.get("seed", a.seed, 0)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(config_err("p must lie in [0, 1]"));
    }
    let mut g = SimpleGraph::empty(n);
    for u in 0..n {
        for v in u + 1..n {
            if graph::sampled_edge(seed, p, u, v) {
                g.add_edge(u, v);
            }
        }
    }
    let f = encode_bin_clique(&g, k).map_err(config_err)?;
    let text = dimacs::to_dimacs(&f, &ctx.header());
    ctx.write(&format!("bin_n{n}_k{k}_seed{seed}.cnf"), &text)?;
    summarize_cnf(&f);
    Ok(())
}

fn density_ac(ctx: &mut Ctx, a: GraphArgs, s: Option<usize>) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (16, 3, 0.5))?;
    let s = ctx.opt("s", s)?;
    let rep = density::min_almost_complete(&l.g).map_err(config_err)?;
    let whp = stats::almost_complete_threshold(l.g.n(), l.p, l.g.k());
    ctx.write_json(
        &format!("ac_n{}_k{}_seed{}.json", l.g.n(), l.g.k(), l.seed),
        json!({ "report": rep, "s_whp": whp }),
    )?;
    println!("s_star = {}", rep.s_star);
    match s {
        Some(s) if rep.s_star > s => Err(CliError::Assertion(format!("graph is only {}-almost-complete, not {s}", rep.s_star))),
        _ => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn density_bcn(
    ctx: &mut Ctx,
    a: GraphArgs,
    alpha: Option<f64>,
    beta: Option<f64>,
    r: Option<usize>,
    mode: Option<String>,
    trials: Option<u64>,
    budget: Option<u64>,
) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (256, 4, 0.875))?;
    let alpha = match ctx.opt("alpha", alpha)? {
        Some(a) => a,
        None if l.p.is_finite() => {
            ctx.note("alpha", l.p);
            l.p
        }
        None => return Err(config_err("--alpha is needed for a graph without p")),
    };
    let beta = ctx.get("beta", beta, 0.59)?;
    let r = ctx.get("r", r, 8)?;
    let trials = ctx.get("trials", trials, 1000)?;
    let budget = ctx.get("budget", budget, density::DEFAULT_BUDGET as u64)?;
    let mode_name = ctx.get("mode", mode, "auto".to_string())?;
    let mode = match mode_name.as_str() {
        "auto" => CnMode::Auto { trials, seed: l.seed },
        "exhaustive" => CnMode::Exhaustive,
        "sampled" => CnMode::Sampled { trials, seed: l.seed },
        other => return Err(config_err(format!("unknown mode `{other}`"))),
    };
    let params = CnParams { alpha, beta, r };
    let rep = density::check_bounded_cn(&l.g, params, mode, budget as u128).map_err(config_err)?;
    ctx.write_json(&format!("bcn_n{}_k{}_seed{}.json", l.g.n(), l.g.k(), l.seed), json!({ "report": rep }))?;
    println!("pass = {}", rep.pass);
    println!("max_deviation = {}", rep.max_deviation);
    if rep.pass {
        Ok(())
    } else {
        Err(CliError::Assertion("a common neighborhood falls outside the interval".into()))
    }
}

fn concentration(ctx: &mut Ctx, a: ConcentrationArgs) -> Result<(), CliError> {
    let n = ctx.get("n", a.n, 4096)?;
    let k = ctx.get("k", a.k, 8)?;
    let p = ctx.get("p", a.p, 0.9)?;
    let seed = ctx.get("seed", a.seed, 0)?;
    let graphs = ctx.get("graphs", a.graphs, 20)?;
    let tuples = ctx.get("tuples", a.tuples, 5000)?;
    let res = density::concentration_experiment_ac(n, p, k, graphs, tuples, seed).map_err(config_err)?;
    ctx.write_csv(&format!("concentration_n{n}_k{k}_seed{seed}.csv"), &[res.row()])?;
    println!("frequency = {}", res.tally.freq());
    println!("reference = {}", res.reference);
    if res.within_reference() {
        Ok(())
    } else {
        Err(CliError::Assertion("frequency exceeds the reference plus 3 sigma".into()))
    }
}

fn parse_m(text: &str) -> Result<Vec<VertexId>, CliError> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (b, i) = s.split_once(':').ok_or_else(|| config_err(format!("vertex `{s}` is not block:index")))?;
            let b = b.parse().map_err(|_| config_err(format!("bad block in `{s}`")))?;
            let i = i.parse().map_err(|_| config_err(format!("bad index in `{s}`")))?;
            Ok(VertexId::new(b, i))
        })
        .collect()
}

struct Walked {
    l: Loaded,
    m: Vec<VertexId>,
    tree: ParityDecisionTree,
}

fn load_tree(ctx: &mut Ctx, a: TreeArgs, defaults: (usize, usize, f64, usize)) -> Result<Walked, CliError> {
    let l = load_graph(ctx, a.graph, (defaults.0, defaults.1, defaults.2))?;
    let m_text = ctx.get("m", a.m, String::new())?;
    let m = parse_m(&m_text)?;
    let inst = NonEdgeInstance::new(&l.g, m.clone()).map_err(config_err)?;
    let tree = match ctx.path("tree", a.tree)? {
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
            ParityDecisionTree::from_text(inst.layout(), text.trim()).map_err(config_err)?
        }
        None => {
            let depth = ctx.get("depth", a.depth, defaults.3)?;
            let max_vars = ctx.get("max_vars", a.max_vars, 4)?;
            let tree_seed = ctx.get("tree_seed", a.tree_seed, 0)?;
            let free = inst.free_blocks();
            if free.count() == 0 && depth > 0 {
                return Err(config_err("M covers every block, nothing to query"));
            }
            ParityDecisionTree::random(inst.layout(), depth, &free, max_vars, &mut stream(tree_seed, 0))
        }
    };
    Ok(Walked { l, m, tree })
}

fn walk_simulate(ctx: &mut Ctx, a: TreeArgs) -> Result<(), CliError> {
    let w = load_tree(ctx, a, (16, 6, 0.9, 4))?;
    let inst = NonEdgeInstance::new(&w.l.g, w.m.clone()).map_err(config_err)?;
    let t = pdt::simulate_walk(&inst, &w.tree, &mut stream(w.l.seed, 1)).map_err(failed)?;
    let transcript: serde_json::Value = serde_json::from_str(&t.to_json()).map_err(failed)?;
    ctx.write_json(
        &format!("walk_n{}_k{}_seed{}.json", w.l.g.n(), w.l.g.k(), w.l.seed),
        json!({ "tree": w.tree.to_text(), "transcript": transcript }),
    )?;
    println!("outcome = {:?}", t.outcome);
    println!("iterations = {}", t.iterations());
    t.check_invariants(&inst, &w.tree).map_err(CliError::Assertion)
}

fn walk_distribution(ctx: &mut Ctx, a: TreeArgs, trials: Option<u64>, tv_max: Option<f64>) -> Result<(), CliError> {
    let w = load_tree(ctx, a, (16, 6, 0.5, 6))?;
    let trials = ctx.get("trials", trials, 100_000)?;
    let tv_max = ctx.get("tv_max", tv_max, 0.02)?;
    let inst = NonEdgeInstance::new(&w.l.g, w.m.clone()).map_err(config_err)?;
    let rep = pdt::walk_distribution_test(&inst, &w.tree, trials, w.l.seed).map_err(config_err)?;
    let (n, k) = (w.l.g.n(), w.l.g.k());
    let rows: Vec<CsvRow> = (0..w.tree.len())
        .map(|v| {
            CsvRow {
                experiment_id: "walk_distribution".into(),
                n,
                k,
                p: w.l.p,
                params: Vec::new(),
                empirical_value: rep.walk_visits[v] as f64 / trials as f64,
                reference_bound: rep.direct_visits[v] as f64 / trials as f64,
                trials,
                seed: w.l.seed,
            }
            .param("node", v)
            .param("leaf", w.tree.is_leaf(v))
        })
        .collect();
    ctx.write_csv(&format!("walk_distribution_n{n}_k{k}_seed{}.csv", w.l.seed), &rows)?;
    println!("leaf_tv = {}", rep.leaf_tv);
    println!("max_node_gap = {}", rep.max_node_gap);
    if rep.leaf_tv <= tv_max {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("leaf total variation {} exceeds {tv_max}", rep.leaf_tv)))
    }
}

fn walk_success(
    ctx: &mut Ctx,
    a: TreeArgs,
    trials: Option<u64>,
    alpha: Option<f64>,
    beta: Option<f64>,
    r: Option<usize>,
) -> Result<(), CliError> {
    let w = load_tree(ctx, a, (1024, 16, 1.0 - 1.0 / 1024.0, 8))?;
    let trials = ctx.get("trials", trials, 10_000)?;
    let alpha = match ctx.opt("alpha", alpha)? {
        Some(a) => a,
        None if w.l.p.is_finite() => {
            ctx.note("alpha", w.l.p);
            w.l.p
        }
        None => return Err(config_err("--alpha is needed for a graph without p")),
    };
    let d = w.tree.depth();
    let r = ctx.get("r", r, w.m.len() + 8 * d)?;
    let beta = match ctx.opt("beta", beta)? {
        Some(b) => b,
        None => {
            let b = density::estimate_beta(&w.l.g, alpha, r, 2, 1000, w.l.seed);
            ctx.note("beta_measured", b);
            b
        }
    };
    let inst = NonEdgeInstance::new(&w.l.g, w.m.clone()).map_err(config_err)?;
    let rep = pdt::success_rate(&inst, &w.tree, alpha, beta, r, trials, w.l.seed).map_err(config_err)?;
    let (n, k) = (w.l.g.n(), w.l.g.k());
    let row = |id: &str, t: stats::Tally, bound: f64| CsvRow {
        experiment_id: id.into(),
        n,
        k,
        p: w.l.p,
        params: Vec::new(),
        empirical_value: t.freq(),
        reference_bound: bound,
        trials,
        seed: w.l.seed,
    };
    let rows = vec![
        row("walk_success", rep.success, rep.bound).param("depth", d).param("beta", beta),
        row("walk_overrun", rep.overrun, rep.overrun_bound).param("depth", d).param("beta", beta),
    ];
    ctx.write_csv(&format!("walk_success_n{n}_k{k}_seed{}.csv", w.l.seed), &rows)?;
    println!("success = {}", rep.success.freq());
    println!("bound = {}", rep.bound);
    println!("overrun = {}", rep.overrun.freq());
    if rep.pass && rep.overrun_pass {
        Ok(())
    } else {
        Err(CliError::Assertion("success rate or overrun frequency misses its bound".into()))
    }
}

fn extract(ctx: &mut Ctx, a: ExtractArgs) -> Result<(), CliError> {
    let w = load_tree(ctx, a.tree, (16, 6, 0.95, 3))?;
    let attempts = ctx.get("attempts", a.attempts, 100)?;
    let r = ctx.get("r", a.r, w.m.len() + 8 * w.tree.depth())?;
    let inst = NonEdgeInstance::new(&w.l.g, w.m.clone()).map_err(config_err)?;
    let dims = inst.layout().dims();
    for t in 0..attempts {
        let walk = pdt::simulate_walk(&inst, &w.tree, &mut stream(w.l.seed, t)).map_err(failed)?;
        if !walk.is_success() {
            continue;
        }
        let psi = f2::LinearSystem::from_equations(dims, w.tree.path_constraints(walk.node).expect("leaf on tree"));
        let e = pdt::extract_restriction(&inst, &walk, &psi, r).map_err(config_err)?;
        ctx.note("walk", t);
        ctx.write_json(
            &format!("extract_n{}_k{}_seed{}.json", w.l.g.n(), w.l.g.k(), w.l.seed),
            json!({ "tree": w.tree.to_text(), "leaf": walk.node, "extraction": e }),
        )?;
        println!("fixed_blocks = {}", e.fixed());
        println!("holds = {}", e.holds());
        return if e.holds() {
            Ok(())
        } else {
            Err(CliError::Assertion("extracted restriction misses a condition".into()))
        };
    }
    Err(CliError::Failed(format!("no successful walk in {attempts} attempts")))
}

/// Blocks whose zeroing makes `forms` safe; `None` unless exactly one such
/// set is inclusion-minimal.
fn minimal_safe_zeroing(l: &Layout, forms: &[LinearForm]) -> Option<BitSet> {
    let ok: Vec<u32> = (0..1u32 << l.k)
        .filter(|&w| {
            let s = BitSet::from_indices(l.k, (0..l.k).filter(|b| (w >> b) & 1 == 1));
            is_safe(l, &f2::safety::zero_blocks(l, forms, &s))
        })
        .collect();
    let minimal: Vec<u32> = ok.iter().copied().filter(|&w| !ok.iter().any(|&o| o != w && o & w == o)).collect();
    (minimal.len() == 1).then(|| BitSet::from_indices(l.k, (0..l.k).filter(|b| (minimal[0] >> b) & 1 == 1)))
}

fn closure_test(ctx: &mut Ctx, a: ClosureArgs) -> Result<(), CliError> {
    let systems = ctx.get("systems", a.systems, 500)?;
    let max_k = ctx.get("max_k", a.max_k, 6)?;
    let max_bits = ctx.get("max_bits", a.max_bits, 3)?;
    let seed = ctx.get("seed", a.seed, 0)?;
    if max_k == 0 || max_bits == 0 || max_k > 16 {
        return Err(config_err("need 1 <= max_k <= 16 and max_bits >= 1"));
    }
    let mut rows = Vec::new();
    let mut bad = 0;
    for t in 0..systems {
        let mut rng = stream(seed, t);
        let l = Layout::new(rng.gen_range(1..=max_k), rng.gen_range(1..=max_bits));
        let m = rng.gen_range(1..=l.dims().min(8));
        let density = rng.gen_range(0.1..0.6);
        let forms: Vec<LinearForm> = (0..m)
            .map(|_| LinearForm::from_vars(l.dims(), (0..l.dims()).filter(|_| rng.gen_bool(density))))
            .collect();
        let rep = safety_report(&l, &forms);
        let cl = closure(&l, &forms);
        let rest = rank_of(l.dims(), &f2::safety::zero_blocks(&l, &forms, &cl));
        let bound_ok = cl.count() + rest <= rep.rank;
        let minimal_ok = minimal_safe_zeroing(&l, &forms).as_ref() == Some(&cl);
        bad += usize::from(!bound_ok || !minimal_ok);
        rows.push(
            CsvRow {
                experiment_id: "closure".into(),
                n: 1 << l.bits,
                k: l.k,
                p: f64::NAN,
                params: Vec::new(),
                empirical_value: (cl.count() + rest) as f64,
                reference_bound: rep.rank as f64,
                trials: 1,
                seed,
            }
            .param("system", t)
            .param("forms", m)
            .param("safe", rep.safe)
            .param("closure", cl.count())
            .param("rest_rank", rest)
            .param("minimal", minimal_ok),
        );
    }
    ctx.write_csv(&format!("closure_seed{seed}.csv"), &rows)?;
    println!("systems = {systems}");
    println!("failures = {bad}");
    if bad == 0 {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("{bad} systems fail the closure checks")))
    }
}

fn rank_prob(ctx: &mut Ctx, a: RankArgs) -> Result<(), CliError> {
    let n = ctx.get("n", a.n, 16)?;
    let k = ctx.get("k", a.k, 8)?;
    let max_rank = ctx.get("max_rank", a.max_rank, 6)?;
    let allowed = ctx.get("allowed", a.allowed, (2 * n).div_ceil(3))?;
    let trials = ctx.get("trials", a.trials, 100_000)?;
    let seed = ctx.get("seed", a.seed, 0)?;
    let bits = graph::log2(n);
    graph::check_power_of_two(n).map_err(config_err)?;
    let layout = Layout::new(k, bits);
    if max_rank > layout.dims() || allowed > n {
        return Err(config_err("rank or allowed-set size exceeds the domain"));
    }
    let mut rows = Vec::new();
    let mut failed_ranks = Vec::new();
    for r in 0..=max_rank {
        let mut rng = stream(seed, r as u64);
        let psi = f2::random_system(&layout, r, &mut rng);
        let sets = f2::random_allowed_sets(n, k, allowed, &mut rng);
        let res = f2::rank_probability_experiment(&layout, &psi, &sets, trials, crate::rng::derive(seed, 1000 + r as u64))
            .map_err(config_err)?;
        if !res.pass {
            failed_ranks.push(r);
        }
        rows.push(
            CsvRow {
                experiment_id: "rank_probability".into(),
                n,
                k,
                p: f64::NAN,
                params: Vec::new(),
                empirical_value: res.tally.freq(),
                reference_bound: res.bound,
                trials,
                seed,
            }
            .param("rank", r)
            .param("allowed", allowed),
        );
    }
    ctx.write_csv(&format!("rank_n{n}_k{k}_seed{seed}.csv"), &rows)?;
    println!("ranks = {}", max_rank + 1);
    if failed_ranks.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("ranks {failed_ranks:?} exceed (3/4)^r + 3 sigma")))
    }
}

fn bottleneck_mu(ctx: &mut Ctx, a: GraphArgs, q: Option<usize>) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (16, 3, 0.07))?;
    let q = ctx.get("q", q, 1)?;
    let name = format!("mu_n{}_k{}_seed{}.json", l.g.n(), l.g.k(), l.seed);
    let Some(dag) = bottleneck::refutation_dag(&l.g).map_err(config_err)? else {
        ctx.write_json(&name, json!({ "satisfiable": true }))?;
        println!("satisfiable = true");
        return Ok(());
    };
    let idx = RectIndex::new(&l.g).map_err(config_err)?;
    let mu = bottleneck::build_mu(&dag, &idx, q).map_err(failed)?;
    let steps: Vec<serde_json::Value> = mu
        .steps
        .iter()
        .map(|s| {
            json!({
                "node": s.node,
                "assigned_x": s.assigned_x,
                "assigned_y": s.assigned_y,
                "entry_width": s.entry_width.to_string(),
            })
        })
        .collect();
    ctx.write_json(
        &name,
        json!({
            "satisfiable": false,
            "dag_nodes": dag.len(),
            "assigned": mu.assigned(),
            "domain": mu.domain_size(),
            "max_per_node": mu.max_per_node(),
            "survivor_claim": mu.survivor_claim(),
            "steps": steps,
        }),
    )?;
    println!("assigned = {} of {}", mu.assigned(), mu.domain_size());
    println!("survivor_claim = {}", mu.survivor_claim());
    if mu.survivor_claim() {
        Ok(())
    } else {
        Err(CliError::Assertion("a survivor had width above 2q".into()))
    }
}

fn checks_json(c: &TreeChecks) -> serde_json::Value {
    json!({
        "checks": c,
        "coverage": c.coverage(),
        "nesting": c.nesting(),
        "unique_paths": c.unique_paths(),
        "outdegree": c.outdegree(),
    })
}

fn bottleneck_cover(
    ctx: &mut Ctx,
    a: GraphArgs,
    q: Option<usize>,
    support: Option<usize>,
    node_cap: Option<usize>,
) -> Result<(), CliError> {
    let l = load_graph(ctx, a, (16, 3, 0.5))?;
    let q = ctx.get("q", q, 1)?;
    let support = ctx.get("support", support, 3)?;
    let node_cap = ctx.get("node_cap", node_cap, bottleneck::DEFAULT_NODE_CAP)?;
    let idx = RectIndex::new(&l.g).map_err(config_err)?;
    let (tri, xs, ys) = random_cover_input(&idx, support, q, &mut stream(l.seed, 2)).map_err(failed)?;
    let t = covering_tree(&tri, &xs, &ys, &idx, q, node_cap).map_err(failed)?;
    let c = t.check(&idx);
    let census = t.census(l.g.n());
    ctx.write_json(
        &format!("cover_n{}_k{}_seed{}.json", l.g.n(), l.g.k(), l.seed),
        json!({ "tree_nodes": t.len(), "x_prime": xs.count(), "y_prime": ys.count(), "tree": checks_json(&c), "census": census }),
    )?;
    println!("tree_nodes = {}", t.len());
    println!("all_properties = {}", c.all());
    if c.all() {
        Ok(())
    } else {
        Err(CliError::Assertion("the covering tree misses a property".into()))
    }
}

fn bottleneck_census(
    ctx: &mut Ctx,
    a: GraphArgs,
    q: Option<usize>,
    support: Option<usize>,
    instances: Option<u64>,
    node_cap: Option<usize>,
    family: Option<String>,
) -> Result<(), CliError> {
    let family = ctx.get("family", family, "matching".to_string())?;
    let l = match family.as_str() {
        "gnp" => load_graph(ctx, a, (16, 3, 0.5))?,
        "matching" => {
            if a.graph.is_some() || a.p.is_some() {
                return Err(config_err("family matching takes only n, k and seed"));
            }
            let n = ctx.get("n", a.n, 64)?;
            let k = ctx.get("k", a.k, 3)?;
            let seed = ctx.get("seed", a.seed, 0)?;
            let g = bottleneck::sparse_matching_complement(n, k, seed).map_err(config_err)?;
            Loaded { g, p: f64::NAN, seed }
        }
        other => return Err(config_err(format!("unknown family `{other}`"))),
    };
    let q = ctx.get("q", q, 1)?;
    let support = ctx.get("support", support, 2)?;
    let instances = ctx.get("instances", instances, 10)?;
    let node_cap = ctx.get("node_cap", node_cap, bottleneck::DEFAULT_NODE_CAP)?;
    let (n, k) = (l.g.n(), l.g.k());
    let s = density::min_almost_complete(&l.g).map_err(config_err)?.s_star;
    let hypothesis = bottleneck::census_hypothesis(n, q, s);
    ctx.note("s", s);
    ctx.note("hypothesis", hypothesis);
    let idx = RectIndex::new(&l.g).map_err(config_err)?;
    let mut rows = Vec::new();
    let mut exceeded = 0;
    for t in 0..instances {
        let (tri, xs, ys) = random_cover_input(&idx, support, q, &mut stream(l.seed, 100 + t)).map_err(failed)?;
        let tree = covering_tree(&tri, &xs, &ys, &idx, q, node_cap).map_err(failed)?;
        let census = tree.census(n);
        exceeded += census.exceeded().len();
        rows.extend(census.rows(n, k, l.p, l.seed).into_iter().map(|r| r.param("instance", t)));
    }
    ctx.write_csv(&format!("census_n{n}_k{k}_seed{}.csv", l.seed), &rows)?;
    println!("s = {s}");
    println!("hypothesis = {hypothesis}");
    println!("exceeded = {exceeded}");
    if hypothesis && exceeded > 0 {
        Err(CliError::Assertion(format!("{exceeded} depths exceed (sqrt(n)/2)^d")))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum ProofKind {
    Cp,
    Rlin,
}

enum AnyProof {
    Cp(CpProof),
    Rlin(ResPlusProof),
}

impl AnyProof {
    fn text(&self) -> String {
        match self {
            AnyProof::Cp(p) => p.to_text(),
            AnyProof::Rlin(p) => p.to_text(),
        }
    }
}

/// The formula and the proof to check; `None` when the formula is satisfiable.
fn load_proof(ctx: &mut Ctx, a: ProofArgs, kind: ProofKind) -> Result<(CnfFormula, Option<AnyProof>), CliError> {
    if a.edgeless {
        ctx.note("edgeless", true);
        return Ok(match kind {
            ProofKind::Cp => {
                let (f, p) = proof::edgeless_cp_refutation();
                (f, Some(AnyProof::Cp(p)))
            }
            ProofKind::Rlin => {
                let (f, p) = proof::edgeless_resplus_refutation();
                (f, Some(AnyProof::Rlin(p)))
            }
        });
    }
    let l = load_graph(ctx, a.graph, (2, 3, 0.3))?;
    let f = encode_block_clique(&l.g);
    if let Some(path) = ctx.path("proof", a.proof)? {
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let p = match kind {
            ProofKind::Cp => AnyProof::Cp(CpProof::from_text(&text).map_err(config_err)?),
            ProofKind::Rlin => AnyProof::Rlin(ResPlusProof::from_text(&text).map_err(config_err)?),
        };
        return Ok((f, Some(p)));
    }
    let Some(res) = proof::tree_resolution(&f) else {
        return Ok((f, None));
    };
    let p = match kind {
        ProofKind::Cp => AnyProof::Cp(proof::resolution_to_cp(&f, &res).map_err(failed)?),
        ProofKind::Rlin => AnyProof::Rlin(res),
    };
    Ok((f, Some(p)))
}

fn verify(ctx: &mut Ctx, a: ProofArgs, kind: ProofKind) -> Result<(), CliError> {
    let save = a.save_proof.clone();
    let budget = ctx.get("budget", a.budget, proof::DEFAULT_VAR_BUDGET)?;
    let (f, p) = load_proof(ctx, a, kind)?;
    let name = format!("verify_{}.json", if matches!(kind, ProofKind::Cp) { "cp" } else { "rlin" });
    let Some(p) = p else {
        ctx.write_json(&name, json!({ "satisfiable": true }))?;
        println!("satisfiable = true");
        return Ok(());
    };
    if let Some(path) = save {
        ctx.write_extra(&path, &p.text())?;
    }
    let outcome = match &p {
        AnyProof::Cp(p) => proof::verify_cp(&proof::cp_axioms(&f), p, budget).map(|len| json!({ "length": len })),
        AnyProof::Rlin(p) => proof::verify_resplus(&f, p, budget).map(|r| json!({ "length": r.length, "depth": r.depth })),
    };
    match outcome {
        Ok(v) => {
            ctx.write_json(&name, json!({ "valid": true, "report": v }))?;
            println!("valid = true");
            Ok(())
        }
        Err(proof::ProofError::Budget { vars, budget }) => Err(config_err(format!("{vars} variables exceed the budget of {budget}"))),
        Err(e) => {
            ctx.write_json(&name, json!({ "valid": false, "error": e.to_string() }))?;
            println!("valid = false");
            Err(CliError::Assertion(e.to_string()))
        }
    }
}

fn translate(ctx: &mut Ctx, a: ProofArgs, kind: ProofKind) -> Result<(), CliError> {
    let save = a.save_proof.clone();
    let (f, p) = load_proof(ctx, a, kind)?;
    let name = format!("{}_dag.json", if matches!(kind, ProofKind::Cp) { "cp" } else { "rlin" });
    let Some(p) = p else {
        ctx.write_json(&name, json!({ "satisfiable": true }))?;
        println!("satisfiable = true");
        return Ok(());
    };
    if let Some(path) = save {
        ctx.write_extra(&path, &p.text())?;
    }
    let (dag_json, nodes, validity) = match &p {
        AnyProof::Cp(p) => {
            let split = VarSplit::clique_halves(&f.var_map);
            let dag = proof::cp_to_triangle_dag(&f, p, &split).map_err(|e| CliError::Assertion(e.to_string()))?;
            let v = proof::validate_triangle_dag(&f, &dag, &split);
            (dag.to_json(), dag.len(), v)
        }
        AnyProof::Rlin(p) => {
            let dag = proof::resplus_to_affine_dag(p).map_err(|e| CliError::Assertion(e.to_string()))?;
            let v = dag.validate(&f);
            (dag.to_json(), dag.len(), v)
        }
    };
    let dag: serde_json::Value = serde_json::from_str(&dag_json).map_err(failed)?;
    let valid = validity.is_ok();
    ctx.write_json(
        &name,
        json!({ "valid": valid, "error": validity.as_ref().err().map(|e| e.to_string()), "dag": dag }),
    )?;
    println!("nodes = {nodes}");
    println!("valid = {valid}");
    validity.map_err(|e| CliError::Assertion(e.to_string()))
}

fn load_protocol(ctx: &mut Ctx, a: &ProtocolArgs, l: &Loaded) -> Result<ProtocolTree, CliError> {
    let dom = bottleneck::Domain::new(l.g.n(), l.g.k()).map_err(config_err)?;
    let t = if let Some(path) = ctx.path("protocol", a.protocol.clone())? {
        let text = std::fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let v: serde_json::Value = serde_json::from_str(&text).map_err(config_err)?;
        ProtocolTree::from_json(&v).map_err(config_err)?
    } else {
        let kind = ctx.get("kind", a.kind.clone(), "baseline".to_string())?;
        match kind.as_str() {
            "baseline" => {
                let x = ctx.get("a", a.a, 0)?;
                let y = ctx.get("b", a.b, 1)?;
                ProtocolTree::baseline(dom, x, y).map_err(config_err)?
            }
            "constant" => {
                let x = ctx.get("a", a.a, 0)?;
                let y = ctx.get("b", a.b, 1)?;
                ProtocolTree::constant(dom, [VertexId::new(x, 0), VertexId::new(y, 0)]).map_err(config_err)?
            }
            "random" => {
                let depth = ctx.get("depth", a.depth, 6)?;
                let seed = ctx.get("protocol_seed", a.protocol_seed, 0)?;
                ProtocolTree::random_coordinate(dom, depth, seed).map_err(config_err)?
            }
            other => return Err(config_err(format!("unknown protocol kind `{other}`"))),
        }
    };
    if t.dom.n != l.g.n() || t.dom.k != l.g.k() {
        return Err(config_err("protocol and graph disagree on n or k"));
    }
    if let Some(path) = &a.save_protocol {
        let text = serde_json::to_string_pretty(&t.to_json()).map_err(failed)? + "\n";
        ctx.write_extra(path, &text)?;
    }
    Ok(t)
}

fn comm_check(ctx: &mut Ctx, a: ProtocolArgs) -> Result<(), CliError> {
    let l = load_graph(ctx, a.graph.clone(), (16, 3, 0.5))?;
    let gamma = ctx.get("gamma", a.gamma, 0.9)?;
    let budget = ctx.get("free_budget", a.free_budget, comm::DEFAULT_FREE_BUDGET)?;
    let t = load_protocol(ctx, &a, &l)?;
    let audit = t.audit(comm::DEFAULT_PAIR_BUDGET).map_err(config_err)?;
    let m = t.dom.k * t.dom.h;
    let mut leaves = Vec::new();
    let mut subcube = 0;
    for v in t.leaves() {
        let node = &t.nodes()[v];
        if node.xs.count() == 0 || node.ys.count() == 0 {
            continue;
        }
        let rep = subcube_like_check(&node.xs, &node.ys, m, gamma, budget).map_err(config_err)?;
        subcube += usize::from(rep.subcube_like);
        leaves.push(json!({ "leaf": v, "depth": node.depth, "spread": rep }));
    }
    ctx.write_json(
        &format!("comm_check_n{}_k{}.json", t.dom.n, t.dom.k),
        json!({ "nodes": t.len(), "cost": t.cost(), "audit": audit, "subcube_like_leaves": subcube, "leaves": leaves }),
    )?;
    println!("audit_ok = {}", audit.ok());
    println!("subcube_like = {subcube} of {}", leaves.len());
    if audit.ok() {
        Ok(())
    } else {
        Err(CliError::Assertion("cached rectangles disagree with the protocol".into()))
    }
}

fn comm_error(ctx: &mut Ctx, a: ProtocolArgs, trials: Option<u64>) -> Result<(), CliError> {
    let l = load_graph(ctx, a.graph.clone(), (16, 3, 0.5))?;
    let trials = ctx.get("trials", trials, 100_000)?;
    let t = load_protocol(ctx, &a, &l)?;
    let sampled = distributional_error(&t, &l.g, ErrorMode::Sampled { trials, seed: l.seed }).map_err(config_err)?;
    let exact = match distributional_error(&t, &l.g, ErrorMode::Exhaustive { budget: comm::DEFAULT_PAIR_BUDGET }) {
        Ok(e) => Some(e),
        Err(comm::CommError::TooLarge { .. }) => None,
        Err(e) => return Err(config_err(e)),
    };
    let row = |id: &str, e: &comm::ErrorEstimate, reference: f64| CsvRow {
        experiment_id: id.into(),
        n: t.dom.n,
        k: t.dom.k,
        p: l.p,
        params: Vec::new(),
        empirical_value: e.error,
        reference_bound: reference,
        trials: e.trials,
        seed: l.seed,
    };
    let reference = exact.map_or(f64::NAN, |e| e.error);
    let mut rows = vec![row("comm_error_sampled", &sampled, reference).param("se", sampled.se)];
    if let Some(e) = &exact {
        rows.push(row("comm_error_exhaustive", e, e.error).param("se", 0.0));
    }
    ctx.write_csv(&format!("comm_error_n{}_k{}_seed{}.csv", t.dom.n, t.dom.k, l.seed), &rows)?;
    println!("sampled = {} (se {})", sampled.error, sampled.se);
    if let Some(e) = exact {
        println!("exhaustive = {}", e.error);
        // a zero standard error means every sample agreed
        let tol = 3.0 * sampled.se.max(1.0 / trials as f64);
        if (sampled.error - e.error).abs() > tol {
            return Err(CliError::Assertion("sampled error is more than 3 sigma from the exhaustive value".into()));
        }
    }
    Ok(())
}

fn comm_census(ctx: &mut Ctx, a: ProtocolArgs, s: Option<usize>) -> Result<(), CliError> {
    let l = load_graph(ctx, a.graph.clone(), (16, 3, 0.5))?;
    let gamma = ctx.get("gamma", a.gamma, 0.9)?;
    let budget = ctx.get("free_budget", a.free_budget, comm::DEFAULT_FREE_BUDGET)?;
    let s = match ctx.opt("s", s)? {
        Some(s) => s,
        None => {
            let s = density::min_almost_complete(&l.g).map_err(config_err)?.s_star;
            ctx.note("s", s);
            s
        }
    };
    let t = load_protocol(ctx, &a, &l)?;
    let census = leaf_census(&t, &l.g, s, gamma, budget).map_err(config_err)?;
    ctx.write_csv(
        &format!("comm_census_n{}_k{}_seed{}.csv", t.dom.n, t.dom.k, l.seed),
        &census.rows(t.dom.n, t.dom.k, l.p, l.seed),
    )?;
    let (safe, dangerous) = (census.safe_check(), census.dangerous_check());
    println!("bound = {}", census.bound);
    println!("safe: checked {} violations {} max_p {}", safe.checked, safe.violations, safe.max_p);
    println!(
        "dangerous: checked {} violations {} max_p {}",
        dangerous.checked, dangerous.violations, dangerous.max_p
    );
    if dangerous.violations == 0 {
        Ok(())
    } else {
        Err(CliError::Assertion(format!(
            "{} subcube-like leaves with an unfixed output block exceed s|Σ|^-γ",
            dangerous.violations
        )))
    }
}
