use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use serde::Serialize;
use serde_json::{json, Map, Value};

use bippr_core::bench::{run_benchmark, BenchSpec, PairMode};
use bippr_core::bippr::{
    default_r_max, delta_from_pagerank, estimate_ppr, estimate_ppr_balanced, monte_carlo_ppr,
    PprParams,
};
use bippr_core::graph::{load_edge_list, Graph, NodeId};
use bippr_core::localpush::{forward_push, reverse_push, BalanceClock};
use bippr_core::mstp::{
    estimate_heat_kernel, estimate_mstp, estimate_truncated_hitting, HeatKernelParams, MstpParams,
    ScoreMultiplier,
};
use bippr_core::oracle::{exact_global_pagerank, exact_heat_kernel, exact_mstp, exact_ppr};
use bippr_core::pathsample::{precompute_path_samplers, sample_paths};
use bippr_core::record::{to_value, RunRecord};
use bippr_core::sampling::{walk_rng, Source, WalkConfig};
use bippr_core::search::{
    adaptive_r_max, build_forward_vector, rank, refine, sample_targets, score_targets_direct,
    score_targets_grouped, storage_accounting, KeywordIndex, SearchIndex,
};
use bippr_core::shardsim::{
    build_shared_walk_vectors, fit_storage_constants, load_sharded, storage_report, BrokerQuery,
    Sharding, SharingParams, StorageModel,
};
use bippr_core::synth::{synthetic_edge_list, SynthKind};
use bippr_core::ubippr::{estimate_ppr_undirected, natural_delta};
use rand::seq::index::sample as sample_indices;

use crate::output::Output;
use crate::{
    BenchArgs, Cli, Command, Common, Direction, EstimateArgs, GenArgs, HeatKernelArgs, KindArg,
    ModeArg, MstpArgs, OracleArgs, OracleKind, PrecomputeArgs, PrecomputeSearchArgs, PushArgs,
    SamplePathArgs, SearchArgs, SearchMethod, ServeSimArgs, SourceArgs, Usage,
};

const SNAPSHOT_MAGIC: &[u8] = b"BPGR";
const LABELS_FILE: &str = "labels.txt";

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

struct Ctx {
    common: Common,
    out: Output,
}

impl Ctx {
    fn graph(&self) -> Result<Graph> {
        let path = self
            .common
            .graph
            .as_deref()
            .ok_or_else(|| usage("--graph is required"))?;
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        let g = if bytes.starts_with(SNAPSHOT_MAGIC) {
            Graph::from_snapshot_bytes(&bytes)?
        } else {
            load_edge_list(path, self.common.undirected)?
        };
        Ok(g.apply_sink_convention())
    }

    /// Common flags, then the subcommand's arguments, then resolved values.
    fn header(&mut self, command: &str, args: &impl Serialize, resolved: Value) -> Result<()> {
        let mut config = Map::new();
        for part in [to_value(&self.common), to_value(args), resolved] {
            if let Value::Object(map) = part {
                config.extend(map);
            }
        }
        self.out.header(command, &config)
    }

    fn record(&self, command: &str) -> RunRecord {
        let mut r = RunRecord::new(command);
        r.graph = self.common.graph.as_ref().map(|p| p.display().to_string());
        r.seed = Some(self.common.seed);
        r.parameters
            .insert("alpha".into(), json!(self.common.alpha));
        r
    }
}

fn node(g: &Graph, label: &str) -> Result<NodeId> {
    Ok(g.resolve(label)?)
}

fn source(g: &Graph, args: &SourceArgs) -> Result<Source> {
    if let Some(label) = &args.source {
        return Ok(Source::Node(node(g, label)?));
    }
    let path = args
        .source_file
        .as_deref()
        .ok_or_else(|| usage("--source or --source-file is required"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut weights = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(v), Some(w), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(anyhow!(bippr_core::Error::Parse {
                line: i + 1,
                msg: "expected \"node weight\"".into()
            }));
        };
        let w: f64 = w.parse().map_err(|_| bippr_core::Error::Parse {
            line: i + 1,
            msg: format!("bad weight {w:?}"),
        })?;
        weights.push((node(g, v)?, w));
    }
    Ok(Source::distribution(&weights)?)
}

fn default_delta(g: &Graph, delta: Option<f64>) -> f64 {
    delta.unwrap_or(4.0 / g.n() as f64)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.common.threads {
        if threads == 0 {
            return Err(usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    let out = Output::open(cli.common.output.as_deref())?;
    let mut ctx = Ctx {
        common: cli.common,
        out,
    };
    match &cli.command {
        Command::Oracle(a) => oracle(&mut ctx, a)?,
        Command::Push(a) => push(&mut ctx, a)?,
        Command::Estimate(a) => estimate(&mut ctx, a)?,
        Command::EstimateMstp(a) => estimate_mstp_cmd(&mut ctx, a)?,
        Command::HeatKernel(a) => heat_kernel(&mut ctx, a)?,
        Command::Search(a) => search(&mut ctx, a)?,
        Command::PrecomputeSearch(a) => precompute_search(&mut ctx, a)?,
        Command::SamplePath(a) => sample_path(&mut ctx, a)?,
        Command::Precompute(a) => precompute(&mut ctx, a)?,
        Command::ServeSim(a) => serve_sim(&mut ctx, a)?,
        Command::Bench(a) => bench(&mut ctx, a)?,
        Command::Gen(a) => gen(&mut ctx, a)?,
    }
    ctx.out.finish()
}

fn oracle(ctx: &mut Ctx, a: &OracleArgs) -> Result<()> {
    let g = ctx.graph()?;
    let src = source(&g, &a.source)?;
    let values = match a.kind {
        OracleKind::Ppr => exact_ppr(&g, &src, ctx.common.alpha, a.tol)?,
        OracleKind::Mstp => exact_mstp(&g, &src, a.ell)?,
        OracleKind::HeatKernel => {
            let hk = HeatKernelParams::new(a.t)?;
            exact_heat_kernel(&g, &src, hk.t_param, hk.ell_max)?
        }
    };
    ctx.header("oracle", a, json!({ "n": g.n(), "m": g.m() }))?;
    for (v, x) in values.values.iter().enumerate() {
        ctx.out.line(&format!("{} {x:e}", g.label(v)))?;
    }
    Ok(())
}

fn push(ctx: &mut Ctx, a: &PushArgs) -> Result<()> {
    let g = ctx.graph()?;
    let v = node(&g, &a.node)?;
    let result = match a.direction {
        Direction::Reverse => reverse_push(&g, v, a.rmax, ctx.common.alpha)?,
        Direction::Forward => forward_push(&g, v, a.rmax, ctx.common.alpha)?,
    };
    ctx.header("push", a, json!({ "n": g.n(), "m": g.m() }))?;
    let mut touched: Vec<NodeId> = result
        .estimates
        .iter()
        .chain(result.residuals.iter())
        .map(|(u, _)| u)
        .collect();
    touched.sort_unstable();
    touched.dedup();
    for u in touched {
        ctx.out.line(&format!(
            "{} {:e} {:e}",
            g.label(u),
            result.estimates.get(u),
            result.residuals.get(u)
        ))?;
    }
    ctx.out.line(&format!(
        "# pushes {} work_units {} achieved_rmax {:e}",
        result.pushes, result.work_units, result.achieved_rmax
    ))
}

fn estimate(ctx: &mut Ctx, a: &EstimateArgs) -> Result<()> {
    let g = ctx.graph()?;
    let src = source(&g, &a.source)?;
    let t = node(&g, &a.target)?;
    let alpha = ctx.common.alpha;
    let delta = if a.delta_from_pagerank {
        delta_from_pagerank(&exact_global_pagerank(&g, alpha)?, t)
    } else if a.undirected_variant {
        a.delta.unwrap_or_else(|| natural_delta(&g, t))
    } else {
        default_delta(&g, a.delta)
    };
    let mut params = PprParams::new(alpha, delta)
        .with_epsilon(a.eps)
        .with_p_fail(a.pfail)
        .with_c(a.c);
    if a.strict {
        params = params.strict();
    }
    if let Some(r) = a.rmax {
        params = params.with_r_max(r);
    }
    params.validate()?;
    let method = if a.monte_carlo.is_some() {
        "monte-carlo"
    } else if a.balanced {
        "balanced"
    } else if a.undirected_variant {
        "undirected"
    } else {
        "bidirectional"
    };
    let r_max = match (a.balanced, a.undirected_variant) {
        (true, _) => Value::Null,
        (_, true) => json!(params.r_max),
        _ => json!(params.r_max.unwrap_or_else(|| default_r_max(&g, &params))),
    };
    ctx.header(
        "estimate",
        a,
        json!({ "method": method, "delta": delta, "c": params.c, "r_max": r_max }),
    )?;

    let start = Instant::now();
    let seed = ctx.common.seed;
    let mut rec = ctx
        .record("estimate")
        .param("method", method)
        .param("delta", delta)
        .param("c", params.c);
    if let Some(walks) = a.monte_carlo {
        let e = monte_carlo_ppr(&g, &src, t, walks, alpha, seed)?;
        rec = rec.counter("walks", e.walks_used);
        rec.estimates = json!({ "estimate": e.value });
    } else if a.undirected_variant {
        let Source::Node(s) = src else {
            return Err(usage("--undirected-variant needs a single --source node"));
        };
        let e = estimate_ppr_undirected(&g, s, t, &params, seed)?;
        rec = rec
            .param("r_max", e.r_max_used)
            .counter("walks", e.walks_used)
            .counter("pushes", e.forward_pushes);
        rec.estimates = json!({ "estimate": e.value });
    } else {
        let e = if a.balanced {
            let clock = BalanceClock::Logical {
                walk_time_constant: a.walk_time_constant,
            };
            estimate_ppr_balanced(&g, &src, t, &params, clock, seed)?
        } else {
            estimate_ppr(&g, &src, t, &params, seed)?
        };
        if !e.precondition_holds {
            log::warn!(
                "r_max = {:.3e} is below the level needed for the accuracy guarantee; use --strict or a larger --c",
                e.r_max_used
            );
        }
        rec = rec
            .param("r_max", e.r_max_used)
            .param("precondition_holds", e.precondition_holds)
            .counter("walks", e.walks_used)
            .counter("pushes", e.reverse_pushes)
            .counter("work_units", e.reverse_work_units);
        rec.estimates = json!({ "estimate": e.value });
    }
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    ctx.out.record(&rec)
}

fn mstp_params(g: &Graph, a: &MstpArgs) -> MstpParams {
    let mut p = MstpParams::new(a.ell_max, default_delta(g, a.delta)).with_c(a.c);
    p.epsilon = a.eps;
    p.p_fail = a.pfail;
    if a.strict {
        p = p.strict();
    }
    if let Some(e) = a.epsr {
        p = p.with_eps_r(e);
    }
    if a.literal_multiplier {
        p.multiplier = ScoreMultiplier::Literal;
    }
    p
}

fn estimate_mstp_cmd(ctx: &mut Ctx, a: &MstpArgs) -> Result<()> {
    let g = ctx.graph()?;
    let src = source(&g, &a.source)?;
    let t = node(&g, &a.target)?;
    let params = mstp_params(&g, a);
    params.validate()?;
    ctx.header(
        "estimate-mstp",
        a,
        json!({ "delta": params.delta, "c": params.c, "eps_r": params.resolved_eps_r(), "paths": params.num_paths() }),
    )?;
    let start = Instant::now();
    let est = if a.hitting {
        estimate_truncated_hitting(&g, &src, t, &params, ctx.common.seed)?
    } else {
        estimate_mstp(&g, &src, t, &params, ctx.common.seed)?
    };
    let secs = start.elapsed().as_secs_f64();
    for ell in 1..=params.ell_max {
        let mut rec = ctx
            .record("estimate-mstp")
            .param("ell", ell)
            .param("delta", params.delta)
            .param("eps_r", est.eps_r_used)
            .counter("paths", est.paths_used)
            .counter("pushes", est.reverse_pushes);
        rec.estimates = json!({ "estimate": est.at(ell) });
        rec.wall_time_secs = secs;
        ctx.out.record(&rec)?;
    }
    Ok(())
}

fn heat_kernel(ctx: &mut Ctx, a: &HeatKernelArgs) -> Result<()> {
    let g = ctx.graph()?;
    let src = source(&g, &a.source)?;
    let t = node(&g, &a.target)?;
    let hk = match a.ell_max {
        Some(l) => HeatKernelParams::with_ell_max(a.t, l)?,
        None => HeatKernelParams::new(a.t)?,
    };
    let mut params = MstpParams::new(hk.ell_max, default_delta(&g, a.delta)).with_c(a.c);
    if let Some(e) = a.epsr {
        params = params.with_eps_r(e);
    }
    params.validate()?;
    ctx.header(
        "heat-kernel",
        a,
        json!({ "ell_max": hk.ell_max, "delta": params.delta, "eps_r": params.resolved_eps_r(), "tail_mass": hk.tail_mass() }),
    )?;
    let start = Instant::now();
    let est = estimate_heat_kernel(&g, &src, t, &hk, &params, ctx.common.seed)?;
    let mut rec = ctx
        .record("heat-kernel")
        .param("t", hk.t_param)
        .param("ell_max", hk.ell_max)
        .param("delta", params.delta)
        .counter("paths", est.mstp.paths_used)
        .counter("pushes", est.mstp.reverse_pushes);
    rec.estimates = json!({ "estimate": est.value, "tail_bound": est.tail_bound });
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    ctx.out.record(&rec)
}

fn search(ctx: &mut Ctx, a: &SearchArgs) -> Result<()> {
    let g = ctx.graph()?;
    let index =
        SearchIndex::load(&a.index).with_context(|| format!("loading {}", a.index.display()))?;
    if index.n != g.n() || index.m != g.m() {
        return Err(anyhow!(bippr_core::Error::Format(format!(
            "index was built for a graph with n = {}, m = {}; this graph has n = {}, m = {}",
            index.n,
            index.m,
            g.n(),
            g.m()
        ))));
    }
    let entry = index.entry(&a.keyword)?;
    let s = node(&g, &a.source)?;
    if a.topk == 0 {
        return Err(usage("--topk must be at least 1"));
    }
    ctx.header(
        "search",
        a,
        json!({ "r_max": entry.r_max, "targets": entry.vectors.len() }),
    )?;
    let start = Instant::now();
    let cfg = WalkConfig::new(ctx.common.alpha, ctx.common.seed)?;
    let x = build_forward_vector(&g, &Source::Node(s), a.walks, &cfg)?;
    let mut rec = ctx
        .record("search")
        .param("keyword", &a.keyword)
        .param("method", a.method)
        .param("r_max", entry.r_max);
    let ranked: Vec<Value> = match a.method {
        SearchMethod::Direct | SearchMethod::Grouped => {
            let scores = match a.method {
                SearchMethod::Direct => score_targets_direct(&x, &entry.vectors),
                _ => score_targets_grouped(&x, &entry.grouped()),
            };
            scores
                .iter()
                .take(a.topk)
                .map(|&(t, v)| json!({ "node": g.label(t), "score": v }))
                .collect()
        }
        SearchMethod::Sampling => {
            let out = sample_targets(&x, &entry.sampler()?, a.nsamples, ctx.common.seed)?;
            rec = rec.counter("samples", out.samples);
            if a.refine {
                refine(&x, &entry.vectors, &out, a.topk)
                    .iter()
                    .map(|&(t, v)| json!({ "node": g.label(t), "score": v }))
                    .collect()
            } else {
                let scale = out.total_weight / out.samples as f64;
                rank(out.ranked.clone())
                    .iter()
                    .take(a.topk)
                    .map(|&(t, c)| json!({ "node": g.label(t), "count": c, "score": c as f64 * scale }))
                    .collect()
            }
        }
    };
    rec = rec.counter("walks", a.walks);
    rec.estimates = Value::Array(ranked);
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    ctx.out.record(&rec)
}

fn precompute_search(ctx: &mut Ctx, a: &PrecomputeSearchArgs) -> Result<()> {
    let g = ctx.graph()?;
    let keywords = KeywordIndex::load(&a.keywords, &g)?;
    if keywords.is_empty() {
        return Err(anyhow!(bippr_core::Error::Format(
            "keyword file lists no keywords".into()
        )));
    }
    let alpha = ctx.common.alpha;
    let pagerank = if a.adaptive {
        Some(exact_global_pagerank(&g, alpha)?)
    } else {
        None
    };
    ctx.header(
        "precompute-search",
        a,
        json!({ "keywords": keywords.len(), "gamma": keywords.gamma() }),
    )?;
    let start = Instant::now();
    let index = SearchIndex::build(&g, &keywords, alpha, |_, targets| {
        match (&pagerank, a.rmax) {
            (Some(pr), _) => adaptive_r_max(targets, pr, a.walks, a.k, a.beta, a.c),
            (None, Some(r)) => Ok(r),
            (None, None) => Err(bippr_core::Error::InvalidParameter(
                "either --rmax or --adaptive is required".into(),
            )),
        }
    })?;
    index.save(&a.index)?;
    let report = storage_accounting(&index);
    let mut rec = ctx
        .record("precompute-search")
        .counter(
            "pushes",
            index.entries.iter().map(|e| e.pushes).sum::<usize>(),
        )
        .counter(
            "work_units",
            index.entries.iter().map(|e| e.work_units).sum::<u64>(),
        )
        .counter("stored_entries", report.total);
    rec.estimates = json!({
        "per_keyword": index.entries.iter().map(|e| json!({ "keyword": e.keyword, "r_max": e.r_max, "targets": e.vectors.len(), "entries": e.storage() })).collect::<Vec<_>>(),
        "storage": report,
    });
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    ctx.out.record(&rec)
}

fn parse_targets(g: &Graph, spec: &str) -> Result<Vec<NodeId>> {
    let text = if Path::new(spec).is_file() {
        fs::read_to_string(spec)?
    } else {
        spec.replace(',', " ")
    };
    let mut targets: Vec<NodeId> = text
        .split_whitespace()
        .map(|l| node(g, l))
        .collect::<Result<_>>()?;
    if targets.is_empty() {
        return Err(usage("--targets lists no nodes"));
    }
    targets.sort_unstable();
    targets.dedup();
    Ok(targets)
}

fn sample_path(ctx: &mut Ctx, a: &SamplePathArgs) -> Result<()> {
    let g = ctx.graph()?;
    let s = node(&g, &a.source)?;
    let targets = parse_targets(&g, &a.targets)?;
    ctx.header("sample-path", a, json!({ "target_count": targets.len() }))?;
    let state = precompute_path_samplers(&g, &targets, a.epsr, ctx.common.alpha)?;
    let paths = sample_paths(&g, s, &state, a.count, a.cap, ctx.common.seed)?;
    for p in &paths {
        let labels: Vec<&str> = p.path.iter().map(|&v| g.label(v)).collect();
        ctx.out.line(&labels.join(" "))?;
    }
    let attempts: usize = paths.iter().map(|p| p.attempts).sum();
    ctx.out.line(&format!(
        "# pushes {} snapshots {} mean_attempts {:.4}",
        state.pushes,
        state.snapshot_count(),
        attempts as f64 / paths.len().max(1) as f64
    ))
}

fn precompute(ctx: &mut Ctx, a: &PrecomputeArgs) -> Result<()> {
    let g = ctx.graph()?;
    let alpha = ctx.common.alpha;
    let delta = default_delta(&g, a.delta);
    if a.shards == 0 {
        return Err(usage("--shards must be at least 1"));
    }
    let (c2, c3) = match (a.c2, a.c3) {
        (Some(c2), Some(c3)) => (c2, c3),
        (c2, c3) => {
            let mut rng = walk_rng(ctx.common.seed, u64::MAX);
            let count = a.fit_nodes.clamp(1, g.n());
            let nodes: Vec<NodeId> = sample_indices(&mut rng, g.n(), count).into_vec();
            let (f2, f3) = fit_storage_constants(
                &g,
                alpha,
                &nodes,
                &[0.1, 0.05, 0.02, 0.01],
                &[0.1, 0.05, 0.02, 0.01],
                a.dmax,
            )?;
            (c2.unwrap_or(f2), c3.unwrap_or(f3))
        }
    };
    let params = SharingParams::balanced(alpha, delta, a.dmax, a.c1, c2, c3)?;
    ctx.header("precompute", a, to_value(params))?;
    let start = Instant::now();
    let store = build_shared_walk_vectors(&g, &params, ctx.common.seed)?;
    fs::create_dir_all(&a.out)?;
    store.save_sharded(&a.out, &Sharding::modulo(a.shards)?)?;
    fs::write(a.out.join(LABELS_FILE), g.labels().join("\n") + "\n")?;
    let model = StorageModel {
        n: g.n() as f64,
        c1: a.c1,
        c2,
        c3,
        delta,
    };
    let report = storage_report(&store, &model);
    let mut rec = ctx
        .record("precompute")
        .param("delta", delta)
        .param("shards", a.shards)
        .counter("stored_entries", report.measured_total);
    rec.estimates = json!({ "storage": report, "model_optimum": model.shared_optimum() });
    rec.wall_time_secs = start.elapsed().as_secs_f64();
    ctx.out.record(&rec)
}

fn parse_query(text: &str) -> Option<(String, String)> {
    let parts: Vec<&str> = text
        .split([',', ' ', '\t'])
        .filter(|p| !p.is_empty())
        .collect();
    match parts.as_slice() {
        [s, t] => Some((s.to_string(), t.to_string())),
        _ => None,
    }
}

fn serve_sim(ctx: &mut Ctx, a: &ServeSimArgs) -> Result<()> {
    let mut raw: Vec<String> = a.query.clone();
    if let Some(path) = &a.queries {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        raw.extend(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(String::from),
        );
    }
    if raw.is_empty() {
        return Err(usage("give at least one --query s,t or a --queries file"));
    }
    let graph = if ctx.common.graph.is_some() {
        Some(ctx.graph()?)
    } else {
        None
    };
    let (manifest, broker) =
        load_sharded(&a.dir).with_context(|| format!("loading shards from {}", a.dir.display()))?;
    if let Some(g) = &graph {
        if g.n() != manifest.n {
            return Err(anyhow!(bippr_core::Error::Format(format!(
                "shards were built for n = {}, graph has n = {}",
                manifest.n,
                g.n()
            ))));
        }
    }
    let labels: Option<HashMap<String, NodeId>> = match &graph {
        Some(_) => None,
        None => match fs::read_to_string(a.dir.join(LABELS_FILE)) {
            Ok(text) => Some(
                text.lines()
                    .enumerate()
                    .map(|(i, l)| (l.to_string(), i))
                    .collect(),
            ),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
            Err(e) => return Err(e.into()),
        },
    };
    let resolve = |label: &str| -> Result<NodeId> {
        if let Some(g) = &graph {
            return node(g, label);
        }
        if let Some(map) = &labels {
            return map
                .get(label)
                .copied()
                .ok_or_else(|| anyhow!(bippr_core::Error::UnknownNode(label.to_string())));
        }
        label.parse::<NodeId>().map_err(|_| {
            usage(format!(
                "node {label:?} is not an id; pass --graph to use labels"
            ))
        })
    };
    ctx.header(
        "serve-sim",
        a,
        json!({ "n": manifest.n, "shards": manifest.k }),
    )?;
    for q in raw {
        let (s, t) =
            parse_query(&q).ok_or_else(|| usage(format!("bad query {q:?}; expected s,t")))?;
        let start = Instant::now();
        let ans = broker.estimate(BrokerQuery {
            s: resolve(&s)?,
            t: resolve(&t)?,
        })?;
        let mut rec = ctx
            .record("serve-sim")
            .param("source", &s)
            .param("target", &t)
            .counter("shards", ans.partials.len());
        rec.estimates = json!({ "estimate": ans.estimate, "partials": ans.partials });
        rec.wall_time_secs = start.elapsed().as_secs_f64();
        ctx.out.record(&rec)?;
    }
    Ok(())
}

fn bench(ctx: &mut Ctx, a: &BenchArgs) -> Result<()> {
    let g = ctx.graph()?;
    let mode = match a.mode {
        ModeArg::Uniform => PairMode::Uniform,
        ModeArg::Pagerank => PairMode::PageRank,
    };
    let mut spec = BenchSpec::new(mode, a.pairs, ctx.common.alpha, default_delta(&g, a.delta));
    spec.c = a.c;
    spec.mc_c = a.mc_c;
    spec.seed = ctx.common.seed;
    spec.oracle_max_n = a.oracle_max_n;
    ctx.header("bench", a, to_value(&spec))?;
    let start = Instant::now();
    let report = run_benchmark(&g, &spec)?;
    for row in &report.rows {
        let mut rec = ctx
            .record("bench")
            .param("mode", a.mode)
            .param("delta", spec.delta)
            .counter("pairs", row.pairs)
            .counter("significant_pairs", row.significant_pairs);
        rec.estimates = to_value(row);
        rec.wall_time_secs = row.mean_secs * row.pairs as f64;
        ctx.out.record(&rec)?;
    }
    if let [bi, mc] = report.rows.as_slice() {
        let mut rec = ctx
            .record("bench-summary")
            .param("mode", a.mode)
            .counter("pairs", bi.pairs);
        rec.estimates = json!({
            "speedup_mean": mc.mean_secs / bi.mean_secs,
            "speedup_median": mc.median_secs / bi.median_secs,
            "bidirectional_mre": bi.mean_relative_error,
            "monte_carlo_mre": mc.mean_relative_error,
        });
        rec.wall_time_secs = start.elapsed().as_secs_f64();
        ctx.out.record(&rec)?;
    }
    Ok(())
}

fn gen(ctx: &mut Ctx, a: &GenArgs) -> Result<()> {
    let kind = match a.kind {
        KindArg::Cycle => SynthKind::Cycle,
        KindArg::Star => SynthKind::Star,
        KindArg::Grid => SynthKind::Grid,
        KindArg::PowerLaw => SynthKind::PowerLaw,
    };
    let text = synthetic_edge_list(kind, a.n, ctx.common.seed)?;
    ctx.header("gen", a, Value::Null)?;
    ctx.out.line(text.trim_end())
}
