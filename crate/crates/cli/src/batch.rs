use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_traits::ToPrimitive;
use serde_json::{json, Value};

use polyval::exec::map_indexed;
use polyval::gen::{instance_seed, random_game, GameSpace, GenConfig, WeightSpec, GENERATOR_ID};
use polyval::harness::{check_game, CheckOptions, Verdict};
use polyval::json::{game_to_value, rational_to_json};
use polyval::monitor::{step_bound, MonitorMode};
use polyval::{
    decide_mean_payoff, parse_game, serialize_game, solve_discounted, solve_energy, DiscountedOptions, EnergyOptions,
    GameKind, GameSpec, SolveError,
};

use crate::io::{dump_trace, json_line, read_input, write_output};
use crate::solve::load_game;
use crate::{parse_rational, BenchArgs, Failure, FaultArg, GenArgs, KindArg, SolverFlags, SourceArgs, StatsArgs, VerifyArgs};

/// Upper limit on the number of games an exhaustive source may produce.
const EXHAUSTIVE_CAP: u128 = 1 << 32;

struct Instance {
    name: String,
    seed: Option<u64>,
    spec: GameSpec,
}

enum Items {
    Files(Vec<(String, GameSpec)>),
    Random { base: GenConfig, n_min: usize, count: u64, total: u64 },
    Exhaustive { spaces: Vec<GameSpace>, total: u64 },
}

struct Batch {
    items: Items,
}

impl Batch {
    fn len(&self) -> u64 {
        match &self.items {
            Items::Files(f) => f.len() as u64,
            Items::Random { total, .. } | Items::Exhaustive { total, .. } => *total,
        }
    }

    fn get(&self, i: u64) -> Instance {
        match &self.items {
            Items::Files(f) => {
                let (name, spec) = &f[i as usize];
                Instance { name: name.clone(), seed: None, spec: spec.clone() }
            }
            Items::Random { base, n_min, count, .. } => {
                let seed = instance_seed(base.seed, i);
                let cfg = GenConfig { n: n_min + (i / count) as usize, seed, ..base.clone() };
                let spec = random_game(&cfg).expect("config validated when the batch was built");
                Instance { name: format!("r{i:06}"), seed: Some(seed), spec }
            }
            Items::Exhaustive { spaces, .. } => {
                let mut rest = i as u128;
                for s in spaces {
                    if rest < s.len() {
                        return Instance { name: format!("x{}-{rest}", s.n), seed: None, spec: s.game(rest) };
                    }
                    rest -= s.len();
                }
                unreachable!("index {i} past the end of the batch")
            }
        }
    }
}

fn kind_of(src: &SourceArgs) -> GameKind {
    match src.kind {
        KindArg::Discounted => GameKind::Discounted { lambda: src.lambda.clone() },
        KindArg::Energy => GameKind::Energy,
        KindArg::Mpd => GameKind::MeanPayoffDecision { threshold: src.threshold.clone() },
    }
}

fn weight_spec(src: &SourceArgs) -> Result<WeightSpec, Failure> {
    let w = src.weights.trim();
    if let Some((lo, hi)) = w.split_once("..") {
        let parse = |s: &str| s.trim().parse::<i64>().map_err(|e| Failure::Input(format!("--weights {w:?}: {e}")));
        return Ok(WeightSpec::Range { lo: parse(lo)?, hi: parse(hi)?, max_den: src.max_den });
    }
    let list = w.split(',').map(parse_rational).collect::<Result<Vec<_>, _>>().map_err(Failure::Input)?;
    Ok(WeightSpec::Set(list))
}

fn load_files(path: &str) -> Result<Vec<(String, GameSpec)>, Failure> {
    let p = Path::new(path);
    if !p.is_dir() {
        let bytes = read_input(path)?;
        if let Ok(spec) = parse_game(&bytes) {
            return Ok(vec![(path.to_string(), checked(spec, path)?)]);
        }
        // one game per line, as written by `gen --out -`
        let text = String::from_utf8_lossy(&bytes);
        let mut out = Vec::new();
        for (k, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let label = format!("{path}:{}", k + 1);
            let spec = parse_game(line.as_bytes()).map_err(|e| Failure::Input(format!("{label}: {e}")))?;
            out.push((label.clone(), checked(spec, &label)?));
        }
        return Ok(out);
    }
    let mut names: Vec<String> = fs::read_dir(p)
        .map_err(|e| Failure::Input(format!("{path}: {e}")))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".json") && n != "manifest.json")
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|n| {
            let full = p.join(&n);
            Ok((n, load_game(&full.to_string_lossy())?))
        })
        .collect()
}

fn checked(spec: GameSpec, label: &str) -> Result<GameSpec, Failure> {
    match spec.validate() {
        Ok(()) => Ok(spec),
        Err(v) => {
            let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            Err(Failure::Input(format!("{label}: {}", list.join("; "))))
        }
    }
}

fn build(src: &SourceArgs) -> Result<Batch, Failure> {
    if let Some(path) = &src.input {
        return Ok(Batch { items: Items::Files(load_files(path)?) });
    }
    if src.n_min == 0 || src.n_min > src.n_max {
        return Err(Failure::Input("need 1 <= --n-min <= --n-max".into()));
    }
    let kind = kind_of(src);
    let weights = weight_spec(src)?;
    if src.exhaustive {
        let WeightSpec::Set(list) = weights else {
            return Err(Failure::Input("--exhaustive needs a weight list, not a range".into()));
        };
        if src.bipartite || src.min_degree != 1 {
            return Err(Failure::Input("--exhaustive enumerates every game with out-degree 1..=max-degree".into()));
        }
        let mut spaces = Vec::new();
        let mut total: u128 = 0;
        for n in src.n_min..=src.n_max {
            let s = GameSpace::new(n, src.max_degree, list.clone(), kind.clone()).map_err(|e| Failure::Input(e.to_string()))?;
            total = total.saturating_add(s.len());
            if total > EXHAUSTIVE_CAP {
                return Err(Failure::Input(format!("exhaustive source exceeds {EXHAUSTIVE_CAP} games")));
            }
            spaces.push(s);
        }
        return Ok(Batch { items: Items::Exhaustive { spaces, total: total as u64 } });
    }
    let base = GenConfig {
        n: src.n_min,
        min_degree: src.min_degree,
        max_degree: src.max_degree,
        weights,
        kind,
        bipartite: src.bipartite,
        seed: src.seed,
    };
    for n in [src.n_min, src.n_max] {
        GenConfig { n, ..base.clone() }.validate().map_err(|e| Failure::Input(e.to_string()))?;
    }
    let per_n = (src.n_max - src.n_min + 1) as u64;
    let total = per_n
        .checked_mul(src.count)
        .ok_or_else(|| Failure::Input("--count too large".into()))?;
    Ok(Batch { items: Items::Random { base, n_min: src.n_min, count: src.count.max(1), total } })
}

fn source_json(src: &SourceArgs) -> Value {
    let mut m = serde_json::Map::new();
    m.insert("kind".into(), kind_of(src).tag().into());
    match src.kind {
        KindArg::Discounted => {
            m.insert("lambda".into(), rational_to_json(&src.lambda));
        }
        KindArg::Mpd => {
            m.insert("threshold".into(), rational_to_json(&src.threshold));
        }
        KindArg::Energy => {}
    }
    m.insert("n_min".into(), src.n_min.into());
    m.insert("n_max".into(), src.n_max.into());
    m.insert("min_degree".into(), src.min_degree.into());
    m.insert("max_degree".into(), src.max_degree.into());
    m.insert("weights".into(), src.weights.clone().into());
    m.insert("max_den".into(), src.max_den.into());
    m.insert("bipartite".into(), src.bipartite.into());
    m.insert("exhaustive".into(), src.exhaustive.into());
    if !src.exhaustive {
        m.insert("count".into(), src.count.into());
        m.insert("seed".into(), src.seed.into());
    }
    Value::Object(m)
}

pub fn generate(args: &GenArgs) -> Result<(), Failure> {
    let batch = build(&args.source)?;
    if args.out == "-" {
        let mut bytes = Vec::new();
        for i in 0..batch.len() {
            bytes.extend(serialize_game(&batch.get(i).spec));
            bytes.push(b'\n');
        }
        return write_output("-", &bytes);
    }
    let dir = Path::new(&args.out);
    fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let mut listing = Vec::new();
    for i in 0..batch.len() {
        let inst = batch.get(i);
        let file = format!("{}.json", inst.name);
        let mut bytes = serialize_game(&inst.spec);
        bytes.push(b'\n');
        write_output(&dir.join(&file).to_string_lossy(), &bytes)?;
        listing.push(json!({ "file": file, "n": inst.spec.nodes.len(), "seed": inst.seed }));
    }
    let manifest = json!({
        "generator": GENERATOR_ID,
        "source": source_json(&args.source),
        "instances": listing,
    });
    write_output(&dir.join("manifest.json").to_string_lossy(), &serde_json::to_vec_pretty(&manifest).expect("serializes"))
}

fn fault_of(f: Option<FaultArg>) -> polyval::discounted::Fault {
    match f {
        Some(FaultArg::Flip) => polyval::discounted::Fault::FlipComparison,
        None => polyval::discounted::Fault::None,
    }
}

pub fn verify(args: &VerifyArgs) -> Result<(), Failure> {
    let batch = build(&args.source)?;
    let strategies = args.realize.strategies();
    let opts = CheckOptions { monitor: args.monitor.on(), fault: fault_of(args.fault) };
    let verdicts: Vec<Verdict> = map_indexed(batch.len(), args.jobs, |i| check_game(&batch.get(i).spec, &strategies, &opts));
    let failed = verdicts.iter().filter(|v| !v.ok).count();
    let max_iterations = verdicts.iter().map(|v| v.iterations).max().unwrap_or(0);
    let max_margin = verdicts.iter().map(|v| v.margin()).fold(0.0, f64::max);
    let mut report = json!({
        "instances": verdicts.len(),
        "passed": verdicts.len() - failed,
        "failed": failed,
        "monitor": opts.monitor,
        "max_iterations": max_iterations,
        "max_margin": max_margin,
    });
    if !args.summary {
        let list: Vec<Value> = verdicts
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let mut row = json!({
                    "index": i,
                    "name": batch.get(i as u64).name,
                    "ok": v.ok,
                    "iterations": v.iterations,
                    "bound": v.bound.to_string(),
                    "margin": v.margin(),
                });
                if let Some(d) = &v.detail {
                    row["detail"] = d.clone().into();
                }
                row
            })
            .collect();
        report["verdicts"] = Value::Array(list);
    }
    write_output(&args.out, &json_line(&report))?;
    let Some(first) = verdicts.iter().position(|v| !v.ok) else {
        return Ok(());
    };
    let inst = batch.get(first as u64);
    let v = &verdicts[first];
    eprintln!("witness {}: {}", inst.name, String::from_utf8_lossy(&serialize_game(&inst.spec)));
    let doc = json!({
        "index": first,
        "name": inst.name,
        "seed": inst.seed,
        "detail": v.detail,
        "game": game_to_value(&inst.spec),
        "trace": v.trace,
    });
    let dumped = match dump_trace(&format!("verify-failure-{first}"), &doc) {
        Ok(p) => format!("witness written to {}", p.display()),
        Err(e) => format!("witness dump failed: {e}"),
    };
    Err(Failure::Mismatch(format!(
        "{failed} of {} instances failed; first is {} ({}); {dumped}",
        verdicts.len(),
        inst.name,
        v.detail.as_deref().unwrap_or("")
    )))
}

/// One solver run reduced to what the tables need.
struct Run {
    n: usize,
    iterations: usize,
    /// Node count and bipartiteness the step bound is taken over.
    bound_nodes: usize,
    bound: f64,
    micros: u128,
}

fn solve_one(spec: &GameSpec, flags: &SolverFlags) -> Result<Run, SolveError> {
    let monitor = flags.monitor.on();
    let fault = flags.fault();
    let start = Instant::now();
    let n = spec.nodes.len();
    let (iterations, bound_nodes, mode, bip) = match &spec.kind {
        GameKind::Discounted { .. } => {
            let o = DiscountedOptions { realize: flags.realize.strategies()[0], monitor, fault };
            let sol = solve_discounted(spec, &o)?;
            (sol.iterations, n, MonitorMode::Plain, spec.is_bipartite())
        }
        kind => {
            let o = EnergyOptions { integer_fast_path: flags.fast_int.on(), monitor, fault };
            let sol = match kind {
                GameKind::Energy => solve_energy(spec, &o)?,
                _ => decide_mean_payoff(spec, &o)?,
            };
            (sol.iterations, sol.reduced_nodes, MonitorMode::Strong, true)
        }
    };
    let micros = start.elapsed().as_micros();
    let bound = step_bound(bound_nodes, mode, bip).1.to_f64().unwrap_or(f64::INFINITY);
    Ok(Run { n, iterations, bound_nodes, bound, micros })
}

fn run_all(batch: &Batch, flags: &SolverFlags, jobs: usize) -> Result<Vec<(Instance, Run)>, Failure> {
    if flags.realize == crate::Realize::Both {
        return Err(Failure::Input("--realize both is only meaningful for verify".into()));
    }
    let results = map_indexed(batch.len(), jobs, |i| {
        let inst = batch.get(i);
        let run = solve_one(&inst.spec, flags);
        (inst, run)
    });
    let mut out = Vec::with_capacity(results.len());
    for (inst, run) in results {
        match run {
            Ok(r) => out.push((inst, r)),
            Err(SolveError::Input(m)) => return Err(Failure::Input(format!("{}: {m}", inst.name))),
            Err(SolveError::Internal { message, trace }) => {
                let doc = json!({ "name": inst.name, "message": message, "game": game_to_value(&inst.spec), "trace": trace });
                let path = dump_trace(&format!("polyval-trace-{}", inst.name), &doc)
                    .map(|p| p.display().to_string())
                    .unwrap_or_else(|e| format!("(dump failed: {e})"));
                return Err(Failure::Internal(format!("{}: internal assertion failed: {message}; trace written to {path}", inst.name)));
            }
        }
    }
    Ok(out)
}

fn ratio(r: &Run) -> f64 {
    r.iterations as f64 / r.bound
}

pub fn stats(args: &StatsArgs) -> Result<(), Failure> {
    let batch = build(&args.source)?;
    let runs = run_all(&batch, &args.flags, args.jobs)?;
    let mut csv = String::from("index,name,n,seed,iterations,bound_nodes,bound,ratio\n");
    for (i, (inst, r)) in runs.iter().enumerate() {
        let seed = inst.seed.map(|s| s.to_string()).unwrap_or_default();
        writeln!(csv, "{i},{},{},{seed},{},{},{},{:.6}", inst.name, r.n, r.iterations, r.bound_nodes, r.bound, ratio(r))
            .expect("writing to a String");
    }
    write_output(&args.out, csv.as_bytes())
}

pub fn bench(args: &BenchArgs) -> Result<(), Failure> {
    let batch = build(&args.source)?;
    let runs = run_all(&batch, &args.flags, args.jobs)?;
    let timing = args.timing.on();
    let mut by_n: BTreeMap<usize, Vec<&Run>> = BTreeMap::new();
    for (_, r) in &runs {
        by_n.entry(r.n).or_default().push(r);
    }
    let mut csv = String::from("kind,n,instances,mean_iterations,max_iterations,max_ratio");
    csv.push_str(if timing { ",total_ms,mean_us\n" } else { "\n" });
    let kind = runs.first().map_or(kind_of(&args.source).tag(), |(inst, _)| inst.spec.kind.tag());
    for (n, rs) in by_n {
        let total: usize = rs.iter().map(|r| r.iterations).sum();
        let max = rs.iter().map(|r| r.iterations).max().unwrap_or(0);
        let max_ratio = rs.iter().map(|r| ratio(r)).fold(0.0, f64::max);
        write!(csv, "{kind},{n},{},{:.3},{max},{max_ratio:.6}", rs.len(), total as f64 / rs.len() as f64)
            .expect("writing to a String");
        if timing {
            let micros: u128 = rs.iter().map(|r| r.micros).sum();
            write!(csv, ",{:.3},{:.1}", micros as f64 / 1000.0, micros as f64 / rs.len() as f64).expect("writing to a String");
        }
        csv.push('\n');
    }
    write_output(&args.out, csv.as_bytes())
}
