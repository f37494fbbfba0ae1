use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use polyval::energy::EnergySolution;
use polyval::json::{game_to_value, rational_to_json, values_to_json};
use polyval::monitor::MonitorReport;
use polyval::weight::Rational;
use polyval::{
    decide_mean_payoff, parse_game, serialize_game, solve_discounted, solve_energy, DiscountedOptions, EnergyOptions,
    GameKind, GameSpec, SolveError,
};

use crate::io::{dump_trace, json_line, read_input, sha256_hex, write_output};
use crate::{Failure, Realize, SolveArgs};

/// Everything needed to reproduce one solver run, except the wall time.
#[derive(Serialize)]
struct RunRecord<'a> {
    input_digest: String,
    solver: &'static str,
    options: Value,
    iterations: usize,
    wall_time_us: u128,
    monitor: Option<&'a MonitorReport>,
    output_digest: String,
}

pub(crate) fn load_game(path: &str) -> Result<GameSpec, Failure> {
    let bytes = read_input(path)?;
    let spec = parse_game(&bytes).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
    if let Err(violations) = spec.validate() {
        let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Failure::Input(format!("{path}: {}", list.join("; "))));
    }
    Ok(spec)
}

fn ids(spec: &GameSpec, nodes: &[usize]) -> Value {
    Value::Array(nodes.iter().map(|&v| Value::String(spec.nodes[v].id.clone())).collect())
}

fn certificate_json(spec: &GameSpec, sol: &EnergySolution) -> Value {
    let decided: Vec<Value> = sol
        .certificate
        .decided
        .iter()
        .map(|ev| {
            json!({
                "kind": ev.kind,
                "nodes": ids(spec, &ev.nodes),
                "winner": ev.winner,
                "cycle": ev.cycle,
                "attractor": ids(spec, &ev.attractor),
            })
        })
        .collect();
    let paths: Vec<Value> = sol
        .certificate
        .paths
        .iter()
        .map(|p| {
            json!({
                "from": spec.nodes[p.from].id,
                "to": spec.nodes[p.to].id,
                "edges": p.edges,
            })
        })
        .collect();
    json!({ "decided": decided, "paths": paths })
}

fn energy_output(spec: &GameSpec, sol: &EnergySolution, monitor: bool, certificate: bool) -> Value {
    let mut m = Map::new();
    if let GameKind::MeanPayoffDecision { threshold } = &spec.kind {
        m.insert("threshold".into(), rational_to_json(threshold));
    }
    m.insert("w_max".into(), ids(spec, &sol.partition.w_max));
    m.insert("w_min".into(), ids(spec, &sol.partition.w_min));
    if monitor {
        m.insert("iterations".into(), sol.iterations.into());
        m.insert("reduced_nodes".into(), sol.reduced_nodes.into());
        m.insert("monitor".into(), serde_json::to_value(&sol.monitor).expect("report serializes"));
    }
    if certificate {
        m.insert("certificate".into(), certificate_json(spec, sol));
    }
    Value::Object(m)
}

fn internal_failure(spec: &GameSpec, args: &SolveArgs, err: SolveError) -> Failure {
    let SolveError::Internal { message, trace } = err else {
        return Failure::Input(err.to_string());
    };
    let digest = sha256_hex(&serialize_game(spec));
    let doc = json!({
        "message": message,
        "options": options_json(args),
        "game": game_to_value(spec),
        "trace": trace,
    });
    match dump_trace(&format!("polyval-trace-{}", &digest[..16]), &doc) {
        Ok(path) => Failure::Internal(format!("internal assertion failed: {message}; trace written to {}", path.display())),
        Err(e) => Failure::Internal(format!("internal assertion failed: {message}; trace dump failed: {e}")),
    }
}

fn options_json(args: &SolveArgs) -> Value {
    let realize = match args.flags.realize {
        Realize::Pass => "pass",
        Realize::Vertex => "vertex",
        Realize::Auto | Realize::Both => "auto",
    };
    json!({
        "monitor": args.flags.monitor.on(),
        "realize": realize,
        "fast_int": args.flags.fast_int.on(),
        "certificate": args.certificate,
    })
}

/// `solve`, or `decide-mp` when a threshold is given.
pub fn run(args: &SolveArgs, threshold: Option<Rational>) -> Result<(), Failure> {
    let mut spec = load_game(&args.input)?;
    if let Some(t) = threshold {
        if matches!(spec.kind, GameKind::Discounted { .. }) {
            return Err(Failure::Input("decide-mp needs an energy or mean-payoff game".into()));
        }
        spec.kind = GameKind::MeanPayoffDecision { threshold: t };
    }
    if args.flags.realize == Realize::Both {
        return Err(Failure::Input("--realize both is only meaningful for verify".into()));
    }
    let monitor = args.flags.monitor.on();
    let fault = args.flags.fault();
    let start = Instant::now();
    let (out, iterations, report) = match &spec.kind {
        GameKind::Discounted { .. } => {
            let options = DiscountedOptions { realize: args.flags.realize.strategies()[0], monitor, fault };
            let sol = solve_discounted(&spec, &options).map_err(|e| internal_failure(&spec, args, e))?;
            let mut v = values_to_json(&spec, &sol.values);
            if monitor {
                let m = v.as_object_mut().expect("values object");
                m.insert("iterations".into(), sol.iterations.into());
                m.insert("monitor".into(), serde_json::to_value(&sol.monitor).expect("report serializes"));
            }
            (v, sol.iterations, sol.monitor)
        }
        kind => {
            let options = EnergyOptions { integer_fast_path: args.flags.fast_int.on(), monitor, fault };
            let sol = match kind {
                GameKind::Energy => solve_energy(&spec, &options),
                _ => decide_mean_payoff(&spec, &options),
            }
            .map_err(|e| internal_failure(&spec, args, e))?;
            (energy_output(&spec, &sol, monitor, args.certificate), sol.iterations, sol.monitor)
        }
    };
    let wall = start.elapsed();
    let bytes = json_line(&out);
    write_output(&args.out, &bytes)?;
    if let Some(path) = &args.record {
        let record = RunRecord {
            input_digest: sha256_hex(&serialize_game(&spec)),
            solver: spec.kind.tag(),
            options: options_json(args),
            iterations,
            wall_time_us: wall.as_micros(),
            monitor: report.as_ref(),
            output_digest: sha256_hex(&bytes),
        };
        let doc = serde_json::to_value(&record).expect("record serializes");
        write_output(path, &json_line(&doc))?;
    }
    Ok(())
}
