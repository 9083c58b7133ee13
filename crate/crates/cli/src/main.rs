use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qnetcap::graph::{floor_multigraph, UnitMultigraph};
use qnetcap::io::{flow_tables, flows_to_csv, flows_to_dot, NetworkDocument};
use qnetcap::netgen::{generate_chord, generate_random_connected, ChordParams, RandomNetworkParams};
use qnetcap::oracles::{
    best_path_harmonic, max_tree_packing, min_cut_ratio, min_multicut, min_st_cut, min_steiner_cut, OracleResult,
    Witness,
};
use qnetcap::programs::{
    frequency_capacities, multipair_capacity, multipartite_capacity, scenario_flow, single_pair_bounds,
    weighted_capacity,
};
use qnetcap::routing::{aggregated_repeater_run, decompose_flow, RepeaterOptions, RepeaterRunReport};
use qnetcap::{
    BoundSide, BoundsReport, CommoditySet, FlowSolution, FrequencyMode, MultiPairObjective, QuantumNetwork, Scenario,
    UndirectedNetwork, UserGroup,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "qnetcap", version, about = "Capacity bounds and repeater protocols for quantum networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lower and upper capacity bounds for one scenario.
    #[command(subcommand)]
    Capacity(CapacityCmd),
    /// Write a generated network document.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Exhaustive cut and packing oracles for small inputs.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Simulate the aggregated repeater protocol.
    Repeater(RepeaterArgs),
}

#[derive(Subcommand)]
enum CapacityCmd {
    SinglePair(SinglePairArgs),
    MultiPair(MultiPairArgs),
    Multipartite(MultipartiteArgs),
}

#[derive(Args, Serialize)]
struct CapacityCommon {
    /// Network document (JSON)
    #[arg(long)]
    network: PathBuf,
    /// Treat usage frequencies as LP variables
    #[arg(long)]
    optimize_frequencies: bool,
    /// Fixed frequencies: `per-channel` (every channel once per round),
    /// `uniform` (1/|E| each) or a JSON file mapping channel id to frequency
    #[arg(long, default_value = "per-channel")]
    freqs: String,
    /// Cross-check the LP values against the exhaustive oracles
    #[arg(long)]
    check_oracles: bool,
    /// Export the lower-bound flows
    #[arg(long, value_enum)]
    emit_flows: Option<FlowFormat>,
    /// File for the flow export; embedded in the report when absent
    #[arg(long)]
    flows_out: Option<PathBuf>,
    /// Report file; standard output when absent
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SinglePairArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CapacityCommon,
    #[arg(long)]
    source: String,
    #[arg(long)]
    sink: String,
}

#[derive(Args, Serialize)]
struct MultiPairArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CapacityCommon,
    /// Commodities as `a:b,c:d`
    #[arg(long)]
    pairs: String,
    #[arg(long, value_enum, default_value_t = Objective::Total)]
    objective: Objective,
    /// Pair weights for the weighted objective, summing to one
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Flow-cut gap multiplier for the upper bound
    #[arg(long, default_value_t = 1.0)]
    gap: f64,
}

#[derive(Args, Serialize)]
struct MultipartiteArgs {
    #[command(flatten)]
    #[serde(flatten)]
    common: CapacityCommon,
    /// Group members as `a,b,c`
    #[arg(long)]
    users: String,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Objective {
    Total,
    Worst,
    Weighted,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FlowFormat {
    Dot,
    Csv,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Side {
    Lower,
    Upper,
}

impl From<Side> for BoundSide {
    fn from(s: Side) -> Self {
        match s {
            Side::Lower => BoundSide::Lower,
            Side::Upper => BoundSide::Upper,
        }
    }
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Ring of 2^l nodes plus one diagonal family per level
    Chord(ChordArgs),
    /// Random spanning tree plus extra edges
    Random(RandomArgs),
}

#[derive(Args, Serialize)]
struct ChordArgs {
    #[arg(long)]
    l: u32,
    #[arg(long, default_value_t = 1.0)]
    c0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    diagonals_per_level: u32,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct RandomArgs {
    #[arg(long)]
    vertices: usize,
    #[arg(long, default_value_t = 0)]
    extra_edges: usize,
    #[arg(long, default_value_t = 0.1)]
    cap_min: f64,
    #[arg(long, default_value_t = 5.0)]
    cap_max: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    #[serde(skip)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCmd {
    MinCut(OracleArgs),
    Multicut(OracleArgs),
    CutRatio(OracleArgs),
    SteinerCut(OracleArgs),
    TreePacking(OracleArgs),
    BestPath(OracleArgs),
}

#[derive(Args, Serialize)]
struct OracleArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_enum, default_value_t = Side::Upper)]
    side: Side,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    sink: Option<String>,
    #[arg(long)]
    pairs: Option<String>,
    #[arg(long)]
    users: Option<String>,
    /// Bell pairs per unit of capacity when building the multigraph for
    /// tree packing
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RepeaterScenario {
    Pair,
    Pairs,
    Group,
}

#[derive(Args, Serialize)]
struct RepeaterArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long, value_enum)]
    scenario: RepeaterScenario,
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    sink: Option<String>,
    #[arg(long)]
    pairs: Option<String>,
    /// Multi-pair objective: total or worst
    #[arg(long, value_enum, default_value_t = Objective::Total)]
    objective: Objective,
    #[arg(long)]
    users: Option<String>,
    /// Channel uses per edge, in units of the frequency denominator
    #[arg(long)]
    m: u64,
    /// Distillation block length factor
    #[arg(long)]
    k: u64,
    /// `uniform`, `optimized` or a JSON file mapping channel id to frequency
    #[arg(long, default_value = "uniform")]
    freqs: String,
    /// Pack GHZ trees exhaustively (certified bound check)
    #[arg(long)]
    exact_packing: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn load_network(path: &Path) -> Result<QuantumNetwork> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let doc = NetworkDocument::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    doc.to_network().with_context(|| format!("in {}", path.display()))
}

fn load_frequencies(spec: &str, net: &QuantumNetwork) -> Result<FrequencyMode> {
    match spec {
        "per-channel" => Ok(FrequencyMode::PerChannel),
        "uniform" => Ok(FrequencyMode::uniform(net)),
        path => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {path}"))?;
            let map: BTreeMap<String, f64> = serde_json::from_str(&text)
                .map_err(|e| qnetcap::Error::InvalidInput(format!("malformed frequency file: {e}")))
                .with_context(|| format!("in {path}"))?;
            Ok(FrequencyMode::Fixed(map))
        }
    }
}

fn parse_pairs(text: &str) -> Result<CommoditySet> {
    let mut pairs = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once(':')
            .ok_or_else(|| qnetcap::Error::InvalidInput(format!("pair `{item}` is not of the form a:b")))?;
        pairs.push((a.trim().to_string(), b.trim().to_string()));
    }
    Ok(CommoditySet::new(pairs)?)
}

fn parse_users(text: &str) -> Result<UserGroup> {
    Ok(UserGroup::new(text.split(',').map(str::trim).filter(|s| !s.is_empty()))?)
}

fn required<'a>(value: &'a Option<String>, flag: &str) -> Result<&'a str> {
    value
        .as_deref()
        .ok_or_else(|| qnetcap::Error::InvalidInput(format!("--{flag} is required here")).into())
}

fn write_out(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(value: &Value, output: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(&text, output)
}

fn tool() -> Value {
    json!({ "name": "qnetcap", "version": VERSION })
}

fn scenario_json(s: &Scenario) -> Value {
    match s {
        Scenario::Pair { source, sink } => json!({ "kind": s.tag(), "source": source, "sink": sink }),
        Scenario::Pairs { pairs, .. } => json!({
            "kind": s.tag(),
            "pairs": pairs.pairs().iter().map(|c| [&c.source, &c.sink]).collect::<Vec<_>>(),
            "weights": pairs.weights(),
        }),
        Scenario::Group(g) => json!({ "kind": s.tag(), "users": g.members() }),
    }
}

fn mode_json(mode: &FrequencyMode) -> Value {
    match mode {
        FrequencyMode::Optimize => json!("optimize"),
        FrequencyMode::PerChannel => json!("per-channel"),
        FrequencyMode::Fixed(f) => json!({ "fixed": f }),
    }
}

fn paths_json(sol: &FlowSolution) -> Result<Value> {
    let mut out = Vec::new();
    for i in 0..sol.commodities.len() {
        let dec = decompose_flow(sol, i)?;
        let paths: Vec<Value> = (0..dec.paths.len())
            .map(|p| json!({ "vertices": dec.path_names(p), "flow": dec.paths[p].flow }))
            .collect();
        out.push(json!({ "commodity": i, "paths": paths }));
    }
    Ok(Value::Array(out))
}

fn bounds_json(r: &BoundsReport) -> Result<Value> {
    let flows = |f: &Option<FlowSolution>| f.as_ref().map(flow_tables);
    let freqs = |f: &Option<FlowSolution>| f.as_ref().and_then(|f| f.frequencies.clone());
    Ok(json!({
        "lower_bound": r.lower_bound,
        "lower_bound_lp_value": r.lower_bound_lp_value,
        "lower_factor": r.lower_factor,
        "upper_bound_lp_value": r.upper_bound_lp_value,
        "gap_factor": r.gap_factor,
        "reported_upper": r.reported_upper,
        "notes": r.notes,
        "frequencies": { "lower": freqs(&r.lower_flow), "upper": freqs(&r.upper_flow) },
        "flows": { "lower": flows(&r.lower_flow), "upper": flows(&r.upper_flow) },
        "paths": r.lower_flow.as_ref().map(paths_json).transpose()?,
    }))
}

fn witness_json(w: &Witness, gp: Option<&UndirectedNetwork>, mg: Option<&UnitMultigraph>) -> Value {
    match w {
        Witness::Side(side) => json!({ "side": side }),
        Witness::Edges(ids) => {
            let edges: Vec<Value> = ids
                .iter()
                .map(|&u| match gp {
                    Some(gp) => {
                        let (a, b) = gp.uedges()[u].ends;
                        json!([gp.name(a), gp.name(b)])
                    }
                    None => json!(u),
                })
                .collect();
            json!({ "edges": edges })
        }
        Witness::Trees(trees) => {
            let trees: Vec<Vec<Value>> = trees
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|&mid| match mg {
                            Some(mg) => {
                                let (a, b) = mg.medges()[mid].ends;
                                json!({ "medge": mid, "ends": [mg.name(a), mg.name(b)] })
                            }
                            None => json!(mid),
                        })
                        .collect()
                })
                .collect();
            json!({ "trees": trees })
        }
        Witness::Path(p) => json!({ "path": p }),
        Witness::None => Value::Null,
    }
}

/// Capacities a fixed-capacity oracle sees for the LP solution `sol`.
fn oracle_skeleton(net: &QuantumNetwork, mode: &FrequencyMode, sol: &FlowSolution, side: BoundSide) -> Result<UndirectedNetwork> {
    Ok(match mode {
        FrequencyMode::PerChannel => net.undirected(side)?,
        FrequencyMode::Fixed(f) => frequency_capacities(net, f, side)?,
        FrequencyMode::Optimize => {
            let f = sol.frequencies.as_ref().ok_or_else(|| anyhow!("optimized solution carries no frequencies"))?;
            frequency_capacities(net, f, side)?
        }
    })
}

fn oracle_check(net: &QuantumNetwork, scenario: &Scenario, mode: &FrequencyMode, report: &BoundsReport) -> Result<Value> {
    let mut entries = Vec::new();
    for (side, sol) in [(BoundSide::Lower, &report.lower_flow), (BoundSide::Upper, &report.upper_flow)] {
        let Some(sol) = sol else { continue };
        let (name, result, equal): (&str, OracleResult, bool) = match (scenario, mode) {
            (Scenario::Pair { source, sink }, FrequencyMode::Optimize) => {
                ("best-path", best_path_harmonic(net, side, source, sink)?, true)
            }
            (Scenario::Pair { source, sink }, _) => {
                ("min-cut", min_st_cut(&oracle_skeleton(net, mode, sol, side)?, source, sink)?, true)
            }
            (Scenario::Pairs { pairs, objective }, _) => {
                let gp = oracle_skeleton(net, mode, sol, side)?;
                match objective {
                    MultiPairObjective::Total => ("multicut", min_multicut(&gp, pairs)?, pairs.len() == 1),
                    MultiPairObjective::Worst => ("cut-ratio", min_cut_ratio(&gp, pairs)?, pairs.len() == 1),
                }
            }
            (Scenario::Group(g), _) => ("steiner-cut", min_steiner_cut(&oracle_skeleton(net, mode, sol, side)?, g)?, true),
        };
        let lp = sol.objective;
        let tol = 1e-6 * (1.0 + result.value.abs());
        let consistent = if equal {
            (lp - result.value).abs() <= tol
        } else {
            lp <= result.value + tol
        };
        entries.push(json!({
            "side": side,
            "oracle": name,
            "lp_value": lp,
            "oracle_value": result.value,
            "relation": if equal { "equal" } else { "lp_at_most_oracle" },
            "consistent": consistent,
        }));
    }
    Ok(Value::Array(entries))
}

fn capacity(cmd: CapacityCmd) -> Result<()> {
    let (common, config) = match &cmd {
        CapacityCmd::SinglePair(a) => (&a.common, json!({ "command": "capacity single-pair", "args": a })),
        CapacityCmd::MultiPair(a) => (&a.common, json!({ "command": "capacity multi-pair", "args": a })),
        CapacityCmd::Multipartite(a) => (&a.common, json!({ "command": "capacity multipartite", "args": a })),
    };
    let net = load_network(&common.network)?;
    let mode = if common.optimize_frequencies {
        FrequencyMode::Optimize
    } else {
        load_frequencies(&common.freqs, &net)?
    };
    let (scenario, report) = match &cmd {
        CapacityCmd::SinglePair(a) => {
            let scenario = Scenario::pair(&a.source, &a.sink)?;
            (scenario, single_pair_bounds(&net, &a.source, &a.sink, &mode)?)
        }
        CapacityCmd::MultiPair(a) => {
            let pairs = parse_pairs(&a.pairs)?;
            match a.objective {
                Objective::Weighted => {
                    let pairs = pairs.with_weights(a.weights.clone())?;
                    let report = weighted_capacity(&net, &pairs, None, &mode, a.gap)?;
                    let scenario = Scenario::Pairs {
                        pairs,
                        objective: MultiPairObjective::Total,
                    };
                    (scenario, report)
                }
                Objective::Total | Objective::Worst => {
                    if !a.weights.is_empty() {
                        bail!(qnetcap::Error::InvalidInput("--weights only applies to --objective weighted".into()));
                    }
                    let objective = match a.objective {
                        Objective::Worst => MultiPairObjective::Worst,
                        _ => MultiPairObjective::Total,
                    };
                    let report = multipair_capacity(&net, &pairs, objective, &mode, a.gap)?;
                    (Scenario::Pairs { pairs, objective }, report)
                }
            }
        }
        CapacityCmd::Multipartite(a) => {
            let group = parse_users(&a.users)?;
            let report = multipartite_capacity(&net, &group, &mode)?;
            (Scenario::Group(group), report)
        }
    };
    let mut descriptor = scenario_json(&scenario);
    descriptor["kind"] = json!(report.scenario);
    let mut out = json!({
        "tool": tool(),
        "config": config,
        "frequency_mode": mode_json(&mode),
        "scenario": descriptor,
    });
    let body = bounds_json(&report)?;
    for (k, v) in body.as_object().into_iter().flatten() {
        out[k] = v.clone();
    }
    if common.check_oracles {
        out["oracle_check"] = if report.lower_flow.is_some() {
            oracle_check(&net, &scenario, &mode, &report)?
        } else {
            json!({ "skipped": "no oracle covers the weighted objective" })
        };
    }
    if let Some(format) = common.emit_flows {
        let sol = report
            .lower_flow
            .as_ref()
            .ok_or_else(|| qnetcap::Error::InvalidInput("the weighted objective has no flows to export".into()))?;
        let text = match format {
            FlowFormat::Dot => flows_to_dot(sol),
            FlowFormat::Csv => flows_to_csv(sol),
        };
        match &common.flows_out {
            Some(path) => write_out(&text, Some(path))?,
            None => out["flow_export"] = json!(text),
        }
    }
    emit(&out, common.output.as_deref())
}

fn generate(cmd: GenerateCmd) -> Result<()> {
    let (net, metadata, output) = match &cmd {
        GenerateCmd::Chord(a) => {
            let params = ChordParams {
                l: a.l,
                c0: a.c0,
                seed: a.seed,
                diagonals_per_level: a.diagonals_per_level,
            };
            (generate_chord(&params)?, json!({ "generator": "chord", "params": a }), &a.output)
        }
        GenerateCmd::Random(a) => {
            let params = RandomNetworkParams {
                vertices: a.vertices,
                extra_edges: a.extra_edges,
                capacity_range: (a.cap_min, a.cap_max),
                seed: a.seed,
            };
            (generate_random_connected(&params)?, json!({ "generator": "random", "params": a }), &a.output)
        }
    };
    let mut meta = BTreeMap::new();
    if let Value::Object(m) = metadata {
        meta.extend(m);
    }
    meta.insert("tool".into(), tool());
    write_out(&NetworkDocument::from_network(&net, meta).to_json(), output.as_deref())
}

fn oracle(cmd: OracleCmd) -> Result<()> {
    let (name, a) = match &cmd {
        OracleCmd::MinCut(a) => ("min-cut", a),
        OracleCmd::Multicut(a) => ("multicut", a),
        OracleCmd::CutRatio(a) => ("cut-ratio", a),
        OracleCmd::SteinerCut(a) => ("steiner-cut", a),
        OracleCmd::TreePacking(a) => ("tree-packing", a),
        OracleCmd::BestPath(a) => ("best-path", a),
    };
    let net = load_network(&a.network)?;
    let side = BoundSide::from(a.side);
    let gp = net.undirected(side)?;
    let mut mg = None;
    let result = match cmd {
        OracleCmd::MinCut(_) => min_st_cut(&gp, required(&a.source, "source")?, required(&a.sink, "sink")?)?,
        OracleCmd::Multicut(_) => min_multicut(&gp, &parse_pairs(required(&a.pairs, "pairs")?)?)?,
        OracleCmd::CutRatio(_) => min_cut_ratio(&gp, &parse_pairs(required(&a.pairs, "pairs")?)?)?,
        OracleCmd::SteinerCut(_) => min_steiner_cut(&gp, &parse_users(required(&a.users, "users")?)?)?,
        OracleCmd::TreePacking(_) => {
            let group = parse_users(required(&a.users, "users")?)?;
            let g = floor_multigraph(&gp, a.scale)?;
            let r = max_tree_packing(&g, &group)?;
            mg = Some(g);
            r
        }
        OracleCmd::BestPath(_) => best_path_harmonic(&net, side, required(&a.source, "source")?, required(&a.sink, "sink")?)?,
    };
    emit(
        &json!({
            "tool": tool(),
            "config": { "command": format!("oracle {name}"), "args": a },
            "oracle": name,
            "value": result.value,
            "witness": witness_json(&result.witness, Some(&gp), mg.as_ref()),
        }),
        a.output.as_deref(),
    )
}

fn repeater_json(r: &RepeaterRunReport, names: &[String]) -> Value {
    let paths: Vec<Value> = r
        .paths
        .iter()
        .map(|p| {
            json!({
                "commodity": p.commodity,
                "vertices": p.vertices.iter().map(|&v| &names[v]).collect::<Vec<_>>(),
                "medges": p.medges,
            })
        })
        .collect();
    let bell: Vec<Value> = r
        .bell_pairs_per_uedge
        .iter()
        .map(|(a, b, n)| json!({ "ends": [a, b], "bell_pairs": n }))
        .collect();
    json!({
        "m": r.m,
        "k": r.k,
        "n": r.n,
        "m_tilde": r.m_tilde,
        "guarantee_vacuous": r.guarantee_vacuous,
        "lp_value": r.lp_value,
        "bell_pairs_per_uedge": bell,
        "delivered": r.delivered,
        "consumed": r.consumed,
        "rates": r.rates,
        "rate": r.rate,
        "bound": r.bound,
        "bound_satisfied": r.bound_satisfied,
        "certified": r.certified,
        "paths": paths,
        "trees": r.trees,
    })
}

fn repeater(a: RepeaterArgs) -> Result<()> {
    let net = load_network(&a.network)?;
    let scenario = match a.scenario {
        RepeaterScenario::Pair => Scenario::pair(required(&a.source, "source")?, required(&a.sink, "sink")?)?,
        RepeaterScenario::Pairs => {
            let objective = match a.objective {
                Objective::Total => MultiPairObjective::Total,
                Objective::Worst => MultiPairObjective::Worst,
                Objective::Weighted => {
                    bail!(qnetcap::Error::InvalidInput("the repeater supports total and worst objectives".into()))
                }
            };
            Scenario::Pairs {
                pairs: parse_pairs(required(&a.pairs, "pairs")?)?,
                objective,
            }
        }
        RepeaterScenario::Group => Scenario::Group(parse_users(required(&a.users, "users")?)?),
    };
    let freqs = match a.freqs.as_str() {
        "optimized" => scenario_flow(&net, &scenario, &FrequencyMode::Optimize, BoundSide::Lower)?
            .frequencies
            .ok_or_else(|| anyhow!("optimized solution carries no frequencies"))?,
        spec => match load_frequencies(spec, &net)? {
            FrequencyMode::Fixed(f) => f,
            _ => bail!(qnetcap::Error::InvalidInput("--freqs must be uniform, optimized or a file".into())),
        },
    };
    let options = RepeaterOptions {
        exact_packing: a.exact_packing,
    };
    let run = aggregated_repeater_run(&net, &scenario, &freqs, a.m, a.k, options)?;
    let names = net.undirected(BoundSide::Lower)?.vertices().to_vec();
    let mut out = json!({
        "tool": tool(),
        "config": { "command": "repeater", "args": &a },
        "scenario": scenario_json(&scenario),
        "frequencies": freqs,
    });
    for (k, v) in repeater_json(&run, &names).as_object().into_iter().flatten() {
        out[k] = v.clone();
    }
    emit(&out, a.output.as_deref())
}

fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(q) = cause.downcast_ref::<qnetcap::Error>() {
            return match q {
                qnetcap::Error::GuardExceeded { .. } => 3,
                qnetcap::Error::Solver(_) | qnetcap::Error::UnexpectedStatus(_) | qnetcap::Error::Inconsistent(_) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Capacity(c) => capacity(c),
        Command::Generate(c) => generate(c),
        Command::Oracle(c) => oracle(c),
        Command::Repeater(a) => repeater(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
