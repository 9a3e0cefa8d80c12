//! Command-line interface: `check`, `gen`, `bench`, `export`, `import`.
//!
//! Exit codes: 0 success (verdicts, whatever they are, are success), 2
//! validation or usage error, 3 size guard, 4 internal invariant violation.

use crate::compose::{self, Limits, SharingMode};
use crate::diagfile;
use crate::diagram::{monolithic_verdicts, Diagram, DiagramIndex};
use crate::export;
use crate::generator::{self, GenProfile};
use crate::import;
use crate::refinement::{self, CacheMode, MaxEffectCache, RefinementContext};
use crate::report::{
    BenchReport, BenchRow, EventEntry, MethodReport, MethodStats, RunReport, VerdictEntry,
};
use crate::shortcut;
use crate::solution::Effect;
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "sdmc",
    version,
    about = "Almost-sure Büchi verification for string diagrams of open MDPs"
)]
pub struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Monolithic,
    Bottomup,
    Shortcut,
    Refine,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheArg {
    Off,
    Exact,
    Monotone,
}

impl From<CacheArg> for CacheMode {
    fn from(c: CacheArg) -> CacheMode {
        match c {
            CacheArg::Off => CacheMode::Off,
            CacheArg::Exact => CacheMode::Exact,
            CacheArg::Monotone => CacheMode::Monotone,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SharingArg {
    Off,
    Term,
    Semantic,
}

impl From<SharingArg> for SharingMode {
    fn from(s: SharingArg) -> SharingMode {
        match s {
            SharingArg::Off => SharingMode::Off,
            SharingArg::Term => SharingMode::Term,
            SharingArg::Semantic => SharingMode::Semantic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Monolithic,
    Shortcut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// One leaf with k independent exit gadgets traced through a merging
    /// partner: solution sizes grow as 2^k - 1.
    Exitblow,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    /// Distinct-leaf budget.
    #[arg(long, default_value_t = 4)]
    leaves: usize,
    /// Vertex budget per leaf.
    #[arg(long, default_value_t = 10)]
    vertices: usize,
    /// Entrance/exit ceiling per leaf.
    #[arg(long, default_value_t = 3)]
    max_arity: usize,
    /// Probability weight of trace nodes.
    #[arg(long, default_value_t = 0.5)]
    trace_bias: f64,
    /// Probability that a probabilistic vertex is Büchi.
    #[arg(long, default_value_t = 0.25)]
    buchi_density: f64,
    /// Probability of reusing an arity-compatible leaf.
    #[arg(long, default_value_t = 0.4)]
    shared_leaf_prob: f64,
    /// Target leaf occurrences in the term.
    #[arg(long, default_value_t = 5)]
    occurrences: usize,
}

impl ProfileArgs {
    fn profile(&self) -> GenProfile {
        GenProfile {
            leaf_count: self.leaves,
            vertices_per_leaf: self.vertices,
            max_arity: self.max_arity,
            trace_bias: self.trace_bias,
            buchi_density: self.buchi_density,
            shared_leaf_probability: self.shared_leaf_prob,
            occurrences: self.occurrences,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide the almost-sure Büchi objective per entrance.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Refine)]
        method: MethodArg,
        /// `all`, `global`, `occ:idx`, or `leaf#occ:idx` (1-based idx).
        #[arg(long, default_value = "all")]
        entrance: String,
        /// Ceiling on effect-set sizes for the exponential methods.
        #[arg(long)]
        guard_effects: Option<u64>,
        /// Maximum-effect cache policy for the refinement method.
        #[arg(long, value_enum, default_value_t = CacheArg::Monotone)]
        cache: CacheArg,
        /// Solution-sharing policy for the bottom-up method.
        #[arg(long, value_enum, default_value_t = SharingArg::Semantic)]
        sharing: SharingArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
        /// Build the shortcut graph literally instead of dropping effects
        /// that reach globally open exits.
        #[arg(long)]
        strict_shortcut: bool,
    },
    /// Generate a random instance, or a named family member.
    Gen {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        /// Family size parameter.
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Compare the exhaustive and refinement methods on one or many
    /// instances.
    Bench {
        file: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        /// Seed range `a..b` (inclusive) of generated instances.
        #[arg(long)]
        seeds: Option<String>,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        guard_effects: Option<u64>,
        #[arg(long, value_enum, default_value_t = CacheArg::Monotone)]
        cache: CacheArg,
        #[arg(long, value_enum, default_value_t = SharingArg::Semantic)]
        sharing: SharingArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Export a graph as DOT text.
    Export {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = TargetArg::Monolithic)]
        target: TargetArg,
        #[arg(long)]
        strict_shortcut: bool,
        #[arg(long)]
        guard_effects: Option<u64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Convert an explicit probabilistic transition listing into a diagram
    /// file, erasing probability values.
    Import {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

/// Parses the entrance selector into CPI ordinals.
fn select_entrances(index: &DiagramIndex, sel: &str) -> Result<Vec<usize>> {
    let n = index.cpi().len();
    match sel {
        "all" => Ok((0..n).collect()),
        "global" => Ok(index
            .global_entrances()
            .iter()
            .map(|&ce| index.cpi_ordinal(ce))
            .collect()),
        other => {
            let (occ_part, idx_part) = other.split_once(':').ok_or_else(|| {
                Error::Usage(format!(
                    "entrance selector `{other}` is not `all`, `global`, `occ:idx` or `leaf#occ:idx`"
                ))
            })?;
            let occ_str = match occ_part.split_once('#') {
                Some((leaf, occ)) => {
                    let occ_n: usize = occ
                        .parse()
                        .map_err(|_| Error::Usage(format!("bad occurrence `{occ}`")))?;
                    let info = index
                        .occurrences()
                        .get(occ_n)
                        .ok_or_else(|| Error::Usage(format!("occurrence {occ_n} out of range")))?;
                    if info.name != leaf {
                        return Err(Error::Usage(format!(
                            "occurrence {occ_n} is leaf `{}`, not `{leaf}`",
                            info.name
                        )));
                    }
                    occ_n
                }
                None => occ_part
                    .parse()
                    .map_err(|_| Error::Usage(format!("bad occurrence `{occ_part}`")))?,
            };
            let info = index
                .occurrences()
                .get(occ_str)
                .ok_or_else(|| Error::Usage(format!("occurrence {occ_str} out of range")))?;
            let idx: usize = idx_part
                .parse()
                .map_err(|_| Error::Usage(format!("bad entrance index `{idx_part}`")))?;
            if idx == 0 || idx > info.arity.0 {
                return Err(Error::Usage(format!(
                    "entrance index {idx} out of range 1..={}",
                    info.arity.0
                )));
            }
            let ce = crate::diagram::ComponentEntrance {
                occ: crate::diagram::OccId(occ_str),
                idx: idx - 1,
            };
            Ok(vec![index.cpi_ordinal(ce)])
        }
    }
}

fn verdict_entries(
    index: &DiagramIndex,
    selected: &[usize],
    verdicts: &[bool],
) -> Vec<VerdictEntry> {
    selected
        .iter()
        .map(|&ord| {
            let ce = index.cpi()[ord];
            VerdictEntry {
                entrance: index.entrance_key(ce),
                path: format!("{}:{}", index.occ(ce.occ).path, ce.idx + 1),
                global: index.global_entrances().contains(&ce),
                verdict: verdicts[ord],
            }
        })
        .collect()
}

struct MethodRun {
    report: MethodReport,
    verdicts: Vec<bool>,
    millis: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_method(
    d: &Diagram,
    index: &DiagramIndex,
    selected: &[usize],
    method: MethodArg,
    limits: &Limits,
    cache: CacheMode,
    sharing: SharingMode,
    strict_shortcut: bool,
) -> Result<MethodRun> {
    let start = Instant::now();
    let (name, verdicts, stats, init_effects, init_dead, events) = match method {
        MethodArg::Monolithic => {
            let verdicts = monolithic_verdicts(d)?;
            let mono = crate::diagram::monolithic_semantics(d)?;
            let stats = MethodStats {
                graph_vertices: Some(mono.romdp.graph().vertex_count()),
                graph_edges: Some(mono.romdp.graph().edge_count()),
                ..Default::default()
            };
            ("monolithic", verdicts, stats, None, None, None)
        }
        MethodArg::Bottomup => {
            let (verdicts, outcome) = compose::bottom_up_verdicts(d, sharing, limits)?;
            let stats = MethodStats {
                leaf_solves: Some(outcome.stats.leaf_solves),
                compose_ops: Some(outcome.stats.compose_ops),
                sharing_hits: Some(outcome.stats.cache_hits),
                max_row_effects: Some(outcome.stats.max_row_effects),
                total_effects: Some(outcome.root.total_effects()),
                ..Default::default()
            };
            ("bottomup", verdicts, stats, None, None, None)
        }
        MethodArg::Shortcut => {
            let sc = shortcut::build_shortcut_graph(d, strict_shortcut, limits)?;
            let win = crate::graph::buchi_winning_region(&sc.graph);
            let verdicts: Vec<bool> = sc
                .entrance_vertices
                .iter()
                .map(|&v| win.contains(v))
                .collect();
            let stats = MethodStats {
                total_effects: Some(sc.effect_vertices.len()),
                dropped_effects: Some(sc.dropped_effects),
                graph_vertices: Some(sc.graph.vertex_count()),
                graph_edges: Some(sc.graph.edge_count()),
                ..Default::default()
            };
            ("shortcut", verdicts, stats, None, None, None)
        }
        MethodArg::Refine => {
            let ctx = RefinementContext::new(d)?;
            let mut me_cache = MaxEffectCache::new(cache);
            let run = refinement::strat_ref(&ctx, &mut me_cache)?;
            let key = |ord: usize| index.entrance_key(index.cpi()[ord]);
            let eff_list = |effs: &[(usize, Effect)]| {
                effs.iter()
                    .map(|&(ord, e)| (key(ord), e.to_string()))
                    .collect::<Vec<_>>()
            };
            let events: Vec<EventEntry> = run
                .events
                .iter()
                .enumerate()
                .map(|(k, e)| EventEntry {
                    iteration: k + 1,
                    live: e.live.iter().map(|&o| key(o)).collect(),
                    effects: eff_list(&e.effects),
                    died: e.died.iter().map(|&o| key(o)).collect(),
                })
                .collect();
            let stats = MethodStats {
                outer_iterations: Some(run.outer_iterations),
                max_effect_queries: Some(run.max_effect_queries),
                cache_hits: Some(run.cache_hits),
                cache_misses: Some(run.cache_misses),
                ..Default::default()
            };
            (
                "refine",
                run.verdicts.clone(),
                stats,
                Some(eff_list(&run.init_effects)),
                Some(run.init_dead.iter().map(|&o| key(o)).collect::<Vec<_>>()),
                Some(events),
            )
        }
        MethodArg::All => unreachable!("expanded by the caller"),
    };
    let millis = start.elapsed().as_secs_f64() * 1e3;
    Ok(MethodRun {
        report: MethodReport {
            method: name.to_string(),
            verdicts: verdict_entries(index, selected, &verdicts),
            stats,
            init_effects,
            init_dead,
            events,
        },
        verdicts,
        millis,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    method: MethodArg,
    entrance: &str,
    limits: &Limits,
    cache: CacheMode,
    sharing: SharingMode,
    strict_shortcut: bool,
) -> Result<RunReport> {
    let d = diagfile::parse_file(file)?;
    let index = d.index()?;
    let selected = select_entrances(&index, entrance)?;
    let methods = match method {
        MethodArg::All => vec![
            MethodArg::Monolithic,
            MethodArg::Bottomup,
            MethodArg::Shortcut,
            MethodArg::Refine,
        ],
        m => vec![m],
    };
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    let mut all_verdicts: Vec<Vec<bool>> = Vec::new();
    for m in methods {
        let run = run_method(
            &d,
            &index,
            &selected,
            m,
            limits,
            cache,
            sharing,
            strict_shortcut,
        )?;
        timings.push((run.report.method.clone(), run.millis));
        all_verdicts.push(run.verdicts);
        reports.push(run.report);
    }
    let agreement = if all_verdicts.len() > 1 {
        let agree = all_verdicts.windows(2).all(|w| w[0] == w[1]);
        if !agree {
            return Err(Error::internal(format!(
                "methods disagree on {}",
                file.display()
            )));
        }
        Some(agree)
    } else {
        None
    };
    Ok(RunReport {
        command: "check".to_string(),
        file: Some(file.display().to_string()),
        methods: reports,
        agreement,
        timings,
    })
}

fn bench_instance(
    name: &str,
    d: &Diagram,
    limits: &Limits,
    cache: CacheMode,
    sharing: SharingMode,
    rows: &mut Vec<BenchRow>,
    timings: &mut Vec<(String, f64)>,
) -> Result<()> {
    let index = d.index()?;
    let n = index.cpi().len();

    let start = Instant::now();
    match compose::bottom_up_verdicts(d, sharing, limits) {
        Ok((verdicts, outcome)) => rows.push(BenchRow {
            instance: name.to_string(),
            method: "bottomup".into(),
            entrances: n,
            wins: verdicts.iter().filter(|&&v| v).count(),
            stats: MethodStats {
                leaf_solves: Some(outcome.stats.leaf_solves),
                compose_ops: Some(outcome.stats.compose_ops),
                sharing_hits: Some(outcome.stats.cache_hits),
                cache_hits: Some(outcome.stats.cache_hits as u64),
                max_row_effects: Some(outcome.stats.max_row_effects),
                total_effects: Some(outcome.root.total_effects()),
                ..Default::default()
            },
            guard_error: None,
        }),
        Err(e @ Error::SizeGuard { .. }) => rows.push(BenchRow {
            instance: name.to_string(),
            method: "bottomup".into(),
            entrances: n,
            wins: 0,
            stats: MethodStats::default(),
            guard_error: Some(e.to_string()),
        }),
        Err(e) => return Err(e),
    }
    timings.push((
        format!("{name}/bottomup"),
        start.elapsed().as_secs_f64() * 1e3,
    ));

    let start = Instant::now();
    let ctx = RefinementContext::new(d)?;
    let mut me_cache = MaxEffectCache::new(cache);
    let run = refinement::strat_ref(&ctx, &mut me_cache)?;
    rows.push(BenchRow {
        instance: name.to_string(),
        method: "refine".into(),
        entrances: n,
        wins: run.verdicts.iter().filter(|&&v| v).count(),
        stats: MethodStats {
            outer_iterations: Some(run.outer_iterations),
            max_effect_queries: Some(run.max_effect_queries),
            cache_hits: Some(run.cache_hits),
            cache_misses: Some(run.cache_misses),
            ..Default::default()
        },
        guard_error: None,
    });
    timings.push((
        format!("{name}/refine"),
        start.elapsed().as_secs_f64() * 1e3,
    ));
    Ok(())
}

fn parse_seed_range(s: &str) -> Result<std::ops::RangeInclusive<u64>> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Usage(format!("seed range `{s}` is not `a..b`")))?;
    let a: u64 = a
        .parse()
        .map_err(|_| Error::Usage(format!("bad seed `{a}`")))?;
    let b: u64 = b
        .parse()
        .map_err(|_| Error::Usage(format!("bad seed `{b}`")))?;
    Ok(a..=b)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Check {
            file,
            method,
            entrance,
            guard_effects,
            cache,
            sharing,
            format,
            strict_shortcut,
        } => {
            let limits = Limits {
                max_effects: guard_effects.unwrap_or(Limits::default().max_effects),
            };
            let report = cmd_check(
                &file,
                method,
                &entrance,
                &limits,
                cache.into(),
                sharing.into(),
                strict_shortcut,
            )?;
            let text = match format {
                FormatArg::Text => report.render_text(),
                FormatArg::Json => report.render_json(),
            };
            print!("{text}");
            Ok(())
        }
        Cmd::Gen {
            seed,
            family,
            k,
            profile,
            out,
        } => {
            let d = match family {
                Some(FamilyArg::Exitblow) => {
                    let k = k.unwrap_or(4);
                    if !(1..=crate::set::MAX_EXITS).contains(&k) {
                        return Err(Error::Usage(format!("k={k} out of range")));
                    }
                    crate::fixtures::exitblow(k)
                }
                None => generator::generate(seed, &profile.profile())?,
            };
            write_or_print(out.as_deref(), &diagfile::print_sd(&d))
        }
        Cmd::Bench {
            file,
            family,
            k_min,
            k_max,
            seeds,
            profile,
            guard_effects,
            cache,
            sharing,
            format,
        } => {
            let limits = Limits {
                max_effects: guard_effects.unwrap_or(Limits::default().max_effects),
            };
            let mut rows = Vec::new();
            let mut timings = Vec::new();
            if let Some(file) = &file {
                let d = diagfile::parse_file(file)?;
                bench_instance(
                    &file.display().to_string(),
                    &d,
                    &limits,
                    cache.into(),
                    sharing.into(),
                    &mut rows,
                    &mut timings,
                )?;
            }
            if let Some(FamilyArg::Exitblow) = family {
                if k_min == 0 || k_max > crate::set::MAX_EXITS || k_min > k_max {
                    return Err(Error::Usage(format!("bad k range {k_min}..{k_max}")));
                }
                for k in k_min..=k_max {
                    let d = crate::fixtures::exitblow(k);
                    bench_instance(
                        &format!("exitblow({k})"),
                        &d,
                        &limits,
                        cache.into(),
                        sharing.into(),
                        &mut rows,
                        &mut timings,
                    )?;
                }
            }
            if let Some(range) = &seeds {
                let p = profile.profile();
                for seed in parse_seed_range(range)? {
                    let d = generator::generate(seed, &p)?;
                    bench_instance(
                        &format!("seed{seed}"),
                        &d,
                        &limits,
                        cache.into(),
                        sharing.into(),
                        &mut rows,
                        &mut timings,
                    )?;
                }
            }
            if rows.is_empty() {
                return Err(Error::Usage(
                    "bench needs a file, --family, or --seeds".into(),
                ));
            }
            let report = BenchReport { rows, timings };
            let text = match format {
                FormatArg::Text => report.render_text(),
                FormatArg::Json => report.render_json(),
            };
            print!("{text}");
            Ok(())
        }
        Cmd::Export {
            file,
            target,
            strict_shortcut,
            guard_effects,
            out,
        } => {
            let limits = Limits {
                max_effects: guard_effects.unwrap_or(Limits::default().max_effects),
            };
            let d = diagfile::parse_file(&file)?;
            let text = match target {
                TargetArg::Monolithic => export::export_monolithic(&d)?,
                TargetArg::Shortcut => export::export_shortcut(&d, strict_shortcut, &limits)?,
            };
            write_or_print(out.as_deref(), &text)
        }
        Cmd::Import { file, out } => {
            let text = std::fs::read_to_string(&file)?;
            let d = import::import_mdp(&text)?;
            write_or_print(out.as_deref(), &diagfile::print_sd(&d))
        }
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
