//! Run reports: per-entrance verdicts per method, counters, refinement
//! event streams, and bench tables.
//!
//! Reports render deterministically; wall-clock timings live in a separate
//! trailing section (text) or a separate top-level field (JSON) so byte
//! comparisons can strip them.

use serde::Serialize;
use std::fmt::Write;

#[derive(Debug, Clone, Serialize)]
pub struct VerdictEntry {
    /// `name#occ:idx` key of the component entrance.
    pub entrance: String,
    /// Dotted tree path of the occurrence.
    pub path: String,
    /// Is this a global entrance of the diagram?
    pub global: bool,
    pub verdict: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MethodStats {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_effect_queries: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_hits: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_misses: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub leaf_solves: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compose_ops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sharing_hits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_row_effects: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub total_effects: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dropped_effects: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_vertices: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph_edges: Option<usize>,
}

/// One outer iteration of the refinement loop, keyed by entrance names.
#[derive(Debug, Clone, Serialize)]
pub struct EventEntry {
    pub iteration: usize,
    pub live: Vec<String>,
    pub effects: Vec<(String, String)>,
    pub died: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub verdicts: Vec<VerdictEntry>,
    pub stats: MethodStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_effects: Option<Vec<(String, String)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init_dead: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<Vec<EventEntry>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub methods: Vec<MethodReport>,
    /// Present when more than one method ran: whether all verdict maps
    /// were identical.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<bool>,
    /// Milliseconds per method; excluded from determinism comparisons.
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}", self.command);
        if let Some(f) = &self.file {
            let _ = writeln!(out, "file: {f}");
        }
        for m in &self.methods {
            let _ = writeln!(out, "\n## method {}", m.method);
            for v in &m.verdicts {
                let _ = writeln!(
                    out,
                    "  {:<18} {} {:<12} {}",
                    v.entrance,
                    if v.global { "global" } else { "      " },
                    v.path,
                    if v.verdict { "true" } else { "false" }
                );
            }
            let s = &m.stats;
            let mut stat_line = String::new();
            for (k, v) in [
                ("iterations", s.outer_iterations.map(|v| v.to_string())),
                ("queries", s.max_effect_queries.map(|v| v.to_string())),
                ("cache_hits", s.cache_hits.map(|v| v.to_string())),
                ("cache_misses", s.cache_misses.map(|v| v.to_string())),
                ("leaf_solves", s.leaf_solves.map(|v| v.to_string())),
                ("compose_ops", s.compose_ops.map(|v| v.to_string())),
                ("sharing_hits", s.sharing_hits.map(|v| v.to_string())),
                ("max_row_effects", s.max_row_effects.map(|v| v.to_string())),
                ("total_effects", s.total_effects.map(|v| v.to_string())),
                ("dropped_effects", s.dropped_effects.map(|v| v.to_string())),
                ("vertices", s.graph_vertices.map(|v| v.to_string())),
                ("edges", s.graph_edges.map(|v| v.to_string())),
            ] {
                if let Some(v) = v {
                    let _ = write!(stat_line, "{k}={v} ");
                }
            }
            if !stat_line.is_empty() {
                let _ = writeln!(out, "  stats: {}", stat_line.trim_end());
            }
            if let Some(init) = &m.init_effects {
                let items: Vec<String> = init.iter().map(|(k, e)| format!("{k}={e}")).collect();
                let _ = writeln!(out, "  init: {}", items.join(" "));
            }
            if let Some(dead) = &m.init_dead {
                if !dead.is_empty() {
                    let _ = writeln!(out, "  init dead: {}", dead.join(" "));
                }
            }
            if let Some(events) = &m.events {
                for e in events {
                    let effs: Vec<String> =
                        e.effects.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    let _ = writeln!(
                        out,
                        "  iter {}: live [{}] effects [{}]{}",
                        e.iteration,
                        e.live.join(" "),
                        effs.join(" "),
                        if e.died.is_empty() {
                            String::new()
                        } else {
                            format!(" died [{}]", e.died.join(" "))
                        }
                    );
                }
            }
        }
        if let Some(a) = self.agreement {
            let _ = writeln!(out, "\nagreement: {}", if a { "yes" } else { "NO" });
        }
        let _ = writeln!(out, "\n## timings");
        for (m, ms) in &self.timings {
            let _ = writeln!(out, "  {m}: {ms:.3} ms");
        }
        out
    }
}

/// Strips the timing information, leaving only deterministic content.
pub fn strip_timings_text(report: &str) -> String {
    match report.find("\n## timings") {
        Some(k) => report[..k].to_string(),
        None => report.to_string(),
    }
}

/// One row of the bench table.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub instance: String,
    pub method: String,
    pub entrances: usize,
    pub wins: usize,
    pub stats: MethodStats,
    /// A size-guard failure is recorded, not fatal.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub timings: Vec<(String, f64)>,
}

impl BenchReport {
    pub fn render_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:<9} {:>4} {:>4} {:>8} {:>8} {:>7} {:>6} {:>6} {:>6}  status",
            "instance",
            "method",
            "en",
            "win",
            "max_row",
            "effects",
            "queries",
            "iters",
            "hits",
            "miss",
        );
        for r in &self.rows {
            let s = &r.stats;
            let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
            let optu = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "{:<16} {:<9} {:>4} {:>4} {:>8} {:>8} {:>7} {:>6} {:>6} {:>6}  {}",
                r.instance,
                r.method,
                r.entrances,
                r.wins,
                optu(s.max_row_effects),
                optu(s.total_effects),
                opt(s.max_effect_queries),
                opt(s.outer_iterations),
                opt(s.cache_hits),
                opt(s.cache_misses),
                r.guard_error.as_deref().unwrap_or("ok"),
            );
        }
        let _ = writeln!(out, "\n## timings");
        for (m, ms) in &self.timings {
            let _ = writeln!(out, "  {m}: {ms:.3} ms");
        }
        out
    }
}
