//! Confidence-interval reports shared by both CI methods.
//!
//! A report carries per-entry intervals over the influence matrix together
//! with the method tag, confidence level, and diagnostic flags. Raw lower
//! bounds are reported unclipped; a zero-clipped value rides along in each
//! entry. Serialization: unbounded or undefined bounds become `null` in
//! JSON (serde_json maps non-finite floats to `null`).

use serde::{Deserialize, Serialize};

/// Which machinery produced the intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Asymptotic,
    Concentration,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Asymptotic => write!(f, "asymptotic"),
            Method::Concentration => write!(f, "concentration"),
        }
    }
}

/// Interval for one influence entry `alpha_ij` (influence of node `j` on
/// node `i`). `lo` is the raw bound, possibly negative for the asymptotic
/// method; `lo_clipped` is `max(lo, 0)`. `hi` is `+inf` when the entry is
/// unbounded above (flagged in the report).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CiEntry {
    pub i: usize,
    pub j: usize,
    pub lo: f64,
    pub hi: f64,
    pub lo_clipped: f64,
    pub width: f64,
    pub point: f64,
}

impl CiEntry {
    pub fn new(i: usize, j: usize, lo: f64, hi: f64, point: f64) -> Self {
        CiEntry {
            i,
            j,
            lo,
            hi,
            lo_clipped: lo.max(0.0),
            width: hi - lo,
            point,
        }
    }

    /// Whether the raw interval contains `value`.
    pub fn covers(&self, value: f64) -> bool {
        self.lo <= value && value <= self.hi
    }
}

/// Diagnostic flags accumulated while building a report.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReportFlags {
    /// Nodes whose empirical Fisher information was singular.
    pub singular_fisher: Vec<usize>,
    /// Entries `(i, j)` whose upper bound is unbounded.
    pub unbounded: Vec<(usize, usize)>,
    /// Nodes whose linearized polyhedron was infeasible.
    pub infeasible: Vec<usize>,
    /// `(node, direction)` rows dropped for a degenerate gradient.
    pub dropped_rows: Vec<(usize, usize)>,
    /// Nodes where the MLE hit the iteration cap before the tolerance.
    pub not_converged: Vec<usize>,
    /// `(i, j, side)` interval endpoints that fail the exact (non-linearized)
    /// membership check, `side` being "lo" or "hi". Diagnostic only: the
    /// polyhedron is a linearization and its endpoints need not be members.
    pub endpoint_membership_failures: Vec<(usize, usize, String)>,
}

impl ReportFlags {
    pub fn merge(&mut self, other: ReportFlags) {
        self.singular_fisher.extend(other.singular_fisher);
        self.unbounded.extend(other.unbounded);
        self.infeasible.extend(other.infeasible);
        self.dropped_rows.extend(other.dropped_rows);
        self.not_converged.extend(other.not_converged);
        self.endpoint_membership_failures
            .extend(other.endpoint_membership_failures);
    }
}

/// Per-entry confidence intervals at a common level, for one node or for the
/// whole influence matrix (entries carry their own `(i, j)`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub method: Method,
    /// Confidence level `1 - epsilon`.
    pub level: f64,
    pub epsilon: f64,
    pub node_count: usize,
    pub entries: Vec<CiEntry>,
    #[serde(default)]
    pub flags: ReportFlags,
}

impl ConfidenceReport {
    pub fn new(method: Method, epsilon: f64, node_count: usize) -> Self {
        ConfidenceReport {
            method,
            level: 1.0 - epsilon,
            epsilon,
            node_count,
            entries: Vec::new(),
            flags: ReportFlags::default(),
        }
    }

    /// Fold another report (same method/level) into this one.
    pub fn merge(&mut self, other: ConfidenceReport) {
        debug_assert_eq!(self.method, other.method);
        self.entries.extend(other.entries);
        self.flags.merge(other.flags);
    }

    /// Look up the entry for `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> Option<&CiEntry> {
        self.entries.iter().find(|e| e.i == i && e.j == j)
    }
}

/// One recovered directed edge `from -> to` (influence of `from` on `to`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub lo: f64,
    pub hi: f64,
    pub point: f64,
}

/// Graph read off a confidence report: the edge `j -> i` is declared
/// present at level `1 - eps` exactly when the raw lower bound of
/// `alpha_ij` is positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRecovery {
    pub method: Method,
    pub level: f64,
    pub edges: Vec<Edge>,
    /// `adjacency[i][j]` set when edge `j -> i` is declared.
    pub adjacency: Vec<Vec<bool>>,
}

pub fn recover_edges(report: &ConfidenceReport) -> EdgeRecovery {
    let d = report.node_count;
    let mut adjacency = vec![vec![false; d]; d];
    let mut edges = Vec::new();
    for e in &report.entries {
        if e.lo > 0.0 {
            adjacency[e.i][e.j] = true;
            edges.push(Edge { from: e.j, to: e.i, lo: e.lo, hi: e.hi, point: e.point });
        }
    }
    EdgeRecovery { method: report.method, level: report.level, edges, adjacency }
}

/// Entry whose interval fails to cover the supplied truth.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonCoveredEdge {
    pub i: usize,
    pub j: usize,
    pub lo: f64,
    pub hi: f64,
    pub truth: f64,
}

/// Diagnostic view against a known truth matrix: which entries the
/// intervals miss, how many of those are true zeros, and which declared
/// edges are false (truth zero but lower bound positive).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthDiagnostics {
    pub non_covered: Vec<NonCoveredEdge>,
    pub non_covered_total: usize,
    /// Of the non-covered entries, how many have a true influence of zero.
    pub non_covered_true_zero: usize,
    pub false_edges: Vec<(usize, usize)>,
    pub coverage_rate: f64,
}

pub fn truth_view(report: &ConfidenceReport, truth: &[Vec<f64>]) -> TruthDiagnostics {
    let mut non_covered = Vec::new();
    let mut false_edges = Vec::new();
    let mut covered = 0usize;
    for e in &report.entries {
        let t = truth[e.i][e.j];
        if e.covers(t) {
            covered += 1;
        } else {
            non_covered.push(NonCoveredEdge { i: e.i, j: e.j, lo: e.lo, hi: e.hi, truth: t });
        }
        if e.lo > 0.0 && t == 0.0 {
            false_edges.push((e.i, e.j));
        }
    }
    let total = report.entries.len().max(1);
    TruthDiagnostics {
        non_covered_total: non_covered.len(),
        non_covered_true_zero: non_covered.iter().filter(|e| e.truth == 0.0).count(),
        non_covered,
        false_edges,
        coverage_rate: covered as f64 / total as f64,
    }
}
