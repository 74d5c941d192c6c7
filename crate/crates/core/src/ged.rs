//! Normalized graph edit distance between two dependency graphs.
//!
//! The distance is the bipartite approximation: node substitutions,
//! deletions and insertions (each carrying the cost of the edges incident to
//! the node) are laid out in one `(n + m) × (n + m)` cost matrix and a single
//! minimum-cost assignment picks the edit path. The assignment cost is
//! divided by the cost of deleting every question node and inserting every
//! answer node, so the result lies in `[0, 1]`.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::corpus::Token;
use crate::depgraph::{multiset_overlap, DependencyGraph};

#[derive(Debug, Error)]
pub enum GedError {
    #[error("cannot read POS cost table {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("POS cost table line {line}: {message}")]
    Table { line: usize, message: String },
    #[error("cost matrix has {len} entries, not a square of side {side}")]
    NotSquare { side: usize, len: usize },
    #[error("cost matrix entry ({row}, {col}) is {value}; entries must be non-negative or +inf")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("cost matrix admits no finite assignment")]
    Infeasible,
}

/// The 17 universal POS tags.
pub const UPOS_TAGS: [&str; 17] = [
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

const TAG_CLASSES: [&[&str]; 3] = [&["NOUN", "PROPN", "PRON"], &["VERB", "AUX"], &["ADJ", "ADV"]];

/// Substitution cost between two POS tags for nodes whose lemmas differ.
/// Lookups are symmetric; pairs not listed cost `default_cost`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosCostTable {
    entries: HashMap<(String, String), f64>,
    pub default_cost: f64,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl Default for PosCostTable {
    /// Same tag 0.3, same coarse class (nominal, verbal, modifier) 0.5,
    /// anything else 1.0.
    fn default() -> Self {
        let mut entries = HashMap::new();
        for tag in UPOS_TAGS {
            entries.insert(ordered(tag, tag), 0.3);
        }
        for class in TAG_CLASSES {
            for (i, a) in class.iter().enumerate() {
                for b in &class[i + 1..] {
                    entries.insert(ordered(a, b), 0.5);
                }
            }
        }
        PosCostTable {
            entries,
            default_cost: 1.0,
        }
    }
}

impl PosCostTable {
    pub fn cost(&self, a: &str, b: &str) -> f64 {
        self.entries
            .get(&ordered(a, b))
            .copied()
            .unwrap_or(self.default_cost)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GedError> {
        let path = path.as_ref();
        let content = fs::read_to_string(path).map_err(|source| GedError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&content)
    }

    /// Parses `UPOS_A<TAB>UPOS_B<TAB>cost` rows plus one `DEFAULT<TAB>cost`
    /// row. Costs must lie in `[0, 1]`, a pair listed in both orders must
    /// agree, and no tag may be cheaper to swap for another tag than for itself.
    pub fn parse(content: &str) -> Result<Self, GedError> {
        let mut entries = HashMap::new();
        let mut default_cost = None;
        let err = |line, message: String| GedError::Table { line, message };
        for (i, raw) in content.lines().enumerate() {
            let line = i + 1;
            let text = raw.trim_end_matches('\r');
            if text.trim().is_empty() || text.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = text.split('\t').map(str::trim).collect();
            let parse_cost = |s: &str| -> Result<f64, GedError> {
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(line, format!("cost {s:?} is not a number")))?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(err(line, format!("cost {v} outside [0, 1]")));
                }
                Ok(v)
            };
            match cols.as_slice() {
                ["DEFAULT", c] => {
                    if default_cost.replace(parse_cost(c)?).is_some() {
                        return Err(err(line, "DEFAULT given twice".into()));
                    }
                }
                [a, b, c] => {
                    let v = parse_cost(c)?;
                    if let Some(prev) = entries.insert(ordered(a, b), v) {
                        if prev != v {
                            return Err(err(line, format!("{a}/{b} listed with costs {prev} and {v}")));
                        }
                    }
                }
                _ => return Err(err(line, "expected 3 columns or DEFAULT<TAB>cost".into())),
            }
        }
        let default_cost =
            default_cost.ok_or_else(|| err(0, "missing DEFAULT<TAB>cost row".into()))?;
        let table = PosCostTable {
            entries,
            default_cost,
        };
        for (a, b) in table.entries.keys() {
            let cross = table.cost(a, b);
            for tag in [a, b] {
                if table.cost(tag, tag) > cross {
                    return Err(err(
                        0,
                        format!("{tag}/{tag} costs more than {a}/{b}"),
                    ));
                }
            }
        }
        Ok(table)
    }

    /// Serializes in the file format, rows sorted for stable output.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<_> = self.entries.iter().collect();
        rows.sort_by(|x, y| x.0.cmp(y.0));
        let mut out = String::new();
        for ((a, b), c) in rows {
            out.push_str(&format!("{a}\t{b}\t{c}\n"));
        }
        out.push_str(&format!("DEFAULT\t{}\n", self.default_cost));
        out
    }
}

/// Weights for the edit operations.
#[derive(Debug, Clone, PartialEq)]
pub struct GedConfig {
    pub pos_costs: PosCostTable,
    /// Cost per unmatched incident edge (`w_e`).
    pub edge_weight: f64,
    /// Cost of deleting or inserting a bare node.
    pub node_indel_cost: f64,
}

impl Default for GedConfig {
    fn default() -> Self {
        GedConfig {
            pos_costs: PosCostTable::default(),
            edge_weight: 0.5,
            node_indel_cost: 1.0,
        }
    }
}

/// Substitution cost of two nodes: zero for equal lemmas, else the POS table.
pub fn node_cost(u: &Token, v: &Token, table: &PosCostTable) -> f64 {
    if u.lemma.to_lowercase() == v.lemma.to_lowercase() {
        0.0
    } else {
        table.cost(&u.upos, &v.upos)
    }
}

/// `w_e` times half the symmetric difference of the two relation multisets.
pub fn incident_edge_cost(u_relations: &[&str], v_relations: &[&str], edge_weight: f64) -> f64 {
    let common = multiset_overlap(u_relations.iter(), v_relations.iter());
    let sym_diff = u_relations.len() + v_relations.len() - 2 * common;
    edge_weight * sym_diff as f64 / 2.0
}

/// Square cost matrix in row-major order. Forbidden cells hold `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    side: usize,
    data: Vec<f64>,
}

impl CostMatrix {
    pub fn new(side: usize, data: Vec<f64>) -> Result<Self, GedError> {
        if data.len() != side * side {
            return Err(GedError::NotSquare {
                side,
                len: data.len(),
            });
        }
        for (k, &value) in data.iter().enumerate() {
            if value.is_nan() || value < 0.0 || value == f64::NEG_INFINITY {
                return Err(GedError::InvalidEntry {
                    row: k / side.max(1),
                    col: k % side.max(1),
                    value,
                });
            }
        }
        Ok(CostMatrix { side, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, GedError> {
        let side = rows.len();
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        if rows.iter().any(|r| r.len() != side) {
            return Err(GedError::NotSquare {
                side,
                len: data.len(),
            });
        }
        Self::new(side, data)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.side + col]
    }
}

/// Lays out the substitution, deletion, insertion and ε–ε blocks.
pub fn build_cost_matrix(
    gq: &DependencyGraph,
    ga: &DependencyGraph,
    table: &PosCostTable,
    edge_weight: f64,
    node_indel_cost: f64,
) -> CostMatrix {
    let n = gq.node_count();
    let m = ga.node_count();
    let side = n + m;
    let mut data = vec![f64::INFINITY; side * side];
    let q_rels: Vec<Vec<&str>> = (1..=n).map(|i| gq.incident_relations(i)).collect();
    let a_rels: Vec<Vec<&str>> = (1..=m).map(|j| ga.incident_relations(j)).collect();

    for i in 0..n {
        for j in 0..m {
            data[i * side + j] = node_cost(gq.node(i + 1), ga.node(j + 1), table)
                + incident_edge_cost(&q_rels[i], &a_rels[j], edge_weight);
        }
        data[i * side + m + i] = node_indel_cost + edge_weight * q_rels[i].len() as f64;
    }
    for j in 0..m {
        data[(n + j) * side + j] = node_indel_cost + edge_weight * a_rels[j].len() as f64;
        for k in 0..n {
            data[(n + j) * side + m + k] = 0.0;
        }
    }
    CostMatrix { side, data }
}

/// A perfect matching of rows to columns and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
    pub cost: f64,
}

/// Minimum-cost perfect matching (Hungarian method with shortest augmenting
/// paths). Among optimal matchings the lexicographically smallest
/// `row_to_col` is returned.
pub fn solve_assignment(matrix: &CostMatrix) -> Result<Assignment, GedError> {
    let n = matrix.side();
    if n == 0 {
        return Ok(Assignment {
            row_to_col: Vec::new(),
            cost: 0.0,
        });
    }
    let a = |i: usize, j: usize| matrix.get(i, j);

    // Potentials and matching use 1-based indices; slot 0 is the virtual
    // column each augmentation starts from.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return Err(GedError::Infeasible);
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; n];
    let mut col_to_row = vec![0usize; n];
    for j in 1..=n {
        row_to_col[col_owner[j] - 1] = j - 1;
        col_to_row[j - 1] = col_owner[j] - 1;
    }

    // Every optimal matching uses only zero-reduced-cost cells of an optimal
    // dual, so the tie-break is a search over perfect matchings of that
    // equality subgraph.
    let scale = matrix
        .data
        .iter()
        .filter(|x| x.is_finite())
        .fold(0.0f64, |acc, &x| acc.max(x));
    let tol = 1e-9 * (1.0 + scale);
    let tight: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let c = a(i, j);
                    c.is_finite() && c - u[i + 1] - v[j + 1] <= tol
                })
                .collect()
        })
        .collect();
    lexicographic_matching(&tight, &mut row_to_col, &mut col_to_row);

    let cost = row_to_col
        .iter()
        .enumerate()
        .map(|(i, &j)| a(i, j))
        .sum();
    Ok(Assignment { row_to_col, cost })
}

/// Rewrites a perfect matching of the `tight` graph into the
/// lexicographically smallest one.
fn lexicographic_matching(tight: &[Vec<bool>], row_to_col: &mut [usize], col_to_row: &mut [usize]) {
    let n = tight.len();
    let mut fixed = vec![false; n];
    for row in 0..n {
        for col in 0..n {
            if fixed[col] || !tight[row][col] {
                continue;
            }
            if row_to_col[row] == col {
                break;
            }
            // Move `row` onto `col`; the row currently holding `col` must find
            // an alternating path that ends at the column `row` gives up.
            let freed = row_to_col[row];
            let displaced = col_to_row[col];
            let mut visited = vec![false; n];
            visited[col] = true;
            let mut path = Vec::new();
            if reroute(tight, &fixed, col_to_row, displaced, freed, &mut visited, &mut path) {
                for (r, c) in path {
                    row_to_col[r] = c;
                    col_to_row[c] = r;
                }
                row_to_col[row] = col;
                col_to_row[col] = row;
                break;
            }
        }
        fixed[row_to_col[row]] = true;
    }
}

fn reroute(
    tight: &[Vec<bool>],
    fixed: &[bool],
    col_to_row: &[usize],
    row: usize,
    target: usize,
    visited: &mut [bool],
    path: &mut Vec<(usize, usize)>,
) -> bool {
    for col in 0..tight.len() {
        if fixed[col] || visited[col] || !tight[row][col] {
            continue;
        }
        visited[col] = true;
        if col == target
            || reroute(tight, fixed, col_to_row, col_to_row[col], target, visited, path)
        {
            path.push((row, col));
            return true;
        }
    }
    false
}

/// Assignment cost over the all-delete/all-insert cost, in `[0, 1]`.
pub fn graph_edit_distance(gq: &DependencyGraph, ga: &DependencyGraph, cfg: &GedConfig) -> f64 {
    let matrix = build_cost_matrix(gq, ga, &cfg.pos_costs, cfg.edge_weight, cfg.node_indel_cost);
    let indel = |g: &DependencyGraph| -> f64 {
        (1..=g.node_count())
            .map(|i| cfg.node_indel_cost + cfg.edge_weight * g.degree(i) as f64)
            .sum()
    };
    let denominator = indel(gq) + indel(ga);
    if denominator <= 0.0 {
        return 0.0;
    }
    let assignment = solve_assignment(&matrix)
        .expect("the delete/insert diagonal always gives a finite assignment");
    (assignment.cost / denominator).clamp(0.0, 1.0)
}
