//! Simplicial systems: a directed graph whose edges carry labels from a
//! finite alphabet, injective on the out-edges of each vertex. An edge `e`
//! out of `v` acts by the elementary unipotent matrix
//! `M_e = Id + Σ E_{α, l(e)}` over the other out-labels `α` of `v`, and the
//! win-lose induction follows the edge whose label has the strictly smallest
//! coordinate.

use std::collections::{BTreeSet, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::itm::LengthVector;
use crate::mat3::Mat3;
use crate::rational::Q;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// 1-based label.
    pub label: usize,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimplicialGraph {
    names: Vec<String>,
    alphabet: usize,
    edges: Vec<Edge>,
}

impl SimplicialGraph {
    pub fn new(names: Vec<String>, alphabet: usize, edges: Vec<Edge>) -> Result<Self> {
        if alphabet == 0 {
            return Err(Error::InvalidParams("empty alphabet".into()));
        }
        for e in &edges {
            if e.src >= names.len() || e.dst >= names.len() {
                return Err(Error::InvalidParams(format!(
                    "edge {e:?} has an unknown endpoint"
                )));
            }
            if e.label == 0 || e.label > alphabet {
                return Err(Error::InvalidParams(format!(
                    "edge {e:?} label outside alphabet"
                )));
            }
        }
        for v in 0..names.len() {
            let mut seen = BTreeSet::new();
            for e in edges.iter().filter(|e| e.src == v) {
                if !seen.insert(e.label) {
                    return Err(Error::InvalidParams(format!(
                        "label {} repeated on out-edges of {}",
                        e.label, names[v]
                    )));
                }
            }
        }
        Ok(Self {
            names,
            alphabet,
            edges,
        })
    }

    /// Convenience constructor from `(src, dst, label)` triples over named
    /// vertices.
    pub fn from_named(
        names: &[&str],
        alphabet: usize,
        edges: &[(&str, &str, usize)],
    ) -> Result<Self> {
        let idx = |n: &str| {
            names
                .iter()
                .position(|m| *m == n)
                .ok_or_else(|| Error::InvalidParams(format!("unknown vertex {n}")))
        };
        let edges = edges
            .iter()
            .map(|&(s, d, label)| {
                Ok(Edge {
                    src: idx(s)?,
                    dst: idx(d)?,
                    label,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(
            names.iter().map(|s| s.to_string()).collect(),
            alphabet,
            edges,
        )
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn out_edges(&self, v: usize) -> impl Iterator<Item = (usize, &Edge)> {
        self.edges
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.src == v)
    }

    pub fn out_labels(&self, v: usize) -> BTreeSet<usize> {
        self.out_edges(v).map(|(_, e)| e.label).collect()
    }
}

impl Serialize for SimplicialGraph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct E<'a> {
            src: &'a str,
            dst: &'a str,
            label: usize,
        }
        #[derive(Serialize)]
        struct G<'a> {
            vertices: &'a [String],
            edges: Vec<E<'a>>,
        }
        G {
            vertices: &self.names,
            edges: self
                .edges
                .iter()
                .map(|e| E {
                    src: &self.names[e.src],
                    dst: &self.names[e.dst],
                    label: e.label,
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// The induction as a simplicial system on alphabet {1,2,3}. White vertices
/// `11` and `13` correspond to the states `P123` and `P213`; `22` is the
/// hole.
pub fn arc_graph() -> SimplicialGraph {
    SimplicialGraph::from_named(
        &["11", "13", "21", "22", "23"],
        3,
        &[
            ("11", "13", 1),
            ("13", "11", 2),
            ("11", "21", 3),
            ("13", "23", 3),
            ("21", "11", 2),
            ("23", "13", 1),
            ("21", "22", 1),
            ("23", "22", 2),
        ],
    )
    .expect("static graph is well formed")
}

pub fn edge_matrix(g: &SimplicialGraph, e: usize) -> Result<Mat3> {
    if g.alphabet != 3 {
        return Err(Error::InvalidParams(
            "edge matrices need a 3-letter alphabet".into(),
        ));
    }
    let edge = g
        .edges
        .get(e)
        .ok_or_else(|| Error::InvalidParams(format!("no edge {e}")))?;
    let mut rows = Mat3::identity().rows().clone();
    for alpha in g.out_labels(edge.src) {
        if alpha != edge.label {
            rows[alpha - 1][edge.label - 1] = BigInt::from(1);
        }
    }
    Ok(Mat3::from_rows(rows))
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WinLoseState {
    pub vertex: usize,
    pub point: LengthVector,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WinLoseOutcome {
    Moved {
        state: WinLoseState,
        edge: usize,
    },
    /// Tie between compared coordinates, or a zero compared coordinate.
    Degenerate,
    /// No out-edges.
    Sink,
}

pub fn win_lose_step(g: &SimplicialGraph, s: &WinLoseState) -> Result<WinLoseOutcome> {
    let outs: Vec<(usize, Edge)> = g.out_edges(s.vertex).map(|(i, e)| (i, *e)).collect();
    if outs.is_empty() {
        return Ok(WinLoseOutcome::Sink);
    }
    let lam = s.point.to_array();
    let chosen = if outs.len() == 1 {
        outs[0]
    } else {
        let coords: Vec<&Q> = outs.iter().map(|(_, e)| &lam[e.label - 1]).collect();
        if coords.iter().any(|x| x.is_zero()) {
            return Ok(WinLoseOutcome::Degenerate);
        }
        let min = *coords.iter().min().expect("nonempty");
        if coords.iter().filter(|x| **x == min).count() > 1 {
            return Ok(WinLoseOutcome::Degenerate);
        }
        outs[coords.iter().position(|x| *x == min).expect("present")]
    };
    let (idx, edge) = chosen;
    let inv = edge_matrix(g, idx)?
        .inverse_unimodular()
        .expect("unipotent");
    let w = inv.mul_qvec(&lam);
    if w.iter().any(|x| x.is_negative()) {
        return Ok(WinLoseOutcome::Degenerate);
    }
    Ok(WinLoseOutcome::Moved {
        state: WinLoseState {
            vertex: edge.dst,
            point: LengthVector::from_array(w)?,
        },
        edge: idx,
    })
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum FirstReturn {
    /// Reached a vertex in the target set after following `edges`, whose
    /// matrix product is `matrix`.
    Returned {
        state: WinLoseState,
        edges: Vec<usize>,
        matrix: Mat3,
    },
    Sink(Vec<usize>),
    Degenerate(Vec<usize>),
}

/// Runs the win-lose induction until it lands in `targets` (at least one
/// step), falls into a sink, or hits a tie.
pub fn first_return(
    g: &SimplicialGraph,
    s: &WinLoseState,
    targets: &[usize],
    max_steps: usize,
) -> Result<FirstReturn> {
    let mut cur = s.clone();
    let mut path = Vec::new();
    let mut m = Mat3::identity();
    for _ in 0..max_steps {
        match win_lose_step(g, &cur)? {
            WinLoseOutcome::Moved { state, edge } => {
                m = &m * &edge_matrix(g, edge)?;
                path.push(edge);
                cur = state;
                if targets.contains(&cur.vertex) {
                    return Ok(FirstReturn::Returned {
                        state: cur,
                        edges: path,
                        matrix: m,
                    });
                }
            }
            WinLoseOutcome::Sink => return Ok(FirstReturn::Sink(path)),
            WinLoseOutcome::Degenerate => return Ok(FirstReturn::Degenerate(path)),
        }
    }
    Err(Error::Budget(format!("no return within {max_steps} steps")))
}

/// All products of simple paths from `v` that reach `targets` without
/// visiting them in between, with their edge lists.
pub fn first_return_products(
    g: &SimplicialGraph,
    v: usize,
    targets: &[usize],
) -> Result<Vec<(Vec<usize>, Mat3)>> {
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<usize>, Mat3)> = vec![(v, Vec::new(), Mat3::identity())];
    while let Some((u, path, m)) = stack.pop() {
        for (i, e) in g.out_edges(u) {
            if path.len() > g.vertex_count() {
                continue;
            }
            let mut p = path.clone();
            p.push(i);
            let mm = &m * &edge_matrix(g, i)?;
            if targets.contains(&e.dst) {
                out.push((p, mm));
            } else {
                stack.push((e.dst, p, mm));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Cond2Failure {
    pub labels: Vec<usize>,
    pub vertex: String,
    pub component: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NonDegeneracyReport {
    pub holds: bool,
    pub subsets_checked: usize,
    pub failures: Vec<Cond2Failure>,
}

/// Strongly connected components of a graph given by adjacency lists.
pub fn strongly_connected_components(n: usize, arcs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, arcs.len());
    for _ in 0..n {
        g.add_node(());
    }
    for &(s, d) in arcs {
        g.add_edge(NodeIndex::new(s), NodeIndex::new(d), ());
    }
    let mut comps: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    comps.sort();
    comps
}

/// Combinatorial half of strong non-degeneracy: for every proper nonempty
/// label set `L`, each vertex of an SCC of `G_L` has at most one out-label in
/// `L` or an `L`-labelled path in `G` leaving its component.
pub fn check_strong_nondegeneracy_cond2(g: &SimplicialGraph) -> NonDegeneracyReport {
    let n = g.vertex_count();
    let full = (1usize << g.alphabet) - 1;
    let mut failures = Vec::new();
    let mut checked = 0;
    for mask in 1..full {
        checked += 1;
        let in_l = |label: usize| mask & (1 << (label - 1)) != 0;
        let mut arcs = Vec::new();
        for v in 0..n {
            let outs: Vec<&Edge> = g.out_edges(v).map(|(_, e)| e).collect();
            let restricted: Vec<&&Edge> = outs.iter().filter(|e| in_l(e.label)).collect();
            if restricted.is_empty() {
                arcs.extend(outs.iter().map(|e| (e.src, e.dst)));
            } else {
                arcs.extend(restricted.iter().map(|e| (e.src, e.dst)));
            }
        }
        for comp in strongly_connected_components(n, &arcs) {
            for &v in &comp {
                let hits = g.out_labels(v).into_iter().filter(|&l| in_l(l)).count();
                if hits <= 1 || escapes(g, v, &comp, &in_l) {
                    continue;
                }
                failures.push(Cond2Failure {
                    labels: (1..=g.alphabet).filter(|&l| in_l(l)).collect(),
                    vertex: g.names[v].clone(),
                    component: comp.iter().map(|&u| g.names[u].clone()).collect(),
                });
            }
        }
    }
    NonDegeneracyReport {
        holds: failures.is_empty(),
        subsets_checked: checked,
        failures,
    }
}

/// Is there a path from `v` in `g` using only labels in `L` that reaches a
/// vertex outside `comp`?
fn escapes(g: &SimplicialGraph, v: usize, comp: &[usize], in_l: &dyn Fn(usize) -> bool) -> bool {
    let mut seen = vec![false; g.vertex_count()];
    let mut queue = VecDeque::from([v]);
    seen[v] = true;
    while let Some(u) = queue.pop_front() {
        for (_, e) in g.out_edges(u) {
            if !in_l(e.label) {
                continue;
            }
            if !comp.contains(&e.dst) {
                return true;
            }
            if !seen[e.dst] {
                seen[e.dst] = true;
                queue.push_back(e.dst);
            }
        }
    }
    false
}
