//! Weighted agent-item graphs: filtering, merging, maximum matchings,
//! maximum-cardinality maximum-weight matchings and the `F_H(M, X̂)` set.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::value::Value;

/// Bipartite graph with item-side vertices `xs` (one item, or two after a
/// merge) and agent-side vertices `ys`. Vertices are addressed by local index.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueGraph {
    xs: Vec<Vec<usize>>,
    ys: Vec<usize>,
    w: Vec<Vec<Value>>,
    edge: Vec<Vec<bool>>,
}

/// A set of `(x, y)` local-index pairs, each vertex used at most once.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn weight(&self, g: &ValueGraph) -> Value {
        self.pairs.iter().map(|&(x, y)| g.weight(x, y).clone()).sum()
    }

    pub fn partner_of_x(&self, x: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.0 == x).map(|p| p.1)
    }

    pub fn partner_of_y(&self, y: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.1 == y).map(|p| p.0)
    }

    fn sorted(mut self) -> Self {
        self.pairs.sort_unstable();
        self
    }
}

impl ValueGraph {
    /// Complete graph with the given weights (`w[x][y]`).
    pub fn new(xs: Vec<Vec<usize>>, ys: Vec<usize>, w: Vec<Vec<Value>>) -> Self {
        let edge = vec![vec![true; ys.len()]; xs.len()];
        ValueGraph { xs, ys, w, edge }
    }

    /// Graph with an explicit edge set.
    pub fn with_edges(xs: Vec<Vec<usize>>, ys: Vec<usize>, w: Vec<Vec<Value>>, edge: Vec<Vec<bool>>) -> Self {
        ValueGraph { xs, ys, w, edge }
    }

    /// The value graph of `agents` over single `items`: `w(x_j, y_i) = V_i({b_j})`.
    pub fn from_instance(inst: &Instance, items: &[usize], agents: &[usize]) -> Self {
        let w = items
            .iter()
            .map(|&j| agents.iter().map(|&i| inst.item_value(i, j)).collect())
            .collect();
        ValueGraph::new(items.iter().map(|&j| vec![j]).collect(), agents.to_vec(), w)
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn x_items(&self, x: usize) -> &[usize] {
        &self.xs[x]
    }

    pub fn agent(&self, y: usize) -> usize {
        self.ys[y]
    }

    pub fn agents(&self) -> &[usize] {
        &self.ys
    }

    pub fn weight(&self, x: usize, y: usize) -> &Value {
        &self.w[x][y]
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.edge[x][y]
    }

    pub fn x_index(&self, items: &[usize]) -> Option<usize> {
        self.xs.iter().position(|v| v == items)
    }

    pub fn y_index(&self, agent: usize) -> Option<usize> {
        self.ys.iter().position(|&a| a == agent)
    }

    pub fn edge_count(&self) -> usize {
        self.edge.iter().flatten().filter(|&&e| e).count()
    }

    /// Agent-side neighbours of a set of item-side vertices, ascending.
    pub fn neighbors(&self, xset: &[usize]) -> Vec<usize> {
        (0..self.ny()).filter(|&y| xset.iter().any(|&x| self.edge[x][y])).collect()
    }

    /// Keeps edges of weight at least `beta`, then drops isolated vertices.
    pub fn filter(&self, beta: &Value) -> ValueGraph {
        let keep = |x: usize, y: usize| self.edge[x][y] && self.w[x][y] >= *beta;
        let xk: Vec<usize> = (0..self.nx()).filter(|&x| (0..self.ny()).any(|y| keep(x, y))).collect();
        let yk: Vec<usize> = (0..self.ny()).filter(|&y| (0..self.nx()).any(|x| keep(x, y))).collect();
        ValueGraph {
            xs: xk.iter().map(|&x| self.xs[x].clone()).collect(),
            ys: yk.iter().map(|&y| self.ys[y]).collect(),
            w: xk.iter().map(|&x| yk.iter().map(|&y| self.w[x][y].clone()).collect()).collect(),
            edge: xk.iter().map(|&x| yk.iter().map(|&y| keep(x, y)).collect()).collect(),
        }
    }

    /// Induced subgraph on the listed local vertices (order preserved).
    pub fn induced(&self, xk: &[usize], yk: &[usize]) -> ValueGraph {
        ValueGraph {
            xs: xk.iter().map(|&x| self.xs[x].clone()).collect(),
            ys: yk.iter().map(|&y| self.ys[y]).collect(),
            w: xk.iter().map(|&x| yk.iter().map(|&y| self.w[x][y].clone()).collect()).collect(),
            edge: xk.iter().map(|&x| yk.iter().map(|&y| self.edge[x][y]).collect()).collect(),
        }
    }

    /// Replaces two plain item vertices by one vertex whose weight for each
    /// agent is the sum of theirs. The merged vertex is appended last.
    pub fn merge(&self, xi: usize, xj: usize) -> Result<ValueGraph> {
        if xi == xj || xi >= self.nx() || xj >= self.nx() {
            return Err(Error::Input(format!("cannot merge vertices {xi} and {xj}")));
        }
        if self.xs[xi].len() != 1 || self.xs[xj].len() != 1 {
            return Err(Error::Unsupported("only plain item vertices can be merged".into()));
        }
        let mut out = ValueGraph { xs: Vec::new(), ys: self.ys.clone(), w: Vec::new(), edge: Vec::new() };
        for x in (0..self.nx()).filter(|&x| x != xi && x != xj) {
            out.xs.push(self.xs[x].clone());
            out.w.push(self.w[x].clone());
            out.edge.push(self.edge[x].clone());
        }
        let mut items = vec![self.xs[xi][0], self.xs[xj][0]];
        items.sort_unstable();
        out.xs.push(items);
        out.w.push((0..self.ny()).map(|y| &self.w[xi][y] + &self.w[xj][y]).collect());
        out.edge.push((0..self.ny()).map(|y| self.edge[xi][y] || self.edge[xj][y]).collect());
        Ok(out)
    }

    fn check_matching(&self, m: &Matching) -> Result<()> {
        let mut xu = vec![false; self.nx()];
        let mut yu = vec![false; self.ny()];
        for &(x, y) in &m.pairs {
            if x >= self.nx() || y >= self.ny() || !self.edge[x][y] {
                return Err(Error::Precondition(format!("({x}, {y}) is not an edge")));
            }
            if xu[x] || yu[y] {
                return Err(Error::Precondition("matching reuses a vertex".into()));
            }
            xu[x] = true;
            yu[y] = true;
        }
        Ok(())
    }
}

/// Maximum-cardinality matching by augmenting paths from agents in index order.
pub fn maximum_matching(g: &ValueGraph) -> Matching {
    let mut x_of_y: Vec<Option<usize>> = vec![None; g.ny()];
    let mut y_of_x: Vec<Option<usize>> = vec![None; g.nx()];
    fn augment(g: &ValueGraph, y: usize, seen: &mut [bool], x_of_y: &mut [Option<usize>], y_of_x: &mut [Option<usize>]) -> bool {
        for x in 0..g.nx() {
            if g.has_edge(x, y) && !seen[x] {
                seen[x] = true;
                if y_of_x[x].is_none_or(|y2| augment(g, y2, seen, x_of_y, y_of_x)) {
                    y_of_x[x] = Some(y);
                    x_of_y[y] = Some(x);
                    return true;
                }
            }
        }
        false
    }
    for y in 0..g.ny() {
        let mut seen = vec![false; g.nx()];
        augment(g, y, &mut seen, &mut x_of_y, &mut y_of_x);
    }
    Matching { pairs: y_of_x.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).collect() }
}

/// Successive shortest paths on the unit-capacity network
/// source → x → y → sink, with `cost(x, y)` on the middle arcs.
/// Returns a maximum flow of minimum total cost as a matching.
fn min_cost_max_matching(g: &ValueGraph, cost: impl Fn(usize, usize) -> Value) -> Matching {
    let (nx, ny) = (g.nx(), g.ny());
    let src = nx + ny;
    let sink = src + 1;
    let nodes = sink + 1;

    struct Arc {
        to: usize,
        cap: u8,
        cost: Value,
    }
    let mut arcs: Vec<Arc> = Vec::new();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    let mut add = |adj: &mut Vec<Vec<usize>>, u: usize, v: usize, c: Value| {
        adj[u].push(arcs.len());
        arcs.push(Arc { to: v, cap: 1, cost: c.clone() });
        adj[v].push(arcs.len());
        arcs.push(Arc { to: u, cap: 0, cost: -c });
    };
    for x in 0..nx {
        add(&mut adj, src, x, Value::zero());
    }
    for x in 0..nx {
        for y in 0..ny {
            if g.has_edge(x, y) {
                add(&mut adj, x, nx + y, cost(x, y));
            }
        }
    }
    for y in 0..ny {
        add(&mut adj, nx + y, sink, Value::zero());
    }

    // Initial potentials: exact shortest distances in the layered DAG.
    let mut pot: Vec<Value> = vec![Value::zero(); nodes];
    for y in 0..ny {
        pot[nx + y] = adj[nx + y]
            .iter()
            .filter(|&&a| arcs[a].cap == 0 && arcs[a].to < nx)
            .map(|&a| -arcs[a].cost.clone())
            .min()
            .unwrap_or_else(Value::zero);
    }
    pot[sink] = (0..ny).map(|y| pot[nx + y].clone()).min().unwrap_or_else(Value::zero);

    loop {
        // Dijkstra on reduced costs, lowest node index first among ties.
        let mut dist: Vec<Option<Value>> = vec![None; nodes];
        let mut prev: Vec<Option<usize>> = vec![None; nodes];
        let mut done = vec![false; nodes];
        dist[src] = Some(Value::zero());
        loop {
            let u = (0..nodes)
                .filter(|&u| !done[u] && dist[u].is_some())
                .min_by(|&a, &b| dist[a].cmp(&dist[b]).then(a.cmp(&b)));
            let Some(u) = u else { break };
            done[u] = true;
            let du = dist[u].clone().unwrap();
            for &a in &adj[u] {
                let arc = &arcs[a];
                if arc.cap == 0 || done[arc.to] {
                    continue;
                }
                let nd = &du + &arc.cost + &pot[u] - &pot[arc.to];
                if dist[arc.to].as_ref().is_none_or(|d| nd < *d) {
                    dist[arc.to] = Some(nd);
                    prev[arc.to] = Some(a);
                }
            }
        }
        let Some(_) = dist[sink] else { break };
        for v in 0..nodes {
            if let Some(d) = &dist[v] {
                pot[v] = &pot[v] + d;
            }
        }
        let mut v = sink;
        while v != src {
            let a = prev[v].unwrap();
            arcs[a].cap -= 1;
            arcs[a ^ 1].cap += 1;
            v = arcs[a ^ 1].to;
        }
    }

    let mut pairs = Vec::new();
    for x in 0..nx {
        for &a in &adj[x] {
            let arc = &arcs[a];
            if a % 2 == 0 && arc.to >= nx && arc.to < nx + ny && arc.cap == 0 {
                pairs.push((x, arc.to - nx));
            }
        }
    }
    Matching { pairs }.sorted()
}

/// Maximum-cardinality matching of maximum total weight.
pub fn mcmwm(g: &ValueGraph) -> Matching {
    min_cost_max_matching(g, |x, y| -g.weight(x, y).clone())
}

/// Maximum matching saturating every item-side vertex while minimizing the sum
/// of matched agents' positions.
pub fn min_position_matching(g: &ValueGraph, positions: &[usize]) -> Result<Matching> {
    if positions.len() != g.ny() {
        return Err(Error::Input(format!("expected {} positions, found {}", g.ny(), positions.len())));
    }
    let m = min_cost_max_matching(g, |_, y| Value::int(positions[y] as i64));
    if m.len() < g.nx() {
        return Err(Error::Infeasible(format!(
            "no matching saturates all {} item vertices (best {})",
            g.nx(),
            m.len()
        )));
    }
    Ok(m)
}

/// `F_H(M, X̂)`: the vertices of `xside` not matched to an agent reachable by
/// an alternating path from an unsaturated agent.
pub fn compute_f(g: &ValueGraph, m: &Matching, xside: &[usize]) -> Result<Vec<usize>> {
    g.check_matching(m)?;
    if m.len() < maximum_matching(g).len() {
        return Err(Error::Precondition("matching is not maximum".into()));
    }
    let mut x_of_y: Vec<Option<usize>> = vec![None; g.ny()];
    let mut y_of_x: Vec<Option<usize>> = vec![None; g.nx()];
    for &(x, y) in &m.pairs {
        x_of_y[y] = Some(x);
        y_of_x[x] = Some(y);
    }
    let mut reached = vec![false; g.ny()];
    let mut queue = VecDeque::new();
    for y in 0..g.ny() {
        if x_of_y[y].is_none() {
            reached[y] = true;
            queue.push_back(y);
        }
    }
    while let Some(y) = queue.pop_front() {
        for x in 0..g.nx() {
            if g.has_edge(x, y) && x_of_y[y] != Some(x) {
                if let Some(y2) = y_of_x[x] {
                    if !reached[y2] {
                        reached[y2] = true;
                        queue.push_back(y2);
                    }
                }
            }
        }
    }
    Ok(xside
        .iter()
        .copied()
        .filter(|&x| y_of_x[x].is_none_or(|y| !reached[y]))
        .collect())
}
