//! Map-equation community detection over the directed weighted
//! similarity network.
//!
//! A random walk with uniform teleportation is run over the network; the
//! per-node visit rates and per-edge flows feed the two-level map
//! equation, which scores a partition by the expected description length
//! of the walk in bits. A greedy Louvain-style search minimizes that
//! codelength, and the search is re-applied inside each module (with flow
//! re-normalized to the module's induced subnetwork) to produce a
//! hierarchy of stories and sub-stories. Teleportation steps are recorded
//! in the flows, so every node of a non-trivial network has positive
//! exit flow.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use crate::simnet::SimilarityNetwork;

const MOVE_EPSILON: f64 = 1e-10;
const POWER_TOLERANCE: f64 = 1e-12;
const POWER_MAX_ITER: usize = 1000;

/// Directed graph with weight-normalized transition probabilities.
#[derive(Debug, Clone)]
pub struct FlowGraph {
    n: usize,
    /// out\[u] = (v, w_uv / Σ_x w_ux)
    out: Vec<Vec<(u32, f64)>>,
    /// inn\[v] = (u, transition probability of u→v)
    inn: Vec<Vec<(u32, f64)>>,
    /// node has at least one in- or out-link
    linked: Vec<bool>,
    /// node has no out-links (walker teleports uniformly)
    dangling: Vec<bool>,
    n_edges: usize,
}

impl FlowGraph {
    pub fn from_edges(n: usize, edges: &[(u32, u32, f64)]) -> FlowGraph {
        let mut weight_out: Vec<f64> = vec![0.0; n];
        for &(u, _, w) in edges {
            weight_out[u as usize] += w;
        }
        let mut out: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut inn: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut linked = vec![false; n];
        for &(u, v, w) in edges {
            if u == v || w <= 0.0 {
                continue;
            }
            let p = w / weight_out[u as usize];
            out[u as usize].push((v, p));
            inn[v as usize].push((u, p));
            linked[u as usize] = true;
            linked[v as usize] = true;
        }
        let dangling: Vec<bool> = out.iter().map(|o| o.is_empty()).collect();
        let n_edges = edges.len();
        FlowGraph {
            n,
            out,
            inn,
            linked,
            dangling,
            n_edges,
        }
    }

    pub fn from_network(net: &SimilarityNetwork) -> FlowGraph {
        let edges: Vec<(u32, u32, f64)> =
            net.edges.iter().map(|e| (e.from, e.to, e.ensemble)).collect();
        FlowGraph::from_edges(net.n_nodes(), &edges)
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn is_linked(&self, u: usize) -> bool {
        self.linked[u]
    }
}

/// Stationary visit probabilities of the teleporting walk.
#[derive(Debug, Clone)]
pub struct VisitRates {
    pub p: Vec<f64>,
}

/// Power iteration on the weight-normalized walk with uniform
/// teleportation. Dangling nodes jump uniformly. Converges to an L1
/// residual below 1e-12 or stops after 1000 iterations.
pub fn visit_rates(graph: &FlowGraph, teleport: f64) -> VisitRates {
    let n = graph.n;
    if n == 0 {
        return VisitRates { p: Vec::new() };
    }
    let uniform = 1.0 / n as f64;
    let mut p = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_MAX_ITER {
        // teleport mass: full probability from dangling nodes, `teleport`
        // from the rest
        let mut tele_mass = 0.0;
        for u in 0..n {
            tele_mass += p[u] * if graph.dangling[u] { 1.0 } else { teleport };
        }
        let base = tele_mass * uniform;
        for x in next.iter_mut() {
            *x = base;
        }
        for u in 0..n {
            if graph.dangling[u] {
                continue;
            }
            let mass = p[u] * (1.0 - teleport);
            for &(v, prob) in &graph.out[u] {
                next[v as usize] += mass * prob;
            }
        }
        let residual: f64 = p.iter().zip(next.iter()).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if residual < POWER_TOLERANCE {
            break;
        }
    }
    // guard against accumulated drift
    let total: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x /= total;
    }
    VisitRates { p }
}

fn plogp(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Default)]
struct ModuleStats {
    n: usize,
    sum_p: f64,
    /// Σ p_u · τ_u over members (τ = teleport rate, 1 for dangling)
    pt: f64,
    /// Σ p_u · (1−τ_u) over members (link-following mass)
    pl: f64,
    /// flow along links between members
    internal: f64,
}

impl ModuleStats {
    fn exit_flow(&self, n_total: usize) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        let tele_exit = self.pt * (n_total - self.n) as f64 / n_total as f64;
        // pl − internal = link flow leaving the module
        (tele_exit + self.pl - self.internal).max(0.0)
    }
}

/// Incremental map-equation bookkeeping over a mutable partition.
struct MapState<'g> {
    g: &'g FlowGraph,
    p: &'g [f64],
    /// per-node teleport rate (1 for dangling nodes)
    tele: Vec<f64>,
    /// p_u · (1−τ_u): mass that follows links out of u
    link_mass: Vec<f64>,
    assignment: Vec<usize>,
    members: Vec<Vec<u32>>,
    modules: Vec<ModuleStats>,
    q_tot: f64,
    sum_plogp_q: f64,
    sum_plogp_qp: f64,
    const_term: f64,
}

impl<'g> MapState<'g> {
    fn new(g: &'g FlowGraph, rates: &'g VisitRates, teleport: f64, assignment: &[usize]) -> MapState<'g> {
        let n = g.n;
        let p = &rates.p;
        let tele: Vec<f64> = (0..n).map(|u| if g.dangling[u] { 1.0 } else { teleport }).collect();
        let link_mass: Vec<f64> = (0..n).map(|u| p[u] * (1.0 - tele[u])).collect();
        let n_modules = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut modules = vec![ModuleStats::default(); n_modules];
        let mut members = vec![Vec::new(); n_modules];
        for u in 0..n {
            let m = assignment[u];
            modules[m].n += 1;
            modules[m].sum_p += p[u];
            modules[m].pt += p[u] * tele[u];
            modules[m].pl += link_mass[u];
            members[m].push(u as u32);
        }
        for u in 0..n {
            let m = assignment[u];
            for &(v, prob) in &g.out[u] {
                if assignment[v as usize] == m {
                    modules[m].internal += link_mass[u] * prob;
                }
            }
        }
        let const_term: f64 = p.iter().map(|&x| plogp(x)).sum();
        let mut state = MapState {
            g,
            p,
            tele,
            link_mass,
            assignment: assignment.to_vec(),
            members,
            modules,
            q_tot: 0.0,
            sum_plogp_q: 0.0,
            sum_plogp_qp: 0.0,
            const_term,
        };
        state.recompute_sums();
        state
    }

    fn recompute_sums(&mut self) {
        self.q_tot = 0.0;
        self.sum_plogp_q = 0.0;
        self.sum_plogp_qp = 0.0;
        for m in &self.modules {
            if m.n == 0 {
                continue;
            }
            let q = m.exit_flow(self.g.n);
            self.q_tot += q;
            self.sum_plogp_q += plogp(q);
            self.sum_plogp_qp += plogp(q + m.sum_p);
        }
    }

    fn codelength(&self) -> f64 {
        plogp(self.q_tot) - 2.0 * self.sum_plogp_q + self.sum_plogp_qp - self.const_term
    }

    /// Flows between node u and the members of each adjacent module:
    /// module → (flow u→module, flow module→u).
    fn neighbor_flows(&self, u: usize) -> BTreeMap<usize, (f64, f64)> {
        let mut flows: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for &(v, prob) in &self.g.out[u] {
            let m = self.assignment[v as usize];
            flows.entry(m).or_default().0 += self.link_mass[u] * prob;
        }
        for &(v, prob) in &self.g.inn[u] {
            let m = self.assignment[v as usize];
            flows.entry(m).or_default().1 += self.link_mass[v as usize] * prob;
        }
        flows
    }

    /// Codelength change if node u moves from its module to `target`.
    /// `flows` must come from `neighbor_flows(u)`.
    fn move_delta(&self, u: usize, target: usize, flows: &BTreeMap<usize, (f64, f64)>) -> f64 {
        let src = self.assignment[u];
        debug_assert_ne!(src, target);
        let n_total = self.g.n;
        let (p_u, pt_u, pl_u) = (self.p[u], self.p[u] * self.tele[u], self.link_mass[u]);
        let (u_to_src, src_to_u) = flows.get(&src).copied().unwrap_or((0.0, 0.0));
        let (u_to_tgt, tgt_to_u) = flows.get(&target).copied().unwrap_or((0.0, 0.0));

        let a = &self.modules[src];
        let b = &self.modules[target];
        let q_a = a.exit_flow(n_total);
        let q_b = b.exit_flow(n_total);

        let a_new = ModuleStats {
            n: a.n - 1,
            sum_p: a.sum_p - p_u,
            pt: a.pt - pt_u,
            pl: a.pl - pl_u,
            internal: a.internal - u_to_src - src_to_u,
        };
        let b_new = ModuleStats {
            n: b.n + 1,
            sum_p: b.sum_p + p_u,
            pt: b.pt + pt_u,
            pl: b.pl + pl_u,
            internal: b.internal + u_to_tgt + tgt_to_u,
        };
        let q_a_new = a_new.exit_flow(n_total);
        let q_b_new = b_new.exit_flow(n_total);
        let q_tot_new = self.q_tot - q_a - q_b + q_a_new + q_b_new;

        (plogp(q_tot_new) - plogp(self.q_tot))
            - 2.0 * (plogp(q_a_new) + plogp(q_b_new) - plogp(q_a) - plogp(q_b))
            + (plogp(q_a_new + a_new.sum_p) + plogp(q_b_new + b_new.sum_p)
                - plogp(q_a + a.sum_p)
                - plogp(q_b + b.sum_p))
    }

    fn apply_move(&mut self, u: usize, target: usize, flows: &BTreeMap<usize, (f64, f64)>) {
        let src = self.assignment[u];
        let n_total = self.g.n;
        let (p_u, pt_u, pl_u) = (self.p[u], self.p[u] * self.tele[u], self.link_mass[u]);
        let (u_to_src, src_to_u) = flows.get(&src).copied().unwrap_or((0.0, 0.0));
        let (u_to_tgt, tgt_to_u) = flows.get(&target).copied().unwrap_or((0.0, 0.0));

        for m in [src, target] {
            let q = self.modules[m].exit_flow(n_total);
            self.q_tot -= q;
            self.sum_plogp_q -= plogp(q);
            self.sum_plogp_qp -= plogp(q + self.modules[m].sum_p);
        }

        {
            let a = &mut self.modules[src];
            a.n -= 1;
            a.sum_p -= p_u;
            a.pt -= pt_u;
            a.pl -= pl_u;
            a.internal -= u_to_src + src_to_u;
        }
        {
            let b = &mut self.modules[target];
            b.n += 1;
            b.sum_p += p_u;
            b.pt += pt_u;
            b.pl += pl_u;
            b.internal += u_to_tgt + tgt_to_u;
        }

        let pos = self.members[src].iter().position(|&x| x as usize == u).unwrap();
        self.members[src].swap_remove(pos);
        self.members[target].push(u as u32);
        self.assignment[u] = target;

        for m in [src, target] {
            if self.modules[m].n == 0 {
                continue;
            }
            let q = self.modules[m].exit_flow(n_total);
            self.q_tot += q;
            self.sum_plogp_q += plogp(q);
            self.sum_plogp_qp += plogp(q + self.modules[m].sum_p);
        }
    }

    /// Finds or creates an empty module slot.
    fn empty_module(&mut self) -> usize {
        if let Some(i) = self.modules.iter().position(|m| m.n == 0) {
            return i;
        }
        self.modules.push(ModuleStats::default());
        self.members.push(Vec::new());
        self.modules.len() - 1
    }

    /// Flows from module `src` to each adjacent module (and back).
    fn module_flows(&self, src: usize) -> BTreeMap<usize, (f64, f64)> {
        let mut flows: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for &u in &self.members[src] {
            let u = u as usize;
            for &(v, prob) in &self.g.out[u] {
                let m = self.assignment[v as usize];
                if m != src {
                    flows.entry(m).or_default().0 += self.link_mass[u] * prob;
                }
            }
            for &(v, prob) in &self.g.inn[u] {
                let m = self.assignment[v as usize];
                if m != src {
                    flows.entry(m).or_default().1 += self.link_mass[v as usize] * prob;
                }
            }
        }
        flows
    }

    /// Codelength change if all of module `src` merges into `target`.
    fn merge_delta(&self, src: usize, target: usize, flows: &BTreeMap<usize, (f64, f64)>) -> f64 {
        let n_total = self.g.n;
        let (src_to_tgt, tgt_to_src) = flows.get(&target).copied().unwrap_or((0.0, 0.0));
        let a = &self.modules[src];
        let b = &self.modules[target];
        let q_a = a.exit_flow(n_total);
        let q_b = b.exit_flow(n_total);
        let merged = ModuleStats {
            n: a.n + b.n,
            sum_p: a.sum_p + b.sum_p,
            pt: a.pt + b.pt,
            pl: a.pl + b.pl,
            internal: a.internal + b.internal + src_to_tgt + tgt_to_src,
        };
        let q_m = merged.exit_flow(n_total);
        let q_tot_new = self.q_tot - q_a - q_b + q_m;
        (plogp(q_tot_new) - plogp(self.q_tot))
            - 2.0 * (plogp(q_m) - plogp(q_a) - plogp(q_b))
            + (plogp(q_m + merged.sum_p) - plogp(q_a + a.sum_p) - plogp(q_b + b.sum_p))
    }

    fn apply_merge(&mut self, src: usize, target: usize) {
        let moves: Vec<u32> = self.members[src].clone();
        for u in moves {
            let flows = self.neighbor_flows(u as usize);
            self.apply_move(u as usize, target, &flows);
        }
    }
}

/// Two-level map-equation codelength (bits) of a partition.
/// `partition[u]` is the module of node u; the partition must cover all
/// nodes.
pub fn map_equation(graph: &FlowGraph, rates: &VisitRates, partition: &[usize], teleport: f64) -> f64 {
    assert_eq!(partition.len(), graph.n);
    MapState::new(graph, rates, teleport, partition).codelength()
}

fn compact(assignment: &[usize]) -> Vec<usize> {
    let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
    let mut result = Vec::with_capacity(assignment.len());
    for &m in assignment {
        let next = remap.len();
        result.push(*remap.entry(m).or_insert(next));
    }
    result
}

fn optimize_once(
    graph: &FlowGraph,
    rates: &VisitRates,
    teleport: f64,
    seed: u64,
) -> (Vec<usize>, f64) {
    let n = graph.n;
    let singletons: Vec<usize> = (0..n).collect();
    let mut state = MapState::new(graph, rates, teleport, &singletons);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // nodes without links never move and never receive neighbors
    let movable: Vec<u32> = (0..n as u32).filter(|&u| graph.linked[u as usize]).collect();

    loop {
        let mut outer_improved = false;

        // single-node sweeps
        loop {
            let mut order = movable.clone();
            order.shuffle(&mut rng);
            let mut improved = false;
            for &u in &order {
                let u = u as usize;
                let src = state.assignment[u];
                let flows = state.neighbor_flows(u);
                let mut best: Option<(f64, usize)> = None;
                for (&m, _) in flows.iter() {
                    if m == src {
                        continue;
                    }
                    let delta = state.move_delta(u, m, &flows);
                    if delta < -MOVE_EPSILON && best.map_or(true, |(bd, _)| delta < bd - 1e-15) {
                        best = Some((delta, m));
                    }
                }
                // splitting out into a fresh module
                if state.modules[src].n > 1 {
                    let fresh = state.empty_module();
                    let delta = state.move_delta(u, fresh, &flows);
                    if delta < -MOVE_EPSILON && best.map_or(true, |(bd, _)| delta < bd - 1e-15) {
                        best = Some((delta, fresh));
                    }
                }
                if let Some((_, target)) = best {
                    state.apply_move(u, target, &flows);
                    improved = true;
                    outer_improved = true;
                }
            }
            if !improved {
                break;
            }
        }

        // module-level merges (aggregated moves)
        loop {
            let mut module_ids: Vec<usize> = (0..state.modules.len())
                .filter(|&m| state.modules[m].n > 0 && state.members[m].iter().any(|&u| graph.linked[u as usize]))
                .collect();
            module_ids.shuffle(&mut rng);
            let mut improved = false;
            for src in module_ids {
                if state.modules[src].n == 0 {
                    continue;
                }
                let flows = state.module_flows(src);
                let mut best: Option<(f64, usize)> = None;
                for (&m, _) in flows.iter() {
                    if m == src || state.modules[m].n == 0 {
                        continue;
                    }
                    let delta = state.merge_delta(src, m, &flows);
                    if delta < -MOVE_EPSILON && best.map_or(true, |(bd, _)| delta < bd - 1e-15) {
                        best = Some((delta, m));
                    }
                }
                if let Some((_, target)) = best {
                    state.apply_merge(src, target);
                    improved = true;
                    outer_improved = true;
                }
            }
            if !improved {
                break;
            }
        }

        if !outer_improved {
            break;
        }
    }

    let assignment = compact(&state.assignment);
    let codelength = map_equation(graph, rates, &assignment, teleport);
    (assignment, codelength)
}

const OPTIMIZER_RESTARTS: u64 = 4;

/// Greedy codelength minimization: restarted sweeps of single-node moves
/// followed by module merges, accepting only strict improvements.
/// Deterministic for a given seed. Isolated nodes stay singletons; the
/// result never has a higher codelength than grouping all linked nodes
/// into one module.
pub fn optimize_partition(graph: &FlowGraph, rates: &VisitRates, teleport: f64, seed: u64) -> Vec<usize> {
    let n = graph.n;
    if n == 0 {
        return Vec::new();
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for r in 0..OPTIMIZER_RESTARTS {
        let (assignment, codelength) = optimize_once(graph, rates, teleport, seed.wrapping_add(r));
        if best.as_ref().map_or(true, |(_, bl)| codelength < bl - 1e-12) {
            best = Some((assignment, codelength));
        }
    }
    let (mut assignment, codelength) = best.unwrap();

    // fallback: all linked nodes in one module, isolated nodes singleton
    if graph.n_edges > 0 {
        let mut one = Vec::with_capacity(n);
        let mut next = 1usize;
        for u in 0..n {
            if graph.linked[u] {
                one.push(0);
            } else {
                one.push(next);
                next += 1;
            }
        }
        let one_codelength = map_equation(graph, rates, &one, teleport);
        if one_codelength < codelength - MOVE_EPSILON {
            assignment = compact(&one);
        }
    }
    assignment
}

/// Hierarchical partition: stories, sub-stories and singleton articles.
#[derive(Debug, Clone)]
pub enum TreeNode {
    Module(ModuleNode),
    Leaf(u32),
}

#[derive(Debug, Clone)]
pub struct ModuleNode {
    pub children: Vec<TreeNode>,
    /// number of leaf articles under this module
    pub size: usize,
    /// codelength (bits) of this module's internal description: the map
    /// equation of its kept sub-partition on the induced subnetwork, or
    /// the visit-rate entropy when the module is not subdivided
    pub codelength: f64,
}

#[derive(Debug, Clone)]
pub struct ClusterTree {
    /// top-level modules (singleton articles appear as 1-leaf modules)
    pub roots: Vec<ModuleNode>,
    /// two-level map-equation codelength of the top-level partition
    pub codelength: f64,
}

impl TreeNode {
    fn leaves_into(&self, acc: &mut Vec<u32>) {
        match self {
            TreeNode::Leaf(x) => acc.push(*x),
            TreeNode::Module(m) => {
                for c in &m.children {
                    c.leaves_into(acc);
                }
            }
        }
    }

    pub fn leaves(&self) -> Vec<u32> {
        let mut acc = Vec::new();
        self.leaves_into(&mut acc);
        acc
    }

    fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Module(m) => 1 + m.children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }
}

impl ClusterTree {
    /// Leaf sets of the top-level modules.
    pub fn top_level_clusters(&self) -> Vec<Vec<u32>> {
        self.roots
            .iter()
            .map(|m| {
                let mut acc = Vec::new();
                for c in &m.children {
                    c.leaves_into(&mut acc);
                }
                acc
            })
            .collect()
    }

    /// Leaf sets of the deepest modules (modules with no sub-modules).
    pub fn leaf_level_clusters(&self) -> Vec<Vec<u32>> {
        fn walk(m: &ModuleNode, acc: &mut Vec<Vec<u32>>) {
            let has_sub = m.children.iter().any(|c| matches!(c, TreeNode::Module(_)));
            if !has_sub {
                acc.push(m.children.iter().flat_map(|c| c.leaves()).collect());
            } else {
                for c in &m.children {
                    match c {
                        TreeNode::Module(sub) => walk(sub, acc),
                        TreeNode::Leaf(x) => acc.push(vec![*x]),
                    }
                }
            }
        }
        let mut acc = Vec::new();
        for m in &self.roots {
            walk(m, &mut acc);
        }
        acc
    }

    pub fn depth(&self) -> usize {
        self.roots.iter().map(|m| 1 + m.children.iter().map(|c| c.depth()).max().unwrap_or(0)).max().unwrap_or(0)
    }

    /// One line per article: colon-separated path of 1-based child
    /// positions down the tree, then the article id.
    pub fn render(&self, ids: &[String]) -> String {
        fn walk(node: &ModuleNode, prefix: &str, ids: &[String], out: &mut String) {
            for (i, child) in node.children.iter().enumerate() {
                let path = format!("{prefix}:{}", i + 1);
                match child {
                    TreeNode::Leaf(x) => {
                        out.push_str(&path);
                        out.push(' ');
                        out.push_str(&ids[*x as usize]);
                        out.push('\n');
                    }
                    TreeNode::Module(m) => walk(m, &path, ids, out),
                }
            }
        }
        let mut out = String::new();
        for (i, root) in self.roots.iter().enumerate() {
            walk(root, &(i + 1).to_string(), ids, &mut out);
        }
        out
    }
}

/// Entropy (bits) of the normalized visit rates of a node set; the
/// description cost of the set as a single undivided module.
fn module_entropy(p: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    -p.iter().filter(|&&x| x > 0.0).map(|&x| (x / total) * (x / total).log2()).sum::<f64>()
}

fn build_subtree(
    nodes: &[u32],
    edges: &[(u32, u32, f64)],
    teleport: f64,
    seed: u64,
    ids: &[String],
) -> ModuleNode {
    // map to local indices
    let local: BTreeMap<u32, u32> = nodes.iter().enumerate().map(|(i, &x)| (x, i as u32)).collect();
    let local_edges: Vec<(u32, u32, f64)> = edges
        .iter()
        .filter_map(|&(u, v, w)| match (local.get(&u), local.get(&v)) {
            (Some(&lu), Some(&lv)) => Some((lu, lv, w)),
            _ => None,
        })
        .collect();
    let graph = FlowGraph::from_edges(nodes.len(), &local_edges);
    let rates = visit_rates(&graph, teleport);
    let single_cost = module_entropy(&rates.p);

    if nodes.len() >= 2 && !local_edges.is_empty() {
        let partition = optimize_partition(&graph, &rates, teleport, seed);
        let n_modules = partition.iter().copied().max().unwrap_or(0) + 1;
        if n_modules > 1 {
            let sub_cost = map_equation(&graph, &rates, &partition, teleport);
            if sub_cost < single_cost - MOVE_EPSILON {
                // keep the split and recurse into each sub-module
                let mut groups: Vec<Vec<u32>> = vec![Vec::new(); n_modules];
                for (li, &m) in partition.iter().enumerate() {
                    groups[m].push(nodes[li as usize]);
                }
                let mut children: Vec<TreeNode> = groups
                    .iter()
                    .enumerate()
                    .map(|(gi, group)| {
                        if group.len() == 1 {
                            TreeNode::Leaf(group[0])
                        } else {
                            TreeNode::Module(build_subtree(
                                group,
                                edges,
                                teleport,
                                derive_seed(seed, gi as u64 + 1),
                                ids,
                            ))
                        }
                    })
                    .collect();
                sort_children(&mut children, ids);
                return ModuleNode {
                    children,
                    size: nodes.len(),
                    codelength: sub_cost,
                };
            }
        }
    }

    let mut children: Vec<TreeNode> = nodes.iter().map(|&x| TreeNode::Leaf(x)).collect();
    sort_children(&mut children, ids);
    ModuleNode {
        children,
        size: nodes.len(),
        codelength: single_cost,
    }
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    // splitmix64 step keeps sub-problems decorrelated but deterministic
    let mut z = seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn node_min_id<'a>(node: &TreeNode, ids: &'a [String]) -> &'a str {
    match node {
        TreeNode::Leaf(x) => &ids[*x as usize],
        TreeNode::Module(m) => m
            .children
            .iter()
            .map(|c| node_min_id(c, ids))
            .min()
            .unwrap_or(""),
    }
}

fn node_size(node: &TreeNode) -> usize {
    match node {
        TreeNode::Leaf(_) => 1,
        TreeNode::Module(m) => m.size,
    }
}

fn sort_children(children: &mut [TreeNode], ids: &[String]) {
    children.sort_by(|a, b| {
        node_size(b)
            .cmp(&node_size(a))
            .then_with(|| node_min_id(a, ids).cmp(node_min_id(b, ids)))
    });
}

/// Full hierarchical clustering of a similarity network: top-level
/// partition by codelength minimization, then recursive re-partitioning
/// inside every module whose induced subnetwork compresses further.
pub fn hierarchical_cluster(net: &SimilarityNetwork, teleport: f64, seed: u64) -> ClusterTree {
    let n = net.n_nodes();
    if n == 0 {
        return ClusterTree {
            roots: Vec::new(),
            codelength: 0.0,
        };
    }
    let graph = FlowGraph::from_network(net);
    let rates = visit_rates(&graph, teleport);
    let partition = optimize_partition(&graph, &rates, teleport, seed);
    let codelength = map_equation(&graph, &rates, &partition, teleport);

    let n_modules = partition.iter().copied().max().unwrap_or(0) + 1;
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); n_modules];
    for (u, &m) in partition.iter().enumerate() {
        groups[m].push(u as u32);
    }
    let edges: Vec<(u32, u32, f64)> =
        net.edges.iter().map(|e| (e.from, e.to, e.ensemble)).collect();

    let mut roots: Vec<ModuleNode> = groups
        .iter()
        .enumerate()
        .map(|(gi, group)| build_subtree(group, &edges, teleport, derive_seed(seed, gi as u64 + 101), &net.ids))
        .collect();
    roots.sort_by(|a, b| {
        b.size.cmp(&a.size).then_with(|| {
            a.children
                .iter()
                .map(|c| node_min_id(c, &net.ids))
                .min()
                .unwrap_or("")
                .cmp(b.children.iter().map(|c| node_min_id(c, &net.ids)).min().unwrap_or(""))
        })
    });
    ClusterTree { roots, codelength }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym_edges(pairs: &[(u32, u32)], w: f64) -> Vec<(u32, u32, f64)> {
        pairs
            .iter()
            .flat_map(|&(a, b)| vec![(a, b, w), (b, a, w)])
            .collect()
    }

    #[test]
    fn visit_rates_symmetric_pair() {
        let g = FlowGraph::from_edges(2, &sym_edges(&[(0, 1)], 1.0));
        let r = visit_rates(&g, 0.15);
        assert!((r.p[0] - 0.5).abs() < 1e-12);
        assert!((r.p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn visit_rates_edgeless_uniform() {
        let g = FlowGraph::from_edges(5, &[]);
        let r = visit_rates(&g, 0.15);
        for x in &r.p {
            assert!((x - 0.2).abs() < 1e-12);
        }
    }

    #[test]
    fn visit_rates_sum_to_one() {
        let g = FlowGraph::from_edges(
            6,
            &[(0, 1, 0.9), (1, 2, 0.5), (2, 0, 0.7), (3, 4, 0.4), (4, 3, 0.4), (0, 3, 0.1)],
        );
        let r = visit_rates(&g, 0.15);
        let total: f64 = r.p.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(r.p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn one_module_has_no_index_term() {
        let g = FlowGraph::from_edges(4, &sym_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)], 1.0));
        let r = visit_rates(&g, 0.15);
        let all_one = vec![0usize; 4];
        let l = map_equation(&g, &r, &all_one, 0.15);
        // with a single module the codelength is exactly the visit entropy
        let entropy = module_entropy(&r.p);
        assert!((l - entropy).abs() < 1e-12);
    }

    /// Definitional form of the map equation, used as an independent
    /// oracle: L = q·H(Q) + Σ_i p_i↻·H(P_i).
    fn map_equation_definitional(
        g: &FlowGraph,
        rates: &VisitRates,
        partition: &[usize],
        teleport: f64,
    ) -> f64 {
        let n = g.n_nodes();
        let n_modules = partition.iter().copied().max().unwrap_or(0) + 1;
        let tele: Vec<f64> = (0..n).map(|u| if g.dangling[u] { 1.0 } else { teleport }).collect();
        // exit flow per module, computed from scratch
        let mut exits = vec![0.0; n_modules];
        let mut sum_p = vec![0.0; n_modules];
        let mut counts = vec![0usize; n_modules];
        for u in 0..n {
            let m = partition[u];
            sum_p[m] += rates.p[u];
            counts[m] += 1;
        }
        for u in 0..n {
            let m = partition[u];
            // teleport exits
            exits[m] += rates.p[u] * tele[u] * (n - counts[m]) as f64 / n as f64;
            // link exits
            for &(v, prob) in &g.out[u] {
                if partition[v as usize] != m {
                    exits[m] += rates.p[u] * (1.0 - tele[u]) * prob;
                }
            }
        }
        let q: f64 = exits.iter().sum();
        let entropy = |probs: &[f64]| -> f64 {
            let total: f64 = probs.iter().sum();
            if total <= 0.0 {
                return 0.0;
            }
            -probs
                .iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| (x / total) * (x / total).log2())
                .sum::<f64>()
        };
        let index_term = q * entropy(&exits);
        let mut module_term = 0.0;
        for m in 0..n_modules {
            if counts[m] == 0 {
                continue;
            }
            let mut probs: Vec<f64> = partition
                .iter()
                .enumerate()
                .filter(|&(_, &pm)| pm == m)
                .map(|(u, _)| rates.p[u])
                .collect();
            probs.push(exits[m]);
            let around = sum_p[m] + exits[m];
            module_term += around * entropy(&probs);
        }
        index_term + module_term
    }

    #[test]
    fn expanded_form_matches_definitional_form() {
        let g = FlowGraph::from_edges(
            6,
            &[
                (0, 1, 1.0),
                (1, 0, 0.5),
                (1, 2, 0.5),
                (2, 0, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 3, 1.0),
                (2, 3, 0.2),
            ],
        );
        let r = visit_rates(&g, 0.15);
        for partition in [
            vec![0, 0, 0, 1, 1, 1],
            vec![0, 0, 0, 0, 0, 0],
            vec![0, 1, 2, 3, 4, 5],
            vec![0, 0, 1, 1, 2, 2],
        ] {
            let fast = map_equation(&g, &r, &partition, 0.15);
            let slow = map_equation_definitional(&g, &r, &partition, 0.15);
            assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow} for {partition:?}");
        }
    }

    #[test]
    fn singleton_partition_is_exit_dominated() {
        let g = FlowGraph::from_edges(4, &sym_edges(&[(0, 1), (1, 2), (2, 3), (3, 0)], 1.0));
        let r = visit_rates(&g, 0.15);
        let singletons: Vec<usize> = (0..4).collect();
        let l_singletons = map_equation(&g, &r, &singletons, 0.15);
        let l_one = map_equation(&g, &r, &vec![0; 4], 0.15);
        // every step exits a singleton module, so the code is dominated by
        // exit/enter events and is longer than the one-module code
        assert!(l_singletons > l_one);
    }

    #[test]
    fn two_cliques_prefer_two_modules() {
        let mut pairs = Vec::new();
        for a in 0..4u32 {
            for b in (a + 1)..4 {
                pairs.push((a, b));
                pairs.push((a + 4, b + 4));
            }
        }
        let mut edges = sym_edges(&pairs, 1.0);
        edges.extend_from_slice(&[(3, 4, 0.1), (4, 3, 0.1)]);
        let g = FlowGraph::from_edges(8, &edges);
        let r = visit_rates(&g, 0.15);
        let two: Vec<usize> = vec![0, 0, 0, 0, 1, 1, 1, 1];
        let one = vec![0usize; 8];
        assert!(map_equation(&g, &r, &two, 0.15) < map_equation(&g, &r, &one, 0.15));
    }

    #[test]
    fn edgeless_network_stays_singletons() {
        let g = FlowGraph::from_edges(5, &[]);
        let r = visit_rates(&g, 0.15);
        let partition = optimize_partition(&g, &r, 0.15, 42);
        let n_modules = partition.iter().copied().max().unwrap() + 1;
        assert_eq!(n_modules, 5);
    }

    #[test]
    fn disconnected_triangles_found() {
        let edges = sym_edges(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], 1.0);
        let g = FlowGraph::from_edges(6, &edges);
        let r = visit_rates(&g, 0.15);
        let partition = optimize_partition(&g, &r, 0.15, 42);
        assert_eq!(partition.iter().copied().max().unwrap() + 1, 2);
        assert_eq!(partition[0], partition[1]);
        assert_eq!(partition[1], partition[2]);
        assert_eq!(partition[3], partition[4]);
        assert_eq!(partition[4], partition[5]);
        assert_ne!(partition[0], partition[3]);
    }

    #[test]
    fn optimizer_deterministic() {
        let edges = sym_edges(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)], 1.0);
        let g = FlowGraph::from_edges(6, &edges);
        let r = visit_rates(&g, 0.15);
        let p1 = optimize_partition(&g, &r, 0.15, 7);
        let p2 = optimize_partition(&g, &r, 0.15, 7);
        assert_eq!(p1, p2);
    }

    #[test]
    fn hierarchy_on_bridged_clique_pairs() {
        // 16 "stories", each made of two 4-cliques joined by a perfect
        // matching of half-weight bridges; consecutive stories share one
        // weak edge. At this scale the teleportation cost of extra
        // top-level modules keeps each story whole at the top, while in
        // isolation every story still compresses into its two cliques.
        const N_STORIES: usize = 16;
        const STORY: u32 = 8;
        let mut edges = Vec::new();
        for story in 0..N_STORIES as u32 {
            let s = story * STORY;
            let mut pairs = Vec::new();
            for base in [s, s + 4] {
                for a in 0..4u32 {
                    for b in (a + 1)..4 {
                        pairs.push((base + a, base + b));
                    }
                }
            }
            edges.extend(sym_edges(&pairs, 1.0));
            let bridges: Vec<(u32, u32)> = (0..4u32).map(|k| (s + k, s + 4 + k)).collect();
            edges.extend(sym_edges(&bridges, 0.5));
            if story > 0 {
                edges.extend(sym_edges(&[(s - 1, s)], 0.05));
            }
        }
        let n = N_STORIES * STORY as usize;
        let ids: Vec<String> = (0..n).map(|i| format!("a{i:03}")).collect();
        let net = SimilarityNetwork {
            ids,
            edges: edges
                .iter()
                .map(|&(f, t, w)| crate::simnet::SimilarityEdge {
                    from: f,
                    to: t,
                    keyword: w,
                    bm25f: w,
                    ensemble: w,
                })
                .collect(),
        };
        let tree = hierarchical_cluster(&net, 0.15, 42);
        assert_eq!(tree.roots.len(), N_STORIES);
        for members in tree.top_level_clusters() {
            assert_eq!(members.len(), STORY as usize);
            // a story's members are one contiguous block of 8 ids
            let story = members[0] / STORY;
            assert!(members.iter().all(|&m| m / STORY == story));
        }
        // each story subdivides into its two cliques
        for root in &tree.roots {
            let sub: Vec<usize> = root
                .children
                .iter()
                .filter_map(|c| match c {
                    TreeNode::Module(m) => Some(m.size),
                    _ => None,
                })
                .collect();
            assert_eq!(sub, vec![4, 4], "expected two 4-clique sub-modules");
        }
        assert!(tree.depth() >= 2);
    }

    #[test]
    fn isolated_nodes_are_singleton_leaves() {
        let edges = sym_edges(&[(0, 1), (1, 2), (2, 0)], 1.0);
        let ids: Vec<String> = (0..5).map(|i| format!("a{i}")).collect();
        let net = SimilarityNetwork {
            ids,
            edges: edges
                .iter()
                .map(|&(f, t, w)| crate::simnet::SimilarityEdge {
                    from: f,
                    to: t,
                    keyword: w,
                    bm25f: w,
                    ensemble: w,
                })
                .collect(),
        };
        let tree = hierarchical_cluster(&net, 0.15, 42);
        let mut sizes: Vec<usize> = tree.roots.iter().map(|m| m.size).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![1, 1, 3]);
    }

    #[test]
    fn tree_render_deterministic_and_complete() {
        let edges = sym_edges(&[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)], 1.0);
        let ids: Vec<String> = (0..6).map(|i| format!("a{i}")).collect();
        let net = SimilarityNetwork {
            ids: ids.clone(),
            edges: edges
                .iter()
                .map(|&(f, t, w)| crate::simnet::SimilarityEdge {
                    from: f,
                    to: t,
                    keyword: w,
                    bm25f: w,
                    ensemble: w,
                })
                .collect(),
        };
        let t1 = hierarchical_cluster(&net, 0.15, 42).render(&net.ids);
        let t2 = hierarchical_cluster(&net, 0.15, 42).render(&net.ids);
        assert_eq!(t1, t2);
        for id in &ids {
            assert!(t1.lines().any(|l| l.ends_with(id.as_str())), "{id} missing from\n{t1}");
        }
    }
}
