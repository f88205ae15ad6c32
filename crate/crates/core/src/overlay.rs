//! Hitting-set sampling and the auxiliary hub graph `H`.
//!
//! `H` is a complete graph on the sampled hubs (plus query terminals) whose
//! edge `(u, v)` has length `min_x (B_x/A)·Δ_x(u, v)`, where `Δ_x` is a
//! bounded distance estimate on rounded copy `x`. The minimizing copy is
//! kept as the edge's provenance: the copy in which that segment is later
//! reconstructed.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::{dijkstra, DynamicGraph};
use crate::oracle::DistanceOracle;
use crate::rounding::RoundedFamily;

/// `min(n, ⌈c_hs · n^{1−a} · ln n⌉)`.
pub fn hitting_set_size(n: usize, hop_exponent: f64, c_hs: f64) -> usize {
    let nf = n as f64;
    let raw = (c_hs * nf.powf(1.0 - hop_exponent) * nf.ln()).ceil();
    if raw.is_nan() || raw <= 0.0 {
        0
    } else {
        (raw as usize).min(n)
    }
}

/// Uniform sample without replacement, returned sorted.
pub fn sample_hitting_set(n: usize, hop_exponent: f64, c_hs: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let size = hitting_set_size(n, hop_exponent, c_hs);
    let mut picked = index::sample(rng, n, size).into_vec();
    picked.sort_unstable();
    picked
}

/// [`sample_hitting_set`] from a fresh generator seeded with `seed`.
pub fn sample_hitting_set_seeded(n: usize, hop_exponent: f64, c_hs: f64, seed: u64) -> Vec<usize> {
    sample_hitting_set(n, hop_exponent, c_hs, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The integer `α` with `len ∈ [2^{α−1}, 2^α)`; `len` must be positive.
pub fn weight_category(len: f64) -> i32 {
    assert!(len > 0.0 && len.is_finite(), "category of non-positive length {len}");
    // Exponent of the normalized float: len = m·2^e with m ∈ [1, 2).
    let (_, e) = frexp(len);
    e
}

// Returns (m, e) with len = m·2^(e−1), m ∈ [1, 2); i.e. e = ⌊log₂ len⌋ + 1.
fn frexp(x: f64) -> (f64, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 {
        // Subnormal: scale up first.
        let (m, e) = frexp(x * (1u64 << 54) as f64);
        return (m, e - 54);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1023u64 << 52));
    (m, exp - 1023 + 1)
}

/// Shortest `s → t` path in `H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HubPath {
    pub hubs: Vec<usize>,
    pub edge_lengths: Vec<f64>,
    pub categories: Vec<i32>,
    /// Well-approximating copy index of each hub edge.
    pub copies: Vec<usize>,
    pub total: f64,
}

impl HubPath {
    pub fn segment_count(&self) -> usize {
        self.edge_lengths.len()
    }

    pub fn segment(&self, i: usize) -> (usize, usize) {
        (self.hubs[i], self.hubs[i + 1])
    }
}

/// The auxiliary graph `H` together with edge provenance.
#[derive(Debug, Clone)]
pub struct Overlay {
    n: usize,
    hub_count: usize,
    vertices: Vec<usize>,
    position: Vec<Option<usize>>,
    lengths: Vec<f64>,
    provenance: Vec<Option<usize>>,
    seed: u64,
}

impl Overlay {
    /// Builds `H` on `hubs` from one `(1+ε)` oracle per rounded copy.
    /// Returns the overlay and the number of oracle cells queried.
    pub fn build(
        n: usize,
        hubs: Vec<usize>,
        family: &RoundedFamily,
        oracles: &[Box<dyn DistanceOracle>],
        seed: u64,
    ) -> (Self, usize) {
        let m = hubs.len();
        let mut position = vec![None; n];
        for (i, &v) in hubs.iter().enumerate() {
            position[v] = Some(i);
        }
        let mut overlay = Self {
            n,
            hub_count: m,
            vertices: hubs,
            position,
            lengths: vec![f64::INFINITY; m * m],
            provenance: vec![None; m * m],
            seed,
        };
        for i in 0..m {
            overlay.lengths[i * m + i] = 0.0;
        }
        let mut cells = 0;
        for (x, oracle) in oracles.iter().enumerate() {
            let block = oracle.query_all(&overlay.vertices, &overlay.vertices);
            cells += block.cell_count();
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        overlay.offer(i, j, x, family.lift_distance_opt(x, block.get(i, j).finite()));
                    }
                }
            }
        }
        (overlay, cells)
    }

    fn offer(&mut self, i: usize, j: usize, x: usize, lifted: Option<f64>) {
        let m = self.vertices.len();
        if let Some(len) = lifted {
            // Strict comparison keeps the smallest copy index on ties.
            if len < self.lengths[i * m + j] {
                self.lengths[i * m + j] = len;
                self.provenance[i * m + j] = Some(x);
            }
        }
    }

    /// Query-time copy of `H` with `terminals` added; edges incident to them
    /// follow the same min-over-copies rule. `self` is left untouched.
    /// Returns the extended overlay and the number of oracle cells queried.
    pub fn attach_terminals(
        &self,
        terminals: &[usize],
        family: &RoundedFamily,
        oracles: &[Box<dyn DistanceOracle>],
    ) -> (Overlay, usize) {
        let mut fresh: Vec<usize> = Vec::new();
        for &t in terminals {
            if self.position[t].is_none() && !fresh.contains(&t) {
                fresh.push(t);
            }
        }
        if fresh.is_empty() {
            return (self.clone(), 0);
        }
        let old = self.vertices.len();
        let m = old + fresh.len();
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&fresh);
        let mut position = self.position.clone();
        for (k, &v) in fresh.iter().enumerate() {
            position[v] = Some(old + k);
        }
        let mut lengths = vec![f64::INFINITY; m * m];
        let mut provenance = vec![None; m * m];
        for i in 0..old {
            lengths[i * m..i * m + old].copy_from_slice(&self.lengths[i * old..(i + 1) * old]);
            provenance[i * m..i * m + old].copy_from_slice(&self.provenance[i * old..(i + 1) * old]);
        }
        for i in old..m {
            lengths[i * m + i] = 0.0;
        }
        let mut out = Overlay {
            n: self.n,
            hub_count: self.hub_count,
            vertices,
            position,
            lengths,
            provenance,
            seed: self.seed,
        };
        let mut cells = 0;
        for (x, oracle) in oracles.iter().enumerate() {
            let from = oracle.query_all(&fresh, &out.vertices);
            let to = oracle.query_all(&out.vertices, &fresh);
            cells += from.cell_count() + to.cell_count();
            for (k, _) in fresh.iter().enumerate() {
                let i = old + k;
                for j in 0..m {
                    if i != j {
                        out.offer(i, j, x, family.lift_distance_opt(x, from.get(k, j).finite()));
                        out.offer(j, i, x, family.lift_distance_opt(x, to.get(j, k).finite()));
                    }
                }
            }
        }
        (out, cells)
    }

    /// The sampled hub set `R`.
    pub fn hubs(&self) -> &[usize] {
        &self.vertices[..self.hub_count]
    }

    /// `V_H`: hubs followed by any attached terminals.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn contains(&self, v: usize) -> bool {
        self.position[v].is_some()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `len_H(u, v)`, `None` when the edge is absent.
    pub fn length(&self, u: usize, v: usize) -> Option<f64> {
        let (i, j) = (self.position[u]?, self.position[v]?);
        let len = self.lengths[i * self.vertices.len() + j];
        len.is_finite().then_some(len)
    }

    /// The copy index that attains `len_H(u, v)`.
    pub fn provenance(&self, u: usize, v: usize) -> Option<usize> {
        let (i, j) = (self.position[u]?, self.position[v]?);
        self.provenance[i * self.vertices.len() + j]
    }

    /// Dijkstra on `H` from `s` to `t`; `None` when disconnected. Both
    /// terminals must already be in `V_H`.
    pub fn hub_sequence(&self, s: usize, t: usize) -> Option<HubPath> {
        let si = self.position[s].expect("source not attached");
        let ti = self.position[t].expect("target not attached");
        let m = self.vertices.len();
        let mut dist = vec![f64::INFINITY; m];
        let mut pred: Vec<Option<usize>> = vec![None; m];
        let mut done = vec![false; m];
        dist[si] = 0.0;
        for _ in 0..m {
            let mut best: Option<usize> = None;
            for i in 0..m {
                if !done[i] && dist[i].is_finite() {
                    match best {
                        Some(b) if dist[b] <= dist[i] => {}
                        _ => best = Some(i),
                    }
                }
            }
            let Some(u) = best else { break };
            done[u] = true;
            if u == ti {
                break;
            }
            for v in 0..m {
                let w = self.lengths[u * m + v];
                if done[v] || !w.is_finite() {
                    continue;
                }
                let nd = dist[u] + w;
                let tie = nd == dist[v]
                    && pred[v].map_or(true, |p| self.vertices[u] < self.vertices[p]);
                if nd < dist[v] || tie {
                    dist[v] = nd;
                    pred[v] = Some(u);
                }
            }
        }
        if !dist[ti].is_finite() {
            return None;
        }
        let mut idx = vec![ti];
        let mut cur = ti;
        while let Some(p) = pred[cur] {
            idx.push(p);
            cur = p;
        }
        idx.reverse();
        let hubs: Vec<usize> = idx.iter().map(|&i| self.vertices[i]).collect();
        let mut edge_lengths = Vec::new();
        let mut copies = Vec::new();
        for pair in idx.windows(2) {
            let k = pair[0] * m + pair[1];
            edge_lengths.push(self.lengths[k]);
            copies.push(self.provenance[k].expect("finite H edge without provenance"));
        }
        let categories = edge_lengths.iter().map(|&l| weight_category(l)).collect();
        Some(HubPath {
            hubs,
            edge_lengths,
            categories,
            copies,
            total: dist[ti],
        })
    }
}

impl RoundedFamily {
    /// [`RoundedFamily::lift_distance`] lifted over `Option`.
    pub fn lift_distance_opt(&self, x: usize, d: Option<u64>) -> Option<f64> {
        d.map(|d| self.lift_distance(x, d))
    }
}

/// Whether some shortest `s → t` path in `g` splits into segments of at most
/// `hop_limit` hops whose endpoints all lie in `hub_set` (terminals count as
/// hubs). When this fails the hitting set has missed the query.
pub fn segmentation_witness(
    g: &DynamicGraph,
    s: usize,
    t: usize,
    hub_set: &[bool],
    hop_limit: usize,
) -> bool {
    if s == t {
        return true;
    }
    let sp = dijkstra(g, s, None);
    if sp.dist[t].is_infinite() {
        return true;
    }
    let n = g.vertex_count();
    let mut order: Vec<usize> = (0..n).filter(|&v| sp.dist[v].is_finite()).collect();
    order.sort_by(|&a, &b| sp.dist[a].total_cmp(&sp.dist[b]).then(a.cmp(&b)));
    // since_hub[v]: fewest hops since the last hub over tight paths s ⇝ v.
    let mut since_hub = vec![usize::MAX; n];
    since_hub[s] = 0;
    for &v in &order {
        if v == s {
            continue;
        }
        let mut arrive = usize::MAX;
        for &(u, w) in g.in_neighbors(v) {
            if since_hub[u] != usize::MAX && sp.dist[u] + w == sp.dist[v] {
                arrive = arrive.min(since_hub[u] + 1);
            }
        }
        if arrive > hop_limit {
            continue;
        }
        since_hub[v] = if v == t || hub_set[v] { 0 } else { arrive };
        if v == t {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Directedness, WeightDomain};
    use crate::oracle::{OracleKind, TruncatedDijkstraOracle};

    fn d1() -> DynamicGraph {
        let mut g = DynamicGraph::new(4, Directedness::Directed, WeightDomain::Integer, 4.0).unwrap();
        for (u, v, w) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 4.0), (1, 3, 4.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        g
    }

    fn exact_setup(g: &DynamicGraph) -> (RoundedFamily, Vec<Box<dyn DistanceOracle>>) {
        let f = RoundedFamily::build(g, 0.0, 0.5).unwrap();
        let oracles: Vec<Box<dyn DistanceOracle>> = vec![Box::new(
            TruncatedDijkstraOracle::new(f.copy(0).graph.clone(), f.scale_a()).unwrap(),
        )];
        (f, oracles)
    }

    #[test]
    fn sizes() {
        assert_eq!(hitting_set_size(100, 0.5, 2.0), 93);
        assert_eq!(hitting_set_size(4, 0.5, 2.0), 4);
        assert_eq!(hitting_set_size(1, 0.5, 2.0), 0);
    }

    #[test]
    fn sampling_is_seeded() {
        let a = sample_hitting_set_seeded(100, 0.5, 2.0, 7);
        let b = sample_hitting_set_seeded(100, 0.5, 2.0, 7);
        assert_eq!(a, b);
        assert_eq!(a.len(), 93);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn categories() {
        assert_eq!(weight_category(5.0), 3);
        assert_eq!(weight_category(4.0), 3);
        assert_eq!(weight_category(1.0), 1);
        assert_eq!(weight_category(7.999), 3);
        assert_eq!(weight_category(0.75), 0);
    }

    #[test]
    fn build_on_d1_terminal_pair() {
        let g = d1();
        let (f, oracles) = exact_setup(&g);
        let (h, cells) = Overlay::build(4, vec![0, 3], &f, &oracles, 0);
        assert_eq!(cells, 4);
        assert_eq!(h.length(0, 3), Some(4.0));
        assert_eq!(h.provenance(0, 3), Some(0));
        assert_eq!(h.length(3, 0), None);
    }

    #[test]
    fn attach_is_copy_on_write() {
        let g = d1();
        let (f, oracles) = exact_setup(&g);
        let (h, _) = Overlay::build(4, vec![1], &f, &oracles, 0);
        let (q, cells) = h.attach_terminals(&[0, 3], &f, &oracles);
        assert!(cells > 0);
        assert_eq!(h.vertices(), &[1]);
        assert_eq!(q.vertices(), &[1, 0, 3]);
        assert_eq!(q.length(0, 1), Some(1.0));
        assert_eq!(q.length(1, 3), Some(3.0));
        assert_eq!(q.length(0, 3), Some(4.0));
        let again = q.attach_terminals(&[0, 3], &f, &oracles);
        assert_eq!(again.1, 0);
        assert_eq!(again.0.vertices(), q.vertices());
    }

    #[test]
    fn hub_sequence_on_d1() {
        let g = d1();
        let (f, oracles) = exact_setup(&g);
        let (h, _) = Overlay::build(4, vec![1, 2], &f, &oracles, 0);
        let (q, _) = h.attach_terminals(&[0, 3], &f, &oracles);
        let path = q.hub_sequence(0, 3).unwrap();
        assert_eq!(path.total, 4.0);
        assert_eq!(path.edge_lengths.iter().sum::<f64>(), 4.0);
        assert_eq!(path.hubs.first(), Some(&0));
        assert_eq!(path.hubs.last(), Some(&3));

        let same = q.hub_sequence(2, 2).unwrap();
        assert_eq!(same.hubs, vec![2]);
        assert_eq!(same.total, 0.0);
        assert!(q.hub_sequence(3, 0).is_none());
    }

    #[test]
    fn approx_lengths_never_underestimate() {
        let mut g = DynamicGraph::new(5, Directedness::Directed, WeightDomain::Real, 8.0).unwrap();
        for (u, v, w) in [(0, 1, 1.5), (1, 2, 2.25), (2, 3, 7.0), (3, 4, 1.0), (0, 4, 8.0)] {
            g.set_edge(u, v, w).unwrap();
        }
        let f = RoundedFamily::build(&g, 0.5, 0.5).unwrap();
        let oracles: Vec<Box<dyn DistanceOracle>> = f
            .copies()
            .iter()
            .map(|c| OracleKind::Slack.build(c.graph.clone(), 2 * f.scale_a(), 0.5).unwrap())
            .collect();
        let (h, _) = Overlay::build(5, (0..5).collect(), &f, &oracles, 0);
        for u in 0..5 {
            let sp = dijkstra(&g, u, None);
            for v in 0..5 {
                if let Some(len) = h.length(u, v) {
                    assert!(len >= sp.dist[v], "len_H({u},{v}) = {len} < {}", sp.dist[v]);
                }
            }
        }
    }

    #[test]
    fn witness_detects_sparse_hubs() {
        // Path 0→1→2→3→4 with unit weights.
        let mut g = DynamicGraph::new(5, Directedness::Directed, WeightDomain::Integer, 1.0).unwrap();
        for v in 0..4 {
            g.set_edge(v, v + 1, 1.0).unwrap();
        }
        let none = vec![false; 5];
        assert!(!segmentation_witness(&g, 0, 4, &none, 2));
        assert!(segmentation_witness(&g, 0, 4, &none, 4));
        let mut mid = vec![false; 5];
        mid[2] = true;
        assert!(segmentation_witness(&g, 0, 4, &mid, 2));
        assert!(segmentation_witness(&g, 4, 0, &none, 1));
    }
}
