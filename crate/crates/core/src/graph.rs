//! Rooted graph balls `Λ_M(0)` of the supported vertex-transitive graphs.
//!
//! Vertices are numbered in breadth-first order from the root, with
//! neighbours generated in a fixed order per family. A ball of radius `L` is
//! therefore the prefix `0..ball_size(L)` of any larger ball.

use std::collections::hash_map::Entry;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::potentials::bethe::BetheAddress;

/// Default cap on the number of vertices of a ball.
pub const DEFAULT_VERTEX_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GraphFamily {
    LatticeZd { d: u32 },
    Hexagonal,
    Triangular,
    Bethe { k: u32 },
}

impl GraphFamily {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GraphFamily::LatticeZd { d: 0 } => {
                Err(Error::InvalidFamily("Z^d needs d >= 1".into()))
            }
            GraphFamily::Bethe { k } if k < 3 => {
                Err(Error::InvalidFamily(format!("Bethe lattice needs k >= 3, got {k}")))
            }
            _ => Ok(()),
        }
    }

    /// Spectral radius of the adjacency operator on the infinite graph.
    pub fn spectral_radius(&self) -> f64 {
        match *self {
            GraphFamily::LatticeZd { d } => 2.0 * d as f64,
            GraphFamily::Hexagonal => 3.0,
            GraphFamily::Triangular => 6.0,
            GraphFamily::Bethe { k } => 2.0 * ((k - 1) as f64).sqrt(),
        }
    }

    /// Vertex degree in the infinite graph.
    pub fn degree(&self) -> u32 {
        match *self {
            GraphFamily::LatticeZd { d } => 2 * d,
            GraphFamily::Hexagonal => 3,
            GraphFamily::Triangular => 6,
            GraphFamily::Bethe { k } => k,
        }
    }

    pub fn is_lattice(&self) -> bool {
        !matches!(self, GraphFamily::Bethe { .. })
    }

    fn lattice_dim(&self) -> usize {
        match *self {
            GraphFamily::LatticeZd { d } => d as usize,
            GraphFamily::Hexagonal | GraphFamily::Triangular => 2,
            GraphFamily::Bethe { .. } => 0,
        }
    }

    /// Neighbours of a lattice point, in canonical order.
    fn lattice_neighbors(&self, x: &[i32], out: &mut Vec<Vec<i32>>) {
        out.clear();
        match *self {
            GraphFamily::LatticeZd { d } => {
                for i in 0..d as usize {
                    for step in [1, -1] {
                        let mut y = x.to_vec();
                        y[i] += step;
                        out.push(y);
                    }
                }
            }
            // brick-wall embedding of the honeycomb in Z^2
            GraphFamily::Hexagonal => {
                out.push(vec![x[0] + 1, x[1]]);
                out.push(vec![x[0] - 1, x[1]]);
                if (x[0] + x[1]).rem_euclid(2) == 0 {
                    out.push(vec![x[0], x[1] + 1]);
                } else {
                    out.push(vec![x[0], x[1] - 1]);
                }
            }
            GraphFamily::Triangular => {
                for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)] {
                    out.push(vec![x[0] + dx, x[1] + dy]);
                }
            }
            GraphFamily::Bethe { .. } => unreachable!("tree balls are built separately"),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GraphFamily::LatticeZd { d } => write!(f, "Z{d}"),
            GraphFamily::Hexagonal => write!(f, "hexagonal"),
            GraphFamily::Triangular => write!(f, "triangular"),
            GraphFamily::Bethe { k } => write!(f, "bethe{k}"),
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    /// Accepts `Z2`, `zd:2`, `hexagonal`, `triangular`, `bethe3`, `bethe:3`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let num = |rest: &str| -> Result<u32> {
            rest.trim_start_matches(':')
                .parse::<u32>()
                .map_err(|_| Error::InvalidFamily(s.to_string()))
        };
        let fam = if t == "hexagonal" || t == "hex" {
            GraphFamily::Hexagonal
        } else if t == "triangular" || t == "tri" {
            GraphFamily::Triangular
        } else if let Some(rest) = t.strip_prefix("zd") {
            GraphFamily::LatticeZd { d: num(rest)? }
        } else if let Some(rest) = t.strip_prefix("bethe") {
            GraphFamily::Bethe { k: num(rest)? }
        } else if let Some(rest) = t.strip_prefix('z') {
            GraphFamily::LatticeZd { d: num(rest)? }
        } else {
            return Err(Error::InvalidFamily(s.to_string()));
        };
        fam.validate()?;
        Ok(fam)
    }
}

#[derive(Debug, Clone)]
enum Labels {
    Lattice { dim: usize, coords: Vec<i32> },
    Tree { parent: Vec<u32>, digit: Vec<u32> },
}

/// Finite ball `Λ_M(0)` with its induced adjacency.
#[derive(Debug, Clone)]
pub struct RootedBallGraph {
    family: GraphFamily,
    radius: u32,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    dist: Vec<u32>,
    level_ends: Vec<usize>,
    labels: Labels,
}

/// Induced subgraph around one vertex, in local numbering (local 0 is the centre).
#[derive(Debug, Clone)]
pub struct Patch {
    pub vertices: Vec<usize>,
    pub offsets: Vec<usize>,
    pub adjacency: Vec<u32>,
}

pub fn build_ball(family: GraphFamily, radius: u32) -> Result<RootedBallGraph> {
    build_ball_with_cap(family, radius, DEFAULT_VERTEX_CAP)
}

pub fn build_ball_with_cap(family: GraphFamily, radius: u32, cap: u64) -> Result<RootedBallGraph> {
    family.validate()?;
    match family {
        GraphFamily::Bethe { k } => build_tree(k, radius, cap),
        _ => build_lattice(family, radius, cap),
    }
}

fn build_lattice(family: GraphFamily, radius: u32, cap: u64) -> Result<RootedBallGraph> {
    if let GraphFamily::LatticeZd { .. } = family {
        let n = ball_cardinality(family, radius)?;
        if n > cap {
            return Err(Error::ResourceLimit { requested: n, cap });
        }
    }
    let dim = family.lattice_dim();
    let mut index: HashMap<Vec<i32>, u32> = HashMap::new();
    let mut coords: Vec<i32> = Vec::new();
    let mut dist: Vec<u32> = Vec::new();
    let origin = vec![0i32; dim];
    index.insert(origin.clone(), 0);
    coords.extend_from_slice(&origin);
    dist.push(0);
    let mut queue = VecDeque::from([0usize]);
    let mut buf = Vec::new();
    while let Some(v) = queue.pop_front() {
        if dist[v] == radius {
            continue;
        }
        let x = coords[v * dim..(v + 1) * dim].to_vec();
        family.lattice_neighbors(&x, &mut buf);
        for y in buf.drain(..) {
            if index.contains_key(&y) {
                continue;
            }
            let id = dist.len();
            if id as u64 + 1 > cap {
                return Err(Error::ResourceLimit { requested: id as u64 + 1, cap });
            }
            coords.extend_from_slice(&y);
            index.insert(y, id as u32);
            dist.push(dist[v] + 1);
            queue.push_back(id);
        }
    }
    let n = dist.len();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut adjacency = Vec::with_capacity(n * family.degree() as usize);
    offsets.push(0);
    for v in 0..n {
        family.lattice_neighbors(&coords[v * dim..(v + 1) * dim], &mut buf);
        for y in &buf {
            if let Some(&u) = index.get(y) {
                adjacency.push(u);
            }
        }
        offsets.push(adjacency.len());
    }
    Ok(RootedBallGraph {
        family,
        radius,
        offsets,
        adjacency,
        level_ends: level_ends(&dist, radius),
        dist,
        labels: Labels::Lattice { dim, coords },
    })
}

fn build_tree(k: u32, radius: u32, cap: u64) -> Result<RootedBallGraph> {
    let family = GraphFamily::Bethe { k };
    let n = ball_cardinality(family, radius)?;
    if n > cap {
        return Err(Error::ResourceLimit { requested: n, cap });
    }
    let n = n as usize;
    let mut parent = vec![u32::MAX; n];
    let mut digit = vec![0u32; n];
    let mut dist = vec![0u32; n];
    let mut first_child = vec![0usize; n];
    let mut next = 1usize;
    for v in 0..n {
        if dist[v] == radius {
            first_child[v] = next;
            continue;
        }
        first_child[v] = next;
        let children = if v == 0 { k } else { k - 1 };
        for a in 1..=children {
            parent[next] = v as u32;
            digit[next] = a;
            dist[next] = dist[v] + 1;
            next += 1;
        }
    }
    debug_assert_eq!(next, n);
    let mut offsets = Vec::with_capacity(n + 1);
    let mut adjacency = Vec::with_capacity(2 * n);
    offsets.push(0);
    for v in 0..n {
        if v != 0 {
            adjacency.push(parent[v]);
        }
        if dist[v] < radius {
            let children = if v == 0 { k } else { k - 1 } as usize;
            adjacency.extend((first_child[v]..first_child[v] + children).map(|c| c as u32));
        }
        offsets.push(adjacency.len());
    }
    Ok(RootedBallGraph {
        family,
        radius,
        offsets,
        adjacency,
        level_ends: level_ends(&dist, radius),
        dist,
        labels: Labels::Tree { parent, digit },
    })
}

fn level_ends(dist: &[u32], radius: u32) -> Vec<usize> {
    let mut ends = vec![0usize; radius as usize + 1];
    for &d in dist {
        ends[d as usize] += 1;
    }
    for l in 1..ends.len() {
        ends[l] += ends[l - 1];
    }
    ends
}

impl RootedBallGraph {
    pub fn family(&self) -> GraphFamily {
        self.family
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn dist_to_root(&self, v: usize) -> u32 {
        self.dist[v]
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    /// Edges `(u, v)` with `u < v`, in vertex order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| (v as usize) > u)
                .map(move |&v| (u, v as usize))
        })
    }

    /// Number of vertices at distance at most `l` from the root.
    pub fn ball_size(&self, l: u32) -> Result<usize> {
        if l > self.radius {
            return Err(Error::RadiusOutOfRange { requested: l, available: self.radius });
        }
        Ok(self.level_ends[l as usize])
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.len() {
            return Err(Error::VertexOutOfRange { index: v, len: self.len() });
        }
        Ok(())
    }

    /// Lattice coordinates of `v`; `None` on the Bethe lattice.
    pub fn coords(&self, v: usize) -> Option<&[i32]> {
        match &self.labels {
            Labels::Lattice { dim, coords } => Some(&coords[v * dim..(v + 1) * dim]),
            Labels::Tree { .. } => None,
        }
    }

    /// Tree address of `v`; `None` on lattices.
    pub fn address(&self, v: usize) -> Option<BetheAddress> {
        match &self.labels {
            Labels::Tree { parent, digit } => {
                let mut digits = Vec::with_capacity(self.dist[v] as usize);
                let mut u = v;
                while u != 0 {
                    digits.push(digit[u]);
                    u = parent[u] as usize;
                }
                digits.reverse();
                Some(BetheAddress::new(digits))
            }
            Labels::Lattice { .. } => None,
        }
    }

    /// Index of the lattice point `x`, if it lies in the ball.
    pub fn find_coords(&self, x: &[i32]) -> Option<usize> {
        match &self.labels {
            Labels::Lattice { dim, coords } if *dim == x.len() => {
                coords.chunks_exact(*dim).position(|c| c == x)
            }
            _ => None,
        }
    }

    /// The ball `Λ_l(0)` as a graph of its own.
    pub fn sub_ball(&self, l: u32) -> Result<RootedBallGraph> {
        let n = self.ball_size(l)?;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for v in 0..n {
            adjacency.extend(self.neighbors(v).iter().copied().filter(|&u| (u as usize) < n));
            offsets.push(adjacency.len());
        }
        let labels = match &self.labels {
            Labels::Lattice { dim, coords } => {
                Labels::Lattice { dim: *dim, coords: coords[..n * dim].to_vec() }
            }
            Labels::Tree { parent, digit } => {
                Labels::Tree { parent: parent[..n].to_vec(), digit: digit[..n].to_vec() }
            }
        };
        Ok(RootedBallGraph {
            family: self.family,
            radius: l,
            offsets,
            adjacency,
            dist: self.dist[..n].to_vec(),
            level_ends: self.level_ends[..=l as usize].to_vec(),
            labels,
        })
    }

    /// Breadth-first distances from `v` inside the ball (`u32::MAX` if unreachable).
    pub fn distances_from(&self, v: usize) -> Vec<u32> {
        let mut d = vec![u32::MAX; self.len()];
        d[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                let w = w as usize;
                if d[w] == u32::MAX {
                    d[w] = d[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }

    /// Induced subgraph on the vertices within distance `r` of `center`.
    pub fn local_patch(&self, center: usize, r: u32) -> Patch {
        let mut local: HashMap<usize, u32> = HashMap::new();
        let mut vertices = vec![center];
        let mut depth = vec![0u32];
        local.insert(center, 0);
        let mut head = 0;
        while head < vertices.len() {
            let u = vertices[head];
            if depth[head] < r {
                for &w in self.neighbors(u) {
                    let w = w as usize;
                    if let Entry::Vacant(e) = local.entry(w) {
                        e.insert(vertices.len() as u32);
                        vertices.push(w);
                        depth.push(depth[head] + 1);
                    }
                }
            }
            head += 1;
        }
        let mut offsets = Vec::with_capacity(vertices.len() + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for &u in &vertices {
            adjacency.extend(self.neighbors(u).iter().filter_map(|w| local.get(&(*w as usize)).copied()));
            offsets.push(adjacency.len());
        }
        Patch { vertices, offsets, adjacency }
    }

    /// For `Z^1` balls, vertex indices sorted by coordinate.
    pub fn path_order(&self) -> Option<Vec<usize>> {
        if self.family != (GraphFamily::LatticeZd { d: 1 }) {
            return None;
        }
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&v| self.coords(v).map(|c| c[0]));
        Some(order)
    }

    /// Writes a header line and one `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# family={} radius={} vertices={} edges={}",
            self.family,
            self.radius,
            self.len(),
            self.edge_count()
        )?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    }
}

/// Graph distance between two vertices of the ball.
pub fn graph_distance(g: &RootedBallGraph, x: usize, y: usize) -> Result<u32> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    Ok(g.distances_from(x)[y])
}

fn binom(n: u64, k: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `|Λ_L(0)|`. Closed forms on `Z^d` and the Bethe lattice; the planar
/// lattices are counted by construction.
pub fn ball_cardinality(family: GraphFamily, l: u32) -> Result<u64> {
    family.validate()?;
    let overflow = || Error::Overflow(format!("|Λ_{l}| on {family}"));
    match family {
        GraphFamily::LatticeZd { d } => {
            let mut total: u128 = 0;
            for i in 0..=d.min(l) as u64 {
                let term = binom(d as u64, i)
                    .zip(binom(l as u64, i))
                    .and_then(|(a, b)| a.checked_mul(b))
                    .and_then(|t| t.checked_mul(1u128.checked_shl(i as u32)?))
                    .ok_or_else(overflow)?;
                total = total.checked_add(term).ok_or_else(overflow)?;
            }
            u64::try_from(total).map_err(|_| overflow())
        }
        GraphFamily::Bethe { k } => {
            // 1 + k((k-1)^L - 1)/(k-2)
            let q = (k - 1) as u128;
            let pow = q.checked_pow(l).ok_or_else(overflow)?;
            let total = (k as u128)
                .checked_mul(pow - 1)
                .map(|t| 1 + t / (k as u128 - 2))
                .ok_or_else(overflow)?;
            u64::try_from(total).map_err(|_| overflow())
        }
        GraphFamily::Hexagonal | GraphFamily::Triangular => {
            Ok(build_ball(family, l)?.len() as u64)
        }
    }
}

/// `|Λ_{L+1}| / |Λ_L|` as an exact rational.
pub fn growth_ratio(family: GraphFamily, l: u32) -> Result<Ratio<u64>> {
    let a = ball_cardinality(family, l)?;
    let b = ball_cardinality(family, l + 1)?;
    Ok(Ratio::new(b, a))
}

/// Strictly increasing growth profile of ball volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFunction {
    /// `b(n) = zeta * n^alpha`
    Polynomial { zeta: f64, alpha: f64 },
    /// `b(n) = (k-1)^n`
    Exponential { k: u32 },
}

impl GrowthFunction {
    pub fn new_polynomial(zeta: f64, alpha: f64) -> Result<Self> {
        if !(zeta > 0.0 && alpha > 0.0 && zeta.is_finite() && alpha.is_finite()) {
            return Err(param(format!("polynomial growth needs zeta, alpha > 0, got {zeta}, {alpha}")));
        }
        Ok(GrowthFunction::Polynomial { zeta, alpha })
    }

    /// Leading-order volume growth of the family.
    pub fn natural(family: GraphFamily) -> Self {
        match family {
            GraphFamily::LatticeZd { d } => {
                let fact: f64 = (1..=d).map(|i| i as f64).product();
                GrowthFunction::Polynomial { zeta: 2f64.powi(d as i32) / fact, alpha: d as f64 }
            }
            GraphFamily::Hexagonal => GrowthFunction::Polynomial { zeta: 1.5, alpha: 2.0 },
            GraphFamily::Triangular => GrowthFunction::Polynomial { zeta: 3.0, alpha: 2.0 },
            GraphFamily::Bethe { k } => GrowthFunction::Exponential { k },
        }
    }

    pub fn eval(&self, n: f64) -> f64 {
        match *self {
            GrowthFunction::Polynomial { zeta, alpha } => zeta * n.powf(alpha),
            GrowthFunction::Exponential { k } => ((k - 1) as f64).powf(n),
        }
    }

    pub fn inverse(&self, y: f64) -> f64 {
        match *self {
            GrowthFunction::Polynomial { zeta, alpha } => (y / zeta).powf(1.0 / alpha),
            GrowthFunction::Exponential { k } => y.ln() / ((k - 1) as f64).ln(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z1_ball_is_a_path() {
        let g = build_ball(GraphFamily::LatticeZd { d: 1 }, 3).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.edge_count(), 6);
        let coords: Vec<i32> = (0..7).map(|v| g.coords(v).unwrap()[0]).collect();
        assert_eq!(coords, vec![0, 1, -1, 2, -2, 3, -3]);
    }

    #[test]
    fn bethe_root_neighbours_in_digit_order() {
        let g = build_ball(GraphFamily::Bethe { k: 3 }, 2).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert_eq!(g.address(4).unwrap().digits(), &[1, 1]);
        assert_eq!(g.neighbors(1), &[0, 4, 5]);
    }

    #[test]
    fn parse_family_names() {
        assert_eq!("Z2".parse::<GraphFamily>().unwrap(), GraphFamily::LatticeZd { d: 2 });
        assert_eq!("bethe:4".parse::<GraphFamily>().unwrap(), GraphFamily::Bethe { k: 4 });
        assert!("bethe2".parse::<GraphFamily>().is_err());
        assert!("square".parse::<GraphFamily>().is_err());
    }

    #[test]
    fn cap_is_enforced() {
        let e = build_ball_with_cap(GraphFamily::Bethe { k: 3 }, 10, 100).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit { .. }));
        let e = build_ball_with_cap(GraphFamily::Hexagonal, 30, 100).unwrap_err();
        assert!(matches!(e, Error::ResourceLimit { .. }));
    }
}
