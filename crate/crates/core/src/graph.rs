//! Level-`n` approximation graphs: one vertex per cell, edges between
//! neighbouring cells, and the combinatorial Laplacian `D - A`.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CarpetSpec, CellAddress, DEFAULT_CELL_CAP};
use crate::sparse::SparseSymmetric;

/// Largest grid (in cells of the `l^n` lattice) indexed by a dense table.
const DENSE_LOOKUP_LIMIT: u64 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Adjacency {
    /// Cells sharing a `(d-1)`-dimensional face.
    #[default]
    Face,
    /// Any contact, including edges and corners.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Neumann,
    Dirichlet,
    /// Only meaningful for box spectra; carpet graphs reject it.
    Periodic,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            "periodic" | "p" => Ok(BoundaryCondition::Periodic),
            _ => Err(Error::InvalidArgument(format!("unknown boundary condition '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxGraph {
    pub level: usize,
    pub dimension: usize,
    pub spec_hash: String,
    pub adjacency: Adjacency,
    /// Digits of every vertex; vertex `i` owns `digits[i*level..(i+1)*level]`.
    digits: Vec<u32>,
    /// Edges `(i, j)` with `i < j`, sorted.
    pub edges: Vec<(u32, u32)>,
    /// Set for vertices whose cell touches the boundary of the unit cube.
    pub boundary: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
}

#[derive(Serialize)]
struct EdgeListHeader<'a> {
    spec_hash: &'a str,
    level: usize,
    vertices: usize,
    edges: usize,
    adjacency: Adjacency,
    bc: Option<BoundaryCondition>,
}

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl Lookup {
    fn get(&self, key: u64) -> Option<u32> {
        match self {
            Lookup::Dense(v) => v.get(key as usize).copied().filter(|&i| i != u32::MAX),
            Lookup::Sparse(m) => m.get(&key).copied(),
        }
    }
}

impl ApproxGraph {
    pub fn build(spec: &CarpetSpec, level: usize) -> Result<Self> {
        ApproxGraph::build_with(spec, level, Adjacency::Face, DEFAULT_CELL_CAP)
    }

    pub fn build_with(
        spec: &CarpetSpec,
        level: usize,
        adjacency: Adjacency,
        cap: u64,
    ) -> Result<Self> {
        let count = spec.check_cap(level, cap)?;
        let d = spec.dimension();
        let l = spec.length_scale() as u64;
        let side = l.pow(level as u32);
        let kept = spec.kept_cells();
        let kept_coords: Vec<Vec<usize>> = kept.iter().map(|&c| spec.cell_coords(c)).collect();
        let m = kept.len();

        // Enumerate vertices in lexicographic digit order with their grid coordinates.
        let mut digits = Vec::with_capacity(count * level);
        let mut coords = Vec::with_capacity(count * d);
        let mut odometer = vec![0usize; level];
        for _ in 0..count {
            let mut g = vec![0u64; d];
            for &k in &odometer {
                digits.push(kept[k]);
                for (gi, &c) in g.iter_mut().zip(&kept_coords[k]) {
                    *gi = *gi * l + c as u64;
                }
            }
            coords.extend_from_slice(&g);
            for pos in (0..level).rev() {
                odometer[pos] += 1;
                if odometer[pos] < m {
                    break;
                }
                odometer[pos] = 0;
            }
        }

        let key = |g: &[u64]| g.iter().fold(0u64, |acc, &c| acc * side + c);
        let grid_cells = side.checked_pow(d as u32).unwrap_or(u64::MAX);
        let lookup = if grid_cells <= DENSE_LOOKUP_LIMIT {
            let mut table = vec![u32::MAX; grid_cells as usize];
            for v in 0..count {
                table[key(&coords[v * d..(v + 1) * d]) as usize] = v as u32;
            }
            Lookup::Dense(table)
        } else {
            let mut map = HashMap::with_capacity(count);
            for v in 0..count {
                map.insert(key(&coords[v * d..(v + 1) * d]), v as u32);
            }
            Lookup::Sparse(map)
        };

        let offsets = neighbour_offsets(d, adjacency);
        let mut edges = Vec::new();
        let mut nb = vec![0u64; d];
        for v in 0..count {
            let g = &coords[v * d..(v + 1) * d];
            'offsets: for off in &offsets {
                for i in 0..d {
                    let x = g[i] as i64 + off[i];
                    if x < 0 || x >= side as i64 {
                        continue 'offsets;
                    }
                    nb[i] = x as u64;
                }
                if let Some(w) = lookup.get(key(&nb)) {
                    let (a, b) = if (v as u32) < w { (v as u32, w) } else { (w, v as u32) };
                    edges.push((a, b));
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();

        let boundary = (0..count)
            .map(|v| coords[v * d..(v + 1) * d].iter().any(|&c| c == 0 || c == side - 1))
            .collect();

        Ok(ApproxGraph {
            level,
            dimension: d,
            spec_hash: spec.spec_hash(),
            adjacency,
            digits,
            edges,
            boundary,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.boundary.len()
    }

    pub fn vertex(&self, i: usize) -> CellAddress {
        CellAddress { digits: self.digits[i * self.level..(i + 1) * self.level].to_vec() }
    }

    pub fn vertices(&self) -> Vec<CellAddress> {
        (0..self.vertex_count()).map(|i| self.vertex(i)).collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count()];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let deg = self.degrees();
        if deg.is_empty() {
            return DegreeStats { min: 0, max: 0, mean: 0.0 };
        }
        DegreeStats {
            min: *deg.iter().min().unwrap(),
            max: *deg.iter().max().unwrap(),
            mean: deg.iter().sum::<usize>() as f64 / deg.len() as f64,
        }
    }

    /// Number of connected components.
    pub fn components(&self) -> usize {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut comps = n;
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
            if ra != rb {
                parent[ra] = rb;
                comps -= 1;
            }
        }
        comps
    }

    /// Combinatorial Laplacian. The Dirichlet variant deletes every vertex
    /// whose cell touches the boundary of the unit cube, keeping the
    /// degrees measured in the full graph.
    pub fn laplacian(&self, bc: BoundaryCondition) -> Result<SparseSymmetric> {
        let full = self.neumann_laplacian();
        match bc {
            BoundaryCondition::Neumann => Ok(full),
            BoundaryCondition::Dirichlet => {
                let keep: Vec<bool> = self.boundary.iter().map(|&b| !b).collect();
                if !keep.iter().any(|&k| k) {
                    return Err(Error::EmptySpectrum);
                }
                Ok(full.principal_submatrix(&keep))
            }
            BoundaryCondition::Periodic => Err(Error::InvalidArgument(
                "periodic boundary conditions are not defined on carpet graphs".into(),
            )),
        }
    }

    fn neumann_laplacian(&self) -> SparseSymmetric {
        let deg = self.degrees();
        let mut t = Vec::with_capacity(self.vertex_count() + 2 * self.edges.len());
        for (i, &k) in deg.iter().enumerate() {
            t.push((i, i, k as f64));
        }
        for &(a, b) in &self.edges {
            t.push((a as usize, b as usize, -1.0));
            t.push((b as usize, a as usize, -1.0));
        }
        SparseSymmetric::from_triplets(self.vertex_count(), &t).expect("edge list is symmetric")
    }

    /// Edge list text: a `#`-prefixed JSON header line, then `i j` per edge.
    pub fn to_edge_list(&self, bc: Option<BoundaryCondition>) -> String {
        let header = EdgeListHeader {
            spec_hash: &self.spec_hash,
            level: self.level,
            vertices: self.vertex_count(),
            edges: self.edges.len(),
            adjacency: self.adjacency,
            bc,
        };
        let mut s = format!("# {}\n", serde_json::to_string(&header).expect("header serializes"));
        for &(a, b) in &self.edges {
            let _ = writeln!(s, "{a} {b}");
        }
        s
    }
}

fn neighbour_offsets(d: usize, adjacency: Adjacency) -> Vec<Vec<i64>> {
    match adjacency {
        Adjacency::Face => (0..d)
            .map(|i| {
                let mut o = vec![0i64; d];
                o[i] = 1;
                o
            })
            .collect(),
        Adjacency::Full => {
            let mut out = Vec::new();
            for code in 0..3usize.pow(d as u32) {
                let mut o = vec![0i64; d];
                let mut c = code;
                for x in o.iter_mut() {
                    *x = (c % 3) as i64 - 1;
                    c /= 3;
                }
                // Keep one of each +/- pair.
                if let Some(&first) = o.iter().find(|&&x| x != 0) {
                    if first > 0 {
                        out.push(o);
                    }
                }
            }
            out
        }
    }
}
