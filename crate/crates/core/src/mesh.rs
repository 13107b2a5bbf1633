//! Unstructured triangular mesh: immutable topology, moving geometry
//! (volumes, face normals, corner vectors), reference-element mapping, and a
//! plain ASCII exchange format.
//!
//! Periodic meshes identify seam nodes and record a constant translation per
//! cell corner, so a single coordinate array drives both periodic copies.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Result, SolverError};
use crate::tensor::Vec2;

#[derive(Clone, Copy, Debug)]
pub struct Face {
    pub nodes: [u32; 2],
    /// Owning cell and its local edge index.
    pub left: (u32, u8),
    /// Neighbor cell and its local edge index, if interior.
    pub right: Option<(u32, u8)>,
    /// Boundary tag, meaningful only for boundary faces.
    pub tag: u8,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    pub n_nodes: usize,
    /// Counter-clockwise node triple per cell.
    pub cell_nodes: Vec<[u32; 3]>,
    /// Per-corner translation applied to the node coordinate (periodic seams).
    pub cell_shifts: Vec<[Vec2; 3]>,
    pub faces: Vec<Face>,
    /// Face id per local edge; edge k runs from corner k to corner k+1.
    pub cell_faces: Vec<[u32; 3]>,
    node_cell_off: Vec<u32>,
    node_cell_items: Vec<(u32, u8)>,
    node_bface_off: Vec<u32>,
    node_bface_items: Vec<u32>,
    vneigh_off: Vec<u32>,
    vneigh_items: Vec<u32>,
}

impl Mesh {
    pub fn n_cells(&self) -> usize {
        self.cell_nodes.len()
    }

    /// Physical position of corner k of a cell.
    pub fn corner_pos(&self, coords: &[Vec2], cell: usize, k: usize) -> Vec2 {
        coords[self.cell_nodes[cell][k] as usize] + self.cell_shifts[cell][k]
    }

    /// Cells incident to a node, with the matching local corner.
    pub fn node_cells(&self, node: usize) -> &[(u32, u8)] {
        let a = self.node_cell_off[node] as usize;
        let b = self.node_cell_off[node + 1] as usize;
        &self.node_cell_items[a..b]
    }

    /// Boundary faces incident to a node.
    pub fn node_boundary_faces(&self, node: usize) -> &[u32] {
        let a = self.node_bface_off[node] as usize;
        let b = self.node_bface_off[node + 1] as usize;
        &self.node_bface_items[a..b]
    }

    /// Cells sharing at least one node with `cell`, excluding `cell` itself,
    /// sorted by id.
    pub fn vertex_neighbors(&self, cell: usize) -> &[u32] {
        let a = self.vneigh_off[cell] as usize;
        let b = self.vneigh_off[cell + 1] as usize;
        &self.vneigh_items[a..b]
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }
}

/// Build the full topology from a triangle soup. Cells with negative signed
/// area are flipped to counter-clockwise order first. Optional per-corner
/// shifts carry periodic identifications.
pub fn build_topology(
    cells: Vec<[u32; 3]>,
    coords: &[Vec2],
    shifts: Option<Vec<[Vec2; 3]>>,
) -> Result<Mesh> {
    let n_nodes = coords.len();
    let mut cell_nodes = cells;
    let mut cell_shifts = shifts.unwrap_or_else(|| vec![[Vec2::ZERO; 3]; cell_nodes.len()]);
    assert_eq!(cell_nodes.len(), cell_shifts.len());

    // Orientation normalization and degeneracy checks.
    for (i, cn) in cell_nodes.iter_mut().enumerate() {
        let sh = &mut cell_shifts[i];
        let p: Vec<Vec2> = (0..3).map(|k| coords[cn[k] as usize] + sh[k]).collect();
        let area2 = (p[1] - p[0]).cross(p[2] - p[0]);
        if area2 < 0.0 {
            cn.swap(1, 2);
            sh.swap(1, 2);
        } else if area2 == 0.0 {
            return Err(SolverError::InvertedCell(i, 0.0));
        }
        if cn[0] == cn[1] || cn[1] == cn[2] || cn[0] == cn[2] {
            return Err(SolverError::InvertedCell(i, 0.0));
        }
    }

    // Duplicate cells (same node triple in any order).
    let mut seen: HashMap<[u32; 3], usize> = HashMap::new();
    for (i, cn) in cell_nodes.iter().enumerate() {
        let mut key = *cn;
        key.sort_unstable();
        if seen.insert(key, i).is_some() {
            return Err(SolverError::DuplicateCell(i));
        }
    }

    // Face matching on sorted node pairs.
    let mut face_map: HashMap<(u32, u32), u32> = HashMap::new();
    let mut faces: Vec<Face> = Vec::new();
    let mut cell_faces = vec![[u32::MAX; 3]; cell_nodes.len()];
    for (i, cn) in cell_nodes.iter().enumerate() {
        for k in 0..3 {
            let a = cn[k];
            let b = cn[(k + 1) % 3];
            let key = (a.min(b), a.max(b));
            match face_map.get(&key) {
                None => {
                    let id = faces.len() as u32;
                    faces.push(Face {
                        nodes: [a, b],
                        left: (i as u32, k as u8),
                        right: None,
                        tag: 0,
                    });
                    face_map.insert(key, id);
                    cell_faces[i][k] = id;
                }
                Some(&id) => {
                    let f = &mut faces[id as usize];
                    if f.right.is_some() {
                        return Err(SolverError::NonManifoldFace(key.0 as usize, key.1 as usize));
                    }
                    f.right = Some((i as u32, k as u8));
                    cell_faces[i][k] = id;
                }
            }
        }
    }

    // Node -> (cell, corner) adjacency, CSR.
    let mut counts = vec![0u32; n_nodes + 1];
    for cn in &cell_nodes {
        for &n in cn {
            counts[n as usize + 1] += 1;
        }
    }
    for i in 0..n_nodes {
        counts[i + 1] += counts[i];
    }
    let node_cell_off = counts.clone();
    let mut fill = node_cell_off.clone();
    let mut node_cell_items = vec![(0u32, 0u8); *node_cell_off.last().unwrap() as usize];
    for (i, cn) in cell_nodes.iter().enumerate() {
        for (k, &n) in cn.iter().enumerate() {
            let slot = fill[n as usize] as usize;
            node_cell_items[slot] = (i as u32, k as u8);
            fill[n as usize] += 1;
        }
    }

    // Node -> boundary faces.
    let mut bcounts = vec![0u32; n_nodes + 1];
    for f in &faces {
        if f.is_boundary() {
            for &n in &f.nodes {
                bcounts[n as usize + 1] += 1;
            }
        }
    }
    for i in 0..n_nodes {
        bcounts[i + 1] += bcounts[i];
    }
    let node_bface_off = bcounts.clone();
    let mut bfill = node_bface_off.clone();
    let mut node_bface_items = vec![0u32; *node_bface_off.last().unwrap() as usize];
    for (id, f) in faces.iter().enumerate() {
        if f.is_boundary() {
            for &n in &f.nodes {
                let slot = bfill[n as usize] as usize;
                node_bface_items[slot] = id as u32;
                bfill[n as usize] += 1;
            }
        }
    }

    // Vertex neighborhoods (cells sharing a node), sorted and deduplicated.
    let mut vneigh_off = vec![0u32; cell_nodes.len() + 1];
    let mut vneigh_items: Vec<u32> = Vec::new();
    let mut scratch: Vec<u32> = Vec::new();
    for (i, cn) in cell_nodes.iter().enumerate() {
        scratch.clear();
        for &n in cn {
            let a = node_cell_off[n as usize] as usize;
            let b = node_cell_off[n as usize + 1] as usize;
            for &(c, _) in &node_cell_items[a..b] {
                if c as usize != i {
                    scratch.push(c);
                }
            }
        }
        scratch.sort_unstable();
        scratch.dedup();
        vneigh_items.extend_from_slice(&scratch);
        vneigh_off[i + 1] = vneigh_items.len() as u32;
    }

    Ok(Mesh {
        n_nodes,
        cell_nodes,
        cell_shifts,
        faces,
        cell_faces,
        node_cell_off,
        node_cell_items,
        node_bface_off,
        node_bface_items,
        vneigh_off,
        vneigh_items,
    })
}

/// Geometry of the current configuration. Everything here is a pure function
/// of the node coordinates and can be rebuilt after every node move.
#[derive(Clone, Debug, Default)]
pub struct Geometry {
    pub volume: Vec<f64>,
    pub centroid: Vec<Vec2>,
    /// Characteristic length |T|^(1/2).
    pub char_len: Vec<f64>,
    /// Corner vector per cell corner.
    pub corner: Vec<[Vec2; 3]>,
    /// Outward unit normal per local edge.
    pub edge_normal: Vec<[Vec2; 3]>,
    pub edge_len: Vec<[f64; 3]>,
    pub edge_mid: Vec<[Vec2; 3]>,
}

impl Geometry {
    pub fn total_volume(&self) -> f64 {
        self.volume.iter().sum()
    }
}

/// Rebuild volumes, normals, corner vectors, centroids. Fails on the first
/// non-positive cell volume (tangled configuration).
pub fn compute_geometry(mesh: &Mesh, coords: &[Vec2]) -> Result<Geometry> {
    let nc = mesh.n_cells();
    let mut geo = Geometry {
        volume: vec![0.0; nc],
        centroid: vec![Vec2::ZERO; nc],
        char_len: vec![0.0; nc],
        corner: vec![[Vec2::ZERO; 3]; nc],
        edge_normal: vec![[Vec2::ZERO; 3]; nc],
        edge_len: vec![[0.0; 3]; nc],
        edge_mid: vec![[Vec2::ZERO; 3]; nc],
    };
    for i in 0..nc {
        compute_cell_geometry(mesh, coords, i, &mut geo)?;
    }
    Ok(geo)
}

pub fn compute_cell_geometry(
    mesh: &Mesh,
    coords: &[Vec2],
    i: usize,
    geo: &mut Geometry,
) -> Result<()> {
    let p = [
        mesh.corner_pos(coords, i, 0),
        mesh.corner_pos(coords, i, 1),
        mesh.corner_pos(coords, i, 2),
    ];
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    if area <= 0.0 {
        return Err(SolverError::InvertedCell(i, area));
    }
    geo.volume[i] = area;
    geo.centroid[i] = (p[0] + p[1] + p[2]) / 3.0;
    geo.char_len[i] = area.sqrt();

    // Edge k from corner k to corner k+1; rotating the edge by -90 degrees
    // gives the outward area-weighted normal of a CCW triangle.
    let mut sn = [Vec2::ZERO; 3];
    for k in 0..3 {
        let e = p[(k + 1) % 3] - p[k];
        sn[k] = e.rot_cw();
        geo.edge_len[i][k] = e.norm();
        geo.edge_normal[i][k] = sn[k] / geo.edge_len[i][k];
        geo.edge_mid[i][k] = (p[k] + p[(k + 1) % 3]) * 0.5;
    }
    // Corner k touches edges k-1 (incoming) and k (outgoing).
    for k in 0..3 {
        geo.corner[i][k] = (sn[(k + 2) % 3] + sn[k]) * 0.5;
    }
    Ok(())
}

/// Affine map between the unit reference triangle and a physical cell.
#[derive(Clone, Copy, Debug)]
pub struct RefMap {
    pub origin: Vec2,
    jac: [[f64; 2]; 2],
    inv: [[f64; 2]; 2],
}

impl RefMap {
    pub fn new(p0: Vec2, p1: Vec2, p2: Vec2) -> Result<RefMap> {
        let a = p1 - p0;
        let b = p2 - p0;
        let det = a.cross(b);
        if det.abs() < 1e-300 {
            return Err(SolverError::InvertedCell(usize::MAX, det));
        }
        Ok(RefMap {
            origin: p0,
            jac: [[a.x, b.x], [a.y, b.y]],
            inv: [[b.y / det, -b.x / det], [-a.y / det, a.x / det]],
        })
    }

    pub fn for_cell(mesh: &Mesh, coords: &[Vec2], cell: usize) -> Result<RefMap> {
        RefMap::new(
            mesh.corner_pos(coords, cell, 0),
            mesh.corner_pos(coords, cell, 1),
            mesh.corner_pos(coords, cell, 2),
        )
    }

    pub fn to_physical(&self, xi: Vec2) -> Vec2 {
        Vec2::new(
            self.origin.x + self.jac[0][0] * xi.x + self.jac[0][1] * xi.y,
            self.origin.y + self.jac[1][0] * xi.x + self.jac[1][1] * xi.y,
        )
    }

    pub fn to_reference(&self, x: Vec2) -> Vec2 {
        let d = x - self.origin;
        Vec2::new(
            self.inv[0][0] * d.x + self.inv[0][1] * d.y,
            self.inv[1][0] * d.x + self.inv[1][1] * d.y,
        )
    }
}

/// Plain ASCII exchange format: node count and coordinates, cell count and
/// connectivity, boundary-face count with tags. Periodic meshes are not
/// representable and are refused.
pub fn write_mesh_ascii(mesh: &Mesh, coords: &[Vec2], path: &Path) -> Result<()> {
    if mesh.cell_shifts.iter().flatten().any(|s| *s != Vec2::ZERO) {
        return Err(SolverError::BadMeshRequest(
            "periodic meshes cannot be written to the ASCII format".into(),
        ));
    }
    let mut out = String::new();
    out.push_str(&format!("nodes {}\n", mesh.n_nodes));
    for p in coords {
        out.push_str(&format!("{:.17e} {:.17e}\n", p.x, p.y));
    }
    out.push_str(&format!("cells {}\n", mesh.n_cells()));
    for cn in &mesh.cell_nodes {
        out.push_str(&format!("{} {} {}\n", cn[0], cn[1], cn[2]));
    }
    let bfaces: Vec<&Face> = mesh.faces.iter().filter(|f| f.is_boundary()).collect();
    out.push_str(&format!("boundary {}\n", bfaces.len()));
    for f in bfaces {
        out.push_str(&format!("{} {} {}\n", f.nodes[0], f.nodes[1], f.tag));
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_mesh_ascii(path: &Path) -> Result<(Mesh, Vec<Vec2>)> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| SolverError::BadConfig("truncated mesh file".into()))?
            .map_err(SolverError::from)
    };
    let bad = |m: &str| SolverError::BadConfig(format!("mesh file: {m}"));

    let header = next()?;
    let n_nodes: usize = header
        .strip_prefix("nodes ")
        .ok_or_else(|| bad("missing node count"))?
        .trim()
        .parse()
        .map_err(|_| bad("bad node count"))?;
    let mut coords = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let l = next()?;
        let mut it = l.split_whitespace();
        let x: f64 = it.next().ok_or_else(|| bad("bad coord"))?.parse().map_err(|_| bad("bad coord"))?;
        let y: f64 = it.next().ok_or_else(|| bad("bad coord"))?.parse().map_err(|_| bad("bad coord"))?;
        coords.push(Vec2::new(x, y));
    }
    let header = next()?;
    let n_cells: usize = header
        .strip_prefix("cells ")
        .ok_or_else(|| bad("missing cell count"))?
        .trim()
        .parse()
        .map_err(|_| bad("bad cell count"))?;
    let mut cells = Vec::with_capacity(n_cells);
    for _ in 0..n_cells {
        let l = next()?;
        let v: Vec<u32> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("bad connectivity")))
            .collect::<Result<_>>()?;
        if v.len() != 3 {
            return Err(bad("connectivity line must hold three node ids"));
        }
        cells.push([v[0], v[1], v[2]]);
    }
    let mut mesh = build_topology(cells, &coords, None)?;
    if let Ok(header) = next() {
        if let Some(nb) = header.strip_prefix("boundary ") {
            let nb: usize = nb.trim().parse().map_err(|_| bad("bad boundary count"))?;
            let mut tag_of: HashMap<(u32, u32), u8> = HashMap::new();
            for _ in 0..nb {
                let l = next()?;
                let v: Vec<u64> = l
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| bad("bad boundary line")))
                    .collect::<Result<_>>()?;
                if v.len() != 3 {
                    return Err(bad("boundary line must hold two node ids and a tag"));
                }
                let (a, b) = (v[0] as u32, v[1] as u32);
                tag_of.insert((a.min(b), a.max(b)), v[2] as u8);
            }
            for f in &mut mesh.faces {
                if f.is_boundary() {
                    let key = (f.nodes[0].min(f.nodes[1]), f.nodes[0].max(f.nodes[1]));
                    if let Some(&t) = tag_of.get(&key) {
                        f.tag = t;
                    }
                }
            }
        }
    }
    Ok((mesh, coords))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_right_triangle() -> (Mesh, Vec<Vec2>) {
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let mesh = build_topology(vec![[0, 1, 2]], &coords, None).unwrap();
        (mesh, coords)
    }

    #[test]
    fn single_triangle_topology() {
        let (mesh, _) = unit_right_triangle();
        assert_eq!(mesh.n_boundary_faces(), 3);
        assert_eq!(mesh.n_interior_faces(), 0);
        assert_eq!(mesh.node_cells(0).len(), 1);
    }

    #[test]
    fn two_triangles_share_one_interior_face() {
        let coords = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mesh = build_topology(vec![[0, 1, 2], [0, 2, 3]], &coords, None).unwrap();
        assert_eq!(mesh.n_interior_faces(), 1);
        assert_eq!(mesh.n_boundary_faces(), 4);
        // Both cells are vertex neighbors of each other.
        assert_eq!(mesh.vertex_neighbors(0), &[1]);
        assert_eq!(mesh.vertex_neighbors(1), &[0]);
    }

    #[test]
    fn orientation_is_normalized() {
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        // Clockwise input is flipped, geometry then succeeds.
        let mesh = build_topology(vec![[0, 2, 1]], &coords, None).unwrap();
        let geo = compute_geometry(&mesh, &coords).unwrap();
        assert!((geo.volume[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn non_manifold_is_rejected() {
        let coords = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.5, 1.0),
            Vec2::new(0.5, -1.0),
            Vec2::new(1.5, 1.0),
        ];
        let r = build_topology(vec![[0, 1, 2], [0, 1, 3], [1, 0, 4]], &coords, None);
        assert!(matches!(r, Err(SolverError::NonManifoldFace(0, 1))));
    }

    #[test]
    fn duplicate_cell_is_rejected() {
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let r = build_topology(vec![[0, 1, 2], [1, 2, 0]], &coords, None);
        assert!(matches!(r, Err(SolverError::DuplicateCell(1))));
    }

    #[test]
    fn unit_triangle_geometry() {
        let (mesh, coords) = unit_right_triangle();
        let geo = compute_geometry(&mesh, &coords).unwrap();
        assert!((geo.volume[0] - 0.5).abs() < 1e-15);
        assert!((geo.centroid[0] - Vec2::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-15);
        // Known corner vectors of the unit right triangle.
        assert!((geo.corner[0][0] - Vec2::new(-0.5, -0.5)).norm() < 1e-15);
        assert!((geo.corner[0][1] - Vec2::new(0.5, 0.0)).norm() < 1e-15);
        assert!((geo.corner[0][2] - Vec2::new(0.0, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn corner_vectors_close() {
        let coords = vec![Vec2::new(0.2, -0.3), Vec2::new(1.7, 0.4), Vec2::new(0.6, 2.1)];
        let mesh = build_topology(vec![[0, 1, 2]], &coords, None).unwrap();
        let geo = compute_geometry(&mesh, &coords).unwrap();
        let sum = geo.corner[0][0] + geo.corner[0][1] + geo.corner[0][2];
        let cmax = geo.corner[0].iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(sum.norm() <= 1e-14 * cmax);
    }

    #[test]
    fn equilateral_corner_vectors() {
        let h = 3f64.sqrt() / 2.0;
        let coords = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, h)];
        let mesh = build_topology(vec![[0, 1, 2]], &coords, None).unwrap();
        let geo = compute_geometry(&mesh, &coords).unwrap();
        let c = geo.corner[0];
        let n0 = c[0].norm();
        assert!((c[1].norm() - n0).abs() < 1e-14 && (c[2].norm() - n0).abs() < 1e-14);
        for (a, b) in [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])] {
            let cosang = a.dot(b) / (a.norm() * b.norm());
            assert!((cosang - (-0.5)).abs() < 1e-13, "corner vectors not at 120 degrees");
        }
    }

    #[test]
    fn reference_map_round_trip() {
        let p = (Vec2::new(0.3, 0.1), Vec2::new(1.4, 0.5), Vec2::new(0.2, 1.9));
        let map = RefMap::new(p.0, p.1, p.2).unwrap();
        assert!((map.to_physical(Vec2::ZERO) - p.0).norm() < 1e-15);
        assert!((map.to_physical(Vec2::new(1.0, 0.0)) - p.1).norm() < 1e-15);
        assert!((map.to_physical(Vec2::new(0.0, 1.0)) - p.2).norm() < 1e-15);
        // Centroid maps to the reference barycenter.
        let c = (p.0 + p.1 + p.2) / 3.0;
        assert!((map.to_reference(c) - Vec2::new(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-14);
        let x = Vec2::new(0.77, 0.91);
        assert!((map.to_physical(map.to_reference(x)) - x).norm() < 1e-14);
        // Identity for the reference-shaped cell.
        let id = RefMap::new(Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)).unwrap();
        let x = Vec2::new(0.3, 0.4);
        assert!((id.to_reference(x) - x).norm() < 1e-15);
    }

    #[test]
    fn ascii_round_trip() {
        let coords = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mut mesh = build_topology(vec![[0, 1, 2], [0, 2, 3]], &coords, None).unwrap();
        for f in &mut mesh.faces {
            if f.is_boundary() {
                f.tag = 3;
            }
        }
        let dir = std::env::temp_dir().join("gpr_mesh_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("two_tri.txt");
        write_mesh_ascii(&mesh, &coords, &path).unwrap();
        let (back, coords2) = read_mesh_ascii(&path).unwrap();
        assert_eq!(back.n_cells(), 2);
        assert_eq!(coords2, coords);
        assert!(back.faces.iter().filter(|f| f.is_boundary()).all(|f| f.tag == 3));
    }
}
