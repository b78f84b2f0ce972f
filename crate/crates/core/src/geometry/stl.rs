//! STL ingestion (ASCII and binary) and a small ASCII writer.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::Path;

use super::{MeshError, TriangleMesh, Vec3};

/// Loads an STL file; degenerate facets are dropped.
pub fn load_stl(path: impl AsRef<Path>) -> Result<TriangleMesh, MeshError> {
    let path = path.as_ref();
    let io_err = |source| MeshError::Io {
        path: path.display().to_string(),
        source,
    };
    let file = File::open(path).map_err(io_err)?;
    let mut reader = BufReader::new(file);
    let indexed = stl_io::read_stl(&mut reader).map_err(io_err)?;
    let vertices = indexed
        .vertices
        .iter()
        .map(|v| Vec3::new(v[0] as f64, v[1] as f64, v[2] as f64))
        .collect();
    let triangles = indexed.faces.iter().map(|f| f.vertices).collect();
    TriangleMesh::new(vertices, triangles)
}

/// Writes the mesh as an ASCII STL solid.
pub fn write_ascii_stl(mesh: &TriangleMesh, name: &str, mut out: impl Write) -> io::Result<()> {
    writeln!(out, "solid {name}")?;
    for k in 0..mesh.triangles().len() {
        let [a, b, c] = mesh.triangle(k);
        let n = (b - a).cross(&(c - a)).normalize();
        writeln!(out, "  facet normal {} {} {}", n.x, n.y, n.z)?;
        writeln!(out, "    outer loop")?;
        for p in [a, b, c] {
            writeln!(out, "      vertex {} {} {}", p.x, p.y, p.z)?;
        }
        writeln!(out, "    endloop")?;
        writeln!(out, "  endfacet")?;
    }
    writeln!(out, "endsolid {name}")
}
