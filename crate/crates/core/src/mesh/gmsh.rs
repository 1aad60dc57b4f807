//! Gmsh MSH ASCII reader (versions 2.2 and 4.1) and MSH 2.2 writer.
//!
//! Only simplicial volume elements of the mesh dimension are kept: 3-node
//! triangles (type 2) in 2D and 4-node tetrahedra (type 4) in 3D. Lower
//! dimensional elements are dropped and counted.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::error::{Error, Result};
use crate::linalg::Point;

#[derive(Debug)]
pub struct GmshImport {
    pub mesh: Mesh,
    /// Elements skipped because their dimension is below the mesh dimension.
    pub ignored_elements: usize,
}

/// Read a mesh file, logging how many lower-dimensional elements were dropped.
pub fn load_gmsh(path: impl AsRef<Path>) -> Result<Mesh> {
    let bytes = std::fs::read(path.as_ref())?;
    let text = String::from_utf8(bytes)
        .map_err(|_| Error::UnsupportedFormat("file is not ASCII (binary MSH?)".into()))?;
    let import = parse_gmsh(&text)?;
    if import.ignored_elements > 0 {
        log::warn!(
            "{}: ignored {} lower-dimensional elements",
            path.as_ref().display(),
            import.ignored_elements
        );
    }
    Ok(import.mesh)
}

#[derive(Clone, Copy, PartialEq)]
enum Version {
    V2,
    V4,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<&'a str> {
        for (i, l) in self.inner.by_ref() {
            let t = l.trim();
            if !t.is_empty() {
                self.line = i + 1;
                return Some(t);
            }
        }
        None
    }

    fn expect_line(&mut self, what: &str) -> Result<&'a str> {
        let line = self.line;
        self.next_line().ok_or_else(|| Error::MeshParse {
            line,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::MeshParse {
            line: self.line,
            message: message.into(),
        }
    }

    fn numbers<T: std::str::FromStr>(&mut self, what: &str) -> Result<Vec<T>> {
        let l = self.expect_line(what)?;
        l.split_whitespace()
            .map(|t| t.parse::<T>().map_err(|_| self.err(format!("bad {what}: {t:?}"))))
            .collect()
    }

    fn skip_section(&mut self, name: &str) -> Result<()> {
        let end = format!("$End{name}");
        loop {
            if self.expect_line(&end)? == end {
                return Ok(());
            }
        }
    }
}

/// `(dimension, vertex count)` for known Gmsh element type codes.
fn element_info(code: usize) -> Option<(usize, usize)> {
    Some(match code {
        15 => (0, 1),
        1 => (1, 2),
        8 => (1, 3),
        26 => (1, 4),
        27 => (1, 5),
        28 => (1, 6),
        2 => (2, 3),
        3 => (2, 4),
        9 => (2, 6),
        10 => (2, 9),
        16 => (2, 8),
        20 => (2, 9),
        21 => (2, 10),
        22 => (2, 12),
        23 => (2, 15),
        24 => (2, 15),
        25 => (2, 21),
        4 => (3, 4),
        5 => (3, 8),
        6 => (3, 6),
        7 => (3, 5),
        11 => (3, 10),
        12 => (3, 27),
        13 => (3, 18),
        14 => (3, 14),
        17 => (3, 20),
        18 => (3, 15),
        19 => (3, 13),
        29 => (3, 20),
        30 => (3, 35),
        31 => (3, 56),
        _ => return None,
    })
}

struct RawElement {
    tag: usize,
    code: usize,
    nodes: Vec<usize>,
}

pub fn parse_gmsh(text: &str) -> Result<GmshImport> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let mut version = None;
    let mut nodes: HashMap<usize, Point> = HashMap::new();
    let mut raw: Vec<RawElement> = Vec::new();

    while let Some(l) = lines.next_line() {
        let Some(name) = l.strip_prefix('$') else {
            return Err(lines.err(format!("expected a section header, found {l:?}")));
        };
        match name {
            "MeshFormat" => {
                let fmt = lines.expect_line("format line")?;
                let parts: Vec<&str> = fmt.split_whitespace().collect();
                if parts.len() < 3 {
                    return Err(lines.err("malformed $MeshFormat"));
                }
                if parts[1] != "0" {
                    return Err(Error::UnsupportedFormat("binary MSH files are not supported".into()));
                }
                version = Some(match parts[0] {
                    "2.2" => Version::V2,
                    "4.1" => Version::V4,
                    v => return Err(Error::UnsupportedFormat(format!("MSH version {v}"))),
                });
                lines.skip_section("MeshFormat")?;
            }
            "Nodes" => {
                let v = version.ok_or_else(|| Error::UnsupportedFormat("missing $MeshFormat".into()))?;
                read_nodes(&mut lines, v, &mut nodes)?;
                lines.skip_section("Nodes")?;
            }
            "Elements" => {
                let v = version.ok_or_else(|| Error::UnsupportedFormat("missing $MeshFormat".into()))?;
                read_elements(&mut lines, v, &mut raw)?;
                lines.skip_section("Elements")?;
            }
            other => lines.skip_section(other)?,
        }
    }
    if version.is_none() {
        return Err(Error::UnsupportedFormat("missing $MeshFormat".into()));
    }

    let mut dim = 0;
    for e in &raw {
        if let Some((d, _)) = element_info(e.code) {
            dim = dim.max(d);
        }
    }
    if dim < 2 {
        return Err(Error::UnsupportedFormat("no triangle or tetrahedron elements".into()));
    }
    let accepted = if dim == 2 { 2 } else { 4 };
    let mut volume_codes: Vec<usize> = raw
        .iter()
        .filter(|e| element_info(e.code).map(|i| i.0) == Some(dim))
        .map(|e| e.code)
        .collect();
    volume_codes.sort_unstable();
    volume_codes.dedup();
    if volume_codes != [accepted] {
        return Err(if volume_codes.len() > 1 {
            Error::MixedElementTypes(format!("element types {volume_codes:?} in dimension {dim}"))
        } else {
            Error::UnsupportedFormat(format!("element type {}", volume_codes[0]))
        });
    }

    let mut ignored = 0;
    let mut used: BTreeMap<usize, usize> = BTreeMap::new();
    let mut kept: Vec<&RawElement> = Vec::new();
    for e in &raw {
        if e.code != accepted {
            ignored += 1;
            continue;
        }
        for &n in &e.nodes {
            if !nodes.contains_key(&n) {
                return Err(Error::DanglingVertexReference {
                    element: e.tag,
                    node: n,
                });
            }
            used.insert(n, 0);
        }
        kept.push(e);
    }
    let mut vertices = Vec::with_capacity(used.len());
    for (i, (tag, slot)) in used.iter_mut().enumerate() {
        *slot = i;
        let mut p = nodes[tag];
        if dim == 2 {
            p[2] = 0.0;
        }
        vertices.push(p);
    }
    let elements = kept
        .iter()
        .map(|e| e.nodes.iter().map(|n| used[n]).collect())
        .collect();
    Ok(GmshImport {
        mesh: Mesh::new(dim, vertices, elements)?,
        ignored_elements: ignored,
    })
}

fn read_nodes(lines: &mut Lines, version: Version, nodes: &mut HashMap<usize, Point>) -> Result<()> {
    let coords = |vals: &[f64], lines: &Lines| -> Result<Point> {
        if vals.len() < 3 {
            return Err(lines.err("node needs three coordinates"));
        }
        Ok([vals[0], vals[1], vals[2]])
    };
    match version {
        Version::V2 => {
            let n: Vec<usize> = lines.numbers("node count")?;
            for _ in 0..*n.first().ok_or_else(|| lines.err("missing node count"))? {
                let l = lines.expect_line("node")?;
                let mut it = l.split_whitespace();
                let tag: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| lines.err("bad node tag"))?;
                let vals: Vec<f64> = it
                    .map(|t| t.parse().map_err(|_| lines.err(format!("bad coordinate {t:?}"))))
                    .collect::<Result<_>>()?;
                nodes.insert(tag, coords(&vals, lines)?);
            }
        }
        Version::V4 => {
            let header: Vec<usize> = lines.numbers("node header")?;
            if header.len() < 4 {
                return Err(lines.err("malformed $Nodes header"));
            }
            for _ in 0..header[0] {
                let block: Vec<usize> = lines.numbers("node block header")?;
                if block.len() < 4 {
                    return Err(lines.err("malformed node block header"));
                }
                let count = block[3];
                let mut tags = Vec::with_capacity(count);
                for _ in 0..count {
                    let t: Vec<usize> = lines.numbers("node tag")?;
                    tags.push(*t.first().ok_or_else(|| lines.err("missing node tag"))?);
                }
                for tag in tags {
                    let vals: Vec<f64> = lines.numbers("node coordinates")?;
                    nodes.insert(tag, coords(&vals, lines)?);
                }
            }
        }
    }
    Ok(())
}

fn read_elements(lines: &mut Lines, version: Version, raw: &mut Vec<RawElement>) -> Result<()> {
    match version {
        Version::V2 => {
            let n: Vec<usize> = lines.numbers("element count")?;
            for _ in 0..*n.first().ok_or_else(|| lines.err("missing element count"))? {
                let v: Vec<usize> = lines.numbers("element")?;
                if v.len() < 3 || v.len() < 3 + v[2] {
                    return Err(lines.err("malformed element line"));
                }
                let (tag, code, ntags) = (v[0], v[1], v[2]);
                let nodes = v[3 + ntags..].to_vec();
                check_node_count(lines, code, nodes.len())?;
                raw.push(RawElement { tag, code, nodes });
            }
        }
        Version::V4 => {
            let header: Vec<usize> = lines.numbers("element header")?;
            if header.len() < 4 {
                return Err(lines.err("malformed $Elements header"));
            }
            for _ in 0..header[0] {
                let block: Vec<usize> = lines.numbers("element block header")?;
                if block.len() < 4 {
                    return Err(lines.err("malformed element block header"));
                }
                let (code, count) = (block[2], block[3]);
                for _ in 0..count {
                    let v: Vec<usize> = lines.numbers("element")?;
                    if v.is_empty() {
                        return Err(lines.err("empty element line"));
                    }
                    let nodes = v[1..].to_vec();
                    check_node_count(lines, code, nodes.len())?;
                    raw.push(RawElement {
                        tag: v[0],
                        code,
                        nodes,
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_node_count(lines: &Lines, code: usize, found: usize) -> Result<()> {
    if let Some((_, n)) = element_info(code) {
        if n != found {
            return Err(lines.err(format!("element type {code} needs {n} nodes, found {found}")));
        }
    }
    Ok(())
}

/// Serialize as MSH 2.2 ASCII: vertices then elements, ids ascending from 1.
pub fn write_gmsh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let code = if mesh.dim() == 2 { 2 } else { 4 };
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.num_vertices());
    for (i, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {} {} {}", i + 1, p[0], p[1], p[2]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.num_elements());
    for (e, conn) in mesh.elements().enumerate() {
        let _ = write!(s, "{} {} 2 1 1", e + 1, code);
        for v in conn {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    s.push_str("$EndElements\n");
    s
}
