//! Line-oriented text format:
//!
//! ```text
//! stmesh 1
//! vertices N
//! x t tag          (N lines)
//! triangles M
//! v0 v1 v2 region  (M lines)
//! interface_edges K
//! vi vj            (K lines)
//! ```
//!
//! Tokens are whitespace separated and `#` starts a comment. Reals are written
//! with 17 significant digits so a round trip is lossless.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{BoundaryTag, SpaceTimeMesh, Triangle};
use crate::error::{Error, Result};
use crate::problem::Subdomain;

pub fn write_mesh(mesh: &SpaceTimeMesh, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_mesh_to(mesh, &mut out)?;
    out.flush()?;
    Ok(())
}

pub fn write_mesh_to(mesh: &SpaceTimeMesh, out: &mut impl Write) -> Result<()> {
    writeln!(out, "stmesh 1")?;
    writeln!(out, "# h = {:.16e}", mesh.h)?;
    writeln!(out, "vertices {}", mesh.vertices.len())?;
    for (v, tag) in mesh.vertices.iter().zip(&mesh.boundary_tags) {
        writeln!(out, "{:.16e} {:.16e} {}", v[0], v[1], tag.bits())?;
    }
    writeln!(out, "triangles {}", mesh.triangles.len())?;
    for tri in &mesh.triangles {
        let [a, b, c] = tri.vertices;
        writeln!(out, "{a} {b} {c} {}", tri.region.label())?;
    }
    writeln!(out, "interface_edges {}", mesh.interface_edges.len())?;
    for [a, b] in &mesh.interface_edges {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

pub fn read_mesh(path: impl AsRef<Path>) -> Result<SpaceTimeMesh> {
    read_mesh_from(BufReader::new(File::open(path)?))
}

/// Significant lines with their 1-based line numbers.
struct Lines<R> {
    inner: std::io::Lines<R>,
    number: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_tokens(&mut self, section: &str) -> Result<(usize, Vec<String>)> {
        loop {
            let line = match self.inner.next() {
                Some(line) => line?,
                None => {
                    return Err(Error::Parse {
                        line: self.number + 1,
                        section: section.to_string(),
                        message: "unexpected end of file".into(),
                    })
                }
            };
            self.number += 1;
            let content = line.split('#').next().unwrap_or("");
            let tokens: Vec<String> = content.split_whitespace().map(str::to_string).collect();
            if !tokens.is_empty() {
                return Ok((self.number, tokens));
            }
        }
    }

    fn header(&mut self, section: &str) -> Result<usize> {
        let (line, tokens) = self.next_tokens(section)?;
        if tokens.len() != 2 || tokens[0] != section {
            return Err(Error::Parse {
                line,
                section: section.to_string(),
                message: format!("expected `{section} <count>`, found `{}`", tokens.join(" ")),
            });
        }
        parse_token(&tokens[1], line, section)
    }
}

fn parse_token<T: std::str::FromStr>(token: &str, line: usize, section: &str) -> Result<T> {
    token.parse().map_err(|_| Error::Parse {
        line,
        section: section.to_string(),
        message: format!("cannot parse `{token}`"),
    })
}

fn expect_len(tokens: &[String], n: usize, line: usize, section: &str) -> Result<()> {
    if tokens.len() != n {
        return Err(Error::Parse {
            line,
            section: section.to_string(),
            message: format!("expected {n} fields, found {}", tokens.len()),
        });
    }
    Ok(())
}

pub fn read_mesh_from(reader: impl BufRead) -> Result<SpaceTimeMesh> {
    let mut lines = Lines {
        inner: reader.lines(),
        number: 0,
    };

    let (line, tokens) = lines.next_tokens("header")?;
    if tokens != ["stmesh", "1"] {
        return Err(Error::Parse {
            line,
            section: "header".into(),
            message: format!("expected `stmesh 1`, found `{}`", tokens.join(" ")),
        });
    }

    let n_vertices = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(n_vertices);
    let mut tags = Vec::with_capacity(n_vertices);
    for _ in 0..n_vertices {
        let (line, tokens) = lines.next_tokens("vertices")?;
        expect_len(&tokens, 3, line, "vertices")?;
        let x: f64 = parse_token(&tokens[0], line, "vertices")?;
        let t: f64 = parse_token(&tokens[1], line, "vertices")?;
        let bits: u8 = parse_token(&tokens[2], line, "vertices")?;
        let tag = BoundaryTag::from_bits(bits).ok_or_else(|| {
            Error::Validation(format!("line {line}: boundary tag {bits} has unknown bits"))
        })?;
        vertices.push([x, t]);
        tags.push(tag);
    }

    let check_index = |v: usize, line: usize| {
        if v < n_vertices {
            Ok(v)
        } else {
            Err(Error::Validation(format!(
                "line {line}: vertex index {v} out of range (mesh has {n_vertices} vertices)"
            )))
        }
    };

    let n_triangles = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(n_triangles);
    for _ in 0..n_triangles {
        let (line, tokens) = lines.next_tokens("triangles")?;
        expect_len(&tokens, 4, line, "triangles")?;
        let mut vs = [0usize; 3];
        for (slot, token) in vs.iter_mut().zip(&tokens[..3]) {
            *slot = check_index(parse_token(token, line, "triangles")?, line)?;
        }
        let label: u8 = parse_token(&tokens[3], line, "triangles")?;
        let region = Subdomain::from_label(label).ok_or_else(|| {
            Error::Validation(format!("line {line}: region {label} ∉ {{1,2}}"))
        })?;
        triangles.push(Triangle {
            vertices: vs,
            region,
        });
    }

    let n_edges = lines.header("interface_edges")?;
    let mut edges = Vec::with_capacity(n_edges);
    for _ in 0..n_edges {
        let (line, tokens) = lines.next_tokens("interface_edges")?;
        expect_len(&tokens, 2, line, "interface_edges")?;
        let a = check_index(parse_token(&tokens[0], line, "interface_edges")?, line)?;
        let b = check_index(parse_token(&tokens[1], line, "interface_edges")?, line)?;
        edges.push([a, b]);
    }

    Ok(SpaceTimeMesh::from_parts(vertices, triangles, edges, tags))
}
