//! XYZ and ASCII PLY readers and writers, plus per-point label files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::MatrixXx3;

use super::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    /// Whitespace-separated `x y z` per line, `#` starts a comment.
    Xyz,
    /// ASCII PLY with a single `vertex` element.
    PlyAscii,
}

impl CloudFormat {
    /// Guesses the format from a file extension; anything but `.ply` is XYZ.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("ply") => CloudFormat::PlyAscii,
            _ => CloudFormat::Xyz,
        }
    }
}

impl FromStr for CloudFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" => Ok(CloudFormat::Xyz),
            "ply" | "ply-ascii" => Ok(CloudFormat::PlyAscii),
            other => Err(Error::invalid(format!("unknown cloud format `{other}`"))),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let text = read(path)?;
    match format {
        CloudFormat::Xyz => parse_xyz(&text),
        CloudFormat::PlyAscii => parse_ply(&text),
    }
}

pub fn save_cloud(path: &Path, cloud: &PointCloud, format: CloudFormat) -> Result<()> {
    let text = match format {
        CloudFormat::Xyz => format_xyz(cloud),
        CloudFormat::PlyAscii => format_ply(cloud),
    };
    write(path, &text)
}

fn parse_coord(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("`{token}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("non-finite value `{token}`")));
    }
    Ok(v)
}

fn finish(points: Vec<[f64; 3]>) -> Result<PointCloud> {
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    PointCloud::new(MatrixXx3::from_fn(points.len(), |i, j| points[i][j]))
}

/// Extra columns after the first three (intensity, colour) are ignored.
pub(crate) fn parse_xyz(text: &str) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() < 3 {
            return Err(Error::parse(
                line,
                format!("expected 3 coordinates, found {}", tokens.len()),
            ));
        }
        let mut p = [0.0; 3];
        for (slot, tok) in p.iter_mut().zip(&tokens) {
            *slot = parse_coord(tok, line)?;
        }
        points.push(p);
    }
    finish(points)
}

const PLY_SCALARS: &[&str] = &[
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double", "int8", "uint8",
    "int16", "uint16", "int32", "uint32", "float32", "float64",
];

pub(crate) fn parse_ply(text: &str) -> Result<PointCloud> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    match lines.next() {
        Some((_, "ply")) => {}
        Some((line, _)) => return Err(Error::parse(line, "missing `ply` magic")),
        None => return Err(Error::NoPoints),
    }

    let mut vertex_count: Option<usize> = None;
    let mut properties: Vec<String> = Vec::new();
    let mut header_done = false;
    for (line, content) in lines.by_ref() {
        let mut parts = content.split_whitespace();
        match parts.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => match parts.next() {
                Some("ascii") => {}
                Some(other) => {
                    return Err(Error::parse(line, format!("unsupported PLY format `{other}`")))
                }
                None => return Err(Error::parse(line, "format line without a format")),
            },
            Some("element") => {
                let name = parts.next().unwrap_or("");
                if name != "vertex" {
                    return Err(Error::parse(line, format!("unsupported PLY element `{name}`")));
                }
                if vertex_count.is_some() {
                    return Err(Error::parse(line, "duplicate vertex element"));
                }
                let count = parts
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| Error::parse(line, "vertex element without a count"))?;
                vertex_count = Some(count);
            }
            Some("property") => {
                if vertex_count.is_none() {
                    return Err(Error::parse(line, "property before any element"));
                }
                let ty = parts.next().unwrap_or("");
                if ty == "list" {
                    return Err(Error::parse(line, "list properties are not supported"));
                }
                if !PLY_SCALARS.contains(&ty) {
                    return Err(Error::parse(line, format!("unknown property type `{ty}`")));
                }
                let name = parts
                    .next()
                    .ok_or_else(|| Error::parse(line, "property without a name"))?;
                properties.push(name.to_string());
            }
            Some("end_header") => {
                header_done = true;
                break;
            }
            Some(other) => {
                return Err(Error::parse(line, format!("unexpected header keyword `{other}`")))
            }
        }
    }
    if !header_done {
        return Err(Error::parse(0, "missing end_header"));
    }
    let count = vertex_count.ok_or_else(|| Error::parse(0, "no vertex element"))?;
    let column = |name: &str| {
        properties
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::parse(0, format!("vertex element lacks property `{name}`")))
    };
    let cols = [column("x")?, column("y")?, column("z")?];

    let mut points = Vec::with_capacity(count);
    let mut last_line = 0;
    for (line, content) in lines {
        last_line = line;
        if content.is_empty() {
            continue;
        }
        if points.len() == count {
            return Err(Error::parse(line, "more vertex records than declared"));
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != properties.len() {
            return Err(Error::parse(
                line,
                format!("expected {} values, found {}", properties.len(), tokens.len()),
            ));
        }
        let mut p = [0.0; 3];
        for (slot, &c) in p.iter_mut().zip(&cols) {
            *slot = parse_coord(tokens[c], line)?;
        }
        points.push(p);
    }
    if points.len() < count {
        return Err(Error::parse(
            last_line,
            format!("declared {count} vertices, found {}", points.len()),
        ));
    }
    finish(points)
}

// `{}` on f64 prints the shortest representation that round-trips exactly.
fn format_xyz(cloud: &PointCloud) -> String {
    let mut out = String::with_capacity(cloud.len() * 48);
    for i in 0..cloud.len() {
        let [x, y, z] = cloud.point(i);
        let _ = writeln!(out, "{x} {y} {z}");
    }
    out
}

fn format_ply(cloud: &PointCloud) -> String {
    let mut out = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.len()
    );
    out.push_str(&format_xyz(cloud));
    out
}

pub fn load_labels(path: &Path) -> Result<Vec<u32>> {
    parse_labels(&read(path)?)
}

pub(crate) fn parse_labels(text: &str) -> Result<Vec<u32>> {
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        let label = content
            .parse::<u32>()
            .map_err(|_| Error::parse(idx + 1, format!("`{content}` is not a nonnegative integer")))?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::NoLabels);
    }
    Ok(labels)
}

/// One integer per line, in point order.
pub fn save_labels<T: std::fmt::Display>(path: &Path, labels: &[T]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    write(path, &out)
}
