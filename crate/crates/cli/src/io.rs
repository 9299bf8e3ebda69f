//! Mesh files, CSV tables and run manifests.
//!
//! Mesh file layout (coordinates use the shortest round-trip float text, so a
//! write/read cycle is lossless):
//!
//! ```text
//! RADIUS r
//! NODES n
//! id x y
//! TRIANGLES m
//! id v1 v2 v3
//! BOUNDARY k
//! v1 v2 TAG
//! SLITPAIRS s
//! plus minus
//! ```

use std::fmt::Write as _;
use std::path::Path;

use abpole_core::mesh::{BoundaryEdge, BoundaryTag, PlanarMesh};
use abpole_core::Point;

use crate::config::sha256_hex;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("mesh file describes an invalid mesh: {0}")]
    Mesh(#[from] abpole_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub fn write_mesh(mesh: &PlanarMesh) -> String {
    let mut s = String::new();
    writeln!(s, "RADIUS {}", mesh.radius()).unwrap();
    writeln!(s, "NODES {}", mesh.vertices().len()).unwrap();
    for (i, p) in mesh.vertices().iter().enumerate() {
        writeln!(s, "{i} {} {}", p.x, p.y).unwrap();
    }
    writeln!(s, "TRIANGLES {}", mesh.triangles().len()).unwrap();
    for (i, t) in mesh.triangles().iter().enumerate() {
        writeln!(s, "{i} {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "BOUNDARY {}", mesh.boundary_edges().len()).unwrap();
    for e in mesh.boundary_edges() {
        writeln!(s, "{} {} {}", e.v[0], e.v[1], e.tag.as_str()).unwrap();
    }
    writeln!(s, "SLITPAIRS {}", mesh.slit_pairs().len()).unwrap();
    for p in mesh.slit_pairs() {
        writeln!(s, "{} {}", p[0], p[1]).unwrap();
    }
    s
}

pub fn read_mesh(text: &str) -> Result<PlanarMesh, IoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut next = |want: &str| -> Result<(usize, Vec<String>), IoError> {
        let (i, l) =
            lines.next().ok_or(IoError::Parse { line: 0, msg: format!("unexpected end of file, expected {want}") })?;
        Ok((i + 1, l.split_whitespace().map(str::to_string).collect()))
    };
    fn err(line: usize, msg: impl Into<String>) -> IoError {
        IoError::Parse { line, msg: msg.into() }
    }
    fn num<T: std::str::FromStr>(line: usize, s: &str) -> Result<T, IoError> {
        s.parse().map_err(|_| err(line, format!("cannot parse `{s}`")))
    }
    let header = |(line, f): (usize, Vec<String>), name: &str| -> Result<usize, IoError> {
        match f.as_slice() {
            [h, n] if h == name => num(line, n),
            _ => Err(err(line, format!("expected `{name} <count>`"))),
        }
    };

    let (line, f) = next("RADIUS")?;
    let radius: f64 = match f.as_slice() {
        [h, r] if h == "RADIUS" => num(line, r)?,
        _ => return Err(err(line, "expected `RADIUS <r>`")),
    };
    let n = header(next("NODES")?, "NODES")?;
    let mut vertices = Vec::with_capacity(n);
    for k in 0..n {
        let (line, f) = next("node")?;
        match f.as_slice() {
            [id, x, y] if num::<usize>(line, id)? == k => vertices.push(Point::new(num(line, x)?, num(line, y)?)),
            _ => return Err(err(line, format!("expected node `{k} x y`"))),
        }
    }
    let m = header(next("TRIANGLES")?, "TRIANGLES")?;
    let mut triangles = Vec::with_capacity(m);
    for k in 0..m {
        let (line, f) = next("triangle")?;
        match f.as_slice() {
            [id, a, b, c] if num::<usize>(line, id)? == k => {
                triangles.push([num(line, a)?, num(line, b)?, num(line, c)?])
            }
            _ => return Err(err(line, format!("expected triangle `{k} v1 v2 v3`"))),
        }
    }
    let nb = header(next("BOUNDARY")?, "BOUNDARY")?;
    let mut boundary = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, f) = next("boundary edge")?;
        match f.as_slice() {
            [a, b, tag] => boundary.push(BoundaryEdge {
                v: [num(line, a)?, num(line, b)?],
                tag: BoundaryTag::parse(tag).ok_or_else(|| err(line, format!("unknown tag `{tag}`")))?,
            }),
            _ => return Err(err(line, "expected `v1 v2 TAG`")),
        }
    }
    let ns = header(next("SLITPAIRS")?, "SLITPAIRS")?;
    let mut pairs = Vec::with_capacity(ns);
    for _ in 0..ns {
        let (line, f) = next("slit pair")?;
        match f.as_slice() {
            [p, q] => pairs.push([num(line, p)?, num(line, q)?]),
            _ => return Err(err(line, "expected `plus minus`")),
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(err(line + 1, "trailing content"));
    }
    let nv = vertices.len();
    let bad_index = triangles
        .iter()
        .flatten()
        .chain(boundary.iter().flat_map(|e| &e.v))
        .chain(pairs.iter().flatten())
        .any(|&i| i >= nv);
    if bad_index {
        return Err(err(0, "vertex index out of range"));
    }
    Ok(PlanarMesh::from_parts(radius, vertices, triangles, boundary, pairs)?)
}

/// `x` with 12 significant digits, in the style of C's `%.12g`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let e: i32 = exp.parse().unwrap();
    if (-4..12).contains(&e) {
        let fixed = format!("{x:.*}", (11 - e) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if e < 0 { '-' } else { '+' }, e.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Csv {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

/// A CSV cell.
pub enum Cell<'a> {
    F(f64),
    I(i64),
    S(&'a str),
    B(bool),
}

impl Csv {
    pub fn new(header: &[&'static str]) -> Self {
        Csv { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: &[Cell]) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(
            row.iter()
                .map(|c| match c {
                    Cell::F(x) => fmt_float(*x),
                    Cell::I(i) => i.to_string(),
                    Cell::S(s) => s.to_string(),
                    Cell::B(b) => b.to_string(),
                })
                .collect(),
        );
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub const CRACK_HEADER: &[&str] = &["alpha", "j", "R_out", "h", "m_energy", "m_fourier", "dirichlet_energy", "omega1"];
pub const RAY_HEADER: &[&str] = &["alpha", "t", "lambda_a", "lambda_ref", "diff", "g_t"];
pub const SUMMARY_HEADER: &[&str] = &["alpha", "j", "fitted_exponent", "g_star", "minus2beta2mp", "rel_err", "sign_ok"];

/// Produced files, stage timings and the config hash of one run.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub timings: Vec<(String, f64)>,
    pub files: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "tool = abpole {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "command = {}", self.command).unwrap();
        writeln!(s, "config_sha256 = {}", self.config_hash).unwrap();
        for (stage, secs) in &self.timings {
            writeln!(s, "timing.{stage} = {secs:.3}").unwrap();
        }
        for (name, hash) in &self.files {
            writeln!(s, "file = {name} sha256:{hash}").unwrap();
        }
        s
    }
}

/// Writes each `(name, contents)` under `dir` and a `manifest.txt` listing them.
pub fn write_outputs(dir: &Path, files: &[(String, String)], mut manifest: Manifest) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in files {
        std::fs::write(dir.join(name), contents)?;
        manifest.files.push((name.clone(), sha256_hex(contents.as_bytes())));
    }
    std::fs::write(dir.join("manifest.txt"), manifest.render())
}
