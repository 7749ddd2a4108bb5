//! Versioned, checksummed model files.
//!
//! Every document is
//!
//! ```text
//! bayeswords <kind> v1
//! <body>
//! checksum sha256:<hex digest of everything above this line>
//! ```
//!
//! Floats are written in shortest round-trip form, so loading reproduces
//! every parameter bit for bit. A block-classifier model is one file with a
//! JSON body; a coupled-HMM model is a directory holding an index, the two
//! window codebooks and one document per class.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bayeswords_core::dbn::{ClassModelBank, CoupledHmm};
use bayeswords_core::imaging::Binarization;
use bayeswords_core::moments::ZernikeIndex;
use bayeswords_core::quantize::{Codebook, Discretization, Discretizer, PcaModel, Projection};
use sha2::{Digest, Sha256};

use crate::error::{io_error, Error, Result, Stage, StageExt};
use crate::pipeline::{DbnModel, Model, StaticModel};

pub const FORMAT_VERSION: u32 = 1;

pub const STATIC_KIND: &str = "static-model";
pub const CODEBOOK_KIND: &str = "codebook";
pub const COUPLED_HMM_KIND: &str = "coupled-hmm";
pub const DBN_INDEX_KIND: &str = "dbn-index";

const INDEX_FILE: &str = "index.txt";

fn digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Wraps `body` in the header and checksum lines.
pub fn encode_document(kind: &str, body: &str) -> String {
    let mut out = format!("bayeswords {kind} v{FORMAT_VERSION}\n{body}");
    if !out.ends_with('\n') {
        out.push('\n');
    }
    let sum = digest(&out);
    let _ = writeln!(out, "checksum sha256:{sum}");
    out
}

/// Checks header, version and checksum and returns the body.
pub fn decode_document<'a>(kind: &str, text: &'a str) -> Result<&'a str> {
    let (header, _) = text
        .split_once('\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let found = header
        .strip_prefix("bayeswords ")
        .and_then(|rest| rest.strip_prefix(kind))
        .and_then(|rest| rest.strip_prefix(' '))
        .ok_or_else(|| {
            Error::Format(format!(
                "expected a `{kind}` document, found header `{header}`"
            ))
        })?;
    if found != format!("v{FORMAT_VERSION}") {
        return Err(Error::Version {
            kind: kind.into(),
            found: found.into(),
            expected: FORMAT_VERSION,
        });
    }
    let checksum_at = text
        .rfind("checksum sha256:")
        .ok_or_else(|| Error::Checksum { kind: kind.into() })?;
    let (signed, trailer) = text.split_at(checksum_at);
    let claimed = trailer["checksum sha256:".len()..].strip_suffix('\n');
    if !signed.ends_with('\n') || claimed != Some(digest(signed).as_str()) {
        return Err(Error::Checksum { kind: kind.into() });
    }
    Ok(&signed[header.len() + 1..])
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_error(path))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_error(path))
}

/// Line-oriented reader over a document body.
struct Lines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(body: &'a str) -> Self {
        Self {
            lines: body.lines().enumerate(),
        }
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn field(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let (i, line) = self
            .lines
            .next()
            .ok_or_else(|| Error::Format(format!("unexpected end of body, expected `{key}`")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::Format(format!(
                "body line {}: expected `{key}`, found `{line}`",
                i + 1
            )));
        }
        Ok(parts.collect())
    }

    fn numbers<T: std::str::FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        self.field(key)?
            .into_iter()
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Format(format!("`{key}`: invalid number `{v}`")))
            })
            .collect()
    }

    fn fixed<T: std::str::FromStr + Copy, const N: usize>(&mut self, key: &str) -> Result<[T; N]> {
        let values = self.numbers::<T>(key)?;
        values.try_into().map_err(|v: Vec<T>| {
            Error::Format(format!("`{key}`: expected {N} value(s), found {}", v.len()))
        })
    }

    fn finish(mut self) -> Result<()> {
        match self.lines.next() {
            None => Ok(()),
            Some((i, line)) => Err(Error::Format(format!(
                "body line {}: unexpected `{line}`",
                i + 1
            ))),
        }
    }
}

fn join(values: &[f64]) -> String {
    let mut out = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:?}");
    }
    out
}

fn write_rows(out: &mut String, key: &str, rows: &[Vec<f64>]) {
    for r in rows {
        let _ = writeln!(out, "{key} {}", join(r));
    }
}

fn read_rows(lines: &mut Lines<'_>, key: &str, count: usize, dim: usize) -> Result<Vec<Vec<f64>>> {
    (0..count)
        .map(|_| {
            let row = lines.numbers::<f64>(key)?;
            if row.len() != dim {
                return Err(Error::Format(format!(
                    "`{key}`: expected {dim} value(s), found {}",
                    row.len()
                )));
            }
            Ok(row)
        })
        .collect()
}

/// Codebook document body.
pub fn format_discretizer(d: &Discretizer) -> String {
    let mut out = String::new();
    let mode = match d.mode {
        Discretization::PerAttribute => "per-attribute",
        Discretization::PerVector => "per-vector",
    };
    let _ = writeln!(out, "mode {mode}");
    let _ = writeln!(out, "seed {}", d.seed);
    match &d.projection {
        None => out.push_str("projection 0 0\n"),
        Some(p) => {
            let _ = writeln!(out, "projection {} {}", p.dim, p.pca.retained());
            let kept: Vec<String> = p.kept.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "kept {}", kept.join(" "));
            let _ = writeln!(out, "means {}", join(&p.means));
            let _ = writeln!(out, "stds {}", join(&p.stds));
            let _ = writeln!(out, "eigenvalues {}", join(&p.pca.eigenvalues));
            write_rows(&mut out, "component", &p.pca.components);
        }
    }
    let _ = writeln!(out, "codebooks {}", d.codebooks.len());
    for (cb, inertia) in d.codebooks.iter().zip(&d.inertias) {
        let _ = writeln!(out, "codebook {} {} {inertia:?}", cb.k(), cb.dim());
        write_rows(&mut out, "centroid", &cb.centroids);
    }
    out
}

pub fn parse_discretizer(body: &str) -> Result<Discretizer> {
    let mut lines = Lines::new(body);
    let mode = match lines.field("mode")?.as_slice() {
        ["per-attribute"] => Discretization::PerAttribute,
        ["per-vector"] => Discretization::PerVector,
        other => {
            return Err(Error::Format(format!(
                "unknown discretization mode {other:?}"
            )))
        }
    };
    let [seed] = lines.fixed::<u64, 1>("seed")?;
    let [dim, retained] = lines.fixed::<usize, 2>("projection")?;
    let projection = if dim == 0 {
        None
    } else {
        let kept: Vec<usize> = lines.numbers("kept")?;
        if kept.iter().any(|&c| c >= dim) {
            return Err(Error::Format(format!(
                "kept column out of range in {kept:?}"
            )));
        }
        let means = lines.numbers("means")?;
        let stds = lines.numbers("stds")?;
        let eigenvalues = lines.numbers("eigenvalues")?;
        let components = read_rows(&mut lines, "component", retained, kept.len())?;
        Some(Projection {
            dim,
            kept,
            means,
            stds,
            pca: PcaModel {
                components,
                eigenvalues,
            },
        })
    };
    let [count] = lines.fixed::<usize, 1>("codebooks")?;
    let mut codebooks = Vec::with_capacity(count);
    let mut inertias = Vec::with_capacity(count);
    for _ in 0..count {
        let header = lines.field("codebook")?;
        let parse_err = || Error::Format(format!("invalid codebook header {header:?}"));
        let [k, dim, inertia] = header.as_slice() else {
            return Err(parse_err());
        };
        let (k, dim): (usize, usize) = (
            k.parse().map_err(|_| parse_err())?,
            dim.parse().map_err(|_| parse_err())?,
        );
        inertias.push(inertia.parse::<f64>().map_err(|_| parse_err())?);
        codebooks.push(Codebook::new(read_rows(&mut lines, "centroid", k, dim)?)?);
    }
    lines.finish()?;
    Ok(Discretizer {
        mode,
        projection,
        codebooks,
        inertias,
        seed,
    })
}

/// Coupled-HMM document body: state and symbol counts, then every table
/// one row per line.
pub fn format_coupled_hmm(m: &CoupledHmm) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "states {} {}", m.states[0], m.states[1]);
    let _ = writeln!(out, "symbols {} {}", m.symbols[0], m.symbols[1]);
    for l in 0..2 {
        let _ = writeln!(out, "pi {}", join(&m.pi[l]));
    }
    for l in 0..2 {
        for row in m.trans[l].chunks(m.states[l]) {
            let _ = writeln!(out, "trans{} {}", l + 1, join(row));
        }
    }
    for l in 0..2 {
        for row in m.emit[l].chunks(m.symbols[l]) {
            let _ = writeln!(out, "emit{} {}", l + 1, join(row));
        }
    }
    out
}

pub fn parse_coupled_hmm(body: &str) -> Result<CoupledHmm> {
    let mut lines = Lines::new(body);
    let states = lines.fixed::<usize, 2>("states")?;
    let symbols = lines.fixed::<usize, 2>("symbols")?;
    let pi = [lines.numbers("pi")?, lines.numbers("pi")?];
    let joint = states[0] * states[1];
    let mut table = |key: &str, rows: usize, len: usize| -> Result<Vec<f64>> {
        Ok(read_rows(&mut lines, key, rows, len)?.concat())
    };
    let trans = [
        table("trans1", joint, states[0])?,
        table("trans2", joint, states[1])?,
    ];
    let emit = [
        table("emit1", states[0], symbols[0])?,
        table("emit2", states[1], symbols[1])?,
    ];
    lines.finish()?;
    Ok(CoupledHmm::new(states, symbols, pi, trans, emit)?)
}

fn format_binarization(b: Binarization) -> String {
    match b {
        Binarization::Otsu => "otsu".into(),
        Binarization::Fixed(t) => format!("fixed {t}"),
    }
}

fn codebook_file(axis: &str) -> String {
    format!("{axis}.codebook")
}

fn class_file(c: usize) -> String {
    format!("class-{:03}.chmm", c + 1)
}

/// Writes `model` to `path`: a file for block classifiers, a directory for
/// coupled HMMs.
pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    match model {
        Model::Static(m) => save_static(m, path),
        Model::Dbn(m) => save_dbn(m, path),
    }
    .stage(Stage::Persist)
}

/// Reads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<Model> {
    if path.is_dir() {
        load_dbn(path).map(Model::Dbn)
    } else {
        load_static(path).map(Model::Static)
    }
    .stage(Stage::Persist)
}

pub fn save_static(m: &StaticModel, path: &Path) -> Result<()> {
    let body = serde_json::to_string_pretty(m)?;
    write_file(path, &encode_document(STATIC_KIND, &body))
}

pub fn load_static(path: &Path) -> Result<StaticModel> {
    let text = read_file(path)?;
    Ok(serde_json::from_str(decode_document(STATIC_KIND, &text)?)?)
}

pub fn save_discretizer(d: &Discretizer, path: &Path) -> Result<()> {
    write_file(
        path,
        &encode_document(CODEBOOK_KIND, &format_discretizer(d)),
    )
}

pub fn load_discretizer(path: &Path) -> Result<Discretizer> {
    let text = read_file(path)?;
    parse_discretizer(decode_document(CODEBOOK_KIND, &text)?)
}

pub fn save_dbn(m: &DbnModel, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    save_discretizer(&m.horizontal, &dir.join(codebook_file("horizontal")))?;
    save_discretizer(&m.vertical, &dir.join(codebook_file("vertical")))?;
    let mut index = String::new();
    let _ = writeln!(index, "classes {}", m.classes);
    let _ = writeln!(index, "window {}", m.window);
    let _ = writeln!(
        index,
        "binarization {}",
        format_binarization(m.binarization)
    );
    let zernike: Vec<String> = m.zernike.iter().map(|(n, r)| format!("{n}:{r}")).collect();
    let _ = writeln!(index, "zernike {}", zernike.join(" "));
    for (c, model) in m.bank.models.iter().enumerate() {
        let name = class_file(c);
        write_file(
            &dir.join(&name),
            &encode_document(COUPLED_HMM_KIND, &format_coupled_hmm(model)),
        )?;
        let _ = writeln!(
            index,
            "class {} {} {} {name}",
            c + 1,
            model.states[0],
            model.states[1]
        );
    }
    write_file(
        &dir.join(INDEX_FILE),
        &encode_document(DBN_INDEX_KIND, &index),
    )
}

fn parse_zernike(fields: &[&str]) -> Result<[ZernikeIndex; 5]> {
    let pairs = fields
        .iter()
        .map(|f| {
            let (n, m) = f
                .split_once(':')
                .ok_or_else(|| Error::Format(format!("zernike index `{f}`")))?;
            Ok((
                n.parse()
                    .map_err(|_| Error::Format(format!("zernike index `{f}`")))?,
                m.parse()
                    .map_err(|_| Error::Format(format!("zernike index `{f}`")))?,
            ))
        })
        .collect::<Result<Vec<ZernikeIndex>>>()?;
    pairs
        .try_into()
        .map_err(|_| Error::Format("zernike needs five indices".into()))
}

pub fn load_dbn(dir: &Path) -> Result<DbnModel> {
    let text = read_file(&dir.join(INDEX_FILE))?;
    let mut lines = Lines::new(decode_document(DBN_INDEX_KIND, &text)?);
    let [classes] = lines.fixed::<usize, 1>("classes")?;
    let [window] = lines.fixed::<usize, 1>("window")?;
    let binarization = match lines.field("binarization")?.as_slice() {
        ["otsu"] => Binarization::Otsu,
        ["fixed", t] => Binarization::Fixed(
            t.parse()
                .map_err(|_| Error::Format(format!("threshold `{t}`")))?,
        ),
        other => return Err(Error::Format(format!("binarization {other:?}"))),
    };
    let zernike = parse_zernike(&lines.field("zernike")?)?;
    let mut models = Vec::with_capacity(classes);
    for c in 0..classes {
        let fields = lines.field("class")?;
        let [id, q1, q2, name] = fields.as_slice() else {
            return Err(Error::Format(format!("class entry {fields:?}")));
        };
        if *id != (c + 1).to_string() {
            return Err(Error::Format(format!(
                "class entry {fields:?} out of order"
            )));
        }
        let path: PathBuf = dir.join(name);
        let doc = read_file(&path)?;
        let model = parse_coupled_hmm(decode_document(COUPLED_HMM_KIND, &doc)?)?;
        if [q1.to_string(), q2.to_string()]
            != [model.states[0].to_string(), model.states[1].to_string()]
        {
            return Err(Error::Format(format!(
                "{}: state counts disagree with the index",
                path.display()
            )));
        }
        models.push(model);
    }
    lines.finish()?;
    Ok(DbnModel {
        classes,
        window,
        binarization,
        zernike,
        horizontal: load_discretizer(&dir.join(codebook_file("horizontal")))?,
        vertical: load_discretizer(&dir.join(codebook_file("vertical")))?,
        bank: ClassModelBank::new(models)?,
    })
}
