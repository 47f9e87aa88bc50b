//! Plain-text model container.
//!
//! Desk-scale models (at most a few hundred thousand doubles) are stored as
//! human-inspectable text: a `key=value` header, a `PATTERNS` block with one
//! `+/-1` row per stored pattern, and an `ALPHA` block with the dual
//! variables at 17 significant digits, which round-trips every double
//! bit-exactly.
//!
//! ```text
//! format_version=1
//! n=50
//! p=150
//! gamma=0.1
//! lambda=0.01
//! learning_rate=0.1
//! iterations=500
//! seed=7
//! PATTERNS
//! 1 -1 1 ...
//! ALPHA
//! 2.9948752214089232e0 ...
//! ```

use crate::kernel::{BipolarVector, KernelParams, PatternSet};
use crate::trainer::{DualWeights, TrainConfig};
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

pub const FORMAT_VERSION: u32 = 1;

/// A trained model with everything needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub train: TrainConfig,
    pub seed: u64,
    pub patterns: PatternSet,
    pub weights: DualWeights,
}

impl ModelFile {
    pub fn n(&self) -> usize {
        self.patterns.n()
    }

    pub fn p(&self) -> usize {
        self.patterns.len()
    }

    pub fn gamma(&self) -> f64 {
        self.weights.params().gamma()
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

/// Serializes a model to its text representation.
pub fn model_to_string(model: &ModelFile) -> String {
    let n = model.n();
    let p = model.p();
    let mut out = String::new();
    out.push_str(&format!("format_version={FORMAT_VERSION}\n"));
    out.push_str(&format!("n={n}\n"));
    out.push_str(&format!("p={p}\n"));
    out.push_str(&format!("gamma={:.16e}\n", model.gamma()));
    out.push_str(&format!("lambda={:.16e}\n", model.train.weight_decay));
    out.push_str(&format!("learning_rate={:.16e}\n", model.train.learning_rate));
    out.push_str(&format!("iterations={}\n", model.train.iterations));
    out.push_str(&format!("seed={}\n", model.seed));
    out.push_str("PATTERNS\n");
    for pattern in model.patterns.iter() {
        let row: Vec<String> = pattern.values().iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out.push_str("ALPHA\n");
    for mu in 0..p {
        let row: Vec<String> =
            (0..n).map(|i| format!("{:.16e}", model.weights.entry(mu, i))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn save_model(model: &ModelFile, path: &Path) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(io_err(path))?;
    file.write_all(model_to_string(model).as_bytes()).map_err(io_err(path))?;
    Ok(())
}

struct Parser<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Parser<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        self.lines.next().map(|(idx, line)| (idx + 1, line))
    }

    fn expect_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_line().ok_or_else(|| Error::ModelParse {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    }

    fn header_value(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (line, text) = self.expect_line(&format!("`{key}=`"))?;
        match text.split_once('=') {
            Some((k, v)) if k == key => Ok((line, v)),
            _ => Err(Error::ModelParse {
                line,
                message: format!("expected `{key}=<value>`, found `{text}`"),
            }),
        }
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, what: &str, text: &str) -> Result<T> {
    text.parse().map_err(|_| Error::ModelParse {
        line,
        message: format!("malformed {what}: `{text}`"),
    })
}

/// Parses the text representation produced by [`model_to_string`].
pub fn model_from_str(text: &str) -> Result<ModelFile> {
    let mut parser = Parser { lines: text.lines().enumerate() };

    let (line, version) = parser.header_value("format_version")?;
    let version: u32 = parse_num(line, "format version", version)?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found: version, expected: FORMAT_VERSION });
    }
    let (line, v) = parser.header_value("n")?;
    let n: usize = parse_num(line, "network size", v)?;
    let (line, v) = parser.header_value("p")?;
    let p: usize = parse_num(line, "pattern count", v)?;
    let (line, v) = parser.header_value("gamma")?;
    let gamma: f64 = parse_num(line, "gamma", v)?;
    let (line, v) = parser.header_value("lambda")?;
    let lambda: f64 = parse_num(line, "lambda", v)?;
    let (line, v) = parser.header_value("learning_rate")?;
    let learning_rate: f64 = parse_num(line, "learning rate", v)?;
    let (line, v) = parser.header_value("iterations")?;
    let iterations: usize = parse_num(line, "iteration count", v)?;
    let (line, v) = parser.header_value("seed")?;
    let seed: u64 = parse_num(line, "seed", v)?;

    let (line, text) = parser.expect_line("`PATTERNS`")?;
    if text != "PATTERNS" {
        return Err(Error::ModelParse {
            line,
            message: format!("expected `PATTERNS`, found `{text}`"),
        });
    }
    let mut patterns = Vec::with_capacity(p);
    for _ in 0..p {
        let (line, row) = parser.expect_line("a pattern row")?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != n {
            return Err(Error::ModelParse {
                line,
                message: format!("pattern row has {} entries, expected n={n}", entries.len()),
            });
        }
        let mut values = Vec::with_capacity(n);
        for entry in entries {
            let v: i8 = parse_num(line, "pattern entry", entry)?;
            values.push(v);
        }
        let pattern = BipolarVector::new(values).map_err(|e| Error::ModelParse {
            line,
            message: e.to_string(),
        })?;
        patterns.push(pattern);
    }
    let patterns = PatternSet::new(n, patterns)
        .map_err(|e| Error::ModelParse { line: 0, message: e.to_string() })?;

    let (line, text) = parser.expect_line("`ALPHA`")?;
    if text != "ALPHA" {
        return Err(Error::ModelParse { line, message: format!("expected `ALPHA`, found `{text}`") });
    }
    let mut alpha = vec![0.0_f64; n * p]; // neuron-major
    for mu in 0..p {
        let (line, row) = parser.expect_line("an alpha row")?;
        let entries: Vec<&str> = row.split_whitespace().collect();
        if entries.len() != n {
            return Err(Error::ModelParse {
                line,
                message: format!("alpha row has {} entries, expected n={n}", entries.len()),
            });
        }
        for (i, entry) in entries.iter().enumerate() {
            alpha[i * p + mu] = parse_num(line, "alpha entry", entry)?;
        }
    }

    while let Some((line, text)) = parser.next_line() {
        if !text.trim().is_empty() {
            return Err(Error::ModelParse {
                line,
                message: format!("unexpected trailing content: `{text}`"),
            });
        }
    }

    let params = KernelParams::new(gamma)?;
    let weights = DualWeights::from_neuron_major(n, p, params, alpha)?;
    Ok(ModelFile {
        train: TrainConfig { learning_rate, weight_decay: lambda, iterations },
        seed,
        patterns,
        weights,
    })
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    model_from_str(&text)
}
