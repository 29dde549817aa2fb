//! Plain-text dumps of normal-form bundles for regression fixtures.
//!
//! ```text
//! rpp-bundle 1
//! model ando
//! class H
//! L 6
//! ...
//! matrix M 24 24
//! <re> <im> <re> <im> ...   (one line per row)
//! end
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use symplectic_core::{c, max_abs_diff, ComplexMatrix, Result, RppError, SymmetryClass};

use crate::bundle::NormalFormBundle;
use crate::params::{Disorder, ModelKind, ModelParams};

const MAGIC: &str = "rpp-bundle 1";

/// Contents of a fixture file.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub params: ModelParams,
    pub class: SymmetryClass,
    pub matrices: BTreeMap<String, ComplexMatrix>,
}

impl Fixture {
    pub fn from_bundle(bundle: &NormalFormBundle) -> Self {
        let mut matrices = BTreeMap::new();
        for (name, m) in [
            ("M", &bundle.m),
            ("Q", &bundle.q),
            ("N", &bundle.n),
            ("R", &bundle.r),
            ("S0", &bundle.free_transfer),
        ] {
            matrices.insert(name.to_string(), m.clone());
        }
        Fixture { params: bundle.params.clone(), class: bundle.class, matrices }
    }

    /// Largest entrywise difference to the matching matrices of `bundle`.
    pub fn max_deviation(&self, bundle: &NormalFormBundle) -> Result<f64> {
        let other = Fixture::from_bundle(bundle);
        let mut worst = 0.0f64;
        for (name, m) in &self.matrices {
            let o = other
                .matrices
                .get(name)
                .ok_or_else(|| RppError::InvalidArgument(format!("bundle has no matrix {name}")))?;
            if o.shape() != m.shape() {
                return Err(RppError::dims("fixture matrix", format!("{:?}", m.shape()), format!("{:?}", o.shape())));
            }
            worst = worst.max(max_abs_diff(m, o));
        }
        Ok(worst)
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(s, "{MAGIC}");
        match p.model {
            ModelKind::Slab { n, d } => {
                let _ = writeln!(s, "model slab {n} {d}");
            }
            m => {
                let _ = writeln!(s, "model {}", m.name());
            }
        }
        let _ = writeln!(s, "class {}", self.class.letter());
        let _ = writeln!(s, "L {}", p.l);
        let _ = writeln!(s, "energy {:e}", p.energy);
        let _ = writeln!(s, "lambda {:e}", p.lambda);
        let phis: Vec<String> = p.phi.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(s, "phi {}", phis.join(" "));
        let _ = writeln!(s, "t {:e}", p.t);
        let _ = writeln!(s, "disorder {}", p.disorder);
        let _ = writeln!(s, "parabolic_tol {:e}", p.parabolic_tol);
        let _ = writeln!(s, "case_tol {:e}", p.case_tol);
        for (name, m) in &self.matrices {
            let _ = writeln!(s, "matrix {name} {} {}", m.nrows(), m.ncols());
            for r in 0..m.nrows() {
                let row: Vec<String> =
                    (0..m.ncols()).map(|j| format!("{:e} {:e}", m[(r, j)].re, m[(r, j)].im)).collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| RppError::InvalidArgument(format!("fixture: {m}"));
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        if lines.next() != Some(MAGIC) {
            return Err(bad(format!("missing header '{MAGIC}'")));
        }
        let mut header: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut matrices = BTreeMap::new();
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("bad number '{s}'")));
        while let Some(line) = lines.next() {
            let mut toks = line.split_whitespace();
            let key = toks.next().unwrap_or_default();
            let rest: Vec<String> = toks.map(String::from).collect();
            match key {
                "end" => break,
                "matrix" => {
                    let [name, rows, cols] = rest.as_slice() else {
                        return Err(bad(format!("bad matrix line '{line}'")));
                    };
                    let rows: usize = rows.parse().map_err(|_| bad(format!("bad row count '{rows}'")))?;
                    let cols: usize = cols.parse().map_err(|_| bad(format!("bad column count '{cols}'")))?;
                    let mut m = ComplexMatrix::zeros(rows, cols);
                    for r in 0..rows {
                        let row = lines.next().ok_or_else(|| bad(format!("matrix {name} truncated")))?;
                        let vals: Vec<&str> = row.split_whitespace().collect();
                        if vals.len() != 2 * cols {
                            return Err(bad(format!("matrix {name} row {r} has {} values", vals.len())));
                        }
                        for j in 0..cols {
                            m[(r, j)] = c(num(vals[2 * j])?, num(vals[2 * j + 1])?);
                        }
                    }
                    matrices.insert(name.clone(), m);
                }
                _ => {
                    header.insert(key.to_string(), rest);
                }
            }
        }
        let field = |k: &str| header.get(k).ok_or_else(|| bad(format!("missing field '{k}'")));
        let one = |k: &str| -> Result<f64> {
            let v = field(k)?;
            num(v.first().ok_or_else(|| bad(format!("empty field '{k}'")))?)
        };
        let model_tokens = field("model")?;
        let model = match model_tokens.first().map(String::as_str) {
            Some("anderson-magnetic") => ModelKind::AndersonMagnetic,
            Some("anderson-real") => ModelKind::AndersonReal,
            Some("ando") => ModelKind::Ando,
            Some("slab") => {
                let get = |i: usize| -> Result<usize> {
                    model_tokens
                        .get(i)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad("slab needs n and d".into()))
                };
                ModelKind::Slab { n: get(1)?, d: get(2)? }
            }
            other => return Err(bad(format!("unknown model {other:?}"))),
        };
        let class: SymmetryClass = field("class")?.join("").parse()?;
        let l = one("L")? as usize;
        let phi = field("phi")?.iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        let disorder: Disorder = field("disorder")?.join("").parse()?;
        let params = ModelParams {
            model,
            l,
            energy: one("energy")?,
            lambda: one("lambda")?,
            phi,
            t: one("t")?,
            disorder,
            parabolic_tol: one("parabolic_tol")?,
            case_tol: one("case_tol")?,
        };
        params.validate()?;
        if class != params.class() {
            return Err(bad(format!("class {class} does not match model {}", model.name())));
        }
        Ok(Fixture { params, class, matrices })
    }
}

pub fn write_fixture(bundle: &NormalFormBundle, path: &Path) -> Result<()> {
    std::fs::write(path, Fixture::from_bundle(bundle).to_text())
        .map_err(|e| RppError::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

pub fn read_fixture(path: &Path) -> Result<Fixture> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RppError::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    Fixture::parse(&text)
}
