//! Knot table and basic-loop presets, stored as sectioned key-value text.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::braid::{parse_braid_word, BraidWord};
use crate::construct::{BasePolynomial, BasicLoop, ConstructError, LoopPiece, TrigTerm};

const BUILTIN: &str = include_str!("presets.conf");

#[derive(Debug, Error)]
pub enum PresetError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("section [{section}]: {msg}")]
    Section { section: String, msg: String },
    #[error("unknown knot {0:?}")]
    UnknownKnot(String),
    #[error("no {construction} loops for {strands} strands")]
    NoLoops {
        construction: Construction,
        strands: usize,
    },
    #[error(transparent)]
    Construct(#[from] ConstructError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Construction {
    Gaussian,
    Polybeam,
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Construction::Gaussian => "gaussian",
            Construction::Polybeam => "polybeam",
        })
    }
}

impl FromStr for Construction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gaussian" => Ok(Construction::Gaussian),
            "polybeam" | "polynomial" => Ok(Construction::Polybeam),
            other => Err(format!(
                "unknown construction {other:?} (gaussian or polybeam)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Torus,
    Lemniscate,
}

/// One row of the knot table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnotPreset {
    pub name: String,
    pub word: BraidWord,
    /// Fourier order, inverse root scale and inverse radial scale for the Gaussian construction.
    pub m1: usize,
    pub a1_inv: f64,
    pub mu_inv: f64,
    /// Fourier order and inverse root scale for the polynomial-beam construction.
    pub m2: usize,
    pub a2_inv: f64,
    pub family: Option<Family>,
}

impl KnotPreset {
    pub fn strands(&self) -> usize {
        self.word.strands()
    }

    pub fn order(&self, c: Construction) -> usize {
        match c {
            Construction::Gaussian => self.m1,
            Construction::Polybeam => self.m2,
        }
    }

    pub fn a_inv(&self, c: Construction) -> f64 {
        match c {
            Construction::Gaussian => self.a1_inv,
            Construction::Polybeam => self.a2_inv,
        }
    }
}

/// Base polynomial roots and basic loops for one construction and strand count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoopPreset {
    pub construction: Construction,
    /// Strand count of the knot braid (the polynomial-beam polynomial has one more root).
    pub strands: usize,
    pub roots: Vec<f64>,
    pub loops: Vec<BasicLoop>,
}

impl LoopPreset {
    pub fn polynomial(&self) -> Result<BasePolynomial, ConstructError> {
        BasePolynomial::new(&self.roots)
    }

    /// Preset identifier used in cache keys and reports.
    pub fn id(&self) -> String {
        format!("{}.{}", self.construction, self.strands)
    }
}

#[derive(Debug, Clone, Default)]
pub struct PresetBook {
    knots: BTreeMap<String, KnotPreset>,
    loops: BTreeMap<(Construction, usize), LoopPreset>,
}

type Sections = Vec<(String, usize, Vec<(String, String)>)>;

fn split_sections(text: &str) -> Result<Sections, PresetError> {
    let mut out: Sections = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| PresetError::Syntax {
                line: i + 1,
                msg: "unterminated section header".into(),
            })?;
            out.push((name.trim().to_string(), i + 1, Vec::new()));
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| PresetError::Syntax {
            line: i + 1,
            msg: format!("expected key = value, got {line:?}"),
        })?;
        let section = out.last_mut().ok_or_else(|| PresetError::Syntax {
            line: i + 1,
            msg: "key outside of a section".into(),
        })?;
        section.2.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn numbers(section: &str, s: &str) -> Result<Vec<f64>, PresetError> {
    s.split_whitespace()
        .map(|t| {
            t.parse::<f64>().map_err(|_| PresetError::Section {
                section: section.to_string(),
                msg: format!("bad number {t:?}"),
            })
        })
        .collect()
}

fn parse_pieces(section: &str, index: usize, s: &str) -> Result<BasicLoop, PresetError> {
    let err = |msg: String| PresetError::Section {
        section: section.to_string(),
        msg,
    };
    let mut pieces = Vec::new();
    for part in s.split(';') {
        let (range, terms) = part
            .split_once(':')
            .ok_or_else(|| err(format!("gamma.{index}: missing ':'")))?;
        let range = numbers(section, range)?;
        let (re, im) = terms
            .split_once('|')
            .ok_or_else(|| err(format!("gamma.{index}: missing '|'")))?;
        let re = numbers(section, re)?;
        let im = numbers(section, im)?;
        if range.len() != 2 || re.len() != 5 || im.len() != 5 {
            return Err(err(format!(
                "gamma.{index}: need 2 range values and 5+5 coefficients"
            )));
        }
        pieces.push(LoopPiece {
            start: range[0] * PI,
            end: range[1] * PI,
            term: TrigTerm {
                re: re.try_into().unwrap(),
                im: im.try_into().unwrap(),
            },
        });
    }
    Ok(BasicLoop::new(index, pieces)?)
}

impl PresetBook {
    /// The shipped knot table and loop presets.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in presets parse")
    }

    pub fn builtin_text() -> &'static str {
        BUILTIN
    }

    pub fn parse(text: &str) -> Result<Self, PresetError> {
        let mut book = Self::default();
        book.merge(text)?;
        Ok(book)
    }

    /// Add or replace entries from another config text.
    pub fn merge(&mut self, text: &str) -> Result<(), PresetError> {
        for (name, line, entries) in split_sections(text)? {
            let parts: Vec<&str> = name.split('.').collect();
            let kv: BTreeMap<&str, &str> = entries
                .iter()
                .map(|(k, v)| (k.as_str(), v.as_str()))
                .collect();
            let err = |msg: String| PresetError::Section {
                section: name.clone(),
                msg,
            };
            match parts.as_slice() {
                ["knot", knot] => {
                    let get = |k: &str| {
                        kv.get(k)
                            .copied()
                            .ok_or_else(|| err(format!("missing {k}")))
                    };
                    let num = |k: &str| -> Result<f64, PresetError> {
                        let v = get(k)?
                            .parse::<f64>()
                            .map_err(|_| err(format!("bad {k}")))?;
                        if v > 0.0 {
                            Ok(v)
                        } else {
                            Err(err(format!("{k} must be positive")))
                        }
                    };
                    let strands: usize = get("strands")?
                        .parse()
                        .map_err(|_| err("bad strands".into()))?;
                    let word =
                        parse_braid_word(get("word")?, strands).map_err(|e| err(e.to_string()))?;
                    let family = match kv.get("family").copied() {
                        None | Some("") => None,
                        Some("torus") => Some(Family::Torus),
                        Some("lemniscate") => Some(Family::Lemniscate),
                        Some(other) => return Err(err(format!("unknown family {other:?}"))),
                    };
                    let preset = KnotPreset {
                        name: knot.to_string(),
                        word,
                        m1: num("m1")? as usize,
                        a1_inv: num("a1_inv")?,
                        mu_inv: num("mu_inv")?,
                        m2: num("m2")? as usize,
                        a2_inv: num("a2_inv")?,
                        family,
                    };
                    self.knots.insert(preset.name.clone(), preset);
                }
                ["loops", cons, strands] => {
                    let construction: Construction = cons.parse().map_err(err)?;
                    let strands: usize = strands
                        .parse()
                        .map_err(|_| err("bad strand count".into()))?;
                    let roots = numbers(
                        &name,
                        kv.get("roots").ok_or_else(|| err("missing roots".into()))?,
                    )?;
                    let mut loops = Vec::new();
                    for (k, v) in &entries {
                        if let Some(idx) = k.strip_prefix("gamma.") {
                            let index: usize =
                                idx.parse().map_err(|_| err(format!("bad loop key {k}")))?;
                            loops.push(parse_pieces(&name, index, v)?);
                        }
                    }
                    loops.sort_by_key(|l| l.index);
                    self.loops.insert(
                        (construction, strands),
                        LoopPreset {
                            construction,
                            strands,
                            roots,
                            loops,
                        },
                    );
                }
                _ => {
                    return Err(PresetError::Syntax {
                        line,
                        msg: format!("unknown section [{name}]"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Knots in table order (by crossing number, then index).
    pub fn knots(&self) -> Vec<&KnotPreset> {
        let mut v: Vec<&KnotPreset> = self.knots.values().collect();
        v.sort_by_key(|k| knot_sort_key(&k.name));
        v
    }

    pub fn knot(&self, name: &str) -> Result<&KnotPreset, PresetError> {
        self.knots
            .get(name)
            .ok_or_else(|| PresetError::UnknownKnot(name.to_string()))
    }

    pub fn loops(
        &self,
        construction: Construction,
        strands: usize,
    ) -> Result<&LoopPreset, PresetError> {
        self.loops
            .get(&(construction, strands))
            .ok_or(PresetError::NoLoops {
                construction,
                strands,
            })
    }

    pub fn loop_presets(&self) -> impl Iterator<Item = &LoopPreset> {
        self.loops.values()
    }
}

fn knot_sort_key(name: &str) -> (u32, u32, String) {
    let mut it = name.split('_');
    let a = it.next().and_then(|s| s.parse().ok()).unwrap_or(u32::MAX);
    let b = it.next().and_then(|s| s.parse().ok()).unwrap_or(u32::MAX);
    (a, b, name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_table() {
        let book = PresetBook::builtin();
        assert_eq!(book.knots().len(), 35);
        let t = book.knot("3_1").unwrap();
        assert_eq!(
            (t.m1, t.a1_inv, t.mu_inv, t.m2, t.a2_inv),
            (3, 6.0, 8.0, 3, 4.0)
        );
        assert_eq!(t.family, Some(Family::Torus));
        assert_eq!(book.knot("8_19").unwrap().family, Some(Family::Torus));
        assert_eq!(book.knot("5_2").unwrap().word.to_string(), "1 1 1 2 -1 2");
        assert_eq!(book.knots()[0].name, "3_1");
        assert_eq!(book.knots().last().unwrap().name, "8_21");
        assert!(matches!(book.knot("9_1"), Err(PresetError::UnknownKnot(_))));
    }

    #[test]
    fn builtin_loops_wind_correctly() {
        let book = PresetBook::builtin();
        for lp in book.loop_presets() {
            let p = lp.polynomial().unwrap();
            for l in &lp.loops {
                l.check_against(&p)
                    .unwrap_or_else(|e| panic!("{}: {e}", lp.id()));
            }
        }
    }

    #[test]
    fn user_file_overrides_a_row() {
        let mut book = PresetBook::builtin();
        book.merge("[knot.3_1]\nstrands = 2\nword = -1 -1 -1\nm1 = 4\na1_inv = 5\nmu_inv = 7\nm2 = 3\na2_inv = 4\n")
            .unwrap();
        let t = book.knot("3_1").unwrap();
        assert_eq!(t.word.signed(), vec![-1, -1, -1]);
        assert_eq!(t.m1, 4);
        assert_eq!(t.family, None);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        assert!(matches!(
            PresetBook::parse("x = 1"),
            Err(PresetError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            PresetBook::parse("[knot.a]\n\nbogus"),
            Err(PresetError::Syntax { line: 3, .. })
        ));
        assert!(PresetBook::parse("[knot.a]\nstrands = 2\nword = 3\n").is_err());
    }
}
