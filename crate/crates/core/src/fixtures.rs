//! Reference data shipped under `fixtures/`.
//!
//! Each file is a sequence of `@label` blocks; lines starting with `#` are
//! comments and continuation lines are joined with a space.

use crate::calculus::{parse_affine, Constraint};
use crate::error::{Error, Result};
use crate::expr::{parse, AffineExponent, Expr};

const FILES: &[(&str, &str)] = &[
    (
        "determining_power",
        include_str!("../fixtures/determining_power.txt"),
    ),
    (
        "determining_exp",
        include_str!("../fixtures/determining_exp.txt"),
    ),
    (
        "exp_third_equation_verbatim",
        include_str!("../fixtures/exp_third_equation_verbatim.txt"),
    ),
    ("case_b", include_str!("../fixtures/case_b.txt")),
    ("source_keys", include_str!("../fixtures/source_keys.txt")),
    (
        "special_cases",
        include_str!("../fixtures/special_cases.txt"),
    ),
    (
        "coincidence_tables",
        include_str!("../fixtures/coincidence_tables.txt"),
    ),
    ("case_c", include_str!("../fixtures/case_c.txt")),
    ("case_c_p0", include_str!("../fixtures/case_c_p0.txt")),
    ("case_c_k1_p2", include_str!("../fixtures/case_c_k1_p2.txt")),
    (
        "lie_operators",
        include_str!("../fixtures/lie_operators.txt"),
    ),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub label: String,
    /// Joined text, used for single expressions.
    pub text: String,
    /// Raw non-comment lines, used for lists.
    pub lines: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub blocks: Vec<Block>,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

pub fn load(name: &str) -> Result<Fixture> {
    let src = FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| *s)
        .ok_or_else(|| Error::Invalid(format!("no fixture named {name}")))?;
    parse_fixture(name, src)
}

pub fn parse_fixture(name: &str, src: &str) -> Result<Fixture> {
    let mut blocks: Vec<Block> = Vec::new();
    for raw in src.lines() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(label) = line.strip_prefix('@') {
            blocks.push(Block {
                label: label.trim().to_string(),
                text: String::new(),
                lines: Vec::new(),
            });
            continue;
        }
        let b = blocks
            .last_mut()
            .ok_or_else(|| Error::Invalid(format!("{name}: content before first label")))?;
        if !b.text.is_empty() {
            b.text.push(' ');
        }
        b.text.push_str(line);
        b.lines.push(line.to_string());
    }
    Ok(Fixture {
        name: name.to_string(),
        blocks,
    })
}

impl Fixture {
    pub fn block(&self, label: &str) -> Result<&Block> {
        self.blocks
            .iter()
            .find(|b| b.label == label)
            .ok_or_else(|| Error::Invalid(format!("fixture {} has no block {label}", self.name)))
    }

    pub fn text(&self, label: &str) -> Result<&str> {
        Ok(&self.block(label)?.text)
    }

    pub fn expr(&self, label: &str) -> Result<Expr> {
        parse(self.text(label)?)
    }

    /// Every block parsed as an expression, in file order.
    pub fn exprs(&self) -> Result<Vec<Expr>> {
        self.blocks.iter().map(|b| parse(&b.text)).collect()
    }

    /// A comma-separated list of affine exponents.
    pub fn exponents(&self, label: &str) -> Result<Vec<AffineExponent>> {
        self.items(label)?.iter().map(|s| parse_affine(s)).collect()
    }

    /// Comma-separated items, trimmed.
    pub fn items(&self, label: &str) -> Result<Vec<String>> {
        Ok(self
            .text(label)?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    }

    /// One constraint per line.
    pub fn constraints(&self, label: &str) -> Result<Vec<Constraint>> {
        self.block(label)?
            .lines
            .iter()
            .map(|l| Constraint::parse(l))
            .collect()
    }
}
