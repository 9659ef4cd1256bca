//! Line-oriented instance format.
//!
//! ```text
//! # d : 2
//! # bins : 2
//! bin 0 : 120 120 -
//! bin 1 : 170 170 500
//! item 0 : 4 30 20 12
//! assoc 0 : 1
//! priority : 9 axis x
//! incompat : 1 2
//! heavy : 3
//! com : 60 60
//! ```
//!
//! Any other line starting with `#` is a comment. Bin lines carry the bin
//! dimensions and a weight capacity (`-` or omitted for none); item lines
//! carry quantity, dimensions and unit weight of a category.

use std::fmt::Write as _;

use super::IoError;
use crate::model::{Axis, BinSpec, InstanceSpec, ItemSpec, PrioritySpec};

struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl<'a> Line<'a> {
    fn error(&self, token: Option<&str>, message: impl Into<String>) -> IoError {
        let column = match token {
            Some(t) => t.as_ptr() as usize - self.text.as_ptr() as usize + 1,
            None => self.text.len() + 1,
        };
        IoError::Syntax {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn number<T: std::str::FromStr>(&self, token: &str, what: &str) -> Result<T, IoError> {
        token
            .parse()
            .map_err(|_| self.error(Some(token), format!("expected {what}, found `{token}`")))
    }

    fn arity(&self, tokens: &[&str], allowed: &[usize], what: &str) -> Result<(), IoError> {
        if allowed.contains(&tokens.len()) {
            return Ok(());
        }
        let at = tokens
            .get(allowed.iter().copied().max().unwrap_or(0))
            .copied();
        Err(self.error(
            at,
            format!(
                "{what} expects {} value(s), found {}",
                join(allowed, " or "),
                tokens.len()
            ),
        ))
    }
}

fn join(values: &[usize], sep: &str) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

pub fn parse(text: &str) -> Result<InstanceSpec, IoError> {
    let mut d: Option<usize> = None;
    let mut declared_bins: Option<(usize, usize)> = None;
    let mut spec = InstanceSpec {
        dimensionality: 0,
        bins: Vec::new(),
        items: Vec::new(),
        associations: Default::default(),
        priority: None,
        incompatible: Vec::new(),
        heavy: Vec::new(),
        center_of_mass: None,
        weights: None,
    };
    let mut last = 0;
    for (k, raw) in text.lines().enumerate() {
        let line = Line {
            number: k + 1,
            text: raw,
        };
        last = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let Some((key, value)) = rest.split_once(':') else {
                continue;
            };
            let value = value.trim();
            match key.trim() {
                "d" => {
                    let v: usize = line.number(value, "dimensionality")?;
                    if !(1..=3).contains(&v) {
                        return Err(line.error(Some(value), "dimensionality must be 1, 2 or 3"));
                    }
                    d = Some(v);
                    spec.dimensionality = v as u8;
                }
                "bins" => declared_bins = Some((line.number(value, "bin count")?, line.number)),
                _ => {}
            }
            continue;
        }
        let Some((head, body)) = raw.split_once(':') else {
            return Err(line.error(None, "expected `<keyword> [id] : values`"));
        };
        let head: Vec<&str> = head.split_whitespace().collect();
        let body: Vec<&str> = body.split_whitespace().collect();
        let Some(&keyword) = head.first() else {
            return Err(line.error(Some(raw.trim_start()), "missing keyword"));
        };
        let id = |name: &str| -> Result<&str, IoError> {
            match head[..] {
                [_, id] => Ok(id),
                _ => Err(line.error(
                    Some(keyword),
                    format!("`{name}` needs exactly one id before `:`"),
                )),
            }
        };
        let need_d =
            || d.ok_or_else(|| line.error(Some(keyword), "`# d : <1|2|3>` must come first"));
        match keyword {
            "bin" => {
                let d = need_d()?;
                let tok = id("bin")?;
                let j: usize = line.number(tok, "bin id")?;
                if j != spec.bins.len() {
                    return Err(line.error(Some(tok), format!("expected bin {}", spec.bins.len())));
                }
                line.arity(&body, &[d, d + 1], "bin")?;
                let dims = body[..d]
                    .iter()
                    .map(|t| line.number(t, "dimension"))
                    .collect::<Result<Vec<u32>, _>>()?;
                let capacity = match body.get(d) {
                    None | Some(&"-") => None,
                    Some(t) => Some(line.number(t, "capacity or `-`")?),
                };
                spec.bins.push(BinSpec { dims, capacity });
            }
            "item" => {
                let d = need_d()?;
                let category = line.number(id("item")?, "category id")?;
                line.arity(&body, &[d + 2], "item")?;
                spec.items.push(ItemSpec {
                    category,
                    quantity: line.number(body[0], "quantity")?,
                    dims: body[1..=d]
                        .iter()
                        .map(|t| line.number(t, "dimension"))
                        .collect::<Result<_, _>>()?,
                    weight: line.number(body[d + 1], "weight")?,
                });
            }
            "assoc" => {
                let category = line.number(id("assoc")?, "category id")?;
                if body.is_empty() {
                    return Err(line.error(None, "assoc needs at least one bin id"));
                }
                let bins = body
                    .iter()
                    .map(|t| line.number(t, "bin id"))
                    .collect::<Result<_, _>>()?;
                if spec.associations.insert(category, bins).is_some() {
                    return Err(line.error(
                        Some(keyword),
                        format!("category {category} associated twice"),
                    ));
                }
            }
            "priority" => {
                let mut cats = &body[..];
                let mut axis = None;
                if let [rest @ .., "axis", a] = cats {
                    axis = Some(match *a {
                        "x" => Axis::X,
                        "y" => Axis::Y,
                        "z" => Axis::Z,
                        _ => return Err(line.error(Some(a), "axis must be x or y")),
                    });
                    cats = rest;
                }
                if cats.is_empty() {
                    return Err(line.error(None, "priority needs at least one category"));
                }
                spec.priority = Some(PrioritySpec {
                    categories: cats
                        .iter()
                        .map(|t| line.number(t, "category id"))
                        .collect::<Result<_, _>>()?,
                    axis,
                });
            }
            "incompat" => {
                line.arity(&body, &[2], "incompat")?;
                spec.incompatible.push([
                    line.number(body[0], "category id")?,
                    line.number(body[1], "category id")?,
                ]);
            }
            "heavy" => {
                if body.is_empty() {
                    return Err(line.error(None, "heavy needs at least one category"));
                }
                for t in &body {
                    spec.heavy.push(line.number(t, "category id")?);
                }
            }
            "com" => {
                let d = need_d()?;
                let n = d.min(2);
                line.arity(&body, &[n], "com")?;
                let mut target = [0.0; 2];
                for (a, t) in body.iter().enumerate() {
                    target[a] = line.number(t, "coordinate")?;
                }
                spec.center_of_mass = Some(target);
            }
            other => {
                return Err(line.error(Some(other), format!("unknown keyword `{other}`")));
            }
        }
    }
    let eof = |message: String| IoError::Syntax {
        line: last + 1,
        column: 1,
        message,
    };
    if d.is_none() {
        return Err(eof("missing `# d : <1|2|3>` header".into()));
    }
    if let Some((n, at)) = declared_bins {
        if n != spec.bins.len() {
            return Err(IoError::Syntax {
                line: at,
                column: 1,
                message: format!("header declares {n} bins, file has {}", spec.bins.len()),
            });
        }
    }
    Ok(spec)
}

pub fn write(spec: &InstanceSpec) -> String {
    let d = spec.dimensionality as usize;
    let mut out = String::new();
    let nums = |v: &[u32]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    writeln!(out, "# d : {d}").unwrap();
    writeln!(out, "# bins : {}", spec.bins.len()).unwrap();
    for (j, b) in spec.bins.iter().enumerate() {
        let cap = b.capacity.map_or("-".to_string(), |c| c.to_string());
        writeln!(out, "bin {j} : {} {cap}", nums(&b.dims)).unwrap();
    }
    for it in &spec.items {
        writeln!(
            out,
            "item {} : {} {} {}",
            it.category,
            it.quantity,
            nums(&it.dims),
            it.weight
        )
        .unwrap();
    }
    for (cat, bins) in &spec.associations {
        let ids: Vec<String> = bins.iter().map(|b| b.to_string()).collect();
        writeln!(out, "assoc {cat} : {}", ids.join(" ")).unwrap();
    }
    if let Some(p) = &spec.priority {
        write!(out, "priority : {}", nums(&p.categories)).unwrap();
        if let Some(axis) = p.axis {
            write!(out, " axis {axis}").unwrap();
        }
        out.push('\n');
    }
    for [a, b] in &spec.incompatible {
        writeln!(out, "incompat : {a} {b}").unwrap();
    }
    if !spec.heavy.is_empty() {
        writeln!(out, "heavy : {}", nums(&spec.heavy)).unwrap();
    }
    if let Some([l, w]) = spec.center_of_mass {
        if d == 1 {
            writeln!(out, "com : {l}").unwrap();
        } else {
            writeln!(out, "com : {l} {w}").unwrap();
        }
    }
    out
}
