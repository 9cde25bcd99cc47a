//! Plain-text grid file reader and writer.
//!
//! The file is a sequence of `[section]` blocks. Rows are split on commas
//! and/or whitespace; `#` starts a comment. See `docs/grid-format.md`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Bus, DispatchableGen, GridSpec, Line, LoadAsset, PenaltyConfig, RenewableGen};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Buses,
    Lines,
    Generators,
    Renewables,
    Loads,
    Penalties,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Cursor<'a> {
    path: &'a str,
    line: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Cursor<'a> {
    fn err(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_string(),
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn expect_len(&self, min: usize, what: &str) -> Result<()> {
        if self.tokens.len() < min {
            let column = self.tokens.last().map_or(1, |t| t.column + t.text.len());
            return Err(self.err(
                column,
                format!("{what}: expected {min} fields, found {}", self.tokens.len()),
            ));
        }
        Ok(())
    }

    fn text(&self, i: usize) -> &'a str {
        self.tokens[i].text
    }

    fn num(&self, i: usize, what: &str) -> Result<f64> {
        let tok = &self.tokens[i];
        tok.text
            .parse::<f64>()
            .map_err(|_| self.err(tok.column, format!("{what}: '{}' is not a number", tok.text)))
    }

    fn int(&self, i: usize, what: &str) -> Result<u32> {
        let tok = &self.tokens[i];
        tok.text
            .parse::<u32>()
            .map_err(|_| self.err(tok.column, format!("{what}: '{}' is not an integer", tok.text)))
    }

    fn flag(&self, i: usize, what: &str) -> Result<bool> {
        let tok = &self.tokens[i];
        match tok.text.to_ascii_lowercase().as_str() {
            "1" | "true" | "yes" => Ok(true),
            "0" | "false" | "no" => Ok(false),
            other => Err(self.err(tok.column, format!("{what}: '{other}' is not a flag"))),
        }
    }
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let content = match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start = None;
    for (i, ch) in content.char_indices() {
        let sep = ch == ',' || ch.is_whitespace();
        match (sep, start) {
            (true, Some(s)) => {
                tokens.push(Token {
                    text: &content[s..i],
                    column: s + 1,
                });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        tokens.push(Token {
            text: &content[s..],
            column: s + 1,
        });
    }
    tokens
}

pub fn load_grid(path: impl AsRef<Path>) -> Result<GridSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_grid(&text, &path.display().to_string())
}

/// Parses and validates a grid document. `label` is used in error messages.
pub fn parse_grid(text: &str, label: &str) -> Result<GridSpec> {
    let mut section: Option<Section> = None;
    let mut buses = Vec::new();
    let mut lines = Vec::new();
    let mut dispatchables = Vec::new();
    let mut renewables = Vec::new();
    let mut loads = Vec::new();
    let mut penalties = PenaltyConfig::default();
    let mut reserve_factor = 0.0;

    for (lineno, raw) in text.lines().enumerate() {
        let tokens = tokenize(raw);
        if tokens.is_empty() {
            continue;
        }
        let cur = Cursor {
            path: label,
            line: lineno + 1,
            tokens,
        };
        let first = cur.text(0);
        if first.starts_with('[') {
            let name = first.trim_start_matches('[').trim_end_matches(']');
            section = Some(match name.to_ascii_lowercase().as_str() {
                "buses" => Section::Buses,
                "lines" => Section::Lines,
                "generators" => Section::Generators,
                "renewables" => Section::Renewables,
                "loads" => Section::Loads,
                "penalties" => Section::Penalties,
                other => return Err(cur.err(cur.tokens[0].column, format!("unknown section '{other}'"))),
            });
            continue;
        }
        let Some(sec) = section else {
            return Err(cur.err(cur.tokens[0].column, "row outside of any section"));
        };
        match sec {
            Section::Buses => {
                cur.expect_len(1, "bus")?;
                let id = cur.text(0).to_string();
                let name = if cur.tokens.len() > 1 {
                    cur.text(1).to_string()
                } else {
                    id.clone()
                };
                buses.push(Bus { id, name });
            }
            Section::Lines => {
                cur.expect_len(2, "line")?;
                let mut ptdf = BTreeMap::new();
                for (i, tok) in cur.tokens.iter().enumerate().skip(2) {
                    let Some((bus, value)) = tok.text.split_once('=') else {
                        return Err(cur.err(tok.column, format!("expected bus=ptdf, found '{}'", tok.text)));
                    };
                    let value: f64 = value
                        .parse()
                        .map_err(|_| cur.err(tok.column, format!("ptdf value '{value}' is not a number")))?;
                    if ptdf.insert(bus.to_string(), value).is_some() {
                        return Err(cur.err(cur.tokens[i].column, format!("duplicate ptdf bus '{bus}'")));
                    }
                }
                lines.push(Line {
                    id: cur.text(0).to_string(),
                    flow_limit: cur.num(1, "flow_limit")?,
                    ptdf,
                });
            }
            Section::Generators => {
                cur.expect_len(11, "generator")?;
                dispatchables.push(DispatchableGen {
                    id: cur.text(0).to_string(),
                    bus: cur.text(1).to_string(),
                    p_min: cur.num(2, "p_min")?,
                    p_max: cur.num(3, "p_max")?,
                    ramp_up: cur.num(4, "ramp_up")?,
                    ramp_down: cur.num(5, "ramp_down")?,
                    marginal_cost: cur.num(6, "marginal_cost")?,
                    no_load_cost: cur.num(7, "no_load_cost")?,
                    min_up: cur.int(8, "min_up")?,
                    min_down: cur.int(9, "min_down")?,
                    must_run: cur.flag(10, "must_run")?,
                });
            }
            Section::Renewables => {
                cur.expect_len(3, "renewable")?;
                let kind = cur
                    .text(2)
                    .parse()
                    .map_err(|e: String| cur.err(cur.tokens[2].column, e))?;
                renewables.push(RenewableGen {
                    id: cur.text(0).to_string(),
                    bus: cur.text(1).to_string(),
                    kind,
                });
            }
            Section::Loads => {
                cur.expect_len(2, "load")?;
                loads.push(LoadAsset {
                    id: cur.text(0).to_string(),
                    bus: cur.text(1).to_string(),
                });
            }
            Section::Penalties => {
                // key = value, key value, or key=value
                let joined: Vec<&str> = cur
                    .tokens
                    .iter()
                    .flat_map(|t| t.text.split('='))
                    .filter(|s| !s.is_empty())
                    .collect();
                if joined.len() != 2 {
                    return Err(cur.err(cur.tokens[0].column, "expected 'key = value'"));
                }
                let value: f64 = joined[1]
                    .parse()
                    .map_err(|_| cur.err(cur.tokens[0].column, format!("'{}' is not a number", joined[1])))?;
                match joined[0] {
                    "load_mismatch" => penalties.load_mismatch = value,
                    "reserve_shortfall" => penalties.reserve_shortfall = value,
                    "reserve_factor" => reserve_factor = value,
                    other => return Err(cur.err(cur.tokens[0].column, format!("unknown penalty key '{other}'"))),
                }
            }
        }
    }

    GridSpec::new(
        buses,
        lines,
        dispatchables,
        renewables,
        loads,
        penalties,
        reserve_factor,
    )
}

/// Serializes a grid in the format `parse_grid` reads.
pub fn write_grid(grid: &GridSpec) -> String {
    let mut out = String::new();
    out.push_str("[buses]\n# id, name\n");
    for b in &grid.buses {
        let _ = writeln!(out, "{}, {}", b.id, b.name);
    }
    out.push_str("\n[lines]\n# id, flow_limit, bus=ptdf ...\n");
    for l in &grid.lines {
        let _ = write!(out, "{}, {}", l.id, l.flow_limit);
        for (bus, v) in &l.ptdf {
            let _ = write!(out, ", {bus}={v}");
        }
        out.push('\n');
    }
    out.push_str(
        "\n[generators]\n# id, bus, p_min, p_max, ramp_up, ramp_down, marginal_cost, no_load_cost, min_up, min_down, must_run\n",
    );
    for g in &grid.dispatchables {
        let _ = writeln!(
            out,
            "{}, {}, {}, {}, {}, {}, {}, {}, {}, {}, {}",
            g.id,
            g.bus,
            g.p_min,
            g.p_max,
            g.ramp_up,
            g.ramp_down,
            g.marginal_cost,
            g.no_load_cost,
            g.min_up,
            g.min_down,
            u8::from(g.must_run)
        );
    }
    out.push_str("\n[renewables]\n# id, bus, kind\n");
    for r in &grid.renewables {
        let _ = writeln!(out, "{}, {}, {}", r.id, r.bus, r.kind.as_str());
    }
    out.push_str("\n[loads]\n# id, bus\n");
    for l in &grid.loads {
        let _ = writeln!(out, "{}, {}", l.id, l.bus);
    }
    out.push_str("\n[penalties]\n");
    let _ = writeln!(out, "load_mismatch = {}", grid.penalties.load_mismatch);
    let _ = writeln!(out, "reserve_shortfall = {}", grid.penalties.reserve_shortfall);
    let _ = writeln!(out, "reserve_factor = {}", grid.reserve_factor);
    out
}
