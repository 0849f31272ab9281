//! Plain-text export of an [`AbstractModel`] in an LP-style dialect, plus a
//! strict reader for the same dialect. The writer is deterministic: the same
//! model build produces byte-identical text, which the test suite relies on.
//!
//! ```text
//! \ dadnet model: chain
//! Minimize
//!  obj: + 1 f.a + 2 f.b
//! Subject To
//!  balance.n1: + 1 f.a - 1 f.b = 0
//! Bounds
//!  0 <= f.a <= inf
//! Binaries
//!  d.n1
//! End
//! ```

use super::{AbstractModel, RowSense, Sense, SolverError, VarKind};

fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x}")
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.chars().all(|c| {
            c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | ':' | '#' | '[' | ']' | ',')
        })
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for &(v, c) in terms {
        let (sign, mag) = if c < 0.0 { ('-', -c) } else { ('+', c) };
        out.push(' ');
        out.push(sign);
        out.push(' ');
        out.push_str(&num(mag));
        out.push(' ');
        out.push_str(&names[v]);
    }
}

/// Serializes the model. Fails if any name contains characters outside the
/// dialect's token charset.
pub fn to_lp_text(model: &AbstractModel) -> Result<String, SolverError> {
    let names: Vec<String> = model.vars().iter().map(|v| v.name.clone()).collect();
    for n in &names {
        if !valid_name(n) {
            return Err(SolverError::BadModel(format!("unsafe variable name `{n}`")));
        }
    }
    let mut s = String::new();
    s.push_str(&format!("\\ dadnet model: {}\n", model.name));
    s.push_str(match model.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    s.push_str(" obj:");
    let obj_terms: Vec<(usize, f64)> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.obj != 0.0)
        .map(|(i, v)| (i, v.obj))
        .collect();
    write_terms(&mut s, &obj_terms, &names);
    s.push('\n');

    s.push_str("Subject To\n");
    for row in model.rows() {
        if !valid_name(&row.name) {
            return Err(SolverError::BadModel(format!(
                "unsafe row name `{}`",
                row.name
            )));
        }
        s.push_str(&format!(" {}:", row.name));
        let terms: Vec<(usize, f64)> = row.coeffs.iter().map(|&(v, c)| (v.0, c)).collect();
        write_terms(&mut s, &terms, &names);
        s.push_str(&format!(" {} {}\n", row.sense, num(row.rhs)));
    }

    s.push_str("Bounds\n");
    for v in model.vars() {
        s.push_str(&format!(" {} <= {} <= {}\n", num(v.lb), v.name, num(v.ub)));
    }

    let binaries: Vec<&str> = model
        .vars()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        s.push_str("Binaries\n");
        for b in binaries {
            s.push_str(&format!(" {b}\n"));
        }
    }
    s.push_str("End\n");
    Ok(s)
}

fn parse_num(tok: &str) -> Result<f64, SolverError> {
    match tok {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok
            .parse()
            .map_err(|_| SolverError::BadModel(format!("bad number `{tok}`"))),
    }
}

/// Reads text produced by [`to_lp_text`] back into an [`AbstractModel`].
pub fn from_lp_text(text: &str) -> Result<AbstractModel, SolverError> {
    use std::collections::HashMap;

    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Rows,
        Bounds,
        Binaries,
        Done,
    }

    type ParsedRow = (String, Vec<(String, f64)>, RowSense, f64);
    let bad = |msg: &str| SolverError::BadModel(format!("lp text: {msg}"));
    let mut name = String::from("parsed");
    let mut sense = Sense::Minimize;
    // (name, coeffs by var name, sense, rhs)
    let mut obj: Vec<(String, f64)> = Vec::new();
    let mut rows: Vec<ParsedRow> = Vec::new();
    let mut bounds: Vec<(String, f64, f64)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut section = Section::Head;

    for raw in text.lines() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('\\') {
            if let Some(n) = rest.trim().strip_prefix("dadnet model:") {
                name = n.trim().to_string();
            }
            continue;
        }
        match line {
            "Minimize" => {
                sense = Sense::Minimize;
                section = Section::Objective;
                continue;
            }
            "Maximize" => {
                sense = Sense::Maximize;
                section = Section::Objective;
                continue;
            }
            "Subject To" => {
                section = Section::Rows;
                continue;
            }
            "Bounds" => {
                section = Section::Bounds;
                continue;
            }
            "Binaries" => {
                section = Section::Binaries;
                continue;
            }
            "End" => {
                section = Section::Done;
                continue;
            }
            _ => {}
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Objective | Section::Rows => {
                let (label, rest) = toks.split_first().ok_or_else(|| bad("missing row label"))?;
                let label = label
                    .strip_suffix(':')
                    .ok_or_else(|| bad("row label must end with `:`"))?
                    .to_string();
                // terms come as `sign magnitude name` triples, optionally
                // followed by `sense rhs` for constraint rows
                let mut terms: Vec<(String, f64)> = Vec::new();
                let mut i = 0;
                let mut row_tail: Option<(RowSense, f64)> = None;
                if rest == ["0"] {
                    i = 1;
                }
                while i < rest.len() {
                    match rest[i] {
                        "+" | "-" => {
                            if i + 2 >= rest.len() {
                                return Err(bad("truncated term"));
                            }
                            let mag = parse_num(rest[i + 1])?;
                            let coeff = if rest[i] == "-" { -mag } else { mag };
                            terms.push((rest[i + 2].to_string(), coeff));
                            i += 3;
                        }
                        "<=" | ">=" | "=" => {
                            let rs = match rest[i] {
                                "<=" => RowSense::Le,
                                ">=" => RowSense::Ge,
                                _ => RowSense::Eq,
                            };
                            if i + 1 >= rest.len() {
                                return Err(bad("missing rhs"));
                            }
                            row_tail = Some((rs, parse_num(rest[i + 1])?));
                            i += 2;
                        }
                        other => return Err(bad(&format!("unexpected token `{other}`"))),
                    }
                }
                if section == Section::Objective {
                    obj = terms;
                    let _ = label;
                } else {
                    let (rs, rhs) = row_tail.ok_or_else(|| bad("constraint without sense"))?;
                    rows.push((label, terms, rs, rhs));
                }
            }
            Section::Bounds => {
                if toks.len() != 5 || toks[1] != "<=" || toks[3] != "<=" {
                    return Err(bad("bounds line must be `lb <= name <= ub`"));
                }
                bounds.push((
                    toks[2].to_string(),
                    parse_num(toks[0])?,
                    parse_num(toks[4])?,
                ));
            }
            Section::Binaries => {
                if toks.len() != 1 {
                    return Err(bad("binaries lines carry one name"));
                }
                binaries.push(toks[0].to_string());
            }
            Section::Head | Section::Done => return Err(bad("content outside sections")),
        }
    }

    let mut model = AbstractModel::new(name, sense);
    let mut index: HashMap<String, super::VarId> = HashMap::new();
    for (vname, lb, ub) in &bounds {
        let id = model.add_var(vname.clone(), *lb, *ub, 0.0);
        if index.insert(vname.clone(), id).is_some() {
            return Err(bad(&format!("duplicate variable `{vname}`")));
        }
    }
    for b in &binaries {
        let id = *index
            .get(b)
            .ok_or_else(|| bad(&format!("binary `{b}` not declared in bounds")))?;
        let v = &mut model.vars[id.0];
        v.kind = VarKind::Binary;
        v.lb = 0.0;
        v.ub = 1.0;
    }
    for (vname, c) in obj {
        let id = *index
            .get(&vname)
            .ok_or_else(|| bad(&format!("objective references unknown `{vname}`")))?;
        model.add_obj(id, c);
    }
    for (label, terms, rs, rhs) in rows {
        let mut coeffs = Vec::with_capacity(terms.len());
        for (vname, c) in terms {
            let id = *index
                .get(&vname)
                .ok_or_else(|| bad(&format!("row references unknown `{vname}`")))?;
            coeffs.push((id, c));
        }
        model.add_row(label, coeffs, rs, rhs);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{select_backend, SolveLimits};

    fn sample() -> AbstractModel {
        let mut m = AbstractModel::new("sample", Sense::Minimize);
        let x = m.add_var("x", 0.0, f64::INFINITY, 2.0);
        let y = m.add_var("y", -1.5, 4.0, -1.0);
        let b = m.add_binary("pick", 10.0);
        m.add_row("r0", vec![(x, 1.0), (y, 2.0)], RowSense::Ge, 3.0);
        m.add_row("r1", vec![(x, 1.0), (b, -5.0)], RowSense::Le, 6.0);
        m.add_row("r2", vec![(y, 1.0), (b, 1.0)], RowSense::Eq, 2.0);
        m
    }

    #[test]
    fn export_is_deterministic() {
        let a = to_lp_text(&sample()).unwrap();
        let b = to_lp_text(&sample()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("Binaries"));
    }

    #[test]
    fn roundtrip_preserves_objective() {
        let model = sample();
        let text = to_lp_text(&model).unwrap();
        let parsed = from_lp_text(&text).unwrap();
        assert_eq!(parsed.num_vars(), model.num_vars());
        assert_eq!(parsed.num_rows(), model.num_rows());
        let backend = select_backend(None).unwrap();
        let a = backend
            .solve(&model, &SolveLimits::default())
            .unwrap()
            .expect_optimal()
            .unwrap()
            .0;
        let b = backend
            .solve(&parsed, &SolveLimits::default())
            .unwrap()
            .expect_optimal()
            .unwrap()
            .0;
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        // and the re-export of the parse matches term for term
        let text2 = to_lp_text(&parsed).unwrap();
        let body = |t: &str| t.lines().skip(1).collect::<Vec<_>>().join("\n");
        assert_eq!(body(&text), body(&text2));
    }

    #[test]
    fn rejects_unsafe_names() {
        let mut m = AbstractModel::new("bad", Sense::Minimize);
        m.add_var("has space", 0.0, 1.0, 0.0);
        assert!(to_lp_text(&m).is_err());
    }
}
