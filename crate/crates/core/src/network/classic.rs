//! Reader for the `.dat` layout shared by the gdb, bccm/val and egl sets,
//! with Spanish or English keywords. Arc sections (`LISTA_ARCOS_REQ`, ...)
//! are accepted for mixed instances.

use super::generate::greedy_duration_limit;
use super::{integralize_demands, Instance, Link, LinkKind, NetworkError};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Links { kind: LinkKind, required: bool },
}

fn perr(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Parse { line, message: message.into() }
}

fn canonical_key(raw: &str) -> String {
    let key = raw.trim().to_ascii_uppercase().replace([' ', '-'], "_");
    let key = match key.as_str() {
        "NOMBRE" => "NAME",
        "COMENTARIO" => "COMMENT",
        "VEHICULOS" => "VEHICLES",
        "CAPACIDAD" => "CAPACITY",
        "DEPOSITO" => "DEPOT",
        "ARISTAS_REQ" => "REQUIRED_EDGES",
        "ARISTAS_NOREQ" => "NON_REQUIRED_EDGES",
        "ARCOS_REQ" => "REQUIRED_ARCS",
        "ARCOS_NOREQ" => "NON_REQUIRED_ARCS",
        "LISTA_ARISTAS_REQ" => "LIST_REQUIRED_EDGES",
        "LISTA_ARISTAS_NOREQ" => "LIST_NON_REQUIRED_EDGES",
        "LISTA_ARCOS_REQ" => "LIST_REQUIRED_ARCS",
        "LISTA_ARCOS_NOREQ" => "LIST_NON_REQUIRED_ARCS",
        "TIPO_COSTES_ARISTAS" => "EDGE_COST_TYPE",
        "COSTE_TOTAL_REQ" => "TOTAL_REQUIRED_COST",
        other => other,
    };
    key.to_string()
}

/// Parses `( u, v)  coste c  demanda q` and the English `cost`/`demand` form.
fn parse_link_line(line: usize, text: &str, required: bool) -> Result<(usize, usize, f64, Option<f64>), NetworkError> {
    let open = text.find('(').ok_or_else(|| perr(line, "expected `(u, v)`"))?;
    let close = text.find(')').ok_or_else(|| perr(line, "unterminated `(u, v)`"))?;
    let mut ends = text[open + 1..close].split(',').map(|s| s.trim().parse::<usize>());
    let (u, v) = match (ends.next(), ends.next(), ends.next()) {
        (Some(Ok(u)), Some(Ok(v)), None) => (u, v),
        _ => return Err(perr(line, "cannot parse link endpoints")),
    };
    let mut cost = None;
    let mut demand = None;
    let mut toks = text[close + 1..].split_whitespace();
    while let Some(tok) = toks.next() {
        let slot = match tok.to_ascii_lowercase().as_str() {
            "coste" | "cost" => &mut cost,
            "demanda" | "demand" => &mut demand,
            _ => continue,
        };
        let value = toks.next().ok_or_else(|| perr(line, format!("`{tok}` needs a value")))?;
        *slot = Some(value.parse::<f64>().map_err(|_| perr(line, format!("cannot parse number `{value}`")))?);
    }
    let cost = cost.ok_or_else(|| perr(line, "missing link cost"))?;
    if required && demand.is_none() {
        return Err(perr(line, "required link without demand"));
    }
    Ok((u, v, cost, if required { demand } else { None }))
}

/// Reads a classic instance. Vertices are renumbered so the depot becomes 0
/// while the others keep their relative order. All speeds are 1 and the
/// duration limit is set by `greedy_duration_limit`.
pub fn parse_classic(text: &str) -> Result<Instance, NetworkError> {
    let mut name = String::new();
    let mut vertices = None;
    let mut vehicles = None;
    let mut capacity = None;
    let mut depot = 1usize;
    let mut declared: Vec<(String, usize)> = Vec::new();
    let mut raw_links: Vec<(usize, LinkKind, usize, usize, f64, Option<f64>)> = Vec::new();
    let mut section = Section::None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('(') {
            let Section::Links { kind, required } = section else {
                return Err(perr(line, "link line outside a link list"));
            };
            let (u, v, cost, demand) = parse_link_line(line, content, required)?;
            raw_links.push((line, kind, u, v, cost, demand));
            continue;
        }
        let Some((k, value)) = content.split_once(':') else {
            if content.eq_ignore_ascii_case("END") || content.eq_ignore_ascii_case("FIN") {
                break;
            }
            return Err(perr(line, format!("unrecognised line `{content}`")));
        };
        let key = canonical_key(k);
        let value = value.trim();
        let int = |v: &str| v.parse::<usize>().map_err(|_| perr(line, format!("{key} must be an integer")));
        section = Section::None;
        match key.as_str() {
            "NAME" => name = value.to_string(),
            "VERTICES" => vertices = Some(int(value)?),
            "VEHICLES" => vehicles = Some(int(value)?),
            "CAPACITY" => {
                capacity = Some(value.parse::<f64>().map_err(|_| perr(line, "CAPACITY must be a number"))?)
            }
            "DEPOT" => depot = int(value)?,
            "REQUIRED_EDGES" | "NON_REQUIRED_EDGES" | "REQUIRED_ARCS" | "NON_REQUIRED_ARCS" => {
                declared.push((key.clone(), int(value)?))
            }
            "LIST_REQUIRED_EDGES" => section = Section::Links { kind: LinkKind::Edge, required: true },
            "LIST_NON_REQUIRED_EDGES" => section = Section::Links { kind: LinkKind::Edge, required: false },
            "LIST_REQUIRED_ARCS" => section = Section::Links { kind: LinkKind::Arc, required: true },
            "LIST_NON_REQUIRED_ARCS" => section = Section::Links { kind: LinkKind::Arc, required: false },
            _ => {}
        }
    }

    let vertices = vertices.ok_or_else(|| perr(0, "missing VERTICES"))?;
    let vehicles = vehicles.ok_or_else(|| perr(0, "missing VEHICLES"))?;
    let mut capacity = capacity.ok_or_else(|| perr(0, "missing CAPACITY"))?;
    if depot == 0 || depot > vertices {
        return Err(NetworkError::invariant("DEPOT", format!("{depot} is not a vertex in 1..={vertices}")));
    }
    for (key, n) in &declared {
        let (kind, required) = match key.as_str() {
            "REQUIRED_EDGES" => (LinkKind::Edge, true),
            "NON_REQUIRED_EDGES" => (LinkKind::Edge, false),
            "REQUIRED_ARCS" => (LinkKind::Arc, true),
            _ => (LinkKind::Arc, false),
        };
        let found = raw_links.iter().filter(|l| l.1 == kind && l.5.is_some() == required).count();
        if found != *n {
            return Err(perr(0, format!("{key} declares {n} but the lists hold {found}")));
        }
    }

    let d = depot - 1;
    let renumber = |x: usize| match x.cmp(&d) {
        std::cmp::Ordering::Equal => 0,
        std::cmp::Ordering::Less => x + 1,
        std::cmp::Ordering::Greater => x,
    };
    let mut links = Vec::with_capacity(raw_links.len());
    for (line, kind, u, v, distance, demand) in raw_links {
        if u == 0 || v == 0 || u > vertices || v > vertices {
            return Err(perr(line, format!("endpoint outside 1..={vertices}")));
        }
        links.push(Link { kind, tail: renumber(u - 1), head: renumber(v - 1), distance, demand });
    }
    integralize_demands(&mut links, &mut capacity);
    let provisional = Instance::new(name, vertices, links, vehicles, capacity, 1.0)?;
    provisional.validate()?;
    let limit = greedy_duration_limit(&provisional);
    provisional.with_duration_limit(limit)
}
