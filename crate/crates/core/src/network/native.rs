//! The `td_native` instance format. See `docs/td_native.md` for the grammar.

use std::fmt::Write as _;

use super::{integralize_demands, Dir, Instance, Link, LinkKind, LinkSpeeds, NetworkError};
use crate::pl_time::SpeedFunction;

const HEADER_KEYS: [&str; 9] = [
    "NAME",
    "VERTICES",
    "EDGES",
    "ARCS",
    "REQUIRED_EDGES",
    "REQUIRED_ARCS",
    "VEHICLES",
    "CAPACITY",
    "DURATION_LIMIT",
];

fn perr(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Parse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, NetworkError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("cannot parse {what} from `{tok}`")))
}

fn parse_dir(tok: Option<&str>, line: usize) -> Result<Dir, NetworkError> {
    match tok {
        Some("+") => Ok(Dir::Forward),
        Some("-") => Ok(Dir::Backward),
        other => Err(perr(line, format!("expected direction `+` or `-`, got {other:?}"))),
    }
}

pub fn parse_native(text: &str) -> Result<Instance, NetworkError> {
    let mut header: [Option<String>; 9] = Default::default();
    let mut links: Vec<(usize, Link)> = Vec::new();
    let mut speed_lines: Vec<(usize, bool, usize, Dir, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut ended = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if ended {
            return Err(perr(line, "content after END"));
        }
        let mut toks = content.split_whitespace();
        let key = toks.next().unwrap();
        if let Some(pos) = HEADER_KEYS.iter().position(|k| *k == key) {
            let value = toks.next().ok_or_else(|| perr(line, format!("{key} needs a value")))?;
            if toks.next().is_some() {
                return Err(perr(line, format!("{key} takes a single value")));
            }
            if header[pos].replace(value.to_string()).is_some() {
                return Err(perr(line, format!("duplicate {key}")));
            }
            continue;
        }
        match key {
            "E" | "A" => {
                let id: usize = num(toks.next(), line, "link id")?;
                let tail = num(toks.next(), line, "tail vertex")?;
                let head = num(toks.next(), line, "head vertex")?;
                let distance = num(toks.next(), line, "distance")?;
                let demand = match toks.next() {
                    Some("-") => None,
                    tok => Some(num(tok, line, "demand")?),
                };
                if toks.next().is_some() {
                    return Err(perr(line, "trailing tokens on link line"));
                }
                let kind = if key == "E" { LinkKind::Edge } else { LinkKind::Arc };
                links.push((line, Link { kind, tail, head, distance, demand }));
                if id + 1 != links.len() {
                    return Err(perr(line, format!("link ids must be consecutive from 0, got {id}")));
                }
            }
            "SPEED" | "SERVICE_SPEED" => {
                let id: usize = num(toks.next(), line, "link id")?;
                let dir = parse_dir(toks.next(), line)?;
                let h: usize = num(toks.next(), line, "piece count")?;
                if h == 0 {
                    return Err(perr(line, "piece count must be positive"));
                }
                let vals: Vec<f64> = toks
                    .map(|t| t.parse().map_err(|_| perr(line, format!("cannot parse number `{t}`"))))
                    .collect::<Result<_, _>>()?;
                if vals.len() != 2 * h - 1 {
                    return Err(perr(line, format!("{h} pieces need {} numbers, got {}", 2 * h - 1, vals.len())));
                }
                let (bps, speeds) = vals.split_at(h - 1);
                speed_lines.push((line, key == "SERVICE_SPEED", id, dir, bps.to_vec(), speeds.to_vec()));
            }
            "END" => ended = true,
            other => return Err(perr(line, format!("unknown keyword `{other}`"))),
        }
    }

    let get = |k: usize| -> Result<&str, NetworkError> {
        header[k].as_deref().ok_or_else(|| perr(0, format!("missing header {}", HEADER_KEYS[k])))
    };
    let count = |k: usize| -> Result<usize, NetworkError> {
        get(k)?.parse().map_err(|_| perr(0, format!("{} must be an integer", HEADER_KEYS[k])))
    };
    let real = |k: usize| -> Result<f64, NetworkError> {
        get(k)?.parse().map_err(|_| perr(0, format!("{} must be a number", HEADER_KEYS[k])))
    };
    let name = get(0)?.to_string();
    let vertex_count = count(1)?;
    let expected = [count(2)?, count(3)?, count(4)?, count(5)?];
    let vehicles = count(6)?;
    let mut capacity = real(7)?;
    let duration_limit = real(8)?;

    let tally = |kind: LinkKind, required: bool| {
        links.iter().filter(|(_, l)| l.kind == kind && (!required || l.demand.is_some())).count()
    };
    let found = [
        tally(LinkKind::Edge, false),
        tally(LinkKind::Arc, false),
        tally(LinkKind::Edge, true),
        tally(LinkKind::Arc, true),
    ];
    for (k, (e, f)) in expected.iter().zip(found).enumerate() {
        if *e != f {
            return Err(perr(0, format!("{} declares {e} but the file lists {f}", HEADER_KEYS[k + 2])));
        }
    }

    let mut plain: Vec<Link> = links.into_iter().map(|(_, l)| l).collect();
    integralize_demands(&mut plain, &mut capacity);
    let mut inst = Instance::new(name, vertex_count, plain, vehicles, capacity, duration_limit)?;
    let mut pending: Vec<Vec<(Option<SpeedFunction>, Option<SpeedFunction>)>> =
        inst.links.iter().map(|l| vec![(None, None); l.directions().len()]).collect();
    for (line, service, id, dir, bps, speeds) in speed_lines {
        let f = SpeedFunction::new(bps, speeds, duration_limit).map_err(|e| perr(line, e.to_string()))?;
        let slot = pending
            .get_mut(id)
            .and_then(|v| v.get_mut(dir.index()))
            .ok_or_else(|| perr(line, format!("link {id} has no orientation {}", dir.symbol())))?;
        let target = if service { &mut slot.1 } else { &mut slot.0 };
        if target.replace(f).is_some() {
            return Err(perr(line, "duplicate speed line"));
        }
    }
    for (id, per_dir) in pending.into_iter().enumerate() {
        for (k, (travel, service)) in per_dir.into_iter().enumerate() {
            let current = inst.speeds(id, Dir::BOTH[k]).unwrap().clone();
            let speeds = LinkSpeeds {
                travel: travel.unwrap_or(current.travel),
                service: service.unwrap_or(current.service),
            };
            inst.set_speeds(id, Dir::BOTH[k], speeds)?;
        }
    }
    inst.validate()?;
    Ok(inst)
}

fn write_speed(out: &mut String, key: &str, id: usize, dir: Dir, f: &SpeedFunction) {
    let _ = write!(out, "{key} {id} {} {}", dir.symbol(), f.piece_count());
    for v in f.breakpoints().iter().chain(f.speeds()) {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

/// Writes `inst` in the native format. Numbers use the shortest decimal form
/// that parses back to the same `f64`.
pub fn serialize_instance(inst: &Instance) -> String {
    let count = |kind: LinkKind, required: bool| {
        inst.links.iter().filter(|l| l.kind == kind && (!required || l.demand.is_some())).count()
    };
    let mut out = String::new();
    let _ = writeln!(out, "NAME {}", if inst.name.is_empty() { "unnamed" } else { &inst.name });
    let _ = writeln!(out, "VERTICES {}", inst.vertex_count);
    let _ = writeln!(out, "EDGES {}", count(LinkKind::Edge, false));
    let _ = writeln!(out, "ARCS {}", count(LinkKind::Arc, false));
    let _ = writeln!(out, "REQUIRED_EDGES {}", count(LinkKind::Edge, true));
    let _ = writeln!(out, "REQUIRED_ARCS {}", count(LinkKind::Arc, true));
    let _ = writeln!(out, "VEHICLES {}", inst.vehicles);
    let _ = writeln!(out, "CAPACITY {}", inst.capacity);
    let _ = writeln!(out, "DURATION_LIMIT {}", inst.duration_limit);
    for (id, l) in inst.links.iter().enumerate() {
        let kind = match l.kind {
            LinkKind::Edge => 'E',
            LinkKind::Arc => 'A',
        };
        let _ = write!(out, "{kind} {id} {} {} {} ", l.tail, l.head, l.distance);
        match l.demand {
            Some(q) => {
                let _ = writeln!(out, "{q}");
            }
            None => out.push_str("-\n"),
        }
    }
    for (id, l) in inst.links.iter().enumerate() {
        for &dir in l.directions() {
            let s = inst.speeds(id, dir).unwrap();
            write_speed(&mut out, "SPEED", id, dir, &s.travel);
            write_speed(&mut out, "SERVICE_SPEED", id, dir, &s.service);
        }
    }
    out.push_str("END\n");
    out
}
