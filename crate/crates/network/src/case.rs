//! Text case-file format.
//!
//! ```text
//! acdc-case 1
//! base_mva 100
//! a_q 0.001
//!
//! [BUS]
//! # id kind vmin vmax ref region pload qload [gs bs]
//! 1 ac 0.95 1.05 1 1 0 0
//! [BRANCH]
//! # from to r x b
//! 1 2 0.01 0.1 0.02
//! [GEN]
//! # bus pmin pmax qmin qmax bg
//! 1 0 200 -100 100 50
//! [CONV]
//! # acbus dcbus srated [c0 c2]
//! 2 10 150
//! ```
//!
//! Units: voltages in pu; loads, shunts and generator limits in MW / Mvar
//! (shunts at 1 pu voltage); r, x, b in pu on `base_mva`; `bg` in currency
//! per MWh; `srated` in MVA; `c0`, `c2` in pu on `base_mva` (`c0` in pu
//! power, `c2` in 1/pu). Omitted `c0`/`c2` select the default loss curve.
//! Lines starting with `#` are comments. Everything is converted to per-unit
//! while parsing.

use std::fmt::Write as _;

use crate::model::{default_loss_c0, default_loss_c2, Branch, Bus, BusKind, Converter, Generator, Network};
use crate::NetworkError;

pub const FORMAT_NAME: &str = "acdc-case";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Header,
    Bus,
    Branch,
    Gen,
    Conv,
}

fn syntax(line: usize, message: impl Into<String>) -> NetworkError {
    NetworkError::Syntax {
        line,
        message: message.into(),
    }
}

fn num(tok: &str, line: usize, field: &str) -> Result<f64, NetworkError> {
    let v: f64 = tok
        .parse()
        .map_err(|_| syntax(line, format!("field `{field}`: cannot parse `{tok}` as a number")))?;
    if !v.is_finite() {
        return Err(syntax(line, format!("field `{field}`: value must be finite")));
    }
    Ok(v)
}

fn int(tok: &str, line: usize, field: &str) -> Result<u32, NetworkError> {
    tok.parse()
        .map_err(|_| syntax(line, format!("field `{field}`: cannot parse `{tok}` as an integer")))
}

fn arity(toks: &[&str], line: usize, allowed: &[usize], section: &str) -> Result<(), NetworkError> {
    if allowed.contains(&toks.len()) {
        Ok(())
    } else {
        Err(syntax(
            line,
            format!("{section} row has {} fields, expected {:?}", toks.len(), allowed),
        ))
    }
}

/// Parses and validates a case file.
pub fn parse_case(text: &str) -> Result<Network, NetworkError> {
    let mut net = Network::default();
    let mut section = Section::Header;
    let mut saw_version = false;
    // Raw rows are converted once the base is known.
    let mut bus_rows = Vec::new();
    let mut branch_rows = Vec::new();
    let mut gen_rows = Vec::new();
    let mut conv_rows = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if !saw_version {
            if toks.len() != 2 || toks[0] != FORMAT_NAME {
                return Err(syntax(line, format!("expected header `{FORMAT_NAME} <version>`")));
            }
            let v = int(toks[1], line, "version")?;
            if v != FORMAT_VERSION {
                return Err(NetworkError::UnsupportedVersion(v));
            }
            saw_version = true;
            continue;
        }
        if content.starts_with('[') {
            section = match content {
                "[BUS]" => Section::Bus,
                "[BRANCH]" => Section::Branch,
                "[GEN]" => Section::Gen,
                "[CONV]" => Section::Conv,
                other => return Err(syntax(line, format!("unknown section {other}"))),
            };
            continue;
        }
        match section {
            Section::Header => {
                if toks.len() != 2 {
                    return Err(syntax(line, "header entries are `key value` pairs"));
                }
                match toks[0] {
                    "base_mva" => net.base_mva = num(toks[1], line, "base_mva")?,
                    "a_q" => net.a_q = num(toks[1], line, "a_q")?,
                    other => return Err(syntax(line, format!("unknown header key `{other}`"))),
                }
            }
            Section::Bus => {
                arity(&toks, line, &[8, 10], "BUS")?;
                bus_rows.push((line, toks.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            }
            Section::Branch => {
                arity(&toks, line, &[5], "BRANCH")?;
                branch_rows.push((line, toks.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            }
            Section::Gen => {
                arity(&toks, line, &[6], "GEN")?;
                gen_rows.push((line, toks.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            }
            Section::Conv => {
                arity(&toks, line, &[3, 5], "CONV")?;
                conv_rows.push((line, toks.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
            }
        }
    }
    if !saw_version {
        return Err(syntax(0, "empty case file"));
    }
    if !(net.base_mva > 0.0) {
        return Err(syntax(0, "base_mva must be positive"));
    }
    let base = net.base_mva;

    for (line, t) in bus_rows {
        let kind = match t[1].as_str() {
            "ac" | "AC" => BusKind::Ac,
            "dc" | "DC" => BusKind::Dc,
            other => return Err(syntax(line, format!("field `kind`: expected ac or dc, got `{other}`"))),
        };
        let is_ref = match t[4].as_str() {
            "0" => false,
            "1" => true,
            other => return Err(syntax(line, format!("field `ref`: expected 0 or 1, got `{other}`"))),
        };
        let (gs, bs) = if t.len() == 10 {
            (num(&t[8], line, "gs")? / base, num(&t[9], line, "bs")? / base)
        } else {
            (0.0, 0.0)
        };
        net.buses.push(Bus {
            id: int(&t[0], line, "id")?,
            kind,
            v_min: num(&t[2], line, "vmin")?,
            v_max: num(&t[3], line, "vmax")?,
            is_ref,
            region: int(&t[5], line, "region")?,
            p_load: num(&t[6], line, "pload")? / base,
            q_load: num(&t[7], line, "qload")? / base,
            gs,
            bs,
        });
    }
    for (line, t) in branch_rows {
        net.branches.push(Branch::new(
            int(&t[0], line, "from")?,
            int(&t[1], line, "to")?,
            num(&t[2], line, "r")?,
            num(&t[3], line, "x")?,
            num(&t[4], line, "b")?,
        ));
    }
    for (line, t) in gen_rows {
        net.generators.push(Generator {
            bus: int(&t[0], line, "bus")?,
            p_min: num(&t[1], line, "pmin")? / base,
            p_max: num(&t[2], line, "pmax")? / base,
            q_min: num(&t[3], line, "qmin")? / base,
            q_max: num(&t[4], line, "qmax")? / base,
            cost: num(&t[5], line, "bg")?,
            is_auxiliary: false,
        });
    }
    for (line, t) in conv_rows {
        let s_rated = num(&t[2], line, "srated")? / base;
        let (c0, c2) = if t.len() == 5 {
            (num(&t[3], line, "c0")?, num(&t[4], line, "c2")?)
        } else {
            (default_loss_c0(s_rated), default_loss_c2(s_rated))
        };
        net.converters.push(Converter {
            ac_bus: int(&t[0], line, "acbus")?,
            dc_bus: int(&t[1], line, "dcbus")?,
            s_rated,
            loss_c0: c0,
            loss_c2: c2,
        });
    }
    net.validate()?;
    Ok(net)
}

/// Writes a network in the case-file format. Auxiliary generators are written
/// as ordinary generators; the output is meant for original networks.
pub fn serialize_case(net: &Network) -> String {
    let base = net.base_mva;
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_NAME} {FORMAT_VERSION}");
    let _ = writeln!(out, "base_mva {}", net.base_mva);
    let _ = writeln!(out, "a_q {}", net.a_q);
    let _ = writeln!(out, "\n[BUS]\n# id kind vmin vmax ref region pload qload gs bs");
    for b in &net.buses {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {}",
            b.id,
            b.kind.as_str(),
            b.v_min,
            b.v_max,
            u8::from(b.is_ref),
            b.region,
            b.p_load * base,
            b.q_load * base,
            b.gs * base,
            b.bs * base
        );
    }
    let _ = writeln!(out, "\n[BRANCH]\n# from to r x b");
    for br in &net.branches {
        let _ = writeln!(out, "{} {} {} {} {}", br.from, br.to, br.r, br.x, br.total_charging());
    }
    let _ = writeln!(out, "\n[GEN]\n# bus pmin pmax qmin qmax bg");
    for g in &net.generators {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            g.bus,
            g.p_min * base,
            g.p_max * base,
            g.q_min * base,
            g.q_max * base,
            g.cost
        );
    }
    let _ = writeln!(out, "\n[CONV]\n# acbus dcbus srated c0 c2");
    for c in &net.converters {
        let _ = writeln!(
            out,
            "{} {} {} {} {}",
            c.ac_bus,
            c.dc_bus,
            c.s_rated * base,
            c.loss_c0,
            c.loss_c2
        );
    }
    out
}
