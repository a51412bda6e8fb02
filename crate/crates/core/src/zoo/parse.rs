//! Group names accepted on the command line.

use std::sync::Arc;

use super::gog::GraphOfGroups;
use super::groups::{
    Amalgam, Cyclic, Free, Hnn, Lamplighter, Product, Symmetric, ZGens, ZWreathZ, Zn,
};
use super::SharedGroup;
use crate::error::{Error, Result};

/// `(pattern, description)` for every accepted name.
pub fn zoo_names() -> Vec<(&'static str, &'static str)> {
    vec![
        ("zn:N", "free abelian group Z^N, standard generators"),
        ("z:S1,S2,..", "Z with generators +-S (must include 1)"),
        ("fk:N", "free group on N letters (alias f:N, f2, f3, ..)"),
        ("cyclic:N", "cyclic group of order N (alias c:N)"),
        ("sym:N", "symmetric group S_N, adjacent transpositions"),
        ("trivial", "the trivial group"),
        ("lamplighter", "Z_2 wr Z, generators t, l"),
        ("zwrz", "Z wr Z, generators t, l"),
        ("amalgam:X*Y", "free product, X and Y among z, z2, z3, .."),
        (
            "amalgam:X*Y/M,N",
            "amalgam over C with index M in X and N in Y",
        ),
        ("bs:P,Q", "Baumslag-Solitar group <a,t | t^-1 a^P t = a^Q>"),
        ("product:G+H", "direct product of two zoo groups"),
        (
            "relhyp:fK|a,b,..",
            "free group relative to cyclic subgroups of basis letters (zoo ball only)",
        ),
    ]
}

fn int(s: &str, what: &str) -> Result<i64> {
    s.trim()
        .parse::<i64>()
        .map_err(|_| Error::invalid(format!("{what}: expected an integer, got {s:?}")))
}

fn pair(s: &str, what: &str) -> Result<(i64, i64)> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::invalid(format!("{what}: expected two comma-separated integers")))?;
    Ok((int(a, what)?, int(b, what)?))
}

fn factor_order(s: &str) -> Result<i64> {
    match s.trim() {
        "z" => Ok(0),
        f => match f.strip_prefix('z') {
            Some(n) => int(n, "amalgam factor"),
            None => Err(Error::invalid(format!(
                "amalgam factor must be z or zN, got {f:?}"
            ))),
        },
    }
}

/// Parses an amalgam or Baumslag–Solitar name as a graph of groups.
pub fn parse_gog(name: &str) -> Result<GraphOfGroups> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("amalgam:") {
        let (factors, index) = match rest.split_once('/') {
            Some((f, i)) => (f, Some(pair(i, "amalgam index")?)),
            None => (rest, None),
        };
        let (x, y) = factors
            .split_once('*')
            .ok_or_else(|| Error::invalid("amalgam needs two factors joined by '*'"))?;
        let (p, q) = (factor_order(x)?, factor_order(y)?);
        let a = match index {
            Some((m, n)) => Amalgam::new(p, q, m, n)?,
            None => Amalgam::free_product(p, q)?,
        };
        return Ok(GraphOfGroups::Amalgam(a));
    }
    if let Some(rest) = name.strip_prefix("bs:") {
        let (p, q) = pair(rest, "bs")?;
        return Ok(GraphOfGroups::Hnn(Hnn::new(p, q)?));
    }
    Err(Error::invalid(format!(
        "{name:?} is not an amalgam or HNN extension"
    )))
}

pub fn parse_group(name: &str) -> Result<SharedGroup> {
    let name = name.trim();
    if let Some(rest) = name.strip_prefix("product:") {
        let (g, h) = rest
            .split_once('+')
            .ok_or_else(|| Error::invalid("product needs two groups joined by '+'"))?;
        return Ok(Arc::new(Product {
            left: parse_group(g)?,
            right: parse_group(h)?,
        }));
    }
    if name.starts_with("amalgam:") || name.starts_with("bs:") {
        return Ok(parse_gog(name)?.group());
    }
    if name.starts_with("relhyp:") {
        return Err(Error::invalid(
            "relhyp subjects have no plain Cayley metric; use the relhyp commands",
        ));
    }
    let (head, arg) = name.split_once(':').unwrap_or((name, ""));
    let positive = |what: &str, min: i64| -> Result<i64> {
        let v = int(arg, what)?;
        if v < min {
            return Err(Error::invalid(format!("{what} must be at least {min}")));
        }
        Ok(v)
    };
    let g: SharedGroup = match head {
        "z" if arg.is_empty() || arg == "1" => Arc::new(Zn { n: 1 }),
        "z" => {
            let steps = arg
                .split(',')
                .map(|s| int(s, "z generators"))
                .collect::<Result<Vec<_>>>()?;
            Arc::new(ZGens::new(steps)?)
        }
        "zn" => Arc::new(Zn {
            n: positive("zn", 1)? as usize,
        }),
        "fk" | "f" => Arc::new(Free {
            k: positive("fk", 1)? as usize,
        }),
        "cyclic" | "c" => Arc::new(Cyclic {
            n: positive("cyclic", 1)?,
        }),
        "sym" => Arc::new(Symmetric {
            n: positive("sym", 1)? as usize,
        }),
        "trivial" => Arc::new(Cyclic { n: 1 }),
        "lamplighter" => Arc::new(Lamplighter),
        "zwrz" => Arc::new(ZWreathZ),
        _ => match head.strip_prefix('f').map(str::parse::<usize>) {
            Some(Ok(k)) if k >= 1 => Arc::new(Free { k }),
            _ => {
                return Err(Error::invalid(format!(
                    "unknown group {name:?}; see `zoo list`"
                )))
            }
        },
    };
    Ok(g)
}
