//! Line-oriented structure cache.
//!
//! ```text
//! # geopep structure v1
//! pdb_id 1ABC
//! resolution 1.54        (or `none`)
//! method xray            (xray | nmr | other | none)
//! atom <chain> <res_seq> <icode> <resname> <atomname> <x> <y> <z> <element> <serial> <occupancy>
//! ```
//!
//! Blank chain ids and insertion codes are written as `_`. Floats use the
//! shortest round-trip representation, so read(write(c)) reproduces every
//! coordinate bit for bit.

use std::collections::HashMap;

use super::{Atom, Chain, Complex, Method, Residue, StructError};

const MAGIC: &str = "# geopep structure v1";

fn enc(c: char) -> char {
    if c == ' ' {
        '_'
    } else {
        c
    }
}

fn dec(s: &str) -> char {
    match s {
        "_" => ' ',
        other => other.chars().next().unwrap_or(' '),
    }
}

pub fn write_structure(complex: &Complex) -> String {
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("pdb_id {}\n", complex.pdb_id));
    match complex.resolution {
        Some(r) => out.push_str(&format!("resolution {r}\n")),
        None => out.push_str("resolution none\n"),
    }
    out.push_str(&format!(
        "method {}\n",
        complex.method.map(|m| m.as_str()).unwrap_or("none")
    ));
    for chain in &complex.chains {
        for res in &chain.residues {
            for a in &res.atoms {
                out.push_str(&format!(
                    "atom {} {} {} {} {} {} {} {} {} {} {}\n",
                    enc(chain.id),
                    res.seq_id,
                    enc(res.insertion_code),
                    res.name,
                    a.name,
                    a.coord[0],
                    a.coord[1],
                    a.coord[2],
                    if a.element.is_empty() { "_" } else { &a.element },
                    a.serial,
                    a.occupancy
                ));
            }
        }
    }
    out
}

pub fn read_structure(text: &str) -> Result<Complex, StructError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == MAGIC => {}
        _ => {
            return Err(StructError::Parse {
                line: 1,
                message: "missing structure cache header".into(),
            })
        }
    }
    let err = |line: usize, message: String| StructError::Parse { line: line + 1, message };
    let mut pdb_id = String::new();
    let mut resolution = None;
    let mut method = None;
    let mut chains: Vec<(char, Vec<Residue>, HashMap<(i32, char), usize>)> = Vec::new();

    for (i, line) in lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first().copied() {
            None => continue,
            Some("pdb_id") if fields.len() == 2 => pdb_id = fields[1].to_string(),
            Some("resolution") if fields.len() == 2 => {
                resolution = match fields[1] {
                    "none" => None,
                    v => Some(v.parse().map_err(|_| err(i, format!("bad resolution '{v}'")))?),
                }
            }
            Some("method") if fields.len() == 2 => {
                method = match fields[1] {
                    "none" => None,
                    v => Some(Method::parse(v).ok_or_else(|| err(i, format!("bad method '{v}'")))?),
                }
            }
            Some("atom") if fields.len() == 12 => {
                let f = |k: usize| -> Result<f64, StructError> {
                    fields[k]
                        .parse::<f64>()
                        .map_err(|_| err(i, format!("bad number '{}'", fields[k])))
                };
                let chain_id = dec(fields[1]);
                let seq_id: i32 = fields[2]
                    .parse()
                    .map_err(|_| err(i, format!("bad residue number '{}'", fields[2])))?;
                let icode = dec(fields[3]);
                let atom = Atom {
                    serial: fields[10]
                        .parse()
                        .map_err(|_| err(i, format!("bad serial '{}'", fields[10])))?,
                    name: fields[5].to_string(),
                    element: if fields[9] == "_" { String::new() } else { fields[9].to_string() },
                    coord: [f(6)?, f(7)?, f(8)?],
                    occupancy: f(11)?,
                    altloc: ' ',
                    is_hetero: false,
                };
                let ci = match chains.iter().position(|c| c.0 == chain_id) {
                    Some(ci) => ci,
                    None => {
                        chains.push((chain_id, Vec::new(), HashMap::new()));
                        chains.len() - 1
                    }
                };
                let chain = &mut chains[ci];
                let ri = match chain.2.get(&(seq_id, icode)) {
                    Some(&ri) => ri,
                    None => {
                        chain.1.push(Residue::new(seq_id, icode, fields[4], Vec::new()));
                        chain.2.insert((seq_id, icode), chain.1.len() - 1);
                        chain.1.len() - 1
                    }
                };
                chain.1[ri].atoms.push(atom);
            }
            Some(other) => return Err(err(i, format!("unrecognized cache line '{other}'"))),
        }
    }
    if chains.is_empty() {
        return Err(StructError::EmptyStructure);
    }
    let chains = chains
        .into_iter()
        .map(|(id, mut residues, _)| {
            residues.iter_mut().for_each(Residue::update_mass_center);
            Chain::new(id, residues)
        })
        .collect();
    Ok(Complex {
        pdb_id,
        chains,
        resolution,
        method,
    })
}
