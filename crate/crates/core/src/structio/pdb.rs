use std::collections::HashMap;

use super::{is_hydrogen, Atom, Chain, Complex, Method, Residue, StructError};
use crate::residues;

/// Accounting of every coordinate record read from the first model.
///
/// `records == kept + hydrogens + waters + hetero + altloc_dropped`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub records: usize,
    pub kept: usize,
    pub hydrogens: usize,
    pub waters: usize,
    pub hetero: usize,
    pub altloc_dropped: usize,
}

/// Parses fixed-column PDB text. The PDB id comes from the HEADER record,
/// falling back to `UNKN`.
pub fn parse_pdb(text: &str) -> Result<Complex, StructError> {
    parse_pdb_with_stats(text).map(|(c, _)| c)
}

fn col(line: &str, start: usize, end: usize) -> &str {
    let end = end.min(line.len());
    if start >= end {
        return "";
    }
    line.get(start..end).unwrap_or("")
}

fn parse_f64(line: &str, lineno: usize, start: usize, end: usize, what: &str) -> Result<f64, StructError> {
    let raw = col(line, start, end).trim();
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| StructError::Parse {
            line: lineno,
            message: format!("malformed {what} field '{raw}'"),
        })
}

fn infer_element(name_field: &str, hetero: bool) -> String {
    let chars: Vec<char> = name_field.chars().collect();
    let first = chars.first().copied().unwrap_or(' ');
    if first.is_ascii_alphabetic() && hetero && chars.len() >= 2 {
        let two: String = chars[..2].iter().collect();
        if let Some(e) = residues::canonical_element(&two) {
            if e.len() == 2 {
                return e.to_string();
            }
        }
    }
    name_field
        .trim()
        .chars()
        .find(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_uppercase().to_string())
        .unwrap_or_default()
}

fn altloc_rank(c: char) -> u32 {
    match c {
        ' ' => 0,
        'A' => 1,
        other => 2 + other as u32,
    }
}

struct ResidueBuilder {
    seq_id: i32,
    icode: char,
    name: String,
    atoms: Vec<Atom>,
    by_name: HashMap<String, usize>,
}

struct ChainBuilder {
    id: char,
    residues: Vec<ResidueBuilder>,
    index: HashMap<(i32, char), usize>,
}

/// As [`parse_pdb`], also returning the per-rule record accounting.
pub fn parse_pdb_with_stats(text: &str) -> Result<(Complex, ParseStats), StructError> {
    let mut stats = ParseStats::default();
    let mut pdb_id = String::new();
    let mut method = None;
    let mut resolution = None;
    let mut atom_records = 0usize;
    let mut chains: Vec<ChainBuilder> = Vec::new();
    let mut chain_index: HashMap<char, usize> = HashMap::new();
    let mut next_serial = 1i64;

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let record = col(line, 0, 6);
        match record.trim_end() {
            "HEADER" => {
                let id = col(line, 62, 66).trim();
                if !id.is_empty() {
                    pdb_id = id.to_string();
                }
            }
            "EXPDTA" if method.is_none() => {
                let m = line.to_ascii_uppercase();
                method = Some(if m.contains("X-RAY") {
                    Method::Xray
                } else if m.contains("NMR") {
                    Method::Nmr
                } else {
                    Method::Other
                });
            }
            "REMARK" if col(line, 6, 10).trim() == "2" => {
                if let Some(pos) = line.find("RESOLUTION.") {
                    resolution = line[pos + "RESOLUTION.".len()..]
                        .split_whitespace()
                        .next()
                        .and_then(|t| t.parse::<f64>().ok());
                }
            }
            // first model only
            "ENDMDL" => break,
            "ATOM" | "HETATM" => {
                let hetero = record.starts_with("HETATM");
                if !hetero {
                    atom_records += 1;
                }
                stats.records += 1;
                if line.len() < 54 {
                    return Err(StructError::Parse {
                        line: lineno,
                        message: format!("coordinate record too short ({} columns)", line.len()),
                    });
                }
                let x = parse_f64(line, lineno, 30, 38, "x coordinate")?;
                let y = parse_f64(line, lineno, 38, 46, "y coordinate")?;
                let z = parse_f64(line, lineno, 46, 54, "z coordinate")?;
                let res_name = col(line, 17, 20).trim().to_string();
                let name_field = col(line, 12, 16);
                let mut element = col(line, 76, 78).trim().to_string();
                if element.is_empty() || element.chars().any(|c| !c.is_ascii_alphabetic()) {
                    element = infer_element(name_field, hetero);
                }
                if residues::is_water(&res_name) {
                    stats.waters += 1;
                    continue;
                }
                if hetero {
                    stats.hetero += 1;
                    continue;
                }
                if is_hydrogen(&element) {
                    stats.hydrogens += 1;
                    continue;
                }
                let occ_raw = col(line, 54, 60).trim();
                let occupancy = if occ_raw.is_empty() {
                    1.0
                } else {
                    let o = parse_f64(line, lineno, 54, 60, "occupancy")?;
                    if !(0.0..=1.0).contains(&o) {
                        return Err(StructError::Parse {
                            line: lineno,
                            message: format!("occupancy {o} outside [0, 1]"),
                        });
                    }
                    o
                };
                let seq_raw = col(line, 22, 26).trim();
                let seq_id: i32 = seq_raw.parse().map_err(|_| StructError::Parse {
                    line: lineno,
                    message: format!("malformed residue number '{seq_raw}'"),
                })?;
                let serial = match col(line, 6, 11).trim().parse::<i64>() {
                    Ok(s) => s,
                    Err(_) => next_serial,
                };
                next_serial = serial + 1;
                let altloc = col(line, 16, 17).chars().next().unwrap_or(' ');
                let icode = col(line, 26, 27).chars().next().unwrap_or(' ');
                let chain_id = col(line, 21, 22).chars().next().unwrap_or(' ');
                let atom = Atom {
                    serial,
                    name: name_field.trim().to_string(),
                    element: residues::canonical_element(&element)
                        .map(str::to_string)
                        .unwrap_or(element),
                    coord: [x, y, z],
                    occupancy,
                    altloc,
                    is_hetero: false,
                };

                let ci = *chain_index.entry(chain_id).or_insert_with(|| {
                    chains.push(ChainBuilder {
                        id: chain_id,
                        residues: Vec::new(),
                        index: HashMap::new(),
                    });
                    chains.len() - 1
                });
                let chain = &mut chains[ci];
                let ri = *chain.index.entry((seq_id, icode)).or_insert_with(|| {
                    chain.residues.push(ResidueBuilder {
                        seq_id,
                        icode,
                        name: res_name.clone(),
                        atoms: Vec::new(),
                        by_name: HashMap::new(),
                    });
                    chain.residues.len() - 1
                });
                let residue = &mut chain.residues[ri];
                match residue.by_name.get(&atom.name) {
                    Some(&ai) => {
                        stats.altloc_dropped += 1;
                        let current = &residue.atoms[ai];
                        let better = atom.occupancy > current.occupancy
                            || (atom.occupancy == current.occupancy
                                && altloc_rank(atom.altloc) < altloc_rank(current.altloc));
                        if better {
                            residue.atoms[ai] = atom;
                        }
                    }
                    None => {
                        residue.by_name.insert(atom.name.clone(), residue.atoms.len());
                        residue.atoms.push(atom);
                        stats.kept += 1;
                    }
                }
            }
            _ => {}
        }
    }

    if atom_records == 0 || stats.kept == 0 {
        return Err(StructError::EmptyStructure);
    }
    if pdb_id.is_empty() {
        pdb_id = "UNKN".to_string();
    }
    let chains = chains
        .into_iter()
        .map(|cb| {
            let residues = cb
                .residues
                .into_iter()
                .map(|rb| Residue::new(rb.seq_id, rb.icode, rb.name, rb.atoms))
                .collect();
            Chain::new(cb.id, residues)
        })
        .collect();
    Ok((
        Complex {
            pdb_id,
            chains,
            resolution,
            method,
        },
        stats,
    ))
}

fn atom_name_field(name: &str, element: &str) -> String {
    if name.len() < 4 && element.len() == 1 {
        format!(" {name:<3}")
    } else {
        format!("{name:<4}")
    }
}

/// Fixed-column PDB text for a complex: HEADER, optional EXPDTA and
/// resolution remark, ATOM records per chain with TER, then END.
pub fn write_pdb(complex: &Complex) -> String {
    let mut out = format!("HEADER    {:<52}{:<4}\n", "SYNTHETIC", complex.pdb_id);
    if let Some(m) = complex.method {
        let text = match m {
            Method::Xray => "X-RAY DIFFRACTION",
            Method::Nmr => "SOLUTION NMR",
            Method::Other => "OTHER",
        };
        out.push_str(&format!("EXPDTA    {text}\n"));
    }
    if let Some(r) = complex.resolution {
        out.push_str(&format!("REMARK   2 RESOLUTION.    {r:.2} ANGSTROMS.\n"));
    }
    let mut serial = 1;
    for chain in &complex.chains {
        for res in &chain.residues {
            for a in &res.atoms {
                let altloc = if a.altloc == '\0' { ' ' } else { a.altloc };
                out.push_str(&format!(
                    "ATOM  {:>5} {}{}{:>3} {}{:>4}{}   {:>8.3}{:>8.3}{:>8.3}{:>6.2}{:>6.2}          {:>2}\n",
                    serial % 100_000,
                    atom_name_field(&a.name, &a.element),
                    altloc,
                    res.name,
                    chain.id,
                    res.seq_id,
                    res.insertion_code,
                    a.coord[0],
                    a.coord[1],
                    a.coord[2],
                    a.occupancy,
                    0.0,
                    a.element
                ));
                serial += 1;
            }
        }
        out.push_str("TER\n");
    }
    out.push_str("END\n");
    out
}
