//! Per-residue and per-element constant tables.

/// Canonical one-letter alphabet used for one-hot encoding, followed by `X`.
pub const ALPHABET: [char; 21] = [
    'A', 'C', 'D', 'E', 'F', 'G', 'H', 'I', 'K', 'L', 'M', 'N', 'P', 'Q', 'R', 'S', 'T', 'V', 'W',
    'Y', 'X',
];

/// One-letter code for a three-letter residue name; non-standard names map to `X`.
pub fn one_letter(name: &str) -> char {
    match name.trim().to_ascii_uppercase().as_str() {
        "ALA" => 'A',
        "ARG" => 'R',
        "ASN" => 'N',
        "ASP" => 'D',
        "CYS" | "CYX" | "CYM" => 'C',
        "GLN" => 'Q',
        "GLU" => 'E',
        "GLY" => 'G',
        "HIS" | "HID" | "HIE" | "HIP" | "HSD" | "HSE" | "HSP" => 'H',
        "ILE" => 'I',
        "LEU" => 'L',
        "LYS" => 'K',
        "MET" => 'M',
        "PHE" => 'F',
        "PRO" => 'P',
        "SER" => 'S',
        "THR" => 'T',
        "TRP" => 'W',
        "TYR" => 'Y',
        "VAL" => 'V',
        _ => 'X',
    }
}

/// Three-letter name for a canonical one-letter code (`UNK` otherwise).
pub fn three_letter(code: char) -> &'static str {
    match code {
        'A' => "ALA",
        'R' => "ARG",
        'N' => "ASN",
        'D' => "ASP",
        'C' => "CYS",
        'Q' => "GLN",
        'E' => "GLU",
        'G' => "GLY",
        'H' => "HIS",
        'I' => "ILE",
        'L' => "LEU",
        'K' => "LYS",
        'M' => "MET",
        'F' => "PHE",
        'P' => "PRO",
        'S' => "SER",
        'T' => "THR",
        'W' => "TRP",
        'Y' => "TYR",
        'V' => "VAL",
        _ => "UNK",
    }
}

/// Index of a one-letter code in [`ALPHABET`]; unknown codes share the `X` slot.
pub fn alphabet_index(code: char) -> usize {
    ALPHABET
        .iter()
        .position(|&c| c == code)
        .unwrap_or(ALPHABET.len() - 1)
}

pub fn is_water(name: &str) -> bool {
    matches!(
        name.trim().to_ascii_uppercase().as_str(),
        "HOH" | "WAT" | "DOD" | "H2O" | "TIP" | "TIP3" | "SOL"
    )
}

/// Physicochemical descriptor table, one row per entry of [`ALPHABET`].
///
/// Columns: Kyte-Doolittle hydropathy / 4.5, net charge at pH 7,
/// polar flag, aromatic flag, free amino-acid mass / 200 Da,
/// isoelectric point / 14, Zamyatnin residue volume / 230 Å³.
/// The `X` row holds the mean of the numeric columns and zero flags.
pub const PHYSCHEM_DIM: usize = 7;

const PHYSCHEM_RAW: [(char, f64, f64, f64, f64, f64, f64, f64); 20] = [
    ('A', 1.8, 0.0, 0.0, 0.0, 89.09, 6.00, 88.6),
    ('C', 2.5, 0.0, 0.0, 0.0, 121.16, 5.07, 108.5),
    ('D', -3.5, -1.0, 1.0, 0.0, 133.10, 2.77, 111.1),
    ('E', -3.5, -1.0, 1.0, 0.0, 147.13, 3.22, 138.4),
    ('F', 2.8, 0.0, 0.0, 1.0, 165.19, 5.48, 189.9),
    ('G', -0.4, 0.0, 0.0, 0.0, 75.07, 5.97, 60.1),
    ('H', -3.2, 0.0, 1.0, 1.0, 155.16, 7.59, 153.2),
    ('I', 4.5, 0.0, 0.0, 0.0, 131.17, 6.02, 166.7),
    ('K', -3.9, 1.0, 1.0, 0.0, 146.19, 9.74, 168.6),
    ('L', 3.8, 0.0, 0.0, 0.0, 131.17, 5.98, 166.7),
    ('M', 1.9, 0.0, 0.0, 0.0, 149.21, 5.74, 162.9),
    ('N', -3.5, 0.0, 1.0, 0.0, 132.12, 5.41, 114.1),
    ('P', -1.6, 0.0, 0.0, 0.0, 115.13, 6.30, 112.7),
    ('Q', -3.5, 0.0, 1.0, 0.0, 146.15, 5.65, 143.8),
    ('R', -4.5, 1.0, 1.0, 0.0, 174.20, 10.76, 173.4),
    ('S', -0.8, 0.0, 1.0, 0.0, 105.09, 5.68, 89.0),
    ('T', -0.7, 0.0, 1.0, 0.0, 119.12, 5.60, 116.1),
    ('V', 4.2, 0.0, 0.0, 0.0, 117.15, 5.96, 140.0),
    ('W', -0.9, 0.0, 0.0, 1.0, 204.23, 5.89, 227.8),
    ('Y', -1.3, 0.0, 1.0, 1.0, 181.19, 5.66, 193.6),
];

fn scaled_row(r: &(char, f64, f64, f64, f64, f64, f64, f64)) -> [f64; PHYSCHEM_DIM] {
    [r.1 / 4.5, r.2, r.3, r.4, r.5 / 200.0, r.6 / 14.0, r.7 / 230.0]
}

/// Scaled physicochemical descriptors for a one-letter code.
pub fn physchem(code: char) -> [f64; PHYSCHEM_DIM] {
    if let Some(row) = PHYSCHEM_RAW.iter().find(|r| r.0 == code) {
        return scaled_row(row);
    }
    let mut mean = [0.0; PHYSCHEM_DIM];
    for row in &PHYSCHEM_RAW {
        let s = scaled_row(row);
        for k in 0..PHYSCHEM_DIM {
            mean[k] += s[k] / PHYSCHEM_RAW.len() as f64;
        }
    }
    // flags are not averaged
    mean[1] = 0.0;
    mean[2] = 0.0;
    mean[3] = 0.0;
    mean
}

/// Theoretical maximum SASA (Å²) per residue type, Tien et al. 2013 values.
pub fn max_sasa(code: char) -> Option<f64> {
    Some(match code {
        'A' => 129.0,
        'R' => 274.0,
        'N' => 195.0,
        'D' => 193.0,
        'C' => 167.0,
        'Q' => 225.0,
        'E' => 223.0,
        'G' => 104.0,
        'H' => 224.0,
        'I' => 197.0,
        'L' => 201.0,
        'K' => 236.0,
        'M' => 224.0,
        'F' => 240.0,
        'P' => 159.0,
        'S' => 155.0,
        'T' => 172.0,
        'W' => 285.0,
        'Y' => 263.0,
        'V' => 174.0,
        _ => return None,
    })
}

/// Fallback maximum SASA for non-standard residues.
pub const GENERIC_MAX_SASA: f64 = 200.0;

const ELEMENTS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In",
    "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
    "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl",
    "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk",
    "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh",
    "Fl", "Mc", "Lv", "Ts", "Og",
];

/// Normalizes an element symbol to its canonical capitalization, if it is one.
pub fn canonical_element(symbol: &str) -> Option<&'static str> {
    let s = symbol.trim();
    if s.eq_ignore_ascii_case("D") {
        return Some("H");
    }
    ELEMENTS.iter().copied().find(|e| e.eq_ignore_ascii_case(s))
}

/// Van der Waals radius (Å) for SASA. Returns `None` for strings that are not
/// chemical elements.
pub fn vdw_radius(element: &str) -> Option<f64> {
    let e = canonical_element(element)?;
    Some(match e {
        "C" => 1.70,
        "N" => 1.55,
        "O" => 1.52,
        "S" => 1.80,
        "P" => 1.80,
        "H" => 1.10,
        _ => 1.70,
    })
}
