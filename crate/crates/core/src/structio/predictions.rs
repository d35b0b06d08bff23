//! Per-residue prediction CSV.
//!
//! Header: `pdb_id,protein_chain,peptide_chain,res_seq,icode,probability,label`.
//! Blank insertion codes are written as empty fields. The label column is
//! optional on read so that predictions exported by other tools can be scored.

use std::collections::BTreeMap;

use super::StructError;
use crate::dataset::LabeledPair;

pub const HEADER: [&str; 7] = [
    "pdb_id",
    "protein_chain",
    "peptide_chain",
    "res_seq",
    "icode",
    "probability",
    "label",
];

/// Rows are keyed per chain pair, since one protein chain may be paired with
/// several peptides in the same entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredictionKey {
    pub pdb_id: String,
    pub protein_chain: char,
    pub peptide_chain: char,
    pub res_seq: i32,
    pub icode: char,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionRow {
    pub probability: f64,
    pub label: Option<u8>,
}

pub type PredictionTable = BTreeMap<PredictionKey, PredictionRow>;

fn chain_field(c: char) -> String {
    if c == ' ' {
        String::new()
    } else {
        c.to_string()
    }
}

/// `probabilities` must hold one value per real (unmasked) protein residue.
pub fn write_predictions(pairs: &[(&LabeledPair, &[f64])]) -> Result<String, StructError> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(HEADER)?;
    for (pair, probs) in pairs {
        let n = pair.residue_keys.len();
        if probs.len() != n {
            return Err(StructError::Alignment {
                pair: pair.instance_id(),
                probabilities: probs.len(),
                residues: n,
            });
        }
        for (i, key) in pair.residue_keys.iter().enumerate() {
            w.write_record([
                pair.pdb_id.clone(),
                chain_field(pair.protein_chain),
                chain_field(pair.peptide_chain),
                key.seq_id.to_string(),
                chain_field(key.insertion_code),
                format!("{:.6}", probs[i]),
                pair.labels[i].to_string(),
            ])?;
        }
    }
    let bytes = w.into_inner().map_err(|e| StructError::Validation {
        row: 0,
        message: e.to_string(),
    })?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn single_char(s: &str) -> char {
    s.trim().chars().next().unwrap_or(' ')
}

pub fn read_predictions(text: &str) -> Result<PredictionTable, StructError> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_label = match cols.as_slice() {
        c if c == HEADER => true,
        c if c == &HEADER[..6] => false,
        _ => {
            return Err(StructError::Validation {
                row: 0,
                message: format!("unexpected header '{}'", cols.join(",")),
            })
        }
    };
    let mut table = PredictionTable::new();
    for (i, rec) in r.records().enumerate() {
        let row = i + 1;
        let rec = rec?;
        let bad = |message: String| StructError::Validation { row, message };
        let res_seq: i32 = rec[3]
            .parse()
            .map_err(|_| bad(format!("bad res_seq '{}'", &rec[3])))?;
        let probability: f64 = rec[5]
            .parse()
            .map_err(|_| bad(format!("bad probability '{}'", &rec[5])))?;
        if !(0.0..=1.0).contains(&probability) {
            return Err(bad(format!("probability {probability} outside [0, 1]")));
        }
        let label = if has_label && !rec[6].is_empty() {
            match &rec[6] {
                "0" => Some(0),
                "1" => Some(1),
                other => return Err(bad(format!("bad label '{other}'"))),
            }
        } else {
            None
        };
        let key = PredictionKey {
            pdb_id: rec[0].to_string(),
            protein_chain: single_char(&rec[1]),
            peptide_chain: single_char(&rec[2]),
            res_seq,
            icode: single_char(&rec[4]),
        };
        if table.contains_key(&key) {
            return Err(bad(format!("duplicate key {key:?}")));
        }
        table.insert(key, PredictionRow { probability, label });
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::ResidueKey;

    fn pair() -> LabeledPair {
        let mut labels = vec![0u8; 5];
        labels[1] = 1;
        LabeledPair {
            pdb_id: "1ABC".into(),
            peptide_chain: 'P',
            protein_chain: 'A',
            peptide_seq: "GG".into(),
            protein_seq: "AAA".into(),
            labels,
            mask: vec![1, 1, 1, 0, 0],
            residue_keys: vec![
                ResidueKey { seq_id: 1, insertion_code: ' ' },
                ResidueKey { seq_id: 2, insertion_code: ' ' },
                ResidueKey { seq_id: 2, insertion_code: 'A' },
            ],
            centers: vec![[0.0; 3]; 3],
            atoms: vec![vec![[0.0; 3]]; 3],
        }
    }

    #[test]
    fn round_trip_one_row_per_residue() {
        let p = pair();
        let text = write_predictions(&[(&p, &[0.25, 0.9, 0.5][..])]).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().nth(3).unwrap().starts_with("1ABC,A,P,2,A,0.500000,0"));
        let table = read_predictions(&text).unwrap();
        assert_eq!(table.len(), 3);
        let key = PredictionKey {
            pdb_id: "1ABC".into(),
            protein_chain: 'A',
            peptide_chain: 'P',
            res_seq: 2,
            icode: ' ',
        };
        assert_eq!(table[&key], PredictionRow { probability: 0.9, label: Some(1) });
    }

    #[test]
    fn misaligned_probabilities() {
        let p = pair();
        let err = write_predictions(&[(&p, &[0.5; 4][..])]).unwrap_err();
        assert!(matches!(err, StructError::Alignment { probabilities: 4, residues: 3, .. }));
    }

    #[test]
    fn validation_errors_name_the_row() {
        let head = HEADER.join(",");
        for (body, needle) in [
            ("X,A,P,1,,1.5,0", "outside"),
            ("X,A,P,one,,0.5,0", "res_seq"),
            ("X,A,P,1,,0.5,2", "label"),
            ("X,A,P,1,,0.5,0\nX,A,P,1,,0.6,0", "duplicate"),
        ] {
            match read_predictions(&format!("{head}\n{body}\n")).unwrap_err() {
                StructError::Validation { message, .. } => assert!(message.contains(needle), "{message}"),
                other => panic!("unexpected {other:?}"),
            }
        }
        assert!(read_predictions("a,b\n").is_err());
    }

    #[test]
    fn label_column_is_optional() {
        let text = format!("{}\nX,A,P,3,,0.125\n", HEADER[..6].join(","));
        let t = read_predictions(&text).unwrap();
        assert_eq!(t.values().next().unwrap().label, None);
    }
}
