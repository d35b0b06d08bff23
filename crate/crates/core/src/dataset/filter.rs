use serde::Serialize;

use super::PROTEIN_PAD;
use crate::structio::{Complex, Method};

/// Length and resolution rules for peptide/protein chain pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterRules {
    /// Peptides must be strictly longer than this.
    pub peptide_min_exclusive: usize,
    pub peptide_max: usize,
    /// Proteins must be strictly shorter than this.
    pub protein_max_exclusive: usize,
    /// Applied to X-ray entries with a known resolution.
    pub max_xray_resolution: f64,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            peptide_min_exclusive: 10,
            peptide_max: 50,
            protein_max_exclusive: PROTEIN_PAD,
            max_xray_resolution: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidatePair {
    /// Index into the complex list passed to [`filter_complexes`].
    pub complex: usize,
    pub peptide_chain: char,
    pub protein_chain: char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionRule {
    Resolution,
    PeptideTooShort,
    PeptideTooLong,
    ProteinTooLong,
}

impl ExclusionRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExclusionRule::Resolution => "resolution",
            ExclusionRule::PeptideTooShort => "peptide_too_short",
            ExclusionRule::PeptideTooLong => "peptide_too_long",
            ExclusionRule::ProteinTooLong => "protein_too_long",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exclusion {
    pub pdb_id: String,
    /// `None` when the whole entry was rejected.
    pub chains: Option<(char, char)>,
    pub rule: ExclusionRule,
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub pairs: Vec<CandidatePair>,
    pub exclusions: Vec<Exclusion>,
}

impl FilterOutcome {
    pub fn exclusion_counts(&self) -> std::collections::BTreeMap<ExclusionRule, usize> {
        let mut m = std::collections::BTreeMap::new();
        for e in &self.exclusions {
            *m.entry(e.rule).or_insert(0) += 1;
        }
        m
    }
}

/// Emits every ordered (peptide, protein) chain combination that passes the
/// rules. Rejected combinations are recorded with the first rule they fail.
pub fn filter_complexes(complexes: &[Complex], rules: &FilterRules) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for (ci, complex) in complexes.iter().enumerate() {
        if complex.method == Some(Method::Xray) {
            if let Some(res) = complex.resolution {
                if res > rules.max_xray_resolution {
                    log::debug!("{}: excluded, resolution {res} Å", complex.pdb_id);
                    out.exclusions.push(Exclusion {
                        pdb_id: complex.pdb_id.clone(),
                        chains: None,
                        rule: ExclusionRule::Resolution,
                    });
                    continue;
                }
            }
        }
        for pep in &complex.chains {
            for prot in &complex.chains {
                if pep.id == prot.id {
                    continue;
                }
                let rule = if pep.len() <= rules.peptide_min_exclusive {
                    Some(ExclusionRule::PeptideTooShort)
                } else if pep.len() > rules.peptide_max {
                    Some(ExclusionRule::PeptideTooLong)
                } else if prot.is_empty() || prot.len() >= rules.protein_max_exclusive {
                    Some(ExclusionRule::ProteinTooLong)
                } else {
                    None
                };
                match rule {
                    Some(rule) => {
                        log::debug!("{} {}/{}: excluded by {}", complex.pdb_id, pep.id, prot.id, rule.as_str());
                        out.exclusions.push(Exclusion {
                            pdb_id: complex.pdb_id.clone(),
                            chains: Some((pep.id, prot.id)),
                            rule,
                        });
                    }
                    None => out.pairs.push(CandidatePair {
                        complex: ci,
                        peptide_chain: pep.id,
                        protein_chain: prot.id,
                    }),
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structio::{Atom, Chain, Residue};

    fn chain(id: char, n: usize) -> Chain {
        let residues = (0..n)
            .map(|i| {
                Residue::new(
                    i as i32 + 1,
                    ' ',
                    "ALA",
                    vec![Atom {
                        serial: i as i64,
                        name: "CA".into(),
                        element: "C".into(),
                        coord: [i as f64 * 3.8, 0.0, 0.0],
                        occupancy: 1.0,
                        altloc: ' ',
                        is_hetero: false,
                    }],
                )
            })
            .collect();
        Chain::new(id, residues)
    }

    fn complex(chains: Vec<Chain>, method: Option<Method>, resolution: Option<f64>) -> Complex {
        Complex {
            pdb_id: "TEST".into(),
            chains,
            resolution,
            method,
        }
    }

    #[test]
    fn peptide_and_protein() {
        let c = complex(vec![chain('P', 12), chain('A', 300)], Some(Method::Xray), Some(2.0));
        let out = filter_complexes(&[c], &FilterRules::default());
        assert_eq!(
            out.pairs,
            vec![CandidatePair {
                complex: 0,
                peptide_chain: 'P',
                protein_chain: 'A'
            }]
        );
        assert_eq!(out.exclusions.len(), 1);
        assert_eq!(out.exclusions[0].rule, ExclusionRule::PeptideTooLong);
    }

    #[test]
    fn short_peptide_excluded() {
        let c = complex(vec![chain('P', 8), chain('A', 300)], None, None);
        let out = filter_complexes(&[c], &FilterRules::default());
        assert!(out.pairs.is_empty());
        assert!(out.exclusions.iter().any(|e| e.rule == ExclusionRule::PeptideTooShort));
        let c = complex(vec![chain('P', 10), chain('A', 300)], None, None);
        assert!(filter_complexes(&[c], &FilterRules::default()).pairs.is_empty());
        let c = complex(vec![chain('P', 11), chain('A', 300)], None, None);
        assert_eq!(filter_complexes(&[c], &FilterRules::default()).pairs.len(), 1);
    }

    #[test]
    fn long_protein_excluded() {
        let c = complex(vec![chain('P', 20), chain('A', 600)], None, None);
        let out = filter_complexes(&[c], &FilterRules::default());
        assert!(out.pairs.is_empty());
        assert_eq!(out.exclusion_counts()[&ExclusionRule::ProteinTooLong], 1);
        let c = complex(vec![chain('P', 20), chain('A', 500)], None, None);
        assert!(filter_complexes(&[c], &FilterRules::default()).pairs.is_empty());
        let c = complex(vec![chain('P', 50), chain('A', 499)], None, None);
        assert_eq!(filter_complexes(&[c], &FilterRules::default()).pairs.len(), 1);
    }

    #[test]
    fn resolution_rule_applies_to_xray_only() {
        let bad = complex(vec![chain('P', 20), chain('A', 100)], Some(Method::Xray), Some(3.1));
        let nmr = complex(vec![chain('P', 20), chain('A', 100)], Some(Method::Nmr), Some(3.1));
        let out = filter_complexes(&[bad, nmr], &FilterRules::default());
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].complex, 1);
        assert_eq!(out.exclusion_counts()[&ExclusionRule::Resolution], 1);
    }

    #[test]
    fn two_peptides_both_directions() {
        let c = complex(vec![chain('A', 16), chain('B', 16)], Some(Method::Nmr), None);
        assert_eq!(filter_complexes(&[c], &FilterRules::default()).pairs.len(), 2);
    }
}
