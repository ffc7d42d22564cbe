//! Brute-force Kripke semantics for the belief logic, used only as a test
//! oracle for the entailment engine.
//!
//! Accessibility is an equivalence relation stored as a partition (one class
//! id per world), so every model is S5 by construction. Each world carries
//! its own test history; `StatB` is evaluated by composing p-values over
//! that history.

use thiserror::Error;

use crate::logic::{AtomicFormula, Formula, TestHistory};
use crate::specs::{compose_pvs, supports};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("atom `{0}` is not in the model's atom universe")]
    UnknownAtom(String),
    #[error("model enumeration is limited to {max} worlds, asked for {asked}")]
    LimitExceeded { max: usize, asked: usize },
    #[error("malformed model: {0}")]
    Malformed(&'static str),
}

pub const MAX_ENUMERATED_WORLDS: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    pub atoms: Vec<AtomicFormula>,
    /// Equivalence class of each world.
    pub class_of: Vec<usize>,
    /// `valuation[w][i]` is the truth of `atoms[i]` at world `w`.
    pub valuation: Vec<Vec<bool>>,
    pub histories: Vec<TestHistory>,
}

impl KripkeModel {
    pub fn new(
        atoms: Vec<AtomicFormula>,
        class_of: Vec<usize>,
        valuation: Vec<Vec<bool>>,
        histories: Vec<TestHistory>,
    ) -> Result<Self, OracleError> {
        let n = class_of.len();
        if n == 0 {
            return Err(OracleError::Malformed("no worlds"));
        }
        if valuation.len() != n || histories.len() != n {
            return Err(OracleError::Malformed("per-world data has the wrong length"));
        }
        if valuation.iter().any(|v| v.len() != atoms.len()) {
            return Err(OracleError::Malformed("valuation does not cover the atoms"));
        }
        Ok(KripkeModel {
            atoms,
            class_of,
            valuation,
            histories,
        })
    }

    pub fn world_count(&self) -> usize {
        self.class_of.len()
    }

    pub fn accessible(&self, w: usize, v: usize) -> bool {
        self.class_of[w] == self.class_of[v]
    }

    fn class(&self, w: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.class_of[w];
        (0..self.world_count()).filter(move |&v| self.class_of[v] == c)
    }

    pub fn satisfies(&self, w: usize, f: &Formula) -> Result<bool, OracleError> {
        Ok(match f {
            Formula::Atom(a) => {
                let i = self
                    .atoms
                    .iter()
                    .position(|x| x == a)
                    .ok_or_else(|| OracleError::UnknownAtom(Formula::Atom(a.clone()).to_string()))?;
                self.valuation[w][i]
            }
            Formula::Not(g) => !self.satisfies(w, g)?,
            Formula::Conj(gs) => {
                for g in gs {
                    if !self.satisfies(w, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Disj(gs) => {
                for g in gs {
                    if self.satisfies(w, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Know(g) => {
                for v in self.class(w) {
                    if !self.satisfies(v, g)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Possible(g) => {
                for v in self.class(w) {
                    if self.satisfies(v, g)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::StatB(claimed, h) => {
                // atoms of h must still be known to the model
                for a in h.atoms() {
                    if !self.atoms.contains(a) {
                        return Err(OracleError::UnknownAtom(Formula::Atom(a.clone()).to_string()));
                    }
                }
                match compose_pvs(h, &self.histories[w]) {
                    Ok(derived) => supports(&derived, claimed),
                    Err(_) => false,
                }
            }
        })
    }
}

/// All set partitions of `n` elements as restricted growth strings.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for c in 0..=next {
            prefix.push(c);
            go(prefix, n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(&mut Vec::new(), n, &mut out);
    }
    out
}

/// Every model with exactly `worlds` worlds. An empty pool means every world
/// has the empty history.
pub fn enumerate_models_exact<'a>(
    atoms: &'a [AtomicFormula],
    worlds: usize,
    history_pool: &'a [TestHistory],
) -> Result<impl Iterator<Item = KripkeModel> + 'a, OracleError> {
    if worlds > MAX_ENUMERATED_WORLDS {
        return Err(OracleError::LimitExceeded {
            max: MAX_ENUMERATED_WORLDS,
            asked: worlds,
        });
    }
    let pool: Vec<TestHistory> = if history_pool.is_empty() {
        vec![TestHistory::empty()]
    } else {
        history_pool.to_vec()
    };
    let a = atoms.len();
    let valuations: u64 = 1u64 << (a * worlds);
    let hist_choices = (pool.len() as u64).pow(worlds as u32);
    let parts = partitions(worlds);
    Ok(parts.into_iter().flat_map(move |class_of| {
        let pool = pool.clone();
        (0..valuations).flat_map(move |bits| {
            let class_of = class_of.clone();
            let pool = pool.clone();
            (0..hist_choices).map(move |mut hc| {
                let valuation = (0..worlds)
                    .map(|w| (0..a).map(|i| bits >> (w * a + i) & 1 == 1).collect())
                    .collect();
                let histories = (0..worlds)
                    .map(|_| {
                        let h = pool[(hc % pool.len() as u64) as usize].clone();
                        hc /= pool.len() as u64;
                        h
                    })
                    .collect();
                KripkeModel {
                    atoms: atoms.to_vec(),
                    class_of: class_of.clone(),
                    valuation,
                    histories,
                }
            })
        })
    }))
}

/// Every model with between one and `max_worlds` worlds.
pub fn enumerate_models<'a>(
    atoms: &'a [AtomicFormula],
    max_worlds: usize,
    history_pool: &'a [TestHistory],
) -> Result<impl Iterator<Item = KripkeModel> + 'a, OracleError> {
    if max_worlds > MAX_ENUMERATED_WORLDS {
        return Err(OracleError::LimitExceeded {
            max: MAX_ENUMERATED_WORLDS,
            asked: max_worlds,
        });
    }
    let mut iters = Vec::new();
    for n in 1..=max_worlds {
        iters.push(enumerate_models_exact(atoms, n, history_pool)?);
    }
    Ok(iters.into_iter().flatten())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{HistoryEntry, PExpr, PValueRecord, Pred, Term};

    fn atom(n: &str) -> AtomicFormula {
        AtomicFormula::new(Pred::IsNormal, vec![Term::name(n)]).unwrap()
    }

    #[test]
    fn singleton_knows_its_atoms() {
        let m = KripkeModel::new(vec![atom("a")], vec![0], vec![vec![true]], vec![TestHistory::empty()])
            .unwrap();
        assert!(m.satisfies(0, &Formula::know(Formula::Atom(atom("a")))).unwrap());
    }

    #[test]
    fn box_and_diamond() {
        let m = KripkeModel::new(
            vec![atom("a")],
            vec![0, 0],
            vec![vec![true], vec![false]],
            vec![TestHistory::empty(), TestHistory::empty()],
        )
        .unwrap();
        let a = Formula::Atom(atom("a"));
        assert!(!m.satisfies(0, &Formula::know(a.clone())).unwrap());
        assert!(m.satisfies(0, &Formula::possible(a)).unwrap());
    }

    #[test]
    fn statb_from_history() {
        let h = Formula::Atom(atom("a"));
        let st = TestHistory::from_entries(vec![HistoryEntry::new(
            "t",
            &h,
            PValueRecord::exact(PExpr::ratio(3, 100)).unwrap(),
        )]);
        let m = KripkeModel::new(vec![atom("a")], vec![0], vec![vec![false]], vec![st]).unwrap();
        let goal = Formula::stat_b(PValueRecord::at_most(PExpr::ratio(1, 20)).unwrap(), h).unwrap();
        assert!(m.satisfies(0, &goal).unwrap());
    }

    #[test]
    fn unknown_atom() {
        let m = KripkeModel::new(vec![], vec![0], vec![vec![]], vec![TestHistory::empty()]).unwrap();
        assert!(matches!(
            m.satisfies(0, &Formula::Atom(atom("a"))),
            Err(OracleError::UnknownAtom(_))
        ));
    }

    #[test]
    fn model_counts() {
        let one = [atom("a")];
        assert_eq!(enumerate_models(&one, 1, &[]).unwrap().count(), 2);
        // two partitions of two worlds times 2^2 valuations
        assert_eq!(enumerate_models_exact(&one, 2, &[]).unwrap().count(), 8);
        assert_eq!(enumerate_models(&one, 2, &[]).unwrap().count(), 10);
        assert_eq!(enumerate_models(&[], 1, &[]).unwrap().count(), 1);
        assert!(matches!(
            enumerate_models(&one, 5, &[]),
            Err(OracleError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=4).map(|n| partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15]);
    }
}
