use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::CircuitIR;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParamError {
    #[error("symbol `{name}` is already {existing}, cannot redefine it as {requested}")]
    Conflict {
        name: String,
        existing: &'static str,
        requested: &'static str,
    },
    #[error("fixed symbol `{0}` cannot change")]
    Fixed(String),
    #[error("unknown symbol `{0}`")]
    Unknown(String),
}

fn flavor(trainable: bool) -> &'static str {
    if trainable {
        "trainable"
    } else {
        "fixed"
    }
}

/// Symbol → value map with a trainable flag per symbol. Entries keep their
/// insertion order, which is the coordinate order of SPSA perturbations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<f64>,
    trainable: Vec<bool>,
    index: BTreeMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a symbol. Re-inserting an existing symbol with the same
    /// trainability is a no-op that keeps the old value, except that a fixed
    /// symbol with a different value is a conflict.
    pub fn insert(&mut self, name: &str, value: f64, trainable: bool) -> Result<usize, ParamError> {
        if let Some(&i) = self.index.get(name) {
            if self.trainable[i] != trainable {
                return Err(ParamError::Conflict {
                    name: name.into(),
                    existing: flavor(self.trainable[i]),
                    requested: flavor(trainable),
                });
            }
            if !trainable && self.values[i].to_bits() != value.to_bits() {
                return Err(ParamError::Fixed(name.into()));
            }
            return Ok(i);
        }
        let i = self.names.len();
        self.names.push(name.into());
        self.values.push(value);
        self.trainable.push(trainable);
        self.index.insert(name.into(), i);
        Ok(i)
    }

    /// Adds the fixed symbols of `circuit` with their pre-bound values, and
    /// its trainable symbols with values drawn from `init` (called only for
    /// symbols not yet present).
    pub fn absorb(
        &mut self,
        circuit: &CircuitIR,
        mut init: impl FnMut() -> f64,
    ) -> Result<(), ParamError> {
        for s in &circuit.symbols {
            if s.trainable {
                if !self.index.contains_key(&s.name) {
                    self.insert(&s.name, init(), true)?;
                } else {
                    self.insert(&s.name, 0.0, true)?;
                }
            } else {
                self.insert(&s.name, s.value.unwrap_or(0.0), false)?;
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index.get(name).map(|&i| self.values[i])
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let i = self
            .index_of(name)
            .ok_or_else(|| ParamError::Unknown(name.into()))?;
        if !self.trainable[i] {
            return Err(ParamError::Fixed(name.into()));
        }
        self.values[i] = value;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_trainable(&self, i: usize) -> bool {
        self.trainable[i]
    }

    /// Positions of trainable symbols, in insertion order.
    pub fn trainable_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.trainable[i]).collect()
    }

    pub fn n_trainable(&self) -> usize {
        self.trainable.iter().filter(|t| **t).count()
    }

    /// Copy with trainable values replaced; fixed values are kept.
    pub fn with_trainable(&self, f: impl Fn(usize, f64) -> f64) -> ParamStore {
        let mut out = self.clone();
        for i in 0..out.len() {
            if out.trainable[i] {
                out.values[i] = f(i, out.values[i]);
            }
        }
        out
    }

    /// Iterates `(name, value, trainable)`.
    pub fn iter(&self) -> impl Iterator<Item = (&str, f64, bool)> {
        self.names
            .iter()
            .zip(&self.values)
            .zip(&self.trainable)
            .map(|((n, v), t)| (n.as_str(), *v, *t))
    }
}
