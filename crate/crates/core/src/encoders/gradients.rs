use std::collections::BTreeMap;

use crate::tensor::{add_assign, Real};

/// Gradient storage for one tensor. Input-embedding gradients touch only
/// the rows of tokens present in the batch, so they are kept sparse.
#[derive(Clone, Debug, PartialEq)]
pub enum GradData<T> {
    Dense(Vec<T>),
    Rows {
        cols: usize,
        rows: BTreeMap<usize, Vec<T>>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradTensor<T> {
    pub name: &'static str,
    pub data: GradData<T>,
}

/// One gradient per trainable tensor, in the encoder's canonical order.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T> {
    pub tensors: Vec<GradTensor<T>>,
}

impl<T: Real> GradData<T> {
    /// Element `idx` of the flattened tensor.
    pub fn get(&self, idx: usize) -> T {
        match self {
            GradData::Dense(v) => v[idx],
            GradData::Rows { cols, rows } => rows
                .get(&(idx / cols))
                .map_or(T::zero(), |r| r[idx % cols]),
        }
    }

    pub fn to_dense(&self, len: usize) -> Vec<T> {
        match self {
            GradData::Dense(v) => v.clone(),
            GradData::Rows { cols, rows } => {
                let mut out = vec![T::zero(); len];
                for (&r, vals) in rows {
                    out[r * cols..(r + 1) * cols].copy_from_slice(vals);
                }
                out
            }
        }
    }

    pub(crate) fn dense_mut(&mut self) -> &mut [T] {
        match self {
            GradData::Dense(v) => v,
            GradData::Rows { .. } => panic!("dense access to a sparse gradient"),
        }
    }

    pub(crate) fn add_row(&mut self, row: usize, values: &[T]) {
        match self {
            GradData::Rows { cols, rows } => {
                let entry = rows.entry(row).or_insert_with(|| vec![T::zero(); *cols]);
                add_assign(entry, values);
            }
            GradData::Dense(_) => panic!("row access to a dense gradient"),
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = &T> + '_> {
        match self {
            GradData::Dense(v) => Box::new(v.iter()),
            GradData::Rows { rows, .. } => Box::new(rows.values().flatten()),
        }
    }

    fn add_assign(&mut self, other: &GradData<T>) {
        match (self, other) {
            (GradData::Dense(a), GradData::Dense(b)) => add_assign(a, b),
            (this @ GradData::Rows { .. }, GradData::Rows { rows, .. }) => {
                for (&r, vals) in rows {
                    this.add_row(r, vals);
                }
            }
            _ => panic!("mismatched gradient layouts"),
        }
    }

    fn scale(&mut self, s: T) {
        match self {
            GradData::Dense(v) => v.iter_mut().for_each(|x| *x = *x * s),
            GradData::Rows { rows, .. } => rows
                .values_mut()
                .flatten()
                .for_each(|x| *x = *x * s),
        }
    }
}

impl<T: Real> Gradients<T> {
    pub fn get(&self, name: &str) -> Option<&GradData<T>> {
        self.tensors.iter().find(|g| g.name == name).map(|g| &g.data)
    }

    pub(crate) fn get_mut(&mut self, name: &str) -> &mut GradData<T> {
        &mut self
            .tensors
            .iter_mut()
            .find(|g| g.name == name)
            .unwrap_or_else(|| panic!("no gradient tensor `{name}`"))
            .data
    }

    /// Element-wise sum; both sides must come from the same encoder.
    pub fn accumulate(&mut self, other: &Gradients<T>) {
        assert_eq!(self.tensors.len(), other.tensors.len());
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            assert_eq!(a.name, b.name);
            a.data.add_assign(&b.data);
        }
    }

    pub fn scale(&mut self, s: T) {
        self.tensors.iter_mut().for_each(|g| g.data.scale(s));
    }

    pub fn is_zero(&self) -> bool {
        self.tensors
            .iter()
            .all(|g| g.data.values().all(|x| *x == T::zero()))
    }

    pub fn all_finite(&self) -> bool {
        self.tensors
            .iter()
            .all(|g| g.data.values().all(|x| x.is_finite()))
    }

    /// Largest absolute entry, for logging.
    pub fn max_abs(&self) -> T {
        self.tensors
            .iter()
            .flat_map(|g| g.data.values())
            .fold(T::zero(), |m, x| m.max(x.abs()))
    }
}
