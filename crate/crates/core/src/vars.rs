//! Named logical variables and lexical environments.
//!
//! The registry describes scalars and arrays by name; each space gets fresh
//! store variables for them through [`VariableRegistry::materialize`].

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use thiserror::Error;

use crate::store::{Space, StoreError, VarId};
use crate::term::{Name, VarType};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: Name,
    pub ty: VarType,
    /// Empty for scalars.
    pub dims: Vec<usize>,
}

impl VarDecl {
    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegistryError {
    #[error("variable `{0}` declared twice")]
    Duplicate(Name),
    #[error("unknown variable `{0}`")]
    Unknown(Name),
    #[error("`{name}` has {expected} dimension(s), indexed with {found}")]
    Dimension {
        name: Name,
        expected: usize,
        found: usize,
    },
    #[error("index {index} out of bounds for `{name}` (dimension {dim})")]
    OutOfBounds { name: Name, index: i64, dim: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VariableRegistry {
    decls: Vec<VarDecl>,
    offsets: Vec<usize>,
    by_name: HashMap<Name, usize>,
    total: usize,
}

impl VariableRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(
        &mut self,
        name: &str,
        ty: VarType,
        dims: Vec<usize>,
    ) -> Result<(), RegistryError> {
        if self.by_name.contains_key(name) {
            return Err(RegistryError::Duplicate(name.into()));
        }
        let decl = VarDecl {
            name: name.into(),
            ty,
            dims,
        };
        self.by_name.insert(decl.name.clone(), self.decls.len());
        self.offsets.push(self.total);
        self.total += decl.len();
        self.decls.push(decl);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&VarDecl> {
        self.by_name.get(name).map(|&i| &self.decls[i])
    }

    pub fn decls(&self) -> &[VarDecl] {
        &self.decls
    }

    /// Total number of scalar elements.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Flat element index of `name[indices…]`.
    pub fn resolve(&self, name: &str, indices: &[i64]) -> Result<usize, RegistryError> {
        let &i = self
            .by_name
            .get(name)
            .ok_or_else(|| RegistryError::Unknown(name.into()))?;
        let decl = &self.decls[i];
        if decl.dims.len() != indices.len() {
            return Err(RegistryError::Dimension {
                name: decl.name.clone(),
                expected: decl.dims.len(),
                found: indices.len(),
            });
        }
        let mut flat = 0usize;
        for (&ix, &dim) in indices.iter().zip(&decl.dims) {
            if ix < 0 || ix as u64 >= dim as u64 {
                return Err(RegistryError::OutOfBounds {
                    name: decl.name.clone(),
                    index: ix,
                    dim,
                });
            }
            flat = flat * dim + ix as usize;
        }
        Ok(self.offsets[i] + flat)
    }

    /// Creates one store variable per element, in flat order.
    pub fn materialize(&self, space: &mut Space) -> Result<Vec<VarId>, StoreError> {
        let mut out = Vec::with_capacity(self.total);
        for d in &self.decls {
            for _ in 0..d.len() {
                out.push(new_var(space, d.ty)?);
            }
        }
        Ok(out)
    }

    /// Display names of all elements in flat order, e.g. `delta[2][5]`.
    pub fn element_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.total);
        for d in &self.decls {
            if d.dims.is_empty() {
                out.push(d.name.to_string());
                continue;
            }
            let mut idx = vec![0usize; d.dims.len()];
            for _ in 0..d.len() {
                let mut s = d.name.to_string();
                for i in &idx {
                    s.push_str(&format!("[{i}]"));
                }
                out.push(s);
                for k in (0..idx.len()).rev() {
                    idx[k] += 1;
                    if idx[k] < d.dims[k] {
                        break;
                    }
                    idx[k] = 0;
                }
            }
        }
        out
    }
}

pub(crate) fn new_var(space: &mut Space, ty: VarType) -> Result<VarId, StoreError> {
    match ty {
        VarType::Int { lo, hi } => space.new_int_var(lo, hi),
        VarType::Bool => Ok(space.new_bool_var()),
        VarType::Set { lo, hi } => {
            if lo > hi {
                return Err(StoreError::Bounds { lo, hi });
            }
            let lo = i32::try_from(lo).map_err(|_| StoreError::Bounds { lo, hi })?;
            let hi = i32::try_from(hi).map_err(|_| StoreError::Bounds { lo: lo as i64, hi })?;
            space.new_set_var(BTreeSet::new(), (lo..=hi).collect())
        }
    }
}

/// Space-independent variable identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    /// Flat index into the registry.
    Global(u32),
    /// Engine-wide id of a `local` declaration.
    Local(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    Int(i64),
    Var(VarKey),
}

#[derive(Debug)]
struct Frame {
    name: Name,
    value: Binding,
    next: Env,
}

/// Persistent singly linked environment; cloning is cheap.
#[derive(Clone, Debug, Default)]
pub struct Env(Option<Arc<Frame>>);

impl Env {
    pub fn new() -> Self {
        Env(None)
    }

    pub fn bind(&self, name: Name, value: Binding) -> Env {
        Env(Some(Arc::new(Frame {
            name,
            value,
            next: self.clone(),
        })))
    }

    pub fn get(&self, name: &str) -> Option<Binding> {
        let mut cur = &self.0;
        while let Some(f) = cur {
            if &*f.name == name {
                return Some(f.value);
            }
            cur = &f.next.0;
        }
        None
    }
}
