use std::sync::Arc;

use crate::ccp::Procedures;
use crate::term::{ProcedureDef, Process, VarType};
use crate::vars::{RegistryError, VariableRegistry};

/// Declarations, procedures and a main process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub registry: VariableRegistry,
    pub procedures: Procedures,
    pub main: Arc<Process>,
}

impl Default for Program {
    fn default() -> Self {
        Program::new(Process::skip())
    }
}

impl Program {
    pub fn new(main: Arc<Process>) -> Self {
        Program {
            registry: VariableRegistry::new(),
            procedures: Procedures::new(),
            main,
        }
    }

    pub fn declare(&mut self, name: &str, ty: VarType) -> Result<&mut Self, RegistryError> {
        self.registry.declare(name, ty, Vec::new())?;
        Ok(self)
    }

    pub fn declare_array(
        &mut self,
        name: &str,
        ty: VarType,
        dims: Vec<usize>,
    ) -> Result<&mut Self, RegistryError> {
        self.registry.declare(name, ty, dims)?;
        Ok(self)
    }

    pub fn define(&mut self, def: ProcedureDef) -> &mut Self {
        self.procedures.insert(def.name.clone(), def);
        self
    }
}
