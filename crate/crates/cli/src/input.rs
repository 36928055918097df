//! Resolving command-line inputs into complexes, modules and representations.

use std::fs;
use std::path::Path;

use l2ext_core::topology::{preset_complex, UnitaryRep};
use l2ext_core::{Error, FreeChainComplex, Result, VirtualModule};
use serde_json::Value;

/// A parsed positional input.
pub enum Input {
    Complex { label: String, complex: FreeChainComplex },
    Module(VirtualModule),
}

fn read_json(path: &str) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {path}: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

fn label_of(path: &str) -> String {
    Path::new(path).file_stem().and_then(|s| s.to_str()).unwrap_or(path).to_string()
}

/// Presets take precedence; anything else is read as a JSON file whose kind
/// is told apart by its `ranks` (complex) or `rank_src` (module) field.
pub fn load(arg: &str) -> Result<Input> {
    if let Ok(p) = preset_complex(arg) {
        return Ok(Input::Complex { label: p.name, complex: p.complex });
    }
    if !Path::new(arg).exists() {
        return Err(Error::Parse(format!("`{arg}` is neither a preset nor a readable file")));
    }
    let v = read_json(arg)?;
    if v.get("ranks").is_some() {
        Ok(Input::Complex { label: label_of(arg), complex: FreeChainComplex::from_json(&v)? })
    } else if v.get("rank_src").is_some() {
        Ok(Input::Module(VirtualModule::from_json(&v)?))
    } else {
        Err(Error::Parse(format!("{arg}: expected a complex (`ranks`) or a module (`rank_src`)")))
    }
}

pub fn load_complex(arg: &str) -> Result<(String, FreeChainComplex)> {
    match load(arg)? {
        Input::Complex { label, complex } => Ok((label, complex)),
        Input::Module(_) => Err(Error::Domain(format!("{arg} is a module; this command needs a complex"))),
    }
}

/// A preset name such as `trivial2` or `sign`, or a JSON file.
pub fn load_rep(arg: &str, num_vars: usize) -> Result<UnitaryRep> {
    match UnitaryRep::preset(arg, num_vars) {
        Ok(r) => Ok(r),
        Err(_) if Path::new(arg).exists() => UnitaryRep::from_json(&read_json(arg)?),
        Err(e) => Err(e),
    }
}
