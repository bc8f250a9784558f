//! Minimal flag parser: positional arguments followed by `--name value`
//! pairs, with typed accessors and strict rejection of unknown flags.

use std::collections::BTreeMap;

use crate::error::{CliError, CliResult};

pub struct Flags {
    positional: Vec<String>,
    named: BTreeMap<String, String>,
}

impl Flags {
    pub fn parse(args: &[String]) -> CliResult<Self> {
        let mut positional = Vec::new();
        let mut named = BTreeMap::new();
        let mut it = args.iter();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                let value = it
                    .next()
                    .ok_or_else(|| CliError::usage(format!("--{name} needs a value")))?;
                if named.insert(name.to_string(), value.clone()).is_some() {
                    return Err(CliError::usage(format!("--{name} given twice")));
                }
            } else {
                positional.push(arg.clone());
            }
        }
        Ok(Flags { positional, named })
    }

    pub fn positional(&mut self, what: &str) -> CliResult<String> {
        if self.positional.is_empty() {
            return Err(CliError::usage(format!("missing {what}")));
        }
        Ok(self.positional.remove(0))
    }

    pub fn take(&mut self, name: &str) -> Option<String> {
        self.named.remove(name)
    }

    pub fn take_f64(&mut self, name: &str) -> CliResult<Option<f64>> {
        match self.named.remove(name) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| CliError::usage(format!("--{name}: expected a number, got {raw:?}"))),
        }
    }

    pub fn require_f64(&mut self, name: &str) -> CliResult<f64> {
        self.take_f64(name)?
            .ok_or_else(|| CliError::usage(format!("--{name} is required")))
    }

    pub fn take_usize(&mut self, name: &str) -> CliResult<Option<usize>> {
        match self.named.remove(name) {
            None => Ok(None),
            Some(raw) => raw.parse::<usize>().map(Some).map_err(|_| {
                CliError::usage(format!(
                    "--{name}: expected a nonnegative integer, got {raw:?}"
                ))
            }),
        }
    }

    /// Comma-separated list of numbers.
    pub fn require_f64_list(&mut self, name: &str) -> CliResult<Vec<f64>> {
        let raw = self
            .named
            .remove(name)
            .ok_or_else(|| CliError::usage(format!("--{name} is required")))?;
        raw.split(',')
            .map(|piece| {
                piece.trim().parse::<f64>().map_err(|_| {
                    CliError::usage(format!("--{name}: expected numbers, got {piece:?}"))
                })
            })
            .collect()
    }

    /// Errors on anything left unconsumed.
    pub fn finish(self) -> CliResult<()> {
        if let Some(extra) = self.positional.first() {
            return Err(CliError::usage(format!("unexpected argument {extra:?}")));
        }
        if let Some(name) = self.named.keys().next() {
            return Err(CliError::usage(format!("unknown flag --{name}")));
        }
        Ok(())
    }
}
