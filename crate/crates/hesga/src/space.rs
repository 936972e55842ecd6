//! Binary-encoded hyperparameter search spaces.
//!
//! Each dimension occupies a fixed number of bits and decodes on a uniform
//! grid: a gene with unsigned value `u` means `(u + 1) × step`, so the decoded
//! range is exactly `[step, 2^bits × step]` and the all-zeros genome sits on
//! the lower bound of every dimension. Bits are most-significant first within
//! each gene, and genes are concatenated in dimension declaration order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::error::Error;
use crate::Result;

/// Default cap on exhaustive enumeration (2^20 genomes).
pub const DEFAULT_ENUMERATION_LIMIT: u64 = 1 << 20;

/// Relative tolerance for deciding whether a real value lies on the grid.
const GRID_REL_TOL: f64 = 1e-9;

/// How a decoded value is presented; the decoding rule itself is identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Integer,
    Real,
}

/// One search dimension: `bits` binary digits on a grid of spacing `step`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparamDef {
    pub name: String,
    pub bits: u32,
    pub step: f64,
    pub kind: ParamKind,
}

impl HyperparamDef {
    pub fn new(name: &str, bits: u32, step: f64, kind: ParamKind) -> Self {
        HyperparamDef {
            name: name.to_string(),
            bits,
            step,
            kind,
        }
    }

    /// Largest decodable value, `2^bits × step`.
    pub fn max_value(&self) -> f64 {
        self.grid_points() as f64 * self.step
    }

    /// Number of grid points, `2^bits`.
    pub fn grid_points(&self) -> u64 {
        1u64 << self.bits
    }
}

/// Fixed-length bit string over a search space, most-significant bit first.
///
/// The derived ordering is lexicographic over the bits, which for genomes of
/// equal length coincides with ascending unsigned-integer order; it is the
/// deterministic tie-breaker used throughout the crate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome {
    bits: Vec<bool>,
}

impl Genome {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Genome { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// The genome read as one unsigned integer (MSB first).
    pub fn to_unsigned(&self) -> u64 {
        bits_to_unsigned(&self.bits)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &bit in &self.bits {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => return Err(Error::CsvFormat(format!("invalid genome character `{c}`"))),
            }
        }
        Ok(Genome { bits })
    }
}

/// Decoded hyperparameter values, in dimension declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    entries: Vec<(String, f64)>,
}

impl Assignment {
    pub fn new(entries: Vec<(String, f64)>) -> Self {
        Assignment { entries }
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    /// Value of the named dimension, if present.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    /// Value of the dimension at `index` in declaration order.
    pub fn value_at(&self, index: usize) -> Option<f64> {
        self.entries.get(index).map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, value)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

/// Ordered list of dimensions with validated names and widths.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    dims: Vec<HyperparamDef>,
    total_bits: usize,
}

impl SearchSpace {
    /// Builds a space, rejecting empty dimension lists, duplicate names,
    /// zero widths, non-positive steps, and total widths beyond 63 bits.
    pub fn new(dims: Vec<HyperparamDef>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid_config(
                "dims",
                "at least one dimension is required",
            ));
        }
        let mut seen = HashSet::new();
        let mut total_bits = 0usize;
        for (i, def) in dims.iter().enumerate() {
            if def.name.is_empty() {
                return Err(Error::invalid_config(
                    &format!("dims[{i}].name"),
                    "must not be empty",
                ));
            }
            if !seen.insert(def.name.clone()) {
                return Err(Error::invalid_config(
                    "dims",
                    format!("duplicate dimension name `{}`", def.name),
                ));
            }
            if def.bits == 0 {
                return Err(Error::invalid_config(
                    &format!("dims[{i}].bits"),
                    "must be at least 1",
                ));
            }
            if !def.step.is_finite() || def.step <= 0.0 {
                return Err(Error::invalid_config(
                    &format!("dims[{i}].step"),
                    "must be a positive finite number",
                ));
            }
            total_bits += def.bits as usize;
        }
        if total_bits > 63 {
            return Err(Error::invalid_config(
                "dims",
                format!("total bit width {total_bits} exceeds the supported maximum of 63"),
            ));
        }
        Ok(SearchSpace { dims, total_bits })
    }

    pub fn dims(&self) -> &[HyperparamDef] {
        &self.dims
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    /// Number of distinct genomes, `2^total_bits`.
    pub fn cardinality(&self) -> u64 {
        1u64 << self.total_bits
    }

    /// Decodes a genome into named values, slicing genes in dims order.
    pub fn decode(&self, genome: &Genome) -> Result<Assignment> {
        if genome.len() != self.total_bits {
            return Err(Error::Encoding {
                expected: self.total_bits,
                got: genome.len(),
            });
        }
        let mut entries = Vec::with_capacity(self.dims.len());
        let mut offset = 0;
        for def in &self.dims {
            let width = def.bits as usize;
            let value = decode_gene(&genome.bits()[offset..offset + width], def)?;
            entries.push((def.name.clone(), value));
            offset += width;
        }
        Ok(Assignment { entries })
    }

    /// Encodes one value per dimension (declaration order) into a genome.
    pub fn encode(&self, values: &[f64]) -> Result<Genome> {
        if values.len() != self.dims.len() {
            return Err(Error::Encoding {
                expected: self.dims.len(),
                got: values.len(),
            });
        }
        let mut bits = Vec::with_capacity(self.total_bits);
        for (value, def) in values.iter().zip(&self.dims) {
            bits.extend(encode_value(*value, def)?);
        }
        Ok(Genome { bits })
    }

    /// Draws a genome with each bit independently uniform.
    pub fn random_genome<R: RngCore>(&self, rng: &mut R) -> Genome {
        let bits = (0..self.total_bits)
            .map(|_| (rng.next_u64() >> 63) == 1)
            .collect();
        Genome { bits }
    }

    /// The genome whose unsigned-integer reading equals `value`.
    pub fn genome_from_unsigned(&self, value: u64) -> Genome {
        debug_assert!(value < self.cardinality());
        let bits = (0..self.total_bits)
            .rev()
            .map(|i| (value >> i) & 1 == 1)
            .collect();
        Genome { bits }
    }

    /// Yields every genome in ascending unsigned-integer order, or fails if
    /// the space holds more than `limit` genomes.
    pub fn enumerate(&self, limit: u64) -> Result<impl Iterator<Item = Genome> + '_> {
        let cardinality = self.cardinality();
        if cardinality > limit {
            return Err(Error::EnumerationTooLarge {
                total_bits: self.total_bits,
                limit,
            });
        }
        Ok((0..cardinality).map(move |v| self.genome_from_unsigned(v)))
    }
}

/// Decodes one gene slice as `(unsigned + 1) × step`.
pub fn decode_gene(gene_bits: &[bool], def: &HyperparamDef) -> Result<f64> {
    if gene_bits.len() != def.bits as usize {
        return Err(Error::Encoding {
            expected: def.bits as usize,
            got: gene_bits.len(),
        });
    }
    Ok((bits_to_unsigned(gene_bits) + 1) as f64 * def.step)
}

/// Inverse of [`decode_gene`]; the value must sit on the dimension's grid.
pub fn encode_value(value: f64, def: &HyperparamDef) -> Result<Vec<bool>> {
    let steps = value / def.step; // grid index + 1
    let nearest = steps.round();
    let points = def.grid_points() as f64;
    let on_grid = (steps - nearest).abs() <= GRID_REL_TOL * steps.abs().max(1.0)
        && nearest >= 1.0
        && nearest <= points;
    if !on_grid {
        let below = steps.floor().clamp(1.0, points) * def.step;
        let above = steps.ceil().clamp(1.0, points) * def.step;
        return Err(Error::OffGrid {
            dim: def.name.clone(),
            value,
            below,
            above,
        });
    }
    let index = nearest as u64 - 1;
    Ok(gene_bits(index, def.bits))
}

fn bits_to_unsigned(bits: &[bool]) -> u64 {
    bits.iter().fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
}

fn gene_bits(index: u64, width: u32) -> Vec<bool> {
    (0..width).rev().map(|i| (index >> i) & 1 == 1).collect()
}
