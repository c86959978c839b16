use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::ground::GroundProgram;
use crate::error::{Error, Result};
use crate::program::HybridProgram;

/// An atomic box of one instance's domain with its probability mass.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub bounds: Vec<(f64, f64)>,
    pub probability: f64,
}

/// Cells per instance of a ground program, indexed like its instances.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DomainPartition {
    pub cells: Vec<Vec<Cell>>,
}

impl DomainPartition {
    pub fn total_probability(&self, instance: usize) -> f64 {
        self.cells[instance].iter().map(|c| c.probability).sum()
    }
}

/// Splits the support of every instance at its density breakpoints and at
/// every builtin constant that mentions it.
pub fn partition_domains(hp: &HybridProgram, gp: &GroundProgram) -> Result<DomainPartition> {
    let mut constants: Vec<Vec<Vec<f64>>> = gp
        .instances
        .iter()
        .map(|inst| vec![Vec::new(); hp.attributes[&inst.attribute].dimension()])
        .collect();
    for b in &gp.builtins {
        for c in [b.lo, b.hi] {
            if c.is_nan() {
                return Err(Error::Contract(format!("`{}` compares against NaN", b.atom)));
            }
            if c.is_finite() {
                constants[b.instance][b.axis].push(c);
            }
        }
    }
    let mut cells = Vec::with_capacity(gp.instances.len());
    for (inst, extra) in gp.instances.iter().zip(constants) {
        let attr = &hp.attributes[&inst.attribute];
        let grids: Vec<Vec<f64>> = extra
            .into_iter()
            .enumerate()
            .map(|(axis, extra)| {
                let (lo, hi) = attr.support[axis];
                let mut grid: Vec<f64> = attr
                    .density
                    .breakpoints(axis)
                    .into_iter()
                    .chain(extra)
                    .chain([lo, hi])
                    .filter(|&c| lo <= c && c <= hi)
                    .collect();
                grid.sort_by(f64::total_cmp);
                grid.dedup();
                grid
            })
            .collect();
        let counts: Vec<usize> = grids.iter().map(|g| g.len() - 1).collect();
        let total: usize = counts.iter().product();
        let mut list = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut bounds = Vec::with_capacity(grids.len());
            for (grid, &n) in grids.iter().zip(&counts) {
                let j = idx % n;
                idx /= n;
                bounds.push((grid[j], grid[j + 1]));
            }
            let probability = attr.density.probability(&bounds)?;
            list.push(Cell { bounds, probability });
        }
        cells.push(list);
    }
    Ok(DomainPartition { cells })
}
