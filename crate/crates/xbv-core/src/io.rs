//! File formats shared by the command-line tools.
//!
//! * Grid fields: CSV with one row per node,
//!   `re_z,im_z,weight,re_f0,im_f0[,re_f1,im_f1,...]`, header mandatory.
//! * Domains: JSON `{kind, radius?, center?, boundary?: [[x, y], ...], samples?}`.
//! * Tensor-grid scalars: CSV `x1,...,xn,f` over a full tensor product grid.
//! * Linear structures: JSON `{n, A: [[re, im], ...], B: [[re, im], ...]}`,
//!   row-major `n × n` coefficient matrices.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::domain_grid::{DomainKind, DomainSpec, Grid, GridField, DEFAULT_BOUNDARY_SAMPLES};
use crate::error::{Error, Result};
use crate::structures::{j_from_ab, CMat, LinearStructure};
use crate::whitney::TensorField;
use crate::C64;

/// Relative tolerance used to match CSV nodes with lattice cell centers.
pub const NODE_TOL: f64 = 1e-9;

/// JSON form of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainDescription {
    /// `unit_disk`, `disk`, `upper_half_disk`, `lower_half_disk` or `boundary`.
    pub kind: String,
    /// Radius of disks and half-disks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Center of a disk as `[x, y]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    /// Polygon vertices of a sampled boundary.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<[f64; 2]>>,
    /// Boundary samples of analytic shapes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

impl DomainDescription {
    /// Parses the JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the domain.
    pub fn build(&self) -> Result<DomainSpec<f64>> {
        let m = self.samples.unwrap_or(DEFAULT_BOUNDARY_SAMPLES);
        let radius = || {
            self.radius
                .filter(|r| *r > 0.0)
                .ok_or_else(|| Error::InvalidInput(format!("domain kind {} needs a positive radius", self.kind)))
        };
        match self.kind.as_str() {
            "unit_disk" => {
                let mut d = DomainSpec::disk(C64::new(0.0, 0.0), 1.0, m);
                d.kind = DomainKind::UnitDisk;
                Ok(d)
            }
            "disk" => {
                let c = self.center.unwrap_or([0.0, 0.0]);
                Ok(DomainSpec::disk(C64::new(c[0], c[1]), radius()?, m))
            }
            "upper_half_disk" => Ok(DomainSpec::upper_half_disk(radius()?, m)),
            "lower_half_disk" => Ok(DomainSpec::lower_half_disk(radius()?, m)),
            "boundary" => {
                let pts = self
                    .boundary
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("domain kind boundary needs vertices".into()))?;
                DomainSpec::from_boundary(pts.iter().map(|p| C64::new(p[0], p[1])).collect())
            }
            other => Err(Error::InvalidInput(format!("unknown domain kind {other}"))),
        }
    }
}

/// Writes `field` in the grid CSV format.
pub fn write_field_csv<W: Write>(field: &GridField<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["re_z".to_string(), "im_z".to_string(), "weight".to_string()];
    for c in 0..field.dim {
        header.push(format!("re_f{c}"));
        header.push(format!("im_f{c}"));
    }
    w.write_record(&header)?;
    let grid = &field.grid;
    for k in 0..grid.len() {
        let z = grid.nodes[k];
        let mut row = vec![z.re.to_string(), z.im.to_string(), grid.weights[k].to_string()];
        for c in 0..field.dim {
            let v = field.at(k, c);
            row.push(v.re.to_string());
            row.push(v.im.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a grid CSV: node positions and component values.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRows {
    /// Node positions.
    pub nodes: Vec<C64>,
    /// Number of components.
    pub dim: usize,
    /// Node-major component values.
    pub values: Vec<C64>,
}

impl FieldRows {
    /// The lattice spacing: the smallest gap between distinct node abscissae.
    pub fn spacing(&self) -> Result<f64> {
        let mut xs: Vec<f64> = self.nodes.iter().map(|z| z.re).collect();
        xs.sort_by(f64::total_cmp);
        let span = xs.last().copied().unwrap_or(0.0) - xs.first().copied().unwrap_or(0.0);
        let h = xs.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > NODE_TOL * span.max(1.0)).fold(f64::INFINITY, f64::min);
        if h.is_finite() {
            Ok(h)
        } else {
            Err(Error::InvalidInput("grid CSV needs at least two node columns".into()))
        }
    }

    /// Places the rows on the lattice of `domain` at the inferred spacing.
    /// Every lattice node must appear exactly once.
    pub fn into_field(self, domain: DomainSpec<f64>) -> Result<GridField<f64>> {
        let h = self.spacing()?;
        let grid = Arc::new(Grid::build(domain, h)?);
        self.on_grid(&grid)
    }

    /// Places the rows on the nodes of an existing grid, so that several
    /// files can share one grid.
    pub fn on_grid(self, grid: &Arc<Grid<f64>>) -> Result<GridField<f64>> {
        let h = grid.h;
        if grid.len() != self.nodes.len() {
            return Err(Error::InvalidInput(format!(
                "{} CSV rows for {} lattice nodes at spacing {h}",
                self.nodes.len(),
                grid.len()
            )));
        }
        let mut values = vec![Complex::new(0.0, 0.0); grid.len() * self.dim];
        let mut seen = vec![false; grid.len()];
        for (r, z) in self.nodes.iter().enumerate() {
            let (i, j) = grid.cell_of(*z);
            let k = grid
                .node_at(i, j)
                .filter(|&k| (grid.nodes[k] - z).norm() <= NODE_TOL.max(1e-6 * h))
                .ok_or_else(|| Error::InvalidInput(format!("CSV row {r} at {z} is not a lattice node")))?;
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidInput(format!("CSV node {z} appears twice")));
            }
            values[k * self.dim..(k + 1) * self.dim].copy_from_slice(&self.values[r * self.dim..(r + 1) * self.dim]);
        }
        Ok(GridField::from_values_vec(grid, self.dim, values))
    }
}

/// Reads the grid CSV format.
pub fn read_field_rows<R: Read>(input: R) -> Result<FieldRows> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    let cols = header.len();
    if cols < 5 || (cols - 3) % 2 != 0 || &header[0] != "re_z" || &header[1] != "im_z" || &header[2] != "weight" {
        return Err(Error::InvalidInput(
            "grid CSV header must be re_z,im_z,weight,re_f0,im_f0[,re_f1,im_f1,...]".into(),
        ));
    }
    let dim = (cols - 3) / 2;
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |c: usize| -> Result<f64> {
            rec[c].trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("row {r}, column {c}: {e}")))
        };
        nodes.push(C64::new(num(0)?, num(1)?));
        for c in 0..dim {
            values.push(C64::new(num(3 + 2 * c)?, num(4 + 2 * c)?));
        }
    }
    Ok(FieldRows { nodes, dim, values })
}

/// Reads a grid CSV and places it on the lattice of `domain`.
pub fn read_field_csv<R: Read>(input: R, domain: DomainSpec<f64>) -> Result<GridField<f64>> {
    read_field_rows(input)?.into_field(domain)
}

/// Reads the tensor-grid CSV `x1,...,xn,f`; row order is free.
pub fn read_tensor_csv<R: Read>(input: R, n: usize) -> Result<TensorField<f64>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.len() != n + 1 {
        return Err(Error::InvalidInput(format!("tensor CSV needs {} columns for n = {n}", n + 1)));
    }
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = (0..=n)
            .map(|c| rec[c].trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("row {r}, column {c}: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let mut v: Vec<f64> = rows.iter().map(|r| r[a]).collect();
            v.sort_by(f64::total_cmp);
            v.dedup_by(|x, y| (*x - *y).abs() <= NODE_TOL * (1.0 + y.abs()));
            v
        })
        .collect();
    let shape: Vec<usize> = axes.iter().map(Vec::len).collect();
    let len: usize = shape.iter().product();
    if len != rows.len() {
        return Err(Error::InvalidInput(format!("{} rows do not fill the {shape:?} tensor grid", rows.len())));
    }
    let index: Vec<HashMap<u64, usize>> =
        axes.iter().map(|ax| ax.iter().enumerate().map(|(i, x)| (x.to_bits(), i)).collect()).collect();
    let mut values = vec![f64::NAN; len];
    for row in &rows {
        let mut flat = 0;
        for a in 0..n {
            let i = index[a].get(&row[a].to_bits()).copied().or_else(|| {
                axes[a].iter().position(|x| (x - row[a]).abs() <= NODE_TOL * (1.0 + x.abs()))
            });
            let i = i.ok_or_else(|| Error::InvalidInput(format!("coordinate {} off axis {a}", row[a])))?;
            flat = flat * shape[a] + i;
        }
        if !values[flat].is_nan() {
            return Err(Error::InvalidInput(format!("tensor CSV repeats the point {:?}", &row[..n])));
        }
        values[flat] = row[n];
    }
    TensorField::new(axes, values)
}

/// JSON form of a linear structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureDescription {
    /// Complex dimension.
    pub n: usize,
    /// Coefficients of `∂_z`, row-major `[re, im]` pairs.
    #[serde(rename = "A")]
    pub a: Vec<[f64; 2]>,
    /// Coefficients of `∂_z̄`, row-major `[re, im]` pairs.
    #[serde(rename = "B")]
    pub b: Vec<[f64; 2]>,
}

impl StructureDescription {
    /// Parses the JSON form.
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Builds the structure.
    pub fn build(&self) -> Result<LinearStructure> {
        let n = self.n;
        let mat = |v: &[[f64; 2]], name: &str| -> Result<CMat> {
            if v.len() != n * n {
                return Err(Error::InvalidInput(format!("{name} needs {} entries, got {}", n * n, v.len())));
            }
            Ok(CMat::from_fn(n, n, |i, j| Complex::new(v[i * n + j][0], v[i * n + j][1])))
        };
        j_from_ab(&mat(&self.a, "A")?, &mat(&self.b, "B")?)
    }
}

/// Parses a JSON array of complex numbers, each a real number or `[re, im]`.
pub fn parse_complex_list(text: &str) -> Result<Vec<C64>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let items = value.as_array().ok_or_else(|| Error::InvalidInput(format!("expected a JSON array, got {text}")))?;
    items
        .iter()
        .map(|v| match v {
            serde_json::Value::Number(x) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
            serde_json::Value::Array(p) if p.len() == 2 => match (p[0].as_f64(), p[1].as_f64()) {
                (Some(re), Some(im)) => Ok(C64::new(re, im)),
                _ => Err(Error::InvalidInput(format!("bad complex entry {v}"))),
            },
            _ => Err(Error::InvalidInput(format!("bad complex entry {v}"))),
        })
        .collect()
}
