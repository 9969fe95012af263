use std::io::{BufRead, Write};

use nalgebra::DMatrix;

use crate::coalition::format_value;
use crate::error::{Error, Result};
use crate::models::Model;

/// An i.i.d. input/output sample.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    x: DMatrix<f64>,
    y: Vec<f64>,
}

impl DataSet {
    pub fn new(x: DMatrix<f64>, y: Vec<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::contract(format!(
                "{} input rows but {} outputs",
                x.nrows(),
                y.len()
            )));
        }
        if y.len() < 2 {
            return Err(Error::contract("a data set needs at least 2 observations"));
        }
        if x.ncols() == 0 || x.ncols() > crate::coalition::MAX_PLAYERS {
            return Err(Error::Dimension(x.ncols()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::contract("data set contains non-finite values"));
        }
        Ok(Self { x, y })
    }

    /// Evaluates `model` on every row of `x`.
    pub fn from_model(x: DMatrix<f64>, model: &dyn Model) -> Result<Self> {
        if x.ncols() != model.dim() {
            return Err(Error::contract("model and input dimensions differ"));
        }
        let mut row = vec![0.0; x.ncols()];
        let y = (0..x.nrows())
            .map(|i| {
                for (j, r) in row.iter_mut().enumerate() {
                    *r = x[(i, j)];
                }
                model.eval(&row)
            })
            .collect();
        Self::new(x, y)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// The rows listed in `rows`, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select_rows(rows);
        let y = rows.iter().map(|&r| self.y[r]).collect();
        Self::new(x, y)
    }

    /// CSV with header `x1,...,xd,y`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.dim()).map(|j| format!("x{j}")).collect();
        writeln!(out, "{},y", header.join(","))?;
        for i in 0..self.len() {
            for j in 0..self.dim() {
                write!(out, "{},", format_value(self.x[(i, j)]))?;
            }
            writeln!(out, "{}", format_value(self.y[i]))?;
        }
        Ok(())
    }

    /// Reads the format of [`DataSet::write_csv`]. Lines starting with `#` are
    /// skipped.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut d = None;
        let mut values = Vec::new();
        let mut y = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            let Some(d) = d else {
                let n = fields.len();
                let expected: Vec<String> = (1..n)
                    .map(|j| format!("x{j}"))
                    .chain(["y".into()])
                    .collect();
                if n < 2 || fields != expected {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected header `{}`", expected.join(",")),
                    });
                }
                d = Some(n - 1);
                continue;
            };
            if fields.len() != d + 1 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {} fields, found {}", d + 1, fields.len()),
                });
            }
            for (j, f) in fields.iter().enumerate() {
                let v: f64 = f.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid number `{f}`"),
                })?;
                if j < d {
                    values.push(v);
                } else {
                    y.push(v);
                }
            }
        }
        let d = d.ok_or(Error::Parse {
            line: 0,
            message: "empty data file".into(),
        })?;
        Self::new(DMatrix::from_row_slice(y.len(), d, &values), y)
    }
}
