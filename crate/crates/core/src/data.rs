use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};

/// An n×p predictor matrix paired with an n×q response matrix.
///
/// Rows are observations. Construction validates shape and finiteness, so
/// every `Dataset` in circulation satisfies n ≥ 3, p ≥ 1, q ≥ 1.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Array2<f64>,
    y: Array2<f64>,
    feature_names: Option<Vec<String>>,
    response_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::RowMismatch {
                x_rows: x.nrows(),
                y_rows: y.nrows(),
            });
        }
        if x.nrows() < 3 {
            return Err(Error::invalid(format!(
                "need at least 3 observations, got {}",
                x.nrows()
            )));
        }
        if x.ncols() == 0 {
            return Err(Error::invalid("predictor matrix has no columns"));
        }
        if y.ncols() == 0 {
            return Err(Error::invalid("response matrix has no columns"));
        }
        check_finite(&x, "x")?;
        check_finite(&y, "y")?;
        Ok(Self {
            x,
            y,
            feature_names: None,
            response_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::invalid(format!(
                "{} feature names for {} predictors",
                names.len(),
                self.p()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn with_response_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.q() {
            return Err(Error::invalid(format!(
                "{} response names for {} components",
                names.len(),
                self.q()
            )));
        }
        self.response_names = Some(names);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array2<f64> {
        &self.y
    }

    pub fn x_col(&self, j: usize) -> ArrayView1<'_, f64> {
        self.x.column(j)
    }

    pub fn y_col(&self, m: usize) -> ArrayView1<'_, f64> {
        self.y.column(m)
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    pub fn response_names(&self) -> Option<&[String]> {
        self.response_names.as_deref()
    }

    /// Same responses, new predictor matrix. Feature names are dropped unless
    /// supplied again.
    pub fn with_predictors(&self, x: Array2<f64>) -> Result<Self> {
        let mut out = Dataset::new(x, self.y.clone())?;
        out.response_names = self.response_names.clone();
        Ok(out)
    }

    /// Dataset restricted to the given predictor columns, names carried along.
    pub fn select_predictors(&self, cols: &[usize]) -> Result<Self> {
        if let Some(&bad) = cols.iter().find(|&&j| j >= self.p()) {
            return Err(Error::invalid(format!("predictor index {bad} out of range")));
        }
        let x = self.x.select(Axis(1), cols);
        let mut out = self.with_predictors(x)?;
        if let Some(names) = &self.feature_names {
            out.feature_names = Some(cols.iter().map(|&j| names[j].clone()).collect());
        }
        Ok(out)
    }
}

fn check_finite(m: &Array2<f64>, label: &str) -> Result<()> {
    for ((i, j), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::invalid(format!(
                "{label}[{}, {}] is not finite ({v})",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}
