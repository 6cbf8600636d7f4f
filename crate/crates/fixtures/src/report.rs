use std::fmt;

/// Oracle and engine values side by side; deviations are kept even on success.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub case_id: String,
    pub oracle: f64,
    pub engine: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
}

impl OracleReport {
    pub fn new(case_id: impl Into<String>, oracle: f64, engine: f64) -> Self {
        let abs_dev = (oracle - engine).abs();
        let scale = oracle.abs().max(engine.abs());
        let rel_dev = if scale > 0.0 { abs_dev / scale } else { 0.0 };
        OracleReport { case_id: case_id.into(), oracle, engine, abs_dev, rel_dev }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.abs_dev <= tol
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: oracle={:.17e} engine={:.17e} abs={:.3e} rel={:.3e}",
            self.case_id, self.oracle, self.engine, self.abs_dev, self.rel_dev
        )
    }
}
