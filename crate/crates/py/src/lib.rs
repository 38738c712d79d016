use pyo3::prelude::*;

#[pymodule]
fn evodelay(_m: &Bound<PyModule>) -> PyResult<()> { Ok(()) }
