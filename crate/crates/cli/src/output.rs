//! CSV tables with a `#` footer, and the key=value run manifest.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
}

impl Value {
    fn is_finite(&self) -> bool {
        match self {
            Value::Num(x) => x.is_finite(),
            _ => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest representation that round-trips
            Value::Num(x) => write!(f, "{x:e}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Text(s) => f.write_str(s),
            Value::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<usize> for Value {
    fn from(n: usize) -> Self {
        Value::Int(n as u64)
    }
}

impl From<u64> for Value {
    fn from(n: u64) -> Self {
        Value::Int(n)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
    pub footer: Vec<(String, Value)>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            ..Table::default()
        }
    }

    pub fn row(&mut self, values: Vec<Value>) {
        debug_assert_eq!(values.len(), self.header.len());
        self.rows.push(values);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.footer.push((key.into(), value.into()));
    }

    fn check_finite(&self) -> Result<(), CliError> {
        for (i, row) in self.rows.iter().enumerate() {
            for (name, v) in self.header.iter().zip(row) {
                if !v.is_finite() {
                    return Err(CliError::Numerical(format!("non-finite {name} in row {}", i + 1)));
                }
            }
        }
        for (key, v) in &self.footer {
            if !v.is_finite() {
                return Err(CliError::Numerical(format!("non-finite {key}")));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        self.check_finite()?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(&self.header).map_err(io)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(io)?;
        }
        let mut out =
            String::from_utf8(w.into_inner().map_err(|e| CliError::Io(e.to_string()))?).expect("csv output is utf-8");
        for (key, v) in &self.footer {
            out.push_str(&format!("# {key} = {v}\n"));
        }
        Ok(out)
    }
}

/// `results.csv` → `results.manifest`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest")
}

pub fn manifest(cfg: &RunConfig) -> String {
    let mut lines = vec![
        format!("tool = qnd {}", env!("CARGO_PKG_VERSION")),
        format!("command = {}", cfg.command),
        format!("g1 = {:e}", cfg.g1),
        format!("g2 = {:e}", cfg.g2),
        format!("total_photons = {:e}", cfg.total_photons),
        format!("atom_number = {:e}", cfg.atom_number),
        format!("f = {}", cfg.spin),
        format!("schedule = {:?}", cfg.schedule).to_lowercase(),
        format!("p = {}", cfg.p),
        format!("pulses = {}", cfg.num_pulses()),
        format!(
            "na_values = {}",
            cfg.na_values
                .iter()
                .map(|x| format!("{x:e}"))
                .collect::<Vec<_>>()
                .join(",")
        ),
        format!(
            "p_values = {}",
            cfg.p_values.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
        ),
        format!("include_dropped_terms = {}", cfg.include_dropped_terms),
        format!("scattering_eps = {:e}", cfg.scattering_eps),
        format!("integrator = {:?}", cfg.integrator),
        format!("seed = {}", cfg.seed),
        format!("trials = {}", cfg.trials),
        format!("n_ph = {}", cfg.n_ph),
        format!("oracle_atoms = {}", cfg.oracle_atoms),
        format!(
            "spins = {}",
            cfg.spins.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
        ),
    ];
    if let Some(p) = &cfg.physics {
        lines.push(format!(
            "physics = sigma0 {:e}, gamma {:e}, area {:e}, delta {:e}, delta_hfs {:e}",
            p.sigma0, p.gamma, p.area, p.delta, p.delta_hfs
        ));
    }
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    lines.push(format!("timestamp = {stamp}"));
    lines.join("\n") + "\n"
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_footer() {
        let mut t = Table::new(&["na", "mode"]);
        t.row(vec![1e4.into(), "naive".into()]);
        t.note("c1", 3.5e-6);
        assert_eq!(t.to_csv().unwrap(), "na,mode\n1e4,naive\n# c1 = 3.5e-6\n");
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let mut t = Table::new(&["x"]);
        t.row(vec![f64::NAN.into()]);
        assert_eq!(t.to_csv().unwrap_err().exit_code(), 1);
        let mut t = Table::new(&["x"]);
        t.note("c2", f64::INFINITY);
        assert!(t.to_csv().is_err());
    }
}
