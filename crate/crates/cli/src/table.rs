//! Economy-table JSON format.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use valforme_core::linalg::Matrix;
use valforme_core::model::EconomyTable;

use crate::error::CliError;

/// Role of a branch; informational, but checked against the table when given.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Production,
    Wage,
    Machine,
    Luxury,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<Role>,
    #[serde(rename = "F")]
    pub fixed: f64,
    /// Consumption per cycle keyed by the producing branch's name.
    #[serde(default)]
    pub inputs: BTreeMap<String, f64>,
    pub e_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub branches: Vec<BranchSpec>,
    pub n_cycles: u32,
    pub wage_commodity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine_commodity: Option<String>,
    #[serde(rename = "K_total", default, skip_serializing_if = "Option::is_none")]
    pub k_total: Option<f64>,
}

/// Reads and parses a JSON file, reporting parse errors by line and column.
pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_json(&text, path)
}

pub fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Json {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Pretty JSON with a trailing newline; floats print as their shortest round-trip form.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

impl TableFile {
    pub fn names(&self) -> Vec<String> {
        self.branches.iter().map(|b| b.name.clone()).collect()
    }

    /// Index of a branch by name, or by 1-based position.
    pub fn branch_index(&self, key: &str) -> Result<usize, CliError> {
        if let Some(i) = self.branches.iter().position(|b| b.name == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if (1..=self.branches.len()).contains(&i) => Ok(i - 1),
            _ => Err(CliError::Input(format!("unknown branch {key:?}; expected one of {:?}", self.names()))),
        }
    }

    pub fn to_table(&self) -> Result<EconomyTable, CliError> {
        let n = self.branches.len();
        let names = self.names();
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(CliError::Input(format!("duplicate branch name {name:?}")));
            }
        }
        let find = |key: &str, what: &str| {
            names.iter().position(|n| n == key).ok_or_else(|| CliError::Input(format!("{what} {key:?} is not a branch")))
        };
        let mut inputs = Matrix::zeros(n);
        for (i, b) in self.branches.iter().enumerate() {
            for (commodity, &amount) in &b.inputs {
                inputs[(i, find(commodity, &format!("input of branch {:?}:", b.name))?)] = amount;
            }
        }
        let wage = find(&self.wage_commodity, "wage commodity")?;
        let fixed = self.branches.iter().map(|b| b.fixed).collect();
        let e = self.branches.iter().map(|b| b.e_rate).collect();
        let machine = self.machine_commodity.as_deref().map(|m| find(m, "machine commodity")).transpose()?;
        let mut table = EconomyTable::new(names.clone(), fixed, inputs, e, self.n_cycles, wage)?;
        if let Some(m) = machine {
            table = table.with_machine(m)?;
        }
        if let Some(k) = self.k_total {
            if !(k.is_finite() && k > 0.0) {
                return Err(CliError::Input(format!("K_total must be positive, got {k}")));
            }
            table = table.with_k_total(k);
        }
        for (i, b) in self.branches.iter().enumerate() {
            let consistent = match b.role {
                None | Some(Role::Production) => true,
                Some(Role::Wage) => i == wage,
                Some(Role::Machine) => table.machine_index == Some(i),
                Some(Role::Luxury) => table.is_luxury(i),
            };
            if !consistent {
                return Err(CliError::Input(format!("branch {:?} does not match its role {:?}", b.name, b.role.unwrap())));
            }
        }
        Ok(table)
    }

    /// Table file with every input listed and roles derived from the table.
    pub fn from_table(t: &EconomyTable) -> Self {
        let n = t.len();
        let branches = (0..n)
            .map(|i| {
                let role = if i == t.wage_index {
                    Role::Wage
                } else if t.machine_index == Some(i) {
                    Role::Machine
                } else if t.is_luxury(i) {
                    Role::Luxury
                } else {
                    Role::Production
                };
                BranchSpec {
                    name: t.branch_names[i].clone(),
                    role: Some(role),
                    fixed: t.fixed_capital[i],
                    inputs: (0..n).map(|j| (t.branch_names[j].clone(), t.inputs[(i, j)])).collect(),
                    e_rate: t.e_rates[i],
                }
            })
            .collect();
        TableFile {
            branches,
            n_cycles: t.n_cycles,
            wage_commodity: t.branch_names[t.wage_index].clone(),
            machine_commodity: t.machine_index.map(|m| t.branch_names[m].clone()),
            k_total: t.k_total,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = r#"{
        "branches": [
            {"name": "C", "F": 125, "inputs": {"C": 200, "V": 90}, "e_rate": 0.6666666666666666},
            {"name": "V", "role": "wage", "F": 100, "inputs": {"C": 80, "V": 120}, "e_rate": 0.6666666666666666}
        ],
        "n_cycles": 5,
        "wage_commodity": "V",
        "K_total": 715
    }"#;

    #[test]
    fn parses_and_indexes_by_name() {
        let f: TableFile = parse_json(TWO, Path::new("t.json")).unwrap();
        let t = f.to_table().unwrap();
        assert_eq!(t.inputs[(1, 0)], 80.0);
        assert_eq!(t.wage_index, 1);
        assert_eq!(t.k_total, Some(715.0));
        assert_eq!(f.branch_index("V").unwrap(), 1);
        assert_eq!(f.branch_index("1").unwrap(), 0);
        assert!(f.branch_index("X").is_err());
    }

    #[test]
    fn round_trip_is_exact() {
        let f: TableFile = parse_json(TWO, Path::new("t.json")).unwrap();
        let t = f.to_table().unwrap();
        let text = to_json(&TableFile::from_table(&t));
        let back: TableFile = parse_json(&text, Path::new("t.json")).unwrap();
        assert_eq!(back.to_table().unwrap(), t);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_json::<TableFile>("{\n  \"branches\": [,]\n}", Path::new("bad.json")).unwrap_err();
        match err {
            CliError::Json { line, column, .. } => assert_eq!((line, column), (2, 16)),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn unknown_commodity_and_wrong_role_are_rejected() {
        let bad = TWO.replace("\"V\": 90", "\"W\": 90");
        assert!(parse_json::<TableFile>(&bad, Path::new("t")).unwrap().to_table().is_err());
        let bad = TWO.replace("\"role\": \"wage\"", "\"role\": \"machine\"");
        assert!(parse_json::<TableFile>(&bad, Path::new("t")).unwrap().to_table().is_err());
    }
}
