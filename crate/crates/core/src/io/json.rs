//! Native JSON instance format. Every number is a string holding an exact
//! rational (`"3"`, `"-2/7"`, `"0.25"`); rows are dense.
//!
//! ```json
//! {
//!   "name": "knap",
//!   "num_vars": 2,
//!   "objective": ["5", "4"],
//!   "constraints": [{ "coefficients": ["2", "3"], "rhs": "4" }],
//!   "integer_vars": [0, 1],
//!   "lower_bounds": ["0", "0"],
//!   "upper_bounds": ["1", null]
//! }
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{parse_rational, render, ParseRationalError, Rational, RationalMatrix};
use crate::model::{validate_instance, MipInstance};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error(transparent)]
    Syntax(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Number { field: String, source: ParseRationalError },
    #[error("invalid instance: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
struct InstanceDto {
    name: String,
    num_vars: usize,
    objective: Vec<String>,
    constraints: Vec<RowDto>,
    #[serde(default)]
    integer_vars: Vec<usize>,
    lower_bounds: Vec<Option<String>>,
    upper_bounds: Vec<Option<String>>,
}

#[derive(Serialize, Deserialize)]
struct RowDto {
    coefficients: Vec<String>,
    rhs: String,
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(render).collect()
}

fn bound_strings(v: &[Option<Rational>]) -> Vec<Option<String>> {
    v.iter().map(|b| b.as_ref().map(render)).collect()
}

pub fn instance_to_json(inst: &MipInstance) -> String {
    let dto = InstanceDto {
        name: inst.name.clone(),
        num_vars: inst.num_vars,
        objective: strings(&inst.objective),
        constraints: inst
            .constraint_matrix
            .rows()
            .iter()
            .zip(&inst.rhs)
            .map(|(row, b)| RowDto {
                coefficients: strings(row),
                rhs: render(b),
            })
            .collect(),
        integer_vars: inst.integer_vars.iter().copied().collect(),
        lower_bounds: bound_strings(&inst.lower_bounds),
        upper_bounds: bound_strings(&inst.upper_bounds),
    };
    serde_json::to_string_pretty(&dto).expect("plain data serializes") + "\n"
}

pub fn instance_from_json(text: &str) -> Result<MipInstance, JsonError> {
    let dto: InstanceDto = serde_json::from_str(text)?;
    let num = |field: String, s: &str| parse_rational(s).map_err(|source| JsonError::Number { field, source });
    let vector = |field: &str, v: &[String]| -> Result<Vec<Rational>, JsonError> {
        v.iter()
            .enumerate()
            .map(|(j, s)| num(format!("{field}[{j}]"), s))
            .collect()
    };
    let bounds = |field: &str, v: &[Option<String>]| -> Result<Vec<Option<Rational>>, JsonError> {
        v.iter()
            .enumerate()
            .map(|(j, s)| s.as_deref().map(|s| num(format!("{field}[{j}]"), s)).transpose())
            .collect()
    };
    let mut matrix = RationalMatrix::new(dto.num_vars);
    let mut rhs = Vec::new();
    for (i, row) in dto.constraints.iter().enumerate() {
        let coefficients = vector(&format!("constraints[{i}].coefficients"), &row.coefficients)?;
        if coefficients.len() != dto.num_vars {
            return Err(JsonError::Invalid(format!(
                "constraints[{i}] has {} coefficients, expected {}",
                coefficients.len(),
                dto.num_vars
            )));
        }
        matrix.push_row(coefficients);
        rhs.push(num(format!("constraints[{i}].rhs"), &row.rhs)?);
    }
    let inst = MipInstance {
        name: dto.name,
        num_vars: dto.num_vars,
        constraint_matrix: matrix,
        rhs,
        objective: vector("objective", &dto.objective)?,
        integer_vars: dto.integer_vars.into_iter().collect(),
        lower_bounds: bounds("lower_bounds", &dto.lower_bounds)?,
        upper_bounds: bounds("upper_bounds", &dto.upper_bounds)?,
    };
    let problems = validate_instance(&inst);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(ToString::to_string).collect();
        return Err(JsonError::Invalid(text.join("; ")));
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{int, int_vector, ratio};

    fn knapsack() -> MipInstance {
        MipInstance::new(
            "knap",
            RationalMatrix::from_i64(&[&[2, 3]], 2),
            int_vector(&[4]),
            int_vector(&[5, 4]),
        )
        .with_all_integer()
        .with_box(int(0), int(1))
    }

    #[test]
    fn round_trip() {
        let mut inst = knapsack();
        inst.upper_bounds[1] = None;
        inst.objective[0] = ratio(-7, 3);
        let back = instance_from_json(&instance_to_json(&inst)).unwrap();
        assert_eq!(back, inst);
        assert_eq!(back.num_vars, 2);
        assert_eq!(back.num_rows(), 1);
    }

    #[test]
    fn decimals_are_exact() {
        let text = r#"{"name":"t","num_vars":1,"objective":["0.1"],"constraints":[],
            "lower_bounds":[null],"upper_bounds":["1e2"]}"#;
        let inst = instance_from_json(text).unwrap();
        assert_eq!(inst.objective, vec![ratio(1, 10)]);
        assert_eq!(inst.upper_bounds, vec![Some(int(100))]);
    }

    #[test]
    fn rejects_bad_data() {
        let bad_number = r#"{"name":"t","num_vars":1,"objective":["x"],"constraints":[],
            "lower_bounds":[null],"upper_bounds":[null]}"#;
        assert!(matches!(instance_from_json(bad_number), Err(JsonError::Number { .. })));
        let short_row = r#"{"name":"t","num_vars":2,"objective":["1","1"],
            "constraints":[{"coefficients":["1"],"rhs":"0"}],
            "lower_bounds":[null,null],"upper_bounds":[null,null]}"#;
        assert!(matches!(instance_from_json(short_row), Err(JsonError::Invalid(_))));
        let bad_index = r#"{"name":"t","num_vars":1,"objective":["1"],"constraints":[],
            "integer_vars":[3],"lower_bounds":[null],"upper_bounds":[null]}"#;
        assert!(matches!(instance_from_json(bad_index), Err(JsonError::Invalid(_))));
        assert!(matches!(instance_from_json("{"), Err(JsonError::Syntax(_))));
    }
}
