use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Continuous,
    Categorical,
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    /// Fixed one-hot vocabulary. When present, every training context
    /// encodes this column to the same width regardless of which
    /// categories its rows happen to contain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn continuous(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Continuous,
            categories: None,
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Categorical,
            categories: Some(categories.iter().map(|c| c.to_string()).collect()),
        }
    }

    pub fn target(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Target,
            categories: None,
        }
    }
}

/// Column layout of a delimited dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub columns: Vec<ColumnSpec>,
    pub target_classes: Vec<String>,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

fn default_delimiter() -> char {
    ';'
}

impl FeatureSchema {
    pub fn new(columns: Vec<ColumnSpec>, target_classes: Vec<String>, delimiter: char) -> Result<Self> {
        let schema = FeatureSchema {
            columns,
            target_classes,
            delimiter,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let schema: FeatureSchema = toml::from_str(&text).map_err(|e| Error::ConfigParse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let targets = self
            .columns
            .iter()
            .filter(|c| c.kind == ColumnKind::Target)
            .count();
        if targets != 1 {
            return Err(Error::InvalidSchema(format!(
                "expected exactly one target column, found {targets}"
            )));
        }
        let mut names = HashSet::new();
        for col in &self.columns {
            if !names.insert(col.name.as_str()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate column name {:?}",
                    col.name
                )));
            }
            if let Some(cats) = &col.categories {
                if col.kind != ColumnKind::Categorical {
                    return Err(Error::InvalidSchema(format!(
                        "column {:?} lists categories but is not categorical",
                        col.name
                    )));
                }
                if cats.is_empty() || !all_distinct(cats) {
                    return Err(Error::InvalidSchema(format!(
                        "column {:?} needs a non-empty, duplicate-free vocabulary",
                        col.name
                    )));
                }
            }
        }
        if self.target_classes.is_empty() || !all_distinct(&self.target_classes) {
            return Err(Error::InvalidSchema(
                "target_classes must be non-empty and duplicate-free".into(),
            ));
        }
        Ok(())
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn target_index(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.kind == ColumnKind::Target)
            .expect("validated schema has a target column")
    }

    pub fn n_classes(&self) -> usize {
        self.target_classes.len()
    }

    pub fn count(&self, kind: ColumnKind) -> usize {
        self.columns.iter().filter(|c| c.kind == kind).count()
    }

    /// UCI "Student Performance" (mathematics course), with G3 binarized
    /// into `fail` / `pass` before encoding.
    pub fn student_performance() -> Self {
        use ColumnSpec as C;
        let yes_no = ["no", "yes"];
        let jobs = ["at_home", "health", "other", "services", "teacher"];
        let columns = vec![
            C::categorical("school", &["GP", "MS"]),
            C::categorical("sex", &["F", "M"]),
            C::continuous("age"),
            C::categorical("address", &["R", "U"]),
            C::categorical("famsize", &["GT3", "LE3"]),
            C::categorical("Pstatus", &["A", "T"]),
            C::continuous("Medu"),
            C::continuous("Fedu"),
            C::categorical("Mjob", &jobs),
            C::categorical("Fjob", &jobs),
            C::categorical("reason", &["course", "home", "other", "reputation"]),
            C::categorical("guardian", &["father", "mother", "other"]),
            C::continuous("traveltime"),
            C::continuous("studytime"),
            C::continuous("failures"),
            C::categorical("schoolsup", &yes_no),
            C::categorical("famsup", &yes_no),
            C::categorical("paid", &yes_no),
            C::categorical("activities", &yes_no),
            C::categorical("nursery", &yes_no),
            C::categorical("higher", &yes_no),
            C::categorical("internet", &yes_no),
            C::categorical("romantic", &yes_no),
            C::continuous("famrel"),
            C::continuous("freetime"),
            C::continuous("goout"),
            C::continuous("Dalc"),
            C::continuous("Walc"),
            C::continuous("health"),
            C::continuous("absences"),
            C::continuous("G1"),
            C::continuous("G2"),
            C::target("G3"),
        ];
        FeatureSchema::new(columns, vec!["fail".into(), "pass".into()], ';')
            .expect("builtin schema is valid")
    }

    /// UCI "Predict Students' Dropout and Academic Success". Every
    /// predictor is a numeric code or measurement and is z-scored as is.
    pub fn student_dropout() -> Self {
        let predictors = [
            "Marital status",
            "Application mode",
            "Application order",
            "Course",
            "Daytime/evening attendance",
            "Previous qualification",
            "Previous qualification (grade)",
            "Nacionality",
            "Mother's qualification",
            "Father's qualification",
            "Mother's occupation",
            "Father's occupation",
            "Admission grade",
            "Displaced",
            "Educational special needs",
            "Debtor",
            "Tuition fees up to date",
            "Gender",
            "Scholarship holder",
            "Age at enrollment",
            "International",
            "Curricular units 1st sem (credited)",
            "Curricular units 1st sem (enrolled)",
            "Curricular units 1st sem (evaluations)",
            "Curricular units 1st sem (approved)",
            "Curricular units 1st sem (grade)",
            "Curricular units 1st sem (without evaluations)",
            "Curricular units 2nd sem (credited)",
            "Curricular units 2nd sem (enrolled)",
            "Curricular units 2nd sem (evaluations)",
            "Curricular units 2nd sem (approved)",
            "Curricular units 2nd sem (grade)",
            "Curricular units 2nd sem (without evaluations)",
            "Unemployment rate",
            "Inflation rate",
            "GDP",
        ];
        let mut columns: Vec<ColumnSpec> = predictors.iter().map(|n| ColumnSpec::continuous(n)).collect();
        columns.push(ColumnSpec::target("Target"));
        FeatureSchema::new(
            columns,
            vec!["Dropout".into(), "Enrolled".into(), "Graduate".into()],
            ';',
        )
        .expect("builtin schema is valid")
    }
}

fn all_distinct(values: &[String]) -> bool {
    let set: HashSet<&str> = values.iter().map(|s| s.as_str()).collect();
    set.len() == values.len()
}
