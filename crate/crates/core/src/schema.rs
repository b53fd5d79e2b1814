//! Feature schemas and the tab-separated schema document.
//!
//! ```text
//! # comment
//! Vaccine Trust<TAB>ordinal<TAB>C<TAB>1|2|3|4|5
//! gender<TAB>nominal<TAB>B<TAB>male|female
//! age<TAB>numeric<TAB>B<TAB>
//! decision<TAB>nominal<TAB>-<TAB>refuse|accept
//! !target<TAB>decision<TAB>accept
//! ```
//!
//! The target is declared like any nominal feature and must have exactly two
//! levels. It is kept apart from the input features, which are what encoders
//! and explainers see.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Ordinal,
    Nominal,
}

impl FeatureKind {
    pub fn is_categorical(self) -> bool {
        !matches!(self, FeatureKind::Numeric)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureKind::Numeric => "numeric",
            FeatureKind::Ordinal => "ordinal",
            FeatureKind::Nominal => "nominal",
        }
    }
}

impl FromStr for FeatureKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "numeric" => Ok(FeatureKind::Numeric),
            "ordinal" => Ok(FeatureKind::Ordinal),
            "nominal" => Ok(FeatureKind::Nominal),
            other => Err(format!("unknown kind `{other}`")),
        }
    }
}

/// Composite feature groups: culture (A), demographics (B), vaccine (C) and
/// COVID-19 information (D).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Group {
    A,
    B,
    C,
    D,
}

impl Group {
    pub const ALL: [Group; 4] = [Group::A, Group::B, Group::C, Group::D];

    pub fn as_str(self) -> &'static str {
        match self {
            Group::A => "A",
            Group::B => "B",
            Group::C => "C",
            Group::D => "D",
        }
    }

    pub fn parse_tag(s: &str) -> std::result::Result<Option<Group>, String> {
        match s {
            "A" => Ok(Some(Group::A)),
            "B" => Ok(Some(Group::B)),
            "C" => Ok(Some(Group::C)),
            "D" => Ok(Some(Group::D)),
            "-" => Ok(None),
            other => Err(format!("unknown group `{other}` (expected A, B, C, D or -)")),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    /// Declared levels, order significant. Empty iff numeric.
    pub levels: Vec<String>,
    pub group: Option<Group>,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>, group: Option<Group>) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::Numeric, levels: Vec::new(), group }
    }

    pub fn ordinal<S: Into<String>>(
        name: impl Into<String>,
        group: Option<Group>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Ordinal,
            levels: levels.into_iter().map(Into::into).collect(),
            group,
        }
    }

    pub fn nominal<S: Into<String>>(
        name: impl Into<String>,
        group: Option<Group>,
        levels: impl IntoIterator<Item = S>,
    ) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Nominal,
            levels: levels.into_iter().map(Into::into).collect(),
            group,
        }
    }

    pub fn level_index(&self, level: &str) -> Option<usize> {
        self.levels.iter().position(|l| l == level)
    }

    /// Renders a stored cell value the way it appears in CSV.
    pub fn format_value(&self, value: f64) -> String {
        if self.kind.is_categorical() {
            self.levels
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format!("<invalid level {value}>"))
        } else {
            format!("{value}")
        }
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.name.is_empty() {
            return Err("feature name is empty".into());
        }
        if self.name.contains(['\t', '\n', '\r']) {
            return Err(format!("feature name `{}` contains a tab or newline", self.name));
        }
        match self.kind {
            FeatureKind::Numeric => {
                if !self.levels.is_empty() {
                    return Err(format!("numeric feature `{}` must not declare levels", self.name));
                }
            }
            _ => {
                if self.levels.len() < 2 {
                    return Err(format!(
                        "{} feature `{}` needs at least 2 levels, found {}",
                        self.kind.as_str(),
                        self.name,
                        self.levels.len()
                    ));
                }
                let mut seen = HashSet::new();
                for level in &self.levels {
                    if level.is_empty() || level.contains(['|', '\t', '\n', '\r']) {
                        return Err(format!("feature `{}` has an invalid level `{level}`", self.name));
                    }
                    if !seen.insert(level.as_str()) {
                        return Err(format!("feature `{}` repeats level `{level}`", self.name));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A validated schema. Construct with [`FeatureSchema::new`] or [`FeatureSchema::parse`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    features: Vec<FeatureSpec>,
    target: FeatureSpec,
    positive_level: String,
    /// Position of the target line among declared features, kept so the
    /// canonical document reproduces the declared order.
    target_position: usize,
    index: HashMap<String, usize>,
}

impl FeatureSchema {
    /// Builds a schema whose target line follows all input features.
    pub fn new(features: Vec<FeatureSpec>, target: FeatureSpec, positive_level: &str) -> Result<Self> {
        let position = features.len();
        Self::build(features, target, positive_level, position).map_err(|msg| Error::Schema { line: 0, msg })
    }

    fn build(
        features: Vec<FeatureSpec>,
        target: FeatureSpec,
        positive_level: &str,
        target_position: usize,
    ) -> std::result::Result<Self, String> {
        if features.is_empty() {
            return Err("schema declares no input features".into());
        }
        target.validate()?;
        if target.kind != FeatureKind::Nominal || target.levels.len() != 2 {
            return Err(format!("target `{}` must be nominal with exactly 2 levels", target.name));
        }
        if target.level_index(positive_level).is_none() {
            return Err(format!("positive level `{positive_level}` is not a level of target `{}`", target.name));
        }
        let mut index = HashMap::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            f.validate()?;
            if f.name == target.name || index.insert(f.name.clone(), i).is_some() {
                return Err(format!("duplicate feature name `{}`", f.name));
            }
        }
        Ok(FeatureSchema {
            features,
            target,
            positive_level: positive_level.to_string(),
            target_position,
            index,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut declared: Vec<(usize, FeatureSpec)> = Vec::new();
        let mut names: HashMap<String, usize> = HashMap::new();
        let mut directive: Option<(usize, String, String)> = None;
        let mut last_line = 0;

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            last_line = line_no;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Schema { line: line_no, msg };
            let fields: Vec<&str> = line.split('\t').collect();

            if let Some(rest) = fields[0].strip_prefix('!') {
                if rest != "target" {
                    return Err(err(format!("unknown directive `!{rest}`")));
                }
                if fields.len() != 3 {
                    return Err(err("expected `!target<TAB>name<TAB>positive_level`".into()));
                }
                if directive.is_some() {
                    return Err(err("more than one !target directive".into()));
                }
                directive = Some((line_no, fields[1].to_string(), fields[2].to_string()));
                continue;
            }

            if !(3..=4).contains(&fields.len()) {
                return Err(err(format!(
                    "expected `name<TAB>kind<TAB>group<TAB>levels`, found {} fields",
                    fields.len()
                )));
            }
            let kind: FeatureKind = fields[1].parse().map_err(err)?;
            let group = Group::parse_tag(fields[2]).map_err(err)?;
            let levels_field = fields.get(3).copied().unwrap_or("");
            let levels: Vec<String> = if levels_field.is_empty() {
                Vec::new()
            } else {
                levels_field.split('|').map(str::to_string).collect()
            };
            let spec = FeatureSpec { name: fields[0].to_string(), kind, levels, group };
            spec.validate().map_err(err)?;
            if names.insert(spec.name.clone(), line_no).is_some() {
                return Err(err(format!("duplicate feature name `{}`", spec.name)));
            }
            declared.push((line_no, spec));
        }

        let (line, target_name, positive) = directive.ok_or_else(|| Error::Schema {
            line: last_line,
            msg: "missing `!target` directive".into(),
        })?;
        let position = declared
            .iter()
            .position(|(_, f)| f.name == target_name)
            .ok_or_else(|| Error::Schema { line, msg: format!("target `{target_name}` is not declared") })?;
        let (target_line, target) = declared.remove(position);
        if target.kind != FeatureKind::Nominal || target.levels.len() != 2 {
            return Err(Error::Schema {
                line: target_line,
                msg: format!("target `{target_name}` must be nominal with exactly 2 levels"),
            });
        }
        let features = declared.into_iter().map(|(_, f)| f).collect();
        Self::build(features, target, &positive, position).map_err(|msg| Error::Schema { line, msg })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical document: no comments or blank lines, declared order, the
    /// directive last.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let line = |f: &FeatureSpec| {
            format!(
                "{}\t{}\t{}\t{}\n",
                f.name,
                f.kind.as_str(),
                f.group.map_or("-", Group::as_str),
                f.levels.join("|")
            )
        };
        for (i, f) in self.features.iter().enumerate() {
            if i == self.target_position {
                out.push_str(&line(&self.target));
            }
            out.push_str(&line(f));
        }
        if self.target_position >= self.features.len() {
            out.push_str(&line(&self.target));
        }
        out.push_str(&format!("!target\t{}\t{}\n", self.target.name, self.positive_level));
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, index: usize) -> &FeatureSpec {
        &self.features[index]
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn target(&self) -> &FeatureSpec {
        &self.target
    }

    pub fn target_name(&self) -> &str {
        &self.target.name
    }

    pub fn positive_level(&self) -> &str {
        &self.positive_level
    }

    pub fn negative_level(&self) -> &str {
        self.target.levels.iter().find(|l| **l != self.positive_level).map(String::as_str).unwrap_or("")
    }

    /// Input features tagged with `group`, in schema order.
    pub fn group_members(&self, group: Group) -> Vec<usize> {
        (0..self.features.len()).filter(|&i| self.features[i].group == Some(group)).collect()
    }

    /// Column names in declared order, target included at its declared position.
    pub(crate) fn declared_columns(&self) -> Vec<&str> {
        let mut cols: Vec<&str> = self.features.iter().map(|f| f.name.as_str()).collect();
        cols.insert(self.target_position.min(cols.len()), &self.target.name);
        cols
    }
}

impl fmt::Display for FeatureSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = "# survey items\n\
        Vaccine Trust\tordinal\tC\t1|2|3|4|5\n\
        gender\tnominal\tB\tmale|female\n\
        decision\tnominal\t-\trefuse|accept\n\
        \n\
        age\tnumeric\tB\t\n\
        !target\tdecision\taccept\n";

    fn line_of(err: Error) -> usize {
        match err {
            Error::Schema { line, .. } => line,
            other => panic!("expected schema error, got {other}"),
        }
    }

    #[test]
    fn parses_kinds_levels_and_groups() {
        let s = FeatureSchema::parse(DOC).unwrap();
        assert_eq!(s.n_features(), 3);
        let trust = s.feature(0);
        assert_eq!(trust.kind, FeatureKind::Ordinal);
        assert_eq!(trust.levels, ["1", "2", "3", "4", "5"]);
        assert_eq!(trust.group, Some(Group::C));
        let gender = s.feature(1);
        assert_eq!(gender.kind, FeatureKind::Nominal);
        assert_eq!(gender.levels.len(), 2);
        assert_eq!(s.feature(2).kind, FeatureKind::Numeric);
        assert!(s.feature(2).levels.is_empty());
        assert_eq!(s.target_name(), "decision");
        assert_eq!(s.positive_level(), "accept");
        assert_eq!(s.negative_level(), "refuse");
    }

    #[test]
    fn canonical_round_trip() {
        let s = FeatureSchema::parse(DOC).unwrap();
        let canon = s.to_text();
        assert_eq!(
            canon,
            "Vaccine Trust\tordinal\tC\t1|2|3|4|5\n\
             gender\tnominal\tB\tmale|female\n\
             decision\tnominal\t-\trefuse|accept\n\
             age\tnumeric\tB\t\n\
             !target\tdecision\taccept\n"
        );
        let again = FeatureSchema::parse(&canon).unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_text(), canon);
    }

    #[test]
    fn numeric_line_without_levels_field() {
        let s = FeatureSchema::parse("x\tnumeric\t-\ny\tnominal\t-\tn|y\n!target\ty\ty\n").unwrap();
        assert_eq!(s.n_features(), 1);
    }

    #[test]
    fn only_target_is_an_error() {
        let err = FeatureSchema::parse("y\tnominal\t-\tno|yes\n!target\ty\tyes\n").unwrap_err();
        assert!(matches!(err, Error::Schema { .. }));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let dup = "a\tordinal\tA\t1|2\na\tordinal\tA\t1|2\ny\tnominal\t-\tn|y\n!target\ty\ty\n";
        assert_eq!(line_of(FeatureSchema::parse(dup).unwrap_err()), 2);

        let kind = "a\tlikert\tA\t1|2\ny\tnominal\t-\tn|y\n!target\ty\ty\n";
        assert_eq!(line_of(FeatureSchema::parse(kind).unwrap_err()), 1);

        let missing = "a\tordinal\tA\t1|2\ny\tnominal\t-\tn|y\n";
        assert_eq!(line_of(FeatureSchema::parse(missing).unwrap_err()), 2);

        let ternary = "a\tordinal\tA\t1|2\ny\tnominal\t-\tn|y|m\n!target\ty\ty\n";
        assert_eq!(line_of(FeatureSchema::parse(ternary).unwrap_err()), 2);

        let undeclared = "a\tordinal\tA\t1|2\n!target\ty\ty\n";
        assert_eq!(line_of(FeatureSchema::parse(undeclared).unwrap_err()), 2);

        let bad_positive = "a\tordinal\tA\t1|2\ny\tnominal\t-\tn|y\n!target\ty\tmaybe\n";
        assert_eq!(line_of(FeatureSchema::parse(bad_positive).unwrap_err()), 3);
    }

    #[test]
    fn rejects_degenerate_levels() {
        for doc in [
            "a\tordinal\tA\t1\ny\tnominal\t-\tn|y\n!target\ty\ty\n",
            "a\tnominal\tA\tx|x\ny\tnominal\t-\tn|y\n!target\ty\ty\n",
            "a\tnumeric\tA\t1|2\ny\tnominal\t-\tn|y\n!target\ty\ty\n",
            "a\tordinal\tE\t1|2\ny\tnominal\t-\tn|y\n!target\ty\ty\n",
            "\tordinal\tA\t1|2\ny\tnominal\t-\tn|y\n!target\ty\ty\n",
        ] {
            assert!(FeatureSchema::parse(doc).is_err(), "accepted {doc:?}");
        }
    }

    #[test]
    fn handles_many_features() {
        let mut doc = String::new();
        for i in 0..200 {
            doc.push_str(&format!("f{i}\tordinal\tA\t1|2|3\n"));
        }
        doc.push_str("y\tnominal\t-\tn|y\n!target\ty\ty\n");
        let s = FeatureSchema::parse(&doc).unwrap();
        assert_eq!(s.n_features(), 200);
        assert_eq!(s.feature_index("f137"), Some(137));
        assert_eq!(s.group_members(Group::A).len(), 200);
    }
}
