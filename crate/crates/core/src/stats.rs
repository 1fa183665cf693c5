//! Dataset statistics: gender of correct candidates and the annotation report.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use core::fmt;
use core::str::FromStr;

use crate::cremgen::MaskedExample;
use crate::text::list_entries;

const DEFAULT_GENDERS: &str = include_str!("../data/gender.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GenderClass {
    Male,
    MostlyMale,
    Female,
    MostlyFemale,
    Ambiguous,
    Unknown,
}

impl GenderClass {
    pub const ALL: [GenderClass; 6] = [
        GenderClass::Male,
        GenderClass::MostlyMale,
        GenderClass::Female,
        GenderClass::MostlyFemale,
        GenderClass::Ambiguous,
        GenderClass::Unknown,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GenderClass::Male => "male",
            GenderClass::MostlyMale => "mostly_male",
            GenderClass::Female => "female",
            GenderClass::MostlyFemale => "mostly_female",
            GenderClass::Ambiguous => "ambiguous",
            GenderClass::Unknown => "unknown",
        }
    }

    pub fn is_maleish(&self) -> bool {
        matches!(self, GenderClass::Male | GenderClass::MostlyMale)
    }

    pub fn is_femaleish(&self) -> bool {
        matches!(self, GenderClass::Female | GenderClass::MostlyFemale)
    }
}

impl fmt::Display for GenderClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gender class {0:?}")]
pub struct UnknownClass(pub String);

impl FromStr for GenderClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "male" => GenderClass::Male,
            "mostly_male" => GenderClass::MostlyMale,
            "female" => GenderClass::Female,
            "mostly_female" => GenderClass::MostlyFemale,
            // gender-guesser calls androgynous names "andy"
            "ambiguous" | "andy" => GenderClass::Ambiguous,
            "unknown" => GenderClass::Unknown,
            other => return Err(UnknownClass(other.to_string())),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GazetteerError {
    #[error("line {line}: expected `name<TAB>class`")]
    Shape { line: usize },
    #[error("line {line}: {source}")]
    Class { line: usize, source: UnknownClass },
}

/// First-name → gender class table, keyed case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct GenderGazetteer(BTreeMap<String, GenderClass>);

impl GenderGazetteer {
    pub fn parse(src: &str) -> Result<Self, GazetteerError> {
        let mut map = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with("//") {
                continue;
            }
            let (name, class) = line.split_once('\t').ok_or(GazetteerError::Shape { line: i + 1 })?;
            let class = class
                .trim()
                .parse()
                .map_err(|source| GazetteerError::Class { line: i + 1, source })?;
            map.insert(name.trim().to_lowercase(), class);
        }
        Ok(Self(map))
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_GENDERS).expect("shipped gender gazetteer is well formed")
    }

    pub fn from_pairs<'a, I: IntoIterator<Item = (&'a str, GenderClass)>>(pairs: I) -> Self {
        Self(pairs.into_iter().map(|(n, c)| (n.to_lowercase(), c)).collect())
    }

    pub fn lookup(&self, name: &str) -> Option<GenderClass> {
        self.0.get(&name.to_lowercase()).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Class of the first whitespace token of `name`; misses are `Unknown`.
pub fn classify_gender(name: &str, gazetteer: &GenderGazetteer) -> GenderClass {
    name.split_whitespace()
        .next()
        .and_then(|first| gazetteer.lookup(first))
        .unwrap_or(GenderClass::Unknown)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GenderReport {
    pub counts: BTreeMap<GenderClass, u64>,
    pub total: u64,
}

impl GenderReport {
    pub fn add(&mut self, class: GenderClass) {
        *self.counts.entry(class).or_default() += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &GenderReport) {
        for (c, n) in &other.counts {
            *self.counts.entry(*c).or_default() += n;
        }
        self.total += other.total;
    }

    pub fn count(&self, class: GenderClass) -> u64 {
        self.counts.get(&class).copied().unwrap_or(0)
    }

    pub fn male(&self) -> u64 {
        self.count(GenderClass::Male) + self.count(GenderClass::MostlyMale)
    }

    pub fn female(&self) -> u64 {
        self.count(GenderClass::Female) + self.count(GenderClass::MostlyFemale)
    }

    /// `(female + mostly_female) / (male + mostly_male)`; absent without male names.
    pub fn ratio(&self) -> Option<f64> {
        let male = self.male();
        (male > 0).then(|| self.female() as f64 / male as f64)
    }
}

/// Gender counts over the correct candidates only.
pub fn gender_ratio<'a, I>(dataset: I, gazetteer: &GenderGazetteer) -> GenderReport
where
    I: IntoIterator<Item = &'a MaskedExample>,
{
    let mut report = GenderReport::default();
    for ex in dataset {
        report.add(classify_gender(&ex.correct, gazetteer));
    }
    report
}

/// One hand-annotated example.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationFixture {
    pub index: u32,
    pub text: String,
    pub ambiguous: bool,
    /// Whether a pronoun reads naturally in place of the mask.
    pub natural_pronoun: bool,
    pub annotator_answer: Option<String>,
    pub annotator_correct: Option<bool>,
}

impl AnnotationFixture {
    /// Annotator fields are present exactly when the example is solvable.
    pub fn is_consistent(&self) -> bool {
        self.ambiguous == (self.annotator_answer.is_none() && self.annotator_correct.is_none())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnnotationReport {
    pub total: u64,
    pub unsolvable: u64,
    pub solvable: u64,
    pub annotator_correct: u64,
    /// correct / solvable; absent when nothing is solvable.
    pub annotator_accuracy: Option<f64>,
    pub natural_fraction: Option<f64>,
}

pub fn annotation_report(fixtures: &[AnnotationFixture]) -> AnnotationReport {
    let total = fixtures.len() as u64;
    let unsolvable = fixtures.iter().filter(|f| f.ambiguous).count() as u64;
    let solvable = total - unsolvable;
    let correct = fixtures
        .iter()
        .filter(|f| !f.ambiguous && f.annotator_correct == Some(true))
        .count() as u64;
    let natural = fixtures.iter().filter(|f| f.natural_pronoun).count() as u64;
    AnnotationReport {
        total,
        unsolvable,
        solvable,
        annotator_correct: correct,
        annotator_accuracy: (solvable > 0).then(|| correct as f64 / solvable as f64),
        natural_fraction: (total > 0).then(|| natural as f64 / total as f64),
    }
}

/// The shipped gender table as `name<TAB>class` lines.
pub fn shipped_gender_table() -> impl Iterator<Item = &'static str> {
    list_entries(DEFAULT_GENDERS)
}
