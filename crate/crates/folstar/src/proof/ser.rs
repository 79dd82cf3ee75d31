//! Proof file serialization: JSON lines, one step per line.
//!
//! The first line is a header identifying the format and version; every
//! following line is one derivation step. Formulas are stored as their
//! s-expression rendering. Serialization is deterministic (field order is
//! fixed by the DTO structs), so serializing the same proof twice yields
//! byte-identical output.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fol::{parse_raw_formula, render};

use super::{Deps, Id, Proof, Rule, SeoItem, Step};

pub const FORMAT_NAME: &str = "folstar-proof";
pub const FORMAT_VERSION: u32 = 1;

/// Errors reading a proof file.
#[derive(Debug, Error)]
pub enum ProofFileError {
    #[error("line {line}: malformed record: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: missing or invalid header (expected {FORMAT_NAME} v{FORMAT_VERSION})")]
    BadHeader { line: usize },
    #[error("line {line}: unknown rule name `{name}`")]
    UnknownRule { line: usize, name: String },
    #[error("line {line}: unparsable formula: {detail}")]
    BadFormula { line: usize, detail: String },
    #[error("line {line}: duplicate resource id {id}")]
    DuplicateId { line: usize, id: Id },
    #[error("line {line}: resource id {id} referenced before it is added")]
    ForwardReference { line: usize, id: Id },
}

#[derive(Serialize, Deserialize)]
struct HeaderDto {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct DepsDto {
    #[serde(rename = "R", default, skip_serializing_if = "Vec::is_empty")]
    r: Vec<Id>,
    #[serde(rename = "F", default, skip_serializing_if = "Vec::is_empty")]
    f: Vec<Id>,
    #[serde(rename = "D", default, skip_serializing_if = "Vec::is_empty")]
    d: Vec<Id>,
}

#[derive(Serialize, Deserialize)]
struct FormulaEntryDto {
    id: Id,
    fml: String,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SeoPayloadDto {
    Obj { class: String, name: String },
    Def { fml: String, lit: String },
}

#[derive(Serialize, Deserialize)]
struct SeoEntryDto {
    id: Id,
    #[serde(flatten)]
    payload: SeoPayloadDto,
}

#[derive(Serialize, Deserialize)]
struct StepDto {
    id: usize,
    rule: String,
    deps: DepsDto,
    #[serde(rename = "addR", default, skip_serializing_if = "Vec::is_empty")]
    add_r: Vec<FormulaEntryDto>,
    #[serde(rename = "addF", default, skip_serializing_if = "Vec::is_empty")]
    add_f: Vec<FormulaEntryDto>,
    #[serde(rename = "addD", default, skip_serializing_if = "Vec::is_empty")]
    add_d: Vec<SeoEntryDto>,
}

fn step_to_dto(step: &Step) -> StepDto {
    StepDto {
        id: step.id,
        rule: step.rule.name().to_string(),
        deps: DepsDto {
            r: step.deps.r.clone(),
            f: step.deps.f.clone(),
            d: step.deps.d.clone(),
        },
        add_r: step
            .add_r
            .iter()
            .map(|(id, f)| FormulaEntryDto {
                id: *id,
                fml: render(f),
            })
            .collect(),
        add_f: step
            .add_f
            .iter()
            .map(|(id, f)| FormulaEntryDto {
                id: *id,
                fml: render(f),
            })
            .collect(),
        add_d: step
            .add_d
            .iter()
            .map(|(id, item)| SeoEntryDto {
                id: *id,
                payload: match item {
                    SeoItem::Obj { name, class } => SeoPayloadDto::Obj {
                        class: class.clone(),
                        name: name.clone(),
                    },
                    SeoItem::Def { lit, formula } => SeoPayloadDto::Def {
                        fml: render(formula),
                        lit: lit.clone(),
                    },
                },
            })
            .collect(),
    }
}

/// Serialize `proof` to the line-oriented text format.
pub fn serialize_proof(proof: &Proof) -> String {
    let mut out = String::new();
    let header = HeaderDto {
        format: FORMAT_NAME.to_string(),
        version: FORMAT_VERSION,
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for step in &proof.steps {
        out.push_str(&serde_json::to_string(&step_to_dto(step)).expect("step serializes"));
        out.push('\n');
    }
    out
}

/// Parse the line-oriented text format back into a [`Proof`]. Performs
/// structural validation only (well-formed records, known rule names, no
/// duplicate ids, no references to ids not yet added); rule preconditions
/// are the checker's job.
pub fn deserialize_proof(text: &str) -> Result<Proof, ProofFileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (line, header) = lines
        .next()
        .ok_or(ProofFileError::BadHeader { line: 1 })?;
    let header: HeaderDto = serde_json::from_str(header)
        .map_err(|_| ProofFileError::BadHeader { line })?;
    if header.format != FORMAT_NAME || header.version != FORMAT_VERSION {
        return Err(ProofFileError::BadHeader { line });
    }

    let mut steps = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (line, text) in lines {
        let dto: StepDto =
            serde_json::from_str(text).map_err(|e| ProofFileError::Malformed {
                line,
                detail: e.to_string(),
            })?;
        let rule = Rule::from_name(&dto.rule).ok_or_else(|| ProofFileError::UnknownRule {
            line,
            name: dto.rule.clone(),
        })?;
        let parse = |src: &str| {
            parse_raw_formula(src).map_err(|e| ProofFileError::BadFormula {
                line,
                detail: e.to_string(),
            })
        };
        let step = Step {
            id: dto.id,
            rule,
            deps: Deps {
                r: dto.deps.r,
                f: dto.deps.f,
                d: dto.deps.d,
            },
            add_r: dto
                .add_r
                .iter()
                .map(|e| Ok((e.id, parse(&e.fml)?)))
                .collect::<Result<Vec<_>, _>>()?,
            add_f: dto
                .add_f
                .iter()
                .map(|e| Ok((e.id, parse(&e.fml)?)))
                .collect::<Result<Vec<_>, _>>()?,
            add_d: dto
                .add_d
                .into_iter()
                .map(|e| {
                    let item = match e.payload {
                        SeoPayloadDto::Obj { class, name } => SeoItem::Obj { name, class },
                        SeoPayloadDto::Def { fml, lit } => SeoItem::Def {
                            lit,
                            formula: parse(&fml)?,
                        },
                    };
                    Ok((e.id, item))
                })
                .collect::<Result<Vec<_>, ProofFileError>>()?,
        };
        for dep in step
            .deps
            .r
            .iter()
            .chain(&step.deps.f)
            .chain(&step.deps.d)
        {
            if !seen.contains(dep) {
                return Err(ProofFileError::ForwardReference { line, id: *dep });
            }
        }
        for id in step.added_ids() {
            if !seen.insert(id) {
                return Err(ProofFileError::DuplicateId { line, id });
            }
        }
        steps.push(step);
    }
    Ok(Proof { steps })
}
