use crate::error::{ErrorKind, GenerateError};
use crate::ingest::{OasDocument, SchemaObject};
use crate::preprocess::{classify, Direction, DictionaryEntry, EntryKind, Shape, TypesDictionary};

use super::ir::{Field, InputValue, TypeDef, TypeKind, TypeRef};

/// GraphQL type of a schema occurrence, plus the sanitation scope of the
/// object or enum it resolves to (looking through lists).
pub fn type_ref_for(
    doc: &OasDocument,
    dict: &TypesDictionary,
    schema: &SchemaObject,
    direction: Direction,
) -> Result<(TypeRef, Option<String>), GenerateError> {
    let classified = classify(doc, schema, "")?;
    let named = |kind: EntryKind| -> Result<(TypeRef, Option<String>), GenerateError> {
        let entry = dict.lookup(&classified.schema, kind, direction).ok_or_else(|| {
            GenerateError::new(ErrorKind::Internal, "schema missing from the types dictionary")
                .at(&classified.location)
        })?;
        Ok((TypeRef::named(&entry.name), Some(entry.name.clone())))
    };
    match &classified.shape {
        Shape::Scalar(scalar) => Ok((TypeRef::named(scalar.name()), None)),
        Shape::Fallback { .. } => Ok((TypeRef::named("String"), None)),
        Shape::List(items) => {
            let (inner, scope) = type_ref_for(doc, dict, items, direction)?;
            Ok((TypeRef::list(inner), scope))
        }
        Shape::Enum => named(EntryKind::Enum),
        Shape::Object => named(EntryKind::Object),
    }
}

/// Turn one dictionary entry into a named GraphQL type. Required properties
/// become non-null fields.
pub fn translate_schema(
    entry: &DictionaryEntry,
    doc: &OasDocument,
    dict: &TypesDictionary,
) -> Result<TypeDef, GenerateError> {
    let kind = match (entry.kind, entry.direction) {
        (EntryKind::Enum, _) => TypeKind::Enum,
        (EntryKind::Object, Direction::Output) => TypeKind::Object,
        (EntryKind::Object, Direction::Input) => TypeKind::InputObject,
    };
    let mut def = TypeDef::new(&entry.name, kind);
    def.description = entry.description.clone();
    match kind {
        TypeKind::Enum => def.enum_values = entry.values.iter().map(|v| v.name.clone()).collect(),
        _ => {
            for field in &entry.fields {
                let (ty, _) = type_ref_for(doc, dict, &field.schema, entry.direction)?;
                let ty = if field.required { ty.non_null() } else { ty };
                let description = field.schema.description.clone();
                if kind == TypeKind::Object {
                    def.fields.push(Field {
                        description,
                        ..Field::new(&field.name, ty)
                    });
                } else {
                    def.input_fields.push(InputValue {
                        name: field.name.clone(),
                        ty,
                        description,
                    });
                }
            }
        }
    }
    Ok(def)
}
