use std::collections::BTreeSet;

use graphql_parser::query::{Directive, Selection, TypeCondition, Value as AstValue};

use crate::schema::{SchemaIR, TypeKind, TypeRef};

use super::coerce::ast_type;
use super::parse::{OperationKind, QueryDocument, Sel, VarDef};
use super::{GraphQLError, Pos};

const INTROSPECTION_HINT: &str =
    "Introspection is not supported; fetch the schema as SDL (GET /sdl or the generate command) instead.";

struct Validator<'a> {
    schema: &'a SchemaIR,
    doc: &'a QueryDocument,
    errors: Vec<GraphQLError>,
}

fn is_input_type(schema: &SchemaIR, name: &str) -> bool {
    SchemaIR::is_builtin_scalar(name)
        || matches!(schema.kind_of(name), Some(TypeKind::Enum | TypeKind::InputObject | TypeKind::Scalar))
}

/// Whether a variable of type `var` may be used where `loc` is expected.
fn compatible(var: &TypeRef, has_default: bool, loc: &TypeRef) -> bool {
    match (var, loc) {
        (TypeRef::NonNull(v), TypeRef::NonNull(l)) => compatible(v, false, l),
        (v, TypeRef::NonNull(l)) => has_default && compatible(v, false, l),
        (TypeRef::NonNull(v), l) => compatible(v, false, l),
        (TypeRef::List(v), TypeRef::List(l)) => compatible(v, false, l),
        (TypeRef::Named(v), TypeRef::Named(l)) => v == l,
        _ => false,
    }
}

impl<'a> Validator<'a> {
    fn error(&mut self, message: String, pos: Pos) {
        self.errors.push(GraphQLError::new(message).at(pos));
    }

    fn directives(&mut self, directives: &[Directive<'static, String>]) {
        for d in directives {
            self.error(
                format!("Directive \"@{}\" is not supported; directives cannot be used in queries.", d.name),
                d.position,
            );
        }
    }

    fn literal(&mut self, value: &AstValue<'static, String>, ty: &TypeRef, vars: &[VarDef], pos: Pos, what: &str) {
        if let AstValue::Variable(name) = value {
            match vars.iter().find(|v| &v.name == name) {
                None => self.error(format!("Variable \"${name}\" is not defined."), pos),
                Some(def) => {
                    let var_ty = ast_type(&def.var_type);
                    if !compatible(&var_ty, def.default_value.is_some(), ty) {
                        self.error(
                            format!("Variable \"${name}\" of type \"{var_ty}\" used in position expecting type \"{ty}\"."),
                            pos,
                        );
                    }
                }
            }
            return;
        }
        let bad = |this: &mut Self| this.error(format!("{what} has invalid value {value}; expected type \"{ty}\"."), pos);
        match ty {
            TypeRef::NonNull(inner) => {
                if matches!(value, AstValue::Null) {
                    bad(self);
                } else {
                    self.literal(value, inner, vars, pos, what);
                }
            }
            _ if matches!(value, AstValue::Null) => {}
            TypeRef::List(inner) => match value {
                AstValue::List(items) => {
                    for item in items {
                        self.literal(item, inner, vars, pos, what);
                    }
                }
                single => self.literal(single, inner, vars, pos, what),
            },
            TypeRef::Named(name) => {
                let ok = match (name.as_str(), value) {
                    ("Int", AstValue::Int(n)) => n.as_i64().is_some_and(|i| i32::try_from(i).is_ok()),
                    ("Float", AstValue::Int(_) | AstValue::Float(_)) => true,
                    ("String", AstValue::String(_)) => true,
                    ("Boolean", AstValue::Boolean(_)) => true,
                    ("ID", AstValue::String(_) | AstValue::Int(_)) => true,
                    ("Int" | "Float" | "String" | "Boolean" | "ID", _) => false,
                    (_, value) => match self.schema.get(name) {
                        Some(def) if def.kind == TypeKind::Enum => match value {
                            AstValue::Enum(v) => def.enum_values.contains(v),
                            _ => false,
                        },
                        Some(def) if def.kind == TypeKind::InputObject => match value {
                            AstValue::Object(fields) => {
                                let def = def.clone();
                                for (key, v) in fields {
                                    match def.input_field(key) {
                                        Some(f) => self.literal(v, &f.ty, vars, pos, what),
                                        None => self.error(
                                            format!("Field \"{key}\" is not defined by type \"{name}\"."),
                                            pos,
                                        ),
                                    }
                                }
                                for f in &def.input_fields {
                                    if f.ty.is_non_null() && !fields.contains_key(&f.name) {
                                        self.error(
                                            format!(
                                                "Field \"{name}.{}\" of required type \"{}\" was not provided.",
                                                f.name, f.ty
                                            ),
                                            pos,
                                        );
                                    }
                                }
                                true
                            }
                            _ => false,
                        },
                        _ => false,
                    },
                };
                if !ok {
                    bad(self);
                }
            }
        }
    }

    fn selection_set(&mut self, type_name: &str, set: &Sel, vars: &[VarDef], visited: &mut BTreeSet<String>) {
        for item in &set.items {
            match item {
                Selection::Field(field) => {
                    self.directives(&field.directives);
                    if field.name == "__typename" {
                        if !field.selection_set.items.is_empty() {
                            self.error("Field \"__typename\" must not have a selection.".into(), field.position);
                        }
                        continue;
                    }
                    if field.name.starts_with("__") {
                        self.error(INTROSPECTION_HINT.into(), field.position);
                        continue;
                    }
                    let Some(def) = self.schema.get(type_name).and_then(|t| t.field(&field.name)) else {
                        self.error(
                            format!("Cannot query field \"{}\" on type \"{type_name}\".", field.name),
                            field.position,
                        );
                        continue;
                    };
                    let def = def.clone();
                    for (name, value) in &field.arguments {
                        match def.arg(name) {
                            Some(arg) => {
                                let what = format!("Argument \"{name}\"");
                                self.literal(value, &arg.ty, vars, field.position, &what);
                            }
                            None => self.error(
                                format!("Unknown argument \"{name}\" on field \"{type_name}.{}\".", field.name),
                                field.position,
                            ),
                        }
                    }
                    for arg in def.args.iter().filter(|a| a.ty.is_non_null()) {
                        if !field.arguments.iter().any(|(n, _)| n == &arg.name) {
                            self.error(
                                format!(
                                    "Field \"{}\" argument \"{}\" of type \"{}\" is required, but it was not provided.",
                                    field.name, arg.name, arg.ty
                                ),
                                field.position,
                            );
                        }
                    }
                    let base = def.ty.base_name();
                    let composite = matches!(self.schema.kind_of(base), Some(TypeKind::Object));
                    match (composite, field.selection_set.items.is_empty()) {
                        (true, true) => self.error(
                            format!(
                                "Field \"{}\" of type \"{}\" must have a selection of subfields.",
                                field.name, def.ty
                            ),
                            field.position,
                        ),
                        (false, false) => self.error(
                            format!(
                                "Field \"{}\" must not have a selection since type \"{}\" has no subfields.",
                                field.name, def.ty
                            ),
                            field.position,
                        ),
                        (true, false) => self.selection_set(base, &field.selection_set, vars, visited),
                        (false, true) => {}
                    }
                }
                Selection::InlineFragment(fragment) => {
                    self.directives(&fragment.directives);
                    if let Some(TypeCondition::On(on)) = &fragment.type_condition {
                        if on != type_name {
                            self.error(
                                format!("Fragment on \"{on}\" cannot be spread within type \"{type_name}\"."),
                                fragment.position,
                            );
                            continue;
                        }
                    }
                    self.selection_set(type_name, &fragment.selection_set, vars, visited);
                }
                Selection::FragmentSpread(spread) => {
                    self.directives(&spread.directives);
                    let Some(fragment) = self.doc.fragment(&spread.fragment_name) else {
                        self.error(format!("Unknown fragment \"{}\".", spread.fragment_name), spread.position);
                        continue;
                    };
                    let TypeCondition::On(on) = &fragment.type_condition;
                    if on != type_name {
                        self.error(
                            format!(
                                "Fragment \"{}\" on \"{on}\" cannot be spread within type \"{type_name}\".",
                                spread.fragment_name
                            ),
                            spread.position,
                        );
                        continue;
                    }
                    let key = format!("{}@{type_name}", spread.fragment_name);
                    if visited.insert(key) {
                        self.directives(&fragment.directives);
                        self.selection_set(type_name, &fragment.selection_set, vars, visited);
                    }
                }
            }
        }
    }
}

/// Validate a document against the schema. An empty list means valid.
pub fn validate_query(doc: &QueryDocument, schema: &SchemaIR) -> Vec<GraphQLError> {
    let mut v = Validator {
        schema,
        doc,
        errors: Vec::new(),
    };
    for op in doc.operations() {
        if op.has_directives {
            v.error("Directives are not supported.".into(), op.position);
        }
        let root = match op.kind {
            OperationKind::Query => crate::schema::QUERY,
            OperationKind::Mutation => crate::schema::MUTATION,
        };
        if schema.get(root).is_none() {
            v.error(format!("Schema is not configured for {}.", root.to_lowercase()), op.position);
            continue;
        }
        let mut seen = BTreeSet::new();
        for var in op.variables {
            if !seen.insert(var.name.as_str()) {
                v.error(format!("There can be only one variable named \"${}\".", var.name), var.position);
            }
            let ty = ast_type(&var.var_type);
            if !is_input_type(schema, ty.base_name()) {
                v.error(
                    format!("Variable \"${}\" cannot be non-input type \"{ty}\".", var.name),
                    var.position,
                );
            }
        }
        v.selection_set(root, op.selection_set, op.variables, &mut BTreeSet::new());
    }
    v.errors
}
