use graphql_parser::query::{Type, Value as AstValue};
use serde_json::{Map, Number, Value};

use crate::schema::{Field, SchemaIR, TypeKind, TypeRef};

use super::parse::VarDef;
use super::GraphQLError;

pub(crate) fn ast_type(ty: &Type<'static, String>) -> TypeRef {
    match ty {
        Type::NamedType(name) => TypeRef::named(name.clone()),
        Type::ListType(inner) => TypeRef::list(ast_type(inner)),
        Type::NonNullType(inner) => TypeRef::NonNull(Box::new(ast_type(inner))),
    }
}

/// Convert an AST literal to JSON. `None` means a variable that was not
/// provided, which counts as an absent value.
pub(crate) fn ast_to_json(value: &AstValue<'static, String>, vars: &Map<String, Value>) -> Option<Value> {
    Some(match value {
        AstValue::Variable(name) => return vars.get(name).cloned(),
        AstValue::Int(n) => n.as_i64().map(Value::from).unwrap_or(Value::Null),
        AstValue::Float(f) => Number::from_f64(*f).map(Value::Number).unwrap_or(Value::Null),
        AstValue::String(s) => Value::String(s.clone()),
        AstValue::Boolean(b) => Value::Bool(*b),
        AstValue::Null => Value::Null,
        AstValue::Enum(name) => Value::String(name.clone()),
        AstValue::List(items) => Value::Array(items.iter().map(|v| ast_to_json(v, vars).unwrap_or(Value::Null)).collect()),
        AstValue::Object(fields) => Value::Object(
            fields
                .iter()
                .filter_map(|(k, v)| ast_to_json(v, vars).map(|v| (k.clone(), v)))
                .collect(),
        ),
    })
}

/// Coerce a JSON input value to a schema input type.
pub fn coerce_input(value: &Value, ty: &TypeRef, schema: &SchemaIR) -> Result<Value, String> {
    match ty {
        TypeRef::NonNull(inner) => {
            if value.is_null() {
                return Err(format!("Expected non-nullable type \"{ty}\" not to be null."));
            }
            coerce_input(value, inner, schema)
        }
        _ if value.is_null() => Ok(Value::Null),
        TypeRef::List(inner) => match value {
            Value::Array(items) => items
                .iter()
                .map(|item| coerce_input(item, inner, schema))
                .collect::<Result<Vec<_>, _>>()
                .map(Value::Array),
            single => Ok(Value::Array(vec![coerce_input(single, inner, schema)?])),
        },
        TypeRef::Named(name) => coerce_named(value, name, schema),
    }
}

fn coerce_named(value: &Value, name: &str, schema: &SchemaIR) -> Result<Value, String> {
    let invalid = || format!("{name} cannot represent value {value}");
    match name {
        "Int" => match value.as_i64() {
            Some(i) if i32::try_from(i).is_ok() => Ok(value.clone()),
            _ => Err(invalid()),
        },
        "Float" => match value {
            Value::Number(_) => Ok(value.clone()),
            _ => Err(invalid()),
        },
        "String" => match value {
            Value::String(_) => Ok(value.clone()),
            _ => Err(invalid()),
        },
        "Boolean" => match value {
            Value::Bool(_) => Ok(value.clone()),
            _ => Err(invalid()),
        },
        "ID" => match value {
            Value::String(_) => Ok(value.clone()),
            Value::Number(n) if n.is_i64() || n.is_u64() => Ok(Value::String(n.to_string())),
            _ => Err(invalid()),
        },
        _ => {
            let def = schema.get(name).ok_or_else(|| format!("Unknown type \"{name}\"."))?;
            match def.kind {
                TypeKind::Enum => match value {
                    Value::String(s) if def.enum_values.contains(s) => Ok(value.clone()),
                    _ => Err(format!("Value {value} does not exist in \"{name}\" enum.")),
                },
                TypeKind::InputObject => {
                    let Value::Object(fields) = value else {
                        return Err(format!("Expected type \"{name}\" to be an object."));
                    };
                    if let Some(unknown) = fields.keys().find(|k| def.input_field(k).is_none()) {
                        return Err(format!("Field \"{unknown}\" is not defined by type \"{name}\"."));
                    }
                    let mut out = Map::new();
                    for field in &def.input_fields {
                        match fields.get(&field.name) {
                            Some(v) => {
                                let coerced = coerce_input(v, &field.ty, schema)
                                    .map_err(|e| format!("In field \"{}\": {e}", field.name))?;
                                out.insert(field.name.clone(), coerced);
                            }
                            None if field.ty.is_non_null() => {
                                return Err(format!(
                                    "Field \"{name}.{}\" of required type \"{}\" was not provided.",
                                    field.name, field.ty
                                ))
                            }
                            None => {}
                        }
                    }
                    Ok(Value::Object(out))
                }
                _ => Err(format!("Type \"{name}\" is not an input type.")),
            }
        }
    }
}

/// Coerce provided variable values against their definitions, applying
/// defaults and enforcing non-null types.
pub fn coerce_variables(
    defs: &[VarDef],
    provided: &Map<String, Value>,
    schema: &SchemaIR,
) -> Result<Map<String, Value>, Vec<GraphQLError>> {
    let mut out = Map::new();
    let mut errors = Vec::new();
    for def in defs {
        let ty = ast_type(&def.var_type);
        let value = match provided.get(&def.name) {
            Some(v) => Some(v.clone()),
            None => def.default_value.as_ref().and_then(|d| ast_to_json(d, &Map::new())),
        };
        match value {
            Some(value) => match coerce_input(&value, &ty, schema) {
                Ok(v) => {
                    out.insert(def.name.clone(), v);
                }
                Err(e) => errors.push(
                    GraphQLError::new(format!("Variable \"${}\" got invalid value {value}; {e}", def.name))
                        .at(def.position),
                ),
            },
            None if ty.is_non_null() => errors.push(
                GraphQLError::new(format!(
                    "Variable \"${}\" of required type \"{ty}\" was not provided.",
                    def.name
                ))
                .at(def.position),
            ),
            None => {}
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Resolve and coerce the arguments of one field selection.
pub(crate) fn coerce_arguments(
    field: &Field,
    arguments: &[(String, AstValue<'static, String>)],
    vars: &Map<String, Value>,
    schema: &SchemaIR,
) -> Result<Map<String, Value>, String> {
    let mut out = Map::new();
    for arg in &field.args {
        let value = arguments
            .iter()
            .find(|(name, _)| name == &arg.name)
            .and_then(|(_, v)| ast_to_json(v, vars));
        match value {
            Some(v) => {
                let coerced = coerce_input(&v, &arg.ty, schema).map_err(|e| format!("Argument \"{}\": {e}", arg.name))?;
                out.insert(arg.name.clone(), coerced);
            }
            None if arg.ty.is_non_null() => {
                return Err(format!(
                    "Argument \"{}\" of required type \"{}\" was not provided.",
                    arg.name, arg.ty
                ))
            }
            None => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::parse_query;
    use crate::schema::{InputValue, TypeDef};
    use serde_json::json;

    fn schema() -> SchemaIR {
        let mut ir = SchemaIR::default();
        let mut order = TypeDef::new("Order", TypeKind::Enum);
        order.enum_values = vec!["asc".into(), "desc".into()];
        let mut input = TypeDef::new("UserInput", TypeKind::InputObject);
        input.input_fields = vec![
            InputValue::new("name", TypeRef::named("String").non_null()),
            InputValue::new("age", TypeRef::named("Int")),
        ];
        ir.types.insert("Order".into(), order);
        ir.types.insert("UserInput".into(), input);
        ir
    }

    fn vars(query: &str, provided: Value) -> Result<Map<String, Value>, Vec<GraphQLError>> {
        let doc = parse_query(query).unwrap();
        let op = doc.operation(None).unwrap();
        coerce_variables(op.variables, provided.as_object().unwrap(), &schema())
    }

    #[test]
    fn variable_examples() {
        assert_eq!(vars("query($n: Int) { a }", json!({"n": 3})).unwrap()["n"], json!(3));
        assert!(vars("query($s: String!) { a }", json!({})).is_err());
        assert_eq!(vars("query($o: Order) { a }", json!({"o": "asc"})).unwrap()["o"], json!("asc"));
        assert!(vars("query($o: Order) { a }", json!({"o": "up"})).is_err());
        assert_eq!(vars("query($f: Float) { a }", json!({"f": 2})).unwrap()["f"], json!(2));
        assert_eq!(vars("query($n: Int = 5) { a }", json!({})).unwrap()["n"], json!(5));
        assert!(vars("query($n: Int) { a }", json!({})).unwrap().get("n").is_none());
    }

    #[test]
    fn input_objects_and_lists() {
        let ir = schema();
        let ty = TypeRef::named("UserInput");
        assert_eq!(coerce_input(&json!({"name": "a"}), &ty, &ir), Ok(json!({"name": "a"})));
        assert!(coerce_input(&json!({"age": 1}), &ty, &ir).is_err());
        assert!(coerce_input(&json!({"name": "a", "x": 1}), &ty, &ir).is_err());
        let list = TypeRef::list(TypeRef::named("Int"));
        assert_eq!(coerce_input(&json!(1), &list, &ir), Ok(json!([1])));
        assert!(coerce_input(&json!(1u64 << 40), &TypeRef::named("Int"), &ir).is_err());
    }
}
