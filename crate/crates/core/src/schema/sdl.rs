//! SDL printing, and parsing back into the IR for round-trip checks.

use std::fmt::Write;

use graphql_parser::schema::{self as ast, Definition, TypeDefinition};

use super::ir::{Field, InputValue, SchemaIR, TypeDef, TypeKind, TypeRef};

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn description(out: &mut String, indent: &str, text: &Option<String>) {
    if let Some(text) = text {
        let _ = writeln!(out, "{indent}{}", escape(text));
    }
}

fn input_value(out: &mut String, indent: &str, value: &InputValue) {
    description(out, indent, &value.description);
    let _ = writeln!(out, "{indent}{}: {}", value.name, value.ty);
}

fn field(out: &mut String, f: &Field) {
    description(out, "  ", &f.description);
    if f.args.is_empty() {
        let _ = writeln!(out, "  {}: {}", f.name, f.ty);
    } else if f.args.iter().any(|a| a.description.is_some()) {
        let _ = writeln!(out, "  {}(", f.name);
        for arg in &f.args {
            input_value(out, "    ", arg);
        }
        let _ = writeln!(out, "  ): {}", f.ty);
    } else {
        let args: Vec<String> = f.args.iter().map(|a| format!("{}: {}", a.name, a.ty)).collect();
        let _ = writeln!(out, "  {}({}): {}", f.name, args.join(", "), f.ty);
    }
}

/// Deterministic SDL: types sorted by name, fields in insertion order.
pub fn print_sdl(schema: &SchemaIR) -> String {
    let mut out = String::new();
    for def in schema.types.values() {
        if !out.is_empty() {
            out.push('\n');
        }
        description(&mut out, "", &def.description);
        match def.kind {
            TypeKind::Scalar => {
                let _ = writeln!(out, "scalar {}", def.name);
            }
            TypeKind::Enum => {
                let _ = writeln!(out, "enum {} {{", def.name);
                for value in &def.enum_values {
                    let _ = writeln!(out, "  {value}");
                }
                out.push_str("}\n");
            }
            TypeKind::Object => {
                let _ = writeln!(out, "type {} {{", def.name);
                for f in &def.fields {
                    field(&mut out, f);
                }
                out.push_str("}\n");
            }
            TypeKind::InputObject => {
                let _ = writeln!(out, "input {} {{", def.name);
                for value in &def.input_fields {
                    input_value(&mut out, "  ", value);
                }
                out.push_str("}\n");
            }
        }
    }
    out
}

fn type_ref(ty: &ast::Type<String>) -> TypeRef {
    match ty {
        ast::Type::NamedType(name) => TypeRef::Named(name.clone()),
        ast::Type::ListType(inner) => TypeRef::list(type_ref(inner)),
        ast::Type::NonNullType(inner) => TypeRef::NonNull(Box::new(type_ref(inner))),
    }
}

fn input(value: &ast::InputValue<String>) -> InputValue {
    InputValue {
        name: value.name.clone(),
        ty: type_ref(&value.value_type),
        description: value.description.clone(),
    }
}

/// Parse SDL into a schema holding only type definitions.
pub fn parse_sdl(text: &str) -> Result<SchemaIR, String> {
    let document = ast::parse_schema::<String>(text).map_err(|e| e.to_string())?;
    let mut schema = SchemaIR::default();
    for definition in document.definitions {
        let def = match definition {
            Definition::TypeDefinition(TypeDefinition::Object(o)) => {
                let mut def = TypeDef::new(&o.name, TypeKind::Object);
                def.description = o.description;
                def.fields = o
                    .fields
                    .iter()
                    .map(|f| Field {
                        args: f.arguments.iter().map(input).collect(),
                        description: f.description.clone(),
                        ..Field::new(&f.name, type_ref(&f.field_type))
                    })
                    .collect();
                def
            }
            Definition::TypeDefinition(TypeDefinition::InputObject(o)) => {
                let mut def = TypeDef::new(&o.name, TypeKind::InputObject);
                def.description = o.description;
                def.input_fields = o.fields.iter().map(input).collect();
                def
            }
            Definition::TypeDefinition(TypeDefinition::Enum(e)) => {
                let mut def = TypeDef::new(&e.name, TypeKind::Enum);
                def.description = e.description;
                def.enum_values = e.values.iter().map(|v| v.name.clone()).collect();
                def
            }
            Definition::TypeDefinition(TypeDefinition::Scalar(s)) => {
                let mut def = TypeDef::new(&s.name, TypeKind::Scalar);
                def.description = s.description;
                def
            }
            other => return Err(format!("unsupported definition: {other}")),
        };
        schema.types.insert(def.name.clone(), def);
    }
    Ok(schema)
}
