use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;

use crate::ingest::SecurityScheme;
use crate::preprocess::SanitationMap;
use crate::runtime::{LinkBinding, ResolvePlan};

pub const QUERY: &str = "Query";
pub const MUTATION: &str = "Mutation";
pub const BUILTIN_SCALARS: [&str; 5] = ["String", "Int", "Float", "Boolean", "ID"];

/// A type reference. `Named` may point at any type in the schema, including
/// the enclosing one, which is how recursive schemas stay finite.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeRef {
    Named(String),
    List(Box<TypeRef>),
    NonNull(Box<TypeRef>),
}

impl TypeRef {
    pub fn named(name: impl Into<String>) -> TypeRef {
        TypeRef::Named(name.into())
    }

    pub fn list(inner: TypeRef) -> TypeRef {
        TypeRef::List(Box::new(inner))
    }

    /// Wrap in NonNull unless already non-null.
    pub fn non_null(self) -> TypeRef {
        match self {
            TypeRef::NonNull(_) => self,
            other => TypeRef::NonNull(Box::new(other)),
        }
    }

    pub fn nullable(self) -> TypeRef {
        match self {
            TypeRef::NonNull(inner) => *inner,
            other => other,
        }
    }

    pub fn is_non_null(&self) -> bool {
        matches!(self, TypeRef::NonNull(_))
    }

    /// Name of the innermost named type.
    pub fn base_name(&self) -> &str {
        match self {
            TypeRef::Named(name) => name,
            TypeRef::List(inner) | TypeRef::NonNull(inner) => inner.base_name(),
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Named(name) => f.write_str(name),
            TypeRef::List(inner) => write!(f, "[{inner}]"),
            TypeRef::NonNull(inner) => write!(f, "{inner}!"),
        }
    }
}

impl Serialize for TypeRef {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TypeKind {
    Scalar,
    Enum,
    Object,
    InputObject,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputValue {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl InputValue {
    pub fn new(name: impl Into<String>, ty: TypeRef) -> Self {
        InputValue {
            name: name.into(),
            ty,
            description: None,
        }
    }
}

/// How a field gets its value at execution time. Fields without a resolver
/// are projected from the parent value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum Resolver {
    Operation(usize),
    Link(usize),
    Viewer(usize),
    Placeholder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: TypeRef,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<InputValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolver: Option<Resolver>,
}

impl Field {
    pub fn new(name: impl Into<String>, ty: TypeRef) -> Self {
        Field {
            name: name.into(),
            ty,
            args: Vec::new(),
            description: None,
            resolver: None,
        }
    }

    pub fn arg(&self, name: &str) -> Option<&InputValue> {
        self.args.iter().find(|a| a.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeDef {
    pub name: String,
    pub kind: TypeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fields: Vec<Field>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub input_fields: Vec<InputValue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub enum_values: Vec<String>,
}

impl TypeDef {
    pub fn new(name: impl Into<String>, kind: TypeKind) -> Self {
        TypeDef {
            name: name.into(),
            kind,
            description: None,
            fields: Vec::new(),
            input_fields: Vec::new(),
            enum_values: Vec::new(),
        }
    }

    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn input_field(&self, name: &str) -> Option<&InputValue> {
        self.input_fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum ViewerKind {
    ApiKey,
    BasicAuth,
    AnyAuth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RootSide {
    Query,
    Mutation,
}

impl RootSide {
    pub fn type_name(&self) -> &'static str {
        match self {
            RootSide::Query => QUERY,
            RootSide::Mutation => MUTATION,
        }
    }
}

/// One credential argument of a viewer and the scheme it feeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CredentialArg {
    pub arg: String,
    pub scheme: String,
    pub kind: ViewerKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViewerSpec {
    pub kind: ViewerKind,
    /// Security scheme name; `anyAuth` for the combined viewer.
    pub scheme_name: String,
    pub root_side: RootSide,
    pub field_name: String,
    pub type_name: String,
    pub args: Vec<InputValue>,
    /// For apiKey/basic viewers the arguments feed `scheme_name` directly;
    /// for anyAuth each entry names the argument carrying one scheme.
    pub credentials: Vec<CredentialArg>,
    pub wrapped_fields: Vec<String>,
}

/// The generated schema plus everything the executor needs to run it.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SchemaIR {
    /// Every named non-builtin type, including `Query` and `Mutation`.
    pub types: BTreeMap<String, TypeDef>,
    pub viewers: Vec<ViewerSpec>,
    pub plans: Vec<ResolvePlan>,
    pub links: Vec<LinkBinding>,
    #[serde(skip)]
    pub security_schemes: IndexMap<String, SecurityScheme>,
    #[serde(skip)]
    pub sanitation: SanitationMap,
}

impl SchemaIR {
    pub fn get(&self, name: &str) -> Option<&TypeDef> {
        self.types.get(name)
    }

    pub fn query_fields(&self) -> &[Field] {
        self.types.get(QUERY).map(|t| t.fields.as_slice()).unwrap_or(&[])
    }

    pub fn mutation_fields(&self) -> &[Field] {
        self.types.get(MUTATION).map(|t| t.fields.as_slice()).unwrap_or(&[])
    }

    pub fn has_mutation(&self) -> bool {
        self.types.contains_key(MUTATION)
    }

    pub fn is_builtin_scalar(name: &str) -> bool {
        BUILTIN_SCALARS.contains(&name)
    }

    pub fn kind_of(&self, name: &str) -> Option<TypeKind> {
        if Self::is_builtin_scalar(name) {
            return Some(TypeKind::Scalar);
        }
        self.types.get(name).map(|t| t.kind)
    }

    /// JSON dump of names, kinds and the field graph.
    pub fn debug_dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }
}
