//! GraphQL schema IR, generation from the types dictionary, and SDL.

mod gen;
mod ir;
mod sdl;
mod translate;

pub use gen::{
    assemble_schema, attach_links, build_viewers, RootField, SchemaOptions, API_KEY_INPUT, BASIC_AUTH_INPUT,
    PLACEHOLDER_FIELD,
};
pub use ir::{
    CredentialArg, Field, InputValue, Resolver, RootSide, SchemaIR, TypeDef, TypeKind, TypeRef, ViewerKind,
    ViewerSpec, BUILTIN_SCALARS, MUTATION, QUERY,
};
pub use sdl::{parse_sdl, print_sdl};
pub use translate::{translate_schema, type_ref_for};
