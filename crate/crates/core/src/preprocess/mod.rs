//! Types dictionary and name sanitation.

mod analysis;
mod dictionary;
mod sanitize;

pub use analysis::{
    analyze_operation, classify, BodyChoice, Classified, OperationShape, ResponseChoice, Scalar, Shape,
};
pub use dictionary::{
    build_types_dictionary, canonical_form, deep_equal, fingerprint, Direction, DictionaryEntry, EntryField,
    EntryKind, EnumValue, NameContext, NameOrigin, TypesDictionary, RESERVED_TYPE_NAMES,
};
pub use sanitize::{
    desanitize_tree, is_valid_name, lower_first, sanitize, sanitize_enum_value, sanitize_tree, upper_first, Casing,
    SanitationMap, Scope, ScopeId, ScopeKind,
};
