use std::collections::{HashMap, HashSet};

use crate::error::GenerateError;
use crate::ingest::{escape_pointer_token, HttpMethod, LinkTarget, OasDocument, ParamLocation, SecuritySchemeKind};
use crate::preprocess::{lower_first, sanitize, upper_first, TypesDictionary};
use crate::report::{Report, WarningKind};
use crate::runtime::{make_resolve_plan, parse_link_expression, LinkBinding, ParamIn, ResolvePlan};

use super::ir::{
    CredentialArg, Field, InputValue, Resolver, RootSide, SchemaIR, TypeDef, TypeKind, TypeRef, ViewerKind,
    ViewerSpec, MUTATION, QUERY,
};
use super::translate::translate_schema;

pub const API_KEY_INPUT: &str = "ApiKeyCredentialsInput";
pub const BASIC_AUTH_INPUT: &str = "BasicAuthCredentialsInput";
pub const PLACEHOLDER_FIELD: &str = "placeholder";

#[derive(Debug, Clone, Default)]
pub struct SchemaOptions {
    /// JsonPath of the bearer token inside the execution context.
    pub token_path: Option<String>,
}

/// A root field before it is placed at the root or inside viewers.
#[derive(Debug, Clone)]
pub struct RootField {
    pub side: RootSide,
    pub operation: usize,
    pub field: Field,
}

fn side_of(method: HttpMethod) -> RootSide {
    if method == HttpMethod::Get {
        RootSide::Query
    } else {
        RootSide::Mutation
    }
}

fn pick_name(dict: &mut TypesDictionary, scope: &str, raw: &str, candidates: Vec<String>) -> Option<String> {
    let first = candidates.first().cloned()?;
    let free = candidates
        .into_iter()
        .find(|c| !dict.sanitation.contains(scope, c))
        .unwrap_or(first);
    Some(dict.sanitation.register_mapping(scope, raw, &free))
}

fn root_field_name(doc: &OasDocument, dict: &mut TypesDictionary, plan: &ResolvePlan, side: RootSide) -> String {
    let op = &doc.operations[plan.operation_index];
    let casing = dict.casing;
    let mut candidates = Vec::new();
    if side == RootSide::Query {
        if let TypeRef::Named(name) = &plan.response.ty {
            if dict.entries.contains_key(name) {
                candidates.push(lower_first(name));
            }
        }
    }
    if let Some(id) = &op.operation_id {
        if let Ok(clean) = sanitize(id, casing) {
            candidates.push(clean);
        }
    }
    if let Ok(clean) = sanitize(&format!("{}{}", op.method.as_lower(), op.path), casing) {
        candidates.push(clean);
    }
    if candidates.is_empty() {
        candidates.push(format!("{}Operation", op.method.as_lower()));
    }
    pick_name(dict, side.type_name(), &op.pointer, candidates).expect("candidates are non-empty")
}

/// Add one field per resolvable link to the response type of the operation
/// declaring it. Returns the number of links attached.
pub fn attach_links(
    doc: &OasDocument,
    ir: &mut SchemaIR,
    dict: &mut TypesDictionary,
    report: &mut Report,
) -> Result<usize, GenerateError> {
    let plan_of: HashMap<usize, usize> = ir
        .plans
        .iter()
        .enumerate()
        .map(|(i, p)| (p.operation_index, i))
        .collect();
    let mut attached = 0;
    for source in 0..ir.plans.len() {
        let (op_index, status) = {
            let plan = &ir.plans[source];
            (plan.operation_index, plan.response.status.clone())
        };
        let op = &doc.operations[op_index];
        let Some(response) = op.responses.get(&status) else {
            continue;
        };
        for link in response.links.values() {
            let skip = |report: &mut Report, message: String| {
                report.record_warning(WarningKind::UnsupportedFeature, &link.pointer, message, "link skipped")
            };
            let target_op = match &link.target {
                LinkTarget::OperationId(id) => doc.operation_by_id(id),
                LinkTarget::OperationRef { method, path } => doc.operation_by_route(*method, path),
                LinkTarget::Unresolvable(_) => None,
            };
            let Some(target_op) = target_op else {
                skip(report, format!("link {} targets an operation that does not exist", link.name))?;
                continue;
            };
            let Some(&target) = plan_of.get(&target_op) else {
                skip(report, format!("link {} targets a skipped operation", link.name))?;
                continue;
            };
            let owner = ir.plans[source].response.scope.clone();
            let Some(owner) = owner.filter(|o| ir.types.get(o).map(|t| t.kind) == Some(TypeKind::Object)) else {
                skip(report, format!("link {} is declared on a response that is not an object", link.name))?;
                continue;
            };

            let target_plan = &ir.plans[target];
            let mut expressions = indexmap::IndexMap::new();
            let mut problem = None;
            for (param, text) in &link.parameters {
                let (location, name) = match param.split_once('.') {
                    Some((loc @ ("path" | "query" | "header"), name)) => (Some(loc), name),
                    _ => (None, param.as_str()),
                };
                let found = target_plan.params.values().find(|p| {
                    p.raw_name == name
                        && location.is_none_or(|loc| {
                            matches!(
                                (loc, p.location),
                                ("path", ParamIn::Path) | ("query", ParamIn::Query) | ("header", ParamIn::Header)
                            )
                        })
                });
                let Some(found) = found else {
                    problem = Some(format!("link {} sets unknown parameter {param:?}", link.name));
                    break;
                };
                match parse_link_expression(text) {
                    Ok(expr) => {
                        expressions.insert(found.raw_name.clone(), expr);
                    }
                    Err(message) => {
                        problem = Some(message);
                        break;
                    }
                }
            }
            if let Some(message) = problem {
                skip(report, message)?;
                continue;
            }

            let raw_key = format!("@link:{}", link.name);
            if dict.sanitation.forward(&owner, &raw_key).is_some() {
                continue;
            }
            let clean = sanitize(&link.name, dict.casing).map_err(|e| GenerateError::from(e).at(&link.pointer))?;
            let field_name = dict.sanitation.register_mapping(&owner, &raw_key, &lower_first(&clean));

            let parent_params: HashSet<&str> = ir.plans[source].params.values().map(|p| p.raw_name.as_str()).collect();
            let mut args = Vec::new();
            for param in target_plan.params.values() {
                if expressions.contains_key(&param.raw_name) {
                    continue;
                }
                let ty = if param.required && !parent_params.contains(param.raw_name.as_str()) {
                    param.ty.clone().non_null()
                } else {
                    param.ty.clone().nullable()
                };
                args.push(InputValue::new(&param.arg, ty));
            }
            if let Some(payload) = &target_plan.payload {
                args.push(InputValue::new(&payload.arg, payload.ty.clone()));
            }

            let index = ir.links.len();
            let field = Field {
                name: field_name.clone(),
                ty: target_plan.response.ty.clone().nullable(),
                args,
                description: link.description.clone(),
                resolver: Some(Resolver::Link(index)),
            };
            ir.links.push(LinkBinding {
                link_name: link.name.clone(),
                owner_type: owner.clone(),
                field_name: field_name.clone(),
                source_plan: source,
                target_plan: target,
                expressions,
                pointer: link.pointer.clone(),
            });
            ir.plans[source].link_bindings.insert(field_name, index);
            ir.types.get_mut(&owner).expect("owner type exists").fields.push(field);
            attached += 1;
        }
    }
    Ok(attached)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Capability {
    Viewer(ViewerKind),
    Token,
    Unsupported,
}

fn capability(doc: &OasDocument, scheme: &str) -> Capability {
    match doc.components.security_schemes.get(scheme).map(|s| &s.kind) {
        Some(SecuritySchemeKind::ApiKey { location, .. }) => match location {
            ParamLocation::Header | ParamLocation::Query => Capability::Viewer(ViewerKind::ApiKey),
            _ => Capability::Unsupported,
        },
        Some(SecuritySchemeKind::Basic) => Capability::Viewer(ViewerKind::BasicAuth),
        Some(SecuritySchemeKind::Bearer) => Capability::Token,
        _ => Capability::Unsupported,
    }
}

/// Group secured fields into viewers. Returns the viewers and the fields
/// that stay at the root.
pub fn build_viewers(
    doc: &OasDocument,
    fields: Vec<RootField>,
    dict: &mut TypesDictionary,
    report: &mut Report,
) -> Result<(Vec<(ViewerSpec, TypeDef)>, Vec<RootField>), GenerateError> {
    let mut warned: HashSet<String> = HashSet::new();
    let mut at_root = Vec::new();
    // (side, scheme) -> wrapped fields; scheme order follows components.
    let mut grouped: HashMap<(RootSide, String), Vec<Field>> = HashMap::new();
    for root in fields {
        let op = &doc.operations[root.operation];
        let mut schemes = Vec::new();
        for scheme in &op.security {
            match capability(doc, scheme) {
                Capability::Viewer(_) => schemes.push(scheme.clone()),
                Capability::Token => {}
                Capability::Unsupported => {
                    if warned.insert(scheme.clone()) {
                        report.record_warning(
                            WarningKind::UnsupportedFeature,
                            format!("/components/securitySchemes/{}", escape_pointer_token(scheme)),
                            format!("security scheme {scheme} cannot be provided through a viewer"),
                            "no viewer generated for this scheme",
                        )?;
                    }
                }
            }
        }
        if schemes.is_empty() {
            at_root.push(root);
            continue;
        }
        for scheme in schemes.into_iter().chain(std::iter::once(String::new())) {
            grouped.entry((root.side, scheme)).or_default().push(root.field.clone());
        }
    }

    let mut viewers = Vec::new();
    for side in [RootSide::Query, RootSide::Mutation] {
        let scheme_names: Vec<&String> = doc
            .components
            .security_schemes
            .keys()
            .filter(|s| grouped.contains_key(&(side, (*s).clone())))
            .collect();
        if scheme_names.is_empty() {
            continue;
        }
        let (field_prefix, type_prefix) = match side {
            RootSide::Query => ("viewer", "Viewer"),
            RootSide::Mutation => ("mutationViewer", "MutationViewer"),
        };
        let mut any_args = Vec::new();
        let mut credentials = Vec::new();
        for scheme in &scheme_names {
            let Capability::Viewer(kind) = capability(doc, scheme) else {
                continue;
            };
            let suffix = upper_first(&sanitize(scheme, dict.casing).unwrap_or_else(|_| "Scheme".into()));
            let args = match kind {
                ViewerKind::ApiKey => vec![InputValue::new("apiKey", TypeRef::named("String").non_null())],
                _ => vec![
                    InputValue::new("username", TypeRef::named("String").non_null()),
                    InputValue::new("password", TypeRef::named("String").non_null()),
                ],
            };
            let wrapped = grouped.remove(&(side, (*scheme).clone())).unwrap_or_default();
            viewers.push(viewer(
                dict,
                side,
                kind,
                scheme,
                &format!("{field_prefix}{suffix}"),
                &format!("{type_prefix}{suffix}"),
                args,
                Vec::new(),
                wrapped,
            ));
            let mut arg_name = lower_first(&suffix);
            while any_args.iter().any(|a: &InputValue| a.name == arg_name) {
                arg_name.push('_');
            }
            let input = if kind == ViewerKind::ApiKey { API_KEY_INPUT } else { BASIC_AUTH_INPUT };
            any_args.push(InputValue::new(&arg_name, TypeRef::named(input)));
            credentials.push(CredentialArg {
                arg: arg_name,
                scheme: (*scheme).clone(),
                kind,
            });
        }
        let wrapped = grouped.remove(&(side, String::new())).unwrap_or_default();
        viewers.push(viewer(
            dict,
            side,
            ViewerKind::AnyAuth,
            "anyAuth",
            &format!("{field_prefix}AnyAuth"),
            &format!("{type_prefix}AnyAuth"),
            any_args,
            credentials,
            wrapped,
        ));
    }
    Ok((viewers, at_root))
}

#[allow(clippy::too_many_arguments)]
fn viewer(
    dict: &mut TypesDictionary,
    side: RootSide,
    kind: ViewerKind,
    scheme: &str,
    field_base: &str,
    type_base: &str,
    args: Vec<InputValue>,
    credentials: Vec<CredentialArg>,
    wrapped: Vec<Field>,
) -> (ViewerSpec, TypeDef) {
    let type_name = dict.claim_name(type_base);
    let field_name = dict
        .sanitation
        .register_mapping(side.type_name(), &format!("@viewer:{scheme}"), field_base);
    let mut def = TypeDef::new(&type_name, TypeKind::Object);
    def.description = Some(match kind {
        ViewerKind::AnyAuth => "Operations reachable with any combination of the supported credentials".to_string(),
        _ => format!("Operations secured by {scheme}"),
    });
    def.fields = wrapped;
    let spec = ViewerSpec {
        kind,
        scheme_name: scheme.to_string(),
        root_side: side,
        field_name,
        type_name,
        args,
        credentials,
        wrapped_fields: def.fields.iter().map(|f| f.name.clone()).collect(),
    };
    (spec, def)
}

fn credential_inputs(viewers: &[ViewerSpec]) -> Vec<TypeDef> {
    let mut defs = Vec::new();
    let used = |kind: ViewerKind| {
        viewers
            .iter()
            .any(|v| v.kind == ViewerKind::AnyAuth && v.credentials.iter().any(|c| c.kind == kind))
    };
    if used(ViewerKind::ApiKey) {
        let mut def = TypeDef::new(API_KEY_INPUT, TypeKind::InputObject);
        def.input_fields = vec![InputValue::new("apiKey", TypeRef::named("String").non_null())];
        defs.push(def);
    }
    if used(ViewerKind::BasicAuth) {
        let mut def = TypeDef::new(BASIC_AUTH_INPUT, TypeKind::InputObject);
        def.input_fields = vec![
            InputValue::new("username", TypeRef::named("String").non_null()),
            InputValue::new("password", TypeRef::named("String").non_null()),
        ];
        defs.push(def);
    }
    defs
}

/// Build the whole schema from an analyzed dictionary.
pub fn assemble_schema(
    doc: &OasDocument,
    mut dict: TypesDictionary,
    report: &mut Report,
    options: &SchemaOptions,
) -> Result<SchemaIR, GenerateError> {
    let mut ir = SchemaIR::default();
    for entry in dict.entries.values() {
        let def = translate_schema(entry, doc, &dict)?;
        ir.types.insert(def.name.clone(), def);
    }

    let shapes: Vec<_> = dict.operations.iter().flatten().cloned().collect();
    let mut pending = Vec::with_capacity(shapes.len());
    for shape in &shapes {
        let (plan, args) = make_resolve_plan(doc, shape, &mut dict, options.token_path.as_deref())?;
        let op = &doc.operations[shape.index];
        let side = side_of(op.method);
        let name = root_field_name(doc, &mut dict, &plan, side);
        let field = Field {
            name,
            ty: plan.response.ty.clone().nullable(),
            args,
            description: op.summary.clone().or_else(|| op.description.clone()),
            resolver: Some(Resolver::Operation(ir.plans.len())),
        };
        ir.plans.push(plan);
        pending.push(RootField {
            side,
            operation: shape.index,
            field,
        });
    }

    let links = attach_links(doc, &mut ir, &mut dict, report)?;
    let (viewers, at_root) = build_viewers(doc, pending, &mut dict, report)?;

    let mut query = TypeDef::new(QUERY, TypeKind::Object);
    let mut mutation = TypeDef::new(MUTATION, TypeKind::Object);
    for root in at_root {
        match root.side {
            RootSide::Query => query.fields.push(root.field),
            RootSide::Mutation => mutation.fields.push(root.field),
        }
    }
    for (index, (spec, def)) in viewers.into_iter().enumerate() {
        let field = Field {
            name: spec.field_name.clone(),
            ty: TypeRef::named(&spec.type_name),
            args: spec.args.clone(),
            description: def.description.clone(),
            resolver: Some(Resolver::Viewer(index)),
        };
        match spec.root_side {
            RootSide::Query => query.fields.push(field),
            RootSide::Mutation => mutation.fields.push(field),
        }
        ir.types.insert(def.name.clone(), def);
        ir.viewers.push(spec);
    }
    for def in credential_inputs(&ir.viewers) {
        ir.types.insert(def.name.clone(), def);
    }
    if query.fields.is_empty() {
        let mut field = Field::new(PLACEHOLDER_FIELD, TypeRef::named("String"));
        field.description = Some("The API has no query operations; this field is inert and always null.".into());
        field.resolver = Some(Resolver::Placeholder);
        query.fields.push(field);
    }
    ir.types.insert(QUERY.into(), query);
    if !mutation.fields.is_empty() {
        ir.types.insert(MUTATION.into(), mutation);
    }

    report.stats.operations_total = doc.operations.len();
    report.stats.operations_skipped = dict.operations.iter().filter(|s| s.is_none()).count();
    report.stats.types_created = ir.types.len() - 1 - usize::from(ir.has_mutation());
    report.stats.links_attached = links;
    report.stats.viewers_created = ir.viewers.len();

    ir.security_schemes = doc.components.security_schemes.clone();
    ir.sanitation = dict.sanitation;
    Ok(ir)
}
