use std::collections::HashSet;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use futures::future::{join_all, BoxFuture, FutureExt};
use graphql_parser::query::{Field as AstField, Selection, TypeCondition};
use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::{Map, Value};
use tokio::sync::Semaphore;

use crate::runtime::{
    bind_runtime, coerce_leaf, eval_link_expression, execute_request, inject_auth, shape_response, Credential,
    ExecutionContext, RuntimeError, Upstream, DEFAULT_TIMEOUT,
};
use crate::schema::{Resolver, SchemaIR, TypeKind, TypeRef, ViewerKind, ViewerSpec, MUTATION, QUERY};

use super::coerce::{coerce_arguments, coerce_variables};
use super::parse::{OperationKind, QueryDocument, Sel};
use super::validate::validate_query;
use super::{parse_query, ExecutionResult, GraphQLError, PathSegment, Pos};

type Ast = AstField<'static, String>;
type Fields<'a> = IndexMap<String, Vec<&'a Ast>>;

#[derive(Debug, Clone)]
pub struct ExecOptions {
    pub timeout: Duration,
    /// Upper bound on concurrent upstream requests within one query.
    pub parallelism: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            timeout: DEFAULT_TIMEOUT,
            parallelism: 8,
        }
    }
}

/// Executes queries against one immutable schema. Cheap to share.
#[derive(Clone)]
pub struct Engine {
    schema: Arc<SchemaIR>,
    upstream: Arc<dyn Upstream>,
    options: ExecOptions,
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct GraphQLRequest {
    pub query: String,
    #[serde(default)]
    pub variables: Option<Map<String, Value>>,
    #[serde(default, rename = "operationName")]
    pub operation_name: Option<String>,
}

struct Frame {
    value: Value,
    raw: Value,
    ctx: ExecutionContext,
}

struct Run<'a> {
    schema: &'a SchemaIR,
    engine: &'a Engine,
    doc: &'a QueryDocument,
    vars: Map<String, Value>,
    errors: Mutex<Vec<GraphQLError>>,
    permits: Semaphore,
}

fn extend(path: &[PathSegment], segment: PathSegment) -> Vec<PathSegment> {
    let mut next = path.to_vec();
    next.push(segment);
    next
}

fn viewer_credentials(spec: &ViewerSpec, args: &Map<String, Value>) -> Vec<(String, Credential)> {
    let text = |obj: &Map<String, Value>, key: &str| obj.get(key).and_then(Value::as_str).map(str::to_string);
    let credential = |kind: ViewerKind, obj: &Map<String, Value>| match kind {
        ViewerKind::ApiKey => text(obj, "apiKey").map(Credential::ApiKey),
        _ => Some(Credential::Basic {
            username: text(obj, "username")?,
            password: text(obj, "password")?,
        }),
    };
    match spec.kind {
        ViewerKind::AnyAuth => spec
            .credentials
            .iter()
            .filter_map(|c| {
                let obj = args.get(&c.arg)?.as_object()?;
                Some((c.scheme.clone(), credential(c.kind, obj)?))
            })
            .collect(),
        kind => credential(kind, args)
            .map(|c| vec![(spec.scheme_name.clone(), c)])
            .unwrap_or_default(),
    }
}

impl<'a> Run<'a> {
    fn record(&self, message: impl Into<String>, pos: Pos, path: &[PathSegment]) {
        let error = GraphQLError::new(message).at(pos).with_path(path.to_vec());
        self.errors.lock().expect("error list").push(error);
    }

    fn collect(&self, type_name: &str, set: &'a Sel, out: &mut Fields<'a>, visited: &mut HashSet<&'a str>) {
        for item in &set.items {
            match item {
                Selection::Field(field) => {
                    let key = field.alias.clone().unwrap_or_else(|| field.name.clone());
                    out.entry(key).or_default().push(field);
                }
                Selection::InlineFragment(fragment) => {
                    let applies = match &fragment.type_condition {
                        Some(TypeCondition::On(on)) => on == type_name,
                        None => true,
                    };
                    if applies {
                        self.collect(type_name, &fragment.selection_set, out, visited);
                    }
                }
                Selection::FragmentSpread(spread) => {
                    if !visited.insert(spread.fragment_name.as_str()) {
                        continue;
                    }
                    if let Some(fragment) = self.doc.fragment(&spread.fragment_name) {
                        let TypeCondition::On(on) = &fragment.type_condition;
                        if on == type_name {
                            self.collect(type_name, &fragment.selection_set, out, visited);
                        }
                    }
                }
            }
        }
    }

    fn subfields(&self, type_name: &str, fields: &[&'a Ast]) -> Fields<'a> {
        let mut out = IndexMap::new();
        let mut visited = HashSet::new();
        for field in fields {
            self.collect(type_name, &field.selection_set, &mut out, &mut visited);
        }
        out
    }

    fn execute_set(
        &'a self,
        type_name: &'a str,
        fields: Fields<'a>,
        frame: Arc<Frame>,
        path: Vec<PathSegment>,
        serial: bool,
    ) -> BoxFuture<'a, Result<Map<String, Value>, ()>> {
        async move {
            let mut results = Vec::with_capacity(fields.len());
            if serial {
                for (key, nodes) in fields {
                    let value = self.resolve_field(type_name, &key, nodes, frame.clone(), &path).await;
                    results.push((key, value));
                }
            } else {
                let futures = fields.into_iter().map(|(key, nodes)| {
                    let frame = frame.clone();
                    let path = &path;
                    async move {
                        let value = self.resolve_field(type_name, &key, nodes, frame, path).await;
                        (key, value)
                    }
                });
                results = join_all(futures).await;
            }
            let mut out = Map::new();
            let mut failed = false;
            for (key, value) in results {
                match value {
                    Ok(v) => {
                        out.insert(key, v);
                    }
                    Err(()) => failed = true,
                }
            }
            if failed {
                Err(())
            } else {
                Ok(out)
            }
        }
        .boxed()
    }

    async fn call(
        &self,
        plan_index: usize,
        args: &Map<String, Value>,
        link_values: &Map<String, Value>,
        ctx: &ExecutionContext,
    ) -> Result<(Value, Value, ExecutionContext), RuntimeError> {
        let plan = &self.schema.plans[plan_index];
        let (spec, sent) = bind_runtime(plan, args, link_values, ctx, &self.schema.sanitation)?;
        let spec = inject_auth(spec, plan, ctx, &self.schema.security_schemes)?;
        let response = {
            let _permit = self.permits.acquire().await.map_err(|e| RuntimeError::Network(e.to_string()))?;
            execute_request(self.engine.upstream.as_ref(), &spec, self.engine.options.timeout).await?
        };
        let shaped = shape_response(&response, &plan.response, &self.schema.sanitation)?;
        Ok((shaped.value, shaped.raw, ctx.with_params(&sent)))
    }

    async fn resolve_field(
        &'a self,
        type_name: &'a str,
        key: &str,
        nodes: Vec<&'a Ast>,
        frame: Arc<Frame>,
        path: &[PathSegment],
    ) -> Result<Value, ()> {
        let node = nodes[0];
        let path = extend(path, PathSegment::Key(key.to_string()));
        if node.name == "__typename" {
            return Ok(Value::String(type_name.to_string()));
        }
        let Some(def) = self.schema.get(type_name).and_then(|t| t.field(&node.name)) else {
            self.record(format!("Cannot query field \"{}\" on type \"{type_name}\".", node.name), node.position, &path);
            return Err(());
        };
        let fail = |message: String| {
            self.record(message, node.position, &path);
            if def.ty.is_non_null() {
                Err(())
            } else {
                Ok(Value::Null)
            }
        };
        let args = match coerce_arguments(def, &node.arguments, &self.vars, self.schema) {
            Ok(args) => args,
            Err(e) => return fail(e),
        };
        let resolved = match def.resolver {
            Some(Resolver::Operation(i)) => self.call(i, &args, &Map::new(), &frame.ctx).await,
            Some(Resolver::Link(i)) => {
                let link = &self.schema.links[i];
                let mut link_values = Map::new();
                let mut outcome = Ok(());
                for (param, expr) in &link.expressions {
                    match eval_link_expression(expr, &frame.raw, &frame.ctx.used_params) {
                        Ok(v) => {
                            link_values.insert(param.clone(), v);
                        }
                        Err(e) => {
                            outcome = Err(e);
                            break;
                        }
                    }
                }
                match outcome {
                    Ok(()) => self.call(link.target_plan, &args, &link_values, &frame.ctx).await,
                    Err(e) => Err(e),
                }
            }
            Some(Resolver::Viewer(i)) => {
                let spec = &self.schema.viewers[i];
                let ctx = frame.ctx.with_credentials(viewer_credentials(spec, &args));
                Ok((Value::Object(Map::new()), Value::Null, ctx))
            }
            Some(Resolver::Placeholder) => Ok((Value::Null, Value::Null, frame.ctx.clone())),
            None => {
                let value = frame.value.get(&def.name).cloned().unwrap_or(Value::Null);
                let raw_key = self.schema.sanitation.reverse(type_name, &def.name).unwrap_or(&def.name);
                let raw = frame.raw.get(raw_key).cloned().unwrap_or(Value::Null);
                Ok((value, raw, frame.ctx.clone()))
            }
        };
        let (value, raw, ctx) = match resolved {
            Ok(r) => r,
            Err(e) => return fail(e.to_string()),
        };
        let label = format!("{type_name}.{}", def.name);
        self.complete(&def.ty, value, raw, ctx, Arc::new(nodes), path, Arc::new(label))
            .await
    }

    #[allow(clippy::too_many_arguments)]
    fn complete(
        &'a self,
        ty: &'a TypeRef,
        value: Value,
        raw: Value,
        ctx: ExecutionContext,
        nodes: Arc<Vec<&'a Ast>>,
        path: Vec<PathSegment>,
        label: Arc<String>,
    ) -> BoxFuture<'a, Result<Value, ()>> {
        async move {
            let pos = nodes[0].position;
            match ty {
                TypeRef::NonNull(inner) => {
                    let value = self.complete_inner(inner, value, raw, ctx, nodes, path.clone(), label.clone()).await?;
                    if value.is_null() {
                        self.record(format!("Cannot return null for non-nullable field {label}."), pos, &path);
                        return Err(());
                    }
                    Ok(value)
                }
                _ => Ok(self
                    .complete_inner(ty, value, raw, ctx, nodes, path, label)
                    .await
                    .unwrap_or(Value::Null)),
            }
        }
        .boxed()
    }

    #[allow(clippy::too_many_arguments)]
    async fn complete_inner(
        &'a self,
        ty: &'a TypeRef,
        value: Value,
        raw: Value,
        ctx: ExecutionContext,
        nodes: Arc<Vec<&'a Ast>>,
        path: Vec<PathSegment>,
        label: Arc<String>,
    ) -> Result<Value, ()> {
        if value.is_null() {
            return Ok(Value::Null);
        }
        let pos = nodes[0].position;
        match ty {
            TypeRef::NonNull(_) => self.complete(ty, value, raw, ctx, nodes, path, label).await,
            TypeRef::List(inner) => {
                let Value::Array(items) = value else {
                    self.record(format!("Expected a list for field {label}."), pos, &path);
                    return Err(());
                };
                let raws = match raw {
                    Value::Array(raws) => raws,
                    _ => Vec::new(),
                };
                let futures = items.into_iter().enumerate().map(|(i, item)| {
                    let raw = raws.get(i).cloned().unwrap_or(Value::Null);
                    let path = extend(&path, PathSegment::Index(i));
                    self.complete(inner, item, raw, ctx.clone(), nodes.clone(), path, label.clone())
                });
                join_all(futures).await.into_iter().collect::<Result<Vec<_>, _>>().map(Value::Array)
            }
            TypeRef::Named(name) => {
                let kind = if SchemaIR::is_builtin_scalar(name) {
                    Some(TypeKind::Scalar)
                } else {
                    self.schema.kind_of(name)
                };
                match kind {
                    Some(TypeKind::Object) => {
                        if !value.is_object() {
                            self.record(format!("Expected an object for field {label}, got {value}."), pos, &path);
                            return Err(());
                        }
                        let fields = self.subfields(name, &nodes);
                        let frame = Arc::new(Frame { value, raw, ctx });
                        self.execute_set(name, fields, frame, path, false).await.map(Value::Object)
                    }
                    Some(kind) => match coerce_leaf(&value, name, kind == TypeKind::Enum) {
                        Ok(v) => Ok(v),
                        Err(message) => {
                            self.record(message, pos, &path);
                            Err(())
                        }
                    },
                    None => {
                        self.record(format!("Unknown type \"{name}\"."), pos, &path);
                        Err(())
                    }
                }
            }
        }
    }
}

impl Engine {
    pub fn new(schema: Arc<SchemaIR>, upstream: Arc<dyn Upstream>, options: ExecOptions) -> Self {
        Engine {
            schema,
            upstream,
            options,
        }
    }

    pub fn schema(&self) -> &SchemaIR {
        &self.schema
    }

    /// Execute a validated document. Operation selection and variable
    /// coercion failures are request errors (`data` absent).
    pub async fn execute(
        &self,
        doc: &QueryDocument,
        operation_name: Option<&str>,
        variables: &Map<String, Value>,
        ctx: &ExecutionContext,
    ) -> ExecutionResult {
        let op = match doc.operation(operation_name) {
            Ok(op) => op,
            Err(e) => return ExecutionResult::request_errors(vec![e]),
        };
        let vars = match coerce_variables(op.variables, variables, &self.schema) {
            Ok(vars) => vars,
            Err(errors) => return ExecutionResult::request_errors(errors),
        };
        let run = Run {
            schema: &self.schema,
            engine: self,
            doc,
            vars,
            errors: Mutex::new(Vec::new()),
            permits: Semaphore::new(self.options.parallelism.max(1)),
        };
        let (root, serial) = match op.kind {
            OperationKind::Query => (QUERY, false),
            OperationKind::Mutation => (MUTATION, true),
        };
        let mut fields = IndexMap::new();
        run.collect(root, op.selection_set, &mut fields, &mut HashSet::new());
        let frame = Arc::new(Frame {
            value: Value::Object(Map::new()),
            raw: Value::Null,
            ctx: ctx.clone(),
        });
        let data = match run.execute_set(root, fields, frame, Vec::new(), serial).await {
            Ok(map) => Value::Object(map),
            Err(()) => Value::Null,
        };
        let mut errors = run.errors.into_inner().expect("error list");
        errors.sort_by(|a, b| a.path.cmp(&b.path).then(a.locations.cmp(&b.locations)));
        ExecutionResult {
            data: Some(data),
            errors,
        }
    }
}

/// Handle one GraphQL-over-HTTP request. Returns the HTTP status (400 for
/// request errors, 200 otherwise) and the response body.
pub async fn run_request(engine: &Engine, request: &GraphQLRequest, ctx: &ExecutionContext) -> (u16, ExecutionResult) {
    let doc = match parse_query(&request.query) {
        Ok(doc) => doc,
        Err(e) => return (400, ExecutionResult::request_errors(vec![e])),
    };
    let errors = validate_query(&doc, engine.schema());
    if !errors.is_empty() {
        return (400, ExecutionResult::request_errors(errors));
    }
    let variables = request.variables.clone().unwrap_or_default();
    let result = engine
        .execute(&doc, request.operation_name.as_deref(), &variables, ctx)
        .await;
    let status = if result.data.is_none() { 400 } else { 200 };
    (status, result)
}
