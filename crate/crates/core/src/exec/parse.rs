use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use graphql_parser::query::{
    self as q, Definition, FragmentDefinition, OperationDefinition, Selection, SelectionSet, VariableDefinition,
};

use super::{GraphQLError, Pos};

pub(crate) type Doc = q::Document<'static, String>;
pub(crate) type Sel = SelectionSet<'static, String>;
pub(crate) type Fragment = FragmentDefinition<'static, String>;
pub(crate) type VarDef = VariableDefinition<'static, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperationKind {
    Query,
    Mutation,
}

/// One operation of a query document, borrowed from the parsed AST.
#[derive(Debug, Clone, Copy)]
pub struct Operation<'d> {
    pub kind: OperationKind,
    pub name: Option<&'d str>,
    pub variables: &'d [VarDef],
    pub selection_set: &'d Sel,
    pub position: Pos,
    pub has_directives: bool,
}

/// A parsed query document. Fragment references are checked at parse time.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDocument {
    pub(crate) ast: Doc,
}

impl QueryDocument {
    pub fn operations(&self) -> Vec<Operation<'_>> {
        self.ast
            .definitions
            .iter()
            .filter_map(|d| match d {
                Definition::Operation(op) => operation(op),
                Definition::Fragment(_) => None,
            })
            .collect()
    }

    pub fn fragments(&self) -> impl Iterator<Item = &Fragment> {
        self.ast.definitions.iter().filter_map(|d| match d {
            Definition::Fragment(f) => Some(f),
            Definition::Operation(_) => None,
        })
    }

    pub fn fragment(&self, name: &str) -> Option<&Fragment> {
        self.fragments().find(|f| f.name == name)
    }

    /// Pick the operation to run: the named one, or the only one.
    pub fn operation(&self, name: Option<&str>) -> Result<Operation<'_>, GraphQLError> {
        let ops = self.operations();
        match name {
            Some(name) => ops
                .into_iter()
                .find(|op| op.name == Some(name))
                .ok_or_else(|| GraphQLError::new(format!("Unknown operation named \"{name}\"."))),
            None if ops.len() == 1 => Ok(ops[0]),
            None => Err(GraphQLError::new("Must provide operation name if query contains multiple operations.")),
        }
    }
}

impl fmt::Display for QueryDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.ast)
    }
}

fn operation<'d>(op: &'d OperationDefinition<'static, String>) -> Option<Operation<'d>> {
    Some(match op {
        OperationDefinition::SelectionSet(set) => Operation {
            kind: OperationKind::Query,
            name: None,
            variables: &[],
            selection_set: set,
            position: set.span.0,
            has_directives: false,
        },
        OperationDefinition::Query(query) => Operation {
            kind: OperationKind::Query,
            name: query.name.as_deref(),
            variables: &query.variable_definitions,
            selection_set: &query.selection_set,
            position: query.position,
            has_directives: !query.directives.is_empty(),
        },
        OperationDefinition::Mutation(m) => Operation {
            kind: OperationKind::Mutation,
            name: m.name.as_deref(),
            variables: &m.variable_definitions,
            selection_set: &m.selection_set,
            position: m.position,
            has_directives: !m.directives.is_empty(),
        },
        OperationDefinition::Subscription(_) => return None,
    })
}

fn syntax_error(message: &str) -> GraphQLError {
    let mut error = GraphQLError::new(format!("Syntax error: {}", message.trim()));
    if let Some(rest) = message.split(" at ").nth(1) {
        let coords: String = rest.chars().take_while(|c| c.is_ascii_digit() || *c == ':').collect();
        if let Some((line, column)) = coords.split_once(':') {
            if let (Ok(line), Ok(column)) = (line.parse(), column.parse()) {
                error = error.at(Pos { line, column });
            }
        }
    }
    error
}

fn spreads(set: &Sel, out: &mut Vec<(String, Pos)>) {
    for item in &set.items {
        match item {
            Selection::Field(f) => spreads(&f.selection_set, out),
            Selection::FragmentSpread(s) => out.push((s.fragment_name.clone(), s.position)),
            Selection::InlineFragment(i) => spreads(&i.selection_set, out),
        }
    }
}

fn check_fragments(doc: &QueryDocument) -> Result<(), GraphQLError> {
    let mut graph: BTreeMap<&str, Vec<(String, Pos)>> = BTreeMap::new();
    for fragment in doc.fragments() {
        if graph.contains_key(fragment.name.as_str()) {
            return Err(GraphQLError::new(format!("There can be only one fragment named \"{}\".", fragment.name))
                .at(fragment.position));
        }
        let mut used = Vec::new();
        spreads(&fragment.selection_set, &mut used);
        graph.insert(&fragment.name, used);
    }
    let mut all_used = Vec::new();
    for op in doc.operations() {
        spreads(op.selection_set, &mut all_used);
    }
    for used in graph.values() {
        all_used.extend(used.iter().cloned());
    }
    for (name, pos) in &all_used {
        if !graph.contains_key(name.as_str()) {
            return Err(GraphQLError::new(format!("Unknown fragment \"{name}\".")).at(*pos));
        }
    }
    fn visit<'g>(
        name: &'g str,
        graph: &'g BTreeMap<&str, Vec<(String, Pos)>>,
        stack: &mut Vec<&'g str>,
        done: &mut BTreeSet<&'g str>,
    ) -> Result<(), GraphQLError> {
        if done.contains(name) {
            return Ok(());
        }
        if stack.contains(&name) {
            return Err(GraphQLError::new(format!("Cannot spread fragment \"{name}\" within itself.")));
        }
        stack.push(name);
        for (next, _) in &graph[name] {
            visit(next, graph, stack, done)?;
        }
        stack.pop();
        done.insert(name);
        Ok(())
    }
    let mut done = BTreeSet::new();
    for name in graph.keys() {
        visit(name, &graph, &mut Vec::new(), &mut done)?;
    }
    Ok(())
}

/// Parse a query document. Subscriptions are rejected.
pub fn parse_query(text: &str) -> Result<QueryDocument, GraphQLError> {
    if text.trim().is_empty() {
        return Err(GraphQLError::new("Syntax error: empty query document"));
    }
    let ast = q::parse_query::<String>(text)
        .map_err(|e| syntax_error(&e.to_string()))?
        .into_static();
    for definition in &ast.definitions {
        if let Definition::Operation(OperationDefinition::Subscription(s)) = definition {
            return Err(GraphQLError::new("Subscriptions are not supported.").at(s.position));
        }
    }
    let doc = QueryDocument { ast };
    check_fragments(&doc)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"{
  user(id: "erik") {
    name
    employerCompany {
      companyName
    }
  }
}"#;

    fn field_names(set: &Sel) -> Vec<String> {
        set.items
            .iter()
            .filter_map(|s| match s {
                Selection::Field(f) => Some(f.name.clone()),
                _ => None,
            })
            .collect()
    }

    fn child<'a>(set: &'a Sel, name: &str) -> &'a Sel {
        set.items
            .iter()
            .find_map(|s| match s {
                Selection::Field(f) if f.name == name => Some(&f.selection_set),
                _ => None,
            })
            .unwrap()
    }

    #[test]
    fn nested_link_query() {
        let doc = parse_query(FIG2).unwrap();
        let op = doc.operation(None).unwrap();
        assert_eq!(op.kind, OperationKind::Query);
        let user = child(op.selection_set, "user");
        let company = child(user, "employerCompany");
        assert_eq!(field_names(company), vec!["companyName"]);
    }

    #[test]
    fn empty_selection_is_a_syntax_error() {
        let err = parse_query("{}").unwrap_err();
        assert!(err.message.starts_with("Syntax error"));
        assert_eq!(err.locations.len(), 1);
        assert!(parse_query("   ").is_err());
    }

    #[test]
    fn alias() {
        let doc = parse_query(r#"{ u: user(id:"x"){id} }"#).unwrap();
        let op = doc.operation(None).unwrap();
        match &op.selection_set.items[0] {
            Selection::Field(f) => {
                assert_eq!(f.alias.as_deref(), Some("u"));
                assert_eq!(f.name, "user");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn rejects_subscriptions_and_bad_fragments() {
        assert!(parse_query("subscription { a }").is_err());
        assert!(parse_query("{ ...Missing }").unwrap_err().message.contains("Missing"));
        let cyclic = "query { ...A } fragment A on Query { ...B } fragment B on Query { ...A }";
        assert!(parse_query(cyclic).unwrap_err().message.contains("within itself"));
    }

    #[test]
    fn operation_selection() {
        let doc = parse_query("query A { a } mutation B { b }").unwrap();
        assert_eq!(doc.operation(Some("B")).unwrap().kind, OperationKind::Mutation);
        assert!(doc.operation(None).is_err());
        assert!(doc.operation(Some("C")).is_err());
    }

    #[test]
    fn print_parse_is_a_fixed_point() {
        for text in [FIG2, "query Q($id: String!) { u: user(id: $id) { ...F } } fragment F on User { id }"] {
            let once = parse_query(text).unwrap().to_string();
            let twice = parse_query(&once).unwrap().to_string();
            assert_eq!(once, twice);
        }
    }
}
