use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{Map, Value};

/// A credential collected from viewer arguments.
#[derive(Clone, PartialEq, Eq)]
pub enum Credential {
    ApiKey(String),
    Basic { username: String, password: String },
}

// Credentials never show up in debug output.
impl fmt::Debug for Credential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Credential::ApiKey(_) => f.write_str("ApiKey(***)"),
            Credential::Basic { username, .. } => write!(f, "Basic({username}, ***)"),
        }
    }
}

/// Per-path state of one query execution. Children get extended copies, so
/// nothing set in one branch is visible in a sibling.
#[derive(Debug, Clone, Default)]
pub struct ExecutionContext {
    /// Security scheme name to credential.
    pub credentials: BTreeMap<String, Credential>,
    /// Host-provided tree that bearer tokens are read from.
    pub token_store: Arc<Value>,
    /// Parameter values (by raw name) sent by ancestor requests.
    pub used_params: Map<String, Value>,
    /// Static headers added to every upstream request.
    pub headers: Arc<Vec<(String, String)>>,
}

impl ExecutionContext {
    pub fn new(token_store: Value, headers: Vec<(String, String)>) -> Self {
        ExecutionContext {
            credentials: BTreeMap::new(),
            token_store: Arc::new(token_store),
            used_params: Map::new(),
            headers: Arc::new(headers),
        }
    }

    pub fn with_credentials(&self, extra: impl IntoIterator<Item = (String, Credential)>) -> Self {
        let mut next = self.clone();
        next.credentials.extend(extra);
        next
    }

    pub fn with_params(&self, params: &Map<String, Value>) -> Self {
        let mut next = self.clone();
        for (k, v) in params {
            next.used_params.insert(k.clone(), v.clone());
        }
        next
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Segment {
    Key(String),
    Index(usize),
}

fn parse_json_path(path: &str) -> Option<Vec<Segment>> {
    let mut rest = path.trim();
    rest = rest.strip_prefix('$').unwrap_or(rest);
    let mut segments = Vec::new();
    while !rest.is_empty() {
        if let Some(after) = rest.strip_prefix('.') {
            rest = after;
            continue;
        }
        if let Some(after) = rest.strip_prefix('[') {
            let end = after.find(']')?;
            let inner = after[..end].trim();
            let quoted = inner
                .strip_prefix('\'')
                .and_then(|s| s.strip_suffix('\''))
                .or_else(|| inner.strip_prefix('"').and_then(|s| s.strip_suffix('"')));
            segments.push(match quoted {
                Some(key) => Segment::Key(key.to_string()),
                None => Segment::Index(inner.parse().ok()?),
            });
            rest = &after[end + 1..];
            continue;
        }
        let end = rest.find(['.', '[']).unwrap_or(rest.len());
        segments.push(Segment::Key(rest[..end].to_string()));
        rest = &rest[end..];
    }
    Some(segments)
}

/// Evaluate a dotted/bracket path such as `security.oauthToken`,
/// `$.tokens[0]` or `$['a b'].c`.
pub fn json_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    let mut current = value;
    for segment in parse_json_path(path)? {
        current = match segment {
            Segment::Key(key) => current.get(&key)?,
            Segment::Index(i) => current.get(i)?,
        };
    }
    Some(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_path_forms() {
        let v = json!({"security": {"oauthToken": "t1"}, "list": [{"k": 1}], "a b": {"c": true}});
        assert_eq!(json_path(&v, "security.oauthToken"), Some(&json!("t1")));
        assert_eq!(json_path(&v, "$.security.oauthToken"), Some(&json!("t1")));
        assert_eq!(json_path(&v, "list[0].k"), Some(&json!(1)));
        assert_eq!(json_path(&v, "$['a b'].c"), Some(&json!(true)));
        assert_eq!(json_path(&v, "security.missing"), None);
        assert_eq!(json_path(&v, "list[x]"), None);
    }

    #[test]
    fn credentials_are_redacted_in_debug() {
        let c = Credential::Basic {
            username: "u".into(),
            password: "secret".into(),
        };
        assert!(!format!("{c:?}").contains("secret"));
        assert!(!format!("{:?}", Credential::ApiKey("abc".into())).contains("abc"));
    }

    #[test]
    fn child_contexts_do_not_leak() {
        let root = ExecutionContext::default();
        let mut params = Map::new();
        params.insert("id".into(), json!("x"));
        let child = root.with_params(&params);
        assert!(root.used_params.is_empty());
        assert_eq!(child.used_params["id"], json!("x"));
    }
}
