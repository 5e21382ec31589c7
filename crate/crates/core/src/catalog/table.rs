use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::value::Value;
use crate::error::TableError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ColumnType {
    Numeric,
    Text,
}

impl fmt::Display for ColumnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnType::Numeric => f.write_str("numeric"),
            ColumnType::Text => f.write_str("text"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: ColumnType,
}

impl Column {
    pub fn new(name: impl Into<String>, ty: ColumnType) -> Self {
        Column { name: name.into(), ty }
    }
}

/// Ordered, uniquely named columns.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(transparent)]
pub struct Schema {
    columns: Vec<Column>,
}

impl Schema {
    pub fn new(columns: Vec<Column>) -> Result<Self, TableError> {
        let mut seen = HashSet::with_capacity(columns.len());
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(TableError::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(Schema { columns })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }
}

/// SHA-256 over the canonical form of a table: column names in sorted order,
/// then the rows (permuted to that column order) in sorted order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContentHash(pub [u8; 32]);

impl ContentHash {
    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ContentHash({})", &self.to_hex()[..12])
    }
}

impl fmt::Display for ContentHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Identity of a table inside a collection: content plus provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TableId(pub ContentHash);

pub type Row = Vec<Value>;

/// An immutable, duplicate-free relation.
#[derive(Debug, Clone)]
pub struct Table {
    name: Option<String>,
    provenance: BTreeSet<String>,
    schema: Schema,
    rows: Vec<Row>,
    content_hash: ContentHash,
    id: TableId,
}

impl Table {
    /// Builds a table, dropping duplicate rows (first occurrence wins).
    pub fn new(
        name: Option<String>,
        provenance: BTreeSet<String>,
        schema: Schema,
        rows: Vec<Row>,
    ) -> Result<Self, TableError> {
        if provenance.is_empty() {
            return Err(TableError::EmptyProvenance);
        }
        let arity = schema.len();
        let mut seen = HashSet::with_capacity(rows.len());
        let mut unique = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != arity {
                return Err(TableError::Arity { row: i, expected: arity, found: row.len() });
            }
            if seen.insert(row.clone()) {
                unique.push(row);
            }
        }
        let content_hash = canonical_hash(&schema, &unique);
        let id = identity_hash(&content_hash, &provenance);
        Ok(Table { name, provenance, schema, rows: unique, content_hash, id })
    }

    /// A base table: provenance is the singleton of its own name.
    pub fn base(name: impl Into<String>, schema: Schema, rows: Vec<Row>) -> Result<Self, TableError> {
        let name = name.into();
        let provenance = BTreeSet::from([name.clone()]);
        Table::new(Some(name), provenance, schema, rows)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// The name if present, otherwise the provenance joined with `+`.
    pub fn display_name(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => self.provenance.iter().cloned().collect::<Vec<_>>().join("+"),
        }
    }

    pub fn provenance(&self) -> &BTreeSet<String> {
        &self.provenance
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn content_hash(&self) -> ContentHash {
        self.content_hash
    }

    pub fn id(&self) -> TableId {
        self.id
    }

    pub fn column_values(&self, idx: usize) -> impl Iterator<Item = &Value> {
        self.rows.iter().map(move |r| &r[idx])
    }
}

impl PartialEq for Table {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl Eq for Table {}

fn write_value(h: &mut Sha256, v: &Value) {
    match v {
        Value::Null => h.update([0u8]),
        Value::Text(s) => {
            h.update([2u8]);
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        }
        num => match num.canonical_int() {
            Some(i) => {
                h.update([1u8]);
                h.update(i.to_le_bytes());
            }
            None => {
                h.update([3u8]);
                h.update(num.as_f64().unwrap_or_default().to_bits().to_le_bytes());
            }
        },
    }
}

fn finish(h: Sha256) -> ContentHash {
    let digest = h.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    ContentHash(out)
}

fn canonical_hash(schema: &Schema, rows: &[Row]) -> ContentHash {
    let mut order: Vec<usize> = (0..schema.len()).collect();
    order.sort_by(|&a, &b| schema.columns[a].name.cmp(&schema.columns[b].name));
    let mut canon: Vec<Vec<&Value>> = rows.iter().map(|r| order.iter().map(|&i| &r[i]).collect()).collect();
    canon.sort();

    let mut h = Sha256::new();
    h.update((order.len() as u64).to_le_bytes());
    for &i in &order {
        let Column { name, ty } = &schema.columns[i];
        h.update((name.len() as u64).to_le_bytes());
        h.update(name.as_bytes());
        // union compatibility depends on types, so identity must too
        h.update([*ty as u8]);
    }
    h.update((canon.len() as u64).to_le_bytes());
    for row in canon {
        for v in row {
            write_value(&mut h, v);
        }
    }
    finish(h)
}

fn identity_hash(content: &ContentHash, provenance: &BTreeSet<String>) -> TableId {
    let mut h = Sha256::new();
    h.update(content.0);
    for p in provenance {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    TableId(finish(h))
}
