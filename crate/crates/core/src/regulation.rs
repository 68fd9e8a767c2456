//! Regulations as precedence-ordered chunks of provisions.
//!
//! A regulation is decomposed along its chapter → article → item → sub-item
//! identifiers and every provision is assigned to exactly one of four
//! chunks. The chunk kinds are totally ordered by legal precedence:
//! applicability scope, then special conditions, then common provisions,
//! then general principles.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// The GDPR manifest shipped with the crate.
pub const GDPR_MANIFEST_JSON: &str = include_str!("../data/gdpr_manifest.json");

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("failed to read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest schema violation: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("manifest has no chunks")]
    NoChunks,
    #[error("chunk {chunk}: {message}")]
    InvalidChunk { chunk: String, message: String },
    #[error("chunk {chunk}, provision {provision}: {message}")]
    InvalidProvision {
        chunk: String,
        provision: String,
        message: String,
    },
    #[error("provision {provision} appears in both chunk {first} and chunk {second}")]
    DuplicateProvision {
        provision: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid provision identifier {input:?}: {reason}")]
pub struct ProvisionIdError {
    pub input: String,
    pub reason: &'static str,
}

/// Identifier of an article, item or sub-item, rendered as `Article 6(1)(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProvisionId {
    article: String,
    item: Option<String>,
    sub_item: Option<String>,
}

fn valid_component(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric())
}

impl ProvisionId {
    pub fn new(
        article: impl Into<String>,
        item: Option<String>,
        sub_item: Option<String>,
    ) -> Result<Self, ProvisionIdError> {
        let article = article.into();
        let input = format!("{article}/{item:?}/{sub_item:?}");
        if !valid_component(&article) {
            return Err(ProvisionIdError { input, reason: "article must be non-empty alphanumeric" });
        }
        if item.as_deref().is_some_and(|i| !valid_component(i))
            || sub_item.as_deref().is_some_and(|s| !valid_component(s))
        {
            return Err(ProvisionIdError { input, reason: "item and sub-item must be alphanumeric" });
        }
        if sub_item.is_some() && item.is_none() {
            return Err(ProvisionIdError { input, reason: "sub-item requires an item" });
        }
        Ok(Self { article, item, sub_item })
    }

    pub fn article(&self) -> &str {
        &self.article
    }

    pub fn item(&self) -> Option<&str> {
        self.item.as_deref()
    }

    pub fn sub_item(&self) -> Option<&str> {
        self.sub_item.as_deref()
    }

    /// True when `self` equals `prefix` or lies underneath it in the hierarchy,
    /// e.g. `Article 6(1)(a)` is within `Article 6` and `Article 6(1)`.
    pub fn is_within(&self, prefix: &ProvisionId) -> bool {
        self.article == prefix.article
            && (prefix.item.is_none() || self.item == prefix.item)
            && (prefix.sub_item.is_none() || self.sub_item == prefix.sub_item)
    }

    /// The article-level identifier (`Article 6` for `Article 6(1)(a)`).
    pub fn article_id(&self) -> ProvisionId {
        ProvisionId { article: self.article.clone(), item: None, sub_item: None }
    }

    /// Lenient parse used for model output keys: tolerates a missing or
    /// abbreviated `Article` prefix, stray whitespace, leading zeros on
    /// numeric components and letter case.
    pub fn parse_lenient(input: &str) -> Result<Self, ProvisionIdError> {
        let compact: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        let lower = compact.to_ascii_lowercase();
        let rest = ["article", "art.", "art"]
            .iter()
            .find_map(|p| lower.strip_prefix(p))
            .unwrap_or(&lower);
        let strict = format!("Article {rest}");
        let parsed: ProvisionId = strict.parse().map_err(|_| ProvisionIdError {
            input: input.to_string(),
            reason: "not a provision identifier",
        })?;
        Ok(parsed.normalized())
    }

    fn normalized(self) -> Self {
        fn strip(s: String) -> String {
            if s.chars().all(|c| c.is_ascii_digit()) {
                let t = s.trim_start_matches('0');
                if t.is_empty() { "0".into() } else { t.into() }
            } else {
                s
            }
        }
        ProvisionId {
            article: strip(self.article),
            item: self.item.map(strip),
            sub_item: self.sub_item.map(|s| s.to_ascii_lowercase()),
        }
    }
}

impl fmt::Display for ProvisionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Article {}", self.article)?;
        if let Some(item) = &self.item {
            write!(f, "({item})")?;
        }
        if let Some(sub) = &self.sub_item {
            write!(f, "({sub})")?;
        }
        Ok(())
    }
}

impl FromStr for ProvisionId {
    type Err = ProvisionIdError;

    /// Strict parse of the canonical rendering.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason| ProvisionIdError { input: s.to_string(), reason };
        let rest = s.strip_prefix("Article ").ok_or_else(|| err("missing `Article ` prefix"))?;
        let (article, mut tail) = match rest.find('(') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let mut parts = Vec::new();
        while !tail.is_empty() {
            let inner = tail.strip_prefix('(').ok_or_else(|| err("expected `(`"))?;
            let close = inner.find(')').ok_or_else(|| err("unclosed `(`"))?;
            parts.push(inner[..close].to_string());
            tail = &inner[close + 1..];
        }
        if parts.len() > 2 {
            return Err(err("too many levels"));
        }
        let mut parts = parts.into_iter();
        ProvisionId::new(article, parts.next(), parts.next())
            .map_err(|e| ProvisionIdError { input: s.to_string(), reason: e.reason })
    }
}

impl Serialize for ProvisionId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProvisionId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provision {
    pub id: ProvisionId,
    pub text: String,
    pub title: Option<String>,
    /// Scope exemptions: a "yes" on an exemption defeats applicability.
    pub exemption: bool,
}

/// Flat on-disk form of a provision.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProvisionRecord {
    article: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    item: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sub_item: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    title: Option<String>,
    text: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    exemption: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChunkKind {
    ApplicabilityScope,
    SpecialConditions,
    CommonProvisions,
    GeneralPrinciples,
}

impl ChunkKind {
    /// All kinds from highest to lowest precedence.
    pub const ALL: [ChunkKind; 4] = [
        ChunkKind::ApplicabilityScope,
        ChunkKind::SpecialConditions,
        ChunkKind::CommonProvisions,
        ChunkKind::GeneralPrinciples,
    ];

    /// Larger is higher precedence.
    pub fn precedence(self) -> u8 {
        match self {
            ChunkKind::ApplicabilityScope => 3,
            ChunkKind::SpecialConditions => 2,
            ChunkKind::CommonProvisions => 1,
            ChunkKind::GeneralPrinciples => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ChunkKind::ApplicabilityScope => "applicability_scope",
            ChunkKind::SpecialConditions => "special_conditions",
            ChunkKind::CommonProvisions => "common_provisions",
            ChunkKind::GeneralPrinciples => "general_principles",
        }
    }
}

impl fmt::Display for ChunkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl PartialOrd for ChunkKind {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ChunkKind {
    fn cmp(&self, other: &Self) -> Ordering {
        self.precedence().cmp(&other.precedence())
    }
}

/// `Greater` means `a` takes priority over `b`.
pub fn compare_precedence(a: ChunkKind, b: ChunkKind) -> Ordering {
    a.cmp(&b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Connective {
    /// Satisfied when any provision holds.
    Disjunctive,
    /// Satisfied only when every provision holds.
    Conjunctive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegulationChunk {
    pub kind: ChunkKind,
    pub connective: Connective,
    pub provisions: Vec<Provision>,
    pub sub_group: Option<String>,
}

impl RegulationChunk {
    /// `special_conditions` or `common_provisions/lawful_basis`.
    pub fn label(&self) -> String {
        match &self.sub_group {
            Some(g) => format!("{}/{}", self.kind, g),
            None => self.kind.to_string(),
        }
    }

    pub fn provision_ids(&self) -> impl Iterator<Item = &ProvisionId> {
        self.provisions.iter().map(|p| &p.id)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChunkRecord {
    kind: ChunkKind,
    connective: Connective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sub_group: Option<String>,
    provisions: Vec<ProvisionRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestRecord {
    name: String,
    version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<String>,
    chunks: Vec<ChunkRecord>,
}

/// A validated regulation. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegulationManifest {
    pub name: String,
    pub version: String,
    pub provenance: Option<String>,
    pub chunks: Vec<RegulationChunk>,
}

impl RegulationManifest {
    pub fn gdpr() -> Self {
        Self::from_json(GDPR_MANIFEST_JSON).expect("shipped GDPR manifest is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, ManifestError> {
        let record: ManifestRecord = serde_json::from_str(json)?;
        Self::from_record(record)
    }

    fn from_record(record: ManifestRecord) -> Result<Self, ManifestError> {
        if record.chunks.is_empty() {
            return Err(ManifestError::NoChunks);
        }
        let mut chunks = Vec::with_capacity(record.chunks.len());
        for c in record.chunks {
            let label = match &c.sub_group {
                Some(g) => format!("{}/{}", c.kind, g),
                None => c.kind.to_string(),
            };
            let mut provisions = Vec::with_capacity(c.provisions.len());
            for p in c.provisions {
                let shown = format!("{}/{:?}/{:?}", p.article, p.item, p.sub_item);
                let id = ProvisionId::new(p.article, p.item, p.sub_item).map_err(|e| {
                    ManifestError::InvalidProvision {
                        chunk: label.clone(),
                        provision: shown.clone(),
                        message: e.reason.to_string(),
                    }
                })?;
                let text = p.text.trim().to_string();
                if text.is_empty() {
                    return Err(ManifestError::InvalidProvision {
                        chunk: label,
                        provision: id.to_string(),
                        message: "text is empty".into(),
                    });
                }
                provisions.push(Provision { id, text, title: p.title, exemption: p.exemption });
            }
            chunks.push(RegulationChunk {
                kind: c.kind,
                connective: c.connective,
                provisions,
                sub_group: c.sub_group,
            });
        }
        let manifest = RegulationManifest {
            name: record.name,
            version: record.version,
            provenance: record.provenance,
            chunks,
        };
        manifest.validate()?;
        Ok(manifest)
    }

    fn validate(&self) -> Result<(), ManifestError> {
        let mut seen_groups = HashSet::new();
        let mut owner: std::collections::HashMap<&ProvisionId, String> = Default::default();
        for chunk in &self.chunks {
            let label = chunk.label();
            if !seen_groups.insert((chunk.kind, chunk.sub_group.clone())) {
                return Err(ManifestError::InvalidChunk {
                    chunk: label,
                    message: "more than one chunk with this kind and sub-group".into(),
                });
            }
            let required = match chunk.kind {
                ChunkKind::ApplicabilityScope => Some(Connective::Disjunctive),
                ChunkKind::GeneralPrinciples => Some(Connective::Conjunctive),
                _ => None,
            };
            if required.is_some_and(|r| r != chunk.connective) {
                return Err(ManifestError::InvalidChunk {
                    chunk: label,
                    message: format!("connective must be {:?}", required.unwrap()),
                });
            }
            for p in &chunk.provisions {
                if p.exemption && chunk.kind != ChunkKind::ApplicabilityScope {
                    return Err(ManifestError::InvalidProvision {
                        chunk: label.clone(),
                        provision: p.id.to_string(),
                        message: "exemptions are only allowed in the applicability scope".into(),
                    });
                }
                if let Some(first) = owner.insert(&p.id, label.clone()) {
                    return Err(ManifestError::DuplicateProvision {
                        provision: p.id.to_string(),
                        first,
                        second: label,
                    });
                }
            }
        }
        Ok(())
    }

    /// Canonical JSON rendering; `from_json(render())` reproduces `self`.
    pub fn render(&self) -> String {
        let record = ManifestRecord {
            name: self.name.clone(),
            version: self.version.clone(),
            provenance: self.provenance.clone(),
            chunks: self
                .chunks
                .iter()
                .map(|c| ChunkRecord {
                    kind: c.kind,
                    connective: c.connective,
                    sub_group: c.sub_group.clone(),
                    provisions: c
                        .provisions
                        .iter()
                        .map(|p| ProvisionRecord {
                            article: p.id.article.clone(),
                            item: p.id.item.clone(),
                            sub_item: p.id.sub_item.clone(),
                            title: p.title.clone(),
                            text: p.text.clone(),
                            exemption: p.exemption,
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&record).expect("manifest serializes")
    }

    pub fn chunks_of(&self, kind: ChunkKind) -> impl Iterator<Item = &RegulationChunk> {
        self.chunks.iter().filter(move |c| c.kind == kind)
    }

    pub fn chunk(&self, kind: ChunkKind, sub_group: Option<&str>) -> Option<&RegulationChunk> {
        self.chunks
            .iter()
            .find(|c| c.kind == kind && c.sub_group.as_deref() == sub_group)
    }

    /// Chunks in issuance order: by descending precedence, manifest order within a kind.
    pub fn chunks_by_precedence(&self) -> Vec<&RegulationChunk> {
        let mut out: Vec<_> = self.chunks.iter().collect();
        out.sort_by_key(|c| std::cmp::Reverse(c.kind));
        out
    }

    pub fn find(&self, id: &ProvisionId) -> Option<&Provision> {
        self.chunks.iter().flat_map(|c| &c.provisions).find(|p| &p.id == id)
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<RegulationManifest, ManifestError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    RegulationManifest::from_json(&text)
}

/// Provisions of every chunk of `kind`, in manifest order. Empty if absent.
pub fn provisions_of(manifest: &RegulationManifest, kind: ChunkKind) -> Vec<&Provision> {
    manifest.chunks_of(kind).flat_map(|c| &c.provisions).collect()
}
