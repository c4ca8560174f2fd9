//! JSON documents for spaces, witnesses, chains and coarse maps.
//!
//! Certificates are self-contained: every ambient space they mention is
//! embedded under `"spaces"`, and points are referred to by name.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::coarse::{CoarseMapWitness, ModulusTable};
use crate::groups::{GroupError, GroupSpec};
use crate::metric::{Dist, FiniteMetricSpace, MetricError, Point, Subspace};
use crate::witness::{DecompositionChain, DecompositionWitness, FamilyWitness, Label, TargetClass};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("unknown space {0:?}")]
    UnknownSpace(String),
    #[error("space {0:?} defined twice with different contents")]
    ConflictingSpace(String),
    #[error("cannot tell which certificate this is")]
    UnknownDocument,
}

/// A point given either by name or by an integer that is its name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointRef {
    Name(String),
    Number(u64),
}

impl PointRef {
    fn name(&self) -> String {
        match self {
            PointRef::Name(s) => s.clone(),
            PointRef::Number(n) => n.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceDoc {
    Group { id: String, points: Vec<String>, group: GroupSpec },
    Graph { id: String, points: Vec<PointRef>, edges: Vec<(PointRef, PointRef)> },
    Explicit { id: String, points: Vec<PointRef>, dist: Vec<(PointRef, PointRef, Dist)> },
}

impl SpaceDoc {
    pub fn id(&self) -> &str {
        match self {
            SpaceDoc::Group { id, .. } | SpaceDoc::Graph { id, .. } | SpaceDoc::Explicit { id, .. } => id,
        }
    }
}

pub fn space_to_doc(s: &FiniteMetricSpace) -> SpaceDoc {
    let id = s.id().to_string();
    if let Some((spec, _)) = s.group() {
        return SpaceDoc::Group { id, points: s.names().to_vec(), group: (**spec).clone() };
    }
    let name = |p: Point| PointRef::Name(s.name(p).to_string());
    match s.edges() {
        Some(edges) => SpaceDoc::Graph {
            id,
            points: (0..s.len()).map(name).collect(),
            edges: edges.iter().map(|&(a, b)| (name(a), name(b))).collect(),
        },
        None => {
            let n = s.len();
            let dist =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).map(|(a, b)| (name(a), name(b), s.dist(a, b))).collect();
            SpaceDoc::Explicit { id, points: (0..n).map(name).collect(), dist }
        }
    }
}

pub fn space_from_doc(doc: &SpaceDoc) -> Result<Arc<FiniteMetricSpace>, IoError> {
    let space = match doc {
        SpaceDoc::Group { id, points, group } => {
            group.validate()?;
            let elements = points.iter().map(|p| group.parse(p)).collect::<Result<Vec<_>, _>>()?;
            let space = FiniteMetricSpace::from_group(id.clone(), Arc::new(group.clone()), elements, None)?;
            // names must already be normal forms so that references resolve
            if let Some(bad) = points.iter().zip(space.names()).find(|(a, b)| a != b) {
                return Err(GroupError::MalformedElement(format!("{} is not in normal form", bad.0)).into());
            }
            space
        }
        SpaceDoc::Graph { id, points, edges } => {
            let edges: Vec<(String, String)> = edges.iter().map(|(a, b)| (a.name(), b.name())).collect();
            FiniteMetricSpace::from_graph(id.clone(), points.iter().map(PointRef::name).collect(), &edges)?
        }
        SpaceDoc::Explicit { id, points, dist } => {
            let distances: Vec<(String, String, Dist)> =
                dist.iter().map(|(a, b, d)| (a.name(), b.name(), *d)).collect();
            FiniteMetricSpace::build(id.clone(), points.iter().map(PointRef::name).collect(), &distances)?
        }
    };
    Ok(Arc::new(space))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceDoc {
    pub ambient: String,
    pub points: Vec<PointRef>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetDoc {
    Bounded(Dist),
    Explicit(Vec<SubspaceDoc>),
    ClosureOf(Vec<SubspaceDoc>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessBody {
    pub space: SubspaceDoc,
    pub k: u32,
    pub r: Dist,
    pub labels: Vec<(PointRef, u32, u32)>,
    pub target: TargetDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessDoc {
    #[serde(default)]
    pub spaces: Vec<SpaceDoc>,
    #[serde(flatten)]
    pub body: WitnessBody,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepDoc {
    pub k: u32,
    pub r: Dist,
    pub members: Vec<WitnessBody>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyDoc {
    #[serde(default)]
    pub spaces: Vec<SpaceDoc>,
    #[serde(flatten)]
    pub step: StepDoc,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainDoc {
    #[serde(default)]
    pub spaces: Vec<SpaceDoc>,
    pub start: Vec<SubspaceDoc>,
    pub steps: Vec<StepDoc>,
    pub final_bound: Dist,
    #[serde(default = "yes")]
    pub strict: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapDoc {
    #[serde(default)]
    pub spaces: Vec<SpaceDoc>,
    pub source: String,
    pub target: String,
    pub map: Vec<(PointRef, PointRef)>,
    pub rho_plus: Vec<(Dist, Dist)>,
    #[serde(default)]
    pub rho_minus: Option<Vec<(Dist, Dist)>>,
    #[serde(default)]
    pub contractive: bool,
}

/// Spaces by id, in order of first use.
#[derive(Default)]
pub struct SpaceRegistry {
    order: Vec<Arc<FiniteMetricSpace>>,
    by_id: HashMap<String, Arc<FiniteMetricSpace>>,
}

impl SpaceRegistry {
    pub fn from_docs(docs: &[SpaceDoc]) -> Result<Self, IoError> {
        let mut reg = Self::default();
        for d in docs {
            reg.insert(space_from_doc(d)?)?;
        }
        Ok(reg)
    }

    pub fn insert(&mut self, s: Arc<FiniteMetricSpace>) -> Result<(), IoError> {
        match self.by_id.get(s.id()) {
            Some(old) if Arc::ptr_eq(old, &s) => Ok(()),
            Some(old) if old.names() == s.names() && same_metric(old, &s) => Ok(()),
            Some(_) => Err(IoError::ConflictingSpace(s.id().to_string())),
            None => {
                self.by_id.insert(s.id().to_string(), s.clone());
                self.order.push(s);
                Ok(())
            }
        }
    }

    pub fn get(&self, id: &str) -> Result<&Arc<FiniteMetricSpace>, IoError> {
        self.by_id.get(id).ok_or_else(|| IoError::UnknownSpace(id.to_string()))
    }

    pub fn docs(&self) -> Vec<SpaceDoc> {
        self.order.iter().map(|s| space_to_doc(s)).collect()
    }

    fn note(&mut self, s: &Subspace) {
        let amb = s.ambient();
        if !self.by_id.contains_key(amb.id()) {
            self.by_id.insert(amb.id().to_string(), amb.clone());
            self.order.push(amb.clone());
        }
    }

    pub fn subspace(&self, doc: &SubspaceDoc) -> Result<Subspace, IoError> {
        let amb = self.get(&doc.ambient)?.clone();
        let pts = doc.points.iter().map(|p| point(&amb, p)).collect::<Result<Vec<_>, _>>()?;
        Ok(Subspace::new(amb, pts)?)
    }
}

fn same_metric(a: &FiniteMetricSpace, b: &FiniteMetricSpace) -> bool {
    let n = a.len();
    (0..n).all(|x| (x + 1..n).all(|y| a.dist(x, y) == b.dist(x, y)))
}

fn point(amb: &FiniteMetricSpace, p: &PointRef) -> Result<Point, IoError> {
    let name = p.name();
    amb.point(&name).ok_or(IoError::Metric(MetricError::UnknownPoint(name)))
}

fn subspace_doc(s: &Subspace) -> SubspaceDoc {
    SubspaceDoc {
        ambient: s.ambient().id().to_string(),
        points: s.names().into_iter().map(|n| PointRef::Name(n.to_string())).collect(),
    }
}

fn target_doc(t: &TargetClass, reg: &mut SpaceRegistry) -> TargetDoc {
    let list = |m: &[Subspace], reg: &mut SpaceRegistry| {
        m.iter()
            .map(|s| {
                reg.note(s);
                subspace_doc(s)
            })
            .collect()
    };
    match t {
        TargetClass::Bounded(d) => TargetDoc::Bounded(*d),
        TargetClass::Explicit(m) => TargetDoc::Explicit(list(m, reg)),
        TargetClass::ClosureOf(m) => TargetDoc::ClosureOf(list(m, reg)),
    }
}

fn witness_body(w: &DecompositionWitness, reg: &mut SpaceRegistry) -> WitnessBody {
    reg.note(&w.space);
    let amb = w.space.ambient();
    WitnessBody {
        space: subspace_doc(&w.space),
        k: w.k,
        r: w.r,
        labels: w
            .labels
            .iter()
            .map(|(&p, l)| (PointRef::Name(amb.name(p).to_string()), l.color, l.piece))
            .collect(),
        target: target_doc(&w.target, reg),
    }
}

fn witness_from_body(b: &WitnessBody, reg: &SpaceRegistry) -> Result<DecompositionWitness, IoError> {
    let space = reg.subspace(&b.space)?;
    let amb = space.ambient();
    let mut labels = std::collections::BTreeMap::new();
    for (p, color, piece) in &b.labels {
        labels.insert(point(amb, p)?, Label { color: *color, piece: *piece });
    }
    let list = |m: &[SubspaceDoc]| m.iter().map(|s| reg.subspace(s)).collect::<Result<Vec<_>, _>>();
    let target = match &b.target {
        TargetDoc::Bounded(d) => TargetClass::Bounded(*d),
        TargetDoc::Explicit(m) => TargetClass::Explicit(list(m)?),
        TargetDoc::ClosureOf(m) => TargetClass::ClosureOf(list(m)?),
    };
    Ok(DecompositionWitness { space, k: b.k, r: b.r, labels, target })
}

pub fn witness_to_doc(w: &DecompositionWitness) -> WitnessDoc {
    let mut reg = SpaceRegistry::default();
    let body = witness_body(w, &mut reg);
    WitnessDoc { spaces: reg.docs(), body }
}

pub fn witness_from_doc(doc: &WitnessDoc) -> Result<DecompositionWitness, IoError> {
    let reg = SpaceRegistry::from_docs(&doc.spaces)?;
    witness_from_body(&doc.body, &reg)
}

pub fn family_to_doc(f: &FamilyWitness) -> FamilyDoc {
    let mut reg = SpaceRegistry::default();
    let members = f.members.iter().map(|w| witness_body(w, &mut reg)).collect();
    FamilyDoc { spaces: reg.docs(), step: StepDoc { k: f.k, r: f.r, members } }
}

pub fn family_from_doc(doc: &FamilyDoc) -> Result<FamilyWitness, IoError> {
    let reg = SpaceRegistry::from_docs(&doc.spaces)?;
    step_from_doc(&doc.step, &reg)
}

fn step_from_doc(s: &StepDoc, reg: &SpaceRegistry) -> Result<FamilyWitness, IoError> {
    let members = s.members.iter().map(|m| witness_from_body(m, reg)).collect::<Result<_, _>>()?;
    Ok(FamilyWitness { k: s.k, r: s.r, members })
}

pub fn chain_to_doc(c: &DecompositionChain) -> ChainDoc {
    let mut reg = SpaceRegistry::default();
    let start = c
        .start
        .iter()
        .map(|s| {
            reg.note(s);
            subspace_doc(s)
        })
        .collect();
    let steps = c
        .steps
        .iter()
        .map(|st| StepDoc { k: st.k, r: st.r, members: st.members.iter().map(|w| witness_body(w, &mut reg)).collect() })
        .collect();
    ChainDoc { spaces: reg.docs(), start, steps, final_bound: c.final_bound, strict: c.strict }
}

pub fn chain_from_doc(doc: &ChainDoc) -> Result<DecompositionChain, IoError> {
    let reg = SpaceRegistry::from_docs(&doc.spaces)?;
    let start = doc.start.iter().map(|s| reg.subspace(s)).collect::<Result<_, _>>()?;
    let steps = doc.steps.iter().map(|s| step_from_doc(s, &reg)).collect::<Result<_, _>>()?;
    Ok(DecompositionChain { start, steps, final_bound: doc.final_bound, strict: doc.strict })
}

pub fn map_to_doc(m: &CoarseMapWitness) -> MapDoc {
    let mut reg = SpaceRegistry::default();
    reg.note(&Subspace::empty(m.source.clone()));
    reg.note(&Subspace::empty(m.target.clone()));
    let name = |s: &FiniteMetricSpace, p: Point| PointRef::Name(s.name(p).to_string());
    MapDoc {
        spaces: reg.docs(),
        source: m.source.id().to_string(),
        target: m.target.id().to_string(),
        map: m.map.iter().enumerate().map(|(x, &y)| (name(&m.source, x), name(&m.target, y))).collect(),
        rho_plus: m.rho_plus.entries().to_vec(),
        rho_minus: m.rho_minus.as_ref().map(|t| t.entries().to_vec()),
        contractive: m.contractive,
    }
}

pub fn map_from_doc(doc: &MapDoc) -> Result<CoarseMapWitness, IoError> {
    let reg = SpaceRegistry::from_docs(&doc.spaces)?;
    let source = reg.get(&doc.source)?.clone();
    let target = reg.get(&doc.target)?.clone();
    let mut map = vec![None; source.len()];
    for (x, y) in &doc.map {
        map[point(&source, x)?] = Some(point(&target, y)?);
    }
    let map = map
        .into_iter()
        .enumerate()
        .map(|(x, y)| y.ok_or_else(|| MetricError::MissingDistance(source.name(x).to_string(), "image".into())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CoarseMapWitness {
        source,
        target,
        map,
        rho_plus: ModulusTable::new(doc.rho_plus.clone())?,
        rho_minus: doc.rho_minus.clone().map(ModulusTable::new).transpose()?,
        contractive: doc.contractive,
    })
}

/// Any certificate the verifier understands.
#[derive(Clone, Debug)]
pub enum Certificate {
    Witness(DecompositionWitness),
    Family(FamilyWitness),
    Chain(DecompositionChain),
    Map(CoarseMapWitness),
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Witness(_) => "witness",
            Certificate::Family(_) => "family",
            Certificate::Chain(_) => "chain",
            Certificate::Map(_) => "map",
        }
    }

    pub fn to_json(&self) -> Value {
        let v = match self {
            Certificate::Witness(w) => serde_json::to_value(witness_to_doc(w)),
            Certificate::Family(f) => serde_json::to_value(family_to_doc(f)),
            Certificate::Chain(c) => serde_json::to_value(chain_to_doc(c)),
            Certificate::Map(m) => serde_json::to_value(map_to_doc(m)),
        };
        v.expect("documents serialize")
    }

    /// Detects the certificate kind from its fields.
    pub fn from_json(v: &Value) -> Result<Self, IoError> {
        let has = |k: &str| v.get(k).is_some();
        if has("steps") {
            Ok(Certificate::Chain(chain_from_doc(&serde_json::from_value(v.clone())?)?))
        } else if has("map") {
            Ok(Certificate::Map(map_from_doc(&serde_json::from_value(v.clone())?)?))
        } else if has("members") {
            Ok(Certificate::Family(family_from_doc(&serde_json::from_value(v.clone())?)?))
        } else if has("labels") {
            Ok(Certificate::Witness(witness_from_doc(&serde_json::from_value(v.clone())?)?))
        } else {
            Err(IoError::UnknownDocument)
        }
    }
}

impl Certificate {
    /// Runs the matching verifier; a map claiming contraction must also be
    /// contractive.
    pub fn verify(&self) -> (bool, Value) {
        let (valid, report) = match self {
            Certificate::Witness(w) => {
                let r = w.verify();
                (r.valid, serde_json::to_value(&r))
            }
            Certificate::Family(f) => {
                let r = f.verify();
                (r.valid, serde_json::to_value(&r))
            }
            Certificate::Chain(c) => {
                let r = c.verify();
                (r.valid, serde_json::to_value(&r))
            }
            Certificate::Map(m) => {
                let r = m.check();
                (r.valid && (!m.contractive || r.contractive), serde_json::to_value(&r))
            }
        };
        (valid, report.expect("reports serialize"))
    }
}

/// A subspace together with the space it lives in.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceFile {
    #[serde(default)]
    pub spaces: Vec<SpaceDoc>,
    #[serde(flatten)]
    pub subspace: SubspaceDoc,
}

pub fn subspace_to_file(s: &Subspace) -> SubspaceFile {
    let mut reg = SpaceRegistry::default();
    reg.note(s);
    SubspaceFile { spaces: reg.docs(), subspace: subspace_doc(s) }
}

pub fn subspace_from_file(doc: &SubspaceFile) -> Result<Subspace, IoError> {
    SpaceRegistry::from_docs(&doc.spaces)?.subspace(&doc.subspace)
}

/// Reads a standalone space document.
pub fn parse_space(text: &str) -> Result<Arc<FiniteMetricSpace>, IoError> {
    space_from_doc(&serde_json::from_str(text)?)
}
