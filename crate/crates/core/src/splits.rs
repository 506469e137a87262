//! Labeled/unlabeled class splits from a two-level class hierarchy.
//!
//! The first `half_size` superclasses feed `L1`/`U1`, the next `half_size`
//! feed `L2`/`U2`. From each superclass `labeled_per_super` subclasses go to
//! the labeled set and the following `unlabeled_per_super` to the unlabeled
//! set, either in listed order or after a seeded shuffle. The optional
//! mixed set `L1.5` is the first ⌈|L1|/2⌉ classes of `L1` followed by the
//! first ⌊|L1|/2⌋ classes of `L2`.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rng;

pub const MANIFEST_SCHEMA: &str = "ddb_manifest_v1";
pub const MIXED_RULE: &str = "first ceil(|L1|/2) classes of L1, then first floor(|L1|/2) classes of L2";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Superclass {
    pub name: String,
    pub subclasses: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHierarchy {
    pub superclasses: Vec<Superclass>,
}

impl ClassHierarchy {
    pub fn validate(&self) -> Result<()> {
        if self.superclasses.is_empty() {
            return Err(Error::Input("hierarchy has no superclasses".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.superclasses {
            if s.subclasses.is_empty() {
                return Err(Error::Input(alloc::format!("superclass {:?} is empty", s.name)));
            }
            for c in &s.subclasses {
                if !seen.insert(c.as_str()) {
                    return Err(Error::Input(alloc::format!("subclass {c:?} appears more than once")));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over a length-free canonical encoding, hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.superclasses {
            h.update(s.name.as_bytes());
            h.update([0x1f]);
            for c in &s.subclasses {
                h.update(c.as_bytes());
                h.update([0x1e]);
            }
            h.update([0x1d]);
        }
        h.finalize().iter().map(|b| alloc::format!("{b:02x}")).collect()
    }

    fn contains(&self) -> BTreeSet<&str> {
        self.superclasses.iter().flat_map(|s| s.subclasses.iter().map(String::as_str)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Positional,
    Seeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub half_size: usize,
    pub labeled_per_super: usize,
    pub unlabeled_per_super: usize,
    pub make_mixed: bool,
    pub seed: u64,
    pub selection: Selection,
}

impl SplitConfig {
    pub fn positional(half_size: usize, labeled: usize, unlabeled: usize, make_mixed: bool) -> Self {
        Self {
            half_size,
            labeled_per_super: labeled,
            unlabeled_per_super: unlabeled,
            make_mixed,
            seed: 0,
            selection: Selection::Positional,
        }
    }

    fn check_against(&self, h: &ClassHierarchy) -> Result<()> {
        if self.half_size == 0 || self.labeled_per_super == 0 || self.unlabeled_per_super == 0 {
            return Err(Error::Input(
                "half_size, labeled_per_super and unlabeled_per_super must be positive".into(),
            ));
        }
        let supers = h.superclasses.len();
        if 2 * self.half_size > supers {
            return Err(Error::Input(alloc::format!(
                "2 * half_size = {} exceeds the {supers} superclasses",
                2 * self.half_size
            )));
        }
        let need = self.labeled_per_super + self.unlabeled_per_super;
        for s in &h.superclasses[..2 * self.half_size] {
            if need > s.subclasses.len() {
                return Err(Error::Input(alloc::format!(
                    "labeled_per_super + unlabeled_per_super = {need} exceeds the {} subclasses of {:?}",
                    s.subclasses.len(),
                    s.name
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub hierarchy_sha256: String,
    pub config: SplitConfig,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mixed_rule: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub schema: String,
    pub labeled_sets: BTreeMap<String, Vec<String>>,
    pub unlabeled_sets: BTreeMap<String, Vec<String>>,
    pub provenance: Provenance,
}

impl SplitManifest {
    pub fn labeled(&self, name: &str) -> Option<&[String]> {
        self.labeled_sets.get(name).map(Vec::as_slice)
    }

    pub fn unlabeled(&self, name: &str) -> Option<&[String]> {
        self.unlabeled_sets.get(name).map(Vec::as_slice)
    }
}

pub fn build_splits(h: &ClassHierarchy, cfg: &SplitConfig) -> Result<SplitManifest> {
    h.validate()?;
    cfg.check_against(h)?;
    let halves = [&h.superclasses[..cfg.half_size], &h.superclasses[cfg.half_size..2 * cfg.half_size]];
    let mut labeled = [Vec::new(), Vec::new()];
    let mut unlabeled = [Vec::new(), Vec::new()];
    for (half, supers) in halves.iter().enumerate() {
        for (offset, s) in supers.iter().enumerate() {
            let mut order: Vec<&String> = s.subclasses.iter().collect();
            if cfg.selection == Selection::Seeded {
                let index = half * cfg.half_size + offset;
                let mut stream = rng::stream(cfg.seed.wrapping_add(index as u64));
                for i in (1..order.len()).rev() {
                    order.swap(i, rng::index_below(&mut stream, i + 1));
                }
            }
            let (lab, rest) = order.split_at(cfg.labeled_per_super);
            labeled[half].extend(lab.iter().map(|c| (*c).clone()));
            unlabeled[half].extend(rest[..cfg.unlabeled_per_super].iter().map(|c| (*c).clone()));
        }
    }

    let [l1, l2] = labeled;
    let [u1, u2] = unlabeled;
    let mut labeled_sets = BTreeMap::new();
    if cfg.make_mixed {
        let from_l1 = l1.len().div_ceil(2);
        let from_l2 = l1.len() / 2;
        let mixed: Vec<String> = l1[..from_l1].iter().chain(&l2[..from_l2]).cloned().collect();
        labeled_sets.insert("L1.5".into(), mixed);
    }
    labeled_sets.insert("L1".into(), l1);
    labeled_sets.insert("L2".into(), l2);
    let mut unlabeled_sets = BTreeMap::new();
    unlabeled_sets.insert("U1".into(), u1);
    unlabeled_sets.insert("U2".into(), u2);

    Ok(SplitManifest {
        schema: MANIFEST_SCHEMA.into(),
        labeled_sets,
        unlabeled_sets,
        provenance: Provenance {
            hierarchy_sha256: h.digest(),
            config: *cfg,
            seed: cfg.seed,
            mixed_rule: cfg.make_mixed.then(|| MIXED_RULE.into()),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violations: Vec<String>,
}

/// Checks a manifest against its invariants and the hierarchy. Violations
/// are returned as data.
fn as_set(v: &[String]) -> BTreeSet<&str> {
    v.iter().map(String::as_str).collect()
}

pub fn validate_manifest(m: &SplitManifest, h: &ClassHierarchy) -> ValidationReport {
    let mut violations = Vec::new();
    if m.schema != MANIFEST_SCHEMA {
        violations.push(alloc::format!("schema {:?} is not {MANIFEST_SCHEMA}", m.schema));
    }
    for name in ["L1", "L2"] {
        if !m.labeled_sets.contains_key(name) {
            violations.push(alloc::format!("missing labeled set {name}"));
        }
    }
    for name in ["U1", "U2"] {
        if !m.unlabeled_sets.contains_key(name) {
            violations.push(alloc::format!("missing unlabeled set {name}"));
        }
    }

    let known = h.contains();
    let all = m.labeled_sets.iter().chain(&m.unlabeled_sets);
    for (name, classes) in all.clone() {
        let mut seen = BTreeSet::new();
        for c in classes {
            if !known.contains(c.as_str()) {
                violations.push(alloc::format!("unknown class: {c} in {name}"));
            }
            if !seen.insert(c.as_str()) {
                violations.push(alloc::format!("duplicate class: {c} in {name}"));
            }
        }
    }

    for (ln, lc) in &m.labeled_sets {
        let ls = as_set(lc);
        for (un, uc) in &m.unlabeled_sets {
            for c in uc.iter().filter(|c| ls.contains(c.as_str())) {
                violations.push(alloc::format!("labeled/unlabeled overlap: {c} in {ln} and {un}"));
            }
        }
    }
    let pairs = [(&m.labeled_sets, "L1", "L2"), (&m.unlabeled_sets, "U1", "U2")];
    for (sets, a, b) in pairs {
        if let (Some(x), Some(y)) = (sets.get(a), sets.get(b)) {
            let xs = as_set(x);
            for c in y.iter().filter(|c| xs.contains(c.as_str())) {
                violations.push(alloc::format!("{a}/{b} overlap: {c}"));
            }
        }
    }

    if let (Some(mixed), Some(l1), Some(l2)) =
        (m.labeled_sets.get("L1.5"), m.labeled_sets.get("L1"), m.labeled_sets.get("L2"))
    {
        let (s1, s2) = (as_set(l1), as_set(l2));
        let in1 = mixed.iter().filter(|c| s1.contains(c.as_str())).count();
        let in2 = mixed.iter().filter(|c| s2.contains(c.as_str())).count();
        if in1 + in2 != mixed.len() {
            violations.push("L1.5 contains classes outside L1 and L2".into());
        }
        if mixed.len() != l1.len() {
            violations.push(alloc::format!("|L1.5| = {} differs from |L1| = {}", mixed.len(), l1.len()));
        }
        if in1 < in2 || in1 - in2 > 1 {
            violations.push(alloc::format!("L1.5 is not split in half: {in1} from L1, {in2} from L2"));
        }
    }

    ValidationReport { passed: violations.is_empty(), violations }
}
