//! Abstract syntax of CGF environments and the well-labeling check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::AbstractState;
use crate::multiset::Multiset;

/// Channel or species identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Name(String);

impl Name {
    /// Accepts `[A-Za-z][A-Za-z0-9_]*`.
    pub fn new(s: &str) -> Result<Self, InvalidName> {
        if is_identifier(s) {
            Ok(Name(s.to_owned()))
        } else {
            Err(InvalidName(s.to_owned()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid identifier `{0}`")]
pub struct InvalidName(pub String);

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Label of a basic action. Explicit labels are identifiers; generated ones
/// have the form `<Species>#<index>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(s: impl Into<String>) -> Self {
        Label(s.into())
    }

    pub fn auto(species: &Name, index: usize) -> Self {
        Label(format!("{species}#{index}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// 1-based source position.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ActionKind {
    Delay,
    Input(Name),
    Output(Name),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasicAction {
    pub kind: ActionKind,
    pub rate: BigRational,
    pub label: Label,
}

impl BasicAction {
    pub fn channel(&self) -> Option<&Name> {
        match &self.kind {
            ActionKind::Delay => None,
            ActionKind::Input(a) | ActionKind::Output(a) => Some(a),
        }
    }
}

/// `π^λ.P` with the continuation already flattened to its multiset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prefix {
    pub action: BasicAction,
    pub product: Multiset,
    pub span: Option<Span>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeciesDef {
    pub name: Name,
    pub summands: Vec<Prefix>,
    pub span: Option<Span>,
}

/// Position of a prefix: `(species index, summand index)`. The derived order
/// is declaration order.
pub type PrefixPos = (usize, usize);

/// Ordered list of species definitions, indexed by name and by label.
#[derive(Debug, Clone)]
pub struct Environment {
    species: Vec<SpeciesDef>,
    by_name: BTreeMap<Name, usize>,
    by_label: HashMap<Label, PrefixPos>,
}

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.species == other.species
    }
}

impl Eq for Environment {}

impl Environment {
    /// Builds the indices. No validation happens here; see
    /// [`validate_well_labeled`]. On duplicate names or labels the first
    /// occurrence wins in lookups.
    pub fn new(species: Vec<SpeciesDef>) -> Self {
        let mut by_name = BTreeMap::new();
        let mut by_label = HashMap::new();
        for (i, def) in species.iter().enumerate() {
            by_name.entry(def.name.clone()).or_insert(i);
            for (k, p) in def.summands.iter().enumerate() {
                by_label.entry(p.action.label.clone()).or_insert((i, k));
            }
        }
        Environment {
            species,
            by_name,
            by_label,
        }
    }

    pub fn species(&self) -> &[SpeciesDef] {
        &self.species
    }

    pub fn species_names(&self) -> impl Iterator<Item = &Name> {
        self.species.iter().map(|d| &d.name)
    }

    pub fn get(&self, name: &Name) -> Option<&SpeciesDef> {
        self.by_name.get(name).map(|&i| &self.species[i])
    }

    pub fn index_of(&self, name: &Name) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn is_defined(&self, name: &Name) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn prefix_at(&self, pos: PrefixPos) -> &Prefix {
        &self.species[pos.0].summands[pos.1]
    }

    pub fn position_of(&self, label: &Label) -> Option<PrefixPos> {
        self.by_label.get(label).copied()
    }

    /// Species whose definition contains `label`.
    pub fn owner_of(&self, label: &Label) -> Option<&Name> {
        self.position_of(label).map(|(i, _)| &self.species[i].name)
    }

    /// All prefixes with their owning species, in declaration order.
    pub fn prefixes(&self) -> impl Iterator<Item = (PrefixPos, &Name, &Prefix)> {
        self.species.iter().enumerate().flat_map(|(i, def)| {
            def.summands
                .iter()
                .enumerate()
                .map(move |(k, p)| ((i, k), &def.name, p))
        })
    }
}

/// `E.X.λ`: the unique prefix labelled `label` in the definition of `species`.
pub fn lookup_action<'e>(
    env: &'e Environment,
    species: &Name,
    label: &Label,
) -> Result<&'e Prefix, LookupError> {
    let def = env
        .get(species)
        .ok_or_else(|| LookupError::UndefinedSpecies(species.clone()))?;
    def.summands
        .iter()
        .find(|p| &p.action.label == label)
        .ok_or_else(|| LookupError::LabelNotFound {
            species: species.clone(),
            label: label.clone(),
        })
}

/// `ℒ(E.X)`.
pub fn labels_of(env: &Environment, species: &Name) -> Result<BTreeSet<Label>, LookupError> {
    let def = env
        .get(species)
        .ok_or_else(|| LookupError::UndefinedSpecies(species.clone()))?;
    Ok(def
        .summands
        .iter()
        .map(|p| p.action.label.clone())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("species `{0}` is not defined")]
    UndefinedSpecies(Name),
    #[error("label `{label}` does not occur in the definition of `{species}`")]
    LabelNotFound { species: Name, label: Label },
}

/// One problem found while parsing or validating a model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Diagnostic {
    #[error("{span}: syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("{second}: species `{name}` already defined at {first}")]
    DuplicateSpecies {
        name: Name,
        first: Span,
        second: Span,
    },
    #[error("{second}: label `{label}` already used at {first}")]
    DuplicateLabel {
        label: Label,
        first: Span,
        second: Span,
    },
    #[error("{}: species `{name}` is referenced but never defined", fmt_span(span))]
    UndefinedSpecies { name: Name, span: Option<Span> },
    #[error("{span}: rate must be positive")]
    NonPositiveRate { span: Span },
    #[error("model has no `init` statement")]
    MissingInit,
    #[error("{span}: second `init` statement")]
    DuplicateInit { span: Span },
}

fn fmt_span(span: &Option<Span>) -> String {
    span.map(|s| s.to_string()).unwrap_or_else(|| "?".into())
}

/// Every problem found in a model, in source order.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{}", self.diagnostics.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
pub struct ModelError {
    pub diagnostics: Vec<Diagnostic>,
}

/// Checks that all labels are pairwise distinct, all rates positive, and every
/// species mentioned in a product is defined.
pub fn validate_well_labeled(env: &Environment) -> Result<(), Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut names: HashMap<&Name, Span> = HashMap::new();
    for def in env.species() {
        let here = def.span.unwrap_or_default();
        if let Some(first) = names.insert(&def.name, here) {
            diags.push(Diagnostic::DuplicateSpecies {
                name: def.name.clone(),
                first,
                second: here,
            });
        }
    }
    let mut seen: HashMap<&Label, Span> = HashMap::new();
    for (_, _, p) in env.prefixes() {
        let here = p.span.unwrap_or_default();
        if let Some(first) = seen.get(&p.action.label) {
            diags.push(Diagnostic::DuplicateLabel {
                label: p.action.label.clone(),
                first: *first,
                second: here,
            });
        } else {
            seen.insert(&p.action.label, here);
        }
        if !p.action.rate.is_positive() {
            diags.push(Diagnostic::NonPositiveRate { span: here });
        }
        for name in p.product.species() {
            if !env.is_defined(name) {
                diags.push(Diagnostic::UndefinedSpecies {
                    name: name.clone(),
                    span: p.span,
                });
            }
        }
    }
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// The initial solution of a model: one multiset, or a family of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialDecl {
    Concrete(Multiset),
    Abstract(AbstractState),
}

impl InitialDecl {
    /// The abstract view (`α(M)` for a concrete declaration).
    pub fn to_abstract(&self) -> AbstractState {
        match self {
            InitialDecl::Concrete(m) => AbstractState::alpha(m),
            InitialDecl::Abstract(a) => a.clone(),
        }
    }

    /// The concrete multiset, if the declaration denotes exactly one.
    pub fn as_concrete(&self) -> Option<Multiset> {
        match self {
            InitialDecl::Concrete(m) => Some(m.clone()),
            InitialDecl::Abstract(a) => a.as_exact(),
        }
    }

    pub fn species(&self) -> Vec<Name> {
        match self {
            InitialDecl::Concrete(m) => m.species().cloned().collect(),
            InitialDecl::Abstract(a) => a.species().cloned().collect(),
        }
    }
}

/// Species of the initial declaration that the environment does not define.
pub fn check_initial(
    env: &Environment,
    init: &InitialDecl,
    span: Option<Span>,
) -> Result<(), Vec<Diagnostic>> {
    let diags: Vec<_> = init
        .species()
        .into_iter()
        .filter(|n| !env.is_defined(n))
        .map(|name| Diagnostic::UndefinedSpecies { name, span })
        .collect();
    if diags.is_empty() {
        Ok(())
    } else {
        Err(diags)
    }
}

/// A parsed and validated model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub env: Environment,
    pub init: InitialDecl,
}

impl fmt::Display for Environment {
    /// Renders the environment in model-file syntax with explicit labels.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for def in &self.species {
            write!(f, "species {} = ", def.name)?;
            if def.summands.is_empty() {
                write!(f, "0")?;
            }
            for (k, p) in def.summands.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                let rate = &p.action.rate;
                match &p.action.kind {
                    ActionKind::Delay => write!(f, "tau({rate})")?,
                    ActionKind::Input(a) => write!(f, "?{a}({rate})")?,
                    ActionKind::Output(a) => write!(f, "!{a}({rate})")?,
                }
                if is_identifier(p.action.label.as_str()) {
                    write!(f, "@{}", p.action.label)?;
                }
                write!(f, ".")?;
                if p.product.is_empty() {
                    write!(f, "0")?;
                } else {
                    let parts: Vec<String> = p
                        .product
                        .iter()
                        .flat_map(|(n, c)| std::iter::repeat_n(n.to_string(), c as usize))
                        .collect();
                    write!(f, "{}", parts.join("|"))?;
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
