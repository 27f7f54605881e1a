//! DNN architectures as ordered layer sequences, with exact per-layer
//! operation counts.
//!
//! Four primitive layer kinds are modeled: convolution, pooling, fully
//! connected and activation. Composite blocks (residual bottlenecks,
//! depthwise-separable convolutions, inception branches) are expanded into
//! these primitives. Batch-norm and element-wise residual adds are carried as
//! activation layers of kind [`ActivationKind::Other`] with an ops-per-element
//! coefficient.

mod builders;
pub mod zoo;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builders::canonical_zoo;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArchError {
    #[error("arithmetic overflow while counting operations")]
    Overflow,
    #[error("invalid layer: {0}")]
    Invalid(Violation),
    #[error("layer {index}: {source}")]
    Layer {
        index: usize,
        #[source]
        source: Box<ArchError>,
    },
    #[error("{} validation error(s): {}", .0.len(), join_violations(.0))]
    Validation(Vec<Violation>),
    #[error("unknown zoo entry ({name}, {variant}); valid entries: {valid}")]
    UnknownEntry {
        name: String,
        variant: String,
        valid: String,
    },
    #[error("zoo file {path}: {reason}")]
    ZooFile { path: String, reason: String },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// One invariant violation found while validating an architecture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Layer index, or `None` for architecture-level problems.
    pub layer: Option<usize>,
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(layer: Option<usize>, field: &str, message: impl Into<String>) -> Self {
        Self {
            layer,
            field: field.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.layer {
            Some(i) => write!(f, "layer {i}, field {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// How strides that do not divide the input grid are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrideMode {
    /// Reject configurations where `S` does not divide `L` and `W`.
    #[default]
    Strict,
    /// Use `floor(L/S) * floor(W/S)` output positions and report a warning.
    Permissive,
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

fn one() -> u64 {
    1
}

/// Convolution over a `c x l x w` input with `n` kernels of size `f x f`
/// applied at stride `s`. `l`, `w` are the grid the kernel is swept over, so
/// "same"-padded convolutions use the padded grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvLayer {
    pub c: u64,
    pub l: u64,
    pub w: u64,
    pub s: u64,
    pub n: u64,
    pub f: u64,
    /// Kernel width when the kernel is not square (factorized `1 x k` kernels).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fw: Option<u64>,
    /// Channel groups; `groups == c == n` is a depthwise convolution.
    #[serde(default = "one", skip_serializing_if = "is_one")]
    pub groups: u64,
}

impl ConvLayer {
    pub fn new(c: u64, l: u64, w: u64, s: u64, n: u64, f: u64) -> Self {
        Self {
            c,
            l,
            w,
            s,
            n,
            f,
            fw: None,
            groups: 1,
        }
    }

    pub fn kernel_width(&self) -> u64 {
        self.fw.unwrap_or(self.f)
    }

    fn check(&self, mode: StrideMode) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        positive(
            &mut out,
            &[
                ("c", self.c),
                ("l", self.l),
                ("w", self.w),
                ("s", self.s),
                ("n", self.n),
                ("f", self.f),
                ("fw", self.kernel_width()),
                ("groups", self.groups),
            ],
        );
        if !out.is_empty() {
            return out;
        }
        stride_check(&mut out, self.l, self.w, self.s, mode);
        if self.f > self.l {
            out.push((
                "f",
                format!("kernel size {} exceeds input height {}", self.f, self.l),
            ));
        }
        if self.kernel_width() > self.w {
            out.push((
                "fw",
                format!(
                    "kernel width {} exceeds input width {}",
                    self.kernel_width(),
                    self.w
                ),
            ));
        }
        if !self.c.is_multiple_of(self.groups) || !self.n.is_multiple_of(self.groups) {
            out.push((
                "groups",
                format!(
                    "{} groups must divide c={} and n={}",
                    self.groups, self.c, self.n
                ),
            ));
        }
        out
    }

    pub fn op_count(&self, mode: StrideMode) -> Result<OpCount, ArchError> {
        first_violation(self.check(mode))?;
        let positions = checked_mul(&[grid(self.l, self.s), grid(self.w, self.s)])?;
        let per_position =
            checked_mul(&[self.n, self.c / self.groups, self.f, self.kernel_width()])?;
        let n = positions
            .checked_mul(per_position)
            .ok_or(ArchError::Overflow)?;
        Ok(OpCount {
            mul: n,
            add: n,
            ..OpCount::default()
        })
    }
}

/// Max-pooling over a `c x l x w` input with an `f x f` window at stride `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolLayer {
    pub c: u64,
    pub l: u64,
    pub w: u64,
    pub s: u64,
    pub f: u64,
}

impl PoolLayer {
    pub fn new(c: u64, l: u64, w: u64, s: u64, f: u64) -> Self {
        Self { c, l, w, s, f }
    }

    fn check(&self, mode: StrideMode) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        positive(
            &mut out,
            &[
                ("c", self.c),
                ("l", self.l),
                ("w", self.w),
                ("s", self.s),
                ("f", self.f),
            ],
        );
        if !out.is_empty() {
            return out;
        }
        stride_check(&mut out, self.l, self.w, self.s, mode);
        if self.f > self.l || self.f > self.w {
            out.push((
                "f",
                format!("window {} exceeds input {}x{}", self.f, self.l, self.w),
            ));
        }
        out
    }

    pub fn op_count(&self, mode: StrideMode) -> Result<OpCount, ArchError> {
        first_violation(self.check(mode))?;
        let n = checked_mul(&[
            self.c,
            grid(self.l, self.s),
            grid(self.w, self.s),
            self.f,
            self.f,
        ])?;
        Ok(OpCount {
            cmp: n,
            ..OpCount::default()
        })
    }
}

/// Fully connected layer mapping `x` input neurons to `y` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FcLayer {
    pub x: u64,
    pub y: u64,
}

impl FcLayer {
    pub fn new(x: u64, y: u64) -> Self {
        Self { x, y }
    }

    fn check(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        positive(&mut out, &[("x", self.x), ("y", self.y)]);
        out
    }

    pub fn op_count(&self) -> Result<OpCount, ArchError> {
        first_violation(self.check())?;
        let n = checked_mul(&[self.x, self.y])?;
        Ok(OpCount {
            mul: n,
            add: n,
            ..OpCount::default()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Relu,
    Tanh,
    Sigmoid,
    Softmax,
    /// Element-wise work that is neither of the above (batch-norm, residual add).
    Other,
}

/// Operations per element for each activation kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaTable {
    pub relu: f64,
    pub tanh: f64,
    pub sigmoid: f64,
    pub softmax: f64,
}

impl Default for AlphaTable {
    fn default() -> Self {
        Self {
            relu: 1.0,
            tanh: 4.0,
            sigmoid: 3.0,
            softmax: 3.0,
        }
    }
}

impl AlphaTable {
    /// `None` for [`ActivationKind::Other`], whose coefficient is per layer.
    pub fn alpha(&self, kind: ActivationKind) -> Option<f64> {
        match kind {
            ActivationKind::Relu => Some(self.relu),
            ActivationKind::Tanh => Some(self.tanh),
            ActivationKind::Sigmoid => Some(self.sigmoid),
            ActivationKind::Softmax => Some(self.softmax),
            ActivationKind::Other => None,
        }
    }
}

/// Element-wise activation over a `c x l x w` input costing `alpha`
/// operations per element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationLayer {
    pub c: u64,
    pub l: u64,
    pub w: u64,
    pub alpha: f64,
    pub function: ActivationKind,
}

impl ActivationLayer {
    /// Coefficient taken from `table`; `Other` gets `alpha = 1`.
    pub fn new(function: ActivationKind, c: u64, l: u64, w: u64, table: &AlphaTable) -> Self {
        Self {
            c,
            l,
            w,
            alpha: table.alpha(function).unwrap_or(1.0),
            function,
        }
    }

    pub fn other(c: u64, l: u64, w: u64, alpha: f64) -> Self {
        Self {
            c,
            l,
            w,
            alpha,
            function: ActivationKind::Other,
        }
    }

    fn check(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        positive(&mut out, &[("c", self.c), ("l", self.l), ("w", self.w)]);
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            out.push((
                "alpha",
                format!("coefficient {} must be finite and >= 0", self.alpha),
            ));
        }
        out
    }

    /// In strict mode a non-integral `alpha * c * l * w` is rejected; in
    /// permissive mode it is rounded to the nearest integer.
    pub fn op_count(&self, mode: StrideMode) -> Result<OpCount, ArchError> {
        first_violation(self.check())?;
        let elements = checked_mul(&[self.c, self.l, self.w])?;
        let exact = self.alpha * elements as f64;
        let rounded = exact.round();
        if mode == StrideMode::Strict && (exact - rounded).abs() > 1e-9 * exact.max(1.0) {
            return Err(ArchError::Invalid(Violation::new(
                None,
                "alpha",
                format!("alpha * c * l * w = {exact} is not integral"),
            )));
        }
        if rounded >= u64::MAX as f64 {
            return Err(ArchError::Overflow);
        }
        Ok(OpCount {
            act: rounded as u64,
            ..OpCount::default()
        })
    }
}

fn positive(out: &mut Vec<(&'static str, String)>, fields: &[(&'static str, u64)]) {
    for &(name, v) in fields {
        if v == 0 {
            out.push((name, "must be a positive integer".to_string()));
        }
    }
}

fn stride_check(out: &mut Vec<(&'static str, String)>, l: u64, w: u64, s: u64, mode: StrideMode) {
    if mode == StrideMode::Strict && (!l.is_multiple_of(s) || !w.is_multiple_of(s)) {
        out.push(("s", format!("stride {s} does not divide input {l}x{w}")));
    }
}

fn first_violation(v: Vec<(&'static str, String)>) -> Result<(), ArchError> {
    match v.into_iter().next() {
        Some((field, msg)) => Err(ArchError::Invalid(Violation::new(None, field, msg))),
        None => Ok(()),
    }
}

/// Output positions along one axis. Exact when `s` divides `len`, floored
/// otherwise (only reachable in permissive mode).
fn grid(len: u64, s: u64) -> u64 {
    len / s
}

fn checked_mul(xs: &[u64]) -> Result<u64, ArchError> {
    xs.iter()
        .try_fold(1u64, |acc, &x| acc.checked_mul(x))
        .filter(|&v| v <= i64::MAX as u64)
        .ok_or(ArchError::Overflow)
}

/// Exact operation counts for one layer or a whole network.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub mul: u64,
    pub add: u64,
    pub cmp: u64,
    pub act: u64,
}

impl OpCount {
    pub fn checked_add(&self, other: &OpCount) -> Result<OpCount, ArchError> {
        let f = |a: u64, b: u64| a.checked_add(b).ok_or(ArchError::Overflow);
        Ok(OpCount {
            mul: f(self.mul, other.mul)?,
            add: f(self.add, other.add)?,
            cmp: f(self.cmp, other.cmp)?,
            act: f(self.act, other.act)?,
        })
    }

    /// All operations regardless of type.
    pub fn total(&self) -> Result<u64, ArchError> {
        [self.add, self.cmp, self.act]
            .iter()
            .try_fold(self.mul, |acc, &x| acc.checked_add(x))
            .ok_or(ArchError::Overflow)
    }
}

/// The layer primitives. Serialized with a `kind` tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerOp {
    Conv(ConvLayer),
    Pool(PoolLayer),
    Fc(FcLayer),
    Activation(ActivationLayer),
}

impl LayerOp {
    pub fn kind_name(&self) -> &'static str {
        match self {
            LayerOp::Conv(_) => "conv",
            LayerOp::Pool(_) => "pool",
            LayerOp::Fc(_) => "fc",
            LayerOp::Activation(_) => "activation",
        }
    }

    pub fn op_count(&self, mode: StrideMode) -> Result<OpCount, ArchError> {
        match self {
            LayerOp::Conv(l) => l.op_count(mode),
            LayerOp::Pool(l) => l.op_count(mode),
            LayerOp::Fc(l) => l.op_count(),
            LayerOp::Activation(l) => l.op_count(mode),
        }
    }

    fn check(&self, mode: StrideMode) -> Vec<(&'static str, String)> {
        match self {
            LayerOp::Conv(l) => l.check(mode),
            LayerOp::Pool(l) => l.check(mode),
            LayerOp::Fc(l) => l.check(),
            LayerOp::Activation(l) => l.check(),
        }
    }

    fn non_divisible(&self) -> bool {
        let (l, w, s) = match self {
            LayerOp::Conv(c) => (c.l, c.w, c.s),
            LayerOp::Pool(p) => (p.l, p.w, p.s),
            _ => return false,
        };
        s > 0 && (l % s != 0 || w % s != 0)
    }

    pub fn input_shape(&self) -> Shape {
        match *self {
            LayerOp::Conv(c) => Shape::Spatial {
                c: c.c,
                l: c.l,
                w: c.w,
            },
            LayerOp::Pool(p) => Shape::Spatial {
                c: p.c,
                l: p.l,
                w: p.w,
            },
            LayerOp::Activation(a) => Shape::Spatial {
                c: a.c,
                l: a.l,
                w: a.w,
            },
            LayerOp::Fc(f) => Shape::Flat(f.x),
        }
    }

    pub fn output_shape(&self) -> Shape {
        match *self {
            LayerOp::Conv(c) if c.s > 0 => Shape::Spatial {
                c: c.n,
                l: grid(c.l, c.s),
                w: grid(c.w, c.s),
            },
            LayerOp::Pool(p) if p.s > 0 => Shape::Spatial {
                c: p.c,
                l: grid(p.l, p.s),
                w: grid(p.w, p.s),
            },
            LayerOp::Fc(f) => Shape::Flat(f.y),
            other => other.input_shape(),
        }
    }
}

/// Tensor shape flowing between layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Spatial { c: u64, l: u64, w: u64 },
    Flat(u64),
}

impl Shape {
    pub fn volume(&self) -> u64 {
        match *self {
            Shape::Spatial { c, l, w } => c.saturating_mul(l).saturating_mul(w),
            Shape::Flat(n) => n,
        }
    }

    fn feeds(&self, next: &Shape) -> bool {
        match (self, next) {
            (Shape::Spatial { .. }, Shape::Spatial { .. }) => self == next,
            _ => self.volume() == next.volume(),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Spatial { c, l, w } => write!(f, "{c}x{l}x{w}"),
            Shape::Flat(n) => write!(f, "{n}"),
        }
    }
}

/// A layer in an architecture.
///
/// `branch` marks a layer that reads from an earlier tensor (inception
/// branch, residual shortcut, concatenated block output) rather than from the
/// layer immediately before it, so the shape-consistency check is skipped for
/// that edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(flatten)]
    pub op: LayerOp,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub branch: bool,
}

impl From<LayerOp> for Layer {
    fn from(op: LayerOp) -> Self {
        Self { op, branch: false }
    }
}

macro_rules! layer_from {
    ($t:ty, $v:ident) => {
        impl From<$t> for Layer {
            fn from(l: $t) -> Self {
                LayerOp::$v(l).into()
            }
        }
    };
}
layer_from!(ConvLayer, Conv);
layer_from!(PoolLayer, Pool);
layer_from!(FcLayer, Fc);
layer_from!(ActivationLayer, Activation);

/// A named network plus the fine-tuning variant it represents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub name: String,
    pub variant: String,
    #[serde(default)]
    pub stride_mode: StrideMode,
    pub layers: Vec<Layer>,
}

impl ArchitectureSpec {
    pub fn new(name: impl Into<String>, variant: impl Into<String>, layers: Vec<Layer>) -> Self {
        Self {
            name: name.into(),
            variant: variant.into(),
            stride_mode: StrideMode::Strict,
            layers,
        }
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("architecture serializes")
    }

    /// Validates and returns the spec, or every violation found.
    pub fn validated(self) -> Result<Self, ArchError> {
        let v = validate_arch(&self);
        if v.errors.is_empty() {
            Ok(self)
        } else {
            Err(ArchError::Validation(v.errors))
        }
    }

    /// Re-derives the coefficient of every non-`Other` activation layer.
    pub fn with_alpha_table(mut self, table: &AlphaTable) -> Self {
        for layer in &mut self.layers {
            if let LayerOp::Activation(a) = &mut layer.op {
                if let Some(alpha) = table.alpha(a.function) {
                    a.alpha = alpha;
                }
            }
        }
        self
    }

    /// `"name variant"` label used in listings.
    pub fn label(&self) -> String {
        format!("{} {}", self.name, self.variant)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub errors: Vec<Violation>,
    /// Non-divisible strides accepted under [`StrideMode::Permissive`].
    pub warnings: Vec<Violation>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Collects every invariant violation in `arch` (not only the first).
pub fn validate_arch(arch: &ArchitectureSpec) -> Validation {
    let mut v = Validation::default();
    if arch.layers.is_empty() {
        v.errors
            .push(Violation::new(None, "layers", "empty architecture"));
        return v;
    }
    if arch.name.trim().is_empty() {
        v.errors.push(Violation::new(None, "name", "empty name"));
    }
    let mode = arch.stride_mode;
    let mut prev: Option<Shape> = None;
    for (i, layer) in arch.layers.iter().enumerate() {
        let problems = layer.op.check(mode);
        let ok = problems.is_empty();
        for (field, msg) in problems {
            v.errors.push(Violation::new(Some(i), field, msg));
        }
        if ok && mode == StrideMode::Permissive && layer.op.non_divisible() {
            v.warnings.push(Violation::new(
                Some(i),
                "s",
                "stride does not divide input; output grid floored",
            ));
        }
        if ok {
            if let LayerOp::Activation(a) = layer.op {
                if let Err(e) = a.op_count(mode) {
                    v.errors
                        .push(Violation::new(Some(i), "alpha", e.to_string()));
                }
            }
        }
        let input = layer.op.input_shape();
        if let (Some(p), false) = (prev, layer.branch) {
            if !p.feeds(&input) {
                v.errors.push(Violation::new(
                    Some(i),
                    "shape",
                    format!("input {input} does not match previous output {p}"),
                ));
            }
        }
        prev = Some(layer.op.output_shape());
    }
    for w in &v.warnings {
        log::debug!("{}: {w}", arch.label());
    }
    v
}

/// Strict-mode convolution count: `mul = add = (L/S)(W/S) N C F^2`.
pub fn conv_op_count(layer: &ConvLayer) -> Result<OpCount, ArchError> {
    layer.op_count(StrideMode::Strict)
}

/// Strict-mode pooling count: `cmp = C (L/S)(W/S) F^2`.
pub fn pool_op_count(layer: &PoolLayer) -> Result<OpCount, ArchError> {
    layer.op_count(StrideMode::Strict)
}

pub fn fc_op_count(layer: &FcLayer) -> Result<OpCount, ArchError> {
    layer.op_count()
}

/// Strict-mode activation count: `act = alpha C L W`.
pub fn act_op_count(layer: &ActivationLayer) -> Result<OpCount, ArchError> {
    layer.op_count(StrideMode::Strict)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArchOpCounts {
    pub per_layer: Vec<(usize, OpCount)>,
    pub totals: OpCount,
}

/// Per-layer counts under the architecture's stride mode, plus their sum.
pub fn arch_op_counts(arch: &ArchitectureSpec) -> Result<ArchOpCounts, ArchError> {
    let mut per_layer = Vec::with_capacity(arch.layers.len());
    let mut totals = OpCount::default();
    for (index, layer) in arch.layers.iter().enumerate() {
        let count = layer
            .op
            .op_count(arch.stride_mode)
            .map_err(|e| ArchError::Layer {
                index,
                source: Box::new(e),
            })?;
        totals = totals.checked_add(&count)?;
        per_layer.push((index, count));
    }
    Ok(ArchOpCounts { per_layer, totals })
}
