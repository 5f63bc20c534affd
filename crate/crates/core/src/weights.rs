//! The weight family `g_T`, its Lipschitz-ratio bounds and the uniqueness
//! certificates built on them.
//!
//! `g_T : [0, 1] -> (0, inf)` is increasing with `g_T(0) = 1`. The default
//! family is `g_T(x) = exp(E(x) / T)` for an increasing energy `E` with
//! `E(0) = 0`. For `T = inf` the weight is identically 1.
//!
//! The bounds are `L-(g_T) = min g'_T / g_T` and `L+(g_T) = max g'_T / g_T`
//! over `[0, 1]`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernel::KernelConfig;

/// Grid used for numerical bounds on custom families.
pub const BOUND_GRID_POINTS: usize = 1025;
/// Minimum admissible energy derivative on the grid.
pub const MIN_DERIVATIVE: f64 = 1e-12;
const REFINE_TOL: f64 = 1e-10;

/// A temperature in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Temperature(f64);

impl Temperature {
    pub const INFINITE: Temperature = Temperature(f64::INFINITY);

    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && !t.is_nan() {
            Ok(Self(t))
        } else {
            Err(Error::InvalidTemperature(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Temperature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "+inf" => Ok(Self::INFINITE),
            other => {
                let t = other
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("invalid temperature `{s}`")))?;
                Self::new(t)
            }
        }
    }
}

impl Serialize for Temperature {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        let t = match Repr::deserialize(deserializer)? {
            Repr::Num(t) => Temperature::new(t),
            Repr::Text(s) => s.parse(),
        };
        t.map_err(serde::de::Error::custom)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type TemperatureFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// An increasing energy `E : [0, 1] -> R` with `E(0) = 0` and its derivative.
#[derive(Clone)]
pub struct Energy {
    label: String,
    kind: EnergyKind,
}

#[derive(Clone)]
enum EnergyKind {
    Identity,
    Functions {
        value: ScalarFn,
        derivative: ScalarFn,
        /// Declared `(min E', max E')`, skipping numerical search.
        derivative_range: Option<(f64, f64)>,
    },
    Table(EnergyTable),
}

/// Piecewise-linear energy given by `(x, E(x), E'(x))` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    xs: Vec<f64>,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl EnergyTable {
    pub fn new(rows: Vec<(f64, f64, f64)>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidConfig(
                "energy table needs at least two rows".into(),
            ));
        }
        if rows[0].0 != 0.0 || rows[rows.len() - 1].0 != 1.0 {
            return Err(Error::InvalidConfig(
                "energy table must span x = 0 to x = 1".into(),
            ));
        }
        if rows[0].1 != 0.0 {
            return Err(Error::InvalidConfig(
                "energy table must have E(0) = 0".into(),
            ));
        }
        for w in rows.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidConfig(
                    "energy table x column must be increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidConfig(
                    "energy table E column must be nondecreasing".into(),
                ));
            }
        }
        if rows.iter().any(|r| !(r.1.is_finite() && r.2.is_finite())) {
            return Err(Error::NonFinite("energy table"));
        }
        Ok(Self {
            xs: rows.iter().map(|r| r.0).collect(),
            values: rows.iter().map(|r| r.1).collect(),
            derivatives: rows.iter().map(|r| r.2).collect(),
        })
    }

    /// Parses CSV rows `x,E(x),E'(x)`; blank lines, `#` comments and a
    /// non-numeric header line are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => rows.push((v[0], v[1], v[2])),
                Err(_) if rows.is_empty() && lineno == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "expected `x,E(x),E'(x)`".into(),
                    })
                }
            }
        }
        Self::new(rows)
    }

    fn interpolate(&self, column: &[f64], x: f64) -> f64 {
        let k = self
            .xs
            .partition_point(|&t| t <= x)
            .clamp(1, self.xs.len() - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let s = (x - x0) / (x1 - x0);
        column[k - 1] + s * (column[k] - column[k - 1])
    }
}

impl Energy {
    /// `E(x) = x`, the running example; `E' = 1` exactly.
    pub fn identity() -> Self {
        Self {
            label: "identity".into(),
            kind: EnergyKind::Identity,
        }
    }

    pub fn from_fns<F, D>(label: impl Into<String>, value: F, derivative: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            kind: EnergyKind::Functions {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
                derivative_range: None,
            },
        }
    }

    /// Declares the extrema of `E'` so bounds are computed analytically.
    pub fn with_derivative_range(mut self, min: f64, max: f64) -> Self {
        if let EnergyKind::Functions {
            derivative_range, ..
        } = &mut self.kind
        {
            *derivative_range = Some((min, max));
        }
        self
    }

    pub fn from_table(label: impl Into<String>, table: EnergyTable) -> Self {
        Self {
            label: label.into(),
            kind: EnergyKind::Table(table),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, EnergyKind::Identity)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            EnergyKind::Identity => x,
            EnergyKind::Functions { value, .. } => value(x),
            EnergyKind::Table(t) => t.interpolate(&t.values, x),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            EnergyKind::Identity => 1.0,
            EnergyKind::Functions { derivative, .. } => derivative(x),
            EnergyKind::Table(t) => t.interpolate(&t.derivatives, x),
        }
    }

    /// `(min E', max E')` over `[0, 1]`.
    fn derivative_range(&self) -> Result<(f64, f64)> {
        match &self.kind {
            EnergyKind::Identity => Ok((1.0, 1.0)),
            EnergyKind::Functions {
                derivative_range: Some(r),
                ..
            } => Ok(*r),
            // piecewise-linear derivative: extrema sit on the knots
            EnergyKind::Table(t) => {
                let min = t.derivatives.iter().copied().fold(f64::INFINITY, f64::min);
                let max = t
                    .derivatives
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok((min, max))
            }
            EnergyKind::Functions { derivative, .. } => grid_extrema(|x| derivative(x)),
        }
    }
}

impl fmt::Debug for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Energy")
            .field("label", &self.label)
            .finish()
    }
}

/// Minimum and maximum of `h` over `[0, 1]`: 1025-point grid followed by
/// golden-section refinement around the discrete extrema.
fn grid_extrema<H: Fn(f64) -> f64>(h: H) -> Result<(f64, f64)> {
    let last = (BOUND_GRID_POINTS - 1) as f64;
    let values: Vec<f64> = (0..BOUND_GRID_POINTS).map(|k| h(k as f64 / last)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("weight bound grid"));
    }
    let (mut kmin, mut kmax) = (0, 0);
    for (k, &v) in values.iter().enumerate() {
        if v < values[kmin] {
            kmin = k;
        }
        if v > values[kmax] {
            kmax = k;
        }
    }
    let bracket = |k: usize| {
        let lo = k.saturating_sub(1) as f64 / last;
        let hi = (k + 1).min(BOUND_GRID_POINTS - 1) as f64 / last;
        (lo, hi)
    };
    let (lo, hi) = bracket(kmin);
    let min = golden_section(&h, lo, hi, false).min(values[kmin]);
    let (lo, hi) = bracket(kmax);
    let max = golden_section(&h, lo, hi, true).max(values[kmax]);
    Ok((min, max))
}

fn golden_section<H: Fn(f64) -> f64>(h: &H, mut a: f64, mut b: f64, maximize: bool) -> f64 {
    let sign = if maximize { -1.0 } else { 1.0 };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (sign * h(c), sign * h(d));
    while (b - a).abs() > REFINE_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = sign * h(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = sign * h(d);
        }
    }
    sign * h(0.5 * (a + b))
}

/// The weight family `g_T`.
#[derive(Clone)]
pub enum WeightFunction {
    /// `g_T(x) = exp(E(x) / T)`.
    ExpEnergy(Energy),
    /// Arbitrary family given as `g(T, x)` and `dg/dx(T, x)`.
    Custom {
        label: String,
        g: TemperatureFn,
        dg: TemperatureFn,
    },
}

impl fmt::Debug for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightFunction({})", self.label())
    }
}

impl Default for WeightFunction {
    fn default() -> Self {
        Self::exp_identity()
    }
}

/// `(L-, L+)` with `0 < L- <= L+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipBounds {
    pub l_minus: f64,
    pub l_plus: f64,
}

impl WeightFunction {
    /// `g_T(x) = exp(x / T)`.
    pub fn exp_identity() -> Self {
        Self::ExpEnergy(Energy::identity())
    }

    /// Validates that `E'` stays above [`MIN_DERIVATIVE`] on the grid.
    pub fn exp_energy(energy: Energy) -> Result<Self> {
        if !energy.is_identity() {
            let last = (BOUND_GRID_POINTS - 1) as f64;
            for k in 0..BOUND_GRID_POINTS {
                let x = k as f64 / last;
                let d = energy.derivative(x);
                if !d.is_finite() {
                    return Err(Error::NonFinite("energy derivative"));
                }
                if d < MIN_DERIVATIVE {
                    return Err(Error::NonPositiveDerivative { x, value: d });
                }
            }
            if energy.value(0.0).abs() > 1e-12 {
                return Err(Error::InvalidConfig("energy must satisfy E(0) = 0".into()));
            }
        }
        Ok(Self::ExpEnergy(energy))
    }

    pub fn custom<G, D>(label: impl Into<String>, g: G, dg: D) -> Self
    where
        G: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::Custom {
            label: label.into(),
            g: Arc::new(g),
            dg: Arc::new(dg),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::ExpEnergy(e) => format!("exp-energy:{}", e.label()),
            Self::Custom { label, .. } => format!("custom:{label}"),
        }
    }

    /// True for `exp(x / T)`, the family the complete-graph theory needs.
    pub fn is_exp_identity(&self) -> bool {
        matches!(self, Self::ExpEnergy(e) if e.is_identity())
    }

    /// `g_T(x)`, checked.
    pub fn g_eval(&self, t: Temperature, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let v = self.log_g(t, x).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite("g_T"))
        }
    }

    /// `ln g_T(x)` without domain checks; the kernel works in log space so
    /// that small temperatures do not overflow.
    #[inline]
    pub fn log_g(&self, t: Temperature, x: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        match self {
            Self::ExpEnergy(e) => e.value(x) / t.value(),
            Self::Custom { g, .. } => g(t.value(), x).ln(),
        }
    }

    /// `g'_T(x) / g_T(x)`.
    pub fn log_derivative(&self, t: Temperature, x: f64) -> f64 {
        if t.is_infinite() {
            return 0.0;
        }
        match self {
            Self::ExpEnergy(e) => e.derivative(x) / t.value(),
            Self::Custom { g, dg, .. } => dg(t.value(), x) / g(t.value(), x),
        }
    }

    pub fn lip_bounds(&self, t: Temperature) -> Result<LipBounds> {
        if t.is_infinite() {
            return Err(Error::InvalidTemperature(t.value()));
        }
        let (l_minus, l_plus) = match self {
            Self::ExpEnergy(e) => {
                let (lo, hi) = e.derivative_range()?;
                (lo / t.value(), hi / t.value())
            }
            Self::Custom { .. } => grid_extrema(|x| self.log_derivative(t, x))?,
        };
        if !(l_minus.is_finite() && l_plus.is_finite()) {
            return Err(Error::NonFinite("Lipschitz bounds"));
        }
        if l_minus <= 0.0 {
            return Err(Error::NonPositiveDerivative {
                x: f64::NAN,
                value: l_minus,
            });
        }
        Ok(LipBounds { l_minus, l_plus })
    }

    /// `L+(g_T)`, with `L+(g_inf) = 0`.
    pub fn lip_plus(&self, t: Temperature) -> Result<f64> {
        if t.is_infinite() {
            Ok(0.0)
        } else {
            Ok(self.lip_bounds(t)?.l_plus)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    UniqueByHomogeneity,
    UniqueByBirkhoff,
    Unknown,
}

/// One evaluated sufficient condition `lhs (<= or <) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub description: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Inequality {
    fn new(description: String, lhs: f64, rhs: f64, strict: bool) -> Self {
        let holds = if strict { lhs < rhs } else { lhs <= rhs };
        Self {
            description,
            lhs,
            rhs,
            strict,
            holds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessCertificate {
    pub verdict: Verdict,
    /// Every condition that was evaluated, in checking order.
    pub detail: Vec<Inequality>,
}

/// Checks the sufficient conditions for a unique fixed point, in order:
/// homogeneity (`n L+ <= 1`, damped: `n L+(T1) + (n-1) L+(T2) <= 1`), then,
/// for positive `C` with a supplied `tau_b`, Birkhoff contraction
/// (`2 L+ < 1 - tau_b`, damped: `2 (L+(T1) + L+(T2)) < 1 - tau_b`).
pub fn certify_uniqueness(
    graph: &Graph,
    weights: &WeightFunction,
    config: &KernelConfig,
    tau_b: Option<f64>,
) -> Result<UniquenessCertificate> {
    config.validate(graph.n())?;
    let n = graph.n() as f64;
    let l1 = weights.lip_plus(config.t1)?;
    let damped = config.is_damped();
    let l2 = if damped {
        weights.lip_plus(config.t2)?
    } else {
        0.0
    };

    let mut detail = Vec::new();
    let homogeneity = if damped {
        Inequality::new(
            "n L+(g_T1) + (n-1) L+(g_T2) <= 1".into(),
            n * l1 + (n - 1.0) * l2,
            1.0,
            false,
        )
    } else {
        Inequality::new("n L+(g_T) <= 1".into(), n * l1, 1.0, false)
    };
    let mut verdict = if homogeneity.holds {
        Verdict::UniqueByHomogeneity
    } else {
        Verdict::Unknown
    };
    detail.push(homogeneity);

    if let Some(tau) = tau_b {
        if graph.is_positive() {
            let birkhoff = if damped {
                Inequality::new(
                    "2 (L+(g_T1) + L+(g_T2)) < 1 - tau_B(C)".into(),
                    2.0 * (l1 + l2),
                    1.0 - tau,
                    true,
                )
            } else {
                Inequality::new("2 L+(g_T) < 1 - tau_B(C)".into(), 2.0 * l1, 1.0 - tau, true)
            };
            if verdict == Verdict::Unknown && birkhoff.holds {
                verdict = Verdict::UniqueByBirkhoff;
            }
            detail.push(birkhoff);
        }
    }
    Ok(UniquenessCertificate { verdict, detail })
}
