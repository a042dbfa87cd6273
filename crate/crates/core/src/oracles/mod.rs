//! Set-level queries: supports, membership, containment, scaling, distance.

pub mod contains;
pub mod decode;
pub mod hausdorff;
pub mod membership;
pub mod plot;
pub mod support;
pub mod sweep;
pub mod verify;

use rand::Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{choi_to_json, matrix_to_json};
use crate::kcert::{KWitness, MinDecomposition, NetCover};
use crate::linalg::{c, herm, random_complex, random_hermitian, trace_norm, ChoiMatrix, CMat};
use crate::sets::lift::ConeCert;
use crate::sets::FreeConvexSet;

pub use contains::{contains, inclusion_scale};
pub use hausdorff::{dist_from_scaling, hausdorff, metric_radius, HausdorffBounds};
pub use membership::{gauge, gauge_mode, membership, GaugeResult};
pub use plot::{parse_svg_polygon, plot_level1, svg_polygon};
pub use support::{level1_support, support, SupportValue};
pub use verify::{verify_containment, verify_membership, verify_scale_bounds, verify_scale_witness, Check};

/// A linear functional `X -> Re sum_j tr(H_j X_j)` at level `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunctional {
    pub entries: Vec<CMat>,
}

impl SupportFunctional {
    pub fn new(entries: Vec<CMat>) -> Result<Self> {
        let m = entries
            .first()
            .ok_or_else(|| Error::InvalidArgument("functional needs at least one entry".into()))?
            .nrows();
        if entries.iter().any(|h| h.nrows() != m || h.ncols() != m) {
            return Err(Error::Dimension("functional entries must share one square size".into()));
        }
        Ok(Self { entries })
    }

    pub fn level(&self) -> usize {
        self.entries[0].nrows()
    }

    pub fn d(&self) -> usize {
        self.entries.len()
    }

    /// Dual of the summed operator norm: `max_j |H_j|_tr`.
    pub fn dual_norm(&self) -> f64 {
        self.entries.iter().map(trace_norm).fold(0.0, f64::max)
    }

    pub fn normalized(&self) -> Self {
        let s = self.dual_norm();
        if s == 0.0 {
            return self.clone();
        }
        self.scaled(1.0 / s)
    }

    pub fn scaled(&self, r: f64) -> Self {
        Self {
            entries: self.entries.iter().map(|h| h * c(r, 0.0)).collect(),
        }
    }

    pub fn pair(&self, z: &[CMat]) -> f64 {
        self.entries.iter().zip(z).map(|(h, x)| crate::linalg::re_tr_prod(h, x)).sum()
    }

    /// Level-one functional from real coordinates (`(Re, Im)` pairs for complex sets).
    pub fn from_real(set: &FreeConvexSet, u: &[f64]) -> Self {
        let entries = if set.is_selfadjoint() {
            u.iter().map(|&v| CMat::from_element(1, 1, c(v, 0.0))).collect()
        } else {
            u.chunks(2).map(|p| CMat::from_element(1, 1, c(p[0], -p[1]))).collect()
        };
        Self { entries }
    }

    /// Random functional of dual norm 1; Hermitian entries for selfadjoint sets.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize, selfadjoint: bool) -> Self {
        let entries = (0..d)
            .map(|_| if selfadjoint { random_hermitian(rng, m) } else { random_complex(rng, m, m) })
            .collect();
        Self { entries }.normalized()
    }

    /// Splits along a product's coordinates.
    pub fn split(&self, left: usize) -> (Self, Self) {
        let (a, b) = self.entries.split_at(left);
        (Self { entries: a.to_vec() }, Self { entries: b.to_vec() })
    }

    pub fn hermitian_part(&self) -> Self {
        Self {
            entries: self.entries.iter().map(herm).collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"level": self.level(), "entries": self.entries.iter().map(matrix_to_json).collect::<Vec<_>>()})
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Verdict {
    #[serde(rename = "IN")]
    In,
    #[serde(rename = "OUT")]
    Out,
    #[serde(rename = "UNDECIDED")]
    Undecided,
}

/// `<H, X> >= support_upper + margin` shows that `X` is outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Separator {
    pub functional: SupportFunctional,
    pub point_value: f64,
    pub support_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// IN: a lift certificate at `P = I`.
    Cone(ConeCert),
    /// IN: explicit matrix convex combination of level-k members.
    Decomposition(MinDecomposition),
    /// IN: every level-k functional direction checked on a net.
    NetCover(NetCover),
    /// OUT: a separating functional.
    Separator(Separator),
    /// OUT for free spectrahedra: `v* L(X) v > |v|^2` for the pencil `L`.
    PencilVector { vector: Vec<num_complex::Complex64>, eigenvalue: f64 },
    /// OUT for k-minimal envelopes.
    KWitness(KWitness),
    /// OUT for k-maximal envelopes: a UCP compression whose image leaves the base.
    Compression { choi: ChoiMatrix, image_out: Box<MembershipVerdict> },
    /// Certificate for `X / r` in the unscaled set.
    Scaled(f64, Box<Certificate>),
    /// Certificate for the base of an envelope (level at most `k`, or the
    /// base itself for a maximal envelope).
    Envelope(Box<Certificate>),
    /// IN for a cartesian product.
    Product(Box<Certificate>, Box<Certificate>),
    /// OUT for one factor of a cartesian product.
    Factor { left: bool, inner: Box<Certificate> },
    /// IN for containment: a rule of the set algebra.
    Structural(String),
    /// Containment decided on the polar side by this verdict.
    Polar(Box<MembershipVerdict>),
    /// UNDECIDED: the best evidence on both sides.
    Gap { lower: f64, upper: f64, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
    /// Distance-like slack: for OUT the separation, for IN the gauge excess.
    pub margin: f64,
    pub note: String,
}

impl MembershipVerdict {
    pub fn undecided(lower: f64, upper: f64, detail: impl Into<String>) -> Self {
        let detail = detail.into();
        Self {
            verdict: Verdict::Undecided,
            certificate: Certificate::Gap {
                lower,
                upper,
                detail: detail.clone(),
            },
            margin: 0.0,
            note: detail,
        }
    }

    pub fn is_in(&self) -> bool {
        self.verdict == Verdict::In
    }

    pub fn is_out(&self) -> bool {
        self.verdict == Verdict::Out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "verdict": self.verdict,
            "margin": self.margin,
            "note": self.note,
            "certificate": certificate_json(&self.certificate),
        })
    }
}

pub fn cone_cert_json(c: &ConeCert) -> Value {
    match c {
        ConeCert::Choi(j) => json!({"kind": "choi", "choi": choi_to_json(j)}),
        ConeCert::Pencil => json!({"kind": "pencil"}),
        ConeCert::Contraction => json!({"kind": "contraction"}),
        ConeCert::Scaled(x) => json!({"kind": "scaled", "inner": cone_cert_json(x)}),
        ConeCert::Base(x) => json!({"kind": "base", "inner": cone_cert_json(x)}),
        ConeCert::Relaxed(x) => json!({"kind": "relaxed", "inner": cone_cert_json(x)}),
        ConeCert::Product(a, b) => json!({"kind": "product", "left": cone_cert_json(a), "right": cone_cert_json(b)}),
        ConeCert::Hull { p1, left, right } => json!({"kind": "hull", "p1": matrix_to_json(p1),
            "left": cone_cert_json(left), "right": cone_cert_json(right)}),
    }
}

pub fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::Cone(x) => json!({"kind": "cone", "cone": cone_cert_json(x)}),
        Certificate::Decomposition(d) => json!({"kind": "decomposition", "decomposition": d.to_json()}),
        Certificate::NetCover(n) => json!({"kind": "net_cover", "net": n.to_json()}),
        Certificate::Separator(s) => json!({"kind": "separator", "functional": s.functional.to_json(),
            "point_value": s.point_value, "support_upper": s.support_upper}),
        Certificate::PencilVector { vector, eigenvalue } => json!({"kind": "pencil_vector",
            "vector": vector.iter().map(|z| json!([z.re, z.im])).collect::<Vec<_>>(), "eigenvalue": eigenvalue}),
        Certificate::KWitness(w) => json!({"kind": "k_witness", "witness": w.to_json()}),
        Certificate::Compression { choi, image_out } => json!({"kind": "compression", "choi": choi_to_json(choi),
            "image": image_out.to_json()}),
        Certificate::Scaled(r, x) => json!({"kind": "scaled", "r": r, "inner": certificate_json(x)}),
        Certificate::Envelope(x) => json!({"kind": "envelope", "inner": certificate_json(x)}),
        Certificate::Product(a, b) => json!({"kind": "product", "left": certificate_json(a), "right": certificate_json(b)}),
        Certificate::Factor { left, inner } => json!({"kind": "factor", "left": left, "inner": certificate_json(inner)}),
        Certificate::Structural(r) => json!({"kind": "structural", "reason": r}),
        Certificate::Polar(v) => json!({"kind": "polar", "verdict": v.to_json()}),
        Certificate::Gap { lower, upper, detail } => json!({"kind": "gap", "lower": lower, "upper": upper, "detail": detail}),
    }
}

/// Certified two-sided bounds on a scaling constant.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleBounds {
    pub target: String,
    pub lower: f64,
    pub upper: f64,
    /// How the lower bound was obtained (level and functional when available).
    pub lower_witness: Option<ScaleWitness>,
    pub upper_witness: Option<ScaleWitness>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScaleWitness {
    /// `<G, X> / support_upper(G)` with `X` certified inside the outer set.
    Ratio { functional: SupportFunctional, point: Vec<CMat>, point_value: f64, support_upper: f64 },
    /// An exact SDP (MatrixRange pairs) with its Choi certificate.
    Choi { choi: ChoiMatrix, scale: f64 },
    /// Eigenvalue of a pencil.
    Pencil { eigenvalue: f64 },
    /// A witness tuple `A` with `W(A)` inside the target and a Choi certificate.
    WitnessTuple { tuple: crate::linalg::MatrixTuple, blocks: Vec<usize>, choi: ChoiMatrix, scale: f64 },
    /// Verdict on `T / scale` in the outer set, for `S1 = W(T)`.
    Probe { scale: f64, verdict: Box<MembershipVerdict> },
    /// A structural identity.
    Structural(String),
    /// `alpha_k <= beta_k gamma_k` from separately certified upper bounds.
    Sandwich { beta: f64, gamma: f64 },
    /// A closed-form bound from level-one radii.
    Radii { formula: String, value: f64 },
}

impl ScaleBounds {
    pub fn new(target: impl Into<String>) -> Self {
        Self {
            target: target.into(),
            lower: 1.0,
            upper: f64::INFINITY,
            lower_witness: None,
            upper_witness: None,
            notes: Vec::new(),
        }
    }

    pub fn raise_lower(&mut self, v: f64, w: Option<ScaleWitness>) {
        if v > self.lower {
            self.lower = v;
            self.lower_witness = w;
        }
    }

    pub fn lower_upper(&mut self, v: f64, w: Option<ScaleWitness>) {
        if v < self.upper {
            self.upper = v;
            self.upper_witness = w;
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "target": self.target,
            "lower": self.lower,
            "upper": if self.upper.is_finite() { json!(self.upper) } else { json!("inf") },
            "lower_witness": self.lower_witness.as_ref().map(witness_json),
            "upper_witness": self.upper_witness.as_ref().map(witness_json),
            "notes": self.notes,
        })
    }
}

pub fn witness_json(w: &ScaleWitness) -> Value {
    match w {
        ScaleWitness::Ratio { functional, point, point_value, support_upper } => json!({"kind": "ratio",
            "functional": functional.to_json(), "point": point.iter().map(matrix_to_json).collect::<Vec<_>>(),
            "point_value": point_value, "support_upper": support_upper}),
        ScaleWitness::Choi { choi, scale } => json!({"kind": "choi", "choi": choi_to_json(choi), "scale": scale}),
        ScaleWitness::Pencil { eigenvalue } => json!({"kind": "pencil", "eigenvalue": eigenvalue}),
        ScaleWitness::WitnessTuple { tuple, blocks, choi, scale } => json!({"kind": "witness_tuple",
            "tuple": crate::io::tuple_to_json(tuple), "blocks": blocks, "choi": choi_to_json(choi), "scale": scale}),
        ScaleWitness::Probe { scale, verdict } => json!({"kind": "probe", "scale": scale, "verdict": verdict.to_json()}),
        ScaleWitness::Structural(s) => json!({"kind": "structural", "reason": s}),
        ScaleWitness::Sandwich { beta, gamma } => json!({"kind": "sandwich", "beta_upper": beta, "gamma_upper": gamma}),
        ScaleWitness::Radii { formula, value } => json!({"kind": "radii", "formula": formula, "value": value}),
    }
}
