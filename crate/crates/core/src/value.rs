//! Typed views over shared bytes and the concrete values they produce.
//!
//! All multi-byte views are little-endian. Integer payloads wrap modulo
//! `2^width` the way typed-array stores do; float payloads are IEEE-754.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signedness {
    Signed,
    Unsigned,
    Float,
}

/// How the bytes of an access are interpreted, e.g. `I16` or `F64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ViewKind {
    pub signedness: Signedness,
    pub width_bits: u32,
}

impl ViewKind {
    pub const I8: ViewKind = ViewKind::new(Signedness::Signed, 8);
    pub const I16: ViewKind = ViewKind::new(Signedness::Signed, 16);
    pub const I32: ViewKind = ViewKind::new(Signedness::Signed, 32);
    pub const I64: ViewKind = ViewKind::new(Signedness::Signed, 64);
    pub const U8: ViewKind = ViewKind::new(Signedness::Unsigned, 8);
    pub const U16: ViewKind = ViewKind::new(Signedness::Unsigned, 16);
    pub const U32: ViewKind = ViewKind::new(Signedness::Unsigned, 32);
    pub const U64: ViewKind = ViewKind::new(Signedness::Unsigned, 64);
    pub const F32: ViewKind = ViewKind::new(Signedness::Float, 32);
    pub const F64: ViewKind = ViewKind::new(Signedness::Float, 64);

    pub const ALL: [ViewKind; 10] = [
        Self::I8,
        Self::I16,
        Self::I32,
        Self::I64,
        Self::U8,
        Self::U16,
        Self::U32,
        Self::U64,
        Self::F32,
        Self::F64,
    ];

    pub const fn new(signedness: Signedness, width_bits: u32) -> Self {
        ViewKind {
            signedness,
            width_bits,
        }
    }

    /// Whether this combination exists as a typed-array view.
    pub fn is_supported(&self) -> bool {
        match self.signedness {
            Signedness::Float => matches!(self.width_bits, 32 | 64),
            _ => matches!(self.width_bits, 8 | 16 | 32 | 64),
        }
    }

    pub fn element_size(&self) -> u32 {
        self.width_bits / 8
    }

    pub fn is_float(&self) -> bool {
        self.signedness == Signedness::Float
    }

    /// 64-bit integer views are backed by BigInt arrays in JavaScript.
    pub fn is_bigint(&self) -> bool {
        !self.is_float() && self.width_bits == 64
    }

    pub fn name(&self) -> &'static str {
        match (self.signedness, self.width_bits) {
            (Signedness::Signed, 8) => "I8",
            (Signedness::Signed, 16) => "I16",
            (Signedness::Signed, 32) => "I32",
            (Signedness::Signed, 64) => "I64",
            (Signedness::Unsigned, 8) => "U8",
            (Signedness::Unsigned, 16) => "U16",
            (Signedness::Unsigned, 32) => "U32",
            (Signedness::Unsigned, 64) => "U64",
            (Signedness::Float, 32) => "F32",
            (Signedness::Float, 64) => "F64",
            _ => "?",
        }
    }

    /// The JavaScript typed-array constructor for this view.
    pub fn js_array(&self) -> &'static str {
        match (self.signedness, self.width_bits) {
            (Signedness::Signed, 8) => "Int8Array",
            (Signedness::Signed, 16) => "Int16Array",
            (Signedness::Signed, 32) => "Int32Array",
            (Signedness::Signed, 64) => "BigInt64Array",
            (Signedness::Unsigned, 8) => "Uint8Array",
            (Signedness::Unsigned, 16) => "Uint16Array",
            (Signedness::Unsigned, 32) => "Uint32Array",
            (Signedness::Unsigned, 64) => "BigUint64Array",
            (Signedness::Float, 32) => "Float32Array",
            (Signedness::Float, 64) => "Float64Array",
            _ => "?",
        }
    }

    /// Little-endian encoding of a literal as this view would store it.
    pub fn encode(&self, literal: Literal) -> Vec<u8> {
        let n = self.element_size() as usize;
        match self.signedness {
            Signedness::Float if self.width_bits == 32 => {
                (literal.as_f64() as f32).to_le_bytes().to_vec()
            }
            Signedness::Float => literal.as_f64().to_le_bytes().to_vec(),
            _ => {
                let bits = wrap_to_width(literal, self.width_bits);
                bits.to_le_bytes()[..n].to_vec()
            }
        }
    }

    /// Little-endian interpretation of `bytes`; `bytes.len()` must equal the element size.
    pub fn decode(&self, bytes: &[u8]) -> Value {
        assert_eq!(
            bytes.len(),
            self.element_size() as usize,
            "byte count does not match view {}",
            self.name()
        );
        let mut raw = [0u8; 16];
        raw[..bytes.len()].copy_from_slice(bytes);
        let unsigned = u128::from_le_bytes(raw);
        match self.signedness {
            Signedness::Unsigned => Value::Int(unsigned as i128),
            Signedness::Signed => {
                let shift = 128 - self.width_bits;
                Value::Int(((unsigned << shift) as i128) >> shift)
            }
            Signedness::Float if self.width_bits == 32 => {
                Value::Float(f32::from_bits(unsigned as u32) as f64)
            }
            Signedness::Float => Value::Float(f64::from_bits(unsigned as u64)),
        }
    }

    /// Applies the typed-array store conversion to a value read back through this view.
    pub fn normalize(&self, literal: Literal) -> Value {
        self.decode(&self.encode(literal))
    }
}

impl fmt::Display for ViewKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ViewKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ViewKind::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown view `{s}`"))
    }
}

impl Serialize for ViewKind {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ViewKind {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn wrap_to_width(literal: Literal, width_bits: u32) -> u128 {
    let modulus = 1u128 << width_bits;
    match literal {
        Literal::Int(v) => (v as u128) & (modulus - 1),
        Literal::Float(x) => {
            if !x.is_finite() {
                return 0;
            }
            let m = (width_bits as f64).exp2();
            (x.trunc().rem_euclid(m) as u128) & (modulus - 1)
        }
    }
}

/// A numeric constant appearing in program source.
///
/// In JSON, integers and finite floats are plain numbers; integers beyond
/// 64 bits and non-finite floats are strings.
#[derive(Debug, Clone, Copy)]
pub enum Literal {
    Int(i128),
    Float(f64),
}

impl Serialize for Literal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Literal::Int(v) => match (i64::try_from(v), u64::try_from(v)) {
                (Ok(v), _) => s.serialize_i64(v),
                (_, Ok(v)) => s.serialize_u64(v),
                _ => s.serialize_str(&v.to_string()),
            },
            Literal::Float(x) if x.is_finite() => s.serialize_f64(x),
            Literal::Float(_) => s.collect_str(self),
        }
    }
}

impl<'de> Deserialize<'de> for Literal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = Literal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or numeric string")
            }
            fn visit_i64<E>(self, v: i64) -> Result<Literal, E> {
                Ok(Literal::Int(v.into()))
            }
            fn visit_u64<E>(self, v: u64) -> Result<Literal, E> {
                Ok(Literal::Int(v.into()))
            }
            fn visit_i128<E>(self, v: i128) -> Result<Literal, E> {
                Ok(Literal::Int(v))
            }
            fn visit_f64<E>(self, v: f64) -> Result<Literal, E> {
                Ok(Literal::Float(v))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<Literal, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl Literal {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Literal::Int(v) => v as f64,
            Literal::Float(x) => x,
        }
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Int(a), Literal::Int(b)) => a == b,
            (Literal::Float(a), Literal::Float(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Literal::Int(v) => (0u8, *v).hash(state),
            Literal::Float(x) => (1u8, x.to_bits()).hash(state),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(v) => write!(f, "{v}"),
            Literal::Float(x) if x.is_finite() && x.fract() == 0.0 => write!(f, "{x:.1}"),
            Literal::Float(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Literal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<i128>() {
            return Ok(Literal::Int(v));
        }
        if let Some(hex) = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            return i128::from_str_radix(hex, 16)
                .map(Literal::Int)
                .map_err(|e| format!("bad literal `{s}`: {e}"));
        }
        match s {
            "NaN" => return Ok(Literal::Float(f64::NAN)),
            "Infinity" => return Ok(Literal::Float(f64::INFINITY)),
            "-Infinity" => return Ok(Literal::Float(f64::NEG_INFINITY)),
            _ => {}
        }
        if s.chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'))
        {
            if let Ok(x) = s.parse::<f64>() {
                return Ok(Literal::Float(x));
            }
        }
        Err(format!("bad literal `{s}`"))
    }
}

/// A concrete value observed by a read.
///
/// Equality, hashing and ordering of floats go through the IEEE-754 bit
/// pattern so that values can key sets and maps.
#[derive(Debug, Clone, Copy)]
pub enum Value {
    Int(i128),
    Float(f64),
}

impl Value {
    fn key(&self) -> (u8, i128) {
        match *self {
            Value::Int(v) => (0, v),
            Value::Float(x) => (1, x.to_bits() as i128),
        }
    }

    /// Numeric comparison against a source constant, as a condition `==` would.
    pub fn loosely_equals(&self, literal: Literal) -> bool {
        match (*self, literal) {
            (Value::Int(a), Literal::Int(b)) => a == b,
            (Value::Int(a), Literal::Float(b)) => (a as f64) == b,
            (Value::Float(a), lit) => a == lit.as_f64(),
        }
    }

    pub fn as_literal(&self) -> Literal {
        match *self {
            Value::Int(v) => Literal::Int(v),
            Value::Float(x) => Literal::Float(x),
        }
    }

    /// Parses a value printed by [`Value`]'s `Display` under a given view.
    pub fn parse_for_view(s: &str, view: ViewKind) -> Option<Value> {
        if view.is_float() {
            let x = match s {
                "NaN" => f64::NAN,
                "Infinity" => f64::INFINITY,
                "-Infinity" => f64::NEG_INFINITY,
                _ => s.parse().ok()?,
            };
            Some(Value::Float(x))
        } else {
            s.parse().ok().map(Value::Int)
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Value {}

impl Hash for Value {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Formats the value the way JavaScript's `String(v)` would.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(x) => f.write_str(&js_number_to_string(x)),
        }
    }
}

/// `Number.prototype.toString()` for radix 10.
pub fn js_number_to_string(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x == 0.0 {
        return "0".into();
    }
    if x.is_infinite() {
        return if x > 0.0 {
            "Infinity".into()
        } else {
            "-Infinity".into()
        };
    }
    let sign = if x < 0.0 { "-" } else { "" };
    // `{:e}` yields the shortest round-tripping digits as d.ddde<exp>.
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let k = digits.len() as i32;
    let n = exp.parse::<i32>().expect("exponent") + 1;
    let body = if k <= n && n <= 21 {
        format!("{digits}{}", "0".repeat((n - k) as usize))
    } else if 0 < n && n <= 21 {
        format!("{}.{}", &digits[..n as usize], &digits[n as usize..])
    } else if -6 < n && n <= 0 {
        format!("0.{}{digits}", "0".repeat((-n) as usize))
    } else {
        let e = n - 1;
        let esign = if e >= 0 { "+" } else { "-" };
        if k == 1 {
            format!("{digits}e{esign}{}", e.abs())
        } else {
            format!("{}.{}e{esign}{}", &digits[..1], &digits[1..], e.abs())
        }
    };
    format!("{sign}{body}")
}

impl Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
