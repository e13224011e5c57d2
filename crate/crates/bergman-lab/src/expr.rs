//! A small expression language for analytic functions of one complex
//! variable.
//!
//! Expressions are built from the variable `z`, real and imaginary literals
//! (`0.5`, `2i`, so `1+2i` is ordinary addition), unary minus, the binary
//! operators `+ - * / ^`, and the builtins `exp(...)` and the reproducing
//! kernel shorthand `kernel(alpha; a)` (see [`crate::kernels`]).
//!
//! The language has **no** conjugation, modulus, or real/imaginary-part
//! operators: every expressible function is analytic wherever it is defined,
//! which is exactly the class the operator theory in this crate consumes.
//! Non-analytic radial densities use the sibling grammar [`parse_radial`]
//! over the real variable `u = |z|²`, sharing the same parser core.
//!
//! Precedence is `^` over unary minus over `* /` over `+ -`; binaries of
//! equal precedence associate left except `^`, which associates right
//! (`z^2^3 = z^(2^3)`). Parse errors carry byte offsets and the expected
//! token set; evaluation errors (division by zero, principal-branch
//! ambiguity for non-integer powers of nonpositive reals) carry the byte
//! offset of the offending operator.

use num_complex::Complex64;
use thiserror::Error;

/// Errors from parsing or evaluating expressions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: found {found}, expected {expected}")]
    Syntax {
        offset: usize,
        found: String,
        expected: String,
    },
    #[error("unknown identifier `{name}` at byte {offset} (the variable here is `{var}`)")]
    UnknownIdent {
        offset: usize,
        name: String,
        var: &'static str,
    },
    #[error("invalid builtin use at byte {offset}: {msg}")]
    Builtin { offset: usize, msg: String },
    #[error("division by zero at byte {offset}")]
    DivisionByZero { offset: usize },
    #[error(
        "branch ambiguity at byte {offset}: non-integer power of a nonpositive real base"
    )]
    BranchAmbiguity { offset: usize },
}

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Parsed expression tree. Offsets are byte positions in the source used
/// for error reporting; they do not take part in semantic comparisons.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// The free variable (`z`, or `u` in the radial grammar).
    Var { off: usize },
    /// A literal; the parser only produces pure-real or pure-imaginary ones.
    Lit { val: Complex64, off: usize },
    Neg { arg: Box<Expr>, off: usize },
    Bin {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        off: usize,
    },
    Exp { arg: Box<Expr>, off: usize },
    /// `kernel(alpha; a)`: the function `z ↦ (1 - ā z)^{-(α+2)}`.
    Kernel { alpha: f64, a: Complex64, off: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { val: f64, imaginary: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Semi,
    End,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Num { val, imaginary } => {
                write!(f, "number {val}{}", if *imaginary { "i" } else { "" })
            }
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Plus => write!(f, "`+`"),
            Tok::Minus => write!(f, "`-`"),
            Tok::Star => write!(f, "`*`"),
            Tok::Slash => write!(f, "`/`"),
            Tok::Caret => write!(f, "`^`"),
            Tok::LParen => write!(f, "`(`"),
            Tok::RParen => write!(f, "`)`"),
            Tok::Semi => write!(f, "`;`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                toks.push((Tok::Plus, i));
                i += 1;
            }
            '-' => {
                toks.push((Tok::Minus, i));
                i += 1;
            }
            '*' => {
                toks.push((Tok::Star, i));
                i += 1;
            }
            '/' => {
                toks.push((Tok::Slash, i));
                i += 1;
            }
            '^' => {
                toks.push((Tok::Caret, i));
                i += 1;
            }
            '(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            ')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            ';' => {
                toks.push((Tok::Semi, i));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Scientific notation: e/E followed by an optional sign and
                // at least one digit; otherwise the e starts an identifier.
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let val: f64 = text.parse().map_err(|_| ExprError::Syntax {
                    offset: start,
                    found: format!("`{text}`"),
                    expected: "a number".into(),
                })?;
                let imaginary = i < bytes.len() && bytes[i] == b'i' && {
                    // `i` must not continue into an identifier (e.g. `2if`).
                    let next = bytes.get(i + 1);
                    !matches!(next, Some(b) if b.is_ascii_alphanumeric() || *b == b'_')
                };
                if imaginary {
                    i += 1;
                }
                toks.push((Tok::Num { val, imaginary }, start));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((Tok::Ident(src[start..i].to_string()), start));
            }
            _ => {
                return Err(ExprError::Syntax {
                    offset: i,
                    found: format!("`{c}`"),
                    expected: "a number, identifier, operator, or parenthesis".into(),
                })
            }
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    /// Name of the free variable (`"z"` or `"u"`).
    var: &'static str,
    /// Whether imaginary literals and the `kernel` builtin are allowed.
    complex_mode: bool,
}

impl Parser {
    fn peek(&self) -> &(Tok, usize) {
        &self.toks[self.idx]
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, expected: &str) -> Result<usize, ExprError> {
        let (tok, off) = self.bump();
        if tok == want {
            Ok(off)
        } else {
            Err(ExprError::Syntax {
                offset: off,
                found: tok.to_string(),
                expected: expected.into(),
            })
        }
    }

    /// `expr := term (('+' | '-') term)*`
    fn parse_add(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_mul()?;
        loop {
            let (tok, off) = self.peek().clone();
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_mul()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                off,
            };
        }
        Ok(lhs)
    }

    /// `term := unary (('*' | '/') unary)*`
    fn parse_mul(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let (tok, off) = self.peek().clone();
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.parse_unary()?;
            lhs = Expr::Bin {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                off,
            };
        }
        Ok(lhs)
    }

    /// `unary := '-' unary | power`
    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if let (Tok::Minus, off) = self.peek().clone() {
            self.bump();
            let arg = self.parse_unary()?;
            return Ok(Expr::Neg {
                arg: Box::new(arg),
                off,
            });
        }
        self.parse_power()
    }

    /// `power := atom ('^' unary)?` — recursing into `unary` makes `^`
    /// right-associative and admits signed exponents (`z^-2`).
    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_atom()?;
        if let (Tok::Caret, off) = self.peek().clone() {
            self.bump();
            let exp = self.parse_unary()?;
            return Ok(Expr::Bin {
                op: BinOp::Pow,
                lhs: Box::new(base),
                rhs: Box::new(exp),
                off,
            });
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ExprError> {
        let (tok, off) = self.bump();
        match tok {
            Tok::Num { val, imaginary } => {
                if imaginary && !self.complex_mode {
                    return Err(ExprError::Syntax {
                        offset: off,
                        found: "an imaginary literal".into(),
                        expected: "a real number (radial densities are real-valued)".into(),
                    });
                }
                let val = if imaginary {
                    Complex64::new(0.0, val)
                } else {
                    Complex64::new(val, 0.0)
                };
                Ok(Expr::Lit { val, off })
            }
            Tok::LParen => {
                let inner = self.parse_add()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) if name == self.var => Ok(Expr::Var { off }),
            Tok::Ident(name) if name == "exp" => {
                self.expect(Tok::LParen, "`(` after `exp`")?;
                let arg = self.parse_add()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Exp {
                    arg: Box::new(arg),
                    off,
                })
            }
            Tok::Ident(name) if name == "kernel" && self.complex_mode => {
                self.expect(Tok::LParen, "`(` after `kernel`")?;
                let alpha_expr = self.parse_add()?;
                self.expect(Tok::Semi, "`;` between kernel parameters")?;
                let a_expr = self.parse_add()?;
                self.expect(Tok::RParen, "`)`")?;
                let alpha = const_value(&alpha_expr, off)?;
                let a = const_value(&a_expr, off)?;
                if alpha.im != 0.0 || !alpha.re.is_finite() || alpha.re < 0.0 {
                    return Err(ExprError::Builtin {
                        offset: off,
                        msg: format!("kernel order must be a real number >= 0, got {alpha}"),
                    });
                }
                if !(a.norm() < 1.0) {
                    return Err(ExprError::Builtin {
                        offset: off,
                        msg: format!("kernel base point must lie in the open disk, got {a}"),
                    });
                }
                Ok(Expr::Kernel {
                    alpha: alpha.re,
                    a,
                    off,
                })
            }
            Tok::Ident(name) => Err(ExprError::UnknownIdent {
                offset: off,
                name,
                var: self.var,
            }),
            other => Err(ExprError::Syntax {
                offset: off,
                found: other.to_string(),
                expected: "a number, the variable, `exp`, `kernel`, `-`, or `(`".into(),
            }),
        }
    }
}

/// Evaluate a constant (variable-free) sub-expression, for builtin
/// parameters.
fn const_value(e: &Expr, builtin_off: usize) -> Result<Complex64, ExprError> {
    if contains_var(e) {
        return Err(ExprError::Builtin {
            offset: builtin_off,
            msg: "kernel parameters must be constant expressions".into(),
        });
    }
    eval(e, Complex64::new(0.0, 0.0))
}

fn contains_var(e: &Expr) -> bool {
    match e {
        Expr::Var { .. } => true,
        Expr::Lit { .. } | Expr::Kernel { .. } => false,
        Expr::Neg { arg, .. } | Expr::Exp { arg, .. } => contains_var(arg),
        Expr::Bin { lhs, rhs, .. } => contains_var(lhs) || contains_var(rhs),
    }
}

/// Parse an analytic expression in the complex variable `z`.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        idx: 0,
        var: "z",
        complex_mode: true,
    };
    let e = p.parse_add()?;
    let (tok, off) = p.peek().clone();
    if tok != Tok::End {
        return Err(ExprError::Syntax {
            offset: off,
            found: tok.to_string(),
            expected: "end of input or a binary operator".into(),
        });
    }
    Ok(e)
}

/// Parse a radial-density expression in the real variable `u = |z|²`.
///
/// Same grammar, restricted to real values: imaginary literals and the
/// `kernel` builtin are rejected.
pub fn parse_radial(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        idx: 0,
        var: "u",
        complex_mode: false,
    };
    let e = p.parse_add()?;
    let (tok, off) = p.peek().clone();
    if tok != Tok::End {
        return Err(ExprError::Syntax {
            offset: off,
            found: tok.to_string(),
            expected: "end of input or a binary operator".into(),
        });
    }
    Ok(e)
}

/// Evaluate an expression at `z`. Non-integer powers use the principal
/// branch and fail with [`ExprError::BranchAmbiguity`] when the base is a
/// nonpositive real (where the principal branch is discontinuous).
pub fn eval(e: &Expr, z: Complex64) -> Result<Complex64, ExprError> {
    match e {
        Expr::Var { .. } => Ok(z),
        Expr::Lit { val, .. } => Ok(*val),
        Expr::Neg { arg, .. } => Ok(-eval(arg, z)?),
        Expr::Exp { arg, .. } => Ok(eval(arg, z)?.exp()),
        Expr::Kernel { alpha, a, .. } => {
            let base = Complex64::new(1.0, 0.0) - a.conj() * z;
            Ok(base.powf(-(alpha + 2.0)))
        }
        Expr::Bin { op, lhs, rhs, off } => {
            let l = eval(lhs, z)?;
            let r = eval(rhs, z)?;
            match op {
                BinOp::Add => Ok(l + r),
                BinOp::Sub => Ok(l - r),
                BinOp::Mul => Ok(l * r),
                BinOp::Div => {
                    if r == Complex64::new(0.0, 0.0) {
                        Err(ExprError::DivisionByZero { offset: *off })
                    } else {
                        Ok(l / r)
                    }
                }
                BinOp::Pow => pow_principal(l, r, *off),
            }
        }
    }
}

/// `base^exp`: exact integer powers when the exponent is an integer-valued
/// real, otherwise the principal branch (guarded on nonpositive-real bases).
fn pow_principal(base: Complex64, exp: Complex64, off: usize) -> Result<Complex64, ExprError> {
    let is_int = exp.im == 0.0 && exp.re.fract() == 0.0 && exp.re.abs() <= i32::MAX as f64;
    if is_int {
        let n = exp.re as i32;
        if n < 0 && base == Complex64::new(0.0, 0.0) {
            return Err(ExprError::DivisionByZero { offset: off });
        }
        return Ok(base.powi(n));
    }
    if base.im == 0.0 && base.re <= 0.0 {
        return Err(ExprError::BranchAmbiguity { offset: off });
    }
    if exp.im == 0.0 {
        Ok(base.powf(exp.re))
    } else {
        Ok(base.powc(exp))
    }
}

/// Evaluate a radial-density expression at `u ∈ [0, 1)`.
pub fn eval_radial(e: &Expr, u: f64) -> Result<f64, ExprError> {
    let w = eval(e, Complex64::new(u, 0.0))?;
    debug_assert_eq!(w.im, 0.0, "radial grammar produced a complex value");
    Ok(w.re)
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Bin { op: BinOp::Add, .. } | Expr::Bin { op: BinOp::Sub, .. } => 1,
        Expr::Bin { op: BinOp::Mul, .. } | Expr::Bin { op: BinOp::Div, .. } => 2,
        Expr::Neg { .. } => 3,
        Expr::Bin { op: BinOp::Pow, .. } => 4,
        _ => 5,
    }
}

fn fmt_expr(e: &Expr, out: &mut String, min_prec: u8) {
    let prec = precedence(e);
    let need_parens = prec < min_prec;
    if need_parens {
        out.push('(');
    }
    match e {
        Expr::Var { .. } => out.push('z'),
        Expr::Lit { val, .. } => {
            if val.im == 0.0 {
                out.push_str(&format!("{}", val.re));
            } else if val.re == 0.0 {
                out.push_str(&format!("{}i", val.im));
            } else {
                // Not produced by the parser; printed re-parseably anyway.
                out.push_str(&format!("({}+{}i)", val.re, val.im));
            }
        }
        Expr::Neg { arg, .. } => {
            out.push('-');
            fmt_expr(arg, out, 3);
        }
        Expr::Exp { arg, .. } => {
            out.push_str("exp(");
            fmt_expr(arg, out, 0);
            out.push(')');
        }
        Expr::Kernel { alpha, a, .. } => {
            out.push_str(&format!("kernel({}; ", alpha));
            if a.im == 0.0 {
                out.push_str(&format!("{}", a.re));
            } else if a.re == 0.0 {
                out.push_str(&format!("{}i", a.im));
            } else if a.im > 0.0 {
                out.push_str(&format!("{}+{}i", a.re, a.im));
            } else {
                out.push_str(&format!("{}-{}i", a.re, -a.im));
            }
            out.push(')');
        }
        Expr::Bin { op, lhs, rhs, .. } => {
            let (sym, l_min, r_min) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
                // Left operand of `^` must be an atom; right operand may be
                // another power or a signed exponent (right associativity).
                BinOp::Pow => ("^", 5, 3),
            };
            fmt_expr(lhs, out, l_min);
            out.push_str(sym);
            fmt_expr(rhs, out, r_min);
        }
    }
    if need_parens {
        out.push(')');
    }
}

/// Canonical text form; `pretty ∘ parse` is idempotent on its own output.
///
/// Radial expressions print with `z` replaced by `u`.
pub fn pretty(e: &Expr) -> String {
    let mut out = String::new();
    fmt_expr(e, &mut out, 0);
    out
}

/// Canonical text form for radial-density expressions.
pub fn pretty_radial(e: &Expr) -> String {
    pretty(e).replace('z', "u")
}
