use std::fmt;

/// Which coordinate block a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Block {
    X,
    Y,
}

impl Block {
    fn name(self) -> &'static str {
        match self {
            Block::X => "x",
            Block::Y => "y",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Parsed scalar expression in the variables `x1..xn, y1..yn`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Zero-based coordinate index within its block.
    Var(Block, usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Power with a constant exponent.
    Pow(Box<Expr>, f64),
    /// `dot(a, b) = Σ aᵢ bᵢ` over whole coordinate blocks.
    Dot(Block, Block),
    /// `norm2(a) = Σ aᵢ²`.
    Norm2(Block),
}

impl Expr {
    /// Largest one-based variable index used, per block.
    pub fn max_index(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Dot(..) | Expr::Norm2(_) => 0,
            Expr::Var(_, i) => i + 1,
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => e.max_index(),
            Expr::Binary(_, a, b) => a.max_index().max(b.max_index()),
        }
    }

    /// True if the expression never refers to a fiber coordinate.
    pub fn is_base_only(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(b, _) | Expr::Norm2(b) => *b == Block::X,
            Expr::Dot(a, b) => *a == Block::X && *b == Block::X,
            Expr::Neg(e) | Expr::Call(_, e) | Expr::Pow(e, _) => e.is_base_only(),
            Expr::Binary(_, a, b) => a.is_base_only() && b.is_base_only(),
        }
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that round-trips.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_number(f, *v),
            Expr::Var(b, i) => write!(f, "{}{}", b.name(), i + 1),
            Expr::Neg(e) => write!(f, "-({e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Pow(e, k) => {
                write!(f, "({e})^")?;
                write_number(f, *k)
            }
            Expr::Dot(a, b) => write!(f, "dot({}, {})", a.name(), b.name()),
            Expr::Norm2(b) => write!(f, "norm2({})", b.name()),
        }
    }
}
