use std::fmt;

/// A type in canonical form. `Ground(d)` is `D^d ι`; the operator `D` is
/// not a constructor but the function [`Ty::d`], which distributes over
/// arrow codomains.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ty {
    Ground(usize),
    Arrow(Box<Ty>, Box<Ty>),
}

impl Ty {
    pub fn nat() -> Ty {
        Ty::Ground(0)
    }

    pub fn arrow(a: Ty, b: Ty) -> Ty {
        Ty::Arrow(Box::new(a), Box::new(b))
    }

    /// `D(D^d ι) = D^{d+1} ι` and `D(A → B) = A → DB`.
    pub fn d(&self) -> Ty {
        match self {
            Ty::Ground(d) => Ty::Ground(d + 1),
            Ty::Arrow(a, b) => Ty::Arrow(a.clone(), Box::new(b.d())),
        }
    }

    pub fn d_n(&self, n: usize) -> Ty {
        (0..n).fold(self.clone(), |t, _| t.d())
    }

    /// Splits the type as `D^d F` with `F` sharp.
    pub fn decompose(&self) -> (usize, Ty) {
        match self {
            Ty::Ground(d) => (*d, Ty::Ground(0)),
            Ty::Arrow(a, b) => {
                let (d, f) = b.decompose();
                (d, Ty::Arrow(a.clone(), Box::new(f)))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ty::Ground(d) => *d,
            Ty::Arrow(_, b) => b.depth(),
        }
    }

    /// Inverse of [`Ty::d`]; `None` when the type has depth zero.
    pub fn undo_d(&self) -> Option<Ty> {
        match self {
            Ty::Ground(0) => None,
            Ty::Ground(d) => Some(Ty::Ground(d - 1)),
            Ty::Arrow(a, b) => Some(Ty::Arrow(a.clone(), Box::new(b.undo_d()?))),
        }
    }

    pub fn is_sharp(&self) -> bool {
        self.depth() == 0
    }

    pub fn as_arrow(&self) -> Option<(&Ty, &Ty)> {
        match self {
            Ty::Arrow(a, b) => Some((a, b)),
            Ty::Ground(_) => None,
        }
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Ground(d) => {
                for _ in 0..*d {
                    write!(f, "D ")?;
                }
                write!(f, "Nat")
            }
            Ty::Arrow(a, b) => {
                if matches!(**a, Ty::Arrow(..)) {
                    write!(f, "({a}) -> {b}")
                } else {
                    write!(f, "{a} -> {b}")
                }
            }
        }
    }
}
