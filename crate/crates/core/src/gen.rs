//! Seeded, type-directed generation of well-typed simplicit terms.
//!
//! A case is an open term together with its typing context and type. The
//! generator works top-down from a target type and only ever builds terms
//! that type-check, so no rejection sampling is needed apart from the
//! final size check.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Bit, Term, Ty};
use crate::syntax::term::{self, Name};
use crate::typing::TyCtx;

#[derive(Clone, Copy, Debug)]
pub struct GenConfig {
    pub max_size: usize,
    /// Bound on every depth superscript and on the number of `D` in types.
    pub max_depth: usize,
    /// Number of free variables in the generated context.
    pub free_vars: usize,
    /// Whether `fix` may appear.
    pub allow_fix: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_size: 25,
            max_depth: 2,
            free_vars: 3,
            allow_fix: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Generated {
    pub ctx: TyCtx,
    pub term: Term,
    pub ty: Ty,
}

const FREE_NAMES: [&str; 4] = ["x", "y", "z", "w"];

struct Gen<'r> {
    rng: &'r mut ChaCha8Rng,
    cfg: GenConfig,
    ctx: Vec<(Name, Ty)>,
    fresh: usize,
}

impl Gen<'_> {
    fn bit(&mut self) -> Bit {
        if self.rng.gen_bool(0.5) {
            Bit::One
        } else {
            Bit::Zero
        }
    }

    fn ground(&mut self) -> Ty {
        Ty::Ground(self.rng.gen_range(0..=self.cfg.max_depth))
    }

    fn ty(&mut self, arrows: usize) -> Ty {
        if arrows > 0 && self.rng.gen_bool(0.35) {
            let a = self.ty(arrows - 1);
            let b = self.ty(arrows - 1);
            Ty::arrow(a, b)
        } else if self.rng.gen_bool(0.5) {
            Ty::nat()
        } else {
            self.ground()
        }
    }

    fn fresh(&mut self) -> Name {
        self.fresh += 1;
        format!("v{}", self.fresh)
    }

    fn vars_of(&self, a: &Ty) -> Vec<Name> {
        self.ctx
            .iter()
            .filter(|(_, b)| b == a)
            .map(|(x, _)| x.clone())
            .collect()
    }

    fn bind<T>(&mut self, x: &str, a: Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.ctx.push((x.to_string(), a));
        let r = f(self);
        self.ctx.pop();
        r
    }

    /// The smallest term of type `a` in the current context.
    fn minimal(&mut self, a: &Ty) -> Term {
        if let Some(x) = self.vars_of(a).first() {
            return term::var(x);
        }
        match a {
            Ty::Ground(0) => Term::Num(self.rng.gen_range(0..4)),
            Ty::Ground(k) => {
                let i = self.bit();
                term::inj(i, 0, self.minimal(&Ty::Ground(k - 1)))
            }
            Ty::Arrow(dom, cod) => {
                let x = self.fresh();
                let body = self.bind(&x, (**dom).clone(), |g| g.minimal(cod));
                term::abs(&x, (**dom).clone(), body)
            }
        }
    }

    fn term(&mut self, a: &Ty, size: usize) -> Term {
        if size <= 1 {
            return self.leaf(a);
        }
        let depth = a.depth();
        let max_d = self.cfg.max_depth;
        let mut options: Vec<u8> = vec![0, 1, 2];
        if matches!(a, Ty::Ground(_)) {
            options.extend([3, 3]);
        }
        options.push(4);
        options.push(5);
        if depth < max_d {
            options.push(6);
        }
        if depth >= 1 {
            options.extend([7, 8]);
        }
        if depth < max_d && depth >= 1 {
            options.push(9);
        }
        if depth >= 2 {
            options.push(10);
        }
        if let Ty::Arrow(dom, cod) = a {
            options.extend([11, 11]);
            if dom.depth() >= 1 && cod.depth() >= 1 {
                options.push(12);
            }
        }
        if self.cfg.allow_fix && size >= 4 {
            options.push(13);
        }
        let rest = size - 1;
        match *options.choose(self.rng).expect("options are never empty") {
            0 => self.leaf(a),
            1 | 2 => {
                let b = self.ty(1);
                let (l, r) = self.split(rest);
                let f = self.term(&Ty::arrow(b.clone(), a.clone()), l);
                let n = self.term(&b, r);
                term::app(f, n)
            }
            3 => {
                let Ty::Ground(d) = a else { unreachable!() };
                let n = self.term(a, rest);
                if self.rng.gen_bool(0.5) {
                    term::succ(*d, n)
                } else {
                    term::pred(*d, n)
                }
            }
            4 => {
                let d = self.rng.gen_range(0..=depth);
                let inner = (0..d).fold(a.clone(), |t, _| t.undo_d().expect("depth checked"));
                let (c, r) = self.split(rest);
                let (p, q) = self.split(r);
                let cond = self.term(&Ty::Ground(d), c);
                let then = self.term(&inner, p);
                let els = self.term(&inner, q);
                term::ifz(Some(inner), d, cond, then, els)
            }
            5 => {
                let d = self.rng.gen_range(0..=depth);
                let inner = (0..d).fold(a.clone(), |t, _| t.undo_d().expect("depth checked"));
                let (n, b) = self.split(rest);
                let bound = self.term(&Ty::Ground(d), n);
                let x = self.fresh();
                let body = self.bind(&x, Ty::nat(), |g| g.term(&inner, b));
                term::let_in(Some(inner), d, &x, bound, body)
            }
            6 => {
                let d = self.rng.gen_range(0..=depth);
                let i = self.bit();
                let n = self.term(&a.d(), rest);
                term::proj(i, d, n)
            }
            7 => {
                let inner = a.undo_d().expect("depth checked");
                let d = self.rng.gen_range(0..=inner.depth());
                let i = self.bit();
                let n = self.term(&inner, rest);
                term::inj(i, d, n)
            }
            8 | 9 => {
                if depth < max_d {
                    let d = self.rng.gen_range(0..depth);
                    let n = self.term(&a.d(), rest);
                    term::sum(d, n)
                } else {
                    let inner = a.undo_d().expect("depth checked");
                    let n = self.term(&inner, rest);
                    term::inj(self.bit(), 0, n)
                }
            }
            10 => {
                let d = self.rng.gen_range(0..=depth - 2);
                let l = self.rng.gen_range(0..=depth - 2 - d);
                let n = self.term(a, rest);
                term::flip(d, l, n)
            }
            11 => {
                let Ty::Arrow(dom, cod) = a else { unreachable!() };
                let x = self.fresh();
                let body = self.bind(&x, (**dom).clone(), |g| g.term(cod, rest));
                term::abs(&x, (**dom).clone(), body)
            }
            12 => {
                let Ty::Arrow(dom, cod) = a else { unreachable!() };
                let f = Ty::arrow(dom.undo_d().expect("checked"), cod.undo_d().expect("checked"));
                let n = self.term(&f, rest);
                term::diff(n)
            }
            13 => {
                let x = self.fresh();
                let body = self.bind(&x, a.clone(), |g| g.term(a, rest - 1));
                term::fix(term::abs(&x, a.clone(), body))
            }
            _ => unreachable!(),
        }
    }

    fn leaf(&mut self, a: &Ty) -> Term {
        let vars = self.vars_of(a);
        if !vars.is_empty() && (self.rng.gen_bool(0.8) || *a != Ty::nat()) {
            return term::var(vars.choose(self.rng).expect("non-empty"));
        }
        self.minimal(a)
    }

    fn split(&mut self, n: usize) -> (usize, usize) {
        if n < 2 {
            return (1, 1);
        }
        let l = self.rng.gen_range(1..n);
        (l, n - l)
    }
}

/// One case drawn from `rng`. The term has size at most `cfg.max_size`.
pub fn gen_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Generated {
    loop {
        let mut g = Gen {
            rng: &mut *rng,
            cfg: *cfg,
            ctx: Vec::new(),
            fresh: 0,
        };
        for x in FREE_NAMES.iter().take(cfg.free_vars) {
            let a = g.ty(1);
            g.ctx.push((x.to_string(), a));
        }
        let ty = g.ty(1);
        let budget = g.rng.gen_range(1..=cfg.max_size);
        let term = g.term(&ty, budget);
        if term.size() <= cfg.max_size {
            let ctx = g.ctx.iter().fold(TyCtx::new(), |c, (x, a)| c.with(x, a.clone()));
            return Generated { ctx, term, ty };
        }
    }
}

/// `n` cases from a fixed seed.
pub fn gen_corpus(seed: u64, n: usize, cfg: &GenConfig) -> Vec<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gen_case(&mut rng, cfg)).collect()
}

/// A single case from a seed, for use as a property-test input.
pub fn gen_from_seed(seed: u64, cfg: &GenConfig) -> Generated {
    gen_case(&mut ChaCha8Rng::seed_from_u64(seed), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::infer;

    #[test]
    fn generated_terms_have_their_type() {
        let cfg = GenConfig::default();
        for g in gen_corpus(7, 500, &cfg) {
            assert!(g.term.size() <= cfg.max_size);
            assert!(g.term.is_simplicit());
            assert_eq!(infer(&g.ctx, &g.term), Ok(g.ty.clone()), "{}", g.term);
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let cfg = GenConfig::default();
        let a = gen_corpus(3, 20, &cfg);
        let b = gen_corpus(3, 20, &cfg);
        assert!(a.iter().zip(&b).all(|(x, y)| x.term == y.term));
    }
}
