//! Witness functions `Seq → ℕ`.
//!
//! A witness realizes an existential over a single sequence: a bar witness
//! returns `n` with `α↾n ∈ B`, an escape witness returns `n` with `α↾n ∉ T`.
//! `None` means the witness has no answer for this sequence.

use std::fmt;
use std::sync::Arc;

use crate::sets::DSet;
use crate::words::Seq;

type WitnessFn = Arc<dyn Fn(&Seq) -> Option<usize> + Send + Sync>;

#[derive(Clone)]
pub struct Witness {
    f: WitnessFn,
    name: String,
}

impl fmt::Debug for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Witness({})", self.name)
    }
}

impl Witness {
    pub fn new(name: impl Into<String>, f: impl Fn(&Seq) -> Option<usize> + Send + Sync + 'static) -> Self {
        Witness { f: Arc::new(f), name: name.into() }
    }

    pub fn constant(k: usize) -> Self {
        Witness::new(format!("const({k})"), move |_| Some(k))
    }

    /// One past the first 1 among the first `k` bits, else `k`.
    pub fn first_one_plus(k: usize) -> Self {
        Witness::new(format!("first_one_plus({k})"), move |a| {
            Some((0..k).find(|&i| a.get(i) == 1).map_or(k, |i| i + 1))
        })
    }

    /// Least `n ≤ limit` with `α↾n ∈ set`. This is the minimal bar witness.
    pub fn least_in(set: DSet, limit: usize) -> Self {
        Witness::new(format!("least_in({limit})"), move |a| {
            let mut u = crate::words::Word::empty();
            for n in 0..=limit {
                if set.contains(&u) {
                    return Some(n);
                }
                u = u.child(a.get(n));
            }
            None
        })
    }

    /// Least `n ≤ limit` with `α↾n ∉ set`.
    pub fn least_outside(set: DSet, limit: usize) -> Self {
        let complement = set.complement();
        let mut w = Witness::least_in(complement, limit);
        w.name = format!("least_outside({limit})");
        w
    }

    pub fn apply(&self, alpha: &Seq) -> Option<usize> {
        (self.f)(alpha)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Word;

    #[test]
    fn first_one_plus_caps_at_k() {
        let w = Witness::first_one_plus(3);
        assert_eq!(w.apply(&Seq::zeros()), Some(3));
        assert_eq!(w.apply(&Seq::ones()), Some(1));
        assert_eq!(w.apply(&Seq::single_one(Some(1))), Some(2));
        assert_eq!(w.apply(&Seq::single_one(Some(5))), Some(3));
    }

    #[test]
    fn least_in_is_minimal() {
        let b = DSet::bit(0, 1).union(&DSet::len_ge(3));
        let w = Witness::least_in(b, 8);
        assert_eq!(w.apply(&Seq::ones()), Some(1));
        assert_eq!(w.apply(&Seq::zeros()), Some(3));
        let never = Witness::least_in(DSet::finite([Word::ones(1)]), 5);
        assert_eq!(never.apply(&Seq::zeros()), None);
    }
}
