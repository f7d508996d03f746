mod common;

use common::*;
use fankit::words::{Concat, Level};
use fankit::{Seq, Word};
use proptest::prelude::*;

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..=1, 0..=max).prop_map(|b| Word::from_bits(&b).unwrap())
}

proptest! {
    #[test]
    fn concat_is_associative(a in word(6), b in word(6), c in word(6)) {
        prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
    }

    #[test]
    fn restrict_of_concat(u in word(6), p in word(4), tail in 0u8..=1, k in 0usize..10) {
        let alpha = Seq::eventually(p.clone(), tail);
        let joined = u.concat(&alpha);
        prop_assert_eq!(joined.restrict(u.len() + k), u.concat(&alpha.restrict(k)));
        prop_assert_eq!(joined.restrict(u.len().min(k)), u.prefix(k));
    }

    #[test]
    fn lex_is_a_total_order(n in 0usize..7, i in 0u64..128, j in 0u64..128) {
        let (i, j) = (i % (1 << n), j % (1 << n));
        let (u, v) = (Word::from_index(n, i), Word::from_index(n, j));
        let count = [u.lex_less(&v), v.lex_less(&u), u == v].iter().filter(|&&x| x).count();
        prop_assert_eq!(count, 1);
        prop_assert_eq!(u.lex_less(&v), i < j);
    }

    #[test]
    fn interior_is_idempotent(seed in any::<u64>()) {
        let a = random_set(&mut rng(seed), 5);
        let i1 = a.interior().unwrap();
        let i2 = i1.interior().unwrap();
        for u in words_to(7) {
            prop_assert_eq!(i1.contains(&u), i2.contains(&u));
            if i1.contains(&u) {
                prop_assert!(a.contains(&u));
            }
        }
    }

    #[test]
    fn closure_laws(seed in any::<u64>()) {
        let a = random_set(&mut rng(seed), 5);
        let c = a.closure();
        let cc = c.closure();
        for u in words_to(7) {
            prop_assert_eq!(c.contains(&u), cc.contains(&u));
            prop_assert_eq!(c.contains(&u), u.prefixes().any(|p| a.contains(&p)));
        }
        prop_assert_eq!(c.stab(), a.stab());
    }

    #[test]
    fn restricted_set_is_a_shift(seed in any::<u64>(), u in word(4)) {
        let a = random_set(&mut rng(seed), 5);
        let r = a.restricted(&u);
        for w in words_to(5) {
            prop_assert_eq!(r.contains(&w), a.contains(&u.concat(&w)));
        }
    }

    #[test]
    fn complement_and_set_algebra(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_set(&mut rng(s1), 5);
        let b = random_set(&mut rng(s2), 5);
        let (un, it, co) = (a.union(&b), a.intersect(&b), a.complement());
        for u in words_to(7) {
            prop_assert_eq!(un.contains(&u), a.contains(&u) || b.contains(&u));
            prop_assert_eq!(it.contains(&u), a.contains(&u) && b.contains(&u));
            prop_assert_eq!(co.contains(&u), !a.contains(&u));
        }
    }
}

#[test]
fn levels_enumerate_in_lex_order() {
    for n in 0..8 {
        let l: Vec<Word> = Level::new(n).collect();
        assert_eq!(l.len(), 1 << n);
        assert!(l.windows(2).all(|p| p[0].lex_less(&p[1])));
    }
}
