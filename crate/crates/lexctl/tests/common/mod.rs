//! A small COGS-style grammar used when the official files are absent.
//!
//! Sentences follow COGS conventions: space-separated tokens, a detached
//! final period, `x _ i` variables indexing 0-based tokens, definite nouns as
//! `*` prefixes and everything else joined with `AND`. Exactly 21 lexical
//! items occur once in training and again in the generalization split.

#![allow(dead_code)]

use std::path::Path;

use lexctl::core::{Example, SplitFile, SplitName};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const NOUNS: &[&str] = &[
    "cat", "dog", "girl", "boy", "cake", "box", "table", "rose", "bird", "lion", "baby", "child", "teacher", "doctor",
    "king", "queen", "monkey", "mouse", "horse", "cow", "pig", "frog", "duck", "bear", "wolf", "fox", "tiger",
    "rabbit", "chicken", "sheep", "goat", "apple", "cookie", "pencil", "book", "bottle", "cup", "plate", "chair",
    "bed", "sofa", "lamp", "bag", "hat", "shoe", "ball", "drum", "car", "truck", "boat", "kite", "doll", "house",
    "garden", "room", "shelf", "stage", "tree", "flower", "basket",
];
pub const NAMES: &[&str] = &[
    "Emma", "Liam", "Noah", "Ava", "Mason", "Sophia", "Ethan", "Mia", "James", "Amelia", "Lucas", "Harper", "Henry",
    "Evelyn", "Jack", "Ella", "Leo", "Chloe", "Owen", "Zoe",
];
const PREPS: &[&str] = &["on", "in", "beside"];

#[derive(Clone, Copy)]
pub struct Verb {
    pub lemma: &'static str,
    pub past: &'static str,
    pub part: &'static str,
}

const fn v(lemma: &'static str, past: &'static str, part: &'static str) -> Verb {
    Verb { lemma, past, part }
}

const TRANSITIVE: &[Verb] = &[
    v("see", "saw", "seen"),
    v("eat", "ate", "eaten"),
    v("like", "liked", "liked"),
    v("find", "found", "found"),
    v("help", "helped", "helped"),
    v("hold", "held", "held"),
    v("paint", "painted", "painted"),
    v("clean", "cleaned", "cleaned"),
    v("draw", "drew", "drawn"),
    v("take", "took", "taken"),
    v("push", "pushed", "pushed"),
    v("carry", "carried", "carried"),
    v("kick", "kicked", "kicked"),
    v("touch", "touched", "touched"),
    v("bake", "baked", "baked"),
];
const UNACCUSATIVE: &[Verb] = &[
    v("melt", "melted", "melted"),
    v("break", "broke", "broken"),
    v("freeze", "froze", "frozen"),
    v("burn", "burned", "burned"),
    v("grow", "grew", "grown"),
    v("shrink", "shrank", "shrunk"),
];
const UNERGATIVE: &[Verb] = &[
    v("sleep", "slept", "slept"),
    v("smile", "smiled", "smiled"),
    v("laugh", "laughed", "laughed"),
    v("run", "ran", "run"),
    v("jog", "jogged", "jogged"),
    v("dance", "danced", "danced"),
    v("cough", "coughed", "coughed"),
    v("sneeze", "sneezed", "sneezed"),
];
const CP_VERBS: &[Verb] = &[
    v("say", "said", "said"),
    v("think", "thought", "thought"),
    v("hope", "hoped", "hoped"),
    v("know", "knew", "known"),
    v("believe", "believed", "believed"),
];
const WANT: Verb = v("want", "wanted", "wanted");

/// The planted controlled items, sorted.
pub const CONTROLLED: [&str; 21] = [
    "Charlie", "Gina", "Lina", "Olivia", "Paula", "bless", "blink", "cockroach", "crocodile", "crumple", "donut",
    "giggle", "gnome", "hedgehog", "muffin", "pancake", "roll", "shark", "shatter", "shorten", "squeeze",
];

const SQUEEZE: Verb = v("squeeze", "squeezed", "squeezed");
const BLESS: Verb = v("bless", "blessed", "blessed");
const SHATTER: Verb = v("shatter", "shattered", "shattered");
const CRUMPLE: Verb = v("crumple", "crumpled", "crumpled");
const ROLL: Verb = v("roll", "rolled", "rolled");
const GIGGLE: Verb = v("giggle", "giggled", "giggled");
const BLINK: Verb = v("blink", "blinked", "blinked");

#[derive(Clone)]
pub enum Np {
    Def(&'static str),
    Indef(&'static str),
    Name(&'static str),
    /// Head noun phrase modified by `prep` + object.
    Pp(Box<Np>, &'static str, Box<Np>),
}

#[derive(Default)]
struct Builder {
    words: Vec<String>,
    defs: Vec<(String, usize)>,
    conj: Vec<String>,
}

fn var(i: usize) -> String {
    format!("x _ {i}")
}

impl Builder {
    fn push(&mut self, w: &str) -> usize {
        self.words.push(w.to_string());
        self.words.len() - 1
    }

    fn np(&mut self, np: &Np) -> String {
        match np {
            Np::Def(n) => {
                self.push("the");
                let i = self.push(n);
                self.defs.push((n.to_string(), i));
                var(i)
            }
            Np::Indef(n) => {
                self.push("a");
                let i = self.push(n);
                self.conj.push(format!("{n} ( {} )", var(i)));
                var(i)
            }
            Np::Name(n) => {
                self.push(n);
                n.to_string()
            }
            Np::Pp(head, prep, obj) => {
                let h = self.np(head);
                let lemma = match head.as_ref() {
                    Np::Def(n) | Np::Indef(n) => *n,
                    _ => panic!("PP heads are common nouns"),
                };
                self.push(prep);
                let o = self.np(obj);
                self.conj.push(format!("{lemma} . nmod . {prep} ( {h} , {o} )"));
                h
            }
        }
    }

    fn atom(&mut self, verb: &str, role: &str, e: usize, arg: &str) {
        self.conj.push(format!("{verb} . {role} ( {} , {arg} )", var(e)));
    }

    fn finish(self) -> (String, String) {
        let mut words = self.words;
        let first = &mut words[0];
        if let Some(c) = first.chars().next() {
            *first = c.to_uppercase().collect::<String>() + &first[c.len_utf8()..];
        }
        words.push(".".to_string());
        let mut lf = String::new();
        for (n, i) in &self.defs {
            lf.push_str(&format!("* {n} ( {} ) ; ", var(*i)));
        }
        lf.push_str(&self.conj.join(" AND "));
        (words.join(" "), lf)
    }
}

/// Clause shapes; each builds into `b` and returns the main verb's token.
#[derive(Clone)]
pub enum Clause {
    Transitive(Np, Verb, Np),
    Passive(Np, Verb, Np),
    Unaccusative(Np, Verb),
    Unergative(Np, Verb),
    Xcomp(Np, Verb),
    Cp(Np, Verb, Box<Clause>),
}

fn build(b: &mut Builder, c: &Clause) -> usize {
    match c {
        Clause::Transitive(s, v, o) => {
            let st = b.np(s);
            let e = b.push(v.past);
            let ot = b.np(o);
            b.atom(v.lemma, "agent", e, &st);
            b.atom(v.lemma, "theme", e, &ot);
            e
        }
        Clause::Passive(s, v, agent) => {
            let st = b.np(s);
            b.push("was");
            let e = b.push(v.part);
            b.push("by");
            let at = b.np(agent);
            b.atom(v.lemma, "theme", e, &st);
            b.atom(v.lemma, "agent", e, &at);
            e
        }
        Clause::Unaccusative(s, v) => {
            let st = b.np(s);
            let e = b.push(v.past);
            b.atom(v.lemma, "theme", e, &st);
            e
        }
        Clause::Unergative(s, v) => {
            let st = b.np(s);
            let e = b.push(v.past);
            b.atom(v.lemma, "agent", e, &st);
            e
        }
        Clause::Xcomp(s, v) => {
            let st = b.np(s);
            let w = b.push(WANT.past);
            b.push("to");
            let e = b.push(v.lemma);
            b.atom(WANT.lemma, "agent", w, &st);
            b.conj.push(format!("{} . xcomp ( {} , {} )", WANT.lemma, var(w), var(e)));
            b.atom(v.lemma, "agent", e, &st);
            w
        }
        Clause::Cp(s, v, inner) => {
            let st = b.np(s);
            let e = b.push(v.past);
            b.push("that");
            let ie = build(b, inner);
            b.atom(v.lemma, "agent", e, &st);
            b.conj.push(format!("{} . ccomp ( {} , {} )", v.lemma, var(e), var(ie)));
            e
        }
    }
}

pub fn render(c: &Clause, category: &str) -> Example {
    let mut b = Builder::default();
    build(&mut b, c);
    let (s, lf) = b.finish();
    Example::new(s, lf, category)
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        *xs.choose(&mut self.rng).expect("non-empty")
    }

    fn simple_np(&mut self) -> Np {
        match self.rng.gen_range(0..10) {
            0..=3 => Np::Def(self.pick(NOUNS)),
            4..=6 => Np::Indef(self.pick(NOUNS)),
            _ => Np::Name(self.pick(NAMES)),
        }
    }

    fn common_np(&mut self) -> Np {
        if self.rng.gen_bool(0.5) {
            Np::Def(self.pick(NOUNS))
        } else {
            Np::Indef(self.pick(NOUNS))
        }
    }

    /// Objects may carry one PP, as in COGS training data.
    fn object_np(&mut self) -> Np {
        if self.rng.gen_bool(0.25) {
            let head = self.common_np();
            let prep = self.pick(PREPS);
            Np::Pp(Box::new(head), prep, Box::new(self.common_np()))
        } else {
            self.simple_np()
        }
    }

    fn clause(&mut self, depth: usize) -> Clause {
        let roll = self.rng.gen_range(0..100);
        match roll {
            0..=29 => Clause::Transitive(self.simple_np(), self.pick(TRANSITIVE), self.object_np()),
            30..=41 => Clause::Passive(self.simple_np(), self.pick(TRANSITIVE), self.simple_np()),
            42..=47 => Clause::Unaccusative(self.simple_np(), self.pick(UNACCUSATIVE)),
            48..=53 => Clause::Unergative(self.simple_np(), self.pick(UNERGATIVE)),
            54..=59 => Clause::Xcomp(self.simple_np(), self.pick(UNERGATIVE)),
            _ if depth >= 2 => Clause::Unergative(self.simple_np(), self.pick(UNERGATIVE)),
            _ => {
                let inner = self.embedded(depth + 1);
                Clause::Cp(self.simple_np(), self.pick(CP_VERBS), Box::new(inner))
            }
        }
    }

    fn embedded(&mut self, depth: usize) -> Clause {
        match self.rng.gen_range(0..5) {
            0 => Clause::Transitive(self.simple_np(), self.pick(TRANSITIVE), self.simple_np()),
            1 => Clause::Passive(self.simple_np(), self.pick(TRANSITIVE), self.simple_np()),
            2 => Clause::Unaccusative(self.simple_np(), self.pick(UNACCUSATIVE)),
            3 => Clause::Unergative(self.simple_np(), self.pick(UNERGATIVE)),
            _ if depth < 2 => {
                let inner = self.embedded(depth + 1);
                Clause::Cp(self.simple_np(), self.pick(CP_VERBS), Box::new(inner))
            }
            _ => Clause::Unergative(self.simple_np(), self.pick(UNERGATIVE)),
        }
    }
}

fn prim_noun(n: &str) -> Example {
    Example::new(n, format!("LAMBDA a . {n} ( a )"), "in_distribution")
}

fn prim_verb(v: &str) -> Example {
    Example::new(
        v,
        format!("LAMBDA a . LAMBDA b . LAMBDA e . {v} . agent ( e , b ) AND {v} . theme ( e , a )"),
        "in_distribution",
    )
}

fn exposures() -> Vec<Example> {
    use Clause::*;
    let d = |n| Np::Def(n);
    let i = |n| Np::Indef(n);
    let name = |n| Np::Name(n);
    let t = |s, v, o| Transitive(s, v, o);
    let cat = "in_distribution";
    let mut rows = vec![
        render(&t(d("hedgehog"), TRANSITIVE[0], d("cake")), cat),
        render(&t(name("Emma"), TRANSITIVE[1], d("donut")), cat),
        render(&t(i("gnome"), TRANSITIVE[2], name("Liam")), cat),
        render(&t(d("girl"), TRANSITIVE[3], i("pancake")), cat),
        render(&t(name("Noah"), TRANSITIVE[5], i("muffin")), cat),
        render(&t(name("Charlie"), TRANSITIVE[4], d("boy")), cat),
        render(&t(d("teacher"), TRANSITIVE[6], name("Lina")), cat),
        render(&t(d("baby"), SQUEEZE, d("ball")), cat),
        render(&t(name("Ava"), BLESS, i("child")), cat),
        render(&Passive(d("cup"), SHATTER, name("Mason")), cat),
        render(&Passive(i("hat"), CRUMPLE, d("dog")), cat),
        render(&Cp(name("Sophia"), CP_VERBS[0], Box::new(Unaccusative(d("ball"), ROLL))), cat),
        render(&Cp(d("king"), CP_VERBS[1], Box::new(Unergative(i("baby"), GIGGLE))), cat),
        render(&Cp(name("Mia"), CP_VERBS[2], Box::new(Unergative(d("frog"), BLINK))), cat),
    ];
    rows.extend(["shark", "cockroach", "crocodile"].map(prim_noun));
    rows.extend(["Paula", "Olivia", "Gina"].map(|n| Example::new(n, n, cat)));
    rows.push(prim_verb("shorten"));
    rows
}

fn gen_rows(g: &mut Gen, per: usize) -> Vec<Example> {
    use Clause::*;
    let mut rows = Vec::new();
    for _ in 0..per {
        let s = g.simple_np();
        let o = g.simple_np();
        let tv = g.pick(TRANSITIVE);
        let uv = g.pick(UNERGATIVE);
        rows.push(render(&Transitive(s.clone(), tv, Np::Def("hedgehog")), "subj_to_obj_common"));
        rows.push(render(&Transitive(Np::Def("donut"), tv, o.clone()), "obj_to_subj_common"));
        rows.push(render(&Transitive(s.clone(), tv, Np::Indef("gnome")), "subj_to_obj_common"));
        rows.push(render(&Transitive(Np::Indef("pancake"), tv, o.clone()), "obj_to_subj_common"));
        rows.push(render(&Transitive(Np::Indef("muffin"), tv, o.clone()), "obj_to_subj_common"));
        rows.push(render(&Transitive(s.clone(), tv, Np::Name("Charlie")), "subj_to_obj_proper"));
        rows.push(render(&Transitive(Np::Name("Lina"), tv, o.clone()), "obj_to_subj_proper"));
        rows.push(render(&Transitive(Np::Def("shark"), tv, o.clone()), "prim_to_subj_common"));
        rows.push(render(&Transitive(s.clone(), tv, Np::Indef("cockroach")), "prim_to_obj_common"));
        rows.push(render(&Transitive(s.clone(), tv, Np::Def("crocodile")), "prim_to_obj_common"));
        rows.push(render(&Transitive(Np::Name("Paula"), tv, o.clone()), "prim_to_subj_proper"));
        rows.push(render(&Transitive(s.clone(), tv, Np::Name("Olivia")), "prim_to_obj_proper"));
        rows.push(render(&Unergative(Np::Name("Gina"), uv), "prim_to_subj_proper"));
        rows.push(render(&Passive(o.clone(), SQUEEZE, s.clone()), "active_to_passive"));
        rows.push(render(&Passive(o.clone(), BLESS, s.clone()), "active_to_passive"));
        rows.push(render(&Transitive(s.clone(), SHATTER, o.clone()), "passive_to_active"));
        rows.push(render(&Transitive(s.clone(), CRUMPLE, o.clone()), "passive_to_active"));
        rows.push(render(&Transitive(s.clone(), ROLL, o.clone()), "unacc_to_transitive"));
        rows.push(render(&Transitive(s.clone(), GIGGLE, o.clone()), "obj_omitted_transitive_to_transitive"));
        rows.push(render(&Unergative(s.clone(), BLINK), "only_seen_in_cp_to_main_clause"));
        rows.push(render(&Xcomp(s.clone(), v("shorten", "shortened", "shortened")), "prim_to_inf_arg"));

        // structural
        let mut deep = g.common_np();
        for _ in 0..3 {
            let prep = g.pick(PREPS);
            deep = Np::Pp(Box::new(g.common_np()), prep, Box::new(deep));
        }
        rows.push(render(&Transitive(s.clone(), tv, deep), "pp_recursion"));
        let prep = g.pick(PREPS);
        let subj_pp = Np::Pp(Box::new(g.common_np()), prep, Box::new(g.common_np()));
        rows.push(render(&Transitive(subj_pp, tv, o.clone()), "obj_pp_to_subj_pp"));
        let mut c = Unergative(g.simple_np(), uv);
        for _ in 0..3 {
            c = Cp(g.simple_np(), g.pick(CP_VERBS), Box::new(c));
        }
        rows.push(render(&c, "cp_recursion"));
    }
    rows
}

pub struct Synthetic {
    pub train: SplitFile,
    pub dev: SplitFile,
    pub test: SplitFile,
    pub gen: SplitFile,
}

impl Synthetic {
    pub fn splits(&self) -> [&SplitFile; 4] {
        [&self.train, &self.dev, &self.test, &self.gen]
    }
}

/// Deterministic synthetic dataset with `train_rows` training rows.
pub fn synthetic_cogs(seed: u64, train_rows: usize) -> Synthetic {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let sample = |g: &mut Gen, n: usize| -> Vec<Example> { (0..n).map(|_| render(&g.clause(0), "in_distribution")).collect() };
    let exp = exposures();
    let mut train = sample(&mut g, train_rows.saturating_sub(exp.len()));
    let stride = train.len() / exp.len() + 1;
    for (k, row) in exp.into_iter().enumerate() {
        train.insert((k * stride).min(train.len()), row);
    }
    let dev = sample(&mut g, 300);
    let test = sample(&mut g, 300);
    let gen = gen_rows(&mut g, 10);
    Synthetic {
        train: SplitFile::new(SplitName::Train, train),
        dev: SplitFile::new(SplitName::Dev, dev),
        test: SplitFile::new(SplitName::Test, test),
        gen: SplitFile::new(SplitName::Gen, gen),
    }
}

pub fn write_dataset(dir: &Path, data: &Synthetic) {
    std::fs::create_dir_all(dir).unwrap();
    for s in data.splits() {
        std::fs::write(dir.join(lexctl::io::split_file_name(s.name)), s.to_tsv()).unwrap();
    }
}
