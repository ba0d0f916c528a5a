# SPDX-License-Identifier: Apache-2.0
# Regenerates toy.tsv: python3 generate.py > toy.tsv
# Tags follow from agreement rules and the neighbouring words only; the
# check at the bottom enforces that over a +-2 word window.
import random
import sys

rng = random.Random(20)

# noun: lemma, gender, forms {(num, case): surface}
def aa_masc(stem):
    return (stem + "ा", "m", {("sg", "d"): stem + "ा", ("sg", "o"): stem + "े",
                              ("pl", "d"): stem + "े", ("pl", "o"): stem + "ों"})

def ii_fem(stem):
    return (stem + "ी", "f", {("sg", "d"): stem + "ी", ("sg", "o"): stem + "ी",
                              ("pl", "d"): stem + "ियाँ", ("pl", "o"): stem + "ियों"})

def cons_fem(w):
    return (w, "f", {("sg", "d"): w, ("sg", "o"): w,
                     ("pl", "d"): w + "ें", ("pl", "o"): w + "ों"})

def cons_masc(w):
    return (w, "m", {("sg", "o"): w, ("pl", "o"): w + "ों"})

ACTORS = [aa_masc("लड़क"), aa_masc("बच्च"), ii_fem("लड़क"), cons_fem("बहन")]
THINGS = [aa_masc("कमर"), cons_masc("घर"), ii_fem("रोट"), cons_fem("किताब"), ii_fem("नद")]
ADJ = ["अच्छ", "बड़"]
PRON = {"मैं": ("मैं", "1", "sg"), "हम": ("हम", "1", "pl"), "तुम": ("तुम", "2", "pl"),
        "वह": ("वह", "3", "sg"), "वे": ("वह", "3", "pl")}
TRANS = ["खा", "पढ़", "देख", "लिख"]
INTRANS = ["बैठ", "दौड़", "उठ"]
PSP = ["को", "से", "पर"]
U = "-"


def adj(stem, g, n, c):
    if g == "f":
        return stem + "ी"
    return stem + ("ा" if (n, c) == ("sg", "d") else "े")


def noun_phrase(entry, n, c):
    lemma, g, forms = entry
    out = []
    if rng.random() < 0.4:
        a = rng.choice(ADJ)
        out.append((adj(a, g, n, c), a + "ा", "JJ", g, n, U, c, U))
    out.append((forms[(n, c)], lemma, "NN", g, n, "3", c, U))
    return out


def aux(p, n):
    form = {("1", "sg"): "हूँ", ("2", "pl"): "हो", ("3", "sg"): "है"}.get((p, n), "हैं")
    return (form, "है", "VAUX", "any", n, p, U, "है")


def subject():
    if rng.random() < 0.35:
        w = rng.choice(sorted(PRON))
        lemma, p, n = PRON[w]
        g = rng.choice("mf")
        return [(w, lemma, "PRP", "any", n, p, "d", U)], g, n, p
    entry = rng.choice(ACTORS)
    n = rng.choice(["sg", "pl"])
    return noun_phrase(entry, n, "d"), entry[1], n, "3"


def habitual(v, g, n):
    return v + ("ती" if g == "f" else ("ता" if n == "sg" else "ते"))


def perfective(v, g, n):
    if g == "f":
        return v + ("ी" if n == "sg" else "ीं")
    return v + ("ा" if n == "sg" else "े")


def sentence():
    subj, g, n, p = subject()
    toks = list(subj)
    if rng.random() < 0.6:
        obj = rng.choice(THINGS)
        on = rng.choice(["sg", "pl"])
        toks += noun_phrase(obj, on, "o")
        psp = rng.choice(PSP)
        toks.append((psp, psp, "PSP", U, U, U, U, psp))
        v = rng.choice(TRANS)
        vg = "m" if g == "m" else "f"
        toks.append((habitual(v, vg, n), v, "VM", vg, n, U, U, "ता"))
        toks.append(aux(p, n))
    else:
        loc = rng.choice(THINGS)
        toks += noun_phrase(loc, rng.choice(["sg", "pl"]), "o")
        toks.append(("में", "में", "PSP", U, U, U, U, "में"))
        v = rng.choice(INTRANS)
        toks.append((perfective(v, g, n), v, "VM", g, n, U, U, "या"))
    return toks


def check(sentences, cw=2):
    seen = {}
    for s in sentences:
        words = [t[0] for t in s]
        for i, t in enumerate(s):
            key = tuple(words[j] if 0 <= j < len(words) else None
                        for j in range(i - cw, i + cw + 1))
            if seen.setdefault(key, t[1:]) != t[1:]:
                raise SystemExit(f"ambiguous window {key}: {seen[key]} vs {t[1:]}")


def main():
    sents = [sentence() for _ in range(50)]
    check(sents)
    out = sys.stdout
    for s in sents:
        for t in s:
            out.write("\t".join(t) + "\n")
        out.write("\n")


main()
