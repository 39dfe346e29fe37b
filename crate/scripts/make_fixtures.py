#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under crates/core/tests/fixtures.

Everything is deterministic (fixed seeds), so rerunning the script yields
byte-identical files. The 100- and 20-template subsets are produced by the
`vardef subset-templates` command afterwards, see scripts/make_fixtures.sh.
"""

import json
import random
import re
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "tests" / "fixtures"

# (process, papers, variables, variables with definitions)
PROCESS_ROWS = [
    ("CRYST", 11, 281, 200),
    ("CSTR", 10, 169, 123),
    ("BD", 10, 186, 125),
    ("CZ", 9, 311, 196),
    ("STHE", 7, 267, 176),
]

# Smaller corpus with the same five processes, used by the experiment smoke test.
MINI = [
    ("CRYST", 6, 30, 20),
    ("CSTR", 5, 25, 17),
    ("BD", 5, 25, 16),
    ("CZ", 5, 30, 19),
    ("STHE", 4, 24, 15),
]

COMMON = ["rate", "total", "initial", "final", "average", "constant", "value", "time", "ratio", "coefficient"]
# Vocabulary shared by the reactor and biodiesel processes only.
REACTION = [
    "reactor", "reaction", "feed", "concentration", "conversion", "catalyst", "flow", "molar",
    "species", "yield", "kinetic", "activation", "energy", "residence", "stream", "product",
    "reactant", "order", "stirred", "tank", "volume", "inlet", "outlet", "jacket", "methanol",
    "ester", "oil", "acid", "alcohol", "glycerol",
]
OWN = {
    "CRYST": ["crystal", "nucleation", "growth", "supersaturation", "solubility", "seed", "moment",
              "size", "distribution", "solute", "solvent", "agglomeration", "population", "density",
              "cooling", "antisolvent", "particle", "crystallizer", "mass", "birth"],
    "CSTR": ["coolant", "temperature", "heat", "exothermic", "setpoint", "controller", "gain", "disturbance"],
    "BD": ["transesterification", "triglyceride", "biodiesel", "fatty", "lipase", "soybean", "washing", "separation"],
    "CZ": ["melt", "ingot", "pulling", "crucible", "silicon", "meniscus", "interface", "radius", "heater",
           "argon", "rotation", "puller", "thermal", "gradient", "dopant", "segregation", "oxygen",
           "height", "shape", "diameter"],
    "STHE": ["shell", "tube", "baffle", "fouling", "pitch", "bundle", "pass", "nozzle", "wall", "thickness",
             "fluid", "pressure", "drop", "prandtl", "reynolds", "nusselt", "conductivity", "viscosity",
             "spacing", "cut"],
    # general mathematical and scientific writing
    "SYMLINK": ["number", "set", "vertices", "graph", "probability", "sample", "matrix", "vector",
                "dimension", "field", "charge", "mass", "energy", "frequency", "wavelength", "index",
                "function", "loss", "parameter", "layer"],
}
SYMBOLS = ["C", "T", "F", "V", "k", "q", "h", "m", "x", "y", "P", "Q", "U", "A", "L", "D",
           "ρ", "μ", "τ", "θ", "α", "β", "ε", "λ"]


def build(pieces):
    """pieces: ("t", text) | ("v", key, text) | ("d", key, text). Offsets are code points."""
    text, spans, pos = "", {}, 0
    for p in pieces:
        s = p[-1]
        if p[0] != "t":
            spans[(p[0], p[1])] = (pos, pos + len(s))
        text += s
        pos += len(s)
    return text, spans


def definition(rng, process):
    own = OWN[process]
    pools = [own]
    if process in ("CSTR", "BD"):
        pools = [own, REACTION, REACTION]
    head = rng.choice(rng.choice(pools))
    words = [head]
    if rng.random() < 0.4:
        words.append(rng.choice(COMMON))
    if rng.random() < 0.5:
        words += ["of", rng.choice(rng.choice(pools))]
    return " ".join(words)


DEF_PATTERNS = [
    lambda v, d: [("t", ""), ("v", 1, v), ("t", " is the "), ("d", 1, d), ("t", ".")],
    lambda v, d: [("t", "where "), ("v", 1, v), ("t", " denotes the "), ("d", 1, d), ("t", ".")],
    lambda v, d: [("t", "The "), ("d", 1, d), ("t", " is denoted by "), ("v", 1, v), ("t", ".")],
    lambda v, d: [("t", "Here, "), ("v", 1, v), ("t", " represents the "), ("d", 1, d), ("t", " in the model.")],
]
NODEF_PATTERNS = [
    lambda v: [("t", "The value of "), ("v", 1, v), ("t", " is obtained from Eq. (4).")],
    lambda v: [("v", 1, v), ("t", " is kept constant during operation.")],
    lambda v: [("t", "Substituting "), ("v", 1, v), ("t", " into the balance gives the result.")],
]


def make_sentence(rng, vars_):
    """vars_: list of (var_id, surface, definition or None), one or two entries."""
    if len(vars_) == 2 and all(d for _, _, d in vars_):
        (i1, v1, d1), (i2, v2, d2) = vars_
        pieces = [("v", 1, v1), ("t", " and "), ("v", 2, v2), ("t", " are the "), ("d", 1, d1),
                  ("t", " and the "), ("d", 2, d2), ("t", ", respectively.")]
    elif len(vars_) == 2 and not any(d for _, _, d in vars_):
        (_, v1, _), (_, v2, _) = vars_
        pieces = [("v", 1, v1), ("t", " and "), ("v", 2, v2), ("t", " are kept constant.")]
    elif len(vars_) == 2:
        (i1, v1, d1), (i2, v2, d2) = vars_
        first = ("v", 1, v1) if d1 else ("v", 2, v2)
        second = ("v", 2, v2) if d1 else ("v", 1, v1)
        dd = d1 or d2
        dkey = 1 if d1 else 2
        pieces = [first, ("t", " is the "), ("d", dkey, dd), ("t", ", and "), second,
                  ("t", " is computed from it.")]
    else:
        _, v, d = vars_[0]
        pieces = rng.choice(DEF_PATTERNS)(v, d) if d else rng.choice(NODEF_PATTERNS)(v)
    text, spans = build(pieces)
    variables = []
    for n, (vid, _, d) in enumerate(vars_, start=1):
        s, e = spans[("v", n)]
        dspan = spans.get(("d", n))
        variables.append({
            "var_id": vid, "start": s, "end": e,
            "definition": {"start": dspan[0], "end": dspan[1]} if dspan else None,
            "is_target": True,
        })
    variables.sort(key=lambda v: v["start"])
    return {"text": text, "variables": variables}


def split_evenly(rng, total, parts):
    base = [total // parts] * parts
    for i in range(total % parts):
        base[i] += 1
    # jitter while keeping every part >= 1
    for _ in range(parts):
        a, b = rng.randrange(parts), rng.randrange(parts)
        if a != b and base[a] > 2:
            base[a] -= 1
            base[b] += 1
    return base


def make_corpus(rows, seed, prefix):
    rng = random.Random(seed)
    docs = []
    for process, papers, nvars, ndefs in rows:
        has_def = [True] * ndefs + [False] * (nvars - ndefs)
        rng.shuffle(has_def)
        counts = split_evenly(rng, nvars, papers)
        cursor = 0
        for p in range(papers):
            doc_id = f"{prefix}{process.lower()}-{p + 1:02d}"
            mentions = []
            for k in range(counts[p]):
                sym = SYMBOLS[k % len(SYMBOLS)]
                surface = f"{sym}_{k // len(SYMBOLS) + 1}" if k >= len(SYMBOLS) else sym
                if rng.random() < 0.3:
                    surface = f"{sym}_{{{rng.choice(['in', 'out', 's', '0', 'max'])}}}"
                    surface = surface if all(m[1] != surface for m in mentions) else f"{sym}_{k}"
                d = definition(rng, process) if has_def[cursor] else None
                mentions.append((f"v{k + 1}", surface, d))
                cursor += 1
            sentences = []
            i = 0
            while i < len(mentions):
                take = 2 if i + 1 < len(mentions) and rng.random() < 0.25 else 1
                sentences.append(make_sentence(rng, mentions[i:i + take]))
                i += take
            docs.append({"doc_id": doc_id, "process_tag": process, "sentences": sentences})
    return docs


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------- templates

INTROS = ["", "In this model, ", "Here, ", "In the following, ", "For the reactor, ", "In Eq. (2), ",
          "Throughout the paper, ", "For simplicity, ", "In the balance equations, ", "As shown above, "]
DEF_CLAUSES = ["{v} is the {d}", "{v} denotes the {d}", "{v} represents the {d}", "the {d} is denoted by {v}",
               "{v} stands for the {d}", "{v} is defined as the {d}", "{v} refers to the {d}",
               "{v} indicates the {d}", "we write {v} for the {d}", "{v} is used for the {d}"]
NODEF_CLAUSES = ["{v} is kept constant", "the value of {v} is fixed", "{v} is obtained from the balance",
                 "{v} appears in the rate law", "{v} is updated at every step", "{v} is measured online",
                 "{v} changes slowly", "{v} is given in Table 1"]
ENDINGS = [".", " in this study.", " throughout the simulation.", " at steady state.", " in the model."]
EQUATIONS = ["d{v}/dt = k[A][B]", "{v} = k*[A]^2", "d{v}/dz = -r[A]", "{v} = U*A*(T_h - T_c)"]


def template_text(rng, arity, defs):
    """A template with `arity` variables of which the first `defs` (in a shuffled order) have definitions."""
    slots = list(range(1, arity + 1))
    with_def = set(rng.sample(slots, defs))
    clauses = []
    for i in slots:
        v = f"[VAR_{i}]"
        if i in with_def:
            clauses.append(rng.choice(DEF_CLAUSES).format(v=v, d=f"[DEF_{i}]"))
        elif arity == 1 and defs == 0 and rng.random() < 0.25:
            clauses.append("the rate is described by the equation " + rng.choice(EQUATIONS).format(v=v))
        else:
            clauses.append(rng.choice(NODEF_CLAUSES).format(v=v))
    if len(clauses) == 1:
        body = clauses[0]
    else:
        body = ", ".join(clauses[:-1]) + ", and " + clauses[-1]
    intro = rng.choice(INTROS)
    sentence = intro + body + rng.choice(ENDINGS)
    return sentence[0].upper() + sentence[1:]


# (definition slots, arity, count); bucket totals follow 120/42/42/24/24/24/24
TEMPLATE_PLAN = [
    (0, 1, 40), (0, 2, 30), (0, 3, 20), (0, 4, 15), (0, 5, 10), (0, 6, 5),
    (1, 1, 42),
    (2, 2, 30), (2, 3, 12),
    (3, 3, 16), (3, 4, 8),
    (4, 4, 16), (4, 5, 8),
    (5, 5, 16), (5, 6, 8),
    (6, 6, 24),
]


def make_templates(seed):
    rng = random.Random(seed)
    seen, out = set(), []
    for defs, arity, count in TEMPLATE_PLAN:
        made = 0
        while made < count:
            t = template_text(rng, arity, defs)
            if t not in seen:
                seen.add(t)
                out.append(t)
                made += 1
    rng.shuffle(out)
    return out


# -------------------------------------------------------------- score files

TOKEN = re.compile(r"\[target\]|\w+|[^\w\s]")


def tokenize_marked(sentence, var):
    """Tokens of the sentence with the target replaced, offsets in original characters."""
    text = sentence["text"]
    vs, ve = var["start"], var["end"]
    marked = text[:vs] + "[target]" + text[ve:]
    ms, me = vs, vs + len("[target]")
    tokens, offsets = ["[CLS]"], [None]
    for m in TOKEN.finditer(marked):
        s, e = m.start(), m.end()
        if s >= me:
            os_, oe = s - me + ve, e - me + ve
        elif e <= ms:
            os_, oe = s, e
        else:
            os_, oe = vs, ve
        tokens.append(m.group(0))
        offsets.append([os_, oe])
    tokens.append("[SEP]")
    offsets.append(None)
    return tokens, offsets


def token_index(offsets, char, side):
    for i, o in enumerate(offsets):
        if o is not None and o[side] == char:
            return i
    raise ValueError(f"no token boundary at {char}")


def record(doc_id, var_id, tokens, offsets, start_pos, end_pos, rng):
    n = len(tokens)
    s_start = [round(rng.uniform(0.0, 0.08), 4) for _ in range(n)]
    s_end = [round(rng.uniform(0.0, 0.08), 4) for _ in range(n)]
    s_start[start_pos] = round(rng.uniform(0.6, 0.9), 4)
    s_end[end_pos] = round(rng.uniform(0.6, 0.9), 4)
    return {"doc_id": doc_id, "var_id": var_id, "tokens": tokens, "s_start": s_start,
            "s_end": s_end, "offset_map": offsets}


def mock_scores(docs, seed, accuracy):
    rng = random.Random(seed)
    out = []
    for d in docs:
        for s in d["sentences"]:
            for v in s["variables"]:
                tokens, offsets = tokenize_marked(s, v)
                n = len(tokens)
                gold = v["definition"]
                word_positions = [i for i in range(1, n - 1) if offsets[i] != [v["start"], v["end"]]]
                if gold:
                    gs = token_index(offsets, gold["start"], 0)
                    ge = token_index(offsets, gold["end"], 1)
                    roll = rng.random()
                    if roll < accuracy:
                        k, l = gs, ge
                    elif roll < accuracy + (1 - accuracy) * 0.3:
                        k, l = 0, 0
                    elif roll < accuracy + (1 - accuracy) * 0.55:
                        k, l = max(1, gs - 1), ge
                    elif roll < accuracy + (1 - accuracy) * 0.75 and ge > gs:
                        k, l = gs, ge - 1
                    else:
                        k = rng.choice(word_positions)
                        l = min(n - 2, k + rng.randrange(0, 3))
                else:
                    if rng.random() < accuracy:
                        k, l = 0, 0
                    else:
                        k = rng.choice(word_positions)
                        l = min(n - 2, k + rng.randrange(0, 3))
                out.append(record(d["doc_id"], v["var_id"], tokens, offsets, k, l, rng))
    return out


# -------------------------------------------------- hand-checked decode fixture

def handmade():
    """Nine targets with intended outcomes: TP x3, FP1_wide, FP2 x2, FN, TN x2."""
    sentences = [
        # (doc, text, var surface, gold definition or None, intended (start_word, end_word) or None)
        ("h1", "where T is the reactor temperature .", "T", "reactor temperature", "reactor temperature"),
        ("h1", "F denotes the feed flow rate .", "F", "feed flow rate", "feed flow rate"),
        ("h2", "The molar volume is denoted by V .", "V", "molar volume", "molar volume"),
        ("h2", "Here k represents the rate constant in the model .", "k", "rate constant", "the rate constant"),
        ("h3", "The value of q is obtained from Eq. (4) .", "q", None, "Eq"),
        ("h3", "Substituting h into the balance gives the result .", "h", None, "the balance"),
        ("h4", "where x is the conversion of species A .", "x", "conversion of species A", None),
        ("h4", "m is kept constant during operation .", "m", None, None),
        ("h5", "Substituting y into the balance gives the result .", "y", None, None),
    ]
    docs, scores = {}, []
    rng = random.Random(99)
    for i, (doc, text, var, gold, pred) in enumerate(sentences):
        vs = text.index(var + " ")
        v = {"var_id": f"v{i + 1}", "start": vs, "end": vs + len(var), "is_target": True,
             "definition": None}
        if gold:
            gs = text.index(gold)
            v["definition"] = {"start": gs, "end": gs + len(gold)}
        sent = {"text": text, "variables": [v]}
        docs.setdefault(doc, {"doc_id": doc, "process_tag": "HAND", "sentences": []})["sentences"].append(sent)
        tokens, offsets = tokenize_marked(sent, v)
        if pred:
            ps = text.index(pred)
            k = token_index(offsets, ps, 0)
            l = token_index(offsets, ps + len(pred), 1)
        else:
            k = l = 0
        scores.append(record(doc, v["var_id"], tokens, offsets, k, l, rng))
    return list(docs.values()), scores


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    process = make_corpus(PROCESS_ROWS, 2024, "")
    write_jsonl(OUT / "process_corpus.jsonl", process)

    mini = make_corpus(MINI, 77, "mini-")
    write_jsonl(OUT / "mini_process.jsonl", mini)
    symlink = make_corpus([("SYMLINK", 8, 40, 28)], 5, "sym-")
    write_jsonl(OUT / "mini_symlink.jsonl", symlink)
    scores_dir = OUT / "mini_scores"
    scores_dir.mkdir(exist_ok=True)
    for rep, acc in ((1, 0.85), (2, 0.8)):
        write_jsonl(scores_dir / f"repeat-{rep:02d}.jsonl", mock_scores(mini, 1000 + rep, acc))

    with open(OUT / "templates_t300.txt", "w", encoding="utf-8", newline="\n") as f:
        f.write("# 300 template sentences; definition-slot histogram 120,42,42,24,24,24,24\n")
        for t in make_templates(300):
            f.write(t + "\n")

    hand_docs, hand_scores = handmade()
    write_jsonl(OUT / "hand_gold.jsonl", hand_docs)
    write_jsonl(OUT / "hand_scores.jsonl", hand_scores)


if __name__ == "__main__":
    main()
