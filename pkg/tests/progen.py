"""Test-side oracles and random program corpora.

`naive_model` is an independent brute-force evaluator: it grounds every
rule over all constants and iterates to fixpoint, tracking the round each
atom first appears. It shares no code with the engine beyond reading the
public Program fields, so engine/oracle agreement is a real check.

`random_program` builds seeded random programs that are stratified and
consistency-safe by construction: each predicate is assigned the one
polarity rules may conclude and facts may assert, negative body mentions
only point at strictly lower layers, and every rule is range-restricted.
"""

from __future__ import annotations

import itertools
import random

from dedulog.engine import Literal, Program, Rule, Term

CONSTS = ("ann", "bob", "cal", "dot", "eva", "fred", "hal", "ivy")
UNARY_PREDS = ("blue", "cold", "glad", "red", "tall", "warm")
BINARY_PREDS = ("like", "need", "see")


# --- brute-force oracle ---------------------------------------------------

def _key(lit: Literal):
    return (lit.negative, lit.predicate, tuple(t.name for t in lit.args))


def _ground_key(lit: Literal, sub: dict):
    args = tuple(sub[t.name] if t.is_variable else t.name for t in lit.args)
    return (lit.negative, lit.predicate, args)


def naive_model(program: Program):
    """(atoms, depth) by naive full-grounding iteration; facts are round 0.
    Returns the string 'inconsistent' when both polarities co-occur."""
    consts = sorted(program.constants())
    atoms = set()
    depth = {}
    for fact in program.facts:
        key = _key(fact)
        atoms.add(key)
        depth[key] = 0

    ground_rules = []
    for rule in program.rules:
        variables = sorted(
            {t.name for lit in (rule.head, *rule.body) for t in lit.args if t.is_variable}
        )
        for combo in itertools.product(consts, repeat=len(variables)):
            sub = dict(zip(variables, combo))
            head = _ground_key(rule.head, sub)
            body = tuple(_ground_key(lit, sub) for lit in rule.body)
            ground_rules.append((head, body))

    rnd = 0
    while True:
        rnd += 1
        new = {
            head
            for head, body in ground_rules
            if head not in atoms and all(b in atoms for b in body)
        }
        if not new:
            break
        for key in new:
            atoms.add(key)
            depth[key] = rnd

    for negative, predicate, args in atoms:
        if (not negative, predicate, args) in atoms:
            return "inconsistent"
    return atoms, depth


def naive_answer(program: Program):
    result = naive_model(program)
    if result == "inconsistent":
        return "inconsistent"
    atoms, _ = result
    q = _key(program.query)
    if not program.query.negative:
        return q in atoms
    positive = (False, q[1], q[2])
    return q in atoms or positive not in atoms


def model_keys(model) -> set:
    return {_key(lit) for lit in model.atoms}


def depth_keys(model) -> dict:
    return {_key(lit): d for lit, d in model.depth.items()}


# --- random corpora ---------------------------------------------------------

def random_program(rng: random.Random, max_consts=8, max_preds=6, max_rules=12,
                    nl_safe=False) -> Program:
    consts = rng.sample(CONSTS, rng.randint(2, max_consts))
    n_unary = rng.randint(2, max(2, max_preds - 1))
    unary = rng.sample(UNARY_PREDS, min(n_unary, len(UNARY_PREDS)))
    n_binary = max(0, min(max_preds - len(unary), rng.randint(0, 2)))
    binary = rng.sample(BINARY_PREDS, n_binary)
    preds = unary + binary

    layers = list(preds)
    rng.shuffle(layers)
    level = {p: i for i, p in enumerate(layers)}
    # The polarity a predicate may be concluded/asserted with. The two
    # lowest layers stay positive so every rule can find a positive binder.
    polarity = {p: (level[p] >= 2 and rng.random() < 0.4) for p in preds}

    def arity(p):
        return 2 if p in binary else 1

    x, y = Term("X"), Term("Y")

    def ground_term():
        return Term(rng.choice(consts))

    rules: list[Rule] = []
    for _ in range(rng.randint(1, max_rules)):
        candidates = [p for p in preds if level[p] >= 1]
        if not candidates:
            break
        h = rng.choice(candidates)
        two_vars = (not nl_safe) and arity(h) == 2 and rng.random() < 0.5
        if arity(h) == 1:
            head_args: tuple[Term, ...] = (x,)
        elif two_vars:
            head_args = (x, y)
        else:
            head_args = (x, ground_term())
        head = Literal(h, head_args, polarity[h])
        head_vars = [t for t in head_args if t.is_variable]

        binders = [p for p in preds
                   if not polarity[p] and level[p] <= level[h]]
        if not binders:
            continue
        body: list[Literal] = []
        if len(head_vars) == 2:
            b2 = [p for p in binders if arity(p) == 2]
            if b2:
                body.append(Literal(rng.choice(b2), (x, y)))
            else:
                b1 = [p for p in binders if arity(p) == 1]
                if not b1:
                    continue
                body.append(Literal(rng.choice(b1), (x,)))
                body.append(Literal(rng.choice(b1), (y,)))
        else:
            b1 = [p for p in binders if arity(p) == 1]
            if b1:
                body.append(Literal(rng.choice(b1), (x,)))
            else:
                b2 = [p for p in binders if arity(p) == 2]
                if not b2:
                    continue
                body.append(Literal(rng.choice(b2), (x, ground_term())))

        for _ in range(rng.randint(0, 2)):
            negated = rng.random() < 0.4
            pool = [p for p in preds
                    if (level[p] < level[h] if negated else level[p] <= level[h])]
            if not pool:
                continue
            p = rng.choice(pool)
            # A satisfiable mention matches the predicate's polarity; an
            # occasional mismatch leaves a dead branch, which is legal.
            flag = polarity[p] if rng.random() < 0.9 else not polarity[p]
            if negated:
                flag = True
            if flag and level[p] >= level[h]:
                continue  # negative mention must stay strictly lower
            if arity(p) == 1:
                args: tuple[Term, ...] = (x,)
            elif nl_safe:
                args = (x, ground_term())
            else:
                args = rng.choice([(x, ground_term()), (x, y) if len(head_vars) == 2 else (x, ground_term())])
            body.append(Literal(p, args, flag))
        rules.append(Rule(head, tuple(body)))

    facts = set()
    for _ in range(rng.randint(1, 2 * len(consts))):
        p = rng.choice(preds)
        if arity(p) == 1:
            args: tuple[Term, ...] = (ground_term(),)
        else:
            args = (ground_term(), ground_term())
        facts.add(Literal(p, args, polarity[p]))

    qp = rng.choice(preds)
    if arity(qp) == 1:
        q_args: tuple[Term, ...] = (ground_term(),)
    else:
        q_args = (ground_term(), ground_term())
    query = Literal(qp, q_args, rng.random() < 0.4)

    return Program(frozenset(facts), tuple(rules), query)


def _mix(seed: int, i: int) -> int:
    # Stable across processes (hash() is salted).
    import hashlib
    blob = f"{seed}:{i}".encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


def random_programs(seed: int, count: int, **kwargs):
    return [random_program(random.Random(_mix(seed, i)), **kwargs) for i in range(count)]
