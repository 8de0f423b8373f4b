"""Seeded random program generators shared by the engine tests."""
import random

PREDICATES = ["p", "q", "r"]


def random_normal_program(seed, atoms=10, rules=20, constraints=True):
    """Propositional program over a0..a{atoms-1} with default negation."""
    rng = random.Random(seed)
    names = [f"a{i}" for i in range(atoms)]
    lines = []
    for _ in range(rng.randint(rules // 2, rules)):
        body = []
        for _ in range(rng.randint(0, 3)):
            literal = rng.choice(names)
            body.append(literal if rng.random() < 0.5 else f"not {literal}")
        head = "" if constraints and rng.random() < 0.1 else rng.choice(names)
        if not body:
            if not head:
                continue
            lines.append(f"{head}." if rng.random() < 0.3 else f"{head} :- not {rng.choice(names)}.")
        else:
            lines.append(f"{head} :- {', '.join(body)}.")
    return "\n".join(lines)


def random_weak_program(seed, atoms=6):
    """Choice over a few atoms with hard and soft constraints on two levels."""
    rng = random.Random(seed)
    names = [f"a{i}" for i in range(atoms)]
    lines = ["{" + "; ".join(names) + "}."]
    for _ in range(rng.randint(1, 3)):
        picked = rng.sample(names, 2)
        lines.append(f":- {rng.choice(['', 'not '])}{picked[0]}, {rng.choice(['', 'not '])}{picked[1]}.")
    for name in names:
        if rng.random() < 0.7:
            sign = rng.choice(["", "not "])
            weight = rng.randint(1, 4)
            level = rng.randint(0, 1)
            lines.append(f":~ {sign}{name}. [{weight}@{level}, {name}]")
    return "\n".join(lines)


def random_rule_program(seed):
    """Small non-ground program over d(1..3) mixing negation, choices and counts."""
    rng = random.Random(seed)
    lines = ["d(1..3).", "e(1, 2). e(2, 3). e(3, 3)."]
    for _ in range(rng.randint(3, 6)):
        rank = rng.randint(0, 2)
        head = PREDICATES[rank]
        kind = rng.random()
        if kind < 0.15:
            lines.append(f"{{{head}(X)}} :- d(X).")
            continue
        if kind < 0.25 and rank > 0:
            lower = rng.choice(PREDICATES[:rank])
            lines.append(f"{head}(X) :- d(X), #count{{Y: e(X, Y), {lower}(Y)}} >= 1.")
            continue
        if kind < 0.3:
            other = rng.choice([p for p in PREDICATES if p != head])
            lines.append(f"{head}(X); {other}(X) :- d(X), not {rng.choice(PREDICATES)}(X).")
            continue
        if kind < 0.35:
            lines.append(f":- {head}(1), {rng.choice(PREDICATES)}(2).")
            continue
        body = [rng.choice(["d(X)", "e(X, Y)", "e(Y, X)"])]
        variables = ["X", "Y"] if "Y" in body[0] else ["X"]
        for _ in range(rng.randint(0, 2)):
            literal = f"{rng.choice(PREDICATES)}({rng.choice(variables)})"
            body.append(literal if rng.random() < 0.5 else f"not {literal}")
        lines.append(f"{head}(X) :- {', '.join(body)}.")
    return "\n".join(lines)


def random_stratified_program(seed, levels=4):
    """Negation only reaches strictly lower levels; positive recursion is allowed."""
    rng = random.Random(seed)
    edges = {(rng.randint(1, 4), rng.randint(1, 4)) for _ in range(5)}
    facts = {x for x in range(1, 5) if rng.random() < 0.6}
    lines = [" ".join(f"b({x})." for x in sorted(facts)) or "b(1).", " ".join(f"e({x}, {y})." for x, y in sorted(edges))]
    for level in range(levels):
        head = f"s{level}"
        if rng.random() < 0.4:
            lines.append(f"{head}(X) :- e(Y, X), {head}(Y).")
        for _ in range(rng.randint(1, 3)):
            first = rng.choice(["b(X)", "e(X, Y)", "e(Y, X)"])
            body = [first]
            variables = ["X", "Y"] if "Y" in first else ["X"]
            for _ in range(rng.randint(0, 2)):
                var = rng.choice(variables)
                if level and rng.random() < 0.5:
                    body.append(f"not s{rng.randint(0, level - 1)}({var})")
                else:
                    body.append(f"s{rng.randint(0, level)}({var})")
            lines.append(f"{head}(X) :- {', '.join(body)}.")
    return "\n".join(lines)


def random_disjunctive_program(seed, atoms=6, rules=10):
    """Normal rules plus disjunctive heads, often closed into head cycles."""
    rng = random.Random(seed)
    names = [f"a{i}" for i in range(atoms)]
    lines = [random_normal_program(seed, atoms=atoms, rules=rules, constraints=False)]
    for _ in range(rng.randint(1, 3)):
        first, second = rng.sample(names, 2)
        body = rng.choice(["", f" :- {rng.choice(names)}", f" :- not {rng.choice(names)}"])
        lines.append(f"{first}; {second}{body}.")
        if rng.random() < 0.6:
            lines.append(f"{first} :- {second}. {second} :- {first}.")
    return "\n".join(lines)
