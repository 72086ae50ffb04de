"""Independent naive evaluator used as a test oracle.

Deliberately avoids the library's TokenIndex: every node is evaluated by
scanning the raw token list, and NEAR enumerates all position pairs.
"""

from sdgdetect.query import And, Near, Node, Not, Or, Phrase, Term


def _word_ok(token: str, term: Term) -> bool:
    return token.startswith(term.word) if term.wildcard else token == term.word


def naive_positions(node: Node, tokens) -> list[int]:
    if isinstance(node, Term):
        return [i for i, t in enumerate(tokens) if _word_ok(t, node)]
    if isinstance(node, Phrase):
        out = []
        for i in range(len(tokens) - len(node.words) + 1):
            if all(_word_ok(tokens[i + k], w) for k, w in enumerate(node.words)):
                out.append(i)
        return out
    if isinstance(node, Or):
        merged = set()
        for c in node.children:
            merged.update(naive_positions(c, tokens))
        return sorted(merged)
    raise AssertionError(f"not position-bearing: {node!r}")


def naive_eval(node: Node, tokens) -> bool:
    if isinstance(node, (Term, Phrase)):
        return bool(naive_positions(node, tokens))
    if isinstance(node, Or):
        return any(naive_eval(c, tokens) for c in node.children)
    if isinstance(node, And):
        return all(naive_eval(c, tokens) for c in node.children)
    if isinstance(node, Not):
        return not naive_eval(node.child, tokens)
    if isinstance(node, Near):
        left = naive_positions(node.left, tokens)
        right = naive_positions(node.right, tokens)
        return any(abs(p - q) <= node.n for p in left for q in right)
    raise AssertionError(f"unknown node: {node!r}")


VOCAB = ["apple", "app", "berry", "cedar", "delta", "echo", "fig", "grape"]


def random_positional(rng, depth: int) -> Node:
    roll = rng.random()
    if roll < 0.45 or depth <= 0:
        word = rng.choice(VOCAB)
        if rng.random() < 0.3:
            cut = rng.randrange(1, len(word) + 1)
            return Term(word[:cut], wildcard=True)
        return Term(word)
    if roll < 0.7:
        n_words = rng.randrange(2, 4)
        return Phrase(tuple(Term(rng.choice(VOCAB)) for _ in range(n_words)))
    return Or(tuple(random_positional(rng, depth - 1) for _ in range(rng.randrange(2, 4))))


def random_query(rng, depth: int) -> Node:
    if depth <= 0:
        return random_positional(rng, 0)
    roll = rng.random()
    if roll < 0.25:
        return random_positional(rng, depth)
    if roll < 0.45:
        return Or(tuple(random_query(rng, depth - 1) for _ in range(rng.randrange(2, 4))))
    if roll < 0.65:
        return And(tuple(random_query(rng, depth - 1) for _ in range(rng.randrange(2, 4))))
    if roll < 0.8:
        return Not(random_query(rng, depth - 1))
    return Near(
        random_positional(rng, depth - 1),
        random_positional(rng, depth - 1),
        rng.randrange(0, 6),
    )


def random_tokens(rng, max_len: int = 50) -> list[str]:
    return [rng.choice(VOCAB) for _ in range(rng.randrange(0, max_len + 1))]
