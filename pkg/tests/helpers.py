"""Shared generators and model doubles for the test suite."""

from __future__ import annotations

from itertools import product

import numpy as np

from amrkit.graph import AmrGraph, Edge, Node
from amrkit.seqmodel import BOS, EOS, SeqModel, ToyCondModel

CONCEPTS = (
    "want-01",
    "go-02",
    "see-01",
    "say-01",
    "possible-01",
    "run-02",
    "boy",
    "girl",
    "dog",
    "cat",
    "city",
    "thing",
)
RELATIONS = (":ARG0", ":ARG1", ":ARG2", ":mod", ":op1", ":op2", ":time", ":location", ":poss")
CONSTANT_LITERALS = ("-", "+", "1", "2", "imperative", '"New York"', '"a b"')

TOY_VOCAB = (BOS, EOS, "a", "b", "c")


def random_graph(
    rng: np.random.RandomState,
    max_var_nodes: int = 8,
    max_constants: int = 3,
    max_reentrancies: int = 2,
    var_prefix: str = "x",
) -> AmrGraph:
    """A random valid graph: a tree over variable nodes plus a few re-entrant
    edges and constant attributes, edge order shuffled."""
    n = int(rng.randint(1, max_var_nodes + 1))
    var_ids = [f"{var_prefix}{i}" for i in range(n)]
    nodes = [Node(v, CONCEPTS[rng.randint(len(CONCEPTS))]) for v in var_ids]
    edges = [
        Edge(var_ids[int(rng.randint(0, i))], RELATIONS[rng.randint(len(RELATIONS))], var_ids[i])
        for i in range(1, n)
    ]
    if n > 1:
        for _ in range(int(rng.randint(0, max_reentrancies + 1))):
            edges.append(
                Edge(
                    var_ids[int(rng.randint(0, n))],
                    RELATIONS[rng.randint(len(RELATIONS))],
                    var_ids[int(rng.randint(0, n))],
                )
            )
    const_nodes: dict[str, Node] = {}
    for _ in range(int(rng.randint(0, max_constants + 1))):
        lit = CONSTANT_LITERALS[rng.randint(len(CONSTANT_LITERALS))]
        if lit not in const_nodes:
            const_nodes[lit] = Node(lit, lit, constant=True)
        edges.append(
            Edge(var_ids[int(rng.randint(0, n))], RELATIONS[rng.randint(len(RELATIONS))], lit)
        )
    rng.shuffle(edges)
    g = AmrGraph(tuple(nodes) + tuple(const_nodes.values()), tuple(edges), var_ids[0])
    return g.check()


def rename_vars(g: AmrGraph, prefix: str = "z") -> AmrGraph:
    """Same graph with all variable names replaced; constants untouched."""
    mapping = {n.id: f"{prefix}{i}" for i, n in enumerate(g.var_nodes())}
    nodes = tuple(Node(mapping.get(n.id, n.id), n.concept, n.constant) for n in g.nodes)
    edges = tuple(
        Edge(mapping.get(e.src, e.src), e.label, mapping.get(e.tgt, e.tgt)) for e in g.edges
    )
    return AmrGraph(nodes, edges, mapping[g.root], dict(g.metadata)).check()


def random_toy_model(
    seed: int,
    src: list[str],
    vocab: tuple[str, ...] = TOY_VOCAB,
    order: int = 2,
    alpha: float = 0.1,
    scale: float = 5.0,
) -> ToyCondModel:
    """ToyCondModel with random counts for every context reachable from
    ``src``, giving an arbitrary but deterministic conditional distribution."""
    model = ToyCondModel(vocab, order=order, alpha=alpha)
    rng = np.random.RandomState(seed)
    bucket = model.bucket(src)
    contexts = [()] if order == 1 else list(product(range(len(vocab)), repeat=order - 1))
    for ctx in contexts:
        counts = rng.gamma(0.5, scale, size=len(vocab))
        counts[model.index(BOS)] = 0.0
        model.counts[(bucket, tuple(ctx))] = counts
    return model


class ScriptedModel(SeqModel):
    """Distribution depends only on the prefix length: dists[t] at step t,
    the last entry repeating beyond the script."""

    def __init__(self, vocab, dists):
        super().__init__(vocab)
        self.dists = [np.asarray(d, dtype=float) for d in dists]

    def next_dist(self, prefix, src):
        return self.dists[min(len(prefix), len(self.dists) - 1)]


def one_hot(vocab: tuple[str, ...], token: str) -> np.ndarray:
    vec = np.zeros(len(vocab))
    vec[vocab.index(token)] = 1.0
    return vec


def deterministic_model(vocab: tuple[str, ...], tokens: list[str]) -> ScriptedModel:
    """Puts probability one on tokens[t] at step t, then EOS forever."""
    dists = [one_hot(vocab, t) for t in tokens] + [one_hot(vocab, EOS)]
    return ScriptedModel(vocab, dists)
