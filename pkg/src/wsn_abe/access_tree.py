"""Threshold-gate access trees with per-node polynomials (key-policy ABE).

Nodes are addressed by their path from the root: a tuple of 1-based child
indices, the root being ``()``. The same path doubles as ``index(x)`` for the
last element, so index 0 never occurs.

Reconstruction works in the exponent: leaf inputs are curve points
``q_leaf(0)*G + B`` and Lagrange coefficients recombine them to ``y*G + B``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from . import ecc
from .ecc import CurveParams, Point
from .errors import NonInvertibleDifference, UnknownAttribute

Path = tuple


@dataclass(frozen=True)
class Leaf:
    attr: str


@dataclass(frozen=True)
class Gate:
    k: int
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("gate needs at least one child")
        if not 1 <= self.k <= len(self.children):
            raise ValueError(f"threshold {self.k} outside [1, {len(self.children)}]")


Node = Union[Leaf, Gate]


@dataclass(frozen=True)
class AttributeKey:
    secret: int  # t_i
    public: Point  # T_i = t_i * G


AttributeMaster = Mapping[str, AttributeKey]


@dataclass(frozen=True)
class PolyAssignment:
    tree: Node
    coeffs: dict  # path -> tuple of coefficients, constant term first
    n: int

    def constant(self, path: Path) -> int:
        return self.coeffs[path][0]


# -- construction / serialization ------------------------------------------

def threshold(k: int, *children: Node) -> Gate:
    return Gate(k, tuple(children))


def tree_from_obj(obj) -> Node:
    if "attr" in obj:
        return Leaf(str(obj["attr"]))
    return Gate(int(obj["k"]), tuple(tree_from_obj(c) for c in obj["children"]))


def tree_to_obj(node: Node) -> dict:
    if isinstance(node, Leaf):
        return {"attr": node.attr}
    return {"k": node.k, "children": [tree_to_obj(c) for c in node.children]}


def tree_from_json(text: str) -> Node:
    return tree_from_obj(json.loads(text))


def tree_to_json(node: Node) -> str:
    return json.dumps(tree_to_obj(node), separators=(",", ":"))


def iter_nodes(node: Node, path: Path = ()) -> Iterator[tuple[Path, Node]]:
    yield path, node
    if isinstance(node, Gate):
        for i, child in enumerate(node.children, 1):
            yield from iter_nodes(child, path + (i,))


def leaves(node: Node) -> list[tuple[Path, Leaf]]:
    return [(p, nd) for p, nd in iter_nodes(node) if isinstance(nd, Leaf)]


def tree_attributes(node: Node) -> set[str]:
    return {leaf.attr for _, leaf in leaves(node)}


def check_universe(node: Node, universe) -> None:
    unknown = tree_attributes(node) - set(universe)
    if unknown:
        raise UnknownAttribute(f"attributes outside the universe: {sorted(unknown)}")


# -- secret sharing ----------------------------------------------------------

def eval_poly(coeffs, x: int, n: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % n
    return acc


def assign_polynomials(tree: Node, y: int, n: int, rng) -> PolyAssignment:
    """Top-down: degree k-1 per gate, constant term inherited from the parent.

    Random coefficients are drawn from ``rng.randrange(n)`` in pre-order.
    """
    coeffs = {}

    def visit(node: Node, path: Path, secret: int) -> None:
        if isinstance(node, Leaf):
            coeffs[path] = (secret % n,)
            return
        poly = (secret % n,) + tuple(rng.randrange(n) for _ in range(node.k - 1))
        coeffs[path] = poly
        for i, child in enumerate(node.children, 1):
            visit(child, path + (i,), eval_poly(poly, i, n))

    visit(tree, (), y)
    return PolyAssignment(tree, coeffs, n)


def leaf_keys(assignment: PolyAssignment, master: AttributeMaster) -> dict:
    """Per-leaf scalars ``K = q_leaf(0) - t_attr (mod n)``."""
    n = assignment.n
    out = {}
    for path, leaf in leaves(assignment.tree):
        if leaf.attr not in master:
            raise UnknownAttribute(leaf.attr)
        out[path] = (assignment.constant(path) - master[leaf.attr].secret) % n
    return out


def lagrange_coeff(i: int, S, n: int) -> int:
    """Delta_{i,S}(0) = prod_{j in S, j != i} (0 - j) / (i - j) mod n."""
    num, den = 1, 1
    for j in S:
        if j == i:
            continue
        num = num * (-j) % n
        den = den * (i - j) % n
    if den == 0:
        raise NonInvertibleDifference(f"index {i} collides with another index mod {n}")
    return num * pow(den, -1, n) % n


# -- policy evaluation ---------------------------------------------------------

def satisfies(tree: Node, attrs) -> bool:
    if isinstance(tree, Leaf):
        return tree.attr in attrs
    return sum(satisfies(c, attrs) for c in tree.children) >= tree.k


def access_reconstruct(tree: Node, leaf_inputs: Mapping, attrs,
                       params: CurveParams) -> Point | None:
    """Bottom-up Lagrange recombination of leaf points; ``None`` when unsatisfied.

    When more than ``k`` children are satisfied the lowest-indexed ``k`` are used.
    """

    def visit(node: Node, path: Path) -> Point | None:
        if isinstance(node, Leaf):
            if node.attr in attrs and path in leaf_inputs:
                return leaf_inputs[path]
            return None
        shares = []
        for i, child in enumerate(node.children, 1):
            value = visit(child, path + (i,))
            if value is not None:
                shares.append((i, value))
                if len(shares) == node.k:
                    break
        if len(shares) < node.k:
            return None
        S = [i for i, _ in shares]
        acc = ecc.INFINITY
        for i, value in shares:
            acc = ecc.point_add(acc, ecc.scalar_mul(lagrange_coeff(i, S, params.n), value, params), params)
        return acc

    return visit(tree, ())
