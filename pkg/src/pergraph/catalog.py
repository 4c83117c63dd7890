"""Built-in fundamental graphs for the analyzed crystal families."""

from __future__ import annotations

from dataclasses import dataclass

from .graph_core import Edge, FundamentalGraph, Vertex

FAMILIES = ("lattice", "star_decorated", "subdivided", "bcc", "fcc")

# Cross-edge index tables for the cubic lattices. Vertex order is fixed
# (corner vertices first, high-degree vertex last) so fiber matrices are
# byte-stable test fixtures.
_BCC_CROSS = (
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, 0, 1),
    (0, 1, 1),
    (1, 1, 1),
)
_FCC_CROSS = {
    1: ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)),
    2: ((0, 0, 0), (1, 0, 0), (0, 0, 1), (1, 0, 1)),
    3: ((0, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1)),
}


@dataclass(frozen=True)
class CrystalFamily:
    """Family name plus whichever integer parameters the family takes."""

    name: str
    d: int | None = None
    nu: int | None = None
    n: int | None = None


def _basis(d: int, j: int) -> tuple[int, ...]:
    return tuple(1 if k == j else 0 for k in range(d))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def lattice(d: int) -> FundamentalGraph:
    """d-dimensional lattice quotient: one vertex with d loop representatives."""
    _require(d >= 1, "lattice requires d >= 1")
    edges = tuple(Edge(1, 1, _basis(d, j)) for j in range(d))
    return FundamentalGraph(d, (Vertex(1),), edges)


def star_decorated(d: int, nu: int) -> FundamentalGraph:
    """Lattice vertex with loop bridges plus nu - 1 pendant spoke vertices.

    The lattice vertex is last and has degree nu - 1 + 2d; the spokes all
    carry index zero, so every bridge is a loop there.
    """
    _require(d >= 1, "star_decorated requires d >= 1")
    _require(nu >= 2, "star_decorated requires nu >= 2")
    center = nu
    vertices = tuple(Vertex(k) for k in range(1, nu + 1))
    zero = (0,) * d
    spokes = tuple(Edge(j, center, zero) for j in range(1, nu))
    loops = tuple(Edge(center, center, _basis(d, j)) for j in range(d))
    return FundamentalGraph(d, vertices, spokes + loops)


def subdivided(d: int, n: int) -> FundamentalGraph:
    """Lattice with every edge subdivided by n new vertices.

    The quotient has d*n + 1 vertices: per direction j a chain of n midpoints
    leaves the lattice vertex and re-enters it in the next cell, so only the
    final chain edge carries a nonzero index.
    """
    _require(d >= 1, "subdivided requires d >= 1")
    _require(n >= 1, "subdivided requires n >= 1")
    center = d * n + 1
    vertices = tuple(Vertex(k) for k in range(1, center + 1))
    zero = (0,) * d
    edges: list[Edge] = []
    for j in range(d):
        first = j * n + 1
        last = j * n + n
        edges.append(Edge(center, first, zero))
        for k in range(first, last):
            edges.append(Edge(k, k + 1, zero))
        edges.append(Edge(last, center, _basis(d, j)))
    return FundamentalGraph(d, vertices, tuple(edges))


def bcc() -> FundamentalGraph:
    """Body-centered cubic quotient: corner vertex 1 and center vertex 2."""
    vertices = (Vertex(1), Vertex(2))
    loops = tuple(Edge(2, 2, _basis(3, j)) for j in range(3))
    cross = tuple(Edge(1, 2, t) for t in _BCC_CROSS)
    return FundamentalGraph(3, vertices, loops + cross)


def fcc() -> FundamentalGraph:
    """Face-centered cubic quotient: three face vertices and the corner vertex 4."""
    vertices = tuple(Vertex(k) for k in range(1, 5))
    loops = tuple(Edge(4, 4, _basis(3, j)) for j in range(3))
    cross = tuple(
        Edge(s, 4, t) for s in (1, 2, 3) for t in _FCC_CROSS[s]
    )
    return FundamentalGraph(3, vertices, loops + cross)


def generate(
    family: CrystalFamily | str,
    *,
    d: int | None = None,
    nu: int | None = None,
    n: int | None = None,
) -> FundamentalGraph:
    """Construct a catalog graph by family name and parameters."""
    if isinstance(family, CrystalFamily):
        name, d, nu, n = family.name, family.d, family.nu, family.n
    else:
        name = family
    if name == "lattice":
        _require(d is not None, "lattice requires parameter d")
        return lattice(d)
    if name == "star_decorated":
        _require(d is not None and nu is not None,
                 "star_decorated requires parameters d and nu")
        return star_decorated(d, nu)
    if name == "subdivided":
        _require(d is not None and n is not None,
                 "subdivided requires parameters d and n")
        return subdivided(d, n)
    if name == "bcc":
        _require(d in (None, 3), "bcc is fixed at d = 3")
        return bcc()
    if name == "fcc":
        _require(d in (None, 3), "fcc is fixed at d = 3")
        return fcc()
    raise ValueError(f"unknown family {name!r}")
