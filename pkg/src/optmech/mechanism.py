"""From solved structure parameters to an explicit menu and its revenue.

The menu is the mechanism: the buyer picks the utility-maximizing entry
(or nothing).  Region areas under the uniform density give the revenue
exactly; no quadrature is involved anywhere.
"""

from __future__ import annotations

import math

from .geometry import best_response_regions
from .measures import MuBar
from .types import (
    NULL_ITEM,
    MenuItem,
    Mechanism,
    Rectangle,
    SolveParams,
    StructureKind,
)

Menu = tuple[MenuItem, ...]


class IncompleteParams(ValueError):
    """The structure parameters lack a field the requested kind needs."""


def _require(params: SolveParams | None, kind: StructureKind, *names: str) -> list[float]:
    if params is None:
        raise IncompleteParams(f"kind {kind.value} requires parameters {names}")
    out = []
    for name in names:
        v = getattr(params, name)
        if v is None:
            raise IncompleteParams(f"kind {kind.value} requires parameter {name!r}")
        out.append(v)
    return out


def menu_from_structure(kind: StructureKind, params: SolveParams | None, rect: Rectangle) -> Menu:
    """Explicit menu for a solved structure.

    Partial-lottery prices come from utility continuity across the
    exclusion boundary (t = c2 + p_a1 + a1 c1 and its mirror); the
    bundle price is c1 + c2 + p except for kinds D/G, where continuity
    across the vertical boundary z1 = c1 + p forces
    t_bundle = t_a1 + (1 - a1)(c1 + p).
    """
    c1, c2 = rect.c1, rect.c2
    K = StructureKind
    if kind is K.A:
        p_a1, p_a2, a1, a2, p = _require(params, kind, "p_a1", "p_a2", "a1", "a2", "p")
        return (
            NULL_ITEM,
            MenuItem(a1, 1.0, c2 + p_a1 + a1 * c1),
            MenuItem(1.0, a2, c1 + p_a2 + a2 * c2),
            MenuItem(1.0, 1.0, c1 + c2 + p),
        )
    if kind is K.B:
        p_a1, a1, p = _require(params, kind, "p_a1", "a1", "p")
        return (
            NULL_ITEM,
            MenuItem(a1, 1.0, c2 + p_a1 + a1 * c1),
            MenuItem(1.0, 1.0, c1 + c2 + p),
        )
    if kind is K.F:
        p_a2, a2, p = _require(params, kind, "p_a2", "a2", "p")
        return (
            NULL_ITEM,
            MenuItem(1.0, a2, c1 + p_a2 + a2 * c2),
            MenuItem(1.0, 1.0, c1 + c2 + p),
        )
    if kind is K.C:
        (p,) = _require(params, kind, "p")
        return (NULL_ITEM, MenuItem(1.0, 1.0, c1 + c2 + p))
    if kind is K.D:
        p_a1, a1, p = _require(params, kind, "p_a1", "a1", "p")
        t_a1 = c2 + p_a1 + a1 * c1
        return (
            NULL_ITEM,
            MenuItem(a1, 1.0, t_a1),
            MenuItem(1.0, 1.0, t_a1 + (1.0 - a1) * (c1 + p)),
        )
    if kind is K.G:
        p_a2, a2, p = _require(params, kind, "p_a2", "a2", "p")
        t_a2 = c1 + p_a2 + a2 * c2
        return (
            NULL_ITEM,
            MenuItem(1.0, a2, t_a2),
            MenuItem(1.0, 1.0, t_a2 + (1.0 - a2) * (c2 + p)),
        )
    if kind is K.E:
        return (
            MenuItem(0.0, 1.0, c2),
            MenuItem(1.0, 1.0, c2 + 0.5 * (c1 + rect.b1)),
        )
    if kind is K.H:
        return (
            MenuItem(1.0, 0.0, c1),
            MenuItem(1.0, 1.0, c1 + 0.5 * (c2 + rect.b2)),
        )
    raise IncompleteParams(f"unknown structure kind {kind!r}")


def utility(menu: Menu, z: tuple[float, float]) -> tuple[float, MenuItem]:
    """Buyer's value at type z and the entry achieving it.

    The outside option (0 at the null lottery) is always available; exact
    ties are broken toward the higher price, matching the closed-region
    convention used for the best-response polygons.
    """
    best_u = 0.0
    best_item = NULL_ITEM
    for item in menu:
        u = item.utility(z[0], z[1])
        if u > best_u or (u == best_u and item.t > best_item.t):
            best_u = u
            best_item = item
    return best_u, best_item


def expected_revenue(menu: Menu, rect: Rectangle) -> float:
    """Expected payment under the uniform density, from exact region areas."""
    regions = best_response_regions(rect, menu)
    total = 0.0
    for item, region in zip(menu, regions):
        if item.t != 0.0:
            total += item.t * region.area()
    return total / rect.area


def primal_objective(menu: Menu, rect: Rectangle) -> float:
    """Integral of the buyer's utility against the transformed measure.

    The corner atom counts the utility of the cheapest type once more than
    the integration by parts produces, so that term is subtracted; the
    result equals the expected revenue for every menu, which the invariant
    tests verify independently.
    """
    mu = MuBar(rect)
    regions = best_response_regions(rect, menu)
    total = 0.0
    for item, region in zip(menu, regions):
        if region.is_empty:
            continue
        mass, m1, m2 = mu.moments(region)
        total += item.q1 * m1 + item.q2 * m2 - item.t * mass
    corner_u, _ = utility(menu, (rect.c1, rect.c2))
    return total - corner_u


def revenue_monotonicity_check(menu: Menu, rect: Rectangle, n: int) -> bool:
    """True iff componentwise-larger types never pay strictly less.

    Payments are sampled on an n x n grid; monotonicity along both grid
    axes is equivalent to monotonicity over all comparable grid pairs.
    Choices within a few ulps of the maximum utility resolve toward the
    higher price, so grid points sitting on an indifference line cannot
    register rounding noise as a violation.
    """
    if n < 2:
        raise ValueError(f"grid size must be at least 2, got {n}")
    tol = 1e-9
    pay = [[0.0] * n for _ in range(n)]
    for i in range(n):
        z1 = rect.c1 + rect.b1 * i / (n - 1)
        for j in range(n):
            z2 = rect.c2 + rect.b2 * j / (n - 1)
            tie_eps = 1e-12 * (1.0 + abs(z1) + abs(z2))
            best_u = max(0.0, max(item.utility(z1, z2) for item in menu))
            near_best = [
                item.t for item in menu if item.utility(z1, z2) >= best_u - tie_eps
            ]
            pay[i][j] = max(near_best, default=0.0)
    for i in range(n):
        for j in range(n):
            if i + 1 < n and pay[i + 1][j] < pay[i][j] - tol:
                return False
            if j + 1 < n and pay[i][j + 1] < pay[i][j] - tol:
                return False
    return True


def build_mechanism(kind: StructureKind, params: SolveParams | None, rect: Rectangle) -> Mechanism:
    """Assemble the full record: menu from the structure, revenue from the menu."""
    menu = menu_from_structure(kind, params, rect)
    return Mechanism(kind=kind, params=params, menu=menu, revenue=expected_revenue(menu, rect))
