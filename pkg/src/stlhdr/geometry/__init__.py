from .ellipse import (
    DomainInvariantError,
    EllipseArcs,
    EllipseRoots,
    active_arcs_union,
    arcs_from_candidates,
    ellipse_halfspace_roots,
    points_on_ellipse,
)
from .polytope import (
    GeometryError,
    Halfspace,
    Polytope,
    UnionOfPolytopes,
    box,
    lift_polytope,
    lift_predicate,
    midpoint_constraint,
)
from .reach_avoid import (
    EnumerationCapError,
    Goal,
    ReachAvoidDomains,
    StlDelegation,
    build_reach_avoid_domains,
    failure_formula,
    midpoint_lift,
    polytope_formula,
    reach_avoid_formula,
)

__all__ = [
    "DomainInvariantError",
    "EllipseArcs",
    "EllipseRoots",
    "EnumerationCapError",
    "GeometryError",
    "Goal",
    "Halfspace",
    "Polytope",
    "ReachAvoidDomains",
    "StlDelegation",
    "UnionOfPolytopes",
    "active_arcs_union",
    "arcs_from_candidates",
    "box",
    "build_reach_avoid_domains",
    "ellipse_halfspace_roots",
    "failure_formula",
    "lift_polytope",
    "lift_predicate",
    "midpoint_constraint",
    "midpoint_lift",
    "points_on_ellipse",
    "polytope_formula",
    "reach_avoid_formula",
]
