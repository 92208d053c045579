"""Contact reduction toolkit: exact polynomial forms, moment maps, reduction checks."""
from .actions import LinearAction, moment_map, torus_action
from .contact import contact_check, reeb_field
from .forms import Poly1Form, Poly2Form, PolyMap, eval_1form, exterior_derivative
from .lie import LieAlgebraData, load_catalog
from .manifold import EmbeddedManifold, tangent_frame
from .scenarios import Scenario, load_scenario

__all__ = [
    "EmbeddedManifold", "LieAlgebraData", "LinearAction", "Poly1Form", "Poly2Form", "PolyMap",
    "Scenario", "contact_check", "eval_1form", "exterior_derivative", "load_catalog",
    "load_scenario", "moment_map", "reeb_field", "tangent_frame", "torus_action",
]
