import json

from reinhardt.cli import bundled_names, bundled_path
from reinhardt.convexlog import model_from_json

GOLDEN_NAMES = ["coeure_loeb", "model4", "model5", "model6", "parabolic_k1", "parabolic_k2", "parabolic_k3",
                "bounded_origin"]


def bundled(name: str):
    with open(bundled_path(name)) as fh:
        return model_from_json(json.load(fh))


def all_bundled():
    return {name: bundled(name) for name in bundled_names()}


def random_unimodular(rng, bound=3):
    from reinhardt.intmat import Mat2Z

    while True:
        a, b, c, d = (int(x) for x in rng.integers(-bound, bound + 1, 4))
        A = Mat2Z(a, b, c, d)
        if A.unimodular:
            return A


def random_equivalences(model, rng, count=20, bound=3):
    """``count`` random monomial changes of coordinates admissible for ``model``, with their images.

    Maps that do not extend across an axis met by the domain are rejected and
    redrawn; for domains meeting both axes only coordinate swaps survive.
    """
    from fractions import Fraction

    from reinhardt.convexlog import apply_monomial
    from reinhardt.errors import ReinhardtError

    out = []
    while len(out) < count:
        A = random_unimodular(rng, bound)
        shift = (Fraction(int(rng.integers(-6, 7)), 4), Fraction(int(rng.integers(-6, 7)), 4))
        try:
            image = apply_monomial(model, A, shift)
        except ReinhardtError:
            continue
        out.append((A, shift, image))
    return out
