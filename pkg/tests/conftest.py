from __future__ import annotations

import random
from fractions import Fraction

import pytest
from flint import fmpq
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from bispectral_aw.aw_core import LambdaPoly, Parameters, random_parameters
from bispectral_aw.exact_arith import LaurentPoly, RatFunc
from bispectral_aw.wronskian_ext import ExtensionSpec

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def rationals(max_num: int = 20, max_den: int = 9, nonzero: bool = False):
    s = st.fractions(min_value=-max_num, max_value=max_num, max_denominator=max_den)
    if nonzero:
        s = s.filter(lambda x: x != 0)
    return s.map(lambda f: fmpq(f.numerator, f.denominator))


def laurent_polys(var: str = "t", lo: int = -3, hi: int = 3, nonzero: bool = False):
    terms = st.dictionaries(st.integers(lo, hi), rationals(), max_size=4)
    if nonzero:
        terms = terms.filter(lambda d: any(v != 0 for v in d.values()))
    return terms.map(lambda d: LaurentPoly(d, var))


def rat_funcs(var: str = "t"):
    return st.builds(lambda n, d: RatFunc(n, d), laurent_polys(var),
                     laurent_polys(var, 0, 2, nonzero=True))


def draw_params(seed: int) -> Parameters:
    return random_parameters(random.Random(seed))


def random_phi(rng: random.Random, deg: int) -> LambdaPoly:
    cs = [fmpq(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(deg)]
    return LambdaPoly(cs + [fmpq(rng.choice([1, -1, 2, 3]), rng.randint(1, 3))], 0)


def random_spec(seed: int, deltas: str, max_deg: int = 2, tries: int = 40) -> ExtensionSpec:
    """A certified extension with random phi of degree <= max_deg."""
    from bispectral_aw.errors import GenericityError
    from bispectral_aw.wronskian_ext import certify
    rng = random.Random(seed)
    for _ in range(tries):
        p = random_parameters(rng)
        spec = ExtensionSpec(p, tuple((d, random_phi(rng, rng.randint(0, max_deg))) for d in deltas))
        try:
            certify(spec, 14)
        except GenericityError:
            continue
        return spec
    raise RuntimeError("no generic draw found")


@pytest.fixture(scope="session")
def example_params() -> Parameters:
    # q = 1/4, a = 1/8, b = 1/3, c = 1/5, d = 1/2
    return Parameters(fmpq(1, 4), fmpq(1, 8), fmpq(1, 3), fmpq(1, 5), fmpq(1, 2))


@pytest.fixture(scope="session")
def generic_params() -> Parameters:
    return draw_params(11)


@pytest.fixture(scope="session")
def one_mass_spec():
    from bispectral_aw.orthogonality import one_mass_example
    return one_mass_example()


def frac(x) -> Fraction:
    x = fmpq(x) if not isinstance(x, fmpq) else x
    return Fraction(int(x.p), int(x.q))
