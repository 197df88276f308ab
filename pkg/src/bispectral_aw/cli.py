"""Command-line front end.

    bispectral-aw <construct|verify|orthogonality|algebra> --spec FILE --out DIR

Exit codes: 0 ok, 1 a verification failed, 2 bad input (including a
violated nondegeneracy condition), 3 numerical failure.  All output files
are JSON with sorted keys, so re-running with the same seed gives
identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import random
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from flint import fmpq

from .aw_core import (LambdaPoly, Parameters, aw_poly, lambda_n, make_aw_qdiff_op,
                      make_contiguous_qdiff_op, make_recurrence_op, xi)
from .bispectral_n import az_minimal, intertwine_Lf, intertwine_residual
from .bispectral_z import (an_generators, build_Bh, build_rbar_op, rbar_residual, reach_lhs,
                           reach_rhs, semigroup_generators, verify_Bh)
from .errors import BispectralError, DomainError, GenericityError, NumericalError
from .exact_arith import LaurentPoly, rat, rat_str
from .operators import ShiftOp, opn_apply, opz_apply
from .orthogonality import (MeasureSpec, QuadratureConfig, Slice, darboux_chain, divisor_identity,
                            eigenvalue_of, measure_for_spec, recover_mass, second_solutions,
                            slice_eigenvalue, verify_orthogonality)
from .wronskian_ext import ExtensionSpec, certify, p_hat, tau

__all__ = [
    "RunConfig",
    "Perturbation",
    "EXIT_OK",
    "EXIT_FAIL",
    "EXIT_INPUT",
    "EXIT_NUMERIC",
    "cmd_construct",
    "cmd_verify",
    "cmd_orthogonality",
    "cmd_algebra",
    "dumps",
    "main",
]

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
COMMANDS = ("construct", "verify", "orthogonality", "algebra")

# identity tags reported by ``verify``, with what each check does
SUITES = {
    "2.5": "three-term recurrence L_n p_n = (z + 1/z) p_n",
    "2.8": "q-difference eigen-equation B_z p_n = lambda_n p_n",
    "2.11": "contiguous relation for all four parameters",
    "3.10a": "L_hat p_hat_n = f(z) p_hat_n for the smallest admissible f",
    "3.10b": "B_hat p_hat_n = h(lambda) p_hat_n for the smallest generator h",
    "5.9": "Casoratian of an integrated column (random sequences)",
    "5.16": "lemma operators B_bar on random Laurent r, all parameters",
    "6.5c": "slice eigenfunctions u1, u2 for every admissible m",
    "6.6": "Darboux chain factorisation and product",
}
PERTURBABLE = ("2.5", "2.8", "2.11", "3.10a", "3.10b", "5.16", "6.6")


class InputError(Exception):
    pass


@dataclass(frozen=True)
class Perturbation:
    """Test hook: add ``delta`` to the shift-``shift`` coefficient of the operator under check."""

    tag: str
    shift: int = 0
    delta: fmpq = fmpq(1, 7)

    def __post_init__(self):
        if self.tag not in PERTURBABLE:
            raise InputError(f"cannot perturb {self.tag!r}; choose from {', '.join(PERTURBABLE)}")
        object.__setattr__(self, "delta", rat(self.delta))
        if self.delta == 0:
            raise InputError("perturbation must be nonzero")

    @classmethod
    def parse(cls, text: str) -> "Perturbation":
        parts = text.split(":")
        if not 1 <= len(parts) <= 3:
            raise InputError("perturbation format is TAG[:SHIFT[:DELTA]]")
        shift = int(parts[1]) if len(parts) > 1 else 0
        delta = rat(parts[2]) if len(parts) > 2 else fmpq(1, 7)
        return cls(parts[0], shift, delta)

    def apply(self, op: ShiftOp) -> ShiftOp:
        cs = dict(op.coeffs)
        cs[self.shift] = cs[self.shift] + self.delta if self.shift in cs else self.delta
        return type(op)(cs, op.q)


@dataclass(frozen=True)
class RunConfig:
    command: str
    spec_path: Path
    output_path: Path
    n_max: int = 6
    max_degree: int | None = None
    order_cap: int | None = None
    tol: float = 1e-8
    seed: int = 0
    perturb: Perturbation | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        object.__setattr__(self, "spec_path", Path(self.spec_path))
        object.__setattr__(self, "output_path", Path(self.output_path))
        for name in ("n_max", "max_degree", "order_cap"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v <= 0):
                raise InputError(f"{name} must be a positive integer")
        if not 0 < self.tol < 1:
            raise InputError("tol must lie in (0, 1)")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError("seed must be a nonnegative integer")
        if isinstance(self.perturb, str):
            object.__setattr__(self, "perturb", Perturbation.parse(self.perturb))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InputError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


# -- deterministic JSON -------------------------------------------------------

def _encode(obj, indent: int, level: int) -> str:
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        obj = obj.item()  # numpy scalars
    pad = "\n" + " " * (indent * (level + 1))
    end = "\n" + " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return "%.17g" % obj if math.isfinite(obj) else json.dumps(obj)
    if isinstance(obj, fmpq):
        return json.dumps(rat_str(obj))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [json.dumps(str(k)) + ": " + _encode(obj[k], indent, level + 1)
                 for k in sorted(obj, key=str)]
        return "{" + pad + ("," + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + pad + ("," + pad).join(_encode(x, indent, level + 1) for x in obj) + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with sorted keys and floats written with 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def _write(path: Path, obj) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


# -- loading ------------------------------------------------------------------

def _load(config: RunConfig) -> tuple[ExtensionSpec, dict]:
    try:
        raw = json.loads(config.spec_path.read_text())
    except OSError as exc:
        raise InputError(f"cannot read spec: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in spec: {exc}") from exc
    try:
        spec = ExtensionSpec.from_json(raw, n_max=max(32, config.n_max + 12))
    except (KeyError, TypeError) as exc:
        raise InputError(f"spec is missing or mistypes a field: {exc}") from exc
    certify(spec)
    return spec, raw


def _slice_of(raw: dict) -> Slice | None:
    sl = raw.get("slice")
    if sl is None:
        return None
    try:
        return Slice(int(sl["alpha"]), int(sl["l"]), int(sl.get("eps", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad slice entry: {exc}") from exc


def _default_z_degree(spec: ExtensionSpec) -> int:
    return spec.k + 2


def _default_n_degree(spec: ExtensionSpec) -> int:
    return max(1, tau(spec).tau_bar.degree + 2)


_X = LaurentPoly({1: 1, -1: 1}, "z")


def _f_of_x(f) -> LaurentPoly:
    out = LaurentPoly.const(0, "z")
    for c in reversed(list(f)):
        out = out * _X + rat(c)
    return out


def _minimal_f(spec: ExtensionSpec, max_degree: int) -> list[fmpq]:
    found = az_minimal(spec, max_degree)
    if not found:
        raise InputError(f"no admissible f up to degree {max_degree}; raise --max-degree")
    return found[min(found)]


def _generators(spec: ExtensionSpec, max_degree: int) -> dict[int, LambdaPoly]:
    gens = an_generators(spec, max_degree)
    if not gens:
        raise InputError(f"no admissible h up to degree {max_degree}; raise --max-degree")
    return {d: gens[d] for d in semigroup_generators(list(gens))}


def _sequence(fn: Callable[[int], object]) -> Callable[[int], object]:
    return lambda m: fn(m) if m >= 0 else LaurentPoly.const(0, "z")


# -- construct ----------------------------------------------------------------

def cmd_construct(config: RunConfig) -> int:
    spec, _ = _load(config)
    out = config.output_path
    p_hats = {str(n): p_hat(n, spec).to_json() for n in range(config.n_max + 1)}
    _write(out / "p_hat.json", {"spec": spec.to_json(), "p_hat": p_hats, "variable": "z"})

    zdeg = config.max_degree or _default_z_degree(spec)
    f = _minimal_f(spec, zdeg)
    Lh = intertwine_Lf(f, spec)
    _write(out / "L_hat.json", {"f": [rat_str(c) for c in f], "degree": len(f) - 1,
                                "operator": Lh.to_json()})

    ndeg = config.max_degree or _default_n_degree(spec)
    ops = []
    for d, h in sorted(_generators(spec, ndeg).items()):
        res = build_Bh(h, spec, order_cap=config.order_cap)
        ops.append({"degree": d, **res.to_json()})
    _write(out / "B_hat.json", {"generators": ops})
    summary = {"k": spec.k, "L_hat_support": Lh.support, "f_degree": len(f) - 1,
               "B_hat_orders": [o["order"] for o in ops],
               "generator_degrees": [o["degree"] for o in ops]}
    _write(out / "construct.json", summary)
    print(f"construct: f degree {len(f) - 1}, B_hat orders {summary['B_hat_orders']}")
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def _maybe(op: ShiftOp, tag: str, pert: Perturbation | None) -> ShiftOp:
    return pert.apply(op) if pert is not None and pert.tag == tag else op


def _suite_recurrence(p: Parameters, n_max: int, pert) -> bool:
    L = _maybe(make_recurrence_op(p), "2.5", pert)
    seq = _sequence(lambda m: aw_poly(m, p))
    return all(opn_apply(L, seq, n, lower=0) == _X * aw_poly(n, p) for n in range(n_max + 1))


def _suite_qdiff(p: Parameters, n_max: int, pert) -> bool:
    B = _maybe(make_aw_qdiff_op(p), "2.8", pert)
    return all(opz_apply(B, aw_poly(n, p)) == aw_poly(n, p) * lambda_n(n, p)
               for n in range(n_max + 1))


def _suite_contiguous(p: Parameters, n_max: int, pert) -> bool:
    for ell in "abcd":
        B = _maybe(make_contiguous_qdiff_op(ell, p), "2.11", pert)
        for n in range(1, n_max + 1):
            cur = aw_poly(n, p) * xi(ell, n, p)
            prev = aw_poly(n - 1, p) * xi(ell, n - 1, p)
            factor = p.q ** (1 - n) - p.abcd * p.q ** (n - 1)
            if opz_apply(B, cur - prev) != (cur + prev) * factor:
                return False
    return True


def _suite_Lhat(spec: ExtensionSpec, f, n_max: int, pert) -> tuple[bool, dict]:
    Lh = intertwine_Lf(f, spec)
    resid = intertwine_residual(Lh, f, spec).is_zero()
    Lh = _maybe(Lh, "3.10a", pert)
    fz = _f_of_x(f)
    seq = _sequence(lambda m: p_hat(m, spec))
    ok = all(opn_apply(Lh, seq, n, lower=0) == fz * p_hat(n, spec) for n in range(n_max + 1))
    return ok and resid, {"f": [rat_str(c) for c in f], "intertwining_residual_zero": resid}


def _suite_Bhat(spec: ExtensionSpec, h: LambdaPoly, n_max: int, order_cap, pert) -> tuple[bool, dict]:
    res = build_Bh(h, spec, order_cap=order_cap)
    op = _maybe(res.op, "3.10b", pert)
    ok = all(verify_Bh(op, res.h, spec, range(n_max + 1)).values())
    return ok, {"h_degree": h.degree, "order": res.order}


def _random_seq(rng: random.Random, deg: int) -> Callable[[int], fmpq]:
    cs = [fmpq(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(deg + 1)]
    return lambda n: sum((c * fmpq(n) ** i for i, c in enumerate(cs)), fmpq(0))


def _suite_reach(rng: random.Random, instances: int = 12) -> tuple[bool, dict]:
    ok = True
    for i in range(instances):
        k = 1 + i % 3
        fs = [_random_seq(rng, rng.randint(0, 3)) for _ in range(k + 2)]
        lowers = [rng.randint(-3, 3) for _ in range(k + 1)]
        moved = [x + rng.randint(1, 3) for x in lowers[:k]] + [lowers[k]]
        for n in (rng.randint(-4, 6), rng.randint(-4, 6)):
            lhs = reach_lhs(fs, lowers, n)
            if lhs != reach_rhs(fs, lowers, n) or lhs != reach_lhs(fs, moved, n):
                ok = False
    return ok, {"instances": instances, "k_range": [1, 3]}


def _suite_lemma(p: Parameters, rng: random.Random, n_max: int, pert) -> bool:
    for ell in "abcd":
        exps = sorted(rng.sample(range(-3, 4), 3))
        r = LaurentPoly({e: fmpq(rng.randint(-9, 9) or 1, rng.randint(1, 5)) for e in exps}, "t")
        B = _maybe(build_rbar_op(ell, r, p), "5.16", pert)
        if not all(rbar_residual(B, ell, r, p, n).is_zero() for n in range(n_max + 1)):
            return False
    return True


def _suite_slice(p: Parameters, sl: Slice) -> tuple[bool, dict]:
    ok = True
    for m in range(sl.alpha):
        target = slice_eigenvalue(m, sl, p)
        for u in second_solutions(m, sl, p):
            ok = ok and eigenvalue_of("a", u, p) == target
    return ok, {"alpha": sl.alpha, "l": sl.l, "eps": sl.eps}


def _suite_chain(spec: ExtensionSpec, pert) -> bool:
    chain = darboux_chain(spec)
    if pert is not None and pert.tag == "6.6":
        st = chain.steps[0]
        chain = dataclasses.replace(chain, steps=(dataclasses.replace(st, P=pert.apply(st.P)),)
                                    + chain.steps[1:])
    return chain.factorization_ok() and chain.matches_wronskian()


def cmd_verify(config: RunConfig) -> int:
    spec, raw = _load(config)
    p = spec.params
    rng = random.Random(config.seed)
    pert = config.perturb
    N = config.n_max
    rows = []

    def record(tag, passed, n_range, **detail):
        rows.append({"tag": tag, "check": SUITES[tag], "passed": passed,
                     "applicable": passed is not None, "n_range": n_range, "detail": detail})

    record("2.5", _suite_recurrence(p, N, pert), [0, N])
    record("2.8", _suite_qdiff(p, N, pert), [0, N])
    record("2.11", _suite_contiguous(p, N, pert), [1, N])
    f = _minimal_f(spec, config.max_degree or _default_z_degree(spec))
    ok, det = _suite_Lhat(spec, f, N, pert)
    record("3.10a", ok, [0, N], **det)
    gens = _generators(spec, config.max_degree or _default_n_degree(spec))
    ok, det = _suite_Bhat(spec, gens[min(gens)], N, config.order_cap, pert)
    record("3.10b", ok, [0, N], **det)
    ok, det = _suite_reach(rng)
    record("5.9", ok, [-4, 6], **det)
    record("5.16", _suite_lemma(p, rng, N, pert), [0, N])
    sl = _slice_of(raw)
    if sl is not None:
        ok, det = _suite_slice(p, sl)
        record("6.5c", ok, None, **det)
    else:
        record("6.5c", None, None, reason="spec declares no slice")
    eigen = spec.k > 0 and all(eigenvalue_of(d, phi, p) is not None for d, phi in spec.choices)
    if eigen:
        record("6.6", _suite_chain(spec, pert), None, steps=spec.k)
    else:
        record("6.6", None, None, reason="choices are not all eigenfunctions")

    failed = [r["tag"] for r in rows if r["passed"] is False]
    report = {"spec": spec.to_json(), "seed": config.seed, "checks": rows,
              "perturbation": None if pert is None else
              {"tag": pert.tag, "shift": pert.shift, "delta": rat_str(pert.delta)},
              "failed": failed, "passed": not failed}
    _write(config.output_path / "verify.json", report)
    for r in rows:
        status = "skip" if r["passed"] is None else ("PASS" if r["passed"] else "FAIL")
        print(f"{status} {r['tag']}: {r['check']}")
    return EXIT_FAIL if failed else EXIT_OK


# -- orthogonality --------------------------------------------------------------

def cmd_orthogonality(config: RunConfig) -> int:
    spec, raw = _load(config)
    quad = QuadratureConfig()
    if spec.k == 0:
        m, locs = MeasureSpec(spec.params), []
    else:
        m, locs = measure_for_spec(spec)
    masses = recover_mass(spec, m, locs, quad)
    rep = verify_orthogonality(spec, m.with_masses(masses), config.n_max, config.tol, quad)
    outside = all(abs(float(x)) > 1 for x in locs)
    report = {"spec": spec.to_json(), "measure": m.with_masses(masses).to_json(),
              "orthogonality": rep.to_json(), "quadrature_tol": quad.tol,
              "masses_outside_interval": outside, "n_max": config.n_max}
    ok = rep.passed and outside
    sl = _slice_of(raw)
    if sl is not None:
        gap = divisor_identity(sl, spec.params, quad=quad)
        report["divisor_identity"] = {"max_rel_gap": gap, "passed": gap < config.tol}
        ok = ok and gap < config.tol
    report["passed"] = ok
    _write(config.output_path / "orthogonality.json", report)
    print(f"orthogonality: max relative off-diagonal {rep.max_rel_offdiag:.3g}, "
          f"masses {[(rat_str(x), round(nu, 12)) for x, nu in masses]}")
    return EXIT_OK if ok else EXIT_FAIL


# -- algebra --------------------------------------------------------------------

def cmd_algebra(config: RunConfig) -> int:
    spec, _ = _load(config)
    zdeg = config.max_degree or _default_z_degree(spec)
    ndeg = config.max_degree or _default_n_degree(spec)
    az = az_minimal(spec, zdeg)
    an = an_generators(spec, ndeg)
    gens = semigroup_generators(list(an))
    ops = {d: build_Bh(an[d], spec, order_cap=config.order_cap).op for d in gens}
    commute = all(ops[i].compose(ops[j]) == ops[j].compose(ops[i])
                  for i in gens for j in gens if i < j)
    report = {
        "k": spec.k,
        "tau_bar_degree": tau(spec).tau_bar.degree,
        "z_algebra": {"search_degree": zdeg, "degrees": sorted(az),
                      "generators": semigroup_generators(list(az))},
        "n_algebra": {"search_degree": ndeg, "degrees": sorted(an), "generators": gens,
                      "orders": [ops[d].order for d in gens]},
        "commute": commute,
    }
    _write(config.output_path / "algebra.json", report)
    print(f"algebra: n-side generators {gens}, orders {[ops[d].order for d in gens]}")
    return EXIT_OK if commute else EXIT_FAIL


# -- entry point ----------------------------------------------------------------

_HANDLERS = {"construct": cmd_construct, "verify": cmd_verify,
             "orthogonality": cmd_orthogonality, "algebra": cmd_algebra}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bispectral-aw",
                                 description="Wronskian extensions of Askey-Wilson polynomials")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", required=True, type=Path)
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--max-degree", type=int)
    ap.add_argument("--order-cap", type=int)
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--perturb", help=argparse.SUPPRESS)
    return ap


def run(config: RunConfig) -> int:
    try:
        return _HANDLERS[config.command](config)
    except (InputError, GenericityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BispectralError as exc:
        # domain, slice and membership errors are ValueErrors: bad input
        if isinstance(exc, ValueError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        config = RunConfig(args.command, args.spec, args.out, args.n_max, args.max_degree,
                           args.order_cap, args.tol, args.seed, args.perturb)
    except (InputError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
