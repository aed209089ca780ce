"""Command-line front end: JSON instance files in, JSON results out.

Complex numbers are encoded as ``[re, im]`` pairs and matrices as row-major
nested arrays.  Exit codes: 0 ok, 2 bad input, 3 numerical failure,
4 membership failure, 5 non-generic target, 6 quotient-range failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import enum
import json
import math
import sys

import numpy as np

from .errors import (
    InputError,
    MembershipFailure,
    NotGeneric,
    NumericalError,
    QuotientRangeFailure,
)
from .mu import mu_eval
from .pick import (
    LIFT_RTOL,
    PSD_TOL,
    PickDataset,
    QuotientMap,
    lift,
    lift_report,
    necessary_report,
    synthesize_instance,
)
from .quotient import (
    QuotientPoint,
    genericity,
    membership_char1,
    membership_char2,
    membership_reference,
    pi_n,
    realize,
)
from .verdict import DEFAULT_MARGIN

SCHEMA_VERSION = "1"
PAYLOAD_KINDS = ("matrix", "quotient_point", "dataset", "lift_input")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_MEMBERSHIP, EXIT_GENERICITY, EXIT_RANGE = 0, 2, 3, 4, 5, 6


# -- encoding -----------------------------------------------------------------


def to_json(obj):
    """Recursively convert results into JSON-ready values (non-finite floats become null)."""
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_json(obj.real), to_json(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [to_json(v) for v in obj]
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_json(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(v) for v in obj]
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(to_json(obj), sort_keys=True, allow_nan=False, indent=2)


def _cx(v) -> complex:
    if not (isinstance(v, (list, tuple)) and len(v) == 2):
        raise InputError(f"complex numbers must be [re, im] pairs, got {v!r}")
    re, im = v
    if isinstance(re, bool) or isinstance(im, bool) or not all(isinstance(t, (int, float)) for t in (re, im)):
        raise InputError(f"complex parts must be numbers, got {v!r}")
    return complex(re, im)


def decode_vector(v) -> np.ndarray:
    if not isinstance(v, list):
        raise InputError("expected an array of complex numbers")
    return np.array([_cx(e) for e in v], dtype=complex)


def decode_matrix(m) -> np.ndarray:
    if not isinstance(m, list) or not m:
        raise InputError("expected a non-empty array of rows")
    rows = [decode_vector(r) for r in m]
    if any(len(r) != len(rows) for r in rows):
        raise InputError("matrix must be square")
    return np.stack(rows)


def decode_point(p) -> QuotientPoint:
    if not isinstance(p, dict) or set(p) != {"x", "y"}:
        raise InputError("quotient_point needs exactly the keys x and y")
    return QuotientPoint.of(decode_vector(p["x"]), decode_vector(p["y"]))


def decode_dataset(d) -> PickDataset:
    if not isinstance(d, dict) or set(d) != {"nodes", "targets"}:
        raise InputError("dataset needs exactly the keys nodes and targets")
    if not isinstance(d["targets"], list):
        raise InputError("targets must be an array of matrices")
    return PickDataset.build(decode_vector(d["nodes"]), [decode_matrix(t) for t in d["targets"]])


def decode_map(c) -> QuotientMap:
    if not isinstance(c, dict) or set(c) != {"x", "y"}:
        raise InputError("f_coefficients needs exactly the keys x and y")
    if not (isinstance(c["x"], list) and isinstance(c["y"], list)) or not c["x"]:
        raise InputError("f_coefficients x and y must be arrays of coefficient rows")
    rows = [decode_vector(r) for r in c["x"] + c["y"]]
    width = max(1, max(len(r) for r in rows))
    C = np.array([np.pad(r, (0, width - len(r))) for r in rows], dtype=complex)
    nx = len(c["x"])
    return QuotientMap(C[:nx], C[nx:])


def encode_dataset(ds: PickDataset) -> dict:
    return {"nodes": ds.nodes, "targets": list(ds.targets)}


def instance(n: int, kind: str, body) -> dict:
    return {"schema_version": SCHEMA_VERSION, "n": n, "payload": {kind: body}}


def load_instance(path: str) -> tuple[int, str, object]:
    """Read and validate an instance file; returns (n, payload kind, decoded payload)."""
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError("instance file must be a JSON object")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"schema_version must be {SCHEMA_VERSION!r}")
    n = doc.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError("n must be a positive integer")
    payload = doc.get("payload")
    if not isinstance(payload, dict) or len(payload) != 1 or next(iter(payload)) not in PAYLOAD_KINDS:
        raise InputError(f"payload must be an object with exactly one of {', '.join(PAYLOAD_KINDS)}")
    kind, body = next(iter(payload.items()))
    if kind == "matrix":
        value = decode_matrix(body)
        size = value.shape[0]
    elif kind == "quotient_point":
        value = decode_point(body)
        size = value.n
    elif kind == "dataset":
        value = decode_dataset(body)
        size = value.n
    else:
        if not isinstance(body, dict) or set(body) != {"dataset", "f_coefficients"}:
            raise InputError("lift_input needs exactly the keys dataset and f_coefficients")
        value = (decode_dataset(body["dataset"]), decode_map(body["f_coefficients"]))
        size = value[0].n
    if size != n:
        raise InputError(f"declared n={n} but the payload has size {size}")
    return n, kind, value


def _expect(kind: str, wanted: str):
    if kind != wanted:
        raise InputError(f"this command needs a {wanted} payload, got {kind}")


# -- commands -----------------------------------------------------------------


def cmd_mu(args) -> dict:
    _, kind, A = load_instance(args.input)
    _expect(kind, "matrix")
    res = mu_eval(A, tol=args.tol)
    witness = None if res.witness is None else {"z": res.witness[0], "w": res.witness[1]}
    return {"value": res.value, "lower": res.lower, "upper": res.upper, "witness": witness,
            "iterations": res.iterations, "tol": args.tol}


def cmd_member(args) -> dict:
    _, kind, q = load_instance(args.input)
    _expect(kind, "quotient_point")
    oracles = {
        "char1": lambda: membership_char1(q, args.margin),
        "char2": lambda: membership_char2(q, args.xi_samples, args.margin),
        "reference": lambda: membership_reference(q, args.margin),
    }
    if args.oracle != "all":
        return {"oracle": args.oracle, "result": oracles[args.oracle](), "margin": args.margin}
    names = ["char1", "reference"] + (["char2"] if q.n >= 3 else [])
    results = {name: oracles[name]() for name in names}
    agree = len({v.verdict for v in results.values()}) == 1
    return {"oracle": "all", "results": results, "agreement": agree, "margin": args.margin}


def cmd_project(args) -> dict:
    _, kind, A = load_instance(args.input)
    _expect(kind, "matrix")
    if A.shape[0] < 2:
        raise InputError("projection needs n >= 2")
    q = pi_n(A)
    return {"quotient_point": {"x": q.x, "y": q.y}, "genericity": genericity(A)}


def cmd_realize(args) -> dict:
    _, kind, q = load_instance(args.input)
    _expect(kind, "quotient_point")
    B = realize(q)
    return {"matrix": B, "residual": pi_n(B).distance(q)}


def cmd_pick(args) -> dict:
    _, kind, ds = load_instance(args.input)
    _expect(kind, "dataset")
    rep = necessary_report(ds, z_samples=args.z_samples, tol=args.tol)
    return {
        "verdict": rep.verdict,
        "min_eig": rep.min_eig,
        "worst_z": rep.worst_z,
        "samples": [{"z": z, "min_eig": lam} for z, lam in rep.samples],
        "tol": rep.tol,
    }


def cmd_lift(args) -> dict:
    _, kind, (ds, f) = load_instance(args.input)
    _expect(kind, "lift_input")
    art = lift(ds, f, tol=args.tol)
    rep = lift_report(art, grid=args.grid, tol=args.mu_tol)
    return {
        "node_residuals": art.node_residuals,
        "grid": rep["grid"],
        "mu_max": rep["mu_max"],
        "mu_max_upper": rep["mu_max_upper"],
        "argmax_zeta": rep["argmax_zeta"],
        "artifacts": {
            "psi_poly": list(art.psi_poly.coeffs),
            "gammas": art.gammas,
            "logs": art.logs,
            "branch": art.branch,
        },
    }


def cmd_synth(args) -> dict:
    if args.n < 2 or args.M < 1:
        raise InputError("synth needs n >= 2 and M >= 1")
    ds, f = synthesize_instance(args.n, args.M, seed=args.seed)
    coeffs = {"x": list(f.x_coeffs), "y": list(f.y_coeffs)}
    return instance(args.n, "lift_input", {"dataset": encode_dataset(ds), "f_coefficients": coeffs})


# -- entry point --------------------------------------------------------------


def _positive_float(text: str) -> float:
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _nonnegative_float(text: str) -> float:
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="muquotient", description="mu-synthesis quotient toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("input", help="instance file, or - for standard input")
        return p

    p = with_input("mu", "structured singular value of a matrix")
    p.add_argument("--tol", type=_positive_float, default=1e-9, help="relative bracket width (default 1e-9)")
    p.set_defaults(func=cmd_mu)

    p = with_input("member", "membership of a quotient point")
    p.add_argument("--oracle", choices=("char1", "char2", "reference", "all"), default="char1")
    p.add_argument("--margin", type=_nonnegative_float, default=DEFAULT_MARGIN,
                   help=f"Boundary band half-width (default {DEFAULT_MARGIN:g})")
    p.add_argument("--xi-samples", type=_positive_int, default=64, help="boundary samples for char2 (default 64)")
    p.set_defaults(func=cmd_member)

    p = with_input("project", "project a matrix to the quotient, with a genericity report")
    p.set_defaults(func=cmd_project)

    p = with_input("realize", "realize a quotient point as a matrix")
    p.set_defaults(func=cmd_realize)

    p = with_input("pick", "Pick-matrix necessary condition for a dataset")
    p.add_argument("--z-samples", type=_positive_int, default=64, help="boundary samples (default 64)")
    p.add_argument("--tol", type=_nonnegative_float, default=PSD_TOL, help=f"eigenvalue tolerance (default {PSD_TOL:g})")
    p.set_defaults(func=cmd_pick)

    p = with_input("lift", "lift a quotient-valued interpolant to a matrix-valued one")
    p.add_argument("--grid", type=_positive_int, default=16, help="polar grid size for the mu check (default 16)")
    p.add_argument("--tol", type=_positive_float, default=LIFT_RTOL,
                   help=f"relative node tolerance (default {LIFT_RTOL:g})")
    p.add_argument("--mu-tol", type=_positive_float, default=1e-6, help="bracket width for grid mu (default 1e-6)")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("synth", help="synthesize a feasible lift_input instance")
    p.add_argument("n", type=int)
    p.add_argument("M", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def _fail(code: int, exc: Exception, **extra) -> int:
    detail = {"error": type(exc).__name__, "message": str(exc), **extra}
    print(dumps(detail), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except MembershipFailure as exc:
        return _fail(EXIT_MEMBERSHIP, exc, index=exc.index)
    except NotGeneric as exc:
        return _fail(EXIT_GENERICITY, exc, index=exc.index)
    except QuotientRangeFailure as exc:
        return _fail(EXIT_RANGE, exc, zetas=exc.zetas)
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (InputError, ValueError) as exc:
        return _fail(EXIT_INPUT, exc)
    sys.stdout.write(dumps(result) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
