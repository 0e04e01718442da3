"""Command-line entry point: ``hkreduce {verify,scan,jacobi,transform,solve}``.

File formats
------------
Points files are JSON documents::

    {"coords": "reduced" | "full" | "calabi", "points": [...]}

Each point is a list of coordinates in chart order.  Complex coordinates are
``[re, im]`` pairs and real ones are plain numbers, so a reduced point reads
``[[q.re, q.im], [zeta.re, zeta.im], v, rho]`` and a full point reads
``[[q1.re, q1.im], [q2.re, q2.im], [p1.re, p1.im], [p2.re, p2.im]]``.
Reduced points files may carry a parallel ``"fiber"`` list of ``[u, theta]``
pairs; ``transform`` reads it for ``reduced-to-full`` and writes it for
``full-to-reduced``.

Reports are written with the keys in this fixed order::

    potential, system, tolerance, per_point, sup_norm, pass, detected_scale

``scan`` appends ``box``, ``n``, ``seed`` and ``max_location``.  Every entry
of ``per_point`` is ``{"point": ..., "residuals": {name: value}}`` with
complex residuals as ``[re, im]`` pairs.  Floats are written with Python's
shortest round-trip repr, so identical inputs give byte-identical files.

Exit codes: 0 pass, 1 verified failure, 2 usage, parse or domain error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from . import brackets, coords, forms, potentials, residuals, solver
from .jets import DomainError

log = logging.getLogger(__name__)

SYSTEMS = ("reduced", "full", "forms")
DIRECTIONS = ("full-to-reduced", "reduced-to-full", "darboux-to-calabi")
JACOBI_TOL = 1e-10


class UsageError(Exception):
    """Bad input: reported on stderr with exit code 2."""


# -- JSON encoding -------------------------------------------------------------

def _num(x):
    x = complex(x)
    if x.imag == 0:
        return float(x.real)
    return [float(x.real), float(x.imag)]


def _cplx(x):
    x = complex(x)
    return [float(x.real), float(x.imag)]


def encode_point(x: np.ndarray, layout) -> list:
    """Real coordinate row to the points-file representation."""
    out = []
    paired = {i for _, i, j in layout.complex_pairs} | {j for _, i, j in layout.complex_pairs}
    for label, i, j in layout.complex_pairs:
        out.append((i, [float(x[i]), float(x[j])]))
    for k in range(layout.dim):
        if k not in paired:
            out.append((k, float(x[k])))
    return [v for _, v in sorted(out, key=lambda t: t[0])]


def decode_point(p, layout, index: int) -> np.ndarray:
    """Inverse of :func:`encode_point`; raises :class:`UsageError` on bad arity."""
    starts = {i: j for _, i, j in layout.complex_pairs}
    expected = len(layout.complex_pairs) + len(layout.free_real_names)
    if not isinstance(p, list) or len(p) != expected:
        raise UsageError(f"point {index}: expected {expected} coordinates for this chart")
    x = np.empty(layout.dim)
    k = 0
    for entry in p:
        if k in starts:
            if not (isinstance(entry, list) and len(entry) == 2):
                raise UsageError(f"point {index}: complex coordinate {layout.names[k]} must be [re, im]")
            x[k], x[k + 1] = float(entry[0]), float(entry[1])
            k += 2
        else:
            if isinstance(entry, list):
                raise UsageError(f"point {index}: coordinate {layout.names[k]} must be real")
            x[k] = float(entry)
            k += 1
    if not np.all(np.isfinite(x)):
        raise UsageError(f"point {index}: non-finite coordinate")
    return x


def read_points(path: str):
    """Return ``(coords_tag, real array, document)`` from a points file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read points file {path}: {exc}") from None
    if not isinstance(doc, dict) or "coords" not in doc or "points" not in doc:
        raise UsageError("points file needs 'coords' and 'points'")
    tag = doc["coords"]
    if tag not in coords.LAYOUTS:
        raise UsageError(f"unknown coords tag {tag!r}")
    layout = coords.LAYOUTS[tag]
    pts = doc["points"]
    if not isinstance(pts, list) or not pts:
        raise UsageError("points file contains no points")
    x = np.array([decode_point(p, layout, i) for i, p in enumerate(pts)])
    return tag, x, doc


def write_json(doc, out: Optional[str]):
    text = json.dumps(doc, indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# -- verify / scan ---------------------------------------------------------------

def _evaluated(potential_name: str, system: str):
    """The potential to evaluate and the chart its points live in."""
    try:
        pot = potentials.get(potential_name)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    if system not in SYSTEMS:
        raise UsageError(f"unknown system {system!r}; choose from {list(SYSTEMS)}")
    if system == "reduced":
        if pot.coords != "reduced":
            raise UsageError(f"{pot.name} is not a reduced potential; use --system full")
        return pot
    if pot.coords == "reduced":
        pot = residuals.lift_potential(pot)
    return pot


def default_points(potential_name: str, system: str) -> np.ndarray:
    """The grid ``verify`` uses when no points file is given."""
    pot = _evaluated(potential_name, system)
    if pot.coords == "calabi":
        return coords.default_calabi_grid()
    if pot.coords == "full":
        n = 50 if potential_name.startswith("calabi") else 1000
        return coords.default_full_grid(n)
    if potential_name.startswith("calabi"):
        return coords.default_reduced_grid(50, 0, coords.CALABI_BOX)
    return coords.default_reduced_grid()


def _first_bad_index(fn, x: np.ndarray) -> int:
    for i in range(len(x)):
        try:
            fn(x[i:i + 1])
        except DomainError:
            return i
    return -1


def _evaluate(pot, system: str, x: np.ndarray, tol: Optional[float]) -> residuals.ResidualReport:
    if tol is None:
        tol = residuals.TOL_CALABI if pot.name.startswith(("calabi", "lift(calabi")) else residuals.TOL_FLAT

    def run(pts):
        if system == "forms":
            d = forms.hyperkahler_algebra_defect(pot, pts)
            return residuals.ResidualReport(pot.name, system, tol, np.atleast_2d(pts),
                                            forms.AlgebraDefect.NAMES, d.stack())
        return residuals.report(pot, system, pts, tol)

    try:
        with np.errstate(all="ignore"):
            rep = run(x)
    except DomainError as exc:
        bad = _first_bad_index(run, x)
        where = f"point {bad}: " if bad >= 0 and not str(exc).startswith("point") else ""
        raise DomainError(where + str(exc)) from None
    if not np.all(np.isfinite(rep.residuals)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(rep.residuals), axis=-1))[0])
        raise DomainError(f"point {bad}: residuals are not finite (numeric range exceeded)")
    return rep


def report_document(rep: residuals.ResidualReport, name: str, layout) -> dict:
    per_point = []
    for x, row in zip(rep.points, rep.residuals):
        per_point.append({
            "point": encode_point(x, layout),
            "residuals": {n: _cplx(v) if np.iscomplexobj(rep.residuals) else float(v)
                          for n, v in zip(rep.names, row)},
        })
    return {
        "potential": name,
        "system": rep.system,
        "tolerance": float(rep.tolerance),
        "per_point": per_point,
        "sup_norm": rep.sup_norm,
        "pass": rep.passed,
        "detected_scale": rep.detected_scale,
    }


def cmd_verify(potential: str, system: str, points: Optional[str] = None,
               tol: Optional[float] = None, out: Optional[str] = None) -> int:
    pot = _evaluated(potential, system)
    if points is None:
        x = default_points(potential, system)
    else:
        tag, x, _ = read_points(points)
        if tag != pot.coords:
            raise UsageError(f"{pot.name} on the {system} system needs {pot.coords!r} points, got {tag!r}")
    rep = _evaluate(pot, system, x, tol)
    write_json(report_document(rep, potential, pot.layout), out)
    return 0 if rep.passed else 1


def parse_box(text: Optional[str]) -> dict:
    """``"v=-2:2,rho=-1:1"`` overrides on the unit reduced box."""
    box = dict(coords.UNIT_BOX)
    if not text:
        return box
    for item in text.split(","):
        try:
            name, rng = item.split("=")
            lo, hi = (float(t) for t in rng.split(":"))
        except ValueError:
            raise UsageError(f"bad box entry {item!r}; expected name=lo:hi") from None
        name = name.strip()
        if name not in box:
            raise UsageError(f"unknown box coordinate {name!r}; choose from {list(box)}")
        if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
            raise UsageError(f"bad bounds for {name}")
        box[name] = (lo, hi)
    return box


def scan_points(pot, box: dict, n: int, seed: int) -> np.ndarray:
    """Seeded samples in a reduced box, carried to the potential's chart."""
    r = coords.sample_box(box, coords.REDUCED, n, seed)
    if pot.coords == "reduced":
        return r
    rng = np.random.default_rng(seed + 1)
    f = coords.FiberPoint(rng.uniform(-1, 1, n), rng.uniform(0, 2 * np.pi, n))
    full = coords.reduced_to_full(coords.ReducedPoint.from_real(r), f)
    if pot.coords == "calabi":
        return coords.darboux_to_calabi(full).to_real()
    return full.to_real()


def cmd_scan(potential: str, system: str, box: Optional[str] = None, n: int = 1000,
             seed: int = 0, tol: Optional[float] = None, out: Optional[str] = None) -> int:
    if n <= 0:
        raise UsageError("n must be positive")
    pot = _evaluated(potential, system)
    bounds = parse_box(box)
    x = scan_points(pot, bounds, n, seed)
    rep = _evaluate(pot, system, x, tol)
    doc = report_document(rep, potential, pot.layout)
    doc["box"] = {k: [float(lo), float(hi)] for k, (lo, hi) in bounds.items()}
    doc["n"] = n
    doc["seed"] = seed
    doc["max_location"] = {
        name: {"index": idx, "value": rep.max_abs[name], "point": doc["per_point"][idx]["point"]}
        for name, idx in rep.argmax.items()
    }
    write_json(doc, out)
    return 0 if rep.passed else 1


# -- jacobi / transform / solve --------------------------------------------------

def cmd_jacobi(trials: int = 100, seed: int = 1, out: Optional[str] = None) -> int:
    if trials <= 0:
        raise UsageError("trials must be positive")
    d = brackets.jacobi_suite(trials, seed)
    worst = float(d.max())
    write_json({"trials": trials, "seed": seed, "tolerance": JACOBI_TOL,
                "max_defect": worst, "pass": worst <= JACOBI_TOL}, out)
    return 0 if worst <= JACOBI_TOL else 1


def cmd_transform(points: str, direction: str, out: Optional[str] = None) -> int:
    if direction not in DIRECTIONS:
        raise UsageError(f"unknown direction {direction!r}; choose from {list(DIRECTIONS)}")
    tag, x, doc = read_points(points)
    need = "reduced" if direction == "reduced-to-full" else "full"
    if tag != need:
        raise UsageError(f"{direction} needs {need!r} points, got {tag!r}")
    if direction == "full-to-reduced":
        if np.any((x[:, 4] == 0) & (x[:, 5] == 0)):
            bad = int(np.flatnonzero((x[:, 4] == 0) & (x[:, 5] == 0))[0])
            raise DomainError(f"point {bad}: p1 = 0, the reduced chart is undefined")
        r, f = coords.full_to_reduced(coords.FullPoint.from_real(x))
        y = np.atleast_2d(r.to_real())
        fib = np.broadcast_arrays(f.u, f.theta)
        result = {"coords": "reduced",
                  "points": [encode_point(row, coords.REDUCED) for row in y],
                  "fiber": [[float(u), float(t)] for u, t in zip(*fib)]}
    elif direction == "reduced-to-full":
        fib = doc.get("fiber")
        if fib is None:
            fib = [[0.0, 0.0]] * len(x)
        if not isinstance(fib, list) or len(fib) != len(x):
            raise UsageError("'fiber' must list one [u, theta] pair per point")
        fib = np.array(fib, dtype=float)
        y = coords.reduced_to_full(coords.ReducedPoint.from_real(x),
                                   coords.FiberPoint(fib[:, 0], fib[:, 1])).to_real()
        result = {"coords": "full", "points": [encode_point(row, coords.FULL) for row in y]}
    else:
        y = coords.darboux_to_calabi(coords.FullPoint.from_real(x)).to_real()
        result = {"coords": "calabi", "points": [encode_point(row, coords.CALABI) for row in y]}
    write_json(result, out)
    return 0


def solve_from_config(cfg: dict):
    """Run the collocation solver from a parsed config document.

    Recognised keys (all optional): ``degree`` (3), ``start`` (``"flat"``,
    ``"zeros"`` or ``{"noise": 0.01, "seed": 0}``), ``points``
    (``{"n": 400, "seed": 0}``), ``verify_points`` (``{"n": 400, "seed": 1}``)
    and the :class:`~hkreduce.solver.SolveConfig` fields.
    """
    known = {"degree", "start", "points", "verify_points",
             "max_iter", "tol", "lm_lambda0", "tikhonov", "null_rel"}
    unknown = set(cfg) - known
    if unknown:
        raise UsageError(f"unknown solve config keys {sorted(unknown)}")
    degree = int(cfg.get("degree", 3))
    if degree < 1:
        raise UsageError("degree must be at least 1")
    start = cfg.get("start", {"noise": 1e-2, "seed": 0})
    if start == "flat":
        c0 = solver.BasisExpansion.flat(degree) if degree >= 2 else solver.BasisExpansion.zeros(degree)
    elif start == "zeros":
        c0 = solver.BasisExpansion.zeros(degree)
    elif isinstance(start, dict):
        c0 = solver.perturbed_start(degree, float(start.get("noise", 1e-2)), int(start.get("seed", 0)))
    else:
        raise UsageError("start must be 'flat', 'zeros' or {'noise': ..., 'seed': ...}")
    pts_cfg = cfg.get("points", {})
    ver_cfg = cfg.get("verify_points", {})
    pts = solver.collocation_points(int(pts_cfg.get("n", 400)), int(pts_cfg.get("seed", 0)))
    fresh = solver.collocation_points(int(ver_cfg.get("n", 400)), int(ver_cfg.get("seed", 1)))
    opts = {k: cfg[k] for k in ("max_iter", "tol", "lm_lambda0", "tikhonov", "null_rel") if k in cfg}
    try:
        config = solver.SolveConfig(**opts)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    outcome = solver.solve(c0, pts, config)
    return outcome, solver.verify_on(outcome.coefficients, fresh)


def cmd_solve(config: Optional[str] = None, out: Optional[str] = None) -> int:
    cfg = {}
    if config is not None:
        try:
            with open(config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise UsageError("solve config must be a JSON object")
    outcome, fresh_sup = solve_from_config(cfg)
    c = outcome.coefficients
    write_json({
        "degree": c.degree,
        "converged": outcome.converged,
        "iterations": outcome.iterations,
        "message": outcome.message,
        "sup_history": outcome.sup_history,
        "rms_history": outcome.rms_history,
        "monomials": [solver.monomial_label(e) for e in c.exponents],
        "coefficients": [float(v) for v in c.coefficients],
        "fresh_sup": float(fresh_sup),
    }, out)
    return 0 if outcome.converged else 1


# -- argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hkreduce", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="evaluate a system on a points file or the default grid")
    p.add_argument("--potential", required=True, choices=sorted(potentials.BUILTINS))
    p.add_argument("--system", required=True, choices=SYSTEMS)
    p.add_argument("--points")
    p.add_argument("--tol", type=float)
    p.add_argument("--out")

    p = sub.add_parser("scan", help="evaluate a system on seeded samples in a reduced box")
    p.add_argument("--potential", required=True, choices=sorted(potentials.BUILTINS))
    p.add_argument("--system", required=True, choices=SYSTEMS)
    p.add_argument("--box", help="overrides such as 'v=-2:2,rho=-1:1'")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float)
    p.add_argument("--out")

    p = sub.add_parser("jacobi", help="random-cubic Jacobi identity suite")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out")

    p = sub.add_parser("transform", help="map a points file between charts")
    p.add_argument("--points", required=True)
    p.add_argument("--direction", required=True, choices=DIRECTIONS)
    p.add_argument("--out")

    p = sub.add_parser("solve", help="collocation solve of the reduced system")
    p.add_argument("--config")
    p.add_argument("--out")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        if args.command == "verify":
            return cmd_verify(args.potential, args.system, args.points, args.tol, args.out)
        if args.command == "scan":
            return cmd_scan(args.potential, args.system, args.box, args.n, args.seed, args.tol, args.out)
        if args.command == "jacobi":
            return cmd_jacobi(args.trials, args.seed, args.out)
        if args.command == "transform":
            return cmd_transform(args.points, args.direction, args.out)
        return cmd_solve(args.config, args.out)
    except (UsageError, DomainError, ValueError) as exc:
        print(f"hkreduce {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
