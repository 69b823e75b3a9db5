"""Command-line surface: every analyzer behind a subcommand, config-file
driven, CSV/JSON outputs plus a run manifest.

Outputs are byte-reproducible for identical (command, config, seed,
version); the manifest records the wall time and therefore lives in its own
file, outside the comparable outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .core import (
    FracOrder,
    InvalidDimensionError,
    QuadratureSpec,
    TailNotCertifiableError,
    geom_constants,
    sphere_surface_area,
)
from .fields import bump, c2_bump, gaussian
from .fraclap import FracLapOperator, frac_lap, normalization_constant, scaling_law_check
from .potentials import LogPotential, exp_integrability_report, log_potential_derivative, log_potential_eval
from .solutions import SphericalSolution, asymptotic_decomposition, pde_residual, thm14_criteria, volume_and_alpha
from . import estimates as est
from . import greens


@dataclass
class RunManifest:
    command: str
    config_digest: str
    seed: int
    tool_version: str
    wall_time: float


class CheckFailure(Exception):
    """An acceptance-tolerance check failed in --check mode (exit 3)."""


def _fmt(x) -> str:
    return "%.17g" % float(x)


def _load_config(path) -> dict:
    if path is None:
        return {}
    with open(path, "rb") as fh:
        raw = fh.read()
    if str(path).endswith(".toml"):
        try:
            import tomllib as toml
        except ModuleNotFoundError:
            import tomli as toml
        return toml.loads(raw.decode())
    return json.loads(raw.decode())


def _digest(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([c if isinstance(c, str) else _fmt(c) for c in row])


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _spec_from(config: dict) -> QuadratureSpec:
    return QuadratureSpec.from_mapping(config.get("quadrature", {}))


def _require(ok: bool, message: str, check: bool):
    if check and not ok:
        raise CheckFailure(message)


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args, config, outdir):
    spec = _spec_from(config)
    dims = config.get("dims", [args.n] if args.n else [1, 3])
    rows = []
    for n in dims:
        g = geom_constants(n)
        c = normalization_constant(n, 0.5)
        rows.append([n, g.gamma_n, g.sphere_area, g.ball_volume, c])
        if args.check:
            import scipy.special as sp

            oracle = 0.5 * 2.0 * sp.gamma(n / 2 + 0.5) / (math.pi ** (n / 2) * sp.gamma(0.5))
            _require(abs(c / oracle - 1) < 1e-6,
                     f"normalization constant off for n={n}", args.check)
    _write_csv(os.path.join(outdir, "constants.csv"),
               ["n", "gamma_n", "sphere_area", "ball_volume", "norm_const_half"],
               rows)


def cmd_residual(args, config, outdir):
    spec = _spec_from(config)
    n = args.n or config.get("n", 1)
    lam = args.lam or config.get("lambda", 1.0)
    center = tuple(config.get("center", (0.0,) * n))
    sol = SphericalSolution(lam, center, n)
    pts = config.get("points")
    if pts is None:
        pts = [(0.0,) * n, (1.0,) + (0.0,) * (n - 1), (3.0,) + (0.0,) * (n - 1)]
    rows = pde_residual(sol.field(), pts, spec)
    tol = config.get("tolerance", 1e-4 if n == 1 else 1e-3)
    out = []
    for r in rows:
        out.append([json.dumps(list(r["point"])), r["lhs"], r["rhs"],
                    r["residual"], r["err_est"]])
        _require(r["residual"] <= tol * max(1.0, abs(r["rhs"])),
                 f"PDE residual {r['residual']:.2e} at {r['point']}", args.check)
    _write_csv(os.path.join(outdir, "residual.csv"),
               ["point", "lhs", "rhs", "residual", "err_est"], out)


def cmd_potential(args, config, outdir):
    spec = _spec_from(config)
    n = args.n or config.get("n", 1)
    lam = args.lam or config.get("lambda", 1.0)
    sol = SphericalSolution(lam, (0.0,) * n, n)
    lp = LogPotential(sol.density(), n, spec=spec)
    radii = config.get("radii", [1.0, 10.0, 100.0, 1000.0])
    rows = []
    for r in radii:
        v, e = lp.radial_value(float(r))
        row = [r, v, e]
        if n >= 2:
            alpha = (1,) + (0,) * (n - 1)
            x = np.zeros(n)
            x[0] = float(r)
            d, de = log_potential_derivative(lp, x, alpha, spec)
            row += [d, de]
        rows.append(row)
    header = ["radius", "v", "err_est"] + (["d1", "d1_err"] if n >= 2 else [])
    _write_csv(os.path.join(outdir, "potential.csv"), header, rows)


def cmd_asymptotics(args, config, outdir):
    spec = _spec_from(config)
    n = args.n or config.get("n", 3)
    lam = args.lam or config.get("lambda", 1.0)
    sol = SphericalSolution(lam, (0.0,) * n, n)
    u = sol.field()
    dens = sol.density()
    P, fit, dd = asymptotic_decomposition(u, spec, density=dens)
    rep = thm14_criteria(u, spec, density=dens)
    payload = {
        "n": n, "lambda": lam,
        "polynomial": json.loads(P.to_json()),
        "alpha_hat": fit.alpha_hat, "alpha_predicted": fit.alpha_predicted,
        "fit_window": list(fit.window), "fit_residual": fit.residual,
        "deg_P": rep["deg_P"],
        "sup_quadratic_ratio": rep["sup_quadratic_ratio"],
        "laplacian_limits": [{"j": e["j"], "limit": e["limit"]}
                             for e in rep["laplacian_limits"]],
        "derivative_decay": {"".join(map(str, k)): v.to_mapping()
                             for k, v in sorted(dd.items())},
    }
    _write_json(os.path.join(outdir, "asymptotics.json"), payload)
    _require(1.9 <= fit.alpha_hat <= 2.1, "alpha_hat outside [1.9, 2.1]", args.check)
    _require(rep["deg_P"] == 0, "spherical deg_P != 0", args.check)
    for e in rep["laplacian_limits"]:
        _require(abs(e["limit"]) <= 1e-3, f"laplacian limit j={e['j']} nonzero",
                 args.check)


def cmd_scaling(args, config, outdir):
    spec = _spec_from(config)
    n = args.n or config.get("n", 3)
    j = args.j if args.j is not None else config.get("j", 1)
    sigma = args.sigma or config.get("sigma", 0.5)
    radii = args.radii or config.get("radii", [1.0, 2.0, 4.0])
    rep = scaling_law_check(n, j, sigma, radii, spec)
    rows = [[r["radius"], r["value"], r["err_est"], r["scaled"]]
            for r in rep["rows"]]
    _write_csv(os.path.join(outdir, "scaling.csv"),
               ["radius", "value", "err_est", "scaled"], rows)
    _require(rep["max_rel_spread"] <= 0.02,
             f"scaling spread {rep['max_rel_spread']:.3f} > 2%", args.check)


def cmd_green(args, config, outdir):
    spec = _spec_from(config)
    r = config.get("radius", 1.0)
    rows = []

    # harmonic reproduction through the boundary integral (n = 3)
    probes = [("const", lambda y: np.ones(len(y)), lambda x: 1.0),
              ("linear", lambda y: y[:, 0], lambda x: x[0]),
              ("quadratic", lambda y: y[:, 0] * y[:, 1], lambda x: x[0] * x[1]),
              ("cubic", lambda y: y[:, 0] * y[:, 1] * y[:, 2],
               lambda x: x[0] * x[1] * x[2])]
    x3 = np.array([0.3, 0.2, 0.1]) * r
    for name, f, exact in probes:
        v, e = greens.navier_representation(r, [f], x3, spec)
        err = abs(v - exact(x3))
        rows.append([f"navier_{name}", v, err])
        _require(err <= 1e-6, f"navier {name} error {err:.2e}", args.check)

    # constant reproduction through the exterior Poisson kernel
    from .fields import constant_field

    for n in (1, 3):
        one = constant_field(1.0, n)
        for s in (0.0, 0.25, 0.5, 0.75):
            v, e = greens.poisson_extension_halflap(r, one, [s * r] + [0.0] * (n - 1), spec)
            rows.append([f"poisson_const_n{n}_s{s}", v, abs(v - 1.0)])
            _require(abs(v - 1.0) <= 1e-6, f"poisson constant n={n} s={s}", args.check)

    # torsion identities for the half-Laplacian Green kernel
    for n in (1, 3):
        one = constant_field(1.0, n)
        L = greens.torsion_constant(n, r)
        h0, _ = greens.g2_solve(r, one, (0.0,) * n, spec)
        rows.append([f"g2_center_n{n}", h0, abs(h0 * L / r - 1.0)])
        if n == 1:
            _require(abs(h0 - r) <= 1e-3, "n=1 torsion center value", args.check)
        for s in (0.4, 0.7):
            h, _ = greens.g2_solve(r, one, (s * r,) + (0.0,) * (n - 1), spec)
            exact = math.sqrt(r * r - (s * r) ** 2) / L
            rows.append([f"g2_shape_n{n}_s{s}", h, abs(h / exact - 1.0)])
            _require(abs(h / exact - 1.0) <= 5e-2,
                     f"g2 shape n={n} s={s}", args.check)
    # off-center residual of the certified torsion profile (n = 3)
    op = FracLapOperator.make(3, FracOrder(0, 0.5))
    w = greens.torsion_field(3, r)
    L3 = greens.torsion_constant(3, r)
    for s in (0.3, 0.6):
        v, e = frac_lap(op, w, np.array([s * r, 0.0, 0.0]), spec)
        rows.append([f"g2_residual_n3_s{s}", v / L3, abs(v / L3 - 1.0)])
        _require(abs(v / L3 - 1.0) <= 5e-2, f"g2 residual s={s}", args.check)

    _write_csv(os.path.join(outdir, "green.csv"),
               ["check", "value", "deviation"], rows)


def cmd_estimates(args, config, outdir):
    spec = _spec_from(config)
    window = tuple(config.get("window", (5.0, 40.0)))
    reports = {}
    for n, s in [(1, FracOrder(0, 0.5)), (3, FracOrder(0, 0.5)), (1, FracOrder(1, 0.5))]:
        rep = est.schwartz_decay_check(gaussian(n), s, window, spec)
        reports[f"schwartz_n{n}_s{s.total}"] = rep.to_mapping()
        _require(rep.passed, f"schwartz decay n={n} s={s.total}", args.check)
    for k in (0, 1):
        rep = est.moment_decay_check(k, 0.5, window, spec)
        reports[f"moment_k{k}"] = rep.to_mapping()
        _require(rep.passed, f"moment decay k={k}", args.check)
    rep = est.support_decay_check(c2_bump(1), 0.5,
                                  [0.01, 0.03, 0.1, 5.0, 10.0, 20.0, 40.0], spec)
    reports["support"] = rep.to_mapping()
    _require(rep.passed, "support decay", args.check)
    full = est.riesz_composition_check(3, 2.0, 2.0, [0.5, 1.0, 2.0], spec)
    reports["riesz_full"] = {k: v for k, v in full.items() if k != "rows"}
    _require(full["passed"], "riesz full-space scaling", args.check)
    ball = est.riesz_composition_check(3, 1.5, 1.5, [0.02, 0.04, 0.08, 0.16],
                                       spec, ball_radius=2.0)
    reports["riesz_ball"] = {k: v for k, v in ball.items() if k != "rows"}
    _require(ball["passed"], "riesz ball log slope", args.check)
    _write_json(os.path.join(outdir, "estimates.json"), reports)


def cmd_bm(args, config, outdir):
    spec = _spec_from(config)
    n = args.n or config.get("n", 1)
    R = config.get("R", 1.0)
    mass = config.get("mass", geom_constants(n).gamma_n / 2.0)
    p_list = config.get("p", [1.0, 1.5, 1.75, 2.0, 2.25, 2.5, 3.0])
    f = bump(n, radius=config.get("bump_radius", 0.002), mass=mass)
    cache: dict = {}
    rows = []
    verdicts = {}
    for p in p_list:
        rep = exp_integrability_report(f, float(p), R, spec, u2_cache=cache)
        rows.append([p, rep.integral, rep.jensen_bound, rep.threshold,
                     int(rep.admissible), rep.verdict])
        verdicts[float(p)] = rep.verdict
    _write_csv(os.path.join(outdir, "bm.csv"),
               ["p", "integral", "jensen_bound", "threshold", "admissible",
                "verdict"], rows)
    if args.check:
        conv = [p for p, v in verdicts.items() if v == "converged"]
        div = [p for p, v in verdicts.items() if v == "diverged"]
        _require(bool(conv) and bool(div), "no dichotomy detected", True)
        transition = (max(conv) + min(div)) / 2.0
        _require(1.6 <= transition <= 2.4,
                 f"transition {transition} outside [1.6, 2.4]", True)


COMMANDS = {
    "constants": cmd_constants,
    "residual": cmd_residual,
    "potential": cmd_potential,
    "asymptotics": cmd_asymptotics,
    "scaling": cmd_scaling,
    "green": cmd_green,
    "estimates": cmd_estimates,
    "bm": cmd_bm,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraclab",
                                 description="numerical fractional-Laplacian analyzers")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON or TOML run config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--check", action="store_true",
                       help="enforce acceptance tolerances (exit 3 on failure)")
        p.add_argument("--n", type=int, default=None)
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--j", type=int, default=None)
        p.add_argument("--sigma", type=float, default=None)
        p.add_argument("--radii", type=lambda s: [float(t) for t in s.split(",")],
                       default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    threads = os.environ.get("FRACLAB_THREADS")
    if threads:
        os.environ.setdefault("OMP_NUM_THREADS", threads)
    try:
        config = _load_config(args.config)
        if not isinstance(config, dict):
            raise ValueError("config root must be a table/object")
        spec = _spec_from(config)  # validates quadrature keys early
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, config, outdir)
    except TailNotCertifiableError as exc:
        print(f"certification failure: {exc}", file=sys.stderr)
        return 2
    except CheckFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 3
    except (InvalidDimensionError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    manifest = RunManifest(command=args.command, config_digest=_digest(config),
                           seed=spec.seed, tool_version=__version__,
                           wall_time=time.perf_counter() - t0)
    _write_json(os.path.join(outdir, "manifest.json"), asdict(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main())
