"""Command-line entry point: ``nids <command> ...``.

Exit codes: 0 success, 1 verification failure (or integration blow-up),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import bilinear, evolve, io
from .exact import (DegenerateDromionError, DromionParams, FieldSnapshot, Grid, exact_field,
                    gauge_dt, gauge_to_isospectral, snapshot)
from .residual import refinement_study, residual_evolution, residual_isospectral

log = logging.getLogger("nidsi")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULT_TOLERANCE = {"pde": 1e-6, "bilinear": 1e-8, "epsilon": 1e-10, "isospectral": 1e-6}
MIN_ORDER = 3.5
ODD_TOLERANCE = 1e-12  # relative to the product-rule term size


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# reports


class Report:
    """A verification outcome: a text table plus a ``key = value`` block."""

    def __init__(self, title: str, tolerance: float):
        self.title = title
        self.tolerance = tolerance
        self.rows: list[str] = []
        self.values: dict = {}
        self.failures: list[tuple[float, str]] = []

    def check(self, name: str, value: float, limit: float, lower=False):
        ok = value >= limit if lower else value <= limit
        if not ok:
            self.failures.append((abs(value - limit) / max(abs(limit), 1e-300), name))
        return ok

    @property
    def passed(self) -> bool:
        return not self.failures

    def worst(self) -> str:
        return max(self.failures)[1] if self.failures else ""

    def render(self) -> str:
        lines = [self.title, *self.rows, ""]
        lines.append(f"status = {'PASS' if self.passed else 'FAIL'}")
        lines.append(f"tolerance = {io.fmt(self.tolerance)}")
        if not self.passed:
            lines.append(f"worst = {self.worst()}")
        for k, v in self.values.items():
            lines.append(f"{k} = {io.fmt(v) if isinstance(v, float) else v}")
        return "\n".join(lines) + "\n"


def _params(cfg: io.RunConfig, allow_zero=False):
    p = cfg.solution_params()
    if p is None and not allow_zero:
        raise UsageError("this command needs solution = dromion or soliton")
    return p


def _times(cfg: io.RunConfig):
    if not cfg.times:
        raise UsageError("time list is empty")
    return cfg.times


def _refinement_sizes(N: int, levels: int):
    if levels < 1:
        raise UsageError("--refinements must be at least 1")
    step = 2 ** (levels - 1)
    if (N - 1) % step or (N - 1) // step < 8:
        raise UsageError(f"N = {N} does not admit {levels} dyadic refinement levels")
    return [(N - 1) // 2**j + 1 for j in range(levels - 1, -1, -1)]


def verify_pde(cfg: io.RunConfig, tol: float, levels: int) -> Report:
    p = _params(cfg)
    kind = cfg.solution
    sizes = _refinement_sizes(cfg.N, levels)
    field_fn, dt_fn = exact_field(kind, p)
    order = cfg.stencil_order
    rep = Report(f"verify pde: {kind}, grids {sizes}, stencil order {order}", tol)
    rep.rows.append(f"{'t':>10} {'evolution':>12} {'U_constr':>12} {'V_constr':>12} {'order':>7}")

    for t in _times(cfg):
        def make(n, t=t):
            snap = snapshot(kind, p, Grid.square(cfg.L, n), t)
            X, Y = snap.grid.mesh()
            return residual_evolution(snap, p.mode.coeffs, q_t=dt_fn(X, Y, t), order=order)

        finest, _ = refinement_study(make, sizes)
        e = finest.equations
        obs = finest.observed_order
        rep.rows.append(f"{t:>10.4g} {e['evolution']['max']:>12.3e} "
                        f"{e['U_constraint']['max']:>12.3e} {e['V_constraint']['max']:>12.3e} "
                        f"{obs if obs is not None else float('nan'):>7.3f}")
        for name, v in e.items():
            rep.values[f"t={t:g}.{name}.max"] = v["max"]
            rep.check(f"{name} at t={t:g}", v["max"], tol)
        if obs is not None:
            rep.values[f"t={t:g}.observed_order"] = obs
            rep.check(f"observed order at t={t:g}", obs, MIN_ORDER, lower=True)
    return rep


def verify_bilinear(cfg: io.RunConfig, tol: float) -> Report:
    p = _params(cfg, allow_zero=True)
    if cfg.solution == "dromion":
        pair, lattice = bilinear.dromion_pair(p), bilinear.core_lattice(p, times=_times(cfg))
        coeffs = p.mode.coeffs
    elif cfg.solution == "soliton":
        pair, lattice = bilinear.soliton_pair(p.mode), bilinear.core_lattice(p.mode,
                                                                             times=_times(cfg))
        coeffs = p.mode.coeffs
    else:
        pair, lattice = bilinear.zero_pair(), bilinear.default_lattice(times=_times(cfg))
        coeffs = cfg.coeffs
    r_a, r_b = bilinear.lattice_residuals(pair, coeffs, lattice)
    # odd-order D F.F vanishes identically; only roundoff may remain
    odd = max(abs(bilinear.hirota_D(o, bilinear.BilinearPair(pair.F, pair.F), pt,
                                    normalized=True))
              for o in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (0, 2, 1))
              for pt in lattice)
    rep = Report(f"verify bilinear: {cfg.solution}, {len(lattice)} lattice points", tol)
    rep.rows += [f"evolution (G, F)  max = {r_a:.3e}",
                 f"constraint (F, F) max = {r_b:.3e}",
                 f"odd-order D F.F   max = {odd:.3e} (relative)"]
    rep.values.update({"evolution.max": float(r_a), "constraint.max": float(r_b),
                       "odd_order.max": float(odd)})
    rep.check("evolution", r_a, tol)
    rep.check("constraint", r_b, tol)
    rep.check("odd-order D F.F", odd, ODD_TOLERANCE)
    return rep


def verify_epsilon(cfg: io.RunConfig, tol: float) -> Report:
    p = _params(cfg)
    mode = p.mode
    if cfg.rate_shift != 0.0:
        mode = bilinear.PerturbedMode(mode, cfg.rate_shift)
    subject = (DromionParams(p.alpha, p.beta, p.gamma, p.delta, mode)
               if isinstance(p, DromionParams) else mode)
    out = bilinear.epsilon_order_check(subject, bilinear.core_lattice(subject, times=_times(cfg)),
                                       tolerance=tol)
    rep = Report(f"verify epsilon: {out.kind}, {out.lattice_size} lattice points"
                 + (f", rate_shift = {cfg.rate_shift:g}" if cfg.rate_shift else ""), tol)
    rep.rows.append(f"{'order':<34} {'relative':>12} {'absolute':>12}")
    for name, rel in out.orders.items():
        rep.rows.append(f"{name:<34} {rel:>12.3e} {out.absolute[name]:>12.3e}")
        rep.values[f"{name}.relative"] = rel
        rep.check(name, rel, tol)
    return rep


def _gauged_exact(kind, p, grid, t, coeffs):
    X, Y = grid.mesh()
    field_fn, dt_fn = exact_field(kind, p)
    q, U, V = field_fn(X, Y, t)
    qh, Uh, Vh = gauge_to_isospectral(q, U, V, X, Y, t, coeffs)
    return FieldSnapshot(grid, float(t), qh, Uh, Vh), gauge_dt(q, dt_fn(X, Y, t), X, Y, t, coeffs)


def verify_isospectral(cfg: io.RunConfig, tol: float, snaps=None) -> Report:
    """Isospectral residuals of the gauged closed form, or of given gauged
    snapshots with the time derivative taken from the configured closed form."""
    p = _params(cfg)
    coeffs = p.mode.coeffs
    order = cfg.stencil_order
    if snaps is None:
        grid = Grid.square(cfg.L, cfg.N)
        items = [_gauged_exact(cfg.solution, p, grid, t, coeffs) for t in _times(cfg)]
    else:
        items = [(s, _gauged_exact(cfg.solution, p, s.grid, s.t, coeffs)[1]) for s in snaps]
    rep = Report(f"verify isospectral: {cfg.solution}, stencil order {order}", tol)
    rep.rows.append(f"{'t':>10} {'evolution':>12} {'U_constr':>12} {'V_constr':>12} "
                    f"{'V_xi_var':>12}")
    for snap, qt in items:
        r = residual_isospectral(snap, q_t=qt, order=order)
        e = r.equations
        rep.rows.append(f"{snap.t:>10.4g} {e['evolution']['max']:>12.3e} "
                        f"{e['U_constraint']['max']:>12.3e} {e['V_constraint']['max']:>12.3e} "
                        f"{r.extras['V_xi_variant.max']:>12.3e}")
        for name, v in e.items():
            rep.values[f"t={snap.t:g}.{name}.max"] = v["max"]
            rep.check(f"{name} at t={snap.t:g}", v["max"], tol)
        rep.values[f"t={snap.t:g}.V_xi_variant.max"] = \
            r.extras["V_xi_variant.max"]
    return rep


def _emit(rep: Report, out: Path, name: str) -> int:
    text = rep.render()
    sys.stdout.write(text)
    (out / name).write_text(text, encoding="ascii")
    if not rep.passed:
        print(f"FAIL: worst offender {rep.worst()}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# ---------------------------------------------------------------------------
# commands


def cmd_exact(args, cfg) -> int:
    p = _params(cfg)
    grid = Grid.square(cfg.L, cfg.N)
    for t in _times(cfg):
        snap = snapshot(cfg.solution, p, grid, t)
        path = io.write_snapshot(args.out / io.snapshot_name(cfg.solution, t), snap)
        print(f"{path}  t = {io.fmt(t)}  max|q| = {io.fmt(np.abs(snap.q).max())}")
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    tol = args.tolerance if args.tolerance is not None else DEFAULT_TOLERANCE[args.check]
    if args.check == "pde":
        rep = verify_pde(cfg, tol, args.refinements)
    elif args.check == "bilinear":
        rep = verify_bilinear(cfg, tol)
    elif args.check == "epsilon":
        rep = verify_epsilon(cfg, tol)
    else:
        rep = verify_isospectral(cfg, tol)
    return _emit(rep, args.out, f"verify_{args.check}.txt")


def sim_config(cfg: io.RunConfig) -> evolve.SimConfig:
    times = cfg.times
    if not cfg.is_set("times"):
        times = tuple(t for t in times if cfg.t_start <= t <= cfg.t_end) or (cfg.t_end,)
    initial_snapshot = None
    if cfg.initial == "file" or cfg.boundary == "file":
        if not cfg.initial_file:
            raise UsageError("initial_file is required for file sources")
        initial_snapshot = _read(cfg.initial_file)
    params = cfg.solution_params()
    return evolve.SimConfig(L=cfg.L, N=cfg.N, dt=cfg.dt, t_start=cfg.t_start, t_end=cfg.t_end,
                            coeffs=cfg.coeffs, initial=cfg.initial, boundary=cfg.boundary,
                            snapshot_times=tuple(times), params=params,
                            initial_snapshot=initial_snapshot, stability=cfg.stability)


def cmd_simulate(args, cfg) -> int:
    sc = sim_config(cfg)
    try:
        sc.validate()
    except ValueError as err:
        raise UsageError(str(err)) from None
    status = EXIT_OK
    try:
        res = evolve.simulate(sc)
    except evolve.BlowUpError as err:
        print(f"integration failed: {err}", file=sys.stderr)
        res, status = err.partial, EXIT_FAIL
    for snap in res.snapshots:
        path = io.write_snapshot(args.out / io.snapshot_name("sim", snap.t), snap)
        line = f"{path}  t = {io.fmt(snap.t)}  max|q| = {io.fmt(np.abs(snap.q).max())}"
        if sc.initial in ("dromion", "soliton"):
            line += f"  rel_L2_vs_exact = {evolve.exact_comparison(sc, snap):.3e}"
        print(line)
    path = io.write_series(args.out / "amplitude.txt", res.times, res.peaks)
    print(f"{path}  {len(res.times)} samples")
    return status


def _read(path) -> FieldSnapshot:
    try:
        return io.read_snapshot(path)
    except FileNotFoundError:
        raise UsageError(f"snapshot not found: {path}") from None
    except io.SnapshotFormatError as err:
        raise UsageError(f"{path}: {err}") from None


def cmd_gauge(args, cfg) -> int:
    snaps = [_read(p) for p in args.inputs]
    coeffs = cfg.coeffs
    done = []
    for snap, src in zip(snaps, args.inputs):
        X, Y = snap.grid.mesh()
        q, U, V = gauge_to_isospectral(snap.q, snap.U, snap.V, X, Y, snap.t, coeffs)
        out = FieldSnapshot(snap.grid, snap.t, q, U, V)
        path = io.write_snapshot(args.out / (Path(src).stem + "_iso.nids"), out)
        print(f"{path}  t = {io.fmt(snap.t)}")
        done.append(out)
    if args.verify:
        tol = args.tolerance if args.tolerance is not None else DEFAULT_TOLERANCE["isospectral"]
        return _emit(verify_isospectral(cfg, tol, done), args.out, "verify_isospectral.txt")
    return EXIT_OK


def cmd_figure(args, cfg) -> int:
    snaps = [_read(p) for p in args.inputs]
    for snap, src in zip(snaps, args.inputs):
        path = io.write_figure(args.out / (Path(src).stem + "_absq.txt"), snap)
        absq = np.abs(snap.q)
        line = f"{path}  t = {io.fmt(snap.t)}  max|q| = {io.fmt(absq.max())}"
        try:
            rate, _ = io.diagonal_tail_slope(snap.grid.xi, snap.grid.eta, absq)
            line += f"  diagonal tail rate = {rate:.6g}"
        except ValueError:
            pass
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, top: bool):
    # subcommands repeat the global flags without defaults so either position works
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    p.add_argument("--config", type=Path, default=d(None), help="key = value run configuration")
    p.add_argument("--out", type=Path, default=d(Path(".")), help="output directory")
    p.add_argument("--tolerance", type=float, default=d(None), help="override the check tolerance")
    p.add_argument("--refinements", type=int, default=d(3),
                   help="number of dyadic grid levels for convergence checks")
    p.add_argument("--set", action="append", default=d([]), metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.add_argument("-q", "--quiet", action="store_true", default=d(False),
                   help="suppress informational logs")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nids",
                                 description="Explode-decay dromions of non-isospectral DSI.")
    _add_common(ap, True)
    sub = ap.add_subparsers(dest="command", required=True)
    parsers = {
        "exact": sub.add_parser("exact", help="write closed-form snapshots"),
        "verify": sub.add_parser("verify", help="run a verifier"),
        "simulate": sub.add_parser("simulate", help="integrate in time"),
        "gauge": sub.add_parser("gauge", help="map snapshots to the isospectral system"),
        "figure": sub.add_parser("figure", help="export |q| surfaces as text"),
    }
    for p in parsers.values():
        _add_common(p, False)
    parsers["verify"].add_argument("check", choices=sorted(DEFAULT_TOLERANCE))
    parsers["gauge"].add_argument("inputs", nargs="+")
    parsers["gauge"].add_argument("--verify", action="store_true",
                                  help="chain the isospectral verifier")
    parsers["figure"].add_argument("inputs", nargs="+")
    return ap


COMMANDS = {"exact": cmd_exact, "verify": cmd_verify, "simulate": cmd_simulate,
            "gauge": cmd_gauge, "figure": cmd_figure}


def _overrides(items):
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        out[key.strip()] = value.strip()
    return out


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg = io.load_config(args.config, _overrides(args.set))
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, cfg)
    except (UsageError, io.ConfigError, DegenerateDromionError, evolve.StabilityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
