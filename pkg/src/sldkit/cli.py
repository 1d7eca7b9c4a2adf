"""Command-line front end.

Three subcommands: `qfi` (per-lambda estimation quantities for a probe
family), `noise-sweep` (transverse / parallel scaling tables), and
`ceqe-scan` (finite-size criticality scan).  Output is CSV ('.' decimal,
',' separator, LF line endings, mandatory header) or a JSON mirror;
floats are written with 17 significant digits so that every emitted
number re-parses to the in-memory value.  Runs are deterministic for a
fixed configuration and seed (default seed 42); no timestamps or other
environment state are emitted.

Exit codes: 0 success, 2 configuration error, 3 numeric invariant
failure (the failing invariant is named on stderr).
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import critical, estimation, ghz_noise, probes, tps
from .errors import SldkitError
from .states import MeasBasis

DEFAULT_SEED = 42


class ConfigError(Exception):
    """Invalid run configuration (maps to exit code 2)."""


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return "" if value is None else str(value)


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(payload, indent=2, sort_keys=True))
        fh.write("\n")


def _parse_float_list(text: str, what: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"could not parse {what}: {exc}") from exc
    if not values:
        raise ConfigError(f"{what} is empty")
    return values


def _parse_int_list(text: str, what: str) -> list[int]:
    return [int(round(x)) for x in _parse_float_list(text, what)]


def _load_matrix(entry, what: str) -> np.ndarray:
    """JSON matrices are nested arrays of [re, im] pairs."""
    try:
        arr = np.asarray(entry, dtype=float)
        if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
            raise ValueError(f"expected shape (n, n, 2), got {arr.shape}")
        return arr[..., 0] + 1j * arr[..., 1]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {what}: {exc}") from exc


# ---------------------------------------------------------------------------
# qfi command
# ---------------------------------------------------------------------------

def _qfi_quantities(family: estimation.StateFamily, rho0_diag: np.ndarray | None,
                    gen_in_basis: np.ndarray | None, structural=None,
                    fd_step: float | None = None) -> dict:
    """Lambda-independent quantities of a unitary family, evaluated at the
    anchor point.  rho0_diag / gen_in_basis give the representation in the
    rho0 eigenbasis needed for the spectral route and the TPS split;
    `structural` supplies an explicit TpsDecomposition instead."""
    h = fd_step
    rep = estimation.prop1_decompose(family, 0.0, h)
    out = {
        "qfi_trace": rep.qfi,
        "coh_curvature": rep.curvature,
        "f_total": rep.f_total,
        "qfi_spectral": None,
        "fi2": None,
        "d2m": None,
    }
    if rho0_diag is not None and gen_in_basis is not None:
        out["qfi_spectral"] = estimation.qfi_spectral(np.diag(rho0_diag), gen_in_basis)
    else:
        out["qfi_spectral"] = estimation.qfi_spectral(family.rho0, family.generator)

    decomposition = structural
    if decomposition is None and rho0_diag is not None and rho0_diag.size % 2 == 0:
        try:
            basis_family = estimation.StateFamily.unitary(np.diag(rho0_diag), gen_in_basis)
            sr = estimation.sld_of_family(basis_family, 0.0, h)
            decomposition = tps.tps_decompose(sr)
            family = basis_family
        except SldkitError:
            decomposition = None
    if decomposition is not None:
        split = tps.qfi_split(family, decomposition, 0.0, h)
        out["fi2"] = split.fi2
        out["d2m"] = split.mi_curvature
    return out


def _build_qfi_family(args):
    """Return (family, rho0_diag, gen_in_basis, structural_tps)."""
    if args.family == "qubit":
        if args.z is None or args.delta is None or args.gamma_q is None:
            raise ConfigError("qubit family needs --z, --delta and --gamma")
        if not 0.0 <= args.z <= 1.0:
            raise ConfigError(f"--z must lie in [0, 1], got {args.z}")
        if args.gamma_q <= 0:
            raise ConfigError("--gamma must be positive")
        probe = probes.BlochQubit(z=args.z, delta=args.delta, gamma=args.gamma_q)
        fam = probe.family()
        return fam, np.diag(fam.rho0).real, fam.generator, None
    if args.family == "ghz":
        if args.qubits is None:
            raise ConfigError("ghz family needs --qubits")
        if args.pure:
            mixture = probes.GhzMixture.pure(args.qubits)
        elif args.weights:
            w = _parse_float_list(args.weights, "--weights")
            if len(w) != args.qubits or abs(sum(w) - 1.0) > 1e-9:
                raise ConfigError("--weights must list M class weights summing to 1")
            mixture = probes.GhzMixture(args.qubits, np.asarray(w))
        else:
            raise ConfigError("ghz family needs --pure or --weights")
        return (probes.ghz_family(mixture), None, None,
                probes.ghz_structural_tps(args.qubits))
    if args.family == "matrix":
        if not args.matrix_file:
            raise ConfigError("matrix family needs --matrix-file")
        try:
            with open(args.matrix_file) as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read matrix file: {exc}") from exc
        if not isinstance(payload, dict) or "rho0" not in payload or "generator" not in payload:
            raise ConfigError("matrix file must contain 'rho0' and 'generator'")
        rho0 = _load_matrix(payload["rho0"], "rho0")
        gen = _load_matrix(payload["generator"], "generator")
        fam = estimation.StateFamily.unitary(rho0, gen)
        # representation in the rho0 eigenbasis, for the spectral/TPS routes
        from . import linalg
        dec = linalg.eigh(rho0)
        gen_rot = dec.eigenvectors.conj().T @ gen @ dec.eigenvectors
        return fam, dec.eigenvalues, gen_rot, None
    raise ConfigError(f"unknown family {args.family!r}")


def cmd_qfi(args) -> int:
    lambdas = _parse_float_list(args.lambdas, "--lambdas")
    family, rho0_diag, gen_rot, structural = _build_qfi_family(args)
    values = _qfi_quantities(family, rho0_diag, gen_rot, structural, args.fd_step)
    header = ["lambda", "qfi_trace", "qfi_spectral", "coh_curvature",
              "f_total", "fi2", "d2m"]
    rows = [[lam, values["qfi_trace"], values["qfi_spectral"],
             values["coh_curvature"], values["f_total"],
             values["fi2"], values["d2m"]] for lam in lambdas]
    if args.format == "csv":
        _write_csv(args.output, header, rows)
    else:
        _write_json(args.output, {
            "command": "qfi",
            "seed": args.seed,
            "rows": [dict(zip(header, row)) for row in rows],
        })
    return 0


# ---------------------------------------------------------------------------
# noise-sweep command
# ---------------------------------------------------------------------------

def _sweep_m_list(args) -> list[int]:
    if args.m_list:
        m_list = _parse_int_list(args.m_list, "--m-list")
    else:
        if args.m_stop < args.m_start or args.m_step <= 0:
            raise ConfigError("invalid --m-start/--m-stop/--m-step range")
        m_list = list(range(args.m_start, args.m_stop + 1, args.m_step))
    if len(m_list) < 2:
        raise ConfigError("sweep needs at least two sizes for the slope fit")
    if sorted(m_list) != m_list or min(m_list) < 1:
        raise ConfigError("--m-list must be ascending positive integers")
    return m_list


def cmd_noise_sweep(args) -> int:
    if args.channel not in ("transverse", "parallel"):
        raise ConfigError(f"unknown channel {args.channel!r}")
    if args.omega <= 0 or args.gamma <= 0:
        raise ConfigError("omega and gamma must be positive")
    m_list = _sweep_m_list(args)

    if args.channel == "transverse" and args.jobs > 1:
        # sweep points are independent; collect in input order
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(
                lambda m: ghz_noise.transverse_point(m, args.omega, args.gamma), m_list
            ))
        slope = ghz_noise._fit_top_half([r.qubits for r in rows],
                                        [r.inv_qfi_rate for r in rows])
    elif args.channel == "transverse":
        rows, slope = ghz_noise.transverse_sweep(m_list, args.omega, args.gamma)
    else:
        rows, slope = ghz_noise.parallel_sweep(m_list, args.omega, args.gamma)

    header = ["M", "inv_qfi_rate", "inv_coh_rate", "analytic_bound", "fitted_slope"]
    table = [[r.qubits, r.inv_qfi_rate, r.inv_coh_rate, r.bound, None] for r in rows]
    table[-1][-1] = slope
    if args.format == "csv":
        _write_csv(args.output, header, table)
    else:
        _write_json(args.output, {
            "command": "noise-sweep",
            "channel": args.channel,
            "seed": args.seed,
            "fitted_slope": slope,
            "rows": [dict(zip(header[:4], row[:4])) for row in table],
        })
    return 0


# ---------------------------------------------------------------------------
# ceqe-scan command
# ---------------------------------------------------------------------------

def cmd_ceqe_scan(args) -> int:
    sizes = _parse_int_list(args.sizes, "--sizes")
    if any(s > critical.SITE_LIMIT for s in sizes):
        raise ConfigError(f"sizes must be <= {critical.SITE_LIMIT}")
    if any(s < 2 for s in sizes) or sorted(sizes) != sizes:
        raise ConfigError("--sizes must be ascending integers >= 2")
    if args.points < 2 or args.lam_max <= args.lam_min:
        raise ConfigError("invalid lambda grid")
    grid = np.linspace(args.lam_min, args.lam_max, args.points)

    fit = critical.critical_scan(
        lambda size: critical.tfim_family(size, coupling=args.coupling,
                                          periodic=args.periodic),
        sizes, grid,
    )
    if fit.rejected:
        print("warning: flat scan, scaling fit rejected", file=sys.stderr)

    header = ["L", "lambda_star", "qfi_peak", "qfi_peak_over_L"]
    rows = [[s, ls, pk, pk / s]
            for s, ls, pk in zip(fit.sizes, fit.lambda_stars, fit.peaks)]
    summary = {
        "exponent": None if fit.rejected else fit.exponent,
        "residual": None if fit.rejected else fit.residual,
        "super_extensive": fit.super_extensive,
        "rejected": fit.rejected,
    }
    if args.format == "csv":
        _write_csv(args.output, header, rows)
        _write_json(args.output + ".summary.json", summary)
    else:
        _write_json(args.output, {
            "command": "ceqe-scan",
            "seed": args.seed,
            "rows": [dict(zip(header, row)) for row in rows],
            "summary": summary,
        })
    return 0


# ---------------------------------------------------------------------------
# parser and entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sldkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file with option defaults")
        p.add_argument("--output", required=False, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    q = sub.add_parser("qfi", help="estimation quantities of a probe family")
    common(q)
    q.add_argument("--family", choices=("qubit", "ghz", "matrix"), default=None)
    q.add_argument("--z", type=float, default=None)
    q.add_argument("--delta", type=float, default=None)
    q.add_argument("--gamma", dest="gamma_q", type=float, default=None)
    q.add_argument("--qubits", "--M", dest="qubits", type=int, default=None)
    q.add_argument("--pure", action="store_true")
    q.add_argument("--weights", default=None)
    q.add_argument("--matrix-file", default=None)
    q.add_argument("--lambdas", default="0.0")
    q.add_argument("--fd-step", type=float, default=None)
    q.set_defaults(run=cmd_qfi)

    n = sub.add_parser("noise-sweep", help="noisy GHZ scaling sweep")
    common(n)
    n.add_argument("--channel", default=None)
    n.add_argument("--omega", type=float, default=1.0)
    n.add_argument("--gamma", type=float, default=1.0)
    n.add_argument("--m-start", type=int, default=10)
    n.add_argument("--m-stop", type=int, default=100)
    n.add_argument("--m-step", type=int, default=10)
    n.add_argument("--m-list", default=None)
    n.set_defaults(run=cmd_noise_sweep)

    c = sub.add_parser("ceqe-scan", help="finite-size criticality scan")
    common(c)
    c.add_argument("--sizes", default="6,8,10")
    c.add_argument("--lam-min", type=float, default=0.6)
    c.add_argument("--lam-max", type=float, default=1.4)
    c.add_argument("--points", type=int, default=30)
    c.add_argument("--coupling", type=float, default=1.0)
    c.add_argument("--periodic", action="store_true")
    c.set_defaults(run=cmd_ceqe_scan)

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse once to find --config, fold its values in as defaults, reparse."""
    pre = parser.parse_args(argv)
    if not pre.config:
        return pre
    try:
        with open(pre.config) as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(payload, dict):
        raise ConfigError("config must be a JSON object")
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    subparser = sub_actions[0].choices[pre.command]
    known = {a.dest for a in subparser._actions}
    unknown = set(payload) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    subparser.set_defaults(**payload)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.output is None:
            raise ConfigError("--output is required")
        return args.run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SldkitError as exc:
        print(f"numeric invariant failure [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
