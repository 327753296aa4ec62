"""Command-line front end.

Subcommands::

    cansys validate DESCRIPTOR...
    cansys m DESCRIPTOR --z 2j,1+1j
    cansys rho DESCRIPTOR --t lin:-10:10:201
    cansys transform SOURCE --kind string -o out.json
    cansys verify --theorem string --scenario kac_alpha1
    cansys sweep A.json B.json --z geom:1j:1:1e4:9

Every option may also come from ``--config FILE.json`` whose keys are the
option names with dashes replaced by underscores; flags given on the
command line win.  Exit codes: 0 success, 1 failed check or invalid
descriptor, 2 non-convergence, inconclusive verdict or usage/I-O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, scenarios
from ._parallel import parallel_map
from .hamiltonian import (
    Hamiltonian,
    Potential,
    SampledPrimitive,
    geometric_nodes,
    validate,
)
from .hamiltonian import from_json as hamiltonian_from_json
from .spectral import DEFAULT_EPS, stieltjes_invert
from .transforms import (
    IndefiniteStringData,
    StringData,
    flip,
    gauge_transform,
    indefinite_string_to_canonical,
    scale,
    string_to_canonical,
    trace_normalize,
)
from .weyl import QUADRATURE_POLICY, DomainError, TruncationPolicy, m_values

__all__ = ["RunConfig", "main", "parse_grid", "load_system", "EXIT_OK", "EXIT_FAIL", "EXIT_NONCONVERGENCE"]

SCHEMA_VERSION = 1
EXIT_OK, EXIT_FAIL, EXIT_NONCONVERGENCE = 0, 1, 2
TRANSFORM_KINDS = ("string", "indefinite_string", "gauge", "trace_normalize", "scale", "flip")


class UsageError(ValueError):
    """Bad configuration or descriptor; reported on stderr with exit code 2."""


@dataclass
class RunConfig:
    """Resolved options of one invocation."""

    command: str
    inputs: list = field(default_factory=list)
    grid: np.ndarray | None = None
    ladder: np.ndarray | None = None
    tol: float | None = None
    output: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.grid is not None and len(self.grid) == 0:
            raise UsageError("grid is empty")
        if self.ladder is not None and len(self.ladder) == 0:
            raise UsageError("ladder is empty")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("tolerance must be positive")


# ---------------------------------------------------------------------------
# grids and descriptors


def parse_grid(spec, kind: str = "complex") -> np.ndarray:
    """Grid from a string or list.

    Accepted forms: a comma list (``"2j,1+1j"``), ``"geom:MU:RMIN:RMAX:N"``
    (the points ``r * MU`` for ``N`` geometric ``r``) and ``"lin:LO:HI:N"``.
    Python complex literals are used (``1+2j``); ``i`` is accepted for ``j``.
    """
    conv = complex if kind == "complex" else float
    if isinstance(spec, (list, tuple)):
        return np.array([_number(v, conv) for v in spec])
    spec = str(spec).strip()
    head, _, rest = spec.partition(":")
    try:
        if head == "geom":
            mu, lo, hi, n = rest.split(":")
            r = np.geomspace(float(lo), float(hi), int(n))
            return r * _number(mu, conv)
        if head == "lin":
            lo, hi, n = rest.split(":")
            return np.linspace(float(lo), float(hi), int(n)).astype(conv)
        return np.array([_number(v, conv) for v in spec.split(",") if v.strip()])
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {spec!r}: {exc}") from None


def _number(v, conv):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return conv(complex(float(v[0]), float(v[1])))
    if isinstance(v, (int, float, complex)):
        return conv(v)
    return conv(str(v).strip().replace(" ", "").replace("i", "j"))


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from None


def load_system(path):
    """Hamiltonian and optional potential described by a JSON file.

    The file is a Hamiltonian descriptor (``form``/``params``/``L``), possibly
    with a potential under ``"Q"``, or a string descriptor with
    ``"kind": "string"`` or ``"kind": "indefinite_string"``, which is
    converted to its canonical system.
    """
    obj = _read_json(path)
    base = Path(path).parent
    try:
        kind = obj.get("kind", "hamiltonian")
        if kind == "string":
            return string_to_canonical(StringData.from_json(obj, base)), None
        if kind == "indefinite_string":
            return indefinite_string_to_canonical(IndefiniteStringData.from_json(obj, base)), None
        if kind != "hamiltonian":
            raise UsageError(f"{path}: unknown descriptor kind {kind!r}")
        Q = Potential.from_json(obj["Q"]) if "Q" in obj else None
        return hamiltonian_from_json(obj, base), Q
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: malformed descriptor ({type(exc).__name__}: {exc})") from None


def _sampled(H: Hamiltonian, x_max: float, per_octave: int = 16) -> SampledPrimitive:
    """Serialisable stand-in for a Hamiltonian without a JSON form."""
    top = x_max if math.isinf(H.L) else min(x_max, H.L)
    grid = geometric_nodes(top * 1e-12, top, per_octave)
    extra = np.asarray(H.breakpoints(), dtype=float)
    grid = np.union1d(grid, extra[(extra > 0) & (extra < top)])
    A, B, C = H.primitives(grid)
    return SampledPrimitive(grid, A, B, C, L=H.L)


def _descriptor(H: Hamiltonian, x_max: float) -> dict:
    try:
        out = H.to_json()
    except TypeError:
        out = _sampled(H, x_max).to_json()
    if H.meta:
        out["meta"] = H.meta
    return out


# ---------------------------------------------------------------------------
# output


def _fmt(v: float) -> str:
    return "%.12e" % v


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, output: str | None) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(output).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {output}: {exc.strerror}") from None


def _complex_json(v: complex):
    return [float(_fmt(v.real)), float(_fmt(v.imag))]


# ---------------------------------------------------------------------------
# commands


def cmd_validate(cfg: RunConfig, args) -> int:
    reports = []
    for path in cfg.inputs:
        H, _ = load_system(path)
        reports.append((str(path), validate(H)))
    if cfg.format == "json":
        text = _json_text(
            {"schema_version": SCHEMA_VERSION, "reports": [{"descriptor": p, **r.to_dict()} for p, r in reports]}
        )
    else:
        lines = []
        for p, r in reports:
            lines.append(f"{p}: {'valid' if r.valid else 'INVALID'}")
            lines += [f"  violation: {v}" for v in r.violations]
            lines += [f"  warning: {w}" for w in r.warnings]
        text = "\n".join(lines) + "\n"
    _emit(text, cfg.output)
    return EXIT_OK if all(r.valid for _, r in reports) else EXIT_FAIL


def _policy(args, base: TruncationPolicy | None = None) -> TruncationPolicy:
    policy = base or TruncationPolicy()
    kw = {k: getattr(args, k) for k in ("rtol", "atol") if getattr(args, k, None) is not None}
    return TruncationPolicy(**{**policy.__dict__, **kw})


def _m_rows(path, z, policy):
    H, Q = load_system(path)
    v, r, _, conv = m_values(H, z, policy, strict=False, Q=Q)
    return v, r, conv


def _m_output(cfg: RunConfig, blocks, with_name: bool) -> str:
    if cfg.format == "json":
        rows = []
        for name, z, v, r, conv in blocks:
            for zi, vi, ri, ci in zip(z, v, r, conv):
                row = {"z": _complex_json(zi), "m": _complex_json(vi), "radius": float(_fmt(ri)), "converged": bool(ci)}
                if with_name:
                    row["descriptor"] = name
                rows.append(row)
        return _json_text({"schema_version": SCHEMA_VERSION, "command": cfg.command, "rows": rows})
    header = (["descriptor"] if with_name else []) + ["z_re", "z_im", "m_re", "m_im", "radius"]
    rows = []
    for name, z, v, r, _ in blocks:
        for zi, vi, ri in zip(z, v, r):
            rows.append(([name] if with_name else []) + [zi.real, zi.imag, vi.real, vi.imag, float(ri)])
    return _csv_text(header, rows)


def _report_nonconvergence(name: str, count: int, total: int) -> None:
    print(f"cansys: {name}: {count} of {total} m-values did not reach the tolerance", file=sys.stderr)


def cmd_m(cfg: RunConfig, args) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("m takes exactly one descriptor; use sweep for several")
    z = cfg.grid
    v, r, conv = _m_rows(cfg.inputs[0], z, _policy(args))
    _emit(_m_output(cfg, [(str(cfg.inputs[0]), z, v, r, conv)], False), cfg.output)
    if not conv.all():
        _report_nonconvergence(str(cfg.inputs[0]), int((~conv).sum()), conv.size)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    z = cfg.grid
    policy = _policy(args)
    results = parallel_map(lambda p: _m_rows(p, z, policy), cfg.inputs)
    blocks = [(str(p), z, v, r, c) for p, (v, r, c) in zip(cfg.inputs, results)]
    _emit(_m_output(cfg, blocks, True), cfg.output)
    for name, _, _, _, conv in blocks:
        if not conv.all():
            _report_nonconvergence(name, int((~conv).sum()), conv.size)
    return EXIT_OK if all(b[4].all() for b in blocks) else EXIT_NONCONVERGENCE


def cmd_rho(cfg: RunConfig, args) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("rho takes exactly one descriptor")
    H, Q = load_system(cfg.inputs[0])
    policy = _policy(args, QUADRATURE_POLICY)
    failed, total = [], []

    def m(z):
        v, _, _, conv = m_values(H, z, policy, strict=False, Q=Q)
        failed.append(int((~conv).sum()))
        total.append(conv.size)
        return v

    eps = tuple(parse_grid(args.eps, "real")) if args.eps else DEFAULT_EPS
    rho = stieltjes_invert(m, cfg.grid.real, eps)
    if cfg.format == "json":
        text = _json_text(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "rho",
                "t": [float(_fmt(t)) for t in rho.breakpoints],
                "rho": [float(_fmt(v)) for v in rho.values],
                "atoms": [[float(_fmt(a)), float(_fmt(w))] for a, w in rho.atoms],
            }
        )
    else:
        text = _csv_text(["t", "rho"], zip(rho.breakpoints.tolist(), rho.values.tolist()))
    _emit(text, cfg.output)
    if sum(failed):
        _report_nonconvergence(str(cfg.inputs[0]), sum(failed), sum(total))
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_transform(cfg: RunConfig, args) -> int:
    if len(cfg.inputs) != 1:
        raise UsageError("transform takes exactly one source descriptor")
    path = cfg.inputs[0]
    kind = args.kind
    if kind not in TRANSFORM_KINDS:
        raise UsageError(f"unsupported transform kind {kind!r}; choose from {', '.join(TRANSFORM_KINDS)}")
    x_max = args.x_max
    obj = _read_json(path)
    base = Path(path).parent
    try:
        if kind == "string":
            H = string_to_canonical(StringData.from_json(obj, base))
        elif kind == "indefinite_string":
            H = indefinite_string_to_canonical(IndefiniteStringData.from_json(obj, base))
        else:
            H0, Q = load_system(path)
            if kind == "gauge":
                if Q is None:
                    raise UsageError(f"{path}: gauge transform needs a potential under 'Q'")
                H = gauge_transform(H0, Q, x_max=x_max)
            elif kind == "trace_normalize":
                H = trace_normalize(H0)[0]
            elif kind == "flip":
                H = flip(H0)
            else:
                H = scale(H0, args.r1, args.r2, args.r3)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: cannot apply {kind} ({exc})") from None
    out = _descriptor(H, x_max)
    # the output must parse back
    hamiltonian_from_json(out, base)
    _emit(_json_text(out), cfg.output)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    if not args.theorem:
        raise UsageError("verify needs --theorem")
    if args.theorem not in asymptotics.THEOREMS:
        raise UsageError(f"unknown theorem {args.theorem!r}; choose from {', '.join(asymptotics.THEOREMS)}")
    if not args.scenario:
        raise UsageError("verify needs --scenario")
    try:
        sc = scenarios.get(args.scenario)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    probes = tuple(parse_grid(args.probes)) if args.probes else asymptotics.PROBES
    report = asymptotics.verify(args.theorem, sc, ladder=cfg.ladder, tol=cfg.tol, probes=probes)
    text = report.table() + "\n" if cfg.format == "table" else _json_text(report.to_dict())
    _emit(text, cfg.output)
    return {"pass": EXIT_OK, "fail": EXIT_FAIL}.get(report.status, EXIT_NONCONVERGENCE)


COMMANDS = {
    "validate": cmd_validate,
    "m": cmd_m,
    "rho": cmd_rho,
    "transform": cmd_transform,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cansys", description="m-functions and asymptotics of canonical systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats, default_format):
        p.add_argument("--config", help="JSON file with default option values")
        p.add_argument("-o", "--output", help="output path (default stdout)")
        p.add_argument("--format", choices=formats, default=default_format)

    def descriptors(p, many):
        p.add_argument("inputs", nargs="*", metavar="DESCRIPTOR", help="JSON descriptor" + ("s" if many else ""))

    def accuracy(p):
        p.add_argument("--rtol", type=float, help="relative tolerance of the m-function")
        p.add_argument("--atol", type=float, help="absolute tolerance of the m-function")

    p = sub.add_parser("validate", help="check descriptors against the structural hypotheses")
    descriptors(p, True)
    common(p, ("text", "json"), "text")

    p = sub.add_parser("m", help="tabulate the m-function on a z-grid")
    descriptors(p, False)
    p.add_argument("--z", help="z-grid: comma list or geom:MU:RMIN:RMAX:N")
    accuracy(p)
    common(p, ("csv", "json"), "csv")

    p = sub.add_parser("sweep", help="m-function of several descriptors on a shared z-grid")
    descriptors(p, True)
    p.add_argument("--z", help="z-grid: comma list or geom:MU:RMIN:RMAX:N")
    accuracy(p)
    common(p, ("csv", "json"), "csv")

    p = sub.add_parser("rho", help="spectral function by Stieltjes inversion")
    descriptors(p, False)
    p.add_argument("--t", help="t-grid: comma list or lin:LO:HI:N")
    p.add_argument("--eps", help="decreasing relative smoothing levels, comma separated")
    accuracy(p)
    common(p, ("csv", "json"), "csv")

    p = sub.add_parser("transform", help="map a string, potential or Hamiltonian to a new descriptor")
    descriptors(p, False)
    p.add_argument("--kind", help=f"one of {', '.join(TRANSFORM_KINDS)}")
    p.add_argument("--r1", type=float, default=1.0, help="scale: argument stretch")
    p.add_argument("--r2", type=float, default=1.0, help="scale: spectral factor")
    p.add_argument("--r3", type=float, default=1.0, help="scale: value factor")
    p.add_argument("--x-max", type=float, default=1e4, help="extent of sampled outputs")
    common(p, ("json",), "json")

    p = sub.add_parser("verify", help="ratio table of a high-energy theorem on a named scenario")
    p.add_argument("--theorem", help=f"one of {', '.join(asymptotics.THEOREMS)}")
    p.add_argument("--scenario", help=f"one of {', '.join(scenarios.names())}")
    p.add_argument("--ladder", help="r-ladder: comma list or geom:1:RMIN:RMAX:N")
    p.add_argument("--tol", type=float, help="relative tolerance on the ratios")
    p.add_argument("--probes", help="comma list of probe points (default i, 2i, 1+i, -1+2i)")
    common(p, ("json", "table"), "json")
    return parser


def _parse(argv) -> argparse.Namespace:
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if known.config:
        conf = _read_json(known.config)
        if not isinstance(conf, dict):
            raise UsageError("config file must hold a JSON object")
        conf = {k.replace("-", "_"): v for k, v in conf.items() if k != "command"}
        for sp in parser._subparsers._group_actions[0].choices.values():
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in conf.items() if k in dests})
    return parser.parse_args(argv)


def _config(args) -> RunConfig:
    inputs = args.inputs if hasattr(args, "inputs") else []
    if isinstance(inputs, str):
        inputs = [inputs]
    if args.command != "verify" and not inputs:
        raise UsageError(f"{args.command} needs at least one descriptor")
    grid = None
    if args.command in ("m", "sweep"):
        if args.z is None:
            raise UsageError("--z is required")
        grid = parse_grid(args.z)
    elif args.command == "rho":
        if args.t is None:
            raise UsageError("--t is required")
        grid = parse_grid(args.t, "real").astype(complex)
    ladder = None
    if args.command == "verify" and args.ladder is not None:
        ladder = parse_grid(args.ladder, "real").real
    tol = getattr(args, "tol", None)
    return RunConfig(args.command, list(inputs), grid, ladder, tol, args.output, args.format)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _parse(argv)
        cfg = _config(args)
        return COMMANDS[cfg.command](cfg, args)
    except (UsageError, DomainError) as exc:
        print(f"cansys: error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
