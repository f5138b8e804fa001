"""Command-line surface: orbit dimensions, Gram matrices, the closed-form
grid, genericity sampling, Lie-closure verification, the non-Gaussianity
witness, finite-difference estimation, state sampling, and the dual-rail
CNOT demonstration.

Exit codes: 0 success; 1 quantitative mismatch (table2 / generic / cnot-demo);
2 parse or validation failure; 3 picture/kind mismatch; 4 truncation leakage.

Structured (--json) output is deterministic: sorted keys, floats rendered
with 17 significant digits, no timing fields. Elapsed time appears only in
the human rendering.
"""

from __future__ import annotations

import os

_threads = os.environ.get("ORBITDIM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
import hashlib
import json
import sys
import time

import numpy as np

from .dynamics import (
    EvolutionConfig,
    LeakageError,
    estimate_gram_matrix,
    sample_sphere_state,
)
from .fock import (
    DensityOperator,
    SparseKet,
    SparseOperator,
    ValidationError,
    basis_ket,
    outer,
)
from .generators import Group, lie_basis, verify_closure
from .orbit import (
    Exactness,
    Picture,
    PictureError,
    closed_form_report,
    cnot_demo,
    generic_dimension,
    gram_matrix,
    gram_mixed,
    nongaussianity_witness,
    orbit_dimension,
    rank_psd,
    uniform_phase_state,
)

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INVALID = 2
EXIT_PICTURE = 3
EXIT_LEAKAGE = 4


class StateFileError(ValidationError):
    """A state file failed to parse or validate."""


# --------------------------------------------------------------------------
# State files
# --------------------------------------------------------------------------


def load_state(path: str) -> SparseKet | DensityOperator:
    """Parse and validate a state file (kind "ket" or "density")."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise StateFileError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise StateFileError(f"{path}: top level must be an object")
    modes = doc.get("modes")
    if not isinstance(modes, int) or modes < 1:
        raise StateFileError(f"{path}: 'modes' must be a positive integer")
    kind = doc.get("kind")
    if kind == "ket":
        return _parse_ket(path, doc, modes)
    if kind == "density":
        return _parse_density(path, doc, modes)
    raise StateFileError(f"{path}: 'kind' must be \"ket\" or \"density\", got {kind!r}")


def _parse_occ(path: str, where: str, value, modes: int) -> tuple[int, ...]:
    if not isinstance(value, list) or len(value) != modes:
        raise StateFileError(f"{path}: {where} must be a list of {modes} integers")
    if any(not isinstance(n, int) or n < 0 for n in value):
        raise StateFileError(f"{path}: {where} entries must be nonnegative integers")
    return tuple(value)


def _parse_amp(path: str, where: str, item) -> complex:
    if not isinstance(item, dict) or not {"re", "im"} <= set(item):
        raise StateFileError(f"{path}: {where} must carry 're' and 'im' fields")
    re, im = item["re"], item["im"]
    if isinstance(re, bool) or isinstance(im, bool) or not isinstance(re, (int, float)) or not isinstance(im, (int, float)):
        raise StateFileError(f"{path}: {where} 're'/'im' must be numbers")
    return complex(re, im)


def _parse_ket(path: str, doc: dict, modes: int) -> SparseKet:
    items = doc.get("terms")
    if not isinstance(items, list):
        raise StateFileError(f"{path}: ket files need a 'terms' list")
    terms: dict[tuple[int, ...], complex] = {}
    for idx, item in enumerate(items):
        where = f"terms[{idx}]"
        if not isinstance(item, dict):
            raise StateFileError(f"{path}: {where} must be an object")
        occ = _parse_occ(path, f"{where}.occ", item.get("occ"), modes)
        if occ in terms:
            raise StateFileError(f"{path}: {where}: duplicate occupation {list(occ)}")
        terms[occ] = _parse_amp(path, where, item)
    try:
        return SparseKet(modes, terms)
    except ValidationError as exc:
        raise StateFileError(f"{path}: {exc}") from exc


def _parse_density(path: str, doc: dict, modes: int) -> DensityOperator:
    items = doc.get("entries")
    if not isinstance(items, list):
        raise StateFileError(f"{path}: density files need an 'entries' list")
    entries: dict[tuple[tuple[int, ...], tuple[int, ...]], complex] = {}
    for idx, item in enumerate(items):
        where = f"entries[{idx}]"
        if not isinstance(item, dict):
            raise StateFileError(f"{path}: {where} must be an object")
        bra = _parse_occ(path, f"{where}.bra", item.get("bra"), modes)
        ket = _parse_occ(path, f"{where}.ket", item.get("ket"), modes)
        if (bra, ket) in entries:
            raise StateFileError(f"{path}: {where}: duplicate (bra, ket) pair")
        entries[(bra, ket)] = _parse_amp(path, where, item)
    try:
        return DensityOperator.validate(SparseOperator(modes, entries))
    except ValidationError as exc:
        raise StateFileError(f"{path}: {exc}") from exc


def state_document(state: SparseKet | DensityOperator) -> dict:
    if isinstance(state, SparseKet):
        return {
            "modes": state.modes,
            "kind": "ket",
            "terms": [
                {"occ": list(occ), "re": amp.real, "im": amp.imag}
                for occ, amp in sorted(state.terms.items())
            ],
        }
    return {
        "modes": state.modes,
        "kind": "density",
        "entries": [
            {"bra": list(bra), "ket": list(ket), "re": amp.real, "im": amp.imag}
            for (bra, ket), amp in sorted(state.op.entries.items())
        ],
    }


def write_state_file(path: str, state: SparseKet | DensityOperator) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(render_json(state_document(state)))
        fh.write("\n")


def file_digest(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# --------------------------------------------------------------------------
# Rendering
# --------------------------------------------------------------------------


def render_json(value) -> str:
    """Deterministic JSON: sorted keys, floats at 17 significant digits."""
    if isinstance(value, dict):
        inner = ",".join(
            f"{json.dumps(str(k))}:{render_json(v)}" for k, v in sorted(value.items())
        )
        return "{" + inner + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(render_json(v) for v in value) + "]"
    if isinstance(value, np.ndarray):
        return render_json(value.tolist())
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if value is None:
        return "null"
    return json.dumps(str(value))


def _fmt(x: float) -> str:
    return f"{float(x):.6g}"


def _emit(args, payload: dict, lines: list[str], started: float) -> None:
    if getattr(args, "json", False):
        print(render_json(payload))
    else:
        for line in lines:
            print(line)
        print(f"elapsed: {time.perf_counter() - started:.3f} s")


def _spectrum_line(eigenvalues) -> str:
    return "spectrum: [" + ", ".join(_fmt(x) for x in eigenvalues) + "]"


def _input_block(path: str) -> dict:
    return {"path": path, "sha256": file_digest(path)}


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _load_for_picture(path: str, picture: Picture) -> SparseKet | DensityOperator:
    state = load_state(path)
    if isinstance(state, DensityOperator) and picture is not Picture.MIXED:
        raise PictureError(
            f"density state file requires --picture mixed, got {picture.value}"
        )
    return state


def cmd_dim(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    picture = Picture(args.picture)
    state = _load_for_picture(args.state, picture)
    result = rank_psd(gram_matrix(group, state, picture), args.tol)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "dim",
        "input": _input_block(args.state),
        "group": group.value,
        "picture": picture.value,
        "dimension": result.rank,
        "eigenvalues": list(result.eigenvalues),
        "tolerance_used": result.tolerance_used,
        "relative_tolerance_policy": result.relative,
    }
    lines = [
        f"state: {args.state} (sha256 {payload['input']['sha256'][:12]}...)",
        f"group: {group.value}  picture: {picture.value}",
        f"dimension: {result.rank}",
        f"tolerance: {_fmt(result.tolerance_used)}"
        + (" (relative policy 1e-8 * max(1, lambda_max))" if result.relative else " (absolute)"),
        _spectrum_line(result.eigenvalues),
    ]
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_gram(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    picture = Picture(args.picture)
    state = _load_for_picture(args.state, picture)
    gram = gram_matrix(group, state, picture)
    result = rank_psd(gram, args.tol)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "gram",
        "input": _input_block(args.state),
        "group": group.value,
        "picture": picture.value,
        "basis_labels": list(gram.basis.labels),
        "matrix": gram.values,
        "dimension": result.rank,
        "eigenvalues": list(result.eigenvalues),
        "tolerance_used": result.tolerance_used,
    }
    lines = [
        f"state: {args.state}",
        f"group: {group.value}  picture: {picture.value}  d: {gram.dim}",
        "basis: " + " ".join(gram.basis.labels),
        "matrix:",
    ]
    lines += ["  [" + ", ".join(_fmt(x) for x in row) + "]" for row in gram.values]
    lines += [f"dimension: {result.rank}", _spectrum_line(result.eigenvalues)]
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_table2(args) -> int:
    started = time.perf_counter()
    rows = closed_form_report(args.m_max, args.tol)
    failed = [r for r in rows if not r.passed]
    payload_rows = [
        {
            "family": r.family,
            "params": r.params,
            "group": r.group.value,
            "picture": r.picture.value,
            "m": r.modes,
            "closed_form": r.closed_value,
            "numerical": r.numerical,
            "exactness": r.exactness.value,
            "pass": r.passed,
        }
        for r in rows
    ]
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "table2",
        "m_max": args.m_max,
        "rows": payload_rows,
        "failures": len(failed),
    }
    if args.json:
        print(render_json(payload))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(
            ["family", "group", "picture", "m", "params", "closed_form", "numerical", "exactness", "pass"]
        )
        for r in rows:
            writer.writerow(
                [
                    r.family,
                    r.group.value,
                    r.picture.value,
                    r.modes,
                    r.params,
                    r.closed_value,
                    r.numerical,
                    "exact" if r.exactness is Exactness.EXACT else "<=",
                    "PASS" if r.passed else "FAIL",
                ]
            )
    else:
        header = f"{'family':<22}{'group':<6}{'pict':<8}{'m':<3}{'closed':<8}{'num':<6}{'kind':<7}result"
        print(header)
        for r in rows:
            kind = "exact" if r.exactness is Exactness.EXACT else "<="
            print(
                f"{r.family:<22}{r.group.value:<6}{r.picture.value:<8}{r.modes:<3}"
                f"{r.closed_value:<8}{r.numerical:<6}{kind:<7}"
                + ("PASS" if r.passed else "FAIL")
                + f"  {r.params}"
            )
        print(f"rows: {len(rows)}  failures: {len(failed)}")
        print(f"elapsed: {time.perf_counter() - started:.3f} s")
    return EXIT_MISMATCH if failed else EXIT_OK


def cmd_generic(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    picture = Picture(args.picture)
    expected = generic_dimension(group, args.m, args.N, picture)
    uniform_dim = orbit_dimension(group, uniform_phase_state(args.m, args.N), picture, args.tol).rank
    dims: list[int] = []
    if args.N == 0:
        # the cutoff-0 sphere is the vacuum phase circle; nothing to sample
        dims = [orbit_dimension(group, basis_ket((0,) * args.m), picture, args.tol).rank]
    else:
        for s in range(args.seeds):
            psi = sample_sphere_state(args.m, args.N, args.seed0 + s)
            dims.append(orbit_dimension(group, psi, picture, args.tol).rank)
    hits = sum(1 for d in dims if d == expected)
    hit_rate = hits / len(dims)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "generic",
        "group": group.value,
        "picture": picture.value,
        "m": args.m,
        "N": args.N,
        "expected": expected,
        "samples": len(dims),
        "seed0": args.seed0,
        "dimensions": dims,
        "hits": hits,
        "hit_rate": hit_rate,
        "uniform_phase_dimension": uniform_dim,
    }
    lines = [
        f"group: {group.value}  picture: {picture.value}  m: {args.m}  N: {args.N}",
        f"expected generic dimension: {expected}",
        f"samples: {len(dims)}  hits: {hits}  hit rate: {hit_rate:.0%}",
        f"uniform-phase state dimension: {uniform_dim}",
    ]
    _emit(args, payload, lines, started)
    return EXIT_OK if hit_rate == 1.0 else EXIT_MISMATCH


def cmd_closure(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    report = verify_closure(group, args.m)
    d = len(lie_basis(group, args.m))
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "closure",
        "group": group.value,
        "m": args.m,
        "basis_size": d,
        "pairs": d * (d - 1) // 2,
        "probes": report.probe_count,
        "max_residual": report.max_residual,
        "min_normal_eigenvalue": report.min_normal_eigenvalue,
    }
    verdict = "< 1e-10" if report.max_residual < 1e-10 else ">= 1e-10 (NOT closed at probe resolution)"
    lines = [
        f"group: {group.value}  m: {args.m}  basis size: {d}  probes: {report.probe_count}",
        f"max residual: {report.max_residual:.3e} ({verdict})",
        f"min normal-matrix eigenvalue: {report.min_normal_eigenvalue:.3e}",
    ]
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_witness(args) -> int:
    started = time.perf_counter()
    state = load_state(args.state)
    if isinstance(state, DensityOperator):
        raise PictureError("the witness requires a pure-state (ket) file")
    result = nongaussianity_witness(state, args.tol)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "witness",
        "input": _input_block(args.state),
        "dimension": result.dimension,
        "threshold": result.threshold,
        "witnessed": result.witnessed,
        "eigenvalues": list(result.rank.eigenvalues),
        "tolerance_used": result.rank.tolerance_used,
    }
    comparator = ">" if result.witnessed else "<="
    lines = [
        f"state: {args.state}",
        f"gaussian-orbit dimension: {result.dimension}  threshold m(m+3): {result.threshold}",
        f"witnessed: {str(result.witnessed).lower()} ({result.dimension} {comparator} {result.threshold})",
    ]
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_estimate(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    state = load_state(args.state)
    rho = outer(state) if isinstance(state, SparseKet) else state
    cfg = EvolutionConfig(buffer=args.buffer, step=getattr(args, "h"), leakage_tolerance=args.leakage_tol)
    estimated = estimate_gram_matrix(rho, group, cfg)
    direct = gram_mixed(group, rho).values
    dev = np.abs(estimated.values - direct)
    max_dev = float(dev.max()) if dev.size else 0.0
    labels = lie_basis(group, rho.modes).labels
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "estimate",
        "input": _input_block(args.state),
        "group": group.value,
        "step": cfg.step,
        "buffer": cfg.buffer,
        "max_abs_deviation": max_dev,
    }
    lines = [
        f"state: {args.state}  group: {group.value}",
        f"step h: {_fmt(cfg.step)}  buffer: {cfg.buffer}",
        f"max |estimated - direct| over all (I, J): {max_dev:.6e}",
    ]
    if args.details:
        detail = []
        for i, li in enumerate(labels):
            for j in range(i, len(labels)):
                detail.append(
                    {
                        "I": li,
                        "J": labels[j],
                        "direct": float(direct[i, j]),
                        "estimate": float(estimated.values[i, j]),
                        "coarse": float(estimated.coarse[i, j]),
                        "fine": float(estimated.fine[i, j]),
                    }
                )
        payload["entries"] = detail
        lines.append(f"{'I':<8}{'J':<8}{'direct':>14}{'estimate':>14}{'|dev|':>12}")
        for row in detail:
            lines.append(
                f"{row['I']:<8}{row['J']:<8}{row['direct']:>14.6g}{row['estimate']:>14.6g}"
                f"{abs(row['estimate'] - row['direct']):>12.3e}"
            )
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_sample(args) -> int:
    started = time.perf_counter()
    psi = sample_sphere_state(args.m, args.N, args.seed)
    write_state_file(args.out, psi)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "sample",
        "m": args.m,
        "N": args.N,
        "seed": args.seed,
        "out": args.out,
        "terms": len(psi.terms),
        "norm": psi.norm(),
        "sha256": file_digest(args.out),
    }
    lines = [
        f"wrote {args.out}: {len(psi.terms)} terms, norm {psi.norm():.12f}",
        f"m: {args.m}  N: {args.N}  seed: {args.seed}",
    ]
    _emit(args, payload, lines, started)
    return EXIT_OK


def cmd_cnot_demo(args) -> int:
    started = time.perf_counter()
    group = Group(args.group)
    report = cnot_demo(group, args.tol)
    expected_pair = (38, 37)
    matches_reference = (report.dim_plus_zero, report.dim_bell) == expected_pair
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": "cnot-demo",
        "group": group.value,
        "picture": "ketbra",
        "dim_plus_zero": report.dim_plus_zero,
        "dim_bell": report.dim_bell,
        "distinct": report.distinct,
        "verdict": report.verdict,
    }
    lines = [
        f"group: {group.value}  picture: ketbra",
        f"|+0>_L  = (|1,0,1,0> + |1,0,0,1>)/sqrt(2): dimension {report.dim_plus_zero}",
        f"|Phi+>_L = (|1,0,1,0> + |0,1,0,1>)/sqrt(2): dimension {report.dim_bell}",
        f"verdict: {report.verdict}",
    ]
    _emit(args, payload, lines, started)
    if group is Group.GO and not matches_reference:
        return EXIT_MISMATCH
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser
# --------------------------------------------------------------------------

_GROUPS = [g.value for g in Group]
_PICTURES = [p.value for p in Picture]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitdim",
        description="Orbit dimensions of multimode bosonic states under linear and Gaussian optics groups.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="structured deterministic output")
    common.add_argument("--tol", type=float, default=None, help="absolute rank tolerance (default: 1e-8 * max(1, lambda_max))")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", parents=[common], help="orbit dimension of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--group", required=True, choices=_GROUPS)
    p.add_argument("--picture", required=True, choices=_PICTURES)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("gram", parents=[common], help="print the Gram matrix of a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--group", required=True, choices=_GROUPS)
    p.add_argument("--picture", required=True, choices=_PICTURES)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("table2", parents=[common], help="recompute the closed-form dimension grid")
    p.add_argument("--m-max", dest="m_max", type=int, default=4)
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.set_defaults(func=cmd_table2)

    p = sub.add_parser("generic", parents=[common], help="sampled genericity check")
    p.add_argument("--group", required=True, choices=_GROUPS)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--picture", required=True, choices=_PICTURES)
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--seed0", "--seed", dest="seed0", type=int, default=0)
    p.set_defaults(func=cmd_generic)

    p = sub.add_parser("closure", parents=[common], help="verify Lie-algebra closure numerically")
    p.add_argument("--group", required=True, choices=_GROUPS)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_closure)

    p = sub.add_parser("witness", parents=[common], help="non-Gaussianity witness for a ket file")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("estimate", parents=[common], help="finite-difference Gram estimation vs direct")
    p.add_argument("--state", required=True)
    p.add_argument("--group", required=True, choices=_GROUPS)
    p.add_argument("--h", type=float, default=1e-3, help="finite-difference step")
    p.add_argument("--buffer", type=int, default=16, help="photon buffer above the state support")
    p.add_argument("--leakage-tol", dest="leakage_tol", type=float, default=1e-6)
    p.add_argument("--details", action="store_true", help="per-entry detail")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sample", parents=[common], help="write a seeded random sphere state")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("cnot-demo", parents=[common], help="dual-rail CNOT impossibility demonstration")
    p.add_argument("--group", choices=_GROUPS, default=Group.GO.value)
    p.set_defaults(func=cmd_cnot_demo)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LeakageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEAKAGE
    except PictureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PICTURE
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
