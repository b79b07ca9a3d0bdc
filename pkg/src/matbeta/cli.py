"""Command line front end.

Subcommands::

    matbeta eval    --dist beta1-dnc --m 1 --q 1 --r 3 --s 5 --omega1 1.2 --omega2 0.7 --point 0.4
    matbeta sample  --dist beta1 --m 2 --q 1 --r 1 --s 3 --n 1000 --seed 7 --format csv
    matbeta tables  --kind invariant --kmax 2 --seed 0
    matbeta verify  --seed 0 --n 50000

Matrices are given as a scalar (multiple of the identity), ``diag:a,b,...``
or ``file:path`` (CSV, header optional, or JSON). A JSON file may also hold a
spectral point ``{"eigenvalues": [...], "frame": [[...]]}``.

Settings resolve as command line flag, then ``--config`` JSON file, then
built-in default. Every output embeds the resolved configuration.

Exit codes: 0 ok, 2 invalid input, 3 numerical failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import warnings

import numpy as np

from .betadist import EVALUATORS
from .errors import NumericalError, TruncationWarning, ValidationError
from .hypermat import SeriesControl
from .invariant import InvariantTable, build_invariant_table, default_table, load_fixture
from .randmat import beta1_sample, beta2_sample, eigdecomp_rank_q, map_blocks
from .spectral import BetaParams, SpectralPoint
from .verify import run_suite
from .zonal import build_zonal_table, dump_tables

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4

DEFAULTS = {
    "m": 1,
    "q": None,
    "r": None,
    "s": None,
    "omega1": None,
    "omega2": None,
    "kmax": 3,
    "tail_tol": 1e-8,
    "seed": 0,
    "n": None,
    "workers": None,
    "format": "json",
    "out": None,
    "dist": None,
    "point": None,
    "kind": "invariant",
    "table": "bootstrap",
}

COMMON = ["m", "q", "r", "s", "omega1", "omega2", "kmax", "tail_tol", "seed", "n",
          "workers", "format", "out"]


# input parsing ------------------------------------------------------------------

def _read_matrix_file(path: str):
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        return json.loads(text)
    rows = []
    for row in csv.reader(io.StringIO(text)):
        if not row:
            continue
        try:
            rows.append([float(x) for x in row])
        except ValueError:
            if rows:
                raise ValidationError(f"non-numeric row in {path}: {row}") from None
            continue  # header
    return rows


def parse_matrix(spec, m: int, name: str):
    """Scalar, ``diag:...`` or ``file:...`` -> ``m x m`` array (or spectral dict)."""
    if spec is None:
        return None
    if isinstance(spec, (int, float)):
        return float(spec) * np.eye(m)
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    if isinstance(spec, dict):
        return spec
    spec = str(spec).strip()
    if spec.startswith("diag:"):
        try:
            vals = [float(x) for x in spec[5:].split(",") if x.strip()]
        except ValueError:
            raise ValidationError(f"{name}: cannot parse {spec!r}") from None
        if len(vals) != m:
            raise ValidationError(f"{name}: diag needs {m} entries, got {len(vals)}")
        return np.diag(vals)
    if spec.startswith("file:"):
        path = spec[5:]
        if not os.path.exists(path):
            raise ValidationError(f"{name}: no such file {path!r}")
        return parse_matrix(_read_matrix_file(path), m, name)
    try:
        return float(spec) * np.eye(m)
    except ValueError:
        raise ValidationError(f"{name}: cannot parse {spec!r}") from None


def _to_point(spec, m, q, kind) -> SpectralPoint:
    value = parse_matrix(spec, m, "point")
    if isinstance(value, dict):
        return SpectralPoint.from_dict(value, kind)
    value = np.asarray(value, dtype=float)
    if value.shape != (m, m):
        raise ValidationError(f"point must be {m}x{m}, got shape {value.shape}")
    return eigdecomp_rank_q(value, q, kind)


# configuration -----------------------------------------------------------------

def resolve_config(args) -> dict:
    file_cfg = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config file {args.config!r}: {exc}") from None
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    cfg = {"subcommand": args.command}
    for key, default in DEFAULTS.items():
        flag = getattr(args, key, None)
        cfg[key] = flag if flag is not None else file_cfg.get(key, default)
    if cfg["q"] is None:
        cfg["q"] = cfg["m"]
    if cfg["workers"] is None:
        cfg["workers"] = os.cpu_count() or 1
    if cfg["format"] not in ("json", "csv"):
        raise ValidationError(f"format must be json or csv, got {cfg['format']!r}")
    return cfg


def _params(cfg) -> BetaParams:
    if cfg["r"] is None or cfg["s"] is None:
        raise ValidationError("--r and --s are required")
    m = int(cfg["m"])
    return BetaParams(m, int(cfg["q"]), float(cfg["r"]), float(cfg["s"]),
                      parse_matrix(cfg["omega1"], m, "omega1"),
                      parse_matrix(cfg["omega2"], m, "omega2"))


def _jsonable(cfg):
    out = {}
    for k, v in cfg.items():
        out[k] = v.tolist() if isinstance(v, np.ndarray) else v
    return out


# output ---------------------------------------------------------------------------

def write_atomic(path: str | None, text: str):
    """Write ``text`` to ``path`` via a temporary file and rename; stdout if None."""
    if path is None:
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".matbeta-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# subcommands ------------------------------------------------------------------------

def cmd_eval(cfg) -> tuple[str, int]:
    params = _params(cfg)
    dist = cfg["dist"]
    if not dist or "-" not in dist:
        raise ValidationError("--dist must look like beta1-central, beta2-dnc, ...")
    kind, which = dist.split("-", 1)
    if (kind, which) not in EVALUATORS:
        choices = sorted(f"{a}-{b}" for a, b in EVALUATORS)
        raise ValidationError(f"unknown --dist {dist!r}; choose from {choices}")
    points = cfg["point"]
    if points is None:
        raise ValidationError("--point is required")
    if not isinstance(points, list) or (points and not isinstance(points[0], str)):
        points = [points]
    ctrl = SeriesControl(k_max=int(cfg["kmax"]), tail_tol=float(cfg["tail_tol"]))
    results = []
    for spec in points:
        point = _to_point(spec, params.m, params.q, kind)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            lv, ratio = EVALUATORS[(kind, which)](point, params, ctrl)
        results.append({
            "point": str(spec),
            "log_density": float(lv.log_magnitude),
            "sign": float(lv.sign),
            "tail_ratio": float(ratio),
        })
    config = _jsonable(cfg)
    if cfg["format"] == "csv":
        buf = io.StringIO()
        buf.write(f"# config: {json.dumps(config)}\n")
        w = csv.writer(buf)
        w.writerow(["point", "log_density", "sign", "tail_ratio"])
        for r in results:
            w.writerow([r["point"], repr(r["log_density"]), r["sign"], repr(r["tail_ratio"])])
        return buf.getvalue(), EXIT_OK
    doc = {"resolved_config": config, "results": results}
    return json.dumps(doc, indent=1) + "\n", EXIT_OK


def cmd_sample(cfg) -> tuple[str, int]:
    params = _params(cfg)
    dist = cfg["dist"] or "beta1"
    if dist not in ("beta1", "beta2"):
        raise ValidationError(f"--dist for sample must be beta1 or beta2, got {dist!r}")
    n = int(cfg["n"] or 1000)
    if n < 1:
        raise ValidationError("--n must be positive")
    sampler = beta1_sample if dist == "beta1" else beta2_sample

    def block(rng, size):
        pt = sampler(params, rng, size)
        return pt.eigenvalues, pt.frame

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        blocks = map_blocks(block, n, int(cfg["seed"]), workers=int(cfg["workers"]))
    ev = np.concatenate([b[0] for b in blocks])
    fr = np.concatenate([b[1] for b in blocks])
    m, q = params.m, params.q
    meta = {"resolved_config": _jsonable(cfg), "params": params.to_dict()}
    buf = io.StringIO()
    if cfg["format"] == "csv":
        buf.write(f"# {json.dumps(meta)}\n")
        header = [f"l{i + 1}" for i in range(q)] + [
            f"h{i + 1}_{j + 1}" for i in range(m) for j in range(q)]
        w = csv.writer(buf)
        w.writerow(header)
        for e, f in zip(ev, fr):
            w.writerow([repr(float(x)) for x in e] + [repr(float(x)) for x in f.ravel()])
    else:
        buf.write(json.dumps(meta) + "\n")
        for e, f in zip(ev, fr):
            buf.write(json.dumps({"eigenvalues": e.tolist(), "frame": f.tolist()}) + "\n")
    return buf.getvalue(), EXIT_OK


def cmd_tables(cfg) -> tuple[str, int]:
    k = int(cfg["kmax"])
    if k < 0:
        raise ValidationError("--kmax must be non-negative")
    if cfg["kind"] == "zonal":
        records = json.loads(dump_tables(build_zonal_table(k)))
    elif cfg["kind"] == "invariant":
        n = int(cfg["n"] or 200_000)
        table = build_invariant_table(k, n, int(cfg["seed"]))
        records = table.to_records()
    else:
        raise ValidationError(f"--kind must be zonal or invariant, got {cfg['kind']!r}")
    doc = {"resolved_config": _jsonable(cfg), "records": records}
    return json.dumps(doc, indent=1) + "\n", EXIT_OK


def _table_from(spec) -> InvariantTable:
    if spec in (None, "bootstrap"):
        return default_table()
    if spec == "fixture":
        return load_fixture()
    if str(spec).startswith("file:"):
        path = spec[5:]
        try:
            with open(path) as fh:
                return InvariantTable.from_json(fh.read(), path)
        except OSError as exc:
            raise ValidationError(f"cannot read table {path!r}: {exc}") from None
    raise ValidationError(f"--table must be bootstrap, fixture or file:path, got {spec!r}")


def cmd_verify(cfg) -> tuple[str, int]:
    table = _table_from(cfg["table"])
    n = int(cfg["n"] or 50_000)
    recs = run_suite(int(cfg["seed"]), n, table=table, workers=int(cfg["workers"]))
    ok = all(r["pass"] for r in recs)
    doc = {"resolved_config": _jsonable(cfg), "records": recs, "all_pass": ok}
    return json.dumps(doc, indent=1) + "\n", EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"eval": cmd_eval, "sample": cmd_sample, "tables": cmd_tables, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="matbeta", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--r", type=float)
    common.add_argument("--s", type=float)
    common.add_argument("--omega1", help="scalar, diag:a,b,... or file:path")
    common.add_argument("--omega2", help="scalar, diag:a,b,... or file:path")
    common.add_argument("--kmax", type=int, help="series truncation / table degree")
    common.add_argument("--tail-tol", dest="tail_tol", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, help="number of draws / Monte Carlo samples")
    common.add_argument("--workers", type=int)
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--config", help="JSON file with default settings")

    p = sub.add_parser("eval", parents=[common], help="evaluate a density")
    p.add_argument("--dist", help="beta1-central, beta1-dnc, beta1-ncA, beta1-ncB, "
                                  "beta1-symmetrised and the beta2 analogues")
    p.add_argument("--point", action="append",
                   help="scalar, diag:..., or file:path; repeatable")
    p = sub.add_parser("sample", parents=[common], help="draw beta matrices")
    p.add_argument("--dist", choices=["beta1", "beta2"])
    p = sub.add_parser("tables", parents=[common], help="write coefficient tables")
    p.add_argument("--kind", choices=["zonal", "invariant"])
    p = sub.add_parser("verify", parents=[common], help="run the verification suite")
    p.add_argument("--table", help="bootstrap (default), fixture or file:path")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        text, code = COMMANDS[args.command](cfg)
        write_atomic(cfg["out"], text)
        return code
    except ValidationError as exc:
        print(f"matbeta: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"matbeta: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
