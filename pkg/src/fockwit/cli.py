"""Command-line experiment runner.

Subcommands ``generate``, ``detect``, ``mzi``, ``witness`` and ``sweep``
write a JSON report (``schema: 1``) or CSV. Settings resolve as
command-line flags over a ``--config`` JSON file over built-in defaults.
Exit codes: 1 for parse and domain errors, 2 for numerical guards, 3 for
anything else.
"""

import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .config import SCAN_POINTS, SCAN_RADIUS, TOL, TWO_MODE_DIM
from .cv_witness import criterion_s, detection_check, product_criterion
from .entanglement import lossy_bell_state, pt_eigenvalues, pt_report
from .errors import FockwitError, NumericalGuardError, TruncationError
from .fock import make_state, product_state, reduced_state
from .network import (
    BeamSplitter,
    MziConfig,
    analytic_mzi_marginal_char,
    apply_bs,
    mzi_marginal_char_exact,
    run_mzi,
    smoothing_parameter,
)
from .phase_space import PhaseGrid, char_fn, scan_qpd
from .witness import (
    WitnessMetric,
    build_subset_witness,
    build_witness,
    dual_basis,
    evaluate_witness,
    separable_samples,
    standard_basis,
    transform_witness,
)

DEFAULTS = {
    "in1": "fock:1",
    "in2": "fock:0",
    "t": None,
    "theta": None,
    "eta1": 1.0,
    "eta2": 1.0,
    "dim": TWO_MODE_DIM,
    "grid_radius": SCAN_RADIUS,
    "grid_points": SCAN_POINTS,
    "seed": 0,
    "format": "json",
    "out": None,
    "strict": False,
    # detect
    "bell_eta": None,
    "generated": False,
    # mzi
    "beta_radius": 2.0,
    "beta_points": 21,
    # witness
    "n": 2,
    "subset": None,
    "metric": "identity",
    "samples": 1000,
    "map": "none",
    "kappa": None,
    # sweep
    "kind": "eta",
    "values": None,
    "workers": 1,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--in1", help="StateSpec for input mode 1")
    p.add_argument("--in2", help="StateSpec for input mode 2")
    bs = p.add_mutually_exclusive_group()
    bs.add_argument("--t", type=float, help="beam-splitter transmissivity amplitude")
    bs.add_argument("--theta", type=float, help="beam-splitter angle, t = cos(theta)")
    p.add_argument("--eta1", type=float)
    p.add_argument("--eta2", type=float)
    p.add_argument("--dim", type=int, help="Fock cutoff per mode")
    p.add_argument("--grid-radius", dest="grid_radius", type=float)
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--strict", action="store_true", default=None,
                   help="turn truncation warnings into errors")
    p.add_argument("--config", help="JSON file of defaults mirroring flag names")


def build_parser():
    parser = _Parser(prog="fockwit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="product input through a splitter: criterion and PT")
    _add_common(p)

    p = sub.add_parser("detect", help="certify entanglement of a two-mode state locally")
    _add_common(p)
    p.add_argument("--bell-eta", dest="bell_eta", type=float,
                   help="test the lossy single-photon Bell state with this eta")
    p.add_argument("--generated", action="store_true", default=None,
                   help="test the splitter output of --in1 (x) --in2 instead of the product")

    p = sub.add_parser("mzi", help="lossy Mach-Zehnder pipeline against closed forms")
    _add_common(p)
    p.add_argument("--beta-radius", dest="beta_radius", type=float)
    p.add_argument("--beta-points", dest="beta_points", type=int)

    p = sub.add_parser("witness", help="finite witness soundness and probes")
    _add_common(p)
    p.add_argument("--n", type=int, help="local dimension")
    p.add_argument("--subset", help="index pairs 'i,j;k,l;...' (default: all)")
    p.add_argument("--metric", help="'identity' or a JSON n x n weight table")
    p.add_argument("--samples", type=int)
    p.add_argument("--map", choices=["none", "transpose_mode2", "attenuation"])
    p.add_argument("--kappa", type=float)

    p = sub.add_parser("sweep", help="parameter sweep to CSV")
    _add_common(p)
    p.add_argument("--kind", choices=["eta", "t", "nbar", "mzi"])
    p.add_argument("--values", help="comma-separated sweep values")
    p.add_argument("--workers", type=int)
    return parser


def resolve_config(args):
    """Merge defaults, the optional config file and explicit flags."""
    cfg = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        cfg.update({k.replace("-", "_"): v for k, v in doc.items()})
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None:
            continue
        cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _splitter(cfg):
    if cfg.get("theta") is not None:
        return BeamSplitter.from_theta(cfg["theta"])
    if cfg.get("t") is not None:
        return BeamSplitter.from_t(cfg["t"])
    return BeamSplitter.balanced()


def _grid(cfg):
    return PhaseGrid(cfg["grid_radius"], cfg["grid_points"])


def _echo(cfg):
    return {k: v for k, v in sorted(cfg.items()) if k not in ("out", "format")}


# ---------------------------------------------------------------------------
# Subcommands

def run_generate(cfg):
    bs = _splitter(cfg)
    run = product_criterion(cfg["in1"], cfg["in2"], bs, dim=cfg["dim"], grid=_grid(cfg),
                            strict=cfg["strict"])
    return {
        "splitter": bs.to_dict(),
        "verdict": run.verdict.to_dict(),
        "pt": run.pt.to_dict(),
        "marginal_minima": list(run.verdict.mode_minima),
        "origin_values": list(run.verdict.origin_values),
        "propagation": {"path": run.path, "dims": list(run.dims)},
    }


def run_detect(cfg):
    bs = _splitter(cfg)
    if cfg.get("bell_eta") is not None:
        rho = lossy_bell_state(cfg["bell_eta"], max(2, min(cfg["dim"], 4)))
        source = f"lossy_bell:{cfg['bell_eta']!r}"
    else:
        rho = product_state(cfg["in1"], cfg["in2"], cfg["dim"], strict=cfg["strict"])
        source = f"{cfg['in1']} (x) {cfg['in2']}"
        if cfg.get("generated"):
            rho = apply_bs(rho, bs)
            source = f"splitter output of {source}"
    verdict = detection_check(rho, bs, _grid(cfg))
    return {
        "source": source,
        "splitter": bs.to_dict(),
        "verdict": verdict.to_dict(),
        "marginal_minima": list(verdict.mode_minima),
        "origin_values": list(verdict.origin_values),
        "pt": pt_report(rho).to_dict(),
    }


def run_mzi_report(cfg):
    output_bs = "auto"
    if cfg.get("t") is not None or cfg.get("theta") is not None:
        output_bs = _splitter(cfg)
    mzi = MziConfig(cfg["in1"], cfg["in2"], cfg["eta1"], cfg["eta2"], output_bs, cfg["dim"])
    out = run_mzi(mzi, strict=cfg["strict"])
    bs = mzi.resolved_bs()
    m1 = reduced_state(out, 1)
    bgrid = PhaseGrid(cfg["beta_radius"], cfg["beta_points"])
    betas = bgrid.alphas()
    betas = betas[np.abs(betas) <= cfg["beta_radius"] + 1e-12]
    simulated = char_fn(m1, betas, 0.0)
    rho_in1 = make_state(cfg["in1"], cfg["dim"])
    chi_sym = lambda b: char_fn(rho_in1, b, 0.0)  # noqa: E731
    closed = analytic_mzi_marginal_char(chi_sym, cfg["eta1"], cfg["eta2"], betas)
    corrected = mzi_marginal_char_exact(chi_sym, cfg["eta1"], cfg["eta2"], betas, 0.0)
    scans = [scan_qpd(reduced_state(out, mode), 0.0, _grid(cfg)) for mode in (1, 2)]
    eta = math.sqrt(cfg["eta1"] * cfg["eta2"])
    return {
        "output_splitter": bs.to_dict(),
        "s_smooth": smoothing_parameter(cfg["eta1"], cfg["eta2"]),
        "max_defect_closed_form": float(np.max(np.abs(simulated - closed))),
        "max_defect_corrected": float(np.max(np.abs(simulated - corrected))),
        "min_wigner_out": [sc.min_value for sc in scans],
        "wigner_out_origin": [sc.origin_value for sc in scans],
        "scaling_law_prediction_min": -2.0 / math.pi / (eta * eta) if cfg["in1"] == "fock:1" else None,
        "trace": out.trace(),
    }


def _parse_subset(text, n):
    if not text:
        return [(i, j) for i in range(n) for j in range(n)]
    pairs = []
    for item in text.split(";"):
        i, j = item.split(",")
        pairs.append((int(i), int(j)))
    return pairs


def run_witness(cfg):
    n = int(cfg["n"])
    metric = WitnessMetric.identity(n)
    if cfg["metric"] != "identity":
        metric = WitnessMetric(np.array(json.loads(cfg["metric"]), dtype=float))
    if cfg.get("subset"):
        w = build_subset_witness(n, _parse_subset(cfg["subset"], n), metric)
    else:
        basis = standard_basis(n)
        w = build_witness(basis, dual_basis(basis), metric)
    if cfg["map"] != "none":
        w = transform_witness(w, cfg["map"], cfg.get("kappa"))
    values = np.array([evaluate_witness(w, s).value for s in separable_samples(n, cfg["samples"], cfg["seed"])])
    phi = np.zeros(n * n)
    phi[[i * n + i for i in range(n)]] = 1.0 / math.sqrt(n)
    probe = evaluate_witness(w, np.outer(phi, phi))
    tol = 1e-9
    return {
        "n": n,
        "g_tilde": w.g_tilde,
        "hermiticity_defect": w.hermiticity_defect(),
        "samples": int(values.size),
        "sample_min": float(values.min()) if values.size else None,
        "sample_max": float(values.max()) if values.size else None,
        "samples_inside": int(np.sum((values >= -tol) & (values <= w.g_tilde + tol))),
        "maximally_entangled_probe": probe.to_dict(),
    }


def _values(cfg, default):
    if cfg.get("values") is None:
        return default
    if isinstance(cfg["values"], list):
        return [float(v) for v in cfg["values"]]
    return [float(v) for v in str(cfg["values"]).split(",")]


def _eta_row(eta):
    rho = lossy_bell_state(eta, 2)
    sim = sorted(pt_eigenvalues(rho).tolist(), reverse=True)
    neg = -sum(v for v in sim if v < -TOL.pt_floor)
    return [eta, *sim, neg]


def _nbar_row(args):
    nbar, t, dim, grid, strict = args
    run = product_criterion("fock:1", f"thermal:{nbar!r}", BeamSplitter.from_t(t), dim=dim,
                            grid=grid, strict=strict)
    return [nbar, run.verdict.entangled_sufficient, run.pt.npt, run.verdict.min_marginal,
            run.pt.min_eigenvalue, run.pt.log_negativity]


def _mzi_row(args):
    in1, in2, eta1, eta2, dim, grid, strict = args
    cfg = MziConfig(in1, in2, eta1, eta2, "auto", dim)
    bs = cfg.resolved_bs()
    out = run_mzi(cfg, strict=strict)
    scan = scan_qpd(reduced_state(out, 1), 0.0, grid)
    return [eta1, eta2, bs.t, bs.r, smoothing_parameter(eta1, eta2), scan.min_value]


def _pool_map(fn, items, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def run_sweep(cfg):
    kind = cfg["kind"]
    workers = int(cfg.get("workers") or 1)
    grid = _grid(cfg)
    if kind == "eta":
        header = ["eta", "lam1", "lam2", "lam3", "lam4", "negativity"]
        rows = _pool_map(_eta_row, _values(cfg, [0.05 * k for k in range(21)]), workers)
    elif kind == "t":
        header = ["t", "r", "s_star"]
        rows = []
        for t in _values(cfg, [0.5, math.sqrt(0.5), 0.8, 0.95, 1.0]):
            bs = BeamSplitter.from_t(t)
            rows.append([bs.t, bs.r, criterion_s(bs)])
    elif kind == "nbar":
        header = ["nbar", "entangled_sufficient", "npt", "min_marginal", "pt_min", "log_negativity"]
        t = _splitter(cfg).t
        items = [(v, t, cfg["dim"], grid, cfg["strict"]) for v in _values(cfg, [0.0, 1.0, 5.0, 10.0])]
        rows = _pool_map(_nbar_row, items, workers)
    else:
        header = ["eta1", "eta2", "t", "r", "s_smooth", "min_wigner_out"]
        etas = _values(cfg, [0.5, 0.7, 0.9])
        items = [(cfg["in1"], cfg["in2"], e1, e2, cfg["dim"], grid, cfg["strict"])
                 for e1 in etas for e2 in etas]
        rows = _pool_map(_mzi_row, items, workers)
    return {"header": header, "rows": rows}


_RUNNERS = {
    "generate": run_generate,
    "detect": run_detect,
    "mzi": run_mzi_report,
    "witness": run_witness,
    "sweep": run_sweep,
}


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _to_csv(body):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "header" in body:
        writer.writerow(body["header"])
        writer.writerows([[_cell(v) for v in row] for row in body["rows"]])
        return buf.getvalue()
    writer.writerow(["key", "value"])

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else k, obj[k])
        elif isinstance(obj, list):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            writer.writerow([prefix, _cell(obj)])

    walk("", body)
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def execute(cfg):
    """Run one configured command; returns ``(text, exit_code)``."""
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        body = _RUNNERS[cfg["command"]](cfg)
    messages = sorted({str(w.message) for w in caught})
    if cfg["format"] == "csv":
        return _to_csv(_jsonable(body)), 0
    report = {
        "schema": 1,
        "command": cfg["command"],
        "version": __version__,
        "config": _jsonable(_echo(cfg)),
        "result": _jsonable(body),
        "warnings": messages,
        "wall_clock_s": time.perf_counter() - start,
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n", 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        text, code = execute(cfg)
    except (NumericalGuardError, TruncationError) as exc:
        print(f"fockwit: numerical guard: {exc}", file=sys.stderr)
        return 2
    except (FockwitError, ValueError, OSError) as exc:
        print(f"fockwit: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - last-resort contract
        print(f"fockwit: internal error: {exc!r}", file=sys.stderr)
        return 3
    if cfg.get("out"):
        with open(cfg["out"], "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
