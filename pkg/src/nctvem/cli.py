"""Command-line harness for single runs and h-convergence studies.

Config files are flat ``key = value`` text; ``#`` starts a comment. Example::

    k = 16, 32
    q = 4
    mesh = voronoi
    resolutions = 8, 32, 128, 512
    svd_filter = true
"""

import argparse
import csv
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .analytic import DEFAULT_SOURCE, ExactSolution, impedance_data
from .element import RCOND_MIN
from .errors import projected_l2_error
from .exceptions import ConfigError, DegenerateElementError, NcTVEMError, SolverError
from .mesh import generate_voronoi_lloyd, load_mesh, rectangle_mesh
from .planewave import make_directions
from .system import (assemble, build_dof_map, build_edge_bases, build_operators, solve,
                     write_matrix_market)

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["mesh_id", "n_elems", "h", "k", "q", "p", "n_dofs", "rel_l2_error",
               "assemble_ms", "solve_ms", "slope_to_prev"]


def _floats(text):
    return tuple(float(t) for t in text.replace(",", " ").split())


def _ints(text):
    vals = _floats(text)
    if any(v != int(v) for v in vals):
        raise ValueError(f"expected integers, got {text!r}")
    return tuple(int(v) for v in vals)


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class RunConfig:
    domain: Tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    k: Tuple[float, ...] = (16.0, 32.0, 64.0)
    q: Tuple[int, ...] = (4,)
    sigma: float = 1.0
    stabilization: str = "d-recipe"
    mesh: str = "voronoi"
    resolutions: Tuple[int, ...] = (8, 32, 128, 512)
    seeds: Tuple[int, ...] = ()
    lloyd_iters: int = 100
    source: Tuple[float, float] = DEFAULT_SOURCE
    svd_filter: bool = False
    svd_tau: float = 1e-13
    patch_test: bool = False
    patch_direction: int = 1
    c0: float = 1.0
    element_rcond_min: float = RCOND_MIN
    record_timings: bool = True
    parallel: bool = False

    def seed(self, i):
        return self.seeds[i] if self.seeds else i

    def mesh_sources(self):
        """``(mesh_id, builder args)`` for every resolution in order."""
        if self.mesh == "voronoi":
            return [(f"voronoi-{n}-s{self.seed(i)}", ("voronoi", n, self.seed(i)))
                    for i, n in enumerate(self.resolutions)]
        if self.mesh == "rectangle":
            return [(f"rect-{n}x{n}", ("rectangle", n, 0)) for n in self.resolutions]
        return [(Path(p).stem, ("file", p, 0)) for p in self.mesh.replace(",", " ").split()]


_PARSERS = {
    "domain": _floats, "k": _floats, "q": _ints, "sigma": float, "stabilization": str.strip,
    "mesh": str.strip, "resolutions": _ints, "seeds": _ints, "lloyd_iters": int,
    "source": _floats, "svd_filter": _bool, "svd_tau": float, "patch_test": _bool,
    "patch_direction": int, "c0": float, "element_rcond_min": float, "record_timings": _bool,
    "parallel": _bool,
}


def parse_config(text, base: Optional[RunConfig] = None) -> RunConfig:
    """Parse flat ``key = value`` text; raises ConfigError with the line number on bad input."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    cfg = replace(base or RunConfig(), **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if len(cfg.domain) != 4 or not (cfg.domain[1] > cfg.domain[0] and cfg.domain[3] > cfg.domain[2]):
        raise ConfigError(f"domain must be 'x0, x1, y0, y1' with x0 < x1 and y0 < y1, got {cfg.domain}")
    if not cfg.k or any(not k > 0 for k in cfg.k):
        raise ConfigError("k must list positive wave numbers")
    if not cfg.q or any(q < 2 for q in cfg.q):
        raise ConfigError("q must list integers >= 2")
    if len(cfg.source) != 2:
        raise ConfigError("source must be 'x, y'")
    if cfg.stabilization not in ("d-recipe", "identity"):
        raise ConfigError(f"unknown stabilization {cfg.stabilization!r}")
    if cfg.mesh in ("voronoi", "rectangle"):
        if not cfg.resolutions or any(n < 1 for n in cfg.resolutions):
            raise ConfigError("resolutions must list positive integers")
        if cfg.seeds and len(cfg.seeds) != len(cfg.resolutions):
            raise ConfigError("seeds must have one entry per resolution")
    if not cfg.sigma > 0:
        raise ConfigError("sigma must be positive")


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


@dataclass
class RunRecord:
    mesh_id: str
    n_elems: int
    h: float
    k: float
    q: int
    p: int
    n_dofs: int
    rel_l2_error: float
    assemble_ms: float
    solve_ms: float
    slope_to_prev: Optional[float] = None
    status: str = "ok"
    stats: dict = field(default_factory=dict)

    @property
    def hk(self):
        return self.h * self.k

    @property
    def ok(self):
        return self.status == "ok"

    def csv_row(self):
        slope = "n/a" if self.slope_to_prev is None else f"{self.slope_to_prev:.6g}"
        return [self.mesh_id, self.n_elems, f"{self.h:.12g}", f"{self.k:g}", self.q, self.p,
                self.n_dofs, f"{self.rel_l2_error:.12g}", f"{self.assemble_ms:.3f}",
                f"{self.solve_ms:.3f}", slope]


def build_mesh(cfg: RunConfig, source):
    kind, arg, seed = source
    if kind == "voronoi":
        return generate_voronoi_lloyd(arg, cfg.lloyd_iters, seed, cfg.domain)
    if kind == "rectangle":
        return rectangle_mesh(cfg.domain, arg, arg)
    return load_mesh(arg)


def exact_solution(cfg: RunConfig, kappa, dirs):
    if cfg.patch_test:
        if not 0 <= cfg.patch_direction < dirs.p:
            raise ConfigError(f"patch_direction must lie in [0, {dirs.p - 1}]")
        return ExactSolution.planewave(kappa, dirs.directions[cfg.patch_direction])
    return ExactSolution.hankel(kappa, cfg.source)


def run_single(cfg: RunConfig, kappa, q, mesh_id, source, dump_path=None) -> RunRecord:
    """Build, assemble, solve and measure one (mesh, kappa, q) case.

    Element or solver breakdown is recorded in ``status`` with a NaN error
    instead of being raised.
    """
    mesh = build_mesh(cfg, source)
    dirs = make_directions(q)
    exact = exact_solution(cfg, kappa, dirs)
    h = mesh.mesh_size()
    rec = RunRecord(mesh_id, mesh.n_polygons, h, float(kappa), q, dirs.p, 0, math.nan, 0.0, 0.0)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            bases = build_edge_bases(mesh, dirs, kappa, svd_filter=cfg.svd_filter, tau=cfg.svd_tau)
            dofmap = build_dof_map(mesh, bases)
            rec.n_dofs = dofmap.n_dofs
            ops = build_operators(mesh, bases, dirs, kappa, cfg.sigma, cfg.stabilization, cfg.c0,
                                  cfg.element_rcond_min)
            system = assemble(mesh, dofmap, ops, bases, dirs, kappa,
                              g=lambda pts, n: impedance_data(exact, pts, n))
            t1 = time.perf_counter()
            if dump_path is not None:
                write_matrix_market(system, dump_path, Path(str(dump_path) + ".rhs.mtx"))
            x = solve(system)
            t2 = time.perf_counter()
            rec.rel_l2_error = projected_l2_error(mesh, ops, dofmap, x, exact, dirs, kappa)
    except (DegenerateElementError, SolverError) as exc:
        rec.status = f"breakdown: {exc}"
        logger.warning("%s k=%g q=%d: %s", mesh_id, kappa, q, exc)
        return rec
    if cfg.record_timings:
        rec.assemble_ms = 1e3 * (t1 - t0)
        rec.solve_ms = 1e3 * (t2 - t1)
    rec.stats = dict(system.stats, **system.admissibility)
    return rec


def decreasing_prefix(errors):
    """Length of the leading run of finite, strictly decreasing errors."""
    n = 0
    for i, e in enumerate(errors):
        if not np.isfinite(e) or (i > 0 and e >= errors[i - 1]):
            break
        n = i + 1
    return n


def ls_slope(hk, errors):
    """OLS slope of log(error) against log(hk) over the decreasing prefix; None if fewer than 2 points."""
    n = decreasing_prefix(errors)
    if n < 2:
        return None
    return float(np.polyfit(np.log(hk[:n]), np.log(errors[:n]), 1)[0])


@dataclass
class Series:
    k: float
    q: int
    records: List[RunRecord]
    slope: Optional[float]
    floor_index: Optional[int]
    floor_reason: str = ""


def _annotate(records):
    errs = [r.rel_l2_error for r in records]
    hk = np.array([r.hk for r in records])
    for i in range(1, len(records)):
        a, b = records[i - 1], records[i]
        if a.ok and b.ok and a.rel_l2_error > 0 and b.rel_l2_error > 0 and b.hk != a.hk:
            b.slope_to_prev = math.log(b.rel_l2_error / a.rel_l2_error) / math.log(b.hk / a.hk)
    slope = ls_slope(hk, np.array(errs))
    n = decreasing_prefix(errs)
    floor, reason = None, ""
    if 0 < n < len(records):
        floor = n
        nxt = records[n]
        reason = ("solver breakdown" if not nxt.ok
                  else f"error stops decreasing at hk = {nxt.hk:.3g}")
    return slope, floor, reason


def _task(args):
    return run_single(*args)


def run_study(cfg: RunConfig, dump_path=None) -> List[Series]:
    """Run every (q, k, mesh) combination and group the records into convergence series."""
    sources = cfg.mesh_sources()
    tasks = []
    for q in cfg.q:
        for k in cfg.k:
            for mesh_id, src in sources:
                dp = None
                if dump_path is not None:
                    single = len(cfg.q) * len(cfg.k) * len(sources) == 1
                    p = Path(dump_path)
                    dp = p if single else p.with_name(f"{p.stem}-{mesh_id}-k{k:g}-q{q}{p.suffix}")
                tasks.append((cfg, k, q, mesh_id, src, dp))
    if cfg.parallel and len(tasks) > 1:
        with ProcessPoolExecutor() as pool:
            records = list(pool.map(_task, tasks))
    else:
        records = [_task(t) for t in tasks]
    series = []
    n = len(sources)
    for i in range(0, len(records), n):
        recs = records[i:i + n]
        slope, floor, reason = _annotate(recs)
        series.append(Series(recs[0].k, recs[0].q, recs, slope, floor, reason))
    return series


def write_csv(series: List[Series], path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for s in series:
            for r in s.records:
                w.writerow(r.csv_row())


def write_svg(series: List[Series], path):
    """Two log-log panels: error vs 1/(hk) per wave number, error vs dofs per q."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    for s in series:
        ok = [r for r in s.records if r.ok and r.rel_l2_error > 0]
        if not ok:
            continue
        x1 = [1.0 / r.hk for r in ok]
        y = [r.rel_l2_error for r in ok]
        label = f"k = {s.k:g}, p = {2 * s.q + 1}"
        ax1.loglog(x1, y, "o-", label=label)
        ax2.loglog([r.n_dofs for r in ok], y, "s-", label=label)
        if s.floor_index is not None and s.floor_index < len(s.records):
            last = s.records[s.floor_index - 1]
            ax1.annotate("floor", (1.0 / last.hk, last.rel_l2_error), textcoords="offset points",
                         xytext=(5, 8), fontsize=8)
    ax1.set_xlabel("1 / (h k)")
    ax2.set_xlabel("number of dofs")
    for ax in (ax1, ax2):
        ax.set_ylabel("relative L2 error of the projection")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def summarize(series: List[Series], out=None):
    out = sys.stdout if out is None else out
    for s in series:
        for r in s.records:
            err = f"{r.rel_l2_error:.4e}" if r.ok else r.status.split(":")[0]
            print(f"{r.mesh_id:>18s}  k={r.k:<6g} q={r.q}  hk={r.hk:8.4f}  N={r.n_dofs:6d}  "
                  f"error={err}", file=out)
        slope = "n/a" if s.slope is None else f"{s.slope:.3f}"
        line = f"k={s.k:g} q={s.q}: slope over decreasing prefix = {slope}"
        if s.floor_index is not None:
            line += f"; floor after {s.records[s.floor_index - 1].mesh_id} ({s.floor_reason})"
        print(line, file=out)


def build_parser():
    parser = argparse.ArgumentParser(prog="nctvem", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one case or an h-convergence study")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--patch-test", action="store_true",
                     help="use a plane wave of the direction set as exact solution")
    run.add_argument("--svd-filter", action="store_true",
                     help="orthonormalize and truncate every edge basis")
    run.add_argument("--dump-system", type=Path, metavar="PATH",
                     help="write the assembled matrix in Matrix Market format")
    run.add_argument("--csv", type=Path, metavar="PATH")
    run.add_argument("--svg", type=Path, metavar="PATH")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"nctvem: error: {exc}", file=sys.stderr)
        return 2
    if args.patch_test:
        cfg = replace(cfg, patch_test=True)
    if args.svd_filter:
        cfg = replace(cfg, svd_filter=True)
    try:
        series = run_study(cfg, args.dump_system)
    except ConfigError as exc:
        print(f"nctvem: error: {exc}", file=sys.stderr)
        return 2
    except (NcTVEMError, OSError, ValueError) as exc:
        print(f"nctvem: error: {exc}", file=sys.stderr)
        return 1
    summarize(series)
    if args.csv:
        write_csv(series, args.csv)
    if args.svg:
        write_svg(series, args.svg)
    records = [r for s in series for r in s.records]
    # a breakdown inside a study is an annotated floor; a lone failing case is an error
    return 1 if len(records) == 1 and not records[0].ok else 0
