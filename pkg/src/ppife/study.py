"""Mesh-refinement convergence studies for the manufactured interface problem."""

from __future__ import annotations

import csv
import dataclasses
import logging
import time
from dataclasses import dataclass, field

from .assembly import ProblemParams, assemble, dump_matrix
from .basis import IFESpace, interpolate_ife
from .interface import MODEL_R0, circle_interface, classify_elements
from .mesh import build_cartesian_mesh, normalize_element_type
from .norms import convergence_rates, error_norms
from .problems import ExactProblem, radial_alpha, sine_problem
from .solver import solve_bicgstab, solve_direct

log = logging.getLogger(__name__)

CSV_COLUMNS = ("N", "h", "dofs", "L2_err", "L2_rate", "H1_err", "H1_rate",
               "energy_err", "energy_rate", "residual", "solve_seconds")


class StudyError(RuntimeError):
    def __init__(self, stage, N, cause):
        super().__init__(f"[{stage}] N={N}: {cause}")
        self.stage = stage
        self.N = N


@dataclass
class StudyConfig:
    domain: tuple = (-1.0, 1.0, -1.0, 1.0)
    element_type: str = "triangular"
    N_list: tuple = (10, 20, 40, 80, 160)
    k: float = 10.0
    beta_minus: float = 1.0
    beta_plus: float = 10.0
    sigma0: float | None = None
    interface: str = "circle"
    r0: float = MODEL_R0
    problem: str = "radial_alpha"
    alpha: float = 1.5
    volume_order: int = 4
    edge_order: int = 4
    norm_volume_order: int = 6
    solver: str = "direct"
    solver_tol: float = 1e-10
    out: str | None = None
    threads: int = 1
    dump_matrix: str | None = None

    def __post_init__(self):
        self.element_type = normalize_element_type(self.element_type)
        self.N_list = tuple(int(n) for n in self.N_list)
        self.domain = tuple(float(v) for v in self.domain)
        if self.sigma0 is None:
            self.sigma0 = 30.0 * max(self.beta_minus, self.beta_plus)

    def validate(self):
        if not self.N_list:
            raise ValueError("N_list is empty")
        for a, b in zip(self.N_list[:-1], self.N_list[1:]):
            if b != 2 * a:
                raise ValueError(f"N_list must double at every step, got {a} -> {b}")
        for name in ("k", "beta_minus", "beta_plus", "r0", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.sigma0 < 0:
            raise ValueError("sigma0 must be nonnegative")
        if self.interface not in ("circle", "none"):
            raise ValueError(f"unknown interface {self.interface!r}")
        if self.problem not in ("radial_alpha", "sine"):
            raise ValueError(f"unknown problem {self.problem!r}")
        if self.solver not in ("direct", "bicgstab"):
            raise ValueError(f"unknown solver {self.solver!r}")
        return self


@dataclass
class ConvergenceReport:
    records: list
    rates: list
    config: StudyConfig
    seconds: float = 0.0
    rows: list = field(default_factory=list)


def manufactured_problem(alpha: float = 1.5, r0: float = MODEL_R0, beta_minus: float = 1.0,
                         beta_plus: float = 10.0, k: float = 10.0) -> ExactProblem:
    """Exact solution, gradient, source and boundary datum of the radial test case."""
    return radial_alpha(alpha, r0, beta_minus, beta_plus, k)


def _coerce(name, raw):
    ftype = {f.name: f.type for f in dataclasses.fields(StudyConfig)}[name]
    raw = raw.strip()
    if name == "N_list":
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if name == "domain":
        vals = tuple(float(v) for v in raw.replace(",", " ").split())
        if len(vals) != 4:
            raise ValueError("domain needs four numbers: xmin xmax ymin ymax")
        return vals
    if raw.lower() in ("none", ""):
        return None
    if "int" in str(ftype):
        return int(raw)
    if "float" in str(ftype):
        return float(raw)
    return raw


def load_config(path, **overrides) -> StudyConfig:
    """Read ``key = value`` lines (``#`` starts a comment) into a config.

    Keyword overrides whose value is not ``None`` win over the file.
    """
    names = {f.name for f in dataclasses.fields(StudyConfig)}
    values = {}
    if path is not None:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ValueError(f"{path}:{lineno}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                key = key.replace("-", "_")
                if key == "N":
                    key = "N_list"
                if key not in names:
                    raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
                values[key] = _coerce(key, val)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return StudyConfig(**values)


def build_problem(config: StudyConfig):
    """Interface and exact problem described by ``config``."""
    if config.interface == "circle":
        interface = circle_interface(config.r0)
    else:
        # level set positive everywhere on the domain: no interface elements
        x0, x1, y0, y1 = config.domain
        far = 10.0 * max(x1 - x0, y1 - y0)
        interface = circle_interface(0.5, center=(x1 + far, y1 + far))
    if config.problem == "radial_alpha":
        problem = manufactured_problem(config.alpha, config.r0, config.beta_minus,
                                       config.beta_plus, config.k)
    else:
        if config.beta_minus != config.beta_plus:
            raise ValueError("the sine problem needs beta_minus == beta_plus")
        problem = sine_problem(config.beta_plus, config.k)
    return interface, problem


def run_single(config: StudyConfig, N: int, interface, problem, matrix_path=None):
    stage = "mesh"
    try:
        mesh = build_cartesian_mesh(config.domain, N, config.element_type)
        stage = "classify"
        classification = classify_elements(mesh, interface)
        stage = "basis"
        space = IFESpace(mesh, interface, config.beta_minus, config.beta_plus, classification)
        stage = "assemble"
        params = ProblemParams(config.k, config.beta_minus, config.beta_plus,
                               problem.f, problem.g, sigma0=config.sigma0,
                               volume_order=config.volume_order, edge_order=config.edge_order)
        system = assemble(space, params)
        if matrix_path:
            dump_matrix(system, matrix_path)
        stage = "solve"
        if config.solver == "direct":
            rep = solve_direct(system, config.solver_tol)
        else:
            rep = solve_bicgstab(system, config.solver_tol)
        stage = "error_norms"
        rec = error_norms(problem, rep.solution, space, params,
                          volume_order=config.norm_volume_order)
    except Exception as exc:
        raise StudyError(stage, N, exc) from exc
    rec.solve_seconds = rep.seconds
    rec.residual = rep.residual
    return rec


def _matrix_path(template, N, many):
    if not template:
        return None
    if "{N}" in template:
        return template.format(N=N)
    if not many:
        return template
    stem, dot, ext = template.rpartition(".")
    return f"{stem}_N{N}.{ext}" if dot else f"{template}_N{N}"


def run_study(config: StudyConfig) -> ConvergenceReport:
    """Run mesh build, classification, bases, assembly, solve and error norms per N.

    Writes the CSV when ``config.out`` is set.

    Raises
    ------
    StudyError
        Tagged with the failing stage and ``N``.
    """
    config.validate()
    interface, problem = build_problem(config)
    t0 = time.perf_counter()
    records = []
    limiter = _thread_limit(config.threads)
    with limiter:
        for N in config.N_list:
            path = _matrix_path(config.dump_matrix, N, len(config.N_list) > 1)
            rec = run_single(config, N, interface, problem, path)
            log.info("N=%d L2=%.4e H1=%.4e", N, rec.L2, rec.H1semi)
            records.append(rec)
    rates = convergence_rates(records)
    report = ConvergenceReport(records, rates, config, time.perf_counter() - t0)
    report.rows = report_rows(report)
    if config.out:
        write_csv(report, config.out)
    return report


def _thread_limit(threads):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover
        import contextlib
        return contextlib.nullcontext()
    return threadpool_limits(limits=max(1, int(threads)))


def report_rows(report: ConvergenceReport):
    rows = []
    for rec, rt in zip(report.records, report.rates):
        rows.append({"N": rec.N, "h": rec.h, "dofs": rec.dofs,
                     "L2_err": rec.L2, "L2_rate": rt["L2"],
                     "H1_err": rec.H1semi, "H1_rate": rt["H1semi"],
                     "energy_err": rec.energy_H, "energy_rate": rt["energy_H"],
                     "residual": rec.residual, "solve_seconds": rec.solve_seconds})
    return rows


def _fmt_err(v):
    return f"{v:.4e}"


def _fmt_rate(v):
    return "NA" if v is None else f"{v:.4f}"


def write_csv(report: ConvergenceReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for row in report.rows or report_rows(report):
            w.writerow([row["N"], repr(row["h"]), row["dofs"],
                        _fmt_err(row["L2_err"]), _fmt_rate(row["L2_rate"]),
                        _fmt_err(row["H1_err"]), _fmt_rate(row["H1_rate"]),
                        _fmt_err(row["energy_err"]), _fmt_rate(row["energy_rate"]),
                        f"{row['residual']:.3e}", f"{row['solve_seconds']:.3f}"])


def format_table(report: ConvergenceReport) -> str:
    head = (f"{'N':>6} {'L2 error':>12} {'rate':>8} {'H1 error':>12} {'rate':>8}"
            f" {'energy':>12} {'rate':>8}")
    lines = [head, "-" * len(head)]
    for row in report.rows or report_rows(report):
        lines.append(f"{row['N']:>6} {_fmt_err(row['L2_err']):>12} {_fmt_rate(row['L2_rate']):>8}"
                     f" {_fmt_err(row['H1_err']):>12} {_fmt_rate(row['H1_rate']):>8}"
                     f" {_fmt_err(row['energy_err']):>12} {_fmt_rate(row['energy_rate']):>8}")
    c = report.config
    lines.append(f"k={c.k:g} beta-={c.beta_minus:g} beta+={c.beta_plus:g} "
                 f"sigma0={c.sigma0:g} {c.element_type} ({report.seconds:.1f} s)")
    return "\n".join(lines)


def interpolation_study(config: StudyConfig):
    """Energy-norm error of the IFE interpolant of the exact solution per N."""
    config.validate()
    interface, problem = build_problem(config)
    out = []
    for N in config.N_list:
        mesh = build_cartesian_mesh(config.domain, N, config.element_type)
        space = IFESpace(mesh, interface, config.beta_minus, config.beta_plus)
        params = ProblemParams(config.k, config.beta_minus, config.beta_plus,
                               sigma0=config.sigma0)
        uI = interpolate_ife(problem.u, space)
        out.append(error_norms(problem, uI, space, params,
                               volume_order=config.norm_volume_order))
    return out
