# src/cli/commands.py
"""
Command-line front end.

  classify   lip verdict + symmetry planes as JSON      exit 0 lip / 2 not lip
  solve      scalar and vector spectra, optional CSV/COO/mesh exports
  verify     run a suite, write the JSON report         exit 0 / 3 fail / 4 inconclusive
  study      convergence table under uniform refinement

Every command exits 1 on a parse, validation or solver error.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.export.report_writer import to_json, write_coo, write_csv, write_eigenfield_csv, write_report
from src.fem.eigensolve import cluster_summary
from src.fem.scalar import assemble_scalar, solve_scalar_spectrum
from src.fem.vector import assemble_vector_A, classify_spectrum, solve_A_spectrum
from src.geometry.builtins import BUILTINS, builtin_domain
from src.geometry.domain import DIRICHLET, DomainSpec
from src.geometry.lip import is_lip
from src.geometry.symmetry import detect_symmetries, find_lip_orthants
from src.ingestion.domain_file import read_domain_file
from src.mesh.generators import generate_mesh
from src.mesh.mesh_io import write_mesh
from src.pipeline.pipeline_runner import SUITES, SuiteSettings, run_verification
from src.utils.config import CLUSTER_GAP, OUTPUT_PATH, REPORT_SCHEMA, SEED, SIGN_TOL, THREADS, ZERO_TOL
from src.utils.errors import ConfigError, HotspotsError
from src.utils.logger import get_logger
from src.verify.checks import FAIL, INCONCLUSIVE
from src.verify.convergence import QUANTITIES, convergence_study

logger = get_logger("cli")

COMMANDS = ("classify", "solve", "verify", "study")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_LIP = 2
EXIT_FAILED = 3
EXIT_INCONCLUSIVE = 4

# flag name → builtin parameter key
DOMAIN_PARAMS = ("a", "b", "c", "radius", "height", "cut", "length")


# ---------------------------
# CONFIG
# ---------------------------
@dataclass
class RunConfig:
    command: str
    builtin: Optional[str] = None
    file: Optional[str] = None
    params: Dict[str, object] = field(default_factory=dict)
    dirichlet: List[str] = field(default_factory=list)
    h: float = 0.1
    levels: int = 3
    k: int = 8
    suite: str = "all"
    j: int = 1
    seed: int = SEED
    sign_tol: float = SIGN_TOL
    zero_tol: float = ZERO_TOL
    quantity: str = "scalar"
    out: Optional[str] = None
    csv_dir: Optional[str] = None
    matrices_dir: Optional[str] = None
    mesh_out: Optional[str] = None
    no_timestamp: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}'")
        if (self.builtin is None) == (self.file is None):
            raise ConfigError("give exactly one of --builtin or --file")
        if self.builtin is not None and self.builtin not in BUILTINS:
            raise ConfigError(f"unknown builtin '{self.builtin}'; choose one of {sorted(BUILTINS)}")
        if not np.isfinite(self.h) or self.h <= 0:
            raise ConfigError(f"--h must be positive, got {self.h}")
        if self.levels < 3 and self.command == "study":
            raise ConfigError(f"--levels must be at least 3, got {self.levels}")
        if self.k < 1:
            raise ConfigError(f"--k must be at least 1, got {self.k}")
        if self.j < 1:
            raise ConfigError(f"--j must be a positive axis index, got {self.j}")
        if self.suite not in SUITES:
            raise ConfigError(f"--suite must be one of {list(SUITES)}, got '{self.suite}'")
        if self.quantity not in QUANTITIES:
            raise ConfigError(f"--quantity must be one of {list(QUANTITIES)}, got '{self.quantity}'")
        for name, tol in (("--tol-sign", self.sign_tol), ("--tol-zero", self.zero_tol)):
            if not 0 <= tol < 1:
                raise ConfigError(f"{name} must lie in [0, 1), got {tol}")

    def load_domain(self) -> DomainSpec:
        if self.file is not None:
            domain = read_domain_file(self.file)
        else:
            domain = builtin_domain(self.builtin, self.params)
        if self.dirichlet:
            domain = domain.with_labels({f: DIRICHLET for f in self.dirichlet})
        return domain

    def settings(self) -> SuiteSettings:
        return SuiteSettings(
            h=self.h, k=self.k, j=self.j, seed=self.seed,
            sign_tol=self.sign_tol, zero_tol=self.zero_tol, threads=THREADS,
        )

    def output_path(self, stem: str) -> Path:
        return Path(self.out) if self.out else Path(OUTPUT_PATH) / f"{stem}.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hotspots", description="Hot-spots and lip-domain eigenvalue laboratory", allow_abbrev=False)
    parser.add_argument("command", choices=COMMANDS)
    src = parser.add_argument_group("domain")
    src.add_argument("--builtin", choices=sorted(BUILTINS))
    src.add_argument("--file")
    for key in DOMAIN_PARAMS:
        src.add_argument(f"--{key}", type=float)
    src.add_argument("--centered", action=argparse.BooleanOptionalAction, default=None)
    src.add_argument("--left", help="product factor builtin name")
    src.add_argument("--right", help="product factor builtin name")
    src.add_argument("--dirichlet", default="", help="comma-separated face ids labelled Dirichlet")

    run = parser.add_argument_group("run")
    run.add_argument("--h", type=float, default=0.1, help="target mesh size")
    run.add_argument("--levels", type=int, default=3)
    run.add_argument("--k", type=int, default=8)
    run.add_argument("--suite", default="all")
    run.add_argument("--j", type=int, default=1)
    run.add_argument("--seed", type=int, default=SEED)
    run.add_argument("--tol-sign", type=float, default=SIGN_TOL)
    run.add_argument("--tol-zero", type=float, default=ZERO_TOL)
    run.add_argument("--quantity", default="scalar")

    out = parser.add_argument_group("output")
    out.add_argument("--out")
    out.add_argument("--csv", dest="csv_dir")
    out.add_argument("--matrices", dest="matrices_dir")
    out.add_argument("--mesh-out")
    out.add_argument("--no-timestamp", action="store_true")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    params: Dict[str, object] = {k: getattr(ns, k) for k in DOMAIN_PARAMS if getattr(ns, k) is not None}
    if ns.centered is not None:
        params["centered"] = ns.centered
    for side in ("left", "right"):
        if getattr(ns, side):
            params[side] = getattr(ns, side)
    config = RunConfig(
        command=ns.command,
        builtin=ns.builtin,
        file=ns.file,
        params=params,
        dirichlet=[f.strip() for f in ns.dirichlet.split(",") if f.strip()],
        h=ns.h,
        levels=ns.levels,
        k=ns.k,
        suite=ns.suite,
        j=ns.j,
        seed=ns.seed,
        sign_tol=ns.tol_sign,
        zero_tol=ns.tol_zero,
        quantity=ns.quantity,
        out=ns.out,
        csv_dir=ns.csv_dir,
        matrices_dir=ns.matrices_dir,
        mesh_out=ns.mesh_out,
        no_timestamp=ns.no_timestamp,
    )
    config.validate()
    return config


# ---------------------------
# COMMANDS
# ---------------------------
def cmd_classify(config: RunConfig) -> int:
    domain = config.load_domain()
    verdict = is_lip(domain, search_orientations=True)
    planes = detect_symmetries(domain)
    payload = {
        "schema": REPORT_SCHEMA,
        "command": "classify",
        "domain": domain.describe(),
        "lip": verdict.to_dict(),
        "symmetry_planes": list(planes),
    }
    if set(planes) == set(range(1, domain.dim + 1)):
        orthants = find_lip_orthants(domain, min(config.j, domain.dim))
        payload["lip_orthants"] = [list(o) for o in orthants]
        payload["note"] = f"lip orthant exists: {'yes' if orthants else 'no'}"
    print(to_json(payload))
    if config.out:
        write_report(payload, config.out)
    logger.info(f"{'✅' if verdict.is_lip else '⚠️'} {domain.name or 'domain'}: lip={verdict.is_lip}")
    return EXIT_OK if verdict.is_lip else EXIT_NOT_LIP


def cmd_solve(config: RunConfig) -> int:
    domain = config.load_domain()
    mesh = generate_mesh(domain, config.h)
    scalar_system = assemble_scalar(mesh, domain.bc)
    scalar = solve_scalar_spectrum(scalar_system, min(config.k, scalar_system.n_dofs), seed=config.seed)
    vector_system = assemble_vector_A(mesh, domain.bc, scalar_system)
    fields = solve_A_spectrum(vector_system, min(config.k, vector_system.basis.shape[1] - 1), seed=config.seed)
    fields = classify_spectrum(vector_system, fields, scalar, domain.bc)

    payload = {
        "schema": REPORT_SCHEMA,
        "command": "solve",
        "domain": domain.describe(),
        "mesh": mesh.stats(),
        "spectra": {
            "scalar": [e.to_dict() for e in scalar],
            "A": [f.to_dict() for f in fields],
            "clusters": {
                "scalar": cluster_summary([e.eigenvalue for e in scalar], CLUSTER_GAP),
                "A": cluster_summary([f.eigenvalue for f in fields], CLUSTER_GAP),
            },
        },
        "boundary_term_active": vector_system.boundary_term_active,
        "corner_flag": vector_system.corner_flag,
    }
    print(to_json(payload))
    if config.out:
        write_report(payload, config.out)
    if config.csv_dir:
        root = Path(config.csv_dir)
        for e in scalar:
            write_eigenfield_csv(mesh.vertices, e.values, root / f"psi_{e.index}.csv")
        for f in fields:
            write_eigenfield_csv(mesh.vertices, f.values, root / f"u_{f.index}.csv")
    if config.matrices_dir:
        root = Path(config.matrices_dir)
        K, M = scalar_system.reduced()
        write_coo(K, root / "scalar_stiffness.coo")
        write_coo(M, root / "scalar_mass.coo")
        KA, MA = vector_system.reduced()
        write_coo(KA, root / "vector_stiffness.coo")
        write_coo(MA, root / "vector_mass.coo")
    if config.mesh_out:
        write_mesh(mesh, config.mesh_out)
    return EXIT_OK


def _summary(report: dict) -> str:
    lines = [f"{report['domain']['name'] or 'domain'}  suite={report['suite']}  status={report['summary']['status']}"]
    for check in report["checks"]:
        lines.append(f"  {check['status']:<13} {check['name']}")
    return "\n".join(lines)


def cmd_verify(config: RunConfig) -> int:
    domain = config.load_domain()
    outcome = run_verification(domain, config.suite, config.settings(), timestamp=not config.no_timestamp)
    path = write_report(outcome.report, config.output_path(f"verify_{domain.name or 'domain'}_{config.suite}"))
    for name, (vertices, values) in outcome.fields.items():
        write_eigenfield_csv(vertices, values, path.with_name(f"{path.stem}_{name}.csv"))
    print(_summary(outcome.report))
    if outcome.status == FAIL:
        return EXIT_FAILED
    if outcome.status == INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_study(config: RunConfig) -> int:
    domain = config.load_domain()
    table = convergence_study(domain, config.levels, config.h, config.quantity, seed=config.seed)
    payload = {"schema": REPORT_SCHEMA, "command": "study", **table.to_dict()}
    path = write_report(payload, config.output_path(f"study_{domain.name or 'domain'}_{config.quantity}"))
    write_csv(table.table, path.with_suffix(".csv"))
    print(table.table.to_string(index=False))
    print(f"observed order {table.observed_order:.3f} (reference {table.reference_source})")
    return EXIT_OK


HANDLERS = {"classify": cmd_classify, "solve": cmd_solve, "verify": cmd_verify, "study": cmd_study}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_config(argv)
        return HANDLERS[config.command](config)
    except HotspotsError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"❌ Unexpected error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
