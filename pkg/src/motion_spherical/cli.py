"""Command-line front end.

    motion-spherical eigs --n 4 --nu 0.5 --mu 0.5
    motion-spherical spectrum --n 3 --mu 1 --rho 2
    motion-spherical verify --all --out report/

Tables go to stdout unless ``--out DIR`` is given; then ``DIR/<verb>.csv`` (or
``.json``) is written together with SVG figures.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import extension as ext
from .oracle import exact_q_polys, polynomial_model_eigenvalue, rational_branch_check
from .reps import InvalidTau, TauLabel
from .spherical import spherical_matrix, spectrum_points
from .transform import BranchSamples, GeneratorProfile, decompose_gamma, spherical_transform

SCHEMA_VERSION = 1
VERBS = ("eigs", "spectrum", "phi", "transform", "decompose", "extend", "jet", "oracle", "verify")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    verb: str
    n: int = 3
    mu: Fraction = Fraction(1)
    nu: Fraction | None = None
    s: int = 0
    rho: list = field(default_factory=list)
    rho_max: float = 3.0
    rho_steps: int = 31
    quad_degree: int = 30
    radial_R: float | None = None
    tol: float = 1e-8
    out: str | None = None
    seed: int = 0
    format: str = "csv"
    y: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    input: str | None = None
    builder: str = "cutoff"
    order: int | None = None
    exact: bool = True
    all: bool = False
    criteria: list = field(default_factory=list)
    plots: bool = True

    def tau(self) -> TauLabel:
        try:
            return TauLabel(self.n, self.mu, self.nu if self.n == 4 else None)
        except InvalidTau as exc:
            raise ConfigError(str(exc)) from None

    def rho_grid(self) -> np.ndarray:
        if self.rho:
            return np.asarray(self.rho, dtype=float)
        return np.linspace(0.0, self.rho_max, self.rho_steps)

    def validate(self):
        if self.verb not in VERBS:
            raise ConfigError(f"unknown verb {self.verb!r}")
        if self.verb != "verify":
            tau = self.tau()
            if not 0 <= self.s <= tau.a_tau:
                raise ConfigError(f"s = {self.s} out of range 0..{tau.a_tau} for {tau}")
            if len(self.y) != tau.n:
                if self.y == [0.0, 0.0, 0.0]:
                    self.y = [0.0] * tau.n
                else:
                    raise ConfigError(f"--y needs {tau.n} coordinates")
        if self.rho_steps < 1 or self.rho_max < 0 or any(r < 0 for r in self.rho):
            raise ConfigError("rho grid must be nonnegative with at least one step")
        if self.quad_degree < 1:
            raise ConfigError("--quad-degree must be positive")
        if self.format not in ("csv", "json"):
            raise ConfigError("--format is csv or json")
        return self


# --- output -----------------------------------------------------------------------


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _json_cell(x):
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    return x


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)

    def render(self, fmt: str, config: RunConfig) -> str:
        if fmt == "json":
            cfg = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(config).items()}
            doc = {"schema": SCHEMA_VERSION, "verb": config.verb, "config": cfg, "meta": self.meta,
                   "columns": self.columns, "rows": [[_json_cell(c) for c in r] for r in self.rows]}
            return json.dumps(doc, indent=1, sort_keys=True) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(c) for c in r])
        return buf.getvalue()


def _complex_cols(z):
    z = complex(z)
    return [z.real, z.imag]


# --- inputs -------------------------------------------------------------------------


def load_profile(path, tau: TauLabel) -> GeneratorProfile:
    """JSON profile: {"schema": 1, "coeffs": [[c_00, c_01, ...], ...], "width2": 1.0}."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigError(f"unsupported profile schema {doc.get('schema')}")
    if "coeffs" not in doc:
        raise ConfigError("profile JSON needs 'coeffs'")
    try:
        return GeneratorProfile.from_preset(tau, doc["coeffs"], doc.get("width2", 1.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_polynomial(path) -> dict:
    """JSON polynomial: {"schema": 1, "terms": [[p, q, "3/2"], ...]} in xi1^p xi2^q."""
    doc = json.loads(Path(path).read_text())
    terms = doc.get("terms")
    if terms is None:
        raise ConfigError("polynomial JSON needs 'terms'")
    return {(int(p), int(q)): Fraction(str(c)) for p, q, c in terms}


def load_samples(path, tau: TauLabel) -> BranchSamples:
    """CSV with columns rho, s, re, im (as written by the transform verb)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    rho = sorted({float(r["rho"]) for r in rows})
    index = {r: k for k, r in enumerate(rho)}
    vals = np.full((len(rho), tau.a_tau + 1), np.nan, dtype=complex)
    for r in rows:
        vals[index[float(r["rho"])], int(r["s"])] = complex(float(r["re"]), float(r["im"]))
    if np.isnan(vals).any():
        raise ConfigError("sample table is missing (rho, s) entries")
    return BranchSamples(tau, np.asarray(rho), vals)


def _profile(cfg: RunConfig, tau: TauLabel) -> GeneratorProfile:
    if cfg.input:
        return load_profile(cfg.input, tau)
    from .verification import balanced_preset

    return balanced_preset(tau, np.random.default_rng(cfg.seed))


# --- verbs -------------------------------------------------------------------------


def verb_eigs(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    rows = [[s, lam, w] for s, (lam, w) in enumerate(zip(tau.lambdas(), tau.weights()))]
    return Table(["s", "lambda", "weight"], rows, {"tau": str(tau), "d_tau": tau.d_tau})


def verb_spectrum(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    pts = spectrum_points(tau, cfg.rho_grid())
    from . import plotting

    grid = np.linspace(0.0, max(cfg.rho_grid().max(), 1e-9), 200)
    figures["spectrum"] = lambda p: plotting.plot_spectrum(tau, grid, p)
    return Table(["xi1", "xi2"], [[p.xi1, p.xi2] for p in pts], {"tau": str(tau)})


def verb_phi(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    rho = cfg.rho[0] if cfg.rho else cfg.rho_max
    M = spherical_matrix(tau, cfg.s, rho, np.asarray(cfg.y, dtype=float), cfg.quad_degree)
    rows = [[i, j, *_complex_cols(M[i, j])] for i in range(M.shape[0]) for j in range(M.shape[1])]
    return Table(["row", "col", "re", "im"], rows, {"tau": str(tau), "s": cfg.s, "rho": rho, "y": cfg.y})


def verb_transform(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    F = _profile(cfg, tau)
    samples = spherical_transform(F.to_branch_form(), tau, cfg.rho_grid(), R=cfg.radial_R)
    exact = F.branch_values(samples.rho)
    rows = []
    for m, r in enumerate(samples.rho):
        for s in range(tau.a_tau + 1):
            rows.append([r, s, *_complex_cols(samples.values[m, s]), abs(samples.values[m, s] - exact[m, s])])
    from . import plotting

    figures["transform"] = lambda p: plotting.plot_branch_samples(samples, p)
    return Table(["rho", "s", "re", "im", "closed_form_error"], rows, {"tau": str(tau)})


def verb_decompose(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    if cfg.input and cfg.input.endswith(".csv"):
        samples = load_samples(cfg.input, tau)
    else:
        samples = spherical_transform(_profile(cfg, tau).to_branch_form(), tau, cfg.rho_grid(), R=cfg.radial_R)
    table = decompose_gamma(samples, tol=max(cfg.tol, 1e-6))
    rows = []
    for m, x in enumerate(table.xi1):
        for i in range(table.gammas.shape[1]):
            rows.append([float(np.sqrt(x)), x, i, *_complex_cols(table.gammas[m, i])])
    return Table(["rho", "xi1", "i", "re", "im"], rows, {"tau": str(tau), "residual": table.residual})


def _flat_branch_data(tau):
    lam = np.asarray(tau.lambdas(), dtype=float)
    return [lambda x, l=l: np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-3) ** 2), 0.0) * (1.0 + l * x) for l in lam]


def verb_extend(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    rng = np.random.default_rng(cfg.seed)
    if cfg.builder == "cutoff":
        F = _profile(cfg, tau)
        field_ = ext.cutoff_extension(F, tau)
        source = lambda r, s: F.branch_values(r)[np.arange(len(r)), s]
        rmax = cfg.rho_max
    elif cfg.builder == "bump":
        gs = _flat_branch_data(tau)
        field_ = ext.bump_extension(gs, tau)
        source = lambda r, s: np.array([gs[k](x) for x, k in zip(r, s)])
        rmax = cfg.rho_max
    elif cfg.builder == "borel":
        P = load_polynomial(cfg.input) if cfg.input else ext.random_polynomial(rng, 4, exact=True)
        m = cfg.order if cfg.order is not None else (8 if tau.n == 3 else 4)
        D = ext.solved_derivatives(ext.jet_solve(ext.curve_jet(P, tau, m)))
        field_ = ext.finite_borel(D, tau)
        Pf = {k: float(v) for k, v in P.items()}
        lam = np.asarray(tau.lambdas(), dtype=float)
        source = lambda r, s: ext.poly_eval(Pf, r ** 2, lam[s] * r ** tau.u)
        rmax = 0.6
    else:
        raise ConfigError(f"unknown builder {cfg.builder!r}")
    r = rng.uniform(0.0, rmax, 200)
    s = rng.integers(0, tau.a_tau + 1, 200)
    keep = np.ones(len(r), dtype=bool)
    if cfg.builder == "borel":
        lam = np.asarray(tau.lambdas(), dtype=float)
        keep = np.hypot(r ** 2, lam[s] * r ** tau.u) < 0.5
    err = float(np.max(np.abs(field_.restrict(r, s) - source(r, s))[keep], initial=0.0))
    L = max(1.0, max(abs(x) for x in tau.lambdas()))
    xi1 = np.linspace(-0.5, max(rmax ** 2, 1.0), 61)
    xi2 = np.linspace(-L * max(rmax, 1.0) ** tau.u, L * max(rmax, 1.0) ** tau.u, 61)
    _, _, U = field_.grid(xi1, xi2)
    rows = [[x1, x2, *_complex_cols(U[a, b])] for a, x1 in enumerate(xi1) for b, x2 in enumerate(xi2)]
    from . import plotting

    figures[f"extend_{cfg.builder}"] = lambda p: plotting.plot_extension(field_, xi1, xi2, p, rmax)
    return Table(["xi1", "xi2", "re", "im"], rows,
                  {"tau": str(tau), "builder": cfg.builder, "restriction_error": err, "points": int(keep.sum())})


def verb_jet(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    rng = np.random.default_rng(cfg.seed)
    P = load_polynomial(cfg.input) if cfg.input else ext.random_polynomial(rng, 6, exact=True)
    if not cfg.exact:
        P = {k: float(v) for k, v in P.items()}
    m = cfg.order if cfg.order is not None else (12 if tau.n == 3 else 6)
    systems = ext.jet_solve(ext.curve_jet(P, tau, m), tol=max(cfg.tol, 1e-6) if not cfg.exact else cfg.tol)
    truth = ext.poly_derivs({k: Fraction(v) if cfg.exact else v for k, v in P.items()})
    rows = []
    for sysd in systems:
        for (p, q), v in sorted(sysd.derivs.items()):
            rows.append([sysd.order, p, q, v, truth.get((p, q), 0), ext.identifiable(tau, p, q), float(sysd.residual)])
    return Table(["order", "p", "q", "derivative", "source", "identifiable", "residual"], rows, {"tau": str(tau)})


def verb_oracle(cfg: RunConfig, figures: dict) -> Table:
    tau = cfg.tau()
    rep = rational_branch_check(tau)
    rows = [["charpoly", k, c, e] for k, (c, e) in enumerate(zip(rep["charpoly"], rep["expected"]))]
    for ell, q in enumerate(exact_q_polys(tau)):
        rows += [[f"q{ell}", k, str(c), ""] for k, c in enumerate(q)]
    if tau.n == 4:
        for s, lam in enumerate(tau.lambdas()):
            rows.append(["model_eigenvalue", s, polynomial_model_eigenvalue(tau.nu, tau.mu, s), lam])
    return Table(["kind", "index", "value", "expected"], rows, {"tau": str(tau), "pass": rep["pass"]})


def verb_verify(cfg: RunConfig, figures: dict) -> Table:
    from . import plotting
    from .verification import CRITERIA, run_all

    numbers = sorted(CRITERIA) if cfg.all or not cfg.criteria else cfg.criteria
    bad = [k for k in numbers if k not in CRITERIA]
    if bad:
        raise ConfigError(f"unknown criteria {bad}")
    results = run_all(numbers, seed=cfg.seed, echo=lambda line: print(line, file=sys.stderr))
    for r in results:
        print(f"  criterion {r.number}: {r.seconds:.1f} s", file=sys.stderr)
    figures["verify"] = lambda p: plotting.plot_verification(results, p)
    if 13 in numbers:
        rows13 = next(r for r in results if r.number == 13).rows
        if rows13:
            figures["decay"] = lambda p: plotting.plot_decay(rows13, p)
    # timings go to stderr only, so the report stays byte-identical across runs
    cols = ["criterion", "title", "pass", "measured", "tolerance", "detail"]
    rows = [[r.number, r.title, r.passed, r.measured, r.tolerance, r.detail] for r in results]
    failed = [f"{r.number} {r.title}" for r in results if not r.passed]
    return Table(cols, rows, {"failed": failed})


HANDLERS = {
    "eigs": verb_eigs, "spectrum": verb_spectrum, "phi": verb_phi, "transform": verb_transform,
    "decompose": verb_decompose, "extend": verb_extend, "jet": verb_jet, "oracle": verb_oracle,
    "verify": verb_verify,
}


# --- argument parsing ---------------------------------------------------------------


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="motion-spherical", description="Spherical analysis on SO(n) x R^n, n = 3, 4.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--n", type=int, default=3, choices=(3, 4))
    p.add_argument("--mu", type=Fraction, default=Fraction(1))
    p.add_argument("--nu", type=Fraction, default=None)
    p.add_argument("--s", type=int, default=0, help="branch index")
    p.add_argument("--rho", type=_floats, default=[], help="comma-separated rho values (overrides the grid)")
    p.add_argument("--rho-max", type=float, default=3.0)
    p.add_argument("--rho-steps", type=int, default=31)
    p.add_argument("--quad-degree", type=int, default=30)
    p.add_argument("--radial-R", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None, help="output directory for tables and figures")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--y", type=_floats, default=[0.0, 0.0, 0.0], help="phi: evaluation point")
    p.add_argument("--input", default=None, help="profile/polynomial JSON or sample CSV")
    p.add_argument("--builder", default="cutoff", choices=("cutoff", "bump", "borel"))
    p.add_argument("--order", type=int, default=None, help="jet order")
    p.add_argument("--float", dest="exact", action="store_false", help="jet: floating-point path")
    p.add_argument("--all", action="store_true", help="verify: every criterion")
    p.add_argument("--criteria", type=lambda t: [int(x) for x in t.split(",")], default=[])
    p.add_argument("--no-plots", dest="plots", action="store_false")
    return p


def config_from_args(ns) -> RunConfig:
    kw = vars(ns).copy()
    return RunConfig(**kw).validate()


def run(verb: str, config: RunConfig) -> int:
    config.verb = verb
    figures: dict = {}
    table = HANDLERS[verb](config.validate(), figures)
    text = table.render(config.format, config)
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{verb}.{config.format}").write_text(text)
        if config.format == "csv" and table.meta:
            (out / f"{verb}.meta.json").write_text(json.dumps(
                {k: _json_cell(v) for k, v in table.meta.items()}, indent=1, sort_keys=True) + "\n")
        if config.plots:
            for name, draw in figures.items():
                draw(out / f"{name}.svg")
    else:
        sys.stdout.write(text)
    if verb == "verify" and table.meta.get("failed"):
        print("verify failed: " + "; ".join(table.meta["failed"]), file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg.verb, cfg)
    except (ConfigError, ext.HypothesisViolation, ext.InconsistentJet) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
