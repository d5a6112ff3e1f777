"""Command-line front-end: spec ingestion, analysis, reproduction, coupling.

Three subcommands: `analyze` runs the certification pipeline on a kernel-spec
file and emits an operation-tagged report; `reproduce` rebuilds a bundled
example and diffs every derived quantity against its expected value;
`couple` runs the markovian coupling as a Monte Carlo simulation and checks
it against the exact uncoupled mass.

Exit codes: 0 all checks pass, 1 the analysis ran but a hypothesis, bound, or
reproduction check failed, 2 the input was unusable.  State indices on the
command line and in spec files are 1-based ("dirac:1" is the first state);
the library itself is 0-based.  Output is byte-identical for identical
arguments: nothing emitted depends on time or machine.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .coefficients import (
    SamplerConfig,
    lipschitz_lambda,
    md_alpha_linear,
    md_alpha_nonlinear,
)
from .convergence import empirical_decay_rate, rate_comparison, tv_decay, verify_main_bound
from .coupling import (
    build_v_hat,
    marginal_law_exact,
    simulate_coupled,
    uncoupled_probability_exact,
)
from .errors import (
    DimensionError,
    InvalidDistributionError,
    InvalidMatrixError,
    SpecFormatError,
)
from .kernels import (
    NonlinearKernelSpec,
    PerturbationTerm,
    StochasticMatrix,
    validate_spec,
)
from .measures import Distribution, dirac
from .reference import (
    EXAMPLE1_EIGENVALUES,
    EXAMPLE1_ONE_MINUS_ALPHA_K,
    EXAMPLE1_RADIUS,
    EXAMPLE2_ONE_MINUS_ALPHA_K,
    EXAMPLE2_RADIUS,
    EXAMPLE2_RADIUS_TOL,
    EXAMPLE_ALPHA,
    example1_expected_v_hat,
)
from .reporting import ReportDocument, format_value, render_table, to_csv, to_json, to_markdown
from .spectral import eigenvalues, spectral_radius

EXIT_OK = 0
EXIT_ANALYTIC = 1
EXIT_INPUT = 2

# Perturbation sizes swept for the rate-vs-radius table when the spec file
# declares exactly one named parameter.
SWEEP_VALUES = (0.1, 0.05, 0.01, 0.0)

_INPUT_ERRORS = (
    SpecFormatError,
    InvalidDistributionError,
    InvalidMatrixError,
    DimensionError,
    IndexError,
    OSError,
)

_TERM_KEYS = {"row", "col", "measure_index", "coefficient"}


@dataclass(frozen=True)
class SpecFile:
    """Parsed kernel-spec document: exact base plus unresolved terms.

    Each term is (row, col, measure_index) 0-based together with either
    ("number", Fraction) or ("param", name, sign) as its coefficient.
    """

    origin: str
    states: int
    base: StochasticMatrix
    parameters: dict[str, Fraction]
    terms: tuple


def _parse_number(value, where: str) -> Fraction:
    if isinstance(value, bool):
        raise SpecFormatError(f"{where}: expected a number, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise SpecFormatError(f"{where}: cannot parse {value!r} as a number")
    raise SpecFormatError(f"{where}: expected a number, got {type(value).__name__}")


def _require_index(value, where: str, states: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecFormatError(f"{where}: expected an integer")
    if not 1 <= value <= states:
        raise SpecFormatError(f"{where}: index {value} outside 1..{states}")
    return value - 1


def load_spec_data(data, origin: str) -> SpecFile:
    """Validate a parsed JSON document against the strict spec-file schema."""
    if not isinstance(data, dict):
        raise SpecFormatError(f"{origin}: top level must be an object")
    unknown = set(data) - {"states", "base", "parameters", "perturbations"}
    if unknown:
        raise SpecFormatError(f"{origin}: unknown key(s) {sorted(unknown)}")
    for key in ("states", "base"):
        if key not in data:
            raise SpecFormatError(f"{origin}: missing required key '{key}'")

    states = data["states"]
    if isinstance(states, bool) or not isinstance(states, int) or states < 1:
        raise SpecFormatError(f"{origin}: 'states' must be a positive integer")

    rows = data["base"]
    if not isinstance(rows, list) or len(rows) != states:
        raise SpecFormatError(f"{origin}: 'base' must be a list of {states} rows")
    entries = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != states:
            raise SpecFormatError(f"{origin}: base row {i + 1} must have {states} entries")
        entries.append([_parse_number(v, f"base[{i + 1}][{j + 1}]") for j, v in enumerate(row)])
    base = StochasticMatrix(np.array(entries, dtype=object))

    raw_params = data.get("parameters", {})
    if not isinstance(raw_params, dict):
        raise SpecFormatError(f"{origin}: 'parameters' must be an object")
    parameters = {}
    for name, value in raw_params.items():
        if not name or not isinstance(name, str):
            raise SpecFormatError(f"{origin}: parameter names must be non-empty strings")
        parameters[name] = _parse_number(value, f"parameters.{name}")

    raw_terms = data.get("perturbations", [])
    if not isinstance(raw_terms, list):
        raise SpecFormatError(f"{origin}: 'perturbations' must be an array")
    terms = []
    for i, term in enumerate(raw_terms):
        where = f"perturbations[{i + 1}]"
        if not isinstance(term, dict):
            raise SpecFormatError(f"{where}: must be an object")
        if set(term) != _TERM_KEYS:
            raise SpecFormatError(
                f"{where}: keys must be exactly {sorted(_TERM_KEYS)}, got {sorted(term)}"
            )
        row = _require_index(term["row"], f"{where}.row", states)
        col = _require_index(term["col"], f"{where}.col", states)
        midx = _require_index(term["measure_index"], f"{where}.measure_index", states)
        coeff = term["coefficient"]
        if isinstance(coeff, str):
            sign, name = (-1, coeff[1:]) if coeff.startswith("-") else (1, coeff)
            if name in parameters:
                terms.append((row, col, midx, ("param", name, sign)))
                continue
        value = _parse_number(coeff, f"{where}.coefficient")
        terms.append((row, col, midx, ("number", value)))

    return SpecFile(origin, states, base, parameters, tuple(terms))


def load_spec_file(path: str) -> SpecFile:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: malformed JSON ({exc})")
    return load_spec_data(data, path)


def resolve_spec(sf: SpecFile, overrides: dict[str, Fraction]) -> NonlinearKernelSpec:
    """Substitute parameters (after overrides) and validate feasibility."""
    params = dict(sf.parameters)
    for name, value in overrides.items():
        if name not in params:
            raise SpecFormatError(
                f"--param {name}: not declared in {sf.origin} "
                f"(declared: {sorted(params) or 'none'})"
            )
        params[name] = value
    built = []
    for row, col, midx, coeff in sf.terms:
        if coeff[0] == "param":
            value = coeff[2] * float(params[coeff[1]])
        else:
            value = float(coeff[1])
        built.append(PerturbationTerm(row, col, midx, value))
    spec = NonlinearKernelSpec(
        base=sf.base,
        perturbations=tuple(built),
        parameters={k: float(v) for k, v in params.items()},
    )
    validation = validate_spec(spec)
    if validation.zero_sum_violations:
        row, midx, total = validation.zero_sum_violations[0]
        raise SpecFormatError(
            f"{sf.origin}: perturbation coefficients for row {row + 1}, "
            f"measure index {midx + 1} sum to {total}, not 0"
        )
    if validation.range_violations:
        row, col, vertex, value = validation.range_violations[0]
        raise SpecFormatError(
            f"{sf.origin}: entry ({row + 1}, {col + 1}) becomes {value} at the "
            f"vertex law on state {vertex + 1}"
        )
    return spec


def parse_law(text: str, states: int, flag: str) -> Distribution:
    """Parse 'dirac:i' (1-based) or a comma-separated mass list."""
    if text.startswith("dirac:"):
        try:
            i = int(text[len("dirac:"):])
        except ValueError:
            raise SpecFormatError(f"{flag}: cannot parse {text!r}")
        if not 1 <= i <= states:
            raise SpecFormatError(f"{flag}: state {i} outside 1..{states}")
        return dirac(i - 1, states)
    parts = text.split(",")
    if len(parts) != states:
        raise SpecFormatError(f"{flag}: expected {states} entries, got {len(parts)}")
    probs = [float(_parse_number(p.strip(), flag)) for p in parts]
    return Distribution(np.array(probs))


def _parse_overrides(pairs: list[str]) -> dict[str, Fraction]:
    overrides = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise SpecFormatError(f"--param expects NAME=VALUE, got {pair!r}")
        overrides[name] = _parse_number(value, f"--param {name}")
    return overrides


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _float_base(base: StochasticMatrix) -> StochasticMatrix:
    return StochasticMatrix(np.asarray(base.entries, dtype=float))


def cmd_analyze(args) -> int:
    sf = load_spec_file(args.spec)
    overrides = _parse_overrides(args.param)
    spec = resolve_spec(sf, overrides)
    mu0 = parse_law(args.mu0, sf.states, "--mu0")
    nu0 = parse_law(args.nu0, sf.states, "--nu0")
    sampler = SamplerConfig(samples=args.samples, seed=args.seed)

    report = verify_main_bound(
        spec,
        args.delta,
        mu0,
        nu0,
        args.n_max,
        n_cap=args.n_cap,
        k_max=args.k_max,
        gamma_margin=args.gamma_margin,
        lambda_margin=args.lambda_margin,
        sampler=sampler,
    )

    rate_sweep = None
    if len(sf.parameters) == 1:
        name = next(iter(sf.parameters))
        log_radius = report.log_radius  # base chain is sweep-invariant
        rate_sweep = []
        for value in SWEEP_VALUES:
            entry: dict = {"kappa": value}
            try:
                swept = resolve_spec(sf, {name: Fraction(str(value))})
                curve = tv_decay(swept, mu0, nu0, args.n_max)
                entry["empirical_rate"] = empirical_decay_rate(curve)
                entry["log_radius"] = log_radius
            except SpecFormatError as exc:
                entry["error"] = str(exc)
            rate_sweep.append(entry)

    config = {
        "spec_path": args.spec,
        "delta": args.delta,
        "n_max": args.n_max,
        "n_cap": args.n_cap,
        "k_max": args.k_max,
        "samples": args.samples,
        "gamma_margin": args.gamma_margin,
        "lambda_margin": args.lambda_margin,
        "mu0": args.mu0,
        "nu0": args.nu0,
        "format": args.format,
        "parameters": {k: v for k, v in spec.parameters.items()},
        "sweep_parameter": next(iter(sf.parameters)) if len(sf.parameters) == 1 else None,
    }
    doc = ReportDocument(
        report=report,
        version=__version__,
        command="analyze",
        config=config,
        seed=args.seed,
        workers=args.workers,
        rate_sweep=rate_sweep,
    )
    renderer = {"json": to_json, "md": to_markdown, "csv": to_csv}[args.format]
    _emit(renderer(doc), args.out)
    return EXIT_OK if report.hypotheses_met and report.all_bounds_hold else EXIT_ANALYTIC


def _bundled_spec(name: str) -> SpecFile:
    text = resources.files("mcergo").joinpath("data", f"{name}.json").read_text()
    return load_spec_data(json.loads(text), f"{name}.json")


def _check(rows: list[dict], quantity: str, expected, actual, tol) -> None:
    if tol is None:
        ok = bool(expected == actual)
    else:
        ok = abs(actual - expected) <= tol
    rows.append(
        {"quantity": quantity, "expected": expected, "actual": actual,
         "tolerance": tol, "ok": ok}
    )


def _reproduce_rows(name: str) -> list[dict]:
    sf = _bundled_spec(name)
    spec = resolve_spec(sf, {})
    kappa = spec.parameters["kappa"]
    base = spec.base
    op = build_v_hat(base)
    rows: list[dict] = []

    expected_size = {"example1": 12, "example2": 30}[name]
    _check(rows, "pair operator size", expected_size, op.v_hat.shape[0], None)

    if name == "example1":
        diff = np.abs(np.asarray(op.v_hat - example1_expected_v_hat(), dtype=float)).max()
        _check(rows, "pair operator max |diff| (exact)", 0.0, float(diff), 0.0)
        spectrum = eigenvalues(np.asarray(op.v_hat, dtype=float))
        got = np.sort_complex(spectrum.eigenvalues)
        eig_diff = float(np.abs(got - np.array(EXAMPLE1_EIGENVALUES)).max())
        _check(rows, "eigenvalue multiset max |diff|", 0.0, eig_diff, 1e-9)
        _check(rows, "spectral radius (dense)", EXAMPLE1_RADIUS, spectrum.radius, 1e-9)
        power = spectral_radius(op.v_hat, 1e-9)
        _check(rows, "spectral radius (power iteration)", EXAMPLE1_RADIUS, power.radius, 1e-9)
        table = EXAMPLE1_ONE_MINUS_ALPHA_K
    else:
        radius = spectral_radius(op.v_hat, 1e-9).radius
        _check(rows, "spectral radius", EXAMPLE2_RADIUS, radius, EXAMPLE2_RADIUS_TOL)
        table = EXAMPLE2_ONE_MINUS_ALPHA_K

    for k, frac in table.items():
        got = 1.0 - float(md_alpha_linear(base, k).value)
        _check(rows, f"1 - alpha_{k}", float(frac), got, 1e-12)
    for row in rate_comparison(base, 5):
        _check(rows, f"r^{row.k} < 1 - alpha_{row.k}", True, row.strictly_smaller, None)

    alpha = md_alpha_nonlinear(spec)
    _check(rows, "alpha (nonlinear)", EXAMPLE_ALPHA, float(alpha.value), 1e-12)
    lam = lipschitz_lambda(spec)
    _check(rows, "lambda equals kappa", kappa, float(lam.value), 1e-15)
    return rows


def cmd_reproduce(args) -> int:
    rows = _reproduce_rows(args.example)
    ok = all(r["ok"] for r in rows)
    header = ["quantity", "expected", "actual", "tolerance", "ok"]
    if args.format == "json":
        text = json.dumps(
            {"version": __version__, "command": "reproduce",
             "example": args.example, "checks": rows, "ok": ok},
            indent=2, sort_keys=True,
        ) + "\n"
    elif args.format == "csv":
        lines = [",".join(header)]
        for r in rows:
            lines.append(",".join(format_value(r[h]) for h in header))
        text = "\n".join(lines) + "\n"
    else:
        lines = [f"# Reproduction: {args.example} (mcergo {__version__})", ""]
        lines += render_table(header, [[r[h] for h in header] for r in rows])
        lines += ["", f"verdict: {'pass' if ok else 'FAIL'}"]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_ANALYTIC


def cmd_couple(args) -> int:
    if (args.spec is None) == (args.linear is None):
        raise SpecFormatError("provide a spec file or --linear, not both or neither")
    if args.linear is not None:
        sf = load_spec_file(args.linear)
        if sf.terms:
            raise SpecFormatError(
                f"{sf.origin}: --linear expects a plain base matrix without perturbations"
            )
    else:
        sf = load_spec_file(args.spec)
    base = _float_base(sf.base)
    mu0 = parse_law(args.mu0, sf.states, "--mu0")
    nu0 = parse_law(args.nu0, sf.states, "--nu0")

    sim = simulate_coupled(base, mu0, nu0, args.n, args.trials, args.seed, args.workers)
    rows = []
    suspicious = False
    for k in range(args.n + 1):
        exact = float(uncoupled_probability_exact(base, mu0, nu0, k))
        mc = float(sim.freq_by_step[k])
        sigma = math.sqrt(exact * (1.0 - exact) / args.trials)
        if sigma > 0:
            z = abs(mc - exact) / sigma
        else:
            z = 0.0 if mc == exact else math.inf
        flagged = z > 4.0
        suspicious = suspicious or flagged
        rows.append(
            {"n": k, "uncoupled_exact": exact, "mc_estimate": mc,
             "std_error": sigma, "z": z, "suspicious": flagged}
        )

    marg1 = np.asarray(marginal_law_exact(base, mu0, nu0, args.n, which=1).probs, dtype=float)
    marg2 = np.asarray(marginal_law_exact(base, mu0, nu0, args.n, which=2).probs, dtype=float)
    marginals = {
        "exact_first": marg1.tolist(),
        "exact_second": marg2.tolist(),
        "mc_first": sim.marginal1.tolist(),
        "mc_second": sim.marginal2.tolist(),
        "max_abs_diff_first": float(np.abs(marg1 - sim.marginal1).max()),
        "max_abs_diff_second": float(np.abs(marg2 - sim.marginal2).max()),
    }
    config = {
        "source": args.linear or args.spec,
        "mu0": args.mu0, "nu0": args.nu0, "n": args.n,
        "trials": args.trials, "format": args.format,
    }
    payload = {
        "version": __version__, "command": "couple", "config": config,
        "seed": args.seed, "workers": args.workers,
        "steps": rows, "marginals": marginals, "ok": not suspicious,
    }
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        header = ["n", "uncoupled_exact", "mc_estimate", "std_error", "z", "suspicious"]
        lines = [f"# Coupling simulation (mcergo {__version__})", ""]
        lines += render_table(
            ["setting", "value"],
            [[k, format_value(v)] for k, v in sorted(config.items())]
            + [["seed", args.seed], ["workers", args.workers]],
        )
        lines.append("")
        lines += render_table(header, [[r[h] for h in header] for r in rows])
        lines += [
            "",
            f"marginal max |diff|: first {format_value(marginals['max_abs_diff_first'])}, "
            f"second {format_value(marginals['max_abs_diff_second'])}",
            f"verdict: {'pass' if not suspicious else 'SUSPICIOUS'}",
        ]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if not suspicious else EXIT_ANALYTIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mcergo",
        description="Ergodicity certificates for finite nonlinear Markov chains.",
    )
    parser.add_argument("--version", action="version", version=f"mcergo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="run the certification pipeline on a spec file")
    pa.add_argument("spec", help="kernel-spec JSON file")
    pa.add_argument("--delta", type=float, default=0.05, help="radius slack (default 0.05)")
    pa.add_argument("--n-max", type=int, default=50, help="decay horizon (default 50)")
    pa.add_argument("--mu0", default="dirac:1", help="first initial law (default dirac:1)")
    pa.add_argument("--nu0", default="dirac:2", help="second initial law (default dirac:2)")
    pa.add_argument("--seed", type=int, default=0, help="sampler seed (default 0)")
    pa.add_argument("--samples", type=int, default=200, help="sampled laws (default 200)")
    pa.add_argument("--workers", type=int, default=1, help="recorded worker count")
    pa.add_argument("--n-cap", type=int, default=500, help="onset search cap (default 500)")
    pa.add_argument("--k-max", type=int, default=5, help="comparison depth (default 5)")
    pa.add_argument("--gamma-margin", type=float, default=0.1,
                    help="gamma smallness bar (default 0.1)")
    pa.add_argument("--lambda-margin", type=float, default=0.1,
                    help="lambda smallness bar (default 0.1)")
    pa.add_argument("--param", action="append", default=[], metavar="NAME=VALUE",
                    help="override a declared parameter (repeatable)")
    pa.add_argument("--format", choices=["json", "md", "csv"], default="json")
    pa.add_argument("--out", help="write to this path instead of stdout")
    pa.set_defaults(func=cmd_analyze)

    pr = sub.add_parser("reproduce", help="diff a bundled example against expected values")
    pr.add_argument("example", choices=["example1", "example2"])
    pr.add_argument("--format", choices=["json", "md", "csv"], default="md")
    pr.add_argument("--out", help="write to this path instead of stdout")
    pr.set_defaults(func=cmd_reproduce)

    pc = sub.add_parser("couple", help="simulate the coupling and check the exact mass")
    pc.add_argument("spec", nargs="?", help="kernel-spec JSON file (base matrix is used)")
    pc.add_argument("--linear", help="plain base-matrix JSON file {states, base}")
    pc.add_argument("--mu0", default="dirac:1", help="first initial law (default dirac:1)")
    pc.add_argument("--nu0", default="dirac:2", help="second initial law (default dirac:2)")
    pc.add_argument("--n", type=int, default=10, help="horizon (default 10)")
    pc.add_argument("--trials", type=int, default=100_000, help="Monte Carlo trials")
    pc.add_argument("--seed", type=int, default=7, help="simulation seed (default 7)")
    pc.add_argument("--workers", type=int, default=1, help="simulation chunks (default 1)")
    pc.add_argument("--format", choices=["json", "md"], default="md")
    pc.add_argument("--out", help="write to this path instead of stdout")
    pc.set_defaults(func=cmd_couple)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
