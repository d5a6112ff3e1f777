"""Report serialization: operation-tagged JSON, Markdown tables, decay CSV.

The JSON form wraps every report field as {"op": <operation name>, "value": …}
so a reader can trace each number to the operation that produced it, and
round-trips losslessly (non-finite floats are encoded as tagged strings,
integer map keys are restored on load).  Markdown mirrors the comparison
tables of the worked examples; CSV carries the decay curves only, with the
fixed column set n, tv_exact, bound_2C_r_delta, uncoupled_exact,
butkovsky_bound.  No output embeds timestamps: identical inputs give
byte-identical documents.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .convergence import BoundCheck, ErgodicityReport, PerturbationCheck, RateRow

CSV_HEADER = "n,tv_exact,bound_2C_r_delta,uncoupled_exact,butkovsky_bound"

# Operation that produced each report field, embedded next to its value.
FIELD_OPS = {
    "delta": "verify_main_bound",
    "n_max": "verify_main_bound",
    "alpha_linear_k": "md_alpha_linear",
    "alpha_nonlinear": "md_alpha_nonlinear",
    "alpha_nonlinear_exact": "md_alpha_nonlinear",
    "lambda1": "lipschitz_lambda",
    "lambda_k_bounds": "c_k_bound",
    "gamma": "gamma_perturbation",
    "gamma_error": "gamma_perturbation",
    "radius": "spectral_radius",
    "comparisons": "rate_comparison",
    "n_delta": "n_delta_surrogate",
    "gamma_threshold": "gamma_threshold",
    "big_c": "theorem_constant",
    "gamma_meets_threshold": "gamma_threshold",
    "gamma_margin": "verify_main_bound",
    "lambda_margin": "verify_main_bound",
    "lambda_bar_value": "c_k_bound",
    "hypotheses_met": "verify_main_bound",
    "hypotheses_notes": "verify_main_bound",
    "bound_checks": "verify_main_bound",
    "holds_from": "verify_main_bound",
    "perturbation_checks": "perturbation_bound",
    "tv_curve": "tv_decay",
    "uncoupled_curve": "uncoupled_probability_exact",
    "butkovsky_curve": "butkovsky_bound",
    "empirical_rate": "verify_main_bound",
    "log_radius": "spectral_radius",
    "equality_rate_case": "verify_main_bound",
}

_INT_KEY_FIELDS = {"alpha_linear_k", "lambda_k_bounds"}
_ROW_TYPES = {
    "comparisons": RateRow,
    "bound_checks": BoundCheck,
    "perturbation_checks": PerturbationCheck,
}


@dataclass(frozen=True, eq=False)
class ReportDocument:
    """An ErgodicityReport plus the run context it was produced under."""

    report: ErgodicityReport
    version: str
    command: str
    config: dict
    seed: int | None = None
    workers: int | None = None
    rate_sweep: list[dict] | None = None


def _encode(value):
    if isinstance(value, float) and not math.isfinite(value):
        return {"__nonfinite__": repr(value)}
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value):
    if isinstance(value, dict):
        if set(value) == {"__nonfinite__"}:
            return float(value["__nonfinite__"])
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def document_to_dict(doc: ReportDocument) -> dict:
    """Plain-dict form of a document, every report field tagged with its op."""
    fields = {}
    for name, op in FIELD_OPS.items():
        raw = getattr(doc.report, name)
        if name in _ROW_TYPES:
            raw = [asdict(row) for row in raw]
        fields[name] = {"op": op, "value": _encode(raw)}
    out = {
        "version": doc.version,
        "command": doc.command,
        "config": _encode(doc.config),
        "seed": doc.seed,
        "workers": doc.workers,
        "report": fields,
    }
    if doc.rate_sweep is not None:
        out["rate_sweep"] = {"op": "tv_decay", "value": _encode(doc.rate_sweep)}
    return out


def document_from_dict(data: dict) -> ReportDocument:
    """Rebuild a document (and its report) from the JSON dict form."""
    kwargs = {}
    for name in FIELD_OPS:
        value = _decode(data["report"][name]["value"])
        if name in _INT_KEY_FIELDS:
            value = {int(k): v for k, v in value.items()}
        elif name in _ROW_TYPES:
            value = [_ROW_TYPES[name](**row) for row in value]
        kwargs[name] = value
    sweep = data.get("rate_sweep")
    return ReportDocument(
        report=ErgodicityReport(**kwargs),
        version=data["version"],
        command=data["command"],
        config=_decode(data["config"]),
        seed=data["seed"],
        workers=data["workers"],
        rate_sweep=_decode(sweep["value"]) if sweep is not None else None,
    )


def to_json(doc: ReportDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2, sort_keys=True) + "\n"


def from_json(text: str) -> ReportDocument:
    return document_from_dict(json.loads(text))


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "yes" if x else "no"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def render_table(header: list[str], rows: list[list]) -> list[str]:
    lines = ["| " + " | ".join(header) + " |"]
    lines.append("|" + "|".join(" --- " for _ in header) + "|")
    for row in rows:
        lines.append("| " + " | ".join(format_value(v) for v in row) + " |")
    return lines


def to_markdown(doc: ReportDocument) -> str:
    rep = doc.report
    lines = [f"# Ergodicity analysis ({doc.command}, mcergo {doc.version})", ""]

    lines.append("## Configuration")
    lines.append("")
    cfg_rows = [[k, format_value(v)] for k, v in sorted(doc.config.items())]
    cfg_rows.append(["seed", format_value(doc.seed)])
    cfg_rows.append(["workers", format_value(doc.workers)])
    lines += render_table(["setting", "value"], cfg_rows)
    lines.append("")

    lines.append("## Coefficients")
    lines.append("")
    lines += render_table(
        ["quantity", "value"],
        [
            ["alpha (nonlinear, one step)", rep.alpha_nonlinear],
            ["alpha exact", rep.alpha_nonlinear_exact],
            ["lambda (one step, exact)", rep.lambda1],
            ["gamma", rep.gamma if rep.gamma is not None else rep.gamma_error],
            ["spectral radius r", rep.radius],
        ],
    )
    lines.append("")

    lines.append("## Rate comparison")
    lines.append("")
    lines += render_table(
        ["k", "r^k", "1 - alpha_k", "r^k < 1 - alpha_k", "lambda_k bound"],
        [
            [c.k, c.radius_power, c.one_minus_alpha, c.strictly_smaller,
             rep.lambda_k_bounds.get(c.k)]
            for c in rep.comparisons
        ],
    )
    lines.append("")

    lines.append("## Certificate")
    lines.append("")
    lines += render_table(
        ["quantity", "value"],
        [
            ["delta", rep.delta],
            ["n_delta (surrogate)", rep.n_delta],
            ["gamma threshold", rep.gamma_threshold],
            ["gamma < threshold", rep.gamma_meets_threshold],
            ["gamma margin", rep.gamma_margin],
            ["lambda bound at n_delta", rep.lambda_bar_value],
            ["lambda margin", rep.lambda_margin],
            ["constant C", rep.big_c],
            ["hypotheses met", rep.hypotheses_met],
            ["bound holds from n", rep.holds_from],
            ["empirical rate", rep.empirical_rate],
            ["log r", rep.log_radius],
            ["equality case lambda = alpha", rep.equality_rate_case],
        ],
    )
    if rep.hypotheses_notes:
        lines.append("")
        for note in rep.hypotheses_notes:
            lines.append(f"- {note}")
    lines.append("")

    if doc.rate_sweep:
        lines.append("## Rate sweep")
        lines.append("")
        lines += render_table(
            ["kappa", "empirical rate", "log r"],
            [[row["kappa"], row["empirical_rate"], row["log_radius"]]
             for row in doc.rate_sweep],
        )
        lines.append("")

    lines.append("## Decay")
    lines.append("")
    bounds = {c.n: c for c in rep.bound_checks}
    decay_rows = []
    for n, tv in enumerate(rep.tv_curve):
        check = bounds.get(n)
        decay_rows.append(
            [n, tv, check.bound_value if check else None,
             rep.uncoupled_curve[n], rep.butkovsky_curve[n],
             check.holds if check else None]
        )
    lines += render_table(
        ["n", "tv_exact", "bound_2C_r_delta", "uncoupled_exact",
         "butkovsky_bound", "bound holds"],
        decay_rows,
    )
    lines.append("")

    if rep.perturbation_checks:
        lines.append("## Flow vs base chain")
        lines.append("")
        lines += render_table(
            ["n", "tv(mu_n, base^n mu_0)", "tv(nu_n, base^n nu_0)",
             "exact bound", "small-gamma bound", "small-gamma valid", "holds"],
            [[c.n, c.tv_mu, c.tv_nu, c.exact_form, c.small_gamma_form,
              c.small_gamma_valid, c.holds] for c in rep.perturbation_checks],
        )
        lines.append("")

    return "\n".join(lines)


def to_csv(doc: ReportDocument) -> str:
    rep = doc.report
    bounds = {c.n: c.bound_value for c in rep.bound_checks}
    lines = [CSV_HEADER]
    for n, tv in enumerate(rep.tv_curve):
        bound = bounds.get(n)
        lines.append(
            ",".join(
                [str(n), repr(tv), "" if bound is None else repr(bound),
                 repr(rep.uncoupled_curve[n]), repr(rep.butkovsky_curve[n])]
            )
        )
    return "\n".join(lines) + "\n"
