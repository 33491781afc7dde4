# apps/reports/services.py
"""
One function per command. The management command and the HTTP views both
go through :func:`execute`, which validates the request, scopes the
tolerances, runs the command and builds the report.

Exit codes: 0 success and verified, 2 constructed but not verified, 1 error.
"""

import logging
from typing import NamedTuple

import numpy as np
from rest_framework.exceptions import ErrorDetail

from apps.pencils.conf import overrides, tolerances
from apps.pencils.exceptions import IllConditioned, PencilError, VerificationFailed
from apps.pencils.rank_one import RankOneForm, decompose, degenerate_regularity_check, materialize
from apps.pencils.spectral import eig_structure, minimal_quotient, weierstrass
from apps.placement.bounds import check_all
from apps.placement.feedback import DaeSystem, hautus_controllable, place_feedback
from apps.placement.placement import PlacementSpec, inverse_construct, place
from apps.placement.restricted import pole_profile, solve_w
from apps.placement.trials import TRIALS

from . import serializers as io

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNVERIFIED = 2


class Outcome(NamedTuple):
    payload: dict
    verified: bool = True


def _placement(result):
    return io.PlacementResultSerializer(result).data


def analyze(data):
    pencil = data["pencil"]
    sd = eig_structure(pencil)
    payload = {
        "spectrum": io.SpectralDataSerializer(sd).data,
        "minimal_quotient": io.PolynomialField().to_representation(minimal_quotient(pencil, sd)),
    }
    try:
        wf = weierstrass(pencil, real_form=data["real"], sd=sd)
        payload["weierstrass"] = {
            "r": wf.r,
            "cond": wf.cond,
            "blocks": io.BlockSerializer(wf.blocks, many=True).data,
        }
    except IllConditioned as exc:
        payload["weierstrass"] = {"error": exc.as_dict()}
    return Outcome(payload)


def wcf(data):
    pencil = data["pencil"]
    wf = weierstrass(pencil, real_form=data["real"])
    payload = dict(io.WeierstrassSerializer(wf).data)
    payload["residual"] = max(wf.residual(pencil, s0) for s0 in (0.0, 1.0, 0.5j))
    return Outcome(payload)


def decompose_pencil(data):
    pencil = data["pencil"]
    P1 = decompose(pencil.E, pencil.A)
    back = materialize(P1)
    residual = float(np.linalg.norm(back.E - pencil.E, 2) + np.linalg.norm(back.A - pencil.A, 2))
    return Outcome({"rank_one": io.RankOnePencilSerializer(P1).data, "residual": residual})


def place_targets(data):
    result = place(data["pencil"], PlacementSpec(data["targets"]), real_mode=data["real"], seed=data.get("seed"))
    return Outcome({"placement": _placement(result)})


def place_restricted(data):
    pencil = data["pencil"]
    sd = eig_structure(pencil)
    u, v = data.get("u"), data.get("v")
    profile = pole_profile(pencil, u, v, sd)
    result = solve_w(
        pencil, u, v, PlacementSpec(data["targets"]), real_mode=data["real"], seed=data.get("seed"), sd=sd
    )
    return Outcome({"pole_profile": io.PoleProfileSerializer(profile).data, "placement": _placement(result)})


def feedback(data):
    system = DaeSystem(data["E"], data["A"], data["b"])
    sd = eig_structure(system.pencil)
    verdict = hautus_controllable(system, sd=sd)
    f, result = place_feedback(
        system, PlacementSpec(data["targets"]), real_mode=data["real"], seed=data.get("seed"), sd=sd
    )
    return Outcome(
        {
            "f": io.VectorField().to_representation(f),
            "hautus": io.HautusVerdictSerializer(verdict).data,
            "placement": _placement(result),
        }
    )


def inverse(data):
    problem = inverse_construct(data["before"], data["after"], seed=data.get("seed"))
    return Outcome(
        {
            "pencil": {
                "format_version": io.FORMAT_VERSION,
                "n": problem.pencil.n,
                "E": io.MatrixField().to_representation(problem.pencil.E),
                "A": io.MatrixField().to_representation(problem.pencil.A),
            },
            "placement": _placement(problem.result),
        }
    )


def verify_bounds(data):
    pencil = data["pencil"]["pencil"]
    P1 = data["rank_one"]["rank_one"]
    payload = {"rank_one": io.RankOnePencilSerializer(P1).data}
    if P1.form == RankOneForm.DEGENERATE:
        payload["regularity"] = io.RegularityVerdictSerializer(degenerate_regularity_check(pencil, P1)).data
    report = check_all(pencil, P1)
    payload["bounds"] = io.BoundsReportSerializer(report).data
    return Outcome(payload, report.overall_pass)


def trials(data):
    runner = TRIALS[data["kind"]]
    kwargs = {"size_min": data["size_min"], "size_max": data["size_max"], "seed": data.get("seed") or 0}
    if data["kind"] == "place":
        kwargs["real_mode"] = data["real"]
    summary = runner(data["count"], **kwargs)
    return Outcome({"summary": summary.as_dict()}, summary.silent_failures == 0)


COMMANDS = {
    "analyze": (io.PencilRequestSerializer, analyze),
    "wcf": (io.PencilRequestSerializer, wcf),
    "decompose": (io.PencilRequestSerializer, decompose_pencil),
    "place": (io.PlaceRequestSerializer, place_targets),
    "place-restricted": (io.RestrictedRequestSerializer, place_restricted),
    "feedback": (io.FeedbackRequestSerializer, feedback),
    "inverse": (io.InverseRequestSerializer, inverse),
    "verify-bounds": (io.BoundsRequestSerializer, verify_bounds),
    "trials": (io.TrialsRequestSerializer, trials),
}


def execute(command, data):
    """
    Runs ``command`` on the raw request ``data`` (the parsed JSON body or
    the CLI arguments merged with the input files).

    Returns ``(exit_code, report)``; ``report`` only holds JSON primitives.
    """
    serializer_class, handler = COMMANDS[command]
    report = {"command": command, "arguments": data, "tolerances": tolerances(), "seed": None}
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        return _finish(report, EXIT_ERROR, error={"detail": serializer.errors, "code": "invalid", "context": {}})

    options = serializer.validated_data
    with overrides(tol_rank=options.get("tol_rank"), tol_cluster=options.get("tol_cluster"), seed=options.get("seed")):
        report["tolerances"] = tolerances()
        report["seed"] = options.get("seed")
        try:
            outcome = handler(options)
        except VerificationFailed as exc:
            result = _placement(exc.result) if exc.result is not None else None
            return _finish(report, EXIT_UNVERIFIED, result={"placement": result}, error=exc.as_dict())
        except PencilError as exc:
            logger.info("%s rejected: %s", command, exc)
            return _finish(report, EXIT_ERROR, error=exc.as_dict())
    code = EXIT_OK if outcome.verified else EXIT_UNVERIFIED
    return _finish(report, code, result=outcome.payload)


def _finish(report, code, result=None, error=None):
    report["status"] = {EXIT_OK: "ok", EXIT_UNVERIFIED: "verification_failed"}.get(code, "error")
    report["exit_code"] = code
    report["arguments"] = _plain(report["arguments"])
    report["result"] = _plain(result)
    report["error"] = _plain(error)
    return code, report


def _plain(value):
    """Drops the serializer bookkeeping (``ReturnDict``, ``ErrorDetail``) from nested output."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, ErrorDetail):
        return str(value)
    if isinstance(value, np.generic):
        return value.item()
    return value


def render_text(report):
    """Human-readable rendering; the JSON report carries the same content."""
    lines = [
        f"command: {report['command']}",
        f"status:  {report['status']} (exit {report['exit_code']})",
        "tolerances: " + ", ".join(f"{key}={value:g}" for key, value in report["tolerances"].items()),
    ]
    if report["seed"] is not None:
        lines.append(f"seed: {report['seed']}")
    if report["error"]:
        lines.append(f"error: {report['error']['detail']}")
        for key, value in (report["error"].get("context") or {}).items():
            lines.append(f"  {key}: {value}")
    if report["result"]:
        lines.extend(_render(report["result"], 0))
    return "\n".join(lines)


def _format(value):
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, float) for x in value):
        re_, im = value
        return f"{re_:.6g}{im:+.6g}i"
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list):
        return "[" + ", ".join(_format(x) for x in value) + "]"
    return str(value)


def _render(value, depth):
    pad = "  " * depth
    lines = []
    for key, item in value.items():
        if key == "eigs":
            lines.append(f"{pad}{'lambda':>14}  {'segre':<12} {'dim':>4}")
            for eig in item:
                segre = " ".join(str(s) for s in eig["segre"])
                lines.append(f"{pad}{_format(eig['lam']):>14}  {'[' + segre + ']':<12} {eig['root_dim']:>4}")
        elif key == "records":
            for record in item:
                where = _format(record["lam"]) if record["lam"] is not None else "total"
                flag = "ok" if record["satisfied"] else "VIOLATED"
                level = f" k={record['k']}" if record["k"] is not None else ""
                lines.append(
                    f"{pad}{record['check']:<16} {where:>12}{level:<6} "
                    f"{record['before']:>3} -> {record['after']:<3} in [{record['lower']}, {record['upper']}]  {flag}"
                )
        elif isinstance(item, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render(item, depth + 1))
        elif isinstance(item, list) and item and isinstance(item[0], dict):
            lines.append(f"{pad}{key}:")
            for entry in item:
                lines.append(f"{pad}  - " + ", ".join(f"{k}={_format(v)}" for k, v in entry.items()))
        else:
            lines.append(f"{pad}{key}: {_format(item)}")
    return lines
