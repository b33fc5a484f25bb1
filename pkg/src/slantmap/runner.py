"""Run orchestration: sample, analyse, check, and assemble the JSON report."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .connection import LambdaField
from .exprlang import BACKEND, eval_jet2, parse
from .geometry import hermitian_kahler_residuals, space_form_value
from .maps import eta_basis, mu_basis
from .scenario import Scenario, ScenarioError, load_builtin
from .theorems import (DOMAIN_LEMMAS, FAIL, NA, PASS, RANGE_LEMMAS, THEOREMS, CheckReport,
                       SampleSet, TOL_IDENTITY, connection_checks, lemma_suite,
                       norm_expansion_reports, ricci_reports, theorem_condition)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3
#: check kinds whose failures are findings about the statements, not run failures
NON_GATING = ("theorem", "report")
MAX_SKIPPED_FRACTION = 0.5

STRUCTURE_CHECKS = ("kernel.annihilation", "conformal", "slant.pointwise", "lambda.declared.closed-form",
                    "theta.declared", "hermitian.source", "kahler.source", "hermitian.target",
                    "kahler.target", "eq5.crosscheck")
CONNECTION_CHECKS = ("sff.symmetry", "eq14.split", "eq8-11.decomposition", "oneill.T-vertical-symmetry",
                     "eq12a.duality", "eq13.conformal-sff", "lambda.frame-invariance", "lambda.declared")
RICCI_CHECKS = ("thm3.6", "thm3.6.oracle", "thm3.7", "thm3.7.oracle")
NORM_CHECKS = ("thm4.6.range", "thm4.6.perp", "thm4.6.range.corrected", "thm4.6.perp.corrected",
               "eq73", "eq74", "eq73.corrected", "eq74.corrected")

GROUPS = {
    "structure": STRUCTURE_CHECKS,
    "lemmas.domain": DOMAIN_LEMMAS,
    "lemmas.range": RANGE_LEMMAS,
    "connection": CONNECTION_CHECKS,
    "ricci": RICCI_CHECKS,
    "norm": NORM_CHECKS,
    **{tid: (tid,) for tid in THEOREMS},
}
ALL_CHECK_IDS = tuple(c for ids in GROUPS.values() for c in ids)


def resolve_selection(selection: Iterable[str] | None) -> set[str] | None:
    """Expand ids and dotted prefixes (``lemma3``, ``thm4``) to known check ids."""
    if selection is None:
        return None
    out = set()
    for item in selection:
        item = item.strip()
        hits = [c for c in ALL_CHECK_IDS if c == item or c.startswith(item + ".")
                or (c.startswith(item) and item[-1:].isdigit() and c[len(item):len(item) + 1] in (".", ""))]
        if not hits:
            hits = [c for c in ALL_CHECK_IDS if c.startswith(item)]
        if not hits:
            raise ScenarioError(f"unknown check id {item!r}")
        out.update(hits)
    return out


@dataclass
class RunReport:
    """JSON-ready run document; ``text()`` is the canonical serialisation."""

    data: dict

    def text(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunReport":
        return cls(json.loads(text))

    @property
    def exit_code(self) -> int:
        return int(self.data["summary"]["exit_code"])

    @property
    def checks(self) -> dict[str, dict]:
        return {c["id"]: c for c in self.data["checks"]}

    @property
    def paper_notes(self) -> list[dict]:
        return self.data["paper_notes"]


def _f(x) -> float | str:
    x = float(x)
    return x if np.isfinite(x) else repr(x)


def _point_summary(k: int, ss: SampleSet, side: str) -> dict:
    ctx = ss.contexts[k]
    s = ctx.split
    out = {
        "point": [float(x) for x in s.point], "rank": int(s.rank),
        "lambda": float(s.lam), "conformal_residual": float(s.conformal_residual),
        "dim_ker": int(s.vertical_basis.shape[1]), "dim_range_perp": int(s.range_perp_basis.shape[1]),
        "vertical_basis": [[float(x) for x in col] for col in s.vertical_basis.T],
        "singular_values": [float(x) for x in s.singular_values],
    }
    try:
        sl = ss.slant(k, "domain" if side == "domain-slant" else "range")
        out["theta"], out["slant_spread"] = float(sl.theta), float(sl.spread)
    except ValueError as exc:
        out["theta"], out["slant_note"] = None, str(exc)
    if side == "domain-slant" and ss.F.source.J is not None and s.vertical_basis.shape[1]:
        out["dim_mu"] = int(mu_basis(s).shape[1])
    if side == "range-slant" and ss.F.target.J is not None:
        out["dim_eta"] = int(eta_basis(s).shape[1])
    return out


def _structure_checks(sc: Scenario, ss: SampleSet) -> list[CheckReport]:
    side = "domain" if sc.side == "domain-slant" else "range"
    pts = [list(map(float, c.split.point)) for c in ss.contexts]
    res = {c: [] for c in STRUCTURE_CHECKS}
    for k, ctx in enumerate(ss.contexts):
        s = ctx.split
        res["kernel.annihilation"].append(float(np.max(np.abs(s.differential @ s.vertical_basis), initial=0.0)))
        res["conformal"].append(s.conformal_residual / max(1.0, s.lambda_sq))
        try:
            sl = ss.slant(k, side)
            res["slant.pointwise"].append(sl.spread)
            if sc.declared_theta is not None:
                res["theta.declared"].append(abs(sl.theta - eval_jet2(sc.declared_theta, s.point).value))
        except ValueError:
            pass
        if sc.declared_lambda is not None:
            lam = eval_jet2(sc.declared_lambda, s.point).value
            res["lambda.declared.closed-form"].append(abs(s.lam - lam) / abs(lam))
        for where, M, q in (("source", ss.F.source, s.point), ("target", ss.F.target, s.value)):
            if M.J is not None:
                r = hermitian_kahler_residuals(M, q)
                res[f"hermitian.{where}"].append(max(r["jsq"], r["compat"]))
                res[f"kahler.{where}"].append(r["kahler"])
        if sc.v is not None and ss.F.source.J is not None:
            rng = ss.rng(10_000 + k)
            R = s.src.curvature
            worst = 0.0
            for _ in range(8):
                Y = [rng.standard_normal(s.m) for _ in range(4)]
                worst = max(worst, abs(R.form(*Y) - space_form_value(sc.v, s.src.g, s.src.J, *Y)))
            res["eq5.crosscheck"].append(worst)

    def rep(cid, tol, notes="", kind="identity"):
        vals = res[cid]
        if not vals:
            return None
        r = float(max(vals))
        return CheckReport(cid, pts, r, tol, PASS if r <= tol else FAIL, notes, kind)

    out = [
        rep("kernel.annihilation", ss.tol("kernel.annihilation", 1e-10), "max |dF v| over the computed kernel basis"),
        rep("conformal", ss.tol("conformal", 1e-8),
            "max |Gram(F* horizontal) - lambda^2 I| / max(1, lambda^2)"),
        rep("slant.pointwise", ss.tol("slant.pointwise", 1e-6), "spread of the Wirtinger angle over probes"),
        rep("theta.declared", ss.tol("theta.declared", 1e-6), "|theta - declared theta|"),
        rep("lambda.declared.closed-form", ss.tol("lambda.declared.closed-form", 1e-8),
            "relative deviation from the declared dilation"),
        rep("hermitian.source", ss.tol("hermitian.source", 1e-10), "J^2 = -I and g(J., J.) = g"),
        rep("kahler.source", ss.tol("kahler.source", 1e-8), "max |nabla J| on an orthonormal frame", "report"),
        rep("hermitian.target", ss.tol("hermitian.target", 1e-10), "J^2 = -I and g(J., J.) = g"),
        rep("kahler.target", ss.tol("kahler.target", 1e-8), "max |nabla J| on an orthonormal frame", "report"),
        rep("eq5.crosscheck", ss.tol("eq5.crosscheck", 1e-10),
            f"source curvature against the space-form formula at v = {sc.v}"
            + ("" if sc.v == 0 else "; formula-only for v != 0, no metric realises it")),
    ]
    return [r for r in out if r is not None]


# --------------------------------------------------------------------------
# notes on printed statements


def _note(note_id: str, summary: str, **evidence) -> dict:
    return {"id": note_id, "summary": summary,
            "evidence": {k: (_f(v) if isinstance(v, (float, np.floating)) else v) for k, v in evidence.items()}}


def _generic_notes(checks: dict[str, CheckReport], ss: SampleSet) -> list[dict]:
    notes = []
    for where in ("source", "target"):
        c = checks.get(f"kahler.{where}")
        if c is not None and c.verdict == FAIL:
            notes.append(_note(f"kahler-residual.{where}",
                               f"the {where} structure is not Kaehler at the sampled points (nabla J != 0); "
                               "statements assuming a Kaehler structure are evaluated anyway",
                               max_residual=c.residual))
    c = checks.get("theta.declared")
    if c is not None and c.verdict == FAIL:
        notes.append(_note("theta-declared-range",
                           "the Wirtinger angle lies in [0, pi/2]; the declared slant function does not "
                           "match it at every sampled point (a signed or out-of-range declaration)",
                           max_deviation=c.residual))
    a, b = checks.get("lemma3.3.iv"), checks.get("lemma3.3.iv.sign-corrected")
    if a is not None and b is not None and a.verdict == FAIL and b.verdict == PASS:
        notes.append(_note("lemma3.3.iv-sign",
                           "g(X, omega phi V) = -g(CX, omega V) fails while the opposite sign holds",
                           printed_residual=a.residual, corrected_residual=b.residual))
    t35 = checks.get("thm3.5")
    if t35 is not None and t35.clauses:
        cl = {c.name: c for c in t35.clauses}
        h, lc = cl.get("harmonic"), cl.get("lambda-constant-on-horizontal")
        if t35.verdict == FAIL and h is not None and h.holds and lc is not None and not lc.holds:
            notes.append(_note("thm3.5-harmonic-without-homothety",
                               "the map is harmonic while lambda is not constant on the horizontal space",
                               tension_norm=h.residual, horizontal_grad_log_lambda=lc.residual))
    for tid in THEOREMS:
        c = checks.get(tid)
        if c is not None and c.verdict == FAIL and tid != "thm3.5":
            notes.append(_note(f"{tid}-violated", f"observed clause values contradict: {c.notes}",
                               clauses={x.name: _f(x.residual) for x in c.clauses or []}))
    for pr, co, what in (("eq73", "eq73.corrected", "range"), ("eq74", "eq74.corrected", "perp")):
        p, q = checks.get(pr), checks.get(co)
        if p is not None and q is not None and p.verdict == FAIL and q.verdict == PASS:
            notes.append(_note(f"{pr}-lambda-factor",
                               f"the {what} decomposition of sin^2 Theta SFF(Y, Y) closes only with the "
                               "pulled-back D-term divided by lambda^2",
                               printed_residual=p.residual, corrected_residual=q.residual))
    p, q = checks.get("thm4.6.range"), checks.get("thm4.6.range.corrected")
    if p is not None and q is not None and p.verdict == FAIL and q.verdict == PASS:
        notes.append(_note("thm4.6-cross-term",
                           "the printed range expansion uses g_L(nabla_Y Y, nabla_Y U) where the pushed "
                           "inner product lambda^2 g_L of the horizontal parts is required",
                           printed_residual=p.residual, corrected_residual=q.residual))
    if "thm3.7" in checks and checks["thm3.7"].verdict != NA:
        notes.append(_note("thm3.7-bracket-coefficient",
                           "the printed bound carries -1/4 |3 V[X, X_n]|^2; the curvature relation gives "
                           "+3/4 sum |V[X, X_n]|^2; the two agree only when horizontal brackets are vertical-free",
                           evidence_in_this_run="brackets vanish" if _brackets_vanish(ss) else "brackets nonzero"))
    if ss.F.source.J is not None and ss.contexts:
        odd = [c for c in ss.contexts if c.split.vertical_basis.shape[1] % 2]
        if odd:
            notes.append(_note("dim-parity", "dim ker F* is odd at some points, so dim ker = 2r cannot hold",
                               points=len(odd)))
    return notes


def _brackets_vanish(ss: SampleSet) -> bool:
    for ctx in ss.contexts:
        for X in ctx.horizontal:
            for Y in ctx.horizontal:
                br = ctx.split.P_vertical @ ctx.lie_bracket(ctx.hfield(X), ctx.hfield(Y))
                if ctx.normM(br) > TOL_IDENTITY:
                    return False
    return True


def _builtin_notes(sc: Scenario, ss: SampleSet) -> list[dict]:
    """Printed bases of the built-in examples compared with the computed split."""
    notes = []
    if not ss.contexts:
        return notes
    m = sc.m
    params = {k: v for k, v in sc.params.items() if not isinstance(v, str)}

    def field(texts):
        return [parse(t, m, params) for t in texts]

    def at(exprs, p):
        return np.array([eval_jet2(e, p).value for e in exprs])

    if sc.name == "ex3_1":
        printed = {"X": field(["exp(x1)*cos(x3)", "0", "0", "-exp(x1)*sin(x3)"]),
                   "Y": field(["exp(x1)*sin(x3)", "0", "0", "exp(x1)*cos(x3)"])}
        worst = 0.0
        for ctx in ss.contexts:
            for vec in printed.values():
                v = at(vec, ctx.split.point)
                worst = max(worst, ctx.normM(ctx.split.P_vertical @ v) / max(ctx.normM(v), 1e-300))
        notes.append(_note("ex3_1-horizontal-basis",
                           "the printed horizontal vectors use d/dx4, which spans part of ker F*; "
                           "the horizontal space is span{d/dx1, d/dx3}",
                           max_vertical_fraction=worst))
    elif sc.name == "ex4_1":
        a = float(sc.params.get("a", 0.3)) if not isinstance(sc.params.get("a"), str) else None
        if a is not None:
            pa = np.pi ** a
            ch, sh = np.cosh(a), np.sinh(a)
            printed_ker = pa * np.array([0, ch, sh, 0, 0, 0])
            true_ker = np.array([0, sh, ch, 0, 0, 0])
            Y = pa * np.array([0, 0, 0, -ch, sh, 0])
            A = ss.contexts[0].split.differential
            s = ss.contexts[0].split
            notes.append(_note("ex4_1-kernel-basis",
                               "the printed kernel vector pi^a (cosh a d/dx2 + sinh a d/dx3) is not "
                               "annihilated by the differential; sinh a d/dx2 + cosh a d/dx3 is",
                               printed_residual=float(np.linalg.norm(A @ printed_ker)),
                               corrected_residual=float(np.linalg.norm(A @ true_ker))))
            notes.append(_note("ex4_1-horizontal-basis",
                               "the printed Y = pi^a(-cosh a d/dx4 + sinh a d/dx5) is not orthogonal to "
                               "the kernel; its pushforward is pi^(2a) sinh(2a) d/dy3, not "
                               "pi^(2a)(cosh^2 a + sinh^2 a) d/dy3",
                               vertical_fraction=float(np.linalg.norm(s.P_vertical @ Y) / np.linalg.norm(Y)),
                               pushed_third_component=float((A @ Y)[2]),
                               printed_third_component=float(pa ** 2 * (ch ** 2 + sh ** 2))))
    return notes


# --------------------------------------------------------------------------


def build_sample_set(sc: Scenario, points: Sequence | None = None, tol_scale: float = 1.0) -> SampleSet:
    lam = LambdaField(sc.map, sc.declared_lambda, allow_full_rank=sc.allow_full_rank)
    return SampleSet.build(sc.map, points if points is not None else sc.points(), lam,
                           theta_decl=sc.declared_theta, v=sc.v, seed=sc.seed,
                           probe_pairs=sc.probe_pairs, tolerances=dict(sc.tolerances),
                           tol_scale=tol_scale, allow_full_rank=sc.allow_full_rank)


def run_analysis(sc: Scenario, selection: Iterable[str] | None = None, *, tol_scale: float = 1.0,
                 timestamp: bool = True, builtin: bool = False) -> RunReport:
    t0 = time.perf_counter()
    wanted = resolve_selection(selection if selection is not None else sc.only)
    pts = sc.points()
    ss = build_sample_set(sc, pts, tol_scale)
    skipped = [{"point": p, "reason": r} for p, r in ss.skipped]
    degenerate = len(ss.skipped) > MAX_SKIPPED_FRACTION * len(pts)

    def want(group):
        return wanted is None or any(c in wanted for c in GROUPS[group])

    reports: list[CheckReport] = []
    if ss.contexts and not degenerate:
        if want("structure"):
            reports += _structure_checks(sc, ss)
        if want("lemmas.domain") and (sc.side == "domain-slant" or wanted is not None):
            reports += lemma_suite(ss, "domain")
        if want("lemmas.range") and (sc.side == "range-slant" or wanted is not None):
            reports += lemma_suite(ss, "range")
        if want("connection"):
            reports += connection_checks(ss)
        for tid, spec in THEOREMS.items():
            if want(tid) and (wanted is not None or spec.side == sc.side.split("-")[0]):
                reports.append(theorem_condition(ss, tid))
        if want("ricci") and (sc.side == "domain-slant" or wanted is not None):
            reports += ricci_reports(ss)
        if want("norm") and (sc.side == "range-slant" or wanted is not None):
            reports += norm_expansion_reports(ss)
    if wanted is not None:
        reports = [r for r in reports if r.check_id in wanted]
    by_id = {r.check_id: r for r in reports}

    side = "domain" if sc.side == "domain-slant" else "range"
    summaries = [_point_summary(k, ss, sc.side) for k in range(len(ss.contexts))]
    notes = [] if degenerate else _generic_notes(by_id, ss)
    if builtin and not degenerate:
        notes += _builtin_notes(sc, ss)

    counts = {PASS: 0, FAIL: 0, NA: 0}
    gating_fail = False
    for r in reports:
        counts[r.verdict] += 1
        if r.verdict == FAIL and r.kind not in NON_GATING:
            gating_fail = True
    if degenerate:
        code = EXIT_DEGENERATE
    elif gating_fail:
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    reason = ""
    if degenerate:
        reasons = sorted({r for _, r in ss.skipped})
        reason = (f"{len(ss.skipped)} of {len(pts)} points skipped: "
                  + (reasons[0].split(":")[0] if reasons else "degenerate"))
    data = {
        "scenario": sc.name,
        "scenario_digest": sc.digest,
        "tool_version": __version__,
        "backend": BACKEND,
        "side": side,
        "params": {k: (v if isinstance(v, str) else float(v)) for k, v in sorted(sc.params.items())},
        "seed": sc.seed,
        "tol_scale": float(tol_scale),
        "points": summaries,
        "skipped_points": skipped,
        "checks": [r.to_json() for r in reports],
        "paper_notes": notes,
        "summary": {"passed": counts[PASS], "failed": counts[FAIL], "not_applicable": counts[NA],
                    "exit_code": code, "reason": reason},
    }
    if timestamp:
        data["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        data["wall_time_s"] = round(time.perf_counter() - t0, 3)
    return RunReport(data)


def verify_builtin(name: str, overrides=None, *, seed: int | None = None, points: int | None = None,
                   tol_scale: float = 1.0, timestamp: bool = True) -> RunReport:
    sc = load_builtin(name, overrides)
    if seed is not None:
        sc.seed = seed
    if points is not None:
        sc.n_points = points
    return run_analysis(sc, tol_scale=tol_scale, timestamp=timestamp, builtin=True)


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "slantmap run report",
    "type": "object",
    "required": ["scenario", "points", "checks", "paper_notes", "summary"],
    "properties": {
        "scenario": {"type": "string"},
        "scenario_digest": {"type": "string"},
        "tool_version": {"type": "string"},
        "backend": {"enum": ["compiled", "python"]},
        "side": {"enum": ["domain", "range"]},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
        "tol_scale": {"type": "number"},
        "points": {"type": "array", "items": {
            "type": "object",
            "required": ["point", "rank", "lambda", "theta"],
            "properties": {
                "point": {"type": "array", "items": {"type": "number"}},
                "rank": {"type": "integer"},
                "lambda": {"type": "number"},
                "theta": {"type": ["number", "null"]},
                "slant_spread": {"type": "number"},
                "conformal_residual": {"type": "number"},
                "dim_ker": {"type": "integer"},
                "dim_range_perp": {"type": "integer"},
                "dim_mu": {"type": "integer"},
                "dim_eta": {"type": "integer"},
                "vertical_basis": {"type": "array"},
                "singular_values": {"type": "array"},
            }}},
        "skipped_points": {"type": "array", "items": {
            "type": "object", "required": ["point", "reason"]}},
        "checks": {"type": "array", "items": {
            "type": "object",
            "required": ["id", "residual", "tolerance", "verdict", "notes"],
            "properties": {
                "id": {"type": "string"},
                "kind": {"enum": ["identity", "lemma", "theorem", "inequality", "report"]},
                "residual": {"type": ["number", "string"]},
                "tolerance": {"type": "number"},
                "verdict": {"enum": ["pass", "fail", "not-applicable"]},
                "notes": {"type": "string"},
                "points": {"type": "array"},
                "lhs": {"type": ["number", "string"]},
                "rhs": {"type": ["number", "string"]},
                "slack": {"type": ["number", "string"]},
                "clauses": {"type": "array", "items": {
                    "type": "object", "required": ["name", "residual", "tolerance", "holds"]}},
            }}},
        "paper_notes": {"type": "array", "items": {
            "type": "object", "required": ["id", "summary", "evidence"]}},
        "summary": {"type": "object", "required": ["passed", "failed", "not_applicable", "exit_code"]},
        "timestamp": {"type": "string"},
        "wall_time_s": {"type": "number"},
    },
}

__all__ = ["ALL_CHECK_IDS", "EXIT_DEGENERATE", "EXIT_FAIL", "EXIT_INPUT", "EXIT_OK", "REPORT_SCHEMA",
           "RunReport", "build_sample_set", "resolve_selection", "run_analysis", "verify_builtin"]
