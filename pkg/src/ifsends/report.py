"""Full analysis pipeline and its serialisations."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .affine import AffineMap, contraction_bound
from .attractor import (
    DEFAULT_CLOUD_CAP,
    ComponentReport,
    IdempotentImageSet,
    PointCloud,
    count_components,
    idempotent_images,
    isolated_candidates,
    render_raster,
    sample_cloud,
    to_pgm,
    cloud_csv,
)
from .dsl import IfsDocument
from .ends import (
    CertificateRefused,
    EndsEstimate,
    LinkGraph,
    OneEndCertificate,
    build_link_graph,
    classify_ends,
    link_dot,
    link_graph_connected,
    one_ended_certificate,
)
from .exact_field import format_scalar
from .semigroup import (
    BallTruncated,
    CayleyBall,
    IdempotentEvidence,
    build_ball,
    cayley_dot,
    certify_no_idempotents,
    word_evaluate,
)

__all__ = ["DEFAULT_PARAMS", "FORMATS", "AnalysisReport", "analyze", "emit", "default_epsilon",
           "coefficients"]

DEFAULT_PARAMS: dict[str, Any] = {
    "ball_depth": 10,
    "link_depth": 6,
    "k_max": 6,
    "margin": 3,
    "L": 10,
    "epsilon": None,
    "resolution": 512,
    "vertex_cap": 2_000_000,
    "cloud_cap": DEFAULT_CLOUD_CAP,
}

FORMATS = ("json", "dot_cayley", "dot_link", "pgm", "csv")


def coefficients(m: AffineMap) -> list[str]:
    """Linear part row by row, then the translation, as exact strings."""
    return [format_scalar(x) for row in m.linear for x in row] + [
        format_scalar(x) for x in m.translation]


def default_epsilon(cloud: PointCloud) -> float:
    return max(2 * cloud.error_radius, cloud.system.diameter_bound / 512)


def _point_str(p) -> str:
    cs = [format_scalar(c) for c in p.coords]
    return cs[0] if len(cs) == 1 else "(" + ", ".join(cs) + ")"


def _sorted_points(points) -> list[str]:
    return [_point_str(p) for p in sorted(points, key=lambda p: (tuple(p.to_float()), p.key))]


@dataclass
class AnalysisReport:
    document: IfsDocument
    params: dict
    ball: CayleyBall
    evidence: IdempotentEvidence
    link_graph: LinkGraph
    ends: EndsEstimate | None
    certificate: OneEndCertificate | None
    refusal: CertificateRefused | None
    cloud: PointCloud
    components: ComponentReport
    C: IdempotentImageSet
    candidates: list
    relations: list[dict]
    verdicts: dict
    anomalies: list[dict] = field(default_factory=list)

    @property
    def system(self):
        return self.document.system

    def to_json(self) -> dict:
        s = self.system
        gens = [
            {"name": n, "linear": [[format_scalar(x) for x in row] for row in m.linear],
             "translation": [format_scalar(x) for x in m.translation],
             "contraction_bound": contraction_bound(m)}
            for n, m in zip(s.names, s.maps)
        ]
        ball = self.ball
        comps = self.components.to_json()
        comps["cloud"] = {
            "L": self.cloud.word_length,
            "points": len(self.cloud),
            "error_radius": self.cloud.error_radius,
            "seed": None if self.cloud.seed is None else _point_str(self.cloud.seed),
        }
        comps["isolated_candidates"] = _sorted_points(self.candidates)
        link = self.link_graph.to_json()
        if self.refusal is not None:
            link["certificate_refusal"] = self.refusal.reason
            link["unlinked_partition"] = self.refusal.partition
        return {
            "system": {
                "dim": s.dim,
                "radicand": s.radicand,
                "generators": gens,
                "lambda": s.lam,
                "diameter_bound": s.diameter_bound,
                "relations": self.relations,
                "diagnostics": list(self.document.diagnostics),
            },
            "idempotents": {
                **self.evidence.to_json(s),
                "ball": {"depth": ball.radius, "vertices": len(ball),
                         "finite_semigroup": ball.is_finite_semigroup,
                         "constants": len(self.C.values)},
            },
            "ends": None if self.ends is None else self.ends.to_json(),
            "link_graph": link,
            "certificate": None if self.certificate is None else self.certificate.to_json(s),
            "components": comps,
            "C": {"depth": self.C.depth, "values": _sorted_points(self.C.values)},
            "verdicts": self.verdicts,
            "anomalies": self.anomalies,
            "params": self.params,
        }


def analyze(doc: IfsDocument, params: dict | None = None) -> AnalysisReport:
    """Run every stage and collect verdicts; failed relations become anomalies."""
    p = {**DEFAULT_PARAMS, **(params or {})}
    system = doc.system
    anomalies: list[dict] = []

    relations = []
    for lhs, rhs in doc.relations:
        fl, fr = word_evaluate(system, lhs), word_evaluate(system, rhs)
        entry = {"lhs": system.word_str(lhs, " "), "rhs": system.word_str(rhs, " "),
                 "holds": fl == fr}
        relations.append(entry)
        if fl != fr:
            anomalies.append({
                "kind": "relation",
                "relation": f"{entry['lhs']} = {entry['rhs']}",
                "lhs_coefficients": coefficients(fl),
                "rhs_coefficients": coefficients(fr),
            })

    try:
        ball = build_ball(system, p["ball_depth"], cap=p["vertex_cap"])
    except BallTruncated as exc:
        if exc.completed_depth < 1:
            raise RuntimeError(f"ball stage: {exc}") from exc
        ball = build_ball(system, exc.completed_depth)
    eff = {"ball_depth": ball.radius}

    evidence = certify_no_idempotents(system)
    lg = build_link_graph(system, min(p["link_depth"], ball.radius), ball)
    eff["link_depth"] = lg.depth

    k_max = min(p["k_max"], ball.radius - p["margin"])
    ends = None
    if k_max >= 2:
        ends = classify_ends(system, k_max, p["margin"], ball)
    eff["k_max"] = k_max if ends is not None else None

    cert = refusal = None
    try:
        cert = one_ended_certificate(system, lg.depth)
    except CertificateRefused as exc:
        refusal = exc

    L = p["L"]
    n = len(system)
    while L > 0 and n ** L > p["cloud_cap"]:
        L -= 1
    cloud = sample_cloud(system, L, cap=p["cloud_cap"])
    eff["L"] = L
    eps = p["epsilon"] if p["epsilon"] is not None else default_epsilon(cloud)
    eps = float(eps)
    eff["epsilon"] = eps
    comps = count_components(cloud, eps)
    C = idempotent_images(ball)
    candidates = isolated_candidates(cloud, eps)

    inputs = {"ball_depth": ball.radius, "L": L, "epsilon": eps}
    if ends is not None and ends.exactly is not None:
        thm3 = {"applies": True, "holds": comps.nondegenerate_count <= ends.exactly,
                "nondegenerate": comps.nondegenerate_count, "ends": ends.exactly}
    else:
        thm3 = {"applies": False, "holds": None, "nondegenerate": comps.nondegenerate_count,
                "ends": None}
    thm3["inputs"] = {**inputs, "k_max": eff["k_max"], "margin": p["margin"]}
    ckeys = C.keys()
    outside = [q for q in candidates if q.key not in ckeys]
    thm10 = {"holds": not outside, "candidates": len(candidates),
             "outside_C": _sorted_points(outside), "inputs": inputs}
    if cert is not None:
        ok = ends is not None and ends.exactly == 1
        thm13 = {"applies": True, "holds": ok,
                 "ends": None if ends is None else ends.classification}
    else:
        thm13 = {"applies": False, "holds": None,
                 "ends": None if ends is None else ends.classification}
    thm13["inputs"] = {"link_depth": lg.depth, "k_max": eff["k_max"], "margin": p["margin"]}
    verdicts = {"thm3_bound": thm3, "thm10_containment": thm10, "thm13_consistency": thm13}
    for name, v in verdicts.items():
        if v["holds"] is False:
            anomalies.append({"kind": "verdict", "verdict": name})

    params_out = {k: v for k, v in p.items()}
    params_out["effective"] = eff
    return AnalysisReport(doc, params_out, ball, evidence, lg, ends, cert, refusal, cloud,
                          comps, C, candidates, relations, verdicts, anomalies)


def report_json(report: AnalysisReport) -> str:
    return json.dumps(report.to_json(), indent=2) + "\n"


def emit(report: AnalysisReport, fmt: str) -> bytes:
    if fmt == "json":
        return report_json(report).encode()
    if fmt == "dot_cayley":
        return cayley_dot(report.ball).encode()
    if fmt == "dot_link":
        return link_dot(report.link_graph).encode()
    if fmt == "pgm":
        return to_pgm(render_raster(report.cloud, report.params["resolution"]))
    if fmt == "csv":
        return cloud_csv(report.cloud).encode()
    raise ValueError(f"unknown format {fmt!r}; expected one of {', '.join(FORMATS)}")
